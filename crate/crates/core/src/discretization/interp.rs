//! Barycentric trigonometric and Lagrange interpolation.

use crate::scalar::Real;

/// Barycentric trigonometric interpolant through values on the shifted
/// uniform grid `q_m = (m + shift) / M`.
///
/// Uses `csc` weights for odd `M` and `cot` weights for even `M`.
pub fn trig_interpolate<T: Real>(values: &[T], shift: T, q: T) -> T {
    let m = values.len();
    if m == 0 {
        return T::zero();
    }
    if m == 1 {
        return values[0];
    }
    let mm = T::from_usize_lossy(m);
    let pi = T::PI();
    let odd = m % 2 == 1;
    let mut num = T::zero();
    let mut den = T::zero();
    for (i, &f) in values.iter().enumerate() {
        let qm = (T::from_usize_lossy(i) + shift) / mm;
        let arg = pi * (q - qm);
        let (s, c) = arg.sin_cos();
        if s.abs() < T::epsilon() * T::lit(4.0) {
            // sin(π(q - q_m)) vanishes only at the node itself (mod 1)
            return f;
        }
        let fw = if odd { s.recip() } else { c / s };
        let term = if i % 2 == 0 { fw } else { -fw };
        num += term * f;
        den += term;
    }
    num / den
}

/// Precomputed barycentric Lagrange interpolant on fixed nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct BarycentricLagrange<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> BarycentricLagrange<T> {
    /// Weights `w_m = 1 / Π_{n≠m} (q_m - q_n)`, rescaled by a common factor.
    pub fn new(nodes: Vec<T>) -> Self {
        let n = nodes.len();
        let mut weights = vec![T::one(); n];
        if n > 1 {
            let lo = nodes.iter().copied().fold(T::infinity(), T::min);
            let hi = nodes.iter().copied().fold(T::neg_infinity(), T::max);
            // scale differences by the node span to avoid overflow for large n
            let scale = (hi - lo) * T::lit(0.25);
            let scale = if scale > T::zero() { scale } else { T::one() };
            for m in 0..n {
                let mut p = T::one();
                for k in 0..n {
                    if k != m {
                        p = p * ((nodes[m] - nodes[k]) / scale);
                    }
                }
                weights[m] = p.recip();
            }
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn eval(&self, values: &[T], q: T) -> T {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut num = T::zero();
        let mut den = T::zero();
        for ((&x, &w), &f) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = q - x;
            if d == T::zero() {
                return f;
            }
            let t = w / d;
            num += t * f;
            den += t;
        }
        num / den
    }
}

/// One-shot Lagrange interpolation (weights recomputed each call).
pub fn lagrange_interpolate<T: Real>(nodes: &[T], values: &[T], q: T) -> T {
    BarycentricLagrange::new(nodes.to_vec()).eval(values, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::quadrature::{gauss_legendre_on, uniform_nodes};
    use std::f64::consts::TAU;

    #[test]
    fn trig_band_limited_exact() {
        let m = 9;
        let q = uniform_nodes::<f64>(m, 0.5);
        let f: Vec<f64> = q.iter().map(|&q| (TAU * q).sin()).collect();
        let v = trig_interpolate(&f, 0.5, 0.123);
        assert!((v - (TAU * 0.123).sin()).abs() < 1e-13);
    }

    #[test]
    fn trig_nodal() {
        let m = 12;
        let q = uniform_nodes::<f64>(m, 0.5);
        let f: Vec<f64> = q.iter().map(|&q| (TAU * q).cos().exp()).collect();
        assert_eq!(trig_interpolate(&f, 0.5, q[3]), f[3]);
    }

    #[test]
    fn trig_self_convergence() {
        let g = |q: f64| (TAU * q).sin().exp();
        let at = |m: usize| {
            let q = uniform_nodes::<f64>(m, 0.5);
            let f: Vec<f64> = q.iter().map(|&q| g(q)).collect();
            trig_interpolate(&f, 0.5, 0.377)
        };
        assert!((at(32) - at(64)).abs() < 1e-10);
        assert!((at(64) - g(0.377)).abs() < 1e-13);
    }

    #[test]
    fn lagrange_quadratic() {
        let v: f64 = lagrange_interpolate(&[0.0, 0.5, 1.0], &[0.0, 0.25, 1.0], 0.3);
        assert!((v - 0.09).abs() < 1e-16);
        assert_eq!(lagrange_interpolate(&[0.0, 0.5, 1.0], &[0.0, 0.25, 1.0], 0.0), 0.0);
    }

    #[test]
    fn lagrange_on_gauss_nodes() {
        let (x, _) = gauss_legendre_on::<f64>(16, 0.0, 1.0);
        let f: Vec<f64> = x.iter().map(|&x| (3.0 * x).cos()).collect();
        let it = BarycentricLagrange::new(x);
        assert!((it.eval(&f, 0.7) - 2.1_f64.cos()).abs() < 1e-12);
    }
}
