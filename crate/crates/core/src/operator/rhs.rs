use crate::discretization::InterfaceGrid;
use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::reference::nonconcentric_b1;
use crate::scalar::Real;

/// Injected current on one interface as a function of the polar angle `θ`
/// about the curve's center.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryData<T> {
    Zero,
    /// `sin(mθ)`.
    SineMode { m: u32 },
    /// `cos(6θ - π)` on `|θ - π/2| < π/12`, its negative on `|θ - 3π/2| < π/12`.
    WindowedCosine,
    /// Neumann datum of the Möbius-transplanted concentric solution.
    ConformalPullback { m: u32, alpha: T },
    /// `Σ_k cos_k cos(kθ) + sin_k sin(kθ)`; `sin[0]` is ignored.
    Fourier { cos: Vec<T>, sin: Vec<T> },
}

impl<T: Real> BoundaryData<T> {
    pub fn eval(&self, theta: T) -> T {
        match self {
            BoundaryData::Zero => T::zero(),
            BoundaryData::SineMode { m } => (T::from_u32(*m).unwrap_or_else(T::zero) * theta).sin(),
            BoundaryData::WindowedCosine => windowed_cosine(theta),
            BoundaryData::ConformalPullback { m, alpha } => nonconcentric_b1(*m, *alpha, theta),
            BoundaryData::Fourier { cos, sin } => {
                let mut acc = T::zero();
                for (k, &c) in cos.iter().enumerate() {
                    acc += c * (T::from_usize_lossy(k) * theta).cos();
                }
                for (k, &s) in sin.iter().enumerate().skip(1) {
                    acc += s * (T::from_usize_lossy(k) * theta).sin();
                }
                acc
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BoundaryData::Zero)
    }

    /// Values at the grid nodes, using the polar angle about `curve.center()`.
    pub fn sample(&self, curve: &Curve<T>, grid: &InterfaceGrid<T>) -> Vec<T> {
        if self.is_zero() {
            return vec![T::zero(); grid.len()];
        }
        let c = curve.center();
        grid.points
            .iter()
            .map(|p| {
                let d = *p - c;
                let th = d.y.atan2(d.x);
                let th = if th < T::zero() { th + T::two_pi() } else { th };
                self.eval(th)
            })
            .collect()
    }
}

fn windowed_cosine<T: Real>(theta: T) -> T {
    let pi = T::PI();
    let th = theta - T::two_pi() * (theta / T::two_pi()).floor();
    let w = pi / T::lit(12.0);
    let f = (T::lit(6.0) * th - pi).cos();
    if (th - pi * T::half()).abs() < w {
        f
    } else if (th - T::lit(1.5) * pi).abs() < w {
        -f
    } else {
        T::zero()
    }
}

/// Fails unless `|∫b dl| ≤ tol · ∫|b| dl` on the grid's quadrature.
pub fn check_compatibility<T: Real>(
    interface: usize,
    grid: &InterfaceGrid<T>,
    values: &[T],
    tol: T,
) -> Result<()> {
    let integral = grid.integrate(values);
    let norm: T = grid.weights.iter().zip(values).map(|(w, b)| *w * b.abs()).sum();
    if integral.abs() > tol * norm {
        return Err(Error::CompatibilityViolation {
            interface,
            integral: integral.to_f64_lossy(),
            norm: norm.to_f64_lossy(),
        });
    }
    Ok(())
}
