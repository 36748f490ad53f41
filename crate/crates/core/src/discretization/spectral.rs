//! Spectral-tail diagnostics used to decide whether a density is resolved.

use num_complex::Complex;

use super::quadrature::{gauss_legendre, legendre_values};
use crate::scalar::Real;

/// Magnitudes of the two highest retained modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralTail<T> {
    pub last: T,
    pub second_last: T,
}

impl<T: Real> SpectralTail<T> {
    pub fn max(&self) -> T {
        self.last.max(self.second_last)
    }

    /// Both coefficients at or below `tol`; checking two guards against a
    /// symmetry zeroing one of them.
    pub fn resolved(&self, tol: T) -> bool {
        self.last <= tol && self.second_last <= tol
    }
}

/// Fourier coefficients `c_k`, `k = -K..=K` with `K = ⌊(M-1)/2⌋`, of samples on
/// the shifted grid `(m + shift) / M`. The grid shift is compensated by the
/// phase factor so that band-limited data give exact coefficients.
pub fn fourier_coefficients<T: Real>(values: &[T], shift: T) -> Vec<Complex<T>> {
    let m = values.len();
    if m == 0 {
        return Vec::new();
    }
    let k_max = (m - 1) / 2;
    let k_max_i = k_max as i64;
    (-k_max_i..=k_max_i)
        .map(|k| fourier_coefficient(values, shift, k))
        .collect()
}

/// Single coefficient `c_k = (1/M) Σ f_m exp(-2πik(m+s)/M)`.
pub fn fourier_coefficient<T: Real>(values: &[T], shift: T, k: i64) -> Complex<T> {
    let m = values.len();
    let mm = T::from_usize_lossy(m);
    let kk = T::from_i64(k).unwrap_or_else(T::zero);
    let mut acc = Complex::new(T::zero(), T::zero());
    for (i, &f) in values.iter().enumerate() {
        // reduce k*i mod M before scaling to keep the phase argument small
        let r = (k * i as i64).rem_euclid(m as i64);
        let arg = -T::two_pi() * (T::from_i64(r).unwrap_or_else(T::zero) + kk * shift) / mm;
        let (s, c) = arg.sin_cos();
        acc = acc + Complex::new(f * c, f * s);
    }
    acc / mm
}

/// `|c_K|` and `|c_{K-1}|` for samples on a shifted uniform grid.
pub fn fourier_tail<T: Real>(values: &[T], shift: T) -> SpectralTail<T> {
    let m = values.len();
    if m < 3 {
        return SpectralTail {
            last: T::zero(),
            second_last: T::zero(),
        };
    }
    let k = ((m - 1) / 2) as i64;
    SpectralTail {
        last: fourier_coefficient(values, shift, k).norm(),
        second_last: fourier_coefficient(values, shift, k - 1).norm(),
    }
}

/// Legendre coefficients of the degree `M-1` interpolant through values at
/// the `M` Gauss-Legendre nodes of a panel, by discrete projection.
pub fn legendre_coefficients<T: Real>(values: &[T]) -> Vec<T> {
    let m = values.len();
    if m == 0 {
        return Vec::new();
    }
    let (t, w) = gauss_legendre::<T>(m);
    let mut c = vec![T::zero(); m];
    for j in 0..m {
        let p = legendre_values(m, t[j]);
        for k in 0..m {
            c[k] += w[j] * values[j] * p[k];
        }
    }
    for (k, ck) in c.iter_mut().enumerate() {
        *ck = *ck * (T::from_usize_lossy(2 * k + 1) * T::half());
    }
    c
}

/// Magnitudes of the last two Legendre coefficients of a panel.
pub fn legendre_tail<T: Real>(values: &[T]) -> SpectralTail<T> {
    let c = legendre_coefficients(values);
    let m = c.len();
    if m < 2 {
        return SpectralTail {
            last: T::zero(),
            second_last: T::zero(),
        };
    }
    SpectralTail {
        last: c[m - 1].abs(),
        second_last: c[m - 2].abs(),
    }
}
