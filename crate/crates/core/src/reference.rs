//! Closed-form solutions for two circular interfaces.
//!
//! The concentric problem (unit disk with an inner disk of radius `α`, outer
//! conductivity 1 and inner conductivity `σ`, Neumann datum `sin(mθ)`) is
//! solved by separation of variables. A Möbius automorphism of the unit disk
//! moves the inner disk off-center, which gives an exact solution for a circle
//! through the origin.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Real, Vec2};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcentricSolution<T> {
    pub m: u32,
    /// Ratio of inner to outer conductivity.
    pub sigma: T,
    /// Inner radius.
    pub alpha: T,
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> ConcentricSolution<T> {
    pub fn new(m: u32, sigma: T, alpha: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange {
                what: "mode m",
                value: 0.0,
            });
        }
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::OutOfRange {
                what: "inner radius",
                value: alpha.to_f64_lossy(),
            });
        }
        if !(sigma > T::zero()) {
            return Err(Error::BadSigma {
                region: 1,
                sigma: sigma.to_f64_lossy(),
            });
        }
        let mf = T::from_u32(m).unwrap_or_else(T::one);
        let a2m = alpha.powi(2 * m as i32);
        let a = (T::lit(2.0) / mf) / (a2m * (sigma - T::one()) + sigma + T::one());
        let b = a * (sigma + T::one()) * T::half();
        let c = b - mf.recip();
        Ok(Self {
            m,
            sigma,
            alpha,
            a,
            b,
            c,
        })
    }

    fn mf(&self) -> T {
        T::from_u32(self.m).unwrap_or_else(T::one)
    }

    /// Potential at polar coordinates `(r, θ)`, `0 ≤ r ≤ 1`.
    pub fn u(&self, r: T, theta: T) -> Result<T> {
        if r > T::one() + T::lit(1e3) * T::epsilon() || r < T::zero() {
            return Err(Error::OutOfDomain { r: r.to_f64_lossy() });
        }
        let m = self.m as i32;
        let s = (self.mf() * theta).sin();
        if r <= self.alpha {
            Ok(self.a * r.powi(m) * s)
        } else {
            Ok((self.b * r.powi(m) + self.c * r.powi(-m)) * s)
        }
    }

    /// Radial derivative from inside (`outer = false`) or outside the inner circle.
    pub fn du_dr(&self, r: T, theta: T, outer: bool) -> T {
        let m = self.m as i32;
        let mf = self.mf();
        let s = (mf * theta).sin();
        if outer {
            mf * (self.b * r.powi(m - 1) - self.c * r.powi(-m - 1)) * s
        } else {
            mf * self.a * r.powi(m - 1) * s
        }
    }

    /// Jump of the radial derivative across the inner circle at angle `θ`.
    pub fn inner_density(&self, theta: T) -> T {
        exact_inner_density(self.m, self.sigma, self.alpha, theta)
    }
}

/// Free-function form of [`ConcentricSolution::u`].
pub fn concentric_u<T: Real>(sol: &ConcentricSolution<T>, r: T, theta: T) -> Result<T> {
    sol.u(r, theta)
}

/// `sin(mθ) · 2α^{m-1}(σ-1) / (α^{2m}(σ-1) + σ + 1)`.
pub fn exact_inner_density<T: Real>(m: u32, sigma: T, alpha: T, theta: T) -> T {
    let mf = T::from_u32(m).unwrap_or_else(T::one);
    let a2m = alpha.powi(2 * m as i32);
    let amp = T::lit(2.0) * alpha.powi(m as i32 - 1) * (sigma - T::one())
        / (a2m * (sigma - T::one()) + sigma + T::one());
    amp * (mf * theta).sin()
}

/// Disk automorphism sending `alpha` to the origin.
pub fn mobius<T: Real>(alpha: Complex<T>, z: Complex<T>) -> Complex<T> {
    (z - alpha) / (Complex::new(T::one(), T::zero()) - alpha.conj() * z)
}

pub fn mobius_inverse<T: Real>(alpha: Complex<T>, zt: Complex<T>) -> Complex<T> {
    (zt + alpha) / (Complex::new(T::one(), T::zero()) + alpha.conj() * zt)
}

/// Map parameter for which the circle through `0` and `a` becomes `|z̃| = α`.
pub fn alpha_from_a<T: Real>(a: T) -> Result<T> {
    if !(a >= T::zero() && a < T::one()) {
        return Err(Error::OutOfRange {
            what: "circle end point a",
            value: a.to_f64_lossy(),
        });
    }
    let p = (T::one() + a).sqrt();
    let q = (T::one() - a).sqrt();
    Ok((p - q) / (p + q))
}

/// Inverse of [`alpha_from_a`]: `a = 2α / (1 + α²)`.
pub fn a_from_alpha<T: Real>(alpha: T) -> T {
    T::lit(2.0) * alpha / (T::one() + alpha * alpha)
}

/// Neumann datum on the unit circle implied by pulling back `sin(mθ̃)`.
pub fn nonconcentric_b1<T: Real>(m: u32, alpha: T, theta: T) -> T {
    let (s, c) = theta.sin_cos();
    let a2 = alpha * alpha;
    let mf = T::from_u32(m).unwrap_or_else(T::one);
    let tt = (s * (T::one() - a2)).atan2(c * (T::one() + a2) - T::lit(2.0) * alpha);
    (mf * tt).sin() * (T::one() - a2) / (T::one() - T::lit(2.0) * alpha * c + a2)
}

/// Exact solution with the inner circle through `0` and `a(α)`, `α` real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonConcentricSolution<T> {
    pub inner: ConcentricSolution<T>,
}

impl<T: Real> NonConcentricSolution<T> {
    pub fn new(m: u32, sigma: T, alpha: T) -> Result<Self> {
        Ok(Self {
            inner: ConcentricSolution::new(m, sigma, alpha)?,
        })
    }

    pub fn alpha(&self) -> T {
        self.inner.alpha
    }

    /// Center and radius of the physical inner circle.
    pub fn inner_circle(&self) -> (Vec2<T>, T) {
        let a = a_from_alpha(self.inner.alpha);
        (Vec2::new(a * T::half(), T::zero()), a * T::half())
    }

    pub fn u(&self, p: Vec2<T>) -> Result<T> {
        let zt = mobius(Complex::new(self.inner.alpha, T::zero()), Complex::new(p.x, p.y));
        self.inner.u(zt.norm(), zt.im.atan2(zt.re))
    }

    pub fn b1(&self, theta: T) -> T {
        nonconcentric_b1(self.inner.m, self.inner.alpha, theta)
    }
}
