use crate::error::{Error, Result};
use crate::scalar::{Real, Vec2};

/// Distance below which two points are treated as the same node.
pub fn coincidence_floor<T: Real>() -> T {
    T::epsilon() * T::lit(16.0)
}

/// Laplace Green's function `(1/2π) log|x - y|`.
#[inline]
pub fn kernel_g<T: Real>(x: Vec2<T>, y: Vec2<T>) -> T {
    (x - y).norm().ln() / T::two_pi()
}

/// `K(x, y) = (1/2π) (x - y)·n(x) / |x - y|²`, the normal derivative of `G`
/// in its first argument.
pub fn kernel_k<T: Real>(x: Vec2<T>, n_x: Vec2<T>, y: Vec2<T>) -> Result<T> {
    let d = x - y;
    let r2 = d.norm_sq();
    if r2.sqrt() < coincidence_floor::<T>() {
        return Err(Error::CoincidentPoints {
            dist: r2.sqrt().to_f64_lossy(),
        });
    }
    Ok(d.dot(n_x) / (T::two_pi() * r2))
}

/// Limit of `K(x, y)` as `y → x` along the curve: `κ / 4π`.
#[inline]
pub fn kernel_k_diag<T: Real>(curvature: T) -> T {
    curvature / (T::lit(2.0) * T::two_pi())
}
