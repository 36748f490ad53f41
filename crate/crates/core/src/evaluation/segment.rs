use crate::error::{Error, Result};
use crate::operator::kernel::coincidence_floor;
use crate::scalar::{Real, Vec2};

/// `s log r`, taking the limit 0 at `r = 0`.
fn xlog<T: Real>(s: T, r: T) -> T {
    if r == T::zero() {
        T::zero()
    } else {
        s * r.ln()
    }
}

/// `(r²/2)(log r - ½)`, taking the limit 0 at `r = 0`.
fn r2log<T: Real>(r: T) -> T {
    if r == T::zero() {
        T::zero()
    } else {
        r * r * T::half() * (r.ln() - T::half())
    }
}

/// Potential at `x` of a single layer on the straight segment `x1 → x2`
/// whose density varies linearly from `g1` to `g2`:
/// `(1/2π) ∫ log|x - y| γ(y) dl_y`.
///
/// Positions along the segment are measured from the foot of the
/// perpendicular through `x`, so the expression is valid on both sides of the
/// line, on the segment itself and at its end points.
pub fn segment_potential<T: Real>(x1: Vec2<T>, x2: Vec2<T>, g1: T, g2: T, x: Vec2<T>) -> Result<T> {
    let v = x2 - x1;
    let len = v.norm();
    if len < coincidence_floor::<T>() {
        return Err(Error::DegenerateSegment);
    }
    let e = v.scale(len.recip());
    let s1 = (x1 - x).dot(e);
    let s2 = (x2 - x).dot(e);
    let d = (x - x1).dot(e.perp()).abs();
    let r1 = (x - x1).norm();
    let r2 = (x - x2).norm();
    let f0 = xlog(s2, r2) - xlog(s1, r1) - (s2 - s1) + d * (s2.atan2(d) - s1.atan2(d));
    let f1 = r2log(r2) - r2log(r1);
    let c0 = (g1 * s2 - g2 * s1) / len;
    let c1 = (g2 - g1) / len;
    Ok((c0 * f0 + c1 * f1) / T::two_pi())
}
