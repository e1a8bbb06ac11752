use super::Tolerance;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A bracketed root: `x` is the midpoint of the final bracket of half-width `width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub x: T,
    pub width: T,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]`.
///
/// `f(lo)` and `f(hi)` must differ in sign (or one of them vanish). Iteration
/// stops when the bracket half-width falls below `tol.threshold(x)` or `f`
/// vanishes exactly. The returned `x` always lies in `[lo, hi]`.
pub fn find_root<T, F>(mut f: F, lo: T, hi: T, tol: &Tolerance<T>) -> Result<Root<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !(lo < hi) {
        return Err(Error::domain("find_root", "requires lo < hi", lo.as_f64()));
    }
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Bracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: fa.as_f64(),
            f_hi: fb.as_f64(),
        });
    }
    if fa == T::zero() {
        return Ok(Root { x: a, width: T::zero(), iterations: 0 });
    }
    if fb == T::zero() {
        return Ok(Root { x: b, width: T::zero(), iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: fa.as_f64(),
            f_hi: fb.as_f64(),
        });
    }
    let a_negative = fa < T::zero();
    let half = T::lit(0.5);

    for it in 1..=tol.max_iter() {
        let mid = a + (b - a) * half;
        let width = (b - a) * half;
        if width <= tol.threshold(mid) || mid <= a || mid >= b {
            return Ok(Root { x: mid, width, iterations: it });
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::Integration {
                op: "find_root",
                msg: "function returned NaN",
                at: mid.as_f64(),
            });
        }
        if fm == T::zero() {
            return Ok(Root { x: mid, width: T::zero(), iterations: it });
        }
        if (fm < T::zero()) == a_negative {
            a = mid;
        } else {
            b = mid;
        }
    }
    Err(Error::Convergence {
        op: "find_root",
        iterations: tol.max_iter(),
    })
}
