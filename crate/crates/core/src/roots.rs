//! Bracketing and Brent root finding for monotone increasing functions.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Finds `x` with `g(x) = 0` for nondecreasing `g`, starting from a guess and
/// expanding geometrically until the root is bracketed.
pub fn solve_increasing<T: Real>(
    mut g: impl FnMut(T) -> T,
    guess: T,
    step: T,
    xtol: T,
) -> Result<T> {
    let (lo, hi) = bracket_increasing(&mut g, guess, step)?;
    brent(g, lo, hi, xtol)
}

pub fn bracket_increasing<T: Real>(
    g: &mut impl FnMut(T) -> T,
    guess: T,
    step: T,
) -> Result<(T, T)> {
    let mut width = step;
    let mut lo = guess - width;
    let mut hi = guess + width;
    for _ in 0..64 {
        let glo = g(lo);
        let ghi = g(hi);
        if glo.is_nan() || ghi.is_nan() {
            return Err(Error::RootNotFound("objective returned NaN".into()));
        }
        match (glo <= T::zero(), ghi >= T::zero()) {
            (true, true) => return Ok((lo, hi)),
            (false, _) => {
                hi = lo;
                width = width * T::c(2.0);
                lo = lo - width;
            }
            (_, false) => {
                lo = hi;
                width = width * T::c(2.0);
                hi = hi + width;
            }
        }
    }
    Err(Error::RootNotFound(format!("no sign change near {guess}")))
}

/// Brent's method on a sign-changing bracket. Stops when the bracket is
/// narrower than `xtol` or an exact zero is hit.
pub fn brent<T: Real>(mut g: impl FnMut(T) -> T, lo: T, hi: T, xtol: T) -> Result<T> {
    let two = T::c(2.0);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a), g(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotFound(format!("[{lo}, {hi}] does not bracket a root")));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + xtol / two;
        let m = (c - b) / two;
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::c(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol.copysign(m) };
        fb = g(b);
    }
    Err(Error::RootNotFound("Brent iteration limit".into()))
}
