//! Monotone scalar root search shared by the projection solvers.

use crate::error::{Error, Result};

/// Outcome of a monotone root search.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Root {
    pub point: f64,
}

/// Root of a nonincreasing function `f` on `[0, inf)` with `f(0) > 0`.
///
/// The bracket is grown geometrically from `initial` until `f <= 0`, then
/// refined by Illinois regula falsi with a bisection safeguard. The returned
/// point always lies on the `f <= ftol` side. Fails with
/// [`Error::Infeasible`] when `f` stays positive up to `limit`.
pub(crate) fn root_nonincreasing<F>(mut f: F, f0: f64, initial: f64, limit: f64, ftol: f64) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(f0 > 0.0);
    let mut evaluations = 0;
    let (mut lo, mut flo) = (0.0, f0);
    let mut hi = initial.max(f64::MIN_POSITIVE);
    let mut fhi;
    loop {
        fhi = f(hi)?;
        evaluations += 1;
        if fhi <= 0.0 {
            break;
        }
        lo = hi;
        flo = fhi;
        hi *= 4.0;
        if hi > limit {
            return Err(Error::Infeasible(format!(
                "dual multiplier exceeded {limit:e} with residual {fhi:e}"
            )));
        }
    }
    if fhi >= -ftol {
        return Ok(Root { point: hi });
    }
    // Illinois: halve the retained endpoint value when the same side repeats
    let mut side = 0i8;
    for _ in 0..400 {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
        let mut m = if flo.is_finite() && fhi.is_finite() && flo != fhi {
            hi - fhi * (hi - lo) / (fhi - flo)
        } else {
            0.5 * (lo + hi)
        };
        if !(m > lo && m < hi) || !m.is_finite() {
            m = 0.5 * (lo + hi);
        }
        let fm = f(m)?;
        evaluations += 1;
        if fm.abs() <= ftol {
            return Ok(Root { point: m });
        }
        if fm > 0.0 {
            lo = m;
            flo = fm;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            hi = m;
            fhi = fm;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
        // keep bisection progress when the secant stalls on one end
        if evaluations % 8 == 0 {
            let mid = 0.5 * (lo + hi);
            let fmid = f(mid)?;
            evaluations += 1;
            if fmid.abs() <= ftol {
                return Ok(Root { point: mid });
            }
            if fmid > 0.0 {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
                fhi = fmid;
            }
            side = 0;
        }
    }
    Ok(Root { point: hi })
}
