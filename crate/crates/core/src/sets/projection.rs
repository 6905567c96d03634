//! Metric and generalized projections onto [`ConvexSet`]s.
//!
//! The generalized projection `Pi_C x` minimizes `v -> phi(v, x)` over `C`,
//! equivalently `1/2 ||v||^2 - <v, J x>`. In Euclidean space it is the metric
//! projection. In `l_p` spaces each set kind gets its own solver:
//!
//! * half-spaces and cut intersections: one- or two-dimensional dual root
//!   search (see [`super::project_onto_cuts`]);
//! * boxes: the coordinates are explicit once `s = ||v||_p` is known, which
//!   leaves a monotone scalar equation in `s`;
//! * Euclidean balls: for a fixed multiplier `mu` of the ball constraint and a
//!   fixed `s = ||v||_p` every coordinate solves a scalar convex equation, so
//!   the projection reduces to two nested monotone scalar searches;
//! * affine subspaces: damped Newton on the stationarity equation in the
//!   coordinates of the subspace.

use nalgebra::DMatrix;

use super::{cuts, AffineSubspace, ConvexSet};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{lp_norm, Space, Vector};
use crate::numeric::root_nonincreasing;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionOptions {
    /// Acceptance tolerance for feasibility, complementary slackness and
    /// stationarity residuals.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub point: Vector,
    /// KKT multipliers of the cuts, in the scale of the stored normals.
    pub multipliers: Vec<f64>,
    pub inner_iterations: usize,
    pub residual: f64,
}

impl ProjectionResult {
    pub(crate) fn exact(point: Vector) -> Self {
        ProjectionResult {
            point,
            multipliers: Vec::new(),
            inner_iterations: 0,
            residual: 0.0,
        }
    }
}

/// Euclidean metric projection onto `set`.
pub fn metric_project(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    let space = Space::euclidean(x.len())?;
    Ok(generalized_project(&space, set, x, &ProjectionOptions::default())?.point)
}

/// Generalized projection `Pi_C x`.
pub fn generalized_project(space: &Space, set: &ConvexSet, x: &Vector, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    space.check(x)?;
    set.check_dim(space.dim())?;
    if space.is_hilbert() {
        return euclidean_project(space, set, x, opts);
    }
    match set {
        ConvexSet::WholeSpace => Ok(ProjectionResult::exact(x.clone())),
        ConvexSet::HalfSpace(h) => cuts::project_onto_cuts(space, &ConvexSet::WholeSpace, std::slice::from_ref(h), x, opts),
        ConvexSet::BaseWithCuts { base, cuts: cs } => cuts::project_onto_cuts(space, base, cs, x, opts),
        ConvexSet::Box { lower, upper } => Ok(ProjectionResult::exact(box_projection(space, lower, upper, x))),
        ConvexSet::Ball { center, radius } => ball_projection(space, center, *radius, x),
        ConvexSet::Affine(a) => affine_projection(space, a, x, opts),
    }
}

fn euclidean_project(space: &Space, set: &ConvexSet, x: &Vector, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    match set {
        ConvexSet::HalfSpace(h) => cuts::project_onto_cuts(space, &ConvexSet::WholeSpace, std::slice::from_ref(h), x, opts),
        ConvexSet::BaseWithCuts { base, cuts: cs } => cuts::project_onto_cuts(space, base, cs, x, opts),
        _ => Ok(ProjectionResult::exact(euclidean_base(set, x)?)),
    }
}

/// Closed-form Euclidean projections onto the non-intersection set kinds.
pub(crate) fn euclidean_base(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    match set {
        ConvexSet::WholeSpace => Ok(x.clone()),
        ConvexSet::Box { lower, upper } => {
            check_dim(lower.len(), x.len())?;
            Ok(Vector::from_fn(x.len(), |i, _| x[i].clamp(lower[i], upper[i])))
        }
        ConvexSet::Ball { center, radius } => {
            check_dim(center.len(), x.len())?;
            let r = x - center;
            let n = r.norm();
            if n <= *radius {
                Ok(x.clone())
            } else {
                Ok(center + r * (radius / n))
            }
        }
        ConvexSet::HalfSpace(h) => {
            check_dim(h.dim(), x.len())?;
            let viol = h.violation(x);
            if viol <= 0.0 {
                return Ok(x.clone());
            }
            let nn = h.normal.0.norm_squared();
            if h.is_degenerate() {
                return Err(Error::Infeasible(format!("half-space with zero normal and offset {}", h.offset)));
            }
            Ok(x - &h.normal.0 * (viol / nn))
        }
        ConvexSet::Affine(a) => {
            check_dim(a.dim(), x.len())?;
            Ok(a.project(x))
        }
        ConvexSet::BaseWithCuts { .. } => metric_project(set, x),
    }
}

/// Generalized projection onto a box in an `l_p` space.
///
/// With `s = ||v||_p` fixed, stationarity decouples into
/// `v_i = clamp(sign(w_i) |w_i|^(q-1) s^kappa, l_i, u_i)`, `kappa = (p-2)/(p-1)`,
/// where `w = J x`. Every such coordinate has `|v_i(s)| / s` nonincreasing, so
/// `||v(s)|| / s = 1` has a single root, found by bisection in `log s`.
fn box_projection(space: &Space, lower: &Vector, upper: &Vector, x: &Vector) -> Vector {
    let p = space.p();
    let q = space.q();
    let clamp0 = Vector::from_fn(x.len(), |i, _| 0.0f64.clamp(lower[i], upper[i]));
    let w = space.duality_map(x);
    if w.0.iter().all(|c| *c == 0.0) {
        return clamp0;
    }
    let kappa = (p - 2.0) / (p - 1.0);
    let coeff = w.0.map(|c| c.signum() * c.abs().powf(q - 1.0));
    let at = |s: f64| -> Vector {
        let sk = s.powf(kappa);
        Vector::from_fn(x.len(), |i, _| {
            let c = coeff[i];
            let raw = if c == 0.0 { 0.0 } else { c * sk };
            raw.clamp(lower[i], upper[i])
        })
    };
    if kappa == 0.0 {
        return at(1.0);
    }
    let ratio = |s: f64| lp_norm(at(s).as_slice(), p) / s - 1.0;
    let s0 = space.norm_of(x.as_slice()).max(1e-300);
    let (mut lo, mut hi) = (s0, s0);
    while ratio(lo) < 0.0 {
        lo *= 0.25;
        if lo < 1e-300 {
            return at(lo);
        }
    }
    while ratio(hi) > 0.0 {
        hi *= 4.0;
        if hi > 1e300 {
            return at(hi);
        }
    }
    for _ in 0..200 {
        if hi / lo - 1.0 <= 4.0 * f64::EPSILON {
            break;
        }
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if ratio(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at((lo * hi).sqrt())
}

/// Generalized projection onto the Euclidean ball `||v - c||_2 <= R` in an
/// `l_p` space.
///
/// Stationarity reads `J v + mu (v - c) = J x`. Writing `v_i = s b_i sign(t_i)`
/// with `s = ||v||_p` and `t = J x + mu c`, each `b_i >= 0` solves
/// `b^(p-1) + mu b = |t_i| / s`; `||b||_p = 1` fixes `s`, and
/// `||v(mu) - c||_2 = R` fixes `mu`. All three equations are monotone.
fn ball_projection(space: &Space, center: &Vector, radius: f64, x: &Vector) -> Result<ProjectionResult> {
    if (x - center).norm() <= radius {
        return Ok(ProjectionResult::exact(x.clone()));
    }
    let p = space.p();
    let w = space.duality_map(x);
    let at = |mu: f64| -> Vector {
        let t = &w.0 + center * mu;
        let scaled = |sigma: f64| t.map(|ti| scalar_coordinate(p, mu, ti.abs() * sigma));
        let excess = |sigma: f64| lp_norm(scaled(sigma).as_slice(), p) - 1.0;
        if t.iter().all(|ti| *ti == 0.0) {
            return Vector::zeros(t.len());
        }
        // ||b(sigma)||_p increases with sigma = 1 / s
        let (mut lo, mut hi) = (1.0, 1.0);
        while excess(lo) > 0.0 && lo > 1e-300 {
            lo *= 0.25;
        }
        while excess(hi) < 0.0 && hi < 1e300 {
            hi *= 4.0;
        }
        for _ in 0..300 {
            if hi / lo - 1.0 <= 4.0 * f64::EPSILON {
                break;
            }
            let mid = (lo * hi).sqrt();
            if !(mid > lo && mid < hi) {
                break;
            }
            if excess(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sigma = (lo * hi).sqrt();
        let b = scaled(sigma);
        Vector::from_fn(t.len(), |i, _| b[i] * t[i].signum() / sigma)
    };
    let gap = |mu: f64| Ok((at(mu) - center).norm() - radius);
    let f0 = (x - center).norm() - radius;
    let scale = 1.0 + x.amax() + center.amax() + radius;
    let root = root_nonincreasing(gap, f0, 1.0, 1e12 * scale, 1e-15 * scale)?;
    let point = at(root.point);
    let residual = ((&point - center).norm() - radius).max(0.0);
    Ok(ProjectionResult {
        point,
        multipliers: vec![root.point],
        inner_iterations: 0,
        residual,
    })
}

/// Generalized projection onto `o + span(B)` in an `l_p` space: the zero of
/// `g(t) = B^T (J(o + B t) - J x)`, by Newton's method on the convex
/// objective `1/2 ||o + B t||^2 - <o + B t, J x>`. Steps are accepted on
/// decrease of either the objective or `||g||`, since the objective alone
/// stops resolving progress long before `g` is at rounding level.
fn affine_projection(space: &Space, a: &AffineSubspace, x: &Vector, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    let k = a.rank();
    if k == 0 {
        return Ok(ProjectionResult::exact(a.origin().clone()));
    }
    if k == a.dim() {
        return Ok(ProjectionResult::exact(x.clone()));
    }
    let b = a.basis();
    let o = a.origin();
    let w = space.duality_map(x);
    let tol = opts.tol.min(1e-12) * (1.0 + w.0.amax());
    let eval = |t: &Vector| {
        let v = o + b * t;
        let n = space.norm_of(v.as_slice());
        let jv = space.duality_map(&v);
        let grad = b.transpose() * (&jv.0 - &w.0);
        (0.5 * n * n - v.dot(&w.0), grad, v)
    };
    let mut t = b.transpose() * (a.project(x) - o);
    let (mut value, mut grad, mut v) = eval(&t);
    for it in 0..opts.max_iter {
        let residual = grad.amax();
        if residual <= tol {
            return Ok(ProjectionResult {
                point: v,
                multipliers: Vec::new(),
                inner_iterations: it,
                residual,
            });
        }
        let hess = b.transpose() * lp_norm_hessian(space, &v) * b;
        let dir = match hess.cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad.clone(),
        };
        let slope = grad.dot(&dir);
        let gnorm = grad.norm();
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &t + &dir * step;
            let (cv, cg, cvec) = eval(&cand);
            if cv <= value + 1e-4 * step * slope || cg.norm() < (1.0 - 1e-4 * step) * gnorm {
                (t, value, grad, v) = (cand, cv, cg, cvec);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = grad.amax();
    if residual <= 1e3 * tol {
        return Ok(ProjectionResult {
            point: v,
            multipliers: Vec::new(),
            inner_iterations: opts.max_iter,
            residual,
        });
    }
    Err(Error::NonConvergence {
        method: "affine generalized projection",
        iterations: opts.max_iter,
        residual,
    })
}

/// Hessian of `1/2 ||v||_p^2`, with coordinates bounded away from zero so it
/// stays finite for `p < 2`.
fn lp_norm_hessian(space: &Space, v: &Vector) -> DMatrix<f64> {
    let d = v.len();
    let p = space.p();
    let n = space.norm_of(v.as_slice());
    if n == 0.0 {
        return DMatrix::identity(d, d);
    }
    let floor = 1e-12 * n;
    let u = v.map(|c| (c.abs() / n).powf(p - 1.0) * c.signum());
    let mut h = &u * u.transpose() * (2.0 - p);
    for i in 0..d {
        h[(i, i)] += (p - 1.0) * (v[i].abs().max(floor) / n).powf(p - 2.0);
    }
    h
}

/// Nonnegative root `b` of `b^(p-1) + mu b = tau`, by Newton's method on a
/// convex increasing reformulation started above the root.
fn scalar_coordinate(p: f64, mu: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        return tau / (1.0 + mu);
    }
    // p > 2: F(y) = y^k + mu y with y = b, k = p - 1.
    // p < 2: F(y) = y + mu y^k with y = b^(p-1), k = 1 / (p - 1).
    let (k, lead_power) = if p > 2.0 { (p - 1.0, true) } else { (1.0 / (p - 1.0), false) };
    let value = |y: f64| if lead_power { y.powf(k) + mu * y } else { y + mu * y.powf(k) };
    let slope = |y: f64| {
        if lead_power {
            k * y.powf(k - 1.0) + mu
        } else {
            1.0 + mu * k * y.powf(k - 1.0)
        }
    };
    let mut y = if lead_power { tau.powf(1.0 / k) } else { tau };
    if mu > 0.0 {
        y = y.min(if lead_power { tau / mu } else { (tau / mu).powf(1.0 / k) });
    }
    for _ in 0..200 {
        let next = y - (value(y) - tau) / slope(y);
        if !(next < y) || !next.is_finite() {
            break;
        }
        y = next.max(0.0);
    }
    if lead_power {
        y
    } else {
        y.powf(k)
    }
}
