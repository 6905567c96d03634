//! Half-space cuts of the hybrid methods and projection onto `base ∩ cuts`.
//!
//! For cuts `<v, a_i> <= alpha_i` the Lagrangian of
//! `min 1/2 phi(v, x) + sum_i lambda_i (<v, a_i> - alpha_i)` over `base` is
//! minimized by `v(lambda) = Pi_base J^{-1}(J x - sum_i lambda_i a_i)`. The dual
//! has at most two variables here, so it is maximized over `lambda >= 0` by
//! nested monotone root searches: for a fixed `lambda_1` the best
//! `lambda_2 >= 0` solves a scalar equation, and the derivative of the
//! partially maximized dual in `lambda_1` is again nonincreasing.

use super::projection::{generalized_project, ProjectionOptions, ProjectionResult};
use super::{ConvexSet, HalfSpace};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{DualVector, Space, Vector};
use crate::numeric::root_nonincreasing;

/// Normals with Euclidean coordinate norm below this are treated as zero.
pub const DEGENERATE_NORMAL: f64 = 1e-14;

/// `{v : phi(v, y) <= phi(v, x)}` as a half-space:
/// `<v, 2 (J x - J y)> <= ||x||^2 - ||y||^2`.
///
/// The offset is evaluated as `<x, a> - phi(x, y)` with the rounded normal
/// `a`, which places the cut at the right distance from `x` even when `a` is
/// tiny. The textbook `||x||^2 - ||y||^2` carries an absolute error of order
/// `eps ||x||^2`, i.e. `eps / ||a||` after normalization, and stalls the
/// hybrid iterations near `sqrt(eps)`.
pub fn cut_from_lyapunov_comparison(space: &Space, y: &Vector, x: &Vector) -> Result<HalfSpace> {
    space.check(x)?;
    space.check(y)?;
    let jy = space.duality_map(y);
    let normal = (&space.duality_map(x) - &jy) * 2.0;
    let d = x - y;
    let phi = if space.is_hilbert() {
        d.norm_squared()
    } else {
        // ||x||^2 - ||y||^2 - 2 <x - y, J y>: both terms are O(||x - y||)
        (space.norm_sq_difference(x, y)? - 2.0 * d.dot(&jy.0)).max(0.0)
    };
    let offset = x.dot(&normal.0) - phi;
    HalfSpace::new(normal, offset)
}

/// `{z : <x_n - z, J x_n - J x0> <= 0}`, stored as `<z, J x0 - J x_n> <= <x_n, J x0 - J x_n>`.
pub fn cut_from_anchor(space: &Space, xn: &Vector, x0: &Vector) -> Result<HalfSpace> {
    space.check(xn)?;
    space.check(x0)?;
    let normal = &space.duality_map(x0) - &space.duality_map(xn);
    let offset = xn.dot(&normal.0);
    HalfSpace::new(normal, offset)
}

/// Generalized projection of `x` onto `base` intersected with at most two cuts.
pub fn project_onto_cuts(
    space: &Space,
    base: &ConvexSet,
    cuts: &[HalfSpace],
    x: &Vector,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    space.check(x)?;
    base.check_dim(space.dim())?;
    for c in cuts {
        check_dim(space.dim(), c.dim())?;
    }
    if cuts.len() > 2 {
        return Err(Error::Unsupported(format!(
            "projection onto {} cuts (at most 2 are supported)",
            cuts.len()
        )));
    }
    let scale = 1.0 + x.amax();

    // Drop numerically zero cuts, normalize the rest.
    let mut active = Vec::with_capacity(cuts.len());
    for (i, c) in cuts.iter().enumerate() {
        let n = c.normal.coordinate_norm();
        if n < DEGENERATE_NORMAL {
            if c.offset < -opts.tol * scale {
                return Err(Error::Infeasible(format!(
                    "cut {i} has zero normal and negative offset {}",
                    c.offset
                )));
            }
            continue;
        }
        active.push(Normalized {
            index: i,
            scale: n,
            normal: &c.normal * (1.0 / n),
            offset: c.offset / n,
        });
    }

    let mut result = if active.is_empty() {
        generalized_project(space, base, x, opts)?
    } else if space.is_hilbert() && base.is_whole_space() {
        match closed_form(x, &active, scale) {
            Some(r) => r,
            None => dual_solve(space, base, &active, x, opts, scale)?,
        }
    } else {
        dual_solve(space, base, &active, x, opts, scale)?
    };

    // multipliers back in the scale of the caller's normals
    let mut multipliers = vec![0.0; cuts.len()];
    for (k, c) in active.iter().enumerate() {
        multipliers[c.index] = result.multipliers.get(k).copied().unwrap_or(0.0) / c.scale;
    }
    result.multipliers = multipliers;
    Ok(result)
}

struct Normalized {
    index: usize,
    scale: f64,
    normal: DualVector,
    offset: f64,
}

impl Normalized {
    fn gap(&self, v: &Vector) -> f64 {
        v.dot(&self.normal.0) - self.offset
    }
}

/// KKT residual: feasibility for inactive cuts, |gap| for active ones.
fn kkt_residual(cuts: &[Normalized], lambdas: &[f64], v: &Vector) -> f64 {
    cuts.iter()
        .zip(lambdas)
        .map(|(c, l)| {
            let g = c.gap(v);
            if *l > 0.0 {
                g.abs()
            } else {
                g.max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn shift_onto_active(cuts: &[Normalized], lambdas: &[f64], v: &Vector) -> Option<Vector> {
    let active: Vec<&Normalized> = cuts.iter().zip(lambdas).filter(|(_, l)| **l > 0.0).map(|(c, _)| c).collect();
    let g: Vec<f64> = active.iter().map(|c| c.gap(v)).collect();
    match active.as_slice() {
        [c] => Some(v - &c.normal.0 * (g[0] / c.normal.0.norm_squared())),
        [a, b] => {
            let (aa, ab, bb) = (a.normal.0.norm_squared(), a.normal.0.dot(&b.normal.0), b.normal.0.norm_squared());
            let det = aa * bb - ab * ab;
            if det <= 1e-12 * aa * bb {
                return None;
            }
            let m1 = (bb * g[0] - ab * g[1]) / det;
            let m2 = (aa * g[1] - ab * g[0]) / det;
            Some(v - &a.normal.0 * m1 - &b.normal.0 * m2)
        }
        _ => None,
    }
}

/// Active-set enumeration for the Euclidean whole-space case. Returns `None`
/// when no pattern verifies, e.g. for nearly parallel cuts.
fn closed_form(x: &Vector, cuts: &[Normalized], scale: f64) -> Option<ProjectionResult> {
    let tol = 1e-12 * scale;
    let feasible = |v: &Vector| cuts.iter().all(|c| c.gap(v) <= tol);
    let finish = |v: Vector, lambdas: Vec<f64>| ProjectionResult {
        residual: kkt_residual(cuts, &lambdas, &v),
        point: v,
        multipliers: lambdas,
        inner_iterations: 0,
    };

    if feasible(x) {
        return Some(finish(x.clone(), vec![0.0; cuts.len()]));
    }
    for (i, c) in cuts.iter().enumerate() {
        let lambda = c.gap(x);
        if lambda <= 0.0 {
            continue;
        }
        let v = x - &c.normal.0 * lambda;
        if feasible(&v) {
            let mut l = vec![0.0; cuts.len()];
            l[i] = lambda;
            return Some(finish(v, l));
        }
    }
    if cuts.len() == 2 {
        let (a, b) = (&cuts[0].normal.0, &cuts[1].normal.0);
        let g12 = a.dot(b);
        let det = 1.0 - g12 * g12;
        if det > 1e-10 {
            let (r1, r2) = (cuts[0].gap(x), cuts[1].gap(x));
            let l1 = (r1 - g12 * r2) / det;
            let l2 = (r2 - g12 * r1) / det;
            if l1 >= 0.0 && l2 >= 0.0 {
                let v = x - a * l1 - b * l2;
                if feasible(&v) {
                    return Some(finish(v, vec![l1, l2]));
                }
            }
        }
    }
    None
}

fn dual_solve(
    space: &Space,
    base: &ConvexSet,
    cuts: &[Normalized],
    x: &Vector,
    opts: &ProjectionOptions,
    scale: f64,
) -> Result<ProjectionResult> {
    let jx = space.duality_map(x);
    let mut evaluations = 0usize;
    let mut respond = |lambdas: &[f64]| -> Result<Vector> {
        evaluations += 1;
        if lambdas.iter().all(|l| *l == 0.0) {
            // avoid the J^{-1} J round trip
            return if base.is_whole_space() { Ok(x.clone()) } else { Ok(generalized_project(space, base, x, opts)?.point) };
        }
        let mut w = jx.clone();
        for (c, l) in cuts.iter().zip(lambdas) {
            if *l != 0.0 {
                w = &w - &(&c.normal * *l);
            }
        }
        let u = space.inverse_duality_map(&w);
        if base.is_whole_space() {
            Ok(u)
        } else {
            Ok(generalized_project(space, base, &u, opts)?.point)
        }
    };

    let ftol = 1e-15 * scale;
    let limit = 1e10 * (scale + jx.coordinate_norm() + cuts.iter().map(|c| c.offset.abs()).sum::<f64>());

    let lambdas: Vec<f64> = match cuts.len() {
        1 => {
            let c = &cuts[0];
            let g0 = c.gap(&respond(&[0.0])?);
            if g0 <= ftol {
                vec![0.0]
            } else {
                let root = root_nonincreasing(|l| Ok(c.gap(&respond(&[l])?)), g0, g0, limit, ftol)?;
                vec![root.point]
            }
        }
        2 => {
            let (c1, c2) = (&cuts[0], &cuts[1]);
            // best lambda_2 >= 0 for a given lambda_1
            let inner = |l1: f64, respond: &mut dyn FnMut(&[f64]) -> Result<Vector>| -> Result<(f64, Vector)> {
                let v0 = respond(&[l1, 0.0])?;
                let g0 = c2.gap(&v0);
                if g0 <= ftol {
                    return Ok((0.0, v0));
                }
                let root = root_nonincreasing(|l2| Ok(c2.gap(&respond(&[l1, l2])?)), g0, g0, limit, ftol)?;
                let v = respond(&[l1, root.point])?;
                Ok((root.point, v))
            };
            let (l2_at0, v_at0) = inner(0.0, &mut respond)?;
            let h0 = c1.gap(&v_at0);
            if h0 <= ftol {
                vec![0.0, l2_at0]
            } else {
                let root = root_nonincreasing(
                    |l1| {
                        let (_, v) = inner(l1, &mut respond)?;
                        Ok(c1.gap(&v))
                    },
                    h0,
                    h0,
                    limit,
                    ftol,
                )?;
                let (l2, _) = inner(root.point, &mut respond)?;
                vec![root.point, l2]
            }
        }
        n => return Err(Error::Unsupported(format!("dual projection with {n} cuts"))),
    };

    let mut point = respond(&lambdas)?;
    let mut residual = kkt_residual(cuts, &lambdas, &point);
    if !(residual <= opts.tol * scale) {
        // For p > 2, J^{-1} is only Hoelder continuous, so a rounding-level
        // error in lambda can leave a gap of order sqrt(eps) on an active
        // cut. Close it with the least-norm shift onto the active hyperplanes.
        if let Some(shifted) = shift_onto_active(cuts, &lambdas, &point) {
            let r = kkt_residual(cuts, &lambdas, &shifted);
            if r < residual && base.violation(&shifted) <= opts.tol * scale {
                point = shifted;
                residual = r;
            }
        }
    }
    if !(residual <= opts.tol * scale) {
        return Err(Error::NonConvergence {
            method: "cut projection dual",
            iterations: evaluations,
            residual,
        });
    }
    Ok(ProjectionResult {
        point,
        multipliers: lambdas,
        inner_iterations: evaluations,
        residual,
    })
}
