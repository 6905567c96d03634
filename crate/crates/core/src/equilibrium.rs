//! Monotone bifunctions and their resolvents.
//!
//! Every catalog bifunction satisfies the standard conditions by
//! construction: `f(x, x) = 0`, monotonicity `f(x, y) + f(y, x) <= 0`,
//! hemicontinuity in `x` and convexity plus lower semicontinuity in `y`.
//! Each one is driven by a monotone operator `F`:
//!
//! | variant | `f(x, y)` | `F(x)` |
//! |---|---|---|
//! | zero | `0` | `0` |
//! | variational inequality | `<M x + q, y - x>` | `M x + q` |
//! | convex difference | `g(y) - g(x)` | `grad g(x)` |
//!
//! and the resolvent `T_r x` is the unique `z in C` with
//! `<y - z, r F(z) + J z - J x> >= 0` for all `y in C`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Space, Vector};
use crate::sampling::{self, uniform_cube};
use crate::sets::{generalized_project, metric_project, ConvexSet, ProjectionOptions};

/// Convex functions usable in [`Bifunction::ConvexDifference`].
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexFunction {
    /// `1/2 v^T H v + b^T v + c` with `H` symmetric positive semidefinite.
    Quadratic { hessian: DMatrix<f64>, linear: Vector, constant: f64 },
    /// `weight * huber(||v - center||_2)` with quadratic zone of width
    /// `smoothing`: `t^2 / (2 delta)` for `t <= delta`, `t - delta/2` beyond.
    Huber { center: Vector, weight: f64, smoothing: f64 },
}

impl ConvexFunction {
    pub fn dim(&self) -> usize {
        match self {
            ConvexFunction::Quadratic { linear, .. } => linear.len(),
            ConvexFunction::Huber { center, .. } => center.len(),
        }
    }

    pub fn value(&self, v: &Vector) -> f64 {
        match self {
            ConvexFunction::Quadratic { hessian, linear, constant } => 0.5 * v.dot(&(hessian * v)) + linear.dot(v) + constant,
            ConvexFunction::Huber { center, weight, smoothing } => {
                let t = (v - center).norm();
                weight * if t <= *smoothing { t * t / (2.0 * smoothing) } else { t - 0.5 * smoothing }
            }
        }
    }

    pub fn gradient(&self, v: &Vector) -> Vector {
        match self {
            ConvexFunction::Quadratic { hessian, linear, .. } => hessian * v + linear,
            ConvexFunction::Huber { center, weight, smoothing } => {
                let d = v - center;
                let t = d.norm();
                d * (weight / t.max(*smoothing))
            }
        }
    }

    fn certify(&self) -> Result<()> {
        match self {
            ConvexFunction::Quadratic { hessian, linear, constant } => {
                check_square(hessian, linear.len())?;
                if (hessian - hessian.transpose()).amax() > 1e-12 * hessian.amax().max(1.0) {
                    return Err(Error::InvalidParameter("quadratic hessian must be symmetric".into()));
                }
                if !constant.is_finite() {
                    return Err(Error::InvalidParameter("quadratic constant must be finite".into()));
                }
                let lmin = min_symmetric_eigenvalue(hessian);
                if lmin < -1e-12 * hessian.amax().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "quadratic hessian is not positive semidefinite (eigenvalue {lmin:e})"
                    )));
                }
                Ok(())
            }
            ConvexFunction::Huber { weight, smoothing, .. } => {
                if !(*weight >= 0.0 && weight.is_finite() && *smoothing > 0.0 && smoothing.is_finite()) {
                    return Err(Error::InvalidParameter("huber function needs weight >= 0 and smoothing > 0".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Bifunction {
    Zero,
    /// `f(x, y) = <M x + q, y - x>`.
    VariationalInequality { matrix: DMatrix<f64>, offset: Vector },
    /// `f(x, y) = g(y) - g(x)`.
    ConvexDifference(ConvexFunction),
}

impl Bifunction {
    /// Variational-inequality bifunction. Only shapes are checked here; use
    /// [`Bifunction::certify`] to require monotonicity.
    pub fn vi(matrix: DMatrix<f64>, offset: Vector) -> Result<Self> {
        check_square(&matrix, offset.len())?;
        Ok(Bifunction::VariationalInequality { matrix, offset })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Bifunction::Zero => None,
            Bifunction::VariationalInequality { offset, .. } => Some(offset.len()),
            Bifunction::ConvexDifference(g) => Some(g.dim()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Bifunction::Zero)
    }

    fn check(&self, x: &Vector) -> Result<()> {
        match self.dim() {
            Some(d) => check_dim(d, x.len()),
            None => Ok(()),
        }
    }

    pub fn evaluate(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        self.check(x)?;
        Ok(match self {
            Bifunction::Zero => 0.0,
            Bifunction::VariationalInequality { matrix, offset } => (matrix * x + offset).dot(&(y - x)),
            Bifunction::ConvexDifference(g) => {
                if x == y {
                    0.0
                } else {
                    g.value(y) - g.value(x)
                }
            }
        })
    }

    /// Monotone operator behind the bifunction.
    pub fn operator(&self, x: &Vector) -> Vector {
        match self {
            Bifunction::Zero => Vector::zeros(x.len()),
            Bifunction::VariationalInequality { matrix, offset } => matrix * x + offset,
            Bifunction::ConvexDifference(g) => g.gradient(x),
        }
    }

    /// Confirms the catalog conditions hold exactly: the symmetric part of
    /// `M` is positive semidefinite, quadratics are convex, and so on.
    pub fn certify(&self) -> Result<()> {
        match self {
            Bifunction::Zero => Ok(()),
            Bifunction::VariationalInequality { matrix, offset } => {
                check_square(matrix, offset.len())?;
                let lmin = min_symmetric_eigenvalue(&symmetric_part(matrix));
                if lmin < -1e-12 * matrix.amax().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "operator is not monotone: symmetric part has eigenvalue {lmin:e}"
                    )));
                }
                Ok(())
            }
            Bifunction::ConvexDifference(g) => g.certify(),
        }
    }

    /// Monotonicity modulus, Lipschitz constant and whether `F` is a gradient.
    fn operator_constants(&self, dim: usize) -> OperatorConstants {
        match self {
            Bifunction::Zero => OperatorConstants {
                modulus: 0.0,
                lipschitz: 0.0,
                symmetric: true,
                matrix: Some(DMatrix::zeros(dim, dim)),
            },
            Bifunction::VariationalInequality { matrix, .. } => {
                let sym = symmetric_part(matrix);
                let symmetric = (matrix - matrix.transpose()).amax() <= 1e-14 * matrix.amax().max(f64::MIN_POSITIVE);
                let eig = SymmetricEigen::new(sym).eigenvalues;
                let lipschitz = if symmetric { eig.amax() } else { matrix.clone().svd(false, false).singular_values.max() };
                OperatorConstants {
                    modulus: eig.min(),
                    lipschitz,
                    symmetric,
                    matrix: Some(matrix.clone()),
                }
            }
            Bifunction::ConvexDifference(ConvexFunction::Quadratic { hessian, .. }) => {
                let eig = SymmetricEigen::new(symmetric_part(hessian)).eigenvalues;
                OperatorConstants {
                    modulus: eig.min(),
                    lipschitz: eig.amax(),
                    symmetric: true,
                    matrix: Some(hessian.clone()),
                }
            }
            Bifunction::ConvexDifference(ConvexFunction::Huber { weight, smoothing, .. }) => OperatorConstants {
                modulus: 0.0,
                lipschitz: weight / smoothing,
                symmetric: true,
                matrix: None,
            },
        }
    }

    /// Samples the structural conditions on pairs from `[-radius, radius]^dim`.
    pub fn check_conditions(&self, dim: usize, samples: usize, tol: f64, seed: u64, radius: f64) -> Result<ConditionReport> {
        if let Some(d) = self.dim() {
            check_dim(d, dim)?;
        }
        let mut rng = sampling::rng(seed);
        let mut report = ConditionReport {
            samples,
            tolerance: tol,
            diagonal_max: 0.0,
            monotonicity_max: f64::NEG_INFINITY,
            convexity_max: f64::NEG_INFINITY,
            monotonicity_witness: None,
        };
        for _ in 0..samples {
            let x = uniform_cube(&mut rng, dim, radius);
            let y = uniform_cube(&mut rng, dim, radius);
            let y2 = uniform_cube(&mut rng, dim, radius);
            report.diagonal_max = report.diagonal_max.max(self.evaluate(&x, &x)?.abs());
            let m = self.evaluate(&x, &y)? + self.evaluate(&y, &x)?;
            if m > report.monotonicity_max {
                report.monotonicity_max = m;
                if m > tol {
                    report.monotonicity_witness = Some((x.clone(), y.clone()));
                }
            }
            let mid = (&y + &y2) * 0.5;
            let gap = self.evaluate(&x, &mid)? - 0.5 * (self.evaluate(&x, &y)? + self.evaluate(&x, &y2)?);
            report.convexity_max = report.convexity_max.max(gap);
        }
        Ok(report)
    }
}

/// Outcome of [`Bifunction::check_conditions`]. Hemicontinuity holds by
/// construction for every catalog variant and is not sampled.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub samples: usize,
    pub tolerance: f64,
    /// Largest `|f(x, x)|`; must be exactly zero.
    pub diagonal_max: f64,
    /// Largest `f(x, y) + f(y, x)`.
    pub monotonicity_max: f64,
    /// Largest midpoint convexity gap in the second argument.
    pub convexity_max: f64,
    pub monotonicity_witness: Option<(Vector, Vector)>,
}

impl ConditionReport {
    pub fn diagonal_ok(&self) -> bool {
        self.diagonal_max == 0.0
    }

    pub fn monotone_ok(&self) -> bool {
        self.monotonicity_max <= self.tolerance
    }

    pub fn convex_ok(&self) -> bool {
        self.convexity_max <= self.tolerance
    }

    pub fn passed(&self) -> bool {
        self.diagonal_ok() && self.monotone_ok() && self.convex_ok()
    }
}

struct OperatorConstants {
    modulus: f64,
    lipschitz: f64,
    symmetric: bool,
    matrix: Option<DMatrix<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventParams {
    pub r: f64,
    pub inner_tol: f64,
    pub max_inner_iterations: usize,
}

impl Default for ResolventParams {
    fn default() -> Self {
        ResolventParams {
            r: 1.0,
            inner_tol: 1e-10,
            max_inner_iterations: 100_000,
        }
    }
}

impl ResolventParams {
    pub fn with_r(r: f64) -> Self {
        ResolventParams { r, ..Default::default() }
    }
}

/// Resolvent `T_r x`.
///
/// * zero bifunction: the generalized projection `Pi_C x`;
/// * Hilbert spaces (Euclidean or `l_2`): projected fixed-point iteration on
///   the strongly monotone operator `G(v) = F(v) + (v - x) / r` with a step
///   chosen from its monotonicity and Lipschitz constants, stopped by the a
///   posteriori contraction bound;
/// * other `l_p` spaces: Tseng's forward-backward-forward splitting on
///   `G(v) = F(v) + (J v - J x) / r` with backtracking, stopped on the natural
///   residual `||v - P_C(v - r G(v))||`.
pub fn resolvent(space: &Space, set: &ConvexSet, f: &Bifunction, params: &ResolventParams, x: &Vector) -> Result<Vector> {
    if !(params.r > 0.0 && params.r.is_finite()) {
        return Err(Error::InvalidParameter(format!("resolvent parameter r must be positive, got {}", params.r)));
    }
    space.check(x)?;
    set.check_dim(space.dim())?;
    f.check(x)?;
    if f.is_zero() {
        let opts = ProjectionOptions {
            tol: params.inner_tol.max(1e-12),
            ..Default::default()
        };
        return Ok(generalized_project(space, set, x, &opts)?.point);
    }
    if space.is_hilbert() {
        euclidean_resolvent(set, f, params, x)
    } else {
        banach_resolvent(space, set, f, params, x)
    }
}

fn euclidean_resolvent(set: &ConvexSet, f: &Bifunction, params: &ResolventParams, x: &Vector) -> Result<Vector> {
    let inv_r = 1.0 / params.r;
    let k = f.operator_constants(x.len());
    let modulus = k.modulus + inv_r;
    if !(modulus > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "resolvent operator is not strongly monotone (modulus {modulus:e}); the bifunction is not monotone"
        )));
    }
    let (step, rate) = if k.symmetric {
        let lipschitz = k.lipschitz + inv_r;
        (2.0 / (modulus + lipschitz), (lipschitz - modulus) / (lipschitz + modulus))
    } else {
        let shifted = k.matrix.expect("non-symmetric operators are matrices") + DMatrix::identity(x.len(), x.len()) * inv_r;
        let lipschitz = shifted.svd(false, false).singular_values.max();
        (modulus / (lipschitz * lipschitz), (1.0 - (modulus / lipschitz).powi(2)).max(0.0).sqrt())
    };
    let factor = if rate < 1.0 { rate / (1.0 - rate) } else { f64::INFINITY };

    let mut z = metric_project(set, x)?;
    let mut delta = f64::INFINITY;
    for _ in 0..params.max_inner_iterations {
        let g = f.operator(&z) + (&z - x) * inv_r;
        let next = metric_project(set, &(&z - g * step))?;
        delta = (&next - &z).norm();
        z = next;
        if delta * factor <= params.inner_tol * (1.0 + z.amax()) || delta == 0.0 {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence {
        method: "resolvent fixed-point iteration",
        iterations: params.max_inner_iterations,
        residual: delta,
    })
}

fn banach_resolvent(space: &Space, set: &ConvexSet, f: &Bifunction, params: &ResolventParams, x: &Vector) -> Result<Vector> {
    let inv_r = 1.0 / params.r;
    let jx = space.duality_map(x);
    let op = |v: &Vector| f.operator(v) + (space.duality_map(v).0 - &jx.0) * inv_r;
    let natural_residual = |v: &Vector, g: &Vector| -> Result<f64> { Ok((metric_project(set, &(v - g * params.r))? - v).amax()) };
    const THETA: f64 = 0.9;

    let k = f.operator_constants(x.len());
    let mut step = 1.0 / (k.lipschitz + inv_r * space.p().max(space.q()));
    let mut z = metric_project(set, x)?;
    let mut g = op(&z);
    let mut residual = natural_residual(&z, &g)?;
    for _ in 0..params.max_inner_iterations {
        if residual <= params.inner_tol * (1.0 + z.amax()) {
            return Ok(z);
        }
        let (zb, gb) = loop {
            let zb = metric_project(set, &(&z - &g * step))?;
            let gb = op(&zb);
            let moved = (&zb - &z).norm();
            if step * (&gb - &g).norm() <= THETA * moved || moved == 0.0 {
                break (zb, gb);
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(Error::NonConvergence {
                    method: "resolvent forward-backward-forward",
                    iterations: 0,
                    residual,
                });
            }
        };
        let rb = natural_residual(&zb, &gb)?;
        if rb <= params.inner_tol * (1.0 + zb.amax()) {
            return Ok(zb);
        }
        z = metric_project(set, &(&zb - (&gb - &g) * step))?;
        g = op(&z);
        residual = natural_residual(&z, &g)?;
        step *= 1.5;
    }
    Err(Error::NonConvergence {
        method: "resolvent forward-backward-forward",
        iterations: params.max_inner_iterations,
        residual,
    })
}

/// `min_y f(z, y) + (1/r) <y - z, J z - J x>` over `z` itself and `probes`
/// points of `C` drawn around `z` (Euclidean projections of points of the
/// cube of half-width `radius`). A certified resolvent output gives a value
/// at or just below zero.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_residual(
    space: &Space,
    set: &ConvexSet,
    f: &Bifunction,
    r: f64,
    x: &Vector,
    z: &Vector,
    probes: usize,
    seed: u64,
    radius: f64,
) -> Result<f64> {
    space.check(x)?;
    space.check(z)?;
    let mut rng = sampling::rng(seed);
    let gap = &space.duality_map(z) - &space.duality_map(x);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let y = metric_project(set, &(z + uniform_cube(&mut rng, z.len(), radius)))?;
        let value = f.evaluate(z, &y)? + (&y - z).dot(&gap.0) / r;
        worst = worst.min(value);
    }
    Ok(worst)
}

/// `min_y f(z, y)` over `z` and sampled points of `C` near `z`; nonnegative
/// (up to rounding) exactly when `z` looks like a point of `EP(f)`.
pub fn equilibrium_residual(f: &Bifunction, set: &ConvexSet, z: &Vector, probes: usize, seed: u64, radius: f64) -> Result<f64> {
    let mut rng = sampling::rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let y = metric_project(set, &(z + uniform_cube(&mut rng, z.len(), radius)))?;
        worst = worst.min(f.evaluate(z, &y)?);
    }
    Ok(worst)
}

fn check_square(m: &DMatrix<f64>, dim: usize) -> Result<()> {
    check_dim(dim, m.nrows())?;
    check_dim(dim, m.ncols())?;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("matrix with non-finite entries".into()));
    }
    Ok(())
}

fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(symmetric_part(m)).eigenvalues.min()
}
