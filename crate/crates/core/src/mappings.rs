//! Relatively nonexpansive mappings with known fixed-point sets.
//!
//! `S` is relatively nonexpansive when `F(S)` is nonempty, coincides with
//! the set of asymptotic fixed points, and `phi(u, S x) <= phi(u, x)` for
//! every `u in F(S)`. The last condition is the only one that can be sampled;
//! [`Mapping::check_relatively_nonexpansive`] does that.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Space, Vector};
use crate::sampling;
use crate::sets::{generalized_project, AffineSubspace, ConvexSet, ProjectionOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum Mapping {
    Identity,
    /// `S = Pi_K`; fixes exactly `K`.
    GeneralizedProjection(ConvexSet),
    /// `S x = J^{-1}(theta J x + (1 - theta) J T x)`; `F(S) = F(T)`.
    Averaged { theta: f64, inner: Box<Mapping> },
    /// `S x = A x + b` (Hilbert spaces only). Built through
    /// [`Mapping::affine`], which stores `F(S) = {x : (I - A) x = b}`.
    Affine {
        matrix: DMatrix<f64>,
        offset: Vector,
        fixed_points: AffineSubspace,
    },
}

impl Mapping {
    pub fn projection(set: ConvexSet) -> Self {
        Mapping::GeneralizedProjection(set)
    }

    pub fn averaged(theta: f64, inner: Mapping) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("averaging weight must lie in (0, 1), got {theta}")));
        }
        Ok(Mapping::Averaged {
            theta,
            inner: Box::new(inner),
        })
    }

    /// `x -> A x + b`. Nonexpansiveness (`||A|| <= 1`) is deliberately not
    /// enforced so that violations can be demonstrated; an empty fixed-point
    /// set is rejected.
    pub fn affine(matrix: DMatrix<f64>, offset: Vector) -> Result<Self> {
        let d = offset.len();
        check_dim(d, matrix.nrows())?;
        check_dim(d, matrix.ncols())?;
        if matrix.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("affine map with non-finite data".into()));
        }
        let b = DMatrix::identity(d, d) - &matrix;
        let svd = b.clone().svd(true, true);
        let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
        let smax = svd.singular_values.max();
        let cutoff = 1e-12 * smax.max(1.0);
        let mut particular = Vector::zeros(d);
        let mut null = Vec::new();
        for (i, s) in svd.singular_values.iter().enumerate() {
            let v = vt.row(i).transpose();
            if *s > cutoff {
                particular += &v * (u.column(i).dot(&offset) / s);
            } else {
                null.push(v);
            }
        }
        let residual = (&b * &particular - &offset).norm();
        if residual > 1e-9 * (1.0 + offset.norm()) {
            return Err(Error::Infeasible(format!(
                "affine map has no fixed point (residual {residual:e})"
            )));
        }
        let fixed_points = AffineSubspace::new(particular, &null)?;
        Ok(Mapping::Affine {
            matrix,
            offset,
            fixed_points,
        })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Mapping::Identity => None,
            Mapping::GeneralizedProjection(k) => k.dim(),
            Mapping::Averaged { inner, .. } => inner.dim(),
            Mapping::Affine { offset, .. } => Some(offset.len()),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Mapping::Identity)
    }

    /// Whether the mapping is only defined in Hilbert spaces.
    pub fn requires_hilbert(&self) -> bool {
        match self {
            Mapping::Affine { .. } => true,
            Mapping::Averaged { inner, .. } => inner.requires_hilbert(),
            _ => false,
        }
    }

    pub fn apply(&self, space: &Space, x: &Vector) -> Result<Vector> {
        space.check(x)?;
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        match self {
            Mapping::Identity => Ok(x.clone()),
            Mapping::GeneralizedProjection(k) => {
                let opts = ProjectionOptions {
                    tol: 1e-12,
                    ..Default::default()
                };
                Ok(generalized_project(space, k, x, &opts)?.point)
            }
            Mapping::Averaged { theta, inner } => {
                let tx = inner.apply(space, x)?;
                if space.is_hilbert() {
                    return Ok(x * *theta + tx * (1.0 - theta));
                }
                let w = space.duality_map(x).convex_combination(*theta, &space.duality_map(&tx));
                Ok(space.inverse_duality_map(&w))
            }
            Mapping::Affine { matrix, offset, .. } => {
                if !space.is_hilbert() {
                    return Err(Error::RequiresHilbert("affine mapping".into()));
                }
                Ok(matrix * x + offset)
            }
        }
    }

    /// [`Mapping::apply`] restricted to `domain`: points outside it (beyond
    /// `tol`) are rejected.
    pub fn apply_in(&self, space: &Space, domain: &ConvexSet, x: &Vector, tol: f64) -> Result<Vector> {
        domain.check_dim(x.len())?;
        let violation = domain.violation(x);
        if violation > tol {
            return Err(Error::NotInDomain { violation });
        }
        self.apply(space, x)
    }

    pub fn fixed_point_set(&self) -> ConvexSet {
        match self {
            Mapping::Identity => ConvexSet::WholeSpace,
            Mapping::GeneralizedProjection(k) => k.clone(),
            Mapping::Averaged { inner, .. } => inner.fixed_point_set(),
            Mapping::Affine { fixed_points, .. } => ConvexSet::Affine(fixed_points.clone()),
        }
    }

    /// Samples `u in F(S)` and `x in domain` and records the worst margin
    /// `phi(u, S x) - phi(u, x)`.
    pub fn check_relatively_nonexpansive(
        &self,
        space: &Space,
        domain: &ConvexSet,
        samples: usize,
        tol: f64,
        seed: u64,
        radius: f64,
    ) -> Result<NonexpansivenessReport> {
        let mut rng = sampling::rng(seed);
        let fixed = self.fixed_point_set();
        let d = space.dim();
        let mut report = NonexpansivenessReport {
            samples,
            tolerance: tol,
            worst_margin: f64::NEG_INFINITY,
            witness: None,
        };
        for _ in 0..samples {
            let u = fixed.sample(&mut rng, d, radius)?;
            let x = domain.sample(&mut rng, d, radius)?;
            let sx = self.apply(space, &x)?;
            let margin = space.lyapunov(&u, &sx)? - space.lyapunov(&u, &x)?;
            if margin > report.worst_margin {
                report.worst_margin = margin;
                if margin > tol {
                    report.witness = Some((u, x));
                }
            }
        }
        Ok(report)
    }
}

#[derive(Clone, Debug)]
pub struct NonexpansivenessReport {
    pub samples: usize,
    pub tolerance: f64,
    /// Largest `phi(u, S x) - phi(u, x)` seen.
    pub worst_margin: f64,
    /// A violating `(u, x)` pair, if any.
    pub witness: Option<(Vector, Vector)>,
}

impl NonexpansivenessReport {
    pub fn passed(&self) -> bool {
        self.worst_margin <= self.tolerance
    }
}
