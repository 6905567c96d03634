//! Convex set descriptions, projections and hybrid-method cuts.
//!
//! Sets are described in coordinates of `R^d` (a [`ConvexSet::Ball`] is always
//! a Euclidean ball); the geometry only enters through the projection used.

mod cuts;
mod projection;

use nalgebra::DMatrix;
use rand::Rng;

pub use cuts::{cut_from_anchor, cut_from_lyapunov_comparison, project_onto_cuts, DEGENERATE_NORMAL};
pub use projection::{generalized_project, metric_project, ProjectionOptions, ProjectionResult};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{DualVector, Vector};
use crate::sampling::{gaussian, uniform_cube, SampleRng};

/// `{v : <v, normal> <= offset}`.
///
/// A zero normal describes the whole space when `offset >= 0` and the empty
/// set otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    pub normal: DualVector,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: DualVector, offset: f64) -> Result<Self> {
        if !offset.is_finite() || normal.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("half-space with non-finite data".into()));
        }
        Ok(HalfSpace { normal, offset })
    }

    pub fn whole(dim: usize) -> Self {
        HalfSpace {
            normal: DualVector::zeros(dim),
            offset: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `<v, normal> - offset`; positive values are violations.
    pub fn violation(&self, v: &Vector) -> f64 {
        v.dot(&self.normal.0) - self.offset
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        self.violation(v) <= tol
    }

    /// True when the normal is numerically zero, so the cut removes nothing
    /// (or everything, when the offset is negative).
    pub fn is_degenerate(&self) -> bool {
        self.normal.coordinate_norm() < DEGENERATE_NORMAL
    }
}

/// Affine subspace `origin + span(basis)` with an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSubspace {
    origin: Vector,
    basis: DMatrix<f64>,
}

impl AffineSubspace {
    /// Builds the subspace through `origin` spanned by `directions`. Linearly
    /// dependent directions are allowed; the basis keeps the numerical span.
    pub fn new(origin: Vector, directions: &[Vector]) -> Result<Self> {
        let d = origin.len();
        if d == 0 {
            return Err(Error::InvalidParameter("affine subspace of dimension 0".into()));
        }
        for dir in directions {
            check_dim(d, dir.len())?;
        }
        if origin.iter().chain(directions.iter().flat_map(|v| v.iter())).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("affine subspace with non-finite data".into()));
        }
        let basis = if directions.is_empty() {
            DMatrix::zeros(d, 0)
        } else {
            let m = DMatrix::from_columns(directions);
            let svd = m.clone().svd(true, false);
            let u = svd.u.expect("left singular vectors requested");
            let smax = svd.singular_values.max();
            let cols: Vec<_> = svd
                .singular_values
                .iter()
                .enumerate()
                .filter(|(_, s)| **s > 1e-12 * smax.max(f64::MIN_POSITIVE))
                .map(|(i, _)| u.column(i).into_owned())
                .collect();
            if cols.is_empty() {
                DMatrix::zeros(d, 0)
            } else {
                DMatrix::from_columns(&cols)
            }
        };
        Ok(AffineSubspace { origin, basis })
    }

    /// The single point `{origin}`.
    pub fn point(origin: Vector) -> Result<Self> {
        AffineSubspace::new(origin, &[])
    }

    pub fn origin(&self) -> &Vector {
        &self.origin
    }

    /// Orthonormal basis, one direction per column.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, x: &Vector) -> Vector {
        let rel = x - &self.origin;
        if self.basis.ncols() == 0 {
            return self.origin.clone();
        }
        &self.origin + &self.basis * (self.basis.transpose() * rel)
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        (x - self.project(x)).norm()
    }
}

/// Closed convex subset of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet {
    WholeSpace,
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
    HalfSpace(HalfSpace),
    Affine(AffineSubspace),
    /// `base` intersected with a list of half-spaces.
    BaseWithCuts { base: Box<ConvexSet>, cuts: Vec<HalfSpace> },
}

impl ConvexSet {
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidParameter("box of dimension 0".into()));
        }
        for (l, u) in lower.iter().zip(upper.iter()) {
            if !(l.is_finite() && u.is_finite()) || l > u {
                return Err(Error::InvalidParameter(format!("box bounds require lower <= upper, got [{l}, {u}]")));
            }
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("ball with non-finite center".into()));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn half_space(normal: DualVector, offset: f64) -> Result<Self> {
        Ok(ConvexSet::HalfSpace(HalfSpace::new(normal, offset)?))
    }

    pub fn affine(origin: Vector, directions: &[Vector]) -> Result<Self> {
        Ok(ConvexSet::Affine(AffineSubspace::new(origin, directions)?))
    }

    pub fn with_cuts(base: ConvexSet, cuts: Vec<HalfSpace>) -> Result<Self> {
        if let Some(d) = base.dim() {
            for c in &cuts {
                check_dim(d, c.dim())?;
            }
        }
        if let Some(first) = cuts.first() {
            for c in &cuts {
                check_dim(first.dim(), c.dim())?;
            }
        }
        Ok(ConvexSet::BaseWithCuts {
            base: Box::new(base),
            cuts,
        })
    }

    /// Ambient dimension, `None` for the whole space.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConvexSet::WholeSpace => None,
            ConvexSet::Box { lower, .. } => Some(lower.len()),
            ConvexSet::Ball { center, .. } => Some(center.len()),
            ConvexSet::HalfSpace(h) => Some(h.dim()),
            ConvexSet::Affine(a) => Some(a.dim()),
            ConvexSet::BaseWithCuts { base, cuts } => base.dim().or_else(|| cuts.first().map(HalfSpace::dim)),
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim() {
            Some(d) => check_dim(dim, d),
            None => Ok(()),
        }
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self, ConvexSet::WholeSpace)
    }

    /// Largest constraint violation of `x` (nonpositive when inside).
    pub fn violation(&self, x: &Vector) -> f64 {
        match self {
            ConvexSet::WholeSpace => f64::NEG_INFINITY,
            ConvexSet::Box { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .zip(x.iter())
                .map(|((l, u), v)| (l - v).max(v - u))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexSet::Ball { center, radius } => (x - center).norm() - radius,
            ConvexSet::HalfSpace(h) => h.violation(x),
            ConvexSet::Affine(a) => a.distance(x),
            ConvexSet::BaseWithCuts { base, cuts } => cuts
                .iter()
                .map(|c| c.violation(x))
                .fold(base.violation(x), f64::max),
        }
    }

    /// Membership up to `tol`. Dimension mismatches are reported as `false`.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if self.check_dim(x.len()).is_err() {
            return false;
        }
        self.violation(x) <= tol
    }

    /// Random point of the set near the origin (within roughly `radius` for
    /// unbounded sets). Intersections use rejection sampling with a
    /// projection fallback.
    pub fn sample(&self, rng: &mut SampleRng, dim: usize, radius: f64) -> Result<Vector> {
        self.check_dim(dim)?;
        Ok(match self {
            ConvexSet::WholeSpace => uniform_cube(rng, dim, radius),
            ConvexSet::Box { lower, upper } => {
                Vector::from_fn(dim, |i, _| if lower[i] == upper[i] { lower[i] } else { rng.gen_range(lower[i]..=upper[i]) })
            }
            ConvexSet::Ball { center, radius: r } => {
                let g = gaussian(rng, dim);
                let n = g.norm().max(f64::MIN_POSITIVE);
                let scale = r * rng.gen_range(0.0f64..1.0).powf(1.0 / dim as f64);
                center + g * (scale / n)
            }
            ConvexSet::HalfSpace(h) => {
                let v = uniform_cube(rng, dim, radius);
                let viol = h.violation(&v);
                let nn = h.normal.0.norm_squared();
                if viol > 0.0 && nn > 0.0 {
                    // reflect through the boundary hyperplane
                    &v - &h.normal.0 * (2.0 * viol / nn)
                } else {
                    v
                }
            }
            ConvexSet::Affine(a) => {
                let t = uniform_cube(rng, a.rank(), radius);
                if a.rank() == 0 {
                    a.origin.clone()
                } else {
                    &a.origin + &a.basis * t
                }
            }
            ConvexSet::BaseWithCuts { base, .. } => {
                for _ in 0..1000 {
                    let v = base.sample(rng, dim, radius)?;
                    if self.contains(&v, 0.0) {
                        return Ok(v);
                    }
                }
                let v = base.sample(rng, dim, radius)?;
                metric_project(self, &v)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn contains_examples() {
        let b = ConvexSet::boxed(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        assert!(b.contains(&v(&[0.0, 0.0]), 1e-9));
        let h = ConvexSet::half_space(DualVector::from_vec(vec![1.0, 0.0]), 0.0).unwrap();
        assert!(!h.contains(&v(&[1.0, 0.0]), 1e-9));
        assert!(ConvexSet::WholeSpace.contains(&v(&[1e6, -3.0, 2.0]), 0.0));
    }

    #[test]
    fn degenerate_half_space() {
        let whole = HalfSpace::whole(2);
        assert!(whole.contains(&v(&[5.0, 5.0]), 0.0));
        let empty = HalfSpace::new(DualVector::zeros(2), -1.0).unwrap();
        assert!(!empty.contains(&v(&[0.0, 0.0]), 1e-9));
        assert!(empty.is_degenerate());
    }

    #[test]
    fn invalid_sets_are_rejected() {
        assert!(ConvexSet::boxed(v(&[1.0]), v(&[0.0])).is_err());
        assert!(ConvexSet::ball(v(&[0.0]), 0.0).is_err());
        assert!(ConvexSet::boxed(v(&[0.0, 0.0]), v(&[1.0])).is_err());
        assert!(ConvexSet::with_cuts(ConvexSet::WholeSpace, vec![HalfSpace::whole(2), HalfSpace::whole(3)]).is_err());
    }

    #[test]
    fn affine_basis_is_orthonormal() {
        let a = AffineSubspace::new(v(&[1.0, 0.0, 0.0]), &[v(&[1.0, 1.0, 0.0]), v(&[2.0, 2.0, 0.0]), v(&[0.0, 1.0, 0.0])])
            .unwrap();
        assert_eq!(a.rank(), 2);
        let g = a.basis().transpose() * a.basis();
        assert!((g - DMatrix::identity(2, 2)).amax() < 1e-14);
        assert!(a.distance(&v(&[3.0, -2.0, 0.0])) < 1e-14);
        assert!((a.distance(&v(&[3.0, -2.0, 4.0])) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn samples_lie_in_their_sets() {
        let mut rng = crate::sampling::rng(7);
        let sets = vec![
            ConvexSet::WholeSpace,
            ConvexSet::boxed(v(&[-1.0, 0.0, 2.0]), v(&[1.0, 0.5, 2.0])).unwrap(),
            ConvexSet::ball(v(&[1.0, 1.0, 1.0]), 0.5).unwrap(),
            ConvexSet::half_space(DualVector::from_vec(vec![1.0, -1.0, 2.0]), 0.3).unwrap(),
            ConvexSet::affine(v(&[0.0, 1.0, 0.0]), &[v(&[1.0, 0.0, 1.0])]).unwrap(),
            ConvexSet::with_cuts(
                ConvexSet::ball(v(&[0.0, 0.0, 0.0]), 2.0).unwrap(),
                vec![HalfSpace::new(DualVector::from_vec(vec![1.0, 1.0, 0.0]), 0.5).unwrap()],
            )
            .unwrap(),
        ];
        for set in &sets {
            for _ in 0..50 {
                let x = set.sample(&mut rng, 3, 3.0).unwrap();
                assert!(set.contains(&x, 1e-12), "{set:?} does not contain {x}");
            }
        }
    }
}
