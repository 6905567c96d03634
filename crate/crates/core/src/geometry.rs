//! Finite-dimensional smooth, strictly convex spaces.
//!
//! A [`Space`] is `R^d` with either the Euclidean norm or an `l_p` norm for
//! `1 < p < infinity`. The dual space is `R^d` with the conjugate `l_q` norm,
//! `1/p + 1/q = 1`, paired through the ordinary dot product. The normalized
//! duality map has the closed form
//!
//! ```text
//! (J x)_i = ||x||_p^(2 - p) * |x_i|^(p - 1) * sign(x_i)
//! ```
//!
//! and its inverse is the duality map of the dual space (exponent `q`).

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Points of the primal space.
pub type Vector = DVector<f64>;

/// Smallest accepted exponent (exclusive).
pub const MIN_EXPONENT: f64 = 1.05;
/// Largest accepted exponent (exclusive).
pub const MAX_EXPONENT: f64 = 50.0;

/// Element of the dual space `E*`.
///
/// Kept distinct from [`Vector`] so primal points and functionals are not
/// mixed up by accident; arithmetic is provided for the combinations the
/// iterations need.
#[derive(Clone, Debug, PartialEq)]
pub struct DualVector(pub DVector<f64>);

impl DualVector {
    pub fn zeros(dim: usize) -> Self {
        DualVector(DVector::zeros(dim))
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        DualVector(DVector::from_vec(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// `t * self + (1 - t) * other`.
    pub fn convex_combination(&self, t: f64, other: &DualVector) -> DualVector {
        DualVector(&self.0 * t + &other.0 * (1.0 - t))
    }

    /// Euclidean length of the coordinate vector, used for scaling only.
    pub fn coordinate_norm(&self) -> f64 {
        self.0.norm()
    }
}

impl Add for &DualVector {
    type Output = DualVector;
    fn add(self, rhs: &DualVector) -> DualVector {
        DualVector(&self.0 + &rhs.0)
    }
}

impl Sub for &DualVector {
    type Output = DualVector;
    fn sub(self, rhs: &DualVector) -> DualVector {
        DualVector(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &DualVector {
    type Output = DualVector;
    fn mul(self, rhs: f64) -> DualVector {
        DualVector(&self.0 * rhs)
    }
}

impl Mul<f64> for DualVector {
    type Output = DualVector;
    fn mul(self, rhs: f64) -> DualVector {
        DualVector(self.0 * rhs)
    }
}

impl Neg for DualVector {
    type Output = DualVector;
    fn neg(self) -> DualVector {
        DualVector(-self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Euclidean,
    PNorm { p: f64 },
}

/// `R^d` equipped with a Euclidean or `l_p` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Space {
    kind: SpaceKind,
    dim: usize,
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(Space {
            kind: SpaceKind::Euclidean,
            dim,
        })
    }

    /// `l_p` norm on `R^d`. Exponents outside `(1.05, 50)` are rejected because
    /// `|x_i|^(p-1)` becomes badly conditioned near the ends of the range.
    pub fn p_norm(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(p > MIN_EXPONENT && p < MAX_EXPONENT) {
            return Err(Error::InvalidParameter(format!(
                "exponent p = {p} outside ({MIN_EXPONENT}, {MAX_EXPONENT})"
            )));
        }
        Ok(Space {
            kind: SpaceKind::PNorm { p },
            dim,
        })
    }

    pub fn new(kind: SpaceKind, dim: usize) -> Result<Self> {
        match kind {
            SpaceKind::Euclidean => Space::euclidean(dim),
            SpaceKind::PNorm { p } => Space::p_norm(dim, p),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => 2.0,
            SpaceKind::PNorm { p } => p,
        }
    }

    /// Conjugate exponent `q = p / (p - 1)`.
    pub fn q(&self) -> f64 {
        let p = self.p();
        p / (p - 1.0)
    }

    /// True when the norm comes from an inner product (`J` is the identity).
    pub fn is_hilbert(&self) -> bool {
        self.p() == 2.0
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, SpaceKind::Euclidean)
    }

    pub fn check(&self, x: &Vector) -> Result<()> {
        check_dim(self.dim, x.len())
    }

    pub fn norm(&self, x: &Vector) -> Result<f64> {
        self.check(x)?;
        Ok(self.norm_of(x.as_slice()))
    }

    pub fn dual_norm(&self, xstar: &DualVector) -> Result<f64> {
        check_dim(self.dim, xstar.len())?;
        Ok(self.dual_norm_of(xstar.as_slice()))
    }

    /// Dual pairing `<x, x*>`.
    pub fn pairing(x: &Vector, xstar: &DualVector) -> Result<f64> {
        check_dim(x.len(), xstar.len())?;
        Ok(x.dot(&xstar.0))
    }

    /// Normalized duality map. `J(0) = 0`; zero coordinates map to zero.
    pub fn duality_map(&self, x: &Vector) -> DualVector {
        match self.kind {
            SpaceKind::Euclidean => DualVector(x.clone()),
            SpaceKind::PNorm { p } => DualVector(power_duality(x, p)),
        }
    }

    /// Inverse duality map, i.e. the duality map of the dual space.
    pub fn inverse_duality_map(&self, xstar: &DualVector) -> Vector {
        match self.kind {
            SpaceKind::Euclidean => xstar.0.clone(),
            SpaceKind::PNorm { .. } => power_duality(&xstar.0, self.q()),
        }
    }

    /// `phi(x, y) = ||x||^2 - 2 <x, J y> + ||y||^2`.
    pub fn lyapunov(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.lyapunov_unchecked(x, y))
    }

    pub(crate) fn lyapunov_unchecked(&self, x: &Vector, y: &Vector) -> f64 {
        if self.is_hilbert() {
            return (x - y).norm_squared();
        }
        if x == y {
            return 0.0;
        }
        let nx = self.norm_of(x.as_slice());
        let ny = self.norm_of(y.as_slice());
        let jy = self.duality_map(y);
        (nx * nx - 2.0 * x.dot(&jy.0) + ny * ny).max(0.0)
    }

    /// `||x||^2 - ||y||^2`, evaluated without the cancellation of the naive
    /// difference when `x` and `y` are close.
    pub fn norm_sq_difference(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        if self.is_hilbert() {
            return Ok((x - y).dot(&(x + y)));
        }
        let p = self.p();
        let sx: f64 = x.iter().map(|v| v.abs().powf(p)).sum();
        let sy: f64 = y.iter().map(|v| v.abs().powf(p)).sum();
        // the expm1/ln_1p form only pays off when the norms are close; far
        // apart, delta / sy rounds towards -1 and ln_1p loses ||x||^2
        let far = sx < 0.5 * sy || sy < 0.5 * sx;
        if far || sx == 0.0 || sy == 0.0 || !sx.is_finite() || !sy.is_finite() {
            let nx = self.norm_of(x.as_slice());
            let ny = self.norm_of(y.as_slice());
            return Ok(nx * nx - ny * ny);
        }
        // sum_i (|x_i|^p - |y_i|^p) with each term formed through expm1/ln_1p
        let mut delta = 0.0;
        for (a, b) in x.iter().zip(y.iter()) {
            let (a, b) = (a.abs(), b.abs());
            delta += if a == 0.0 || b == 0.0 {
                a.powf(p) - b.powf(p)
            } else {
                b.powf(p) * (p * ((a - b) / b).ln_1p()).exp_m1()
            };
        }
        Ok(sy.powf(2.0 / p) * ((2.0 / p) * (delta / sy).ln_1p()).exp_m1())
    }

    pub(crate) fn norm_of(&self, x: &[f64]) -> f64 {
        lp_norm(x, self.p())
    }

    pub(crate) fn dual_norm_of(&self, x: &[f64]) -> f64 {
        lp_norm(x, self.q())
    }
}

/// Scaled `l_p` norm, safe against overflow and underflow of `|x_i|^p`.
pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if p == 2.0 {
        return m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt();
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Duality map of `l_p`, written as `||x|| * (|x_i| / ||x||)^(p-1) * sign(x_i)`.
fn power_duality(x: &DVector<f64>, p: f64) -> DVector<f64> {
    let n = lp_norm(x.as_slice(), p);
    if n == 0.0 {
        return DVector::zeros(x.len());
    }
    if p == 2.0 {
        return x.clone();
    }
    x.map(|v| {
        if v == 0.0 {
            0.0
        } else {
            n * (v.abs() / n).powf(p - 1.0) * v.signum()
        }
    })
}
