//! Iteration schemes for common solutions of an equilibrium problem and a
//! fixed-point problem.
//!
//! The main scheme ([`SchemeKind::HybridIshikawa`]) is, with anchor `x = x_1`:
//!
//! ```text
//! z_n     = J^{-1}(beta_n J x_n + (1 - beta_n) J S x_n)
//! u_n     = T_{r_n} z_n
//! y_n     = J^{-1}(alpha_n J z_n + (1 - alpha_n) J u_n)
//! C_n     = {v in C : phi(v, y_n) <= phi(v, x_n)}
//! Q_n     = {v in C : <x_n - v, J x_n - J x> <= 0}
//! x_{n+1} = Pi_{C_n ∩ Q_n} x
//! ```
//!
//! Both `C_n` and `Q_n` are half-spaces intersected with `C`, so every step
//! ends in [`project_onto_cuts`]. The baselines reuse the same primitives.

mod config;
mod trace;

pub use config::{SchemeConfig, SchemeKind, Sequence, StopRule, Tolerances};
pub use trace::{Diagnostics, InvariantSummary, IterationState, Termination, Trace};

use log::warn;

use crate::equilibrium::{resolvent, Bifunction, ResolventParams};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Space, Vector};
use crate::mappings::Mapping;
use crate::sets::{
    cut_from_anchor, cut_from_lyapunov_comparison, generalized_project, project_onto_cuts, ConvexSet, HalfSpace,
    ProjectionOptions,
};

/// A common-solution problem: find `u in F(S) ∩ EP(f)` closest (in `phi`)
/// to the anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub space: Space,
    /// The feasible set `C`.
    pub set: ConvexSet,
    pub bifunction: Bifunction,
    pub mapping: Mapping,
    /// `x = x_1`, which must lie in `C`.
    pub anchor: Vector,
    /// Optional exact description of `F(S) ∩ EP(f)`, used for the oracle
    /// `Pi_{F(S) ∩ EP(f)} x` and the containment diagnostics.
    pub reference: Option<ConvexSet>,
}

impl Problem {
    pub fn new(space: Space, set: ConvexSet, bifunction: Bifunction, mapping: Mapping, anchor: Vector) -> Result<Self> {
        let problem = Problem {
            space,
            set,
            bifunction,
            mapping,
            anchor,
            reference: None,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_reference(mut self, reference: ConvexSet) -> Result<Self> {
        reference.check_dim(self.space.dim())?;
        self.reference = Some(reference);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.space.dim();
        self.space.check(&self.anchor)?;
        self.set.check_dim(d)?;
        if let Some(k) = self.bifunction.dim() {
            check_dim(d, k)?;
        }
        if let Some(k) = self.mapping.dim() {
            check_dim(d, k)?;
        }
        if let Some(r) = &self.reference {
            r.check_dim(d)?;
        }
        if self.mapping.requires_hilbert() && !self.space.is_hilbert() {
            return Err(Error::RequiresHilbert("affine mapping".into()));
        }
        let violation = self.set.violation(&self.anchor);
        if violation > domain_tolerance(&self.anchor, Tolerances::default().containment) {
            return Err(Error::NotInDomain { violation });
        }
        Ok(())
    }

    /// `Pi_{reference} x_1`, if a reference set is known.
    pub fn oracle(&self, tolerances: &Tolerances) -> Result<Option<Vector>> {
        match &self.reference {
            None => Ok(None),
            Some(set) => {
                let opts = ProjectionOptions {
                    tol: tolerances.projection.min(1e-12),
                    ..Default::default()
                };
                Ok(Some(generalized_project(&self.space, set, &self.anchor, &opts)?.point))
            }
        }
    }
}

fn domain_tolerance(x: &Vector, tol: f64) -> f64 {
    tol * (1.0 + x.amax())
}

/// `J^{-1}(t J a + (1 - t) J b)`, exact at `t in {0, 1}` and for `a = b`.
pub fn dual_combination(space: &Space, t: f64, a: &Vector, b: &Vector) -> Vector {
    if t == 1.0 || a == b {
        a.clone()
    } else if t == 0.0 {
        b.clone()
    } else {
        space.inverse_duality_map(&space.duality_map(a).convex_combination(t, &space.duality_map(b)))
    }
}

fn linear_combination(t: f64, a: &Vector, b: &Vector) -> Vector {
    if t == 1.0 || a == b {
        a.clone()
    } else if t == 0.0 {
        b.clone()
    } else {
        a * t + b * (1.0 - t)
    }
}

/// The special cases of the main scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corollary {
    /// `f = 0`, `r_n = 1`: `u_n = Pi_C z_n`.
    FZeroROne,
    /// `alpha_n = 1`: `y_n = z_n`.
    AlphaOne,
    /// `S = I`: `z_n = x_n`.
    SIdentity,
}

impl Corollary {
    pub const ALL: [Corollary; 3] = [Corollary::FZeroROne, Corollary::AlphaOne, Corollary::SIdentity];

    pub fn dedicated_scheme(self) -> SchemeKind {
        match self {
            Corollary::FZeroROne => SchemeKind::HybridFZero,
            Corollary::AlphaOne => SchemeKind::HybridAlphaOne,
            Corollary::SIdentity => SchemeKind::HybridSIdentity,
        }
    }

    /// Rewrites a main-scheme problem and configuration into the special
    /// case, still run by [`SchemeKind::HybridIshikawa`]. A reference set that
    /// no longer describes the solution set is dropped.
    pub fn specialize(self, problem: &Problem, config: &SchemeConfig) -> (Problem, SchemeConfig) {
        let mut p = problem.clone();
        let mut c = config.clone();
        c.scheme = SchemeKind::HybridIshikawa;
        match self {
            Corollary::FZeroROne => {
                c.r = Sequence::constant(1.0);
                if !p.bifunction.is_zero() {
                    p.bifunction = Bifunction::Zero;
                    p.reference = if p.set.is_whole_space() { Some(p.mapping.fixed_point_set()) } else { None };
                }
            }
            Corollary::AlphaOne => {
                c.alpha = Sequence::constant(1.0);
                c.alpha_upper = None;
            }
            Corollary::SIdentity => {
                if !p.mapping.is_identity() {
                    p.mapping = Mapping::Identity;
                    p.reference = None;
                }
            }
        }
        (p, c)
    }

    /// The same special case run by its dedicated scheme.
    pub fn dedicated(self, problem: &Problem, config: &SchemeConfig) -> (Problem, SchemeConfig) {
        let (p, mut c) = self.specialize(problem, config);
        c.scheme = self.dedicated_scheme();
        (p, c)
    }
}

pub struct Solver<'a> {
    problem: &'a Problem,
    config: SchemeConfig,
    stop: StopRule,
    tolerances: Tolerances,
    warnings: Vec<String>,
    oracle: Option<Vector>,
    phi_oracle: Option<f64>,
}

impl<'a> Solver<'a> {
    /// Validates the problem and the scheme hypotheses and computes the
    /// oracle point when a reference set is available.
    pub fn new(problem: &'a Problem, config: SchemeConfig, stop: StopRule, tolerances: Tolerances) -> Result<Self> {
        problem.validate()?;
        if !(stop.eps_stop >= 0.0) || stop.max_iter == 0 {
            return Err(Error::InvalidParameter("stop rule needs eps_stop >= 0 and max_iter >= 1".into()));
        }
        let mut warnings = config.validate(&problem.space, stop.max_iter)?;
        let scheme = config.scheme;
        if !scheme.uses_bifunction() && !problem.bifunction.is_zero() {
            warnings.push(format!("{scheme} ignores the bifunction; the limit solves only the fixed-point problem"));
        }
        if !scheme.uses_mapping() && !problem.mapping.is_identity() {
            warnings.push(format!("{scheme} ignores the mapping; the limit solves only the equilibrium problem"));
        }
        for w in &warnings {
            warn!("{w}");
        }
        let oracle = problem.oracle(&tolerances)?;
        let phi_oracle = oracle.as_ref().map(|o| problem.space.lyapunov_unchecked(o, &problem.anchor));
        Ok(Solver {
            problem,
            config,
            stop,
            tolerances,
            warnings,
            oracle,
            phi_oracle,
        })
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn oracle(&self) -> Option<&Vector> {
        self.oracle.as_ref()
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    fn projection_options(&self) -> ProjectionOptions {
        ProjectionOptions {
            tol: self.tolerances.projection,
            ..Default::default()
        }
    }

    fn apply_s(&self, v: &Vector) -> Result<Vector> {
        let p = self.problem;
        p.mapping.apply_in(&p.space, &p.set, v, domain_tolerance(v, self.tolerances.containment))
    }

    fn resolvent_at(&self, f: &Bifunction, r: f64, v: &Vector) -> Result<Vector> {
        let params = ResolventParams {
            r,
            inner_tol: self.tolerances.resolvent,
            max_inner_iterations: self.tolerances.resolvent_max_iter,
        };
        resolvent(&self.problem.space, &self.problem.set, f, &params, v)
    }

    /// One iteration from `x = x_n`.
    pub fn step(&self, n: usize, x: &Vector) -> Result<IterationState> {
        let p = self.problem;
        let space = &p.space;
        space.check(x)?;
        let alpha = self.config.alpha.value(n);
        let beta = self.config.beta.value(n);
        let r = self.config.r.value(n);
        let f = &p.bifunction;
        let sx = self.apply_s(x)?;

        let mut z = None;
        let mut u = None;
        let mut y = None;
        let mut cuts = Vec::new();
        let mut direct = None;
        match self.config.scheme {
            SchemeKind::HybridIshikawa | SchemeKind::HybridFZero | SchemeKind::HybridAlphaOne | SchemeKind::HybridSIdentity => {
                let scheme = self.config.scheme;
                let zn = if scheme == SchemeKind::HybridSIdentity { x.clone() } else { dual_combination(space, beta, x, &sx) };
                let un = if scheme == SchemeKind::HybridFZero {
                    self.resolvent_at(&Bifunction::Zero, 1.0, &zn)?
                } else {
                    self.resolvent_at(f, r, &zn)?
                };
                let yn = if scheme == SchemeKind::HybridAlphaOne { zn.clone() } else { dual_combination(space, alpha, &zn, &un) };
                cuts.push(cut_from_lyapunov_comparison(space, &yn, x)?);
                (z, u, y) = (Some(zn), Some(un), Some(yn));
            }
            SchemeKind::MatsushitaTakahashi => {
                let yn = dual_combination(space, alpha, x, &sx);
                cuts.push(cut_from_lyapunov_comparison(space, &yn, x)?);
                y = Some(yn);
            }
            SchemeKind::TakahashiZembayashi => {
                let yn = dual_combination(space, alpha, x, &sx);
                let un = self.resolvent_at(f, r, &yn)?;
                cuts.push(cut_from_lyapunov_comparison(space, &un, x)?);
                (u, y) = (Some(un), Some(yn));
            }
            SchemeKind::NakajoTakahashi => {
                let yn = linear_combination(alpha, x, &sx);
                cuts.push(cut_from_lyapunov_comparison(space, &yn, x)?);
                y = Some(yn);
            }
            SchemeKind::MartinezYanesXu => {
                let zn = linear_combination(beta, x, &sx);
                let yn = linear_combination(alpha, x, &self.apply_s(&zn)?);
                // ||y - v||^2 <= ||x - v||^2 + (1 - alpha)(||z||^2 - ||x||^2 + 2 <x - z, v>)
                let normal = ((x - &yn) - (x - &zn) * (1.0 - alpha)) * 2.0;
                // anchored at x: the gap there is ||y - x||^2 - (1 - alpha) ||z - x||^2
                let offset = x.dot(&normal) - (&yn - x).norm_squared() + (1.0 - alpha) * (&zn - x).norm_squared();
                cuts.push(HalfSpace::new(crate::geometry::DualVector(normal), offset)?);
                (z, y) = (Some(zn), Some(yn));
            }
            SchemeKind::TadaTakahashi => {
                let un = self.resolvent_at(f, r, x)?;
                let wn = linear_combination(alpha, x, &self.apply_s(&un)?);
                cuts.push(cut_from_lyapunov_comparison(space, &wn, x)?);
                (u, y) = (Some(un), Some(wn));
            }
            SchemeKind::Mann => direct = Some(linear_combination(alpha, x, &sx)),
            SchemeKind::IshikawaPlain => {
                let yn = linear_combination(beta, x, &sx);
                direct = Some(linear_combination(alpha, x, &self.apply_s(&yn)?));
                y = Some(yn);
            }
        }

        let x_next = match direct {
            Some(v) => v,
            None => {
                cuts.push(cut_from_anchor(space, x, &p.anchor)?);
                project_onto_cuts(space, &p.set, &cuts, &p.anchor, &self.projection_options())?.point
            }
        };

        let norm = |v: Vector| space.norm_of(v.as_slice());
        let containment_margin = match (&self.oracle, cuts.is_empty()) {
            (Some(o), false) => Some(cuts.iter().map(|c| c.offset - o.dot(&c.normal.0)).fold(f64::INFINITY, f64::min)),
            _ => None,
        };
        let diagnostics = Diagnostics {
            phi_anchor: space.lyapunov_unchecked(x, &p.anchor),
            phi_step: space.lyapunov_unchecked(&x_next, x),
            step_norm: norm(&x_next - x),
            fixed_point_residual: norm(x - &sx),
            z_minus_x: z.as_ref().map(|z| norm(z - x)),
            z_minus_u: z.as_ref().zip(u.as_ref()).map(|(z, u)| norm(z - u)),
            x_minus_y: y.as_ref().map(|y| norm(x - y)),
            y_minus_z: y.as_ref().zip(z.as_ref()).map(|(y, z)| norm(y - z)),
            containment_margin,
            solution_contained: containment_margin.map(|m| m >= -self.tolerances.containment),
            distance_to_oracle: self.oracle.as_ref().map(|o| norm(x - o)),
        };
        Ok(IterationState {
            n,
            x: x.clone(),
            z,
            u,
            y,
            cuts,
            x_next,
            diagnostics,
        })
    }

    /// Iterates from `x_1 = anchor` until the stop rule fires, the iteration
    /// cap is reached or a step fails. The trace is returned in every case.
    pub fn run(&self) -> Trace {
        let p = self.problem;
        let mut x = p.anchor.clone();
        let mut states = Vec::new();
        let mut termination = Termination::MaxIterations;
        for n in 1..=self.stop.max_iter {
            match self.step(n, &x) {
                Ok(state) => {
                    let done = state.diagnostics.step_norm <= self.stop.eps_stop;
                    x = state.x_next.clone();
                    states.push(state);
                    if done {
                        termination = Termination::Converged;
                        break;
                    }
                }
                Err(error) => {
                    warn!("{} failed at iteration {n}: {error}", self.config.scheme);
                    termination = Termination::Failed { iteration: n, error };
                    break;
                }
            }
        }

        let space = &p.space;
        let final_phi = space.lyapunov_unchecked(&x, &p.anchor);
        let phis: Vec<f64> = states.iter().map(|s| s.diagnostics.phi_anchor).chain([final_phi]).collect();
        let invariants = InvariantSummary {
            containment: states
                .iter()
                .filter_map(|s| s.diagnostics.containment_margin)
                .reduce(f64::min),
            monotonicity: phis.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max),
            boundedness: self.phi_oracle.map(|po| phis.iter().map(|v| v - po).fold(f64::NEG_INFINITY, f64::max)),
        };
        Trace {
            iterations: states.len(),
            states,
            termination,
            final_distance_to_oracle: self.oracle.as_ref().map(|o| space.norm_of((&x - o).as_slice())),
            final_point: x,
            warnings: self.warnings.clone(),
            oracle: self.oracle.clone(),
            invariants,
        }
    }
}

/// Validates and runs; hypothesis and setup errors are returned, step
/// failures are recorded in the trace.
pub fn run(problem: &Problem, config: SchemeConfig, stop: StopRule, tolerances: Tolerances) -> Result<Trace> {
    Ok(Solver::new(problem, config, stop, tolerances)?.run())
}
