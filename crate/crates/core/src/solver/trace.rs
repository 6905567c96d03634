use crate::error::Error;
use crate::geometry::Vector;
use crate::sets::HalfSpace;

/// Scalars recorded at every iteration. Entries that a scheme does not
/// produce (e.g. `z_n` for Mann) are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// `phi(x_n, x_1)`.
    pub phi_anchor: f64,
    /// `phi(x_{n+1}, x_n)`.
    pub phi_step: f64,
    /// `||x_{n+1} - x_n||`.
    pub step_norm: f64,
    /// `||x_n - S x_n||`.
    pub fixed_point_residual: f64,
    pub z_minus_x: Option<f64>,
    pub z_minus_u: Option<f64>,
    pub x_minus_y: Option<f64>,
    pub y_minus_z: Option<f64>,
    /// `min_i (alpha_i - <u*, a_i>)` over the cuts of this iteration for the
    /// reference solution `u*`; nonnegative when `u*` lies in every cut.
    pub containment_margin: Option<f64>,
    pub solution_contained: Option<bool>,
    /// `||x_n - u*||` in the norm of the space.
    pub distance_to_oracle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationState {
    pub n: usize,
    pub x: Vector,
    pub z: Option<Vector>,
    pub u: Option<Vector>,
    pub y: Option<Vector>,
    /// Cuts `C_n`, `Q_n` (or the scheme's counterparts) in that order.
    pub cuts: Vec<HalfSpace>,
    pub x_next: Vector,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Converged,
    MaxIterations,
    Failed { iteration: usize, error: Error },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::Failed { .. } => "failed",
        }
    }
}

/// Worst values of the per-iteration invariants over a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvariantSummary {
    /// Smallest containment margin (should be `>= -tol`).
    pub containment: Option<f64>,
    /// Largest decrease `phi(x_n, x_1) - phi(x_{n+1}, x_1)` (should be `<= tol`).
    pub monotonicity: f64,
    /// Largest `phi(x_n, x_1) - phi(u*, x_1)` (should be `<= tol`).
    pub boundedness: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub states: Vec<IterationState>,
    pub termination: Termination,
    pub final_point: Vector,
    pub iterations: usize,
    pub warnings: Vec<String>,
    /// `Pi_{reference} x_1` when a reference solution set was supplied.
    pub oracle: Option<Vector>,
    /// `||final_point - oracle||` in the norm of the space.
    pub final_distance_to_oracle: Option<f64>,
    pub invariants: InvariantSummary,
}

impl Trace {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn last(&self) -> Option<&IterationState> {
        self.states.last()
    }

    /// First `n` whose iterate is within `threshold` of the oracle.
    pub fn iterations_to(&self, threshold: f64) -> Option<usize> {
        self.states
            .iter()
            .find(|s| s.diagnostics.distance_to_oracle.is_some_and(|d| d <= threshold))
            .map(|s| s.n)
    }
}
