//! Fast sampled versions of the invariant suites, run by `hybrid-ep selftest`.

use nalgebra::DMatrix;

use crate::equilibrium::{resolvent, Bifunction, ResolventParams};
use crate::error::Result;
use crate::geometry::{Space, Vector};
use crate::mappings::Mapping;
use crate::sampling::{self, uniform_cube};
use crate::sets::{generalized_project, ConvexSet, ProjectionOptions};
use crate::solver::{run, Corollary, Problem, SchemeConfig, SchemeKind, StopRule, Tolerances};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
}

fn check(name: &'static str, worst: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tolerance,
        worst,
        tolerance,
    }
}

fn spaces(d: usize) -> Result<Vec<Space>> {
    Ok(vec![Space::p_norm(d, 1.5)?, Space::euclidean(d)?, Space::p_norm(d, 3.0)?])
}

pub fn selftest(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = sampling::rng(seed);
    let mut out = Vec::new();

    // duality map identities and the three-point identity for phi
    let (mut duality, mut inverse, mut three_point) = (0.0f64, 0.0f64, 0.0f64);
    for d in [2, 5] {
        for space in spaces(d)? {
            for _ in 0..200 {
                let x = uniform_cube(&mut rng, d, 3.0);
                let y = uniform_cube(&mut rng, d, 3.0);
                let z = uniform_cube(&mut rng, d, 3.0);
                let n = space.norm(&x)?;
                let jx = space.duality_map(&x);
                let pair = Space::pairing(&x, &jx)?;
                let scale = 1.0 + n * n;
                duality = duality.max((pair - n * n).abs() / scale).max((space.dual_norm(&jx)? - n).abs() / (1.0 + n));
                inverse = inverse.max((space.inverse_duality_map(&jx) - &x).amax() / (1.0 + x.amax()));
                let lhs = space.lyapunov(&x, &y)?;
                let rhs = space.lyapunov(&x, &z)? + space.lyapunov(&z, &y)?
                    + 2.0 * Space::pairing(&(&x - &z), &(&space.duality_map(&z) - &space.duality_map(&y)))?;
                three_point = three_point.max((lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs()));
            }
        }
    }
    out.push(check("duality map identities", duality, 1e-10));
    out.push(check("inverse duality map", inverse, 1e-10));
    out.push(check("three-point identity", three_point, 1e-10));

    // generalized projection characterization: <y - Pi x, J x - J Pi x> <= 0
    let mut characterization = f64::NEG_INFINITY;
    let opts = ProjectionOptions::default();
    let sets = [
        ConvexSet::boxed(Vector::from_element(3, -1.0), Vector::from_element(3, 0.5))?,
        ConvexSet::ball(Vector::from_element(3, 0.2), 1.0)?,
        ConvexSet::half_space(crate::DualVector::from_vec(vec![1.0, -2.0, 0.5]), 0.3)?,
    ];
    for space in spaces(3)? {
        for set in &sets {
            for _ in 0..30 {
                let x = uniform_cube(&mut rng, 3, 4.0);
                let px = generalized_project(&space, set, &x, &opts)?.point;
                let g = &space.duality_map(&x) - &space.duality_map(&px);
                for _ in 0..10 {
                    let y = set.sample(&mut rng, 3, 3.0)?;
                    characterization = characterization.max((&y - &px).dot(&g.0) / (1.0 + y.norm() * g.0.norm()));
                }
            }
        }
    }
    out.push(check("generalized projection characterization", characterization, 1e-9));

    // resolvent of an affine monotone operator against (I + r M)^{-1}(x - r q)
    let e = Space::euclidean(3)?;
    let mut resolvent_error = 0.0f64;
    for _ in 0..20 {
        let b = DMatrix::from_fn(3, 3, |_, _| sampling::gaussian(&mut rng, 1)[0]);
        let m = &b * b.transpose() + DMatrix::from_fn(3, 3, |i, j| if i < j { 0.5 } else if i > j { -0.5 } else { 0.0 });
        let q = uniform_cube(&mut rng, 3, 1.0);
        let x = uniform_cube(&mut rng, 3, 2.0);
        let r = 0.5 + uniform_cube(&mut rng, 1, 0.4)[0];
        let f = Bifunction::vi(m.clone(), q.clone())?;
        let z = resolvent(&e, &ConvexSet::WholeSpace, &f, &ResolventParams::with_r(r), &x)?;
        let exact = (DMatrix::identity(3, 3) + &m * r)
            .lu()
            .solve(&(&x - &q * r))
            .expect("I + r M is nonsingular for monotone M");
        resolvent_error = resolvent_error.max((z - exact).amax());
    }
    out.push(check("resolvent closed form", resolvent_error, 1e-8));

    // relative nonexpansiveness of a generalized projection in l_3
    let p3 = Space::p_norm(3, 3.0)?;
    let s = Mapping::projection(sets[0].clone());
    let report = s.check_relatively_nonexpansive(&p3, &ConvexSet::WholeSpace, 300, 1e-9, seed, 3.0)?;
    out.push(check("relative nonexpansiveness", report.worst_margin, 1e-9));

    // main scheme on the planar variational inequality
    let f = Bifunction::vi(DMatrix::identity(2, 2), Vector::zeros(2))?;
    let problem = Problem::new(Space::euclidean(2)?, ConvexSet::WholeSpace, f, Mapping::Identity, Vector::from_vec(vec![2.0, 0.0]))?
        .with_reference(ConvexSet::affine(Vector::zeros(2), &[])?)?;
    let config = SchemeConfig::new(SchemeKind::HybridIshikawa);
    let trace = run(&problem, config.clone(), StopRule::default(), Tolerances::default())?;
    out.push(check(
        "main scheme limit",
        if trace.converged() { trace.final_distance_to_oracle.unwrap_or(f64::INFINITY) } else { f64::INFINITY },
        1e-6,
    ));
    out.push(check("reference containment", -trace.invariants.containment.unwrap_or(f64::NEG_INFINITY), 1e-9));
    out.push(check("anchor monotonicity", trace.invariants.monotonicity, 1e-8));

    // corollary specializations against their dedicated schemes
    let mut coherence = 0.0f64;
    for c in Corollary::ALL {
        let (p1, c1) = c.specialize(&problem, &config);
        let (p2, c2) = c.dedicated(&problem, &config);
        let stop = StopRule {
            max_iter: 200,
            ..Default::default()
        };
        let a = run(&p1, c1, stop, Tolerances::default())?;
        let b = run(&p2, c2, stop, Tolerances::default())?;
        if a.iterations != b.iterations {
            coherence = f64::INFINITY;
        }
        for (s1, s2) in a.states.iter().zip(&b.states) {
            coherence = coherence.max((&s1.x_next - &s2.x_next).amax());
        }
    }
    out.push(check("corollary coherence", coherence, 1e-10));
    Ok(out)
}
