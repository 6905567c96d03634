mod common;

use common::{duality, random_monotone};
use hybrid_ep::equilibrium::Bifunction;
use hybrid_ep::mappings::Mapping;
use hybrid_ep::sampling;
use hybrid_ep::sets::ConvexSet;
use hybrid_ep::solver::{run, Corollary, Problem, SchemeConfig, SchemeKind, Sequence, Solver, StopRule, Termination, Tolerances};
use hybrid_ep::{DualVector, Error, Space, Vector};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn axis_problem(space: Space) -> Problem {
    let axis = ConvexSet::affine(Vector::zeros(2), &[v(&[1.0, 0.0])]).unwrap();
    Problem::new(space, ConvexSet::WholeSpace, Bifunction::Zero, Mapping::projection(axis.clone()), v(&[1.0, 1.0]))
        .unwrap()
        .with_reference(axis)
        .unwrap()
}

fn stop(max_iter: usize) -> StopRule {
    StopRule { eps_stop: 1e-10, max_iter }
}

#[test]
fn first_iteration_of_the_planar_vi_problem() {
    let f = Bifunction::vi(DMatrix::identity(2, 2), Vector::zeros(2)).unwrap();
    let p = Problem::new(Space::euclidean(2).unwrap(), ConvexSet::WholeSpace, f, Mapping::Identity, v(&[2.0, 0.0])).unwrap();
    let s = Solver::new(&p, SchemeConfig::new(SchemeKind::HybridIshikawa), StopRule::default(), Tolerances::default()).unwrap();
    let st = s.step(1, &p.anchor).unwrap();
    // C_1 = {v_1 <= 1.75}, Q_1 = whole space
    let c1 = &st.cuts[0];
    let scale = c1.normal.0[0];
    assert!(scale > 0.0 && c1.normal.0[1].abs() < 1e-14);
    assert!((c1.offset / scale - 1.75).abs() < 1e-12);
    assert!(st.cuts[1].is_degenerate());
    assert!((&st.x_next - v(&[1.75, 0.0])).amax() < 1e-12);
    assert!((st.diagnostics.step_norm - 0.25).abs() < 1e-12);
}

#[test]
fn projection_schemes_reach_the_nearest_fixed_point() {
    let p = axis_problem(Space::euclidean(2).unwrap());
    for scheme in [SchemeKind::HybridIshikawa, SchemeKind::HybridFZero, SchemeKind::Mann, SchemeKind::NakajoTakahashi] {
        let t = run(&p, SchemeConfig::new(scheme), stop(500), Tolerances::default()).unwrap();
        assert!(t.converged(), "{scheme}: {:?}", t.termination);
        assert!((&t.final_point - v(&[1.0, 0.0])).amax() < 1e-8, "{scheme}: {:?}", t.final_point);
        assert!(t.invariants.monotonicity <= 1e-8);
    }
}

#[test]
fn nakajo_takahashi_first_cut_is_the_bisector() {
    let p = axis_problem(Space::euclidean(2).unwrap());
    let s = Solver::new(&p, SchemeConfig::new(SchemeKind::NakajoTakahashi), StopRule::default(), Tolerances::default()).unwrap();
    let st = s.step(1, &p.anchor).unwrap();
    // y_1 = (1, 0.5), so C_1 = {v_2 <= 0.75}
    assert_eq!(st.y.unwrap(), v(&[1.0, 0.5]));
    let c = &st.cuts[0];
    assert!(c.normal.0[0].abs() < 1e-14 && (c.offset / c.normal.0[1] - 0.75).abs() < 1e-12);
    assert!((&st.x_next - v(&[1.0, 0.75])).amax() < 1e-12);
}

#[test]
fn tada_and_takahashi_zembayashi_coincide_without_a_bifunction() {
    for space in [Space::euclidean(2).unwrap(), Space::p_norm(2, 2.0).unwrap()] {
        let p = axis_problem(space);
        let a = run(&p, SchemeConfig::new(SchemeKind::TadaTakahashi), stop(50), Tolerances::default()).unwrap();
        let b = run(&p, SchemeConfig::new(SchemeKind::TakahashiZembayashi), stop(50), Tolerances::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!((&x.x_next - &y.x_next).amax() < 1e-12);
        }
    }
}

#[test]
fn hybrid_scheme_converges_in_lp() {
    for p in [1.5, 3.0] {
        let problem = axis_problem(Space::p_norm(2, p).unwrap());
        let t = run(&problem, SchemeConfig::new(SchemeKind::HybridIshikawa), stop(2000), Tolerances::default()).unwrap();
        assert!(!matches!(t.termination, Termination::Failed { .. }), "{:?}", t.termination);
        // generalized projection of (1, 1) onto the axis: t = (J (1, 1))_1 = 2^{(2 - p) / p}
        let expected = v(&[duality(&[1.0, 1.0], p)[0], 0.0]);
        // for p > 2 a vanishing coordinate is only resolved to about
        // eps^{1/(p-1)}, since J^{-1} is Hoelder there
        let tol = if p > 2.0 { 10.0 * f64::EPSILON.powf(1.0 / (p - 1.0)) } else { 1e-8 };
        assert!((&t.final_point - &expected).amax() < tol, "p = {p}: {:?}", t.final_point);
        assert!(t.invariants.containment.unwrap() >= -1e-9);
        assert!(t.invariants.monotonicity <= 1e-8);
    }
}

#[test]
fn hilbert_only_schemes_are_rejected_in_lp() {
    let p = axis_problem(Space::p_norm(2, 3.0).unwrap());
    for scheme in SchemeKind::ALL {
        let r = Solver::new(&p, SchemeConfig::new(scheme), StopRule::default(), Tolerances::default());
        assert_eq!(r.is_err(), scheme.requires_hilbert(), "{scheme}");
        if let Err(e) = r {
            assert!(matches!(e, Error::RequiresHilbert(_)), "{e}");
        }
    }
}

#[test]
fn parameters_outside_the_hypotheses_are_rejected() {
    let p = axis_problem(Space::euclidean(2).unwrap());
    let bad = [
        SchemeConfig::new(SchemeKind::HybridIshikawa).with_beta(Sequence::constant(1.0)),
        SchemeConfig::new(SchemeKind::HybridIshikawa).with_alpha(Sequence::constant(0.0)),
        SchemeConfig::new(SchemeKind::HybridIshikawa).with_r(Sequence::constant(-1.0)),
        SchemeConfig::new(SchemeKind::Mann).with_alpha(Sequence::constant(1.2)),
    ];
    for c in bad {
        assert!(Solver::new(&p, c.clone(), StopRule::default(), Tolerances::default()).is_err(), "{c:?}");
    }
}

#[test]
fn step_failures_are_recorded_in_the_trace() {
    let f = Bifunction::vi(DMatrix::from_row_slice(2, 2, &[1.0, -3.0, 3.0, 1.0]), v(&[0.5, 0.0])).unwrap();
    let p = Problem::new(Space::p_norm(2, 3.0).unwrap(), ConvexSet::WholeSpace, f, Mapping::Identity, v(&[2.0, 1.0])).unwrap();
    let tol = Tolerances {
        resolvent_max_iter: 2,
        ..Tolerances::default()
    };
    let t = run(&p, SchemeConfig::new(SchemeKind::HybridIshikawa), stop(100), tol).unwrap();
    match &t.termination {
        Termination::Failed { iteration, error } => {
            assert_eq!(*iteration, 1);
            assert!(matches!(error, Error::NonConvergence { .. }), "{error}");
        }
        other => panic!("expected a failure, got {other:?}"),
    }
    assert_eq!(t.iterations, 0);
    assert_eq!(t.final_point, p.anchor);
}

#[test]
fn fixed_points_outside_the_domain_make_the_cuts_infeasible() {
    // F(S) = {v_1 >= 3} misses C = [-1, 1]^2
    let bx = ConvexSet::boxed(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
    let right = ConvexSet::half_space(DualVector::from_vec(vec![-1.0, 0.0]), -3.0).unwrap();
    for space in [Space::euclidean(2).unwrap(), Space::p_norm(2, 3.0).unwrap()] {
        let p = Problem::new(space, bx.clone(), Bifunction::Zero, Mapping::projection(right.clone()), v(&[0.5, 0.2])).unwrap();
        let t = run(&p, SchemeConfig::new(SchemeKind::HybridIshikawa), StopRule::default(), Tolerances::default()).unwrap();
        match &t.termination {
            Termination::Failed { iteration, error } => {
                assert!(matches!(error, Error::Infeasible(_)), "{error}");
                assert_eq!(*iteration, t.iterations + 1);
            }
            other => panic!("expected infeasible cuts, got {other:?}"),
        }
    }
}

#[test]
fn disjoint_solution_sets_do_not_fake_convergence() {
    // F(S) = {v_1 = 3} and EP(f) = {(0, 0)} do not meet; the cuts stay
    // nonempty, so the run may only end by the iteration cap or a failure.
    let line = ConvexSet::affine(v(&[3.0, 0.0]), &[v(&[0.0, 1.0])]).unwrap();
    let f = Bifunction::vi(DMatrix::identity(2, 2), Vector::zeros(2)).unwrap();
    let p = Problem::new(Space::euclidean(2).unwrap(), ConvexSet::WholeSpace, f, Mapping::projection(line), v(&[1.0, 1.0])).unwrap();
    let t = run(&p, SchemeConfig::new(SchemeKind::HybridIshikawa), stop(300), Tolerances::default()).unwrap();
    assert!(!t.converged());
    assert!(t.oracle.is_none() && t.final_distance_to_oracle.is_none());
}

#[test]
fn corollaries_match_their_dedicated_schemes() {
    let mut rng = sampling::rng(12);
    let f = Bifunction::vi(random_monotone(&mut rng, 3, 0.4), sampling::gaussian(&mut rng, 3)).unwrap();
    let k = ConvexSet::ball(v(&[0.2, 0.0, -0.1]), 2.0).unwrap();
    for space in [Space::euclidean(3).unwrap(), Space::p_norm(3, 3.0).unwrap()] {
        let p = Problem::new(space, ConvexSet::WholeSpace, f.clone(), Mapping::projection(k.clone()), v(&[1.0, -2.0, 0.5])).unwrap();
        let config = SchemeConfig::new(SchemeKind::HybridIshikawa).with_r(Sequence::constant(0.7));
        for c in Corollary::ALL {
            let (pa, ca) = c.specialize(&p, &config);
            let (pb, cb) = c.dedicated(&p, &config);
            let a = run(&pa, ca, stop(40), Tolerances::default()).unwrap();
            let b = run(&pb, cb, stop(40), Tolerances::default()).unwrap();
            assert_eq!(a.iterations, b.iterations, "{c:?}");
            assert_eq!(a.final_point, b.final_point, "{c:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn run_invariants_hold(seed in any::<u64>(), p in prop_oneof![Just(None), Just(Some(1.5)), Just(Some(3.0))]) {
        let mut rng = sampling::rng(seed);
        let space = match p {
            None => Space::euclidean(2).unwrap(),
            Some(p) => Space::p_norm(2, p).unwrap(),
        };
        // EP(f) = whole space of minimizers of a convex function with known zero set
        let center = sampling::uniform_cube(&mut rng, 2, 1.0);
        let half = ConvexSet::half_space(DualVector::from_vec(vec![1.0, 1.0]), center.sum() + 0.5).unwrap();
        let f = Bifunction::vi(DMatrix::zeros(2, 2), Vector::zeros(2)).unwrap();
        let anchor = sampling::uniform_cube(&mut rng, 2, 3.0);
        let problem = Problem::new(space, ConvexSet::WholeSpace, f, Mapping::projection(half.clone()), anchor)
            .unwrap()
            .with_reference(half)
            .unwrap();
        let t = run(&problem, SchemeConfig::new(SchemeKind::HybridIshikawa), StopRule::default(), Tolerances::default()).unwrap();
        prop_assert!(!matches!(t.termination, Termination::Failed { .. }), "{:?}", t.termination);
        prop_assert!(t.invariants.containment.unwrap() >= -1e-9);
        prop_assert!(t.invariants.monotonicity <= 1e-8);
        prop_assert!(t.invariants.boundedness.unwrap() <= 1e-8);
        prop_assert!(t.converged());
        // outside Hilbert spaces the last digits are limited by the Hoelder
        // continuity of J^{-1} (p > 2) or J (p < 2)
        let tol = if p.is_none() { 1e-6 } else { 1e-5 };
        prop_assert!(t.final_distance_to_oracle.unwrap() < tol, "{:?}", t.final_distance_to_oracle);
    }
}
