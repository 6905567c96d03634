mod common;

use common::{duality, grid_minimize, phi};
use hybrid_ep::sampling;
use hybrid_ep::sets::{
    cut_from_anchor, cut_from_lyapunov_comparison, generalized_project, metric_project, project_onto_cuts, ConvexSet, HalfSpace,
    ProjectionOptions,
};
use hybrid_ep::{DualVector, Error, Space, Vector};
use proptest::prelude::*;

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn half(normal: &[f64], offset: f64) -> HalfSpace {
    HalfSpace::new(DualVector::from_vec(normal.to_vec()), offset).unwrap()
}

fn set_variants() -> Vec<ConvexSet> {
    let bx = ConvexSet::boxed(v(&[-1.0, 0.0, -0.5]), v(&[1.0, 0.5, 2.0])).unwrap();
    let ball = ConvexSet::ball(v(&[0.5, -0.5, 0.0]), 1.5).unwrap();
    vec![
        ConvexSet::WholeSpace,
        bx.clone(),
        ball.clone(),
        ConvexSet::half_space(DualVector::from_vec(vec![0.5, -1.0, 2.0]), -0.4).unwrap(),
        ConvexSet::affine(v(&[1.0, 0.0, 0.0]), &[v(&[0.0, 1.0, 1.0])]).unwrap(),
        ConvexSet::affine(v(&[0.0, 0.0, 0.3]), &[v(&[1.0, 0.0, 0.0]), v(&[1.0, 1.0, 0.0])]).unwrap(),
        ConvexSet::with_cuts(ConvexSet::WholeSpace, vec![half(&[1.0, 0.0, 0.0], 0.2), half(&[1.0, 1.0, 1.0], 0.0)]).unwrap(),
        ConvexSet::with_cuts(bx, vec![half(&[0.0, 1.0, -1.0], 0.1)]).unwrap(),
        ConvexSet::with_cuts(ball, vec![half(&[-1.0, 0.0, 1.0], 0.2), half(&[0.0, 1.0, 0.0], -0.1)]).unwrap(),
    ]
}

fn case() -> impl Strategy<Value = (Space, usize, Vector, u64)> {
    (
        prop_oneof![Just(None), Just(Some(1.5)), Just(Some(2.0)), Just(Some(3.0)), (1.2f64..6.0).prop_map(Some)],
        0..set_variants().len(),
        prop::collection::vec(-4.0f64..4.0, 3),
        any::<u64>(),
    )
        .prop_map(|(p, k, x, seed)| {
            let space = match p {
                None => Space::euclidean(3).unwrap(),
                Some(p) => Space::p_norm(3, p).unwrap(),
            };
            (space, k, Vector::from_vec(x), seed)
        })
}

fn project(space: &Space, set: &ConvexSet, x: &Vector) -> Vector {
    generalized_project(space, set, x, &ProjectionOptions::default()).unwrap().point
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_feasible_and_idempotent((space, k, x, _) in case()) {
        let set = &set_variants()[k];
        let px = project(&space, set, &x);
        prop_assert!(set.violation(&px) <= 1e-9 * (1.0 + x.amax()));
        let again = project(&space, set, &px);
        prop_assert!((again - &px).amax() <= 1e-9 * (1.0 + px.amax()));
    }

    #[test]
    fn projection_three_term_inequality((space, k, x, seed) in case()) {
        // phi(y, Pi x) + phi(Pi x, x) <= phi(y, x) for y in the set
        let set = &set_variants()[k];
        let p = space.p();
        let px = project(&space, set, &x);
        let mut rng = sampling::rng(seed);
        for _ in 0..20 {
            let y = set.sample(&mut rng, 3, 3.0).unwrap();
            let total = phi(y.as_slice(), x.as_slice(), p);
            let split = phi(y.as_slice(), px.as_slice(), p) + phi(px.as_slice(), x.as_slice(), p);
            prop_assert!(split <= total + 1e-9 * (1.0 + total), "{split} > {total}");
        }
    }

    #[test]
    fn projection_variational_characterization((space, k, x, seed) in case()) {
        // z = Pi x iff <y - z, J x - J z> <= 0 for every y in the set
        let set = &set_variants()[k];
        let p = space.p();
        let px = project(&space, set, &x);
        let g: Vec<f64> = duality(x.as_slice(), p).iter().zip(duality(px.as_slice(), p)).map(|(a, b)| a - b).collect();
        let gv = Vector::from_vec(g.clone());
        let mut rng = sampling::rng(seed);
        for _ in 0..20 {
            let y = set.sample(&mut rng, 3, 3.0).unwrap();
            let s = (&y - &px).dot(&gv);
            prop_assert!(s <= 1e-9 * (1.0 + (&y - &px).norm() * gv.norm()), "{s}");
            // any other point of the set fails the inequality at y = Pi x
            if (&y - &px).amax() > 1e-4 {
                let w = Vector::from_vec(duality(x.as_slice(), p)) - Vector::from_vec(duality(y.as_slice(), p));
                prop_assert!((&px - &y).dot(&w) > 0.0);
            }
        }
    }

    #[test]
    fn euclidean_projection_is_the_metric_projection((_, k, x, _) in case()) {
        let set = &set_variants()[k];
        let m = metric_project(set, &x).unwrap();
        for space in [Space::euclidean(3).unwrap(), Space::p_norm(3, 2.0).unwrap()] {
            prop_assert!((project(&space, set, &x) - &m).amax() <= 1e-9);
        }
    }

    #[test]
    fn lyapunov_cut_is_exact(p in 1.2f64..6.0, pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 3)) {
        let space = Space::p_norm(3, p).unwrap();
        let (y, x, w) = (Vector::from_vec(pts[0].clone()), Vector::from_vec(pts[1].clone()), Vector::from_vec(pts[2].clone()));
        let cut = cut_from_lyapunov_comparison(&space, &y, &x).unwrap();
        let gap = phi(w.as_slice(), y.as_slice(), p) - phi(w.as_slice(), x.as_slice(), p);
        if gap.abs() > 1e-9 {
            prop_assert_eq!(cut.contains(&w, 0.0), gap < 0.0);
        }
    }
}

#[test]
fn lyapunov_cut_membership_in_l3() {
    let space = Space::p_norm(2, 3.0).unwrap();
    let mut rng = sampling::rng(5);
    let y = sampling::uniform_cube(&mut rng, 2, 2.0);
    let x = sampling::uniform_cube(&mut rng, 2, 2.0);
    let cut = cut_from_lyapunov_comparison(&space, &y, &x).unwrap();
    let mut agree = 0;
    for _ in 0..1000 {
        let w = sampling::uniform_cube(&mut rng, 2, 4.0);
        let gap = phi(w.as_slice(), y.as_slice(), 3.0) - phi(w.as_slice(), x.as_slice(), 3.0);
        if gap.abs() < 1e-9 || cut.contains(&w, 0.0) == (gap <= 0.0) {
            agree += 1;
        }
    }
    assert_eq!(agree, 1000);
}

#[test]
fn bisector_and_anchor_cuts() {
    let e = Space::euclidean(2).unwrap();
    let c = cut_from_lyapunov_comparison(&e, &v(&[0.0, 0.0]), &v(&[2.0, 0.0])).unwrap();
    // {v_1 <= 1}
    assert!(c.contains(&v(&[1.0, 5.0]), 1e-12) && !c.contains(&v(&[1.0 + 1e-6, 0.0]), 0.0));
    let same = cut_from_lyapunov_comparison(&e, &v(&[0.3, 0.2]), &v(&[0.3, 0.2])).unwrap();
    assert!(same.is_degenerate());
    let q = cut_from_anchor(&e, &v(&[1.0, 0.0]), &v(&[0.0, 0.0])).unwrap();
    // {z_1 >= 1}
    assert!(q.contains(&v(&[1.0, -3.0]), 1e-12) && !q.contains(&v(&[0.9, 0.0]), 0.0));
    let first = cut_from_anchor(&Space::p_norm(2, 3.0).unwrap(), &v(&[0.4, 1.0]), &v(&[0.4, 1.0])).unwrap();
    assert!(first.is_degenerate());
}

#[test]
fn l3_half_space_projection_against_line_search() {
    // Pi onto {v_1 <= 0} of (1, 1) in l_3 lies on the face v_1 = 0.
    let space = Space::p_norm(2, 3.0).unwrap();
    let x = v(&[1.0, 1.0]);
    let set = ConvexSet::half_space(DualVector::from_vec(vec![1.0, 0.0]), 0.0).unwrap();
    let got = project(&space, &set, &x);
    let (mut lo, mut hi) = (-3.0f64, 3.0f64);
    let g = |t: f64| phi(&[0.0, t], x.as_slice(), 3.0);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-13 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        if g(a) < g(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let t = 0.5 * (lo + hi);
    assert!(got[0].abs() < 1e-12 && (got[1] - t).abs() < 1e-6, "{got:?} vs (0, {t})");
}

#[test]
fn two_cut_examples() {
    let e = Space::euclidean(2).unwrap();
    let opts = ProjectionOptions::default();
    let x = v(&[2.0, 2.0]);
    let r = project_onto_cuts(&e, &ConvexSet::WholeSpace, &[half(&[1.0, 0.0], 1.0), half(&[0.0, 1.0], 0.0)], &x, &opts).unwrap();
    assert!((r.point - v(&[1.0, 0.0])).amax() < 1e-12);

    let cuts = [half(&[1.0, 0.0], 1.0), half(&[1.0, 1.0], 1.0)];
    let r = project_onto_cuts(&e, &ConvexSet::WholeSpace, &cuts, &x, &opts).unwrap();
    let feasible = |w: &[f64]| w[0] <= 1.0 && w[0] + w[1] <= 1.0;
    let oracle = grid_minimize(
        &|w| (w[0] - 2.0).powi(2) + (w[1] - 2.0).powi(2),
        &feasible,
        &[0.0, 0.0],
        4.0,
        801,
        &[vec![0.0, 1.0], vec![-1.0, 1.0]],
    );
    assert!((r.point - v(&oracle)).amax() < 1e-6);

    for space in [e, Space::p_norm(2, 1.5).unwrap(), Space::p_norm(2, 4.0).unwrap()] {
        let inside = v(&[-1.0, 0.5]);
        let r = project_onto_cuts(&space, &ConvexSet::WholeSpace, &cuts, &inside, &opts).unwrap();
        assert_eq!(r.point, inside);
        assert!(r.multipliers.iter().all(|&l| l == 0.0));
    }
}

#[test]
fn empty_intersections_are_reported() {
    let opts = ProjectionOptions::default();
    let cuts = [half(&[1.0, 0.0], -1.0), half(&[-1.0, 0.0], -1.0)];
    for space in [Space::euclidean(2).unwrap(), Space::p_norm(2, 3.0).unwrap()] {
        let err = project_onto_cuts(&space, &ConvexSet::WholeSpace, &cuts, &v(&[0.0, 0.0]), &opts).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
    }
    let bx = ConvexSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
    let err = project_onto_cuts(&Space::p_norm(2, 3.0).unwrap(), &bx, &[half(&[1.0, 1.0], -0.5)], &v(&[2.0, 2.0]), &opts).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)), "{err}");
}

#[test]
fn membership_examples() {
    let bx = ConvexSet::boxed(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
    assert!(bx.contains(&v(&[0.0, 0.0]), 1e-9));
    let h = ConvexSet::half_space(DualVector::from_vec(vec![1.0, 0.0]), 0.0).unwrap();
    assert!(!h.contains(&v(&[1.0, 0.0]), 1e-9));
    assert!(ConvexSet::WholeSpace.contains(&v(&[1e300, -1e300]), 0.0));
    assert_eq!(metric_project(&h, &v(&[1.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
    assert_eq!(metric_project(&bx, &v(&[2.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
    let ball = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
    assert_eq!(metric_project(&ball, &v(&[2.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
}
