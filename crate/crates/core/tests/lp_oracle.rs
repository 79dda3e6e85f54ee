mod common;

use common::{random_box_lp, vertex_enumeration_optimum, BoxLp};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spiky::simplex::{solve, LinearProgram, LpStatus, DEFAULT_FEAS_TOL};

fn to_lp(p: &BoxLp) -> LinearProgram {
    LinearProgram::from_rows(
        p.c.clone(),
        &p.rows,
        p.b.clone(),
        p.lower.clone(),
        p.upper.clone(),
    )
    .unwrap()
}

#[test]
fn matches_vertex_enumeration_on_random_boxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..200 {
        let p = random_box_lp(&mut rng, 3, 6);
        let want = vertex_enumeration_optimum(&p).expect("planted point makes it feasible");
        let sol = solve(&to_lp(&p), DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
        assert!((sol.objective_value - want).abs() <= 1e-9, "case {case}: {} vs {want}", sol.objective_value);
    }
}

#[test]
fn wider_boxes_also_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..30 {
        let p = random_box_lp(&mut rng, 4, 9);
        let want = vertex_enumeration_optimum(&p).unwrap();
        let sol = solve(&to_lp(&p), DEFAULT_FEAS_TOL).unwrap();
        assert!((sol.objective_value - want).abs() <= 1e-9, "case {case}");
    }
}

#[test]
fn detects_infeasibility() {
    // x1 + x2 = 5 with both in [0, 2].
    let lp = LinearProgram::from_rows(
        vec![1.0, 1.0],
        &[vec![1.0, 1.0]],
        vec![5.0],
        vec![0.0, 0.0],
        vec![2.0, 2.0],
    )
    .unwrap();
    assert_eq!(solve(&lp, DEFAULT_FEAS_TOL).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn scaling_the_objective_scales_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let lp = to_lp(&random_box_lp(&mut rng, 3, 6));
        let base = solve(&lp, DEFAULT_FEAS_TOL).unwrap().objective_value;
        for f in [0.5, 3.0, 1e3] {
            let scaled = solve(&lp.with_scaled_objective(f), DEFAULT_FEAS_TOL).unwrap();
            assert!((scaled.objective_value - f * base).abs() <= 1e-9 * (1.0 + f * base.abs()));
        }
    }
}

#[test]
fn permuting_variables_keeps_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let perm = [4, 2, 0, 5, 1, 3];
    for _ in 0..40 {
        let lp = to_lp(&random_box_lp(&mut rng, 3, 6));
        let a = solve(&lp, DEFAULT_FEAS_TOL).unwrap().objective_value;
        let b = solve(&lp.permuted(&perm), DEFAULT_FEAS_TOL).unwrap().objective_value;
        assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn solutions_are_feasible_and_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..50 {
        let lp = to_lp(&random_box_lp(&mut rng, 3, 6));
        let s1 = solve(&lp, DEFAULT_FEAS_TOL).unwrap();
        let s2 = solve(&lp, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(s1, s2);
        assert!(lp.residual_inf(&s1.x) <= 1e-9);
        assert!(lp.bound_violation(&s1.x) <= 1e-9);
        let obj: f64 = lp.objective().iter().zip(&s1.x).map(|(c, x)| c * x).sum();
        assert!((obj - s1.objective_value).abs() <= 1e-12 * (1.0 + obj.abs()));
    }
}
