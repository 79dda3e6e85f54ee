mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spiky::certify::{
    compatibility_constant, compatibility_objective, er_check_nsp, er_failure_certificate,
    width_bound_check, STRICT_MARGIN_TOL,
};
use spiky::ensemble::{sample_matrix, EnsembleSpec, MeasurementMatrix};
use spiky::experiments::{
    evaluate_matrix, run_theorem_a, Check, ExperimentConfig, PlanOverrides,
};
use spiky::recovery::{basis_pursuit, certify_uniqueness, l0_brute_force, SparseVector, Uniqueness};
use spiky::simplex::DEFAULT_FEAS_TOL;

/// Euclidean projection onto `{b : ||b||_1 <= radius}`.
fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= radius {
        return v.to_vec();
    }
    let w: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let s = project_simplex(&w, radius);
    s.iter().zip(v).map(|(a, x)| a * x.signum()).collect()
}

/// Euclidean projection onto `{b >= 0 : sum b = radius}`.
fn project_simplex(v: &[f64], radius: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - radius) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// `phi2` by accelerated projected gradient, one run per sign pattern.
fn compat_by_projected_gradient(gamma: &MeasurementMatrix, s: &[usize], l: f64) -> f64 {
    let n = gamma.n_cols();
    let off: Vec<usize> = (0..n).filter(|j| !s.contains(j)).collect();
    let g = common::to_nalgebra(gamma);
    let lip = 2.0 * g.norm_squared();
    let mut best = f64::INFINITY;
    for mask in 0..1usize << s.len() {
        let signs: Vec<f64> = (0..s.len()).map(|b| if mask >> b & 1 == 0 { 1.0 } else { -1.0 }).collect();
        let project = |x: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n];
            let head: Vec<f64> = s.iter().enumerate().map(|(t, &j)| signs[t] * x[j]).collect();
            for (t, v) in project_simplex(&head, 1.0).into_iter().enumerate() {
                out[s[t]] = signs[t] * v;
            }
            let tail: Vec<f64> = off.iter().map(|&j| x[j]).collect();
            for (t, v) in project_l1_ball(&tail, l).into_iter().enumerate() {
                out[off[t]] = v;
            }
            out
        };
        let value_grad = |b: &[f64]| -> (f64, Vec<f64>) {
            let signed: Vec<f64> = (0..n).map(|j| if s.contains(&j) { b[j] } else { -b[j] }).collect();
            let r = gamma.apply(&signed).unwrap();
            let gt = gamma.apply_transpose(&r);
            let grad = (0..n).map(|j| 2.0 * if s.contains(&j) { gt[j] } else { -gt[j] }).collect();
            (r.iter().map(|x| x * x).sum(), grad)
        };
        let mut x = project(&vec![0.0; n]);
        let mut y = x.clone();
        let mut t: f64 = 1.0;
        for _ in 0..200_000 {
            let (_, gr) = value_grad(&y);
            let step: Vec<f64> = y.iter().zip(&gr).map(|(a, g)| a - g / lip).collect();
            let next = project(&step);
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            y = next.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
            x = next;
            t = t_next;
        }
        best = best.min(value_grad(&x).0);
    }
    s.len() as f64 * best
}

#[test]
fn compatibility_matches_projected_gradient_oracle() {
    for seed in 0..4u64 {
        let gamma = common::gaussian_matrix(4, 6, 100 + seed);
        for (s, l) in [(vec![0], 1.0), (vec![2], 2.5), (vec![1, 4], 1.0)] {
            let got = compatibility_constant(&gamma, &s, l, 1e-12).unwrap();
            let want = compat_by_projected_gradient(&gamma, &s, l);
            assert!((got.phi2 - want).abs() <= 1e-7 * (1.0 + want), "seed {seed} S={s:?}: {} vs {want}", got.phi2);
            let at_beta = compatibility_objective(&gamma, &s, &got.minimizer_beta).unwrap();
            assert!((at_beta - got.phi2).abs() <= 1e-9 * (1.0 + got.phi2));
        }
    }
}

#[test]
fn compatibility_is_nonincreasing_in_l() {
    let gamma = common::gaussian_matrix(5, 12, 7);
    let vals: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&l| compatibility_constant(&gamma, &[3], l, 1e-10).unwrap().phi2)
        .collect();
    assert!(vals[0] >= vals[1] - 1e-9 && vals[1] >= vals[2] - 1e-9, "{vals:?}");
}

#[test]
fn compatibility_minimizer_respects_budgets() {
    let gamma = common::gaussian_matrix(4, 9, 8);
    let v = compatibility_constant(&gamma, &[0, 5], 1.5, 1e-10).unwrap();
    let on: f64 = [0, 5].iter().map(|&j| v.minimizer_beta[j].abs()).sum();
    let off: f64 = (0..9).filter(|j| *j != 0 && *j != 5).map(|j| v.minimizer_beta[j].abs()).sum();
    assert!((on - 1.0).abs() <= 1e-9);
    assert!(off <= 1.5 + 1e-9);
}

#[test]
fn width_check_brackets_the_exact_inradius() {
    // absconv{+-(5,1), +-(-1,5)} is a square with inradius 26/sqrt(52).
    let vs = vec![vec![5.0, 1.0], vec![-1.0, 5.0]];
    let exact = 26.0 / 52f64.sqrt();
    let c = width_bound_check(&vs, 5.0, 10_000, 3).unwrap();
    assert!(c.pass);
    assert!((c.bound - (5.0 / 2f64.sqrt() - 2f64.sqrt())).abs() < 1e-12);
    assert!(c.sampled_min_support >= exact - 1e-12);
    assert!(c.sampled_min_support <= exact + 1e-3);
}

#[test]
fn width_check_holds_for_random_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 2..=5 {
        let r = 4.0 * n as f64;
        let vs: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|k| rng.random_range(-1.0..1.0) + if k == i { r } else { 0.0 }).collect())
            .collect();
        assert!(width_bound_check(&vs, r, 2000, n as u64).unwrap().pass);
    }
}

/// Three spike columns (one per row) and a clean first column, unscaled.
fn planted(big_r: f64, extra: usize) -> MeasurementMatrix {
    let mut cols = vec![vec![1.0, -1.0, 1.0]];
    for i in 0..3 {
        let mut c = vec![1.0, 1.0, -1.0];
        c[i] = if i == 1 { -(1.0 + big_r) } else { 1.0 + big_r };
        cols.push(c);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..extra {
        cols.push((0..3).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect());
    }
    MeasurementMatrix::from_columns(&cols).unwrap()
}

#[test]
fn planted_spikes_defeat_basis_pursuit_on_e1() {
    let gamma = planted(10.0, 0);
    let e1 = SparseVector::basis(4, 0).unwrap();
    let cert = er_failure_certificate(&gamma, &e1, DEFAULT_FEAS_TOL).unwrap().expect("certificate");
    cert.validate(&gamma).unwrap();
    assert!(cert.l1_witness < 1.0);
    let y = gamma.apply(&e1.to_dense()).unwrap();
    let bp = basis_pursuit(&gamma, &y, DEFAULT_FEAS_TOL).unwrap();
    assert!(bp.l1_value < 0.9);
    assert!(bp.minimizer[0].abs() < 1e-9);
    // e1 is still the only 1-sparse solution.
    let l0 = l0_brute_force(&gamma, &y, 1, 1e-8).unwrap();
    assert_eq!(l0.len(), 1);
    assert_eq!(l0[0].support(), &[0]);
    assert!((l0[0].values()[0] - 1.0).abs() < 1e-12);
    let rec = evaluate_matrix(&gamma, None, &[Check::FailureCert].into_iter().collect(), 0, 0).unwrap();
    assert_eq!(rec.failure_found, Some(true));
    assert_eq!(rec.witness_j, Some(0));
}

#[test]
fn nsp_verdict_agrees_with_per_column_uniqueness() {
    for seed in 0..8u64 {
        let gamma = common::gaussian_matrix(6, 12, 200 + seed);
        let verdict = er_check_nsp(&gamma, 1, STRICT_MARGIN_TOL, DEFAULT_FEAS_TOL).unwrap();
        let mut all_unique = true;
        for j in 0..12 {
            for sign in [1.0, -1.0] {
                let v = SparseVector::new(12, vec![j], vec![sign]).unwrap();
                let y = gamma.apply(&v.to_dense()).unwrap();
                let bp = basis_pursuit(&gamma, &y, DEFAULT_FEAS_TOL).unwrap();
                let r = certify_uniqueness(&gamma, &y, &bp, 1e-6, DEFAULT_FEAS_TOL).unwrap();
                let recovered = r.unique == Uniqueness::Unique
                    && r.minimizer.iter().zip(v.to_dense()).all(|(a, b)| (a - b).abs() < 1e-6);
                all_unique &= recovered;
            }
        }
        assert_eq!(verdict.holds, all_unique, "seed {seed}: {verdict}");
    }
}

fn small_config(trials: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(3, 2000, trials, 9);
    // n = 2000 is below the size where R^4 delta <= c_4 holds.
    cfg.force = true;
    cfg
}

#[test]
fn stored_certificates_revalidate_after_resampling() {
    let cfg = small_config(6);
    let report = run_theorem_a(&cfg).unwrap();
    let law = report.plan.law();
    let mut seen = 0;
    for rec in &report.records {
        assert_eq!(rec.seed, cfg.trial_seed(rec.trial));
        if let Some(cert) = &rec.certificate {
            let gamma = sample_matrix(&EnsembleSpec::new(law, 3, 2000, rec.seed)).unwrap();
            cert.validate(&gamma).unwrap();
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn trial_outcomes_do_not_depend_on_the_thread_count() {
    let cfg = small_config(4);
    let a = run_theorem_a(&cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| run_theorem_a(&cfg)).unwrap();
    assert_eq!(a, b);
    let stats = a.stats.get(Check::FailureCert).unwrap();
    let mean = a.records.iter().filter(|r| r.failure_found == Some(true)).count() as f64 / 4.0;
    assert_eq!(stats.frequency, mean);
}

#[test]
fn zero_spike_rate_still_fails_through_duplicate_columns() {
    // With delta = 0 the law is Rademacher; at N = 3 column 1 has exact
    // duplicates, so a certificate always exists.
    let mut cfg = small_config(5);
    cfg.overrides = Some(PlanOverrides {
        delta: Some(0.0),
        p: None,
        big_r: Some(7.0),
    });
    cfg.checks = [Check::FailureCert, Check::SpikeEvent].into_iter().collect();
    let report = run_theorem_a(&cfg).unwrap();
    assert_eq!(report.stats.get(Check::FailureCert).unwrap().frequency, 1.0);
    assert_eq!(report.stats.get(Check::SpikeEvent).unwrap().frequency, 0.0);
}
