//! Seeded Monte Carlo reproduction of the basis pursuit failure on spiky
//! matrices, with the l0 companion check, a Gaussian baseline and CSV
//! sweeps.

mod stats;
mod sweep;

use std::collections::BTreeSet;

use rayon::prelude::*;

pub use stats::{wilson_interval, CheckStats};
pub use sweep::{run_sweep, write_csv, SweepCell, SweepGrid, CSV_HEADER};

use crate::certify::{
    compatibility_constant, er_check_nsp, er_failure_certificate, FailureCertificate,
    STRICT_MARGIN_TOL,
};
use crate::ensemble::{
    plan_parameters_with, sample_matrix, EnsembleSpec, MeasurementMatrix, ParameterPlan,
    PlannerConstants, ScalarLaw,
};
use crate::error::{domain, Result};
use crate::recovery::{columns_parallel_to, l0_brute_force, SparseVector, L0_RES_TOL};
use crate::rng;
use crate::simplex::DEFAULT_FEAS_TOL;

/// Relative tolerance of the exact parallel-column test.
pub const PARALLEL_REL_TOL: f64 = 1e-9;
/// Duality-gap tolerance used for the per-trial compatibility constant.
pub const PHI2_GAP_TOL: f64 = 1e-8;
/// A trial counts as `phi2 = 0` when the computed value is at most this.
pub const PHI2_ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    FailureCert,
    CleanCol,
    SpikeEvent,
    L0Unique,
    NspGaussianBaseline,
    Phi2,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::FailureCert,
        Check::CleanCol,
        Check::SpikeEvent,
        Check::L0Unique,
        Check::NspGaussianBaseline,
        Check::Phi2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::FailureCert => "failure_cert",
            Check::CleanCol => "clean_col",
            Check::SpikeEvent => "spike_event",
            Check::L0Unique => "l0_unique",
            Check::NspGaussianBaseline => "nsp_gaussian_baseline",
            Check::Phi2 => "phi2",
        }
    }

    pub fn parse(s: &str) -> Result<Check> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .map_or_else(|| domain(format!("unknown check {s:?}")), Ok)
    }
}

/// Checks run by default on every trial.
pub fn default_checks() -> BTreeSet<Check> {
    [
        Check::FailureCert,
        Check::CleanCol,
        Check::SpikeEvent,
        Check::L0Unique,
        Check::Phi2,
    ]
    .into_iter()
    .collect()
}

/// Explicit replacements for the planner's `(delta, p, R)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlanOverrides {
    pub delta: Option<f64>,
    pub p: Option<f64>,
    pub big_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_rows: usize,
    pub n_cols: usize,
    pub constants: PlannerConstants,
    pub overrides: Option<PlanOverrides>,
    /// Run even when the plan violates one of its conditions.
    pub force: bool,
    pub trials: usize,
    pub base_seed: u64,
    pub checks: BTreeSet<Check>,
}

impl ExperimentConfig {
    pub fn new(n_rows: usize, n_cols: usize, trials: usize, base_seed: u64) -> Self {
        ExperimentConfig {
            n_rows,
            n_cols,
            constants: PlannerConstants::default(),
            overrides: None,
            force: false,
            trials,
            base_seed,
            checks: default_checks(),
        }
    }

    /// The plan the trials will use, honouring overrides and `force`.
    pub fn resolve_plan(&self) -> Result<ParameterPlan> {
        if self.trials == 0 {
            return domain("need at least one trial");
        }
        let planned = plan_parameters_with(self.n_rows, self.n_cols, self.constants)?;
        let plan = match self.overrides {
            None => planned,
            Some(o) => ParameterPlan::from_values(
                self.n_rows,
                self.n_cols,
                o.delta.unwrap_or(planned.delta),
                o.p.unwrap_or(planned.p),
                o.big_r.or(if o.delta.is_none() && o.p.is_none() {
                    Some(planned.big_r)
                } else {
                    None
                }),
                self.constants,
            )?,
        };
        if let Some(c) = plan.first_violation() {
            if !self.force {
                return domain(format!(
                    "plan violates {}: {} (pass force to run anyway)",
                    c.name, c.inequality
                ));
            }
        }
        Ok(plan)
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        rng::mix(self.base_seed, trial as u64)
    }
}

/// Outcome of one trial. `None` fields were not requested (or, for `phi2`,
/// not applicable because no certificate was found).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub failure_found: Option<bool>,
    /// 0-based column whose basis vector was certified to fail.
    pub witness_j: Option<usize>,
    pub certificate: Option<FailureCertificate>,
    pub clean_col1: Option<bool>,
    pub spike_event_all_rows: Option<bool>,
    pub l0_unique: Option<bool>,
    pub phi2: Option<f64>,
}

/// Aggregates of a run, one entry per requested check.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialStats {
    pub per_check: Vec<(Check, CheckStats)>,
}

impl TrialStats {
    pub fn get(&self, check: Check) -> Option<&CheckStats> {
        self.per_check.iter().find(|(c, _)| *c == check).map(|(_, s)| s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub plan: ParameterPlan,
    pub records: Vec<TrialRecord>,
    pub stats: TrialStats,
}

impl ExperimentReport {
    /// Mean of the computed `phi2` values.
    pub fn mean_phi2(&self) -> Option<f64> {
        let vals: Vec<f64> = self.records.iter().filter_map(|r| r.phi2).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

/// Result of the l0 identifiability check for one column.
#[derive(Debug, Clone, PartialEq)]
pub struct L0Check {
    pub parallel_columns: Vec<usize>,
    pub solutions: Vec<SparseVector>,
    pub unique: bool,
}

/// Whether `e_j` is the only 1-sparse solution of `Gamma t = Gamma e_j`:
/// no other column is parallel to column `j`, and support enumeration
/// returns exactly `{e_j}`.
pub fn l0_unique_at(gamma: &MeasurementMatrix, j: usize) -> Result<L0Check> {
    if j >= gamma.n_cols() {
        return domain(format!("column {j} out of range"));
    }
    let parallel_columns = columns_parallel_to(gamma, j, PARALLEL_REL_TOL);
    let y = gamma.column(j);
    let solutions = l0_brute_force(gamma, &y, 1, L0_RES_TOL)?;
    let unique = parallel_columns.is_empty()
        && solutions.len() == 1
        && solutions[0].support() == [j];
    Ok(L0Check {
        parallel_columns,
        solutions,
        unique,
    })
}

/// Searches failure certificates for `e_0` first, then `e_1, e_2, ...`.
pub fn find_failure_certificate(gamma: &MeasurementMatrix) -> Result<Option<(usize, FailureCertificate)>> {
    let n = gamma.n_cols();
    for j in 0..n {
        let v = SparseVector::basis(n, j)?;
        if let Some(cert) = er_failure_certificate(gamma, &v, DEFAULT_FEAS_TOL)? {
            return Ok(Some((j, cert)));
        }
    }
    Ok(None)
}

/// Whether every row `i` has some column `j >= 1` whose only spike sits at
/// row `i`. `spikes` is the row-major selector pattern.
pub fn spike_event_all_rows(spikes: &[bool], n_rows: usize, n_cols: usize) -> bool {
    let mut hit = vec![false; n_rows];
    for j in 1..n_cols {
        let mut rows = (0..n_rows).filter(|&i| spikes[i * n_cols + j]);
        if let (Some(i), None) = (rows.next(), rows.next()) {
            hit[i] = true;
        }
    }
    hit.iter().all(|&h| h)
}

/// Whether column 0 carries no spike.
pub fn clean_first_column(spikes: &[bool], n_rows: usize, n_cols: usize) -> bool {
    (0..n_rows).all(|i| !spikes[i * n_cols])
}

/// Evaluates the requested checks on one matrix. `spikes` (row-major
/// selector pattern) is needed for the clean-column and spike-event checks.
pub fn evaluate_matrix(
    gamma: &MeasurementMatrix,
    spikes: Option<&[bool]>,
    checks: &BTreeSet<Check>,
    trial: usize,
    seed: u64,
) -> Result<TrialRecord> {
    let (n_rows, n_cols) = (gamma.n_rows(), gamma.n_cols());
    let mut rec = TrialRecord {
        trial,
        seed,
        failure_found: None,
        witness_j: None,
        certificate: None,
        clean_col1: None,
        spike_event_all_rows: None,
        l0_unique: None,
        phi2: None,
    };
    if checks.contains(&Check::FailureCert) || checks.contains(&Check::Phi2) {
        let found = find_failure_certificate(gamma)?;
        rec.failure_found = Some(found.is_some());
        if let Some((j, cert)) = found {
            rec.witness_j = Some(j);
            if checks.contains(&Check::Phi2) {
                rec.phi2 = Some(compatibility_constant(gamma, &[j], 1.0, PHI2_GAP_TOL)?.phi2);
            }
            rec.certificate = Some(cert);
        }
    }
    if let Some(spikes) = spikes {
        if checks.contains(&Check::CleanCol) {
            rec.clean_col1 = Some(clean_first_column(spikes, n_rows, n_cols));
        }
        if checks.contains(&Check::SpikeEvent) {
            rec.spike_event_all_rows = Some(spike_event_all_rows(spikes, n_rows, n_cols));
        }
    }
    if checks.contains(&Check::L0Unique) {
        rec.l0_unique = Some(l0_unique_at(gamma, 0)?.unique);
    }
    Ok(rec)
}

fn aggregate(records: &[TrialRecord], checks: &BTreeSet<Check>) -> TrialStats {
    let mut per_check = Vec::new();
    for &check in checks {
        let stats = match check {
            Check::FailureCert => CheckStats::from_indicators(records.iter().filter_map(|r| r.failure_found)),
            Check::CleanCol => CheckStats::from_indicators(records.iter().filter_map(|r| r.clean_col1)),
            Check::SpikeEvent => {
                CheckStats::from_indicators(records.iter().filter_map(|r| r.spike_event_all_rows))
            }
            Check::L0Unique => CheckStats::from_indicators(records.iter().filter_map(|r| r.l0_unique)),
            Check::Phi2 => CheckStats::from_indicators(
                records.iter().filter_map(|r| r.phi2.map(|v| v <= PHI2_ZERO_TOL)),
            ),
            Check::NspGaussianBaseline => continue,
        };
        per_check.push((check, stats));
    }
    TrialStats { per_check }
}

/// Samples `config.trials` spiky matrices and evaluates the requested checks
/// on each. Trial `t` uses seed `mix(base_seed, t)`; results are ordered by
/// trial whatever the thread schedule.
pub fn run_theorem_a(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let plan = config.resolve_plan()?;
    let law = plan.law();
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = config.trial_seed(t);
            let spec = EnsembleSpec::new(law, config.n_rows, config.n_cols, seed);
            let gamma = sample_matrix(&spec)?;
            let spikes = spec.spike_mask();
            evaluate_matrix(&gamma, Some(&spikes), &config.checks, t, seed)
        })
        .collect::<Result<_>>()?;
    let mut stats = aggregate(&records, &config.checks);
    if config.checks.contains(&Check::NspGaussianBaseline) {
        let baseline = run_gaussian_baseline(config.n_rows, config.n_cols, config.trials, config.base_seed)?;
        stats.per_check.push((Check::NspGaussianBaseline, baseline));
    }
    Ok(ExperimentReport {
        plan,
        records,
        stats,
    })
}

/// The l0 check alone, on the same seeded matrices as [`run_theorem_a`].
pub fn run_l0_companion(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut cfg = config.clone();
    cfg.checks = [Check::L0Unique].into_iter().collect();
    run_theorem_a(&cfg)
}

/// Frequency with which an `N x n` Gaussian matrix satisfies ER(1).
pub fn run_gaussian_baseline(n_rows: usize, n_cols: usize, trials: usize, seed: u64) -> Result<CheckStats> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    let holds: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let spec = EnsembleSpec::new(ScalarLaw::Gaussian, n_rows, n_cols, rng::mix(seed, t as u64));
            let gamma = sample_matrix(&spec)?;
            Ok(er_check_nsp(&gamma, 1, STRICT_MARGIN_TOL, DEFAULT_FEAS_TOL)?.holds)
        })
        .collect::<Result<_>>()?;
    Ok(CheckStats::from_indicators(holds))
}
