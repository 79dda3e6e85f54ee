//! Command-line front end. Exit codes: 0 success, 1 usage or domain error,
//! 2 when `certify` finds a failure certificate.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::certify::{
    compatibility_constant, er_check_nsp, er_failure_certificate, STRICT_MARGIN_TOL,
};
use crate::ensemble::{
    empirical_moment, moment_lp_norm, moment_ratio, plan_parameters_with, sample_matrix,
    EnsembleSpec, MeasurementMatrix, PlannerConstants, ScalarLaw,
};
use crate::error::{domain, Error, Result};
use crate::experiments::{
    default_checks, run_sweep, run_theorem_a, write_csv, Check, ExperimentConfig, PlanOverrides,
    SweepCell, SweepGrid,
};
use crate::recovery::{basis_pursuit, certify_uniqueness, l0_brute_force, L0_RES_TOL, UNIQUENESS_TOL};
use crate::simplex::DEFAULT_FEAS_TOL;
use crate::textio::{format_vector, parse_columns, parse_target, parse_vector};

#[derive(Parser, Debug)]
#[command(name = "spiky", version, about = "Spiky measurement ensembles and basis pursuit failure certificates")]
struct Cli {
    /// Worker threads for experiments (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan (delta, p, R) for an N x n spiky matrix and report the four conditions.
    Plan {
        #[arg(long = "N")]
        n_rows: usize,
        #[arg(long = "n")]
        n_cols: usize,
        #[command(flatten)]
        constants: ConstantArgs,
    },
    /// Sample a measurement matrix and write it in text form.
    Sample {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long = "N")]
        n_rows: usize,
        #[arg(long = "n")]
        n_cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep raw entries (no 1/sqrt(N) row scale).
        #[arg(long)]
        no_row_scale: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analytic and Monte Carlo moments of a scalar law.
    Moments {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search a basis pursuit failure certificate for a unit-l1 target.
    /// Indices in the printed record are 0-based.
    Certify {
        #[arg(long)]
        matrix: PathBuf,
        /// `e<k>` (1-based) or `dim; idx:val,...` (0-based).
        #[arg(long)]
        target: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact ER(d) verdict through the null space property. `worst_S` is
    /// 0-based.
    Nsp {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Basis pursuit with optional uniqueness certification.
    Recover {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        rhs: RhsArgs,
        /// Also resolve uniqueness over the optimal face.
        #[arg(long)]
        certify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// l0 minimization by support enumeration.
    L0 {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        rhs: RhsArgs,
        #[arg(long, default_value_t = 1)]
        d_max: usize,
    },
    /// Compatibility constant phi^2(L, S).
    Compat {
        #[arg(long)]
        matrix: PathBuf,
        /// Comma-separated 1-based columns, at most two.
        #[arg(long = "S")]
        s_set: String,
        #[arg(long = "L", default_value_t = 1.0)]
        l_budget: f64,
        #[arg(long, default_value_t = 1e-8)]
        gap_tol: f64,
    },
    /// Cartesian sweep over N, n, c_lo and trial counts, written as CSV.
    Sweep {
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n_rows: Vec<usize>,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n_cols: Vec<usize>,
        #[arg(long = "c-lo", value_delimiter = ',', default_value = "3")]
        c_lo: Vec<f64>,
        #[arg(long = "c4", default_value_t = 2.0)]
        c_4: f64,
        #[arg(long, value_delimiter = ',', default_value = "20")]
        trials: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded reproduction of basis pursuit failure on the spiky ensemble.
    TheoremA {
        #[arg(long = "N")]
        n_rows: usize,
        #[arg(long = "n")]
        n_cols: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        constants: ConstantArgs,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "R")]
        big_r: Option<f64>,
        /// Run even if the plan violates a condition.
        #[arg(long)]
        force: bool,
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ConstantArgs {
    #[arg(long = "c-lo", default_value_t = 3.0)]
    c_lo: f64,
    #[arg(long = "c4", default_value_t = 2.0)]
    c_4: f64,
}

impl ConstantArgs {
    fn constants(&self) -> PlannerConstants {
        PlannerConstants {
            c_lo: self.c_lo,
            c_4: self.c_4,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LawKind {
    Rademacher,
    Gaussian,
    Spiky,
}

#[derive(Args, Debug)]
struct LawArgs {
    #[arg(long, value_enum, default_value_t = LawKind::Spiky)]
    law: LawKind,
    /// Spike rate; with --R, overrides the planner.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "R")]
    big_r: Option<f64>,
    /// Shape used to plan delta and R when they are not given.
    #[arg(long = "plan-N")]
    plan_n_rows: Option<usize>,
    #[arg(long = "plan-n")]
    plan_n_cols: Option<usize>,
}

impl LawArgs {
    fn resolve(&self, shape: Option<(usize, usize)>) -> Result<ScalarLaw> {
        match self.law {
            LawKind::Rademacher => Ok(ScalarLaw::Rademacher),
            LawKind::Gaussian => Ok(ScalarLaw::Gaussian),
            LawKind::Spiky => match (self.delta, self.big_r) {
                (Some(d), Some(r)) => ScalarLaw::spiky(d, r),
                (None, None) => {
                    let (nr, nc) = match (self.plan_n_rows, self.plan_n_cols, shape) {
                        (Some(a), Some(b), _) => (a, b),
                        (None, None, Some(s)) => s,
                        _ => return domain("spiky law needs --delta and --R, or --plan-N and --plan-n"),
                    };
                    Ok(plan_parameters_with(nr, nc, PlannerConstants::default())?.law())
                }
                _ => domain("give both --delta and --R, or neither"),
            },
        }
    }
}

#[derive(Args, Debug)]
struct RhsArgs {
    /// Measurement vector as space-separated decimals.
    #[arg(long, conflicts_with_all = ["y_file", "target"])]
    y: Option<String>,
    #[arg(long)]
    y_file: Option<PathBuf>,
    /// Use y = Gamma x0 for this target (`e<k>` or sparse literal).
    #[arg(long)]
    target: Option<String>,
}

impl RhsArgs {
    fn resolve(&self, gamma: &MeasurementMatrix) -> Result<Vec<f64>> {
        match (&self.y, &self.y_file, &self.target) {
            (Some(s), None, None) => parse_vector(s),
            (None, Some(p), None) => parse_vector(&fs::read_to_string(p)?),
            (None, None, Some(t)) => gamma.apply(&parse_target(t, gamma.n_cols())?.to_dense()),
            _ => domain("give exactly one of --y, --y-file, --target"),
        }
    }
}

fn read_matrix(path: &PathBuf) -> Result<MeasurementMatrix> {
    MeasurementMatrix::from_text(&fs::read_to_string(path)?)
}

fn parse_checks(list: &Option<Vec<String>>) -> Result<BTreeSet<Check>> {
    match list {
        None => Ok(default_checks()),
        Some(names) => names.iter().map(|s| Check::parse(s.trim())).collect(),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match cli.threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build() {
            Ok(pool) => {
                let command = cli.command;
                let mut buf: Vec<u8> = Vec::new();
                let r = pool.install(|| dispatch(command, &mut buf));
                let _ = out.write_all(&buf);
                r
            }
            Err(e) => Err(Error::Domain(e.to_string())),
        },
        None => dispatch(cli.command, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Plan {
            n_rows,
            n_cols,
            constants,
        } => {
            let plan = plan_parameters_with(n_rows, n_cols, constants.constants())?;
            writeln!(out, "{plan}")?;
        }
        Command::Sample {
            law,
            n_rows,
            n_cols,
            seed,
            no_row_scale,
            out: path,
        } => {
            let law = law.resolve(Some((n_rows, n_cols)))?;
            let mut spec = EnsembleSpec::new(law, n_rows, n_cols, seed);
            spec.apply_row_scale = !no_row_scale;
            let gamma = sample_matrix(&spec)?;
            fs::write(&path, gamma.to_text())?;
            writeln!(
                out,
                "sampled {} x {} {} matrix (seed {seed}, row_scale {}) -> {}",
                n_rows,
                n_cols,
                law.name(),
                gamma.row_scale(),
                path.display()
            )?;
        }
        Command::Moments {
            law,
            p,
            samples,
            seed,
        } => {
            let law = law.resolve(None)?;
            writeln!(out, "law: {law:?}")?;
            writeln!(out, "||z||_L{p} = {:.12}", moment_lp_norm(&law, p)?)?;
            if p >= 2.0 {
                writeln!(out, "||x||_L{p} = ||z||_Lp/||z||_L2 = {:.12}", moment_ratio(&law, p)?)?;
            }
            writeln!(
                out,
                "empirical ||x||_L{p} ({samples} samples, seed {seed}) = {:.12}",
                empirical_moment(&law, p, samples, seed)?
            )?;
        }
        Command::Certify {
            matrix,
            target,
            out: path,
        } => {
            let gamma = read_matrix(&matrix)?;
            let v = parse_target(&target, gamma.n_cols())?;
            match er_failure_certificate(&gamma, &v, DEFAULT_FEAS_TOL)? {
                None => {
                    writeln!(out, "no certificate")?;
                }
                Some(cert) => {
                    writeln!(out, "{cert}")?;
                    writeln!(out, "verdict: ER({}) fails", v.support().len().max(1))?;
                    if let Some(p) = path {
                        fs::write(p, format!("{cert}\n"))?;
                    }
                    return Ok(2);
                }
            }
        }
        Command::Nsp { matrix, d } => {
            let gamma = read_matrix(&matrix)?;
            let v = er_check_nsp(&gamma, d, STRICT_MARGIN_TOL, DEFAULT_FEAS_TOL)?;
            writeln!(out, "{v}")?;
        }
        Command::Recover {
            matrix,
            rhs,
            certify,
            out: path,
        } => {
            let gamma = read_matrix(&matrix)?;
            let y = rhs.resolve(&gamma)?;
            let mut res = basis_pursuit(&gamma, &y, DEFAULT_FEAS_TOL)?;
            if certify {
                res = certify_uniqueness(&gamma, &y, &res, UNIQUENESS_TOL, DEFAULT_FEAS_TOL)?;
            }
            writeln!(out, "l1_value = {:.16e}", res.l1_value)?;
            writeln!(out, "unique = {:?}", res.unique)?;
            writeln!(out, "minimizer = {}", format_vector(&res.minimizer))?;
            if let Some(alt) = &res.witness_alt {
                writeln!(out, "witness_alt = {}", format_vector(alt))?;
            }
            if let Some(p) = path {
                fs::write(p, format!("{}\n", format_vector(&res.minimizer)))?;
            }
        }
        Command::L0 { matrix, rhs, d_max } => {
            let gamma = read_matrix(&matrix)?;
            if d_max >= 3 && gamma.n_cols() > 2000 {
                writeln!(out, "warning: d_max = {d_max} with n = {} is a very large enumeration", gamma.n_cols())?;
            }
            let y = rhs.resolve(&gamma)?;
            let found = l0_brute_force(&gamma, &y, d_max, L0_RES_TOL)?;
            match found.len() {
                0 => writeln!(out, "no solution with at most {d_max} nonzeros")?,
                1 => writeln!(out, "unique minimal support:")?,
                k => writeln!(out, "{k} minimal supports (l0 recovery is ambiguous):")?,
            }
            for v in &found {
                writeln!(out, "{v}")?;
            }
        }
        Command::Compat {
            matrix,
            s_set,
            l_budget,
            gap_tol,
        } => {
            let gamma = read_matrix(&matrix)?;
            let s = parse_columns(&s_set, gamma.n_cols())?;
            let v = compatibility_constant(&gamma, &s, l_budget, gap_tol)?;
            writeln!(out, "phi2 = {:.16e}", v.phi2)?;
            writeln!(out, "gap = {:.3e}, iterations = {}", v.gap, v.iterations)?;
        }
        Command::Sweep {
            n_rows,
            n_cols,
            c_lo,
            c_4,
            trials,
            seed,
            checks,
            force,
            out: path,
        } => {
            let grid = SweepGrid {
                n_rows,
                n_cols,
                c_lo,
                trials,
                c_4,
                base_seed: seed,
                checks: parse_checks(&checks)?,
                force,
            };
            let cells = run_sweep(&grid)?;
            write_csv(&cells, fs::File::create(&path)?)?;
            for cell in &cells {
                write_summary(out, cell)?;
            }
            writeln!(out, "wrote {}", path.display())?;
        }
        Command::TheoremA {
            n_rows,
            n_cols,
            trials,
            seed,
            constants,
            delta,
            p,
            big_r,
            force,
            checks,
            out: path,
        } => {
            let mut cfg = ExperimentConfig::new(n_rows, n_cols, trials, seed);
            cfg.constants = constants.constants();
            cfg.checks = parse_checks(&checks)?;
            cfg.force = force;
            if delta.is_some() || p.is_some() || big_r.is_some() {
                cfg.overrides = Some(PlanOverrides { delta, p, big_r });
            }
            let plan = cfg.resolve_plan()?;
            if let Some(c) = plan.first_violation() {
                writeln!(out, "warning: forced run violates {}: {}", c.name, c.inequality)?;
            }
            let report = run_theorem_a(&cfg)?;
            let cell = SweepCell {
                cell_id: 0,
                base_seed: seed,
                report,
            };
            write_summary(out, &cell)?;
            if let Some(path) = path {
                write_csv(std::slice::from_ref(&cell), fs::File::create(&path)?)?;
                writeln!(out, "wrote {}", path.display())?;
            }
        }
    }
    Ok(0)
}

fn write_summary(out: &mut dyn Write, cell: &SweepCell) -> Result<()> {
    let report = &cell.report;
    let plan = &report.plan;
    writeln!(
        out,
        "cell {}: N = {}, n = {}, delta = {}, p = {}, R = {}, trials = {}, seed = {}",
        cell.cell_id,
        plan.n_rows,
        plan.n_cols,
        plan.delta,
        plan.p,
        plan.big_r,
        report.records.len(),
        cell.base_seed
    )?;
    for (check, s) in &report.stats.per_check {
        writeln!(
            out,
            "  {}: frequency = {} ({}/{}), wilson95 = [{:.4}, {:.4}]",
            check.name(),
            s.frequency,
            s.successes,
            s.trials,
            s.wilson_95_interval.0,
            s.wilson_95_interval.1
        )?;
    }
    if let Some(m) = report.mean_phi2() {
        writeln!(out, "  mean phi2 over certified trials = {m}")?;
    }
    Ok(())
}
