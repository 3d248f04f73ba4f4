mod complex;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use ellq::kernels::{self, Sector};
use ellq::rmatrix::{RFamily, RKind};
use ellq::series::solvers;
use ellq::verify::{self, Execution, Suite, TruncationOrders, VerificationConfig};
use ellq::{ModularParams, Theta};

use complex::{fmt_complex, parse_complex};

/// Directory for verification reports when `--report` is absent.
const REPORT_DIR_ENV: &str = "ELLQ_REPORT_DIR";

#[derive(Parser)]
#[command(name = "ellq", version, about = "Elliptic dynamical R-matrices: evaluation and identity verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded verification suites and emit a JSON report.
    Verify(VerifyArgs),
    /// Print the 4x4 entries of an R-matrix (real and imaginary parts).
    Eval(EvalArgs),
    /// Formal series solutions and their functional-equation residuals.
    #[command(subcommand)]
    Series(SeriesCommand),
    /// Dual bases and kernel identities of the half-current projections.
    Kernels(KernelArgs),
}

#[derive(Args, Clone)]
struct ModArgs {
    /// Modular parameter, Im τ > 0.
    #[arg(long, default_value = "0.75i", value_parser = parse_complex, allow_hyphen_values = true)]
    tau: Complex64,
    /// Step γ = -ℏ.
    #[arg(long, default_value = "0.05", value_parser = parse_complex, allow_hyphen_values = true)]
    gamma: Complex64,
}

impl ModArgs {
    fn params(&self) -> Result<ModularParams, Failure> {
        ModularParams::new(self.tau, self.gamma).map_err(Failure::Usage)
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    m: ModArgs,
    /// Suites to run; repeat or comma-separate.
    #[arg(long = "suite", value_delimiter = ',', default_value = "all", value_parser = parse_suite)]
    suites: Vec<Suite>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance of the checks whose nominal tolerance is 1e-9.
    #[arg(long = "tol", default_value_t = 1e-9)]
    tol: f64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    jet_order: usize,
    #[arg(long, default_value_t = 12)]
    kernel_order: usize,
    #[arg(long, default_value_t = 24)]
    laurent_order: usize,
    /// Run samples on the current thread only.
    #[arg(long)]
    sequential: bool,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Rminus,
    Rplus,
    Rbar,
    Classical,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Complex64,
    #[arg(long = "lambda", value_parser = parse_complex, allow_hyphen_values = true)]
    lambda: Complex64,
    #[command(flatten)]
    m: ModArgs,
}

#[derive(Subcommand)]
enum SeriesCommand {
    /// γ-jet of φ(λ)/θ^{1/2}(λ).
    Phi {
        #[arg(long = "lambda", default_value = "0.27+0.13i", value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[command(flatten)]
        m: ModArgs,
    },
    /// ℏ-jet of log f_K at K = -2p against the closed product.
    Fk {
        #[arg(long, default_value_t = 1)]
        p: u32,
        #[arg(long, default_value = "0.27+0.13i", value_parser = parse_complex, allow_hyphen_values = true)]
        zeta: Complex64,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[command(flatten)]
        m: ModArgs,
    },
    /// ℏ-jet of log A(x).
    A {
        #[arg(long, default_value = "0.27+0.13i", value_parser = parse_complex, allow_hyphen_values = true)]
        x: Complex64,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[command(flatten)]
        m: ModArgs,
    },
    /// exp((e^{ℏ∂}-1)/∂ θ'/θ)(x) against θ(x+ℏ)/θ(x).
    ShiftIdentity {
        #[arg(long, default_value = "0.27+0.13i", value_parser = parse_complex, allow_hyphen_values = true)]
        x: Complex64,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[command(flatten)]
        m: ModArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SectorArg {
    Zero,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long = "lambda", value_parser = parse_complex, allow_hyphen_values = true, conflicts_with = "sector", required_unless_present = "sector")]
    lambda: Option<Complex64>,
    #[arg(long, value_enum)]
    sector: Option<SectorArg>,
    #[arg(long, default_value_t = 12)]
    order: usize,
    /// Point at which the kernel sum is tested.
    #[arg(long, default_value = "0.31+0.17i", value_parser = parse_complex, allow_hyphen_values = true)]
    z: Complex64,
    #[command(flatten)]
    m: ModArgs,
}

enum Failure {
    Usage(ellq::Error),
    Math(ellq::Error),
    Io(String),
    Checks,
}

impl From<ellq::Error> for Failure {
    fn from(e: ellq::Error) -> Self {
        Failure::Math(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Series(s) => cmd_series(s),
        Command::Kernels(a) => cmd_kernels(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Math(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let report_path = a.report.or_else(|| {
        std::env::var_os(REPORT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("ellq-report-{}.json", a.seed)))
    });
    let cfg = VerificationConfig {
        tau: a.m.tau,
        gamma: a.m.gamma,
        suites: a.suites,
        samples: a.samples,
        seed: a.seed,
        tolerance: a.tol,
        truncation_orders: TruncationOrders {
            laurent: a.laurent_order,
            jet: a.jet_order,
            kernel_n: a.kernel_order,
        },
        report_path: report_path.clone(),
    };
    cfg.validate().map_err(Failure::Usage)?;
    let exec = if a.sequential { Execution::Sequential } else { Execution::Parallel };
    let report = verify::run_suite(&cfg, exec)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.to_string()))?;
    match &report_path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(p, json + "\n").map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
        }
        None => println!("{json}"),
    }
    let s = report.summary;
    eprintln!(
        "{} records: {} passed, {} failed, {} skipped ({} ms)",
        s.total, s.passed, s.failed, s.skipped, report.wall_time_ms
    );
    for r in report.records.iter().filter(|r| !r.passed && !r.skipped_singular).take(10) {
        eprintln!("FAIL {} sample {}: residual {:.3e} > {:.1e}", r.check_name, r.sample, r.residual, r.tolerance);
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let p = a.m.params()?;
    let m = match a.kind {
        Kind::Classical => ellq::rmatrix::classical_r(a.z, a.lambda, &p)?,
        k => {
            let kind = match k {
                Kind::Rminus => RKind::Rminus,
                Kind::Rplus => RKind::Rplus,
                _ => RKind::Rbar,
            };
            RFamily::new(kind, &p).eval(a.z, a.lambda)?
        }
    };
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| fmt_complex(m.get(i, j))).collect();
        println!("{}", row.join("  "));
    }
    Ok(())
}

fn jet_table(header: &str, rows: impl Iterator<Item = (usize, Complex64, f64)>) {
    println!("{header}");
    for (k, c, r) in rows {
        println!("{k:>3}  {}  {r:.3e}", fmt_complex(c));
    }
}

fn cmd_series(s: SeriesCommand) -> Result<(), Failure> {
    match s {
        SeriesCommand::Phi { lambda, order, m } => {
            let th = Theta::new(&m.params()?);
            let jet = solvers::solve_phi(&th, lambda, order)?;
            let res = solvers::phi_functional_residuals(&th, lambda, order)?;
            jet_table(
                "order  coefficient of φ/θ^{1/2} (re im)  functional-equation residual",
                (0..=order).map(|k| (k, jet.coeff(k), res[k])),
            );
        }
        SeriesCommand::Fk { p, zeta, order, m } => {
            let th = Theta::new(&m.params()?);
            let k = Complex64::new(-2.0 * p as f64, 0.0);
            let series = solvers::solve_fk_series(&th, k, zeta, 0, order)?.log_jet_at(Complex64::new(0.0, 0.0));
            let closed = solvers::fk_closed_log_jet(&th, p, zeta, 1.0, order)?;
            println!("order  series log f_K (re im)  closed form log f_K (re im)  |difference|");
            for n in 0..=order {
                let (a, b) = (series.coeff(n), closed.coeff(n));
                println!("{n:>3}  {}  {}  {:.3e}", fmt_complex(a), fmt_complex(b), (a - b).norm());
            }
            let r = solvers::fk_functional_residual(&th, p, zeta, solvers::FkForm::Shifted, solvers::Reading::Division)?;
            println!("closed form functional-equation relative residual at γ = {}: {r:.3e}", m.gamma);
        }
        SeriesCommand::A { x, order, m } => {
            let th = Theta::new(&m.params()?);
            let sol = solvers::solve_a_double(&th, x, order, order)?;
            let at = sol.log_jet_at(Complex64::new(0.0, 0.0));
            let shifted = sol.log_jet_shifted(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))?;
            let l = th.log_taylor(x, order)?;
            let res: Vec<f64> = (0..=order)
                .map(|n| (at.coeff(n) + shifted.coeff(n) + l[n]).norm())
                .collect();
            jet_table(
                "order  coefficient of log A (re im)  functional-equation residual",
                (0..=order).map(|n| (n, at.coeff(n), res[n])),
            );
        }
        SeriesCommand::ShiftIdentity { x, order, m } => {
            let th = Theta::new(&m.params()?);
            let id = solvers::shift_operator_identity_check(&th, x, order)?;
            let res = id.residuals();
            jet_table(
                "order  coefficient of θ(x+ℏ)/θ(x) (re im)  residual",
                (0..=order).map(|n| (n, id.rhs.coeff(n), res[n])),
            );
        }
    }
    Ok(())
}

fn cmd_kernels(a: KernelArgs) -> Result<(), Failure> {
    let th = Theta::new(&a.m.params()?);
    let sector = match (a.lambda, a.sector) {
        (Some(l), _) => Sector::Lambda(l),
        (None, _) => Sector::Zero,
    };
    let kb = kernels::dual_basis(&th, sector, a.order)?;
    println!("sector: {}", match sector {
        Sector::Lambda(l) => format!("lambda = {l}"),
        Sector::Zero => "zero".into(),
    });
    println!("order: {}", a.order);
    println!("condition number: {:.3e}", kb.condition);
    println!("duality deviation: {:.3e}", kb.duality_deviation()?);
    println!("kernel sum residual at z = {}: {:.3e}", a.z, kernels::kernel_sum_residual(&th, sector, a.z, a.order)?);
    Ok(())
}
