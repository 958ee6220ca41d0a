use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covlocc::channel::{channel_fidelity, check_ppt, choi_from_kraus, kraus_from_choi};
use covlocc::irreps::{commutant_dimension, table1_basis};
use covlocc::scenarios::{
    appendix_kraus, build_problem, format_float, grid_sweep, identity_region, ppt_interval_d011, published_kraus,
    second_branch, solve_appendix_family, solve_point_with, verify_covariance, AppendixParams, Scenario,
};
use covlocc::sdp::SolverOptions;
use covlocc::Error;

const DEFAULT_TP_TOL: f64 = 1e-10;
const DEFAULT_COV_TOL: f64 = 1e-8;
const DEFAULT_FID_TOL: f64 = 1e-6;
const COVARIANCE_SAMPLES: usize = 20;
const D011_SCAN: usize = 101;

/// Optimal covariant PPT channels between two-qubit Schmidt states.
#[derive(Parser)]
#[command(name = "covlocc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single point and report the optimum.
    Solve(SolveArgs),
    /// Solve a uniform grid and write the fidelity surface as CSV.
    Sweep(SweepArgs),
    /// Map where the identity is optimal among semicovariant PPT maps.
    Region(RegionArgs),
    /// Check a closed-form Kraus set (TP, covariance, fidelity).
    Verify(VerifyArgs),
    /// Print the irrep basis and commutant diagnostics.
    Irreps(IrrepsArgs),
    /// Write one SDP instance as JSON.
    Export(ExportArgs),
}

#[derive(Args)]
struct PointArgs {
    /// semicov | full-sim | full-ind | protocol
    #[arg(long)]
    scenario: Scenario,
    /// Input Schmidt parameter.
    #[arg(long)]
    a: f64,
    /// Target Schmidt parameter (not used by protocol).
    #[arg(long)]
    c: Option<f64>,
    /// Impose the PPT constraint (default).
    #[arg(long, overrides_with = "no_ppt")]
    ppt: bool,
    #[arg(long, overrides_with = "ppt")]
    no_ppt: bool,
}

impl PointArgs {
    fn target(&self) -> Result<f64, CliError> {
        if self.scenario.has_target_parameter() {
            self.c
                .ok_or_else(|| CliError::Usage(format!("--c is required for {}", self.scenario)))
        } else {
            Ok(self.a)
        }
    }

    fn ppt(&self) -> bool {
        !self.no_ppt
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Solver duality-gap tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Seed for the covariance check.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: Scenario,
    /// Points per axis [default: 51, or 101 for protocol].
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, overrides_with = "no_ppt")]
    ppt: bool,
    #[arg(long, overrides_with = "ppt")]
    no_ppt: bool,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long, default_value_t = 51)]
    grid: usize,
    /// Output CSV `a,c,identity_optimal` (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// full-sim, full-ind, or protocol (appendix family).
    #[arg(long)]
    scenario: Scenario,
    /// Free weight of the full-sim family, in [0, 1] [default: midpoint of
    /// the interval where the family is PPT].
    #[arg(long)]
    d011: Option<f64>,
    /// Protocol: Schmidt parameter the parameters belong to.
    #[arg(long)]
    a: Option<f64>,
    /// Protocol: s11,s44,s7,a11,a44,a7,s22,s33 (solved for when omitted).
    #[arg(long, value_delimiter = ',')]
    params: Option<Vec<f64>>,
    /// TP, covariance and fidelity tolerances; one value sets all three.
    #[arg(long, value_delimiter = ',')]
    check_tol: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct IrrepsArgs {
    /// Also compute residuals and exit 2 if any is out of tolerance.
    #[arg(long)]
    check: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Output JSON (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_)
            | Error::NotCompletelyPositive { .. }
            | Error::NotTracePreserving { .. }
            | Error::NotHermitian { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn with_jobs<T>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(pool.install(f))
}

fn options(tol: f64) -> Result<SolverOptions, CliError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    Ok(SolverOptions {
        gap_tol: tol,
        ..SolverOptions::default()
    })
}

fn solve(args: SolveArgs) -> CliResult {
    let p = &args.point;
    let c = p.target()?;
    let opts = options(args.tol)?;
    let with = solve_point_with(p.scenario, p.a, c, true, &opts)?;
    let without = solve_point_with(p.scenario, p.a, c, false, &opts)?;
    let main = if p.ppt() { &with } else { &without };
    let cov = verify_covariance(&main.choi, p.scenario, COVARIANCE_SAMPLES, args.seed);
    let kraus = kraus_from_choi(&main.choi)?;

    println!("scenario             {}", p.scenario);
    println!("a                    {}", p.a);
    if p.scenario.has_target_parameter() {
        println!("c                    {c}");
    }
    println!("ppt                  {}", p.ppt());
    println!("fidelity             {:.10}", main.fidelity);
    println!("fidelity_ppt         {:.10}", with.fidelity);
    println!("fidelity_noppt       {:.10}", without.fidelity);
    println!("gap                  {:.3e}", main.solution.gap);
    println!("iterations           {}", main.solution.iterations);
    println!("covariance_residual  {:.3e}", cov.max());
    println!("kraus_operators      {}", kraus.len());
    if p.scenario == Scenario::FullSimultaneous {
        match ppt_interval_d011(D011_SCAN) {
            Some((lo, hi)) => println!("d011_ppt_interval    [{lo:.6}, {hi:.6}]"),
            None => println!("d011_ppt_interval    none"),
        }
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> CliResult {
    let n = args
        .grid
        .unwrap_or(if args.scenario.has_target_parameter() { 51 } else { 101 });
    let opts = options(args.tol)?;
    let surface = with_jobs(args.jobs, || grid_sweep(args.scenario, n, !args.no_ppt, &opts))??;
    let mut out = output(&args.out)?;
    surface.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn region(args: RegionArgs) -> CliResult {
    let opts = options(args.tol)?;
    let r = with_jobs(args.jobs, || identity_region(args.grid, &opts))??;
    let axis = r.axis();
    let mut w = csv::Writer::from_writer(output(&args.out)?);
    w.write_record(["a", "c", "identity_optimal"])
        .map_err(io::Error::from)?;
    for (i, a) in axis.iter().enumerate() {
        for (j, c) in axis.iter().enumerate() {
            w.write_record([format_float(*a), format_float(*c), r.flags[i][j].to_string()])
                .map_err(io::Error::from)?;
        }
    }
    w.flush()?;
    eprintln!(
        "flagged {} of {} points, connected: {}",
        r.count(),
        args.grid * args.grid,
        r.is_connected()
    );
    Ok(())
}

/// Sample points for comparing a family against its closed form.
const VERIFY_POINTS: [(f64, f64); 5] = [(0.0, 1.0), (0.2, 0.9), (0.5, 0.5), (0.7, 0.3), (1.0, 0.0)];

fn verify(args: VerifyArgs) -> CliResult {
    let (tp_tol, cov_tol, fid_tol) = match args.check_tol.as_deref() {
        None => (DEFAULT_TP_TOL, DEFAULT_COV_TOL, DEFAULT_FID_TOL),
        Some([t]) => (*t, *t, *t),
        Some([t, c]) => (*t, *c, DEFAULT_FID_TOL),
        Some([t, c, f]) => (*t, *c, *f),
        Some(_) => return Err(CliError::Usage("--check-tol takes 1 to 3 values".into())),
    };
    let scenario = args.scenario;
    // (label, value, analytic or optimum) pairs for the fidelity check.
    let mut fidelities = Vec::new();
    let kraus = match scenario {
        Scenario::FullSimultaneous | Scenario::FullIndependent => {
            if scenario == Scenario::FullIndependent && args.d011.is_some() {
                return Err(CliError::Usage("--d011 applies to full-sim only".into()));
            }
            let d011 = match (scenario, args.d011) {
                (Scenario::FullSimultaneous, None) => {
                    let (lo, hi) = ppt_interval_d011(D011_SCAN)
                        .ok_or_else(|| CliError::Failure("full-sim family is nowhere PPT".into()))?;
                    println!(
                        "d011 = {:.6} (midpoint of PPT interval [{lo:.6}, {hi:.6}])",
                        0.5 * (lo + hi)
                    );
                    Some(0.5 * (lo + hi))
                }
                (_, d) => d,
            };
            let k = published_kraus(scenario, d011)?;
            let choi = choi_from_kraus(&k);
            for (a, c) in VERIFY_POINTS {
                let (i, t) = scenario.states(a, c)?;
                let branch = second_branch(scenario, a, c).expect("full scenario");
                fidelities.push((format!("a={a} c={c}"), channel_fidelity(&choi, &i, &t), branch));
            }
            k
        }
        Scenario::Protocol => {
            let a = args
                .a
                .ok_or_else(|| CliError::Usage("--a is required for protocol".into()))?;
            let opts = SolverOptions::default();
            let params = match &args.params {
                Some(v) => AppendixParams::from_slice(v)?,
                None => solve_appendix_family(a, true, &opts)?.0,
            };
            let k = appendix_kraus(&params)?;
            let optimum = solve_point_with(scenario, a, a, true, &opts)?.fidelity;
            let (i, t) = scenario.states(a, a)?;
            fidelities.push((
                format!("a={a}"),
                channel_fidelity(&choi_from_kraus(&k), &i, &t),
                optimum,
            ));
            k
        }
        Scenario::SemiCov => {
            return Err(CliError::Usage("semicov has no closed-form Kraus family".into()));
        }
    };
    let choi = choi_from_kraus(&kraus);
    let tp = kraus.tp_residual();
    let cov = verify_covariance(&choi, scenario, COVARIANCE_SAMPLES, args.seed).max();
    let mut pass = true;
    let mut line = |name: &str, value: f64, tol: f64| {
        let ok = value <= tol;
        pass &= ok;
        println!(
            "{:<6} {name:<28} {value:.3e} (tol {tol:.0e})",
            if ok { "PASS" } else { "FAIL" }
        );
    };
    println!("scenario {scenario}, {} Kraus operators", kraus.len());
    line("tp_residual", tp, tp_tol);
    line("covariance_residual", cov, cov_tol);
    for (label, f, reference) in &fidelities {
        line(&format!("fidelity {label}"), (f - reference).abs(), fid_tol);
    }
    println!("ppt_min_eigenvalue {:.3e}", check_ppt(&choi));
    if pass {
        Ok(())
    } else {
        Err(CliError::Failure("verification failed".into()))
    }
}

fn irreps(args: IrrepsArgs) -> CliResult {
    let basis = table1_basis();
    for block in basis.blocks() {
        for (k, v) in block.vectors.iter().enumerate() {
            let terms: Vec<String> = v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.norm() > 1e-14)
                .map(|(idx, x)| format!("{:+.6}|{idx:04b}>", x.re))
                .collect();
            println!("D{}_{} m{k}: {}", block.j, block.copy, terms.join(" "));
        }
    }
    if !args.check {
        return Ok(());
    }
    let mut pass = true;
    let mut line = |name: String, ok: bool| {
        pass &= ok;
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
    };
    let ortho = basis.orthonormality_residual();
    line(format!("basis orthonormality/completeness {ortho:.3e}"), ortho <= 1e-12);
    for scenario in Scenario::ALL {
        let ansatz = scenario.ansatz();
        let dim = commutant_dimension(scenario, COVARIANCE_SAMPLES, args.seed);
        line(
            format!("{scenario}: commutant dimension {dim}, ansatz size {}", ansatz.len()),
            dim == ansatz.len(),
        );
        let res = ansatz.commutator_residual(COVARIANCE_SAMPLES, args.seed);
        line(format!("{scenario}: ansatz commutator residual {res:.3e}"), res <= 1e-9);
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Failure("irrep checks failed".into()))
    }
}

fn export(args: ExportArgs) -> CliResult {
    let p = &args.point;
    let c = p.target()?;
    let problem = build_problem(p.scenario, p.a, c, p.ppt())?;
    let id = if p.scenario.has_target_parameter() {
        format!(
            "{}_a{}_c{}_{}",
            p.scenario.tag(),
            p.a,
            c,
            if p.ppt() { "ppt" } else { "noppt" }
        )
    } else {
        format!(
            "{}_a{}_{}",
            p.scenario.tag(),
            p.a,
            if p.ppt() { "ppt" } else { "noppt" }
        )
    };
    let meta = serde_json::json!({
        "scenario": p.scenario.tag(),
        "a": p.a,
        "c": if p.scenario.has_target_parameter() { Some(c) } else { None },
        "ppt": p.ppt(),
    });
    let json = problem.export(&id, meta).to_json()?;
    let mut out = output(&args.out)?;
    out.write_all(json.as_bytes())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Region(a) => region(a),
        Command::Verify(a) => verify(a),
        Command::Irreps(a) => irreps(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
