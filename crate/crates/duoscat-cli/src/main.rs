//! `duoscat`: coupled-channel scattering of a harmonically bound pair on two
//! delta potentials.
//!
//! Subcommands: `solve`, `sweep`, `converge`, `born`, `limits`.
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use duoscat_cli::config::{defaults, FileConfig, RunConfig, Scale, SweepParameter, SweepSpec};
use duoscat_cli::error::CliError;
use duoscat_cli::{csv, run, svg};
use duoscat_core::{channel_momenta, critical_momentum, critical_omega, cutoff_index};

#[derive(Parser, Debug)]
#[command(
    name = "duoscat",
    version,
    about = "Coupled-channel scattering of a harmonically bound particle pair on delta potentials",
    after_help = "Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One solve: channel table, coefficients, conservation report
    Solve(SolveArgs),
    /// Sweep one parameter; emit CSV and/or SVG
    Sweep(SweepArgs),
    /// Truncation study: rows for N = n_c+1 ..= nmax
    Converge(ConvergeArgs),
    /// First-order reference vs full solve over a K0 grid
    Born(BornArgs),
    /// Channel-opening thresholds for the configured system
    Limits(LimitsArgs),
}

/// Physical parameters shared by every subcommand.  Flags override config-file
/// values; unset values fall back to the benchmark defaults.
#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// Mass of particle 1
    #[arg(long)]
    m1: Option<f64>,
    /// Mass of particle 2
    #[arg(long)]
    m2: Option<f64>,
    /// Coupling strength of the potential seen by particle 1
    #[arg(long)]
    gamma1: Option<f64>,
    /// Coupling strength of the potential seen by particle 2
    #[arg(long)]
    gamma2: Option<f64>,
    /// Binding frequency of the pair
    #[arg(long)]
    omega: Option<f64>,
    /// Incident center-of-mass momentum
    #[arg(long)]
    k0: Option<f64>,
    /// Incident internal level
    #[arg(long)]
    l: Option<usize>,
    /// Basis truncation N (default: n_c + 8)
    #[arg(long)]
    nmodes: Option<usize>,
    /// Conservation tolerance deciding converged/unconverged status
    #[arg(long)]
    tol: Option<f64>,
    /// Flat key=value config file; explicit flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pin m1 = m2 = 1 (total mass 2, the reference convention)
    #[arg(long, conflicts_with_all = ["m1", "m2"])]
    paper_defaults: bool,
}

#[derive(Args, Debug, Clone)]
struct OutputOpts {
    /// Write rows as CSV to this path
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write a line plot as SVG to this path
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Write the single-row CSV to this path
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Swept parameter
    #[arg(long)]
    param: Option<String>,
    /// First grid value
    #[arg(long)]
    from: Option<f64>,
    /// Last grid value
    #[arg(long)]
    to: Option<f64>,
    /// Number of grid points (>= 2)
    #[arg(long)]
    steps: Option<usize>,
    /// Grid spacing: linear or log
    #[arg(long)]
    scale: Option<String>,
    /// Draw vertical threshold markers in the SVG
    #[arg(long)]
    markers: bool,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Largest truncation to evaluate (default: n_c + 12)
    #[arg(long)]
    nmax: Option<usize>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args, Debug)]
struct BornArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// First K0 value
    #[arg(long)]
    from: Option<f64>,
    /// Last K0 value
    #[arg(long)]
    to: Option<f64>,
    /// Number of grid points (>= 2)
    #[arg(long)]
    steps: Option<usize>,
    /// Draw vertical threshold markers in the SVG
    #[arg(long)]
    markers: bool,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args, Debug)]
struct LimitsArgs {
    #[command(flatten)]
    common: CommonOpts,
}

/// Die quietly on a closed output pipe (e.g. `duoscat ... | head`) instead of
/// panicking: the runtime ignores SIGPIPE by default, turning EPIPE from
/// `println!` into a panic.
fn reset_sigpipe() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too, but exit cleanly.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Converge(args) => cmd_converge(args),
        Command::Born(args) => cmd_born(args),
        Command::Limits(args) => cmd_limits(args),
    }
}

/// Flags override config-file entries, which override defaults.
fn resolve_config(common: &CommonOpts) -> Result<(RunConfig, FileConfig), CliError> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let paper_defaults = common.paper_defaults || file.get_bool("paper_defaults")?.unwrap_or(false);
    let (m1, m2) = if paper_defaults {
        if file.raw("m1").is_some() || file.raw("m2").is_some() {
            return Err(CliError::usage(
                "paper-defaults pins m1 = m2 = 1 and conflicts with explicit masses",
            ));
        }
        (1.0, 1.0)
    } else {
        (
            common.m1.or(file.get("m1")?).unwrap_or(defaults::M1),
            common.m2.or(file.get("m2")?).unwrap_or(defaults::M2),
        )
    };
    let system = duoscat_core::SystemParams::new(
        m1,
        m2,
        common
            .gamma1
            .or(file.get("gamma1")?)
            .unwrap_or(defaults::GAMMA1),
        common
            .gamma2
            .or(file.get("gamma2")?)
            .unwrap_or(defaults::GAMMA2),
        common
            .omega
            .or(file.get("omega")?)
            .unwrap_or(defaults::OMEGA),
        1.0,
    )?;
    let incident = duoscat_core::IncidentSpec::new(
        common.k0.or(file.get("k0")?).unwrap_or(defaults::K0),
        common.l.or(file.get("l")?).unwrap_or(defaults::L),
    )?;
    let cfg = RunConfig {
        system,
        incident,
        n_modes: common.nmodes.or(file.get("nmodes")?),
        conservation_tol: common
            .tol
            .or(file.get("tol")?)
            .unwrap_or(defaults::CONSERVATION_TOL),
        quadrature_tol: defaults::QUADRATURE_TOL,
    };
    cfg.validate()?;
    Ok((cfg, file))
}

fn resolve_sweep_spec(args: &SweepArgs, file: &FileConfig) -> Result<SweepSpec, CliError> {
    let param: SweepParameter = match (&args.param, file.raw("param")) {
        (Some(s), _) => s.parse()?,
        (None, Some(s)) => s.parse()?,
        (None, None) => return Err(CliError::usage("sweep needs --param")),
    };
    let from = args
        .from
        .or(file.get("from")?)
        .ok_or_else(|| CliError::usage("sweep needs --from"))?;
    let to = args
        .to
        .or(file.get("to")?)
        .ok_or_else(|| CliError::usage("sweep needs --to"))?;
    let steps = args
        .steps
        .or(file.get("steps")?)
        .ok_or_else(|| CliError::usage("sweep needs --steps"))?;
    let scale: Scale = match (&args.scale, file.raw("scale")) {
        (Some(s), _) => s.parse()?,
        (None, Some(s)) => s.parse()?,
        (None, None) => Scale::Linear,
    };
    SweepSpec::new(param, from, to, steps, scale)
}

fn print_report(cfg: &RunConfig, row: &run::SweepRow) -> Result<(), CliError> {
    let s = &cfg.system;
    println!(
        "system: m1 = {}  m2 = {}  gamma1 = {}  gamma2 = {}  omega = {}  hbar = {}",
        s.m1, s.m2, s.gamma1, s.gamma2, s.omega, s.hbar
    );
    println!(
        "incident: K0 = {}  l = {}  |  N = {}  n_c = {}",
        cfg.incident.k0,
        cfg.incident.l,
        cfg.resolved_modes(),
        row.n_c
    );
    let channels = channel_momenta(&s.clone(), &cfg.incident, cfg.resolved_modes())?;
    println!("channels:");
    for ch in channels.iter() {
        let k = ch.momentum;
        if ch.is_open() {
            println!("  n {:>2}: K = {:.12}  (open)", ch.n, k.re);
        } else if ch.at_threshold() {
            println!("  n {:>2}: K = 0  (threshold)", ch.n);
        } else {
            println!("  n {:>2}: K = {:.12}i  (evanescent)", ch.n, k.im);
        }
    }
    println!("coefficients:");
    println!("  {:>3}  {:>22}  {:>22}", "n", "j_re", "j_tr");
    for n in 0..=row.n_c {
        println!("  {:>3}  {:>22.16}  {:>22.16}", n, row.j_re[n], row.j_tr[n]);
    }
    println!(
        "j_total = {:.16}  (|j_total - 1| = {:.3e})",
        row.j_total,
        (row.j_total - 1.0).abs()
    );
    println!("residual = {:.6e}", row.residual);
    println!(
        "status: {} (tol {:.1e})",
        row.status.as_str(),
        cfg.conservation_tol
    );
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let (cfg, file) = resolve_config(&args.common)?;
    let row = run::run_single(&cfg)?;
    print_report(&cfg, &row)?;
    let csv_path = args.csv.or_else(|| file.raw("csv").map(PathBuf::from));
    if let Some(path) = csv_path {
        csv::write_text(&path, &csv::sweep_csv(std::slice::from_ref(&row))?)?;
    }
    Ok(())
}

fn emit_outputs(
    output: &OutputOpts,
    file: &FileConfig,
    rows_csv: &str,
    plot: Option<&svg::Plot>,
) -> Result<(), CliError> {
    let csv_path = output
        .csv
        .clone()
        .or_else(|| file.raw("csv").map(PathBuf::from));
    if let Some(path) = csv_path {
        csv::write_text(&path, rows_csv)?;
    }
    let svg_path = output
        .svg
        .clone()
        .or_else(|| file.raw("svg").map(PathBuf::from));
    if let Some(path) = svg_path {
        let plot = plot.ok_or_else(|| CliError::usage("this command has no SVG output"))?;
        csv::write_text(&path, &svg::render(plot)?)?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let (cfg, file) = resolve_config(&args.common)?;
    let spec = resolve_sweep_spec(&args, &file)?;
    let rows = run::run_sweep(&cfg, &spec)?;
    let markers = if args.markers || file.get_bool("markers")?.unwrap_or(false) {
        run::sweep_markers(&cfg, &spec)
    } else {
        Vec::new()
    };
    let plot = svg::Plot::from_sweep(&rows, spec.parameter.label(), run::is_log(&spec), markers);
    emit_outputs(&args.output, &file, &csv::sweep_csv(&rows)?, Some(&plot))?;
    let converged = rows
        .iter()
        .filter(|r| r.status == run::Status::Converged)
        .count();
    println!(
        "sweep {}: {} points in [{}, {}], {} converged at tol {:.1e}",
        spec.parameter,
        rows.len(),
        spec.from,
        spec.to,
        converged,
        cfg.conservation_tol
    );
    Ok(())
}

fn cmd_converge(args: ConvergeArgs) -> Result<(), CliError> {
    let (cfg, file) = resolve_config(&args.common)?;
    if cfg.n_modes.is_some() {
        return Err(CliError::usage(
            "converge scans N itself; drop --nmodes and use --nmax",
        ));
    }
    let n_c = cutoff_index(&cfg.system, &cfg.incident);
    let n_max = args.nmax.or(file.get("nmax")?).unwrap_or(n_c + 12);
    let rows = run::run_convergence(&cfg, n_max)?;
    let changes = run::successive_changes(&rows);
    println!(
        "truncation study: N = {} ..= {}  (n_c = {})",
        n_c + 1,
        n_max,
        n_c
    );
    println!(
        "  {:>4}  {:>13}  {:>13}  {:>12}",
        "N", "|j_total-1|", "max dj", "residual"
    );
    for (i, row) in rows.iter().enumerate() {
        let dj = if i == 0 { f64::NAN } else { changes[i - 1] };
        println!(
            "  {:>4}  {:>13.3e}  {:>13.3e}  {:>12.3e}",
            row.value as usize,
            (row.j_total - 1.0).abs(),
            dj,
            row.residual
        );
    }
    let plot = svg::Plot::from_sweep(&rows, "N", false, Vec::new());
    emit_outputs(&args.output, &file, &csv::sweep_csv(&rows)?, Some(&plot))?;
    Ok(())
}

fn cmd_born(args: BornArgs) -> Result<(), CliError> {
    let (cfg, file) = resolve_config(&args.common)?;
    let from = args
        .from
        .or(file.get("from")?)
        .ok_or_else(|| CliError::usage("born needs --from"))?;
    let to = args
        .to
        .or(file.get("to")?)
        .ok_or_else(|| CliError::usage("born needs --to"))?;
    let steps = args
        .steps
        .or(file.get("steps")?)
        .ok_or_else(|| CliError::usage("born needs --steps"))?;
    let spec = SweepSpec::new(SweepParameter::K0, from, to, steps, Scale::Linear)?;
    let rows = run::run_born(&cfg, &spec)?;
    let markers = if args.markers || file.get_bool("markers")?.unwrap_or(false) {
        run::sweep_markers(&cfg, &spec)
    } else {
        Vec::new()
    };
    let plot = svg::Plot::from_born(&rows, markers);
    emit_outputs(&args.output, &file, &csv::born_csv(&rows)?, Some(&plot))?;
    println!(
        "first-order comparison over K0 in [{}, {}], {} points",
        spec.from,
        spec.to,
        rows.len()
    );
    Ok(())
}

fn cmd_limits(args: LimitsArgs) -> Result<(), CliError> {
    let (cfg, _) = resolve_config(&args.common)?;
    let s = &cfg.system;
    let inc = &cfg.incident;
    let n_c = cutoff_index(s, inc);
    println!(
        "system: M = {}  omega = {}  K0 = {}  l = {}  ->  n_c = {}",
        s.total_mass(),
        s.omega,
        inc.k0,
        inc.l,
        n_c
    );
    println!("channel-opening thresholds:");
    println!("  {:>3}  {:>20}  {:>20}", "n", "K0_c(n)", "omega_c(n)");
    for n in inc.l + 1..=inc.l + 6 {
        let kc = critical_momentum(s, inc.l, n)?;
        let oc = critical_omega(s, inc, n)?;
        println!("  {:>3}  {:>20.12}  {:>20.12}", n, kc, oc);
    }
    let channels = channel_momenta(s, inc, n_c + 3)?;
    println!("classification at the configured point:");
    for ch in channels.iter() {
        let state = if ch.at_threshold() {
            "threshold"
        } else if ch.is_open() {
            "open"
        } else {
            "evanescent"
        };
        println!("  n {:>2}: {state}", ch.n);
    }
    Ok(())
}
