//! `wolff`: build greedy packings, derive their annihilating measures,
//! verify the identities and render the results.
//!
//! Exit status: 0 success, 1 a check failed, 2 bad usage or input,
//! 3 a runtime limitation (region exhausted, problem too large, sampling
//! impossible). Parallel stages honour `RAYON_NUM_THREADS`; results do not
//! depend on the thread count.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wolff_core::independence::{contrast_experiment, min_l1_annihilator, IndependenceError, IndependenceProblem};
use wolff_core::io::{self, IoError};
use wolff_core::render::{self, RenderSpec};
use wolff_core::verify::{run_suite, SuiteConfig, VerifyError};
use wolff_core::{pack_greedy, wolff_measure, Complex, MeasureError, Packing64, PackingError, StopRule};

#[derive(Parser)]
#[command(
    name = "wolff",
    version,
    about = "Greedy disc packings and the annihilating measures they define",
    after_help = "Exit status: 0 ok, 1 check failed, 2 usage or input error, 3 runtime limitation.\n\
                  Set RAYON_NUM_THREADS to limit worker threads; outputs are identical for any value."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a greedy packing of the unit disc.
    Pack(PackArgs),
    /// Derive the truncated measure of a packing.
    Measure(MeasureArgs),
    /// Check the annihilation identities of a measure.
    Verify(VerifyArgs),
    /// Best l1-normalised approximate annihilator of a finite point set.
    Independence(IndependenceArgs),
    /// Segment points against the Wolff prefix of the same size.
    Contrast(ContrastArgs),
    /// Draw a packing or its residual decay as SVG.
    Render(RenderArgs),
    /// Convert a measure or report JSON file to CSV.
    Export(ExportArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("stop").required(true))]
struct PackArgs {
    /// Stop after this many discs.
    #[arg(long, group = "stop")]
    discs: Option<usize>,
    /// Stop once the residual area is at most this value.
    #[arg(long, group = "stop")]
    residual: Option<f64>,
    /// Each disc gets this fraction of the largest available radius, in (0, 1).
    #[arg(long, default_value_t = 0.99)]
    shrink: f64,
    /// Certification tolerance of the largest-empty-disc search.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Output packing JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    /// Input packing JSON.
    #[arg(long)]
    packing: PathBuf,
    /// Output measure JSON.
    #[arg(long)]
    out: PathBuf,
    /// Also write the atoms as CSV (n, re, im, weight).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Input measure JSON.
    #[arg(long = "in", alias = "measure")]
    input: PathBuf,
    /// Packing the measure must match exactly (weights pi r^2, same centres).
    #[arg(long)]
    packing: Option<PathBuf>,
    /// Seed for random polynomials and Monte-Carlo sampling.
    #[arg(long)]
    seed: u64,
    /// Highest moment and harmonic basis order.
    #[arg(long, default_value_t = 10)]
    kmax: u32,
    /// Radius of the 3x3 grid of exponential test points; 0 disables it.
    #[arg(long, default_value_t = 1.0)]
    exp_grid: f64,
    /// Cauchy kernel points outside the disc, comma separated (e.g. 1.5,2,4i,1+2i).
    #[arg(long, default_value = "1.5,2,10", allow_hyphen_values = true, value_parser = parse_complex_list)]
    cauchy: ComplexList,
    /// Degree of the random test polynomials.
    #[arg(long, default_value_t = 8)]
    degree: usize,
    /// Number of random test polynomials; 0 disables the check.
    #[arg(long, default_value_t = 16)]
    trials: usize,
    /// Monte-Carlo samples for the residual-integral oracle (at least 10000).
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Zeros of a Blaschke product for the dominating diagnostic, comma separated.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex_list)]
    blaschke_zeros: Option<ComplexList>,
    /// Circle samples for sup-norm estimates (at least 64).
    #[arg(long, default_value_t = 4096)]
    sup_samples: usize,
    /// Output report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output report CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
struct IndependenceArgs {
    /// CSV file with columns re, im.
    #[arg(long, group = "source")]
    points: Option<PathBuf>,
    /// Measure JSON; its atoms are the points.
    #[arg(long, group = "source")]
    measure: Option<PathBuf>,
    /// Equispaced points j/(N+1), j = 1..N, on the real segment.
    #[arg(long, group = "source")]
    segment: Option<usize>,
    /// Use only the first N atoms of --measure.
    #[arg(long, requires = "measure")]
    prefix: Option<usize>,
    /// Highest moment order K.
    #[arg(long)]
    kmax: usize,
    /// Output certificate JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ContrastArgs {
    /// Number of points on each side.
    #[arg(long)]
    count: usize,
    /// Measure JSON supplying the Wolff prefix.
    #[arg(long)]
    measure: PathBuf,
    /// Highest moment order K.
    #[arg(long)]
    kmax: usize,
    /// Output report JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderKind {
    Packing,
    Convergence,
}

#[derive(Args)]
struct RenderArgs {
    /// Input packing JSON.
    #[arg(long)]
    packing: PathBuf,
    /// What to draw.
    #[arg(long, value_enum, default_value_t = RenderKind::Packing)]
    kind: RenderKind,
    /// Output SVG.
    #[arg(long)]
    out: PathBuf,
    /// Image width and height in pixels (at least 64).
    #[arg(long, default_value_t = 800)]
    size: u32,
    /// Flat fill instead of shading discs by radius.
    #[arg(long)]
    no_gradient: bool,
    /// Omit the text annotation.
    #[arg(long)]
    no_annotate: bool,
    /// Number of log-spaced points in the convergence plot.
    #[arg(long, default_value_t = 40)]
    samples: usize,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
struct ExportArgs {
    /// Measure JSON to export as n, re, im, weight.
    #[arg(long, group = "source")]
    measure: Option<PathBuf>,
    /// Report JSON to export as identity, truncation, deviation, bound, ratio, pass.
    #[arg(long, group = "source")]
    reports: Option<PathBuf>,
    /// Output CSV.
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Clone, Debug)]
struct ComplexList(Vec<Complex<f64>>);

fn parse_complex(token: &str) -> Result<Complex<f64>, String> {
    let t = token.trim();
    let bad = || format!("cannot parse `{t}` as a complex number");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        s => s.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex::new(re, imag(&body[k..])?))
        }
        None => Ok(Complex::new(0.0, imag(body)?)),
    }
}

fn parse_complex_list(s: &str) -> Result<ComplexList, String> {
    if s.trim().is_empty() {
        return Ok(ComplexList(Vec::new()));
    }
    s.split(',').map(parse_complex).collect::<Result<_, _>>().map(ComplexList)
}

enum Failure {
    /// A verification check did not pass.
    Check,
    Input(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check => 1,
            Failure::Input(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<PackingError> for Failure {
    fn from(e: PackingError) -> Self {
        match e {
            PackingError::RegionExhausted { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::LowAcceptance { .. } | VerifyError::NonFinite(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<IndependenceError> for Failure {
    fn from(e: IndependenceError) -> Self {
        match e {
            IndependenceError::InfeasibleScale { .. } | IndependenceError::Solver(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<render::RenderError> for Failure {
    fn from(e: render::RenderError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn pack(args: PackArgs) -> Result<(), Failure> {
    let stop = match (args.discs, args.residual) {
        (Some(n), _) => StopRule::MaxDiscs(n),
        (None, Some(r)) => StopRule::TargetResidual(r),
        (None, None) => unreachable!("clap requires one stop rule"),
    };
    let packing: Packing64 = pack_greedy(stop, args.shrink, args.tol)?;
    io::save_packing(&args.out, &packing)?;
    let residual = packing.residual_area();
    println!(
        "packed {} discs, residual area {:.6e} ({:.6e} pi) -> {}",
        packing.len(),
        residual,
        residual / std::f64::consts::PI,
        args.out.display()
    );
    Ok(())
}

fn measure(args: MeasureArgs) -> Result<(), Failure> {
    let packing: Packing64 = io::load_packing(&args.packing)?;
    let m = wolff_measure(&packing)?;
    io::save_measure(&args.out, &m)?;
    if let Some(csv) = &args.csv {
        io::write_measure_csv(csv, &m)?;
    }
    println!(
        "{} atoms, total variation {:.6e}, residual area {:.6e} -> {}",
        m.len(),
        m.total_variation(),
        m.residual_area(),
        args.out.display()
    );
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let m = io::load_measure::<f64>(&args.input)?;
    let mut mismatch = None;
    if let Some(path) = &args.packing {
        let packing: Packing64 = io::load_packing(path)?;
        if let Err(e) = m.check_against(&packing) {
            mismatch = Some(e);
        }
    }
    let config = SuiteConfig {
        kmax: args.kmax,
        exp_radius: (args.exp_grid > 0.0).then_some(args.exp_grid),
        cauchy: args.cauchy.0,
        degree: args.degree,
        trials: args.trials,
        seed: args.seed,
        mc_samples: args.mc_samples,
        blaschke_zeros: args.blaschke_zeros.map(|z| z.0),
        sup_samples: args.sup_samples,
    };
    let reports = run_suite(&m, &config)?;
    if let Some(path) = &args.out {
        write_text(path, &io::reports_to_json(&reports))?;
    }
    if let Some(path) = &args.csv {
        io::write_reports_csv(path, &reports)?;
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    println!(
        "{} checks on {} atoms, {} failed",
        reports.len() + usize::from(args.packing.is_some()),
        m.len(),
        failed.len() + usize::from(mismatch.is_some())
    );
    if let Some(e) = &mismatch {
        println!("FAIL packing_match: {e}");
    }
    for r in &failed {
        println!(
            "FAIL {}: deviation {:.6e} exceeds bound {:.6e}",
            r.identity.label(),
            r.deviation,
            r.bound
        );
    }
    if failed.is_empty() && mismatch.is_none() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn independence(args: IndependenceArgs) -> Result<(), Failure> {
    let problem = if let Some(path) = &args.points {
        IndependenceProblem::new(io::read_points_csv(path)?, args.kmax)?
    } else if let Some(path) = &args.measure {
        let m = io::load_measure::<f64>(path)?;
        let m = match args.prefix {
            Some(n) => m.prefix(n),
            None => m,
        };
        IndependenceProblem::new(m.points(), args.kmax)?
    } else {
        IndependenceProblem::segment(args.segment.expect("clap requires a source"), args.kmax)?
    };
    let cert = min_l1_annihilator(&problem)?;
    io::write_json(&args.out, &cert)?;
    println!(
        "{} points, K = {}: value {:.6e} in [{:.6e}, {:.6e}] ({} LP solves) -> {}",
        problem.points().len(),
        problem.degree_cap(),
        cert.optimal_value,
        cert.lower_bracket,
        cert.upper_bracket,
        cert.solver.lp_solves,
        args.out.display()
    );
    Ok(())
}

fn contrast(args: ContrastArgs) -> Result<(), Failure> {
    if args.count < 2 {
        return Err(Failure::Input(format!("--count must be at least 2, got {}", args.count)));
    }
    let m = io::load_measure::<f64>(&args.measure)?;
    let report = contrast_experiment(args.count, &m, args.kmax)?;
    io::write_json(&args.out, &report)?;
    let ratio = report.ratio.map_or("unbounded".to_string(), |r| format!("{r:.6e}"));
    println!(
        "segment {:.6e}, wolff {:.6e} (feasible Wolff weights {:.6e}), ratio {ratio} -> {}",
        report.segment.optimal_value,
        report.wolff.optimal_value,
        report.wolff_feasible_value,
        args.out.display()
    );
    Ok(())
}

fn render_cmd(args: RenderArgs) -> Result<(), Failure> {
    let packing: Packing64 = io::load_packing(&args.packing)?;
    let spec = RenderSpec {
        size: args.size,
        gradient: !args.no_gradient,
        annotate: !args.no_annotate,
    };
    let svg = match args.kind {
        RenderKind::Packing => render::render_packing(&packing, &spec)?,
        RenderKind::Convergence => {
            let series = render::log_spaced(&packing.residual_series(), args.samples);
            render::render_convergence(&series, &spec)?
        }
    };
    write_text(&args.out, &svg)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn export(args: ExportArgs) -> Result<(), Failure> {
    if let Some(path) = &args.measure {
        let m = io::load_measure::<f64>(path)?;
        io::write_measure_csv(&args.csv, &m)?;
    } else if let Some(path) = &args.reports {
        let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let reports = io::reports_from_json(&text, &path.display().to_string())?;
        io::write_reports_csv(&args.csv, &reports)?;
    }
    println!("wrote {}", args.csv.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pack(a) => pack(a),
        Command::Measure(a) => measure(a),
        Command::Verify(a) => verify(a),
        Command::Independence(a) => independence(a),
        Command::Contrast(a) => contrast(a),
        Command::Render(a) => render_cmd(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Check => {}
                Failure::Input(msg) | Failure::Runtime(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}
