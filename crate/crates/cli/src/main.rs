use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;

use epicusp::geometry::{
    two_term_intersections, verify_symmetry, DEFAULT_CANDIDATE_REL_TOL, DEFAULT_INTERSECTION_GRID,
};
use epicusp::render::{
    export_samples, intersections_csv, render_components, render_curve, render_param_derivative,
    render_singularity_diagram, render_sweep, PlotSpec, SampleFormat,
};
use epicusp::singularity::{find_cusps, predicted_cusp_locus, DEFAULT_CUSP_GRID, MIN_CUSP_GRID};
use epicusp::verify::{criterion_ids, run_criterion};
use epicusp::winding::{
    winding_closed_form, winding_numeric, WindingResult, DEFAULT_WINDING_SAMPLES,
};
use epicusp::{parse_real, CurveSpec, Error, PlanePoint, TwoTermSpec};

#[derive(Parser)]
#[command(
    name = "epicusp",
    version,
    about = "Winding numbers, cusps and self-intersections of two-term exponential curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Winding number about the origin or another base point
    Wind {
        #[command(flatten)]
        pair: Pair,
        #[arg(short, allow_hyphen_values = true, value_parser = parse_weight)]
        s: f64,
        /// Base point as `x,y`; implies --numeric unless it is the origin
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        z0: Option<PlanePoint>,
        /// Track the argument numerically instead of using the closed form
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = DEFAULT_WINDING_SAMPLES)]
        samples: usize,
    },
    /// Locate and certify the cusps of γ_{a,b}^s over all s
    Cusps {
        #[command(flatten)]
        pair: Pair,
        /// Print the predicted locus without searching
        #[arg(long)]
        predicted_only: bool,
        #[arg(long, default_value_t = DEFAULT_CUSP_GRID)]
        s_grid: usize,
        #[arg(long, default_value_t = DEFAULT_CUSP_GRID)]
        t_grid: usize,
    },
    /// Check the rotational and reflection symmetry numerically
    Symmetry {
        #[command(flatten)]
        pair: Pair,
        #[arg(short, allow_hyphen_values = true, value_parser = parse_weight)]
        s: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Find self-intersections
    Intersect {
        #[command(flatten)]
        pair: Pair,
        #[arg(short, allow_hyphen_values = true, value_parser = parse_weight)]
        s: f64,
        #[arg(long, default_value_t = DEFAULT_INTERSECTION_GRID)]
        t_grid: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Draw one figure
    Plot(PlotArgs),
    /// Draw the curves for s = -1, ..., 1 in one panel
    Sweep {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance checks; exits 3 if any fails
    Verify {
        /// Run a single check
        #[arg(long)]
        only: Option<u8>,
    },
}

#[derive(Args)]
struct Pair {
    #[arg(short)]
    a: i64,
    #[arg(short)]
    b: i64,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, value_enum, default_value_t = PlotKind::Curve)]
    kind: PlotKind,
    #[arg(short)]
    a: Option<i64>,
    #[arg(short)]
    b: Option<i64>,
    /// Weight; repeat for several curves (components needs three)
    #[arg(short, allow_hyphen_values = true, value_parser = parse_weight)]
    s: Vec<f64>,
    /// Plot Σ e^{2πi f t} over these frequencies instead of a two-term curve
    #[arg(long, value_delimiter = ',')]
    freqs: Option<Vec<i64>>,
    #[arg(long, value_enum, default_value_t = Format::Svg)]
    format: Format,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 401)]
    s_grid: usize,
    /// Parameter range `lo,hi` for the components plot
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    t_range: Option<PlanePoint>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    Curve,
    Derivative,
    Diagram,
    Components,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

fn parse_weight(text: &str) -> Result<f64, String> {
    let s = parse_real(text).map_err(|e| e.to_string())?;
    if !(-1.0..=1.0).contains(&s) {
        return Err(format!("s = {s} is outside [-1, 1]"));
    }
    Ok(s)
}

fn parse_point(text: &str) -> Result<PlanePoint, String> {
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| format!("expected `x,y`, got `{text}`"))?;
    let x = parse_real(x.trim()).map_err(|e| e.to_string())?;
    let y = parse_real(y.trim()).map_err(|e| e.to_string())?;
    Ok(PlanePoint::new(x, y))
}

fn usage_error(kind: ErrorKind, message: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, message).exit()
}

fn check_pair(a: i64, b: i64) {
    if a < 1 || a >= b {
        usage_error(
            ErrorKind::ValueValidation,
            format!("frequencies must satisfy 1 <= a < b, got a = {a}, b = {b}"),
        );
    }
}

fn two_term(pair: &Pair, s: f64) -> TwoTermSpec {
    check_pair(pair.a, pair.b);
    TwoTermSpec::new(pair.a, pair.b, s)
        .unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, e))
}

fn print_json(value: &impl serde::Serialize) {
    println!(
        "{}",
        serde_json::to_string(value).expect("serializable output")
    );
}

fn write_out(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text)
        .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))?;
    print_json(&json!({ "out": path.display().to_string(), "bytes": text.len() }));
    Ok(())
}

fn wind(
    spec: &TwoTermSpec,
    z0: Option<PlanePoint>,
    numeric: bool,
    samples: usize,
) -> Result<(), Error> {
    let z0 = z0.unwrap_or(PlanePoint::ORIGIN);
    let result = if numeric || z0 != PlanePoint::ORIGIN {
        winding_numeric(&spec.curve(), z0, samples)?
    } else {
        WindingResult {
            value: winding_closed_form(spec)?,
            residual: 0.0,
            samples: 0,
        }
    };
    print_json(&result);
    Ok(())
}

fn cusps(pair: &Pair, predicted_only: bool, s_grid: usize, t_grid: usize) -> Result<(), Error> {
    check_pair(pair.a, pair.b);
    if s_grid < MIN_CUSP_GRID || t_grid < MIN_CUSP_GRID {
        usage_error(
            ErrorKind::ValueValidation,
            format!("grids must be at least {MIN_CUSP_GRID}"),
        );
    }
    if predicted_only {
        let locus = predicted_cusp_locus(pair.a, pair.b)?;
        for t in locus.t_values_f64() {
            print_json(&json!({ "s": locus.s_bar_f64(), "t": t, "proven": locus.proven }));
        }
        return Ok(());
    }
    let search = find_cusps(pair.a, pair.b, s_grid, t_grid)?;
    eprintln!(
        "{} seeds, {} unconverged, {} rejected",
        search.seeds, search.unconverged, search.rejected
    );
    for c in &search.certificates {
        print_json(&json!({ "s": c.s, "t": c.t, "flip_dot": c.flip_dot, "proven": c.proven }));
    }
    Ok(())
}

fn intersect(spec: &TwoTermSpec, t_grid: usize, format: Format) -> Result<(), Error> {
    let tol = DEFAULT_CANDIDATE_REL_TOL * spec.curve().scale();
    let search = two_term_intersections(spec, t_grid, tol)?;
    eprintln!(
        "{} candidates, {} dropped",
        search.candidates, search.dropped
    );
    match format {
        Format::Csv => print!("{}", intersections_csv(&search.records)),
        Format::Json => search.records.iter().for_each(print_json),
        Format::Svg => usage_error(ErrorKind::InvalidValue, "intersect prints csv or json"),
    }
    Ok(())
}

fn plot(args: &PlotArgs) -> Result<(), Error> {
    let plot = PlotSpec {
        samples: args.samples,
        ..PlotSpec::default()
    };
    if args.format != Format::Svg && args.kind != PlotKind::Curve {
        usage_error(
            ErrorKind::InvalidValue,
            "csv and json export only the curve samples",
        );
    }
    let pair = || match (args.a, args.b) {
        (Some(a), Some(b)) => {
            check_pair(a, b);
            (a, b)
        }
        _ => usage_error(ErrorKind::MissingRequiredArgument, "-a and -b are required"),
    };
    let specs = |default: &[f64]| -> Vec<TwoTermSpec> {
        let (a, b) = pair();
        let weights = if args.s.is_empty() { default } else { &args.s };
        weights
            .iter()
            .map(|&s| {
                TwoTermSpec::new(a, b, s)
                    .unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, e))
            })
            .collect()
    };
    let text = match args.kind {
        PlotKind::Curve => {
            let curves: Vec<CurveSpec> = match &args.freqs {
                Some(f) => vec![CurveSpec::exponential_sum(f)
                    .unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, e))],
                None => specs(&[0.0]).iter().map(TwoTermSpec::curve).collect(),
            };
            match args.format {
                Format::Svg => render_curve(&curves, &plot)?,
                Format::Csv => export_samples(&curves[0], args.samples, SampleFormat::Csv)?,
                Format::Json => export_samples(&curves[0], args.samples, SampleFormat::Json)?,
            }
        }
        PlotKind::Derivative => render_param_derivative(&specs(&[0.0])[0], &plot)?,
        PlotKind::Diagram => {
            let (a, b) = pair();
            render_singularity_diagram(a, b, args.s_grid)?
        }
        PlotKind::Components => {
            let (a, b) = pair();
            let s_bar = (a - b) as f64 / (a + b) as f64;
            let specs = specs(&[s_bar - 0.1, s_bar, (s_bar + 0.1).min(1.0)]);
            let range = args.t_range.unwrap_or(PlanePoint::new(0.0, 1.0));
            render_components(&specs, range.x, range.y, &plot)?
        }
    };
    write_out(&args.out, &text)
}

fn verify(only: Option<u8>) -> ExitCode {
    let ids: Vec<u8> = match only {
        Some(id) if criterion_ids().any(|k| k == id) => vec![id],
        Some(id) => usage_error(ErrorKind::InvalidValue, format!("no check numbered {id}")),
        None => criterion_ids().collect(),
    };
    let mut failed = 0;
    for id in ids {
        let outcome = run_criterion(id).expect("listed criterion");
        eprintln!("{}", outcome.line());
        failed += usize::from(!outcome.passed);
        print_json(&outcome);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failed} check(s) failed");
        ExitCode::from(3)
    }
}

fn configure_threads() {
    let Ok(value) = std::env::var("EPICUSP_THREADS") else {
        return;
    };
    let threads: usize = match value.parse() {
        Ok(n) if n > 0 => n,
        _ => usage_error(
            ErrorKind::InvalidValue,
            format!("EPICUSP_THREADS must be a positive integer, got `{value}`"),
        ),
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
    {
        eprintln!("warning: {e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match &cli.command {
        Command::Wind {
            pair,
            s,
            z0,
            numeric,
            samples,
        } => wind(&two_term(pair, *s), *z0, *numeric, *samples),
        Command::Cusps {
            pair,
            predicted_only,
            s_grid,
            t_grid,
        } => cusps(pair, *predicted_only, *s_grid, *t_grid),
        Command::Symmetry { pair, s, samples } => {
            verify_symmetry(&two_term(pair, *s), *samples).map(|r| print_json(&r))
        }
        Command::Intersect {
            pair,
            s,
            t_grid,
            format,
        } => intersect(&two_term(pair, *s), *t_grid, *format),
        Command::Plot(args) => plot(args),
        Command::Sweep { pair, steps, out } => {
            check_pair(pair.a, pair.b);
            render_sweep(pair.a, pair.b, *steps, &PlotSpec::default())
                .and_then(|svg| write_out(out, &svg))
        }
        Command::Verify { only } => return verify(*only),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            print_json(&json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
