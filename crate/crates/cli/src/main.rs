mod args;
mod format;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use gtcorners::density::{gt_volume, hciz, ComplexSpectrum, CornerDensity};
use gtcorners::discrete::{count_schemes, relative_dimension, scaling_limit_compare, Signature};
use gtcorners::matrixmodel::{sample_corner_spectra, sample_patterns};
use gtcorners::splines::{fundamental_spline, spline_tail_integrals, KnotVector};
use gtcorners::verify::{run_suite, Suite, VerifyParams};
use gtcorners::{Complex64, Error, Spectrum};

use args::{
    Cli, Command, DensityCommand, DiscreteCommand, Format, SampleArgs, SampleCommand,
    SampleCommon, SplineCommand, SuiteName, VerifyArgs,
};
use format::{number, value_json};

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

type Result<T> = std::result::Result<T, Error>;

enum Outcome {
    Done,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_VALIDATION),
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => {
            eprintln!("gtcorners: verification failed");
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err(e) => {
            eprintln!("gtcorners: {e}");
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL })
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    match cli.command {
        Command::Spline(cmd) => spline(cmd)?,
        Command::Density(cmd) => density(cmd)?,
        Command::Volume { x } => {
            let x = Spectrum::new(parse_reals(&x, "--x")?)?;
            println!("{}", value_json(gt_volume(&x)?));
        }
        Command::Hciz { x, z } => {
            let x = Spectrum::new(parse_reals(&x, "--x")?)?;
            let z = ComplexSpectrum::new(parse_complex(&z)?)?;
            let v = hciz(&x, &z)?;
            println!("{{\"re\": {}, \"im\": {}}}", number(v.re), number(v.im));
        }
        Command::Sample(args) => sample(args, threads)?,
        Command::Discrete(cmd) => discrete(cmd)?,
        Command::Verify(args) => return verify(args, threads),
    }
    Ok(Outcome::Done)
}

fn spline(cmd: SplineCommand) -> Result<()> {
    match cmd {
        SplineCommand::Eval { knots, at } => {
            let y = KnotVector::new(parse_reals(&knots, "--knots")?)?;
            if at.is_nan() {
                return Err(Error::Argument("--at must be a number".into()));
            }
            println!("{}", value_json(fundamental_spline(at, &y)));
        }
        SplineCommand::Integrate { knots, from, to } => {
            let y = KnotVector::new(parse_reals(&knots, "--knots")?)?;
            println!("{}", value_json(spline_tail_integrals(from, to, &y)?));
        }
    }
    Ok(())
}

fn density(cmd: DensityCommand) -> Result<()> {
    match cmd {
        DensityCommand::Eval { x, k, at } => {
            let d = CornerDensity::new(Spectrum::new(parse_reals(&x, "--x")?)?, k)?;
            let a = parse_reals(&at, "--at")?;
            println!("{}", value_json(d.eval(&a)?));
        }
        DensityCommand::Grid { x, k, grid, out, format } => {
            let d = CornerDensity::new(Spectrum::new(parse_reals(&x, "--x")?)?, k)?;
            let axes = parse_grid(&grid, k)?;
            let header: Vec<String> = (1..=k).map(|j| format!("a{j}")).chain(["density".into()]).collect();
            let mut rows = Vec::new();
            for point in grid_points(&axes) {
                let value = if point.windows(2).all(|w| w[0] <= w[1]) { d.eval(&point)? } else { 0.0 };
                let mut row = point;
                row.push(value);
                rows.push(row);
            }
            write_table(out.as_deref(), format, &header, &rows)?;
        }
    }
    Ok(())
}

fn sample(args: SampleArgs, threads: usize) -> Result<()> {
    match args.pattern {
        Some(SampleCommand::Pattern(common)) => {
            let (x, samples) = sample_inputs(&common)?;
            let threads = if common.deterministic { 1 } else { threads };
            let patterns = sample_patterns(&x, samples, common.seed, threads)?;
            let mut w = open_output(common.out.as_deref())?;
            let top = x.values().to_vec();
            for p in patterns {
                let rows: Vec<String> = std::iter::once(&top)
                    .chain(p.rows())
                    .map(|r| format!("[{}]", r.iter().map(|&v| number(v)).collect::<Vec<_>>().join(",")))
                    .collect();
                writeln!(w, "[{}]", rows.join(",")).map_err(io_error)?;
            }
            w.flush().map_err(io_error)
        }
        None => {
            let common = args.common;
            let (x, samples) = sample_inputs(&common)?;
            let k = args.k.ok_or_else(|| Error::Argument("--k is required".into()))?;
            let threads = if common.deterministic { 1 } else { threads };
            let points = sample_corner_spectra(&x, k, samples, common.seed, threads)?;
            let header: Vec<String> = (1..=k).map(|j| format!("a{j}")).collect();
            write_table(common.out.as_deref(), args.format, &header, &points)
        }
    }
}

fn sample_inputs(common: &SampleCommon) -> Result<(Spectrum, usize)> {
    let x = common.x.as_deref().ok_or_else(|| Error::Argument("--x is required".into()))?;
    let samples = common.samples.ok_or_else(|| Error::Argument("--n is required".into()))?;
    Ok((Spectrum::new(parse_reals(x, "--x")?)?, samples))
}

fn discrete(cmd: DiscreteCommand) -> Result<()> {
    match cmd {
        DiscreteCommand::Dim { x } => {
            let x = Signature::new(parse_integers(&x, "--x")?)?;
            println!("{{\"value\": {}}}", count_schemes(&x)?);
        }
        DiscreteCommand::Reldim { x, y } => {
            let x = Signature::new(parse_integers(&x, "--x")?)?;
            let y = Signature::new(parse_integers(&y, "--y")?)?;
            let r = relative_dimension(&x, &y)?;
            println!("{}/{}", r.numer(), r.denom());
        }
        DiscreteCommand::Limit { x, k, l, points, out, format } => {
            let x = Spectrum::new(parse_reals(&x, "--x")?)?;
            let pts = parse_points(&points)?;
            let report = scaling_limit_compare(&x, k, l, &pts)?;
            let header: Vec<String> = (1..=k)
                .map(|j| format!("a{j}"))
                .chain(["discrete".into(), "continuous".into(), "abs_diff".into()])
                .collect();
            let rows: Vec<Vec<f64>> = report
                .rows
                .iter()
                .map(|r| {
                    let mut row = r.point.clone();
                    row.extend([r.discrete, r.continuous, r.abs_diff]);
                    row
                })
                .collect();
            write_table(out.as_deref(), format, &header, &rows)?;
        }
    }
    Ok(())
}

fn verify(args: VerifyArgs, threads: usize) -> Result<Outcome> {
    let suite = match args.suite {
        SuiteName::Splines => Suite::Splines,
        SuiteName::Kernel => Suite::Kernel,
        SuiteName::Theorem => Suite::Theorem,
        SuiteName::Volume => Suite::Volume,
        SuiteName::Hciz => Suite::Hciz,
        SuiteName::Recurrence => Suite::Recurrence,
        SuiteName::Discrete => Suite::Discrete,
        SuiteName::All => Suite::All,
    };
    let params = VerifyParams {
        max_n: args.max_n,
        seed: args.seed,
        samples: args.samples,
        threads,
    };
    let report = run_suite(suite, &params)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Resource(format!("cannot serialize report: {e}")))?;
    println!("{json}");
    if let Some(path) = args.out {
        std::fs::write(&path, format!("{json}\n")).map_err(io_error)?;
    }
    Ok(if report.pass { Outcome::Done } else { Outcome::VerificationFailed })
}

/// Inline JSON, or the contents of the file named after a leading `@`.
fn load_json(arg: &str, flag: &str) -> Result<Value> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::Argument(format!("{flag}: cannot read {path}: {e}")))?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::Argument(format!("{flag}: invalid JSON: {e}")))
}

fn parse_reals(arg: &str, flag: &str) -> Result<Vec<f64>> {
    serde_json::from_value(load_json(arg, flag)?)
        .map_err(|e| Error::Argument(format!("{flag}: expected an array of numbers: {e}")))
}

fn parse_integers(arg: &str, flag: &str) -> Result<Vec<i64>> {
    serde_json::from_value(load_json(arg, flag)?)
        .map_err(|e| Error::Argument(format!("{flag}: expected an array of integers: {e}")))
}

fn parse_points(arg: &str) -> Result<Vec<Vec<f64>>> {
    serde_json::from_value(load_json(arg, "--points")?)
        .map_err(|e| Error::Argument(format!("--points: expected an array of arrays of numbers: {e}")))
}

/// Numbers, or `[re, im]` pairs.
fn parse_complex(arg: &str) -> Result<Vec<Complex64>> {
    let bad = || Error::Argument("--z: expected numbers or [re, im] pairs".into());
    let Value::Array(items) = load_json(arg, "--z")? else {
        return Err(bad());
    };
    items
        .iter()
        .map(|item| match item {
            Value::Number(n) => n.as_f64().map(|re| Complex64::new(re, 0.0)).ok_or_else(bad),
            Value::Array(pair) if pair.len() == 2 => match (pair[0].as_f64(), pair[1].as_f64()) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        })
        .collect()
}

/// `min:max:steps` per coordinate, comma-separated; a single spec is
/// repeated for all `k` coordinates.
fn parse_grid(spec: &str, k: usize) -> Result<Vec<Vec<f64>>> {
    let bad = |part: &str| Error::Argument(format!("--grid: '{part}' is not of the form min:max:steps"));
    let mut axes = Vec::new();
    for part in spec.split(',') {
        let fields: Vec<&str> = part.trim().split(':').collect();
        if fields.len() != 3 {
            return Err(bad(part));
        }
        let lo: f64 = fields[0].parse().map_err(|_| bad(part))?;
        let hi: f64 = fields[1].parse().map_err(|_| bad(part))?;
        let steps: usize = fields[2].parse().map_err(|_| bad(part))?;
        if !lo.is_finite() || !hi.is_finite() || steps == 0 || hi < lo {
            return Err(bad(part));
        }
        let axis = if steps == 1 {
            vec![lo]
        } else {
            (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
        };
        axes.push(axis);
    }
    match axes.len() {
        1 if k > 1 => Ok(vec![axes[0].clone(); k]),
        n if n == k => Ok(axes),
        n => Err(Error::Dimension(format!("--grid has {n} axes, K is {k}"))),
    }
}

fn grid_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect()
    })
}

fn io_error(e: io::Error) -> Error {
    Error::Resource(format!("I/O failure: {e}"))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Argument(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_table(path: Option<&Path>, format: Format, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = open_output(path)?;
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            let to_err = |e: csv::Error| Error::Resource(format!("CSV output failed: {e}"));
            csv.write_record(header).map_err(to_err)?;
            for row in rows {
                csv.write_record(row.iter().map(|&v| number(v))).map_err(to_err)?;
            }
            csv.flush().map_err(io_error)?;
        }
        Format::Json => {
            for row in rows {
                let fields: Vec<String> = header
                    .iter()
                    .zip(row)
                    .map(|(h, &v)| format!("\"{h}\": {}", number(v)))
                    .collect();
                writeln!(w, "{{{}}}", fields.join(", ")).map_err(io_error)?;
            }
        }
    }
    w.flush().map_err(io_error)
}
