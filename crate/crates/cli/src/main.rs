mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use magnitude::cantor::{self, CantorParams};
use magnitude::circle::{self, CircleParams};
use magnitude::linear::{self, Scheme, SegmentApproximation};
use magnitude::metric::SpaceInput;
use magnitude::numerics::Quadrature;
use magnitude::{solver, verify, Error};

use output::{render, Cell, Format, Table};

#[derive(Parser, Debug)]
#[command(name = "magnitude", version, about = "Magnitude of finite and compact metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Absolute tolerance for quadrature.
    #[arg(long, global = true, default_value_t = 1e-12, value_parser = positive)]
    tol: f64,

    /// Truncation tolerance for series.
    #[arg(long, global = true, default_value_t = cantor::DEFAULT_EPS, value_parser = positive)]
    eps: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Magnitude, weighting and solver diagnostics of a space read from JSON.
    Finite {
        file: PathBuf,
    },
    /// Magnitude function t -> |tX| of a space read from JSON.
    Sweep {
        file: PathBuf,
        /// Scale grid as start:end:count.
        #[arg(long = "t", value_parser = parse_grid)]
        grid: Grid,
        /// Log-spaced grid (the default).
        #[arg(long, conflicts_with = "linear")]
        log: bool,
        /// Evenly spaced grid.
        #[arg(long)]
        linear: bool,
    },
    /// Segment of length l: closed form and finite approximations.
    Segment {
        #[arg(long, value_parser = nonnegative)]
        length: f64,
        /// Point counts for the convergence table.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = SchemeArg::Uniform)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Ternary Cantor set: approximations, limit, p, q2 and f.
    Cantor {
        #[arg(long, value_parser = positive, required_unless_present = "lengths")]
        length: Option<f64>,
        /// Log-spaced lengths start:end:count instead of a single length.
        #[arg(long, value_parser = parse_grid, conflicts_with = "length")]
        lengths: Option<Grid>,
        /// Approximation level.
        #[arg(long, default_value_t = 5)]
        k: u32,
        /// Also report the Fourier expansion of f(3^x).
        #[arg(long)]
        fourier: bool,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        harmonics: usize,
    },
    /// Circle of circumference l under the kappa metric.
    Circle {
        #[arg(long, value_parser = positive, required_unless_present = "lengths")]
        length: Option<f64>,
        /// Log-spaced lengths start:end:count instead of a single length.
        #[arg(long, value_parser = parse_grid, conflicts_with = "length")]
        lengths: Option<Grid>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        kappa: f64,
        /// Point counts for the convergence table.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
    },
    /// Run the acceptance checks and report pass/fail per criterion.
    Verify {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u8>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Uniform,
    Random,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Grid {
    start: f64,
    end: f64,
    count: usize,
}

impl Grid {
    fn points(&self, log: bool) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let steps = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let frac = i as f64 / steps;
                if i + 1 == self.count {
                    self.end
                } else if log {
                    self.start * (self.end / self.start).powf(frac)
                } else {
                    self.start + (self.end - self.start) * frac
                }
            })
            .collect()
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected start:end:count, got {s:?}"));
    };
    let start: f64 = a.parse().map_err(|e| format!("start: {e}"))?;
    let end: f64 = b.parse().map_err(|e| format!("end: {e}"))?;
    let count: usize = c.parse().map_err(|e| format!("count: {e}"))?;
    if !(start > 0.0 && end > start) || count == 0 {
        return Err("grid needs 0 < start < end and count >= 1".into());
    }
    Ok(Grid { start, end, count })
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not positive")),
        Err(e) => Err(e.to_string()),
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is negative")),
        Err(e) => Err(e.to_string()),
    }
}

fn read_space(path: &PathBuf) -> anyhow::Result<magnitude::FiniteMetricSpace> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let input = SpaceInput::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(input.into_space()?)
}

fn finite(common: &Common, file: &PathBuf) -> anyhow::Result<Vec<Table>> {
    let space = read_space(file)?;
    let result = solver::magnitude(&space)?;
    let d = result.diagnostics;
    let mut summary = Table::new(
        "summary",
        &["points", "magnitude", "method", "positive_definite", "rcond_estimate", "separated"],
    );
    let method = serde_json::to_value(d.method)?.as_str().unwrap_or_default().to_owned();
    summary.push(vec![
        space.len().into(),
        result.value.into(),
        method.into(),
        d.positive_definite.into(),
        d.rcond_estimate.into(),
        solver::is_sufficiently_separated(&space).into(),
    ]);
    let mut weights = Table::new("weights", &["label", "weight"]);
    for (label, w) in space.labels().iter().zip(&result.weighting.weights) {
        weights.push(vec![label.as_str().into(), (*w).into()]);
    }
    let _ = common;
    Ok(vec![summary, weights])
}

fn sweep(file: &PathBuf, grid: Grid, linear: bool) -> anyhow::Result<Vec<Table>> {
    let space = read_space(file)?;
    let n = space.len() as f64;
    let mut table = Table::new("sweep", &["t", "value", "reference", "error"]);
    for s in solver::magnitude_function(&space, &grid.points(!linear))? {
        table.push(vec![s.t.into(), s.value.into(), n.into(), s.value.map(|v| (v - n).abs()).into()]);
    }
    Ok(vec![table])
}

fn segment(length: f64, n_list: &[usize], scheme: SchemeArg, seed: u64) -> anyhow::Result<Vec<Table>> {
    let limit = linear::segment_magnitude(length)?;
    let mut closed = Table::new("segment", &["length", "value"]);
    closed.push(vec![length.into(), limit.into()]);
    let mut tables = vec![closed];
    if !n_list.is_empty() {
        let scheme = match scheme {
            SchemeArg::Uniform => Scheme::Uniform,
            SchemeArg::Random => Scheme::Random { seed },
            SchemeArg::Geometric => Scheme::Geometric,
        };
        let approx = SegmentApproximation::new(length, scheme)?;
        let mut table = Table::new("convergence", &["n", "value", "reference", "error", "max_gap", "bound"]);
        for row in linear::segment_convergence(&approx, n_list)? {
            let bound = row.max_gap * length / 4.0;
            table.push(vec![
                row.n.into(),
                row.magnitude.into(),
                limit.into(),
                row.error.into(),
                row.max_gap.into(),
                bound.into(),
            ]);
        }
        tables.push(table);
    }
    Ok(tables)
}

fn cantor_cmd(common: &Common, lengths: Vec<f64>, k: u32, fourier: Option<(usize, usize)>) -> anyhow::Result<Vec<Table>> {
    let mut table = Table::new("cantor", &["length", "k", "approx", "magnitude", "p", "q2", "f"]);
    for length in lengths {
        let p = CantorParams::new(length, common.eps)?;
        table.push(vec![
            length.into(),
            k.into(),
            cantor::cantor_approx_magnitude(length, k)?.into(),
            cantor::cantor_magnitude(&p)?.into(),
            cantor::cantor_p(&p)?.into(),
            cantor::cantor_q2(&p)?.into(),
            cantor::cantor_f(length, common.eps)?.into(),
        ]);
    }
    let mut tables = vec![table];
    if let Some((samples, harmonics)) = fourier {
        let report = cantor::cantor_fourier(samples, harmonics, common.eps)?;
        let mut t = Table::new("fourier", &["frequency", "amplitude", "phase"]);
        t.push(vec![0usize.into(), report.mean.into(), Cell::Missing]);
        for h in &report.harmonics {
            t.push(vec![h.frequency.into(), h.amplitude.into(), h.phase.into()]);
        }
        tables.push(t);
    }
    Ok(tables)
}

fn circle_cmd(common: &Common, lengths: Vec<f64>, kappa: f64, n_list: &[usize]) -> anyhow::Result<Vec<Table>> {
    let q = Quadrature::new(common.tol, Quadrature::default().max_refinements)?;
    let mut table = Table::new(
        "circle",
        &["length", "kappa", "value", "half_length", "asymptote", "closed_form"],
    );
    for &length in &lengths {
        let params = CircleParams::new(length, kappa)?;
        let closed = if kappa == 1.0 {
            Some(circle::intrinsic_circle_magnitude(length)?)
        } else {
            None
        };
        table.push(vec![
            length.into(),
            kappa.into(),
            circle::circle_magnitude(&params, q)?.into(),
            (0.5 * length).into(),
            circle::circle_asymptotic(&params).into(),
            closed.into(),
        ]);
    }
    let mut tables = vec![table];
    if !n_list.is_empty() {
        if lengths.len() != 1 {
            bail!("--n-list needs a single --length");
        }
        let report = circle::circle_convergence(&CircleParams::new(lengths[0], kappa)?, n_list, q)?;
        let mut t = Table::new("convergence", &["n", "value", "reference", "error"]);
        for e in report.entries {
            t.push(vec![e.n.into(), e.value.into(), report.limit.into(), e.error.into()]);
        }
        tables.push(t);
    }
    Ok(tables)
}

fn verify_cmd(common: &Common, criterion: Option<u8>) -> anyhow::Result<(String, bool)> {
    let reports = match criterion {
        Some(id) => vec![verify::run_one(id).with_context(|| format!("no criterion {id}"))?],
        None => verify::run_all(),
    };
    let all_passed = reports.iter().all(|r| r.passed);
    let text = match common.format {
        Format::Csv => {
            let mut s: String = reports.iter().map(|r| format!("{r}\n")).collect();
            let passed = reports.iter().filter(|r| r.passed).count();
            s.push_str(&format!("{passed}/{} criteria passed\n", reports.len()));
            s
        }
        Format::Json => {
            let mut t = Table::new("criteria", &["id", "title", "passed", "detail"]);
            for r in &reports {
                t.push(vec![
                    Cell::Int(r.id.into()),
                    r.title.into(),
                    r.passed.into(),
                    r.detail.clone().into(),
                ]);
            }
            render(&[t], Format::Json)
        }
    };
    Ok((text, all_passed))
}

fn emit(common: &Common, text: &str) -> anyhow::Result<()> {
    match &common.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let common = &cli.common;
    let tables = match cli.command {
        Command::Finite { file } => finite(common, &file)?,
        Command::Sweep { file, grid, linear, .. } => sweep(&file, grid, linear)?,
        Command::Segment { length, n_list, scheme, seed } => segment(length, &n_list, scheme, seed)?,
        Command::Cantor { length, lengths, k, fourier, samples, harmonics } => {
            let lengths = lengths.map_or_else(|| length.into_iter().collect(), |g| g.points(true));
            cantor_cmd(common, lengths, k, fourier.then_some((samples, harmonics)))?
        }
        Command::Circle { length, lengths, kappa, n_list } => {
            let lengths = lengths.map_or_else(|| length.into_iter().collect(), |g| g.points(true));
            circle_cmd(common, lengths, kappa, &n_list)?
        }
        Command::Verify { criterion } => {
            let (text, passed) = verify_cmd(common, criterion)?;
            emit(common, &text)?;
            return Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    };
    emit(common, &render(&tables, common.format))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            if let Some(Error::InvalidMetric(report)) = err.downcast_ref::<Error>() {
                if let Ok(json) = serde_json::to_string_pretty(report) {
                    println!("{json}");
                }
            }
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("1:100:3").unwrap();
        let log = g.points(true);
        assert_eq!(log[0], 1.0);
        assert!((log[1] - 10.0).abs() < 1e-12);
        assert_eq!(log[2], 100.0);
        assert_eq!(g.points(false), vec![1.0, 50.5, 100.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("0:2:3").is_err());
        assert!(parse_grid("2:1:3").is_err());
        assert!(parse_grid("1:2:0").is_err());
    }
}
