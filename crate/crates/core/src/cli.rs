//! Command-line front end. Reports go to stdout as JSON (CSV for the
//! sequence table); verdict lines and warnings go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{carpet_sequence_table, compute_bounds, write_sequence_csv};
use crate::distance::coverage::{certify_coverage, pinned_intersection_over_neighborhood, CoverageCertificate};
use crate::distance::sets::{pinned_distance_set, DistanceSampleSet};
use crate::distance::tree::{tree_distance_set, DistinctMode, TreeGraph};
use crate::error::{Error, Result};
use crate::fractal::{build_approx, enumerate_gaps, FractalSpec, SampleLimit};
use crate::gap_lemma::{check_gap_lemma, PRODUCT_TOL};
use crate::geometry::Point;
use crate::thickness::{epsilon_thickness, thickness, thickness_lambda_form, thickness_of};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS_NOT_MET: i32 = 2;
pub const EXIT_FALSIFICATION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(name = "thickset", version, about = "Thickness, gap lemma and pinned distance sets of fractal products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Form {
    Ordered,
    LargerOrEqual,
}

#[derive(clap::Args, Debug)]
struct PairArgs {
    #[arg(long)]
    spec1: PathBuf,
    #[arg(long)]
    spec2: PathBuf,
    /// Overrides the depth of both specs.
    #[arg(long)]
    depth: Option<u32>,
}

#[derive(clap::Args, Debug)]
struct CoverageArgs {
    /// Defaults to twice the diameter of a product cell.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    min_extent: f64,
}

#[derive(clap::Args, Debug)]
struct CapArgs {
    #[arg(long, default_value_t = 50_000_000)]
    cap: usize,
    /// Subsample deterministically instead of failing when over the cap.
    #[arg(long)]
    subsample: bool,
}

impl CapArgs {
    fn limit(&self) -> SampleLimit {
        SampleLimit {
            cap: self.cap,
            subsample: self.subsample,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Depth-k cells, exact points and hull of a set.
    Carpet {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Thickness of the depth-k gap catalog.
    Thickness {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, value_enum, default_value = "ordered")]
        form: Form,
    },
    /// Epsilon-thickness of the depth-k gap catalog.
    EpsThickness {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        epsilon: f64,
    },
    /// Gap-lemma hypotheses and intersection witnesses per depth.
    GapLemma {
        #[arg(long)]
        spec1: PathBuf,
        #[arg(long)]
        spec2: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        depths: Vec<u32>,
    },
    /// Pinned distance set of the product and its coverage certificate.
    PinnedDistance {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        pin: Point,
        #[command(flatten)]
        coverage: CoverageArgs,
        #[command(flatten)]
        cap: CapArgs,
        /// Omit the sample values from the report.
        #[arg(long)]
        summary_only: bool,
        /// Exit 3 when the hypothesis holds but coverage is not certified.
        #[arg(long)]
        falsify_hard: bool,
    },
    /// Pinned tree distance set and its box coverage certificate.
    TreeDistance {
        #[command(flatten)]
        pair: PairArgs,
        /// JSON edge list: {"vertices": 3, "edges": [[1,2],[2,3]], "pin": 1}.
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        pin: Point,
        #[command(flatten)]
        coverage: CoverageArgs,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        /// Only adjacent vertices need distinct points.
        #[arg(long)]
        adjacent_only: bool,
        #[arg(long)]
        summary_only: bool,
    },
    /// Covered interval common to several pins near a pin.
    Neighborhood {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        pin: Point,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[command(flatten)]
        coverage: CoverageArgs,
        #[command(flatten)]
        cap: CapArgs,
    },
    /// Closed-form dimension bounds.
    Bounds {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Dimensions of carpet products along a sequence of sizes, as CSV.
    SequenceTable {
        #[arg(long)]
        d: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
    },
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad coordinate {t:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Point)
}

fn load_spec(path: &Path, depth: Option<u32>) -> Result<FractalSpec> {
    let spec = FractalSpec::from_json(&std::fs::read_to_string(path)?)?;
    Ok(match depth {
        Some(k) => spec.with_depth(k),
        None => spec,
    })
}

#[derive(Serialize)]
struct WithHash<'a, T: Serialize> {
    spec_hash: String,
    #[serde(flatten)]
    report: &'a T,
}

#[derive(Serialize)]
struct PinnedReport {
    #[serde(with = "crate::serde_ext::extended_f64")]
    tau1: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    tau2: f64,
    hypothesis_met: bool,
    spec1_hash: String,
    spec2_hash: String,
    certificate: CoverageCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<DistanceSampleSet>,
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Twice the diameter of one product cell.
fn default_resolution(spec1: &FractalSpec, spec2: &FractalSpec) -> Result<f64> {
    let a = build_approx(spec1)?.cell_diameter;
    let b = build_approx(spec2)?.cell_diameter;
    Ok(2.0 * a.hypot(b))
}

fn thick_pair(spec1: &FractalSpec, spec2: &FractalSpec) -> Result<(f64, f64, bool)> {
    let (t1, t2) = (thickness_of(spec1)?, thickness_of(spec2)?);
    Ok((t1, t2, t1 * t2 > 1.0 + PRODUCT_TOL))
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Carpet { spec, depth } => {
            let spec = load_spec(&spec, depth)?;
            emit(out, &WithHash { spec_hash: spec.hash_hex(), report: &build_approx(&spec)? })?;
        }
        Command::Thickness { spec, depth, form } => {
            let spec = load_spec(&spec, depth)?;
            let catalog = enumerate_gaps(&spec)?;
            let report = match form {
                Form::Ordered => thickness(&catalog)?,
                Form::LargerOrEqual => thickness_lambda_form(&catalog)?,
            };
            emit(out, &WithHash { spec_hash: spec.hash_hex(), report: &report })?;
        }
        Command::EpsThickness { spec, depth, epsilon } => {
            let spec = load_spec(&spec, depth)?;
            let report = epsilon_thickness(&enumerate_gaps(&spec)?, epsilon)?;
            emit(out, &WithHash { spec_hash: spec.hash_hex(), report: &report })?;
        }
        Command::GapLemma { spec1, spec2, depths } => {
            let verdict = check_gap_lemma(&load_spec(&spec1, None)?, &load_spec(&spec2, None)?, &depths)?;
            emit(out, &verdict)?;
            writeln!(err, "{}", verdict.summary())?;
            if !verdict.hypothesis_met {
                return Ok(EXIT_HYPOTHESIS_NOT_MET);
            }
            if verdict.falsification {
                return Ok(EXIT_FALSIFICATION);
            }
        }
        Command::PinnedDistance { pair, pin, coverage, cap, summary_only, falsify_hard } => {
            let s1 = load_spec(&pair.spec1, pair.depth)?;
            let s2 = load_spec(&pair.spec2, pair.depth)?;
            let (tau1, tau2, hypothesis_met) = thick_pair(&s1, &s2)?;
            let resolution = match coverage.resolution {
                Some(r) => r,
                None => default_resolution(&s1, &s2)?,
            };
            let samples = pinned_distance_set(&s1, &s2, &pin, cap.limit())?;
            if !samples.source.pin_exact {
                writeln!(err, "warning: pin is not an exact point of the product model")?;
            }
            let certificate = certify_coverage(&samples, resolution, coverage.min_extent)?;
            let covered = certificate.covered;
            emit(
                out,
                &PinnedReport {
                    tau1,
                    tau2,
                    hypothesis_met,
                    spec1_hash: s1.hash_hex(),
                    spec2_hash: s2.hash_hex(),
                    certificate,
                    samples: (!summary_only).then_some(samples),
                },
            )?;
            return certification_exit(hypothesis_met, covered, falsify_hard, err);
        }
        Command::TreeDistance { pair, tree, pin, coverage, cap, adjacent_only, summary_only } => {
            let s1 = load_spec(&pair.spec1, pair.depth)?;
            let s2 = load_spec(&pair.spec2, pair.depth)?;
            let tree: TreeGraph = serde_json::from_str(&std::fs::read_to_string(&tree)?)?;
            let (tau1, tau2, hypothesis_met) = thick_pair(&s1, &s2)?;
            let resolution = match coverage.resolution {
                Some(r) => r,
                None => default_resolution(&s1, &s2)?,
            };
            let mode = if adjacent_only { DistinctMode::Adjacent } else { DistinctMode::AllPairs };
            let limit = SampleLimit { cap, subsample: true };
            let samples = tree_distance_set(&s1, &s2, &tree, &pin, limit, mode)?;
            let certificate = certify_coverage(&samples, resolution, coverage.min_extent)?;
            let covered = certificate.covered;
            emit(
                out,
                &PinnedReport {
                    tau1,
                    tau2,
                    hypothesis_met,
                    spec1_hash: s1.hash_hex(),
                    spec2_hash: s2.hash_hex(),
                    certificate,
                    samples: (!summary_only).then_some(samples),
                },
            )?;
            return certification_exit(hypothesis_met, covered, false, err);
        }
        Command::Neighborhood { pair, pin, radius, count, coverage, cap } => {
            let s1 = load_spec(&pair.spec1, pair.depth)?;
            let s2 = load_spec(&pair.spec2, pair.depth)?;
            let (tau1, tau2, hypothesis_met) = thick_pair(&s1, &s2)?;
            let resolution = match coverage.resolution {
                Some(r) => r,
                None => default_resolution(&s1, &s2)?,
            };
            let certificate = pinned_intersection_over_neighborhood(
                &s1,
                &s2,
                &pin,
                radius,
                count,
                resolution,
                coverage.min_extent,
                cap.limit(),
            )?;
            let covered = certificate.covered;
            emit(
                out,
                &PinnedReport {
                    tau1,
                    tau2,
                    hypothesis_met,
                    spec1_hash: s1.hash_hex(),
                    spec2_hash: s2.hash_hex(),
                    certificate,
                    samples: None,
                },
            )?;
            return certification_exit(hypothesis_met, covered, false, err);
        }
        Command::Bounds { d, tau, beta } => emit(out, &compute_bounds(d, tau, beta)?)?,
        Command::SequenceTable { d, n } => {
            let rows = carpet_sequence_table(d, &n)?;
            for r in rows.iter().filter(|r| !r.feasible) {
                writeln!(err, "warning: n = {} gives m_n = {} < 5, infeasible for the second family", r.n, r.m_n)?;
            }
            write_sequence_csv(&rows, &mut *out)?;
        }
    }
    Ok(EXIT_OK)
}

fn certification_exit(hypothesis_met: bool, covered: bool, hard: bool, err: &mut dyn Write) -> Result<i32> {
    if !hypothesis_met {
        writeln!(err, "condition not satisfied")?;
        return Ok(EXIT_HYPOTHESIS_NOT_MET);
    }
    if !covered {
        writeln!(err, "coverage not certified at this resolution")?;
        if hard {
            return Ok(EXIT_FALSIFICATION);
        }
    }
    Ok(EXIT_OK)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NoSignChange { .. } => EXIT_SOFTWARE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("thickset").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&[]).0, EXIT_USAGE);
        assert_eq!(run_str(&["bounds"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
        assert_eq!(run_str(&["bounds", "--d", "0"]).0, EXIT_USAGE);
        let (code, _, err) = run_str(&["thickness", "--spec", "/nonexistent/spec.json"]);
        assert_eq!(code, EXIT_IO);
        assert!(err.contains("error"));
    }

    #[test]
    fn pin_parsing() {
        assert_eq!(parse_point("0, 0.5,-1").unwrap(), Point(vec![0.0, 0.5, -1.0]));
        assert!(parse_point("0,x").is_err());
    }
}
