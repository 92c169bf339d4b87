//! Command-line front end: reads instance documents, runs the library
//! operations and prints exact results. Scenario indices are printed 1-based.
//!
//! Exit codes: 0 success, 1 unreadable or unparsable input, 2 invalid input,
//! 3 insufficient instance (or a witness requested for a sufficient one),
//! 4 failed verification or broken internal invariant.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mixhull::hull::{self, HullDiagnosis};
use mixhull::mixing::{quantile_lower_bounds, reduce_lower_bounds};
use mixhull::rational::Rational;
use mixhull::twosided::{generalized_cut, hull_with_bounds, to_mixing, TwoSidedData};
use mixhull::{Error, MixingInstance, Point, SeparatorRegistry, SequenceTheta, VerifierRegistry};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "mixhull", version, about = "Mixing and aggregated mixing inequalities in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report I_bar, C1/C2, L_W(eps), submodularity of g and the sufficiency verdict.
    Diagnose { instance: PathBuf },
    /// Print the violated cuts at a point, most violated first.
    Separate {
        instance: PathBuf,
        point: PathBuf,
        /// Cut families to separate, by registered name.
        #[arg(long, value_delimiter = ',', default_value = "mix,amix")]
        families: Vec<String>,
    },
    /// Run a named check and print its JSON report.
    Verify {
        instance: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Quantile lower bounds from scenario probabilities.
    Quantile {
        instance: PathBuf,
        /// Risk level in (0, 1), e.g. 1/5.
        #[arg(long)]
        risk: String,
        /// Where to write the instance reduced by the bounds.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Diagnose two-sided data and print both forms of one aggregated inequality.
    Twosided {
        data: PathBuf,
        /// 1-based sequence, e.g. 3,2,1.
        #[arg(long)]
        theta: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sufficiency,
    Witness,
    Validity,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Sufficiency => "sufficiency",
            Mode::Witness => "witness",
            Mode::Validity => "validity",
        }
    }
}

/// A finished command: text to print and the exit code.
struct Outcome {
    text: String,
    code: u8,
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Parse(_) => 1,
        Error::Precondition(_) => 3,
        Error::Internal(_) => 4,
        _ => 2,
    }
}

fn one_based_set(indices: &[usize]) -> String {
    let items: Vec<String> = indices.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn yes_no(flag: bool) -> &'static str {
    if flag {
        "yes"
    } else {
        "no"
    }
}

/// Index-valued report fields, shifted to 1-based before printing.
const INDEX_FIELDS: [&str; 7] = ["i_bar", "c1_violation", "l_w_rows", "p", "q", "subset", "permutation"];

fn shift_indices(value: &mut Value) {
    fn bump(value: &mut Value) {
        match value {
            Value::Number(n) => {
                if let Some(i) = n.as_u64() {
                    *value = Value::from(i + 1);
                }
            }
            Value::Array(items) => items.iter_mut().for_each(bump),
            _ => {}
        }
    }
    match value {
        Value::Object(map) => {
            for (key, field) in map.iter_mut() {
                if INDEX_FIELDS.contains(&key.as_str()) {
                    bump(field);
                } else {
                    shift_indices(field);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(shift_indices),
        _ => {}
    }
}

/// The instance with lower bounds moved into `y`, as the diagnosis expects.
fn zero_lower(inst: MixingInstance) -> MixingInstance {
    if inst.has_zero_lower() {
        inst
    } else {
        reduce_lower_bounds(&inst).0
    }
}

fn diagnosis_lines(d: &HullDiagnosis) -> Vec<String> {
    let c1 = match d.c1_violation {
        Some((p, q)) => format!("C1: violated (row {} does not dominate row {})", p + 1, q + 1),
        None => "C1: holds".into(),
    };
    let sufficient = if d.sufficient {
        "sufficient: yes".to_string()
    } else {
        format!("sufficient: no ({})", d.failure_reasons().join("; "))
    };
    vec![
        format!("I_bar={}", one_based_set(&d.i_bar)),
        c1,
        format!("C2: {}", if d.c2_holds { "holds" } else { "violated" }),
        format!("negligible: {}", yes_no(d.negligible)),
        format!("L_W(eps)={}", d.l_w),
        format!("g submodular: {}", yes_no(d.g_submodular)),
        sufficient,
    ]
}

fn diagnose(path: &Path) -> Result<Outcome, Error> {
    let inst = zero_lower(MixingInstance::load(path)?);
    let d = hull::diagnose(&inst)?;
    Ok(Outcome { text: diagnosis_lines(&d).join("\n"), code: if d.sufficient { 0 } else { 3 } })
}

fn load_point(path: &Path) -> Result<Point, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read point {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Validation(format!("malformed point: {e}")))
}

fn separate(instance: &Path, point: &Path, families: &[String]) -> Result<Outcome, Error> {
    let inst = MixingInstance::load(instance)?;
    let point = load_point(point)?;
    point.check_dimensions(inst.k(), inst.n())?;
    point.check_unit_box()?;
    let names: Vec<&str> = families.iter().map(String::as_str).collect();
    let cuts = SeparatorRegistry::default().separate(&names, &inst, &point)?;
    let lines: Vec<String> = cuts.iter().map(|c| c.to_line()).collect();
    Ok(Outcome { text: lines.join("\n"), code: 0 })
}

fn verify(instance: &Path, mode: Mode) -> Result<Outcome, Error> {
    let inst = MixingInstance::load(instance)?;
    let report = VerifierRegistry::default().run(mode.name(), &inst)?;
    let mut value = serde_json::to_value(&report).map_err(|e| Error::Internal(e.to_string()))?;
    shift_indices(&mut value);
    let text = serde_json::to_string_pretty(&value).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(Outcome { text, code: if report.passed { 0 } else { 4 } })
}

fn quantile(instance: &Path, risk: &str, output: Option<&Path>) -> Result<Outcome, Error> {
    let inst = MixingInstance::load(instance)?;
    let risk: Rational =
        risk.parse().map_err(|_| Error::Validation(format!("risk {risk:?} is not a rational number")))?;
    let bounds = quantile_lower_bounds(&inst, &risk)?;
    let strings: Vec<String> = bounds.iter().map(ToString::to_string).collect();
    let mut text = format!("l=({})", strings.join(","));
    if let Some(path) = output {
        let with_bounds = MixingInstance::new(
            inst.weights().to_vec(),
            bounds,
            inst.epsilon().clone(),
            inst.probabilities().map(<[Rational]>::to_vec),
        )?;
        let (reduced, _) = reduce_lower_bounds(&with_bounds);
        std::fs::write(path, reduced.to_json() + "\n")
            .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display())))?;
        text.push_str(&format!("\nreduced instance written to {}", path.display()));
    }
    Ok(Outcome { text, code: 0 })
}

fn twosided(path: &Path, theta: &str) -> Result<Outcome, Error> {
    let data = TwoSidedData::load(path)?;
    let theta = SequenceTheta::parse_one_based(theta, data.n())?;
    let d = hull::diagnose(&to_mixing(&data)?)?;
    let band = hull_with_bounds(&data)?;
    let cut = generalized_cut(&data, &theta)?;
    let mut lines = diagnosis_lines(&d);
    lines.push(format!("band holds at vertices: {}", yes_no(band.band_holds_at_vertices)));
    lines.push(format!("theta={theta}"));
    lines.push(format!("primed (y1 y2): {}", cut.primed.to_line()));
    lines.push(format!("original (y_c y_a): {}", cut.original.to_line()));
    Ok(Outcome { text: lines.join("\n"), code: if band.passed() { 0 } else { 4 } })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Diagnose { instance } => diagnose(instance),
        Command::Separate { instance, point, families } => separate(instance, point, families),
        Command::Verify { instance, mode } => verify(instance, *mode),
        Command::Quantile { instance, risk, output } => quantile(instance, risk, output.as_deref()),
        Command::Twosided { data, theta } => twosided(data, theta),
    };
    match result {
        Ok(outcome) => {
            if !outcome.text.is_empty() {
                // A closed pipe (e.g. `| head`) is not an error worth reporting.
                let _ = writeln!(std::io::stdout().lock(), "{}", outcome.text);
            }
            ExitCode::from(outcome.code)
        }
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}
