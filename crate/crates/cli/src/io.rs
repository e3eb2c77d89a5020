//! File formats: plant / nonlinearity / input JSON schemas, JSON output
//! helpers with infinity-safe floats, CSV writers, and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Map, Value};

use phaselim::lti::TransferFunction;
use phaselim::lure::{PiecewiseLinearNonlinearity, Signal};
use phaselim::{Error, Result};

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

// ---------------------------------------------------------------------------
// Input schemas.
// ---------------------------------------------------------------------------

/// Plant file: `{"domain": "continuous"|"discrete", "num": [...], "den": [...]}`
/// with coefficients in descending powers.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantSpec {
    domain: String,
    num: Vec<f64>,
    den: Vec<f64>,
}

pub fn read_plant(path: &Path) -> Result<TransferFunction> {
    let spec: PlantSpec = read_json(path)?;
    match spec.domain.as_str() {
        "continuous" => TransferFunction::continuous(spec.num, spec.den),
        "discrete" => TransferFunction::discrete(spec.num, spec.den),
        other => Err(invalid(format!(
            "plant domain must be \"continuous\" or \"discrete\", got \"{other}\""
        ))),
    }
}

/// Nonlinearity file, tagged by `kind`.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum NonlinearitySpec {
    Saturation {
        slope: f64,
        limit: f64,
    },
    AsymmetricSaturation {
        slope: f64,
        lower: f64,
        upper: f64,
    },
    DeadzoneSaturation {
        slope: f64,
        deadzone: f64,
        limit: f64,
    },
    Breakpoints {
        xs: Vec<f64>,
        ys: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    },
}

pub fn read_nonlinearity(path: &Path) -> Result<PiecewiseLinearNonlinearity> {
    let spec: NonlinearitySpec = read_json(path)?;
    match spec {
        NonlinearitySpec::Saturation { slope, limit } => {
            PiecewiseLinearNonlinearity::saturation(slope, limit)
        }
        NonlinearitySpec::AsymmetricSaturation {
            slope,
            lower,
            upper,
        } => PiecewiseLinearNonlinearity::asymmetric_saturation(slope, lower, upper),
        NonlinearitySpec::DeadzoneSaturation {
            slope,
            deadzone,
            limit,
        } => PiecewiseLinearNonlinearity::deadzone_saturation(slope, deadzone, limit),
        NonlinearitySpec::Breakpoints {
            xs,
            ys,
            left_slope,
            right_slope,
        } => PiecewiseLinearNonlinearity::from_breakpoints(xs, ys, left_slope, right_slope),
    }
}

/// Signal generator, tagged by `kind`.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum SignalSpec {
    Zero,
    Constant { value: f64 },
    Pulse { amplitude: f64, until: f64 },
    Impulse { amplitude: f64 },
    Samples { values: Vec<f64> },
}

impl From<SignalSpec> for Signal {
    fn from(spec: SignalSpec) -> Signal {
        match spec {
            SignalSpec::Zero => Signal::Zero,
            SignalSpec::Constant { value } => Signal::Constant { value },
            SignalSpec::Pulse { amplitude, until } => Signal::Pulse { amplitude, until },
            SignalSpec::Impulse { amplitude } => Signal::Impulse { amplitude },
            SignalSpec::Samples { values } => Signal::Samples { values },
        }
    }
}

/// Input file: `{"f": signal?, "g": signal?, "x0": [...]?}`; absent signals
/// default to zero.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputSpec {
    f: Option<SignalSpec>,
    g: Option<SignalSpec>,
    x0: Option<Vec<f64>>,
}

pub struct LoopInputs {
    pub f: Signal,
    pub g: Signal,
    pub x0: Option<Vec<f64>>,
}

pub fn read_inputs(path: &Path) -> Result<LoopInputs> {
    let spec: InputSpec = read_json(path)?;
    Ok(LoopInputs {
        f: spec.f.map_or(Signal::Zero, Signal::from),
        g: spec.g.map_or(Signal::Zero, Signal::from),
        x0: spec.x0,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| invalid(format!("cannot parse {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Output helpers.
// ---------------------------------------------------------------------------

/// JSON value for a float; infinities and NaN become the strings
/// "inf" / "-inf" / "nan" since JSON numbers cannot carry them.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Pretty JSON with a trailing newline; key order is the serializer's
/// (sorted), so identical values give identical bytes.
pub fn render_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json rendering cannot fail");
    s.push('\n');
    s
}

pub fn csv_from_rows(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(32 * rows.len());
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for x in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("{x}"));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Run manifest and output placement.
// ---------------------------------------------------------------------------

/// Reproducibility record serialized next to every file output.
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<PathBuf>,
    pub parameters: BTreeMap<String, String>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            inputs: Vec::new(),
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn param_opt(self, key: &str, value: Option<impl ToString>) -> Self {
        match value {
            Some(v) => self.param(key, v),
            None => self,
        }
    }

    fn to_value(&self) -> Value {
        let params: Map<String, Value> = self
            .parameters
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        json!({
            "subcommand": self.subcommand,
            "inputs": self.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "parameters": params,
            "outputs": self.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "tool_version": env!("CARGO_PKG_VERSION"),
        })
    }
}

/// Prints to stdout, treating a closed pipe (e.g. `| head`) as a normal
/// early exit rather than an error.
fn print_stdout(content: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().write_all(content.as_bytes()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(invalid(format!("cannot write to stdout: {e}"))),
    }
}

/// Writes `content` to `out` (or stdout when absent). When a file is
/// written, the manifest lands next to the first output as
/// `<first-out>.manifest.json`.
pub fn deliver(out: Option<&Path>, content: &str, mut manifest: RunManifest) -> Result<()> {
    match out {
        None => print_stdout(content),
        Some(path) => {
            write_file(path, content)?;
            manifest.outputs.push(path.to_path_buf());
            let manifest_path = manifest_path_for(path);
            write_file(&manifest_path, &render_json(&manifest.to_value()))
        }
    }
}

/// Two-artifact variant: a primary file output plus a JSON summary printed
/// to stdout. Used by `simulate` (CSV series + flags).
pub fn deliver_with_summary(
    out: Option<&Path>,
    content: &str,
    summary: &Value,
    mut manifest: RunManifest,
) -> Result<()> {
    print_stdout(&render_json(summary))?;
    if let Some(path) = out {
        write_file(path, content)?;
        manifest.outputs.push(path.to_path_buf());
        let manifest_path = manifest_path_for(path);
        write_file(&manifest_path, &render_json(&manifest.to_value()))?;
    }
    Ok(())
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content)
        .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}
