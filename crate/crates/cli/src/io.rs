//! Input loading and report emission.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use bpnorm_core::json::{self, OperatorOrMap, SCHEMA};
use bpnorm_core::maps::{self, LinearMapRepr};
use bpnorm_core::positivity::Tolerances;
use bpnorm_core::{BipartiteOperator, Error};
use serde::Serialize;
use serde_json::Value;

/// Failure of a run. `Usage` maps to exit code 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read_source(source: &str) -> CliResult<String> {
    if source == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| CliError::Usage(format!("cannot read stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(source).map_err(|e| CliError::Usage(format!("cannot read {source}: {e}")))
    }
}

/// Strips a report envelope and picks the `operator`, `density` or `map`
/// field, so the output of one subcommand can feed another.
fn payload(value: Value) -> Value {
    let inner = match value.get("schema") {
        Some(_) => value.get("result").cloned().unwrap_or(Value::Null),
        None => value,
    };
    for key in ["operator", "density", "map"] {
        if let Some(x) = inner.get(key) {
            return x.clone();
        }
    }
    inner
}

pub fn load(source: &str, expected_n: Option<usize>) -> CliResult<OperatorOrMap> {
    let text = read_source(source)?;
    let value: Value = serde_json::from_str(&text).map_err(Error::from)?;
    let parsed = json::parse_operator_or_map(&payload(value).to_string())?;
    let n = match &parsed {
        OperatorOrMap::Operator(o) => o.n(),
        OperatorOrMap::Map(m) => m.n(),
    };
    if let Some(expected) = expected_n {
        if expected != n {
            return Err(Error::DimensionMismatch { expected, found: n }.into());
        }
    }
    Ok(parsed)
}

/// Any input as an operator; maps are replaced by their densities.
pub fn load_operator(source: &str, expected_n: Option<usize>) -> CliResult<BipartiteOperator> {
    Ok(match load(source, expected_n)? {
        OperatorOrMap::Operator(o) => o,
        OperatorOrMap::Map(m) => maps::density_from_map(&m),
    })
}

pub fn load_map(source: &str, expected_n: Option<usize>) -> CliResult<LinearMapRepr> {
    match load(source, expected_n)? {
        OperatorOrMap::Map(m) => Ok(m),
        OperatorOrMap::Operator(_) => Err(CliError::Usage(format!("{source}: expected a map (with \"images\"), found an operator"))),
    }
}

pub fn load_density(source: &str, expected_n: Option<usize>) -> CliResult<BipartiteOperator> {
    match load(source, expected_n)? {
        OperatorOrMap::Operator(o) => Ok(o),
        OperatorOrMap::Map(_) => Err(CliError::Usage(format!("{source}: expected an operator, found a map"))),
    }
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, seed: u64, tolerances: Tolerances, status: &'a str, result: T) -> Self {
        Self { schema: SCHEMA, command, seed, tolerances, status, note: None, result }
    }

    pub fn with_note(mut self, note: &'static str) -> Self {
        self.note = Some(note);
        self
    }

    pub fn render(&self) -> CliResult<String> {
        Ok(json::to_json_string(self)? + "\n")
    }
}

pub fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))
        }
    }
}
