//! Config loading, report envelopes and the exit-code contract.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use stretchlab::tol::ToleranceSet;
use stretchlab::Error;

/// 2: bad configuration, 3: numeric failure, 4: a check exceeded its threshold.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Threshold(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Threshold(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
            Failure::Threshold(m) => write!(f, "threshold exceeded: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Json(_) | Error::ParseWord(_) | Error::UnsupportedCurve(_) | Error::Multicurve(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// Parsed config and the SHA-256 of its canonical JSON (sorted keys, compact).
pub struct Loaded<C> {
    pub config: C,
    pub hash: String,
}

pub fn load<C: DeserializeOwned>(path: &Path) -> CliResult<Loaded<C>> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let canonical = serde_json::to_string(&value).expect("re-serializing parsed JSON");
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    let config = serde_json::from_value(value).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(Loaded { config, hash })
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config_hash: &'a str,
    pub tolerances: ToleranceSet,
    pub pass: bool,
    pub result: T,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Numeric(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::Numeric(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(out: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(|e| Failure::Config(format!("{}: {e}", out.display())))
}

/// Writes `<out>/<command>.json`, echoes it on stdout and maps `pass` to the exit code.
pub fn emit<T: Serialize>(out: &Path, command: &str, hash: &str, pass: bool, result: T, breach: impl FnOnce() -> String) -> CliResult<()> {
    let env = Envelope {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: hash,
        tolerances: ToleranceSet::default(),
        pass,
        result,
    };
    write_json(&out.join(format!("{command}.json")), &env)?;
    println!("{}", serde_json::to_string(&env).map_err(|e| Failure::Numeric(e.to_string()))?);
    if pass {
        Ok(())
    } else {
        Err(Failure::Threshold(breach()))
    }
}
