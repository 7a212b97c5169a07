//! Flags, the JSON config file, and their merge into one job.

use clap::{Args, Parser, Subcommand};
use hkl::ff::FfElem;
use hkl::padic::build_field;
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "hkl", version, about = "Hyperkloosterman sums, their L-functions via the p-adic Frobenius, and deformation checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Count vector of the sum and its power sums S_1..S_k.
    Sum {
        /// Number of power sums; defaults to n + 1.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Oracle L-polynomial against det(I - T alpha_0).
    Lfunction,
    /// Every check at the given parameters.
    Verify {
        /// Keep only checks whose name or group starts with this.
        #[arg(long)]
        only: Option<String>,
    },
    /// Connection, local solutions, symplectic identity, Frobenius structure.
    Deformation,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    #[arg(long, global = true)]
    pub p: Option<u64>,
    #[arg(long, global = true)]
    pub a: Option<usize>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Residue-field element: an integer code or comma-separated coordinates.
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    #[arg(long = "precision-N", global = true)]
    pub precision: Option<i64>,
    #[arg(long = "weight-W", global = true)]
    pub weight: Option<i64>,
    #[arg(long = "lambda-order-M", global = true)]
    pub lambda_order: Option<usize>,
    /// Also write the report here.
    #[arg(long, global = true, value_name = "OUT")]
    pub json: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, value_name = "K")]
    pub parallel: Option<usize>,
    /// JSON file with the same keys as the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Add wall-clock timings to the report.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub p: Option<u64>,
    pub a: Option<usize>,
    pub n: Option<usize>,
    pub lambda: Option<serde_json::Value>,
    pub precision: Option<i64>,
    pub weight: Option<i64>,
    pub lambda_order: Option<usize>,
    pub json: Option<PathBuf>,
    pub parallel: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub p: u64,
    pub a: usize,
    pub n: usize,
    pub lambda: FfElem,
    pub precision: Option<i64>,
    pub weight: Option<i64>,
    pub lambda_order: usize,
    pub json: Option<PathBuf>,
    pub parallel: usize,
    pub timings: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum UsageError {
    #[error("missing --{0}")]
    Missing(&'static str),
    #[error("cannot read config {0}: {1}")]
    Config(PathBuf, String),
    #[error("malformed lambda {0:?}: {1}")]
    Lambda(String, String),
    #[error(transparent)]
    Core(#[from] hkl::Error),
}

/// `"5"` is a code, `"1,0,2"` are coordinates in the power basis.
pub fn parse_lambda(p: u64, a: usize, text: &str) -> Result<FfElem, UsageError> {
    let bad = |why: &str| UsageError::Lambda(text.to_string(), why.to_string());
    let field = build_field(p, a, 2)?;
    let field = field.residue_field();
    let s = text.trim();
    if s.contains(',') {
        let coords: Vec<u64> =
            s.split(',').map(|c| c.trim().parse::<u64>()).collect::<Result<_, _>>().map_err(|e| bad(&e.to_string()))?;
        if coords.len() > a {
            return Err(bad(&format!("more than {a} coordinates")));
        }
        if coords.iter().any(|&c| c >= p) {
            return Err(bad(&format!("coordinate not below {p}")));
        }
        Ok(field.encode(&coords))
    } else {
        let v: u64 = s.parse().map_err(|e: std::num::ParseIntError| bad(&e.to_string()))?;
        if v >= field.size() as u64 {
            return Err(bad(&format!("code not below q = {}", field.size())));
        }
        Ok(v as FfElem)
    }
}

fn lambda_string(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(xs) => xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

impl Job {
    /// Flags win over the config file.
    pub fn resolve(flags: &Flags) -> Result<Job, UsageError> {
        let cfg = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| UsageError::Config(path.clone(), e.to_string()))?;
                serde_json::from_str::<ConfigFile>(&text).map_err(|e| UsageError::Config(path.clone(), e.to_string()))?
            }
            None => ConfigFile::default(),
        };
        let p = flags.p.or(cfg.p).ok_or(UsageError::Missing("p"))?;
        let a = flags.a.or(cfg.a).unwrap_or(1);
        let n = flags.n.or(cfg.n).ok_or(UsageError::Missing("n"))?;
        if n == 0 {
            return Err(hkl::Error::InvalidParameter("n must be positive".into()).into());
        }
        if !hkl::padic::zmod::is_prime(p) {
            return Err(hkl::Error::NotPrime(p).into());
        }
        let text = flags.lambda.clone().or_else(|| cfg.lambda.as_ref().map(lambda_string)).unwrap_or_else(|| "1".into());
        let lambda = parse_lambda(p, a, &text)?;
        Ok(Job {
            p,
            a,
            n,
            lambda,
            precision: flags.precision.or(cfg.precision),
            weight: flags.weight.or(cfg.weight),
            lambda_order: flags.lambda_order.or(cfg.lambda_order).unwrap_or(8),
            json: flags.json.clone().or(cfg.json),
            parallel: flags.parallel.or(cfg.parallel).unwrap_or(0),
            timings: flags.timings,
        })
    }

    pub fn run_params(&self) -> hkl::pipeline::RunParams {
        let mut r = hkl::pipeline::RunParams::new(self.p, self.a, self.n, self.lambda);
        r.precision = self.precision;
        r.weight_cap = self.weight;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_forms() {
        assert_eq!(parse_lambda(3, 1, "2").unwrap(), 2);
        assert_eq!(parse_lambda(3, 2, "1,2").unwrap(), 7);
        assert!(parse_lambda(3, 1, "3").is_err());
        assert!(parse_lambda(3, 2, "1,3").is_err());
        assert!(parse_lambda(3, 1, "x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("job.json");
        std::fs::write(&path, r#"{"p": 5, "n": 2, "lambda": [3], "lambda_order": 6}"#).unwrap();
        let flags = Flags { config: Some(path.clone()), n: Some(1), ..Flags::default() };
        let job = Job::resolve(&flags).unwrap();
        assert_eq!((job.p, job.n, job.lambda, job.lambda_order), (5, 1, 3, 6));
        std::fs::write(&path, r#"{"p": 5, "bogus": 1}"#).unwrap();
        assert!(matches!(Job::resolve(&flags), Err(UsageError::Config(..))));
    }
}
