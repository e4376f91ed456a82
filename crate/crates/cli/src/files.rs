//! JSON input formats (schema "1").
//!
//! Operator file:
//! ```json
//! { "schema": "1", "kind": "linear", "label": "identity2",
//!   "domains": [{ "dim": 2, "exponent": "2" }],
//!   "codomain": { "dim": 2, "exponent": "2" },
//!   "entries": [1, 0, 0, 1] }
//! ```
//! Entries are row-major over `[codomain, slot 1, …, slot n]`. Numbers may
//! be JSON numbers or strings (`"0.5"`, `"1/3"`); exponents also accept
//! `"inf"`.
//!
//! Sequence file:
//! ```json
//! { "schema": "1", "space": { "dim": 2, "exponent": "2" },
//!   "items": [[1, 0], [0, 1]] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use summing_core::operators::{LinearOp, MultilinearOp};
use summing_core::seqnorms::VecSequence;
use summing_core::spaces::Vector;
use summing_core::{Exponent, SpaceSpec};

use crate::CliError;

pub const SCHEMA: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Number(f64),
    Text(String),
}

impl Num {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            Num::Number(v) => Ok(*v),
            Num::Text(s) => parse_real(s),
        }
    }

    pub fn exponent(&self) -> Result<Exponent, CliError> {
        match self {
            Num::Number(v) => Exponent::finite(*v).map_err(CliError::from),
            Num::Text(s) => s.parse::<Exponent>().map_err(CliError::from),
        }
    }
}

/// Decimal or `a/b` literal.
pub fn parse_real(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let bad = || CliError::Input(format!("cannot parse number {s:?}"));
    let v = match t.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b == 0.0 {
                return Err(bad());
            }
            a / b
        }
        None => t.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub dim: usize,
    pub exponent: Num,
}

impl SpaceFile {
    pub fn spec(&self) -> Result<SpaceSpec, CliError> {
        SpaceSpec::new(self.dim, self.exponent.exponent()?).map_err(CliError::from)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Linear,
    Multilinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub schema: String,
    pub kind: OpKind,
    #[serde(default)]
    pub label: Option<String>,
    pub domains: Vec<SpaceFile>,
    pub codomain: SpaceFile,
    pub entries: Vec<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub schema: String,
    #[serde(default)]
    pub label: Option<String>,
    pub space: SpaceFile,
    pub items: Vec<Vec<Num>>,
}

/// A loaded operator.
#[derive(Clone, Debug)]
pub enum Loaded {
    Linear(LinearOp<f64>),
    Multi(MultilinearOp<f64>),
}

impl Loaded {
    pub fn arity(&self) -> usize {
        match self {
            Loaded::Linear(_) => 1,
            Loaded::Multi(m) => m.domains.len(),
        }
    }

    pub fn as_linear(&self) -> Option<LinearOp<f64>> {
        match self {
            Loaded::Linear(l) => Some(l.clone()),
            Loaded::Multi(m) if m.domains.len() == 1 => LinearOp::new(m.domains[0], m.codomain, m.tensor.clone()).ok(),
            Loaded::Multi(_) => None,
        }
    }

    pub fn as_multi(&self) -> MultilinearOp<f64> {
        match self {
            Loaded::Linear(l) => MultilinearOp::from(l.clone()),
            Loaded::Multi(m) => m.clone(),
        }
    }
}

fn check_schema(s: &str) -> Result<(), CliError> {
    if s == SCHEMA {
        Ok(())
    } else {
        Err(CliError::Input(format!("unsupported schema version {s:?}, expected {SCHEMA:?}")))
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_operator(bytes: &[u8]) -> Result<(OperatorFile, Loaded), CliError> {
    let file: OperatorFile =
        serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("bad operator file: {e}")))?;
    check_schema(&file.schema)?;
    let domains = file.domains.iter().map(SpaceFile::spec).collect::<Result<Vec<_>, _>>()?;
    let codomain = file.codomain.spec()?;
    let entries = file.entries.iter().map(Num::value).collect::<Result<Vec<_>, _>>()?;
    let loaded = match file.kind {
        OpKind::Linear => {
            if domains.len() != 1 {
                return Err(CliError::Input(format!("a linear operator has one domain, found {}", domains.len())));
            }
            Loaded::Linear(LinearOp::new(domains[0], codomain, entries)?)
        }
        OpKind::Multilinear => Loaded::Multi(MultilinearOp::new(domains, codomain, entries)?),
    };
    Ok((file, loaded))
}

pub fn parse_sequence(bytes: &[u8]) -> Result<(SequenceFile, VecSequence<f64>), CliError> {
    let file: SequenceFile =
        serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("bad sequence file: {e}")))?;
    check_schema(&file.schema)?;
    let space = file.space.spec()?;
    let items = file
        .items
        .iter()
        .map(|row| row.iter().map(Num::value).collect::<Result<Vec<f64>, _>>().map(Vector))
        .collect::<Result<Vec<_>, _>>()?;
    let seq = VecSequence::new(space, items)?;
    Ok((file, seq))
}

/// Default label from the file's own label or its stem.
pub fn label_for(path: &Path, own: Option<&str>) -> String {
    own.map(str::to_string)
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "input".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_roundtrip_and_validation() {
        let ok = br#"{"schema":"1","kind":"linear","domains":[{"dim":2,"exponent":"4/3"}],
            "codomain":{"dim":1,"exponent":"inf"},"entries":["1/2", 3]}"#;
        let (_, op) = parse_operator(ok).unwrap();
        let l = op.as_linear().unwrap();
        assert_eq!(l.matrix, vec![0.5, 3.0]);
        assert!(l.domain.exponent.is(4.0 / 3.0) && l.codomain.exponent.is_infinite());

        let short = br#"{"schema":"1","kind":"linear","domains":[{"dim":2,"exponent":2}],
            "codomain":{"dim":2,"exponent":2},"entries":[1,2,3]}"#;
        assert!(matches!(parse_operator(short), Err(CliError::Input(_))));
        let schema = br#"{"schema":"2","kind":"linear","domains":[{"dim":1,"exponent":2}],
            "codomain":{"dim":1,"exponent":2},"entries":[1]}"#;
        assert!(matches!(parse_operator(schema), Err(CliError::Input(_))));
        let exp = br#"{"schema":"1","kind":"linear","domains":[{"dim":1,"exponent":0.5}],
            "codomain":{"dim":1,"exponent":2},"entries":[1]}"#;
        assert!(matches!(parse_operator(exp), Err(CliError::Input(_))));
    }

    #[test]
    fn sequence_parsing() {
        let s = br#"{"schema":"1","space":{"dim":2,"exponent":"2"},"items":[[1,0],["0","1"]]}"#;
        let (_, seq) = parse_sequence(s).unwrap();
        assert_eq!(seq.items.len(), 2);
        let bad = br#"{"schema":"1","space":{"dim":2,"exponent":"2"},"items":[[1]]}"#;
        assert!(parse_sequence(bad).is_err());
    }

    #[test]
    fn reals() {
        assert_eq!(parse_real("4/3").unwrap(), 4.0 / 3.0);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("x").is_err());
    }
}
