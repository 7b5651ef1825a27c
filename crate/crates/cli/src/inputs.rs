//! Input files: automata, witnesses and lifting demos, all JSON.

use std::collections::BTreeMap;
use std::path::Path;

use quantimetric::fixpoint::{Witness, WitnessJson};
use quantimetric::systems::{AutomatonJson, Nfa, SubsetState};
use quantimetric::QuantaleId;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_automaton(path: &Path) -> Result<Nfa> {
    let j: AutomatonJson = load_json(path)?;
    Ok(Nfa::from_json(&j)?)
}

pub fn load_witness(path: &Path, nfa: &Nfa) -> Result<Witness<SubsetState>> {
    let j: WitnessJson = load_json(path)?;
    Ok(Witness::from_json(nfa, &j)?)
}

/// Reads a subset state: `x0`, `x0,x1` or `{x0,x1}`; `{}` is the empty set.
pub fn parse_subset(nfa: &Nfa, text: &str) -> Result<SubsetState> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .unwrap_or(text.trim());
    let names: Vec<&str> = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    Ok(nfa.subset(&names)?)
}

/// A finite set (JSON array) or a distribution (JSON object of masses).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DemoValue {
    Set(Vec<String>),
    Dist(BTreeMap<String, f64>),
}

impl DemoValue {
    pub fn render(&self) -> String {
        match self {
            DemoValue::Set(xs) => format!("{{{}}}", xs.join(",")),
            DemoValue::Dist(m) => {
                let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k}:{v}")).collect();
                format!("[{}]", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoPair {
    pub left: DemoValue,
    pub right: DemoValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoRelation {
    pub default: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<serde_json::Value>,
    #[serde(default)]
    pub entries: Vec<(String, String, serde_json::Value)>,
}

/// Input of `lift-demo`: a relation on named elements and pairs of
/// functor values to lift it to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftDemoJson {
    pub quantale: QuantaleId,
    pub elements: Vec<String>,
    pub relation: DemoRelation,
    pub pairs: Vec<DemoPair>,
}
