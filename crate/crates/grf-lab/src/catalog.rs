//! Space catalog: named parameter sets, built-in and user-supplied.

use grf_core::space::{parse_ratio, AlignedParams, ParamError};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A numeric field that may be written as a number or a `"p/q"` string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumOrRatio {
    Num(f64),
    Text(String),
}

impl NumOrRatio {
    pub fn value(&self) -> Result<f64, ParamError> {
        match self {
            NumOrRatio::Num(v) => Ok(*v),
            NumOrRatio::Text(s) => parse_ratio(s),
        }
    }
}

impl std::fmt::Display for NumOrRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NumOrRatio::Num(v) => write!(f, "{v}"),
            NumOrRatio::Text(s) => f.write_str(s),
        }
    }
}

/// JSON space descriptor: `{"name": …, "c1": …, "lambda": …, "kappa1": …,
/// "kappa2": …}`. Catalog files hold an array of these.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub name: String,
    pub c1: NumOrRatio,
    pub lambda: NumOrRatio,
    pub kappa1: NumOrRatio,
    pub kappa2: NumOrRatio,
}

impl SpaceDescriptor {
    pub fn params(&self) -> Result<AlignedParams, ParamError> {
        AlignedParams::new(
            self.c1.value()?,
            self.lambda.value()?,
            self.kappa1.value()?,
            self.kappa2.value()?,
        )
    }
}

/// The built-in catalog ships the one worked example:
/// SU(7)×SO(8)/SO(7), a 55-dimensional space with `c1 = 10/7`, `λ = 1/4`,
/// `κ1 = κ2 = 1/2`.
pub fn builtin_catalog() -> Vec<SpaceDescriptor> {
    vec![SpaceDescriptor {
        name: "su7so8so7".into(),
        c1: NumOrRatio::Text("10/7".into()),
        lambda: NumOrRatio::Text("1/4".into()),
        kappa1: NumOrRatio::Text("1/2".into()),
        kappa2: NumOrRatio::Text("1/2".into()),
    }]
}

/// Loads a user catalog (JSON array of descriptors).
pub fn load_catalog(path: &Path) -> Result<Vec<SpaceDescriptor>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read catalog {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("bad catalog {}: {e}", path.display()))
}

/// Finds `name`, searching the user catalog (if any) before the built-ins.
pub fn find<'a>(
    user: &'a [SpaceDescriptor],
    builtin: &'a [SpaceDescriptor],
    name: &str,
) -> Option<&'a SpaceDescriptor> {
    user.iter().chain(builtin.iter()).find(|d| d.name == name)
}
