use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::Format;

/// An experiment file:
///
/// ```toml
/// command = "verify-thm61"
/// set = "AP+(1,3,1)"
/// ops = "cyc[(3,1)]"
///
/// [params]
/// L = 3
/// c = 10
///
/// [output]
/// format = "json"
/// path = "report.json"
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub set: Option<OneOrMany>,
    pub ops: Option<OneOrMany>,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn to_vec(&self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn params(&self) -> Result<Params, String> {
        let mut p = Params::default();
        for (k, v) in &self.params {
            let s = match v {
                toml::Value::String(s) => s.clone(),
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Boolean(b) => b.to_string(),
                other => return Err(format!("param `{k}`: unsupported value {other}")),
            };
            p.values.insert(k.clone(), s);
        }
        if let Some(s) = &self.set {
            p.sets = s.to_vec();
        }
        if let Some(o) = &self.ops {
            p.ops = o.to_vec();
        }
        Ok(p)
    }
}

/// Resolved key-value parameters; command-line values overwrite config ones.
#[derive(Clone, Debug, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
    pub sets: Vec<String>,
    pub ops: Vec<String>,
}

impl Params {
    pub fn set<T: ToString>(&mut self, key: &str, value: &Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn set_one(&mut self, key: &str, value: &Option<String>) {
        if let Some(v) = value {
            let list = if key == "ops" { &mut self.ops } else { &mut self.sets };
            *list = vec![v.clone()];
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("--{key} {v}: {e}")))
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| format!("missing --{key}"))
    }

    pub fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn one(&self, key: &str) -> Result<&str, String> {
        let list = if key == "ops" { &self.ops } else { &self.sets };
        match list.as_slice() {
            [one] => Ok(one),
            [] => Err(format!("missing --{key}")),
            _ => Err(format!("expected one --{key}, got {}", list.len())),
        }
    }
}
