//! Run configuration: defaults, then the matching section of a TOML file,
//! then command-line flags.
//!
//! A config file holds optional top-level `seed` and `out_dir` keys and one
//! flat table per subcommand, named `[group-command]` (for example
//! `[mc-run]`). Every section is checked against its parameter set even when
//! a different command runs, so typos never go unnoticed.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use crate::error::{LabError, Result};

/// Declares a parameter set twice: as a serde struct with defaults and
/// `deny_unknown_fields`, and as a clap struct of optional overrides with the
/// same field names.
macro_rules! command_params {
    (
        $(#[$meta:meta])*
        $params:ident / $args:ident {
            $( $(#[doc = $doc:literal])* $field:ident : $ty:ty = $default:expr ),* $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $params {
            $( $(#[doc = $doc])* pub $field: $ty, )*
        }

        impl Default for $params {
            fn default() -> Self {
                $params { $( $field: $default, )* }
            }
        }

        #[derive(Clone, Debug, Default, clap::Args, serde::Serialize)]
        pub struct $args {
            $(
                $(#[doc = $doc])*
                #[arg(long, allow_negative_numbers = true)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }
    };
}
pub(crate) use command_params;

/// Top-level keys of a config file.
#[derive(Clone, Debug, Default)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub sections: Table,
}

/// Validator for one named section: deserializes it into its parameter set.
pub type SectionCheck = fn(&Table) -> Result<()>;

pub fn check_section<P: DeserializeOwned + Serialize + Default>(section: &Table) -> Result<()> {
    resolve::<P, Table>(Some(section), &Table::new()).map(|_| ())
}

impl FileConfig {
    pub fn load(path: &Path, known: &[(&str, SectionCheck)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, known)
    }

    pub fn parse(text: &str, known: &[(&str, SectionCheck)]) -> Result<Self> {
        let table: Table = text.parse().map_err(|e| LabError::Config(format!("{e}")))?;
        let mut cfg = FileConfig::default();
        for (key, value) in table {
            match (key.as_str(), value) {
                ("seed", Value::Integer(s)) if s >= 0 => cfg.seed = Some(s as u64),
                ("seed", v) => return Err(LabError::Config(format!("seed must be a non-negative integer, got {v}"))),
                ("out_dir", Value::String(s)) => cfg.out_dir = Some(PathBuf::from(s)),
                ("out_dir", v) => return Err(LabError::Config(format!("out_dir must be a string, got {v}"))),
                (name, Value::Table(section)) => {
                    let Some((_, check)) = known.iter().find(|(n, _)| *n == name) else {
                        return Err(LabError::Config(format!("unknown section [{name}]")));
                    };
                    if let Some((k, _)) = section.iter().find(|(_, v)| matches!(v, Value::Table(_) | Value::Array(_))) {
                        return Err(LabError::Config(format!("[{name}] {k}: nested values are not allowed")));
                    }
                    check(&section).map_err(|e| LabError::Config(format!("[{name}] {e}")))?;
                    cfg.sections.insert(name.to_string(), Value::Table(section));
                }
                (name, _) => return Err(LabError::Config(format!("unknown top-level key {name}"))),
            }
        }
        Ok(cfg)
    }

    pub fn section(&self, name: &str) -> Option<&Table> {
        self.sections.get(name).and_then(Value::as_table)
    }
}

fn to_table<T: Serialize>(value: &T) -> Result<Table> {
    match Value::try_from(value).map_err(|e| LabError::Config(e.to_string()))? {
        Value::Table(t) => Ok(t),
        v => Err(LabError::Config(format!("expected a table of parameters, got {v}"))),
    }
}

/// Layers `section` and `overrides` over the defaults of `P`.
pub fn resolve<P, O>(section: Option<&Table>, overrides: &O) -> Result<P>
where
    P: DeserializeOwned + Serialize + Default,
    O: Serialize,
{
    let mut merged = to_table(&P::default())?;
    for layer in [section.cloned().unwrap_or_default(), to_table(overrides)?] {
        for (k, v) in layer {
            merged.insert(k, v);
        }
    }
    P::deserialize(Value::Table(merged)).map_err(|e| LabError::Config(e.to_string()))
}

/// Parses a comma-separated list such as `"16,32,64"`.
pub fn parse_list<T: std::str::FromStr>(key: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| LabError::Config(format!("{key}: cannot parse list entry {s:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    command_params! {
        Demo / DemoArgs {
            lambda: f64 = 0.0,
            sizes: String = "16,32".into(),
        }
    }

    fn known() -> Vec<(&'static str, SectionCheck)> {
        vec![("demo", check_section::<Demo>)]
    }

    #[test]
    fn layering() {
        let cfg = FileConfig::parse("seed = 3\n[demo]\nlambda = 0.25\n", &known()).unwrap();
        assert_eq!(cfg.seed, Some(3));
        let p: Demo = resolve(cfg.section("demo"), &DemoArgs::default()).unwrap();
        assert_eq!(p.lambda, 0.25);
        let flags = DemoArgs {
            lambda: Some(-0.5),
            ..Default::default()
        };
        let p: Demo = resolve(cfg.section("demo"), &flags).unwrap();
        assert_eq!(p, Demo { lambda: -0.5, sizes: "16,32".into() });
        // integers are accepted for real parameters
        let cfg = FileConfig::parse("[demo]\nlambda = 1\n", &known()).unwrap();
        assert_eq!(resolve::<Demo, _>(cfg.section("demo"), &Table::new()).unwrap().lambda, 1.0);
    }

    #[test]
    fn rejects_unknown_and_nested_keys() {
        assert!(FileConfig::parse("[demo]\nlamda = 0.1\n", &known()).is_err());
        assert!(FileConfig::parse("[other]\nx = 1\n", &known()).is_err());
        assert!(FileConfig::parse("colour = 1\n", &known()).is_err());
        assert!(FileConfig::parse("[demo]\nlambda = [1, 2]\n", &known()).is_err());
        assert!(FileConfig::parse("[demo.inner]\nlambda = 1\n", &known()).is_err());
        assert!(FileConfig::parse("seed = -1\n", &known()).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<usize>("sizes", "16, 32,64").unwrap(), vec![16, 32, 64]);
        assert!(parse_list::<usize>("sizes", "16,x").is_err());
    }
}
