//! Merging a JSON config file with command-line flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Overlays the flags on the config file and parses the result as `T`.
///
/// Both sources use the same kebab-case keys; flags that were not given are
/// skipped when serialising, so file values survive unless overridden.
/// Unknown keys in the file are rejected by `T`'s `deny_unknown_fields`.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Path>) -> Result<T, CliError> {
    let mut base = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Usage("config must be a JSON object".into())),
                Err(e) => return Err(CliError::Usage(format!("config is not valid JSON: {e}"))),
            }
        }
        None => Map::new(),
    };
    let over = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Value::Object(m) = over {
        for (k, v) in m {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("config rejected: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use std::io::Write;

    #[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields, rename_all = "kebab-case")]
    struct Demo {
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        half_width: Option<f64>,
    }

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn flags_win_over_file() {
        let f = file(r#"{"seed": 1, "half-width": 2.0}"#);
        let flags = Demo {
            seed: Some(9),
            half_width: None,
        };
        let m = merge(&flags, Some(f.path())).unwrap();
        assert_eq!(m, Demo { seed: Some(9), half_width: Some(2.0) });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let f = file(r#"{"sed": 1}"#);
        assert!(matches!(merge(&Demo::default(), Some(f.path())), Err(CliError::Usage(_))));
    }
}
