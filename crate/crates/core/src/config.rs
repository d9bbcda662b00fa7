//! Flat `key = value` configuration with dotted keys.
//!
//! Files hold one assignment per line; `#` starts a comment. Overrides given
//! as `key=value` strings replace file entries. Every key must be consumed
//! by some config struct, otherwise [`KvMap::finish`] fails.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("bad value for {key} = `{value}`: {message}")]
    Value { key: String, value: String, message: String },
    #[error("unknown configuration keys: {}", .0.join(", "))]
    Unknown(Vec<String>),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Parsed assignments plus the set of keys already consumed.
#[derive(Debug, Clone, Default)]
pub struct KvMap {
    values: BTreeMap<String, String>,
    used: BTreeMap<String, bool>,
}

impl KvMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut m = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            m.set_line(line).map_err(|_| ConfigError::Syntax {
                line: i + 1,
                text: raw.trim().to_string(),
            })?;
        }
        Ok(m)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    fn set_line(&mut self, line: &str) -> Result<(), ()> {
        let (k, v) = line.split_once('=').ok_or(())?;
        let k = k.trim();
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(());
        }
        self.insert(k, v.trim());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        self.set_line(assignment.trim()).map_err(|_| ConfigError::Syntax {
            line: 0,
            text: assignment.to_string(),
        })
    }

    pub fn insert(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
        self.used.insert(key.to_string(), false);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Removes and parses `key`, marking it consumed.
    pub fn take<T: KvValue>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        let Some(raw) = self.values.get(key) else {
            return Ok(None);
        };
        self.used.insert(key.to_string(), true);
        T::parse_kv(raw).map(Some).map_err(|message| ConfigError::Value {
            key: key.to_string(),
            value: raw.clone(),
            message,
        })
    }

    /// Overwrites `*slot` when `key` is present.
    pub fn take_into<T: KvValue>(&mut self, key: &str, slot: &mut T) -> Result<(), ConfigError> {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    /// Keys present but never consumed.
    pub fn unused(&self) -> Vec<String> {
        self.used.iter().filter(|(_, u)| !**u).map(|(k, _)| k.clone()).collect()
    }

    pub fn finish(&self) -> Result<(), ConfigError> {
        let unused = self.unused();
        if unused.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Unknown(unused))
        }
    }
}

/// A value that can be read from and written back to a config file.
pub trait KvValue: Sized {
    fn parse_kv(s: &str) -> Result<Self, String>;
    fn render_kv(&self) -> String;
}

macro_rules! kv_via_fromstr {
    ($($t:ty),*) => {$(
        impl KvValue for $t {
            fn parse_kv(s: &str) -> Result<Self, String> {
                s.parse::<$t>().map_err(|e| e.to_string())
            }
            fn render_kv(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

kv_via_fromstr!(f64, f32, usize, u64, u32, i32, bool, String);

/// `auto` (or an empty value) means "derive it".
impl<T: KvValue> KvValue for Option<T> {
    fn parse_kv(s: &str) -> Result<Self, String> {
        if s.is_empty() || s.eq_ignore_ascii_case("auto") {
            Ok(None)
        } else {
            T::parse_kv(s).map(Some)
        }
    }

    fn render_kv(&self) -> String {
        match self {
            Some(v) => v.render_kv(),
            None => "auto".into(),
        }
    }
}

/// A struct whose fields map to dotted keys under a prefix.
pub trait KvConfig {
    fn apply_kv(&mut self, kv: &mut KvMap, prefix: &str) -> Result<(), ConfigError>;
    fn kv_entries(&self, prefix: &str, out: &mut Vec<(String, String)>);
}

/// Joins a prefix and a field name with a dot.
pub fn dotted(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

/// Implements [`KvConfig`] for a struct whose listed fields implement [`KvValue`].
#[macro_export]
macro_rules! kv_config {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl $crate::config::KvConfig for $ty {
            fn apply_kv(
                &mut self,
                kv: &mut $crate::config::KvMap,
                prefix: &str,
            ) -> Result<(), $crate::config::ConfigError> {
                $( kv.take_into(&$crate::config::dotted(prefix, stringify!($field)), &mut self.$field)?; )*
                Ok(())
            }
            fn kv_entries(&self, prefix: &str, out: &mut Vec<(String, String)>) {
                $( out.push((
                    $crate::config::dotted(prefix, stringify!($field)),
                    $crate::config::KvValue::render_kv(&self.$field),
                )); )*
            }
        }
    };
}

/// Renders entries as a config file that parses back to the same values.
pub fn render(entries: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in entries {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}
