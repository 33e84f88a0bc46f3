//! Instance files: `{"lambda": [...], "mu": [...]}` or an array of such
//! objects. Entries are integers, decimal strings or `"p/q"` strings; JSON
//! floats are rejected so that no input is ever rounded.

use std::fmt;

use kostka_core::rational::parse_rational;
use kostka_core::Rational;
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry(pub Rational);

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct EntryVisitor;

        impl<'de> Visitor<'de> for EntryVisitor {
            type Value = Entry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer, a decimal string or a \"p/q\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Entry, E> {
                Ok(Entry(Rational::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Entry, E> {
                Ok(Entry(Rational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Entry, E> {
                Err(E::custom(format!("floating-point literal {v} rejected; quote it as a decimal or \"p/q\" string")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Entry, E> {
                parse_rational(v).map(Entry).map_err(E::custom)
            }
        }

        d.deserialize_any(EntryVisitor)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub lambda: Vec<Entry>,
    pub mu: Vec<Entry>,
    /// Second segment endpoint for the log-concavity probe.
    #[serde(default)]
    pub mu_b: Option<Vec<Entry>>,
}

impl InstanceSpec {
    pub fn lambda(&self) -> Vec<Rational> {
        self.lambda.iter().map(|e| e.0.clone()).collect()
    }

    pub fn mu(&self) -> Vec<Rational> {
        self.mu.iter().map(|e| e.0.clone()).collect()
    }

    pub fn mu_b(&self) -> Option<Vec<Rational>> {
        self.mu_b.as_ref().map(|v| v.iter().map(|e| e.0.clone()).collect())
    }
}

/// Parses an instance file. Errors carry serde_json's line and column.
pub fn parse_instances(text: &str) -> Result<Vec<InstanceSpec>, String> {
    let list = if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<InstanceSpec>>(text).map_err(|e| e.to_string())?
    } else {
        vec![serde_json::from_str::<InstanceSpec>(text).map_err(|e| e.to_string())?]
    };
    if list.is_empty() {
        return Err("instance list is empty".into());
    }
    Ok(list)
}

/// Comma-separated rationals, as given on the command line.
pub fn parse_list(s: &str) -> Result<Vec<Rational>, String> {
    s.split(',').map(|t| parse_rational(t).map_err(|e| e.to_string())).collect()
}
