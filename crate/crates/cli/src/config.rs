use kostka_core::{OptimizeConfig, Rational};
use num_traits::{One, Zero};
use serde::Deserialize;

use crate::input::Entry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Run settings. Invariants: tolerances in `(0, 1)`, caps positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub eps_opt: Rational,
    pub delta_eval: Rational,
    pub precision_bit_cap: u32,
    pub postnikov_threshold: usize,
    pub oracle_dim_cap: usize,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opt = OptimizeConfig::default();
        RunConfig {
            eps_opt: opt.eps_opt,
            delta_eval: opt.delta_eval,
            precision_bit_cap: opt.eval.precision_bit_cap,
            postnikov_threshold: opt.postnikov_threshold,
            oracle_dim_cap: kostka_core::oracle::DEFAULT_DIM_CAP,
            output_format: OutputFormat::Json,
        }
    }
}

/// Config file contents; every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub eps_opt: Option<Entry>,
    pub delta_eval: Option<Entry>,
    pub precision_bit_cap: Option<u32>,
    pub postnikov_threshold: Option<usize>,
    pub oracle_dim_cap: Option<usize>,
    pub output_format: Option<OutputFormat>,
}

/// Command-line overrides; `None` keeps the file or default value.
#[derive(Debug, Default)]
pub struct Overrides {
    pub eps_opt: Option<Rational>,
    pub delta_eval: Option<Rational>,
    pub precision_bit_cap: Option<u32>,
    pub output_format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn resolve(file: Option<ConfigFile>, over: Overrides) -> Result<Self, String> {
        let mut c = RunConfig::default();
        if let Some(f) = file {
            if let Some(v) = f.eps_opt {
                c.eps_opt = v.0;
            }
            if let Some(v) = f.delta_eval {
                c.delta_eval = v.0;
            }
            c.precision_bit_cap = f.precision_bit_cap.unwrap_or(c.precision_bit_cap);
            c.postnikov_threshold = f.postnikov_threshold.unwrap_or(c.postnikov_threshold);
            c.oracle_dim_cap = f.oracle_dim_cap.unwrap_or(c.oracle_dim_cap);
            c.output_format = f.output_format.unwrap_or(c.output_format);
        }
        c.eps_opt = over.eps_opt.unwrap_or(c.eps_opt);
        c.delta_eval = over.delta_eval.unwrap_or(c.delta_eval);
        c.precision_bit_cap = over.precision_bit_cap.unwrap_or(c.precision_bit_cap);
        c.output_format = over.output_format.unwrap_or(c.output_format);
        c.validate()?;
        Ok(c)
    }

    pub fn load_file(path: &str) -> Result<ConfigFile, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("config {path}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("config {path}: {e}"))
    }

    fn validate(&self) -> Result<(), String> {
        for (name, v) in [("eps_opt", &self.eps_opt), ("delta_eval", &self.delta_eval)] {
            if *v <= Rational::zero() || *v >= Rational::one() {
                return Err(format!("{name} = {v} must lie in (0, 1)"));
            }
        }
        if self.precision_bit_cap < 64 {
            return Err("precision_bit_cap must be at least 64".into());
        }
        if self.postnikov_threshold == 0 || self.oracle_dim_cap == 0 {
            return Err("caps must be positive".into());
        }
        Ok(())
    }

    pub fn optimize_config(&self) -> OptimizeConfig {
        let mut cfg = OptimizeConfig {
            eps_opt: self.eps_opt.clone(),
            delta_eval: self.delta_eval.clone(),
            postnikov_threshold: self.postnikov_threshold,
            ..OptimizeConfig::default()
        };
        cfg.eval.precision_bit_cap = self.precision_bit_cap;
        cfg
    }

    /// Config echo for the output record.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "eps_opt": crate::render::exact(&self.eps_opt),
            "delta_eval": crate::render::exact(&self.delta_eval),
            "precision_bit_cap": self.precision_bit_cap,
            "postnikov_threshold": self.postnikov_threshold,
            "oracle_dim_cap": self.oracle_dim_cap,
        })
    }
}
