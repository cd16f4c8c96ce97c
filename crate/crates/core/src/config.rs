//! Run configuration, loadable from a TOML key = value file:
//!
//! ```toml
//! default_cap = 20
//! float_precision_bits = 64
//! fit_window = "10:"
//! verdict_thresholds = [0.1, 0.5]
//! quadrature_tol = 1e-12
//! ```

use serde::Serialize;

use crate::error::ParseError;
use crate::gevrey::{Thresholds, Window};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Config {
    pub default_cap: u32,
    pub float_precision_bits: u32,
    pub fit_window: Window,
    pub verdict_thresholds: Thresholds,
    pub quadrature_tol: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            default_cap: 20,
            float_precision_bits: 64,
            fit_window: Window::default(),
            verdict_thresholds: Thresholds::default(),
            quadrature_tol: 1e-12,
        }
    }
}

fn bad(msg: impl Into<String>) -> ParseError {
    ParseError::Config(msg.into())
}

fn positive_int(v: &toml::Value, key: &str) -> Result<u32, ParseError> {
    v.as_integer()
        .and_then(|n| u32::try_from(n).ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| bad(format!("{key}: expected a positive integer")))
}

fn float(v: &toml::Value, key: &str) -> Result<f64, ParseError> {
    v.as_float()
        .or_else(|| v.as_integer().map(|n| n as f64))
        .ok_or_else(|| bad(format!("{key}: expected a number")))
}

impl Config {
    /// Defaults overlaid with the keys present in `text`. Unknown keys are errors.
    pub fn from_toml(text: &str) -> Result<Self, ParseError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| bad(e.message().to_string()))?;
        let mut c = Self::default();
        for (key, v) in &table {
            match key.as_str() {
                "default_cap" => c.default_cap = positive_int(v, key)?,
                "float_precision_bits" => c.float_precision_bits = positive_int(v, key)?,
                "fit_window" => {
                    let s = v
                        .as_str()
                        .ok_or_else(|| bad("fit_window: expected a string like \"10:\""))?;
                    c.fit_window = Window::parse(s).map_err(|e| bad(e.to_string()))?;
                }
                "verdict_thresholds" => {
                    let pair = v
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| bad("verdict_thresholds: expected [s_tol, residual_tol]"))?;
                    c.verdict_thresholds = Thresholds {
                        s_tol: float(&pair[0], key)?,
                        residual_tol: float(&pair[1], key)?,
                    };
                }
                "quadrature_tol" => c.quadrature_tol = float(v, key)?,
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        if self.default_cap == 0 {
            return Err(bad("default_cap must be positive"));
        }
        if self.float_precision_bits == 0 || self.float_precision_bits > 64 {
            return Err(bad("float_precision_bits must be in 1..=64; floats are IEEE binary64"));
        }
        let t = self.verdict_thresholds;
        if !(t.s_tol > 0.0 && t.residual_tol > 0.0) {
            return Err(bad("verdict thresholds must be positive"));
        }
        if !(self.quadrature_tol > 0.0 && self.quadrature_tol.is_finite()) {
            return Err(bad("quadrature_tol must be positive"));
        }
        if self.fit_window.hi.is_some_and(|h| h < self.fit_window.lo) {
            return Err(bad("fit_window is empty"));
        }
        Ok(())
    }
}
