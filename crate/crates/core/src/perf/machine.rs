use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::Precision;

const GIB: f64 = (1u64 << 30) as f64;
const TERA: f64 = 1e12;

const A100_MODEL: &str = include_str!("../../models/a100.model");

#[derive(Debug, Error)]
pub enum MachineModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("`{key}` must be positive, got {value}")]
    NotPositive { key: &'static str, value: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Peak figures of the machine a run is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineModel {
    pub name: String,
    /// Bytes per second.
    pub peak_bandwidth: f64,
    /// Operations per second.
    pub peak_flops_sp: f64,
    pub peak_flops_dp: f64,
}

impl MachineModel {
    pub fn a100() -> Self {
        A100_MODEL.parse().expect("bundled A100 model is well-formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MachineModelError> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn peak_flops(&self, precision: Precision) -> f64 {
        match precision {
            Precision::Single => self.peak_flops_sp,
            Precision::Double => self.peak_flops_dp,
        }
    }

    /// Intensity at which the bandwidth roof meets the compute roof.
    pub fn ridge_point(&self, precision: Precision) -> f64 {
        self.peak_flops(precision) / self.peak_bandwidth
    }
}

impl FromStr for MachineModel {
    type Err = MachineModelError;

    /// `key = value` lines; `#` starts a comment. Keys: `name`, `peak_bw_gib_s`,
    /// `peak_sp_tflops`, `peak_dp_tflops`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut name = None;
        let (mut bw, mut sp, mut dp) = (None, None, None);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| MachineModelError::Syntax { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim().trim_matches('"'));
            let number = || value.parse::<f64>().map_err(|_| syntax(format!("`{value}` is not a number")));
            match key {
                "name" => name = Some(value.to_string()),
                "peak_bw_gib_s" => bw = Some(number()?),
                "peak_sp_tflops" => sp = Some(number()?),
                "peak_dp_tflops" => dp = Some(number()?),
                other => return Err(syntax(format!("unknown key `{other}`"))),
            }
        }
        let positive = |key: &'static str, v: Option<f64>| -> Result<f64, MachineModelError> {
            let v = v.ok_or(MachineModelError::MissingKey(key))?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(MachineModelError::NotPositive { key, value: v })
            }
        };
        Ok(MachineModel {
            name: name.ok_or(MachineModelError::MissingKey("name"))?,
            peak_bandwidth: positive("peak_bw_gib_s", bw)? * GIB,
            peak_flops_sp: positive("peak_sp_tflops", sp)? * TERA,
            peak_flops_dp: positive("peak_dp_tflops", dp)? * TERA,
        })
    }
}

impl fmt::Display for MachineModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name = {}", self.name)?;
        writeln!(f, "peak_bw_gib_s = {}", self.peak_bandwidth / GIB)?;
        writeln!(f, "peak_sp_tflops = {}", self.peak_flops_sp / TERA)?;
        writeln!(f, "peak_dp_tflops = {}", self.peak_flops_dp / TERA)
    }
}
