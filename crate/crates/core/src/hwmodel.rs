//! Calibrated silicon cost models.
//!
//! A [`CalibrationProfile`] holds fits of PE area against bitwidth
//! (quadratic) and against BOPS (linear), plus the few measured constants
//! the fits do not cover. Everything here is a closed-form evaluation of
//! those fits; re-fit them with [`crate::regression`] to target another
//! process.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{ceil_log2, Layer};

/// Area-fit coefficients and measured constants for one process/topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationProfile {
    pub name: String,
    /// `[a2, a1, a0]` of `A(b) = a2·b² + a1·b + a0`, in µm².
    pub quad: [f64; 3],
    /// `[slope, intercept]` of `A(B) = slope·B + intercept`, B in bit-ops.
    pub lin: [f64; 2],
    /// Area of a 32-bit fixed-point PE. Used instead of the quadratic at
    /// b = 32.
    pub fixed32_pe_area: f64,
    /// Area of one 32-bit floating-point multiplier.
    pub float_mult_area: f64,
    /// Dynamic power per unit area, mW/µm².
    pub power_density: f64,
    /// Measured PE areas by bitwidth; these win over both fits.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<u32, f64>,
    /// Free-form provenance (synthesis setup, gate counts). Not used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<serde_json::Value>,
}

impl CalibrationProfile {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let profile: CalibrationProfile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            context: format!("calibration profile: {}", e.path()),
            message: e.inner().to_string(),
        })?;
        profile.validate()?;
        Ok(profile)
    }

    /// The shipped 28nm profile with the published fit coefficients.
    pub fn tsmc28() -> Self {
        crate::presets::calibration("tsmc28-paper").expect("shipped calibration profile parses")
    }

    pub fn quad_a2(&self) -> f64 {
        self.quad[0]
    }
    pub fn quad_a1(&self) -> f64 {
        self.quad[1]
    }
    pub fn quad_a0(&self) -> f64 {
        self.quad[2]
    }
    pub fn lin_slope(&self) -> f64 {
        self.lin[0]
    }
    pub fn lin_intercept(&self) -> f64 {
        self.lin[1]
    }

    pub fn validate(&self) -> Result<()> {
        let what = || format!("calibration profile `{}`", self.name);
        let all = self.quad.iter().chain(&self.lin).chain([
            &self.fixed32_pe_area,
            &self.float_mult_area,
            &self.power_density,
        ]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(what(), "coefficients must be finite"));
        }
        for (field, v) in [
            ("quad[0]", self.quad_a2()),
            ("quad[1]", self.quad_a1()),
            ("lin[0]", self.lin_slope()),
            ("lin[1]", self.lin_intercept()),
            ("fixed32_pe_area", self.fixed32_pe_area),
            ("float_mult_area", self.float_mult_area),
            ("power_density", self.power_density),
        ] {
            if v <= 0.0 {
                return Err(Error::invalid(what(), format!("{field} must be > 0")));
            }
        }
        if let Some((b, _)) = self.overrides.iter().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::invalid(what(), format!("override for {b}-bit must be a positive area")));
        }
        // Minimum of the quadratic on [1, 32]: at an end point or the vertex.
        let vertex = -self.quad_a1() / (2.0 * self.quad_a2());
        let min = [1.0, 32.0, vertex.clamp(1.0, 32.0)]
            .into_iter()
            .map(|b| self.quadratic_area(b))
            .fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(Error::invalid(what(), "quadratic area fit is not positive on [1, 32] bits"));
        }
        Ok(())
    }

    /// Raw quadratic fit, with no overrides applied.
    pub fn quadratic_area(&self, bits: f64) -> f64 {
        self.quad_a2() * bits * bits + self.quad_a1() * bits + self.quad_a0()
    }

    /// Linear BOPS fit, `slope·bops + intercept`.
    pub fn area_from_bops(&self, bops: f64) -> f64 {
        self.lin_slope() * bops + self.lin_intercept()
    }

    /// Area of an `n`-in, `m`-out array of `k×k` PEs predicted from its BOPS.
    pub fn accelerator_area(&self, n: u32, m: u32, k: u32, b_w: u32, b_a: u32) -> f64 {
        let layer = Layer::new("", k, n, m, (1, 1), b_w, b_a);
        self.area_from_bops(layer.bops() as f64)
    }

    /// Dynamic power of `area` µm² of PE logic, in mW.
    pub fn power(&self, area: f64) -> Result<f64> {
        estimate_power(area, self)
    }
}

/// Area of an `n×m` array of `k×k` PEs from the profile's linear BOPS fit.
pub fn estimate_accelerator_area(n: u32, m: u32, k: u32, b_w: u32, b_a: u32, profile: &CalibrationProfile) -> f64 {
    profile.accelerator_area(n, m, k, b_w, b_a)
}

/// PE dynamic power, linear in area.
pub fn estimate_power(area: f64, profile: &CalibrationProfile) -> Result<f64> {
    if !(area.is_finite() && area > 0.0) {
        return Err(Error::invalid("area", format!("must be > 0, got {area}")));
    }
    Ok(area * profile.power_density)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticKind {
    Float32,
    Fixed,
}

impl fmt::Display for ArithmeticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArithmeticKind::Float32 => "float32",
            ArithmeticKind::Fixed => "fixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaEstimator {
    /// Quadratic fit of area against a single operand bitwidth.
    #[default]
    QuadraticBitwidth,
    /// Linear fit of area against the BOPS of one single-channel PE.
    LinearBops,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceleratorConfig {
    /// Silicon budget for the PE array, µm².
    pub area_budget: f64,
    /// Clock, Hz.
    pub frequency: f64,
    pub kind: ArithmeticKind,
    pub b_w: u32,
    pub b_a: u32,
    /// Kernel side implemented by each PE.
    pub k: u32,
    pub profile: CalibrationProfile,
    /// `(rows, cols)`; bypasses area-derived sizing.
    pub explicit_array: Option<(u32, u32)>,
    pub estimator: AreaEstimator,
}

impl AcceleratorConfig {
    pub fn fixed(area_budget: f64, frequency: f64, bits: u32, k: u32, profile: CalibrationProfile) -> Self {
        AcceleratorConfig {
            area_budget,
            frequency,
            kind: ArithmeticKind::Fixed,
            b_w: bits,
            b_a: bits,
            k,
            profile,
            explicit_array: None,
            estimator: AreaEstimator::default(),
        }
    }

    pub fn float32(area_budget: f64, frequency: f64, k: u32, profile: CalibrationProfile) -> Self {
        AcceleratorConfig { kind: ArithmeticKind::Float32, ..Self::fixed(area_budget, frequency, 32, k, profile) }
    }

    pub fn with_array(mut self, rows: u32, cols: u32) -> Self {
        self.explicit_array = Some((rows, cols));
        self
    }

    /// Operand widths the datapath carries; 32 for floating point.
    pub fn operand_bits(&self) -> (u32, u32) {
        match self.kind {
            ArithmeticKind::Float32 => (32, 32),
            ArithmeticKind::Fixed => (self.b_w, self.b_a),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let what = "accelerator config";
        if !(self.area_budget.is_finite() && self.area_budget > 0.0) {
            return Err(Error::invalid(what, "area budget must be > 0"));
        }
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::invalid(what, "frequency must be > 0"));
        }
        if self.k == 0 {
            return Err(Error::invalid(what, "k must be >= 1"));
        }
        if self.kind == ArithmeticKind::Fixed {
            for (field, v) in [("b_w", self.b_w), ("b_a", self.b_a)] {
                if !(1..=crate::netmodel::MAX_BITWIDTH).contains(&v) {
                    return Err(Error::invalid(what, format!("{field} must be in [1, 64], got {v}")));
                }
            }
        }
        if let Some((r, c)) = self.explicit_array {
            if r == 0 || c == 0 {
                return Err(Error::invalid(what, "array dims must be >= 1"));
            }
        }
        self.profile.validate()
    }
}

/// Area of one PE under `estimator`.
pub fn pe_area(config: &AcceleratorConfig, estimator: AreaEstimator) -> Result<f64> {
    let profile = &config.profile;
    let k2 = config.k as f64 * config.k as f64;
    if config.kind == ArithmeticKind::Float32 {
        // multipliers only; accumulators are not counted
        return Ok(k2 * profile.float_mult_area);
    }
    if config.b_w == config.b_a {
        if let Some(&area) = profile.overrides.get(&config.b_w) {
            return Ok(area);
        }
    }
    match estimator {
        AreaEstimator::QuadraticBitwidth => {
            if config.b_w != config.b_a {
                return Err(Error::invalid(
                    "accelerator config",
                    "the quadratic bitwidth estimator needs b_w == b_a; use the linear-bops estimator",
                ));
            }
            if config.b_w == 32 {
                Ok(profile.fixed32_pe_area)
            } else {
                Ok(profile.quadratic_area(config.b_w as f64))
            }
        }
        AreaEstimator::LinearBops => {
            let (a, w) = (config.b_a as u64, config.b_w as u64);
            let k2i = config.k as u64 * config.k as u64;
            let bops = k2i * (a * w + a + w + ceil_log2(k2i) as u64);
            Ok(profile.area_from_bops(bops as f64))
        }
    }
}

/// How many PEs fit and what they deliver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizingResult {
    pub pe_area: f64,
    /// PEs that fit in the budget (or `rows·cols` for an explicit array).
    pub pe_count: u64,
    /// Float only: 32-bit multipliers that fit in the budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplier_count: Option<u64>,
    pub array_rows: u32,
    pub array_cols: u32,
    /// Operations per second, `rows·cols·(k²+1)·f`.
    pub capacity: f64,
    /// PE dynamic power of the placed array, mW.
    pub est_power: f64,
}

impl SizingResult {
    pub fn placed_pes(&self) -> u64 {
        self.array_rows as u64 * self.array_cols as u64
    }

    /// Side of a square array.
    pub fn array_side(&self) -> Option<u32> {
        (self.array_rows == self.array_cols).then_some(self.array_rows)
    }
}

/// Sizes a square PE array under the area budget.
///
/// `pe_count = floor(budget / pe_area)` and the array side is
/// `floor(sqrt(pe_count))`. Floating point sizes multipliers first and
/// groups `k²` of them per PE.
pub fn size_pe_array(config: &AcceleratorConfig) -> Result<SizingResult> {
    config.validate()?;
    let pe_area = pe_area(config, config.estimator)?;
    let k2 = config.k as u64 * config.k as u64;

    let (pe_count, multiplier_count) = match config.explicit_array {
        Some((r, c)) => (r as u64 * c as u64, None),
        None => match config.kind {
            ArithmeticKind::Float32 => {
                let mults = (config.area_budget / config.profile.float_mult_area).floor() as u64;
                (mults / k2, Some(mults))
            }
            ArithmeticKind::Fixed => ((config.area_budget / pe_area).floor() as u64, None),
        },
    };
    if pe_count == 0 {
        return Err(Error::Infeasible(format!(
            "area budget {:.1} um^2 is below one PE ({pe_area:.1} um^2)",
            config.area_budget
        )));
    }
    let (rows, cols) = config.explicit_array.unwrap_or_else(|| {
        let side = pe_count.isqrt() as u32;
        (side, side)
    });
    let placed = rows as u64 * cols as u64;
    Ok(SizingResult {
        pe_area,
        pe_count,
        multiplier_count,
        array_rows: rows,
        array_cols: cols,
        capacity: (placed * (k2 + 1)) as f64 * config.frequency,
        est_power: estimate_power(placed as f64 * pe_area, &config.profile)?,
    })
}
