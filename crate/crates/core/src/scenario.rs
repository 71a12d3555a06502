//! Hardware descriptions and the request types shared by the command line
//! tool and the JSON API.
//!
//! A hardware description names its units in its keys so µm² and mm²
//! cannot be mixed up:
//!
//! ```toml
//! area_mm2 = 1.0          # or area_um2
//! freq_mhz = 800.0
//! kind = "fixed"          # or "float32"
//! b_w = 8
//! b_a = 8
//! k = 3
//! calibration = "tsmc28-paper"   # preset name or path
//! array = [16, 16]        # optional, bypasses area sizing
//!
//! [mem]
//! transfer_rate_mhz = 2400.0
//! bus_width_bits = 64
//! derating = 1.0
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hwmodel::{size_pe_array, AcceleratorConfig, AreaEstimator, ArithmeticKind, CalibrationProfile, SizingResult};
use crate::netmodel::{Layer, Network};
use crate::presets;
use crate::roofline::{
    build_report, reverse_design, MemoryConfig, ReportOptions, ReverseDesign, ReverseDesignRequest, RooflineReport,
    SpillMode, DEFAULT_BORDERLINE_TOL,
};
use crate::timeline::{simulate, TimelineOptions, TimelineTrace};

const UM2_PER_MM2: f64 = 1e6;

/// Resolves a calibration reference that is not a shipped preset (a file
/// path for the CLI; the API refuses these).
pub type CalibrationLoader<'a> = dyn Fn(&str) -> Result<CalibrationProfile> + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemSpec {
    pub transfer_rate_mhz: f64,
    pub bus_width_bits: u32,
    #[serde(default = "one")]
    pub derating: f64,
}

fn one() -> f64 {
    1.0
}

fn default_k() -> u32 {
    3
}

impl MemSpec {
    pub fn to_config(&self) -> Result<MemoryConfig> {
        let mem = MemoryConfig {
            transfer_rate: self.transfer_rate_mhz * 1e6,
            bus_width: self.bus_width_bits,
            derating: self.derating,
        };
        mem.validate()?;
        Ok(mem)
    }
}

impl Default for MemSpec {
    fn default() -> Self {
        MemSpec { transfer_rate_mhz: 2400.0, bus_width_bits: 64, derating: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CalibrationRef {
    Name(String),
    Inline(Box<CalibrationProfile>),
}

// A string names a preset, anything else is the inline document. Plain
// `untagged` would replace the inline document's error with "did not match
// any variant".
macro_rules! name_or_inline {
    ($ty:ident, $inline:ty, $wrap:expr) => {
        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                match serde_json::Value::deserialize(d)? {
                    serde_json::Value::String(name) => Ok(Self::from_name(name)),
                    v => serde_json::from_value::<$inline>(v).map($wrap).map_err(serde::de::Error::custom),
                }
            }
        }
    };
}

name_or_inline!(CalibrationRef, CalibrationProfile, |p| CalibrationRef::Inline(Box::new(p)));

impl CalibrationRef {
    fn from_name(name: String) -> Self {
        CalibrationRef::Name(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_mm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_um2: Option<f64>,
    pub freq_mhz: f64,
    pub kind: ArithmeticKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_w: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_a: Option<u32>,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<AreaEstimator>,
    #[serde(default)]
    pub mem: MemSpec,
}

impl HardwareSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Parse {
            context: "hardware description".into(),
            message: e.to_string(),
        })?;
        serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            context: format!("hardware description: {}", e.path()),
            message: e.inner().message().to_string(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            context: format!("hardware description: {} (line {}, column {})", e.path(), e.inner().line(), e.inner().column()),
            message: e.inner().to_string(),
        })
    }

    /// Parses JSON when the text starts with `{`, TOML otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_toml(text)
        }
    }

    pub fn area_um2(&self) -> Result<f64> {
        match (self.area_mm2, self.area_um2) {
            (Some(mm2), None) => Ok(mm2 * UM2_PER_MM2),
            (None, Some(um2)) => Ok(um2),
            (Some(_), Some(_)) => Err(Error::invalid("hardware description", "give only one of area_mm2 and area_um2")),
            (None, None) => Err(Error::invalid("hardware description", "missing area_mm2 (or area_um2)")),
        }
    }

    /// Forces fixed-point operand widths.
    pub fn with_bits(mut self, bits: u32) -> Self {
        if self.kind == ArithmeticKind::Fixed {
            self.b_w = Some(bits);
            self.b_a = Some(bits);
        }
        self
    }

    pub fn resolve_with(&self, loader: &CalibrationLoader<'_>) -> Result<(AcceleratorConfig, MemoryConfig)> {
        let profile = match &self.calibration {
            None => CalibrationProfile::tsmc28(),
            Some(CalibrationRef::Inline(p)) => {
                p.validate()?;
                (**p).clone()
            }
            Some(CalibrationRef::Name(name)) => match presets::calibration(name) {
                Err(Error::UnknownPreset(_)) => loader(name)?,
                other => other?,
            },
        };
        let (b_w, b_a) = match self.kind {
            ArithmeticKind::Float32 => (self.b_w.unwrap_or(32), self.b_a.unwrap_or(32)),
            ArithmeticKind::Fixed => match (self.b_w, self.b_a) {
                (Some(w), Some(a)) => (w, a),
                _ => return Err(Error::invalid("hardware description", "fixed kind needs b_w and b_a")),
            },
        };
        let accel = AcceleratorConfig {
            area_budget: self.area_um2()?,
            frequency: self.freq_mhz * 1e6,
            kind: self.kind,
            b_w,
            b_a,
            k: self.k,
            profile,
            explicit_array: self.array.map(|[r, c]| (r, c)),
            estimator: self.estimator.unwrap_or(if b_w == b_a {
                AreaEstimator::QuadraticBitwidth
            } else {
                AreaEstimator::LinearBops
            }),
        };
        accel.validate()?;
        Ok((accel, self.mem.to_config()?))
    }

    /// Resolves against shipped calibration presets only.
    pub fn resolve(&self) -> Result<(AcceleratorConfig, MemoryConfig)> {
        self.resolve_with(&|name| Err(Error::UnknownPreset(name.to_string())))
    }
}

/// A network given inline or by preset name.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum NetworkInput {
    Preset(String),
    Inline(Network),
}

name_or_inline!(NetworkInput, Network, NetworkInput::Inline);

impl NetworkInput {
    fn from_name(name: String) -> Self {
        NetworkInput::Preset(name)
    }

    pub fn resolve(&self) -> Result<Network> {
        match self {
            NetworkInput::Preset(name) => presets::network(name),
            NetworkInput::Inline(net) => {
                net.validate()?;
                Ok(net.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum HardwareInput {
    Preset(String),
    Inline(Box<HardwareSpec>),
}

name_or_inline!(HardwareInput, HardwareSpec, |h| HardwareInput::Inline(Box::new(h)));

impl HardwareInput {
    fn from_name(name: String) -> Self {
        HardwareInput::Preset(name)
    }

    pub fn resolve(&self) -> Result<HardwareSpec> {
        match self {
            HardwareInput::Preset(name) => presets::hardware(name),
            HardwareInput::Inline(spec) => Ok((**spec).clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeRequest {
    pub network: NetworkInput,
    pub hardware: HardwareInput,
    /// Replaces the hardware description's memory section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<MemSpec>,
    /// Partial-sum grouping; defaults to the PE array.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array: Option<[u32; 2]>,
    #[serde(default)]
    pub spill: SpillMode,
    /// Quantizes the network (and a fixed-point datapath) to this width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub borderline_tol: Option<f64>,
}

impl AnalyzeRequest {
    pub fn new(network: NetworkInput, hardware: HardwareInput) -> Self {
        AnalyzeRequest { network, hardware, memory: None, array: None, spill: SpillMode::Onchip, bits: None, borderline_tol: None }
    }
}

/// The resolved inputs of an analysis.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: Network,
    pub accel: AcceleratorConfig,
    pub mem: MemoryConfig,
    pub options: ReportOptions,
}

impl Scenario {
    /// Resolves presets and applies the quantization rule: an explicit
    /// `bits` wins, otherwise the network is quantized to the
    /// accelerator's operand width (32 for floating point).
    pub fn from_request(req: &AnalyzeRequest, loader: &CalibrationLoader<'_>) -> Result<Self> {
        let mut hw = req.hardware.resolve()?;
        if let Some(bits) = req.bits {
            hw = hw.with_bits(bits);
        }
        if let Some(mem) = &req.memory {
            hw.mem = mem.clone();
        }
        let (accel, mem) = hw.resolve_with(loader)?;
        let (b_w, b_a) = req.bits.map(|b| (b, b)).unwrap_or_else(|| accel.operand_bits());
        let network = req.network.resolve()?.with_bits(b_w, b_a)?;
        let options = ReportOptions {
            array: req.array.map(|[r, c]| (r, c)),
            spill: req.spill,
            borderline_tol: req.borderline_tol.unwrap_or(DEFAULT_BORDERLINE_TOL),
        };
        Ok(Scenario { network, accel, mem, options })
    }

    pub fn report(&self) -> Result<RooflineReport> {
        build_report(&self.network, &self.accel, &self.mem, &self.options)
    }
}

pub fn analyze(req: &AnalyzeRequest, loader: &CalibrationLoader<'_>) -> Result<RooflineReport> {
    Scenario::from_request(req, loader)?.report()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeRequest {
    pub hardware: HardwareInput,
}

pub fn size(req: &SizeRequest, loader: &CalibrationLoader<'_>) -> Result<SizingResult> {
    let (accel, _) = req.hardware.resolve()?.resolve_with(loader)?;
    size_pe_array(&accel)
}

/// A layer picked by name or by zero-based position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayerSelector {
    Index(usize),
    Name(String),
}

impl LayerSelector {
    pub fn pick<'n>(&self, network: &'n Network) -> Result<&'n Layer> {
        match self {
            LayerSelector::Index(i) => network.layers.get(*i).ok_or_else(|| {
                Error::invalid("layer selector", format!("index {i} out of range (network has {} layers)", network.layers.len()))
            }),
            LayerSelector::Name(name) => network
                .layer(name)
                .or_else(|| name.parse::<usize>().ok().and_then(|i| network.layers.get(i)))
                .ok_or_else(|| Error::invalid("layer selector", format!("no layer named `{name}` in `{}`", network.name))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineRequest {
    pub network: NetworkInput,
    pub layer: LayerSelector,
    pub bus_bits_per_cycle: u64,
    #[serde(default = "yes")]
    pub per_feature: bool,
    #[serde(default = "one_u32")]
    pub batch: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
}

fn yes() -> bool {
    true
}

fn one_u32() -> u32 {
    1
}

pub fn timeline(req: &TimelineRequest) -> Result<TimelineTrace> {
    let mut network = req.network.resolve()?;
    if let Some(b) = req.bits {
        network = network.with_bits(b, b)?;
    }
    let layer = req.layer.pick(&network)?;
    simulate(layer, &TimelineOptions { bus_bits_per_cycle: req.bus_bits_per_cycle, per_feature: req.per_feature, batch: req.batch })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReverseRequest {
    pub network: NetworkInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_mm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_um2: Option<f64>,
    pub b_w: u32,
    pub b_a: u32,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default)]
    pub mem: MemSpec,
    #[serde(default)]
    pub spill: SpillMode,
    /// Clock at which the bandwidth requirement is reported.
    pub freq_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationRef>,
}

pub fn reverse(req: &ReverseRequest, loader: &CalibrationLoader<'_>) -> Result<ReverseDesign> {
    // reuse the hardware-description resolution for area units and calibration
    let hw = HardwareSpec {
        area_mm2: req.area_mm2,
        area_um2: req.area_um2,
        freq_mhz: req.freq_mhz,
        kind: ArithmeticKind::Fixed,
        b_w: Some(req.b_w),
        b_a: Some(req.b_a),
        k: req.k,
        calibration: req.calibration.clone(),
        array: None,
        estimator: None,
        mem: req.mem.clone(),
    };
    let (accel, mem) = hw.resolve_with(loader)?;
    let network = req.network.resolve()?;
    let design = ReverseDesignRequest {
        area_budget: accel.area_budget,
        b_w: req.b_w,
        b_a: req.b_a,
        k: req.k,
        memory: mem,
        spill: req.spill,
        target_frequency: accel.frequency,
    };
    reverse_design(&network, &design, &accel.profile)
}
