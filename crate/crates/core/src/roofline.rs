//! OPS-based roofline analysis.
//!
//! A layer that emits one output pixel per clock needs
//! `ops_per_pixel · f` operations per second and moves
//! `total_ops / ops_per_bit` bits. The accelerator offers a flat compute
//! ceiling (its capacity) and a diagonal memory ceiling
//! (`ops_per_bit · bandwidth`). A point above either ceiling is bound by it.
//!
//! Splitting channels into groups that fit the PE array ("partial sums")
//! spends `P` clocks per pixel, dividing the required rate by `P` at the
//! cost of re-reading inputs, which lowers the operation density.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hwmodel::{size_pe_array, AcceleratorConfig, AreaEstimator, CalibrationProfile, SizingResult};
use crate::netmodel::{Layer, Network, TrafficModel, TrafficVariant};

pub const DEFAULT_BORDERLINE_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryConfig {
    /// Transfers per second (DDR4-2400 is 2.4e9).
    pub transfer_rate: f64,
    /// Bits per transfer.
    pub bus_width: u32,
    /// Fraction of peak bandwidth actually achieved, in (0, 1].
    pub derating: f64,
}

impl MemoryConfig {
    pub fn new(transfer_rate: f64, bus_width: u32) -> Self {
        MemoryConfig { transfer_rate, bus_width, derating: 1.0 }
    }

    /// DDR4 at 2.4 GT/s on a 64-bit bus.
    pub fn ddr4_2400_x64() -> Self {
        MemoryConfig::new(2.4e9, 64)
    }

    /// Bits per second.
    pub fn bandwidth(&self) -> f64 {
        self.transfer_rate * self.bus_width as f64 * self.derating
    }

    pub fn validate(&self) -> Result<()> {
        if self.transfer_rate.is_nan() || self.transfer_rate <= 0.0 {
            return Err(Error::invalid("memory config", "transfer_rate must be > 0"));
        }
        if self.bus_width == 0 {
            return Err(Error::invalid("memory config", "bus_width must be > 0"));
        }
        if !(self.derating > 0.0 && self.derating <= 1.0) {
            return Err(Error::invalid("memory config", "derating must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointVariant {
    /// One full output pixel per clock.
    Raw,
    /// Channels split across several clocks per pixel.
    PartialSum,
}

impl fmt::Display for PointVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointVariant::Raw => "raw",
            PointVariant::PartialSum => "partial-sum",
        })
    }
}

/// Where partial sums live between input-group passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpillMode {
    #[default]
    Onchip,
    Spill,
}

impl SpillMode {
    pub fn traffic_variant(self) -> TrafficVariant {
        match self {
            SpillMode::Onchip => TrafficVariant::GroupedOnchip,
            SpillMode::Spill => TrafficVariant::GroupedSpill,
        }
    }
}

impl fmt::Display for SpillMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpillMode::Onchip => "onchip",
            SpillMode::Spill => "spill",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RooflinePoint {
    pub layer_name: String,
    pub variant: PointVariant,
    pub ops_per_bit: f64,
    /// Operations per second needed to keep up with the clock.
    pub required_ops: f64,
    /// Clocks spent per output pixel.
    pub passes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Feasible,
    ComputeBound,
    MemoryBound,
    ComputeAndMemoryBound,
}

impl Classification {
    pub fn from_flags(compute_bound: bool, memory_bound: bool) -> Self {
        match (compute_bound, memory_bound) {
            (false, false) => Classification::Feasible,
            (true, false) => Classification::ComputeBound,
            (false, true) => Classification::MemoryBound,
            (true, true) => Classification::ComputeAndMemoryBound,
        }
    }

    pub fn is_compute_bound(self) -> bool {
        matches!(self, Classification::ComputeBound | Classification::ComputeAndMemoryBound)
    }

    pub fn is_memory_bound(self) -> bool {
        matches!(self, Classification::MemoryBound | Classification::ComputeAndMemoryBound)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Feasible => "feasible",
            Classification::ComputeBound => "compute-bound",
            Classification::MemoryBound => "memory-bound",
            Classification::ComputeAndMemoryBound => "compute-and-memory-bound",
        })
    }
}

/// Required operations per second for one pixel per clock.
pub fn layer_required_ops(layer: &Layer, frequency: f64) -> Result<f64> {
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::invalid("frequency", format!("must be > 0, got {frequency}")));
    }
    Ok(layer.ops_per_pixel() as f64 * frequency)
}

pub fn raw_point(layer: &Layer, frequency: f64) -> Result<RooflinePoint> {
    Ok(RooflinePoint {
        layer_name: layer.name.clone(),
        variant: PointVariant::Raw,
        ops_per_bit: layer.ops_per_bit(&TrafficModel::single_pass()),
        required_ops: layer_required_ops(layer, frequency)?,
        passes: 1,
    })
}

/// Clocks per pixel when `n` inputs and `m` outputs are split into groups
/// of `g_in` and `g_out`.
pub fn partial_sum_passes(layer: &Layer, (g_in, g_out): (u32, u32)) -> u64 {
    layer.n.div_ceil(g_in) as u64 * layer.m.div_ceil(g_out) as u64
}

/// Point for a layer computed on a `g_in × g_out` array.
pub fn partial_sum_transform(
    layer: &Layer,
    (g_in, g_out): (u32, u32),
    frequency: f64,
    spill: SpillMode,
) -> Result<RooflinePoint> {
    let model = TrafficModel::grouped(spill.traffic_variant(), g_in, g_out)?;
    let passes = partial_sum_passes(layer, (g_in, g_out));
    Ok(RooflinePoint {
        layer_name: layer.name.clone(),
        variant: PointVariant::PartialSum,
        ops_per_bit: layer.ops_per_bit(&model),
        required_ops: layer_required_ops(layer, frequency)? / passes as f64,
        passes,
    })
}

/// Returns the classification and the borderline flag (required rate within
/// `borderline_tol` of capacity, either side).
pub fn classify_against(point: &RooflinePoint, capacity: f64, bandwidth: f64, borderline_tol: f64) -> (Classification, bool) {
    let compute_bound = point.required_ops > capacity;
    let memory_bound = point.required_ops > point.ops_per_bit * bandwidth;
    let borderline = (point.required_ops - capacity).abs() / capacity <= borderline_tol;
    (Classification::from_flags(compute_bound, memory_bound), borderline)
}

pub fn classify(point: &RooflinePoint, sizing: &SizingResult, mem: &MemoryConfig, borderline_tol: f64) -> (Classification, bool) {
    classify_against(point, sizing.capacity, mem.bandwidth(), borderline_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedPoint {
    #[serde(flatten)]
    pub point: RooflinePoint,
    pub classification: Classification,
    pub borderline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Grouping for the partial-sum points; defaults to the accelerator's
    /// PE array.
    pub array: Option<(u32, u32)>,
    pub spill: SpillMode,
    pub borderline_tol: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { array: None, spill: SpillMode::Onchip, borderline_tol: DEFAULT_BORDERLINE_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RooflineReport {
    pub network: String,
    pub frequency: f64,
    pub sizing: SizingResult,
    /// Operations per second.
    pub compute_ceiling: f64,
    /// Bits per second; the memory ceiling is `ops_per_bit · bandwidth`.
    pub bandwidth: f64,
    /// Operation density where the two ceilings meet.
    pub ridge_point: f64,
    pub array: (u32, u32),
    pub spill: SpillMode,
    pub borderline_tol: f64,
    /// Raw then partial-sum point for each layer, in layer order.
    pub points: Vec<ClassifiedPoint>,
}

impl RooflineReport {
    /// Memory ceiling at the given operation density.
    pub fn memory_ceiling(&self, ops_per_bit: f64) -> f64 {
        ops_per_bit * self.bandwidth
    }

    pub fn points_of(&self, variant: PointVariant) -> impl Iterator<Item = &ClassifiedPoint> {
        self.points.iter().filter(move |p| p.point.variant == variant)
    }
}

/// Places every layer of `network` on the roofline of `accel` and `mem`.
///
/// Layer bitwidths are used as given; quantize the network to the
/// accelerator's operand width first if they should match.
pub fn build_report(
    network: &Network,
    accel: &AcceleratorConfig,
    mem: &MemoryConfig,
    options: &ReportOptions,
) -> Result<RooflineReport> {
    network.validate()?;
    mem.validate()?;
    if options.borderline_tol.is_nan() || options.borderline_tol < 0.0 {
        return Err(Error::invalid("report options", "borderline_tol must be >= 0"));
    }
    let sizing = size_pe_array(accel)?;
    let array = options.array.unwrap_or((sizing.array_rows, sizing.array_cols));
    if array.0 == 0 || array.1 == 0 {
        return Err(Error::invalid("report options", "array dims must be >= 1"));
    }
    let capacity = sizing.capacity;
    let bandwidth = mem.bandwidth();

    let mut points = Vec::with_capacity(network.layers.len() * 2);
    for layer in &network.layers {
        for point in [
            raw_point(layer, accel.frequency)?,
            partial_sum_transform(layer, array, accel.frequency, options.spill)?,
        ] {
            let (classification, borderline) = classify_against(&point, capacity, bandwidth, options.borderline_tol);
            points.push(ClassifiedPoint { point, classification, borderline });
        }
    }

    Ok(RooflineReport {
        network: network.name.clone(),
        frequency: accel.frequency,
        compute_ceiling: capacity,
        bandwidth,
        ridge_point: capacity / bandwidth,
        array,
        spill: options.spill,
        borderline_tol: options.borderline_tol,
        sizing,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseDesignRequest {
    /// µm².
    pub area_budget: f64,
    pub b_w: u32,
    pub b_a: u32,
    /// Kernel side of the PEs.
    pub k: u32,
    pub memory: MemoryConfig,
    pub spill: SpillMode,
    /// Clock used to size the bandwidth requirement, Hz.
    pub target_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReverseLayer {
    pub name: String,
    pub passes: u64,
    pub ops_per_bit: f64,
    /// Highest clock at which this layer stays under the memory ceiling.
    pub max_frequency: Option<f64>,
    /// Bandwidth this layer needs at the target clock, bits/s.
    pub required_bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReverseDesign {
    /// Array sized from the area budget, evaluated at the target clock.
    pub sizing: SizingResult,
    /// Highest clock with no memory-bound partial-sum point; `None` when
    /// bandwidth is unbounded (then only capacity limits throughput).
    pub max_frequency: Option<f64>,
    pub limiting_layer: Option<String>,
    /// Smallest bandwidth that keeps every layer off the memory ceiling at
    /// the target clock, bits/s.
    pub required_bandwidth: f64,
    pub target_frequency: f64,
    pub layers: Vec<ReverseLayer>,
}

/// Start from area: size the array, then derive the clock and memory
/// bandwidth that keep it fed.
///
/// With equal operand widths the quadratic bitwidth fit sizes the PEs;
/// mixed widths fall back to the linear BOPS fit.
pub fn reverse_design(network: &Network, req: &ReverseDesignRequest, profile: &CalibrationProfile) -> Result<ReverseDesign> {
    network.validate()?;
    req.memory.validate()?;
    let mut accel = AcceleratorConfig::fixed(req.area_budget, req.target_frequency, req.b_w, req.k, profile.clone());
    accel.b_a = req.b_a;
    if req.b_w != req.b_a {
        accel.estimator = AreaEstimator::LinearBops;
    }
    let sizing = size_pe_array(&accel)?;
    let array = (sizing.array_rows, sizing.array_cols);
    let bandwidth = req.memory.bandwidth();

    let mut layers = Vec::with_capacity(network.layers.len());
    for layer in &network.layers {
        let layer = layer.clone().with_bits(req.b_w, req.b_a);
        let point = partial_sum_transform(&layer, array, req.target_frequency, req.spill)?;
        // memory-bound iff ops_per_pixel·f / P > ops_per_bit·bandwidth
        let max_frequency = bandwidth
            .is_finite()
            .then(|| point.ops_per_bit * bandwidth * point.passes as f64 / layer.ops_per_pixel() as f64);
        if let Some(f) = max_frequency {
            if f.is_nan() || f <= 0.0 {
                return Err(Error::Infeasible(format!("layer `{}` is memory-bound at every clock", layer.name)));
            }
        }
        layers.push(ReverseLayer {
            name: layer.name.clone(),
            passes: point.passes,
            ops_per_bit: point.ops_per_bit,
            max_frequency,
            required_bandwidth: point.required_ops / point.ops_per_bit,
        });
    }

    let limiting = layers
        .iter()
        .filter_map(|l| l.max_frequency.map(|f| (f, l)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ReverseDesign {
        sizing,
        max_frequency: limiting.map(|(f, _)| f),
        limiting_layer: limiting.map(|(_, l)| l.name.clone()),
        required_bandwidth: layers.iter().map(|l| l.required_bandwidth).fold(0.0, f64::max),
        target_frequency: req.target_frequency,
        layers,
    })
}
