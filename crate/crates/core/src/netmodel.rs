//! Networks, layers and per-layer arithmetic work and memory traffic.
//!
//! All counts are exact integers. The `log2(n·k²)` term of the BOPS formula
//! is the accumulator growth and is rounded up to a whole bit
//! ([`Layer::bops`]); [`Layer::bops_exact`] keeps the real-valued logarithm
//! for comparisons against published numbers that do not round.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_BITWIDTH: u32 = 64;
const MAX_ACCUMULATOR_BITS: u32 = 256;

/// `ceil(log2(x))` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// One convolutional layer.
///
/// `n` input features are convolved with `m·n` kernels of `k×k` to produce
/// `m` output features of `out_h×out_w`. Weights use `b_w` bits and
/// activations (inputs and outputs) use `b_a` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LayerDoc")]
pub struct Layer {
    pub name: String,
    pub k: u32,
    pub n: u32,
    pub m: u32,
    pub out_h: u32,
    pub out_w: u32,
    pub in_h: u32,
    pub in_w: u32,
    pub b_w: u32,
    pub b_a: u32,
}

/// On-disk form of a layer; input dims are optional.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDoc {
    pub name: String,
    pub k: u32,
    pub n: u32,
    pub m: u32,
    pub out_h: u32,
    pub out_w: u32,
    #[serde(default)]
    pub in_h: Option<u32>,
    #[serde(default)]
    pub in_w: Option<u32>,
    pub b_w: u32,
    pub b_a: u32,
}

impl TryFrom<LayerDoc> for Layer {
    type Error = Error;

    fn try_from(doc: LayerDoc) -> Result<Self> {
        let layer = Layer {
            in_h: doc.in_h.unwrap_or(doc.out_h),
            in_w: doc.in_w.unwrap_or(doc.out_w),
            name: doc.name,
            k: doc.k,
            n: doc.n,
            m: doc.m,
            out_h: doc.out_h,
            out_w: doc.out_w,
            b_w: doc.b_w,
            b_a: doc.b_a,
        };
        layer.validate()?;
        Ok(layer)
    }
}

impl Layer {
    /// A stride-1 layer with a square kernel; input dims equal output dims.
    pub fn new(name: impl Into<String>, k: u32, n: u32, m: u32, out: (u32, u32), b_w: u32, b_a: u32) -> Self {
        Layer {
            name: name.into(),
            k,
            n,
            m,
            out_h: out.0,
            out_w: out.1,
            in_h: out.0,
            in_w: out.1,
            b_w,
            b_a,
        }
    }

    pub fn with_input(mut self, in_h: u32, in_w: u32) -> Self {
        self.in_h = in_h;
        self.in_w = in_w;
        self
    }

    pub fn with_bits(mut self, b_w: u32, b_a: u32) -> Self {
        self.b_w = b_w;
        self.b_a = b_a;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let what = || format!("layer `{}`", self.name);
        for (field, v) in [
            ("k", self.k),
            ("n", self.n),
            ("m", self.m),
            ("out_h", self.out_h),
            ("out_w", self.out_w),
            ("in_h", self.in_h),
            ("in_w", self.in_w),
        ] {
            if v == 0 {
                return Err(Error::invalid(what(), format!("{field} must be >= 1")));
            }
        }
        for (field, v) in [("b_w", self.b_w), ("b_a", self.b_a)] {
            if !(1..=MAX_BITWIDTH).contains(&v) {
                return Err(Error::invalid(what(), format!("{field} must be in [1, {MAX_BITWIDTH}], got {v}")));
            }
        }

        // Every count this module produces must fit in a u64, including the
        // worst case of the grouped traffic variants.
        let (k, n, m) = (self.k as u128, self.n as u128, self.m as u128);
        let out_px = self.out_h as u128 * self.out_w as u128;
        let in_px = self.in_h as u128 * self.in_w as u128;
        let widest_acc = (self.b_a + self.b_w + 64).max(MAX_ACCUMULATOR_BITS) as u128;
        let bounds = [
            n * m * (k * k + 1) * out_px,
            m * n * k * k * (self.b_a as u128 * self.b_w as u128 + widest_acc),
            n * in_px * self.b_a as u128 * m,
            2 * n * m * out_px * widest_acc,
        ];
        if bounds.iter().any(|&b| b > u64::MAX as u128) {
            return Err(Error::invalid(what(), "layer too large: counts overflow 64 bits"));
        }
        Ok(())
    }

    fn kernel_area(&self) -> u64 {
        self.k as u64 * self.k as u64
    }

    /// MAC operations per output pixel, `n·m·(k²+1)`.
    pub fn ops_per_pixel(&self) -> u64 {
        self.n as u64 * self.m as u64 * (self.kernel_area() + 1)
    }

    /// MAC operations for the whole output feature map.
    pub fn total_ops(&self) -> u64 {
        self.ops_per_pixel() * self.out_h as u64 * self.out_w as u64
    }

    /// Accumulator width needed to hold a full dot product without overflow,
    /// `b_a + b_w + ceil(log2(n·k²))`.
    pub fn accumulator_bits(&self) -> u32 {
        self.b_a + self.b_w + ceil_log2(self.n as u64 * self.kernel_area())
    }

    fn macs(&self) -> u64 {
        self.m as u64 * self.n as u64 * self.kernel_area()
    }

    /// Bit operations, `m·n·k²·(b_a·b_w + b_a + b_w + ceil(log2(n·k²)))`.
    pub fn bops(&self) -> u64 {
        let per_mac = self.b_a as u64 * self.b_w as u64
            + self.b_a as u64
            + self.b_w as u64
            + ceil_log2(self.n as u64 * self.kernel_area()) as u64;
        self.macs() * per_mac
    }

    /// BOPS with the real-valued `log2(n·k²)`.
    pub fn bops_exact(&self) -> f64 {
        let per_mac = (self.b_a as f64) * (self.b_w as f64)
            + self.b_a as f64
            + self.b_w as f64
            + ((self.n as u64 * self.kernel_area()) as f64).log2();
        self.macs() as f64 * per_mac
    }

    /// The competing "compute cost" metric, `m·n·k²·(b_a+b_w)`.
    pub fn compute_cost(&self) -> u64 {
        self.macs() * (self.b_a as u64 + self.b_w as u64)
    }

    pub fn traffic(&self, model: &TrafficModel) -> TrafficBreakdown {
        let weight_bits = self.macs() * self.b_w as u64;
        let mut input_bits = self.n as u64 * self.in_h as u64 * self.in_w as u64 * self.b_a as u64;
        let output_bits = self.m as u64 * self.out_h as u64 * self.out_w as u64 * self.b_a as u64;
        let mut spill_bits = 0;

        match model.variant {
            TrafficVariant::SinglePass => {}
            TrafficVariant::GroupedOnchip | TrafficVariant::GroupedSpill => {
                let out_groups = self.m.div_ceil(model.group_out.max(1)) as u64;
                input_bits *= out_groups;
                if model.variant == TrafficVariant::GroupedSpill {
                    let in_passes = self.n.div_ceil(model.group_in.max(1)) as u64;
                    let acc = model.accumulator_bits.unwrap_or_else(|| self.accumulator_bits()) as u64;
                    spill_bits =
                        2 * (in_passes - 1) * self.m as u64 * self.out_h as u64 * self.out_w as u64 * acc;
                }
            }
        }
        TrafficBreakdown::new(weight_bits, input_bits, output_bits, spill_bits)
    }

    /// Operation density: total ops over total bits moved.
    pub fn ops_per_bit(&self, model: &TrafficModel) -> f64 {
        self.total_ops() as f64 / self.traffic(model).total_bits() as f64
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}x{} conv {}->{} @ {}x{} (w{}/a{})",
            self.name, self.k, self.k, self.n, self.m, self.out_h, self.out_w, self.b_w, self.b_a
        )
    }
}

/// Bits moved over the memory bus for one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TrafficBreakdown {
    weight_bits: u64,
    input_bits: u64,
    output_bits: u64,
    spill_bits: u64,
    total_bits: u64,
}

impl TrafficBreakdown {
    pub fn new(weight_bits: u64, input_bits: u64, output_bits: u64, spill_bits: u64) -> Self {
        TrafficBreakdown {
            weight_bits,
            input_bits,
            output_bits,
            spill_bits,
            total_bits: weight_bits + input_bits + output_bits + spill_bits,
        }
    }

    pub fn weight_bits(&self) -> u64 {
        self.weight_bits
    }
    pub fn input_bits(&self) -> u64 {
        self.input_bits
    }
    pub fn output_bits(&self) -> u64 {
        self.output_bits
    }
    pub fn spill_bits(&self) -> u64 {
        self.spill_bits
    }
    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }
}

impl std::ops::Add for TrafficBreakdown {
    type Output = TrafficBreakdown;

    fn add(self, rhs: Self) -> Self {
        TrafficBreakdown::new(
            self.weight_bits + rhs.weight_bits,
            self.input_bits + rhs.input_bits,
            self.output_bits + rhs.output_bits,
            self.spill_bits + rhs.spill_bits,
        )
    }
}

impl std::iter::Sum for TrafficBreakdown {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(TrafficBreakdown::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrafficVariant {
    /// Every weight and activation crosses the bus exactly once.
    #[default]
    SinglePass,
    /// Channels processed in groups, output groups outermost. Inputs are
    /// re-read once per output group; partial sums stay on chip.
    GroupedOnchip,
    /// As `GroupedOnchip`, but partial sums are written out and read back
    /// between input-group passes.
    GroupedSpill,
}

impl fmt::Display for TrafficVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrafficVariant::SinglePass => "single-pass",
            TrafficVariant::GroupedOnchip => "grouped-onchip",
            TrafficVariant::GroupedSpill => "grouped-spill",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficModel {
    pub variant: TrafficVariant,
    /// Input channels per pass (grouped variants only).
    pub group_in: u32,
    /// Output channels per pass (grouped variants only).
    pub group_out: u32,
    /// Overrides [`Layer::accumulator_bits`] for spilled partial sums.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accumulator_bits: Option<u32>,
}

impl Default for TrafficModel {
    fn default() -> Self {
        TrafficModel::single_pass()
    }
}

impl TrafficModel {
    pub fn single_pass() -> Self {
        TrafficModel { variant: TrafficVariant::SinglePass, group_in: 1, group_out: 1, accumulator_bits: None }
    }

    pub fn grouped(variant: TrafficVariant, group_in: u32, group_out: u32) -> Result<Self> {
        let model = TrafficModel { variant, group_in, group_out, accumulator_bits: None };
        model.validate()?;
        Ok(model)
    }

    pub fn with_accumulator_bits(mut self, bits: u32) -> Self {
        self.accumulator_bits = Some(bits);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant != TrafficVariant::SinglePass && (self.group_in == 0 || self.group_out == 0) {
            return Err(Error::invalid("traffic model", "grouped variants need group_in >= 1 and group_out >= 1"));
        }
        if let Some(bits) = self.accumulator_bits {
            if !(1..=MAX_ACCUMULATOR_BITS).contains(&bits) {
                return Err(Error::invalid(
                    "traffic model",
                    format!("accumulator_bits must be in [1, {MAX_ACCUMULATOR_BITS}]"),
                ));
            }
        }
        Ok(())
    }
}

/// An ordered list of convolutional layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc")]
pub struct Network {
    pub name: String,
    pub layers: Vec<Layer>,
    /// Free-form annotations (e.g. reported accuracy), carried verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Map<String, serde_json::Value>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub name: String,
    pub layers: Vec<LayerDoc>,
    #[serde(default)]
    pub metadata: Option<serde_json::Map<String, serde_json::Value>>,
}

impl TryFrom<NetworkDoc> for Network {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        let layers = doc.layers.into_iter().map(Layer::try_from).collect::<Result<Vec<_>>>()?;
        let network = Network { name: doc.name, layers, metadata: doc.metadata };
        network.validate()?;
        Ok(network)
    }
}

impl Network {
    pub fn new(name: impl Into<String>, layers: Vec<Layer>) -> Result<Self> {
        let network = Network { name: name.into(), layers, metadata: None };
        network.validate()?;
        Ok(network)
    }

    pub fn validate(&self) -> Result<()> {
        let what = || format!("network `{}`", self.name);
        if self.layers.is_empty() {
            return Err(Error::invalid(what(), "must contain at least one layer"));
        }
        let mut seen = HashSet::new();
        for layer in &self.layers {
            layer.validate()?;
            if !seen.insert(layer.name.as_str()) {
                return Err(Error::invalid(what(), format!("duplicate layer name `{}`", layer.name)));
            }
        }
        Ok(())
    }

    /// Same topology with every layer quantized to `b_w`/`b_a`.
    pub fn with_bits(&self, b_w: u32, b_a: u32) -> Result<Network> {
        let mut out = self.clone();
        for layer in &mut out.layers {
            layer.b_w = b_w;
            layer.b_a = b_a;
        }
        out.validate()?;
        Ok(out)
    }

    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    /// Network BOPS: the sum over layers.
    pub fn bops(&self) -> u64 {
        self.layers.iter().map(Layer::bops).sum()
    }

    pub fn totals(&self, model: &TrafficModel) -> NetworkTotals {
        let layers: Vec<LayerMetrics> = self.layers.iter().map(|l| LayerMetrics::of(l, model)).collect();
        let traffic: TrafficBreakdown = layers.iter().map(|l| l.traffic).sum();
        let ops = layers.iter().map(|l| l.ops).sum::<u64>();
        NetworkTotals {
            ops,
            bops: layers.iter().map(|l| l.bops).sum(),
            compute_cost: layers.iter().map(|l| l.compute_cost).sum(),
            ops_per_bit: ops as f64 / traffic.total_bits() as f64,
            traffic,
            layers,
        }
    }
}

/// Parses a network description (JSON), resolving input-dim defaults.
pub fn parse_network(text: &str) -> Result<Network> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: NetworkDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        let path = e.path().to_string();
        let context = if inner.line() > 0 {
            format!("{path} (line {}, column {})", inner.line(), inner.column())
        } else {
            path
        };
        Error::Parse { context, message: inner.to_string() }
    })?;
    Network::try_from(doc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerMetrics {
    pub name: String,
    pub ops: u64,
    pub bops: u64,
    pub compute_cost: u64,
    pub traffic: TrafficBreakdown,
    pub ops_per_bit: f64,
}

impl LayerMetrics {
    pub fn of(layer: &Layer, model: &TrafficModel) -> Self {
        let traffic = layer.traffic(model);
        LayerMetrics {
            name: layer.name.clone(),
            ops: layer.total_ops(),
            bops: layer.bops(),
            compute_cost: layer.compute_cost(),
            ops_per_bit: layer.total_ops() as f64 / traffic.total_bits() as f64,
            traffic,
        }
    }
}

/// Per-layer metrics in layer order plus network aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkTotals {
    pub layers: Vec<LayerMetrics>,
    pub ops: u64,
    pub bops: u64,
    pub compute_cost: u64,
    pub traffic: TrafficBreakdown,
    pub ops_per_bit: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer11(b: u32) -> Layer {
        Layer::new("layer11", 3, 256, 256, (14, 14), b, b)
    }

    fn layer2(b: u32) -> Layer {
        Layer::new("layer2", 3, 64, 64, (56, 56), b, b)
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(576), 10);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(2304), 12);
    }

    #[test]
    fn ops_per_pixel_examples() {
        assert_eq!(layer11(8).ops_per_pixel(), 655_360);
        assert_eq!(layer2(8).ops_per_pixel(), 40_960);
        assert_eq!(Layer::new("t", 1, 1, 1, (1, 1), 1, 1).ops_per_pixel(), 2);
    }

    #[test]
    fn total_ops_examples() {
        assert_eq!(layer11(8).total_ops(), 128_450_560);
        assert_eq!(layer2(8).total_ops(), 128_450_560);
        assert_eq!(Layer::new("t", 1, 1, 1, (1, 1), 1, 1).total_ops(), 2);
    }

    #[test]
    fn accumulator_examples() {
        assert_eq!(Layer::new("a", 3, 256, 1, (1, 1), 4, 4).accumulator_bits(), 20);
        assert_eq!(Layer::new("b", 1, 1, 1, (1, 1), 8, 8).accumulator_bits(), 16);
        assert_eq!(Layer::new("c", 3, 64, 1, (1, 1), 2, 2).accumulator_bits(), 14);
    }

    #[test]
    fn bops_and_compute_cost_examples() {
        assert_eq!(layer11(4).bops(), 21_233_664);
        assert_eq!(Layer::new("t", 1, 1, 1, (1, 1), 1, 1).bops(), 3);
        assert_eq!(Layer::new("s", 3, 16, 16, (1, 1), 8, 8).bops(), 202_752);

        assert_eq!(layer11(4).compute_cost(), 4_718_592);
        assert_eq!(Layer::new("t", 1, 1, 1, (1, 1), 1, 1).compute_cost(), 2);
        assert_eq!(Layer::new("s", 3, 16, 16, (1, 1), 8, 8).compute_cost(), 36_864);
    }

    #[test]
    fn bops_exact_matches_when_log_is_integral() {
        // n·k² = 16·1 is a power of two
        let l = Layer::new("p", 1, 16, 4, (1, 1), 4, 4);
        assert_eq!(l.bops_exact(), l.bops() as f64);
        assert!(layer11(4).bops_exact() < layer11(4).bops() as f64);
    }

    #[test]
    fn single_pass_traffic_examples() {
        let t = layer11(32).traffic(&TrafficModel::single_pass());
        assert_eq!(t.weight_bits(), 18_874_368);
        assert_eq!(t.input_bits(), 1_605_632);
        assert_eq!(t.output_bits(), 1_605_632);
        assert_eq!(t.spill_bits(), 0);
        assert_eq!(t.total_bits(), 22_085_632);

        assert_eq!(layer2(32).traffic(&TrafficModel::single_pass()).total_bits(), 14_024_704);
    }

    #[test]
    fn ops_per_bit_matches_published_tables() {
        let sp = TrafficModel::single_pass();
        assert!((layer11(32).ops_per_bit(&sp) - 5.82).abs() < 0.01);
        assert!((layer11(8).ops_per_bit(&sp) - 23.26).abs() < 0.01);
        assert!((layer2(4).ops_per_bit(&sp) - 73.27).abs() < 0.01);
    }

    #[test]
    fn single_group_degenerates_to_single_pass() {
        let l = layer2(4);
        let sp = l.traffic(&TrafficModel::single_pass());
        for variant in [TrafficVariant::GroupedOnchip, TrafficVariant::GroupedSpill] {
            let g = l.traffic(&TrafficModel::grouped(variant, l.n, l.m).unwrap());
            assert_eq!(g, sp);
        }
    }

    #[test]
    fn grouped_spill_uses_override() {
        let l = layer11(4);
        let base = TrafficModel::grouped(TrafficVariant::GroupedSpill, 16, 16).unwrap();
        let t = l.traffic(&base);
        // 15 extra input passes, each writing and re-reading m·H·W 20-bit sums
        assert_eq!(t.spill_bits(), 2 * 15 * 256 * 196 * 20);
        let t32 = l.traffic(&base.with_accumulator_bits(32));
        assert_eq!(t32.spill_bits(), 2 * 15 * 256 * 196 * 32);
    }

    #[test]
    fn grouped_requires_positive_groups() {
        assert!(TrafficModel::grouped(TrafficVariant::GroupedOnchip, 0, 4).is_err());
        assert!(TrafficModel::grouped(TrafficVariant::GroupedSpill, 4, 0).is_err());
    }

    #[test]
    fn parse_resolves_input_defaults() {
        let doc = r#"{"name":"one","layers":[{"name":"c","k":3,"n":64,"m":64,"out_h":56,"out_w":56,"b_w":4,"b_a":4}]}"#;
        let net = parse_network(doc).unwrap();
        assert_eq!(net.layers.len(), 1);
        assert_eq!(net.layers[0].in_h, 56);
        assert_eq!(net.layers[0].in_w, 56);
    }

    #[test]
    fn parse_rejects_zero_features() {
        let doc = r#"{"name":"bad","layers":[{"name":"c","k":3,"n":0,"m":64,"out_h":56,"out_w":56,"b_w":4,"b_a":4}]}"#;
        let err = parse_network(doc).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }), "{err}");
        assert!(err.to_string().contains("n must be >= 1"), "{err}");
    }

    #[test]
    fn parse_rejects_unknown_fields_with_context() {
        let doc = "{\"name\":\"x\",\n\"layers\":[{\"name\":\"c\",\"k\":3,\"n\":1,\"m\":1,\"out_h\":1,\"out_w\":1,\"b_w\":4,\"b_a\":4,\"stride\":2}]}";
        let err = parse_network(doc).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(msg.contains("layers[0]"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("stride"), "{msg}");
    }

    #[test]
    fn network_invariants() {
        assert!(Network::new("empty", vec![]).is_err());
        let dup = vec![layer2(4), layer2(4)];
        let err = Network::new("dup", dup).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        assert!(Network::new("wide", vec![layer2(65)]).is_err());
        assert!(Network::new("huge", vec![Layer::new("h", 3, u32::MAX, u32::MAX, (1 << 20, 1 << 20), 8, 8)]).is_err());
    }

    #[test]
    fn totals_are_additive() {
        let one = Network::new("one", vec![layer2(4)]).unwrap();
        let two = Network::new("two", vec![layer2(4), Layer { name: "again".into(), ..layer2(4) }]).unwrap();
        let sp = TrafficModel::single_pass();
        let t1 = one.totals(&sp);
        let t2 = two.totals(&sp);
        assert_eq!(t1.bops, layer2(4).bops());
        assert_eq!(t1.ops, layer2(4).total_ops());
        assert_eq!(t2.bops, 2 * t1.bops);
        assert_eq!(t2.ops, 2 * t1.ops);
        assert_eq!(t2.compute_cost, 2 * t1.compute_cost);
        assert_eq!(t2.traffic.total_bits(), 2 * t1.traffic.total_bits());
        assert_eq!(t2.ops_per_bit, t1.ops_per_bit);
        assert_eq!(t2.layers[1].name, "again");
    }
}
