//! Cycle-level memory access pattern of one convolutional layer.
//!
//! The layer runs in three phases on a single shared memory bus:
//!
//! 1. **Prefetch.** Weights and the first `k` input rows are read at full
//!    bus rate. Nothing is computed yet.
//! 2. **Steady state.** One output pixel per cycle. Each pixel needs one new
//!    input value (per input feature when `per_feature` is set) and writes
//!    `m` output values. Every output row after the first starts with `k`
//!    extra input values. A pixel whose traffic exceeds the bus width takes
//!    several cycles; the extra cycles are stalls.
//! 3. **Drain.** Input not yet consumed when the last pixel is done
//!    (strided layers, or `per_feature = false`) is read at bus rate.
//!
//! Steady-state reads never exceed the input left after prefetch, and the
//! drain reads whatever is left, so with `batch = 1` the trace moves exactly
//! the single-pass traffic of [`Layer::traffic`].

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::Layer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineOptions {
    pub bus_bits_per_cycle: u64,
    /// Steady-state input demand is one value per input feature (`true`) or
    /// one value in total (`false`).
    pub per_feature: bool,
    /// Inputs sharing one weight load; weight traffic is divided by this.
    pub batch: u32,
}

impl TimelineOptions {
    pub fn new(bus_bits_per_cycle: u64) -> Self {
        TimelineOptions { bus_bits_per_cycle, per_feature: true, batch: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Prefetch,
    Steady,
    Drain,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Prefetch => "prefetch",
            Phase::Steady => "steady",
            Phase::Drain => "drain",
        })
    }
}

/// Run of cycles `[cycle_start, cycle_end)` moving the same number of bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub cycle_start: u64,
    pub cycle_end: u64,
    pub bits_per_cycle: u64,
    pub phase: Phase,
}

impl Segment {
    pub fn cycles(&self) -> u64 {
        self.cycle_end - self.cycle_start
    }

    pub fn bits(&self) -> u64 {
        self.cycles() * self.bits_per_cycle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineTrace {
    pub layer_name: String,
    pub bus_bits_per_cycle: u64,
    pub prefetch_bits: u64,
    /// First cycle after prefetch.
    pub prefetch_end: u64,
    /// First cycle of each output row.
    pub row_starts: Vec<u64>,
    pub segments: Vec<Segment>,
    pub total_cycles: u64,
    pub total_bits: u64,
    /// Cycles where a pixel waited on the bus.
    pub stall_cycles: u64,
    /// Fraction of bus capacity used over the whole trace.
    pub utilization: f64,
}

impl TimelineTrace {
    /// Run-length CSV: `cycle_start,cycle_end,bits_per_cycle,phase`, end
    /// exclusive.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle_start,cycle_end,bits_per_cycle,phase\n");
        for s in &self.segments {
            let _ = writeln!(out, "{},{},{},{}", s.cycle_start, s.cycle_end, s.bits_per_cycle, s.phase);
        }
        out
    }

    pub fn cycles_in(&self, phase: Phase) -> u64 {
        self.segments.iter().filter(|s| s.phase == phase).map(Segment::cycles).sum()
    }
}

struct Recorder {
    bus: u64,
    cycle: u64,
    bits: u64,
    segments: Vec<Segment>,
}

impl Recorder {
    fn push(&mut self, bits_per_cycle: u64, cycles: u64, phase: Phase) {
        if cycles == 0 {
            return;
        }
        match self.segments.last_mut() {
            Some(last) if last.phase == phase && last.bits_per_cycle == bits_per_cycle && last.cycle_end == self.cycle => {
                last.cycle_end += cycles;
            }
            _ => self.segments.push(Segment {
                cycle_start: self.cycle,
                cycle_end: self.cycle + cycles,
                bits_per_cycle,
                phase,
            }),
        }
        self.cycle += cycles;
        self.bits += bits_per_cycle * cycles;
    }

    /// Moves `bits` at bus rate, returning the cycles taken (at least one).
    fn transfer(&mut self, bits: u64, phase: Phase) -> u64 {
        if bits <= self.bus {
            self.push(bits, 1, phase);
            return 1;
        }
        let full = bits / self.bus;
        let rem = bits % self.bus;
        self.push(self.bus, full, phase);
        self.push(rem, (rem > 0) as u64, phase);
        full + (rem > 0) as u64
    }
}

pub fn simulate(layer: &Layer, options: &TimelineOptions) -> Result<TimelineTrace> {
    layer.validate()?;
    if options.bus_bits_per_cycle == 0 {
        return Err(Error::invalid("timeline", "bus_bits_per_cycle must be > 0"));
    }
    if options.batch == 0 {
        return Err(Error::invalid("timeline", "batch must be >= 1"));
    }

    let b_a = layer.b_a as u64;
    let n = layer.n as u64;
    let in_w = layer.in_w as u64;
    let k = layer.k as u64;

    let weight_bits = (n * layer.m as u64 * k * k * layer.b_w as u64).div_ceil(options.batch as u64);
    let input_total = n * layer.in_h as u64 * in_w * b_a;
    let first_rows = n * k.min(layer.in_h as u64) * in_w * b_a;
    let prefetch_bits = weight_bits + first_rows;

    let mut rec = Recorder { bus: options.bus_bits_per_cycle, cycle: 0, bits: 0, segments: Vec::new() };
    rec.transfer(prefetch_bits, Phase::Prefetch);
    let prefetch_end = rec.cycle;

    let mut input_left = input_total - first_rows;
    let values_per_read = if options.per_feature { n } else { 1 };
    let output_per_pixel = layer.m as u64 * b_a;
    let mut stall_cycles = 0;
    let mut row_starts = Vec::with_capacity(layer.out_h as usize);

    for row in 0..layer.out_h {
        row_starts.push(rec.cycle);
        for col in 0..layer.out_w {
            let values = 1 + if col == 0 && row > 0 { k } else { 0 };
            let read = (values * values_per_read * b_a).min(input_left);
            input_left -= read;
            stall_cycles += rec.transfer(read + output_per_pixel, Phase::Steady) - 1;
        }
    }

    if input_left > 0 {
        rec.transfer(input_left, Phase::Drain);
    }

    let total_cycles = rec.cycle;
    Ok(TimelineTrace {
        layer_name: layer.name.clone(),
        bus_bits_per_cycle: options.bus_bits_per_cycle,
        prefetch_bits,
        prefetch_end,
        row_starts,
        total_bits: rec.bits,
        utilization: rec.bits as f64 / (total_cycles as f64 * options.bus_bits_per_cycle as f64),
        segments: rec.segments,
        total_cycles,
        stall_cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::TrafficModel;

    fn small() -> Layer {
        Layer::new("small", 3, 4, 4, (8, 8), 8, 8)
    }

    #[test]
    fn prefetch_example() {
        let t = simulate(&small(), &TimelineOptions::new(64)).unwrap();
        assert_eq!(t.prefetch_bits, 1920);
        assert_eq!(t.prefetch_end, 30);
        assert_eq!(t.cycles_in(Phase::Prefetch), 30);
        assert_eq!(t.total_bits, small().traffic(&TrafficModel::single_pass()).total_bits());
        assert_eq!(t.row_starts.len(), 8);
        assert_eq!(t.row_starts[0], 30);
    }

    #[test]
    fn steady_state_demand_per_pixel() {
        // per pixel: 4 features · 8 bits in + 4 · 8 bits out = 64 bits, one cycle
        let t = simulate(&small(), &TimelineOptions::new(64)).unwrap();
        let first_row = t.segments.iter().find(|s| s.phase == Phase::Steady).unwrap();
        assert_eq!(first_row.bits_per_cycle, 64);
        assert_eq!(t.row_starts[1] - t.row_starts[0], 8);
        // a row start reads 4 values per feature: 128 + 32 bits take 3 cycles
        assert_eq!(t.row_starts[2] - t.row_starts[1], 10);
        // input runs out during row 3; later row starts only write outputs
        assert_eq!(t.stall_cycles, 2 * 3);
    }

    #[test]
    fn unbounded_bus_has_no_stalls() {
        let l = small();
        let t = simulate(&l, &TimelineOptions::new(u64::MAX)).unwrap();
        assert_eq!(t.stall_cycles, 0);
        assert_eq!(t.prefetch_end, 1);
        assert_eq!(t.total_cycles, 1 + 64);
    }

    #[test]
    fn single_pixel_layer_conserves_bits() {
        let l = Layer::new("px", 3, 16, 8, (1, 1), 4, 4).with_input(3, 3);
        for bus in [1, 7, 64, 4096] {
            for per_feature in [true, false] {
                let t = simulate(&l, &TimelineOptions { bus_bits_per_cycle: bus, per_feature, batch: 1 }).unwrap();
                assert_eq!(t.total_bits, l.traffic(&TrafficModel::single_pass()).total_bits());
                let seg_bits: u64 = t.segments.iter().map(Segment::bits).sum();
                assert_eq!(seg_bits, t.total_bits);
            }
        }
    }

    #[test]
    fn strided_layers_drain_leftover_input() {
        let l = Layer::new("s2", 3, 8, 8, (4, 4), 8, 8).with_input(8, 8);
        let t = simulate(&l, &TimelineOptions::new(64)).unwrap();
        assert!(t.cycles_in(Phase::Drain) > 0);
        assert_eq!(t.total_bits, l.traffic(&TrafficModel::single_pass()).total_bits());
    }

    #[test]
    fn batch_amortizes_weights() {
        let one = simulate(&small(), &TimelineOptions::new(64)).unwrap();
        let four = simulate(&small(), &TimelineOptions { batch: 4, ..TimelineOptions::new(64) }).unwrap();
        assert_eq!(one.prefetch_bits - four.prefetch_bits, 1152 - 288);
    }

    #[test]
    fn csv_has_header_and_segments() {
        let t = simulate(&small(), &TimelineOptions::new(64)).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("cycle_start,cycle_end,bits_per_cycle,phase"));
        assert_eq!(lines.next(), Some("0,30,64,prefetch"));
        assert_eq!(csv.lines().count(), t.segments.len() + 1);
    }

    #[test]
    fn rejects_zero_bus() {
        assert!(simulate(&small(), &TimelineOptions::new(0)).is_err());
    }
}
