//! Fixed inputs for the benchmarks, built once from the shipped presets.

use roofkit::regression::MetricSample;
use roofkit::{presets, AcceleratorConfig, CalibrationProfile, MemoryConfig, Network};

pub fn resnet18(bits: u32) -> Network {
    presets::network("resnet18").expect("shipped preset").with_bits(bits, bits).expect("valid width")
}

/// The ResNet-18 preset's 16x16, 800 MHz accelerator and its memory.
pub fn resnet18_hardware() -> (AcceleratorConfig, MemoryConfig) {
    presets::hardware("resnet18-16x16").expect("shipped preset").resolve().expect("valid preset")
}

/// Synthetic area samples over n = m in {4, 8, 16} and b in {4, 6, 8},
/// linear in BOPS.
pub fn metric_grid() -> Vec<MetricSample> {
    let p = CalibrationProfile::tsmc28();
    let mut out = Vec::new();
    for n in [4u32, 8, 16] {
        for b in [4u32, 6, 8] {
            let bops = roofkit::Layer::new("", 3, n, n, (1, 1), b, b).bops();
            out.push(MetricSample { n, m: n, k: 3, b_w: b, b_a: b, area: p.area_from_bops(bops as f64) });
        }
    }
    out
}
