use proptest::prelude::*;
use roofkit::hwmodel::size_pe_array;
use roofkit::netmodel::parse_network;
use roofkit::regression::{compare_metrics, fit, MetricSample};
use roofkit::roofline::{
    build_report, classify_against, partial_sum_transform, raw_point, ReportOptions, SpillMode,
};
use roofkit::scenario::HardwareSpec;
use roofkit::timeline::{simulate, Segment, TimelineOptions};
use roofkit::{
    AcceleratorConfig, CalibrationProfile, Layer, MemoryConfig, Network, TrafficModel, TrafficVariant,
};

fn layer() -> impl Strategy<Value = Layer> {
    (
        prop::sample::select(vec![1u32, 3, 5, 7]),
        1u32..=512,
        1u32..=512,
        1u32..=56,
        1u32..=56,
        1u32..=2,
        1u32..=16,
        1u32..=16,
    )
        .prop_map(|(k, n, m, oh, ow, s, bw, ba)| Layer::new("p", k, n, m, (oh, ow), bw, ba).with_input(oh * s, ow * s))
}

fn small_layer() -> impl Strategy<Value = Layer> {
    (prop::sample::select(vec![1u32, 3, 5]), 1u32..=32, 1u32..=32, 1u32..=16, 1u32..=16, 1u32..=2, 1u32..=16)
        .prop_map(|(k, n, m, oh, ow, s, b)| Layer::new("t", k, n, m, (oh, ow), b, b).with_input(oh * s, ow * s))
}

proptest! {
    #[test]
    fn bops_grows_with_either_width(l in layer(), dw in 1u32..8, da in 1u32..8) {
        let wider_w = l.clone().with_bits(l.b_w + dw, l.b_a);
        let wider_a = l.clone().with_bits(l.b_w, l.b_a + da);
        prop_assert!(wider_w.bops() > l.bops());
        prop_assert!(wider_a.bops() > l.bops());
    }

    #[test]
    fn bops_exceeds_compute_cost(l in layer()) {
        prop_assert!(l.bops() > l.compute_cost());
        prop_assert!(l.bops_exact() <= l.bops() as f64 + 1e-6 * l.bops() as f64);
    }

    #[test]
    fn ops_scale_with_output_area(l in layer()) {
        let mut twice = l.clone();
        twice.out_h *= 2;
        prop_assert_eq!(twice.total_ops(), 2 * l.total_ops());
        prop_assert_eq!(l.total_ops(), l.ops_per_pixel() * l.out_h as u64 * l.out_w as u64);
    }

    #[test]
    fn grouping_only_adds_traffic(l in layer(), gi in 1u32..600, go in 1u32..600) {
        let single = l.traffic(&TrafficModel::single_pass()).total_bits();
        let onchip = l.traffic(&TrafficModel::grouped(TrafficVariant::GroupedOnchip, gi, go).unwrap()).total_bits();
        let spill = l.traffic(&TrafficModel::grouped(TrafficVariant::GroupedSpill, gi, go).unwrap()).total_bits();
        prop_assert!(single <= onchip && onchip <= spill);
        prop_assert_eq!(go >= l.m, single == onchip);
        prop_assert_eq!(gi >= l.n, onchip == spill);
    }

    #[test]
    fn partial_sums_divide_the_raw_rate(l in layer(), gi in 1u32..64, go in 1u32..64, f in 1e6f64..2e9) {
        let raw = raw_point(&l, f).unwrap();
        let ps = partial_sum_transform(&l, (gi, go), f, SpillMode::Onchip).unwrap();
        let back = ps.required_ops * ps.passes as f64;
        prop_assert!((back - raw.required_ops).abs() <= 1e-12 * raw.required_ops);
        prop_assert!(ps.ops_per_bit <= raw.ops_per_bit);
    }

    #[test]
    fn more_capacity_or_bandwidth_never_hurts(
        l in layer(), f in 1e6f64..2e9, cap in 1e9f64..1e14, bw in 1e9f64..1e12, scale in 1.0f64..100.0,
    ) {
        let p = raw_point(&l, f).unwrap();
        let (base, _) = classify_against(&p, cap, bw, 0.05);
        let (more_cap, _) = classify_against(&p, cap * scale, bw, 0.05);
        let (more_bw, _) = classify_against(&p, cap, bw * scale, 0.05);
        prop_assert!(!more_cap.is_compute_bound() || base.is_compute_bound());
        prop_assert!(!more_bw.is_memory_bound() || base.is_memory_bound());
        prop_assert_eq!(more_cap.is_memory_bound(), base.is_memory_bound());
    }

    #[test]
    fn ridge_point_joins_the_ceilings(bits in 2u32..=16, area in 0.2f64..8.0, f in 50.0f64..1000.0) {
        let net = Network::new("r", vec![Layer::new("a", 3, 64, 64, (14, 14), bits, bits)]).unwrap();
        let accel = AcceleratorConfig::fixed(area * 1e6, f * 1e6, bits, 3, CalibrationProfile::tsmc28());
        let r = build_report(&net, &accel, &MemoryConfig::ddr4_2400_x64(), &ReportOptions::default()).unwrap();
        let meet = r.memory_ceiling(r.ridge_point);
        prop_assert!((meet - r.compute_ceiling).abs() <= 1e-9 * r.compute_ceiling);
        prop_assert_eq!(&r, &build_report(&net, &accel, &MemoryConfig::ddr4_2400_x64(), &ReportOptions::default()).unwrap());
    }

    #[test]
    fn sizing_is_monotone(bits in 1u32..31, area in 0.01f64..10.0) {
        let p = CalibrationProfile::tsmc28();
        let s = |b: u32, a: f64| size_pe_array(&AcceleratorConfig::fixed(a * 1e6, 1e8, b, 3, p.clone())).ok();
        if let (Some(narrow), Some(wide)) = (s(bits, area), s(bits + 1, area)) {
            prop_assert!(wide.pe_count <= narrow.pe_count);
        }
        if let (Some(small), Some(big)) = (s(bits, area), s(bits, area * 1.5)) {
            prop_assert!(big.capacity >= small.capacity);
            prop_assert!(big.placed_pes() <= big.pe_count);
        }
    }

    #[test]
    fn timeline_conserves_bits(l in small_layer(), bus in 1u64..4096, per_feature: bool, batch in 1u32..4) {
        let t = simulate(&l, &TimelineOptions { bus_bits_per_cycle: bus, per_feature, batch }).unwrap();
        let sp = l.traffic(&TrafficModel::single_pass());
        let weights_share = sp.weight_bits().div_ceil(batch as u64);
        prop_assert_eq!(t.total_bits, sp.total_bits() - sp.weight_bits() + weights_share);
        prop_assert_eq!(t.segments.iter().map(Segment::bits).sum::<u64>(), t.total_bits);
        let mut at = 0;
        for s in &t.segments {
            prop_assert_eq!(s.cycle_start, at);
            prop_assert!(s.cycle_end > s.cycle_start && s.bits_per_cycle <= bus);
            at = s.cycle_end;
        }
        prop_assert_eq!(at, t.total_cycles);
        prop_assert!(t.utilization > 0.0 && t.utilization <= 1.0);
    }

    #[test]
    fn wider_bus_never_stalls_more(l in small_layer(), bus in 1u64..2048) {
        let a = simulate(&l, &TimelineOptions::new(bus)).unwrap();
        let b = simulate(&l, &TimelineOptions::new(bus * 2)).unwrap();
        prop_assert!(b.stall_cycles <= a.stall_cycles);
        prop_assert!(b.total_cycles <= a.total_cycles);
    }

    #[test]
    fn fit_is_scale_equivariant(
        pts in prop::collection::vec((-100.0f64..100.0, -1e3f64..1e3), 6..20), c in 0.1f64..50.0, degree in 1usize..=2,
    ) {
        let Ok(f) = fit(&pts, degree) else { return Ok(()) };
        let scaled: Vec<_> = pts.iter().map(|&(x, y)| (x, c * y)).collect();
        let g = fit(&scaled, degree).unwrap();
        for (a, b) in f.coefficients.iter().zip(&g.coefficients) {
            prop_assert!((a * c - b).abs() <= 1e-6 * (1.0 + b.abs()));
        }
        prop_assert!((f.r_squared - g.r_squared).abs() <= 1e-9);
    }

    #[test]
    fn quadratic_never_fits_worse(pts in prop::collection::vec((-50.0f64..50.0, -1e3f64..1e3), 6..20)) {
        if let (Ok(lin), Ok(quad)) = (fit(&pts, 1), fit(&pts, 2)) {
            prop_assert!(quad.r_squared >= lin.r_squared - 1e-9);
        }
    }

    #[test]
    fn verdict_ignores_sample_order(seed in any::<u64>(), noise in 0.0f64..0.05) {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = CalibrationProfile::tsmc28();
        let mut samples = Vec::new();
        for n in [4u32, 8, 16] {
            for b in [4u32, 6, 8] {
                let area = p.area_from_bops(Layer::new("", 3, n, n, (1, 1), b, b).bops() as f64);
                samples.push(MetricSample { n, m: n, k: 3, b_w: b, b_a: b, area: area * (1.0 + r.gen_range(-noise..=noise)) });
            }
        }
        let a = compare_metrics(&samples).unwrap();
        samples.shuffle(&mut r);
        let b = compare_metrics(&samples).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert!((a.bops_max_loo_error - b.bops_max_loo_error).abs() < 1e-9);
    }

    #[test]
    fn network_json_round_trips(layers in prop::collection::vec(layer(), 1..6)) {
        let layers: Vec<Layer> = layers.into_iter().enumerate().map(|(i, mut l)| { l.name = format!("l{i}"); l }).collect();
        let net = Network::new("rt", layers).unwrap();
        let back = parse_network(&serde_json::to_string(&net).unwrap()).unwrap();
        prop_assert_eq!(net, back);
    }
}

#[test]
fn hardware_presets_round_trip_through_json() {
    for name in roofkit::presets::index().hardware {
        let spec = roofkit::presets::hardware(name).unwrap();
        let back = HardwareSpec::parse(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back, "{name}");
    }
}
