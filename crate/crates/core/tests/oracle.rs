mod common;

use common::{random_layer, rng, Ref};
use roofkit::{TrafficModel, TrafficVariant};

#[test]
fn reference_formulas_on_hand_examples() {
    let l = roofkit::Layer::new("a", 3, 256, 256, (14, 14), 4, 4);
    assert_eq!(Ref::of(&l).bops(), 21_233_664);
    assert_eq!(Ref::of(&l).compute_cost(), 4_718_592);
    let l = roofkit::Layer::new("b", 3, 16, 16, (1, 1), 8, 8);
    assert_eq!(Ref::of(&l).bops(), 202_752);
    assert_eq!(Ref::of(&l).compute_cost(), 36_864);
    assert_eq!(common::clog2(1), 0);
    assert_eq!(common::clog2(2304), 12);
}

#[test]
fn library_matches_reference_on_random_layers() {
    let mut r = rng(0x0ac1e);
    for i in 0..500 {
        let l = random_layer(&mut r, i);
        let o = Ref::of(&l);
        assert_eq!(l.total_ops() as u128, o.ops(), "{l}");
        assert_eq!(l.bops() as u128, o.bops(), "{l}");
        assert_eq!(l.compute_cost() as u128, o.compute_cost(), "{l}");

        let sp = l.traffic(&TrafficModel::single_pass());
        assert_eq!(sp.weight_bits() as u128, o.weights());
        assert_eq!(sp.input_bits() as u128, o.inputs());
        assert_eq!(sp.output_bits() as u128, o.outputs());
        assert_eq!(sp.total_bits() as u128, o.single_pass());

        for (gi, go) in [(1, 1), (16, 16), (7, 33), (512, 512)] {
            let on = l.traffic(&TrafficModel::grouped(TrafficVariant::GroupedOnchip, gi, go).unwrap());
            assert_eq!(on.total_bits() as u128, o.grouped_onchip(go as u128), "{l} g=({gi},{go})");
            let sp = l.traffic(&TrafficModel::grouped(TrafficVariant::GroupedSpill, gi, go).unwrap());
            assert_eq!(sp.total_bits() as u128, o.grouped_spill(gi as u128, go as u128), "{l} g=({gi},{go})");
        }
    }
}

#[test]
fn network_totals_are_layer_sums() {
    let net = roofkit::presets::network("resnet18").unwrap();
    let model = TrafficModel::grouped(TrafficVariant::GroupedSpill, 16, 16).unwrap();
    let t = net.totals(&model);
    let ops: u128 = net.layers.iter().map(|l| Ref::of(l).ops()).sum();
    let bops: u128 = net.layers.iter().map(|l| Ref::of(l).bops()).sum();
    let bits: u128 = net.layers.iter().map(|l| Ref::of(l).grouped_spill(16, 16)).sum();
    assert_eq!(t.ops as u128, ops);
    assert_eq!(t.bops as u128, bops);
    assert_eq!(t.traffic.total_bits() as u128, bits);
    assert_eq!(t.layers.len(), 22);
}
