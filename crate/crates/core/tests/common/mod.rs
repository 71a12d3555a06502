//! Independent reference formulas, written before the library and kept
//! deliberately naive: u128 arithmetic, loops instead of bit tricks, no
//! calls into `roofkit` beyond reading layer fields.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roofkit::Layer;

pub fn clog2(x: u128) -> u128 {
    let mut bits = 0;
    while (1u128 << bits) < x {
        bits += 1;
    }
    bits
}

#[allow(clippy::manual_div_ceil)]
fn div_up(a: u128, b: u128) -> u128 {
    (a + b - 1) / b
}

pub struct Ref {
    k: u128,
    n: u128,
    m: u128,
    oh: u128,
    ow: u128,
    ih: u128,
    iw: u128,
    bw: u128,
    ba: u128,
}

impl Ref {
    pub fn of(l: &Layer) -> Ref {
        Ref {
            k: l.k as u128,
            n: l.n as u128,
            m: l.m as u128,
            oh: l.out_h as u128,
            ow: l.out_w as u128,
            ih: l.in_h as u128,
            iw: l.in_w as u128,
            bw: l.b_w as u128,
            ba: l.b_a as u128,
        }
    }

    pub fn ops(&self) -> u128 {
        self.n * self.m * (self.k * self.k + 1) * self.oh * self.ow
    }

    pub fn bops(&self) -> u128 {
        let adder = clog2(self.n * self.k * self.k);
        self.m * self.n * self.k * self.k * (self.ba * self.bw + self.ba + self.bw + adder)
    }

    pub fn compute_cost(&self) -> u128 {
        self.m * self.n * self.k * self.k * (self.ba + self.bw)
    }

    pub fn weights(&self) -> u128 {
        self.n * self.m * self.k * self.k * self.bw
    }

    pub fn inputs(&self) -> u128 {
        self.n * self.ih * self.iw * self.ba
    }

    pub fn outputs(&self) -> u128 {
        self.m * self.oh * self.ow * self.ba
    }

    pub fn single_pass(&self) -> u128 {
        self.weights() + self.inputs() + self.outputs()
    }

    /// Inputs re-read once per output group; partial sums stay on chip.
    pub fn grouped_onchip(&self, g_out: u128) -> u128 {
        self.weights() + self.inputs() * div_up(self.m, g_out) + self.outputs()
    }

    /// As above, plus a write and a read of every partial sum between input
    /// passes at full accumulator width.
    pub fn grouped_spill(&self, g_in: u128, g_out: u128) -> u128 {
        let acc = self.ba + self.bw + clog2(self.n * self.k * self.k);
        let extra_passes = div_up(self.n, g_in) - 1;
        self.grouped_onchip(g_out) + 2 * extra_passes * self.m * self.oh * self.ow * acc
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A plausible conv layer: odd kernels, stride 1 or 2, up to 512 channels
/// and 56x56 outputs, 1 to 16 bit operands.
pub fn random_layer(rng: &mut ChaCha8Rng, i: usize) -> Layer {
    let k = [1, 3, 5, 7][rng.gen_range(0..4)];
    let n = rng.gen_range(1..=512);
    let m = rng.gen_range(1..=512);
    let oh = rng.gen_range(1..=56);
    let ow = rng.gen_range(1..=56);
    let stride = rng.gen_range(1..=2);
    let b_w = rng.gen_range(1..=16);
    let b_a = rng.gen_range(1..=16);
    Layer::new(format!("l{i}"), k, n, m, (oh, ow), b_w, b_a).with_input(oh * stride, ow * stride)
}

/// Smaller layers for the cycle-level simulator.
pub fn random_small_layer(rng: &mut ChaCha8Rng, i: usize) -> Layer {
    let k = [1, 3, 5][rng.gen_range(0..3)];
    let n = rng.gen_range(1..=64);
    let m = rng.gen_range(1..=64);
    let oh = rng.gen_range(1..=28);
    let ow = rng.gen_range(1..=28);
    let stride = rng.gen_range(1..=2);
    let b = rng.gen_range(1..=16);
    Layer::new(format!("t{i}"), k, n, m, (oh, ow), b, rng.gen_range(1..=16)).with_input(oh * stride, ow * stride)
}
