//! Deterministic data generators shared by unit, property and acceptance
//! tests. Not part of the stable API.
#![doc(hidden)]

use crate::mat::Mat;
use crate::ring::{RingCtx, RingKind, Scalar};
use crate::seq::PeriodicSeq;

/// Small xorshift generator so test data does not depend on external crates.
#[derive(Clone)]
pub struct XorShift(u64);

impl XorShift {
    pub fn new(seed: u64) -> Self {
        XorShift(seed.max(1))
    }
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
    /// Uniform in [0, bound).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
    /// Uniform in [lo, hi] inclusive.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.below((hi - lo + 1) as u64) as i64)
    }
    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }
}

/// Random element with small numerators and denominators (at most 9).
pub fn rand_scalar(ctx: &RingCtx, rng: &mut XorShift) -> Scalar {
    match ctx.kind() {
        RingKind::Rationals => ctx.from_ratio(rng.range_i64(-9, 9), rng.range_i64(1, 9)),
        RingKind::PrimeField(p) => {
            let r = rng.below(*p) as i64;
            ctx.from_i64(r)
        }
        RingKind::Cyclotomic(_) => {
            // random small-coefficient combination of 1 and zeta
            let a = ctx.from_ratio(rng.range_i64(-9, 9), rng.range_i64(1, 9));
            let b = ctx.from_ratio(rng.range_i64(-9, 9), rng.range_i64(1, 9));
            ctx.add(&a, &ctx.mul(&b, &ctx.zeta()))
        }
    }
}

pub fn rand_nonzero_scalar(ctx: &RingCtx, rng: &mut XorShift) -> Scalar {
    loop {
        let s = rand_scalar(ctx, rng);
        if !ctx.is_zero(&s) {
            return s;
        }
    }
}

/// Random unitriangular matrix with small entries.
pub fn rand_unitriangular(ctx: &RingCtx, n: usize, rng: &mut XorShift) -> Mat {
    let mut m = Mat::identity(ctx.clone(), n);
    for i in 0..n {
        for j in (i + 1)..n {
            m.set(i, j, rand_scalar(ctx, rng));
        }
    }
    m
}

/// Random unitriangular matrix whose superdiagonal entries are all 1.
pub fn rand_unit_superdiag(ctx: &RingCtx, n: usize, rng: &mut XorShift) -> Mat {
    let mut m = rand_unitriangular(ctx, n, rng);
    for i in 0..n.saturating_sub(1) {
        m.set(i, i + 1, ctx.one());
    }
    m
}

/// Random element of SL_n built as a product of unit triangular factors;
/// the trailing upper factor keeps the principal minors generic.
pub fn rand_sl(ctx: &RingCtx, n: usize, rng: &mut XorShift) -> Mat {
    let u1 = rand_unitriangular(ctx, n, rng);
    let l1 = rand_unitriangular(ctx, n, rng).transpose();
    let u2 = rand_unitriangular(ctx, n, rng);
    u1.mul(&l1).mul(&u2)
}

/// Random prefix+periodic sequence with small entries.
pub fn rand_seq(ctx: &RingCtx, rng: &mut XorShift, max_prefix: usize, max_period: usize) -> PeriodicSeq {
    let pre_len = rng.below(max_prefix as u64 + 1) as usize;
    let per_len = 1 + rng.below(max_period as u64) as usize;
    let prefix = (0..pre_len).map(|_| rand_scalar(ctx, rng)).collect();
    let period = (0..per_len).map(|_| rand_scalar(ctx, rng)).collect();
    PeriodicSeq::new(prefix, period)
}

/// Random banded upper triangular oracle with invertible diagonal.
pub fn rand_banded_oracle(
    ctx: &RingCtx,
    rng: &mut XorShift,
    max_band: usize,
    max_prefix: usize,
    max_period: usize,
) -> crate::mat::TriOracle {
    let mut diags = std::collections::BTreeMap::new();
    let diag = rand_seq(ctx, rng, max_prefix, max_period)
        .map(|v| if ctx.is_zero(v) { ctx.one() } else { v.clone() });
    diags.insert(0usize, diag);
    for d in 1..=max_band {
        if rng.chance(2, 3) {
            diags.insert(d, rand_seq(ctx, rng, max_prefix, max_period));
        }
    }
    crate::mat::TriOracle::from_band(ctx.clone(), diags)
}

/// Random banded unitriangular oracle.
pub fn rand_banded_unitriangular(
    ctx: &RingCtx,
    rng: &mut XorShift,
    max_band: usize,
    max_prefix: usize,
    max_period: usize,
) -> crate::mat::TriOracle {
    let mut diags = std::collections::BTreeMap::new();
    diags.insert(0usize, PeriodicSeq::ones(ctx));
    for d in 1..=max_band {
        if d == 1 || rng.chance(2, 3) {
            diags.insert(d, rand_seq(ctx, rng, max_prefix, max_period));
        }
    }
    crate::mat::TriOracle::from_band(ctx.clone(), diags)
}
