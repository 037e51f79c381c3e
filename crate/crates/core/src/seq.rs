//! Eventually periodic sequences of ring elements.
//!
//! A `PeriodicSeq` is a finite prefix followed by a repeating nonempty
//! period. These describe superdiagonals, diagonals of coherence data and
//! coupling columns, and they make infinite inputs finitely serializable.
//! Sequences are kept normalized (primitive period, shortest prefix) so
//! serialized forms are canonical.

use crate::ring::{RingCtx, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicSeq {
    prefix: Vec<Scalar>,
    period: Vec<Scalar>,
}

impl PeriodicSeq {
    /// Builds a normalized sequence; the period must be nonempty.
    pub fn new(prefix: Vec<Scalar>, period: Vec<Scalar>) -> Self {
        assert!(!period.is_empty(), "period must be nonempty");
        let mut s = PeriodicSeq { prefix, period };
        s.normalize();
        s
    }

    pub fn constant(value: Scalar) -> Self {
        PeriodicSeq {
            prefix: Vec::new(),
            period: vec![value],
        }
    }

    pub fn zeros(ctx: &RingCtx) -> Self {
        Self::constant(ctx.zero())
    }

    pub fn ones(ctx: &RingCtx) -> Self {
        Self::constant(ctx.one())
    }

    /// Finite data followed by a constant tail.
    pub fn from_finite(data: Vec<Scalar>, tail: Scalar) -> Self {
        Self::new(data, vec![tail])
    }

    pub fn prefix(&self) -> &[Scalar] {
        &self.prefix
    }

    pub fn period(&self) -> &[Scalar] {
        &self.period
    }

    /// Zero-based element access.
    pub fn get(&self, idx: usize) -> &Scalar {
        if idx < self.prefix.len() {
            &self.prefix[idx]
        } else {
            &self.period[(idx - self.prefix.len()) % self.period.len()]
        }
    }

    /// Drops the first element (the shift operator on diagonals).
    pub fn shift(&self) -> Self {
        if self.prefix.is_empty() {
            let mut period = self.period.clone();
            period.rotate_left(1);
            Self::new(Vec::new(), period)
        } else {
            Self::new(self.prefix[1..].to_vec(), self.period.clone())
        }
    }

    pub fn shift_n(&self, n: usize) -> Self {
        let mut s = self.clone();
        for _ in 0..n {
            s = s.shift();
        }
        s
    }

    /// Pointwise combination; the result is normalized.
    pub fn zip(&self, other: &Self, mut f: impl FnMut(&Scalar, &Scalar) -> Scalar) -> Self {
        let pre = self.prefix.len().max(other.prefix.len());
        let per = lcm(self.period.len(), other.period.len());
        let prefix = (0..pre).map(|i| f(self.get(i), other.get(i))).collect();
        let period = (pre..pre + per).map(|i| f(self.get(i), other.get(i))).collect();
        Self::new(prefix, period)
    }

    pub fn map(&self, mut f: impl FnMut(&Scalar) -> Scalar) -> Self {
        Self::new(
            self.prefix.iter().map(&mut f).collect(),
            self.period.iter().map(&mut f).collect(),
        )
    }

    pub fn add(&self, ctx: &RingCtx, other: &Self) -> Self {
        self.zip(other, |a, b| ctx.add(a, b))
    }

    pub fn mul(&self, ctx: &RingCtx, other: &Self) -> Self {
        self.zip(other, |a, b| ctx.mul(a, b))
    }

    pub fn scale(&self, ctx: &RingCtx, s: &Scalar) -> Self {
        self.map(|a| ctx.mul(a, s))
    }

    pub fn is_constant(&self, value: &Scalar) -> bool {
        self.prefix.iter().chain(self.period.iter()).all(|v| v == value)
    }

    /// Equality as infinite sequences. Agreement on the joint prefix plus one
    /// joint period determines the whole tail.
    pub fn eq_seq(&self, other: &Self) -> bool {
        let pre = self.prefix.len().max(other.prefix.len());
        let per = lcm(self.period.len(), other.period.len());
        (0..pre + per).all(|i| self.get(i) == other.get(i))
    }

    /// First `n` elements, cloned.
    pub fn take(&self, n: usize) -> Vec<Scalar> {
        (0..n).map(|i| self.get(i).clone()).collect()
    }

    fn normalize(&mut self) {
        // primitive period: smallest divisor length that tiles the period
        let len = self.period.len();
        for d in 1..=len {
            if len % d != 0 {
                continue;
            }
            if (d..len).all(|i| self.period[i] == self.period[i % d]) {
                self.period.truncate(d);
                break;
            }
        }
        // shrink the prefix: its last element may be absorbed by rotating
        // the period right whenever it matches the period's last element
        while let Some(last) = self.prefix.last() {
            if last == self.period.last().unwrap() {
                self.prefix.pop();
                self.period.rotate_right(1);
            } else {
                break;
            }
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{make_ring, RingKind};

    fn q() -> RingCtx {
        make_ring(RingKind::Rationals, 2).unwrap()
    }

    #[test]
    fn shift_consumes_prefix() {
        let ctx = q();
        let s = PeriodicSeq::new(
            vec![ctx.from_i64(5), ctx.from_i64(7)],
            vec![ctx.from_i64(1)],
        );
        let shifted = s.shift_n(2);
        assert!(shifted.prefix().is_empty());
        assert_eq!(shifted.period(), &[ctx.from_i64(1)]);
    }

    #[test]
    fn shift_rotates_period() {
        let ctx = q();
        let s = PeriodicSeq::new(Vec::new(), vec![ctx.from_i64(1), ctx.from_i64(0)]);
        let t = s.shift();
        assert_eq!(t.get(0), &ctx.from_i64(0));
        assert_eq!(t.get(1), &ctx.from_i64(1));
        assert_eq!(t.get(2), &ctx.from_i64(0));
    }

    #[test]
    fn normalization_is_canonical() {
        let ctx = q();
        // [1] + (2,2)* collapses to [1] + (2)* and then stays put
        let s = PeriodicSeq::new(vec![ctx.one()], vec![ctx.from_i64(2), ctx.from_i64(2)]);
        assert_eq!(s.period().len(), 1);
        // prefix element equal to the period tail gets absorbed
        let t = PeriodicSeq::new(vec![ctx.from_i64(2)], vec![ctx.from_i64(2)]);
        assert!(t.prefix().is_empty());
        assert!(t.eq_seq(&PeriodicSeq::constant(ctx.from_i64(2))));
    }

    #[test]
    fn zip_and_eq() {
        let ctx = q();
        let a = PeriodicSeq::new(vec![ctx.one()], vec![ctx.from_i64(2), ctx.from_i64(3)]);
        let b = PeriodicSeq::new(Vec::new(), vec![ctx.from_i64(10)]);
        let sum = a.add(&ctx, &b);
        assert_eq!(sum.get(0), &ctx.from_i64(11));
        assert_eq!(sum.get(1), &ctx.from_i64(12));
        assert_eq!(sum.get(2), &ctx.from_i64(13));
        assert_eq!(sum.get(3), &ctx.from_i64(12));
        assert!(sum.eq_seq(&sum.clone()));
    }
}
