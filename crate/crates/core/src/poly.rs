//! Univariate polynomials over a `RingCtx`, just enough for characteristic
//! polynomials, root-one multiplicity extraction and Bezout projectors.

use crate::mat::Mat;
use crate::ring::{RingCtx, Scalar};

/// Little-endian coefficient vector, trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn new(ctx: &RingCtx, mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.len() > 1 && ctx.is_zero(coeffs.last().unwrap()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ctx.zero());
        }
        Poly { coeffs }
    }

    pub fn zero(ctx: &RingCtx) -> Self {
        Poly {
            coeffs: vec![ctx.zero()],
        }
    }

    pub fn one(ctx: &RingCtx) -> Self {
        Poly {
            coeffs: vec![ctx.one()],
        }
    }

    pub fn is_zero(&self, ctx: &RingCtx) -> bool {
        self.coeffs.iter().all(|c| ctx.is_zero(c))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, ctx: &RingCtx, x: &Scalar) -> Scalar {
        let mut acc = ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = ctx.add(&ctx.mul(&acc, x), c);
        }
        acc
    }

    pub fn eval_mat(&self, m: &Mat) -> Mat {
        let ctx = m.ctx().clone();
        let n = m.n();
        let mut acc = Mat::zero(ctx.clone(), n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m).add(&Mat::identity(ctx.clone(), n).scale(c));
        }
        acc
    }

    pub fn mul(&self, ctx: &RingCtx, other: &Poly) -> Poly {
        let mut out = vec![ctx.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if ctx.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = ctx.add(&out[i + j], &ctx.mul(a, b));
            }
        }
        Poly::new(ctx, out)
    }

    pub fn sub(&self, ctx: &RingCtx, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![ctx.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            out[i] = a.clone();
        }
        for (i, b) in other.coeffs.iter().enumerate() {
            out[i] = ctx.sub(&out[i], b);
        }
        Poly::new(ctx, out)
    }

    pub fn divrem(&self, ctx: &RingCtx, div: &Poly) -> (Poly, Poly) {
        assert!(!div.is_zero(ctx), "polynomial division by zero");
        let db = div.degree();
        let lead_inv = ctx.inv(&div.coeffs[db]).expect("invertible lead");
        let mut rem = self.coeffs.clone();
        if rem.len() <= db {
            return (Poly::zero(ctx), Poly::new(ctx, rem));
        }
        let mut quot = vec![ctx.zero(); rem.len() - db];
        for top in (db..rem.len()).rev() {
            let c = ctx.mul(&rem[top], &lead_inv);
            if ctx.is_zero(&c) {
                continue;
            }
            quot[top - db] = c.clone();
            for i in 0..=db {
                let t = ctx.mul(&div.coeffs[i], &c);
                rem[top - db + i] = ctx.sub(&rem[top - db + i], &t);
            }
        }
        (Poly::new(ctx, quot), Poly::new(ctx, rem))
    }

    /// Extended gcd over the field of scalars; returns (g, u, v) with
    /// u*self + v*other = g, g monic.
    pub fn ext_gcd(&self, ctx: &RingCtx, other: &Poly) -> (Poly, Poly, Poly) {
        let mut r0 = self.clone();
        let mut r1 = other.clone();
        let (mut s0, mut s1) = (Poly::one(ctx), Poly::zero(ctx));
        let (mut t0, mut t1) = (Poly::zero(ctx), Poly::one(ctx));
        while !r1.is_zero(ctx) {
            let (q, r) = r0.divrem(ctx, &r1);
            let ns = s0.sub(ctx, &q.mul(ctx, &s1));
            let nt = t0.sub(ctx, &q.mul(ctx, &t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = ns;
            t0 = t1;
            t1 = nt;
        }
        let lead = r0.coeffs.last().unwrap().clone();
        if !ctx.is_one(&lead) && !ctx.is_zero(&lead) {
            let inv = ctx.inv(&lead).unwrap();
            let norm = |p: &Poly| Poly::new(ctx, p.coeffs.iter().map(|c| ctx.mul(c, &inv)).collect());
            return (norm(&r0), norm(&s0), norm(&t0));
        }
        (r0, s0, t0)
    }
}

/// Characteristic polynomial det(xI - M) by the trace recurrence; needs
/// 1..n invertible, which holds in characteristic zero.
pub fn char_poly(m: &Mat) -> Poly {
    let ctx = m.ctx().clone();
    let n = m.n();
    let mut coeffs = vec![ctx.zero(); n + 1];
    coeffs[n] = ctx.one();
    let mut b = Mat::identity(ctx.clone(), n);
    for i in 1..=n {
        let mi = m.mul(&b);
        let c = ctx.neg(
            &ctx.div(&mi.trace(), &ctx.from_i64(i as i64))
                .expect("characteristic zero"),
        );
        coeffs[n - i] = c.clone();
        b = mi.add(&Mat::identity(ctx.clone(), n).scale(&c));
    }
    Poly::new(&ctx, coeffs)
}

/// Splits p = (x - 1)^m * g with g(1) != 0; returns (m, g).
pub fn split_root_one(ctx: &RingCtx, p: &Poly) -> (usize, Poly) {
    let linear = Poly::new(ctx, vec![ctx.from_i64(-1), ctx.one()]);
    let mut g = p.clone();
    let mut m = 0;
    loop {
        if !ctx.is_zero(&g.eval(ctx, &ctx.one())) {
            return (m, g);
        }
        let (q, r) = g.divrem(ctx, &linear);
        debug_assert!(r.is_zero(ctx));
        g = q;
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{make_ring, RingKind};

    #[test]
    fn char_poly_companion() {
        let ctx = make_ring(RingKind::Rationals, 2).unwrap();
        let m = Mat::from_i64_rows(&ctx, &[&[0, -1], &[1, 3]]);
        let p = char_poly(&m);
        // x^2 - 3x + 1
        assert_eq!(
            p.coeffs,
            vec![ctx.from_i64(1), ctx.from_i64(-3), ctx.from_i64(1)]
        );
        assert!(p.eval_mat(&m) == Mat::zero(ctx, 2));
    }

    #[test]
    fn root_one_split() {
        let ctx = make_ring(RingKind::Rationals, 2).unwrap();
        // (x-1)^2 (x-2) = x^3 - 4x^2 + 5x - 2
        let p = Poly::new(
            &ctx,
            vec![
                ctx.from_i64(-2),
                ctx.from_i64(5),
                ctx.from_i64(-4),
                ctx.from_i64(1),
            ],
        );
        let (m, g) = split_root_one(&ctx, &p);
        assert_eq!(m, 2);
        assert_eq!(g.coeffs, vec![ctx.from_i64(-2), ctx.from_i64(1)]);
    }

    #[test]
    fn bezout_identity() {
        let ctx = make_ring(RingKind::Rationals, 2).unwrap();
        let a = Poly::new(&ctx, vec![ctx.from_i64(1), ctx.from_i64(-2), ctx.one()]); // (x-1)^2
        let b = Poly::new(&ctx, vec![ctx.from_i64(-2), ctx.one()]); // x - 2
        let (g, u, v) = a.ext_gcd(&ctx, &b);
        assert_eq!(g.coeffs, vec![ctx.one()]);
        let lhs = u.mul(&ctx, &a).sub(&ctx, &Poly::one(&ctx));
        let rhs = Poly::zero(&ctx).sub(&ctx, &v.mul(&ctx, &b));
        assert_eq!(lhs, rhs);
    }
}
