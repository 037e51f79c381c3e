//! Coherence machinery for unitriangular matrices.
//!
//! A unitriangular A is coherent when A = sum_i D_i J(A)^i for central
//! diagonal matrices D_i, normalized when D_0 = D_1 = I. Since J D = S(D) J
//! for the shift operator S on diagonals, products of coherent matrices
//! multiply by a convolution on their coefficient sequences. That convolution
//! and its iterates are what the factorization pipelines rely on.

use crate::error::{Error, Result};
use crate::mat::{Mat, TriOracle};
use crate::ring::{RingCtx, Scalar};
use crate::seq::PeriodicSeq;

/// Coefficient sequence (D_0, D_1, ...) of a coherence expansion. Terms past
/// the stored support are zero.
#[derive(Clone, Debug)]
pub struct DiagSeq {
    terms: Vec<PeriodicSeq>,
}

impl DiagSeq {
    pub fn new(terms: Vec<PeriodicSeq>) -> Self {
        DiagSeq { terms }
    }

    /// The multiplicative identity (I, 0, 0, ...).
    pub fn one(ctx: &RingCtx) -> Self {
        DiagSeq {
            terms: vec![PeriodicSeq::ones(ctx)],
        }
    }

    pub fn support(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[PeriodicSeq] {
        &self.terms
    }

    pub fn term(&self, i: usize, ctx: &RingCtx) -> PeriodicSeq {
        self.terms
            .get(i)
            .cloned()
            .unwrap_or_else(|| PeriodicSeq::zeros(ctx))
    }

    pub fn is_normalized(&self, ctx: &RingCtx) -> bool {
        self.term(0, ctx).is_constant(&ctx.one()) && self.term(1, ctx).is_constant(&ctx.one())
    }

    /// Divides term i by l^i. Re-expresses an expansion in powers of J(A)
    /// as one in powers of J(A^l) = l J(A); requires l invertible.
    pub fn rescale_power(&self, ctx: &RingCtx, l: u32) -> Result<DiagSeq> {
        let linv = ctx
            .inv(&ctx.from_i64(l as i64))
            .map_err(|_| Error::KNotInvertible(format!("{l} is not invertible in this ring")))?;
        let mut scale = ctx.one();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            terms.push(t.scale(ctx, &scale));
            scale = ctx.mul(&scale, &linv);
        }
        Ok(DiagSeq { terms })
    }

    pub fn eq_seq(&self, other: &DiagSeq, ctx: &RingCtx) -> bool {
        let n = self.support().max(other.support());
        (0..n).all(|i| self.term(i, ctx).eq_seq(&other.term(i, ctx)))
    }
}

/// J(A): the superdiagonal of A placed in an otherwise zero matrix.
pub fn jpart_mat(a: &Mat) -> Mat {
    let ctx = a.ctx().clone();
    let n = a.n();
    Mat::from_fn(ctx.clone(), n, |i, j| {
        if j == i + 1 {
            a.get(i, j).clone()
        } else {
            ctx.zero()
        }
    })
}

/// J(A) for an oracle, as a composition node.
pub fn jpart_oracle(a: &TriOracle) -> TriOracle {
    a.jpart()
}

/// The shift operator on diagonals: (d_1, d_2, ...) -> (d_2, d_3, ...).
pub fn shift_diag(d: &PeriodicSeq) -> PeriodicSeq {
    d.shift()
}

/// Coefficient sequence of the product of two coherent expansions over the
/// same J: result_i = sum_{j=0..i} P_j S^j(Q_{i-j}).
pub fn seq_product(ctx: &RingCtx, p: &DiagSeq, q: &DiagSeq) -> DiagSeq {
    if p.support() == 0 || q.support() == 0 {
        return DiagSeq::new(Vec::new());
    }
    let top = p.support() + q.support() - 2;
    let mut terms = Vec::with_capacity(top + 1);
    for i in 0..=top {
        let mut acc = PeriodicSeq::zeros(ctx);
        for j in 0..=i {
            if j >= p.support() || i - j >= q.support() {
                continue;
            }
            let pj = p.term(j, ctx);
            let qshift = q.term(i - j, ctx).shift_n(j);
            acc = acc.add(ctx, &pj.mul(ctx, &qshift));
        }
        terms.push(acc);
    }
    DiagSeq::new(terms)
}

/// Coefficient sequence of A^l in powers of J(A), by iterating the product
/// convolution. For normalized input the result's index-1 term is l * I, so
/// it is not normalized for l >= 2 until rescaled by the caller.
pub fn power_seq(ctx: &RingCtx, p: &DiagSeq, l: u32) -> DiagSeq {
    assert!(l >= 1);
    let mut acc = p.clone();
    for _ in 1..l {
        acc = seq_product(ctx, &acc, p);
    }
    acc
}

/// Solves A = sum_{i <= max_offset} D_i J(A)^i for a finite unitriangular A.
///
/// Offset-d entries separate: A_{t,t+d} = D_d[t] * (J^d)_{t,t+d}. Where the
/// J-power entry vanishes, the matrix entry must vanish too (else the input
/// is not coherent) and the free coefficient is set to 0. The returned
/// sequence is normalized.
pub fn coherent_solve_mat(a: &Mat, max_offset: usize) -> Result<DiagSeq> {
    let ctx = a.ctx().clone();
    let n = a.n();
    if !a.is_unitriangular() {
        return Err(Error::Precondition("coherence is defined for unitriangular input".into()));
    }
    let j = a.superdiag();
    let mut terms = vec![PeriodicSeq::ones(&ctx), PeriodicSeq::ones(&ctx)];
    for d in 2..=max_offset.min(n.saturating_sub(1)) {
        let mut vals = Vec::with_capacity(n - d);
        for t in 0..(n - d) {
            let mut jp = ctx.one();
            for s in t..(t + d) {
                jp = ctx.mul(&jp, &j[s]);
            }
            let av = a.get(t, t + d);
            if ctx.is_zero(&jp) {
                if !ctx.is_zero(av) {
                    return Err(Error::NotCoherent(format!(
                        "entry ({}, {}) is nonzero but the superdiagonal path vanishes",
                        t + 1,
                        t + d + 1
                    )));
                }
                vals.push(ctx.zero());
            } else {
                vals.push(ctx.div(av, &jp)?);
            }
        }
        terms.push(PeriodicSeq::from_finite(vals, ctx.zero()));
    }
    Ok(DiagSeq::new(terms))
}

/// Window-bounded coherence solve for oracles: coefficients are recovered
/// entrywise on the given window, so the returned prefixes are exact for
/// rows 1..window-d of each offset d.
pub fn coherent_solve_oracle(a: &TriOracle, max_offset: usize, window: usize) -> Result<DiagSeq> {
    let ctx = a.ctx().clone();
    for t in 1..=window {
        if a.entry(t, t)? != ctx.one() {
            return Err(Error::Precondition("coherence is defined for unitriangular input".into()));
        }
    }
    let mut terms = vec![PeriodicSeq::ones(&ctx), PeriodicSeq::ones(&ctx)];
    for d in 2..=max_offset {
        let mut vals = Vec::new();
        for t in 1..=window.saturating_sub(d) {
            let mut jp = ctx.one();
            for s in t..(t + d) {
                jp = ctx.mul(&jp, &a.entry(s, s + 1)?);
            }
            let av = a.entry(t, t + d)?;
            if ctx.is_zero(&jp) {
                if !ctx.is_zero(&av) {
                    return Err(Error::NotCoherent(format!(
                        "entry ({t}, {}) is nonzero but the superdiagonal path vanishes",
                        t + d
                    )));
                }
                vals.push(ctx.zero());
            } else {
                vals.push(ctx.div(&av, &jp)?);
            }
        }
        terms.push(PeriodicSeq::from_finite(vals, ctx.zero()));
    }
    Ok(DiagSeq::new(terms))
}

/// Materializes sum_i D_i J^i as a dense n x n matrix for a given
/// superdiagonal (0-based slice of length >= n-1).
pub fn realize_mat(ctx: &RingCtx, seq: &DiagSeq, j: &[Scalar], n: usize) -> Mat {
    let mut m = Mat::zero(ctx.clone(), n);
    for d in 0..seq.support().min(n) {
        let diag = seq.term(d, ctx);
        for t in 0..(n - d) {
            let mut v = diag.get(t).clone();
            for s in t..(t + d) {
                v = ctx.mul(&v, &j[s]);
            }
            m.set(t, t + d, ctx.add(m.get(t, t + d), &v));
        }
    }
    m
}

/// Materializes sum_i D_i J^i as a banded oracle. Diagonal d of the result
/// is D_d[t] * j_t * ... * j_{t+d-1}, which stays prefix+periodic.
pub fn realize_oracle(ctx: &RingCtx, seq: &DiagSeq, j: &PeriodicSeq) -> TriOracle {
    let mut diags = std::collections::BTreeMap::new();
    for d in 0..seq.support() {
        let mut band = seq.term(d, ctx);
        for s in 0..d {
            band = band.mul(ctx, &j.shift_n(s));
        }
        diags.insert(d, band);
    }
    TriOracle::from_band(ctx.clone(), diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{make_ring, RingKind};
    use crate::testkit::{rand_seq, XorShift};

    fn q() -> RingCtx {
        make_ring(RingKind::Rationals, 2).unwrap()
    }

    fn ones_seq(ctx: &RingCtx, k: usize) -> DiagSeq {
        DiagSeq::new(vec![PeriodicSeq::ones(ctx); k])
    }

    #[test]
    fn jpart_examples() {
        let ctx = q();
        let i3 = Mat::identity(ctx.clone(), 3);
        assert_eq!(jpart_mat(&i3), Mat::zero(ctx.clone(), 3));
        let a = Mat::from_i64_rows(&ctx, &[&[1, 4, 9], &[0, 1, 5], &[0, 0, 1]]);
        assert_eq!(
            jpart_mat(&a),
            Mat::from_i64_rows(&ctx, &[&[0, 4, 0], &[0, 0, 5], &[0, 0, 0]])
        );
    }

    #[test]
    fn seq_product_binomials() {
        let ctx = q();
        let p = ones_seq(&ctx, 2); // I + J
        let sq = seq_product(&ctx, &p, &p);
        // (I + J)^2 = I + 2J + J^2
        assert!(sq.term(0, &ctx).is_constant(&ctx.one()));
        assert!(sq.term(1, &ctx).is_constant(&ctx.from_i64(2)));
        assert!(sq.term(2, &ctx).is_constant(&ctx.one()));
        let cube = power_seq(&ctx, &p, 3);
        assert!(cube.term(1, &ctx).is_constant(&ctx.from_i64(3)));
        assert!(cube.term(2, &ctx).is_constant(&ctx.from_i64(3)));
        assert!(cube.term(3, &ctx).is_constant(&ctx.one()));
    }

    #[test]
    fn seq_product_identity() {
        let ctx = q();
        let mut rng = XorShift::new(11);
        for _ in 0..10 {
            let x = DiagSeq::new((0..4).map(|_| rand_seq(&ctx, &mut rng, 2, 3)).collect());
            let e = DiagSeq::one(&ctx);
            assert!(seq_product(&ctx, &x, &e).eq_seq(&x, &ctx));
            assert!(seq_product(&ctx, &e, &x).eq_seq(&x, &ctx));
        }
    }

    #[test]
    fn seq_product_associative() {
        let ctx = q();
        let mut rng = XorShift::new(13);
        for _ in 0..10 {
            let a = DiagSeq::new((0..3).map(|_| rand_seq(&ctx, &mut rng, 1, 2)).collect());
            let b = DiagSeq::new((0..3).map(|_| rand_seq(&ctx, &mut rng, 1, 2)).collect());
            let c = DiagSeq::new((0..3).map(|_| rand_seq(&ctx, &mut rng, 1, 2)).collect());
            let l = seq_product(&ctx, &seq_product(&ctx, &a, &b), &c);
            let r = seq_product(&ctx, &a, &seq_product(&ctx, &b, &c));
            assert!(l.eq_seq(&r, &ctx));
        }
    }

    #[test]
    fn power_seq_first_coefficient_is_l() {
        let ctx = q();
        let mut rng = XorShift::new(17);
        for l in [1u32, 2, 3, 4, 6] {
            let mut terms = vec![PeriodicSeq::ones(&ctx), PeriodicSeq::ones(&ctx)];
            terms.push(rand_seq(&ctx, &mut rng, 1, 2));
            terms.push(rand_seq(&ctx, &mut rng, 1, 2));
            let p = DiagSeq::new(terms);
            let pw = power_seq(&ctx, &p, l);
            assert!(pw.term(0, &ctx).is_constant(&ctx.one()));
            assert!(pw.term(1, &ctx).is_constant(&ctx.from_i64(l as i64)));
        }
    }

    #[test]
    fn coherent_solve_one_plus_j() {
        let ctx = q();
        let a = Mat::from_i64_rows(&ctx, &[&[1, 3, 0], &[0, 1, 7], &[0, 0, 1]]);
        // not I + J: zero at (1,3) is consistent since 3*7 != 0 demands D_2 = 0
        let s = coherent_solve_mat(&a, 2).unwrap();
        assert!(s.term(0, &ctx).is_constant(&ctx.one()));
        assert!(s.term(1, &ctx).is_constant(&ctx.one()));
        assert!(s.term(2, &ctx).is_constant(&ctx.zero()));
        assert_eq!(realize_mat(&ctx, &s, &a.superdiag(), 3), a);
    }

    #[test]
    fn coherent_solve_rejects_isolated_corner() {
        let ctx = q();
        let a = Mat::from_i64_rows(&ctx, &[&[1, 0, 1], &[0, 1, 0], &[0, 0, 1]]);
        assert!(matches!(
            coherent_solve_mat(&a, 2),
            Err(Error::NotCoherent(_))
        ));
    }

    #[test]
    fn round_trip_random_realizations() {
        let ctx = q();
        let mut rng = XorShift::new(23);
        for _ in 0..20 {
            let support = 2 + rng.below(3) as usize;
            let mut terms = vec![PeriodicSeq::ones(&ctx), PeriodicSeq::ones(&ctx)];
            for _ in 2..support {
                terms.push(rand_seq(&ctx, &mut rng, 2, 2));
            }
            let p = DiagSeq::new(terms);
            let j = rand_seq(&ctx, &mut rng, 1, 3);
            let n = 8;
            let a = realize_mat(&ctx, &p, &j.take(n - 1), n);
            let solved = coherent_solve_mat(&a, n - 1).unwrap();
            assert_eq!(realize_mat(&ctx, &solved, &a.superdiag(), n), a);
        }
    }

    #[test]
    fn power_expansion_matches_matrix_power() {
        let ctx = q();
        let mut rng = XorShift::new(29);
        for k in [2u32, 3, 4] {
            for _ in 0..5 {
                let mut terms = vec![PeriodicSeq::ones(&ctx), PeriodicSeq::ones(&ctx)];
                terms.push(rand_seq(&ctx, &mut rng, 1, 2));
                terms.push(rand_seq(&ctx, &mut rng, 1, 2));
                let p = DiagSeq::new(terms);
                let j = rand_seq(&ctx, &mut rng, 1, 2);
                let n = 9;
                let a = realize_mat(&ctx, &p, &j.take(n - 1), n);
                let pw = power_seq(&ctx, &p, k);
                let lhs = realize_mat(&ctx, &pw, &j.take(n - 1), n);
                assert_eq!(lhs, a.pow(k as i64).unwrap());
                // the power is always coherent
                assert!(coherent_solve_mat(&a.pow(k as i64).unwrap(), n - 1).is_ok());
            }
        }
    }

    #[test]
    fn superdiagonal_additivity() {
        let ctx = q();
        let mut rng = XorShift::new(31);
        for l in 2..=5i64 {
            let a = crate::testkit::rand_unitriangular(&ctx, 6, &mut rng);
            let al = a.pow(l).unwrap();
            let lhs = al.superdiag();
            let rhs: Vec<_> = a
                .superdiag()
                .iter()
                .map(|v| ctx.mul(v, &ctx.from_i64(l)))
                .collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn oracle_realization_windows() {
        let ctx = q();
        let mut rng = XorShift::new(37);
        let mut terms = vec![PeriodicSeq::ones(&ctx), PeriodicSeq::ones(&ctx)];
        terms.push(rand_seq(&ctx, &mut rng, 1, 2));
        let p = DiagSeq::new(terms);
        let j = rand_seq(&ctx, &mut rng, 1, 2);
        let o = realize_oracle(&ctx, &p, &j);
        for n in [3usize, 6, 10] {
            assert_eq!(o.window(n).unwrap(), realize_mat(&ctx, &p, &j.take(n), n));
        }
    }
}
