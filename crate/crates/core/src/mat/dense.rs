//! Dense square matrices over a `RingCtx`, with exact group operations.

use crate::error::{Error, Result};
use crate::ring::{RingCtx, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    ctx: RingCtx,
    n: usize,
    e: Vec<Scalar>,
}

impl Mat {
    pub fn zero(ctx: RingCtx, n: usize) -> Self {
        let z = ctx.zero();
        Mat {
            ctx,
            n,
            e: vec![z; n * n],
        }
    }

    pub fn identity(ctx: RingCtx, n: usize) -> Self {
        let mut m = Mat::zero(ctx, n);
        for i in 0..n {
            m.e[i * n + i] = m.ctx.one();
        }
        m
    }

    pub fn from_fn(ctx: RingCtx, n: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut e = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                e.push(f(i, j));
            }
        }
        Mat { ctx, n, e }
    }

    pub fn from_rows(ctx: RingCtx, rows: Vec<Vec<Scalar>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Mat {
            ctx,
            n,
            e: rows.into_iter().flatten().collect(),
        }
    }

    /// Integer-entry convenience constructor.
    pub fn from_i64_rows(ctx: &RingCtx, rows: &[&[i64]]) -> Self {
        let n = rows.len();
        Mat::from_fn(ctx.clone(), n, |i, j| ctx.from_i64(rows[i][j]))
    }

    pub fn from_cols(ctx: RingCtx, cols: &[Vec<Scalar>]) -> Self {
        let n = cols.len();
        assert!(cols.iter().all(|c| c.len() == n), "matrix must be square");
        Mat::from_fn(ctx, n, |i, j| cols[j][i].clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ctx(&self) -> &RingCtx {
        &self.ctx
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.e[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.e[i * self.n + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let ctx = &self.ctx;
        Mat::from_fn(ctx.clone(), self.n, |i, j| {
            let mut acc = ctx.zero();
            for l in 0..self.n {
                let a = self.get(i, l);
                if ctx.is_zero(a) {
                    continue;
                }
                acc = ctx.add(&acc, &ctx.mul(a, other.get(l, j)));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        let ctx = &self.ctx;
        (0..self.n)
            .map(|i| {
                let mut acc = ctx.zero();
                for l in 0..self.n {
                    acc = ctx.add(&acc, &ctx.mul(self.get(i, l), &v[l]));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let ctx = &self.ctx;
        Mat::from_fn(ctx.clone(), self.n, |i, j| ctx.add(self.get(i, j), other.get(i, j)))
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let ctx = &self.ctx;
        Mat::from_fn(ctx.clone(), self.n, |i, j| ctx.sub(self.get(i, j), other.get(i, j)))
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        let ctx = &self.ctx;
        Mat::from_fn(ctx.clone(), self.n, |i, j| ctx.mul(self.get(i, j), s))
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.ctx.clone(), self.n, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> Scalar {
        let mut acc = self.ctx.zero();
        for i in 0..self.n {
            acc = self.ctx.add(&acc, self.get(i, i));
        }
        acc
    }

    /// Exact inverse: back-substitution on triangular input, Gauss-Jordan
    /// otherwise. Fails with `Singular` when no inverse exists.
    pub fn inverse(&self) -> Result<Mat> {
        if self.is_upper_triangular() {
            return self.inverse_upper();
        }
        if self.transpose().is_upper_triangular() {
            return Ok(self.transpose().inverse_upper()?.transpose());
        }
        self.inverse_general()
    }

    fn inverse_upper(&self) -> Result<Mat> {
        let ctx = self.ctx.clone();
        let n = self.n;
        let mut inv = Mat::zero(ctx.clone(), n);
        let mut dinv = Vec::with_capacity(n);
        for i in 0..n {
            dinv.push(
                ctx.inv(self.get(i, i))
                    .map_err(|_| Error::Singular(format!("zero diagonal entry at {}", i + 1)))?,
            );
        }
        for j in (0..n).rev() {
            inv.set(j, j, dinv[j].clone());
            for i in (0..j).rev() {
                let mut acc = ctx.zero();
                for l in (i + 1)..=j {
                    let a = self.get(i, l);
                    if ctx.is_zero(a) {
                        continue;
                    }
                    acc = ctx.add(&acc, &ctx.mul(a, inv.get(l, j)));
                }
                inv.set(i, j, ctx.neg(&ctx.mul(&dinv[i], &acc)));
            }
        }
        Ok(inv)
    }

    fn inverse_general(&self) -> Result<Mat> {
        let ctx = self.ctx.clone();
        let n = self.n;
        let mut a = self.clone();
        let mut r = Mat::identity(ctx.clone(), n);
        for col in 0..n {
            // find a pivot
            let pivot_row = (col..n)
                .find(|&row| !ctx.is_zero(a.get(row, col)))
                .ok_or_else(|| Error::Singular(format!("no pivot in column {col}")))?;
            if pivot_row != col {
                for j in 0..n {
                    let t = a.get(pivot_row, j).clone();
                    a.set(pivot_row, j, a.get(col, j).clone());
                    a.set(col, j, t);
                    let t = r.get(pivot_row, j).clone();
                    r.set(pivot_row, j, r.get(col, j).clone());
                    r.set(col, j, t);
                }
            }
            let pinv = ctx.inv(a.get(col, col))?;
            for j in 0..n {
                a.set(col, j, ctx.mul(a.get(col, j), &pinv));
                r.set(col, j, ctx.mul(r.get(col, j), &pinv));
            }
            for row in 0..n {
                if row == col || ctx.is_zero(a.get(row, col)) {
                    continue;
                }
                let f = a.get(row, col).clone();
                for j in 0..n {
                    let va = ctx.sub(a.get(row, j), &ctx.mul(&f, a.get(col, j)));
                    a.set(row, j, va);
                    let vr = ctx.sub(r.get(row, j), &ctx.mul(&f, r.get(col, j)));
                    r.set(row, j, vr);
                }
            }
        }
        debug_assert_eq!(self.mul(&r), Mat::identity(ctx, n));
        Ok(r)
    }

    pub fn det(&self) -> Scalar {
        let ctx = self.ctx.clone();
        let n = self.n;
        let mut a = self.clone();
        let mut det = ctx.one();
        for col in 0..n {
            let pivot_row = match (col..n).find(|&row| !ctx.is_zero(a.get(row, col))) {
                Some(r) => r,
                None => return ctx.zero(),
            };
            if pivot_row != col {
                for j in 0..n {
                    let t = a.get(pivot_row, j).clone();
                    a.set(pivot_row, j, a.get(col, j).clone());
                    a.set(col, j, t);
                }
                det = ctx.neg(&det);
            }
            let p = a.get(col, col).clone();
            det = ctx.mul(&det, &p);
            let pinv = ctx.inv(&p).expect("nonzero pivot");
            for row in (col + 1)..n {
                if ctx.is_zero(a.get(row, col)) {
                    continue;
                }
                let f = ctx.mul(a.get(row, col), &pinv);
                for j in col..n {
                    let v = ctx.sub(a.get(row, j), &ctx.mul(&f, a.get(col, j)));
                    a.set(row, j, v);
                }
            }
        }
        det
    }

    pub fn pow(&self, e: i64) -> Result<Mat> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut exp = e.unsigned_abs();
        let mut acc = Mat::identity(self.ctx.clone(), self.n);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            exp >>= 1;
        }
        Ok(acc)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.ctx.is_zero(self.get(i, j))))
    }

    pub fn is_unitriangular(&self) -> bool {
        self.is_upper_triangular() && (0..self.n).all(|i| self.ctx.is_one(self.get(i, i)))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.ctx.is_zero(self.get(i, j))))
    }

    pub fn is_scalar(&self) -> bool {
        self.is_diagonal() && (1..self.n).all(|i| self.get(i, i) == self.get(0, 0))
    }

    pub fn diag(&self) -> Vec<Scalar> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn superdiag(&self) -> Vec<Scalar> {
        (0..self.n.saturating_sub(1))
            .map(|i| self.get(i, i + 1).clone())
            .collect()
    }

    pub fn block(&self, r0: usize, c0: usize, size: usize) -> Mat {
        Mat::from_fn(self.ctx.clone(), size, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// Basis of the kernel, as column vectors (exact elimination, free
    /// variables set to unit coordinates).
    pub fn null_space(&self) -> Vec<Vec<Scalar>> {
        let ctx = self.ctx.clone();
        let n = self.n;
        let mut a = self.clone();
        let mut pivot_cols = Vec::new();
        let mut row = 0;
        for col in 0..n {
            let Some(pr) = (row..n).find(|&r| !ctx.is_zero(a.get(r, col))) else {
                continue;
            };
            if pr != row {
                for j in 0..n {
                    let t = a.get(pr, j).clone();
                    a.set(pr, j, a.get(row, j).clone());
                    a.set(row, j, t);
                }
            }
            let pinv = ctx.inv(a.get(row, col)).expect("nonzero pivot");
            for j in 0..n {
                a.set(row, j, ctx.mul(a.get(row, j), &pinv));
            }
            for r in 0..n {
                if r == row || ctx.is_zero(a.get(r, col)) {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..n {
                    let v = ctx.sub(a.get(r, j), &ctx.mul(&f, a.get(row, j)));
                    a.set(r, j, v);
                }
            }
            pivot_cols.push(col);
            row += 1;
            if row == n {
                break;
            }
        }
        let mut basis = Vec::new();
        for free in 0..n {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![ctx.zero(); n];
            v[free] = ctx.one();
            for (r, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = ctx.neg(a.get(r, free));
            }
            basis.push(v);
        }
        basis
    }

    pub fn block_diag(ctx: RingCtx, parts: &[Mat]) -> Mat {
        let n: usize = parts.iter().map(|p| p.n).sum();
        let mut m = Mat::zero(ctx, n);
        let mut off = 0;
        for p in parts {
            for i in 0..p.n {
                for j in 0..p.n {
                    m.set(off + i, off + j, p.get(i, j).clone());
                }
            }
            off += p.n;
        }
        m
    }
}

/// Kernel basis of a rectangular system given as equation rows over `width`
/// unknowns. Free variables take unit values.
pub fn null_space_rows(ctx: &RingCtx, mut rows: Vec<Vec<Scalar>>, width: usize) -> Vec<Vec<Scalar>> {
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..width {
        let Some(pr) = (rank..rows.len()).find(|&r| !ctx.is_zero(&rows[r][col])) else {
            continue;
        };
        rows.swap(pr, rank);
        let pinv = ctx.inv(&rows[rank][col]).expect("nonzero pivot");
        for j in 0..width {
            rows[rank][j] = ctx.mul(&rows[rank][j], &pinv);
        }
        for r in 0..rows.len() {
            if r == rank || ctx.is_zero(&rows[r][col]) {
                continue;
            }
            let f = rows[r][col].clone();
            for j in 0..width {
                let v = ctx.sub(&rows[r][j], &ctx.mul(&f, &rows[rank][j]));
                rows[r][j] = v;
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in 0..width {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![ctx.zero(); width];
        v[free] = ctx.one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = ctx.neg(&rows[r][free]);
        }
        basis.push(v);
    }
    basis
}

/// Incremental independent-set builder over column vectors: candidates are
/// reduced against the vectors accepted so far, so membership in the span is
/// decided exactly.
pub struct SpanBuilder {
    ctx: RingCtx,
    dim: usize,
    reduced: Vec<(usize, Vec<Scalar>)>,
}

impl SpanBuilder {
    pub fn new(ctx: RingCtx, dim: usize) -> Self {
        SpanBuilder {
            ctx,
            dim,
            reduced: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.reduced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reduced.is_empty()
    }

    /// Adds the vector if it is independent of the accepted set.
    pub fn try_add(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.dim);
        let ctx = &self.ctx;
        let mut w = v.to_vec();
        for (p, r) in &self.reduced {
            if !ctx.is_zero(&w[*p]) {
                let f = w[*p].clone();
                for i in 0..self.dim {
                    w[i] = ctx.sub(&w[i], &ctx.mul(&f, &r[i]));
                }
            }
        }
        let Some(p) = (0..self.dim).find(|&i| !ctx.is_zero(&w[i])) else {
            return false;
        };
        let inv = ctx.inv(&w[p]).expect("nonzero pivot");
        for i in 0..self.dim {
            w[i] = ctx.mul(&w[i], &inv);
        }
        self.reduced.push((p, w));
        true
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        let mut probe = SpanBuilder {
            ctx: self.ctx.clone(),
            dim: self.dim,
            reduced: self.reduced.clone(),
        };
        !probe.try_add(v)
    }
}

/// [x, y] = x y x^-1 y^-1.
pub(crate) fn commutator_dense(x: &Mat, y: &Mat) -> Result<Mat> {
    Ok(x.mul(y).mul(&x.inverse()?).mul(&y.inverse()?))
}

/// g^h = h g h^-1.
pub(crate) fn conjugate_dense(x: &Mat, h: &Mat) -> Result<Mat> {
    Ok(h.mul(x).mul(&h.inverse()?))
}

impl Mat {
    pub fn commutator(&self, other: &Mat) -> Result<Mat> {
        commutator_dense(self, other)
    }

    /// Conjugation by h, returning h * self * h^-1.
    pub fn conjugate_by(&self, h: &Mat) -> Result<Mat> {
        conjugate_dense(self, h)
    }

    /// Exact test of X^k = I.
    pub fn order_divides(&self, k: u32) -> bool {
        match self.pow(k as i64) {
            Ok(p) => p == Mat::identity(self.ctx.clone(), self.n),
            Err(_) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{make_ring, RingKind};
    use crate::testkit::{rand_unitriangular, XorShift};

    fn q() -> RingCtx {
        make_ring(RingKind::Rationals, 2).unwrap()
    }

    #[test]
    fn inverse_identity() {
        let ctx = q();
        let i = Mat::identity(ctx, 3);
        assert_eq!(i.inverse().unwrap(), i);
    }

    #[test]
    fn shear_power() {
        let ctx = q();
        let a = Mat::from_i64_rows(&ctx, &[&[1, 1], &[0, 1]]);
        let a5 = a.pow(5).unwrap();
        assert_eq!(a5, Mat::from_i64_rows(&ctx, &[&[1, 5], &[0, 1]]));
    }

    #[test]
    fn rotation_inverse_by_adjugate() {
        let ctx = q();
        let a = Mat::from_i64_rows(&ctx, &[&[0, 1], &[-1, 0]]);
        assert_eq!(
            a.inverse().unwrap(),
            Mat::from_i64_rows(&ctx, &[&[0, -1], &[1, 0]])
        );
    }

    #[test]
    fn commutator_examples() {
        let ctx = q();
        let i2 = Mat::identity(ctx.clone(), 2);
        let y = Mat::from_i64_rows(&ctx, &[&[1, 0], &[0, -1]]);
        assert_eq!(i2.commutator(&y).unwrap(), i2);
        let x = Mat::from_i64_rows(&ctx, &[&[1, 1], &[0, 1]]);
        assert_eq!(
            x.commutator(&y).unwrap(),
            Mat::from_i64_rows(&ctx, &[&[1, 2], &[0, 1]])
        );
        assert_eq!(x.commutator(&x).unwrap(), i2);
    }

    #[test]
    fn order_checks() {
        let q2 = q();
        assert!(Mat::identity(q2.clone(), 3).order_divides(5));
        let shear = Mat::from_i64_rows(&q2, &[&[1, 1], &[0, 1]]);
        assert!(!shear.order_divides(2));
        let f7 = make_ring(RingKind::PrimeField(7), 3).unwrap();
        let d = Mat::from_fn(f7.clone(), 2, |i, j| {
            if i != j {
                f7.zero()
            } else if i == 0 {
                f7.omega()
            } else {
                f7.one()
            }
        });
        assert!(d.order_divides(3));
    }

    #[test]
    fn conjugation_preserves_order() {
        let ctx = make_ring(RingKind::PrimeField(7), 3).unwrap();
        let mut rng = XorShift::new(7);
        for _ in 0..20 {
            let h = rand_unitriangular(&ctx, 3, &mut rng);
            let mut x = rand_unitriangular(&ctx, 3, &mut rng);
            // force order dividing 3 entries on the diagonal stay 1; use a
            // diagonal omega twist instead
            for i in 0..3 {
                x.set(i, i, ctx.pow_u64(&ctx.omega(), (i % 3) as u64));
            }
            let conj = x.conjugate_by(&h).unwrap();
            assert_eq!(x.order_divides(3), conj.order_divides(3));
        }
    }

    #[test]
    fn conjugate_upper_shear() {
        let ctx = q();
        let x = Mat::from_i64_rows(&ctx, &[&[1, 0], &[0, 2]]);
        let h = Mat::from_i64_rows(&ctx, &[&[1, 1], &[0, 1]]);
        // h x h^-1
        assert_eq!(
            x.conjugate_by(&h).unwrap(),
            Mat::from_i64_rows(&ctx, &[&[1, 1], &[0, 2]])
        );
        assert_eq!(x.conjugate_by(&Mat::identity(ctx, 2)).unwrap(), x);
    }

    #[test]
    fn det_and_scalar_predicates() {
        let ctx = q();
        let a = Mat::from_i64_rows(&ctx, &[&[1, 2], &[3, 7]]);
        assert_eq!(a.det(), ctx.from_i64(1));
        assert!(!a.is_scalar());
        let s = Mat::from_i64_rows(&ctx, &[&[-1, 0], &[0, -1]]);
        assert!(s.is_scalar());
        assert!(Mat::from_i64_rows(&ctx, &[&[1, 5], &[0, 1]]).is_unitriangular());
    }
}
