//! Vershik-Kerov block matrices: spectral splitting of the finite corner,
//! Sylvester decoupling of the coupling block, and direct-sum assembly of
//! the commutator certificates for the two halves.

use std::sync::Arc;

use crate::commfact::{Certificate, CommutatorWord, GenMx, Producer, WordTerm};
use crate::error::{Error, Result};
use crate::mat::{oracle_pow, Coupling, Mat, SpanBuilder, TriOracle};
use crate::poly::{char_poly, split_root_one, Poly};
use crate::ring::{RingCtx, RingKind, Scalar};
use crate::seq::PeriodicSeq;

/// Block matrix [[M1, M2], [0, M3]] with an invertible finite corner, a
/// finite-row coupling with eventually periodic columns, and an infinite
/// upper triangular tail.
#[derive(Clone)]
pub struct VKMat {
    pub n: usize,
    pub m1: Mat,
    pub m2: Coupling,
    pub m3: TriOracle,
}

impl VKMat {
    pub fn expr(&self) -> VkExpr {
        VkExpr::block(self.n, self.m1.clone(), self.m2.clone(), self.m3.clone())
    }

    pub fn window(&self, n: usize) -> Result<Mat> {
        self.expr().window(n)
    }
}

/// Lazy block-matrix expression. Windows of size at least every corner in
/// the tree are exact: products, inverses and conjugations of block upper
/// triangular matrices never reach past column max(j, corner).
#[derive(Clone)]
pub struct VkExpr {
    ctx: RingCtx,
    node: Arc<VkNode>,
}

enum VkNode {
    Block {
        n: usize,
        m1: Mat,
        m2: Coupling,
        m3: TriOracle,
    },
    Product(VkExpr, VkExpr),
    Inverse(VkExpr),
    Power(VkExpr, i64),
    Conjugate {
        x: VkExpr,
        h: VkExpr,
    },
}

impl VkExpr {
    fn make(ctx: RingCtx, node: VkNode) -> Self {
        VkExpr {
            ctx,
            node: Arc::new(node),
        }
    }

    pub fn block(n: usize, m1: Mat, m2: Coupling, m3: TriOracle) -> Self {
        assert_eq!(m1.n(), n);
        assert_eq!(m2.rows(), n);
        let ctx = m3.ctx().clone();
        Self::make(ctx, VkNode::Block { n, m1, m2, m3 })
    }

    pub fn from_tri(t: &TriOracle) -> Self {
        let ctx = t.ctx().clone();
        Self::block(
            0,
            Mat::zero(ctx.clone(), 0),
            Coupling::zero(ctx, 0),
            t.clone(),
        )
    }

    pub fn product(a: &VkExpr, b: &VkExpr) -> Self {
        Self::make(a.ctx.clone(), VkNode::Product(a.clone(), b.clone()))
    }

    pub fn inverse(a: &VkExpr) -> Self {
        Self::make(a.ctx.clone(), VkNode::Inverse(a.clone()))
    }

    pub fn power(a: &VkExpr, e: i64) -> Self {
        Self::make(a.ctx.clone(), VkNode::Power(a.clone(), e))
    }

    /// h x h^-1.
    pub fn conjugate(x: &VkExpr, h: &VkExpr) -> Self {
        Self::make(
            x.ctx.clone(),
            VkNode::Conjugate {
                x: x.clone(),
                h: h.clone(),
            },
        )
    }

    pub fn ctx(&self) -> RingCtx {
        self.ctx.clone()
    }

    /// Largest corner size in the tree; windows must be at least this.
    pub fn min_window(&self) -> usize {
        match self.node.as_ref() {
            VkNode::Block { n, .. } => *n,
            VkNode::Product(a, b) => a.min_window().max(b.min_window()),
            VkNode::Inverse(a) | VkNode::Power(a, _) => a.min_window(),
            VkNode::Conjugate { x, h } => x.min_window().max(h.min_window()),
        }
    }

    pub fn window(&self, n: usize) -> Result<Mat> {
        if n < self.min_window() {
            return Err(Error::Precondition(format!(
                "window {n} is smaller than the block corner {}",
                self.min_window()
            )));
        }
        self.window_unchecked(n)
    }

    fn window_unchecked(&self, n: usize) -> Result<Mat> {
        let ctx = &self.ctx;
        match self.node.as_ref() {
            VkNode::Block { n: nc, m1, m2, m3 } => {
                let mut w = Mat::zero(ctx.clone(), n);
                for i in 0..*nc {
                    for j in 0..*nc {
                        w.set(i, j, m1.get(i, j).clone());
                    }
                }
                for j in (*nc + 1)..=n {
                    let col = m2.col(j - nc)?;
                    for i in 0..*nc {
                        w.set(i, j - 1, col[i].clone());
                    }
                }
                let tw = m3.window(n - nc)?;
                for i in 0..(n - nc) {
                    for j in 0..(n - nc) {
                        w.set(nc + i, nc + j, tw.get(i, j).clone());
                    }
                }
                Ok(w)
            }
            VkNode::Product(a, b) => Ok(a.window_unchecked(n)?.mul(&b.window_unchecked(n)?)),
            VkNode::Inverse(a) => a.window_unchecked(n)?.inverse(),
            VkNode::Power(a, e) => a.window_unchecked(n)?.pow(*e),
            VkNode::Conjugate { x, h } => {
                let hw = h.window_unchecked(n)?;
                Ok(hw.mul(&x.window_unchecked(n)?).mul(&hw.inverse()?))
            }
        }
    }

    pub(crate) fn view(&self) -> VkView<'_> {
        match self.node.as_ref() {
            VkNode::Block { n, m1, m2, m3 } => VkView::Block {
                n: *n,
                m1,
                m2,
                m3,
            },
            VkNode::Product(a, b) => VkView::Product(a, b),
            VkNode::Inverse(a) => VkView::Inverse(a),
            VkNode::Power(a, e) => VkView::Power(a, *e),
            VkNode::Conjugate { x, h } => VkView::Conjugate(x, h),
        }
    }
}

pub(crate) enum VkView<'a> {
    Block {
        n: usize,
        m1: &'a Mat,
        m2: &'a Coupling,
        m3: &'a TriOracle,
    },
    Product(&'a VkExpr, &'a VkExpr),
    Inverse(&'a VkExpr),
    Power(&'a VkExpr, i64),
    Conjugate(&'a VkExpr, &'a VkExpr),
}

// ---------------------------------------------------------------------------
// spectral splitting
// ---------------------------------------------------------------------------

/// Splits M1 by the eigenvalue-1 structure: returns (A, Nu, Q) with
/// Q M1 Q^-1 = diag(A, Nu), A free of eigenvalue 1 and Nu unitriangular
/// (triangularized along the kernel chain of Nu - I). Either block may be
/// empty. The determinant is not constrained here so tests can exercise the
/// projector on small non-SL inputs.
pub fn spectral_split(m1: &Mat) -> Result<(Mat, Mat, Mat)> {
    let ctx = m1.ctx().clone();
    let n = m1.n();
    if n == 0 {
        return Ok((
            Mat::zero(ctx.clone(), 0),
            Mat::zero(ctx.clone(), 0),
            Mat::identity(ctx, 0),
        ));
    }
    let chi = char_poly(m1);
    let (mult, g) = split_root_one(&ctx, &chi);
    if mult == 0 {
        return Ok((m1.clone(), Mat::zero(ctx.clone(), 0), Mat::identity(ctx, n)));
    }
    let ident = Mat::identity(ctx.clone(), n);
    let mi = m1.sub(&ident);

    // generalized eigenspace basis, ordered along the kernel chain
    let mut chain = SpanBuilder::new(ctx.clone(), n);
    let mut w_cols: Vec<Vec<Scalar>> = Vec::new();
    let mut pw = ident.clone();
    for _ in 1..=mult {
        pw = pw.mul(&mi);
        for v in pw.null_space() {
            if chain.try_add(&v) {
                w_cols.push(v);
            }
        }
    }
    if w_cols.len() != mult {
        return Err(Error::Internal(format!(
            "kernel chain produced {} vectors, expected {mult}",
            w_cols.len()
        )));
    }

    // complement: image of I - Pi1 where Pi1 = v(M) g(M) projects onto the
    // generalized eigenspace, from the Bezout identity u (x-1)^m + v g = 1
    let mut a_cols: Vec<Vec<Scalar>> = Vec::new();
    if mult < n {
        let mut f1 = Poly::one(&ctx);
        let linear = Poly::new(&ctx, vec![ctx.from_i64(-1), ctx.one()]);
        for _ in 0..mult {
            f1 = f1.mul(&ctx, &linear);
        }
        let (gcd, _u, v) = f1.ext_gcd(&ctx, &g);
        if !(gcd.degree() == 0 && ctx.is_one(&gcd.coeffs[0])) {
            return Err(Error::Internal("factor polynomials are not coprime".into()));
        }
        let pi1 = v.eval_mat(m1).mul(&g.eval_mat(m1));
        let compl = ident.sub(&pi1);
        let mut sb = SpanBuilder::new(ctx.clone(), n);
        for j in 0..n {
            let col = compl.col(j);
            if sb.try_add(&col) {
                a_cols.push(col);
            }
        }
        if a_cols.len() != n - mult {
            return Err(Error::Internal("complement projector has the wrong rank".into()));
        }
    }

    let mut cols = a_cols;
    cols.extend(w_cols);
    let b = Mat::from_cols(ctx.clone(), &cols);
    let q = b.inverse()?;
    let d = q.mul(m1).mul(&b);
    let na = n - mult;
    let a = d.block(0, 0, na);
    let nu = d.block(na, na, mult);
    // exact postconditions
    for i in 0..n {
        for j in 0..n {
            let in_a = i < na && j < na;
            let in_nu = i >= na && j >= na;
            if !in_a && !in_nu && !ctx.is_zero(d.get(i, j)) {
                return Err(Error::Internal("spectral split left off-block entries".into()));
            }
        }
    }
    if !nu.is_unitriangular() {
        return Err(Error::Internal("unipotent block is not unitriangular".into()));
    }
    if na > 0 && ctx.is_zero(&a.sub(&Mat::identity(ctx.clone(), na)).det()) {
        return Err(Error::Internal("split block still has eigenvalue 1".into()));
    }
    Ok((a, nu, q))
}

/// Lazy solution Y of A Y - Y T = -B, column by column via
/// (A - I) y_j = -b_j + sum_{l<j} y_l T_{l,j}. Fails when 1 is an
/// eigenvalue of A.
pub fn sylvester_decouple(a: &Mat, bc: &Coupling, t: &TriOracle) -> Result<Coupling> {
    let ctx = a.ctx().clone();
    let ami = a.sub(&Mat::identity(ctx, a.n()));
    let inv = ami.inverse().map_err(|_| Error::EigenvalueOne)?;
    Ok(Coupling::sylvester(a.clone(), inv, bc, t))
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

pub struct VkOutcome {
    pub cert: Certificate,
    pub regular: bool,
    pub ring: RingCtx,
}

/// Conjugates the block matrix onto diag(A, T'): the eigenvalue-1 part of
/// the corner is absorbed into the unitriangular tail and the remaining
/// coupling is killed by the Sylvester solve. Returns (H, A, T') with
/// H M H^-1 = diag(A, T') on every window.
pub fn conjugate_to_block_diag(m: &VKMat) -> Result<(VkExpr, Mat, TriOracle)> {
    let ctx = m.m1.ctx().clone();
    let n = m.n;
    let (a, nu, q) = spectral_split(&m.m1)?;
    let na = a.n();
    let mm = nu.n();
    let c = Coupling::matmul(q.clone(), &m.m2);
    let t_tail = if mm == 0 {
        m.m3.clone()
    } else {
        TriOracle::tail_patch(nu, Coupling::row_range(&c, na, mm), m.m3.clone())
    };
    let h1 = VkExpr::block(
        n,
        q,
        Coupling::zero(ctx.clone(), n),
        TriOracle::identity(ctx.clone()),
    );
    if na == 0 {
        return Ok((h1, a, t_tail));
    }
    let b_prime = Coupling::shift_cols(&Coupling::row_range(&c, 0, na), mm);
    let y = sylvester_decouple(&a, &b_prime, &t_tail)?;
    let h2 = VkExpr::block(
        na,
        Mat::identity(ctx.clone(), na),
        Coupling::negate(&y),
        TriOracle::identity(ctx.clone()),
    );
    Ok((VkExpr::product(&h2, &h1), a, t_tail))
}

fn required_scalar_ring(ctx: &RingCtx, a: &Mat) -> Result<Option<RingCtx>> {
    if a.n() == 0 || !a.is_scalar() {
        return Ok(None);
    }
    let RingKind::Cyclotomic(m) = *ctx.kind() else {
        return Ok(None);
    };
    let lambda = a.get(0, 0);
    let Some(ord) = ctx.root_of_unity_order(lambda) else {
        return Err(Error::Precondition(
            "scalar corner block is not a root of unity; it cannot have determinant 1".into(),
        ));
    };
    let k = ctx.k();
    let need = num_lcm(m, k * ord as u32);
    if need == m {
        Ok(None)
    } else {
        Ok(Some(crate::ring::make_ring(RingKind::Cyclotomic(need), k)?))
    }
}

fn num_lcm(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Theorem-level factorization on the Vershik-Kerov group: the corner and
/// the tail are factored separately and the two words are zipped term by
/// term as block direct sums, padding the shorter word with identity
/// commutators, so the total length is the maximum of the two.
pub fn factor_vk(m: &VKMat, ctx: &RingCtx) -> Result<VkOutcome> {
    factor_vk_inner(m, ctx, 0)
}

fn factor_vk_inner(m: &VKMat, ctx: &RingCtx, depth: usize) -> Result<VkOutcome> {
    if !matches!(ctx.kind(), RingKind::Cyclotomic(_)) {
        return Err(Error::Precondition("the block pipeline needs a cyclotomic ring".into()));
    }
    if !ctx.is_one(&m.m1.det()) {
        return Err(Error::Precondition("corner determinant must be 1".into()));
    }
    if !m.m3.is_unitriangular_structural() {
        return Err(Error::Precondition("tail must be structurally unitriangular".into()));
    }
    let (h, a, t_tail) = conjugate_to_block_diag(m)?;

    // scalar corners may need k-th roots from a larger cyclotomic field;
    // lift the whole problem once and restart
    if depth == 0 {
        if let Some(ctx2) = required_scalar_ring(ctx, &a)? {
            let lifted = lift_vkmat(ctx, &ctx2, m)?;
            return factor_vk_inner(&lifted, &ctx2, 1);
        }
    }

    let na = a.n();
    let (a_gens, a_word, regular) = if na == 0 {
        (Vec::new(), CommutatorWord::default(), true)
    } else {
        let out = crate::slfact::factor_sl(&a, ctx)?;
        if out.ring != *ctx {
            return Err(Error::Internal("ring enlargement slipped past the pre-lift".into()));
        }
        let mut gens = Vec::with_capacity(out.cert.generators.len());
        for (_, g) in out.cert.generators {
            let GenMx::Dense(d) = g else {
                return Err(Error::Internal("corner factorization produced a non-dense generator".into()));
            };
            gens.push(d);
        }
        (gens, out.cert.word, out.regular)
    };
    let (t_gens_named, t_word) = crate::commfact::parts_unitriangular_for(&t_tail)?;
    let t_gens: Vec<TriOracle> = t_gens_named.into_iter().map(|(_, g)| g).collect();

    // zip the words as block direct sums, one fresh generator pair per term
    let len = a_word.len().max(t_word.len());
    let h_inv = VkExpr::inverse(&h);
    let mut generators: Vec<(String, GenMx)> = Vec::with_capacity(2 * len);
    let mut terms = Vec::with_capacity(len);
    for i in 0..len {
        let (ax, ay) = match a_word.terms.get(i) {
            Some(t) => (
                a_gens[t.x.0].pow(t.x.1)?,
                a_gens[t.y.0].pow(t.y.1)?,
            ),
            None => (
                Mat::identity(ctx.clone(), na),
                Mat::identity(ctx.clone(), na),
            ),
        };
        let (tx, ty) = match t_word.terms.get(i) {
            Some(t) => (
                oracle_pow(&t_gens[t.x.0], t.x.1),
                oracle_pow(&t_gens[t.y.0], t.y.1),
            ),
            None => (
                TriOracle::identity(ctx.clone()),
                TriOracle::identity(ctx.clone()),
            ),
        };
        let bx = VkExpr::block(na, ax, Coupling::zero(ctx.clone(), na), tx);
        let by = VkExpr::block(na, ay, Coupling::zero(ctx.clone(), na), ty);
        let gx = VkExpr::conjugate(&bx, &h_inv);
        let gy = VkExpr::conjugate(&by, &h_inv);
        generators.push((format!("t{i:02}x"), GenMx::Vk(gx)));
        generators.push((format!("t{i:02}y"), GenMx::Vk(gy)));
        terms.push(WordTerm {
            x: (2 * i, 1),
            y: (2 * i + 1, 1),
        });
    }
    let cert = Certificate {
        ctx: ctx.clone(),
        producer: Producer::Theorem3,
        claimed_length: len,
        generators,
        word: CommutatorWord { terms },
    };
    Ok(VkOutcome {
        cert,
        regular,
        ring: ctx.clone(),
    })
}

// ---------------------------------------------------------------------------
// ring lifting for descriptor-level inputs
// ---------------------------------------------------------------------------

pub fn lift_mat(src: &RingCtx, dst: &RingCtx, m: &Mat) -> Result<Mat> {
    let mut out = Mat::zero(dst.clone(), m.n());
    for i in 0..m.n() {
        for j in 0..m.n() {
            out.set(i, j, src.lift_scalar(dst, m.get(i, j))?);
        }
    }
    Ok(out)
}

pub fn lift_seq(src: &RingCtx, dst: &RingCtx, s: &PeriodicSeq) -> Result<PeriodicSeq> {
    let prefix = s
        .prefix()
        .iter()
        .map(|v| src.lift_scalar(dst, v))
        .collect::<Result<Vec<_>>>()?;
    let period = s
        .period()
        .iter()
        .map(|v| src.lift_scalar(dst, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(PeriodicSeq::new(prefix, period))
}

/// Lifts descriptor couplings (periodic column data only).
pub fn lift_coupling(src: &RingCtx, dst: &RingCtx, c: &Coupling) -> Result<Coupling> {
    match c.describe() {
        crate::mat::CouplingView::Desc { prefix, period } => {
            let lift_cols = |cols: &Vec<Vec<Scalar>>| -> Result<Vec<Vec<Scalar>>> {
                cols.iter()
                    .map(|col| col.iter().map(|v| src.lift_scalar(dst, v)).collect())
                    .collect()
            };
            Ok(Coupling::from_cols(
                dst.clone(),
                c.rows(),
                lift_cols(prefix)?,
                lift_cols(period)?,
            ))
        }
        _ => Err(Error::Precondition(
            "only descriptor couplings can be lifted to a larger ring".into(),
        )),
    }
}

/// Lifts banded / corner+tail oracles (descriptor-level inputs).
pub fn lift_oracle(src: &RingCtx, dst: &RingCtx, t: &TriOracle) -> Result<TriOracle> {
    match t.view() {
        crate::mat::OracleView::Band(diags) => {
            let mut out = std::collections::BTreeMap::new();
            for (d, s) in diags {
                out.insert(*d, lift_seq(src, dst, s)?);
            }
            Ok(TriOracle::from_band(dst.clone(), out))
        }
        crate::mat::OracleView::Tail { corner, coupling, rest } => Ok(TriOracle::tail_patch(
            lift_mat(src, dst, corner)?,
            lift_coupling(src, dst, coupling)?,
            lift_oracle(src, dst, rest)?,
        )),
        _ => Err(Error::Precondition(
            "only descriptor oracles can be lifted to a larger ring".into(),
        )),
    }
}

pub fn lift_vkmat(src: &RingCtx, dst: &RingCtx, m: &VKMat) -> Result<VKMat> {
    Ok(VKMat {
        n: m.n,
        m1: lift_mat(src, dst, &m.m1)?,
        m2: lift_coupling(src, dst, &m.m2)?,
        m3: lift_oracle(src, dst, &m.m3)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commfact::verify_certificate;
    use crate::ring::make_ring;
    use crate::testkit::*;

    fn z3() -> RingCtx {
        make_ring(RingKind::Cyclotomic(3), 3).unwrap()
    }

    #[test]
    fn spectral_split_unipotent() {
        let ctx = z3();
        let mut rng = XorShift::new(5);
        let m1 = rand_unitriangular(&ctx, 3, &mut rng);
        let (a, nu, q) = spectral_split(&m1).unwrap();
        assert_eq!(a.n(), 0);
        assert_eq!(nu.n(), 3);
        assert!(nu.is_unitriangular());
        let d = q.mul(&m1).mul(&q.inverse().unwrap());
        assert_eq!(d, nu);
    }

    #[test]
    fn spectral_split_no_eigenvalue_one() {
        let ctx = make_ring(RingKind::Rationals, 2).unwrap();
        let m1 = Mat::from_rows(
            ctx.clone(),
            vec![
                vec![ctx.from_i64(2), ctx.zero()],
                vec![ctx.zero(), ctx.from_ratio(1, 2)],
            ],
        );
        let (a, nu, _) = spectral_split(&m1).unwrap();
        assert_eq!(a.n(), 2);
        assert_eq!(nu.n(), 0);
        assert_eq!(a, m1);
    }

    #[test]
    fn spectral_split_mixed() {
        let ctx = make_ring(RingKind::Rationals, 2).unwrap();
        // det 2: the split itself does not demand determinant 1
        let m1 = Mat::from_i64_rows(&ctx, &[&[1, 1], &[0, 2]]);
        let (a, nu, q) = spectral_split(&m1).unwrap();
        assert_eq!(a, Mat::from_i64_rows(&ctx, &[&[2]]));
        assert_eq!(nu, Mat::from_i64_rows(&ctx, &[&[1]]));
        let d = q.mul(&m1).mul(&q.inverse().unwrap());
        assert_eq!(d.get(0, 0), &ctx.from_i64(2));
        assert!(ctx.is_zero(d.get(0, 1)));
        assert!(ctx.is_zero(d.get(1, 0)));
    }

    #[test]
    fn sylvester_examples() {
        let ctx = make_ring(RingKind::Rationals, 2).unwrap();
        let a = Mat::from_i64_rows(&ctx, &[&[2]]);
        let ones = Coupling::from_cols(ctx.clone(), 1, vec![], vec![vec![ctx.one()]]);
        let t = TriOracle::identity(ctx.clone());
        let y = sylvester_decouple(&a, &ones, &t).unwrap();
        for j in 1..=6 {
            assert_eq!(y.col(j).unwrap(), vec![ctx.from_i64(-1)]);
        }
        let zero = Coupling::zero(ctx.clone(), 1);
        let y0 = sylvester_decouple(&a, &zero, &t).unwrap();
        for j in 1..=6 {
            assert_eq!(y0.col(j).unwrap(), vec![ctx.zero()]);
        }
        let bad = Mat::from_i64_rows(&ctx, &[&[1, 1], &[0, 2]]);
        let b2 = Coupling::zero(ctx.clone(), 2);
        assert!(matches!(
            sylvester_decouple(&bad, &b2, &t),
            Err(Error::EigenvalueOne)
        ));
    }

    #[test]
    fn decoupling_kills_the_coupling() {
        let ctx = z3();
        let mut rng = XorShift::new(31);
        for _ in 0..4 {
            let n = 2;
            let m1 = rand_sl(&ctx, n, &mut rng);
            let cols: Vec<Vec<Scalar>> = (0..2)
                .map(|_| (0..n).map(|_| rand_scalar(&ctx, &mut rng)).collect())
                .collect();
            let m2 = Coupling::from_cols(ctx.clone(), n, vec![cols[0].clone()], vec![cols[1].clone()]);
            let m3 = rand_banded_unitriangular(&ctx, &mut rng, 2, 1, 2);
            let m = VKMat { n, m1, m2, m3 };
            let (h, a, t_tail) = conjugate_to_block_diag(&m).unwrap();
            let na = a.n();
            let w = 12;
            let hw = h.window(w).unwrap();
            let conj = hw.mul(&m.window(w).unwrap()).mul(&hw.inverse().unwrap());
            for i in 0..na {
                for j in na..w {
                    assert!(ctx.is_zero(conj.get(i, j)), "coupling at ({i},{j})");
                }
            }
            // and the diagonal blocks match
            assert_eq!(conj.block(0, 0, na), a);
            assert_eq!(conj.block(na, na, w - na), t_tail.window(w - na).unwrap());
        }
    }

    #[test]
    fn factor_vk_reduces_to_tail() {
        let ctx = z3();
        let mut rng = XorShift::new(41);
        let m3 = rand_banded_unitriangular(&ctx, &mut rng, 2, 1, 2);
        let m = VKMat {
            n: 2,
            m1: Mat::identity(ctx.clone(), 2),
            m2: Coupling::zero(ctx.clone(), 2),
            m3,
        };
        let out = factor_vk(&m, &ctx).unwrap();
        assert_eq!(out.cert.word.len(), 6);
        let report = verify_certificate(&out.cert, &GenMx::Vk(m.expr()), 12);
        assert!(report.all_pass(), "{}", report.text());
    }

    #[test]
    fn factor_vk_rotation_corner() {
        let ctx = z3();
        let m1 = Mat::from_i64_rows(&ctx, &[&[0, 1], &[-1, 0]]);
        let m2 = Coupling::from_cols(
            ctx.clone(),
            2,
            vec![vec![ctx.one(), ctx.zero()]],
            vec![vec![ctx.zero(), ctx.one()], vec![ctx.one(), ctx.zero()]],
        );
        let m3 = TriOracle::one_plus_superdiag(ctx.clone(), PeriodicSeq::ones(&ctx));
        let m = VKMat { n: 2, m1, m2, m3 };
        let out = factor_vk(&m, &ctx).unwrap();
        assert_eq!(out.cert.word.len(), 6);
        assert!(out.regular);
        let report = verify_certificate(&out.cert, &GenMx::Vk(m.expr()), 14);
        assert!(report.all_pass(), "{}", report.text());
    }
}
