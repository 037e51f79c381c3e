//! Lazy infinite upper triangular matrices.
//!
//! A `TriOracle` is an entry oracle plus a finitary descriptor: banded
//! prefix+periodic data, a finite corner patch with a periodic coupling and
//! an infinite tail, or a composition node (product, inverse, power,
//! conjugation, solved conjugators). Entries are exact, memoized per node,
//! and evaluating entry (i, j) of a composition touches only constituent
//! entries inside [i..j] x [i..j], so every N-window of a group identity is
//! itself an exact identity.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::ring::{RingCtx, Scalar};
use crate::seq::PeriodicSeq;

/// Superdiagonal descriptor: a_{i,i+1} as a prefix+periodic sequence.
pub type SuperDiagSpec = PeriodicSeq;

#[derive(Clone)]
pub struct TriOracle {
    ctx: RingCtx,
    node: Arc<NodeInner>,
}

struct NodeInner {
    kind: NodeKind,
    memo: Mutex<HashMap<(usize, usize), Scalar>>,
}

enum NodeKind {
    /// Finitely many diagonals, each prefix+periodic; offset 0 is the main
    /// diagonal. Missing offsets are zero.
    Band(BTreeMap<usize, PeriodicSeq>),
    /// Finite upper triangular corner, coupling block, infinite tail.
    Tail {
        corner: Mat,
        coupling: Coupling,
        rest: TriOracle,
    },
    Product(TriOracle, TriOracle),
    Inverse(TriOracle),
    Power {
        base: TriOracle,
        exp: u32,
        inner: OnceLock<TriOracle>,
    },
    /// h x h^-1 with h invertible triangular.
    Conjugate {
        x: TriOracle,
        h: TriOracle,
        hinv: TriOracle,
    },
    /// Superdiagonal of the operand, zero elsewhere.
    JPart(TriOracle),
    /// Unitriangular X with X * src = tgt * X, where src and tgt are the
    /// coherent matrices sum_i src[i] J^i and sum_i tgt[i] J^i over the same
    /// superdiagonal J. X = sum_d C_d J^d; the diagonals C_d are solved by a
    /// forward telescoping recurrence with free entries fixed to 0, and are
    /// materialized lazily since they need not stay periodic.
    ConjCoherent {
        j: PeriodicSeq,
        src: Vec<PeriodicSeq>,
        tgt: Vec<PeriodicSeq>,
        diags: Mutex<Vec<Vec<Scalar>>>,
    },
    /// Unitriangular X with X^-1 A X bidiagonal (diagonal of A, unit
    /// superdiagonal). Requires the superdiagonal of A to be all ones.
    ConjBidiag {
        of: TriOracle,
        diags: Mutex<Vec<Vec<Scalar>>>,
    },
    /// Test instrumentation: delegates, panicking on any access outside
    /// [lo..hi] x [lo..hi].
    Probe {
        of: TriOracle,
        lo: usize,
        hi: usize,
    },
}

impl TriOracle {
    fn make(ctx: RingCtx, kind: NodeKind) -> Self {
        TriOracle {
            ctx,
            node: Arc::new(NodeInner {
                kind,
                memo: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn ctx(&self) -> &RingCtx {
        &self.ctx
    }

    pub fn identity(ctx: RingCtx) -> Self {
        let ones = PeriodicSeq::ones(&ctx);
        Self::from_band(ctx, BTreeMap::from([(0usize, ones)]))
    }

    pub fn from_band(ctx: RingCtx, diags: BTreeMap<usize, PeriodicSeq>) -> Self {
        Self::make(ctx, NodeKind::Band(diags))
    }

    /// The matrix with the given superdiagonal and zeros elsewhere.
    pub fn from_superdiag(ctx: RingCtx, spec: SuperDiagSpec) -> Self {
        Self::from_band(ctx, BTreeMap::from([(1usize, spec)]))
    }

    /// I + J for the given superdiagonal J.
    pub fn one_plus_superdiag(ctx: RingCtx, spec: SuperDiagSpec) -> Self {
        let ones = PeriodicSeq::ones(&ctx);
        Self::from_band(ctx, BTreeMap::from([(0usize, ones), (1usize, spec)]))
    }

    pub fn diagonal(ctx: RingCtx, d: PeriodicSeq) -> Self {
        Self::from_band(ctx, BTreeMap::from([(0usize, d)]))
    }

    /// Finite corner patch with coupling columns and an infinite tail.
    pub fn tail_patch(corner: Mat, coupling: Coupling, rest: TriOracle) -> Self {
        assert!(corner.is_upper_triangular(), "corner must be upper triangular");
        assert_eq!(coupling.rows(), corner.n());
        let ctx = rest.ctx.clone();
        Self::make(ctx, NodeKind::Tail { corner, coupling, rest })
    }

    pub fn conj_coherent(
        ctx: RingCtx,
        j: PeriodicSeq,
        src: Vec<PeriodicSeq>,
        tgt: Vec<PeriodicSeq>,
    ) -> Self {
        Self::make(
            ctx,
            NodeKind::ConjCoherent {
                j,
                src,
                tgt,
                diags: Mutex::new(Vec::new()),
            },
        )
    }

    pub fn conj_bidiagonal(of: &TriOracle) -> Self {
        Self::make(
            of.ctx.clone(),
            NodeKind::ConjBidiag {
                of: of.clone(),
                diags: Mutex::new(Vec::new()),
            },
        )
    }

    /// Superdiagonal-only view of self.
    pub fn jpart(&self) -> TriOracle {
        Self::make(self.ctx.clone(), NodeKind::JPart(self.clone()))
    }

    /// Instrumented wrapper asserting that every access stays in [lo..hi].
    pub fn probed(&self, lo: usize, hi: usize) -> TriOracle {
        Self::make(
            self.ctx.clone(),
            NodeKind::Probe {
                of: self.clone(),
                lo,
                hi,
            },
        )
    }

    fn node_tag(&self) -> &NodeKind {
        &self.node.kind
    }

    /// Exact entry at 1-based (i, j); zero below the diagonal.
    pub fn entry(&self, i: usize, j: usize) -> Result<Scalar> {
        assert!(i >= 1 && j >= 1, "indices are 1-based");
        if i > j {
            return Ok(self.ctx.zero());
        }
        if let Some(v) = self.node.memo.lock().unwrap().get(&(i, j)) {
            return Ok(v.clone());
        }
        let v = self.compute_entry(i, j)?;
        self.node.memo.lock().unwrap().insert((i, j), v.clone());
        Ok(v)
    }

    fn compute_entry(&self, i: usize, j: usize) -> Result<Scalar> {
        let ctx = &self.ctx;
        match &self.node.kind {
            NodeKind::Band(diags) => Ok(diags
                .get(&(j - i))
                .map(|s| s.get(i - 1).clone())
                .unwrap_or_else(|| ctx.zero())),
            NodeKind::Tail { corner, coupling, rest } => {
                let nc = corner.n();
                if j <= nc {
                    Ok(corner.get(i - 1, j - 1).clone())
                } else if i <= nc {
                    Ok(coupling.col(j - nc)?[i - 1].clone())
                } else {
                    rest.entry(i - nc, j - nc)
                }
            }
            NodeKind::Product(a, b) => {
                let mut acc = ctx.zero();
                for l in i..=j {
                    let x = a.entry(i, l)?;
                    if ctx.is_zero(&x) {
                        continue;
                    }
                    acc = ctx.add(&acc, &ctx.mul(&x, &b.entry(l, j)?));
                }
                Ok(acc)
            }
            NodeKind::Inverse(base) => {
                let dii = base.entry(i, i)?;
                let dinv = ctx
                    .inv(&dii)
                    .map_err(|_| Error::Singular(format!("oracle diagonal entry ({i},{i}) is not invertible")))?;
                if i == j {
                    return Ok(dinv);
                }
                // back-substitution inside the [i..j] block
                let mut acc = ctx.zero();
                for l in (i + 1)..=j {
                    let x = base.entry(i, l)?;
                    if ctx.is_zero(&x) {
                        continue;
                    }
                    acc = ctx.add(&acc, &ctx.mul(&x, &self.entry(l, j)?));
                }
                Ok(ctx.neg(&ctx.mul(&dinv, &acc)))
            }
            NodeKind::Power { base, exp, inner } => {
                let expanded = inner.get_or_init(|| pow_tree(base, *exp));
                expanded.entry(i, j)
            }
            NodeKind::Conjugate { x, h, hinv } => {
                let mut acc = ctx.zero();
                for a in i..=j {
                    let ha = h.entry(i, a)?;
                    if ctx.is_zero(&ha) {
                        continue;
                    }
                    for b in a..=j {
                        let xab = x.entry(a, b)?;
                        if ctx.is_zero(&xab) {
                            continue;
                        }
                        let t = ctx.mul(&ctx.mul(&ha, &xab), &hinv.entry(b, j)?);
                        acc = ctx.add(&acc, &t);
                    }
                }
                Ok(acc)
            }
            NodeKind::JPart(of) => {
                if j == i + 1 {
                    of.entry(i, j)
                } else {
                    Ok(ctx.zero())
                }
            }
            NodeKind::ConjCoherent { j: jseq, src, tgt, diags } => {
                let d = j - i;
                if d == 0 {
                    return Ok(ctx.one());
                }
                let mut guard = diags.lock().unwrap();
                ensure_coherent_diags(ctx, jseq, src, tgt, &mut guard, d, i);
                let c = guard[d - 1][i - 1].clone();
                drop(guard);
                // entry = C_d[i] * j_i * j_{i+1} * ... * j_{j-1}
                let mut prod = c;
                for s in i..j {
                    if ctx.is_zero(&prod) {
                        break;
                    }
                    prod = ctx.mul(&prod, jseq.get(s - 1));
                }
                Ok(prod)
            }
            NodeKind::ConjBidiag { of, diags } => {
                let d = j - i;
                if d == 0 {
                    return Ok(ctx.one());
                }
                let mut guard = diags.lock().unwrap();
                ensure_bidiag_diags(ctx, of, &mut guard, d, i)?;
                Ok(guard[d - 1][i - 1].clone())
            }
            NodeKind::Probe { of, lo, hi } => {
                assert!(
                    *lo <= i && j <= *hi,
                    "locality violation: access ({i},{j}) outside [{lo}..{hi}]"
                );
                of.entry(i, j)
            }
        }
    }

    /// Top-left N x N block as a dense matrix.
    ///
    /// Composition nodes are windowed recursively with dense arithmetic:
    /// by triangular locality the window of a product, inverse or power is
    /// the product, inverse or power of the windows, so this is exact and
    /// avoids the entrywise recursion for full blocks.
    pub fn window(&self, n: usize) -> Result<Mat> {
        match &self.node.kind {
            NodeKind::Product(a, b) => Ok(a.window(n)?.mul(&b.window(n)?)),
            NodeKind::Inverse(base) => base
                .window(n)?
                .inverse()
                .map_err(|_| Error::Singular("oracle diagonal is not invertible".into())),
            NodeKind::Power { base, exp, .. } => base.window(n)?.pow(*exp as i64),
            NodeKind::Conjugate { x, h, .. } => {
                let hw = h.window(n)?;
                let hinv = hw
                    .inverse()
                    .map_err(|_| Error::Singular("conjugator window is not invertible".into()))?;
                Ok(hw.mul(&x.window(n)?).mul(&hinv))
            }
            NodeKind::Probe { of, lo, hi } => {
                assert!(*lo <= 1 && n <= *hi, "locality violation in window");
                of.window(n)
            }
            _ => {
                let ctx = self.ctx.clone();
                let mut m = Mat::zero(ctx, n);
                for i in 1..=n {
                    for j in i..=n {
                        m.set(i - 1, j - 1, self.entry(i, j)?);
                    }
                }
                Ok(m)
            }
        }
    }

    /// Closed-form superdiagonal when the descriptor supports it.
    pub fn superdiag_seq(&self) -> Option<PeriodicSeq> {
        match &self.node.kind {
            NodeKind::Band(diags) => Some(
                diags
                    .get(&1)
                    .cloned()
                    .unwrap_or_else(|| PeriodicSeq::zeros(&self.ctx)),
            ),
            NodeKind::Tail { corner, coupling, rest } => {
                let nc = corner.n();
                let inner = rest.superdiag_seq()?;
                let mut prefix = corner.superdiag();
                // seam entry (nc, nc+1) comes from the first coupling column
                prefix.push(coupling.col(1).ok()?[nc - 1].clone());
                let mut data = prefix;
                data.extend_from_slice(inner.prefix());
                Some(PeriodicSeq::new(data, inner.period().to_vec()))
            }
            _ => None,
        }
    }

    /// Closed-form main diagonal when the descriptor supports it.
    pub fn diag_seq(&self) -> Option<PeriodicSeq> {
        match &self.node.kind {
            NodeKind::Band(diags) => Some(
                diags
                    .get(&0)
                    .cloned()
                    .unwrap_or_else(|| PeriodicSeq::zeros(&self.ctx)),
            ),
            NodeKind::Tail { corner, rest, .. } => {
                let inner = rest.diag_seq()?;
                let mut data = corner.diag();
                data.extend_from_slice(inner.prefix());
                Some(PeriodicSeq::new(data, inner.period().to_vec()))
            }
            _ => None,
        }
    }

    /// True when the descriptor proves a unit diagonal.
    pub fn is_unitriangular_structural(&self) -> bool {
        match self.diag_seq() {
            Some(d) => d.is_constant(&self.ctx.one()),
            None => false,
        }
    }

    /// (prefix length, period length) footprint of the descriptor, used to
    /// pick verification windows that cover all distinct structure.
    pub fn descriptor_footprint(&self) -> (usize, usize) {
        match &self.node.kind {
            NodeKind::Band(diags) => {
                let p = diags.values().map(|s| s.prefix().len()).max().unwrap_or(0);
                let q = diags.values().map(|s| s.period().len()).max().unwrap_or(1);
                (p, q.max(1))
            }
            NodeKind::Tail { corner, rest, .. } => {
                let (p, q) = rest.descriptor_footprint();
                (corner.n() + 1 + p, q)
            }
            _ => (0, 1),
        }
    }
}

fn pow_tree(base: &TriOracle, exp: u32) -> TriOracle {
    match exp {
        0 => TriOracle::identity(base.ctx.clone()),
        1 => base.clone(),
        _ => {
            let half = pow_tree(base, exp / 2);
            let sq = oracle_product(&half, &half);
            if exp % 2 == 0 {
                sq
            } else {
                oracle_product(&sq, base)
            }
        }
    }
}

pub fn oracle_product(a: &TriOracle, b: &TriOracle) -> TriOracle {
    assert!(a.ctx == b.ctx, "ring mismatch");
    TriOracle::make(a.ctx.clone(), NodeKind::Product(a.clone(), b.clone()))
}

pub fn oracle_product_many(factors: &[TriOracle]) -> TriOracle {
    assert!(!factors.is_empty());
    if factors.len() == 1 {
        return factors[0].clone();
    }
    let mid = factors.len() / 2;
    oracle_product(
        &oracle_product_many(&factors[..mid]),
        &oracle_product_many(&factors[mid..]),
    )
}

pub fn oracle_inverse(a: &TriOracle) -> TriOracle {
    TriOracle::make(a.ctx.clone(), NodeKind::Inverse(a.clone()))
}

pub fn oracle_pow(a: &TriOracle, e: i64) -> TriOracle {
    if e < 0 {
        return oracle_inverse(&oracle_pow(a, -e));
    }
    match e {
        0 => TriOracle::identity(a.ctx.clone()),
        1 => a.clone(),
        _ => TriOracle::make(
            a.ctx.clone(),
            NodeKind::Power {
                base: a.clone(),
                exp: e as u32,
                inner: OnceLock::new(),
            },
        ),
    }
}

/// h x h^-1 as a composition node.
pub fn oracle_conjugate(x: &TriOracle, h: &TriOracle) -> TriOracle {
    assert!(x.ctx == h.ctx, "ring mismatch");
    TriOracle::make(
        x.ctx.clone(),
        NodeKind::Conjugate {
            x: x.clone(),
            h: h.clone(),
            hinv: oracle_inverse(h),
        },
    )
}

// ---------------------------------------------------------------------------
// solved conjugator recurrences
// ---------------------------------------------------------------------------

fn seq_at(seqs: &[PeriodicSeq], idx: usize, pos0: usize, ctx: &RingCtx) -> Scalar {
    match seqs.get(idx) {
        Some(s) => s.get(pos0).clone(),
        None => ctx.zero(),
    }
}

/// Materializes the diagonals C_1..C_want of the coherent conjugator, each
/// long enough to serve positions up to `pos`. The offset-(i) coefficient
/// equation reads
///   C_{i-1} - S(C_{i-1}) = sum_{j=2..i} Q_j S^j(C_{i-j})
///                        - sum_{j=0..i-2} C_j S^j(P_{i-j})
/// and is solved forward from C_{i-1}[1] = 0.
fn ensure_coherent_diags(
    ctx: &RingCtx,
    _j: &PeriodicSeq,
    src: &[PeriodicSeq],
    tgt: &[PeriodicSeq],
    diags: &mut Vec<Vec<Scalar>>,
    want: usize,
    pos: usize,
) {
    let have_len = |diags: &Vec<Vec<Scalar>>, d: usize| diags.get(d - 1).map_or(0, |v| v.len());
    if diags.len() >= want && have_len(diags, want) >= pos {
        return;
    }
    let max_d = want.max(diags.len());
    // computing C_d at position t touches C_{d'} (d' < d) at positions at
    // most t + (d + 1 - d'), so a slack of 2 per level suffices
    for i_idx in 2..=(max_d + 1) {
        let d = i_idx - 1;
        let target_len = pos + 2 * (max_d - d) + 3;
        if diags.len() < d {
            diags.push(vec![ctx.zero()]); // C_d[1] = 0
        }
        let cur = diags[d - 1].len();
        if cur >= target_len {
            continue;
        }
        for t0 in (cur - 1)..(target_len - 1) {
            // r_t at 0-based position t0
            let mut r = ctx.zero();
            for jj in 2..=i_idx {
                let q = seq_at(tgt, jj, t0, ctx);
                if ctx.is_zero(&q) {
                    continue;
                }
                let c_prev = c_at(ctx, diags, i_idx - jj, t0 + jj);
                r = ctx.add(&r, &ctx.mul(&q, &c_prev));
            }
            for jj in 0..=(i_idx - 2) {
                let c = c_at(ctx, diags, jj, t0);
                if ctx.is_zero(&c) {
                    continue;
                }
                let p = seq_at(src, i_idx - jj, t0 + jj, ctx);
                r = ctx.sub(&r, &ctx.mul(&c, &p));
            }
            // C[t+1] = C[t] - r_t
            let prev = diags[d - 1][t0].clone();
            diags[d - 1].push(ctx.sub(&prev, &r));
        }
    }
}

fn c_at(ctx: &RingCtx, diags: &[Vec<Scalar>], d: usize, pos0: usize) -> Scalar {
    if d == 0 {
        return ctx.one();
    }
    diags[d - 1]
        .get(pos0)
        .cloned()
        .unwrap_or_else(|| panic!("conjugator diagonal {d} not materialized to position {pos0}"))
}

/// Materializes the diagonals of the bidiagonalizing conjugator X for A with
/// unit superdiagonal: A X = X J with J = diag(A) + unit superdiagonal.
/// Entries are pinned by the resolvent formula when the two diagonal entries
/// differ, chained along the diagonal when they agree, and 0 when free.
fn ensure_bidiag_diags(
    ctx: &RingCtx,
    a: &TriOracle,
    diags: &mut Vec<Vec<Scalar>>,
    want: usize,
    pos: usize,
) -> Result<()> {
    if diags.len() >= want && diags[want - 1].len() >= pos {
        return Ok(());
    }
    let max_d = want.max(diags.len());
    for e in 1..=max_d {
        // level e at row r touches level e'' at rows at most r + (e - e'')
        let target_len = pos + 2 * (max_d - e) + 3;
        if diags.len() < e {
            diags.push(Vec::new());
        }
        let start = diags[e - 1].len();
        for r0 in start..target_len {
            let row = r0 + 1;
            let col = row + e;
            let a_r = a.entry(row, row)?;
            let a_c = a.entry(col, col)?;
            let val = if a_r != a_c {
                // (a_rr - a_cc) X_rc = X_{r,c-1} - sum_{l=r+1..c} A_{r,l} X_{l,c}
                let mut s = x_at(ctx, diags, row, col - 1);
                for l in (row + 1)..=col {
                    let alv = a.entry(row, l)?;
                    if ctx.is_zero(&alv) {
                        continue;
                    }
                    s = ctx.sub(&s, &ctx.mul(&alv, &x_at(ctx, diags, l, col)));
                }
                let denom = ctx.sub(&a_r, &a_c);
                ctx.div(&s, &denom)
                    .map_err(|_| Error::Internal("bidiagonal resolvent demands invertible diagonal gaps".into()))?
            } else if row >= 2 && a.entry(row - 1, row - 1)? == a_c {
                // linked to the previous entry of the same diagonal through
                // the equal-diagonal equation at (row-1, col)
                let mut s = x_at(ctx, diags, row - 1, col - 1);
                for l in (row + 1)..=col {
                    let alv = a.entry(row - 1, l)?;
                    if ctx.is_zero(&alv) {
                        continue;
                    }
                    s = ctx.sub(&s, &ctx.mul(&alv, &x_at(ctx, diags, l, col)));
                }
                s
            } else {
                ctx.zero()
            };
            diags[e - 1].push(val);
        }
    }
    Ok(())
}

/// X lookup against partially materialized diagonals; diagonal 0 is ones.
fn x_at(ctx: &RingCtx, diags: &[Vec<Scalar>], row: usize, col: usize) -> Scalar {
    if col == row {
        return ctx.one();
    }
    if col < row {
        return ctx.zero();
    }
    let e = col - row;
    diags[e - 1]
        .get(row - 1)
        .cloned()
        .unwrap_or_else(|| panic!("conjugator diagonal {e} not materialized to row {row}"))
}

// ---------------------------------------------------------------------------
// coupling blocks (finite rows, infinitely many columns)
// ---------------------------------------------------------------------------

/// Finite-row coupling block with eventually periodic columns, or a lazily
/// solved transformation of one.
#[derive(Clone)]
pub struct Coupling {
    ctx: RingCtx,
    rows: usize,
    kind: Arc<CouplingKind>,
}

enum CouplingKind {
    Desc {
        prefix: Vec<Vec<Scalar>>,
        period: Vec<Vec<Scalar>>,
    },
    MatMul {
        m: Mat,
        inner: Coupling,
    },
    RowRange {
        inner: Coupling,
        start: usize,
    },
    /// `zeros` all-zero columns, then the inner columns.
    ShiftCols {
        zeros: usize,
        inner: Coupling,
    },
    Negate(Coupling),
    /// Columns of the solution Y of A Y - Y T = -B, solved column by column:
    /// (A - I) y_j = -b_j + sum_{l<j} y_l T_{l,j}.
    Sylvester {
        a: Mat,
        a_minus_i_inv: Mat,
        b: Coupling,
        t: TriOracle,
        memo: Mutex<Vec<Vec<Scalar>>>,
    },
}

impl Coupling {
    pub fn from_cols(ctx: RingCtx, rows: usize, prefix: Vec<Vec<Scalar>>, period: Vec<Vec<Scalar>>) -> Self {
        assert!(!period.is_empty(), "period columns must be nonempty");
        for c in prefix.iter().chain(period.iter()) {
            assert_eq!(c.len(), rows);
        }
        Coupling {
            ctx,
            rows,
            kind: Arc::new(CouplingKind::Desc { prefix, period }),
        }
    }

    pub fn zero(ctx: RingCtx, rows: usize) -> Self {
        let z = vec![ctx.zero(); rows];
        Coupling::from_cols(ctx, rows, Vec::new(), vec![z])
    }

    /// Single nonzero prefix column, zero tail.
    pub fn unit_seam(ctx: RingCtx, rows: usize, col: Vec<Scalar>) -> Self {
        let z = vec![ctx.zero(); rows];
        Coupling::from_cols(ctx, rows, vec![col], vec![z])
    }

    pub fn matmul(m: Mat, inner: &Coupling) -> Self {
        assert_eq!(m.n(), inner.rows);
        Coupling {
            ctx: inner.ctx.clone(),
            rows: m.n(),
            kind: Arc::new(CouplingKind::MatMul {
                m,
                inner: inner.clone(),
            }),
        }
    }

    pub fn row_range(inner: &Coupling, start: usize, len: usize) -> Self {
        assert!(start + len <= inner.rows);
        Coupling {
            ctx: inner.ctx.clone(),
            rows: len,
            kind: Arc::new(CouplingKind::RowRange {
                inner: inner.clone(),
                start,
            }),
        }
    }

    pub fn negate(inner: &Coupling) -> Self {
        Coupling {
            ctx: inner.ctx.clone(),
            rows: inner.rows,
            kind: Arc::new(CouplingKind::Negate(inner.clone())),
        }
    }

    pub fn shift_cols(inner: &Coupling, zeros: usize) -> Self {
        Coupling {
            ctx: inner.ctx.clone(),
            rows: inner.rows,
            kind: Arc::new(CouplingKind::ShiftCols {
                zeros,
                inner: inner.clone(),
            }),
        }
    }

    /// Lazy solution of A Y - Y T = -B. `a_minus_i_inv` must be (A - I)^-1.
    pub fn sylvester(a: Mat, a_minus_i_inv: Mat, b: &Coupling, t: &TriOracle) -> Self {
        assert_eq!(a.n(), b.rows);
        Coupling {
            ctx: b.ctx.clone(),
            rows: b.rows,
            kind: Arc::new(CouplingKind::Sylvester {
                a,
                a_minus_i_inv,
                b: b.clone(),
                t: t.clone(),
                memo: Mutex::new(Vec::new()),
            }),
        }
    }

    pub fn ctx(&self) -> &RingCtx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// 1-based column access.
    pub fn col(&self, j: usize) -> Result<Vec<Scalar>> {
        assert!(j >= 1);
        let ctx = &self.ctx;
        match self.kind.as_ref() {
            CouplingKind::Desc { prefix, period } => {
                let j0 = j - 1;
                Ok(if j0 < prefix.len() {
                    prefix[j0].clone()
                } else {
                    period[(j0 - prefix.len()) % period.len()].clone()
                })
            }
            CouplingKind::MatMul { m, inner } => Ok(m.mul_vec(&inner.col(j)?)),
            CouplingKind::RowRange { inner, start } => {
                let c = inner.col(j)?;
                Ok(c[*start..*start + self.rows].to_vec())
            }
            CouplingKind::ShiftCols { zeros, inner } => {
                if j <= *zeros {
                    Ok(vec![ctx.zero(); self.rows])
                } else {
                    inner.col(j - zeros)
                }
            }
            CouplingKind::Negate(inner) => Ok(inner.col(j)?.iter().map(|v| ctx.neg(v)).collect()),
            CouplingKind::Sylvester {
                a_minus_i_inv,
                b,
                t,
                memo,
                ..
            } => {
                let mut guard = memo.lock().unwrap();
                while guard.len() < j {
                    let jj = guard.len() + 1;
                    let bcol = b.col(jj)?;
                    let mut rhs: Vec<Scalar> = bcol.iter().map(|v| ctx.neg(v)).collect();
                    for (l, ycol) in guard.iter().enumerate() {
                        let tlj = t.entry(l + 1, jj)?;
                        if ctx.is_zero(&tlj) {
                            continue;
                        }
                        for r in 0..self.rows {
                            rhs[r] = ctx.add(&rhs[r], &ctx.mul(&ycol[r], &tlj));
                        }
                    }
                    let y = a_minus_i_inv.mul_vec(&rhs);
                    guard.push(y);
                }
                Ok(guard[j - 1].clone())
            }
        }
    }

    pub(crate) fn describe(&self) -> CouplingView<'_> {
        match self.kind.as_ref() {
            CouplingKind::Desc { prefix, period } => CouplingView::Desc { prefix, period },
            CouplingKind::MatMul { m, inner } => CouplingView::MatMul { m, inner },
            CouplingKind::RowRange { inner, start } => CouplingView::RowRange {
                inner,
                start: *start,
                len: self.rows,
            },
            CouplingKind::ShiftCols { zeros, inner } => CouplingView::ShiftCols {
                zeros: *zeros,
                inner,
            },
            CouplingKind::Negate(inner) => CouplingView::Negate { inner },
            CouplingKind::Sylvester { a, b, t, .. } => CouplingView::Sylvester { a, b, t },
        }
    }
}

/// Read-only structural view used by serialization.
pub(crate) enum CouplingView<'a> {
    Desc {
        prefix: &'a Vec<Vec<Scalar>>,
        period: &'a Vec<Vec<Scalar>>,
    },
    MatMul {
        m: &'a Mat,
        inner: &'a Coupling,
    },
    RowRange {
        inner: &'a Coupling,
        start: usize,
        len: usize,
    },
    ShiftCols {
        zeros: usize,
        inner: &'a Coupling,
    },
    Negate {
        inner: &'a Coupling,
    },
    Sylvester {
        a: &'a Mat,
        b: &'a Coupling,
        t: &'a TriOracle,
    },
}

/// Read-only structural view of a `TriOracle` used by serialization.
pub(crate) enum OracleView<'a> {
    Band(&'a BTreeMap<usize, PeriodicSeq>),
    Tail {
        corner: &'a Mat,
        coupling: &'a Coupling,
        rest: &'a TriOracle,
    },
    Product(&'a TriOracle, &'a TriOracle),
    Inverse(&'a TriOracle),
    Power(&'a TriOracle, u32),
    Conjugate(&'a TriOracle, &'a TriOracle),
    JPart(&'a TriOracle),
    ConjCoherent {
        j: &'a PeriodicSeq,
        src: &'a Vec<PeriodicSeq>,
        tgt: &'a Vec<PeriodicSeq>,
    },
    ConjBidiag(&'a TriOracle),
}

impl TriOracle {
    pub(crate) fn view(&self) -> OracleView<'_> {
        match self.node_tag() {
            NodeKind::Band(d) => OracleView::Band(d),
            NodeKind::Tail { corner, coupling, rest } => OracleView::Tail { corner, coupling, rest },
            NodeKind::Product(a, b) => OracleView::Product(a, b),
            NodeKind::Inverse(a) => OracleView::Inverse(a),
            NodeKind::Power { base, exp, .. } => OracleView::Power(base, *exp),
            NodeKind::Conjugate { x, h, .. } => OracleView::Conjugate(x, h),
            NodeKind::JPart(a) => OracleView::JPart(a),
            NodeKind::ConjCoherent { j, src, tgt, .. } => OracleView::ConjCoherent { j, src, tgt },
            NodeKind::ConjBidiag { of, .. } => OracleView::ConjBidiag(of),
            NodeKind::Probe { of, .. } => of.view(),
        }
    }
}
