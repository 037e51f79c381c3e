//! Canonical JSON encodings of scalars, matrices, oracles, couplings and
//! certificates. Serialization is deterministic (sorted keys, canonical
//! scalar strings), so parse-then-serialize is the identity on anything this
//! module emitted.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::commfact::{Certificate, CommutatorWord, GenMx, Producer, WordTerm};
use crate::error::{Error, Result};
use crate::mat::{Coupling, CouplingView, Mat, OracleView, TriOracle};
use crate::ring::{make_ring, RingCtx, RingKind, Scalar};
use crate::seq::PeriodicSeq;
use crate::vk::{VkExpr, VkView, VKMat};

pub fn canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialization cannot fail");
    s.push('\n');
    s
}

fn obj_get<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::Parse(format!("{what} must be a string")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("{what} must be a nonnegative integer")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be an array")))
}

// ---------------------------------------------------------------------------
// scalars, rings, sequences
// ---------------------------------------------------------------------------

pub fn scalar_to_value(ctx: &RingCtx, s: &Scalar) -> Value {
    Value::String(ctx.format_scalar(s))
}

pub fn scalar_from_value(ctx: &RingCtx, v: &Value) -> Result<Scalar> {
    ctx.parse_scalar(as_str(v, "scalar")?)
}

pub fn ring_to_value(ctx: &RingCtx) -> Value {
    match ctx.kind() {
        RingKind::Rationals => json!({"kind": "rationals"}),
        RingKind::PrimeField(p) => json!({"kind": "prime-field", "p": p}),
        RingKind::Cyclotomic(m) => json!({"kind": "cyclotomic", "m": m}),
    }
}

pub fn ring_from_value(v: &Value, k: u32) -> Result<RingCtx> {
    let kind = match as_str(obj_get(v, "kind")?, "ring kind")? {
        "rationals" => RingKind::Rationals,
        "prime-field" => RingKind::PrimeField(as_usize(obj_get(v, "p")?, "p")? as u64),
        "cyclotomic" => RingKind::Cyclotomic(as_usize(obj_get(v, "m")?, "m")? as u32),
        other => return Err(Error::Parse(format!("unknown ring kind {other:?}"))),
    };
    make_ring(kind, k)
}

pub fn seq_to_value(ctx: &RingCtx, s: &PeriodicSeq) -> Value {
    json!({
        "prefix": s.prefix().iter().map(|v| scalar_to_value(ctx, v)).collect::<Vec<_>>(),
        "period": s.period().iter().map(|v| scalar_to_value(ctx, v)).collect::<Vec<_>>(),
    })
}

pub fn seq_from_value(ctx: &RingCtx, v: &Value) -> Result<PeriodicSeq> {
    let prefix = as_array(obj_get(v, "prefix")?, "prefix")?
        .iter()
        .map(|x| scalar_from_value(ctx, x))
        .collect::<Result<Vec<_>>>()?;
    let period = as_array(obj_get(v, "period")?, "period")?
        .iter()
        .map(|x| scalar_from_value(ctx, x))
        .collect::<Result<Vec<_>>>()?;
    if period.is_empty() {
        return Err(Error::Parse("period must be nonempty".into()));
    }
    Ok(PeriodicSeq::new(prefix, period))
}

pub fn diagseq_to_value(ctx: &RingCtx, terms: &[PeriodicSeq]) -> Value {
    json!({"terms": terms.iter().map(|t| seq_to_value(ctx, t)).collect::<Vec<_>>()})
}

pub fn diagseq_from_value(ctx: &RingCtx, v: &Value) -> Result<Vec<PeriodicSeq>> {
    as_array(obj_get(v, "terms")?, "terms")?
        .iter()
        .map(|t| seq_from_value(ctx, t))
        .collect()
}

// ---------------------------------------------------------------------------
// matrices
// ---------------------------------------------------------------------------

pub fn mat_to_value(m: &Mat) -> Value {
    let ctx = m.ctx();
    let rows: Vec<Value> = (0..m.n())
        .map(|i| {
            Value::Array(
                (0..m.n())
                    .map(|j| scalar_to_value(ctx, m.get(i, j)))
                    .collect(),
            )
        })
        .collect();
    json!({"kind": "dense", "n": m.n(), "rows": rows})
}

pub fn mat_from_value(ctx: &RingCtx, v: &Value) -> Result<Mat> {
    let n = as_usize(obj_get(v, "n")?, "n")?;
    let rows_v = as_array(obj_get(v, "rows")?, "rows")?;
    if rows_v.len() != n {
        return Err(Error::Parse(format!("expected {n} rows, got {}", rows_v.len())));
    }
    let mut rows = Vec::with_capacity(n);
    for rv in rows_v {
        let row = as_array(rv, "row")?
            .iter()
            .map(|x| scalar_from_value(ctx, x))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(Error::Parse(format!("expected {n} columns, got {}", row.len())));
        }
        rows.push(row);
    }
    Ok(Mat::from_rows(ctx.clone(), rows))
}

// ---------------------------------------------------------------------------
// couplings
// ---------------------------------------------------------------------------

pub fn coupling_to_value(c: &Coupling) -> Value {
    let ctx = c.ctx().clone();
    let cols = |cs: &Vec<Vec<Scalar>>| -> Vec<Value> {
        cs.iter()
            .map(|col| Value::Array(col.iter().map(|s| scalar_to_value(&ctx, s)).collect()))
            .collect()
    };
    match c.describe() {
        CouplingView::Desc { prefix, period } => json!({
            "prefix_cols": cols(prefix),
            "period_cols": cols(period),
        }),
        CouplingView::MatMul { m, inner } => json!({
            "kind": "matmul",
            "m": mat_to_value(m),
            "of": coupling_to_value(inner),
        }),
        CouplingView::RowRange { inner, start, len } => json!({
            "kind": "row-range",
            "start": start,
            "len": len,
            "of": coupling_to_value(inner),
        }),
        CouplingView::ShiftCols { zeros, inner } => json!({
            "kind": "shift-cols",
            "zeros": zeros,
            "of": coupling_to_value(inner),
        }),
        CouplingView::Negate { inner } => json!({
            "kind": "negate",
            "of": coupling_to_value(inner),
        }),
        CouplingView::Sylvester { a, b, t } => json!({
            "kind": "sylvester",
            "a": mat_to_value(a),
            "b": coupling_to_value(b),
            "t": tri_to_value(t),
        }),
    }
}

pub fn coupling_from_value(ctx: &RingCtx, rows: usize, v: &Value) -> Result<Coupling> {
    if v.get("kind").is_none() {
        let parse_cols = |key: &str| -> Result<Vec<Vec<Scalar>>> {
            as_array(obj_get(v, key)?, key)?
                .iter()
                .map(|col| {
                    as_array(col, "column")?
                        .iter()
                        .map(|x| scalar_from_value(ctx, x))
                        .collect()
                })
                .collect()
        };
        let prefix = parse_cols("prefix_cols")?;
        let mut period = parse_cols("period_cols")?;
        if period.is_empty() {
            period.push(vec![ctx.zero(); rows]);
        }
        for col in prefix.iter().chain(period.iter()) {
            if col.len() != rows {
                return Err(Error::Parse(format!(
                    "coupling column length {} does not match corner size {rows}",
                    col.len()
                )));
            }
        }
        return Ok(Coupling::from_cols(ctx.clone(), rows, prefix, period));
    }
    match as_str(obj_get(v, "kind")?, "coupling kind")? {
        "matmul" => {
            let m = mat_from_value(ctx, obj_get(v, "m")?)?;
            let inner_rows = m.n();
            let inner = coupling_from_value(ctx, inner_rows, obj_get(v, "of")?)?;
            Ok(Coupling::matmul(m, &inner))
        }
        "row-range" => {
            let start = as_usize(obj_get(v, "start")?, "start")?;
            let len = as_usize(obj_get(v, "len")?, "len")?;
            // the inner row count is not recorded; recover it as start+len at
            // minimum, which is exact for pipeline output (range to the end)
            let inner = coupling_from_value(ctx, start + len, obj_get(v, "of")?)?;
            Ok(Coupling::row_range(&inner, start, len))
        }
        "shift-cols" => {
            let zeros = as_usize(obj_get(v, "zeros")?, "zeros")?;
            let inner = coupling_from_value(ctx, rows, obj_get(v, "of")?)?;
            Ok(Coupling::shift_cols(&inner, zeros))
        }
        "negate" => Ok(Coupling::negate(&coupling_from_value(ctx, rows, obj_get(v, "of")?)?)),
        "sylvester" => {
            let a = mat_from_value(ctx, obj_get(v, "a")?)?;
            let b = coupling_from_value(ctx, a.n(), obj_get(v, "b")?)?;
            let t = tri_from_value(ctx, obj_get(v, "t")?)?;
            crate::vk::sylvester_decouple(&a, &b, &t)
        }
        other => Err(Error::Parse(format!("unknown coupling kind {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// triangular oracles
// ---------------------------------------------------------------------------

pub fn tri_to_value(t: &TriOracle) -> Value {
    let ctx = t.ctx().clone();
    match t.view() {
        OracleView::Band(diags) => {
            // a single pure superdiagonal keeps the compact historical form
            if diags.len() == 1 && diags.contains_key(&1) {
                return json!({"kind": "tri-oracle", "superdiag": seq_to_value(&ctx, &diags[&1])});
            }
            let mut m = Map::new();
            for (d, s) in diags {
                m.insert(d.to_string(), seq_to_value(&ctx, s));
            }
            json!({"kind": "band", "diagonals": Value::Object(m)})
        }
        OracleView::Tail { corner, coupling, rest } => json!({
            "kind": "tail",
            "corner": mat_to_value(corner),
            "coupling": coupling_to_value(coupling),
            "rest": tri_to_value(rest),
        }),
        OracleView::Product(a, b) => json!({"kind": "product", "of": [tri_to_value(a), tri_to_value(b)]}),
        OracleView::Inverse(a) => json!({"kind": "inverse", "of": tri_to_value(a)}),
        OracleView::Power(a, e) => json!({"kind": "power", "of": tri_to_value(a), "exp": e}),
        OracleView::Conjugate(x, h) => json!({"kind": "conjugate", "x": tri_to_value(x), "h": tri_to_value(h)}),
        OracleView::JPart(a) => json!({"kind": "jpart", "of": tri_to_value(a)}),
        OracleView::ConjCoherent { j, src, tgt } => json!({
            "kind": "conjugator-coherent",
            "j": seq_to_value(&ctx, j),
            "src": diagseq_to_value(&ctx, src),
            "tgt": diagseq_to_value(&ctx, tgt),
        }),
        OracleView::ConjBidiag(a) => json!({"kind": "conjugator-bidiagonal", "of": tri_to_value(a)}),
    }
}

pub fn tri_from_value(ctx: &RingCtx, v: &Value) -> Result<TriOracle> {
    match as_str(obj_get(v, "kind")?, "matrix kind")? {
        "tri-oracle" => {
            let s = seq_from_value(ctx, obj_get(v, "superdiag")?)?;
            Ok(TriOracle::from_superdiag(ctx.clone(), s))
        }
        "band" => {
            let diags_v = obj_get(v, "diagonals")?
                .as_object()
                .ok_or_else(|| Error::Parse("diagonals must be an object".into()))?;
            let mut diags = BTreeMap::new();
            for (key, sv) in diags_v {
                let d: usize = key
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad diagonal offset {key:?}")))?;
                diags.insert(d, seq_from_value(ctx, sv)?);
            }
            Ok(TriOracle::from_band(ctx.clone(), diags))
        }
        "tail" => {
            let corner = mat_from_value(ctx, obj_get(v, "corner")?)?;
            let coupling = coupling_from_value(ctx, corner.n(), obj_get(v, "coupling")?)?;
            let rest = tri_from_value(ctx, obj_get(v, "rest")?)?;
            Ok(TriOracle::tail_patch(corner, coupling, rest))
        }
        "product" => {
            let parts = as_array(obj_get(v, "of")?, "of")?
                .iter()
                .map(|x| tri_from_value(ctx, x))
                .collect::<Result<Vec<_>>>()?;
            if parts.is_empty() {
                return Err(Error::Parse("product needs at least one factor".into()));
            }
            Ok(crate::mat::oracle_product_many(&parts))
        }
        "inverse" => Ok(crate::mat::oracle_inverse(&tri_from_value(ctx, obj_get(v, "of")?)?)),
        "power" => {
            let e = obj_get(v, "exp")?
                .as_i64()
                .ok_or_else(|| Error::Parse("exp must be an integer".into()))?;
            Ok(crate::mat::oracle_pow(&tri_from_value(ctx, obj_get(v, "of")?)?, e))
        }
        "conjugate" => {
            let x = tri_from_value(ctx, obj_get(v, "x")?)?;
            let h = tri_from_value(ctx, obj_get(v, "h")?)?;
            Ok(crate::mat::oracle_conjugate(&x, &h))
        }
        "jpart" => Ok(tri_from_value(ctx, obj_get(v, "of")?)?.jpart()),
        "conjugator-coherent" => {
            let j = seq_from_value(ctx, obj_get(v, "j")?)?;
            let src = diagseq_from_value(ctx, obj_get(v, "src")?)?;
            let tgt = diagseq_from_value(ctx, obj_get(v, "tgt")?)?;
            Ok(TriOracle::conj_coherent(ctx.clone(), j, src, tgt))
        }
        "conjugator-bidiagonal" => Ok(TriOracle::conj_bidiagonal(&tri_from_value(
            ctx,
            obj_get(v, "of")?,
        )?)),
        other => Err(Error::Parse(format!("unknown triangular matrix kind {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// block matrices
// ---------------------------------------------------------------------------

pub fn vk_to_value(e: &VkExpr) -> Value {
    match e.view() {
        VkView::Block { n, m1, m2, m3 } => json!({
            "kind": "vk",
            "n": n,
            "m1": mat_to_value(m1),
            "m2": coupling_to_value(m2),
            "m3": tri_to_value(m3),
        }),
        VkView::Product(a, b) => json!({"kind": "vk-product", "of": [vk_to_value(a), vk_to_value(b)]}),
        VkView::Inverse(a) => json!({"kind": "vk-inverse", "of": vk_to_value(a)}),
        VkView::Power(a, e) => json!({"kind": "vk-power", "of": vk_to_value(a), "exp": e}),
        VkView::Conjugate(x, h) => json!({"kind": "vk-conjugate", "x": vk_to_value(x), "h": vk_to_value(h)}),
    }
}

pub fn vk_from_value(ctx: &RingCtx, v: &Value) -> Result<VkExpr> {
    match as_str(obj_get(v, "kind")?, "matrix kind")? {
        "vk" => {
            let m = vkmat_from_fields(ctx, v)?;
            Ok(m.expr())
        }
        "vk-product" => {
            let parts = as_array(obj_get(v, "of")?, "of")?;
            let mut exprs = parts
                .iter()
                .map(|x| vk_from_value(ctx, x))
                .collect::<Result<Vec<_>>>()?;
            let mut acc = exprs
                .pop()
                .ok_or_else(|| Error::Parse("vk-product needs factors".into()))?;
            while let Some(e) = exprs.pop() {
                acc = VkExpr::product(&e, &acc);
            }
            Ok(acc)
        }
        "vk-inverse" => Ok(VkExpr::inverse(&vk_from_value(ctx, obj_get(v, "of")?)?)),
        "vk-power" => {
            let e = obj_get(v, "exp")?
                .as_i64()
                .ok_or_else(|| Error::Parse("exp must be an integer".into()))?;
            Ok(VkExpr::power(&vk_from_value(ctx, obj_get(v, "of")?)?, e))
        }
        "vk-conjugate" => {
            let x = vk_from_value(ctx, obj_get(v, "x")?)?;
            let h = vk_from_value(ctx, obj_get(v, "h")?)?;
            Ok(VkExpr::conjugate(&x, &h))
        }
        other => Err(Error::Parse(format!("unknown block matrix kind {other:?}"))),
    }
}

fn vkmat_from_fields(ctx: &RingCtx, v: &Value) -> Result<VKMat> {
    let n = as_usize(obj_get(v, "n")?, "n")?;
    let m1 = mat_from_value(ctx, obj_get(v, "m1")?)?;
    if m1.n() != n {
        return Err(Error::Parse("m1 size does not match n".into()));
    }
    let m2 = coupling_from_value(ctx, n, obj_get(v, "m2")?)?;
    let m3 = tri_from_value(ctx, obj_get(v, "m3")?)?;
    Ok(VKMat { n, m1, m2, m3 })
}

pub fn vkmat_to_value(m: &VKMat) -> Value {
    json!({
        "kind": "vk",
        "n": m.n,
        "m1": mat_to_value(&m.m1),
        "m2": coupling_to_value(&m.m2),
        "m3": tri_to_value(&m.m3),
    })
}

/// Accepts both the tagged form and a bare {n, m1, m2, m3} object.
pub fn vkmat_from_value(ctx: &RingCtx, v: &Value) -> Result<VKMat> {
    if v.get("kind").is_some() && as_str(obj_get(v, "kind")?, "kind")? != "vk" {
        return Err(Error::Parse("expected a vk block matrix".into()));
    }
    vkmat_from_fields(ctx, v)
}

// ---------------------------------------------------------------------------
// generators and certificates
// ---------------------------------------------------------------------------

pub fn genmx_to_value(g: &GenMx) -> Value {
    match g {
        GenMx::Dense(m) => mat_to_value(m),
        GenMx::Tri(t) => tri_to_value(t),
        GenMx::Vk(v) => vk_to_value(v),
    }
}

pub fn genmx_from_value(ctx: &RingCtx, v: &Value) -> Result<GenMx> {
    if v.get("kind").is_none() && v.get("m1").is_some() {
        // bare block-matrix object {n, m1, m2, m3}
        return Ok(GenMx::Vk(vkmat_from_fields(ctx, v)?.expr()));
    }
    let kind = as_str(obj_get(v, "kind")?, "matrix kind")?;
    Ok(match kind {
        "dense" => GenMx::Dense(mat_from_value(ctx, v)?),
        k if k.starts_with("vk") => GenMx::Vk(vk_from_value(ctx, v)?),
        _ => GenMx::Tri(tri_from_value(ctx, v)?),
    })
}

pub fn cert_to_value(cert: &Certificate) -> Value {
    let mut gens = Map::new();
    for (name, g) in &cert.generators {
        gens.insert(name.clone(), genmx_to_value(g));
    }
    let word: Vec<Value> = cert
        .word
        .terms
        .iter()
        .map(|t| {
            json!({
                "x": {"gen": cert.generators[t.x.0].0, "exp": t.x.1},
                "y": {"gen": cert.generators[t.y.0].0, "exp": t.y.1},
            })
        })
        .collect();
    json!({
        "k": cert.ctx.k(),
        "ring": ring_to_value(&cert.ctx),
        "generators": Value::Object(gens),
        "word": word,
        "producer": cert.producer.as_str(),
        "claimed_length": cert.claimed_length,
    })
}

pub fn cert_from_value(v: &Value) -> Result<Certificate> {
    let k = as_usize(obj_get(v, "k")?, "k")? as u32;
    let ctx = ring_from_value(obj_get(v, "ring")?, k)?;
    let gens_v = obj_get(v, "generators")?
        .as_object()
        .ok_or_else(|| Error::Parse("generators must be an object".into()))?;
    let mut generators = Vec::with_capacity(gens_v.len());
    let mut index = BTreeMap::new();
    for (name, gv) in gens_v {
        index.insert(name.clone(), generators.len());
        generators.push((name.clone(), genmx_from_value(&ctx, gv)?));
    }
    let mut terms = Vec::new();
    for tv in as_array(obj_get(v, "word")?, "word")? {
        let side = |key: &str| -> Result<(usize, i64)> {
            let s = obj_get(tv, key)?;
            let name = as_str(obj_get(s, "gen")?, "gen")?;
            let idx = *index
                .get(name)
                .ok_or_else(|| Error::Parse(format!("word references unknown generator {name:?}")))?;
            let exp = obj_get(s, "exp")?
                .as_i64()
                .ok_or_else(|| Error::Parse("exp must be an integer".into()))?;
            Ok((idx, exp))
        };
        terms.push(WordTerm {
            x: side("x")?,
            y: side("y")?,
        });
    }
    let producer = Producer::from_str(as_str(obj_get(v, "producer")?, "producer")?)?;
    let claimed_length = as_usize(obj_get(v, "claimed_length")?, "claimed_length")?;
    Ok(Certificate {
        ctx,
        producer,
        claimed_length,
        generators,
        word: CommutatorWord { terms },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commfact::{factor_unitriangular, factor_unitriangular_oracle, verify_certificate};
    use crate::testkit::*;

    #[test]
    fn scalar_matrix_round_trip() {
        let ctx = make_ring(RingKind::Cyclotomic(8), 4).unwrap();
        let mut rng = XorShift::new(3);
        let m = rand_unitriangular(&ctx, 3, &mut rng);
        let v = mat_to_value(&m);
        let m2 = mat_from_value(&ctx, &v).unwrap();
        assert_eq!(m, m2);
        let s = canonical_string(&v);
        let reparsed: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(canonical_string(&reparsed), s);
    }

    #[test]
    fn finite_certificate_round_trip() {
        let ctx = make_ring(RingKind::PrimeField(7), 3).unwrap();
        let mut rng = XorShift::new(5);
        let a = rand_unitriangular(&ctx, 4, &mut rng);
        let cert = factor_unitriangular(&a).unwrap();
        let v = cert_to_value(&cert);
        let cert2 = cert_from_value(&v).unwrap();
        assert!(verify_certificate(&cert2, &GenMx::Dense(a), 4).all_pass());
        // byte-identical after one round trip
        assert_eq!(canonical_string(&cert_to_value(&cert2)), canonical_string(&v));
    }

    #[test]
    fn oracle_certificate_round_trip() {
        let ctx = make_ring(RingKind::Cyclotomic(3), 3).unwrap();
        let mut rng = XorShift::new(9);
        let a = rand_banded_unitriangular(&ctx, &mut rng, 2, 1, 2);
        let cert = factor_unitriangular_oracle(&a).unwrap();
        let v = cert_to_value(&cert);
        let cert2 = cert_from_value(&v).unwrap();
        let report = verify_certificate(&cert2, &GenMx::Tri(a), 10);
        assert!(report.all_pass(), "{}", report.text());
        assert_eq!(canonical_string(&cert_to_value(&cert2)), canonical_string(&v));
    }
}
