//! Shared front-end plumbing: mode dispatch, default verification windows
//! and certificate replay, used by both the CLI and the C bindings.

use serde_json::Value;

use crate::commfact::{
    factor_unitriangular, factor_unitriangular_oracle, verify_certificate, Certificate, GenMx,
    VerifyReport,
};
use crate::error::{Error, Result};
use crate::jsonio;
use crate::ring::RingCtx;
use crate::slfact::factor_sl;
use crate::vk::{factor_vk, lift_mat, lift_vkmat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Ut,
    Sl,
    Vk,
}

impl Mode {
    pub fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ut" => Mode::Ut,
            "sl" => Mode::Sl,
            "vk" => Mode::Vk,
            other => return Err(Error::Parse(format!("unknown mode {other:?}"))),
        })
    }
}

pub struct FactorOutcome {
    pub cert: Certificate,
    /// Target lifted into the certificate ring (which may be an enlargement).
    pub target: GenMx,
    pub ring_enlarged: bool,
    pub exceeds_bound: bool,
    pub window: usize,
    pub report: VerifyReport,
}

/// Default window: twice the prefix plus two periods plus k, which covers
/// every distinct stretch of the periodic structure at least twice. Dense
/// targets use their own size.
pub fn default_window(target: &GenMx, k: u32) -> usize {
    let base = match target {
        GenMx::Dense(m) => return m.n().max(1),
        GenMx::Tri(t) => {
            let (p, q) = t.descriptor_footprint();
            2 * (p + 2 * q + k as usize)
        }
        GenMx::Vk(v) => {
            let corner = v.min_window();
            corner + 2 * (2 + k as usize) + 4
        }
    };
    base.max(4)
}

/// Parses the matrix for the given mode, runs the factorization, and replays
/// the certificate on the chosen window.
pub fn run_factor(
    mode: Mode,
    ctx: &RingCtx,
    matrix: &Value,
    window: Option<usize>,
) -> Result<FactorOutcome> {
    let k = ctx.k();
    let bound = (4 * k - 6) as usize;
    let (cert, target, ring_enlarged) = match mode {
        Mode::Ut => {
            let target = jsonio::genmx_from_value(ctx, matrix)?;
            let cert = match &target {
                GenMx::Dense(m) => factor_unitriangular(m)?,
                GenMx::Tri(t) => factor_unitriangular_oracle(t)?,
                GenMx::Vk(_) => {
                    return Err(Error::Precondition(
                        "mode ut expects a dense or triangular-oracle input".into(),
                    ))
                }
            };
            (cert, target, false)
        }
        Mode::Sl => {
            let m = match jsonio::genmx_from_value(ctx, matrix)? {
                GenMx::Dense(m) => m,
                _ => return Err(Error::Precondition("mode sl expects a dense matrix input".into())),
            };
            let out = factor_sl(&m, ctx)?;
            let enlarged = out.ring != *ctx;
            let target = GenMx::Dense(lift_mat(ctx, &out.ring, &m)?);
            (out.cert, target, enlarged)
        }
        Mode::Vk => {
            let m = jsonio::vkmat_from_value(ctx, matrix)?;
            let out = factor_vk(&m, ctx)?;
            let enlarged = out.ring != *ctx;
            let target = if enlarged {
                GenMx::Vk(lift_vkmat(ctx, &out.ring, &m)?.expr())
            } else {
                GenMx::Vk(m.expr())
            };
            (out.cert, target, enlarged)
        }
    };
    let window = window
        .unwrap_or_else(|| default_window(&target, k))
        .max(target.min_window())
        .max(1);
    let report = verify_certificate(&cert, &target, window);
    if !report.all_pass() {
        return Err(Error::Internal(format!(
            "freshly produced certificate failed verification:\n{}",
            report.text()
        )));
    }
    let exceeds_bound = cert.word.len() > bound;
    Ok(FactorOutcome {
        cert,
        target,
        ring_enlarged,
        exceeds_bound,
        window,
        report,
    })
}

/// Replays a certificate against a target matrix value.
pub fn run_verify(cert: &Certificate, matrix: &Value, window: Option<usize>) -> Result<(VerifyReport, usize)> {
    let target = jsonio::genmx_from_value(&cert.ctx, matrix)?;
    let window = window
        .unwrap_or_else(|| default_window(&target, cert.ctx.k()))
        .max(target.min_window());
    Ok((verify_certificate(cert, &target, window), window))
}
