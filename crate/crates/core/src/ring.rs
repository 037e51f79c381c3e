//! Exact coefficient rings with a distinguished k-th root of unity.
//!
//! Three kinds are supported: the rationals (k = 2 only, with omega = -1),
//! prime fields F_p with k | p - 1, and cyclotomic fields Q(zeta_m) with
//! k | m. Every supported ring is a field and all arithmetic is exact;
//! nothing in this crate ever rounds.
//!
//! `Scalar` is plain data in canonical form, so equality is structural.
//! All operations live on `RingCtx`, which carries the kind, the order
//! parameter k and the chosen root omega.

use std::fmt::Write as _;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Rationals,
    PrimeField(u64),
    Cyclotomic(u32),
}

/// Canonical exact ring element.
///
/// * `Rat`: reduced fraction with positive denominator (as kept by `BigRational`).
/// * `Fp`: residue in `[0, p)`; the modulus lives in the context.
/// * `Cy`: coefficient vector of length phi(m), reduced modulo the m-th
///   cyclotomic polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Fp(u64),
    Cy(Vec<BigRational>),
}

#[derive(Debug)]
pub struct CycloData {
    pub m: u32,
    pub phi: usize,
    /// Monic minimal polynomial of zeta_m, low-to-high coefficients, length phi + 1.
    pub modulus: Vec<BigRational>,
}

/// Ring descriptor: kind, order parameter k and the designated root omega
/// with omega^k = 1, omega != 1 and sum_{i<k} omega^i = 0.
#[derive(Clone, Debug)]
pub struct RingCtx {
    kind: RingKind,
    k: u32,
    omega: Scalar,
    cyclo: Option<Arc<CycloData>>,
}

impl PartialEq for RingCtx {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.k == other.k
    }
}
impl Eq for RingCtx {}

// ---------------------------------------------------------------------------
// machine-word fast paths for rational arithmetic
//
// Exact values in this crate are usually tiny; routing them through i128
// with checked overflow keeps the big-integer machinery for the rare large
// cases only.
// ---------------------------------------------------------------------------

fn small_parts(r: &BigRational) -> Option<(i128, i128)> {
    use num::ToPrimitive;
    Some((r.numer().to_i128()?, r.denom().to_i128()?))
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

fn rat_mul(a: &BigRational, b: &BigRational) -> BigRational {
    if let (Some((an, ad)), Some((bn, bd))) = (small_parts(a), small_parts(b)) {
        if an == 0 || bn == 0 {
            return BigRational::zero();
        }
        let g1 = gcd_i128(an, bd);
        let g2 = gcd_i128(bn, ad);
        if let (Some(n), Some(d)) = ((an / g1).checked_mul(bn / g2), (ad / g2).checked_mul(bd / g1))
        {
            return BigRational::new_raw(BigInt::from(n), BigInt::from(d));
        }
    }
    a * b
}

fn rat_add(a: &BigRational, b: &BigRational) -> BigRational {
    if let (Some((an, ad)), Some((bn, bd))) = (small_parts(a), small_parts(b)) {
        let cross = an.checked_mul(bd).zip(bn.checked_mul(ad));
        if let Some((x, y)) = cross {
            if let (Some(n), Some(d)) = (x.checked_add(y), ad.checked_mul(bd)) {
                if n == 0 {
                    return BigRational::zero();
                }
                let g = gcd_i128(n, d);
                return BigRational::new_raw(BigInt::from(n / g), BigInt::from(d / g));
            }
        }
    }
    a + b
}

fn rat_sub(a: &BigRational, b: &BigRational) -> BigRational {
    if let (Some((an, ad)), Some((bn, bd))) = (small_parts(a), small_parts(b)) {
        let cross = an.checked_mul(bd).zip(bn.checked_mul(ad));
        if let Some((x, y)) = cross {
            if let (Some(n), Some(d)) = (x.checked_sub(y), ad.checked_mul(bd)) {
                if n == 0 {
                    return BigRational::zero();
                }
                let g = gcd_i128(n, d);
                return BigRational::new_raw(BigInt::from(n / g), BigInt::from(d / g));
            }
        }
    }
    a - b
}

// ---------------------------------------------------------------------------
// rational polynomial helpers (little-endian coefficient vectors)
// ---------------------------------------------------------------------------

fn qp_trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.len() > 1 && p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
    p
}

fn qp_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] = rat_add(&out[i + j], &rat_mul(ai, bj));
        }
    }
    qp_trim(out)
}

/// Exact division with remainder by a nonzero divisor.
fn qp_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let b = qp_trim(b.to_vec());
    assert!(!b.iter().all(|c| c.is_zero()), "division by zero polynomial");
    let mut rem = qp_trim(a.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    if rem.len() <= db && !(rem.len() == 1 && db == 0) {
        return (vec![BigRational::zero()], rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len().saturating_sub(db).max(1)];
    while rem.len() > db || (db == 0 && !rem.iter().all(|c| c.is_zero())) {
        let dr = rem.len() - 1;
        if dr < db {
            break;
        }
        let c = &rem[dr] / &lead;
        if c.is_zero() {
            break;
        }
        quot[dr - db] = c.clone();
        for i in 0..=db {
            let t = &b[i] * &c;
            rem[dr - db + i] -= t;
        }
        rem = qp_trim(rem);
        if rem.len() == 1 && rem[0].is_zero() {
            break;
        }
    }
    (qp_trim(quot), rem)
}

/// Extended gcd over Q[x]: returns (g, u, v) with u*a + v*b = g, g monic.
fn qp_ext_gcd(
    a: &[BigRational],
    b: &[BigRational],
) -> (Vec<BigRational>, Vec<BigRational>, Vec<BigRational>) {
    let zero = || vec![BigRational::zero()];
    let one = || vec![BigRational::one()];
    let mut r0 = qp_trim(a.to_vec());
    let mut r1 = qp_trim(b.to_vec());
    let (mut s0, mut s1) = (one(), zero());
    let (mut t0, mut t1) = (zero(), one());
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = qp_divrem(&r0, &r1);
        let news = qp_sub(&s0, &qp_mul(&q, &s1));
        let newt = qp_sub(&t0, &qp_mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = news;
        t0 = t1;
        t1 = newt;
    }
    // normalize to monic
    let lead = r0.last().unwrap().clone();
    if !lead.is_one() && !lead.is_zero() {
        let inv = BigRational::one() / lead;
        r0 = r0.iter().map(|c| c * &inv).collect();
        s0 = s0.iter().map(|c| c * &inv).collect();
        t0 = t0.iter().map(|c| c * &inv).collect();
    }
    (r0, s0, t0)
}

fn qp_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    qp_trim(out)
}

/// m-th cyclotomic polynomial via Phi_m = (x^m - 1) / prod_{d | m, d < m} Phi_d.
fn cyclotomic_poly(m: u32) -> Vec<BigRational> {
    let mut num = vec![BigRational::zero(); m as usize + 1];
    num[0] = -BigRational::one();
    num[m as usize] = BigRational::one();
    let mut den = vec![BigRational::one()];
    for d in 1..m {
        if m % d == 0 {
            den = qp_mul(&den, &cyclotomic_poly(d));
        }
    }
    let (q, r) = qp_divrem(&num, &den);
    debug_assert!(r.iter().all(|c| c.is_zero()));
    q
}

fn euler_phi(mut m: u32) -> u32 {
    let mut result = m;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn fp_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Smallest generator of the multiplicative group of F_p.
fn smallest_generator(p: u64) -> u64 {
    let factors = prime_factors(p - 1);
    'outer: for g in 2..p {
        for q in &factors {
            if fp_pow(g, (p - 1) / q, p) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("prime field has a generator")
}

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

/// Builds a ring descriptor and checks all of its invariants.
///
/// For the rationals only k = 2 is accepted (omega = -1). For a prime field
/// p must be prime, p must not divide k, and k | p - 1; omega is g^((p-1)/k)
/// for the smallest generator g. For Q(zeta_m) we need k | m and omega is the
/// residue class of zeta_m^(m/k).
pub fn make_ring(kind: RingKind, k: u32) -> Result<RingCtx> {
    if k < 2 {
        return Err(Error::Precondition(format!("k must be at least 2, got {k}")));
    }
    let ctx = match kind {
        RingKind::Rationals => {
            if k != 2 {
                return Err(Error::NoRootOfUnity(format!(
                    "the rationals contain no k-th root of unity other than 1 for k = {k}; use a cyclotomic ring"
                )));
            }
            RingCtx {
                kind,
                k,
                omega: Scalar::Rat(-BigRational::one()),
                cyclo: None,
            }
        }
        RingKind::PrimeField(p) => {
            if !is_prime(p) {
                return Err(Error::Precondition(format!("{p} is not prime")));
            }
            if k as u64 % p == 0 {
                return Err(Error::KNotInvertible(format!("{p} divides k = {k}")));
            }
            if (p - 1) % k as u64 != 0 {
                return Err(Error::NoRootOfUnity(format!(
                    "k = {k} does not divide p - 1 = {}",
                    p - 1
                )));
            }
            let g = smallest_generator(p);
            let omega = Scalar::Fp(fp_pow(g, (p - 1) / k as u64, p));
            RingCtx {
                kind,
                k,
                omega,
                cyclo: None,
            }
        }
        RingKind::Cyclotomic(m) => {
            if m < 2 {
                return Err(Error::Precondition(format!("cyclotomic index must be >= 2, got {m}")));
            }
            if m % k != 0 {
                return Err(Error::NoRootOfUnity(format!(
                    "k = {k} must divide the cyclotomic index m = {m}"
                )));
            }
            let phi = euler_phi(m) as usize;
            let modulus = cyclotomic_poly(m);
            debug_assert_eq!(modulus.len(), phi + 1);
            let data = Arc::new(CycloData { m, phi, modulus });
            let mut ctx = RingCtx {
                kind,
                k,
                omega: Scalar::Fp(0), // placeholder, replaced below
                cyclo: Some(data),
            };
            let zeta = ctx.zeta();
            ctx.omega = ctx.pow_u64(&zeta, (m / k) as u64);
            ctx
        }
    };
    // Construction-time invariants: omega^k = 1, omega != 1, geometric sum 0.
    let wk = ctx.pow_u64(&ctx.omega, ctx.k as u64);
    if wk != ctx.one() || ctx.omega == ctx.one() {
        return Err(Error::Internal("omega is not a proper k-th root of unity".into()));
    }
    let mut s = ctx.zero();
    let mut w = ctx.one();
    for _ in 0..ctx.k {
        s = ctx.add(&s, &w);
        w = ctx.mul(&w, &ctx.omega);
    }
    if !ctx.is_zero(&s) {
        return Err(Error::Internal("geometric sum of omega powers does not vanish".into()));
    }
    Ok(ctx)
}

impl RingCtx {
    pub fn kind(&self) -> &RingKind {
        &self.kind
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn omega(&self) -> Scalar {
        self.omega.clone()
    }
    pub fn omega_inv(&self) -> Scalar {
        self.inv(&self.omega).expect("omega is invertible")
    }
    /// Inverse of k as a ring element.
    pub fn k_inv(&self) -> Scalar {
        self.inv(&self.from_i64(self.k as i64)).expect("k is invertible by construction")
    }

    fn p(&self) -> u64 {
        match self.kind {
            RingKind::PrimeField(p) => p,
            _ => unreachable!("not a prime field"),
        }
    }

    fn cyclo(&self) -> &CycloData {
        self.cyclo.as_ref().expect("not a cyclotomic ring").as_ref()
    }

    /// Residue class of zeta_m (only for cyclotomic rings).
    pub fn zeta(&self) -> Scalar {
        let d = self.cyclo();
        let mut v = vec![BigRational::zero(); d.phi];
        if d.phi == 1 {
            // degree-1 fields: zeta is the root of the linear modulus
            // x + c0 = 0, so zeta = -c0.
            v[0] = -d.modulus[0].clone();
        } else {
            v[1] = BigRational::one();
        }
        Scalar::Cy(v)
    }

    pub fn zero(&self) -> Scalar {
        match self.kind {
            RingKind::Rationals => Scalar::Rat(BigRational::zero()),
            RingKind::PrimeField(_) => Scalar::Fp(0),
            RingKind::Cyclotomic(_) => Scalar::Cy(vec![BigRational::zero(); self.cyclo().phi]),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self.kind {
            RingKind::Rationals => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
            RingKind::PrimeField(p) => Scalar::Fp((v.rem_euclid(p as i64)) as u64),
            RingKind::Cyclotomic(_) => {
                let mut out = vec![BigRational::zero(); self.cyclo().phi];
                out[0] = BigRational::from_integer(BigInt::from(v));
                Scalar::Cy(out)
            }
        }
    }

    /// num/den as a ring element; den must be invertible in the ring.
    pub fn from_ratio(&self, num: i64, den: i64) -> Scalar {
        assert!(den != 0);
        let n = self.from_i64(num);
        let d = self.from_i64(den);
        self.div(&n, &d).expect("denominator must be invertible")
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        *a == self.zero()
    }

    pub fn is_one(&self, a: &Scalar) -> bool {
        *a == self.one()
    }

    fn cy_reduce(&self, mut v: Vec<BigRational>) -> Vec<BigRational> {
        let d = self.cyclo();
        // reduce degree >= phi terms by the monic modulus
        while v.len() > d.phi {
            let deg = v.len() - 1;
            let c = v.pop().unwrap();
            if c.is_zero() {
                continue;
            }
            // x^deg = x^(deg-phi) * (x^phi) and x^phi = -(lower part of modulus)
            for i in 0..d.phi {
                let t = &d.modulus[i] * &c;
                v[deg - d.phi + i] -= t;
            }
        }
        v.resize(d.phi, BigRational::zero());
        v
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(rat_add(x, y)),
            (Scalar::Fp(x), Scalar::Fp(y)) => Scalar::Fp((x + y) % self.p()),
            (Scalar::Cy(x), Scalar::Cy(y)) => {
                Scalar::Cy(x.iter().zip(y).map(|(u, v)| rat_add(u, v)).collect())
            }
            _ => panic!("mixed scalar kinds"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(rat_sub(x, y)),
            (Scalar::Fp(x), Scalar::Fp(y)) => Scalar::Fp((x + self.p() - y) % self.p()),
            (Scalar::Cy(x), Scalar::Cy(y)) => {
                Scalar::Cy(x.iter().zip(y).map(|(u, v)| rat_sub(u, v)).collect())
            }
            _ => panic!("mixed scalar kinds"),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Rat(x) => Scalar::Rat(-x),
            Scalar::Fp(x) => Scalar::Fp(if *x == 0 { 0 } else { self.p() - x }),
            Scalar::Cy(x) => Scalar::Cy(x.iter().map(|c| -c).collect()),
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(rat_mul(x, y)),
            (Scalar::Fp(x), Scalar::Fp(y)) => {
                Scalar::Fp(((*x as u128 * *y as u128) % self.p() as u128) as u64)
            }
            (Scalar::Cy(x), Scalar::Cy(y)) => {
                // degree-2 fields dominate in practice; avoid the generic
                // polynomial path there
                if x.len() == 2 {
                    let d = self.cyclo();
                    let hi = rat_mul(&x[1], &y[1]);
                    let c0 = rat_sub(&rat_mul(&x[0], &y[0]), &rat_mul(&d.modulus[0], &hi));
                    let c1 = rat_sub(
                        &rat_add(&rat_mul(&x[0], &y[1]), &rat_mul(&x[1], &y[0])),
                        &rat_mul(&d.modulus[1], &hi),
                    );
                    return Scalar::Cy(vec![c0, c1]);
                }
                let prod = qp_mul(x, y);
                Scalar::Cy(self.cy_reduce(prod))
            }
            _ => panic!("mixed scalar kinds"),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Result<Scalar> {
        if self.is_zero(a) {
            return Err(Error::Singular("inverse of zero".into()));
        }
        Ok(match a {
            Scalar::Rat(x) => Scalar::Rat(BigRational::one() / x),
            Scalar::Fp(x) => Scalar::Fp(fp_pow(*x, self.p() - 2, self.p())),
            Scalar::Cy(x) => {
                let d = self.cyclo();
                let (g, u, _) = qp_ext_gcd(x, &d.modulus);
                debug_assert!(g.len() == 1 && g[0].is_one(), "cyclotomic modulus is irreducible");
                let (_, r) = qp_divrem(&u, &d.modulus);
                let mut v = r;
                v.resize(d.phi, BigRational::zero());
                Scalar::Cy(v)
            }
        })
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow_u64(&self, a: &Scalar, mut e: u64) -> Scalar {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_i64(&self, a: &Scalar, e: i64) -> Result<Scalar> {
        if e >= 0 {
            Ok(self.pow_u64(a, e as u64))
        } else {
            let inv = self.inv(a)?;
            Ok(self.pow_u64(&inv, e.unsigned_abs()))
        }
    }

    // -----------------------------------------------------------------------
    // roots of unity
    // -----------------------------------------------------------------------

    /// Order of the full group of roots of unity in the ring (cyclotomic only).
    fn unity_group_order(&self) -> u64 {
        let m = self.cyclo().m as u64;
        if m % 2 == 0 {
            m
        } else {
            2 * m
        }
    }

    /// A generator of the group of roots of unity (cyclotomic only).
    fn unity_generator(&self) -> Scalar {
        let m = self.cyclo().m;
        let z = self.zeta();
        if m % 2 == 0 {
            z
        } else {
            // -zeta^((m+1)/2) has order 2m when m is odd
            self.neg(&self.pow_u64(&z, ((m + 1) / 2) as u64))
        }
    }

    /// Writes a root of unity as an exponent of the unity-group generator.
    /// Returns None when `a` is not a root of unity in this ring.
    pub fn root_of_unity_exponent(&self, a: &Scalar) -> Option<u64> {
        let order = self.unity_group_order();
        let g = self.unity_generator();
        let mut pow = self.one();
        for e in 0..order {
            if pow == *a {
                return Some(e);
            }
            pow = self.mul(&pow, &g);
        }
        None
    }

    /// Multiplicative order of a root of unity, None if `a` is not one.
    pub fn root_of_unity_order(&self, a: &Scalar) -> Option<u64> {
        let e = self.root_of_unity_exponent(a)?;
        let m = self.unity_group_order();
        Some(m / m.gcd(&e.max(1)))
    }

    /// Deterministic k-th root of a root of unity in a cyclotomic ring.
    ///
    /// The k candidates are b0 * omega^branch where b0 is the canonical root
    /// (smallest exponent solution in the unity group). Fails with
    /// `RootNotInRing` when no k-th root of `a` lies in the ring.
    pub fn kth_root(&self, a: &Scalar, branch: u32) -> Result<Scalar> {
        if !matches!(self.kind, RingKind::Cyclotomic(_)) {
            return Err(Error::Precondition(
                "kth_root is only available in cyclotomic rings".into(),
            ));
        }
        if branch >= self.k {
            return Err(Error::Precondition(format!(
                "branch {branch} out of range for k = {}",
                self.k
            )));
        }
        let order = self.unity_group_order();
        let e = self.root_of_unity_exponent(a).ok_or_else(|| {
            Error::RootNotInRing("input is not a root of unity in this ring".into())
        })?;
        // solve k*x = e (mod order)
        let k = self.k as u64 % order;
        let d = k.gcd(&order);
        if e % d != 0 {
            return Err(Error::RootNotInRing(format!(
                "no k-th root: gcd({k}, {order}) does not divide exponent {e}"
            )));
        }
        let ord_red = order / d;
        let k_red = k / d;
        let e_red = (e / d) % ord_red;
        // inverse of k_red mod ord_red by exhaustive search (desk-scale orders)
        let mut x0 = 0u64;
        for x in 0..ord_red {
            if (k_red * x) % ord_red == e_red {
                x0 = x;
                break;
            }
        }
        let b0 = self.pow_u64(&self.unity_generator(), x0);
        let b = self.mul(&b0, &self.pow_u64(&self.omega, branch as u64));
        debug_assert_eq!(self.pow_u64(&b, self.k as u64), *a);
        Ok(b)
    }

    /// Embeds a scalar of this ring into a larger ring. Supported maps:
    /// identity on matching kinds, rationals into any cyclotomic field, and
    /// Q(zeta_m) into Q(zeta_m2) when m divides m2 (zeta_m maps to
    /// zeta_m2^(m2/m)).
    pub fn lift_scalar(&self, dst: &RingCtx, v: &Scalar) -> Result<Scalar> {
        match (&self.kind, &dst.kind) {
            (RingKind::Rationals, RingKind::Rationals) => Ok(v.clone()),
            (RingKind::PrimeField(p), RingKind::PrimeField(q)) if p == q => Ok(v.clone()),
            (RingKind::Rationals, RingKind::Cyclotomic(_)) => {
                let Scalar::Rat(x) = v else { unreachable!() };
                let mut out = vec![BigRational::zero(); dst.cyclo().phi];
                out[0] = x.clone();
                Ok(Scalar::Cy(out))
            }
            (RingKind::Cyclotomic(m), RingKind::Cyclotomic(m2)) if m2 % m == 0 => {
                let Scalar::Cy(coeffs) = v else { unreachable!() };
                let root = dst.pow_u64(&dst.zeta(), (m2 / m) as u64);
                // Horner evaluation of the coefficient polynomial at the image root
                let mut acc = dst.zero();
                for c in coeffs.iter().rev() {
                    acc = dst.mul(&acc, &root);
                    let mut cv = vec![BigRational::zero(); dst.cyclo().phi];
                    cv[0] = c.clone();
                    acc = dst.add(&acc, &Scalar::Cy(cv));
                }
                Ok(acc)
            }
            _ => Err(Error::Precondition(format!(
                "no embedding of {:?} into {:?}",
                self.kind, dst.kind
            ))),
        }
    }

    // -----------------------------------------------------------------------
    // canonical text form
    // -----------------------------------------------------------------------

    /// Canonical text form: "p/q" (q > 0, lowest terms, "/q" omitted when
    /// q = 1), "r mod p", or "[c0, c1, ...]" with rational coefficients.
    pub fn format_scalar(&self, a: &Scalar) -> String {
        match a {
            Scalar::Rat(x) => format_rational(x),
            Scalar::Fp(x) => format!("{x} mod {}", self.p()),
            Scalar::Cy(v) => {
                let mut s = String::from("[");
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    let _ = write!(s, "{}", format_rational(c));
                }
                s.push(']');
                s
            }
        }
    }

    pub fn parse_scalar(&self, text: &str) -> Result<Scalar> {
        let t = text.trim();
        match self.kind {
            RingKind::Rationals => Ok(Scalar::Rat(parse_rational(t)?)),
            RingKind::PrimeField(p) => {
                let (num, modulus) = match t.split_once("mod") {
                    Some((n, m)) => (n.trim(), Some(m.trim())),
                    None => (t, None),
                };
                if let Some(m) = modulus {
                    let mp: u64 = m
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad modulus in {text:?}")))?;
                    if mp != p {
                        return Err(Error::Parse(format!(
                            "modulus mismatch: scalar {text:?} vs ring mod {p}"
                        )));
                    }
                }
                let v: i64 = num
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad residue in {text:?}")))?;
                Ok(self.from_i64(v))
            }
            RingKind::Cyclotomic(_) => {
                let inner = t
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| Error::Parse(format!("expected [c0, c1, ...], got {text:?}")))?;
                let phi = self.cyclo().phi;
                let mut coeffs = Vec::with_capacity(phi);
                let inner = inner.trim();
                if !inner.is_empty() {
                    for part in inner.split(',') {
                        coeffs.push(parse_rational(part.trim())?);
                    }
                }
                if coeffs.len() != phi {
                    return Err(Error::Parse(format!(
                        "expected {phi} coefficients, got {} in {text:?}",
                        coeffs.len()
                    )));
                }
                Ok(Scalar::Cy(coeffs))
            }
        }
    }
}

fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn parse_rational(t: &str) -> Result<BigRational> {
    let t = t.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = n
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator {t:?}")))?;
    let den: BigInt = d
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator {t:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {t:?}")));
    }
    let mut r = BigRational::new(num, den);
    if r.denom().is_negative() {
        r = -r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::XorShift;

    #[test]
    fn rationals_k2() {
        let ctx = make_ring(RingKind::Rationals, 2).unwrap();
        assert_eq!(ctx.omega(), ctx.from_i64(-1));
    }

    #[test]
    fn rationals_reject_k3() {
        assert!(matches!(
            make_ring(RingKind::Rationals, 3),
            Err(Error::NoRootOfUnity(_))
        ));
    }

    #[test]
    fn f7_k3_omega_is_2() {
        let ctx = make_ring(RingKind::PrimeField(7), 3).unwrap();
        assert_eq!(ctx.omega(), Scalar::Fp(2));
        assert_eq!(ctx.pow_u64(&ctx.omega(), 3), ctx.one());
    }

    #[test]
    fn f3_k3_not_invertible() {
        assert!(matches!(
            make_ring(RingKind::PrimeField(3), 3),
            Err(Error::KNotInvertible(_))
        ));
    }

    #[test]
    fn cyclotomic_omega_and_sum() {
        for (m, k) in [(3u32, 3u32), (4, 4), (6, 6), (8, 4), (9, 3), (12, 3), (12, 4)] {
            let ctx = make_ring(RingKind::Cyclotomic(m), k).unwrap();
            assert_eq!(ctx.pow_u64(&ctx.omega(), k as u64), ctx.one());
            let mut s = ctx.zero();
            let mut w = ctx.one();
            for _ in 0..k {
                s = ctx.add(&s, &w);
                w = ctx.mul(&w, &ctx.omega());
            }
            assert!(ctx.is_zero(&s));
        }
    }

    #[test]
    fn kth_root_identity_branch0() {
        let ctx = make_ring(RingKind::Cyclotomic(8), 4).unwrap();
        assert_eq!(ctx.kth_root(&ctx.one(), 0).unwrap(), ctx.one());
    }

    #[test]
    fn kth_root_of_minus_one_in_z8() {
        let ctx = make_ring(RingKind::Cyclotomic(8), 4).unwrap();
        let b = ctx.kth_root(&ctx.from_i64(-1), 0).unwrap();
        assert_eq!(b, ctx.zeta());
        assert_eq!(ctx.pow_u64(&b, 4), ctx.from_i64(-1));
    }

    #[test]
    fn kth_root_missing_in_z4() {
        let ctx = make_ring(RingKind::Cyclotomic(4), 4).unwrap();
        let i = ctx.zeta();
        assert!(matches!(ctx.kth_root(&i, 0), Err(Error::RootNotInRing(_))));
    }

    #[test]
    fn kth_root_branches_differ_by_omega_power() {
        let ctx = make_ring(RingKind::Cyclotomic(12), 3).unwrap();
        let a = ctx.pow_u64(&ctx.zeta(), 3); // i
        let b0 = ctx.kth_root(&a, 0).unwrap();
        let b2 = ctx.kth_root(&a, 2).unwrap();
        let ratio = ctx.div(&b2, &b0).unwrap();
        assert_eq!(ratio, ctx.pow_u64(&ctx.omega(), 2));
    }

    #[test]
    fn field_axiom_spot_checks() {
        let rings = [
            make_ring(RingKind::Rationals, 2).unwrap(),
            make_ring(RingKind::PrimeField(7), 3).unwrap(),
            make_ring(RingKind::Cyclotomic(8), 4).unwrap(),
            make_ring(RingKind::Cyclotomic(9), 3).unwrap(),
        ];
        let mut rng = XorShift::new(0xA5A5_1234);
        for ctx in &rings {
            for _ in 0..1000 {
                let a = crate::testkit::rand_scalar(ctx, &mut rng);
                let b = crate::testkit::rand_scalar(ctx, &mut rng);
                let c = crate::testkit::rand_scalar(ctx, &mut rng);
                let lhs = ctx.mul(&a, &ctx.add(&b, &c));
                let rhs = ctx.add(&ctx.mul(&a, &b), &ctx.mul(&a, &c));
                assert_eq!(lhs, rhs);
                let assoc_l = ctx.mul(&ctx.mul(&a, &b), &c);
                let assoc_r = ctx.mul(&a, &ctx.mul(&b, &c));
                assert_eq!(assoc_l, assoc_r);
                if !ctx.is_zero(&a) {
                    let ai = ctx.inv(&a).unwrap();
                    assert_eq!(ctx.mul(&a, &ai), ctx.one());
                }
            }
        }
    }

    #[test]
    fn scalar_text_round_trip() {
        let q = make_ring(RingKind::Rationals, 2).unwrap();
        for s in ["0", "5", "-3/7", "22/7"] {
            let v = q.parse_scalar(s).unwrap();
            assert_eq!(q.format_scalar(&v), s);
        }
        let f = make_ring(RingKind::PrimeField(7), 3).unwrap();
        let v = f.parse_scalar("3 mod 7").unwrap();
        assert_eq!(f.format_scalar(&v), "3 mod 7");
        let c = make_ring(RingKind::Cyclotomic(8), 4).unwrap();
        let v = c.parse_scalar("[1, 0, -1/2, 3]").unwrap();
        assert_eq!(c.format_scalar(&v), "[1, 0, -1/2, 3]");
    }

    #[test]
    fn phi_and_cyclotomic_polynomials() {
        assert_eq!(euler_phi(8), 4);
        assert_eq!(euler_phi(9), 6);
        assert_eq!(euler_phi(12), 4);
        // Phi_4 = x^2 + 1
        let p4 = cyclotomic_poly(4);
        assert_eq!(p4.len(), 3);
        assert!(p4[0].is_one() && p4[1].is_zero() && p4[2].is_one());
        // Phi_6 = x^2 - x + 1
        let p6 = cyclotomic_poly(6);
        assert_eq!(p6.len(), 3);
        assert_eq!(p6[1], -BigRational::one());
    }
}
