//! Command line front end: factor matrices into products of commutators of
//! order-k elements, verify the emitted certificates bit-exactly, and walk
//! through the named construction demos.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use ordk::commfact::{
    bc_pair, eval_word_mat, f_word, factor_superdiag_oracle, verify_certificate, Certificate,
    GenMx,
};
use ordk::coherent::coherent_solve_oracle;
use ordk::error::{Error, Result};
use ordk::jsonio;
use ordk::mat::{oracle_product, Mat, TriOracle};
use ordk::ring::{make_ring, RingCtx, RingKind};
use ordk::seq::PeriodicSeq;
use ordk::slfact::{j_block, scalar_factor, JBlockParams};
use ordk::vk::lift_mat;

#[derive(Parser)]
#[command(
    name = "ordk",
    about = "Factor matrices into products of commutators of order-k elements, with exact machine-checkable certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Ut,
    Sl,
    Vk,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFmt {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Factor a matrix and write a certificate.
    Factor {
        /// Input class: unitriangular, SL_n, or Vershik-Kerov block matrix.
        #[arg(long, value_enum)]
        mode: Mode,
        /// Coefficient ring: Q, Fp:<p>, or cyclo:<m>.
        #[arg(long)]
        ring: String,
        /// Order parameter: every generator satisfies g^k = I.
        #[arg(long)]
        k: u32,
        /// Path to the matrix JSON.
        #[arg(long)]
        input: PathBuf,
        /// Verification window (defaults to a size covering all distinct
        /// periodic structure at least twice).
        #[arg(long)]
        window: Option<usize>,
        /// Certificate output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        report: ReportFmt,
    },
    /// Replay a certificate against a target matrix.
    Verify {
        /// Path to the certificate JSON.
        #[arg(long)]
        cert: PathBuf,
        /// Path to the target matrix JSON.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        window: Option<usize>,
        /// Ring of the target file when it differs from the certificate ring
        /// (entries are embedded into the certificate ring).
        #[arg(long)]
        input_ring: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        report: ReportFmt,
    },
    /// Print a worked construction with exact intermediate matrices.
    Demo {
        /// One of: lemma5-k2, lemma6-k4, scalar-even-n2.
        name: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn parse_ring_flag(s: &str, k: u32) -> Result<RingCtx> {
    let kind = if s == "Q" {
        RingKind::Rationals
    } else if let Some(p) = s.strip_prefix("Fp:") {
        RingKind::PrimeField(
            p.parse()
                .map_err(|_| Error::Parse(format!("bad prime in ring flag {s:?}")))?,
        )
    } else if let Some(m) = s.strip_prefix("cyclo:") {
        RingKind::Cyclotomic(
            m.parse()
                .map_err(|_| Error::Parse(format!("bad cyclotomic index in ring flag {s:?}")))?,
        )
    } else {
        return Err(Error::Parse(format!(
            "unknown ring {s:?}; expected Q, Fp:<p> or cyclo:<m>"
        )));
    };
    make_ring(kind, k)
}

fn load_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("bad JSON in {}: {e}", path.display())))
}

fn emit_certificate(cert: &Certificate, out: &Option<PathBuf>) -> Result<()> {
    let text = jsonio::canonical_string(&jsonio::cert_to_value(cert));
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_report(report: &ordk::commfact::VerifyReport, fmt: ReportFmt) {
    match fmt {
        ReportFmt::Text => print!("{}", report.text()),
        ReportFmt::Json => println!("{}", serde_json::to_string_pretty(report).unwrap()),
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Factor {
            mode,
            ring,
            k,
            input,
            window,
            out,
            report,
        } => {
            let ctx = parse_ring_flag(&ring, k)?;
            let v = load_json(&input)?;
            let job_mode = match mode {
                Mode::Ut => ordk::job::Mode::Ut,
                Mode::Sl => ordk::job::Mode::Sl,
                Mode::Vk => ordk::job::Mode::Vk,
            };
            let outcome = ordk::job::run_factor(job_mode, &ctx, &v, window)?;
            if outcome.ring_enlarged {
                eprintln!("note: certificate ring enlarged to accommodate the needed k-th roots");
            }
            let bound = (4 * k - 6) as usize;
            println!(
                "word length {} (bound 4k-6 = {}){}",
                outcome.cert.word.len(),
                bound,
                if outcome.exceeds_bound {
                    "; EXCEEDS the bound (fallback branch)"
                } else {
                    ""
                }
            );
            println!(
                "producer {}; verification window {}",
                outcome.cert.producer.as_str(),
                outcome.window
            );
            print_report(&outcome.report, report);
            emit_certificate(&outcome.cert, &out)?;
            Ok(0)
        }
        Cmd::Verify {
            cert,
            input,
            window,
            input_ring,
            report,
        } => {
            let cert = jsonio::cert_from_value(&load_json(&cert)?)?;
            let v = load_json(&input)?;
            let target = match jsonio::genmx_from_value(&cert.ctx, &v) {
                Ok(t) => t,
                Err(parse_err) => match &input_ring {
                    Some(r) => {
                        let src = parse_ring_flag(r, cert.ctx.k())?;
                        match jsonio::genmx_from_value(&src, &v)? {
                            GenMx::Dense(m) => GenMx::Dense(lift_mat(&src, &cert.ctx, &m)?),
                            GenMx::Tri(t) => GenMx::Tri(ordk::vk::lift_oracle(&src, &cert.ctx, &t)?),
                            GenMx::Vk(_) => return Err(parse_err),
                        }
                    }
                    None => return Err(parse_err),
                },
            };
            let n = window
                .unwrap_or_else(|| ordk::job::default_window(&target, cert.ctx.k()))
                .max(target.min_window());
            let rep = verify_certificate(&cert, &target, n);
            print_report(&rep, report);
            Ok(if rep.all_pass() { 0 } else { 1 })
        }
        Cmd::Demo { name } => {
            run_demo(&name)?;
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// demos
// ---------------------------------------------------------------------------

fn print_mat(ctx: &RingCtx, label: &str, m: &Mat) {
    println!("{label} =");
    for i in 0..m.n() {
        let row: Vec<String> = (0..m.n()).map(|j| ctx.format_scalar(m.get(i, j))).collect();
        println!("  [{}]", row.join(", "));
    }
}

fn run_demo(name: &str) -> Result<()> {
    match name {
        "lemma6-k4" => demo_lemma6_k4(),
        "lemma5-k2" => demo_lemma5_k2(),
        "scalar-even-n2" => demo_scalar_even_n2(),
        other => Err(Error::Parse(format!(
            "unknown demo {other:?}; available: lemma5-k2, lemma6-k4, scalar-even-n2"
        ))),
    }
}

/// The telescoping word F_4 over an order-4 pair, checked exactly.
fn demo_lemma6_k4() -> Result<()> {
    let ctx = make_ring(RingKind::Cyclotomic(4), 4)?;
    println!("telescoping word for k = 4 over Q(zeta_4)");
    let word = f_word(4);
    let names = ["B", "C"];
    let rendered: Vec<String> = word
        .terms
        .iter()
        .map(|t| format!("[{}^{}, {}^{}]", names[t.x.0], t.x.1, names[t.y.0], t.y.1))
        .collect();
    println!("F_4(B, C) = {}", rendered.join(" "));
    let j = PeriodicSeq::ones(&ctx);
    let (b, c) = bc_pair(&j, &ctx);
    let n = 8;
    let bw = b.window(n)?;
    let cw = c.window(n)?;
    print_mat(&ctx, "window(B, 8)", &bw);
    print_mat(&ctx, "window(C, 8)", &cw);
    let bc = bw.mul(&cw);
    let mut ok = true;
    for i in 2..=4i64 {
        let lhs = bc.pow(i)?;
        let rhs = eval_word_mat(&f_word(i as u32), &[bw.clone(), cw.clone()])?
            .mul(&cw.pow(i - 1)?)
            .mul(&bw.pow(i)?)
            .mul(&cw);
        let good = lhs == rhs;
        ok &= good;
        println!(
            "(BC)^{i} = F_{i}(B,C) C^{} B^{i} C : {}",
            i - 1,
            if good { "verified" } else { "MISMATCH" }
        );
    }
    let wk = eval_word_mat(&word, &[bw.clone(), cw.clone()])?;
    let good = wk == bc.pow(4)?;
    ok &= good;
    println!("(BC)^4 = F_4(B,C) : {}", if good { "verified" } else { "MISMATCH" });
    if !ok {
        return Err(Error::Internal("demo identity failed".into()));
    }
    Ok(())
}

/// The order-2 pair whose product carries a prescribed superdiagonal, with
/// its coherence data.
fn demo_lemma5_k2() -> Result<()> {
    let ctx = make_ring(RingKind::Rationals, 2)?;
    println!("order-2 block pair over Q with all-ones superdiagonal");
    let j = PeriodicSeq::ones(&ctx);
    let (b, c) = bc_pair(&j, &ctx);
    let n = 6;
    let bw = b.window(n)?;
    let cw = c.window(n)?;
    print_mat(&ctx, "window(B, 6)", &bw);
    print_mat(&ctx, "window(C, 6)", &cw);
    println!(
        "B^2 = I: {}; C^2 = I: {}",
        if bw.order_divides(2) { "verified" } else { "MISMATCH" },
        if cw.order_divides(2) { "verified" } else { "MISMATCH" }
    );
    let bc = oracle_product(&b, &c);
    print_mat(&ctx, "window(BC, 6)", &bc.window(n)?);
    let seqs = coherent_solve_oracle(&bc, 3, 10)?;
    let d2 = seqs.term(2, &ctx);
    let vals: Vec<String> = (0..6).map(|t| ctx.format_scalar(d2.get(t))).collect();
    println!(
        "coherence data of BC: D_0 = D_1 = I, D_2 diagonal = [{} ...]",
        vals.join(", ")
    );
    println!("(D_2 is supported on the even positions)");
    let pw = ordk::mat::oracle_pow(&bc, 2);
    let got = pw.window(n)?.superdiag();
    let want: Vec<_> = (0..n - 1).map(|t| j.get(t).clone()).collect();
    println!(
        "superdiagonal of (BC)^2 equals J: {}",
        if got == want { "verified" } else { "MISMATCH" }
    );
    let cert = factor_superdiag_oracle(&ctx, &j)?;
    println!(
        "factoring I + J: {} commutator(s) of order-2 generators",
        cert.word.len()
    );
    let target = GenMx::Tri(TriOracle::one_plus_superdiag(ctx.clone(), j));
    let rep = verify_certificate(&cert, &target, 8);
    print!("{}", rep.text());
    if !rep.all_pass() {
        return Err(Error::Internal("demo certificate failed".into()));
    }
    Ok(())
}

/// The even-parity split of -I_2 and its order-4 block pair.
fn demo_scalar_even_n2() -> Result<()> {
    let ctx = make_ring(RingKind::Cyclotomic(8), 4)?;
    println!("scalar split of -I_2 over Q(zeta_8), k = 4");
    let alpha = ctx.from_i64(-1);
    let f = Mat::from_rows(
        ctx.clone(),
        vec![
            vec![alpha.clone(), ctx.zero()],
            vec![ctx.zero(), ctx.inv(&alpha)?],
        ],
    );
    let g = Mat::identity(ctx.clone(), 2);
    print_mat(&ctx, "F", &f);
    print_mat(&ctx, "G", &g);
    println!(
        "F G = alpha I: {}",
        if f.mul(&g) == Mat::identity(ctx.clone(), 2).scale(&alpha) {
            "verified"
        } else {
            "MISMATCH"
        }
    );
    // the 2x2 order-4 blocks on the root branch s with s^4 = -1
    let s = ctx.kth_root(&alpha, 0)?;
    println!("k-th root branch for the F pair: s = {}", ctx.format_scalar(&s));
    let params = JBlockParams::new(&ctx, s, ctx.omega())?;
    let (j1, j2) = j_block(&ctx, &params)?;
    print_mat(&ctx, "J1", &j1);
    print_mat(&ctx, "J2", &j2);
    println!(
        "J1^4 = J2^4 = I: {}",
        if j1.order_divides(4) && j2.order_divides(4) {
            "verified"
        } else {
            "MISMATCH"
        }
    );
    println!(
        "(J1 J2)^4 = F block: {}",
        if j1.mul(&j2).pow(4)? == f { "verified" } else { "MISMATCH" }
    );
    let out = scalar_factor(&alpha, 2, &ctx)?;
    println!(
        "full certificate: {} commutators of order-4 generators",
        out.cert.word.len()
    );
    let target = GenMx::Dense(Mat::identity(ctx.clone(), 2).scale(&alpha));
    let rep = verify_certificate(&out.cert, &target, 2);
    print!("{}", rep.text());
    if !rep.all_pass() {
        return Err(Error::Internal("demo certificate failed".into()));
    }
    Ok(())
}
