//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! `LAWSON_EXTENDED=1` adds the long IFT runs (n = 6 and n = 8 quadratic) and the
//! error-column and monotonicity checks that depend on them. Build with `--release` for those.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lawson_core::area::{self, fixed, TailConfig};
use lawson_core::genus2::{self, OptimizeOptions, TriangulationParams};
use lawson_core::ift::{IftOptions, IftParams, IftSetup};
use lawson_core::mpl::{
    alternating_mzv, evaluate_iterated_integral, naive_truncated_mpl, truncated_mpl, IteratedWord, MplArgs, MzvIndex,
    OMEGA_ALPHA_MAX,
};
use lawson_core::mzv_symbolic::{alpha3_exact, closed_form, mono, omega_closed_form, table_indices};
use lawson_core::omega::{Endpoint, OmegaEngine, Phi};
use lawson_core::real::Real;
use lawson_core::series::{Mode, ParamSeries, ScalarSeries};
use lawson_core::wiener::LaurentPoly;
use lawson_core::{CertifiedComplex as CC, Ctx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const ALPHAS: [(usize, &str); 6] = [
    (1, "0.693147180559945309417232121458176568075500134360255254120680"),
    (3, "2.704628032109087142149410863400762479221219157766122484032610"),
    (5, "3.699626994497618439893380135471044617736329548309105157162310"),
    (7, "-53.1688000602634657601186493744463143722221041377109549606883"),
    (9, "-459.565676371488633633252895256096561995526272030689845199417"),
    (11, "-260.931729774858246058852756835445016841900749580577223718493"),
];

/// Printed (genus, area, error bound) rows.
const AREAS: [(u32, &str, f64); 8] = [
    (3, "22.82027709", 0.244537),
    (4, "23.32191299", 0.000512743),
    (5, "23.64134581", 5.732114e-6),
    (6, "23.86347454", 1.4302993e-7),
    (7, "24.02726927", 6.096336e-9),
    (8, "24.15322275", 3.847452e-10),
    (9, "24.25318196", 3.2867174e-11),
    (10, "24.33449044", 3.574938e-12),
];

/// A feasible point for n = 8, N = 7 with the quadratic correction, found by `optimize_genus`.
const IFT_N8_QUADRATIC: IftParams = IftParams {
    n: 8,
    derivs: 7,
    quadratic: true,
    t: N8_T,
    r: N8_R,
    varrho: N8_VARRHO,
    rho: N8_RHO,
    kappa: 0.99999,
};
include!("data/ift_n8_quadratic.rs");

fn extended() -> bool {
    std::env::var("LAWSON_EXTENDED").map(|v| v == "1").unwrap_or(false)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn alphas_order11(ctx: &Ctx) -> Result<ScalarSeries, String> {
    ParamSeries::compute(ctx, &Phi::quarter(ctx), Mode::Minimal, 11)
        .and_then(|s| s.area_coefficients(11))
        .map_err(e)
}

/// Correct significant digits of `got` relative to a decimal string.
fn agreeing_digits(got: &CC, want: &CC) -> f64 {
    let d = got.dist_up(want);
    if d == 0.0 {
        return f64::INFINITY;
    }
    (want.re_f64().abs() / d).log10()
}

fn c1_alphas(ctx: &Ctx, alphas: &ScalarSeries) -> Outcome {
    let mut worst = f64::INFINITY;
    for (k, s) in ALPHAS {
        let want = ctx.parse_real(s).map_err(e)?;
        let got = &alphas.c[k];
        // The printed value has 60 digits; widen it by its last-digit uncertainty.
        let printed = want.clone().inflate(1e-58 * want.re_f64().abs().max(1.0));
        ensure(got.overlaps(&printed), format!("α_{k} disc misses the printed value"))?;
        worst = worst.min(agreeing_digits(got, &want));
    }
    ensure(worst >= 30.0, format!("only {worst:.1} digits"))?;
    let ln2 = ctx.ln2();
    ensure(alphas.c[1].overlaps(&ln2), "α₁ ∌ log 2")?;
    let z3 = mono(9, 4, 0, 0, 1).numeric(ctx).map_err(e)?;
    ensure(alphas.c[3].overlaps(&z3), "α₃ ∌ 9/4 ζ(3)")?;
    ensure(alphas.c[3].radius() < 1e-40, format!("α₃ radius {:.1e}", alphas.c[3].radius()))?;
    Ok(format!("≥ {worst:.1} digits; α₁ ∋ log 2, α₃ ∋ 9/4 ζ(3)"))
}

fn c2_exact() -> Outcome {
    let a3 = alpha3_exact().map_err(e)?;
    ensure(a3 == mono(9, 4, 0, 0, 1), format!("α₃ = {a3}"))?;
    for probe in [mono(1, 1, 2, 1, 0), mono(1, 1, 0, 3, 0)] {
        let (m, _) = probe.terms().next().expect("one term");
        ensure(a3.coeff(m).is_zero(), format!("nonzero coefficient of {probe}"))?;
    }
    Ok(format!("α₃ = {a3}"))
}

fn c3_even(alphas: &ScalarSeries) -> Outcome {
    let mut worst: f64 = 0.0;
    for k in [2, 4, 6] {
        let c = &alphas.c[k];
        ensure(c.contains_zero(), format!("α_{k} excludes 0"))?;
        let (_, hi) = c.disc_abs_interval();
        ensure(hi < 1e-25, format!("|α_{k}| ≤ {hi:.1e}"))?;
        worst = worst.max(hi);
    }
    Ok(format!("|α₂|, |α₄|, |α₆| ≤ {worst:.1e}"))
}

fn c4_tables(ctx: &Ctx) -> Outcome {
    let mut n = 0;
    for idx in table_indices() {
        let v = alternating_mzv(&idx, ctx).map_err(e)?;
        let want = closed_form(&idx).map_err(e)?.numeric(ctx).map_err(e)?;
        let d = v.dist_up(&want);
        ensure(d <= 1e-30, format!("ζ({idx}) off by {d:.1e}"))?;
        n += 1;
    }
    let engine = OmegaEngine::new(ctx, &Phi::quarter(ctx));
    let words: [&[u8]; 10] =
        [&[3], &[2, 1], &[2, 2, 3], &[3, 1, 1], &[3, 3, 3], &[2, 1, 1, 1], &[2, 2, 2, 1], &[2, 1, 3, 3], &[3, 1, 2, 3], &[3, 3, 2, 1]];
    for w in words {
        let v = engine.eval(w, Endpoint::One).map_err(e)?;
        let want = omega_closed_form(w).map_err(e)?.numeric(ctx).map_err(e)?;
        // Route B is independent of the MZV table.
        let b = engine.eval_route_b(w, Endpoint::One).map_err(e)?;
        let d = v.dist_up(&want).max(b.dist_up(&want));
        ensure(d <= 1e-30, format!("Ω{w:?} off by {d:.1e}"))?;
    }
    Ok(format!("{n} MZV and {} Ω closed forms", words.len()))
}

fn c5_depth2(ctx: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for s in ["pi/6", "pi/5", "pi/4", "pi/3", "1.2"] {
        let phi = Phi::parse(ctx, s).map_err(e)?;
        let v = OmegaEngine::new(ctx, &phi).eval_route_b(&[2, 1], Endpoint::One).map_err(e)?;
        let want = (&ctx.pi().mul_int(2) * &phi.sin().ln().map_err(e)?).mul_i();
        ensure(v.overlaps(&want), format!("φ = {s}: discs disjoint"))?;
        let r = v.radius() + want.radius();
        ensure(r <= 1e-25, format!("φ = {s}: radii {r:.1e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("5 angles, summed radii ≤ {worst:.1e}"))
}

fn c6_first_order(ctx: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for s in ["pi/6", "pi/5", "pi/4", "pi/3", "1.2"] {
        let phi = Phi::parse(ctx, s).map_err(e)?;
        let series = ParamSeries::compute(ctx, &phi, Mode::General, 1).map_err(e)?;
        let (sn, cs) = (phi.sin(), phi.cos());
        let theta1 = (&phi.value().mul_int(2).sin() * &sn.try_div(&cs).map_err(e)?.ln().map_err(e)?).mul_int(2);
        let w1 = -(&(&cs.square() * &cs.ln().map_err(e)?) + &(&sn.square() * &sn.ln().map_err(e)?)).mul_int(2);
        let got_w1 = series.area_coefficients(1).map_err(e)?.c[1].clone();
        let d = series.theta(1).dist_up(&theta1).max(got_w1.dist_up(&w1));
        ensure(d <= 1e-25, format!("φ = {s}: off by {d:.1e}"))?;
        worst = worst.max(d);
        if phi.is_quarter() {
            ensure(got_w1.dist_up(&ctx.ln2()) <= 1e-25, "𝒲₁(π/4) ≠ log 2")?;
        }
    }
    Ok(format!("θ′(0,φ) and 𝒲₁ at 5 angles, |Δ| ≤ {worst:.1e}"))
}

/// Order-3 Willmore and mean-curvature coefficients from Ω-values at endpoints 1 and i.
fn order3_formulas(ctx: &Ctx, phi: &Phi) -> Result<(CC, CC), String> {
    let eng = OmegaEngine::new(ctx, phi);
    let o1 = |w: &[u8]| eng.eval(w, Endpoint::One).map_err(e);
    let oi = |w: &[u8]| eng.eval(w, Endpoint::I).map_err(e);
    let (a, b) = (o1(&[2, 1])?, oi(&[3, 1])?);
    let (o333, o311, o223) = (o1(&[3, 3, 3])?, o1(&[3, 1, 1])?, o1(&[2, 2, 3])?);
    let (o211, o332, o222) = (oi(&[2, 1, 1])?, oi(&[3, 3, 2])?, oi(&[2, 2, 2])?);
    let (o2133, o3123, o3321, o2221, o2111) =
        (o1(&[2, 1, 3, 3])?, o1(&[3, 1, 2, 3])?, o1(&[3, 3, 2, 1])?, o1(&[2, 2, 2, 1])?, o1(&[2, 1, 1, 1])?);
    let (o2132, o2231, o3122, o3331, o3111) =
        (oi(&[2, 1, 3, 2])?, oi(&[2, 2, 3, 1])?, oi(&[3, 1, 2, 2])?, oi(&[3, 3, 3, 1])?, oi(&[3, 1, 1, 1])?);

    let x = phi.value();
    let (s, c) = (phi.sin(), phi.cos());
    let cos_k = |k: i64| x.mul_int(k).cos();
    let sin_k = |k: i64| x.mul_int(k).sin();
    let one = ctx.one();
    let pi = ctx.pi();
    let (pi2, pi3) = (pi.square(), pi.powi(3));
    let i = ctx.i();
    let q = |num: &CC, den: &CC| num.try_div(den).map_err(e);
    let sum = |v: &[CC]| v.iter().fold(ctx.zero(), |acc, t| &acc + t);

    let s2 = s.square();
    let c2 = c.square();
    let s4 = s2.square();
    let c4 = c2.square();
    let sin2sq = sin_k(2).square();

    let w_terms = vec![
        -(&(&q(&i, &pi3)? * &(&s4 * &(&cos_k(2).mul_int(2) + &one))) * &a.powi(3)),
        &(&q(&i, &pi3.mul_int(2))? * &(&s2 * &(&(&cos_k(2).mul_int(3) + &cos_k(4).mul_int(3)) + &ctx.int(4))))
            * &(&a.square() * &b),
        -(&(&q(&i, &pi3)? * &(&c4 * &(&cos_k(2).mul_int(2) - &one))) * &b.powi(3)),
        -(&(&q(&i, &pi3.mul_int(2))? * &(&c2 * &(&(&cos_k(4).mul_int(3) - &cos_k(2).mul_int(3)) + &ctx.int(4))))
            * &(&a * &b.square())),
        -(&(&q(&sin2sq, &pi2.mul_int(4))? * &a) * &sum(&[o333.mul_int(3), o211.mul_int(-2), o332.mul_int(2)])),
        -(&(&q(&sin2sq, &pi2.mul_int(4))? * &b) * &sum(&[o222.mul_int(3), o311.mul_int(-2), o223.mul_int(2)])),
        &(&q(&(&s2 * &(&cos_k(2) - &ctx.int(2))), &pi2)? * &a) * &o311,
        -(&(&q(&s4, &pi2)? * &a) * &o223),
        -(&(&q(&(&c2 * &(&cos_k(2) + &ctx.int(2))), &pi2)? * &b) * &o211),
        -(&(&q(&c4, &pi2)? * &b) * &o332),
        &q(&(&i * &sin2sq), &pi.mul_int(4))? * &sum(&[o2133.clone(), -&o3123, o3321.clone(), o2132.clone(), -&o2231, -&o3122]),
        &q(&(&i * &s4), &pi)? * &o2221,
        &q(&(&i * &s2).mul_int(3), &pi)? * &o2111,
        -(&q(&(&i * &c4), &pi)? * &o3331),
        -(&q(&(&i * &c2).mul_int(3), &pi)? * &o3111),
    ];

    let s3 = &s2 * &s;
    let c3 = &c2 * &c;
    let h_terms = vec![
        -(&q(&(&i * &(&s2 * &sin_k(4))).mul_int(2), &pi3)? * &a.powi(3)),
        &q(&(&i * &(&(&s * &(&cos_k(2).mul_int(3) - &ctx.int(2))) * &c3)).mul_int(8), &pi3)? * &(&a * &b.square()),
        &q(&(&i * &(&c2 * &sin_k(4))).mul_int(2), &pi3)? * &b.powi(3),
        -(&q(&(&i * &(&(&s3 * &(&ctx.int(2) + &cos_k(2).mul_int(3))) * &c)).mul_int(8), &pi3)? * &(&a.square() * &b)),
        &q(&(&s * &c3).mul_int(4), &pi2)?
            * &sum(&[(&b * &o311).mul_int(2), (&b * &o223).mul_int(-2), &b * &o332, (&a * &o333).mul_int(-3)]),
        &q(&(&s3 * &c).mul_int(4), &pi2)?
            * &sum(&[(&a * &o332).mul_int(2), (&a * &o211).mul_int(-2), -(&a * &o223), (&b * &o222).mul_int(3)]),
        &q(&sin_k(4), &pi2)? * &(&(&b * &o211) + &(&a * &o311)),
        &q(&(&i * &sin_k(2)).mul_int(2), &pi)? * &(&o2111 + &o3111),
        &q(&(&i * &(&s * &c3)).mul_int(4), &pi)? * &sum(&[o2133, -&o3123, o3321, o3331]),
        &q(&(&i * &(&s3 * &c)).mul_int(4), &pi)? * &sum(&[-&o2132, o2221, o2231, o3122]),
    ];
    Ok((sum(&w_terms), sum(&h_terms)))
}

fn c7_order3(ctx: &Ctx) -> Outcome {
    let phi = Phi::pi_frac(ctx, 1, 3).map_err(e)?;
    let series = ParamSeries::compute(ctx, &phi, Mode::General, 3).map_err(e)?;
    let (w, h) = series.willmore_mean_curvature_coefficients(3).map_err(e)?;
    let (w3, h3) = order3_formulas(ctx, &phi)?;
    let dw = w.c[3].dist_up(&w3);
    let dh = h.c[3].dist_up(&h3);
    ensure(dw <= 1e-20 && dh <= 1e-20, format!("|Δ𝒲₃| ≤ {dw:.1e}, |ΔH₃| ≤ {dh:.1e}"))?;
    Ok(format!("𝒲₃ = {:.12}, H₃ = {:.12}, |Δ| ≤ {:.1e}", w3.re_f64(), h3.re_f64(), dw.max(dh)))
}

fn n8_cauchy() -> Result<(TailConfig, f64), String> {
    let setup = IftSetup::shared(8, 7, true).map_err(e)?;
    let c = setup.genus_bound(&IFT_N8_QUADRATIC).map_err(e)?;
    ensure(c.feasible && c.certified, "stored n = 8 point is not certified feasible")?;
    Ok((setup.cauchy_config(&IFT_N8_QUADRATIC, &c).map_err(e)?, c.genus))
}

fn c8_area(ctx: &Ctx, alphas: &ScalarSeries, ext: Option<&TailConfig>) -> Outcome {
    let a21 = area::extend_with_published(ctx, alphas, 21).map_err(e)?;
    // Synthetic tail constants for the property check on the error column.
    let synthetic = TailConfig::new(0.05, 0.13, 7).map_err(e)?;
    let rows = area::area_table(ctx, &a21, 3, 10, Some(ext.unwrap_or(&synthetic))).map_err(e)?;
    for (row, (g, want, _)) in rows.iter().zip(AREAS) {
        let got = fixed(&row.approx, 10);
        ensure(got == want, format!("g = {g}: {got} ≠ {want}"))?;
    }
    let errs: Vec<f64> = rows.iter().map(|r| r.error_bound.unwrap_or(f64::NAN)).collect();
    ensure(errs.iter().all(|&x| x > 0.0), "error bound not positive")?;
    ensure(errs.windows(2).all(|w| w[1] < w[0]), "error bound not strictly decreasing")?;
    let Some(_) = ext else {
        return Ok("10 digits for g = 3..10; error column positive and decreasing (synthetic T′, C_A)".into());
    };
    let mut worst: f64 = 1.0;
    for (x, (g, _, printed)) in errs.iter().zip(AREAS) {
        let r = x / printed;
        ensure((0.5..=2.0).contains(&r), format!("g = {g}: bound {x:.3e} vs printed {printed:.3e}"))?;
        worst = worst.max(r.max(1.0 / r));
    }
    Ok(format!("10 digits for g = 3..10; error column within factor {worst:.2} of the printed bounds"))
}

fn c9_monotonicity(alphas: &ScalarSeries, ext: Option<&TailConfig>) -> Outcome {
    let t2 = 1.0 / 20.0;
    // Formula check on synthetic constants against a direct evaluation.
    let cfg = TailConfig::new(0.05, 0.13, 7).map_err(e)?;
    let m = area::monotonicity_certificate(alphas, &cfg, t2).map_err(e)?;
    let a1 = alphas.c[1].re_f64();
    let a7 = alphas.c[7].re_f64().abs();
    let direct = -a1 + 7.0 * a7 * t2.powi(6) + 8.0 * cfg.c_a * t2.powi(7) / (cfg.t_prime - t2).powi(8);
    ensure(m.bound >= direct && m.bound - direct < 1e-12, format!("bound {} vs direct {direct}", m.bound))?;
    ensure(m.holds == (m.bound < 0.0), "holds flag inconsistent")?;
    let bad = TailConfig::new(10.0, 0.06, 7).map_err(e)?;
    let mb = area::monotonicity_certificate(alphas, &bad, t2).map_err(e)?;
    ensure(!mb.holds, "certificate holds with a tail that dominates")?;
    let Some(cfg) = ext else {
        return Ok(format!("formula check: {:.6} vs direct {direct:.6}", m.bound));
    };
    let m = area::monotonicity_certificate(alphas, cfg, t2).map_err(e)?;
    ensure(m.holds && m.bound <= -0.6, format!("bound {:.6}", m.bound))?;
    Ok(format!("A′(s) ≤ {:.6} on (0, 1/20)", m.bound))
}

fn c10_genus2() -> Outcome {
    let t0 = Instant::now();
    let b = genus2::bound_certified(&TriangulationParams::PUBLISHED, 30).map_err(e)?;
    ensure(b.hi() <= 22.45 + 1e-2, format!("published parameters give {:.6}", b.hi()))?;
    let r = genus2::optimize_bound(&TriangulationParams::center(), &OptimizeOptions::default()).map_err(e)?;
    ensure(r.certified_upper <= 22.57, format!("optimizer reached {:.6}", r.certified_upper))?;
    let dt = t0.elapsed();
    ensure(dt <= Duration::from_secs(60), format!("{dt:?}"))?;
    Ok(format!("published {:.6}, optimized {:.6}, {:.1?}", b.hi(), r.certified_upper, dt))
}

fn c11_ift(n8_genus: Option<f64>) -> Outcome {
    let t0 = Instant::now();
    let setup = IftSetup::shared(1, 0, false).map_err(e)?;
    let (p, c) = setup.optimize_genus(&IftOptions::default()).map_err(e)?;
    let dt = t0.elapsed();
    ensure(c.feasible && c.certified, "n = 1 optimum not certified feasible")?;
    let rel = (c.genus / 94.697 - 1.0).abs();
    ensure(rel < 0.05, format!("n = 1 genus {:.4}", c.genus))?;
    ensure(dt <= Duration::from_secs(600), format!("{dt:?}"))?;
    let recheck = setup.genus_bound(&p).map_err(e)?;
    ensure(recheck.feasible && recheck.genus == c.genus, "re-evaluation differs")?;
    let mut msg = format!("n = 1 genus {:.4} in {:.1?}", c.genus, dt);
    if let Some(g8) = n8_genus {
        let s6 = IftSetup::shared(6, 0, false).map_err(e)?;
        let (_, c6) = s6.optimize_genus(&IftOptions::default()).map_err(e)?;
        ensure(c6.feasible && (c6.genus / 6.86426 - 1.0).abs() < 0.1, format!("n = 6 genus {:.5}", c6.genus))?;
        ensure((g8 / 2.65404 - 1.0).abs() < 0.1, format!("n = 8 quadratic genus {g8:.5}"))?;
        msg += &format!("; n = 6 genus {:.5}; n = 8 quadratic genus {g8:.5}", c6.genus);
    }
    Ok(msg)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_point(ctx: &Ctx, r: &mut ChaCha8Rng, radius: f64) -> CC {
    let (m, a) = (radius * r.gen::<f64>().sqrt(), r.gen_range(0.0..2.0 * PI));
    ctx.complex_f64(m * a.cos(), m * a.sin())
}

fn mpl_oracle(ctx: &Ctx) -> Result<usize, String> {
    let mut r = rng(1);
    for case in 0..200 {
        let d = r.gen_range(1..=3);
        let a: Vec<u32> = (0..d).map(|_| r.gen_range(1..=3)).collect();
        let x: Vec<CC> = (0..d).map(|_| random_point(ctx, &mut r, 0.95)).collect();
        let n = r.gen_range(1..=50);
        let args = MplArgs::new(a.clone(), x).map_err(e)?;
        let fast = truncated_mpl(&args, n);
        let slow = naive_truncated_mpl(&args, n, ctx);
        ensure(fast.overlaps(&slow), format!("case {case}: a = {a:?}, N = {n}"))?;
    }
    Ok(200)
}

fn wiener_oracle(ctx: &Ctx) -> Result<usize, String> {
    let mut r = rng(2);
    for case in 0..1000 {
        let deg = r.gen_range(0..=8);
        let u = LaurentPoly::from_coeffs(ctx, 0, (0..=deg).map(|_| random_point(ctx, &mut r, 2.0)).collect());
        let roots: Vec<CC> = (0..r.gen_range(1..=3)).map(|_| random_point(ctx, &mut r, 1.5)).collect();
        let (q, rem) = u.divide_by_roots(&roots).map_err(e)?;
        ensure(rem.is_zero() || rem.max_deg() < roots.len() as i32, format!("case {case}: remainder degree"))?;
        let mut back = q;
        for mu in &roots {
            back = &back * &LaurentPoly::from_terms(ctx, [(1, ctx.one()), (0, -mu)]);
        }
        let diff = &(&back + &rem) - &u;
        for k in 0..=deg.max(diff.max_deg().max(0)) {
            let c = diff.coeff(k);
            ensure(c.contains_zero() && c.radius() < 1e-20, format!("case {case}: coefficient {k}"))?;
        }
    }
    Ok(1000)
}

fn dist_to_segment(y: &CC, p: &CC, q: &CC) -> f64 {
    let (yx, yy) = (y.re_f64(), y.im_f64());
    let (px, py, qx, qy) = (p.re_f64(), p.im_f64(), q.re_f64(), q.im_f64());
    let (dx, dy) = (qx - px, qy - py);
    let t = (((yx - px) * dx + (yy - py) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((yx - px - t * dx).powi(2) + (yy - py - t * dy).powi(2)).sqrt()
}

fn subdivision_oracle(ctx: &Ctx) -> Result<usize, String> {
    let mut r = rng(3);
    let mut done = 0;
    while done < 50 {
        let (p, q) = (random_point(ctx, &mut r, 1.0), random_point(ctx, &mut r, 1.0));
        if p.dist_up(&q) < 0.3 {
            continue;
        }
        let alphabet: Vec<CC> = (0..r.gen_range(1..=3)).map(|_| random_point(ctx, &mut r, 2.0)).collect();
        if alphabet.iter().any(|y| dist_to_segment(y, &p, &q) < 0.2) {
            continue;
        }
        let len = r.gen_range(1..=3);
        let word: Vec<CC> = (0..len).map(|_| alphabet[r.gen_range(0..alphabet.len())].clone()).collect();
        let mut fr: Vec<f64> = (0..r.gen_range(1..=3)).map(|_| r.gen_range(0.1..0.9)).collect();
        fr.sort_by(f64::total_cmp);
        let mut path = vec![p.clone()];
        path.extend(fr.iter().map(|&f| &p + &(&q - &p).mul_f64(f)));
        path.push(q.clone());
        let straight = evaluate_iterated_integral(&IteratedWord::straight(word.clone(), p.clone(), q.clone()), OMEGA_ALPHA_MAX, ctx)
            .map_err(e)?;
        let split = evaluate_iterated_integral(&IteratedWord { poles: word.clone(), path }, OMEGA_ALPHA_MAX, ctx).map_err(e)?;
        ensure(straight.overlaps(&split), format!("case {done}: subdivision changes the value"))?;
        ensure(straight.radius() < 1e-25, format!("case {done}: radius {:.1e}", straight.radius()))?;
        if len == 1 {
            let log = (&q - &word[0]).try_div(&(&p - &word[0])).map_err(e)?.ln().map_err(e)?;
            ensure(straight.overlaps(&log), format!("case {done}: single letter ≠ log"))?;
        }
        done += 1;
    }
    Ok(50)
}

fn zeta(ctx: &Ctx, s: &str) -> Result<CC, String> {
    let idx: MzvIndex = s.parse().map_err(e)?;
    alternating_mzv(&idx, ctx).map_err(e)
}

/// Stuffle and shuffle products; indices are written innermost (smallest summation variable) first.
fn product_identities(ctx: &Ctx) -> Result<usize, String> {
    let z = |s: &str| zeta(ctx, s);
    let stuffle = [
        ("-1", "-1", vec![(2, "-1,-1"), (1, "2")]),
        ("2", "-1", vec![(1, "2,-1"), (1, "-1,2"), (1, "-3")]),
        ("-2", "-1", vec![(1, "-2,-1"), (1, "-1,-2"), (1, "3")]),
        ("2", "2", vec![(2, "2,2"), (1, "4")]),
        ("2", "3", vec![(1, "2,3"), (1, "3,2"), (1, "5")]),
        ("-1,-1", "-1", vec![(3, "-1,-1,-1"), (1, "2,-1"), (1, "-1,2")]),
    ];
    let mut count = 0;
    for (a, b, rhs) in stuffle {
        let lhs = &z(a)? * &z(b)?;
        let mut acc = ctx.zero();
        for (m, s) in rhs {
            acc = &acc + &z(s)?.mul_int(m);
        }
        ensure(lhs.overlaps(&acc), format!("stuffle ζ({a})·ζ({b})"))?;
        count += 1;
    }
    let shuffle = [
        ("2", "2", vec![(2, "2,2"), (4, "1,3")]),
        ("2", "3", vec![(1, "3,2"), (3, "2,3"), (6, "1,4")]),
    ];
    for (a, b, rhs) in shuffle {
        let lhs = &z(a)? * &z(b)?;
        let mut acc = ctx.zero();
        for (m, s) in rhs {
            acc = &acc + &z(s)?.mul_int(m);
        }
        ensure(lhs.overlaps(&acc), format!("shuffle ζ({a})·ζ({b})"))?;
        count += 1;
    }
    ensure(z("1,2")?.overlaps(&z("3")?), "ζ(2,1) ≠ ζ(3)")?;
    Ok(count + 1)
}

fn c12_oracles(ctx: &Ctx) -> Outcome {
    let a = mpl_oracle(ctx)?;
    let b = wiener_oracle(ctx)?;
    let c = subdivision_oracle(ctx)?;
    let d = product_identities(ctx)?;
    Ok(format!("MPL {a}, division {b}, subdivision {c}, product identities {d}"))
}

fn main() {
    let ext = extended();
    let ctx50 = Ctx::new(50).expect("context");
    let ctx40 = Ctx::new(40).expect("context");
    let ctx30 = Ctx::new(30).expect("context");
    let alphas = alphas_order11(&ctx50);
    let n8 = if ext { Some(n8_cauchy()) } else { None };
    let n8_cfg = match &n8 {
        Some(Ok((cfg, _))) => Some(*cfg),
        _ => None,
    };
    let n8_genus = match &n8 {
        Some(Ok((_, g))) => Some(*g),
        _ => None,
    };
    let with_alphas = |f: &dyn Fn(&ScalarSeries) -> Outcome| match &alphas {
        Ok(a) => f(a),
        Err(m) => Err(format!("α series: {m}")),
    };
    let ext_err = |r: Outcome| match &n8 {
        Some(Err(m)) => Err(format!("extended constants: {m}")),
        _ => r,
    };

    let results: Vec<(&str, Outcome)> = vec![
        ("α-coefficients to order 11", with_alphas(&|a| c1_alphas(&ctx50, a))),
        ("exact α₃ = 9/4 ζ(3)", c2_exact()),
        ("even-order vanishing", with_alphas(&c3_even)),
        ("MZV and Ω closed forms", c4_tables(&ctx50)),
        ("Ω₂,₁(1) at general φ", c5_depth2(&ctx50)),
        ("first-order geometry", c6_first_order(&ctx50)),
        ("order-3 coefficients at π/3", c7_order3(&ctx40)),
        ("area table", ext_err(with_alphas(&|a| c8_area(&ctx50, a, n8_cfg.as_ref())))),
        ("monotonicity certificate", ext_err(with_alphas(&|a| c9_monotonicity(a, n8_cfg.as_ref())))),
        ("genus-2 bound", c10_genus2()),
        ("IFT genus bounds", ext_err(c11_ift(n8_genus))),
        ("oracle suites", c12_oracles(&ctx30)),
    ];

    let mut failed = 0;
    for (k, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg}", k + 1);
            }
        }
    }
    println!("{} passed, {failed} failed{}", results.len() - failed, if ext { " (extended)" } else { "" });
    if failed > 0 {
        std::process::exit(1);
    }
}
