//! Golden-value regression suite behind `lawson selftest`.

use std::f64::consts::PI;

use lawson_core::area::{self, fixed};
use lawson_core::genus2::{self, TriangulationParams};
use lawson_core::ift::{IftParams, IftSetup};
use lawson_core::mpl::alternating_mzv;
use lawson_core::mzv_symbolic::{alpha3_exact, closed_form, mono, omega_closed_form, table_indices};
use lawson_core::omega::{Endpoint, OmegaEngine, Phi};
use lawson_core::series::{Mode, ParamSeries};
use lawson_core::{CertifiedComplex, Ctx, Result};
use serde::Serialize;

/// Printed area coefficients α₁, α₃, …, α₁₁.
pub const ALPHAS: [(usize, &str); 6] = [
    (1, "0.693147180559945309417232121458176568075500134360255254120680"),
    (3, "2.704628032109087142149410863400762479221219157766122484032610"),
    (5, "3.699626994497618439893380135471044617736329548309105157162310"),
    (7, "-53.1688000602634657601186493744463143722221041377109549606883"),
    (9, "-459.565676371488633633252895256096561995526272030689845199417"),
    (11, "-260.931729774858246058852756835445016841900749580577223718493"),
];

/// Approximate areas of ξ_{1,g}, g = 3..=10, to ten significant digits.
pub const AREAS: [(u32, &str); 8] = [
    (3, "22.82027709"),
    (4, "23.32191299"),
    (5, "23.64134581"),
    (6, "23.86347454"),
    (7, "24.02726927"),
    (8, "24.15322275"),
    (9, "24.25318196"),
    (10, "24.33449044"),
];

/// Ω-words (endpoint 1) appearing up to depth 4.
pub const OMEGA_WORDS: [&[u8]; 10] = [
    &[3],
    &[2, 1],
    &[2, 2, 3],
    &[3, 1, 1],
    &[3, 3, 3],
    &[2, 1, 1, 1],
    &[2, 2, 2, 1],
    &[2, 1, 3, 3],
    &[3, 1, 2, 3],
    &[3, 3, 2, 1],
];

/// A certified-feasible point of the n = 1 contraction problem.
pub const IFT_N1: IftParams = IftParams {
    n: 1,
    derivs: 0,
    quadratic: false,
    t: 0.00604593,
    r: [0.23885850064949196, 0.15069007814231739, 0.05138284213554746],
    varrho: [1.0, 0.4241609261483111, 0.12098375449542532],
    rho: 1.8538655565922588,
    kappa: 0.99999,
};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into() }
}

fn failed(name: impl Into<String>, e: impl std::fmt::Display) -> Check {
    check(name, false, format!("error: {e}"))
}

/// `|a − b| ≤ tol` over both discs.
fn close(a: &CertifiedComplex, b: &CertifiedComplex, tol: f64) -> (bool, String) {
    let d = a.dist_up(b);
    (d <= tol, format!("|Δ| ≤ {d:.2e}"))
}

/// Runs every check; `quick` limits the series to order 7 and skips the area rows.
pub fn run(ctx: &Ctx, quick: bool) -> Vec<Check> {
    let mut out = Vec::new();
    alpha_checks(ctx, quick, &mut out);
    match alpha3_exact() {
        Ok(a3) => out.push(check("alpha3 exact", a3 == mono(9, 4, 0, 0, 1), format!("{a3}"))),
        Err(e) => out.push(failed("alpha3 exact", e)),
    }
    for idx in table_indices() {
        let name = format!("mzv {idx}");
        let r = (|| -> Result<Check> {
            let num = alternating_mzv(&idx, ctx)?;
            let (ok, d) = close(&num, &closed_form(&idx)?.numeric(ctx)?, 1e-30);
            Ok(check(&name, ok, d))
        })();
        out.push(r.unwrap_or_else(|e| failed(&name, e)));
    }
    let quarter = Phi::quarter(ctx);
    let engine = OmegaEngine::shared(ctx, &quarter);
    for w in OMEGA_WORDS {
        let name = format!("omega {}", w.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","));
        let r = (|| -> Result<Check> {
            let v = engine.eval(w, Endpoint::One)?;
            let (ok, d) = close(&v, &omega_closed_form(w)?.numeric(ctx)?, 1e-30);
            Ok(check(&name, ok, d))
        })();
        out.push(r.unwrap_or_else(|e| failed(&name, e)));
    }
    for phi in ["pi/6", "pi/3"] {
        let name = format!("omega 2,1 phi={phi}");
        let r = (|| -> Result<Check> {
            let p = Phi::parse(ctx, phi)?;
            let v = OmegaEngine::new(ctx, &p).eval_route_b(&[2, 1], Endpoint::One)?;
            let want = (&ctx.pi().mul_int(2) * &p.sin().ln()?).mul_i();
            let (ok, d) = close(&v, &want, 1e-25);
            Ok(check(&name, ok, d))
        })();
        out.push(r.unwrap_or_else(|e| failed(&name, e)));
    }
    match genus2::bound_certified(&TriangulationParams::PUBLISHED, 30) {
        Ok(b) => {
            let hi = lawson_core::real::Real::hi(&b);
            out.push(check("genus2 published params", hi <= 22.45 + 1e-2, format!("bound ≤ {hi:.6}")));
        }
        Err(e) => out.push(failed("genus2 published params", e)),
    }
    let r = (|| -> Result<Check> {
        let c = IftSetup::shared(1, 0, false)?.genus_bound(&IFT_N1)?;
        let ok = c.feasible && (c.genus / 94.697 - 1.0).abs() < 0.05;
        Ok(check("ift n=1", ok, format!("genus ≤ {:.4}, feasible = {}", c.genus, c.feasible)))
    })();
    out.push(r.unwrap_or_else(|e| failed("ift n=1", e)));
    out
}

fn alpha_checks(ctx: &Ctx, quick: bool, out: &mut Vec<Check>) {
    let order = if quick { 7 } else { 11 };
    let alphas = match ParamSeries::compute(ctx, &Phi::quarter(ctx), Mode::Minimal, order).and_then(|s| s.area_coefficients(order)) {
        Ok(a) => a,
        Err(e) => {
            out.push(failed("alpha series", e));
            return;
        }
    };
    for (k, s) in ALPHAS.iter().filter(|(k, _)| *k <= order) {
        let name = format!("alpha {k}");
        match ctx.parse_real(s) {
            Ok(want) => {
                let tol = 1e-30 * want.re_f64().abs().max(1.0);
                let (ok, d) = close(&alphas.c[*k], &want, tol);
                out.push(check(name, ok, d));
            }
            Err(e) => out.push(failed(name, e)),
        }
    }
    for k in (2..=order).step_by(2) {
        let c = &alphas.c[k];
        out.push(check(format!("alpha {k} vanishes"), c.contains_zero() && c.radius() < 1e-25, format!("radius {:.2e}", c.radius())));
    }
    let (ok, d) = close(&alphas.c[1], &ctx.ln2(), 1e-40);
    out.push(check("alpha 1 = log 2", ok, d));
    if quick {
        return;
    }
    let rows = area::extend_with_published(ctx, &alphas, 21).and_then(|a| area::area_table(ctx, &a, 3, 10, None));
    match rows {
        Ok(rows) => {
            for (row, (g, want)) in rows.iter().zip(AREAS) {
                let got = fixed(&row.approx, 10);
                out.push(check(format!("area g={g}"), got == want, got));
            }
        }
        Err(e) => out.push(failed("area table", e)),
    }
    let clifford = area::extend_with_published(ctx, &alphas, 21).map(|a| area::area_approx(ctx, 1, &a).re_f64());
    match clifford {
        Ok(v) => out.push(check("area g=1 near 2π²", (v - 2.0 * PI * PI).abs() < 1e-3, format!("{v:.6}"))),
        Err(e) => out.push(failed("area g=1", e)),
    }
}
