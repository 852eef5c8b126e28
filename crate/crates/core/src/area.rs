//! Area tables for Lawson surfaces ξ_{1,g}, tail bounds and the monotonicity certificate.

use serde::Serialize;

use crate::cdisc::{up, CertifiedComplex, Ctx};
use crate::error::{Error, Result};
use crate::series::{ScalarSeries, Var};

type CC = CertifiedComplex;

/// Published area coefficients beyond order 11, as (k, decimal value).
pub const PUBLISHED_HIGH_ALPHAS: [(usize, &str); 5] = [
    (13, "26311.75666632241667824049728000376568318761694887921531627959"),
    (15, "219897.7526067197482348266274038050133501624360107896585815548"),
    (17, "-204390.987496916879876223326569020676825058179523091704555104"),
    (19, "-19346782.5372543220622302604976526258798242712500787552866514"),
    (21, "-148960589.720279268862574700035701683223669243796252922710520"),
];

/// Constants of the Cauchy estimate `|α_k| ≤ C_A / T'^k` for `k > N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailConfig {
    pub c_a: f64,
    pub t_prime: f64,
    pub n_derivatives: usize,
}

impl TailConfig {
    pub fn new(c_a: f64, t_prime: f64, n_derivatives: usize) -> Result<Self> {
        if !(c_a > 0.0 && t_prime > 0.0) || !c_a.is_finite() || !t_prime.is_finite() {
            return Err(Error::DomainError(format!("need C_A > 0 and T' > 0, got {c_a}, {t_prime}")));
        }
        Ok(TailConfig { c_a, t_prime, n_derivatives })
    }
}

#[derive(Clone, Debug)]
pub struct AreaRow {
    pub genus: u32,
    pub approx: CC,
    pub error_bound: Option<f64>,
    pub k_used: usize,
}

/// `s = 1/(2g+2)`.
pub fn s_of_genus(ctx: &Ctx, g: u32) -> CC {
    ctx.ratio(1, 2 * g as i64 + 2)
}

fn s_f64_up(g: u32) -> f64 {
    up::div(1.0, (2 * g + 2) as f64)
}

/// Appends the published coefficients of orders 13..=21 (even orders zero) to `alphas`.
/// Orders already present are kept.
pub fn extend_with_published(ctx: &Ctx, alphas: &ScalarSeries, order: usize) -> Result<ScalarSeries> {
    let mut c = alphas.c.clone();
    while c.len() <= order {
        let k = c.len();
        let v = match PUBLISHED_HIGH_ALPHAS.iter().find(|(j, _)| *j == k) {
            Some((_, s)) => ctx.parse_real(s)?.inflate(1e-50),
            None if k % 2 == 0 => ctx.zero(),
            None => return Err(Error::MissingLowerOrder(k)),
        };
        c.push(v);
    }
    c.truncate(order + 1);
    Ok(ScalarSeries::new(Var::S, c))
}

/// `8π(1 − Σ_{1≤k≤K} α_k s^k)` with `s = 1/(2g+2)`, `K = alphas.order()`.
pub fn area_approx(ctx: &Ctx, g: u32, alphas: &ScalarSeries) -> CC {
    let s = s_of_genus(ctx, g);
    let mut acc = ctx.zero();
    for a in alphas.c.iter().skip(1).rev() {
        acc = &(&acc + a) * &s;
    }
    let eight_pi = ctx.pi().mul_int(8);
    (&eight_pi * &(&ctx.one() - &acc)).real_part()
}

/// First odd index beyond `k`; even orders vanish.
fn first_tail_index(k: usize) -> i32 {
    if k % 2 == 0 { k as i32 + 1 } else { k as i32 + 2 }
}

/// `8π C_A r^{k₀} / (1 − r²)` with `r = s/T'` and `k₀` the first odd order above `k`.
pub fn area_error_bound(g: u32, k: usize, cfg: &TailConfig) -> Result<f64> {
    let s = s_f64_up(g);
    if !(s < cfg.t_prime) {
        return Err(Error::SOutsideRadius { s, tprime: cfg.t_prime });
    }
    let r = up::div(s, cfg.t_prime.next_down());
    if !(r < 1.0) {
        return Err(Error::SOutsideRadius { s, tprime: cfg.t_prime });
    }
    let eight_pi = up::mul(8.0, std::f64::consts::PI.next_up());
    let num = up::mul(up::mul(eight_pi, cfg.c_a), up::powi(r, first_tail_index(k)));
    Ok(up::div(num, up::sub_down(1.0, up::mul(r, r))))
}

/// Rows for `gmin..=gmax`. Error bounds are filled only when a tail configuration is given.
pub fn area_table(ctx: &Ctx, alphas: &ScalarSeries, gmin: u32, gmax: u32, cfg: Option<&TailConfig>) -> Result<Vec<AreaRow>> {
    if gmin < 1 || gmin > gmax {
        return Err(Error::DomainError(format!("bad genus range {gmin}..{gmax}")));
    }
    let k = alphas.order();
    (gmin..=gmax)
        .map(|g| {
            Ok(AreaRow {
                genus: g,
                approx: area_approx(ctx, g, alphas),
                error_bound: cfg.map(|c| area_error_bound(g, k, c)).transpose()?,
                k_used: k,
            })
        })
        .collect()
}

/// Approximation with `digits` significant digits; the error column as `{:.7e}` or empty.
pub fn to_csv(rows: &[AreaRow], digits: usize) -> String {
    let mut out = String::from("genus,approx,error_bound,K\n");
    for r in rows {
        let e = r.error_bound.map(|e| format!("{e:.7e}")).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", r.genus, fixed(&r.approx, digits), e, r.k_used));
    }
    out
}

/// Decimal string rounded to `digits` significant digits.
pub fn fixed(x: &CC, digits: usize) -> String {
    let (neg, body, exp) = x.re().to_sign_string_exp(10, Some(digits));
    let exp = exp.unwrap_or(0);
    let s = if exp <= 0 {
        format!("0.{}{}", "0".repeat(exp.unsigned_abs() as usize), body)
    } else {
        let e = exp as usize;
        let padded = format!("{body:0<e$}");
        let (a, b) = padded.split_at(e);
        if b.is_empty() { a.to_string() } else { format!("{a}.{b}") }
    };
    if neg { format!("-{s}") } else { s }
}

/// Result of the monotonicity check for large genus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Monotonicity {
    pub bound: f64,
    pub holds: bool,
}

/// Upper bound of `𝒜'(s)` on `(0, T'')`:
/// `−α₁ + 7|α₇|T''⁶ + 8 C_A T''⁷/(T' − T'')⁸`, valid when α₃, α₅ ≥ 0.
pub fn monotonicity_certificate(alphas: &ScalarSeries, cfg: &TailConfig, t2: f64) -> Result<Monotonicity> {
    if alphas.order() < 7 {
        return Err(Error::MissingLowerOrder(7));
    }
    if !(t2 > 0.0 && t2 < cfg.t_prime) {
        return Err(Error::SOutsideRadius { s: t2, tprime: cfg.t_prime });
    }
    for k in [3, 5] {
        let (lo, _) = alphas.c[k].real_part().disc_abs_interval();
        let positive = alphas.c[k].re().is_sign_positive() && lo > 0.0;
        if !positive {
            return Err(Error::DomainError(format!("α_{k} is not certified positive")));
        }
    }
    let a1_lo = {
        let a = alphas.c[1].real_part();
        let (lo, _) = a.disc_abs_interval();
        if a.re().is_sign_negative() { -a.disc_abs_interval().1 } else { lo }
    };
    let a7 = alphas.c[7].disc_abs_interval().1;
    let t7 = up::mul(7.0, up::mul(a7, up::powi(t2, 6)));
    let gap = up::sub_down(cfg.t_prime, t2);
    let rem = up::div(up::mul(8.0, up::mul(cfg.c_a, up::powi(t2, 7))), up::powi_down(gap, 8));
    let bound = up::add(up::add(-a1_lo, t7), rem);
    Ok(Monotonicity { bound, holds: bound < 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_vanishes_for_small_s() {
        let cfg = TailConfig::new(1.0, 0.2, 7).unwrap();
        let b3 = area_error_bound(3, 21, &cfg).unwrap();
        let b100 = area_error_bound(100, 21, &cfg).unwrap();
        assert!(b3 > b100 && b100 < 1e-30);
        assert!(matches!(area_error_bound(1, 21, &cfg), Err(Error::SOutsideRadius { .. })));
    }

    #[test]
    fn fixed_rounds_to_significant_digits() {
        let ctx = Ctx::new(30).unwrap();
        let x = ctx.parse_real("22.820277094").unwrap();
        assert_eq!(fixed(&x, 10), "22.82027709");
        let y = ctx.parse_real("0.0012345678").unwrap();
        assert_eq!(fixed(&y, 3), "0.00123");
    }
}
