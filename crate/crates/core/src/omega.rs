//! Ω-values: iterated integrals of the forms ω₁, ω₂, ω₃ from 0 to 1 or i.

use std::fmt;
use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::cdisc::{CertifiedComplex, Ctx};
use crate::error::{Error, Result};
use crate::mpl::{alternating_mzv, MzvIndex, PathIntegrator, OMEGA_ALPHA_MAX};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "i")]
    I,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::One => "1",
            Endpoint::I => "i",
        })
    }
}

impl std::str::FromStr for Endpoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Endpoint::One),
            "i" | "I" => Ok(Endpoint::I),
            o => Err(Error::DomainError(format!("endpoint must be 1 or i, got {o:?}"))),
        }
    }
}

/// The angle φ ∈ (0, π/2), remembering an exact rational multiple of π when known.
#[derive(Clone, Debug)]
pub struct Phi {
    val: CertifiedComplex,
    pi_ratio: Option<(i64, i64)>,
    label: String,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Phi {
    /// `φ = π·k/m`.
    pub fn pi_frac(ctx: &Ctx, k: i64, m: i64) -> Result<Self> {
        if m <= 0 || k <= 0 || 2 * k >= m {
            return Err(Error::DomainError(format!("φ = {k}π/{m} is outside (0, π/2)")));
        }
        let g = gcd(k, m);
        let (k, m) = (k / g, m / g);
        let val = ctx.pi().mul_int(k).div_int(m);
        let label = match (k, m) {
            (1, m) => format!("pi/{m}"),
            (k, m) => format!("{k}pi/{m}"),
        };
        Ok(Phi { val, pi_ratio: Some((k, m)), label })
    }

    pub fn quarter(ctx: &Ctx) -> Self {
        Phi::pi_frac(ctx, 1, 4).expect("π/4 is valid")
    }

    pub fn from_disc(val: CertifiedComplex, label: String) -> Result<Self> {
        let v = val.re_f64();
        if !(v > 0.0 && v < std::f64::consts::FRAC_PI_2) || val.im_f64() != 0.0 {
            return Err(Error::DomainError(format!("φ = {label} is outside (0, π/2)")));
        }
        Ok(Phi { val, pi_ratio: None, label })
    }

    /// Accepts `pi/4`, `3pi/8`, `pi*2/5`, or a decimal.
    pub fn parse(ctx: &Ctx, s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        let t = t.replace('π', "pi");
        if let Some(pos) = t.find("pi") {
            let bad = || Error::DomainError(format!("cannot parse angle {s:?}"));
            let pre = t[..pos].trim_end_matches('*');
            let post = &t[pos + 2..];
            let mut k: i64 = if pre.is_empty() { 1 } else { pre.parse().map_err(|_| bad())? };
            let mut post = post;
            if let Some(rest) = post.strip_prefix('*') {
                let end = rest.find('/').unwrap_or(rest.len());
                k *= rest[..end].parse::<i64>().map_err(|_| bad())?;
                post = &rest[end..];
            }
            let m: i64 = match post.strip_prefix('/') {
                Some(d) => d.parse().map_err(|_| bad())?,
                None if post.is_empty() => 1,
                None => return Err(bad()),
            };
            return Phi::pi_frac(ctx, k, m);
        }
        Phi::from_disc(ctx.parse_real(&t)?, t)
    }

    pub fn value(&self) -> &CertifiedComplex {
        &self.val
    }
    pub fn approx(&self) -> f64 {
        self.val.re_f64()
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn pi_ratio(&self) -> Option<(i64, i64)> {
        self.pi_ratio
    }
    pub fn is_quarter(&self) -> bool {
        self.pi_ratio == Some((1, 4))
    }

    /// `π/2 − φ`.
    pub fn complement(&self, ctx: &Ctx) -> Self {
        match self.pi_ratio {
            Some((k, m)) => Phi::pi_frac(ctx, m - 2 * k, 2 * m).expect("complement stays in range"),
            None => {
                let val = &ctx.pi().scale_pow2(-1) - &self.val;
                Phi { val, pi_ratio: None, label: format!("pi/2-({})", self.label) }
            }
        }
    }

    pub fn sin(&self) -> CertifiedComplex {
        self.val.sin()
    }
    pub fn cos(&self) -> CertifiedComplex {
        self.val.cos()
    }
}

/// Vertex reached from `v` along the edge labelled `l` (e₃–e₁: 3, e₁–e₂: 1, e₂–e₃: 2).
pub fn graph_step(v: u8, l: u8) -> Option<u8> {
    match (v, l) {
        (3, 3) => Some(1),
        (1, 3) => Some(3),
        (1, 1) => Some(2),
        (2, 1) => Some(1),
        (2, 2) => Some(3),
        (3, 2) => Some(2),
        _ => None,
    }
}

/// Vertices visited by the walk from e₃; stops at the first letter without an edge.
pub fn walk(word: &[u8]) -> (bool, Vec<u8>) {
    let mut trail = vec![3u8];
    for &l in word {
        match graph_step(*trail.last().unwrap(), l) {
            Some(v) => trail.push(v),
            None => return (false, trail),
        }
    }
    (true, trail)
}

fn target(e: Endpoint) -> u8 {
    match e {
        Endpoint::One => 1,
        Endpoint::I => 2,
    }
}

/// Whether `word` labels a walk from e₃ to the endpoint's target vertex, with the trail.
pub fn is_valid_word(word: &[u8], endpoint: Endpoint) -> (bool, Vec<u8>) {
    let (ok, trail) = walk(word);
    (ok && !word.is_empty() && *trail.last().unwrap() == target(endpoint), trail)
}

fn require_valid(word: &[u8], endpoint: Endpoint) -> Result<Vec<u8>> {
    let (ok, trail) = is_valid_word(word, endpoint);
    if ok {
        Ok(trail)
    } else {
        Err(Error::InvalidWord(word.to_vec()))
    }
}

/// Entry `(row, col)` (1-based) of `M_{i_1}⋯M_{i_n}` divided by `(2i)^n`.
pub fn matrix_entry(word: &[u8], row: usize, col: usize) -> i64 {
    // M_j / (2i)
    const M: [[[i64; 3]; 3]; 3] = [
        [[0, 1, 0], [-1, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
        [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
    ];
    let mut v = [0i64; 3];
    v[row - 1] = 1;
    for &l in word {
        let m = &M[(l - 1) as usize];
        let mut w = [0i64; 3];
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = (0..3).map(|r| v[r] * m[r][k]).sum();
        }
        v = w;
    }
    v[col - 1]
}

pub fn depth1_closed_form(j: u8, endpoint: Endpoint, phi: &Phi, ctx: &Ctx) -> Result<CertifiedComplex> {
    let pi = ctx.pi();
    let f = phi.value();
    let log_ratio = |c: CertifiedComplex| -> Result<CertifiedComplex> {
        let one = ctx.one();
        (&one - &c).try_div(&(&one + &c))?.ln()
    };
    Ok(match (j, endpoint) {
        (1, Endpoint::One) => (&pi - &f.scale_pow2(1)).mul_i(),
        (2, Endpoint::One) => log_ratio(phi.cos())?,
        (3, Endpoint::One) => pi.mul_i(),
        (1, Endpoint::I) => -f.scale_pow2(1).mul_i(),
        (2, Endpoint::I) => -pi.mul_i(),
        (3, Endpoint::I) => log_ratio(phi.sin())?,
        _ => return Err(Error::InvalidWord(vec![j])),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth2 {
    /// Ω₂₁(1) = 2πi log sin φ
    Omega21One,
    /// Ω₃₁(i) = −2πi log cos φ
    Omega31I,
}

pub fn depth2_closed_form(which: Depth2, phi: &Phi, ctx: &Ctx) -> Result<CertifiedComplex> {
    let two_pi_i = ctx.pi().scale_pow2(1).mul_i();
    Ok(match which {
        Depth2::Omega21One => &two_pi_i * &phi.sin().ln()?,
        Depth2::Omega31I => -(&two_pi_i * &phi.cos().ln()?),
    })
}

/// `Ω_w(1)` at φ = π/4 as `sign · iπ · ζ(idx)`.
pub fn omega_to_mzv(word: &[u8]) -> Result<(i8, MzvIndex)> {
    let trail = require_valid(word, Endpoint::One)?;
    let f = |v: u8| -> i8 {
        match v {
            1 => 1,
            2 => -1,
            _ => 0,
        }
    };
    let letters: Vec<i8> = trail[1..trail.len() - 1].iter().map(|&v| f(v)).collect();
    let ones = word.iter().filter(|&&l| l == 1).count();
    let (idx, depth) = integral_word_to_index(&letters)?;
    let sign = if (ones + depth) % 2 == 0 { 1 } else { -1 };
    Ok((sign, idx))
}

/// Inverse of [`MzvIndex::integral_word`]: `∫_0^1 η_{c}… = (−1)^d ζ(idx)`.
pub fn integral_word_to_index(letters: &[i8]) -> Result<(MzvIndex, usize)> {
    let mut groups: Vec<(i8, u32)> = Vec::new();
    for &c in letters {
        if c == 0 {
            match groups.last_mut() {
                Some(g) => g.1 += 1,
                None => return Err(Error::DivergentIndex),
            }
        } else {
            groups.push((c, 1));
        }
    }
    let d = groups.len();
    let mut entries = Vec::with_capacity(d);
    for j in 0..d {
        let eps = if j + 1 < d { groups[j].0 * groups[j + 1].0 } else { groups[j].0 };
        entries.push((groups[j].1, eps));
    }
    let idx = MzvIndex::new(entries)?;
    if !idx.is_convergent() {
        return Err(Error::DivergentIndex);
    }
    Ok((idx, d))
}

/// Letter map and sign for `Ω_w(i)(φ) = sign · Ω_{w'}(1)(π/2 − φ)`.
pub fn endpoint_i_reduction(word: &[u8]) -> Result<(i8, Vec<u8>)> {
    require_valid(word, Endpoint::I)?;
    let mut sign = 1i8;
    let mut out = Vec::with_capacity(word.len());
    for &l in word {
        let (m, s) = match l {
            1 => (1, -1),
            2 => (3, -1),
            _ => (2, 1),
        };
        out.push(m);
        sign *= s;
    }
    Ok((sign, out))
}

/// Sign pattern of ω_j over the poles (p₁, p₂, p₃, p₄).
const SIGNS: [[i8; 4]; 3] = [[1, -1, 1, -1], [1, -1, -1, 1], [1, 1, -1, -1]];

/// Ω-evaluator for one angle and precision, with memoised values.
pub struct OmegaEngine {
    ctx: Ctx,
    phi: Phi,
    paths: [OnceLock<Arc<PathIntegrator>>; 2],
    pole_paths: [OnceLock<Arc<PathIntegrator>>; 2],
    memo: DashMap<(Vec<u8>, Endpoint), CertifiedComplex>,
}

impl OmegaEngine {
    pub fn new(ctx: &Ctx, phi: &Phi) -> Self {
        OmegaEngine {
            ctx: *ctx,
            phi: phi.clone(),
            paths: [OnceLock::new(), OnceLock::new()],
            pole_paths: [OnceLock::new(), OnceLock::new()],
            memo: DashMap::new(),
        }
    }

    /// Shared engine per (angle, precision).
    pub fn shared(ctx: &Ctx, phi: &Phi) -> Arc<OmegaEngine> {
        static ENGINES: OnceLock<DashMap<(String, u32, bool), Arc<OmegaEngine>>> = OnceLock::new();
        let map = ENGINES.get_or_init(DashMap::new);
        let key = (phi.label().to_string(), ctx.bits(), ctx.certified());
        map.entry(key).or_insert_with(|| Arc::new(OmegaEngine::new(ctx, phi))).clone()
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }
    pub fn phi(&self) -> &Phi {
        &self.phi
    }

    /// Poles p₁ = e^{iφ}, p₂ = −e^{−iφ}, p₃ = −e^{iφ}, p₄ = e^{−iφ}.
    pub fn poles(&self) -> [CertifiedComplex; 4] {
        let (c, s) = (self.phi.cos(), self.phi.sin());
        let p1 = &c + &s.mul_i();
        let p4 = p1.conj();
        [p1.clone(), -p4.clone(), -p1, p4]
    }

    fn axis_path(&self, endpoint: Endpoint) -> [CertifiedComplex; 4] {
        let ctx = &self.ctx;
        let unit = match endpoint {
            Endpoint::One => ctx.one(),
            Endpoint::I => ctx.i(),
        };
        [ctx.zero(), unit.div_int(3), unit.mul_int(2).div_int(3), unit]
    }

    fn integrator(&self, endpoint: Endpoint, expanded: bool) -> Result<Arc<PathIntegrator>> {
        let slot = if expanded { &self.pole_paths[endpoint as usize] } else { &self.paths[endpoint as usize] };
        if let Some(p) = slot.get() {
            return Ok(p.clone());
        }
        let path = self.axis_path(endpoint);
        let poles = self.poles().to_vec();
        let p = if expanded {
            PathIntegrator::new(&self.ctx, poles, &path, OMEGA_ALPHA_MAX)?
        } else {
            let forms = SIGNS
                .iter()
                .map(|row| row.iter().enumerate().map(|(k, &s)| (k as u8, s as i64)).collect())
                .collect();
            PathIntegrator::with_forms(&self.ctx, poles, forms, &path, OMEGA_ALPHA_MAX)?
        };
        Ok(slot.get_or_init(|| Arc::new(p)).clone())
    }

    /// Route B: each ω is the signed sum of four simple-pole forms; integrate along the axis.
    pub fn eval_route_b(&self, word: &[u8], endpoint: Endpoint) -> Result<CertifiedComplex> {
        if word.iter().any(|&l| !(1..=3).contains(&l)) {
            return Err(Error::InvalidWord(word.to_vec()));
        }
        let letters: Vec<u8> = word.iter().map(|&l| l - 1).collect();
        self.integrator(endpoint, false)?.integrate(&letters)
    }

    /// Route B with the `4^n` pole words expanded one by one.
    pub fn eval_route_b_expanded(&self, word: &[u8], endpoint: Endpoint) -> Result<CertifiedComplex> {
        if word.iter().any(|&l| !(1..=3).contains(&l)) {
            return Err(Error::InvalidWord(word.to_vec()));
        }
        let pi = self.integrator(endpoint, true)?;
        let n = word.len();
        let mut acc = self.ctx.zero();
        let mut letters = vec![0u8; n];
        let total = 4usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut sign = 1i8;
            for k in 0..n {
                let pole = (c % 4) as u8;
                c /= 4;
                letters[k] = pole;
                sign *= SIGNS[(word[k] - 1) as usize][pole as usize];
            }
            let v = pi.integrate(&letters)?;
            acc = if sign > 0 { &acc + &v } else { &acc - &v };
        }
        Ok(acc)
    }

    /// Route A (φ = π/4, endpoint 1): `sign · iπ · ζ(idx)`.
    pub fn eval_route_a(&self, word: &[u8]) -> Result<CertifiedComplex> {
        if !self.phi.is_quarter() {
            return Err(Error::DomainError("the MZV route needs φ = π/4".into()));
        }
        let (sign, idx) = omega_to_mzv(word)?;
        let z = alternating_mzv(&idx, &self.ctx)?;
        let v = (&self.ctx.pi() * &z).mul_i();
        Ok(if sign < 0 { -v } else { v })
    }

    /// Value of a valid word, choosing the MZV route whenever it applies.
    pub fn eval(&self, word: &[u8], endpoint: Endpoint) -> Result<CertifiedComplex> {
        require_valid(word, endpoint)?;
        let key = (word.to_vec(), endpoint);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let v = if self.phi.is_quarter() {
            match endpoint {
                Endpoint::One => self.eval_route_a(word)?,
                Endpoint::I => {
                    let (sign, w2) = endpoint_i_reduction(word)?;
                    let v = self.eval_route_a(&w2)?;
                    if sign < 0 {
                        -v
                    } else {
                        v
                    }
                }
            }
        } else {
            self.eval_route_b(word, endpoint)?
        };
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// `|Ω_w(1)|` as an interval, for any walk from e₃.
    pub fn abs(&self, word: &[u8]) -> Result<(f64, f64)> {
        let (ok, _) = walk(word);
        if !ok || word.is_empty() {
            return Err(Error::InvalidWord(word.to_vec()));
        }
        let key = (word.to_vec(), Endpoint::One);
        let v = match self.memo.get(&key) {
            Some(v) => v.clone(),
            None => {
                let v = self.eval_route_b(word, Endpoint::One)?;
                self.memo.insert(key, v.clone());
                v
            }
        };
        Ok(v.disc_abs_interval())
    }
}

pub fn omega_eval(word: &[u8], endpoint: Endpoint, phi: &Phi, ctx: &Ctx) -> Result<CertifiedComplex> {
    OmegaEngine::shared(ctx, phi).eval(word, endpoint)
}

pub fn omega_abs(word: &[u8], phi: &Phi, ctx: &Ctx) -> Result<(f64, f64)> {
    OmegaEngine::shared(ctx, phi).abs(word)
}

/// All words of length `n` that are valid for `endpoint`.
pub fn valid_words(n: usize, endpoint: Endpoint) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<(Vec<u8>, u8)> = vec![(Vec::new(), 3)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(cur.len() * 2);
        for (w, v) in cur {
            for l in 1..=3u8 {
                if let Some(v2) = graph_step(v, l) {
                    let mut w2 = w.clone();
                    w2.push(l);
                    next.push((w2, v2));
                }
            }
        }
        cur = next;
    }
    for (w, v) in cur {
        if v == target(endpoint) {
            out.push(w);
        }
    }
    out
}
