//! Multiple polylogarithms and iterated integrals of `dt/(t − y)` forms.
//!
//! Iterated integrals are read with the first form innermost:
//! `∫_p^q η_{y_1}⋯η_{y_n}` integrates `η_{y_1}` over the smallest parameter.

use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use dashmap::DashMap;

use crate::cdisc::{up, CertifiedComplex, Ctx};
use crate::error::{Error, Result};

pub const MZV_ALPHA_MAX: f64 = 0.5;
pub const OMEGA_ALPHA_MAX: f64 = 0.55;

const MAX_SPLIT_DEPTH: u32 = 40;

/// Signed alternating MZV index `ζ(n_1^{ε_1}, …, n_d^{ε_d})` summed over `0 < k_1 < … < k_d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MzvIndex {
    entries: Vec<(u32, i8)>,
}

impl MzvIndex {
    pub fn new(entries: Vec<(u32, i8)>) -> Result<Self> {
        for &(n, e) in &entries {
            if n == 0 || (e != 1 && e != -1) {
                return Err(Error::DomainError(format!("bad MZV entry ({n}, {e})")));
            }
        }
        Ok(MzvIndex { entries })
    }

    /// Signed notation: `-k` stands for `k̄` (sign −1).
    pub fn from_signed(v: &[i32]) -> Result<Self> {
        MzvIndex::new(
            v.iter()
                .map(|&k| (k.unsigned_abs(), if k < 0 { -1 } else { 1 }))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(u32, i8)] {
        &self.entries
    }
    pub fn depth(&self) -> usize {
        self.entries.len()
    }
    pub fn weight(&self) -> u32 {
        self.entries.iter().map(|e| e.0).sum()
    }
    pub fn is_convergent(&self) -> bool {
        self.entries.last() != Some(&(1, 1))
    }

    /// Pole sequence of `∫_0^1` whose value is `(−1)^d ζ(idx)`.
    pub fn integral_word(&self) -> Vec<i8> {
        let d = self.entries.len();
        let mut out = Vec::new();
        for j in 0..d {
            let delta: i8 = self.entries[j..].iter().map(|e| e.1).product();
            out.push(delta);
            for _ in 1..self.entries[j].0 {
                out.push(0);
            }
        }
        out
    }

    fn key(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MzvIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|&(n, e)| if e < 0 { format!("-{n}") } else { n.to_string() })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for MzvIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(MzvIndex::default());
        }
        let mut v = Vec::new();
        for part in s.split(',') {
            let p = part.trim();
            let (neg, body) = match p.strip_suffix('b').or_else(|| p.strip_suffix("bar")) {
                Some(b) => (true, b),
                None => match p.strip_prefix('-') {
                    Some(b) => (true, b),
                    None => (false, p),
                },
            };
            let n: u32 = body
                .parse()
                .map_err(|_| Error::DomainError(format!("cannot parse MZV entry {p:?}")))?;
            v.push((n, if neg { -1 } else { 1 }));
        }
        MzvIndex::new(v)
    }
}

/// Arguments of `Li_{a_1,…,a_d}(x_1,…,x_d)` with a geometric convergence rate.
#[derive(Clone, Debug)]
pub struct MplArgs {
    pub a: Vec<u32>,
    pub x: Vec<CertifiedComplex>,
    alpha: f64,
}

impl MplArgs {
    pub fn new(a: Vec<u32>, x: Vec<CertifiedComplex>) -> Result<Self> {
        if a.len() != x.len() || a.iter().any(|&k| k == 0) {
            return Err(Error::DomainError("indices and arguments must match, indices ≥ 1".into()));
        }
        let mut alpha: f64 = 0.0;
        let mut delta: Option<CertifiedComplex> = None;
        for xi in x.iter().rev() {
            let d = match delta {
                None => xi.clone(),
                Some(ref d) => d * xi,
            };
            alpha = alpha.max(d.mag());
            delta = Some(d);
        }
        if !(alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        Ok(MplArgs { a, x, alpha })
    }

    /// Upper bound of `max_j |δ_j|`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn depth(&self) -> usize {
        self.a.len()
    }

    /// The full series value, truncated where the tail drops below `10^-(digits+5)`.
    pub fn evaluate(&self, ctx: &Ctx) -> Result<CertifiedComplex> {
        if self.a.is_empty() {
            return Ok(ctx.one());
        }
        let alpha = self.alpha.max(f64::MIN_POSITIVE);
        let n = terms_needed(&self.a, alpha, target_eps(ctx))?;
        let v = truncated_mpl(self, n);
        Ok(v.inflate(tail_bound(&self.a, alpha, n)?))
    }
}

fn target_eps(ctx: &Ctx) -> f64 {
    10f64.powi(-(ctx.digits() as i32 + 5))
}

/// `Li_{N;a}(x)` by the `O(Nd)` vector recursion.
pub fn truncated_mpl(args: &MplArgs, n: u64) -> CertifiedComplex {
    let d = args.a.len();
    let Some(x0) = args.x.first() else {
        return CertifiedComplex::from_hex(64, "1", "0", 0.0).expect("literal");
    };
    let one = x0.one_like();
    let zero = x0.zero_like();
    let mut v = vec![zero; d + 1];
    v[0] = one;
    let mut pw: Vec<CertifiedComplex> = args.x.clone();
    for i in 1..=n {
        for r in (1..=d).rev() {
            let mut t = &v[r - 1] * &pw[r - 1];
            for _ in 0..args.a[r - 1] {
                t = t.div_int(i as i64);
            }
            v[r] = &v[r] + &t;
        }
        if i < n {
            for r in 0..d {
                pw[r] = &pw[r] * &args.x[r];
            }
        }
    }
    v.pop().unwrap()
}

/// Upper bound of `|Li_a − Li_{N;a}|` given `|δ_j| ≤ α` for all `j`.
pub fn tail_bound(a: &[u32], alpha: f64, n: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if n == 0 {
        return Err(Error::DomainError("N must be at least 1".into()));
    }
    let d = a.len();
    let nf = n as f64;
    let ratio = up::div(alpha, up::sub_down(1.0, alpha));
    let mut total = 0.0;
    for i in 1..=d {
        let s: i64 = a[i - 1..].iter().map(|&k| k as i64).sum();
        let e = (i as i64 - 1) - s;
        let np = if e >= 0 {
            up::powi(nf, e as i32)
        } else {
            up::div(1.0, up::powi_down(nf, (-e) as i32))
        };
        total = up::add(total, up::mul(np, up::powi(ratio, (d - i + 1) as i32)));
    }
    Ok(up::mul(up::powi(alpha, n.min(i32::MAX as u64) as i32), total))
}

/// Least `N` with `tail_bound(a, α, N) ≤ eps`.
pub fn terms_needed(a: &[u32], alpha: f64, eps: f64) -> Result<u64> {
    if a.is_empty() {
        return Ok(1);
    }
    let mut n = ((eps.ln() / alpha.ln()).floor() as u64).saturating_sub(8).max(1);
    while tail_bound(a, alpha, n)? > eps {
        n += 1;
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug)]
struct Pt(f64, f64);

impl Pt {
    fn of(z: &CertifiedComplex) -> Pt {
        Pt(z.re_f64(), z.im_f64())
    }
    fn dist(self, o: Pt) -> f64 {
        (self.0 - o.0).hypot(self.1 - o.1)
    }
}

fn coincide(a: &CertifiedComplex, b: &CertifiedComplex) -> bool {
    (a - b).contains_zero()
}

/// `|q − p| / min_{y ≠ p} |y − p|`; by convention `1/2` when every pole equals `p`.
pub fn convergence_rate(poles: &[CertifiedComplex], p: &CertifiedComplex, q: &CertifiedComplex) -> f64 {
    let pp = Pt::of(p);
    let r = pp.dist(Pt::of(q));
    if r == 0.0 {
        return 0.0;
    }
    let near = poles
        .iter()
        .filter(|y| !coincide(y, p))
        .map(|y| pp.dist(Pt::of(y)))
        .fold(f64::INFINITY, f64::min);
    if near.is_infinite() {
        0.5
    } else {
        r / near
    }
}

/// An iterated integral `∫ η_{y_1}⋯η_{y_n}` along a polyline.
#[derive(Clone, Debug)]
pub struct IteratedWord {
    pub poles: Vec<CertifiedComplex>,
    /// Waypoints, first is the start `p`, last is the end `q`.
    pub path: Vec<CertifiedComplex>,
}

impl IteratedWord {
    pub fn straight(poles: Vec<CertifiedComplex>, p: CertifiedComplex, q: CertifiedComplex) -> Self {
        IteratedWord { poles, path: vec![p, q] }
    }
    pub fn start(&self) -> &CertifiedComplex {
        &self.path[0]
    }
    pub fn end(&self) -> &CertifiedComplex {
        self.path.last().expect("non-empty path")
    }
}

#[derive(Clone, Debug)]
struct Segment {
    /// Integration runs from `origin` to `target`; `reversed` means origin is the right end.
    reversed: bool,
    alpha: f64,
    /// `1/z` for each pole, `None` where the pole sits at the origin.
    delta: Vec<Option<CertifiedComplex>>,
}

/// Chen-expansion evaluator for words over a fixed pole alphabet and path.
///
/// Subword values per segment are memoised, so evaluating many words over
/// the same alphabet shares work.
pub struct PathIntegrator {
    ctx: Ctx,
    poles: Vec<CertifiedComplex>,
    start: CertifiedComplex,
    end: CertifiedComplex,
    segments: Vec<Segment>,
    /// Letters index these integer combinations of poles when present.
    forms: Option<Vec<Vec<(u8, i64)>>>,
    memo: DashMap<(usize, Vec<u8>), CertifiedComplex>,
}

impl fmt::Debug for PathIntegrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathIntegrator")
            .field("poles", &self.poles.len())
            .field("segments", &self.segments.len())
            .field("memo", &self.memo.len())
            .finish()
    }
}

impl PathIntegrator {
    pub fn new(ctx: &Ctx, poles: Vec<CertifiedComplex>, path: &[CertifiedComplex], alpha_max: f64) -> Result<Self> {
        if !(alpha_max > 0.0 && alpha_max < 1.0) {
            return Err(Error::AlphaOutOfRange(alpha_max));
        }
        if path.len() < 2 {
            return Err(Error::DomainError("path needs a start and an end".into()));
        }
        if poles.len() > u8::MAX as usize {
            return Err(Error::DomainError("too many poles".into()));
        }
        let p = path[0].clone();
        let q = path[path.len() - 1].clone();
        for (k, w) in path.iter().enumerate() {
            let interior = k != 0 && k != path.len() - 1;
            if interior && poles.iter().any(|y| coincide(y, w)) {
                return Err(Error::PoleOnPath);
            }
        }
        let mut pts: Vec<(CertifiedComplex, CertifiedComplex, bool)> = Vec::new();
        for leg in path.windows(2) {
            check_leg(&poles, &leg[0], &leg[1])?;
            plan_leg(&poles, &leg[0], &leg[1], alpha_max, 0, &mut pts)?;
        }
        let mut segments = Vec::with_capacity(pts.len());
        for (a, b, reversed) in pts {
            let (o, t) = if reversed { (&b, &a) } else { (&a, &b) };
            let span = t - o;
            let mut alpha: f64 = 0.0;
            let mut delta = Vec::with_capacity(poles.len());
            for y in &poles {
                if coincide(y, o) {
                    delta.push(None);
                    continue;
                }
                let dl = span.try_div(&(y - o))?;
                alpha = alpha.max(dl.mag());
                delta.push(Some(dl));
            }
            if !(alpha < 1.0) {
                return Err(Error::AlphaOutOfRange(alpha));
            }
            segments.push(Segment { reversed, alpha: alpha.max(f64::MIN_POSITIVE), delta });
        }
        Ok(PathIntegrator { ctx: *ctx, poles, start: p, end: q, segments, forms: None, memo: DashMap::new() })
    }

    /// Letters stand for forms `Σ_k c_k dt/(t − y_k)`. No pole may sit at the path start.
    pub fn with_forms(
        ctx: &Ctx,
        poles: Vec<CertifiedComplex>,
        forms: Vec<Vec<(u8, i64)>>,
        path: &[CertifiedComplex],
        alpha_max: f64,
    ) -> Result<Self> {
        if forms.len() > u8::MAX as usize || forms.iter().flatten().any(|&(k, _)| k as usize >= poles.len()) {
            return Err(Error::DomainError("form refers to an unknown pole".into()));
        }
        let mut me = PathIntegrator::new(ctx, poles, path, alpha_max)?;
        if me.poles.iter().any(|y| coincide(y, &me.start) || coincide(y, &me.end)) {
            return Err(Error::NonIntegrableEndpoint);
        }
        me.forms = Some(forms);
        Ok(me)
    }

    pub fn poles(&self) -> &[CertifiedComplex] {
        &self.poles
    }
    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }
    /// Certified convergence rates of the planned segments.
    pub fn segment_rates(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.alpha).collect()
    }

    /// `∫ η_{y_{w_1}}⋯η_{y_{w_n}}` where `w` indexes the pole list.
    pub fn integrate(&self, w: &[u8]) -> Result<CertifiedComplex> {
        let n = w.len();
        if n == 0 {
            return Ok(self.ctx.one());
        }
        let alphabet = self.forms.as_ref().map_or(self.poles.len(), |f| f.len());
        if w.iter().any(|&k| k as usize >= alphabet) {
            return Err(Error::DomainError("letter outside the alphabet".into()));
        }
        if self.forms.is_none()
            && (coincide(&self.poles[w[0] as usize], &self.start) || coincide(&self.poles[w[n - 1] as usize], &self.end))
        {
            return Err(Error::NonIntegrableEndpoint);
        }
        let m = self.segments.len();
        let zero = self.ctx.zero();
        let mut acc: Vec<Option<CertifiedComplex>> = vec![None; n + 1];
        acc[0] = Some(self.ctx.one());
        for j in 0..m {
            let last = j + 1 == m;
            let mut next: Vec<Option<CertifiedComplex>> = vec![None; n + 1];
            for k in 0..=n {
                if last && k != n {
                    continue;
                }
                let mut s: Option<CertifiedComplex> = None;
                for i in 0..=k {
                    let Some(ai) = &acc[i] else { continue };
                    let v = self.subword(j, w, i, k)?;
                    let t = if i == k { ai.clone() } else { ai * &v };
                    s = Some(match s {
                        None => t,
                        Some(s) => &s + &t,
                    });
                }
                next[k] = s;
            }
            acc = next;
        }
        Ok(acc[n].take().unwrap_or(zero))
    }

    /// `∫` over segment `j` of `w[i..k]`.
    fn subword(&self, j: usize, w: &[u8], i: usize, k: usize) -> Result<CertifiedComplex> {
        if i == k {
            return Ok(self.ctx.one());
        }
        if let Some(v) = self.memo.get(&(j, w[i..k].to_vec())) {
            return Ok(v.clone());
        }
        let seg = &self.segments[j];
        if seg.reversed {
            let letters: Vec<u8> = w[..k].iter().rev().copied().collect();
            let vals = self.pass(seg, &letters)?;
            for (len, v) in vals.into_iter().enumerate().skip(1) {
                let v = if len % 2 == 1 { -v } else { v };
                self.memo.insert((j, w[k - len..k].to_vec()), v);
            }
        } else {
            let vals = self.pass(seg, &w[i..])?;
            for (len, v) in vals.into_iter().enumerate().skip(1) {
                self.memo.insert((j, w[i..i + len].to_vec()), v);
            }
        }
        Ok(self.memo.get(&(j, w[i..k].to_vec())).expect("filled by pass").clone())
    }

    fn pass(&self, seg: &Segment, letters: &[u8]) -> Result<Vec<CertifiedComplex>> {
        match &self.forms {
            None => self.prefix_pass(seg, letters),
            Some(f) => self.form_pass(seg, f, letters),
        }
    }

    /// As [`Self::prefix_pass`] for letters that are combinations of poles away
    /// from the origin. The recursion is linear, so each level carries one
    /// accumulator per pole instead of expanding the word.
    fn form_pass(&self, seg: &Segment, forms: &[Vec<(u8, i64)>], letters: &[u8]) -> Result<Vec<CertifiedComplex>> {
        let m = letters.len();
        let ctx = &self.ctx;
        let mut out = vec![ctx.one()];
        if m == 0 {
            return Ok(out);
        }
        let mut deltas: Vec<Vec<(&CertifiedComplex, i64)>> = Vec::with_capacity(m);
        for &l in letters {
            let mut row = Vec::new();
            for &(k, c) in &forms[l as usize] {
                match &seg.delta[k as usize] {
                    Some(d) => row.push((d, c)),
                    None => return Err(Error::NonIntegrableEndpoint),
                }
            }
            deltas.push(row);
        }
        let eps = target_eps(ctx);
        let mut weights = Vec::with_capacity(m);
        let mut w = 1.0f64;
        for row in &deltas {
            w = up::mul(w, row.iter().map(|r| r.1.unsigned_abs() as f64).sum::<f64>().max(1.0));
            weights.push(w);
        }
        let mut big_n = 1u64;
        for (l, &wl) in weights.iter().enumerate() {
            big_n = big_n.max(terms_needed(&vec![1; l + 1], seg.alpha, eps / wl)?);
        }
        let zero = ctx.zero();
        let mut u: Vec<Vec<CertifiedComplex>> = deltas.iter().map(|r| vec![zero.clone(); r.len()]).collect();
        let mut t_prev = vec![zero.clone(); m];
        let mut sums = vec![zero.clone(); m];
        for n in 1..=big_n {
            let mut t_new = Vec::with_capacity(m);
            for r in 0..m {
                if (n as usize) < r + 1 {
                    t_new.push(zero.clone());
                    continue;
                }
                let inp = if r == 0 {
                    if n == 1 {
                        Some(ctx.one())
                    } else {
                        None
                    }
                } else {
                    Some(t_prev[r - 1].clone())
                };
                let mut t = zero.clone();
                for (k, &(d, c)) in deltas[r].iter().enumerate() {
                    let base = match &inp {
                        Some(x) => &u[r][k] + x,
                        None => u[r][k].clone(),
                    };
                    u[r][k] = &base * d;
                    let term = match c {
                        1 => u[r][k].clone(),
                        -1 => -&u[r][k],
                        c => u[r][k].mul_int(c),
                    };
                    t = &t + &term;
                }
                let t = t.div_int(n as i64);
                sums[r] = &sums[r] + &t;
                t_new.push(t);
            }
            t_prev = t_new;
        }
        for (l, s) in sums.into_iter().enumerate() {
            let v = if l % 2 == 0 { -s } else { s };
            let tail = up::mul(weights[l], tail_bound(&vec![1; l + 1], seg.alpha, big_n)?);
            out.push(v.inflate(tail));
        }
        Ok(out)
    }

    /// Values of `∫_0^1` over every prefix of `letters` (normalised segment),
    /// index 0 being the empty word.
    fn prefix_pass(&self, seg: &Segment, letters: &[u8]) -> Result<Vec<CertifiedComplex>> {
        let m = letters.len();
        let ctx = &self.ctx;
        let mut out = vec![ctx.one()];
        if m == 0 {
            return Ok(out);
        }
        // groups: (delta, a); prefix ℓ ↦ (group, partial a)
        let mut groups: Vec<(&CertifiedComplex, u32)> = Vec::new();
        let mut shape: Vec<(usize, u32)> = Vec::with_capacity(m);
        for &l in letters {
            match &seg.delta[l as usize] {
                Some(d) => groups.push((d, 1)),
                None => match groups.last_mut() {
                    Some(g) => g.1 += 1,
                    None => return Err(Error::NonIntegrableEndpoint),
                },
            }
            let r = groups.len() - 1;
            shape.push((r, groups[r].1));
        }
        let eps = target_eps(ctx);
        let mut tails = Vec::with_capacity(m);
        let mut big_n = 1u64;
        for &(r, ap) in &shape {
            let mut a: Vec<u32> = groups[..r].iter().map(|g| g.1).collect();
            a.push(ap);
            let nn = terms_needed(&a, seg.alpha, eps)?;
            big_n = big_n.max(nn);
            tails.push(a);
        }
        let rg = groups.len();
        let zero = ctx.zero();
        let mut u = vec![zero.clone(); rg];
        let mut t_prev = vec![zero.clone(); rg];
        let mut sums = vec![zero.clone(); m];
        // first prefix index belonging to each group
        let mut first = vec![0usize; rg];
        for (l, &(r, ap)) in shape.iter().enumerate() {
            if ap == 1 {
                first[r] = l;
            }
        }
        for n in 1..=big_n {
            let mut t_new = Vec::with_capacity(rg);
            for r in 0..rg {
                if (n as usize) < r + 1 {
                    t_new.push(zero.clone());
                    continue;
                }
                let inp = if r == 0 {
                    if n == 1 {
                        Some(ctx.one())
                    } else {
                        None
                    }
                } else {
                    Some(t_prev[r - 1].clone())
                };
                let base = match inp {
                    Some(x) => &u[r] + &x,
                    None => u[r].clone(),
                };
                u[r] = &base * groups[r].0;
                let mut t = u[r].clone();
                let last_len = if r + 1 < rg { first[r + 1] } else { m };
                for l in first[r]..last_len {
                    t = t.div_int(n as i64);
                    sums[l] = &sums[l] + &t;
                }
                t_new.push(t);
            }
            t_prev = t_new;
        }
        for (l, s) in sums.into_iter().enumerate() {
            let r = shape[l].0 + 1;
            let v = if r % 2 == 1 { -s } else { s };
            out.push(v.inflate(tail_bound(&tails[l], seg.alpha, big_n)?));
        }
        Ok(out)
    }
}

fn check_leg(poles: &[CertifiedComplex], a: &CertifiedComplex, b: &CertifiedComplex) -> Result<()> {
    let (pa, pb) = (Pt::of(a), Pt::of(b));
    let len = pa.dist(pb);
    for y in poles {
        if coincide(y, a) || coincide(y, b) {
            continue;
        }
        let py = Pt::of(y);
        let t = if len == 0.0 {
            0.0
        } else {
            (((py.0 - pa.0) * (pb.0 - pa.0) + (py.1 - pa.1) * (pb.1 - pa.1)) / (len * len)).clamp(0.0, 1.0)
        };
        let foot = Pt(pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1));
        if py.dist(foot) <= 1e-12 * len.max(1.0) {
            return Err(Error::PoleOnPath);
        }
    }
    Ok(())
}

fn plan_leg(
    poles: &[CertifiedComplex],
    a: &CertifiedComplex,
    b: &CertifiedComplex,
    alpha_max: f64,
    depth: u32,
    out: &mut Vec<(CertifiedComplex, CertifiedComplex, bool)>,
) -> Result<()> {
    let fwd = convergence_rate(poles, a, b);
    let rev = convergence_rate(poles, b, a);
    // a pole at the far end makes the series diverge
    let fwd = if poles.iter().any(|y| coincide(y, b)) { f64::INFINITY } else { fwd };
    let rev = if poles.iter().any(|y| coincide(y, a)) { f64::INFINITY } else { rev };
    let tol = alpha_max * (1.0 + 1e-12);
    if fwd.min(rev) <= tol {
        out.push((a.clone(), b.clone(), rev < fwd));
        return Ok(());
    }
    if depth >= MAX_SPLIT_DEPTH {
        return Err(Error::PoleOnPath);
    }
    let mid = (a + b).scale_pow2(-1);
    plan_leg(poles, a, &mid, alpha_max, depth + 1, out)?;
    plan_leg(poles, &mid, b, alpha_max, depth + 1, out)
}

/// Certified value of `w` with every segment converging at rate at most `alpha_max`.
pub fn evaluate_iterated_integral(w: &IteratedWord, alpha_max: f64, ctx: &Ctx) -> Result<CertifiedComplex> {
    let mut alphabet: Vec<CertifiedComplex> = Vec::new();
    let mut letters = Vec::with_capacity(w.poles.len());
    for y in &w.poles {
        let k = match alphabet.iter().position(|z| coincide(z, y)) {
            Some(k) => k,
            None => {
                alphabet.push(y.clone());
                alphabet.len() - 1
            }
        };
        letters.push(k as u8);
    }
    let pi = PathIntegrator::new(ctx, alphabet, &w.path, alpha_max)?;
    pi.integrate(&letters)
}

/// Persistent store of alternating MZV values keyed by index and precision.
///
/// The file is append-only. Header line `lawson-mzv-cache\t1`, then one
/// record per line: `index \t bits \t re-hex \t im-hex \t radius`.
pub struct MzvCache {
    map: DashMap<(String, u32), CertifiedComplex>,
    file: Mutex<Option<File>>,
}

const CACHE_HEADER: &str = "lawson-mzv-cache\t1";
pub const CACHE_FILE: &str = "mzv-cache-v1.tsv";

impl Default for MzvCache {
    fn default() -> Self {
        MzvCache { map: DashMap::new(), file: Mutex::new(None) }
    }
}

impl MzvCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Load `dir/mzv-cache-v1.tsv` and append new records to it.
    pub fn attach(&self, dir: &Path) -> Result<usize> {
        std::fs::create_dir_all(dir)?;
        let path: PathBuf = dir.join(CACHE_FILE);
        let mut loaded = 0;
        if path.exists() {
            let rd = BufReader::new(File::open(&path)?);
            let mut lines = rd.lines();
            match lines.next() {
                Some(Ok(h)) if h == CACHE_HEADER => {}
                Some(_) => return Err(Error::Io(format!("{} has an unknown header", path.display()))),
                None => {}
            }
            for line in lines {
                let line = line?;
                let f: Vec<&str> = line.split('\t').collect();
                if f.len() != 5 {
                    continue;
                }
                let (Ok(bits), Ok(rad)) = (f[1].parse::<u32>(), f[4].parse::<f64>()) else { continue };
                if let Ok(v) = CertifiedComplex::from_hex(bits, f[2], f[3], rad) {
                    self.map.insert((f[0].to_string(), bits), v);
                    loaded += 1;
                }
            }
        }
        let fresh = !path.exists() || std::fs::metadata(&path)?.len() == 0;
        let mut fh = OpenOptions::new().create(true).append(true).open(&path)?;
        if fresh {
            writeln!(fh, "{CACHE_HEADER}")?;
        }
        *self.file.lock().expect("cache lock") = Some(fh);
        Ok(loaded)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, idx: &MzvIndex, bits: u32) -> Option<CertifiedComplex> {
        self.map.get(&(idx.key(), bits)).map(|v| v.clone())
    }

    pub fn insert(&self, idx: &MzvIndex, bits: u32, v: &CertifiedComplex) -> Result<()> {
        let key = idx.key();
        if v.is_certified() {
            if let Some(fh) = self.file.lock().expect("cache lock").as_mut() {
                let (re, im) = v.to_hex();
                writeln!(fh, "{key}\t{bits}\t{re}\t{im}\t{:e}", v.radius())?;
            }
        }
        self.map.insert((key, bits), v.clone());
        Ok(())
    }
}

/// Process-wide MZV cache used by [`alternating_mzv`].
pub fn global_cache() -> &'static MzvCache {
    static CACHE: OnceLock<MzvCache> = OnceLock::new();
    CACHE.get_or_init(MzvCache::new)
}

fn mzv_engine(ctx: &Ctx) -> Result<Arc<PathIntegrator>> {
    static ENGINES: OnceLock<DashMap<(u32, bool), Arc<PathIntegrator>>> = OnceLock::new();
    let map = ENGINES.get_or_init(DashMap::new);
    let key = (ctx.bits(), ctx.certified());
    if let Some(e) = map.get(&key) {
        return Ok(e.clone());
    }
    let poles = vec![ctx.zero(), ctx.one(), -ctx.one()];
    let e = Arc::new(PathIntegrator::new(ctx, poles, &[ctx.zero(), ctx.one()], MZV_ALPHA_MAX)?);
    map.insert(key, e.clone());
    Ok(e)
}

/// `ζ(idx)` with the path `0 → 1/2`, then `1 → 1/2` reversed; memoised.
pub fn alternating_mzv(idx: &MzvIndex, ctx: &Ctx) -> Result<CertifiedComplex> {
    alternating_mzv_with(idx, ctx, global_cache())
}

pub fn alternating_mzv_with(idx: &MzvIndex, ctx: &Ctx, cache: &MzvCache) -> Result<CertifiedComplex> {
    if !idx.is_convergent() {
        return Err(Error::DivergentIndex);
    }
    if idx.depth() == 0 {
        return Ok(ctx.one());
    }
    if let Some(v) = cache.get(idx, ctx.bits()) {
        if v.is_certified() == ctx.certified() {
            return Ok(v);
        }
    }
    let engine = mzv_engine(ctx)?;
    let word: Vec<u8> = idx
        .integral_word()
        .into_iter()
        .map(|y| match y {
            0 => 0u8,
            1 => 1,
            _ => 2,
        })
        .collect();
    let v = engine.integrate(&word)?;
    let v = if idx.depth() % 2 == 1 { -v } else { v };
    cache.insert(idx, ctx.bits(), &v)?;
    Ok(v)
}

/// Direct partial sum `Σ_{0<k_1<…<k_d≤N} Π ε_j^{k_j}/k_j^{n_j}`.
pub fn mzv_naive_sum(idx: &MzvIndex, n: u64, ctx: &Ctx) -> CertifiedComplex {
    fn rec(e: &[(u32, i8)], lo: u64, n: u64, ctx: &Ctx) -> CertifiedComplex {
        let Some(&(a, s)) = e.first() else { return ctx.one() };
        let mut acc = ctx.zero();
        for k in lo + 1..=n {
            if n - k < (e.len() as u64 - 1) {
                break;
            }
            let inner = rec(&e[1..], k, n, ctx);
            let mut t = inner;
            for _ in 0..a {
                t = t.div_int(k as i64);
            }
            if s < 0 && k % 2 == 1 {
                t = -t;
            }
            acc = &acc + &t;
        }
        acc
    }
    rec(&idx.entries, 0, n, ctx)
}

/// Closed-form helper used by tests and callers: `Li_{N;a}` by explicit nested sums.
pub fn naive_truncated_mpl(args: &MplArgs, n: u64, ctx: &Ctx) -> CertifiedComplex {
    fn rec(a: &[u32], x: &[CertifiedComplex], lo: u64, n: u64, ctx: &Ctx, memo: &mut HashMap<(usize, u64), CertifiedComplex>) -> CertifiedComplex {
        if a.is_empty() {
            return ctx.one();
        }
        let key = (a.len(), lo);
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let mut acc = ctx.zero();
        for k in lo + 1..=n {
            let inner = rec(&a[1..], &x[1..], k, n, ctx, memo);
            let mut t = &inner * &x[0].powi(k as u32);
            for _ in 0..a[0] {
                t = t.div_int(k as i64);
            }
            acc = &acc + &t;
        }
        memo.insert(key, acc.clone());
        acc
    }
    rec(&args.a, &args.x, 0, n, ctx, &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Ctx {
        Ctx::new(30).unwrap()
    }

    #[test]
    fn index_round_trip() {
        let i: MzvIndex = "-1,2,-3".parse().unwrap();
        assert_eq!(i.to_string(), "-1,2,-3");
        assert_eq!(i.weight(), 6);
        assert!(!MzvIndex::from_signed(&[2, 1]).unwrap().is_convergent());
        assert!(MzvIndex::from_signed(&[2, -1]).unwrap().is_convergent());
    }

    #[test]
    fn tail_bound_single() {
        let b = tail_bound(&[1], 0.5, 10).unwrap();
        assert!((b - 2f64.powi(-10) / 10.0).abs() < 1e-15);
    }

    #[test]
    fn li1_half_is_log2() {
        let c = ctx();
        let args = MplArgs::new(vec![1], vec![c.ratio(1, 2)]).unwrap();
        let v = truncated_mpl(&args, 60).inflate(tail_bound(&[1], 0.5, 60).unwrap());
        assert!(v.overlaps(&c.ln2()));
    }

    #[test]
    fn rates() {
        let c = ctx();
        let poles = vec![c.zero(), c.one(), -c.one()];
        assert_eq!(convergence_rate(&poles, &c.zero(), &c.ratio(1, 2)), 0.5);
        let r1 = &c.ratio(3, 10) - &c.ratio(9, 16).mul_i();
        let r2 = &c.ratio(1, 2) - &c.ratio(5, 16).mul_i();
        let a = convergence_rate(&poles, &r2, &r1);
        assert!((a - 0.542984).abs() < 1e-6);
        // |0.3 + 0.4375i| / 1
        let a = convergence_rate(&poles, &(-c.i()), &r1);
        assert!((a - 0.28140625f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn log2_integral() {
        let c = ctx();
        let w = IteratedWord::straight(vec![-c.one()], c.zero(), c.one());
        let v = evaluate_iterated_integral(&w, 0.5, &c).unwrap();
        assert!(v.overlaps(&c.ln2()));
        assert!(v.radius() < 1e-30);
    }

    #[test]
    fn zeta2_integral() {
        let c = ctx();
        let w = IteratedWord::straight(vec![c.one(), c.zero()], c.zero(), c.one());
        let v = evaluate_iterated_integral(&w, 0.5, &c).unwrap();
        let z2 = (&c.pi() * &c.pi()).div_int(6);
        assert!(v.overlaps(&-z2));
    }

    #[test]
    fn divergent_endpoints() {
        let c = ctx();
        let w = IteratedWord::straight(vec![c.zero(), c.one()], c.zero(), c.one());
        assert_eq!(evaluate_iterated_integral(&w, 0.5, &c).unwrap_err(), Error::NonIntegrableEndpoint);
        let w = IteratedWord::straight(vec![c.ratio(1, 2)], c.zero(), c.one());
        assert_eq!(evaluate_iterated_integral(&w, 0.5, &c).unwrap_err(), Error::PoleOnPath);
    }
}
