//! Geodesic triangles in S³ and a triangulated upper bound for the genus-2 Lawson surface.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

use serde::{Deserialize, Serialize};

use crate::cdisc::{CertifiedComplex, Ctx};
use crate::error::{Error, Result};
use crate::optim::{nelder_mead, SimplexOptions};
pub use crate::real::Real;

type CC = CertifiedComplex;

/// Point of S³ ⊂ ℂ² ≅ ℝ⁴, stored as `(Re z, Im z, Re w, Im w)`.
#[derive(Clone, Debug)]
pub struct S3Point<R: Real>(pub [R; 4]);

impl<R: Real> S3Point<R> {
    /// `cos(a)·(e^{ib}, 0)`-style building block: `(r·e^{iz}, 0)` or `(0, r·e^{iw})`.
    fn polar(r: &R, arg: &R, first: bool) -> Self {
        let z = r.lit(0.0);
        let (c, s) = (r.mul(&arg.cos()), r.mul(&arg.sin()));
        if first {
            S3Point([c, s, z.clone(), z])
        } else {
            S3Point([z.clone(), z, c, s])
        }
    }

    fn plus(&self, o: &Self) -> Self {
        S3Point(std::array::from_fn(|k| self.0[k].add(&o.0[k])))
    }

    pub fn dot(&self, o: &Self) -> R {
        let mut acc = self.0[0].mul(&o.0[0]);
        for k in 1..4 {
            acc = acc.add(&self.0[k].mul(&o.0[k]));
        }
        acc
    }

    /// `|p|² − 1`.
    pub fn norm_defect(&self) -> R {
        self.dot(self).sub(&self.0[0].lit(1.0))
    }

    /// Unit tangent at `self` of the geodesic towards `x`.
    fn tangent(&self, x: &Self) -> Result<[R; 4]> {
        let c = self.dot(x);
        let one = c.lit(1.0);
        let s2 = one.sub(&c.mul(&c));
        if !(s2.lo() > 0.0) {
            return Err(Error::AntipodalOrEqual);
        }
        let s = s2.sqrt()?;
        let mut t: [R; 4] = std::array::from_fn(|k| x.0[k].sub(&c.mul(&self.0[k])));
        for v in &mut t {
            *v = v.div(&s)?;
        }
        Ok(t)
    }
}

pub fn s3_from_f64(v: [f64; 4]) -> S3Point<f64> {
    S3Point(v)
}

/// Angle at `a` between the geodesics towards `b` and `c`.
pub fn vertex_angle<R: Real>(a: &S3Point<R>, b: &S3Point<R>, c: &S3Point<R>) -> Result<R> {
    let (u, v) = (a.tangent(b)?, a.tangent(c)?);
    let mut d = u[0].mul(&v[0]);
    for k in 1..4 {
        d = d.add(&u[k].mul(&v[k]));
    }
    d.acos()
}

/// Gauss–Bonnet: angle sum minus π.
pub fn triangle_area<R: Real>(a: &S3Point<R>, b: &S3Point<R>, c: &S3Point<R>) -> Result<R> {
    let deg = |e: Error| if e == Error::AntipodalOrEqual { Error::DegenerateTriangle } else { e };
    let al = vertex_angle(a, b, c).map_err(deg)?;
    let be = vertex_angle(b, c, a).map_err(deg)?;
    let ga = vertex_angle(c, a, b).map_err(deg)?;
    let pi = al.pi();
    Ok(al.add(&be).add(&ga).sub(&pi))
}

/// The six free parameters of the triangulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangulationParams {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub t1: f64,
    pub t2: f64,
}

impl TriangulationParams {
    pub const PUBLISHED: TriangulationParams =
        TriangulationParams { s0: 1.13641, s1: 1.27441, s2: 0.848594, s3: 1.06941, t1: 0.134219, t2: 1.4755 };

    pub fn center() -> Self {
        TriangulationParams::from_array([FRAC_PI_4; 6])
    }
    pub fn to_array(self) -> [f64; 6] {
        [self.s0, self.s1, self.s2, self.s3, self.t1, self.t2]
    }
    pub fn from_array(a: [f64; 6]) -> Self {
        TriangulationParams { s0: a[0], s1: a[1], s2: a[2], s3: a[3], t1: a[4], t2: a[5] }
    }
    pub fn in_box(&self) -> bool {
        self.to_array().iter().all(|v| (0.0..FRAC_PI_2).contains(v))
    }
}

/// Vertices `(Q₁, P₂, M, A, B, C)` built from the parameters in the scalar type of `unit`.
pub fn vertices<R: Real>(p: &TriangulationParams, unit: &R) -> [S3Point<R>; 6] {
    let l = |v: f64| unit.lit(v);
    let pi = unit.pi();
    let frac = |k: f64| pi.div(&l(k)).expect("nonzero literal");
    let (pi4, pi6) = (frac(4.0), frac(6.0));
    let q1 = S3Point::polar(&l(1.0), &l(0.0), false);
    let p2 = S3Point::polar(&l(1.0), &frac(2.0), true);
    let (s0, s1, s2, s3) = (l(p.s0), l(p.s1), l(p.s2), l(p.s3));
    let m = S3Point::polar(&s0.cos(), &pi4, true).plus(&S3Point::polar(&s0.sin(), &pi6, false));
    let a = S3Point::polar(&s1.cos(), &pi4, true).plus(&S3Point::polar(&s1.sin(), &l(p.t1), false));
    let b = S3Point::polar(&s2.cos(), &l(p.t2), true).plus(&S3Point::polar(&s2.sin(), &pi6, false));
    let z = l(0.0);
    let c = S3Point([z.clone(), s3.cos(), s3.sin(), z]);
    [q1, p2, m, a, b, c]
}

/// `48·(|Q₁AC| + |AMB| + |ABC| + |BCP₂|)`.
pub fn bound_with<R: Real>(p: &TriangulationParams, unit: &R) -> Result<R> {
    let [q1, p2, m, a, b, c] = vertices(p, unit);
    let t = [
        triangle_area(&q1, &a, &c)?,
        triangle_area(&a, &m, &b)?,
        triangle_area(&a, &b, &c)?,
        triangle_area(&b, &c, &p2)?,
    ];
    let s = t[0].add(&t[1]).add(&t[2]).add(&t[3]);
    Ok(s.mul(&unit.lit(48.0)))
}

pub fn bound(p: &TriangulationParams) -> Result<f64> {
    bound_with(p, &1.0f64)
}

/// Disc-valued bound at `digits` precision.
pub fn bound_certified(p: &TriangulationParams, digits: u32) -> Result<CC> {
    let ctx = Ctx::new(digits)?;
    bound_with(p, &ctx.one())
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub max_evals: usize,
    pub tol: f64,
    pub initial_step: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { restarts: 6, max_evals: 4000, tol: 1e-12, initial_step: 0.2 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizeResult {
    pub params: TriangulationParams,
    pub bound: f64,
    /// Upper end of the disc from the certified re-evaluation.
    pub certified_upper: f64,
    pub evaluations: usize,
}

const EPS_BOX: f64 = 1e-9;

fn project(x: &[f64]) -> [f64; 6] {
    std::array::from_fn(|k| x[k].clamp(0.0, FRAC_PI_2 - EPS_BOX))
}

fn objective(x: &[f64]) -> f64 {
    bound(&TriangulationParams::from_array(project(x))).unwrap_or(f64::INFINITY)
}

/// Derivative-free minimisation of [`bound`] over the parameter box, restarting from the
/// best point with a shrinking initial simplex; the result is re-evaluated in disc arithmetic.
pub fn optimize_bound(seed: &TriangulationParams, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    let mut evals = 0;
    let mut best = project(&seed.to_array());
    let mut best_val = objective(&best);
    let mut step = opts.initial_step;
    for _ in 0..opts.restarts.max(1) {
        let so = SimplexOptions { initial_step: step, max_evals: opts.max_evals, tol: opts.tol };
        let (x, v, e) = nelder_mead(objective, &best, &so);
        evals += e;
        if v < best_val {
            best = project(&x);
            best_val = v;
        }
        step *= 0.5;
    }
    let params = TriangulationParams::from_array(best);
    let certified = bound_certified(&params, 30)?;
    Ok(OptimizeResult { params, bound: best_val, certified_upper: certified.hi(), evaluations: evals })
}

/// Point reflections fixing the boundary polygon.
pub fn sigma_p(p: &S3Point<f64>) -> S3Point<f64> {
    let [a, b, c, d] = p.0;
    // (z, w) ↦ (z, e^{iπ/3} w̄)
    let (cs, sn) = (FRAC_PI_3.cos(), FRAC_PI_3.sin());
    S3Point([a, b, cs * c + sn * d, sn * c - cs * d])
}

pub fn sigma_q(p: &S3Point<f64>) -> S3Point<f64> {
    let [a, b, c, d] = p.0;
    // (z, w) ↦ (i z̄, w)
    S3Point([b, a, c, d])
}

/// The point `(0, e^{iπ/6})` on the axis of `σ_P`.
pub fn axis_point() -> S3Point<f64> {
    S3Point([0.0, 0.0, FRAC_PI_6.cos(), FRAC_PI_6.sin()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(k: usize) -> S3Point<f64> {
        let mut v = [0.0; 4];
        v[k] = 1.0;
        S3Point(v)
    }

    #[test]
    fn octant_triangle() {
        let a = triangle_area(&e(0), &e(1), &e(2)).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-14);
        assert!((vertex_angle(&e(0), &e(1), &e(2)).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn angle_between_boundary_edges_at_p1() {
        let q2 = S3Point([0.0, 0.0, 0.5, 3f64.sqrt() / 2.0]);
        let a = vertex_angle(&e(0), &e(2), &q2).unwrap();
        assert!((a - FRAC_PI_3).abs() < 1e-14);
    }

    #[test]
    fn antipodal_rejected() {
        let m = S3Point([-1.0, 0.0, 0.0, 0.0]);
        assert_eq!(vertex_angle(&e(0), &m, &e(1)).unwrap_err(), Error::AntipodalOrEqual);
    }

    #[test]
    fn vertices_are_unit_and_symmetric() {
        let p = TriangulationParams::PUBLISHED;
        let [_, _, m, a, b, _] = vertices(&p, &1.0);
        for v in [&m, &a, &b] {
            assert!(v.norm_defect().abs() < 1e-15);
        }
        let close = |x: &S3Point<f64>, y: &S3Point<f64>| (0..4).all(|k| (x.0[k] - y.0[k]).abs() < 1e-14);
        assert!(close(&sigma_p(&m), &m) && close(&sigma_q(&m), &m));
        assert!(close(&sigma_q(&a), &a));
        assert!(close(&sigma_p(&b), &b));
    }

    #[test]
    fn certified_bound_contains_float_bound() {
        let p = TriangulationParams::PUBLISHED;
        let f = bound(&p).unwrap();
        let c = bound_certified(&p, 30).unwrap();
        assert!(c.lo() <= f + 1e-12 && f - 1e-12 <= c.hi());
        assert!(c.radius() < 1e-20);
    }
}
