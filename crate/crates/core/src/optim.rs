//! Derivative-free minimisation (Nelder–Mead simplex).

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below `tol·(1 + |best|)`.
    pub tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { initial_step: 0.1, max_evals: 5000, tol: 1e-12 }
    }
}

/// Minimises `f` from `x0`; `f` may return `+∞` for rejected points.
/// Returns the best vertex, its value and the number of evaluations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: Vec<f64>, evals: &mut usize| {
        *evals += 1;
        let v = f(&x);
        (x, if v.is_nan() { f64::INFINITY } else { v })
    };
    let mut s: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    s.push(eval(x0.to_vec(), &mut evals));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += opts.initial_step;
        s.push(eval(x, &mut evals));
    }
    while evals < opts.max_evals {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = s[n].1 - s[0].1;
        if s[0].1.is_finite() && spread.is_finite() && spread <= opts.tol * (1.0 + s[0].1.abs()) {
            break;
        }
        let mut cen = vec![0.0; n];
        for (x, _) in &s[..n] {
            for k in 0..n {
                cen[k] += x[k] / n as f64;
            }
        }
        let worst = s[n].0.clone();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| cen[k] + t * (worst[k] - cen[k])).collect() };
        let r = eval(along(-1.0), &mut evals);
        if r.1 < s[0].1 {
            let e = eval(along(-2.0), &mut evals);
            s[n] = if e.1 < r.1 { e } else { r };
        } else if r.1 < s[n - 1].1 {
            s[n] = r;
        } else {
            let c = if r.1 < s[n].1 { eval(along(-0.5), &mut evals) } else { eval(along(0.5), &mut evals) };
            if c.1 < s[n].1.min(r.1) {
                s[n] = c;
            } else {
                let best = s[0].0.clone();
                for j in 1..=n {
                    let x: Vec<f64> = (0..n).map(|k| best[k] + 0.5 * (s[j].0[k] - best[k])).collect();
                    s[j] = eval(x, &mut evals);
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = s.swap_remove(0);
    (x, v, evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = SimplexOptions { initial_step: 0.5, max_evals: 20000, tol: 1e-16 };
        let (x, v, _) = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!(v < 1e-10, "{x:?} {v}");
    }
}
