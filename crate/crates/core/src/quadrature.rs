//! Quadrature rules used by the Doppler velocity average.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes beyond this carry weights below e^{-702} and are dropped.
const NODE_CUTOFF: f64 = 26.5;

/// Gauss–Hermite rule for the weight e^{−x²}.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    /// Number of nodes of the full rule, including dropped ones.
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Σ wₖ g(xₖ) ≈ ∫ e^{−x²} g(x) dx.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, mut g: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// Cached `n`-point Gauss–Hermite rule.
pub fn gauss_hermite(n: usize) -> Arc<GaussHermite> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build_gauss_hermite(n));
    cache
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&rule))
        .clone()
}

fn build_gauss_hermite(n: usize) -> GaussHermite {
    assert!(n >= 1, "Gauss-Hermite order must be positive");
    // Golub–Welsch: the nodes are the eigenvalues of the Jacobi matrix with
    // zero diagonal and off-diagonal √(k/2).
    let mut diag = vec![0.0; n];
    let mut off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    off.push(0.0);
    tridiagonal_eigenvalues(&mut diag, &mut off);
    diag.sort_by(|a, b| a.total_cmp(b));

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for &guess in diag.iter().filter(|x| x.abs() <= NODE_CUTOFF) {
        // Polish on the Hermite-function recurrence, which also yields the
        // weight e^{−x²}/(n ψ_{n−1}(x)²).
        let mut x = guess;
        let mut prev = 0.0;
        for _ in 0..3 {
            let (psi_n, psi_nm1) = hermite_functions(n, x);
            let deriv = (2.0 * n as f64).sqrt() * psi_nm1 - x * psi_n;
            x -= psi_n / deriv;
            prev = psi_nm1;
        }
        let (_, psi_nm1) = hermite_functions(n, x);
        let psi_nm1 = if psi_nm1 == 0.0 { prev } else { psi_nm1 };
        nodes.push(x);
        weights.push((-x * x).exp() / (n as f64 * psi_nm1 * psi_nm1));
    }
    GaussHermite {
        order: n,
        nodes,
        weights,
    }
}

/// Normalized Hermite functions (ψₙ(x), ψₙ₋₁(x)).
fn hermite_functions(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 1..=n {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * x * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Implicit QL with Wilkinson shifts; eigenvalues only, overwritten into
/// `diag`. `off[i]` couples rows i and i+1; the last entry is scratch.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations < 100, "tridiagonal QL failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

fn relative_change(last: Complex64, previous: Complex64) -> f64 {
    let scale = last.norm().max(previous.norm());
    if scale == 0.0 {
        0.0
    } else {
        (last - previous).norm() / scale
    }
}

/// Integrate ∫ e^{−x²} g(x) dx with Gauss–Hermite rules of order 16, 32, …
/// until two successive orders agree to `tol`, or `budget` is exceeded.
pub fn gauss_hermite_adaptive<F>(mut g: F, tol: f64, budget: usize) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let mut n = 16;
    let mut earlier = None;
    let mut previous = gauss_hermite(n).integrate(&mut g);
    while n * 2 <= budget {
        n *= 2;
        let last = gauss_hermite(n).integrate(&mut g);
        if relative_change(last, previous) < tol {
            return Ok(last);
        }
        earlier = Some(previous);
        previous = last;
    }
    let earlier = earlier.unwrap_or(previous);
    Err(Error::Quadrature {
        nodes: n,
        last: previous,
        previous: earlier,
        relative_change: relative_change(previous, earlier),
    })
}

/// Nested trapezoid rule on [a, b], halving the step until successive
/// estimates agree to `tol`. At most 2^`max_level` panels.
pub fn trapezoid_adaptive<F>(mut f: F, a: f64, b: f64, tol: f64, max_level: u32) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let mut panels = 16usize;
    let mut h = (b - a) / panels as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for k in 1..panels {
        sum += f(a + k as f64 * h);
    }
    let mut estimate = sum * h;
    let mut level = 4;
    while level < max_level {
        h *= 0.5;
        for k in 0..panels {
            sum += f(a + (2 * k + 1) as f64 * h);
        }
        panels *= 2;
        level += 1;
        let refined = sum * h;
        let change = relative_change(refined, estimate);
        if change < tol && level >= 6 {
            return Ok(refined);
        }
        if level == max_level {
            return Err(Error::Quadrature {
                nodes: panels + 1,
                last: refined,
                previous: estimate,
                relative_change: change,
            });
        }
        estimate = refined;
    }
    Err(Error::Contract(format!(
        "trapezoid max_level {max_level} must exceed the initial level 4"
    )))
}
