//! Optimization primitives shared by the capacity and exponent modules:
//! exponentiated-gradient (mirror) ascent on the probability simplex with
//! backtracking line search, and 1-D golden-section search with a grid
//! fallback.
//!
//! For a concave objective the reported `gap = max_i g_i - <x, g>` is a
//! certified bound on the remaining suboptimality, so `gap <= tol` means
//! the returned value is within `tol` of the global optimum.

/// Floor applied to simplex coordinates each iteration so that letters
/// with vanishing probability keep well-defined gradients.
const COORDINATE_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone)]
pub struct SimplexOpts {
    /// Stop when the concavity gap drops below this value.
    pub tol: f64,
    /// Stop when the simplex-projected gradient norm drops below this value.
    pub grad_norm_tol: f64,
    pub max_iter: usize,
}

impl Default for SimplexOpts {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            grad_norm_tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// `max_i g_i - <x, g>` at the returned point.
    pub gap: f64,
    /// Euclidean norm of the projected gradient `x_i (g_i - <x, g>)`.
    pub grad_norm: f64,
    pub converged: bool,
}

fn renormalize(x: &mut [f64]) {
    for xi in x.iter_mut() {
        if !xi.is_finite() || *xi < COORDINATE_FLOOR {
            *xi = COORDINATE_FLOOR;
        }
    }
    let s: f64 = x.iter().sum();
    for xi in x.iter_mut() {
        *xi /= s;
    }
}

fn gap_and_norm(x: &[f64], g: &[f64]) -> (f64, f64) {
    let mean: f64 = x.iter().zip(g).map(|(xi, gi)| xi * gi).sum();
    let max = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = x
        .iter()
        .zip(g)
        .map(|(xi, gi)| (xi * (gi - mean)).powi(2))
        .sum::<f64>()
        .sqrt();
    (max - mean, norm)
}

/// Maximizes `f` over the probability simplex by multiplicative-weights
/// ascent `x_i <- x_i * exp(eta * g_i)` with backtracking on `eta`.
pub fn maximize_on_simplex(
    start: &[f64],
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    opts: &SimplexOpts,
) -> SimplexOutcome {
    let mut x = start.to_vec();
    renormalize(&mut x);
    let mut value = f(&x);
    let mut eta = 1.0f64;
    let mut iterations = 0;
    let (mut gap, mut grad_norm) = (f64::INFINITY, f64::INFINITY);
    let mut stalled = 0usize;

    while iterations < opts.max_iter {
        iterations += 1;
        let g = grad(&x);
        if g.iter().any(|gi| !gi.is_finite()) {
            break;
        }
        let (cur_gap, cur_norm) = gap_and_norm(&x, &g);
        gap = cur_gap;
        grad_norm = cur_norm;
        if gap <= opts.tol || grad_norm <= opts.grad_norm_tol {
            return SimplexOutcome {
                x,
                value,
                iterations,
                gap,
                grad_norm,
                converged: true,
            };
        }
        let gmax = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = false;
        let mut step = eta;
        for _ in 0..60 {
            let mut cand: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| xi * (step * (gi - gmax)).max(-700.0).exp())
                .collect();
            renormalize(&mut cand);
            let cand_value = f(&cand);
            if cand_value.is_finite() && cand_value >= value - 1e-15 * value.abs().max(1.0) {
                let improved = cand_value > value;
                x = cand;
                value = cand_value;
                eta = if improved { step * 1.5 } else { step };
                accepted = true;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    SimplexOutcome {
        x,
        value,
        iterations,
        gap,
        grad_norm,
        converged: gap <= opts.tol || grad_norm <= opts.grad_norm_tol,
    }
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Coarse grid scan followed by golden-section refinement around the best
/// grid point. Safe for objectives that are only piecewise unimodal.
pub fn grid_then_golden(
    f: impl Fn(f64) -> f64 + Copy,
    lo: f64,
    hi: f64,
    grid_step: f64,
    tol: f64,
) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let steps = ((hi - lo) / grid_step).ceil() as usize;
    let mut best_x = lo;
    let mut best_f = f(lo);
    for k in 1..=steps {
        let x = (lo + k as f64 * grid_step).min(hi);
        let fx = f(x);
        if fx > best_f {
            best_f = fx;
            best_x = x;
        }
    }
    let a = (best_x - grid_step).max(lo);
    let b = (best_x + grid_step).min(hi);
    let (x, fx) = golden_max(f, a, b, tol);
    if fx > best_f {
        (x, fx)
    } else {
        (best_x, best_f)
    }
}
