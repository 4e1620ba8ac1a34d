//! Reliability-function machinery: the moment functions `mu` and
//! `mu_tilde`, the random-coding and expurgated exponents, the
//! random-coding error bound, the expected-tight-bound function `f`, and
//! the quasiclassical Gallager-style bound.
//!
//! Everything is evaluated base 2: exponents and rates live on one
//! bits-per-letter axis. (The expurgated moment function is sometimes
//! written with natural logarithms; the `s = 1` identity with `mu` is
//! base-independent.)

use crate::channel::{ensemble_average, CqChannel, Prior};
use crate::error::{Error, Result};
use crate::operator::{matrix_function, trace_product, DensityOperator, HermitianOperator};
use crate::optim::{grid_then_golden, maximize_on_simplex, SimplexOpts};
use crate::random::random_prior_vector;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `mu(pi, s) = -log2 Tr S_bar^{1+s} = -log2 sum_j l_j^{1+s}`, `s >= 0`.
/// `mu(pi, 0) = 0` exactly by the unit-trace convention.
pub fn mu(ch: &CqChannel, prior: &Prior, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::InvalidParameter(format!("mu needs s >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let avg = ensemble_average(ch, prior)?;
    let eigs = avg.clamped_eigenvalues()?;
    let total: f64 = eigs.iter().map(|&l| l.powf(1.0 + s)).sum();
    Ok(-total.log2())
}

/// `mu_tilde(pi, s) = -s log2 sum_ik pi_i pi_k |<psi_i|psi_k>|^{2/s}`
/// for pure-state channels; `s > 0`. Satisfies
/// `mu_tilde(pi, 1) = mu(pi, 1)`.
pub fn mu_tilde(ch: &CqChannel, prior: &Prior, s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mu_tilde needs s > 0, got {s}"
        )));
    }
    let overlaps = ch.letter_overlaps()?;
    let a = ch.alphabet_size();
    let mut w = 0.0;
    for i in 0..a {
        for k in 0..a {
            w += prior.get(i) * prior.get(k) * overlaps[(i, k)].norm_sqr().powf(1.0 / s);
        }
    }
    Ok(-s * w.log2())
}

/// Options for the exponent maximizations.
#[derive(Debug, Clone)]
pub struct ExponentOpts {
    /// Cap on `s` for the expurgated exponent (which diverges for
    /// ensembles with orthogonal letters as the rate goes to 0).
    pub s_max: f64,
    /// Grid resolution of the `s` scan on `[0, 1]`.
    pub grid_step: f64,
    /// Golden-section refinement tolerance on `s`.
    pub refine_tol: f64,
    /// Restarts for the (possibly non-convex) expurgated prior search.
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for ExponentOpts {
    fn default() -> Self {
        Self {
            s_max: 100.0,
            grid_step: 1e-3,
            refine_tol: 1e-8,
            restarts: 3,
            seed: 0,
            max_iter: 10_000,
        }
    }
}

/// One point of a reliability curve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExponentPoint {
    pub rate: f64,
    pub value: f64,
    pub s_opt: f64,
    pub prior: Vec<f64>,
    /// The `s` cap was binding (expurgated exponent at very low rates).
    pub saturated: bool,
}

/// Sampled reliability curves.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExponentCurve {
    pub random_coding: Vec<ExponentPoint>,
    /// Present for pure-state channels only.
    pub expurgated: Option<Vec<ExponentPoint>>,
}

/// Solver for `max_pi mu(pi, s)`: minimizing `Tr S_bar^{1+s}` is convex,
/// so the mirror-descent solve is certified. Successive calls warm-start
/// from the previous optimizer, which makes grid/golden scans over `s`
/// cheap.
struct MuStarSolver<'a> {
    ch: &'a CqChannel,
    warm: std::cell::RefCell<Vec<f64>>,
    max_iter: usize,
}

impl<'a> MuStarSolver<'a> {
    fn new(ch: &'a CqChannel, max_iter: usize) -> Self {
        let a = ch.alphabet_size();
        Self {
            ch,
            warm: std::cell::RefCell::new(vec![1.0 / a as f64; a]),
            max_iter,
        }
    }

    fn eval(&self, s: f64, tol: f64) -> (f64, Vec<f64>) {
        let a = self.ch.alphabet_size();
        if s == 0.0 {
            return (0.0, vec![1.0 / a as f64; a]);
        }
        let ch = self.ch;
        let trace_power = |p: &[f64]| -> f64 {
            let prior = Prior::new(normalize(p)).expect("normalized");
            let avg = ensemble_average(ch, &prior).expect("lengths match");
            avg.clamped_eigenvalues()
                .expect("eig")
                .iter()
                .map(|&l| l.powf(1.0 + s))
                .sum()
        };
        let grad = |p: &[f64]| -> Vec<f64> {
            let prior = Prior::new(normalize(p)).expect("normalized");
            let avg = ensemble_average(ch, &prior).expect("lengths match");
            let power = matrix_function(avg.herm(), |l| l.max(0.0).powf(s)).expect("eig");
            ch.states()
                .iter()
                .map(|st| -(1.0 + s) * trace_product(st.herm(), &power))
                .collect()
        };
        let start = self.warm.borrow().clone();
        let out = maximize_on_simplex(
            &start,
            |p| -trace_power(p),
            grad,
            &SimplexOpts {
                tol,
                grad_norm_tol: tol,
                max_iter: self.max_iter,
            },
        );
        *self.warm.borrow_mut() = out.x.clone();
        ((-(-out.value).log2()).max(0.0), normalize(&out.x))
    }
}

fn mu_star(ch: &CqChannel, s: f64, max_iter: usize) -> Result<(f64, Vec<f64>)> {
    Ok(MuStarSolver::new(ch, max_iter).eval(s, 1e-13))
}

fn normalize(p: &[f64]) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter().map(|&x| (x / s).max(0.0)).collect()
}

/// Random-coding exponent
/// `E_r(R) = max_pi max_{0 <= s <= 1} (mu(pi, s) - s R)`.
pub fn random_coding_exponent(
    ch: &CqChannel,
    rate: f64,
    opts: &ExponentOpts,
) -> Result<ExponentPoint> {
    if rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rate must be >= 0, got {rate}"
        )));
    }
    let solver = MuStarSolver::new(ch, opts.max_iter);
    let coarse_objective = |s: f64| solver.eval(s, 1e-9).0 - s * rate;
    // coarse scan, then golden refinement at full precision; the inner
    // solves warm-start from each other so the scan is cheap
    let coarse = (opts.grid_step * 50.0).clamp(0.02, 0.1);
    let mut best_s = 0.0f64;
    let mut best_v = 0.0f64;
    let mut s = 0.0f64;
    while s < 1.0 + 1e-12 {
        let v = coarse_objective(s.min(1.0));
        if v > best_v {
            best_v = v;
            best_s = s.min(1.0);
        }
        s += coarse;
    }
    let lo = (best_s - coarse).max(0.0);
    let hi = (best_s + coarse).min(1.0);
    let objective = |s: f64| solver.eval(s, 1e-12).0 - s * rate;
    let (s_opt, value) = grid_then_golden(objective, lo, hi, coarse / 4.0, opts.refine_tol);
    let (s_opt, value) = if value <= 0.0 { (0.0, 0.0) } else { (s_opt, value) };
    let (_, prior) = solver.eval(s_opt, 1e-13);
    Ok(ExponentPoint {
        rate,
        value,
        s_opt,
        prior,
        saturated: false,
    })
}

/// `max_pi mu_tilde(pi, s)` by minimizing the (possibly non-convex)
/// quadratic form `sum pi_i pi_k |<psi_i|psi_k>|^{2/s}` with multistart
/// mirror descent; best value found.
fn mu_tilde_star(ch: &CqChannel, s: f64, opts: &ExponentOpts) -> Result<(f64, Vec<f64>)> {
    let overlaps = ch.letter_overlaps()?;
    let a = ch.alphabet_size();
    let mut b = vec![vec![0.0; a]; a];
    for i in 0..a {
        for k in 0..a {
            b[i][k] = overlaps[(i, k)].norm_sqr().powf(1.0 / s);
        }
    }
    let quad = |p: &[f64]| -> f64 {
        let p = normalize(p);
        let mut acc = 0.0;
        for i in 0..a {
            for k in 0..a {
                acc += p[i] * p[k] * b[i][k];
            }
        }
        acc
    };
    let grad = |p: &[f64]| -> Vec<f64> {
        let p = normalize(p);
        (0..a)
            .map(|i| -2.0 * (0..a).map(|k| b[i][k] * p[k]).sum::<f64>())
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![vec![1.0 / a as f64; a]];
    for _ in 0..opts.restarts {
        starts.push(random_prior_vector(&mut rng, a));
    }
    let mut best_w = f64::INFINITY;
    let mut best_p = vec![1.0 / a as f64; a];
    for start in starts {
        let out = maximize_on_simplex(
            &start,
            |p| -quad(p),
            &grad,
            &SimplexOpts {
                tol: 1e-13,
                grad_norm_tol: 1e-13,
                max_iter: opts.max_iter,
            },
        );
        let w = -out.value;
        if w < best_w {
            best_w = w;
            best_p = normalize(&out.x);
        }
    }
    Ok((-s * best_w.log2(), best_p))
}

/// Expurgated exponent
/// `E_ex(R) = max_pi max_{s >= 1} (mu_tilde(pi, s) - s R)`, with `s`
/// capped at `opts.s_max`; pure-state channels only.
pub fn expurgated_exponent(
    ch: &CqChannel,
    rate: f64,
    opts: &ExponentOpts,
) -> Result<ExponentPoint> {
    if rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rate must be >= 0, got {rate}"
        )));
    }
    let objective = |s: f64| -> f64 {
        mu_tilde_star(ch, s, opts)
            .map(|(m, _)| m - s * rate)
            .unwrap_or(f64::NEG_INFINITY)
    };
    // log-spaced coarse scan of [1, s_max], then golden refinement
    let mut best_s = 1.0;
    let mut best_v = objective(1.0);
    let points = 160;
    for k in 1..=points {
        let s = (opts.s_max.ln() * k as f64 / points as f64).exp();
        let v = objective(s);
        if v > best_v {
            best_v = v;
            best_s = s;
        }
    }
    let lo = (best_s / 1.6).max(1.0);
    let hi = (best_s * 1.6).min(opts.s_max);
    let (s_opt, value) = grid_then_golden(&objective, lo, hi, (hi - lo) / 24.0, opts.refine_tol);
    let (s_opt, value) = if value > best_v {
        (s_opt, value)
    } else {
        (best_s, best_v)
    };
    let saturated = s_opt >= opts.s_max * (1.0 - 1e-6);
    let (_, prior) = mu_tilde_star(ch, s_opt, opts)?;
    Ok(ExponentPoint {
        rate,
        value: value.max(0.0),
        s_opt,
        prior,
        saturated,
    })
}

/// Samples both reliability curves on a uniform rate grid.
pub fn exponent_curve(
    ch: &CqChannel,
    rmin: f64,
    rmax: f64,
    steps: usize,
    opts: &ExponentOpts,
) -> Result<ExponentCurve> {
    if steps < 1 || rmax < rmin || rmin < 0.0 {
        return Err(Error::InvalidParameter(
            "exponent curve needs 0 <= rmin <= rmax and steps >= 1".into(),
        ));
    }
    let rates: Vec<f64> = (0..=steps)
        .map(|k| rmin + (rmax - rmin) * k as f64 / steps as f64)
        .collect();
    let random_coding = rates
        .iter()
        .map(|&r| random_coding_exponent(ch, r, opts))
        .collect::<Result<Vec<_>>>()?;
    let expurgated = if ch.is_pure() {
        Some(
            rates
                .iter()
                .map(|&r| expurgated_exponent(ch, r, opts))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(ExponentCurve {
        random_coding,
        expurgated,
    })
}

/// The random-coding bound on the expected minimal error:
/// `2 (M-1)^s [Tr S_bar^{1+s}]^n`, valid for every `0 <= s <= 1`.
#[derive(Debug, Clone, Copy)]
pub struct Theorem1Bound {
    pub value: f64,
    pub s_opt: f64,
}

pub fn theorem1_bound(
    ch: &CqChannel,
    prior: &Prior,
    m: usize,
    n: usize,
    s: Option<f64>,
) -> Result<Theorem1Bound> {
    let avg = ensemble_average(ch, prior)?;
    let eigs = avg.clamped_eigenvalues()?;
    let value_at = |s: f64| -> f64 {
        let t: f64 = eigs.iter().map(|&l| l.powf(1.0 + s)).sum();
        2.0 * ((m - 1) as f64).powf(s) * t.powi(n as i32)
    };
    match s {
        Some(s) => {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidParameter(format!(
                    "theorem1_bound needs 0 <= s <= 1, got {s}"
                )));
            }
            Ok(Theorem1Bound {
                value: value_at(s),
                s_opt: s,
            })
        }
        None => {
            let (s_opt, neg) = grid_then_golden(|s| -value_at(s), 0.0, 1.0, 0.01, 1e-10);
            Ok(Theorem1Bound {
                value: -neg,
                s_opt,
            })
        }
    }
}

/// The expected-tight-bound integrand
/// `f(z) = (2/M)[1 - sqrt(1 + (M-1) z) + (M-1)(1 - sqrt(1 - z))]`,
/// defined for `z` in `[0, 1]`.
pub fn f_of_z(z: f64, m: usize) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&z) {
        return Err(Error::InvalidParameter(format!(
            "f is defined on [0, 1], got z = {z}"
        )));
    }
    let z = z.clamp(0.0, 1.0);
    let mf = m as f64;
    Ok((2.0 / mf) * (1.0 - (1.0 + (mf - 1.0) * z).sqrt() + (mf - 1.0) * (1.0 - (1.0 - z).sqrt())))
}

fn compositions(n: u32, parts: usize, visit: &mut impl FnMut(&[u32])) {
    fn rec(remaining: u32, slot: usize, buf: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
        if slot + 1 == buf.capacity() {
            buf.push(remaining);
            visit(buf);
            buf.pop();
            return;
        }
        for k in 0..=remaining {
            buf.push(k);
            rec(remaining - k, slot + 1, buf, visit);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(parts);
    rec(n, 0, &mut buf, visit);
}

fn multinomial(n: u32, counts: &[u32]) -> f64 {
    let mut remaining = n;
    let mut acc = 1.0f64;
    for &k in counts {
        // C(remaining, k) accumulated multiplicatively
        let mut c = 1.0f64;
        for j in 0..k {
            c = c * (remaining - j) as f64 / (j + 1) as f64;
        }
        acc *= c;
        remaining -= k;
    }
    acc
}

/// `Tr f(S_bar^{(x)n})` for the function above, computed from the
/// multinomial structure of the eigenvalue products of the base spectrum
/// without materializing the tensor power.
pub fn expected_tight_bound(ch: &CqChannel, prior: &Prior, n: usize, m: usize) -> Result<f64> {
    let avg = ensemble_average(ch, prior)?;
    let eigs = avg.clamped_eigenvalues()?;
    let d = eigs.len();
    let mut total = 0.0;
    let mut err = None;
    compositions(n as u32, d, &mut |counts| {
        let mut prod = 1.0f64;
        for (l, &c) in eigs.iter().zip(counts) {
            if c > 0 {
                prod *= l.powi(c as i32);
            }
        }
        match f_of_z(prod, m) {
            Ok(f) => total += multinomial(n as u32, counts) * f,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// The Gallager-style bound
/// `(M-1)^s (Tr [sum_i pi_i S_i^{1/(1+s)}]^{1+s})^n`.
///
/// For quasiclassical (commuting) channels this is the classical
/// random-coding bound; the expression is evaluated for arbitrary
/// density operators, with `quasiclassical` marking whether it is a
/// proven bound for this channel.
#[derive(Debug, Clone, Copy)]
pub struct GallagerBound {
    pub value: f64,
    pub quasiclassical: bool,
}

pub fn gallager_quasiclassical_bound(
    ch: &CqChannel,
    prior: &Prior,
    m: usize,
    n: usize,
    s: f64,
) -> Result<GallagerBound> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "gallager bound needs 0 <= s <= 1, got {s}"
        )));
    }
    if prior.len() != ch.alphabet_size() {
        return Err(Error::LengthMismatch {
            expected: ch.alphabet_size(),
            got: prior.len(),
        });
    }
    let dim = ch.dim();
    let mut mixed = HermitianOperator::zeros(dim);
    for (i, st) in ch.states().iter().enumerate() {
        let root = matrix_function(st.herm(), |l| l.max(0.0).powf(1.0 / (1.0 + s)))?;
        mixed = mixed.add(&root.scale(prior.get(i)))?;
    }
    let lifted = matrix_function(&mixed, |l| l.max(0.0).powf(1.0 + s))?;
    let value = ((m - 1) as f64).powf(s) * lifted.trace().powi(n as i32);
    Ok(GallagerBound {
        value,
        quasiclassical: ch.is_quasiclassical(1e-10)?,
    })
}

/// Checks the letter states pairwise-commute; re-exported convenience for
/// report code.
pub fn is_quasiclassical(ch: &CqChannel) -> Result<bool> {
    ch.is_quasiclassical(1e-10)
}

#[allow(unused_imports)]
use crate::operator::von_neumann_entropy;
