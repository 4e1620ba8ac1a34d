//! Capacity-like scalar quantities: the maximized Holevo quantity, the
//! quadratic overlap bound, accessible information via measurement
//! optimization, capacity under an additive cost constraint, and the
//! infinite-band photon-channel closed form.
//!
//! The Holevo maximization and the quadratic bound are concave/convex
//! problems over the simplex, so the returned values carry a certified
//! optimality gap. Accessible information is a non-concave search and is
//! reported as a certified lower estimate only.

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    ensemble_average, holevo_quantity, mutual_information, transition_probabilities, CqChannel,
    Povm, Prior,
};
use crate::error::{Error, Result};
use crate::operator::{
    eig_hermitian, pinv_sqrt, trace_product, von_neumann_entropy, ComplexVector,
    HermitianOperator,
};
use crate::optim::{maximize_on_simplex, SimplexOpts, SimplexOutcome};
use crate::random::random_pure;

/// Options shared by the prior optimizers.
#[derive(Debug, Clone)]
pub struct OptimOpts {
    /// Certified-gap tolerance in bits for the concave problems.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for the random restarts in non-concave searches.
    pub seed: u64,
    /// Number of random restarts for the measurement search.
    pub restarts: usize,
    /// Gradient-ascent steps per measurement-improvement round.
    pub povm_steps: usize,
}

impl Default for OptimOpts {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 10_000,
            seed: 0,
            restarts: 4,
            povm_steps: 40,
        }
    }
}

/// Outcome of a capacity-style optimization.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// Value in bits.
    pub value: f64,
    pub prior: Prior,
    pub iterations: usize,
    /// Simplex-projected gradient norm (or certified gap for the
    /// measurement search) at the returned point.
    pub gradient_norm: f64,
    /// False when the iteration budget ran out before the tolerance.
    pub converged: bool,
}

fn log2_floored(h: &HermitianOperator) -> Result<HermitianOperator> {
    let spec = eig_hermitian(h)?;
    Ok(spec.apply(|l| l.max(1e-300).log2()))
}

/// Gradient of the Holevo quantity: `D(S_i || S_bar)` in bits (up to an
/// additive constant that the simplex update ignores).
fn holevo_gradient(
    ch: &CqChannel,
    prior: &[f64],
    letter_entropies: &[f64],
) -> Result<Vec<f64>> {
    let avg = ensemble_average(ch, &Prior::new(normalize(prior))?)?;
    let log_avg = log2_floored(avg.herm())?;
    Ok(ch
        .states()
        .iter()
        .zip(letter_entropies)
        .map(|(s, &h)| -h - trace_product(s.herm(), &log_avg))
        .collect())
}

fn normalize(p: &[f64]) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter().map(|&x| (x / s).max(0.0)).collect()
}

fn outcome_to_result(out: SimplexOutcome, value: f64) -> Result<CapacityResult> {
    Ok(CapacityResult {
        value,
        prior: Prior::new(normalize(&out.x))?,
        iterations: out.iterations,
        gradient_norm: out.grad_norm,
        converged: out.converged,
    })
}

/// Maximizes the Holevo quantity over priors: the channel capacity.
///
/// Exponentiated-gradient ascent from the uniform prior (which also
/// resolves ties toward the maximum-entropy optimizer); the stopping gap
/// `max_i D(S_i||S_bar) - dH(pi)` certifies the value to within
/// `opts.tol` bits.
pub fn maximize_holevo(ch: &CqChannel, opts: &OptimOpts) -> Result<CapacityResult> {
    let a = ch.alphabet_size();
    let letter_entropies: Vec<f64> = ch
        .states()
        .iter()
        .map(von_neumann_entropy)
        .collect::<Result<_>>()?;
    let f = |p: &[f64]| match Prior::new(normalize(p)) {
        Ok(prior) => holevo_quantity(ch, &prior).unwrap_or(f64::NEG_INFINITY),
        Err(_) => f64::NEG_INFINITY,
    };
    let g = |p: &[f64]| {
        holevo_gradient(ch, p, &letter_entropies).unwrap_or_else(|_| vec![f64::NAN; a])
    };
    let out = maximize_on_simplex(
        &vec![1.0 / a as f64; a],
        f,
        g,
        &SimplexOpts {
            tol: opts.tol,
            grad_norm_tol: 1e-8,
            max_iter: opts.max_iter,
        },
    );
    let value = out.value.max(0.0);
    outcome_to_result(out, value)
}

/// The quadratic overlap bound: `-log2 min_pi Tr S_bar^2`, with the
/// minimum taken over the simplex. For pure-state channels this equals
/// `-log2 min_pi sum_ij pi_i pi_j |<psi_i|psi_j>|^2`.
pub fn c_tilde(ch: &CqChannel, opts: &OptimOpts) -> Result<CapacityResult> {
    let a = ch.alphabet_size();
    let mut q = vec![vec![0.0; a]; a];
    for i in 0..a {
        for j in 0..a {
            q[i][j] = trace_product(ch.state(i).herm(), ch.state(j).herm());
        }
    }
    let quad = |p: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..a {
            for j in 0..a {
                acc += p[i] * p[j] * q[i][j];
            }
        }
        acc
    };
    let f = |p: &[f64]| -quad(&normalize(p));
    let g = |p: &[f64]| {
        let p = normalize(p);
        (0..a)
            .map(|i| -2.0 * (0..a).map(|j| q[i][j] * p[j]).sum::<f64>())
            .collect()
    };
    let out = maximize_on_simplex(
        &vec![1.0 / a as f64; a],
        f,
        g,
        &SimplexOpts {
            tol: 1e-12,
            grad_norm_tol: 1e-12,
            max_iter: opts.max_iter,
        },
    );
    let value = (-(-out.value).log2()).max(0.0);
    outcome_to_result(out, value)
}

/// Classical Blahut-Arimoto iteration for a fixed transition matrix.
/// Returns `(prior, information_bits, certified_gap, iterations)`.
fn arimoto(
    transitions: &[Vec<f64>],
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, f64, usize) {
    let a = transitions.len();
    let outputs = transitions.first().map_or(0, Vec::len);
    let mut pi = normalize(start);
    pi.iter_mut().for_each(|x| *x = x.max(1e-16));
    pi = normalize(&pi);
    let mut value = 0.0;
    let mut gap = f64::INFINITY;
    let mut iters = 0;
    for _ in 0..max_iter {
        iters += 1;
        let mut q = vec![0.0; outputs];
        for (i, row) in transitions.iter().enumerate() {
            for (j, &pji) in row.iter().enumerate() {
                q[j] += pi[i] * pji;
            }
        }
        let d: Vec<f64> = transitions
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(j, &pji)| pji > 1e-15 && q[j] > 1e-300)
                    .map(|(j, &pji)| pji * (pji / q[j]).log2())
                    .sum()
            })
            .collect();
        value = pi.iter().zip(&d).map(|(p, di)| p * di).sum();
        let dmax = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        gap = dmax - value;
        if gap <= tol {
            break;
        }
        for i in 0..a {
            pi[i] *= (d[i] - dmax).exp2().max(1e-300);
        }
        pi = normalize(&pi);
        pi.iter_mut().for_each(|x| *x = x.max(1e-18));
        pi = normalize(&pi);
    }
    (pi, value.max(0.0), gap, iters)
}

/// The pretty-good (square-root) measurement of the ensemble:
/// `X_i = S_bar^{-1/2} pi_i S_i S_bar^{-1/2}`, completed with the
/// projector onto the kernel of `S_bar` when needed.
pub fn pretty_good_measurement(ch: &CqChannel, prior: &Prior) -> Result<Povm> {
    let avg = ensemble_average(ch, prior)?;
    let root = pinv_sqrt(avg.herm(), None)?;
    let mut elements: Vec<HermitianOperator> = ch
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            HermitianOperator::new(
                root.matrix() * s.matrix() * root.matrix() * Complex64::new(prior.get(i), 0.0),
            )
        })
        .collect::<Result<_>>()?;
    let mut sum = HermitianOperator::zeros(ch.dim());
    for e in &elements {
        sum = sum.add(e)?;
    }
    let gap = HermitianOperator::identity(ch.dim()).sub(&sum)?;
    if gap.operator_norm()? > 1e-9 {
        elements.push(gap);
    }
    Povm::new(elements)
}

/// Builds a rank-1 POVM from arbitrary vectors by the normalization
/// `X_k = T^{-1/2} v_k v_k^dagger T^{-1/2}`, `T = sum v_k v_k^dagger`,
/// completed on the kernel of `T`.
fn povm_from_vectors(dim: usize, vectors: &[ComplexVector]) -> Result<Povm> {
    let mut t = crate::operator::ComplexMatrix::zeros(dim, dim);
    for v in vectors {
        t += v * v.adjoint();
    }
    let t = HermitianOperator::new(t)?;
    let root = pinv_sqrt(&t, None)?;
    let mut elements: Vec<HermitianOperator> = vectors
        .iter()
        .map(|v| {
            let w = root.matrix() * v;
            HermitianOperator::new(&w * w.adjoint())
        })
        .collect::<Result<_>>()?;
    let mut sum = HermitianOperator::zeros(dim);
    for e in &elements {
        sum = sum.add(e)?;
    }
    let gap = HermitianOperator::identity(dim).sub(&sum)?;
    if gap.operator_norm()? > 1e-9 {
        elements.push(gap);
    }
    Povm::new(elements)
}

fn info_of_vectors(ch: &CqChannel, prior: &Prior, params: &[f64], dim: usize) -> f64 {
    let vectors: Vec<ComplexVector> = params
        .chunks(2 * dim)
        .map(|chunk| {
            ComplexVector::from_fn(dim, |i, _| Complex64::new(chunk[2 * i], chunk[2 * i + 1]))
        })
        .collect();
    match povm_from_vectors(dim, &vectors) {
        Ok(povm) => match transition_probabilities(ch, &povm) {
            Ok(p) => mutual_information(prior, &p),
            Err(_) => f64::NEG_INFINITY,
        },
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Finite-difference gradient ascent on the outcome vectors.
fn ascend_vectors(
    ch: &CqChannel,
    prior: &Prior,
    params: &mut Vec<f64>,
    steps: usize,
) -> f64 {
    let dim = ch.dim();
    let h = 1e-5;
    let mut value = info_of_vectors(ch, prior, params, dim);
    let mut step = 0.05;
    for _ in 0..steps {
        let mut grad = vec![0.0; params.len()];
        for k in 0..params.len() {
            let orig = params[k];
            params[k] = orig + h;
            let up = info_of_vectors(ch, prior, params, dim);
            params[k] = orig - h;
            let down = info_of_vectors(ch, prior, params, dim);
            params[k] = orig;
            grad[k] = (up - down) / (2.0 * h);
        }
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm < 1e-10 {
            break;
        }
        let mut accepted = false;
        for _ in 0..25 {
            let cand: Vec<f64> = params
                .iter()
                .zip(&grad)
                .map(|(p, g)| p + step * g / norm)
                .collect();
            let cand_value = info_of_vectors(ch, prior, &cand, dim);
            if cand_value > value + 1e-14 {
                *params = cand;
                value = cand_value;
                step *= 1.3;
                accepted = true;
                break;
            }
            step *= 0.4;
            if step < 1e-9 {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    value
}

fn povm_to_params(povm: &Povm, dim: usize) -> Result<Vec<f64>> {
    // factor each element as sum of scaled eigenvectors (rank-1 pieces)
    let mut params = Vec::new();
    for e in povm.elements() {
        let spec = eig_hermitian(e)?;
        for (k, &l) in spec.eigenvalues.iter().enumerate() {
            if l > 1e-12 {
                let col = spec.eigenvectors.column(k) * Complex64::new(l.sqrt(), 0.0);
                for i in 0..dim {
                    params.push(col[i].re);
                    params.push(col[i].im);
                }
            }
        }
    }
    Ok(params)
}

/// Certified lower estimate of the accessible information
/// `sup_{pi, X} I_1(pi, X)` by alternating measurement and prior
/// optimization with deterministic and random restarts.
///
/// The measurement search is non-concave, so no global-optimality claim
/// is made: the result is the best value found.
pub fn accessible_information(ch: &CqChannel, opts: &OptimOpts) -> Result<CapacityResult> {
    let dim = ch.dim();
    let a = ch.alphabet_size();
    let outcomes = dim * dim;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut best_value = f64::NEG_INFINITY;
    let mut best_prior = Prior::uniform(a);
    let mut best_gap = f64::INFINITY;
    let mut total_rounds = 0;

    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(povm_to_params(&Povm::computational_basis(dim), dim)?);
    starts.push(povm_to_params(
        &pretty_good_measurement(ch, &Prior::uniform(a))?,
        dim,
    )?);
    for _ in 0..opts.restarts {
        let mut params = Vec::with_capacity(2 * dim * outcomes);
        for _ in 0..outcomes {
            let v = random_pure(&mut rng, dim);
            for i in 0..dim {
                params.push(v.vector()[i].re);
                params.push(v.vector()[i].im);
            }
        }
        starts.push(params);
    }

    for mut params in starts {
        let mut prior = Prior::uniform(a);
        for round in 0..3 {
            total_rounds += 1;
            // prior step at fixed measurement
            let vectors: Vec<ComplexVector> = params
                .chunks(2 * dim)
                .map(|c| ComplexVector::from_fn(dim, |i, _| Complex64::new(c[2 * i], c[2 * i + 1])))
                .collect();
            let povm = match povm_from_vectors(dim, &vectors) {
                Ok(p) => p,
                Err(_) => break,
            };
            let trans = transition_probabilities(ch, &povm)?;
            let (pi, value, gap, _) =
                arimoto(&trans, prior.probabilities(), 1e-9, opts.max_iter);
            prior = Prior::new(normalize(&pi))?;
            if value > best_value {
                best_value = value;
                best_prior = prior.clone();
                best_gap = gap;
            }
            // the prior may have moved: re-seed from its pretty-good
            // measurement if that is already better
            let pgm = pretty_good_measurement(ch, &prior)?;
            let pgm_value = mutual_information(&prior, &transition_probabilities(ch, &pgm)?);
            if pgm_value > info_of_vectors(ch, &prior, &params, dim) {
                params = povm_to_params(&pgm, dim)?;
            }
            // measurement step at fixed prior
            let steps = if round == 0 {
                opts.povm_steps
            } else {
                opts.povm_steps / 2
            };
            let value = ascend_vectors(ch, &prior, &mut params, steps);
            if value > best_value {
                best_value = value;
                best_prior = prior.clone();
            }
        }
    }

    Ok(CapacityResult {
        value: best_value.max(0.0),
        prior: best_prior,
        iterations: total_rounds,
        gradient_norm: best_gap,
        converged: true,
    })
}

/// Additive cost constraint: admissible priors satisfy
/// `sum_i pi_i costs_i <= budget`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CostConstraint {
    pub costs: Vec<f64>,
    pub budget: f64,
}

impl CostConstraint {
    pub fn new(costs: Vec<f64>, budget: f64) -> Result<Self> {
        if costs.iter().any(|c| !c.is_finite()) || !budget.is_finite() {
            return Err(Error::InvalidParameter(
                "costs and budget must be finite".into(),
            ));
        }
        Ok(Self { costs, budget })
    }

    pub fn word_cost(&self, letters: &[usize]) -> f64 {
        letters.iter().map(|&l| self.costs[l]).sum()
    }

    pub fn prior_cost(&self, prior: &Prior) -> f64 {
        prior
            .probabilities()
            .iter()
            .zip(&self.costs)
            .map(|(p, c)| p * c)
            .sum()
    }
}

fn penalized_maximize(
    ch: &CqChannel,
    letter_entropies: &[f64],
    costs: &[f64],
    r: f64,
    start: &[f64],
    opts: &OptimOpts,
) -> Result<SimplexOutcome> {
    let a = ch.alphabet_size();
    let f = |p: &[f64]| {
        let p = normalize(p);
        let cost: f64 = p.iter().zip(costs).map(|(pi, c)| pi * c).sum();
        match Prior::new(p) {
            Ok(prior) => {
                holevo_quantity(ch, &prior).unwrap_or(f64::NEG_INFINITY) - r * cost
            }
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let g = |p: &[f64]| match holevo_gradient(ch, p, letter_entropies) {
        Ok(mut grad) => {
            for (gi, c) in grad.iter_mut().zip(costs) {
                *gi -= r * c;
            }
            grad
        }
        Err(_) => vec![f64::NAN; a],
    };
    Ok(maximize_on_simplex(
        start,
        f,
        g,
        &SimplexOpts {
            tol: opts.tol * 0.1,
            grad_norm_tol: 1e-9,
            max_iter: opts.max_iter,
        },
    ))
}

/// Capacity under the additive cost constraint: the supremum of the
/// Holevo quantity over priors with `<costs, pi> <= budget`, computed by
/// Lagrange-multiplier bisection on the exponentially tilted
/// (penalized) objective.
pub fn constrained_capacity(
    ch: &CqChannel,
    constraint: &CostConstraint,
    opts: &OptimOpts,
) -> Result<CapacityResult> {
    let a = ch.alphabet_size();
    if constraint.costs.len() != a {
        return Err(Error::LengthMismatch {
            expected: a,
            got: constraint.costs.len(),
        });
    }
    let min_cost = constraint
        .costs
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if constraint.budget < min_cost - 1e-12 {
        return Err(Error::Infeasible(format!(
            "budget {} below the cheapest letter cost {}",
            constraint.budget, min_cost
        )));
    }

    // budget pinned at the cheapest letters: only priors supported there
    // are feasible
    if constraint.budget <= min_cost + 1e-12 {
        let support: Vec<usize> = (0..a)
            .filter(|&i| constraint.costs[i] <= min_cost + 1e-12)
            .collect();
        let sub = CqChannel::from_states(
            support.iter().map(|&i| ch.state(i).clone()).collect(),
        )?;
        let sub_result = maximize_holevo(&sub, opts)?;
        let mut p = vec![0.0; a];
        for (k, &i) in support.iter().enumerate() {
            p[i] = sub_result.prior.get(k);
        }
        return Ok(CapacityResult {
            value: sub_result.value,
            prior: Prior::new(p)?,
            iterations: sub_result.iterations,
            gradient_norm: sub_result.gradient_norm,
            converged: sub_result.converged,
        });
    }

    let letter_entropies: Vec<f64> = ch
        .states()
        .iter()
        .map(von_neumann_entropy)
        .collect::<Result<_>>()?;
    let uniform = vec![1.0 / a as f64; a];

    // r = 0: unconstrained
    let free = penalized_maximize(ch, &letter_entropies, &constraint.costs, 0.0, &uniform, opts)?;
    let free_prior = Prior::new(normalize(&free.x))?;
    if constraint.prior_cost(&free_prior) <= constraint.budget + 1e-10 {
        let value = holevo_quantity(ch, &free_prior)?;
        return outcome_to_result(free, value.max(0.0));
    }

    // bracket a multiplier making the penalized optimizer feasible
    let mut r_lo = 0.0;
    let mut r_hi = 1.0;
    let mut start = free.x.clone();
    let mut feasible: Option<(Vec<f64>, SimplexOutcome)> = None;
    for _ in 0..80 {
        let out = penalized_maximize(
            ch,
            &letter_entropies,
            &constraint.costs,
            r_hi,
            &start,
            opts,
        )?;
        let prior = Prior::new(normalize(&out.x))?;
        start = out.x.clone();
        if constraint.prior_cost(&prior) <= constraint.budget {
            feasible = Some((out.x.clone(), out));
            break;
        }
        r_lo = r_hi;
        r_hi *= 2.0;
    }
    let (mut best_x, mut best_out) = feasible.ok_or_else(|| {
        Error::Infeasible("no Lagrange multiplier attains the budget".into())
    })?;

    for _ in 0..100 {
        let r = 0.5 * (r_lo + r_hi);
        let out =
            penalized_maximize(ch, &letter_entropies, &constraint.costs, r, &best_x, opts)?;
        let prior = Prior::new(normalize(&out.x))?;
        if constraint.prior_cost(&prior) <= constraint.budget {
            r_hi = r;
            best_x = out.x.clone();
            best_out = out;
        } else {
            r_lo = r;
        }
        if (r_hi - r_lo) <= 1e-12 * r_hi.max(1.0) {
            break;
        }
    }

    let mut prior_vec = normalize(&best_x);
    // exact feasibility: blend toward the cheapest letter if roundoff
    // left the cost epsilon over budget
    let cost = constraint
        .costs
        .iter()
        .zip(&prior_vec)
        .map(|(c, p)| c * p)
        .sum::<f64>();
    if cost > constraint.budget {
        let cheapest = (0..a)
            .min_by(|&i, &j| {
                constraint.costs[i]
                    .partial_cmp(&constraint.costs[j])
                    .expect("finite costs")
            })
            .expect("nonempty alphabet");
        let t = ((cost - constraint.budget) / (cost - min_cost)).clamp(0.0, 1.0);
        for (i, p) in prior_vec.iter_mut().enumerate() {
            *p *= 1.0 - t;
            if i == cheapest {
                *p += t;
            }
        }
    }
    let prior = Prior::new(normalize(&prior_vec))?;
    let value = holevo_quantity(ch, &prior)?.max(0.0);
    Ok(CapacityResult {
        value,
        prior,
        iterations: best_out.iterations,
        gradient_norm: best_out.grad_norm,
        converged: best_out.converged,
    })
}

/// Infinite-band photon channel capacity in nats per unit time:
/// `pi sqrt(2/3) [sqrt((N+E)/hbar) - sqrt(N/hbar)]`.
pub fn photon_capacity(noise: f64, energy: f64, hbar: f64) -> Result<f64> {
    if noise < 0.0 || energy < 0.0 || hbar <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "photon capacity needs noise >= 0, energy >= 0, hbar > 0 (got {noise}, {energy}, {hbar})"
        )));
    }
    let scale = std::f64::consts::PI * (2.0f64 / 3.0).sqrt();
    Ok(scale * (((noise + energy) / hbar).sqrt() - (noise / hbar).sqrt()))
}

/// Inverts `N = hbar pi^2 / (6 beta^2)` for the inverse temperature.
pub fn beta_from_noise(noise: f64, hbar: f64) -> Result<f64> {
    if noise <= 0.0 || hbar <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta_from_noise needs noise > 0 and hbar > 0 (got {noise}, {hbar})"
        )));
    }
    Ok(std::f64::consts::PI * (hbar / (6.0 * noise)).sqrt())
}
