//! Classical-quantum channels: letter-to-state maps, priors, ensemble
//! averages, the Holevo quantity, POVM transition probabilities, Shannon
//! information, the quasiclassical embedding, and product-channel word
//! states.
//!
//! Letters are 0-based indices into the alphabet `{0, .., a-1}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{
    entropy_of_distribution, trace_product, von_neumann_entropy, ComplexMatrix, DensityOperator,
    HermitianOperator, PureState, Tensor, ENTROPY_EIGENVALUE_FLOOR,
};

/// A priori probability distribution over the input alphabet.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Prior {
    p: Vec<f64>,
}

impl Prior {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        for (i, &x) in p.iter().enumerate() {
            if !(x >= 0.0) {
                return Err(Error::NegativeProbability { index: i, value: x });
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::NotDistribution { sum });
        }
        Ok(Self { p })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            p: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut p = vec![0.0; n];
        p[index] = 1.0;
        Self { p }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, i: usize) -> f64 {
        self.p[i]
    }
}

/// Resolution of identity: positive operators summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter("POVM needs >= 1 element".into()));
        }
        let dim = elements[0].dim();
        let mut sum = HermitianOperator::zeros(dim);
        for e in &elements {
            if e.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
            let spec = crate::operator::eig_hermitian(e)?;
            let min = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -1e-9 {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
            sum = sum.add(e)?;
        }
        let dev = sum.sub(&HermitianOperator::identity(dim))?.operator_norm()?;
        if dev > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "POVM elements sum deviates from identity by {dev:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    /// Projectors onto the computational basis.
    pub fn computational_basis(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|k| {
                let mut m = ComplexMatrix::zeros(dim, dim);
                m[(k, k)] = Complex64::new(1.0, 0.0);
                HermitianOperator::from_hermitian_unchecked(m)
            })
            .collect();
        Self { elements }
    }

    /// Rank-1 projectors onto the columns of an orthonormal system.
    pub fn from_orthonormal_columns(vectors: &ComplexMatrix) -> Result<Self> {
        let elements = (0..vectors.ncols())
            .map(|k| {
                let col = vectors.column(k);
                HermitianOperator::new(col * col.adjoint())
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::new(elements)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

/// A word: a sequence of letters of the input alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Word {
    letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>, alphabet: usize) -> Result<Self> {
        for &l in &letters {
            if l >= alphabet {
                return Err(Error::LetterOutOfRange { index: l, alphabet });
            }
        }
        Ok(Self { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }
}

/// A classical-quantum channel: one signal state per letter.
///
/// Letters whose state is numerically pure (largest eigenvalue at least
/// `1 - 1e-9`) carry their state vector so that pure-channel code paths
/// can work with inner products instead of `dim^n` operators.
#[derive(Debug, Clone)]
pub struct CqChannel {
    dim: usize,
    states: Vec<DensityOperator>,
    pure_vectors: Vec<Option<PureState>>,
}

impl CqChannel {
    pub fn from_states(states: Vec<DensityOperator>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidParameter(
                "channel needs >= 1 letter".into(),
            ));
        }
        let dim = states[0].dim();
        let mut pure_vectors = Vec::with_capacity(states.len());
        for s in &states {
            if s.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: s.dim(),
                });
            }
            pure_vectors.push(if s.is_pure(1e-9)? {
                Some(PureState::from_density(s)?)
            } else {
                None
            });
        }
        Ok(Self {
            dim,
            states,
            pure_vectors,
        })
    }

    pub fn from_pure_states(vectors: Vec<PureState>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidParameter(
                "channel needs >= 1 letter".into(),
            ));
        }
        let dim = vectors[0].dim();
        for v in &vectors {
            if v.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
        }
        let states = vectors.iter().map(|v| v.projector()).collect();
        Ok(Self {
            dim,
            states,
            pure_vectors: vectors.into_iter().map(Some).collect(),
        })
    }

    /// Quasiclassical embedding of a classical channel: row `i` of
    /// `transitions` is the distribution `S(.|i)` and becomes the
    /// diagonal state `diag[S(.|i)]`.
    pub fn from_classical(transitions: &[Vec<f64>]) -> Result<Self> {
        if transitions.is_empty() {
            return Err(Error::InvalidParameter(
                "channel needs >= 1 letter".into(),
            ));
        }
        let dim = transitions[0].len();
        let mut states = Vec::with_capacity(transitions.len());
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&x| x < 0.0) {
                return Err(Error::NotStochastic { index: i, sum });
            }
            states.push(DensityOperator::from_real_diagonal(row)?);
        }
        Self::from_states(states)
    }

    /// The binary pure-state channel with `<psi_0|psi_1> = overlap`.
    pub fn binary_pure(overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap) {
            return Err(Error::InvalidParameter(format!(
                "overlap {overlap} outside [0, 1]"
            )));
        }
        let a = PureState::from_real(&[1.0, 0.0])?;
        let b = PureState::from_real(&[overlap, (1.0 - overlap * overlap).sqrt()])?;
        Self::from_pure_states(vec![a, b])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet_size(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn state(&self, letter: usize) -> &DensityOperator {
        &self.states[letter]
    }

    pub fn pure_vector(&self, letter: usize) -> Option<&PureState> {
        self.pure_vectors[letter].as_ref()
    }

    pub fn pure_flags(&self) -> Vec<bool> {
        self.pure_vectors.iter().map(Option::is_some).collect()
    }

    pub fn is_pure(&self) -> bool {
        self.pure_vectors.iter().all(Option::is_some)
    }

    /// Letter-overlap matrix `V_ij = <psi_i|psi_j>`; pure channels only.
    pub fn letter_overlaps(&self) -> Result<ComplexMatrix> {
        let a = self.alphabet_size();
        let mut v = ComplexMatrix::zeros(a, a);
        for i in 0..a {
            let vi = self.pure_vectors[i]
                .as_ref()
                .ok_or(Error::PureStateRequired { letter: i })?;
            for j in 0..a {
                let vj = self.pure_vectors[j]
                    .as_ref()
                    .ok_or(Error::PureStateRequired { letter: j })?;
                v[(i, j)] = vi.overlap(vj);
            }
        }
        Ok(v)
    }

    /// All pairs of signal states commute within `tol` (operator norm of
    /// the commutator).
    pub fn is_quasiclassical(&self, tol: f64) -> Result<bool> {
        for i in 0..self.states.len() {
            for j in (i + 1)..self.states.len() {
                let a = self.states[i].matrix();
                let b = self.states[j].matrix();
                let comm = a * b - b * a;
                // anti-Hermitian commutator: use Frobenius norm as the check
                if comm.norm() > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn check_prior(&self, prior: &Prior) -> Result<()> {
        if prior.len() != self.alphabet_size() {
            return Err(Error::LengthMismatch {
                expected: self.alphabet_size(),
                got: prior.len(),
            });
        }
        Ok(())
    }
}

/// Ensemble average `sum_i pi_i S_i`.
pub fn ensemble_average(ch: &CqChannel, prior: &Prior) -> Result<DensityOperator> {
    ch.check_prior(prior)?;
    let mut acc = ComplexMatrix::zeros(ch.dim(), ch.dim());
    for (i, s) in ch.states().iter().enumerate() {
        acc += s.matrix() * Complex64::new(prior.get(i), 0.0);
    }
    Ok(DensityOperator::new_unchecked(
        HermitianOperator::from_hermitian_unchecked(acc),
    ))
}

/// Holevo quantity `H(S_bar) - sum_i pi_i H(S_i)` in bits.
pub fn holevo_quantity(ch: &CqChannel, prior: &Prior) -> Result<f64> {
    ch.check_prior(prior)?;
    let avg = ensemble_average(ch, prior)?;
    let mut mean_entropy = 0.0;
    for (i, s) in ch.states().iter().enumerate() {
        let p = prior.get(i);
        if p > 0.0 {
            mean_entropy += p * von_neumann_entropy(s)?;
        }
    }
    Ok(von_neumann_entropy(&avg)? - mean_entropy)
}

/// Transition probabilities `P(j|i) = Tr S_i X_j`, clamped to `[0, 1]`.
/// Rows are inputs, columns are outcomes.
pub fn transition_probabilities(ch: &CqChannel, povm: &Povm) -> Result<Vec<Vec<f64>>> {
    if povm.dim() != ch.dim() {
        return Err(Error::DimMismatch {
            expected: ch.dim(),
            got: povm.dim(),
        });
    }
    Ok(ch
        .states()
        .iter()
        .map(|s| {
            povm.elements()
                .iter()
                .map(|x| trace_product(s.herm(), x).clamp(0.0, 1.0))
                .collect()
        })
        .collect())
}

/// Shannon information of a prior and a row-stochastic transition matrix,
/// in bits. Terms with zero output probability are skipped.
pub fn mutual_information(prior: &Prior, transitions: &[Vec<f64>]) -> f64 {
    let outputs = transitions.first().map_or(0, Vec::len);
    let mut q = vec![0.0; outputs];
    for (i, row) in transitions.iter().enumerate() {
        for (j, &pji) in row.iter().enumerate() {
            q[j] += prior.get(i) * pji;
        }
    }
    let mut info = 0.0;
    for (i, row) in transitions.iter().enumerate() {
        for (j, &pji) in row.iter().enumerate() {
            let w = prior.get(i) * pji;
            if w > ENTROPY_EIGENVALUE_FLOOR && q[j] > ENTROPY_EIGENVALUE_FLOOR {
                info += w * (pji / q[j]).log2();
            }
        }
    }
    info.max(0.0)
}

/// Diagonal POVM from a classical decision rule `X(j|omega)`:
/// `rule[j][omega]`, each column over `j` summing to 1.
pub fn quasiclassical_povm(rule: &[Vec<f64>]) -> Result<Povm> {
    if rule.is_empty() {
        return Err(Error::InvalidParameter("decision rule is empty".into()));
    }
    let dim = rule[0].len();
    for row in rule {
        if row.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    for omega in 0..dim {
        let sum: f64 = rule.iter().map(|row| row[omega]).sum();
        if (sum - 1.0).abs() > 1e-9 || rule.iter().any(|row| row[omega] < 0.0) {
            return Err(Error::NotStochastic { index: omega, sum });
        }
    }
    let elements = rule
        .iter()
        .map(|row| HermitianOperator::from_real_diagonal(row))
        .collect();
    Povm::new(elements)
}

/// Density operator of a word: `S_w = S_{i_1} x ... x S_{i_n}`.
pub fn word_state(ch: &CqChannel, word: &Word, cap: usize) -> Result<DensityOperator> {
    if word.is_empty() {
        return Err(Error::InvalidParameter("empty word".into()));
    }
    crate::operator::checked_power_dim(ch.dim(), word.len(), cap)?;
    let mut acc = ch.state(word.letters()[0]).clone();
    for &l in &word.letters()[1..] {
        acc = acc.tensor(ch.state(l));
    }
    Ok(acc)
}

/// State vector of a word of a pure-state channel.
pub fn word_vector(ch: &CqChannel, word: &Word, cap: usize) -> Result<PureState> {
    if word.is_empty() {
        return Err(Error::InvalidParameter("empty word".into()));
    }
    crate::operator::checked_power_dim(ch.dim(), word.len(), cap)?;
    let first = word.letters()[0];
    let mut acc = ch
        .pure_vector(first)
        .ok_or(Error::PureStateRequired { letter: first })?
        .clone();
    for &l in &word.letters()[1..] {
        let v = ch
            .pure_vector(l)
            .ok_or(Error::PureStateRequired { letter: l })?;
        acc = acc.tensor(v);
    }
    Ok(acc)
}

/// Quantum relative entropy `D(A || B)` in bits; infinite when the
/// support of `A` is not contained in the support of `B`.
pub fn relative_entropy(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    let spec_b = crate::operator::eig_hermitian(b.herm())?;
    let log_b = spec_b.apply(|l| {
        if l > ENTROPY_EIGENVALUE_FLOOR {
            l.log2()
        } else {
            0.0
        }
    });
    let supp_b = spec_b.apply(|l| if l > ENTROPY_EIGENVALUE_FLOOR { 1.0 } else { 0.0 });
    let outside = (a.herm().trace() - trace_product(a.herm(), &supp_b)).abs();
    if outside > 1e-10 {
        return Ok(f64::INFINITY);
    }
    let minus_h_a = -von_neumann_entropy(a)?;
    Ok(minus_h_a - trace_product(a.herm(), &log_b))
}

/// Entropy of the output distribution of a classical transition row,
/// used by tests as a scalar oracle.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of_distribution(&[p, 1.0 - p])
}

/// Builds a `DMatrix` from nested complex `[re, im]` data; used by the
/// file-format layer.
pub fn matrix_from_rows(rows: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    for r in rows {
        if r.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: r.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}
