//! Block-code decoding machinery: Gram matrices, the square-root
//! measurement, exact average error, the tight and coarse error bounds,
//! typical and conditional-typical projectors, the projected square-root
//! measurement with its modified bound, and the jointly-typical style
//! decision rule for general (mixed) signal states with its estimate.
//!
//! For pure-state channels, Gram entries are products of letter overlaps
//! (`n` scalar multiplications per pair), so Gram-route quantities never
//! materialize `dim^n` vectors. Decoder operators are materialized and
//! are subject to the dimension cap.

use num_complex::Complex64;

use crate::channel::{word_state, word_vector, CqChannel, Word};
use crate::error::{Error, Result};
use crate::operator::{
    eig_hermitian, entropy_of_distribution, pinv_sqrt, trace_product, ComplexMatrix,
    ComplexVector, DensityOperator, HermitianOperator, Spectrum,
};

/// Eigenvalues closer than this are treated as one degenerate group when
/// thresholding spectral projectors, so the projectors are well-defined
/// under eigenvector rotation within a degenerate subspace.
const DEGENERACY_TOL: f64 = 1e-10;

const ENUMERATION_CAP: usize = 1 << 24;

/// A block code: `M` words of common length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    words: Vec<Word>,
}

impl Codebook {
    pub fn new(words: Vec<Word>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidParameter("codebook needs >= 1 word".into()));
        }
        let n = words[0].len();
        if n == 0 {
            return Err(Error::InvalidParameter("words must be nonempty".into()));
        }
        for w in &words {
            if w.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: w.len(),
                });
            }
        }
        Ok(Self { words })
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn word_len(&self) -> usize {
        self.words[0].len()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }
}

/// The `M` code elements of a decision rule; the completing element
/// `X_0 = I - sum X_k` is implicit.
#[derive(Debug, Clone)]
pub struct DecisionRule {
    elements: Vec<HermitianOperator>,
}

impl DecisionRule {
    /// Validates positivity of each element (within 1e-8) and
    /// `sum X_k <= I` (within 1e-8).
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter(
                "decision rule needs >= 1 element".into(),
            ));
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
            let spec = eig_hermitian(e)?;
            let min = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -1e-8 {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
            sum = sum.add(e)?;
        }
        let top = eig_hermitian(&sum)?.eigenvalues[0];
        if top > 1.0 + 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "decision-rule elements exceed the identity: largest eigenvalue of the sum is {top}"
            )));
        }
        Ok(Self { elements })
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    /// The implicit completing element `X_0 = I - sum X_k`.
    pub fn completion(&self) -> HermitianOperator {
        let mut sum = HermitianOperator::zeros(self.dim());
        for e in &self.elements {
            sum = sum.add(e).expect("uniform dimensions");
        }
        HermitianOperator::identity(self.dim())
            .sub(&sum)
            .expect("uniform dimensions")
    }
}

/// Gram matrix of the codeword state vectors and its spectrum (which is
/// the nonzero spectrum of the Gram operator on the code subspace).
#[derive(Debug, Clone)]
pub struct GramData {
    pub gram: ComplexMatrix,
    pub spectrum: Spectrum,
}

impl GramData {
    pub fn size(&self) -> usize {
        self.gram.nrows()
    }
}

/// Gram matrix `Gamma_ij = <psi_{w^i}|psi_{w^j}>` of a pure-state
/// codebook, computed as products of letter overlaps.
pub fn gram(ch: &CqChannel, code: &Codebook) -> Result<GramData> {
    let overlaps = ch.letter_overlaps()?;
    let m = code.size();
    let mut g = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut prod = Complex64::new(1.0, 0.0);
            for (a, b) in code.words()[i]
                .letters()
                .iter()
                .zip(code.words()[j].letters())
            {
                prod *= overlaps[(*a, *b)];
            }
            g[(i, j)] = prod;
        }
    }
    let herm = HermitianOperator::new(g.clone())?;
    let spectrum = eig_hermitian(&herm)?;
    let min = spectrum
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -1e-8 {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    Ok(GramData { gram: g, spectrum })
}

fn codeword_vectors(ch: &CqChannel, code: &Codebook, cap: usize) -> Result<Vec<ComplexVector>> {
    code.words()
        .iter()
        .map(|w| Ok(word_vector(ch, w, cap)?.vector().clone()))
        .collect()
}

fn srm_from_vectors(dim: usize, vectors: &[ComplexVector]) -> Result<DecisionRule> {
    let mut g = ComplexMatrix::zeros(dim, dim);
    for v in vectors {
        g += v * v.adjoint();
    }
    let root = pinv_sqrt(&HermitianOperator::new(g)?, None)?;
    let elements = vectors
        .iter()
        .map(|v| {
            let u = root.matrix() * v;
            HermitianOperator::new(&u * u.adjoint())
        })
        .collect::<Result<Vec<_>>>()?;
    DecisionRule::new(elements)
}

/// Square-root measurement of a pure-state codebook:
/// `X_k = |g^{-1/2} psi_k><g^{-1/2} psi_k|` with the inverse square root
/// restricted to the span of the codewords. The elements sum to the
/// projector onto that span.
pub fn srm(ch: &CqChannel, code: &Codebook, cap: usize) -> Result<DecisionRule> {
    let vectors = codeword_vectors(ch, code, cap)?;
    srm_from_vectors(vectors[0].len(), &vectors)
}

/// Exact average error of the square-root measurement computed from the
/// Gram matrix alone: the success amplitude of word `k` is the diagonal
/// entry `(Gamma^{1/2})_kk`, so the error is
/// `1 - mean_k ((Gamma^{1/2})_kk)^2`. Matches [`average_error`] of
/// [`srm`] without materializing `dim^n` operators.
pub fn srm_error_from_gram(g: &GramData) -> f64 {
    let m = g.size();
    let mut acc = 0.0;
    for k in 0..m {
        let mut diag = 0.0;
        for (idx, &l) in g.spectrum.eigenvalues.iter().enumerate() {
            diag += l.max(0.0).sqrt() * g.spectrum.eigenvectors[(k, idx)].norm_sqr();
        }
        acc += 1.0 - diag * diag;
    }
    acc / m as f64
}

/// Exact average error probability of a code under a decision rule:
/// `(1/M) sum_k [1 - Tr S_{w^k} X_k]`.
pub fn average_error(
    ch: &CqChannel,
    code: &Codebook,
    rule: &DecisionRule,
    cap: usize,
) -> Result<f64> {
    if rule.size() != code.size() {
        return Err(Error::LengthMismatch {
            expected: code.size(),
            got: rule.size(),
        });
    }
    let mut acc = 0.0;
    for (w, x) in code.words().iter().zip(rule.elements()) {
        let s = word_state(ch, w, cap)?;
        if s.dim() != x.dim() {
            return Err(Error::DimMismatch {
                expected: s.dim(),
                got: x.dim(),
            });
        }
        acc += 1.0 - trace_product(s.herm(), x);
    }
    Ok((acc / code.size() as f64).clamp(0.0, 1.0))
}

/// Tight upper bound on the minimal average error:
/// `(2/M) Sp(E - Gamma^{1/2})`, equal to `(1/M) Sp(E - Gamma^{1/2})^2`
/// for normalized codewords.
pub fn tight_bound(g: &GramData) -> f64 {
    let m = g.size() as f64;
    let sp: f64 = g
        .spectrum
        .eigenvalues
        .iter()
        .map(|&l| 1.0 - l.max(0.0).sqrt())
        .sum();
    2.0 * sp / m
}

/// Coarse upper bound `(1/M) Sp(E - Gamma)^2`; for pure codewords it
/// equals `(1/M) Tr sum_{r != s} S_{w^r} S_{w^s}`.
pub fn coarse_bound(g: &GramData) -> f64 {
    let m = g.size();
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            let e = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            acc += (e - g.gram[(i, j)]).norm_sqr();
        }
    }
    acc / m as f64
}

/// Groups (index, eigenvalue) pairs that are equal within
/// [`DEGENERACY_TOL`], replacing members by the group mean.
fn degenerate_groups(eigenvalues: &[f64]) -> (Vec<f64>, Vec<usize>) {
    // eigenvalues arrive sorted descending
    let mut rep = Vec::new();
    let mut group_of = vec![0usize; eigenvalues.len()];
    let mut start = 0;
    while start < eigenvalues.len() {
        let mut end = start + 1;
        while end < eigenvalues.len() && (eigenvalues[end - 1] - eigenvalues[end]).abs() <= DEGENERACY_TOL
        {
            end += 1;
        }
        let mean = eigenvalues[start..end].iter().sum::<f64>() / (end - start) as f64;
        for g in group_of.iter_mut().take(end).skip(start) {
            *g = rep.len();
        }
        rep.push(mean.max(0.0));
        start = end;
    }
    (rep, group_of)
}

/// The typical multi-index set of a base spectrum at block length `n`:
/// `B = { J : 2^{-n(H+delta)} < l_J < 2^{-n(H-delta)} }` with strict
/// inequalities, eigenvalue products taken over degeneracy-grouped
/// representatives so membership is stable under eigenvector rotation.
#[derive(Debug, Clone)]
pub struct TypicalSet {
    pub n: usize,
    pub delta: f64,
    /// Selected multi-indices (each entry indexes the base spectrum).
    pub selected: Vec<Vec<usize>>,
    /// `Tr S^{(x)n} (I - P) = 1 - sum_{J in B} l_J`.
    pub tail: f64,
    /// `|| S^{(x)n} P || = max_{J in B} l_J` (0 when `B` is empty).
    pub sup_norm: f64,
    pub lower: f64,
    pub upper: f64,
    pub empty: bool,
}

pub fn typical_set(base: &[f64], n: usize, delta: f64) -> Result<TypicalSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("typical set needs n >= 1".into()));
    }
    if delta < 0.0 {
        return Err(Error::InvalidParameter("delta must be >= 0".into()));
    }
    let d = base.len();
    let total = d
        .checked_pow(n as u32)
        .filter(|&t| t <= ENUMERATION_CAP)
        .ok_or(Error::EnumerationTooLarge {
            required: d.checked_pow(n as u32).unwrap_or(usize::MAX),
            cap: ENUMERATION_CAP,
        })?;
    let clamped: Vec<f64> = base.iter().map(|&l| l.max(0.0)).collect();
    let (rep, group_of) = degenerate_groups(&clamped);
    let entropy = entropy_of_distribution(&clamped);
    let lower = (-(n as f64) * (entropy + delta)).exp2();
    let upper = (-(n as f64) * (entropy - delta)).exp2();

    let mut selected = Vec::new();
    let mut mass = 0.0;
    let mut sup_norm = 0.0f64;
    let mut index = vec![0usize; n];
    for flat in 0..total {
        let mut rem = flat;
        for slot in (0..n).rev() {
            index[slot] = rem % d;
            rem /= d;
        }
        // product over group representatives, permutation-invariant
        let mut counts = vec![0u32; rep.len()];
        for &j in &index {
            counts[group_of[j]] += 1;
        }
        let mut prod = 1.0;
        for (g, &c) in counts.iter().enumerate() {
            if c > 0 {
                prod *= rep[g].powi(c as i32);
            }
        }
        if lower < prod && prod < upper {
            selected.push(index.clone());
            mass += prod;
            sup_norm = sup_norm.max(prod);
        }
    }
    let empty = selected.is_empty();
    Ok(TypicalSet {
        n,
        delta,
        selected,
        tail: 1.0 - mass,
        sup_norm,
        lower,
        upper,
        empty,
    })
}

/// Spectral projector onto the typical subspace of `S_bar^{(x)n}`.
#[derive(Debug, Clone)]
pub struct TypicalProjector {
    pub projector: HermitianOperator,
    pub delta: f64,
    /// The multi-index set `B`.
    pub selected: Vec<Vec<usize>>,
    /// Set when `B` is empty and the projector is zero.
    pub empty: bool,
    /// `|| S_bar^{(x)n} P ||`, which is `< upper` by construction.
    pub sup_norm: f64,
    /// The bound `2^{-n(H - delta)}` of property (11).
    pub upper: f64,
    /// `Tr S_bar^{(x)n} (I - P)`.
    pub tail: f64,
}

/// Materializes the typical projector
/// `P = sum_{J in B} |e_J><e_J|` of `sbar^{(x)n}`.
pub fn typical_projector(
    sbar: &DensityOperator,
    n: usize,
    delta: f64,
    cap: usize,
) -> Result<TypicalProjector> {
    let big_dim = crate::operator::checked_power_dim(sbar.dim(), n, cap)?;
    let spec = sbar.spectrum()?;
    let set = typical_set(&spec.eigenvalues, n, delta)?;

    // tensor power of the eigenvector matrix, columns indexed by J with
    // the first letter most significant
    let mut w = spec.eigenvectors.clone();
    for _ in 1..n {
        w = w.kronecker(&spec.eigenvectors);
    }
    let d = sbar.dim();
    let mut p = ComplexMatrix::zeros(big_dim, big_dim);
    for j_index in &set.selected {
        let mut col_index = 0usize;
        for &j in j_index {
            col_index = col_index * d + j;
        }
        let col = w.column(col_index);
        p += &col * col.adjoint();
    }
    let adj = p.adjoint();
    let projector = HermitianOperator::from_hermitian_unchecked((p + adj) * Complex64::new(0.5, 0.0));
    Ok(TypicalProjector {
        projector,
        delta,
        selected: set.selected,
        empty: set.empty,
        sup_norm: set.sup_norm,
        upper: set.upper,
        tail: set.tail,
    })
}

/// Spectral projector of a word state onto eigenvalues at least
/// `2^{-n(Hbar + delta)}`: the conditional-typical projector. Property
/// (17), `P_w <= S_w 2^{n(Hbar + delta)}`, holds by construction.
#[derive(Debug, Clone)]
pub struct ConditionalTypicalProjector {
    pub projector: HermitianOperator,
    pub delta: f64,
    pub cutoff: f64,
    /// Indices (into the descending spectrum of `S_w`) of the selected
    /// eigenvalues.
    pub selected: Vec<usize>,
    pub empty: bool,
}

pub fn conditional_typical_projector(
    s_w: &DensityOperator,
    hbar_bits: f64,
    n: usize,
    delta: f64,
) -> Result<ConditionalTypicalProjector> {
    if delta < 0.0 {
        return Err(Error::InvalidParameter("delta must be >= 0".into()));
    }
    let cutoff = (-(n as f64) * (hbar_bits + delta)).exp2();
    let spec = s_w.spectrum()?;
    let (rep, group_of) = degenerate_groups(&spec.eigenvalues);
    let selected: Vec<usize> = (0..spec.dim())
        .filter(|&k| rep[group_of[k]] >= cutoff)
        .collect();
    let keep: Vec<bool> = (0..spec.dim())
        .map(|k| rep[group_of[k]] >= cutoff)
        .collect();
    let projector = spec.apply(|_| 0.0); // placeholder shape
    let mut p = projector.into_matrix();
    p.fill(Complex64::new(0.0, 0.0));
    for (k, &keep_k) in keep.iter().enumerate() {
        if keep_k {
            let col = spec.eigenvectors.column(k);
            p += &col * col.adjoint();
        }
    }
    let adj = p.adjoint();
    let projector = HermitianOperator::from_hermitian_unchecked((p + adj) * Complex64::new(0.5, 0.0));
    Ok(ConditionalTypicalProjector {
        projector,
        delta,
        cutoff,
        empty: selected.is_empty(),
        selected,
    })
}

fn check_projector(p: &HermitianOperator) -> Result<()> {
    let sq = HermitianOperator::from_hermitian_unchecked(p.matrix() * p.matrix());
    if sq.frobenius_distance(p) > 1e-8 {
        return Err(Error::InvalidParameter(
            "operator is not idempotent".into(),
        ));
    }
    Ok(())
}

/// Square-root measurement built from projected codeword vectors
/// `|psi_tilde_k> = P |psi_k>`, with the exact average error (against the
/// original states) and the modified upper bound
/// `(1/M) { Sp(E - Gamma_tilde) + Sp(E - Gamma_tilde)^2 }`.
#[derive(Debug, Clone)]
pub struct ProjectedSrm {
    pub rule: DecisionRule,
    pub exact_error: f64,
    pub modified_bound: f64,
    /// All projected vectors vanished; the rule is the zero rule and the
    /// error is 1.
    pub degenerate: bool,
}

pub fn projected_srm(
    ch: &CqChannel,
    code: &Codebook,
    p: &HermitianOperator,
    cap: usize,
) -> Result<ProjectedSrm> {
    check_projector(p)?;
    let vectors = codeword_vectors(ch, code, cap)?;
    if vectors[0].len() != p.dim() {
        return Err(Error::DimMismatch {
            expected: vectors[0].len(),
            got: p.dim(),
        });
    }
    let m = code.size();
    let projected: Vec<ComplexVector> = vectors.iter().map(|v| p.matrix() * v).collect();

    let mut gram_t = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram_t[(i, j)] = projected[i].dotc(&projected[j]);
        }
    }
    let mut sp_linear = 0.0;
    let mut sp_square = 0.0;
    for i in 0..m {
        for j in 0..m {
            let e = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            sp_square += (e - gram_t[(i, j)]).norm_sqr();
        }
        sp_linear += 1.0 - gram_t[(i, i)].re;
    }
    let modified_bound = (sp_linear + sp_square) / m as f64;

    let degenerate = projected.iter().all(|v| v.norm() <= 1e-12);
    if degenerate {
        let dim = vectors[0].len();
        let rule = DecisionRule::new(vec![HermitianOperator::zeros(dim); m])?;
        return Ok(ProjectedSrm {
            rule,
            exact_error: 1.0,
            modified_bound,
            degenerate: true,
        });
    }

    let rule = srm_from_vectors(vectors[0].len(), &projected)?;
    let mut err = 0.0;
    for (v, x) in vectors.iter().zip(rule.elements()) {
        let xv = x.matrix() * v;
        err += 1.0 - v.dotc(&xv).re;
    }
    let exact_error = (err / m as f64).clamp(0.0, 1.0);
    debug_assert!(exact_error <= modified_bound + 1e-8);
    Ok(ProjectedSrm {
        rule,
        exact_error,
        modified_bound,
        degenerate: false,
    })
}

/// Jointly-typical style decision rule for general signal states:
/// `X_k = T^{-1/2} P P_{w^k} P T^{-1/2}` with `T = sum_l P P_{w^l} P`.
/// The elements sum to the support projector of `T`, so the rule is
/// always valid.
pub fn mixed_decision_rule(
    p: &HermitianOperator,
    p_words: &[ConditionalTypicalProjector],
) -> Result<DecisionRule> {
    check_projector(p)?;
    if p_words.is_empty() {
        return Err(Error::InvalidParameter("no word projectors".into()));
    }
    let dim = p.dim();
    let mut t = ComplexMatrix::zeros(dim, dim);
    let mut sandwiched = Vec::with_capacity(p_words.len());
    for pw in p_words {
        if pw.projector.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: pw.projector.dim(),
            });
        }
        let ppp = p.matrix() * pw.projector.matrix() * p.matrix();
        t += &ppp;
        sandwiched.push(ppp);
    }
    let t = HermitianOperator::new(t)?;
    if t.operator_norm()? <= 1e-14 {
        return Err(Error::Degenerate(
            "sum of projected word projectors is numerically zero".into(),
        ));
    }
    let root = pinv_sqrt(&t, None)?;
    let elements = sandwiched
        .into_iter()
        .map(|ppp| HermitianOperator::new(root.matrix() * ppp * root.matrix()))
        .collect::<Result<Vec<_>>>()?;
    DecisionRule::new(elements)
}

/// The decoupled estimate for the rule above:
/// `(1/M) sum_k { 3 Tr S_{w^k}(I-P) + sum_{l != k} Tr P S_{w^k} P P_{w^l}
/// + Tr S_{w^k}(I - P_{w^k}) }`.
pub fn bound19(
    word_states: &[DensityOperator],
    p: &HermitianOperator,
    p_words: &[ConditionalTypicalProjector],
) -> Result<f64> {
    if word_states.len() != p_words.len() {
        return Err(Error::LengthMismatch {
            expected: word_states.len(),
            got: p_words.len(),
        });
    }
    let m = word_states.len();
    let mut acc = 0.0;
    for k in 0..m {
        let s = &word_states[k];
        let t1 = 3.0 * (1.0 - trace_product(s.herm(), p));
        let psp = HermitianOperator::from_hermitian_unchecked(
            p.matrix() * s.matrix() * p.matrix(),
        );
        let mut cross = 0.0;
        for (l, pw) in p_words.iter().enumerate() {
            if l != k {
                cross += trace_product(&psp, &pw.projector);
            }
        }
        let t3 = 1.0 - trace_product(s.herm(), &p_words[k].projector);
        acc += t1 + cross + t3;
    }
    Ok(acc / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ensemble_average, Prior};
    use crate::operator::{tensor_power, Tensor, DEFAULT_DIM_CAP};
    use crate::random::{random_density, random_pure, test_rng};
    use rand::Rng;

    const CAP: usize = DEFAULT_DIM_CAP;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn overlap_half() -> CqChannel {
        CqChannel::binary_pure(0.5).unwrap()
    }

    fn code(words: &[&[usize]], a: usize) -> Codebook {
        Codebook::new(
            words
                .iter()
                .map(|w| Word::new(w.to_vec(), a).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn random_pure_channel(rng: &mut impl Rng, dim: usize, a: usize) -> CqChannel {
        CqChannel::from_pure_states((0..a).map(|_| random_pure(rng, dim)).collect()).unwrap()
    }

    fn random_codebook(rng: &mut impl Rng, a: usize, n: usize, m: usize) -> Codebook {
        Codebook::new(
            (0..m)
                .map(|_| {
                    Word::new((0..n).map(|_| rng.random_range(0..a)).collect(), a).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn gram_fixtures() {
        let ch = overlap_half();
        let g = gram(&ch, &code(&[&[0]], 2)).unwrap();
        assert_close(g.gram[(0, 0)].re, 1.0, 1e-14);

        let orth = CqChannel::binary_pure(0.0).unwrap();
        let g = gram(&orth, &code(&[&[0], &[1]], 2)).unwrap();
        assert_close(g.gram[(0, 1)].norm(), 0.0, 1e-14);

        let g = gram(&ch, &code(&[&[0, 0], &[0, 1]], 2)).unwrap();
        assert_close(g.gram[(0, 1)].re, 0.5, 1e-14);
    }

    #[test]
    fn srm_orthonormal_codewords_exact_projectors() {
        let orth = CqChannel::binary_pure(0.0).unwrap();
        let cb = code(&[&[0], &[1]], 2);
        let rule = srm(&orth, &cb, CAP).unwrap();
        for (w, x) in cb.words().iter().zip(rule.elements()) {
            let proj = word_vector(&orth, w, CAP).unwrap().projector();
            assert!(x.frobenius_distance(proj.herm()) <= 1e-9);
        }
        assert_close(average_error(&orth, &cb, &rule, CAP).unwrap(), 0.0, 1e-10);
    }

    #[test]
    fn srm_single_word() {
        let ch = overlap_half();
        let cb = code(&[&[1, 0]], 2);
        let rule = srm(&ch, &cb, CAP).unwrap();
        let proj = word_vector(&ch, &cb.words()[0], CAP).unwrap().projector();
        assert!(rule.elements()[0].frobenius_distance(proj.herm()) <= 1e-9);
    }

    #[test]
    fn srm_overlap_pair_error_matches_hand_value() {
        // two words with overlap 0.5: closed-form symmetric-pair error
        // (1 - sqrt(1 - 0.25)) / 2
        let ch = overlap_half();
        let cb = code(&[&[0], &[1]], 2);
        let rule = srm(&ch, &cb, CAP).unwrap();
        let err = average_error(&ch, &cb, &rule, CAP).unwrap();
        assert_close(err, 0.0669872981077807, 1e-10);
        // Gram route gives the same exact value
        let g = gram(&ch, &cb).unwrap();
        assert_close(srm_error_from_gram(&g), err, 1e-10);
    }

    #[test]
    fn srm_sum_is_span_projector() {
        let mut rng = test_rng(21);
        for _ in 0..10 {
            let ch = random_pure_channel(&mut rng, 3, 2);
            let cb = random_codebook(&mut rng, 2, 2, 3);
            let rule = srm(&ch, &cb, CAP).unwrap();
            let mut sum = HermitianOperator::zeros(9);
            for x in rule.elements() {
                sum = sum.add(x).unwrap();
            }
            // idempotent within tolerance
            let sq = HermitianOperator::from_hermitian_unchecked(sum.matrix() * sum.matrix());
            assert!(sq.frobenius_distance(&sum) <= 1e-8);
        }
    }

    #[test]
    fn degenerate_uniform_guessing_rule() {
        let ch = overlap_half();
        let cb = code(&[&[0], &[1]], 2);
        let m = cb.size() as f64;
        let rule = DecisionRule::new(vec![
            HermitianOperator::identity(2).scale(1.0 / m);
            cb.size()
        ])
        .unwrap();
        let err = average_error(&ch, &cb, &rule, CAP).unwrap();
        assert_close(err, 1.0 - 1.0 / m, 1e-12);
    }

    #[test]
    fn tight_and_coarse_bound_fixtures() {
        // Gamma = E
        let orth = CqChannel::binary_pure(0.0).unwrap();
        let g = gram(&orth, &code(&[&[0], &[1]], 2)).unwrap();
        assert_close(tight_bound(&g), 0.0, 1e-12);
        assert_close(coarse_bound(&g), 0.0, 1e-12);

        // M = 2 with off-diagonal 0.5: spectral oracle
        let ch = overlap_half();
        let g = gram(&ch, &code(&[&[0], &[1]], 2)).unwrap();
        assert_close(tight_bound(&g), 2.0 - (1.5f64.sqrt() + 0.5f64.sqrt()), 1e-12);
        assert_close(tight_bound(&g), 0.06814834742186349, 1e-12);
        assert_close(coarse_bound(&g), 0.25, 1e-12);
    }

    #[test]
    fn tight_bound_identity_and_operator_inequality() {
        let mut rng = test_rng(22);
        for _ in 0..100 {
            let dim = rng.random_range(2..=3usize);
            let a = rng.random_range(2..=3usize);
            let n = rng.random_range(1..=3usize);
            let m = rng.random_range(1..=5usize);
            let ch = random_pure_channel(&mut rng, dim, a);
            let cb = random_codebook(&mut rng, a, n, m);
            let g = gram(&ch, &cb).unwrap();
            // (2/M) Sp(E - G^{1/2}) = (1/M) Sp(E - G^{1/2})^2 for unit diagonal
            let sp1: f64 = g
                .spectrum
                .eigenvalues
                .iter()
                .map(|&l| 1.0 - l.max(0.0).sqrt())
                .sum();
            let sp2: f64 = g
                .spectrum
                .eigenvalues
                .iter()
                .map(|&l| (1.0 - l.max(0.0).sqrt()).powi(2))
                .sum();
            assert_close(2.0 * sp1, sp2, 1e-9);
            // operator inequality consequence
            assert!(sp2 / m as f64 <= coarse_bound(&g) + 1e-9);
            // SRM achievability
            let err = srm_error_from_gram(&g);
            assert!(err <= tight_bound(&g) + 1e-8);
        }
    }

    #[test]
    fn coarse_bound_trace_identity() {
        let mut rng = test_rng(23);
        for _ in 0..30 {
            let ch = random_pure_channel(&mut rng, 2, 2);
            let cb = random_codebook(&mut rng, 2, 2, 3);
            let g = gram(&ch, &cb).unwrap();
            // (1/M) Tr sum_{r != s} S_r S_s
            let states: Vec<_> = cb
                .words()
                .iter()
                .map(|w| word_state(&ch, w, CAP).unwrap())
                .collect();
            let mut cross = 0.0;
            for r in 0..cb.size() {
                for s in 0..cb.size() {
                    if r != s {
                        cross += trace_product(states[r].herm(), states[s].herm());
                    }
                }
            }
            assert_close(coarse_bound(&g), cross / cb.size() as f64, 1e-9);
        }
    }

    #[test]
    fn srm_error_leq_tight_bound_materialized() {
        let mut rng = test_rng(24);
        for _ in 0..20 {
            let ch = random_pure_channel(&mut rng, 2, 3);
            let cb = random_codebook(&mut rng, 3, 2, 3);
            let g = gram(&ch, &cb).unwrap();
            let rule = srm(&ch, &cb, CAP).unwrap();
            let err = average_error(&ch, &cb, &rule, CAP).unwrap();
            // repeated words make the Gram rank-deficient; the two pinv
            // routes may split eigenvalues at the cutoff differently
            assert_close(err, srm_error_from_gram(&g), 1e-7);
            assert!(err <= tight_bound(&g) + 1e-8);
        }
    }

    #[test]
    fn typical_set_uniform_spectrum_selects_everything() {
        let set = typical_set(&[0.5, 0.5], 3, 0.1).unwrap();
        assert_eq!(set.selected.len(), 8);
        assert_close(set.tail, 0.0, 1e-14);
    }

    #[test]
    fn typical_set_pure_spectrum() {
        let set = typical_set(&[1.0, 0.0], 4, 0.3).unwrap();
        assert_eq!(set.selected.len(), 1);
        assert_close(set.sup_norm, 1.0, 1e-14);
    }

    #[test]
    fn typical_set_fixture_n4() {
        // lambda = (0.75, 0.25), delta = 0.2: only the four weight-1
        // multi-indices fall in the window
        let set = typical_set(&[0.75, 0.25], 4, 0.2).unwrap();
        assert_eq!(set.selected.len(), 4);
        for j in &set.selected {
            assert_eq!(j.iter().filter(|&&x| x == 1).count(), 1);
        }
        assert_close(set.tail, 0.578125, 1e-12);
        assert_close(set.sup_norm, 0.10546875, 1e-12);
    }

    #[test]
    fn typical_set_empty_at_n2() {
        let set = typical_set(&[0.75, 0.25], 2, 0.2).unwrap();
        assert!(set.empty);
        assert_close(set.tail, 1.0, 1e-14);
        assert_close(set.sup_norm, 0.0, 1e-14);
    }

    #[test]
    fn typicality_trend_and_property_11() {
        // exhaustive-enumeration fixture: decreasing tail through n = 8,
        // and below 0.5 at n = 10
        let expect = [
            (2, 1.0),
            (4, 0.578125),
            (6, 0.347412109375),
            (8, 0.21392822265625),
            (10, 0.46815013885498047),
        ];
        let mut last = f64::INFINITY;
        for &(n, tail) in &expect {
            let set = typical_set(&[0.75, 0.25], n, 0.2).unwrap();
            assert_close(set.tail, tail, 1e-12);
            assert!(set.sup_norm < set.upper, "property (11) must be strict");
            if n <= 8 {
                assert!(set.tail < last || n == 2);
                last = set.tail;
            }
        }
        let set10 = typical_set(&[0.75, 0.25], 10, 0.2).unwrap();
        assert!(set10.tail < 0.5);
    }

    #[test]
    fn typical_projector_maximally_mixed_is_identity() {
        let s = DensityOperator::maximally_mixed(2);
        let tp = typical_projector(&s, 3, 0.1, CAP).unwrap();
        assert!(tp
            .projector
            .frobenius_distance(&HermitianOperator::identity(8))
            <= 1e-10);
    }

    #[test]
    fn typical_projector_properties_random() {
        let mut rng = test_rng(25);
        for _ in 0..20 {
            let s = random_density(&mut rng, 2);
            let n = rng.random_range(1..=4usize);
            let tp = typical_projector(&s, n, 0.25, CAP).unwrap();
            // idempotent
            let sq = HermitianOperator::from_hermitian_unchecked(
                tp.projector.matrix() * tp.projector.matrix(),
            );
            assert!(sq.frobenius_distance(&tp.projector) <= 1e-8);
            // commutes with the tensor power
            let sn = tensor_power(&s, n, CAP).unwrap();
            let comm = sn.matrix() * tp.projector.matrix() - tp.projector.matrix() * sn.matrix();
            assert!(comm.norm() <= 1e-8);
            // property (11) strict, with the matrix norm matching the
            // set-level value
            assert!(tp.sup_norm < tp.upper);
            let prod = HermitianOperator::new(sn.matrix() * tp.projector.matrix()).ok();
            if let Some(prod) = prod {
                assert_close(prod.operator_norm().unwrap(), tp.sup_norm, 1e-9);
            }
            // tail matches the materialized trace
            let tail = 1.0 - trace_product(sn.herm(), &tp.projector);
            assert_close(tail, tp.tail, 1e-9);
        }
    }

    #[test]
    fn conditional_typical_pure_word() {
        let ch = overlap_half();
        let w = Word::new(vec![0, 1], 2).unwrap();
        let s = word_state(&ch, &w, CAP).unwrap();
        let pw = conditional_typical_projector(&s, 0.0, 2, 0.1).unwrap();
        assert!(pw.projector.frobenius_distance(s.herm()) <= 1e-8);
    }

    #[test]
    fn conditional_typical_maximally_mixed() {
        let s = tensor_power(&DensityOperator::maximally_mixed(2), 2, CAP).unwrap();
        let pw = conditional_typical_projector(&s, 1.0, 2, 0.1).unwrap();
        assert!(pw
            .projector
            .frobenius_distance(&HermitianOperator::identity(4))
            <= 1e-10);
    }

    #[test]
    fn conditional_typical_fixture() {
        // diag(0.75, 0.25)^{x2}, Hbar = H2(0.75), delta = 0.2:
        // cutoff 2^{-2(H+0.2)} = 0.24612... selects only 0.5625
        let s1 = DensityOperator::from_real_diagonal(&[0.75, 0.25]).unwrap();
        let s = s1.tensor(&s1);
        let hbar = 0.8112781244591328;
        let pw = conditional_typical_projector(&s, hbar, 2, 0.2).unwrap();
        assert_close(pw.cutoff, 0.24612169716279944, 1e-12);
        assert_eq!(pw.selected.len(), 1);
        // property (17): S_w 2^{n(Hbar+delta)} - P_w is PSD
        let scaled = s.herm().scale((2.0f64 * (hbar + 0.2)).exp2());
        let diff = scaled.sub(&pw.projector).unwrap();
        let min = eig_hermitian(&diff)
            .unwrap()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8);
    }

    #[test]
    fn projected_srm_with_identity_reduces_to_srm() {
        let ch = overlap_half();
        let cb = code(&[&[0, 0], &[0, 1]], 2);
        let p = HermitianOperator::identity(4);
        let out = projected_srm(&ch, &cb, &p, CAP).unwrap();
        let plain = srm(&ch, &cb, CAP).unwrap();
        let plain_err = average_error(&ch, &cb, &plain, CAP).unwrap();
        assert_close(out.exact_error, plain_err, 1e-10);
        // Sp(E - Gamma_tilde) vanishes for unit-norm projected words, so
        // the bound reduces to the coarse bound
        let g = gram(&ch, &cb).unwrap();
        assert_close(out.modified_bound, coarse_bound(&g), 1e-10);
        assert!(!out.degenerate);
    }

    #[test]
    fn projected_srm_zero_projector_degenerates() {
        let ch = overlap_half();
        let cb = code(&[&[0], &[1]], 2);
        let p = HermitianOperator::zeros(2);
        let out = projected_srm(&ch, &cb, &p, CAP).unwrap();
        assert!(out.degenerate);
        assert_close(out.exact_error, 1.0, 1e-14);
        assert!(out.modified_bound >= 1.0);
    }

    #[test]
    fn projected_srm_typical_projector_bound_cross_check() {
        let ch = overlap_half();
        let cb = code(&[&[0, 0], &[1, 1]], 2);
        let sbar = ensemble_average(&ch, &Prior::uniform(2)).unwrap();
        let tp = typical_projector(&sbar, 2, 0.3, CAP).unwrap();
        let out = projected_srm(&ch, &cb, &tp.projector, CAP).unwrap();
        assert!(out.exact_error <= out.modified_bound + 1e-8);
        // straight-line scalar recomputation of the bound
        let vectors: Vec<_> = cb
            .words()
            .iter()
            .map(|w| word_vector(&ch, w, CAP).unwrap())
            .collect();
        let m = cb.size();
        let mut lin = 0.0;
        let mut sq = 0.0;
        for i in 0..m {
            for j in 0..m {
                let pj = tp.projector.matrix() * vectors[j].vector();
                let entry = vectors[i].vector().dotc(&pj);
                let e = if i == j { 1.0 } else { 0.0 };
                sq += (Complex64::new(e, 0.0) - entry).norm_sqr();
                if i == j {
                    lin += 1.0 - entry.re;
                }
            }
        }
        assert_close(out.modified_bound, (lin + sq) / m as f64, 1e-10);
    }

    #[test]
    fn mixed_rule_single_word_is_support_projector() {
        let mut rng = test_rng(26);
        let s = random_density(&mut rng, 4);
        let p = HermitianOperator::identity(4);
        let pw = conditional_typical_projector(&s, 10.0, 1, 0.0).unwrap();
        // huge Hbar: cutoff ~ 0, every eigenvalue group selected, so P_w
        // is the support-or-full projector; the rule collapses to it
        let rule = mixed_decision_rule(&p, std::slice::from_ref(&pw)).unwrap();
        assert!(rule.elements()[0].frobenius_distance(&pw.projector) <= 1e-8);
    }

    #[test]
    fn mixed_rule_orthogonal_words_zero_error() {
        let orth = CqChannel::binary_pure(0.0).unwrap();
        let cb = code(&[&[0, 0], &[1, 1]], 2);
        let states: Vec<_> = cb
            .words()
            .iter()
            .map(|w| word_state(&orth, w, CAP).unwrap())
            .collect();
        let p = HermitianOperator::identity(4);
        let pws: Vec<_> = states
            .iter()
            .map(|s| conditional_typical_projector(s, 0.0, 2, 0.1).unwrap())
            .collect();
        let rule = mixed_decision_rule(&p, &pws).unwrap();
        let err = average_error(&orth, &cb, &rule, CAP).unwrap();
        assert_close(err, 0.0, 1e-10);
    }

    #[test]
    fn mixed_rule_commuting_matches_classical_decoder() {
        // quasiclassical channel: everything is diagonal, and rule (16)
        // reduces to the shared jointly-typical decoder on eigenvalue
        // distributions
        let rows = [vec![0.8, 0.2], vec![0.3, 0.7]];
        let ch = CqChannel::from_classical(&rows.to_vec()).unwrap();
        let prior = Prior::uniform(2);
        let n = 2;
        let delta = 0.25;
        let cb = code(&[&[0, 1], &[1, 0]], 2);

        let sbar = ensemble_average(&ch, &prior).unwrap();
        let hbar: f64 = (0..2)
            .map(|i| {
                prior.get(i) * crate::operator::von_neumann_entropy(ch.state(i)).unwrap()
            })
            .sum();
        let tp = typical_projector(&sbar, n, delta, CAP).unwrap();
        let states: Vec<_> = cb
            .words()
            .iter()
            .map(|w| word_state(&ch, w, CAP).unwrap())
            .collect();
        let pws: Vec<_> = states
            .iter()
            .map(|s| conditional_typical_projector(s, hbar, n, delta).unwrap())
            .collect();
        let rule = mixed_decision_rule(&tp.projector, &pws).unwrap();

        // classical oracle over output sequences
        let sbar_diag = [0.5 * 0.8 + 0.5 * 0.3, 0.5 * 0.2 + 0.5 * 0.7];
        let h = entropy_of_distribution(&sbar_diag);
        let lo = (-(n as f64) * (h + delta)).exp2();
        let hi = (-(n as f64) * (h - delta)).exp2();
        let cutoff = (-(n as f64) * (hbar + delta)).exp2();
        for (k, w) in cb.words().iter().enumerate() {
            let mut correct = 0.0;
            for omega in 0..4usize {
                let seq = [omega / 2, omega % 2];
                let pbar: f64 = seq.iter().map(|&o| sbar_diag[o]).product();
                let typical = lo < pbar && pbar < hi;
                if !typical {
                    continue;
                }
                let claims: Vec<bool> = cb
                    .words()
                    .iter()
                    .map(|wl| {
                        let pw: f64 = wl
                            .letters()
                            .iter()
                            .zip(&seq)
                            .map(|(&l, &o)| rows[l][o])
                            .product();
                        pw >= cutoff
                    })
                    .collect();
                let total: usize = claims.iter().map(|&c| c as usize).sum();
                if total > 0 && claims[k] {
                    let pw_k: f64 = w
                        .letters()
                        .iter()
                        .zip(&seq)
                        .map(|(&l, &o)| rows[l][o])
                        .product();
                    correct += pw_k / total as f64;
                }
            }
            let quantum_correct = trace_product(states[k].herm(), &rule.elements()[k]);
            assert_close(quantum_correct, correct, 1e-10);
        }
    }

    #[test]
    fn bound19_fixtures_and_inequality() {
        // trivial projectors + orthogonal pure words: bound collapses to 0
        let orth = CqChannel::binary_pure(0.0).unwrap();
        let cb = code(&[&[0, 0], &[1, 1]], 2);
        let states: Vec<_> = cb
            .words()
            .iter()
            .map(|w| word_state(&orth, w, CAP).unwrap())
            .collect();
        let p = HermitianOperator::identity(4);
        let pws: Vec<_> = states
            .iter()
            .map(|s| conditional_typical_projector(s, 0.0, 2, 0.1).unwrap())
            .collect();
        let b = bound19(&states, &p, &pws).unwrap();
        assert_close(b, 0.0, 1e-9);

        // M = 1: only the two diagonal terms remain
        let single = vec![states[0].clone()];
        let single_pw = vec![pws[0].clone()];
        let b = bound19(&single, &p, &single_pw).unwrap();
        let direct = 3.0 * (1.0 - trace_product(states[0].herm(), &p))
            + (1.0 - trace_product(states[0].herm(), &pws[0].projector));
        assert_close(b, direct, 1e-12);
    }

    #[test]
    fn mixed_pipeline_error_leq_bound19_random() {
        let mut rng = test_rng(27);
        for _ in 0..25 {
            let ch = CqChannel::from_states(vec![
                random_density(&mut rng, 2),
                random_density(&mut rng, 2),
            ])
            .unwrap();
            let prior = Prior::uniform(2);
            let n = 2;
            let delta = 0.3;
            let cb = random_codebook(&mut rng, 2, n, 2);
            let sbar = ensemble_average(&ch, &prior).unwrap();
            let hbar: f64 = (0..2)
                .map(|i| {
                    prior.get(i) * crate::operator::von_neumann_entropy(ch.state(i)).unwrap()
                })
                .sum();
            let tp = typical_projector(&sbar, n, delta, CAP).unwrap();
            let states: Vec<_> = cb
                .words()
                .iter()
                .map(|w| word_state(&ch, w, CAP).unwrap())
                .collect();
            let pws: Vec<_> = states
                .iter()
                .map(|s| conditional_typical_projector(s, hbar, n, delta).unwrap())
                .collect();
            let rule = match mixed_decision_rule(&tp.projector, &pws) {
                Ok(r) => r,
                Err(Error::Degenerate(_)) => continue,
                Err(e) => panic!("unexpected error: {e}"),
            };
            let err = average_error(&ch, &cb, &rule, CAP).unwrap();
            let b = bound19(&states, &tp.projector, &pws).unwrap();
            assert!(err <= b + 1e-8, "error {err} exceeds bound {b}");
            // completion is PSD
            let comp = rule.completion();
            let min = eig_hermitian(&comp)
                .unwrap()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-8);
        }
    }
}
