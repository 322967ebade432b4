//! Truncated full Fock space over `n` generators: word enumeration,
//! left and right creation operators, multi-analytic operators given by
//! their Fourier coefficients, Poisson kernels, and the projection onto
//! the symmetric subspace.
//!
//! All operators live on the graded truncation at word length `L`;
//! words that would overflow the truncation map to zero, and every
//! downstream consumer accounts for that with an explicit tail bound.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::cmatrix::{adjoint, eye, operator_norm, zeros, CMatrix};
use crate::contraction::{defect_space, purity_certificate, RowContraction};
use crate::error::{Error, Result};
use crate::tol::Tolerances;

type C64 = Complex64;

/// Hard cap on the truncated-space dimension, to keep accidental
/// `n^L` blowups from exhausting memory.
const MAX_FOCK_DIM: usize = 1_000_000;

/// Hard cap on dense-assembly entry counts (about 256 MB of scalars).
const MAX_DENSE_ENTRIES: usize = 16_000_000;

/// Truncated Fock space: all words over `{1..n}` of length at most
/// `max_len`, enumerated by length and lexicographically within each
/// length. The empty word has index 0.
#[derive(Debug, Clone)]
pub struct TruncatedFock {
    n: usize,
    max_len: usize,
    words: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl TruncatedFock {
    /// Enumerates the word basis for `n` generators up to length `max_len`.
    pub fn new(n: usize, max_len: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("need at least one generator".into()));
        }
        let mut dim: usize = 0;
        let mut pow: usize = 1;
        for _ in 0..=max_len {
            dim = dim
                .checked_add(pow)
                .filter(|&d| d <= MAX_FOCK_DIM)
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "truncated Fock dimension exceeds cap {MAX_FOCK_DIM}"
                    ))
                })?;
            pow = pow.saturating_mul(n);
        }
        let mut words: Vec<Vec<usize>> = Vec::with_capacity(dim);
        words.push(Vec::new());
        let mut level_start = 0;
        for _ in 0..max_len {
            let level_end = words.len();
            for i in level_start..level_end {
                for l in 1..=n {
                    let mut w = words[i].clone();
                    w.push(l);
                    words.push(w);
                }
            }
            level_start = level_end;
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(TruncatedFock { n, max_len, words, index })
    }

    /// Number of generators.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Truncation length.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Basis dimension `Σ_{k ≤ L} n^k`.
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    /// Word at basis index `i`.
    pub fn word(&self, i: usize) -> &[usize] {
        &self.words[i]
    }

    /// All basis words in order.
    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    /// Basis index of a word, if it fits the truncation.
    pub fn word_index(&self, word: &[usize]) -> Option<usize> {
        self.index.get(word).copied()
    }
}

/// Which side a creation operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Prepends the generator: `e_α ↦ e_{g_i α}`.
    Left,
    /// Appends the generator: `e_α ↦ e_{α g_i}`.
    Right,
}

/// Matrix of the truncated creation operator for generator `i` (1-based).
///
/// Words of maximal length map to zero.
pub fn creation_matrix(space: &TruncatedFock, side: Side, i: usize) -> Result<CMatrix> {
    if i == 0 || i > space.n() {
        return Err(Error::InvalidInput(format!(
            "generator {i} outside 1..={}",
            space.n()
        )));
    }
    let dim = space.dim();
    let mut out = zeros(dim, dim);
    for (col, w) in space.words().iter().enumerate() {
        if w.len() == space.max_len() {
            continue;
        }
        let mut target = Vec::with_capacity(w.len() + 1);
        match side {
            Side::Left => {
                target.push(i);
                target.extend_from_slice(w);
            }
            Side::Right => {
                target.extend_from_slice(w);
                target.push(i);
            }
        }
        let row = space
            .word_index(&target)
            .ok_or_else(|| Error::Internal("creation target missing from basis".into()))?;
        out[(row, col)] = C64::new(1.0, 0.0);
    }
    Ok(out)
}

/// Operator `Σ_α R_α ⊗ θ_(α)` on `Fock_L ⊗ C^{in}`, stored through its
/// Fourier coefficients `θ_(α)`.
///
/// `R_α = R_{α_1}⋯R_{α_k}` with right creations, so the basis action is
/// `e_β ⊗ v ↦ Σ_α e_{β·α̃} ⊗ θ_(α) v` (the word is appended reversed).
/// Vectors are laid out word-major: flat index `word·dim + component`.
#[derive(Debug, Clone)]
pub struct MultiAnalyticOp {
    n: usize,
    out_dim: usize,
    in_dim: usize,
    coeffs: Vec<(Vec<usize>, CMatrix)>,
}

impl MultiAnalyticOp {
    /// Builds the operator from `(word, coefficient)` pairs; duplicate
    /// words are summed.
    pub fn new(n: usize, coeffs: Vec<(Vec<usize>, CMatrix)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("need at least one generator".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("need at least one coefficient".into()));
        }
        let (r0, c0) = coeffs[0].1.dim();
        if r0 == 0 || c0 == 0 {
            return Err(Error::InvalidInput("empty coefficient matrix".into()));
        }
        let mut merged: Vec<(Vec<usize>, CMatrix)> = Vec::new();
        for (word, theta) in coeffs {
            for &l in &word {
                if l == 0 || l > n {
                    return Err(Error::InvalidInput(format!(
                        "letter {l} outside 1..={n} in coefficient word"
                    )));
                }
            }
            if theta.dim() != (r0, c0) {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient shapes differ: {:?} vs {:?}",
                    theta.dim(),
                    (r0, c0)
                )));
            }
            crate::cmatrix::require_finite(&theta, "multi-analytic coefficient")?;
            match merged.iter_mut().find(|(w, _)| *w == word) {
                Some((_, acc)) => *acc = &*acc + &theta,
                None => merged.push((word, theta)),
            }
        }
        merged.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
        Ok(MultiAnalyticOp { n, out_dim: r0, in_dim: c0, coeffs: merged })
    }

    /// Number of generators.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Output block dimension.
    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Input block dimension.
    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    /// Coefficient words with their matrices, sorted by length then word.
    pub fn coeffs(&self) -> &[(Vec<usize>, CMatrix)] {
        &self.coeffs
    }

    /// Longest coefficient word.
    pub fn max_coeff_len(&self) -> usize {
        self.coeffs.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }

    /// Coefficient for a given word, if present.
    pub fn coeff(&self, word: &[usize]) -> Option<&CMatrix> {
        self.coeffs.iter().find(|(w, _)| w == word).map(|(_, m)| m)
    }

    /// `Σ_α θ_(α)* θ_(α)`; bounded by `‖M‖²·I` for any truncation that
    /// holds the full coefficient family.
    pub fn coeff_gram(&self) -> CMatrix {
        let mut acc = zeros(self.in_dim, self.in_dim);
        for (_, theta) in &self.coeffs {
            acc = acc + adjoint(theta).dot(theta);
        }
        acc
    }

    fn reversed(word: &[usize]) -> Vec<usize> {
        word.iter().rev().copied().collect()
    }

    /// Applies the operator blockwise to word-major columns.
    pub fn apply(&self, space: &TruncatedFock, x: &CMatrix) -> Result<CMatrix> {
        self.check_space(space)?;
        let (rows, cols) = x.dim();
        if rows != space.dim() * self.in_dim {
            return Err(Error::ShapeMismatch(format!(
                "input has {rows} rows, expected {}",
                space.dim() * self.in_dim
            )));
        }
        let mut y = zeros(space.dim() * self.out_dim, cols);
        for (word, theta) in &self.coeffs {
            let rev = Self::reversed(word);
            for (src, beta) in space.words().iter().enumerate() {
                if beta.len() + word.len() > space.max_len() {
                    continue;
                }
                let mut target = beta.clone();
                target.extend_from_slice(&rev);
                let dst = space
                    .word_index(&target)
                    .ok_or_else(|| Error::Internal("apply target missing".into()))?;
                for c in 0..cols {
                    for r in 0..self.out_dim {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..self.in_dim {
                            acc += theta[(r, k)] * x[(src * self.in_dim + k, c)];
                        }
                        y[(dst * self.out_dim + r, c)] += acc;
                    }
                }
            }
        }
        Ok(y)
    }

    /// Applies the adjoint blockwise to word-major columns.
    pub fn apply_adjoint(&self, space: &TruncatedFock, x: &CMatrix) -> Result<CMatrix> {
        self.check_space(space)?;
        let (rows, cols) = x.dim();
        if rows != space.dim() * self.out_dim {
            return Err(Error::ShapeMismatch(format!(
                "input has {rows} rows, expected {}",
                space.dim() * self.out_dim
            )));
        }
        let mut y = zeros(space.dim() * self.in_dim, cols);
        for (word, theta) in &self.coeffs {
            let th = adjoint(theta);
            let rev = Self::reversed(word);
            for (dst, beta) in space.words().iter().enumerate() {
                if beta.len() + word.len() > space.max_len() {
                    continue;
                }
                let mut source = beta.clone();
                source.extend_from_slice(&rev);
                let src = space
                    .word_index(&source)
                    .ok_or_else(|| Error::Internal("adjoint source missing".into()))?;
                for c in 0..cols {
                    for r in 0..self.in_dim {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..self.out_dim {
                            acc += th[(r, k)] * x[(src * self.out_dim + k, c)];
                        }
                        y[(dst * self.in_dim + r, c)] += acc;
                    }
                }
            }
        }
        Ok(y)
    }

    /// Dense matrix of the truncated operator, word-major on both sides.
    pub fn dense(&self, space: &TruncatedFock) -> Result<CMatrix> {
        self.check_space(space)?;
        let rows = space.dim() * self.out_dim;
        let cols = space.dim() * self.in_dim;
        if rows.saturating_mul(cols) > MAX_DENSE_ENTRIES {
            return Err(Error::InvalidInput(format!(
                "dense assembly of {rows} x {cols} exceeds entry cap"
            )));
        }
        let mut out = zeros(rows, cols);
        for (word, theta) in &self.coeffs {
            let rev = Self::reversed(word);
            for (src, beta) in space.words().iter().enumerate() {
                if beta.len() + word.len() > space.max_len() {
                    continue;
                }
                let mut target = beta.clone();
                target.extend_from_slice(&rev);
                let dst = space
                    .word_index(&target)
                    .ok_or_else(|| Error::Internal("dense target missing".into()))?;
                for r in 0..self.out_dim {
                    for c in 0..self.in_dim {
                        out[(dst * self.out_dim + r, src * self.in_dim + c)] += theta[(r, c)];
                    }
                }
            }
        }
        Ok(out)
    }

    fn check_space(&self, space: &TruncatedFock) -> Result<()> {
        if space.n() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "operator over {} generators applied on a space over {}",
                self.n,
                space.n()
            )));
        }
        if self.max_coeff_len() > space.max_len() {
            return Err(Error::InvalidInput(format!(
                "coefficient length {} exceeds truncation {}",
                self.max_coeff_len(),
                space.max_len()
            )));
        }
        Ok(())
    }
}

/// Poisson kernel of a row contraction at radius `r`, truncated at the
/// space's word length: block row `α` equals `r^{|α|}·D·T_α*` where `D`
/// is the defect coordinate map of the scaled tuple.
///
/// Maps the original space into `Fock_L ⊗ C^d` (word-major layout) with
/// `d` the defect rank. For `r < 1`, or `r = 1` with a pure tuple,
/// `K*K` is close to the identity; [`poisson_defect_bound`] certifies
/// the gap.
pub fn poisson_kernel(
    t: &RowContraction,
    r: f64,
    space: &TruncatedFock,
    tol: &Tolerances,
) -> Result<CMatrix> {
    if space.n() != t.n() {
        return Err(Error::ShapeMismatch(format!(
            "space over {} generators, tuple has {}",
            space.n(),
            t.n()
        )));
    }
    let defect = defect_space(t.entries(), r, tol)?;
    let d = defect.dim();
    let dim = t.dim();
    let rows = space.dim().saturating_mul(d);
    if rows.saturating_mul(dim) > MAX_DENSE_ENTRIES {
        return Err(Error::InvalidInput("Poisson kernel exceeds entry cap".into()));
    }
    let mut out = zeros(rows, dim);
    // Adjoint word products T_α* grown letter by letter along the
    // breadth-first word enumeration: (T_{α·i})* = T_i*·T_α*.
    let mut adj: Vec<CMatrix> = Vec::with_capacity(space.dim());
    let adj_entries: Vec<CMatrix> = (0..t.n()).map(|i| adjoint(t.entry(i))).collect();
    for (idx, w) in space.words().iter().enumerate() {
        let a = if w.is_empty() {
            eye(dim)
        } else {
            let parent = space
                .word_index(&w[..w.len() - 1])
                .ok_or_else(|| Error::Internal("word prefix missing".into()))?;
            adj_entries[w[w.len() - 1] - 1].dot(&adj[parent])
        };
        let block = defect.map.dot(&a).mapv(|z| z * r.powi(w.len() as i32));
        for br in 0..d {
            for bc in 0..dim {
                out[(idx * d + br, bc)] = block[(br, bc)];
            }
        }
        adj.push(a);
    }
    Ok(out)
}

/// Certified bound on `‖K*K − I‖` for the truncated Poisson kernel.
///
/// For `r < 1` this is the geometric tail `r^{2(L+1)}/(1 − r²‖ΣTT*‖)`;
/// for `r = 1` it is the certified decay of the purity iterates at step
/// `L + 1`, and a tuple without a purity certificate is rejected.
pub fn poisson_defect_bound(
    t: &RowContraction,
    r: f64,
    max_len: usize,
    tol: &Tolerances,
) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidInput(format!("radius {r} outside (0, 1]")));
    }
    if r < 1.0 {
        let g = operator_norm(&t.row_gram())?;
        let denom = 1.0 - r * r * g.min(1.0 + tol.contraction_slack);
        let denom = denom.max(1.0 - r * r * (1.0 + tol.contraction_slack));
        if denom <= 0.0 {
            return Err(Error::Internal("degenerate geometric tail".into()));
        }
        return Ok(r.powi(2 * (max_len as i32 + 1)) / denom);
    }
    let cert = purity_certificate(t, max_len + 2, tol)?;
    if !cert.pure {
        return Err(Error::NotPure(
            "radius 1 requires a pure tuple for an isometric kernel".into(),
        ));
    }
    Ok(cert.tail_norm(max_len + 1))
}

/// Orthogonal projection of the truncated Fock space onto its symmetric
/// subspace: each basis word is averaged over the distinct permutations
/// of its letters.
pub fn constrained_projection_symmetric(space: &TruncatedFock) -> CMatrix {
    let dim = space.dim();
    let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (i, w) in space.words().iter().enumerate() {
        let mut key = w.clone();
        key.sort_unstable();
        groups.entry(key).or_default().push(i);
    }
    let mut out = zeros(dim, dim);
    for members in groups.values() {
        let weight = C64::new(1.0 / members.len() as f64, 0.0);
        for &i in members {
            for &j in members {
                out[(i, j)] = weight;
            }
        }
    }
    out
}
