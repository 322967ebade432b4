//! Polynomials in two commuting variables, free and hereditary
//! polynomials in two tuples, certified bidisk sup norms, and Fejér
//! smoothing.
//!
//! Bivariate polynomials are matrix valued: a `rows x cols` array of
//! scalar polynomials in `(z, w)`, evaluated entrywise and assembled
//! into block matrices. The bidisk sup norm is bracketed by a grid
//! maximum `lo` and a Bernstein-certified upper bound `hi`, so callers
//! get a sound two-sided interval rather than a point estimate.

use num_complex::Complex64;

use crate::cmatrix::{adjoint, eigh, eye, operator_norm, zeros, CMatrix};
use crate::contraction::{commutator_scale, RowContraction};
use crate::error::{Error, Result};
use crate::tol::Tolerances;

type C64 = Complex64;

/// One `coeff · z^zdeg · w^wdeg` term of a scalar polynomial entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiTerm {
    /// Exponent of the first variable.
    pub zdeg: usize,
    /// Exponent of the second variable.
    pub wdeg: usize,
    /// Complex coefficient.
    pub coeff: C64,
}

/// Matrix-valued polynomial in two commuting variables.
///
/// Entry `(r, c)` is a list of [`BiTerm`]s, kept sorted by `(zdeg, wdeg)`
/// with duplicate exponent pairs merged and zero coefficients dropped.
#[derive(Debug, Clone)]
pub struct BivariatePolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Vec<BiTerm>>>,
}

fn normalize_terms(terms: &[BiTerm]) -> Result<Vec<BiTerm>> {
    for t in terms {
        if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
    }
    let mut sorted: Vec<BiTerm> = terms.to_vec();
    sorted.sort_by_key(|t| (t.zdeg, t.wdeg));
    let mut out: Vec<BiTerm> = Vec::with_capacity(sorted.len());
    for t in sorted {
        match out.last_mut() {
            Some(last) if last.zdeg == t.zdeg && last.wdeg == t.wdeg => {
                last.coeff += t.coeff;
            }
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != C64::new(0.0, 0.0));
    Ok(out)
}

impl BivariatePolyMatrix {
    /// Builds a matrix polynomial from per-entry term lists.
    pub fn new(rows: usize, cols: usize, entries: Vec<Vec<Vec<BiTerm>>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("polynomial matrix must be non-empty".into()));
        }
        if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch(format!(
                "expected {rows} x {cols} entry lists"
            )));
        }
        let mut normalized = Vec::with_capacity(rows);
        for row in &entries {
            let mut out_row = Vec::with_capacity(cols);
            for terms in row {
                out_row.push(normalize_terms(terms)?);
            }
            normalized.push(out_row);
        }
        Ok(BivariatePolyMatrix { rows, cols, entries: normalized })
    }

    /// Scalar (1 x 1) polynomial.
    pub fn scalar(terms: Vec<BiTerm>) -> Result<Self> {
        Self::new(1, 1, vec![vec![terms]])
    }

    /// Row count of the coefficient matrix.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Column count of the coefficient matrix.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Terms of entry `(r, c)`.
    pub fn entry_terms(&self, r: usize, c: usize) -> &[BiTerm] {
        &self.entries[r][c]
    }

    /// Largest `z` exponent over all entries.
    pub fn max_zdeg(&self) -> usize {
        self.iter_terms().map(|t| t.zdeg).max().unwrap_or(0)
    }

    /// Largest `w` exponent over all entries.
    pub fn max_wdeg(&self) -> usize {
        self.iter_terms().map(|t| t.wdeg).max().unwrap_or(0)
    }

    /// Largest total degree `zdeg + wdeg` over all entries.
    pub fn max_total_deg(&self) -> usize {
        self.iter_terms().map(|t| t.zdeg + t.wdeg).max().unwrap_or(0)
    }

    fn iter_terms(&self) -> impl Iterator<Item = &BiTerm> {
        self.entries.iter().flatten().flatten()
    }

    /// The polynomial with `z` and `w` exchanged in every term.
    pub fn swap_variables(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|terms| {
                        let mut out: Vec<BiTerm> = terms
                            .iter()
                            .map(|t| BiTerm { zdeg: t.wdeg, wdeg: t.zdeg, coeff: t.coeff })
                            .collect();
                        out.sort_by_key(|t| (t.zdeg, t.wdeg));
                        out
                    })
                    .collect()
            })
            .collect();
        BivariatePolyMatrix { rows: self.rows, cols: self.cols, entries }
    }

    /// Entry-wise difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("polynomial difference".into()));
        }
        let mut entries = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut row = Vec::with_capacity(self.cols);
            for c in 0..self.cols {
                let mut terms = self.entries[r][c].clone();
                terms.extend(other.entries[r][c].iter().map(|t| BiTerm {
                    zdeg: t.zdeg,
                    wdeg: t.wdeg,
                    coeff: -t.coeff,
                }));
                row.push(terms);
            }
            entries.push(row);
        }
        Self::new(self.rows, self.cols, entries)
    }

    /// Evaluates at scalars, returning the `rows x cols` value matrix.
    pub fn eval_scalar(&self, z: C64, w: C64) -> CMatrix {
        let mut out = zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = eval_terms_scalar(&self.entries[r][c], z, w);
            }
        }
        out
    }

    /// Sum of `|coeff|` over all terms, weighted by a per-term function.
    pub fn weighted_coeff_sum(&self, weight: impl Fn(&BiTerm) -> f64) -> f64 {
        self.iter_terms().map(|t| weight(t) * t.coeff.norm()).sum()
    }
}

/// Horner evaluation of one entry: outer in `z`, inner in `w`.
fn eval_terms_scalar(terms: &[BiTerm], z: C64, w: C64) -> C64 {
    if terms.is_empty() {
        return C64::new(0.0, 0.0);
    }
    let dz = terms.iter().map(|t| t.zdeg).max().unwrap();
    let dw = terms.iter().map(|t| t.wdeg).max().unwrap();
    let mut grid = vec![vec![C64::new(0.0, 0.0); dw + 1]; dz + 1];
    for t in terms {
        grid[t.zdeg][t.wdeg] += t.coeff;
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in (0..=dz).rev() {
        let mut inner = C64::new(0.0, 0.0);
        for j in (0..=dw).rev() {
            inner = inner * w + grid[i][j];
        }
        acc = acc * z + inner;
    }
    acc
}

fn check_square_same_dim(m1: &CMatrix, m2: &CMatrix) -> Result<usize> {
    let (r1, c1) = m1.dim();
    let (r2, c2) = m2.dim();
    if r1 != c1 || r2 != c2 || r1 != r2 {
        return Err(Error::ShapeMismatch(format!(
            "arguments must be square with equal dimension, got {r1}x{c1} and {r2}x{c2}"
        )));
    }
    Ok(r1)
}

/// Evaluates a matrix polynomial at a commuting pair of square matrices.
///
/// The result is the `(rows·m) x (cols·m)` block matrix whose `(r, c)`
/// block is `p_rc(M1, M2)`; each block is computed by bivariate Horner,
/// outer in the first variable. The arguments must commute within
/// `residual_tol`, scaled as everywhere else.
pub fn eval_bivariate(
    p: &BivariatePolyMatrix,
    m1: &CMatrix,
    m2: &CMatrix,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let m = check_square_same_dim(m1, m2)?;
    let resid = operator_norm(&(m1.dot(m2) - m2.dot(m1)))?;
    let scale = commutator_scale(m1, m2)?;
    if resid > tol.residual_tol * scale {
        return Err(Error::NotCommuting(format!(
            "arguments do not commute (residual {resid:.3e}, threshold {:.3e})",
            tol.residual_tol * scale
        )));
    }
    let mut out = zeros(p.rows() * m, p.cols() * m);
    for r in 0..p.rows() {
        for c in 0..p.cols() {
            let block = eval_terms_matrix(p.entry_terms(r, c), m1, m2, m);
            for bi in 0..m {
                for bj in 0..m {
                    out[(r * m + bi, c * m + bj)] = block[(bi, bj)];
                }
            }
        }
    }
    Ok(out)
}

/// Bivariate Horner on matrices: `Σ_i M1^i · q_i(M2)` with both sums
/// evaluated by Horner recurrences.
fn eval_terms_matrix(terms: &[BiTerm], m1: &CMatrix, m2: &CMatrix, m: usize) -> CMatrix {
    if terms.is_empty() {
        return zeros(m, m);
    }
    let dz = terms.iter().map(|t| t.zdeg).max().unwrap();
    let dw = terms.iter().map(|t| t.wdeg).max().unwrap();
    let mut grid = vec![vec![C64::new(0.0, 0.0); dw + 1]; dz + 1];
    for t in terms {
        grid[t.zdeg][t.wdeg] += t.coeff;
    }
    let inner = |i: usize| -> CMatrix {
        let mut acc = zeros(m, m);
        for j in (0..=dw).rev() {
            acc = acc.dot(m2);
            let c = grid[i][j];
            if c != C64::new(0.0, 0.0) {
                for d in 0..m {
                    acc[(d, d)] += c;
                }
            }
        }
        acc
    };
    let mut acc = inner(dz);
    for i in (0..dz).rev() {
        acc = acc.dot(m1) + inner(i);
    }
    acc
}

/// One term `coeff · X_x · Y_y` of a free polynomial; words hold 1-based
/// generator letters and are multiplied left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeTerm {
    /// Word in the first tuple.
    pub x: Vec<usize>,
    /// Word in the second tuple.
    pub y: Vec<usize>,
    /// Complex coefficient.
    pub coeff: C64,
}

/// Polynomial in two free tuples of `n1` and `n2` generators.
#[derive(Debug, Clone)]
pub struct FreePoly {
    /// Generators in the first tuple.
    pub n1: usize,
    /// Generators in the second tuple.
    pub n2: usize,
    /// Terms; duplicate words are allowed and summed on evaluation.
    pub terms: Vec<FreeTerm>,
}

impl FreePoly {
    /// Validates generator counts and word letters.
    pub fn new(n1: usize, n2: usize, terms: Vec<FreeTerm>) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidInput("free polynomial needs n1, n2 >= 1".into()));
        }
        for (k, t) in terms.iter().enumerate() {
            for &l in &t.x {
                if l == 0 || l > n1 {
                    return Err(Error::InvalidInput(format!(
                        "term {k}: letter {l} outside 1..={n1} in first word"
                    )));
                }
            }
            for &l in &t.y {
                if l == 0 || l > n2 {
                    return Err(Error::InvalidInput(format!(
                        "term {k}: letter {l} outside 1..={n2} in second word"
                    )));
                }
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::InvalidInput(format!("term {k}: non-finite coefficient")));
            }
        }
        Ok(FreePoly { n1, n2, terms })
    }
}

/// One term `coeff · X_x · Y_y · Y_ys* · X_xs*` of a hereditary
/// polynomial (adjoints on the right, in that fixed order).
#[derive(Debug, Clone, PartialEq)]
pub struct HereditaryTerm {
    /// Left word in the first tuple.
    pub x: Vec<usize>,
    /// Left word in the second tuple.
    pub y: Vec<usize>,
    /// Adjointed word in the second tuple.
    pub ys: Vec<usize>,
    /// Adjointed word in the first tuple.
    pub xs: Vec<usize>,
    /// Complex coefficient.
    pub coeff: C64,
}

/// Hereditary polynomial in two free tuples.
#[derive(Debug, Clone)]
pub struct HereditaryPoly {
    /// Generators in the first tuple.
    pub n1: usize,
    /// Generators in the second tuple.
    pub n2: usize,
    /// Terms.
    pub terms: Vec<HereditaryTerm>,
}

impl HereditaryPoly {
    /// Validates generator counts and word letters.
    pub fn new(n1: usize, n2: usize, terms: Vec<HereditaryTerm>) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidInput("hereditary polynomial needs n1, n2 >= 1".into()));
        }
        for (k, t) in terms.iter().enumerate() {
            for (word, bound, which) in [
                (&t.x, n1, "x"),
                (&t.y, n2, "y"),
                (&t.ys, n2, "ys"),
                (&t.xs, n1, "xs"),
            ] {
                for &l in word.iter() {
                    if l == 0 || l > bound {
                        return Err(Error::InvalidInput(format!(
                            "term {k}: letter {l} outside 1..={bound} in word {which}"
                        )));
                    }
                }
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::InvalidInput(format!("term {k}: non-finite coefficient")));
            }
        }
        Ok(HereditaryPoly { n1, n2, terms })
    }
}

fn word_product(entries: &RowContraction, word: &[usize]) -> CMatrix {
    let mut acc = eye(entries.dim());
    for &l in word {
        acc = acc.dot(entries.entry(l - 1));
    }
    acc
}

fn check_cross_commuting(t1: &RowContraction, t2: &RowContraction, tol: &Tolerances) -> Result<()> {
    if t1.dim() != t2.dim() {
        return Err(Error::ShapeMismatch(format!(
            "tuples act on different spaces: {} vs {}",
            t1.dim(),
            t2.dim()
        )));
    }
    for i in 0..t1.n() {
        for j in 0..t2.n() {
            let a = t1.entry(i);
            let b = t2.entry(j);
            let resid = operator_norm(&(a.dot(b) - b.dot(a)))?;
            if resid > tol.residual_tol * commutator_scale(a, b)? {
                return Err(Error::NotCommuting(format!(
                    "cross commutator [T1[{i}], T2[{j}]] has norm {resid:.3e}"
                )));
            }
        }
    }
    Ok(())
}

/// Evaluates a free polynomial at two cross-commuting row tuples.
pub fn eval_free(
    p: &FreePoly,
    t1: &RowContraction,
    t2: &RowContraction,
    tol: &Tolerances,
) -> Result<CMatrix> {
    if t1.n() != p.n1 || t2.n() != p.n2 {
        return Err(Error::ShapeMismatch(format!(
            "polynomial expects tuples of ({}, {}) generators, got ({}, {})",
            p.n1,
            p.n2,
            t1.n(),
            t2.n()
        )));
    }
    check_cross_commuting(t1, t2, tol)?;
    let dim = t1.dim();
    let mut acc = zeros(dim, dim);
    for t in &p.terms {
        let xv = word_product(t1, &t.x);
        let yv = word_product(t2, &t.y);
        acc = acc + xv.dot(&yv).mapv(|z| z * t.coeff);
    }
    Ok(acc)
}

/// Evaluates a hereditary polynomial at two cross-commuting row tuples:
/// `Σ coeff · T1_x T2_y (T2_ys)* (T1_xs)*`.
pub fn eval_hereditary(
    p: &HereditaryPoly,
    t1: &RowContraction,
    t2: &RowContraction,
    tol: &Tolerances,
) -> Result<CMatrix> {
    if t1.n() != p.n1 || t2.n() != p.n2 {
        return Err(Error::ShapeMismatch(format!(
            "polynomial expects tuples of ({}, {}) generators, got ({}, {})",
            p.n1,
            p.n2,
            t1.n(),
            t2.n()
        )));
    }
    check_cross_commuting(t1, t2, tol)?;
    let dim = t1.dim();
    let mut acc = zeros(dim, dim);
    for t in &p.terms {
        let xv = word_product(t1, &t.x);
        let yv = word_product(t2, &t.y);
        let ysv = adjoint(&word_product(t2, &t.ys));
        let xsv = adjoint(&word_product(t1, &t.xs));
        acc = acc + xv.dot(&yv).dot(&ysv).dot(&xsv).mapv(|z| z * t.coeff);
    }
    Ok(acc)
}

/// Certified bracket for the bidisk sup norm.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TorusBracket {
    /// Grid maximum; a rigorous lower bound for the sup norm.
    pub lo: f64,
    /// Bernstein-certified upper bound.
    pub hi: f64,
    /// Grid resolution per axis that produced the bracket.
    pub grid: usize,
}

/// Largest singular value of a small matrix; closed form up to 2 x 2,
/// Hermitian eigensolver above.
fn small_opnorm(m: &CMatrix) -> f64 {
    let (r, c) = m.dim();
    if r == 1 && c == 1 {
        return m[(0, 0)].norm();
    }
    if r == 2 && c == 2 {
        // Eigenvalues of M^H M via the stable half-trace form.
        let g00 = m[(0, 0)].norm_sqr() + m[(1, 0)].norm_sqr();
        let g11 = m[(0, 1)].norm_sqr() + m[(1, 1)].norm_sqr();
        let g01 = m[(0, 0)].conj() * m[(0, 1)] + m[(1, 0)].conj() * m[(1, 1)];
        let mid = 0.5 * (g00 + g11);
        let rad = (0.25 * (g00 - g11) * (g00 - g11) + g01.norm_sqr()).sqrt();
        return (mid + rad).max(0.0).sqrt();
    }
    let g = adjoint(m).dot(m);
    match eigh(&g) {
        Ok((vals, _)) => vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => 0.0,
    }
}

fn thread_hint() -> usize {
    match std::env::var("ANDO_LAB_THREADS") {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n >= 1).unwrap_or(1),
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    }
    .min(64)
}

/// Grid maximum and certified upper bound for
/// `sup_{|z| = |w| = 1} ‖[p_rs(z, w)]‖`, which equals the bidisk sup by
/// the maximum principle.
///
/// `lo` is the exact maximum over the `grid x grid` tensor grid of roots
/// of unity. `hi = lo·(1 + c_z)(1 + c_w)` with
/// `c = (π d / grid)(1 + π d / grid)` per axis, where `d` is that axis's
/// maximal degree. Soundness of this bracket rests on the Bernstein
/// inequality applied at the (critical) global maximum; the certificate
/// is valid when `π(d_z + d_w)/grid ≤ 1/2`, and coarser grids are
/// rejected. Grid points are combined only by `max`, so any parallel
/// schedule yields the identical result.
pub fn torus_sup_norm(p: &BivariatePolyMatrix, grid: usize) -> Result<TorusBracket> {
    let dz = p.max_zdeg();
    let dw = p.max_wdeg();
    let dtot = p.max_total_deg();
    if grid < 4 * (dtot + 1) {
        return Err(Error::InvalidInput(format!(
            "grid {grid} too coarse: need at least {}",
            4 * (dtot + 1)
        )));
    }
    let s = std::f64::consts::PI * ((dz + dw) as f64) / (grid as f64);
    if s > 0.5 {
        return Err(Error::InvalidInput(format!(
            "grid {grid} too coarse to certify a bracket for axis degrees \
             ({dz}, {dw}); need grid ≥ {}",
            (2.0 * std::f64::consts::PI * ((dz + dw) as f64)).ceil() as usize
        )));
    }

    // Roots of unity; powers are table lookups at exact indices, so the
    // evaluation is identical no matter how the grid is partitioned.
    let roots: Vec<C64> = (0..grid)
        .map(|t| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (t as f64) / (grid as f64)))
        .collect();
    let rows = p.rows();
    let cols = p.cols();
    let flat: Vec<(usize, usize, &[BiTerm])> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| (r, c, p.entry_terms(r, c)))
        .collect();

    let eval_range = |a_lo: usize, a_hi: usize| -> f64 {
        let mut local = 0.0f64;
        let mut value = zeros(rows, cols);
        for a in a_lo..a_hi {
            for b in 0..grid {
                for &(r, c, terms) in &flat {
                    let mut acc = C64::new(0.0, 0.0);
                    for t in terms {
                        let idx = (a * t.zdeg + b * t.wdeg) % grid;
                        acc += t.coeff * roots[idx];
                    }
                    value[(r, c)] = acc;
                }
                local = local.max(small_opnorm(&value));
            }
        }
        local
    };

    let threads = thread_hint().min(grid).max(1);
    let lo = if threads == 1 {
        eval_range(0, grid)
    } else {
        let chunk = grid.div_ceil(threads);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..threads {
                let a_lo = t * chunk;
                let a_hi = ((t + 1) * chunk).min(grid);
                if a_lo >= a_hi {
                    continue;
                }
                let eval = &eval_range;
                handles.push(scope.spawn(move || eval(a_lo, a_hi)));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("grid worker panicked"))
                .fold(0.0f64, f64::max)
        })
    };

    let cert = |d: usize| -> f64 {
        let x = std::f64::consts::PI * (d as f64) / (grid as f64);
        x * (1.0 + x)
    };
    let hi = lo * (1.0 + cert(dz)) * (1.0 + cert(dw));
    Ok(TorusBracket { lo, hi, grid })
}

/// Fejér smoothing: damps each coefficient by `1 - (zdeg + wdeg)/(m + 1)`.
///
/// Requires `m` at least the max total degree so every factor stays
/// nonnegative. The sup-norm deviation from the original polynomial is
/// at most `Σ (zdeg + wdeg)/(m + 1) · |coeff|`.
pub fn fejer_smooth(p: &BivariatePolyMatrix, m: usize) -> Result<BivariatePolyMatrix> {
    let d = p.max_total_deg();
    if m < d {
        return Err(Error::InvalidInput(format!(
            "smoothing order {m} below max total degree {d}"
        )));
    }
    let entries = (0..p.rows())
        .map(|r| {
            (0..p.cols())
                .map(|c| {
                    p.entry_terms(r, c)
                        .iter()
                        .map(|t| BiTerm {
                            zdeg: t.zdeg,
                            wdeg: t.wdeg,
                            coeff: t.coeff
                                * (1.0 - ((t.zdeg + t.wdeg) as f64) / ((m + 1) as f64)),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    BivariatePolyMatrix::new(p.rows(), p.cols(), entries)
}

/// Exact deviation budget of [`fejer_smooth`]: `Σ (zdeg+wdeg)/(m+1)·|a|`.
pub fn fejer_deviation_bound(p: &BivariatePolyMatrix, m: usize) -> f64 {
    p.weighted_coeff_sum(|t| ((t.zdeg + t.wdeg) as f64) / ((m + 1) as f64))
}
