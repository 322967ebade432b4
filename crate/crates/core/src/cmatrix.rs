//! Dense complex matrices and the decompositions the pipeline relies on.
//!
//! Matrices are stored as `ndarray::Array2<Complex64>`. Spectral
//! factorizations (SVD, eigendecompositions) are delegated to `faer`,
//! which is deterministic: identical inputs produce bit-identical
//! factors, so every construction downstream is reproducible. Triangular
//! solves, Cholesky, and the pivoted orthonormal-completion routine are
//! implemented here directly because their pivoting orders are part of
//! the crate's determinism contract.

use ndarray::{concatenate, Array2, Axis};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// Scalar type used everywhere in the crate.
pub type C64 = Complex64;

/// Dense complex matrix.
pub type CMatrix = Array2<C64>;

/// `n x n` identity.
pub fn eye(n: usize) -> CMatrix {
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Zero matrix of the given shape.
pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    Array2::from_elem((rows, cols), C64::new(0.0, 0.0))
}

/// Conjugate transpose.
pub fn adjoint(a: &CMatrix) -> CMatrix {
    let (r, c) = a.dim();
    Array2::from_shape_fn((c, r), |(i, j)| a[(j, i)].conj())
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Frobenius norm.
pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Errors unless every entry is finite.
pub fn require_finite(a: &CMatrix, context: &str) -> Result<()> {
    for ((i, j), z) in a.indexed_iter() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidInput(format!(
                "{context}: non-finite entry at ({i}, {j})"
            )));
        }
    }
    Ok(())
}

/// Stacks blocks vertically. All blocks must share a column count.
pub fn vstack(blocks: &[CMatrix]) -> Result<CMatrix> {
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    concatenate(Axis(0), &views)
        .map_err(|e| Error::ShapeMismatch(format!("vstack: {e}")))
}

/// Stacks blocks horizontally. All blocks must share a row count.
pub fn hstack(blocks: &[CMatrix]) -> Result<CMatrix> {
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    concatenate(Axis(1), &views)
        .map_err(|e| Error::ShapeMismatch(format!("hstack: {e}")))
}

/// Kronecker product `a ⊗ b`; block `(i, j)` of the result is `a[i,j] * b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

fn to_faer(a: &CMatrix) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, faer::c64>) -> CMatrix {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = to_faer(a)
        .svd()
        .map_err(|e| Error::Internal(format!("svd failed to converge: {e:?}")))?;
    let sv = svd.S().column_vector();
    let mut out: Vec<f64> = (0..sv.nrows()).map(|i| sv[i].re).collect();
    out.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(out)
}

/// Operator (spectral) norm, the largest singular value.
pub fn operator_norm(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Operator-norm distance between two matrices of equal shape.
pub fn op_dist(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "op_dist: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    operator_norm(&(a - b))
}

/// Full SVD `a = U diag(s) V^H` with `s` descending.
///
/// `U` is `m x m`, `V` is `n x n`; `s` has `min(m, n)` entries.
pub fn svd(a: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        return Ok((eye(m), Vec::new(), eye(n)));
    }
    let f = to_faer(a)
        .svd()
        .map_err(|e| Error::Internal(format!("svd failed to converge: {e:?}")))?;
    let sv = f.S().column_vector();
    let mut order: Vec<usize> = (0..sv.nrows()).collect();
    order.sort_by(|&x, &y| sv[y].re.partial_cmp(&sv[x].re).unwrap());
    let s: Vec<f64> = order.iter().map(|&i| sv[i].re).collect();
    let u_raw = from_faer(f.U());
    let v_raw = from_faer(f.V());
    // Reorder the first min(m, n) columns to match the sorted singular
    // values; remaining columns (null directions) keep faer's order.
    let mut u = u_raw.clone();
    let mut v = v_raw.clone();
    for (new, &old) in order.iter().enumerate() {
        if new != old {
            for r in 0..m {
                u[(r, new)] = u_raw[(r, old)];
            }
            for r in 0..n {
                v[(r, new)] = v_raw[(r, old)];
            }
        }
    }
    Ok((u, s, v))
}

/// Eigendecomposition of a general square matrix: `a V = V diag(vals)`.
///
/// Pairs are sorted by eigenvalue real part, then imaginary part, so the
/// output order is reproducible and independent of backend internals.
pub fn eig(a: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let (m, n) = a.dim();
    if m != n {
        return Err(Error::ShapeMismatch(format!("eig: {m} x {n} not square")));
    }
    if n == 0 {
        return Ok((Vec::new(), eye(0)));
    }
    let f = to_faer(a)
        .eigen()
        .map_err(|e| Error::Internal(format!("eigendecomposition failed: {e:?}")))?;
    let sv = f.S().column_vector();
    let vecs_raw = from_faer(f.U().as_ref());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        (sv[x].re, sv[x].im)
            .partial_cmp(&(sv[y].re, sv[y].im))
            .unwrap()
    });
    let vals: Vec<C64> = order.iter().map(|&i| sv[i]).collect();
    let mut vecs = zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, new)] = vecs_raw[(r, old)];
        }
    }
    Ok((vals, vecs))
}

/// Spectral radius (largest eigenvalue modulus).
pub fn spectral_radius(a: &CMatrix) -> Result<f64> {
    Ok(eig(a)?
        .0
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm())))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the lower triangle of the input is read, so slight Hermiticity
/// defects are implicitly symmetrized away; callers validate Hermiticity
/// to their own tolerance first.
pub fn eigh(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let (m, n) = a.dim();
    if m != n {
        return Err(Error::ShapeMismatch(format!("eigh: {m} x {n} not square")));
    }
    if n == 0 {
        return Ok((Vec::new(), eye(0)));
    }
    let f = to_faer(a)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Internal(format!("hermitian eigen failed: {e:?}")))?;
    let sv = f.S().column_vector();
    let vecs_raw = from_faer(f.U().as_ref());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sv[x].re.partial_cmp(&sv[y].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| sv[i].re).collect();
    let mut vecs = zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, new)] = vecs_raw[(r, old)];
        }
    }
    Ok((vals, vecs))
}

/// Solves `a x = b` for square `a` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    use faer::prelude::*;
    let (m, n) = a.dim();
    if m != n {
        return Err(Error::ShapeMismatch(format!("solve: {m} x {n} not square")));
    }
    if b.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "solve: rhs has {} rows, expected {n}",
            b.nrows()
        )));
    }
    if n == 0 {
        return Ok(zeros(0, b.ncols()));
    }
    let lu = to_faer(a).partial_piv_lu();
    let x = from_faer(lu.solve(to_faer(b).as_ref()).as_ref());
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::IllConditioned(
            "linear system is numerically singular".into(),
        ));
    }
    Ok(x)
}

/// 2-norm condition number estimate, `s_max / s_min`.
pub fn cond_2(a: &CMatrix) -> Result<f64> {
    let s = singular_values(a)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Solves `l x = b` with `l` lower triangular by forward substitution.
pub fn solve_lower_triangular(l: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = l.nrows();
    if l.ncols() != n || b.nrows() != n {
        return Err(Error::ShapeMismatch("solve_lower_triangular".into()));
    }
    let mut x = b.clone();
    for j in 0..b.ncols() {
        for i in 0..n {
            let mut acc = x[(i, j)];
            for k in 0..i {
                acc -= l[(i, k)] * x[(k, j)];
            }
            let d = l[(i, i)];
            if d.norm() == 0.0 {
                return Err(Error::IllConditioned(
                    "triangular solve hit a zero pivot".into(),
                ));
            }
            x[(i, j)] = acc / d;
        }
    }
    Ok(x)
}

/// Solves `u x = b` with `u` upper triangular by back substitution.
pub fn solve_upper_triangular(u: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = u.nrows();
    if u.ncols() != n || b.nrows() != n {
        return Err(Error::ShapeMismatch("solve_upper_triangular".into()));
    }
    let mut x = b.clone();
    for j in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut acc = x[(i, j)];
            for k in i + 1..n {
                acc -= u[(i, k)] * x[(k, j)];
            }
            let d = u[(i, i)];
            if d.norm() == 0.0 {
                return Err(Error::IllConditioned(
                    "triangular solve hit a zero pivot".into(),
                ));
            }
            x[(i, j)] = acc / d;
        }
    }
    Ok(x)
}

/// Cholesky factor `l` (lower triangular, positive diagonal) of a
/// Hermitian positive definite matrix: `g = l l^H`.
///
/// Fails with `IllConditioned` when a pivot drops below
/// `rank_tol * max_diagonal`, which signals a numerically singular Gram
/// matrix rather than a programming error.
pub fn cholesky_lower(g: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::ShapeMismatch("cholesky: not square".into()));
    }
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(g[(i, i)].re));
    let floor = tol.rank_tol * max_diag.max(1.0);
    let mut l = zeros(n, n);
    for j in 0..n {
        let mut d = g[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= floor {
            return Err(Error::IllConditioned(format!(
                "cholesky pivot {d:.3e} at index {j} below floor {floor:.3e}"
            )));
        }
        let dj = d.sqrt();
        l[(j, j)] = C64::new(dj, 0.0);
        for i in j + 1..n {
            let mut acc = g[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / dj;
        }
    }
    Ok(l)
}

/// Hermitian square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-hermitian_psd_clamp, 0)` are clamped to zero;
/// anything more negative is a genuine PSD violation and is rejected.
pub fn hermitian_sqrt(p: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let (m, n) = p.dim();
    if m != n {
        return Err(Error::ShapeMismatch(format!(
            "hermitian_sqrt: {m} x {n} not square"
        )));
    }
    require_finite(p, "hermitian_sqrt")?;
    let herm_defect = operator_norm(&(p - &adjoint(p)))?;
    if herm_defect > tol.residual_tol * operator_norm(p)?.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "hermitian_sqrt: input is not Hermitian (defect {herm_defect:.3e})"
        )));
    }
    let sym = (p + &adjoint(p)).mapv(|z| z * 0.5);
    let (vals, vecs) = eigh(&sym)?;
    let mut rootvals = Vec::with_capacity(n);
    for &v in &vals {
        if v < -tol.hermitian_psd_clamp {
            return Err(Error::NotPsd(format!(
                "eigenvalue {v:.6e} below -{:.1e}",
                tol.hermitian_psd_clamp
            )));
        }
        rootvals.push(if v < 0.0 { 0.0 } else { v.sqrt() });
    }
    let mut scaled = vecs.clone();
    for (j, r) in rootvals.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] = scaled[(i, j)] * *r;
        }
    }
    Ok(scaled.dot(&adjoint(&vecs)))
}

/// Extends an `n x k` matrix with orthonormal columns to an orthonormal
/// basis, returning the `n x (n - k)` complement.
///
/// Columns are produced by modified Gram-Schmidt on `I - V V^H` with
/// column pivoting: each step takes the residual column of largest norm,
/// breaking exact ties by smallest index. The pivot order is part of the
/// determinism contract.
pub fn orthonormal_complement(v: &CMatrix) -> Result<CMatrix> {
    let (n, k) = v.dim();
    if k > n {
        return Err(Error::ShapeMismatch(format!(
            "orthonormal_complement: {k} columns exceed dimension {n}"
        )));
    }
    let need = n - k;
    let mut comp = zeros(n, need);
    if need == 0 {
        return Ok(comp);
    }
    // Residual columns of I - V V^H, deflated in place.
    let mut work = eye(n) - &v.dot(&adjoint(v));
    let mut active: Vec<usize> = (0..n).collect();
    for step in 0..need {
        let mut best = 0usize;
        let mut best_norm = -1.0f64;
        for (pos, &col) in active.iter().enumerate() {
            let norm: f64 = (0..n).map(|r| work[(r, col)].norm_sqr()).sum::<f64>().sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = pos;
            }
        }
        if best_norm < 1e-6 {
            return Err(Error::Internal(format!(
                "orthonormal_complement: residual rank deficient at step {step} \
                 (pivot norm {best_norm:.3e})"
            )));
        }
        let col = active.remove(best);
        let mut q: Vec<C64> = (0..n).map(|r| work[(r, col)]).collect();
        // Re-orthogonalize once against V and the columns already chosen,
        // then normalize.
        for j in 0..k {
            let inner: C64 = (0..n).map(|r| v[(r, j)].conj() * q[r]).sum();
            for r in 0..n {
                q[r] -= v[(r, j)] * inner;
            }
        }
        for j in 0..step {
            let inner: C64 = (0..n).map(|r| comp[(r, j)].conj() * q[r]).sum();
            for r in 0..n {
                q[r] -= comp[(r, j)] * inner;
            }
        }
        let norm = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return Err(Error::Internal(
                "orthonormal_complement: candidate vanished after re-orthogonalization".into(),
            ));
        }
        for r in 0..n {
            comp[(r, step)] = q[r] / norm;
        }
        // Deflate the remaining residual columns.
        for &c in &active {
            let inner: C64 = (0..n).map(|r| comp[(r, step)].conj() * work[(r, c)]).sum();
            for r in 0..n {
                let d = comp[(r, step)] * inner;
                work[(r, c)] -= d;
            }
        }
    }
    Ok(comp)
}

/// Builds the unitary `u` with `u v = w` for isometries `v, w` of equal
/// shape, completing both to orthonormal bases deterministically.
pub fn unitary_completion(v: &CMatrix, w: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    if v.dim() != w.dim() {
        return Err(Error::ShapeMismatch(format!(
            "unitary_completion: {:?} vs {:?}",
            v.dim(),
            w.dim()
        )));
    }
    let (n, k) = v.dim();
    for (name, m) in [("first", v), ("second", w)] {
        let defect = operator_norm(&(adjoint(m).dot(m) - eye(k)))?;
        if defect > tol.residual_tol {
            return Err(Error::InvalidInput(format!(
                "unitary_completion: {name} factor is not an isometry (defect {defect:.3e})"
            )));
        }
    }
    let vc = orthonormal_complement(v)?;
    let wc = orthonormal_complement(w)?;
    let u = w.dot(&adjoint(v)) + wc.dot(&adjoint(&vc));
    let unitary_defect = operator_norm(&(adjoint(&u).dot(&u) - eye(n)))?;
    if unitary_defect > 1e-10 {
        return Err(Error::Internal(format!(
            "unitary_completion: result not unitary (defect {unitary_defect:.3e})"
        )));
    }
    let restriction = op_dist(&u.dot(v), w)?;
    if restriction > 1e-10 {
        return Err(Error::Internal(format!(
            "unitary_completion: restriction residual {restriction:.3e}"
        )));
    }
    Ok(u)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let mut out = zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            // Box-Muller; two uniform draws per normal pair.
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
            out[(i, j)] = C64::new(r * c, r * s) / std::f64::consts::SQRT_2;
        }
    }
    out
}

/// Haar-distributed unitary drawn from the given seeded generator.
///
/// QR of a Ginibre matrix with the R-diagonal phase fix, which makes the
/// distribution exactly Haar and the output deterministic per seed.
pub fn haar_unitary(rng: &mut ChaCha8Rng, n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Ok(eye(0));
    }
    let g = ginibre(rng, n, n);
    // Modified Gram-Schmidt QR; columns processed in order.
    let mut q = zeros(n, n);
    let mut r_diag = vec![C64::new(0.0, 0.0); n];
    let mut work = g.clone();
    for j in 0..n {
        for prev in 0..j {
            let inner: C64 = (0..n).map(|r| q[(r, prev)].conj() * work[(r, j)]).sum();
            for rr in 0..n {
                let d = q[(rr, prev)] * inner;
                work[(rr, j)] -= d;
            }
        }
        let norm = (0..n).map(|r| work[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Internal("haar_unitary: rank-deficient draw".into()));
        }
        for rr in 0..n {
            q[(rr, j)] = work[(rr, j)] / norm;
        }
        // Phase of the leading R entry for this column.
        let lead: C64 = (0..n).map(|r| q[(r, j)].conj() * g[(r, j)]).sum();
        r_diag[j] = lead / lead.norm();
    }
    for j in 0..n {
        let phase = r_diag[j].conj();
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}
