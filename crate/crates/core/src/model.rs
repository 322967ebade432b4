//! Finite Blaschke model of a completely non-unitary matrix
//! contraction: minimal polynomial extraction, the kernel-derivative
//! model space with an exactly computed Gram matrix, the compressed
//! shift, and the exact constrained Poisson kernel.
//!
//! The model basis for a root `λ` of multiplicity `n` consists of the
//! functions `v_j(z) = j!·z^j/(1 − λ̄z)^{j+1}`, `j < n`. All inner
//! products reduce to derivatives of `(x, y) ↦ 1/(1 − xy)`, which are
//! differentiated symbolically, so the Gram matrix carries no
//! truncation error.

use num_complex::Complex64;

use crate::cmatrix::{
    adjoint, cholesky_lower, cond_2, eig, eye, kron, operator_norm, op_dist, solve,
    solve_lower_triangular, zeros, CMatrix,
};
use crate::contraction::defect_space;
use crate::error::{Error, Result};
use crate::tol::{Tolerances, EIGEN_CLUSTER_RADIUS, ILL_CONDITIONED_RADIUS_GAP,
    RESOLVENT_COND_LIMIT};

type C64 = Complex64;

/// Annihilation tolerance for the compressed shift: `‖b(B)‖` must stay
/// below this after construction.
const ANNIHILATION_TOL: f64 = 1e-9;

/// Slack on `‖B‖ ≤ 1` for the compressed shift.
const SHIFT_NORM_SLACK: f64 = 1e-10;

/// Largest clustering radius tried when grouping eigenvalues; beyond
/// this the spectrum is considered unresolvable.
const MAX_CLUSTER_RADIUS: f64 = 1e-2;

/// Merge radius for `BlaschkeData::lcm`: closer root pairs are the same
/// root seen through two eigensolves.
const LCM_MATCH_RADIUS: f64 = 1e-6;

/// Roots of a finite Blaschke product with multiplicities, all strictly
/// inside the unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeData {
    roots: Vec<(C64, usize)>,
}

impl BlaschkeData {
    /// Validates root moduli, multiplicities, and pairwise distinctness.
    pub fn new(roots: Vec<(C64, usize)>, tol: &Tolerances) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::InvalidInput("need at least one root".into()));
        }
        for (i, (lam, n)) in roots.iter().enumerate() {
            if !lam.re.is_finite() || !lam.im.is_finite() {
                return Err(Error::InvalidInput(format!("root {i} is not finite")));
            }
            if *n == 0 {
                return Err(Error::InvalidInput(format!("root {i} has multiplicity 0")));
            }
            if lam.norm() > 1.0 - tol.unimodular_margin {
                return Err(Error::InvalidInput(format!(
                    "root {i} has modulus {:.12} too close to the circle",
                    lam.norm()
                )));
            }
        }
        for i in 0..roots.len() {
            for j in (i + 1)..roots.len() {
                if (roots[i].0 - roots[j].0).norm() < 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "roots {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(BlaschkeData { roots })
    }

    /// Roots with multiplicities, in stored order.
    pub fn roots(&self) -> &[(C64, usize)] {
        &self.roots
    }

    /// Total degree `Σ n_i`.
    pub fn degree(&self) -> usize {
        self.roots.iter().map(|(_, n)| n).sum()
    }

    /// Monic coefficients of `Π (z − λ_i)^{n_i}`, constant term first.
    pub fn monic_coefficients(&self) -> Vec<C64> {
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        for (lam, n) in &self.roots {
            for _ in 0..*n {
                let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
                for (k, c) in coeffs.iter().enumerate() {
                    next[k + 1] += *c;
                    next[k] -= *c * *lam;
                }
                coeffs = next;
            }
        }
        coeffs
    }

    /// Evaluates the Blaschke product
    /// `Π ((M − λI)(I − λ̄M)^{-1})^{n_i}` at a square matrix.
    pub fn eval_blaschke(&self, m: &CMatrix) -> Result<CMatrix> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::ShapeMismatch(format!("eval_blaschke: {r} x {c}")));
        }
        let mut acc = eye(r);
        for (lam, n) in &self.roots {
            let num = m - &eye(r).mapv(|z| z * *lam);
            let den = eye(r) - m.mapv(|z| z * lam.conj());
            for _ in 0..*n {
                acc = solve(&den, &num.dot(&acc))?;
            }
        }
        Ok(acc)
    }

    /// Least common multiple of two Blaschke products.
    ///
    /// Roots within `LCM_MATCH_RADIUS` of each other are treated as the
    /// same root (they come from eigensolves of related matrices and
    /// agree only to solver accuracy) and keep the larger multiplicity;
    /// all other roots are collected side by side.
    pub fn lcm(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        let mut roots = self.roots.clone();
        for &(lam, mult) in &other.roots {
            match roots.iter_mut().find(|(mu, _)| (*mu - lam).norm() <= LCM_MATCH_RADIUS) {
                Some((_, m)) => *m = (*m).max(mult),
                None => roots.push((lam, mult)),
            }
        }
        Self::new(roots, tol)
    }

    /// Evaluates the monic polynomial `Π (M − λI)^{n_i}` together with a
    /// scale (largest intermediate norm) for residual comparisons.
    pub fn eval_monic(&self, m: &CMatrix) -> Result<(CMatrix, f64)> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::ShapeMismatch(format!("eval_monic: {r} x {c}")));
        }
        let mut acc = eye(r);
        let mut scale = 1.0f64;
        for (lam, n) in &self.roots {
            let factor = m - &eye(r).mapv(|z| z * *lam);
            for _ in 0..*n {
                acc = factor.dot(&acc);
                scale = scale.max(operator_norm(&acc)?);
            }
        }
        Ok((acc, scale))
    }
}

fn cluster_with_radius(vals: &[C64], radius: f64) -> Vec<(C64, usize)> {
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for v in sorted {
        match clusters.iter_mut().find(|(c, _)| (*c - v).norm() <= radius) {
            Some((c, n)) => {
                // Running mean keeps the center stable as members join.
                *c = (*c * (*n as f64) + v) / ((*n + 1) as f64);
                *n += 1;
            }
            None => clusters.push((v, 1)),
        }
    }
    clusters.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());
    clusters
}

fn rank_of(m: &CMatrix, tol: &Tolerances) -> Result<usize> {
    let sv = crate::cmatrix::singular_values(m)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol.rank_tol * smax).count())
}

/// Minimal polynomial of a completely non-unitary matrix contraction,
/// as Blaschke roots with multiplicities.
///
/// Eigenvalues are clustered at an absolute radius, each cluster's
/// multiplicity is the smallest power at which `rank((T − λI)^j)`
/// becomes stationary, and the candidate polynomial is verified to
/// annihilate `T`. A defective eigenvalue of multiplicity `n` scatters
/// like `ε^{1/n}` under roundoff, so radii are tried coarse to fine:
/// the coarsest clustering whose polynomial verifies is the structural
/// answer (a fine radius would read a scattered Jordan cloud as many
/// spurious simple roots that still annihilate within tolerance). The
/// returned data always satisfies the annihilation certificate.
pub fn minimal_polynomial(t: &CMatrix, tol: &Tolerances) -> Result<BlaschkeData> {
    let (r, c) = t.dim();
    if r != c || r == 0 {
        return Err(Error::ShapeMismatch(format!(
            "minimal_polynomial: {r} x {c} not square and non-empty"
        )));
    }
    let norm = operator_norm(t)?;
    if norm > 1.0 + tol.contraction_slack {
        return Err(Error::NotContraction(format!("‖T‖ = {norm:.12} exceeds 1")));
    }
    let (vals, _) = eig(t)?;
    for v in &vals {
        if v.norm() > 1.0 - tol.unimodular_margin {
            return Err(Error::NotCnu(format!(
                "eigenvalue with modulus {:.12} within the unimodular margin",
                v.norm()
            )));
        }
    }
    let mut radius = MAX_CLUSTER_RADIUS;
    let mut last_err: Option<Error> = None;
    while radius >= EIGEN_CLUSTER_RADIUS * 0.999 {
        match candidate_minimal(t, &vals, radius, tol) {
            Ok(data) => return Ok(data),
            Err(e) => last_err = Some(e),
        }
        radius /= 10.0;
    }
    Err(last_err.unwrap_or_else(|| {
        Error::Internal("minimal polynomial search exhausted radii".into())
    }))
}

fn candidate_minimal(
    t: &CMatrix,
    vals: &[C64],
    radius: f64,
    tol: &Tolerances,
) -> Result<BlaschkeData> {
    let dim = t.dim().0;
    let clusters = cluster_with_radius(vals, radius);
    let mut roots = Vec::with_capacity(clusters.len());
    for (center, _) in &clusters {
        let factor = t - &eye(dim).mapv(|z| z * *center);
        let fnorm = operator_norm(&factor)?.max(1e-30);
        // Effective rank treats a power whose norm collapsed relative
        // to ‖factor‖^j as exactly zero; without this, the post-
        // annihilation noise matrix inherits the previous rank and
        // fakes stationarity one step early.
        let eff_rank = |m: &CMatrix, reference: f64| -> Result<usize> {
            if operator_norm(m)? <= tol.rank_tol * reference.max(1e-30) {
                Ok(0)
            } else {
                rank_of(m, tol)
            }
        };
        let mut power = factor.clone();
        let mut prev_rank = eff_rank(&power, fnorm)?;
        let mut mult = dim;
        for j in 1..=dim {
            let next = power.dot(&factor);
            let rank = eff_rank(&next, fnorm.powi(j as i32 + 1))?;
            if rank == prev_rank {
                mult = j;
                break;
            }
            prev_rank = rank;
            power = next;
        }
        roots.push((*center, mult));
    }
    let data = BlaschkeData::new(roots, tol)?;
    if data.degree() > dim {
        return Err(Error::Internal(format!(
            "candidate degree {} exceeds dimension {dim} at radius {radius:.1e}",
            data.degree()
        )));
    }
    let (m, scale) = data.eval_monic(t)?;
    let resid = operator_norm(&m)?;
    if resid > tol.residual_tol * scale.max(1.0) {
        return Err(Error::Internal(format!(
            "candidate polynomial residual {resid:.3e} at radius {radius:.1e}"
        )));
    }
    Ok(data)
}

/// Symbolic term `c·x^p·y^q·(1 − xy)^{-k}` closed under the partial
/// derivatives used for Gram entries.
#[derive(Debug, Clone, Copy)]
struct KernelTerm {
    c: f64,
    p: usize,
    q: usize,
    k: usize,
}

fn d_x(terms: &[KernelTerm]) -> Vec<KernelTerm> {
    let mut out = Vec::with_capacity(terms.len() * 2);
    for t in terms {
        if t.p > 0 {
            out.push(KernelTerm { c: t.c * t.p as f64, p: t.p - 1, q: t.q, k: t.k });
        }
        out.push(KernelTerm { c: t.c * t.k as f64, p: t.p, q: t.q + 1, k: t.k + 1 });
    }
    out
}

fn d_y(terms: &[KernelTerm]) -> Vec<KernelTerm> {
    let mut out = Vec::with_capacity(terms.len() * 2);
    for t in terms {
        if t.q > 0 {
            out.push(KernelTerm { c: t.c * t.q as f64, p: t.p, q: t.q - 1, k: t.k });
        }
        out.push(KernelTerm { c: t.c * t.k as f64, p: t.p + 1, q: t.q, k: t.k + 1 });
    }
    out
}

fn eval_terms(terms: &[KernelTerm], x: C64, y: C64) -> C64 {
    let base = C64::new(1.0, 0.0) - x * y;
    terms
        .iter()
        .map(|t| {
            C64::new(t.c, 0.0) * x.powu(t.p as u32) * y.powu(t.q as u32)
                / base.powu(t.k as u32)
        })
        .sum()
}

/// Exact Gram entry `⟨v^{ib}_{jb}, v^{ia}_{ja}⟩` as the mixed derivative
/// `(∂_x^{ja} ∂_y^{jb} 1/(1 − xy))(λ_{ia}, λ̄_{ib})`.
fn gram_entry(lam_a: C64, ja: usize, lam_b: C64, jb: usize) -> C64 {
    let mut terms = vec![KernelTerm { c: 1.0, p: 0, q: 0, k: 1 }];
    for _ in 0..ja {
        terms = d_x(&terms);
    }
    for _ in 0..jb {
        terms = d_y(&terms);
    }
    eval_terms(&terms, lam_a, lam_b.conj())
}

/// Orthonormalized finite model space of a Blaschke product: exact Gram
/// matrix, its Cholesky factor, and the compressed shift `B`.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    /// Defining roots and multiplicities.
    pub blaschke: BlaschkeData,
    /// Exact Gram matrix of the kernel-derivative basis.
    pub gram: CMatrix,
    /// Lower Cholesky factor of the Gram matrix.
    pub chol: CMatrix,
    /// Compressed shift in the orthonormalized basis.
    pub b: CMatrix,
    /// Set when some root has modulus above `1 − 1e-4`; the Gram
    /// conditioning degrades sharply there and consumers should treat
    /// certificates as advisory.
    pub ill_conditioned: bool,
}

impl ModelSpace {
    /// Model dimension `N = Σ n_i`.
    pub fn dim(&self) -> usize {
        self.blaschke.degree()
    }

    /// Flattened basis order: roots in stored order, derivative order
    /// ascending within each root.
    pub fn basis_labels(&self) -> Vec<(C64, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for (lam, n) in self.blaschke.roots() {
            for j in 0..*n {
                out.push((*lam, j));
            }
        }
        out
    }
}

/// Builds the model space for a Blaschke product and verifies every
/// structural invariant before returning.
///
/// The raw adjoint-shift action `v^i_j ↦ λ̄_i v^i_j + j·v^i_{j−1}` is
/// conjugated to the orthonormal basis through the Cholesky factor, so
/// `B* = L^H M L^{-H}`. Verified: `‖B‖ ≤ 1 + 1e-10`, spectral radius
/// below one, `‖b(B)‖ ≤ 1e-9`, and the spectrum of `B` matches the
/// roots with their multiplicities.
pub fn build_model_space(blaschke: &BlaschkeData, tol: &Tolerances) -> Result<ModelSpace> {
    let labels: Vec<(C64, usize)> = {
        let mut out = Vec::new();
        for (lam, n) in blaschke.roots() {
            for j in 0..*n {
                out.push((*lam, j));
            }
        }
        out
    };
    let n = labels.len();
    let mut gram = zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            gram[(a, b)] = gram_entry(labels[a].0, labels[a].1, labels[b].0, labels[b].1);
        }
    }
    // Symmetrize away the roundoff asymmetry of independent entry
    // evaluations.
    let gram = (&gram + &adjoint(&gram)).mapv(|z| z * 0.5);
    let chol = cholesky_lower(&gram, tol).map_err(|_| {
        Error::IllConditioned("model Gram matrix is not positive definite".into())
    })?;

    // Raw adjoint-shift matrix: block upper bidiagonal per root.
    let mut raw = zeros(n, n);
    let mut offset = 0usize;
    for (lam, m) in blaschke.roots() {
        for j in 0..*m {
            raw[(offset + j, offset + j)] = lam.conj();
            if j > 0 {
                raw[(offset + j - 1, offset + j)] = C64::new(j as f64, 0.0);
            }
        }
        offset += m;
    }
    // B* = L^H · raw · L^{-H}; the right factor comes from a
    // lower-triangular solve against L on the adjoint equation.
    let lh_raw = adjoint(&chol).dot(&raw);
    let bstar = adjoint(&solve_lower_triangular(&chol, &adjoint(&lh_raw))?);
    let b = adjoint(&bstar);

    // Invariant misses a little beyond their slack are conditioning
    // artifacts of a marginal Gram factor and are reported as such;
    // gross violations still signal an internal bug.
    let norm = operator_norm(&b)?;
    if norm > 1.0 + 1e-6 {
        return Err(Error::Internal(format!(
            "compressed shift norm {norm:.12} exceeds 1"
        )));
    }
    if norm > 1.0 + SHIFT_NORM_SLACK {
        return Err(Error::IllConditioned(format!(
            "compressed shift norm {norm:.12} beyond slack; Gram factor is marginal"
        )));
    }
    let (eigvals, _) = eig(&b)?;
    let rho = eigvals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if rho >= 1.0 {
        return Err(Error::IllConditioned(format!(
            "compressed shift spectral radius {rho}"
        )));
    }
    let annihilation = operator_norm(&blaschke.eval_blaschke(&b)?)?;
    if annihilation > 1e-3 {
        return Err(Error::Internal(format!(
            "Blaschke annihilation residual {annihilation:.3e}"
        )));
    }
    if annihilation > ANNIHILATION_TOL {
        return Err(Error::IllConditioned(format!(
            "Blaschke annihilation residual {annihilation:.3e} beyond tolerance"
        )));
    }
    verify_spectrum_multiset(&eigvals, blaschke)?;
    let ill_conditioned = blaschke
        .roots()
        .iter()
        .any(|(lam, _)| lam.norm() > 1.0 - ILL_CONDITIONED_RADIUS_GAP);
    Ok(ModelSpace { blaschke: blaschke.clone(), gram, chol, b, ill_conditioned })
}

/// Checks that the computed spectrum matches the declared roots with
/// multiplicities. A defective eigenvalue of multiplicity `n` moves by
/// about `ε^{1/n}` under a perturbation of size `ε`, so the matching
/// tolerance widens accordingly.
fn verify_spectrum_multiset(vals: &[C64], blaschke: &BlaschkeData) -> Result<()> {
    let mut counts = vec![0usize; blaschke.roots().len()];
    for v in vals {
        let (best, dist) = blaschke
            .roots()
            .iter()
            .enumerate()
            .map(|(i, (lam, _))| (i, (*lam - *v).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let n = blaschke.roots()[best].1;
        let tol = 1e-8f64.max(1e-12f64.powf(1.0 / n as f64));
        if dist > 100.0 * tol {
            return Err(Error::Internal(format!(
                "eigenvalue {v} is {dist:.3e} from its nearest root (tol {tol:.3e})"
            )));
        }
        if dist > tol {
            return Err(Error::IllConditioned(format!(
                "eigenvalue {v} is {dist:.3e} from its nearest root (tol {tol:.3e})"
            )));
        }
        counts[best] += 1;
    }
    for (i, (_, n)) in blaschke.roots().iter().enumerate() {
        if counts[i] != *n {
            return Err(Error::Internal(format!(
                "root {i} matched {} eigenvalues, expected {n}",
                counts[i]
            )));
        }
    }
    Ok(())
}

/// Exact constrained Poisson kernel of a pure matrix contraction into
/// `C^N ⊗ C^d` (model index major), for a model space whose polynomial
/// annihilates `T`.
///
/// The raw component for `v^i_j` is `j!·D·T*^j·(I − λ_iT*)^{-(j+1)}`
/// with `D` the defect coordinate map; rows are orthonormalized by a
/// blockwise lower-triangular solve against the Cholesky factor. The
/// isometry (`‖K*K − I‖ ≤ 1e-9`) and shift intertwining
/// (`‖K T* − (B*⊗I)K‖ ≤ 1e-9`) certificates are verified before return.
pub fn constrained_poisson_kernel_1d(
    t: &CMatrix,
    ms: &ModelSpace,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let (r, c) = t.dim();
    if r != c || r == 0 {
        return Err(Error::ShapeMismatch(format!("kernel argument {r} x {c}")));
    }
    let norm = operator_norm(t)?;
    if norm > 1.0 + tol.contraction_slack {
        return Err(Error::NotContraction(format!("‖T‖ = {norm:.12} exceeds 1")));
    }
    let rho = crate::cmatrix::spectral_radius(t)?;
    if rho >= 1.0 {
        return Err(Error::NotPure(format!(
            "spectral radius {rho:.12} not inside the disk"
        )));
    }
    let (m, scale) = ms.blaschke.eval_monic(t)?;
    let resid = operator_norm(&m)?;
    if resid > tol.residual_tol * scale.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "model polynomial does not annihilate the argument (residual {resid:.3e})"
        )));
    }
    let defect = defect_space(std::slice::from_ref(t), 1.0, tol)?;
    let d = defect.dim();
    let dim = r;
    let tstar = adjoint(t);
    let labels = ms.basis_labels();
    let n = labels.len();

    // Raw component blocks j!·D·T*^j·R^{j+1}, reusing the resolvent per
    // root as powers accumulate.
    let mut raw_blocks: Vec<CMatrix> = Vec::with_capacity(n);
    for (lam, mult) in ms.blaschke.roots() {
        let den = eye(dim) - tstar.mapv(|z| z * *lam);
        if cond_2(&den)? > RESOLVENT_COND_LIMIT {
            return Err(Error::IllConditioned(format!(
                "resolvent at root {lam} has condition number above 1e12"
            )));
        }
        let res = solve(&den, &eye(dim))?;
        let mut acc = defect.map.dot(&res);
        let mut factorial = 1.0f64;
        for j in 0..*mult {
            if j > 0 {
                factorial *= j as f64;
                acc = acc.dot(&tstar).dot(&res);
                // acc now equals D·(T*R)^j·R; reorder is free since T*
                // commutes with its own resolvent.
            }
            raw_blocks.push(acc.mapv(|z| z * factorial));
        }
    }

    // Blockwise forward substitution: K_a = (raw_a − Σ_{b<a} L[a,b]K_b)/L[a,a].
    let mut k = zeros(n * d, dim);
    for a in 0..n {
        let mut block = raw_blocks[a].clone();
        for b in 0..a {
            let coeff = ms.chol[(a, b)];
            for rr in 0..d {
                for cc in 0..dim {
                    block[(rr, cc)] -= coeff * k[(b * d + rr, cc)];
                }
            }
        }
        let piv = ms.chol[(a, a)];
        for rr in 0..d {
            for cc in 0..dim {
                k[(a * d + rr, cc)] = block[(rr, cc)] / piv;
            }
        }
    }

    let gram_defect = op_dist(&adjoint(&k).dot(&k), &eye(dim))?;
    if gram_defect > ANNIHILATION_TOL {
        return Err(Error::Internal(format!(
            "constrained kernel gram defect {gram_defect:.3e}"
        )));
    }
    let lhs = k.dot(&tstar);
    let rhs = kron(&adjoint(&ms.b), &eye(d)).dot(&k);
    let intertwine = op_dist(&lhs, &rhs)?;
    if intertwine > ANNIHILATION_TOL {
        return Err(Error::Internal(format!(
            "constrained kernel intertwining defect {intertwine:.3e}"
        )));
    }
    Ok(k)
}
