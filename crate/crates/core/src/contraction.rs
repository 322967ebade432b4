//! Row contractions, defect spaces, purity, and structure splittings.
//!
//! A row contraction is a tuple `T = (T_1, ..., T_n)` of operators on a
//! common space with `‖Σ T_i T_i*‖ ≤ 1`. This module validates such
//! tuples, computes their defect operators and rank-reduced defect
//! coordinate maps, certifies purity (`Σ T_α T_α* → 0` over words of
//! growing length), and splits a single contraction into its unitary and
//! completely non-unitary parts. The four-block joint splitting of a
//! commuting pair is built on top of the single-operator split.

use num_complex::Complex64;

use crate::cmatrix::{
    adjoint, eig, eigh, eye, operator_norm, orthonormal_complement, svd, zeros, CMatrix,
};
use crate::error::{Error, Result};
use crate::tol::{Tolerances, EIGEN_CLUSTER_RADIUS};

type C64 = Complex64;

/// Iterate norms below this value certify purity outright.
const PURE_NORM_FLOOR: f64 = 1e-12;

/// Minimum iteration budget for the purity recursion; defective
/// contractions with spectral radius near 1 have transient growth well
/// past `4 * dim` steps, so the recursion runs longer before giving up.
const PURE_MIN_ITERS: usize = 400;

/// Ratios over the trailing window must stay below `1 - this` to certify
/// geometric decay.
const DECAY_MARGIN: f64 = 1e-9;

/// Width of the trailing window used for decay certification.
const DECAY_WINDOW: usize = 10;

/// Eigenvalue moduli in `(1 - AMBIGUITY_FACTOR * margin, 1 - margin)`
/// cannot be classified as unimodular or strictly inside the disk and are
/// rejected with `MarginViolation`.
const AMBIGUITY_FACTOR: f64 = 2.0;

/// Validated tuple of same-shape matrices with `‖Σ A_i A_i*‖ ≤ 1 + slack`.
///
/// Entries may be rectangular (maps from one space to another); the row
/// gram lives on the common codomain.
#[derive(Debug, Clone)]
pub struct RowTuple {
    entries: Vec<CMatrix>,
    rows: usize,
    cols: usize,
}

impl RowTuple {
    /// Validates shapes, finiteness, and the row-contraction bound.
    pub fn new(entries: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("row tuple must have n >= 1 entries".into()));
        }
        let (rows, cols) = entries[0].dim();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("row tuple entries must be non-empty".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.dim() != (rows, cols) {
                return Err(Error::ShapeMismatch(format!(
                    "row tuple entry {i} has shape {:?}, expected {:?}",
                    e.dim(),
                    (rows, cols)
                )));
            }
            crate::cmatrix::require_finite(e, &format!("row tuple entry {i}"))?;
        }
        let tuple = RowTuple { entries, rows, cols };
        let norm = tuple.row_norm()?;
        if norm > 1.0 + tol.contraction_slack {
            return Err(Error::NotContraction(format!(
                "row norm {norm:.12} exceeds 1 + {:.1e}",
                tol.contraction_slack
            )));
        }
        Ok(tuple)
    }

    /// Number of entries in the tuple.
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// Codomain dimension.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Domain dimension.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The `i`-th entry (0-based).
    pub fn entry(&self, i: usize) -> &CMatrix {
        &self.entries[i]
    }

    /// All entries.
    pub fn entries(&self) -> &[CMatrix] {
        &self.entries
    }

    /// `Σ A_i A_i*` on the codomain.
    pub fn row_gram(&self) -> CMatrix {
        let mut g = zeros(self.rows, self.rows);
        for e in &self.entries {
            g = g + e.dot(&adjoint(e));
        }
        g
    }

    /// `‖Σ A_i A_i*‖`.
    pub fn row_norm(&self) -> Result<f64> {
        operator_norm(&self.row_gram())
    }
}

/// Row contraction with square entries acting on one space.
#[derive(Debug, Clone)]
pub struct RowContraction {
    tuple: RowTuple,
}

impl RowContraction {
    /// Validates a tuple of square matrices on a common space.
    pub fn new(entries: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        let tuple = RowTuple::new(entries, tol)?;
        if tuple.rows != tuple.cols {
            return Err(Error::ShapeMismatch(format!(
                "row contraction entries must be square, got {} x {}",
                tuple.rows, tuple.cols
            )));
        }
        Ok(RowContraction { tuple })
    }

    /// Single-operator convenience constructor.
    pub fn single(t: CMatrix, tol: &Tolerances) -> Result<Self> {
        Self::new(vec![t], tol)
    }

    /// Number of entries.
    pub fn n(&self) -> usize {
        self.tuple.n()
    }

    /// Space dimension.
    pub fn dim(&self) -> usize {
        self.tuple.rows
    }

    /// The `i`-th entry (0-based).
    pub fn entry(&self, i: usize) -> &CMatrix {
        self.tuple.entry(i)
    }

    /// All entries.
    pub fn entries(&self) -> &[CMatrix] {
        self.tuple.entries()
    }

    /// Underlying tuple view.
    pub fn as_tuple(&self) -> &RowTuple {
        &self.tuple
    }

    /// `Σ T_i T_i*`.
    pub fn row_gram(&self) -> CMatrix {
        self.tuple.row_gram()
    }

    /// `‖Σ T_i T_i*‖`.
    pub fn row_norm(&self) -> Result<f64> {
        self.tuple.row_norm()
    }
}

/// Commutation residual threshold for a pair of operators, scaled the
/// same way everywhere commutators are tested.
pub(crate) fn commutator_scale(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    Ok((1.0 + operator_norm(a)?) * (1.0 + operator_norm(b)?))
}

/// Pair of row contractions on the same space whose entries cross-commute.
#[derive(Debug, Clone)]
pub struct CommutingPair {
    t1: RowContraction,
    t2: RowContraction,
}

impl CommutingPair {
    /// Validates dimensions and every cross commutator `[T_{1,i}, T_{2,j}]`.
    pub fn new(t1: RowContraction, t2: RowContraction, tol: &Tolerances) -> Result<Self> {
        if t1.dim() != t2.dim() {
            return Err(Error::ShapeMismatch(format!(
                "pair acts on different spaces: {} vs {}",
                t1.dim(),
                t2.dim()
            )));
        }
        for i in 0..t1.n() {
            for j in 0..t2.n() {
                let a = t1.entry(i);
                let b = t2.entry(j);
                let resid = operator_norm(&(a.dot(b) - b.dot(a)))?;
                let scale = commutator_scale(a, b)?;
                if resid > tol.residual_tol * scale {
                    return Err(Error::NotCommuting(format!(
                        "commutator [T1[{i}], T2[{j}]] has norm {resid:.3e} \
                         (threshold {:.3e})",
                        tol.residual_tol * scale
                    )));
                }
            }
        }
        Ok(CommutingPair { t1, t2 })
    }

    /// First tuple.
    pub fn t1(&self) -> &RowContraction {
        &self.t1
    }

    /// Second tuple.
    pub fn t2(&self) -> &RowContraction {
        &self.t2
    }

    /// Common space dimension.
    pub fn dim(&self) -> usize {
        self.t1.dim()
    }
}

/// Defect operator `Δ_{T,r} = (I - r² Σ A_i A_i*)^{1/2}` on the codomain.
pub fn defect_matrix(entries: &[CMatrix], r: f64, tol: &Tolerances) -> Result<CMatrix> {
    if !(0.0 < r && r <= 1.0) {
        return Err(Error::InvalidInput(format!("defect radius r = {r} outside (0, 1]")));
    }
    let tuple = RowTuple::new(entries.to_vec(), tol)?;
    let mut p = tuple.row_gram().mapv(|z| z * (-r * r));
    for i in 0..tuple.rows {
        p[(i, i)] += 1.0;
    }
    crate::cmatrix::hermitian_sqrt(&p, tol).map_err(|e| match e {
        // A row norm within slack of 1 can push an eigenvalue of I - r²G
        // slightly negative; that case is clamped inside hermitian_sqrt,
        // so a real PSD failure here means the tuple was not contractive.
        Error::NotPsd(msg) => Error::NotContraction(msg),
        other => other,
    })
}

/// Rank-reduced coordinate map onto the defect space.
///
/// `map` is `d x rows` with `map* map = Δ²`, so `h ↦ map h` preserves the
/// inner products `⟨Δh, Δk⟩`; `d` is the numerical rank of the defect.
#[derive(Debug, Clone)]
pub struct DefectSpace {
    /// Coordinate map, one row per retained defect direction.
    pub map: CMatrix,
}

impl DefectSpace {
    /// Defect rank `d`.
    pub fn dim(&self) -> usize {
        self.map.nrows()
    }
}

/// Computes the defect coordinate map of a tuple at radius `r`.
///
/// Defect directions are eigenvectors of `I - r² Σ A_i A_i*` with
/// eigenvalue above `max(rank_tol * λ_max, hermitian_psd_clamp)`, taken
/// in descending eigenvalue order; each row of the map is `√λ_i v_i*`.
/// The absolute floor mirrors the negative-side clamp: eigenvalues within
/// `±hermitian_psd_clamp` of zero are roundoff, not defect directions.
pub fn defect_space(entries: &[CMatrix], r: f64, tol: &Tolerances) -> Result<DefectSpace> {
    if !(0.0 < r && r <= 1.0) {
        return Err(Error::InvalidInput(format!("defect radius r = {r} outside (0, 1]")));
    }
    let tuple = RowTuple::new(entries.to_vec(), tol)?;
    let dim = tuple.rows;
    let mut p = tuple.row_gram().mapv(|z| z * (-r * r));
    for i in 0..dim {
        p[(i, i)] += 1.0;
    }
    let (vals, vecs) = eigh(&p)?;
    if let Some(&lo) = vals.first() {
        if lo < -tol.hermitian_psd_clamp {
            return Err(Error::NotContraction(format!(
                "defect eigenvalue {lo:.6e} below the PSD clamp"
            )));
        }
    }
    let lam_max = vals.last().copied().unwrap_or(0.0).max(0.0);
    let floor = (tol.rank_tol * lam_max).max(tol.hermitian_psd_clamp);
    // Rows ordered by descending eigenvalue; ties keep ascending input
    // index (stable sort), so a zero tuple yields the identity map.
    let mut keep: Vec<usize> = (0..dim).filter(|&i| vals[i] > floor).collect();
    keep.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let mut map = zeros(keep.len(), dim);
    for (row, &i) in keep.iter().enumerate() {
        // Canonical phase: rotate each eigenvector so its largest entry
        // (ties broken by smallest index) is real positive. Fixes the
        // otherwise arbitrary eigenvector phases, so equal inputs give
        // identical coordinate maps and a zero tuple maps to rows of I.
        let mut pivot = 0usize;
        let mut best = -1.0f64;
        for c in 0..dim {
            let a = vecs[(c, i)].norm();
            if a > best + 1e-15 {
                best = a;
                pivot = c;
            }
        }
        let phase = if best > 0.0 {
            let z = vecs[(pivot, i)];
            z.conj() / z.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let s = vals[i].sqrt();
        for c in 0..dim {
            map[(row, c)] = (vecs[(c, i)] * phase).conj() * s;
        }
    }
    Ok(DefectSpace { map })
}

/// Purity evidence: the recorded iterate norms `‖X_k‖` of
/// `X_0 = I, X_{k+1} = Σ T_i X_k T_i*` plus a certified decay ratio.
#[derive(Debug, Clone)]
pub struct PurityCertificate {
    /// Whether purity was certified.
    pub pure: bool,
    /// `‖X_k‖` for `k = 0, 1, ..., K`; exact values.
    pub iterates: Vec<f64>,
    /// Largest trailing-window ratio `‖X_{k+1}‖ / ‖X_k‖` when it
    /// certifies decay (`< 1`), else `None`.
    pub decay_ratio: Option<f64>,
}

impl PurityCertificate {
    /// Sound upper bound on `‖X_k‖`: exact when the iterate was computed,
    /// geometrically extrapolated (or held constant) beyond.
    pub fn tail_norm(&self, k: usize) -> f64 {
        if k < self.iterates.len() {
            return self.iterates[k];
        }
        let last = *self.iterates.last().unwrap_or(&1.0);
        match self.decay_ratio {
            Some(r) => last * r.powi((k + 1 - self.iterates.len()) as i32),
            None => last,
        }
    }

    /// Sound upper bound on `Σ_{j ≥ from} ‖X_j‖`; infinite when no decay
    /// was certified.
    pub fn tail_sum(&self, from: usize) -> f64 {
        let ratio = match self.decay_ratio {
            Some(r) if r < 1.0 => r,
            _ => return f64::INFINITY,
        };
        let mut total = 0.0;
        for k in from..self.iterates.len() {
            total += self.iterates[k];
        }
        let start = from.max(self.iterates.len());
        total += self.tail_norm(start) / (1.0 - ratio);
        total
    }
}

/// Runs the purity recursion and certifies decay.
///
/// Purity is certified when some iterate norm falls below `1e-12`, or
/// when the trailing-window ratios all certify strict geometric decay.
/// `min_iters` extends the recursion so that exact iterate norms are
/// available at least up to that index.
pub fn purity_certificate(
    t: &RowContraction,
    min_iters: usize,
    _tol: &Tolerances,
) -> Result<PurityCertificate> {
    let dim = t.dim();
    let budget = (4 * dim).max(PURE_MIN_ITERS).max(min_iters);
    let mut x = eye(dim);
    let mut norms = vec![1.0f64];
    let mut hit_floor = false;
    for _ in 0..budget {
        let mut next = zeros(dim, dim);
        for e in t.entries() {
            next = next + e.dot(&x).dot(&adjoint(e));
        }
        x = next;
        let norm = operator_norm(&x)?;
        norms.push(norm);
        if norm < PURE_NORM_FLOOR && norms.len() > min_iters {
            hit_floor = true;
            break;
        }
    }
    let mut decay_ratio = None;
    if norms.len() > DECAY_WINDOW {
        let mut worst = 0.0f64;
        let mut ok = true;
        for w in norms[norms.len() - DECAY_WINDOW - 1..].windows(2) {
            if w[0] <= 0.0 {
                // Reached exact zero; decay is immediate.
                continue;
            }
            let ratio = w[1] / w[0];
            worst = worst.max(ratio);
            if ratio > 1.0 - DECAY_MARGIN {
                ok = false;
            }
        }
        if ok {
            decay_ratio = Some(worst);
        }
    }
    let pure = hit_floor || norms.last().copied().unwrap_or(1.0) < PURE_NORM_FLOOR
        || decay_ratio.is_some();
    Ok(PurityCertificate { pure, iterates: norms, decay_ratio })
}

/// Purity check with the default iteration budget.
pub fn is_pure(t: &RowContraction, tol: &Tolerances) -> Result<PurityCertificate> {
    purity_certificate(t, 0, tol)
}

/// Unitary / completely-non-unitary splitting of one contraction.
#[derive(Debug, Clone)]
pub struct UnitaryCnuSplit {
    /// Orthonormal basis (columns) of the unitary part.
    pub basis_u: CMatrix,
    /// Orthonormal basis (columns) of the c.n.u. part.
    pub basis_cnu: CMatrix,
    /// Compression of the input to the unitary part.
    pub t_u: CMatrix,
    /// Compression of the input to the c.n.u. part.
    pub t_cnu: CMatrix,
}

impl UnitaryCnuSplit {
    /// Dimension of the unitary part.
    pub fn dim_u(&self) -> usize {
        self.basis_u.ncols()
    }

    /// Dimension of the c.n.u. part.
    pub fn dim_cnu(&self) -> usize {
        self.basis_cnu.ncols()
    }
}

/// Greedy clustering of complex values by absolute radius.
///
/// Values are processed in `(re, im)`-sorted order; a value joins the
/// current cluster when it lies within `radius` of the running mean.
/// Returns `(mean, member indices)` per cluster.
pub(crate) fn cluster_values(vals: &[C64], radius: f64) -> Vec<(C64, Vec<usize>)> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| {
        (vals[a].re, vals[a].im)
            .partial_cmp(&(vals[b].re, vals[b].im))
            .unwrap()
    });
    let mut clusters: Vec<(C64, Vec<usize>)> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some((mean, members)) if (vals[i] - *mean).norm() <= radius => {
                members.push(i);
                let k = members.len() as f64;
                *mean = *mean + (vals[i] - *mean) / k;
            }
            _ => clusters.push((vals[i], vec![i])),
        }
    }
    clusters
}

/// Orthonormal basis of the (approximate) nullspace of `t - λ I`,
/// taken as the right singular vectors of the `count` smallest singular
/// values. Deterministic via the SVD ordering.
pub(crate) fn eigenspace_basis(t: &CMatrix, lambda: C64, count: usize) -> Result<CMatrix> {
    let n = t.nrows();
    let mut shifted = t.clone();
    for i in 0..n {
        shifted[(i, i)] -= lambda;
    }
    let (_, _, v) = svd(&shifted)?;
    let mut basis = zeros(n, count);
    for k in 0..count {
        let col = n - count + k;
        for r in 0..n {
            basis[(r, k)] = v[(r, col)];
        }
    }
    Ok(basis)
}

/// Splits a contraction into its unitary and c.n.u. parts.
///
/// Eigenvalues with modulus at least `1 - margin` are unimodular, those
/// below `1 - 2 * margin` belong to the c.n.u. part, and anything in the
/// band between is ambiguous and rejected with `MarginViolation`. Both
/// returned bases reduce the operator within `residual_tol`.
pub fn unitary_cnu_split(t: &CMatrix, tol: &Tolerances) -> Result<UnitaryCnuSplit> {
    let n = t.nrows();
    if t.ncols() != n {
        return Err(Error::ShapeMismatch("unitary_cnu_split: not square".into()));
    }
    let norm = operator_norm(t)?;
    if norm > 1.0 + tol.contraction_slack {
        return Err(Error::NotContraction(format!("operator norm {norm:.12} exceeds 1")));
    }
    let (vals, _) = eig(t)?;
    let margin = tol.unimodular_margin;
    let mut unimodular_idx = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        let m = v.norm();
        if m >= 1.0 - margin {
            unimodular_idx.push(i);
        } else if m > 1.0 - AMBIGUITY_FACTOR * margin {
            return Err(Error::MarginViolation(format!(
                "eigenvalue modulus {m:.15} lies inside the band \
                 (1 - {:.1e}, 1 - {:.1e})",
                AMBIGUITY_FACTOR * margin,
                margin
            )));
        }
    }
    // Cluster the unimodular eigenvalues and collect per-cluster
    // eigenspace bases; distinct unimodular eigenspaces of a contraction
    // are mutually orthogonal, so a single re-orthogonalization pass
    // cleans up roundoff.
    let uni_vals: Vec<C64> = unimodular_idx.iter().map(|&i| vals[i]).collect();
    let clusters = cluster_values(&uni_vals, EIGEN_CLUSTER_RADIUS);
    let k_u: usize = clusters.iter().map(|(_, m)| m.len()).sum();
    let mut basis_u = zeros(n, k_u);
    let mut col = 0usize;
    for (mean, members) in &clusters {
        let block = eigenspace_basis(t, *mean, members.len())?;
        for j in 0..members.len() {
            for r in 0..n {
                basis_u[(r, col)] = block[(r, j)];
            }
            col += 1;
        }
    }
    if k_u > 0 {
        basis_u = orthonormalize_columns(&basis_u)?;
    }
    let basis_cnu = orthonormal_complement(&basis_u)?;
    let t_u = adjoint(&basis_u).dot(t).dot(&basis_u);
    let t_cnu = adjoint(&basis_cnu).dot(t).dot(&basis_cnu);
    // Certify that both subspaces reduce the operator and that the parts
    // have the advertised character.
    let off1 = operator_norm(&adjoint(&basis_u).dot(t).dot(&basis_cnu))?;
    let off2 = operator_norm(&adjoint(&basis_cnu).dot(t).dot(&basis_u))?;
    if off1 > tol.residual_tol || off2 > tol.residual_tol {
        return Err(Error::Internal(format!(
            "unitary/cnu split does not reduce the operator \
             (off-block norms {off1:.3e}, {off2:.3e})"
        )));
    }
    if k_u > 0 {
        let udef = operator_norm(&(adjoint(&t_u).dot(&t_u) - eye(k_u)))?;
        if udef > tol.residual_tol {
            return Err(Error::Internal(format!(
                "unitary part is not unitary (defect {udef:.3e})"
            )));
        }
    }
    Ok(UnitaryCnuSplit { basis_u, basis_cnu, t_u, t_cnu })
}

/// Plain modified Gram-Schmidt (no pivoting) with one re-orthogonalization
/// pass; input columns must be numerically independent.
pub(crate) fn orthonormalize_columns(m: &CMatrix) -> Result<CMatrix> {
    let (n, k) = m.dim();
    let mut q = zeros(n, k);
    for j in 0..k {
        let mut v: Vec<C64> = (0..n).map(|r| m[(r, j)]).collect();
        for _pass in 0..2 {
            for p in 0..j {
                let inner: C64 = (0..n).map(|r| q[(r, p)].conj() * v[r]).sum();
                for r in 0..n {
                    v[r] -= q[(r, p)] * inner;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return Err(Error::Internal(
                "orthonormalize_columns: dependent columns".into(),
            ));
        }
        for r in 0..n {
            q[(r, j)] = v[r] / norm;
        }
    }
    Ok(q)
}

/// Character of one variable on one joint invariant block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartClass {
    /// The compressed operator is unitary.
    Unitary,
    /// The compressed operator is completely non-unitary.
    Cnu,
}

/// One block of the four-way joint splitting of a commuting pair.
#[derive(Debug, Clone)]
pub struct StructureBlock {
    /// Orthonormal basis (columns) of the block.
    pub basis: CMatrix,
    /// Compression of the first operator.
    pub t1: CMatrix,
    /// Compression of the second operator.
    pub t2: CMatrix,
    /// Character of the first operator on this block.
    pub class1: PartClass,
    /// Character of the second operator on this block.
    pub class2: PartClass,
}

impl StructureBlock {
    /// Block dimension.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Joint splitting of a commuting pair into the four character blocks
/// (unitary/unitary, unitary/cnu, cnu/unitary, cnu/cnu), in that order.
#[derive(Debug, Clone)]
pub struct StructureDecomposition {
    /// The four blocks; some may have dimension zero.
    pub blocks: Vec<StructureBlock>,
}

/// Builds the four-block joint splitting of a commuting pair of single
/// contractions. Both operators are split with the margin-band policy;
/// every block reduces both operators within `residual_tol` and the
/// direct sum reconstructs them.
pub fn structure_decomposition(
    pair: &CommutingPair,
    tol: &Tolerances,
) -> Result<StructureDecomposition> {
    if pair.t1().n() != 1 || pair.t2().n() != 1 {
        return Err(Error::InvalidInput(
            "structure_decomposition expects single contractions (n1 = n2 = 1)".into(),
        ));
    }
    let t1 = pair.t1().entry(0);
    let t2 = pair.t2().entry(0);
    let dim = pair.dim();
    let split1 = unitary_cnu_split(t1, tol)?;

    let mut blocks = Vec::with_capacity(4);
    for (outer_basis, class1) in [
        (&split1.basis_u, PartClass::Unitary),
        (&split1.basis_cnu, PartClass::Cnu),
    ] {
        let k = outer_basis.ncols();
        if k == 0 {
            for class2 in [PartClass::Unitary, PartClass::Cnu] {
                blocks.push(StructureBlock {
                    basis: zeros(dim, 0),
                    t1: zeros(0, 0),
                    t2: zeros(0, 0),
                    class1,
                    class2,
                });
            }
            continue;
        }
        // The second operator must reduce each part of the first; for a
        // genuinely commuting pair this holds automatically.
        let p = outer_basis.dot(&adjoint(outer_basis));
        let q = eye(dim) - &p;
        let off1 = operator_norm(&q.dot(t2).dot(&p))?;
        let off2 = operator_norm(&p.dot(t2).dot(&q))?;
        if off1 > tol.residual_tol || off2 > tol.residual_tol {
            return Err(Error::Internal(format!(
                "second operator does not reduce a part of the first \
                 (off-block norms {off1:.3e}, {off2:.3e})"
            )));
        }
        let t2_part = adjoint(outer_basis).dot(t2).dot(outer_basis);
        let split2 = unitary_cnu_split(&t2_part, tol)?;
        for (inner_basis, class2) in [
            (&split2.basis_u, PartClass::Unitary),
            (&split2.basis_cnu, PartClass::Cnu),
        ] {
            let basis = outer_basis.dot(inner_basis);
            let t1b = adjoint(&basis).dot(t1).dot(&basis);
            let t2b = adjoint(&basis).dot(t2).dot(&basis);
            blocks.push(StructureBlock { basis, t1: t1b, t2: t2b, class1, class2 });
        }
    }

    let total: usize = blocks.iter().map(|b| b.dim()).sum();
    if total != dim {
        return Err(Error::Internal(format!(
            "structure blocks cover dimension {total}, expected {dim}"
        )));
    }
    // Reconstruction certificates.
    for (name, t) in [("first", t1), ("second", t2)] {
        let mut rebuilt = zeros(dim, dim);
        for b in &blocks {
            if b.dim() == 0 {
                continue;
            }
            let tb = if name == "first" { &b.t1 } else { &b.t2 };
            rebuilt = rebuilt + b.basis.dot(tb).dot(&adjoint(&b.basis));
        }
        let resid = operator_norm(&(rebuilt - t))?;
        if resid > tol.residual_tol {
            return Err(Error::Internal(format!(
                "structure blocks fail to reconstruct the {name} operator \
                 (residual {resid:.3e})"
            )));
        }
    }
    Ok(StructureDecomposition { blocks })
}
