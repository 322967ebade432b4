//! Operator-norm bound calculators for commuting contraction pairs and
//! the inequality-chain verifier.
//!
//! All bounds here are certified upper bounds on `‖p(T1, T2)‖` that are
//! never larger than the bidisk sup norm of `p`: the model-based bound
//! evaluates `p` at the dilation pair `(B1 ⊗ I, φ(B1))`, the unitary
//! variants exploit spectral decompositions, and the composite bound
//! combines all of them across the four-way joint structure splitting.
//! `verify_chain` computes every applicable bound plus the torus
//! bracket and reports the resulting inequality chain as verdicts.

use serde::{Deserialize, Serialize};

use crate::cmatrix::{
    adjoint, eig, eye, kron, op_dist, operator_norm, singular_values, spectral_radius, zeros,
    CMatrix, C64,
};
use crate::contraction::{
    orthonormalize_columns, structure_decomposition, unitary_cnu_split, CommutingPair, PartClass,
    RowContraction,
};
use crate::dilation::{intertwining_isometry, transfer_eval_at_matrix, unitary_extension, ExtensionMode};
use crate::error::{Error, Result};
use crate::model::{build_model_space, minimal_polynomial};
use crate::polynomial::{eval_bivariate, torus_sup_norm, BiTerm, BivariatePolyMatrix, TorusBracket};
use crate::tol::{
    Tolerances, DEFAULT_CHAIN_TOL, EIGEN_CLUSTER_RADIUS, ILL_CONDITIONED_RADIUS_GAP,
};

/// Seed-spacing multiplier for per-extension sampling seeds.
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Singular values of the product of two spectral projectors at least
/// this close to 1 count as joint eigenspace directions.
const JOINT_EIG_COS_TOL: f64 = 1e-8;

/// The two-unitary bound is an equality theorem; its value must agree
/// with the direct norm to this tolerance.
const TWO_UNITARY_EQUALITY_TOL: f64 = 1e-10;

/// Model-based bound from one family of unitary extensions.
#[derive(Debug, Clone, Serialize)]
pub struct Am3Data {
    /// `min` over the canonical and all sampled extensions.
    pub value: f64,
    /// Bound from the deterministic extension.
    pub canonical: f64,
    /// `(seed, bound)` per sampled extension, in sampling order.
    pub sampled: Vec<(u64, f64)>,
    /// Conditioning caveat: the model Gram was flagged or the spectral
    /// radius sits near the circle. The value is still a valid bound in
    /// exact arithmetic but its numerical slack is unknown.
    pub flagged: bool,
}

/// Model-based bound `min_U ‖p(B1 ⊗ I, φ_U(B1))‖` over the canonical
/// extension and `samples` seeded random extensions.
///
/// Every unitary extension yields a dilation pair, so each evaluation
/// is an upper bound on `‖p(T1, T2)‖`; the minimum tightens it. The
/// sampling seeds are `seed ^ i·stride` for `i = 1..=samples`, recorded
/// in the result so a report can replay them.
pub fn bound_am3(
    pair: &CommutingPair,
    p: &BivariatePolyMatrix,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Am3Data> {
    if pair.t1().n() != 1 || pair.t2().n() != 1 {
        return Err(Error::InvalidInput(
            "model-based bound needs single contractions (n1 = n2 = 1)".into(),
        ));
    }
    let t1 = pair.t1().entry(0);
    let split = unitary_cnu_split(t1, tol)?;
    if split.dim_u() > 0 {
        return Err(Error::NotCnu(format!(
            "T1 has a unitary part of dimension {}",
            split.dim_u()
        )));
    }
    let blaschke = minimal_polynomial(t1, tol)?;
    let model = build_model_space(&blaschke, tol)?;
    let flagged =
        model.ill_conditioned || spectral_radius(t1)? > 1.0 - ILL_CONDITIONED_RADIUS_GAP;
    let maps = intertwining_isometry(pair.t1(), pair.t1(), pair.t2().as_tuple(), tol)?;
    let v1 = kron(&model.b, &eye(maps.d1));
    let eval_mode = |mode: ExtensionMode| -> Result<f64> {
        let col = unitary_extension(&maps, mode, tol)?;
        let v2 = transfer_eval_at_matrix(&col, &model.b, tol)?;
        operator_norm(&eval_bivariate(p, &v1, &v2, tol)?)
    };
    let canonical = eval_mode(ExtensionMode::Canonical)?;
    let mut value = canonical;
    let mut sampled = Vec::with_capacity(samples);
    for i in 1..=samples {
        let s = seed ^ (i as u64).wrapping_mul(SEED_STRIDE);
        let v = eval_mode(ExtensionMode::Sampled(s))?;
        value = value.min(v);
        sampled.push((s, v));
    }
    Ok(Am3Data { value, canonical, sampled, flagged })
}

/// Model-based bound taken in both variable orders.
#[derive(Debug, Clone, Serialize)]
pub struct OrderMinimum {
    /// `min(order12.value, order21.value)`.
    pub value: f64,
    /// Bound with `T1` carrying the model.
    pub order12: Am3Data,
    /// Bound with the roles of `T1`, `T2` and of `z`, `w` swapped.
    pub order21: Am3Data,
}

/// `min` of the two role-swapped model-based bounds; valid when both
/// spectra lie in the open disk.
pub fn bound_min_both_orders(
    pair: &CommutingPair,
    p: &BivariatePolyMatrix,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<OrderMinimum> {
    let order12 = bound_am3(pair, p, samples, seed, tol)?;
    let swapped = CommutingPair::new(pair.t2().clone(), pair.t1().clone(), tol)?;
    let order21 = bound_am3(&swapped, &p.swap_variables(), samples, seed, tol)?;
    Ok(OrderMinimum { value: order12.value.min(order21.value), order12, order21 })
}

/// Substitutes `z = lambda`, leaving a polynomial in `w` alone.
fn substitute_z(p: &BivariatePolyMatrix, lambda: C64) -> Result<BivariatePolyMatrix> {
    let entries = (0..p.rows())
        .map(|r| {
            (0..p.cols())
                .map(|c| {
                    p.entry_terms(r, c)
                        .iter()
                        .map(|t| BiTerm {
                            zdeg: 0,
                            wdeg: t.wdeg,
                            coeff: t.coeff * lambda.powu(t.zdeg as u32),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    BivariatePolyMatrix::new(p.rows(), p.cols(), entries)
}

/// Eigenvalue clusters of a (certified unitary) matrix: each cluster is
/// `(λ, Q)` with `λ` on the circle and `Q` an orthonormal eigenspace
/// basis. Clusters merge eigenvalues within the global cluster radius;
/// together the bases span the whole space.
fn unimodular_eigen_clusters(t: &CMatrix) -> Result<Vec<(C64, CMatrix)>> {
    let (vals, vecs) = eig(t)?;
    let n = vals.len();
    let mut groups: Vec<(C64, Vec<usize>)> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match groups.iter_mut().find(|(m, _)| (*m - v).norm() <= EIGEN_CLUSTER_RADIUS) {
            Some((m, idx)) => {
                idx.push(i);
                let k = idx.len() as f64;
                *m = (*m * (k - 1.0) + v) / k;
            }
            None => groups.push((v, vec![i])),
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for (mean, idx) in groups {
        let mut cols = zeros(n, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            for r in 0..n {
                cols[(r, c)] = vecs[(r, i)];
            }
        }
        let q = orthonormalize_columns(&cols)?;
        let lam = if mean.norm() > 0.0 { mean / mean.norm() } else { mean };
        out.push((lam, q));
    }
    Ok(out)
}

/// Spectral bound for a unitary first operator and a completely
/// non-unitary second operator.
#[derive(Debug, Clone, Serialize)]
pub struct UnitaryPureBound {
    /// `max_λ ‖p(λ, B_{2,λ})‖` over the per-eigenspace models.
    pub fine: f64,
    /// `max_λ ‖p(λ, B_2)‖` with the single full model of `T2`.
    pub coarse: f64,
    /// `(λ, per-eigenspace bound)` in cluster order.
    pub per_eigenvalue: Vec<(C64, f64)>,
}

/// Bound for `σ(T1) ⊂ 𝕋` and `T2` completely non-unitary.
///
/// Each eigenspace of the unitary `T1` must reduce `T2` (it does
/// whenever the pair genuinely commutes); `T2` restricted there is
/// modeled on its own minimal polynomial, and `p(λ, ·)` is evaluated at
/// that compressed shift. The coarse variant reuses the full model of
/// `T2` for every eigenvalue and is never smaller.
pub fn bound_unitary_pure(
    pair: &CommutingPair,
    p: &BivariatePolyMatrix,
    tol: &Tolerances,
) -> Result<UnitaryPureBound> {
    if pair.t1().n() != 1 || pair.t2().n() != 1 {
        return Err(Error::InvalidInput(
            "spectral bound needs single contractions (n1 = n2 = 1)".into(),
        ));
    }
    let t1 = pair.t1().entry(0);
    let t2 = pair.t2().entry(0);
    let dim = pair.dim();
    let udef = op_dist(&adjoint(t1).dot(t1), &eye(dim))?;
    if udef > tol.residual_tol {
        return Err(Error::MarginViolation(format!(
            "T1 is not unitary (defect {udef:.3e})"
        )));
    }
    let split2 = unitary_cnu_split(t2, tol)?;
    if split2.dim_u() > 0 {
        return Err(Error::NotCnu(format!(
            "T2 has a unitary part of dimension {}",
            split2.dim_u()
        )));
    }
    let full_model = build_model_space(&minimal_polynomial(t2, tol)?, tol)?;
    let mut fine = 0.0f64;
    let mut coarse = 0.0f64;
    let mut per_eigenvalue = Vec::new();
    for (lam, q) in unimodular_eigen_clusters(t1)? {
        let proj = q.dot(&adjoint(&q));
        let off = operator_norm(&(t2.dot(&proj) - proj.dot(t2)))?;
        if off > tol.residual_tol {
            return Err(Error::NotCommuting(format!(
                "eigenspace of λ = {lam} does not reduce T2 (residual {off:.3e})"
            )));
        }
        let t2_block = adjoint(&q).dot(t2).dot(&q);
        let block_model = build_model_space(&minimal_polynomial(&t2_block, tol)?, tol)?;
        let q_lam = substitute_z(p, lam)?;
        let block_dim = block_model.dim();
        let v =
            operator_norm(&eval_bivariate(&q_lam, &eye(block_dim), &block_model.b, tol)?)?;
        let cv = operator_norm(&eval_bivariate(
            &q_lam,
            &eye(full_model.dim()),
            &full_model.b,
            tol,
        )?)?;
        fine = fine.max(v);
        coarse = coarse.max(cv);
        per_eigenvalue.push((lam, v));
    }
    Ok(UnitaryPureBound { fine, coarse, per_eigenvalue })
}

/// Joint-spectrum value for a pair of commuting unitaries; an equality,
/// not just a bound.
#[derive(Debug, Clone, Serialize)]
pub struct TwoUnitaryBound {
    /// `max |p(λ, μ)|` over the joint spectrum.
    pub value: f64,
    /// `‖p(T1, T2)‖`, recomputed for the equality certificate.
    pub direct: f64,
    /// Joint spectrum: pairs whose eigenspaces intersect.
    pub joint_spectrum: Vec<(C64, C64)>,
}

/// Core of the two-unitary equality, accepting matrix coefficients.
fn joint_unitary_bound(
    t1: &CMatrix,
    t2: &CMatrix,
    p: &BivariatePolyMatrix,
    tol: &Tolerances,
) -> Result<TwoUnitaryBound> {
    let dim = t1.nrows();
    for (name, t) in [("T1", t1), ("T2", t2)] {
        let udef = op_dist(&adjoint(t).dot(t), &eye(dim))?;
        if udef > tol.residual_tol {
            return Err(Error::MarginViolation(format!(
                "{name} is not unitary (defect {udef:.3e})"
            )));
        }
    }
    let clusters1 = unimodular_eigen_clusters(t1)?;
    let clusters2 = unimodular_eigen_clusters(t2)?;
    let mut joint_spectrum = Vec::new();
    let mut value = 0.0f64;
    for (lam, q1) in &clusters1 {
        let p1 = q1.dot(&adjoint(q1));
        for (mu, q2) in &clusters2 {
            let p2 = q2.dot(&adjoint(q2));
            // Singular values of P1 P2 are the cosines of the principal
            // angles; a cosine at 1 is a common direction.
            let meet = singular_values(&p1.dot(&p2))?
                .into_iter()
                .filter(|&s| s >= 1.0 - JOINT_EIG_COS_TOL)
                .count();
            if meet > 0 {
                value = value.max(operator_norm(&p.eval_scalar(*lam, *mu))?);
                joint_spectrum.push((*lam, *mu));
            }
        }
    }
    let direct = operator_norm(&eval_bivariate(p, t1, t2, tol)?)?;
    if (value - direct).abs() > TWO_UNITARY_EQUALITY_TOL {
        return Err(Error::Internal(format!(
            "two-unitary equality violated: joint-spectrum value {value:.15} vs \
             direct norm {direct:.15}"
        )));
    }
    Ok(TwoUnitaryBound { value, direct, joint_spectrum })
}

/// Exact norm of `p(T1, T2)` for commuting unitary matrices via the
/// joint spectrum, for scalar polynomials.
///
/// The joint spectrum is detected through principal angles between
/// eigenspaces; the result is certified against the directly computed
/// norm before being returned.
pub fn bound_two_unitary_exact(
    pair: &CommutingPair,
    p: &BivariatePolyMatrix,
    tol: &Tolerances,
) -> Result<TwoUnitaryBound> {
    if pair.t1().n() != 1 || pair.t2().n() != 1 {
        return Err(Error::InvalidInput(
            "two-unitary bound needs single contractions (n1 = n2 = 1)".into(),
        ));
    }
    if p.rows() != 1 || p.cols() != 1 {
        return Err(Error::InvalidInput(format!(
            "two-unitary bound is stated for scalar polynomials, got {} x {}",
            p.rows(),
            p.cols()
        )));
    }
    joint_unitary_bound(pair.t1().entry(0), pair.t2().entry(0), p, tol)
}

/// Composite bound over the four-way joint structure splitting.
#[derive(Debug, Clone, Serialize)]
pub struct GeneralBound {
    /// `max` of the present per-block bounds.
    pub value: f64,
    /// Bounds for the blocks (unitary/unitary, unitary/cnu,
    /// cnu/unitary, cnu/cnu); `None` for empty blocks.
    pub per_block: [Option<f64>; 4],
    /// Dimension of each block.
    pub block_dims: [usize; 4],
    /// Conditioning caveat inherited from any model-based sub-bound.
    pub flagged: bool,
}

/// Bound for an arbitrary commuting contractive pair: split into the
/// four joint character blocks and apply the matching bound on each.
///
/// Blocks use, in order: the two-unitary equality, the unitary/pure
/// spectral bound, the same with roles (and variables) swapped, and the
/// two-order model-based minimum. The result is the max over nonempty
/// blocks.
pub fn bound_general(
    pair: &CommutingPair,
    p: &BivariatePolyMatrix,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<GeneralBound> {
    if pair.t1().n() != 1 || pair.t2().n() != 1 {
        return Err(Error::InvalidInput(
            "composite bound needs single contractions (n1 = n2 = 1)".into(),
        ));
    }
    let dec = structure_decomposition(pair, tol)?;
    let mut per_block: [Option<f64>; 4] = [None, None, None, None];
    let mut block_dims = [0usize; 4];
    let mut value = 0.0f64;
    let mut any = false;
    let mut flagged = false;
    for (i, block) in dec.blocks.iter().enumerate() {
        block_dims[i] = block.dim();
        if block.dim() == 0 {
            continue;
        }
        let sub = |a: &CMatrix, b: &CMatrix| -> Result<CommutingPair> {
            CommutingPair::new(
                RowContraction::single(a.clone(), tol)?,
                RowContraction::single(b.clone(), tol)?,
                tol,
            )
        };
        let v = match (block.class1, block.class2) {
            (PartClass::Unitary, PartClass::Unitary) => {
                joint_unitary_bound(&block.t1, &block.t2, p, tol)?.value
            }
            (PartClass::Unitary, PartClass::Cnu) => {
                bound_unitary_pure(&sub(&block.t1, &block.t2)?, p, tol)?.fine
            }
            (PartClass::Cnu, PartClass::Unitary) => {
                bound_unitary_pure(&sub(&block.t2, &block.t1)?, &p.swap_variables(), tol)?.fine
            }
            (PartClass::Cnu, PartClass::Cnu) => {
                let mb = bound_min_both_orders(&sub(&block.t1, &block.t2)?, p, samples, seed, tol)?;
                flagged = flagged || mb.order12.flagged || mb.order21.flagged;
                mb.value
            }
        };
        per_block[i] = Some(v);
        value = value.max(v);
        any = true;
    }
    if !any {
        return Err(Error::Internal("structure splitting produced no blocks".into()));
    }
    Ok(GeneralBound { value, per_block, block_dims, flagged })
}

/// One checked inequality in a bound report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    /// Human-readable statement of the inequality.
    pub inequality: String,
    /// Slack of the inequality; negative means it failed.
    pub margin: f64,
    /// Whether the inequality held.
    pub pass: bool,
    /// Conditioning caveat: a failure here is reported but does not
    /// count against the run.
    pub advisory: bool,
}

/// Minimum over the sampled extensions, with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledMin {
    /// Smallest sampled bound.
    pub value: f64,
    /// Number of sampled extensions.
    pub count: usize,
    /// Seeds in sampling order, shared by both variable orders.
    pub seeds: Vec<u64>,
}

/// Full output of the inequality-chain verifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    /// `‖p(T1, T2)‖`.
    pub direct_norm: f64,
    /// Model-based bound with `T1` carrying the model, when `T1` is
    /// completely non-unitary.
    pub am3_order12: Option<f64>,
    /// Same with roles and variables swapped, when `T2` is completely
    /// non-unitary.
    pub am3_order21: Option<f64>,
    /// Minimum over the sampled extensions across both orders.
    pub min_sampled_extensions: Option<SampledMin>,
    /// Spectral bound when one operator is unitary and the other is
    /// completely non-unitary.
    pub unitary_pure: Option<f64>,
    /// Joint-spectrum equality when both operators are unitary.
    pub two_unitary_exact: Option<f64>,
    /// Composite four-block bound.
    pub general_composite: Option<f64>,
    /// Grid maximum: rigorous lower bound for the bidisk sup norm.
    pub torus_lo: f64,
    /// Certified upper bound for the bidisk sup norm.
    pub torus_hi: f64,
    /// Grid resolution that produced the torus bracket.
    pub torus_grid: usize,
    /// Checked inequalities.
    pub verdicts: Vec<Verdict>,
    /// Which hypotheses were certified, skipped, or degraded.
    pub condition_flags: Vec<String>,
}

impl BoundReport {
    /// Whether every non-advisory verdict passed.
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass || v.advisory)
    }
}

/// Configuration for [`verify_chain`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Sampled extensions per model-based bound.
    pub samples: usize,
    /// Base seed for extension sampling.
    pub seed: u64,
    /// Torus grid resolution per axis.
    pub grid: usize,
    /// Slack for the chain inequalities.
    pub chain_tol: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { samples: 16, seed: 0, grid: 2048, chain_tol: DEFAULT_CHAIN_TOL }
    }
}

/// Computes the direct norm, every applicable bound, and the torus
/// bracket, then checks the inequality chain.
///
/// Inapplicable or failed sub-bounds become condition flags, and failed
/// inequalities become failed verdicts; neither aborts the report. The
/// only hard errors are invalid inputs (shapes, grid resolution).
pub fn verify_chain(
    pair: &CommutingPair,
    p: &BivariatePolyMatrix,
    cfg: &ChainConfig,
    tol: &Tolerances,
) -> Result<BoundReport> {
    if pair.t1().n() != 1 || pair.t2().n() != 1 {
        return Err(Error::InvalidInput(
            "chain verification needs single contractions (n1 = n2 = 1)".into(),
        ));
    }
    let t1 = pair.t1().entry(0);
    let t2 = pair.t2().entry(0);
    let dim = pair.dim();
    let direct_norm = operator_norm(&eval_bivariate(p, t1, t2, tol)?)?;
    let TorusBracket { lo: torus_lo, hi: torus_hi, grid: torus_grid } =
        torus_sup_norm(p, cfg.grid)?;

    let mut flags = Vec::new();
    let unitary1 = op_dist(&adjoint(t1).dot(t1), &eye(dim))? <= tol.residual_tol;
    let unitary2 = op_dist(&adjoint(t2).dot(t2), &eye(dim))? <= tol.residual_tol;
    let cnu1 = unitary_cnu_split(t1, tol).map(|s| s.dim_u() == 0).unwrap_or(false);
    let cnu2 = unitary_cnu_split(t2, tol).map(|s| s.dim_u() == 0).unwrap_or(false);
    flags.push(format!(
        "T1: {}",
        if unitary1 { "unitary" } else if cnu1 { "completely non-unitary" } else { "mixed" }
    ));
    flags.push(format!(
        "T2: {}",
        if unitary2 { "unitary" } else if cnu2 { "completely non-unitary" } else { "mixed" }
    ));

    let swapped = CommutingPair::new(pair.t2().clone(), pair.t1().clone(), tol)?;
    let p_swapped = p.swap_variables();

    let mut am3_order12 = None;
    let mut am3_advisory = false;
    let mut sampled_pool: Vec<(u64, f64)> = Vec::new();
    if cnu1 {
        match bound_am3(pair, p, cfg.samples, cfg.seed, tol) {
            Ok(data) => {
                am3_order12 = Some(data.value);
                am3_advisory = data.flagged;
                if data.flagged {
                    flags.push("am3_order12: conditioning caveat (advisory)".into());
                }
                sampled_pool.extend(data.sampled);
            }
            Err(e) => flags.push(format!("am3_order12: failed ({e})")),
        }
    } else {
        flags.push("am3_order12: skipped (T1 not completely non-unitary)".into());
    }
    let mut am3_order21 = None;
    let mut am3_advisory21 = false;
    if cnu2 {
        match bound_am3(&swapped, &p_swapped, cfg.samples, cfg.seed, tol) {
            Ok(data) => {
                am3_order21 = Some(data.value);
                am3_advisory21 = data.flagged;
                if data.flagged {
                    flags.push("am3_order21: conditioning caveat (advisory)".into());
                }
                sampled_pool.extend(data.sampled);
            }
            Err(e) => flags.push(format!("am3_order21: failed ({e})")),
        }
    } else {
        flags.push("am3_order21: skipped (T2 not completely non-unitary)".into());
    }
    let min_sampled_extensions = if sampled_pool.is_empty() {
        None
    } else {
        let value = sampled_pool.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
        let seeds = sampled_pool.iter().map(|&(s, _)| s).collect();
        Some(SampledMin { value, count: sampled_pool.len(), seeds })
    };

    let mut unitary_pure = None;
    if unitary1 && cnu2 {
        match bound_unitary_pure(pair, p, tol) {
            Ok(b) => unitary_pure = Some(b.fine),
            Err(e) => flags.push(format!("unitary_pure: failed ({e})")),
        }
    } else if cnu1 && unitary2 {
        match bound_unitary_pure(&swapped, &p_swapped, tol) {
            Ok(b) => {
                unitary_pure = Some(b.fine);
                flags.push("unitary_pure: roles swapped (T2 unitary, T1 c.n.u.)".into());
            }
            Err(e) => flags.push(format!("unitary_pure: failed ({e})")),
        }
    } else {
        flags.push("unitary_pure: skipped (needs one unitary and one c.n.u. operator)".into());
    }

    let mut two_unitary_exact = None;
    if unitary1 && unitary2 {
        match joint_unitary_bound(t1, t2, p, tol) {
            Ok(b) => two_unitary_exact = Some(b.value),
            Err(e) => flags.push(format!("two_unitary_exact: failed ({e})")),
        }
    } else {
        flags.push("two_unitary_exact: skipped (needs both operators unitary)".into());
    }

    let mut general_composite = None;
    let mut general_advisory = false;
    match bound_general(pair, p, cfg.samples, cfg.seed, tol) {
        Ok(b) => {
            general_composite = Some(b.value);
            general_advisory = b.flagged;
            if b.flagged {
                flags.push("general_composite: conditioning caveat (advisory)".into());
            }
        }
        Err(e) => flags.push(format!("general_composite: failed ({e})")),
    }

    let mut verdicts = Vec::new();
    let ct = cfg.chain_tol;
    // Universal outer layer of the chain: the certified torus bound
    // holds for every commuting contractive pair, independent of the
    // model conditioning, so this verdict is always present.
    let universal_margin = torus_hi + ct - direct_norm;
    verdicts.push(Verdict {
        inequality: "direct_norm <= torus_hi + chain_tol".into(),
        margin: universal_margin,
        pass: universal_margin >= 0.0,
        advisory: false,
    });
    for (name, bound, advisory) in [
        ("am3_order12", am3_order12, am3_advisory),
        ("am3_order21", am3_order21, am3_advisory21),
        ("unitary_pure", unitary_pure, false),
        ("two_unitary_exact", two_unitary_exact, false),
        ("general_composite", general_composite, general_advisory),
    ] {
        if let Some(b) = bound {
            let margin = b + ct - direct_norm;
            verdicts.push(Verdict {
                inequality: format!("direct_norm <= {name} + chain_tol"),
                margin,
                pass: margin >= 0.0,
                advisory,
            });
        }
    }
    for (name, bound, advisory) in [
        ("am3_order12", am3_order12, am3_advisory),
        ("am3_order21", am3_order21, am3_advisory21),
    ] {
        if let Some(b) = bound {
            let margin = torus_hi + ct - b;
            verdicts.push(Verdict {
                inequality: format!("{name} <= torus_hi + chain_tol"),
                margin,
                pass: margin >= 0.0,
                advisory,
            });
        }
    }

    Ok(BoundReport {
        direct_norm,
        am3_order12,
        am3_order21,
        min_sampled_extensions,
        unitary_pure,
        two_unitary_exact,
        general_composite,
        torus_lo,
        torus_hi,
        torus_grid,
        verdicts,
        condition_flags: flags,
    })
}
