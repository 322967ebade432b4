//! Serializable JSON artifacts for the command-line reports.
//!
//! Every report shares the same outer shell: a schema version, a
//! millisecond timestamp (the only field allowed to differ between
//! reruns with identical flags), the subcommand name, and a payload.
//! Matrices are encoded as row-major nested arrays with complex
//! entries as `[re, im]` pairs, so reports stay language-neutral and
//! diff-friendly.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, ChainConfig};
use crate::cmatrix::{zeros, CMatrix};
use crate::contraction::{PartClass, StructureDecomposition};
use crate::dilation::{
    AndoDilation, CommutantLift, DilationCertificates, DilationResidualReport, ExtensionMode,
    UnitaryColligation,
};
use crate::error::{Error, Result};
use crate::model::ModelSpace;

/// Version stamp for every emitted report.
pub const SCHEMA_VERSION: u32 = 1;

/// Matrix as row-major nested arrays of `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixData(pub Vec<Vec<[f64; 2]>>);

impl MatrixData {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixData(
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        )
    }

    /// Rebuilds the matrix; rejects ragged rows.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        let mut m = zeros(rows, cols);
        for (r, row) in self.0.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (c, &[re, im]) in row.iter().enumerate() {
                m[(r, c)] = crate::cmatrix::C64::new(re, im);
            }
        }
        Ok(m)
    }
}

/// Outer shell shared by all reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunEnvelope<T> {
    pub schema_version: u32,
    /// Milliseconds since the Unix epoch at emission time.
    pub timestamp_ms: u64,
    /// Subcommand that produced the report.
    pub command: String,
    pub report: T,
}

/// Wraps a payload with the schema version and current time.
pub fn envelope<T>(command: &str, report: T) -> RunEnvelope<T> {
    let timestamp_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    RunEnvelope { schema_version: SCHEMA_VERSION, timestamp_ms, command: command.into(), report }
}

/// Payload of `bound` and `verify`: the configuration that produced
/// the bounds, then the bounds themselves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainRunReport {
    pub config: ChainConfig,
    pub bounds: BoundReport,
}

/// Root of a Blaschke product with its multiplicity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootData {
    pub root: [f64; 2],
    pub multiplicity: usize,
}

/// Model-space summary: roots, dimension, and the compressed shift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelData {
    pub roots: Vec<RootData>,
    pub dim: usize,
    pub ill_conditioned: bool,
    pub compressed_shift: MatrixData,
}

impl ModelData {
    pub fn from_model(ms: &ModelSpace) -> Self {
        ModelData {
            roots: ms
                .blaschke
                .roots()
                .iter()
                .map(|&(z, m)| RootData { root: [z.re, z.im], multiplicity: m })
                .collect(),
            dim: ms.dim(),
            ill_conditioned: ms.ill_conditioned,
            compressed_shift: MatrixData::from_matrix(&ms.b),
        }
    }
}

/// Unitary colligation blocks with their padding bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColligationData {
    pub a: MatrixData,
    pub b: MatrixData,
    pub c: MatrixData,
    pub d: MatrixData,
    pub d1: usize,
    pub d1p: usize,
    pub d2: usize,
    pub n1: usize,
    pub n2: usize,
    pub pad_a: usize,
    pub pad_b: usize,
    pub kappa: usize,
}

impl ColligationData {
    pub fn from_colligation(col: &UnitaryColligation) -> Self {
        ColligationData {
            a: MatrixData::from_matrix(&col.a),
            b: MatrixData::from_matrix(&col.b),
            c: MatrixData::from_matrix(&col.c),
            d: MatrixData::from_matrix(&col.d),
            d1: col.d1,
            d1p: col.d1p,
            d2: col.d2,
            n1: col.n1,
            n2: col.n2,
            pad_a: col.pad_a,
            pad_b: col.pad_b,
            kappa: col.kappa,
        }
    }
}

/// Payload of `dilate`: the full dilation pair with certificates.
#[derive(Debug, Clone, Serialize)]
pub struct DilationReport {
    /// `"canonical"` or `"sampled:<seed>"`.
    pub extension: String,
    pub model: ModelData,
    pub colligation: ColligationData,
    pub kernel: MatrixData,
    pub v1: MatrixData,
    pub v2: MatrixData,
    pub certificates: DilationCertificates,
}

/// Human-readable tag for an extension mode.
pub fn extension_tag(mode: ExtensionMode) -> String {
    match mode {
        ExtensionMode::Canonical => "canonical".into(),
        ExtensionMode::Sampled(s) => format!("sampled:{s}"),
    }
}

pub fn dilation_report(d: &AndoDilation, mode: ExtensionMode) -> DilationReport {
    DilationReport {
        extension: extension_tag(mode),
        model: ModelData::from_model(&d.model),
        colligation: ColligationData::from_colligation(&d.colligation),
        kernel: MatrixData::from_matrix(&d.kernel),
        v1: MatrixData::from_matrix(&d.v1),
        v2: MatrixData::from_matrix(&d.v2),
        certificates: d.certificates.clone(),
    }
}

/// One block of the joint structure splitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockData {
    pub class1: PartClass,
    pub class2: PartClass,
    pub dim: usize,
    pub basis: MatrixData,
    pub t1: MatrixData,
    pub t2: MatrixData,
}

/// Payload of `decompose`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecomposeReport {
    pub dim: usize,
    pub blocks: Vec<BlockData>,
}

pub fn decompose_report(dec: &StructureDecomposition) -> DecomposeReport {
    DecomposeReport {
        dim: dec.blocks.iter().map(|b| b.dim()).sum(),
        blocks: dec
            .blocks
            .iter()
            .map(|b| BlockData {
                class1: b.class1,
                class2: b.class2,
                dim: b.dim(),
                basis: MatrixData::from_matrix(&b.basis),
                t1: MatrixData::from_matrix(&b.t1),
                t2: MatrixData::from_matrix(&b.t2),
            })
            .collect(),
    }
}

/// Payload of `lift`: norms, certificates, and leading symbol
/// coefficients of the lifted intertwiner.
#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub scale: f64,
    pub grid_norm: f64,
    pub certified_norm: f64,
    pub interpolation_residual: f64,
    /// Taylor coefficients of the symbol, constant term first.
    pub taylor_coefficients: Vec<MatrixData>,
}

pub fn lift_report(l: &CommutantLift, n_coeffs: usize) -> LiftReport {
    let mut taylor_coefficients = Vec::new();
    if let Some(col) = &l.colligation {
        let a_star = crate::cmatrix::adjoint(&col.a).mapv(|z| z * l.scale);
        taylor_coefficients.push(MatrixData::from_matrix(&a_star));
        if col.e_dim() > 0 {
            let c_star = crate::cmatrix::adjoint(&col.c);
            let d_star = crate::cmatrix::adjoint(&col.d);
            let b_star = crate::cmatrix::adjoint(&col.b);
            let mut prefix = c_star;
            for _ in 1..n_coeffs {
                let coeff = prefix.dot(&b_star).mapv(|z| z * l.scale);
                taylor_coefficients.push(MatrixData::from_matrix(&coeff));
                prefix = prefix.dot(&d_star);
            }
        }
    }
    LiftReport {
        scale: l.scale,
        grid_norm: l.grid_norm,
        certified_norm: l.certified_norm,
        interpolation_residual: l.interpolation_residual,
        taylor_coefficients,
    }
}

/// Payload of `fock-verify`: the truncated dilation-relation residuals.
#[derive(Debug, Clone, Serialize)]
pub struct FockVerifyReport {
    pub n1: usize,
    pub n2: usize,
    pub max_len: usize,
    pub residuals: DilationResidualReport,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::C64;

    #[test]
    fn matrix_data_round_trips() {
        let mut m = zeros(2, 3);
        m[(0, 1)] = C64::new(1.5, -2.0);
        m[(1, 2)] = C64::new(0.0, 3.25);
        let data = MatrixData::from_matrix(&m);
        let back = data.to_matrix().unwrap();
        assert_eq!(back.dim(), (2, 3));
        assert_eq!(back[(0, 1)], m[(0, 1)]);
        assert_eq!(back[(1, 2)], m[(1, 2)]);
        let json = serde_json::to_string(&data).unwrap();
        assert_eq!(json, "[[[0.0,0.0],[1.5,-2.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0],[0.0,3.25]]]");
    }

    #[test]
    fn ragged_matrix_data_is_rejected() {
        let data = MatrixData(vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[2.0, 0.0]]]);
        assert!(matches!(data.to_matrix(), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn envelope_carries_schema_version() {
        let env = envelope("bound", 42u32);
        assert_eq!(env.schema_version, SCHEMA_VERSION);
        assert_eq!(env.command, "bound");
        let json = serde_json::to_value(&env).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["report"], 42);
    }
}
