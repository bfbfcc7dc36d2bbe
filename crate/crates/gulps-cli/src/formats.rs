//! File formats: the ISA configuration and the self-contained decomposition
//! output. Structured data is JSON (with complex entries as [re, im] pairs,
//! lossless at round-trip), tabular data is CSV and lives with the commands.

use anyhow::{anyhow, bail, Context, Result};
use gulps::invariants::CanonicalCoord;
use gulps::matcore::{nearest_unitary, Mat2, Mat4, Unitary4, C};
use gulps::synth::{
    named_gate_matrix, Decomposition, GateDef, Isa, SegmentSolution, Sentence, Trajectory,
    VerifyReport,
};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

/// Unitarity admission band for externally supplied matrices; inputs inside
/// it are polar-projected onto the unitary group.
pub const INPUT_UNITARITY_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Matrix literals
// ---------------------------------------------------------------------------

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn mat4_to_json(m: &Mat4) -> MatrixJson {
    (0..4)
        .map(|i| (0..4).map(|j| [m.0[i][j].re, m.0[i][j].im]).collect())
        .collect()
}

pub fn mat2_to_json(m: &Mat2) -> MatrixJson {
    (0..2)
        .map(|i| (0..2).map(|j| [m.0[i][j].re, m.0[i][j].im]).collect())
        .collect()
}

pub fn mat4_from_json(rows: &MatrixJson) -> Result<Mat4> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        bail!("matrix literal must be 4 rows of 4 [re, im] entries");
    }
    let mut m = Mat4::zero();
    for i in 0..4 {
        for j in 0..4 {
            m.0[i][j] = C::new(rows[i][j][0], rows[i][j][1]);
        }
    }
    Ok(m)
}

pub fn mat2_from_json(rows: &MatrixJson) -> Result<Mat2> {
    if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
        bail!("matrix literal must be 2 rows of 2 [re, im] entries");
    }
    let mut m = Mat2::zero();
    for i in 0..2 {
        for j in 0..2 {
            m.0[i][j] = C::new(rows[i][j][0], rows[i][j][1]);
        }
    }
    Ok(m)
}

/// Admit an externally supplied matrix: reject beyond the input band, then
/// polar-project into the strict construction tolerance.
pub fn admit_unitary(m: &Mat4) -> Result<Unitary4> {
    let defect = m.unitarity_defect();
    if !m.is_finite() {
        bail!("matrix has non-finite entries");
    }
    if defect > INPUT_UNITARITY_TOL {
        bail!(
            "matrix is not unitary: ||U^H U - I||_F = {defect:.3e} exceeds {INPUT_UNITARITY_TOL:.1e}"
        );
    }
    nearest_unitary(m).map_err(|e| anyhow!("{e}"))
}

// ---------------------------------------------------------------------------
// ISA configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct IsaConfig {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub gates: Vec<IsaGateEntry>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IsaGateEntry {
    pub id: String,
    pub spec: GateSpec,
    pub cost: f64,
}

/// A gate is named ("CX", "iSWAP^1/3", ...), given by chamber coordinates in
/// units of pi, or given as an explicit matrix.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateSpec {
    Named(String),
    Coords { coords: [f64; 3] },
    Matrix { matrix: MatrixJson },
}

pub fn load_isa(path: &std::path::Path) -> Result<Isa> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading ISA file {}", path.display()))?;
    let config: IsaConfig = serde_json::from_str(&text).context("parsing ISA file")?;
    isa_from_config(&config)
}

pub fn isa_from_config(config: &IsaConfig) -> Result<Isa> {
    if config.format_version != FORMAT_VERSION {
        bail!("unsupported format_version {}", config.format_version);
    }
    let mut gates = Vec::with_capacity(config.gates.len());
    for entry in &config.gates {
        let gate = match &entry.spec {
            GateSpec::Named(name) => GateDef::new(
                entry.id.clone(),
                entry.cost,
                named_gate_matrix(name).map_err(|e| anyhow!("gate {}: {e}", entry.id))?,
            ),
            GateSpec::Coords { coords } => GateDef::from_coords(
                entry.id.clone(),
                entry.cost,
                CanonicalCoord::new(coords[0], coords[1], coords[2]),
            ),
            GateSpec::Matrix { matrix } => {
                let m = mat4_from_json(matrix)?;
                GateDef::new(entry.id.clone(), entry.cost, admit_unitary(&m)?)
            }
        }
        .map_err(|e| anyhow!("gate {}: {e}", entry.id))?;
        gates.push(gate);
    }
    Isa::new(gates).map_err(|e| anyhow!("{e}"))
}

// ---------------------------------------------------------------------------
// Decomposition output
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct DecompositionOutput {
    pub format_version: u32,
    pub target: MatrixJson,
    pub sentence: SentenceOutput,
    pub trajectory: TrajectoryOutput,
    pub segments: Vec<SegmentOutput>,
    /// n + 1 pairs of 2x2 local factors, layer 0 applied first
    pub local_layers: Vec<[MatrixJson; 2]>,
    pub global_phase: f64,
    pub verification: VerificationOutput,
    pub timing: TimingOutput,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SentenceOutput {
    pub ids: Vec<String>,
    pub total_cost: f64,
    pub gates: Vec<GateOutput>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GateOutput {
    pub id: String,
    pub coords: [f64; 3],
    pub cost: f64,
    pub matrix: MatrixJson,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrajectoryOutput {
    /// units of pi; row 0 is the identity
    pub points: Vec<[f64; 3]>,
    pub reflected: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentOutput {
    pub v1: [f64; 3],
    pub v2: [f64; 3],
    pub residual: f64,
    pub exterior_left: [MatrixJson; 2],
    pub exterior_right: [MatrixJson; 2],
    pub exterior_phase: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerificationOutput {
    pub distance: f64,
    pub trajectory_min_slack: f64,
}

#[derive(Debug, Serialize, Deserialize, Default)]
pub struct TimingOutput {
    pub sentence_search_ms: f64,
    pub lp_ms: f64,
    pub lm_ms: f64,
    pub rejected_sentences: usize,
}

pub fn output_from_decomposition(
    d: &Decomposition,
    target: &Unitary4,
    isa: &Isa,
    report: &VerifyReport,
) -> DecompositionOutput {
    DecompositionOutput {
        format_version: FORMAT_VERSION,
        target: mat4_to_json(target),
        sentence: SentenceOutput {
            ids: d.sentence.ids(isa).iter().map(|s| s.to_string()).collect(),
            total_cost: d.sentence.total_cost,
            gates: d
                .sentence
                .gates
                .iter()
                .map(|&i| {
                    let g = isa.gate(i);
                    GateOutput {
                        id: g.id.clone(),
                        coords: g.coords.as_array(),
                        cost: g.cost,
                        matrix: mat4_to_json(g.matrix.matrix()),
                    }
                })
                .collect(),
        },
        trajectory: TrajectoryOutput {
            points: d.trajectory.points.iter().map(|p| p.as_array()).collect(),
            reflected: d.trajectory.reflected,
        },
        segments: d
            .segments
            .iter()
            .map(|s| SegmentOutput {
                v1: s.v1,
                v2: s.v2,
                residual: s.residual_norm,
                exterior_left: [mat2_to_json(&s.left.0), mat2_to_json(&s.left.1)],
                exterior_right: [mat2_to_json(&s.right.0), mat2_to_json(&s.right.1)],
                exterior_phase: s.phase,
            })
            .collect(),
        local_layers: d
            .local_layers
            .iter()
            .map(|(a, b)| [mat2_to_json(a), mat2_to_json(b)])
            .collect(),
        global_phase: d.global_phase,
        verification: VerificationOutput {
            distance: report.distance,
            trajectory_min_slack: report.trajectory_min_slack,
        },
        timing: TimingOutput {
            sentence_search_ms: d.stats.sentence_search_ms,
            lp_ms: d.stats.lp_ms,
            lm_ms: d.stats.lm_ms,
            rejected_sentences: d.stats.rejected_sentences,
        },
    }
}

/// Rebuild the in-memory pieces of a stored decomposition (the embedded ISA
/// subset, the target, and the decomposition itself) so it can be replayed.
pub fn decomposition_from_output(
    out: &DecompositionOutput,
) -> Result<(Decomposition, Unitary4, Isa)> {
    if out.format_version != FORMAT_VERSION {
        bail!("unsupported format_version {}", out.format_version);
    }
    let target = admit_unitary(&mat4_from_json(&out.target)?)?;
    let mut gates = Vec::new();
    let mut indices = Vec::new();
    for g in &out.sentence.gates {
        let m = admit_unitary(&mat4_from_json(&g.matrix)?)?;
        let idx = match gates.iter().position(|x: &GateDef| x.id == g.id) {
            Some(i) => i,
            None => {
                gates.push(GateDef::new(g.id.clone(), g.cost, m).map_err(|e| anyhow!("{e}"))?);
                gates.len() - 1
            }
        };
        indices.push(idx);
    }
    // a decomposition of a local target embeds no gates; park a placeholder
    // so the ISA container stays valid
    let isa = if gates.is_empty() {
        Isa::new(vec![GateDef::new("CX", 1.0, gulps::matcore::cx_gate())
            .map_err(|e| anyhow!("{e}"))?])
        .map_err(|e| anyhow!("{e}"))?
    } else {
        Isa::new(gates).map_err(|e| anyhow!("{e}"))?
    };
    let sentence = Sentence {
        gates: indices,
        total_cost: out.sentence.total_cost,
    };
    let trajectory = Trajectory {
        points: out
            .trajectory
            .points
            .iter()
            .map(|p| CanonicalCoord::new(p[0], p[1], p[2]))
            .collect(),
        reflected: out.trajectory.reflected,
    };
    let segments: Vec<SegmentSolution> = out
        .segments
        .iter()
        .map(|s| {
            Ok(SegmentSolution {
                v1: s.v1,
                v2: s.v2,
                residual_norm: s.residual,
                restarts_used: 0,
                left: (mat2_from_json(&s.exterior_left[0])?, mat2_from_json(&s.exterior_left[1])?),
                right: (
                    mat2_from_json(&s.exterior_right[0])?,
                    mat2_from_json(&s.exterior_right[1])?,
                ),
                phase: s.exterior_phase,
            })
        })
        .collect::<Result<_>>()?;
    let local_layers: Vec<(Mat2, Mat2)> = out
        .local_layers
        .iter()
        .map(|[a, b]| Ok((mat2_from_json(a)?, mat2_from_json(b)?)))
        .collect::<Result<_>>()?;
    let d = Decomposition {
        sentence,
        trajectory,
        segments,
        local_layers,
        global_phase: out.global_phase,
        stats: Default::default(),
    };
    Ok((d, target, isa))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip_is_lossless() {
        let u = gulps::matcore::haar_random_su4(3);
        let json = serde_json::to_string(&mat4_to_json(u.matrix())).unwrap();
        let back: MatrixJson = serde_json::from_str(&json).unwrap();
        let m = mat4_from_json(&back).unwrap();
        assert_eq!(m.0, u.matrix().0, "f64 round-trip must be exact");
    }

    #[test]
    fn isa_spec_variants_parse() {
        let text = r#"{
            "format_version": 1,
            "gates": [
                {"id": "cx", "spec": "CX", "cost": 1.0},
                {"id": "third", "spec": {"coords": [0.0833333333333333, 0.0, 0.0]}, "cost": 0.33}
            ]
        }"#;
        let config: IsaConfig = serde_json::from_str(text).unwrap();
        let isa = isa_from_config(&config).unwrap();
        assert_eq!(isa.gates().len(), 2);
    }
}
