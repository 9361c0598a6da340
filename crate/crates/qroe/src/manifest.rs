//! JSON manifests in, JSON reports out.
//!
//! Complex numbers serialize as `[re, im]` pairs and matrices as row-major
//! nested arrays; every field is snake_case and the version tag is
//! mandatory. Reports carry a mode label on every verdict line and are
//! byte-identical for identical `(manifest, seed, tol)` — wall time is only
//! embedded on request.

use crate::coarse::{build_ladder, default_max_depth, CoarseStructure, Membership, VerdictMode};
use crate::error::{Error, Result};
use crate::linalg::{cplx, CMatrix, Operator, DEFAULT_TOL};
use crate::qrel::{relation_to_subspace, ClassicalRelation, QuantumRelation};
use crate::qura::{assemble_roe, classify_triviality, TrivialityCase};
use crate::suppexp::{
    lambda_min_projection_abelian, projection_constrained_abelian, projection_constrained_sampled,
    vector_constrained, ConstraintOutcome, Witness,
};
use crate::vna::{AlgebraHandle, RepresentedAlgebra, TraceFunctional};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(op: &Operator) -> JsonMatrix {
    (0..op.dim())
        .map(|r| {
            (0..op.dim())
                .map(|c| {
                    let z = op.entry(r, c);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(m: &JsonMatrix, path: &str) -> Result<Operator> {
    let n = m.len();
    let mut mat = CMatrix::zeros(n, n);
    for (r, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Manifest {
                path: path.into(),
                message: format!("row {r} has length {}, expected {n}", row.len()),
            });
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            mat[(r, c)] = cplx(re, im);
        }
    }
    Operator::new(mat)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<MorphismManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suppexp: Option<SuppexpManifest>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| Error::Manifest {
            path: "$".into(),
            message: e.to_string(),
        })?;
        if m.version != 1 {
            return Err(Error::Manifest {
                path: "$.version".into(),
                message: format!("unsupported version {}", m.version),
            });
        }
        Ok(m)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(1000)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<JsonMatrix>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceManifest {
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalRelationManifest {
    pub n: usize,
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalRelationManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_matrices: Option<Vec<JsonMatrix>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureManifest {
    pub generators: Vec<RelationManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricManifest {
    pub dist: Vec<Vec<f64>>,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorphismManifest {
    /// `map[x] = f(x)` for a point map `f: X -> Y`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_map: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain_points: Option<usize>,
    /// Generators of the coarse structure on the geometric domain `X`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_generators: Option<Vec<ClassicalRelationManifest>>,
    /// Generators of the coarse structure on the geometric codomain `Y`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain_generators: Option<Vec<ClassicalRelationManifest>>,
    /// Optional second map for the closeness check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other_map: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyMember {
    AtomSet(Vec<usize>),
    Matrix(JsonMatrix),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionManifest {
    pub families: Vec<Vec<FamilyMember>>,
    pub entourage: ClassicalRelationManifest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<ClassicalRelationManifest>,
    /// When present, also run the backtracking search with this many
    /// families and diameter budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_families: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_max_diam: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuppexpManifest {
    pub operator: JsonMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    /// "projection" (default) or "vector".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Pass,
    Negative,
    Unknown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictLine {
    pub name: String,
    /// "exact" or "sampled"; no verdict ships without a mode label.
    pub mode: String,
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl VerdictLine {
    pub fn exact(name: &str, outcome: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            mode: "exact".into(),
            outcome: outcome.into(),
            value: None,
            samples: None,
            seed: None,
        }
    }

    pub fn sampled(name: &str, outcome: impl Into<String>, samples: usize, seed: u64) -> Self {
        Self {
            name: name.into(),
            mode: "sampled".into(),
            outcome: outcome.into(),
            value: None,
            samples: Some(samples),
            seed: Some(seed),
        }
    }

    pub fn with_value(mut self, value: serde_json::Value) -> Self {
        self.value = Some(value);
        self
    }

    pub fn from_mode(name: &str, mode: VerdictMode, outcome: impl Into<String>) -> Self {
        match mode {
            VerdictMode::Exact => Self::exact(name, outcome),
            VerdictMode::Sampled { samples, seed } => Self::sampled(name, outcome, samples, seed),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: u32,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub status: ReportStatus,
    pub verdicts: Vec<VerdictLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
    section.as_ref().ok_or_else(|| Error::Manifest {
        path: format!("$.{name}"),
        message: "required section is missing".into(),
    })
}

pub fn build_algebra(manifest: &Manifest) -> Result<AlgebraHandle> {
    let spec = require(&manifest.algebra, "algebra")?;
    let tol = manifest.tol();
    match (&spec.blocks, &spec.generators) {
        (Some(blocks), None) => {
            let blocks: Vec<(usize, usize)> = blocks.iter().map(|&[d, m]| (d, m)).collect();
            Ok(Arc::new(RepresentedAlgebra::from_blocks(&blocks, tol)?))
        }
        (None, Some(gens)) => {
            let ops: Vec<Operator> = gens
                .iter()
                .enumerate()
                .map(|(i, g)| matrix_from_json(g, &format!("$.algebra.generators[{i}]")))
                .collect::<Result<_>>()?;
            let dim = ops
                .first()
                .map(|o| o.dim())
                .ok_or_else(|| Error::Manifest {
                    path: "$.algebra.generators".into(),
                    message: "empty generator list; give at least one matrix".into(),
                })?;
            Ok(Arc::new(RepresentedAlgebra::from_generators(&ops, dim, tol)?))
        }
        _ => Err(Error::Manifest {
            path: "$.algebra".into(),
            message: "give exactly one of `blocks` or `generators`".into(),
        }),
    }
}

fn build_relation(
    algebra: &AlgebraHandle,
    spec: &RelationManifest,
    path: &str,
) -> Result<QuantumRelation> {
    match (&spec.classical, &spec.seed_matrices) {
        (Some(c), None) => {
            let e = ClassicalRelation::new(c.n, c.pairs.iter().map(|&[x, y]| (x, y)))?;
            relation_to_subspace(algebra.clone(), &e)
        }
        (None, Some(seeds)) => {
            let ops: Vec<Operator> = seeds
                .iter()
                .enumerate()
                .map(|(i, s)| matrix_from_json(s, &format!("{path}.seed_matrices[{i}]")))
                .collect::<Result<_>>()?;
            QuantumRelation::from_bimodule_closure(algebra.clone(), &ops)
        }
        _ => Err(Error::Manifest {
            path: path.into(),
            message: "give exactly one of `classical` or `seed_matrices`".into(),
        }),
    }
}

pub fn build_structure(manifest: &Manifest, algebra: &AlgebraHandle) -> Result<CoarseStructure> {
    let spec = require(&manifest.structure, "structure")?;
    let gens: Vec<QuantumRelation> = spec
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| build_relation(algebra, g, &format!("$.structure.generators[{i}]")))
        .collect::<Result<_>>()?;
    let depth = spec
        .max_depth
        .or(manifest.max_depth)
        .unwrap_or_else(|| default_max_depth(algebra.ambient_dim()));
    build_ladder(algebra.clone(), &gens, depth)
}

/// `algebra` command: builds the algebra and reports the cached dimensions.
pub fn run_algebra(manifest: &Manifest) -> Result<Report> {
    let algebra = build_algebra(manifest)?;
    let mut verdicts = vec![
        VerdictLine::exact("ambient_dim", algebra.ambient_dim().to_string()),
        VerdictLine::exact("algebra_dim", algebra.dim().to_string()),
        VerdictLine::exact("commutant_dim", algebra.commutant_space().dim().to_string()),
        VerdictLine::exact("center_dim", algebra.center_space().dim().to_string()),
        VerdictLine::exact(
            "minimal_central_projections",
            algebra.minimal_central_projections().len().to_string(),
        ),
    ];
    if let Some(blocks) = algebra.block_form() {
        let desc: Vec<[usize; 2]> = blocks.iter().map(|b| [b.dim, b.multiplicity]).collect();
        verdicts.push(
            VerdictLine::exact("block_form", "recovered")
                .with_value(serde_json::to_value(desc).expect("serializable")),
        );
    }
    Ok(Report {
        command: "algebra".into(),
        version: manifest.version,
        tol: manifest.tol(),
        seed: manifest.seed,
        status: ReportStatus::Pass,
        verdicts,
        wall_time_ms: None,
    })
}

/// `structure` command: ladder dimensions and the stabilization certificate.
pub fn run_structure(manifest: &Manifest) -> Result<Report> {
    let algebra = build_algebra(manifest)?;
    let s = build_structure(manifest, &algebra)?;
    let dims: Vec<usize> = s.ladder().iter().map(|l| l.dim()).collect();
    let status = if s.is_stabilized() {
        ReportStatus::Pass
    } else {
        ReportStatus::Unknown
    };
    let verdicts = vec![
        VerdictLine::exact("ladder_dims", format!("{dims:?}"))
            .with_value(serde_json::to_value(&dims).expect("serializable")),
        VerdictLine::exact(
            "stabilized",
            match s.stabilization_level() {
                Some(level) => format!("yes at level {level}"),
                None => "no (depth budget exhausted)".into(),
            },
        ),
    ];
    Ok(Report {
        command: "structure".into(),
        version: manifest.version,
        tol: manifest.tol(),
        seed: manifest.seed,
        status,
        verdicts,
        wall_time_ms: None,
    })
}

/// `qura` command: assembles the Roe algebra and classifies it.
pub fn run_qura(manifest: &Manifest) -> Result<Report> {
    let algebra = build_algebra(manifest)?;
    let s = build_structure(manifest, &algebra)?;
    let roe = assemble_roe(&s)?;
    let mut verdicts = vec![
        VerdictLine::exact("roe_dim", roe.dim().to_string()),
        VerdictLine::exact(
            "connected",
            crate::qura::is_connected(&roe)?.to_string(),
        ),
        VerdictLine::exact("commutant_dim", roe.commutant_space().dim().to_string()),
        VerdictLine::exact("stabilized", roe.is_stabilized().to_string()),
    ];
    let status = if roe.is_stabilized() {
        let report = classify_triviality(&roe)?;
        verdicts.push(VerdictLine::exact(
            "case",
            match report.case {
                TrivialityCase::FullAlgebra => "full_algebra",
                TrivialityCase::Disconnected => "disconnected",
            },
        ));
        if let Some(level) = report.stabilization_level {
            verdicts.push(VerdictLine::exact("stabilization_level", level.to_string()));
        }
        ReportStatus::Pass
    } else {
        ReportStatus::Unknown
    };
    Ok(Report {
        command: "qura".into(),
        version: manifest.version,
        tol: manifest.tol(),
        seed: manifest.seed,
        status,
        verdicts,
        wall_time_ms: None,
    })
}

fn witness_json(witness: &Witness) -> serde_json::Value {
    match witness {
        Witness::Atom { index, ratio } => serde_json::json!({
            "kind": "atom", "index": index, "ratio": ratio,
        }),
        Witness::Projection { q, ratio } => serde_json::json!({
            "kind": "projection", "ratio": ratio, "q": matrix_to_json(q),
        }),
        Witness::Vector { xi, ratio } => serde_json::json!({
            "kind": "vector", "ratio": ratio,
            "xi": xi.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        }),
    }
}

/// `suppexp` command: constraint verdicts and least-lambda reports.
pub fn run_suppexp(manifest: &Manifest) -> Result<Report> {
    let algebra = build_algebra(manifest)?;
    let trace = require(&manifest.trace, "trace")?;
    let tau = TraceFunctional::new(trace.weights.clone())?;
    let spec = require(&manifest.suppexp, "suppexp")?;
    let a = matrix_from_json(&spec.operator, "$.suppexp.operator")?;
    let mode = spec.mode.as_deref().unwrap_or("projection");
    let samples = manifest.samples();
    let seed = manifest.seed();
    let mut verdicts = Vec::new();
    let mut status = ReportStatus::Pass;
    if algebra.is_canonical_diagonal() && mode == "projection" {
        let lm = lambda_min_projection_abelian(&a, &algebra, &tau)?;
        verdicts.push(
            VerdictLine::exact("lambda_min", format!("{lm}"))
                .with_value(serde_json::json!(lm)),
        );
        if let Some(lambda) = spec.lambda {
            let v = projection_constrained_abelian(&a, &algebra, &tau, lambda)?;
            match v.outcome {
                ConstraintOutcome::Satisfied { .. } => {
                    verdicts.push(VerdictLine::exact("constraint", "satisfied"));
                }
                ConstraintOutcome::Refuted { witness } => {
                    status = ReportStatus::Negative;
                    verdicts.push(
                        VerdictLine::exact("constraint", "refuted")
                            .with_value(witness_json(&witness)),
                    );
                }
                ConstraintOutcome::InconclusivePass { .. } => unreachable!("exact mode"),
            }
        }
    } else {
        let lambda = spec.lambda.ok_or_else(|| Error::Manifest {
            path: "$.suppexp.lambda".into(),
            message: "sampled modes need an explicit lambda".into(),
        })?;
        let v = if mode == "vector" {
            vector_constrained(&a, &algebra, &tau, lambda, samples, seed)?
        } else {
            projection_constrained_sampled(&a, &algebra, &tau, lambda, samples, seed)?
        };
        match v.outcome {
            ConstraintOutcome::Satisfied { .. } => {
                verdicts.push(VerdictLine::exact("constraint", "satisfied"));
            }
            ConstraintOutcome::Refuted { witness } => {
                status = ReportStatus::Negative;
                verdicts.push(
                    VerdictLine::from_mode("constraint", v.mode, "refuted")
                        .with_value(witness_json(&witness)),
                );
            }
            ConstraintOutcome::InconclusivePass { checked, .. } => {
                status = ReportStatus::Unknown;
                verdicts.push(
                    VerdictLine::from_mode("constraint", v.mode, "no refutation found")
                        .with_value(serde_json::json!({ "checked": checked })),
                );
            }
        }
    }
    if let Some(grid) = &spec.lambda_grid {
        let s = crate::suppexp::suppexp_structure(
            algebra.clone(),
            &tau,
            grid,
            manifest
                .max_depth
                .unwrap_or_else(|| default_max_depth(algebra.ambient_dim())),
        )?;
        let roe = assemble_roe(&s)?;
        verdicts.push(VerdictLine::exact("structure_roe_dim", roe.dim().to_string()));
        verdicts.push(VerdictLine::exact(
            "operator_in_roe",
            roe.space().contains(&a)?.to_string(),
        ));
    }
    Ok(Report {
        command: "suppexp".into(),
        version: manifest.version,
        tol: manifest.tol(),
        seed: manifest.seed,
        status,
        verdicts,
        wall_time_ms: None,
    })
}

/// `morph` command: classical checkers for a point map, with the
/// bridge-quantum coarseness verdict alongside.
pub fn run_morph(manifest: &Manifest) -> Result<Report> {
    let spec = require(&manifest.morphism, "morphism")?;
    let map = require(&spec.classical_map, "morphism.classical_map")?;
    let ny = spec.codomain_points.ok_or_else(|| Error::Manifest {
        path: "$.morphism.codomain_points".into(),
        message: "codomain size required".into(),
    })?;
    let nx = map.len();
    let tol = manifest.tol();
    let to_relations = |gens: &Option<Vec<ClassicalRelationManifest>>, n: usize| -> Result<Vec<ClassicalRelation>> {
        match gens {
            Some(gs) => gs
                .iter()
                .map(|g| {
                    if g.n != n {
                        return Err(Error::Manifest {
                            path: "$.morphism".into(),
                            message: format!("generator on {} points, expected {n}", g.n),
                        });
                    }
                    ClassicalRelation::new(g.n, g.pairs.iter().map(|&[x, y]| (x, y)))
                })
                .collect(),
            None => Ok(Vec::new()),
        }
    };
    let gens_x = to_relations(&spec.domain_generators, nx)?;
    let gens_y = to_relations(&spec.codomain_generators, ny)?;
    let sx = crate::qrel::ClassicalCoarseStructure::generated_by(nx, &gens_x)?;
    let sy = crate::qrel::ClassicalCoarseStructure::generated_by(ny, &gens_y)?;
    let coarse = crate::morph::is_coarse_classical(map, &sx, &sy)?;
    let expanding = crate::morph::is_expanding_classical(map, &sx, &sy)?;
    let cobounded = crate::morph::is_cobounded_classical(map, &sy)?;
    let mut verdicts = vec![
        VerdictLine::exact("coarse", coarse.to_string()),
        VerdictLine::exact("expanding", expanding.to_string()),
        VerdictLine::exact("cobounded", cobounded.to_string()),
    ];
    if let Some(other) = &spec.other_map {
        let close = crate::morph::are_close_classical(map, other, &sy)?;
        verdicts.push(VerdictLine::exact("close_to_other_map", close.to_string()));
    }
    // Bridge-quantum route for the coarseness verdict.
    let alg_x = Arc::new(RepresentedAlgebra::diagonal(nx, tol)?);
    let alg_y = Arc::new(RepresentedAlgebra::diagonal(ny, tol)?);
    let qgens_x: Vec<QuantumRelation> = gens_x
        .iter()
        .map(|e| relation_to_subspace(alg_x.clone(), e))
        .collect::<Result<_>>()?;
    let qgens_y: Vec<QuantumRelation> = gens_y
        .iter()
        .map(|e| relation_to_subspace(alg_y.clone(), e))
        .collect::<Result<_>>()?;
    let s_x = build_ladder(alg_x, &qgens_x, default_max_depth(nx))?;
    let s_y = build_ladder(alg_y, &qgens_y, default_max_depth(ny))?;
    let phi = crate::morph::QuantumFunction::from_classical_function(map, ny, tol)?;
    let qv = crate::morph::is_coarse(&phi, &s_x, &s_y, 0, manifest.seed())?;
    let quantum_outcome = match qv.verdict {
        Membership::Yes(level) => format!("yes at level {level}"),
        Membership::No => "no".into(),
        Membership::Unknown => "unknown".into(),
    };
    verdicts.push(VerdictLine::exact("coarse_via_bridge", quantum_outcome));
    let agree = matches!(qv.verdict, Membership::Yes(_)) == coarse;
    verdicts.push(VerdictLine::exact("routes_agree", agree.to_string()));
    let status = if !agree {
        ReportStatus::Negative
    } else if coarse && expanding && cobounded {
        ReportStatus::Pass
    } else {
        ReportStatus::Negative
    };
    Ok(Report {
        command: "morph".into(),
        version: manifest.version,
        tol: manifest.tol(),
        seed: manifest.seed,
        status,
        verdicts,
        wall_time_ms: None,
    })
}

/// `asydim` command: verifies a supplied decomposition against a metric
/// band structure, optionally running the backtracking search.
pub fn run_asydim(manifest: &Manifest) -> Result<Report> {
    let metric = require(&manifest.metric, "metric")?;
    let spec = require(&manifest.decomposition, "decomposition")?;
    let n = metric.dist.len();
    let tol = manifest.tol();
    let algebra = Arc::new(RepresentedAlgebra::diagonal(n, tol)?);
    let entourage = ClassicalRelation::new(
        spec.entourage.n,
        spec.entourage.pairs.iter().map(|&[x, y]| (x, y)),
    )?;
    let e_rel = relation_to_subspace(algebra.clone(), &entourage)?;
    let s = build_ladder(
        algebra.clone(),
        &[e_rel.clone()],
        manifest.max_depth.unwrap_or_else(|| default_max_depth(n)),
    )?;
    let mut families = Vec::new();
    for (i, family) in spec.families.iter().enumerate() {
        let mut ops = Vec::new();
        for (j, member) in family.iter().enumerate() {
            let op = match member {
                FamilyMember::AtomSet(atoms) => {
                    let mut p = Operator::zeros(n);
                    for &x in atoms {
                        if x >= n {
                            return Err(Error::Manifest {
                                path: format!("$.decomposition.families[{i}][{j}]"),
                                message: format!("atom {x} outside the space"),
                            });
                        }
                        p = p.add(&Operator::matrix_unit(n, x, x))?;
                    }
                    p
                }
                FamilyMember::Matrix(m) => {
                    matrix_from_json(m, &format!("$.decomposition.families[{i}][{j}]"))?
                }
            };
            ops.push(op);
        }
        families.push(ops);
    }
    let bound = match &spec.bound {
        Some(b) => Some(relation_to_subspace(
            algebra.clone(),
            &ClassicalRelation::new(b.n, b.pairs.iter().map(|&[x, y]| (x, y)))?,
        )?),
        None => None,
    };
    let verdict = crate::asydim::check_decomposition(
        &s,
        &e_rel,
        &families,
        bound.as_ref(),
        manifest.samples(),
        manifest.seed(),
    )?;
    let mut verdicts = vec![
        VerdictLine::exact("cover", verdict.cover_ok.to_string()),
        VerdictLine::exact(
            "entourage_disjoint",
            format!("{:?}", verdict.disjoint_ok),
        ),
        VerdictLine::exact("uniformly_bounded", verdict.bounded_ok.to_string()),
        VerdictLine::exact("accepted", verdict.accepted.to_string()),
    ];
    if let Some(level) = verdict.bound_level {
        verdicts.push(VerdictLine::exact("bound_ladder_level", level.to_string()));
    }
    if let (Some(nf), Some(diam)) = (spec.search_families, spec.search_max_diam) {
        match crate::asydim::search_decomposition(&metric.dist, &entourage, nf, diam)? {
            crate::asydim::SearchResult::Found(dec) => {
                verdicts.push(
                    VerdictLine::exact("search", "found")
                        .with_value(serde_json::to_value(&dec.families).expect("serializable")),
                );
            }
            crate::asydim::SearchResult::Exhausted => {
                verdicts.push(VerdictLine::exact("search", "exhausted"));
            }
        }
    }
    Ok(Report {
        command: "asydim".into(),
        version: manifest.version,
        tol: manifest.tol(),
        seed: manifest.seed,
        status: if verdict.accepted {
            ReportStatus::Pass
        } else {
            ReportStatus::Negative
        },
        verdicts,
        wall_time_ms: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_report_from_blocks() {
        let m = Manifest::from_json(
            r#"{"version": 1, "algebra": {"blocks": [[1,1],[1,1],[1,1]]}}"#,
        )
        .unwrap();
        let report = run_algebra(&m).unwrap();
        assert_eq!(report.status, ReportStatus::Pass);
        let commutant = report
            .verdicts
            .iter()
            .find(|v| v.name == "commutant_dim")
            .unwrap();
        assert_eq!(commutant.outcome, "3");
    }

    #[test]
    fn algebra_report_with_multiplicity() {
        let m = Manifest::from_json(r#"{"version": 1, "algebra": {"blocks": [[2,2]]}}"#).unwrap();
        let report = run_algebra(&m).unwrap();
        let commutant = report
            .verdicts
            .iter()
            .find(|v| v.name == "commutant_dim")
            .unwrap();
        assert_eq!(commutant.outcome, "4");
    }

    #[test]
    fn algebra_from_generator_matrix() {
        let m = Manifest::from_json(
            r#"{"version": 1, "algebra": {"generators": [[[[0,0],[1,0]],[[0,0],[0,0]]]]}}"#,
        )
        .unwrap();
        let report = run_algebra(&m).unwrap();
        let dim = report
            .verdicts
            .iter()
            .find(|v| v.name == "algebra_dim")
            .unwrap();
        assert_eq!(dim.outcome, "4");
    }

    #[test]
    fn qura_report_on_path_graph() {
        let m = Manifest::from_json(
            r#"{
              "version": 1,
              "algebra": {"blocks": [[1,1],[1,1],[1,1],[1,1]]},
              "structure": {"generators": [{"classical": {"n": 4,
                "pairs": [[0,1],[1,0],[1,2],[2,1],[2,3],[3,2]]}}]}
            }"#,
        )
        .unwrap();
        let report = run_qura(&m).unwrap();
        assert_eq!(report.status, ReportStatus::Pass);
        let roe = report.verdicts.iter().find(|v| v.name == "roe_dim").unwrap();
        assert_eq!(roe.outcome, "16");
        let connected = report
            .verdicts
            .iter()
            .find(|v| v.name == "connected")
            .unwrap();
        assert_eq!(connected.outcome, "true");
    }

    #[test]
    fn manifest_rejects_bad_version() {
        assert!(Manifest::from_json(r#"{"version": 2}"#).is_err());
    }

    #[test]
    fn manifest_error_paths_are_structured() {
        let m = Manifest::from_json(r#"{"version": 1}"#).unwrap();
        match run_algebra(&m) {
            Err(Error::Manifest { path, .. }) => assert_eq!(path, "$.algebra"),
            other => panic!("expected manifest error, got {other:?}"),
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let text = r#"{
          "version": 1, "seed": 7,
          "algebra": {"blocks": [[1,1],[1,1]]},
          "trace": {"weights": [1.0, 2.0]},
          "suppexp": {"operator": [[[0,0],[1,0]],[[0,0],[0,0]]], "lambda": 2.0}
        }"#;
        let m = Manifest::from_json(text).unwrap();
        let a = run_suppexp(&m).unwrap().to_json();
        let b = run_suppexp(&m).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn suppexp_exact_lambda_min_in_report() {
        let m = Manifest::from_json(
            r#"{
              "version": 1,
              "algebra": {"blocks": [[1,1],[1,1]]},
              "trace": {"weights": [1.0, 3.0]},
              "suppexp": {"operator": [[[0,0],[1,0]],[[0,0],[0,0]]]}
            }"#,
        )
        .unwrap();
        let report = run_suppexp(&m).unwrap();
        let lm = report
            .verdicts
            .iter()
            .find(|v| v.name == "lambda_min")
            .unwrap();
        assert_eq!(lm.value, Some(serde_json::json!(3.0)));
    }

    #[test]
    fn morph_report_routes_agree() {
        let m = Manifest::from_json(
            r#"{
              "version": 1,
              "morphism": {
                "classical_map": [0, 1, 2],
                "codomain_points": 3,
                "domain_generators": [{"n": 3, "pairs": [[0,1],[1,0],[1,2],[2,1]]}],
                "codomain_generators": [{"n": 3, "pairs": [[0,1],[1,0],[1,2],[2,1]]}]
              }
            }"#,
        )
        .unwrap();
        let report = run_morph(&m).unwrap();
        assert_eq!(report.status, ReportStatus::Pass);
        let agree = report
            .verdicts
            .iter()
            .find(|v| v.name == "routes_agree")
            .unwrap();
        assert_eq!(agree.outcome, "true");
    }

    #[test]
    fn asydim_report_accepts_interval_decomposition() {
        let m = Manifest::from_json(
            r#"{
              "version": 1,
              "metric": {"dist": [[0,1,2,3],[1,0,1,2],[2,1,0,1],[3,2,1,0]], "grid": [0,1,2,3]},
              "decomposition": {
                "families": [[[0,1]],[[2,3]]],
                "entourage": {"n": 4, "pairs": [[0,0],[1,1],[2,2],[3,3],[0,1],[1,0],[2,3],[3,2],[1,2],[2,1]]}
              }
            }"#,
        )
        .unwrap();
        let report = run_asydim(&m).unwrap();
        assert_eq!(report.status, ReportStatus::Pass, "{report:?}");
    }
}
