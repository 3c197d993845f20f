//! JSON instance files. Matrices are arrays of rows.

use std::path::Path;

use fatdist_core::frames::{Frame, Regime};
use fatdist_core::jets::{EqTag, MultiIndex, RhsTable, SymTensorSystem};
use fatdist_core::linalg::{Matrix, Tolerance};
use fatdist_core::models::{
    make_holomorphic_contact_model, make_quaternionic_heisenberg_model, AffineCovector,
    AffineVectorField, Grid, LiouvilleModel,
};
use fatdist_core::qcont::{quaternion_units, QContTriple};
use fatdist_core::{FatTuple, Frame64, JetSystem64, Liouville64, Matrix64, Model64, QCont, Tolerance64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    FatTuple,
    QcontTriple,
    AffineModel,
    LiouvilleModel,
    Frame,
    Grid,
    JetsSystem,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    pub rel_eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_eps: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<TolSpec>,
    pub payload: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FatTuplePayload {
    omega1: Rows,
    omega2: Rows,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QcontPayload {
    g: Rows,
    j: [Rows; 3],
    #[serde(default)]
    omega: Option<[Rows; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffinePayload {
    constant: Vec<f64>,
    linear: Rows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelPreset {
    Holomorphic,
    Quaternionic,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelPayload {
    #[serde(default)]
    preset: Option<ModelPreset>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    lambdas: Option<Vec<AffinePayload>>,
    #[serde(default)]
    frame: Option<Vec<AffinePayload>>,
    #[serde(default)]
    g: Option<Rows>,
    #[serde(default)]
    j: Option<[Rows; 3]>,
    #[serde(default)]
    points: Option<Rows>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LiouvillePreset {
    StandardContact,
    HolomorphicPair,
    SymmetricPair,
    QuaternionicTriple,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LiouvillePayload {
    #[serde(default)]
    preset: Option<LiouvillePreset>,
    #[serde(default)]
    mus: Option<Vec<AffinePayload>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FramePayload {
    regime: String,
    ambient_dim: usize,
    vectors: Rows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPreset {
    /// Open arc of the unit circle in the `(x₁, y₁)` plane.
    Circle,
    /// Curve in the `x`-coordinates with `y` fixed and zero primitives.
    Planar,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridPayload {
    #[serde(default)]
    preset: Option<GridPreset>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    points: Option<Rows>,
    #[serde(default)]
    edges: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    primitives: Option<Rows>,
    #[serde(default)]
    mesh_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RhsEntry {
    #[serde(default)]
    lambda: Option<Vec<usize>>,
    #[serde(default)]
    j: Option<Vec<usize>>,
    #[serde(default)]
    a: Option<usize>,
    #[serde(default)]
    b: Option<usize>,
    value: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetsPayload {
    order: usize,
    #[serde(default)]
    lambda: Option<Rows>,
    #[serde(default)]
    dlambdas: Option<Vec<Rows>>,
    #[serde(default)]
    p1: Option<Rows>,
    #[serde(default)]
    model: Option<ModelPayload>,
    #[serde(default)]
    point: Option<Vec<f64>>,
    #[serde(default)]
    frame_coords: Option<Rows>,
    #[serde(default)]
    rhs: Vec<RhsEntry>,
}

/// Affine model with optional pointwise metric data for corank 3.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub model: Model64,
    pub triple: Option<(Matrix64, [Matrix64; 3])>,
    pub points: Option<Rows>,
}

#[derive(Debug, Clone)]
pub enum GridInstance {
    Explicit {
        grid: Grid<f64>,
        primitives: Rows,
        mesh_tol: f64,
    },
    Preset {
        preset: GridPreset,
        samples: usize,
    },
}

#[derive(Debug, Clone)]
pub struct JetsInstance {
    pub system: JetSystem64,
    pub rhs: RhsTable<f64>,
}

#[derive(Debug, Clone)]
pub enum Instance {
    FatTuple(FatTuple),
    Qcont(QCont),
    Model(ModelInstance),
    Liouville(Liouville64),
    Frame(Frame64),
    Grid(GridInstance),
    Jets(JetsInstance),
}

impl Instance {
    pub fn kind(&self) -> Kind {
        match self {
            Instance::FatTuple(_) => Kind::FatTuple,
            Instance::Qcont(_) => Kind::QcontTriple,
            Instance::Model(_) => Kind::AffineModel,
            Instance::Liouville(_) => Kind::LiouvilleModel,
            Instance::Frame(_) => Kind::Frame,
            Instance::Grid(_) => Kind::Grid,
            Instance::Jets(_) => Kind::JetsSystem,
        }
    }
}

pub fn kind_name(kind: Kind) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// File tolerance, then the command-line `rel_eps` override.
pub fn resolve_tol(file: Option<TolSpec>, rel_override: Option<f64>) -> CliResult<Tolerance64> {
    let d = Tolerance64::default();
    let rel = rel_override.or(file.map(|t| t.rel_eps)).unwrap_or(d.rel_eps);
    let abs = file.and_then(|t| t.abs_eps).unwrap_or(d.abs_eps);
    Ok(Tolerance::new(rel, abs)?)
}

pub fn read_instance(path: &Path) -> CliResult<InstanceFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| CliError::schema(format!("{}: {}", path.display(), e.message)))
}

pub fn parse_instance(text: &str) -> CliResult<InstanceFile> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| CliError::schema(e.to_string()))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::schema(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    Ok(file)
}

fn payload<P: for<'de> Deserialize<'de>>(kind: Kind, v: &Value) -> CliResult<P> {
    serde_json::from_value(v.clone())
        .map_err(|e| CliError::schema(format!("{} payload: {e}", kind_name(kind))))
}

fn matrix(name: &str, rows: &Rows) -> CliResult<Matrix64> {
    if rows.is_empty() {
        return Err(CliError::schema(format!("{name}: matrix has no rows")));
    }
    Matrix::from_rows(rows).map_err(|e| CliError::schema(format!("{name}: {e}")))
}

fn matrices3(name: &str, m: &[Rows; 3]) -> CliResult<[Matrix64; 3]> {
    Ok([
        matrix(&format!("{name}[0]"), &m[0])?,
        matrix(&format!("{name}[1]"), &m[1])?,
        matrix(&format!("{name}[2]"), &m[2])?,
    ])
}

fn covectors(name: &str, items: &[AffinePayload]) -> CliResult<Vec<AffineCovector<f64>>> {
    items
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let linear = matrix(&format!("{name}[{i}].linear"), &a.linear)?;
            AffineCovector::new(a.constant.clone(), linear)
                .map_err(|e| CliError::schema(format!("{name}[{i}]: {e}")))
        })
        .collect()
}

fn fields(items: &[AffinePayload]) -> CliResult<Vec<AffineVectorField<f64>>> {
    items
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let linear = matrix(&format!("frame[{i}].linear"), &a.linear)?;
            AffineVectorField::new(a.constant.clone(), linear)
                .map_err(|e| CliError::schema(format!("frame[{i}]: {e}")))
        })
        .collect()
}

fn model(p: ModelPayload, tol: Tolerance64) -> CliResult<ModelInstance> {
    let points = p.points.clone();
    if let Some(preset) = p.preset {
        if p.lambdas.is_some() || p.frame.is_some() {
            return Err(CliError::schema("affine_model: give either a preset or lambdas, not both"));
        }
        let n = p.n.ok_or_else(|| CliError::schema("affine_model: preset needs n"))?;
        if n == 0 {
            return Err(CliError::schema("affine_model: n must be at least 1"));
        }
        return Ok(match preset {
            ModelPreset::Holomorphic => ModelInstance {
                model: make_holomorphic_contact_model(n).with_tol(tol),
                triple: None,
                points,
            },
            ModelPreset::Quaternionic => {
                let j = quaternion_units::<f64>().map(|u| Matrix::block_diag(&vec![u; n]));
                ModelInstance {
                    model: make_quaternionic_heisenberg_model(n).0.with_tol(tol),
                    triple: Some((Matrix::identity(4 * n), j)),
                    points,
                }
            }
        });
    }
    let lambdas = p
        .lambdas
        .as_deref()
        .ok_or_else(|| CliError::schema("affine_model: needs a preset or lambdas"))?;
    let lambdas = covectors("lambdas", lambdas)?;
    let frame = p.frame.as_deref().map(fields).transpose()?;
    let triple = match (&p.g, &p.j) {
        (Some(g), Some(j)) => Some((matrix("g", g)?, matrices3("j", j)?)),
        (None, None) => None,
        _ => return Err(CliError::schema("affine_model: g and j go together")),
    };
    Ok(ModelInstance {
        model: Model64::new(lambdas, frame, tol)?,
        triple,
        points,
    })
}

fn liouville(p: LiouvillePayload, tol: Tolerance64) -> CliResult<Liouville64> {
    match (p.preset, p.mus) {
        (Some(preset), None) => {
            let l = match preset {
                LiouvillePreset::StandardContact => Liouville64::standard_contact(),
                LiouvillePreset::HolomorphicPair => Liouville64::holomorphic_pair(),
                LiouvillePreset::SymmetricPair => Liouville64::symmetric_pair(),
                LiouvillePreset::QuaternionicTriple => Liouville64::quaternionic_triple(),
            };
            Ok(LiouvilleModel::new(l.mus().to_vec(), tol)?)
        }
        (None, Some(mus)) => Ok(LiouvilleModel::new(covectors("mus", &mus)?, tol)?),
        _ => Err(CliError::schema("liouville_model: give exactly one of preset and mus")),
    }
}

fn grid(p: GridPayload) -> CliResult<GridInstance> {
    if let Some(preset) = p.preset {
        if p.points.is_some() || p.primitives.is_some() || p.edges.is_some() {
            return Err(CliError::schema("grid: a preset takes only samples"));
        }
        let samples = p.samples.unwrap_or(40);
        if samples < 2 {
            return Err(CliError::schema("grid: samples must be at least 2"));
        }
        return Ok(GridInstance::Preset { preset, samples });
    }
    let points = p.points.ok_or_else(|| CliError::schema("grid: needs a preset or points"))?;
    let primitives = p
        .primitives
        .ok_or_else(|| CliError::schema("grid: explicit points need primitives"))?;
    if points.len() < 2 {
        return Err(CliError::schema("grid: needs at least two points"));
    }
    let edges = match p.edges {
        Some(e) => e.into_iter().map(|[i, j]| (i, j)).collect(),
        None => (0..points.len() - 1).map(|i| (i, i + 1)).collect(),
    };
    let mesh_tol = p.mesh_tol.unwrap_or(1e-6);
    if mesh_tol.is_nan() || mesh_tol <= 0.0 {
        return Err(CliError::schema("grid: mesh_tol must be positive"));
    }
    Ok(GridInstance::Explicit {
        grid: Grid { points, edges },
        primitives,
        mesh_tol,
    })
}

fn rhs_tag(e: &RhsEntry) -> CliResult<EqTag> {
    let index = |v: &Vec<usize>| {
        MultiIndex::new(v.clone()).map_err(|err| CliError::schema(format!("rhs index {v:?}: {err}")))
    };
    match (&e.lambda, &e.j, e.a, e.b) {
        (Some(i), None, None, None) => Ok(EqTag::Lambda(index(i)?)),
        (None, Some(j), Some(a), Some(b)) if a < b => Ok(EqTag::Coupling { j: index(j)?, a, b }),
        (None, Some(_), Some(a), Some(b)) => {
            Err(CliError::schema(format!("rhs coupling needs a < b, got a = {a}, b = {b}")))
        }
        _ => Err(CliError::schema("rhs entry needs either lambda or j, a and b")),
    }
}

fn jets(p: JetsPayload, tol: Tolerance64) -> CliResult<JetsInstance> {
    let (lambda, dlambdas, p1) = match (p.model, p.lambda, p.dlambdas, p.p1) {
        (Some(m), None, None, None) => {
            let point = p.point.ok_or_else(|| CliError::schema("jets_system: model needs point"))?;
            let coords = p
                .frame_coords
                .ok_or_else(|| CliError::schema("jets_system: model needs frame_coords"))?;
            let m = model(m, tol)?.model;
            if point.len() != m.dim() {
                return Err(CliError::schema(format!(
                    "jets_system: point has length {}, model lives on R^{}",
                    point.len(),
                    m.dim()
                )));
            }
            let f = m.frame_at(&point)?;
            let mut cols = Vec::with_capacity(coords.len());
            for (i, c) in coords.iter().enumerate() {
                if c.len() != f.cols() {
                    return Err(CliError::schema(format!(
                        "frame_coords[{i}] has length {}, distribution has rank {}",
                        c.len(),
                        f.cols()
                    )));
                }
                cols.push(f.mul_vec(c));
            }
            let p1 = Matrix::from_columns(m.dim(), &cols)?;
            (m.coframe_at(&point), m.curvature_forms(), p1)
        }
        (None, Some(l), Some(d), Some(p1)) => {
            if p.point.is_some() || p.frame_coords.is_some() {
                return Err(CliError::schema("jets_system: point and frame_coords need a model"));
            }
            let d = d
                .iter()
                .enumerate()
                .map(|(s, m)| matrix(&format!("dlambdas[{s}]"), m))
                .collect::<CliResult<Vec<_>>>()?;
            (matrix("lambda", &l)?, d, matrix("p1", &p1)?)
        }
        _ => {
            return Err(CliError::schema(
                "jets_system: give either model, point and frame_coords or lambda, dlambdas and p1",
            ))
        }
    };
    let system = SymTensorSystem::new(lambda, dlambdas, p1, p.order, tol)?;
    let mut rhs = RhsTable::zeros(system.p());
    let tags = system.equations();
    for e in &p.rhs {
        let tag = rhs_tag(e)?;
        if !tags.contains(&tag) {
            return Err(CliError::schema(format!("rhs tag {tag} is not an equation of the system")));
        }
        rhs.insert(tag, e.value.clone())?;
    }
    Ok(JetsInstance { system, rhs })
}

/// Parses the payload of `file` into core types.
pub fn load(file: &InstanceFile, rel_override: Option<f64>) -> CliResult<Instance> {
    let tol = resolve_tol(file.tol, rel_override)?;
    let kind = file.kind;
    let v = &file.payload;
    Ok(match kind {
        Kind::FatTuple => {
            let p: FatTuplePayload = payload(kind, v)?;
            Instance::FatTuple(FatTuple::new(matrix("omega1", &p.omega1)?, matrix("omega2", &p.omega2)?, tol)?)
        }
        Kind::QcontTriple => {
            let p: QcontPayload = payload(kind, v)?;
            let g = matrix("g", &p.g)?;
            let j = matrices3("j", &p.j)?;
            Instance::Qcont(match p.omega {
                Some(w) => QContTriple::from_parts(g, j, matrices3("omega", &w)?, tol)?,
                None => QContTriple::new(g, j, tol)?,
            })
        }
        Kind::AffineModel => Instance::Model(model(payload(kind, v)?, tol)?),
        Kind::LiouvilleModel => Instance::Liouville(liouville(payload(kind, v)?, tol)?),
        Kind::Frame => {
            let p: FramePayload = payload(kind, v)?;
            let regime: Regime = p.regime.parse()?;
            Instance::Frame(Frame::new(p.ambient_dim, p.vectors, regime)?)
        }
        Kind::Grid => Instance::Grid(grid(payload(kind, v)?)?),
        Kind::JetsSystem => Instance::Jets(jets(payload(kind, v)?, tol)?),
    })
}

pub fn load_path(path: &Path, rel_override: Option<f64>) -> CliResult<Instance> {
    load(&read_instance(path)?, rel_override)
        .map_err(|e| CliError { message: format!("{}: {}", path.display(), e.message), ..e })
}

/// Instance file holding a frame.
pub fn frame_file(frame: &Frame64) -> InstanceFile {
    InstanceFile {
        schema_version: SCHEMA_VERSION,
        kind: Kind::Frame,
        tol: None,
        payload: serde_json::json!({
            "regime": frame.regime.name(),
            "ambient_dim": frame.ambient_dim,
            "vectors": frame.vectors,
        }),
    }
}
