use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use fatdist_core::frames::{
    build_horizontal_deg2, build_horizontal_qcont, build_isocontact_deg2, build_isocontact_qcont,
    verify_frame, Context, Regime,
};
use fatdist_core::linalg::{eigenvalues, rank};
use fatdist_core::models::{lift_exact_lagrangian, sample_curve, Basis, Grid};
use fatdist_core::sampling::gaussian_vector;
use fatdist_core::report::Report as CoreReport;
use fatdist_core::{FatTuple, Frame64, Liouville64, QCont};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult, Exit};
use crate::output::Report;
use crate::schema::{frame_file, kind_name, load_path, GridInstance, GridPreset, Instance, ModelInstance};

/// Options shared by every command.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub tol: Option<f64>,
    pub seed: u64,
}

fn inputs(paths: &[&Path]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn wrong_kind(what: &str, got: &Instance) -> CliError {
    CliError::schema(format!("{what}, got {}", kind_name(got.kind())))
}

/// Curvature bracket residuals are exact up to rounding.
const EXACT: f64 = 1e-12;

fn tuple_checks(r: &mut Report, prefix: &str, t: &FatTuple) -> CliResult<Value> {
    let a = t.connecting_automorphism()?;
    let scale = t.omega1().max_abs() * a.a.max_abs() + t.omega2().max_abs();
    r.bound(
        format!("{prefix}connecting identity"),
        a.identity_residual(t),
        t.tol().threshold(scale),
    );
    // smallest |Im λ| relative to |A|; zero means a real eigenvalue
    let gap = eigenvalues(&a.a)?
        .iter()
        .fold(f64::INFINITY, |m, &(_, im)| m.min(im.abs()))
        / a.a.max_abs().max(f64::MIN_POSITIVE);
    let fat = t.is_fat()?;
    r.flag(format!("{prefix}fat"), fat, gap);
    let degree = if fat { Some(t.degree()?) } else { None };
    Ok(json!({ "dim": t.dim(), "fat": fat, "degree": degree }))
}

fn triple_checks(r: &mut Report, prefix: &str, q: &QCont) -> CliResult<Value> {
    r.extend(prefix, &q.validate());
    let pair = q.induced_fat_pair()?;
    let a = pair.connecting_automorphism()?.a;
    r.bound(
        format!("{prefix}induced pair A = -J1"),
        (&a + q.j(0)).max_abs(),
        q.tol().threshold(1.0),
    );
    let fat = pair.is_fat()?;
    r.flag(format!("{prefix}induced pair fat"), fat, 0.0);
    let degree = if fat { Some(pair.degree()?) } else { None };
    Ok(json!({ "dim": q.dim(), "induced_pair_degree": degree }))
}

/// Points where a model is probed: the payload's, else the origin and four
/// seeded Gaussian points.
fn probe_points(m: &ModelInstance, seed: u64) -> CliResult<Vec<Vec<f64>>> {
    let dim = m.model.dim();
    if let Some(pts) = &m.points {
        if let Some(p) = pts.iter().find(|p| p.len() != dim) {
            return Err(CliError::schema(format!(
                "probe point of length {} for a model on R^{dim}",
                p.len()
            )));
        }
        return Ok(pts.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![vec![0.0; dim]];
    pts.extend((0..4).map(|_| gaussian_vector(dim, &mut rng)));
    Ok(pts)
}

fn model_checks(r: &mut Report, m: &ModelInstance, seed: u64) -> CliResult<Value> {
    let model = &m.model;
    let basis = if model.frame().is_some() { Basis::Frame } else { Basis::Orthonormal };
    let mut per_point = Vec::new();
    for (i, x) in probe_points(m, seed)?.iter().enumerate() {
        let prefix = format!("x{i}: ");
        let info = match model.p() {
            1 => {
                let w = &model.pointwise_forms(x, basis)?[0];
                let full = rank(w, model.tol())? == w.rows();
                r.flag(format!("{prefix}contact"), full, w.skew_defect());
                json!({ "contact": full })
            }
            2 => tuple_checks(r, &prefix, &model.fat_pair_at(x, basis)?)?,
            3 => {
                let (g, j) = m.triple.as_ref().ok_or_else(|| {
                    CliError::schema("corank 3 affine_model needs g and j to be checked")
                })?;
                triple_checks(r, &prefix, &model.qcont_at(x, g, j)?)?
            }
            p => return Err(CliError::schema(format!("check supports corank 1 to 3, model has corank {p}"))),
        };
        if let Some(frame) = model.frame() {
            let f = model.frame_at(x)?;
            let mut worst = 0.0f64;
            for a in 0..frame.len() {
                for b in 0..frame.len() {
                    let c = model.eval_curvature_coframe(x, &f.column(a), &f.column(b))?;
                    let br = model.eval_curvature_bracket(a, b, x)?;
                    for (p, q) in c.iter().zip(&br) {
                        worst = worst.max((p - q).abs() / (1.0 + p.abs()));
                    }
                }
            }
            r.bound(format!("{prefix}curvature cross-oracle"), worst, EXACT);
        }
        per_point.push(json!({ "point": x, "checks": info }));
    }
    Ok(json!({ "dim": model.dim(), "corank": model.p(), "points": per_point }))
}

pub fn check(files: &[PathBuf], g: Globals) -> CliResult<Report> {
    let paths: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    let (first, rest) = paths
        .split_first()
        .ok_or_else(|| CliError::schema("check needs at least one file"))?;
    let inst = load_path(first, g.tol)?;
    let tol = match &inst {
        Instance::FatTuple(t) => *t.tol(),
        Instance::Qcont(q) => *q.tol(),
        Instance::Model(m) => *m.model.tol(),
        other => return Err(wrong_kind("check takes fat_tuple, qcont_triple or affine_model", other)),
    };
    let mut r = Report::new("check", inputs(&paths), g.seed, tol);
    let mut result = match &inst {
        Instance::FatTuple(t) => tuple_checks(&mut r, "", t)?,
        Instance::Qcont(q) => triple_checks(&mut r, "", q)?,
        Instance::Model(m) => model_checks(&mut r, m, g.seed)?,
        _ => unreachable!("kind checked above"),
    };
    let mut frames = Vec::new();
    for (i, path) in rest.iter().enumerate() {
        let Instance::Frame(f) = load_path(path, g.tol)? else {
            return Err(CliError::schema(format!("{}: extra check inputs must be frames", path.display())));
        };
        let rep = match &inst {
            Instance::FatTuple(t) => verify_frame(&f, Context::Fat2(t)),
            Instance::Qcont(q) => verify_frame(&f, Context::Qcont(q)),
            _ => return Err(CliError::schema("frames are checked against a fat_tuple or qcont_triple")),
        };
        r.extend(&format!("frame{i}: "), &rep);
        frames.push(json!({ "regime": f.regime.name(), "len": f.len(), "pass": rep.pass() }));
    }
    if !frames.is_empty() {
        result["frames"] = Value::Array(frames);
    }
    r.result = result;
    Ok(r)
}

enum Structure {
    Fat(FatTuple),
    Triple(QCont),
}

fn build(s: &Structure, regime: Regime, k: usize, rng: &mut ChaCha8Rng) -> CliResult<(Frame64, CoreReport<f64>)> {
    Ok(match s {
        Structure::Fat(t) => {
            let f = match regime {
                Regime::HorizontalDeg2 => build_horizontal_deg2(t, k, rng)?,
                Regime::IsocontactDeg2 => build_isocontact_deg2(t, k, rng)?,
                _ => unreachable!("regime matched to structure"),
            };
            let rep = verify_frame(&f, Context::Fat2(t));
            (f, rep)
        }
        Structure::Triple(q) => {
            let f = match regime {
                Regime::HorizontalQcont => build_horizontal_qcont(q, k, rng)?,
                Regime::IsocontactQcont => build_isocontact_qcont(q, k, rng)?,
                _ => unreachable!("regime matched to structure"),
            };
            let rep = verify_frame(&f, Context::Qcont(q));
            (f, rep)
        }
    })
}

pub fn frame(
    file: &Path,
    regime: Option<&str>,
    k: usize,
    out: Option<&Path>,
    g: Globals,
) -> CliResult<Report> {
    let inst = load_path(file, g.tol)?;
    let structure = match inst {
        Instance::FatTuple(t) => Structure::Fat(t),
        Instance::Qcont(q) => Structure::Triple(q),
        Instance::Model(m) => {
            // frame coordinates of D at the first probe point
            let x = probe_points(&m, g.seed)?.remove(0);
            match (m.model.p(), &m.triple) {
                (2, _) => Structure::Fat(m.model.fat_pair_at(&x, Basis::Frame)?),
                (3, Some((gm, j))) => Structure::Triple(m.model.qcont_at(&x, gm, j)?),
                (p, _) => {
                    return Err(CliError::schema(format!(
                        "frame needs a corank 2 model or a corank 3 model with g and j, got corank {p}"
                    )))
                }
            }
        }
        other => return Err(wrong_kind("frame takes fat_tuple, qcont_triple or affine_model", &other)),
    };
    let regime = match (regime, &structure) {
        (Some(s), _) => s.parse::<Regime>()?,
        (None, Structure::Fat(_)) => Regime::HorizontalDeg2,
        (None, Structure::Triple(_)) => Regime::HorizontalQcont,
    };
    if regime.is_qcont() != matches!(structure, Structure::Triple(_)) {
        return Err(CliError::schema(format!("regime {regime} does not match the input kind")));
    }
    let tol = match &structure {
        Structure::Fat(t) => *t.tol(),
        Structure::Triple(q) => *q.tol(),
    };
    let mut r = Report::new("frame", inputs(&[file]), g.seed, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let (f, rep) = build(&structure, regime, k, &mut rng)?;
    if !rep.pass() {
        let failed: Vec<String> = rep.failures().map(|c| format!("{} ({:e})", c.name, c.residual)).collect();
        return Err(CliError {
            exit: Exit::NoFrame,
            message: format!("built frame failed verification: {}", failed.join(", ")),
        });
    }
    r.extend("verify: ", &rep);
    let instance = frame_file(&f);
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&instance).expect("frame serializes") + "\n";
        std::fs::write(path, text).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
    }
    r.result = json!({ "regime": regime.name(), "k": k, "frame": instance });
    Ok(r)
}

/// Samples a preset curve on `l`, with the mesh tolerance used for the
/// exactness check.
fn preset_grid(l: &Liouville64, preset: GridPreset, samples: usize) -> CliResult<(Grid<f64>, Vec<Vec<f64>>, f64)> {
    let n = l.n_dim();
    let half = n / 2;
    match preset {
        GridPreset::Circle => {
            let curve = |t: f64| {
                let (mut x, mut v) = (vec![0.0; n], vec![0.0; n]);
                x[0] = t.cos();
                x[half] = t.sin();
                v[0] = -t.sin();
                v[half] = t.cos();
                (x, v)
            };
            let (grid, phi) = sample_curve(l, curve, 0.0, 1.5 * PI, samples)?;
            // numerical primitives: the midpoint mismatch is the residual being measured
            Ok((grid, phi, 1.0))
        }
        GridPreset::Planar => {
            let x = |t: f64| -> Vec<f64> {
                (0..n)
                    .map(|a| match a {
                        0 => t.cos() + 0.3 * t,
                        1 if half > 1 => (2.0 * t).sin(),
                        a if a < half => 0.1 * a as f64 * t,
                        a => 0.7 - 0.1 * a as f64,
                    })
                    .collect()
            };
            let points: Vec<Vec<f64>> = (0..samples).map(|s| x(s as f64 / samples as f64)).collect();
            let edges = (0..samples - 1).map(|i| (i, i + 1)).collect();
            Ok((Grid { points, edges }, vec![vec![0.0; l.p()]; samples], 1e-12))
        }
    }
}

pub fn lift(files: &[PathBuf], refine: usize, g: Globals) -> CliResult<Report> {
    let paths: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    if paths.len() != 2 {
        return Err(CliError::schema("lift needs a liouville_model file and a grid file"));
    }
    let (l, grid) = match (load_path(paths[0], g.tol)?, load_path(paths[1], g.tol)?) {
        (Instance::Liouville(l), Instance::Grid(gr)) | (Instance::Grid(gr), Instance::Liouville(l)) => (l, gr),
        _ => return Err(CliError::schema("lift needs one liouville_model file and one grid file")),
    };
    let mut r = Report::new("lift", inputs(&paths), g.seed, *l.tol());
    match grid {
        GridInstance::Explicit { grid, primitives, mesh_tol } => {
            if refine > 0 {
                return Err(CliError::schema("refine needs a preset grid"));
            }
            let lifted = lift_exact_lagrangian(&l, &grid, &primitives, mesh_tol)?;
            r.bound("horizontality", lifted.max_residual, mesh_tol);
            r.result = json!({
                "samples": lifted.points.len(),
                "max_residual": lifted.max_residual,
                "points": lifted.points,
                "edges": lifted.edges,
                "edge_residuals": lifted.edge_residuals,
            });
        }
        GridInstance::Preset { preset, samples } => {
            let mut levels = Vec::new();
            let mut residuals = Vec::new();
            let mut last = None;
            for j in 0..=refine {
                let s = samples << j;
                let (gr, phi, mesh_tol) = preset_grid(&l, preset, s)?;
                let lifted = lift_exact_lagrangian(&l, &gr, &phi, mesh_tol)?;
                r.bound(format!("level {j}: horizontality"), lifted.max_residual, mesh_tol);
                levels.push(json!({ "samples": s, "max_residual": lifted.max_residual }));
                residuals.push(lifted.max_residual);
                last = Some(lifted);
            }
            let exact = residuals.iter().all(|&x| x <= EXACT);
            let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
            if refine > 0 {
                if exact {
                    r.flag("exact at every level", true, residuals.iter().fold(0.0, |a, &b| a.max(b)));
                } else {
                    for (j, q) in ratios.iter().enumerate() {
                        // second-order scheme: halving the mesh divides the residual by 4
                        r.bound(format!("ratio {j}->{} within 4 +- 25%", j + 1), (q - 4.0).abs(), 1.0);
                    }
                }
            }
            let lifted = last.expect("at least one level");
            let mut result = json!({
                "preset": preset,
                "levels": levels,
                "max_residual": lifted.max_residual,
            });
            if refine > 0 {
                result["ratios"] = json!(if exact { Vec::new() } else { ratios });
            } else {
                result["points"] = json!(lifted.points);
                result["edges"] = json!(lifted.edges);
                result["edge_residuals"] = json!(lifted.edge_residuals);
            }
            r.result = result;
        }
    }
    Ok(r)
}

/// Jet solver residual and dense-oracle limits.
const JET_RESIDUAL: f64 = 1e-9;
const ORACLE_DIFF: f64 = 1e-6;

pub fn jets(file: &Path, oracle: bool, g: Globals) -> CliResult<Report> {
    let Instance::Jets(inst) = load_path(file, g.tol)? else {
        return Err(CliError::schema(format!("{}: jets takes a jets_system file", file.display())));
    };
    let sys = &inst.system;
    let mut r = Report::new("jets", inputs(&[file]), g.seed, *sys.tol());
    let q = sys.triangular_solve(&inst.rhs)?;
    let res = sys.residual(&inst.rhs, &q)?;
    r.flag("fullrank", true, 0.0);
    r.bound("triangular residual", res, JET_RESIDUAL);
    let solution: Vec<Value> = q
        .values
        .iter()
        .map(|(i, v)| json!({ "index": i.entries(), "value": v }))
        .collect();
    let mut result = json!({
        "k1": sys.k1(),
        "n": sys.n(),
        "p": sys.p(),
        "order": sys.order(),
        "residual": res,
        "solution": solution,
    });
    if oracle {
        let o = sys.dense_oracle(&inst.rhs, &q)?;
        r.bound("dense residual", o.dense_residual, JET_RESIDUAL);
        r.bound("oracle agreement", o.max_diff, ORACLE_DIFF);
        result["oracle"] = json!({
            "equations": o.equations,
            "unknowns": o.unknowns,
            "rank": o.rank,
            "dense_residual": o.dense_residual,
            "max_diff": o.max_diff,
        });
    }
    r.result = result;
    Ok(r)
}
