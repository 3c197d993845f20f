//! Randomized property suites behind `fatdist verify`.
//!
//! Trial `i` draws from a ChaCha stream selected by `i` under the global
//! seed, so results do not depend on scheduling.

use std::f64::consts::PI;
use std::path::Path;

use fatdist_core::fat2::standard_symplectic;
use fatdist_core::frames::{build_horizontal_deg2, verify_frame, Context, Frame};
use fatdist_core::jets::{RhsTable, SymTensor, SymTensorSystem};
use fatdist_core::linalg::{eigenvalues, lu_solve, rank, Matrix, Subspace};
use fatdist_core::models::{
    formal_lift, lift_exact_lagrangian, make_holomorphic_contact_model, make_liouville_model,
    make_quaternionic_heisenberg_model, sample_curve, Basis, Grid,
};
use fatdist_core::qcont::quaternion_units;
use fatdist_core::report::Report as CoreReport;
use fatdist_core::sampling::{
    gaussian_matrix, gaussian_vector, random_subspace, unit_vector_in, well_conditioned,
};
use fatdist_core::{
    Error, FatTuple, Liouville64, Matrix64, Model64, QCont, Result, Subspace64, Tolerance64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::schema::{kind_name, load_path, Instance};
use crate::output::Report;

pub const SUITES: [&str; 6] = [
    "fat2-props",
    "deg2-identities",
    "qcont-props",
    "curvature-cross",
    "jets-oracle",
    "liouville",
];

/// Instance a suite runs against instead of drawing one per trial.
#[derive(Debug, Clone)]
pub enum Fixed {
    Tuple(FatTuple),
    Triple(QCont),
    Model(Model64),
    Liouville(Liouville64),
}

impl Fixed {
    fn tol(&self) -> Tolerance64 {
        match self {
            Fixed::Tuple(t) => *t.tol(),
            Fixed::Triple(q) => *q.tol(),
            Fixed::Model(m) => *m.tol(),
            Fixed::Liouville(l) => *l.tol(),
        }
    }
}

pub struct Ctx {
    pub tol: Tolerance64,
    pub fixed: Option<Fixed>,
}

type Trial = fn(&mut ChaCha8Rng, &Ctx) -> Result<CoreReport<f64>>;

fn trial_fn(suite: &str) -> Option<Trial> {
    Some(match suite {
        "fat2-props" => fat2_props,
        "deg2-identities" => deg2_identities,
        "qcont-props" => qcont_props,
        "curvature-cross" => curvature_cross,
        "jets-oracle" => jets_oracle,
        "liouville" => liouville,
        _ => return None,
    })
}

/// Exact-arithmetic comparisons only see rounding.
const EXACT: f64 = 1e-12;
const JET_RESIDUAL: f64 = 1e-9;
const ORACLE_DIFF: f64 = 1e-6;

fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> Matrix64 {
    let g = gaussian_matrix::<f64, _>(n, n, rng);
    &g - &g.transpose()
}

fn random_tuple(n: usize, tol: &Tolerance64, rng: &mut ChaCha8Rng) -> Result<FatTuple> {
    let mut last = None;
    for _ in 0..20 {
        match FatTuple::new(random_skew(n, rng), random_skew(n, rng), *tol)
            .and_then(|t| t.connecting_automorphism().map(|_| t))
        {
            Ok(t) => return Ok(t),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Ω₂ = Ω₁D, D scalar on Darboux pairs, under a random congruence; returns
/// a real eigenvector of the connecting automorphism.
fn real_eigen_tuple(n: usize, tol: &Tolerance64, rng: &mut ChaCha8Rng) -> Result<(FatTuple, Vec<f64>)> {
    let w1 = standard_symplectic::<f64>(n / 2);
    let d = Matrix64::from_fn(n, n, |i, j| if i == j { 1.0 + (i / 2) as f64 } else { 0.0 });
    let p = well_conditioned::<f64, _>(n, rng);
    let t = FatTuple::new(w1.clone(), &w1 * &d, *tol)?.congruent(&p)?;
    let p_inv = lu_solve(&p, &Matrix::identity(n))?;
    Ok((t, p_inv.column(0)))
}

fn random_degree_two_tuple(n: usize, tol: &Tolerance64, rng: &mut ChaCha8Rng) -> Result<FatTuple> {
    let p = well_conditioned::<f64, _>(4 * n, rng);
    let c = well_conditioned::<f64, _>(2, rng);
    FatTuple::holomorphic(n)
        .with_tol(*tol)
        .congruent(&p)?
        .recombine(c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)])
}

fn grow_isotropic(
    n: usize,
    k: usize,
    perp: impl Fn(&Subspace64) -> Result<Subspace64>,
    tol: &Tolerance64,
    rng: &mut ChaCha8Rng,
) -> Result<Subspace64> {
    let mut v = Subspace::zero(n);
    for _ in 0..k {
        let Some(x) = unit_vector_in(&perp(&v)?, rng) else { break };
        v = v.sum(&Subspace::from_vectors(n, &[x], tol)?, tol)?;
    }
    Ok(v)
}

fn heisenberg_triple(n: usize, tol: &Tolerance64, rng: &mut ChaCha8Rng) -> Result<QCont> {
    let (m, _) = make_quaternionic_heisenberg_model::<f64>(n);
    let x: Vec<f64> = gaussian_vector(m.dim(), rng);
    let j = quaternion_units::<f64>().map(|u| Matrix::block_diag(&vec![u; n]));
    Ok(m.qcont_at(&x, &Matrix::identity(4 * n), &j)?.with_tol(*tol))
}

fn fat2_props(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Result<CoreReport<f64>> {
    let tol = &ctx.tol;
    let mut r = CoreReport::new();
    let (t, v) = if let Some(Fixed::Tuple(t)) = &ctx.fixed {
        let n = t.dim();
        (t.clone(), random_subspace(n, rng.random_range(1..=n / 2 + 1), rng))
    } else if rng.random_bool(0.25) {
        let n = 2 * rng.random_range(2..=6);
        let (t, e) = real_eigen_tuple(n, tol, rng)?;
        let extra = rng.random_range(0..n / 2);
        let mut vs = vec![e];
        vs.extend((0..extra).map(|_| gaussian_vector(n, rng)));
        let v = Subspace::from_vectors(n, &vs, tol)?;
        (t, v)
    } else {
        let n = 2 * rng.random_range(2..=6);
        let t = random_tuple(n, tol, rng)?;
        let v = if rng.random_bool(0.25) {
            let a = t.connecting_automorphism()?.a;
            let x: Vec<f64> = gaussian_vector(n, rng);
            Subspace::from_vectors(n, &[a.mul_vec(&x), x], tol)?
        } else {
            random_subspace(n, rng.random_range(1..=n / 2 + 1), rng)
        };
        (t, v)
    };
    let ca = t.connecting_automorphism()?;
    let a = &ca.a;
    let scale = t.omega1().max_abs() * a.max_abs() + t.omega2().max_abs();
    r.bound("connecting identity", ca.identity_residual(&t), tol.threshold(scale));

    let k = v.dim();
    let bt = v.basis().transpose();
    let map = (&bt * t.omega1()).vstack(&(&bt * t.omega2()))?;
    let by_rank = rank(&map, tol)? == 2 * k;
    let av = v.image(a, tol)?;
    let by_meet = av.dim() == k && v.intersect(&av, tol)?.dim() == 0;
    let by_codim = t.omega_perp(&v)?.codim() == 2 * k;
    let agree = by_rank == by_meet && by_rank == by_codim;
    r.flag("regularity criteria agree", agree, if agree { 0.0 } else { 1.0 });

    let lhs = t.perp2(&v)?;
    r.bound("perp2 V = perp1 AV", lhs.distance(&t.perp1(&av)?), tol.agreement());

    let gap = eigenvalues(a)?
        .iter()
        .fold(f64::INFINITY, |m, &(_, im)| m.min(im.abs()));
    let no_real = gap > tol.threshold(a.max_abs());
    r.flag("fat iff no real eigenvalue", t.is_fat()? == no_real, gap);
    Ok(r)
}

fn deg2_identities(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Result<CoreReport<f64>> {
    let tol = &ctx.tol;
    let t = match &ctx.fixed {
        Some(Fixed::Tuple(t)) => t.clone(),
        _ => random_degree_two_tuple(rng.random_range(1..=3), tol, rng)?,
    };
    let n = t.dim() / 4;
    let k = rng.random_range(1..=2 * n);
    let v = if rng.random_bool(0.5) {
        random_subspace(4 * n, k, rng)
    } else {
        grow_isotropic(4 * n, k, |v| t.omega_perp(v), tol, rng)?
    };
    t.deg2_identities(&v)
}

fn qcont_props(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Result<CoreReport<f64>> {
    let tol = &ctx.tol;
    let q = match &ctx.fixed {
        Some(Fixed::Triple(q)) => q.clone(),
        _ => heisenberg_triple(rng.random_range(2..=4), tol, rng)?,
    };
    let n = q.dim() / 4;
    let mut r = q.validate();

    let k = rng.random_range(1..=n);
    let v = grow_isotropic(4 * n, k, |v| q.omega_perp3(v), tol, rng)?;
    r.flag("isotropic subspace is regular", q.is_isotropic3(&v) && q.is_regular3(&v)?, v.dim() as f64);

    let w = random_subspace(4 * n, rng.random_range(1..=n), rng);
    if q.is_regular3(&w)? {
        for c in q.decomposition_check(&w)?.checks {
            r.flag(format!("decomposition: {}", c.name), c.pass, c.residual);
        }
    }

    let a = q.induced_fat_pair()?.connecting_automorphism()?.a;
    r.bound("induced pair A = -J1", (&a + q.j(0)).max_abs(), tol.threshold(1.0));
    Ok(r)
}

fn shipped_models() -> Vec<Model64> {
    let mut v: Vec<Model64> = (1..=3).map(make_holomorphic_contact_model).collect();
    v.extend((1..=2).map(|n| make_quaternionic_heisenberg_model(n).0));
    v.extend(
        [
            Liouville64::standard_contact(),
            Liouville64::holomorphic_pair(),
            Liouville64::symmetric_pair(),
            Liouville64::quaternionic_triple(),
        ]
        .iter()
        .map(make_liouville_model),
    );
    v
}

fn curvature_cross(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Result<CoreReport<f64>> {
    let mut r = CoreReport::new();
    let models = match &ctx.fixed {
        Some(Fixed::Model(m)) => vec![m.clone()],
        _ => shipped_models(),
    };
    for (idx, m) in models.iter().enumerate() {
        let x: Vec<f64> = gaussian_vector(m.dim(), rng);
        let f = m.frame_at(&x)?;
        let mut worst = 0.0f64;
        for a in 0..f.cols() {
            for b in 0..f.cols() {
                let c = m.eval_curvature_coframe(&x, &f.column(a), &f.column(b))?;
                let br = m.eval_curvature_bracket(a, b, &x)?;
                for (p, q) in c.iter().zip(&br) {
                    worst = worst.max((p - q).abs() / (1.0 + p.abs()));
                }
            }
        }
        r.bound(format!("model {idx} (dim {}, corank {})", m.dim(), m.p()), worst, EXACT);
    }
    Ok(r)
}

fn jets_oracle(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Result<CoreReport<f64>> {
    let tol = &ctx.tol;
    let m = match &ctx.fixed {
        Some(Fixed::Model(m)) => m.clone(),
        _ => make_holomorphic_contact_model::<f64>(2).with_tol(*tol),
    };
    let dim = m.dim();
    let x: Vec<f64> = gaussian_vector(dim, rng);
    let t = m.fat_pair_at(&x, Basis::Frame)?;
    let coords = build_horizontal_deg2(&t, (t.dim() / 4).clamp(1, 2), rng)?;
    let f = m.frame_at(&x)?;
    let cols: Vec<Vec<f64>> = coords.vectors.iter().map(|c| f.mul_vec(c)).collect();
    let p1 = Matrix::from_columns(dim, &cols)?;
    let order = rng.random_range(2..=3);
    let sys = SymTensorSystem::new(m.coframe_at(&x), m.curvature_forms(), p1, order, *tol)?;
    let q_star = SymTensor {
        values: sys.indices().into_iter().map(|i| (i, gaussian_vector(dim, rng))).collect(),
    };
    let rhs = RhsTable::manufactured(&sys, &q_star)?;
    let q = sys.triangular_solve(&rhs)?;
    let o = sys.dense_oracle(&rhs, &q)?;
    let mut r = CoreReport::new();
    r.bound("triangular residual", sys.residual(&rhs, &q)?, JET_RESIDUAL);
    r.bound("dense residual", o.dense_residual, JET_RESIDUAL);
    r.bound("oracle agreement", o.max_diff, ORACLE_DIFF);
    Ok(r)
}

/// `μ` vanishes on every curve that keeps the second half of the
/// coordinates fixed.
fn flat_in_first_half(l: &Liouville64) -> bool {
    let half = l.n_dim() / 2;
    l.mus().iter().all(|m| {
        (0..half).all(|a| m.constant[a] == 0.0 && (0..l.n_dim()).all(|b| m.linear[(a, b)] == 0.0))
    })
}

fn liouville(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Result<CoreReport<f64>> {
    let tol = &ctx.tol;
    let l = match &ctx.fixed {
        Some(Fixed::Liouville(l)) => l.clone(),
        _ => Liouville64::holomorphic_pair(),
    };
    let (n, half, p) = (l.n_dim(), l.n_dim() / 2, l.p());
    let mut r = CoreReport::new();

    let radius = rng.random_range(0.5..2.0);
    let circle = |t: f64| {
        let (mut x, mut v) = (vec![0.0; n], vec![0.0; n]);
        x[0] = radius * t.cos();
        x[half] = radius * t.sin();
        v[0] = -radius * t.sin();
        v[half] = radius * t.cos();
        (x, v)
    };
    let mut res = Vec::new();
    for s in [40, 80, 160, 320] {
        let (grid, phi) = sample_curve(&l, circle, 0.0, 1.5 * PI, s)?;
        res.push(lift_exact_lagrangian(&l, &grid, &phi, 10.0)?.max_residual);
    }
    if res.iter().all(|&x| x <= EXACT) {
        r.bound("circle lift exact at every level", res[0], EXACT);
    } else {
        for (j, w) in res.windows(2).enumerate() {
            r.bound(format!("circle ratio {j} within 4 +- 25%"), (w[0] / w[1] - 4.0).abs(), 1.0);
        }
    }

    if flat_in_first_half(&l) {
        let c: Vec<f64> = gaussian_vector(n, rng);
        let planar = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|a| match a {
                    0 => c[0] + t.cos(),
                    a if a < half => c[a] + t * t * a as f64,
                    a => c[a],
                })
                .collect()
        };
        let samples = 50;
        let points: Vec<Vec<f64>> = (0..samples).map(|s| planar(s as f64 / samples as f64)).collect();
        let grid = Grid { points, edges: (0..samples - 1).map(|i| (i, i + 1)).collect() };
        let lifted = lift_exact_lagrangian(&l, &grid, &vec![vec![0.0; p]; samples], EXACT)?;
        r.bound("planar lift horizontal", lifted.max_residual, EXACT);
    }

    let d = l.differentials();
    let base = match d.as_slice() {
        [w1, w2] => Some(FatTuple::new(w1.clone(), w2.clone(), *tol)?),
        _ => None,
    };
    if let Some(base) = base.filter(|b| b.is_fat().unwrap_or(false)) {
        let tangent = build_horizontal_deg2(&base, 1, rng)?;
        let point: Vec<f64> = gaussian_vector(n, rng);
        let frame = formal_lift(&l, &point, &tangent.vectors)?;
        let model = make_liouville_model(&l);
        let mut x = point;
        x.extend(vec![0.0; p]);
        let coords = frame
            .vectors
            .iter()
            .map(|h| model.frame_coordinates(&x, h))
            .collect::<Result<Vec<_>>>()?;
        let pointwise = model.fat_pair_at(&x, Basis::Frame)?.with_tol(*tol);
        let rep = verify_frame(&Frame::new(n, coords, frame.regime)?, Context::Fat2(&pointwise));
        r.flag("formal lift verifies", rep.pass(), rep.max_residual());
    }
    Ok(r)
}

#[derive(Debug, Default, Serialize)]
struct CheckStats {
    name: String,
    trials: usize,
    failures: usize,
    min: Option<f64>,
    median: Option<f64>,
    max: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TrialError {
    trial: usize,
    message: String,
}

const ERRORS_SHOWN: usize = 10;

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn stats(name: String, mut residuals: Vec<f64>, failures: usize) -> CheckStats {
    let trials = residuals.len();
    residuals.retain(|x| x.is_finite());
    residuals.sort_by(f64::total_cmp);
    let median = match residuals.len() {
        0 => None,
        m if m % 2 == 1 => Some(residuals[m / 2]),
        m => Some(0.5 * (residuals[m / 2 - 1] + residuals[m / 2])),
    };
    CheckStats {
        name,
        trials,
        failures,
        min: residuals.first().copied().and_then(finite),
        median: median.and_then(finite),
        max: residuals.last().copied().and_then(finite),
    }
}

fn fixed_for(suite: &str, inst: Instance) -> CliResult<Fixed> {
    let no_frame = |m: &Model64| m.frame().is_none();
    let fixed = match (suite, inst) {
        ("fat2-props" | "deg2-identities", Instance::FatTuple(t)) => Fixed::Tuple(t),
        ("qcont-props", Instance::Qcont(q)) => Fixed::Triple(q),
        ("curvature-cross" | "jets-oracle", Instance::Model(m)) if !no_frame(&m.model) => {
            Fixed::Model(m.model)
        }
        ("curvature-cross" | "jets-oracle", Instance::Liouville(l)) => {
            Fixed::Model(make_liouville_model(&l))
        }
        ("liouville", Instance::Liouville(l)) => Fixed::Liouville(l),
        (_, Instance::Model(m)) if no_frame(&m.model) => {
            return Err(CliError::schema(format!("suite {suite} needs a model with frame fields")))
        }
        (_, other) => {
            return Err(CliError::schema(format!(
                "suite {suite} does not take a {} instance",
                kind_name(other.kind())
            )))
        }
    };
    match &fixed {
        Fixed::Model(m) if suite == "jets-oracle" && m.p() != 2 => Err(CliError::schema(format!(
            "suite {suite} needs a corank-2 model, got corank {}",
            m.p()
        ))),
        _ => Ok(fixed),
    }
}

pub fn verify(suite: &str, trials: usize, file: Option<&Path>, g: crate::commands::Globals) -> CliResult<Report> {
    let run = trial_fn(suite).ok_or_else(|| {
        CliError::schema(format!("unknown suite {suite:?}; expected one of {}", SUITES.join(", ")))
    })?;
    if trials == 0 {
        return Err(CliError::schema("trials must be at least 1"));
    }
    let fixed = file.map(|f| load_path(f, g.tol).and_then(|i| fixed_for(suite, i))).transpose()?;
    let tol = match &fixed {
        Some(f) => f.tol(),
        None => crate::schema::resolve_tol(None, g.tol)?,
    };
    let ctx = Ctx { tol, fixed };
    let outcomes: Vec<Result<CoreReport<f64>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            rng.set_stream(i as u64);
            run(&mut rng, &ctx)
        })
        .collect();

    // first-seen order over trials in index order
    let mut names: Vec<String> = Vec::new();
    let mut residuals: Vec<Vec<f64>> = Vec::new();
    let mut failures: Vec<usize> = Vec::new();
    let mut errors = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(rep) => {
                for c in rep.checks {
                    let slot = match names.iter().position(|n| *n == c.name) {
                        Some(s) => s,
                        None => {
                            names.push(c.name);
                            residuals.push(Vec::new());
                            failures.push(0);
                            names.len() - 1
                        }
                    };
                    residuals[slot].push(c.residual);
                    failures[slot] += usize::from(!c.pass);
                }
            }
            Err(e) => errors.push(TrialError { trial: i, message: error_text(&e) }),
        }
    }

    let mut inputs = vec![suite.to_owned()];
    inputs.extend(file.map(|f| f.display().to_string()));
    let mut r = Report::new("verify", inputs, g.seed, tol);
    let table: Vec<CheckStats> = names
        .into_iter()
        .zip(residuals)
        .zip(failures)
        .map(|((n, res), f)| stats(n, res, f))
        .collect();
    for s in &table {
        r.flag(s.name.clone(), s.failures == 0, s.max.unwrap_or(f64::NAN));
    }
    r.flag("trials completed", errors.is_empty(), errors.len() as f64);
    let error_count = errors.len();
    errors.truncate(ERRORS_SHOWN);
    r.result = json!({
        "suite": suite,
        "trials": trials,
        "checks": table,
        "errors": error_count,
        "first_errors": errors,
    });
    Ok(r)
}

fn error_text(e: &Error) -> String {
    e.to_string()
}
