#![allow(dead_code)]

use std::f64::consts::PI;

use fatdist_core::jets::SymTensorSystem;
use fatdist_core::models::{lift_exact_lagrangian, make_holomorphic_contact_model, sample_curve};
use fatdist_core::sampling::{gaussian_matrix, well_conditioned};
use fatdist_core::{FatTuple, JetSystem64, Liouville64, Matrix64, Tolerance64};
use rand::Rng;

/// Jet system on the holomorphic model with `n = 2` (rank-8 distribution in
/// `ℝ¹⁰`) at `point`, with `p1` given by frame coordinates.
pub fn holomorphic_jet_system(point: &[f64], coords: &[Vec<f64>], order: usize) -> JetSystem64 {
    let m = make_holomorphic_contact_model::<f64>(2);
    let f = m.frame_at(point).unwrap();
    let cols: Vec<Vec<f64>> = coords.iter().map(|c| f.mul_vec(c)).collect();
    let p1 = Matrix64::from_columns(10, &cols).unwrap();
    SymTensorSystem::new(m.coframe_at(point), m.curvature_forms(), p1, order, Tolerance64::default())
        .unwrap()
}

pub fn circle(t: f64) -> (Vec<f64>, Vec<f64>) {
    (
        vec![t.cos(), 0.0, t.sin(), 0.0],
        vec![-t.sin(), 0.0, t.cos(), 0.0],
    )
}

/// Horizontality residual of the lifted open circle arc with `samples`
/// points; the primitives are integrated numerically.
pub fn circle_lift_residual(samples: usize) -> f64 {
    let l = Liouville64::holomorphic_pair();
    let (grid, phi) = sample_curve(&l, circle, 0.0, 1.5 * PI, samples).unwrap();
    lift_exact_lagrangian(&l, &grid, &phi, 1.0).unwrap().max_residual
}

/// Planar curve in the `(x₁, x₂)`-plane with `y` fixed and `φ ≡ 0`.
pub fn planar_curve_residual(samples: usize) -> f64 {
    let l = Liouville64::holomorphic_pair();
    let curve = |t: f64| (vec![t.cos() + 0.3 * t, (2.0 * t).sin(), 0.7, -1.2], vec![0.0; 4]);
    let points: Vec<Vec<f64>> = (0..samples).map(|s| curve(s as f64 / samples as f64).0).collect();
    let edges = (0..samples - 1).map(|i| (i, i + 1)).collect();
    let grid = fatdist_core::models::Grid { points, edges };
    let phi = vec![vec![0.0, 0.0]; samples];
    lift_exact_lagrangian(&l, &grid, &phi, 1e-12).unwrap().max_residual
}

pub fn random_skew<R: Rng>(n: usize, rng: &mut R) -> Matrix64 {
    let g = gaussian_matrix::<f64, R>(n, n, rng);
    &g - &g.transpose()
}

/// Random nondegenerate pair; fat or not.
pub fn random_tuple<R: Rng>(n: usize, rng: &mut R) -> FatTuple {
    loop {
        if let Ok(t) = FatTuple::new(random_skew(n, rng), random_skew(n, rng), Tolerance64::default()) {
            if t.connecting_automorphism().is_ok() {
                return t;
            }
        }
    }
}

/// Holomorphic tuple of dimension `4n` under a random congruence and a
/// random recombination of the two forms.
pub fn random_degree_two_tuple<R: Rng>(n: usize, rng: &mut R) -> FatTuple {
    let p = well_conditioned::<f64, R>(4 * n, rng);
    let c = well_conditioned::<f64, R>(2, rng);
    FatTuple::holomorphic(n)
        .congruent(&p)
        .unwrap()
        .recombine(c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)])
        .unwrap()
}
