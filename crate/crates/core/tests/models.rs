use fatdist_core::linalg::unit;
use fatdist_core::models::{
    bracket, make_holomorphic_contact_model, make_liouville_model,
    make_quaternionic_heisenberg_model, AffineCoframeModel, Basis,
};
use fatdist_core::sampling::gaussian_vector;
use fatdist_core::{Liouville64, Model64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

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

/// Expected `[F_a, F_b]` of the holomorphic model: only pairs `(Y, X)` in
/// the same block are nonzero, with values in `span{∂z₁, ∂z₂}`.
fn heisenberg_table(a: usize, b: usize) -> [f64; 2] {
    let (ja, ra) = (a / 4, a % 4);
    let (jb, rb) = (b / 4, b % 4);
    if ja != jb {
        return [0.0, 0.0];
    }
    // [Y_{j1}, X_{j1}] = ∂z₁, [Y_{j2}, X_{j1}] = ∂z₂,
    // [Y_{j1}, X_{j2}] = ∂z₂, [Y_{j2}, X_{j2}] = −∂z₁
    let yx = |y: usize, x: usize| match (y, x) {
        (2, 0) => [1.0, 0.0],
        (3, 0) => [0.0, 1.0],
        (2, 1) => [0.0, 1.0],
        (3, 1) => [-1.0, 0.0],
        _ => [0.0, 0.0],
    };
    match (ra, rb) {
        (2 | 3, 0 | 1) => yx(ra, rb),
        (0 | 1, 2 | 3) => {
            let [p, q] = yx(rb, ra);
            [-p, -q]
        }
        _ => [0.0, 0.0],
    }
}

#[test]
fn complex_heisenberg_bracket_table() {
    for n in 1..=3 {
        let m = make_holomorphic_contact_model::<f64>(n);
        let frame = m.frame().unwrap();
        let dim = m.dim();
        for a in 0..frame.len() {
            for b in 0..frame.len() {
                let br = bracket(&frame[a], &frame[b]).unwrap();
                assert_eq!(br.linear.max_abs(), 0.0);
                let [e1, e2] = heisenberg_table(a, b);
                let mut expected = vec![0.0; dim];
                expected[dim - 2] = e1;
                expected[dim - 1] = e2;
                assert_eq!(br.constant, expected, "[F{a}, F{b}] in n = {n}");
            }
        }
    }
}

#[test]
fn curvature_cross_oracle_on_shipped_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for m in shipped_models() {
        let frame = m.frame().unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = gaussian_vector(m.dim(), &mut rng);
            let f = m.frame_at(&x).unwrap();
            for i in 0..frame.len() {
                for j in 0..frame.len() {
                    let c = m.eval_curvature_coframe(&x, &f.column(i), &f.column(j)).unwrap();
                    let b = m.eval_curvature_bracket(i, j, &x).unwrap();
                    for (p, q) in c.iter().zip(&b) {
                        assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
                    }
                }
            }
        }
    }
}

#[test]
fn coframe_curvature_of_repeated_vector_vanishes() {
    let m = make_holomorphic_contact_model::<f64>(1);
    let f = m.frame_at(&[0.5; 6]).unwrap();
    let c = m.eval_curvature_coframe(&[0.5; 6], &f.column(1), &f.column(1)).unwrap();
    assert_eq!(c, vec![0.0, 0.0]);
    let b = m.eval_curvature_bracket(0, 1, &[0.5; 6]).unwrap();
    assert_eq!(b, vec![0.0, 0.0]);
}

#[test]
fn holomorphic_degree_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=3 {
        let m = make_holomorphic_contact_model::<f64>(n);
        for _ in 0..100 {
            let x: Vec<f64> = gaussian_vector(m.dim(), &mut rng);
            for basis in [Basis::Frame, Basis::Orthonormal] {
                let t = m.fat_pair_at(&x, basis).unwrap();
                assert!(t.is_fat().unwrap());
                assert_eq!(t.degree().unwrap(), 2);
            }
        }
    }
}

#[test]
fn quaternionic_models_validate_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 1..=3 {
        let (m, q) = make_quaternionic_heisenberg_model::<f64>(n);
        let js = [q.j(0).clone(), q.j(1).clone(), q.j(2).clone()];
        for _ in 0..10 {
            let x: Vec<f64> = gaussian_vector(m.dim(), &mut rng);
            let qx = m.qcont_at(&x, q.g(), &js).unwrap();
            assert!(qx.validate().pass());
            let pair = qx.induced_fat_pair().unwrap();
            assert_eq!(pair.degree().unwrap(), 2);
        }
        // every line is regular
        for i in 0..4 * n {
            let v = fatdist_core::linalg::Subspace::from_vectors(4 * n, &[unit(4 * n, i)], q.tol()).unwrap();
            assert!(q.is_regular3(&v).unwrap());
        }
    }
}

#[test]
fn frame_annihilation_is_an_identity() {
    for m in shipped_models() {
        for f in m.frame().unwrap() {
            for l in m.lambdas() {
                assert_eq!(l.annihilation_defect(f), 0.0);
            }
        }
    }
}

#[test]
fn model_rejects_non_annihilated_frame() {
    let m = make_holomorphic_contact_model::<f64>(1);
    let mut frame = m.frame().unwrap().to_vec();
    frame[0].constant[4] = 1.0;
    let r = AffineCoframeModel::new(m.lambdas().to_vec(), Some(frame), *m.tol());
    assert!(r.is_err());
}
