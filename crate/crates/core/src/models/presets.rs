use super::{AffineCoframeModel, AffineCovector, AffineVectorField};
use crate::linalg::{Matrix, Tolerance};
use crate::qcont::{quaternion_units, QContTriple};
use crate::Scalar;

/// Holomorphic contact model on `ℝ^{4n+2}`.
///
/// Coordinates per pair `j` are `(x_{j1}, x_{j2}, y_{j1}, y_{j2})`, followed
/// by `z₁, z₂`:
///
/// ```text
/// λ¹ = dz₁ − Σ (y_{j1} dx_{j1} − y_{j2} dx_{j2})
/// λ² = dz₂ − Σ (y_{j2} dx_{j1} + y_{j1} dx_{j2})
/// ```
///
/// with frame `X_{j1}, X_{j2}, Y_{j1}, Y_{j2}` in that order.
pub fn make_holomorphic_contact_model<T: Scalar>(n: usize) -> AffineCoframeModel<T> {
    assert!(n >= 1, "holomorphic model needs n >= 1");
    let dim = 4 * n + 2;
    let (z1, z2) = (4 * n, 4 * n + 1);
    let one = T::one();

    let mut l1 = AffineCovector {
        constant: vec![T::zero(); dim],
        linear: Matrix::zeros(dim, dim),
    };
    let mut l2 = l1.clone();
    l1.constant[z1] = one;
    l2.constant[z2] = one;

    let mut frame = Vec::with_capacity(4 * n);
    for j in 0..n {
        let (x1, x2, y1, y2) = (4 * j, 4 * j + 1, 4 * j + 2, 4 * j + 3);
        l1.linear[(x1, y1)] = -one;
        l1.linear[(x2, y2)] = one;
        l2.linear[(x1, y2)] = -one;
        l2.linear[(x2, y1)] = -one;

        let mut xj1 = AffineVectorField::coordinate(dim, x1);
        xj1.linear[(z1, y1)] = one;
        xj1.linear[(z2, y2)] = one;
        let mut xj2 = AffineVectorField::coordinate(dim, x2);
        xj2.linear[(z1, y2)] = -one;
        xj2.linear[(z2, y1)] = one;
        frame.extend([
            xj1,
            xj2,
            AffineVectorField::coordinate(dim, y1),
            AffineVectorField::coordinate(dim, y2),
        ]);
    }
    AffineCoframeModel::new(vec![l1, l2], Some(frame), Tolerance::default())
        .expect("holomorphic model is well formed")
}

/// Multiplication by `i` on `D` in the frame basis of the holomorphic model:
/// `X_{j1} ↦ X_{j2}`, `Y_{j1} ↦ Y_{j2}`. It satisfies
/// `dλ¹(u, Jv) = −dλ²(u, v)`.
pub fn holomorphic_complex_structure<T: Scalar>(n: usize) -> Matrix<T> {
    let mut b = Matrix::zeros(4, 4);
    b[(1, 0)] = T::one();
    b[(0, 1)] = -T::one();
    b[(3, 2)] = T::one();
    b[(2, 3)] = -T::one();
    Matrix::block_diag(&vec![b; n])
}

/// Quaternionic Heisenberg model on `ℝ^{4n+3}` with
/// `λ^i = dz_i − Σ_a (K_i x)_a dx_a`, `K_i = −½ J_i`, and frame
/// `F_a = ∂_{x_a} + Σ_i (K_i x)_a ∂_{z_i}`.
///
/// Returns the model and its pointwise triple at the origin (`g = I` in the
/// frame basis).
pub fn make_quaternionic_heisenberg_model<T: Scalar>(
    n: usize,
) -> (AffineCoframeModel<T>, QContTriple<T>) {
    assert!(n >= 1, "quaternionic model needs n >= 1");
    let m = 4 * n;
    let dim = m + 3;
    let units = quaternion_units::<T>();
    let js: [Matrix<T>; 3] = units.map(|u| Matrix::block_diag(&vec![u; n]));
    let half = T::of(0.5);

    let mut lambdas = Vec::with_capacity(3);
    for (i, j) in js.iter().enumerate() {
        let mut l = AffineCovector {
            constant: vec![T::zero(); dim],
            linear: Matrix::zeros(dim, dim),
        };
        l.constant[m + i] = T::one();
        for a in 0..m {
            for b in 0..m {
                // coefficient of dx_a is −(K_i x)_a = ½ (J_i x)_a
                l.linear[(a, b)] = half * j[(a, b)];
            }
        }
        lambdas.push(l);
    }
    let frame = (0..m)
        .map(|a| {
            let mut f = AffineVectorField::coordinate(dim, a);
            for (i, j) in js.iter().enumerate() {
                for b in 0..m {
                    f.linear[(m + i, b)] = -half * j[(a, b)];
                }
            }
            f
        })
        .collect();
    let model = AffineCoframeModel::new(lambdas, Some(frame), Tolerance::default())
        .expect("quaternionic model is well formed");
    let triple = model
        .qcont_at(&vec![T::zero(); dim], &Matrix::identity(m), &js)
        .expect("corank 3");
    (model, triple)
}
