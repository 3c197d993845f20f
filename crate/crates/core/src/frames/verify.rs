//! Frame verification. Deliberately avoids the subspace machinery used by
//! the builders: predicates are read off Gram matrices `FᵀΩF`, and ranks
//! come from a column-pivoted Householder QR rather than the SVD.

use super::{Context, Frame};
use crate::fat2::standard_symplectic;
use crate::linalg::{Matrix, Tolerance};
use crate::report::Report;
use crate::Scalar;

/// Rank from the diagonal of a column-pivoted QR factorization, together
/// with the smallest kept `|R_kk| / |R_00|`.
pub fn pivoted_qr_rank<T: Scalar>(m: &Matrix<T>, tol: &Tolerance<T>) -> (usize, T) {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<T>> = m.columns();
    let steps = rows.min(cols);
    let mut diag = Vec::with_capacity(steps);
    for k in 0..steps {
        // pivot: largest remaining column norm below row k
        let tail_norm = |c: &Vec<T>| c[k..].iter().fold(T::zero(), |s, &x| s + x * x);
        let p = (k..cols)
            .max_by(|&i, &j| tail_norm(&a[i]).partial_cmp(&tail_norm(&a[j])).unwrap())
            .unwrap();
        a.swap(k, p);
        let alpha = tail_norm(&a[k]).sqrt();
        if alpha == T::zero() {
            diag.push(T::zero());
            break;
        }
        let sign = if a[k][k] >= T::zero() { T::one() } else { -T::one() };
        let mut h: Vec<T> = a[k][k..].to_vec();
        h[0] += sign * alpha;
        let hh = h.iter().fold(T::zero(), |s, &x| s + x * x);
        for col in a.iter_mut().skip(k) {
            let proj = h.iter().zip(&col[k..]).fold(T::zero(), |s, (&x, &y)| s + x * y);
            let f = (proj + proj) / hh;
            for (c, &hv) in col[k..].iter_mut().zip(&h) {
                *c -= f * hv;
            }
        }
        diag.push(a[k][k].abs());
    }
    let top = diag.first().copied().unwrap_or_else(T::zero);
    let cut = tol.threshold(top);
    let r = diag.iter().take_while(|&&d| d > cut).count();
    let margin = if r == 0 || top == T::zero() {
        T::zero()
    } else {
        diag[r - 1] / top
    };
    (r, margin)
}

/// Re-derives the regime predicates of `frame` in `ctx`.
pub fn verify_frame<T: Scalar>(frame: &Frame<T>, ctx: Context<'_, T>) -> Report<T> {
    let mut r = Report::new();
    let qcont_ctx = matches!(ctx, Context::Qcont(_));
    r.flag("regime matches context", frame.regime.is_qcont() == qcont_ctx, T::zero());
    r.flag(
        "ambient dimension",
        frame.ambient_dim == ctx.dim(),
        T::of(frame.ambient_dim as f64),
    );
    if !r.pass() {
        return r;
    }
    let tol = ctx.tol();
    let m = frame.len();
    let n = frame.ambient_dim;
    let f = frame.matrix();
    let forms = ctx.forms();

    let (rk, margin) = pivoted_qr_rank(&f, tol);
    r.flag("independent", rk == m, margin);

    let col_norm = frame
        .vectors
        .iter()
        .map(|v| v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt())
        .fold(T::zero(), T::max);
    let form_scale = forms.iter().fold(T::zero(), |acc, w| acc.max(w.max_abs()));
    let lim = tol.threshold(form_scale * col_norm * col_norm * T::of(n as f64));

    for (s, w) in forms.iter().enumerate() {
        let gram = &(&f.transpose() * w) * &f;
        if s == 0 && frame.regime.is_isocontact() {
            let even = m.is_multiple_of(2);
            r.flag("even length", even, T::of(m as f64));
            if even {
                let target = standard_symplectic::<T>(m / 2);
                r.bound("omega1 symplectic basis", (&gram - &target).max_abs(), lim);
            }
        } else {
            r.bound(format!("omega{} isotropic", s + 1), gram.max_abs(), lim);
        }
    }

    if m > 0 {
        let ft = f.transpose();
        let mut stacked = &ft * forms[0];
        for w in &forms[1..] {
            stacked = stacked.vstack(&(&ft * *w)).expect("same width");
        }
        let (rk, margin) = pivoted_qr_rank(&stacked, tol);
        r.flag("regular", rk == forms.len() * m, margin);
    }
    r
}
