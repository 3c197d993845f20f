//! Triangular solver for the symmetric-tensor affine system of the jet
//! lifting step.
//!
//! Unknowns are vectors `Q(∂_I) ∈ ℝⁿ` indexed by nondecreasing multi-indices
//! `I` of a fixed length over `1..=k+1`. Equations:
//!
//! ```text
//! λ · Q(∂_I) = rhs(Λ, I)
//! R_a · Q(∂_{J+b}) − R_b · Q(∂_{J+a}) = rhs(J, a, b)        a < b
//! ```
//!
//! where `R_a` has rows `p1_aᵀ dλ^s` (the covectors `ι_{P₁(∂_a)} dλ^s`).
//! Since `J + a ≺ J + b`, solving in lexicographic order leaves one
//! full-rank block per index.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{mismatch, Error, Result};
use crate::linalg::{check_skew, min_norm_solve, norm, rank, svd, Matrix, Tolerance};
use crate::Scalar;

/// Largest number of scalar unknowns `assemble_dense` will stack.
pub const DENSE_LIMIT: usize = 5000;

/// Per-equation residual bound after each triangular step.
const STEP_RESIDUAL: f64 = 1e-9;

/// Nondecreasing tuple of 1-based coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.contains(&0) {
            return Err(mismatch("multi-index entries are 1-based"));
        }
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(mismatch(format!("multi-index {entries:?} is not nondecreasing")));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self + a`, kept sorted.
    pub fn with(&self, a: usize) -> Self {
        let mut v = self.0.clone();
        let pos = v.partition_point(|&x| x <= a);
        v.insert(pos, a);
        Self(v)
    }

    /// Removes one occurrence of `b`.
    pub fn without(&self, b: usize) -> Option<Self> {
        let pos = self.0.iter().position(|&x| x == b)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(Self(v))
    }

    /// Distinct entries in increasing order.
    pub fn distinct(&self) -> Vec<usize> {
        let mut v = self.0.clone();
        v.dedup();
        v
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All nondecreasing multi-indices of length `len` over `1..=k1`, in
/// lexicographic order.
pub fn multi_indices(k1: usize, len: usize) -> Vec<MultiIndex> {
    fn rec(k1: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if cur.len() == len {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for i in start..=k1 {
            cur.push(i);
            rec(k1, len, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k1 > 0 {
        rec(k1, len, 1, &mut Vec::with_capacity(len), &mut out);
    }
    out
}

/// Identifies one block equation of the system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EqTag {
    Lambda(MultiIndex),
    Coupling { j: MultiIndex, a: usize, b: usize },
}

impl fmt::Display for EqTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EqTag::Lambda(i) => write!(f, "lambda{i}"),
            EqTag::Coupling { j, a, b } => write!(f, "coupling{j}[{a},{b}]"),
        }
    }
}

/// Supplies the right-hand side (a vector of length `p`) of each equation.
pub trait RhsProvider<T> {
    fn rhs(&self, tag: &EqTag) -> Vec<T>;
}

impl<T, F: Fn(&EqTag) -> Vec<T>> RhsProvider<T> for F {
    fn rhs(&self, tag: &EqTag) -> Vec<T> {
        self(tag)
    }
}

/// Explicit table; missing tags read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsTable<T> {
    p: usize,
    entries: BTreeMap<EqTag, Vec<T>>,
}

impl<T: Scalar> RhsTable<T> {
    pub fn zeros(p: usize) -> Self {
        Self {
            p,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, tag: EqTag, value: Vec<T>) -> Result<()> {
        if value.len() != self.p {
            return Err(mismatch(format!(
                "rhs for {tag} has length {}, expected {}",
                value.len(),
                self.p
            )));
        }
        Matrix::new(1, self.p, value.clone())?;
        self.entries.insert(tag, value);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EqTag, &Vec<T>)> {
        self.entries.iter()
    }

    /// Right-hand sides for which `q` is an exact solution.
    pub fn manufactured(sys: &SymTensorSystem<T>, q: &SymTensor<T>) -> Result<Self> {
        let mut t = Self::zeros(sys.p);
        for tag in sys.equations() {
            let v = sys.apply(&tag, q)?;
            t.insert(tag, v)?;
        }
        Ok(t)
    }
}

impl<T: Scalar> RhsProvider<T> for RhsTable<T> {
    fn rhs(&self, tag: &EqTag) -> Vec<T> {
        self.entries
            .get(tag)
            .cloned()
            .unwrap_or_else(|| vec![T::zero(); self.p])
    }
}

/// Values `Q(∂_I)` for every multi-index of the system's length.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<T> {
    pub values: BTreeMap<MultiIndex, Vec<T>>,
}

impl<T: Scalar> SymTensor<T> {
    pub fn get(&self, i: &MultiIndex) -> Option<&[T]> {
        self.values.get(i).map(Vec::as_slice)
    }

    pub fn max_abs(&self) -> T {
        self.values
            .values()
            .flatten()
            .fold(T::zero(), |a, &x| a.max(x.abs()))
    }

    /// Concatenation in lexicographic index order.
    pub fn flatten(&self) -> Vec<T> {
        self.values.values().flatten().copied().collect()
    }
}

#[derive(Debug, Clone)]
pub struct SymTensorSystem<T> {
    k1: usize,
    n: usize,
    p: usize,
    order: usize,
    lambda: Matrix<T>,
    dlambdas: Vec<Matrix<T>>,
    p1: Matrix<T>,
    tol: Tolerance<T>,
}

impl<T: Scalar> SymTensorSystem<T> {
    /// `order = α + 2` is the tensor length.
    pub fn new(
        lambda: Matrix<T>,
        dlambdas: Vec<Matrix<T>>,
        p1: Matrix<T>,
        order: usize,
        tol: Tolerance<T>,
    ) -> Result<Self> {
        let (p, n) = lambda.shape();
        if dlambdas.len() != p {
            return Err(mismatch(format!("{} curvature forms for {p} 1-forms", dlambdas.len())));
        }
        for (s, w) in dlambdas.iter().enumerate() {
            if w.shape() != (n, n) {
                return Err(mismatch(format!("dlambda{} has shape {:?}", s + 1, w.shape())));
            }
            check_skew(w, &tol, &format!("dlambda{}", s + 1))?;
        }
        if p1.rows() != n {
            return Err(mismatch(format!("p1 has {} rows, ambient dimension is {n}", p1.rows())));
        }
        if order < 1 {
            return Err(mismatch("tensor length must be positive"));
        }
        if rank(&lambda, &tol)? != p {
            return Err(Error::Precondition("lambda does not have full rank".into()));
        }
        Ok(Self {
            k1: p1.cols(),
            n,
            p,
            order,
            lambda,
            dlambdas,
            p1,
            tol,
        })
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lambda(&self) -> &Matrix<T> {
        &self.lambda
    }

    pub fn dlambdas(&self) -> &[Matrix<T>] {
        &self.dlambdas
    }

    pub fn p1(&self) -> &Matrix<T> {
        &self.p1
    }

    pub fn tol(&self) -> &Tolerance<T> {
        &self.tol
    }

    pub fn indices(&self) -> Vec<MultiIndex> {
        multi_indices(self.k1, self.order)
    }

    /// Every equation, grouped by the index it determines, in solve order.
    pub fn equations(&self) -> Vec<EqTag> {
        self.indices()
            .into_iter()
            .flat_map(|i| self.equations_for(&i))
            .collect()
    }

    fn equations_for(&self, i: &MultiIndex) -> Vec<EqTag> {
        let mut tags = vec![EqTag::Lambda(i.clone())];
        for b in i.distinct() {
            let j = i.without(b).expect("b occurs in I");
            for a in 1..b {
                tags.push(EqTag::Coupling { j: j.clone(), a, b });
            }
        }
        tags
    }

    /// `R_a`: rows `(ι_{P₁(∂_a)} dλ^s)`, 1-based `a`.
    pub fn coupling_rows(&self, a: usize) -> Matrix<T> {
        let v = self.p1.column(a - 1);
        let rows: Vec<Vec<T>> = self
            .dlambdas
            .iter()
            .map(|w| w.transpose().mul_vec(&v))
            .collect();
        Matrix::from_rows(&rows).expect("equal lengths")
    }

    /// Left-hand side of one equation evaluated on `q`.
    pub fn apply(&self, tag: &EqTag, q: &SymTensor<T>) -> Result<Vec<T>> {
        let get = |i: &MultiIndex| {
            q.get(i)
                .ok_or_else(|| mismatch(format!("tensor has no value at {i}")))
        };
        match tag {
            EqTag::Lambda(i) => Ok(self.lambda.mul_vec(get(i)?)),
            EqTag::Coupling { j, a, b } => {
                let lhs = self.coupling_rows(*a).mul_vec(get(&j.with(*b))?);
                let rhs = self.coupling_rows(*b).mul_vec(get(&j.with(*a))?);
                Ok(lhs.iter().zip(&rhs).map(|(&x, &y)| x - y).collect())
            }
        }
    }

    /// `[λ; R_1; …; R_{k+1}]` has rank `p(k+2)`, i.e. `im p1` is regular.
    pub fn fullrank_check(&self) -> Result<bool> {
        let mut m = self.lambda.clone();
        for a in 1..=self.k1 {
            m = m.vstack(&self.coupling_rows(a))?;
        }
        Ok(rank(&m, &self.tol)? == self.p * (self.k1 + 1))
    }

    /// Coefficients of `Q(∂_I)` in the equations solved at step `I`:
    /// `λ` followed by `R_a` for every coupling `(J, a, b)` with `J + b = I`.
    pub fn step_block(&self, i: &MultiIndex) -> Result<Matrix<T>> {
        let blocks: Vec<Matrix<T>> = self
            .equations_for(i)
            .iter()
            .map(|tag| match tag {
                EqTag::Lambda(_) => self.lambda.clone(),
                EqTag::Coupling { a, .. } => self.coupling_rows(*a),
            })
            .collect();
        stack(&blocks)
    }

    /// Solves index by index in lexicographic order with minimum-norm
    /// completion of each step.
    pub fn triangular_solve(&self, rhs: &impl RhsProvider<T>) -> Result<SymTensor<T>> {
        if !self.fullrank_check()? {
            return Err(Error::NotRegular(
                "stacked covectors of lambda and p1 are dependent".into(),
            ));
        }
        let mut values: BTreeMap<MultiIndex, Vec<T>> = BTreeMap::new();
        for i in self.indices() {
            let mut blocks: Vec<Matrix<T>> = Vec::new();
            let mut b_vec: Vec<T> = Vec::new();
            for tag in self.equations_for(&i) {
                let r = self.rhs_checked(rhs, &tag)?;
                match &tag {
                    EqTag::Lambda(_) => {
                        blocks.push(self.lambda.clone());
                        b_vec.extend(r);
                    }
                    EqTag::Coupling { j, a, b } => {
                        let known = j.with(*a);
                        if known >= i {
                            return Err(Error::InternalInconsistency(format!(
                                "step {i} reads {known}, which is not earlier"
                            )));
                        }
                        let qk = values.get(&known).ok_or_else(|| {
                            Error::InternalInconsistency(format!("step {i} reads unsolved {known}"))
                        })?;
                        let carry = self.coupling_rows(*b).mul_vec(qk);
                        blocks.push(self.coupling_rows(*a));
                        b_vec.extend(r.iter().zip(&carry).map(|(&x, &y)| x + y));
                    }
                }
            }
            let m = stack(&blocks)?;
            let q = min_norm_solve(&m, &b_vec, &self.tol)?;
            let res: Vec<T> = m.mul_vec(&q).iter().zip(&b_vec).map(|(&x, &y)| x - y).collect();
            let scaled = norm(&res) / (T::one() + norm(&b_vec));
            if scaled > T::of(STEP_RESIDUAL) {
                return Err(Error::NumericFailure(format!(
                    "step {i} leaves residual {scaled:e}; repeated coupling covectors \
                     need compatible right-hand sides"
                )));
            }
            values.insert(i, q);
        }
        Ok(SymTensor { values })
    }

    fn rhs_checked(&self, rhs: &impl RhsProvider<T>, tag: &EqTag) -> Result<Vec<T>> {
        let r = rhs.rhs(tag);
        if r.len() != self.p {
            return Err(mismatch(format!("rhs for {tag} has length {}", r.len())));
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(r)
    }

    /// Largest scaled residual `|lhs − rhs| / (1 + |rhs|)` over all equations.
    pub fn residual(&self, rhs: &impl RhsProvider<T>, q: &SymTensor<T>) -> Result<T> {
        let mut worst = T::zero();
        for tag in self.equations() {
            let r = self.rhs_checked(rhs, &tag)?;
            let lhs = self.apply(&tag, q)?;
            let d: Vec<T> = lhs.iter().zip(&r).map(|(&x, &y)| x - y).collect();
            worst = worst.max(norm(&d) / (T::one() + norm(&r)));
        }
        Ok(worst)
    }

    /// The whole system as one matrix over all unknowns, columns ordered by
    /// index then coordinate.
    pub fn assemble_dense(&self, rhs: &impl RhsProvider<T>) -> Result<(Matrix<T>, Vec<T>)> {
        let idx = self.indices();
        let unknowns = idx.len() * self.n;
        if unknowns > DENSE_LIMIT {
            return Err(Error::Size {
                unknowns,
                limit: DENSE_LIMIT,
            });
        }
        let pos: BTreeMap<&MultiIndex, usize> = idx.iter().enumerate().map(|(k, i)| (i, k)).collect();
        let tags = self.equations();
        let mut m = Matrix::zeros(tags.len() * self.p, unknowns);
        let mut b = Vec::with_capacity(tags.len() * self.p);
        let n = self.n;
        let place = |m: &mut Matrix<T>, row0: usize, blk: &Matrix<T>, col_block: usize, sign: T| {
            for r in 0..blk.rows() {
                for c in 0..n {
                    m[(row0 + r, col_block * n + c)] += sign * blk[(r, c)];
                }
            }
        };
        for (e, tag) in tags.iter().enumerate() {
            let row0 = e * self.p;
            match tag {
                EqTag::Lambda(i) => place(&mut m, row0, &self.lambda, pos[i], T::one()),
                EqTag::Coupling { j, a, b: bb } => {
                    place(&mut m, row0, &self.coupling_rows(*a), pos[&j.with(*bb)], T::one());
                    place(&mut m, row0, &self.coupling_rows(*bb), pos[&j.with(*a)], -T::one());
                }
            }
            b.extend(self.rhs_checked(rhs, tag)?);
        }
        Ok((m, b))
    }

    /// Compares a solution with the dense minimum-norm least-squares
    /// solution: both must satisfy the system, and `q` projected onto the
    /// row space of the dense matrix must equal the dense solution.
    pub fn dense_oracle(&self, rhs: &impl RhsProvider<T>, q: &SymTensor<T>) -> Result<OracleReport<T>> {
        let (m, b) = self.assemble_dense(rhs)?;
        let x_dense = min_norm_solve(&m, &b, &self.tol)?;
        let res: Vec<T> = m.mul_vec(&x_dense).iter().zip(&b).map(|(&x, &y)| x - y).collect();
        let dense_residual = norm(&res) / (T::one() + norm(&b));

        let d = svd(&m.transpose())?;
        let r = rank(&m, &self.tol)?;
        let x_tri = q.flatten();
        // row space of M = column space of Mᵀ = span of the first r columns of U(Mᵀ)
        let mut proj = vec![T::zero(); x_tri.len()];
        for k in 0..r {
            let uk = d.u.column(k);
            let c = crate::linalg::dot(&uk, &x_tri);
            for (pi, &ui) in proj.iter_mut().zip(&uk) {
                *pi += c * ui;
            }
        }
        let max_diff = proj
            .iter()
            .zip(&x_dense)
            .fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()));
        Ok(OracleReport {
            equations: m.rows(),
            unknowns: m.cols(),
            rank: r,
            dense_residual,
            max_diff,
        })
    }
}

fn stack<T: Scalar>(blocks: &[Matrix<T>]) -> Result<Matrix<T>> {
    let mut m = blocks[0].clone();
    for blk in &blocks[1..] {
        m = m.vstack(blk)?;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport<T> {
    pub equations: usize,
    pub unknowns: usize,
    pub rank: usize,
    pub dense_residual: T,
    /// Largest entrywise gap between the projected triangular solution and
    /// the dense minimum-norm solution.
    pub max_diff: T,
}
