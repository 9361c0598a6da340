//! Dense complex linear algebra kernel.
//!
//! Everything upstream is built from two values: [`Operator`], a finite square
//! complex matrix, and [`OperatorSubspace`], a linear subspace of operators
//! carried by an orthonormal basis under the Hilbert–Schmidt pairing
//! `<a,b> = tr(b* a)`. Rank decisions are always made by SVD against an
//! explicit relative tolerance; nothing here keeps ambient state.

use crate::error::{Error, Result};
use nalgebra::{Complex, DMatrix, DVector};

pub type Cplx = Complex<f64>;
pub type CMatrix = DMatrix<Cplx>;
pub type CVector = DVector<Cplx>;

/// Default relative rank tolerance, measured against the largest singular
/// value involved in each decision.
pub const DEFAULT_TOL: f64 = 1e-9;

pub fn cplx(re: f64, im: f64) -> Cplx {
    Complex::new(re, im)
}

/// A bounded operator on `C^dim`: a dense `dim x dim` complex matrix with
/// finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    mat: CMatrix,
}

impl Operator {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        for row in 0..mat.nrows() {
            for col in 0..mat.ncols() {
                let z = mat[(row, col)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFiniteEntry { row, col });
                }
            }
        }
        Ok(Self {
            dim: mat.nrows(),
            mat,
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::identity(dim, dim),
        }
    }

    /// The matrix unit `e_{rc}` taking the `c`-th basis vector to the `r`-th.
    pub fn matrix_unit(dim: usize, r: usize, c: usize) -> Self {
        let mut mat = CMatrix::zeros(dim, dim);
        mat[(r, c)] = cplx(1.0, 0.0);
        Self { dim, mat }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Cplx) -> Self {
        Self {
            dim,
            mat: CMatrix::from_fn(dim, dim, |r, c| f(r, c)),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut mat = CMatrix::zeros(dim, dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            for (c, &x) in row.iter().enumerate() {
                mat[(r, c)] = cplx(x, 0.0);
            }
        }
        Operator::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn entry(&self, r: usize, c: usize) -> Cplx {
        self.mat[(r, c)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            mat: self.mat.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            mat: &self.mat - &other.mat,
        })
    }

    pub fn scale(&self, c: Cplx) -> Self {
        Self {
            dim: self.dim,
            mat: &self.mat * c,
        }
    }

    pub fn trace(&self) -> Cplx {
        self.mat.trace()
    }

    /// Hilbert–Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.mat * v
    }

    /// Column-major vectorization, length `dim^2`.
    pub fn vectorize(&self) -> CVector {
        CVector::from_column_slice(self.mat.as_slice())
    }

    pub fn from_vectorized(dim: usize, v: &CVector) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: v.len(),
            });
        }
        Operator::new(CMatrix::from_column_slice(dim, dim, v.as_slice()))
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        (&self.mat - self.mat.adjoint()).norm() <= tol * (1.0 + self.mat.norm())
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        let scale = 1.0 + self.mat.norm();
        let idem = (&self.mat * &self.mat - &self.mat).norm();
        let herm = (&self.mat - self.mat.adjoint()).norm();
        idem <= tol * scale && herm <= tol * scale
    }

    pub fn commutes_with(&self, other: &Self, tol: f64) -> bool {
        let scale = 1.0 + self.mat.norm() * other.mat.norm();
        (&self.mat * &other.mat - &other.mat * &self.mat).norm() <= tol * scale
    }

    /// `1 - p`, intended for projections.
    pub fn complement(&self) -> Self {
        Self {
            dim: self.dim,
            mat: CMatrix::identity(self.dim, self.dim) - &self.mat,
        }
    }

    /// Kronecker product, acting on `C^{dim * other.dim}`.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            dim: self.dim * other.dim,
            mat: self.mat.kronecker(&other.mat),
        }
    }
}

/// `<a,b> = tr(b* a)`, the Hilbert–Schmidt inner product.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<Cplx> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut acc = cplx(0.0, 0.0);
    for c in 0..a.dim() {
        for r in 0..a.dim() {
            acc += a.mat[(r, c)] * b.mat[(r, c)].conj();
        }
    }
    Ok(acc)
}

/// Largest singular value, via the largest eigenvalue of `a* a`.
pub fn operator_norm(a: &Operator) -> f64 {
    if a.dim() == 0 {
        return 0.0;
    }
    let gram = a.mat.adjoint() * &a.mat;
    let se = nalgebra::SymmetricEigen::new(gram);
    se.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v)).sqrt()
}

/// A linear subspace of operators on `C^ambient_dim`, carried by a basis that
/// is orthonormal under the Hilbert–Schmidt pairing (within `tol`).
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    ambient_dim: usize,
    basis: Vec<Operator>,
    tol: f64,
}

impl OperatorSubspace {
    pub fn zero(ambient_dim: usize, tol: f64) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
            tol,
        }
    }

    /// All of `B(C^n)`, spanned by the matrix units.
    pub fn full(ambient_dim: usize, tol: f64) -> Self {
        let mut basis = Vec::with_capacity(ambient_dim * ambient_dim);
        for c in 0..ambient_dim {
            for r in 0..ambient_dim {
                basis.push(Operator::matrix_unit(ambient_dim, r, c));
            }
        }
        Self {
            ambient_dim,
            basis,
            tol,
        }
    }

    /// Wraps a basis that is already known to be orthonormal (checked).
    pub fn from_orthonormal_basis(
        ambient_dim: usize,
        basis: Vec<Operator>,
        tol: f64,
    ) -> Result<Self> {
        for (i, a) in basis.iter().enumerate() {
            if a.dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: a.dim(),
                });
            }
            for (j, b) in basis.iter().enumerate() {
                let g = hs_inner(a, b)?;
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - cplx(want, 0.0)).norm() > tol.max(1e-12) * 10.0 {
                    return Err(Error::Precondition(format!(
                        "basis not orthonormal: gram[{i}][{j}] = {g}"
                    )));
                }
            }
        }
        Ok(Self {
            ambient_dim,
            basis,
            tol,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn basis(&self) -> &[Operator] {
        &self.basis
    }

    /// Basis elements as columns of an `n^2 x dim` matrix.
    pub fn basis_matrix(&self) -> CMatrix {
        let n2 = self.ambient_dim * self.ambient_dim;
        let mut m = CMatrix::zeros(n2, self.basis.len());
        for (j, b) in self.basis.iter().enumerate() {
            m.set_column(j, &b.vectorize());
        }
        m
    }

    /// Orthogonal projection of `a` onto the subspace.
    pub fn project(&self, a: &Operator) -> Result<Operator> {
        if a.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: a.dim(),
            });
        }
        let mut out = Operator::zeros(self.ambient_dim);
        for b in &self.basis {
            let c = hs_inner(a, b)?;
            out = out.add(&b.scale(c))?;
        }
        Ok(out)
    }

    /// Whether `a` lies in the subspace: the defect `||a - P(a)||` must be at
    /// most `tol * ||a||`. The zero operator is always contained.
    pub fn contains(&self, a: &Operator) -> Result<bool> {
        let norm = a.hs_norm();
        if norm == 0.0 {
            return Ok(true);
        }
        let defect = a.sub(&self.project(a)?)?.hs_norm();
        Ok(defect <= self.tol * norm)
    }

    pub fn contains_subspace(&self, other: &OperatorSubspace) -> Result<bool> {
        for b in &other.basis {
            if !self.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equality as subspaces: same dimension and mutual containment.
    pub fn equals(&self, other: &OperatorSubspace) -> Result<bool> {
        Ok(self.dim() == other.dim()
            && self.contains_subspace(other)?
            && other.contains_subspace(self)?)
    }

    /// Span of the union of the bases.
    pub fn sum(&self, other: &OperatorSubspace) -> Result<OperatorSubspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        let mut all: Vec<Operator> = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        orthonormalize_with_dim(&all, self.ambient_dim, self.tol)
    }

    /// Span of all pairwise products `a * b`.
    pub fn product_span(&self, other: &OperatorSubspace) -> Result<OperatorSubspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        let mut prods = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.basis {
            for b in &other.basis {
                prods.push(a.mul(b)?);
            }
        }
        orthonormalize_with_dim(&prods, self.ambient_dim, self.tol)
    }

    /// Span of the adjoints of the basis.
    pub fn adjoint_space(&self) -> Result<OperatorSubspace> {
        let adj: Vec<Operator> = self.basis.iter().map(Operator::adjoint).collect();
        orthonormalize_with_dim(&adj, self.ambient_dim, self.tol)
    }

    /// Intersection, computed from the overlap gram `C = B_w^* B_v`: a
    /// combination `B_v x` lies in the other space exactly when
    /// `x` is in the nullspace of `I - C^* C`.
    pub fn intersect(&self, other: &OperatorSubspace) -> Result<OperatorSubspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(OperatorSubspace::zero(self.ambient_dim, self.tol));
        }
        let bv = self.basis_matrix();
        let bw = other.basis_matrix();
        let c = bw.adjoint() * &bv;
        let k = self.dim();
        let m = CMatrix::identity(k, k) - c.adjoint() * &c;
        let null = matrix_nullspace(&m, self.tol);
        let mut ops = Vec::with_capacity(null.ncols());
        for j in 0..null.ncols() {
            let v = &bv * null.column(j).clone_owned();
            ops.push(Operator::from_vectorized(self.ambient_dim, &v)?);
        }
        orthonormalize_with_dim(&ops, self.ambient_dim, self.tol)
    }
}

/// SVD-based orthonormalization. The span is preserved within `tol`; zero
/// vectors and linear dependents are dropped (singular values below
/// `tol * largest` are discarded).
pub fn orthonormalize(vectors: &[Operator], tol: f64) -> Result<OperatorSubspace> {
    let dim = match vectors.first() {
        Some(v) => v.dim(),
        None => return Ok(OperatorSubspace::zero(0, tol)),
    };
    orthonormalize_with_dim(vectors, dim, tol)
}

pub fn orthonormalize_with_dim(
    vectors: &[Operator],
    ambient_dim: usize,
    tol: f64,
) -> Result<OperatorSubspace> {
    for v in vectors {
        if v.dim() != ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: v.dim(),
            });
        }
    }
    if vectors.is_empty() {
        return Ok(OperatorSubspace::zero(ambient_dim, tol));
    }
    let n2 = ambient_dim * ambient_dim;
    let mut stacked = CMatrix::zeros(n2, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        stacked.set_column(j, &v.vectorize());
    }
    let cols = orthonormal_column_span(&stacked, tol);
    let mut basis = Vec::with_capacity(cols.ncols());
    for j in 0..cols.ncols() {
        basis.push(Operator::from_vectorized(
            ambient_dim,
            &cols.column(j).clone_owned(),
        )?);
    }
    Ok(OperatorSubspace {
        ambient_dim,
        basis,
        tol,
    })
}

/// One-sided Jacobi orthogonalization: rotates column pairs until they are
/// mutually orthogonal. On exit the columns are the left singular vectors
/// scaled by their singular values. Used instead of a bidiagonalization SVD
/// because clustered singular values must not contaminate the returned span.
fn jacobi_orthogonalize_columns(w: &mut CMatrix) {
    let k = w.ncols();
    let rows = w.nrows();
    let eps = 1e-14;
    for _sweep in 0..60 {
        // Columns whose remaining mass is roundoff relative to the largest
        // column are done; rotating them against each other never converges.
        let max_norm = (0..k).map(|j| w.column(j).norm()).fold(0.0f64, f64::max);
        let dead = (1e-14 * max_norm).powi(2);
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = cplx(0.0, 0.0);
                for i in 0..rows {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                if app <= dead || aqq <= dead {
                    continue;
                }
                let scale = app.sqrt() * aqq.sqrt();
                if scale == 0.0 || apq.norm() <= eps * scale {
                    continue;
                }
                rotated = true;
                // Absorb the phase of the gram entry into column q, then a
                // real Jacobi rotation annihilates it.
                let g = apq.norm();
                let phase = apq / cplx(g, 0.0);
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cc = cplx(c, 0.0);
                let sc = cplx(s, 0.0);
                for i in 0..rows {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)] * phase.conj();
                    w[(i, p)] = wp * cc - wq * sc;
                    w[(i, q)] = wp * sc + wq * cc;
                }
            }
        }
        if !rotated {
            return;
        }
    }
}

/// Orthonormal basis for the column span of `m`, singular values below
/// `tol * largest` discarded. Wide inputs are folded in chunks: the kept
/// basis is restacked with the next block of columns, which preserves the
/// span while keeping each orthogonalization near-square.
pub fn orthonormal_column_span(m: &CMatrix, tol: f64) -> CMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let cap = (2 * rows).max(64);
    let mut basis = CMatrix::zeros(rows, 0);
    let mut col = 0;
    while col < m.ncols() {
        let take = cap.min(m.ncols() - col);
        let mut stack = CMatrix::zeros(rows, basis.ncols() + take);
        stack
            .view_mut((0, 0), (rows, basis.ncols()))
            .copy_from(&basis);
        stack
            .view_mut((0, basis.ncols()), (rows, take))
            .copy_from(&m.view((0, col), (rows, take)));
        basis = jacobi_column_span_once(&mut stack, tol);
        col += take;
    }
    basis
}

fn jacobi_column_span_once(stack: &mut CMatrix, tol: f64) -> CMatrix {
    jacobi_orthogonalize_columns(stack);
    let mut norms: Vec<(usize, f64)> = (0..stack.ncols())
        .map(|j| (j, stack.column(j).norm()))
        .collect();
    norms.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let smax = norms.first().map(|x| x.1).unwrap_or(0.0);
    // Inputs are O(1)-scaled operators; columns whose whole mass sits below
    // tol are roundoff of the zero subspace.
    if smax <= tol {
        return CMatrix::zeros(stack.nrows(), 0);
    }
    let kept: Vec<usize> = norms
        .iter()
        .filter(|&&(_, s)| s >= tol * smax)
        .map(|&(j, _)| j)
        .collect();
    let mut out = CMatrix::zeros(stack.nrows(), kept.len());
    for (i, &j) in kept.iter().enumerate() {
        let norm = stack.column(j).norm();
        out.set_column(i, &(stack.column(j) / cplx(norm, 0.0)));
    }
    out
}

/// Singular values of `m` in descending order, via the Jacobi kernel.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Vec::new();
    }
    let mut w = m.clone();
    jacobi_orthogonalize_columns(&mut w);
    let mut sv: Vec<f64> = (0..w.ncols()).map(|j| w.column(j).norm()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Orthonormal basis of the nullspace of `m`, returned as columns. The
/// nullspace is the orthogonal complement of the row space, so it is read
/// off as the column span of `I - R R*` where `R` carries the row space
/// (the Jacobi span of `m*`). A map whose largest singular value is below
/// tol counts as the zero map: the inputs are built from O(1)-normalized
/// operators, so everything is null then.
pub fn matrix_nullspace(m: &CMatrix, tol: f64) -> CMatrix {
    let ncols = m.ncols();
    if ncols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMatrix::identity(ncols, ncols);
    }
    let row_space = orthonormal_column_span(&m.adjoint(), tol);
    if row_space.ncols() == 0 {
        return CMatrix::identity(ncols, ncols);
    }
    let complement = CMatrix::identity(ncols, ncols) - &row_space * row_space.adjoint();
    // The complement projector has eigenvalues 0 and 1; the span cutoff at
    // 0.5 separates them cleanly.
    orthonormal_column_span(&complement, 0.5)
}

/// Solves `{a : C_i vec(a) = 0 for all i}` on operators over `C^ambient_dim`.
/// Each constraint is a matrix acting on column-major vectorized operators.
/// An empty constraint list yields the full operator space.
pub fn nullspace_of_constraints(
    constraints: &[CMatrix],
    ambient_dim: usize,
    tol: f64,
) -> Result<OperatorSubspace> {
    let n2 = ambient_dim * ambient_dim;
    if constraints.is_empty() {
        return Ok(OperatorSubspace::full(ambient_dim, tol));
    }
    let total_rows: usize = constraints.iter().map(|c| c.nrows()).sum();
    let mut stacked = CMatrix::zeros(total_rows, n2);
    let mut row = 0;
    for c in constraints {
        if c.ncols() != n2 {
            return Err(Error::DimensionMismatch {
                expected: n2,
                found: c.ncols(),
            });
        }
        stacked.view_mut((row, 0), (c.nrows(), n2)).copy_from(c);
        row += c.nrows();
    }
    let null = matrix_nullspace(&stacked, tol);
    let mut basis = Vec::with_capacity(null.ncols());
    for j in 0..null.ncols() {
        basis.push(Operator::from_vectorized(
            ambient_dim,
            &null.column(j).clone_owned(),
        )?);
    }
    Ok(OperatorSubspace {
        ambient_dim,
        basis,
        tol,
    })
}

/// Builds the constraint matrix of a linear map on operators by applying the
/// map to every matrix unit.
pub fn constraint_from_linear_map(
    ambient_dim: usize,
    f: impl Fn(&Operator) -> Operator,
) -> CMatrix {
    let n2 = ambient_dim * ambient_dim;
    let mut m = CMatrix::zeros(n2, n2);
    let mut j = 0;
    for c in 0..ambient_dim {
        for r in 0..ambient_dim {
            let unit = Operator::matrix_unit(ambient_dim, r, c);
            m.set_column(j, &f(&unit).vectorize());
            j += 1;
        }
    }
    m
}

/// Orthogonal projection onto the span of the given columns.
pub fn projection_onto_column_span(columns: &CMatrix, tol: f64) -> CMatrix {
    let q = orthonormal_column_span(columns, tol);
    &q * q.adjoint()
}

/// Orthogonal projection onto the range of `a` (`p a = a`, `p^2 = p = p*`).
pub fn range_projection(a: &Operator, tol: f64) -> Operator {
    let p = projection_onto_column_span(a.matrix(), tol);
    Operator {
        dim: a.dim(),
        mat: p,
    }
}

/// Orthogonal projection onto the sum of the ranges of the given projections.
/// The range of a sum of positive operators is the sum of the ranges.
pub fn join_of_projections(ps: &[Operator], dim: usize, tol: f64) -> Result<Operator> {
    let mut sum = Operator::zeros(dim);
    for p in ps {
        if !p.is_projection(tol.max(1e-7)) {
            let defect = p.mul(p)?.sub(p)?.hs_norm();
            return Err(Error::NotAProjection { defect, tol });
        }
        sum = sum.add(p)?;
    }
    Ok(range_projection(&sum, tol))
}

/// Rank of `a` at the given relative tolerance.
pub fn rank(a: &Operator, tol: f64) -> usize {
    if a.dim() == 0 {
        return 0;
    }
    let sv = singular_values(&a.mat);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax <= tol {
        return 0;
    }
    sv.iter().filter(|&&s| s >= tol * smax).count()
}

/// Eigendecomposition of a self-adjoint operator: `(eigenvalues, vectors)`
/// with real eigenvalues in ascending order.
pub fn hermitian_eigen(a: &Operator) -> (Vec<f64>, CMatrix) {
    let se = nalgebra::SymmetricEigen::new(a.mat.clone());
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(a.dim, a.dim);
    for (j, &i) in idx.iter().enumerate() {
        vecs.set_column(j, &se.eigenvectors.column(i).clone_owned());
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn op2(entries: [[f64; 2]; 2]) -> Operator {
        Operator::from_real_rows(&[entries[0].to_vec(), entries[1].to_vec()]).unwrap()
    }

    #[test]
    fn hs_inner_identity_is_dimension() {
        let one = Operator::identity(2);
        assert_eq!(hs_inner(&one, &one).unwrap(), cplx(2.0, 0.0));
    }

    #[test]
    fn hs_inner_matrix_units() {
        let e12 = Operator::matrix_unit(2, 0, 1);
        let e21 = Operator::matrix_unit(2, 1, 0);
        assert_eq!(hs_inner(&e12, &e12).unwrap(), cplx(1.0, 0.0));
        assert_eq!(hs_inner(&e12, &e21).unwrap(), cplx(0.0, 0.0));
    }

    #[test]
    fn hs_inner_rejects_dim_mismatch() {
        let a = Operator::identity(2);
        let b = Operator::identity(3);
        assert!(hs_inner(&a, &b).is_err());
    }

    #[test]
    fn orthonormalize_drops_dependents() {
        let one = Operator::identity(2);
        let two = one.scale(cplx(2.0, 0.0));
        let v = orthonormalize(&[one, two], DEFAULT_TOL).unwrap();
        assert_eq!(v.dim(), 1);
    }

    #[test]
    fn orthonormalize_full_matrix_units() {
        let units: Vec<Operator> = (0..2)
            .flat_map(|r| (0..2).map(move |c| Operator::matrix_unit(2, r, c)))
            .collect();
        let v = orthonormalize(&units, DEFAULT_TOL).unwrap();
        assert_eq!(v.dim(), 4);
    }

    #[test]
    fn orthonormalize_random_fills_space() {
        // 50 pseudo-random 3x3 matrices span all of M_3; the rank oracle is
        // Gaussian elimination with partial pivoting on the stacked columns,
        // independent of the SVD route.
        let mut state = 0x12345678u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / ((1u64 << 31) as f64) - 1.0
        };
        let ops: Vec<Operator> = (0..50)
            .map(|_| Operator::from_fn(3, |_, _| cplx(next(), next())))
            .collect();
        let v = orthonormalize(&ops, DEFAULT_TOL).unwrap();
        assert_eq!(v.dim(), gaussian_rank_oracle(&ops, 1e-9));
        assert_eq!(v.dim(), 9);
    }

    fn gaussian_rank_oracle(ops: &[Operator], tol: f64) -> usize {
        let n2 = ops[0].dim() * ops[0].dim();
        let mut rows: Vec<Vec<Cplx>> = ops
            .iter()
            .map(|o| o.vectorize().iter().cloned().collect())
            .collect();
        let scale: f64 = rows
            .iter()
            .flat_map(|r| r.iter().map(|z| z.norm()))
            .fold(0.0, f64::max);
        let mut rank = 0;
        for col in 0..n2 {
            let pivot = (rank..rows.len())
                .max_by(|&i, &j| rows[i][col].norm().partial_cmp(&rows[j][col].norm()).unwrap());
            let Some(pivot) = pivot else { break };
            if rows[pivot][col].norm() <= tol * scale {
                continue;
            }
            rows.swap(rank, pivot);
            for i in 0..rows.len() {
                if i != rank {
                    let f = rows[i][col] / rows[rank][col];
                    for c in col..n2 {
                        let sub = rows[rank][c] * f;
                        rows[i][c] -= sub;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    #[test]
    fn span_is_clean_under_clustered_singular_values() {
        // Four near-diagonal matrices with a repeated singular value pair;
        // the returned orthonormal basis must stay inside the diagonal
        // subspace instead of leaking off-diagonal mass.
        let mk = |d: [f64; 3]| {
            Operator::from_fn(3, |r, c| {
                if r == c {
                    cplx(d[r], 0.0)
                } else {
                    cplx(0.0, 0.0)
                }
            })
        };
        let ops = [
            mk([0.3323, 0.9417, 0.0520]),
            mk([-0.0657, -0.0319, 0.9973]),
            mk([0.9409, -0.3348, 0.0513]),
            Operator::matrix_unit(3, 2, 2),
        ];
        let v = orthonormalize(&ops, DEFAULT_TOL).unwrap();
        assert_eq!(v.dim(), 3);
        for b in v.basis() {
            for r in 0..3 {
                for c in 0..3 {
                    if r != c {
                        assert!(
                            b.entry(r, c).norm() < 1e-10,
                            "off-diagonal leak {:.3e} at ({r},{c})",
                            b.entry(r, c).norm()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn singular_values_of_partial_isometry() {
        let mut m = CMatrix::zeros(3, 2);
        m[(0, 0)] = cplx(3.0, 0.0);
        m[(2, 1)] = cplx(0.0, -2.0);
        let sv = singular_values(&m);
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn contains_scaled_basis_element() {
        let v = orthonormalize(&[Operator::identity(2)], DEFAULT_TOL).unwrap();
        assert!(v.contains(&Operator::identity(2).scale(cplx(5.0, 0.0))).unwrap());
    }

    #[test]
    fn contains_rejects_orthogonal() {
        let v = orthonormalize(&[Operator::matrix_unit(2, 0, 0)], DEFAULT_TOL).unwrap();
        assert!(!v.contains(&Operator::matrix_unit(2, 1, 1)).unwrap());
    }

    #[test]
    fn contains_detects_orthogonal_perturbation() {
        // An element of V perturbed by 10*tol in a direction orthogonal to V
        // must be rejected.
        let tol = 1e-6;
        let v = orthonormalize(
            &[Operator::matrix_unit(3, 0, 0), Operator::matrix_unit(3, 1, 2)],
            tol,
        )
        .unwrap();
        let inside = v.basis()[0].add(&v.basis()[1]).unwrap();
        let ortho = Operator::matrix_unit(3, 2, 0);
        let perturbed = inside.add(&ortho.scale(cplx(10.0 * tol, 0.0))).unwrap();
        assert!(!v.contains(&perturbed).unwrap());
        assert!(v.contains(&inside).unwrap());
    }

    #[test]
    fn nullspace_symmetric_matrices() {
        // a - a^t = 0 on M_2 leaves the symmetric matrices, dimension 3.
        let c = constraint_from_linear_map(2, |a| {
            let t = Operator::new(a.matrix().transpose()).unwrap();
            a.sub(&t).unwrap()
        });
        let v = nullspace_of_constraints(&[c], 2, DEFAULT_TOL).unwrap();
        assert_eq!(v.dim(), 3);
    }

    #[test]
    fn nullspace_left_annihilator() {
        // e11 * a = 0 on M_2 forces the first row to vanish: span{e21, e22}.
        let e11 = Operator::matrix_unit(2, 0, 0);
        let c = constraint_from_linear_map(2, |a| e11.mul(a).unwrap());
        let v = nullspace_of_constraints(&[c], 2, DEFAULT_TOL).unwrap();
        assert_eq!(v.dim(), 2);
        assert!(v.contains(&Operator::matrix_unit(2, 1, 0)).unwrap());
        assert!(v.contains(&Operator::matrix_unit(2, 1, 1)).unwrap());
    }

    #[test]
    fn nullspace_empty_constraints_is_full() {
        let v = nullspace_of_constraints(&[], 2, DEFAULT_TOL).unwrap();
        assert_eq!(v.dim(), 4);
    }

    #[test]
    fn operator_norm_matrix_unit() {
        assert!((operator_norm(&Operator::matrix_unit(2, 0, 1)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn join_of_diagonal_projections() {
        let e11 = Operator::matrix_unit(2, 0, 0);
        let e22 = Operator::matrix_unit(2, 1, 1);
        let j = join_of_projections(&[e11.clone(), e22.clone()], 2, DEFAULT_TOL).unwrap();
        assert!(j.sub(&Operator::identity(2)).unwrap().hs_norm() < 1e-9);
    }

    #[test]
    fn range_projection_of_rank_two() {
        // Explicit rank-2 3x3 matrix; trace of the range projection is 2.
        let a = Operator::from_real_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![0.0, 1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(rank(&a, DEFAULT_TOL), 2);
        let p = range_projection(&a, DEFAULT_TOL);
        assert!(p.is_projection(1e-9));
        assert!((p.trace().re - 2.0).abs() < 1e-9);
        assert!(p.mul(&a).unwrap().sub(&a).unwrap().hs_norm() < 1e-9);
    }

    #[test]
    fn join_rejects_non_projection() {
        let a = op2([[0.0, 1.0], [0.0, 0.0]]);
        assert!(join_of_projections(&[a], 2, DEFAULT_TOL).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn orthonormalize_is_idempotent_on_span(seed in 0u64..1000) {
            let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
            let mut next = move || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 33) as f64) / ((1u64 << 31) as f64) - 1.0
            };
            let ops: Vec<Operator> = (0..4)
                .map(|_| Operator::from_fn(3, |_, _| cplx(next(), next())))
                .collect();
            let v = orthonormalize(&ops, DEFAULT_TOL).unwrap();
            let w = orthonormalize(v.basis(), DEFAULT_TOL).unwrap();
            prop_assert_eq!(v.dim(), w.dim());
            prop_assert!(v.equals(&w).unwrap());
            for b in v.basis() {
                prop_assert!(v.contains(b).unwrap());
            }
        }

        #[test]
        fn join_dominates_and_trace_subadditive(seed in 0u64..1000) {
            let mut state = seed.wrapping_mul(0x243F6A8885A308D3).wrapping_add(7);
            let mut next = move || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 33) as f64) / ((1u64 << 31) as f64) - 1.0
            };
            // Random rank-1 projections on C^3.
            let mk = |next: &mut dyn FnMut() -> f64| {
                let v = CVector::from_fn(3, |_, _| cplx(next(), next()));
                let nv = v.norm();
                let v = v / cplx(nv, 0.0);
                Operator::new(&v * v.adjoint()).unwrap()
            };
            let p = mk(&mut next);
            let q = mk(&mut next);
            let j = join_of_projections(&[p.clone(), q.clone()], 3, DEFAULT_TOL).unwrap();
            // j >= p and j >= q in the psd order: eigenvalues of j - p over -tol.
            for r in [&p, &q] {
                let diff = j.sub(r).unwrap();
                let (vals, _) = hermitian_eigen(&diff);
                prop_assert!(vals.iter().all(|&x| x >= -1e-9));
            }
            prop_assert!(j.trace().re <= p.trace().re + q.trace().re + 1e-9);
        }
    }
}
