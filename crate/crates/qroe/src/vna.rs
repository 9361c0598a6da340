//! Represented von Neumann algebras in finite dimension.
//!
//! An algebra is held together with its commutant, center, and minimal
//! central projections, all computed eagerly at construction. Canonical
//! construction from block data `(d_k, m_k)` places `M_{d_k} (x) 1_{m_k}`
//! summands in order; construction from generators closes under products and
//! adjoints and then recovers block data from the center when possible.

use crate::error::{Error, Result};
use crate::linalg::{
    self, cplx, constraint_from_linear_map, orthonormalize_with_dim, projection_onto_column_span,
    CMatrix, CVector, Cplx, Operator, OperatorSubspace,
};
use crate::sampling::Rng;
use std::sync::Arc;

/// One direct summand `M_d (x) 1_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockData {
    pub dim: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct RepresentedAlgebra {
    ambient_dim: usize,
    algebra: OperatorSubspace,
    commutant: OperatorSubspace,
    center: OperatorSubspace,
    minimal_central_projections: Vec<Operator>,
    block_form: Option<Vec<BlockData>>,
    closure_iterations: Option<usize>,
    tol: f64,
}

pub type AlgebraHandle = Arc<RepresentedAlgebra>;

impl RepresentedAlgebra {
    /// `M = (+)_k M_{d_k} (x) 1_{m_k}` in the canonical ordered basis, with
    /// commutant `(+)_k 1_{d_k} (x) M_{m_k}`.
    pub fn from_blocks(blocks: &[(usize, usize)], tol: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidBlocks("no blocks given".into()));
        }
        if blocks.iter().any(|&(d, m)| d == 0 || m == 0) {
            return Err(Error::InvalidBlocks(
                "block dimension and multiplicity must be at least 1".into(),
            ));
        }
        let n: usize = blocks.iter().map(|&(d, m)| d * m).sum();
        let mut algebra_basis = Vec::new();
        let mut commutant_basis = Vec::new();
        let mut center_basis = Vec::new();
        let mut minimal_central = Vec::new();
        let mut offset = 0;
        for &(d, m) in blocks {
            // Index inside the block: i*m + j with i < d (algebra leg),
            // j < m (multiplicity leg).
            for a in 0..d {
                for b in 0..d {
                    let mut mat = CMatrix::zeros(n, n);
                    for j in 0..m {
                        mat[(offset + a * m + j, offset + b * m + j)] =
                            cplx(1.0 / (m as f64).sqrt(), 0.0);
                    }
                    algebra_basis.push(Operator::new(mat)?);
                }
            }
            for a in 0..m {
                for b in 0..m {
                    let mut mat = CMatrix::zeros(n, n);
                    for i in 0..d {
                        mat[(offset + i * m + a, offset + i * m + b)] =
                            cplx(1.0 / (d as f64).sqrt(), 0.0);
                    }
                    commutant_basis.push(Operator::new(mat)?);
                }
            }
            let mut z = CMatrix::zeros(n, n);
            for idx in 0..d * m {
                z[(offset + idx, offset + idx)] = cplx(1.0, 0.0);
            }
            let z = Operator::new(z)?;
            center_basis.push(z.scale(cplx(1.0 / ((d * m) as f64).sqrt(), 0.0)));
            minimal_central.push(z);
            offset += d * m;
        }
        Ok(Self {
            ambient_dim: n,
            algebra: OperatorSubspace::from_orthonormal_basis(n, algebra_basis, tol)?,
            commutant: OperatorSubspace::from_orthonormal_basis(n, commutant_basis, tol)?,
            center: OperatorSubspace::from_orthonormal_basis(n, center_basis, tol)?,
            minimal_central_projections: minimal_central,
            block_form: Some(
                blocks
                    .iter()
                    .map(|&(d, m)| BlockData {
                        dim: d,
                        multiplicity: m,
                    })
                    .collect(),
            ),
            closure_iterations: None,
            tol,
        })
    }

    /// The diagonal `l_inf(X)` inside `B(C^X)`.
    pub fn diagonal(points: usize, tol: f64) -> Result<Self> {
        Self::from_blocks(&vec![(1, 1); points], tol)
    }

    /// Smallest unital *-algebra containing the generators, computed by
    /// alternating product spans and orthonormalization until the dimension
    /// stabilizes. Termination is forced by the `n^2` dimension bound.
    pub fn from_generators(gens: &[Operator], ambient_dim: usize, tol: f64) -> Result<Self> {
        let mut seed: Vec<Operator> = vec![Operator::identity(ambient_dim)];
        for g in gens {
            if g.dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: g.dim(),
                });
            }
            seed.push(g.clone());
            seed.push(g.adjoint());
        }
        let mut space = orthonormalize_with_dim(&seed, ambient_dim, tol)?;
        let mut iterations = 0;
        loop {
            iterations += 1;
            let mut next: Vec<Operator> = space.basis().to_vec();
            for a in space.basis() {
                for b in space.basis() {
                    next.push(a.mul(b)?);
                }
            }
            let closed = orthonormalize_with_dim(&next, ambient_dim, tol)?;
            let stable = closed.dim() == space.dim();
            space = closed;
            if stable {
                break;
            }
        }
        Self::from_algebra_space(space, ambient_dim, tol, Some(iterations))
    }

    /// Wraps an operator subspace already closed under products and adjoints.
    pub fn from_algebra_space(
        space: OperatorSubspace,
        ambient_dim: usize,
        tol: f64,
        closure_iterations: Option<usize>,
    ) -> Result<Self> {
        verify_unital_star_algebra(&space, ambient_dim)?;
        let commutant = commutant_of_space(&space, ambient_dim, tol)?;
        let center = space.intersect(&commutant)?;
        let minimal_central = minimal_central_projections(&center, ambient_dim, tol)?;
        let block_form = recover_block_form(&space, &commutant, &minimal_central, tol)?;
        Ok(Self {
            ambient_dim,
            algebra: space,
            commutant,
            center,
            minimal_central_projections: minimal_central,
            block_form,
            closure_iterations,
            tol,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn algebra_space(&self) -> &OperatorSubspace {
        &self.algebra
    }

    pub fn commutant_space(&self) -> &OperatorSubspace {
        &self.commutant
    }

    pub fn center_space(&self) -> &OperatorSubspace {
        &self.center
    }

    pub fn minimal_central_projections(&self) -> &[Operator] {
        &self.minimal_central_projections
    }

    pub fn block_form(&self) -> Option<&[BlockData]> {
        self.block_form.as_deref()
    }

    pub fn closure_iterations(&self) -> Option<usize> {
        self.closure_iterations
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn contains(&self, a: &Operator) -> Result<bool> {
        self.algebra.contains(a)
    }

    /// Whether this is the canonical diagonal `l_inf(X)`: all blocks are
    /// `(1,1)` and the basis consists of diagonal matrices.
    pub fn is_canonical_diagonal(&self) -> bool {
        let Some(blocks) = &self.block_form else {
            return false;
        };
        if !blocks.iter().all(|b| b.dim == 1 && b.multiplicity == 1) {
            return false;
        }
        self.algebra.basis().iter().all(|op| {
            let m = op.matrix();
            (0..op.dim()).all(|r| (0..op.dim()).all(|c| r == c || m[(r, c)].norm() < 1e-12))
        })
    }

    /// Abelian means every block has `dim == 1` (multiplicities are free).
    pub fn is_abelian(&self) -> bool {
        match &self.block_form {
            Some(blocks) => blocks.iter().all(|b| b.dim == 1),
            None => false,
        }
    }

    pub fn is_multiplicity_free(&self) -> bool {
        match &self.block_form {
            Some(blocks) => blocks.iter().all(|b| b.multiplicity == 1),
            None => false,
        }
    }

    /// Atom projections `e_xx` of the canonical diagonal algebra.
    pub fn atoms(&self) -> Result<Vec<Operator>> {
        if !self.is_canonical_diagonal() {
            return Err(Error::NotDiagonalAlgebra);
        }
        Ok((0..self.ambient_dim)
            .map(|x| Operator::matrix_unit(self.ambient_dim, x, x))
            .collect())
    }

    /// Smallest projection in `M` fixing `xi`: the orthogonal projection onto
    /// `span(M' xi)`. A projection in `M` fixes `xi` exactly when it fixes
    /// everything the commutant can reach from it, which makes this the
    /// implementable form of the lattice minimum.
    pub fn support_vector(&self, xi: &CVector) -> Result<Operator> {
        if xi.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: xi.len(),
            });
        }
        if xi.norm() == 0.0 {
            return Ok(Operator::zeros(self.ambient_dim));
        }
        let mut cols = CMatrix::zeros(self.ambient_dim, self.commutant.dim());
        for (j, mprime) in self.commutant.basis().iter().enumerate() {
            cols.set_column(j, &mprime.apply(xi));
        }
        Operator::new(projection_onto_column_span(&cols, self.tol))
    }

    /// Smallest projection `q` in `M` with `q a = a`: the projection onto
    /// `span(M' . range(a))`, which equals the join of the vector supports of
    /// the columns of `a`.
    pub fn left_support(&self, a: &Operator) -> Result<Operator> {
        if a.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: a.dim(),
            });
        }
        let range = linalg::orthonormal_column_span(a.matrix(), self.tol);
        if range.ncols() == 0 {
            return Ok(Operator::zeros(self.ambient_dim));
        }
        let k = self.commutant.dim();
        let mut cols = CMatrix::zeros(self.ambient_dim, k * range.ncols());
        for (j, mprime) in self.commutant.basis().iter().enumerate() {
            for c in 0..range.ncols() {
                cols.set_column(
                    j * range.ncols() + c,
                    &(mprime.matrix() * range.column(c).clone_owned()),
                );
            }
        }
        Operator::new(projection_onto_column_span(&cols, self.tol))
    }

    pub fn right_support(&self, a: &Operator) -> Result<Operator> {
        self.left_support(&a.adjoint())
    }

    /// `M (x) 1_k` acting on `C^{ambient * k}`, with commutant `M' (x) M_k`.
    pub fn amplify(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidBlocks(
                "amplification level must be >= 1".into(),
            ));
        }
        let n = self.ambient_dim * k;
        let scale = 1.0 / (k as f64).sqrt();
        let one_k = Operator::identity(k);
        let algebra_basis: Vec<Operator> = self
            .algebra
            .basis()
            .iter()
            .map(|a| a.kron(&one_k).scale(cplx(scale, 0.0)))
            .collect();
        let mut commutant_basis = Vec::new();
        for mprime in self.commutant.basis() {
            for r in 0..k {
                for c in 0..k {
                    commutant_basis.push(mprime.kron(&Operator::matrix_unit(k, r, c)));
                }
            }
        }
        let center_basis: Vec<Operator> = self
            .center
            .basis()
            .iter()
            .map(|z| z.kron(&one_k).scale(cplx(scale, 0.0)))
            .collect();
        let minimal_central = self
            .minimal_central_projections
            .iter()
            .map(|z| z.kron(&one_k))
            .collect();
        Ok(Self {
            ambient_dim: n,
            algebra: OperatorSubspace::from_orthonormal_basis(n, algebra_basis, self.tol)?,
            commutant: OperatorSubspace::from_orthonormal_basis(n, commutant_basis, self.tol)?,
            center: OperatorSubspace::from_orthonormal_basis(n, center_basis, self.tol)?,
            minimal_central_projections: minimal_central,
            block_form: self.block_form.as_ref().map(|blocks| {
                blocks
                    .iter()
                    .map(|b| BlockData {
                        dim: b.dim,
                        multiplicity: b.multiplicity * k,
                    })
                    .collect()
            }),
            closure_iterations: None,
            tol: self.tol,
        })
    }

    /// Evaluates a trace functional on `a` (which must lie in `M`):
    /// `tau(a) = sum_k w_k tr(A_k)` where `a = (+)_k A_k (x) 1_{m_k}`.
    /// The block trace is read off as `Tr(a z_k) / m_k`, which does not
    /// require aligning a basis.
    pub fn trace_eval(&self, tau: &TraceFunctional, a: &Operator) -> Result<Cplx> {
        let blocks = self
            .block_form
            .as_ref()
            .ok_or(Error::BlockFormUnavailable)?;
        if tau.weights.len() != blocks.len() {
            return Err(Error::InvalidWeights(format!(
                "expected {} weights, found {}",
                blocks.len(),
                tau.weights.len()
            )));
        }
        if !self.contains(a)? {
            return Err(Error::Precondition(
                "trace evaluated outside the algebra".into(),
            ));
        }
        let mut acc = cplx(0.0, 0.0);
        for ((block, z), &w) in blocks
            .iter()
            .zip(self.minimal_central_projections.iter())
            .zip(tau.weights.iter())
        {
            let tr = a.mul(z)?.trace();
            acc += tr * cplx(w / block.multiplicity as f64, 0.0);
        }
        Ok(acc)
    }

    /// Real part of the trace, for self-adjoint arguments.
    pub fn trace_eval_real(&self, tau: &TraceFunctional, a: &Operator) -> Result<f64> {
        Ok(self.trace_eval(tau, a)?.re)
    }
}

/// Positive weights, one per block of a block-form algebra.
#[derive(Debug, Clone)]
pub struct TraceFunctional {
    weights: Vec<f64>,
}

impl TraceFunctional {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights(
                "weights must be strictly positive and finite".into(),
            ));
        }
        Ok(Self { weights })
    }

    pub fn counting(blocks: usize) -> Self {
        Self {
            weights: vec![1.0; blocks],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Commutant of a self-adjoint operator set: the joint nullspace of
/// `x -> g x - x g` over the basis, automatically closed under products and
/// adjoints.
pub fn commutant_of_space(
    space: &OperatorSubspace,
    ambient_dim: usize,
    tol: f64,
) -> Result<OperatorSubspace> {
    if !space.adjoint_space()?.equals(space)? {
        return Err(Error::NotAdjointClosed { defect: f64::NAN });
    }
    let constraints: Vec<CMatrix> = space
        .basis()
        .iter()
        .map(|g| {
            constraint_from_linear_map(ambient_dim, |x| {
                g.mul(x).unwrap().sub(&x.mul(g).unwrap()).unwrap()
            })
        })
        .collect();
    linalg::nullspace_of_constraints(&constraints, ambient_dim, tol)
}

fn verify_unital_star_algebra(space: &OperatorSubspace, ambient_dim: usize) -> Result<()> {
    if !space.contains(&Operator::identity(ambient_dim))? {
        return Err(Error::Precondition(
            "algebra must contain the identity".into(),
        ));
    }
    for a in space.basis() {
        if !space.contains(&a.adjoint())? {
            return Err(Error::NotAdjointClosed {
                defect: a.adjoint().sub(&space.project(&a.adjoint())?)?.hs_norm(),
            });
        }
        for b in space.basis() {
            let p = a.mul(b)?;
            // Products that vanish up to roundoff (scale set by the operand
            // norms) count as zero, which is always contained.
            if p.hs_norm() <= 1e-9 * a.hs_norm() * b.hs_norm() {
                continue;
            }
            if !space.contains(&p)? {
                return Err(Error::Precondition(
                    "algebra is not closed under products".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Minimal central projections via the spectral split of a generic
/// self-adjoint central element; retried with fresh randomness because a
/// draw can land on a degenerate spectrum.
fn minimal_central_projections(
    center: &OperatorSubspace,
    ambient_dim: usize,
    tol: f64,
) -> Result<Vec<Operator>> {
    let ell = center.dim();
    if ell == 0 {
        return Err(Error::Precondition("center is zero-dimensional".into()));
    }
    let mut rng = Rng::new(0x51EB851F00C0FFEE);
    for _attempt in 0..5 {
        let mut h = Operator::zeros(ambient_dim);
        for c in center.basis() {
            h = h.add(&c.scale(rng.gaussian_cplx()))?;
        }
        let h = h.add(&h.adjoint())?.scale(cplx(0.5, 0.0));
        let (vals, vecs) = linalg::hermitian_eigen(&h);
        let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let gap = 1e-6 * scale;
        let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            match clusters.last_mut() {
                Some((rep, idxs)) if (v - *rep).abs() <= gap => idxs.push(i),
                _ => clusters.push((v, vec![i])),
            }
        }
        if clusters.len() != ell {
            continue;
        }
        let mut projections = Vec::with_capacity(ell);
        let mut ok = true;
        for (_rep, idxs) in &clusters {
            let mut p = CMatrix::zeros(ambient_dim, ambient_dim);
            for &i in idxs {
                let col = vecs.column(i).clone_owned();
                p += &col * col.adjoint();
            }
            let p = Operator::new(p)?;
            if !p.is_projection(tol.max(1e-8) * 100.0) || !center.contains(&p)? {
                ok = false;
                break;
            }
            projections.push(p);
        }
        if ok {
            return Ok(projections);
        }
    }
    Err(Error::Precondition(
        "could not split the center into minimal projections".into(),
    ))
}

/// Per-block dimension and multiplicity from compressions by the minimal
/// central projections: `dim(z M z) = d^2`, `dim(z M' z) = m^2`,
/// `rank(z) = d m`. Returns `None` when the numbers do not round cleanly.
fn recover_block_form(
    algebra: &OperatorSubspace,
    commutant: &OperatorSubspace,
    minimal_central: &[Operator],
    tol: f64,
) -> Result<Option<Vec<BlockData>>> {
    let n = algebra.ambient_dim();
    let mut blocks = Vec::with_capacity(minimal_central.len());
    let mut total = 0usize;
    for z in minimal_central {
        let compress = |s: &OperatorSubspace| -> Result<usize> {
            let mut comps = Vec::with_capacity(s.dim());
            for b in s.basis() {
                comps.push(z.mul(b)?.mul(z)?);
            }
            Ok(orthonormalize_with_dim(&comps, n, tol)?.dim())
        };
        let da = compress(algebra)?;
        let dc = compress(commutant)?;
        let rank = z.trace().re.round() as usize;
        let d = (da as f64).sqrt().round() as usize;
        let m = (dc as f64).sqrt().round() as usize;
        if d * d != da || m * m != dc || d * m != rank {
            return Ok(None);
        }
        total += rank;
        blocks.push(BlockData {
            dim: d,
            multiplicity: m,
        });
    }
    if total != n {
        return Ok(None);
    }
    let dim_sum: usize = blocks.iter().map(|b| b.dim * b.dim).sum();
    if dim_sum != algebra.dim() {
        return Ok(None);
    }
    Ok(Some(blocks))
}

/// One sampled projection of a block-form algebra: per block, a rank chosen
/// uniformly in `0..=d_k` and a Haar-conjugated canonical projection of that
/// rank, tensored with the multiplicity identity. All-zero draws are
/// rejected.
pub fn sample_projection(alg: &RepresentedAlgebra, rng: &mut Rng) -> Result<Operator> {
    let blocks = alg
        .block_form()
        .ok_or(Error::BlockFormUnavailable)?
        .to_vec();
    let n = alg.ambient_dim();
    loop {
        let mut mat = CMatrix::zeros(n, n);
        let mut offset = 0;
        let mut nonzero = false;
        for b in &blocks {
            let r = rng.below(b.dim + 1);
            if r > 0 {
                nonzero = true;
                let p = rng.haar_projection(b.dim, r);
                for i in 0..b.dim {
                    for i2 in 0..b.dim {
                        let v = p.entry(i, i2);
                        if v.norm() > 0.0 {
                            for j in 0..b.multiplicity {
                                mat[(
                                    offset + i * b.multiplicity + j,
                                    offset + i2 * b.multiplicity + j,
                                )] = v;
                            }
                        }
                    }
                }
            }
            offset += b.dim * b.multiplicity;
        }
        if nonzero {
            return Operator::new(mat);
        }
    }
}

/// `<a, b>` for ambient vectors.
pub fn vec_inner(a: &CVector, b: &CVector) -> Cplx {
    let mut acc = cplx(0.0, 0.0);
    for i in 0..a.len() {
        acc += a[i] * b[i].conj();
    }
    acc
}

/// Deterministic projections worth probing: per block, the diagonal rank-one
/// cells and the block identity.
pub fn canonical_projections(alg: &RepresentedAlgebra) -> Result<Vec<Operator>> {
    let blocks = alg.block_form().ok_or(Error::BlockFormUnavailable)?;
    let n = alg.ambient_dim();
    let mut out = Vec::new();
    let mut offset = 0;
    for b in blocks {
        for i in 0..b.dim {
            let mut mat = CMatrix::zeros(n, n);
            for j in 0..b.multiplicity {
                mat[(offset + i * b.multiplicity + j, offset + i * b.multiplicity + j)] =
                    cplx(1.0, 0.0);
            }
            out.push(Operator::new(mat)?);
        }
        let mut z = CMatrix::zeros(n, n);
        for idx in 0..b.dim * b.multiplicity {
            z[(offset + idx, offset + idx)] = cplx(1.0, 0.0);
        }
        out.push(Operator::new(z)?);
        offset += b.dim * b.multiplicity;
    }
    Ok(out)
}
