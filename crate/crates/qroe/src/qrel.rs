//! Quantum relations over a represented algebra.
//!
//! A quantum relation is an operator subspace that is a bimodule over the
//! commutant: `M' V M' <= V`. Over the canonical diagonal algebra these are
//! exactly the classical relations on the point set, and the bridge in both
//! directions is exact. Intrinsic membership, annihilator reconstruction and
//! the operator reflexive closure work through projection pairs at a finite
//! amplification level.

use crate::error::{Error, Result};
use crate::linalg::{
    self, constraint_from_linear_map, join_of_projections, operator_norm, CMatrix, Operator,
    OperatorSubspace,
};
use crate::sampling::Rng;
use crate::vna::{self, AlgebraHandle, RepresentedAlgebra};
use std::collections::BTreeSet;
use std::sync::Arc;

/// Bimodule subspace over the commutant of a represented algebra.
#[derive(Debug, Clone)]
pub struct QuantumRelation {
    algebra: AlgebraHandle,
    space: OperatorSubspace,
    /// Set when the relation is a cell span over the canonical diagonal
    /// algebra, in which case subspace arithmetic is done exactly on the
    /// classical pair set.
    classical: Option<ClassicalRelation>,
}

pub(crate) fn same_algebra(a: &AlgebraHandle, b: &AlgebraHandle) -> bool {
    Arc::ptr_eq(a, b) || (a.ambient_dim() == b.ambient_dim() && a.dim() == b.dim())
}

impl QuantumRelation {
    /// Wraps a subspace after verifying the bimodule property on all basis
    /// triples `m1' v m2'`.
    pub fn new(algebra: AlgebraHandle, space: OperatorSubspace) -> Result<Self> {
        if space.ambient_dim() != algebra.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: algebra.ambient_dim(),
                found: space.ambient_dim(),
            });
        }
        let tol = space.tol();
        for m1 in algebra.commutant_space().basis() {
            for v in space.basis() {
                let left = m1.mul(v)?;
                for m2 in algebra.commutant_space().basis() {
                    let w = left.mul(m2)?;
                    if w.hs_norm() <= tol * m1.hs_norm() * v.hs_norm() * m2.hs_norm() {
                        continue;
                    }
                    if !space.contains(&w)? {
                        let defect = w.sub(&space.project(&w)?)?.hs_norm();
                        return Err(Error::NotBimodule { defect });
                    }
                }
            }
        }
        Ok(Self {
            algebra,
            space,
            classical: None,
        })
    }

    /// Cell span of a classical relation over the canonical diagonal
    /// algebra. Exact: the basis is the set of matrix units of the pairs,
    /// which is a bimodule by construction, so no verification pass runs.
    fn from_classical(algebra: AlgebraHandle, e: ClassicalRelation) -> Result<Self> {
        let n = algebra.ambient_dim();
        let basis: Vec<Operator> = e
            .pairs()
            .iter()
            .map(|&(x, y)| Operator::matrix_unit(n, x, y))
            .collect();
        let space = OperatorSubspace::from_orthonormal_basis(n, basis, algebra.tol())?;
        Ok(Self {
            algebra,
            space,
            classical: Some(e),
        })
    }

    /// The classical pair set, when this relation is a tagged cell span.
    pub fn classical(&self) -> Option<&ClassicalRelation> {
        self.classical.as_ref()
    }

    /// Smallest bimodule containing the seeds: the span of `m1' s m2'` over
    /// the commutant basis. One pass suffices because the commutant is
    /// closed under products.
    pub fn from_bimodule_closure(algebra: AlgebraHandle, seeds: &[Operator]) -> Result<Self> {
        let n = algebra.ambient_dim();
        for s in seeds {
            if s.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.dim(),
                });
            }
        }
        let mut spanning = Vec::new();
        for s in seeds {
            for m1 in algebra.commutant_space().basis() {
                let left = m1.mul(s)?;
                for m2 in algebra.commutant_space().basis() {
                    spanning.push(left.mul(m2)?);
                }
            }
        }
        let space = linalg::orthonormalize_with_dim(&spanning, n, algebra.tol())?;
        Self::new(algebra, space)
    }

    /// The diagonal relation: the commutant itself.
    pub fn diagonal(algebra: AlgebraHandle) -> Result<Self> {
        if algebra.is_canonical_diagonal() {
            let e = ClassicalRelation::diagonal(algebra.ambient_dim());
            return Self::from_classical(algebra, e);
        }
        let space = OperatorSubspace::from_orthonormal_basis(
            algebra.ambient_dim(),
            algebra.commutant_space().basis().to_vec(),
            algebra.tol(),
        )?;
        Self::new(algebra, space)
    }

    /// All of `B(H)`.
    pub fn full(algebra: AlgebraHandle) -> Result<Self> {
        if algebra.is_canonical_diagonal() {
            let e = ClassicalRelation::full(algebra.ambient_dim());
            return Self::from_classical(algebra, e);
        }
        let space = OperatorSubspace::full(algebra.ambient_dim(), algebra.tol());
        Self::new(algebra, space)
    }

    pub fn zero(algebra: AlgebraHandle) -> Self {
        let classical = algebra
            .is_canonical_diagonal()
            .then(|| ClassicalRelation::empty(algebra.ambient_dim()));
        let space = OperatorSubspace::zero(algebra.ambient_dim(), algebra.tol());
        Self {
            algebra,
            space,
            classical,
        }
    }

    pub fn algebra(&self) -> &AlgebraHandle {
        &self.algebra
    }

    pub fn space(&self) -> &OperatorSubspace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if !same_algebra(&self.algebra, &other.algebra) {
            return Err(Error::AlgebraMismatch);
        }
        if let (Some(e), Some(f)) = (&self.classical, &other.classical) {
            return Self::from_classical(self.algebra.clone(), e.union(f));
        }
        let space = self.space.sum(&other.space)?;
        Self::new(self.algebra.clone(), space)
    }

    pub fn product_span(&self, other: &Self) -> Result<Self> {
        if !same_algebra(&self.algebra, &other.algebra) {
            return Err(Error::AlgebraMismatch);
        }
        if let (Some(e), Some(f)) = (&self.classical, &other.classical) {
            return Self::from_classical(self.algebra.clone(), e.compose(f));
        }
        let space = self.space.product_span(&other.space)?;
        Self::new(self.algebra.clone(), space)
    }

    pub fn adjoint(&self) -> Result<Self> {
        if let Some(e) = &self.classical {
            return Self::from_classical(self.algebra.clone(), e.inverse());
        }
        let space = self.space.adjoint_space()?;
        Self::new(self.algebra.clone(), space)
    }

    pub fn contains_relation(&self, other: &Self) -> Result<bool> {
        if let (Some(e), Some(f)) = (&self.classical, &other.classical) {
            return Ok(f.is_subset(e));
        }
        self.space.contains_subspace(&other.space)
    }

    pub fn equals(&self, other: &Self) -> Result<bool> {
        if let (Some(e), Some(f)) = (&self.classical, &other.classical) {
            return Ok(e == f);
        }
        self.space.equals(&other.space)
    }

    /// Operator system check: contains the identity and closed under adjoints.
    pub fn is_operator_system(&self) -> Result<bool> {
        if let Some(e) = &self.classical {
            let n = self.algebra.ambient_dim();
            return Ok(ClassicalRelation::diagonal(n).is_subset(e) && &e.inverse() == e);
        }
        Ok(self
            .space
            .contains(&Operator::identity(self.algebra.ambient_dim()))?
            && self.space.adjoint_space()?.equals(&self.space)?)
    }

    /// `V (x) M_k` as a relation over the amplified algebra `M (x) 1_k`.
    pub fn amplify(&self, amplified: AlgebraHandle, k: usize) -> Result<Self> {
        if amplified.ambient_dim() != self.algebra.ambient_dim() * k {
            return Err(Error::DimensionMismatch {
                expected: self.algebra.ambient_dim() * k,
                found: amplified.ambient_dim(),
            });
        }
        let mut basis = Vec::with_capacity(self.space.dim() * k * k);
        for v in self.space.basis() {
            for r in 0..k {
                for c in 0..k {
                    basis.push(v.kron(&Operator::matrix_unit(k, r, c)));
                }
            }
        }
        let space = OperatorSubspace::from_orthonormal_basis(
            amplified.ambient_dim(),
            basis,
            self.space.tol(),
        )?;
        Self::new(amplified, space)
    }
}

/// A classical relation `E` on `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalRelation {
    n: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl ClassicalRelation {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let pairs: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        if let Some(&(x, y)) = pairs.iter().find(|&&(x, y)| x >= n || y >= n) {
            return Err(Error::Precondition(format!(
                "pair ({x},{y}) outside point set of size {n}"
            )));
        }
        Ok(Self { n, pairs })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            pairs: BTreeSet::new(),
        }
    }

    pub fn diagonal(n: usize) -> Self {
        Self {
            n,
            pairs: (0..n).map(|x| (x, x)).collect(),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            pairs: (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect(),
        }
    }

    pub fn random(n: usize, density: f64, rng: &mut Rng) -> Self {
        let mut pairs = BTreeSet::new();
        for x in 0..n {
            for y in 0..n {
                if rng.uniform() < density {
                    pairs.insert((x, y));
                }
            }
        }
        Self { n, pairs }
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn contains_pair(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x, y))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            pairs: self.pairs.union(&other.pairs).cloned().collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            pairs: self.pairs.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }

    /// `E o F = {(x,y) : exists z with (x,z) in E and (z,y) in F}`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut pairs = BTreeSet::new();
        for &(x, z) in &self.pairs {
            for &(z2, y) in &other.pairs {
                if z == z2 {
                    pairs.insert((x, y));
                }
            }
        }
        Self { n: self.n, pairs }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    /// Image `(f x f)(E)` under a point map into a set of size `m`.
    pub fn map_image(&self, f: &[usize], m: usize) -> Result<Self> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: f.len(),
            });
        }
        ClassicalRelation::new(m, self.pairs.iter().map(|&(x, y)| (f[x], f[y])))
    }

    /// Preimage `(f x f)^{-1}(E)` under a point map from a set of size `m`.
    pub fn map_preimage(&self, f: &[usize], m: usize) -> Result<Self> {
        for &v in f {
            if v >= self.n {
                return Err(Error::Precondition(format!(
                    "map value {v} outside point set of size {}",
                    self.n
                )));
            }
        }
        let mut pairs = BTreeSet::new();
        for x in 0..m {
            for y in 0..m {
                if self.pairs.contains(&(f[x], f[y])) {
                    pairs.insert((x, y));
                }
            }
        }
        Ok(Self { n: m, pairs })
    }
}

/// A classical coarse structure on a finite set, held by its largest member:
/// the saturation of the generators and the diagonal under unions,
/// compositions, and inverses. Membership is containment in the top.
#[derive(Debug, Clone)]
pub struct ClassicalCoarseStructure {
    n: usize,
    top: ClassicalRelation,
}

impl ClassicalCoarseStructure {
    pub fn generated_by(n: usize, generators: &[ClassicalRelation]) -> Result<Self> {
        for g in generators {
            if g.points() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: g.points(),
                });
            }
        }
        let mut top = ClassicalRelation::diagonal(n);
        for g in generators {
            top = top.union(g);
        }
        loop {
            let bigger = top.union(&top.inverse()).union(&top.compose(&top));
            if bigger.pairs().len() == top.pairs().len() {
                return Ok(Self { n, top });
            }
            top = bigger;
        }
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn top(&self) -> &ClassicalRelation {
        &self.top
    }

    pub fn member(&self, e: &ClassicalRelation) -> bool {
        e.points() == self.n && e.is_subset(&self.top)
    }
}

/// `V_E = span{e_xy : (x,y) in E}` over the canonical diagonal algebra.
pub fn relation_to_subspace(
    algebra: AlgebraHandle,
    e: &ClassicalRelation,
) -> Result<QuantumRelation> {
    if !algebra.is_canonical_diagonal() {
        return Err(Error::NotDiagonalAlgebra);
    }
    let n = algebra.ambient_dim();
    if e.points() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: e.points(),
        });
    }
    QuantumRelation::from_classical(algebra, e.clone())
}

/// Recovers `E_V = {(x,y) : some element of V has a nonzero (x,y) cell}`.
/// Refused unless the relation lives over the canonical diagonal algebra,
/// where bimodules are exactly the cell spans.
pub fn subspace_to_relation(v: &QuantumRelation) -> Result<ClassicalRelation> {
    if let Some(e) = v.classical() {
        return Ok(e.clone());
    }
    if !v.algebra().is_canonical_diagonal() {
        return Err(Error::NotDiagonalAlgebra);
    }
    let n = v.algebra().ambient_dim();
    let tol = v.space().tol();
    let mut pairs = BTreeSet::new();
    for b in v.space().basis() {
        for x in 0..n {
            for y in 0..n {
                if b.entry(x, y).norm() > tol {
                    pairs.insert((x, y));
                }
            }
        }
    }
    ClassicalRelation::new(n, pairs)
}

/// A pair of projections in `M (x) M_k`, the finite-level stand-in for
/// projections in the amplification of `M`.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    level: usize,
    p: Operator,
    q: Operator,
}

impl ProjectionPair {
    /// Validates that both operators are projections on `C^{n*k}` commuting
    /// with `M' (x) 1_k` (equivalently, lying in `M (x) M_k`).
    pub fn new(
        algebra: &RepresentedAlgebra,
        p: Operator,
        q: Operator,
        level: usize,
    ) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidProjectionPair("level must be >= 1".into()));
        }
        let want = algebra.ambient_dim() * level;
        for (name, op) in [("p", &p), ("q", &q)] {
            if op.dim() != want {
                return Err(Error::InvalidProjectionPair(format!(
                    "{name} acts on dimension {} but level-{level} amplification needs {want}",
                    op.dim()
                )));
            }
            if !op.is_projection(1e-8) {
                return Err(Error::InvalidProjectionPair(format!(
                    "{name} is not a projection"
                )));
            }
            let one_k = Operator::identity(level);
            for mprime in algebra.commutant_space().basis() {
                let amp = mprime.kron(&one_k);
                if !op.commutes_with(&amp, 1e-8) {
                    return Err(Error::InvalidProjectionPair(format!(
                        "{name} does not commute with the amplified commutant"
                    )));
                }
            }
        }
        Ok(Self { level, p, q })
    }

    /// Level-1 pair of projections in `M` itself.
    pub fn level_one(algebra: &RepresentedAlgebra, p: Operator, q: Operator) -> Result<Self> {
        Self::new(algebra, p, q, 1)
    }

    /// `(e_xx (x) 1_k, e_yy (x) 1_k)` over the diagonal algebra.
    pub fn atom_pair(
        algebra: &RepresentedAlgebra,
        x: usize,
        y: usize,
        level: usize,
    ) -> Result<Self> {
        if !algebra.is_canonical_diagonal() {
            return Err(Error::NotDiagonalAlgebra);
        }
        let n = algebra.ambient_dim();
        let one_k = Operator::identity(level);
        Self::new(
            algebra,
            Operator::matrix_unit(n, x, x).kron(&one_k),
            Operator::matrix_unit(n, y, y).kron(&one_k),
            level,
        )
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn p(&self) -> &Operator {
        &self.p
    }

    pub fn q(&self) -> &Operator {
        &self.q
    }
}

/// Intrinsic membership: `(p,q)` is linked by `V` when some `a` in `V` has
/// `p (a (x) 1_k) q != 0`. Checking basis elements is complete because the
/// map `a -> p (a (x) 1) q` is linear: if it kills the basis it kills `V`.
pub fn intrinsic_member(v: &QuantumRelation, pair: &ProjectionPair) -> Result<bool> {
    let k = pair.level;
    let one_k = Operator::identity(k);
    let tol = v.space().tol();
    for a in v.space().basis() {
        let amplified = a.kron(&one_k);
        let w = pair.p.mul(&amplified)?.mul(&pair.q)?;
        if operator_norm(&w) > tol {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Largest subspace annihilated by the given forbidden pairs:
/// `{a : p (a (x) 1_k) q = 0 for each pair}`. This contains the relation the
/// pairs came from; with an incomplete forbidden list it is a proper
/// superset. The result is always a bimodule because the pair projections
/// commute with `M' (x) 1_k`.
pub fn subspace_from_annihilators(
    algebra: AlgebraHandle,
    pairs: &[ProjectionPair],
) -> Result<QuantumRelation> {
    let n = algebra.ambient_dim();
    let mut constraints: Vec<CMatrix> = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let k = pair.level;
        let one_k = Operator::identity(k);
        let nk2 = (n * k) * (n * k);
        let mut c = CMatrix::zeros(nk2, n * n);
        let mut j = 0;
        for col in 0..n {
            for row in 0..n {
                let unit = Operator::matrix_unit(n, row, col).kron(&one_k);
                let w = pair.p.mul(&unit)?.mul(&pair.q)?;
                c.set_column(j, &w.vectorize());
                j += 1;
            }
        }
        constraints.push(c);
    }
    let space = linalg::nullspace_of_constraints(&constraints, n, algebra.tol())?;
    QuantumRelation::new(algebra, space)
}

/// `phi_V(q)`: the join over the basis of `V` of the left supports of `a q`.
/// Left supports of combinations are dominated by the join of the basis
/// supports, so the basis join equals the join over all of `V`.
pub fn phi_v(v: &QuantumRelation, q: &Operator) -> Result<Operator> {
    let alg = v.algebra();
    if !q.is_projection(1e-8) {
        return Err(Error::NotAProjection {
            defect: q.mul(q)?.sub(q)?.hs_norm(),
            tol: 1e-8,
        });
    }
    if !alg.contains(q)? {
        return Err(Error::Precondition("q must lie in the algebra".into()));
    }
    let mut supports = Vec::with_capacity(v.dim());
    for a in v.space().basis() {
        supports.push(alg.left_support(&a.mul(q)?)?);
    }
    join_of_projections(&supports, alg.ambient_dim(), alg.tol())
}

/// Exact operator reflexive closure over the canonical diagonal algebra:
/// the joint nullspace of `phi_V(e_yy)^perp a e_yy = 0` over atoms. Atom
/// constraints suffice because `phi_V` of a sum of atoms is dominated by the
/// join of the atom images. Over an atomic abelian algebra the closure
/// returns `V` itself.
pub fn orc_atomic_abelian(v: &QuantumRelation) -> Result<QuantumRelation> {
    let alg = v.algebra();
    if !alg.is_canonical_diagonal() {
        return Err(Error::NotDiagonalAlgebra);
    }
    let n = alg.ambient_dim();
    if v.dim() == 0 {
        return Ok(QuantumRelation::zero(alg.clone()));
    }
    let mut constraints = Vec::with_capacity(n);
    for atom in alg.atoms()? {
        let phi = phi_v(v, &atom)?;
        let phi_perp = phi.complement();
        constraints.push(constraint_from_linear_map(n, |a| {
            phi_perp.mul(a).unwrap().mul(&atom).unwrap()
        }));
    }
    let space = linalg::nullspace_of_constraints(&constraints, n, alg.tol())?;
    QuantumRelation::new(alg.clone(), space)
}

/// Sampled over-approximation of the operator reflexive closure for general
/// block-form algebras: the constraint set `phi_V(q)^perp a q = 0` is
/// intersected over the canonical projections plus `samples` Haar draws.
/// The output contains `orc(V)` (hence `V`); no finite sample certifies
/// equality for nonabelian algebras.
pub fn orc_sampled(v: &QuantumRelation, samples: usize, seed: u64) -> Result<QuantumRelation> {
    let alg = v.algebra();
    let n = alg.ambient_dim();
    if v.dim() == 0 {
        return Ok(QuantumRelation::zero(alg.clone()));
    }
    let mut qs = vna::canonical_projections(alg)?;
    let mut rng = Rng::new(seed);
    for _ in 0..samples {
        qs.push(vna::sample_projection(alg, &mut rng)?);
    }
    let mut constraints = Vec::with_capacity(qs.len());
    for q in &qs {
        let phi_perp = phi_v(v, q)?.complement();
        constraints.push(constraint_from_linear_map(n, |a| {
            phi_perp.mul(a).unwrap().mul(q).unwrap()
        }));
    }
    let space = linalg::nullspace_of_constraints(&constraints, n, alg.tol())?;
    QuantumRelation::new(alg.clone(), space)
}

/// Checks the intrinsic composition law on a classical instance, where the
/// middle quantifier ranges over the finitely many diagonal projections:
/// `(p,q)` is linked by `span(V1 V2)` exactly when every diagonal `r`
/// satisfies `(p,r) in R_1` or `(r^perp, q) in R_2`. Atom pairs `(p,q)` are
/// enough to decide the law on cell spans.
pub fn composition_formula_agrees(v1: &QuantumRelation, v2: &QuantumRelation) -> Result<bool> {
    let alg = v1.algebra();
    if !alg.is_canonical_diagonal() {
        return Err(Error::NotDiagonalAlgebra);
    }
    let n = alg.ambient_dim();
    let product = v1.product_span(v2)?;
    for x in 0..n {
        for y in 0..n {
            let pair = ProjectionPair::atom_pair(alg, x, y, 1)?;
            let member = intrinsic_member(&product, &pair)?;
            let mut all_r_pass = true;
            for mask in 0..(1u32 << n) {
                let mut r = Operator::zeros(n);
                for z in 0..n {
                    if mask & (1 << z) != 0 {
                        r = r.add(&Operator::matrix_unit(n, z, z))?;
                    }
                }
                let r_pair = ProjectionPair::level_one(alg, pair.p().clone(), r.clone())?;
                let first = intrinsic_member(v1, &r_pair)?;
                let rc_pair = ProjectionPair::level_one(alg, r.complement(), pair.q().clone())?;
                let second = intrinsic_member(v2, &rc_pair)?;
                if !first && !second {
                    all_r_pass = false;
                    break;
                }
            }
            if member != all_r_pass {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
