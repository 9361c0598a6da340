//! Quantum uniform Roe algebra assembly and classification.
//!
//! At stabilization the union of the ladder is its top level, which the
//! structure axioms already make a unital *-algebra. Connectedness is
//! triviality of the Roe commutant; in finite dimension a connected Roe
//! algebra is forced to be everything (its double commutant), so the
//! classification collapses to full-or-disconnected and says so.

use crate::coarse::{build_ladder, CoarseStructure, Membership};
use crate::error::{Error, Result};
use crate::linalg::{self, cplx, CMatrix, Operator, OperatorSubspace};
use crate::qrel::QuantumRelation;
use crate::vna::{commutant_of_space, AlgebraHandle, RepresentedAlgebra};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct RoeAlgebra {
    algebra: AlgebraHandle,
    space: OperatorSubspace,
    commutant: OperatorSubspace,
    stabilized: bool,
    stabilization_level: Option<usize>,
}

impl RoeAlgebra {
    pub fn algebra(&self) -> &AlgebraHandle {
        &self.algebra
    }

    pub fn space(&self) -> &OperatorSubspace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn commutant_space(&self) -> &OperatorSubspace {
        &self.commutant
    }

    pub fn is_stabilized(&self) -> bool {
        self.stabilized
    }

    pub fn stabilization_level(&self) -> Option<usize> {
        self.stabilization_level
    }
}

/// Union of the ladder at stabilization. An unstabilized structure yields
/// the *-algebra generated by its top level, flagged as such.
pub fn assemble_roe(structure: &CoarseStructure) -> Result<RoeAlgebra> {
    let algebra = structure.algebra().clone();
    let n = algebra.ambient_dim();
    let tol = algebra.tol();
    if structure.is_stabilized() {
        if let Some(e) = structure.top().classical() {
            // A stabilized classical top contains the diagonal and is closed
            // under inverses and compositions, i.e. it is an equivalence
            // relation: the Roe algebra is the block sum over its classes
            // and its commutant is spanned by the class indicators.
            let classes = equivalence_classes(e);
            let mut commutant_basis = Vec::with_capacity(classes.len());
            for class in &classes {
                let mut ind = Operator::zeros(n);
                for &x in class {
                    ind = ind.add(&Operator::matrix_unit(n, x, x))?;
                }
                commutant_basis.push(ind.scale(cplx(1.0 / (class.len() as f64).sqrt(), 0.0)));
            }
            let commutant = OperatorSubspace::from_orthonormal_basis(n, commutant_basis, tol)?;
            return Ok(RoeAlgebra {
                algebra,
                space: structure.top().space().clone(),
                commutant,
                stabilized: true,
                stabilization_level: structure.stabilization_level(),
            });
        }
    }
    let space = if structure.is_stabilized() {
        structure.top().space().clone()
    } else {
        RepresentedAlgebra::from_generators(structure.top().space().basis(), n, tol)?
            .algebra_space()
            .clone()
    };
    // The assembled space must be a unital *-algebra containing M'.
    if !space.contains(&Operator::identity(n))? {
        return Err(Error::Precondition("assembled algebra lost the identity".into()));
    }
    if !space.contains_subspace(algebra.commutant_space())? {
        return Err(Error::Precondition(
            "assembled algebra does not contain the commutant".into(),
        ));
    }
    let commutant = commutant_of_space(&space, n, tol)?;
    Ok(RoeAlgebra {
        algebra,
        space,
        commutant,
        stabilized: structure.is_stabilized(),
        stabilization_level: structure.stabilization_level(),
    })
}

/// Connectedness: the Roe commutant is trivial.
pub fn is_connected(roe: &RoeAlgebra) -> Result<bool> {
    Ok(roe.commutant.dim() == 1)
}

/// Partition of the point set into the classes of an equivalence relation.
fn equivalence_classes(e: &crate::qrel::ClassicalRelation) -> Vec<Vec<usize>> {
    let n = e.points();
    let mut repr: Vec<usize> = (0..n).collect();
    fn root(repr: &mut Vec<usize>, mut x: usize) -> usize {
        while repr[x] != x {
            repr[x] = repr[repr[x]];
            x = repr[x];
        }
        x
    }
    for &(x, y) in e.pairs() {
        let rx = root(&mut repr, x);
        let ry = root(&mut repr, y);
        if rx != ry {
            repr[rx] = ry;
        }
    }
    let mut classes: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for x in 0..n {
        let r = root(&mut repr, x);
        classes.entry(r).or_default().push(x);
    }
    classes.into_values().collect()
}

/// The minimal coarse structure: generated by the diagonal relation alone.
/// Its members are exactly the direct summands `z M'` over central
/// projections of the commutant.
pub fn minimal_structure(algebra: AlgebraHandle) -> Result<CoarseStructure> {
    let diag = QuantumRelation::diagonal(algebra.clone())?;
    let depth = crate::coarse::default_max_depth(algebra.ambient_dim());
    build_ladder(algebra, &[diag], depth)
}

/// Splits a structure along a projection in the Roe commutant (necessarily
/// central in `M`): two structures over the compressed corners, with the
/// original generators compressed.
pub fn split_by_projection(
    structure: &CoarseStructure,
    roe: &RoeAlgebra,
    p: &Operator,
) -> Result<(CoarseStructure, CoarseStructure)> {
    let tol = structure.algebra().tol();
    if !p.is_projection(1e-8) {
        return Err(Error::NotAProjection {
            defect: p.mul(p)?.sub(p)?.hs_norm(),
            tol: 1e-8,
        });
    }
    if !roe.commutant_space().contains(p)? {
        return Err(Error::Precondition(
            "projection must lie in the Roe commutant".into(),
        ));
    }
    let rank = p.trace().re.round() as usize;
    let n = p.dim();
    if rank == 0 || rank == n {
        return Err(Error::Precondition("projection must be proper".into()));
    }
    let one = split_side(structure, p, rank, tol)?;
    let two = split_side(structure, &p.complement(), n - rank, tol)?;
    Ok((one, two))
}

fn split_side(
    structure: &CoarseStructure,
    p: &Operator,
    rank: usize,
    tol: f64,
) -> Result<CoarseStructure> {
    // Orthonormal basis of the range of p, as an isometry into C^n.
    let u = linalg::orthonormal_column_span(p.matrix(), tol);
    if u.ncols() != rank {
        return Err(Error::Precondition("projection rank is ambiguous".into()));
    }
    let compress = |a: &Operator| -> Operator {
        Operator::new(u.adjoint() * a.matrix() * &u).expect("finite compression")
    };
    let compressed_algebra: Vec<Operator> = structure
        .algebra()
        .algebra_space()
        .basis()
        .iter()
        .map(compress)
        .collect();
    let alg = Arc::new(RepresentedAlgebra::from_generators(
        &compressed_algebra,
        rank,
        tol,
    )?);
    let mut gens = Vec::with_capacity(structure.generators().len());
    for g in structure.generators() {
        let seeds: Vec<Operator> = g.space().basis().iter().map(compress).collect();
        gens.push(QuantumRelation::from_bimodule_closure(alg.clone(), &seeds)?);
    }
    build_ladder(alg, &gens, structure.max_depth())
}

/// Builds the coarse structure whose Roe algebra is a prescribed unital
/// *-algebra `A` containing `M'`, for multiplicity-free `M`: the generators
/// are the corner subspaces `z_i A z_j` over minimal central projections.
/// Refused, with a certificate commutant element outside `A`, when
/// `M'` is not contained in `A`.
pub fn structure_for_algebra(
    algebra: AlgebraHandle,
    candidate: &OperatorSubspace,
) -> Result<CoarseStructure> {
    if !algebra.is_multiplicity_free() {
        return Err(Error::NotMultiplicityFree);
    }
    for mprime in algebra.commutant_space().basis() {
        if !candidate.contains(mprime)? {
            return Err(Error::CommutantNotContained);
        }
    }
    let n = algebra.ambient_dim();
    let tol = algebra.tol();
    let zs = algebra.minimal_central_projections();
    let mut gens = Vec::new();
    for zi in zs {
        for zj in zs {
            let mut corner = Vec::new();
            for a in candidate.basis() {
                corner.push(zi.mul(a)?.mul(zj)?);
            }
            let space = linalg::orthonormalize_with_dim(&corner, n, tol)?;
            if space.dim() > 0 {
                gens.push(QuantumRelation::new(algebra.clone(), space)?);
            }
        }
    }
    build_ladder(algebra, &gens, crate::coarse::default_max_depth(n))
}

/// Certificate returned by a refused `structure_for_algebra`: a commutant
/// basis element outside the candidate.
pub fn commutant_containment_certificate(
    algebra: &RepresentedAlgebra,
    candidate: &OperatorSubspace,
) -> Result<Option<Operator>> {
    for mprime in algebra.commutant_space().basis() {
        if !candidate.contains(mprime)? {
            return Ok(Some(mprime.clone()));
        }
    }
    Ok(None)
}

/// Classification record. The three nontrivial cases that can coexist in
/// infinite dimension (relation equals everything / algebraic union equals
/// everything / closure equals everything) collapse here: a stabilized Roe
/// algebra is weak*-closed, so connected means full. The record says which
/// side of the remaining dichotomy holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrivialityCase {
    /// Some ladder level, equivalently the Roe algebra, is all of `B(H)`.
    FullAlgebra,
    /// The Roe commutant is nontrivial; the structure splits.
    Disconnected,
}

#[derive(Debug, Clone)]
pub struct TrivialityReport {
    pub case: TrivialityCase,
    pub roe_dim: usize,
    pub commutant_dim: usize,
    pub top_level_is_full: bool,
    pub stabilized: bool,
    pub stabilization_level: Option<usize>,
}

pub fn classify_triviality(roe: &RoeAlgebra) -> Result<TrivialityReport> {
    if !roe.is_stabilized() {
        return Err(Error::Precondition(
            "classification requires a stabilized structure".into(),
        ));
    }
    let n = roe.algebra().ambient_dim();
    let full = roe.dim() == n * n;
    let connected = is_connected(roe)?;
    let case = if connected {
        TrivialityCase::FullAlgebra
    } else {
        TrivialityCase::Disconnected
    };
    Ok(TrivialityReport {
        case,
        roe_dim: roe.dim(),
        commutant_dim: roe.commutant_space().dim(),
        top_level_is_full: full,
        stabilized: roe.is_stabilized(),
        stabilization_level: roe.stabilization_level(),
    })
}

/// Block-diagonal projection with constant entries `1/n_k` on each block:
/// per block, the rank-one projection onto the normalized all-ones vector.
pub fn make_ghost_projection(block_sizes: &[usize]) -> Result<Operator> {
    if block_sizes.iter().any(|&b| b == 0) {
        return Err(Error::InvalidBlocks("block sizes must be >= 1".into()));
    }
    let n: usize = block_sizes.iter().sum();
    let mut mat = CMatrix::zeros(n, n);
    let mut offset = 0;
    for &b in block_sizes {
        for r in 0..b {
            for c in 0..b {
                mat[(offset + r, offset + c)] = cplx(1.0 / b as f64, 0.0);
            }
        }
        offset += b;
    }
    Operator::new(mat)
}

#[derive(Debug, Clone)]
pub struct BlockOffdiagonalReport {
    pub passed: bool,
    /// Per block of size >= 2: (size, largest off-diagonal modulus, the
    /// lower bound forced by the norm precondition).
    pub blocks: Vec<(usize, f64, f64)>,
}

/// Checks that an operator close to the ghost projection has a nonzero
/// off-diagonal entry in every block of size at least 2.
///
/// The certificate comes from comparing actions on the normalized all-ones
/// block vector `v`: if all off-diagonal entries of a block had modulus at
/// most `delta`, then `||(q - p) v|| >= (1 - 1/b - eps) - (b - 1) delta`,
/// so `||q - p|| < eps` forces `delta >= (1 - 1/b - 2 eps) / (b - 1)`.
pub fn check_block_offdiagonal(
    q: &Operator,
    block_sizes: &[usize],
    eps: f64,
) -> Result<BlockOffdiagonalReport> {
    let p = make_ghost_projection(block_sizes)?;
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let dist = linalg::operator_norm(&q.sub(&p)?);
    if dist >= eps {
        return Err(Error::Precondition(format!(
            "||q - p|| = {dist:.4} is not below eps = {eps}"
        )));
    }
    let mut blocks = Vec::new();
    let mut passed = true;
    let mut offset = 0;
    for &b in block_sizes {
        if b >= 2 {
            let mut largest = 0.0f64;
            for r in 0..b {
                for c in 0..b {
                    if r != c {
                        largest = largest.max(q.entry(offset + r, offset + c).norm());
                    }
                }
            }
            let bound = ((1.0 - 1.0 / b as f64 - 2.0 * eps) / (b as f64 - 1.0)).max(0.0);
            if largest <= 0.0 {
                passed = false;
            }
            blocks.push((b, largest, bound));
        }
        offset += b;
    }
    Ok(BlockOffdiagonalReport { passed, blocks })
}

/// Checks the minimal-structure membership promise: the members over a
/// block algebra are exactly the direct summands `z M'` for central
/// projections `z` of `M'`, enumerated over all `2^l` of them.
pub fn minimal_structure_accepts_exactly_summands(
    algebra: &AlgebraHandle,
    structure: &CoarseStructure,
) -> Result<bool> {
    let ell = algebra.minimal_central_projections().len();
    // Central projections of M' coincide with central projections of M.
    for mask in 0..(1u32 << ell) {
        let mut z = Operator::zeros(algebra.ambient_dim());
        for (k, zk) in algebra.minimal_central_projections().iter().enumerate() {
            if mask & (1 << k) != 0 {
                z = z.add(zk)?;
            }
        }
        let mut seeds = Vec::new();
        for mprime in algebra.commutant_space().basis() {
            seeds.push(z.mul(mprime)?);
        }
        let space =
            linalg::orthonormalize_with_dim(&seeds, algebra.ambient_dim(), algebra.tol())?;
        let v = QuantumRelation::new(algebra.clone(), space)?;
        match structure.member_relation(&v)? {
            Membership::Yes(_) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;
    use crate::qrel::{relation_to_subspace, ClassicalRelation};
    use crate::sampling::Rng;

    fn diag(n: usize) -> AlgebraHandle {
        Arc::new(RepresentedAlgebra::diagonal(n, DEFAULT_TOL).unwrap())
    }

    fn path_structure(n: usize) -> (AlgebraHandle, CoarseStructure) {
        let alg = diag(n);
        let mut pairs = Vec::new();
        for i in 0..n - 1 {
            pairs.push((i, i + 1));
            pairs.push((i + 1, i));
        }
        let adj =
            relation_to_subspace(alg.clone(), &ClassicalRelation::new(n, pairs).unwrap()).unwrap();
        let s = build_ladder(alg.clone(), &[adj], 30).unwrap();
        (alg, s)
    }

    #[test]
    fn minimal_structure_roe_is_commutant() {
        let alg = diag(3);
        let s = minimal_structure(alg.clone()).unwrap();
        let roe = assemble_roe(&s).unwrap();
        assert_eq!(roe.dim(), 3);
        assert!(roe
            .space()
            .equals(alg.commutant_space())
            .unwrap());
    }

    #[test]
    fn path_graph_saturates_to_full_algebra() {
        let (_, s) = path_structure(4);
        let roe = assemble_roe(&s).unwrap();
        assert_eq!(roe.dim(), 16);
        assert!(is_connected(&roe).unwrap());
    }

    #[test]
    fn two_components_are_block_diagonal_and_disconnected() {
        let alg = diag(4);
        let comp = ClassicalRelation::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let gen = relation_to_subspace(alg.clone(), &comp).unwrap();
        let s = build_ladder(alg, &[gen], 20).unwrap();
        let roe = assemble_roe(&s).unwrap();
        assert_eq!(roe.dim(), 8);
        assert!(!is_connected(&roe).unwrap());
        assert!(roe.commutant_space().dim() >= 2);
    }

    #[test]
    fn scalars_structure_is_disconnected_over_full_matrix_algebra() {
        // M = M_2: relations inside C*1 generate a structure whose Roe
        // algebra is C*1, with commutant all of M_2.
        let alg = Arc::new(RepresentedAlgebra::from_blocks(&[(2, 1)], DEFAULT_TOL).unwrap());
        let s = minimal_structure(alg).unwrap();
        let roe = assemble_roe(&s).unwrap();
        assert_eq!(roe.dim(), 1);
        assert!(!is_connected(&roe).unwrap());
        assert_eq!(roe.commutant_space().dim(), 4);
    }

    #[test]
    fn roe_always_contains_commutant() {
        let (alg, s) = path_structure(4);
        let roe = assemble_roe(&s).unwrap();
        assert!(roe
            .space()
            .contains_subspace(alg.commutant_space())
            .unwrap());
    }

    #[test]
    fn split_two_component_space() {
        let alg = diag(4);
        let comp = ClassicalRelation::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let gen = relation_to_subspace(alg.clone(), &comp).unwrap();
        let s = build_ladder(alg, &[gen], 20).unwrap();
        let roe = assemble_roe(&s).unwrap();
        let p = Operator::matrix_unit(4, 0, 0)
            .add(&Operator::matrix_unit(4, 1, 1))
            .unwrap();
        let (left, right) = split_by_projection(&s, &roe, &p).unwrap();
        let roe_left = assemble_roe(&left).unwrap();
        let roe_right = assemble_roe(&right).unwrap();
        assert_eq!(roe_left.dim(), 4);
        assert_eq!(roe_right.dim(), 4);
        assert!(is_connected(&roe_left).unwrap());
        assert!(is_connected(&roe_right).unwrap());
    }

    #[test]
    fn split_rejects_projection_outside_commutant() {
        let (_, s) = path_structure(4);
        let roe = assemble_roe(&s).unwrap();
        let p = Operator::matrix_unit(4, 0, 0);
        // The path Roe algebra is everything, so only 0 and 1 commute.
        assert!(split_by_projection(&s, &roe, &p).is_err());
    }

    #[test]
    fn minimal_structure_membership_is_summands() {
        let alg = diag(3);
        let s = minimal_structure(alg.clone()).unwrap();
        assert!(minimal_structure_accepts_exactly_summands(&alg, &s).unwrap());
        // And a non-summand relation is rejected: a single off-diagonal cell.
        let e = ClassicalRelation::new(3, [(0, 1)]).unwrap();
        let v = relation_to_subspace(alg, &e).unwrap();
        assert_eq!(s.member_relation(&v).unwrap(), Membership::No);
    }

    #[test]
    fn minimal_structure_on_two_blocks() {
        // M = M_2 (+) M_3 multiplicity-free: the center has 2 minimal
        // projections and the minimal structure accepts all 4 summands.
        let alg = Arc::new(RepresentedAlgebra::from_blocks(&[(2, 1), (3, 1)], DEFAULT_TOL).unwrap());
        let s = minimal_structure(alg.clone()).unwrap();
        assert!(minimal_structure_accepts_exactly_summands(&alg, &s).unwrap());
    }

    #[test]
    fn structure_for_algebra_roundtrip() {
        // A = C*(M' and a symmetric cell) over l_inf(4).
        let alg = diag(4);
        let mut gens: Vec<Operator> = alg.commutant_space().basis().to_vec();
        gens.push(
            Operator::matrix_unit(4, 0, 1)
                .add(&Operator::matrix_unit(4, 1, 0))
                .unwrap(),
        );
        let a = RepresentedAlgebra::from_generators(&gens, 4, DEFAULT_TOL).unwrap();
        let s = structure_for_algebra(alg, a.algebra_space()).unwrap();
        let roe = assemble_roe(&s).unwrap();
        assert!(roe.space().equals(a.algebra_space()).unwrap());
    }

    #[test]
    fn structure_for_algebra_identity_cases() {
        let alg = diag(3);
        // A = M' gives the minimal structure's Roe algebra.
        let s = structure_for_algebra(alg.clone(), alg.commutant_space()).unwrap();
        let roe = assemble_roe(&s).unwrap();
        assert!(roe.space().equals(alg.commutant_space()).unwrap());
        // A = B(H) gives everything.
        let full = OperatorSubspace::full(3, DEFAULT_TOL);
        let s2 = structure_for_algebra(alg, &full).unwrap();
        let roe2 = assemble_roe(&s2).unwrap();
        assert_eq!(roe2.dim(), 9);
    }

    #[test]
    fn structure_for_algebra_refuses_missing_commutant() {
        let alg = diag(3);
        // A = C*1 does not contain the 3-dimensional commutant.
        let one = OperatorSubspace::from_orthonormal_basis(
            3,
            vec![Operator::identity(3).scale(cplx(1.0 / 3f64.sqrt(), 0.0))],
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(matches!(
            structure_for_algebra(alg.clone(), &one),
            Err(Error::CommutantNotContained)
        ));
        let cert = commutant_containment_certificate(&alg, &one).unwrap();
        assert!(cert.is_some());
        assert!(!one.contains(&cert.unwrap()).unwrap());
    }

    #[test]
    fn classify_full_and_disconnected() {
        let (_, s) = path_structure(4);
        let roe = assemble_roe(&s).unwrap();
        let report = classify_triviality(&roe).unwrap();
        assert_eq!(report.case, TrivialityCase::FullAlgebra);
        assert!(report.top_level_is_full);

        let alg = diag(3);
        let s2 = minimal_structure(alg).unwrap();
        let roe2 = assemble_roe(&s2).unwrap();
        let report2 = classify_triviality(&roe2).unwrap();
        assert_eq!(report2.case, TrivialityCase::Disconnected);
        assert_eq!(report2.commutant_dim, 3);
    }

    #[test]
    fn connectedness_matches_brute_force_commuting_projection_search() {
        // Connected iff no nontrivial projection commutes with every Roe
        // basis element; cross-check by scanning the commutant basis.
        let alg = diag(4);
        let comp = ClassicalRelation::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let gen = relation_to_subspace(alg, &comp).unwrap();
        let s = build_ladder(gen.algebra().clone(), &[gen.clone()], 20).unwrap();
        let roe = assemble_roe(&s).unwrap();
        let connected = is_connected(&roe).unwrap();
        // Brute force: the block projection onto {0,1} commutes with all.
        let p = Operator::matrix_unit(4, 0, 0)
            .add(&Operator::matrix_unit(4, 1, 1))
            .unwrap();
        let commutes = roe
            .space()
            .basis()
            .iter()
            .all(|b| p.commutes_with(b, 1e-9));
        assert_eq!(connected, !commutes);
    }

    #[test]
    fn ghost_projection_blocks() {
        let p = make_ghost_projection(&[1, 2, 3]).unwrap();
        assert!(p.is_projection(1e-12));
        // q = p passes: the off-diagonal entries are 1/n.
        let report = check_block_offdiagonal(&p, &[1, 2, 3], 0.1).unwrap();
        assert!(report.passed);
        assert_eq!(report.blocks.len(), 2);
        assert!((report.blocks[0].1 - 0.5).abs() < 1e-12);
        assert!((report.blocks[1].1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ghost_checker_rejects_diagonal_truncation_by_precondition() {
        // The diagonal part of p is 1/2 away from p on a block of size 2.
        let p = make_ghost_projection(&[2]).unwrap();
        let diag_part = Operator::from_fn(2, |r, c| {
            if r == c {
                p.entry(r, c)
            } else {
                cplx(0.0, 0.0)
            }
        });
        let dist = linalg::operator_norm(&diag_part.sub(&p).unwrap());
        assert!((dist - 0.5).abs() < 1e-12);
        assert!(check_block_offdiagonal(&diag_part, &[2], 0.1).is_err());
    }

    #[test]
    fn ghost_checker_survives_random_perturbations() {
        let sizes = [1, 2, 3, 5];
        let p = make_ghost_projection(&sizes).unwrap();
        let n = p.dim();
        let mut rng = Rng::new(12);
        for _ in 0..100 {
            let noise = rng.gaussian_operator(n);
            let scaled = noise.scale(cplx(0.05 / linalg::operator_norm(&noise), 0.0));
            let q = p.add(&scaled).unwrap();
            let report = check_block_offdiagonal(&q, &sizes, 0.1).unwrap();
            assert!(report.passed);
        }
    }
}
