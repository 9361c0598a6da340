//! Quantum functions and the morphism checkers.
//!
//! Two constructible shapes of quantum function ship here: the classical
//! bridge `g -> g o f` of a point map `f: X -> Y` (a unital *-homomorphism
//! `l_inf(Y) -> l_inf(X)`), and spatially implemented homomorphisms
//! `a -> u* a u` with a central kernel projection. Coarseness, expansion,
//! coboundedness and closeness are decided exactly on classical instances;
//! the spatial route certifies coarseness through sampled annihilator
//! supersets, whose `Yes` answers are sound and whose failures stay
//! `Unknown`.

use crate::coarse::{CoarseStructure, GridValue, Membership, QuantumMetric, VerdictMode};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Operator, OperatorSubspace};
use crate::qrel::{
    subspace_to_relation, ClassicalCoarseStructure, ClassicalRelation, ProjectionPair,
    QuantumRelation,
};
use crate::qura::RoeAlgebra;
use crate::sampling::Rng;
use crate::vna::{AlgebraHandle, RepresentedAlgebra};
use std::sync::Arc;

/// A unital *-homomorphism between represented algebras, in one of the two
/// constructible shapes.
#[derive(Debug, Clone)]
pub enum QuantumFunction {
    /// `phi_f : l_inf(Y) -> l_inf(X)`, `g -> g o f`, for `f: X -> Y`.
    /// The quantum-function source is the diagonal algebra on `Y`.
    ClassicalBridge {
        map: Vec<usize>,
        source: AlgebraHandle,
        target: AlgebraHandle,
    },
    /// `a -> u* a u` with `u: H_N -> H_M` an isometry onto the range of a
    /// central projection `r` of the source `M`.
    SpatialHom {
        source: AlgebraHandle,
        target: AlgebraHandle,
        kernel: Operator,
        isometry: CMatrix,
    },
}

impl QuantumFunction {
    /// Bridge of a total point map `f: X -> Y` given as `map[x] = f(x)`.
    pub fn from_classical_function(map: &[usize], codomain: usize, tol: f64) -> Result<Self> {
        if map.iter().any(|&y| y >= codomain) {
            return Err(Error::InvalidQuantumFunction(
                "map value outside the codomain".into(),
            ));
        }
        let source = Arc::new(RepresentedAlgebra::diagonal(codomain, tol)?);
        let target = Arc::new(RepresentedAlgebra::diagonal(map.len(), tol)?);
        Ok(Self::ClassicalBridge {
            map: map.to_vec(),
            source,
            target,
        })
    }

    /// Spatial homomorphism from an isometry `u: H_N -> H_M`. Validates
    /// `u* u = 1`, that `r = u u*` is a central projection of the source,
    /// and that compression carries the source algebra into the target.
    pub fn spatial(
        source: AlgebraHandle,
        target: AlgebraHandle,
        isometry: CMatrix,
    ) -> Result<Self> {
        let (nm, nn) = (source.ambient_dim(), target.ambient_dim());
        if isometry.nrows() != nm || isometry.ncols() != nn {
            return Err(Error::InvalidQuantumFunction(format!(
                "isometry must be {nm} x {nn}, found {} x {}",
                isometry.nrows(),
                isometry.ncols()
            )));
        }
        let tol = source.tol().max(1e-9);
        let gram = isometry.adjoint() * &isometry;
        if (&gram - CMatrix::identity(nn, nn)).norm() > tol * 10.0 {
            return Err(Error::InvalidQuantumFunction("u* u must be 1".into()));
        }
        let kernel = Operator::new(&isometry * isometry.adjoint())?;
        if !source.contains(&kernel)?
            || !source.commutant_space().contains(&kernel)?
        {
            return Err(Error::InvalidQuantumFunction(
                "u u* must be a central projection of the source".into(),
            ));
        }
        let hom = Self::SpatialHom {
            source,
            target,
            kernel,
            isometry,
        };
        hom.verify()?;
        Ok(hom)
    }

    /// Spatial realization of an injective point map `f: X' -> X` between
    /// diagonal algebras: the isometry sends the basis of `l_2(X')` onto the
    /// selected coordinates. The quantum function runs `l_inf(X) ->
    /// l_inf(X')` by restriction.
    pub fn spatial_from_injection(
        map: &[usize],
        source: AlgebraHandle,
        tol: f64,
    ) -> Result<Self> {
        let n = source.ambient_dim();
        let mut seen = vec![false; n];
        for &x in map {
            if x >= n || seen[x] {
                return Err(Error::InvalidQuantumFunction(
                    "injection must hit distinct points of the source".into(),
                ));
            }
            seen[x] = true;
        }
        let target = Arc::new(RepresentedAlgebra::diagonal(map.len(), tol)?);
        let mut u = CMatrix::zeros(n, map.len());
        for (xp, &x) in map.iter().enumerate() {
            u[(x, xp)] = linalg::cplx(1.0, 0.0);
        }
        Self::spatial(source, target, u)
    }

    pub fn source(&self) -> &AlgebraHandle {
        match self {
            Self::ClassicalBridge { source, .. } | Self::SpatialHom { source, .. } => source,
        }
    }

    pub fn target(&self) -> &AlgebraHandle {
        match self {
            Self::ClassicalBridge { target, .. } | Self::SpatialHom { target, .. } => target,
        }
    }

    /// The underlying point map of a bridge.
    pub fn classical_map(&self) -> Option<&[usize]> {
        match self {
            Self::ClassicalBridge { map, .. } => Some(map),
            Self::SpatialHom { .. } => None,
        }
    }

    /// Applies the homomorphism to an element of the source algebra.
    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        match self {
            Self::ClassicalBridge { map, source, target } => {
                if a.dim() != source.ambient_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: source.ambient_dim(),
                        found: a.dim(),
                    });
                }
                if !source.contains(a)? {
                    return Err(Error::Precondition(
                        "bridge applies to diagonal elements only".into(),
                    ));
                }
                Ok(Operator::from_fn(target.ambient_dim(), |r, c| {
                    if r == c {
                        a.entry(map[r], map[r])
                    } else {
                        linalg::cplx(0.0, 0.0)
                    }
                }))
            }
            Self::SpatialHom { isometry, .. } => {
                Operator::new(isometry.adjoint() * a.matrix() * isometry)
            }
        }
    }

    /// `(phi (x) 1_k)` applied to an element of `M (x) M_k`.
    pub fn apply_amplified(&self, p: &Operator, level: usize) -> Result<Operator> {
        match self {
            Self::ClassicalBridge { map, source, target } => {
                let k = level;
                if p.dim() != source.ambient_dim() * k {
                    return Err(Error::DimensionMismatch {
                        expected: source.ambient_dim() * k,
                        found: p.dim(),
                    });
                }
                // Elements of l_inf(Y) (x) M_k are block diagonal per atom;
                // the bridge replays the f(x) block at each x.
                let nx = target.ambient_dim();
                Ok(Operator::from_fn(nx * k, |r, c| {
                    let (xr, i) = (r / k, r % k);
                    let (xc, j) = (c / k, c % k);
                    if xr == xc {
                        p.entry(map[xr] * k + i, map[xr] * k + j)
                    } else {
                        linalg::cplx(0.0, 0.0)
                    }
                }))
            }
            Self::SpatialHom { isometry, .. } => {
                let uk = Operator::new(isometry.clone())?.kron(&Operator::identity(level));
                Operator::new(uk.matrix().adjoint() * p.matrix() * uk.matrix())
            }
        }
    }

    /// Checks unitality and multiplicativity/adjoint-preservation on the
    /// source basis.
    pub fn verify(&self) -> Result<()> {
        let source = self.source();
        let target = self.target();
        let tol = source.tol().max(1e-8);
        let one = self.apply(&Operator::identity(source.ambient_dim()))?;
        if one
            .sub(&Operator::identity(target.ambient_dim()))?
            .hs_norm()
            > tol * 10.0
        {
            return Err(Error::InvalidQuantumFunction("not unital".into()));
        }
        for a in source.algebra_space().basis() {
            let fa = self.apply(a)?;
            if !target.contains(&fa)? {
                return Err(Error::InvalidQuantumFunction(
                    "image leaves the target algebra".into(),
                ));
            }
            let fa_star = self.apply(&a.adjoint())?;
            if fa_star.sub(&fa.adjoint())?.hs_norm() > tol * 10.0 {
                return Err(Error::InvalidQuantumFunction("not *-preserving".into()));
            }
            for b in source.algebra_space().basis() {
                let fab = self.apply(&a.mul(b)?)?;
                let prod = fa.mul(&self.apply(b)?)?;
                if fab.sub(&prod)?.hs_norm() > tol * 10.0 {
                    return Err(Error::InvalidQuantumFunction("not multiplicative".into()));
                }
            }
        }
        Ok(())
    }
}

/// Image relation `(f x f)(E)` of a classical relation under a point map.
pub fn pullback_image(
    map: &[usize],
    e: &ClassicalRelation,
    codomain: usize,
) -> Result<ClassicalRelation> {
    e.map_image(map, codomain)
}

/// Three-valued coarseness verdict with per-generator certificates.
#[derive(Debug, Clone)]
pub struct CoarseVerdict {
    pub verdict: Membership,
    /// Ladder level certifying each generator of the probe structure, when
    /// found.
    pub generator_levels: Vec<Option<usize>>,
    pub mode: VerdictMode,
}

/// Whether the quantum function is coarse: every pullback of a relation of
/// the structure on the codomain algebra lands in the structure on the
/// domain algebra.
///
/// Checking generators suffices: pullbacks are monotone, commute with
/// unions and inverses, and land inside compositions of pullbacks, so
/// membership of the generator pullbacks forces membership of every derived
/// member.
///
/// - Bridge: exact, through the classical saturations on both sides.
/// - Spatial: for each generator `U`, forbidden pairs of the pullback are
///   harvested (the kernel annihilators plus sampled `(phi_U(q)^perp, q)`
///   pairs pushed through the isometry) and the annihilator superset is
///   tested for membership. `Yes` is sound; anything else stays `Unknown`.
pub fn is_coarse(
    phi: &QuantumFunction,
    codomain_structure: &CoarseStructure,
    domain_structure: &CoarseStructure,
    samples: usize,
    seed: u64,
) -> Result<CoarseVerdict> {
    match phi {
        QuantumFunction::ClassicalBridge { map, source, .. } => {
            let y_points = source.ambient_dim();
            let mut levels = Vec::new();
            let mut verdict = Membership::Yes(0);
            for gen in codomain_structure.generators() {
                let e = subspace_to_relation(gen)?;
                let image = e.map_image(map, y_points)?;
                let v = crate::qrel::relation_to_subspace(
                    domain_structure.algebra().clone(),
                    &image,
                )?;
                match domain_structure.member_relation(&v)? {
                    Membership::Yes(level) => levels.push(Some(level)),
                    Membership::No => {
                        levels.push(None);
                        verdict = Membership::No;
                    }
                    Membership::Unknown => {
                        levels.push(None);
                        if verdict != Membership::No {
                            verdict = Membership::Unknown;
                        }
                    }
                }
            }
            if matches!(verdict, Membership::Yes(_)) {
                let top = levels.iter().map(|l| l.unwrap_or(0)).max().unwrap_or(0);
                verdict = Membership::Yes(top);
            }
            Ok(CoarseVerdict {
                verdict,
                generator_levels: levels,
                mode: VerdictMode::Exact,
            })
        }
        QuantumFunction::SpatialHom {
            source,
            target,
            kernel,
            isometry,
        } => {
            let mut rng = Rng::new(seed);
            let mut levels = Vec::new();
            let mut all_yes = true;
            for gen in codomain_structure.generators() {
                let v_tilde = pullback_annihilator_superset(
                    source, target, kernel, isometry, gen, samples, &mut rng,
                )?;
                match domain_structure.member_relation(&v_tilde)? {
                    Membership::Yes(level) => levels.push(Some(level)),
                    _ => {
                        levels.push(None);
                        all_yes = false;
                    }
                }
            }
            let verdict = if all_yes {
                Membership::Yes(levels.iter().map(|l| l.unwrap_or(0)).max().unwrap_or(0))
            } else {
                Membership::Unknown
            };
            Ok(CoarseVerdict {
                verdict,
                generator_levels: levels,
                mode: VerdictMode::Sampled { samples, seed },
            })
        }
    }
}

/// Builds a bimodule superset of the pullback relation of `gen` under a
/// spatial homomorphism, from harvested forbidden pairs: anything not
/// reduced by the kernel corner dies, and for each probed projection `q`
/// of the target the pair `(phi_gen(q)^perp, q)` is pushed through the
/// isometry.
fn pullback_annihilator_superset(
    source: &AlgebraHandle,
    target: &AlgebraHandle,
    kernel: &Operator,
    isometry: &CMatrix,
    gen: &QuantumRelation,
    samples: usize,
    rng: &mut Rng,
) -> Result<QuantumRelation> {
    let nm = source.ambient_dim();
    let tol = source.tol();
    let push = |b: &Operator| -> Result<Operator> {
        Operator::new(isometry * b.matrix() * isometry.adjoint())
    };
    let mut constraints: Vec<CMatrix> = Vec::new();
    // (1 - r) a = 0 and a (1 - r) = 0: the pullback lives in the corner.
    let complement = kernel.complement();
    constraints.push(linalg::constraint_from_linear_map(nm, |a| {
        complement.mul(a).unwrap()
    }));
    constraints.push(linalg::constraint_from_linear_map(nm, |a| {
        a.mul(&complement).unwrap()
    }));
    let mut qs = crate::vna::canonical_projections(target)?;
    for _ in 0..samples {
        qs.push(crate::vna::sample_projection(target, rng)?);
    }
    for q in &qs {
        let p_perp = crate::qrel::phi_v(gen, q)?.complement();
        let q_m = push(q)?;
        let p_m = push(&p_perp)?;
        constraints.push(linalg::constraint_from_linear_map(nm, |a| {
            p_m.mul(a).unwrap().mul(&q_m).unwrap()
        }));
    }
    let space = linalg::nullspace_of_constraints(&constraints, nm, tol)?;
    QuantumRelation::new(source.clone(), space)
}

/// Expansion of a bridge through the quantum ladders: the map is expanding
/// exactly when the preimage of the top codomain relation belongs to the
/// domain-side structure. Any relation whose pullback sits in the codomain
/// structure is contained in that maximal preimage, so downward closure
/// reduces the quantifier to this single membership test.
pub fn is_expanding_bridge(
    phi: &QuantumFunction,
    domain_structure: &CoarseStructure,
    codomain_structure: &CoarseStructure,
) -> Result<Membership> {
    let QuantumFunction::ClassicalBridge { map, .. } = phi else {
        return Err(Error::InvalidQuantumFunction(
            "expanding check ships for bridges only".into(),
        ));
    };
    if !codomain_structure.is_stabilized() {
        return Ok(Membership::Unknown);
    }
    let top = subspace_to_relation(codomain_structure.top())?;
    let nx = domain_structure.algebra().ambient_dim();
    let preimage = top.map_preimage(map, nx)?;
    let v = crate::qrel::relation_to_subspace(domain_structure.algebra().clone(), &preimage)?;
    domain_structure.member_relation(&v)
}

/// Classical expansion: preimages of codomain entourages are entourages of
/// the domain, decided on the saturated tops.
pub fn is_expanding_classical(
    map: &[usize],
    domain: &ClassicalCoarseStructure,
    codomain: &ClassicalCoarseStructure,
) -> Result<bool> {
    let preimage = codomain.top().map_preimage(map, domain.points())?;
    Ok(domain.member(&preimage))
}

/// Classical coarseness on saturated structures, for cross-checking the
/// bridge route.
pub fn is_coarse_classical(
    map: &[usize],
    domain: &ClassicalCoarseStructure,
    codomain: &ClassicalCoarseStructure,
) -> Result<bool> {
    let image = domain.top().map_image(map, codomain.points())?;
    Ok(codomain.member(&image))
}

/// Classical coboundedness: some entourage links every codomain point to an
/// image point; on the saturation it suffices to test the top.
pub fn is_cobounded_classical(
    map: &[usize],
    codomain: &ClassicalCoarseStructure,
) -> Result<bool> {
    let top = codomain.top();
    let n = codomain.points();
    'outer: for y in 0..n {
        for &fx in map {
            if top.contains_pair(y, fx) {
                continue 'outer;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Classical closeness: the pairs `(f(x), g(x))` all sit inside one
/// entourage of the codomain structure.
pub fn are_close_classical(
    f: &[usize],
    g: &[usize],
    codomain: &ClassicalCoarseStructure,
) -> Result<bool> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: g.len(),
        });
    }
    Ok(f.iter().zip(g).all(|(&fx, &gx)| codomain.top().contains_pair(fx, gx)))
}

#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    /// Whether each basis element of the embedded Roe algebra lands inside
    /// the receiving one.
    pub basis_contained: Vec<bool>,
    pub all_contained: bool,
    pub image: OperatorSubspace,
}

/// Spatial embedding of Roe algebras along a surjective coarse quantum
/// function: `b -> u b u*` carries the codomain Roe algebra into the domain
/// one; the report certifies each basis element and returns the image span.
pub fn embed_roe(
    phi: &QuantumFunction,
    roe_codomain: &RoeAlgebra,
    roe_domain: &RoeAlgebra,
) -> Result<EmbeddingReport> {
    let QuantumFunction::SpatialHom { isometry, .. } = phi else {
        return Err(Error::InvalidQuantumFunction(
            "embedding requires a spatial homomorphism".into(),
        ));
    };
    let mut contained = Vec::new();
    let mut images = Vec::new();
    for b in roe_codomain.space().basis() {
        let image = Operator::new(isometry * b.matrix() * isometry.adjoint())?;
        contained.push(roe_domain.space().contains(&image)?);
        images.push(image);
    }
    let image = linalg::orthonormalize_with_dim(
        &images,
        roe_domain.algebra().ambient_dim(),
        roe_domain.algebra().tol(),
    )?;
    let all = contained.iter().all(|&c| c);
    Ok(EmbeddingReport {
        basis_contained: contained,
        all_contained: all,
        image,
    })
}

/// Whether the embedded image is exactly the hereditary corner
/// `r Roe r`.
pub fn hereditary_image_check(
    report: &EmbeddingReport,
    roe_domain: &RoeAlgebra,
    r: &Operator,
) -> Result<bool> {
    let mut corner = Vec::new();
    for b in roe_domain.space().basis() {
        corner.push(r.mul(b)?.mul(r)?);
    }
    let corner_space = linalg::orthonormalize_with_dim(
        &corner,
        roe_domain.algebra().ambient_dim(),
        roe_domain.algebra().tol(),
    )?;
    report.image.equals(&corner_space)
}

#[derive(Debug, Clone)]
pub struct ModulusTable {
    pub entries: Vec<(f64, GridValue)>,
    pub mode: VerdictMode,
}

/// Compression modulus: for each grid `t` of the domain metric, the least
/// codomain distance between images of projections at distance `>= t`.
/// Exact over a bridge (atom pairs decide, since distances of joins are the
/// least pair distances); sampled otherwise. The output is forced monotone
/// nondecreasing by a running maximum.
pub fn tilde_omega(
    phi: &QuantumFunction,
    qm_domain: &QuantumMetric,
    qm_codomain: &QuantumMetric,
    samples: usize,
    seed: u64,
) -> Result<ModulusTable> {
    let source = phi.source();
    let mut pairs: Vec<(Operator, Operator)> = Vec::new();
    let mode = match phi {
        QuantumFunction::ClassicalBridge { .. } => {
            let n = source.ambient_dim();
            for y1 in 0..n {
                for y2 in 0..n {
                    pairs.push((
                        Operator::matrix_unit(n, y1, y1),
                        Operator::matrix_unit(n, y2, y2),
                    ));
                }
            }
            VerdictMode::Exact
        }
        QuantumFunction::SpatialHom { .. } => {
            let mut rng = Rng::new(seed);
            for _ in 0..samples {
                pairs.push((
                    crate::vna::sample_projection(source, &mut rng)?,
                    crate::vna::sample_projection(source, &mut rng)?,
                ));
            }
            VerdictMode::Sampled { samples, seed }
        }
    };
    // Distance of each pair and of its image.
    let mut measured: Vec<(GridValue, GridValue)> = Vec::new();
    for (p, q) in &pairs {
        let d_in = qm_domain.v_distance(&ProjectionPair::level_one(
            source,
            p.clone(),
            q.clone(),
        )?)?;
        let fp = phi.apply(p)?;
        let fq = phi.apply(q)?;
        let d_out = qm_codomain.v_distance(&ProjectionPair::level_one(
            phi.target(),
            fp,
            fq,
        )?)?;
        measured.push((d_in, d_out));
    }
    let mut entries = Vec::new();
    let mut running = GridValue::Finite(0.0);
    for &t in qm_domain.grid() {
        // inf of image distances over pairs with d_in >= t.
        let mut best: Option<GridValue> = None;
        for (d_in, d_out) in &measured {
            let beyond = match d_in {
                GridValue::Infinite => true,
                GridValue::Finite(d) => *d >= t - 1e-12,
            };
            if beyond {
                best = Some(match best {
                    None => *d_out,
                    Some(GridValue::Infinite) => *d_out,
                    Some(GridValue::Finite(b)) => match d_out {
                        GridValue::Finite(d) => GridValue::Finite(b.min(*d)),
                        GridValue::Infinite => GridValue::Finite(b),
                    },
                });
            }
        }
        let value = best.unwrap_or(GridValue::Infinite);
        running = running.max(value);
        entries.push((t, running));
    }
    Ok(ModulusTable { entries, mode })
}

/// Expansion modulus: for each grid `t` of the domain metric, the largest
/// codomain diameter of an image of a projection of diameter at most `t`.
/// Exact over a bridge (atom-generated projections); sampled otherwise.
pub fn tilde_rho(
    phi: &QuantumFunction,
    qm_domain: &QuantumMetric,
    qm_codomain: &QuantumMetric,
    samples: usize,
    seed: u64,
) -> Result<ModulusTable> {
    let source = phi.source();
    let mut projections: Vec<Operator> = Vec::new();
    let mode = match phi {
        QuantumFunction::ClassicalBridge { .. } => {
            let n = source.ambient_dim();
            for mask in 1u32..(1 << n) {
                let mut p = Operator::zeros(n);
                for x in 0..n {
                    if mask & (1 << x) != 0 {
                        p = p.add(&Operator::matrix_unit(n, x, x))?;
                    }
                }
                projections.push(p);
            }
            VerdictMode::Exact
        }
        QuantumFunction::SpatialHom { .. } => {
            let mut rng = Rng::new(seed);
            for _ in 0..samples {
                projections.push(crate::vna::sample_projection(source, &mut rng)?);
            }
            VerdictMode::Sampled { samples, seed }
        }
    };
    let mut measured = Vec::new();
    for p in &projections {
        let d_in = qm_domain.diameter(p, samples, seed)?;
        let fp = phi.apply(p)?;
        let d_out = qm_codomain.diameter(&fp, samples, seed)?;
        measured.push((d_in.value, d_out.value));
    }
    let mut entries = Vec::new();
    let mut running = GridValue::Finite(0.0);
    for &t in qm_domain.grid() {
        let mut worst = GridValue::Finite(0.0);
        for (d_in, d_out) in &measured {
            let within = match d_in {
                GridValue::Infinite => false,
                GridValue::Finite(d) => *d <= t + 1e-12,
            };
            if within {
                worst = worst.max(*d_out);
            }
        }
        running = running.max(worst);
        entries.push((t, running));
    }
    Ok(ModulusTable { entries, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::{build_ladder, metric_to_quantum};
    use crate::linalg::DEFAULT_TOL;
    use crate::qrel::relation_to_subspace;
    use crate::qura::assemble_roe;

    fn diag(n: usize) -> AlgebraHandle {
        Arc::new(RepresentedAlgebra::diagonal(n, DEFAULT_TOL).unwrap())
    }

    fn band(n: usize, r: usize) -> ClassicalRelation {
        ClassicalRelation::new(
            n,
            (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| x.abs_diff(y) <= r),
        )
        .unwrap()
    }

    fn line_metric(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|x| (0..n).map(|y| x.abs_diff(y) as f64).collect())
            .collect()
    }

    #[test]
    fn bridge_roundtrip_recovers_map() {
        let f = [2usize, 0, 3, 3, 1];
        let phi = QuantumFunction::from_classical_function(&f, 4, DEFAULT_TOL).unwrap();
        phi.verify().unwrap();
        assert_eq!(phi.classical_map().unwrap(), &f);
        // phi(e_yy) = sum over the fiber of y.
        let img = phi
            .apply(&Operator::matrix_unit(4, 3, 3))
            .unwrap();
        let expected = Operator::matrix_unit(5, 2, 2)
            .add(&Operator::matrix_unit(5, 3, 3))
            .unwrap();
        assert!(img.sub(&expected).unwrap().hs_norm() < 1e-12);
        // Reading the map back from atom containments.
        let mut recovered = Vec::new();
        for x in 0..5usize {
            let atom = Operator::matrix_unit(5, x, x);
            let y = (0..4usize)
                .find(|&y| {
                    let fy = phi.apply(&Operator::matrix_unit(4, y, y)).unwrap();
                    fy.mul(&atom).unwrap().sub(&atom).unwrap().hs_norm() < 1e-12
                })
                .unwrap();
            recovered.push(y);
        }
        assert_eq!(recovered, f.to_vec());
    }

    #[test]
    fn bridge_constant_map() {
        let phi = QuantumFunction::from_classical_function(&[1, 1, 1], 2, DEFAULT_TOL).unwrap();
        let all = phi.apply(&Operator::matrix_unit(2, 1, 1)).unwrap();
        assert!(all.sub(&Operator::identity(3)).unwrap().hs_norm() < 1e-12);
        let none = phi.apply(&Operator::matrix_unit(2, 0, 0)).unwrap();
        assert_eq!(none.hs_norm(), 0.0);
    }

    #[test]
    fn pullback_image_cases() {
        let f = [0usize, 0, 1];
        let e = ClassicalRelation::diagonal(3);
        let img = pullback_image(&f, &e, 2).unwrap();
        assert_eq!(img, ClassicalRelation::new(2, [(0, 0), (1, 1)]).unwrap());
        let full = ClassicalRelation::full(3);
        let img2 = pullback_image(&f, &full, 2).unwrap();
        assert_eq!(img2, ClassicalRelation::full(2));
    }

    #[test]
    fn identity_bridge_is_coarse() {
        let alg = diag(4);
        let gen = relation_to_subspace(alg.clone(), &band(4, 1)).unwrap();
        let s = build_ladder(alg.clone(), &[gen], 20).unwrap();
        let phi =
            QuantumFunction::from_classical_function(&[0, 1, 2, 3], 4, DEFAULT_TOL).unwrap();
        let v = is_coarse(&phi, &s, &s, 0, 0).unwrap();
        assert!(matches!(v.verdict, Membership::Yes(_)));
        assert_eq!(v.mode, VerdictMode::Exact);
    }

    #[test]
    fn collapse_to_point_is_coarse_into_minimal() {
        // A constant map out of a disconnected space into a point.
        let alg = diag(4);
        let comp = ClassicalRelation::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let gen = relation_to_subspace(alg.clone(), &comp).unwrap();
        let s_x = build_ladder(alg, &[gen], 20).unwrap();
        let point = diag(1);
        let s_y = crate::qura::minimal_structure(point).unwrap();
        let phi = QuantumFunction::from_classical_function(&[0, 0, 0, 0], 1, DEFAULT_TOL).unwrap();
        let v = is_coarse(&phi, &s_x, &s_y, 0, 0).unwrap();
        assert!(matches!(v.verdict, Membership::Yes(_)));
    }

    #[test]
    fn doubling_map_coarseness_depends_on_reach() {
        // f(x) = 2x from {0..4} into {0..9}; the band-1 generator on the
        // domain side pushes to distance-2 pairs, inside the codomain
        // structure generated by band 1 there (which saturates), but a
        // depth-limited codomain ladder leaves it unknown.
        let f: Vec<usize> = (0..5).map(|x| 2 * x).collect();
        let alg_x = diag(5);
        let alg_y = diag(10);
        let gen_x = relation_to_subspace(alg_x.clone(), &band(5, 1)).unwrap();
        let s_x = build_ladder(alg_x, &[gen_x], 20).unwrap();
        let gen_y = relation_to_subspace(alg_y.clone(), &band(10, 1)).unwrap();
        let s_y_full = build_ladder(alg_y.clone(), &[gen_y.clone()], 20).unwrap();
        let phi = QuantumFunction::from_classical_function(&f, 10, DEFAULT_TOL).unwrap();
        let v = is_coarse(&phi, &s_x, &s_y_full, 0, 0).unwrap();
        assert!(matches!(v.verdict, Membership::Yes(_)));
        let s_y_short = build_ladder(alg_y, &[gen_y], 1).unwrap();
        let v2 = is_coarse(&phi, &s_x, &s_y_short, 0, 0).unwrap();
        assert_eq!(v2.verdict, Membership::Unknown);
    }

    #[test]
    fn spatial_identity_is_coarse_sampled() {
        let alg = diag(3);
        let gen = relation_to_subspace(alg.clone(), &band(3, 1)).unwrap();
        let s = build_ladder(alg.clone(), &[gen], 20).unwrap();
        let phi = QuantumFunction::spatial(
            alg.clone(),
            alg.clone(),
            CMatrix::identity(3, 3),
        )
        .unwrap();
        let v = is_coarse(&phi, &s, &s, 10, 3).unwrap();
        assert!(matches!(v.verdict, Membership::Yes(_)));
        assert!(matches!(v.mode, VerdictMode::Sampled { .. }));
    }

    #[test]
    fn classical_checkers_on_isometry() {
        // The inclusion {0..4} -> {0..9} as an interval: expanding and
        // cobounded over band structures.
        let f: Vec<usize> = (0..5).collect();
        let sx = ClassicalCoarseStructure::generated_by(5, &[band(5, 1)]).unwrap();
        let sy = ClassicalCoarseStructure::generated_by(10, &[band(10, 1)]).unwrap();
        assert!(is_coarse_classical(&f, &sx, &sy).unwrap());
        assert!(is_expanding_classical(&f, &sx, &sy).unwrap());
        assert!(is_cobounded_classical(&f, &sy).unwrap());
    }

    #[test]
    fn cobounded_fails_into_disconnected_target() {
        // Image inside one component of a two-component space.
        let f = [0usize, 0];
        let comp = ClassicalRelation::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let sy = ClassicalCoarseStructure::generated_by(4, &[comp]).unwrap();
        assert!(!is_cobounded_classical(&f, &sy).unwrap());
    }

    #[test]
    fn equal_maps_are_close() {
        let f = [0usize, 2, 1];
        let sy = ClassicalCoarseStructure::generated_by(3, &[]).unwrap();
        assert!(are_close_classical(&f, &f, &sy).unwrap());
        let g = [0usize, 1, 1];
        assert!(!are_close_classical(&f, &g, &sy).unwrap());
    }

    #[test]
    fn permutation_embedding_is_isomorphism() {
        // A bijective coarse equivalence realized as a permutation
        // conjugation maps Roe onto Roe.
        let n = 5;
        let perm = [2usize, 0, 4, 1, 3];
        let alg_x = diag(n);
        let e = band(n, 1);
        let gen_x = relation_to_subspace(alg_x.clone(), &e).unwrap();
        let s_x = build_ladder(alg_x.clone(), &[gen_x], 20).unwrap();
        let roe_x = assemble_roe(&s_x).unwrap();
        // Pushforward structure on the target so the permutation is an
        // equivalence.
        let pushed = e.map_image(&perm, n).unwrap();
        let alg_y = diag(n);
        let gen_y = relation_to_subspace(alg_y.clone(), &pushed).unwrap();
        let s_y = build_ladder(alg_y.clone(), &[gen_y], 20).unwrap();
        let roe_y = assemble_roe(&s_y).unwrap();
        // Spatial realization: u delta_x = delta_{perm(x)}, so phi = Ad(u*)
        // runs from l_inf(Y) to l_inf(X); the embedding b -> u b u* carries
        // the Roe algebra over X onto the one over Y.
        let phi = QuantumFunction::spatial_from_injection(&perm, alg_y, DEFAULT_TOL).unwrap();
        let report = embed_roe(&phi, &roe_x, &roe_y).unwrap();
        assert!(report.all_contained);
        assert_eq!(report.image.dim(), roe_y.dim());
        assert!(hereditary_image_check(&report, &roe_y, &Operator::identity(n)).unwrap());
    }

    #[test]
    fn interval_restriction_embeds_as_corner() {
        // The subspace {0,1,2} of a 5-point line: the embedded image is the
        // hereditary corner r Roe r.
        let n = 5;
        let alg_x = diag(n);
        let gen_x = relation_to_subspace(alg_x.clone(), &band(n, 1)).unwrap();
        let s_x = build_ladder(alg_x.clone(), &[gen_x], 20).unwrap();
        let roe_x = assemble_roe(&s_x).unwrap();
        let subset = [0usize, 1, 2];
        // Restricted structure on the subspace: the compressed generators.
        let alg_sub = diag(3);
        let restricted = ClassicalRelation::new(
            3,
            band(n, 1)
                .pairs()
                .iter()
                .filter(|&&(x, y)| x < 3 && y < 3)
                .map(|&(x, y)| (x, y)),
        )
        .unwrap();
        let gen_sub = relation_to_subspace(alg_sub.clone(), &restricted).unwrap();
        let s_sub = build_ladder(alg_sub, &[gen_sub], 20).unwrap();
        let roe_sub = assemble_roe(&s_sub).unwrap();
        let phi =
            QuantumFunction::spatial_from_injection(&subset, alg_x.clone(), DEFAULT_TOL).unwrap();
        let report = embed_roe(&phi, &roe_sub, &roe_x).unwrap();
        assert!(report.all_contained);
        let r = Operator::matrix_unit(n, 0, 0)
            .add(&Operator::matrix_unit(n, 1, 1))
            .unwrap()
            .add(&Operator::matrix_unit(n, 2, 2))
            .unwrap();
        assert!(hereditary_image_check(&report, &roe_x, &r).unwrap());
    }

    #[test]
    fn bridge_and_classical_coarse_checks_agree_on_random_maps() {
        let mut rng = Rng::new(202);
        for _ in 0..20 {
            let nx = 3 + rng.below(3);
            let ny = 3 + rng.below(3);
            let f: Vec<usize> = (0..nx).map(|_| rng.below(ny)).collect();
            let ex = ClassicalRelation::random(nx, 0.25, &mut rng);
            let ey = ClassicalRelation::random(ny, 0.25, &mut rng);
            let sx_class = ClassicalCoarseStructure::generated_by(nx, &[ex.clone()]).unwrap();
            let sy_class = ClassicalCoarseStructure::generated_by(ny, &[ey.clone()]).unwrap();
            let classical = is_coarse_classical(&f, &sx_class, &sy_class).unwrap();

            let alg_x = diag(nx);
            let alg_y = diag(ny);
            let gen_x = relation_to_subspace(alg_x.clone(), &ex).unwrap();
            let gen_y = relation_to_subspace(alg_y.clone(), &ey).unwrap();
            let s_x = build_ladder(alg_x, &[gen_x], 2 * nx * nx).unwrap();
            let s_y = build_ladder(alg_y, &[gen_y], 2 * ny * ny).unwrap();
            let phi = QuantumFunction::from_classical_function(&f, ny, DEFAULT_TOL).unwrap();
            let quantum = is_coarse(&phi, &s_x, &s_y, 0, 0).unwrap();
            match quantum.verdict {
                Membership::Yes(_) => assert!(classical),
                Membership::No => assert!(!classical),
                Membership::Unknown => panic!("saturated ladders must decide"),
            }
        }
    }

    #[test]
    fn omega_modulus_of_identity_is_identity() {
        let n = 5;
        let alg = diag(n);
        let dist = line_metric(n);
        let grid = [0.0, 1.0, 2.0, 3.0, 4.0];
        let qm = metric_to_quantum(alg.clone(), &dist, &grid).unwrap();
        let phi = QuantumFunction::from_classical_function(
            &(0..n).collect::<Vec<_>>(),
            n,
            DEFAULT_TOL,
        )
        .unwrap();
        let table = tilde_omega(&phi, &qm, &qm, 0, 0).unwrap();
        assert_eq!(table.mode, VerdictMode::Exact);
        for (t, v) in &table.entries {
            assert_eq!(*v, GridValue::Finite(*t));
        }
    }

    #[test]
    fn rho_modulus_of_point_evaluation_is_zero() {
        // The constant map {pt} -> X induces evaluation l_inf(X) -> C;
        // every image projection has diameter zero in the point metric.
        let n = 4;
        let alg = diag(n);
        let dist = line_metric(n);
        let grid = [0.0, 1.0, 2.0, 3.0];
        let qm_x = metric_to_quantum(alg, &dist, &grid).unwrap();
        let point = diag(1);
        let qm_pt = metric_to_quantum(point, &[vec![0.0]], &[0.0]).unwrap();
        let phi = QuantumFunction::from_classical_function(&[2], n, DEFAULT_TOL).unwrap();
        let table = tilde_rho(&phi, &qm_x, &qm_pt, 0, 0).unwrap();
        for (_, v) in &table.entries {
            assert_eq!(*v, GridValue::Finite(0.0));
        }
    }

    #[test]
    fn omega_modulus_of_distance_doubling_bridge() {
        // f: {0..4} -> {0..9}, x -> 2x; the bridge runs l_inf(10) ->
        // l_inf(5). Distances between atom fibers in the domain metric (the
        // 10-point line) double the 5-point distances, so
        // omega(t) >= 2 * (largest grid value <= t) away from the boundary.
        let f: Vec<usize> = (0..5).map(|x| 2 * x).collect();
        let alg_y = diag(10);
        let qm_y = metric_to_quantum(
            alg_y,
            &line_metric(10),
            &(0..10).map(|t| t as f64).collect::<Vec<_>>(),
        )
        .unwrap();
        let alg_x = diag(5);
        let qm_x = metric_to_quantum(
            alg_x,
            &line_metric(5),
            &(0..5).map(|t| t as f64).collect::<Vec<_>>(),
        )
        .unwrap();
        let phi = QuantumFunction::from_classical_function(&f, 10, DEFAULT_TOL).unwrap();
        let table = tilde_omega(&phi, &qm_y, &qm_x, 0, 0).unwrap();
        for (t, v) in &table.entries {
            if *t >= 1.0 && *t <= 4.0 {
                // Image distance of fibers at domain distance >= t.
                let expect = (t / 2.0).ceil();
                assert_eq!(*v, GridValue::Finite(expect), "t = {t}");
            }
        }
    }

    #[test]
    fn spatial_rejects_bad_isometry() {
        let alg = diag(3);
        let mut u = CMatrix::zeros(3, 2);
        u[(0, 0)] = linalg::cplx(1.0, 0.0);
        u[(0, 1)] = linalg::cplx(1.0, 0.0);
        assert!(QuantumFunction::spatial(alg.clone(), diag(2), u).is_err());
    }
}
