//! Quantum coarse structures and quantum metrics.
//!
//! A structure is finitely generated and carried by its saturation ladder
//! `V_0 = M' <= V_1 <= ...` where each level adds the span of pairwise
//! products and one symmetrized generator. On a finite ambient space the
//! ladder either stabilizes (dimension stops growing after every generator
//! has been folded in) or the depth budget runs out and membership queries
//! answer `Unknown` instead of guessing.

use crate::error::{Error, Result};
use crate::linalg::Operator;
use crate::qrel::{
    intrinsic_member, same_algebra, ProjectionPair, QuantumRelation,
};
use crate::sampling::Rng;
use crate::vna::AlgebraHandle;

#[derive(Debug, Clone)]
pub struct CoarseStructure {
    algebra: AlgebraHandle,
    generators: Vec<QuantumRelation>,
    ladder: Vec<QuantumRelation>,
    stabilized_at: Option<usize>,
    max_depth: usize,
}

/// Three-valued membership: `Yes(level)` gives the least ladder level
/// containing the relation; `No` is only returned under a stabilization
/// certificate; otherwise the depth budget was exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Yes(usize),
    No,
    Unknown,
}

pub fn default_max_depth(ambient_dim: usize) -> usize {
    2 * ambient_dim * ambient_dim
}

/// Builds the saturation ladder. Generators are symmetrized (`V + V*`) and
/// folded in cyclically; `V_{n+1} = span(V_n V_n + V_n + G_{n+1})`. The
/// structure is stabilized once the dimension stops growing after every
/// generator has appeared: from then on the top level absorbs products,
/// sums, and all generators, so later levels cannot differ.
pub fn build_ladder(
    algebra: AlgebraHandle,
    generators: &[QuantumRelation],
    max_depth: usize,
) -> Result<CoarseStructure> {
    for g in generators {
        if !same_algebra(g.algebra(), &algebra) {
            return Err(Error::AlgebraMismatch);
        }
    }
    let symmetrized: Vec<QuantumRelation> = generators
        .iter()
        .map(|g| g.sum(&g.adjoint()?))
        .collect::<Result<_>>()?;
    let mut ladder = vec![QuantumRelation::diagonal(algebra.clone())?];
    let mut stabilized_at = None;
    for level in 1..=max_depth {
        let prev = ladder.last().expect("ladder starts nonempty");
        let mut next = prev.product_span(prev)?.sum(prev)?;
        if !symmetrized.is_empty() {
            next = next.sum(&symmetrized[(level - 1) % symmetrized.len()])?;
        }
        let stable = next.dim() == prev.dim() && level >= symmetrized.len();
        ladder.push(next);
        if stable {
            stabilized_at = Some(level - 1);
            ladder.pop();
            break;
        }
    }
    Ok(CoarseStructure {
        algebra,
        generators: generators.to_vec(),
        ladder,
        stabilized_at,
        max_depth,
    })
}

impl CoarseStructure {
    pub fn algebra(&self) -> &AlgebraHandle {
        &self.algebra
    }

    pub fn generators(&self) -> &[QuantumRelation] {
        &self.generators
    }

    pub fn ladder(&self) -> &[QuantumRelation] {
        &self.ladder
    }

    pub fn level(&self, i: usize) -> &QuantumRelation {
        &self.ladder[i.min(self.ladder.len() - 1)]
    }

    pub fn top(&self) -> &QuantumRelation {
        self.ladder.last().expect("ladder nonempty")
    }

    pub fn stabilization_level(&self) -> Option<usize> {
        self.stabilized_at
    }

    pub fn is_stabilized(&self) -> bool {
        self.stabilized_at.is_some()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Membership of a quantum relation in the structure: containment in
    /// some ladder level.
    pub fn member_relation(&self, v: &QuantumRelation) -> Result<Membership> {
        if !same_algebra(v.algebra(), &self.algebra) {
            return Err(Error::AlgebraMismatch);
        }
        for (i, level) in self.ladder.iter().enumerate() {
            if level.contains_relation(v)? {
                return Ok(Membership::Yes(i));
            }
        }
        if self.is_stabilized() {
            Ok(Membership::No)
        } else {
            Ok(Membership::Unknown)
        }
    }

    /// The ladder read as a quantum metric with integer grid.
    pub fn as_quantum_metric(&self) -> Result<QuantumMetric> {
        let grid: Vec<f64> = (0..self.ladder.len()).map(|i| i as f64).collect();
        QuantumMetric::new(self.algebra.clone(), grid, self.ladder.clone())
    }
}

/// A quantum metric sampled on a finite grid: one operator system per grid
/// value, increasing, with products controlled by the grid sum.
#[derive(Debug, Clone)]
pub struct QuantumMetric {
    algebra: AlgebraHandle,
    grid: Vec<f64>,
    spaces: Vec<QuantumRelation>,
}

/// A grid-quantized distance value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridValue {
    Finite(f64),
    Infinite,
}

impl GridValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, GridValue::Finite(_))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            GridValue::Finite(t) => Some(*t),
            GridValue::Infinite => None,
        }
    }

    pub fn max(self, other: GridValue) -> GridValue {
        match (self, other) {
            (GridValue::Finite(a), GridValue::Finite(b)) => GridValue::Finite(a.max(b)),
            _ => GridValue::Infinite,
        }
    }
}

/// Label attached to verdicts that may rest on sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictMode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct DiameterValue {
    pub value: GridValue,
    pub mode: VerdictMode,
}

impl QuantumMetric {
    /// Validates the axioms on the grid: `spaces[0] = M'`, monotonicity,
    /// submultiplicativity (products land in the least grid value at least
    /// the sum, whenever the grid reaches that far), and each space an
    /// operator system.
    pub fn new(
        algebra: AlgebraHandle,
        grid: Vec<f64>,
        spaces: Vec<QuantumRelation>,
    ) -> Result<Self> {
        if grid.is_empty() || grid.len() != spaces.len() {
            return Err(Error::InvalidGrid(
                "grid and spaces must align and be nonempty".into(),
            ));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidGrid("grid must start at 0".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
        }
        let diag = QuantumRelation::diagonal(algebra.clone())?;
        if !spaces[0].equals(&diag)? {
            return Err(Error::Precondition(
                "metric space at t=0 must be the diagonal relation".into(),
            ));
        }
        for w in spaces.windows(2) {
            if !w[1].contains_relation(&w[0])? {
                return Err(Error::Precondition(
                    "metric spaces must increase along the grid".into(),
                ));
            }
        }
        for v in &spaces {
            if !v.is_operator_system()? {
                return Err(Error::Precondition(
                    "each metric space must contain 1 and be *-closed".into(),
                ));
            }
        }
        for (i, s) in grid.iter().enumerate() {
            for (j, t) in grid.iter().enumerate() {
                // Least grid value >= s + t, if any.
                let Some(u) = grid.iter().position(|&g| g >= s + t - 1e-12) else {
                    continue;
                };
                let prod = spaces[i].product_span(&spaces[j])?;
                if !spaces[u].contains_relation(&prod)? {
                    return Err(Error::Precondition(format!(
                        "products at grid ({s},{t}) escape the space at {}",
                        grid[u]
                    )));
                }
            }
        }
        Ok(Self {
            algebra,
            grid,
            spaces,
        })
    }

    pub fn algebra(&self) -> &AlgebraHandle {
        &self.algebra
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn spaces(&self) -> &[QuantumRelation] {
        &self.spaces
    }

    /// The space at the largest grid value `<= t`.
    pub fn space_at(&self, t: f64) -> &QuantumRelation {
        let mut idx = 0;
        for (i, &g) in self.grid.iter().enumerate() {
            if g <= t + 1e-12 {
                idx = i;
            }
        }
        &self.spaces[idx]
    }

    /// Least grid value whose space links the pair, or `Infinite`.
    pub fn v_distance(&self, pair: &ProjectionPair) -> Result<GridValue> {
        for (i, space) in self.spaces.iter().enumerate() {
            if intrinsic_member(space, pair)? {
                return Ok(GridValue::Finite(self.grid[i]));
            }
        }
        Ok(GridValue::Infinite)
    }

    /// Diameter of a projection in `M`. Over the canonical diagonal algebra
    /// this is exact: the pairs realized by `p a p` are exactly the atom
    /// pairs under `p` (witnessed by matrix units). Otherwise the value is a
    /// sampled lower bound and labeled as such.
    pub fn diameter(&self, p: &Operator, samples: usize, seed: u64) -> Result<DiameterValue> {
        if !p.is_projection(1e-8) {
            return Err(Error::NotAProjection {
                defect: p.mul(p)?.sub(p)?.hs_norm(),
                tol: 1e-8,
            });
        }
        if !self.algebra.contains(p)? {
            return Err(Error::Precondition("p must lie in the algebra".into()));
        }
        if self.algebra.is_canonical_diagonal() {
            let n = self.algebra.ambient_dim();
            let atoms: Vec<usize> = (0..n).filter(|&x| p.entry(x, x).norm() > 0.5).collect();
            let mut worst = GridValue::Finite(0.0);
            for &x in &atoms {
                for &y in &atoms {
                    let pair = ProjectionPair::atom_pair(&self.algebra, x, y, 1)?;
                    worst = worst.max(self.v_distance(&pair)?);
                }
            }
            return Ok(DiameterValue {
                value: worst,
                mode: VerdictMode::Exact,
            });
        }
        // Sampled lower bound: random compressions p a p probed against
        // sampled projection pairs at level 1.
        let mut rng = Rng::new(seed);
        let mut worst = GridValue::Finite(0.0);
        let n = self.algebra.ambient_dim();
        for _ in 0..samples {
            let a = rng.gaussian_operator(n);
            let pap = p.mul(&a)?.mul(p)?;
            let r = crate::vna::sample_projection(&self.algebra, &mut rng)?;
            let s = crate::vna::sample_projection(&self.algebra, &mut rng)?;
            let linked = crate::linalg::operator_norm(&r.mul(&pap)?.mul(&s)?) > self.algebra.tol();
            if linked {
                let pair = ProjectionPair::level_one(&self.algebra, r, s)?;
                worst = worst.max(self.v_distance(&pair)?);
            }
        }
        Ok(DiameterValue {
            value: worst,
            mode: VerdictMode::Sampled { samples, seed },
        })
    }
}

/// Validates a finite metric: square, symmetric, zero diagonal, strictly
/// positive off the diagonal, triangle inequality.
pub fn validate_metric(dist: &[Vec<f64>]) -> Result<()> {
    let n = dist.len();
    for row in dist {
        if row.len() != n {
            return Err(Error::InvalidMetric("matrix is not square".into()));
        }
    }
    for x in 0..n {
        if dist[x][x] != 0.0 {
            return Err(Error::InvalidMetric(format!("d({x},{x}) != 0")));
        }
        for y in 0..n {
            if dist[x][y] < 0.0 || !dist[x][y].is_finite() {
                return Err(Error::InvalidMetric(format!("d({x},{y}) negative or non-finite")));
            }
            if x != y && dist[x][y] == 0.0 {
                return Err(Error::InvalidMetric(format!("d({x},{y}) = 0 off the diagonal")));
            }
            if (dist[x][y] - dist[y][x]).abs() > 1e-12 {
                return Err(Error::InvalidMetric(format!("d({x},{y}) not symmetric")));
            }
            for z in 0..n {
                if dist[x][y] > dist[x][z] + dist[z][y] + 1e-12 {
                    return Err(Error::InvalidMetric(format!(
                        "triangle inequality fails at ({x},{z},{y})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Thickened-diagonal quantum metric of a finite classical metric space:
/// `spaces[t] = span{e_xy : d(x,y) <= t}` over the diagonal algebra.
pub fn metric_to_quantum(
    algebra: AlgebraHandle,
    dist: &[Vec<f64>],
    grid: &[f64],
) -> Result<QuantumMetric> {
    if !algebra.is_canonical_diagonal() {
        return Err(Error::NotDiagonalAlgebra);
    }
    validate_metric(dist)?;
    let n = algebra.ambient_dim();
    if dist.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: dist.len(),
        });
    }
    let mut spaces = Vec::with_capacity(grid.len());
    for &t in grid {
        let pairs = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| dist[x][y] <= t + 1e-12);
        let e = crate::qrel::ClassicalRelation::new(n, pairs)?;
        spaces.push(crate::qrel::relation_to_subspace(algebra.clone(), &e)?);
    }
    QuantumMetric::new(algebra, grid.to_vec(), spaces)
}

/// Quantum-graph filtration: `spaces[n]` is the span of `n`-fold products of
/// the graph relation, with the 0-fold product read as the diagonal `M'`.
/// The input must be a quantum graph: `M' <= V` and `V = V*`.
pub fn graph_filtration(v: &QuantumRelation, grid: &[usize]) -> Result<QuantumMetric> {
    let algebra = v.algebra().clone();
    let diag = QuantumRelation::diagonal(algebra.clone())?;
    if !v.contains_relation(&diag)? {
        return Err(Error::Precondition(
            "quantum graph must contain the diagonal relation".into(),
        ));
    }
    if !v.adjoint()?.equals(v)? {
        return Err(Error::Precondition(
            "quantum graph must be self-adjoint".into(),
        ));
    }
    if grid.first() != Some(&0) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(
            "graph grid must be strictly increasing from 0".into(),
        ));
    }
    let max = *grid.last().expect("nonempty grid");
    let mut powers = vec![diag];
    for k in 1..=max {
        let next = powers[k - 1].product_span(v)?;
        powers.push(next);
    }
    let grid_f: Vec<f64> = grid.iter().map(|&g| g as f64).collect();
    let spaces: Vec<QuantumRelation> = grid.iter().map(|&g| powers[g].clone()).collect();
    QuantumMetric::new(algebra, grid_f, spaces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;
    use crate::qrel::{relation_to_subspace, subspace_to_relation, ClassicalRelation};
    use crate::vna::RepresentedAlgebra;
    use std::sync::Arc;

    fn diag(n: usize) -> AlgebraHandle {
        Arc::new(RepresentedAlgebra::diagonal(n, DEFAULT_TOL).unwrap())
    }

    fn path_adjacency(n: usize) -> ClassicalRelation {
        let mut pairs = Vec::new();
        for i in 0..n - 1 {
            pairs.push((i, i + 1));
            pairs.push((i + 1, i));
        }
        ClassicalRelation::new(n, pairs).unwrap()
    }

    #[test]
    fn ladder_from_diagonal_stabilizes_immediately() {
        let alg = diag(3);
        let gen = QuantumRelation::diagonal(alg.clone()).unwrap();
        let s = build_ladder(alg, &[gen], 10).unwrap();
        assert_eq!(s.stabilization_level(), Some(0));
        assert_eq!(s.top().dim(), 3);
    }

    #[test]
    fn path_graph_ladder_is_band_filtration() {
        // Adjacency of P4 saturates through bands to all of B(C^4) at
        // distance 3. Oracle: breadth-first path metric.
        let alg = diag(4);
        let adj = relation_to_subspace(alg.clone(), &path_adjacency(4)).unwrap();
        let s = build_ladder(alg, &[adj], 20).unwrap();
        assert!(s.is_stabilized());
        for (level, space) in s.ladder().iter().enumerate() {
            let e = subspace_to_relation(space).unwrap();
            for x in 0..4usize {
                for y in 0..4usize {
                    let d = x.abs_diff(y);
                    assert_eq!(
                        e.contains_pair(x, y),
                        d <= level,
                        "level {level} cell ({x},{y})"
                    );
                }
            }
        }
        assert_eq!(s.top().dim(), 16);
        assert_eq!(s.stabilization_level(), Some(3));
    }

    #[test]
    fn random_bimodule_ladder_is_monotone_and_bounded() {
        let alg = Arc::new(RepresentedAlgebra::from_blocks(&[(2, 2)], DEFAULT_TOL).unwrap());
        let mut rng = Rng::new(6);
        let seed_op = rng.gaussian_operator(4);
        let gen = QuantumRelation::from_bimodule_closure(alg.clone(), &[seed_op]).unwrap();
        let s = build_ladder(alg, &[gen], 16).unwrap();
        assert!(s.is_stabilized());
        for w in s.ladder().windows(2) {
            assert!(w[1].contains_relation(&w[0]).unwrap());
            assert!(w[1].dim() >= w[0].dim());
        }
        assert!(s.top().dim() <= 16);
    }

    #[test]
    fn ladder_levels_satisfy_structure_axioms_at_stabilization() {
        let alg = diag(4);
        let adj = relation_to_subspace(alg.clone(), &path_adjacency(4)).unwrap();
        let s = build_ladder(alg.clone(), &[adj], 20).unwrap();
        let top = s.top();
        // Contains the diagonal, *-closed, sum- and product-closed.
        let diag_rel = QuantumRelation::diagonal(alg).unwrap();
        assert!(top.contains_relation(&diag_rel).unwrap());
        assert!(top.adjoint().unwrap().equals(top).unwrap());
        assert!(top
            .contains_relation(&top.product_span(top).unwrap())
            .unwrap());
        assert!(top.contains_relation(&top.sum(top).unwrap()).unwrap());
    }

    #[test]
    fn membership_three_values() {
        let alg = diag(4);
        let adj = relation_to_subspace(alg.clone(), &path_adjacency(4)).unwrap();
        let s = build_ladder(alg.clone(), &[adj], 20).unwrap();
        // The diagonal sits at level 0.
        let d = QuantumRelation::diagonal(alg.clone()).unwrap();
        assert_eq!(s.member_relation(&d).unwrap(), Membership::Yes(0));
        // Distance-2 band enters at level 2.
        let band2 = ClassicalRelation::new(
            4,
            (0..4usize).flat_map(|x| (0..4usize).map(move |y| (x, y))).filter(|&(x, y)| x.abs_diff(y) <= 2),
        )
        .unwrap();
        let v2 = relation_to_subspace(alg, &band2).unwrap();
        assert_eq!(s.member_relation(&v2).unwrap(), Membership::Yes(2));
    }

    #[test]
    fn disconnected_structure_rejects_cross_relations() {
        // Two components: the saturation stabilizes on block-diagonal
        // relations and refuses the full relation with certainty.
        let alg = diag(4);
        let comp = ClassicalRelation::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let gen = relation_to_subspace(alg.clone(), &comp).unwrap();
        let s = build_ladder(alg.clone(), &[gen], 20).unwrap();
        assert!(s.is_stabilized());
        let full = QuantumRelation::full(alg).unwrap();
        assert_eq!(s.member_relation(&full).unwrap(), Membership::No);
    }

    #[test]
    fn unknown_when_depth_exhausted() {
        let alg = diag(5);
        let adj = relation_to_subspace(alg.clone(), &path_adjacency(5)).unwrap();
        // Depth 1 cannot saturate a 5-point path.
        let s = build_ladder(alg.clone(), &[adj], 1).unwrap();
        assert!(!s.is_stabilized());
        let full = QuantumRelation::full(alg).unwrap();
        assert_eq!(s.member_relation(&full).unwrap(), Membership::Unknown);
    }

    #[test]
    fn ladder_reads_as_quantum_metric() {
        let alg = diag(4);
        let adj = relation_to_subspace(alg.clone(), &path_adjacency(4)).unwrap();
        let s = build_ladder(alg, &[adj], 20).unwrap();
        // Every finitely generated structure admits its ladder as a metric.
        let qm = s.as_quantum_metric().unwrap();
        assert_eq!(qm.grid().len(), s.ladder().len());
    }

    #[test]
    fn metric_two_points() {
        let alg = diag(2);
        let dist = vec![vec![0.0, 5.0], vec![5.0, 0.0]];
        let qm = metric_to_quantum(alg, &dist, &[0.0, 1.0, 5.0]).unwrap();
        let dims: Vec<usize> = qm.spaces().iter().map(|v| v.dim()).collect();
        assert_eq!(dims, vec![2, 2, 4]);
    }

    #[test]
    fn metric_path_three_points() {
        let alg = diag(3);
        let dist = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let qm = metric_to_quantum(alg, &dist, &[0.0, 1.0, 2.0]).unwrap();
        let dims: Vec<usize> = qm.spaces().iter().map(|v| v.dim()).collect();
        assert_eq!(dims, vec![3, 7, 9]);
    }

    #[test]
    fn metric_grid_zero_is_diagonal() {
        let alg = diag(3);
        let dist = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let qm = metric_to_quantum(alg, &dist, &[0.0]).unwrap();
        assert_eq!(qm.spaces()[0].dim(), 3);
    }

    #[test]
    fn metric_rejects_triangle_violation() {
        let dist = vec![
            vec![0.0, 1.0, 9.0],
            vec![1.0, 0.0, 1.0],
            vec![9.0, 1.0, 0.0],
        ];
        assert!(validate_metric(&dist).is_err());
    }

    #[test]
    fn graph_filtration_matches_path_metric() {
        let alg = diag(4);
        // Quantum graph: adjacency plus the diagonal, symmetric.
        let e = path_adjacency(4).union(&ClassicalRelation::diagonal(4));
        let v = relation_to_subspace(alg.clone(), &e).unwrap();
        let qm = graph_filtration(&v, &[0, 1, 2, 3]).unwrap();
        let dist = vec![
            vec![0.0, 1.0, 2.0, 3.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![3.0, 2.0, 1.0, 0.0],
        ];
        let qm2 = metric_to_quantum(alg, &dist, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        for (a, b) in qm.spaces().iter().zip(qm2.spaces()) {
            assert!(a.equals(b).unwrap());
        }
    }

    #[test]
    fn graph_filtration_constant_for_diagonal() {
        let alg = diag(3);
        let v = QuantumRelation::diagonal(alg).unwrap();
        let qm = graph_filtration(&v, &[0, 1, 2]).unwrap();
        for s in qm.spaces() {
            assert_eq!(s.dim(), 3);
        }
    }

    #[test]
    fn graph_filtration_full_saturates() {
        let alg = diag(2);
        let v = QuantumRelation::full(alg).unwrap();
        let qm = graph_filtration(&v, &[0, 1, 2]).unwrap();
        assert_eq!(qm.spaces()[0].dim(), 2);
        assert_eq!(qm.spaces()[1].dim(), 4);
        assert_eq!(qm.spaces()[2].dim(), 4);
    }

    #[test]
    fn graph_filtration_rejects_non_graph() {
        // Missing the diagonal: a bare off-diagonal cell is not a graph.
        let alg = diag(2);
        let e = ClassicalRelation::new(2, [(0, 1), (1, 0)]).unwrap();
        let v = relation_to_subspace(alg, &e).unwrap();
        assert!(graph_filtration(&v, &[0, 1]).is_err());
    }

    #[test]
    fn v_distance_on_path() {
        let alg = diag(3);
        let dist = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let qm = metric_to_quantum(alg.clone(), &dist, &[0.0, 1.0, 2.0]).unwrap();
        let pair = ProjectionPair::atom_pair(&alg, 0, 2, 1).unwrap();
        assert_eq!(qm.v_distance(&pair).unwrap(), GridValue::Finite(2.0));
        let same = ProjectionPair::atom_pair(&alg, 1, 1, 1).unwrap();
        assert_eq!(qm.v_distance(&same).unwrap(), GridValue::Finite(0.0));
    }

    #[test]
    fn v_distance_infinite_across_components() {
        let alg = diag(4);
        // Two two-point components, in-component distance 1.
        let e1 = ClassicalRelation::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)])
            .unwrap()
            .union(&ClassicalRelation::diagonal(4));
        let d = QuantumRelation::diagonal(alg.clone()).unwrap();
        let v1 = relation_to_subspace(alg.clone(), &e1).unwrap();
        let qm = QuantumMetric::new(alg.clone(), vec![0.0, 1.0], vec![d, v1]).unwrap();
        let cross = ProjectionPair::atom_pair(&alg, 0, 2, 1).unwrap();
        assert_eq!(qm.v_distance(&cross).unwrap(), GridValue::Infinite);
    }

    #[test]
    fn diameter_of_atom_is_zero() {
        let alg = diag(3);
        let dist = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let qm = metric_to_quantum(alg, &dist, &[0.0, 1.0, 2.0]).unwrap();
        let p = Operator::matrix_unit(3, 1, 1);
        let d = qm.diameter(&p, 0, 0).unwrap();
        assert_eq!(d.value, GridValue::Finite(0.0));
        assert_eq!(d.mode, VerdictMode::Exact);
    }

    #[test]
    fn diameter_of_endpoints_on_path() {
        let alg = diag(3);
        let dist = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let qm = metric_to_quantum(alg, &dist, &[0.0, 1.0, 2.0]).unwrap();
        let p = Operator::matrix_unit(3, 0, 0)
            .add(&Operator::matrix_unit(3, 2, 2))
            .unwrap();
        let d = qm.diameter(&p, 0, 0).unwrap();
        assert_eq!(d.value, GridValue::Finite(2.0));
    }

    #[test]
    fn diameter_infinite_on_disconnected_support() {
        let alg = diag(4);
        let e1 = ClassicalRelation::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)])
            .unwrap()
            .union(&ClassicalRelation::diagonal(4));
        let d0 = QuantumRelation::diagonal(alg.clone()).unwrap();
        let v1 = relation_to_subspace(alg.clone(), &e1).unwrap();
        let qm = QuantumMetric::new(alg.clone(), vec![0.0, 1.0], vec![d0, v1]).unwrap();
        let d = qm.diameter(&Operator::identity(4), 0, 0).unwrap();
        assert_eq!(d.value, GridValue::Infinite);
    }
}
