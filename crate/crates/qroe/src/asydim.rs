//! Asymptotic-dimension decompositions at a fixed entourage.
//!
//! A decomposition is a list of families of projections covering the
//! algebra, with the members of each family pairwise unlinked by the
//! entourage and all of them uniformly bounded against some relation of the
//! structure. Finite spaces always decompose once the diameter budget is
//! large enough; the interesting object at desk scale is the per-entourage
//! decomposition and how it pushes through coarse maps.

use crate::coarse::{CoarseStructure, Membership, VerdictMode};
use crate::error::{Error, Result};
use crate::linalg::{join_of_projections, operator_norm, Operator};
use crate::qrel::{
    intrinsic_member, subspace_to_relation, ClassicalRelation, ProjectionPair, QuantumRelation,
};
use crate::sampling::Rng;
use crate::vna::AlgebraHandle;

/// Whether the families jointly cover: the join of all projections is 1.
pub fn is_cover(families: &[Vec<Operator>], algebra: &AlgebraHandle) -> Result<bool> {
    let n = algebra.ambient_dim();
    let mut all = Vec::new();
    for family in families {
        for p in family {
            if !algebra.contains(p)? {
                return Err(Error::Precondition(
                    "cover projections must lie in the algebra".into(),
                ));
            }
            all.push(p.clone());
        }
    }
    if all.is_empty() {
        return Ok(false);
    }
    let join = join_of_projections(&all, n, algebra.tol())?;
    Ok(join.sub(&Operator::identity(n))?.hs_norm() <= 1e-8 * (n as f64))
}

/// Whether the family is `R`-disjoint: no two distinct members are linked
/// by the entourage at level 1.
pub fn is_r_disjoint(family: &[Operator], r: &QuantumRelation) -> Result<bool> {
    let algebra = r.algebra();
    for (i, p) in family.iter().enumerate() {
        for (j, q) in family.iter().enumerate() {
            if i == j {
                continue;
            }
            let pair = ProjectionPair::level_one(algebra, p.clone(), q.clone())?;
            if intrinsic_member(r, &pair)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct BoundedVerdict {
    pub bounded: bool,
    pub mode: VerdictMode,
    /// A violating `(projection index, r, s)` triple in sampled mode.
    pub witness: Option<(usize, Operator, Operator)>,
}

/// Uniform boundedness of a family against a bound relation `B`:
/// `diam(p) <= B` for every member. Exact over the canonical diagonal
/// algebra, where the pairs realized by compressions `p a p` are exactly
/// the atom pairs under `p`; sampled elsewhere (refutations are sound,
/// passes inconclusive).
pub fn is_uniformly_bounded(
    family: &[Operator],
    bound: &QuantumRelation,
    samples: usize,
    seed: u64,
) -> Result<BoundedVerdict> {
    let algebra = bound.algebra();
    if algebra.is_canonical_diagonal() {
        let e = subspace_to_relation(bound)?;
        for p in family {
            let atoms: Vec<usize> = (0..algebra.ambient_dim())
                .filter(|&x| p.entry(x, x).norm() > 0.5)
                .collect();
            for &x in &atoms {
                for &y in &atoms {
                    if !e.contains_pair(x, y) {
                        return Ok(BoundedVerdict {
                            bounded: false,
                            mode: VerdictMode::Exact,
                            witness: Some((
                                0,
                                Operator::matrix_unit(algebra.ambient_dim(), x, x),
                                Operator::matrix_unit(algebra.ambient_dim(), y, y),
                            )),
                        });
                    }
                }
            }
        }
        return Ok(BoundedVerdict {
            bounded: true,
            mode: VerdictMode::Exact,
            witness: None,
        });
    }
    let mut rng = Rng::new(seed);
    let n = algebra.ambient_dim();
    for _ in 0..samples {
        let idx = rng.below(family.len().max(1));
        let Some(p) = family.get(idx) else { break };
        let a = rng.gaussian_operator(n);
        let pap = p.mul(&a)?.mul(p)?;
        let r = crate::vna::sample_projection(algebra, &mut rng)?;
        let s = crate::vna::sample_projection(algebra, &mut rng)?;
        if operator_norm(&r.mul(&pap)?.mul(&s)?) > algebra.tol() {
            let pair = ProjectionPair::level_one(algebra, r.clone(), s.clone())?;
            if !intrinsic_member(bound, &pair)? {
                return Ok(BoundedVerdict {
                    bounded: false,
                    mode: VerdictMode::Sampled { samples, seed },
                    witness: Some((idx, r, s)),
                });
            }
        }
    }
    Ok(BoundedVerdict {
        bounded: true,
        mode: VerdictMode::Sampled { samples, seed },
        witness: None,
    })
}

#[derive(Debug, Clone)]
pub struct DecompositionVerdict {
    pub accepted: bool,
    pub cover_ok: bool,
    pub disjoint_ok: Vec<bool>,
    pub bounded_ok: bool,
    /// Ladder level of the bound relation that certified uniform
    /// boundedness, when it was found rather than supplied.
    pub bound_level: Option<usize>,
    pub failure: Option<String>,
}

/// Full decomposition check at an entourage `R` of the structure: cover,
/// per-family `R`-disjointness, and uniform boundedness against a supplied
/// bound or the first ladder level that works.
pub fn check_decomposition(
    structure: &CoarseStructure,
    entourage: &QuantumRelation,
    families: &[Vec<Operator>],
    supplied_bound: Option<&QuantumRelation>,
    samples: usize,
    seed: u64,
) -> Result<DecompositionVerdict> {
    match structure.member_relation(entourage)? {
        Membership::Yes(_) => {}
        _ => {
            return Err(Error::Precondition(
                "entourage must belong to the structure".into(),
            ))
        }
    }
    let algebra = structure.algebra();
    let cover_ok = is_cover(families, algebra)?;
    let mut disjoint_ok = Vec::new();
    for family in families {
        disjoint_ok.push(is_r_disjoint(family, entourage)?);
    }
    let mut bounded_ok = false;
    let mut bound_level = None;
    if let Some(bound) = supplied_bound {
        let all: Vec<Operator> = families.iter().flatten().cloned().collect();
        bounded_ok = is_uniformly_bounded(&all, bound, samples, seed)?.bounded;
    } else {
        let all: Vec<Operator> = families.iter().flatten().cloned().collect();
        for (level, b) in structure.ladder().iter().enumerate() {
            if is_uniformly_bounded(&all, b, samples, seed)?.bounded {
                bounded_ok = true;
                bound_level = Some(level);
                break;
            }
        }
    }
    let accepted = cover_ok && disjoint_ok.iter().all(|&d| d) && bounded_ok;
    let failure = if accepted {
        None
    } else if !cover_ok {
        Some("families do not cover".into())
    } else if !disjoint_ok.iter().all(|&d| d) {
        Some("a family is not entourage-disjoint".into())
    } else {
        Some("no uniform bound found".into())
    };
    Ok(DecompositionVerdict {
        accepted,
        cover_ok,
        disjoint_ok,
        bounded_ok,
        bound_level,
        failure,
    })
}

/// A found decomposition on a classical space: per family, the parts as
/// atom index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalDecomposition {
    pub families: Vec<Vec<Vec<usize>>>,
}

impl ClassicalDecomposition {
    /// The parts as diagonal projections.
    pub fn families_as_projections(&self, n: usize) -> Vec<Vec<Operator>> {
        self.families
            .iter()
            .map(|family| {
                family
                    .iter()
                    .map(|part| {
                        let mut p = Operator::zeros(n);
                        for &x in part {
                            p = p.add(&Operator::matrix_unit(n, x, x)).unwrap();
                        }
                        p
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum SearchResult {
    Found(ClassicalDecomposition),
    Exhausted,
}

/// Backtracking search for an `(n+1)`-family decomposition of a classical
/// metric space at entourage `r`: atoms are assigned to families, the parts
/// of a family are forced to be the `r`-connected components of its atom
/// set (two related atoms in one family must share a part), and every part
/// must have metric diameter at most `max_diam`. Exhaustion is certified by
/// the completed backtracking.
pub fn search_decomposition(
    dist: &[Vec<f64>],
    r: &ClassicalRelation,
    n_families: usize,
    max_diam: f64,
) -> Result<SearchResult> {
    let n = dist.len();
    if r.points() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: r.points(),
        });
    }
    if n_families == 0 {
        return Ok(SearchResult::Exhausted);
    }
    // Symmetrized adjacency for part-forcing.
    let sym = r.union(&r.inverse());
    let mut assignment = vec![usize::MAX; n];
    if assign(0, n, n_families, &mut assignment, &sym, dist, max_diam) {
        let mut families = vec![Vec::new(); n_families];
        for (f, family) in families.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&x| assignment[x] == f).collect();
            *family = components_of(&members, &sym);
        }
        families.retain(|f| !f.is_empty());
        return Ok(SearchResult::Found(ClassicalDecomposition { families }));
    }
    Ok(SearchResult::Exhausted)
}

fn components_of(members: &[usize], sym: &ClassicalRelation) -> Vec<Vec<usize>> {
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; members.len()];
    for start in 0..members.len() {
        if seen[start] {
            continue;
        }
        let mut comp = vec![members[start]];
        seen[start] = true;
        let mut stack = vec![members[start]];
        while let Some(x) = stack.pop() {
            for (i, &y) in members.iter().enumerate() {
                if !seen[i] && (sym.contains_pair(x, y) || sym.contains_pair(y, x)) {
                    seen[i] = true;
                    comp.push(y);
                    stack.push(y);
                }
            }
        }
        comp.sort();
        comps.push(comp);
    }
    comps
}

fn assign(
    x: usize,
    n: usize,
    n_families: usize,
    assignment: &mut Vec<usize>,
    sym: &ClassicalRelation,
    dist: &[Vec<f64>],
    max_diam: f64,
) -> bool {
    if x == n {
        return true;
    }
    for f in 0..n_families {
        assignment[x] = f;
        if prefix_feasible(x, assignment, sym, dist, max_diam)
            && assign(x + 1, n, n_families, assignment, sym, dist, max_diam)
        {
            return true;
        }
    }
    assignment[x] = usize::MAX;
    false
}

/// Prunes on the atoms assigned so far: the forced parts (connected
/// components within a family) must already respect the diameter budget.
fn prefix_feasible(
    upto: usize,
    assignment: &[usize],
    sym: &ClassicalRelation,
    dist: &[Vec<f64>],
    max_diam: f64,
) -> bool {
    let f = assignment[upto];
    let members: Vec<usize> = (0..=upto).filter(|&y| assignment[y] == f).collect();
    // Component of `upto` within its family so far.
    let comps = components_of(&members, sym);
    for comp in comps {
        if comp.contains(&upto) {
            for &a in &comp {
                for &b in &comp {
                    if dist[a][b] > max_diam + 1e-12 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone)]
pub struct HarnessEntry {
    pub entourage_index: usize,
    pub found: bool,
    pub pushed_accepted: bool,
}

#[derive(Debug, Clone)]
pub struct HarnessReport {
    pub entries: Vec<HarnessEntry>,
    pub all_pushed_verified: bool,
}

/// Monotonicity harness for a classical coarse and expanding map
/// `f: X -> Y`: for each sample entourage `R` on `Y`, a decomposition of
/// `Y` is searched; its parts are pulled back through the fibers of `f`
/// (the projection images under the induced quantum function) and
/// re-verified on `X` against the preimage entourage `(f x f)^{-1}(R)` and
/// the preimage of the bound.
pub fn monotonicity_harness(
    f: &[usize],
    x_dist: &[Vec<f64>],
    y_dist: &[Vec<f64>],
    x_structure: &CoarseStructure,
    y_entourages: &[ClassicalRelation],
    n_families: usize,
    max_diam: f64,
) -> Result<HarnessReport> {
    let nx = x_dist.len();
    let ny = y_dist.len();
    let algebra = x_structure.algebra().clone();
    let mut entries = Vec::new();
    let mut all_ok = true;
    for (idx, r_y) in y_entourages.iter().enumerate() {
        let found = match search_decomposition(y_dist, r_y, n_families, max_diam)? {
            SearchResult::Found(dec) => Some(dec),
            SearchResult::Exhausted => None,
        };
        let Some(dec) = found else {
            entries.push(HarnessEntry {
                entourage_index: idx,
                found: false,
                pushed_accepted: false,
            });
            all_ok = false;
            continue;
        };
        // Pull each part back through the fibers.
        let mut pushed: Vec<Vec<Operator>> = Vec::new();
        for family in &dec.families {
            let mut projections = Vec::new();
            for part in family {
                let mut p = Operator::zeros(nx);
                for x in 0..nx {
                    if part.contains(&f[x]) {
                        p = p.add(&Operator::matrix_unit(nx, x, x))?;
                    }
                }
                if p.hs_norm() > 0.0 {
                    projections.push(p);
                }
            }
            if !projections.is_empty() {
                pushed.push(projections);
            }
        }
        // Entourage and bound on X: preimages under f x f.
        let q_x = r_y.map_preimage(f, nx)?;
        let q_rel = crate::qrel::relation_to_subspace(algebra.clone(), &q_x)?;
        // Bound on Y: pairs within max_diam; preimage bounds the fibers.
        let b_y = ClassicalRelation::new(
            ny,
            (0..ny)
                .flat_map(|a| (0..ny).map(move |b| (a, b)))
                .filter(|&(a, b)| y_dist[a][b] <= max_diam + 1e-12),
        )?;
        let b_x = b_y.map_preimage(f, nx)?;
        let b_rel = crate::qrel::relation_to_subspace(algebra.clone(), &b_x)?;
        let verdict = check_decomposition(
            x_structure,
            &q_rel,
            &pushed,
            Some(&b_rel),
            0,
            0,
        )?;
        // The bound must itself belong to the structure on X.
        let bound_member = matches!(x_structure.member_relation(&b_rel)?, Membership::Yes(_));
        let ok = verdict.accepted && bound_member;
        all_ok &= ok;
        entries.push(HarnessEntry {
            entourage_index: idx,
            found: true,
            pushed_accepted: ok,
        });
    }
    Ok(HarnessReport {
        entries,
        all_pushed_verified: all_ok,
    })
}
