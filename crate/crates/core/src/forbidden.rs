//! Families `F` of forbidden sets of oriented separations, exposed as
//! witness-producing membership oracles.

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::Ground;
use crate::oracle::{self, OracleBudget};
use crate::scalar::Scalar;
use crate::sepsys::{map_oriented, OrientedSepId, PartialOrientation, SeparationSystem};

/// The kind of a forbidden family together with its numeric parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    Empty,
    Explicit,
    /// `B_k`: sets whose big sides meet in fewer than `k` vertices.
    Blocks { k: usize },
    /// `C_n`: sets of at most three sides meeting in fewer than `n` points.
    Cluster { n: usize },
    /// `P`: triples `{r, s, r* ∨ s*}`.
    Profile,
    /// `P_s`: triples `{r, s, t*}` with `t* <= r* ∨ s*`.
    StrongProfile,
    /// `T`: at most three separations whose small sides cover the graph.
    GraphTangle,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::Empty => write!(f, "empty"),
            FamilyKind::Explicit => write!(f, "explicit"),
            FamilyKind::Blocks { k } => write!(f, "blocks:{k}"),
            FamilyKind::Cluster { n } => write!(f, "cluster:{n}"),
            FamilyKind::Profile => write!(f, "profile"),
            FamilyKind::StrongProfile => write!(f, "strong-profile"),
            FamilyKind::GraphTangle => write!(f, "graph-tangle"),
        }
    }
}

/// Why a witness lies in its family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Index of the listed member.
    Explicit { member: usize },
    /// The intersection of the big sides, smaller than `k`.
    Blocks { intersection: Vec<usize>, k: usize },
    /// The intersection of the sides, smaller than `n`.
    Cluster { intersection: Vec<usize>, n: usize },
    /// `join = r* ∨ s*`
    Profile { r: OrientedSepId, s: OrientedSepId, join: OrientedSepId },
    /// `t_inv <= r* ∨ s*`
    StrongProfile { r: OrientedSepId, s: OrientedSepId, t_inv: OrientedSepId },
    /// The small sides cover every vertex and edge.
    GraphTangle { vertices: Vec<usize> },
}

/// A member of `F` found inside some set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub members: PartialOrientation,
    pub evidence: Evidence,
}

#[derive(Clone, Debug)]
enum Payload {
    None,
    Explicit(Vec<PartialOrientation>),
    /// One side per oriented separation: `B` of `(A, B)` for blocks and clusters.
    Sides(Vec<FixedBitSet>),
    /// Vertex masks of `A` for every `(A, B)`, plus the graph edges.
    Graph { small: Vec<u64>, n: usize, edges: Vec<(usize, usize)> },
}

/// A forbidden family bound to the separation system its sets are drawn from.
#[derive(Clone, Debug)]
pub struct ForbiddenFamily<T> {
    kind: FamilyKind,
    system: Arc<SeparationSystem<T>>,
    payload: Payload,
}

/// Whether a system meets the hypotheses under which regular profiles and
/// strong profiles coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileHypotheses {
    pub submodular: bool,
    pub distributive: bool,
}

impl ProfileHypotheses {
    pub fn hold(&self) -> bool {
        self.submodular && self.distributive
    }
}

impl<T: Scalar> ForbiddenFamily<T> {
    pub fn make_empty(system: &Arc<SeparationSystem<T>>) -> Self {
        ForbiddenFamily {
            kind: FamilyKind::Empty,
            system: system.clone(),
            payload: Payload::None,
        }
    }

    pub fn make_explicit(system: &Arc<SeparationSystem<T>>, members: &[Vec<OrientedSepId>]) -> Result<Self> {
        let m = system.oriented_len();
        let mut list = Vec::with_capacity(members.len());
        for member in members {
            if let Some(bad) = member.iter().find(|a| a.0 >= m) {
                return Err(Error::Input(format!("oriented id {} out of range 0..{m}", bad.0)));
            }
            list.push(system.set_of(member.iter().copied()));
        }
        Ok(ForbiddenFamily {
            kind: FamilyKind::Explicit,
            system: system.clone(),
            payload: Payload::Explicit(list),
        })
    }

    pub fn make_blocks(system: &Arc<SeparationSystem<T>>, k: usize) -> Result<Self> {
        let sides = big_sides(system, |g| matches!(g, Ground::Graph(_)), "graph ground")?;
        Ok(ForbiddenFamily {
            kind: FamilyKind::Blocks { k },
            system: system.clone(),
            payload: Payload::Sides(sides),
        })
    }

    pub fn make_cluster(system: &Arc<SeparationSystem<T>>, n: usize) -> Result<Self> {
        let sides = big_sides(system, |g| matches!(g, Ground::Points { .. }), "bipartition ground")?;
        Ok(ForbiddenFamily {
            kind: FamilyKind::Cluster { n },
            system: system.clone(),
            payload: Payload::Sides(sides),
        })
    }

    pub fn make_profile(system: &Arc<SeparationSystem<T>>) -> Result<Self> {
        system.universe().ok_or(Error::MissingCapability("universe"))?;
        Ok(ForbiddenFamily {
            kind: FamilyKind::Profile,
            system: system.clone(),
            payload: Payload::None,
        })
    }

    pub fn make_strong_profile(system: &Arc<SeparationSystem<T>>) -> Result<Self> {
        system.universe().ok_or(Error::MissingCapability("universe"))?;
        Ok(ForbiddenFamily {
            kind: FamilyKind::StrongProfile,
            system: system.clone(),
            payload: Payload::None,
        })
    }

    pub fn make_graph_tangle(system: &Arc<SeparationSystem<T>>) -> Result<Self> {
        let universe = system.universe().ok_or(Error::MissingCapability("graph ground"))?;
        let graph = universe
            .ground()
            .and_then(Ground::graph)
            .ok_or(Error::MissingCapability("graph ground"))?;
        let small = system
            .oriented()
            .map(|a| crate::ground::bits_to_mask(&universe.pair(a).expect("set pair").a))
            .collect();
        Ok(ForbiddenFamily {
            kind: FamilyKind::GraphTangle,
            system: system.clone(),
            payload: Payload::Graph {
                small,
                n: graph.n(),
                edges: graph.edges(),
            },
        })
    }

    /// Builds a family of the given kind over `system`.
    pub fn make(system: &Arc<SeparationSystem<T>>, kind: FamilyKind) -> Result<Self> {
        match kind {
            FamilyKind::Empty => Ok(Self::make_empty(system)),
            FamilyKind::Explicit => Self::make_explicit(system, &[]),
            FamilyKind::Blocks { k } => Self::make_blocks(system, k),
            FamilyKind::Cluster { n } => Self::make_cluster(system, n),
            FamilyKind::Profile => Self::make_profile(system),
            FamilyKind::StrongProfile => Self::make_strong_profile(system),
            FamilyKind::GraphTangle => Self::make_graph_tangle(system),
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn system(&self) -> &Arc<SeparationSystem<T>> {
        &self.system
    }

    /// Listed members of an explicit family.
    pub fn explicit_members(&self) -> &[PartialOrientation] {
        match &self.payload {
            Payload::Explicit(list) => list,
            _ => &[],
        }
    }

    /// Largest member size that can matter, `None` when unbounded.
    pub fn max_arity(&self) -> Option<usize> {
        match self.kind {
            FamilyKind::Empty => Some(0),
            FamilyKind::Explicit => Some(self.explicit_members().iter().map(|m| m.len()).max().unwrap_or(0)),
            FamilyKind::Blocks { .. } => None,
            _ => Some(3),
        }
    }

    /// Members stay members when elements are added.
    pub fn is_superset_closed(&self) -> bool {
        matches!(self.kind, FamilyKind::Empty | FamilyKind::Blocks { .. })
    }

    /// The same family over `sub`, a restriction of this family's system.
    /// Explicit members that leave `sub` are dropped.
    pub fn restrict_to(&self, sub: &Arc<SeparationSystem<T>>) -> Result<Self> {
        let map = self.system.embedding_into(sub);
        match &self.payload {
            Payload::Explicit(list) => {
                let members: Vec<Vec<OrientedSepId>> = list
                    .iter()
                    .filter_map(|m| m.iter().map(|a| map_oriented(a, &map)).collect())
                    .collect();
                Self::make_explicit(sub, &members)
            }
            _ => Self::make(sub, self.kind),
        }
    }

    fn check(&self, sigma: &PartialOrientation) -> Result<()> {
        if sigma.capacity() != self.system.oriented_len() {
            return Err(Error::GroundMismatch {
                expected: self.system.oriented_len(),
                found: sigma.capacity(),
            });
        }
        Ok(())
    }

    /// Whether `set` itself is a member of `F`.
    pub fn contains(&self, set: &PartialOrientation) -> bool {
        self.evidence_for(set).is_some()
    }

    fn evidence_for(&self, set: &PartialOrientation) -> Option<Evidence> {
        let ids = set.to_vec();
        match (&self.kind, &self.payload) {
            (FamilyKind::Empty, _) => None,
            (FamilyKind::Explicit, Payload::Explicit(list)) => list
                .iter()
                .position(|m| m == set)
                .map(|member| Evidence::Explicit { member }),
            (FamilyKind::Blocks { k }, Payload::Sides(sides)) => {
                let meet = intersect_sides(sides, &ids, self.ground_size());
                (meet.count_ones(..) < *k).then(|| Evidence::Blocks {
                    intersection: meet.ones().collect(),
                    k: *k,
                })
            }
            (FamilyKind::Cluster { n }, Payload::Sides(sides)) => {
                if ids.is_empty() || ids.len() > 3 {
                    return None;
                }
                let meet = intersect_sides(sides, &ids, self.ground_size());
                (meet.count_ones(..) < *n).then(|| Evidence::Cluster {
                    intersection: meet.ones().collect(),
                    n: *n,
                })
            }
            (FamilyKind::Profile, _) => {
                let u = self.system.universe()?;
                for &r in &ids {
                    for &s in &ids {
                        let Some(join) = u.join(r.inverse(), s.inverse()) else {
                            continue;
                        };
                        if same_set(&ids, &[r, s, join]) {
                            return Some(Evidence::Profile { r, s, join });
                        }
                    }
                }
                None
            }
            (FamilyKind::StrongProfile, _) => {
                let u = self.system.universe()?;
                for &r in &ids {
                    for &s in &ids {
                        for &t_inv in &ids {
                            if same_set(&ids, &[r, s, t_inv]) && u.below_join(t_inv, r.inverse(), s.inverse()) {
                                return Some(Evidence::StrongProfile { r, s, t_inv });
                            }
                        }
                    }
                }
                None
            }
            (FamilyKind::GraphTangle, Payload::Graph { small, n, edges }) => {
                if ids.is_empty() || ids.len() > 3 {
                    return None;
                }
                let covered = ids.iter().fold(0u64, |m, a| m | small[a.0]);
                let all = crate::ground::mask_below(*n);
                let edges_covered = edges
                    .iter()
                    .all(|&(u, v)| ids.iter().any(|a| small[a.0] >> u & 1 == 1 && small[a.0] >> v & 1 == 1));
                (covered == all && edges_covered).then(|| Evidence::GraphTangle {
                    vertices: crate::ground::ones(covered).collect(),
                })
            }
            _ => None,
        }
    }

    fn ground_size(&self) -> usize {
        self.system.universe().and_then(|u| u.ground()).map_or(0, Ground::size)
    }

    /// The lexicographically least subset of `sigma` that lies in `F`, if any.
    pub fn forbidden_subset(&self, sigma: &PartialOrientation) -> Result<Option<Witness>> {
        self.check(sigma)?;
        Ok(self.forbidden_subset_unchecked(sigma))
    }

    pub(crate) fn forbidden_subset_unchecked(&self, sigma: &PartialOrientation) -> Option<Witness> {
        let elems = sigma.to_vec();
        let m = self.system.oriented_len();
        let witness = |ids: &[OrientedSepId]| {
            let members = PartialOrientation::from_ids(m, ids.iter().copied());
            self.evidence_for(&members).map(|evidence| Witness { members, evidence })
        };
        match self.kind {
            FamilyKind::Empty => None,
            FamilyKind::Explicit => {
                let list = self.explicit_members();
                let best = list.iter().filter(|mbr| mbr.is_subset(sigma)).min()?;
                witness(&best.to_vec())
            }
            FamilyKind::Blocks { .. } => {
                // B_k is closed under supersets, so extend a prefix greedily
                let mut prefix: Vec<OrientedSepId> = Vec::new();
                let mut next = 0;
                loop {
                    if let Some(w) = witness(&prefix) {
                        return Some(w);
                    }
                    let j = (next..elems.len()).find(|&j| {
                        let mut trial = prefix.clone();
                        trial.extend_from_slice(&elems[j..]);
                        self.contains(&PartialOrientation::from_ids(m, trial))
                    })?;
                    prefix.push(elems[j]);
                    next = j + 1;
                }
            }
            _ => {
                // subsets of size <= 3 in lexicographic order
                for i in 0..elems.len() {
                    if let Some(w) = witness(&[elems[i]]) {
                        return Some(w);
                    }
                    for j in i + 1..elems.len() {
                        if let Some(w) = witness(&[elems[i], elems[j]]) {
                            return Some(w);
                        }
                        for k in j + 1..elems.len() {
                            if let Some(w) = witness(&[elems[i], elems[j], elems[k]]) {
                                return Some(w);
                            }
                        }
                    }
                }
                None
            }
        }
    }

    /// Whether `sigma` has a subset in `F`.
    pub fn meets(&self, sigma: &PartialOrientation) -> bool {
        self.forbidden_subset_unchecked(sigma).is_some()
    }

    /// Re-derives a witness's evidence from the separations themselves.
    pub fn verify(&self, w: &Witness) -> bool {
        if w.members.capacity() != self.system.oriented_len() {
            return false;
        }
        let ids = w.members.to_vec();
        let universe = self.system.universe();
        match &w.evidence {
            Evidence::Explicit { member } => self.explicit_members().get(*member) == Some(&w.members),
            Evidence::Blocks { intersection, k } => {
                let Some(u) = universe else { return false };
                let Some(ground) = u.ground() else { return false };
                let expected: Vec<usize> = (0..ground.size())
                    .filter(|&v| ids.iter().all(|&a| u.pair(a).is_some_and(|p| p.b.contains(v))))
                    .collect();
                self.kind == (FamilyKind::Blocks { k: *k }) && expected == *intersection && expected.len() < *k
            }
            Evidence::Cluster { intersection, n } => {
                let Some(u) = universe else { return false };
                let Some(ground) = u.ground() else { return false };
                let expected: Vec<usize> = (0..ground.size())
                    .filter(|&v| ids.iter().all(|&a| u.pair(a).is_some_and(|p| p.b.contains(v))))
                    .collect();
                self.kind == (FamilyKind::Cluster { n: *n })
                    && (1..=3).contains(&ids.len())
                    && expected == *intersection
                    && expected.len() < *n
            }
            Evidence::Profile { r, s, join } => {
                let Some(u) = universe else { return false };
                self.kind == FamilyKind::Profile
                    && same_set(&ids, &[*r, *s, *join])
                    && self.system.leq(r.inverse(), *join)
                    && self.system.leq(s.inverse(), *join)
                    && u.join(r.inverse(), s.inverse()) == Some(*join)
            }
            Evidence::StrongProfile { r, s, t_inv } => {
                let Some(u) = universe else { return false };
                self.kind == FamilyKind::StrongProfile
                    && same_set(&ids, &[*r, *s, *t_inv])
                    && u.below_join(*t_inv, r.inverse(), s.inverse())
            }
            Evidence::GraphTangle { .. } => {
                let Some(u) = universe else { return false };
                let Some(graph) = u.ground().and_then(Ground::graph) else {
                    return false;
                };
                let in_some = |v: usize| ids.iter().any(|&a| u.pair(a).is_some_and(|p| p.a.contains(v)));
                let edge_in_some = |x: usize, y: usize| {
                    ids.iter()
                        .any(|&a| u.pair(a).is_some_and(|p| p.a.contains(x) && p.a.contains(y)))
                };
                self.kind == FamilyKind::GraphTangle
                    && (1..=3).contains(&ids.len())
                    && (0..graph.n()).all(in_some)
                    && graph.edges().iter().all(|&(x, y)| edge_in_some(x, y))
            }
        }
    }

    /// Trivial elements `s` whose co-trivial inverse is not forbidden as a singleton.
    /// Empty iff `F` is standard.
    pub fn standardness_counterexamples(&self) -> Vec<OrientedSepId> {
        self.system
            .trivial_elements()
            .filter(|s| !self.contains(&self.system.set_of([s.inverse()])))
            .collect()
    }

    /// `{s*} ∈ F` for every trivial `s`.
    pub fn is_standard(&self) -> bool {
        self.standardness_counterexamples().is_empty()
    }

    /// Regular profiles are strong profiles under these hypotheses. `None`
    /// without a universe.
    pub fn profile_hypotheses(&self) -> Option<ProfileHypotheses> {
        let universe = self.system.universe()?;
        Some(ProfileHypotheses {
            submodular: self.system.is_submodular()?,
            distributive: universe.is_distributive(),
        })
    }

    /// A member of `F` (among sets of at most `max_size` elements) together with
    /// a pointwise lowering of it that is not in `F`. `None` means closed under
    /// minimization as far as checked. Exponential; for desk-scale systems.
    pub fn minimization_counterexample(&self, max_size: usize) -> Option<(PartialOrientation, PartialOrientation)> {
        let candidates: Vec<PartialOrientation> = match &self.payload {
            Payload::Explicit(list) => list.iter().filter(|m| m.len() <= max_size).cloned().collect(),
            _ => {
                let arity = self.max_arity().map_or(max_size, |a| a.min(max_size));
                let mut out = Vec::new();
                subsets_up_to(&self.system.oriented().collect::<Vec<_>>(), arity, &mut |ids| {
                    let set = self.system.set_of(ids.iter().copied());
                    if self.contains(&set) {
                        out.push(set);
                    }
                });
                out
            }
        };
        for member in candidates {
            let elems = member.to_vec();
            let choices: Vec<Vec<OrientedSepId>> = elems.iter().map(|&a| self.system.down_set(a).collect()).collect();
            let mut pick = vec![0usize; elems.len()];
            loop {
                let lowered = self.system.set_of(pick.iter().enumerate().map(|(i, &c)| choices[i][c]));
                if !self.contains(&lowered) {
                    return Some((member, lowered));
                }
                let mut i = 0;
                while i < pick.len() {
                    pick[i] += 1;
                    if pick[i] < choices[i].len() {
                        break;
                    }
                    pick[i] = 0;
                    i += 1;
                }
                if i == pick.len() {
                    break;
                }
            }
        }
        None
    }

    /// See [`minimization_counterexample`](Self::minimization_counterexample).
    pub fn is_closed_under_minimization(&self, max_size: usize) -> bool {
        self.minimization_counterexample(max_size).is_none()
    }

    /// A consistent orientation with a subset in `F` but no strongly efficient
    /// one. `Ok(None)` means `F` is rich. Exponential in `|S|`.
    pub fn richness_counterexample(&self, budget: &OracleBudget) -> Result<Option<PartialOrientation>> {
        for tau in oracle::all_consistent_orientations(&self.system, budget)? {
            if !self.meets(&tau) {
                continue;
            }
            let strong = oracle::strongly_efficient_part(&self.system, &tau);
            if !self.meets(&strong) {
                return Ok(Some(tau));
            }
        }
        Ok(None)
    }

    pub fn is_rich(&self, budget: &OracleBudget) -> Result<bool> {
        Ok(self.richness_counterexample(budget)?.is_none())
    }
}

fn big_sides<T: Scalar>(
    system: &SeparationSystem<T>,
    accept: impl Fn(&Ground) -> bool,
    what: &'static str,
) -> Result<Vec<FixedBitSet>> {
    let universe = system.universe().ok_or(Error::MissingCapability(what))?;
    if !universe.ground().is_some_and(accept) {
        return Err(Error::MissingCapability(what));
    }
    Ok(system
        .oriented()
        .map(|a| universe.pair(a).expect("set pair").b.clone())
        .collect())
}

fn intersect_sides(sides: &[FixedBitSet], ids: &[OrientedSepId], n: usize) -> FixedBitSet {
    let mut meet = FixedBitSet::with_capacity(n);
    meet.insert_range(..);
    for a in ids {
        meet.intersect_with(&sides[a.0]);
    }
    meet
}

fn same_set(ids: &[OrientedSepId], triple: &[OrientedSepId]) -> bool {
    triple.iter().all(|a| ids.contains(a)) && ids.iter().all(|a| triple.contains(a))
}

pub(crate) fn subsets_up_to(elems: &[OrientedSepId], max_size: usize, visit: &mut impl FnMut(&[OrientedSepId])) {
    fn rec(
        elems: &[OrientedSepId],
        start: usize,
        left: usize,
        cur: &mut Vec<OrientedSepId>,
        visit: &mut impl FnMut(&[OrientedSepId]),
    ) {
        visit(cur);
        if left == 0 {
            return;
        }
        for i in start..elems.len() {
            cur.push(elems[i]);
            rec(elems, i + 1, left - 1, cur, visit);
            cur.pop();
        }
    }
    rec(elems, 0, max_size, &mut Vec::new(), visit);
}
