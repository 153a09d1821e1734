#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tangle_forge::ground::{bipartition_system, graph_system, BipartitionGround, Graph, OrderRule};
use tangle_forge::oracle::{all_tangles, OracleBudget};
use tangle_forge::{
    FamilyKind, ForbiddenFamily, OrientedSepId, PartialOrientation, SepId, SeparationSystem, SystemSpec,
};

pub type Sys = Arc<SeparationSystem<f64>>;
pub type Family = ForbiddenFamily<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Budget large enough for every generated system.
pub fn budget() -> OracleBudget {
    OracleBudget::with_max_separations(128)
}

pub fn f(s: usize) -> OrientedSepId {
    SepId(s).forward()
}

pub fn b(s: usize) -> OrientedSepId {
    SepId(s).backward()
}

pub fn system(orders: Vec<f64>, leq: &[(OrientedSepId, OrientedSepId)]) -> Sys {
    let mut pairs = Vec::new();
    for &(x, y) in leq {
        pairs.push((x, y));
        pairs.push((y.inverse(), x.inverse()));
    }
    Arc::new(SeparationSystem::from_spec(SystemSpec::new(orders, pairs).closed()).expect("valid system"))
}

/// A random separation system on `n` separations: random comparabilities,
/// closed under the involution and transitivity, retried until valid.
pub fn random_poset(rng: &mut ChaCha8Rng, n: usize, injective: bool) -> Sys {
    loop {
        let density = rng.gen_range(0.05..0.35);
        let mut pairs = Vec::new();
        for x in 0..2 * n {
            for y in 0..2 * n {
                if x / 2 != y / 2 && rng.gen_bool(density) {
                    let (x, y) = (OrientedSepId(x), OrientedSepId(y));
                    pairs.push((x, y));
                    pairs.push((y.inverse(), x.inverse()));
                }
            }
        }
        let orders: Vec<f64> = if injective {
            let mut v: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
            v.shuffle(rng);
            v
        } else {
            (0..n).map(|_| rng.gen_range(0..3) as f64).collect()
        };
        if let Ok(sys) = SeparationSystem::from_spec(SystemSpec::new(orders, pairs).closed()) {
            return Arc::new(sys);
        }
    }
}

/// Singletons of the co-trivial elements, which every standard family contains.
pub fn co_trivial_singletons(sys: &SeparationSystem<f64>) -> Vec<Vec<OrientedSepId>> {
    sys.trivial_elements().map(|s| vec![s.inverse()]).collect()
}

/// A random explicit family of sets of size at most 2, extended until it is
/// standard and closed under minimization.
pub fn minimization_closed_explicit(rng: &mut ChaCha8Rng, sys: &Sys) -> Family {
    let ids: Vec<OrientedSepId> = sys.oriented().collect();
    let mut members = co_trivial_singletons(sys);
    let count = rng.gen_range(0..3);
    for _ in 0..count {
        if ids.is_empty() {
            break;
        }
        let size = rng.gen_range(1..=2.min(ids.len()));
        let mut m: Vec<OrientedSepId> = ids.choose_multiple(rng, size).copied().collect();
        m.sort();
        members.push(m);
    }
    loop {
        let family = ForbiddenFamily::make_explicit(sys, &members).expect("members in range");
        match family.minimization_counterexample(usize::MAX) {
            None => return family,
            Some((_, lowered)) => members.push(lowered.to_vec()),
        }
    }
}

/// The empty family when it is standard, otherwise its standard extension.
pub fn standard_empty(sys: &Sys) -> Family {
    let singles = co_trivial_singletons(sys);
    if singles.is_empty() {
        ForbiddenFamily::make_empty(sys)
    } else {
        ForbiddenFamily::make_explicit(sys, &singles).unwrap()
    }
}

fn canonical(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    permute(&mut perm, 0, &mut |p| {
        let mut e: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(u, v)| (p[u].min(p[v]), p[u].max(p[v])))
            .collect();
        e.sort();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
    });
    best.unwrap_or_default()
}

fn permute(p: &mut Vec<usize>, i: usize, visit: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        visit(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, visit);
        p.swap(i, j);
    }
}

/// Every graph on `1..=max_n` vertices, one per isomorphism class.
pub fn all_graphs(max_n: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let mut seen = BTreeSet::new();
        for mask in 0u32..1 << slots.len() {
            let edges: Vec<(usize, usize)> = slots
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            if seen.insert(canonical(n, &edges)) {
                out.push(Graph::new(n, &edges).unwrap());
            }
        }
    }
    out
}

pub fn graph_sys(g: &Graph, k: usize) -> Sys {
    Arc::new(graph_system(g, k).unwrap())
}

/// A random complement-closed set of at most `max_seps` bipartitions of `n`
/// points, ordered by cut weight under a random similarity matrix.
pub fn random_bipartitions(rng: &mut ChaCha8Rng, n: usize, max_seps: usize) -> Sys {
    let all: Vec<u64> = (0u64..1 << (n - 1)).map(|x| x << 1).collect();
    let count = rng.gen_range(1..=max_seps.min(all.len()));
    let chosen: Vec<u64> = all.choose_multiple(rng, count).copied().collect();
    let full = (1u64 << n) - 1;
    let mut sides = Vec::new();
    for x in chosen {
        let (side, comp) = if rng.gen_bool(0.5) { (x, full & !x) } else { (full & !x, x) };
        sides.push(bits(side, n));
        sides.push(bits(comp, n));
    }
    let mut sim = vec![vec![0.0; n]; n];
    for u in 0..n {
        for v in u + 1..n {
            let w = rng.gen_range(0..4) as f64;
            sim[u][v] = w;
            sim[v][u] = w;
        }
    }
    let ground = BipartitionGround::from_sides(n, &sides, OrderRule::CutWeight(sim)).unwrap();
    Arc::new(bipartition_system(&ground).unwrap())
}

/// Bipartitions given by their forward sides, with uniform cut weight.
pub fn bipartitions(n: usize, forward: &[u64]) -> Sys {
    let full = (1u64 << n) - 1;
    let mut sides = Vec::new();
    for &x in forward {
        sides.push(bits(x, n));
        sides.push(bits(full & !x, n));
    }
    let ground = BipartitionGround::from_sides(n, &sides, OrderRule::uniform(n)).unwrap();
    Arc::new(bipartition_system(&ground).unwrap())
}

fn bits(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|v| mask >> v & 1 == 1).collect()
}

pub fn set(v: Vec<PartialOrientation>) -> BTreeSet<PartialOrientation> {
    v.into_iter().collect()
}

/// One system and family on which the builder's output is compared with the oracle.
pub struct Instance {
    pub name: String,
    pub system: Sys,
    pub family: Family,
}

impl Instance {
    pub fn new(name: impl Into<String>, system: &Sys, family: Family) -> Instance {
        Instance {
            name: name.into(),
            system: system.clone(),
            family,
        }
    }

    pub fn oracle_tangles(&self) -> BTreeSet<PartialOrientation> {
        set(all_tangles(&self.system, &self.family, &budget()).expect("within budget"))
    }
}

/// The generated corpus: random posets with `|S| <= 5`, every graph on at most
/// five vertices with `k <= 3`, and bipartition systems on at most six points.
pub fn corpus() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut r = rng(7);
    for i in 0..60 {
        let n = 1 + i % 5;
        let sys = random_poset(&mut r, n, i % 2 == 0);
        out.push(Instance::new(format!("poset{i}/empty"), &sys, standard_empty(&sys)));
        let fam = minimization_closed_explicit(&mut r, &sys);
        out.push(Instance::new(format!("poset{i}/explicit"), &sys, fam));
    }
    for (gi, g) in all_graphs(5).iter().enumerate() {
        for k in 1..=3 {
            let sys = graph_sys(g, k);
            let fam = ForbiddenFamily::make_blocks(&sys, k).unwrap();
            out.push(Instance::new(format!("graph{gi}/n{}/blocks{k}", g.n()), &sys, fam));
        }
    }
    for i in 0..30 {
        let n = 2 + i % 5;
        let sys = random_bipartitions(&mut r, n, 5);
        for c in 1..=3 {
            let fam = ForbiddenFamily::make_cluster(&sys, c).unwrap();
            out.push(Instance::new(format!("bip{i}/cluster{c}"), &sys, fam));
        }
        let fam = ForbiddenFamily::make(&sys, FamilyKind::StrongProfile).unwrap();
        out.push(Instance::new(format!("bip{i}/strong-profile"), &sys, fam));
    }
    out
}

/// Every partial orientation of `sys`, i.e. every subset of every orientation.
pub fn all_partial_orientations(sys: &SeparationSystem<f64>) -> Vec<PartialOrientation> {
    let mut out = vec![sys.empty_set()];
    for s in sys.seps() {
        let mut next = Vec::with_capacity(out.len() * 3);
        for sigma in &out {
            next.push(sigma.clone());
            next.push(sigma.with(s.forward()));
            next.push(sigma.with(s.backward()));
        }
        out = next;
    }
    out
}

/// Subsets of `sigma`.
pub fn subsets(sigma: &PartialOrientation) -> Vec<PartialOrientation> {
    let items = sigma.to_vec();
    (0u64..1 << items.len())
        .map(|mask| {
            PartialOrientation::from_ids(
                sigma.capacity(),
                items.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &a)| a),
            )
        })
        .collect()
}
