//! Concrete separation systems: vertex separations of small graphs and
//! bipartitions of finite point sets.

use std::collections::BTreeSet;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::scalar::{from_count, Scalar};
use crate::sepsys::{PartialOrientation, SeparationSystem, SetPair, Universe};

/// Largest graph handled: vertex sets are `u64` masks.
pub const MAX_GRAPH_VERTICES: usize = 64;

/// Largest point set for which every bipartition is generated.
pub const MAX_ALL_SUBSETS_POINTS: usize = 12;

/// The ground set a separation system was generated from.
#[derive(Clone, Debug)]
pub enum Ground {
    Graph(Graph),
    Points { n: usize },
}

impl Ground {
    pub fn graph(&self) -> Option<&Graph> {
        match self {
            Ground::Graph(g) => Some(g),
            Ground::Points { .. } => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Ground::Graph(g) => g.n(),
            Ground::Points { n } => *n,
        }
    }
}

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        if n > MAX_GRAPH_VERTICES {
            return Err(Error::InvalidGraph(format!(
                "{n} vertices exceeds the limit of {MAX_GRAPH_VERTICES}"
            )));
        }
        let mut adj = vec![0u64; n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge {u} {v} out of range 0..{n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("loop at vertex {u}")));
            }
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        Ok(Graph { n, adj })
    }

    pub fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::new(n, &edges).expect("complete graph is simple")
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::new(n, &edges).expect("path is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn all_vertices(&self) -> u64 {
        mask_below(self.n)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    pub fn neighbors(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| (u + 1..self.n).filter(move |&v| self.has_edge(u, v)).map(move |v| (u, v)))
            .collect()
    }

    /// Connected components of the subgraph induced on `within`, each as a
    /// mask, ordered by least vertex.
    pub fn components(&self, within: u64) -> Vec<u64> {
        let mut left = within;
        let mut out = Vec::new();
        while left != 0 {
            let start = left.trailing_zeros() as usize;
            let mut comp = 1u64 << start;
            let mut frontier = comp;
            while frontier != 0 {
                let v = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let fresh = self.adj[v] & within & !comp;
                comp |= fresh;
                frontier |= fresh;
            }
            left &= !comp;
            out.push(comp);
        }
        out
    }

    /// Whether some edge joins `a` and `b`.
    pub fn joins(&self, a: u64, b: u64) -> bool {
        ones(a).any(|v| self.adj[v] & b != 0)
    }
}

pub(crate) fn mask_below(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn ones(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(v)
        }
    })
}

pub(crate) fn mask_to_bits(mask: u64, n: usize) -> FixedBitSet {
    let mut bits = FixedBitSet::with_capacity(n);
    for v in ones(mask) {
        bits.insert(v);
    }
    bits
}

pub(crate) fn bits_to_mask(bits: &FixedBitSet) -> u64 {
    bits.ones().fold(0, |m, v| m | 1 << v)
}

fn subsets_up_to(n: usize, max_size: usize) -> Vec<u64> {
    let mut out = Vec::new();
    fn rec(start: usize, n: usize, left: usize, cur: u64, out: &mut Vec<u64>) {
        out.push(cur);
        if left == 0 {
            return;
        }
        for v in start..n {
            rec(v + 1, n, left - 1, cur | 1 << v, out);
        }
    }
    rec(0, n, max_size, 0, &mut out);
    out
}

/// All vertex separations `(A, B)` of `g` with `|A ∩ B| < k`, as unoriented
/// pairs `(forward, backward)`. The degenerate `(V, V)` is never produced.
///
/// The forward orientation is the one whose `A` mask is numerically smaller;
/// separations are sorted by order, then by their forward masks.
pub fn graph_separations(g: &Graph, k: usize) -> Vec<((u64, u64), (u64, u64))> {
    if k == 0 {
        return Vec::new();
    }
    let all = g.all_vertices();
    let mut seen = BTreeSet::new();
    for x in subsets_up_to(g.n(), k - 1) {
        let comps = g.components(all & !x);
        if comps.is_empty() {
            // X = V gives only (V, V)
            continue;
        }
        for choice in 0u64..1 << comps.len() {
            let side: u64 = comps
                .iter()
                .enumerate()
                .filter(|(i, _)| choice >> i & 1 == 1)
                .fold(0, |acc, (_, c)| acc | c);
            let a = x | side;
            let b = all & !side;
            let fwd = if a <= b { (a, b) } else { (b, a) };
            let back = (fwd.1, fwd.0);
            seen.insert(((x.count_ones(), fwd.0, fwd.1), (fwd, back)));
        }
    }
    seen.into_iter().map(|(_, pair)| pair).collect()
}

/// The system `S_k` of all separations of `g` of order `< k`, living in the
/// distributive universe of all separations of `g`.
pub fn graph_system<T: Scalar>(g: &Graph, k: usize) -> Result<SeparationSystem<T>> {
    let seps = graph_separations(g, k);
    let n = g.n();
    let mut pairs = Vec::with_capacity(2 * seps.len());
    let mut orders = Vec::with_capacity(seps.len());
    for (fwd, back) in &seps {
        orders.push(from_count::<T>((fwd.0 & fwd.1).count_ones() as usize));
        for (a, b) in [fwd, back] {
            pairs.push(SetPair {
                a: mask_to_bits(*a, n),
                b: mask_to_bits(*b, n),
            });
        }
    }
    let up = pair_relation(&pairs);
    let universe = Universe::from_pairs(Arc::new(Ground::Graph(g.clone())), pairs);
    SeparationSystem::from_relation(orders, up, Some(universe))
}

fn pair_relation(pairs: &[SetPair]) -> Vec<FixedBitSet> {
    let m = pairs.len();
    pairs
        .iter()
        .map(|p| {
            let mut row = FixedBitSet::with_capacity(m);
            for (j, q) in pairs.iter().enumerate() {
                if p.leq(q) {
                    row.insert(j);
                }
            }
            row
        })
        .collect()
}

/// `⋂ { B : (A, B) ∈ τ }` for a `B_k`-tangle `τ` of a graph system.
pub fn block_of_tangle<T: Scalar>(
    system: &SeparationSystem<T>,
    tau: &PartialOrientation,
    k: usize,
) -> Result<FixedBitSet> {
    let universe = system
        .universe()
        .filter(|u| u.ground().and_then(Ground::graph).is_some())
        .ok_or(Error::MissingCapability("graph ground"))?;
    let n = universe.ground().map(Ground::size).unwrap_or(0);
    if tau.capacity() != system.oriented_len() {
        return Err(Error::GroundMismatch {
            expected: system.oriented_len(),
            found: tau.capacity(),
        });
    }
    if !tau.is_full_orientation(system.len()) || !system.is_consistent(tau) {
        return Err(Error::NotATangle("not a consistent orientation".into()));
    }
    let mut block = FixedBitSet::with_capacity(n);
    block.insert_range(..);
    for a in tau.iter() {
        let pair = universe.pair(a).expect("graph systems carry set pairs");
        block.intersect_with(&pair.b);
    }
    if block.count_ones(..) < k {
        return Err(Error::NotATangle(format!(
            "big sides intersect in fewer than {k} vertices"
        )));
    }
    Ok(block)
}

/// How bipartitions of a point set are assigned their order.
#[derive(Clone, Debug)]
pub enum OrderRule<T> {
    /// `|{A, B}| = Σ_{u ∈ A, v ∈ B} sim(u, v)` for a symmetric matrix.
    CutWeight(Vec<Vec<T>>),
    /// One value per separation, in the ground's separation order.
    Explicit(Vec<T>),
}

impl<T: Scalar> OrderRule<T> {
    /// Cut weight under similarity 1 between all distinct points: `|A|·|B|`.
    pub fn uniform(n: usize) -> Self {
        let sim = (0..n)
            .map(|u| (0..n).map(|v| if u == v { T::zero() } else { T::one() }).collect())
            .collect();
        OrderRule::CutWeight(sim)
    }
}

/// A point set with a complement-closed family of chosen sides.
#[derive(Clone, Debug)]
pub struct BipartitionGround<T> {
    n: usize,
    /// The forward side of every separation; its inverse is the complement.
    sides: Vec<FixedBitSet>,
    rule: OrderRule<T>,
}

impl<T: Scalar> BipartitionGround<T> {
    /// Every bipartition `{X, V \ X}` of `V = {0..n}`, including `{∅, V}`.
    /// The forward side is the one avoiding point 0.
    pub fn all_subsets(n: usize, rule: OrderRule<T>) -> Result<Self> {
        if n > MAX_ALL_SUBSETS_POINTS {
            return Err(Error::Input(format!(
                "all bipartitions of {n} points exceeds the limit of {MAX_ALL_SUBSETS_POINTS}"
            )));
        }
        let sides = if n == 0 {
            Vec::new()
        } else {
            (0u64..1 << (n - 1))
                .map(|x| mask_to_bits(x << 1, n))
                .collect()
        };
        Self::checked(n, sides, rule)
    }

    /// Pairs up a complement-closed list of sides. Each separation is oriented
    /// towards the side that appears first; repeated sides collapse.
    pub fn from_sides(n: usize, sides: &[Vec<usize>], rule: OrderRule<T>) -> Result<Self> {
        let mut sets = Vec::new();
        for side in sides {
            let mut bits = FixedBitSet::with_capacity(n);
            for &p in side {
                if p >= n {
                    return Err(Error::Input(format!("point {p} out of range 0..{n}")));
                }
                bits.insert(p);
            }
            if !sets.contains(&bits) {
                sets.push(bits);
            }
        }
        let mut used = vec![false; sets.len()];
        let mut forward = Vec::new();
        for i in 0..sets.len() {
            if used[i] {
                continue;
            }
            let mut comp = sets[i].clone();
            comp.toggle_range(..);
            match sets.iter().position(|s| *s == comp) {
                Some(j) if j != i => {
                    used[i] = true;
                    used[j] = true;
                    forward.push(sets[i].clone());
                }
                _ => {
                    return Err(Error::NotComplementClosed(format!(
                        "side {} has no complement in the list",
                        crate::sepsys::format_set(&sets[i])
                    )))
                }
            }
        }
        Self::checked(n, forward, rule)
    }

    fn checked(n: usize, sides: Vec<FixedBitSet>, rule: OrderRule<T>) -> Result<Self> {
        match &rule {
            OrderRule::CutWeight(sim) => {
                if sim.len() != n || sim.iter().any(|row| row.len() != n) {
                    return Err(Error::Input(format!("similarity matrix must be {n}x{n}")));
                }
                for u in 0..n {
                    for v in 0..n {
                        if sim[u][v] != sim[v][u] {
                            return Err(Error::Input(format!("similarity not symmetric at ({u},{v})")));
                        }
                        if !sim[u][v].is_finite_value() || sim[u][v] < T::zero() {
                            return Err(Error::Input(format!("similarity at ({u},{v}) must be finite and non-negative")));
                        }
                    }
                }
            }
            OrderRule::Explicit(orders) => {
                if orders.len() != sides.len() {
                    return Err(Error::Input(format!(
                        "{} orders given for {} separations",
                        orders.len(),
                        sides.len()
                    )));
                }
            }
        }
        Ok(BipartitionGround { n, sides, rule })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sides(&self) -> &[FixedBitSet] {
        &self.sides
    }

    fn order_of(&self, i: usize) -> T {
        match &self.rule {
            OrderRule::Explicit(orders) => orders[i],
            OrderRule::CutWeight(sim) => {
                let side = &self.sides[i];
                let mut total = T::zero();
                for u in side.ones() {
                    for v in (0..self.n).filter(|v| !side.contains(*v)) {
                        total = total + sim[u][v];
                    }
                }
                total
            }
        }
    }
}

/// The system of a bipartition ground: side `X` is the pair `(V \ X, X)`, so
/// `X <= Y` iff `X ⊆ Y` and the inverse is the complement. The universe is the
/// distributive lattice of all subsets of `V`.
pub fn bipartition_system<T: Scalar>(ground: &BipartitionGround<T>) -> Result<SeparationSystem<T>> {
    let n = ground.n;
    let mut pairs = Vec::with_capacity(2 * ground.sides.len());
    for side in &ground.sides {
        let mut comp = side.clone();
        comp.toggle_range(..);
        pairs.push(SetPair {
            a: comp.clone(),
            b: side.clone(),
        });
        pairs.push(SetPair {
            a: side.clone(),
            b: comp,
        });
    }
    let orders = (0..ground.sides.len()).map(|i| ground.order_of(i)).collect();
    let up = pair_relation(&pairs);
    let universe = Universe::from_pairs(Arc::new(Ground::Points { n }), pairs);
    SeparationSystem::from_relation(orders, up, Some(universe))
}

/// Order assigned to a question's yes/no split of the respondents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuestionOrder {
    /// Cut weight where two persons' similarity is the number of questions
    /// they answer alike.
    #[default]
    Agreement,
    /// `|yes| · |no|`
    Balance,
}

/// A questionnaire turned into a bipartition system of its respondents.
#[derive(Clone, Debug)]
pub struct Questionnaire<T> {
    pub ground: BipartitionGround<T>,
    pub system: SeparationSystem<T>,
    /// The questions behind each separation, first one kept.
    pub questions: Vec<Vec<usize>>,
    /// `(dropped, kept)`: questions splitting the respondents like an earlier one.
    pub collapsed: Vec<(usize, usize)>,
}

/// One separation per distinct question, oriented towards its yes-side.
pub fn questionnaire_system<T: Scalar>(
    answers: &[Vec<bool>],
    rule: QuestionOrder,
) -> Result<Questionnaire<T>> {
    let persons = answers.len();
    let questions = answers.first().map_or(0, Vec::len);
    if answers.iter().any(|row| row.len() != questions) {
        return Err(Error::Input("answer rows differ in length".into()));
    }
    let mut sides: Vec<FixedBitSet> = Vec::new();
    let mut behind: Vec<Vec<usize>> = Vec::new();
    let mut collapsed = Vec::new();
    for q in 0..questions {
        let mut yes = FixedBitSet::with_capacity(persons);
        for (p, row) in answers.iter().enumerate() {
            yes.set(p, row[q]);
        }
        let mut no = yes.clone();
        no.toggle_range(..);
        match sides.iter().position(|s| *s == yes || *s == no) {
            Some(i) => {
                collapsed.push((q, behind[i][0]));
                behind[i].push(q);
            }
            None => {
                sides.push(yes);
                behind.push(vec![q]);
            }
        }
    }
    if persons == 0 && !sides.is_empty() {
        return Err(Error::Input("questions without respondents".into()));
    }
    let order_rule = match rule {
        QuestionOrder::Balance => OrderRule::uniform(persons),
        QuestionOrder::Agreement => {
            let sim = (0..persons)
                .map(|u| {
                    (0..persons)
                        .map(|v| {
                            if u == v {
                                T::zero()
                            } else {
                                from_count((0..questions).filter(|&q| answers[u][q] == answers[v][q]).count())
                            }
                        })
                        .collect()
                })
                .collect();
            OrderRule::CutWeight(sim)
        }
    };
    let ground = BipartitionGround::checked(persons, sides, order_rule)?;
    let system = bipartition_system(&ground)?;
    Ok(Questionnaire {
        ground,
        system,
        questions: behind,
        collapsed,
    })
}
