//! Finite separation systems: oriented separations with a partial order, an
//! order-reversing involution and an order function.
//!
//! Oriented separations are identified densely: the unoriented separation `s`
//! has the orientations `2s` (written `s→`) and `2s + 1` (written `s←`), and the
//! involution flips the low bit. The partial order is stored as an explicit
//! comparability matrix over the `2|S|` oriented elements, together with a few
//! derived relations that make consistency and closure bitset operations.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::Ground;
use crate::scalar::{cmp_values, Scalar};

/// An unoriented separation `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SepId(pub usize);

/// One of the two orientations of a separation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrientedSepId(pub usize);

impl SepId {
    pub fn forward(self) -> OrientedSepId {
        OrientedSepId(2 * self.0)
    }

    pub fn backward(self) -> OrientedSepId {
        OrientedSepId(2 * self.0 + 1)
    }

    pub fn orientations(self) -> [OrientedSepId; 2] {
        [self.forward(), self.backward()]
    }
}

impl OrientedSepId {
    pub fn sep(self) -> SepId {
        SepId(self.0 / 2)
    }

    pub fn is_forward(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn inverse(self) -> OrientedSepId {
        OrientedSepId(self.0 ^ 1)
    }

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for OrientedSepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.is_forward() { "→" } else { "←" };
        write!(f, "s{}{}", self.sep().0, arrow)
    }
}

/// A set of oriented separations of one system.
///
/// Orders lexicographically by the sorted sequence of oriented ids, so that
/// `{0} < {0, 3} < {1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialOrientation {
    bits: FixedBitSet,
}

impl PartialOrientation {
    /// An empty set for a system with `oriented_len = 2|S|` oriented elements.
    pub fn empty(oriented_len: usize) -> Self {
        PartialOrientation {
            bits: FixedBitSet::with_capacity(oriented_len),
        }
    }

    pub fn from_ids<I: IntoIterator<Item = OrientedSepId>>(oriented_len: usize, ids: I) -> Self {
        let mut set = Self::empty(oriented_len);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub(crate) fn from_bits(bits: FixedBitSet) -> Self {
        PartialOrientation { bits }
    }

    pub(crate) fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    /// Number of oriented elements of the underlying system.
    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, a: OrientedSepId) -> bool {
        self.bits.contains(a.0)
    }

    /// Panics if `a` lies outside the system.
    pub fn insert(&mut self, a: OrientedSepId) -> bool {
        assert!(a.0 < self.bits.len(), "oriented id {} out of range", a.0);
        !self.bits.put(a.0)
    }

    pub fn remove(&mut self, a: OrientedSepId) -> bool {
        let had = self.contains(a);
        if had {
            self.bits.set(a.0, false);
        }
        had
    }

    pub fn with(&self, a: OrientedSepId) -> Self {
        let mut out = self.clone();
        out.insert(a);
        out
    }

    pub fn without(&self, a: OrientedSepId) -> Self {
        let mut out = self.clone();
        out.remove(a);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = OrientedSepId> + '_ {
        self.bits.ones().map(OrientedSepId)
    }

    pub fn to_vec(&self) -> Vec<OrientedSepId> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &PartialOrientation) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn union_with(&mut self, other: &PartialOrientation) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersection(&self, other: &PartialOrientation) -> PartialOrientation {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        PartialOrientation { bits }
    }

    pub fn difference(&self, other: &PartialOrientation) -> PartialOrientation {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        PartialOrientation { bits }
    }

    /// Whether some orientation of `s` is a member.
    pub fn orients(&self, s: SepId) -> bool {
        self.contains(s.forward()) || self.contains(s.backward())
    }

    /// At most one orientation of every separation.
    pub fn is_orientation_of_subset(&self) -> bool {
        self.iter()
            .filter(|a| a.is_forward())
            .all(|a| !self.contains(a.inverse()))
    }

    /// Exactly one orientation of every separation of a system with `count` separations.
    pub fn is_full_orientation(&self, count: usize) -> bool {
        (0..count).all(|s| self.contains(SepId(s).forward()) ^ self.contains(SepId(s).backward()))
    }
}

impl Ord for PartialOrientation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for PartialOrientation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PartialOrientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|a| a.0)).finish()
    }
}

/// Upper limit on an order-restriction: `S_k = { s : |s| < k }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold<T> {
    Below(T),
    Unbounded,
}

impl<T: Scalar> Threshold<T> {
    pub fn admits(&self, order: &T) -> bool {
        match self {
            Threshold::Below(k) => order < k,
            Threshold::Unbounded => true,
        }
    }

    pub fn min(self, other: Self) -> Self {
        match (self, other) {
            (Threshold::Unbounded, x) | (x, Threshold::Unbounded) => x,
            (Threshold::Below(a), Threshold::Below(b)) => {
                if b < a {
                    Threshold::Below(b)
                } else {
                    Threshold::Below(a)
                }
            }
        }
    }
}

impl<T: fmt::Display> fmt::Display for Threshold<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Below(k) => write!(f, "{k}"),
            Threshold::Unbounded => write!(f, "all"),
        }
    }
}

/// Join and meet tables over the oriented elements of a system that is itself
/// a lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeTables {
    pub join: Vec<Vec<usize>>,
    pub meet: Vec<Vec<usize>>,
}

/// A pair `(A, B)` of subsets of a ground set, the concrete form of graph
/// separations and of set bipartitions `X ~ (V \ X, X)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPair {
    pub a: FixedBitSet,
    pub b: FixedBitSet,
}

impl SetPair {
    /// `(A, B) <= (C, D)` iff `A ⊇ C` and `B ⊆ D`.
    pub fn leq(&self, other: &SetPair) -> bool {
        other.a.is_subset(&self.a) && self.b.is_subset(&other.b)
    }

    pub fn join(&self, other: &SetPair) -> SetPair {
        let mut a = self.a.clone();
        a.intersect_with(&other.a);
        let mut b = self.b.clone();
        b.union_with(&other.b);
        SetPair { a, b }
    }

    pub fn meet(&self, other: &SetPair) -> SetPair {
        let mut a = self.a.clone();
        a.union_with(&other.a);
        let mut b = self.b.clone();
        b.intersect_with(&other.b);
        SetPair { a, b }
    }

    pub fn swap(&self) -> SetPair {
        SetPair {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// `|A ∩ B|`
    pub fn separator_size(&self) -> usize {
        self.a.intersection(&self.b).count()
    }
}

#[derive(Clone, Debug)]
enum UniverseRepr {
    /// The lattice given by tables over the elements of the system it was loaded
    /// with; `embed` maps current oriented ids into it.
    Lattice {
        tables: Arc<LatticeTables>,
        leq: Arc<Vec<FixedBitSet>>,
        embed: Vec<usize>,
        lookup: Vec<Option<OrientedSepId>>,
    },
    /// Separations as set pairs over a ground set.
    Sets {
        ground: Arc<Ground>,
        pairs: Vec<SetPair>,
        lookup: HashMap<SetPair, OrientedSepId>,
    },
}

/// The lattice of separations a system lives in.
#[derive(Clone, Debug)]
pub struct Universe {
    repr: UniverseRepr,
    distributive: bool,
}

impl Universe {
    pub(crate) fn from_pairs(ground: Arc<Ground>, pairs: Vec<SetPair>) -> Universe {
        let lookup = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), OrientedSepId(i)))
            .collect();
        Universe {
            repr: UniverseRepr::Sets {
                ground,
                pairs,
                lookup,
            },
            distributive: true,
        }
    }

    fn from_tables(tables: LatticeTables, leq: Vec<FixedBitSet>, distributive: bool) -> Universe {
        let size = tables.join.len();
        Universe {
            repr: UniverseRepr::Lattice {
                tables: Arc::new(tables),
                leq: Arc::new(leq),
                embed: (0..size).collect(),
                lookup: (0..size).map(|i| Some(OrientedSepId(i))).collect(),
            },
            distributive,
        }
    }

    pub fn is_distributive(&self) -> bool {
        self.distributive
    }

    /// The supremum of `x` and `y` in the universe, if it is an element of this system.
    pub fn join(&self, x: OrientedSepId, y: OrientedSepId) -> Option<OrientedSepId> {
        match &self.repr {
            UniverseRepr::Lattice {
                tables,
                embed,
                lookup,
                ..
            } => lookup[tables.join[embed[x.0]][embed[y.0]]],
            UniverseRepr::Sets { pairs, lookup, .. } => {
                lookup.get(&pairs[x.0].join(&pairs[y.0])).copied()
            }
        }
    }

    /// The infimum of `x` and `y` in the universe, if it is an element of this system.
    pub fn meet(&self, x: OrientedSepId, y: OrientedSepId) -> Option<OrientedSepId> {
        match &self.repr {
            UniverseRepr::Lattice {
                tables,
                embed,
                lookup,
                ..
            } => lookup[tables.meet[embed[x.0]][embed[y.0]]],
            UniverseRepr::Sets { pairs, lookup, .. } => {
                lookup.get(&pairs[x.0].meet(&pairs[y.0])).copied()
            }
        }
    }

    /// Whether `z <= x ∨ y`, the supremum taken in the universe (it need not lie
    /// in the system).
    pub fn below_join(&self, z: OrientedSepId, x: OrientedSepId, y: OrientedSepId) -> bool {
        match &self.repr {
            UniverseRepr::Lattice {
                tables, leq, embed, ..
            } => {
                let j = tables.join[embed[x.0]][embed[y.0]];
                leq[embed[z.0]].contains(j)
            }
            UniverseRepr::Sets { pairs, .. } => pairs[z.0].leq(&pairs[x.0].join(&pairs[y.0])),
        }
    }

    pub fn pair(&self, x: OrientedSepId) -> Option<&SetPair> {
        match &self.repr {
            UniverseRepr::Sets { pairs, .. } => pairs.get(x.0),
            UniverseRepr::Lattice { .. } => None,
        }
    }

    pub fn ground(&self) -> Option<&Ground> {
        match &self.repr {
            UniverseRepr::Sets { ground, .. } => Some(ground),
            UniverseRepr::Lattice { .. } => None,
        }
    }

    /// `kept[i]` is the old oriented id of the new oriented id `i`.
    fn restrict(&self, kept: &[usize]) -> Universe {
        let repr = match &self.repr {
            UniverseRepr::Lattice {
                tables, leq, embed, ..
            } => {
                let new_embed: Vec<usize> = kept.iter().map(|&old| embed[old]).collect();
                let mut lookup = vec![None; tables.join.len()];
                for (new, &amb) in new_embed.iter().enumerate() {
                    lookup[amb] = Some(OrientedSepId(new));
                }
                UniverseRepr::Lattice {
                    tables: tables.clone(),
                    leq: leq.clone(),
                    embed: new_embed,
                    lookup,
                }
            }
            UniverseRepr::Sets { ground, pairs, .. } => {
                let pairs: Vec<SetPair> = kept.iter().map(|&old| pairs[old].clone()).collect();
                let lookup = pairs
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.clone(), OrientedSepId(i)))
                    .collect();
                UniverseRepr::Sets {
                    ground: ground.clone(),
                    pairs,
                    lookup,
                }
            }
        };
        Universe {
            repr,
            distributive: self.distributive,
        }
    }
}

/// An unvalidated description of a separation system, as loaded from input.
#[derive(Clone, Debug)]
pub struct SystemSpec<T> {
    pub count: usize,
    pub orders: Vec<T>,
    /// Comparable pairs `a <= b`. Reflexive pairs may be omitted.
    pub leq: Vec<(OrientedSepId, OrientedSepId)>,
    pub lattice: Option<LatticeTables>,
    pub distributive: bool,
    /// Take the transitive closure of `leq` instead of requiring it to be closed.
    pub close_transitively: bool,
    /// Admit separations with `s→ = s←` (expressed as mutual comparability).
    pub allow_degenerate: bool,
}

impl<T> SystemSpec<T> {
    pub fn new(orders: Vec<T>, leq: Vec<(OrientedSepId, OrientedSepId)>) -> Self {
        SystemSpec {
            count: orders.len(),
            orders,
            leq,
            lattice: None,
            distributive: false,
            close_transitively: false,
            allow_degenerate: false,
        }
    }

    pub fn closed(mut self) -> Self {
        self.close_transitively = true;
        self
    }
}

/// A failed separation-system axiom. Ids are oriented ids unless named `sep`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum AxiomViolation {
    OrderCount { expected: usize, found: usize },
    NonFiniteOrder { sep: usize },
    IdOutOfRange { id: usize },
    Antisymmetry { a: usize, b: usize },
    Transitivity { a: usize, b: usize, c: usize },
    InvolutionNotOrderReversing { a: usize, b: usize },
    Degenerate { sep: usize },
    LatticeShape { detail: String },
    JoinNotSupremum { a: usize, b: usize },
    MeetNotInfimum { a: usize, b: usize },
    Commutativity { op: &'static str, a: usize, b: usize },
    Associativity { op: &'static str, a: usize, b: usize, c: usize },
    Absorption { a: usize, b: usize },
    Distributivity { a: usize, b: usize, c: usize },
}

impl AxiomViolation {
    pub fn axiom(&self) -> &'static str {
        match self {
            AxiomViolation::OrderCount { .. } => "order_count",
            AxiomViolation::NonFiniteOrder { .. } => "non_finite_order",
            AxiomViolation::IdOutOfRange { .. } => "id_out_of_range",
            AxiomViolation::Antisymmetry { .. } => "antisymmetry",
            AxiomViolation::Transitivity { .. } => "transitivity",
            AxiomViolation::InvolutionNotOrderReversing { .. } => "involution_not_order_reversing",
            AxiomViolation::Degenerate { .. } => "degenerate",
            AxiomViolation::LatticeShape { .. } => "lattice_shape",
            AxiomViolation::JoinNotSupremum { .. } => "join_not_supremum",
            AxiomViolation::MeetNotInfimum { .. } => "meet_not_infimum",
            AxiomViolation::Commutativity { .. } => "commutativity",
            AxiomViolation::Associativity { .. } => "associativity",
            AxiomViolation::Absorption { .. } => "absorption",
            AxiomViolation::Distributivity { .. } => "distributivity",
        }
    }
}

/// Every axiom violation found in a [`SystemSpec`]. Empty iff well-formed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<AxiomViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, axiom: &str) -> bool {
        self.violations.iter().any(|v| v.axiom() == axiom)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        let names: Vec<_> = self.violations.iter().map(|v| format!("{v:?}")).collect();
        write!(f, "{}", names.join("; "))
    }
}

/// Checks a system description against the separation-system axioms.
pub fn validate<T: Scalar>(spec: &SystemSpec<T>) -> ValidationReport {
    check_spec(spec).0
}

fn check_spec<T: Scalar>(spec: &SystemSpec<T>) -> (ValidationReport, Vec<FixedBitSet>) {
    let mut violations = Vec::new();
    let m = 2 * spec.count;
    if spec.orders.len() != spec.count {
        violations.push(AxiomViolation::OrderCount {
            expected: spec.count,
            found: spec.orders.len(),
        });
    }
    for (s, o) in spec.orders.iter().enumerate() {
        if !o.is_finite_value() {
            violations.push(AxiomViolation::NonFiniteOrder { sep: s });
        }
    }
    let mut up = vec![FixedBitSet::with_capacity(m); m];
    for (a, row) in up.iter_mut().enumerate() {
        row.insert(a);
    }
    for &(a, b) in &spec.leq {
        for id in [a.0, b.0] {
            if id >= m {
                violations.push(AxiomViolation::IdOutOfRange { id });
            }
        }
        if a.0 < m && b.0 < m {
            up[a.0].insert(b.0);
        }
    }
    if spec.close_transitively {
        transitive_closure(&mut up);
    }
    violations.extend(poset_violations(&up, spec.allow_degenerate));
    if let Some(tables) = &spec.lattice {
        violations.extend(lattice_violations(tables, &up, spec.distributive));
    }
    (ValidationReport { violations }, up)
}

fn transitive_closure(up: &mut [FixedBitSet]) {
    let m = up.len();
    for k in 0..m {
        let row_k = up[k].clone();
        for row in up.iter_mut() {
            if row.contains(k) {
                row.union_with(&row_k);
            }
        }
    }
}

fn poset_violations(up: &[FixedBitSet], allow_degenerate: bool) -> Vec<AxiomViolation> {
    let m = up.len();
    let mut out = Vec::new();
    for a in 0..m {
        for b in up[a].ones() {
            if b <= a || !up[b].contains(a) {
                continue;
            }
            if b == a ^ 1 {
                if !allow_degenerate {
                    out.push(AxiomViolation::Degenerate { sep: a / 2 });
                }
            } else {
                out.push(AxiomViolation::Antisymmetry { a, b });
            }
        }
    }
    for a in 0..m {
        for b in up[a].ones() {
            if b == a {
                continue;
            }
            for c in up[b].ones() {
                if !up[a].contains(c) {
                    out.push(AxiomViolation::Transitivity { a, b, c });
                }
            }
        }
    }
    for a in 0..m {
        for b in up[a].ones() {
            if !up[b ^ 1].contains(a ^ 1) {
                out.push(AxiomViolation::InvolutionNotOrderReversing { a, b });
            }
        }
    }
    out
}

fn lattice_violations(t: &LatticeTables, up: &[FixedBitSet], distributive: bool) -> Vec<AxiomViolation> {
    let m = up.len();
    let shape_ok = |table: &Vec<Vec<usize>>| {
        table.len() == m && table.iter().all(|row| row.len() == m && row.iter().all(|&x| x < m))
    };
    if !shape_ok(&t.join) || !shape_ok(&t.meet) {
        return vec![AxiomViolation::LatticeShape {
            detail: format!("join and meet must be {m}x{m} tables of oriented ids"),
        }];
    }
    let leq = |a: usize, b: usize| up[a].contains(b);
    let mut out = Vec::new();
    for a in 0..m {
        for b in 0..m {
            let (j, mt) = (t.join[a][b], t.meet[a][b]);
            if t.join[a][b] != t.join[b][a] {
                out.push(AxiomViolation::Commutativity { op: "join", a, b });
            }
            if t.meet[a][b] != t.meet[b][a] {
                out.push(AxiomViolation::Commutativity { op: "meet", a, b });
            }
            if t.join[a][t.meet[a][b]] != a || t.meet[a][t.join[a][b]] != a {
                out.push(AxiomViolation::Absorption { a, b });
            }
            let upper = leq(a, j) && leq(b, j);
            let least = (0..m).all(|c| !(leq(a, c) && leq(b, c)) || leq(j, c));
            if !(upper && least) {
                out.push(AxiomViolation::JoinNotSupremum { a, b });
            }
            let lower = leq(mt, a) && leq(mt, b);
            let greatest = (0..m).all(|c| !(leq(c, a) && leq(c, b)) || leq(c, mt));
            if !(lower && greatest) {
                out.push(AxiomViolation::MeetNotInfimum { a, b });
            }
        }
    }
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                if t.join[t.join[a][b]][c] != t.join[a][t.join[b][c]] {
                    out.push(AxiomViolation::Associativity { op: "join", a, b, c });
                }
                if t.meet[t.meet[a][b]][c] != t.meet[a][t.meet[b][c]] {
                    out.push(AxiomViolation::Associativity { op: "meet", a, b, c });
                }
                if distributive && t.meet[a][t.join[b][c]] != t.join[t.meet[a][b]][t.meet[a][c]] {
                    out.push(AxiomViolation::Distributivity { a, b, c });
                }
            }
        }
    }
    out
}

/// A validated, immutable finite separation system with order values of type `T`.
#[derive(Clone, Debug)]
pub struct SeparationSystem<T> {
    count: usize,
    orders: Vec<T>,
    /// `up[a] = { b : a <= b }`
    up: Vec<FixedBitSet>,
    /// `down[a] = { b : b <= a }`
    down: Vec<FixedBitSet>,
    /// `{ b : a < b, sep(b) != sep(a) }`, what `{a}` requires
    requires: Vec<FixedBitSet>,
    /// `{ b : sep(b) != sep(a), a <= b* }`, the elements pointing away from `a`
    away: Vec<FixedBitSet>,
    trivial: FixedBitSet,
    degenerate: FixedBitSet,
    universe: Option<Universe>,
    parent_ids: Vec<SepId>,
    origin: Vec<SepId>,
}

impl<T: Scalar> SeparationSystem<T> {
    /// Validates a system description and builds the system from it.
    pub fn from_spec(spec: SystemSpec<T>) -> Result<Self> {
        let (report, up) = check_spec(&spec);
        if !report.is_valid() {
            return Err(Error::InvalidSystem(report));
        }
        let universe = spec
            .lattice
            .map(|t| Universe::from_tables(t, up.clone(), spec.distributive));
        Ok(Self::assemble(spec.orders, up, universe, None))
    }

    /// Builds a system from an up-set relation, validating the poset axioms.
    pub(crate) fn from_relation(
        orders: Vec<T>,
        up: Vec<FixedBitSet>,
        universe: Option<Universe>,
    ) -> Result<Self> {
        let mut violations = Vec::new();
        for (s, o) in orders.iter().enumerate() {
            if !o.is_finite_value() {
                violations.push(AxiomViolation::NonFiniteOrder { sep: s });
            }
        }
        violations.extend(poset_violations(&up, false));
        if !violations.is_empty() {
            return Err(Error::InvalidSystem(ValidationReport { violations }));
        }
        Ok(Self::assemble(orders, up, universe, None))
    }

    fn assemble(
        orders: Vec<T>,
        up: Vec<FixedBitSet>,
        universe: Option<Universe>,
        lineage: Option<(Vec<SepId>, Vec<SepId>)>,
    ) -> Self {
        let count = orders.len();
        let m = 2 * count;
        let mut down = vec![FixedBitSet::with_capacity(m); m];
        for (a, row) in up.iter().enumerate() {
            for b in row.ones() {
                down[b].insert(a);
            }
        }
        let mut degenerate = FixedBitSet::with_capacity(count);
        for s in 0..count {
            if up[2 * s].contains(2 * s + 1) && up[2 * s + 1].contains(2 * s) {
                degenerate.insert(s);
            }
        }
        let strictly_below = |a: usize, b: usize| up[a].contains(b) && !up[b].contains(a);
        let mut requires = vec![FixedBitSet::with_capacity(m); m];
        let mut away = vec![FixedBitSet::with_capacity(m); m];
        for a in 0..m {
            for b in up[a].ones() {
                if b / 2 != a / 2 && strictly_below(a, b) {
                    requires[a].insert(b);
                }
                // a <= b means a points away from b*
                if b / 2 != a / 2 {
                    away[a].insert(b ^ 1);
                }
            }
        }
        let mut trivial = FixedBitSet::with_capacity(m);
        for a in 0..m {
            let is_trivial = down[a]
                .ones()
                .any(|r| r / 2 != a / 2 && strictly_below(r, a) && strictly_below(r ^ 1, a));
            if is_trivial {
                trivial.insert(a);
            }
        }
        let (parent_ids, origin) =
            lineage.unwrap_or_else(|| ((0..count).map(SepId).collect(), (0..count).map(SepId).collect()));
        SeparationSystem {
            count,
            orders,
            up,
            down,
            requires,
            away,
            trivial,
            degenerate,
            universe,
            parent_ids,
            origin,
        }
    }

    /// Number of unoriented separations `|S|`.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Number of oriented separations, `2|S|`.
    pub fn oriented_len(&self) -> usize {
        2 * self.count
    }

    pub fn seps(&self) -> impl Iterator<Item = SepId> {
        (0..self.count).map(SepId)
    }

    pub fn oriented(&self) -> impl Iterator<Item = OrientedSepId> {
        (0..2 * self.count).map(OrientedSepId)
    }

    pub fn empty_set(&self) -> PartialOrientation {
        PartialOrientation::empty(self.oriented_len())
    }

    pub fn set_of<I: IntoIterator<Item = OrientedSepId>>(&self, ids: I) -> PartialOrientation {
        PartialOrientation::from_ids(self.oriented_len(), ids)
    }

    pub fn order(&self, s: SepId) -> T {
        self.orders[s.0]
    }

    pub fn order_of(&self, a: OrientedSepId) -> T {
        self.orders[a.sep().0]
    }

    pub fn orders(&self) -> &[T] {
        &self.orders
    }

    /// Distinct order values in increasing order.
    pub fn distinct_orders(&self) -> Vec<T> {
        let mut values = self.orders.clone();
        values.sort_by(cmp_values);
        values.dedup_by(|a, b| a == b);
        values
    }

    /// No two separations share an order value.
    pub fn is_injective(&self) -> bool {
        let distinct = self.distinct_orders();
        distinct.len() == self.count
    }

    pub fn leq(&self, a: OrientedSepId, b: OrientedSepId) -> bool {
        self.up[a.0].contains(b.0)
    }

    pub fn lt(&self, a: OrientedSepId, b: OrientedSepId) -> bool {
        self.leq(a, b) && !self.leq(b, a)
    }

    /// Elements `b` with `b <= a`.
    pub fn down_set(&self, a: OrientedSepId) -> impl Iterator<Item = OrientedSepId> + '_ {
        self.down[a.0].ones().map(OrientedSepId)
    }

    /// Elements `b` with `a <= b`.
    pub fn up_set(&self, a: OrientedSepId) -> impl Iterator<Item = OrientedSepId> + '_ {
        self.up[a.0].ones().map(OrientedSepId)
    }

    /// `a <= a*`
    pub fn is_small(&self, a: OrientedSepId) -> bool {
        self.leq(a, a.inverse())
    }

    /// Both orientations of some other separation lie strictly below `a`.
    pub fn is_trivial(&self, a: OrientedSepId) -> bool {
        self.trivial.contains(a.0)
    }

    pub fn is_co_trivial(&self, a: OrientedSepId) -> bool {
        self.is_trivial(a.inverse())
    }

    pub fn is_degenerate(&self, s: SepId) -> bool {
        self.degenerate.contains(s.0)
    }

    pub fn trivial_elements(&self) -> impl Iterator<Item = OrientedSepId> + '_ {
        self.trivial.ones().map(OrientedSepId)
    }

    /// `r` points towards `s`: `r >= s→` or `r >= s←`.
    pub fn points_towards(&self, r: OrientedSepId, s: SepId) -> bool {
        self.leq(s.forward(), r) || self.leq(s.backward(), r)
    }

    /// Some orientations of `r` and `s` are comparable.
    pub fn is_nested(&self, r: SepId, s: SepId) -> bool {
        r.orientations()
            .iter()
            .any(|&a| s.orientations().iter().any(|&b| self.leq(a, b) || self.leq(b, a)))
    }

    fn check_capacity(&self, sigma: &PartialOrientation) -> Result<()> {
        if sigma.capacity() != self.oriented_len() {
            return Err(Error::GroundMismatch {
                expected: self.oriented_len(),
                found: sigma.capacity(),
            });
        }
        Ok(())
    }

    /// No two members of distinct separations point away from each other.
    pub fn is_consistent(&self, sigma: &PartialOrientation) -> bool {
        sigma.iter().all(|a| self.away[a.0].is_disjoint(sigma.bits()))
    }

    /// Whether `sigma ∪ {a}` stays consistent, given that `sigma` is.
    pub fn consistent_with(&self, sigma: &PartialOrientation, a: OrientedSepId) -> bool {
        self.away[a.0].is_disjoint(sigma.bits())
    }

    /// `⌊σ⌋ = σ ∪ { s : ∃ r ∈ σ, r ≠ s, s > r }`.
    pub fn closure(&self, sigma: &PartialOrientation) -> Result<PartialOrientation> {
        self.check_capacity(sigma)?;
        if !self.is_consistent(sigma) {
            return Err(Error::InconsistentInput);
        }
        Ok(self.closure_unchecked(sigma))
    }

    /// The closure formula applied without the consistency precondition.
    pub(crate) fn closure_unchecked(&self, sigma: &PartialOrientation) -> PartialOrientation {
        let mut bits = sigma.bits().clone();
        for a in sigma.iter() {
            bits.union_with(&self.requires[a.0]);
        }
        PartialOrientation::from_bits(bits)
    }

    /// Non-degenerate elements pairwise satisfying `r >= s*`.
    pub fn is_star(&self, sigma: &PartialOrientation) -> bool {
        if sigma.iter().any(|a| self.is_degenerate(a.sep())) {
            return false;
        }
        sigma
            .iter()
            .all(|r| sigma.iter().all(|s| r == s || self.leq(s.inverse(), r)))
    }

    /// `r` eclipses `s`: `r < s` and `|r| < |s|`.
    pub fn eclipses(&self, r: OrientedSepId, s: OrientedSepId) -> bool {
        self.lt(r, s) && self.order_of(r) < self.order_of(s)
    }

    /// `r` weakly eclipses `s`: `r < s` and `|r| <= |s|`.
    pub fn weakly_eclipses(&self, r: OrientedSepId, s: OrientedSepId) -> bool {
        self.lt(r, s) && self.order_of(r) <= self.order_of(s)
    }

    pub fn universe(&self) -> Option<&Universe> {
        self.universe.as_ref()
    }

    /// Every pair of elements has its join or its meet in the system.
    /// `None` without a universe.
    pub fn is_submodular(&self) -> Option<bool> {
        let u = self.universe.as_ref()?;
        Some(self.oriented().all(|a| {
            self.oriented()
                .all(|b| u.join(a, b).is_some() || u.meet(a, b).is_some())
        }))
    }

    /// For a system produced by [`restrict_below`](Self::restrict_below): the
    /// separation of the parent system each separation came from.
    pub fn parent_ids(&self) -> &[SepId] {
        &self.parent_ids
    }

    /// The separation of the originally loaded system each separation came from.
    pub fn origin(&self) -> &[SepId] {
        &self.origin
    }

    pub fn origin_of(&self, a: OrientedSepId) -> OrientedSepId {
        let s = self.origin[a.sep().0];
        if a.is_forward() {
            s.forward()
        } else {
            s.backward()
        }
    }

    /// The subsystem `S_k` of separations of order `< k`, with inherited order,
    /// involution and order function. Separations keep their relative order.
    pub fn restrict_below(&self, k: Threshold<T>) -> SeparationSystem<T> {
        let kept: Vec<usize> = (0..self.count).filter(|&s| k.admits(&self.orders[s])).collect();
        let kept_oriented: Vec<usize> = kept.iter().flat_map(|&s| [2 * s, 2 * s + 1]).collect();
        let m = kept_oriented.len();
        let up: Vec<FixedBitSet> = kept_oriented
            .iter()
            .map(|&old| {
                let mut row = FixedBitSet::with_capacity(m);
                for (new, &other) in kept_oriented.iter().enumerate() {
                    if self.up[old].contains(other) {
                        row.insert(new);
                    }
                }
                row
            })
            .collect();
        let orders = kept.iter().map(|&s| self.orders[s]).collect();
        let universe = self.universe.as_ref().map(|u| u.restrict(&kept_oriented));
        let parent_ids = kept.iter().map(|&s| SepId(s)).collect();
        let origin = kept.iter().map(|&s| self.origin[s]).collect();
        Self::assemble(orders, up, universe, Some((parent_ids, origin)))
    }

    /// Maps this system's separations to those of `sub`, a restriction of it.
    pub fn embedding_into(&self, sub: &SeparationSystem<T>) -> Vec<Option<SepId>> {
        let mut map = vec![None; self.count];
        for (i, &p) in sub.parent_ids.iter().enumerate() {
            map[p.0] = Some(SepId(i));
        }
        map
    }

    /// Human-readable form of an oriented separation, using its set pair when known.
    pub fn describe(&self, a: OrientedSepId) -> String {
        match self.universe.as_ref().and_then(|u| u.pair(a).map(|p| (u, p))) {
            Some((u, pair)) => match u.ground() {
                Some(Ground::Points { .. }) => format_set(&pair.b),
                _ => format!("({}|{})", format_set(&pair.a), format_set(&pair.b)),
            },
            None => a.to_string(),
        }
    }
}

pub(crate) fn format_set(set: &FixedBitSet) -> String {
    let items: Vec<String> = set.ones().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Maps an oriented id through a separation map, keeping its side.
pub(crate) fn map_oriented(a: OrientedSepId, map: &[Option<SepId>]) -> Option<OrientedSepId> {
    map[a.sep().0].map(|s| if a.is_forward() { s.forward() } else { s.backward() })
}
