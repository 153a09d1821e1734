//! Construction of thoroughly ordered structure trees, edge contraction,
//! necessity and reduction to irreducible trees, and the per-threshold pipeline.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forbidden::{ForbiddenFamily, Witness};
use crate::scalar::{cmp_values, Scalar};
use crate::sepsys::{OrientedSepId, PartialOrientation, SepId, SeparationSystem, Threshold};
use crate::tree::{LeafClass, NodeId, StructureTree};

/// Choice among unoriented separations of minimum order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Tiebreak {
    #[default]
    LeastId,
    GreatestId,
}

/// Which orientation labels the first child created at a split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ChildOrder {
    #[default]
    ForwardFirst,
    BackwardFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildConfig {
    pub tiebreak: Tiebreak,
    pub child_order: ChildOrder,
    /// Safety cap on the node count, on top of `2^{|S|+1} - 1`.
    pub max_nodes: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            tiebreak: Tiebreak::LeastId,
            child_order: ChildOrder::ForwardFirst,
            max_nodes: 1 << 20,
        }
    }
}

fn node_cap(system_len: usize, config: &BuildConfig) -> usize {
    let bound = if system_len + 1 >= usize::BITS as usize {
        usize::MAX
    } else {
        (1usize << (system_len + 1)) - 1
    };
    bound.min(config.max_nodes)
}

/// A separation of minimum order among those `closure` leaves unoriented.
fn pick_separation<T: Scalar>(
    system: &SeparationSystem<T>,
    closure: &PartialOrientation,
    tiebreak: Tiebreak,
) -> Option<SepId> {
    let candidates = system.seps().filter(|&s| !closure.orients(s));
    let better = |best: SepId, s: SepId| match cmp_values(&system.order(s), &system.order(best)) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Equal => tiebreak == Tiebreak::GreatestId,
        std::cmp::Ordering::Greater => false,
    };
    candidates.fold(None, |best, s| match best {
        Some(b) if !better(b, s) => Some(b),
        _ => Some(s),
    })
}

/// Grows a tree from a single root: while some leaf is neither a tangle leaf
/// nor forbidden, split it on a minimum-order separation not oriented by the
/// closure of its labels.
///
/// For a standard and rich family the result is a thoroughly ordered
/// `F`-tangle structure tree. A leaf whose labels' closure orients all of `S`
/// without being a tangle or containing a member of `F` cannot be split; it
/// is left unresolved, which only happens for families that are not rich.
pub fn build<T: Scalar>(
    system: &Arc<SeparationSystem<T>>,
    family: &ForbiddenFamily<T>,
    config: &BuildConfig,
) -> Result<StructureTree<T>> {
    if family.system().oriented_len() != system.oriented_len() {
        return Err(Error::GroundMismatch {
            expected: system.oriented_len(),
            found: family.system().oriented_len(),
        });
    }
    let cap = node_cap(system.len(), config);
    let mut tree = StructureTree::single(system.clone());
    let mut queue = VecDeque::from([tree.root()]);
    while let Some(v) = queue.pop_front() {
        if tree.classify_leaf(v, family)? != LeafClass::Unresolved {
            continue;
        }
        let beta = tree.beta(v)?.clone();
        if let Some(a) = beta.iter().find(|&a| system.is_co_trivial(a)) {
            return Err(Error::NonStandardFamily { node: v, element: a });
        }
        if !system.is_consistent(&beta) {
            return Err(Error::MalformedTree(format!("leaf {v} has inconsistent labels")));
        }
        let closure = system.closure_unchecked(&beta);
        let Some(s) = pick_separation(system, &closure, config.tiebreak) else {
            continue;
        };
        if tree.node_count() + 2 > cap {
            return Err(Error::NodeCapExceeded(cap));
        }
        let labels = match config.child_order {
            ChildOrder::ForwardFirst => [s.forward(), s.backward()],
            ChildOrder::BackwardFirst => [s.backward(), s.forward()],
        };
        queue.extend(tree.add_children(v, &labels));
    }
    Ok(tree)
}

/// Leaves of `tree` that are neither tangle leaves nor forbidden.
pub fn unresolved_leaves<T: Scalar>(tree: &StructureTree<T>, family: &ForbiddenFamily<T>) -> Result<Vec<NodeId>> {
    Ok(tree
        .classify_leaves(family)?
        .into_iter()
        .filter(|(_, c)| *c == LeafClass::Unresolved)
        .map(|(l, _)| l)
        .collect())
}

/// `T_{w→v}`; see [`StructureTree::contract`].
pub fn contract<T: Scalar>(tree: &StructureTree<T>, v: NodeId, w: NodeId) -> Result<StructureTree<T>> {
    tree.contract(v, w)
}

/// Whether `a` is necessary for the leaf `l`: a minimal element of `β_ℓ` at a
/// tangle leaf, and in every `F`-subset of `β_ℓ` at a forbidden leaf.
pub fn necessary_for_leaf<T: Scalar>(
    a: OrientedSepId,
    l: NodeId,
    tree: &StructureTree<T>,
    family: &ForbiddenFamily<T>,
) -> Result<bool> {
    let class = tree.classify_leaf(l, family)?;
    necessary_given(a, l, &class, tree, family)
}

fn necessary_given<T: Scalar>(
    a: OrientedSepId,
    l: NodeId,
    class: &LeafClass,
    tree: &StructureTree<T>,
    family: &ForbiddenFamily<T>,
) -> Result<bool> {
    let beta = tree.beta(l)?;
    let system = tree.system();
    match class {
        LeafClass::TangleLeaf(_) => Ok(beta.contains(a) && !beta.iter().any(|r| r != a && system.lt(r, a))),
        LeafClass::ForbiddenLeaf(_) => Ok(!family.meets(&beta.without(a))),
        LeafClass::Unresolved => Err(Error::UnresolvedLeaf(l)),
    }
}

/// Whether the label of the edge into `w` is necessary for some leaf below `w`.
fn child_edge_necessary<T: Scalar>(
    tree: &StructureTree<T>,
    w: NodeId,
    family: &ForbiddenFamily<T>,
) -> Result<bool> {
    let a = tree.label(w)?.ok_or(Error::NotParentChild { parent: w, child: w })?;
    for l in tree.leaves_below(w) {
        if necessary_for_leaf(a, l, tree, family)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Every child edge of `v` carries a label necessary for some leaf below it.
/// Leaves are necessary.
pub fn necessary_node<T: Scalar>(v: NodeId, tree: &StructureTree<T>, family: &ForbiddenFamily<T>) -> Result<bool> {
    for &w in tree.children(v)? {
        if !child_edge_necessary(tree, w, family)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The contractions performed by [`reduce`], with the intermediate trees.
#[derive(Clone, Debug)]
pub struct ReductionTrace<T> {
    pub steps: Vec<(NodeId, NodeId)>,
    /// `T^1, ..., T^n`, starting with the input tree.
    pub trees: Vec<StructureTree<T>>,
}

impl<T: Scalar> ReductionTrace<T> {
    /// Applies the recorded contractions to `start`.
    pub fn replay(&self, start: &StructureTree<T>) -> Result<StructureTree<T>> {
        let mut tree = start.clone();
        for &(v, w) in &self.steps {
            tree = tree.contract(v, w)?;
        }
        Ok(tree)
    }
}

/// Contracts unnecessary nodes until every node is necessary.
///
/// Each step takes the first unnecessary node in post-order and contracts it
/// into its least-id child whose edge label is necessary for no leaf below.
pub fn reduce<T: Scalar>(
    tree: &StructureTree<T>,
    family: &ForbiddenFamily<T>,
) -> Result<(StructureTree<T>, ReductionTrace<T>)> {
    tree.check_structure_tree(family).map_err(Error::NotAStructureTree)?;
    let mut current = tree.clone();
    let mut trace = ReductionTrace {
        steps: Vec::new(),
        trees: vec![tree.clone()],
    };
    'outer: loop {
        for v in current.post_order() {
            let mut children: Vec<NodeId> = current.children(v)?.to_vec();
            children.sort_unstable();
            for w in children {
                if !child_edge_necessary(&current, w, family)? {
                    current = current.contract(v, w)?;
                    trace.steps.push((v, w));
                    trace.trees.push(current.clone());
                    continue 'outer;
                }
            }
        }
        break;
    }
    Ok((current, trace))
}

/// One threshold `k` of the pipeline.
#[derive(Clone, Debug)]
pub struct Level<T> {
    pub k: Threshold<T>,
    pub system: Arc<SeparationSystem<T>>,
    pub family: ForbiddenFamily<T>,
    /// `T|_k`, taken from the unreduced tree.
    pub tree: StructureTree<T>,
    pub reduced: Option<StructureTree<T>>,
    pub trace: Option<ReductionTrace<T>>,
    pub structure_tree: bool,
    /// Tangles of `S_k`, in the ids of `system`.
    pub tangles: Vec<PartialOrientation>,
    pub f_tree: bool,
    /// Witnesses at the forbidden leaves of the reduced tree when it is an `F`-tree.
    pub certificates: Vec<Witness>,
}

/// Everything the pipeline derives from one system and family.
#[derive(Clone, Debug)]
pub struct Report<T> {
    pub tree_full: StructureTree<T>,
    pub tree_reduced: Option<StructureTree<T>>,
    pub trace: Option<ReductionTrace<T>>,
    pub structure_tree: bool,
    pub tangles: Vec<PartialOrientation>,
    pub f_tree: bool,
    pub certificates: Vec<Witness>,
    pub levels: Vec<Level<T>>,
}

/// The thresholds at which `S_k` changes: every distinct order value (each
/// giving the separations strictly below it) followed by all of `S`.
pub fn default_thresholds<T: Scalar>(system: &SeparationSystem<T>) -> Vec<Threshold<T>> {
    let mut out: Vec<Threshold<T>> = system.distinct_orders().into_iter().map(Threshold::Below).collect();
    out.push(Threshold::Unbounded);
    out
}

struct Analysis<T> {
    reduced: Option<StructureTree<T>>,
    trace: Option<ReductionTrace<T>>,
    structure_tree: bool,
    tangles: Vec<PartialOrientation>,
    f_tree: bool,
    certificates: Vec<Witness>,
}

fn analyse<T: Scalar>(tree: &StructureTree<T>, family: &ForbiddenFamily<T>) -> Result<Analysis<T>> {
    if !tree.is_structure_tree(family) {
        return Ok(Analysis {
            reduced: None,
            trace: None,
            structure_tree: false,
            tangles: Vec::new(),
            f_tree: false,
            certificates: Vec::new(),
        });
    }
    let tangles = tree.tangles(family)?;
    let (reduced, trace) = reduce(tree, family)?;
    let f_tree = tangles.is_empty();
    let certificates = if f_tree {
        reduced
            .classify_leaves(family)?
            .into_iter()
            .filter_map(|(_, c)| match c {
                LeafClass::ForbiddenLeaf(w) => Some(w),
                _ => None,
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(Analysis {
        reduced: Some(reduced),
        trace: Some(trace),
        structure_tree: true,
        tangles,
        f_tree,
        certificates,
    })
}

/// Builds, restricts to each default threshold, and reduces.
pub fn pipeline<T: Scalar>(
    system: &Arc<SeparationSystem<T>>,
    family: &ForbiddenFamily<T>,
    config: &BuildConfig,
) -> Result<Report<T>> {
    pipeline_at(system, family, config, &default_thresholds(system))
}

/// Builds the thoroughly ordered tree once, takes `T|_k` for every threshold
/// from it, and reduces each restriction separately.
pub fn pipeline_at<T: Scalar>(
    system: &Arc<SeparationSystem<T>>,
    family: &ForbiddenFamily<T>,
    config: &BuildConfig,
    thresholds: &[Threshold<T>],
) -> Result<Report<T>> {
    let tree_full = build(system, family, config)?;
    let full = analyse(&tree_full, family)?;
    let mut levels = Vec::with_capacity(thresholds.len());
    for &k in thresholds {
        let tree = tree_full.restrict(k)?;
        let level_family = family.restrict_to(tree.system())?;
        let a = analyse(&tree, &level_family)?;
        levels.push(Level {
            k,
            system: tree.system().clone(),
            family: level_family,
            tree,
            reduced: a.reduced,
            trace: a.trace,
            structure_tree: a.structure_tree,
            tangles: a.tangles,
            f_tree: a.f_tree,
            certificates: a.certificates,
        });
    }
    Ok(Report {
        tree_full,
        tree_reduced: full.reduced,
        trace: full.trace,
        structure_tree: full.structure_tree,
        tangles: full.tangles,
        f_tree: full.f_tree,
        certificates: full.certificates,
        levels,
    })
}
