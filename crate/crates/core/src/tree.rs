//! Separation trees: rooted trees whose edges carry oriented separations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forbidden::{ForbiddenFamily, Witness};
use crate::scalar::Scalar;
use crate::sepsys::{map_oriented, OrientedSepId, PartialOrientation, SepId, SeparationSystem, Threshold};

pub type NodeId = usize;

/// The first failure found by a tree predicate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub property: &'static str,
    pub node: Option<NodeId>,
    pub detail: String,
}

impl Violation {
    fn at(property: &'static str, node: NodeId, detail: impl Into<String>) -> Self {
        Violation {
            property,
            node: Some(node),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(v) => write!(f, "{} fails at node {v}: {}", self.property, self.detail),
            None => write!(f, "{} fails: {}", self.property, self.detail),
        }
    }
}

/// What a leaf displays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeafClass {
    /// The closure of the leaf's labels, an `F`-tangle.
    TangleLeaf(PartialOrientation),
    /// A member of `F` among the leaf's labels.
    ForbiddenLeaf(Witness),
    Unresolved,
}

impl LeafClass {
    pub fn is_tangle(&self) -> bool {
        matches!(self, LeafClass::TangleLeaf(_))
    }

    pub fn is_forbidden(&self) -> bool {
        matches!(self, LeafClass::ForbiddenLeaf(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    parent: Option<NodeId>,
    label: Option<OrientedSepId>,
    children: Vec<NodeId>,
}

/// A rooted tree with oriented-separation edge labels over one system.
///
/// Trees are values: editing operations return new trees. The label set
/// `β_v` of the root path is cached for every node.
#[derive(Clone, Debug)]
pub struct StructureTree<T> {
    system: Arc<SeparationSystem<T>>,
    root: NodeId,
    nodes: BTreeMap<NodeId, Node>,
    beta: BTreeMap<NodeId, PartialOrientation>,
    next_id: NodeId,
}

impl<T: Scalar> PartialEq for StructureTree<T> {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.nodes == other.nodes && self.system.oriented_len() == other.system.oriented_len()
    }
}

impl<T: Scalar> StructureTree<T> {
    /// The one-node tree.
    pub fn single(system: Arc<SeparationSystem<T>>) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(
            0,
            Node {
                parent: None,
                label: None,
                children: Vec::new(),
            },
        );
        let mut beta = BTreeMap::new();
        beta.insert(0, system.empty_set());
        StructureTree {
            system,
            root: 0,
            nodes,
            beta,
            next_id: 1,
        }
    }

    /// Assembles a tree from `(id, parent, label)` triples. The root is the only
    /// node without a parent and without a label.
    pub fn from_parts(
        system: Arc<SeparationSystem<T>>,
        root: NodeId,
        parts: &[(NodeId, Option<NodeId>, Option<OrientedSepId>)],
    ) -> Result<Self> {
        let mut nodes = BTreeMap::new();
        for &(id, parent, label) in parts {
            if let Some(a) = label {
                if a.0 >= system.oriented_len() {
                    return Err(Error::MalformedTree(format!("node {id} has label {} out of range", a.0)));
                }
            }
            let fresh = Node {
                parent,
                label,
                children: Vec::new(),
            };
            if nodes.insert(id, fresh).is_some() {
                return Err(Error::MalformedTree(format!("node {id} listed twice")));
            }
        }
        match nodes.get(&root) {
            Some(n) if n.parent.is_none() && n.label.is_none() => {}
            Some(_) => return Err(Error::MalformedTree(format!("root {root} has a parent or label"))),
            None => return Err(Error::MalformedTree(format!("root {root} missing"))),
        }
        let links: Vec<(NodeId, Option<NodeId>, Option<OrientedSepId>)> =
            nodes.iter().map(|(&id, n)| (id, n.parent, n.label)).collect();
        for (id, parent, label) in links {
            if id == root {
                continue;
            }
            let Some(p) = parent else {
                return Err(Error::MalformedTree(format!("node {id} has no parent")));
            };
            if label.is_none() {
                return Err(Error::MalformedTree(format!("edge into node {id} has no label")));
            }
            match nodes.get_mut(&p) {
                Some(pn) => pn.children.push(id),
                None => return Err(Error::MalformedTree(format!("parent {p} of node {id} missing"))),
            }
        }
        let next_id = nodes.keys().next_back().map_or(0, |&m| m + 1);
        let mut tree = StructureTree {
            system,
            root,
            nodes,
            beta: BTreeMap::new(),
            next_id,
        };
        tree.recompute_beta();
        if tree.beta.len() != tree.nodes.len() {
            return Err(Error::MalformedTree("some nodes are not reachable from the root".into()));
        }
        Ok(tree)
    }

    fn recompute_beta(&mut self) {
        self.beta.clear();
        let mut stack = vec![(self.root, self.system.empty_set())];
        while let Some((v, set)) = stack.pop() {
            if self.beta.contains_key(&v) {
                continue;
            }
            for &w in &self.nodes[&v].children {
                let label = self.nodes[&w].label.expect("non-root nodes carry labels");
                stack.push((w, set.with(label)));
            }
            self.beta.insert(v, set);
        }
    }

    /// Adds one child per label below `v`, returning the new ids in label order.
    pub(crate) fn add_children(&mut self, v: NodeId, labels: &[OrientedSepId]) -> Vec<NodeId> {
        let base = self.beta[&v].clone();
        let mut ids = Vec::with_capacity(labels.len());
        for &label in labels {
            let id = self.next_id;
            self.next_id += 1;
            self.nodes.insert(
                id,
                Node {
                    parent: Some(v),
                    label: Some(label),
                    children: Vec::new(),
                },
            );
            self.nodes.get_mut(&v).expect("node exists").children.push(id);
            self.beta.insert(id, base.with(label));
            ids.push(id);
        }
        ids
    }

    pub fn system(&self) -> &Arc<SeparationSystem<T>> {
        &self.system
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.nodes.contains_key(&v)
    }

    /// Node ids in increasing order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    fn node(&self, v: NodeId) -> Result<&Node> {
        self.nodes.get(&v).ok_or(Error::NoSuchNode(v))
    }

    pub fn parent(&self, v: NodeId) -> Result<Option<NodeId>> {
        Ok(self.node(v)?.parent)
    }

    pub fn children(&self, v: NodeId) -> Result<&[NodeId]> {
        Ok(&self.node(v)?.children)
    }

    /// Label of the edge from `v` to its parent; `None` at the root.
    pub fn label(&self, v: NodeId) -> Result<Option<OrientedSepId>> {
        Ok(self.node(v)?.label)
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.nodes.get(&v).is_some_and(|n| n.children.is_empty())
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.children.is_empty())
            .map(|(&id, _)| id)
            .collect()
    }

    pub fn non_leaves(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|(_, n)| !n.children.is_empty())
            .map(|(&id, _)| id)
            .collect()
    }

    pub fn depth(&self, v: NodeId) -> Result<usize> {
        Ok(self.beta(v)?.len())
    }

    /// `β_v`: the labels on the path from the root to `v`.
    pub fn beta(&self, v: NodeId) -> Result<&PartialOrientation> {
        self.beta.get(&v).ok_or(Error::NoSuchNode(v))
    }

    /// `s_v`: the separation labelling the edges below the non-leaf `v`.
    pub fn s_of(&self, v: NodeId) -> Result<SepId> {
        let node = self.node(v)?;
        let first = *node.children.first().ok_or(Error::LeafHasNoSep(v))?;
        Ok(self.nodes[&first].label.expect("labelled").sep())
    }

    /// `u <=_r v`: `u` lies on the path from the root to `v`.
    pub fn is_ancestor_or_self(&self, u: NodeId, v: NodeId) -> bool {
        let mut cur = Some(v);
        while let Some(x) = cur {
            if x == u {
                return true;
            }
            cur = self.nodes.get(&x).and_then(|n| n.parent);
        }
        false
    }

    /// Nodes in post-order, children visited in stored order.
    pub fn post_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                out.push(v);
                continue;
            }
            stack.push((v, true));
            for &w in self.nodes[&v].children.iter().rev() {
                stack.push((w, false));
            }
        }
        out
    }

    /// Leaves of the subtree rooted at `v`.
    pub fn leaves_below(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            let children = &self.nodes[&x].children;
            if children.is_empty() {
                out.push(x);
            }
            stack.extend(children.iter().copied());
        }
        out.sort_unstable();
        out
    }

    /// The unique leaf whose labels lie in the orientation `tau`.
    pub fn leaf_for_orientation(&self, tau: &PartialOrientation) -> Result<NodeId> {
        if tau.capacity() != self.system.oriented_len() {
            return Err(Error::GroundMismatch {
                expected: self.system.oriented_len(),
                found: tau.capacity(),
            });
        }
        let mut v = self.root;
        loop {
            let children = &self.nodes[&v].children;
            if children.is_empty() {
                return Ok(v);
            }
            let mut inside = children
                .iter()
                .filter(|&&w| tau.contains(self.nodes[&w].label.expect("labelled")));
            let Some(&next) = inside.next() else {
                return Err(Error::MalformedTree(format!("no child of node {v} has its label in the orientation")));
            };
            if inside.next().is_some() {
                return Err(Error::MalformedTree(format!("two children of node {v} have their labels in the orientation")));
            }
            v = next;
        }
    }

    /// Classifies the leaf `l` against `family`.
    pub fn classify_leaf(&self, l: NodeId, family: &ForbiddenFamily<T>) -> Result<LeafClass> {
        let beta = self.beta(l)?;
        if self.system.is_consistent(beta) {
            let closure = self.system.closure_unchecked(beta);
            if closure.is_full_orientation(self.system.len())
                && self.system.is_consistent(&closure)
                && !family.meets(&closure)
            {
                return Ok(LeafClass::TangleLeaf(closure));
            }
        }
        Ok(match family.forbidden_subset(beta)? {
            Some(w) => LeafClass::ForbiddenLeaf(w),
            None => LeafClass::Unresolved,
        })
    }

    /// Every leaf with its class, in id order.
    pub fn classify_leaves(&self, family: &ForbiddenFamily<T>) -> Result<Vec<(NodeId, LeafClass)>> {
        self.leaves()
            .into_iter()
            .map(|l| Ok((l, self.classify_leaf(l, family)?)))
            .collect()
    }

    /// The tree shape is a separation tree: below each non-leaf the labels are
    /// exactly both orientations of one separation, and no separation repeats
    /// along a root path.
    pub fn check_separation_tree(&self) -> Result<(), Violation> {
        const P: &str = "separation_tree";
        for (&v, node) in &self.nodes {
            if node.children.is_empty() {
                continue;
            }
            let labels: Vec<OrientedSepId> = node
                .children
                .iter()
                .map(|w| self.nodes[w].label.expect("labelled"))
                .collect();
            let s = labels[0].sep();
            if labels.iter().any(|a| a.sep() != s) {
                return Err(Violation::at(P, v, "child labels belong to different separations"));
            }
            let bijective = match labels.len() {
                2 => labels[0] != labels[1],
                1 => self.system.is_degenerate(s),
                _ => false,
            };
            if !bijective {
                return Err(Violation::at(
                    P,
                    v,
                    format!("child labels {labels:?} are not one per orientation of s{}", s.0),
                ));
            }
            if self.beta[&v].orients(s) {
                return Err(Violation::at(P, v, format!("s{} repeats on the root path", s.0)));
            }
        }
        Ok(())
    }

    pub fn is_separation_tree(&self) -> bool {
        self.check_separation_tree().is_ok()
    }

    /// Every `β_v` is consistent.
    pub fn check_consistent(&self) -> Result<(), Violation> {
        for (&v, beta) in &self.beta {
            if !self.system.is_consistent(beta) {
                return Err(Violation::at("consistent", v, format!("β = {beta:?} is inconsistent")));
            }
        }
        Ok(())
    }

    pub fn is_consistent_tree(&self) -> bool {
        self.check_consistent().is_ok()
    }

    /// `|s_v| <= |s_w|` for non-leaves `v <= w`.
    pub fn check_ordered(&self) -> Result<(), Violation> {
        for (&w, node) in &self.nodes {
            let Some(v) = node.parent else { continue };
            if node.children.is_empty() {
                continue;
            }
            let (sv, sw) = (self.s_of(v).expect("non-leaf"), self.s_of(w).expect("non-leaf"));
            if self.system.order(sv) > self.system.order(sw) {
                return Err(Violation::at(
                    "ordered",
                    w,
                    format!("|s{}| exceeds |s{}| below it", sv.0, sw.0),
                ));
            }
        }
        Ok(())
    }

    pub fn is_ordered(&self) -> bool {
        self.check_ordered().is_ok()
    }

    /// Each `s_v` is unoriented by `⌊β_v⌋` and of minimum order among the
    /// separations unoriented by it.
    pub fn check_thoroughly_ordered(&self) -> Result<(), Violation> {
        const P: &str = "thoroughly_ordered";
        for v in self.non_leaves() {
            let beta = &self.beta[&v];
            if !self.system.is_consistent(beta) {
                return Err(Violation::at(P, v, "β_v is inconsistent"));
            }
            let closure = self.system.closure_unchecked(beta);
            let s = self.s_of(v).expect("non-leaf");
            if closure.orients(s) {
                return Err(Violation::at(P, v, format!("s{} is oriented by the closure of β_v", s.0)));
            }
            let order = self.system.order(s);
            if let Some(t) = self
                .system
                .seps()
                .find(|&t| !closure.orients(t) && self.system.order(t) < order)
            {
                return Err(Violation::at(
                    P,
                    v,
                    format!("s{} is unoriented and of lower order than s{}", t.0, s.0),
                ));
            }
        }
        Ok(())
    }

    pub fn is_thoroughly_ordered(&self) -> bool {
        self.check_thoroughly_ordered().is_ok()
    }

    /// Every `β_ℓ` is efficient in `⌊β_ℓ⌋`.
    pub fn check_efficient(&self) -> Result<(), Violation> {
        const P: &str = "efficient";
        for l in self.leaves() {
            let beta = &self.beta[&l];
            if !self.system.is_consistent(beta) {
                return Err(Violation::at(P, l, "β_ℓ is inconsistent"));
            }
            let closure = self.system.closure_unchecked(beta);
            for s in beta.iter() {
                if let Some(r) = closure.iter().find(|&r| self.system.eclipses(r, s)) {
                    return Err(Violation::at(P, l, format!("{s} is eclipsed by {r}")));
                }
            }
        }
        Ok(())
    }

    pub fn is_efficient(&self) -> bool {
        self.check_efficient().is_ok()
    }

    /// A consistent separation tree whose leaves are tangle leaves or
    /// forbidden and whose non-leaf label sets avoid `F`.
    pub fn check_structure_tree(&self, family: &ForbiddenFamily<T>) -> Result<(), Violation> {
        const P: &str = "structure_tree";
        self.check_separation_tree()?;
        self.check_consistent()?;
        for (&v, node) in &self.nodes {
            let class = if node.children.is_empty() {
                self.classify_leaf(v, family)
            } else {
                match family.forbidden_subset(&self.beta[&v]) {
                    Ok(None) => continue,
                    Ok(Some(w)) => {
                        return Err(Violation::at(P, v, format!("non-leaf labels contain forbidden {:?}", w.members)))
                    }
                    Err(e) => Err(e),
                }
            };
            match class {
                Ok(LeafClass::Unresolved) => {
                    return Err(Violation::at(P, v, "leaf is neither a tangle leaf nor forbidden"))
                }
                Ok(_) => {}
                Err(e) => return Err(Violation::at(P, v, e.to_string())),
            }
        }
        Ok(())
    }

    pub fn is_structure_tree(&self, family: &ForbiddenFamily<T>) -> bool {
        self.check_structure_tree(family).is_ok()
    }

    /// A structure tree all of whose leaves are forbidden.
    pub fn check_f_tree(&self, family: &ForbiddenFamily<T>) -> Result<(), Violation> {
        self.check_structure_tree(family)?;
        for l in self.leaves() {
            if let Ok(LeafClass::TangleLeaf(_)) = self.classify_leaf(l, family) {
                return Err(Violation::at("f_tree", l, "leaf displays a tangle"));
            }
        }
        Ok(())
    }

    pub fn is_f_tree(&self, family: &ForbiddenFamily<T>) -> bool {
        self.check_f_tree(family).is_ok()
    }

    /// The tangles displayed at tangle leaves, deduplicated and sorted.
    pub fn tangles(&self, family: &ForbiddenFamily<T>) -> Result<Vec<PartialOrientation>> {
        self.check_structure_tree(family).map_err(Error::NotAStructureTree)?;
        let mut out: Vec<PartialOrientation> = self
            .classify_leaves(family)?
            .into_iter()
            .filter_map(|(_, c)| match c {
                LeafClass::TangleLeaf(t) => Some(t),
                _ => None,
            })
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// `T|_k`: the subtree of edges with label order `< k`, over `S_k`.
    pub fn restrict(&self, k: Threshold<T>) -> Result<StructureTree<T>> {
        self.check_ordered().map_err(Error::NotOrdered)?;
        let sub = Arc::new(self.system.restrict_below(k));
        let map = self.system.embedding_into(&sub);
        let mut parts = Vec::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            let node = &self.nodes[&v];
            let label = node.label.map(|a| map_oriented(a, &map).expect("kept edges have kept labels"));
            parts.push((v, node.parent, label));
            for &w in &node.children {
                let a = self.nodes[&w].label.expect("labelled");
                if k.admits(&self.system.order_of(a)) {
                    stack.push(w);
                }
            }
        }
        let mut tree = StructureTree::from_parts(sub, self.root, &parts)?;
        self.copy_child_order(&mut tree);
        Ok(tree)
    }

    /// Keeps children in this tree's order wherever both trees share them.
    fn copy_child_order(&self, other: &mut StructureTree<T>) {
        for (id, node) in other.nodes.iter_mut() {
            if let Some(mine) = self.nodes.get(id) {
                node.children.sort_by_key(|c| mine.children.iter().position(|x| x == c));
            }
        }
    }

    /// `T_{w→v}`: contracts the edge `vw` into `w` and deletes the other
    /// children of `v` with their subtrees.
    pub fn contract(&self, v: NodeId, w: NodeId) -> Result<StructureTree<T>> {
        let vnode = self.node(v)?;
        if self.node(w)?.parent != Some(v) {
            return Err(Error::NotParentChild { parent: v, child: w });
        }
        let mut out = self.clone();
        for &other in &vnode.children {
            if other != w {
                for x in self.subtree(other) {
                    out.nodes.remove(&x);
                }
            }
        }
        out.nodes.remove(&v);
        {
            let wn = out.nodes.get_mut(&w).expect("child kept");
            wn.parent = vnode.parent;
            wn.label = vnode.label;
        }
        match vnode.parent {
            Some(p) => {
                let pn = out.nodes.get_mut(&p).expect("parent kept");
                for c in pn.children.iter_mut() {
                    if *c == v {
                        *c = w;
                    }
                }
            }
            None => out.root = w,
        }
        out.recompute_beta();
        Ok(out)
    }

    fn subtree(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.nodes[&x].children.iter().copied());
        }
        out
    }

    /// `(id, parent, label)` for every node, in id order.
    pub fn parts(&self) -> Vec<(NodeId, Option<NodeId>, Option<OrientedSepId>)> {
        self.nodes.iter().map(|(&id, n)| (id, n.parent, n.label)).collect()
    }
}
