//! Graphviz DOT emission for structure trees.

use std::fmt::Write;

use crate::error::Result;
use crate::forbidden::ForbiddenFamily;
use crate::oracle::minimal_elements;
use crate::scalar::Scalar;
use crate::sepsys::{PartialOrientation, SeparationSystem};
use crate::tree::{LeafClass, StructureTree};

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

fn describe_set<T: Scalar>(system: &SeparationSystem<T>, set: &PartialOrientation) -> String {
    let mut parts: Vec<(usize, String)> = set.iter().map(|a| (system.origin_of(a).0, system.describe(a))).collect();
    parts.sort();
    let parts: Vec<String> = parts.into_iter().map(|(_, d)| d).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Non-leaves show `s_v` and its order, edges their orientation. Leaves are
/// coloured by class: tangle leaves show the tangle's minimal elements and
/// forbidden leaves the members of their witness.
pub fn tree_to_dot<T: Scalar>(tree: &StructureTree<T>, family: &ForbiddenFamily<T>) -> Result<String> {
    let sys = tree.system();
    let mut out = String::new();
    let _ = writeln!(out, "digraph structure_tree {{");
    let _ = writeln!(out, "  node [fontname=\"Helvetica\"];");
    let classes = tree.classify_leaves(family)?;
    for v in tree.node_ids() {
        if tree.is_leaf(v) {
            let class = classes.iter().find(|(l, _)| *l == v).map(|(_, c)| c);
            let (colour, text) = match class {
                Some(LeafClass::TangleLeaf(tau)) => {
                    ("palegreen", format!("tangle\\n{}", escape(&describe_set(sys, &minimal_elements(sys, tau)))))
                }
                Some(LeafClass::ForbiddenLeaf(w)) => {
                    ("lightcoral", format!("forbidden\\n{}", escape(&describe_set(sys, &w.members))))
                }
                _ => ("lightgrey", "unresolved".to_string()),
            };
            let _ = writeln!(
                out,
                "  n{v} [shape=box, style=filled, fillcolor={colour}, label=\"{v}: {text}\"];"
            );
        } else {
            let s = tree.s_of(v)?;
            let origin = sys.origin_of(s.forward()).sep();
            let _ = writeln!(out, "  n{v} [shape=ellipse, label=\"{v}: s{} |{}|\"];", origin.0, sys.order(s));
        }
    }
    for v in tree.node_ids() {
        for &w in tree.children(v)? {
            if let Some(a) = tree.label(w)? {
                let _ = writeln!(out, "  n{v} -> n{w} [label=\"{}\"];", escape(&sys.describe(a)));
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sepsys::{SepId, SystemSpec};
    use std::sync::Arc;

    #[test]
    fn leaves_are_coloured() {
        let sys = Arc::new(SeparationSystem::from_spec(SystemSpec::new(vec![1.0], vec![])).unwrap());
        let family = ForbiddenFamily::make_explicit(&sys, &[vec![SepId(0).backward()]]).unwrap();
        let mut tree = StructureTree::single(sys.clone());
        let root = tree.root();
        tree.add_children(root, &[SepId(0).forward(), SepId(0).backward()]);
        let dot = tree_to_dot(&tree, &family).unwrap();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("palegreen"));
        assert!(dot.contains("lightcoral"));
        assert!(dot.contains("|1|"));
    }
}
