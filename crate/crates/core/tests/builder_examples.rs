mod common;

use common::*;
use tangle_forge::oracle::{all_consistent_orientations, k_blocks};
use tangle_forge::{
    block_of_tangle, build, contract, necessary_for_leaf, necessary_node, pipeline, reduce, BuildConfig,
    ForbiddenFamily, Graph, LeafClass, StructureTree,
};

/// `r` of order 1, `s` of order 2, `s→ < r→`.
fn nested_pair() -> Sys {
    system(vec![1.0, 2.0], &[(f(1), f(0))])
}

fn built(sys: &Sys, family: &Family) -> StructureTree<f64> {
    build(sys, family, &BuildConfig::default()).unwrap()
}

#[test]
fn build_examples() {
    let empty_sys = system(vec![], &[]);
    let fam = ForbiddenFamily::make_empty(&empty_sys);
    let tree = built(&empty_sys, &fam);
    assert_eq!(tree.node_count(), 1);
    assert_eq!(tree.classify_leaf(tree.root(), &fam).unwrap(), LeafClass::TangleLeaf(empty_sys.empty_set()));

    let sys = nested_pair();
    let fam = ForbiddenFamily::make_empty(&sys);
    let tree = built(&sys, &fam);
    assert_eq!(tree.s_of(tree.root()).unwrap().0, 0);
    assert_eq!(tree.leaves().len(), 3);
    assert_eq!(set(tree.tangles(&fam).unwrap()), set(all_consistent_orientations(&sys, &budget()).unwrap()));

    let g = Graph::complete(4);
    let k4 = graph_sys(&g, 3);
    let blocks = ForbiddenFamily::make_blocks(&k4, 3).unwrap();
    let tree = built(&k4, &blocks);
    let tangles = tree.tangles(&blocks).unwrap();
    assert_eq!(tangles.len(), 1);
    assert_eq!(block_of_tangle(&k4, &tangles[0], 3).unwrap().count_ones(..), 4);
    assert_eq!(k_blocks(&g, 3), vec![0b1111]);
}

#[test]
fn contraction_examples() {
    let sys = nested_pair();
    let fam = ForbiddenFamily::make_empty(&sys);
    let tree = built(&sys, &fam);
    let root = tree.root();
    let children = tree.children(root).unwrap().to_vec();
    let up = children.iter().copied().find(|&w| tree.label(w).unwrap() == Some(f(0))).unwrap();
    let down = children.iter().copied().find(|&w| tree.label(w).unwrap() == Some(b(0))).unwrap();

    // the r← child is a leaf: contracting onto it leaves a single node
    let single = contract(&tree, root, down).unwrap();
    assert_eq!(single.node_count(), 1);
    assert_eq!(single.root(), down);

    let rest = contract(&tree, root, up).unwrap();
    assert_eq!(rest.root(), up);
    assert_eq!(rest.s_of(up).unwrap().0, 1);
    let betas: Vec<_> = rest.leaves().iter().map(|&l| rest.beta(l).unwrap().clone()).collect();
    assert_eq!(set(betas), set(vec![sys.set_of([f(1)]), sys.set_of([b(1)])]));
    assert!(contract(&tree, up, root).is_err());
}

#[test]
fn contraction_keeps_consistency_and_order() {
    for inst in corpus().into_iter().filter(|i| i.system.len() <= 6) {
        let tree = built(&inst.system, &inst.family);
        for v in tree.non_leaves() {
            for &w in tree.children(v).unwrap() {
                let c = tree.contract(v, w).unwrap();
                assert!(c.is_consistent_tree(), "{}", inst.name);
                assert!(c.is_ordered(), "{}", inst.name);
                assert!(c.is_separation_tree(), "{}", inst.name);
            }
        }
    }
}

#[test]
fn necessity_examples() {
    let sys = nested_pair();
    let fam = ForbiddenFamily::make_empty(&sys);
    let tree = built(&sys, &fam);
    let mixed = tree.leaf_for_orientation(&sys.set_of([f(0), b(1)])).unwrap();
    assert!(necessary_for_leaf(f(0), mixed, &tree, &fam).unwrap());
    assert!(necessary_for_leaf(b(1), mixed, &tree, &fam).unwrap());
    // s→ alone already determines {r→, s→}
    let upper = tree.leaf_for_orientation(&sys.set_of([f(0), f(1)])).unwrap();
    assert!(!necessary_for_leaf(f(0), upper, &tree, &fam).unwrap());
    assert!(necessary_for_leaf(f(1), upper, &tree, &fam).unwrap());
    for v in tree.node_ids().collect::<Vec<_>>() {
        assert!(necessary_node(v, &tree, &fam).unwrap());
    }
    let (reduced, trace) = reduce(&tree, &fam).unwrap();
    assert!(trace.steps.is_empty());
    assert_eq!(reduced, tree);

    // a leaf with labels {r→, s→} holding the two disjoint members {r→} and {s→}
    let anti = system(vec![1.0, 2.0], &[]);
    let two = ForbiddenFamily::make_explicit(&anti, &[vec![f(0)], vec![f(1)]]).unwrap();
    let path = StructureTree::from_parts(
        anti.clone(),
        0,
        &[
            (0, None, None),
            (1, Some(0), Some(f(0))),
            (2, Some(0), Some(b(0))),
            (3, Some(1), Some(f(1))),
            (4, Some(1), Some(b(1))),
        ],
    )
    .unwrap();
    assert!(path.classify_leaf(3, &two).unwrap().is_forbidden());
    for a in [f(0), f(1)] {
        assert!(!necessary_for_leaf(a, 3, &path, &two).unwrap());
        let by_definition = subsets(path.beta(3).unwrap())
            .iter()
            .filter(|x| two.contains(x))
            .all(|x| x.contains(a));
        assert!(!by_definition);
    }
    assert!(necessary_node(tree.leaves()[0], &tree, &fam).unwrap());
}

#[test]
fn necessity_agrees_with_its_definition() {
    for inst in corpus().into_iter().filter(|i| i.system.len() <= 8) {
        let (sys, fam) = (&inst.system, &inst.family);
        let tree = built(sys, fam);
        if !tree.is_structure_tree(fam) {
            continue;
        }
        for l in tree.leaves() {
            let beta = tree.beta(l).unwrap();
            let class = tree.classify_leaf(l, fam).unwrap();
            for a in beta.iter() {
                let expected = match &class {
                    LeafClass::TangleLeaf(_) => beta.iter().all(|r| r == a || !sys.lt(r, a)),
                    LeafClass::ForbiddenLeaf(_) => {
                        subsets(beta).iter().filter(|x| fam.contains(x)).all(|x| x.contains(a))
                    }
                    LeafClass::Unresolved => unreachable!(),
                };
                assert_eq!(necessary_for_leaf(a, l, &tree, fam).unwrap(), expected, "{}", inst.name);
            }
        }
        for v in tree.node_ids().collect::<Vec<_>>() {
            let expected = tree.children(v).unwrap().iter().all(|&w| {
                let a = tree.label(w).unwrap().unwrap();
                tree.leaves_below(w)
                    .into_iter()
                    .any(|l| necessary_for_leaf(a, l, &tree, fam).unwrap())
            });
            assert_eq!(necessary_node(v, &tree, fam).unwrap(), expected, "{}", inst.name);
        }
    }
}

#[test]
fn reduction_contracts_unnecessary_splits() {
    let mut contracted = 0;
    for inst in corpus().into_iter().filter(|i| i.system.len() <= 10) {
        let (sys, fam) = (&inst.system, &inst.family);
        let tree = built(sys, fam);
        if !tree.is_structure_tree(fam) {
            continue;
        }
        let (reduced, trace) = reduce(&tree, fam).unwrap();
        assert_eq!(trace.replay(&tree).unwrap(), reduced);
        for (i, &(v, _)) in trace.steps.iter().enumerate() {
            assert!(!necessary_node(v, &trace.trees[i], fam).unwrap(), "{}", inst.name);
        }
        assert_eq!(set(reduced.tangles(fam).unwrap()), set(tree.tangles(fam).unwrap()), "{}", inst.name);
        contracted += trace.steps.len();
        let (again, trace) = reduce(&reduced, fam).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(again, reduced);
    }
    assert!(contracted > 0);
}

#[test]
fn pipeline_examples() {
    let config = BuildConfig::default();
    let p5 = graph_sys(&Graph::path(5), 3);
    let blocks = ForbiddenFamily::make_blocks(&p5, 3).unwrap();
    assert!(k_blocks(&Graph::path(5), 3).is_empty());
    let report = pipeline(&p5, &blocks, &config).unwrap();
    assert!(report.f_tree);
    assert!(report.tangles.is_empty());
    assert!(!report.certificates.is_empty());
    assert!(report.certificates.iter().all(|w| blocks.verify(w)));

    let k4 = graph_sys(&Graph::complete(4), 3);
    let blocks = ForbiddenFamily::make_blocks(&k4, 3).unwrap();
    let report = pipeline(&k4, &blocks, &config).unwrap();
    assert!(!report.f_tree);
    assert_eq!(report.tangles.len(), 1);
    assert!(report.certificates.is_empty());

    let rows = tangle_forge::io::parse_similarity_csv(include_str!("fixtures/six.csv")).unwrap();
    let ground = tangle_forge::BipartitionGround::all_subsets(6, tangle_forge::OrderRule::CutWeight(rows)).unwrap();
    let six = std::sync::Arc::new(tangle_forge::bipartition_system(&ground).unwrap());
    let cluster = ForbiddenFamily::make_cluster(&six, 3).unwrap();
    let report = pipeline(&six, &cluster, &config).unwrap();
    assert!(report.levels.iter().any(|l| l.tangles.len() == 2));
    for level in &report.levels {
        let expected = tangle_forge::oracle::all_tangles(&level.system, &level.family, &budget()).unwrap();
        assert_eq!(set(level.tangles.clone()), set(expected));
    }
}

#[test]
fn builds_are_deterministic() {
    for inst in corpus().into_iter().take(150) {
        let a = built(&inst.system, &inst.family);
        let b = built(&inst.system, &inst.family);
        assert_eq!(a.parts(), b.parts());
        let ja = tangle_forge::io::to_json_string(&tangle_forge::io::tree_to_json(&a, None)).unwrap();
        let jb = tangle_forge::io::to_json_string(&tangle_forge::io::tree_to_json(&b, None)).unwrap();
        assert_eq!(ja, jb);
    }
}
