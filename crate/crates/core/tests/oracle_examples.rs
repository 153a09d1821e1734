mod common;

use common::*;
use rand::Rng;
use tangle_forge::oracle::{
    all_consistent_orientations, all_orientations, all_tangles, is_efficient_in, is_strongly_efficient_in,
    k_blocks, minimal_elements,
};
use tangle_forge::{Error, ForbiddenFamily, Graph, OracleBudget, OrientedSepId};

#[test]
fn consistent_orientation_examples() {
    let empty = system(vec![], &[]);
    assert_eq!(all_consistent_orientations(&empty, &budget()).unwrap(), vec![empty.empty_set()]);
    let nested = system(vec![1.0, 2.0], &[(f(1), f(0))]);
    assert_eq!(all_consistent_orientations(&nested, &budget()).unwrap().len(), 3);
    let crossing = bipartitions(4, &[0b0011, 0b0101]);
    assert_eq!(all_consistent_orientations(&crossing, &budget()).unwrap().len(), 4);
}

#[test]
fn consistent_orientations_match_a_filter_over_all_orientations() {
    let mut r = rng(31);
    for i in 0..60 {
        let sys = random_poset(&mut r, 1 + i % 6, i % 2 == 0);
        let all = all_orientations(&sys, &budget()).unwrap();
        assert_eq!(all.len(), 1 << sys.len());
        let filtered: Vec<_> = all.into_iter().filter(|t| sys.is_consistent(t)).collect();
        let mut sorted = filtered.clone();
        sorted.sort();
        assert_eq!(all_consistent_orientations(&sys, &budget()).unwrap(), sorted);
    }
}

#[test]
fn tangle_examples() {
    let nested = system(vec![1.0, 2.0], &[(f(1), f(0))]);
    let empty = ForbiddenFamily::make_empty(&nested);
    assert_eq!(
        all_tangles(&nested, &empty, &budget()).unwrap(),
        all_consistent_orientations(&nested, &budget()).unwrap()
    );
    let k4 = graph_sys(&Graph::complete(4), 3);
    let fam = ForbiddenFamily::make_blocks(&k4, 3).unwrap();
    assert_eq!(all_tangles(&k4, &fam, &budget()).unwrap().len(), 1);
    assert_eq!(k_blocks(&Graph::complete(4), 3).len(), 1);
    let p5 = graph_sys(&Graph::path(5), 3);
    let fam = ForbiddenFamily::make_blocks(&p5, 3).unwrap();
    assert!(all_tangles(&p5, &fam, &budget()).unwrap().is_empty());
    assert!(k_blocks(&Graph::path(5), 3).is_empty());
}

#[test]
fn tangles_match_a_filter_over_consistent_orientations() {
    for inst in corpus().into_iter().filter(|i| i.system.len() <= 10) {
        let expected: Vec<_> = all_consistent_orientations(&inst.system, &budget())
            .unwrap()
            .into_iter()
            .filter(|t| subsets(t).iter().all(|x| !inst.family.contains(x)))
            .collect();
        assert_eq!(all_tangles(&inst.system, &inst.family, &budget()).unwrap(), expected, "{}", inst.name);
    }
}

#[test]
fn efficiency_examples() {
    let nested = system(vec![1.0, 2.0], &[(f(1), f(0))]);
    let tau = nested.set_of([f(0), b(1)]);
    assert_eq!(minimal_elements(&nested, &tau), tau);
    assert!(is_strongly_efficient_in(&nested, &tau, &tau));
    assert!(is_efficient_in(&nested, &nested.empty_set(), &nested.set_of([f(0), f(1)])));
    // s→ < r→ with |s| > |r|: nothing is eclipsed, but s→ lies below r→
    let upper = nested.set_of([f(0), f(1)]);
    assert_eq!(minimal_elements(&nested, &upper), nested.set_of([f(1)]));
    assert!(is_efficient_in(&nested, &upper, &upper));
    // with |s| < |r|, s→ eclipses r→
    let flipped = system(vec![2.0, 1.0], &[(f(1), f(0))]);
    assert!(!is_efficient_in(&flipped, &flipped.set_of([f(0)]), &flipped.set_of([f(0), f(1)])));
}

#[test]
fn efficient_subsets_are_strongly_efficient_under_injective_orders() {
    let mut r = rng(32);
    let mut checked = 0;
    for i in 0..40 {
        let sys = random_poset(&mut r, 1 + i % 4, true);
        for tau in all_orientations(&sys, &budget()).unwrap() {
            for sigma in subsets(&tau) {
                if is_efficient_in(&sys, &sigma, &tau) {
                    assert!(is_strongly_efficient_in(&sys, &sigma, &tau));
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 200);
}

#[test]
fn growing_an_explicit_family_never_adds_tangles() {
    let mut r = rng(33);
    for i in 0..60 {
        let sys = random_poset(&mut r, 1 + i % 4, false);
        let ids: Vec<OrientedSepId> = sys.oriented().collect();
        let mut members: Vec<Vec<OrientedSepId>> = Vec::new();
        let mut last = usize::MAX;
        for _ in 0..5 {
            let fam = ForbiddenFamily::make_explicit(&sys, &members).unwrap();
            let count = all_tangles(&sys, &fam, &budget()).unwrap().len();
            assert!(count <= last);
            last = count;
            let size = r.gen_range(1..=2.min(ids.len()));
            let mut m: Vec<OrientedSepId> = (0..size).map(|_| ids[r.gen_range(0..ids.len())]).collect();
            m.sort();
            m.dedup();
            members.push(m);
        }
    }
}

#[test]
fn profiles_contain_strong_profiles() {
    let mut r = rng(34);
    for i in 0..40 {
        let sys = random_bipartitions(&mut r, 2 + i % 4, 4);
        let p = ForbiddenFamily::make_profile(&sys).unwrap();
        let ps = ForbiddenFamily::make_strong_profile(&sys).unwrap();
        let weak = set(all_tangles(&sys, &p, &budget()).unwrap());
        let strong = set(all_tangles(&sys, &ps, &budget()).unwrap());
        assert!(strong.is_subset(&weak));
    }
}

#[test]
fn budget_is_enforced() {
    let sys = system(vec![1.0; 5], &[]);
    let small = OracleBudget::with_max_separations(4);
    assert!(matches!(all_consistent_orientations(&sys, &small), Err(Error::BudgetExceeded { .. })));
    let visits = OracleBudget {
        max_separations: 16,
        max_visits: Some(3),
    };
    assert!(all_consistent_orientations(&sys, &visits).is_err());
}
