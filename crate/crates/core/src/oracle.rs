//! Brute-force ground truth: plain enumeration of orientations, tangles and
//! blocks, written to be obviously correct rather than fast.

use crate::error::{Error, Result};
use crate::forbidden::{subsets_up_to, FamilyKind, ForbiddenFamily};
use crate::ground::{ones, Graph};
use crate::scalar::Scalar;
use crate::sepsys::{OrientedSepId, PartialOrientation, SepId, SeparationSystem};

/// Default cap on `|S|` for exhaustive enumeration.
pub const DEFAULT_MAX_SEPARATIONS: usize = 16;

/// Environment variable overriding [`OracleBudget::max_separations`].
pub const BUDGET_ENV: &str = "TANGLE_FORGE_BUDGET";

/// Limits on exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_separations: usize,
    /// Cap on search-tree nodes visited, `None` for no cap.
    pub max_visits: Option<u64>,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_separations: DEFAULT_MAX_SEPARATIONS,
            max_visits: None,
        }
    }
}

impl OracleBudget {
    pub fn with_max_separations(max_separations: usize) -> Self {
        OracleBudget {
            max_separations,
            ..Self::default()
        }
    }

    /// The default budget, with `max_separations` read from the environment when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(value) => {
                let n = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Input(format!("{BUDGET_ENV} must be a non-negative integer, got {value:?}")))?;
                Ok(Self::with_max_separations(n))
            }
            Err(_) => Ok(Self::default()),
        }
    }

    fn admit<T: Scalar>(&self, system: &SeparationSystem<T>) -> Result<()> {
        if system.len() > self.max_separations {
            return Err(Error::BudgetExceeded(format!(
                "{} separations, budget allows {}",
                system.len(),
                self.max_separations
            )));
        }
        Ok(())
    }
}

/// Whether `x` and `y` of distinct separations point away from each other.
fn point_away<T: Scalar>(system: &SeparationSystem<T>, x: OrientedSepId, y: OrientedSepId) -> bool {
    x.sep() != y.sep() && system.leq(x, y.inverse())
}

/// Whether `tau` has a subset in `F`, decided without the family's witness scan.
pub fn has_forbidden_subset<T: Scalar>(family: &ForbiddenFamily<T>, tau: &PartialOrientation) -> bool {
    match family.kind() {
        FamilyKind::Empty => false,
        FamilyKind::Explicit => family.explicit_members().iter().any(|m| m.is_subset(tau)),
        FamilyKind::Blocks { .. } => family.contains(tau),
        _ => {
            let mut found = false;
            subsets_up_to(&tau.to_vec(), 3, &mut |ids| {
                if !found && !ids.is_empty() {
                    found = family.contains(&family.system().set_of(ids.iter().copied()));
                }
            });
            found
        }
    }
}

struct Search<'a, T> {
    system: &'a SeparationSystem<T>,
    family: Option<&'a ForbiddenFamily<T>>,
    budget: OracleBudget,
    visits: u64,
    chosen: Vec<OrientedSepId>,
    out: Vec<PartialOrientation>,
}

impl<T: Scalar> Search<'_, T> {
    /// Whether adding `a` to the chosen prefix creates a subset in `F`. The
    /// prefix itself is known to be free of members of `F`.
    fn forbidden_with(&self, family: &ForbiddenFamily<T>, a: OrientedSepId) -> bool {
        let extended = self.system.set_of(self.chosen.iter().copied().chain([a]));
        match family.kind() {
            FamilyKind::Empty => false,
            FamilyKind::Explicit => family
                .explicit_members()
                .iter()
                .any(|m| m.contains(a) && m.is_subset(&extended)),
            FamilyKind::Blocks { .. } => family.contains(&extended),
            _ => {
                let prev = &self.chosen;
                let set = |ids: &[OrientedSepId]| self.system.set_of(ids.iter().copied());
                if family.contains(&set(&[a])) {
                    return true;
                }
                for (i, &x) in prev.iter().enumerate() {
                    if family.contains(&set(&[x, a])) {
                        return true;
                    }
                    if prev[i + 1..].iter().any(|&y| family.contains(&set(&[x, y, a]))) {
                        return true;
                    }
                }
                false
            }
        }
    }

    fn run(&mut self, s: usize) -> Result<()> {
        self.visits += 1;
        if let Some(cap) = self.budget.max_visits {
            if self.visits > cap {
                return Err(Error::BudgetExceeded(format!("more than {cap} search nodes")));
            }
        }
        if s == self.system.len() {
            self.out.push(self.system.set_of(self.chosen.iter().copied()));
            return Ok(());
        }
        for a in SepId(s).orientations() {
            if self.chosen.iter().any(|&b| point_away(self.system, a, b)) {
                continue;
            }
            if self.family.is_some_and(|f| self.forbidden_with(f, a)) {
                continue;
            }
            self.chosen.push(a);
            self.run(s + 1)?;
            self.chosen.pop();
        }
        Ok(())
    }
}

fn enumerate<T: Scalar>(
    system: &SeparationSystem<T>,
    family: Option<&ForbiddenFamily<T>>,
    budget: &OracleBudget,
) -> Result<Vec<PartialOrientation>> {
    budget.admit(system)?;
    if family.is_some_and(|f| has_forbidden_subset(f, &system.empty_set())) {
        return Ok(Vec::new());
    }
    let mut search = Search {
        system,
        family,
        budget: *budget,
        visits: 0,
        chosen: Vec::new(),
        out: Vec::new(),
    };
    search.run(0)?;
    Ok(search.out)
}

/// All consistent orientations of `S`, in lexicographic order.
pub fn all_consistent_orientations<T: Scalar>(
    system: &SeparationSystem<T>,
    budget: &OracleBudget,
) -> Result<Vec<PartialOrientation>> {
    enumerate(system, None, budget)
}

/// All `F`-tangles of `S`, in lexicographic order.
pub fn all_tangles<T: Scalar>(
    system: &SeparationSystem<T>,
    family: &ForbiddenFamily<T>,
    budget: &OracleBudget,
) -> Result<Vec<PartialOrientation>> {
    enumerate(system, Some(family), budget)
}

/// Every orientation of `S`, consistent or not, in lexicographic order.
pub fn all_orientations<T: Scalar>(
    system: &SeparationSystem<T>,
    budget: &OracleBudget,
) -> Result<Vec<PartialOrientation>> {
    budget.admit(system)?;
    let n = system.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u64..1 << n {
        out.push(system.set_of((0..n).map(|s| {
            // bit set means backward; counting upwards gives lexicographic order
            if mask >> (n - 1 - s) & 1 == 1 {
                SepId(s).backward()
            } else {
                SepId(s).forward()
            }
        })));
    }
    Ok(out)
}

/// Elements of `tau` with no other element of `tau` strictly below them.
pub fn minimal_elements<T: Scalar>(system: &SeparationSystem<T>, tau: &PartialOrientation) -> PartialOrientation {
    system.set_of(tau.iter().filter(|&a| !tau.iter().any(|b| b != a && system.lt(b, a))))
}

/// No element of `sigma` is eclipsed by an element of `tau`.
pub fn is_efficient_in<T: Scalar>(
    system: &SeparationSystem<T>,
    sigma: &PartialOrientation,
    tau: &PartialOrientation,
) -> bool {
    sigma
        .iter()
        .all(|s| !tau.iter().any(|r| system.lt(r, s) && system.order_of(r) < system.order_of(s)))
}

/// No element of `sigma` is weakly eclipsed by an element of `tau`.
pub fn is_strongly_efficient_in<T: Scalar>(
    system: &SeparationSystem<T>,
    sigma: &PartialOrientation,
    tau: &PartialOrientation,
) -> bool {
    sigma
        .iter()
        .all(|s| !tau.iter().any(|r| system.lt(r, s) && system.order_of(r) <= system.order_of(s)))
}

/// The largest strongly efficient subset of `tau`: its elements not weakly
/// eclipsed by another of its elements.
pub fn strongly_efficient_part<T: Scalar>(system: &SeparationSystem<T>, tau: &PartialOrientation) -> PartialOrientation {
    system.set_of(
        tau.iter()
            .filter(|&s| !tau.iter().any(|r| system.lt(r, s) && system.order_of(r) <= system.order_of(s))),
    )
}

/// Whether `x` and `y` can be separated by fewer than `k` vertices.
pub fn separable(graph: &Graph, x: usize, y: usize, k: usize) -> bool {
    if x == y || graph.has_edge(x, y) {
        return false;
    }
    let all = graph.all_vertices();
    let others = all & !(1 << x) & !(1 << y);
    let mut sub = others;
    loop {
        if (sub.count_ones() as usize) < k {
            let comps = graph.components(all & !sub);
            if comps.iter().any(|c| c >> x & 1 == 1 && c >> y & 1 == 0) {
                return true;
            }
        }
        if sub == 0 {
            return false;
        }
        sub = (sub - 1) & others;
    }
}

/// All `k`-blocks: maximal sets of at least `k` vertices, no two of which are
/// separable by fewer than `k` vertices. Sorted by vertex mask.
pub fn k_blocks(graph: &Graph, k: usize) -> Vec<u64> {
    let n = graph.n();
    assert!(n <= 20, "k_blocks is exhaustive over vertex subsets");
    let inseparable: Vec<u64> = (0..n)
        .map(|x| (0..n).filter(|&y| !separable(graph, x, y, k)).fold(0, |m, y| m | 1 << y))
        .collect();
    let good = |set: u64| ones(set).all(|x| set & !inseparable[x] == 0);
    let candidates: Vec<u64> = (0u64..1 << n)
        .filter(|&set| set.count_ones() as usize >= k && good(set))
        .collect();
    candidates
        .iter()
        .copied()
        .filter(|&set| !candidates.iter().any(|&other| other != set && other & set == set))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sepsys::SystemSpec;
    use std::sync::Arc;

    fn f(s: usize) -> OrientedSepId {
        SepId(s).forward()
    }
    fn b(s: usize) -> OrientedSepId {
        SepId(s).backward()
    }

    #[test]
    fn empty_system_has_one_orientation() {
        let sys = SeparationSystem::<f64>::from_spec(SystemSpec::new(vec![], vec![])).unwrap();
        let all = all_consistent_orientations(&sys, &OracleBudget::default()).unwrap();
        assert_eq!(all, vec![sys.empty_set()]);
    }

    #[test]
    fn nested_pair_has_three() {
        let sys =
            SeparationSystem::from_spec(SystemSpec::new(vec![1.0, 2.0], vec![(f(0), f(1)), (b(1), b(0))])).unwrap();
        let all = all_consistent_orientations(&sys, &OracleBudget::default()).unwrap();
        assert_eq!(
            all,
            vec![sys.set_of([f(0), f(1)]), sys.set_of([b(0), f(1)]), sys.set_of([b(0), b(1)])]
        );
        let tau = sys.set_of([b(0), f(1)]);
        assert_eq!(minimal_elements(&sys, &tau), tau);
        assert!(is_strongly_efficient_in(&sys, &tau, &tau));
        let up = sys.set_of([f(0), f(1)]);
        assert_eq!(minimal_elements(&sys, &up), sys.set_of([f(0)]));
        assert!(!is_efficient_in(&sys, &sys.set_of([f(1)]), &up));
        assert!(is_efficient_in(&sys, &sys.empty_set(), &up));
    }

    #[test]
    fn crossing_pair_has_four() {
        let sys = SeparationSystem::from_spec(SystemSpec::new(vec![1.0, 1.0], vec![])).unwrap();
        assert_eq!(all_consistent_orientations(&sys, &OracleBudget::default()).unwrap().len(), 4);
        assert_eq!(all_orientations(&sys, &OracleBudget::default()).unwrap().len(), 4);
    }

    #[test]
    fn budget_refuses_large_systems() {
        let sys = SeparationSystem::from_spec(SystemSpec::new(vec![1.0; 5], vec![])).unwrap();
        let err = all_consistent_orientations(&sys, &OracleBudget::with_max_separations(4));
        assert!(matches!(err, Err(Error::BudgetExceeded(_))));
        let visits = OracleBudget {
            max_visits: Some(3),
            ..OracleBudget::default()
        };
        assert!(matches!(all_consistent_orientations(&sys, &visits), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn orientations_in_lexicographic_order() {
        let sys = SeparationSystem::from_spec(SystemSpec::new(vec![1.0; 3], vec![])).unwrap();
        let all = all_orientations(&sys, &OracleBudget::default()).unwrap();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let fam = ForbiddenFamily::make_empty(&Arc::new(sys.clone()));
        assert_eq!(all_tangles(&sys, &fam, &OracleBudget::default()).unwrap(), all);
    }

    #[test]
    fn blocks_of_small_graphs() {
        assert_eq!(k_blocks(&Graph::complete(4), 3), vec![0b1111]);
        assert!(k_blocks(&Graph::path(5), 3).is_empty());
        assert_eq!(k_blocks(&Graph::path(5), 2).len(), 4);
    }
}
