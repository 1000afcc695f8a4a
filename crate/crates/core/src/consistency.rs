//! The inconsistency predicate F as the least fixed point of the
//! predicative rules Rp_1–Rp_15 over an explored graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::sos::{explore, stable_closure, ExplorationLimit, Lts, StateId};
use crate::term::{Action, Term};
use crate::verdict::{DerivationStep, Verdict, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Rp1,
    Rp2,
    Rp3,
    Rp4,
    Rp5,
    Rp6,
    Rp7,
    Rp8,
    Rp9,
    Rp10,
    Rp11,
    Rp12,
    Rp13,
    Rp14,
    Rp15,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConsistencyError {
    #[error("exploration is incomplete ({states} states); inconsistency is undetermined")]
    Incomplete { states: usize },
}

impl ConsistencyError {
    pub fn states(&self) -> usize {
        match self {
            ConsistencyError::Incomplete { states } => *states,
        }
    }
}

/// Why a state is in F.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Justification {
    pub rule: Rule,
    pub action: Option<Action>,
    /// Members of F the rule instance depends on.
    pub premises: Vec<StateId>,
    /// Fixed-point round in which membership was established. Every premise
    /// has a strictly smaller depth.
    pub depth: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FSet {
    members: BTreeMap<StateId, Justification>,
}

impl FSet {
    pub fn contains(&self, s: StateId) -> bool {
        self.members.contains_key(&s)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = StateId> + '_ {
        self.members.keys().copied()
    }

    pub fn justification(&self, s: StateId) -> Option<&Justification> {
        self.members.get(&s)
    }

    pub fn depth(&self, s: StateId) -> Option<usize> {
        self.members.get(&s).map(|j| j.depth)
    }

    /// Derivation of `sF`, root first, each state listed once.
    pub fn derivation(&self, l: &Lts, s: StateId) -> Vec<DerivationStep> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            let Some(j) = self.members.get(&x) else {
                continue;
            };
            if !seen.insert(x) {
                continue;
            }
            out.push(DerivationStep {
                state: l.term(x).clone(),
                rule: j.rule,
                action: j.action.clone(),
                premises: j.premises.iter().map(|p| l.term(*p).clone()).collect(),
            });
            queue.extend(j.premises.iter().copied());
        }
        out
    }
}

/// Rules switched off when evaluating F. Only meant for checking that the
/// property suites notice a broken rule set.
#[doc(hidden)]
#[derive(Clone, Debug, Default)]
pub struct RuleMask {
    disabled: BTreeSet<Rule>,
}

impl RuleMask {
    pub fn without(rules: impl IntoIterator<Item = Rule>) -> Self {
        RuleMask {
            disabled: rules.into_iter().collect(),
        }
    }

    fn on(&self, r: Rule) -> bool {
        !self.disabled.contains(&r)
    }
}

pub fn compute_f(l: &Lts) -> Result<FSet, ConsistencyError> {
    compute_f_masked(l, &RuleMask::default())
}

#[doc(hidden)]
pub fn compute_f_masked(l: &Lts, mask: &RuleMask) -> Result<FSet, ConsistencyError> {
    if !l.is_complete() {
        return Err(ConsistencyError::Incomplete { states: l.len() });
    }
    let closures: Vec<Option<BTreeSet<StateId>>> = l
        .states()
        .map(|s| match l.term(s) {
            Term::Conj(..) | Term::Rec(_) => Some(stable_closure(l, s)),
            _ => None,
        })
        .collect();

    let mut dependents: Vec<Vec<StateId>> = vec![Vec::new(); l.len()];
    for s in l.states() {
        for c in l.children(s) {
            dependents[c.0].push(s);
        }
        if let Some(u) = l.unfolding(s) {
            dependents[u.0].push(s);
        }
        if matches!(l.term(s), Term::Conj(..)) {
            for (_, t) in l.successors(s) {
                dependents[t.0].push(s);
            }
        }
        if let Some(closure) = &closures[s.0] {
            for y in closure {
                dependents[y.0].push(s);
            }
        }
    }

    let mut f = FSet::default();
    let mut candidates: BTreeSet<StateId> = l.states().collect();
    let mut depth = 0;
    while !candidates.is_empty() {
        let fired: Vec<(StateId, Justification)> = candidates
            .iter()
            .filter(|s| !f.contains(**s))
            .filter_map(|s| fire(l, &f, *s, closures[s.0].as_ref(), mask, depth).map(|j| (*s, j)))
            .collect();
        candidates.clear();
        for (s, j) in fired {
            f.members.insert(s, j);
            candidates.extend(dependents[s.0].iter().copied());
        }
        depth += 1;
    }
    Ok(f)
}

/// First rule instance that puts `s` into F given the current members.
fn fire(
    l: &Lts,
    f: &FSet,
    s: StateId,
    closure: Option<&BTreeSet<StateId>>,
    mask: &RuleMask,
    depth: usize,
) -> Option<Justification> {
    let just = |rule, action, premises| {
        Some(Justification {
            rule,
            action,
            premises,
            depth,
        })
    };
    let children = l.children(s);
    let in_f = |x: StateId| f.contains(x);
    match l.term(s) {
        Term::Bottom if mask.on(Rule::Rp1) => just(Rule::Rp1, None, vec![]),
        Term::Prefix(..) if mask.on(Rule::Rp2) && in_f(children[0]) => {
            just(Rule::Rp2, None, vec![children[0]])
        }
        Term::Disj(..) if mask.on(Rule::Rp3) && in_f(children[0]) && in_f(children[1]) => {
            just(Rule::Rp3, None, vec![children[0], children[1]])
        }
        Term::ExtChoice(..) => either(children, Rule::Rp4, Rule::Rp5, mask, f)
            .and_then(|(r, c)| just(r, None, vec![c])),
        Term::Par(..) => either(children, Rule::Rp6, Rule::Rp7, mask, f)
            .and_then(|(r, c)| just(r, None, vec![c])),
        Term::Conj(..) => {
            if let Some((r, c)) = either(children, Rule::Rp8, Rule::Rp9, mask, f) {
                return just(r, None, vec![c]);
            }
            let (x1, x2) = (children[0], children[1]);
            if l.is_stable(s) {
                let labels: BTreeSet<Action> = l
                    .successors(x1)
                    .iter()
                    .chain(l.successors(x2))
                    .map(|(a, _)| a.clone())
                    .filter(|a| !a.is_tau())
                    .collect();
                for a in labels {
                    let (c1, c2) = (l.can(x1, &a), l.can(x2, &a));
                    if c1 && !c2 && mask.on(Rule::Rp10) {
                        return just(Rule::Rp10, Some(a), vec![]);
                    }
                    if !c1 && c2 && mask.on(Rule::Rp11) {
                        return just(Rule::Rp11, Some(a), vec![]);
                    }
                }
            }
            if mask.on(Rule::Rp12) {
                for (a, targets) in crate::sos::successor_map(l, s) {
                    if targets.iter().all(|t| in_f(*t)) {
                        return just(Rule::Rp12, Some(a), targets);
                    }
                }
            }
            let closure = closure.expect("closure precomputed for conjunctions");
            if mask.on(Rule::Rp13) && closure.iter().all(|y| in_f(*y)) {
                return just(Rule::Rp13, None, closure.iter().copied().collect());
            }
            None
        }
        Term::Rec(_) => {
            let u = l
                .unfolding(s)
                .expect("recursion states have their unfolding");
            if mask.on(Rule::Rp14) && in_f(u) {
                return just(Rule::Rp14, None, vec![u]);
            }
            let closure = closure.expect("closure precomputed for recursion");
            if mask.on(Rule::Rp15) && closure.iter().all(|y| in_f(*y)) {
                return just(Rule::Rp15, None, closure.iter().copied().collect());
            }
            None
        }
        _ => None,
    }
}

fn either(
    children: &[StateId],
    left: Rule,
    right: Rule,
    mask: &RuleMask,
    f: &FSet,
) -> Option<(Rule, StateId)> {
    if mask.on(left) && f.contains(children[0]) {
        Some((left, children[0]))
    } else if mask.on(right) && f.contains(children[1]) {
        Some((right, children[1]))
    } else {
        None
    }
}

/// `Holds` if `p ∉ F`, `Fails` with a derivation of `pF` otherwise.
pub fn is_consistent(p: &Term, limit: ExplorationLimit) -> Verdict {
    let l = explore(std::slice::from_ref(p), limit);
    let f = match compute_f(&l) {
        Ok(f) => f,
        Err(e) => return Verdict::Unknown(e.to_string()),
    };
    let s = l.roots()[0];
    if f.contains(s) {
        Verdict::Fails(Witness::Derivation(f.derivation(&l, s)))
    } else {
        Verdict::Holds
    }
}

// ---------------------------------------------------------------------------
// LLTS conditions

/// States violating LTS1: some enabled label whose successors all lie in F,
/// yet the state is not in F.
pub fn lts1_violations(l: &Lts, f: &FSet) -> Vec<StateId> {
    l.states()
        .filter(|s| !f.contains(*s))
        .filter(|s| {
            crate::sos::successor_map(l, *s)
                .values()
                .any(|targets| targets.iter().all(|t| f.contains(*t)))
        })
        .collect()
}

/// States violating LTS2: outside F without any F-avoiding stable descendant.
pub fn lts2_violations(l: &Lts, f: &FSet) -> Vec<StateId> {
    l.states()
        .filter(|s| !f.contains(*s))
        .filter(|s| {
            !l.tau_closure_within(*s, |x| !f.contains(x))
                .iter()
                .any(|q| l.is_stable(*q))
        })
        .collect()
}

/// Inconsistent states with a consistent τ-successor.
pub fn backward_tau_violations(l: &Lts, f: &FSet) -> Vec<StateId> {
    f.members()
        .filter(|p| l.tau_successors(*p).any(|q| !f.contains(q)))
        .collect()
}

/// Pairs `p ⇒ε q` with `p, q ∉ F` that are not connected by an F-avoiding τ-path.
pub fn tau_path_violations(l: &Lts, f: &FSet) -> Vec<(StateId, StateId)> {
    let mut out = Vec::new();
    for p in l.states().filter(|p| !f.contains(*p)) {
        let avoiding = l.tau_closure_within(p, |x| !f.contains(x));
        for q in l.tau_closure(p) {
            if !f.contains(q) && !avoiding.contains(&q) {
                out.push((p, q));
            }
        }
    }
    out
}

/// Members whose justification is not strictly well-founded.
pub fn well_foundedness_violations(f: &FSet) -> Vec<StateId> {
    f.members
        .iter()
        .filter(|(_, j)| {
            j.premises
                .iter()
                .any(|p| f.depth(*p).is_none_or(|d| d >= j.depth))
        })
        .map(|(s, _)| *s)
        .collect()
}

/// Members that would not be re-derived if they alone were removed from F.
pub fn minimality_violations(l: &Lts, f: &FSet) -> Vec<StateId> {
    let mask = RuleMask::default();
    f.members()
        .filter(|s| {
            let mut without = f.clone();
            without.members.remove(s);
            let closure = match l.term(*s) {
                Term::Conj(..) | Term::Rec(_) => Some(stable_closure(l, *s)),
                _ => None,
            };
            fire(l, &without, *s, closure.as_ref(), &mask, 0).is_none()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn analyse(src: &str) -> (Lts, FSet, StateId) {
        let l = explore(&[parse_term(src).unwrap()], ExplorationLimit::default());
        let f = compute_f(&l).unwrap();
        let root = l.roots()[0];
        (l, f, root)
    }

    #[test]
    fn bottom_is_inconsistent() {
        let (_, f, root) = analyse("bot");
        assert_eq!(f.justification(root).unwrap().rule, Rule::Rp1);
    }

    #[test]
    fn recursion_on_visible_action_is_consistent() {
        let (_, f, root) = analyse("rec X { X = a.X }");
        assert!(!f.contains(root));
    }

    #[test]
    fn divergence_is_inconsistent() {
        let (_, f, root) = analyse("rec X { X = tau.X }");
        let j = f.justification(root).unwrap();
        assert_eq!(j.rule, Rule::Rp15);
        assert!(j.premises.is_empty());
    }

    #[test]
    fn mismatched_conjunction() {
        let (_, f, root) = analyse("a.0 /\\ b.0");
        let j = f.justification(root).unwrap();
        assert_eq!(j.rule, Rule::Rp10);
        assert_eq!(j.action, Some(Action::visible("a").unwrap()));

        let (_, f, root) = analyse("0 /\\ a.0");
        assert_eq!(f.justification(root).unwrap().rule, Rule::Rp11);
    }

    #[test]
    fn conjunction_with_doomed_successors() {
        let (l, f, root) = analyse("rec Z { Z = b.Z } /\\ b.rec X { X = a.X }");
        let j = f.justification(root).unwrap();
        assert_eq!(j.rule, Rule::Rp12);
        let next = l
            .lookup(&parse_term("rec Z { Z = b.Z } /\\ rec X { X = a.X }").unwrap())
            .unwrap();
        assert_eq!(j.premises, vec![next]);
        assert!(matches!(
            f.justification(next).unwrap().rule,
            Rule::Rp10 | Rule::Rp11
        ));
        let steps = f.derivation(&l, root);
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].rule, Rule::Rp12);
    }

    #[test]
    fn structural_propagation() {
        let (_, f, root) = analyse("a.bot");
        assert_eq!(f.justification(root).unwrap().rule, Rule::Rp2);
        let (_, f, root) = analyse("bot \\/ 0");
        assert!(!f.contains(root));
        let (_, f, root) = analyse("bot \\/ bot");
        assert_eq!(f.justification(root).unwrap().rule, Rule::Rp3);
        let (_, f, root) = analyse("0 [] bot");
        assert_eq!(f.justification(root).unwrap().rule, Rule::Rp5);
        let (_, f, root) = analyse("bot |[]| 0");
        assert_eq!(f.justification(root).unwrap().rule, Rule::Rp6);
        let (_, f, root) = analyse("rec X { X = a.X \\/ bot } /\\ 0");
        // Rp_14 on the recursion operand is not needed: the operand is consistent.
        assert!(f.contains(root));
    }

    #[test]
    fn unfolding_feeds_recursion() {
        // <X|X = a.X /\ b.X>: the unfolding is a stable mismatched conjunction.
        let (l, f, root) = analyse("rec X { X = a.X /\\ b.X }");
        let j = f.justification(root).unwrap();
        assert_eq!(j.rule, Rule::Rp14);
        assert_eq!(Some(j.premises[0]), l.unfolding(root));
    }

    #[test]
    fn incomplete_graph_is_rejected() {
        let l = explore(
            &[parse_term("rec X { X = a.(X |[]| b.0) }").unwrap()],
            ExplorationLimit::new(20),
        );
        assert_eq!(
            compute_f(&l),
            Err(ConsistencyError::Incomplete { states: 20 })
        );
    }

    #[test]
    fn is_consistent_verdicts() {
        let lim = ExplorationLimit::default();
        assert!(is_consistent(&parse_term("rec X { X = a.X }").unwrap(), lim).holds());
        match is_consistent(&Term::Bottom, lim) {
            Verdict::Fails(Witness::Derivation(steps)) => assert_eq!(steps[0].rule, Rule::Rp1),
            other => panic!("unexpected {other:?}"),
        }
        let v = is_consistent(
            &parse_term("rec X { X = a.(X |[]| b.0) }").unwrap(),
            ExplorationLimit::new(100),
        );
        assert!(v.is_unknown());
    }

    #[test]
    fn llts_conditions_on_small_graphs() {
        for src in [
            "rec X { X = a.X }",
            "(a.0 \\/ b.0) /\\ a.0",
            "rec X { X = tau.X } [] a.0",
            "tau.(a.0 /\\ b.0) \\/ c.0",
            "rec X { X = a.X } /\\ (b.0 \\/ a.rec Y { Y = a.Y })",
        ] {
            let (l, f, _) = analyse(src);
            assert!(lts1_violations(&l, &f).is_empty(), "{src}");
            assert!(lts2_violations(&l, &f).is_empty(), "{src}");
            assert!(backward_tau_violations(&l, &f).is_empty(), "{src}");
            assert!(tau_path_violations(&l, &f).is_empty(), "{src}");
            assert!(well_foundedness_violations(&f).is_empty(), "{src}");
            assert!(minimality_violations(&l, &f).is_empty(), "{src}");
        }
    }

    #[test]
    fn masked_rule_is_skipped() {
        let l = explore(
            &[parse_term("0 /\\ a.0").unwrap()],
            ExplorationLimit::default(),
        );
        let f = compute_f_masked(&l, &RuleMask::without([Rule::Rp11])).unwrap();
        assert!(!f.contains(l.roots()[0]));
    }
}
