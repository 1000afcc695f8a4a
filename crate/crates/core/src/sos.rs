//! Operational rules Ra_1–Ra_16 and state-space exploration.
//!
//! Negative premises (`x ↛τ` in the rules for `[]` and `|[A]|`) are resolved
//! by stratification: τ-transitions are derived first, and they never depend
//! on negative premises; the visible layer then consults stability.
//! Both layers are computed together per subterm, bottom-up.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::term::{canonicalize, reduce_conjunctions, unfold_spec, Action, Name, Term};

/// Outgoing transitions of a single term, before canonicalisation.
#[derive(Clone, Debug, Default)]
pub struct Transitions {
    pub tau: Vec<Term>,
    pub visible: Vec<(Name, Term)>,
}

impl Transitions {
    pub fn is_stable(&self) -> bool {
        self.tau.is_empty()
    }

    fn on<'a>(&'a self, a: &'a Name) -> impl Iterator<Item = &'a Term> + 'a {
        self.visible
            .iter()
            .filter(move |(b, _)| b == a)
            .map(|(_, t)| t)
    }
}

/// Derives all transitions of `p`. Variables have no transitions, which
/// lets the same function compute the moves of an open context.
pub fn transitions(p: &Term) -> Transitions {
    match p {
        Term::Stop | Term::Bottom | Term::Var(_) => Transitions::default(),
        // Ra_1
        Term::Prefix(Action::Tau, body) => Transitions {
            tau: vec![(**body).clone()],
            visible: Vec::new(),
        },
        Term::Prefix(Action::Visible(a), body) => Transitions {
            tau: Vec::new(),
            visible: vec![(a.clone(), (**body).clone())],
        },
        Term::ExtChoice(l, r) => {
            let (tl, tr) = (transitions(l), transitions(r));
            let mut out = Transitions::default();
            // Ra_4, Ra_5
            for y in &tl.tau {
                out.tau
                    .push(Term::ExtChoice(Arc::new(y.clone()), r.clone()));
            }
            for y in &tr.tau {
                out.tau
                    .push(Term::ExtChoice(l.clone(), Arc::new(y.clone())));
            }
            // Ra_2, Ra_3
            if tr.is_stable() {
                out.visible.extend(tl.visible.iter().cloned());
            }
            if tl.is_stable() {
                out.visible.extend(tr.visible.iter().cloned());
            }
            out
        }
        Term::Conj(l, r) => {
            let (tl, tr) = (transitions(l), transitions(r));
            let mut out = Transitions::default();
            // Ra_7, Ra_8
            for y in &tl.tau {
                out.tau.push(Term::Conj(Arc::new(y.clone()), r.clone()));
            }
            for y in &tr.tau {
                out.tau.push(Term::Conj(l.clone(), Arc::new(y.clone())));
            }
            // Ra_6
            for (a, y1) in &tl.visible {
                for y2 in tr.on(a) {
                    out.visible
                        .push((a.clone(), Term::conj(y1.clone(), y2.clone())));
                }
            }
            out
        }
        // Ra_9, Ra_10
        Term::Disj(l, r) => Transitions {
            tau: vec![(**l).clone(), (**r).clone()],
            visible: Vec::new(),
        },
        Term::Par(sync, l, r) => {
            let (tl, tr) = (transitions(l), transitions(r));
            let mut out = Transitions::default();
            // Ra_11, Ra_12
            for y in &tl.tau {
                out.tau
                    .push(Term::Par(sync.clone(), Arc::new(y.clone()), r.clone()));
            }
            for y in &tr.tau {
                out.tau
                    .push(Term::Par(sync.clone(), l.clone(), Arc::new(y.clone())));
            }
            // Ra_13, Ra_14
            if tr.is_stable() {
                for (a, y) in tl.visible.iter().filter(|(a, _)| !sync.contains(a)) {
                    out.visible.push((
                        a.clone(),
                        Term::Par(sync.clone(), Arc::new(y.clone()), r.clone()),
                    ));
                }
            }
            if tl.is_stable() {
                for (a, y) in tr.visible.iter().filter(|(a, _)| !sync.contains(a)) {
                    out.visible.push((
                        a.clone(),
                        Term::Par(sync.clone(), l.clone(), Arc::new(y.clone())),
                    ));
                }
            }
            // Ra_15
            for (a, y1) in tl.visible.iter().filter(|(a, _)| sync.contains(a)) {
                for y2 in tr.on(a) {
                    out.visible.push((
                        a.clone(),
                        Term::Par(sync.clone(), Arc::new(y1.clone()), Arc::new(y2.clone())),
                    ));
                }
            }
            out
        }
        // Ra_16; guardedness makes this recursion terminate.
        Term::Rec(spec) => transitions(&unfold_spec(spec)),
    }
}

pub fn tau_successors(p: &Term) -> BTreeSet<Term> {
    transitions(p).tau.iter().map(canonicalize).collect()
}

pub fn visible_successors(p: &Term, a: &str) -> BTreeSet<Term> {
    let a: Name = Arc::from(a);
    transitions(p).on(&a).map(canonicalize).collect()
}

pub fn is_stable(p: &Term) -> bool {
    transitions(p).is_stable()
}

pub fn ready_set(p: &Term) -> BTreeSet<Action> {
    let t = transitions(p);
    let mut out: BTreeSet<Action> = t
        .visible
        .iter()
        .map(|(a, _)| Action::Visible(a.clone()))
        .collect();
    if !t.tau.is_empty() {
        out.insert(Action::Tau);
    }
    out
}

// ---------------------------------------------------------------------------
// Explored graphs

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExplorationLimit {
    pub max_states: usize,
    /// Identify states up to re-association of conjunctions and removal of
    /// repeated linear conjuncts, on top of α-equivalence.
    pub reduce_conjunctions: bool,
    /// States nested deeper than this count as exceeding the bound.
    pub max_term_depth: usize,
    /// States with more syntax nodes than this count as exceeding the bound.
    pub max_term_size: usize,
}

impl ExplorationLimit {
    pub const DEFAULT_MAX_STATES: usize = 10_000;
    pub const DEFAULT_MAX_TERM_DEPTH: usize = 256;
    pub const DEFAULT_MAX_TERM_SIZE: usize = 4096;

    pub fn new(max_states: usize) -> Self {
        ExplorationLimit {
            max_states: max_states.max(1),
            ..Self::default()
        }
    }

    /// α-equivalence only.
    pub fn alpha_only(mut self) -> Self {
        self.reduce_conjunctions = false;
        self
    }
}

impl Default for ExplorationLimit {
    fn default() -> Self {
        ExplorationLimit {
            max_states: Self::DEFAULT_MAX_STATES,
            reduce_conjunctions: true,
            max_term_depth: Self::DEFAULT_MAX_TERM_DEPTH,
            max_term_size: Self::DEFAULT_MAX_TERM_SIZE,
        }
    }
}

/// Canonical representative used as state identity.
pub fn state_key(t: &Term, limit: &ExplorationLimit) -> Term {
    let c = canonicalize(t);
    if limit.reduce_conjunctions {
        reduce_conjunctions(&c)
    } else {
        c
    }
}

/// A finite transition graph over canonical closed terms.
///
/// Besides the states reachable from the roots by transitions, the graph
/// holds every structural operand of a state and the unfolding of every
/// recursion state, since the inconsistency rules refer to those.
#[derive(Clone, Debug)]
pub struct Lts {
    terms: Vec<Term>,
    index: HashMap<Term, StateId>,
    succ: Vec<Vec<(Action, StateId)>>,
    children: Vec<Vec<StateId>>,
    unfolding: Vec<Option<StateId>>,
    reachable: Vec<bool>,
    roots: Vec<StateId>,
    complete: bool,
    limit: ExplorationLimit,
}

impl Lts {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.terms.len()).map(StateId)
    }

    pub fn term(&self, s: StateId) -> &Term {
        &self.terms[s.0]
    }

    /// Finds the state for a term, up to the graph's state identity.
    pub fn lookup(&self, t: &Term) -> Option<StateId> {
        self.index.get(&state_key(t, &self.limit)).copied()
    }

    /// One entry per root term passed to [`explore`], in order; equal terms share a state.
    pub fn roots(&self) -> &[StateId] {
        &self.roots
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn limit(&self) -> ExplorationLimit {
        self.limit
    }

    /// Reachable from some root through transitions.
    pub fn is_reachable(&self, s: StateId) -> bool {
        self.reachable[s.0]
    }

    pub fn reachable_count(&self) -> usize {
        self.reachable.iter().filter(|r| **r).count()
    }

    /// Outgoing transitions, sorted by label then target.
    pub fn successors(&self, s: StateId) -> &[(Action, StateId)] {
        &self.succ[s.0]
    }

    pub fn transition_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn reachable_transition_count(&self) -> usize {
        self.states()
            .filter(|s| self.is_reachable(*s))
            .map(|s| self.succ[s.0].len())
            .sum()
    }

    pub fn tau_successors(&self, s: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.succ[s.0]
            .iter()
            .filter(|(a, _)| a.is_tau())
            .map(|(_, t)| *t)
    }

    pub fn successors_on<'a>(
        &'a self,
        s: StateId,
        a: &'a Action,
    ) -> impl Iterator<Item = StateId> + 'a {
        self.succ[s.0]
            .iter()
            .filter(move |(b, _)| b == a)
            .map(|(_, t)| *t)
    }

    pub fn is_stable(&self, s: StateId) -> bool {
        !self.succ[s.0].iter().any(|(a, _)| a.is_tau())
    }

    pub fn ready_set(&self, s: StateId) -> BTreeSet<Action> {
        self.succ[s.0].iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn can(&self, s: StateId, a: &Action) -> bool {
        self.succ[s.0].iter().any(|(b, _)| b == a)
    }

    /// Structural operands (in left-to-right order).
    pub fn children(&self, s: StateId) -> &[StateId] {
        &self.children[s.0]
    }

    /// The unfolding `<t_Z|E>` of a recursion state.
    pub fn unfolding(&self, s: StateId) -> Option<StateId> {
        self.unfolding[s.0]
    }

    /// Visible actions labelling some transition.
    pub fn alphabet(&self) -> BTreeSet<Name> {
        self.succ
            .iter()
            .flatten()
            .filter_map(|(a, _)| match a {
                Action::Visible(n) => Some(n.clone()),
                Action::Tau => None,
            })
            .collect()
    }

    /// Every state reachable by τ-steps, including `s`.
    pub fn tau_closure(&self, s: StateId) -> BTreeSet<StateId> {
        self.tau_closure_within(s, |_| true)
    }

    /// τ-closure through states accepted by `allowed`; empty if `s` itself is rejected.
    pub fn tau_closure_within(
        &self,
        s: StateId,
        allowed: impl Fn(StateId) -> bool,
    ) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::new();
        if !allowed(s) {
            return seen;
        }
        let mut stack = vec![s];
        seen.insert(s);
        while let Some(x) = stack.pop() {
            for y in self.tau_successors(x) {
                if allowed(y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }
}

/// Stable states reachable from `s` through τ-steps (`s ⇒ε| q`). An empty
/// result means every τ-path from `s` diverges.
pub fn stable_closure(l: &Lts, s: StateId) -> BTreeSet<StateId> {
    l.tau_closure(s)
        .into_iter()
        .filter(|q| l.is_stable(*q))
        .collect()
}

/// Breadth-first closure of the roots under transitions, structural
/// operands and unfolding. Stops with `complete = false` once more than
/// `limit.max_states` states, or a state larger than the term bounds, would be needed.
pub fn explore(roots: &[Term], limit: ExplorationLimit) -> Lts {
    let mut lts = Lts {
        terms: Vec::new(),
        index: HashMap::new(),
        succ: Vec::new(),
        children: Vec::new(),
        unfolding: Vec::new(),
        reachable: Vec::new(),
        roots: Vec::new(),
        complete: true,
        limit,
    };
    let mut queue = VecDeque::new();

    let intern = |lts: &mut Lts, queue: &mut VecDeque<StateId>, t: Term| -> Option<StateId> {
        if !t.fits(limit.max_term_size, limit.max_term_depth) {
            lts.complete = false;
            return None;
        }
        let key = state_key(&t, &limit);
        if let Some(id) = lts.index.get(&key) {
            return Some(*id);
        }
        if lts.terms.len() >= limit.max_states {
            lts.complete = false;
            return None;
        }
        let id = StateId(lts.terms.len());
        lts.index.insert(key.clone(), id);
        lts.terms.push(key);
        lts.succ.push(Vec::new());
        lts.children.push(Vec::new());
        lts.unfolding.push(None);
        lts.reachable.push(false);
        queue.push_back(id);
        Some(id)
    };

    for root in roots {
        match intern(&mut lts, &mut queue, root.clone()) {
            Some(id) => lts.roots.push(id),
            None => break,
        }
    }

    while let Some(id) = queue.pop_front() {
        if !lts.complete {
            break;
        }
        let term = lts.terms[id.0].clone();
        let trans = transitions(&term);
        let mut succ = BTreeSet::new();
        for y in trans.tau {
            match intern(&mut lts, &mut queue, y) {
                Some(t) => {
                    succ.insert((Action::Tau, t));
                }
                None => break,
            }
        }
        for (a, y) in trans.visible {
            match intern(&mut lts, &mut queue, y) {
                Some(t) => {
                    succ.insert((Action::Visible(a), t));
                }
                None => break,
            }
        }
        lts.succ[id.0] = succ.into_iter().collect();

        let operands: Vec<Term> = match &term {
            Term::Prefix(_, b) => vec![(**b).clone()],
            Term::ExtChoice(l, r) | Term::Conj(l, r) | Term::Disj(l, r) | Term::Par(_, l, r) => {
                vec![(**l).clone(), (**r).clone()]
            }
            _ => Vec::new(),
        };
        let mut children = Vec::with_capacity(operands.len());
        for op in operands {
            match intern(&mut lts, &mut queue, op) {
                Some(c) => children.push(c),
                None => break,
            }
        }
        lts.children[id.0] = children;

        if let Term::Rec(spec) = &term {
            lts.unfolding[id.0] = intern(&mut lts, &mut queue, unfold_spec(spec));
        }
    }

    // Transition reachability from the roots.
    let mut stack: Vec<StateId> = lts.roots.clone();
    for r in &lts.roots {
        lts.reachable[r.0] = true;
    }
    while let Some(s) = stack.pop() {
        for (_, t) in &lts.succ[s.0] {
            if !lts.reachable[t.0] {
                lts.reachable[t.0] = true;
                stack.push(*t);
            }
        }
    }
    lts
}

/// Checks τ-purity; returns the offending states.
pub fn tau_purity_violations(l: &Lts) -> Vec<StateId> {
    l.states()
        .filter(|s| {
            let succ = l.successors(*s);
            succ.iter().any(|(a, _)| a.is_tau()) && succ.iter().any(|(a, _)| !a.is_tau())
        })
        .collect()
}

/// Groups outgoing transitions by label.
pub fn successor_map(l: &Lts, s: StateId) -> BTreeMap<Action, Vec<StateId>> {
    let mut out: BTreeMap<Action, Vec<StateId>> = BTreeMap::new();
    for (a, t) in l.successors(s) {
        out.entry(a.clone()).or_default().push(*t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    fn set(srcs: &[&str]) -> BTreeSet<Term> {
        srcs.iter().map(|s| canonicalize(&t(s))).collect()
    }

    #[test]
    fn tau_successor_examples() {
        assert_eq!(tau_successors(&t("a.0 \\/ b.0")), set(&["a.0", "b.0"]));
        assert!(tau_successors(&t("a.0")).is_empty());
        assert_eq!(tau_successors(&t("(0 \\/ 0) /\\ 0")), set(&["0 /\\ 0"]));
    }

    #[test]
    fn stability_examples() {
        assert!(is_stable(&t("rec X { X = a.X }")));
        assert!(!is_stable(&t("tau.0")));
        assert!(!is_stable(&t("0 \\/ 0")));
    }

    #[test]
    fn visible_successor_examples() {
        assert_eq!(visible_successors(&t("a.0"), "a"), set(&["0"]));
        assert_eq!(
            visible_successors(&t("a.0 /\\ a.b.0"), "a"),
            set(&["0 /\\ b.0"])
        );
        assert!(visible_successors(&t("a.0 |[a]| b.0"), "a").is_empty());
        // Unsynchronised actions interleave only next to a stable partner.
        assert!(visible_successors(&t("a.0 |[]| tau.0"), "a").is_empty());
        assert_eq!(
            visible_successors(&t("a.0 |[]| b.0"), "a"),
            set(&["0 |[]| b.0"])
        );
        // External choice blocks visible moves while the other side is unstable.
        assert!(visible_successors(&t("a.0 [] tau.0"), "a").is_empty());
        assert_eq!(
            visible_successors(&t("a.0 |[a]| a.b.0"), "a"),
            set(&["0 |[a]| b.0"])
        );
    }

    #[test]
    fn ready_set_examples() {
        assert!(ready_set(&Term::Stop).is_empty());
        let both: BTreeSet<Action> = [Action::visible("a").unwrap(), Action::visible("b").unwrap()]
            .into_iter()
            .collect();
        assert_eq!(ready_set(&t("a.0 [] b.0")), both);
        assert_eq!(ready_set(&t("a.0 \\/ b.0")), BTreeSet::from([Action::Tau]));
    }

    #[test]
    fn explore_self_loop() {
        let l = explore(&[t("rec X { X = a.X }")], ExplorationLimit::default());
        assert!(l.is_complete());
        assert_eq!(l.reachable_count(), 1);
        assert_eq!(l.reachable_transition_count(), 1);
        let root = l.roots()[0];
        assert_eq!(l.successors(root), &[(Action::visible("a").unwrap(), root)]);
        // The unfolding a.<X|X=a.X> is kept as an auxiliary state.
        assert_eq!(l.len(), 2);
        assert!(l.unfolding(root).is_some());
    }

    #[test]
    fn explore_chain() {
        let l = explore(&[t("a.b.0")], ExplorationLimit::default());
        assert_eq!(l.reachable_count(), 3);
        assert_eq!(l.reachable_transition_count(), 2);
        assert_eq!(l.len(), 3);
    }

    #[test]
    fn explore_bound_marks_incomplete() {
        let l = explore(
            &[t("rec X { X = a.(X |[]| b.0) }")],
            ExplorationLimit::new(50),
        );
        assert!(!l.is_complete());
        assert_eq!(l.len(), 50);
    }

    #[test]
    fn explore_is_deterministic() {
        let root = t("(rec Y { Y = a.Y } /\\ a.rec X { X = a.X }) \\/ (rec Z { Z = b.Z } /\\ b.rec X { X = a.X })");
        let a = explore(std::slice::from_ref(&root), ExplorationLimit::default());
        let b = explore(&[root], ExplorationLimit::default());
        assert_eq!(a.terms, b.terms);
        assert_eq!(a.succ, b.succ);
    }

    #[test]
    fn stable_closure_examples() {
        let l = explore(&[t("a.0")], ExplorationLimit::default());
        let s = l.roots()[0];
        assert_eq!(stable_closure(&l, s), BTreeSet::from([s]));

        let l = explore(&[t("rec X { X = tau.X }")], ExplorationLimit::default());
        assert!(stable_closure(&l, l.roots()[0]).is_empty());

        let l = explore(&[t("a.0 \\/ 0")], ExplorationLimit::default());
        let expected: BTreeSet<StateId> =
            [l.lookup(&t("a.0")).unwrap(), l.lookup(&t("0")).unwrap()].into();
        assert_eq!(stable_closure(&l, l.roots()[0]), expected);
    }

    #[test]
    fn tau_purity_on_mixed_choice() {
        // a.0 [] tau.0 only offers the τ-move.
        let l = explore(&[t("a.0 [] tau.0")], ExplorationLimit::default());
        assert!(tau_purity_violations(&l).is_empty());
        assert_eq!(l.ready_set(l.roots()[0]), BTreeSet::from([Action::Tau]));
    }
}
