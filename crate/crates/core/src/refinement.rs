//! Stable ready simulation and the refinement preorder ⊑_RS.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::consistency::{compute_f, ConsistencyError, FSet};
use crate::sos::{explore, ExplorationLimit, Lts, StateId};
use crate::syntax::pretty;
use crate::term::{Action, Term};
use crate::verdict::{Clause, TraceStep, Verdict, Witness};

/// Weak F-avoiding steps over an explored graph.
#[derive(Clone, Debug)]
pub struct WeakStepTable {
    eps_stable: Vec<BTreeSet<StateId>>,
    eps_stable_f: Vec<BTreeSet<StateId>>,
    act_stable_f: Vec<BTreeMap<Action, BTreeSet<StateId>>>,
}

static EMPTY: BTreeSet<StateId> = BTreeSet::new();

impl WeakStepTable {
    /// `{q | p ⇒ε| q}`.
    pub fn eps_stable(&self, p: StateId) -> &BTreeSet<StateId> {
        &self.eps_stable[p.0]
    }

    /// `{q | p ⇒ε_F| q}`.
    pub fn eps_stable_f(&self, p: StateId) -> &BTreeSet<StateId> {
        &self.eps_stable_f[p.0]
    }

    /// `{q | p ⇒a_F| q}`.
    pub fn act_stable_f(&self, p: StateId, a: &Action) -> &BTreeSet<StateId> {
        self.act_stable_f[p.0].get(a).unwrap_or(&EMPTY)
    }

    pub fn moves(&self, p: StateId) -> &BTreeMap<Action, BTreeSet<StateId>> {
        &self.act_stable_f[p.0]
    }
}

pub fn weak_steps(l: &Lts, f: &FSet) -> WeakStepTable {
    let ok = |x: StateId| !f.contains(x);
    let stable_in = |set: BTreeSet<StateId>| -> BTreeSet<StateId> {
        set.into_iter().filter(|q| l.is_stable(*q)).collect()
    };
    let eps_stable: Vec<_> = l.states().map(|s| stable_in(l.tau_closure(s))).collect();
    let eps_stable_f: Vec<_> = l
        .states()
        .map(|s| stable_in(l.tau_closure_within(s, ok)))
        .collect();
    let act_stable_f = l
        .states()
        .map(|s| {
            let mut moves: BTreeMap<Action, BTreeSet<StateId>> = BTreeMap::new();
            for r in l.tau_closure_within(s, ok) {
                for (a, t) in l.successors(r) {
                    if a.is_tau() || !ok(*t) {
                        continue;
                    }
                    moves
                        .entry(a.clone())
                        .or_default()
                        .extend(eps_stable_f[t.0].iter().copied());
                }
            }
            moves.retain(|_, v| !v.is_empty());
            moves
        })
        .collect();
    WeakStepTable {
        eps_stable,
        eps_stable_f,
        act_stable_f,
    }
}

/// A relation on the states of one graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimRelation {
    pairs: BTreeSet<(StateId, StateId)>,
}

impl SimRelation {
    pub fn new(pairs: impl IntoIterator<Item = (StateId, StateId)>) -> Self {
        SimRelation {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn contains(&self, p: StateId, q: StateId) -> bool {
        self.pairs.contains(&(p, q))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn inverse(&self) -> SimRelation {
        SimRelation::new(self.pairs().map(|(p, q)| (q, p)))
    }

    /// `self ; other` as relational composition.
    pub fn compose(&self, other: &SimRelation) -> SimRelation {
        let mut by_left: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
        for (x, y) in other.pairs() {
            by_left.entry(x).or_default().push(y);
        }
        let mut out = BTreeSet::new();
        for (p, x) in self.pairs() {
            if let Some(ys) = by_left.get(&x) {
                out.extend(ys.iter().map(|y| (p, *y)));
            }
        }
        SimRelation { pairs: out }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Reason {
    Rs2,
    Rs4,
    Rs3 { action: Action, target: StateId },
}

/// Greatest-fixed-point refinement of a candidate set of stable pairs.
struct Game<'a> {
    l: &'a Lts,
    f: &'a FSet,
    w: &'a WeakStepTable,
    alive: BTreeSet<(StateId, StateId)>,
    deleted: HashMap<(StateId, StateId), (usize, Reason)>,
}

impl<'a> Game<'a> {
    /// `close` adds the successor pairs reachable through matching moves.
    fn solve(
        l: &'a Lts,
        f: &'a FSet,
        w: &'a WeakStepTable,
        initial: impl IntoIterator<Item = (StateId, StateId)>,
        close: bool,
    ) -> Self {
        let mut alive: BTreeSet<(StateId, StateId)> = BTreeSet::new();
        let mut stack: Vec<_> = initial.into_iter().collect();
        while let Some((p, q)) = stack.pop() {
            if !alive.insert((p, q)) || !close {
                continue;
            }
            for (a, ps) in w.moves(p) {
                for p2 in ps {
                    for q2 in w.act_stable_f(q, a) {
                        if !alive.contains(&(*p2, *q2)) {
                            stack.push((*p2, *q2));
                        }
                    }
                }
            }
        }
        let mut g = Game {
            l,
            f,
            w,
            alive,
            deleted: HashMap::new(),
        };
        g.run();
        g
    }

    fn run(&mut self) {
        let mut round = 0;
        loop {
            let mut dead = Vec::new();
            for &(p, q) in &self.alive {
                if let Some(r) = self.violation(p, q, round == 0) {
                    dead.push(((p, q), r));
                }
            }
            if dead.is_empty() {
                break;
            }
            for (pair, r) in dead {
                self.alive.remove(&pair);
                self.deleted.insert(pair, (round, r));
            }
            round += 1;
        }
    }

    fn violation(&self, p: StateId, q: StateId, local: bool) -> Option<Reason> {
        let (l, f, w) = (self.l, self.f, self.w);
        if local {
            if !f.contains(p) && f.contains(q) {
                return Some(Reason::Rs2);
            }
            if !f.contains(p) && l.ready_set(p) != l.ready_set(q) {
                return Some(Reason::Rs4);
            }
        }
        for (a, ps) in w.moves(p) {
            for p2 in ps {
                let answered = w
                    .act_stable_f(q, a)
                    .iter()
                    .any(|q2| self.alive.contains(&(*p2, *q2)));
                if !answered {
                    return Some(Reason::Rs3 {
                        action: a.clone(),
                        target: *p2,
                    });
                }
            }
        }
        None
    }

    /// The defender's longest-surviving answer among `answers` for `p`.
    fn best_answer(&self, p: StateId, answers: &BTreeSet<StateId>) -> Option<StateId> {
        answers
            .iter()
            .copied()
            .max_by_key(|q| self.deleted.get(&(p, *q)).map_or(usize::MAX, |d| d.0))
    }

    fn trace(&self, mut pair: (StateId, StateId), steps: &mut Vec<TraceStep>) {
        let term = |s: StateId| self.l.term(s).clone();
        loop {
            let (p, q) = pair;
            let Some((_, reason)) = self.deleted.get(&pair) else {
                return;
            };
            match reason {
                Reason::Rs2 => {
                    steps.push(TraceStep::Clause {
                        clause: Clause::Rs2,
                        detail: format!(
                            "{} is consistent but {} is not",
                            pretty(&term(p)),
                            pretty(&term(q))
                        ),
                    });
                    return;
                }
                Reason::Rs4 => {
                    steps.push(TraceStep::Clause {
                        clause: Clause::Rs4,
                        detail: format!(
                            "ready sets {} vs {}",
                            show_ready(&self.l.ready_set(p)),
                            show_ready(&self.l.ready_set(q))
                        ),
                    });
                    return;
                }
                Reason::Rs3 { action, target } => {
                    let answers = self.w.act_stable_f(q, action);
                    match self.best_answer(*target, answers) {
                        None => {
                            steps.push(TraceStep::Move {
                                action: action.clone(),
                                lhs: term(*target),
                                rhs: None,
                            });
                            steps.push(TraceStep::Clause {
                                clause: Clause::Rs3,
                                detail: format!(
                                    "{} has no F-avoiding {action}-step to a stable state",
                                    pretty(&term(q))
                                ),
                            });
                            return;
                        }
                        Some(q2) => {
                            steps.push(TraceStep::Move {
                                action: action.clone(),
                                lhs: term(*target),
                                rhs: Some(term(q2)),
                            });
                            pair = (*target, q2);
                        }
                    }
                }
            }
        }
    }
}

fn show_ready(r: &BTreeSet<Action>) -> String {
    let names: Vec<String> = r.iter().map(|a| a.to_string()).collect();
    format!("{{{}}}", names.join(", "))
}

/// The largest stable ready simulation on the graph.
pub fn largest_stable_rs(l: &Lts, f: &FSet) -> SimRelation {
    let w = weak_steps(l, f);
    largest_with(l, f, &w)
}

fn largest_with(l: &Lts, f: &FSet, w: &WeakStepTable) -> SimRelation {
    let stable: Vec<StateId> = l.states().filter(|s| l.is_stable(*s)).collect();
    let all = stable
        .iter()
        .flat_map(|p| stable.iter().map(move |q| (*p, *q)));
    let g = Game::solve(l, f, w, all, false);
    SimRelation { pairs: g.alive }
}

/// Everything needed to answer refinement questions over a set of roots.
#[derive(Clone, Debug)]
pub struct Analysis {
    lts: Lts,
    f: FSet,
    weak: WeakStepTable,
}

impl Analysis {
    pub fn new(roots: &[Term], limit: ExplorationLimit) -> Result<Self, ConsistencyError> {
        let lts = explore(roots, limit);
        let f = compute_f(&lts)?;
        let weak = weak_steps(&lts, &f);
        Ok(Analysis { lts, f, weak })
    }

    pub fn lts(&self) -> &Lts {
        &self.lts
    }

    pub fn f(&self) -> &FSet {
        &self.f
    }

    pub fn weak(&self) -> &WeakStepTable {
        &self.weak
    }

    pub fn root(&self, i: usize) -> StateId {
        self.lts.roots()[i]
    }

    pub fn is_consistent(&self, s: StateId) -> bool {
        !self.f.contains(s)
    }

    /// `p ⊑_RS q`.
    pub fn leq(&self, p: StateId, q: StateId) -> Verdict {
        let lhs = self.weak.eps_stable_f(p);
        let rhs = self.weak.eps_stable_f(q);
        if lhs.is_empty() {
            return Verdict::Holds;
        }
        let g = Game::solve(
            &self.lts,
            &self.f,
            &self.weak,
            lhs.iter().flat_map(|a| rhs.iter().map(move |b| (*a, *b))),
            true,
        );
        let term = |s: StateId| self.lts.term(s).clone();
        for &p2 in lhs {
            if rhs.iter().any(|q2| g.alive.contains(&(p2, *q2))) {
                continue;
            }
            let mut steps = Vec::new();
            match g.best_answer(p2, rhs) {
                None => {
                    steps.push(TraceStep::Stabilize {
                        lhs: term(p2),
                        rhs: None,
                    });
                    steps.push(TraceStep::Clause {
                        clause: Clause::Stabilization,
                        detail: format!("{} has no F-avoiding stable derivative", pretty(&term(q))),
                    });
                }
                Some(q2) => {
                    steps.push(TraceStep::Stabilize {
                        lhs: term(p2),
                        rhs: Some(term(q2)),
                    });
                    g.trace((p2, q2), &mut steps);
                }
            }
            return Verdict::Fails(Witness::Trace(steps));
        }
        Verdict::Holds
    }

    /// `p =_RS q`; a failure names the direction that breaks.
    pub fn equiv(&self, p: StateId, q: StateId) -> Verdict {
        for (x, y, dir) in [(p, q, "left below right"), (q, p, "right below left")] {
            if let Verdict::Fails(Witness::Trace(mut steps)) = self.leq(x, y) {
                steps.insert(0, TraceStep::Note(format!("direction: {dir} fails")));
                return Verdict::Fails(Witness::Trace(steps));
            }
        }
        Verdict::Holds
    }

    pub fn largest_stable_rs(&self) -> SimRelation {
        largest_with(&self.lts, &self.f, &self.weak)
    }

    /// Checks that `r` is a stable ready simulation up to ⊑_RS.
    pub fn check_upto(&self, r: &SimRelation) -> Verdict {
        check_upto_with(&self.lts, &self.f, &self.weak, r)
    }
}

/// `p ⊑_RS q`, exploring both terms jointly.
pub fn ready_sim_leq(p: &Term, q: &Term, limit: ExplorationLimit) -> Verdict {
    match Analysis::new(&[p.clone(), q.clone()], limit) {
        Ok(a) => a.leq(a.root(0), a.root(1)),
        Err(e) => Verdict::Unknown(e.to_string()),
    }
}

/// `p =_RS q`.
pub fn rs_equiv(p: &Term, q: &Term, limit: ExplorationLimit) -> Verdict {
    match Analysis::new(&[p.clone(), q.clone()], limit) {
        Ok(a) => a.equiv(a.root(0), a.root(1)),
        Err(e) => Verdict::Unknown(e.to_string()),
    }
}

pub fn check_upto(l: &Lts, f: &FSet, r: &SimRelation) -> Verdict {
    let w = weak_steps(l, f);
    check_upto_with(l, f, &w, r)
}

fn check_upto_with(l: &Lts, f: &FSet, w: &WeakStepTable, r: &SimRelation) -> Verdict {
    let s = largest_with(l, f, w);
    let up = s.compose(r).compose(&s);
    let show = |x: StateId| pretty(l.term(x));
    let fail = |clause, detail: String| {
        Verdict::Fails(Witness::Trace(vec![TraceStep::Clause { clause, detail }]))
    };
    for (p, q) in r.pairs() {
        for p2 in w.eps_stable_f(p) {
            if !w.eps_stable_f(q).iter().any(|q2| up.contains(*p2, *q2)) {
                return fail(
                    Clause::Upto1,
                    format!(
                        "pair ({}, {}): {} is unmatched",
                        show(p),
                        show(q),
                        show(*p2)
                    ),
                );
            }
        }
        if l.is_stable(p) && l.is_stable(q) {
            for (a, ps) in w.moves(p) {
                for p2 in ps {
                    if !w.act_stable_f(q, a).iter().any(|q2| up.contains(*p2, *q2)) {
                        return fail(
                            Clause::Upto2,
                            format!(
                                "pair ({}, {}): {a}-move to {} is unmatched",
                                show(p),
                                show(q),
                                show(*p2)
                            ),
                        );
                    }
                }
            }
            if !f.contains(p) && l.ready_set(p) != l.ready_set(q) {
                return fail(
                    Clause::Upto3,
                    format!(
                        "pair ({}, {}): ready sets {} vs {}",
                        show(p),
                        show(q),
                        show_ready(&l.ready_set(p)),
                        show_ready(&l.ready_set(q))
                    ),
                );
            }
        }
    }
    Verdict::Holds
}

/// Pairs of the relation violating one of RS1–RS4 with respect to the relation itself.
pub fn simulation_violations(l: &Lts, f: &FSet, r: &SimRelation) -> Vec<(StateId, StateId)> {
    let w = weak_steps(l, f);
    r.pairs()
        .filter(|&(p, q)| {
            !l.is_stable(p)
                || !l.is_stable(q)
                || (!f.contains(p) && f.contains(q))
                || (!f.contains(p) && l.ready_set(p) != l.ready_set(q))
                || w.moves(p).iter().any(|(a, ps)| {
                    ps.iter()
                        .any(|p2| !w.act_stable_f(q, a).iter().any(|q2| r.contains(*p2, *q2)))
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn leq(p: &str, q: &str) -> Verdict {
        ready_sim_leq(&t(p), &t(q), ExplorationLimit::default())
    }

    #[test]
    fn basic_refinements() {
        assert!(leq("a.0", "a.0").holds());
        assert!(leq("bot", "a.0").holds());
        assert!(leq("a.0 \\/ b.0", "a.0").fails());
        assert!(leq("a.0", "a.0 \\/ b.0").holds());
        assert!(leq("a.0", "tau.a.0").holds());
        assert!(leq("tau.a.0", "a.0").holds());
        assert!(leq("a.0 /\\ a.b.0", "a.0").holds());
        assert!(leq("a.0", "bot").fails());
    }

    #[test]
    fn ready_set_mismatch_is_reported() {
        match leq("a.0", "a.0 [] b.0") {
            Verdict::Fails(Witness::Trace(steps)) => {
                assert!(matches!(
                    steps.last(),
                    Some(TraceStep::Clause {
                        clause: Clause::Rs4,
                        ..
                    })
                ));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deep_trace_follows_moves() {
        match leq("a.b.0", "a.c.0") {
            Verdict::Fails(Witness::Trace(steps)) => {
                assert_eq!(steps.len(), 3, "{steps:?}");
                assert!(matches!(steps[1], TraceStep::Move { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equivalence_examples() {
        let lim = ExplorationLimit::default();
        assert!(rs_equiv(&t("rec X { X = a.X }"), &t("a.rec X { X = a.X }"), lim).holds());
        assert!(rs_equiv(&t("a.0 \\/ a.0"), &t("a.0"), lim).holds());
        assert!(rs_equiv(&t("rec X { X = a.X }"), &t("rec X { X = b.X }"), lim).fails());
    }

    #[test]
    fn largest_relation_is_a_simulation_and_maximal() {
        let a = Analysis::new(
            &[
                t("(a.0 \\/ b.0) /\\ a.c.0"),
                t("a.(c.0 [] bot) \\/ tau.b.0"),
            ],
            ExplorationLimit::default(),
        )
        .unwrap();
        let s = a.largest_stable_rs();
        assert!(simulation_violations(a.lts(), a.f(), &s).is_empty());
        let stable: Vec<_> = a.lts().states().filter(|x| a.lts().is_stable(*x)).collect();
        for p in &stable {
            for q in &stable {
                if s.contains(*p, *q) {
                    continue;
                }
                let mut bigger = s.clone();
                bigger.pairs.insert((*p, *q));
                assert!(!simulation_violations(a.lts(), a.f(), &bigger).is_empty());
            }
        }
    }

    #[test]
    fn upto_check() {
        let a = Analysis::new(
            &[
                t("rec X { X = a.X }"),
                t("rec Y { Y = a.Y } /\\ a.rec X { X = a.X }"),
            ],
            ExplorationLimit::default(),
        )
        .unwrap();
        let (p, q) = (a.root(0), a.root(1));
        let r = SimRelation::new([(p, q), (q, p)]);
        assert!(a.check_upto(&r).holds());
        let bad = Analysis::new(&[t("a.0"), t("b.0")], ExplorationLimit::default()).unwrap();
        let r = SimRelation::new([(bad.root(0), bad.root(1))]);
        assert!(bad.check_upto(&r).fails());
    }

    #[test]
    fn unknown_when_exploration_is_bounded() {
        let v = ready_sim_leq(
            &t("rec X { X = a.(X |[]| b.0) }"),
            &t("a.0"),
            ExplorationLimit::new(50),
        );
        assert!(v.is_unknown());
    }
}
