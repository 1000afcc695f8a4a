//! Abstract syntax of CLL_R terms.
//!
//! Terms are immutable and cheap to clone: every child is behind an [`Arc`].
//! Recursive specifications are validated on construction, so any
//! [`Term::Rec`] value in circulation is guarded and has its initial
//! variable among its equations.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Identifiers for actions and variables.
pub type Name = Arc<str>;

/// Visible synchronisation set of a parallel composition.
pub type SyncSet = BTreeSet<Name>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Tau,
    Visible(Name),
}

impl Action {
    /// Builds a visible action, rejecting empty names and the reserved `tau`.
    pub fn visible(name: &str) -> Result<Action, TermError> {
        if !is_action_name(name) {
            return Err(TermError::BadActionName(name.to_string()));
        }
        Ok(Action::Visible(Arc::from(name)))
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }

    pub fn name(&self) -> &str {
        match self {
            Action::Tau => "tau",
            Action::Visible(n) => n,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lowercase identifier that is not `tau`.
pub fn is_action_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    name != "tau" && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Uppercase identifier.
pub fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("`{0}` is not a valid action name")]
    BadActionName(String),
    #[error("`{0}` is not a valid variable name")]
    BadVariableName(String),
    #[error("initial variable {0} has no equation")]
    MissingInitial(String),
    #[error("variable {0} has more than one equation")]
    DuplicateEquation(String),
    #[error("recursive specification is unguarded: {var} occurs unguarded in the equation for {equation}")]
    Unguarded { var: String, equation: String },
    #[error("term is not a recursive specification")]
    NotRec,
}

/// A recursive specification `<Z|E>`: an initial variable and its equations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecSpec {
    initial: Name,
    equations: Vec<(Name, Term)>,
}

impl RecSpec {
    /// Validates and builds a recursive specification. Every bound variable
    /// must be (at least weakly) guarded in every equation body.
    pub fn new(initial: Name, equations: Vec<(Name, Term)>) -> Result<RecSpec, TermError> {
        let mut seen = HashSet::new();
        for (var, _) in &equations {
            if !is_variable_name(var) {
                return Err(TermError::BadVariableName(var.to_string()));
            }
            if !seen.insert(var.clone()) {
                return Err(TermError::DuplicateEquation(var.to_string()));
            }
        }
        if !seen.contains(&initial) {
            return Err(TermError::MissingInitial(initial.to_string()));
        }
        for (eq_var, body) in &equations {
            for (var, _) in &equations {
                if guardedness_of(body, var).level == GuardLevel::Unguarded {
                    return Err(TermError::Unguarded {
                        var: var.to_string(),
                        equation: eq_var.to_string(),
                    });
                }
            }
        }
        Ok(RecSpec { initial, equations })
    }

    pub fn initial(&self) -> &Name {
        &self.initial
    }

    pub fn equations(&self) -> &[(Name, Term)] {
        &self.equations
    }

    pub fn body(&self, var: &str) -> Option<&Term> {
        self.equations
            .iter()
            .find(|(v, _)| &**v == var)
            .map(|(_, t)| t)
    }

    pub fn binds(&self, var: &str) -> bool {
        self.equations.iter().any(|(v, _)| &**v == var)
    }

    /// Same equations, different initial variable. `var` must be bound here.
    fn with_initial(&self, var: &Name) -> RecSpec {
        debug_assert!(self.binds(var));
        RecSpec {
            initial: var.clone(),
            equations: self.equations.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Stop,
    Bottom,
    Prefix(Action, Arc<Term>),
    ExtChoice(Arc<Term>, Arc<Term>),
    Conj(Arc<Term>, Arc<Term>),
    Disj(Arc<Term>, Arc<Term>),
    Par(SyncSet, Arc<Term>, Arc<Term>),
    Var(Name),
    Rec(Arc<RecSpec>),
}

impl Term {
    pub fn prefix(action: Action, body: Term) -> Term {
        Term::Prefix(action, Arc::new(body))
    }

    /// `a.body`; panics on an invalid action name.
    pub fn act(name: &str, body: Term) -> Term {
        Term::prefix(Action::visible(name).expect("valid action name"), body)
    }

    pub fn tau(body: Term) -> Term {
        Term::prefix(Action::Tau, body)
    }

    pub fn choice(left: Term, right: Term) -> Term {
        Term::ExtChoice(Arc::new(left), Arc::new(right))
    }

    pub fn conj(left: Term, right: Term) -> Term {
        Term::Conj(Arc::new(left), Arc::new(right))
    }

    pub fn disj(left: Term, right: Term) -> Term {
        Term::Disj(Arc::new(left), Arc::new(right))
    }

    pub fn par<I, S>(sync: I, left: Term, right: Term) -> Term
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let sync = sync.into_iter().map(|s| Arc::from(s.as_ref())).collect();
        Term::Par(sync, Arc::new(left), Arc::new(right))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn rec(initial: &str, equations: Vec<(&str, Term)>) -> Result<Term, TermError> {
        let equations = equations
            .into_iter()
            .map(|(v, t)| (Arc::from(v), t))
            .collect();
        Ok(Term::Rec(Arc::new(RecSpec::new(
            Arc::from(initial),
            equations,
        )?)))
    }

    /// `<X|X=body>`.
    pub fn rec1(var: &str, body: Term) -> Result<Term, TermError> {
        Term::rec(var, vec![(var, body)])
    }

    pub fn is_closed(&self) -> bool {
        free_vars(self).is_empty()
    }

    /// Height of the syntax tree; equation bodies count one level below their `rec`.
    pub fn depth(&self) -> usize {
        match self {
            Term::Stop | Term::Bottom | Term::Var(_) => 1,
            Term::Prefix(_, t) => 1 + t.depth(),
            Term::ExtChoice(l, r) | Term::Conj(l, r) | Term::Disj(l, r) | Term::Par(_, l, r) => {
                1 + l.depth().max(r.depth())
            }
            Term::Rec(spec) => {
                1 + spec
                    .equations
                    .iter()
                    .map(|(_, t)| t.depth())
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Stop | Term::Bottom | Term::Var(_) => 1,
            Term::Prefix(_, t) => 1 + t.size(),
            Term::ExtChoice(l, r) | Term::Conj(l, r) | Term::Disj(l, r) | Term::Par(_, l, r) => {
                1 + l.size() + r.size()
            }
            Term::Rec(spec) => 1 + spec.equations.iter().map(|(_, t)| t.size()).sum::<usize>(),
        }
    }

    /// Whether the term has at most `cap` nodes and depth at most `max_depth`.
    /// Stops counting as soon as either bound is exceeded.
    pub fn fits(&self, cap: usize, max_depth: usize) -> bool {
        let mut budget = cap;
        let mut stack = vec![(self, 1usize)];
        while let Some((t, d)) = stack.pop() {
            if budget == 0 || d > max_depth {
                return false;
            }
            budget -= 1;
            match t {
                Term::Stop | Term::Bottom | Term::Var(_) => {}
                Term::Prefix(_, b) => stack.push((b, d + 1)),
                Term::ExtChoice(l, r)
                | Term::Conj(l, r)
                | Term::Disj(l, r)
                | Term::Par(_, l, r) => {
                    stack.push((l, d + 1));
                    stack.push((r, d + 1));
                }
                Term::Rec(spec) => stack.extend(spec.equations.iter().map(|(_, b)| (b, d + 1))),
            }
        }
        true
    }

    /// Visible action names occurring in prefixes and sync sets.
    pub fn alphabet(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        collect_alphabet(self, &mut out);
        out
    }
}

fn collect_alphabet(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Stop | Term::Bottom | Term::Var(_) => {}
        Term::Prefix(a, body) => {
            if let Action::Visible(n) = a {
                out.insert(n.clone());
            }
            collect_alphabet(body, out);
        }
        Term::ExtChoice(l, r) | Term::Conj(l, r) | Term::Disj(l, r) => {
            collect_alphabet(l, out);
            collect_alphabet(r, out);
        }
        Term::Par(sync, l, r) => {
            out.extend(sync.iter().cloned());
            collect_alphabet(l, out);
            collect_alphabet(r, out);
        }
        Term::Rec(spec) => {
            for (_, body) in &spec.equations {
                collect_alphabet(body, out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Free variables

pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    collect_free(t, &mut bound, &mut out);
    out
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Stop | Term::Bottom => {}
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Prefix(_, body) => collect_free(body, bound, out),
        Term::ExtChoice(l, r) | Term::Conj(l, r) | Term::Disj(l, r) | Term::Par(_, l, r) => {
            collect_free(l, bound, out);
            collect_free(r, bound, out);
        }
        Term::Rec(spec) => {
            let mark = bound.len();
            bound.extend(spec.equations.iter().map(|(v, _)| v.clone()));
            for (_, body) in &spec.equations {
                collect_free(body, bound, out);
            }
            bound.truncate(mark);
        }
    }
}

/// Every variable name appearing anywhere in `t`, bound or free.
fn all_names(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Stop | Term::Bottom => {}
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Prefix(_, body) => all_names(body, out),
        Term::ExtChoice(l, r) | Term::Conj(l, r) | Term::Disj(l, r) | Term::Par(_, l, r) => {
            all_names(l, out);
            all_names(r, out);
        }
        Term::Rec(spec) => {
            for (v, body) in &spec.equations {
                out.insert(v.clone());
                all_names(body, out);
            }
        }
    }
}

/// Free variables in order of first (left-to-right) free occurrence.
fn free_vars_ordered(t: &Term) -> Vec<Name> {
    let mut out = Vec::new();
    let mut bound = Vec::new();
    ordered_free(t, &mut bound, &mut out);
    out
}

fn ordered_free(t: &Term, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
    match t {
        Term::Stop | Term::Bottom => {}
        Term::Var(x) => {
            if !bound.contains(x) && !out.contains(x) {
                out.push(x.clone());
            }
        }
        Term::Prefix(_, body) => ordered_free(body, bound, out),
        Term::ExtChoice(l, r) | Term::Conj(l, r) | Term::Disj(l, r) | Term::Par(_, l, r) => {
            ordered_free(l, bound, out);
            ordered_free(r, bound, out);
        }
        Term::Rec(spec) => {
            let mark = bound.len();
            bound.extend(spec.equations.iter().map(|(v, _)| v.clone()));
            for (_, body) in &spec.equations {
                ordered_free(body, bound, out);
            }
            bound.truncate(mark);
        }
    }
}

// ---------------------------------------------------------------------------
// Substitution

/// Capture-avoiding simultaneous substitution. Keys that are not free in `t`
/// are ignored.
pub fn substitute(t: &Term, binding: &BTreeMap<Name, Term>) -> Term {
    if binding.is_empty() {
        return t.clone();
    }
    let mut avoid = BTreeSet::new();
    for (k, v) in binding {
        avoid.insert(k.clone());
        avoid.extend(free_vars(v));
    }
    subst(t, binding, &avoid)
}

/// `t{u/x}`.
pub fn substitute_one(t: &Term, x: &str, u: &Term) -> Term {
    let mut binding = BTreeMap::new();
    binding.insert(Arc::from(x), u.clone());
    substitute(t, &binding)
}

fn subst(t: &Term, binding: &BTreeMap<Name, Term>, avoid: &BTreeSet<Name>) -> Term {
    match t {
        Term::Stop | Term::Bottom => t.clone(),
        Term::Var(x) => binding.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Prefix(a, body) => Term::Prefix(a.clone(), Arc::new(subst(body, binding, avoid))),
        Term::ExtChoice(l, r) => Term::ExtChoice(
            Arc::new(subst(l, binding, avoid)),
            Arc::new(subst(r, binding, avoid)),
        ),
        Term::Conj(l, r) => Term::Conj(
            Arc::new(subst(l, binding, avoid)),
            Arc::new(subst(r, binding, avoid)),
        ),
        Term::Disj(l, r) => Term::Disj(
            Arc::new(subst(l, binding, avoid)),
            Arc::new(subst(r, binding, avoid)),
        ),
        Term::Par(sync, l, r) => Term::Par(
            sync.clone(),
            Arc::new(subst(l, binding, avoid)),
            Arc::new(subst(r, binding, avoid)),
        ),
        Term::Rec(spec) => {
            let inner: BTreeMap<Name, Term> = binding
                .iter()
                .filter(|(k, _)| !spec.binds(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if inner.is_empty() || !free_vars(t).iter().any(|x| inner.contains_key(x)) {
                return t.clone();
            }
            let captured: BTreeSet<Name> = inner.values().flat_map(free_vars).collect();
            let mut taken: BTreeSet<Name> = avoid.clone();
            all_names(t, &mut taken);
            let mut full = inner.clone();
            let mut renaming = BTreeMap::new();
            for (v, _) in &spec.equations {
                if captured.contains(v) {
                    let fresh = fresh_name(v, &taken);
                    taken.insert(fresh.clone());
                    full.insert(v.clone(), Term::Var(fresh.clone()));
                    renaming.insert(v.clone(), fresh);
                }
            }
            let rename = |v: &Name| renaming.get(v).cloned().unwrap_or_else(|| v.clone());
            let equations = spec
                .equations
                .iter()
                .map(|(v, body)| (rename(v), subst(body, &full, &taken)))
                .collect();
            Term::Rec(Arc::new(RecSpec {
                initial: rename(&spec.initial),
                equations,
            }))
        }
    }
}

fn fresh_name(base: &str, taken: &BTreeSet<Name>) -> Name {
    (1..)
        .map(|i| Arc::from(format!("{base}_{i}")))
        .find(|n: &Name| !taken.contains(n))
        .expect("unbounded supply of names")
}

/// `<t_Z|E>`: the body of the initial variable with every bound variable `W`
/// replaced by `<W|E>`.
pub fn unfold(r: &Term) -> Result<Term, TermError> {
    let Term::Rec(spec) = r else {
        return Err(TermError::NotRec);
    };
    Ok(unfold_spec(spec))
}

pub(crate) fn unfold_spec(spec: &RecSpec) -> Term {
    let binding: BTreeMap<Name, Term> = spec
        .equations
        .iter()
        .map(|(w, _)| (w.clone(), Term::Rec(Arc::new(spec.with_initial(w)))))
        .collect();
    let body = spec
        .body(&spec.initial)
        .expect("initial variable has an equation");
    substitute(body, &binding)
}

// ---------------------------------------------------------------------------
// Guardedness

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GuardLevel {
    Unguarded,
    WeaklyGuarded,
    StronglyGuarded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Guardedness {
    pub level: GuardLevel,
    /// Some free occurrence sits inside an operand of a conjunction.
    pub in_conjunction_scope: bool,
}

impl Guardedness {
    pub fn is_strong(&self) -> bool {
        self.level == GuardLevel::StronglyGuarded
    }

    pub fn is_guarded(&self) -> bool {
        self.level != GuardLevel::Unguarded
    }
}

impl fmt::Display for Guardedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.level {
            GuardLevel::Unguarded => "unguarded",
            GuardLevel::WeaklyGuarded => "weakly guarded",
            GuardLevel::StronglyGuarded => "strongly guarded",
        };
        if self.in_conjunction_scope {
            write!(f, "{level}, in conjunction scope")
        } else {
            f.write_str(level)
        }
    }
}

pub fn guardedness_of(t: &Term, x: &str) -> Guardedness {
    let mut g = Guardedness {
        level: GuardLevel::StronglyGuarded,
        in_conjunction_scope: false,
    };
    walk_guard(t, x, GuardLevel::Unguarded, false, &mut g);
    g
}

// `under` is the strongest guard on the path from the root to `t`.
fn walk_guard(t: &Term, x: &str, under: GuardLevel, in_conj: bool, acc: &mut Guardedness) {
    match t {
        Term::Stop | Term::Bottom => {}
        Term::Var(v) => {
            if &**v == x {
                acc.level = acc.level.min(under);
                acc.in_conjunction_scope |= in_conj;
            }
        }
        Term::Prefix(a, body) => {
            let here = if a.is_tau() {
                under.max(GuardLevel::WeaklyGuarded)
            } else {
                GuardLevel::StronglyGuarded
            };
            walk_guard(body, x, here, in_conj, acc);
        }
        Term::Disj(l, r) => {
            let here = under.max(GuardLevel::WeaklyGuarded);
            walk_guard(l, x, here, in_conj, acc);
            walk_guard(r, x, here, in_conj, acc);
        }
        Term::Conj(l, r) => {
            walk_guard(l, x, under, true, acc);
            walk_guard(r, x, under, true, acc);
        }
        Term::ExtChoice(l, r) | Term::Par(_, l, r) => {
            walk_guard(l, x, under, in_conj, acc);
            walk_guard(r, x, under, in_conj, acc);
        }
        Term::Rec(spec) => {
            if spec.binds(x) {
                return;
            }
            for (_, body) in &spec.equations {
                walk_guard(body, x, under, in_conj, acc);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical forms

/// α-canonical form. Bound variables get level-indexed names, and equations
/// unreachable from the initial variable are dropped. Equations are ordered
/// by breadth-first discovery from the initial variable.
pub fn canonicalize(t: &Term) -> Term {
    let free = free_vars(t);
    let prefix = canonical_prefix(&free);
    let mut env = Vec::new();
    canon(t, &prefix, 0, &mut env)
}

pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    t == u || canonicalize(t) == canonicalize(u)
}

fn canonical_prefix(free: &BTreeSet<Name>) -> String {
    let mut prefix = String::from("R");
    loop {
        let clash = free.iter().any(|v| {
            v.strip_prefix(prefix.as_str())
                .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
        });
        if !clash {
            return prefix;
        }
        prefix.push('R');
    }
}

fn canon(t: &Term, prefix: &str, level: usize, env: &mut Vec<(Name, Name)>) -> Term {
    match t {
        Term::Stop | Term::Bottom => t.clone(),
        Term::Var(x) => match env.iter().rev().find(|(old, _)| old == x) {
            Some((_, new)) => Term::Var(new.clone()),
            None => t.clone(),
        },
        Term::Prefix(a, body) => Term::Prefix(a.clone(), Arc::new(canon(body, prefix, level, env))),
        Term::ExtChoice(l, r) => Term::ExtChoice(
            Arc::new(canon(l, prefix, level, env)),
            Arc::new(canon(r, prefix, level, env)),
        ),
        Term::Conj(l, r) => Term::Conj(
            Arc::new(canon(l, prefix, level, env)),
            Arc::new(canon(r, prefix, level, env)),
        ),
        Term::Disj(l, r) => Term::Disj(
            Arc::new(canon(l, prefix, level, env)),
            Arc::new(canon(r, prefix, level, env)),
        ),
        Term::Par(sync, l, r) => Term::Par(
            sync.clone(),
            Arc::new(canon(l, prefix, level, env)),
            Arc::new(canon(r, prefix, level, env)),
        ),
        Term::Rec(spec) => {
            let order = reachable_equations(spec);
            let mark = env.len();
            for (i, v) in order.iter().enumerate() {
                env.push((v.clone(), Arc::from(format!("{prefix}{}", level + i))));
            }
            let inner_level = level + order.len();
            let equations: Vec<(Name, Term)> = order
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let body = spec.body(v).expect("reachable variable has an equation");
                    let new_name = env[mark + i].1.clone();
                    (new_name, canon(body, prefix, inner_level, env))
                })
                .collect();
            env.truncate(mark);
            let initial = equations[0].0.clone();
            Term::Rec(Arc::new(RecSpec { initial, equations }))
        }
    }
}

/// Bound variables reachable from the initial one, in discovery order.
fn reachable_equations(spec: &RecSpec) -> Vec<Name> {
    let mut order = vec![spec.initial.clone()];
    let mut queue = VecDeque::from([spec.initial.clone()]);
    while let Some(v) = queue.pop_front() {
        let body = spec.body(&v).expect("bound variable has an equation");
        for w in free_vars_ordered(body) {
            if spec.binds(&w) && !order.contains(&w) {
                order.push(w.clone());
                queue.push_back(w);
            }
        }
    }
    order
}

// ---------------------------------------------------------------------------
// Conjunction normal form used for state identity

/// Re-associates nested conjunctions to the left and drops repeated
/// conjuncts that are closed *linear* terms (built from `0`, `bot`, visible
/// prefixes and recursion only). A linear term `x` is deterministic and
/// τ-free, so `x /\ x` and `x` have matching transitions and inconsistency.
/// Expects an α-canonical input and returns an α-canonical output.
pub fn reduce_conjunctions(t: &Term) -> Term {
    match t {
        Term::Stop | Term::Bottom | Term::Var(_) => t.clone(),
        Term::Prefix(a, body) => Term::Prefix(a.clone(), Arc::new(reduce_conjunctions(body))),
        Term::ExtChoice(l, r) => Term::ExtChoice(
            Arc::new(reduce_conjunctions(l)),
            Arc::new(reduce_conjunctions(r)),
        ),
        Term::Disj(l, r) => Term::Disj(
            Arc::new(reduce_conjunctions(l)),
            Arc::new(reduce_conjunctions(r)),
        ),
        Term::Par(sync, l, r) => Term::Par(
            sync.clone(),
            Arc::new(reduce_conjunctions(l)),
            Arc::new(reduce_conjunctions(r)),
        ),
        Term::Rec(spec) => Term::Rec(Arc::new(RecSpec {
            initial: spec.initial.clone(),
            equations: spec
                .equations
                .iter()
                .map(|(v, b)| (v.clone(), reduce_conjunctions(b)))
                .collect(),
        })),
        Term::Conj(..) => {
            let mut operands = Vec::new();
            flatten_conj(t, &mut operands);
            let mut kept: Vec<Term> = Vec::with_capacity(operands.len());
            for op in operands {
                let op = reduce_conjunctions(&op);
                if is_linear(&op) && op.is_closed() && kept.contains(&op) {
                    continue;
                }
                kept.push(op);
            }
            let mut iter = kept.into_iter();
            let first = iter.next().expect("conjunction has operands");
            iter.fold(first, Term::conj)
        }
    }
}

fn flatten_conj(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::Conj(l, r) => {
            flatten_conj(l, out);
            flatten_conj(r, out);
        }
        other => out.push(other.clone()),
    }
}

fn is_linear(t: &Term) -> bool {
    match t {
        Term::Stop | Term::Bottom | Term::Var(_) => true,
        Term::Prefix(Action::Visible(_), body) => is_linear(body),
        Term::Rec(spec) => spec.equations.iter().all(|(_, b)| is_linear(b)),
        _ => false,
    }
}
