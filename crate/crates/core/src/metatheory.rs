//! Randomised property suites over generated terms: the LLTS conditions,
//! preorder laws, precongruence and the context decomposition lemmas.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::consistency::{
    backward_tau_violations, compute_f_masked, lts1_violations, lts2_violations,
    tau_path_violations, well_foundedness_violations, RuleMask,
};
use crate::generate::{rng, HoleGuard, TermGen, TermRng};
use crate::refinement::Analysis;
use crate::sos::{explore, tau_purity_violations, transitions, ExplorationLimit};
use crate::syntax::pretty;
use crate::term::{canonicalize, guardedness_of, substitute_one, Action, GuardLevel, Term};
use crate::verdict::Verdict;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub depth: usize,
    /// Cases that must be decided; undecided samples are skipped and redrawn.
    pub cases: usize,
    pub limit: ExplorationLimit,
    pub mask: RuleMask,
}

impl SuiteConfig {
    pub fn new(seed: u64, depth: usize, cases: usize) -> Self {
        SuiteConfig {
            seed,
            depth,
            cases,
            limit: ExplorationLimit {
                max_states: 1000,
                max_term_size: 300,
                max_term_depth: 64,
                ..ExplorationLimit::default()
            },
            mask: RuleMask::default(),
        }
    }

    fn attempts(&self) -> usize {
        self.cases * 20
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub skipped: usize,
    pub violations: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, msg: String) {
        if self.violations.len() < 20 {
            self.violations.push(msg);
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} cases, {} skipped, {} violations)",
            self.name,
            if self.passed() { "ok" } else { "FAILED" },
            self.cases,
            self.skipped,
            self.violations.len()
        )?;
        for v in &self.violations {
            write!(f, "\n  counterexample: {v}")?;
        }
        Ok(())
    }
}

pub fn all_suites(cfg: &SuiteConfig) -> Vec<SuiteReport> {
    vec![
        llts_axioms(cfg),
        conjunction_symmetry(cfg),
        preorder_laws(cfg),
        equivalence_laws(cfg),
        precongruence(cfg),
        context_lemmas(cfg),
    ]
}

/// LTS1, LTS2, τ-purity and the derived F properties on complete graphs.
pub fn llts_axioms(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("llts-axioms");
    let mut r = rng(cfg.seed);
    let g = TermGen::default();
    for _ in 0..cfg.attempts() {
        if rep.cases >= cfg.cases {
            break;
        }
        let t = g.closed(&mut r, cfg.depth);
        let l = explore(std::slice::from_ref(&t), cfg.limit);
        let Ok(f) = compute_f_masked(&l, &cfg.mask) else {
            rep.skipped += 1;
            continue;
        };
        rep.cases += 1;
        let src = pretty(&t);
        let show = |s| pretty(l.term(s));
        for s in lts1_violations(&l, &f) {
            rep.violation(format!("LTS1 at {} in {src}", show(s)));
        }
        for s in lts2_violations(&l, &f) {
            rep.violation(format!("LTS2 at {} in {src}", show(s)));
        }
        for s in tau_purity_violations(&l) {
            rep.violation(format!("tau-purity at {} in {src}", show(s)));
        }
        for s in backward_tau_violations(&l, &f) {
            rep.violation(format!("backward tau propagation at {} in {src}", show(s)));
        }
        for (p, q) in tau_path_violations(&l, &f) {
            rep.violation(format!(
                "no F-avoiding tau-path {} => {} in {src}",
                show(p),
                show(q)
            ));
        }
        for s in well_foundedness_violations(&f) {
            rep.violation(format!("ill-founded derivation at {} in {src}", show(s)));
        }
    }
    rep
}

/// F-membership of `l ∧ r` and `l □ r` does not depend on operand order.
pub fn conjunction_symmetry(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("operand-symmetry");
    let mut r = rng(cfg.seed ^ 0x5a5a);
    let g = TermGen::default();
    for _ in 0..cfg.attempts() {
        if rep.cases >= cfg.cases {
            break;
        }
        let x = g.closed(&mut r, cfg.depth.saturating_sub(1).max(1));
        let y = g.closed(&mut r, cfg.depth.saturating_sub(1).max(1));
        let pairs = [
            (
                Term::conj(x.clone(), y.clone()),
                Term::conj(y.clone(), x.clone()),
            ),
            (
                Term::choice(x.clone(), y.clone()),
                Term::choice(y.clone(), x.clone()),
            ),
        ];
        let roots: Vec<Term> = pairs
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect();
        let l = explore(&roots, cfg.limit);
        let Ok(f) = compute_f_masked(&l, &cfg.mask) else {
            rep.skipped += 1;
            continue;
        };
        rep.cases += 1;
        for (i, (a, b)) in pairs.iter().enumerate() {
            let (sa, sb) = (l.roots()[2 * i], l.roots()[2 * i + 1]);
            if f.contains(sa) != f.contains(sb) {
                rep.violation(format!("F differs for {} and {}", pretty(a), pretty(b)));
            }
        }
    }
    rep
}

/// A term refining `q` by construction, or equal to it.
fn below(g: &TermGen, r: &mut TermRng, q: &Term, depth: usize) -> Term {
    match r.gen_range(0..5) {
        0 => Term::conj(q.clone(), g.closed(r, depth)),
        1 => Term::Bottom,
        2 => Term::tau(q.clone()),
        3 => g.closed(r, depth),
        _ => q.clone(),
    }
}

/// A term refined by `p` by construction, or equal to it.
fn above(g: &TermGen, r: &mut TermRng, p: &Term, depth: usize) -> Term {
    match r.gen_range(0..5) {
        0 => Term::disj(p.clone(), g.closed(r, depth)),
        1 => Term::disj(g.closed(r, depth), p.clone()),
        2 => Term::tau(p.clone()),
        3 => g.closed(r, depth),
        _ => p.clone(),
    }
}

/// Reflexivity on every explored state and transitivity along chains
/// `p ⊑ q ⊑ s` where both links were established.
pub fn preorder_laws(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("preorder-laws");
    let mut r = rng(cfg.seed ^ 0xa11ce);
    let g = TermGen::default();
    let d = cfg.depth.saturating_sub(1).max(1);
    for _ in 0..cfg.attempts() {
        if rep.cases >= cfg.cases {
            break;
        }
        let q = g.closed(&mut r, d);
        let p = below(&g, &mut r, &q, d);
        let s = above(&g, &mut r, &q, d);
        let Ok(a) = Analysis::new(&[p.clone(), q.clone(), s.clone()], cfg.limit) else {
            rep.skipped += 1;
            continue;
        };
        let (sp, sq, ss) = (a.root(0), a.root(1), a.root(2));
        for x in a.lts().states() {
            if !a.leq(x, x).holds() {
                rep.violation(format!("reflexivity fails at {}", pretty(a.lts().term(x))));
            }
        }
        if !(a.leq(sp, sq).holds() && a.leq(sq, ss).holds()) {
            rep.skipped += 1;
            continue;
        }
        rep.cases += 1;
        if !a.leq(sp, ss).holds() {
            rep.violation(format!(
                "transitivity: {} <= {} <= {} but not end to end",
                pretty(&p),
                pretty(&q),
                pretty(&s)
            ));
        }
    }
    rep
}

/// `=_RS` is symmetric and transitive; `q =_RS τ.q =_RS τ.q ∨ τ.q`.
pub fn equivalence_laws(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("equivalence-laws");
    let mut r = rng(cfg.seed ^ 0xe9);
    let g = TermGen::default();
    let d = cfg.depth.saturating_sub(1).max(1);
    for _ in 0..cfg.attempts() {
        if rep.cases >= cfg.cases {
            break;
        }
        let q = g.closed(&mut r, d);
        let e1 = Term::tau(q.clone());
        let e2 = Term::disj(e1.clone(), e1.clone());
        let other = above(&g, &mut r, &q, d);
        let Ok(b) = Analysis::new(&[q.clone(), e1, e2, other.clone()], cfg.limit) else {
            rep.skipped += 1;
            continue;
        };
        rep.cases += 1;
        let (x, y, z, w) = (b.root(0), b.root(1), b.root(2), b.root(3));
        if !b.equiv(x, y).holds() || !b.equiv(y, x).holds() {
            rep.violation(format!(
                "{} is not equivalent to its tau-prefix",
                pretty(&q)
            ));
        }
        if b.equiv(x, y).holds() && b.equiv(y, z).holds() && !b.equiv(x, z).holds() {
            rep.violation(format!("transitivity fails around {}", pretty(&q)));
        }
        let both_ways = b.leq(x, w).holds() && b.leq(w, x).holds();
        if both_ways != b.equiv(w, x).holds() || b.equiv(x, w).holds() != b.equiv(w, x).holds() {
            rep.violation(format!(
                "symmetry fails for {} and {}",
                pretty(&q),
                pretty(&other)
            ));
        }
    }
    rep
}

/// `p ⊑ q` implies `C{p} ⊑ C{q}`, and `C{p} ∉ F` implies `C{q} ∉ F`.
pub fn precongruence(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("precongruence");
    let mut r = rng(cfg.seed ^ 0xc0de);
    let g = TermGen::default();
    let d = cfg.depth.saturating_sub(1).max(1);
    for _ in 0..cfg.attempts() {
        if rep.cases >= cfg.cases {
            break;
        }
        let q = g.closed(&mut r, d);
        let p = below(&g, &mut r, &q, d);
        let c = g.context(&mut r, 3, "X", HoleGuard::Any);
        let cp = substitute_one(&c, "X", &p);
        let cq = substitute_one(&c, "X", &q);
        let Ok(a) = Analysis::new(&[p.clone(), q.clone(), cp, cq], cfg.limit) else {
            rep.skipped += 1;
            continue;
        };
        if !a.leq(a.root(0), a.root(1)).holds() {
            rep.skipped += 1;
            continue;
        }
        rep.cases += 1;
        let (x, y) = (a.root(2), a.root(3));
        let ctx = format!("C = {}, p = {}, q = {}", pretty(&c), pretty(&p), pretty(&q));
        if let Verdict::Fails(w) = a.leq(x, y) {
            rep.violation(format!("{ctx}: {}", w.summary()));
        }
        if a.is_consistent(x) && !a.is_consistent(y) {
            rep.violation(format!("{ctx}: consistency not preserved"));
        }
    }
    rep
}

fn canonical_moves(t: &Term) -> BTreeSet<(Action, Term)> {
    let tr = transitions(t);
    tr.tau
        .into_iter()
        .map(|u| (Action::Tau, canonicalize(&u)))
        .chain(
            tr.visible
                .into_iter()
                .map(|(a, u)| (Action::Visible(a), canonicalize(&u))),
        )
        .collect()
}

/// Transitions of `C{p}` are exactly the instances `B{p}` of the symbolic
/// transitions `C → B` when the hole is guarded; under a strong guard the
/// τ-derivatives keep the hole strongly guarded.
pub fn context_lemmas(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("context-lemmas");
    let mut r = rng(cfg.seed ^ 0x1e44a);
    let g = TermGen::default();
    let depth = cfg.depth.min(3);
    while rep.cases < cfg.cases {
        let guard = if rep.cases.is_multiple_of(2) {
            HoleGuard::Weak
        } else {
            HoleGuard::Strong
        };
        let c = g.context(&mut r, depth, "X", guard);
        let p = g.closed(&mut r, depth);
        rep.cases += 1;
        let cp = substitute_one(&c, "X", &p);
        let ctx = format!("C = {}, p = {}", pretty(&c), pretty(&p));

        let direct = canonical_moves(&cp);
        let tr = transitions(&c);
        let lifted: BTreeSet<(Action, Term)> = tr
            .tau
            .iter()
            .map(|b| (Action::Tau, b.clone()))
            .chain(
                tr.visible
                    .iter()
                    .map(|(a, b)| (Action::Visible(a.clone()), b.clone())),
            )
            .map(|(a, b)| (a, canonicalize(&substitute_one(&b, "X", &p))))
            .collect();
        if direct != lifted {
            rep.violation(format!("{ctx}: transitions do not decompose"));
        }
        if tr.is_stable() != transitions(&cp).is_stable() {
            rep.violation(format!("{ctx}: stability depends on the hole"));
        }
        if guard == HoleGuard::Strong {
            for b in &tr.tau {
                if guardedness_of(b, "X").level != GuardLevel::StronglyGuarded {
                    rep.violation(format!(
                        "{ctx}: tau-derivative {} loses the strong guard",
                        pretty(b)
                    ));
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::Rule;

    #[test]
    fn small_suites_pass() {
        let cfg = SuiteConfig::new(1, 3, 30);
        for rep in all_suites(&cfg) {
            assert!(rep.passed(), "{rep}");
            assert!(rep.cases > 0, "{rep}");
        }
    }

    #[test]
    fn dropping_a_rule_is_noticed() {
        let mut cfg = SuiteConfig::new(1, 3, 200);
        cfg.mask = RuleMask::without([Rule::Rp11]);
        assert!(!conjunction_symmetry(&cfg).passed());
    }
}
