//! Seeded random generation of closed guarded terms and one-hole contexts.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::term::{Action, Name, Term};

pub type TermRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TermRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Required guard on hole occurrences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HoleGuard {
    Any,
    Weak,
    Strong,
}

#[derive(Clone, Debug)]
pub struct TermGen {
    pub alphabet: Vec<Name>,
    /// Probability of ⊥ at a leaf.
    pub bottom_rate: f64,
}

impl Default for TermGen {
    fn default() -> Self {
        TermGen {
            alphabet: vec![Name::from("a"), Name::from("b")],
            bottom_rate: 0.15,
        }
    }
}

#[derive(Clone)]
struct Scope {
    /// Recursion variables in scope and whether the current position is guarded for them.
    recs: Vec<(Name, bool)>,
    hole: Option<(Name, HoleGuard)>,
    hole_weak: bool,
    hole_strong: bool,
}

impl Scope {
    fn guard(&mut self, strong: bool) {
        for r in &mut self.recs {
            r.1 = true;
        }
        self.hole_weak = true;
        self.hole_strong |= strong;
    }

    fn hole_allowed(&self) -> Option<&Name> {
        let (name, need) = self.hole.as_ref()?;
        let ok = match need {
            HoleGuard::Any => true,
            HoleGuard::Weak => self.hole_weak,
            HoleGuard::Strong => self.hole_strong,
        };
        ok.then_some(name)
    }
}

impl TermGen {
    /// A closed term whose recursion variables are all guarded.
    pub fn closed(&self, rng: &mut TermRng, depth: usize) -> Term {
        let mut scope = Scope {
            recs: Vec::new(),
            hole: None,
            hole_weak: false,
            hole_strong: false,
        };
        self.gen(rng, depth, &mut scope)
    }

    /// A term whose only free variable is `hole`, occurring at least once
    /// with the requested guard.
    pub fn context(&self, rng: &mut TermRng, depth: usize, hole: &str, guard: HoleGuard) -> Term {
        loop {
            let mut scope = Scope {
                recs: Vec::new(),
                hole: Some((Name::from(hole), guard)),
                hole_weak: false,
                hole_strong: false,
            };
            let t = self.gen(rng, depth, &mut scope);
            if crate::term::free_vars(&t).contains(hole) {
                return t;
            }
        }
    }

    fn leaf(&self, rng: &mut TermRng, scope: &Scope) -> Term {
        if let Some(h) = scope.hole_allowed() {
            if rng.gen_bool(0.5) {
                return Term::Var(h.clone());
            }
        }
        let guarded: Vec<&Name> = scope.recs.iter().filter(|r| r.1).map(|r| &r.0).collect();
        if !guarded.is_empty() && rng.gen_bool(0.5) {
            return Term::Var((*guarded.choose(rng).unwrap()).clone());
        }
        if rng.gen_bool(self.bottom_rate) {
            Term::Bottom
        } else {
            Term::Stop
        }
    }

    fn gen(&self, rng: &mut TermRng, depth: usize, scope: &mut Scope) -> Term {
        if depth <= 1 || rng.gen_bool(0.15) {
            return self.leaf(rng, scope);
        }
        let d = depth - 1;
        match rng.gen_range(0..12) {
            0..=3 => {
                let mut inner = scope.clone();
                if rng.gen_bool(0.2) {
                    inner.guard(false);
                    Term::tau(self.gen(rng, d, &mut inner))
                } else {
                    inner.guard(true);
                    let a = self.alphabet.choose(rng).unwrap().clone();
                    Term::prefix(Action::Visible(a), self.gen(rng, d, &mut inner))
                }
            }
            4 | 5 => Term::choice(self.gen(rng, d, scope), self.gen(rng, d, scope)),
            6 | 7 => Term::conj(self.gen(rng, d, scope), self.gen(rng, d, scope)),
            8 | 9 => {
                let mut inner = scope.clone();
                inner.guard(false);
                Term::disj(self.gen(rng, d, &mut inner), self.gen(rng, d, &mut inner))
            }
            10 => {
                let sync: Vec<Name> = self
                    .alphabet
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .cloned()
                    .collect();
                let (l, r) = (self.gen(rng, d, scope), self.gen(rng, d, scope));
                Term::Par(sync.into_iter().collect(), l.into(), r.into())
            }
            _ => {
                let var = format!("R{}", scope.recs.len());
                let mut inner = scope.clone();
                inner.recs.push((Name::from(var.as_str()), false));
                let body = self.gen(rng, d, &mut inner);
                Term::rec1(&var, body).expect("generated bodies are guarded")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{guardedness_of, GuardLevel};

    #[test]
    fn closed_terms_are_closed_and_bounded() {
        let g = TermGen::default();
        let mut r = rng(7);
        for _ in 0..500 {
            let t = g.closed(&mut r, 4);
            assert!(t.is_closed());
            assert!(t.depth() <= 4, "{t:?}");
        }
    }

    #[test]
    fn contexts_respect_guard() {
        let g = TermGen::default();
        let mut r = rng(11);
        for _ in 0..300 {
            let c = g.context(&mut r, 3, "X", HoleGuard::Strong);
            assert_eq!(guardedness_of(&c, "X").level, GuardLevel::StronglyGuarded);
            let c = g.context(&mut r, 3, "X", HoleGuard::Weak);
            assert!(guardedness_of(&c, "X").level >= GuardLevel::WeaklyGuarded);
        }
    }

    #[test]
    fn generation_is_seeded() {
        let g = TermGen::default();
        let a: Vec<Term> = (0..20)
            .map({
                let mut r = rng(3);
                move |_| g.closed(&mut r, 4)
            })
            .collect();
        let g = TermGen::default();
        let b: Vec<Term> = (0..20)
            .map({
                let mut r = rng(3);
                move |_| g.closed(&mut r, 4)
            })
            .collect();
        assert_eq!(a, b);
    }
}
