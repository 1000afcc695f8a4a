//! Single-variable process equations `X =_RS t_X`.

use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::refinement::Analysis;
use crate::sos::ExplorationLimit;
use crate::syntax::pretty;
use crate::term::{
    canonicalize, free_vars, guardedness_of, substitute_one, GuardLevel, Guardedness, Name, Term,
    TermError,
};
use crate::verdict::{Verdict, Witness};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EquationError {
    #[error("body has free variable `{0}` besides the equation variable")]
    ExtraFreeVariable(Name),
    #[error("candidate `{0}` is not closed")]
    OpenCandidate(String),
    #[error("`{var}` is {level} in the body; {needed}")]
    Hypothesis {
        var: Name,
        level: Guardedness,
        needed: &'static str,
    },
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationProblem {
    var: Name,
    body: Term,
    guard: Guardedness,
}

impl EquationProblem {
    pub fn new(var: &str, body: Term) -> Result<Self, EquationError> {
        if let Some(extra) = free_vars(&body).into_iter().find(|v| &**v != var) {
            return Err(EquationError::ExtraFreeVariable(extra));
        }
        let guard = guardedness_of(&body, var);
        Ok(EquationProblem {
            var: Name::from(var),
            body,
            guard,
        })
    }

    pub fn var(&self) -> &Name {
        &self.var
    }

    pub fn body(&self) -> &Term {
        &self.body
    }

    pub fn guard(&self) -> Guardedness {
        self.guard
    }

    /// `t_X{p/X}`.
    pub fn apply(&self, p: &Term) -> Term {
        substitute_one(&self.body, &self.var, p)
    }
}

/// `⟨X|X=t_X⟩`.
pub fn rec_solution(e: &EquationProblem) -> Result<Term, EquationError> {
    let r = Term::rec1(&e.var, e.body.clone())?;
    Ok(canonicalize(&r))
}

fn require_closed(p: &Term) -> Result<(), EquationError> {
    if p.is_closed() {
        Ok(())
    } else {
        Err(EquationError::OpenCandidate(pretty(p)))
    }
}

fn unknown(e: impl fmt::Display) -> Verdict {
    Verdict::Unknown(e.to_string())
}

/// `p =_RS t_X{p/X}`.
pub fn check_solution(e: &EquationProblem, p: &Term, limit: ExplorationLimit) -> Verdict {
    solution_with_states(e, p, limit).0
}

fn solution_with_states(
    e: &EquationProblem,
    p: &Term,
    limit: ExplorationLimit,
) -> (Verdict, usize) {
    match Analysis::new(&[p.clone(), e.apply(p)], limit) {
        Ok(a) => (a.equiv(a.root(0), a.root(1)), a.lts().len()),
        Err(err) => (unknown(&err), err.states()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionReport {
    pub candidate: Term,
    pub is_consistent: Verdict,
    pub is_solution: Verdict,
    /// `p ⊑_RS t_X{p/X}`, the hypothesis of the greatest-solution lemma.
    pub is_sub_solution: Verdict,
    pub leq_rec_solution: Verdict,
    pub notes: Vec<String>,
    pub theorem_violation: bool,
    /// Largest graph built for this candidate.
    pub states: usize,
}

impl SolutionReport {
    /// Overall outcome of the theorem instance for this candidate.
    pub fn verdict(&self) -> Verdict {
        if self.theorem_violation {
            return Verdict::Fails(Witness::Note(self.notes.join("; ")));
        }
        let hypothesis = self.is_sub_solution.holds() || self.is_solution.holds();
        if hypothesis {
            return match &self.leq_rec_solution {
                Verdict::Unknown(w) => Verdict::Unknown(w.clone()),
                _ => Verdict::Holds,
            };
        }
        if self.is_sub_solution.is_unknown() {
            return self.is_sub_solution.clone();
        }
        Verdict::Holds
    }

    pub fn to_record(&self) -> serde_json::Value {
        json!({
            "candidate": pretty(&self.candidate),
            "consistent": self.is_consistent.label(),
            "solution": self.is_solution.label(),
            "sub_solution": self.is_sub_solution.label(),
            "leq_rec_solution": self.leq_rec_solution.label(),
            "theorem_violation": self.theorem_violation,
            "notes": self.notes,
            "states": self.states,
        })
    }
}

impl fmt::Display for SolutionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: consistent={} solution={} sub-solution={} below-rec={}",
            pretty(&self.candidate),
            self.is_consistent.label(),
            self.is_solution.label(),
            self.is_sub_solution.label(),
            self.leq_rec_solution.label()
        )?;
        for n in &self.notes {
            write!(f, " [{n}]")?;
        }
        Ok(())
    }
}

/// Tests the greatest-solution theorem on each candidate.
pub fn check_greatest(
    e: &EquationProblem,
    candidates: &[Term],
    limit: ExplorationLimit,
) -> Result<Vec<SolutionReport>, EquationError> {
    if e.guard.level != GuardLevel::StronglyGuarded {
        return Err(EquationError::Hypothesis {
            var: e.var.clone(),
            level: e.guard,
            needed: "the greatest-solution theorem needs a strong guard",
        });
    }
    let rec = rec_solution(e)?;
    candidates
        .iter()
        .map(|p| {
            require_closed(p)?;
            Ok(greatest_one(e, p, &rec, limit))
        })
        .collect()
}

fn greatest_one(
    e: &EquationProblem,
    p: &Term,
    rec: &Term,
    limit: ExplorationLimit,
) -> SolutionReport {
    let tp = e.apply(p);
    let mut states;
    let (is_consistent, is_solution, is_sub_solution) = match Analysis::new(&[p.clone(), tp], limit)
    {
        Ok(a) => {
            states = a.lts().len();
            let (x, y) = (a.root(0), a.root(1));
            let c = if a.is_consistent(x) {
                Verdict::Holds
            } else {
                Verdict::Fails(Witness::Derivation(a.f().derivation(a.lts(), x)))
            };
            (c, a.equiv(x, y), a.leq(x, y))
        }
        Err(err) => {
            states = err.states();
            // Consistency of p alone may still be decidable.
            let c = crate::consistency::is_consistent(p, limit);
            (c, unknown(&err), unknown(&err))
        }
    };
    let leq_rec_solution = match Analysis::new(&[p.clone(), rec.clone()], limit) {
        Ok(a) => {
            states = states.max(a.lts().len());
            a.leq(a.root(0), a.root(1))
        }
        Err(err) => {
            states = states.max(err.states());
            unknown(err)
        }
    };
    let mut notes = Vec::new();
    if is_consistent.fails() {
        notes.push("candidate inconsistent".to_string());
    }
    let mut theorem_violation = false;
    if leq_rec_solution.fails() {
        if is_solution.holds() {
            theorem_violation = true;
            notes.push("theorem violation: a solution is not below the recursive solution".into());
        } else if is_sub_solution.holds() {
            theorem_violation = true;
            notes.push(
                "theorem violation: a sub-solution is not below the recursive solution".into(),
            );
        }
    }
    SolutionReport {
        candidate: p.clone(),
        is_consistent,
        is_solution,
        is_sub_solution,
        leq_rec_solution,
        notes,
        theorem_violation,
        states,
    }
}

/// Hypotheses of the unique-solution theorem.
pub fn unique_solution_applicable(e: &EquationProblem) -> bool {
    e.guard.level == GuardLevel::StronglyGuarded && !e.guard.in_conjunction_scope
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniqueReport {
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub states: usize,
}

/// If `p` and `q` are both consistent solutions, they must be `=_RS`.
pub fn check_unique(
    e: &EquationProblem,
    p: &Term,
    q: &Term,
    limit: ExplorationLimit,
) -> Result<UniqueReport, EquationError> {
    if !unique_solution_applicable(e) {
        return Err(EquationError::Hypothesis {
            var: e.var.clone(),
            level: e.guard,
            needed: "the unique-solution theorem needs a strong guard outside any conjunction",
        });
    }
    require_closed(p)?;
    require_closed(q)?;
    let mut notes = Vec::new();
    let mut states = 0;
    for (name, c) in [("first", p), ("second", q)] {
        let a = match Analysis::new(&[c.clone(), e.apply(c)], limit) {
            Ok(a) => a,
            Err(err) => {
                return Ok(UniqueReport {
                    verdict: unknown(&err),
                    notes,
                    states: err.states(),
                })
            }
        };
        states = states.max(a.lts().len());
        if !a.is_consistent(a.root(0)) {
            notes.push(format!("{name} candidate inconsistent"));
            return Ok(UniqueReport {
                verdict: Verdict::Holds,
                notes,
                states,
            });
        }
        match a.equiv(a.root(0), a.root(1)) {
            Verdict::Holds => {}
            Verdict::Fails(_) => {
                notes.push(format!("{name} candidate is not a solution"));
                return Ok(UniqueReport {
                    verdict: Verdict::Holds,
                    notes,
                    states,
                });
            }
            v @ Verdict::Unknown(_) => {
                return Ok(UniqueReport {
                    verdict: v,
                    notes,
                    states,
                })
            }
        }
    }
    let verdict = match Analysis::new(&[p.clone(), q.clone()], limit) {
        Ok(a) => {
            states = states.max(a.lts().len());
            a.equiv(a.root(0), a.root(1))
        }
        Err(err) => unknown(err),
    };
    if verdict.fails() {
        notes.push("theorem violation: two consistent solutions differ".into());
    }
    Ok(UniqueReport {
        verdict,
        notes,
        states,
    })
}
