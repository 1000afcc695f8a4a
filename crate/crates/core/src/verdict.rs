//! Three-valued query results and their witnesses.

use std::fmt;

use crate::consistency::Rule;
use crate::syntax::pretty;
use crate::term::{Action, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Witness),
    /// Exploration hit its bound before the answer was determined.
    Unknown(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "HOLDS",
            Verdict::Fails(_) => "FAILS",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }

    /// Conjunction of verdicts: any `Fails` wins, then any `Unknown`.
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut unknown = None;
        for v in verdicts {
            match v {
                Verdict::Fails(_) => return v,
                Verdict::Unknown(_) if unknown.is_none() => unknown = Some(v),
                _ => {}
            }
        }
        unknown.unwrap_or(Verdict::Holds)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("HOLDS"),
            Verdict::Fails(w) => write!(f, "FAILS\n{w}"),
            Verdict::Unknown(why) => write!(f, "UNKNOWN ({why})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A well-founded derivation of `pF`, root first.
    Derivation(Vec<DerivationStep>),
    /// Alternating moves and the clause that finally breaks.
    Trace(Vec<TraceStep>),
    Note(String),
}

impl Witness {
    /// Single-line rendering for report lines.
    pub fn summary(&self) -> String {
        self.to_string().lines().collect::<Vec<_>>().join(" ; ")
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Derivation(steps) => {
                for (i, s) in steps.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
            Witness::Trace(steps) => {
                for (i, s) in steps.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
            Witness::Note(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationStep {
    pub state: Term,
    pub rule: Rule,
    /// Action witnessing a ready-set mismatch (`Rp10`/`Rp11`) or the label
    /// whose successors are all inconsistent (`Rp12`).
    pub action: Option<Action>,
    /// States whose inconsistency the rule instance relies on.
    pub premises: Vec<Term>,
}

impl fmt::Display for DerivationStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  {}", pretty(&self.state), self.rule)?;
        if let Some(a) = &self.action {
            write!(f, "({a})")?;
        }
        let premises: Vec<String> = self.premises.iter().map(pretty).collect();
        write!(f, "  [{}]", premises.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clause {
    Rs2,
    Rs3,
    Rs4,
    /// No F-avoiding stable derivative on the right to match a stable
    /// derivative on the left.
    Stabilization,
    Upto1,
    Upto2,
    Upto3,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Rs2 => "RS2",
            Clause::Rs3 => "RS3",
            Clause::Rs4 => "RS4",
            Clause::Stabilization => "stabilization",
            Clause::Upto1 => "Upto-1",
            Clause::Upto2 => "Upto-2",
            Clause::Upto3 => "Upto-3",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceStep {
    /// `p ⇒ε_F| lhs` on the left, answered by `rhs` on the right.
    Stabilize {
        lhs: Term,
        rhs: Option<Term>,
    },
    /// `⇒a_F|` move on the left, answered by `rhs` on the right.
    Move {
        action: Action,
        lhs: Term,
        rhs: Option<Term>,
    },
    Clause {
        clause: Clause,
        detail: String,
    },
    Note(String),
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let answer = |rhs: &Option<Term>| match rhs {
            Some(t) => pretty(t),
            None => "(no answer)".to_string(),
        };
        match self {
            TraceStep::Stabilize { lhs, rhs } => {
                write!(f, "move eps -> {}  vs  {}", pretty(lhs), answer(rhs))
            }
            TraceStep::Move { action, lhs, rhs } => {
                write!(f, "move {action} -> {}  vs  {}", pretty(lhs), answer(rhs))
            }
            TraceStep::Clause { clause, detail } => {
                write!(f, "clause {clause} violated: {detail}")
            }
            TraceStep::Note(n) => f.write_str(n),
        }
    }
}
