//! Script execution, report rendering, DOT export and the self-test runner
//! behind the `cllr` binary.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use cllr_core::consistency::{compute_f, FSet, Rule, RuleMask};
use cllr_core::equations::{check_greatest, check_unique, EquationProblem};
use cllr_core::metatheory::{all_suites, SuiteConfig, SuiteReport};
use cllr_core::refinement::Analysis;
use cllr_core::sos::{explore, ExplorationLimit, Lts};
use cllr_core::syntax::{pretty, Query, QueryKind, Script};
use cllr_core::term::{guardedness_of, GuardLevel, Term};
use cllr_core::verdict::{Verdict, Witness};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct CliConfig {
    pub max_states: usize,
    pub format: OutputFormat,
    pub dot_output: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Identify states only up to α-equivalence.
    pub alpha_only: bool,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            max_states: ExplorationLimit::DEFAULT_MAX_STATES,
            format: OutputFormat::Text,
            dot_output: None,
            seed: None,
            alpha_only: false,
        }
    }
}

impl CliConfig {
    pub fn limit(&self) -> ExplorationLimit {
        let l = ExplorationLimit::new(self.max_states);
        if self.alpha_only {
            l.alpha_only()
        } else {
            l
        }
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Verdict(Verdict),
    /// The query is ill-posed, e.g. a theorem hypothesis does not hold.
    Error(String),
}

#[derive(Clone, Debug)]
pub struct QueryReport {
    pub query: String,
    pub outcome: Outcome,
    /// Extra information shown after the verdict.
    pub detail: Option<String>,
    pub states: usize,
    pub millis: u128,
    pub candidates: Vec<Value>,
}

impl QueryReport {
    pub fn label(&self) -> &'static str {
        match &self.outcome {
            Outcome::Verdict(v) => v.label(),
            Outcome::Error(_) => "ERROR",
        }
    }

    fn witness_text(&self) -> Option<String> {
        match &self.outcome {
            Outcome::Verdict(Verdict::Fails(w)) => Some(w.summary()),
            Outcome::Verdict(Verdict::Unknown(why)) => Some(why.clone()),
            Outcome::Error(e) => Some(e.clone()),
            Outcome::Verdict(Verdict::Holds) => None,
        }
    }

    pub fn to_text(&self) -> String {
        let mut line = format!("[{}] {} (states {})", self.label(), self.query, self.states);
        if let Some(d) = &self.detail {
            let _ = write!(line, ": {d}");
        }
        if let Some(w) = self.witness_text() {
            let _ = write!(line, " | {w}");
        }
        line
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "query": self.query,
            "verdict": self.label(),
            "witness": self.witness_text(),
            "states": self.states,
            "millis": self.millis as u64,
        });
        if let Some(d) = &self.detail {
            v["detail"] = json!(d);
        }
        if !self.candidates.is_empty() {
            v["candidates"] = json!(self.candidates);
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub reports: Vec<QueryReport>,
    pub exit_code: i32,
}

impl RunOutcome {
    pub fn render(&self, format: OutputFormat) -> String {
        let mut out = String::new();
        for r in &self.reports {
            match format {
                OutputFormat::Text => out.push_str(&r.to_text()),
                OutputFormat::Json => out.push_str(&r.to_json().to_string()),
            }
            out.push('\n');
        }
        out
    }
}

/// Exit status for a list of reports.
pub fn exit_code(reports: &[QueryReport]) -> i32 {
    let any = |pred: fn(&Outcome) -> bool| reports.iter().any(|r| pred(&r.outcome));
    if any(|o| matches!(o, Outcome::Error(_))) {
        EXIT_USAGE
    } else if any(|o| matches!(o, Outcome::Verdict(Verdict::Fails(_)))) {
        EXIT_FAILS
    } else if any(|o| matches!(o, Outcome::Verdict(Verdict::Unknown(_)))) {
        EXIT_UNKNOWN
    } else {
        EXIT_HOLDS
    }
}

/// Runs every query of the script in order.
pub fn run(config: &CliConfig, script: &Script) -> RunOutcome {
    let reports: Vec<QueryReport> = script
        .queries
        .iter()
        .map(|q| run_query(config, q))
        .collect();
    let exit_code = exit_code(&reports);
    RunOutcome { reports, exit_code }
}

struct Partial {
    outcome: Outcome,
    detail: Option<String>,
    states: usize,
    candidates: Vec<Value>,
}

impl Partial {
    fn verdict(v: Verdict, states: usize) -> Self {
        Partial {
            outcome: Outcome::Verdict(v),
            detail: None,
            states,
            candidates: Vec::new(),
        }
    }

    fn error(e: impl ToString) -> Self {
        Partial {
            outcome: Outcome::Error(e.to_string()),
            detail: None,
            states: 0,
            candidates: Vec::new(),
        }
    }
}

fn analyse(roots: &[Term], limit: ExplorationLimit) -> Result<Analysis, Partial> {
    Analysis::new(roots, limit)
        .map_err(|e| Partial::verdict(Verdict::Unknown(e.to_string()), e.states()))
}

pub fn run_query(config: &CliConfig, q: &Query) -> QueryReport {
    let start = Instant::now();
    let limit = config.limit();
    let p = evaluate(&q.kind, limit).unwrap_or_else(|p| p);
    QueryReport {
        query: q.text.clone(),
        outcome: p.outcome,
        detail: p.detail,
        states: p.states,
        millis: start.elapsed().as_millis(),
        candidates: p.candidates,
    }
}

fn problem(var: &str, body: &Term) -> Result<EquationProblem, Partial> {
    EquationProblem::new(var, body.clone()).map_err(Partial::error)
}

fn evaluate(kind: &QueryKind, limit: ExplorationLimit) -> Result<Partial, Partial> {
    Ok(match kind {
        QueryKind::Consistent(t) => {
            let a = analyse(std::slice::from_ref(t), limit)?;
            let s = a.root(0);
            let v = if a.is_consistent(s) {
                Verdict::Holds
            } else {
                Verdict::Fails(Witness::Derivation(a.f().derivation(a.lts(), s)))
            };
            Partial::verdict(v, a.lts().len())
        }
        QueryKind::Refines(p, q) => {
            let a = analyse(&[p.clone(), q.clone()], limit)?;
            Partial::verdict(a.leq(a.root(0), a.root(1)), a.lts().len())
        }
        QueryKind::Equiv(p, q) => {
            let a = analyse(&[p.clone(), q.clone()], limit)?;
            Partial::verdict(a.equiv(a.root(0), a.root(1)), a.lts().len())
        }
        QueryKind::Solution {
            var,
            body,
            candidate,
        } => {
            let e = problem(var, body)?;
            let a = analyse(&[candidate.clone(), e.apply(candidate)], limit)?;
            Partial::verdict(a.equiv(a.root(0), a.root(1)), a.lts().len())
        }
        QueryKind::Greatest {
            var,
            body,
            candidates,
        } => {
            let e = problem(var, body)?;
            let reports = check_greatest(&e, candidates, limit).map_err(Partial::error)?;
            let verdict = Verdict::all(reports.iter().map(|r| r.verdict()));
            let detail = reports
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            Partial {
                outcome: Outcome::Verdict(verdict),
                detail: Some(detail),
                states: reports.iter().map(|r| r.states).max().unwrap_or(0),
                candidates: reports.iter().map(|r| r.to_record()).collect(),
            }
        }
        QueryKind::Unique {
            var,
            body,
            first,
            second,
        } => {
            let e = problem(var, body)?;
            let r = check_unique(&e, first, second, limit).map_err(Partial::error)?;
            Partial {
                outcome: Outcome::Verdict(r.verdict),
                detail: (!r.notes.is_empty()).then(|| r.notes.join("; ")),
                states: r.states,
                candidates: Vec::new(),
            }
        }
        QueryKind::Explore(t) => {
            let l = explore(std::slice::from_ref(t), limit);
            let detail = match compute_f(&l) {
                Ok(f) => {
                    let inconsistent = l
                        .states()
                        .filter(|s| l.is_reachable(*s) && f.contains(*s))
                        .count();
                    format!(
                        "{} reachable states, {} transitions, {} inconsistent",
                        l.reachable_count(),
                        l.reachable_transition_count(),
                        inconsistent
                    )
                }
                Err(_) => format!(
                    "{} reachable states, {} transitions",
                    l.reachable_count(),
                    l.reachable_transition_count()
                ),
            };
            let v = if l.is_complete() {
                Verdict::Holds
            } else {
                Verdict::Unknown(format!("exploration stopped at {} states", l.len()))
            };
            Partial {
                outcome: Outcome::Verdict(v),
                detail: Some(detail),
                states: l.len(),
                candidates: Vec::new(),
            }
        }
        QueryKind::Guardedness { var, body } => {
            let g = guardedness_of(body, var);
            let v = if g.level == GuardLevel::Unguarded {
                Verdict::Fails(Witness::Note(format!("{var} is unguarded")))
            } else {
                Verdict::Holds
            };
            Partial {
                outcome: Outcome::Verdict(v),
                detail: Some(g.to_string()),
                states: 0,
                candidates: Vec::new(),
            }
        }
    })
}

/// Closed terms a query talks about, for graph export.
pub fn query_terms(kind: &QueryKind) -> Vec<Term> {
    let with_body = |var: &str, body: &Term, cands: &[&Term]| -> Vec<Term> {
        let mut out: Vec<Term> = cands.iter().map(|c| (*c).clone()).collect();
        if let Ok(e) = EquationProblem::new(var, body.clone()) {
            out.extend(cands.iter().map(|c| e.apply(c)));
            if let Ok(r) = cllr_core::equations::rec_solution(&e) {
                out.push(r);
            }
        }
        out
    };
    match kind {
        QueryKind::Consistent(t) | QueryKind::Explore(t) => vec![t.clone()],
        QueryKind::Refines(p, q) | QueryKind::Equiv(p, q) => vec![p.clone(), q.clone()],
        QueryKind::Solution {
            var,
            body,
            candidate,
        } => with_body(var, body, &[candidate]),
        QueryKind::Greatest {
            var,
            body,
            candidates,
        } => with_body(var, body, &candidates.iter().collect::<Vec<_>>()),
        QueryKind::Unique {
            var,
            body,
            first,
            second,
        } => with_body(var, body, &[first, second]),
        QueryKind::Guardedness { .. } => Vec::new(),
    }
}

/// Joint graph of every term mentioned in the script.
pub fn script_graph(config: &CliConfig, script: &Script) -> (Lts, Option<FSet>) {
    let roots: Vec<Term> = script
        .queries
        .iter()
        .flat_map(|q| query_terms(&q.kind))
        .collect();
    let l = explore(&roots, config.limit());
    let f = compute_f(&l).ok();
    (l, f)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT rendering of the states reachable from the roots.
pub fn render_dot(l: &Lts, f: Option<&FSet>) -> String {
    let mut out = String::from("digraph lts {\n  node [shape=box];\n");
    for s in l.states().filter(|s| l.is_reachable(*s)) {
        let mut attrs = vec![format!("label=\"{}\"", dot_escape(&pretty(l.term(s))))];
        if !l.is_stable(s) {
            attrs.push("style=dashed".into());
        }
        if f.is_some_and(|f| f.contains(s)) {
            let style = if l.is_stable(s) {
                "filled"
            } else {
                "\"filled,dashed\""
            };
            attrs.retain(|a| !a.starts_with("style="));
            attrs.push(format!("style={style}"));
            attrs.push("fillcolor=red".into());
        }
        if l.roots().contains(&s) {
            attrs.push("peripheries=2".into());
        }
        let _ = writeln!(out, "  {s} [{}];", attrs.join(", "));
    }
    for s in l.states().filter(|s| l.is_reachable(*s)) {
        for (a, t) in l.successors(s) {
            let _ = writeln!(out, "  {s} -> {t} [label=\"{a}\"];");
        }
    }
    out.push_str("}\n");
    out
}

pub fn emit_dot(l: &Lts, f: Option<&FSet>, path: &Path) -> io::Result<()> {
    fs::write(path, render_dot(l, f))
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug)]
pub struct SelftestOutcome {
    pub reports: Vec<SuiteReport>,
    pub exit_code: i32,
}

impl SelftestOutcome {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            let _ = writeln!(out, "{r}");
        }
        out
    }
}

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_DEPTH: usize = 4;

/// Runs the property suites; `disabled` switches rules off to check that the
/// suites notice.
pub fn selftest(
    config: &CliConfig,
    depth: usize,
    cases: usize,
    disabled: &[Rule],
) -> SelftestOutcome {
    let mut cfg = SuiteConfig::new(config.seed.unwrap_or(DEFAULT_SEED), depth, cases);
    cfg.limit.max_states = cfg.limit.max_states.min(config.max_states);
    cfg.mask = RuleMask::without(disabled.iter().copied());
    let reports = all_suites(&cfg);
    let exit_code = if reports.iter().all(|r| r.passed()) {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    };
    SelftestOutcome { reports, exit_code }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cllr_core::syntax::parse_script;

    fn run_src(src: &str) -> RunOutcome {
        run(&CliConfig::default(), &parse_script(src).unwrap())
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_src("check consistent a.0").exit_code, EXIT_HOLDS);
        assert_eq!(run_src("check consistent bot").exit_code, EXIT_FAILS);
        let unknown = run(
            &CliConfig {
                max_states: 20,
                ..CliConfig::default()
            },
            &parse_script("check consistent rec X { X = a.(X |[]| b.0) }").unwrap(),
        );
        assert_eq!(unknown.exit_code, EXIT_UNKNOWN);
        assert_eq!(
            run_src("check consistent bot\ncheck consistent rec X { X = a.(X |[]| b.0) }")
                .exit_code,
            EXIT_FAILS
        );
    }

    #[test]
    fn hypothesis_errors_are_usage_errors() {
        let out = run_src("check greatest X tau.X [0]");
        assert_eq!(out.exit_code, EXIT_USAGE);
        assert_eq!(out.reports[0].label(), "ERROR");
    }

    #[test]
    fn text_report_shape() {
        let out = run_src("check consistent bot");
        let text = out.render(OutputFormat::Text);
        assert!(
            text.starts_with("[FAILS] check consistent bot (states 1) | bot  Rp1  []"),
            "{text}"
        );
    }

    #[test]
    fn json_report_fields() {
        let out = run_src("check refines a.0 a.0");
        let v: Value = serde_json::from_str(out.render(OutputFormat::Json).trim()).unwrap();
        for k in ["query", "verdict", "witness", "states", "millis"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["verdict"], "HOLDS");
        assert!(v["witness"].is_null());
    }

    #[test]
    fn dot_output() {
        let l = explore(
            &[cllr_core::parse_term("rec X { X = a.X }").unwrap()],
            ExplorationLimit::default(),
        );
        let f = compute_f(&l).unwrap();
        let dot = render_dot(&l, Some(&f));
        assert_eq!(dot.matches("label=").count(), 2, "{dot}");
        assert_eq!(dot.matches("->").count(), 1);

        let l = explore(
            &[cllr_core::parse_term("rec X { X = tau.X }").unwrap()],
            ExplorationLimit::default(),
        );
        let f = compute_f(&l).unwrap();
        let dot = render_dot(&l, Some(&f));
        assert!(dot.contains("fillcolor=red"));
        assert!(dot.contains("[label=\"tau\"]"));
        assert_eq!(dot.matches("->").count(), 1);
    }
}
