//! Heuristic predicate pushdown.
//!
//! Two rewrites run to a fixpoint, in order:
//!
//! 1. Conjunction splitting: `σ[a ∧ b](E)` becomes `σ[a](σ[b](E))`, so each
//!    conjunct can move on its own. OR and NOT are never split.
//! 2. Pushdown: a selection sitting above a join or cross product (possibly
//!    with other selections in between) moves into the input whose
//!    qualifiers cover every column it references. Predicates touching both
//!    inputs, or no columns at all, stay where they are.
//!
//! Each pass scans the tree in pre-order and rewrites the first node that
//! matches, so the result and the trace are deterministic. Every rewrite is
//! recorded as a rule name plus the path of the selection it fired on, and
//! [`replay`] reproduces the output from the input and the trace.

use std::fmt;

use serde::Serialize;

use crate::ra::{predicate_columns, NodePath, RaExpr};
use crate::sql::Predicate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    SplitConjunction,
    PushPastJoinLeft,
    PushPastJoinRight,
    PushPastCrossLeft,
    PushPastCrossRight,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::SplitConjunction => "SplitConjunction",
            Rule::PushPastJoinLeft => "PushPastJoinLeft",
            Rule::PushPastJoinRight => "PushPastJoinRight",
            Rule::PushPastCrossLeft => "PushPastCrossLeft",
            Rule::PushPastCrossRight => "PushPastCrossRight",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RewriteStep {
    pub rule: Rule,
    #[serde(rename = "path")]
    pub at: NodePath,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    fn extend(&mut self, other: RewriteTrace) {
        self.steps.extend(other.steps);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayError {
    pub step: usize,
    pub message: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trace step {} does not apply: {}", self.step, self.message)
    }
}

impl std::error::Error for ReplayError {}

pub fn split_conjunctions(expr: &RaExpr) -> (RaExpr, RewriteTrace) {
    rewrite_to_fixpoint(expr, split_at)
}

pub fn push_down_selections(expr: &RaExpr) -> (RaExpr, RewriteTrace) {
    rewrite_to_fixpoint(expr, push_at)
}

/// Splits conjunctions, then pushes selections down. The output has the
/// same root schema as the input.
pub fn optimize(expr: &RaExpr) -> (RaExpr, RewriteTrace) {
    let (split, mut trace) = split_conjunctions(expr);
    let (pushed, push_trace) = push_down_selections(&split);
    trace.extend(push_trace);
    (pushed, trace)
}

/// Re-applies a recorded trace to `expr`.
pub fn replay(expr: &RaExpr, trace: &RewriteTrace) -> Result<RaExpr, ReplayError> {
    let mut out = expr.clone();
    for (i, step) in trace.steps.iter().enumerate() {
        let fail = |message: String| ReplayError { step: i, message };
        let node = out.node_at_mut(&step.at).map_err(|e| fail(e.to_string()))?;
        let rewritten = match step.rule {
            Rule::SplitConjunction => split_at(node),
            _ => push_at(node),
        };
        match rewritten {
            Some((rule, new)) if rule == step.rule => *node = new,
            Some((rule, _)) => return Err(fail(format!("expected {}, node admits {rule}", step.rule))),
            None => return Err(fail(format!("{} does not match node {}", step.rule, step.at))),
        }
    }
    Ok(out)
}

fn rewrite_to_fixpoint(expr: &RaExpr, rule: impl Fn(&RaExpr) -> Option<(Rule, RaExpr)>) -> (RaExpr, RewriteTrace) {
    let mut out = expr.clone();
    let mut trace = RewriteTrace::default();
    while let Some((at, applied, replacement)) = first_match(&out, NodePath::root(), &rule) {
        *out.node_at_mut(&at).expect("path came from a traversal of this tree") = replacement;
        trace.steps.push(RewriteStep { rule: applied, at });
    }
    (out, trace)
}

fn first_match(
    node: &RaExpr,
    path: NodePath,
    rule: &impl Fn(&RaExpr) -> Option<(Rule, RaExpr)>,
) -> Option<(NodePath, Rule, RaExpr)> {
    if let Some((applied, replacement)) = rule(node) {
        return Some((path, applied, replacement));
    }
    node.children().into_iter().enumerate().find_map(|(i, c)| first_match(c, path.child(i), rule))
}

fn split_at(node: &RaExpr) -> Option<(Rule, RaExpr)> {
    let RaExpr::Selection { predicate: Predicate::And(a, b), child } = node else {
        return None;
    };
    let inner = (**child).clone().select((**b).clone());
    Some((Rule::SplitConjunction, inner.select((**a).clone())))
}

/// Moves the selection at `node` past the first join or cross product
/// below it, stepping over any selections in between.
fn push_at(node: &RaExpr) -> Option<(Rule, RaExpr)> {
    let RaExpr::Selection { predicate, child } = node else {
        return None;
    };
    let mut between = Vec::new();
    let mut target: &RaExpr = child;
    while let RaExpr::Selection { predicate: p, child: c } = target {
        between.push(p);
        target = c;
    }
    let quals: Vec<String> = predicate_columns(predicate).into_iter().map(|(q, _)| q).collect();
    if quals.is_empty() {
        return None;
    }
    let covered_by = |side: &RaExpr| {
        let available = side.qualifiers();
        quals.iter().all(|q| available.contains(q))
    };
    let (rule, pushed) = match target {
        RaExpr::Join { predicate: on, left, right } => {
            if covered_by(left) {
                let l = (**left).clone().select(predicate.clone());
                (Rule::PushPastJoinLeft, l.join(on.clone(), (**right).clone()))
            } else if covered_by(right) {
                let r = (**right).clone().select(predicate.clone());
                (Rule::PushPastJoinRight, (**left).clone().join(on.clone(), r))
            } else {
                return None;
            }
        }
        RaExpr::CrossProduct { left, right } => {
            if covered_by(left) {
                let l = (**left).clone().select(predicate.clone());
                (Rule::PushPastCrossLeft, l.cross((**right).clone()))
            } else if covered_by(right) {
                let r = (**right).clone().select(predicate.clone());
                (Rule::PushPastCrossRight, (**left).clone().cross(r))
            } else {
                return None;
            }
        }
        _ => return None,
    };
    let rebuilt = between.into_iter().rev().fold(pushed, |acc, p| acc.select(p.clone()));
    Some((rule, rebuilt))
}
