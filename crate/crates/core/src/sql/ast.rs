use std::collections::BTreeSet;
use std::fmt::{self, Write};

use serde::Serialize;

/// One parsed `SELECT ... FROM ... [WHERE ...]` query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqlQuery {
    pub select: SelectList,
    pub from: FromClause,
    pub selection: Option<Predicate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectList {
    Star,
    /// Never empty.
    Columns(Vec<ColumnRef>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FromClause {
    pub head: TableRef,
    pub joins: Vec<JoinItem>,
}

impl FromClause {
    /// All table references, head first.
    pub fn tables(&self) -> impl Iterator<Item = &TableRef> {
        std::iter::once(&self.head).chain(self.joins.iter().map(JoinItem::table))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JoinItem {
    /// `, table`
    Comma(TableRef),
    /// `JOIN table ON predicate`
    InnerJoinOn(TableRef, Predicate),
}

impl JoinItem {
    pub fn table(&self) -> &TableRef {
        match self {
            JoinItem::Comma(t) | JoinItem::InnerJoinOn(t, _) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TableRef {
    pub relation: String,
    pub alias: Option<String>,
}

impl TableRef {
    pub fn new(relation: impl Into<String>) -> Self {
        TableRef { relation: relation.into(), alias: None }
    }

    pub fn aliased(relation: impl Into<String>, alias: impl Into<String>) -> Self {
        TableRef { relation: relation.into(), alias: Some(alias.into()) }
    }

    /// The name columns of this table are qualified by: the alias if
    /// present, otherwise the relation name.
    pub fn qualifier(&self) -> &str {
        self.alias.as_deref().unwrap_or(&self.relation)
    }
}

impl fmt::Display for TableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.alias {
            Some(a) => write!(f, "{} AS {a}", self.relation),
            None => f.write_str(&self.relation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ColumnRef {
    pub qualifier: Option<String>,
    pub attribute: String,
}

impl ColumnRef {
    pub fn qualified(qualifier: impl Into<String>, attribute: impl Into<String>) -> Self {
        ColumnRef { qualifier: Some(qualifier.into()), attribute: attribute.into() }
    }

    pub fn bare(attribute: impl Into<String>) -> Self {
        ColumnRef { qualifier: None, attribute: attribute.into() }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.qualifier {
            Some(q) => write!(f, "{q}.{}", self.attribute),
            None => f.write_str(&self.attribute),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
}

impl CompareOp {
    pub const ALL: [CompareOp; 6] =
        [CompareOp::Eq, CompareOp::NotEq, CompareOp::Lt, CompareOp::LtEq, CompareOp::Gt, CompareOp::GtEq];

    pub fn sql(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::NotEq => "<>",
            CompareOp::Lt => "<",
            CompareOp::LtEq => "<=",
            CompareOp::Gt => ">",
            CompareOp::GtEq => ">=",
        }
    }

    pub fn from_sql(s: &str) -> Option<CompareOp> {
        CompareOp::ALL.into_iter().find(|op| op.sql() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Column(ColumnRef),
    Integer(i64),
    Text(String),
}

/// Boolean condition over comparisons. Two-valued: there are no NULLs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    Comparison { left: Operand, op: CompareOp, right: Operand },
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn compare(left: Operand, op: CompareOp, right: Operand) -> Self {
        Predicate::Comparison { left, op, right }
    }

    pub fn and(l: Predicate, r: Predicate) -> Self {
        Predicate::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Predicate, r: Predicate) -> Self {
        Predicate::Or(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Predicate) -> Self {
        Predicate::Not(Box::new(p))
    }

    /// Every column reference, left to right.
    pub fn column_refs(&self) -> Vec<&ColumnRef> {
        let mut out = Vec::new();
        self.visit_columns(&mut |c| out.push(c));
        out
    }

    fn visit_columns<'a>(&'a self, f: &mut impl FnMut(&'a ColumnRef)) {
        match self {
            Predicate::Comparison { left, right, .. } => {
                for o in [left, right] {
                    if let Operand::Column(c) = o {
                        f(c);
                    }
                }
            }
            Predicate::And(l, r) | Predicate::Or(l, r) => {
                l.visit_columns(f);
                r.visit_columns(f);
            }
            Predicate::Not(p) => p.visit_columns(f),
        }
    }

    /// Rewrites every column reference in place.
    pub fn try_map_columns<E>(&self, f: &mut impl FnMut(&ColumnRef) -> Result<ColumnRef, E>) -> Result<Predicate, E> {
        let mut operand = |o: &Operand| -> Result<Operand, E> {
            Ok(match o {
                Operand::Column(c) => Operand::Column(f(c)?),
                other => other.clone(),
            })
        };
        Ok(match self {
            Predicate::Comparison { left, op, right } => {
                Predicate::Comparison { left: operand(left)?, op: *op, right: operand(right)? }
            }
            Predicate::And(l, r) => Predicate::and(l.try_map_columns(f)?, r.try_map_columns(f)?),
            Predicate::Or(l, r) => Predicate::or(l.try_map_columns(f)?, r.try_map_columns(f)?),
            Predicate::Not(p) => Predicate::not(p.try_map_columns(f)?),
        })
    }

    /// The `(qualifier, attribute)` pairs referenced. Unqualified references
    /// contribute an empty qualifier; callers bind first.
    pub fn columns(&self) -> BTreeSet<(String, String)> {
        self.column_refs().into_iter().map(|c| (c.qualifier.clone().unwrap_or_default(), c.attribute.clone())).collect()
    }

    fn precedence(&self) -> u8 {
        match self {
            Predicate::Or(..) => 1,
            Predicate::And(..) => 2,
            Predicate::Not(..) => 3,
            Predicate::Comparison { .. } => 4,
        }
    }
}

/// Symbol table for printing predicates in different notations.
pub(crate) struct PredicateStyle {
    pub and: &'static str,
    pub or: &'static str,
    pub not: &'static str,
    /// Wrap the operand of NOT in parentheses even when it is a comparison.
    pub not_always_parens: bool,
    pub op: fn(CompareOp) -> &'static str,
    pub ident: fn(&str, &mut String),
    pub text: fn(&str, &mut String),
}

pub(crate) fn sql_quote(s: &str, out: &mut String) {
    out.push('\'');
    for c in s.chars() {
        if c == '\'' {
            out.push('\'');
        }
        out.push(c);
    }
    out.push('\'');
}

pub(crate) const SQL_STYLE: PredicateStyle = PredicateStyle {
    and: "AND",
    or: "OR",
    not: "NOT ",
    not_always_parens: false,
    op: CompareOp::sql,
    ident: |s, out| out.push_str(s),
    text: sql_quote,
};

pub(crate) fn write_operand(o: &Operand, style: &PredicateStyle, out: &mut String) {
    match o {
        Operand::Column(c) => {
            if let Some(q) = &c.qualifier {
                (style.ident)(q, out);
                out.push('.');
            }
            (style.ident)(&c.attribute, out);
        }
        Operand::Integer(i) => {
            let _ = write!(out, "{i}");
        }
        Operand::Text(s) => (style.text)(s, out),
    }
}

/// Prints with the minimum parentheses needed to reparse the same tree
/// under NOT > AND > OR with left-associative binary operators.
pub(crate) fn write_predicate(p: &Predicate, style: &PredicateStyle, out: &mut String) {
    let child = |c: &Predicate, parens: bool, out: &mut String| {
        if parens {
            out.push('(');
        }
        write_predicate(c, style, out);
        if parens {
            out.push(')');
        }
    };
    match p {
        Predicate::Comparison { left, op, right } => {
            write_operand(left, style, out);
            out.push(' ');
            out.push_str((style.op)(*op));
            out.push(' ');
            write_operand(right, style, out);
        }
        Predicate::And(l, r) => {
            child(l, l.precedence() < 2, out);
            out.push(' ');
            out.push_str(style.and);
            out.push(' ');
            child(r, r.precedence() <= 2, out);
        }
        Predicate::Or(l, r) => {
            child(l, false, out);
            out.push(' ');
            out.push_str(style.or);
            out.push(' ');
            child(r, r.precedence() <= 1, out);
        }
        Predicate::Not(c) => {
            out.push_str(style.not);
            let is_comparison = matches!(**c, Predicate::Comparison { .. });
            child(c, style.not_always_parens || !is_comparison, out);
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_predicate(self, &SQL_STYLE, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_operand(self, &SQL_STYLE, &mut s);
        f.write_str(&s)
    }
}

/// Canonical SQL text. Reparsing it yields an identical AST.
impl fmt::Display for SqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        match &self.select {
            SelectList::Star => f.write_str("*")?,
            SelectList::Columns(cols) => {
                for (i, c) in cols.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
            }
        }
        write!(f, " FROM {}", self.from.head)?;
        for j in &self.from.joins {
            match j {
                JoinItem::Comma(t) => write!(f, ", {t}")?,
                JoinItem::InnerJoinOn(t, on) => write!(f, " JOIN {t} ON {on}")?,
            }
        }
        if let Some(p) = &self.selection {
            write!(f, " WHERE {p}")?;
        }
        Ok(())
    }
}
