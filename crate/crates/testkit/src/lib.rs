//! Test support: a random SPJ query generator, a brute-force reference
//! evaluator, and golden-file cases (see [`golden`]).
//!
//! The generator builds queries in its own small representation, renders
//! them to SQL text, and the reference evaluator runs that representation
//! directly against the catalog rows with nested loops over the whole FROM
//! list. Apart from [`golden`], nothing here goes through the parser, binder, translator or
//! relational algebra evaluator, so it can be used to check all of them.

pub mod golden;

use std::cmp::Ordering;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relplay_core::{AttributeType, Catalog, Row, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenTable {
    pub relation: String,
    pub alias: Option<String>,
}

impl GenTable {
    pub fn qualifier(&self) -> &str {
        self.alias.as_deref().unwrap_or(&self.relation)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenCol {
    pub qualifier: Option<String>,
    pub attribute: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenOperand {
    Col(GenCol),
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenPred {
    Cmp(GenOperand, &'static str, GenOperand),
    And(Box<GenPred>, Box<GenPred>),
    Or(Box<GenPred>, Box<GenPred>),
    Not(Box<GenPred>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenJoin {
    Comma,
    On(GenPred),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenQuery {
    /// `None` is `SELECT *`.
    pub select: Option<Vec<GenCol>>,
    pub head: GenTable,
    pub joins: Vec<(GenJoin, GenTable)>,
    pub filter: Option<GenPred>,
}

const OPS: [&str; 6] = ["=", "<>", "<", "<=", ">", ">="];

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

impl GenCol {
    fn sql(&self) -> String {
        match &self.qualifier {
            Some(q) => format!("{q}.{}", self.attribute),
            None => self.attribute.clone(),
        }
    }
}

impl GenOperand {
    fn sql(&self) -> String {
        match self {
            GenOperand::Col(c) => c.sql(),
            GenOperand::Int(i) => i.to_string(),
            GenOperand::Text(s) => quote(s),
        }
    }
}

impl GenPred {
    /// Fully parenthesized SQL.
    pub fn sql(&self) -> String {
        match self {
            GenPred::Cmp(l, op, r) => format!("{} {op} {}", l.sql(), r.sql()),
            GenPred::And(l, r) => format!("({}) AND ({})", l.sql(), r.sql()),
            GenPred::Or(l, r) => format!("({}) OR ({})", l.sql(), r.sql()),
            GenPred::Not(p) => format!("NOT ({})", p.sql()),
        }
    }
}

impl GenTable {
    fn sql(&self) -> String {
        match &self.alias {
            Some(a) => format!("{} AS {a}", self.relation),
            None => self.relation.clone(),
        }
    }
}

impl GenQuery {
    pub fn sql(&self) -> String {
        let select = match &self.select {
            None => "*".to_owned(),
            Some(cols) => cols.iter().map(GenCol::sql).collect::<Vec<_>>().join(", "),
        };
        let mut s = format!("SELECT {select} FROM {}", self.head.sql());
        for (j, t) in &self.joins {
            match j {
                GenJoin::Comma => s.push_str(&format!(", {}", t.sql())),
                GenJoin::On(p) => s.push_str(&format!(" JOIN {} ON {}", t.sql(), p.sql())),
            }
        }
        if let Some(p) = &self.filter {
            s.push_str(&format!(" WHERE {}", p.sql()));
        }
        s
    }

    pub fn tables(&self) -> Vec<&GenTable> {
        std::iter::once(&self.head).chain(self.joins.iter().map(|(_, t)| t)).collect()
    }
}

/// Brute-force evaluation: enumerate every combination of rows from the
/// FROM list, keep those satisfying all ON conditions and WHERE, project.
pub fn oracle(q: &GenQuery, catalog: &Catalog) -> Vec<Row> {
    struct Item<'a> {
        qualifier: &'a str,
        attributes: Vec<&'a str>,
        rows: &'a [Row],
    }
    let items: Vec<Item> = q
        .tables()
        .into_iter()
        .map(|t| {
            let table = catalog.scan(&t.relation).expect("generator only names seed relations");
            Item {
                qualifier: t.qualifier(),
                attributes: table.schema.attributes.iter().map(|a| a.name.as_str()).collect(),
                rows: &table.rows,
            }
        })
        .collect();

    let lookup = |combo: &[&Row], c: &GenCol| -> Value {
        let mut hits = items.iter().enumerate().filter_map(|(i, item)| {
            if c.qualifier.as_deref().is_some_and(|q| q != item.qualifier) {
                return None;
            }
            let pos = item.attributes.iter().position(|a| *a == c.attribute)?;
            Some(combo[i][pos].clone())
        });
        let v = hits.next().expect("column resolves");
        assert!(hits.next().is_none(), "generator produced an ambiguous column");
        v
    };
    fn holds(p: &GenPred, val: &dyn Fn(&GenOperand) -> Value) -> bool {
        match p {
            GenPred::Cmp(l, op, r) => {
                let ord = match (val(l), val(r)) {
                    (Value::Integer(a), Value::Integer(b)) => a.cmp(&b),
                    (Value::Text(a), Value::Text(b)) => a.chars().cmp(b.chars()),
                    _ => panic!("generator produced an ill-typed comparison"),
                };
                match *op {
                    "=" => ord == Ordering::Equal,
                    "<>" => ord != Ordering::Equal,
                    "<" => ord == Ordering::Less,
                    "<=" => ord != Ordering::Greater,
                    ">" => ord == Ordering::Greater,
                    ">=" => ord != Ordering::Less,
                    other => panic!("unknown operator {other}"),
                }
            }
            GenPred::And(l, r) => holds(l, val) && holds(r, val),
            GenPred::Or(l, r) => holds(l, val) || holds(r, val),
            GenPred::Not(p) => !holds(p, val),
        }
    }

    let mut conditions: Vec<&GenPred> = q
        .joins
        .iter()
        .filter_map(|(j, _)| match j {
            GenJoin::On(p) => Some(p),
            GenJoin::Comma => None,
        })
        .collect();
    conditions.extend(q.filter.as_ref());

    let mut out = Vec::new();
    let mut combo: Vec<&Row> = Vec::with_capacity(items.len());
    fn each<'a>(items: &[&'a [Row]], combo: &mut Vec<&'a Row>, f: &mut dyn FnMut(&[&'a Row])) {
        match items.split_first() {
            None => f(combo),
            Some((first, rest)) => {
                for row in first.iter() {
                    combo.push(row);
                    each(rest, combo, f);
                    combo.pop();
                }
            }
        }
    }
    let sources: Vec<&[Row]> = items.iter().map(|i| i.rows).collect();
    each(&sources, &mut combo, &mut |combo| {
        let val = |o: &GenOperand| match o {
            GenOperand::Col(c) => lookup(combo, c),
            GenOperand::Int(i) => Value::Integer(*i),
            GenOperand::Text(s) => Value::Text(s.clone()),
        };
        if conditions.iter().all(|p| holds(p, &val)) {
            out.push(match &q.select {
                None => combo.iter().flat_map(|r| r.iter().cloned()).collect(),
                Some(cols) => cols.iter().map(|c| lookup(combo, c)).collect(),
            });
        }
    });
    out
}

/// Rows sorted, so bags compare with `==`.
pub fn multiset(rows: &[Row]) -> Vec<Row> {
    let mut v = rows.to_vec();
    v.sort();
    v
}

/// Random query generator over the seed catalog.
pub struct QueryGen<'a> {
    catalog: &'a Catalog,
    rng: ChaCha8Rng,
    next_alias: usize,
}

struct ScopeCol {
    qualifier: String,
    attribute: String,
    ty: AttributeType,
    relation: String,
}

impl<'a> QueryGen<'a> {
    pub fn new(catalog: &'a Catalog, seed: u64) -> Self {
        QueryGen { catalog, rng: ChaCha8Rng::seed_from_u64(seed), next_alias: 0 }
    }

    /// `n` queries from successive draws.
    pub fn corpus(catalog: &'a Catalog, seed: u64, n: usize) -> Vec<GenQuery> {
        let mut g = QueryGen::new(catalog, seed);
        (0..n).map(|_| g.query()).collect()
    }

    fn scope(&self, tables: &[GenTable]) -> Vec<ScopeCol> {
        tables
            .iter()
            .flat_map(|t| {
                let schema = self.catalog.relation_schema(&t.relation).expect("seed relation");
                schema.attributes.iter().map(move |a| ScopeCol {
                    qualifier: t.qualifier().to_owned(),
                    attribute: a.name.clone(),
                    ty: a.ty,
                    relation: t.relation.clone(),
                })
            })
            .collect()
    }

    /// A reference to `c`, left unqualified when that is unambiguous in
    /// the full FROM list and a coin flip says so.
    fn col_ref(&mut self, c: &ScopeCol, full: &[ScopeCol]) -> GenCol {
        let unique = full.iter().filter(|o| o.attribute == c.attribute).count() == 1;
        let qualifier = if unique && self.rng.random_bool(0.4) { None } else { Some(c.qualifier.clone()) };
        GenCol { qualifier, attribute: c.attribute.clone() }
    }

    fn literal_for(&mut self, c: &ScopeCol) -> GenOperand {
        let table = self.catalog.scan(&c.relation).expect("seed relation");
        let pos = table.schema.position(&c.attribute).expect("seed attribute");
        let existing: Vec<&Value> = table.rows.iter().map(|r| &r[pos]).collect();
        let pick = (*existing.choose(&mut self.rng).expect("seed tables are nonempty")).clone();
        match (c.ty, pick) {
            (AttributeType::Integer, Value::Integer(v)) => {
                if self.rng.random_bool(0.7) {
                    GenOperand::Int(v)
                } else {
                    GenOperand::Int((v + self.rng.random_range(-2..=2)).max(0))
                }
            }
            (AttributeType::Text, Value::Text(s)) => {
                if self.rng.random_bool(0.7) {
                    GenOperand::Text(s)
                } else {
                    let odd = ["", "A", "Bz", "Carol", "Zed", "a", "O'Hara", "Neuro"];
                    GenOperand::Text((*odd.choose(&mut self.rng).unwrap()).to_owned())
                }
            }
            _ => unreachable!("catalog rows are well typed"),
        }
    }

    fn comparison(&mut self, scope: &[ScopeCol], full: &[ScopeCol]) -> GenPred {
        let c = &scope[self.rng.random_range(0..scope.len())];
        let op = *OPS.choose(&mut self.rng).unwrap();
        let left = GenOperand::Col(self.col_ref(c, full));
        let same_type: Vec<&ScopeCol> = scope.iter().filter(|o| o.ty == c.ty).collect();
        let right = if self.rng.random_bool(0.3) {
            let other = same_type[self.rng.random_range(0..same_type.len())];
            GenOperand::Col(self.col_ref(other, full))
        } else {
            self.literal_for(c)
        };
        if self.rng.random_bool(0.15) {
            GenPred::Cmp(right, op, left)
        } else {
            GenPred::Cmp(left, op, right)
        }
    }

    /// A predicate with at most `depth` levels of AND/OR/NOT.
    fn predicate(&mut self, scope: &[ScopeCol], full: &[ScopeCol], depth: u32) -> GenPred {
        if depth == 0 || self.rng.random_bool(0.35) {
            return self.comparison(scope, full);
        }
        match self.rng.random_range(0..5) {
            0 | 1 => GenPred::And(
                Box::new(self.predicate(scope, full, depth - 1)),
                Box::new(self.predicate(scope, full, depth - 1)),
            ),
            2 | 3 => GenPred::Or(
                Box::new(self.predicate(scope, full, depth - 1)),
                Box::new(self.predicate(scope, full, depth - 1)),
            ),
            _ => GenPred::Not(Box::new(self.predicate(scope, full, depth - 1))),
        }
    }

    fn table(&mut self, relation: &str, used: &[GenTable]) -> GenTable {
        let clash = used.iter().any(|t| t.qualifier() == relation);
        let alias = if clash || self.rng.random_bool(0.15) {
            self.next_alias += 1;
            Some(format!("t{}", self.next_alias))
        } else {
            None
        };
        GenTable { relation: relation.to_owned(), alias }
    }

    /// Foreign-key equality between `new` and some earlier table, if the
    /// schema links them.
    fn fk_condition(&mut self, new: &GenTable, earlier: &[GenTable]) -> Option<GenPred> {
        let mut options = Vec::new();
        for fk in self.catalog.foreign_keys() {
            for e in earlier {
                if fk.from_relation == new.relation && fk.to_relation == e.relation {
                    options.push((new.qualifier(), &fk.from_attribute, e.qualifier(), &fk.to_attribute));
                }
                if fk.to_relation == new.relation && fk.from_relation == e.relation {
                    options.push((e.qualifier(), &fk.from_attribute, new.qualifier(), &fk.to_attribute));
                }
            }
        }
        let &(q1, a1, q2, a2) = options.choose(&mut self.rng)?;
        let l = GenOperand::Col(GenCol { qualifier: Some(q1.to_owned()), attribute: a1.clone() });
        let r = GenOperand::Col(GenCol { qualifier: Some(q2.to_owned()), attribute: a2.clone() });
        Some(if self.rng.random_bool(0.5) { GenPred::Cmp(l, "=", r) } else { GenPred::Cmp(r, "=", l) })
    }

    pub fn query(&mut self) -> GenQuery {
        self.next_alias = 0;
        let relations: Vec<String> = self.catalog.relation_names().map(str::to_owned).collect();
        let n_tables = self.rng.random_range(1..=3);
        let head_rel = relations.choose(&mut self.rng).unwrap().clone();
        let head = self.table(&head_rel, &[]);
        let mut tables = vec![head.clone()];
        let mut pending = Vec::new();
        for _ in 1..n_tables {
            let rel = relations.choose(&mut self.rng).unwrap().clone();
            let t = self.table(&rel, &tables);
            let fk = self.fk_condition(&t, &tables);
            tables.push(t.clone());
            let kind = match fk {
                Some(fk) if self.rng.random_bool(0.75) => {
                    if self.rng.random_bool(0.2) {
                        JoinKind::FkAnd(fk)
                    } else {
                        JoinKind::Fk(fk)
                    }
                }
                _ if self.rng.random_bool(0.15) => JoinKind::Theta,
                _ => JoinKind::Comma,
            };
            pending.push((kind, t, tables.len()));
        }
        let full = self.scope(&tables);
        let mut joins = Vec::new();
        for (kind, t, visible) in pending {
            let scope = self.scope(&tables[..visible]);
            let join = match kind {
                JoinKind::Comma => GenJoin::Comma,
                JoinKind::Fk(p) => GenJoin::On(p),
                JoinKind::FkAnd(p) => GenJoin::On(GenPred::And(Box::new(p), Box::new(self.comparison(&scope, &full)))),
                JoinKind::Theta => GenJoin::On(self.predicate(&scope, &full, 1)),
            };
            joins.push((join, t));
        }
        let filter = if self.rng.random_bool(0.85) {
            if self.rng.random_bool(0.5) {
                // Conjunction of up to three simple conditions: the shape
                // pushdown acts on most often.
                let mut p = self.predicate(&full, &full, 1);
                for _ in 0..self.rng.random_range(1..=2) {
                    p = GenPred::And(Box::new(p), Box::new(self.predicate(&full, &full, 1)));
                }
                Some(p)
            } else {
                Some(self.predicate(&full, &full, 3))
            }
        } else {
            None
        };
        let select = if self.rng.random_bool(0.25) {
            None
        } else {
            let k = self.rng.random_range(1..=3).min(full.len());
            let picked: Vec<&ScopeCol> = full.choose_multiple(&mut self.rng, k).collect();
            Some(picked.into_iter().map(|c| self.col_ref(c, &full)).collect())
        };
        GenQuery { select, head, joins, filter }
    }
}

enum JoinKind {
    Comma,
    Fk(GenPred),
    FkAnd(GenPred),
    Theta,
}

/// Random strings drawn from SQL-ish fragments, for parser fuzzing.
pub fn token_soup(rng: &mut impl Rng, max_tokens: usize) -> String {
    const PIECES: &[&str] = &[
        "SELECT",
        "FROM",
        "WHERE",
        "JOIN",
        "INNER",
        "ON",
        "AND",
        "OR",
        "NOT",
        "AS",
        "select",
        "*",
        ",",
        ".",
        "(",
        ")",
        "=",
        "<>",
        "<",
        "<=",
        ">",
        ">=",
        ";",
        "Doctor",
        "Patient",
        "Department",
        "id",
        "name",
        "d",
        "x",
        "1",
        "42",
        "'Eve'",
        "'O''Hara'",
        "'",
        "''",
        "LEFT",
        "GROUP",
        "@",
        "-",
        "\n",
        "9999999999999999999999",
    ];
    let n = rng.random_range(0..=max_tokens);
    (0..n).map(|_| *PIECES.choose(rng).unwrap()).collect::<Vec<_>>().join(if rng.random_bool(0.8) { " " } else { "" })
}

pub fn token_soup_from_seed(seed: u64, max_tokens: usize) -> String {
    token_soup(&mut ChaCha8Rng::seed_from_u64(seed), max_tokens)
}

/// Random bytes, half the time restricted to printable ASCII, decoded
/// lossily so the parser sees arbitrary text.
pub fn random_text(rng: &mut impl Rng, max_len: usize) -> String {
    let n = rng.random_range(0..=max_len);
    let printable = rng.random_bool(0.5);
    let bytes: Vec<u8> = (0..n).map(|_| if printable { rng.random_range(0x20..0x7f) } else { rng.random() }).collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

/// A valid generated query with up to two word-level edits (drop,
/// duplicate or swap), so some inputs still parse and most fail late.
pub fn mutated_query(gen: &mut QueryGen<'_>, rng: &mut impl Rng) -> String {
    let sql = gen.query().sql();
    let mut words: Vec<&str> = sql.split(' ').collect();
    for _ in 0..rng.random_range(0..=2) {
        let i = rng.random_range(0..words.len());
        match rng.random_range(0..3) {
            0 if words.len() > 1 => {
                words.remove(i);
            }
            1 => words.insert(i, words[i]),
            _ => {
                let j = rng.random_range(0..words.len());
                words.swap(i, j);
            }
        }
    }
    words.join(" ")
}

/// `count` parser inputs cycling through [`random_text`], [`token_soup`]
/// and [`mutated_query`], reproducible from `seed`.
pub fn fuzz_inputs(catalog: &Catalog, seed: u64, count: usize) -> impl Iterator<Item = String> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gen = QueryGen::new(catalog, seed);
    (0..count).map(move |i| match i % 3 {
        0 => random_text(&mut rng, 64),
        1 => token_soup(&mut rng, 40),
        _ => mutated_query(&mut gen, &mut rng),
    })
}
