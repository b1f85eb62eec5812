//! Bag-semantics evaluation of relational algebra over the catalog.
//!
//! Row order is deterministic: relations scan in seed order, selection and
//! projection keep their input order, and joins and cross products iterate
//! left-major (each left row against every right row).

use std::cell::Cell;
use std::cmp::Ordering;

use serde::Serialize;

use crate::catalog::{Catalog, Row, Value};
use crate::error::{BindError, EvalError};
use crate::ra::{bind_columns, bind_predicate, infer_schema, BoundSchema, NodePath, RaExpr};
use crate::sql::{CompareOp, Operand, Predicate};

/// Materialized output of one expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResultSet {
    pub schema: BoundSchema,
    pub rows: Vec<Row>,
}

impl ResultSet {
    pub fn cardinality(&self) -> usize {
        self.rows.len()
    }
}

/// The result at one node of a tree, as produced by [`evaluate_all`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalResult {
    pub path: NodePath,
    pub schema: BoundSchema,
    pub rows: Vec<Row>,
    pub cardinality: usize,
}

pub struct Evaluator<'a> {
    catalog: &'a Catalog,
    row_limit: Option<usize>,
    evaluations: Cell<usize>,
}

impl<'a> Evaluator<'a> {
    pub fn new(catalog: &'a Catalog) -> Self {
        Evaluator { catalog, row_limit: None, evaluations: Cell::new(0) }
    }

    /// Fail with [`EvalError::RowLimit`] when any node would produce more
    /// than `limit` rows.
    pub fn with_row_limit(mut self, limit: usize) -> Self {
        self.row_limit = Some(limit);
        self
    }

    /// Number of node evaluations performed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations.get()
    }

    pub fn evaluate(&self, expr: &RaExpr) -> Result<ResultSet, EvalError> {
        self.eval_node(expr, &NodePath::root(), None)
    }

    /// One result per node in pre-order. Each node is evaluated once and its
    /// result reused by its parent.
    pub fn evaluate_all(&self, expr: &RaExpr) -> Result<Vec<EvalResult>, EvalError> {
        let mut slots = Vec::with_capacity(expr.node_count());
        self.eval_node(expr, &NodePath::root(), Some(&mut slots))?;
        Ok(slots.into_iter().flatten().collect())
    }

    fn check_limit(&self, path: &NodePath, rows: usize) -> Result<(), EvalError> {
        match self.row_limit {
            Some(limit) if rows > limit => Err(EvalError::RowLimit { path: path.clone(), limit }),
            _ => Ok(()),
        }
    }

    fn eval_node(
        &self,
        expr: &RaExpr,
        path: &NodePath,
        mut record: Option<&mut Vec<Option<EvalResult>>>,
    ) -> Result<ResultSet, EvalError> {
        let slot = record.as_mut().map(|r| {
            r.push(None);
            r.len() - 1
        });
        let out = match expr {
            RaExpr::Relation { name, .. } => ResultSet {
                schema: infer_schema(expr, self.catalog)?,
                rows: self.catalog.scan(name).map_err(BindError::from)?.rows.clone(),
            },
            RaExpr::Selection { predicate, child } => {
                let input = self.eval_node(child, &path.child(0), record.as_deref_mut())?;
                let test = CompiledPredicate::new(predicate, &input.schema)?;
                ResultSet { rows: input.rows.into_iter().filter(|r| test.eval(r)).collect(), schema: input.schema }
            }
            RaExpr::Projection { columns, child } => {
                let input = self.eval_node(child, &path.child(0), record.as_deref_mut())?;
                let schema = bind_columns(columns, &input.schema)?;
                let indices = columns.iter().map(|c| input.schema.resolve(c)).collect::<Result<Vec<_>, _>>()?;
                let rows = input.rows.iter().map(|r| indices.iter().map(|&i| r[i].clone()).collect()).collect();
                ResultSet { schema, rows }
            }
            RaExpr::Join { predicate, left, right } => {
                let l = self.eval_node(left, &path.child(0), record.as_deref_mut())?;
                let r = self.eval_node(right, &path.child(1), record.as_deref_mut())?;
                let schema = l.schema.clone().concat(r.schema.clone())?;
                let test = CompiledPredicate::new(predicate, &schema)?;
                let rows = nested_loop(&l.rows, &r.rows, |row| test.eval(row));
                ResultSet { schema, rows }
            }
            RaExpr::CrossProduct { left, right } => {
                let l = self.eval_node(left, &path.child(0), record.as_deref_mut())?;
                let r = self.eval_node(right, &path.child(1), record.as_deref_mut())?;
                self.check_limit(path, l.rows.len().saturating_mul(r.rows.len()))?;
                let schema = l.schema.concat(r.schema)?;
                let rows = nested_loop(&l.rows, &r.rows, |_| true);
                ResultSet { schema, rows }
            }
        };
        self.evaluations.set(self.evaluations.get() + 1);
        self.check_limit(path, out.rows.len())?;
        if let (Some(record), Some(slot)) = (record, slot) {
            record[slot] = Some(EvalResult {
                path: path.clone(),
                schema: out.schema.clone(),
                rows: out.rows.clone(),
                cardinality: out.rows.len(),
            });
        }
        Ok(out)
    }
}

fn nested_loop(left: &[Row], right: &[Row], keep: impl Fn(&Row) -> bool) -> Vec<Row> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            let row: Row = l.iter().chain(r).cloned().collect();
            if keep(&row) {
                out.push(row);
            }
        }
    }
    out
}

pub fn evaluate(expr: &RaExpr, catalog: &Catalog) -> Result<ResultSet, EvalError> {
    Evaluator::new(catalog).evaluate(expr)
}

pub fn evaluate_all(expr: &RaExpr, catalog: &Catalog) -> Result<Vec<EvalResult>, EvalError> {
    Evaluator::new(catalog).evaluate_all(expr)
}

/// Evaluates `p` on one row laid out per `schema`.
pub fn eval_predicate(p: &Predicate, row: &[Value], schema: &BoundSchema) -> Result<bool, BindError> {
    Ok(CompiledPredicate::new(p, schema)?.eval(row))
}

/// A predicate with column references replaced by row offsets.
enum CompiledPredicate {
    Comparison(Slot, CompareOp, Slot),
    And(Box<CompiledPredicate>, Box<CompiledPredicate>),
    Or(Box<CompiledPredicate>, Box<CompiledPredicate>),
    Not(Box<CompiledPredicate>),
}

enum Slot {
    Column(usize),
    Literal(Value),
}

impl Slot {
    fn get<'a>(&'a self, row: &'a [Value]) -> Option<&'a Value> {
        match self {
            Slot::Column(i) => row.get(*i),
            Slot::Literal(v) => Some(v),
        }
    }
}

impl CompiledPredicate {
    fn new(p: &Predicate, schema: &BoundSchema) -> Result<Self, BindError> {
        let p = bind_predicate(p, schema)?;
        Self::compile(&p, schema)
    }

    fn compile(p: &Predicate, schema: &BoundSchema) -> Result<Self, BindError> {
        let slot = |o: &Operand| -> Result<Slot, BindError> {
            Ok(match o {
                Operand::Column(c) => Slot::Column(schema.resolve(c)?),
                Operand::Integer(i) => Slot::Literal(Value::Integer(*i)),
                Operand::Text(s) => Slot::Literal(Value::Text(s.clone())),
            })
        };
        Ok(match p {
            Predicate::Comparison { left, op, right } => CompiledPredicate::Comparison(slot(left)?, *op, slot(right)?),
            Predicate::And(l, r) => {
                CompiledPredicate::And(Box::new(Self::compile(l, schema)?), Box::new(Self::compile(r, schema)?))
            }
            Predicate::Or(l, r) => {
                CompiledPredicate::Or(Box::new(Self::compile(l, schema)?), Box::new(Self::compile(r, schema)?))
            }
            Predicate::Not(inner) => CompiledPredicate::Not(Box::new(Self::compile(inner, schema)?)),
        })
    }

    fn eval(&self, row: &[Value]) -> bool {
        match self {
            CompiledPredicate::Comparison(l, op, r) => match (l.get(row), r.get(row)) {
                (Some(a), Some(b)) => a.compare(b).is_some_and(|ord| holds(*op, ord)),
                _ => false,
            },
            CompiledPredicate::And(l, r) => l.eval(row) && r.eval(row),
            CompiledPredicate::Or(l, r) => l.eval(row) || r.eval(row),
            CompiledPredicate::Not(p) => !p.eval(row),
        }
    }
}

fn holds(op: CompareOp, ord: Ordering) -> bool {
    match op {
        CompareOp::Eq => ord == Ordering::Equal,
        CompareOp::NotEq => ord != Ordering::Equal,
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::LtEq => ord != Ordering::Greater,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::GtEq => ord != Ordering::Less,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_catalog;
    use crate::catalog::AttributeType;
    use crate::ra::BoundColumn;
    use crate::sql::ColumnRef;

    fn col(q: &str, a: &str) -> Operand {
        Operand::Column(ColumnRef::qualified(q, a))
    }

    fn fk() -> Predicate {
        Predicate::compare(col("Doctor", "id"), CompareOp::Eq, col("Patient", "doctorId"))
    }

    fn dept_is_1() -> Predicate {
        Predicate::compare(col("Doctor", "departmentId"), CompareOp::Eq, Operand::Integer(1))
    }

    #[test]
    fn cross_product_is_left_major() {
        let cat = load_catalog();
        let r = evaluate(&RaExpr::relation("Doctor").cross(RaExpr::relation("Patient")), &cat).unwrap();
        assert_eq!(r.cardinality(), 12);
        assert_eq!(r.rows[0][0], Value::Integer(10));
        assert_eq!(r.rows[0][3], Value::Integer(100));
        assert_eq!(r.rows[1][3], Value::Integer(101));
        assert_eq!(r.rows[4][0], Value::Integer(11));
    }

    #[test]
    fn fk_join_and_selection() {
        let cat = load_catalog();
        let j = evaluate(&RaExpr::relation("Doctor").join(fk(), RaExpr::relation("Patient")), &cat).unwrap();
        assert_eq!(j.cardinality(), 4);
        let s = evaluate(&RaExpr::relation("Doctor").select(dept_is_1()), &cat).unwrap();
        let names: Vec<_> = s.rows.iter().map(|r| r[1].to_string()).collect();
        assert_eq!(names, ["Alice", "Bob"]);
    }

    #[test]
    fn join_equals_selection_over_cross() {
        let cat = load_catalog();
        let j = evaluate(&RaExpr::relation("Doctor").join(fk(), RaExpr::relation("Patient")), &cat).unwrap();
        let s = evaluate(&RaExpr::relation("Doctor").cross(RaExpr::relation("Patient")).select(fk()), &cat).unwrap();
        assert_eq!(j, s);
    }

    #[test]
    fn evaluate_all_cardinalities_and_single_pass() {
        let cat = load_catalog();
        let e = RaExpr::relation("Doctor")
            .join(fk(), RaExpr::relation("Patient"))
            .select(dept_is_1())
            .project(vec![ColumnRef::qualified("Patient", "name")]);
        let ev = Evaluator::new(&cat);
        let all = ev.evaluate_all(&e).unwrap();
        assert_eq!(ev.evaluations(), e.node_count());
        let paths: Vec<_> = all.iter().map(|r| r.path.to_string()).collect();
        assert_eq!(paths, ["", "0", "0.0", "0.0.0", "0.0.1"]);
        let cards: Vec<_> = all.iter().map(|r| r.cardinality).collect();
        assert_eq!(cards, [3, 3, 4, 3, 4]);
        assert_eq!(all[0].rows, evaluate(&e, &cat).unwrap().rows);
        for r in &all {
            assert_eq!(r.cardinality, r.rows.len());
            assert!(r.rows.iter().all(|row| row.len() == r.schema.len()));
        }
    }

    #[test]
    fn single_leaf_matches_scan() {
        let cat = load_catalog();
        let all = evaluate_all(&RaExpr::relation("Department"), &cat).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].rows, cat.scan("Department").unwrap().rows);
    }

    #[test]
    fn predicate_semantics() {
        let schema = BoundSchema {
            columns: ["id", "name", "departmentId"]
                .iter()
                .zip([AttributeType::Integer, AttributeType::Text, AttributeType::Integer])
                .map(|(a, ty)| BoundColumn { qualifier: "Doctor".into(), attribute: (*a).into(), ty })
                .collect(),
        };
        let row = [Value::from(10), Value::from("Alice"), Value::from(1)];
        assert!(eval_predicate(&dept_is_1(), &row, &schema).unwrap());
        let one_is_one = Predicate::compare(Operand::Integer(1), CompareOp::Eq, Operand::Integer(1));
        assert!(!eval_predicate(&Predicate::not(one_is_one), &row, &schema).unwrap());
        let bob_lt_carol =
            Predicate::compare(Operand::Text("Bob".into()), CompareOp::Lt, Operand::Text("Carol".into()));
        assert!(eval_predicate(&bob_lt_carol, &row, &schema).unwrap());
        // Code point order: uppercase sorts before lowercase.
        let z_lt_a = Predicate::compare(Operand::Text("Z".into()), CompareOp::Lt, Operand::Text("a".into()));
        assert!(eval_predicate(&z_lt_a, &row, &schema).unwrap());
    }

    #[test]
    fn row_limit() {
        let cat = load_catalog();
        let e = RaExpr::relation("Doctor").cross(RaExpr::relation("Patient"));
        let err = Evaluator::new(&cat).with_row_limit(10).evaluate(&e).unwrap_err();
        assert!(matches!(err, EvalError::RowLimit { limit: 10, .. }));
        assert!(Evaluator::new(&cat).with_row_limit(12).evaluate(&e).is_ok());
    }

    #[test]
    fn binding_errors_propagate() {
        let cat = load_catalog();
        let e = RaExpr::relation("Doctor").select(Predicate::compare(
            col("Patient", "id"),
            CompareOp::Eq,
            Operand::Integer(1),
        ));
        assert!(matches!(evaluate(&e, &cat), Err(EvalError::Bind(BindError::UnknownColumn(_)))));
    }
}
