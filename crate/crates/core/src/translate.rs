//! Canonical SQL to relational algebra translation.
//!
//! The shape is fixed: the FROM list folds left to right into joins and
//! cross products at the bottom, WHERE becomes a single selection above
//! them, and the select list becomes a projection on top (omitted for `*`).
//! No rewriting happens here.

use crate::catalog::Catalog;
use crate::error::BindError;
use crate::ra::{bind_columns, bind_predicate, infer_schema, BoundSchema, RaExpr};
use crate::sql::{FromClause, JoinItem, SelectList, SqlQuery, TableRef};

/// Returns `q` with every column reference qualified.
///
/// `ON` conditions see only the tables joined so far; `WHERE` and the
/// select list see the whole FROM list.
pub fn bind(q: &SqlQuery, catalog: &Catalog) -> Result<SqlQuery, BindError> {
    let mut scope = table_schema(&q.from.head, catalog)?;
    let mut joins = Vec::with_capacity(q.from.joins.len());
    for item in &q.from.joins {
        scope = join_scope(scope, item.table(), catalog)?;
        joins.push(match item {
            JoinItem::Comma(t) => JoinItem::Comma(t.clone()),
            JoinItem::InnerJoinOn(t, on) => JoinItem::InnerJoinOn(t.clone(), bind_predicate(on, &scope)?),
        });
    }
    let selection = q.selection.as_ref().map(|p| bind_predicate(p, &scope)).transpose()?;
    let select = match &q.select {
        SelectList::Star => SelectList::Star,
        SelectList::Columns(cols) => {
            SelectList::Columns(bind_columns(cols, &scope)?.columns.iter().map(|c| c.column_ref()).collect())
        }
    };
    Ok(SqlQuery { select, from: FromClause { head: q.from.head.clone(), joins }, selection })
}

fn table_schema(t: &TableRef, catalog: &Catalog) -> Result<BoundSchema, BindError> {
    infer_schema(&leaf(t), catalog)
}

fn join_scope(scope: BoundSchema, t: &TableRef, catalog: &Catalog) -> Result<BoundSchema, BindError> {
    if scope.qualifiers().contains(t.qualifier()) {
        return Err(BindError::DuplicateQualifier(t.qualifier().to_owned()));
    }
    let mut scope = scope;
    scope.columns.extend(table_schema(t, catalog)?.columns);
    Ok(scope)
}

fn leaf(t: &TableRef) -> RaExpr {
    RaExpr::Relation { name: t.relation.clone(), alias: t.alias.clone() }
}

pub fn translate(q: &SqlQuery, catalog: &Catalog) -> Result<RaExpr, BindError> {
    let q = bind(q, catalog)?;
    let from = q.from.joins.iter().fold(leaf(&q.from.head), |acc, item| match item {
        JoinItem::Comma(t) => acc.cross(leaf(t)),
        JoinItem::InnerJoinOn(t, on) => acc.join(on.clone(), leaf(t)),
    });
    let filtered = match q.selection {
        Some(p) => from.select(p),
        None => from,
    };
    Ok(match q.select {
        SelectList::Star => filtered,
        SelectList::Columns(cols) => filtered.project(cols),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_catalog;
    use crate::sql::{parse, ColumnRef, CompareOp, Operand, Predicate};

    fn tr(sql: &str) -> Result<RaExpr, BindError> {
        translate(&parse(sql).unwrap(), &load_catalog())
    }

    fn col(q: &str, a: &str) -> Operand {
        Operand::Column(ColumnRef::qualified(q, a))
    }

    #[test]
    fn projection_over_selection() {
        let e = tr("SELECT name FROM Doctor WHERE departmentId = 1").unwrap();
        let expected = RaExpr::relation("Doctor")
            .select(Predicate::compare(col("Doctor", "departmentId"), CompareOp::Eq, Operand::Integer(1)))
            .project(vec![ColumnRef::qualified("Doctor", "name")]);
        assert_eq!(e, expected);
    }

    #[test]
    fn star_over_comma_join() {
        let e = tr("SELECT * FROM Doctor, Patient").unwrap();
        assert_eq!(e, RaExpr::relation("Doctor").cross(RaExpr::relation("Patient")));
        let schema = infer_schema(&e, &load_catalog()).unwrap();
        assert_eq!(schema.len(), 6);
    }

    #[test]
    fn joins_fold_left() {
        let e = tr("SELECT Patient.name FROM Department JOIN Doctor ON Department.id = Doctor.departmentId \
                    JOIN Patient ON Doctor.id = Patient.doctorId")
        .unwrap();
        let expected = RaExpr::relation("Department")
            .join(
                Predicate::compare(col("Department", "id"), CompareOp::Eq, col("Doctor", "departmentId")),
                RaExpr::relation("Doctor"),
            )
            .join(
                Predicate::compare(col("Doctor", "id"), CompareOp::Eq, col("Patient", "doctorId")),
                RaExpr::relation("Patient"),
            )
            .project(vec![ColumnRef::qualified("Patient", "name")]);
        assert_eq!(e, expected);
    }

    #[test]
    fn bind_qualifies_unique_names() {
        let q = bind(&parse("SELECT doctorId FROM Doctor, Patient").unwrap(), &load_catalog()).unwrap();
        assert_eq!(q.select, SelectList::Columns(vec![ColumnRef::qualified("Patient", "doctorId")]));
    }

    #[test]
    fn bind_errors() {
        let cat = load_catalog();
        let b = |sql: &str| bind(&parse(sql).unwrap(), &cat);
        assert_eq!(b("SELECT name FROM Doctor, Patient"), Err(BindError::AmbiguousColumn(ColumnRef::bare("name"))));
        assert_eq!(b("SELECT X.id FROM Doctor"), Err(BindError::UnknownColumn(ColumnRef::qualified("X", "id"))));
        assert_eq!(b("SELECT * FROM Nurse"), Err(BindError::UnknownRelation("Nurse".into())));
        assert_eq!(b("SELECT * FROM Doctor, Doctor"), Err(BindError::DuplicateQualifier("Doctor".into())));
        assert_eq!(b("SELECT * FROM Doctor AS d, Patient AS d"), Err(BindError::DuplicateQualifier("d".into())));
        assert!(matches!(b("SELECT * FROM Doctor WHERE name = 3"), Err(BindError::TypeMismatch { .. })));
        // An alias hides the relation name.
        assert!(matches!(b("SELECT Doctor.id FROM Doctor AS d"), Err(BindError::UnknownColumn(_))));
    }

    #[test]
    fn on_clause_sees_only_tables_joined_so_far() {
        let cat = load_catalog();
        let sql = "SELECT * FROM Department JOIN Doctor ON Patient.doctorId = Doctor.id JOIN Patient ON 1 = 1";
        assert!(matches!(bind(&parse(sql).unwrap(), &cat), Err(BindError::UnknownColumn(_))));
    }

    #[test]
    fn self_join_through_aliases() {
        let e =
            tr("SELECT a.name, b.name FROM Doctor AS a JOIN Doctor AS b ON a.departmentId = b.departmentId").unwrap();
        assert_eq!(infer_schema(&e, &load_catalog()).unwrap().len(), 2);
    }
}
