//! Text and JSON renderings of relational algebra expressions.

use serde::Serialize;

use crate::catalog::{Row, Value};
use crate::eval::EvalResult;
use crate::ra::{BoundSchema, NodePath, RaExpr};
use crate::sql::{sql_quote, write_predicate, CompareOp, PredicateStyle};

struct Notation {
    select: &'static str,
    project: &'static str,
    join: &'static str,
    cross: &'static str,
    alias: &'static str,
    predicate: PredicateStyle,
}

const UNICODE: Notation = Notation {
    select: "σ",
    project: "π",
    join: "⋈",
    cross: "×",
    alias: " AS ",
    predicate: PredicateStyle {
        and: "∧",
        or: "∨",
        not: "¬",
        not_always_parens: true,
        op: unicode_op,
        ident: |s, out| out.push_str(s),
        text: sql_quote,
    },
};

const LATEX: Notation = Notation {
    select: "\\sigma",
    project: "\\pi",
    join: "\\bowtie",
    cross: "\\times",
    alias: " \\text{ AS } ",
    predicate: PredicateStyle {
        and: "\\land",
        or: "\\lor",
        not: "\\lnot ",
        not_always_parens: true,
        op: latex_op,
        ident: latex_ident,
        text: latex_text,
    },
};

fn unicode_op(op: CompareOp) -> &'static str {
    match op {
        CompareOp::Eq => "=",
        CompareOp::NotEq => "≠",
        CompareOp::Lt => "<",
        CompareOp::LtEq => "≤",
        CompareOp::Gt => ">",
        CompareOp::GtEq => "≥",
    }
}

fn latex_op(op: CompareOp) -> &'static str {
    match op {
        CompareOp::Eq => "=",
        CompareOp::NotEq => "\\neq",
        CompareOp::Lt => "<",
        CompareOp::LtEq => "\\leq",
        CompareOp::Gt => ">",
        CompareOp::GtEq => "\\geq",
    }
}

fn latex_ident(s: &str, out: &mut String) {
    for c in s.chars() {
        if c == '_' {
            out.push('\\');
        }
        out.push(c);
    }
}

fn latex_text(s: &str, out: &mut String) {
    out.push_str("\\text{'");
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            '\'' => out.push_str("''"),
            '{' | '}' | '$' | '&' | '#' | '_' | '%' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out.push_str("'}");
}

fn is_binary(e: &RaExpr) -> bool {
    matches!(e, RaExpr::Join { .. } | RaExpr::CrossProduct { .. })
}

fn write_columns(cols: &[crate::sql::ColumnRef], n: &Notation, out: &mut String) {
    for (i, c) in cols.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if let Some(q) = &c.qualifier {
            (n.predicate.ident)(q, out);
            out.push('.');
        }
        (n.predicate.ident)(&c.attribute, out);
    }
}

fn write_expr(e: &RaExpr, n: &Notation, out: &mut String) {
    let operand = |c: &RaExpr, out: &mut String| {
        if is_binary(c) {
            out.push('(');
            write_expr(c, n, out);
            out.push(')');
        } else {
            write_expr(c, n, out);
        }
    };
    match e {
        RaExpr::Relation { name, alias } => {
            (n.predicate.ident)(name, out);
            if let Some(a) = alias {
                out.push_str(n.alias);
                (n.predicate.ident)(a, out);
            }
        }
        RaExpr::Selection { predicate, child } => {
            out.push_str(n.select);
            out.push_str("_{");
            write_predicate(predicate, &n.predicate, out);
            out.push_str("}(");
            write_expr(child, n, out);
            out.push(')');
        }
        RaExpr::Projection { columns, child } => {
            out.push_str(n.project);
            out.push_str("_{");
            write_columns(columns, n, out);
            out.push_str("}(");
            write_expr(child, n, out);
            out.push(')');
        }
        RaExpr::Join { predicate, left, right } => {
            operand(left, out);
            out.push(' ');
            out.push_str(n.join);
            out.push_str("_{");
            write_predicate(predicate, &n.predicate, out);
            out.push_str("} ");
            operand(right, out);
        }
        RaExpr::CrossProduct { left, right } => {
            operand(left, out);
            out.push(' ');
            out.push_str(n.cross);
            out.push(' ');
            operand(right, out);
        }
    }
}

/// Linear form, e.g. `π_{Doctor.name}(σ_{Doctor.departmentId = 1}(Doctor))`.
pub fn to_unicode(expr: &RaExpr) -> String {
    let mut out = String::new();
    write_expr(expr, &UNICODE, &mut out);
    out
}

/// Linear LaTeX math-mode form using `\sigma`, `\pi`, `\bowtie`, `\times`.
pub fn to_latex(expr: &RaExpr) -> String {
    let mut out = String::new();
    write_expr(expr, &LATEX, &mut out);
    out
}

/// Operator symbol and subscript for a single node, e.g.
/// `σ Doctor.departmentId = 1`.
pub fn node_label(expr: &RaExpr) -> String {
    let n = &UNICODE;
    let mut out = String::new();
    match expr {
        RaExpr::Relation { .. } => write_expr(expr, n, &mut out),
        RaExpr::Selection { predicate, .. } => {
            out.push_str(n.select);
            out.push(' ');
            write_predicate(predicate, &n.predicate, &mut out);
        }
        RaExpr::Projection { columns, .. } => {
            out.push_str(n.project);
            out.push(' ');
            write_columns(columns, n, &mut out);
        }
        RaExpr::Join { predicate, .. } => {
            out.push_str(n.join);
            out.push(' ');
            write_predicate(predicate, &n.predicate, &mut out);
        }
        RaExpr::CrossProduct { .. } => out.push_str(n.cross),
    }
    out
}

/// One node of the JSON tree handed to the UI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub kind: &'static str,
    pub label: String,
    pub path: NodePath,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<usize>,
    pub children: Vec<TreeNode>,
}

fn cardinality_at(results: Option<&[EvalResult]>, path: &NodePath) -> Option<usize> {
    results?.iter().find(|r| &r.path == path).map(|r| r.cardinality)
}

pub fn tree(expr: &RaExpr, results: Option<&[EvalResult]>) -> TreeNode {
    fn build(e: &RaExpr, path: NodePath, results: Option<&[EvalResult]>) -> TreeNode {
        TreeNode {
            kind: e.kind().name(),
            label: node_label(e),
            cardinality: cardinality_at(results, &path),
            children: e.children().into_iter().enumerate().map(|(i, c)| build(c, path.child(i), results)).collect(),
            path,
        }
    }
    build(expr, NodePath::root(), results)
}

/// `{kind, label, path, cardinality?, children}` recursively.
pub fn to_tree_json(expr: &RaExpr, results: Option<&[EvalResult]>) -> serde_json::Value {
    serde_json::to_value(tree(expr, results)).expect("tree nodes always serialize")
}

const BOLD_CYAN: &str = "\x1b[1;36m";
const RESET: &str = "\x1b[0m";

/// Indented box-drawing tree with node paths and, when `results` is given,
/// row counts:
///
/// ```text
/// π Patient.name  [root] 3 rows
/// └─ ⋈ Doctor.id = Patient.doctorId  [0] 3 rows
///    ├─ σ Doctor.departmentId = 1  [0.0] 2 rows
///    │  └─ Doctor  [0.0.0] 3 rows
///    └─ Patient  [0.1] 4 rows
/// ```
pub fn to_tree_text(expr: &RaExpr, results: Option<&[EvalResult]>, color: bool) -> String {
    fn walk(node: &TreeNode, prefix: &str, connector: &str, child_prefix: &str, color: bool, out: &mut String) {
        out.push_str(prefix);
        out.push_str(connector);
        if color {
            out.push_str(BOLD_CYAN);
            out.push_str(&node.label);
            out.push_str(RESET);
        } else {
            out.push_str(&node.label);
        }
        let path = if node.path.is_root() { "root".to_owned() } else { node.path.to_string() };
        out.push_str(&format!("  [{path}]"));
        if let Some(n) = node.cardinality {
            out.push_str(&format!(" {n} {}", if n == 1 { "row" } else { "rows" }));
        }
        out.push('\n');
        let next_prefix = format!("{prefix}{child_prefix}");
        let count = node.children.len();
        for (i, c) in node.children.iter().enumerate() {
            let last = i + 1 == count;
            let (conn, cont) = if last { ("└─ ", "   ") } else { ("├─ ", "│  ") };
            walk(c, &next_prefix, conn, cont, color, out);
        }
    }
    let mut out = String::new();
    walk(&tree(expr, results), "", "", "", color, &mut out);
    out
}

/// Aligned text table: header, rule, rows, and a row count. Integers are
/// right-aligned, text left-aligned.
pub fn format_table(schema: &BoundSchema, rows: &[Row]) -> String {
    let headers: Vec<String> = schema.columns.iter().map(ToString::to_string).collect();
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
    let width = |i: usize| {
        cells.iter().map(|r| r[i].chars().count()).chain(std::iter::once(headers[i].chars().count())).max().unwrap_or(0)
    };
    let widths: Vec<usize> = (0..headers.len()).map(width).collect();
    let mut out = String::new();
    let line = |parts: Vec<String>, out: &mut String| {
        out.push_str(parts.join(" | ").trim_end());
        out.push('\n');
    };
    line(headers.iter().zip(&widths).map(|(h, w)| format!("{h:<w$}")).collect(), &mut out);
    out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    out.push('\n');
    for (row, text) in rows.iter().zip(&cells) {
        line(
            row.iter()
                .zip(text)
                .zip(&widths)
                .map(|((v, s), w)| match v {
                    Value::Integer(_) => format!("{s:>w$}"),
                    Value::Text(_) => format!("{s:<w$}"),
                })
                .collect(),
            &mut out,
        );
    }
    let n = rows.len();
    out.push_str(&format!("({n} {})\n", if n == 1 { "row" } else { "rows" }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_catalog;
    use crate::eval::evaluate_all;
    use crate::sql::{ColumnRef, Operand, Predicate};

    fn col(q: &str, a: &str) -> Operand {
        Operand::Column(ColumnRef::qualified(q, a))
    }

    fn dept_is_1() -> Predicate {
        Predicate::compare(col("Doctor", "departmentId"), CompareOp::Eq, Operand::Integer(1))
    }

    fn fk() -> Predicate {
        Predicate::compare(col("Doctor", "id"), CompareOp::Eq, col("Patient", "doctorId"))
    }

    #[test]
    fn unicode_forms() {
        let d = RaExpr::relation("Doctor");
        assert_eq!(to_unicode(&d.clone().select(dept_is_1())), "σ_{Doctor.departmentId = 1}(Doctor)");
        assert_eq!(
            to_unicode(&d.clone().project(vec![ColumnRef::qualified("Doctor", "name")])),
            "π_{Doctor.name}(Doctor)"
        );
        assert_eq!(
            to_unicode(&d.join(fk(), RaExpr::relation("Patient"))),
            "Doctor ⋈_{Doctor.id = Patient.doctorId} Patient"
        );
    }

    #[test]
    fn latex_forms() {
        let d = RaExpr::relation("Doctor");
        assert_eq!(to_latex(&d.clone().select(dept_is_1())), "\\sigma_{Doctor.departmentId = 1}(Doctor)");
        assert_eq!(to_latex(&d.clone().cross(RaExpr::relation("Patient"))), "Doctor \\times Patient");
        assert_eq!(
            to_latex(&d.select(dept_is_1()).project(vec![ColumnRef::qualified("Doctor", "name")])),
            "\\pi_{Doctor.name}(\\sigma_{Doctor.departmentId = 1}(Doctor))"
        );
    }

    #[test]
    fn latex_escapes() {
        let p =
            Predicate::not(Predicate::compare(col("my_t", "x"), CompareOp::NotEq, Operand::Text("50% & {up}".into())));
        let e = RaExpr::aliased("T", "my_t").select(p);
        assert_eq!(
            to_latex(&e),
            "\\sigma_{\\lnot (my\\_t.x \\neq \\text{'50\\% \\& \\{up\\}'})}(T \\text{ AS } my\\_t)"
        );
    }

    #[test]
    fn nested_binary_operands_are_parenthesized() {
        let e = RaExpr::relation("A")
            .cross(RaExpr::relation("B"))
            .cross(RaExpr::relation("C").cross(RaExpr::relation("D")));
        assert_eq!(to_unicode(&e), "(A × B) × (C × D)");
    }

    #[test]
    fn tree_json_shapes() {
        let leaf = to_tree_json(&RaExpr::relation("Doctor"), None);
        assert_eq!(leaf, serde_json::json!({"kind": "relation", "label": "Doctor", "path": [], "children": []}));
        let sel = to_tree_json(&RaExpr::relation("Doctor").select(dept_is_1()), None);
        assert_eq!(sel["label"], "σ Doctor.departmentId = 1");
        assert_eq!(sel["children"][0]["path"], serde_json::json!([0]));
    }

    #[test]
    fn tree_paths_match_enumeration() {
        let e = RaExpr::relation("Doctor").join(fk(), RaExpr::relation("Patient")).select(dept_is_1());
        let results = evaluate_all(&e, &load_catalog()).unwrap();
        fn collect(n: &TreeNode, out: &mut Vec<(NodePath, Option<usize>)>) {
            out.push((n.path.clone(), n.cardinality));
            n.children.iter().for_each(|c| collect(c, out));
        }
        let mut got = Vec::new();
        collect(&tree(&e, Some(&results)), &mut got);
        let expected: Vec<_> =
            e.enumerate_nodes().into_iter().zip(&results).map(|((p, _), r)| (p, Some(r.cardinality))).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn tree_text_layout() {
        let e = RaExpr::relation("Doctor")
            .select(dept_is_1())
            .join(fk(), RaExpr::relation("Patient"))
            .project(vec![ColumnRef::qualified("Patient", "name")]);
        let results = evaluate_all(&e, &load_catalog()).unwrap();
        let expected = "\
π Patient.name  [root] 3 rows
└─ ⋈ Doctor.id = Patient.doctorId  [0] 3 rows
   ├─ σ Doctor.departmentId = 1  [0.0] 2 rows
   │  └─ Doctor  [0.0.0] 3 rows
   └─ Patient  [0.1] 4 rows
";
        assert_eq!(to_tree_text(&e, Some(&results), false), expected);
        assert!(to_tree_text(&e, None, true).contains("\x1b[1;36mπ Patient.name\x1b[0m  [root]\n"));
    }

    #[test]
    fn table_alignment() {
        let cat = load_catalog();
        let r = &evaluate_all(&RaExpr::relation("Department"), &cat).unwrap()[0];
        let expected = "\
Department.id | Department.name
--------------+----------------
            1 | Cardiology
            2 | Neurology
            3 | Oncology
(3 rows)
";
        assert_eq!(format_table(&r.schema, &r.rows), expected);
    }
}
