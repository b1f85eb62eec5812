//! Golden-file cases and comparison. Set `UPDATE_GOLDEN=1` to rewrite the
//! expected files from the current output instead of comparing.

use std::fmt::Write as _;
use std::path::Path;

use relplay_core::render::{to_latex, to_unicode, tree};
use relplay_core::{load_catalog, run_query, DEFAULT_ROW_LIMIT};

pub const DEMO_SQL: &str = "SELECT Patient.name FROM Doctor JOIN Patient ON Doctor.id = Patient.doctorId \
                            WHERE Doctor.departmentId = 1";

/// `(file stem, sql)` pairs rendered three ways, before and after
/// optimization.
pub const RENDER_CASES: &[(&str, &str)] = &[
    ("leaf", "SELECT * FROM Doctor"),
    ("selection", "SELECT * FROM Doctor WHERE Doctor.departmentId = 1"),
    ("projection", "SELECT Doctor.name FROM Doctor"),
    ("demo", DEMO_SQL),
    ("cross", "SELECT * FROM Doctor, Patient"),
    (
        "three_way_fk",
        "SELECT Department.name, Patient.name FROM Department JOIN Doctor ON Department.id = Doctor.departmentId \
         JOIN Patient ON Doctor.id = Patient.doctorId",
    ),
    (
        "conjunction",
        "SELECT * FROM Doctor JOIN Patient ON Doctor.id = Patient.doctorId \
         WHERE Doctor.departmentId = 1 AND Patient.id > 100 AND Patient.name <> Doctor.name",
    ),
    (
        "self_join",
        "SELECT a.name, b.name FROM Doctor AS a JOIN Doctor AS b ON a.departmentId = b.departmentId \
         WHERE a.id < b.id",
    ),
    (
        "connectives",
        "SELECT * FROM Patient AS on_call, Doctor \
         WHERE NOT (on_call.name = 'O''Brien' OR on_call.id >= 102) AND (Doctor.id <= 11 OR Doctor.name = 'Carol') \
         AND NOT Doctor.departmentId = 3",
    ),
    (
        "comma_chain",
        "SELECT Doctor.name, Department.name FROM Department, Doctor, Patient \
         WHERE Department.id = Doctor.departmentId AND Doctor.id = Patient.doctorId AND Patient.id = 103",
    ),
];

/// `(file stem, arguments)` pairs run through the `relplay` binary.
pub const CLI_CASES: &[(&str, &[&str])] = &[
    ("show_leaf", &["show", "SELECT * FROM Doctor"]),
    ("show_demo", &["show", DEMO_SQL]),
    ("show_demo_optimized", &["show", "--optimize", DEMO_SQL]),
    ("show_demo_latex", &["show", "--format", "latex", DEMO_SQL]),
    ("show_demo_tree", &["show", "--format", "tree", DEMO_SQL]),
    ("show_demo_tree_optimized", &["show", "--optimize", "--format", "tree", DEMO_SQL]),
    ("show_tree_color", &["show", "--format", "tree", "--color", "SELECT name FROM Doctor WHERE id = 10"]),
    ("show_parse_error", &["show", "SELECT FROM"]),
    ("show_lex_error", &["show", "SELECT * FROM Doctor WHERE name = 'Al"]),
    ("show_bind_error", &["show", "SELECT id FROM Doctor, Patient"]),
    ("eval_cross", &["eval", "SELECT * FROM Doctor, Patient"]),
    ("eval_demo", &["eval", DEMO_SQL]),
    ("eval_selection_node", &["eval", "--node", "0", "SELECT name FROM Doctor WHERE departmentId = 1"]),
    ("eval_pushed_node", &["eval", "--optimize", "--node", "0.0", DEMO_SQL]),
    ("eval_join_node", &["eval", "--node", "0.0", DEMO_SQL]),
    ("eval_root_node", &["eval", "--node", "", "SELECT * FROM Department"]),
    ("eval_bad_path", &["eval", "--node", "9.9", DEMO_SQL]),
    ("eval_malformed_path", &["eval", "--node", "0.x", DEMO_SQL]),
    ("eval_user_error", &["eval", "--node", "0", "SELECT name FROM Nurse"]),
    ("diff_leaf", &["diff", "SELECT * FROM Doctor"]),
    ("diff_demo", &["diff", DEMO_SQL]),
    ("diff_conjunction", &["diff", RENDER_CASES[6].1]),
    ("diff_comma_chain", &["diff", RENDER_CASES[9].1]),
];

/// Text recorded for one render case.
pub fn render_transcript(sql: &str) -> String {
    let cat = load_catalog();
    let mut s = format!("-- sql\n{sql}\n");
    for optimize in [false, true] {
        let out = run_query(sql, &cat, optimize, DEFAULT_ROW_LIMIT).expect("render cases are valid queries");
        let tag = if optimize { "optimized " } else { "" };
        let json = serde_json::to_string_pretty(&tree(&out.expr, Some(&out.results))).expect("tree serializes");
        let _ = write!(
            s,
            "-- {tag}unicode\n{}\n-- {tag}latex\n{}\n-- {tag}tree\n{json}\n",
            to_unicode(&out.expr),
            to_latex(&out.expr)
        );
        if optimize {
            s.push_str("-- trace\n");
            for step in &out.trace.steps {
                let _ = writeln!(s, "{} at [{}]", step.rule, step.at);
            }
        }
    }
    s
}

/// Text recorded for one CLI invocation.
pub fn cli_transcript(args: &[&str], code: Option<i32>, stdout: &str, stderr: &str) -> String {
    let quoted: Vec<String> = args
        .iter()
        .map(|a| {
            if !a.is_empty() && a.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                (*a).to_owned()
            } else {
                format!("'{}'", a.replace('\'', r"'\''"))
            }
        })
        .collect();
    let code = code.map_or_else(|| "signal".to_owned(), |c| c.to_string());
    format!("$ relplay {}\n-- exit {code}\n-- stdout\n{stdout}-- stderr\n{stderr}", quoted.join(" "))
}

/// Compare `actual` with `dir/name`, or write it when `UPDATE_GOLDEN=1`.
pub fn check(dir: &Path, name: &str, actual: &str) -> Result<(), String> {
    let path = dir.join(name);
    if std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1") {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        return std::fs::write(&path, actual).map_err(|e| format!("{}: {e}", path.display()));
    }
    let expected = std::fs::read_to_string(&path)
        .map_err(|e| format!("{}: {e} (run with UPDATE_GOLDEN=1 to create)", path.display()))?;
    if expected == actual {
        return Ok(());
    }
    let line = expected
        .lines()
        .zip(actual.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| expected.lines().count().min(actual.lines().count()));
    Err(format!(
        "{} differs at line {}:\n  expected: {:?}\n  actual:   {:?}",
        path.display(),
        line + 1,
        expected.lines().nth(line).unwrap_or("<eof>"),
        actual.lines().nth(line).unwrap_or("<eof>"),
    ))
}
