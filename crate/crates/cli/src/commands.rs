use std::fmt::Write as _;
use std::str::FromStr;

use relplay_core::render::{format_table, to_latex, to_tree_text, to_unicode};
use relplay_core::{run_query, Catalog, NodePath, QueryError, DEFAULT_ROW_LIMIT};

pub const EXIT_USER_ERROR: i32 = 2;
pub const EXIT_BAD_PATH: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Unicode,
    Latex,
    Tree,
}

#[derive(Debug, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        Failure { code: EXIT_USER_ERROR, message: e.to_string() }
    }
}

pub fn show(catalog: &Catalog, sql: &str, optimize: bool, format: Format, color: bool) -> Result<String, Failure> {
    let out = run_query(sql, catalog, optimize, DEFAULT_ROW_LIMIT)?;
    Ok(match format {
        Format::Unicode => format!("{}\n", to_unicode(&out.expr)),
        Format::Latex => format!("{}\n", to_latex(&out.expr)),
        Format::Tree => to_tree_text(&out.expr, Some(&out.results), color),
    })
}

pub fn eval(catalog: &Catalog, sql: &str, optimize: bool, node: Option<&str>) -> Result<String, Failure> {
    let out = run_query(sql, catalog, optimize, DEFAULT_ROW_LIMIT)?;
    let path = match node {
        None => NodePath::root(),
        Some(text) => NodePath::from_str(text).map_err(|e| Failure { code: EXIT_BAD_PATH, message: e.to_string() })?,
    };
    let result = out.results.iter().find(|r| r.path == path).ok_or_else(|| Failure {
        code: EXIT_BAD_PATH,
        message: format!("no node at path {:?} in {}", path.to_string(), to_unicode(&out.expr)),
    })?;
    Ok(format_table(&result.schema, &result.rows))
}

pub fn diff(catalog: &Catalog, sql: &str, color: bool) -> Result<String, Failure> {
    let plain = run_query(sql, catalog, false, DEFAULT_ROW_LIMIT)?;
    let opt = run_query(sql, catalog, true, DEFAULT_ROW_LIMIT)?;
    let mut s = String::from("unoptimized:\n");
    s.push_str(&to_tree_text(&plain.expr, Some(&plain.results), color));
    s.push_str("\noptimized:\n");
    s.push_str(&to_tree_text(&opt.expr, Some(&opt.results), color));
    s.push_str("\ntrace:\n");
    if opt.trace.is_empty() {
        s.push_str("  (none)\n");
    }
    for step in &opt.trace.steps {
        let at = if step.at.is_root() { "root".to_owned() } else { step.at.to_string() };
        let _ = writeln!(s, "  {} at {at}", step.rule);
    }
    Ok(s)
}
