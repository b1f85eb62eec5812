//! parse → translate → (optimize) → evaluate, as used by the CLI and the
//! HTTP service.

use crate::catalog::Catalog;
use crate::error::QueryError;
use crate::eval::{EvalResult, Evaluator};
use crate::optimize::{optimize, RewriteTrace};
use crate::ra::RaExpr;
use crate::sql::parse;
use crate::translate::translate;

/// Per-node row cap applied by [`run_query`]; guards long cross-product
/// chains such as `FROM Patient, Patient AS a, Patient AS b, ...`.
pub const DEFAULT_ROW_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutput {
    /// The canonical translation.
    pub canonical: RaExpr,
    /// The expression that was evaluated: optimized or canonical.
    pub expr: RaExpr,
    /// Empty unless optimization was requested.
    pub trace: RewriteTrace,
    /// One result per node of `expr`, in pre-order.
    pub results: Vec<EvalResult>,
}

impl QueryOutput {
    pub fn root(&self) -> &EvalResult {
        &self.results[0]
    }
}

pub fn run_query(sql: &str, catalog: &Catalog, optimized: bool, row_limit: usize) -> Result<QueryOutput, QueryError> {
    let query = parse(sql)?;
    let canonical = translate(&query, catalog)?;
    let (expr, trace) = if optimized { optimize(&canonical) } else { (canonical.clone(), RewriteTrace::default()) };
    let results = Evaluator::new(catalog).with_row_limit(row_limit).evaluate_all(&expr)?;
    Ok(QueryOutput { canonical, expr, trace, results })
}
