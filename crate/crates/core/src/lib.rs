//! A teaching engine for the correspondence between SQL and relational
//! algebra.
//!
//! Queries in a select-project-join subset of SQL are parsed
//! ([`sql::parse`]), translated into a canonical algebra tree
//! ([`translate::translate`]), optionally rewritten by predicate pushdown
//! ([`optimize::optimize`]), and evaluated node by node over a small bundled
//! dataset ([`eval::evaluate_all`]) so every intermediate result can be
//! inspected.

pub mod catalog;
pub mod error;
pub mod eval;
pub mod optimize;
pub mod pipeline;
pub mod ra;
pub mod render;
pub mod sql;
pub mod translate;

pub use catalog::{load_catalog, AttributeType, Catalog, Row, Value};
pub use error::{BindError, EvalError, InvalidPath, LexError, ParseError, Position, QueryError};
pub use eval::{evaluate, evaluate_all, EvalResult, Evaluator, ResultSet};
pub use optimize::{optimize, RewriteStep, RewriteTrace, Rule};
pub use pipeline::{run_query, QueryOutput, DEFAULT_ROW_LIMIT};
pub use ra::{infer_schema, BoundSchema, NodeKind, NodePath, RaExpr};
pub use sql::{parse, SqlQuery};
pub use translate::{bind, translate};
