use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::AttributeType;
use crate::ra::NodePath;
use crate::sql::ColumnRef;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub fn new(line: usize, column: usize) -> Self {
        Position { line, column }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("corrupt catalog: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lex error at {position}: {message}")]
pub struct LexError {
    pub position: Position,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {position}: expected {expected}, found {found}")]
pub struct ParseError {
    pub position: Position,
    pub expected: String,
    pub found: String,
}

/// Name resolution and type errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("unknown column {0}")]
    UnknownColumn(ColumnRef),
    #[error("ambiguous column {0}")]
    AmbiguousColumn(ColumnRef),
    #[error("duplicate relation name or alias {0}")]
    DuplicateQualifier(String),
    #[error("column {0} listed more than once")]
    DuplicateColumn(ColumnRef),
    #[error("cannot compare {left} with {right} in `{comparison}`")]
    TypeMismatch { comparison: String, left: AttributeType, right: AttributeType },
}

impl From<CatalogError> for BindError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::UnknownRelation(name) | CatalogError::Corrupt(name) => BindError::UnknownRelation(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid node path {0}")]
pub struct InvalidPath(pub NodePath);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error("intermediate result at node {path} exceeds {limit} rows")]
    RowLimit { path: NodePath, limit: usize },
}

/// Any error a user can provoke by typing a query.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("bind error: {0}")]
    Bind(#[from] BindError),
    #[error("{0}")]
    Limit(String),
}

impl From<EvalError> for QueryError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Bind(b) => QueryError::Bind(b),
            limit @ EvalError::RowLimit { .. } => QueryError::Limit(limit.to_string()),
        }
    }
}

impl QueryError {
    /// Short machine-readable category: `lex`, `parse`, `bind` or `limit`.
    pub fn kind(&self) -> &'static str {
        match self {
            QueryError::Lex(_) => "lex",
            QueryError::Parse(_) => "parse",
            QueryError::Bind(_) => "bind",
            QueryError::Limit(_) => "limit",
        }
    }

    pub fn position(&self) -> Option<Position> {
        match self {
            QueryError::Lex(e) => Some(e.position),
            QueryError::Parse(e) => Some(e.position),
            QueryError::Bind(_) | QueryError::Limit(_) => None,
        }
    }
}
