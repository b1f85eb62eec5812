//! Lexing and parsing of the supported SQL subset.

mod ast;
mod lexer;
mod parser;

pub(crate) use ast::{sql_quote, write_predicate, PredicateStyle};
pub use ast::{ColumnRef, CompareOp, FromClause, JoinItem, Operand, Predicate, SelectList, SqlQuery, TableRef};
pub use lexer::{tokenize, Token, TokenKind, KEYWORDS};
pub use parser::parse;
