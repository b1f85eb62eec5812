//! Recursive descent parser for the select-project-join subset:
//!
//! ```text
//! query      := "SELECT" selectList "FROM" fromList ["WHERE" pred] [";"]
//! selectList := "*" | columnRef {"," columnRef}
//! fromList   := tableRef {("," tableRef) | (["INNER"] "JOIN" tableRef "ON" pred)}
//! tableRef   := identifier ["AS" identifier]
//! columnRef  := [identifier "."] identifier
//! pred       := andExpr {"OR" andExpr}
//! andExpr    := notExpr {"AND" notExpr}
//! notExpr    := ["NOT"] primary
//! primary    := comparison | "(" pred ")"
//! comparison := operand ("="|"<>"|"<"|"<="|">"|">=") operand
//! operand    := columnRef | integerLiteral | stringLiteral
//! ```

use super::ast::*;
use super::lexer::{tokenize_with_end, Token, TokenKind};
use crate::error::{ParseError, Position, QueryError};

/// Parenthesis nesting limit; keeps recursion depth bounded on hostile input.
const MAX_NESTING: usize = 128;

pub fn parse(text: &str) -> Result<SqlQuery, QueryError> {
    let (tokens, end) = tokenize_with_end(text)?;
    Ok(Parser { tokens, pos: 0, end, depth: 0 }.query()?)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: Position,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let (position, found) = match self.peek() {
            Some(t) => (t.position, describe(t)),
            None => (self.end, "end of input".to_owned()),
        };
        Err(ParseError { position, expected: expected.to_owned(), found })
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let hit = self.peek().is_some_and(|t| t.is_keyword(kw));
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_symbol(&mut self, sym: &str) -> bool {
        let hit = self.peek().is_some_and(|t| t.is_symbol(sym));
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(kw)
        }
    }

    fn identifier(&mut self, expected: &str) -> PResult<String> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                let s = t.text.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(expected),
        }
    }

    fn query(&mut self) -> PResult<SqlQuery> {
        self.expect_keyword("SELECT")?;
        let select = if self.eat_symbol("*") {
            SelectList::Star
        } else {
            let mut cols = vec![self.column_ref("select item (`*` or a column)")?];
            while self.eat_symbol(",") {
                cols.push(self.column_ref("column")?);
            }
            SelectList::Columns(cols)
        };
        self.expect_keyword("FROM")?;
        let head = self.table_ref()?;
        let mut joins = Vec::new();
        loop {
            if self.eat_symbol(",") {
                joins.push(JoinItem::Comma(self.table_ref()?));
            } else if self.peek().is_some_and(|t| t.is_keyword("JOIN") || t.is_keyword("INNER")) {
                if self.eat_keyword("INNER") {
                    self.expect_keyword("JOIN")?;
                } else {
                    self.pos += 1;
                }
                let table = self.table_ref()?;
                self.expect_keyword("ON")?;
                let on = self.predicate()?;
                joins.push(JoinItem::InnerJoinOn(table, on));
            } else {
                break;
            }
        }
        let selection = if self.eat_keyword("WHERE") { Some(self.predicate()?) } else { None };
        self.eat_symbol(";");
        if self.peek().is_some() {
            let expected =
                if selection.is_some() { "AND, OR or end of input" } else { "`,`, JOIN, WHERE or end of input" };
            return self.error(expected);
        }
        Ok(SqlQuery { select, from: FromClause { head, joins }, selection })
    }

    fn table_ref(&mut self) -> PResult<TableRef> {
        let relation = self.identifier("relation name")?;
        let alias = if self.eat_keyword("AS") { Some(self.identifier("alias")?) } else { None };
        Ok(TableRef { relation, alias })
    }

    fn column_ref(&mut self, expected: &str) -> PResult<ColumnRef> {
        let first = self.identifier(expected)?;
        if self.eat_symbol(".") {
            let attribute = self.identifier("attribute name")?;
            Ok(ColumnRef { qualifier: Some(first), attribute })
        } else {
            Ok(ColumnRef { qualifier: None, attribute: first })
        }
    }

    fn predicate(&mut self) -> PResult<Predicate> {
        let mut left = self.and_expr()?;
        while self.eat_keyword("OR") {
            left = Predicate::or(left, self.and_expr()?);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> PResult<Predicate> {
        let mut left = self.not_expr()?;
        while self.eat_keyword("AND") {
            left = Predicate::and(left, self.not_expr()?);
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> PResult<Predicate> {
        if self.eat_keyword("NOT") {
            Ok(Predicate::not(self.primary()?))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> PResult<Predicate> {
        if self.peek().is_some_and(|t| t.is_symbol("(")) {
            if self.depth >= MAX_NESTING {
                return self.error("less deeply nested parentheses");
            }
            self.pos += 1;
            self.depth += 1;
            let inner = self.predicate()?;
            self.depth -= 1;
            if !self.eat_symbol(")") {
                return self.error("`)`");
            }
            return Ok(inner);
        }
        let left = self.operand()?;
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Symbol => CompareOp::from_sql(&t.text),
            _ => None,
        };
        let Some(op) = op else {
            return self.error("comparison operator");
        };
        self.pos += 1;
        let right = self.operand()?;
        Ok(Predicate::Comparison { left, op, right })
    }

    fn operand(&mut self) -> PResult<Operand> {
        let Some(t) = self.peek() else {
            return self.error("operand");
        };
        match t.kind {
            TokenKind::Identifier => Ok(Operand::Column(self.column_ref("column")?)),
            TokenKind::IntegerLiteral => {
                // The lexer has already range-checked the digits.
                let v = t.text.parse().unwrap_or_default();
                self.pos += 1;
                Ok(Operand::Integer(v))
            }
            TokenKind::StringLiteral => {
                let s = t.text.clone();
                self.pos += 1;
                Ok(Operand::Text(s))
            }
            _ => self.error("operand (column, integer or string)"),
        }
    }
}

fn describe(t: &Token) -> String {
    match t.kind {
        TokenKind::Keyword => format!("keyword {}", t.text),
        TokenKind::Identifier => format!("identifier {}", t.text),
        TokenKind::IntegerLiteral => format!("integer {}", t.text),
        TokenKind::StringLiteral => format!("string {t}"),
        TokenKind::Symbol => format!("`{}`", t.text),
    }
}
