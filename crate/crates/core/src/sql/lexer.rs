use std::fmt;

use crate::error::{LexError, Position};

pub const KEYWORDS: [&str; 10] = ["SELECT", "FROM", "WHERE", "JOIN", "INNER", "ON", "AND", "OR", "NOT", "AS"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntegerLiteral,
    StringLiteral,
    Symbol,
}

/// A lexeme. Keyword text is upper-cased; string literal text is the
/// unescaped content without quotes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub position: Position,
}

impl Token {
    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == kw
    }

    pub fn is_symbol(&self, sym: &str) -> bool {
        self.kind == TokenKind::Symbol && self.text == sym
    }
}

/// Source form of the token; string literals are re-quoted.
impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::StringLiteral => {
                let mut s = String::new();
                super::ast::sql_quote(&self.text, &mut s);
                f.write_str(&s)
            }
            _ => f.write_str(&self.text),
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(text).run().map(|(tokens, _)| tokens)
}

/// Tokens plus the position just past the end of input.
pub(crate) fn tokenize_with_end(text: &str) -> Result<(Vec<Token>, Position), LexError> {
    Lexer::new(text).run()
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn pos(&self) -> Position {
        Position::new(self.line, self.column)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, s: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
    }

    fn run(mut self) -> Result<(Vec<Token>, Position), LexError> {
        let mut tokens = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let position = self.pos();
            let token = |kind, text| Token { kind, text, position };
            if c.is_whitespace() {
                self.bump();
            } else if c.is_ascii_alphabetic() || c == '_' {
                let mut word = String::new();
                self.take_while(&mut word, |c| c.is_ascii_alphanumeric() || c == '_');
                let upper = word.to_ascii_uppercase();
                tokens.push(if KEYWORDS.contains(&upper.as_str()) {
                    token(TokenKind::Keyword, upper)
                } else {
                    token(TokenKind::Identifier, word)
                });
            } else if c.is_ascii_digit() {
                let mut digits = String::new();
                self.take_while(&mut digits, |c| c.is_ascii_digit());
                if digits.parse::<i64>().is_err() {
                    return Err(LexError { position, message: format!("integer literal {digits} is out of range") });
                }
                tokens.push(token(TokenKind::IntegerLiteral, digits));
            } else if c == '\'' {
                self.bump();
                let mut content = String::new();
                loop {
                    match self.bump() {
                        Some('\'') if self.chars.peek() == Some(&'\'') => {
                            self.bump();
                            content.push('\'');
                        }
                        Some('\'') => break,
                        Some(c) => content.push(c),
                        None => return Err(LexError { position, message: "unterminated string literal".into() }),
                    }
                }
                tokens.push(token(TokenKind::StringLiteral, content));
            } else {
                self.bump();
                let next = self.chars.peek().copied();
                let sym = match (c, next) {
                    ('<', Some('=')) | ('>', Some('=')) | ('<', Some('>')) => {
                        self.bump();
                        format!("{c}{}", next.unwrap_or_default())
                    }
                    ('*' | ',' | '.' | '(' | ')' | '=' | '<' | '>' | ';', _) => c.to_string(),
                    _ => return Err(LexError { position, message: format!("illegal character {c:?}") }),
                };
                tokens.push(token(TokenKind::Symbol, sym));
            }
        }
        let end = self.pos();
        Ok((tokens, end))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<(TokenKind, String)> {
        tokenize(text).unwrap().into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn select_star() {
        use TokenKind::*;
        assert_eq!(
            kinds("SELECT * FROM Doctor"),
            [(Keyword, "SELECT".into()), (Symbol, "*".into()), (Keyword, "FROM".into()), (Identifier, "Doctor".into())]
        );
    }

    #[test]
    fn keywords_case_insensitive_identifiers_not() {
        use TokenKind::*;
        assert_eq!(
            kinds("select Name from doctor"),
            [
                (Keyword, "SELECT".into()),
                (Identifier, "Name".into()),
                (Keyword, "FROM".into()),
                (Identifier, "doctor".into())
            ]
        );
    }

    #[test]
    fn escaped_quote() {
        let toks = tokenize("WHERE name = 'O''Hara'").unwrap();
        assert_eq!(toks[3].kind, TokenKind::StringLiteral);
        assert_eq!(toks[3].text, "O'Hara");
        assert_eq!(toks[3].to_string(), "'O''Hara'");
    }

    #[test]
    fn illegal_character_position() {
        let err = tokenize("SELECT @").unwrap_err();
        assert_eq!(err.position, Position::new(1, 8));
    }

    #[test]
    fn unterminated_string() {
        let err = tokenize("SELECT *\nFROM x WHERE a = 'abc").unwrap_err();
        assert_eq!(err.position, Position::new(2, 18));
        assert!(err.message.contains("unterminated"));
    }

    #[test]
    fn two_char_symbols_and_positions() {
        let toks = tokenize("a<=b <> c>=\n d").unwrap();
        let syms: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(syms, ["a", "<=", "b", "<>", "c", ">=", "d"]);
        assert_eq!(toks[6].position, Position::new(2, 2));
        assert!(toks.windows(2).all(|w| w[0].position <= w[1].position));
    }

    #[test]
    fn integer_overflow_is_an_error() {
        assert!(tokenize("99999999999999999999").is_err());
        assert!(tokenize("9223372036854775807").is_ok());
    }
}
