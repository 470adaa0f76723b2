//! Position-tracking s-expression reader.

use super::{ErrorKind, PddlError, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Symbol { text: String, pos: Pos },
    List { items: Vec<SExpr>, pos: Pos },
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol { pos, .. } | SExpr::List { pos, .. } => *pos,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Symbol { .. } => None,
        }
    }

    pub fn expect_symbol(&self, what: &str) -> Result<&str, PddlError> {
        self.as_symbol()
            .ok_or_else(|| PddlError::new(ErrorKind::Syntax(format!("expected {what}, found a list")), self.pos()))
    }

    pub fn expect_list(&self, what: &str) -> Result<&[SExpr], PddlError> {
        self.as_list().ok_or_else(|| {
            PddlError::new(
                ErrorKind::Syntax(format!("expected {what}, found `{}`", self.as_symbol().unwrap_or(""))),
                self.pos(),
            )
        })
    }

    /// Head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(SExpr::as_symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open(Pos),
    Close(Pos),
    Symbol(String, Pos),
}

fn symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '?' | ':' | '.' | '=' | '<' | '>' | '*' | '/' | '+' | '!')
}

fn tokenize(text: &str) -> Result<Vec<Token>, PddlError> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                tokens.push(Token::Open(pos));
            }
            ')' => {
                chars.next();
                col += 1;
                tokens.push(Token::Close(pos));
            }
            c if symbol_char(c) => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !symbol_char(c) {
                        break;
                    }
                    s.push(c.to_ascii_lowercase());
                    chars.next();
                    col += 1;
                }
                tokens.push(Token::Symbol(s, pos));
            }
            other => {
                return Err(PddlError::new(
                    ErrorKind::Lexical(format!("unexpected character `{other}`")),
                    pos,
                ))
            }
        }
    }
    Ok(tokens)
}

/// Reads every top-level expression in `text`. Symbols are lower-cased.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, PddlError> {
    let tokens = tokenize(text)?;
    let mut stack: Vec<(Pos, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    for tok in tokens {
        match tok {
            Token::Open(pos) => stack.push((pos, Vec::new())),
            Token::Close(pos) => {
                let (open, items) = stack
                    .pop()
                    .ok_or_else(|| PddlError::new(ErrorKind::Syntax("unbalanced `)`".into()), pos))?;
                let list = SExpr::List { items, pos: open };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(list),
                    None => top.push(list),
                }
            }
            Token::Symbol(text, pos) => {
                let sym = SExpr::Symbol { text, pos };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(sym),
                    None => top.push(sym),
                }
            }
        }
    }
    if let Some((pos, _)) = stack.pop() {
        return Err(PddlError::new(ErrorKind::Syntax("unclosed `(`".into()), pos));
    }
    Ok(top)
}

/// Reads exactly one expression.
pub fn read_one(text: &str) -> Result<SExpr, PddlError> {
    let mut all = read_all(text)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        0 => Err(PddlError::new(ErrorKind::Syntax("empty input".into()), Pos { line: 1, col: 1 })),
        _ => Err(PddlError::new(
            ErrorKind::Syntax("trailing content after definition".into()),
            all[1].pos(),
        )),
    }
}
