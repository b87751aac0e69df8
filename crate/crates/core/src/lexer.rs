//! Tokenizer for CheckLang source text. Tracks 1-based line/column
//! positions for error reporting; `//` comments run to end of line.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(i64),
    // keywords
    Func,
    Int_,
    Array,
    Alloc,
    Resize,
    Input,
    If,
    Else,
    While,
    For,
    Switch,
    Case,
    Default,
    Return,
    Call,
    Print,
    PrintArray,
    // punctuation and operators
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Comma,
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    AndAnd,
    OrOr,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::Int(v) => write!(f, "integer `{v}`"),
            Token::Func => write!(f, "`func`"),
            Token::Int_ => write!(f, "`int`"),
            Token::Array => write!(f, "`array`"),
            Token::Alloc => write!(f, "`alloc`"),
            Token::Resize => write!(f, "`resize`"),
            Token::Input => write!(f, "`input`"),
            Token::If => write!(f, "`if`"),
            Token::Else => write!(f, "`else`"),
            Token::While => write!(f, "`while`"),
            Token::For => write!(f, "`for`"),
            Token::Switch => write!(f, "`switch`"),
            Token::Case => write!(f, "`case`"),
            Token::Default => write!(f, "`default`"),
            Token::Return => write!(f, "`return`"),
            Token::Call => write!(f, "`call`"),
            Token::Print => write!(f, "`print`"),
            Token::PrintArray => write!(f, "`printa`"),
            Token::LParen => write!(f, "`(`"),
            Token::RParen => write!(f, "`)`"),
            Token::LBrace => write!(f, "`{{`"),
            Token::RBrace => write!(f, "`}}`"),
            Token::LBracket => write!(f, "`[`"),
            Token::RBracket => write!(f, "`]`"),
            Token::Semi => write!(f, "`;`"),
            Token::Colon => write!(f, "`:`"),
            Token::Comma => write!(f, "`,`"),
            Token::Assign => write!(f, "`=`"),
            Token::Eq => write!(f, "`==`"),
            Token::Ne => write!(f, "`!=`"),
            Token::Lt => write!(f, "`<`"),
            Token::Le => write!(f, "`<=`"),
            Token::Gt => write!(f, "`>`"),
            Token::Ge => write!(f, "`>=`"),
            Token::Plus => write!(f, "`+`"),
            Token::Minus => write!(f, "`-`"),
            Token::Star => write!(f, "`*`"),
            Token::Slash => write!(f, "`/`"),
            Token::AndAnd => write!(f, "`&&`"),
            Token::OrOr => write!(f, "`||`"),
            Token::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.pos.line, self.pos.col, self.message)
    }
}

pub fn tokenize(source: &str) -> Result<Vec<(Token, Pos)>, LexError> {
    let mut tokens = Vec::new();
    let mut chars = source.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let Some(&c) = chars.peek() else {
            tokens.push((Token::Eof, pos));
            return Ok(tokens);
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '/' => {
                bump!();
                if chars.peek() == Some(&'/') {
                    while let Some(&n) = chars.peek() {
                        if n == '\n' {
                            break;
                        }
                        bump!();
                    }
                } else {
                    tokens.push((Token::Slash, pos));
                }
            }
            '0'..='9' => {
                let mut value: i64 = 0;
                while let Some(&d) = chars.peek() {
                    if let Some(dv) = d.to_digit(10) {
                        value = value
                            .checked_mul(10)
                            .and_then(|v| v.checked_add(dv as i64))
                            .ok_or_else(|| LexError {
                                pos,
                                message: String::from("integer literal out of range"),
                            })?;
                        bump!();
                    } else {
                        break;
                    }
                }
                tokens.push((Token::Int(value), pos));
            }
            '\'' => {
                bump!();
                let lit = match bump!() {
                    Some('\\') => match bump!() {
                        Some('0') => 0i64,
                        Some('n') => 10,
                        Some('t') => 9,
                        Some('\\') => 92,
                        Some('\'') => 39,
                        _ => {
                            return Err(LexError {
                                pos,
                                message: String::from("unknown escape in character literal"),
                            })
                        }
                    },
                    Some(ch) if ch != '\'' => ch as i64,
                    _ => {
                        return Err(LexError {
                            pos,
                            message: String::from("empty character literal"),
                        })
                    }
                };
                if bump!() != Some('\'') {
                    return Err(LexError {
                        pos,
                        message: String::from("unterminated character literal"),
                    });
                }
                tokens.push((Token::Int(lit), pos));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut ident = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        ident.push(ch);
                        bump!();
                    } else {
                        break;
                    }
                }
                let tok = match ident.as_str() {
                    "func" => Token::Func,
                    "int" => Token::Int_,
                    "array" => Token::Array,
                    "alloc" => Token::Alloc,
                    "resize" => Token::Resize,
                    "input" => Token::Input,
                    "if" => Token::If,
                    "else" => Token::Else,
                    "while" => Token::While,
                    "for" => Token::For,
                    "switch" => Token::Switch,
                    "case" => Token::Case,
                    "default" => Token::Default,
                    "return" => Token::Return,
                    "call" => Token::Call,
                    "print" => Token::Print,
                    "printa" => Token::PrintArray,
                    _ => Token::Ident(ident),
                };
                tokens.push((tok, pos));
            }
            _ => {
                bump!();
                let tok = match c {
                    '(' => Token::LParen,
                    ')' => Token::RParen,
                    '{' => Token::LBrace,
                    '}' => Token::RBrace,
                    '[' => Token::LBracket,
                    ']' => Token::RBracket,
                    ';' => Token::Semi,
                    ':' => Token::Colon,
                    ',' => Token::Comma,
                    '+' => Token::Plus,
                    '-' => Token::Minus,
                    '*' => Token::Star,
                    '=' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            Token::Eq
                        } else {
                            Token::Assign
                        }
                    }
                    '!' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            Token::Ne
                        } else {
                            return Err(LexError {
                                pos,
                                message: String::from("unexpected `!`"),
                            });
                        }
                    }
                    '<' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            Token::Le
                        } else {
                            Token::Lt
                        }
                    }
                    '>' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            Token::Ge
                        } else {
                            Token::Gt
                        }
                    }
                    '&' => {
                        if chars.peek() == Some(&'&') {
                            bump!();
                            Token::AndAnd
                        } else {
                            return Err(LexError {
                                pos,
                                message: String::from("unexpected `&`"),
                            });
                        }
                    }
                    '|' => {
                        if chars.peek() == Some(&'|') {
                            bump!();
                            Token::OrOr
                        } else {
                            return Err(LexError {
                                pos,
                                message: String::from("unexpected `|`"),
                            });
                        }
                    }
                    other => {
                        return Err(LexError {
                            pos,
                            message: alloc::format!("unexpected character `{other}`"),
                        })
                    }
                };
                tokens.push((tok, pos));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn tokenizes_declarations_and_operators() {
        let toks = tokenize("array<int> a = alloc(n + 1); // tail\n").unwrap();
        let kinds: Vec<&Token> = toks.iter().map(|(t, _)| t).collect();
        assert_eq!(
            kinds[..5],
            [
                &Token::Array,
                &Token::Lt,
                &Token::Int_,
                &Token::Gt,
                &Token::Ident(String::from("a"))
            ]
        );
        assert_eq!(*kinds.last().unwrap(), &Token::Eof);
    }

    #[test]
    fn char_literals_become_ints() {
        let toks = tokenize("'<' '>' '\\0'").unwrap();
        let vals: Vec<i64> = toks
            .iter()
            .filter_map(|(t, _)| match t {
                Token::Int(v) => Some(*v),
                _ => None,
            })
            .collect();
        assert_eq!(vals, [60, 62, 0]);
    }

    #[test]
    fn positions_are_tracked() {
        let toks = tokenize("x\n  y").unwrap();
        assert_eq!(toks[0].1, Pos { line: 1, col: 1 });
        assert_eq!(toks[1].1, Pos { line: 2, col: 3 });
    }

    #[test]
    fn bad_character_is_an_error() {
        let err = tokenize("x = ?;").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 5 });
    }
}
