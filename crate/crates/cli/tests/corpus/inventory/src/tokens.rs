use std::collections::HashMap;
use std::fmt;

/// Kinds of token produced by the lexer.
#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Number(i64),
    Ident(String),
    Op(char),
}

pub struct Lexer {
    chars: Vec<char>,
    pos: usize,
    counts: HashMap<String, usize>,
}

impl Lexer {
    pub fn new(input: &str) -> Self {
        Lexer { chars: input.chars().collect(), pos: 0, counts: HashMap::new() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn number(&mut self) -> i64 {
        let mut value: i64 = 0;
        while let Some(c) = self.peek() {
            if !c.is_ascii_digit() {
                break;
            }
            value = value * 10 + (c as i64 - '0' as i64);
            self.pos += 1;
        }
        value
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.peek().map_or(false, |c| c.is_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        *self.counts.entry(text.clone()).or_insert(0) += 1;
        text
    }

    pub fn tokens(&mut self) -> Vec<Token> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += 1;
            } else if c.is_ascii_digit() {
                out.push(Token::Number(self.number()));
            } else if c.is_alphabetic() || c == '_' {
                out.push(Token::Ident(self.ident()));
            } else {
                out.push(Token::Op(c));
                self.pos += 1;
            }
        }
        out
    }

    pub fn seen(&self, name: &str) -> usize {
        *self.counts.get(name).unwrap_or(&0)
    }
}

// evaluate a flat sum such as "1 + 2 - 3"
pub fn evaluate(tokens: &[Token]) -> i64 {
    let mut total = 0;
    let mut sign = 1;
    for token in tokens {
        match token {
            Token::Number(n) => total += sign * n,
            Token::Op('-') => sign = -1,
            Token::Op('+') => sign = 1,
            _ => {}
        }
    }
    total
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(n) => write!(f, "{}", n),
            Token::Ident(s) => write!(f, "{}", s),
            Token::Op(c) => write!(f, "{}", c),
        }
    }
}

pub fn average(values: &[i64]) -> f64 {
    let count = values.len();
    if count == 0 || values[0] < 0 {
        return 0.0;
    }
    let sum: i64 = values.iter().sum();
    sum as f64 / count as f64
}
