//! Phase expressions (`pi/3`, `2pi/3`, `1.5*2pi/3`, `-0.2`) and grids
//! (`start:stop:count`, `log:start:stop:count`).

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Pi,
    Plus,
    Minus,
    Star,
    Slash,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1
            }
            '-' => {
                out.push(Token::Minus);
                i += 1
            }
            '*' => {
                out.push(Token::Star);
                i += 1
            }
            '/' => {
                out.push(Token::Slash);
                i += 1
            }
            '(' => {
                out.push(Token::Open);
                i += 1
            }
            ')' => {
                out.push(Token::Close);
                i += 1
            }
            'p' | 'P' if chars.get(i + 1).is_some_and(|n| n.eq_ignore_ascii_case(&'i')) => {
                out.push(Token::Pi);
                i += 2
            }
            'π' => {
                out.push(Token::Pi);
                i += 1
            }
            d if d.is_ascii_digit() || d == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent only when digits follow, so "2e" is never eaten
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse::<f64>().map_err(|_| format!("bad number '{text}'"))?;
                out.push(Token::Num(v));
            }
            other => return Err(format!("unexpected character '{other}'")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Token::Plus => {
                    self.pos += 1;
                    v += self.term()?;
                }
                Token::Minus => {
                    self.pos += 1;
                    v -= self.term()?;
                }
                _ => break,
            }
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    v *= self.factor()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let d = self.factor()?;
                    if d == 0.0 {
                        return Err("division by zero".into());
                    }
                    v /= d;
                }
                Some(Token::Num(_)) | Some(Token::Pi) | Some(Token::Open) => v *= self.factor()?,
                _ => return Ok(v),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, String> {
        match self.next() {
            Some(Token::Minus) => Ok(-self.factor()?),
            Some(Token::Plus) => self.factor(),
            Some(Token::Num(v)) => Ok(v),
            Some(Token::Pi) => Ok(PI),
            Some(Token::Open) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(v),
                    _ => Err("missing ')'".into()),
                }
            }
            Some(t) => Err(format!("unexpected {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// Evaluates an arithmetic expression over numbers and `pi`.
pub fn parse_expr(src: &str) -> Result<f64, String> {
    let tokens = tokenize(src).map_err(|e| format!("'{src}': {e}"))?;
    if tokens.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { tokens, pos: 0 };
    let v = p.expr().map_err(|e| format!("'{src}': {e}"))?;
    if p.pos != p.tokens.len() {
        return Err(format!("'{src}': trailing input"));
    }
    if !v.is_finite() {
        return Err(format!("'{src}' is not finite"));
    }
    Ok(v)
}

/// Inclusive grid. `count = 1` gives just `start`.
pub fn parse_grid(src: &str) -> Result<Vec<f64>, String> {
    let (log, body) = match src.trim().strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, src.trim()),
    };
    let parts: Vec<&str> = body.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid '{src}' must be start:stop:count (optionally prefixed by log:)"));
    }
    let start = parse_expr(parts[0])?;
    let stop = parse_expr(parts[1])?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("grid '{src}': count '{}' is not a positive integer", parts[2]))?;
    if count == 0 {
        return Err(format!("grid '{src}': count must be at least 1"));
    }
    if count > 1 && !(stop > start) {
        return Err(format!("grid '{src}': stop must exceed start"));
    }
    if log && !(start > 0.0) {
        return Err(format!("grid '{src}': log grids need a positive start"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let s = i as f64 / last;
            match (log, i) {
                (_, 0) => start,
                (_, i) if i == count - 1 => stop,
                (true, _) => start * (stop / start).powf(s),
                (false, _) => start + (stop - start) * s,
            }
        })
        .collect())
}

/// Comma-separated list of expressions.
pub fn parse_list(src: &str) -> Result<Vec<f64>, String> {
    src.split(',').map(parse_expr).collect()
}
