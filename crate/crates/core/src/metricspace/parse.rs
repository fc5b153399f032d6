//! Line-oriented metric specification files.
//!
//! ```text
//! # Sol
//! dim 3
//! coords x y z
//! param k = 2
//! g 0 0 = exp(k*z)
//! g 1 1 = exp(-k*z)
//! g 2 2 = 1
//! domain 2 -2 2
//! ```
//!
//! `dim`, `coords` and every diagonal `g i i` are required. Off-diagonal
//! entries default to zero; either index order is accepted but giving the
//! same pair twice is an error. Two optional directives extend the core
//! format: `name <id>` and `domain <axis> <lo> <hi>` (default box is
//! `[-1, 1]` per axis).

use super::expr::{Expr, Func};
use super::MetricField;
use crate::error::ParseError;
use crate::scalar::MAX_DIM;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

struct Lexed {
    tok: Tok,
    col: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| err(line, col, format!("malformed number `{s}`")))?;
            out.push(Lexed { tok: Tok::Num(v), col });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Lexed { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if "+-*/^()".contains(c) {
            out.push(Lexed { tok: Tok::Op(c), col });
            i += 1;
        } else {
            return Err(err(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    line: usize,
    end_col: usize,
    coords: &'a [String],
    params: &'a [(String, f64)],
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |l| l.col)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(err(self.line, self.col(), format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = lhs + self.term()?;
            } else if self.eat_op('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat_op('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op('-') {
            Ok(-self.unary()?)
        } else if self.eat_op('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        let col = self.col();
        let paren = self.eat_op('(');
        let neg = self.eat_op('-');
        let k = match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => *v as i32,
            _ => return Err(err(self.line, col, "exponent must be an integer literal")),
        };
        self.pos += 1;
        if paren {
            self.expect_op(')')?;
        }
        Ok(base.powi(if neg { -k } else { k }))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::num(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(f) = Func::from_name(&name) {
                    self.expect_op('(')?;
                    let arg = self.expr()?;
                    self.expect_op(')')?;
                    return Ok(Expr::call(f, arg));
                }
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Expr::coord(i));
                }
                if let Some(i) = self.params.iter().position(|(p, _)| *p == name) {
                    return Ok(Expr::param(i));
                }
                Err(err(self.line, col, format!("undeclared identifier `{name}`")))
            }
            Some(Tok::Op(c)) => Err(err(self.line, col, format!("unexpected `{c}`"))),
            None => Err(err(self.line, col, "unexpected end of expression")),
        }
    }
}

/// Parses a standalone expression against the given coordinate and
/// parameter names.
pub fn parse_expr(
    text: &str,
    coords: &[String],
    params: &[(String, f64)],
) -> Result<Expr, ParseError> {
    parse_expr_at(text, 1, 1, coords, params)
}

fn parse_expr_at(
    text: &str,
    line: usize,
    col0: usize,
    coords: &[String],
    params: &[(String, f64)],
) -> Result<Expr, ParseError> {
    let toks = lex(text, line, col0)?;
    let end_col = col0 + text.chars().count();
    let mut p = ExprParser { toks, pos: 0, line, end_col, coords, params };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(err(line, p.col(), "trailing input after expression"));
    }
    Ok(e)
}

fn parse_usize(word: &str, line: usize, col: usize) -> Result<usize, ParseError> {
    word.parse().map_err(|_| err(line, col, format!("expected a non-negative integer, got `{word}`")))
}

fn parse_real(word: &str, line: usize, col: usize) -> Result<f64, ParseError> {
    word.parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| err(line, col, format!("expected a real literal, got `{word}`")))
}

/// Splits a line into whitespace-separated words with their 1-based columns.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, w)| (line[..byte].chars().count() + 1, w))
        .collect()
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
        && Func::from_name(s).is_none()
}

struct PendingEntry {
    i: usize,
    j: usize,
    text_col: usize,
    text: String,
    line: usize,
}

/// Parses a metric specification document.
pub fn parse_metric_spec(src: &str) -> Result<MetricField, ParseError> {
    if src.trim().is_empty() {
        return Err(err(1, 1, "empty metric specification"));
    }
    let mut dim: Option<usize> = None;
    let mut coords: Option<Vec<String>> = None;
    let mut params: Vec<(String, f64)> = Vec::new();
    let mut name = String::from("custom");
    let mut domain_overrides: Vec<(usize, f64, f64, usize)> = Vec::new();
    let mut entries: Vec<PendingEntry> = Vec::new();
    let mut last_line = 1;

    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let ws = words(content);
        let Some(&(kw_col, kw)) = ws.first() else { continue };
        match kw {
            "dim" => {
                if ws.len() != 2 {
                    return Err(err(line, kw_col, "expected `dim <n>`"));
                }
                let n = parse_usize(ws[1].1, line, ws[1].0)?;
                if n == 0 || n > MAX_DIM {
                    return Err(err(line, ws[1].0, format!("dimension must be in 1..={MAX_DIM}")));
                }
                if dim.replace(n).is_some() {
                    return Err(err(line, kw_col, "duplicate `dim`"));
                }
            }
            "coords" => {
                let names: Vec<String> = ws[1..].iter().map(|(_, w)| w.to_string()).collect();
                for (col, w) in &ws[1..] {
                    if !is_ident(w) {
                        return Err(err(line, *col, format!("invalid coordinate name `{w}`")));
                    }
                }
                if let Some(n) = dim {
                    if names.len() != n {
                        return Err(err(
                            line,
                            kw_col,
                            format!("dim mismatch: {} coordinates for dim {n}", names.len()),
                        ));
                    }
                }
                if coords.replace(names).is_some() {
                    return Err(err(line, kw_col, "duplicate `coords`"));
                }
            }
            "param" => {
                // param <id> = <literal>
                let rest = &content[content.find("param").unwrap() + 5..];
                let Some(eq) = rest.find('=') else {
                    return Err(err(line, kw_col, "expected `param <id> = <literal>`"));
                };
                let id = rest[..eq].trim();
                let val = rest[eq + 1..].trim();
                if !is_ident(id) {
                    return Err(err(line, kw_col + 6, format!("invalid parameter name `{id}`")));
                }
                let v = parse_real(val, line, kw_col)?;
                if params.iter().any(|(p, _)| p == id) {
                    return Err(err(line, kw_col, format!("duplicate parameter `{id}`")));
                }
                params.push((id.to_string(), v));
            }
            "name" => {
                if ws.len() != 2 {
                    return Err(err(line, kw_col, "expected `name <id>`"));
                }
                name = ws[1].1.to_string();
            }
            "domain" => {
                if ws.len() != 4 {
                    return Err(err(line, kw_col, "expected `domain <axis> <lo> <hi>`"));
                }
                let axis = parse_usize(ws[1].1, line, ws[1].0)?;
                let lo = parse_real(ws[2].1, line, ws[2].0)?;
                let hi = parse_real(ws[3].1, line, ws[3].0)?;
                domain_overrides.push((axis, lo, hi, line));
            }
            "g" => {
                let Some(eq_byte) = content.find('=') else {
                    return Err(err(line, kw_col, "expected `g <i> <j> = <expression>`"));
                };
                let head = words(&content[..eq_byte]);
                if head.len() != 3 {
                    return Err(err(line, kw_col, "expected `g <i> <j> = <expression>`"));
                }
                let i = parse_usize(head[1].1, line, head[1].0)?;
                let j = parse_usize(head[2].1, line, head[2].0)?;
                let text_col = content[..eq_byte + 1].chars().count() + 1;
                entries.push(PendingEntry {
                    i,
                    j,
                    text_col,
                    text: content[eq_byte + 1..].to_string(),
                    line,
                });
            }
            other => return Err(err(line, kw_col, format!("unknown directive `{other}`"))),
        }
    }

    let n = dim.ok_or_else(|| err(last_line, 1, "missing `dim`"))?;
    let coords = coords.ok_or_else(|| err(last_line, 1, "missing `coords`"))?;
    if coords.len() != n {
        return Err(err(last_line, 1, format!("dim mismatch: {} coordinates for dim {n}", coords.len())));
    }
    let mut seen = vec![false; n * n];
    let mut packed: Vec<Option<Expr>> = vec![None; n * (n + 1) / 2];
    for e in entries {
        if e.i >= n || e.j >= n {
            return Err(err(e.line, 1, format!("dim mismatch: index ({}, {}) for dim {n}", e.i, e.j)));
        }
        let (a, b) = if e.i <= e.j { (e.i, e.j) } else { (e.j, e.i) };
        if seen[a * n + b] {
            return Err(err(e.line, 1, format!("conflicting definition of g {a} {b}")));
        }
        seen[a * n + b] = true;
        let expr = parse_expr_at(&e.text, e.line, e.text_col, &coords, &params)?;
        packed[super::packed_index(n, a, b)] = Some(expr);
    }
    for i in 0..n {
        if packed[super::packed_index(n, i, i)].is_none() {
            return Err(err(last_line, 1, format!("missing diagonal entry g {i} {i}")));
        }
    }
    let entries: Vec<Expr> = packed.into_iter().map(|e| e.unwrap_or(Expr::num(0.0))).collect();
    let mut domain = vec![(-1.0, 1.0); n];
    for (axis, lo, hi, line) in domain_overrides {
        if axis >= n {
            return Err(err(line, 1, format!("dim mismatch: domain axis {axis} for dim {n}")));
        }
        domain[axis] = (lo, hi);
    }
    Ok(MetricField::from_parts(name, coords, params, domain, entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_constant() {
        let m = parse_metric_spec("dim 1\ncoords t\ng 0 0 = 1\n").unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.eval(&[0.3]).unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn off_diagonal_is_mirrored() {
        let m = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = 2\ng 1 1 = 2\ng 0 1 = x\n").unwrap();
        let g = m.eval(&[0.5, 0.1]).unwrap();
        assert_eq!(g[(0, 1)], 0.5);
        assert_eq!(g[(1, 0)], 0.5);
    }

    #[test]
    fn precedence_and_powers() {
        let coords = vec!["x".to_string()];
        let e = parse_expr("-x^2 + 2*x^-1 - (x)^(2)/4", &coords, &[]).unwrap();
        let x: f64 = 2.0;
        let want = -x.powi(2) + 2.0 / x - x.powi(2) / 4.0;
        assert_eq!(e.eval(&[x], &[]).unwrap(), want);
        let e = parse_expr("1e-3*x + 2.5E2", &coords, &[]).unwrap();
        assert_eq!(e.eval(&[1.0], &[]).unwrap(), 1e-3 + 250.0);
    }

    #[test]
    fn diagnostics_carry_positions() {
        let e = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = 1 + q\ng 1 1 = 1\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 13));
        assert!(e.message.contains("undeclared"));

        let e = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = (1 + x\ng 1 1 = 1\n").unwrap_err();
        assert_eq!(e.line, 3);

        let e = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = 1\n").unwrap_err();
        assert!(e.message.contains("missing diagonal"));

        let e = parse_metric_spec("dim 3\ncoords x y\n").unwrap_err();
        assert!(e.message.contains("dim mismatch"));

        let e = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = 1\ng 1 1 = 1\ng 0 1 = x\ng 1 0 = y\n")
            .unwrap_err();
        assert!(e.message.contains("conflicting"));

        let e = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = 1\ng 1 1 = 1\ng 0 2 = x\n").unwrap_err();
        assert!(e.message.contains("dim mismatch"));

        assert!(parse_metric_spec("   \n").is_err());
    }

    #[test]
    fn params_and_comments() {
        let src = "# hyperbolic plane\ndim 2\ncoords x y\nparam c = -1 # curvature\n\
                   g 0 0 = (1 + c/4*(x^2+y^2))^-2\ng 1 1 = (1 + c/4*(x^2+y^2))^-2\n";
        let m = parse_metric_spec(src).unwrap();
        let g = m.eval(&[0.5, 0.5]).unwrap();
        let want = (1.0f64 - 0.125).powi(-2);
        assert!((g[(0, 0)] - want).abs() < 1e-15);
    }
}
