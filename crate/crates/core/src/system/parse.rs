//! Text format for problem files.
//!
//! ```text
//! # comment
//! dims m=2 n=1 p=1
//! anchor y0=(1,0) x0=(1)
//! eq: y1^2 + y2^2 - x1
//! ```
//!
//! `dims` and `anchor` are optional for [`parse_system`]; without `dims` the
//! sizes are inferred from the largest variable indices and the number of
//! `eq:` lines. Variables are 1-indexed.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::{Anchor, ParameterizedSystem, PolyTerm, DEFAULT_MAX_DEGREE};

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub system: ParameterizedSystem,
    pub anchor: Option<Anchor>,
}

pub fn parse_system(text: &str) -> Result<ParameterizedSystem> {
    parse_system_with(text, DEFAULT_MAX_DEGREE)
}

pub fn parse_system_with(text: &str, max_degree: u32) -> Result<ParameterizedSystem> {
    parse_problem_with(text, max_degree).map(|pf| pf.system)
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    parse_problem_with(text, DEFAULT_MAX_DEGREE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Y(usize),
    X(usize),
}

#[derive(Debug)]
struct RawTerm {
    coefficient: f64,
    factors: Vec<(Var, u32)>,
}

#[derive(Default)]
struct Dims {
    m: Option<usize>,
    n: Option<usize>,
    p: Option<usize>,
}

fn parse_problem_with(text: &str, max_degree: u32) -> Result<ProblemFile> {
    let mut dims: Option<(usize, Dims)> = None;
    let mut anchor: Option<(usize, Vec<f64>, Vec<f64>)> = None;
    let mut equations: Vec<(usize, Vec<RawTerm>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut cur = Cursor::new(raw, line_no);
        cur.skip_ws();
        if cur.at_end() || cur.peek() == Some('#') {
            continue;
        }
        let keyword_col = cur.col();
        let keyword = cur.word();
        match keyword.as_str() {
            "dims" => {
                if dims.is_some() {
                    return Err(cur.error_at(keyword_col, "duplicate `dims` line"));
                }
                dims = Some((line_no, parse_dims(&mut cur)?));
            }
            "anchor" => {
                if anchor.is_some() {
                    return Err(cur.error_at(keyword_col, "duplicate `anchor` line"));
                }
                let (y0, x0) = parse_anchor(&mut cur)?;
                anchor = Some((line_no, y0, x0));
            }
            "eq" => {
                cur.skip_ws();
                cur.expect(':')?;
                equations.push((line_no, parse_expression(&mut cur)?));
            }
            "" => return Err(cur.error_at(keyword_col, "expected `dims`, `anchor` or `eq:`")),
            other => {
                return Err(cur.error_at(keyword_col, &format!("unknown directive `{other}`")));
            }
        }
    }

    if equations.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            column: 1,
            message: "no `eq:` lines".into(),
        });
    }

    let (max_y, max_x) = equations
        .iter()
        .flat_map(|(_, terms)| terms.iter().flat_map(|t| t.factors.iter()))
        .fold((0, 0), |(my, mx), (v, _)| match *v {
            Var::Y(i) => (my.max(i), mx),
            Var::X(j) => (my, mx.max(j)),
        });

    let (m, n) = match &dims {
        Some((line, d)) => {
            let m = d.m.unwrap_or(max_y);
            let n = d.n.unwrap_or(max_x);
            if max_y > m || max_x > n {
                return Err(Error::DimensionMismatch(format!(
                    "line {line}: variables reach y{max_y}/x{max_x} but dims declare m={m} n={n}"
                )));
            }
            if let Some(p) = d.p {
                if p != equations.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "line {line}: dims declare p={p} but {} equations follow",
                        equations.len()
                    )));
                }
            }
            (m, n)
        }
        None => (max_y, max_x),
    };
    if m == 0 || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "system needs m >= 1 and n >= 1, got m={m} n={n}"
        )));
    }

    let equations: Vec<Vec<PolyTerm>> = equations
        .into_iter()
        .map(|(_, terms)| {
            terms
                .into_iter()
                .map(|t| {
                    let mut term = PolyTerm::constant(t.coefficient, m, n);
                    for (var, e) in t.factors {
                        match var {
                            Var::Y(i) => term.y_exponents[i - 1] += e,
                            Var::X(j) => term.x_exponents[j - 1] += e,
                        }
                    }
                    term
                })
                .collect()
        })
        .collect();

    let system = ParameterizedSystem::with_max_degree("unnamed", m, n, equations, max_degree)?;

    let anchor = match anchor {
        Some((line, y0, x0)) => {
            if y0.len() != m || x0.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "line {line}: anchor has dims ({}, {}), system has ({m}, {n})",
                    y0.len(),
                    x0.len()
                )));
            }
            Some(Anchor::new(y0, x0))
        }
        None => None,
    };

    Ok(ProblemFile { system, anchor })
}

fn parse_dims(cur: &mut Cursor) -> Result<Dims> {
    let mut d = Dims::default();
    loop {
        cur.skip_ws();
        if cur.at_end() {
            return Ok(d);
        }
        let col = cur.col();
        let key = cur.word();
        cur.skip_ws();
        cur.expect('=')?;
        cur.skip_ws();
        let value = cur
            .uint()
            .ok_or_else(|| cur.error_here("expected a nonnegative integer"))? as usize;
        let slot = match key.as_str() {
            "m" => &mut d.m,
            "n" => &mut d.n,
            "p" => &mut d.p,
            _ => return Err(cur.error_at(col, "expected `m`, `n` or `p`")),
        };
        if slot.replace(value).is_some() {
            return Err(cur.error_at(col, &format!("`{key}` given twice")));
        }
    }
}

fn parse_anchor(cur: &mut Cursor) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut y0 = None;
    let mut x0 = None;
    loop {
        cur.skip_ws();
        if cur.at_end() {
            break;
        }
        let col = cur.col();
        let key = cur.word();
        cur.skip_ws();
        cur.expect('=')?;
        let v = parse_vector(cur)?;
        let slot = match key.as_str() {
            "y0" => &mut y0,
            "x0" => &mut x0,
            _ => return Err(cur.error_at(col, "expected `y0` or `x0`")),
        };
        if slot.replace(v).is_some() {
            return Err(cur.error_at(col, &format!("`{key}` given twice")));
        }
    }
    match (y0, x0) {
        (Some(y0), Some(x0)) => Ok((y0, x0)),
        _ => Err(cur.error_here("anchor needs both `y0=(...)` and `x0=(...)`")),
    }
}

fn parse_vector(cur: &mut Cursor) -> Result<Vec<f64>> {
    cur.skip_ws();
    cur.expect('(')?;
    let mut out = Vec::new();
    loop {
        cur.skip_ws();
        let neg = match cur.peek() {
            Some('-') => {
                cur.bump();
                true
            }
            Some('+') => {
                cur.bump();
                false
            }
            _ => false,
        };
        cur.skip_ws();
        let v = cur.number()?.ok_or_else(|| cur.error_here("expected a number"))?;
        out.push(if neg { -v } else { v });
        cur.skip_ws();
        match cur.peek() {
            Some(',') => {
                cur.bump();
            }
            Some(')') => {
                cur.bump();
                return Ok(out);
            }
            _ => return Err(cur.error_here("expected `,` or `)`")),
        }
    }
}

fn parse_expression(cur: &mut Cursor) -> Result<Vec<RawTerm>> {
    let mut terms = Vec::new();
    cur.skip_ws();
    let mut sign = 1.0;
    match cur.peek() {
        Some('-') => {
            sign = -1.0;
            cur.bump();
        }
        Some('+') => {
            cur.bump();
        }
        _ => {}
    }
    loop {
        let mut term = parse_term(cur)?;
        term.coefficient *= sign;
        terms.push(term);
        cur.skip_ws();
        match cur.peek() {
            None => return Ok(terms),
            Some('+') => sign = 1.0,
            Some('-') => sign = -1.0,
            Some(_) => return Err(cur.error_here("expected `+`, `-` or end of line")),
        }
        cur.bump();
    }
}

fn parse_term(cur: &mut Cursor) -> Result<RawTerm> {
    cur.skip_ws();
    let start = cur.col();
    let coefficient = cur.number()?;
    let mut factors = Vec::new();
    loop {
        cur.skip_ws();
        let had_star = cur.peek() == Some('*');
        if had_star {
            cur.bump();
            cur.skip_ws();
        }
        let var_col = cur.col();
        let kind = match cur.peek() {
            Some('y') => Var::Y as fn(usize) -> Var,
            Some('x') => Var::X as fn(usize) -> Var,
            _ if had_star => return Err(cur.error_here("expected a variable after `*`")),
            _ => break,
        };
        cur.bump();
        let index = cur.uint().ok_or_else(|| cur.error_here("expected a variable index"))?;
        if index == 0 {
            return Err(cur.error_at(var_col, "variables are 1-indexed"));
        }
        cur.skip_ws();
        let mut exponent = 1;
        if cur.peek() == Some('^') {
            let caret = cur.col();
            cur.bump();
            cur.skip_ws();
            exponent = cur
                .uint()
                .ok_or_else(|| cur.error_at(caret, "missing exponent after `^`"))?;
        }
        factors.push((kind(index as usize), exponent));
    }
    if coefficient.is_none() && factors.is_empty() {
        return Err(cur.error_at(start, "expected a term"));
    }
    Ok(RawTerm {
        coefficient: coefficient.unwrap_or(1.0),
        factors,
    })
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(&format!("expected `{c}`")))
        }
    }

    fn uint(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().ok()
    }

    /// An unsigned decimal literal with optional fraction and exponent.
    fn number(&mut self) -> Result<Option<f64>> {
        let start = self.pos;
        let digit = |c: Option<char>| c.is_some_and(|c| c.is_ascii_digit());
        while digit(self.peek()) {
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while digit(self.peek()) {
                self.pos += 1;
            }
        }
        if self.pos == start {
            return Ok(None);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if digit(self.peek()) {
                while digit(self.peek()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(self.error_at(start + 1, &format!("invalid number `{s}`"))),
        }
    }

    fn error_at(&self, column: usize, message: &str) -> Error {
        Error::Parse {
            line: self.line,
            column,
            message: message.to_string(),
        }
    }

    fn error_here(&self, message: &str) -> Error {
        self.error_at(self.col(), message)
    }
}

fn format_term(out: &mut String, term: &PolyTerm, first: bool) {
    let c = term.coefficient;
    let negative = c.is_sign_negative() && c != 0.0;
    match (first, negative) {
        (true, true) => out.push('-'),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
    let mut factors = Vec::new();
    for (i, &e) in term.y_exponents.iter().enumerate() {
        match e {
            0 => {}
            1 => factors.push(format!("y{}", i + 1)),
            _ => factors.push(format!("y{}^{e}", i + 1)),
        }
    }
    for (j, &e) in term.x_exponents.iter().enumerate() {
        match e {
            0 => {}
            1 => factors.push(format!("x{}", j + 1)),
            _ => factors.push(format!("x{}^{e}", j + 1)),
        }
    }
    let magnitude = c.abs();
    if factors.is_empty() {
        let _ = write!(out, "{magnitude}");
    } else {
        if magnitude != 1.0 {
            let _ = write!(out, "{magnitude} ");
        }
        out.push_str(&factors.join(" "));
    }
}

pub(super) fn serialize_system(sys: &ParameterizedSystem) -> String {
    let mut out = format!("dims m={} n={} p={}\n", sys.m(), sys.n(), sys.p());
    write_equations(&mut out, sys);
    out
}

/// Canonical text of a system with its anchor.
pub fn serialize_problem(sys: &ParameterizedSystem, anchor: &Anchor) -> String {
    let vec = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
    let mut out = format!("dims m={} n={} p={}\n", sys.m(), sys.n(), sys.p());
    let _ = writeln!(out, "anchor y0=({}) x0=({})", vec(&anchor.y0), vec(&anchor.x0));
    write_equations(&mut out, sys);
    out
}

fn write_equations(out: &mut String, sys: &ParameterizedSystem) {
    for eq in sys.equations() {
        out.push_str("eq: ");
        if eq.is_empty() {
            out.push('0');
        }
        for (k, term) in eq.iter().enumerate() {
            format_term(out, term, k == 0);
        }
        out.push('\n');
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_circle() {
        let sys = parse_system("eq: y1^2 + y2^2 - x1").unwrap();
        assert_eq!((sys.m(), sys.n(), sys.p()), (2, 1, 1));
        let coeffs: Vec<f64> = sys.equations()[0].iter().map(|t| t.coefficient).collect();
        assert_eq!(coeffs, vec![1.0, 1.0, -1.0]);
        assert_eq!(sys.equations()[0][0].y_exponents, vec![2, 0]);
        assert_eq!(sys.equations()[0][2].x_exponents, vec![1]);
    }

    #[test]
    fn reads_product_term() {
        let sys = parse_system("eq: 2 y1 x1").unwrap();
        let t = &sys.equations()[0][0];
        assert_eq!(t.coefficient, 2.0);
        assert_eq!(t.y_exponents, vec![1]);
        assert_eq!(t.x_exponents, vec![1]);
    }

    #[test]
    fn whitespace_and_stars_are_optional() {
        let a = parse_system("eq:-1.5e-1*y1^ 2*x2+3").unwrap();
        let b = parse_system("eq:  - 0.15 y1 ^2 x2 + 3").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 2);
    }

    #[test]
    fn dangling_caret_points_at_the_caret() {
        let err = parse_system("eq: y1^").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 1,
                column: 7,
                message: "missing exponent after `^`".into()
            }
        );
    }

    #[test]
    fn other_syntax_errors() {
        for (src, col) in [
            ("eq: y0 + x1", 5),
            ("eq: y1 + ", 10),
            ("eq: y1 x1 z", 11),
            ("eq: 2 * + x1", 9),
            ("eq y1", 4),
        ] {
            match parse_system(src) {
                Err(Error::Parse { column, .. }) => assert_eq!(column, col, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
        assert!(matches!(parse_system("# nothing\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_system("eq: y1 - x1\nbogus"),
            Err(Error::Parse { line: 2, column: 1, .. })
        ));
    }

    #[test]
    fn dims_are_checked() {
        assert!(matches!(
            parse_system("dims m=1 n=1 p=1\neq: y2 - x1"),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            parse_system("dims m=2 n=1 p=2\neq: y2 - x1"),
            Err(Error::DimensionMismatch(_))
        ));
        let wide = parse_system("dims m=2 n=2 p=1\neq: y1^2 + y2^2 - x1").unwrap();
        assert_eq!(wide.n(), 2);
        assert_eq!(wide.equations()[0][2].x_exponents, vec![1, 0]);
    }

    #[test]
    fn full_problem_file() {
        let text = "# circle\ndims m=2 n=1 p=1\nanchor y0=(1,0) x0=(1)\neq: y1^2 + y2^2 - x1\n";
        let pf = parse_problem(text).unwrap();
        assert_eq!(pf.anchor, Some(Anchor::new(vec![1.0, 0.0], vec![1.0])));
        assert_eq!(serialize_problem(&pf.system, pf.anchor.as_ref().unwrap()), text[9..]);
        let bad = "dims m=2 n=1 p=1\nanchor y0=(1) x0=(1)\neq: y1 + y2 - x1\n";
        assert!(matches!(parse_problem(bad), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn canonical_form_round_trips() {
        let sys = parse_system("eq: -y1^2 x1 + 0.5 - 2 y2\neq: y1 y2 - 1e-3 x1^3").unwrap();
        let text = sys.to_string();
        assert_eq!(
            text,
            "dims m=2 n=1 p=2\neq: -y1^2 x1 + 0.5 - 2 y2\neq: y1 y2 - 0.001 x1^3\n"
        );
        assert_eq!(parse_system(&text).unwrap(), sys);
    }

    #[test]
    fn degree_cap_applies_to_parsed_terms() {
        assert!(parse_system("eq: y1^4 x1^3").is_err());
        assert!(parse_system_with("eq: y1^4 x1^3", 7).is_ok());
    }
}
