//! Textual unit expressions.
//!
//! ```text
//! expr  := term (('*' | '·' | '/') term)*
//! term  := atom ('^' int)?
//! atom  := ident | '(' expr ')' | '1'
//! int   := ('+' | '-')? digit+
//! ```
//!
//! An identifier names a prefixed base unit. It resolves, in order, as an
//! exact base unit symbol; as an underscore form `p1_p2_..._base` where each
//! segment is a prefix symbol, optionally preceded by `~` for its inverse;
//! and finally by greedy splitting: the longest base unit suffix whose
//! remaining head tokenizes into prefix symbols, longest prefix first.

use crate::error::ParseError;
use crate::model::{is_symbol_char, Dimension, EvaluatedUnit, NormalizedUnit, PreUnit, Prefix, Unit, UnitSystem};
use crate::numeric::Magnitude;
use crate::ExponentMap;
use crate::Symbol;

/// Replaces look-alike code points with the ones used in the bundled data:
/// GREEK SMALL MU becomes MICRO SIGN and OHM SIGN becomes GREEK CAPITAL OMEGA.
pub fn canonical_text(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '\u{03BC}' => '\u{00B5}',
            '\u{2126}' => '\u{03A9}',
            other => other,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(String),
    Star,
    Slash,
    Caret,
    Plus,
    Minus,
    Open,
    Close,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Int(s) => format!("number `{s}`"),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &[char]) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let c = text[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '*' | '·' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '(' => Tok::Open,
            ')' => Tok::Close,
            c if c.is_ascii_digit() => {
                while i < text.len() && text[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(text[start..i].iter().collect()), start));
                continue;
            }
            c if is_symbol_char(c) || c == '~' => {
                while i < text.len() && (is_symbol_char(text[i]) || text[i] == '~') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].iter().collect()), start));
                continue;
            }
            other => {
                return Err(ParseError::Unexpected {
                    found: format!("character `{other}`"),
                    expected: "a unit expression",
                    position: start,
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a, T> {
    sys: &'a UnitSystem<T>,
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl<T: Magnitude> Parser<'_, T> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError::Unexpected {
            found: describe(self.peek()),
            expected,
            position: self.pos(),
        }
    }

    fn expr(&mut self) -> Result<Unit, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.term()?);
                }
                Tok::Slash => {
                    self.bump();
                    acc = acc.mul(&self.term()?.inv());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Unit, ParseError> {
        let base = self.atom()?;
        if self.peek() != &Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let position = self.pos();
        let negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let digits = match self.peek() {
            Tok::Int(d) => d.clone(),
            _ => return Err(self.unexpected("an integer exponent")),
        };
        self.bump();
        let magnitude: i64 = digits.parse().map_err(|_| ParseError::Exponent { position })?;
        Ok(base.pow(if negative { -magnitude } else { magnitude }))
    }

    fn atom(&mut self) -> Result<Unit, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let position = self.pos();
                self.bump();
                resolve(self.sys, &name)
                    .map(Unit::delta)
                    .ok_or(ParseError::UnknownIdentifier { ident: name, position })
            }
            Tok::Int(d) if d == "1" => {
                self.bump();
                Ok(Unit::new())
            }
            Tok::Open => {
                self.bump();
                let inner = self.expr()?;
                if self.peek() != &Tok::Close {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.unexpected("a unit, `1` or `(`")),
        }
    }
}

/// Parses a unit expression against the symbols of `sys`.
pub fn parse_unit<T: Magnitude>(sys: &UnitSystem<T>, text: &str) -> Result<Unit, ParseError> {
    let chars: Vec<char> = canonical_text(text).chars().collect();
    let mut p = Parser {
        sys,
        toks: lex(&chars)?,
        at: 0,
    };
    let unit = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.unexpected("`*`, `/` or end of input"));
    }
    Ok(unit)
}

/// Resolves a single identifier to a prefixed base unit.
pub fn resolve<T: Magnitude>(sys: &UnitSystem<T>, ident: &str) -> Option<PreUnit> {
    let ident = canonical_text(ident);
    if let Some(base) = sys.unit_symbol(&ident) {
        return Some(PreUnit::bare(base.clone()));
    }
    if ident.contains('_') {
        if let Some(p) = resolve_underscored(sys, &ident) {
            return Some(p);
        }
    }
    if ident.contains('~') {
        return None;
    }
    resolve_greedy(sys, &ident)
}

fn resolve_underscored<T: Magnitude>(sys: &UnitSystem<T>, ident: &str) -> Option<PreUnit> {
    let segments: Vec<&str> = ident.split('_').collect();
    for k in 1..segments.len() {
        let base = segments[k..].join("_");
        let Some(base) = sys.unit_symbol(&base) else {
            continue;
        };
        let mut prefix = Vec::new();
        for seg in &segments[..k] {
            let (sym, z) = match seg.strip_prefix('~') {
                Some(rest) => (rest, -1),
                None => (*seg, 1),
            };
            match sys.prefix_symbol(sym) {
                Some(p) => prefix.push((p.clone(), z)),
                None => break,
            }
        }
        if prefix.len() == k {
            return Some(PreUnit::new(prefix.into_iter().collect(), base.clone()));
        }
    }
    None
}

fn resolve_greedy<T: Magnitude>(sys: &UnitSystem<T>, ident: &str) -> Option<PreUnit> {
    let bounds: Vec<usize> = ident.char_indices().map(|(i, _)| i).skip(1).collect();
    for split in bounds {
        let (head, tail) = ident.split_at(split);
        if let Some(base) = sys.unit_symbol(tail) {
            if let Some(prefix) = tokenize_prefixes(sys, head) {
                return Some(PreUnit::new(prefix, base.clone()));
            }
        }
    }
    None
}

fn tokenize_prefixes<T: Magnitude>(sys: &UnitSystem<T>, mut head: &str) -> Option<Prefix> {
    let mut out = Vec::new();
    while !head.is_empty() {
        let ends: Vec<usize> = head.char_indices().map(|(i, c)| i + c.len_utf8()).collect();
        let cut = ends.into_iter().rev().find(|&e| sys.has_prefix(&head[..e]))?;
        out.push((sys.prefix_symbol(&head[..cut])?.clone(), 1));
        head = &head[cut..];
    }
    Some(out.into_iter().collect())
}

/// Prints a prefixed base unit so that [`resolve`] maps it back to itself.
pub fn format_preunit<T: Magnitude>(sys: &UnitSystem<T>, p: &PreUnit) -> String {
    if p.prefix.is_empty() {
        return p.base.to_string();
    }
    if p.prefix.iter().all(|(_, z)| z > 0) {
        let mut text = String::new();
        for (sym, z) in p.prefix.iter() {
            for _ in 0..z {
                text.push_str(sym.as_str());
            }
        }
        text.push_str(p.base.as_str());
        if resolve(sys, &text).as_ref() == Some(p) {
            return text;
        }
    }
    let mut parts = Vec::new();
    for (sym, z) in p.prefix.iter() {
        let seg = if z > 0 { sym.to_string() } else { format!("~{sym}") };
        for _ in 0..z.unsigned_abs() {
            parts.push(seg.clone());
        }
    }
    parts.push(p.base.to_string());
    parts.join("_")
}

fn power(text: &str, z: i64) -> String {
    if z == 1 {
        text.to_string()
    } else {
        format!("{text}^{z}")
    }
}

/// Prints a unit as a product of powers; `1` for the empty unit.
pub fn format_unit<T: Magnitude>(sys: &UnitSystem<T>, u: &Unit) -> String {
    if u.is_empty() {
        return "1".into();
    }
    u.iter()
        .map(|(p, z)| power(&format_preunit(sys, p), z))
        .collect::<Vec<_>>()
        .join("*")
}

/// Prints a map of symbols as a product of powers; `1` when empty.
pub fn format_symbols(m: &ExponentMap<Symbol>) -> String {
    if m.is_empty() {
        return "1".into();
    }
    m.iter().map(|(s, z)| power(s.as_str(), z)).collect::<Vec<_>>().join("*")
}

pub fn format_normalized(n: &NormalizedUnit) -> String {
    format!("({}, {})", format_symbols(&n.prefix), format_symbols(&n.root))
}

pub fn format_evaluated<T: Magnitude>(e: &EvaluatedUnit<T>) -> String {
    format!("({}, {})", e.factor, format_symbols(&e.root))
}

/// Prints a dimension in the system's declaration order with every
/// exponent spelled out, e.g. `L^1*T^-2`.
pub fn format_dimension<T: Magnitude>(sys: &UnitSystem<T>, d: &Dimension) -> String {
    let parts: Vec<String> = sys
        .dimensions()
        .iter()
        .filter(|s| d.get(s) != 0)
        .map(|s| format!("{s}^{}", d.get(s)))
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}
