//! One-relator presentations `< S | r >` and their text grammar.
//!
//! ```text
//! presentation := "<"? genlist "|" word ">"?
//! genlist      := ident ("," ident)*
//! word         := term+ | "1"
//! term         := ident power? | "[" ident "," ident "]" power?
//! power        := "^" "-"? digits
//! ```
//!
//! Certificates print derived generators such as `b@-3` and `t#1`, so the
//! parser also has an extended identifier mode that admits `@`, `#` and a
//! `-` directly after `@`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::freegroup::{GeneratorId, Letter, Registry, Sign, Word};

/// Largest power accepted in input text.
pub const MAX_POWER: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("generator `{0}` is listed twice")]
    DuplicateGenerator(String),
    #[error("relator uses `{0}`, which is not a listed generator")]
    UndeclaredGenerator(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown generator `{name}` at byte {pos}")]
    UnknownGenerator { name: String, pos: usize },
    #[error("the generator list is empty")]
    EmptyGeneratorList,
    #[error(transparent)]
    Invalid(#[from] PresentationError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<GeneratorId>,
    relator: Word,
}

impl Presentation {
    /// Builds `< generators | w >`, storing the cyclically reduced core of `w`.
    pub fn new(generators: Vec<GeneratorId>, relator: Word) -> Result<Self, PresentationError> {
        let mut uids = HashSet::new();
        let mut names = HashSet::new();
        for g in &generators {
            if !uids.insert(g.uid()) || !names.insert(g.name()) {
                return Err(PresentationError::DuplicateGenerator(g.name().to_string()));
            }
        }
        for l in relator.letters() {
            if !uids.contains(&l.gen.uid()) {
                return Err(PresentationError::UndeclaredGenerator(l.gen.name().to_string()));
            }
        }
        let (core, _) = relator.cyclic_reduce();
        Ok(Self {
            generators,
            relator: core,
        })
    }

    /// Builds a presentation without any checks or normalization, so that
    /// stored certificates reach the verifier exactly as written.
    pub fn new_unnormalized(generators: Vec<GeneratorId>, relator: Word) -> Self {
        Self {
            generators,
            relator,
        }
    }

    pub fn generators(&self) -> &[GeneratorId] {
        &self.generators
    }

    pub fn relator(&self) -> &Word {
        &self.relator
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn relator_len(&self) -> usize {
        self.relator.len()
    }

    pub fn position(&self, g: &GeneratorId) -> Option<usize> {
        self.generators.iter().position(|x| x == g)
    }

    pub fn generator_named(&self, name: &str) -> Option<&GeneratorId> {
        self.generators.iter().find(|g| g.name() == name)
    }

    /// Generators occurring in the relator, in declaration order.
    pub fn letters_of(&self) -> Vec<GeneratorId> {
        self.generators
            .iter()
            .filter(|g| self.relator.occurrence_count(g) > 0)
            .cloned()
            .collect()
    }

    pub(crate) fn name_scope(&self) -> HashMap<String, GeneratorId> {
        self.generators
            .iter()
            .map(|g| (g.name().to_string(), g.clone()))
            .collect()
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("< ")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        if !self.generators.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "| {} >", self.relator)
    }
}

/// Identifier lexing mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Identifiers {
    /// `letter (letter | digit | _)*`
    Strict,
    /// Strict identifiers plus the `@`, `@-` and `#` of derived generators.
    Extended,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    One,
    Lt,
    Gt,
    Bar,
    Comma,
    Caret,
    Minus,
    LBracket,
    RBracket,
}

fn lex(text: &str, mode: Identifiers) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            i += 1;
            while i < bytes.len() {
                let d = bytes[i];
                let ok = d.is_ascii_alphanumeric()
                    || d == b'_'
                    || (mode == Identifiers::Extended
                        && (d == b'@' || d == b'#' || (d == b'-' && bytes[i - 1] == b'@')));
                if !ok {
                    break;
                }
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let digits = &text[start..i];
            let n: u64 = digits.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: format!("integer `{digits}` is too large"),
            })?;
            out.push((Tok::Int(n), start));
            continue;
        }
        let tok = match c {
            b'<' => Tok::Lt,
            b'>' => Tok::Gt,
            b'|' => Tok::Bar,
            b',' => Tok::Comma,
            b'^' => Tok::Caret,
            b'-' => Tok::Minus,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    // A lone `1` word is the only place an integer may stand outside a power.
    for k in 0..out.len() {
        if out[k].0 == Tok::Int(1) && (k == 0 || out[k - 1].0 != Tok::Caret && out[k - 1].0 != Tok::Minus) {
            out[k].0 = Tok::One;
        }
    }
    Ok(out)
}

/// A parsed presentation before generator names are resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPresentation {
    pub generators: Vec<(String, usize)>,
    /// Expanded relator letters: name, sign, byte offset of the originating term.
    pub relator: Vec<(String, Sign, usize)>,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> Result<(String, usize), ParseError> {
        match self.toks.get(self.at) {
            Some((Tok::Ident(name), pos)) => {
                let out = (name.clone(), *pos);
                self.at += 1;
                Ok(out)
            }
            _ => self.err("expected a generator name"),
        }
    }

    fn power(&mut self) -> Result<i64, ParseError> {
        if !self.eat(&Tok::Caret) {
            return Ok(1);
        }
        let negative = self.eat(&Tok::Minus);
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                if n > MAX_POWER {
                    return self.err(format!("power {n} exceeds the limit {MAX_POWER}"));
                }
                self.at += 1;
                Ok(if negative { -(n as i64) } else { n as i64 })
            }
            _ => self.err("expected an integer exponent"),
        }
    }

    fn word(&mut self) -> Result<Vec<(String, Sign, usize)>, ParseError> {
        if self.eat(&Tok::One) {
            return Ok(Vec::new());
        }
        let mut letters = Vec::new();
        loop {
            let pos = self.pos();
            let base: Vec<(String, Sign)> = match self.peek() {
                Some(Tok::Ident(_)) => {
                    let (name, _) = self.ident()?;
                    vec![(name, Sign::Plus)]
                }
                Some(Tok::LBracket) => {
                    self.at += 1;
                    let (x, _) = self.ident()?;
                    self.expect(&Tok::Comma, "`,` inside commutator")?;
                    let (y, _) = self.ident()?;
                    self.expect(&Tok::RBracket, "`]`")?;
                    vec![
                        (x.clone(), Sign::Plus),
                        (y.clone(), Sign::Plus),
                        (x, Sign::Minus),
                        (y, Sign::Minus),
                    ]
                }
                _ if letters.is_empty() => return self.err("expected a relator term or `1`"),
                _ => break,
            };
            let power = self.power()?;
            let block: Vec<(String, Sign)> = if power >= 0 {
                base
            } else {
                base.into_iter()
                    .rev()
                    .map(|(n, s)| (n, s.flip()))
                    .collect()
            };
            for _ in 0..power.unsigned_abs() {
                letters.extend(block.iter().map(|(n, s)| (n.clone(), *s, pos)));
            }
        }
        Ok(letters)
    }
}

/// Parses presentation text without resolving names.
pub fn parse_raw(text: &str, mode: Identifiers) -> Result<RawPresentation, ParseError> {
    let mut p = Parser {
        toks: lex(text, mode)?,
        at: 0,
        end: text.len(),
    };
    let bracketed = p.eat(&Tok::Lt);
    let mut generators = Vec::new();
    if !matches!(p.peek(), Some(Tok::Bar)) || mode == Identifiers::Strict {
        generators.push(p.ident()?);
        while p.eat(&Tok::Comma) {
            generators.push(p.ident()?);
        }
    }
    p.expect(&Tok::Bar, "`|`")?;
    let relator = p.word()?;
    if bracketed {
        p.expect(&Tok::Gt, "`>`")?;
    } else {
        p.eat(&Tok::Gt);
    }
    if p.at != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(RawPresentation {
        generators,
        relator,
    })
}

/// Parses a word whose generator names are resolved in `scope`.
pub fn parse_word(
    text: &str,
    scope: &HashMap<String, GeneratorId>,
    mode: Identifiers,
) -> Result<Word, ParseError> {
    let mut p = Parser {
        toks: lex(text, mode)?,
        at: 0,
        end: text.len(),
    };
    let letters = p.word()?;
    if p.at != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    resolve_letters(&letters, scope)
}

fn resolve_letters(
    letters: &[(String, Sign, usize)],
    scope: &HashMap<String, GeneratorId>,
) -> Result<Word, ParseError> {
    letters
        .iter()
        .map(|(name, sign, pos)| {
            scope
                .get(name)
                .map(|g| Letter::new(g.clone(), *sign))
                .ok_or_else(|| ParseError::UnknownGenerator {
                    name: name.clone(),
                    pos: *pos,
                })
        })
        .collect()
}

/// Parses user input, declaring every listed generator in `registry`.
pub fn parse_presentation(text: &str, registry: &Registry) -> Result<Presentation, ParseError> {
    let raw = parse_raw(text, Identifiers::Strict)?;
    if raw.generators.is_empty() {
        return Err(ParseError::EmptyGeneratorList);
    }
    let mut scope = HashMap::new();
    let mut generators = Vec::new();
    for (name, _) in &raw.generators {
        if scope.contains_key(name) {
            return Err(PresentationError::DuplicateGenerator(name.clone()).into());
        }
        let g = registry.declare(name.clone());
        scope.insert(name.clone(), g.clone());
        generators.push(g);
    }
    let relator = resolve_letters(&raw.relator, &scope)?;
    Ok(Presentation::new(generators, relator)?)
}

/// Parses a stored presentation in extended mode. Names found in `scope` keep
/// their identity; any other listed name is declared anew. The relator is
/// stored exactly as written.
pub(crate) fn parse_stored_presentation(
    text: &str,
    registry: &Registry,
    scope: &HashMap<String, GeneratorId>,
) -> Result<Presentation, ParseError> {
    let raw = parse_raw(text, Identifiers::Extended)?;
    let mut local = HashMap::new();
    let mut generators = Vec::new();
    for (name, _) in &raw.generators {
        if local.contains_key(name) {
            return Err(PresentationError::DuplicateGenerator(name.clone()).into());
        }
        let g = scope
            .get(name)
            .cloned()
            .unwrap_or_else(|| registry.declare(name.clone()));
        local.insert(name.clone(), g.clone());
        generators.push(g);
    }
    let relator = resolve_letters(&raw.relator, &local)?;
    Ok(Presentation::new_unnormalized(generators, relator))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Presentation {
        parse_presentation(text, &Registry::new()).unwrap()
    }

    #[test]
    fn commutator_transcription() {
        let p = parse("< a, b | a b a^-1 b^-1 >");
        assert_eq!(p.rank(), 2);
        assert_eq!(p.relator_len(), 4);
        assert_eq!(p.to_string(), "< a, b | a b a^-1 b^-1 >");
        assert_eq!(parse("<a,b|[a,b]>").to_string(), p.to_string());
    }

    #[test]
    fn powers_expand() {
        let p = parse("< u, v | u^2 v^3 >");
        assert_eq!(p.relator_len(), 5);
        let u = &p.generators()[0];
        assert_eq!(p.relator().exponent_sum(u), 2);
    }

    #[test]
    fn commutator_power_inverts_block() {
        let p = parse("a, b | [a,b]^-1");
        assert_eq!(p.relator().to_string(), "b a b^-1 a^-1");
    }

    #[test]
    fn relator_is_cyclically_reduced_on_input() {
        let p = parse("< a, b | a b a b^-1 a^-1 >");
        assert_eq!(p.relator().to_string(), "a");
        let q = parse("< a, b | b a^2 b a b^-1 >");
        assert_eq!(q.relator().to_string(), "a^2 b a");
        let r = parse("< a, b | a^-1 b a^2 b a >");
        assert_eq!(r.relator().to_string(), "b a^2 b");
        let (core, conj) = r.relator().cyclic_reduce();
        assert_eq!(&core, r.relator());
        assert!(conj.is_empty());
    }

    #[test]
    fn empty_relator() {
        let p = parse("< a, b | 1 >");
        assert!(p.relator().is_empty());
        assert!(p.letters_of().is_empty());
        assert_eq!(p.to_string(), "< a, b | 1 >");
    }

    #[test]
    fn letters_of_keeps_declaration_order() {
        let p = parse("< a, b, c | a^2 >");
        let names: Vec<_> = p.letters_of().iter().map(|g| g.name().to_string()).collect();
        assert_eq!(names, ["a"]);
        let q = parse("< a, b | b a b^-1 a^-1 >");
        let names: Vec<_> = q.letters_of().iter().map(|g| g.name().to_string()).collect();
        assert_eq!(names, ["a", "b"]);
    }

    #[test]
    fn error_paths() {
        let reg = Registry::new();
        assert!(matches!(
            parse_presentation("< a | a b >", &reg),
            Err(ParseError::UnknownGenerator { ref name, pos: 8 }) if name == "b"
        ));
        assert!(matches!(
            parse_presentation("< | a >", &reg),
            Err(ParseError::Syntax { pos: 2, .. })
        ));
        assert!(matches!(
            parse_presentation("< a, a | a >", &reg),
            Err(ParseError::Invalid(PresentationError::DuplicateGenerator(_)))
        ));
        assert!(matches!(
            parse_presentation("< a, b | a $ b >", &reg),
            Err(ParseError::Syntax { pos: 11, .. })
        ));
        assert!(matches!(
            parse_presentation("< a, b | a^ >", &reg),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_presentation("< a, b | >", &reg),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_presentation("< a@1 | a >", &reg),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn extended_identifiers() {
        let reg = Registry::new();
        let p = parse_stored_presentation("< b@-3, t#1 | b@-3 t#1^-2 >", &reg, &HashMap::new())
            .unwrap();
        assert_eq!(p.generators()[0].name(), "b@-3");
        assert_eq!(p.relator().to_string(), "b@-3 t#1^-2");
        let empty = parse_stored_presentation("< | 1 >", &reg, &HashMap::new()).unwrap();
        assert_eq!(empty.rank(), 0);
        assert_eq!(empty.to_string(), "< | 1 >");
    }

    #[test]
    fn print_parse_fixed_point() {
        for text in ["u^2 v^3", "a b a^-1 b^-1", "a^-5 b a^3 b^-1", "1", "[a,b]^2 c"] {
            let full = format!("< a, b, c, u, v | {text} >");
            let once = parse(&full).to_string();
            let twice = parse(&once).to_string();
            assert_eq!(once, twice);
        }
    }
}
