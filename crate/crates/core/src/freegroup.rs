//! Words in a free group.
//!
//! Generators are identified by a registry-issued uid; the display name is
//! cosmetic. A [`Word`] is an explicit letter sequence (powers are never
//! stored run-length encoded) together with a flag recording whether it is
//! known to be freely reduced.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

/// Where a generator came from.
#[derive(Clone, Debug)]
pub enum Origin {
    /// Declared by the user in a presentation.
    Declared,
    /// The conjugate `t^i base t^-i` introduced when rewriting over a stable letter.
    Subscripted { base: GeneratorId, subscript: i64 },
    /// A fresh symbol introduced by an embedding.
    Fresh(String),
}

#[derive(Debug)]
struct GenInner {
    name: String,
    uid: u64,
    origin: Origin,
}

/// A generator symbol. Equality, ordering and hashing use the uid only.
#[derive(Clone)]
pub struct GeneratorId(Arc<GenInner>);

impl GeneratorId {
    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn uid(&self) -> u64 {
        self.0.uid
    }

    pub fn origin(&self) -> &Origin {
        &self.0.origin
    }

    /// Base generator and subscript, if this is a subscripted generator.
    pub fn subscripted(&self) -> Option<(&GeneratorId, i64)> {
        match &self.0.origin {
            Origin::Subscripted { base, subscript } => Some((base, *subscript)),
            _ => None,
        }
    }

    pub fn pos(&self) -> Letter {
        Letter::new(self.clone(), Sign::Plus)
    }

    pub fn neg(&self) -> Letter {
        Letter::new(self.clone(), Sign::Minus)
    }

    /// The word `self^n`.
    pub fn pow(&self, n: i64) -> Word {
        let letter = if n >= 0 { self.pos() } else { self.neg() };
        let letters = vec![letter; n.unsigned_abs() as usize];
        Word {
            letters,
            reduced: true,
        }
    }
}

impl PartialEq for GeneratorId {
    fn eq(&self, other: &Self) -> bool {
        self.0.uid == other.0.uid
    }
}

impl Eq for GeneratorId {}

impl Hash for GeneratorId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.uid.hash(state);
    }
}

impl PartialOrd for GeneratorId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GeneratorId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.uid.cmp(&other.0.uid)
    }
}

impl fmt::Debug for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.0.name, self.0.uid)
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

/// Issues generator uids. Allocation is atomic, so a registry can be shared
/// between threads.
#[derive(Debug, Default)]
pub struct Registry {
    next_uid: AtomicU64,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    fn alloc(&self, name: String, origin: Origin) -> GeneratorId {
        let uid = self.next_uid.fetch_add(1, Ordering::Relaxed);
        GeneratorId(Arc::new(GenInner { name, uid, origin }))
    }

    /// A generator with an explicit name and origin, as read back from a certificate.
    pub fn with_origin(&self, name: impl Into<String>, origin: Origin) -> GeneratorId {
        self.alloc(name.into(), origin)
    }

    pub fn declare(&self, name: impl Into<String>) -> GeneratorId {
        self.alloc(name.into(), Origin::Declared)
    }

    /// A new generator standing for `t^subscript base t^-subscript`, displayed as `base@subscript`.
    pub fn subscripted(&self, base: &GeneratorId, subscript: i64) -> GeneratorId {
        let name = format!("{}@{}", base.name(), subscript);
        self.alloc(
            name,
            Origin::Subscripted {
                base: base.clone(),
                subscript,
            },
        )
    }

    pub fn fresh(&self, name: impl Into<String>, reason: impl Into<String>) -> GeneratorId {
        self.alloc(name.into(), Origin::Fresh(reason.into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: GeneratorId,
    pub sign: Sign,
}

impl Letter {
    pub fn new(gen: GeneratorId, sign: Sign) -> Self {
        Self { gen, sign }
    }

    pub fn inverse(&self) -> Letter {
        Letter::new(self.gen.clone(), self.sign.flip())
    }

    /// True when `self` followed by `other` freely cancels.
    pub fn cancels(&self, other: &Letter) -> bool {
        self.gen == other.gen && self.sign != other.sign
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Plus => write!(f, "{}", self.gen),
            Sign::Minus => write!(f, "{}^-1", self.gen),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("no image given for generator `{0}`")]
    MissingImage(String),
}

/// A finite sequence of letters. Equality compares letters only; the
/// `reduced` flag is a cached fact, not part of the value.
#[derive(Clone, Debug, Default)]
pub struct Word {
    letters: Vec<Letter>,
    reduced: bool,
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl Eq for Word {}

impl Hash for Word {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.letters.hash(state);
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word::new(iter.into_iter().collect())
    }
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        let reduced = letters.is_empty();
        Self { letters, reduced }
    }

    pub fn empty() -> Self {
        Self {
            letters: Vec::new(),
            reduced: true,
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Whether this word carries the freely-reduced flag.
    pub fn is_flagged_reduced(&self) -> bool {
        self.reduced
    }

    /// Checks freeness of cancellation by a single scan, ignoring the flag.
    pub fn is_freely_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| !w[0].cancels(&w[1]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_freely_reduced()
            && match (self.letters.first(), self.letters.last()) {
                (Some(first), Some(last)) if self.letters.len() > 1 => !last.cancels(first),
                _ => true,
            }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(Letter::inverse).collect(),
            reduced: self.reduced,
        }
    }

    /// Juxtaposition without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word::new(letters)
    }

    pub fn push(&mut self, letter: Letter) {
        self.letters.push(letter);
        self.reduced = self.letters.len() <= 1;
    }

    /// The cyclic permutation starting at position `k` (taken mod the length).
    pub fn rotate(&self, k: usize) -> Word {
        if self.letters.is_empty() {
            return self.clone();
        }
        let mut letters = self.letters.clone();
        letters.rotate_left(k % self.letters.len());
        Word::new(letters)
    }

    /// Free reduction by a single stack scan.
    pub fn reduce(&self) -> Word {
        if self.reduced {
            return self.clone();
        }
        let mut stack: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for letter in &self.letters {
            if stack.last().is_some_and(|top| top.cancels(letter)) {
                stack.pop();
            } else {
                stack.push(letter.clone());
            }
        }
        Word {
            letters: stack,
            reduced: true,
        }
    }

    /// Splits the free reduction of `self` as `conjugator · core · conjugator^-1`
    /// with `core` cyclically reduced. Returns `(core, conjugator)`.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let w = self.reduce();
        let n = w.letters.len();
        let mut k = 0;
        while 2 * k + 1 < n && w.letters[n - 1 - k].cancels(&w.letters[k]) {
            k += 1;
        }
        let core = Word {
            letters: w.letters[k..n - k].to_vec(),
            reduced: true,
        };
        let conjugator = Word {
            letters: w.letters[..k].to_vec(),
            reduced: true,
        };
        (core, conjugator)
    }

    pub fn exponent_sum(&self, g: &GeneratorId) -> i64 {
        self.letters
            .iter()
            .filter(|l| &l.gen == g)
            .map(|l| l.sign.value())
            .sum()
    }

    pub fn occurrence_count(&self, g: &GeneratorId) -> usize {
        self.letters.iter().filter(|l| &l.gen == g).count()
    }

    /// Applies the homomorphism `g ↦ images[g]` and freely reduces.
    pub fn substitute(&self, images: &HashMap<GeneratorId, Word>) -> Result<Word, WordError> {
        let mut out = Vec::with_capacity(self.letters.len());
        for letter in &self.letters {
            let image = images
                .get(&letter.gen)
                .ok_or_else(|| WordError::MissingImage(letter.gen.name().to_string()))?;
            match letter.sign {
                Sign::Plus => out.extend(image.letters.iter().cloned()),
                Sign::Minus => out.extend(image.letters.iter().rev().map(Letter::inverse)),
            }
        }
        Ok(Word::new(out).reduce())
    }

    /// True iff the cyclic reductions of both words agree up to rotation.
    pub fn equal_as_cyclic_words(&self, other: &Word) -> bool {
        let (a, _) = self.cyclic_reduce();
        let (b, _) = other.cyclic_reduce();
        if a.len() != b.len() {
            return false;
        }
        if a.is_empty() {
            return true;
        }
        let n = a.len();
        (0..n).any(|k| (0..n).all(|i| a.letters[(i + k) % n] == b.letters[i]))
    }

    /// Generators occurring in the word, in order of first appearance.
    pub fn generators(&self) -> Vec<GeneratorId> {
        let mut seen = Vec::new();
        for l in &self.letters {
            if !seen.contains(&l.gen) {
                seen.push(l.gen.clone());
            }
        }
        seen
    }
}

impl fmt::Display for Word {
    /// Runs of a repeated letter print as powers, e.g. `u^2 v^3 b^-1`; the
    /// empty word prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let mut i = 0;
        let mut first = true;
        while i < self.letters.len() {
            let letter = &self.letters[i];
            let mut j = i + 1;
            while j < self.letters.len() && self.letters[j] == *letter {
                j += 1;
            }
            let power = (j - i) as i64 * letter.sign.value();
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if power == 1 {
                write!(f, "{}", letter.gen)?;
            } else {
                write!(f, "{}^{}", letter.gen, power)?;
            }
            i = j;
        }
        Ok(())
    }
}
