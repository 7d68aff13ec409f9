//! Canonical-form arithmetic for the base and lamp group families.
//!
//! Every group is described by a [`Group`] handle and its elements by the
//! [`Element`] enum. Elements are always stored in canonical form, so
//! structural equality is group equality and elements can be used as
//! ordered map keys (lamp configurations and flows rely on this).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::magnus::solvable::{self, SolvableElement};

/// A generator letter: `+i` stands for `x_i`, `-i` for `x_i^{-1}` (1-based).
pub type Letter = i8;

/// Largest supported number of free generators (one per latin letter).
pub const MAX_RANK: usize = 26;

/// A freely reduced word over `x_1^{±1}, …, x_d^{±1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Freely reduces `letters`.
    pub fn reduced(letters: &[Letter]) -> Self {
        let mut out = Word::empty();
        for &l in letters {
            out.push(l);
        }
        out
    }

    /// Appends one letter, cancelling against the last letter if needed.
    pub fn push(&mut self, letter: Letter) {
        if self.0.last() == Some(&-letter) {
            self.0.pop();
        } else {
            self.0.push(letter);
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != -w[1])
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for &l in &self.0 {
            write!(f, "{}", letter_char(l))?;
        }
        Ok(())
    }
}

/// Character for a letter: `a` = x₁, `A` = x₁⁻¹, and so on.
pub fn letter_char(l: Letter) -> char {
    let idx = l.unsigned_abs() - 1;
    if l > 0 {
        (b'a' + idx) as char
    } else {
        (b'A' + idx) as char
    }
}

/// Parses a letter string (`a..z`, uppercase for inverses) without reducing
/// it. The strings `""` and `"1"` denote the empty word.
pub fn parse_letters(text: &str, rank: usize) -> Result<Vec<Letter>> {
    let text = text.trim();
    if text.is_empty() || text == "1" {
        return Ok(Vec::new());
    }
    text.chars()
        .map(|c| {
            let (idx, sign) = match c {
                'a'..='z' => (c as u8 - b'a', 1i8),
                'A'..='Z' => (c as u8 - b'A', -1i8),
                _ => return Err(Error::Parse(format!("invalid letter {c:?} in word {text:?}"))),
            };
            if idx as usize >= rank {
                return Err(Error::Parse(format!(
                    "letter {c:?} exceeds rank {rank} in word {text:?}"
                )));
            }
            Ok(sign * (idx as i8 + 1))
        })
        .collect()
}

/// Canonical element of one of the supported group families.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    /// Element of ℤᵈ.
    Vector(Vec<i64>),
    /// Element of ℤ/mℤ, always in `[0, m)`.
    Residue(u64),
    /// Freely reduced word in F_d.
    Word(Word),
    /// Flow-backed element of a free solvable group of level ≥ 2.
    Solvable(Arc<SolvableElement>),
}

impl Element {
    pub fn family(&self) -> &'static str {
        match self {
            Element::Vector(_) => "int-vector",
            Element::Residue(_) => "residue",
            Element::Word(_) => "reduced-word",
            Element::Solvable(_) => "solvable",
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Vector(v) => {
                for (k, x) in v.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Element::Residue(r) => write!(f, "{r}"),
            Element::Word(w) => write!(f, "{w}"),
            Element::Solvable(s) => write!(f, "{s}"),
        }
    }
}

/// Group handle: family tag plus parameters.
///
/// `Solvable` always has `level >= 2`; the free solvable group of level one
/// is ℤᵈ and is represented as `IntVector` (see [`Group::solvable`]).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Group {
    IntVector { dim: usize },
    Cyclic { modulus: u64 },
    Free { rank: usize },
    Solvable { rank: usize, level: usize },
}

fn checked_add(a: i64, b: i64) -> i64 {
    a.checked_add(b)
        .unwrap_or_else(|| panic!("integer overflow in group arithmetic: {a} + {b}"))
}

impl Group {
    pub fn int_vector(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dim", "must be at least 1"));
        }
        Ok(Group::IntVector { dim })
    }

    pub fn cyclic(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::validation("modulus", "must be at least 1"));
        }
        Ok(Group::Cyclic { modulus })
    }

    pub fn free(rank: usize) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::validation("rank", format!("must lie in 1..={MAX_RANK}")));
        }
        Ok(Group::Free { rank })
    }

    /// The free solvable group S_{d,k} = F_d / F_d^{(k)}. Level 1 is ℤᵈ.
    pub fn solvable(rank: usize, level: usize) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::validation("rank", format!("must lie in 1..={MAX_RANK}")));
        }
        match level {
            0 => Err(Error::validation("level", "must be at least 1")),
            1 => Ok(Group::IntVector { dim: rank }),
            _ => Ok(Group::Solvable { rank, level }),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Group::IntVector { .. } => "int-vector",
            Group::Cyclic { .. } => "residue",
            Group::Free { .. } => "reduced-word",
            Group::Solvable { .. } => "solvable",
        }
    }

    /// Number of free generators `x_1..x_d` mapped into this group.
    pub fn rank(&self) -> usize {
        match *self {
            Group::IntVector { dim } => dim,
            Group::Cyclic { .. } => 1,
            Group::Free { rank } | Group::Solvable { rank, .. } => rank,
        }
    }

    pub fn identity(&self) -> Element {
        match *self {
            Group::IntVector { dim } => Element::Vector(vec![0; dim]),
            Group::Cyclic { .. } => Element::Residue(0),
            Group::Free { .. } => Element::Word(Word::empty()),
            Group::Solvable { rank, level } => {
                Element::Solvable(Arc::new(SolvableElement::identity(rank, level)))
            }
        }
    }

    fn mismatch(&self, found: &Element) -> Error {
        Error::FamilyMismatch {
            expected: format!("{self}"),
            found: format!("{} element {found}", found.family()),
        }
    }

    /// Checks that `g` is a canonical element of this group.
    pub fn check(&self, g: &Element) -> Result<()> {
        let ok = match (self, g) {
            (Group::IntVector { dim }, Element::Vector(v)) => v.len() == *dim,
            (Group::Cyclic { modulus }, Element::Residue(r)) => r < modulus,
            (Group::Free { rank }, Element::Word(w)) => {
                w.is_reduced()
                    && w.letters()
                        .iter()
                        .all(|&l| l != 0 && (l.unsigned_abs() as usize) <= *rank)
            }
            (Group::Solvable { rank, level }, Element::Solvable(s)) => {
                s.rank() == *rank && s.level() == *level
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.mismatch(g))
        }
    }

    pub fn multiply(&self, g: &Element, h: &Element) -> Result<Element> {
        match (self, g, h) {
            (Group::IntVector { dim }, Element::Vector(a), Element::Vector(b))
                if a.len() == *dim && b.len() == *dim =>
            {
                Ok(Element::Vector(
                    a.iter().zip(b).map(|(&x, &y)| checked_add(x, y)).collect(),
                ))
            }
            (Group::Cyclic { modulus }, Element::Residue(a), Element::Residue(b))
                if a < modulus && b < modulus =>
            {
                // widen to avoid overflow for moduli near u64::MAX
                Ok(Element::Residue(
                    ((*a as u128 + *b as u128) % *modulus as u128) as u64,
                ))
            }
            (Group::Free { .. }, Element::Word(a), Element::Word(b)) => {
                let mut out = a.clone();
                for &l in b.letters() {
                    out.push(l);
                }
                Ok(Element::Word(out))
            }
            (Group::Solvable { .. }, Element::Solvable(a), Element::Solvable(b)) => {
                self.check(g)?;
                self.check(h)?;
                Ok(Element::Solvable(Arc::new(solvable::multiply(a, b)?)))
            }
            _ => {
                self.check(g)?;
                Err(self.mismatch(h))
            }
        }
    }

    pub fn inverse(&self, g: &Element) -> Result<Element> {
        self.check(g)?;
        Ok(match (self, g) {
            (Group::IntVector { .. }, Element::Vector(a)) => Element::Vector(
                a.iter()
                    .map(|&x| x.checked_neg().expect("integer overflow in inverse"))
                    .collect(),
            ),
            (Group::Cyclic { modulus }, Element::Residue(a)) => {
                Element::Residue((modulus - a) % modulus)
            }
            (Group::Free { .. }, Element::Word(w)) => Element::Word(w.inverse()),
            (Group::Solvable { .. }, Element::Solvable(s)) => {
                Element::Solvable(Arc::new(solvable::inverse(s)?))
            }
            _ => unreachable!("checked above"),
        })
    }

    /// Image of the free generator `x_i` (1-based).
    pub fn generator(&self, i: usize) -> Result<Element> {
        if i == 0 || i > self.rank() {
            return Err(Error::Usage(format!(
                "generator index {i} outside 1..={}",
                self.rank()
            )));
        }
        Ok(match *self {
            Group::IntVector { dim } => {
                let mut v = vec![0; dim];
                v[i - 1] = 1;
                Element::Vector(v)
            }
            Group::Cyclic { modulus } => Element::Residue(1 % modulus),
            Group::Free { .. } => Element::Word(Word(vec![i as Letter])),
            Group::Solvable { rank, level } => {
                Element::Solvable(Arc::new(SolvableElement::generator(rank, level, i)?))
            }
        })
    }

    /// Image of a letter (generator or inverse generator).
    pub fn letter(&self, l: Letter) -> Result<Element> {
        let g = self.generator(l.unsigned_abs() as usize)?;
        if l > 0 {
            Ok(g)
        } else {
            self.inverse(&g)
        }
    }

    /// Symmetric generating set: every generator image and its inverse,
    /// without duplicates and without the identity.
    pub fn generators(&self) -> Result<Vec<Element>> {
        let id = self.identity();
        let mut out: Vec<Element> = Vec::new();
        for i in 1..=self.rank() {
            for l in [i as Letter, -(i as Letter)] {
                let g = self.letter(l)?;
                if g != id && !out.contains(&g) {
                    out.push(g);
                }
            }
        }
        Ok(out)
    }

    /// Product of the letter images of `letters`, starting from the identity.
    pub fn evaluate(&self, letters: &[Letter]) -> Result<Element> {
        if let Group::Free { rank } = *self {
            if let Some(&bad) = letters
                .iter()
                .find(|l| **l == 0 || l.unsigned_abs() as usize > rank)
            {
                return Err(Error::Usage(format!("letter {bad} outside rank {rank}")));
            }
            return Ok(Element::Word(Word::reduced(letters)));
        }
        let mut acc = self.identity();
        for &l in letters {
            acc = self.multiply(&acc, &self.letter(l)?)?;
        }
        Ok(acc)
    }

    /// Word length with respect to the standard generators.
    pub fn word_length(&self, g: &Element) -> Result<u64> {
        self.check(g)?;
        match (self, g) {
            (Group::IntVector { .. }, Element::Vector(v)) => Ok(v
                .iter()
                .map(|x| x.unsigned_abs())
                .fold(0u64, |a, b| a.checked_add(b).expect("length overflow"))),
            (Group::Cyclic { modulus }, Element::Residue(r)) => Ok((*r).min(modulus - r)),
            (Group::Free { .. }, Element::Word(w)) => Ok(w.len() as u64),
            (Group::Solvable { .. }, _) => Err(Error::Unsupported(
                "word length in free solvable groups of level >= 2".into(),
            )),
            _ => unreachable!("checked above"),
        }
    }

    pub fn in_ball(&self, g: &Element, radius: u64) -> Result<bool> {
        Ok(self.word_length(g)? <= radius)
    }

    /// Exponential growth rate `v` with respect to the standard generators,
    /// where it is known exactly.
    pub fn growth_rate(&self) -> Option<f64> {
        match *self {
            Group::IntVector { .. } | Group::Cyclic { .. } => Some(0.0),
            Group::Free { rank } => Some(((2 * rank - 1) as f64).ln()),
            Group::Solvable { .. } => None,
        }
    }

    /// Parses the text form of an element: comma-separated integers for ℤᵈ,
    /// an integer for ℤ/mℤ (reduced mod m), a letter word for F_d and S_{d,k}.
    pub fn parse_element(&self, text: &str) -> Result<Element> {
        let text = text.trim();
        match *self {
            Group::IntVector { dim } => {
                let v = text
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<i64>()
                            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if v.len() != dim {
                    return Err(Error::Parse(format!(
                        "expected {dim} coordinates, got {} in {text:?}",
                        v.len()
                    )));
                }
                Ok(Element::Vector(v))
            }
            Group::Cyclic { modulus } => {
                let x: i128 = text
                    .parse()
                    .map_err(|e| Error::Parse(format!("{text:?}: {e}")))?;
                Ok(Element::Residue(x.rem_euclid(modulus as i128) as u64))
            }
            Group::Free { .. } | Group::Solvable { .. } => {
                let letters = parse_letters(text, self.rank())?;
                self.evaluate(&letters)
            }
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::IntVector { dim } => write!(f, "Z^{dim}"),
            Group::Cyclic { modulus } => write!(f, "Z/{modulus}"),
            Group::Free { rank } => write!(f, "F_{rank}"),
            Group::Solvable { rank, level } => write!(f, "S_{{{rank},{level}}}"),
        }
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    /// Short syntax: `Z3` (ℤ³), `Z/4` (ℤ/4ℤ), `F2` (F₂), `S2,3` (S_{2,3}).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |t: &str| -> Result<usize> {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("group spec {s:?}: {e}")))
        };
        if let Some(rest) = s.strip_prefix("Z/") {
            let m = rest
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("group spec {s:?}: {e}")))?;
            Group::cyclic(m)
        } else if let Some(rest) = s.strip_prefix('Z') {
            Group::int_vector(num(rest)?)
        } else if let Some(rest) = s.strip_prefix('F') {
            Group::free(num(rest)?)
        } else if let Some(rest) = s.strip_prefix('S') {
            let (d, k) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("group spec {s:?}: expected S<d>,<k>")))?;
            Group::solvable(num(d)?, num(k)?)
        } else {
            Err(Error::Parse(format!("unknown group spec {s:?}")))
        }
    }
}
