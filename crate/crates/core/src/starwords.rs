//! Monomials in noncommuting indeterminates `x_i` and their adjoints.
//!
//! Text grammar: `word := token (SP token)*`, `token := "x" INT "*"?`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a variable, printed as `x<id>`.
pub type VarId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub index: VarId,
    pub star: bool,
}

impl Letter {
    pub fn new(index: VarId, star: bool) -> Self {
        Self { index, star }
    }

    pub fn plain(index: VarId) -> Self {
        Self::new(index, false)
    }

    pub fn starred(index: VarId) -> Self {
        Self::new(index, true)
    }

    pub fn adjoint(self) -> Self {
        Self::new(self.index, !self.star)
    }

    /// `+1` for `x`, `-1` for `x*`.
    pub fn sign(self) -> i64 {
        if self.star {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}{}", self.index, if self.star { "*" } else { "" })
    }
}

/// A nonempty monomial in the letters `x_i`, `x_i*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StarWord {
    letters: Vec<Letter>,
}

impl StarWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(Self { letters })
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
        false
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_word(text)
    }

    pub fn concat(&self, other: &StarWord) -> StarWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        StarWord { letters }
    }

    /// Reverse the letters and flip every star.
    pub fn adjoint(&self) -> StarWord {
        StarWord {
            letters: adjoint_letters(&self.letters),
        }
    }

    /// Replace every index by the image under `map`.
    pub fn relabel(&self, map: impl Fn(VarId) -> VarId) -> StarWord {
        StarWord {
            letters: self.letters.iter().map(|l| Letter::new(map(l.index), l.star)).collect(),
        }
    }

    /// Substitute `x -> x_index` in a single-variable pattern of star flags.
    pub fn from_pattern(index: VarId, stars: &[bool]) -> Result<StarWord> {
        StarWord::new(stars.iter().map(|&s| Letter::new(index, s)).collect())
    }

    pub fn indices(&self) -> Vec<VarId> {
        let mut out: Vec<VarId> = self.letters.iter().map(|l| l.index).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn reduce_unitary(&self) -> PowerWord {
        reduce_unitary(&self.letters)
    }

    pub fn alternating_blocks(&self) -> Vec<(VarId, StarWord)> {
        alternating_blocks(&self.letters)
            .into_iter()
            .map(|(i, run)| (i, StarWord { letters: run.to_vec() }))
            .collect()
    }
}

impl fmt::Display for StarWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&letters_text(&self.letters))
    }
}

impl std::str::FromStr for StarWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_word(s)
    }
}

impl Serialize for StarWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for StarWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_word(&text).map_err(serde::de::Error::custom)
    }
}

pub fn letters_text(letters: &[Letter]) -> String {
    let mut out = String::new();
    for (n, l) in letters.iter().enumerate() {
        if n > 0 {
            out.push(' ');
        }
        out.push_str(&l.to_string());
    }
    out
}

pub fn adjoint_letters(letters: &[Letter]) -> Vec<Letter> {
    letters.iter().rev().map(|l| l.adjoint()).collect()
}

/// Parses the whitespace-separated token grammar, reporting byte offsets.
pub fn parse_word(text: &str) -> Result<StarWord> {
    let bytes = text.as_bytes();
    let mut letters = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        if bytes[pos].is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if bytes[pos] != b'x' {
            return Err(Error::Syntax {
                offset: pos,
                message: format!("expected 'x', found {:?}", text[pos..].chars().next().unwrap()),
            });
        }
        pos += 1;
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Syntax {
                offset: pos,
                message: "expected a decimal index after 'x'".into(),
            });
        }
        let index: VarId = text[start..pos].parse().map_err(|_| Error::Syntax {
            offset: start,
            message: "index out of range".into(),
        })?;
        let star = pos < bytes.len() && bytes[pos] == b'*';
        if star {
            pos += 1;
        }
        if pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            return Err(Error::Syntax {
                offset: pos,
                message: "expected whitespace between tokens".into(),
            });
        }
        letters.push(Letter::new(index, star));
    }
    StarWord::new(letters)
}

/// Maximal runs of letters sharing an index.
pub fn alternating_blocks(letters: &[Letter]) -> Vec<(VarId, &[Letter])> {
    let mut out = Vec::new();
    let mut start = 0;
    for n in 1..=letters.len() {
        if n == letters.len() || letters[n].index != letters[start].index {
            out.push((letters[start].index, &letters[start..n]));
            start = n;
        }
    }
    out
}

/// A reduced product `x_{i(1)}^{n(1)} ... x_{i(t)}^{n(t)}` of unitary powers.
///
/// The empty power word stands for the unit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PowerWord {
    factors: Vec<(VarId, i64)>,
}

impl PowerWord {
    /// Builds the reduced form of an arbitrary sequence of powers.
    pub fn from_factors(factors: impl IntoIterator<Item = (VarId, i64)>) -> Self {
        let mut out: Vec<(VarId, i64)> = Vec::new();
        for (index, exp) in factors {
            if exp == 0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == index => {
                    last.1 += exp;
                    if last.1 == 0 {
                        out.pop();
                    }
                }
                _ => out.push((index, exp)),
            }
        }
        Self { factors: out }
    }

    pub fn factors(&self) -> &[(VarId, i64)] {
        &self.factors
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total letter count of the shortest `*`-word realizing this power word.
    pub fn weight(&self) -> usize {
        self.factors.iter().map(|f| f.1.unsigned_abs() as usize).sum()
    }

    /// Expands `x^n` to `n` copies of `x` and `x^-n` to `n` copies of `x*`.
    pub fn to_letters(&self) -> Vec<Letter> {
        expand_powers(&self.factors)
    }
}

impl fmt::Display for PowerWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (n, (i, e)) in self.factors.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "x{i}^{e}")?;
        }
        Ok(())
    }
}

pub fn expand_powers(factors: &[(VarId, i64)]) -> Vec<Letter> {
    let mut letters = Vec::new();
    for &(index, exp) in factors {
        let letter = Letter::new(index, exp < 0);
        letters.extend(std::iter::repeat_n(letter, exp.unsigned_abs() as usize));
    }
    letters
}

/// Merges adjacent letters of equal index into signed powers (`x* -> -1`).
pub fn reduce_unitary(letters: &[Letter]) -> PowerWord {
    PowerWord::from_factors(letters.iter().map(|l| (l.index, l.sign())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(text: &str) -> StarWord {
        parse_word(text).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            w("x1 x2* x1").letters(),
            &[Letter::plain(1), Letter::starred(2), Letter::plain(1)]
        );
        assert_eq!(w("x7*").letters(), &[Letter::starred(7)]);
        assert_eq!(parse_word(""), Err(Error::EmptyWord));
        assert_eq!(parse_word("   "), Err(Error::EmptyWord));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match parse_word("x1 y2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
        match parse_word("x1 x") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse_word("x1*x2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_word("x1 **"), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(w("x1 x2*").adjoint(), w("x2 x1*"));
        assert_eq!(w("x1").adjoint(), w("x1*"));
        assert_eq!(w("x1 x1*").adjoint(), w("x1 x1*"));
    }

    #[test]
    fn reduce_unitary_examples() {
        assert_eq!(w("x1 x1 x1*").reduce_unitary().factors(), &[(1, 1)]);
        assert!(w("x1 x2* x2 x1*").reduce_unitary().is_unit());
        assert_eq!(
            w("x1 x1 x2* x2* x1").reduce_unitary().factors(),
            &[(1, 2), (2, -2), (1, 1)]
        );
    }

    #[test]
    fn alternating_block_examples() {
        let blocks = w("x1 x1* x2 x1").alternating_blocks();
        assert_eq!(blocks, vec![(1, w("x1 x1*")), (2, w("x2")), (1, w("x1"))]);
        assert_eq!(w("x3").alternating_blocks(), vec![(3, w("x3"))]);
        assert_eq!(w("x1 x2 x1 x2").alternating_blocks().len(), 4);
    }

    #[test]
    fn power_word_text() {
        let p = PowerWord::from_factors([(1, 2), (2, -1)]);
        assert_eq!(p.to_string(), "x1^2 x2^-1");
        assert_eq!(letters_text(&p.to_letters()), "x1 x1 x2*");
        assert_eq!(p.weight(), 3);
        assert_eq!(PowerWord::default().to_string(), "1");
    }

    fn arb_word() -> impl Strategy<Value = StarWord> {
        prop::collection::vec((1u32..4, any::<bool>()), 1..=12)
            .prop_map(|v| StarWord::new(v.into_iter().map(|(i, s)| Letter::new(i, s)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(word in arb_word()) {
            prop_assert_eq!(parse_word(&word.to_string()).unwrap(), word.clone());
            let spaced = word.to_string().replace(' ', "  \t ");
            prop_assert_eq!(parse_word(&spaced).unwrap(), word);
        }

        #[test]
        fn adjoint_is_involution_and_reverses_blocks(word in arb_word()) {
            prop_assert_eq!(word.adjoint().adjoint(), word.clone());
            let blocks: Vec<_> = word
                .alternating_blocks()
                .into_iter()
                .rev()
                .map(|(i, b)| (i, b.adjoint()))
                .collect();
            prop_assert_eq!(word.adjoint().alternating_blocks(), blocks);
        }

        #[test]
        fn word_times_adjoint_cancels(word in arb_word()) {
            prop_assert!(word.concat(&word.adjoint()).reduce_unitary().is_unit());
        }
    }
}
