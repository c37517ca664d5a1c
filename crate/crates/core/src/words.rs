//! Finitely presented groups, freely reduced words, and evaluation of words
//! under matrix representations.
//!
//! Commutators follow `[a, b] = a b a^-1 b^-1`. With the opposite convention
//! the figure-eight relator `m w = w n` (`w = [n, m^-1]`) fails, so presentation
//! files should spell commutators out explicitly.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{identity_deviation, NumMatrix};
use crate::ring::RingMatrix;

/// Freely reduced word: adjacent letters never share a generator and no
/// exponent is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<(usize, i64)>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn generator(index: usize) -> Self {
        Self {
            letters: vec![(index, 1)],
        }
    }

    /// Builds a word from arbitrary `(generator, exponent)` pairs, merging and
    /// cancelling adjacent letters.
    pub fn from_letters<I: IntoIterator<Item = (usize, i64)>>(letters: I) -> Self {
        let mut out: Vec<(usize, i64)> = Vec::new();
        for (g, e) in letters {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == g => {
                    last.1 += e;
                    if last.1 == 0 {
                        out.pop();
                    }
                }
                _ => out.push((g, e)),
            }
        }
        Self { letters: out }
    }

    pub fn letters(&self) -> &[(usize, i64)] {
        &self.letters
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of generator symbols, counted with multiplicity.
    pub fn len(&self) -> usize {
        self.letters
            .iter()
            .map(|&(_, e)| e.unsigned_abs() as usize)
            .sum()
    }

    /// Letters expanded to exponent +-1.
    pub fn unit_letters(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.letters
            .iter()
            .flat_map(|&(g, e)| std::iter::repeat_n((g, e.signum()), e.unsigned_abs() as usize))
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(&other.letters).copied())
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        (0..k.unsigned_abs()).fold(Word::empty(), |acc, _| acc.mul(&base))
    }

    /// `[a, b] = a b a^-1 b^-1`.
    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.mul(b).mul(&a.inverse()).mul(&b.inverse())
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|&(g, _)| g).max()
    }
}

/// Generators, named words (`let` macros) and relators. Each relator is
/// understood as equal to the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<String>,
    macros: Vec<(String, Word)>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new<S: Into<String>>(generators: Vec<S>) -> Result<Self> {
        let generators: Vec<String> = generators.into_iter().map(Into::into).collect();
        for (i, g) in generators.iter().enumerate() {
            if !valid_name(g) {
                return Err(Error::Parse(format!("invalid generator name {g:?}")));
            }
            if generators[..i].contains(g) {
                return Err(Error::Parse(format!("duplicate generator {g:?}")));
            }
        }
        Ok(Self {
            generators,
            ..Self::default()
        })
    }

    /// Parses the text format:
    ///
    /// ```text
    /// gens: m n
    /// let w = n m^-1 n^-1 m
    /// rel: m w = w n
    /// ```
    ///
    /// A relator line is either a word or `lhs = rhs`, stored as
    /// `lhs rhs^-1`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pres: Option<Presentation> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ctx = |e: Error| Error::Parse(format!("line {}: {e}", lineno + 1));
            if let Some(rest) = line.strip_prefix("gens:") {
                if pres.is_some() {
                    return Err(ctx(Error::Parse("duplicate gens line".into())));
                }
                pres = Some(Presentation::new(rest.split_whitespace().collect()).map_err(ctx)?);
                continue;
            }
            let p = pres
                .as_mut()
                .ok_or_else(|| ctx(Error::Parse("`gens:` must come first".into())))?;
            if let Some(rest) = line.strip_prefix("let ") {
                let (name, body) = rest
                    .split_once('=')
                    .ok_or_else(|| ctx(Error::Parse("expected `let name = word`".into())))?;
                let word = p.parse_word(body).map_err(ctx)?;
                p.define(name.trim(), word).map_err(ctx)?;
            } else if let Some(rest) = line.strip_prefix("rel:") {
                let rel = p.parse_relation(rest).map_err(ctx)?;
                p.relators.push(rel);
            } else {
                return Err(ctx(Error::Parse(format!("unrecognised line {line:?}"))));
            }
        }
        pres.ok_or_else(|| Error::Parse("missing `gens:` line".into()))
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn macros(&self) -> &[(String, Word)] {
        &self.macros
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    pub fn macro_word(&self, name: &str) -> Option<&Word> {
        self.macros.iter().find(|(n, _)| n == name).map(|(_, w)| w)
    }

    /// Adds a named word usable in later words.
    pub fn define(&mut self, name: &str, word: Word) -> Result<()> {
        if !valid_name(name) {
            return Err(Error::Parse(format!("invalid macro name {name:?}")));
        }
        if self.generator_index(name).is_some() || self.macro_word(name).is_some() {
            return Err(Error::Parse(format!("name {name:?} already defined")));
        }
        self.check_word(&word)?;
        self.macros.push((name.to_string(), word));
        Ok(())
    }

    pub fn add_relator(&mut self, relator: Word) -> Result<()> {
        self.check_word(&relator)?;
        self.relators.push(relator);
        Ok(())
    }

    fn check_word(&self, word: &Word) -> Result<()> {
        match word.max_generator() {
            Some(g) if g >= self.generators.len() => Err(Error::InvalidInput(format!(
                "word references generator {g} but only {} exist",
                self.generators.len()
            ))),
            _ => Ok(()),
        }
    }

    /// `lhs = rhs` becomes `lhs rhs^-1`; a bare word is taken as is.
    pub fn parse_relation(&self, text: &str) -> Result<Word> {
        match text.split_once('=') {
            Some((lhs, rhs)) => Ok(self.parse_word(lhs)?.mul(&self.parse_word(rhs)?.inverse())),
            None => self.parse_word(text),
        }
    }

    /// Parses a word such as `n m^-1 n^-1 m`, `m^2`, `M` (an uppercase
    /// generator name means the inverse unless it is itself a name), or
    /// `1` for the identity. When every name is one character, tokens like
    /// `mw` are split into letters.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut letters = Vec::new();
        for token in text.split(|c: char| c.is_whitespace() || c == '*' || c == '.') {
            if token.is_empty() || token == "1" {
                continue;
            }
            let (name, exp) = split_exponent(token)?;
            match self.resolve(name) {
                Some(w) => letters.extend(w.pow(exp).letters),
                None => {
                    let single = name.chars().count() > 1
                        && name
                            .chars()
                            .all(|ch| self.resolve(&ch.to_string()).is_some());
                    if !single {
                        return Err(Error::UnknownGenerator(name.to_string()));
                    }
                    let mut chunk = Vec::new();
                    for ch in name.chars() {
                        chunk.extend(self.resolve(&ch.to_string()).expect("checked").letters);
                    }
                    letters.extend(Word::from_letters(chunk).pow(exp).letters);
                }
            }
        }
        Ok(Word::from_letters(letters))
    }

    fn resolve(&self, name: &str) -> Option<Word> {
        if let Some(g) = self.generator_index(name) {
            return Some(Word::generator(g));
        }
        if let Some(w) = self.macro_word(name) {
            return Some(w.clone());
        }
        let lower = name.to_lowercase();
        if lower != name {
            return self.resolve(&lower).map(|w| w.inverse());
        }
        None
    }

    /// Renders a word with `^` exponents, e.g. `n m^-1 n^-1 m^2`.
    pub fn format_word(&self, word: &Word) -> String {
        if word.is_empty() {
            return "1".to_string();
        }
        word.letters()
            .iter()
            .map(|&(g, e)| {
                let name = self.generators.get(g).map(String::as_str).unwrap_or("?");
                if e == 1 {
                    name.to_string()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Serializes back to the text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("gens: {}\n", self.generators.join(" "));
        for (name, w) in &self.macros {
            out.push_str(&format!("let {name} = {}\n", self.format_word(w)));
        }
        for r in &self.relators {
            out.push_str(&format!("rel: {}\n", self.format_word(r)));
        }
        out
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn split_exponent(token: &str) -> Result<(&str, i64)> {
    match token.split_once('^') {
        Some((name, exp)) => {
            let exp: i64 = exp
                .trim_matches(|c| c == '(' || c == ')' || c == '{' || c == '}')
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {token:?}")))?;
            Ok((name, exp))
        }
        None => Ok((token, 1)),
    }
}

/// All freely reduced words of length at most `max_len` over `num_gens`
/// generators, ordered by length and then lexicographically with letter order
/// `g0, g0^-1, g1, g1^-1, ...`.
pub fn word_ball(num_gens: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for letter in 0..2 * num_gens {
                if let Some(&last) = w.last() {
                    if last ^ 1 == letter {
                        continue;
                    }
                }
                let mut ext = w.clone();
                ext.push(letter);
                next.push(ext);
            }
        }
        out.extend(next.iter().map(|w| {
            Word::from_letters(w.iter().map(|&l| (l / 2, if l % 2 == 0 { 1 } else { -1 })))
        }));
        frontier = next;
    }
    out
}

/// Matrices that can carry a group representation.
pub trait GroupMatrix: Clone + Send + Sync {
    fn identity_of(dim: usize) -> Self;
    fn dim(&self) -> usize;
    fn compose(&self, other: &Self) -> Self;
    fn try_inverse(&self) -> Result<Self>;
    fn relation_outcome(&self) -> RelationOutcome;
}

impl GroupMatrix for RingMatrix {
    fn identity_of(dim: usize) -> Self {
        RingMatrix::identity(dim)
    }
    fn dim(&self) -> usize {
        RingMatrix::dim(self)
    }
    fn compose(&self, other: &Self) -> Self {
        self.mul(other)
            .expect("representation images share one dimension")
    }
    fn try_inverse(&self) -> Result<Self> {
        self.inverse()
    }
    fn relation_outcome(&self) -> RelationOutcome {
        RelationOutcome::Exact {
            identity: self.is_identity(),
        }
    }
}

impl GroupMatrix for NumMatrix {
    fn identity_of(dim: usize) -> Self {
        NumMatrix::identity(dim, dim)
    }
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn compose(&self, other: &Self) -> Self {
        self * other
    }
    fn try_inverse(&self) -> Result<Self> {
        self.clone().try_inverse().ok_or(Error::NotInvertible)
    }
    fn relation_outcome(&self) -> RelationOutcome {
        RelationOutcome::Numeric {
            max_deviation: identity_deviation(self),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RelationOutcome {
    Exact { identity: bool },
    Numeric { max_deviation: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relator: String,
    #[serde(flatten)]
    pub outcome: RelationOutcome,
}

impl RelationReport {
    /// Exact reports pass iff the identity holds; numeric ones iff the
    /// deviation is at most `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        match self.outcome {
            RelationOutcome::Exact { identity } => identity,
            RelationOutcome::Numeric { max_deviation } => max_deviation <= tol,
        }
    }
}

/// Generator images for a presentation, with cached inverses.
#[derive(Clone, Debug)]
pub struct Representation<M: GroupMatrix> {
    presentation: Presentation,
    images: Vec<M>,
    inverses: Vec<M>,
}

pub type ExactRep = Representation<RingMatrix>;
pub type NumericRep = Representation<NumMatrix>;

impl<M: GroupMatrix> Representation<M> {
    pub fn new(presentation: Presentation, images: Vec<M>) -> Result<Self> {
        if images.len() != presentation.num_generators() {
            return Err(Error::InvalidInput(format!(
                "{} images for {} generators",
                images.len(),
                presentation.num_generators()
            )));
        }
        let dim = images.first().map(GroupMatrix::dim).unwrap_or(1);
        if let Some(bad) = images.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.dim(),
            });
        }
        let inverses = images
            .iter()
            .map(GroupMatrix::try_inverse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            presentation,
            images,
            inverses,
        })
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn images(&self) -> &[M] {
        &self.images
    }

    pub fn image(&self, generator: usize) -> &M {
        &self.images[generator]
    }

    pub fn dim(&self) -> usize {
        self.images.first().map(GroupMatrix::dim).unwrap_or(1)
    }

    /// Ordered product of generator images; the empty word maps to I.
    pub fn evaluate_word(&self, word: &Word) -> M {
        let mut acc = M::identity_of(self.dim());
        for (g, e) in word.unit_letters() {
            let factor = if e > 0 {
                &self.images[g]
            } else {
                &self.inverses[g]
            };
            acc = acc.compose(factor);
        }
        acc
    }

    pub fn check_relations(&self) -> Vec<RelationReport> {
        self.presentation
            .relators()
            .iter()
            .map(|r| RelationReport {
                relator: self.presentation.format_word(r),
                outcome: self.evaluate_word(r).relation_outcome(),
            })
            .collect()
    }

    pub fn map_images<N: GroupMatrix>(&self, f: impl Fn(&M) -> N) -> Result<Representation<N>> {
        Representation::new(
            self.presentation.clone(),
            self.images.iter().map(f).collect(),
        )
    }
}

impl ExactRep {
    /// Substitutes `u = e^{i alpha}` in every image.
    pub fn evaluate(&self, alpha: f64) -> Result<NumericRep> {
        self.map_images(|m| m.evaluate(alpha))
    }

    /// True if every image has determinant exactly 1.
    pub fn is_unimodular(&self) -> bool {
        self.images.iter().all(|m| m.det().is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::StarLaurent;
    use proptest::prelude::*;

    fn fig8_pres() -> Presentation {
        Presentation::parse(
            "gens: m n\nlet w = n m^-1 n^-1 m\nlet l = n m^-1 n^-1 m^2 n^-1 m^-1 n\nrel: m w = w n\n",
        )
        .unwrap()
    }

    #[test]
    fn parse_commutator_word() {
        let p = fig8_pres();
        let w = p.parse_word("n m^-1 n^-1 m").unwrap();
        assert_eq!(w.letters(), &[(1, 1), (0, -1), (1, -1), (0, 1)]);
        let c = Word::commutator(&Word::generator(1), &Word::generator(0).inverse());
        assert_eq!(w, c);
        assert_eq!(p.macro_word("w"), Some(&w));
    }

    #[test]
    fn free_reduction() {
        let p = fig8_pres();
        assert!(p.parse_word("m m^-1").unwrap().is_empty());
        assert!(p.parse_word("m M").unwrap().is_empty());
        let l = p.parse_word("n m^-1 n^-1 m m n^-1 m^-1 n").unwrap();
        assert_eq!(l.letters().len(), 7);
        assert_eq!(l.letters()[3], (0, 2));
        assert_eq!(l.len(), 8);
        assert_eq!(p.macro_word("l"), Some(&l));
    }

    #[test]
    fn relator_is_lhs_times_rhs_inverse() {
        let p = fig8_pres();
        let w = p.macro_word("w").unwrap().clone();
        let expected = Word::generator(0)
            .mul(&w)
            .mul(&Word::generator(1).inverse())
            .mul(&w.inverse());
        assert_eq!(p.relators(), std::slice::from_ref(&expected));
        assert_eq!(p.parse_relation("m w n^-1 w^-1").unwrap(), expected);
        assert_eq!(p.parse_relation("mwNW").unwrap(), expected);
    }

    #[test]
    fn unknown_generator() {
        let p = fig8_pres();
        assert!(matches!(p.parse_word("m x"), Err(Error::UnknownGenerator(g)) if g == "x"));
        assert!(Presentation::parse("rel: m\n").is_err());
        assert!(Presentation::parse("gens: a a\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let p = fig8_pres();
        assert_eq!(Presentation::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn ball_sizes_and_order() {
        let ball = word_ball(2, 3);
        assert_eq!(ball.len(), 1 + 4 + 12 + 36);
        assert!(ball[0].is_empty());
        assert_eq!(ball[1], Word::generator(0));
        assert_eq!(ball[2], Word::generator(0).inverse());
        assert!(ball.iter().all(|w| w.len() <= 3));
        let mut sorted = ball.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), ball.len());
        assert_eq!(word_ball(2, 6).len(), 1457);
    }

    #[test]
    fn trivial_rep_passes_relations() {
        let p = fig8_pres();
        let rep = ExactRep::new(p, vec![RingMatrix::identity(4), RingMatrix::identity(4)]).unwrap();
        assert!(rep.check_relations().iter().all(|r| r.passes(0.0)));
        assert!(rep.evaluate_word(&Word::empty()).is_identity());
    }

    #[test]
    fn image_count_checked() {
        let p = fig8_pres();
        assert!(ExactRep::new(p.clone(), vec![RingMatrix::identity(2)]).is_err());
        assert!(ExactRep::new(p, vec![RingMatrix::identity(2), RingMatrix::identity(3)]).is_err());
    }

    fn sample_rep() -> ExactRep {
        let u = StarLaurent::var();
        let mut a = RingMatrix::identity(3);
        a.set(0, 1, u.clone());
        a.set(1, 2, StarLaurent::from_int(2));
        let mut b = RingMatrix::identity(3);
        b.set(2, 0, u.star());
        b.set(1, 1, u.clone());
        b.set(2, 2, u.star());
        ExactRep::new(Presentation::new(vec!["a", "b"]).unwrap(), vec![a, b]).unwrap()
    }

    fn arb_word() -> impl Strategy<Value = Word> {
        prop::collection::vec((0usize..2, -2i64..=2), 0..6).prop_map(Word::from_letters)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn evaluation_is_multiplicative(a in arb_word(), b in arb_word()) {
            let rep = sample_rep();
            let lhs = rep.evaluate_word(&a.mul(&b));
            let rhs = rep.evaluate_word(&a).mul(&rep.evaluate_word(&b)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inverse_word_evaluates_to_inverse(a in arb_word()) {
            let rep = sample_rep();
            prop_assert_eq!(rep.evaluate_word(&a.inverse()), rep.evaluate_word(&a).inverse().unwrap());
        }

        #[test]
        fn free_reduction_preserves_value(raw in prop::collection::vec((0usize..2, -1i64..=1), 0..10)) {
            let rep = sample_rep();
            let reduced = Word::from_letters(raw.clone());
            let unreduced = raw.iter().fold(RingMatrix::identity(3), |acc, &(g, e)| match e {
                1 => acc.mul(rep.image(g)).unwrap(),
                -1 => acc.mul(&rep.image(g).inverse().unwrap()).unwrap(),
                _ => acc,
            });
            prop_assert_eq!(rep.evaluate_word(&reduced), unreduced);
        }
    }
}
