//! Clopen subsets of the Cantor space X = {0, …, p−1}^ℕ, in canonical form.
//!
//! A clopen set is a finite union of cylinders, where the cylinder [w] of a
//! finite word w is the set of sequences beginning with w (coordinate 0
//! first).  The canonical form is the unique family of pairwise non-nested
//! words with no complete sibling family (never all p children of a common
//! parent), so two clopen sets are equal as sets exactly when their
//! canonical forms are equal as values.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::textio;

pub(crate) const MIN_BASE: u32 = 2;
pub(crate) const MAX_BASE: u32 = 36;

/// Hard ceiling on how many cylinders a refinement may enumerate.
pub(crate) const MAX_REFINED: u128 = 1 << 24;

pub(crate) fn check_base(base: u32) -> Result<()> {
    if (MIN_BASE..=MAX_BASE).contains(&base) {
        Ok(())
    } else {
        Err(Error::InvalidBase(base))
    }
}

pub(crate) fn check_same_base(expected: u32, found: u32) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::MixedBase { expected, found })
    }
}

fn digit_char(d: u8) -> char {
    if d < 10 {
        (b'0' + d) as char
    } else {
        (b'a' + d - 10) as char
    }
}

pub(crate) fn char_digit(c: char, base: u32) -> Result<u8> {
    let d = match c {
        '0'..='9' => c as u8 - b'0',
        'a'..='z' => c as u8 - b'a' + 10,
        _ => return Err(Error::InvalidDigit { digit: u8::MAX, base }),
    };
    if (d as u32) < base {
        Ok(d)
    } else {
        Err(Error::InvalidDigit { digit: d, base })
    }
}

/// A finite word over {0, …, p−1}, naming the cylinder of points that begin
/// with its digits.  Digit i of the word constrains coordinate i of the
/// point; the odometer's carry arithmetic treats digit 0 as least
/// significant.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    base: u32,
    digits: Vec<u8>,
}

impl Word {
    pub fn new(base: u32, digits: Vec<u8>) -> Result<Self> {
        check_base(base)?;
        for &d in &digits {
            if d as u32 >= base {
                return Err(Error::InvalidDigit { digit: d, base });
            }
        }
        Ok(Word { base, digits })
    }

    /// The empty word, naming the whole space.
    pub fn root(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(Word { base, digits: Vec::new() })
    }

    pub fn parse(base: u32, s: &str) -> Result<Self> {
        check_base(base)?;
        if s == "ε" {
            return Word::root(base);
        }
        let digits = s
            .chars()
            .map(|c| char_digit(c, base))
            .collect::<Result<Vec<u8>>>()?;
        Ok(Word { base, digits })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.base == other.base && other.digits.starts_with(&self.digits)
    }

    pub fn child(&self, digit: u8) -> Result<Word> {
        if digit as u32 >= self.base {
            return Err(Error::InvalidDigit { digit, base: self.base });
        }
        let mut digits = self.digits.clone();
        digits.push(digit);
        Ok(Word { base: self.base, digits })
    }

    /// Extends with zeros up to `len` coordinates (no-op if already longer).
    pub fn zero_extended(&self, len: usize) -> Word {
        let mut digits = self.digits.clone();
        while digits.len() < len {
            digits.push(0);
        }
        Word { base: self.base, digits }
    }

    pub(crate) fn truncated(&self, len: usize) -> Word {
        Word {
            base: self.base,
            digits: self.digits[..len.min(self.digits.len())].to_vec(),
        }
    }

    /// Longest common prefix with `other`.
    pub fn common_prefix(&self, other: &Word) -> Word {
        let n = self
            .digits
            .iter()
            .zip(&other.digits)
            .take_while(|(a, b)| a == b)
            .count();
        self.truncated(n)
    }

    /// Σ digit_i · p^i, the value the odometer's carry arithmetic acts on.
    pub fn value_u128(&self) -> Result<u128> {
        let p = self.base as u128;
        let mut acc: u128 = 0;
        let mut scale: u128 = 1;
        for (i, &d) in self.digits.iter().enumerate() {
            acc = acc
                .checked_add((d as u128).checked_mul(scale).ok_or(Error::PowerOverflow)?)
                .ok_or(Error::PowerOverflow)?;
            if i + 1 < self.digits.len() {
                scale = scale.checked_mul(p).ok_or(Error::PowerOverflow)?;
            }
        }
        Ok(acc)
    }

    /// The word of (value + n) mod p^len, computed digit by digit so depth
    /// is never limited by machine-integer width.
    pub fn translated(&self, n: i64) -> Word {
        let p = self.base as u128;
        let mut digits = self.digits.clone();
        if n >= 0 {
            let mut carry = n as u128;
            for d in digits.iter_mut() {
                if carry == 0 {
                    break;
                }
                let total = *d as u128 + carry;
                *d = (total % p) as u8;
                carry = total / p;
            }
        } else {
            let mut rest = n.unsigned_abs() as u128;
            let mut borrow = 0u32;
            for d in digits.iter_mut() {
                let sub = (rest % p) as u32 + borrow;
                rest /= p;
                if sub == 0 {
                    continue;
                }
                let t = *d as i64 - sub as i64;
                if t < 0 {
                    *d = (t + p as i64) as u8;
                    borrow = 1;
                } else {
                    *d = t as u8;
                    borrow = 0;
                }
            }
        }
        Word { base: self.base, digits }
    }

    /// Least non-negative n with translated(self, n) == other; both words
    /// must have the same length.
    pub fn offset_to(&self, other: &Word) -> Result<i64> {
        check_same_base(self.base, other.base)?;
        if self.len() != other.len() {
            return Err(Error::Invariant(
                "offset between words of different lengths".into(),
            ));
        }
        let p = self.base as u128;
        let mut modulus: u128 = 1;
        for _ in 0..self.len() {
            modulus = modulus.checked_mul(p).ok_or(Error::PowerOverflow)?;
        }
        let v1 = self.value_u128()?;
        let v2 = other.value_u128()?;
        let r = (v2 + modulus - v1) % modulus;
        i64::try_from(r).map_err(|_| Error::PowerOverflow)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.is_empty() {
            return write!(f, "ε");
        }
        for &d in &self.digits {
            write!(f, "{}", digit_char(d))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Trie over words used for canonicalization.  `covered` marks that the
/// whole cylinder at this node belongs to the set.
struct TrieNode {
    covered: bool,
    children: Vec<Option<Box<TrieNode>>>,
}

impl TrieNode {
    fn new(base: u32) -> Self {
        TrieNode {
            covered: false,
            children: (0..base).map(|_| None).collect(),
        }
    }

    fn insert(&mut self, base: u32, digits: &[u8]) {
        if self.covered {
            return;
        }
        match digits.split_first() {
            None => {
                self.covered = true;
                for c in self.children.iter_mut() {
                    *c = None;
                }
            }
            Some((&d, rest)) => {
                self.children[d as usize]
                    .get_or_insert_with(|| Box::new(TrieNode::new(base)))
                    .insert(base, rest);
            }
        }
    }

    /// Merges any node whose p children are all fully covered.
    fn reduce(&mut self) {
        if self.covered {
            return;
        }
        for c in self.children.iter_mut().flatten() {
            c.reduce();
        }
        if self
            .children
            .iter()
            .all(|c| c.as_ref().is_some_and(|n| n.covered))
        {
            self.covered = true;
            for c in self.children.iter_mut() {
                *c = None;
            }
        }
    }

    fn collect(&self, base: u32, prefix: &mut Vec<u8>, out: &mut Vec<Word>) {
        if self.covered {
            out.push(Word { base, digits: prefix.clone() });
            return;
        }
        for (d, c) in self.children.iter().enumerate() {
            if let Some(c) = c {
                prefix.push(d as u8);
                c.collect(base, prefix, out);
                prefix.pop();
            }
        }
    }

    /// Emits the canonical complement: every absent child branch, plus the
    /// complements of present non-covered branches.
    fn collect_complement(&self, base: u32, prefix: &mut Vec<u8>, out: &mut Vec<Word>) {
        if self.covered {
            return;
        }
        for (d, c) in self.children.iter().enumerate() {
            prefix.push(d as u8);
            match c {
                None => out.push(Word { base, digits: prefix.clone() }),
                Some(c) => c.collect_complement(base, prefix, out),
            }
            prefix.pop();
        }
    }
}

/// A clopen subset of X in canonical form: sorted, pairwise non-nested
/// words with no complete sibling family.  Equality of values is equality
/// of sets.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClopenSet {
    base: u32,
    words: Vec<Word>,
}

impl ClopenSet {
    /// Canonicalizes an arbitrary union of cylinders.
    pub fn canonicalize<I>(base: u32, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = Word>,
    {
        check_base(base)?;
        let mut root = TrieNode::new(base);
        for w in words {
            check_same_base(base, w.base)?;
            root.insert(base, &w.digits);
        }
        root.reduce();
        let mut out = Vec::new();
        root.collect(base, &mut Vec::new(), &mut out);
        Ok(ClopenSet { base, words: out })
    }

    pub fn empty(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(ClopenSet { base, words: Vec::new() })
    }

    pub fn full(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(ClopenSet {
            base,
            words: vec![Word { base, digits: Vec::new() }],
        })
    }

    /// The single cylinder [w].
    pub fn cylinder(w: &Word) -> Self {
        ClopenSet {
            base: w.base,
            words: vec![w.clone()],
        }
    }

    /// Convenience constructor from digit strings, mostly for tests and
    /// fixtures: `ClopenSet::of(2, &["0", "11"])`.
    pub fn of(base: u32, words: &[&str]) -> Result<Self> {
        let words = words
            .iter()
            .map(|s| Word::parse(base, s))
            .collect::<Result<Vec<_>>>()?;
        ClopenSet::canonicalize(base, words)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Canonical words, sorted lexicographically.
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.words.len() == 1 && self.words[0].is_empty()
    }

    /// Length of the longest canonical word (0 for ∅ and X).
    pub fn depth(&self) -> usize {
        self.words.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn complement(&self) -> ClopenSet {
        if self.is_empty() {
            return ClopenSet {
                base: self.base,
                words: vec![Word { base: self.base, digits: Vec::new() }],
            };
        }
        let mut root = TrieNode::new(self.base);
        for w in &self.words {
            root.insert(self.base, &w.digits);
        }
        let mut out = Vec::new();
        root.collect_complement(self.base, &mut Vec::new(), &mut out);
        ClopenSet { base: self.base, words: out }
    }

    pub fn union(&self, other: &ClopenSet) -> Result<ClopenSet> {
        check_same_base(self.base, other.base)?;
        ClopenSet::canonicalize(
            self.base,
            self.words.iter().chain(&other.words).cloned(),
        )
    }

    pub fn intersection(&self, other: &ClopenSet) -> Result<ClopenSet> {
        check_same_base(self.base, other.base)?;
        let mut words = Vec::new();
        for a in &self.words {
            for b in &other.words {
                if a.is_prefix_of(b) {
                    words.push(b.clone());
                } else if b.is_prefix_of(a) {
                    words.push(a.clone());
                }
            }
        }
        ClopenSet::canonicalize(self.base, words)
    }

    pub fn difference(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.intersection(&other.complement())
    }

    pub fn is_subset_of(&self, other: &ClopenSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    /// Number of cylinders the set splits into at depth k.
    pub fn cylinder_count_at(&self, k: usize) -> Result<u128> {
        let p = self.base as u128;
        let mut total: u128 = 0;
        for w in &self.words {
            if w.len() > k {
                return Err(Error::DepthTooSmall { required: w.len(), found: k });
            }
            let mut block: u128 = 1;
            for _ in 0..(k - w.len()) {
                block = block.checked_mul(p).ok_or(Error::PowerOverflow)?;
            }
            total = total.checked_add(block).ok_or(Error::PowerOverflow)?;
        }
        Ok(total)
    }

    /// All depth-k words whose cylinders make up the set.  Requires
    /// k ≥ depth(); the result is sorted.
    pub fn refine_to_depth(&self, k: usize) -> Result<Vec<Word>> {
        let count = self.cylinder_count_at(k)?;
        if count > MAX_REFINED {
            return Err(Error::RefinementTooLarge { count, limit: MAX_REFINED });
        }
        let mut out = Vec::with_capacity(count as usize);
        for w in &self.words {
            let mut stack = vec![w.digits.clone()];
            while let Some(digits) = stack.pop() {
                if digits.len() == k {
                    out.push(Word { base: self.base, digits });
                } else {
                    // Push children in reverse so the stack pops them in
                    // ascending digit order.
                    for d in (0..self.base as u8).rev() {
                        let mut next = digits.clone();
                        next.push(d);
                        stack.push(next);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Smallest depth at which the set splits into at least two cylinders.
    pub fn splitting_depth(&self) -> Result<usize> {
        match self.words.len() {
            0 => Err(Error::EmptySet),
            1 => Ok(self.words[0].len() + 1),
            _ => Ok(self.depth()),
        }
    }

    /// Whether [w] ⊆ self.
    pub fn contains_cylinder(&self, w: &Word) -> bool {
        self.words.iter().any(|u| u.is_prefix_of(w))
    }

    /// Whether [w] meets self.
    pub fn meets_cylinder(&self, w: &Word) -> bool {
        self.words
            .iter()
            .any(|u| u.is_prefix_of(w) || w.is_prefix_of(u))
    }

    /// Haar measure: Σ p^{−|w|} over canonical words, exact.
    pub(crate) fn measure(&self) -> BigRational {
        let p = BigUint::from(self.base);
        let mut total = BigRational::zero();
        for w in &self.words {
            let den = p.pow(w.len() as u32);
            total += BigRational::new(1.into(), den.into());
        }
        total
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClopenSet(base={}, {{", self.base)?;
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "}})")
    }
}

/// Renders the line-oriented text form:
///
/// ```text
/// base 2
/// 0
/// 10
/// ```
///
/// The empty set and the whole space render as the `EMPTY` and `FULL`
/// tokens respectively.
impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "base {}", self.base)?;
        if self.is_empty() {
            writeln!(f, "EMPTY")
        } else if self.is_full() {
            writeln!(f, "FULL")
        } else {
            for w in &self.words {
                writeln!(f, "{w}")?;
            }
            Ok(())
        }
    }
}

/// Parses the text form accepted by [`ClopenSet`]'s `Display`.  Word lists
/// need not be canonical; the result always is.
pub fn parse_clopen(text: &str) -> Result<ClopenSet> {
    let lines = textio::numbered_lines(text);
    let base = textio::parse_base_header(&lines)?;
    parse_clopen_body(base, &lines[1..])
}

/// Parses word lines (or an `EMPTY`/`FULL` token) with an already-known base.
pub(crate) fn parse_clopen_body(base: u32, lines: &[(usize, String)]) -> Result<ClopenSet> {
    if let [(no, token)] = lines {
        match token.as_str() {
            "EMPTY" => return ClopenSet::empty(base),
            "FULL" => return ClopenSet::full(base),
            _ => {
                let _ = no;
            }
        }
    }
    let mut words = Vec::new();
    for (no, line) in lines {
        if line == "EMPTY" || line == "FULL" {
            return Err(textio::parse_err(
                *no,
                format!("`{line}` must be the only entry"),
            ));
        }
        let w = Word::parse(base, line).map_err(|e| textio::parse_err(*no, e.to_string()))?;
        if w.is_empty() {
            return Err(textio::parse_err(*no, "use the FULL token for the whole space"));
        }
        words.push(w);
    }
    if words.is_empty() {
        return Err(textio::parse_err(
            1,
            "no words given; write EMPTY or FULL explicitly",
        ));
    }
    ClopenSet::canonicalize(base, words)
}

/// Inline rendering used inside other formats: comma-separated words, or
/// the `EMPTY`/`FULL` tokens.
pub(crate) fn render_clopen_inline(set: &ClopenSet) -> String {
    if set.is_empty() {
        "EMPTY".to_string()
    } else if set.is_full() {
        "FULL".to_string()
    } else {
        set.words
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub(crate) fn parse_clopen_inline(base: u32, line_no: usize, s: &str) -> Result<ClopenSet> {
    match s.trim() {
        "EMPTY" => ClopenSet::empty(base),
        "FULL" => ClopenSet::full(base),
        body => {
            let words = body
                .split(',')
                .map(|part| {
                    Word::parse(base, part.trim())
                        .map_err(|e| textio::parse_err(line_no, e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            ClopenSet::canonicalize(base, words)
        }
    }
}
