//! Elements of the topological full group of a base-p odometer.
//!
//! Such an element acts on X by applying a fixed power of the odometer on
//! each cylinder of a finite partition: a table {[w] ↦ n_w}.  The table is
//! kept canonical (sibling cells with equal powers are merged), so two
//! elements are equal as maps exactly when they are equal as values.
//! Construction validates that the table's domain partitions the space and
//! that its images are pairwise disjoint, which for measure reasons makes
//! the map a homeomorphism.

use std::fmt;

use num_bigint::BigUint;

use crate::clopen::{check_base, check_same_base, ClopenSet, Word, MAX_REFINED};
use crate::error::{Error, Result};
use crate::odometer::{Odometer, Point};
use crate::textio;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FullGroupElement {
    system: Odometer,
    /// Sorted by word; canonical under sibling merging.
    table: Vec<(Word, i64)>,
}

impl FullGroupElement {
    /// Builds an element from an explicit table, validating that the words
    /// partition the space and the images are disjoint.  Mergeable sibling
    /// cells are merged, so equal maps construct equal values.
    pub fn from_table(base: u32, entries: Vec<(Word, i64)>) -> Result<Self> {
        check_base(base)?;
        if entries.is_empty() {
            return Err(Error::NotPartition("the table is empty".into()));
        }
        let mut entries = entries;
        for (w, _) in &entries {
            check_same_base(base, w.base())?;
        }
        entries.sort();
        for pair in entries.windows(2) {
            if pair[0].0.is_prefix_of(&pair[1].0) {
                return Err(Error::NotPartition(format!(
                    "cylinder {} overlaps {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        let depth = entries.iter().map(|(w, _)| w.len()).max().unwrap();
        let p = BigUint::from(base);
        let covered: BigUint = entries
            .iter()
            .map(|(w, _)| p.pow((depth - w.len()) as u32))
            .sum();
        if covered != p.pow(depth as u32) {
            return Err(Error::NotPartition(
                "the cylinders do not cover the space".into(),
            ));
        }
        let mut images: Vec<Word> = entries.iter().map(|(w, n)| w.translated(*n)).collect();
        images.sort();
        for pair in images.windows(2) {
            if pair[0].is_prefix_of(&pair[1]) {
                return Err(Error::NotBijective(format!(
                    "images {} and {} overlap",
                    pair[0], pair[1]
                )));
            }
        }
        let system = Odometer::new(base)?;
        Ok(FullGroupElement {
            system,
            table: merge_sorted(base, entries),
        })
    }

    /// Internal constructor for tables already known to be valid (outputs
    /// of composition, inversion, restriction).
    fn from_sorted_unchecked(system: Odometer, entries: Vec<(Word, i64)>) -> Self {
        debug_assert!(entries.windows(2).all(|p| p[0].0 < p[1].0));
        FullGroupElement {
            system,
            table: merge_sorted(system.base(), entries),
        }
    }

    pub fn identity(base: u32) -> Result<Self> {
        Ok(FullGroupElement {
            system: Odometer::new(base)?,
            table: vec![(Word::root(base)?, 0)],
        })
    }

    /// The global odometer power σ^n as a table element.
    pub fn sigma_power(base: u32, n: i64) -> Result<Self> {
        Ok(FullGroupElement {
            system: Odometer::new(base)?,
            table: vec![(Word::root(base)?, n)],
        })
    }

    /// The involution exchanging two disjoint same-depth cylinders by the
    /// odometer powers ±(value(w2) − value(w1)), fixing everything else.
    pub fn pair_swap(w1: &Word, w2: &Word) -> Result<Self> {
        let base = w1.base();
        check_same_base(base, w2.base())?;
        if w1.len() != w2.len() || w1.is_empty() {
            return Err(Error::Invariant(
                "pair swap needs two nonempty words of equal length".into(),
            ));
        }
        if w1 == w2 {
            return Err(Error::Invariant("pair swap needs distinct words".into()));
        }
        let n = w1.offset_to(w2)?;
        let mut entries = vec![(w1.clone(), n), (w2.clone(), -n)];
        let swapped = ClopenSet::canonicalize(base, [w1.clone(), w2.clone()])?;
        for w in swapped.complement().words() {
            entries.push((w.clone(), 0));
        }
        FullGroupElement::from_table(base, entries)
    }

    pub fn base(&self) -> u32 {
        self.system.base()
    }

    pub fn system(&self) -> Odometer {
        self.system
    }

    /// The canonical table, sorted by cylinder word.
    pub fn table(&self) -> &[(Word, i64)] {
        &self.table
    }

    /// Depth of the finest cylinder in the table.
    pub fn depth(&self) -> usize {
        self.table.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.table.len() == 1 && self.table[0].1 == 0
    }

    /// The power applied over [w], when a single cell covers that cylinder.
    fn cell_power_over(&self, w: &Word) -> Option<i64> {
        self.table
            .iter()
            .find(|(u, _)| u.is_prefix_of(w))
            .map(|(_, n)| *n)
    }

    /// Cells strictly inside [w].
    fn cells_under<'a>(&'a self, w: &'a Word) -> impl Iterator<Item = &'a (Word, i64)> {
        self.table
            .iter()
            .filter(move |(u, _)| w.is_prefix_of(u) && u.len() > w.len())
    }

    /// The odometer power the element applies on [w].  Errors if [w] is
    /// coarser than the table's cells.
    pub fn power_on(&self, w: &Word) -> Result<i64> {
        check_same_base(self.base(), w.base())?;
        self.cell_power_over(w).ok_or_else(|| Error::DepthTooSmall {
            required: self
                .cells_under(w)
                .map(|(u, _)| u.len())
                .max()
                .unwrap_or(w.len()),
            found: w.len(),
        })
    }

    /// The composition self ∘ other: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same_base(self.base(), other.base())?;
        let mut entries = Vec::new();
        for (w, nh) in &other.table {
            let mid = w.translated(*nh);
            if let Some(ng) = self.cell_power_over(&mid) {
                let total = nh.checked_add(ng).ok_or(Error::PowerOverflow)?;
                entries.push((w.clone(), total));
            } else {
                // [mid] straddles several of self's cells: split [w] along
                // their preimages under σ^nh.
                for (u, ng) in self.cells_under(&mid) {
                    let total = nh.checked_add(*ng).ok_or(Error::PowerOverflow)?;
                    entries.push((u.translated(-nh), total));
                }
            }
        }
        entries.sort();
        Ok(Self::from_sorted_unchecked(self.system, entries))
    }

    pub fn invert(&self) -> Result<Self> {
        let mut entries = self
            .table
            .iter()
            .map(|(w, n)| {
                Ok((w.translated(*n), n.checked_neg().ok_or(Error::PowerOverflow)?))
            })
            .collect::<Result<Vec<_>>>()?;
        entries.sort();
        Ok(Self::from_sorted_unchecked(self.system, entries))
    }

    /// The conjugate h ∘ self ∘ h⁻¹, i.e. self relabelled along h.
    pub fn conjugate_by(&self, h: &Self) -> Result<Self> {
        h.compose(self)?.compose(&h.invert()?)
    }

    /// The support {x : g(x) ≠ x}, which is clopen: the odometer acts
    /// freely, so a cell moves all of its points or none of them.
    pub fn support(&self) -> ClopenSet {
        ClopenSet::canonicalize(
            self.base(),
            self.table
                .iter()
                .filter(|(_, n)| *n != 0)
                .map(|(w, _)| w.clone()),
        )
        .expect("table words share the element's base")
    }

    /// The image set g(V).
    pub fn image_of(&self, v: &ClopenSet) -> Result<ClopenSet> {
        check_same_base(self.base(), v.base())?;
        let mut words = Vec::new();
        for w in v.words() {
            if let Some(n) = self.cell_power_over(w) {
                words.push(w.translated(n));
            } else {
                for (u, n) in self.cells_under(w) {
                    words.push(u.translated(*n));
                }
            }
        }
        ClopenSet::canonicalize(self.base(), words)
    }

    /// Applies the element to an eventually periodic point.
    pub fn apply_point(&self, x: &Point) -> Result<Point> {
        check_same_base(self.base(), x.base())?;
        for (w, n) in &self.table {
            if w.digits().iter().enumerate().all(|(i, &d)| x.digit(i) == d) {
                return self.system.apply_power(*n, x);
            }
        }
        Err(Error::Invariant("no table cell contains the point".into()))
    }

    /// True for elements of order exactly two.  The identity is not an
    /// involution.
    pub fn is_involution(&self) -> Result<bool> {
        if self.is_identity() {
            return Ok(false);
        }
        Ok(self.compose(self)?.is_identity())
    }

    /// The element that agrees with self on V and fixes everything else.
    /// Requires g(V) = V.
    pub fn restrict(&self, v: &ClopenSet) -> Result<Self> {
        check_same_base(self.base(), v.base())?;
        let image = self.image_of(v)?;
        if image != *v {
            return Err(Error::NotInvariant(format!(
                "image has canonical words {:?}",
                image.words()
            )));
        }
        let mut entries = Vec::new();
        for (u, n) in &self.table {
            let cell = ClopenSet::cylinder(u);
            for w in cell.intersection(v)?.words() {
                entries.push((w.clone(), *n));
            }
            for w in cell.difference(v)?.words() {
                entries.push((w.clone(), 0));
            }
        }
        // The table is rebuilt from scratch, so run full validation; a
        // failure here would mean the invariance check above was wrong.
        FullGroupElement::from_table(self.base(), entries)
    }

    /// An involution whose support is exactly the two lexicographically
    /// smallest cylinders of A at its splitting depth.  Needs A nonempty.
    pub fn make_involution(a: &ClopenSet) -> Result<Self> {
        let depth = a.splitting_depth()?;
        let cylinders = a.refine_to_depth(depth)?;
        debug_assert!(cylinders.len() >= 2);
        FullGroupElement::pair_swap(&cylinders[0], &cylinders[1])
    }

    /// All pair swaps of A's depth-k cylinders, in lexicographic pair
    /// order.  The union of their supports is exactly A.
    pub fn involutions_covering(a: &ClopenSet, depth: usize) -> Result<Vec<Self>> {
        let cylinders = a.refine_to_depth(depth)?;
        let m = cylinders.len() as u128;
        if m < 2 {
            return Err(Error::NotSplittable { depth });
        }
        let pairs = m * (m - 1) / 2;
        if pairs > MAX_REFINED {
            return Err(Error::RefinementTooLarge {
                count: pairs,
                limit: MAX_REFINED,
            });
        }
        let mut out = Vec::with_capacity(pairs as usize);
        for i in 0..cylinders.len() {
            for j in i + 1..cylinders.len() {
                out.push(FullGroupElement::pair_swap(&cylinders[i], &cylinders[j])?);
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for FullGroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FullGroupElement(base={}, {{", self.base())?;
        for (i, (w, n)) in self.table.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}↦{n}")?;
        }
        write!(f, "}})")
    }
}

/// Merges complete sibling families with equal powers until no more exist.
/// Input and output are sorted by word.
fn merge_sorted(base: u32, mut entries: Vec<(Word, i64)>) -> Vec<(Word, i64)> {
    let p = base as usize;
    loop {
        let mut merged_any = false;
        let mut next: Vec<(Word, i64)> = Vec::with_capacity(entries.len());
        let mut i = 0;
        while i < entries.len() {
            let (w, n) = &entries[i];
            let len = w.len();
            let is_family = len > 0
                && *w.digits().last().unwrap() == 0
                && i + p <= entries.len()
                && (0..p).all(|d| {
                    let (u, m) = &entries[i + d];
                    u.len() == len
                        && m == n
                        && u.digits()[..len - 1] == w.digits()[..len - 1]
                        && u.digits()[len - 1] == d as u8
                });
            if is_family {
                let parent = w.truncated(len - 1);
                next.push((parent, *n));
                i += p;
                merged_any = true;
            } else {
                next.push(entries[i].clone());
                i += 1;
            }
        }
        entries = next;
        if !merged_any {
            return entries;
        }
    }
}

/// A union/intersection formula over supports of involutions, witnessing
/// how a clopen set is generated from involution supports.
#[derive(Clone, Debug)]
pub enum SupportExpr {
    Leaf(FullGroupElement),
    Union(Box<SupportExpr>, Box<SupportExpr>),
    Intersection(Box<SupportExpr>, Box<SupportExpr>),
}

impl SupportExpr {
    /// Evaluates the formula to the clopen set it denotes.
    pub fn eval(&self) -> Result<ClopenSet> {
        match self {
            SupportExpr::Leaf(g) => Ok(g.support()),
            SupportExpr::Union(a, b) => a.eval()?.union(&b.eval()?),
            SupportExpr::Intersection(a, b) => a.eval()?.intersection(&b.eval()?),
        }
    }

    /// The involutions at the leaves, in formula order.
    pub fn leaves(&self) -> Vec<&FullGroupElement> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a FullGroupElement>) {
        match self {
            SupportExpr::Leaf(g) => out.push(g),
            SupportExpr::Union(a, b) | SupportExpr::Intersection(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    /// Renders the formula with leaves numbered in traversal order:
    /// `(supp1 ∩ supp2) ∪ supp3`.
    pub fn formula(&self) -> String {
        fn go(expr: &SupportExpr, counter: &mut usize, out: &mut String) {
            match expr {
                SupportExpr::Leaf(_) => {
                    *counter += 1;
                    out.push_str(&format!("supp{counter}"));
                }
                SupportExpr::Union(a, b) => {
                    out.push('(');
                    go(a, counter, out);
                    out.push_str(" ∪ ");
                    go(b, counter, out);
                    out.push(')');
                }
                SupportExpr::Intersection(a, b) => {
                    out.push('(');
                    go(a, counter, out);
                    out.push_str(" ∩ ");
                    go(b, counter, out);
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        let mut counter = 0;
        go(self, &mut counter, &mut out);
        out
    }
}

/// Expresses a nonempty clopen set as a union/intersection formula over
/// supports of involutions.  The whole space is a single support; any other
/// set is assembled cylinder by cylinder, each cylinder [u] arising as the
/// intersection of the supports of two swaps that both move [u] but
/// otherwise move disjoint partners.
pub fn express_by_involution_supports(a: &ClopenSet) -> Result<SupportExpr> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.is_full() {
        return Ok(SupportExpr::Leaf(FullGroupElement::make_involution(a)?));
    }
    let base = a.base();
    let mut parts: Vec<SupportExpr> = Vec::new();
    for w in a.words() {
        // Work at a depth offering at least three cylinders, so two
        // distinct swap partners exist outside [u].
        let mut k = w.len().max(1);
        while (base as u128).pow(k as u32) < 3 {
            k += 1;
        }
        for u in ClopenSet::cylinder(w).refine_to_depth(k)? {
            // The two lexicographically smallest depth-k words other than
            // u itself; p^k ≥ 3 guarantees they exist.
            let mut partners = Vec::new();
            for value in 0..3u64 {
                let mut digits = vec![0u8; k];
                let mut v = value;
                for slot in digits.iter_mut() {
                    *slot = (v % base as u64) as u8;
                    v /= base as u64;
                }
                let candidate = Word::new(base, digits)?;
                if candidate != u {
                    partners.push(candidate);
                }
                if partners.len() == 2 {
                    break;
                }
            }
            let lhs = FullGroupElement::pair_swap(&u, &partners[0])?;
            let rhs = FullGroupElement::pair_swap(&u, &partners[1])?;
            parts.push(SupportExpr::Intersection(
                Box::new(SupportExpr::Leaf(lhs)),
                Box::new(SupportExpr::Leaf(rhs)),
            ));
        }
    }
    let mut iter = parts.into_iter();
    let first = iter.next().expect("nonempty set yields at least one cylinder");
    Ok(iter.fold(first, |acc, next| {
        SupportExpr::Union(Box::new(acc), Box::new(next))
    }))
}

/// Renders the element table format:
///
/// ```text
/// base 2
/// 00:2
/// 01:-2
/// 1:0
/// ```
///
/// The identity is `ε:0`.
impl fmt::Display for FullGroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "base {}", self.base())?;
        for (w, n) in &self.table {
            writeln!(f, "{w}:{n}")?;
        }
        Ok(())
    }
}

/// Parses the table format accepted by `Display`.  Entries may come in any
/// order and need not be merged; the result is canonical.
pub fn parse_element(text: &str) -> Result<FullGroupElement> {
    let lines = textio::numbered_lines(text);
    let base = textio::parse_base_header(&lines)?;
    parse_element_body(base, &lines[1..])
}

pub(crate) fn parse_element_body(
    base: u32,
    lines: &[(usize, String)],
) -> Result<FullGroupElement> {
    let mut entries = Vec::new();
    for (no, line) in lines {
        let (word, power) = line.split_once(':').ok_or_else(|| {
            textio::parse_err(*no, format!("expected `<word>:<power>`, found `{line}`"))
        })?;
        let w = Word::parse(base, word.trim())
            .map_err(|e| textio::parse_err(*no, e.to_string()))?;
        let n: i64 = power
            .trim()
            .parse()
            .map_err(|_| textio::parse_err(*no, format!("invalid power `{power}`")))?;
        entries.push((w, n));
    }
    if entries.is_empty() {
        return Err(textio::parse_err(1, "element table has no entries"));
    }
    FullGroupElement::from_table(base, entries)
        .map_err(|e| textio::parse_err(lines.first().map(|(n, _)| *n).unwrap_or(1), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(base: u32, s: &str) -> Word {
        Word::parse(base, s).unwrap()
    }

    fn swap(base: u32, a: &str, b: &str) -> FullGroupElement {
        FullGroupElement::pair_swap(&w(base, a), &w(base, b)).unwrap()
    }

    #[test]
    fn table_validation_rejects_bad_tables() {
        // Overlapping domain.
        let err = FullGroupElement::from_table(2, vec![(w(2, "0"), 0), (w(2, "01"), 1)]);
        assert!(matches!(err, Err(Error::NotPartition(_))));
        // Not covering.
        let err = FullGroupElement::from_table(2, vec![(w(2, "0"), 0)]);
        assert!(matches!(err, Err(Error::NotPartition(_))));
        // Colliding images: both [0] and [1] shift onto [1]'s spot.
        let err = FullGroupElement::from_table(2, vec![(w(2, "0"), 1), (w(2, "1"), 0)]);
        assert!(matches!(err, Err(Error::NotBijective(_))));
    }

    #[test]
    fn equal_power_families_merge_to_sigma() {
        let entries = vec![
            (w(2, "00"), 1),
            (w(2, "10"), 1),
            (w(2, "01"), 1),
            (w(2, "11"), 1),
        ];
        let g = FullGroupElement::from_table(2, entries).unwrap();
        assert_eq!(g, FullGroupElement::sigma_power(2, 1).unwrap());
        assert_eq!(g.depth(), 0);
    }

    #[test]
    fn pair_swap_matches_frozen_tables() {
        // Swapping the two depth-1 cylinders of the full space in base 2.
        let pi = FullGroupElement::make_involution(&ClopenSet::full(2).unwrap()).unwrap();
        assert_eq!(pi, swap(2, "0", "1"));
        assert_eq!(
            pi.table(),
            &[(w(2, "0"), 1), (w(2, "1"), -1)],
        );
        // Splitting [0]: the two smallest depth-2 cylinders are 00 and 01,
        // which sit 2 apart in value.
        let pi = FullGroupElement::make_involution(&ClopenSet::of(2, &["0"]).unwrap()).unwrap();
        assert_eq!(
            pi.table(),
            &[(w(2, "00"), 2), (w(2, "01"), -2), (w(2, "1"), 0)],
        );
    }

    #[test]
    fn involutions_square_to_identity() {
        for pi in [swap(2, "0", "1"), swap(2, "00", "11"), swap(3, "01", "22")] {
            assert!(pi.is_involution().unwrap());
            assert!(pi.compose(&pi).unwrap().is_identity());
            assert_eq!(pi.invert().unwrap(), pi);
        }
        assert!(!FullGroupElement::identity(2).unwrap().is_involution().unwrap());
        assert!(!FullGroupElement::sigma_power(2, 3).unwrap().is_involution().unwrap());
    }

    #[test]
    fn composition_acts_pointwise() {
        let g = swap(2, "0", "1");
        let h = swap(2, "00", "10");
        let gh = g.compose(&h).unwrap();
        // Exhaustive check against pointwise application on depth-4
        // cylinder anchors.
        for u in ClopenSet::full(2).unwrap().refine_to_depth(4).unwrap() {
            let x = Point::from_prefix(&u).unwrap();
            let expected = g.apply_point(&h.apply_point(&x).unwrap()).unwrap();
            assert_eq!(gh.apply_point(&x).unwrap(), expected);
        }
    }

    #[test]
    fn sigma_powers_compose_additively() {
        let a = FullGroupElement::sigma_power(2, 5).unwrap();
        let b = FullGroupElement::sigma_power(2, -8).unwrap();
        assert_eq!(
            a.compose(&b).unwrap(),
            FullGroupElement::sigma_power(2, -3).unwrap()
        );
        assert!(a.compose(&a.invert().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn support_is_the_moved_set() {
        let pi = swap(2, "00", "01");
        assert_eq!(pi.support(), ClopenSet::of(2, &["0"]).unwrap());
        assert!(FullGroupElement::identity(3).unwrap().support().is_empty());
        assert!(FullGroupElement::sigma_power(3, 2).unwrap().support().is_full());
    }

    #[test]
    fn support_laws() {
        let g = swap(2, "00", "01");
        let h = swap(2, "0", "1");
        let gh = g.compose(&h).unwrap();
        assert!(gh
            .support()
            .is_subset_of(&g.support().union(&h.support()).unwrap())
            .unwrap());
        assert_eq!(g.invert().unwrap().support(), g.support());
        // supp(hgh⁻¹) = h(supp g)
        let conj = g.conjugate_by(&h).unwrap();
        assert_eq!(conj.support(), h.image_of(&g.support()).unwrap());
        // The support is invariant under its own element.
        assert_eq!(g.image_of(&g.support()).unwrap(), g.support());
    }

    #[test]
    fn image_of_straddling_cylinders() {
        // g acts by different powers on [00] and [01]; the image of [0]
        // must be assembled from both pieces.
        let g = swap(2, "00", "01");
        let img = g.image_of(&ClopenSet::of(2, &["0"]).unwrap()).unwrap();
        assert_eq!(img, ClopenSet::of(2, &["0"]).unwrap());
        let img = g.image_of(&ClopenSet::of(2, &["00"]).unwrap()).unwrap();
        assert_eq!(img, ClopenSet::of(2, &["01"]).unwrap());
    }

    #[test]
    fn power_on_requires_fine_enough_cylinders() {
        let g = swap(2, "00", "01");
        assert_eq!(g.power_on(&w(2, "00")).unwrap(), 2);
        assert_eq!(g.power_on(&w(2, "000")).unwrap(), 2);
        assert_eq!(g.power_on(&w(2, "1")).unwrap(), 0);
        assert!(matches!(
            g.power_on(&w(2, "0")),
            Err(Error::DepthTooSmall { .. })
        ));
    }

    #[test]
    fn restriction_keeps_the_set_and_fixes_the_rest() {
        let g = swap(2, "00", "01");
        let v = ClopenSet::of(2, &["0"]).unwrap();
        let r = g.restrict(&v).unwrap();
        assert_eq!(r, g);
        // Restricting to the complement of the support gives the identity.
        let id = g.restrict(&ClopenSet::of(2, &["1"]).unwrap()).unwrap();
        assert!(id.is_identity());
        // A set the element does not stabilize is rejected.
        assert!(matches!(
            swap(2, "0", "1").restrict(&v),
            Err(Error::NotInvariant(_))
        ));
    }

    #[test]
    fn involutions_covering_enumerates_all_pairs() {
        let v = ClopenSet::full(2).unwrap();
        let pis = FullGroupElement::involutions_covering(&v, 1).unwrap();
        assert_eq!(pis.len(), 1);
        assert_eq!(pis[0], swap(2, "0", "1"));
        let pis = FullGroupElement::involutions_covering(&v, 2).unwrap();
        assert_eq!(pis.len(), 6);
        // Union of supports is the refined set.
        let mut union = ClopenSet::empty(2).unwrap();
        for pi in &pis {
            union = union.union(&pi.support()).unwrap();
        }
        assert!(union.is_full());
        assert!(matches!(
            FullGroupElement::involutions_covering(&ClopenSet::of(2, &["01"]).unwrap(), 2),
            Err(Error::NotSplittable { depth: 2 })
        ));
    }

    #[test]
    fn express_supports_recovers_the_set() {
        // The whole space needs a single involution.
        let full = ClopenSet::full(2).unwrap();
        let expr = express_by_involution_supports(&full).unwrap();
        assert!(matches!(expr, SupportExpr::Leaf(_)));
        assert_eq!(expr.eval().unwrap(), full);
        // A single cylinder is an intersection of two swap supports.
        let a = ClopenSet::of(2, &["00"]).unwrap();
        let expr = express_by_involution_supports(&a).unwrap();
        assert_eq!(expr.eval().unwrap(), a);
        assert_eq!(expr.leaves().len(), 2);
        assert_eq!(expr.formula(), "(supp1 ∩ supp2)");
        // A two-cylinder set becomes a union of intersections.
        let b = ClopenSet::of(3, &["0", "12"]).unwrap();
        let expr = express_by_involution_supports(&b).unwrap();
        assert_eq!(expr.eval().unwrap(), b);
        for leaf in expr.leaves() {
            assert!(leaf.is_involution().unwrap());
        }
    }

    #[test]
    fn element_text_round_trip() {
        let g = swap(2, "00", "01");
        let text = g.to_string();
        assert_eq!(text, "base 2\n00:2\n01:-2\n1:0\n");
        assert_eq!(parse_element(&text).unwrap(), g);
        let id = FullGroupElement::identity(3).unwrap();
        assert_eq!(parse_element(&id.to_string()).unwrap(), id);
        // Unmerged input canonicalizes.
        let merged = parse_element("base 2\n00:1\n01:1\n10:1\n11:1\n").unwrap();
        assert_eq!(merged, FullGroupElement::sigma_power(2, 1).unwrap());
        // Parse errors carry line numbers.
        match parse_element("base 2\n0:1\nbogus\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn arb_element(base: u32, max_depth: usize) -> impl Strategy<Value = FullGroupElement> {
        let depth = 1..=max_depth;
        let picks = proptest::collection::vec((0u32..1000, 0u32..1000, 1usize..=3), 0..3);
        (depth, picks, -4i64..=4).prop_map(move |(d, picks, shift)| {
            let mut g = FullGroupElement::sigma_power(base, shift).unwrap();
            for (i, j, extra) in picks {
                let k = (d + extra - 1).min(max_depth).max(1);
                let words = ClopenSet::full(base).unwrap().refine_to_depth(k).unwrap();
                let a = &words[i as usize % words.len()];
                let b = &words[j as usize % words.len()];
                if a != b {
                    let s = FullGroupElement::pair_swap(a, b).unwrap();
                    g = g.compose(&s).unwrap();
                }
            }
            g
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn group_laws(
            g in arb_element(2, 4),
            h in arb_element(2, 4),
            f in arb_element(2, 4),
        ) {
            let id = FullGroupElement::identity(2).unwrap();
            prop_assert_eq!(g.compose(&id).unwrap(), g.clone());
            prop_assert_eq!(id.compose(&g).unwrap(), g.clone());
            prop_assert_eq!(
                g.compose(&h).unwrap().compose(&f).unwrap(),
                g.compose(&h.compose(&f).unwrap()).unwrap()
            );
            prop_assert!(g.compose(&g.invert().unwrap()).unwrap().is_identity());
            prop_assert!(g.invert().unwrap().compose(&g).unwrap().is_identity());
        }

        #[test]
        fn composition_agrees_with_pointwise_action(
            g in arb_element(2, 3),
            h in arb_element(2, 3),
        ) {
            let gh = g.compose(&h).unwrap();
            let k = gh.depth().max(g.depth()).max(h.depth()) + 1;
            for u in ClopenSet::full(2).unwrap().refine_to_depth(k).unwrap() {
                let x = Point::from_prefix(&u).unwrap();
                let direct = g.apply_point(&h.apply_point(&x).unwrap()).unwrap();
                prop_assert_eq!(gh.apply_point(&x).unwrap(), direct);
            }
        }

        #[test]
        fn inverse_agrees_with_pointwise_action(g in arb_element(3, 3)) {
            let inv = g.invert().unwrap();
            let k = g.depth().max(inv.depth()) + 1;
            for u in ClopenSet::full(3).unwrap().refine_to_depth(k).unwrap() {
                let x = Point::from_prefix(&u).unwrap();
                let y = g.apply_point(&x).unwrap();
                prop_assert_eq!(inv.apply_point(&y).unwrap(), x);
            }
        }

        #[test]
        fn disjoint_supports_commute(i in 0usize..6, j in 0usize..6) {
            let words = ClopenSet::full(2).unwrap().refine_to_depth(3).unwrap();
            let g = FullGroupElement::pair_swap(&words[0], &words[1]).unwrap();
            let others = [&words[2], &words[3], &words[4], &words[5]];
            let a = others[i % 4];
            let b = others[j % 4];
            prop_assume!(a != b);
            let h = FullGroupElement::pair_swap(a, b).unwrap();
            prop_assert_eq!(
                g.compose(&h).unwrap(),
                h.compose(&g).unwrap()
            );
        }

        #[test]
        fn round_trip_random_elements(g in arb_element(3, 3)) {
            prop_assert_eq!(parse_element(&g.to_string()).unwrap(), g);
        }
    }
}
