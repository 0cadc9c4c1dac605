//! Recovering the spatial side of a full-group isomorphism.
//!
//! An [`IsomorphismOracle`] wraps a group isomorphism `α` between the full
//! groups of two odometer systems as a pair of black-box closures: the
//! caller can apply `α` and `α⁻¹` to elements but cannot look inside.
//! Everything in this module works from that interface alone.
//!
//! The central construction is [`reconstruct_boolean_map`]: for each
//! cylinder `[w]` at a chosen depth it computes the clopen image
//! `Λ([w])` as the union of supports of `α(swap)` over involutions
//! swapping cells inside `[w]`, cross-checked at two refinement depths.
//! The resulting [`BooleanMap`] is the finite-resolution shadow of the
//! homeomorphism `Λ` with `α(g) = Λ g Λ⁻¹`.  The `verify_*` functions
//! then test that equation exactly on cylinder tables and chase orbits
//! through the map, so a fabricated oracle or a tampered map is caught
//! rather than silently accepted.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_traits::One;

use crate::clopen::{self, check_same_base, ClopenSet, Word, MAX_REFINED};
use crate::element::FullGroupElement;
use crate::error::{Error, Result};
use crate::odometer::{Odometer, Point};
use crate::par;
use crate::textio;

/// How many successive refinement depths [`lambda_of_clopen`] tries before
/// declaring the oracle inconsistent.  Two agreeing depths are required;
/// a genuinely spatial oracle stabilizes immediately.
const LAMBDA_TRIES: usize = 4;

/// Outcome of a verification pass: whether every case held, how many cases
/// were checked, and a human-readable note (the first failure, or "ok").
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

impl VerifyOutcome {
    fn pass(cases: usize) -> Self {
        VerifyOutcome {
            passed: true,
            cases,
            detail: "ok".to_string(),
        }
    }

    fn fail(cases: usize, detail: impl Into<String>) -> Self {
        VerifyOutcome {
            passed: false,
            cases,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for VerifyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            write!(f, "passed ({} cases)", self.cases)
        } else {
            write!(f, "FAILED after {} cases: {}", self.cases, self.detail)
        }
    }
}

/// Shared closure type for the two directions of an oracle.
pub type ElementMap = Arc<dyn Fn(&FullGroupElement) -> Result<FullGroupElement> + Send + Sync>;

/// A group isomorphism between two odometer full groups, exposed only as
/// forward and backward element maps.
#[derive(Clone)]
pub struct IsomorphismOracle {
    domain: Odometer,
    codomain: Odometer,
    forward: ElementMap,
    backward: ElementMap,
}

impl fmt::Debug for IsomorphismOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "IsomorphismOracle(base {} -> base {})",
            self.domain.base(),
            self.codomain.base()
        )
    }
}

impl IsomorphismOracle {
    pub fn new(
        domain: Odometer,
        codomain: Odometer,
        forward: ElementMap,
        backward: ElementMap,
    ) -> Self {
        IsomorphismOracle {
            domain,
            codomain,
            forward,
            backward,
        }
    }

    pub fn domain(&self) -> Odometer {
        self.domain
    }

    pub fn codomain(&self) -> Odometer {
        self.codomain
    }

    /// Applies `α`.  Both the argument and the reply are base-checked, so a
    /// misbehaving closure surfaces as an error rather than corrupt data.
    pub fn apply(&self, g: &FullGroupElement) -> Result<FullGroupElement> {
        check_same_base(self.domain.base(), g.base())?;
        let out = (self.forward)(g)?;
        check_same_base(self.codomain.base(), out.base())?;
        Ok(out)
    }

    /// Applies `α⁻¹`.
    pub fn inverse_apply(&self, g: &FullGroupElement) -> Result<FullGroupElement> {
        check_same_base(self.codomain.base(), g.base())?;
        let out = (self.backward)(g)?;
        check_same_base(self.domain.base(), out.base())?;
        Ok(out)
    }

    /// Spot-checks that the black box behaves like a group isomorphism on
    /// the given samples: identity goes to identity, products and inverses
    /// are respected, and the backward map undoes the forward one.
    pub fn sanity_check(&self, samples: &[FullGroupElement]) -> Result<VerifyOutcome> {
        let id = FullGroupElement::identity(self.domain.base())?;
        let mut cases = 1;
        if !self.apply(&id)?.is_identity() {
            return Ok(VerifyOutcome::fail(cases, "identity maps to a non-identity"));
        }
        for (i, g) in samples.iter().enumerate() {
            let ag = self.apply(g)?;
            cases += 1;
            if self.apply(&g.invert()?)? != ag.invert()? {
                return Ok(VerifyOutcome::fail(
                    cases,
                    format!("sample {i}: inverse is not respected"),
                ));
            }
            cases += 1;
            if &self.inverse_apply(&ag)? != g {
                return Ok(VerifyOutcome::fail(
                    cases,
                    format!("sample {i}: backward map does not undo forward"),
                ));
            }
        }
        for (i, pair) in samples.windows(2).enumerate() {
            let (g, h) = (&pair[0], &pair[1]);
            cases += 1;
            let lhs = self.apply(&g.compose(h)?)?;
            let rhs = self.apply(g)?.compose(&self.apply(h)?)?;
            if lhs != rhs {
                return Ok(VerifyOutcome::fail(
                    cases,
                    format!("samples {i},{}: products are not respected", i + 1),
                ));
            }
        }
        Ok(VerifyOutcome::pass(cases))
    }
}

/// Recipe for an oracle with known spatial ground truth, used to exercise
/// the reconstruction pipeline against an answer computed independently.
#[derive(Clone, Debug)]
pub enum OracleSpec {
    /// Conjugation by a full-group element: `α(g) = h g h⁻¹`, `Λ = h`.
    Inner(FullGroupElement),
    /// Conjugation by the digit reflection `x_i ↦ (p-1) - x_i`, which is
    /// the map `x ↦ -1 - x` on p-adic integers and lies outside the full
    /// group.
    Digitwise(u32),
    /// Composition, applied first-to-last: `Λ = f_k ∘ … ∘ f_1`.
    Composite(Vec<OracleSpec>),
}

impl OracleSpec {
    pub fn base(&self) -> Result<u32> {
        match self {
            OracleSpec::Inner(h) => Ok(h.base()),
            OracleSpec::Digitwise(p) => Ok(*p),
            OracleSpec::Composite(parts) => {
                let first = parts
                    .first()
                    .ok_or_else(|| Error::Invariant("empty composite oracle".to_string()))?;
                let base = first.base()?;
                for part in parts {
                    check_same_base(base, part.base()?)?;
                }
                Ok(base)
            }
        }
    }

    /// Builds the black-box oracle.  The closures capture only what they
    /// need; nothing about the recipe leaks through the interface.
    pub fn build(&self) -> Result<IsomorphismOracle> {
        let system = Odometer::new(self.base()?)?;
        match self {
            OracleSpec::Inner(h) => {
                let h_inv = h.invert()?;
                let (hf, hif) = (h.clone(), h_inv.clone());
                let forward: ElementMap =
                    Arc::new(move |g| hf.compose(g)?.compose(&hif));
                let (hb, hib) = (h.clone(), h_inv);
                let backward: ElementMap =
                    Arc::new(move |g| hib.compose(g)?.compose(&hb));
                Ok(IsomorphismOracle::new(system, system, forward, backward))
            }
            OracleSpec::Digitwise(_) => {
                let forward: ElementMap = Arc::new(digitwise_conjugate);
                let backward: ElementMap = Arc::new(digitwise_conjugate);
                Ok(IsomorphismOracle::new(system, system, forward, backward))
            }
            OracleSpec::Composite(parts) => {
                let built = parts
                    .iter()
                    .map(|p| p.build())
                    .collect::<Result<Vec<_>>>()?;
                let chain = built.clone();
                let forward: ElementMap = Arc::new(move |g| {
                    let mut cur = g.clone();
                    for oracle in &chain {
                        cur = oracle.apply(&cur)?;
                    }
                    Ok(cur)
                });
                let backward: ElementMap = Arc::new(move |g| {
                    let mut cur = g.clone();
                    for oracle in built.iter().rev() {
                        cur = oracle.inverse_apply(&cur)?;
                    }
                    Ok(cur)
                });
                Ok(IsomorphismOracle::new(system, system, forward, backward))
            }
        }
    }

    /// Ground truth: the image of a clopen set under the hidden spatial map.
    pub fn hidden_clopen_image(&self, v: &ClopenSet) -> Result<ClopenSet> {
        match self {
            OracleSpec::Inner(h) => h.image_of(v),
            OracleSpec::Digitwise(p) => {
                check_same_base(*p, v.base())?;
                let flipped = v
                    .words()
                    .iter()
                    .map(flip_word)
                    .collect::<Result<Vec<_>>>()?;
                ClopenSet::canonicalize(*p, flipped)
            }
            OracleSpec::Composite(parts) => {
                let mut cur = v.clone();
                for part in parts {
                    cur = part.hidden_clopen_image(&cur)?;
                }
                Ok(cur)
            }
        }
    }

    /// Ground truth: the image of a point under the hidden spatial map.
    pub fn hidden_point_image(&self, x: &Point) -> Result<Point> {
        match self {
            OracleSpec::Inner(h) => h.apply_point(x),
            OracleSpec::Digitwise(p) => {
                check_same_base(*p, x.base())?;
                let top = (*p - 1) as u8;
                let pre = x.preperiod().iter().map(|d| top - d).collect();
                let per = x.period().iter().map(|d| top - d).collect();
                Point::new(*p, pre, per)
            }
            OracleSpec::Composite(parts) => {
                let mut cur = x.clone();
                for part in parts {
                    cur = part.hidden_point_image(&cur)?;
                }
                Ok(cur)
            }
        }
    }
}

/// Conjugates `g` by the digit reflection: each table cell `[w] ↦ +n`
/// becomes `[w̄] ↦ -n` where `w̄` flips every digit.
fn digitwise_conjugate(g: &FullGroupElement) -> Result<FullGroupElement> {
    let entries = g
        .table()
        .iter()
        .map(|(w, n)| Ok((flip_word(w)?, n.checked_neg().ok_or(Error::PowerOverflow)?)))
        .collect::<Result<Vec<_>>>()?;
    FullGroupElement::from_table(g.base(), entries)
}

fn flip_word(w: &Word) -> Result<Word> {
    let top = (w.base() - 1) as u8;
    Word::new(w.base(), w.digits().iter().map(|d| top - d).collect())
}

/// Parses one oracle factor: `inner <path>` or `digitwise`.
fn parse_oracle_factor(base: u32, line_no: usize, part: &str, dir: &Path) -> Result<OracleSpec> {
    if let Some(rest) = part.strip_prefix("inner") {
        let rel = rest.trim();
        if rel.is_empty() {
            return Err(textio::parse_err(line_no, "inner needs a file path"));
        }
        let full = dir.join(rel);
        let body = fs::read_to_string(&full).map_err(|e| {
            textio::parse_err(line_no, format!("cannot read {}: {e}", full.display()))
        })?;
        let h = crate::element::parse_element(&body)?;
        check_same_base(base, h.base())?;
        Ok(OracleSpec::Inner(h))
    } else if part.trim() == "digitwise" {
        Ok(OracleSpec::Digitwise(base))
    } else {
        Err(textio::parse_err(
            line_no,
            format!("expected `inner <path>` or `digitwise`, got `{part}`"),
        ))
    }
}

/// Parses an oracle recipe.  The format is one `base p` header followed by
/// factor lines, applied top to bottom:
///
/// ```text
/// base 2
/// inner twist.elt      # path to an element file, relative to `dir`
/// digitwise
/// ```
///
/// A `composite <factor>;<factor>;…` line is equivalent to listing its
/// factors on consecutive lines.
pub fn parse_oracle_spec(text: &str, dir: &Path) -> Result<OracleSpec> {
    let lines = textio::numbered_lines(text);
    let base = textio::parse_base_header(&lines)?;
    let mut parts = Vec::new();
    for (line_no, line) in lines.iter().skip(1) {
        if let Some(rest) = line.strip_prefix("composite") {
            for part in rest.split(';') {
                parts.push(parse_oracle_factor(base, *line_no, part.trim(), dir)?);
            }
        } else {
            parts.push(parse_oracle_factor(base, *line_no, line, dir)?);
        }
    }
    match parts.len() {
        0 => Err(Error::Invariant(
            "oracle recipe has no factors".to_string(),
        )),
        1 => Ok(parts.into_iter().next().expect("length checked")),
        _ => Ok(OracleSpec::Composite(parts)),
    }
}

/// Reads an oracle recipe from a file; `inner` paths resolve relative to
/// the file's directory.
pub fn load_oracle_spec(path: &Path) -> Result<OracleSpec> {
    let text = fs::read_to_string(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_oracle_spec(&text, dir)
}

/// The restriction of a Cantor-space homeomorphism to cylinders of a fixed
/// depth: every word of length `depth` is assigned its clopen image, and
/// the images partition the space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanMap {
    base: u32,
    depth: usize,
    images: Vec<(Word, ClopenSet)>,
}

impl BooleanMap {
    /// Validates that `images` assigns every depth-`depth` word exactly one
    /// nonempty clopen image and that the images partition the space.
    pub fn new(base: u32, mut images: Vec<(Word, ClopenSet)>) -> Result<Self> {
        let depth = match images.first() {
            Some((w, _)) => w.len(),
            None => {
                return Err(Error::NotPartition("map has no entries".to_string()));
            }
        };
        if depth == 0 {
            return Err(Error::DepthTooSmall {
                required: 1,
                found: 0,
            });
        }
        let expected = (base as u128)
            .checked_pow(depth as u32)
            .filter(|&c| c <= MAX_REFINED)
            .ok_or(Error::RefinementTooLarge {
                count: u128::MAX,
                limit: MAX_REFINED,
            })?;
        if images.len() as u128 != expected {
            return Err(Error::NotPartition(format!(
                "expected {expected} entries at depth {depth}, got {}",
                images.len()
            )));
        }
        images.sort_by(|a, b| a.0.cmp(&b.0));
        let mut total = num_rational::BigRational::from_integer(0.into());
        let mut union = ClopenSet::empty(base)?;
        for (i, (w, img)) in images.iter().enumerate() {
            check_same_base(base, w.base())?;
            check_same_base(base, img.base())?;
            if w.len() != depth {
                return Err(Error::NotPartition(format!(
                    "word {w} has length {}, expected {depth}",
                    w.len()
                )));
            }
            if i > 0 && images[i - 1].0 == *w {
                return Err(Error::NotPartition(format!("word {w} appears twice")));
            }
            if img.is_empty() {
                return Err(Error::NotPartition(format!(
                    "image of {w} is empty; a homeomorphism cannot collapse a cylinder"
                )));
            }
            total += img.measure();
            union = union.union(img)?;
        }
        if !total.is_one() || !union.is_full() {
            return Err(Error::NotPartition(format!(
                "images do not partition the space (total measure {total}, union {})",
                clopen::render_clopen_inline(&union)
            )));
        }
        Ok(BooleanMap {
            base,
            depth,
            images,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The `(word, image)` assignments, sorted by word.
    pub fn entries(&self) -> &[(Word, ClopenSet)] {
        &self.images
    }

    /// Image of the cylinder `[w]`.  Words shorter than the map depth are
    /// resolved as the union over their extensions; deeper words are out of
    /// resolution and rejected.
    pub fn image_of_word(&self, w: &Word) -> Result<ClopenSet> {
        check_same_base(self.base, w.base())?;
        if w.len() > self.depth {
            return Err(Error::DepthTooSmall {
                required: w.len(),
                found: self.depth,
            });
        }
        if w.len() == self.depth {
            let idx = self
                .images
                .binary_search_by(|(key, _)| key.cmp(w))
                .map_err(|_| Error::Invariant(format!("word {w} missing from map")))?;
            return Ok(self.images[idx].1.clone());
        }
        let mut out = ClopenSet::empty(self.base)?;
        for (key, img) in &self.images {
            if w.is_prefix_of(key) {
                out = out.union(img)?;
            }
        }
        Ok(out)
    }

    /// Image of an arbitrary clopen set no deeper than the map.
    pub fn image_of_clopen(&self, v: &ClopenSet) -> Result<ClopenSet> {
        check_same_base(self.base, v.base())?;
        let mut out = ClopenSet::empty(self.base)?;
        for w in v.words() {
            out = out.union(&self.image_of_word(w)?)?;
        }
        Ok(out)
    }
}

impl fmt::Display for BooleanMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "base {}", self.base)?;
        writeln!(f, "depth {}", self.depth)?;
        for (w, img) in &self.images {
            writeln!(f, "{w} -> {}", clopen::render_clopen_inline(img))?;
        }
        Ok(())
    }
}

/// Parses the [`BooleanMap`] text form: `base p`, `depth k`, then one
/// `word -> images` line per depth-`k` word.
pub fn parse_boolean_map(text: &str) -> Result<BooleanMap> {
    let lines = textio::numbered_lines(text);
    let base = textio::parse_base_header(&lines)?;
    let depth_line = lines
        .get(1)
        .ok_or_else(|| textio::parse_err(lines.last().map_or(1, |l| l.0), "missing depth line"))?;
    let depth: usize = textio::keyword_value(depth_line.0, &depth_line.1, "depth")?
        .parse()
        .map_err(|_| textio::parse_err(depth_line.0, "depth must be a number"))?;
    let mut images = Vec::new();
    for (line_no, line) in lines.iter().skip(2) {
        let (lhs, rhs) = line.split_once("->").ok_or_else(|| {
            textio::parse_err(*line_no, "expected `word -> images`")
        })?;
        let w = Word::parse(base, lhs.trim())
            .map_err(|e| textio::parse_err(*line_no, e.to_string()))?;
        if w.len() != depth {
            return Err(textio::parse_err(
                *line_no,
                format!("word {w} does not have depth {depth}"),
            ));
        }
        let img = clopen::parse_clopen_inline(base, *line_no, rhs)?;
        images.push((w, img));
    }
    BooleanMap::new(base, images)
}

/// Involutions swapping consecutive depth-`depth` cells of `v`.  Their
/// supports union to exactly the refinement of `v`, so `α` of the chain
/// reveals `Λ(v)` with only `cells - 1` oracle calls.
fn chain_swaps(v: &ClopenSet, depth: usize) -> Result<Vec<FullGroupElement>> {
    let cells = v.refine_to_depth(depth)?;
    if cells.len() < 2 {
        return Err(Error::NotSplittable { depth });
    }
    cells
        .windows(2)
        .map(|pair| FullGroupElement::pair_swap(&pair[0], &pair[1]))
        .collect()
}

fn lambda_at_depth(
    oracle: &IsomorphismOracle,
    v: &ClopenSet,
    depth: usize,
    parallel: bool,
) -> Result<ClopenSet> {
    let swaps = chain_swaps(v, depth)?;
    let supports = par::run_cases(swaps, parallel, |g| {
        oracle.apply(&g).map(|ag| ag.support())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let words = supports
        .iter()
        .flat_map(|s| s.words().iter().cloned())
        .collect::<Vec<_>>();
    ClopenSet::canonicalize(oracle.codomain.base(), words)
}

/// Computes `Λ(v)`, the image of a clopen set under the spatial map hidden
/// behind the oracle, as the union of `supp(α(swap))` over cell swaps
/// inside `v`.  The union is recomputed at successive refinement depths
/// until two agree; an oracle with no spatial model keeps drifting and is
/// reported as inconsistent.
pub fn lambda_of_clopen(
    oracle: &IsomorphismOracle,
    v: &ClopenSet,
    parallel: bool,
) -> Result<ClopenSet> {
    check_same_base(oracle.domain.base(), v.base())?;
    if v.is_empty() {
        return ClopenSet::empty(oracle.codomain.base());
    }
    let start = v.splitting_depth()?;
    let mut prev: Option<ClopenSet> = None;
    for depth in start..start + LAMBDA_TRIES {
        let cur = lambda_at_depth(oracle, v, depth, parallel)?;
        if prev.as_ref() == Some(&cur) {
            return Ok(cur);
        }
        prev = Some(cur);
    }
    Err(Error::OracleInconsistent {
        depth: start + LAMBDA_TRIES - 1,
        detail: "support unions kept changing across refinements".to_string(),
    })
}

/// Reconstructs the depth-`depth` restriction of the hidden spatial map by
/// computing `Λ([w])` for every word of that depth.  Beyond the partition
/// requirements of [`BooleanMap::new`], the images are recomputed one level
/// deeper and each parent image must equal the union of its children —
/// an oracle that is not induced by a homeomorphism fails one of the two.
pub fn reconstruct_boolean_map(
    oracle: &IsomorphismOracle,
    depth: usize,
    parallel: bool,
) -> Result<BooleanMap> {
    if depth == 0 {
        return Err(Error::DepthTooSmall {
            required: 1,
            found: 0,
        });
    }
    let p = oracle.domain.base();
    let words = ClopenSet::full(p)?.refine_to_depth(depth)?;
    let images = par::run_cases(words, parallel, |w| {
        lambda_of_clopen(oracle, &ClopenSet::cylinder(&w), false).map(|img| (w, img))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let map = BooleanMap::new(p, images).map_err(|e| match e {
        Error::NotPartition(detail) => Error::NotSpatiallyConsistent { detail },
        other => other,
    })?;
    let children = ClopenSet::full(p)?.refine_to_depth(depth + 1)?;
    let child_images = par::run_cases(children, parallel, |w| {
        lambda_of_clopen(oracle, &ClopenSet::cylinder(&w), false).map(|img| (w, img))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    for (w, parent_image) in map.entries() {
        let mut union = ClopenSet::empty(p)?;
        for (child, img) in &child_images {
            if w.is_prefix_of(child) {
                union = union.union(img)?;
            }
        }
        if union != *parent_image {
            return Err(Error::NotSpatiallyConsistent {
                detail: format!(
                    "image of {w} is {} but its children union to {}",
                    clopen::render_clopen_inline(parent_image),
                    clopen::render_clopen_inline(&union)
                ),
            });
        }
    }
    Ok(map)
}

/// Verifies the support correspondence for one element: `supp(α(g))` must
/// equal `Λ(supp(g))`, and every sample supported inside `supp(g)` must map
/// to an element supported inside the image.
pub fn verify_w_pi_correspondence(
    oracle: &IsomorphismOracle,
    g: &FullGroupElement,
    samples: &[FullGroupElement],
    parallel: bool,
) -> Result<VerifyOutcome> {
    let s = g.support();
    let ag = oracle.apply(g)?;
    if s.is_empty() {
        return Ok(if ag.is_identity() {
            VerifyOutcome::pass(1)
        } else {
            VerifyOutcome::fail(1, "identity maps to a non-identity")
        });
    }
    let ls = lambda_of_clopen(oracle, &s, parallel)?;
    let mut cases = 1;
    if ag.support() != ls {
        return Ok(VerifyOutcome::fail(
            cases,
            format!(
                "supp(α(g)) = {} but Λ(supp g) = {}",
                clopen::render_clopen_inline(&ag.support()),
                clopen::render_clopen_inline(&ls)
            ),
        ));
    }
    for (i, h) in samples.iter().enumerate() {
        if !crate::lemmas::in_gamma(h, &s)? {
            return Err(Error::Invariant(format!(
                "sample {i} is not supported inside supp(g)"
            )));
        }
        cases += 1;
        let ah = oracle.apply(h)?;
        if !ah.support().is_subset_of(&ls)? {
            return Ok(VerifyOutcome::fail(
                cases,
                format!("sample {i}: supp(α(h)) escapes Λ(supp g)"),
            ));
        }
    }
    Ok(VerifyOutcome::pass(cases))
}

/// Verifies `α(g) ∘ Λ = Λ ∘ g` exactly at the map's resolution: for every
/// word `w` of map depth, the image of `g([w])` under the map must equal
/// the image of `Λ([w])` under `α(g)`.  Elements deeper than the map are
/// rejected — reconstruct deeper first.
pub fn verify_conjugacy(
    oracle: &IsomorphismOracle,
    map: &BooleanMap,
    elements: &[FullGroupElement],
    parallel: bool,
) -> Result<VerifyOutcome> {
    check_same_base(oracle.domain.base(), map.base())?;
    let all_words = ClopenSet::full(map.base())?.refine_to_depth(map.depth())?;
    let mut cases = 0;
    for (i, g) in elements.iter().enumerate() {
        if g.depth() > map.depth() {
            return Err(Error::DepthTooSmall {
                required: g.depth(),
                found: map.depth(),
            });
        }
        let ag = oracle.apply(g)?;
        let words = all_words.clone();
        cases += words.len();
        let failures = par::run_cases(words, parallel, |w| -> Result<Option<String>> {
            let n = g.power_on(&w)?;
            let lhs = map.image_of_word(&w.translated(n))?;
            let rhs = ag.image_of(&map.image_of_word(&w)?)?;
            if lhs == rhs {
                Ok(None)
            } else {
                Ok(Some(format!(
                    "element {i}, word {w}: Λ(g[w]) = {} but α(g)(Λ[w]) = {}",
                    clopen::render_clopen_inline(&lhs),
                    clopen::render_clopen_inline(&rhs)
                )))
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        if let Some(detail) = failures.into_iter().flatten().next() {
            return Ok(VerifyOutcome::fail(cases, detail));
        }
    }
    Ok(VerifyOutcome::pass(cases))
}

/// A confirmed orbit correspondence: the codomain odometer power carrying
/// `Λ(x)` to `Λ(y)`, and the cylinder depth that pinned it down.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitMatch {
    pub power: i64,
    pub depth_used: usize,
}

/// Verifies that the hidden map carries orbits onto orbits.  For each pair
/// `(x, y)` on one source orbit, the images `Λ(x)` and `Λ(y)` are pinned
/// digit by digit through `Λ` of shrinking cylinders, a candidate odometer
/// power is read off the pinned prefixes, and the match is confirmed
/// exactly by checking `α⁻¹(σ^n)(x) = y` in rational arithmetic.  Along the
/// way every deep image must stay inside the reconstructed map's image of
/// the enclosing cylinder, so a tampered map is rejected even when the
/// oracle itself is genuine.
pub fn verify_orbit_equivalence(
    oracle: &IsomorphismOracle,
    map: &BooleanMap,
    pairs: &[(Point, Point)],
    max_depth: usize,
    parallel: bool,
) -> Result<(VerifyOutcome, Vec<OrbitMatch>)> {
    check_same_base(oracle.domain.base(), map.base())?;
    if max_depth < map.depth() {
        return Err(Error::DepthTooSmall {
            required: map.depth(),
            found: max_depth,
        });
    }
    let p = oracle.codomain.base();
    let mut matches = Vec::new();
    let mut cases = 0;
    for (i, (x, y)) in pairs.iter().enumerate() {
        check_same_base(oracle.domain.base(), x.base())?;
        check_same_base(oracle.domain.base(), y.base())?;
        if oracle.domain.same_orbit(x, y)?.is_none() {
            return Err(Error::Invariant(format!(
                "pair {i}: points are not on the same source orbit"
            )));
        }
        cases += 1;
        let map_img_x = map.image_of_word(&x.prefix(map.depth()))?;
        let map_img_y = map.image_of_word(&y.prefix(map.depth()))?;
        let mut found = None;
        for depth in map.depth()..=max_depth {
            let ix = lambda_of_clopen(oracle, &ClopenSet::cylinder(&x.prefix(depth)), parallel)?;
            let iy = lambda_of_clopen(oracle, &ClopenSet::cylinder(&y.prefix(depth)), parallel)?;
            if !ix.is_subset_of(&map_img_x)? || !iy.is_subset_of(&map_img_y)? {
                found = Some(Err(format!(
                    "pair {i}: depth-{depth} oracle image escapes the map-level image"
                )));
                break;
            }
            let (Some(a), Some(b)) = (common_prefix_of(&ix), common_prefix_of(&iy)) else {
                continue;
            };
            let pin = a.len().min(b.len());
            if pin == 0 {
                continue;
            }
            let at = a.truncated(pin);
            let bt = b.truncated(pin);
            let r = at.offset_to(&bt)?;
            let modulus = (p as i128).checked_pow(pin as u32);
            let mut candidates = vec![r as i128];
            if let Some(m) = modulus {
                candidates.push(r as i128 - m);
            }
            for cand in candidates {
                let Ok(n) = i64::try_from(cand) else {
                    continue;
                };
                let back = oracle.inverse_apply(&FullGroupElement::sigma_power(p, n)?)?;
                if back.apply_point(x)? == *y {
                    found = Some(Ok(OrbitMatch {
                        power: n,
                        depth_used: depth,
                    }));
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some(Ok(m)) => matches.push(m),
            Some(Err(detail)) => return Ok((VerifyOutcome::fail(cases, detail), matches)),
            None => {
                return Ok((
                    VerifyOutcome::fail(
                        cases,
                        format!(
                            "pair {i}: no odometer power confirmed within depth {max_depth}"
                        ),
                    ),
                    matches,
                ));
            }
        }
    }
    Ok((VerifyOutcome::pass(cases), matches))
}

/// Longest word every member of the set starts with; `None` for the empty
/// set or when the words already diverge at the first digit.
fn common_prefix_of(set: &ClopenSet) -> Option<Word> {
    let words = set.words();
    let first = words.first()?.clone();
    let prefix = words.iter().skip(1).fold(first, |acc, w| acc.common_prefix(w));
    (!prefix.is_empty()).then_some(prefix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::parse_element;

    fn swap(base: u32, a: &str, b: &str) -> FullGroupElement {
        FullGroupElement::pair_swap(
            &Word::parse(base, a).unwrap(),
            &Word::parse(base, b).unwrap(),
        )
        .unwrap()
    }

    fn inner_oracle(h: &FullGroupElement) -> (OracleSpec, IsomorphismOracle) {
        let spec = OracleSpec::Inner(h.clone());
        let oracle = spec.build().unwrap();
        (spec, oracle)
    }

    #[test]
    fn digitwise_conjugation_reverses_translation() {
        let sigma = FullGroupElement::sigma_power(2, 1).unwrap();
        let image = digitwise_conjugate(&sigma).unwrap();
        assert_eq!(image, FullGroupElement::sigma_power(2, -1).unwrap());
        // The full swap is symmetric under digit reflection.
        let s = swap(2, "0", "1");
        assert_eq!(digitwise_conjugate(&s).unwrap(), s);
    }

    #[test]
    fn lambda_matches_the_hidden_image() {
        let h = swap(2, "00", "01").compose(&swap(2, "0", "1")).unwrap();
        let (spec, oracle) = inner_oracle(&h);
        for words in [vec!["0"], vec!["01"], vec!["1", "001"]] {
            let v = ClopenSet::of(2, &words).unwrap();
            let got = lambda_of_clopen(&oracle, &v, false).unwrap();
            assert_eq!(got, spec.hidden_clopen_image(&v).unwrap());
            assert_eq!(got, h.image_of(&v).unwrap());
        }
    }

    #[test]
    fn lambda_of_digit_reflection() {
        let oracle = OracleSpec::Digitwise(2).build().unwrap();
        let v = ClopenSet::of(2, &["01"]).unwrap();
        let got = lambda_of_clopen(&oracle, &v, false).unwrap();
        assert_eq!(got, ClopenSet::of(2, &["10"]).unwrap());
        let empty = ClopenSet::empty(2).unwrap();
        assert!(lambda_of_clopen(&oracle, &empty, false).unwrap().is_empty());
    }

    #[test]
    fn reconstruction_agrees_with_ground_truth() {
        let h = swap(2, "01", "11")
            .compose(&FullGroupElement::sigma_power(2, 1).unwrap())
            .unwrap();
        let (spec, oracle) = inner_oracle(&h);
        let map = reconstruct_boolean_map(&oracle, 3, false).unwrap();
        for (w, img) in map.entries() {
            let truth = spec.hidden_clopen_image(&ClopenSet::cylinder(w)).unwrap();
            assert_eq!(*img, truth, "image of {w}");
        }
    }

    #[test]
    fn reconstruction_is_refinement_consistent_for_composites() {
        let spec = OracleSpec::Composite(vec![
            OracleSpec::Inner(swap(3, "0", "2")),
            OracleSpec::Digitwise(3),
        ]);
        let oracle = spec.build().unwrap();
        let map = reconstruct_boolean_map(&oracle, 2, false).unwrap();
        for (w, img) in map.entries() {
            let truth = spec.hidden_clopen_image(&ClopenSet::cylinder(w)).unwrap();
            assert_eq!(*img, truth, "image of {w}");
        }
    }

    #[test]
    fn conjugacy_check_accepts_the_real_map_and_rejects_a_tampered_one() {
        let h = swap(2, "00", "10");
        let (_, oracle) = inner_oracle(&h);
        let map = reconstruct_boolean_map(&oracle, 2, false).unwrap();
        let tests = vec![
            FullGroupElement::sigma_power(2, 1).unwrap(),
            swap(2, "01", "11"),
        ];
        let ok = verify_conjugacy(&oracle, &map, &tests, false).unwrap();
        assert!(ok.passed, "{}", ok.detail);

        let mut entries = map.entries().to_vec();
        let last = entries.len() - 1;
        let (a, b) = (entries[0].1.clone(), entries[last].1.clone());
        entries[0].1 = b;
        entries[last].1 = a;
        let tampered = BooleanMap::new(2, entries).unwrap();
        let bad = verify_conjugacy(&oracle, &tampered, &tests, false).unwrap();
        assert!(!bad.passed);
    }

    #[test]
    fn support_correspondence_holds_for_inner_oracles() {
        let h = swap(3, "00", "11");
        let (_, oracle) = inner_oracle(&h);
        let g = swap(3, "01", "02");
        let samples =
            FullGroupElement::involutions_covering(&g.support(), g.support().splitting_depth().unwrap())
                .unwrap();
        let out = verify_w_pi_correspondence(&oracle, &g, &samples, false).unwrap();
        assert!(out.passed, "{}", out.detail);
    }

    #[test]
    fn orbit_check_confirms_powers_exactly() {
        let h = swap(2, "01", "11").compose(&swap(2, "0", "1")).unwrap();
        let (spec, oracle) = inner_oracle(&h);
        let map = reconstruct_boolean_map(&oracle, 2, false).unwrap();
        let x = Point::new(2, vec![1, 0], vec![0, 1]).unwrap();
        let y = oracle.domain().apply_power(5, &x).unwrap();
        let pairs = vec![(x.clone(), y.clone()), (x.clone(), x.clone())];
        let (out, matches) = verify_orbit_equivalence(&oracle, &map, &pairs, 12, false).unwrap();
        assert!(out.passed, "{}", out.detail);
        assert_eq!(matches.len(), 2);
        // Ground truth: Λ = h, so the power is the rational difference.
        let diff = spec.hidden_point_image(&y).unwrap().to_rational()
            - spec.hidden_point_image(&x).unwrap().to_rational();
        assert_eq!(diff, num_rational::BigRational::from_integer(matches[0].power.into()));
        assert_eq!(matches[1].power, 0);
    }

    #[test]
    fn orbit_check_rejects_a_tampered_map() {
        let h = swap(2, "00", "10");
        let (_, oracle) = inner_oracle(&h);
        let map = reconstruct_boolean_map(&oracle, 2, false).unwrap();
        let mut entries = map.entries().to_vec();
        let (first, second) = (entries[0].1.clone(), entries[1].1.clone());
        entries[0].1 = second;
        entries[1].1 = first;
        let tampered = BooleanMap::new(2, entries).unwrap();
        let x = Point::zero(2).unwrap();
        let y = oracle.domain().apply_power(3, &x).unwrap();
        let (out, _) =
            verify_orbit_equivalence(&oracle, &tampered, &[(x, y)], 10, false).unwrap();
        assert!(!out.passed);
    }

    #[test]
    fn cross_base_oracle_errors_cleanly() {
        let forward: ElementMap = Arc::new(|_| FullGroupElement::identity(3));
        let backward: ElementMap = Arc::new(|_| FullGroupElement::identity(2));
        let oracle = IsomorphismOracle::new(
            Odometer::new(2).unwrap(),
            Odometer::new(3).unwrap(),
            forward,
            backward,
        );
        let err = reconstruct_boolean_map(&oracle, 2, false).unwrap_err();
        assert!(matches!(
            err,
            Error::MixedBase { .. }
                | Error::NotSpatiallyConsistent { .. }
                | Error::OracleInconsistent { .. }
        ));
    }

    #[test]
    fn sanity_check_catches_a_non_homomorphism() {
        let twist = swap(2, "0", "1");
        let forward: ElementMap = {
            let twist = twist.clone();
            Arc::new(move |g: &FullGroupElement| g.compose(&twist))
        };
        let backward: ElementMap = Arc::new(|g: &FullGroupElement| Ok(g.clone()));
        let sys = Odometer::new(2).unwrap();
        let oracle = IsomorphismOracle::new(sys, sys, forward, backward);
        let out = oracle
            .sanity_check(&[FullGroupElement::sigma_power(2, 1).unwrap()])
            .unwrap();
        assert!(!out.passed);

        let (_, good) = inner_oracle(&swap(2, "00", "01"));
        let samples = vec![
            FullGroupElement::sigma_power(2, 1).unwrap(),
            swap(2, "0", "1"),
        ];
        assert!(good.sanity_check(&samples).unwrap().passed);
    }

    #[test]
    fn boolean_map_text_round_trip() {
        let (_, oracle) = inner_oracle(&swap(2, "01", "10"));
        let map = reconstruct_boolean_map(&oracle, 2, false).unwrap();
        let text = map.to_string();
        assert_eq!(parse_boolean_map(&text).unwrap(), map);
    }

    #[test]
    fn boolean_map_rejects_overlapping_images() {
        let full = ClopenSet::full(2).unwrap();
        let images = vec![
            (Word::parse(2, "0").unwrap(), full.clone()),
            (Word::parse(2, "1").unwrap(), full),
        ];
        assert!(matches!(
            BooleanMap::new(2, images),
            Err(Error::NotPartition(_))
        ));
    }

    #[test]
    fn oracle_recipe_files_load_and_build() {
        let dir = std::env::temp_dir().join(format!("fg-oracle-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let h = swap(2, "00", "01");
        std::fs::write(dir.join("twist.elt"), h.to_string()).unwrap();
        let text = "base 2\ninner twist.elt\ndigitwise\n";
        let spec = parse_oracle_spec(text, &dir).unwrap();
        match &spec {
            OracleSpec::Composite(parts) => {
                assert_eq!(parts.len(), 2);
                assert_eq!(parse_element(&h.to_string()).unwrap(), h);
            }
            other => panic!("expected composite, got {other:?}"),
        }
        let oracle = spec.build().unwrap();
        let v = ClopenSet::of(2, &["11"]).unwrap();
        assert_eq!(
            lambda_of_clopen(&oracle, &v, false).unwrap(),
            spec.hidden_clopen_image(&v).unwrap()
        );
        // The one-line composite spelling parses to the same recipe.
        let inline = parse_oracle_spec("base 2\ncomposite inner twist.elt; digitwise\n", &dir);
        match inline.unwrap() {
            OracleSpec::Composite(parts) => assert_eq!(parts.len(), 2),
            other => panic!("expected composite, got {other:?}"),
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn digit_reflection_point_images() {
        let spec = OracleSpec::Digitwise(2);
        let zero = Point::zero(2).unwrap();
        let minus_one = spec.hidden_point_image(&zero).unwrap();
        assert_eq!(
            minus_one.to_rational(),
            num_rational::BigRational::from_integer((-1).into())
        );
    }
}
