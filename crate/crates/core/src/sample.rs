//! Seeded random generators for clopen sets, group elements, and points.
//!
//! Every generator takes the RNG by argument so callers control
//! reproducibility; [`seeded_rng`] builds the stream cipher RNG used
//! throughout the test suites and the command-line `--seed` flag.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clopen::{ClopenSet, Word};
use crate::element::FullGroupElement;
use crate::error::{Error, Result};
use crate::odometer::Point;

/// Deterministic RNG for a given seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly random word of exactly `len` digits.
pub fn random_word<R: Rng>(rng: &mut R, base: u32, len: usize) -> Result<Word> {
    let digits = (0..len)
        .map(|_| rng.random_range(0..base) as u8)
        .collect();
    Word::new(base, digits)
}

/// `count` distinct words of length `len`.  Small cylinder spaces are
/// materialized and shuffled; large ones are rejection-sampled.
fn distinct_words<R: Rng>(rng: &mut R, base: u32, len: usize, count: usize) -> Result<Vec<Word>> {
    let space = (base as u128).saturating_pow(len as u32);
    if (count as u128) > space {
        return Err(Error::NotSplittable { depth: len });
    }
    if space <= 64 {
        let mut all = ClopenSet::full(base)?.refine_to_depth(len)?;
        all.shuffle(rng);
        all.truncate(count);
        return Ok(all);
    }
    let mut picked: Vec<Word> = Vec::with_capacity(count);
    while picked.len() < count {
        let w = random_word(rng, base, len)?;
        if !picked.contains(&w) {
            picked.push(w);
        }
    }
    Ok(picked)
}

/// Random clopen set: the canonical union of up to four random cylinders
/// of depth at most `max_depth`.  May come out empty or full.
pub fn random_clopen<R: Rng>(rng: &mut R, base: u32, max_depth: usize) -> Result<ClopenSet> {
    let n = rng.random_range(0..=4);
    let words = (0..n)
        .map(|_| {
            let len = rng.random_range(1..=max_depth.max(1));
            random_word(rng, base, len)
        })
        .collect::<Result<Vec<_>>>()?;
    ClopenSet::canonicalize(base, words)
}

/// Random clopen set guaranteed nonempty (and, with `proper`, not full).
pub fn random_proper_clopen<R: Rng>(
    rng: &mut R,
    base: u32,
    max_depth: usize,
) -> Result<ClopenSet> {
    loop {
        let v = random_clopen(rng, base, max_depth)?;
        if !v.is_empty() && !v.is_full() {
            return Ok(v);
        }
    }
}

/// Random full-group element: a power `σ^a` with `|a| ≤ max_shift`
/// composed with up to three cylinder swaps of depth at most `max_depth`.
pub fn random_element<R: Rng>(
    rng: &mut R,
    base: u32,
    max_depth: usize,
    max_shift: i64,
) -> Result<FullGroupElement> {
    let shift = rng.random_range(-max_shift..=max_shift);
    let mut g = FullGroupElement::sigma_power(base, shift)?;
    for _ in 0..rng.random_range(0..=3u32) {
        let len = rng.random_range(1..=max_depth.max(1));
        let pair = distinct_words(rng, base, len, 2)?;
        let swap = FullGroupElement::pair_swap(&pair[0], &pair[1])?;
        g = if rng.random_bool(0.5) {
            g.compose(&swap)?
        } else {
            swap.compose(&g)?
        };
    }
    Ok(g)
}

/// Random element supported inside `v`: a product of up to `swaps` swaps
/// of cells from a refinement of `v`.
pub fn random_element_in<R: Rng>(
    rng: &mut R,
    v: &ClopenSet,
    swaps: usize,
) -> Result<FullGroupElement> {
    let depth = v.splitting_depth()? + rng.random_range(0..=1usize);
    let cells = v.refine_to_depth(depth)?;
    if cells.len() < 2 {
        return Err(Error::NotSplittable { depth });
    }
    let mut g = FullGroupElement::identity(v.base())?;
    for _ in 0..rng.random_range(1..=swaps.max(1)) {
        let i = rng.random_range(0..cells.len());
        let mut j = rng.random_range(0..cells.len());
        while j == i {
            j = rng.random_range(0..cells.len());
        }
        g = g.compose(&FullGroupElement::pair_swap(&cells[i], &cells[j])?)?;
    }
    Ok(g)
}

/// Random involution: a product of `pairs` cylinder swaps with pairwise
/// disjoint supports at the given depth.
pub fn random_involution<R: Rng>(
    rng: &mut R,
    base: u32,
    depth: usize,
    pairs: usize,
) -> Result<FullGroupElement> {
    let space = (base as u128).saturating_pow(depth as u32);
    let pairs = pairs.max(1).min((space / 2) as usize);
    let words = distinct_words(rng, base, depth, 2 * pairs)?;
    let mut g = FullGroupElement::identity(base)?;
    for pair in words.chunks(2) {
        g = g.compose(&FullGroupElement::pair_swap(&pair[0], &pair[1])?)?;
    }
    Ok(g)
}

/// Random eventually periodic point with bounded preperiod and period.
pub fn random_point<R: Rng>(
    rng: &mut R,
    base: u32,
    max_pre: usize,
    max_per: usize,
) -> Result<Point> {
    let pre_len = rng.random_range(0..=max_pre);
    let per_len = rng.random_range(1..=max_per.max(1));
    let pre = (0..pre_len)
        .map(|_| rng.random_range(0..base) as u8)
        .collect();
    let per = (0..per_len)
        .map(|_| rng.random_range(0..base) as u8)
        .collect();
    Point::new(base, pre, per)
}

/// Random pair of points on one odometer orbit, `y = σ^n(x)` with
/// `|n| ≤ max_shift`.
pub fn random_orbit_pair<R: Rng>(
    rng: &mut R,
    base: u32,
    max_shift: i64,
) -> Result<(Point, Point)> {
    let x = random_point(rng, base, 3, 3)?;
    let n = rng.random_range(-max_shift..=max_shift);
    let y = crate::odometer::Odometer::new(base)?.apply_power(n, &x)?;
    Ok((x, y))
}
