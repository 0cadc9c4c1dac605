//! Structural characterizations inside the full group.
//!
//! For a clopen V, three subgroups organize everything here: Γ_V (elements
//! supported in V), its commutant, and the product R_V = Γ_V × Γ_{V⊥} of
//! elements stabilizing V.  The key computational facts, each constructive:
//!
//! * an element commutes with all of Γ_V exactly when its support avoids V,
//!   and a failure is witnessed by an explicit swap and point;
//! * an element lies in R_V exactly when it maps V onto itself, and then it
//!   factors canonically through the two restrictions;
//! * an involution π outside R_V decomposes as h = π·ρ₁·ρ₂ with ρ₁ ∈ Γ_V,
//!   ρ₂ ∈ Γ_{V⊥}, where h is an involution supported on B ∪ π(B) for
//!   B = V ∩ π(V⊥) ∩ spr(π), agreeing with π on B.  The support of such an
//!   h conjugates Γ_V ∩ Γ_{spr(h)} into Γ_{V⊥} and vice versa, which is the
//!   clopen-set criterion the reconstruction machinery queries through a
//!   group isomorphism.

use crate::clopen::ClopenSet;
use crate::element::FullGroupElement;
use crate::error::{Error, Result};
use crate::odometer::Point;
use crate::textio;

/// Whether g ∈ Γ_V, i.e. supp(g) ⊆ V.
pub fn in_gamma(g: &FullGroupElement, v: &ClopenSet) -> Result<bool> {
    g.support().is_subset_of(v)
}

/// Evidence that some ρ ∈ Γ_V fails to commute with g: the two
/// compositions send `point` to different places.
#[derive(Clone, Debug)]
pub struct CommutantWitness {
    pub rho: FullGroupElement,
    pub point: Point,
    /// ρ(g(point))
    pub left: Point,
    /// g(ρ(point))
    pub right: Point,
}

impl CommutantWitness {
    /// Recomputes both compositions and confirms the witness disagrees.
    pub fn verify(&self, g: &FullGroupElement, v: &ClopenSet) -> Result<bool> {
        let left = self.rho.apply_point(&g.apply_point(&self.point)?)?;
        let right = g.apply_point(&self.rho.apply_point(&self.point)?)?;
        Ok(in_gamma(&self.rho, v)?
            && left == self.left
            && right == self.right
            && left != right)
    }
}

/// Whether g commutes with every element of Γ_V.  This holds exactly when
/// supp(g) misses V; otherwise a concrete non-commuting swap is returned.
pub fn commutant_check(
    g: &FullGroupElement,
    v: &ClopenSet,
) -> Result<(bool, Option<CommutantWitness>)> {
    if in_gamma(g, &v.complement())? {
        return Ok((true, None));
    }
    // supp(g) ∩ V is nonempty: pick a cylinder inside it on which g acts by
    // a single nonzero power.
    let moved = g.support().intersection(v)?;
    let depth = moved.depth().max(g.depth());
    let mut w = moved.words()[0].zero_extended(depth);
    let n = g.power_on(&w)?;
    debug_assert_ne!(n, 0, "cylinder inside the support must move");
    // Deepen until the cylinder is fully displaced: σ^n shifts [w] off
    // itself as soon as p^|w| exceeds the divisibility of n.
    while w.translated(n) == w {
        w = w.child(0)?;
    }
    // A swap of two children of [w] is supported in V; g shifts both away
    // from [w], so the two compositions differ on the first child's points.
    let u1 = w.child(0)?;
    let u2 = w.child(1)?;
    let rho = FullGroupElement::pair_swap(&u1, &u2)?;
    let point = Point::from_prefix(&u1)?;
    let left = rho.apply_point(&g.apply_point(&point)?)?;
    let right = g.apply_point(&rho.apply_point(&point)?)?;
    if left == right {
        return Err(Error::Invariant(
            "constructed witness failed to separate the compositions".into(),
        ));
    }
    Ok((
        false,
        Some(CommutantWitness { rho, point, left, right }),
    ))
}

/// Whether g ∈ R_V = Γ_V × Γ_{V⊥}, which holds exactly when g(V) = V.
/// On success the canonical factors (g restricted to V, g restricted to
/// the complement) are returned; their product is g.
pub fn in_r(
    g: &FullGroupElement,
    v: &ClopenSet,
) -> Result<(bool, Option<(FullGroupElement, FullGroupElement)>)> {
    if g.image_of(v)? != *v {
        return Ok((false, None));
    }
    let inner = g.restrict(v)?;
    let outer = g.restrict(&v.complement())?;
    debug_assert_eq!(inner.compose(&outer).unwrap(), *g);
    Ok((true, Some((inner, outer))))
}

/// The decomposition of an involution π ∉ R_V produced by
/// [`criterion_decompose`]: h = π·ρ₁·ρ₂ together with the sets that
/// organize it.
#[derive(Clone, Debug)]
pub struct CriterionDecomposition {
    /// V ∩ π(V) ∩ spr(π): the moved part of V that π keeps inside V.
    pub a: ClopenSet,
    /// V ∩ π(V⊥) ∩ spr(π): the moved part of V that π throws outside.
    pub b: ClopenSet,
    /// The π-invariant clopen set between A and V ∖ B used to cancel π
    /// inside V (this construction takes O = A).
    pub o: ClopenSet,
    /// π⁻¹ restricted to O, extended by the identity; lies in Γ_V.
    pub rho1: FullGroupElement,
    /// (π·ρ₁)⁻¹ restricted to the matching set on the complement side;
    /// lies in Γ_{V⊥}.
    pub rho2: FullGroupElement,
    /// π·ρ₁·ρ₂: an involution supported on B ∪ π(B) agreeing with π on B.
    pub h: FullGroupElement,
}

impl CriterionDecomposition {
    /// Re-derives every structural invariant from (π, V).
    pub fn validate_against(
        &self,
        pi: &FullGroupElement,
        v: &ClopenSet,
    ) -> Result<()> {
        let fail = |msg: &str| Err(Error::Invariant(msg.into()));
        let spr = pi.support();
        let comp = v.complement();
        if self.a != v.intersection(&pi.image_of(v)?)?.intersection(&spr)? {
            return fail("A is not V ∩ π(V) ∩ spr(π)");
        }
        if self.b != v.intersection(&pi.image_of(&comp)?)?.intersection(&spr)? {
            return fail("B is not V ∩ π(V⊥) ∩ spr(π)");
        }
        if self.b.is_empty() {
            return fail("B is empty, so π already lies in R_V");
        }
        if !self.a.is_subset_of(&self.o)? || !self.o.is_subset_of(&v.difference(&self.b)?)? {
            return fail("O is not between A and V ∖ B");
        }
        if pi.image_of(&self.o)? != self.o {
            return fail("O is not π-invariant");
        }
        if !in_gamma(&self.rho1, v)? {
            return fail("ρ₁ is not supported in V");
        }
        if !in_gamma(&self.rho2, &comp)? {
            return fail("ρ₂ is not supported in the complement of V");
        }
        if pi.compose(&self.rho1)?.compose(&self.rho2)? != self.h {
            return fail("h differs from π·ρ₁·ρ₂");
        }
        if !self.h.is_involution()? {
            return fail("h is not an involution");
        }
        let expected_support = self.b.union(&pi.image_of(&self.b)?)?;
        if self.h.support() != expected_support {
            return fail("supp(h) is not B ∪ π(B)");
        }
        // h must agree with π across B, cell by cell.
        let depth = self
            .b
            .depth()
            .max(self.h.depth())
            .max(pi.depth());
        for w in self.b.refine_to_depth(depth)? {
            if self.h.power_on(&w)? != pi.power_on(&w)? {
                return fail("h disagrees with π on B");
            }
        }
        Ok(())
    }
}

/// Decomposes an involution π ∉ R_V as h = π·ρ₁·ρ₂ per the structure
/// above.  Rejects non-involutions and involutions already in R_V.
pub fn criterion_decompose(
    pi: &FullGroupElement,
    v: &ClopenSet,
) -> Result<CriterionDecomposition> {
    if !pi.is_involution()? {
        return Err(Error::NotInvolution);
    }
    let (in_product, _) = in_r(pi, v)?;
    if in_product {
        return Err(Error::InGeneratedSubgroup);
    }
    let spr = pi.support();
    let comp = v.complement();
    let a = v.intersection(&pi.image_of(v)?)?.intersection(&spr)?;
    let b = v.intersection(&pi.image_of(&comp)?)?.intersection(&spr)?;
    if b.is_empty() {
        return Err(Error::Invariant(
            "B is empty although π is outside R_V".into(),
        ));
    }
    let o = a.clone();
    let rho1 = pi.invert()?.restrict(&o)?;
    let pi1 = pi.compose(&rho1)?;
    // Same cancellation on the complement side, against π·ρ₁.
    let a2 = comp
        .intersection(&pi1.image_of(&comp)?)?
        .intersection(&pi1.support())?;
    let rho2 = pi1.invert()?.restrict(&a2)?;
    let h = pi1.compose(&rho2)?;
    let decomposition = CriterionDecomposition { a, b, o, rho1, rho2, h };
    decomposition.validate_against(pi, v)?;
    Ok(decomposition)
}

/// Checks the two conjugation conditions that characterize the supports
/// produced by [`criterion_decompose`]: every sample g supported in
/// V ∩ supp(h) must conjugate into Γ_{V⊥} under h, and symmetrically.
/// Samples not supported in supp(h) are skipped.
pub fn criterion_conditions_hold(
    h: &FullGroupElement,
    v: &ClopenSet,
    samples: &[FullGroupElement],
) -> Result<bool> {
    let wh = h.support();
    let comp = v.complement();
    let h_inv = h.invert()?;
    for g in samples {
        if !in_gamma(g, &wh)? {
            continue;
        }
        let conjugate = h_inv.compose(g)?.compose(h)?;
        if in_gamma(g, v)? && !in_gamma(&conjugate, &comp)? {
            return Ok(false);
        }
        if in_gamma(g, &comp)? && !in_gamma(&conjugate, v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The standard sample family for [`criterion_conditions_hold`]: all pair
/// swaps inside V ∩ supp(h) and inside V⊥ ∩ supp(h) at the given depth
/// (deepened when the sets only split further down).
pub fn default_criterion_samples(
    h: &FullGroupElement,
    v: &ClopenSet,
    depth: usize,
) -> Result<Vec<FullGroupElement>> {
    let wh = h.support();
    let mut samples = Vec::new();
    for side in [v.intersection(&wh)?, v.complement().intersection(&wh)?] {
        if side.is_empty() {
            continue;
        }
        let d = depth.max(side.splitting_depth()?);
        samples.extend(FullGroupElement::involutions_covering(&side, d)?);
    }
    Ok(samples)
}

/// A subgroup of the full group that membership can be decided against.
#[derive(Clone, Debug)]
pub enum SubgroupDescriptor {
    /// Γ_V: elements supported inside the set.
    Support(ClopenSet),
    /// R_V = Γ_V × Γ_{V⊥}: elements mapping the set onto itself.
    SetStabilizer(ClopenSet),
    /// The centralizer of a fixed element.
    Centralizer(FullGroupElement),
}

impl SubgroupDescriptor {
    pub fn contains(&self, g: &FullGroupElement) -> Result<bool> {
        match self {
            SubgroupDescriptor::Support(v) => in_gamma(g, v),
            SubgroupDescriptor::SetStabilizer(v) => Ok(g.image_of(v)? == *v),
            SubgroupDescriptor::Centralizer(h) => Ok(g.compose(h)? == h.compose(g)?),
        }
    }
}

/// Renders a decomposition as `[A]`, `[B]`, `[O]`, `[rho1]`, `[rho2]`,
/// `[h]` sections, each in its component's own text format.
pub fn render_decomposition(d: &CriterionDecomposition) -> String {
    format!(
        "[A]\n{}[B]\n{}[O]\n{}[rho1]\n{}[rho2]\n{}[h]\n{}",
        d.a, d.b, d.o, d.rho1, d.rho2, d.h
    )
}

pub fn parse_decomposition(text: &str) -> Result<CriterionDecomposition> {
    let lines = textio::numbered_lines(text);
    let sections = textio::split_sections(&lines)?;
    Ok(CriterionDecomposition {
        a: parse_clopen_section(&sections, "A")?,
        b: parse_clopen_section(&sections, "B")?,
        o: parse_clopen_section(&sections, "O")?,
        rho1: parse_element_section(&sections, "rho1")?,
        rho2: parse_element_section(&sections, "rho2")?,
        h: parse_element_section(&sections, "h")?,
    })
}

/// Renders a witness as `[rho]`, `[point]`, `[left]`, `[right]` sections.
pub fn render_witness(w: &CommutantWitness) -> String {
    format!(
        "[rho]\n{}[point]\n{}[left]\n{}[right]\n{}",
        w.rho, w.point, w.left, w.right
    )
}

pub fn parse_witness(text: &str) -> Result<CommutantWitness> {
    let lines = textio::numbered_lines(text);
    let sections = textio::split_sections(&lines)?;
    Ok(CommutantWitness {
        rho: parse_element_section(&sections, "rho")?,
        point: parse_point_section(&sections, "point")?,
        left: parse_point_section(&sections, "left")?,
        right: parse_point_section(&sections, "right")?,
    })
}

type Sections = [(String, Vec<(usize, String)>)];

fn parse_clopen_section(sections: &Sections, name: &str) -> Result<ClopenSet> {
    let body = textio::expect_section(sections, name)?;
    let base = textio::parse_base_header(body)?;
    crate::clopen::parse_clopen_body(base, &body[1..])
}

fn parse_element_section(sections: &Sections, name: &str) -> Result<FullGroupElement> {
    let body = textio::expect_section(sections, name)?;
    let base = textio::parse_base_header(body)?;
    crate::element::parse_element_body(base, &body[1..])
}

fn parse_point_section(sections: &Sections, name: &str) -> Result<Point> {
    let body = textio::expect_section(sections, name)?;
    let base = textio::parse_base_header(body)?;
    crate::odometer::parse_point_body(base, &body[1..])
}
