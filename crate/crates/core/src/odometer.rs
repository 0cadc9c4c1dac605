//! The base-p odometer (adding machine) acting on X = {0, …, p−1}^ℕ.
//!
//! The odometer σ adds 1 to coordinate 0 and propagates carries to the
//! right, so X is identified with the p-adic integers and σ with x ↦ x + 1.
//! The points we can name exactly are the eventually periodic sequences,
//! which are exactly the rationals a/b with b coprime to p; all orbit
//! arithmetic here goes through that identification and is exact.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::clopen::{check_base, check_same_base, ClopenSet, Word};
use crate::error::{Error, Result};
use crate::textio;

/// The base-p odometer system.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Odometer {
    base: u32,
}

impl Odometer {
    pub fn new(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(Odometer { base })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// σ^n(x), computed through the rational value of x.
    pub fn apply_power(&self, n: i64, x: &Point) -> Result<Point> {
        self.apply_big(&BigInt::from(n), x)
    }

    pub fn apply_big(&self, n: &BigInt, x: &Point) -> Result<Point> {
        check_same_base(self.base, x.base)?;
        let moved = x.to_rational() + BigRational::from_integer(n.clone());
        Point::from_rational(self.base, &moved)
    }

    /// The word naming σ^n[w]; cylinders map to cylinders of equal depth.
    pub fn cylinder_image(&self, n: i64, w: &Word) -> Result<Word> {
        check_same_base(self.base, w.base())?;
        Ok(w.translated(n))
    }

    /// Some(n) with σ^n(x) = y when the points share an orbit, else None.
    /// Two eventually periodic points are co-orbital exactly when their
    /// rational values differ by an integer.
    pub fn same_orbit(&self, x: &Point, y: &Point) -> Result<Option<BigInt>> {
        check_same_base(self.base, x.base)?;
        check_same_base(self.base, y.base)?;
        let delta = y.to_rational() - x.to_rational();
        if delta.is_integer() {
            Ok(Some(delta.to_integer()))
        } else {
            Ok(None)
        }
    }

    /// Haar measure of a clopen set as an exact rational.
    pub fn measure_value(&self, a: &ClopenSet) -> Result<BigRational> {
        check_same_base(self.base, a.base())?;
        Ok(a.measure())
    }
}

/// An eventually periodic point of X, stored as preperiod + repeating block
/// in canonical form: the period is primitive and no trailing preperiod
/// digit could be absorbed into the period.  Canonical points compare
/// by `==`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point {
    base: u32,
    pre: Vec<u8>,
    per: Vec<u8>,
}

impl Point {
    pub fn new(base: u32, pre: Vec<u8>, per: Vec<u8>) -> Result<Self> {
        check_base(base)?;
        if per.is_empty() {
            return Err(Error::Invariant("period must be nonempty".into()));
        }
        for &d in pre.iter().chain(&per) {
            if d as u32 >= base {
                return Err(Error::InvalidDigit { digit: d, base });
            }
        }
        let mut point = Point { base, pre, per };
        point.normalize();
        Ok(point)
    }

    /// The point 0^∞, the odometer's natural origin.
    pub fn zero(base: u32) -> Result<Self> {
        Point::new(base, Vec::new(), vec![0])
    }

    /// The point with prefix w followed by zeros: the least non-negative
    /// integer in the cylinder [w].
    pub fn from_prefix(w: &Word) -> Result<Self> {
        Point::new(w.base(), w.digits().to_vec(), vec![0])
    }

    fn normalize(&mut self) {
        // Primitive period: the shortest divisor-length block that tiles it.
        let n = self.per.len();
        for d in 1..n {
            if n % d == 0 && self.per.chunks(d).all(|c| c == &self.per[..d]) {
                self.per.truncate(d);
                break;
            }
        }
        // Absorb preperiod digits that merely repeat the period's tail.
        while let Some(&last) = self.pre.last() {
            if last == *self.per.last().unwrap() {
                self.pre.pop();
                self.per.rotate_right(1);
            } else {
                break;
            }
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.per
    }

    /// Coordinate i of the sequence.
    pub fn digit(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.per[(i - self.pre.len()) % self.per.len()]
        }
    }

    /// The depth-k word the point starts with.
    pub fn prefix(&self, k: usize) -> Word {
        let digits = (0..k).map(|i| self.digit(i)).collect();
        Word::new(self.base, digits).expect("digits already validated")
    }

    /// Whether the point lies in the clopen set.
    pub fn is_in(&self, a: &ClopenSet) -> Result<bool> {
        check_same_base(self.base, a.base())?;
        Ok(a.words()
            .iter()
            .any(|w| w.digits().iter().enumerate().all(|(i, &d)| self.digit(i) == d)))
    }

    /// The p-adic value of the sequence as a rational:
    /// Σ pre_i p^i + p^{|pre|} · value(per) / (1 − p^{|per|}).
    pub fn to_rational(&self) -> BigRational {
        let p = BigInt::from(self.base);
        let value = |digits: &[u8]| -> BigInt {
            let mut acc = BigInt::zero();
            for &d in digits.iter().rev() {
                acc = acc * &p + BigInt::from(d);
            }
            acc
        };
        let u = value(&self.pre);
        let v = value(&self.per);
        let p_pre = p.pow(self.pre.len() as u32);
        let q = p.pow(self.per.len() as u32);
        let one = BigInt::one();
        // u + p^{|pre|} v / (1 − q), over the common denominator 1 − q.
        BigRational::new(u * (&one - &q) + p_pre * v, one - q)
    }

    /// The eventually periodic digit expansion of a rational whose
    /// denominator is coprime to the base.
    pub fn from_rational(base: u32, r: &BigRational) -> Result<Self> {
        check_base(base)?;
        let p = BigInt::from(base);
        let b = r.denom().clone();
        if b.gcd(&p) != BigInt::one() {
            return Err(Error::NonCoprimeDenominator {
                denominator: b.to_string(),
                base,
            });
        }
        // Peel digits: d ≡ a·b⁻¹ (mod p) is the unique digit making
        // (a − d·b)/p an integer numerator again.  The numerator state
        // eventually revisits itself, closing the period.
        let mut a = r.numer().clone();
        let mut digits: Vec<u8> = Vec::new();
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        loop {
            if let Some(&start) = seen.get(&a) {
                let per = digits.split_off(start);
                return Point::new(base, digits, per);
            }
            seen.insert(a.clone(), digits.len());
            let mut digit = None;
            for d in 0..base {
                let candidate = &a - BigInt::from(d) * &b;
                if candidate.mod_floor(&p).is_zero() {
                    digit = Some((d as u8, candidate / &p));
                    break;
                }
            }
            let (d, next) = digit.ok_or_else(|| {
                Error::Invariant("no digit matched; denominator not coprime?".into())
            })?;
            digits.push(d);
            a = next;
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "base {}", self.base)?;
        if self.pre.is_empty() {
            writeln!(f, "pre ?")?;
        } else {
            let pre: String = self.pre.iter().map(|&d| digit_to_char(d)).collect();
            writeln!(f, "pre {pre}")?;
        }
        let per: String = self.per.iter().map(|&d| digit_to_char(d)).collect();
        writeln!(f, "per {per}")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pre: String = self.pre.iter().map(|&d| digit_to_char(d)).collect();
        let per: String = self.per.iter().map(|&d| digit_to_char(d)).collect();
        write!(f, "Point({pre}({per})^∞ base {})", self.base)
    }
}

fn digit_to_char(d: u8) -> char {
    if d < 10 {
        (b'0' + d) as char
    } else {
        (b'a' + d - 10) as char
    }
}

/// Parses the point format:
///
/// ```text
/// base 2
/// pre 01      # `?` means an empty preperiod
/// per 10
/// ```
///
/// A `rational <num>/<den>` line may replace the pre/per pair.
pub fn parse_point(text: &str) -> Result<Point> {
    let lines = textio::numbered_lines(text);
    let base = textio::parse_base_header(&lines)?;
    parse_point_body(base, &lines[1..])
}

pub(crate) fn parse_point_body(base: u32, lines: &[(usize, String)]) -> Result<Point> {
    match lines {
        [(no, line)] if line.starts_with("rational") => {
            let value = textio::keyword_value(*no, line, "rational")?;
            let r = parse_rational(*no, value)?;
            Point::from_rational(base, &r).map_err(|e| match e {
                Error::Parse { .. } => e,
                other => textio::parse_err(*no, other.to_string()),
            })
        }
        [pre_line, per_line] => {
            let pre_str = textio::keyword_value(pre_line.0, &pre_line.1, "pre")?;
            let per_str = textio::keyword_value(per_line.0, &per_line.1, "per")?;
            let pre = if pre_str == "?" {
                Vec::new()
            } else {
                parse_digit_run(pre_line.0, base, pre_str)?
            };
            let per = parse_digit_run(per_line.0, base, per_str)?;
            Point::new(base, pre, per).map_err(|e| textio::parse_err(per_line.0, e.to_string()))
        }
        _ => Err(textio::parse_err(
            lines.first().map(|(no, _)| *no).unwrap_or(1),
            "expected `pre`/`per` lines or a single `rational` line",
        )),
    }
}

fn parse_digit_run(line_no: usize, base: u32, s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| {
            crate::clopen::char_digit(c, base)
                .map_err(|e| textio::parse_err(line_no, e.to_string()))
        })
        .collect()
}

/// Parses `<num>/<den>` (or a bare integer) into an exact rational.
pub(crate) fn parse_rational(line_no: usize, s: &str) -> Result<BigRational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| textio::parse_err(line_no, format!("invalid numerator `{num}`")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| textio::parse_err(line_no, format!("invalid denominator `{den}`")))?;
    if den.is_zero() {
        return Err(textio::parse_err(line_no, "denominator must be nonzero"));
    }
    Ok(BigRational::new(num, den))
}

/// Renders a rational as `<num>/<den>` in lowest terms.
pub fn render_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(base: u32, pre: &[u8], per: &[u8]) -> Point {
        Point::new(base, pre.to_vec(), per.to_vec()).unwrap()
    }

    #[test]
    fn normalization_is_canonical() {
        // Period 0101 collapses to 01; a preperiod digit equal to the
        // period's tail rotates into the period.
        assert_eq!(pt(2, &[], &[0, 1, 0, 1]), pt(2, &[], &[0, 1]));
        assert_eq!(pt(2, &[1], &[0, 1]), pt(2, &[], &[1, 0]));
        assert_eq!(pt(2, &[0, 0, 0], &[0]), pt(2, &[], &[0]));
        assert_ne!(pt(2, &[1], &[0]), pt(2, &[], &[0]));
    }

    #[test]
    fn rational_values_of_known_points() {
        // 1^∞ is −1 and (01)^∞ is −2/3 in the 2-adics.
        let minus_one = pt(2, &[], &[1]);
        assert_eq!(minus_one.to_rational(), BigRational::from_integer((-1).into()));
        let value = pt(2, &[], &[0, 1]).to_rational();
        assert_eq!(value, BigRational::new((-2).into(), 3.into()));
        // An integer: digits 011 then zeros is 0 + 2 + 4 = 6.
        let six = pt(2, &[0, 1, 1], &[0]);
        assert_eq!(six.to_rational(), BigRational::from_integer(6.into()));
    }

    #[test]
    fn rational_round_trip() {
        let integer_cases = [(0i64, 1i64), (1, 1), (-1, 1), (6, 1), (-100, 1)];
        let odd_cases = [(-2, 3), (5, 7), (-22, 9), (100, 3)];
        for (n, d) in integer_cases.iter().chain(&odd_cases) {
            let r = BigRational::new((*n).into(), (*d).into());
            let p2 = Point::from_rational(2, &r).unwrap();
            assert_eq!(p2.to_rational(), r, "base 2 round trip of {n}/{d}");
        }
        // In base 3 the denominator must avoid the factor 3.
        for (n, d) in integer_cases.iter().chain(&[(5, 7), (-3, 4), (9, 14)]) {
            let r = BigRational::new((*n).into(), (*d).into());
            let p3 = Point::from_rational(3, &r).unwrap();
            assert_eq!(p3.to_rational(), r, "base 3 round trip of {n}/{d}");
        }
    }

    #[test]
    fn rational_with_bad_denominator_is_rejected() {
        let r = BigRational::new(1.into(), 2.into());
        assert!(matches!(
            Point::from_rational(2, &r),
            Err(Error::NonCoprimeDenominator { .. })
        ));
        assert!(Point::from_rational(3, &r).is_ok());
    }

    #[test]
    fn odometer_advances_with_carries() {
        let odo = Odometer::new(2).unwrap();
        let zero = Point::zero(2).unwrap();
        let one = odo.apply_power(1, &zero).unwrap();
        assert_eq!(one, pt(2, &[1], &[0]));
        // 1 + 1 = 2 = digits 01…
        let two = odo.apply_power(1, &one).unwrap();
        assert_eq!(two, pt(2, &[0, 1], &[0]));
        // Stepping back from zero lands on …111 = −1.
        let back = odo.apply_power(-1, &zero).unwrap();
        assert_eq!(back, pt(2, &[], &[1]));
        // A full round trip.
        assert_eq!(odo.apply_power(-17, &odo.apply_power(17, &zero).unwrap()).unwrap(), zero);
    }

    #[test]
    fn orbit_offsets_are_exact() {
        let odo = Odometer::new(3).unwrap();
        let x = pt(3, &[2, 1], &[0, 2]);
        let y = odo.apply_power(19, &x).unwrap();
        assert_eq!(odo.same_orbit(&x, &y).unwrap(), Some(19.into()));
        assert_eq!(odo.same_orbit(&y, &x).unwrap(), Some((-19).into()));
        // 0^∞ and the expansion of 1/2 differ by a non-integer: no orbit.
        let z = Point::zero(3).unwrap();
        let w = Point::from_rational(3, &BigRational::new(2.into(), 4.into())).unwrap();
        assert_eq!(odo.same_orbit(&z, &w).unwrap(), None);
    }

    #[test]
    fn orbit_relation_is_consistent_with_prefixes() {
        // σ^n must move the depth-k prefix by n mod p^k.
        let odo = Odometer::new(2).unwrap();
        let x = pt(2, &[1, 0, 1], &[1, 0]);
        for n in [-9i64, -1, 0, 1, 5, 37] {
            let y = odo.apply_power(n, &x).unwrap();
            for k in 0..6 {
                assert_eq!(y.prefix(k), x.prefix(k).translated(n), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn membership_in_clopen_sets() {
        let a = ClopenSet::of(2, &["0", "11"]).unwrap();
        assert!(pt(2, &[0, 1], &[0]).is_in(&a).unwrap());
        assert!(pt(2, &[1, 1], &[0]).is_in(&a).unwrap());
        assert!(!pt(2, &[1, 0], &[1]).is_in(&a).unwrap());
        assert!(Point::zero(2).unwrap().is_in(&ClopenSet::full(2).unwrap()).unwrap());
        assert!(!Point::zero(2).unwrap().is_in(&ClopenSet::empty(2).unwrap()).unwrap());
    }

    #[test]
    fn point_text_round_trip() {
        let x = pt(2, &[1, 0], &[0, 1]);
        let text = x.to_string();
        assert_eq!(parse_point(&text).unwrap(), x);
        let z = Point::zero(3).unwrap();
        assert_eq!(parse_point(&z.to_string()).unwrap(), z);
        let r = parse_point("base 2\nrational -2/3\n").unwrap();
        assert_eq!(r, pt(2, &[], &[0, 1]));
        assert!(parse_point("base 2\npre 0\n").is_err());
        assert!(parse_point("base 2\npre 2\nper 0\n").is_err());
    }

    #[test]
    fn prefix_digits_follow_the_period() {
        let x = pt(2, &[1], &[0, 1]);
        assert_eq!(x.prefix(6).digits(), &[1, 0, 1, 0, 1, 0]);
        assert_eq!(x.digit(0), 1);
        assert_eq!(x.digit(5), 0);
    }
}
