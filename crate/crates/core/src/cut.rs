//! Linear inequalities `alpha . y + beta . z >= gamma` and their canonical form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CutKind {
    Mix,
    MixStar,
    AMix,
    AMixStar,
    Linking,
    BoundLower,
    BoundUpper,
    Polymatroid,
    /// A separating hyperplane produced by the membership LP.
    Separating,
}

impl CutKind {
    pub fn label(self) -> &'static str {
        match self {
            CutKind::Mix => "Mix",
            CutKind::MixStar => "Mix*",
            CutKind::AMix => "AMix",
            CutKind::AMixStar => "AMix*",
            CutKind::Linking => "Linking",
            CutKind::BoundLower => "BoundLower",
            CutKind::BoundUpper => "BoundUpper",
            CutKind::Polymatroid => "Polymatroid",
            CutKind::Separating => "Separating",
        }
    }
}

impl fmt::Display for CutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A point `(y, z)`; `y` has `k` entries, `z` has `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub y: Vec<Rational>,
    pub z: Vec<Rational>,
}

impl Point {
    pub fn new(y: Vec<Rational>, z: Vec<Rational>) -> Self {
        Point { y, z }
    }

    /// The same point with every `z_i` replaced by `1 - z_i`.
    pub fn complemented(&self) -> Point {
        Point { y: self.y.clone(), z: self.z.iter().map(|z| Rational::one() - z).collect() }
    }

    pub fn y_sum(&self) -> Rational {
        self.y.iter().sum()
    }

    pub fn check_dimensions(&self, k: usize, n: usize) -> Result<()> {
        if self.y.len() != k {
            return Err(Error::DimensionMismatch { what: "y", expected: k, found: self.y.len() });
        }
        if self.z.len() != n {
            return Err(Error::DimensionMismatch { what: "z", expected: n, found: self.z.len() });
        }
        Ok(())
    }

    pub fn check_unit_box(&self) -> Result<()> {
        let one = Rational::one();
        if let Some((i, z)) = self.z.iter().enumerate().find(|(_, z)| z.is_negative() || **z > one) {
            return Err(Error::Domain(format!("z_{} = {z} is outside [0, 1]", i + 1)));
        }
        Ok(())
    }
}

/// `y_coeffs . y + z_coeffs . z >= rhs`, always stored in the `>=` direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearCut {
    pub y_coeffs: Vec<Rational>,
    pub z_coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub kind: CutKind,
}

/// The coefficient data of a canonical cut, without its provenance tag.
pub type CutKey = (Vec<Rational>, Vec<Rational>, Rational);

impl LinearCut {
    pub fn new(y_coeffs: Vec<Rational>, z_coeffs: Vec<Rational>, rhs: Rational, kind: CutKind) -> Self {
        LinearCut { y_coeffs, z_coeffs, rhs, kind }
    }

    pub fn lhs(&self, point: &Point) -> Rational {
        debug_assert_eq!(point.y.len(), self.y_coeffs.len());
        debug_assert_eq!(point.z.len(), self.z_coeffs.len());
        let mut total = Rational::zero();
        for (a, y) in self.y_coeffs.iter().zip(&point.y) {
            if !a.is_zero() {
                total += a * y;
            }
        }
        for (b, z) in self.z_coeffs.iter().zip(&point.z) {
            if !b.is_zero() {
                total += b * z;
            }
        }
        total
    }

    /// `rhs - lhs(point)`; positive exactly when the point violates the cut.
    pub fn violation(&self, point: &Point) -> Rational {
        &self.rhs - self.lhs(point)
    }

    pub fn is_satisfied_by(&self, point: &Point) -> bool {
        !self.violation(point).is_positive()
    }

    /// Scales by the unique positive rational that makes every coefficient an
    /// integer with collective gcd 1. The direction is never flipped, so the
    /// half-space is unchanged.
    pub fn canonicalize(&self) -> Result<LinearCut> {
        let all = || self.y_coeffs.iter().chain(&self.z_coeffs).chain(std::iter::once(&self.rhs));
        if all().all(Rational::is_zero) {
            return Err(Error::AllZeroCut);
        }
        let lcm = Rational::lcm_of_denominators(all());
        let ints: Vec<BigInt> = all().map(|v| v.numer() * (&lcm / v.denom())).collect();
        let gcd = ints.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        debug_assert!(gcd.is_positive());
        let mut values = ints.into_iter().map(|v| Rational::from(v / &gcd));
        let y_coeffs = values.by_ref().take(self.y_coeffs.len()).collect();
        let z_coeffs = values.by_ref().take(self.z_coeffs.len()).collect();
        let rhs = values.next().expect("rhs present");
        Ok(LinearCut { y_coeffs, z_coeffs, rhs, kind: self.kind })
    }

    /// Coefficient data for equality tests that ignore provenance.
    pub fn key(&self) -> CutKey {
        (self.y_coeffs.clone(), self.z_coeffs.clone(), self.rhs.clone())
    }

    /// True when both cuts describe the same half-space.
    pub fn same_inequality(&self, other: &LinearCut) -> bool {
        match (self.canonicalize(), other.canonicalize()) {
            (Ok(a), Ok(b)) => a.key() == b.key(),
            _ => false,
        }
    }

    /// Rewrites the cut in the variables `u = 1 - z`.
    pub fn complemented(&self) -> LinearCut {
        let shift: Rational = self.z_coeffs.iter().sum();
        LinearCut {
            y_coeffs: self.y_coeffs.clone(),
            z_coeffs: self.z_coeffs.iter().map(|b| -b).collect(),
            rhs: &self.rhs - shift,
            kind: self.kind,
        }
    }

    /// One-line form `a1 ... ak | b1 ... bn | >= g | kind`.
    pub fn to_line(&self) -> String {
        let join = |v: &[Rational]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        format!("{} | {} | >= {} | {}", join(&self.y_coeffs), join(&self.z_coeffs), self.rhs, self.kind)
    }
}

impl fmt::Display for LinearCut {
    /// Human-readable form with 1-based variable names, e.g. `y1 + y2 + 8 z3 >= 17`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        let named = self
            .y_coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| (a, format!("y{}", j + 1)))
            .chain(self.z_coeffs.iter().enumerate().map(|(i, b)| (b, format!("z{}", i + 1))));
        for (c, name) in named {
            if c.is_zero() {
                continue;
            }
            let magnitude = c.abs();
            let body = if magnitude.is_one() { name } else { format!("{magnitude} {name}") };
            let sign = if c.is_negative() { "-" } else { "+" };
            if terms.is_empty() {
                terms.push(if c.is_negative() { format!("-{body}") } else { body });
            } else {
                terms.push(format!("{sign} {body}"));
            }
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        write!(f, "{} >= {}", terms.join(" "), self.rhs)
    }
}

/// Canonicalizes and removes duplicate inequalities, keeping the first
/// occurrence of each (and therefore its kind).
pub fn dedup_canonical(cuts: impl IntoIterator<Item = LinearCut>) -> Result<Vec<LinearCut>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for cut in cuts {
        let c = cut.canonicalize()?;
        if seen.insert(c.key()) {
            out.push(c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, r};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| r(x)).collect()
    }

    #[test]
    fn scales_by_gcd() {
        let cut = LinearCut::new(ints(&[2, 2]), ints(&[2, 2, 16, 0, 0]), r(34), CutKind::AMix);
        let c = cut.canonicalize().unwrap();
        assert_eq!(c.y_coeffs, ints(&[1, 1]));
        assert_eq!(c.z_coeffs, ints(&[1, 1, 8, 0, 0]));
        assert_eq!(c.rhs, r(17));
        assert_eq!(c.to_line(), "1 1 | 1 1 8 0 0 | >= 17 | AMix");
    }

    #[test]
    fn never_flips_direction() {
        let cut = LinearCut::new(ints(&[-1]), ints(&[0]), r(-1), CutKind::BoundUpper);
        assert_eq!(cut.canonicalize().unwrap(), cut);
        let half = LinearCut::new(vec![q(-1, 2)], vec![q(1, 3)], q(-5, 6), CutKind::Mix);
        let c = half.canonicalize().unwrap();
        assert_eq!(c.key(), (ints(&[-3]), ints(&[2]), r(-5)));
    }

    #[test]
    fn rejects_all_zero() {
        let cut = LinearCut::new(ints(&[0]), ints(&[0, 0]), r(0), CutKind::Mix);
        assert!(matches!(cut.canonicalize(), Err(Error::AllZeroCut)));
    }

    #[test]
    fn complement_round_trips() {
        let cut = LinearCut::new(ints(&[1, 1]), ints(&[1, 1, 8, 0, 0]), r(17), CutKind::AMix);
        let p = Point::new(ints(&[8, 8]), vec![r(1), r(1), q(1, 2), r(0), r(1)]);
        assert_eq!(cut.lhs(&p) - &cut.rhs, cut.complemented().lhs(&p.complemented()) - cut.complemented().rhs);
        assert_eq!(cut.complemented().complemented(), cut);
    }

    #[test]
    fn display_is_readable() {
        let cut = LinearCut::new(ints(&[1, 0]), ints(&[2, 0, -1]), r(13), CutKind::Mix);
        assert_eq!(cut.to_string(), "y1 + 2 z1 - z3 >= 13");
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..12).prop_map(|(a, b)| q(a, b))
    }

    fn arb_cut() -> impl Strategy<Value = LinearCut> {
        (
            proptest::collection::vec(arb_rational(), 1..4),
            proptest::collection::vec(arb_rational(), 0..6),
            arb_rational(),
        )
            .prop_filter("not all zero", |(a, b, g)| !(a.iter().chain(b).all(Rational::is_zero) && g.is_zero()))
            .prop_map(|(a, b, g)| LinearCut::new(a, b, g, CutKind::Mix))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn canonicalize_is_idempotent(cut in arb_cut()) {
            let once = cut.canonicalize().unwrap();
            prop_assert_eq!(once.canonicalize().unwrap(), once.clone());
            prop_assert!(once.y_coeffs.iter().chain(&once.z_coeffs).all(Rational::is_integer));
        }

        #[test]
        fn positive_multiples_canonicalize_alike(cut in arb_cut(), m in 1i64..20, d in 1i64..20) {
            let s = q(m, d);
            let scaled = LinearCut::new(
                cut.y_coeffs.iter().map(|a| a * &s).collect(),
                cut.z_coeffs.iter().map(|b| b * &s).collect(),
                &cut.rhs * &s,
                cut.kind,
            );
            prop_assert_eq!(scaled.canonicalize().unwrap().key(), cut.canonicalize().unwrap().key());
        }

        #[test]
        fn canonical_form_preserves_half_space(
            cut in arb_cut(),
            ys in proptest::collection::vec(arb_rational(), 3),
            zs in proptest::collection::vec(arb_rational(), 6),
        ) {
            let p = Point::new(ys[..cut.y_coeffs.len()].to_vec(), zs[..cut.z_coeffs.len()].to_vec());
            let c = cut.canonicalize().unwrap();
            prop_assert_eq!(cut.violation(&p).signum(), c.violation(&p).signum());
        }
    }
}
