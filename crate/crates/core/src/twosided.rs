//! Two-sided chance constraints `|a x - b| <= c x - d` as a two-column joint
//! mixing set with a band on `y_1 - y_2`.
//!
//! With `y_c = c x`, `y_a = a x` and `u_a >= a x >= 0`, the substitution
//! `y_1 = y_c + y_a`, `y_2 = y_c - y_a + u_a` turns scenario rows
//! `w_i = d_i + b_i`, `v_i = d_i - b_i` into the instance with columns
//! `w_i` and `v_i + u_a` and epsilon `u_a`, plus `u_a >= y_1 - y_2 >= -u_a`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregated::aggregated_cut;
use crate::cut::{CutKind, LinearCut, Point};
use crate::error::{Error, Result};
use crate::hull::{self, Extended, HullPoint, Membership, VRepresentation, VertexKind};
use crate::instance::MixingInstance;
use crate::rational::Rational;
use crate::sequence::SequenceTheta;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoSidedData {
    w: Vec<Rational>,
    v: Vec<Rational>,
    u_a: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSidedDocument {
    pub n: usize,
    pub w: Vec<Rational>,
    pub v: Vec<Rational>,
    pub u_a: Rational,
}

impl TwoSidedData {
    /// Requires `u_a >= max_i w_i` and `w_i >= v_i >= 0`.
    pub fn new(w: Vec<Rational>, v: Vec<Rational>, u_a: Rational) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Validation("no scenarios".into()));
        }
        if w.len() != v.len() {
            return Err(Error::DimensionMismatch { what: "v", expected: w.len(), found: v.len() });
        }
        for (i, (wi, vi)) in w.iter().zip(&v).enumerate() {
            if vi.is_negative() {
                return Err(Error::ConditionViolated { index: i, reason: format!("v = {vi} is negative") });
            }
            if wi < vi {
                return Err(Error::ConditionViolated { index: i, reason: format!("w = {wi} is below v = {vi}") });
            }
            if *wi > u_a {
                return Err(Error::ConditionViolated { index: i, reason: format!("w = {wi} exceeds u_a = {u_a}") });
            }
        }
        Ok(TwoSidedData { w, v, u_a })
    }

    pub fn from_integers(w: &[i64], v: &[i64], u_a: i64) -> Result<Self> {
        Self::new(
            w.iter().map(|&x| Rational::from(x)).collect(),
            v.iter().map(|&x| Rational::from(x)).collect(),
            Rational::from(u_a),
        )
    }

    pub fn from_document(doc: TwoSidedDocument) -> Result<Self> {
        if doc.w.len() != doc.n {
            return Err(Error::Validation(format!("n = {} but w has {} entries", doc.n, doc.w.len())));
        }
        Self::new(doc.w, doc.v, doc.u_a)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TwoSidedDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_document(&self) -> TwoSidedDocument {
        TwoSidedDocument { n: self.n(), w: self.w.clone(), v: self.v.clone(), u_a: self.u_a.clone() }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn w(&self) -> &[Rational] {
        &self.w
    }

    pub fn v(&self) -> &[Rational] {
        &self.v
    }

    pub fn u_a(&self) -> &Rational {
        &self.u_a
    }

    /// `(y_1, y_2)` for given `(y_c, y_a)`.
    pub fn to_mixing_point(&self, point: &Point) -> Point {
        let (yc, ya) = (&point.y[0], &point.y[1]);
        Point::new(vec![yc + ya, yc - ya + &self.u_a], point.z.clone())
    }
}

/// The joint mixing set with columns `w` and `v + u_a` and epsilon `u_a`.
/// Also confirms that `i_bar` is exactly the rows with `w_i = v_i = 0` and
/// that `L_W >= u_a`.
pub fn to_mixing(data: &TwoSidedData) -> Result<MixingInstance> {
    let weights = data.w.iter().zip(&data.v).map(|(w, v)| vec![w.clone(), v + &data.u_a]).collect();
    let inst = MixingInstance::from_weights(weights, data.u_a.clone())?;
    let diagnosis = hull::diagnose(&inst)?;
    let expected: Vec<usize> = (0..data.n()).filter(|&i| data.w[i].is_zero() && data.v[i].is_zero()).collect();
    if diagnosis.i_bar != expected {
        return Err(Error::Internal(format!(
            "i_bar is {:?}, expected the rows with w = v = 0: {expected:?}",
            diagnosis.i_bar
        )));
    }
    if !diagnosis.l_w.at_least(&data.u_a) {
        return Err(Error::Internal(format!("L_W = {} is below u_a = {}", diagnosis.l_w, data.u_a)));
    }
    if !diagnosis.g_submodular {
        return Err(Error::Internal("the aggregate function is not submodular".into()));
    }
    Ok(inst)
}

/// Both forms of the inequality for `theta`.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralizedCut {
    pub theta: SequenceTheta,
    /// In `(y_1, y_2, z)`: the aggregated inequality of the mixing instance.
    pub primed: LinearCut,
    /// In `(y_c, y_a, z)`: `2 y_c + ... >= w_{r_1} + v_{g_1}`.
    pub original: LinearCut,
}

fn records(values: &[Rational], theta: &[usize]) -> Vec<usize> {
    let mut best = Rational::zero();
    let mut members = Vec::new();
    for &i in theta.iter().rev() {
        if values[i] >= best {
            members.push(i);
            best = values[i].clone();
        }
    }
    members.reverse();
    members
}

fn add_chain(z: &mut [Rational], values: &[Rational], chain: &[usize]) -> Rational {
    for (s, &i) in chain.iter().enumerate() {
        let next = chain.get(s + 1).map_or_else(Rational::zero, |&t| values[t].clone());
        z[i] += &values[i] - next;
    }
    values[chain[0]].clone()
}

pub fn generalized_cut(data: &TwoSidedData, theta: &SequenceTheta) -> Result<GeneralizedCut> {
    if theta.indices().iter().any(|&i| i >= data.n()) {
        return Err(Error::InvalidSequence(format!("{theta} has an index beyond n = {}", data.n())));
    }
    let inst = to_mixing(data)?;
    let primed = aggregated_cut(&inst, theta)?;

    let n = data.n();
    let mut z = vec![Rational::zero(); n];
    let shifted: Vec<Rational> = data.v.iter().map(|v| v + &data.u_a).collect();
    let r_head = add_chain(&mut z, &data.w, &records(&data.w, theta.indices()));
    let g_head = add_chain(&mut z, &data.v, &records(&shifted, theta.indices()));
    let original = LinearCut::new(vec![Rational::from(2), Rational::zero()], z, r_head + g_head, CutKind::AMix);

    if original.z_coeffs != primed.z_coeffs || &original.rhs + &data.u_a != primed.rhs {
        return Err(Error::Internal(format!("the two forms disagree for {theta}: {primed} versus {original}")));
    }
    Ok(GeneralizedCut { theta: theta.clone(), primed, original })
}

/// `y_1 - y_2 >= -u_a` and `y_2 - y_1 >= -u_a`.
pub fn band_cuts(data: &TwoSidedData) -> [LinearCut; 2] {
    let n = data.n();
    let one = Rational::one();
    let minus = -Rational::one();
    [
        LinearCut::new(
            vec![one.clone(), minus.clone()],
            vec![Rational::zero(); n],
            -data.u_a.clone(),
            CutKind::BoundLower,
        ),
        LinearCut::new(vec![minus, one], vec![Rational::zero(); n], -data.u_a.clone(), CutKind::BoundLower),
    ]
}

/// Largest `n` accepted by [`hull_with_bounds`].
pub const BAND_HULL_LIMIT: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct BandHullReport {
    pub extreme_points: usize,
    /// Every extreme point of the unbanded hull satisfies the band.
    pub band_holds_at_vertices: bool,
    /// Points created where a ray from a vertex meets a band hyperplane.
    pub clipped_points: usize,
    /// Every clipped point lies on one of the two band hyperplanes; their `z`
    /// parts are copies of vertex `z`s and hence 0/1.
    pub clipped_on_band: bool,
    pub i_bar: Vec<usize>,
    pub l_w: Extended,
    pub g_submodular: bool,
    /// Families whose union describes the banded hull.
    pub description: Vec<String>,
    #[serde(skip)]
    pub clipped: VRepresentation,
}

impl BandHullReport {
    pub fn passed(&self) -> bool {
        self.band_holds_at_vertices && self.clipped_on_band && self.g_submodular
    }
}

/// The hull of the mixing set intersected with the band, with the checks that
/// the band creates no fractional vertex. `clipped` is in original coordinates
/// over `(y_1, y_2, z)`.
pub fn hull_with_bounds(data: &TwoSidedData) -> Result<BandHullReport> {
    if data.n() > BAND_HULL_LIMIT {
        return Err(Error::GroundSetTooLarge { size: data.n(), limit: BAND_HULL_LIMIT });
    }
    let inst = to_mixing(data)?;
    let diagnosis = hull::diagnose(&inst)?;
    let vrep = hull::v_representation(&inst)?.complemented();
    let u = &data.u_a;
    let band_holds = vrep.points.iter().all(|p| {
        let diff = &p.y[0] - &p.y[1];
        diff <= *u && diff >= -u.clone()
    });

    let mut points = vrep.points.clone();
    let mut clipped_points = 0;
    let mut on_band = true;
    for p in &vrep.points {
        let diff = &p.y[0] - &p.y[1];
        let mut up = p.y.clone();
        up[0] += u - &diff;
        let mut down = p.y.clone();
        down[1] += u + &diff;
        for y in [up, down] {
            let d = &y[0] - &y[1];
            on_band &= d == *u || d == -u.clone();
            points.push(HullPoint { y, z: p.z.clone(), kind: VertexKind::Other });
            clipped_points += 1;
        }
    }
    let clipped = VRepresentation { points, rays: vec![vec![Rational::one(), Rational::one()]], ..vrep.clone() };
    Ok(BandHullReport {
        extreme_points: vrep.points.len(),
        band_holds_at_vertices: band_holds,
        clipped_points,
        clipped_on_band: on_band,
        i_bar: diagnosis.i_bar.clone(),
        l_w: diagnosis.l_w.clone(),
        g_submodular: diagnosis.g_submodular,
        description: vec![
            "mixing inequalities for y1 and y2".into(),
            "aggregated inequalities for every sequence".into(),
            "u_a >= y1 - y2 >= -u_a".into(),
            "0 <= z <= 1".into(),
        ],
        clipped,
    })
}

/// Membership of `(y_1, y_2, z)` in the banded hull.
pub fn band_membership(report: &BandHullReport, point: &Point) -> Result<Membership> {
    hull::membership(&report.clipped, point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, r};

    fn demo() -> TwoSidedData {
        TwoSidedData::from_integers(&[8, 6, 13, 1, 4], &[3, 4, 2, 1, 1], 13).unwrap()
    }

    #[test]
    fn mapping() {
        let inst = to_mixing(&demo()).unwrap();
        assert_eq!(inst.row(0), &[r(8), r(16)]);
        assert_eq!(*inst.epsilon(), r(13));
        assert!(matches!(
            TwoSidedData::from_integers(&[1, 2], &[1, 3], 5),
            Err(Error::ConditionViolated { index: 1, .. })
        ));
        assert!(matches!(TwoSidedData::from_integers(&[6], &[1], 5), Err(Error::ConditionViolated { index: 0, .. })));
    }

    #[test]
    fn all_zero_rows_are_negligible() {
        let data = TwoSidedData::from_integers(&[0, 0, 0], &[0, 0, 0], 4).unwrap();
        let inst = to_mixing(&data).unwrap();
        assert_eq!(hull::diagnose(&inst).unwrap().i_bar, vec![0, 1, 2]);
    }

    #[test]
    fn forms_agree() {
        let data = demo();
        let theta = SequenceTheta::new(vec![2, 1, 0], 5).unwrap();
        let cut = generalized_cut(&data, &theta).unwrap();
        assert_eq!(cut.original.rhs, r(13 + 4));
        let single = generalized_cut(&data, &SequenceTheta::new(vec![3], 5).unwrap()).unwrap();
        assert_eq!(single.original.rhs, r(2));
        assert_eq!(single.original.z_coeffs[3], r(2));
        let p = Point::new(vec![q(3, 2), r(1)], vec![r(0), q(1, 2), r(1), r(0), r(1)]);
        let mapped = data.to_mixing_point(&p);
        assert_eq!(cut.original.lhs(&p) + data.u_a(), cut.primed.lhs(&mapped));
    }

    #[test]
    fn band_at_vertices() {
        let report = hull_with_bounds(&demo()).unwrap();
        assert!(report.passed());
        let data = TwoSidedData::from_integers(&[3, 5], &[0, 0], 5).unwrap();
        let report = hull_with_bounds(&data).unwrap();
        assert!(report.passed());
        let vrep = hull::v_representation(&to_mixing(&data).unwrap()).unwrap();
        let ones: Vec<Vec<Rational>> =
            vrep.points.iter().filter(|p| p.z.iter().all(|&b| !b)).map(|p| p.y.clone()).collect();
        assert_eq!(ones, vec![vec![r(5), r(0)], vec![r(0), r(5)]]);
    }

    #[test]
    fn banded_membership() {
        let data = demo();
        let report = hull_with_bounds(&data).unwrap();
        let inside = Point::new(vec![r(13), r(17)], vec![r(0); 5]);
        assert!(band_membership(&report, &inside).unwrap().is_inside());
        let outside = Point::new(vec![r(40), r(17)], vec![r(0); 5]);
        assert!(!band_membership(&report, &outside).unwrap().is_inside());
    }
}
