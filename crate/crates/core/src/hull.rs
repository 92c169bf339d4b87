//! The convex hull of the joint mixing set with a linking constraint:
//! the sufficiency diagnosis, the explicit extreme points and rays, and exact
//! membership testing.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::aggregated::{aggregated_cut_unchecked, AggregateFunction};
use crate::counterexample::{self, WitnessReport};
use crate::cut::{dedup_canonical, CutKind, LinearCut, Point};
use crate::error::{Error, Result};
use crate::instance::MixingInstance;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::mixing::mix_star_cuts;
use crate::rational::Rational;
use crate::sequence::for_each_sequence;
use crate::submodular::{find_submodularity_violation, Subset};

/// A rational or `+infinity`; only ever compared, never used in arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extended {
    Finite(Rational),
    Infinite,
}

impl Extended {
    pub fn at_least(&self, x: &Rational) -> bool {
        match self {
            Extended::Finite(v) => v >= x,
            Extended::Infinite => true,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Whether mixing and aggregated mixing inequalities describe the hull, and why.
///
/// Index sets and pairs are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HullDiagnosis {
    /// Rows whose weights sum to at most epsilon.
    pub i_bar: Vec<usize>,
    /// Every row outside `i_bar` dominates every row inside it, columnwise.
    pub c1_holds: bool,
    /// Lexicographically smallest `(p, q)` with `p` outside, `q` inside `i_bar`
    /// and `w_qj > w_pj` for some `j`.
    pub c1_violation: Option<(usize, usize)>,
    /// `sum_j max_{i in i_bar} w_ij <= epsilon`.
    pub c2_holds: bool,
    pub negligible: bool,
    /// `epsilon <= l_w`.
    pub eps_within_l_w: bool,
    /// Smallest `sum_j min(w_pj, w_qj)` over distinct rows outside `i_bar`.
    pub l_w: Extended,
    /// Rows attaining `l_w`: a lexicographically smallest pair, or the single
    /// row outside `i_bar`.
    pub l_w_rows: Vec<usize>,
    pub g_submodular: bool,
    pub sufficient: bool,
}

impl HullDiagnosis {
    /// Short reasons the condition fails, e.g. `"eps > L_W(eps)"`.
    pub fn failure_reasons(&self) -> Vec<&'static str> {
        let mut reasons = Vec::new();
        if !self.c1_holds {
            reasons.push("C1 violated");
        }
        if !self.c2_holds {
            reasons.push("C2 violated");
        }
        if !self.eps_within_l_w {
            reasons.push("eps > L_W(eps)");
        }
        reasons
    }
}

/// Diagnoses an instance with zero lower bounds.
pub fn diagnose(inst: &MixingInstance) -> Result<HullDiagnosis> {
    inst.require_zero_lower()?;
    let n = inst.n();
    let eps = inst.epsilon();
    let inside: Vec<bool> = (0..n).map(|i| inst.row_sum(i) <= *eps).collect();
    let i_bar: Vec<usize> = (0..n).filter(|&i| inside[i]).collect();
    let outside: Vec<usize> = (0..n).filter(|&i| !inside[i]).collect();

    let mut c1_violation = None;
    'search: for &p in &outside {
        for &q in &i_bar {
            if (0..inst.k()).any(|j| inst.w(q, j) > inst.w(p, j)) {
                c1_violation = Some((p, q));
                break 'search;
            }
        }
    }
    let c1_holds = c1_violation.is_none();
    let inside_max: Rational =
        (0..inst.k()).map(|j| i_bar.iter().map(|&i| inst.w(i, j).clone()).max().unwrap_or_else(Rational::zero)).sum();
    let c2_holds = inside_max <= *eps;
    let negligible = c1_holds && c2_holds;

    let (l_w, l_w_rows) = match outside.len() {
        0 => (Extended::Infinite, Vec::new()),
        1 => (Extended::Finite(inst.row_sum(outside[0])), vec![outside[0]]),
        _ => {
            let mut best: Option<(Rational, usize, usize)> = None;
            for (a, &p) in outside.iter().enumerate() {
                for &q in &outside[a + 1..] {
                    let v: Rational = (0..inst.k()).map(|j| inst.w(p, j).clone().min(inst.w(q, j).clone())).sum();
                    if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                        best = Some((v, p, q));
                    }
                }
            }
            let (v, p, q) = best.expect("at least one pair");
            (Extended::Finite(v), vec![p, q])
        }
    };
    let eps_within_l_w = l_w.at_least(eps);
    let g_submodular = negligible && eps_within_l_w;
    Ok(HullDiagnosis {
        i_bar,
        c1_holds,
        c1_violation,
        c2_holds,
        negligible,
        eps_within_l_w,
        l_w,
        l_w_rows,
        g_submodular,
        sufficient: g_submodular,
    })
}

/// Largest instance for which [`diagnose_cross_checked`] runs the brute-force test.
pub const CROSS_CHECK_LIMIT: usize = 12;

/// [`diagnose`], plus a brute-force submodularity test of the aggregate
/// function when `n <= 12`; a disagreement is reported as an internal error.
pub fn diagnose_cross_checked(inst: &MixingInstance) -> Result<HullDiagnosis> {
    let d = diagnose(inst)?;
    if inst.n() <= CROSS_CHECK_LIMIT {
        let g = AggregateFunction::new(inst)?;
        let brute = find_submodularity_violation(&g, CROSS_CHECK_LIMIT)?.is_none();
        if brute != d.g_submodular {
            return Err(Error::Internal(format!(
                "closed-form verdict {} disagrees with brute force {}",
                d.g_submodular, brute
            )));
        }
    }
    Ok(d)
}

/// `y_1 + ... + y_k >= epsilon + sum_j lower_j`.
pub fn linking_cut(inst: &MixingInstance) -> LinearCut {
    let rhs = inst.epsilon() + inst.lower().iter().sum::<Rational>();
    LinearCut::new(vec![Rational::one(); inst.k()], vec![Rational::zero(); inst.n()], rhs, CutKind::Linking)
}

/// `z_i >= 0` and `-z_i >= -1` for every `i`.
pub fn bound_cuts(inst: &MixingInstance) -> Vec<LinearCut> {
    let mut cuts = Vec::with_capacity(2 * inst.n());
    for i in 0..inst.n() {
        let mut z = vec![Rational::zero(); inst.n()];
        z[i] = Rational::one();
        cuts.push(LinearCut::new(vec![Rational::zero(); inst.k()], z.clone(), Rational::zero(), CutKind::BoundLower));
        z[i] = -Rational::one();
        cuts.push(LinearCut::new(vec![Rational::zero(); inst.k()], z, -Rational::one(), CutKind::BoundUpper));
    }
    cuts
}

/// Which `z` convention a list of points uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Coordinates {
    /// `z_i = 1` means scenario `i` is enforced (the complemented variables).
    Enforced,
    /// `z_i = 0` means scenario `i` is enforced (the variables of the cuts).
    Original,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VertexKind {
    /// `y_j = max_i w_ij z_i`, whose sum exceeds epsilon.
    Above,
    /// Column maxima with the deficit up to epsilon added to one coordinate.
    Deficit(usize),
    /// Constructed by some other rule (e.g. clipping).
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HullPoint {
    pub y: Vec<Rational>,
    pub z: Vec<bool>,
    pub kind: VertexKind,
}

/// Extreme points and extreme rays (on `y` only) of the hull.
#[derive(Clone, Debug, Serialize)]
pub struct VRepresentation {
    pub k: usize,
    pub n: usize,
    pub coordinates: Coordinates,
    pub points: Vec<HullPoint>,
    pub rays: Vec<Vec<Rational>>,
}

/// Largest `n` for which the extreme points are enumerated.
pub const V_REPRESENTATION_LIMIT: usize = 20;

/// Enumerates every `z` in `{0,1}^n` (enforced coordinates).
pub fn v_representation(inst: &MixingInstance) -> Result<VRepresentation> {
    inst.require_zero_lower()?;
    let (n, k) = (inst.n(), inst.k());
    if n > V_REPRESENTATION_LIMIT {
        return Err(Error::GroundSetTooLarge { size: n, limit: V_REPRESENTATION_LIMIT });
    }
    let eps = inst.epsilon();
    let mut points = Vec::new();
    for mask in 0u64..1 << n {
        let z: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let y: Vec<Rational> = (0..k)
            .map(|j| (0..n).filter(|&i| z[i]).map(|i| inst.w(i, j).clone()).max().unwrap_or_else(Rational::zero))
            .collect();
        let sum: Rational = y.iter().sum();
        if sum > *eps {
            points.push(HullPoint { y, z, kind: VertexKind::Above });
        } else {
            let deficit = eps - &sum;
            for d in 0..k {
                let mut yd = y.clone();
                yd[d] += &deficit;
                points.push(HullPoint { y: yd, z: z.clone(), kind: VertexKind::Deficit(d) });
            }
        }
    }
    let rays =
        (0..k).map(|j| (0..k).map(|t| if t == j { Rational::one() } else { Rational::zero() }).collect()).collect();
    Ok(VRepresentation { k, n, coordinates: Coordinates::Enforced, points, rays })
}

impl VRepresentation {
    /// The same hull with every `z_i` replaced by `1 - z_i`.
    pub fn complemented(&self) -> VRepresentation {
        VRepresentation {
            coordinates: match self.coordinates {
                Coordinates::Enforced => Coordinates::Original,
                Coordinates::Original => Coordinates::Enforced,
            },
            points: self
                .points
                .iter()
                .map(|p| HullPoint { y: p.y.clone(), z: p.z.iter().map(|b| !b).collect(), kind: p.kind })
                .collect(),
            ..self.clone()
        }
    }

    /// Points in the coordinates the cuts of this crate use.
    pub fn original_points(&self) -> Vec<Point> {
        self.points
            .iter()
            .map(|p| {
                let z =
                    p.z.iter()
                        .map(|&b| {
                            let one = match self.coordinates {
                                Coordinates::Original => b,
                                Coordinates::Enforced => !b,
                            };
                            if one {
                                Rational::one()
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect();
                Point::new(p.y.clone(), z)
            })
            .collect()
    }

    fn point_value(&self, cut: &LinearCut, p: &HullPoint) -> Rational {
        let mut total = Rational::zero();
        for (a, y) in cut.y_coeffs.iter().zip(&p.y) {
            if !a.is_zero() {
                total += a * y;
            }
        }
        for (b, &bit) in cut.z_coeffs.iter().zip(&p.z) {
            let one = match self.coordinates {
                Coordinates::Original => bit,
                Coordinates::Enforced => !bit,
            };
            if one && !b.is_zero() {
                total += b;
            }
        }
        total
    }

    /// First extreme point or ray violating `cut` (original coordinates).
    pub fn first_violation(&self, cut: &LinearCut) -> Option<String> {
        for (r, ray) in self.rays.iter().enumerate() {
            let slope: Rational = cut.y_coeffs.iter().zip(ray).map(|(a, d)| a * d).sum();
            if slope.is_negative() {
                return Some(format!("ray {r} decreases the left-hand side"));
            }
        }
        for (idx, p) in self.points.iter().enumerate() {
            if self.point_value(cut, p) < cut.rhs {
                return Some(format!("extreme point {idx} violates the cut"));
            }
        }
        None
    }

    /// `true` if every extreme point and ray satisfies `cut` (original coordinates).
    pub fn is_valid(&self, cut: &LinearCut) -> bool {
        self.first_violation(cut).is_none()
    }

    /// Minimum of `alpha . y + beta . z` over the hull, `None` if unbounded below.
    pub fn minimum(&self, cut: &LinearCut) -> Option<Rational> {
        for ray in &self.rays {
            let slope: Rational = cut.y_coeffs.iter().zip(ray).map(|(a, d)| a * d).sum();
            if slope.is_negative() {
                return None;
            }
        }
        self.points.iter().map(|p| self.point_value(cut, p)).min()
    }
}

/// Outcome of a membership test, with a certificate either way.
#[derive(Clone, Debug, Serialize)]
pub enum Membership {
    /// `point = sum lambda_p p + sum mu_r r`, `lambda` a probability vector.
    Inside { lambda: Vec<Rational>, mu: Vec<Rational> },
    /// A valid inequality (same coordinates as the representation) that the
    /// point violates.
    Outside { separator: LinearCut },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside { .. })
    }
}

fn bit_value(bit: bool) -> Rational {
    if bit {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// Decides whether `point` (in the representation's coordinates) lies in
/// `conv(points) + cone(rays)`, by an exact feasibility LP.
pub fn membership(vrep: &VRepresentation, point: &Point) -> Result<Membership> {
    point.check_dimensions(vrep.k, vrep.n)?;
    let (k, n) = (vrep.k, vrep.n);
    // Points disagreeing with a coordinate where the target is 0 or 1 cannot
    // carry weight; drop them and repair the dual afterwards.
    let fixed: Vec<Option<bool>> = point
        .z
        .iter()
        .map(|z| {
            if z.is_zero() {
                Some(false)
            } else if z.is_one() {
                Some(true)
            } else {
                None
            }
        })
        .collect();
    let kept: Vec<usize> = (0..vrep.points.len())
        .filter(|&p| vrep.points[p].z.iter().zip(&fixed).all(|(&bit, f)| f.is_none_or(|v| v == bit)))
        .collect();
    let columns = kept.len() + vrep.rays.len();
    let mut lp = LinearProgram::new(columns);
    let column_entry = |row: usize, col: usize| -> Rational {
        if col < kept.len() {
            let p = &vrep.points[kept[col]];
            if row < k {
                p.y[row].clone()
            } else if row < k + n {
                bit_value(p.z[row - k])
            } else {
                Rational::one()
            }
        } else {
            let ray = &vrep.rays[col - kept.len()];
            if row < k {
                ray[row].clone()
            } else {
                Rational::zero()
            }
        }
    };
    let targets: Vec<Rational> =
        point.y.iter().chain(&point.z).cloned().chain(std::iter::once(Rational::one())).collect();
    for (row, target) in targets.iter().enumerate() {
        lp.add_row((0..columns).map(|c| column_entry(row, c)).collect(), Relation::Eq, target.clone());
    }
    match lp.feasibility() {
        LpOutcome::Optimal { x, .. } => {
            let mut lambda = vec![Rational::zero(); vrep.points.len()];
            for (c, &p) in kept.iter().enumerate() {
                lambda[p] = x[c].clone();
            }
            let mu = x[kept.len()..].to_vec();
            verify_inside(vrep, point, &lambda, &mu)?;
            Ok(Membership::Inside { lambda, mu })
        }
        LpOutcome::Infeasible { certificate } => {
            let mut y = certificate;
            // Make the certificate valid for the dropped points too.
            let full_column = |p: usize| -> Vec<Rational> {
                let hp = &vrep.points[p];
                hp.y.iter()
                    .cloned()
                    .chain(hp.z.iter().map(|&b| bit_value(b)))
                    .chain(std::iter::once(Rational::one()))
                    .collect()
            };
            let dot = |y: &[Rational], col: &[Rational]| -> Rational {
                y.iter().zip(col).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum()
            };
            let worst = (0..vrep.points.len())
                .filter(|p| kept.binary_search(p).is_err())
                .map(|p| dot(&y, &full_column(p)))
                .max();
            if let Some(worst) = worst {
                let big = worst.positive_part() + Rational::one();
                for (i, f) in fixed.iter().enumerate() {
                    match f {
                        Some(false) => y[k + i] -= &big,
                        Some(true) => {
                            y[k + i] += &big;
                            y[k + n] -= &big;
                        }
                        None => {}
                    }
                }
            }
            let separator = LinearCut::new(
                y[..k].iter().map(|v| -v).collect(),
                y[k..k + n].iter().map(|v| -v).collect(),
                y[k + n].clone(),
                CutKind::Separating,
            )
            .canonicalize()?;
            if !separator.violation(point).is_positive() {
                return Err(Error::Internal("separating hyperplane does not cut off the point".into()));
            }
            if let Some(why) = vrep_first_violation_same_space(vrep, &separator) {
                return Err(Error::Internal(format!("separating hyperplane is not valid: {why}")));
            }
            Ok(Membership::Outside { separator })
        }
        LpOutcome::Unbounded => Err(Error::Internal("feasibility problem reported unbounded".into())),
    }
}

/// Validity of a cut written in the representation's own coordinates.
fn vrep_first_violation_same_space(vrep: &VRepresentation, cut: &LinearCut) -> Option<String> {
    match vrep.coordinates {
        Coordinates::Original => vrep.first_violation(cut),
        // `first_violation` reads enforced bits through the complement, so
        // hand it the cut rewritten for complemented variables.
        Coordinates::Enforced => vrep.first_violation(&cut.complemented()),
    }
}

fn verify_inside(vrep: &VRepresentation, point: &Point, lambda: &[Rational], mu: &[Rational]) -> Result<()> {
    let bad = || Error::Internal("convex combination certificate does not reproduce the point".into());
    if lambda.iter().chain(mu).any(Rational::is_negative) || lambda.iter().sum::<Rational>() != Rational::one() {
        return Err(bad());
    }
    for j in 0..vrep.k {
        let v: Rational =
            vrep.points.iter().zip(lambda).filter(|(_, l)| !l.is_zero()).map(|(p, l)| l * &p.y[j]).sum::<Rational>()
                + vrep.rays.iter().zip(mu).map(|(r, m)| m * &r[j]).sum::<Rational>();
        if v != point.y[j] {
            return Err(bad());
        }
    }
    for i in 0..vrep.n {
        let v: Rational =
            vrep.points.iter().zip(lambda).filter(|(p, l)| !l.is_zero() && p.z[i]).map(|(_, l)| l.clone()).sum();
        if v != point.z[i] {
            return Err(bad());
        }
    }
    Ok(())
}

/// Membership of a point given in original coordinates.
pub fn membership_original(inst: &MixingInstance, point: &Point) -> Result<Membership> {
    let vrep = v_representation(inst)?.complemented();
    membership(&vrep, point)
}

/// The aggregated inequalities with the polymatroid property: sequences over
/// rows outside `i_bar`, every column head a column maximum, and
/// `epsilon <= L_theta`.
pub fn aggregated_star_cuts(inst: &MixingInstance, diagnosis: &HullDiagnosis) -> Result<Vec<LinearCut>> {
    inst.require_zero_lower()?;
    let ground: Vec<usize> = (0..inst.n()).filter(|i| diagnosis.i_bar.binary_search(i).is_err()).collect();
    let mut cuts = Vec::new();
    for_each_sequence(&ground, ground.len(), |theta| {
        let cut = aggregated_cut_unchecked(inst, theta);
        if cut.kind == CutKind::AMixStar {
            cuts.push(cut);
        }
    });
    dedup_canonical(cuts)
}

#[derive(Clone, Debug)]
pub struct SufficiencyOptions {
    pub seed: u64,
    /// Points sampled on and near the boundary of the cut polyhedron.
    pub samples: usize,
    /// Vertices of the cut polyhedron found by minimizing random objectives.
    pub vertex_samples: usize,
    /// Midpoints of random pairs of extreme points.
    pub midpoints: usize,
}

impl Default for SufficiencyOptions {
    fn default() -> Self {
        SufficiencyOptions { seed: 0x5EED, samples: 200, vertex_samples: 12, midpoints: 20 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureFailure {
    pub point: Point,
    pub separator: LinearCut,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub mix_star_cuts: usize,
    pub aggregated_star_cuts: usize,
    pub boundary_samples: usize,
    pub vertex_samples: usize,
    pub midpoint_samples: usize,
    pub failures: Vec<ClosureFailure>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum SufficiencyBranch {
    ConditionHolds(ClosureReport),
    ConditionFails(Box<WitnessReport>),
}

#[derive(Clone, Debug, Serialize)]
pub struct SufficiencyReport {
    pub diagnosis: HullDiagnosis,
    pub seed: u64,
    pub result: SufficiencyBranch,
    pub passed: bool,
}

/// The inequality system of the hull description when the condition holds:
/// all Mix*, all A-Mix* over rows outside `i_bar`, linking and bounds.
pub fn closure_system(inst: &MixingInstance, diagnosis: &HullDiagnosis) -> Result<(Vec<LinearCut>, Vec<LinearCut>)> {
    let mix = dedup_canonical(mix_star_cuts(inst))?;
    let agg = aggregated_star_cuts(inst, diagnosis)?;
    Ok((mix, agg))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Rational {
    match rng.gen_range(0..6) {
        0 => Rational::zero(),
        1 => Rational::one(),
        _ => {
            let den = rng.gen_range(1..=12i64);
            Rational::new(rng.gen_range(0..=den), den)
        }
    }
}

/// Smallest `y` satisfying the given cuts at `z` (original coordinates):
/// per-column lower bounds and a lower bound on the sum.
fn y_bounds(inst: &MixingInstance, mix: &[LinearCut], agg: &[LinearCut], z: &[Rational]) -> (Vec<Rational>, Rational) {
    let rest = |c: &LinearCut| -> Rational {
        &c.rhs - c.z_coeffs.iter().zip(z).filter(|(b, _)| !b.is_zero()).map(|(b, x)| b * x).sum::<Rational>()
    };
    let mut per = vec![Rational::zero(); inst.k()];
    for c in mix {
        let j = c.y_coeffs.iter().position(|a| !a.is_zero()).expect("mixing cut has a y term");
        let v = rest(c) / &c.y_coeffs[j];
        if v > per[j] {
            per[j] = v;
        }
    }
    let ones = Rational::from(inst.k());
    let mut total = inst.epsilon().clone();
    for c in agg {
        // aggregated cuts are canonical multiples of sum_j y_j
        let scale = c.y_coeffs.iter().sum::<Rational>() / &ones;
        let v = rest(c) / scale;
        if v > total {
            total = v;
        }
    }
    (per, total)
}

fn boundary_sample(inst: &MixingInstance, mix: &[LinearCut], agg: &[LinearCut], rng: &mut ChaCha8Rng) -> Point {
    let z: Vec<Rational> = (0..inst.n()).map(|_| random_unit(rng)).collect();
    let (per, total) = y_bounds(inst, mix, agg, &z);
    let mut y = per;
    if rng.gen_bool(0.3) {
        for v in y.iter_mut() {
            if rng.gen_bool(0.5) {
                *v += Rational::new(rng.gen_range(0..4), rng.gen_range(1..4));
            }
        }
    }
    let sum: Rational = y.iter().sum();
    if sum < total {
        let deficit = total - sum;
        if rng.gen_bool(0.5) {
            let d = rng.gen_range(0..inst.k());
            y[d] += deficit;
        } else {
            let weights: Vec<i64> = (0..inst.k()).map(|_| rng.gen_range(0..4)).collect();
            let total_w: i64 = weights.iter().sum();
            if total_w == 0 {
                y[0] += deficit;
            } else {
                for (v, w) in y.iter_mut().zip(&weights) {
                    *v += &deficit * Rational::new(*w, total_w);
                }
            }
        }
    }
    Point::new(y, z)
}

/// An optimal vertex of the cut system for a random objective.
fn vertex_sample(inst: &MixingInstance, system: &[LinearCut], rng: &mut ChaCha8Rng) -> Result<Point> {
    let (k, n) = (inst.k(), inst.n());
    let mut lp = LinearProgram::new(k + n);
    for c in system {
        lp.add_row(c.y_coeffs.iter().chain(&c.z_coeffs).cloned().collect(), Relation::Ge, c.rhs.clone());
    }
    for i in 0..n {
        let mut row = vec![Rational::zero(); k + n];
        row[k + i] = Rational::one();
        lp.add_row(row, Relation::Le, Rational::one());
    }
    let mut objective: Vec<Rational> = (0..k).map(|_| Rational::from_integer(rng.gen_range(1..=6))).collect();
    objective.extend((0..n).map(|_| Rational::from_integer(rng.gen_range(-6..=6))));
    lp.objective = objective;
    match lp.solve() {
        LpOutcome::Optimal { x, .. } => Ok(Point::new(x[..k].to_vec(), x[k..].to_vec())),
        other => Err(Error::Internal(format!("cut system LP ended with {other:?}"))),
    }
}

/// Checks the hull description claimed by the sufficiency condition, or the
/// counterexample when the condition fails.
pub fn check_sufficiency(inst: &MixingInstance, options: &SufficiencyOptions) -> Result<SufficiencyReport> {
    let diagnosis = diagnose(inst)?;
    if !diagnosis.sufficient {
        let witness = counterexample::certify_witness(inst)?;
        let passed = witness.passed();
        return Ok(SufficiencyReport {
            diagnosis,
            seed: options.seed,
            result: SufficiencyBranch::ConditionFails(Box::new(witness)),
            passed,
        });
    }
    let (mix, agg) = closure_system(inst, &diagnosis)?;
    let vrep = v_representation(inst)?.complemented();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut failures = Vec::new();
    let record = |point: Point, failures: &mut Vec<ClosureFailure>| -> Result<()> {
        if let Membership::Outside { separator } = membership(&vrep, &point)? {
            failures.push(ClosureFailure { point, separator });
        }
        Ok(())
    };
    for _ in 0..options.samples {
        let p = boundary_sample(inst, &mix, &agg, &mut rng);
        record(p, &mut failures)?;
    }
    let mut system = mix.clone();
    system.extend(agg.iter().cloned());
    system.push(linking_cut(inst));
    for _ in 0..options.vertex_samples {
        let p = vertex_sample(inst, &system, &mut rng)?;
        record(p, &mut failures)?;
    }
    let originals = vrep.original_points();
    let mut midpoints = 0;
    if originals.len() >= 2 {
        for _ in 0..options.midpoints {
            let pair: Vec<&Point> = originals.choose_multiple(&mut rng, 2).collect();
            let half = Rational::new(1, 2);
            let mid = Point::new(
                pair[0].y.iter().zip(&pair[1].y).map(|(a, b)| (a + b) * &half).collect(),
                pair[0].z.iter().zip(&pair[1].z).map(|(a, b)| (a + b) * &half).collect(),
            );
            record(mid, &mut failures)?;
            midpoints += 1;
        }
    }
    let passed = failures.is_empty();
    Ok(SufficiencyReport {
        diagnosis,
        seed: options.seed,
        result: SufficiencyBranch::ConditionHolds(ClosureReport {
            mix_star_cuts: mix.len(),
            aggregated_star_cuts: agg.len(),
            boundary_samples: options.samples,
            vertex_samples: options.vertex_samples,
            midpoint_samples: midpoints,
            failures,
        }),
        passed,
    })
}

/// `g` restricted to subsets given as masks, for small brute-force checks.
pub fn aggregate_value(inst: &MixingInstance, set: &Subset) -> Result<Rational> {
    use crate::submodular::SetFunction;
    Ok(AggregateFunction::new(inst)?.evaluate(set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, r};

    fn example(rows: &[&[i64]], eps: i64) -> MixingInstance {
        MixingInstance::from_integers(rows, eps).unwrap()
    }

    fn ex1() -> MixingInstance {
        example(&[&[8, 3], &[6, 4], &[13, 2], &[1, 2], &[4, 1]], 7)
    }

    #[test]
    fn example_diagnoses() {
        let d = diagnose(&ex1()).unwrap();
        assert_eq!(d.i_bar, vec![3, 4]);
        assert!(d.negligible && d.g_submodular && d.sufficient);
        assert_eq!(d.l_w, Extended::Finite(r(8)));
        assert_eq!(d.l_w_rows, vec![1, 2]);

        let d2 = diagnose(&ex1().with_epsilon(r(9)).unwrap()).unwrap();
        assert_eq!(d2.i_bar, vec![3, 4]);
        assert_eq!(d2.l_w, Extended::Finite(r(8)));
        assert!(d2.negligible && !d2.sufficient);
        assert_eq!(d2.failure_reasons(), vec!["eps > L_W(eps)"]);

        let d3 = diagnose(&example(&[&[8, 3], &[6, 4], &[13, 2], &[1, 3], &[4, 1]], 7)).unwrap();
        assert!(!d3.c1_holds && d3.c2_holds);
        assert_eq!(d3.c1_violation, Some((2, 3)));
        assert_eq!(d3.failure_reasons(), vec!["C1 violated"]);

        let d4 = diagnose(&example(&[&[8, 3], &[6, 4], &[13, 2], &[1, 2], &[6, 1]], 7)).unwrap();
        assert!(d4.c1_holds && !d4.c2_holds);
        assert_eq!(d4.failure_reasons(), vec!["C2 violated"]);
        for inst in [ex1(), ex1().with_epsilon(r(9)).unwrap()] {
            diagnose_cross_checked(&inst).unwrap();
        }
    }

    #[test]
    fn all_rows_negligible() {
        let d = diagnose(&example(&[&[1, 1], &[2, 0]], 5)).unwrap();
        assert_eq!(d.l_w, Extended::Infinite);
        assert!(d.sufficient);
    }

    #[test]
    fn v_representation_of_example1() {
        let vrep = v_representation(&ex1()).unwrap();
        let above = vrep.points.iter().filter(|p| p.kind == VertexKind::Above).count();
        assert_eq!(vrep.points.len(), above + 2 * (32 - above));
        let target = vec![false, true, true, false, false];
        let p = vrep.points.iter().find(|p| p.z == target).unwrap();
        assert_eq!(p.y, vec![r(13), r(4)]);
        let zero: Vec<&HullPoint> = vrep.points.iter().filter(|p| p.z.iter().all(|b| !b)).collect();
        assert_eq!(zero.iter().map(|p| p.y.clone()).collect::<Vec<_>>(), vec![vec![r(7), r(0)], vec![r(0), r(7)]]);
        for p in &vrep.points {
            let s: Rational = p.y.iter().sum();
            match p.kind {
                VertexKind::Above => assert!(s > r(7)),
                _ => assert_eq!(s, r(7)),
            }
        }
    }

    #[test]
    fn membership_certificates() {
        let inst = ex1();
        let vrep = v_representation(&inst).unwrap().complemented();
        let pts = vrep.original_points();
        match membership(&vrep, &pts[5]).unwrap() {
            Membership::Inside { lambda, .. } => assert_eq!(lambda.iter().filter(|l| !l.is_zero()).count(), 1),
            other => panic!("{other:?}"),
        }
        let half = q(1, 2);
        let mid = Point::new(
            pts[3].y.iter().zip(&pts[30].y).map(|(a, b)| (a + b) * &half).collect(),
            pts[3].z.iter().zip(&pts[30].z).map(|(a, b)| (a + b) * &half).collect(),
        );
        assert!(membership(&vrep, &mid).unwrap().is_inside());
        let inst2 = inst.with_epsilon(r(9)).unwrap();
        let witness = Point::new(vec![q(13, 2), r(6)], vec![r(1), half.clone(), half.clone(), r(1), r(1)]);
        match membership_original(&inst2, &witness).unwrap() {
            Membership::Outside { separator } => assert!(separator.violation(&witness).is_positive()),
            other => panic!("{other:?}"),
        }
        assert!(matches!(membership(&vrep, &Point::new(vec![r(1)], vec![])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn enforced_coordinates_membership() {
        let vrep = v_representation(&ex1()).unwrap();
        let p = Point::new(vec![r(1), r(1)], vec![r(1), r(0), r(0), r(0), r(0)]);
        match membership(&vrep, &p).unwrap() {
            Membership::Outside { separator } => {
                assert!(separator.violation(&p).is_positive());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn example1_facets_are_generated() {
        let inst = ex1();
        let d = diagnose(&inst).unwrap();
        let agg = aggregated_star_cuts(&inst, &d).unwrap();
        let lines: Vec<String> = agg.iter().map(LinearCut::to_line).collect();
        for expect in [
            "1 1 | 1 1 8 0 0 | >= 17 | AMix*",
            "1 1 | 0 2 8 0 0 | >= 17 | AMix*",
            "1 1 | 0 3 7 0 0 | >= 17 | AMix*",
            "1 1 | 2 3 5 0 0 | >= 17 | AMix*",
            "1 1 | 4 1 5 0 0 | >= 17 | AMix*",
        ] {
            assert!(lines.iter().any(|l| l == expect), "missing {expect} in {lines:?}");
        }
    }

    #[test]
    fn sufficiency_on_example1() {
        let opts = SufficiencyOptions { samples: 40, vertex_samples: 4, midpoints: 4, ..Default::default() };
        let report = check_sufficiency(&ex1(), &opts).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(matches!(report.result, SufficiencyBranch::ConditionHolds(_)));
    }
}
