//! Points that satisfy every mixing and aggregated mixing inequality but lie
//! outside the hull, one construction for each way the sufficiency condition
//! can fail.

use serde::Serialize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aggregated::{aggregated_cut_unchecked, separate_aggregated_with, AggregatedOptions, Regime};
use crate::cut::{dedup_canonical, LinearCut, Point};
use crate::error::{Error, Result};
use crate::hull::{self, Extended, HullDiagnosis, Membership};
use crate::instance::MixingInstance;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::mixing::{all_mixing_cuts, separate_mixing};
use crate::rational::Rational;
use crate::sequence::for_each_sequence;
use crate::vertices::enumerate_vertices;

/// Which condition the witness refutes. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum WitnessCase {
    /// The rows of `i_bar` jointly exceed epsilon; `subset` is a minimal such set.
    NegligibleSumExceeded { subset: Vec<usize> },
    /// Row `q` of `i_bar` beats row `p` outside it in some column.
    NegligibleNotDominated { p: usize, q: usize },
    /// Rows `p`, `q` outside `i_bar` with `sum_j min(w_pj, w_qj) < epsilon`.
    PairBelowEpsilon { p: usize, q: usize },
}

impl WitnessCase {
    /// The rows whose `z` is fractional in the witness.
    pub fn support(&self) -> Vec<usize> {
        match self {
            WitnessCase::NegligibleSumExceeded { subset } => subset.clone(),
            WitnessCase::NegligibleNotDominated { p, q } | WitnessCase::PairBelowEpsilon { p, q } => {
                let mut v = vec![*p, *q];
                v.sort_unstable();
                v
            }
        }
    }
}

fn column_max_over(inst: &MixingInstance, rows: &[usize], j: usize) -> Rational {
    rows.iter().map(|&i| inst.w(i, j).clone()).max().unwrap_or_else(Rational::zero)
}

fn max_sum(inst: &MixingInstance, rows: &[usize]) -> Rational {
    (0..inst.k()).map(|j| column_max_over(inst, rows, j)).sum()
}

/// An inclusion-minimal `U` inside `i_bar` with `sum_j max_{i in U} w_ij > epsilon`,
/// found by deleting elements while the inequality survives.
pub fn find_minimal_u(inst: &MixingInstance) -> Result<Vec<usize>> {
    let diagnosis = hull::diagnose(inst)?;
    if diagnosis.c2_holds {
        return Err(Error::Precondition("the rows of i_bar do not exceed epsilon".into()));
    }
    let eps = inst.epsilon();
    let mut u = diagnosis.i_bar.clone();
    loop {
        let removable = (0..u.len()).find(|&pos| {
            let mut rest = u.clone();
            rest.remove(pos);
            max_sum(inst, &rest) > *eps
        });
        match removable {
            Some(pos) => {
                u.remove(pos);
            }
            None => break,
        }
    }
    for pos in 0..u.len() {
        let mut rest = u.clone();
        rest.remove(pos);
        if max_sum(inst, &rest) > *eps {
            return Err(Error::Internal("deletion left a non-minimal subset".into()));
        }
    }
    Ok(u)
}

fn blank_z(n: usize) -> Vec<Rational> {
    vec![Rational::one(); n]
}

/// Witness for a minimal `U` of `i_bar` whose column maxima exceed epsilon.
pub fn witness_c2(inst: &MixingInstance, u: &[usize]) -> Result<Point> {
    inst.require_zero_lower()?;
    let eps = inst.epsilon();
    if u.len() < 2 {
        return Err(Error::Precondition("the subset must have at least two rows".into()));
    }
    if u.iter().any(|&i| i >= inst.n() || inst.row_sum(i) > *eps) {
        return Err(Error::Precondition("the subset must lie inside i_bar".into()));
    }
    if max_sum(inst, u) <= *eps {
        return Err(Error::Precondition("the subset's column maxima do not exceed epsilon".into()));
    }
    let size = Rational::from(u.len());
    let share = (&size - Rational::one()) / &size;
    let mut z = blank_z(inst.n());
    for &i in u {
        z[i] = size.recip();
    }
    let k = inst.k();
    let mut y: Vec<Rational> = (0..k).map(|j| &share * column_max_over(inst, u, j)).collect();
    let sum: Rational = y.iter().sum();
    y[k - 1] += eps - sum;
    Ok(Point::new(y, z))
}

fn check_pair(inst: &MixingInstance, p: usize, q: usize) -> Result<()> {
    if p >= inst.n() || q >= inst.n() || p == q {
        return Err(Error::Precondition("p and q must be distinct rows".into()));
    }
    Ok(())
}

/// Witness for a row `q` of `i_bar` that beats row `p` outside `i_bar` in some column.
pub fn witness_c1(inst: &MixingInstance, p: usize, q: usize) -> Result<Point> {
    inst.require_zero_lower()?;
    check_pair(inst, p, q)?;
    let eps = inst.epsilon();
    if inst.row_sum(p) <= *eps || inst.row_sum(q) > *eps {
        return Err(Error::Precondition("p must lie outside i_bar and q inside".into()));
    }
    if !(0..inst.k()).any(|j| inst.w(q, j) > inst.w(p, j)) {
        return Err(Error::Precondition("q does not beat p in any column".into()));
    }
    let half = Rational::new(1, 2);
    let pair = [p, q];
    let mut z = blank_z(inst.n());
    z[p] = half.clone();
    z[q] = half.clone();
    let k = inst.k();
    let mut y: Vec<Rational> = (0..k).map(|j| &half * column_max_over(inst, &pair, j)).collect();
    y[k - 1] += &half * (eps + inst.row_sum(p) - max_sum(inst, &pair));
    Ok(Point::new(y, z))
}

/// Witness for two rows outside `i_bar` whose columnwise minima sum below epsilon.
pub fn witness_lw(inst: &MixingInstance, p: usize, q: usize) -> Result<Point> {
    inst.require_zero_lower()?;
    check_pair(inst, p, q)?;
    let eps = inst.epsilon();
    if inst.row_sum(p) <= *eps || inst.row_sum(q) <= *eps {
        return Err(Error::Precondition("p and q must lie outside i_bar".into()));
    }
    let pair_min: Rational = (0..inst.k()).map(|j| inst.w(p, j).clone().min(inst.w(q, j).clone())).sum();
    if pair_min >= *eps {
        return Err(Error::Precondition("the pair's columnwise minima do not fall below epsilon".into()));
    }
    let half = Rational::new(1, 2);
    let pair = [p, q];
    let mut z = blank_z(inst.n());
    z[p] = half.clone();
    z[q] = half.clone();
    let k = inst.k();
    let mut y: Vec<Rational> = (0..k).map(|j| &half * column_max_over(inst, &pair, j)).collect();
    y[k - 1] += &half * pair_min;
    Ok(Point::new(y, z))
}

/// Picks the case the way the proof does: the sum condition first, then
/// domination, then the pair bound.
pub fn choose_case(inst: &MixingInstance, diagnosis: &HullDiagnosis) -> Result<WitnessCase> {
    if !diagnosis.c2_holds {
        return Ok(WitnessCase::NegligibleSumExceeded { subset: find_minimal_u(inst)? });
    }
    if let Some((p, q)) = diagnosis.c1_violation {
        return Ok(WitnessCase::NegligibleNotDominated { p, q });
    }
    match (&diagnosis.l_w, diagnosis.l_w_rows.as_slice()) {
        (Extended::Finite(v), &[p, q]) if v < inst.epsilon() => Ok(WitnessCase::PairBelowEpsilon { p, q }),
        _ => Err(Error::Precondition("the sufficiency condition holds; no witness exists".into())),
    }
}

pub fn build_witness(inst: &MixingInstance, case: &WitnessCase) -> Result<Point> {
    match case {
        WitnessCase::NegligibleSumExceeded { subset } => witness_c2(inst, subset),
        WitnessCase::NegligibleNotDominated { p, q } => witness_c1(inst, *p, *q),
        WitnessCase::PairBelowEpsilon { p, q } => witness_lw(inst, *p, *q),
    }
}

/// Largest `n` for which every sequence is enumerated when checking a witness;
/// beyond it only sequences inside the fractional support are checked.
pub const EXHAUSTIVE_SEQUENCE_LIMIT: usize = 7;

/// Objectives tried by [`search_witness`] before giving up.
pub const WITNESS_SEARCH_OBJECTIVES: usize = 60;

/// Largest `n` for which [`enumerate_witness`] lists every vertex.
pub const VERTEX_ENUMERATION_LIMIT: usize = 6;

const WITNESS_SEARCH_SEED: u64 = 0xC0FFEE;

/// Where the certified point came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum WitnessSource {
    /// The closed-form point of `case`.
    Construction,
    /// An extreme point of the full cut system, found after every closed-form
    /// point landed inside the hull.
    VertexSearch { objectives_tried: usize },
    /// A vertex of the full cut system outside the hull, found by enumerating
    /// all of its vertices after the objective search failed.
    VertexEnumeration { vertices: usize },
}

/// The bound used by the two-point argument for a closed-form point: no
/// combination of the two binary points sharing its tight bounds reaches
/// `y_sum`. It does not by itself exclude other combinations.
#[derive(Clone, Debug, Serialize)]
pub struct Obstruction {
    pub y_sum: Rational,
    pub required_sum: Rational,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    /// The refuted condition; for a searched point, the case the
    /// construction was attempted for.
    pub case: WitnessCase,
    pub source: WitnessSource,
    pub point: Point,
    /// `0 <= z <= 1`, `y_j >= w_ij (1 - z_i)`, `y >= 0`, `sum y >= epsilon`.
    pub relaxation_holds: bool,
    pub mixing_cuts_checked: usize,
    pub mixing_cuts_hold: bool,
    pub aggregated_cuts_checked: usize,
    pub aggregated_cuts_hold: bool,
    /// Every sequence was enumerated (otherwise only those inside the support).
    pub aggregated_exhaustive: bool,
    pub outside_hull: bool,
    pub separator: Option<LinearCut>,
    /// Present for closed-form points only.
    pub obstruction: Option<Obstruction>,
    /// Cases whose closed-form point was tried first and not certified.
    pub failed_constructions: Vec<WitnessCase>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.relaxation_holds
            && self.mixing_cuts_hold
            && self.aggregated_cuts_hold
            && self.outside_hull
            && self.obstruction.as_ref().is_none_or(|o| o.holds)
    }
}

fn relaxation_holds(inst: &MixingInstance, point: &Point) -> bool {
    let one = Rational::one();
    if point.z.iter().any(|z| z.is_negative() || *z > one) || point.y.iter().any(Rational::is_negative) {
        return false;
    }
    if point.y_sum() < *inst.epsilon() {
        return false;
    }
    (0..inst.n()).all(|i| {
        let slack = &one - &point.z[i];
        (0..inst.k()).all(|j| point.y[j] >= inst.w(i, j) * &slack)
    })
}

/// Every choice the constructions admit: minimal subsets `U` when the sum
/// condition fails, dominating pairs when domination fails, and pairs below
/// epsilon when `i_bar` is negligible. The proof's own choice comes first.
pub fn candidate_cases(inst: &MixingInstance, diagnosis: &HullDiagnosis) -> Result<Vec<WitnessCase>> {
    let mut cases = vec![choose_case(inst, diagnosis)?];
    let eps = inst.epsilon();
    let i_bar = &diagnosis.i_bar;
    let outside: Vec<usize> = (0..inst.n()).filter(|i| i_bar.binary_search(i).is_err()).collect();
    let mut more = Vec::new();
    if !diagnosis.c2_holds && i_bar.len() < 64 {
        for mask in 1u64..1 << i_bar.len() {
            let u: Vec<usize> = (0..i_bar.len()).filter(|b| mask >> b & 1 == 1).map(|b| i_bar[b]).collect();
            let minimal = (0..u.len()).all(|pos| {
                let mut rest = u.clone();
                rest.remove(pos);
                max_sum(inst, &rest) <= *eps
            });
            if max_sum(inst, &u) > *eps && minimal {
                more.push(WitnessCase::NegligibleSumExceeded { subset: u });
            }
        }
    }
    if !diagnosis.c1_holds {
        for &p in &outside {
            for &q in i_bar {
                if (0..inst.k()).any(|j| inst.w(q, j) > inst.w(p, j)) {
                    more.push(WitnessCase::NegligibleNotDominated { p, q });
                }
            }
        }
    }
    if diagnosis.negligible {
        for (a, &p) in outside.iter().enumerate() {
            for &q in &outside[a + 1..] {
                let pair_min: Rational = (0..inst.k()).map(|j| inst.w(p, j).clone().min(inst.w(q, j).clone())).sum();
                if pair_min < *eps {
                    more.push(WitnessCase::PairBelowEpsilon { p, q });
                }
            }
        }
    }
    for case in more {
        if !cases.contains(&case) {
            cases.push(case);
        }
    }
    Ok(cases)
}

/// Builds and certifies a witness for a failing instance. The closed-form
/// points are tried in the order of [`candidate_cases`]; when none is
/// certified (this happens when a zero weight sits in the support), an
/// extreme point of the full cut system outside the hull is searched for.
pub fn certify_witness(inst: &MixingInstance) -> Result<WitnessReport> {
    let diagnosis = hull::diagnose(inst)?;
    let cases = candidate_cases(inst, &diagnosis)?;
    let mut failed = Vec::new();
    let mut first = None;
    for case in cases {
        let mut report = certify_case(inst, case.clone())?;
        if report.passed() {
            report.failed_constructions = failed;
            return Ok(report);
        }
        failed.push(case);
        first.get_or_insert(report);
    }
    let mut first = first.expect("at least one case");
    if let Some((point, tried)) = search_witness(inst)? {
        let mut report = check_point(inst, first.case.clone(), point, &(0..inst.n()).collect::<Vec<_>>())?;
        report.source = WitnessSource::VertexSearch { objectives_tried: tried };
        report.failed_constructions = failed;
        return Ok(report);
    }
    if let Some((point, vertices)) = enumerate_witness(inst)? {
        let mut report = check_point(inst, first.case.clone(), point, &(0..inst.n()).collect::<Vec<_>>())?;
        report.source = WitnessSource::VertexEnumeration { vertices };
        report.failed_constructions = failed;
        return Ok(report);
    }
    first.failed_constructions = failed;
    Ok(first)
}

/// Certifies the closed-form point of one case.
pub fn certify_case(inst: &MixingInstance, case: WitnessCase) -> Result<WitnessReport> {
    let point = build_witness(inst, &case)?;
    let support = case.support();
    let mut report = check_point(inst, case, point, &support)?;
    let size = Rational::from(support.len());
    let required_sum = inst.epsilon() / &size + (&size - Rational::one()) / &size * max_sum(inst, &support);
    let y_sum = report.point.y_sum();
    let holds = y_sum < required_sum;
    report.obstruction = Some(Obstruction { y_sum, required_sum, holds });
    Ok(report)
}

/// Runs the relaxation, cut and membership checks on `point`. Beyond the
/// exhaustive limit, aggregated inequalities are checked over `support` only.
fn check_point(inst: &MixingInstance, case: WitnessCase, point: Point, support: &[usize]) -> Result<WitnessReport> {
    let relaxation = relaxation_holds(inst, &point);
    let exhaustive = inst.n() <= EXHAUSTIVE_SEQUENCE_LIMIT;

    let (mixing_checked, mixing_hold) = if exhaustive {
        let cuts = all_mixing_cuts(inst);
        (cuts.len(), cuts.iter().all(|c| c.is_satisfied_by(&point)))
    } else {
        (inst.k(), separate_mixing(inst, &point)?.is_empty())
    };

    let ground: Vec<usize> = if exhaustive { (0..inst.n()).collect() } else { support.to_vec() };
    let mut aggregated_checked = 0usize;
    let mut aggregated_hold = true;
    for_each_sequence(&ground, ground.len(), |theta| {
        aggregated_checked += 1;
        if aggregated_hold && !aggregated_cut_unchecked(inst, theta).is_satisfied_by(&point) {
            aggregated_hold = false;
        }
    });

    let (outside, separator) = match hull::membership_original(inst, &point)? {
        Membership::Inside { .. } => (false, None),
        Membership::Outside { separator } => (true, Some(separator)),
    };

    Ok(WitnessReport {
        case,
        source: WitnessSource::Construction,
        point,
        relaxation_holds: relaxation,
        mixing_cuts_checked: mixing_checked,
        mixing_cuts_hold: mixing_hold,
        aggregated_cuts_checked: aggregated_checked,
        aggregated_cuts_hold: aggregated_hold,
        aggregated_exhaustive: exhaustive,
        outside_hull: outside,
        separator,
        obstruction: None,
        failed_constructions: Vec::new(),
    })
}

/// Minimizes seeded random objectives over the system of all mixing and
/// aggregated inequalities, linking and `z <= 1`, adding aggregated
/// inequalities lazily, and returns the first optimal vertex outside the hull
/// with the number of objectives tried. `None` beyond the exhaustive limit or
/// when every vertex found lies inside.
pub fn search_witness(inst: &MixingInstance) -> Result<Option<(Point, usize)>> {
    inst.require_zero_lower()?;
    let (k, n) = (inst.k(), inst.n());
    if n > EXHAUSTIVE_SEQUENCE_LIMIT {
        return Ok(None);
    }
    let vrep = hull::v_representation(inst)?.complemented();
    let mut base = LinearProgram::new(k + n);
    let add = |lp: &mut LinearProgram, cut: &LinearCut| {
        lp.add_row(cut.y_coeffs.iter().chain(&cut.z_coeffs).cloned().collect(), Relation::Ge, cut.rhs.clone());
    };
    let normal = |cut: &LinearCut| -> Vec<Rational> { cut.y_coeffs.iter().chain(&cut.z_coeffs).cloned().collect() };
    let unit = |i: usize| -> Vec<Rational> {
        (0..k + n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()
    };
    // Constraint normals of the full cut system; a vertex minimizes any
    // positive combination of the normals tight at it.
    let mut normals: Vec<Vec<Rational>> = (0..k + n).map(unit).collect();
    for cut in dedup_canonical(all_mixing_cuts(inst))? {
        add(&mut base, &cut);
        normals.push(normal(&cut));
    }
    let linking = hull::linking_cut(inst);
    add(&mut base, &linking);
    normals.push(normal(&linking));
    for i in 0..n {
        base.add_row(unit(k + i), Relation::Le, Rational::one());
        normals.push(unit(k + i).into_iter().map(|v| -v).collect());
    }
    let ground: Vec<usize> = (0..n).collect();
    let mut sequences = Vec::new();
    for_each_sequence(&ground, n, |s| sequences.push(s.to_vec()));
    for theta in sequences {
        normals.push(normal(&aggregated_cut_unchecked(inst, &theta)));
    }
    let options = AggregatedOptions { regime: Some(Regime::Exhaustive), max_len: None, unrestricted: true };
    // Vertices with fractional z can need z costs many times the y costs,
    // so those are drawn on the scale of the largest row sum.
    let largest = (0..n).map(|i| inst.row_sum(i).to_f64()).fold(1.0, f64::max);
    let scale = 2 * largest.ceil().min(1e6) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEARCH_SEED);
    for tried in 1..=WITNESS_SEARCH_OBJECTIVES {
        let objective: Vec<Rational> = if tried % 2 == 0 {
            let mut objective = vec![Rational::zero(); k + n];
            for _ in 0..k + n {
                let row = &normals[rng.gen_range(0..normals.len())];
                let weight = Rational::from_integer(rng.gen_range(1..=3));
                for (o, a) in objective.iter_mut().zip(row) {
                    *o += &weight * a;
                }
            }
            objective
        } else {
            let mut objective: Vec<Rational> = (0..k).map(|_| Rational::from_integer(rng.gen_range(1..=3))).collect();
            objective.extend((0..n).map(|_| Rational::from_integer(rng.gen_range(-scale..=scale))));
            objective
        };
        let mut lp = base.clone();
        lp.objective = objective;
        let point = loop {
            let x = match lp.solve() {
                LpOutcome::Optimal { x, .. } => x,
                other => return Err(Error::Internal(format!("cut system LP ended with {other:?}"))),
            };
            let point = Point::new(x[..k].to_vec(), x[k..].to_vec());
            match separate_aggregated_with(inst, &point, options)?.cut {
                Some(cut) => add(&mut lp, &cut),
                None => break point,
            }
        };
        if let Membership::Outside { .. } = hull::membership(&vrep, &point)? {
            return Ok(Some((point, tried)));
        }
    }
    Ok(None)
}

/// Enumerates every vertex of the system of all mixing and aggregated
/// inequalities, linking and `z <= 1`, and returns one outside the hull with
/// the number of vertices. Vertices with more fractional `z` entries are
/// tested first. `None` beyond [`VERTEX_ENUMERATION_LIMIT`] or when the system
/// describes the hull.
pub fn enumerate_witness(inst: &MixingInstance) -> Result<Option<(Point, usize)>> {
    inst.require_zero_lower()?;
    let (k, n) = (inst.k(), inst.n());
    if n > VERTEX_ENUMERATION_LIMIT {
        return Ok(None);
    }
    let mut rows: Vec<(Vec<Rational>, Rational)> = (0..n)
        .map(|i| {
            let a = (0..k + n).map(|j| if j == k + i { -Rational::one() } else { Rational::zero() }).collect();
            (a, -Rational::one())
        })
        .collect();
    let ground: Vec<usize> = (0..n).collect();
    let mut cuts = vec![hull::linking_cut(inst)];
    cuts.extend(all_mixing_cuts(inst));
    for_each_sequence(&ground, n, |theta| cuts.push(aggregated_cut_unchecked(inst, theta)));
    for cut in dedup_canonical(cuts)? {
        rows.push((cut.y_coeffs.iter().chain(&cut.z_coeffs).cloned().collect(), cut.rhs));
    }
    let mut vertices = enumerate_vertices(k + n, &rows);
    let count = vertices.len();
    vertices.sort_by_key(|v| std::cmp::Reverse(v[k..].iter().filter(|x| !x.is_integer()).count()));
    let vrep = hull::v_representation(inst)?.complemented();
    for v in vertices {
        let point = Point::new(v[..k].to_vec(), v[k..].to_vec());
        if let Membership::Outside { .. } = hull::membership(&vrep, &point)? {
            return Ok(Some((point, count)));
        }
    }
    Ok(None)
}
