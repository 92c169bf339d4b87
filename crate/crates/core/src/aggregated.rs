//! Aggregated mixing inequalities: one sequence of scenarios shared by all
//! columns, with a correction on its last element.

use serde::Serialize;

use crate::cut::{CutKind, LinearCut, Point};
use crate::error::{Error, Result};
use crate::hull;
use crate::instance::MixingInstance;
use crate::rational::Rational;
use crate::sequence::{for_each_sequence, SequenceTheta};
use crate::submodular::{greedy_vertex, SetFunction, Subset};

/// `g(S) = max(epsilon, sum_j max_{i in S} w_ij)` for an instance with zero
/// lower bounds: the smallest value of `y_1 + ... + y_k` once the scenarios
/// in `S` are enforced.
#[derive(Clone, Debug)]
pub struct AggregateFunction {
    rows: Vec<Vec<Rational>>,
    k: usize,
    epsilon: Rational,
}

impl AggregateFunction {
    pub fn new(inst: &MixingInstance) -> Result<Self> {
        inst.require_zero_lower()?;
        Ok(AggregateFunction { rows: inst.weights().to_vec(), k: inst.k(), epsilon: inst.epsilon().clone() })
    }

    /// `sum_j max_{i in S} w_ij` without the `epsilon` floor.
    pub fn column_max_sum(&self, set: &Subset) -> Rational {
        let mut maxima = vec![Rational::zero(); self.k];
        for i in set.iter() {
            for (m, w) in maxima.iter_mut().zip(&self.rows[i]) {
                if w > m {
                    *m = w.clone();
                }
            }
        }
        maxima.into_iter().sum()
    }
}

impl SetFunction for AggregateFunction {
    fn ground_size(&self) -> usize {
        self.rows.len()
    }

    fn evaluate(&self, set: &Subset) -> Rational {
        self.column_max_sum(set).max(self.epsilon.clone())
    }

    fn prefix_values(&self, order: &[usize]) -> Vec<Rational> {
        let mut maxima = vec![Rational::zero(); self.k];
        let mut total = Rational::zero();
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(total.clone().max(self.epsilon.clone()));
        for &i in order {
            for (m, w) in maxima.iter_mut().zip(&self.rows[i]) {
                if w > m {
                    total += w - &*m;
                    *m = w.clone();
                }
            }
            out.push(total.clone().max(self.epsilon.clone()));
        }
        out
    }
}

/// For each column, the members of `theta` whose weight is at least every
/// weight after them in `theta`, in sequence order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsequenceDecomposition {
    pub theta: SequenceTheta,
    pub per_column: Vec<Vec<usize>>,
}

fn column_records(inst: &MixingInstance, theta: &[usize], j: usize) -> Vec<usize> {
    let mut suffix_max = Rational::zero();
    let mut members = Vec::new();
    for &i in theta.iter().rev() {
        if *inst.w(i, j) >= suffix_max {
            members.push(i);
            suffix_max = inst.w(i, j).clone();
        }
    }
    members.reverse();
    members
}

pub fn decompose(inst: &MixingInstance, theta: &SequenceTheta) -> SubsequenceDecomposition {
    SubsequenceDecomposition {
        theta: theta.clone(),
        per_column: (0..inst.k()).map(|j| column_records(inst, theta.indices(), j)).collect(),
    }
}

fn l_theta_raw(inst: &MixingInstance, theta: &[usize]) -> Rational {
    let k = inst.k();
    let (&last, rest) = theta.split_last().expect("sequences are nonempty");
    let mut suffix: Vec<Rational> = inst.row(last).to_vec();
    let mut best: Rational = suffix.iter().sum();
    for &i in rest.iter().rev() {
        let term: Rational = (0..k).map(|j| inst.w(i, j).clone().min(suffix[j].clone())).sum();
        best = best.min(term);
        for (j, s) in suffix.iter_mut().enumerate() {
            if inst.w(i, j) > s {
                *s = inst.w(i, j).clone();
            }
        }
    }
    best
}

/// `min_t sum_j min(w_{i_t j}, max of w_ij over the elements after i_t)`; the
/// last element contributes its whole row sum.
pub fn l_theta(inst: &MixingInstance, theta: &SequenceTheta) -> Rational {
    l_theta_raw(inst, theta.indices())
}

/// Coefficients of the aggregated inequality for `theta` (original `z`
/// coordinates): `(z_coeffs, rhs, min(epsilon, L), all heads are column maxima)`.
fn aggregated_parts(inst: &MixingInstance, theta: &[usize]) -> (Vec<Rational>, Rational, Rational, bool) {
    let mut z = vec![Rational::zero(); inst.n()];
    let mut rhs = Rational::zero();
    let mut heads_are_max = true;
    for j in 0..inst.k() {
        let mut suffix_max = Rational::zero();
        for &i in theta.iter().rev() {
            let w = inst.w(i, j);
            if *w >= suffix_max {
                z[i] += w - &suffix_max;
                suffix_max = w.clone();
            }
        }
        if suffix_max != inst.column_max(j) {
            heads_are_max = false;
        }
        rhs += suffix_max;
    }
    let correction = inst.epsilon().clone().min(l_theta_raw(inst, theta));
    let last = *theta.last().expect("nonempty");
    z[last] -= &correction;
    (z, rhs, correction, heads_are_max)
}

/// `sum_j (y_j + sum_s (w_{j_s j} - w_{j_{s+1} j}) z_{j_s}) - min(epsilon, L) z_last >= sum_j max_{i in theta} w_ij`.
pub fn aggregated_cut(inst: &MixingInstance, theta: &SequenceTheta) -> Result<LinearCut> {
    inst.require_zero_lower()?;
    Ok(aggregated_cut_unchecked(inst, theta.indices()))
}

pub(crate) fn aggregated_cut_unchecked(inst: &MixingInstance, theta: &[usize]) -> LinearCut {
    let (z, rhs, correction, heads_are_max) = aggregated_parts(inst, theta);
    let kind = if heads_are_max && correction == *inst.epsilon() { CutKind::AMixStar } else { CutKind::AMix };
    LinearCut::new(vec![Rational::one(); inst.k()], z, rhs, kind)
}

/// The inequality obtained by adding the column mixing inequalities of the
/// per-column subsequences, before the correction on the last element.
pub fn summed_mixing_cut(inst: &MixingInstance, theta: &SequenceTheta) -> Result<LinearCut> {
    inst.require_zero_lower()?;
    let decomposition = decompose(inst, theta);
    let mut z = vec![Rational::zero(); inst.n()];
    let mut rhs = Rational::zero();
    for (j, members) in decomposition.per_column.iter().enumerate() {
        let seq = crate::mixing::MixingSequence::new(inst, j, members.clone())?;
        let cut = crate::mixing::mixing_cut(inst, &seq);
        for (acc, b) in z.iter_mut().zip(&cut.z_coeffs) {
            *acc += b;
        }
        rhs += cut.rhs;
    }
    Ok(LinearCut::new(vec![Rational::one(); inst.k()], z, rhs, CutKind::AMix))
}

/// `true` when `epsilon <= L_theta`, i.e. the aggregated inequality of `theta`
/// implies the linking constraint over the unit box.
pub fn dominates_linking(inst: &MixingInstance, theta: &SequenceTheta) -> Result<bool> {
    inst.require_zero_lower()?;
    Ok(*inst.epsilon() <= l_theta(inst, theta))
}

/// Checks a cut against every extreme point and ray of the hull.
pub fn check_validity(inst: &MixingInstance, cut: &LinearCut) -> Result<bool> {
    let vrep = hull::v_representation(inst)?;
    Ok(vrep.is_valid(cut))
}

/// Which method [`separate_aggregated_with`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Greedy on the aggregate function; exact when it is submodular.
    Polymatroid,
    /// Enumeration of sequences.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AggregatedOptions {
    /// Forces a regime; by default the greedy is used when it is exact.
    pub regime: Option<Regime>,
    /// Longest sequence enumerated in the exhaustive regime.
    pub max_len: Option<usize>,
    /// Enumerate over all scenarios rather than only those with `z_i < 1`.
    pub unrestricted: bool,
}

#[derive(Clone, Debug)]
pub struct AggregatedSeparation {
    pub cut: Option<LinearCut>,
    pub regime: Regime,
    pub sequence: Option<SequenceTheta>,
    pub sequences_examined: u64,
}

/// The most violated aggregated mixing inequality at `point`, if any.
pub fn separate_aggregated(inst: &MixingInstance, point: &Point) -> Result<Option<LinearCut>> {
    Ok(separate_aggregated_with(inst, point, AggregatedOptions::default())?.cut)
}

fn satisfies_relaxation(inst: &MixingInstance, point: &Point) -> bool {
    if point.y.iter().any(Rational::is_negative) {
        return false;
    }
    (0..inst.n()).all(|i| {
        let slack = Rational::one() - &point.z[i];
        (0..inst.k()).all(|j| point.y[j] >= inst.w(i, j) * &slack)
    })
}

pub fn separate_aggregated_with(
    inst: &MixingInstance,
    point: &Point,
    options: AggregatedOptions,
) -> Result<AggregatedSeparation> {
    inst.require_zero_lower()?;
    point.check_dimensions(inst.k(), inst.n())?;
    point.check_unit_box()?;
    let sum = point.y_sum();
    if sum < *inst.epsilon() {
        return Err(Error::EpsilonViolated { sum: Box::new(sum), epsilon: Box::new(inst.epsilon().clone()) });
    }
    let regime = match options.regime {
        Some(r) => r,
        None if hull::diagnose(inst)?.g_submodular => Regime::Polymatroid,
        None => Regime::Exhaustive,
    };
    match regime {
        Regime::Polymatroid => separate_by_greedy(inst, point, &sum),
        Regime::Exhaustive => Ok(separate_by_enumeration(inst, point, options)),
    }
}

fn separate_by_greedy(inst: &MixingInstance, point: &Point, sum: &Rational) -> Result<AggregatedSeparation> {
    let g = AggregateFunction::new(inst)?;
    let u: Vec<Rational> = point.z.iter().map(|z| Rational::one() - z).collect();
    let vertex = greedy_vertex(&g, &u)?;
    let bound = vertex.dot(&u) + &vertex.base;
    let mut result =
        AggregatedSeparation { cut: None, regime: Regime::Polymatroid, sequence: None, sequences_examined: 0 };
    if *sum >= bound {
        return Ok(result);
    }
    let mut theta: Vec<usize> = vertex.permutation.iter().copied().filter(|&i| vertex.pi[i].is_positive()).collect();
    theta.reverse();
    let total: Rational = vertex.pi.iter().sum();
    let rhs = total + &vertex.base;
    if theta.is_empty() {
        result.cut = Some(hull::linking_cut(inst));
        return Ok(result);
    }
    let cut = aggregated_cut_unchecked(inst, &theta);
    if cut.z_coeffs != vertex.pi || cut.rhs != rhs {
        return Err(Error::Internal(format!(
            "greedy vertex for sequence {:?} does not match its aggregated inequality",
            theta
        )));
    }
    result.sequence = Some(SequenceTheta::new(theta, inst.n())?);
    result.cut = Some(cut);
    Ok(result)
}

fn separate_by_enumeration(inst: &MixingInstance, point: &Point, options: AggregatedOptions) -> AggregatedSeparation {
    let one = Rational::one();
    let ground: Vec<usize> = if options.unrestricted || !satisfies_relaxation(inst, point) {
        (0..inst.n()).collect()
    } else {
        (0..inst.n()).filter(|&i| point.z[i] < one).collect()
    };
    let max_len = options.max_len.unwrap_or(ground.len());
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut examined = 0u64;
    let y_sum = point.y_sum();
    for_each_sequence(&ground, max_len, |theta| {
        examined += 1;
        let (z, rhs, _, _) = aggregated_parts(inst, theta);
        let lhs: Rational =
            z.iter().zip(&point.z).filter(|(b, _)| !b.is_zero()).map(|(b, x)| b * x).sum::<Rational>() + &y_sum;
        let violation = rhs - lhs;
        if !violation.is_positive() {
            return;
        }
        let better = match &best {
            None => true,
            Some((v, t)) => violation > *v || (violation == *v && theta < t.as_slice()),
        };
        if better {
            best = Some((violation, theta.to_vec()));
        }
    });
    let (cut, sequence) = match best {
        Some((_, theta)) => (
            Some(aggregated_cut_unchecked(inst, &theta)),
            Some(SequenceTheta::new(theta, inst.n()).expect("enumerated sequences are valid")),
        ),
        None => (None, None),
    };
    AggregatedSeparation { cut, regime: Regime::Exhaustive, sequence, sequences_examined: examined }
}

/// Aggregated inequalities for every sequence of distinct elements of `ground`
/// up to `max_len`, deduplicated by canonical form.
pub fn aggregated_cuts_over(inst: &MixingInstance, ground: &[usize], max_len: usize) -> Result<Vec<LinearCut>> {
    inst.require_zero_lower()?;
    let mut cuts = Vec::new();
    for_each_sequence(ground, max_len, |theta| cuts.push(aggregated_cut_unchecked(inst, theta)));
    crate::cut::dedup_canonical(cuts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::r;

    fn example(eps: i64) -> MixingInstance {
        MixingInstance::from_integers(&[&[8, 3], &[6, 4], &[13, 2], &[1, 2], &[4, 1]], eps).unwrap()
    }

    fn theta(s: &str) -> SequenceTheta {
        SequenceTheta::parse_one_based(s, 5).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| r(x)).collect()
    }

    #[test]
    fn decomposition_of_example_sequence() {
        let d = decompose(&example(7), &theta("2,1,3"));
        assert_eq!(d.per_column, vec![vec![2], vec![1, 0, 2]]);
        let single = decompose(&example(7), &theta("4"));
        assert_eq!(single.per_column, vec![vec![3], vec![3]]);
    }

    #[test]
    fn l_theta_values() {
        let inst = example(7);
        assert_eq!(l_theta(&inst, &theta("2,1,3")), r(9));
        assert_eq!(l_theta(&inst, &theta("2,3")), r(8));
        assert_eq!(l_theta(&inst, &theta("4")), r(3));
    }

    #[test]
    fn example1_aggregated_cuts() {
        let c = aggregated_cut(&example(7), &theta("2,1,3")).unwrap();
        assert_eq!(c.to_line(), "1 1 | 1 1 8 0 0 | >= 17 | AMix*");
        let c = aggregated_cut(&example(9), &theta("2,1,3")).unwrap();
        assert_eq!((c.z_coeffs.clone(), c.rhs.clone()), (ints(&[1, 1, 6, 0, 0]), r(17)));
        let c = aggregated_cut(&example(9), &theta("3,2,1")).unwrap();
        assert_eq!((c.z_coeffs.clone(), c.rhs.clone()), (ints(&[2, 1, 5, 0, 0]), r(17)));
        let reduced_needed = MixingInstance::new(vec![ints(&[1])], ints(&[1]), r(0), None).unwrap();
        assert!(matches!(
            aggregated_cut(&reduced_needed, &SequenceTheta::new(vec![0], 1).unwrap()),
            Err(Error::LowerBoundsNotReduced)
        ));
    }

    #[test]
    fn linking_dominance() {
        assert!(dominates_linking(&example(7), &theta("2,1,3")).unwrap());
        assert!(!dominates_linking(&example(9), &theta("2,3")).unwrap());
        assert!(dominates_linking(&example(0), &theta("4,5")).unwrap());
    }

    #[test]
    fn summed_mixing_differs_only_on_last() {
        let inst = example(7);
        let t = theta("3,1,2");
        let a = aggregated_cut(&inst, &t).unwrap();
        let s = summed_mixing_cut(&inst, &t).unwrap();
        assert_eq!(a.rhs, s.rhs);
        let correction = inst.epsilon().clone().min(l_theta(&inst, &t));
        assert_eq!(&s.z_coeffs[1] - &a.z_coeffs[1], correction);
        assert_eq!(a.z_coeffs[0], s.z_coeffs[0]);
    }

    #[test]
    fn validity_examples() {
        let inst = example(7);
        let bad = LinearCut::new(ints(&[1, 0]), ints(&[0; 5]), r(14), CutKind::Mix);
        assert!(!check_validity(&inst, &bad).unwrap());
        assert!(check_validity(&inst, &hull::linking_cut(&inst)).unwrap());
        let mut all_valid = true;
        for_each_sequence(&[0, 1, 2, 3, 4], 3, |t| {
            all_valid &= check_validity(&inst, &aggregated_cut_unchecked(&inst, t)).unwrap();
        });
        assert!(all_valid);
    }

    #[test]
    fn greedy_separation_returns_example_cut() {
        let inst = example(7);
        let p = Point::new(ints(&[10, 4]), vec![r(0), r(0), crate::rational::q(1, 2), r(1), r(1)]);
        let sep = separate_aggregated_with(&inst, &p, AggregatedOptions::default()).unwrap();
        assert_eq!(sep.regime, Regime::Polymatroid);
        assert_eq!(sep.cut.unwrap().to_line(), "1 1 | 4 1 5 0 0 | >= 17 | AMix*");
        assert_eq!(sep.sequence.unwrap().to_string(), "(3,2,1)");
        let vertex = Point::new(ints(&[13, 4]), ints(&[0, 0, 0, 0, 0]));
        assert!(separate_aggregated(&inst, &vertex).unwrap().is_none());
        let low = Point::new(ints(&[1, 1]), ints(&[1, 1, 1, 1, 1]));
        assert!(matches!(separate_aggregated(&inst, &low), Err(Error::EpsilonViolated { .. })));
    }
}
