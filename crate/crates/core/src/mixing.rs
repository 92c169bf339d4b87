//! Single-column mixing machinery: the column functions `f_j`, lower-bound
//! reduction, quantile lower bounds, and mixing inequalities.

use crate::cut::{CutKind, LinearCut, Point};
use crate::error::{Error, Result};
use crate::instance::MixingInstance;
use crate::rational::Rational;
use crate::submodular::{greedy_vertex, SetFunction, Subset};

/// `f_j(S) = max(lower_j, max_{i in S} w_ij)`, the value of `y_j` forced
/// when the scenarios in `S` are enforced.
#[derive(Clone, Debug)]
pub struct ColumnFunction {
    values: Vec<Rational>,
    lower: Rational,
}

impl ColumnFunction {
    pub fn new(inst: &MixingInstance, j: usize) -> Self {
        ColumnFunction { values: (0..inst.n()).map(|i| inst.w(i, j).clone()).collect(), lower: inst.lower()[j].clone() }
    }
}

impl SetFunction for ColumnFunction {
    fn ground_size(&self) -> usize {
        self.values.len()
    }

    fn evaluate(&self, set: &Subset) -> Rational {
        set.iter().map(|i| &self.values[i]).fold(self.lower.clone(), |m, v| m.max(v.clone()))
    }

    fn prefix_values(&self, order: &[usize]) -> Vec<Rational> {
        let mut current = self.lower.clone();
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(current.clone());
        for &i in order {
            if self.values[i] > current {
                current = self.values[i].clone();
            }
            out.push(current.clone());
        }
        out
    }
}

/// Replaces `w_ij` by `max(0, w_ij - lower_j)` and sets the lower bounds to zero.
/// Returns the reduced instance and the shift `lower`.
pub fn reduce_lower_bounds(inst: &MixingInstance) -> (MixingInstance, Vec<Rational>) {
    let shift = inst.lower().to_vec();
    let weights = inst
        .weights()
        .iter()
        .map(|row| row.iter().zip(&shift).map(|(w, l)| (w - l).positive_part()).collect())
        .collect();
    let reduced = MixingInstance::new(
        weights,
        vec![Rational::zero(); inst.k()],
        inst.epsilon().clone(),
        inst.probabilities().map(<[Rational]>::to_vec),
    )
    .expect("reduction preserves validity");
    (reduced, shift)
}

/// Maps a cut on the reduced instance back to the original variables:
/// `alpha . (y - shift) + beta . z >= gamma` becomes `alpha . y + beta . z >= gamma + alpha . shift`.
pub fn unshift_cut(cut: &LinearCut, shift: &[Rational]) -> LinearCut {
    let offset: Rational = cut.y_coeffs.iter().zip(shift).map(|(a, l)| a * l).sum();
    LinearCut { rhs: &cut.rhs + offset, ..cut.clone() }
}

/// Per-column quantile lower bounds from scenario probabilities: the smallest
/// value `y_j` can take when scenarios of total probability at most `risk`
/// may be dropped.
pub fn quantile_lower_bounds(inst: &MixingInstance, risk: &Rational) -> Result<Vec<Rational>> {
    let p = inst.probabilities().ok_or(Error::MissingProbabilities)?;
    if !risk.is_positive() || *risk >= Rational::one() {
        return Err(Error::RiskOutOfRange(Box::new(risk.clone())));
    }
    let mut bounds = Vec::with_capacity(inst.k());
    for j in 0..inst.k() {
        let mut order: Vec<usize> = (0..inst.n()).collect();
        order.sort_by(|&a, &b| inst.w(b, j).cmp(inst.w(a, j)).then(a.cmp(&b)));
        let mut cumulative = Rational::zero();
        let mut bound = None;
        for &i in &order {
            cumulative += &p[i];
            if cumulative > *risk {
                bound = Some(inst.w(i, j).clone());
                break;
            }
        }
        bounds.push(bound.ok_or_else(|| Error::Internal("probabilities do not exceed risk".into()))?);
    }
    Ok(bounds)
}

/// A chain `j_1, ..., j_tau` in column `j` with nonincreasing weights, all at
/// least `lower_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MixingSequence {
    column: usize,
    indices: Vec<usize>,
}

impl MixingSequence {
    pub fn new(inst: &MixingInstance, column: usize, indices: Vec<usize>) -> Result<Self> {
        if column >= inst.k() {
            return Err(Error::InvalidSequence(format!("column {} outside 1..={}", column + 1, inst.k())));
        }
        crate::sequence::SequenceTheta::new(indices.clone(), inst.n())?;
        let lower = &inst.lower()[column];
        for pair in indices.windows(2) {
            if inst.w(pair[0], column) < inst.w(pair[1], column) {
                return Err(Error::InvalidSequence(format!(
                    "w[{}][{}] < w[{}][{}] breaks monotonicity",
                    pair[0] + 1,
                    column + 1,
                    pair[1] + 1,
                    column + 1
                )));
            }
        }
        let tail = *indices.last().expect("nonempty");
        if inst.w(tail, column) < lower {
            return Err(Error::InvalidSequence(format!(
                "w[{}][{}] is below the lower bound {lower}",
                tail + 1,
                column + 1
            )));
        }
        Ok(MixingSequence { column, indices })
    }

    pub fn column(&self) -> usize {
        self.column
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// `y_j + sum_s (w_{j_s} - w_{j_{s+1}}) z_{j_s} >= w_{j_1}` with `w_{j_{tau+1}} = lower_j`.
pub fn mixing_cut(inst: &MixingInstance, seq: &MixingSequence) -> LinearCut {
    let j = seq.column;
    let mut y = vec![Rational::zero(); inst.k()];
    y[j] = Rational::one();
    let mut z = vec![Rational::zero(); inst.n()];
    let lower = &inst.lower()[j];
    for (s, &i) in seq.indices.iter().enumerate() {
        let next = seq.indices.get(s + 1).map_or(lower, |&nx| inst.w(nx, j));
        z[i] = inst.w(i, j) - next;
    }
    let head = inst.w(seq.indices[0], j).clone();
    let kind = if head == inst.column_max(j) { CutKind::MixStar } else { CutKind::Mix };
    LinearCut::new(y, z, head, kind)
}

/// `y_j >= lower_j`.
pub fn lower_bound_cut(inst: &MixingInstance, j: usize) -> LinearCut {
    let mut y = vec![Rational::zero(); inst.k()];
    y[j] = Rational::one();
    LinearCut::new(y, vec![Rational::zero(); inst.n()], inst.lower()[j].clone(), CutKind::BoundLower)
}

/// Distinct values of column `j` that are at least `lower_j`, largest first,
/// each with every row attaining it.
fn value_groups(inst: &MixingInstance, j: usize) -> Vec<(Rational, Vec<usize>)> {
    let lower = &inst.lower()[j];
    let mut rows: Vec<usize> = (0..inst.n()).filter(|&i| inst.w(i, j) >= lower).collect();
    rows.sort_by(|&a, &b| inst.w(b, j).cmp(inst.w(a, j)).then(a.cmp(&b)));
    let mut groups: Vec<(Rational, Vec<usize>)> = Vec::new();
    for i in rows {
        match groups.last_mut() {
            Some((v, members)) if v == inst.w(i, j) => members.push(i),
            _ => groups.push((inst.w(i, j).clone(), vec![i])),
        }
    }
    groups
}

fn chains(inst: &MixingInstance, j: usize, star_only: bool) -> Vec<MixingSequence> {
    let groups = value_groups(inst, j);
    let lower = &inst.lower()[j];
    let mut out = Vec::new();
    if groups.is_empty() {
        return out;
    }
    // A value equal to the lower bound only contributes a zero coefficient, so
    // it appears alone or not at all.
    let proper = groups.iter().take_while(|(v, _)| v > lower).count();
    if proper == 0 {
        let only = &groups[0];
        out.extend(only.1.iter().map(|&i| MixingSequence { column: j, indices: vec![i] }));
        return out;
    }
    fn rec(
        groups: &[(Rational, Vec<usize>)],
        next: usize,
        cur: &mut Vec<usize>,
        j: usize,
        out: &mut Vec<MixingSequence>,
    ) {
        if !cur.is_empty() {
            out.push(MixingSequence { column: j, indices: cur.clone() });
        }
        for g in next..groups.len() {
            for &i in &groups[g].1 {
                cur.push(i);
                rec(groups, g + 1, cur, j, out);
                cur.pop();
            }
        }
    }
    let proper_groups = &groups[..proper];
    if star_only {
        for &head in &proper_groups[0].1 {
            let mut cur = vec![head];
            rec(proper_groups, 1, &mut cur, j, &mut out);
        }
    } else {
        rec(proper_groups, 0, &mut Vec::new(), j, &mut out);
    }
    out
}

/// Every distinct Mix* inequality of column `j`: chains starting at the column
/// maximum through strictly decreasing values, one row per value, with every
/// choice of row among tied values.
pub fn mix_star_sequences(inst: &MixingInstance, j: usize) -> Vec<MixingSequence> {
    chains(inst, j, true)
}

/// Every distinct mixing inequality of column `j` (any head value).
pub fn all_mixing_sequences(inst: &MixingInstance, j: usize) -> Vec<MixingSequence> {
    chains(inst, j, false)
}

pub fn mix_star_cuts(inst: &MixingInstance) -> Vec<LinearCut> {
    (0..inst.k()).flat_map(|j| mix_star_sequences(inst, j).into_iter().map(|s| mixing_cut(inst, &s))).collect()
}

pub fn all_mixing_cuts(inst: &MixingInstance) -> Vec<LinearCut> {
    (0..inst.k()).flat_map(|j| all_mixing_sequences(inst, j).into_iter().map(|s| mixing_cut(inst, &s))).collect()
}

/// The chain read off a polymatroid vertex of `f_j`: rows with positive gain,
/// largest weight first.
pub fn sequence_from_vertex(j: usize, pi: &[Rational], order: &[usize]) -> Option<MixingSequence> {
    let mut indices: Vec<usize> = order.iter().copied().filter(|&i| pi[i].is_positive()).collect();
    if indices.is_empty() {
        return None;
    }
    indices.reverse();
    Some(MixingSequence { column: j, indices })
}

/// For each column, the most violated mixing inequality at `point` (given in
/// the original `z` coordinates), if any. Exact: column `j` yields nothing iff
/// `(y_j, z)` satisfies every mixing inequality of column `j`.
pub fn separate_mixing(inst: &MixingInstance, point: &Point) -> Result<Vec<LinearCut>> {
    point.check_dimensions(inst.k(), inst.n())?;
    point.check_unit_box()?;
    let u: Vec<Rational> = point.z.iter().map(|z| Rational::one() - z).collect();
    let mut cuts = Vec::new();
    for j in 0..inst.k() {
        let f = ColumnFunction::new(inst, j);
        let vertex = greedy_vertex(&f, &u)?;
        let bound = vertex.dot(&u) + &vertex.base;
        if point.y[j] >= bound {
            continue;
        }
        let cut = match sequence_from_vertex(j, &vertex.pi, &vertex.permutation) {
            Some(seq) => {
                let cut = mixing_cut(inst, &seq);
                let total: Rational = vertex.pi.iter().sum();
                if cut.z_coeffs != vertex.pi || cut.rhs != total + &vertex.base {
                    return Err(Error::Internal(format!(
                        "column {} vertex does not match its mixing inequality",
                        j + 1
                    )));
                }
                cut
            }
            None => lower_bound_cut(inst, j),
        };
        cuts.push(cut);
    }
    Ok(cuts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, r};

    fn example1() -> MixingInstance {
        MixingInstance::from_integers(&[&[8, 3], &[6, 4], &[13, 2], &[1, 2], &[4, 1]], 7).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| r(x)).collect()
    }

    #[test]
    fn example1_mixing_facets() {
        let inst = example1();
        let s = MixingSequence::new(&inst, 0, vec![2, 0, 1, 4, 3]).unwrap();
        let c = mixing_cut(&inst, &s);
        assert_eq!(
            (c.y_coeffs.clone(), c.z_coeffs.clone(), c.rhs.clone()),
            (ints(&[1, 0]), ints(&[2, 2, 5, 1, 3]), r(13))
        );
        assert_eq!(c.kind, CutKind::MixStar);
        let s = MixingSequence::new(&inst, 1, vec![1, 3, 4]).unwrap();
        let c = mixing_cut(&inst, &s);
        assert_eq!((c.z_coeffs.clone(), c.rhs.clone()), (ints(&[0, 2, 0, 1, 1]), r(4)));
    }

    #[test]
    fn singleton_is_big_m_row() {
        let inst = example1();
        let c = mixing_cut(&inst, &MixingSequence::new(&inst, 0, vec![0]).unwrap());
        assert_eq!(c.to_line(), "1 0 | 8 0 0 0 0 | >= 8 | Mix");
    }

    #[test]
    fn sequence_validation() {
        let inst = example1();
        assert!(MixingSequence::new(&inst, 0, vec![0, 2]).is_err());
        assert!(MixingSequence::new(&inst, 2, vec![0]).is_err());
        assert!(MixingSequence::new(&inst, 0, vec![0, 0]).is_err());
    }

    #[test]
    fn reduction() {
        let inst = MixingInstance::new(vec![ints(&[6, 4])], ints(&[8, 1]), r(0), None).unwrap();
        let (red, shift) = reduce_lower_bounds(&inst);
        assert_eq!(red.row(0), ints(&[0, 3]).as_slice());
        assert_eq!(shift, ints(&[8, 1]));
        let (same, zero) = reduce_lower_bounds(&example1());
        assert_eq!(same, example1());
        assert_eq!(zero, ints(&[0, 0]));
        let cut = LinearCut::new(ints(&[1, 2]), ints(&[3]), r(5), CutKind::Mix);
        assert_eq!(unshift_cut(&cut, &shift).rhs, r(5 + 8 + 2));
    }

    #[test]
    fn quantiles() {
        let base = example1();
        let inst = MixingInstance::new(base.weights().to_vec(), ints(&[0, 0]), r(7), Some(vec![q(1, 5); 5])).unwrap();
        assert_eq!(quantile_lower_bounds(&inst, &q(1, 5)).unwrap()[0], r(8));
        assert_eq!(quantile_lower_bounds(&inst, &q(1, 10)).unwrap(), ints(&[13, 4]));
        assert!(matches!(quantile_lower_bounds(&inst, &r(1)), Err(Error::RiskOutOfRange(_))));
        assert!(matches!(quantile_lower_bounds(&base, &q(1, 2)), Err(Error::MissingProbabilities)));
    }

    #[test]
    fn chain_enumeration_keeps_tied_rows() {
        let inst = example1();
        // column 2 values 4, 3, {2, 2}, 1
        let star = mix_star_sequences(&inst, 1);
        // the head is fixed; value 3 in or out, value 2 out or one of two rows, value 1 in or out
        assert_eq!(star.len(), 2 * 3 * 2);
        assert!(star.iter().any(|s| s.indices() == [1, 3, 4]));
        assert_eq!(mix_star_sequences(&inst, 0).len(), 16);
        assert_eq!(all_mixing_sequences(&inst, 0).len(), 31);
    }

    #[test]
    fn separation_examples() {
        let inst = example1();
        let p = Point::new(ints(&[12, 4]), ints(&[1, 1, 0, 1, 1]));
        let cuts = separate_mixing(&inst, &p).unwrap();
        assert_eq!(cuts.len(), 1);
        assert!(cuts[0].z_coeffs[2].is_positive());
        assert!(cuts[0].violation(&p).is_positive());
        let vertex = Point::new(ints(&[13, 4]), ints(&[0, 0, 0, 0, 0]));
        assert!(separate_mixing(&inst, &vertex).unwrap().is_empty());
        let p = Point::new(ints(&[8, 8]), ints(&[1, 1, 0, 1, 1]));
        let cuts = separate_mixing(&inst, &p).unwrap();
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].to_line(), "1 0 | 0 0 13 0 0 | >= 13 | Mix*");
    }
}
