//! Set-function oracles, Edmonds' greedy algorithm over extended
//! polymatroids, and polymatroid-inequality separation.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::cut::{CutKind, LinearCut};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A subset of `0..n` stored as a bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    n: usize,
    words: Vec<u64>,
}

impl Subset {
    pub fn empty(n: usize) -> Self {
        Subset { n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Bit `i` of `mask` is element `i`. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "from_mask needs n <= 64");
        let mut s = Self::empty(n);
        if n > 0 {
            s.words[0] = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
        }
        s
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "element {i} outside ground set of size {}", self.n);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn with(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.insert(i);
        s
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.contains(i))
    }
}

/// A set function `f : 2^[n] -> Q`. Implementations must be pure.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn evaluate(&self, set: &Subset) -> Rational;

    /// `f(V_0), f(V_1), ..., f(V_n)` for the prefixes `V_t` of `order`.
    /// Implementations may override this with an incremental evaluation.
    fn prefix_values(&self, order: &[usize]) -> Vec<Rational> {
        let mut set = Subset::empty(self.ground_size());
        let mut values = Vec::with_capacity(order.len() + 1);
        values.push(self.evaluate(&set));
        for &i in order {
            set.insert(i);
            values.push(self.evaluate(&set));
        }
        values
    }
}

impl<F: SetFunction + ?Sized> SetFunction for &F {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn evaluate(&self, set: &Subset) -> Rational {
        (**self).evaluate(set)
    }
    fn prefix_values(&self, order: &[usize]) -> Vec<Rational> {
        (**self).prefix_values(order)
    }
}

impl<F: SetFunction + ?Sized> SetFunction for Box<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn evaluate(&self, set: &Subset) -> Rational {
        (**self).evaluate(set)
    }
    fn prefix_values(&self, order: &[usize]) -> Vec<Rational> {
        (**self).prefix_values(order)
    }
}

/// A set function given by a closure.
pub struct FnOracle<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&Subset) -> Rational + Send + Sync> FnOracle<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnOracle { n, f }
    }
}

impl<F: Fn(&Subset) -> Rational + Send + Sync> SetFunction for FnOracle<F> {
    fn ground_size(&self) -> usize {
        self.n
    }
    fn evaluate(&self, set: &Subset) -> Rational {
        (self.f)(set)
    }
}

/// Caches every evaluation of the wrapped oracle.
pub struct Memoized<F> {
    inner: F,
    cache: Mutex<HashMap<Subset, Rational>>,
}

impl<F: SetFunction> Memoized<F> {
    pub fn new(inner: F) -> Self {
        Memoized { inner, cache: Mutex::new(HashMap::new()) }
    }

    pub fn cached_evaluations(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl<F: SetFunction> SetFunction for Memoized<F> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn evaluate(&self, set: &Subset) -> Rational {
        if let Some(v) = self.cache.lock().expect("cache lock").get(set) {
            return v.clone();
        }
        let v = self.inner.evaluate(set);
        self.cache.lock().expect("cache lock").insert(set.clone(), v.clone());
        v
    }
}

/// `S -> sum_t c_t f_t(S)`.
pub struct WeightedSum<'a> {
    n: usize,
    parts: Vec<(Rational, &'a dyn SetFunction)>,
}

impl SetFunction for WeightedSum<'_> {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn evaluate(&self, set: &Subset) -> Rational {
        self.parts.iter().filter(|(c, _)| !c.is_zero()).map(|(c, f)| c * f.evaluate(set)).sum()
    }

    fn prefix_values(&self, order: &[usize]) -> Vec<Rational> {
        let mut total = vec![Rational::zero(); order.len() + 1];
        for (c, f) in self.parts.iter().filter(|(c, _)| !c.is_zero()) {
            for (t, v) in f.prefix_values(order).into_iter().enumerate() {
                total[t] += c * v;
            }
        }
        total
    }
}

/// Nonnegative combination of oracles over a common ground set.
pub fn weighted_combination<'a>(fs: &[&'a dyn SetFunction], weights: &[Rational]) -> Result<WeightedSum<'a>> {
    if fs.len() != weights.len() {
        return Err(Error::DimensionMismatch { what: "weights", expected: fs.len(), found: weights.len() });
    }
    let n = fs.first().map_or(0, |f| f.ground_size());
    if let Some(f) = fs.iter().find(|f| f.ground_size() != n) {
        return Err(Error::DimensionMismatch { what: "ground set", expected: n, found: f.ground_size() });
    }
    if let Some(c) = weights.iter().find(|c| c.is_negative()) {
        return Err(Error::Domain(format!("negative weight {c}")));
    }
    Ok(WeightedSum { n, parts: weights.iter().cloned().zip(fs.iter().copied()).collect() })
}

/// Default ground-set bound for brute-force submodularity checks.
pub const SUBMODULARITY_CHECK_LIMIT: usize = 16;

/// Sets `A = S + i`, `B = S + j` with `f(A) + f(B) < f(A | B) + f(A & B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmodularityViolation {
    pub a: Subset,
    pub b: Subset,
    /// `f(A) + f(B)`
    pub lhs: Rational,
    /// `f(A | B) + f(A & B)`
    pub rhs: Rational,
}

fn all_values(f: &dyn SetFunction, limit: usize) -> Result<Vec<Rational>> {
    let n = f.ground_size();
    if n > limit || n > 30 {
        return Err(Error::GroundSetTooLarge { size: n, limit: limit.min(30) });
    }
    Ok((0..1u64 << n).map(|mask| f.evaluate(&Subset::from_mask(n, mask))).collect())
}

/// First violation of the local exchange condition
/// `f(S+i) - f(S) >= f(S+i+j) - f(S+j)`, scanning `S` by mask then `i < j`.
pub fn find_submodularity_violation(f: &dyn SetFunction, limit: usize) -> Result<Option<SubmodularityViolation>> {
    let n = f.ground_size();
    let values = all_values(f, limit)?;
    for s in 0..1usize << n {
        for i in (0..n).filter(|i| s & (1 << i) == 0) {
            for j in (i + 1..n).filter(|j| s & (1 << j) == 0) {
                let (a, b, ab) = (s | 1 << i, s | 1 << j, s | 1 << i | 1 << j);
                let lhs = &values[a] + &values[b];
                let rhs = &values[ab] + &values[s];
                if lhs < rhs {
                    return Ok(Some(SubmodularityViolation {
                        a: Subset::from_mask(n, a as u64),
                        b: Subset::from_mask(n, b as u64),
                        lhs,
                        rhs,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Brute-force submodularity test, limited to ground sets of size `limit`.
pub fn is_submodular_with_limit(f: &dyn SetFunction, limit: usize) -> Result<bool> {
    Ok(find_submodularity_violation(f, limit)?.is_none())
}

pub fn is_submodular(f: &dyn SetFunction) -> Result<bool> {
    is_submodular_with_limit(f, SUBMODULARITY_CHECK_LIMIT)
}

/// An extreme point of the extended polymatroid of `f - f(empty)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolymatroidVertex {
    pub pi: Vec<Rational>,
    pub permutation: Vec<usize>,
    /// `f(empty)`, re-added when the vertex is turned into an inequality.
    pub base: Rational,
}

impl PolymatroidVertex {
    pub fn dot(&self, x: &[Rational]) -> Rational {
        self.pi.iter().zip(x).filter(|(p, _)| !p.is_zero()).map(|(p, x)| p * x).sum()
    }
}

/// Indices sorted by `objective` descending, ties by ascending index.
pub fn greedy_order(objective: &[Rational]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..objective.len()).collect();
    order.sort_by(|&a, &b| objective[b].cmp(&objective[a]).then(a.cmp(&b)));
    order
}

/// Edmonds' greedy algorithm: the vertex maximizing `objective . pi`.
pub fn greedy_vertex(f: &dyn SetFunction, objective: &[Rational]) -> Result<PolymatroidVertex> {
    let n = f.ground_size();
    if objective.len() != n {
        return Err(Error::DimensionMismatch { what: "objective", expected: n, found: objective.len() });
    }
    let order = greedy_order(objective);
    Ok(vertex_for_permutation(f, &order))
}

/// The vertex obtained from a fixed permutation by telescoping differences.
pub fn vertex_for_permutation(f: &dyn SetFunction, order: &[usize]) -> PolymatroidVertex {
    let values = f.prefix_values(order);
    let mut pi = vec![Rational::zero(); f.ground_size()];
    for (t, &i) in order.iter().enumerate() {
        pi[i] = &values[t + 1] - &values[t];
    }
    PolymatroidVertex { pi, permutation: order.to_vec(), base: values[0].clone() }
}

/// Most violated polymatroid inequality `y >= pi . z + f(empty)` at `(y_bar, z_bar)`,
/// or `None` when the point lies in the convex hull of the epigraph of `f`.
///
/// The returned cut has one `y` coefficient and is stored as `y - pi . z >= f(empty)`.
pub fn separate_polymatroid(f: &dyn SetFunction, y_bar: &Rational, z_bar: &[Rational]) -> Result<Option<LinearCut>> {
    let one = Rational::one();
    if let Some(z) = z_bar.iter().find(|z| z.is_negative() || **z > one) {
        return Err(Error::Domain(format!("coordinate {z} outside [0, 1]")));
    }
    let vertex = greedy_vertex(f, z_bar)?;
    let bound = vertex.dot(z_bar) + &vertex.base;
    if *y_bar >= bound {
        return Ok(None);
    }
    Ok(Some(LinearCut::new(
        vec![Rational::one()],
        vertex.pi.iter().map(|p| -p).collect(),
        vertex.base,
        CutKind::Polymatroid,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::r;

    fn column_one() -> FnOracle<impl Fn(&Subset) -> Rational + Send + Sync> {
        let w = [8, 6, 13, 1, 4].map(r);
        FnOracle::new(5, move |s: &Subset| s.iter().map(|i| w[i].clone()).max().unwrap_or_else(Rational::zero))
    }

    #[test]
    fn subset_basics() {
        let mut s = Subset::empty(70);
        s.insert(3);
        s.insert(65);
        assert!(s.contains(65) && !s.contains(64));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![3, 65]);
        assert_eq!(s.len(), 2);
        assert_eq!(Subset::from_mask(3, 0b101), Subset::from_indices(3, [0, 2]));
        assert_eq!(Subset::full(3).len(), 3);
    }

    #[test]
    fn greedy_on_column_maximum() {
        let f = column_one();
        let v = greedy_vertex(&f, &vec![r(1); 5]).unwrap();
        assert_eq!(v.permutation, vec![0, 1, 2, 3, 4]);
        assert_eq!(v.pi, [8, 0, 5, 0, 0].map(r).to_vec());
        assert_eq!(v.base, r(0));
    }

    #[test]
    fn zero_objective_uses_identity() {
        let v = greedy_vertex(&column_one(), &vec![r(0); 5]).unwrap();
        assert_eq!(v.permutation, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn separation_of_column_maximum() {
        let f = column_one();
        let cut = separate_polymatroid(&f, &r(0), &vec![r(1); 5]).unwrap().unwrap();
        let point = crate::cut::Point::new(vec![r(0)], vec![r(1); 5]);
        assert_eq!(cut.violation(&point), r(13));
        assert!(separate_polymatroid(&f, &r(13), &vec![r(1); 5]).unwrap().is_none());
        assert!(matches!(separate_polymatroid(&f, &r(0), &vec![r(2); 5]), Err(Error::Domain(_))));
    }

    #[test]
    fn submodularity_checks() {
        assert!(is_submodular(&column_one()).unwrap());
        assert!(is_submodular(&FnOracle::new(4, |_: &Subset| r(3))).unwrap());
        // |S|^2 is supermodular
        let sq = FnOracle::new(3, |s: &Subset| r((s.len() * s.len()) as i64));
        assert!(!is_submodular(&sq).unwrap());
        let big = FnOracle::new(17, |_: &Subset| r(0));
        assert!(matches!(is_submodular(&big), Err(Error::GroundSetTooLarge { .. })));
    }

    #[test]
    fn weighted_sums() {
        let f1 = column_one();
        let w2 = [3, 4, 2, 2, 1].map(r);
        let f2 =
            FnOracle::new(5, move |s: &Subset| s.iter().map(|i| w2[i].clone()).max().unwrap_or_else(Rational::zero));
        let combo = weighted_combination(&[&f1, &f2], &[r(2), r(3)]).unwrap();
        assert_eq!(combo.evaluate(&Subset::from_indices(5, [0])), r(25));
        let zero = weighted_combination(&[&f1, &f2], &[r(0), r(0)]).unwrap();
        assert_eq!(zero.evaluate(&Subset::full(5)), r(0));
        assert!(weighted_combination(&[&f1], &[r(1), r(1)]).is_err());
        let order = [2, 0, 4, 1, 3];
        let direct: Vec<Rational> = {
            let mut s = Subset::empty(5);
            let mut v = vec![combo.evaluate(&s)];
            for &i in &order {
                s.insert(i);
                v.push(combo.evaluate(&s));
            }
            v
        };
        assert_eq!(combo.prefix_values(&order), direct);
    }

    #[test]
    fn memoization_is_transparent() {
        let m = Memoized::new(column_one());
        let s = Subset::from_indices(5, [1, 2]);
        assert_eq!(m.evaluate(&s), r(13));
        assert_eq!(m.evaluate(&s), r(13));
        assert_eq!(m.cached_evaluations(), 1);
    }
}
