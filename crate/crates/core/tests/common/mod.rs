//! Random instance generators and brute-force oracles written directly from
//! the definitions, independent of the library's algorithms.

#![allow(dead_code)]

use mixhull::rational::Rational;
use mixhull::twosided::TwoSidedData;
use mixhull::MixingInstance;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer in `0..=max`, or a half or third of one.
pub fn random_value(rng: &mut ChaCha8Rng, max: i64) -> Rational {
    let den = *[1, 1, 1, 2, 3].choose(rng).unwrap();
    Rational::new(rng.gen_range(0..=max * den), den)
}

pub fn random_weights(rng: &mut ChaCha8Rng, n: usize, k: usize, max: i64) -> Vec<Vec<Rational>> {
    (0..n).map(|_| (0..k).map(|_| random_value(rng, max)).collect()).collect()
}

/// An instance with zero lower bounds and epsilon between 0 and the largest row sum.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, k: usize, max: i64) -> MixingInstance {
    let weights = random_weights(rng, n, k, max);
    let top = weights.iter().map(|row| row.iter().sum::<Rational>()).max().unwrap();
    let eps = random_value(rng, max * k as i64).min(top + Rational::one());
    MixingInstance::from_weights(weights, eps).unwrap()
}

/// Rejection-samples an instance whose diagnosis satisfies `keep`.
pub fn random_instance_where(
    rng: &mut ChaCha8Rng,
    n_range: std::ops::RangeInclusive<usize>,
    k_range: std::ops::RangeInclusive<usize>,
    keep: impl Fn(&MixingInstance) -> bool,
) -> MixingInstance {
    loop {
        let n = rng.gen_range(n_range.clone());
        let k = rng.gen_range(k_range.clone());
        let inst = random_instance(rng, n, k, 9);
        if keep(&inst) {
            return inst;
        }
    }
}

pub fn random_two_sided(rng: &mut ChaCha8Rng, n: usize) -> TwoSidedData {
    let mut w = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        let wi = if rng.gen_bool(0.1) { Rational::zero() } else { random_value(rng, 10) };
        let vi = if rng.gen_bool(0.2) { wi.clone() } else { &wi * random_value(rng, 1) };
        w.push(wi);
        v.push(vi);
    }
    let top = w.iter().cloned().max().unwrap();
    let u_a = top + random_value(rng, 4);
    TwoSidedData::new(w, v, u_a).unwrap()
}

pub fn subsets(mask: u64, n: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |i| mask >> i & 1 == 1)
}

/// `max(lower_j, max_{i in S} w_ij)`.
pub fn column_value(inst: &MixingInstance, j: usize, mask: u64) -> Rational {
    subsets(mask, inst.n()).map(|i| inst.w(i, j).clone()).fold(inst.lower()[j].clone(), Rational::max)
}

/// `max(epsilon, sum_j max_{i in S} w_ij)`.
pub fn aggregate_value(inst: &MixingInstance, mask: u64) -> Rational {
    let total: Rational = (0..inst.k())
        .map(|j| subsets(mask, inst.n()).map(|i| inst.w(i, j).clone()).fold(Rational::zero(), Rational::max))
        .sum();
    total.max(inst.epsilon().clone())
}

/// The pairwise definition over all `A, B`.
pub fn brute_submodular(n: usize, f: impl Fn(u64) -> Rational) -> Option<(u64, u64)> {
    let values: Vec<Rational> = (0..1u64 << n).map(&f).collect();
    for a in 0..1u64 << n {
        for b in 0..1u64 << n {
            if &values[a as usize] + &values[b as usize] < &values[(a | b) as usize] + &values[(a & b) as usize] {
                return Some((a, b));
            }
        }
    }
    None
}

pub fn brute_i_bar(inst: &MixingInstance) -> Vec<usize> {
    (0..inst.n()).filter(|&i| inst.row_sum(i) <= *inst.epsilon()).collect()
}

/// `None` for infinity.
pub fn brute_l_w(inst: &MixingInstance) -> Option<Rational> {
    let i_bar = brute_i_bar(inst);
    let outside: Vec<usize> = (0..inst.n()).filter(|i| !i_bar.contains(i)).collect();
    match outside.len() {
        0 => None,
        1 => Some(inst.row_sum(outside[0])),
        _ => {
            let mut best: Option<Rational> = None;
            for &p in &outside {
                for &q in &outside {
                    if p != q {
                        let v: Rational = (0..inst.k()).map(|j| inst.w(p, j).clone().min(inst.w(q, j).clone())).sum();
                        best = Some(best.map_or(v.clone(), |b| b.min(v)));
                    }
                }
            }
            best
        }
    }
}

pub fn brute_sufficient(inst: &MixingInstance) -> bool {
    let i_bar = brute_i_bar(inst);
    let eps = inst.epsilon();
    let outside: Vec<usize> = (0..inst.n()).filter(|i| !i_bar.contains(i)).collect();
    let c1 = outside.iter().all(|&p| i_bar.iter().all(|&q| (0..inst.k()).all(|j| inst.w(q, j) <= inst.w(p, j))));
    let c2: Rational =
        (0..inst.k()).map(|j| i_bar.iter().map(|&i| inst.w(i, j).clone()).fold(Rational::zero(), Rational::max)).sum();
    c1 && c2 <= *eps && brute_l_w(inst).is_none_or(|l| *eps <= l)
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// `max over permutations sigma` of `x . pi_sigma`, where `pi_sigma` telescopes `f`.
pub fn brute_greedy_value(n: usize, f: impl Fn(u64) -> Rational, x: &[Rational]) -> Rational {
    permutations(n)
        .into_iter()
        .map(|order| {
            let mut mask = 0u64;
            let mut prev = f(0);
            let mut total = Rational::zero();
            for i in order {
                mask |= 1 << i;
                let cur = f(mask);
                total += &x[i] * (&cur - &prev);
                prev = cur;
            }
            total
        })
        .max()
        .unwrap()
}

/// Smallest `max_{i not dropped} w_ij` over dropped sets of probability at most `risk`.
pub fn brute_quantile(weights: &[Rational], p: &[Rational], risk: &Rational) -> Rational {
    let n = weights.len();
    (0..1u64 << n)
        .filter(|&mask| subsets(mask, n).map(|i| p[i].clone()).sum::<Rational>() <= *risk)
        .map(|mask| {
            (0..n).filter(|i| mask >> i & 1 == 0).map(|i| weights[i].clone()).fold(Rational::zero(), Rational::max)
        })
        .min()
        .unwrap()
}

/// Random probability vector with small denominators summing to one.
pub fn random_probabilities(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let parts: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = parts.iter().sum();
    parts.into_iter().map(|a| Rational::new(a, total)).collect()
}

/// Binary points of the set (original coordinates: `z_i = 0` enforces row
/// `i`), with `y` the least vector meeting the rows and the linking constraint
/// distributed in every coordinate.
pub fn brute_binary_points(inst: &MixingInstance) -> Vec<(Vec<Rational>, Vec<Rational>)> {
    let (n, k) = (inst.n(), inst.k());
    let mut out = Vec::new();
    for mask in 0..1u64 << n {
        let z: Vec<Rational> =
            (0..n).map(|i| if mask >> i & 1 == 1 { Rational::one() } else { Rational::zero() }).collect();
        let base: Vec<Rational> = (0..k)
            .map(|j| {
                (0..n)
                    .filter(|i| mask >> i & 1 == 0)
                    .map(|i| inst.w(i, j).clone())
                    .fold(inst.lower()[j].clone(), Rational::max)
            })
            .collect();
        let lower_sum: Rational = inst.lower().iter().sum();
        let deficit = (inst.epsilon() + &lower_sum - base.iter().sum::<Rational>()).positive_part();
        for d in 0..k {
            let mut y = base.clone();
            y[d] += &deficit;
            out.push((y, z.clone()));
        }
    }
    out
}

/// Solves the square system `a x = b` by Gauss-Jordan elimination; `None`
/// when singular.
pub fn solve_square(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> =
        a.iter().zip(b).map(|(row, v)| row.iter().cloned().chain([v.clone()]).collect()).collect();
    for c in 0..n {
        let pivot = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, pivot);
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[c][c];
                let pivot_row = m[c].clone();
                for (x, p) in m[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some((0..n).map(|i| &m[i][n] / &m[i][i]).collect())
}

/// Vertices of `{x >= 0, a x >= b}`: every feasible solution of `dim` tight
/// constraints with a nonsingular matrix, deduplicated and sorted.
pub fn brute_vertices(dim: usize, rows: &[(Vec<Rational>, Rational)]) -> Vec<Vec<Rational>> {
    let mut all = rows.to_vec();
    for i in 0..dim {
        all.push((
            (0..dim).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect(),
            Rational::zero(),
        ));
    }
    let feasible =
        |x: &[Rational]| all.iter().all(|(a, b)| a.iter().zip(x).map(|(u, v)| u * v).sum::<Rational>() >= *b);
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn visit(
        start: usize,
        dim: usize,
        all: &[(Vec<Rational>, Rational)],
        chosen: &mut Vec<usize>,
        found: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == dim {
            found(chosen);
            return;
        }
        for i in start..all.len() {
            chosen.push(i);
            visit(i + 1, dim, all, chosen, found);
            chosen.pop();
        }
    }
    visit(0, dim, &all, &mut chosen, &mut |subset| {
        let a: Vec<Vec<Rational>> = subset.iter().map(|&i| all[i].0.clone()).collect();
        let b: Vec<Rational> = subset.iter().map(|&i| all[i].1.clone()).collect();
        if let Some(x) = solve_square(&a, &b) {
            if feasible(&x) {
                out.push(x);
            }
        }
    });
    out.sort();
    out.dedup();
    out
}
