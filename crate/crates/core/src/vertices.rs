//! Exact vertex enumeration of `{x >= 0, A x >= b}` by the double description
//! method on the homogenized cone `{(t, x) >= 0 : A x - b t >= 0}`.
//!
//! Meant for the small polyhedra met when certifying witnesses; the number of
//! intermediate rays is not bounded.

use fixedbitset::FixedBitSet;

use crate::rational::Rational;

struct Ray {
    coords: Vec<Rational>,
    tight: FixedBitSet,
}

fn dot(row: &[Rational], v: &[Rational]) -> Rational {
    row.iter().zip(v).filter(|(a, _)| !a.is_zero()).map(|(a, x)| a * x).sum()
}

/// Scales a ray so that `t = 1` when `t > 0`, otherwise so that its first
/// nonzero entry is 1.
fn normalize(mut v: Vec<Rational>) -> Vec<Rational> {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        let inv = lead.abs().recip();
        for x in &mut v {
            *x *= &inv;
        }
    }
    v
}

/// Vertices of `{x in R^dim : x >= 0, a x >= b for (a, b) in rows}`, in no
/// particular order. The polyhedron is pointed by construction.
pub fn enumerate_vertices(dim: usize, rows: &[(Vec<Rational>, Rational)]) -> Vec<Vec<Rational>> {
    let total = dim + 1 + rows.len();
    // Homogenized constraints: index 0 is t >= 0, 1..=dim are x >= 0.
    let homogenized: Vec<Vec<Rational>> =
        rows.iter().map(|(a, b)| std::iter::once(-b).chain(a.iter().cloned()).collect()).collect();
    let mut rays: Vec<Ray> = (0..=dim)
        .map(|i| {
            let coords = (0..=dim).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect();
            let mut tight = FixedBitSet::with_capacity(total);
            tight.insert_range(..dim + 1);
            tight.set(i, false);
            Ray { coords, tight }
        })
        .collect();
    for (offset, row) in homogenized.iter().enumerate() {
        let index = dim + 1 + offset;
        let values: Vec<Rational> = rays.iter().map(|r| dot(row, &r.coords)).collect();
        if values.iter().all(|v| !v.is_negative()) {
            for (ray, v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    ray.tight.insert(index);
                }
            }
            continue;
        }
        let positive: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let negative: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
        let mut created = Vec::new();
        for &p in &positive {
            for &q in &negative {
                let common = rays[p].tight.intersection(&rays[q].tight).count();
                if common + 1 < dim {
                    continue;
                }
                let mut shared = rays[p].tight.clone();
                shared.intersect_with(&rays[q].tight);
                let blocked = rays.iter().enumerate().any(|(r, ray)| r != p && r != q && shared.is_subset(&ray.tight));
                if blocked {
                    continue;
                }
                let coords: Vec<Rational> = rays[q]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(xq, xp)| &values[p] * xq - &values[q] * xp)
                    .collect();
                shared.insert(index);
                created.push(Ray { coords: normalize(coords), tight: shared });
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
        for (ray, v) in rays.into_iter().zip(&values) {
            if v.is_negative() {
                continue;
            }
            let mut ray = ray;
            if v.is_zero() {
                ray.tight.insert(index);
            }
            kept.push(ray);
        }
        kept.extend(created);
        rays = kept;
    }
    rays.into_iter()
        .filter(|r| r.coords[0].is_positive())
        .map(|r| {
            let t = r.coords[0].recip();
            r.coords[1..].iter().map(|x| x * &t).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, r};

    fn row(a: &[i64], b: i64) -> (Vec<Rational>, Rational) {
        (a.iter().map(|&v| r(v)).collect(), r(b))
    }

    fn sorted(mut v: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
        v.sort();
        v
    }

    #[test]
    fn unit_square() {
        let rows = [row(&[-1, 0], -1), row(&[0, -1], -1)];
        let got = sorted(enumerate_vertices(2, &rows));
        let want = sorted(vec![vec![r(0), r(0)], vec![r(0), r(1)], vec![r(1), r(0)], vec![r(1), r(1)]]);
        assert_eq!(got, want);
    }

    #[test]
    fn unbounded_region_keeps_only_vertices() {
        // x + y >= 2, x + 2y >= 3 on the orthant.
        let rows = [row(&[1, 1], 2), row(&[1, 2], 3)];
        let got = sorted(enumerate_vertices(2, &rows));
        let want = sorted(vec![vec![r(0), r(2)], vec![r(1), r(1)], vec![r(3), r(0)]]);
        assert_eq!(got, want);
    }

    #[test]
    fn fractional_vertex() {
        // 2x + y >= 1, x + 2y >= 1.
        let rows = [row(&[2, 1], 1), row(&[1, 2], 1)];
        let got = sorted(enumerate_vertices(2, &rows));
        let want = sorted(vec![vec![r(0), r(1)], vec![q(1, 3), q(1, 3)], vec![r(1), r(0)]]);
        assert_eq!(got, want);
    }
}
