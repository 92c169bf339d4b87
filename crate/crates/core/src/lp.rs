//! A dense two-phase simplex method over exact rationals, using Bland's rule
//! so that it always terminates.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `minimize c . x` subject to `a_i . x (<=|>=|=) b_i` and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub rows: Vec<Vec<Rational>>,
    pub relations: Vec<Relation>,
    pub rhs: Vec<Rational>,
    pub objective: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<Rational>,
        value: Rational,
    },
    /// A Farkas certificate `y`: `y . A_j <= 0` for every variable column,
    /// `y_i >= 0` on `>=` rows, `y_i <= 0` on `<=` rows, and `y . b > 0`.
    Infeasible {
        certificate: Vec<Rational>,
    },
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            rows: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
            objective: vec![Rational::zero(); num_vars],
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "row width");
        self.rows.push(coeffs);
        self.relations.push(relation);
        self.rhs.push(rhs);
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }

    /// Feasibility only (phase one).
    pub fn feasibility(&self) -> LpOutcome {
        let mut t = Tableau::build(self);
        match t.phase_one() {
            Err(certificate) => LpOutcome::Infeasible { certificate },
            Ok(()) => LpOutcome::Optimal { x: t.solution(self.num_vars), value: Rational::zero() },
        }
    }
}

struct Tableau {
    m: usize,
    /// structural + slack + artificial columns
    width: usize,
    first_artificial: usize,
    cells: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Column that was basic for each row at the start; its current column is `B^{-1} e_i`.
    initial_basis: Vec<usize>,
    /// `-1` where the row was negated to make its right-hand side nonnegative.
    flipped: Vec<bool>,
    reduced: Vec<Rational>,
    value: Rational,
    cost: Vec<Rational>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.rows.len();
        let slack_count = lp.relations.iter().filter(|r| **r != Relation::Eq).count();
        let structural = lp.num_vars;
        let mut cells: Vec<Vec<Rational>> = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        let mut basis = vec![usize::MAX; m];
        let mut slack_col = structural;
        let mut needs_artificial = Vec::new();
        for (i, row) in lp.rows.iter().enumerate() {
            let flip = lp.rhs[i].is_negative();
            let sign = |v: &Rational| if flip { -v } else { v.clone() };
            let mut cells_row: Vec<Rational> = row.iter().map(sign).collect();
            cells_row.resize(structural + slack_count, Rational::zero());
            let slack_sign = match lp.relations[i] {
                Relation::Le => Some(Rational::one()),
                Relation::Ge => Some(-Rational::one()),
                Relation::Eq => None,
            };
            if let Some(s) = slack_sign {
                let s = sign(&s);
                let usable = s.is_one();
                cells_row[slack_col] = s;
                if usable {
                    basis[i] = slack_col;
                }
                slack_col += 1;
            }
            if basis[i] == usize::MAX {
                needs_artificial.push(i);
            }
            cells.push(cells_row);
            rhs.push(sign(&lp.rhs[i]));
            flipped.push(flip);
        }
        let first_artificial = structural + slack_count;
        let width = first_artificial + needs_artificial.len();
        for row in cells.iter_mut() {
            row.resize(width, Rational::zero());
        }
        for (a, &i) in needs_artificial.iter().enumerate() {
            cells[i][first_artificial + a] = Rational::one();
            basis[i] = first_artificial + a;
        }
        Tableau {
            m,
            width,
            first_artificial,
            cells,
            rhs,
            initial_basis: basis.clone(),
            basis,
            flipped,
            reduced: vec![Rational::zero(); width],
            value: Rational::zero(),
            cost: vec![Rational::zero(); width],
        }
    }

    /// Sets the cost vector and recomputes reduced costs and objective value.
    fn price(&mut self, cost: Vec<Rational>) {
        self.reduced = cost.clone();
        self.value = Rational::zero();
        for i in 0..self.m {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (d, t) in self.reduced.iter_mut().zip(&self.cells[i]) {
                if !t.is_zero() {
                    *d -= cb * t;
                }
            }
            self.value += cb * &self.rhs[i];
        }
        self.cost = cost;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.cells[row][col].recip();
        if !inv.is_one() {
            for v in self.cells[row].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[row] *= &inv;
        }
        let nonzero: Vec<usize> = (0..self.width).filter(|&c| !self.cells[row][c].is_zero()).collect();
        let pivot_row = self.cells[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.m {
            if r == row || self.cells[r][col].is_zero() {
                continue;
            }
            let factor = self.cells[r][col].clone();
            for &c in &nonzero {
                let delta = &factor * &pivot_row[c];
                self.cells[r][c] -= delta;
            }
            if !pivot_rhs.is_zero() {
                self.rhs[r] -= &factor * &pivot_rhs;
            }
        }
        let factor = self.reduced[col].clone();
        if !factor.is_zero() {
            for &c in &nonzero {
                let delta = &factor * &pivot_row[c];
                self.reduced[c] -= delta;
            }
            self.value += &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Bland's rule iterations. Returns `false` if unbounded.
    fn iterate(&mut self, allowed: usize) -> bool {
        loop {
            let Some(col) = (0..allowed).find(|&c| self.reduced[c].is_negative()) else {
                return true;
            };
            let mut best: Option<(Rational, usize)> = None;
            for r in 0..self.m {
                let a = &self.cells[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((b, br)) => ratio < *b || (ratio == *b && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((ratio, r));
                }
            }
            match best {
                None => return false,
                Some((_, r)) => self.pivot(r, col),
            }
        }
    }

    /// Drives the artificial variables to zero; on failure returns a Farkas
    /// certificate in the original row signs.
    fn phase_one(&mut self) -> Result<(), Vec<Rational>> {
        if self.first_artificial == self.width {
            return Ok(());
        }
        let mut cost = vec![Rational::zero(); self.width];
        for c in cost.iter_mut().skip(self.first_artificial) {
            *c = Rational::one();
        }
        self.price(cost);
        self.iterate(self.width);
        if self.value.is_positive() {
            // y_i = c_j - d_j for the column that started basic in row i.
            let certificate = (0..self.m)
                .map(|i| {
                    let j = self.initial_basis[i];
                    let y = &self.cost[j] - &self.reduced[j];
                    if self.flipped[i] {
                        -y
                    } else {
                        y
                    }
                })
                .collect();
            return Err(certificate);
        }
        // Pivot remaining artificials out of the basis where possible.
        for r in 0..self.m {
            if self.basis[r] >= self.first_artificial {
                if let Some(c) = (0..self.first_artificial).find(|&c| !self.cells[r][c].is_zero()) {
                    self.pivot(r, c);
                }
            }
        }
        Ok(())
    }

    fn solution(&self, num_vars: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); num_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < num_vars {
                x[b] = self.rhs[r].clone();
            }
        }
        x
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        if let Err(certificate) = self.phase_one() {
            return LpOutcome::Infeasible { certificate };
        }
        let mut cost = vec![Rational::zero(); self.width];
        cost[..lp.num_vars].clone_from_slice(&lp.objective);
        // Rows whose artificial could not be pivoted out are redundant; a
        // zero cost keeps them inert.
        self.price(cost);
        if !self.iterate(self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let x = self.solution(lp.num_vars);
        let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}
