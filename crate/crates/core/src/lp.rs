//! Exact linear feasibility.
//!
//! [`solve_feasibility`] runs Phase I of the two-phase simplex method over
//! exact rationals, each row first scaled to coprime integers. When the artificial objective ends
//! positive, the final simplex multipliers are a Farkas certificate: a vector
//! `y` with `y_r >= 0` on `>=` rows, `(yA)_j <= 0` on nonnegative variables,
//! `(yA)_j = 0` on free variables, and `y.b > 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `coeffs . x >= rhs`
    Ge,
    /// `coeffs . x = rhs`
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub rows: Vec<Row>,
    pub nonneg: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityOutcome {
    Feasible(Vec<Rational>),
    /// One multiplier per row.
    Infeasible(Vec<Rational>),
}

impl LinearSystem {
    pub fn new(num_vars: usize, nonneg: Vec<bool>) -> Self {
        LinearSystem {
            num_vars,
            rows: Vec::new(),
            nonneg,
        }
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, sense: Sense, rhs: Rational) {
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn validate(&self) -> Result<()> {
        if self.nonneg.len() != self.num_vars {
            return Err(Error::MalformedSystem(format!(
                "nonnegativity mask has {} entries for {} variables",
                self.nonneg.len(),
                self.num_vars
            )));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != self.num_vars {
                return Err(Error::MalformedSystem(format!(
                    "row {r} has {} coefficients for {} variables",
                    row.coeffs.len(),
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    fn row_value(&self, r: usize, x: &[Rational]) -> Rational {
        self.rows[r]
            .coeffs
            .iter()
            .zip(x)
            .filter(|(a, _)| !a.is_zero())
            .map(|(a, v)| a * v)
            .sum()
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        if x.iter().zip(&self.nonneg).any(|(v, &nn)| nn && v.is_negative()) {
            return false;
        }
        (0..self.rows.len()).all(|r| {
            let lhs = self.row_value(r, x);
            match self.rows[r].sense {
                Sense::Ge => lhs >= self.rows[r].rhs,
                Sense::Eq => lhs == self.rows[r].rhs,
            }
        })
    }

    /// True iff `y` is an exact proof that no `x` satisfies the system.
    pub fn is_farkas_certificate(&self, y: &[Rational]) -> bool {
        if y.len() != self.rows.len() {
            return false;
        }
        for (row, m) in self.rows.iter().zip(y) {
            if row.sense == Sense::Ge && m.is_negative() {
                return false;
            }
        }
        for j in 0..self.num_vars {
            let combined: Rational = self
                .rows
                .iter()
                .zip(y)
                .filter(|(row, m)| !m.is_zero() && !row.coeffs[j].is_zero())
                .map(|(row, m)| m * &row.coeffs[j])
                .sum();
            let ok = if self.nonneg[j] {
                !combined.is_positive()
            } else {
                combined.is_zero()
            };
            if !ok {
                return false;
            }
        }
        let yb: Rational = self.rows.iter().zip(y).map(|(row, m)| m * &row.rhs).sum();
        yb.is_positive()
    }
}

pub fn verify_outcome(sys: &LinearSystem, out: &FeasibilityOutcome) -> bool {
    if sys.validate().is_err() {
        return false;
    }
    match out {
        FeasibilityOutcome::Feasible(x) => sys.is_satisfied_by(x),
        FeasibilityOutcome::Infeasible(y) => sys.is_farkas_certificate(y),
    }
}

enum Column {
    /// `+x_j` or, when `negated`, `-x_j` (second half of a free variable).
    Var { var: usize, negated: bool },
    /// Surplus of a `>=` row, coefficient `-1`.
    Surplus,
    Artificial { row: usize },
}

/// Integer-preserving tableau: the rational tableau is `rows / det` and
/// `cost / det`, where `det > 0` is the previous pivot element. Each update
/// divides exactly by the old `det`, so no gcds are ever taken.
struct Tableau {
    /// `m` rows of `ncols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<BigInt>>,
    /// Reduced costs followed by minus the objective value.
    cost: Vec<BigInt>,
    det: BigInt,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let p = pivot_row[c].clone();
        let det = std::mem::replace(&mut self.det, p.clone());
        let nz: Vec<usize> = (0..=self.ncols).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |target: &mut Vec<BigInt>| {
            let factor = target[c].clone();
            if factor.is_zero() {
                for v in target.iter_mut().filter(|v| !v.is_zero()) {
                    *v = &*v * &p / &det;
                }
                return;
            }
            for v in target.iter_mut().filter(|v| !v.is_zero()) {
                *v *= &p;
            }
            for &j in &nz {
                target[j] -= &factor * &pivot_row[j];
            }
            for v in target.iter_mut().filter(|v| !v.is_zero()) {
                *v /= &det;
            }
        };
        for row in self.rows.iter_mut() {
            if !row.is_empty() {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Dantzig pricing (most negative reduced cost) while pivots make
    /// progress; after a degenerate pivot, Bland's rule until the objective
    /// moves again. A cycle consists of degenerate pivots only, and Bland's
    /// rule cannot cycle, so the loop terminates.
    fn run(&mut self) {
        let mut bland = false;
        loop {
            let enter = if bland {
                (0..self.ncols).find(|&j| self.cost[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..self.ncols {
                    if self.cost[j].is_negative() && best.is_none_or(|b| self.cost[j] < self.cost[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(enter) = enter else {
                return;
            };
            // ratio rhs_i / a_i, compared by cross-multiplication (a_i > 0)
            let mut leave: Option<usize> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let best = &self.rows[l];
                        let lhs = &row[self.ncols] * &best[enter];
                        let rhs = &best[self.ncols] * &row[enter];
                        lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[l])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
            // Phase I is bounded below by zero, so a leaving row always exists.
            let r = leave.expect("phase I objective is bounded");
            bland = self.rows[r][self.ncols].is_zero();
            self.pivot(r, enter);
        }
    }

    fn value(&self, v: &BigInt) -> Rational {
        Rational::new(v.clone(), self.det.clone())
    }
}

/// Positive factor turning `row` into coprime integers.
fn integer_scale(row: &Row) -> Rational {
    let entries = || row.coeffs.iter().chain(std::iter::once(&row.rhs));
    let den = entries().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let num = entries().fold(BigInt::zero(), |acc, v| acc.gcd(&(v.numer() * &den / v.denom())));
    if num.is_zero() {
        Rational::one()
    } else {
        Rational::new(den, num)
    }
}

pub fn solve_feasibility(sys: &LinearSystem) -> Result<FeasibilityOutcome> {
    sys.validate()?;
    let m = sys.rows.len();

    let mut columns = Vec::new();
    for j in 0..sys.num_vars {
        columns.push(Column::Var { var: j, negated: false });
        if !sys.nonneg[j] {
            columns.push(Column::Var { var: j, negated: true });
        }
    }
    let mut surplus_of = vec![None; m];
    for (r, row) in sys.rows.iter().enumerate() {
        if row.sense == Sense::Ge {
            surplus_of[r] = Some(columns.len());
            columns.push(Column::Surplus);
        }
    }
    let first_artificial = columns.len();
    columns.extend((0..m).map(|row| Column::Artificial { row }));
    let ncols = columns.len();

    // Rows are scaled to coprime integers, then negated where needed so every
    // right-hand side is nonnegative.
    let flip: Vec<bool> = sys.rows.iter().map(|row| row.rhs.is_negative()).collect();
    let scale: Vec<Rational> = sys.rows.iter().map(integer_scale).collect();
    let mut rows = Vec::with_capacity(m);
    for (r, row) in sys.rows.iter().enumerate() {
        let sign = if flip[r] { -Rational::one() } else { Rational::one() };
        let factor = &scale[r] * &sign;
        let whole = |v: &Rational| (v * &factor).to_integer();
        let mut t = vec![BigInt::zero(); ncols + 1];
        for (c, col) in columns.iter().enumerate() {
            t[c] = match col {
                Column::Var { var, negated } => {
                    let a = whole(&row.coeffs[*var]);
                    if *negated { -a } else { a }
                }
                Column::Surplus if surplus_of[r] == Some(c) => {
                    if flip[r] { BigInt::one() } else { -BigInt::one() }
                }
                Column::Artificial { row: ar } if *ar == r => BigInt::one(),
                _ => continue,
            };
        }
        t[ncols] = whole(&row.rhs);
        rows.push(t);
    }

    // Reduced costs of the artificial objective with the artificial basis.
    let mut cost = vec![BigInt::zero(); ncols + 1];
    for c in &mut cost[first_artificial..ncols] {
        *c = BigInt::one();
    }
    for row in &rows {
        for (c, v) in row.iter().enumerate() {
            if !v.is_zero() {
                cost[c] -= v;
            }
        }
    }

    let mut tab = Tableau {
        rows,
        cost,
        det: BigInt::one(),
        basis: (first_artificial..ncols).collect(),
        ncols,
    };
    tab.run();

    if tab.cost[ncols].is_negative() {
        // Multiplier of standardized row r is 1 - (reduced cost of its artificial),
        // mapped back through the row's scaling and sign.
        let y = (0..m)
            .map(|r| {
                let pi = Rational::one() - tab.value(&tab.cost[first_artificial + r]);
                let pi = pi * &scale[r];
                if flip[r] { -pi } else { pi }
            })
            .collect();
        return Ok(FeasibilityOutcome::Infeasible(y));
    }

    let mut x = vec![Rational::zero(); sys.num_vars];
    for (r, &b) in tab.basis.iter().enumerate() {
        if let Column::Var { var, negated } = columns[b] {
            let v = tab.value(&tab.rows[r][ncols]);
            if negated {
                x[var] -= v;
            } else {
                x[var] += v;
            }
        }
    }
    Ok(FeasibilityOutcome::Feasible(x))
}
