//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Problems are `maximize c·x` over `x ≥ 0` subject to linear rows. Sizes are
//! tiny (tens of variables, a few hundred rows), so the full tableau is kept.

const PIVOT_TOLERANCE: f64 = 1e-10;
const COST_TOLERANCE: f64 = 1e-11;
const FEASIBILITY_TOLERANCE: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
    /// Pivot cap reached; does not happen with Bland's rule short of numerical trouble.
    Stalled,
}

struct Tableau {
    /// `rows[i]` has `ncols + 1` entries, the last being the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

enum RunResult {
    Optimal,
    Unbounded,
    Stalled,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.ncols]
    }

    /// Maximize `obj · x` over the columns allowed by `allowed`.
    fn run(&mut self, obj: &[f64], allowed: &dyn Fn(usize) -> bool) -> RunResult {
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index column with positive reduced cost.
            let entering = (0..self.ncols).filter(|&j| allowed(j)).find(|&j| {
                let z: f64 = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .map(|(row, &b)| obj[b] * row[j])
                    .sum();
                obj[j] - z > COST_TOLERANCE
            });
            let Some(c) = entering else {
                return RunResult::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > PIVOT_TOLERANCE {
                    let ratio = self.rhs(i) / row[c];
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return RunResult::Unbounded,
            }
        }
        RunResult::Stalled
    }
}

/// Solve `maximize c·x` subject to `rows` and `x ≥ 0`.
pub fn maximize(c: &[f64], rows: &[Row]) -> LpOutcome {
    let nv = c.len();
    // Right-hand sides made nonnegative.
    let rows: Vec<Row> = rows
        .iter()
        .map(|r| {
            if r.rhs < 0.0 {
                Row {
                    coeffs: r.coeffs.iter().map(|v| -v).collect(),
                    sense: match r.sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    },
                    rhs: -r.rhs,
                }
            } else {
                r.clone()
            }
        })
        .collect();
    let n_slack = rows.iter().filter(|r| r.sense != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.sense != Sense::Le).count();
    let ncols = nv + n_slack + n_art;
    let art_start = nv + n_slack;

    let mut t = Tableau {
        rows: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        ncols,
    };
    let (mut s, mut a) = (nv, art_start);
    for r in &rows {
        let mut row = vec![0.0; ncols + 1];
        row[..nv].copy_from_slice(&r.coeffs);
        row[ncols] = r.rhs;
        match r.sense {
            Sense::Le => {
                row[s] = 1.0;
                t.basis.push(s);
                s += 1;
            }
            Sense::Ge => {
                row[s] = -1.0;
                row[a] = 1.0;
                t.basis.push(a);
                s += 1;
                a += 1;
            }
            Sense::Eq => {
                row[a] = 1.0;
                t.basis.push(a);
                a += 1;
            }
        }
        t.rows.push(row);
    }

    if n_art > 0 {
        let phase1: Vec<f64> = (0..ncols).map(|j| if j >= art_start { -1.0 } else { 0.0 }).collect();
        match t.run(&phase1, &|_| true) {
            RunResult::Optimal => {}
            RunResult::Unbounded => return LpOutcome::Unbounded,
            RunResult::Stalled => return LpOutcome::Stalled,
        }
        let infeas: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_start)
            .map(|(i, _)| t.rhs(i))
            .sum();
        if infeas > FEASIBILITY_TOLERANCE {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| t.rows[i][j].abs() > PIVOT_TOLERANCE) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut obj = vec![0.0; ncols];
    obj[..nv].copy_from_slice(c);
    match t.run(&obj, &|j| j < art_start) {
        RunResult::Optimal => {}
        RunResult::Unbounded => return LpOutcome::Unbounded,
        RunResult::Stalled => return LpOutcome::Stalled,
    }
    let mut x = vec![0.0; nv];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < nv {
            x[b] = t.rhs(i).max(0.0);
        }
    }
    let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[f64], sense: Sense, rhs: f64) -> Row {
        Row {
            coeffs: coeffs.to_vec(),
            sense,
            rhs,
        }
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let out = maximize(
            &[3.0, 5.0],
            &[
                row(&[1.0, 0.0], Sense::Le, 4.0),
                row(&[0.0, 2.0], Sense::Le, 12.0),
                row(&[3.0, 2.0], Sense::Le, 18.0),
            ],
        );
        match out {
            LpOutcome::Optimal { x, value } => {
                assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
                assert!((value - 36.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equalities_and_lower_bounds() {
        // max x − y, x + y = 2, y ≥ 0.5 → (1.5, 0.5)
        let out = maximize(
            &[1.0, -1.0],
            &[row(&[1.0, 1.0], Sense::Eq, 2.0), row(&[0.0, 1.0], Sense::Ge, 0.5)],
        );
        assert_eq!(out, LpOutcome::Optimal { x: vec![1.5, 0.5], value: 1.0 });
    }

    #[test]
    fn infeasible_and_unbounded() {
        assert_eq!(
            maximize(&[1.0], &[row(&[1.0], Sense::Le, 1.0), row(&[1.0], Sense::Ge, 2.0)]),
            LpOutcome::Infeasible
        );
        assert_eq!(maximize(&[1.0, 0.0], &[row(&[0.0, 1.0], Sense::Le, 1.0)]), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let out = maximize(
            &[1.0, 1.0],
            &[
                row(&[1.0, 1.0], Sense::Eq, 1.0),
                row(&[2.0, 2.0], Sense::Eq, 2.0),
                row(&[0.0, 0.0], Sense::Eq, 0.0),
            ],
        );
        match out {
            LpOutcome::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
