//! Dense two-phase tableau simplex for small linear programs:
//! maximize `c·x` subject to `A_eq x = b_eq`, `A_le x <= b_le`, `x >= 0`,
//! with all right-hand sides non-negative.

const EPS: f64 = 1e-9;
/// Degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    /// Sparse rows: `(column, coefficient)` pairs.
    pub eq: Vec<(Vec<(usize, f64)>, f64)>,
    pub le: Vec<(Vec<(usize, f64)>, f64)>,
}

struct Tableau {
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    rows: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    /// The objective row is stored after the constraint rows.
    fn obj(&self, c: usize) -> f64 {
        self.at(self.rows, c)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let piv = self.cells[row * w + col];
        for c in 0..w {
            self.cells[row * w + c] /= piv;
        }
        let pivot_row: Vec<f64> = self.cells[row * w..(row + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == row {
                continue;
            }
            let factor = self.cells[r * w + col];
            if factor.abs() < 1e-15 {
                continue;
            }
            let dst = &mut self.cells[r * w..(r + 1) * w];
            for (d, p) in dst.iter_mut().zip(&pivot_row) {
                *d -= factor * p;
            }
            dst[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on the current objective row; columns with
    /// `blocked[c]` never enter. Returns false if unbounded.
    fn optimize(&mut self, blocked: &[bool]) -> bool {
        let cols = self.width - 1;
        let mut degenerate = 0;
        loop {
            let bland = degenerate > DEGENERATE_LIMIT;
            let mut enter = None;
            let mut best = -EPS;
            for c in 0..cols {
                if blocked[c] {
                    continue;
                }
                let d = self.obj(c);
                if d < best {
                    enter = Some(c);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(col) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, col);
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - EPS
                                || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return false;
            };
            if ratio.abs() <= EPS {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(row, col);
        }
    }
}

impl LinearProgram {
    pub fn solve(&self) -> LpOutcome {
        let n = self.num_vars;
        let m_eq = self.eq.len();
        let m_le = self.le.len();
        let rows = m_eq + m_le;
        let slack0 = n;
        let art0 = n + m_le;
        let cols = n + m_le + m_eq;
        let width = cols + 1;
        let mut t = Tableau {
            width,
            cells: vec![0.0; (rows + 1) * width],
            basis: vec![0; rows],
            rows,
        };
        for (i, (row, b)) in self.eq.iter().enumerate() {
            debug_assert!(*b >= 0.0);
            for &(c, v) in row {
                t.cells[i * width + c] += v;
            }
            t.cells[i * width + art0 + i] = 1.0;
            t.cells[i * width + cols] = *b;
            t.basis[i] = art0 + i;
        }
        for (j, (row, b)) in self.le.iter().enumerate() {
            debug_assert!(*b >= 0.0);
            let i = m_eq + j;
            for &(c, v) in row {
                t.cells[i * width + c] += v;
            }
            t.cells[i * width + slack0 + j] = 1.0;
            t.cells[i * width + cols] = *b;
            t.basis[i] = slack0 + j;
        }

        // Phase 1: maximize -sum(artificials).
        let obj = rows * width;
        for i in 0..m_eq {
            t.cells[obj + art0 + i] = 1.0;
        }
        for i in 0..m_eq {
            for c in 0..width {
                t.cells[obj + c] -= t.cells[i * width + c];
            }
        }
        let none_blocked = vec![false; cols];
        t.optimize(&none_blocked);
        if t.cells[obj + cols] < -1e-7 {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..rows {
            if t.basis[r] >= art0 {
                if let Some(c) = (0..art0).find(|&c| t.at(r, c).abs() > 1e-7) {
                    t.pivot(r, c);
                }
            }
        }

        // Phase 2.
        let mut blocked = vec![false; cols];
        blocked[art0..].iter_mut().for_each(|b| *b = true);
        for c in 0..width {
            t.cells[obj + c] = 0.0;
        }
        for (c, &v) in self.objective.iter().enumerate() {
            t.cells[obj + c] = -v;
        }
        for r in 0..rows {
            let b = t.basis[r];
            let cb = if b < n { self.objective[b] } else { 0.0 };
            if cb != 0.0 {
                for c in 0..width {
                    t.cells[obj + c] += cb * t.cells[r * width + c];
                }
            }
        }
        if !t.optimize(&blocked) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![0.0; n];
        for r in 0..rows {
            if t.basis[r] < n {
                x[t.basis[r]] = t.rhs(r);
            }
        }
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram) -> (Vec<f64>, f64) {
        match lp.solve() {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn textbook_program() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![3.0, 5.0],
            eq: vec![],
            le: vec![
                (vec![(0, 1.0)], 4.0),
                (vec![(1, 2.0)], 12.0),
                (vec![(0, 3.0), (1, 2.0)], 18.0),
            ],
        };
        let (x, v) = optimal(&lp);
        assert!((v - 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_constraints_and_infeasibility() {
        // max -x - 2y with x + y = 1 -> x = 1
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![-1.0, -2.0],
            eq: vec![(vec![(0, 1.0), (1, 1.0)], 1.0)],
            le: vec![],
        };
        let (x, v) = optimal(&lp);
        assert!((v + 1.0).abs() < 1e-9 && (x[0] - 1.0).abs() < 1e-9);

        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![1.0],
            eq: vec![(vec![(0, 1.0)], 2.0)],
            le: vec![(vec![(0, 1.0)], 1.0)],
        };
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_program() {
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![1.0],
            ..Default::default()
        };
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }
}
