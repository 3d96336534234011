//! Dense two-phase simplex for the small linear programs used here
//! (Chebyshev centers, support evaluation in higher dimension, spanning tests).

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

const PIVOT_TOL: f64 = 1e-12;

/// Solution of `minimize c.x subject to A x <= b` with `x` free.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: DVector<f64>,
    pub value: f64,
}

/// Minimize `c.x` subject to `a x <= b`, `x` unrestricted in sign.
pub fn minimize(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LpSolution> {
    let (m, d) = a.shape();
    assert_eq!(c.len(), d);
    assert_eq!(b.len(), m);

    // Standard form over y = [x+, x-, s] >= 0:  A x+ - A x- + s = b.
    let n_struct = 2 * d + m;
    let neg_rows: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = neg_rows.len();
    let ncol = n_struct + n_art;

    // tableau rows 0..m constraints, row m objective (phase specific)
    let mut t = DMatrix::<f64>::zeros(m + 1, ncol + 1);
    let mut basis = vec![0usize; m];
    let mut art_of_row = vec![usize::MAX; m];
    for (k, &i) in neg_rows.iter().enumerate() {
        art_of_row[i] = n_struct + k;
    }
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            t[(i, j)] = sign * a[(i, j)];
            t[(i, d + j)] = -sign * a[(i, j)];
        }
        t[(i, 2 * d + i)] = sign;
        t[(i, ncol)] = sign * b[i];
        if art_of_row[i] != usize::MAX {
            t[(i, art_of_row[i])] = 1.0;
            basis[i] = art_of_row[i];
        } else {
            basis[i] = 2 * d + i;
        }
    }

    if n_art > 0 {
        // Phase 1: minimize the sum of artificials.
        let mut cost = DVector::<f64>::zeros(ncol);
        for k in 0..n_art {
            cost[n_struct + k] = 1.0;
        }
        set_objective(&mut t, &basis, &cost);
        run(&mut t, &mut basis, ncol)?;
        if -t[(m, ncol)] > 1e-9 * (1.0 + b.amax()) {
            return Err(GeomError::Infeasible);
        }
        // Drive remaining artificials out of the basis.
        for i in 0..m {
            if basis[i] >= n_struct {
                if let Some(j) = (0..n_struct).find(|&j| t[(i, j)].abs() > 1e-9) {
                    pivot(&mut t, &mut basis, i, j);
                }
            }
        }
        for k in 0..n_art {
            let col = n_struct + k;
            for i in 0..=m {
                t[(i, col)] = 0.0;
            }
        }
    }

    let mut cost = DVector::<f64>::zeros(ncol);
    for j in 0..d {
        cost[j] = c[j];
        cost[d + j] = -c[j];
    }
    set_objective(&mut t, &basis, &cost);
    run(&mut t, &mut basis, n_struct)?;

    let mut y = DVector::<f64>::zeros(ncol);
    for (i, &bi) in basis.iter().enumerate() {
        y[bi] = t[(i, ncol)];
    }
    let x = DVector::from_fn(d, |j, _| y[j] - y[d + j]);
    let value = c.dot(&x);
    Ok(LpSolution { x, value })
}

/// Maximize `c.x` subject to `a x <= b`.
pub fn maximize(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LpSolution> {
    let neg = -c;
    let mut sol = minimize(&neg, a, b)?;
    sol.value = -sol.value;
    Ok(sol)
}

fn set_objective(t: &mut DMatrix<f64>, basis: &[usize], cost: &DVector<f64>) {
    let m = basis.len();
    let ncol = t.ncols() - 1;
    for j in 0..ncol {
        t[(m, j)] = cost[j];
    }
    t[(m, ncol)] = 0.0;
    for (i, &bi) in basis.iter().enumerate() {
        let cb = cost[bi];
        if cb != 0.0 {
            for j in 0..=ncol {
                let v = t[(i, j)];
                t[(m, j)] -= cb * v;
            }
        }
    }
}

/// Bland's rule iterations restricted to the first `active_cols` columns.
fn run(t: &mut DMatrix<f64>, basis: &mut [usize], active_cols: usize) -> Result<()> {
    let m = basis.len();
    let rhs = t.ncols() - 1;
    let max_iter = 50 * (m + active_cols) + 1000;
    for _ in 0..max_iter {
        let Some(enter) = (0..active_cols).find(|&j| t[(m, j)] < -PIVOT_TOL) else {
            return Ok(());
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let aij = t[(i, enter)];
            if aij > PIVOT_TOL {
                let ratio = t[(i, rhs)] / aij;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return Err(GeomError::Unbounded);
        };
        pivot(t, basis, row, enter);
    }
    Err(GeomError::InvalidInput("simplex iteration limit reached".into()))
}

fn pivot(t: &mut DMatrix<f64>, basis: &mut [usize], row: usize, col: usize) {
    let p = t[(row, col)];
    let ncols = t.ncols();
    for j in 0..ncols {
        t[(row, j)] /= p;
    }
    for i in 0..t.nrows() {
        if i != row {
            let f = t[(i, col)];
            if f != 0.0 {
                for j in 0..ncols {
                    let v = t[(row, j)];
                    t[(i, j)] -= f * v;
                }
            }
        }
    }
    basis[row] = col;
}
