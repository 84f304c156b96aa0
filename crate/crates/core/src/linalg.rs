//! Small dense linear algebra over expressions and floats.

use hjfield_expr::{simplify, Expr, ZeroTest};

/// Columns that carry a pivot after row reduction with partial pivoting.
/// Entries below `tol * max(1, max |a_ij|)` count as zero.
pub fn pivot_columns(matrix: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let scale = a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let eps = tol * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= eps {
            continue;
        }
        a.swap(r, best);
        for i in r + 1..rows {
            let f = a[i][c] / a[r][c];
            if f != 0.0 {
                for j in c..cols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solve `m x = rhs` by Gaussian elimination over expressions. Pivots are
/// the first entries at or below the diagonal that the zero test does not
/// certify as zero. Returns the first column without a usable pivot on
/// failure.
pub fn solve(m: &[Vec<Expr>], rhs: &[Expr], zt: &ZeroTest) -> Result<Vec<Expr>, usize> {
    let n = rhs.len();
    let mut a: Vec<Vec<Expr>> = m.to_vec();
    let mut b: Vec<Expr> = rhs.to_vec();
    for k in 0..n {
        let pivot = (k..n).find(|&i| !a[i][k].is_zero() && !zt.check(&a[i][k]).is_zero());
        let Some(p) = pivot else {
            return Err(k);
        };
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = simplify(&(&a[i][k] / &a[k][k]));
            for j in k..n {
                if !a[k][j].is_zero() {
                    a[i][j] = simplify(&(&a[i][j] - &f * &a[k][j]));
                }
            }
            b[i] = simplify(&(&b[i] - &f * &b[k]));
        }
    }
    let mut x = vec![Expr::zero(); n];
    for k in (0..n).rev() {
        let mut acc = b[k].clone();
        for j in k + 1..n {
            if !a[k][j].is_zero() {
                acc = acc - &a[k][j] * &x[j];
            }
        }
        x[k] = simplify(&(acc / &a[k][k]));
    }
    Ok(x)
}
