//! Smith normal form of small integer matrices.

use nalgebra::DMatrix;

/// `p * m * q = diag(d)` with `p`, `q` unimodular and `d_i | d_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Smith {
    pub p: DMatrix<i64>,
    pub q: DMatrix<i64>,
    /// first `rank` entries nonzero and positive
    pub diagonal: Vec<i64>,
    pub rank: usize,
}

fn swap_rows(a: &mut DMatrix<i64>, i: usize, j: usize) {
    if i != j {
        a.swap_rows(i, j);
    }
}

fn swap_cols(a: &mut DMatrix<i64>, i: usize, j: usize) {
    if i != j {
        a.swap_columns(i, j);
    }
}

/// row_dst += s * row_src
fn add_row(a: &mut DMatrix<i64>, dst: usize, src: usize, s: i64) {
    for c in 0..a.ncols() {
        a[(dst, c)] += s * a[(src, c)];
    }
}

fn add_col(a: &mut DMatrix<i64>, dst: usize, src: usize, s: i64) {
    for r in 0..a.nrows() {
        a[(r, dst)] += s * a[(r, src)];
    }
}

pub fn smith_normal_form(m: &DMatrix<i64>) -> Smith {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut p = DMatrix::<i64>::identity(rows, rows);
    let mut q = DMatrix::<i64>::identity(cols, cols);
    let mut rank = 0;

    for t in 0..rows.min(cols) {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[(i, j)] != 0 && pivot.is_none_or(|(pi, pj)| a[(i, j)].abs() < a[(pi, pj)].abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return finish(a, p, q, rank);
            };
            swap_rows(&mut a, t, pi);
            swap_rows(&mut p, t, pi);
            swap_cols(&mut a, t, pj);
            swap_cols(&mut q, t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                let s = a[(i, t)] / a[(t, t)];
                add_row(&mut a, i, t, -s);
                add_row(&mut p, i, t, -s);
                clean &= a[(i, t)] == 0;
            }
            for j in t + 1..cols {
                let s = a[(t, j)] / a[(t, t)];
                add_col(&mut a, j, t, -s);
                add_col(&mut q, j, t, -s);
                clean &= a[(t, j)] == 0;
            }
            if !clean {
                continue;
            }
            let pivot = a[(t, t)];
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[(i, j)] % pivot != 0));
            match offender {
                Some(i) => {
                    add_row(&mut a, t, i, 1);
                    add_row(&mut p, t, i, 1);
                }
                None => break,
            }
        }
        if a[(t, t)] < 0 {
            for c in 0..cols {
                a[(t, c)] = -a[(t, c)];
            }
            for c in 0..rows {
                p[(t, c)] = -p[(t, c)];
            }
        }
        rank += 1;
    }
    finish(a, p, q, rank)
}

fn finish(a: DMatrix<i64>, p: DMatrix<i64>, q: DMatrix<i64>, rank: usize) -> Smith {
    let diagonal = (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).collect();
    Smith { p, q, diagonal, rank }
}
