//! Small exact linear algebra over `Rational`.

use crate::rational::Rational;

/// Row-reduces `rows` in place and returns the rank.
fn eliminate(rows: &mut [Vec<Rational>], cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][c].recip();
        for x in rows[rank].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let f = rows[r][c].clone();
                for j in 0..rows[r].len() {
                    let d = &f * &rows[rank][j];
                    rows[r][j] -= d;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    eliminate(&mut rows.to_vec(), cols)
}

/// Unique solution of the square system `a x = b`, if `a` is nonsingular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    if eliminate(&mut aug, n) < n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

/// The unique solution of a consistent system `a x = b` whose matrix has
/// full column rank; `None` otherwise.
pub fn solve_full_column_rank(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let rank = eliminate(&mut aug, cols);
    if rank < cols || aug[rank..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some(aug[..cols].iter().map(|r| r[cols].clone()).collect())
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
