//! Dense matrices over `K`, stored row-major.

use crate::error::{Error, Result};
use crate::ring::{Base, LocalFieldElem};

pub type Mat = Vec<Vec<LocalFieldElem>>;

pub fn identity(base: Base, n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { base.one() } else { base.zero() }).collect())
        .collect()
}

pub fn zeros(base: Base, rows: usize, cols: usize) -> Mat {
    vec![vec![base.zero(); cols]; rows]
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            debug_assert_eq!(row.len(), inner);
            (0..cols)
                .map(|j| {
                    let mut acc = row[0].base().zero();
                    for (k, x) in row.iter().enumerate() {
                        if x.is_zero() || b[k][j].is_zero() {
                            continue;
                        }
                        acc = &acc + &(x * &b[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Upper-left `k x k` block.
pub fn leading_block(a: &Mat, k: usize) -> Mat {
    a.iter().take(k).map(|r| r[..k].to_vec()).collect()
}

pub fn det(a: &Mat) -> LocalFieldElem {
    let n = a.len();
    let base = a[0][0].base();
    let mut m = a.clone();
    let mut acc = base.one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return base.zero();
        };
        if piv != col {
            m.swap(piv, col);
            acc = -acc;
        }
        acc = &acc * &m[col][col];
        let inv = m[col][col].inv().expect("pivot is nonzero");
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] = &m[r][c] - &t;
            }
        }
    }
    acc
}

pub fn inverse(a: &Mat) -> Result<Mat> {
    let n = a.len();
    let base = a[0][0].base();
    let mut m: Mat = a
        .iter()
        .zip(identity(base, n))
        .map(|(r, id)| r.iter().cloned().chain(id).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::Domain("singular matrix".into()))?;
        m.swap(piv, col);
        let inv = m[col][col].inv()?;
        for x in m[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..2 * n {
                let t = &f * &m[col][c];
                m[r][c] = &m[r][c] - &t;
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..].to_vec()).collect())
}
