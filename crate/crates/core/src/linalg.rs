//! Dense linear algebra over `F_q` and the Sylvester-minor layout shared by
//! the univariate and multivariate resultant code.

use num_bigint::BigUint;

use crate::gf::{FieldElement, FieldSpec};

/// Reduces `m` to row echelon form in place and returns its rank.
pub fn row_reduce(field: &FieldSpec, m: &mut [Vec<FieldElement>]) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = field.inv(m[rank][col]).expect("pivot is nonzero");
        for c in col..cols {
            m[rank][c] = field.mul(m[rank][c], inv);
        }
        for r in 0..rows {
            if r == rank || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col];
            for c in col..cols {
                let t = field.mul(factor, m[rank][c]);
                m[r][c] = field.sub(m[r][c], t);
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

pub fn rank(field: &FieldSpec, m: &[Vec<FieldElement>]) -> usize {
    let mut work = m.to_vec();
    row_reduce(field, &mut work)
}

/// Determinant of a square matrix; the empty matrix has determinant 1.
pub fn det(field: &FieldSpec, m: &[Vec<FieldElement>]) -> FieldElement {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "determinant of a non-square matrix");
    let mut a = m.to_vec();
    let mut acc = FieldElement::ONE;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return FieldElement::ZERO;
        };
        if pivot != col {
            a.swap(pivot, col);
            acc = field.neg(acc);
        }
        let lead = a[col][col];
        acc = field.mul(acc, lead);
        let inv = field.inv(lead).expect("pivot is nonzero");
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = field.mul(a[r][col], inv);
            for c in col..n {
                let t = field.mul(factor, a[col][c]);
                a[r][c] = field.sub(a[r][c], t);
            }
        }
    }
    acc
}

/// Number of solutions in `F_q^cols` of `a·x = rhs`: zero when inconsistent,
/// otherwise `q^(cols − rank a)`.
pub fn solution_count(field: &FieldSpec, a: &[Vec<FieldElement>], rhs: &[FieldElement]) -> BigUint {
    assert_eq!(a.len(), rhs.len());
    let cols = a.first().map_or(0, |r| r.len());
    let r = rank(field, a);
    let augmented: Vec<Vec<FieldElement>> = a
        .iter()
        .zip(rhs)
        .map(|(row, &c)| {
            let mut row = row.clone();
            row.push(c);
            row
        })
        .collect();
    if rank(field, &augmented) > r {
        return BigUint::from(0u32);
    }
    BigUint::from(field.q()).pow((cols - r) as u32)
}

/// Square matrix whose determinant is the `j`-th principal subresultant
/// coefficient of `f` and `g`, given low-to-high coefficient slices of formal
/// degrees `m = f.len() − 1` and `n = g.len() − 1`.
///
/// The block has `n − j` shifted copies of `f` followed by `m − j` shifted
/// copies of `g`, truncated to the first `m + n − 2j` columns. Returns `None`
/// when `j > min(m, n)`.
pub fn sylvester_minor<T: Clone>(f: &[T], g: &[T], j: usize, zero: &T) -> Option<Vec<Vec<T>>> {
    assert!(!f.is_empty() && !g.is_empty());
    let (m, n) = (f.len() - 1, g.len() - 1);
    if j > m.min(n) {
        return None;
    }
    let size = m + n - 2 * j;
    let mut rows = Vec::with_capacity(size);
    let mut push_shifts = |p: &[T], count: usize| {
        for shift in 0..count {
            let mut row = vec![zero.clone(); size];
            for (i, c) in p.iter().rev().enumerate() {
                let col = shift + i;
                if col < size {
                    row[col] = c.clone();
                }
            }
            rows.push(row);
        }
    };
    push_shifts(f, n - j);
    push_shifts(g, m - j);
    Some(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;

    fn mat(field: &FieldSpec, rows: &[&[i64]]) -> Vec<Vec<FieldElement>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| field.from_int(x)).collect())
            .collect()
    }

    #[test]
    fn det_and_rank_small() {
        let f7 = make_field(7, 1, None).unwrap();
        let m = mat(&f7, &[&[1, 2], &[3, 4]]);
        assert_eq!(det(&f7, &m), f7.from_int(-2));
        assert_eq!(rank(&f7, &m), 2);
        let singular = mat(&f7, &[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(det(&f7, &singular), FieldElement::ZERO);
        assert_eq!(rank(&f7, &singular), 2);
        assert_eq!(det(&f7, &[]), FieldElement::ONE);
    }

    #[test]
    fn solution_counts() {
        let f5 = make_field(5, 1, None).unwrap();
        let a = mat(&f5, &[&[1, 1, 0]]);
        assert_eq!(solution_count(&f5, &a, &[f5.from_int(3)]), BigUint::from(25u32));
        let b = mat(&f5, &[&[1, 1], &[2, 2]]);
        let rhs = [f5.from_int(1), f5.from_int(3)];
        assert_eq!(solution_count(&f5, &b, &rhs), BigUint::from(0u32));
    }

    #[test]
    fn sylvester_layout() {
        // f = 1 + 2T + 3T^2, g = 4 + 5T
        let m = sylvester_minor(&[1, 2, 3], &[4, 5], 0, &0).unwrap();
        assert_eq!(m, vec![vec![3, 2, 1], vec![5, 4, 0], vec![0, 5, 4]]);
        let m1 = sylvester_minor(&[1, 2, 3], &[4, 5], 1, &0).unwrap();
        assert_eq!(m1, vec![vec![5]]);
        assert!(sylvester_minor(&[1, 2, 3], &[4, 5], 2, &0).is_none());
    }
}
