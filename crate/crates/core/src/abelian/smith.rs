//! Smith normal form with unimodular transforms.
//!
//! `smith_decompose(M)` returns `U, S, V` with `U * M * V = S`, where `S` is
//! diagonal, its nonzero entries are positive and form a divisibility chain,
//! and zeros come last. The elimination is deterministic for a fixed input.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    /// Inverse of `u`, maintained alongside it.
    pub u_inv: IntMatrix,
}

impl SmithDecomposition {
    /// Diagonal of `S`, of length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols()))
            .map(|i| self.s[(i, i)].clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().take_while(|d| !d.is_zero()).count()
    }

    /// Basis of the integer kernel `{x : M x = 0}`, as columns of `V` past the rank.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        (self.rank()..self.v.cols()).map(|j| self.v.column(j)).collect()
    }

    /// Solves `M x = b` over the integers, returning one solution if any exists.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let y = self.u.mul_vec(b);
        let rank = self.rank();
        let mut z = vec![BigInt::zero(); self.v.cols()];
        for (i, yi) in y.iter().enumerate() {
            if i < rank {
                let (q, r) = yi.div_rem(&self.s[(i, i)]);
                if !r.is_zero() {
                    return None;
                }
                z[i] = q;
            } else if !yi.is_zero() {
                return None;
            }
        }
        Some(self.v.mul_vec(&z))
    }

    /// Checks the defining identities: `U M V = S`, unimodularity, and the diagonal chain.
    pub fn verify(&self, m: &IntMatrix) -> bool {
        if self.u.mul(m).mul(&self.v) != self.s || !self.s.is_diagonal() {
            return false;
        }
        if self.u.mul(&self.u_inv) != IntMatrix::identity(self.u.rows()) {
            return false;
        }
        if self.u.determinant().abs() != BigInt::one() || self.v.determinant().abs() != BigInt::one()
        {
            return false;
        }
        let diag = self.diagonal();
        let rank = self.rank();
        if diag[rank..].iter().any(|d| !d.is_zero()) {
            return false;
        }
        diag[..rank].iter().all(|d| d.is_positive())
            && diag[..rank].windows(2).all(|w| (&w[1] % &w[0]).is_zero())
    }
}

pub fn smith_decompose(m: &IntMatrix) -> SmithDecomposition {
    let rows = m.rows();
    let cols = m.cols();
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut u_inv = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            let Some((pi, pj)) = smallest_entry(&s, t) else {
                return SmithDecomposition { u, s, v, u_inv };
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            u_inv.swap_cols(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = -(&s[(i, t)] / &s[(t, t)]);
                s.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                u_inv.add_col_multiple(t, i, &-&q);
                clean &= s[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = -(&s[(t, j)] / &s[(t, t)]);
                s.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= s[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }

            // The pivot must divide the whole trailing block.
            let offending = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !(&s[(i, j)] % &s[(t, t)]).is_zero())
            });
            match offending {
                Some(i) => {
                    let one = BigInt::one();
                    s.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                    u_inv.add_col_multiple(i, t, &-&one);
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
    }
    SmithDecomposition { u, s, v, u_inv }
}

fn smallest_entry(s: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..s.rows() {
        for j in t..s.cols() {
            let x = &s[(i, j)];
            if x.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if s[(bi, bj)].abs() <= x.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_of(rows: &[Vec<i64>]) -> Vec<BigInt> {
        let m = IntMatrix::from_rows(rows);
        let d = smith_decompose(&m);
        assert!(d.verify(&m), "decomposition of {m} failed verification");
        d.diagonal()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn identity_is_fixed() {
        let m = IntMatrix::identity(2);
        let d = smith_decompose(&m);
        assert_eq!(d.s, IntMatrix::identity(2));
        assert_eq!(d.u, IntMatrix::identity(2));
        assert_eq!(d.v, IntMatrix::identity(2));
    }

    #[test]
    fn two_by_two_example() {
        assert_eq!(diag_of(&[vec![2, 4], vec![6, 8]]), ints(&[2, 4]));
    }

    #[test]
    fn zero_and_empty() {
        assert_eq!(diag_of(&[vec![0]]), ints(&[0]));
        let empty = IntMatrix::zeros(0, 3);
        let d = smith_decompose(&empty);
        assert!(d.verify(&empty));
        assert_eq!(d.v, IntMatrix::identity(3));
        assert_eq!(d.kernel_basis().len(), 3);
    }

    #[test]
    fn non_coprime_pivot_is_fixed_up() {
        // diag(2,3) must become diag(1,6).
        assert_eq!(diag_of(&[vec![2, 0], vec![0, 3]]), ints(&[1, 6]));
        assert_eq!(diag_of(&[vec![4, 0, 0], vec![0, 6, 0], vec![0, 0, 0]]), ints(&[2, 12, 0]));
    }

    #[test]
    fn solve_and_kernel() {
        let m = IntMatrix::from_rows(&[vec![1, 4]]);
        let d = smith_decompose(&m);
        let ker = d.kernel_basis();
        assert_eq!(ker.len(), 1);
        assert!(m.mul_vec(&ker[0]).iter().all(Zero::is_zero));
        let x = d.solve(&ints(&[7])).unwrap();
        assert_eq!(m.mul_vec(&x), ints(&[7]));

        let m = IntMatrix::from_rows(&[vec![2, 0], vec![0, 4]]);
        let d = smith_decompose(&m);
        assert!(d.solve(&ints(&[1, 0])).is_none());
        let x = d.solve(&ints(&[2, 8])).unwrap();
        assert_eq!(m.mul_vec(&x), ints(&[2, 8]));
    }
}
