use super::{ChainError, SparseMatrix};

/// LU factorisation of a banded matrix without pivoting.
///
/// Intended for `I − Q` of an absorbing chain: a nonsingular M-matrix, for
/// which elimination without pivoting exists and stays inside the band.
/// A tridiagonal chain reduces to the Thomas algorithm.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds columns `i - kl ..= i + ku` at offsets `0 ..= kl + ku`.
    band: Vec<f64>,
}

impl BandedLu {
    /// Factorises `I − Q`.
    pub fn identity_minus(q: &SparseMatrix) -> Result<Self, ChainError> {
        let n = q.n_rows();
        let (kl, ku) = q.bandwidths();
        let width = kl + ku + 1;
        let mut band = vec![0.0; n * width];
        for (i, row) in q.rows.iter().enumerate() {
            band[i * width + kl] = 1.0;
            for &(j, p) in row {
                band[i * width + kl + j - i] -= p;
            }
        }
        let mut lu = Self { n, kl, ku, band };
        lu.factor()?;
        Ok(lu)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + self.kl + j - i
    }

    fn factor(&mut self) -> Result<(), ChainError> {
        let n = self.n;
        for k in 0..n {
            let pivot = self.band[self.idx(k, k)];
            if !pivot.is_finite() || pivot.abs() < 1e-14 {
                return Err(ChainError::Singular { row: k, pivot });
            }
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.ku).min(n - 1);
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let factor = self.band[ik] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.band[ik] = factor;
                for j in k + 1..=last_col {
                    let kj = self.band[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.band[ij] -= factor * kj;
                }
            }
        }
        Ok(())
    }

    /// Solves `(I − Q) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let first = i.saturating_sub(self.kl);
            let s: f64 = (first..i).map(|j| self.band[self.idx(i, j)] * b[j]).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let last = (i + self.ku).min(n - 1);
            let s: f64 = (i + 1..=last)
                .map(|j| self.band[self.idx(i, j)] * b[j])
                .sum();
            b[i] = (b[i] - s) / self.band[self.idx(i, i)];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse(dense: &[Vec<f64>]) -> SparseMatrix {
        SparseMatrix {
            n_cols: dense.len(),
            rows: dense
                .iter()
                .map(|r| {
                    r.iter()
                        .copied()
                        .enumerate()
                        .filter(|&(_, p)| p != 0.0)
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn solves_small_general_system() {
        // I - Q = [[0.5, -0.2, -0.1], [-0.3, 0.6, 0.0], [0.0, -0.4, 0.9]]
        let q = vec![
            vec![0.5, 0.2, 0.1],
            vec![0.3, 0.4, 0.0],
            vec![0.0, 0.4, 0.1],
        ];
        let lu = BandedLu::identity_minus(&sparse(&q)).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = lu.solve(&b);
        for i in 0..3 {
            let ax: f64 = (0..3)
                .map(|j| (if i == j { 1.0 } else { 0.0 } - q[i][j]) * x[j])
                .sum();
            assert!((ax - b[i]).abs() < 1e-12, "row {i}: {ax} vs {}", b[i]);
        }
        assert_eq!(lu.bandwidths(), (1, 2));
    }

    #[test]
    fn detects_singular_system() {
        // a closed class: rows sum to one inside Q
        let q = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        assert!(matches!(
            BandedLu::identity_minus(&sparse(&q)),
            Err(ChainError::Singular { .. })
        ));
    }
}
