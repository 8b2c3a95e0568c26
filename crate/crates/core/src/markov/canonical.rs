use super::{AbsorbingChain, ChainError};

/// Row-sparse matrix used for the `Q` and `R` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub n_cols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c == j)
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, p)| p).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0.0; self.n_cols];
                for &(j, p) in row {
                    d[j] = p;
                }
                d
            })
            .collect()
    }

    /// Lower and upper bandwidth of a square matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }
}

/// The chain reordered as `[[Q, R], [0, I]]`.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    /// Transient → transient block.
    pub q: SparseMatrix,
    /// Transient → absorbing block.
    pub r: SparseMatrix,
    /// `transient_order[k]` is the original index of canonical transient row `k`.
    pub transient_order: Vec<usize>,
    /// `absorbing_order[k]` is the original index of canonical absorbing column `k`.
    pub absorbing_order: Vec<usize>,
}

impl CanonicalForm {
    pub fn n_transient(&self) -> usize {
        self.transient_order.len()
    }

    /// True when the transient states already occupy the leading indices
    /// in their original order.
    pub fn is_identity_permutation(&self) -> bool {
        self.transient_order
            .iter()
            .enumerate()
            .all(|(k, &s)| k == s)
    }
}

/// Separates transient and absorbing states. Both groups keep ascending
/// original order.
pub fn build_canonical(chain: &AbsorbingChain) -> Result<CanonicalForm, ChainError> {
    let n = chain.n_states();
    let transient_order = chain.transient_states();
    if transient_order.is_empty() {
        return Err(ChainError::NoTransientStates);
    }
    let absorbing_order = chain.absorbing_states();

    // original index -> (is_absorbing, canonical position)
    let mut position = vec![0usize; n];
    for (k, &s) in transient_order.iter().enumerate() {
        position[s] = k;
    }
    for (k, &s) in absorbing_order.iter().enumerate() {
        position[s] = k;
    }

    let mut q_rows = Vec::with_capacity(transient_order.len());
    let mut r_rows = Vec::with_capacity(transient_order.len());
    for &s in &transient_order {
        let mut q_row = Vec::new();
        let mut r_row = Vec::new();
        for (j, p) in chain.row(s) {
            if chain.is_absorbing(j) {
                r_row.push((position[j], p));
            } else {
                q_row.push((position[j], p));
            }
        }
        q_row.sort_by_key(|&(j, _)| j);
        r_row.sort_by_key(|&(j, _)| j);
        q_rows.push(q_row);
        r_rows.push(r_row);
    }

    Ok(CanonicalForm {
        q: SparseMatrix {
            n_cols: transient_order.len(),
            rows: q_rows,
        },
        r: SparseMatrix {
            n_cols: absorbing_order.len(),
            rows: r_rows,
        },
        transient_order,
        absorbing_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_state_chain() {
        let chain = AbsorbingChain::birth_death(&[(0.25, 0.5, 0.25)]).unwrap();
        let cf = build_canonical(&chain).unwrap();
        assert_eq!(cf.q.to_dense(), vec![vec![0.5]]);
        assert_eq!(cf.r.to_dense(), vec![vec![0.25, 0.25]]);
        assert_eq!(cf.transient_order, vec![1]);
        assert_eq!(cf.absorbing_order, vec![0, 2]);
    }

    #[test]
    fn leading_transient_block_keeps_identity_order() {
        let rows = vec![
            vec![(0, 0.5), (1, 0.25), (2, 0.25)],
            vec![(0, 0.25), (1, 0.5), (3, 0.25)],
            vec![(2, 1.0)],
            vec![(3, 1.0)],
        ];
        let chain = AbsorbingChain::new(rows, &[2, 3]).unwrap();
        let cf = build_canonical(&chain).unwrap();
        assert!(cf.is_identity_permutation());
        assert_eq!(cf.absorbing_order, vec![2, 3]);
        for i in 0..2 {
            assert!((cf.q.row_sum(i) + cf.r.row_sum(i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_absorbing_is_rejected() {
        let chain = AbsorbingChain::new(vec![vec![(0, 1.0)]], &[0]).unwrap();
        assert!(matches!(
            build_canonical(&chain),
            Err(ChainError::NoTransientStates)
        ));
    }
}
