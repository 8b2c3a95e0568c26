use std::collections::VecDeque;

use super::{ChainError, ROW_SUM_TOLERANCE};

/// Per-state annotation: clock position (in loop steps) and an optional
/// memory tag for extended-state chains.
#[derive(Debug, Clone, PartialEq)]
pub struct StateLabel {
    pub position: f64,
    pub memory: Option<&'static str>,
}

impl StateLabel {
    pub fn at(position: f64) -> Self {
        Self {
            position,
            memory: None,
        }
    }
}

#[derive(Debug, Clone)]
enum Storage {
    /// `sub[i] = P(i, i-1)`, `diag[i] = P(i, i)`, `sup[i] = P(i, i+1)`.
    Tridiagonal {
        sub: Vec<f64>,
        diag: Vec<f64>,
        sup: Vec<f64>,
    },
    Sparse(Vec<Vec<(usize, f64)>>),
}

/// A validated, row-stochastic chain with at least one absorbing state
/// reachable from every transient state.
#[derive(Debug, Clone)]
pub struct AbsorbingChain {
    storage: Storage,
    absorbing: Vec<bool>,
    labels: Vec<StateLabel>,
}

impl AbsorbingChain {
    /// Builds a chain from sparse rows `(column, probability)`.
    ///
    /// Duplicate columns within a row are summed and zero entries dropped.
    /// Rows whose entries all lie within one column of the diagonal are
    /// stored as a tridiagonal matrix.
    pub fn new(rows: Vec<Vec<(usize, f64)>>, absorbing: &[usize]) -> Result<Self, ChainError> {
        let n = rows.len();
        if n == 0 {
            return Err(ChainError::Empty);
        }
        let mut is_abs = vec![false; n];
        for &a in absorbing {
            if a >= n {
                return Err(ChainError::StateOutOfRange { row: a, col: a });
            }
            is_abs[a] = true;
        }
        if !is_abs.iter().any(|&a| a) {
            return Err(ChainError::NoAbsorbingState);
        }

        let mut clean = Vec::with_capacity(n);
        for (i, mut row) in rows.into_iter().enumerate() {
            for &(j, p) in &row {
                if j >= n {
                    return Err(ChainError::StateOutOfRange { row: i, col: j });
                }
                if !p.is_finite() || p < 0.0 {
                    return Err(ChainError::BadProbability { row: i, value: p });
                }
            }
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (j, p) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += p,
                    _ => merged.push((j, p)),
                }
            }
            merged.retain(|&(_, p)| p > 0.0);
            let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ChainError::NotStochastic { row: i, sum });
            }
            if is_abs[i] && !(merged.len() == 1 && merged[0].0 == i) {
                return Err(ChainError::AbsorbingRowNotIdentity(i));
            }
            clean.push(merged);
        }

        check_reachability(&clean, &is_abs)?;

        let tridiagonal = clean
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().all(|&(j, _)| j.abs_diff(i) <= 1));
        let storage = if tridiagonal {
            let mut sub = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut sup = vec![0.0; n];
            for (i, row) in clean.iter().enumerate() {
                for &(j, p) in row {
                    if j + 1 == i {
                        sub[i] = p;
                    } else if j == i {
                        diag[i] = p;
                    } else {
                        sup[i] = p;
                    }
                }
            }
            Storage::Tridiagonal { sub, diag, sup }
        } else {
            Storage::Sparse(clean)
        };

        Ok(Self {
            storage,
            absorbing: is_abs,
            labels: (0..n).map(|i| StateLabel::at(i as f64)).collect(),
        })
    }

    /// Birth–death chain on `0..=n` with both ends absorbing.
    ///
    /// `interior[k]` gives `(left, stay, right)` for state `k + 1`.
    pub fn birth_death(interior: &[(f64, f64, f64)]) -> Result<Self, ChainError> {
        let n = interior.len() + 2;
        let mut rows = Vec::with_capacity(n);
        rows.push(vec![(0, 1.0)]);
        for (k, &(l, s, r)) in interior.iter().enumerate() {
            let i = k + 1;
            rows.push(vec![(i - 1, l), (i, s), (i + 1, r)]);
        }
        rows.push(vec![(n - 1, 1.0)]);
        Self::new(rows, &[0, n - 1])
    }

    /// Builds a chain from a dense row-major matrix.
    pub fn from_dense(matrix: &[Vec<f64>], absorbing: &[usize]) -> Result<Self, ChainError> {
        let rows = matrix
            .iter()
            .map(|r| {
                r.iter()
                    .copied()
                    .enumerate()
                    .filter(|&(_, p)| p != 0.0)
                    .collect()
            })
            .collect();
        Self::new(rows, absorbing)
    }

    pub fn with_labels(mut self, labels: Vec<StateLabel>) -> Result<Self, ChainError> {
        if labels.len() != self.n_states() {
            return Err(ChainError::LabelCount {
                labels: labels.len(),
                states: self.n_states(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n_states(&self) -> usize {
        self.absorbing.len()
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.absorbing[state]
    }

    pub fn is_tridiagonal(&self) -> bool {
        matches!(self.storage, Storage::Tridiagonal { .. })
    }

    pub fn absorbing_states(&self) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&i| self.absorbing[i])
            .collect()
    }

    pub fn transient_states(&self) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&i| !self.absorbing[i])
            .collect()
    }

    pub fn labels(&self) -> &[StateLabel] {
        &self.labels
    }

    pub fn label(&self, state: usize) -> &StateLabel {
        &self.labels[state]
    }

    /// Non-zero entries of row `state`, in increasing column order.
    pub fn row(&self, state: usize) -> Row<'_> {
        match &self.storage {
            Storage::Tridiagonal { sub, diag, sup } => {
                let mut entries = [(0, 0.0); 3];
                let mut len = 0;
                if state > 0 && sub[state] > 0.0 {
                    entries[len] = (state - 1, sub[state]);
                    len += 1;
                }
                if diag[state] > 0.0 {
                    entries[len] = (state, diag[state]);
                    len += 1;
                }
                if sup[state] > 0.0 {
                    entries[len] = (state + 1, sup[state]);
                    len += 1;
                }
                Row::Small {
                    entries,
                    len,
                    pos: 0,
                }
            }
            Storage::Sparse(rows) => Row::Sparse(rows[state].iter()),
        }
    }

    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.row(from)
            .find(|&(j, _)| j == to)
            .map_or(0.0, |(_, p)| p)
    }

    /// `out = dist · P`.
    pub fn propagate(&self, dist: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (i, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (j, p) in self.row(i) {
                out[j] += mass * p;
            }
        }
    }

    /// Largest |row sum − 1| over all rows.
    pub fn max_row_defect(&self) -> f64 {
        (0..self.n_states())
            .map(|i| (self.row(i).map(|(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Centre transient state of a birth–death chain (`floor(n/2)` for
    /// `n + 1` states).
    pub fn center_state(&self) -> usize {
        (self.n_states() - 1) / 2
    }

    /// Point-mass distribution on `state`.
    pub fn point_mass(&self, state: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.n_states()];
        v[state] = 1.0;
        v
    }
}

/// Iterator over the non-zero entries of one row.
#[derive(Debug, Clone)]
pub enum Row<'a> {
    Small {
        entries: [(usize, f64); 3],
        len: usize,
        pos: usize,
    },
    Sparse(std::slice::Iter<'a, (usize, f64)>),
}

impl Iterator for Row<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            Row::Small { entries, len, pos } => {
                if *pos < *len {
                    *pos += 1;
                    Some(entries[*pos - 1])
                } else {
                    None
                }
            }
            Row::Sparse(it) => it.next().copied(),
        }
    }
}

/// Reverse breadth-first search from the absorbing set.
fn check_reachability(rows: &[Vec<(usize, f64)>], absorbing: &[bool]) -> Result<(), ChainError> {
    let n = rows.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &(j, _) in row {
            if j != i {
                preds[j].push(i);
            }
        }
    }
    let mut seen = absorbing.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| absorbing[i]).collect();
    while let Some(j) = queue.pop_front() {
        for &i in &preds[j] {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    match seen.iter().position(|&s| !s) {
        Some(i) => Err(ChainError::Unreachable(i)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_storage_is_detected() {
        let c = AbsorbingChain::birth_death(&[(0.25, 0.5, 0.25); 3]).unwrap();
        assert!(c.is_tridiagonal());
        assert_eq!(c.n_states(), 5);
        assert_eq!(
            c.row(2).collect::<Vec<_>>(),
            vec![(1, 0.25), (2, 0.5), (3, 0.25)]
        );
        assert_eq!(c.row(0).collect::<Vec<_>>(), vec![(0, 1.0)]);
    }

    #[test]
    fn general_rows_use_sparse_storage() {
        let rows = vec![
            vec![(0, 1.0)],
            vec![(0, 0.5), (2, 0.5)],
            vec![(1, 0.5), (3, 0.5)],
            vec![(3, 1.0)],
        ];
        let c = AbsorbingChain::new(rows, &[0, 3]).unwrap();
        assert!(c.is_tridiagonal());
        let rows = vec![
            vec![(0, 1.0)],
            vec![(0, 0.5), (3, 0.5)],
            vec![(1, 1.0)],
            vec![(3, 1.0)],
        ];
        let c = AbsorbingChain::new(rows, &[0, 3]).unwrap();
        assert!(!c.is_tridiagonal());
        assert_eq!(c.probability(1, 3), 0.5);
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        let rows = vec![vec![(0, 1.0)], vec![(0, 0.5), (1, 0.4)]];
        assert!(matches!(
            AbsorbingChain::new(rows, &[0]),
            Err(ChainError::NotStochastic { row: 1, .. })
        ));
    }

    #[test]
    fn rejects_leaky_absorbing_state() {
        let rows = vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 1.0)]];
        assert!(matches!(
            AbsorbingChain::new(rows, &[0]),
            Err(ChainError::AbsorbingRowNotIdentity(0))
        ));
    }

    #[test]
    fn rejects_trapped_transient_states() {
        // states 1 and 2 only talk to each other
        let rows = vec![vec![(0, 1.0)], vec![(2, 1.0)], vec![(1, 1.0)]];
        assert!(matches!(
            AbsorbingChain::new(rows, &[0]),
            Err(ChainError::Unreachable(_))
        ));
        let rows = vec![vec![(0, 1.0)]];
        assert!(matches!(
            AbsorbingChain::new(rows, &[]),
            Err(ChainError::NoAbsorbingState)
        ));
    }

    #[test]
    fn duplicate_columns_are_merged() {
        let rows = vec![vec![(0, 1.0)], vec![(0, 0.25), (0, 0.25), (1, 0.5)]];
        let c = AbsorbingChain::new(rows, &[0]).unwrap();
        assert_eq!(c.probability(1, 0), 0.5);
    }

    #[test]
    fn propagate_conserves_mass() {
        let c = AbsorbingChain::birth_death(&[(0.25, 0.5, 0.25); 5]).unwrap();
        let v = c.point_mass(3);
        let mut out = vec![0.0; c.n_states()];
        c.propagate(&v, &mut out);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(out[2], 0.25);
    }
}
