use std::collections::VecDeque;

use super::C64;

/// Compressed sparse row storage for a square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and columns are sorted within each row.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) out of range for dimension {n}");
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![C64::new(0.0, 0.0); triplets.len()];
        for &(i, j, v) in triplets {
            let slot = cursor[i];
            cols[slot] = j;
            vals[slot] = v;
            cursor[i] += 1;
        }

        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(usize, C64)> = Vec::new();
        for i in 0..n {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|s| (cols[s], vals[s])));
            row.sort_by_key(|&(j, _)| j);
            for &(j, v) in &row {
                match indices.last() {
                    Some(&last) if last == j && indices.len() > indptr[i] => {
                        *values.last_mut().unwrap() += v;
                    }
                    _ => {
                        indices.push(j);
                        values.push(v);
                    }
                }
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let triplets: Vec<_> = diag
            .iter()
            .enumerate()
            .map(|(i, &d)| (i, i, C64::new(d, 0.0)))
            .collect();
        Self::from_triplets(diag.len(), &triplets)
    }

    /// Keeps the entries of a dense row-major matrix whose modulus is nonzero.
    pub fn from_dense(n: usize, dense: &[C64]) -> Self {
        assert_eq!(dense.len(), n * n);
        let triplets: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = dense[i * n + j];
                (v.norm_sqr() > 0.0).then_some((i, j, v))
            })
            .collect();
        Self::from_triplets(n, &triplets)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.n).map(|i| self.row_nnz(i)).max().unwrap_or(0)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[a..b].binary_search(&j) {
            Ok(pos) => self.values[a + pos],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for s in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[s] * x[self.indices[s]];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Gershgorin enclosure `[lower, upper]` of the (real) spectrum.
    pub fn gershgorin_interval(&self) -> (f64, f64) {
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for i in 0..self.n {
            let mut diag = 0.0;
            let mut radius = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    diag = v.re;
                } else {
                    radius += v.norm();
                }
            }
            lower = lower.min(diag - radius);
            upper = upper.max(diag + radius);
        }
        if self.n == 0 {
            (0.0, 0.0)
        } else {
            (lower, upper)
        }
    }

    /// Gershgorin bound on the operator norm, `max_i sum_j |A_ij|`.
    pub fn gershgorin_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n * self.n];
        for (i, j, v) in self.triplets() {
            out[i * self.n + j] = v;
        }
        out
    }

    /// Same pattern, values replaced by `f(i, j, value)`.
    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, C64) -> C64) -> Self {
        let mut values = self.values.clone();
        for i in 0..self.n {
            for s in self.indptr[i]..self.indptr[i + 1] {
                values[s] = f(i, self.indices[s], self.values[s]);
            }
        }
        Self {
            n: self.n,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values,
        }
    }

    /// Bandwidth `max |perm_inv[i] - perm_inv[j]|` under the ordering `perm`
    /// (`perm[new] = old`).
    pub fn bandwidth_under(&self, perm: &[usize]) -> usize {
        let inv = invert_permutation(perm);
        self.triplets()
            .map(|(i, j, _)| inv[i].abs_diff(inv[j]))
            .max()
            .unwrap_or(0)
    }
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n)
        .map(|i| a.row(i).filter(|&(j, _)| j != i).count())
        .collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut neighbours = Vec::new();

    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .unwrap();
        let start = pseudo_peripheral(a, start, &visited);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            neighbours.clear();
            neighbours.extend(a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]));
            neighbours.sort_by_key(|&j| (degree[j], j));
            for &j in &neighbours {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(a: &CsrMatrix, start: usize, blocked: &[bool]) -> usize {
    let mut node = start;
    let mut best_depth = 0;
    for _ in 0..8 {
        let (far, depth) = farthest(a, node, blocked);
        if depth <= best_depth {
            break;
        }
        best_depth = depth;
        node = far;
    }
    node
}

fn farthest(a: &CsrMatrix, start: usize, blocked: &[bool]) -> (usize, usize) {
    let n = a.dim();
    let mut level = vec![usize::MAX; n];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for (j, _) in a.row(v) {
            if !blocked[j] && level[j] == usize::MAX {
                level[j] = level[v] + 1;
                queue.push_back(j);
            }
        }
    }
    (last, level[last])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = CsrMatrix::from_triplets(
            3,
            &[(0, 2, c(1.0, 0.0)), (0, 0, c(2.0, 0.0)), (0, 2, c(0.5, 1.0))],
        );
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 2), c(1.5, 1.0));
        assert_eq!(a.get(1, 1), c(0.0, 0.0));
        let cols: Vec<_> = a.row(0).map(|(j, _)| j).collect();
        assert_eq!(cols, vec![0, 2]);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = CsrMatrix::from_triplets(
            2,
            &[(0, 0, c(1.0, 0.0)), (0, 1, c(0.0, 2.0)), (1, 0, c(0.0, -2.0))],
        );
        let y = a.matvec(&[c(1.0, 0.0), c(1.0, 1.0)]);
        assert_eq!(y[0], c(1.0, 0.0) + c(0.0, 2.0) * c(1.0, 1.0));
        assert_eq!(y[1], c(0.0, -2.0));
        assert_eq!(a.hermitian_defect(), 0.0);
    }

    #[test]
    fn rcm_reduces_ring_bandwidth() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, c(2.0, 0.0)));
            t.push((i, (i + 1) % n, c(-1.0, 0.0)));
            t.push(((i + 1) % n, i, c(-1.0, 0.0)));
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let identity: Vec<_> = (0..n).collect();
        assert_eq!(a.bandwidth_under(&identity), n - 1);
        let perm = reverse_cuthill_mckee(&a);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, identity);
        assert!(a.bandwidth_under(&perm) <= 2);
    }

    #[test]
    fn gershgorin_encloses_diagonal_matrix() {
        let a = CsrMatrix::from_diagonal(&[1.0, -3.0, 2.0]);
        assert_eq!(a.gershgorin_interval(), (-3.0, 2.0));
        assert_eq!(a.gershgorin_norm(), 3.0);
    }
}
