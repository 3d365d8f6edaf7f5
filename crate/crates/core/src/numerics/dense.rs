use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue cutoff deciding rank in [`SymmetricMatrix::pinv`].
pub const PINV_CUTOFF: f64 = 1e-9;

/// Dense symmetric matrix stored as the packed lower triangle, so symmetry is
/// structural rather than checked.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    /// Builds from a generator over the lower triangle (`i >= j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.data[tri_index(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[tri_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[tri_index(i, j)] = value;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, delta: f64) {
        self.data[tri_index(i, j)] += delta;
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.get(i, j)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += self.get(i, i) * x[i] * x[i];
            for j in 0..i {
                acc += 2.0 * self.get(i, j) * x[i] * x[j];
            }
        }
        acc
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.get(i, j) * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Symmetrizes `(m + m^T) / 2` into packed storage.
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        SymmetricMatrix::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.n == 0 {
            return Vec::new();
        }
        let eig = self.to_dmatrix().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    /// All eigenvalues at least `-1e-9 * lambda_max`.
    pub fn verify_psd(&self) -> bool {
        let vals = self.eigenvalues();
        let lambda_max = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        vals.iter().all(|&v| v >= -1e-9 * lambda_max)
    }

    /// Moore-Penrose pseudo-inverse via eigendecomposition, with eigenvalues
    /// below `1e-9 * lambda_max` in magnitude treated as zero.
    pub fn pinv(&self) -> SymmetricMatrix {
        if self.n == 0 {
            return SymmetricMatrix::zeros(0);
        }
        let eig = self.to_dmatrix().symmetric_eigen();
        let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let cutoff = PINV_CUTOFF * lambda_max;
        let inv_vals = DVector::from_iterator(
            self.n,
            eig.eigenvalues
                .iter()
                .map(|&v| if v.abs() > cutoff { 1.0 / v } else { 0.0 }),
        );
        let q = &eig.eigenvectors;
        let recon = q * DMatrix::from_diagonal(&inv_vals) * q.transpose();
        SymmetricMatrix::from_dmatrix(&recon)
    }
}

fn split_keep(n: usize, keep: &[usize]) -> (Vec<usize>, Vec<bool>) {
    let mut is_kept = vec![false; n];
    for &k in keep {
        assert!(k < n, "keep index out of range");
        is_kept[k] = true;
    }
    let eliminated: Vec<usize> = (0..n).filter(|&v| !is_kept[v]).collect();
    (eliminated, is_kept)
}

/// Schur complement of `l` onto the index set `keep`, by Gaussian elimination
/// of the complement in min-degree order (fewest current off-diagonal
/// nonzeros first, ties to the lowest index).
///
/// Rows that are numerically zero at elimination time belong to fully
/// eliminated components and are dropped; a non-trivial zero pivot means the
/// block is singular.
pub fn schur_block(l: &SymmetricMatrix, keep: &[usize]) -> Result<SymmetricMatrix> {
    let n = l.order();
    let (eliminated, is_kept) = split_keep(n, keep);
    let scale = l.max_abs().max(1.0);
    let zero_tol = 1e-12 * scale;

    let mut a = l.to_dmatrix();
    let mut alive: Vec<usize> = eliminated;
    let mut active = vec![true; n];

    while !alive.is_empty() {
        // min-degree: fewest off-diagonal nonzeros among active columns
        let mut best = 0;
        let mut best_deg = usize::MAX;
        for (idx, &v) in alive.iter().enumerate() {
            let deg = (0..n)
                .filter(|&u| u != v && active[u] && a[(v, u)].abs() > zero_tol)
                .count();
            if deg < best_deg {
                best_deg = deg;
                best = idx;
            }
        }
        let v = alive.swap_remove(best);
        let pivot = a[(v, v)];
        if pivot.abs() <= zero_tol {
            if best_deg == 0 {
                // isolated vertex of a fully eliminated component
                active[v] = false;
                continue;
            }
            return Err(Error::SingularBlock);
        }
        let neighbors: Vec<usize> = (0..n)
            .filter(|&u| u != v && active[u] && a[(v, u)].abs() > zero_tol)
            .collect();
        for &x in &neighbors {
            let f = a[(x, v)] / pivot;
            for &y in &neighbors {
                a[(x, y)] -= f * a[(v, y)];
            }
            a[(x, v)] = 0.0;
            a[(v, x)] = 0.0;
        }
        active[v] = false;
    }

    // deterministic order: ascending kept index
    let kept: Vec<usize> = (0..n).filter(|&v| is_kept[v]).collect();
    Ok(SymmetricMatrix::from_fn(kept.len(), |i, j| {
        0.5 * (a[(kept[i], kept[j])] + a[(kept[j], kept[i])])
    }))
}

/// `min_y [y; x]^T L [y; x]` over the eliminated coordinates, evaluated by
/// solving the stationarity system directly. Must agree with the quadratic
/// form of [`schur_block`] at `x`; the two routes are kept independent.
pub fn min_quadratic_extension(l: &SymmetricMatrix, keep: &[usize], x: &[f64]) -> Result<f64> {
    let n = l.order();
    assert_eq!(x.len(), keep.len());
    let (eliminated, is_kept) = split_keep(n, keep);
    let mut full = vec![0.0; n];
    let kept: Vec<usize> = (0..n).filter(|&v| is_kept[v]).collect();
    for (xi, &v) in x.iter().zip(&kept) {
        full[v] = *xi;
    }
    if eliminated.is_empty() {
        return Ok(l.quadratic_form(&full));
    }

    // stationarity: L_N y = -L_M x
    let ne = eliminated.len();
    let l_n = DMatrix::from_fn(ne, ne, |i, j| l.get(eliminated[i], eliminated[j]));
    let rhs = DVector::from_fn(ne, |i, _| {
        -kept
            .iter()
            .zip(x)
            .map(|(&kv, &xv)| l.get(eliminated[i], kv) * xv)
            .sum::<f64>()
    });
    // L_N may be singular when an eliminated component carries no kept vertex;
    // fall back to the pseudo-inverse (the minimum is still attained there).
    let y = match l_n.clone().lu().solve(&rhs) {
        Some(y) if y.iter().all(|v| v.is_finite()) => y,
        _ => {
            let pinv = SymmetricMatrix::from_dmatrix(&l_n).pinv();
            DVector::from_vec(pinv.matvec(rhs.as_slice()))
        }
    };
    for (yi, &v) in y.iter().zip(&eliminated) {
        full[v] = *yi;
    }
    Ok(l.quadratic_form(&full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, WeightedGraph};

    #[test]
    fn pinv_identity_and_zero() {
        let id = SymmetricMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { 0.0 });
        let p = id.pinv();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p.get(i, j) - want).abs() < 1e-12);
            }
        }
        let z = SymmetricMatrix::zeros(4);
        assert_eq!(z.pinv(), SymmetricMatrix::zeros(4));
    }

    #[test]
    fn pinv_unit_edge_laplacian() {
        // eigenvalues {0, 2}; pseudo-inverse is [[.25, -.25], [-.25, .25]]
        let l = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap().laplacian();
        let p = l.pinv();
        assert!((p.get(0, 0) - 0.25).abs() < 1e-12);
        assert!((p.get(0, 1) + 0.25).abs() < 1e-12);
        assert!((p.get(1, 1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn pinv_satisfies_penrose_identity() {
        let g = WeightedGraph::from_edges(
            5,
            &[(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.0), (3, 4, 4.0), (0, 4, 1.0), (1, 3, 1.0)],
        )
        .unwrap();
        let l = g.laplacian();
        let p = l.pinv();
        let (lm, pm) = (l.to_dmatrix(), p.to_dmatrix());
        let back = &lm * &pm * &lm;
        let scale = l.max_abs();
        for i in 0..5 {
            for j in 0..5 {
                assert!((back[(i, j)] - lm[(i, j)]).abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn schur_block_series_law() {
        let l = path_graph(3).laplacian();
        let s = schur_block(&l, &[0, 2]).unwrap();
        assert!((s.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((s.get(0, 1) + 0.5).abs() < 1e-12);
        assert!((s.get(1, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn schur_block_keep_all_is_identity_op() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 2.0), (1, 2, 3.0)]).unwrap();
        let l = g.laplacian();
        let s = schur_block(&l, &[0, 1, 2]).unwrap();
        assert_eq!(s, l);
    }

    #[test]
    fn schur_block_star_to_triangle() {
        // unit star, center 0, leaves 1..3: triangle of weight 1/3 edges
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let s = schur_block(&g.laplacian(), &[1, 2, 3]).unwrap();
        for i in 0..3 {
            assert!((s.get(i, i) - 2.0 / 3.0).abs() < 1e-12);
            for j in 0..i {
                assert!((s.get(i, j) + 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn schur_block_result_is_laplacian() {
        let g = WeightedGraph::from_edges(
            6,
            &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.5), (3, 4, 1.0), (4, 5, 0.5), (0, 5, 1.0), (1, 4, 2.0)],
        )
        .unwrap();
        let s = schur_block(&g.laplacian(), &[0, 3]).unwrap();
        let scale = s.max_abs();
        for i in 0..2 {
            assert!(s.row_sum(i).abs() <= 1e-10 * scale);
            for j in 0..i {
                assert!(s.get(i, j) <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn min_extension_matches_schur_form() {
        let l = path_graph(3).laplacian();
        // x = 0
        assert!(min_quadratic_extension(&l, &[0, 2], &[0.0, 0.0]).unwrap().abs() < 1e-12);
        // series conductance: 0.5 (x_a - x_c)^2
        let v = min_quadratic_extension(&l, &[0, 2], &[1.0, -1.0]).unwrap();
        assert!((v - 0.5 * 4.0).abs() < 1e-10);

        let g = WeightedGraph::from_edges(
            6,
            &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.5), (3, 4, 1.0), (4, 5, 0.5), (0, 5, 1.0), (1, 4, 2.0)],
        )
        .unwrap();
        let l = g.laplacian();
        let keep = [0usize, 2, 5];
        let s = schur_block(&l, &keep).unwrap();
        let xs = [[1.0, -0.5, 0.25], [0.3, 0.3, -0.6], [2.0, 0.0, -1.0]];
        for x in xs {
            let direct = min_quadratic_extension(&l, &keep, &x).unwrap();
            let formula = s.quadratic_form(&x);
            assert!((direct - formula).abs() <= 1e-8 * formula.abs().max(1.0));
        }
    }

    #[test]
    fn schur_block_drops_isolated_component() {
        // vertices {3} isolated and not kept: elimination drops it
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = schur_block(&g.laplacian(), &[0, 2]).unwrap();
        assert!((s.get(0, 1) + 0.5).abs() < 1e-12);
    }
}
