use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use once_cell::sync::OnceCell;

/// Spatial weights over all ordered non-loop market pairs. Two distinct
/// pairs are neighbors when they share the outgoing or the incoming
/// vertex; every pair has exactly 2(N-2) neighbors, so row
/// standardization divides the 0/1 pattern by that constant and the
/// standardized matrix stays symmetric.
#[derive(Debug)]
pub struct SpatialWeights {
    pub n_markets: usize,
    /// Ordered pairs (out, in) in lexicographic order; the row/column
    /// order of the matrix.
    pub pairs: Vec<(usize, usize)>,
    /// Neighbor row lists (indices into `pairs`).
    pub neighbors: Vec<Vec<u32>>,
    pub row_standardized: bool,
    eigen: OnceCell<(DMatrix<f64>, DVector<f64>)>,
    squared: OnceCell<DMatrix<f64>>,
}

/// Index of ordered pair (i, j) in lexicographic order with loops removed.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    i * (n - 1) + if j < i { j } else { j - 1 }
}

pub fn build_weights(n_markets: usize) -> Result<SpatialWeights> {
    if n_markets < 3 {
        return Err(Error::Validation(format!(
            "spatial weights need at least 3 markets, got {n_markets}"
        )));
    }
    let n = n_markets;
    let mut pairs = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    let mut neighbors = vec![Vec::with_capacity(2 * (n - 2)); pairs.len()];
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        for l in 0..n {
            if l != i && l != j {
                neighbors[idx].push(pair_index(n, i, l) as u32); // share out-vertex
            }
        }
        for k in 0..n {
            if k != i && k != j {
                neighbors[idx].push(pair_index(n, k, j) as u32); // share in-vertex
            }
        }
        neighbors[idx].sort_unstable();
    }
    Ok(SpatialWeights {
        n_markets,
        pairs,
        neighbors,
        row_standardized: true,
        eigen: OnceCell::new(),
        squared: OnceCell::new(),
    })
}

impl SpatialWeights {
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn row_weight(&self) -> f64 {
        1.0 / (2 * (self.n_markets - 2)) as f64
    }

    /// Dense row-standardized matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.n_pairs();
        let w = self.row_weight();
        let mut m = DMatrix::zeros(n, n);
        for (row, nb) in self.neighbors.iter().enumerate() {
            for &col in nb {
                m[(row, col as usize)] = w;
            }
        }
        m
    }

    /// y = W x without materializing the dense matrix.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let w = self.row_weight();
        for (row, nb) in self.neighbors.iter().enumerate() {
            let mut acc = 0.0;
            for &col in nb {
                acc += x[col as usize];
            }
            out[row] = acc * w;
        }
    }

    /// Eigendecomposition of the (symmetric) standardized matrix, computed
    /// once and cached.
    fn eigen(&self) -> &(DMatrix<f64>, DVector<f64>) {
        self.eigen.get_or_init(|| {
            let se = nalgebra::SymmetricEigen::new(self.dense());
            (se.eigenvectors, se.eigenvalues)
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigen().1
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigen().0
    }

    /// W*W, cached (used to assemble the latent precision matrix).
    pub fn squared(&self) -> &DMatrix<f64> {
        self.squared.get_or_init(|| {
            let d = self.dense();
            &d * &d
        })
    }

    /// log det(I - rho W) from the eigenvalues.
    pub fn log_det(&self, rho: f64) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|&l| (1.0 - rho * l).ln())
            .sum()
    }

    /// Precomputed log-determinant grid over (-bound, bound) with linear
    /// interpolation between the 200 nodes.
    pub fn log_det_grid(&self, bound: f64, points: usize) -> LogDetGrid {
        let rhos: Vec<f64> = (0..points)
            .map(|i| -bound + 2.0 * bound * i as f64 / (points - 1) as f64)
            .collect();
        let values: Vec<f64> = rhos.iter().map(|&r| self.log_det(r)).collect();
        LogDetGrid { rhos, values }
    }
}

#[derive(Debug, Clone)]
pub struct LogDetGrid {
    rhos: Vec<f64>,
    values: Vec<f64>,
}

impl LogDetGrid {
    pub fn interpolate(&self, rho: f64) -> f64 {
        let n = self.rhos.len();
        let lo = self.rhos[0];
        let hi = self.rhos[n - 1];
        let clamped = rho.clamp(lo, hi);
        let pos = (clamped - lo) / (hi - lo) * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}
