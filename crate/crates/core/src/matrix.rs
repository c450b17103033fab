//! Dense real symmetric matrices.

use nalgebra::DMatrix;

/// Dense real symmetric matrix. Only constructors that mirror the upper
/// triangle are exposed, so `m[(i, j)] == m[(j, i)]` holds bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds a matrix by evaluating `f(i, j)` for `i <= j` in row-major order.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut inner = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                inner[(i, j)] = v;
                inner[(j, i)] = v;
            }
        }
        SymMatrix { inner }
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_upper_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Copies the upper triangle of a square matrix.
    pub fn from_upper_of(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "matrix must be square");
        Self::from_upper_fn(m.nrows(), |i, j| m[(i, j)])
    }

    /// Symmetric part `(m + mᵀ)/2` of a square matrix.
    pub fn symmetrized(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "matrix must be square");
        Self::from_upper_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    /// `a·x + b·y`, evaluated entrywise on the upper triangle.
    pub fn combine(a: f64, x: &SymMatrix, b: f64, y: &SymMatrix) -> SymMatrix {
        assert_eq!(x.dim(), y.dim(), "dimension mismatch");
        Self::from_upper_fn(x.dim(), |i, j| a * x.get(i, j) + b * y.get(i, j))
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        Self::from_upper_fn(self.dim(), |i, j| c * self.get(i, j))
    }

    /// Principal submatrix on the index range `[start, end)`.
    pub fn block(&self, start: usize, end: usize) -> SymMatrix {
        assert!(start < end && end <= self.dim(), "invalid block range");
        Self::from_upper_fn(end - start, |i, j| self.get(start + i, start + j))
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.inner[(i, j)].to_bits() == self.inner[(j, i)].to_bits()))
    }
}

/// Largest `|m_ij - m_ji|` of a square matrix.
pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}
