//! The dataset under test and its affine-invariant canonical form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// n×p real observations, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::Precondition("empty data matrix".into()));
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::Precondition("non-finite entry in data".into()));
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Precondition("empty data".into()));
        }
        let p = rows[0].len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged rows in data".into()));
        }
        let m = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Self::new(m)
    }

    /// Univariate convenience constructor.
    pub fn from_column(xs: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_fn(xs.len(), 1, |i, _| xs[i]))
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn p(&self) -> usize {
        self.rows.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.rows.row(i).transpose()
    }

    /// Univariate view of a p=1 dataset.
    pub fn column(&self) -> Result<Vec<f64>> {
        if self.p() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected univariate data, got p={}",
                self.p()
            )));
        }
        Ok(self.rows.column(0).iter().cloned().collect())
    }

    pub fn mean(&self) -> DVector<f64> {
        let n = self.n() as f64;
        let mut m = DVector::zeros(self.p());
        for i in 0..self.n() {
            m += self.row(i);
        }
        m / n
    }

    /// Scatter matrix Σ_i (x_i − x̄)(x_i − x̄)ᵀ.
    pub fn scatter(&self) -> DMatrix<f64> {
        let xbar = self.mean();
        let mut s = DMatrix::zeros(self.p(), self.p());
        for i in 0..self.n() {
            let d = self.row(i) - &xbar;
            s += &d * d.transpose();
        }
        s
    }

    /// Apply x ↦ a + S·x to every observation.
    pub fn affine_map(&self, shift: &DVector<f64>, scale: &DMatrix<f64>) -> Result<Self> {
        if shift.len() != self.p() || scale.nrows() != self.p() || scale.ncols() != self.p() {
            return Err(Error::DimensionMismatch("affine map shape".into()));
        }
        let mut out = DMatrix::zeros(self.n(), self.p());
        for i in 0..self.n() {
            let y = shift + scale * self.row(i);
            out.row_mut(i).copy_from(&y.transpose());
        }
        Self::new(out)
    }

    /// Affine-invariant canonical form: observations are centered, whitened
    /// by the Cholesky factor of the scatter, then rotated into a frame
    /// fixed by the data itself. Any two datasets related by x ↦ a + S·x
    /// (S nonsingular) map to the same canonical matrix, up to rounding.
    ///
    /// Requires n ≥ p+1 and a nonsingular scatter.
    pub fn canonicalize(&self) -> Result<DataMatrix> {
        let (n, p) = (self.n(), self.p());
        if n < p + 1 {
            return Err(Error::Precondition(format!(
                "need n >= p+1 observations, got n={n}, p={p}"
            )));
        }
        let xbar = self.mean();
        let scatter = self.scatter();
        let chol = nalgebra::Cholesky::new(scatter).ok_or_else(|| {
            Error::DegenerateData("scatter matrix is singular (data not in general position)".into())
        })?;
        let c = chol.l();

        // Whiten: w_i = C^{-1}(x_i - x̄). The whitened scatter is exactly I_p.
        let mut w = DMatrix::zeros(n, p);
        for i in 0..n {
            let d = self.row(i) - &xbar;
            let y = c
                .solve_lower_triangular(&d)
                .ok_or_else(|| Error::Numeric("triangular solve failed".into()))?;
            w.row_mut(i).copy_from(&y.transpose());
        }

        // A whitening is only defined up to a rotation: chol(G S Gᵀ) differs
        // from G·chol(S) by an orthogonal factor. Fix the frame with a
        // rotation built from the data by reverse pivoted Gram-Schmidt, which
        // commutes with that orthogonal factor and makes the result exactly
        // invariant.
        let r = canonical_rotation(&w)?;
        let mut out = DMatrix::zeros(n, p);
        for i in 0..n {
            let y = &r * w.row(i).transpose();
            out.row_mut(i).copy_from(&y.transpose());
        }
        DataMatrix::new(out)
    }
}

/// Orthogonal matrix whose rows are built by Gram-Schmidt over observation
/// vectors chosen by largest residual norm. Rotation-equivariant: rotating
/// the input rotates the selected basis identically, so R·w is invariant.
fn canonical_rotation(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, p) = (w.nrows(), w.ncols());
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(p);
    for _ in 0..p {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for i in 0..n {
            let mut resid = w.row(i).transpose();
            for b in &basis {
                let proj = b.dot(&resid);
                resid -= b * proj;
            }
            let norm = resid.norm();
            if best.as_ref().map_or(true, |(bn, _)| norm > *bn + 1e-12) {
                best = Some((norm, resid));
            }
        }
        let (norm, resid) = best.unwrap();
        if norm < 1e-10 {
            return Err(Error::DegenerateData(
                "observations do not span the sample space".into(),
            ));
        }
        // Re-orthogonalize once against accumulated rounding.
        let mut v = resid / norm;
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        basis.push(v.normalize());
    }
    let mut r = DMatrix::zeros(p, p);
    for (k, b) in basis.iter().enumerate() {
        r.row_mut(k).copy_from(&b.transpose());
    }
    Ok(r)
}
