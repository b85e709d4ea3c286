//! Tolerance-aware dense linear algebra shared by the rest of the crate.
//!
//! Every rank decision in the crate goes through [`ToleranceConfig::threshold`]:
//! a singular value counts iff it exceeds
//! `max(abs_floor, rel_eps * max(rows, cols) * sigma_max)`.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Matrices whose smaller side exceeds this are first compressed onto a
/// numerical column basis before the SVD is taken.
const COMPRESS_ABOVE: usize = 160;

/// Fraction of the (lower-bounded) rank threshold at which column-space
/// compression stops.
const COMPRESS_SAFETY: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub rel_eps: f64,
    pub abs_floor: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rel_eps: 1e-10,
            abs_floor: 1e-300,
        }
    }
}

impl ToleranceConfig {
    pub fn new(rel_eps: f64, abs_floor: f64) -> Result<Self> {
        if !(rel_eps > 0.0 && rel_eps.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rel_eps must be positive and finite, got {rel_eps}"
            )));
        }
        if !(abs_floor >= 0.0 && abs_floor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "abs_floor must be non-negative and finite, got {abs_floor}"
            )));
        }
        Ok(ToleranceConfig { rel_eps, abs_floor })
    }

    /// Default floor with a caller-chosen relative threshold.
    pub fn relative(rel_eps: f64) -> Result<Self> {
        Self::new(rel_eps, ToleranceConfig::default().abs_floor)
    }

    pub fn threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        let scale = rows.max(cols) as f64;
        self.abs_floor.max(self.rel_eps * scale * sigma_max)
    }
}

pub fn check_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix(format!("{what} has non-finite entries")))
    }
}

/// Thin singular value decomposition with singular values sorted in
/// decreasing order. `u` is rows x k, `v_t` is k x cols.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular: Vec<f64>,
    pub v_t: Matrix,
    rows: usize,
    cols: usize,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.singular.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, tol: &ToleranceConfig) -> usize {
        let cut = tol.threshold(self.rows, self.cols, self.sigma_max());
        self.singular.iter().take_while(|&&s| s > cut).count()
    }
}

pub fn svd(m: &Matrix, tol: &ToleranceConfig) -> Result<Svd> {
    check_finite(m, "matrix")?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: Matrix::zeros(rows, 0),
            singular: Vec::new(),
            v_t: Matrix::zeros(0, cols),
            rows,
            cols,
        });
    }
    if rows.min(cols) <= COMPRESS_ABOVE {
        return Ok(dense_svd(m));
    }
    let basis = column_range(m, tol);
    if basis.ncols() == 0 {
        return Ok(Svd {
            u: Matrix::zeros(rows, 0),
            singular: Vec::new(),
            v_t: Matrix::zeros(0, cols),
            rows,
            cols,
        });
    }
    let projected = basis.tr_mul(m);
    let small = dense_svd(&projected);
    Ok(Svd {
        u: &basis * small.u,
        singular: small.singular,
        v_t: small.v_t,
        rows,
        cols,
    })
}

fn dense_svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let dec = SVD::new(m.clone(), true, true);
    let u = dec.u.expect("left singular vectors requested");
    let v_t = dec.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let singular = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u = Matrix::from_fn(rows, order.len(), |r, c| u[(r, order[c])]);
    let v_t = Matrix::from_fn(order.len(), cols, |r, c| v_t[(order[r], c)]);
    Svd {
        u,
        singular,
        v_t,
        rows,
        cols,
    }
}

/// Orthonormal basis of the numerical column space by column-pivoted
/// Gram-Schmidt on the residual, stopping once the residual Frobenius norm
/// falls well below the smallest possible rank threshold.
fn column_range(m: &Matrix, tol: &ToleranceConfig) -> Matrix {
    let (rows, cols) = m.shape();
    let fro = m.norm();
    if fro == 0.0 {
        return Matrix::zeros(rows, 0);
    }
    let kmax = rows.min(cols);
    let sigma_lo = fro / (kmax as f64).sqrt();
    let stop = COMPRESS_SAFETY * tol.threshold(rows, cols, sigma_lo);

    let mut residual = m.clone();
    let mut basis: Vec<Vector> = Vec::new();
    while basis.len() < kmax {
        let norms: Vec<f64> = residual.column_iter().map(|c| c.norm_squared()).collect();
        let total: f64 = norms.iter().sum();
        if total.sqrt() <= stop {
            break;
        }
        let pivot = norms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap_or(0);
        let mut q = residual.column(pivot).clone_owned();
        for _ in 0..2 {
            for prev in &basis {
                let c = prev.dot(&q);
                q.axpy(-c, prev, 1.0);
            }
        }
        let nq = q.norm();
        if nq == 0.0 {
            break;
        }
        q /= nq;
        let coeffs = residual.tr_mul(&q);
        residual.ger(-1.0, &q, &coeffs, 1.0);
        basis.push(q);
    }
    if basis.is_empty() {
        Matrix::zeros(rows, 0)
    } else {
        Matrix::from_columns(&basis)
    }
}

pub fn numerical_rank(m: &Matrix, tol: &ToleranceConfig) -> Result<usize> {
    Ok(svd(m, tol)?.rank(tol))
}

/// Moore-Penrose pseudoinverse with sub-threshold singular values zeroed.
pub fn pseudoinverse(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    let dec = svd(m, tol)?;
    let r = dec.rank(tol);
    let mut v = dec.v_t.rows(0, r).transpose();
    for (k, mut col) in v.column_iter_mut().enumerate() {
        col /= dec.singular[k];
    }
    Ok(v * dec.u.columns(0, r).transpose())
}

/// Full-rank factorization `M = left * right` with balanced SVD factors
/// `left = U S^{1/2}`, `right = S^{1/2} V^T`.
#[derive(Debug, Clone)]
pub struct RankFactors {
    pub left: Matrix,
    pub right: Matrix,
    pub rank: usize,
}

pub fn rank_factorize(m: &Matrix, tol: &ToleranceConfig) -> Result<RankFactors> {
    let dec = svd(m, tol)?;
    let r = dec.rank(tol);
    let mut left = dec.u.columns(0, r).clone_owned();
    let mut right = dec.v_t.rows(0, r).clone_owned();
    for k in 0..r {
        let s = dec.singular[k].sqrt();
        left.column_mut(k).scale_mut(s);
        right.row_mut(k).scale_mut(s);
    }
    Ok(RankFactors {
        left,
        right,
        rank: r,
    })
}

/// Orthonormal basis (as columns) of the numerical column space.
pub fn column_space_basis(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    let dec = svd(m, tol)?;
    let r = dec.rank(tol);
    Ok(dec.u.columns(0, r).clone_owned())
}

/// Orthonormal basis (as rows) of the numerical row space.
pub fn row_space_basis(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    let dec = svd(m, tol)?;
    let r = dec.rank(tol);
    Ok(dec.v_t.rows(0, r).clone_owned())
}
