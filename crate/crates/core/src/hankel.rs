//! Finite upper-left blocks `H_{L,M}` of the Hankel matrix: block row `i`,
//! block column `j` hold `M(v_j v_i)` for `i <= N(L)`, `j <= N(M)`.

use crate::error::{Error, Result};
use crate::markov::MarkovSource;
use crate::numlin::{numerical_rank, Matrix, ToleranceConfig};
use crate::words::{word_count, word_to_index, words_up_to};

#[derive(Debug, Clone, PartialEq)]
pub struct HankelBlockMatrix {
    row_len: usize,
    col_len: usize,
    d: usize,
    m: usize,
    p: usize,
    data: Matrix,
}

impl HankelBlockMatrix {
    /// Wraps a dense matrix with its block metadata; the shape must be
    /// `N(L) p D x N(M) m D`.
    pub fn from_parts(
        row_len: usize,
        col_len: usize,
        d: usize,
        m: usize,
        p: usize,
        data: Matrix,
    ) -> Result<Self> {
        let rows = word_count(row_len, d)? * p * d;
        let cols = word_count(col_len, d)? * m * d;
        if data.shape() != (rows, cols) {
            return Err(Error::dims(
                format!("Hankel matrix for L={row_len}, M={col_len}"),
                format!("{rows}x{cols}"),
                format!("{}x{}", data.nrows(), data.ncols()),
            ));
        }
        crate::numlin::check_finite(&data, "Hankel matrix")?;
        Ok(HankelBlockMatrix {
            row_len,
            col_len,
            d,
            m,
            p,
            data,
        })
    }

    /// Row word-length bound `L`.
    pub fn row_len(&self) -> usize {
        self.row_len
    }
    /// Column word-length bound `M`.
    pub fn col_len(&self) -> usize {
        self.col_len
    }
    pub fn sched_dim(&self) -> usize {
        self.d
    }
    pub fn input_dim(&self) -> usize {
        self.m
    }
    pub fn output_dim(&self) -> usize {
        self.p
    }
    pub fn data(&self) -> &Matrix {
        &self.data
    }
    pub fn into_data(self) -> Matrix {
        self.data
    }

    /// Block `(i, j)` with 1-based block indices.
    pub fn block(&self, i: usize, j: usize) -> Matrix {
        let (bp, bm) = (self.p * self.d, self.m * self.d);
        self.data.view(((i - 1) * bp, (j - 1) * bm), (bp, bm)).clone_owned()
    }

    pub fn rank(&self, tol: &ToleranceConfig) -> Result<usize> {
        numerical_rank(&self.data, tol)
    }
}

pub fn build_hankel<S: MarkovSource + ?Sized>(
    src: &S,
    row_len: usize,
    col_len: usize,
) -> Result<HankelBlockMatrix> {
    let (d, m, p) = (src.sched_dim(), src.input_dim(), src.output_dim());
    let total = row_len + col_len;
    if let Some(max) = src.max_m_word_len() {
        if total > max {
            return Err(Error::HorizonExceeded {
                needed: total + 2,
                horizon: max + 2,
            });
        }
    }
    let blocks = src.m_blocks_up_to(total)?;
    let rows = words_up_to(row_len, d)?;
    let cols = words_up_to(col_len, d)?;
    let (bp, bm) = (p * d, m * d);
    let mut data = Matrix::zeros(rows.len() * bp, cols.len() * bm);
    // column-major over block columns
    for (j, vj) in cols.iter().enumerate() {
        for (i, vi) in rows.iter().enumerate() {
            let k = word_to_index(&vj.concat(vi))? - 1;
            data.view_mut((i * bp, j * bm), (bp, bm)).copy_from(&blocks[k]);
        }
    }
    Ok(HankelBlockMatrix {
        row_len,
        col_len,
        d,
        m,
        p,
        data,
    })
}

pub fn hankel_rank<S: MarkovSource + ?Sized>(
    src: &S,
    row_len: usize,
    col_len: usize,
    tol: &ToleranceConfig,
) -> Result<usize> {
    build_hankel(src, row_len, col_len)?.rank(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::markov::{m_block, MarkovTable, OracleSource, SystemOracle};
    use crate::model::AlpvSystem;
    use crate::words::index_to_word;
    use approx::assert_relative_eq;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn sigma_star_h01() {
        let h = build_hankel(&fixtures::sigma_star(), 0, 1).unwrap();
        let want = Matrix::from_row_slice(
            2,
            6,
            &[1.0, 3.0, 0.5, 1.5, 0.0, 0.0, 2.0, 6.0, 1.0, 3.0, 0.0, 0.0],
        );
        assert_eq!(*h.data(), want);
        assert_eq!(h.rank(&tol()).unwrap(), 1);
    }

    #[test]
    fn size_rule() {
        let h = build_hankel(&fixtures::sigma2(), 1, 2).unwrap();
        assert_eq!(h.data().shape(), (6, 14));
        assert_eq!(h.rank(&tol()).unwrap(), 2);
    }

    #[test]
    fn blocks_follow_definition() {
        let s = fixtures::sigma2();
        let h = build_hankel(&s, 2, 1).unwrap();
        for i in 1..=word_count(2, 2).unwrap() {
            for j in 1..=word_count(1, 2).unwrap() {
                let v = index_to_word(j, 2).unwrap().concat(&index_to_word(i, 2).unwrap());
                assert_eq!(h.block(i, j), m_block(&s, &v).unwrap());
            }
        }
    }

    #[test]
    fn ranks() {
        assert_eq!(hankel_rank(&fixtures::sigma_star(), 0, 1, &tol()).unwrap(), 1);
        assert_eq!(hankel_rank(&fixtures::sigma2(), 1, 1, &tol()).unwrap(), 2);
        let z = fixtures::sigma2();
        let zero_b = AlpvSystem::new(
            2,
            2,
            1,
            1,
            z.a().to_vec(),
            vec![Matrix::zeros(2, 1); 2],
            z.c().to_vec(),
        )
        .unwrap();
        assert_eq!(hankel_rank(&zero_b, 2, 2, &tol()).unwrap(), 0);
    }

    #[test]
    fn sources_agree() {
        let s = fixtures::sigma2();
        let from_sys = build_hankel(&s, 1, 2).unwrap();
        let table = MarkovTable::from_system(&s, 5).unwrap();
        let from_table = build_hankel(&table, 1, 2).unwrap();
        let oracle = SystemOracle::new(&s);
        let from_oracle = build_hankel(&OracleSource(&oracle), 1, 2).unwrap();
        assert_relative_eq!(from_sys.data(), from_table.data(), epsilon = 1e-14);
        assert_relative_eq!(from_sys.data(), from_oracle.data(), epsilon = 1e-14);
        assert!(matches!(build_hankel(&table, 2, 2), Err(Error::HorizonExceeded { .. })));
    }

    #[test]
    fn from_parts_checks_shape() {
        assert!(HankelBlockMatrix::from_parts(0, 1, 2, 1, 1, Matrix::zeros(2, 6)).is_ok());
        assert!(HankelBlockMatrix::from_parts(0, 1, 2, 1, 1, Matrix::zeros(2, 5)).is_err());
    }
}
