//! Extended reachability/observability matrices, rank tests, Kalman-Ho
//! realization from a Hankel block, reduction to a minimal system and
//! recovery of the state-space isomorphism between minimal realizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::HankelBlockMatrix;
use crate::model::AlpvSystem;
use crate::numlin::{
    column_space_basis, numerical_rank, pseudoinverse, rank_factorize, row_space_basis, Matrix,
    ToleranceConfig,
};
use crate::words::{word_count, word_to_index, words_up_to};

/// `R_0 = [B_1 ... B_D]`, `R_{i+1} = [R_i, A_1 R_i, ..., A_D R_i]`.
/// Size `n x mD (D+1)^i`.
pub fn extended_reachability(sys: &AlpvSystem, depth: usize) -> Matrix {
    let mut r = sys.b_tilde();
    for _ in 0..depth {
        let w = r.ncols();
        let mut next = Matrix::zeros(sys.state_dim(), w * (sys.sched_dim() + 1));
        next.columns_mut(0, w).copy_from(&r);
        for (q, a) in sys.a().iter().enumerate() {
            next.columns_mut((q + 1) * w, w).copy_from(&(a * &r));
        }
        r = next;
    }
    r
}

/// `O_0 = [C_1; ...; C_D]`, `O_{i+1} = [O_i; O_i A_1; ...; O_i A_D]`.
/// Size `pD (D+1)^i x n`.
pub fn extended_observability(sys: &AlpvSystem, depth: usize) -> Matrix {
    let mut o = sys.c_tilde();
    for _ in 0..depth {
        let h = o.nrows();
        let mut next = Matrix::zeros(h * (sys.sched_dim() + 1), sys.state_dim());
        next.rows_mut(0, h).copy_from(&o);
        for (q, a) in sys.a().iter().enumerate() {
            next.rows_mut((q + 1) * h, h).copy_from(&(&o * a));
        }
        o = next;
    }
    o
}

/// Word-indexed reachability matrix: block column `j` is
/// `A_{q_k} ... A_{q_1} B~` for `v_j = q_1 ... q_k`, `j <= N(M)`.
/// Spans the same space as [`extended_reachability`] at equal depth and
/// satisfies `H_{L,M} = lex_observability(L) * lex_reachability(M)`.
pub fn lex_reachability(sys: &AlpvSystem, max_len: usize) -> Result<Matrix> {
    let d = sys.sched_dim();
    let bm = sys.input_dim() * d;
    let words = words_up_to(max_len, d)?;
    let mut out = Matrix::zeros(sys.state_dim(), words.len() * bm);
    for (j, v) in words.iter().enumerate() {
        let mut x = sys.b_tilde();
        for &q in v.symbols() {
            x = &sys.a()[q - 1] * x;
        }
        out.columns_mut(j * bm, bm).copy_from(&x);
    }
    Ok(out)
}

/// Word-indexed observability matrix: block row `i` is
/// `C~ A_{q_k} ... A_{q_1}` for `v_i = q_1 ... q_k`, `i <= N(L)`.
pub fn lex_observability(sys: &AlpvSystem, max_len: usize) -> Result<Matrix> {
    let d = sys.sched_dim();
    let bp = sys.output_dim() * d;
    let words = words_up_to(max_len, d)?;
    let mut out = Matrix::zeros(words.len() * bp, sys.state_dim());
    for (i, v) in words.iter().enumerate() {
        let mut x = sys.c_tilde();
        for &q in v.symbols().iter().rev() {
            x *= &sys.a()[q - 1];
        }
        out.rows_mut(i * bp, bp).copy_from(&x);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub reach_rank: usize,
    pub obs_rank: usize,
    pub n: usize,
    pub reachable: bool,
    pub observable: bool,
    pub minimal: bool,
}

impl AnalysisReport {
    pub fn from_ranks(n: usize, reach_rank: usize, obs_rank: usize) -> Self {
        let reachable = reach_rank == n;
        let observable = obs_rank == n;
        AnalysisReport {
            reach_rank,
            obs_rank,
            n,
            reachable,
            observable,
            minimal: reachable && observable,
        }
    }
}

/// Rank tests on `R_{n-1}` and `O_{n-1}`.
pub fn analyze(sys: &AlpvSystem, tol: &ToleranceConfig) -> Result<AnalysisReport> {
    let n = sys.state_dim();
    if n == 0 {
        return Ok(AnalysisReport::from_ranks(0, 0, 0));
    }
    let reach_rank = numerical_rank(&extended_reachability(sys, n - 1), tol)?;
    let obs_rank = numerical_rank(&extended_observability(sys, n - 1), tol)?;
    Ok(AnalysisReport::from_ranks(n, reach_rank, obs_rank))
}

/// Kalman-Ho realization from `H_{L,L+1}`. The returned system has state
/// dimension `rank H_{L,L+1}`; it realizes the map whenever
/// `rank H_{L,L}` already equals the rank of the full Hankel matrix, which
/// holds if some realization has dimension at most `L + 1`.
pub fn kalman_ho(h: &HankelBlockMatrix, tol: &ToleranceConfig) -> Result<AlpvSystem> {
    let l = h.row_len();
    if h.col_len() != l + 1 {
        return Err(Error::ShapeMismatch(format!(
            "Kalman-Ho needs column bound M = L + 1 = {}, got M = {}",
            l + 1,
            h.col_len()
        )));
    }
    let (d, m, p) = (h.sched_dim(), h.input_dim(), h.output_dim());
    let bm = m * d;
    let factors = rank_factorize(h.data(), tol)?;
    let n = factors.rank;
    let (obs, reach) = (&factors.left, &factors.right);

    let words = words_up_to(l, d)?;
    let n_l = word_count(l, d)?;
    let r_bar = reach.columns(0, n_l * bm).clone_owned();
    let r_bar_pinv = pseudoinverse(&r_bar, tol)?;

    let mut a = Vec::with_capacity(d);
    for q in 1..=d {
        let mut shifted = Matrix::zeros(n, n_l * bm);
        for (j, vj) in words.iter().enumerate() {
            let mut vq = vj.clone();
            vq.push(q)?;
            let k = word_to_index(&vq)? - 1;
            shifted
                .columns_mut(j * bm, bm)
                .copy_from(&reach.columns(k * bm, bm));
        }
        a.push(shifted * &r_bar_pinv);
    }
    let b = (0..d)
        .map(|q| reach.columns(q * m, m).clone_owned())
        .collect();
    let c = (0..d)
        .map(|q| obs.view((q * p, 0), (p, n)).clone_owned())
        .collect();
    AlpvSystem::new(d, n, m, p, a, b, c)
}

/// Restriction to the reachable subspace. Returns the reduced system and
/// the orthonormal basis `V` (n x r) with `(V^T A_q V, V^T B_q, C_q V)`.
pub fn reach_reduce(sys: &AlpvSystem, tol: &ToleranceConfig) -> Result<(AlpvSystem, Matrix)> {
    let n = sys.state_dim();
    if n == 0 {
        return Ok((sys.clone(), Matrix::zeros(0, 0)));
    }
    let v = column_space_basis(&extended_reachability(sys, n - 1), tol)?;
    let vt = v.transpose();
    let reduced = AlpvSystem::new(
        sys.sched_dim(),
        v.ncols(),
        sys.input_dim(),
        sys.output_dim(),
        sys.a().iter().map(|a| &vt * a * &v).collect(),
        sys.b().iter().map(|b| &vt * b).collect(),
        sys.c().iter().map(|c| c * &v).collect(),
    )?;
    Ok((reduced, v))
}

/// Quotient by the unobservable subspace. Returns the reduced system and
/// the orthonormal row basis `W` (r x n) with `(W A_q W^T, W B_q, C_q W^T)`.
pub fn obs_reduce(sys: &AlpvSystem, tol: &ToleranceConfig) -> Result<(AlpvSystem, Matrix)> {
    let n = sys.state_dim();
    if n == 0 {
        return Ok((sys.clone(), Matrix::zeros(0, 0)));
    }
    let w = row_space_basis(&extended_observability(sys, n - 1), tol)?;
    let wt = w.transpose();
    let reduced = AlpvSystem::new(
        sys.sched_dim(),
        w.nrows(),
        sys.input_dim(),
        sys.output_dim(),
        sys.a().iter().map(|a| &w * a * &wt).collect(),
        sys.b().iter().map(|b| &w * b).collect(),
        sys.c().iter().map(|c| c * &wt).collect(),
    )?;
    Ok((reduced, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReductionOrder {
    #[default]
    ReachThenObs,
    ObsThenReach,
}

/// Reachability reduction followed by observability reduction.
pub fn minimize(sys: &AlpvSystem, tol: &ToleranceConfig) -> Result<AlpvSystem> {
    minimize_in_order(sys, tol, ReductionOrder::ReachThenObs)
}

pub fn minimize_in_order(
    sys: &AlpvSystem,
    tol: &ToleranceConfig,
    order: ReductionOrder,
) -> Result<AlpvSystem> {
    match order {
        ReductionOrder::ReachThenObs => obs_reduce(&reach_reduce(sys, tol)?.0, tol).map(|r| r.0),
        ReductionOrder::ObsThenReach => reach_reduce(&obs_reduce(sys, tol)?.0, tol).map(|r| r.0),
    }
}

/// A verified state-space isomorphism `T` from `sys1` to `sys2`:
/// `A2_q T = T A1_q`, `B2_q = T B1_q`, `C2_q T = C1_q`.
#[derive(Debug, Clone)]
pub struct Isomorphism {
    pub t: Matrix,
    /// Largest relation residual, each scaled by `1 + max(norm of sides)`.
    pub residual: f64,
}

fn relative_gap(lhs: &Matrix, rhs: &Matrix) -> f64 {
    (lhs - rhs).norm() / (1.0 + lhs.norm().max(rhs.norm()))
}

/// Recovers `T = O2^+ O1` from the extended observability matrices of two
/// minimal systems and verifies every defining relation within
/// `residual_tol`.
pub fn find_isomorphism(
    sys1: &AlpvSystem,
    sys2: &AlpvSystem,
    tol: &ToleranceConfig,
    residual_tol: f64,
) -> Result<Isomorphism> {
    let dims = |s: &AlpvSystem| {
        (
            s.sched_dim(),
            s.input_dim(),
            s.output_dim(),
            s.state_dim(),
        )
    };
    if dims(sys1) != dims(sys2) {
        return Err(Error::dims(
            "system dimensions (D, m, p, n)",
            format!("{:?}", dims(sys1)),
            format!("{:?}", dims(sys2)),
        ));
    }
    let n = sys1.state_dim();
    if n == 0 {
        return Ok(Isomorphism {
            t: Matrix::zeros(0, 0),
            residual: 0.0,
        });
    }
    let o1 = extended_observability(sys1, n - 1);
    let o2 = extended_observability(sys2, n - 1);
    let t = pseudoinverse(&o2, tol)? * o1;

    let mut residual = 0.0f64;
    for q in 0..sys1.sched_dim() {
        residual = residual.max(relative_gap(&(&sys2.a()[q] * &t), &(&t * &sys1.a()[q])));
        residual = residual.max(relative_gap(&sys2.b()[q], &(&t * &sys1.b()[q])));
        residual = residual.max(relative_gap(&(&sys2.c()[q] * &t), &sys1.c()[q]));
    }
    if residual > residual_tol || numerical_rank(&t, tol)? < n {
        return Err(Error::NotIsomorphic {
            residual,
            tol: residual_tol,
        });
    }
    Ok(Isomorphism { t, residual })
}
