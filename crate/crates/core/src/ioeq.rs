//! Affine polynomial input-output equations
//!
//! ```text
//! E = sum_{j=0..n} Q_j(P) Y_j + sum_{i=1..n} sum_{l=1..m} L_{i,l}(P) U_{i,l}
//! ```
//!
//! with polynomial coefficients in the shifted scheduling values
//! `P_{i,j} = p_j(t - i)`, and `Y_i` the output after the input prefix that
//! ends at time `t - i`. Only scalar-output maps are handled.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::hankel_rank;
use crate::markov::MarkovSource;
use crate::model::{simulate, AlpvSystem, GeneralizedInputSeq};
use crate::numlin::{ToleranceConfig, Vector};

/// The variable `P_{lag,coord}`; `coord` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub lag: usize,
    pub coord: usize,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P_{}_{}", self.lag, self.coord)
    }
}

impl Var {
    /// Parses the literal key form `P_<i>_<j>`.
    pub fn parse(key: &str) -> Result<Var> {
        let bad = || Error::InvalidArgument(format!("bad variable key {key:?}, expected P_<i>_<j>"));
        let rest = key.strip_prefix("P_").ok_or_else(bad)?;
        let (lag, coord) = rest.split_once('_').ok_or_else(bad)?;
        Ok(Var {
            lag: lag.parse().map_err(|_| bad())?,
            coord: coord.parse().map_err(|_| bad())?,
        })
    }
}

/// Exponents of the variables of one monomial; absent variables have
/// exponent zero.
pub type Monomial = BTreeMap<Var, u32>;

/// Values for the `P` variables.
pub type Assignment = BTreeMap<Var, f64>;

/// Sparse real polynomial in the `P` variables. Zero coefficients and zero
/// exponents are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PPoly {
    terms: BTreeMap<Monomial, f64>,
}

impl PPoly {
    pub fn zero() -> Self {
        PPoly::default()
    }

    pub fn constant(c: f64) -> Self {
        PPoly::monomial(c, Monomial::new())
    }

    pub fn monomial(coeff: f64, exps: Monomial) -> Self {
        let mut p = PPoly::zero();
        p.add_term(coeff, exps);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (f64, Monomial)>) -> Self {
        let mut p = PPoly::zero();
        for (c, e) in terms {
            p.add_term(c, e);
        }
        p
    }

    /// Adds `coeff * monomial`, merging with an existing equal monomial.
    pub fn add_term(&mut self, coeff: f64, mut exps: Monomial) {
        exps.retain(|_, e| *e != 0);
        let slot = self.terms.entry(exps).or_insert(0.0);
        *slot += coeff;
        self.terms.retain(|_, c| *c != 0.0);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.keys().flat_map(|m| m.keys().copied())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn scaled(&self, k: f64) -> PPoly {
        PPoly::from_terms(self.terms.iter().map(|(m, c)| (c * k, m.clone())))
    }
}

pub fn eval_ppoly(poly: &PPoly, assign: &Assignment) -> Result<f64> {
    let mut total = 0.0;
    for (mono, coeff) in poly.terms() {
        let mut term = coeff;
        for (var, &e) in mono {
            let x = assign
                .get(var)
                .ok_or_else(|| Error::MissingVariable(var.to_string()))?;
            term *= x.powi(e as i32);
        }
        total += term;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineIoEquation {
    n: usize,
    m: usize,
    d: usize,
    q: Vec<PPoly>,
    l: Vec<Vec<PPoly>>,
}

impl AffineIoEquation {
    /// `q` holds `Q_0 ... Q_n`; `l[i - 1][k - 1]` holds `L_{i,k}`.
    pub fn new(n: usize, m: usize, d: usize, q: Vec<PPoly>, l: Vec<Vec<PPoly>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidAlphabet);
        }
        if q.len() != n + 1 {
            return Err(Error::dims("number of output coefficients Q", n + 1, q.len()));
        }
        if l.len() != n {
            return Err(Error::dims("number of input coefficient rows L", n, l.len()));
        }
        if let Some(row) = l.iter().find(|row| row.len() != m) {
            return Err(Error::dims("input coefficients per row of L", m, row.len()));
        }
        for poly in q.iter().chain(l.iter().flatten()) {
            for var in poly.vars() {
                if var.lag > n || var.coord == 0 || var.coord > d {
                    return Err(Error::InvalidArgument(format!(
                        "variable {var} outside lags 0..={n}, coordinates 1..={d}"
                    )));
                }
            }
            if poly.terms().any(|(_, c)| !c.is_finite()) {
                return Err(Error::NonFiniteEntry("equation coefficient".into()));
            }
        }
        if q[0].is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        Ok(AffineIoEquation { n, m, d, q, l })
    }

    pub fn order(&self) -> usize {
        self.n
    }
    pub fn input_dim(&self) -> usize {
        self.m
    }
    pub fn sched_dim(&self) -> usize {
        self.d
    }
    pub fn q(&self) -> &[PPoly] {
        &self.q
    }
    pub fn l(&self) -> &[Vec<PPoly>] {
        &self.l
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.q
            .iter()
            .chain(self.l.iter().flatten())
            .fold(0.0, |a, p| a.max(p.max_abs_coeff()))
    }

    /// Every coefficient multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        AffineIoEquation::new(
            self.n,
            self.m,
            self.d,
            self.q.iter().map(|p| p.scaled(k)).collect(),
            self.l
                .iter()
                .map(|row| row.iter().map(|p| p.scaled(k)).collect())
                .collect(),
        )
    }

    /// Scaled so the largest coefficient magnitude is 1.
    pub fn normalized(&self) -> Result<Self> {
        self.scaled(1.0 / self.max_abs_coeff())
    }
}

/// `E(f, w)` at the final time `t = |w| - 1` given the outputs
/// `y(0) ... y(t)` produced along `w`.
pub fn equation_residual(
    eq: &AffineIoEquation,
    w: &GeneralizedInputSeq,
    outputs: &[Vector],
) -> Result<f64> {
    if w.sched_dim() != eq.d {
        return Err(Error::dims("scheduling dimension", eq.d, w.sched_dim()));
    }
    if w.input_dim() != eq.m {
        return Err(Error::dims("input dimension", eq.m, w.input_dim()));
    }
    if outputs.len() != w.len() {
        return Err(Error::dims("number of outputs", w.len(), outputs.len()));
    }
    if let Some(y) = outputs.iter().find(|y| y.len() != 1) {
        return Err(Error::OutputDimNotScalar(y.len()));
    }
    let t = w.len() - 1;
    let n = eq.n;
    if t <= n {
        return Err(Error::TrajectoryTooShort { t, n });
    }
    let mut assign = Assignment::new();
    for lag in 0..=n {
        let p = w.sched(t - lag);
        for coord in 1..=eq.d {
            assign.insert(Var { lag, coord }, p[coord - 1]);
        }
    }
    let mut total = 0.0;
    for (j, qj) in eq.q.iter().enumerate() {
        total += eval_ppoly(qj, &assign)? * outputs[t - j][0];
    }
    for (i, row) in eq.l.iter().enumerate() {
        let u = w.input(t - (i + 1));
        for (k, lik) in row.iter().enumerate() {
            total += eval_ppoly(lik, &assign)? * u[k];
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub satisfied: bool,
    pub max_residual: f64,
    pub trials: usize,
}

/// Samples `trials` random trajectories (lengths `n+2 ..= n+6`, scheduling
/// and inputs uniform in `(-1, 1)`) and evaluates the normalized equation
/// at the final time of each. Trial `k` draws from stream `k` of a ChaCha
/// generator seeded with `seed`.
pub fn check_equation(
    eq: &AffineIoEquation,
    sys: &AlpvSystem,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<EquationCheck> {
    if sys.output_dim() != 1 {
        return Err(Error::OutputDimNotScalar(sys.output_dim()));
    }
    if eq.q[0].is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    if sys.sched_dim() != eq.d {
        return Err(Error::dims("scheduling dimension of equation", sys.sched_dim(), eq.d));
    }
    if sys.input_dim() != eq.m {
        return Err(Error::dims("input dimension of equation", sys.input_dim(), eq.m));
    }
    let eq = eq.normalized()?;
    let outcomes: Vec<(f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = rng.gen_range(eq.n + 2..=eq.n + 6);
            let steps = (0..len)
                .map(|_| {
                    let p = Vector::from_fn(eq.d, |_, _| rng.gen_range(-1.0..1.0));
                    let u = Vector::from_fn(eq.m, |_, _| rng.gen_range(-1.0..1.0));
                    (p, u)
                })
                .collect();
            let w = GeneralizedInputSeq::new(eq.d, eq.m, steps)?;
            let run = simulate(sys, &Vector::zeros(sys.state_dim()), &w)?;
            let r = equation_residual(&eq, &w, &run.outputs)?.abs();
            let y_max = run.outputs.iter().fold(0.0f64, |a, y| a.max(y[0].abs()));
            Ok((r, r <= tol * (1.0 + y_max)))
        })
        .collect::<Result<_>>()?;
    Ok(EquationCheck {
        satisfied: outcomes.iter().all(|o| o.1),
        max_residual: outcomes.iter().fold(0.0, |a, o| a.max(o.0)),
        trials,
    })
}

/// Dimension of the span of the shifted responses, computed as
/// `rank H_{bound-1, bound-1}`; exact once `bound` exceeds the minimal
/// realization dimension.
pub fn wf_dimension<S: MarkovSource + ?Sized>(
    src: &S,
    bound: usize,
    tol: &ToleranceConfig,
) -> Result<usize> {
    if bound == 0 {
        return Err(Error::InvalidArgument("dimension bound must be at least 1".into()));
    }
    hankel_rank(src, bound - 1, bound - 1, tol)
}
