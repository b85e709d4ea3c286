//! The affine LPV system type, its simulation, and evaluation of an
//! input-output map from its convolution kernel.
//!
//! A system with scheduling dimension `D` evolves as
//!
//! ```text
//! x(t+1) = sum_q (A_q x(t) + B_q u(t)) p_q(t)
//! y(t)   = sum_q  C_q x(t) p_q(t)
//! ```
//!
//! Scheduling vectors may be any point of `R^D`.

use crate::error::{Error, Result};
use crate::markov::MarkovTable;
use crate::numlin::{Matrix, Vector};
use crate::words::words_of_length;

#[derive(Debug, Clone, PartialEq)]
pub struct AlpvSystem {
    n: usize,
    m: usize,
    p: usize,
    a: Vec<Matrix>,
    b: Vec<Matrix>,
    c: Vec<Matrix>,
}

impl AlpvSystem {
    /// Builds a system from explicit dimensions and matrix families; entry
    /// `q - 1` of each family holds the matrix for scheduling coordinate `q`.
    pub fn new(
        d: usize,
        n: usize,
        m: usize,
        p: usize,
        a: Vec<Matrix>,
        b: Vec<Matrix>,
        c: Vec<Matrix>,
    ) -> Result<Self> {
        let sys = AlpvSystem { n, m, p, a, b, c };
        sys.validate_with(d)?;
        Ok(sys)
    }

    /// Infers `(D, n, m, p)` from the matrices themselves.
    pub fn from_matrices(a: Vec<Matrix>, b: Vec<Matrix>, c: Vec<Matrix>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidAlphabet);
        }
        let n = a[0].nrows();
        let m = b.first().map(|x| x.ncols()).unwrap_or(0);
        let p = c.first().map(|x| x.nrows()).unwrap_or(0);
        AlpvSystem::new(a.len(), n, m, p, a, b, c)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(self.a.len())
    }

    fn validate_with(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::InvalidAlphabet);
        }
        if self.m == 0 {
            return Err(Error::dims("input dimension m", ">= 1", 0));
        }
        if self.p == 0 {
            return Err(Error::dims("output dimension p", ">= 1", 0));
        }
        for (name, family) in [("A", &self.a), ("B", &self.b), ("C", &self.c)] {
            if family.len() != d {
                return Err(Error::dims(format!("number of {name} matrices"), d, family.len()));
            }
        }
        let (n, m, p) = (self.n, self.m, self.p);
        for q in 0..d {
            let checks = [
                ("A", &self.a[q], (n, n)),
                ("B", &self.b[q], (n, m)),
                ("C", &self.c[q], (p, n)),
            ];
            for (name, mat, want) in checks {
                if mat.shape() != want {
                    return Err(Error::dims(
                        format!("{name}_{}", q + 1),
                        format!("{}x{}", want.0, want.1),
                        format!("{}x{}", mat.nrows(), mat.ncols()),
                    ));
                }
                if mat.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFiniteEntry(format!("{name}_{}", q + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn sched_dim(&self) -> usize {
        self.a.len()
    }
    pub fn state_dim(&self) -> usize {
        self.n
    }
    pub fn input_dim(&self) -> usize {
        self.m
    }
    pub fn output_dim(&self) -> usize {
        self.p
    }

    pub fn a(&self) -> &[Matrix] {
        &self.a
    }
    pub fn b(&self) -> &[Matrix] {
        &self.b
    }
    pub fn c(&self) -> &[Matrix] {
        &self.c
    }

    /// `[B_1, ..., B_D]`, n x mD.
    pub fn b_tilde(&self) -> Matrix {
        let (n, m, d) = (self.n, self.m, self.sched_dim());
        let mut out = Matrix::zeros(n, m * d);
        for (q, bq) in self.b.iter().enumerate() {
            out.view_mut((0, q * m), (n, m)).copy_from(bq);
        }
        out
    }

    /// `[C_1; ...; C_D]`, pD x n.
    pub fn c_tilde(&self) -> Matrix {
        let (n, p, d) = (self.n, self.p, self.sched_dim());
        let mut out = Matrix::zeros(p * d, n);
        for (q, cq) in self.c.iter().enumerate() {
            out.view_mut((q * p, 0), (p, n)).copy_from(cq);
        }
        out
    }

    /// The system with every matrix transformed by the state change
    /// `x' = T x`: `(T A_q T^-1, T B_q, C_q T^-1)`.
    pub fn transform(&self, t: &Matrix, t_inv: &Matrix) -> Result<AlpvSystem> {
        if t.shape() != (self.n, self.n) || t_inv.shape() != (self.n, self.n) {
            return Err(Error::dims(
                "state transformation",
                format!("{0}x{0}", self.n),
                format!("{}x{}", t.nrows(), t.ncols()),
            ));
        }
        AlpvSystem::new(
            self.sched_dim(),
            self.n,
            self.m,
            self.p,
            self.a.iter().map(|a| t * a * t_inv).collect(),
            self.b.iter().map(|b| t * b).collect(),
            self.c.iter().map(|c| c * t_inv).collect(),
        )
    }
}

/// A finite sequence of (scheduling vector, input vector) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedInputSeq {
    d: usize,
    m: usize,
    sched: Vec<Vector>,
    inputs: Vec<Vector>,
}

impl GeneralizedInputSeq {
    pub fn new(d: usize, m: usize, steps: Vec<(Vector, Vector)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidAlphabet);
        }
        if steps.is_empty() {
            return Err(Error::InvalidArgument("input sequence must be nonempty".into()));
        }
        let mut sched = Vec::with_capacity(steps.len());
        let mut inputs = Vec::with_capacity(steps.len());
        for (t, (pt, ut)) in steps.into_iter().enumerate() {
            if pt.len() != d {
                return Err(Error::dims(format!("scheduling vector p({t})"), d, pt.len()));
            }
            if ut.len() != m {
                return Err(Error::dims(format!("input vector u({t})"), m, ut.len()));
            }
            if pt.iter().chain(ut.iter()).any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteEntry(format!("step {t} of input sequence")));
            }
            sched.push(pt);
            inputs.push(ut);
        }
        Ok(GeneralizedInputSeq { d, m, sched, inputs })
    }

    /// Convenience constructor from plain slices.
    pub fn from_rows(d: usize, m: usize, rows: &[(&[f64], &[f64])]) -> Result<Self> {
        let steps = rows
            .iter()
            .map(|(p, u)| (Vector::from_column_slice(p), Vector::from_column_slice(u)))
            .collect();
        GeneralizedInputSeq::new(d, m, steps)
    }

    pub fn len(&self) -> usize {
        self.sched.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sched.is_empty()
    }

    pub fn sched_dim(&self) -> usize {
        self.d
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn sched(&self, t: usize) -> &Vector {
        &self.sched[t]
    }

    pub fn input(&self, t: usize) -> &Vector {
        &self.inputs[t]
    }

    /// The first `len` steps.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::InvalidArgument(format!(
                "prefix length {len} outside 1..={}",
                self.len()
            )));
        }
        Ok(GeneralizedInputSeq {
            d: self.d,
            m: self.m,
            sched: self.sched[..len].to_vec(),
            inputs: self.inputs[..len].to_vec(),
        })
    }

    pub fn push(&mut self, p: Vector, u: Vector) -> Result<()> {
        if p.len() != self.d {
            return Err(Error::dims("scheduling vector", self.d, p.len()));
        }
        if u.len() != self.m {
            return Err(Error::dims("input vector", self.m, u.len()));
        }
        self.sched.push(p);
        self.inputs.push(u);
        Ok(())
    }
}

/// States `x(0) ... x(T+1)` and outputs `y(0) ... y(T)` of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub states: Vec<Vector>,
    pub outputs: Vec<Vector>,
}

impl SimResult {
    /// Value of the input-output map: the output at the final time.
    pub fn last_output(&self) -> &Vector {
        self.outputs.last().expect("input sequences are nonempty")
    }
}

pub fn simulate(sys: &AlpvSystem, x0: &Vector, w: &GeneralizedInputSeq) -> Result<SimResult> {
    if w.sched_dim() != sys.sched_dim() {
        return Err(Error::dims("scheduling dimension of input", sys.sched_dim(), w.sched_dim()));
    }
    if w.input_dim() != sys.input_dim() {
        return Err(Error::dims("input dimension of input", sys.input_dim(), w.input_dim()));
    }
    if x0.len() != sys.state_dim() {
        return Err(Error::dims("initial state", sys.state_dim(), x0.len()));
    }
    let (n, p) = (sys.state_dim(), sys.output_dim());
    let mut states = Vec::with_capacity(w.len() + 1);
    let mut outputs = Vec::with_capacity(w.len());
    let mut x = x0.clone();
    states.push(x.clone());
    for t in 0..w.len() {
        let pt = w.sched(t);
        let ut = w.input(t);
        let mut y = Vector::zeros(p);
        let mut next = Vector::zeros(n);
        for q in 0..sys.sched_dim() {
            let weight = pt[q];
            y.gemv(weight, &sys.c[q], &x, 1.0);
            next.gemv(weight, &sys.a[q], &x, 1.0);
            next.gemv(weight, &sys.b[q], ut, 1.0);
        }
        outputs.push(y);
        x = next;
        states.push(x.clone());
    }
    Ok(SimResult { states, outputs })
}

/// Evaluates `f(w)` from the convolution kernel by direct enumeration:
///
/// ```text
/// f(w) = sum_{k<t} sum_{|v| = t-k+1} S(v) p_{v_0}(k) ... p_{v_{t-k}}(t) u(k)
/// ```
pub fn gcr_output(table: &MarkovTable, w: &GeneralizedInputSeq) -> Result<Vector> {
    let (d, m, p) = (table.sched_dim(), table.input_dim(), table.output_dim());
    if w.sched_dim() != d {
        return Err(Error::dims("scheduling dimension of input", d, w.sched_dim()));
    }
    if w.input_dim() != m {
        return Err(Error::dims("input dimension of input", m, w.input_dim()));
    }
    if w.len() > table.horizon() {
        return Err(Error::HorizonExceeded {
            needed: w.len(),
            horizon: table.horizon(),
        });
    }
    let t = w.len() - 1;
    let mut out = Vector::zeros(p);
    for k in 0..t {
        let uk = w.input(k);
        if uk.iter().all(|&x| x == 0.0) {
            continue;
        }
        let mut acc = Matrix::zeros(p, m);
        for v in words_of_length(t - k + 1, d)? {
            let weight: f64 = v
                .symbols()
                .iter()
                .enumerate()
                .map(|(s, &q)| w.sched(k + s)[q - 1])
                .product();
            if weight != 0.0 {
                acc += table.get(&v)? * weight;
            }
        }
        out += acc * uk;
    }
    Ok(out)
}
