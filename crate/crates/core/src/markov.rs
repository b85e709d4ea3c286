//! Markov parameters of input-output maps.
//!
//! The convolution kernel `S(v)` (p x m, `|v| >= 2`) and the block Markov
//! parameter `M(v)` (pD x mD) whose block `(i, j)` is `S(j v i)`. They can be
//! obtained from a state-space system, from a stored table, or by probing a
//! black-box input-output map with unit scheduling vectors.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{simulate, AlpvSystem, GeneralizedInputSeq};
use crate::numlin::{Matrix, Vector};
use crate::words::{word_count, word_to_index, words_of_length, words_up_to, Word};

/// Anything that can produce kernel values `S(v)`.
pub trait MarkovSource {
    fn sched_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;

    /// Kernel value `S(v)` for `|v| >= 2`.
    fn s_coeff(&self, v: &Word) -> Result<Matrix>;

    /// Block Markov parameter `M(v)`.
    fn m_block(&self, v: &Word) -> Result<Matrix> {
        assemble_m_block(self, v)
    }

    /// `M(v)` for every word with `|v| <= max_len`, in enumeration order.
    fn m_blocks_up_to(&self, max_len: usize) -> Result<Vec<Matrix>> {
        words_up_to(max_len, self.sched_dim())?
            .iter()
            .map(|v| self.m_block(v))
            .collect()
    }

    /// Longest `|v|` for which `M(v)` is available, if bounded.
    fn max_m_word_len(&self) -> Option<usize> {
        None
    }
}

fn check_word(v: &Word, d: usize) -> Result<()> {
    if let Some(&bad) = v.symbols().iter().find(|&&q| q == 0 || q > d) {
        return Err(Error::InvalidWord(format!(
            "symbol {bad} of word {v} outside 1..={d}"
        )));
    }
    Ok(())
}

/// Builds `M(v)` block by block from `S(j v i)`.
pub fn assemble_m_block<S: MarkovSource + ?Sized>(src: &S, v: &Word) -> Result<Matrix> {
    let (d, m, p) = (src.sched_dim(), src.input_dim(), src.output_dim());
    check_word(v, d)?;
    let mut out = Matrix::zeros(p * d, m * d);
    for i in 1..=d {
        for j in 1..=d {
            let s = src.s_coeff(&v.wrap(j, i))?;
            out.view_mut(((i - 1) * p, (j - 1) * m), (p, m)).copy_from(&s);
        }
    }
    Ok(out)
}

/// `S(v) = C_{q_t} A_{q_{t-1}} ... A_{q_1} B_{q_0}` for `v = q_0 ... q_t`.
pub fn s_coeff(sys: &AlpvSystem, v: &Word) -> Result<Matrix> {
    check_word(v, sys.sched_dim())?;
    let syms = v.symbols();
    if syms.len() < 2 {
        return Err(Error::WordTooShort {
            word: v.to_string(),
            len: syms.len(),
        });
    }
    let mut x = sys.b()[syms[0] - 1].clone();
    for &q in &syms[1..syms.len() - 1] {
        x = &sys.a()[q - 1] * x;
    }
    Ok(&sys.c()[syms[syms.len() - 1] - 1] * x)
}

/// `M(v) = C~ A_{q_k} ... A_{q_1} B~` for `v = q_1 ... q_k`.
pub fn m_block(sys: &AlpvSystem, v: &Word) -> Result<Matrix> {
    check_word(v, sys.sched_dim())?;
    let mut x = sys.b_tilde();
    for &q in v.symbols() {
        x = &sys.a()[q - 1] * x;
    }
    Ok(sys.c_tilde() * x)
}

impl MarkovSource for AlpvSystem {
    fn sched_dim(&self) -> usize {
        AlpvSystem::sched_dim(self)
    }
    fn input_dim(&self) -> usize {
        AlpvSystem::input_dim(self)
    }
    fn output_dim(&self) -> usize {
        AlpvSystem::output_dim(self)
    }
    fn s_coeff(&self, v: &Word) -> Result<Matrix> {
        s_coeff(self, v)
    }
    fn m_block(&self, v: &Word) -> Result<Matrix> {
        m_block(self, v)
    }

    fn m_blocks_up_to(&self, max_len: usize) -> Result<Vec<Matrix>> {
        let d = AlpvSystem::sched_dim(self);
        let total = word_count(max_len, d)?;
        // chains[k] = A_{v_k reversed} B~; children of word k are appended
        // in enumeration order, so one pass over the list suffices.
        let mut chains = Vec::with_capacity(total);
        chains.push(self.b_tilde());
        let mut parent = 0;
        while chains.len() < total {
            for q in 0..d {
                let child = &self.a()[q] * &chains[parent];
                chains.push(child);
            }
            parent += 1;
        }
        let c = self.c_tilde();
        Ok(chains.iter().map(|x| &c * x).collect())
    }
}

/// Kernel values `S(v)` for every word with `2 <= |v| <= horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovTable {
    d: usize,
    m: usize,
    p: usize,
    horizon: usize,
    entries: Vec<Matrix>,
}

impl MarkovTable {
    fn slot(&self, v: &Word) -> Result<usize> {
        check_word(v, self.d)?;
        if v.len() < 2 {
            return Err(Error::WordTooShort {
                word: v.to_string(),
                len: v.len(),
            });
        }
        if v.len() > self.horizon {
            return Err(Error::HorizonExceeded {
                needed: v.len(),
                horizon: self.horizon,
            });
        }
        Ok(word_to_index(v)? - word_count(1, self.d)? - 1)
    }

    fn capacity(d: usize, horizon: usize) -> Result<usize> {
        if horizon < 2 {
            Ok(0)
        } else {
            Ok(word_count(horizon, d)? - word_count(1, d)?)
        }
    }

    pub fn from_system(sys: &AlpvSystem, horizon: usize) -> Result<Self> {
        let d = sys.sched_dim();
        let cap = Self::capacity(d, horizon)?;
        let mut entries = Vec::with_capacity(cap);
        // chains over words of length k: A_{q_{k-1}} ... A_{q_1} B_{q_0}
        let mut chains: Vec<Matrix> = sys.b().to_vec();
        for len in 2..=horizon {
            for x in &chains {
                for cq in sys.c() {
                    entries.push(cq * x);
                }
            }
            if len < horizon {
                let mut next = Vec::with_capacity(chains.len() * d);
                for x in &chains {
                    for aq in sys.a() {
                        next.push(aq * x);
                    }
                }
                chains = next;
            }
        }
        debug_assert_eq!(entries.len(), cap);
        Ok(MarkovTable {
            d,
            m: sys.input_dim(),
            p: sys.output_dim(),
            horizon,
            entries,
        })
    }

    /// Builds a table from explicit entries, which must cover every word of
    /// length `2..=horizon` exactly once.
    pub fn from_entries(
        d: usize,
        m: usize,
        p: usize,
        horizon: usize,
        entries: Vec<(Word, Matrix)>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidAlphabet);
        }
        let cap = Self::capacity(d, horizon)?;
        let mut slots: Vec<Option<Matrix>> = vec![None; cap];
        let mut table = MarkovTable {
            d,
            m,
            p,
            horizon,
            entries: Vec::new(),
        };
        for (v, s) in entries {
            if s.shape() != (p, m) {
                return Err(Error::dims(
                    format!("S({v})"),
                    format!("{p}x{m}"),
                    format!("{}x{}", s.nrows(), s.ncols()),
                ));
            }
            if s.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteEntry(format!("S({v})")));
            }
            let k = table.slot(&v)?;
            if slots[k].is_some() {
                return Err(Error::InvalidArgument(format!("duplicate entry for word {v}")));
            }
            slots[k] = Some(s);
        }
        let mut filled = Vec::with_capacity(cap);
        for (k, s) in slots.into_iter().enumerate() {
            match s {
                Some(s) => filled.push(s),
                None => {
                    let missing = crate::words::index_to_word(k + word_count(1, d)? + 1, d)?;
                    return Err(Error::InvalidArgument(format!(
                        "table incomplete: no entry for word {missing}"
                    )));
                }
            }
        }
        table.entries = filled;
        Ok(table)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
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

    pub fn get(&self, v: &Word) -> Result<&Matrix> {
        let k = self.slot(v)?;
        Ok(&self.entries[k])
    }

    /// Entries in enumeration order.
    pub fn iter(&self) -> impl Iterator<Item = (Word, &Matrix)> + '_ {
        (2..=self.horizon)
            .flat_map(move |len| words_of_length(len, self.d).unwrap_or_default())
            .zip(self.entries.iter())
    }
}

impl MarkovSource for MarkovTable {
    fn sched_dim(&self) -> usize {
        self.d
    }
    fn input_dim(&self) -> usize {
        self.m
    }
    fn output_dim(&self) -> usize {
        self.p
    }
    fn s_coeff(&self, v: &Word) -> Result<Matrix> {
        self.get(v).cloned()
    }
    fn max_m_word_len(&self) -> Option<usize> {
        Some(self.horizon.saturating_sub(2))
    }
}

/// A black-box input-output map `f` accepting arbitrary scheduling vectors
/// in `R^D`. The map is assumed to admit a convolution representation.
pub trait IoOracle: Sync {
    fn sched_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval(&self, w: &GeneralizedInputSeq) -> Result<Vector>;

    /// Whether probes may be issued concurrently.
    fn reentrant(&self) -> bool {
        false
    }
}

/// The zero-initial-state input-output map of a system.
#[derive(Debug, Clone, Copy)]
pub struct SystemOracle<'a> {
    sys: &'a AlpvSystem,
}

impl<'a> SystemOracle<'a> {
    pub fn new(sys: &'a AlpvSystem) -> Self {
        SystemOracle { sys }
    }
}

impl IoOracle for SystemOracle<'_> {
    fn sched_dim(&self) -> usize {
        self.sys.sched_dim()
    }
    fn input_dim(&self) -> usize {
        self.sys.input_dim()
    }
    fn output_dim(&self) -> usize {
        self.sys.output_dim()
    }
    fn eval(&self, w: &GeneralizedInputSeq) -> Result<Vector> {
        let x0 = Vector::zeros(self.sys.state_dim());
        Ok(simulate(self.sys, &x0, w)?.last_output().clone())
    }
    fn reentrant(&self) -> bool {
        true
    }
}

/// Wraps a closure as an oracle.
pub struct FnOracle<F> {
    d: usize,
    m: usize,
    p: usize,
    reentrant: bool,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&GeneralizedInputSeq) -> Result<Vector> + Sync,
{
    pub fn new(d: usize, m: usize, p: usize, f: F) -> Self {
        FnOracle {
            d,
            m,
            p,
            reentrant: false,
            f,
        }
    }

    pub fn reentrant(mut self, yes: bool) -> Self {
        self.reentrant = yes;
        self
    }
}

impl<F> IoOracle for FnOracle<F>
where
    F: Fn(&GeneralizedInputSeq) -> Result<Vector> + Sync,
{
    fn sched_dim(&self) -> usize {
        self.d
    }
    fn input_dim(&self) -> usize {
        self.m
    }
    fn output_dim(&self) -> usize {
        self.p
    }
    fn eval(&self, w: &GeneralizedInputSeq) -> Result<Vector> {
        (self.f)(w)
    }
    fn reentrant(&self) -> bool {
        self.reentrant
    }
}

fn unit(len: usize, k: usize) -> Vector {
    let mut e = Vector::zeros(len);
    e[k] = 1.0;
    e
}

/// Column `l` of `S(v)`, `v = q_0 ... q_t`, is the response to
/// `(e_{q_0}, e_l)(e_{q_1}, 0) ... (e_{q_t}, 0)`.
pub fn s_from_oracle<O: IoOracle + ?Sized>(oracle: &O, v: &Word) -> Result<Matrix> {
    let (d, m, p) = (oracle.sched_dim(), oracle.input_dim(), oracle.output_dim());
    check_word(v, d)?;
    let syms = v.symbols();
    if syms.len() < 2 {
        return Err(Error::WordTooShort {
            word: v.to_string(),
            len: syms.len(),
        });
    }
    let mut out = Matrix::zeros(p, m);
    for l in 0..m {
        let steps = syms
            .iter()
            .enumerate()
            .map(|(t, &q)| {
                let u = if t == 0 { unit(m, l) } else { Vector::zeros(m) };
                (unit(d, q - 1), u)
            })
            .collect();
        let w = GeneralizedInputSeq::new(d, m, steps)?;
        let y = oracle.eval(&w).map_err(|e| Error::Oracle {
            word: v.to_string(),
            source: Box::new(e),
        })?;
        if y.len() != p {
            return Err(Error::Oracle {
                word: v.to_string(),
                source: Box::new(Error::dims("oracle output", p, y.len())),
            });
        }
        out.set_column(l, &y);
    }
    Ok(out)
}

/// `M(v)` assembled from oracle probes; probes run in parallel when the
/// oracle is reentrant.
pub fn m_from_oracle<O: IoOracle + ?Sized>(oracle: &O, v: &Word) -> Result<Matrix> {
    let (d, m, p) = (oracle.sched_dim(), oracle.input_dim(), oracle.output_dim());
    check_word(v, d)?;
    let pairs: Vec<(usize, usize)> = (1..=d).flat_map(|i| (1..=d).map(move |j| (i, j))).collect();
    let probe = |&(i, j): &(usize, usize)| s_from_oracle(oracle, &v.wrap(j, i));
    let blocks: Vec<Matrix> = if oracle.reentrant() {
        pairs.par_iter().map(probe).collect::<Result<_>>()?
    } else {
        pairs.iter().map(probe).collect::<Result<_>>()?
    };
    let mut out = Matrix::zeros(p * d, m * d);
    for (&(i, j), s) in pairs.iter().zip(&blocks) {
        out.view_mut(((i - 1) * p, (j - 1) * m), (p, m)).copy_from(s);
    }
    Ok(out)
}

/// Adapts an oracle to [`MarkovSource`] so it can feed Hankel assembly.
pub struct OracleSource<'a, O: ?Sized>(pub &'a O);

impl<O: IoOracle + ?Sized> MarkovSource for OracleSource<'_, O> {
    fn sched_dim(&self) -> usize {
        self.0.sched_dim()
    }
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }
    fn output_dim(&self) -> usize {
        self.0.output_dim()
    }
    fn s_coeff(&self, v: &Word) -> Result<Matrix> {
        s_from_oracle(self.0, v)
    }
    fn m_block(&self, v: &Word) -> Result<Matrix> {
        m_from_oracle(self.0, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    fn w(s: &str, d: usize) -> Word {
        Word::parse(s, d).unwrap()
    }

    #[test]
    fn s_coeff_examples() {
        let s = fixtures::sigma_star();
        assert_eq!(s_coeff(&s, &w("12", 2)).unwrap()[(0, 0)], 2.0);
        assert_eq!(s_coeff(&s, &w("111", 2)).unwrap()[(0, 0)], 0.5);
        assert_eq!(s_coeff(&s, &w("121", 2)).unwrap()[(0, 0)], 0.0);
        assert!(matches!(s_coeff(&s, &w("1", 2)), Err(Error::WordTooShort { .. })));
        assert!(matches!(
            s_coeff(&s, &Word::new(vec![1, 3], 3).unwrap()),
            Err(Error::InvalidWord(_))
        ));
    }

    #[test]
    fn m_block_examples() {
        let s = fixtures::sigma_star();
        let m0 = m_block(&s, &Word::empty(2)).unwrap();
        assert_eq!(m0, Matrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 6.0]));
        let m1 = m_block(&s, &w("1", 2)).unwrap();
        assert_eq!(m1, Matrix::from_row_slice(2, 2, &[0.5, 1.5, 1.0, 3.0]));
        let m2 = m_block(&s, &w("2", 2)).unwrap();
        assert_eq!(m2, Matrix::zeros(2, 2));
    }

    #[test]
    fn two_routes_agree() {
        let s = fixtures::sigma2();
        for v in words_up_to(4, 2).unwrap() {
            let direct = m_block(&s, &v).unwrap();
            let assembled = assemble_m_block(&s, &v).unwrap();
            assert_relative_eq!(direct, assembled, epsilon = 1e-14);
        }
        let blocks = s.m_blocks_up_to(4).unwrap();
        for (v, b) in words_up_to(4, 2).unwrap().iter().zip(&blocks) {
            assert_relative_eq!(m_block(&s, v).unwrap(), *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn table_matches_system() {
        let s = fixtures::sigma2();
        let t = MarkovTable::from_system(&s, 6).unwrap();
        for (v, entry) in t.iter() {
            assert_eq!(*entry, s_coeff(&s, &v).unwrap());
        }
        for v in words_up_to(4, 2).unwrap() {
            assert_relative_eq!(t.m_block(&v).unwrap(), m_block(&s, &v).unwrap(), epsilon = 1e-14);
        }
        assert!(matches!(t.m_block(&w("11111", 2)), Err(Error::HorizonExceeded { .. })));
        assert_eq!(t.max_m_word_len(), Some(4));
    }

    #[test]
    fn table_from_entries_checks_completeness() {
        let s = fixtures::sigma_star();
        let t = MarkovTable::from_system(&s, 3).unwrap();
        let mut entries: Vec<(Word, Matrix)> = t.iter().map(|(v, e)| (v, e.clone())).collect();
        let rebuilt = MarkovTable::from_entries(2, 1, 1, 3, entries.clone()).unwrap();
        assert_eq!(rebuilt, t);
        entries.pop();
        assert!(MarkovTable::from_entries(2, 1, 1, 3, entries.clone()).is_err());
        let dup = entries[0].clone();
        entries.push(dup);
        assert!(MarkovTable::from_entries(2, 1, 1, 3, entries).is_err());
    }

    #[test]
    fn oracle_examples() {
        let s = fixtures::sigma_star();
        let oracle = SystemOracle::new(&s);
        let m0 = m_from_oracle(&oracle, &Word::empty(2)).unwrap();
        assert_eq!(m0, Matrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 6.0]));
        assert_eq!(s_from_oracle(&oracle, &w("111", 2)).unwrap()[(0, 0)], 0.5);
        let m11 = m_from_oracle(&oracle, &w("11", 2)).unwrap();
        assert_relative_eq!(m11, Matrix::from_row_slice(2, 2, &[0.25, 0.75, 0.5, 1.5]), epsilon = 1e-15);

        let zero = FnOracle::new(2, 1, 1, |_: &GeneralizedInputSeq| Ok(Vector::zeros(1)));
        assert_eq!(m_from_oracle(&zero, &w("12", 2)).unwrap(), Matrix::zeros(2, 2));
    }

    #[test]
    fn oracle_errors_carry_context() {
        let bad = FnOracle::new(2, 1, 1, |_: &GeneralizedInputSeq| {
            Err(Error::InvalidArgument("boom".into()))
        });
        match s_from_oracle(&bad, &w("12", 2)) {
            Err(Error::Oracle { word, .. }) => assert_eq!(word, "12"),
            other => panic!("unexpected {other:?}"),
        }
        let wrong_dim = FnOracle::new(2, 1, 1, |_: &GeneralizedInputSeq| Ok(Vector::zeros(3)));
        assert!(matches!(s_from_oracle(&wrong_dim, &w("12", 2)), Err(Error::Oracle { .. })));
    }

    #[test]
    fn serial_and_parallel_probing_agree() {
        let s = fixtures::sigma2();
        let par = SystemOracle::new(&s);
        let ser = FnOracle::new(2, 1, 1, |w: &GeneralizedInputSeq| par.eval(w));
        for v in words_up_to(3, 2).unwrap() {
            assert_eq!(m_from_oracle(&par, &v).unwrap(), m_from_oracle(&ser, &v).unwrap());
        }
    }
}
