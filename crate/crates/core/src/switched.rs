//! Linear switched systems as LPV systems under unit scheduling vectors.
//!
//! The switched interpretation of a system keeps the matrix family as is;
//! mode `q` at time `t` means `p(t) = e_q`.

use crate::error::{Error, Result};
use crate::markov::IoOracle;
use crate::model::{simulate, AlpvSystem, GeneralizedInputSeq};
use crate::numlin::{numerical_rank, Matrix, ToleranceConfig, Vector};
use crate::realize::AnalysisReport;
use crate::words::{words_up_to, Word};

/// A mode sequence with one input vector per step.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedInput {
    modes: Word,
    inputs: Vec<Vector>,
}

impl SwitchedInput {
    pub fn new(modes: Word, inputs: Vec<Vector>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidArgument("switched input must be nonempty".into()));
        }
        if modes.len() != inputs.len() {
            return Err(Error::dims("number of switched inputs", modes.len(), inputs.len()));
        }
        if let Some(u) = inputs.iter().find(|u| u.len() != inputs[0].len()) {
            return Err(Error::dims("switched input vector", inputs[0].len(), u.len()));
        }
        Ok(SwitchedInput { modes, inputs })
    }

    pub fn modes(&self) -> &Word {
        &self.modes
    }

    pub fn inputs(&self) -> &[Vector] {
        &self.inputs
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Step `t` becomes `(e_{modes[t]}, inputs[t])`.
pub fn embed_switched_input(sw: &SwitchedInput) -> Result<GeneralizedInputSeq> {
    let d = sw.modes.alphabet();
    let m = sw.inputs[0].len();
    let steps = sw
        .modes
        .symbols()
        .iter()
        .zip(&sw.inputs)
        .map(|(&q, u)| {
            if q == 0 || q > d {
                return Err(Error::InvalidWord(format!("mode {q} outside 1..={d}")));
            }
            let mut e = Vector::zeros(d);
            e[q - 1] = 1.0;
            Ok((e, u.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    GeneralizedInputSeq::new(d, m, steps)
}

/// Output at the final step of the switched run from the zero state.
pub fn switched_output(sys: &AlpvSystem, sw: &SwitchedInput) -> Result<Vector> {
    if sw.modes.alphabet() != sys.sched_dim() {
        return Err(Error::dims("number of modes", sys.sched_dim(), sw.modes.alphabet()));
    }
    let w = embed_switched_input(sw)?;
    let x0 = Vector::zeros(sys.state_dim());
    Ok(simulate(sys, &x0, &w)?.last_output().clone())
}

/// Input-output map of the switched interpretation, evaluated only on
/// unit scheduling vectors. Any other scheduling vector is rejected.
#[derive(Debug, Clone, Copy)]
pub struct SwitchedOracle<'a> {
    sys: &'a AlpvSystem,
}

impl<'a> SwitchedOracle<'a> {
    pub fn new(sys: &'a AlpvSystem) -> Self {
        SwitchedOracle { sys }
    }
}

impl IoOracle for SwitchedOracle<'_> {
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
        let d = self.sys.sched_dim();
        let mut modes = Vec::with_capacity(w.len());
        let mut inputs = Vec::with_capacity(w.len());
        for t in 0..w.len() {
            let p = w.sched(t);
            let q = p.iter().position(|&x| x == 1.0).filter(|&k| {
                p.iter().enumerate().all(|(j, &x)| if j == k { true } else { x == 0.0 })
            });
            match q {
                Some(k) => modes.push(k + 1),
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "scheduling vector at step {t} is not a unit vector"
                    )))
                }
            }
            inputs.push(w.input(t).clone());
        }
        switched_output(self.sys, &SwitchedInput::new(Word::new(modes, d)?, inputs)?)
    }

    fn reentrant(&self) -> bool {
        true
    }
}

/// Reachability and observability of the switched interpretation computed
/// from switched runs alone: the reachable space is spanned by the states
/// reached from zero under unit inputs and mode words of length `<= n`,
/// and two initial states are distinguishable iff some zero-input mode
/// word of length `<= n` separates their outputs.
pub fn switched_analysis(sys: &AlpvSystem, tol: &ToleranceConfig) -> Result<AnalysisReport> {
    let (d, n, m, p) = (
        sys.sched_dim(),
        sys.state_dim(),
        sys.input_dim(),
        sys.output_dim(),
    );
    if n == 0 {
        return Ok(AnalysisReport::from_ranks(0, 0, 0));
    }
    let runs: Vec<Word> = words_up_to(n, d)?.into_iter().filter(|w| !w.is_empty()).collect();

    let mut reached = Vec::new();
    for modes in &runs {
        for l in 0..m {
            let mut inputs = vec![Vector::zeros(m); modes.len()];
            inputs[0][l] = 1.0;
            let w = embed_switched_input(&SwitchedInput::new(modes.clone(), inputs)?)?;
            let r = simulate(sys, &Vector::zeros(n), &w)?;
            reached.push(r.states.last().cloned().expect("nonempty run"));
        }
    }
    let reach_rank = numerical_rank(&Matrix::from_columns(&reached), tol)?;

    // response of each unit initial state, one row block per mode word
    let mut obs = Matrix::zeros(runs.len() * p, n);
    for (k, modes) in runs.iter().enumerate() {
        let inputs = vec![Vector::zeros(m); modes.len()];
        let w = embed_switched_input(&SwitchedInput::new(modes.clone(), inputs)?)?;
        for col in 0..n {
            let mut x0 = Vector::zeros(n);
            x0[col] = 1.0;
            let y = simulate(sys, &x0, &w)?;
            obs.view_mut((k * p, col), (p, 1)).copy_from(y.last_output());
        }
    }
    let obs_rank = numerical_rank(&obs, tol)?;
    Ok(AnalysisReport::from_ranks(n, reach_rank, obs_rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::markov::{m_block, m_from_oracle};
    use crate::realize::analyze;

    fn sw(modes: &str, inputs: &[f64]) -> SwitchedInput {
        SwitchedInput::new(
            Word::parse(modes, 2).unwrap(),
            inputs.iter().map(|&u| Vector::from_element(1, u)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn embedding() {
        let w = embed_switched_input(&sw("12", &[4.0, 5.0])).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.sched(0).as_slice(), &[1.0, 0.0]);
        assert_eq!(w.sched(1).as_slice(), &[0.0, 1.0]);
        assert_eq!(w.input(1)[0], 5.0);
        let w = embed_switched_input(&sw("1", &[0.0])).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.input(0)[0], 0.0);
    }

    #[test]
    fn outputs() {
        let s = fixtures::sigma_star();
        assert_eq!(switched_output(&s, &sw("11", &[1.0, 0.0])).unwrap()[0], 1.0);
        assert_eq!(switched_output(&s, &sw("12", &[1.0, 0.0])).unwrap()[0], 2.0);
        assert_eq!(switched_output(&s, &sw("2121", &[0.0; 4])).unwrap()[0], 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SwitchedInput::new(Word::parse("12", 2).unwrap(), vec![Vector::zeros(1)]).is_err());
        assert!(SwitchedInput::new(Word::empty(2), vec![]).is_err());
        let s3 = SwitchedInput::new(
            Word::parse("3", 3).unwrap(),
            vec![Vector::zeros(1)],
        )
        .unwrap();
        assert!(switched_output(&fixtures::sigma_star(), &s3).is_err());
    }

    #[test]
    fn switched_probes_reproduce_markov() {
        let s = fixtures::sigma2();
        let oracle = SwitchedOracle::new(&s);
        for v in words_up_to(3, 2).unwrap() {
            assert_eq!(m_from_oracle(&oracle, &v).unwrap(), m_block(&s, &v).unwrap());
        }
    }

    #[test]
    fn switched_oracle_rejects_non_unit_scheduling() {
        let s = fixtures::sigma2();
        let w = GeneralizedInputSeq::from_rows(2, 1, &[(&[0.5, 0.5], &[1.0])]).unwrap();
        assert!(SwitchedOracle::new(&s).eval(&w).is_err());
    }

    #[test]
    fn analysis_transfers() {
        let tol = ToleranceConfig::default();
        for s in [fixtures::sigma_star(), fixtures::sigma2()] {
            assert_eq!(switched_analysis(&s, &tol).unwrap(), analyze(&s, &tol).unwrap());
        }
    }
}
