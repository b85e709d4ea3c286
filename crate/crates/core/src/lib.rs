//! Realization theory for discrete-time affine linear parameter-varying
//! systems
//!
//! ```text
//! x(t+1) = sum_q (A_q x(t) + B_q u(t)) p_q(t)
//! y(t)   = sum_q C_q x(t) p_q(t)
//! ```
//!
//! Simulation, Markov parameters, Hankel matrices, Kalman-Ho realization,
//! minimality tests and reduction, isomorphism recovery, the link to
//! linear switched systems, and checks of affine input-output equations.

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod formats;
pub mod hankel;
pub mod ioeq;
pub mod markov;
pub mod model;
pub mod numlin;
pub mod realize;
pub mod switched;
pub mod words;

pub use error::{Error, Result};
pub use hankel::{build_hankel, hankel_rank, HankelBlockMatrix};
pub use ioeq::{check_equation, equation_residual, wf_dimension, AffineIoEquation, EquationCheck, PPoly, Var};
pub use markov::{m_block, m_from_oracle, s_coeff, s_from_oracle, IoOracle, MarkovSource, MarkovTable};
pub use model::{gcr_output, simulate, AlpvSystem, GeneralizedInputSeq, SimResult};
pub use numlin::{Matrix, ToleranceConfig, Vector};
pub use realize::{analyze, find_isomorphism, kalman_ho, minimize, AnalysisReport, Isomorphism};
pub use switched::{switched_analysis, switched_output, SwitchedInput, SwitchedOracle};
pub use words::{index_to_word, word_count, word_to_index, words_up_to, Word};
