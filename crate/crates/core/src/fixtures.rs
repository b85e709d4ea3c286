//! Small reference systems and equations used in examples and tests.

use std::collections::BTreeMap;

use crate::ioeq::{AffineIoEquation, PPoly, Var};
use crate::model::AlpvSystem;
use crate::numlin::Matrix;

fn scalar(x: f64) -> Matrix {
    Matrix::from_element(1, 1, x)
}

/// `D = 2`, `n = m = p = 1`: `A = (0.5, 0)`, `B = (1, 3)`, `C = (1, 2)`.
/// Minimal, Hankel rank 1.
pub fn sigma_star() -> AlpvSystem {
    AlpvSystem::new(
        2,
        1,
        1,
        1,
        vec![scalar(0.5), scalar(0.0)],
        vec![scalar(1.0), scalar(3.0)],
        vec![scalar(1.0), scalar(2.0)],
    )
    .expect("fixture is valid")
}

/// `D = 2`, `n = 2`, `m = p = 1` shift pair. Minimal, Hankel rank 2, while
/// `M(eps)` alone has rank 1.
pub fn sigma2() -> AlpvSystem {
    AlpvSystem::new(
        2,
        2,
        1,
        1,
        vec![
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            Matrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
        ],
        vec![Matrix::from_row_slice(2, 1, &[1.0, 0.0]), Matrix::zeros(2, 1)],
        vec![
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            Matrix::from_row_slice(1, 2, &[0.0, 1.0]),
        ],
    )
    .expect("fixture is valid")
}

/// `D = 1`, `n = m = p = 1`: `x(t+1) = 0.5 p x + p u`, `y = p x`.
pub fn sigma1() -> AlpvSystem {
    AlpvSystem::new(1, 1, 1, 1, vec![scalar(0.5)], vec![scalar(1.0)], vec![scalar(1.0)])
        .expect("fixture is valid")
}

/// Order-1 equation satisfied by [`sigma1`], parameterized by the `Y_1`
/// coefficient (`-0.5` gives the exact equation):
/// `Y_0 + k P_{0,1} Y_1 - P_{0,1} P_{1,1} U_{1,1} = 0`.
pub fn e1_with(y1_coeff: f64) -> AffineIoEquation {
    let p01 = Var { lag: 0, coord: 1 };
    let p11 = Var { lag: 1, coord: 1 };
    let q0 = PPoly::constant(1.0);
    let q1 = PPoly::monomial(y1_coeff, BTreeMap::from([(p01, 1)]));
    let l11 = PPoly::monomial(-1.0, BTreeMap::from([(p01, 1), (p11, 1)]));
    AffineIoEquation::new(1, 1, 1, vec![q0, q1], vec![vec![l11]]).expect("fixture is valid")
}

pub fn e1() -> AffineIoEquation {
    e1_with(-0.5)
}
