//! Random system populations shared by the integration tests.
#![allow(dead_code)]

use alpv::hankel::build_hankel;
use alpv::numlin::svd;
use alpv::{analyze, AlpvSystem, GeneralizedInputSeq, Matrix, ToleranceConfig, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Entries uniform in (-1, 1); each `A_q` is scaled by `1 / (D sqrt(n))`
/// so long runs stay bounded.
pub fn random_system(rng: &mut ChaCha8Rng, d: usize, n: usize, m: usize, p: usize) -> AlpvSystem {
    let scale = 1.0 / (d as f64 * (n.max(1) as f64).sqrt());
    let a = (0..d).map(|_| uniform(rng, n, n) * scale).collect();
    let b = (0..d).map(|_| uniform(rng, n, m)).collect();
    let c = (0..d).map(|_| uniform(rng, p, n)).collect();
    AlpvSystem::new(d, n, m, p, a, b, c).unwrap()
}

pub fn random_dims(rng: &mut ChaCha8Rng) -> (usize, usize, usize, usize) {
    (
        rng.gen_range(1..=3),
        rng.gen_range(1..=4),
        rng.gen_range(1..=2),
        rng.gen_range(1..=2),
    )
}

/// `count` systems with `n <= 4, D <= 3, m, p <= 2`.
pub fn population(seed: u64, count: usize) -> Vec<AlpvSystem> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let (d, n, m, p) = random_dims(&mut rng);
            random_system(&mut rng, d, n, m, p)
        })
        .collect()
}

/// A minimal system whose Hankel matrix `H_{n-1,n}` keeps its `n`-th
/// singular value at least `1e-4` of the largest one. Draws are rejected
/// until both hold.
pub fn random_minimal(rng: &mut ChaCha8Rng, d: usize, n: usize, m: usize, p: usize) -> AlpvSystem {
    let tol = ToleranceConfig::default();
    loop {
        let s = random_system(rng, d, n, m, p);
        if !analyze(&s, &tol).unwrap().minimal {
            continue;
        }
        let h = build_hankel(&s, n - 1, n).unwrap();
        let sv = svd(h.data(), &tol).unwrap().singular;
        if sv.len() >= n && sv[n - 1] >= 1e-4 * sv[0] {
            return s;
        }
    }
}

pub fn minimal_population(seed: u64, count: usize) -> Vec<AlpvSystem> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let (d, n, m, p) = random_dims(&mut rng);
            random_minimal(&mut rng, d, n, m, p)
        })
        .collect()
}

pub fn random_signal(rng: &mut ChaCha8Rng, d: usize, m: usize, len: usize) -> GeneralizedInputSeq {
    let steps = (0..len)
        .map(|_| {
            (
                Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)),
                Vector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    GeneralizedInputSeq::new(d, m, steps).unwrap()
}

/// Orthogonal-ish change of basis with condition number below 10.
pub fn random_basis(rng: &mut ChaCha8Rng, n: usize) -> (Matrix, Matrix) {
    loop {
        let t = Matrix::identity(n, n) + uniform(rng, n, n) * 0.4;
        let sv = t.singular_values();
        if sv.min() > 0.1 * sv.max() {
            let t_inv = t.clone().try_inverse().unwrap();
            return (t, t_inv);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plant {
    Unreachable,
    Unobservable,
}

/// Extends the minimal `base` by `k` states that are unreachable or
/// unobservable, then hides the block structure behind a random basis.
pub fn plant(rng: &mut ChaCha8Rng, base: &AlpvSystem, k: usize, kind: Plant) -> AlpvSystem {
    let (d, r, m, p) = (base.sched_dim(), base.state_dim(), base.input_dim(), base.output_dim());
    let n = r + k;
    let scale = 1.0 / (d as f64 * (n as f64).sqrt());
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut c = Vec::new();
    for q in 0..d {
        let mut aq = Matrix::zeros(n, n);
        aq.view_mut((0, 0), (r, r)).copy_from(&base.a()[q]);
        aq.view_mut((r, r), (k, k)).copy_from(&(uniform(rng, k, k) * scale));
        let mut bq = Matrix::zeros(n, m);
        bq.view_mut((0, 0), (r, m)).copy_from(&base.b()[q]);
        let mut cq = Matrix::zeros(p, n);
        cq.view_mut((0, 0), (p, r)).copy_from(&base.c()[q]);
        match kind {
            Plant::Unreachable => {
                // new states feed the old ones but are never driven
                aq.view_mut((0, r), (r, k)).copy_from(&(uniform(rng, r, k) * scale));
                cq.view_mut((0, r), (p, k)).copy_from(&uniform(rng, p, k));
            }
            Plant::Unobservable => {
                // new states are driven but never reach the output
                aq.view_mut((r, 0), (k, r)).copy_from(&(uniform(rng, k, r) * scale));
                bq.view_mut((r, 0), (k, m)).copy_from(&uniform(rng, k, m));
            }
        }
        a.push(aq);
        b.push(bq);
        c.push(cq);
    }
    let padded = AlpvSystem::new(d, n, m, p, a, b, c).unwrap();
    let (t, t_inv) = random_basis(rng, n);
    padded.transform(&t, &t_inv).unwrap()
}
