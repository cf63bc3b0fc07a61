//! Shared random-instance generators for the integration suites.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use decohist::histories::{product_family, HistoryFamily, TemporalSupport};
use decohist::kinematics::{DecompositionOfUnity, DensityOperator, Dynamics, Projector};
use decohist::matrix::{self, CMatrix};
use decohist::Tolerance;

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
}

pub fn random_matrix(rng: &mut impl Rng, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| random_complex(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let a = random_matrix(rng, dim);
    (&a + a.adjoint()).map(|z| z * 0.5)
}

/// Haar-ish unitary: the eigenvector matrix of a random Hermitian.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let h = random_hermitian(rng, dim);
    let pairs = matrix::hermitian_eigenpairs(&h);
    CMatrix::from_fn(dim, dim, |i, j| pairs[j].1[i])
}

/// Unit Bloch axis from a Gaussian-free construction (rejection sampling).
pub fn random_axis(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Splits the columns of a random unitary into `blocks` nonempty groups and
/// sums the rank-one projectors of each group.
pub fn random_decomposition(
    rng: &mut impl Rng,
    dim: usize,
    blocks: usize,
    time: f64,
    tol: &Tolerance,
) -> DecompositionOfUnity {
    assert!(blocks >= 1 && blocks <= dim);
    let u = random_unitary(rng, dim);
    // assign every column a block, forcing each block nonempty
    let mut assignment: Vec<usize> = (0..dim)
        .map(|i| {
            if i < blocks {
                i
            } else {
                rng.gen_range(0..blocks)
            }
        })
        .collect();
    for i in (1..dim).rev() {
        let j = rng.gen_range(0..=i);
        assignment.swap(i, j);
    }
    let mut projectors = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let mut m = matrix::zeros(dim, dim);
        for (col, &a) in assignment.iter().enumerate() {
            if a == b {
                let v: Vec<Complex64> = (0..dim).map(|r| u[(r, col)]).collect();
                m += matrix::outer(&v);
            }
        }
        projectors.push(Projector::new(m, b.to_string(), tol).expect("projector by construction"));
    }
    DecompositionOfUnity::new(projectors, time, tol).expect("decomposition by construction")
}

/// Random full-rank density operator: U diag(w) U† with simplex weights.
pub fn random_density(rng: &mut impl Rng, dim: usize, tol: &Tolerance) -> DensityOperator {
    let u = random_unitary(rng, dim);
    let raw: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut rho = matrix::zeros(dim, dim);
    for (col, w) in raw.iter().enumerate() {
        let v: Vec<Complex64> = (0..dim).map(|r| u[(r, col)]).collect();
        rho += matrix::outer(&v).map(|z| z * (w / total));
    }
    DensityOperator::new(rho, "random", tol).expect("density by construction")
}

/// Random product family: dim ≤ 4, up to 4 times, random Hermitian H,
/// random decompositions and state. History count kept small enough for a
/// debug-build corpus sweep.
pub fn random_family(rng: &mut impl Rng, tol: &Tolerance) -> HistoryFamily {
    let dim = rng.gen_range(2..=4);
    let n_times = rng.gen_range(2..=4);
    let times: Vec<f64> = (1..=n_times).map(|k| k as f64).collect();
    let mut blocks = Vec::with_capacity(n_times);
    let mut histories = 1usize;
    for _ in 0..n_times {
        let mut b = rng.gen_range(1..=dim);
        while histories * b > 32 {
            b = 1 + rng.gen_range(0..b.max(2) - 1);
        }
        histories *= b;
        blocks.push(b);
    }
    let decomps: Vec<DecompositionOfUnity> = blocks
        .iter()
        .zip(&times)
        .map(|(&b, &t)| random_decomposition(rng, dim, b, t, tol))
        .collect();
    let h = random_hermitian(rng, dim);
    let dynamics = Dynamics::new(h, 0.0, tol).expect("hermitian by construction");
    let rho = random_density(rng, dim, tol);
    let support = TemporalSupport::new(times).expect("increasing by construction");
    product_family(support, decomps, dynamics, rho, tol).expect("family by construction")
}
