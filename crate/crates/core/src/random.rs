//! Seeded random states, unitaries and channels for property checks.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::{channel_from_kraus, Channel};
use crate::linalg::{self, ComplexMatrix, DimSpec, C64};
use crate::states::{DensityOperator, PureState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let entries = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, entries).expect("shape")
}

/// Orthonormalizes the columns of a tall matrix (modified Gram-Schmidt).
fn orthonormal_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let rows = m.rows();
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let mut v: Vec<C64> = (0..rows).map(|i| m.get(i, j)).collect();
        for _ in 0..2 {
            for b in &cols {
                let p = linalg::inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
        }
        let n = linalg::norm(&v);
        cols.push(v.into_iter().map(|x| x / n).collect());
    }
    let mut out = ComplexMatrix::zeros(rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            out.set(i, j, x);
        }
    }
    out
}

pub fn random_state<R: Rng + ?Sized>(dims: &DimSpec, rng: &mut R) -> PureState {
    let v = (0..dims.total()).map(|_| gaussian(rng)).collect();
    PureState::new(v, dims.clone()).expect("nonzero gaussian vector")
}

/// Full-rank density operator: a normalized Wishart draw mixed with `I/d`
/// so the smallest eigenvalue stays at least `0.1/d`.
pub fn random_density<R: Rng + ?Sized>(dims: &DimSpec, rng: &mut R) -> DensityOperator {
    let d = dims.total();
    let g = gaussian_matrix(d, d, rng);
    let w = &g * &g.adjoint();
    let w = w.scale_real(1.0 / w.trace().re);
    let mixed = &w.scale_real(0.9) + &ComplexMatrix::identity(d).scale_real(0.1 / d as f64);
    DensityOperator::new(mixed, dims.clone()).expect("valid density")
}

/// Random Hermitian matrix with standard-normal entries.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(d, d, rng);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Haar-like random unitary (Gram-Schmidt of a Ginibre matrix).
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    orthonormal_columns(&gaussian_matrix(d, d, rng))
}

/// Random channel with `n_kraus` operators, cut from a random isometry
/// `C^{d_in} -> C^{n_kraus} ⊗ C^{d_out}`.
pub fn random_channel<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    n_kraus: usize,
    rng: &mut R,
) -> Channel {
    // need n_kraus * d_out >= d_in for an isometry
    let n_kraus = n_kraus.max(d_in.div_ceil(d_out)).max(1);
    let v = orthonormal_columns(&gaussian_matrix(n_kraus * d_out, d_in, rng));
    let kraus = (0..n_kraus)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(d_out, d_in);
            for i in 0..d_out {
                for j in 0..d_in {
                    m.set(i, j, v.get(k * d_out + i, j));
                }
            }
            m
        })
        .collect();
    channel_from_kraus(kraus, DimSpec::single(d_in), DimSpec::single(d_out))
        .expect("isometry blocks are trace preserving")
}

/// Column-stochastic matrix `T[out][in]`.
pub fn random_stochastic<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; d_in]; d_out];
    for j in 0..d_in {
        let col: Vec<f64> = (0..d_out).map(|_| rng.random::<f64>() + 0.05).collect();
        let s: f64 = col.iter().sum();
        for (row, p) in t.iter_mut().zip(&col) {
            row[j] = p / s;
        }
    }
    t
}

/// Classical channel with Kraus operators `√T(i|j) |i><j|`.
pub fn classical_channel(transition: &[Vec<f64>]) -> Channel {
    let d_out = transition.len();
    let d_in = transition.first().map_or(0, Vec::len);
    let mut kraus = Vec::with_capacity(d_in * d_out);
    for (i, row) in transition.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            let mut k = ComplexMatrix::zeros(d_out, d_in);
            k.set(i, j, linalg::re(p.sqrt()));
            kraus.push(k);
        }
    }
    channel_from_kraus(kraus, DimSpec::single(d_in), DimSpec::single(d_out))
        .expect("stochastic columns")
}

pub fn random_permutation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..d).collect();
    p.shuffle(rng);
    p
}

/// Unitary sending `|j>` to `|perm[j]>`.
pub fn permutation_unitary(perm: &[usize]) -> ComplexMatrix {
    let d = perm.len();
    let mut u = ComplexMatrix::zeros(d, d);
    for (j, &i) in perm.iter().enumerate() {
        u.set(i, j, linalg::re(1.0));
    }
    u
}
