//! Seeded random states, unitaries and Hermitian matrices for fixtures and
//! optimizer starts.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, CompositeDims, DensityMatrix, PureState, C64};

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix with standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    ginibre(rng, d, d).hermitian_part()
}

/// Entries `a + bi` with integer `a, b` in `[-4, 4]`.
pub fn integer_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-4..=4) as f64, rng.gen_range(-4..=4) as f64)
    })
}

/// Haar-random unitary (Gram-Schmidt on a Ginibre matrix).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for c in 0..d {
        let mut v = g.column(c);
        for q in &cols {
            let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dims: CompositeDims) -> PureState {
    let v: Vec<C64> = (0..dims.total()).map(|_| complex_normal(rng)).collect();
    PureState::normalized(dims, v).expect("nonzero gaussian vector")
}

/// Full-rank state `G G^dagger / tr` (Hilbert-Schmidt measure).
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, dims: CompositeDims) -> DensityMatrix {
    let d = dims.total();
    let g = ginibre(rng, d, d);
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    DensityMatrix::from_parts(dims, m.scale_real(1.0 / tr).hermitian_part())
}

/// Random state of rank at most `rank`.
pub fn density_matrix_of_rank<R: Rng + ?Sized>(
    rng: &mut R,
    dims: CompositeDims,
    rank: usize,
) -> DensityMatrix {
    let d = dims.total();
    let g = ginibre(rng, d, rank.max(1));
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    DensityMatrix::from_parts(dims, m.scale_real(1.0 / tr).hermitian_part())
}

/// Random probability vector of length `n`.
pub fn distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}
