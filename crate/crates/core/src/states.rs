//! Named states and simple diagnostics on them.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genuine_correlations::Bipartition;
use crate::linalg::{eig_hermitian, ComplexMatrix, CompositeDims, DensityMatrix, PureState, C64, ZERO};
use crate::random;

const FRAC: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn real_state(n: usize, terms: &[(usize, f64)]) -> PureState {
    let dims = CompositeDims::qubits(n);
    let mut v = vec![ZERO; dims.total()];
    for &(i, a) in terms {
        v[i] = C64::new(a, 0.0);
    }
    PureState::new(dims, v).expect("normalized by construction")
}

/// `(|0...0> + |1...1>)/sqrt2` on `n` qubits.
pub fn ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::TooFewSubsystems { n, min: 2 });
    }
    Ok(real_state(n, &[(0, FRAC), ((1 << n) - 1, FRAC)]))
}

/// Uniform superposition of the `n` single-excitation basis states.
pub fn w_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::TooFewSubsystems { n, min: 2 });
    }
    let a = 1.0 / (n as f64).sqrt();
    let terms: Vec<(usize, f64)> = (0..n).map(|k| (1 << k, a)).collect();
    Ok(real_state(n, &terms))
}

/// `(|0001> + |0010> - |0100> - |1000>)/2`.
pub fn w4() -> PureState {
    real_state(4, &[(1, 0.5), (2, 0.5), (4, -0.5), (8, -0.5)])
}

/// `(|0011> - |1100>)/sqrt2`, the GHZ-class target in `(a, E_a, b, E_b)` order.
pub fn ghz4_target() -> PureState {
    real_state(4, &[(3, FRAC), (12, -FRAC)])
}

/// `(|01> - |10>)/sqrt2`.
pub fn singlet() -> PureState {
    real_state(2, &[(1, FRAC), (2, -FRAC)])
}

/// `sum_i p_i |i><i|` in the computational basis.
pub fn classical_state(dims: CompositeDims, probs: &[f64]) -> Result<DensityMatrix> {
    if probs.len() != dims.total() {
        return Err(Error::DimensionMismatch {
            expected: dims.total(),
            found: probs.len(),
        });
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("entry {p} is negative")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    DensityMatrix::new(dims, ComplexMatrix::diagonal(probs))
}

/// Random mixture of `terms` product pure states of `n` qubits. Generic
/// draws are separable and not classical.
pub fn separable_fixture<R: Rng + ?Sized>(rng: &mut R, n: usize, terms: usize) -> DensityMatrix {
    let dims = CompositeDims::qubits(n);
    let weights = random::distribution(rng, terms.max(1));
    let d = dims.total();
    let mut m = ComplexMatrix::zeros(d, d);
    for w in weights {
        let mut psi = random::pure_state(rng, CompositeDims::qubits(1));
        for _ in 1..n {
            psi = psi.tensor(&random::pure_state(rng, CompositeDims::qubits(1)));
        }
        m = &m + &psi.density().matrix().scale_real(w);
    }
    DensityMatrix::new(dims, m.hermitian_part()).expect("convex mixture of states")
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct FidelityValue(f64);

impl FidelityValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `sqrt(<psi|rho|psi>)`.
pub fn fidelity(psi: &PureState, rho: &DensityMatrix) -> Result<FidelityValue> {
    if psi.dims() != rho.dims() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: psi.dims().total(),
        });
    }
    let overlap = rho.matrix().expectation(psi.amplitudes()).re;
    if overlap < -1e-12 {
        return Err(Error::NotPositive(overlap));
    }
    Ok(FidelityValue(overlap.max(0.0).sqrt().min(1.0)))
}

/// Smallest eigenvalue of the partial transpose over the second cell of `cut`.
pub fn ppt_min_eigenvalue(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    if cut.n() != rho.n_subsystems() {
        return Err(Error::DimensionMismatch {
            expected: rho.n_subsystems(),
            found: cut.n(),
        });
    }
    let pt = rho.partial_transpose(&cut.c2())?;
    Ok(eig_hermitian(&pt)?.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::total_correlation;
    use crate::genuine_correlations::genuine_total_ik;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ghz_vectors() {
        let g2 = ghz(2).unwrap();
        assert_eq!(g2.amplitudes()[0].re, FRAC);
        assert_eq!(g2.amplitudes()[3].re, FRAC);
        assert!(ghz(1).is_err());

        let g4 = ghz(4).unwrap().density();
        for q in 0..4 {
            let m = g4.partial_trace(&[q]).unwrap();
            assert!(m.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[0.5, 0.5])) < 1e-15);
        }
        let i3 = genuine_total_ik(&g4, 3).unwrap();
        assert!((i3.value_bits - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w4_marginals_and_norm() {
        let w = w4();
        assert!((w.norm() - 1.0).abs() < 1e-15);
        let rho = w.density();
        for q in 0..4 {
            let m = rho.partial_trace(&[q]).unwrap();
            assert!(m.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[0.75, 0.25])) < 1e-15);
        }
        let std = w_state(4).unwrap();
        assert!((std.norm() - 1.0).abs() < 1e-15);
        assert!(w_state(1).is_err());
    }

    #[test]
    fn classical_state_examples() {
        let dims = CompositeDims::qubits(2);
        let fact = classical_state(dims.clone(), &[0.12, 0.28, 0.18, 0.42]).unwrap();
        assert!(total_correlation(&fact).unwrap().expect_bits().abs() < 1e-12);
        let corr = classical_state(dims.clone(), &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((total_correlation(&corr).unwrap().expect_bits() - 1.0).abs() < 1e-12);
        assert!(classical_state(dims.clone(), &[0.5, 0.5, 0.1, -0.1]).is_err());
        assert!(classical_state(dims.clone(), &[0.5, 0.5, 0.1, 0.1]).is_err());
        assert!(classical_state(dims, &[1.0]).is_err());
    }

    #[test]
    fn classical_state_commutes_with_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dims = CompositeDims::qubits(3);
        let rho = classical_state(dims, &random::distribution(&mut rng, 8)).unwrap();
        for k in 0..8 {
            let mut p = vec![0.0; 8];
            p[k] = 1.0;
            let proj = ComplexMatrix::diagonal(&p);
            let comm = &(&proj * rho.matrix()) - &(rho.matrix() * &proj);
            assert_eq!(comm.frobenius_norm(), 0.0);
        }
    }

    #[test]
    fn fidelity_examples() {
        let psi = w4();
        assert!((fidelity(&psi, &psi.density()).unwrap().value() - 1.0).abs() < 1e-15);
        let other = ghz4_target();
        assert_eq!(fidelity(&other, &psi.density()).unwrap().value(), 0.0);
        assert!(fidelity(&singlet(), &psi.density()).is_err());
    }

    #[test]
    fn fidelity_rank_one_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dims = CompositeDims::qubits(3);
        for _ in 0..20 {
            let psi = random::pure_state(&mut rng, dims.clone());
            let phi = random::pure_state(&mut rng, dims.clone());
            let f = fidelity(&psi, &phi.density()).unwrap().value();
            // complement weight: norm^2 of phi minus its projection on psi
            let ov = psi.inner(&phi);
            let rest: f64 = phi
                .amplitudes()
                .iter()
                .zip(psi.amplitudes())
                .map(|(a, b)| (a - b * ov).norm_sqr())
                .sum();
            assert!((f * f + rest - 1.0).abs() < 1e-12);

            let u = random::unitary(&mut rng, 8);
            let upsi = PureState::new(dims.clone(), u.matvec(psi.amplitudes())).unwrap();
            let g = fidelity(&upsi, &phi.density().conjugate(&u)).unwrap().value();
            assert!((f - g).abs() < 1e-12);
        }
    }

    #[test]
    fn werner_ppt_spectrum() {
        let cut = Bipartition::new(2, &[0]).unwrap();
        for c in [0.0, 0.2, 1.0 / 3.0, 0.5, 1.0] {
            let rho = &singlet().density().matrix().scale_real(c)
                + &ComplexMatrix::identity(4).scale_real((1.0 - c) / 4.0);
            let rho = DensityMatrix::new(CompositeDims::qubits(2), rho).unwrap();
            let m = ppt_min_eigenvalue(&rho, &cut).unwrap();
            assert!((m - (1.0 - 3.0 * c) / 4.0).abs() < 1e-12, "c={c}: {m}");
        }
        let prod = ghz(2).unwrap().density().partial_trace(&[0]).unwrap();
        let prod = prod.tensor(&prod);
        assert!(ppt_min_eigenvalue(&prod, &cut).unwrap() >= -1e-15);
        assert!(ppt_min_eigenvalue(&prod, &Bipartition::new(3, &[0]).unwrap()).is_err());
    }

    #[test]
    fn separable_fixture_is_a_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = separable_fixture(&mut rng, 2, 3);
        assert_eq!(rho.dim(), 4);
        let cut = Bipartition::new(2, &[0]).unwrap();
        assert!(ppt_min_eigenvalue(&rho, &cut).unwrap() > -1e-12);
    }
}
