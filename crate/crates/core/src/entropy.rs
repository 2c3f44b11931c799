//! Von Neumann entropy, quantum relative entropy and the total correlation
//! `I(rho) = S(rho || rho_1 (x) ... (x) rho_n)`. All logarithms are base 2.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, DensityMatrix, Tolerances};

/// An entropy in bits, or the `+inf` sentinel for relative entropies whose
/// first argument is not supported inside the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyValue {
    Bits(f64),
    Infinite,
}

impl EntropyValue {
    pub fn bits(self) -> Option<f64> {
        match self {
            EntropyValue::Bits(b) => Some(b),
            EntropyValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, EntropyValue::Infinite)
    }

    /// Finite value, panicking on the sentinel.
    pub fn expect_bits(self) -> f64 {
        self.bits().expect("relative entropy is infinite")
    }

    /// Total order with the sentinel above every finite value.
    pub fn total_cmp(&self, other: &EntropyValue) -> Ordering {
        match (self, other) {
            (EntropyValue::Bits(a), EntropyValue::Bits(b)) => a.total_cmp(b),
            (EntropyValue::Bits(_), EntropyValue::Infinite) => Ordering::Less,
            (EntropyValue::Infinite, EntropyValue::Bits(_)) => Ordering::Greater,
            (EntropyValue::Infinite, EntropyValue::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropyValue::Bits(b) => write!(f, "{b}"),
            EntropyValue::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for EntropyValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EntropyValue::Bits(b) => s.serialize_f64(*b),
            EntropyValue::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Shannon entropy in bits of a probability vector, ignoring entries at or
/// below `clip`.
pub fn shannon_entropy(probs: &[f64], clip: f64) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > clip)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> EntropyValue {
    von_neumann_entropy_with(rho, &Tolerances::default())
}

pub fn von_neumann_entropy_with(rho: &DensityMatrix, tol: &Tolerances) -> EntropyValue {
    EntropyValue::Bits(spectral_entropy(&rho.eigenvalues(), tol.clip))
}

/// `-sum lambda log2 lambda` over eigenvalues above `clip`, floored at 0.
pub(crate) fn spectral_entropy(eigenvalues: &[f64], clip: f64) -> f64 {
    shannon_entropy(eigenvalues, clip).max(0.0)
}

/// `S(rho || sigma) = tr rho log2 rho - tr rho log2 sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyValue> {
    relative_entropy_with(rho, sigma, &Tolerances::default())
}

pub fn relative_entropy_with(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: &Tolerances,
) -> Result<EntropyValue> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let er = eig_hermitian(rho.matrix())?;
    let es = eig_hermitian(sigma.matrix())?;
    let d = rho.dim();

    let mut rho_log_rho = 0.0;
    let mut rho_log_sigma = 0.0;
    for i in (0..d).filter(|&i| er.values[i] > tol.clip) {
        let lambda = er.values[i];
        rho_log_rho += lambda * lambda.log2();
        let mut null_overlap = 0.0;
        for j in 0..d {
            let overlap: f64 = (0..d)
                .map(|k| er.vectors[(k, i)].conj() * es.vectors[(k, j)])
                .sum::<num_complex::Complex64>()
                .norm_sqr();
            let mu = es.values[j];
            if mu > tol.clip {
                rho_log_sigma += lambda * overlap * mu.log2();
            } else {
                null_overlap += overlap;
            }
        }
        if null_overlap > tol.clip {
            return Ok(EntropyValue::Infinite);
        }
    }
    Ok(EntropyValue::Bits(rho_log_rho - rho_log_sigma))
}

/// Product of the single-subsystem marginals.
pub fn product_of_marginals(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let n = rho.n_subsystems();
    let mut out = partial_trace(rho, &[0])?;
    for i in 1..n {
        out = out.tensor(&partial_trace(rho, &[i])?);
    }
    Ok(out)
}

/// `sum_i S(rho_i) - S(rho)`, the distance from the closest product state.
pub fn total_correlation(rho: &DensityMatrix) -> Result<EntropyValue> {
    let n = rho.n_subsystems();
    if n < 2 {
        return Err(Error::TooFewSubsystems { n, min: 2 });
    }
    let mut sum = 0.0;
    for i in 0..n {
        sum += von_neumann_entropy(&partial_trace(rho, &[i])?).expect_bits();
    }
    Ok(EntropyValue::Bits(sum - von_neumann_entropy(rho).expect_bits()))
}
