//! Dephased (classically correlated) states in local product bases and the
//! numerical search for the closest classical state of a given state.
//!
//! For a product basis `{|psi_k>}` built from one orthonormal basis per cell,
//! the dephased state `chi = sum_k <psi_k|rho|psi_k> |psi_k><psi_k|` is the
//! closest state diagonal in that basis, and
//! `S(rho || chi) = S(chi) - S(rho) = H(p) - S(rho)`. The search minimizes the
//! last form over the local bases.

mod nelder_mead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use nelder_mead::{Minimum, NelderMead};

use crate::entropy::{relative_entropy, shannon_entropy, von_neumann_entropy, EntropyValue};
use crate::error::{Error, Result};
use crate::linalg::{
    unitarity_error, unitary_from_generator, validated_subset, ComplexMatrix, CompositeDims,
    DensityMatrix, Tolerances, C64,
};

/// One unitary per cell of a partition of the subsystems. Column `k` of a
/// cell's unitary is the `k`-th basis vector of that cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasisSet {
    cells: Vec<Vec<usize>>,
    unitaries: Vec<ComplexMatrix>,
}

impl LocalBasisSet {
    pub fn new(
        dims: &CompositeDims,
        cells: Vec<Vec<usize>>,
        unitaries: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let cells = validated_partition(dims, cells)?;
        if unitaries.len() != cells.len() {
            return Err(Error::DimensionMismatch {
                expected: cells.len(),
                found: unitaries.len(),
            });
        }
        for (cell, u) in cells.iter().zip(&unitaries) {
            let d = cell_dim(dims, cell);
            if u.rows() != d || u.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: u.rows(),
                });
            }
            let err = unitarity_error(u);
            if err > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "cell basis is not unitary (error {err:e})"
                )));
            }
        }
        Ok(LocalBasisSet { cells, unitaries })
    }

    /// Computational basis on every cell.
    pub fn computational(dims: &CompositeDims, cells: Vec<Vec<usize>>) -> Result<Self> {
        let cells = validated_partition(dims, cells)?;
        let unitaries = cells
            .iter()
            .map(|c| ComplexMatrix::identity(cell_dim(dims, c)))
            .collect();
        Ok(LocalBasisSet { cells, unitaries })
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    fn subsystem_order(&self) -> Vec<usize> {
        self.cells.iter().flatten().copied().collect()
    }

    /// Product basis unitary in cell order.
    fn product_unitary(&self) -> ComplexMatrix {
        product_of(&self.unitaries)
    }
}

fn product_of(unitaries: &[ComplexMatrix]) -> ComplexMatrix {
    let mut it = unitaries.iter();
    let first = it.next().expect("at least one cell").clone();
    it.fold(first, |acc, u| acc.kron(u))
}

fn cell_dim(dims: &CompositeDims, cell: &[usize]) -> usize {
    cell.iter().map(|&i| dims.as_slice()[i]).product()
}

/// Sorts each cell and checks the cells partition `0..n`.
fn validated_partition(dims: &CompositeDims, cells: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    let n = dims.len();
    let mut seen = vec![false; n];
    let mut out = Vec::with_capacity(cells.len());
    for cell in cells {
        let cell = validated_subset(&cell, n)?;
        for &i in &cell {
            if seen[i] {
                return Err(Error::InvalidSubset(format!(
                    "subsystem {i} appears in more than one cell"
                )));
            }
            seen[i] = true;
        }
        out.push(cell);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidSubset(format!(
            "subsystem {missing} is in no cell"
        )));
    }
    Ok(out)
}

pub fn per_subsystem_cells(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![i]).collect()
}

fn check_basis_dims(rho: &DensityMatrix, basis: &LocalBasisSet) -> Result<()> {
    let dims = rho.dims();
    let covered: usize = basis.cells.iter().map(|c| c.len()).sum();
    if covered != dims.len() || basis.cells.iter().flatten().any(|&i| i >= dims.len()) {
        return Err(Error::InvalidSubset(
            "basis cells do not partition the state's subsystems".into(),
        ));
    }
    for (cell, u) in basis.cells.iter().zip(&basis.unitaries) {
        let d = cell_dim(dims, cell);
        if u.rows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: u.rows(),
            });
        }
    }
    Ok(())
}

fn is_identity_order(order: &[usize]) -> bool {
    order.iter().enumerate().all(|(i, &o)| i == o)
}

fn inverse_permutation(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (j, &o) in order.iter().enumerate() {
        inv[o] = j;
    }
    inv
}

/// `diag(U^dagger M U)` for Hermitian `M`.
fn diagonal_in_basis(m: &ComplexMatrix, u: &ComplexMatrix) -> Vec<f64> {
    let mu = m * u;
    let d = u.rows();
    (0..u.cols())
        .map(|k| (0..d).map(|i| (u[(i, k)].conj() * mu[(i, k)]).re).sum())
        .collect()
}

/// Pinching of `rho` in the product basis of `basis`.
pub fn dephase(rho: &DensityMatrix, basis: &LocalBasisSet) -> Result<DensityMatrix> {
    check_basis_dims(rho, basis)?;
    let order = basis.subsystem_order();
    let reordered = if is_identity_order(&order) {
        rho.clone()
    } else {
        rho.permute(&order)?
    };
    let u = basis.product_unitary();
    let probs = diagonal_in_basis(reordered.matrix(), &u);
    let d = u.rows();
    let chi = ComplexMatrix::from_fn(d, d, |r, c| {
        (0..d)
            .map(|k| u[(r, k)] * u[(c, k)].conj() * probs[k])
            .sum::<C64>()
    });
    let chi = DensityMatrix::from_parts(reordered.dims().clone(), chi.hermitian_part());
    if is_identity_order(&order) {
        Ok(chi)
    } else {
        chi.permute(&inverse_permutation(&order))
    }
}

/// `S(rho || dephase(rho, basis))`.
pub fn quantumness_in_basis(rho: &DensityMatrix, basis: &LocalBasisSet) -> Result<EntropyValue> {
    let chi = dephase(rho, basis)?;
    relative_entropy(rho, &chi)
}

/// Search coordinates for one cell's basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellParametrization {
    /// Qubit basis `{|n>, |-n>}` with Bloch direction `(theta, phi)`.
    QubitAngles,
    /// `exp(iH)` with `H` built from `d^2` reals: `d` diagonal entries, then
    /// the real and imaginary parts of each upper-triangular entry in
    /// row-major order.
    Generator { dim: usize },
}

impl CellParametrization {
    pub fn n_params(self) -> usize {
        match self {
            CellParametrization::QubitAngles => 2,
            CellParametrization::Generator { dim } => dim * dim,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            CellParametrization::QubitAngles => 2,
            CellParametrization::Generator { dim } => dim,
        }
    }

    pub fn unitary(self, params: &[f64]) -> ComplexMatrix {
        match self {
            CellParametrization::QubitAngles => qubit_basis(params[0], params[1]),
            CellParametrization::Generator { dim } => {
                unitary_from_generator(&hermitian_generator(dim, params))
                    .expect("generator is square")
            }
        }
    }

    fn random_start<R: Rng>(self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            CellParametrization::QubitAngles => {
                out.push(rng.gen_range(0.0..std::f64::consts::PI));
                out.push(rng.gen_range(0.0..std::f64::consts::TAU));
            }
            CellParametrization::Generator { dim } => {
                let pi = std::f64::consts::PI;
                out.extend((0..dim * dim).map(|_| rng.gen_range(-pi..pi)));
            }
        }
    }
}

/// Qubit basis whose first vector has Bloch angles `(theta, phi)`.
pub fn qubit_basis(theta: f64, phi: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = C64::from_polar(1.0, phi);
    let mut u = ComplexMatrix::zeros(2, 2);
    u[(0, 0)] = C64::new(c, 0.0);
    u[(1, 0)] = e * s;
    u[(0, 1)] = -e.conj() * s;
    u[(1, 1)] = C64::new(c, 0.0);
    u
}

pub fn hermitian_generator(dim: usize, params: &[f64]) -> ComplexMatrix {
    assert_eq!(params.len(), dim * dim, "generator needs d^2 parameters");
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = C64::new(params[i], 0.0);
    }
    let mut k = dim;
    for r in 0..dim {
        for c in r + 1..dim {
            let z = C64::new(params[k], params[k + 1]);
            h[(r, c)] = z;
            h[(c, r)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Real parameter vector for a [`LocalBasisSet`], one block per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisParameters {
    layout: Vec<CellParametrization>,
    values: Vec<f64>,
}

impl BasisParameters {
    pub fn new(layout: Vec<CellParametrization>, values: Vec<f64>) -> Result<Self> {
        let want: usize = layout.iter().map(|p| p.n_params()).sum();
        if values.len() != want {
            return Err(Error::DimensionMismatch {
                expected: want,
                found: values.len(),
            });
        }
        Ok(BasisParameters { layout, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn layout(&self) -> &[CellParametrization] {
        &self.layout
    }

    pub fn unitaries(&self) -> Vec<ComplexMatrix> {
        unitaries_for(&self.layout, &self.values)
    }
}

fn unitaries_for(layout: &[CellParametrization], values: &[f64]) -> Vec<ComplexMatrix> {
    let mut offset = 0;
    layout
        .iter()
        .map(|p| {
            let k = p.n_params();
            let u = p.unitary(&values[offset..offset + k]);
            offset += k;
            u
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Random starts for searches whose cells are all qubits.
    pub starts: usize,
    /// Evaluation budget per start for all-qubit searches.
    pub max_evals: usize,
    pub ftol: f64,
    pub rng_seed: u64,
    /// Use the two-angle chart for qubit cells instead of a 4-real generator.
    pub qubit_angles: bool,
    /// Starts when some cell has dimension above 2.
    pub large_cell_starts: usize,
    /// Per-start budget when some cell has dimension above 2.
    pub large_cell_max_evals: usize,
    pub max_cell_dim: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            starts: 32,
            max_evals: 2000,
            ftol: 1e-8,
            rng_seed: 0,
            qubit_angles: true,
            large_cell_starts: 64,
            large_cell_max_evals: 20_000,
            max_cell_dim: 8,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.large_cell_starts == 0 {
            return Err(Error::InvalidParameter("starts must be at least 1".into()));
        }
        if !(self.ftol >= 0.0) {
            return Err(Error::InvalidParameter("ftol must be nonnegative".into()));
        }
        Ok(())
    }

    /// Cheap budget for tests and quick looks.
    pub fn quick() -> Self {
        SearchConfig {
            starts: 8,
            max_evals: 1500,
            large_cell_starts: 8,
            large_cell_max_evals: 6000,
            ..SearchConfig::default()
        }
    }
}

/// Outcome of [`closest_classical_state`].
#[derive(Debug, Clone)]
pub struct ClassicalSearch {
    pub chi: DensityMatrix,
    pub basis: LocalBasisSet,
    pub params: BasisParameters,
    /// `Q(rho)` for the given partition.
    pub q: EntropyValue,
    pub evals: usize,
    pub starts: usize,
    pub best_start: usize,
}

/// State prepared for repeated dephasing-gap evaluations.
struct DephasingObjective {
    layout: Vec<CellParametrization>,
    reordered: ComplexMatrix,
    entropy: f64,
    clip: f64,
}

impl DephasingObjective {
    fn value(&self, params: &[f64]) -> f64 {
        let u = product_of(&unitaries_for(&self.layout, params));
        let probs = diagonal_in_basis(&self.reordered, &u);
        shannon_entropy(&probs, self.clip) - self.entropy
    }
}

/// Minimizes `S(rho || chi)` over product bases of `cells` by multi-start
/// Nelder-Mead. Start 0 is the computational basis, start `k >= 1` is drawn
/// from a generator seeded with `rng_seed + k`.
pub fn closest_classical_state(
    rho: &DensityMatrix,
    cells: Vec<Vec<usize>>,
    cfg: &SearchConfig,
) -> Result<ClassicalSearch> {
    cfg.validate()?;
    let dims = rho.dims();
    let cells = validated_partition(dims, cells)?;
    let cell_dims: Vec<usize> = cells.iter().map(|c| cell_dim(dims, c)).collect();
    if let Some(&d) = cell_dims.iter().find(|&&d| d > cfg.max_cell_dim) {
        return Err(Error::UnsupportedCellDim {
            dim: d,
            max: cfg.max_cell_dim,
        });
    }
    let layout: Vec<CellParametrization> = cell_dims
        .iter()
        .map(|&d| {
            if d == 2 && cfg.qubit_angles {
                CellParametrization::QubitAngles
            } else {
                CellParametrization::Generator { dim: d }
            }
        })
        .collect();
    let large = cell_dims.iter().any(|&d| d > 2);
    let (starts, max_evals) = if large {
        (cfg.large_cell_starts, cfg.large_cell_max_evals)
    } else {
        (cfg.starts, cfg.max_evals)
    };
    let n_params: usize = layout.iter().map(|p| p.n_params()).sum();

    let order: Vec<usize> = cells.iter().flatten().copied().collect();
    let reordered = if is_identity_order(&order) {
        rho.clone()
    } else {
        rho.permute(&order)?
    };
    let objective = DephasingObjective {
        layout: layout.clone(),
        reordered: reordered.matrix().clone(),
        entropy: von_neumann_entropy(rho).expect_bits(),
        clip: Tolerances::default().clip,
    };

    let nm = NelderMead {
        max_evals,
        ftol: cfg.ftol,
        ..NelderMead::default()
    };
    let results: Vec<Minimum> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let x0 = if k == 0 {
                vec![0.0; n_params]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(k as u64));
                let mut x = Vec::with_capacity(n_params);
                for p in &layout {
                    p.random_start(&mut rng, &mut x);
                }
                x
            };
            nm.minimize(|x| objective.value(x), &x0)
        })
        .collect();

    let evals = results.iter().map(|m| m.evals).sum();
    let (best_start, best) = results
        .iter()
        .enumerate()
        .filter(|(_, m)| m.f.is_finite())
        .min_by(|a, b| a.1.f.total_cmp(&b.1.f).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::OptimizerFailed("no start produced a finite value".into()))?;

    let params = BasisParameters::new(layout, best.x.clone())?;
    let basis = LocalBasisSet::new(dims, cells, params.unitaries())?;
    let chi = dephase(rho, &basis)?;
    Ok(ClassicalSearch {
        chi,
        basis,
        params,
        q: EntropyValue::Bits(best.f.max(0.0)),
        evals,
        starts,
        best_start,
    })
}
