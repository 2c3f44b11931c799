//! Genuine multipartite total, quantum and classical correlations and the
//! corresponding degrees.
//!
//! A quantity is genuinely n-partite when it survives every bipartite cut:
//! the n-party value is the minimum over cuts, and the k-party value is the
//! maximum of that over k-element subsets.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::classical_search::{closest_classical_state, per_subsystem_cells, SearchConfig};
use crate::entropy::von_neumann_entropy;
use crate::error::{Error, Result};
use crate::linalg::{validated_permutation, DensityMatrix};

/// Default threshold separating optimizer noise from genuine correlation.
pub const TAU_DEGREE: f64 = 1e-6;

/// Reports below this are treated as numerically invalid.
const VALUE_FLOOR: f64 = -1e-9;

/// A cut `(c1 | c2)` of `n` subsystems, stored with subsystem 0 in `c1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    n: usize,
    mask: u64,
}

impl Bipartition {
    pub fn new(n: usize, c1: &[usize]) -> Result<Self> {
        if n < 2 || n > 63 {
            return Err(Error::TooFewSubsystems { n, min: 2 });
        }
        let mut mask = 0u64;
        for &i in c1 {
            if i >= n {
                return Err(Error::InvalidSubset(format!("index {i} out of range")));
            }
            mask |= 1 << i;
        }
        Self::from_mask(n, mask)
    }

    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        let full = (1u64 << n) - 1;
        if mask & !full != 0 || mask == 0 || mask == full {
            return Err(Error::InvalidSubset("both cells must be nonempty".into()));
        }
        let mask = if mask & 1 == 1 { mask } else { full & !mask };
        Ok(Bipartition { n, mask })
    }

    /// All `2^(n-1) - 1` cuts in increasing mask order.
    pub fn all(n: usize) -> Vec<Bipartition> {
        let full = (1u64 << n) - 1;
        (1..full)
            .step_by(2)
            .map(|mask| Bipartition { n, mask })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn c1(&self) -> Vec<usize> {
        (0..self.n).filter(|i| self.mask >> i & 1 == 1).collect()
    }

    pub fn c2(&self) -> Vec<usize> {
        (0..self.n).filter(|i| self.mask >> i & 1 == 0).collect()
    }

    fn image(&self, perm: &[usize]) -> Bipartition {
        let mask = self
            .c1()
            .iter()
            .fold(0u64, |m, &i| m | 1 << perm[i]);
        Bipartition::from_mask(self.n, mask).expect("permutation keeps cells nonempty")
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<usize>| {
            v.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}|{}", join(self.c1()), join(self.c2()))
    }
}

impl Serialize for Bipartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Cells {
            c1: Vec<usize>,
            c2: Vec<usize>,
        }
        Cells {
            c1: self.c1(),
            c2: self.c2(),
        }
        .serialize(s)
    }
}

/// Strictly increasing subset of at least two subsystem indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct SubsetSelection(Vec<usize>);

impl SubsetSelection {
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.len() < 2 || indices.len() > n {
            return Err(Error::KOutOfRange {
                k: indices.len(),
                n,
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices[indices.len() - 1] >= n {
            return Err(Error::InvalidSubset(format!(
                "{indices:?} is not strictly increasing within 0..{n}"
            )));
        }
        Ok(SubsetSelection(indices))
    }

    /// All `k`-subsets of `0..n` in lexicographic order.
    pub fn all(n: usize, k: usize) -> Result<Vec<SubsetSelection>> {
        check_k(n, k)?;
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(SubsetSelection(idx.clone()));
            let mut i = k;
            while i > 0 && idx[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
        Ok(out)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    fn image(&self, perm: &[usize]) -> SubsetSelection {
        let mut v: Vec<usize> = self.0.iter().map(|&i| perm[i]).collect();
        v.sort_unstable();
        SubsetSelection(v)
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        Err(Error::KOutOfRange { k, n })
    } else {
        Ok(())
    }
}

fn check_n(rho: &DensityMatrix) -> Result<usize> {
    let n = rho.n_subsystems();
    if n < 2 {
        Err(Error::TooFewSubsystems { n, min: 2 })
    } else {
        Ok(n)
    }
}

/// Group of subsystem relabelings under which the inputs are known to be
/// invariant. Cuts and subsets in one orbit are evaluated once.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetry {
    n: usize,
    elements: Vec<Vec<usize>>,
}

impl Symmetry {
    /// Closure of `generators`; `perm[i]` is the image of subsystem `i`.
    pub fn new(n: usize, generators: Vec<Vec<usize>>) -> Result<Self> {
        for g in &generators {
            validated_permutation(g, n)?;
        }
        let mut elements: BTreeSet<Vec<usize>> = BTreeSet::new();
        elements.insert((0..n).collect());
        let mut frontier: Vec<Vec<usize>> = vec![(0..n).collect()];
        while let Some(e) = frontier.pop() {
            for g in &generators {
                let composed: Vec<usize> = e.iter().map(|&i| g[i]).collect();
                if elements.insert(composed.clone()) {
                    frontier.push(composed);
                }
            }
        }
        Ok(Symmetry {
            n,
            elements: elements.into_iter().collect(),
        })
    }

    /// Exchange of `(a, E_a)` with `(b, E_b)` in the four-party ordering.
    pub fn two_party_swap() -> Self {
        Symmetry::new(4, vec![vec![2, 3, 0, 1]]).expect("valid permutation")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n,
            });
        }
        Ok(())
    }

    fn is_cut_representative(&self, cut: &Bipartition) -> bool {
        self.elements.iter().all(|g| cut.image(g) >= *cut)
    }

    fn is_subset_representative(&self, s: &SubsetSelection) -> bool {
        self.elements.iter().all(|g| s.image(g) >= *s)
    }

    /// Orbit representatives among all cuts, in increasing mask order.
    pub fn cuts(&self) -> Vec<Bipartition> {
        Bipartition::all(self.n)
            .into_iter()
            .filter(|c| self.is_cut_representative(c))
            .collect()
    }

    /// Orbit representatives among `k`-subsets, in lexicographic order.
    pub fn subsets(&self, k: usize) -> Result<Vec<SubsetSelection>> {
        Ok(SubsetSelection::all(self.n, k)?
            .into_iter()
            .filter(|s| self.is_subset_representative(s))
            .collect())
    }
}

fn cuts_for(n: usize, sym: Option<&Symmetry>) -> Result<Vec<Bipartition>> {
    match sym {
        Some(s) => {
            s.check(n)?;
            Ok(s.cuts())
        }
        None => Ok(Bipartition::all(n)),
    }
}

fn subsets_for(n: usize, k: usize, sym: Option<&Symmetry>) -> Result<Vec<SubsetSelection>> {
    match sym {
        Some(s) => {
            s.check(n)?;
            s.subsets(k)
        }
        None => SubsetSelection::all(n, k),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Cut(Bipartition),
    Subset {
        subset: SubsetSelection,
        cut: Option<Bipartition>,
    },
    None,
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct CutW<'a> {
            cut: &'a Bipartition,
        }
        #[derive(Serialize)]
        struct SubsetW<'a> {
            subset: &'a SubsetSelection,
            #[serde(skip_serializing_if = "Option::is_none")]
            cut: &'a Option<Bipartition>,
        }
        match self {
            Witness::Cut(cut) => CutW { cut }.serialize(s),
            Witness::Subset { subset, cut } => SubsetW { subset, cut }.serialize(s),
            Witness::None => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub name: String,
    pub value_bits: f64,
    pub witness: Witness,
    /// Objective evaluations spent, when a basis search was involved.
    pub evals: Option<usize>,
    #[serde(skip)]
    pub starts: Option<usize>,
}

impl CorrelationReport {
    fn checked(self) -> Result<Self> {
        if self.value_bits.is_nan() || self.value_bits < VALUE_FLOOR {
            return Err(Error::OptimizerFailed(format!(
                "{} evaluated to {}",
                self.name, self.value_bits
            )));
        }
        Ok(self)
    }
}

fn add_opt(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (None, None) => None,
        _ => Some(a.unwrap_or(0) + b.unwrap_or(0)),
    }
}

/// `S(rho_c1) + S(rho_c2) - S(rho)`.
pub fn cut_mutual_information(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    if cut.n() != rho.n_subsystems() {
        return Err(Error::DimensionMismatch {
            expected: rho.n_subsystems(),
            found: cut.n(),
        });
    }
    let s1 = von_neumann_entropy(&rho.partial_trace(&cut.c1())?).expect_bits();
    let s2 = von_neumann_entropy(&rho.partial_trace(&cut.c2())?).expect_bits();
    Ok(s1 + s2 - von_neumann_entropy(rho).expect_bits())
}

/// Index of the smallest value, first on ties.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Index of the largest value, first on ties.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn genuine_total_in(rho: &DensityMatrix) -> Result<CorrelationReport> {
    genuine_total_in_with(rho, None)
}

/// Minimum over cuts of the cut mutual information.
pub fn genuine_total_in_with(rho: &DensityMatrix, sym: Option<&Symmetry>) -> Result<CorrelationReport> {
    let n = check_n(rho)?;
    let s = von_neumann_entropy(rho).expect_bits();
    let cuts = cuts_for(n, sym)?;
    let values = cuts
        .iter()
        .map(|cut| {
            let s1 = von_neumann_entropy(&rho.partial_trace(&cut.c1())?).expect_bits();
            let s2 = von_neumann_entropy(&rho.partial_trace(&cut.c2())?).expect_bits();
            Ok(s1 + s2 - s)
        })
        .collect::<Result<Vec<f64>>>()?;
    let i = argmin(&values);
    CorrelationReport {
        name: format!("I{n}"),
        value_bits: values[i],
        witness: Witness::Cut(cuts[i]),
        evals: None,
        starts: None,
    }
    .checked()
}

pub fn genuine_total_ik(rho: &DensityMatrix, k: usize) -> Result<CorrelationReport> {
    genuine_total_ik_with(rho, k, None)
}

/// Maximum over `k`-subsets of the genuine `k`-partite total correlation.
pub fn genuine_total_ik_with(
    rho: &DensityMatrix,
    k: usize,
    sym: Option<&Symmetry>,
) -> Result<CorrelationReport> {
    let n = check_n(rho)?;
    check_k(n, k)?;
    let subsets = subsets_for(n, k, sym)?;
    let reports = subsets
        .iter()
        .map(|s| genuine_total_in(&rho.partial_trace(s.indices())?))
        .collect::<Result<Vec<_>>>()?;
    Ok(best_subset(format!("I{k}"), subsets, reports))
}

fn best_subset(
    name: String,
    subsets: Vec<SubsetSelection>,
    reports: Vec<CorrelationReport>,
) -> CorrelationReport {
    let values: Vec<f64> = reports.iter().map(|r| r.value_bits).collect();
    let i = argmax(&values);
    let evals = reports.iter().fold(None, |acc, r| add_opt(acc, r.evals));
    let starts = reports.iter().fold(None, |acc, r| add_opt(acc, r.starts));
    let cut = match reports[i].witness {
        Witness::Cut(c) => Some(c),
        _ => None,
    };
    CorrelationReport {
        name,
        value_bits: values[i],
        witness: Witness::Subset {
            subset: subsets[i].clone(),
            cut,
        },
        evals,
        starts,
    }
}

pub fn genuine_quantum_qn(rho: &DensityMatrix, cfg: &SearchConfig) -> Result<CorrelationReport> {
    genuine_quantum_qn_with(rho, cfg, None)
}

/// Minimum over cuts of the closest-classical distance with the two cells
/// of the cut as the local parties (arbitrary bases within each cell).
pub fn genuine_quantum_qn_with(
    rho: &DensityMatrix,
    cfg: &SearchConfig,
    sym: Option<&Symmetry>,
) -> Result<CorrelationReport> {
    let n = check_n(rho)?;
    let cuts = cuts_for(n, sym)?;
    let searches = cuts
        .par_iter()
        .map(|cut| closest_classical_state(rho, vec![cut.c1(), cut.c2()], cfg))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = searches.iter().map(|s| s.q.expect_bits()).collect();
    let i = argmin(&values);
    CorrelationReport {
        name: format!("Q{n}"),
        value_bits: values[i],
        witness: Witness::Cut(cuts[i]),
        evals: Some(searches.iter().map(|s| s.evals).sum()),
        starts: Some(searches.iter().map(|s| s.starts).sum()),
    }
    .checked()
}

pub fn genuine_quantum_qk(
    rho: &DensityMatrix,
    k: usize,
    cfg: &SearchConfig,
) -> Result<CorrelationReport> {
    genuine_quantum_qk_with(rho, k, cfg, None)
}

pub fn genuine_quantum_qk_with(
    rho: &DensityMatrix,
    k: usize,
    cfg: &SearchConfig,
    sym: Option<&Symmetry>,
) -> Result<CorrelationReport> {
    let n = check_n(rho)?;
    check_k(n, k)?;
    let subsets = subsets_for(n, k, sym)?;
    let reports = subsets
        .iter()
        .map(|s| genuine_quantum_qn(&rho.partial_trace(s.indices())?, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(best_subset(format!("Q{k}"), subsets, reports))
}

/// Closest-classical distance with one cell per subsystem, together with
/// the closest classical state.
#[derive(Debug, Clone)]
pub struct MultipartiteQuantum {
    pub report: CorrelationReport,
    pub chi: DensityMatrix,
}

pub fn multipartite_quantum_q(rho: &DensityMatrix, cfg: &SearchConfig) -> Result<MultipartiteQuantum> {
    let n = check_n(rho)?;
    let search = closest_classical_state(rho, per_subsystem_cells(n), cfg)?;
    let report = CorrelationReport {
        name: "Q".into(),
        value_bits: search.q.expect_bits(),
        witness: Witness::None,
        evals: Some(search.evals),
        starts: Some(search.starts),
    }
    .checked()?;
    Ok(MultipartiteQuantum {
        report,
        chi: search.chi,
    })
}

/// Genuine `n`-partite total correlation of the closest classical state.
pub fn genuine_classical_cn(rho: &DensityMatrix, cfg: &SearchConfig) -> Result<CorrelationReport> {
    let MultipartiteQuantum { report, chi } = multipartite_quantum_q(rho, cfg)?;
    let mut c = genuine_total_in(&chi)?;
    c.name = format!("C{}", rho.n_subsystems());
    c.evals = report.evals;
    c.starts = report.starts;
    Ok(c)
}

/// Maximum over `k`-subsets of the genuine total correlation of the
/// reduced closest classical state; `chi` is found once for all subsets.
pub fn genuine_classical_ck(
    rho: &DensityMatrix,
    k: usize,
    cfg: &SearchConfig,
) -> Result<CorrelationReport> {
    genuine_classical_ck_with(rho, k, cfg, None)
}

pub fn genuine_classical_ck_with(
    rho: &DensityMatrix,
    k: usize,
    cfg: &SearchConfig,
    sym: Option<&Symmetry>,
) -> Result<CorrelationReport> {
    let n = check_n(rho)?;
    check_k(n, k)?;
    let MultipartiteQuantum { report, chi } = multipartite_quantum_q(rho, cfg)?;
    let mut c = genuine_total_ik_with(&chi, k, sym)?;
    c.name = format!("C{k}");
    c.evals = report.evals;
    c.starts = report.starts;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeKind {
    Total,
    Quantum,
    Classical,
}

impl FromStr for DegreeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(DegreeKind::Total),
            "quantum" => Ok(DegreeKind::Quantum),
            "classical" => Ok(DegreeKind::Classical),
            _ => Err(Error::UnknownMeasure(s.to_string())),
        }
    }
}

pub fn degree_of(rho: &DensityMatrix, kind: DegreeKind, cfg: &SearchConfig) -> Result<usize> {
    degree_of_with(rho, kind, cfg, TAU_DEGREE)
}

/// Largest `k` whose genuine `k`-partite quantifier of `kind` exceeds `tau`,
/// or 1 if there is none.
pub fn degree_of_with(
    rho: &DensityMatrix,
    kind: DegreeKind,
    cfg: &SearchConfig,
    tau: f64,
) -> Result<usize> {
    let n = check_n(rho)?;
    let chi = match kind {
        DegreeKind::Classical => Some(multipartite_quantum_q(rho, cfg)?.chi),
        _ => None,
    };
    for k in (2..=n).rev() {
        let value = match kind {
            DegreeKind::Total => max_over_subsets(rho, k, |r| genuine_total_in(r), tau)?,
            DegreeKind::Quantum => {
                max_over_subsets(rho, k, |r| genuine_quantum_qn(r, cfg), tau)?
            }
            DegreeKind::Classical => {
                let chi = chi.as_ref().expect("computed above");
                max_over_subsets(chi, k, |r| genuine_total_in(r), tau)?
            }
        };
        if value > tau {
            return Ok(k);
        }
    }
    Ok(1)
}

/// Max over `k`-subsets of `f` on the reduced state, stopping at the first
/// value above `tau`.
fn max_over_subsets(
    rho: &DensityMatrix,
    k: usize,
    f: impl Fn(&DensityMatrix) -> Result<CorrelationReport>,
    tau: f64,
) -> Result<f64> {
    let n = rho.n_subsystems();
    let mut best = f64::NEG_INFINITY;
    for s in SubsetSelection::all(n, k)? {
        let reduced = if k == n {
            rho.clone()
        } else {
            rho.partial_trace(s.indices())?
        };
        best = best.max(f(&reduced)?.value_bits);
        if best > tau {
            break;
        }
    }
    Ok(best)
}
