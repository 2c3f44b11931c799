//! Amplitude- and phase-damping channels, their unitary dilations, and the
//! four-party system-environment states grown from a Werner state.
//!
//! Global states are ordered `(a, E_a, b, E_b)`; basis index `i` of the 16
//! dimensional space has binary digits `a E_a b E_b`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, ComplexMatrix, CompositeDims, DensityMatrix, C64, ONE, ZERO,
};
use crate::states::singlet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "ad")]
    AmplitudeDamping,
    #[serde(rename = "pd")]
    PhaseDamping,
}

impl ChannelKind {
    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::AmplitudeDamping => "ad",
            ChannelKind::PhaseDamping => "pd",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ad" | "amplitude" | "amplitude-damping" => Ok(ChannelKind::AmplitudeDamping),
            "pd" | "phase" | "phase-damping" => Ok(ChannelKind::PhaseDamping),
            _ => Err(Error::UnsupportedChannel(s.to_string())),
        }
    }
}

fn unit_interval(name: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} is outside [0, 1]")))
    }
}

/// Werner mixing parameter `c`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct WernerParams(f64);

impl WernerParams {
    pub fn new(c: f64) -> Result<Self> {
        unit_interval("c", c).map(WernerParams)
    }

    pub fn c(self) -> f64 {
        self.0
    }
}

/// Damping parameter `p`, `0` at `t = 0` and `1` as `t -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct TimeParam(f64);

impl TimeParam {
    pub fn new(p: f64) -> Result<Self> {
        unit_interval("p", p).map(TimeParam)
    }

    pub fn p(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kind: ChannelKind,
    p: TimeParam,
    operators: Vec<ComplexMatrix>,
}

pub fn amplitude_damping_kraus(p: TimeParam) -> KrausChannel {
    let q = p.p();
    KrausChannel {
        kind: ChannelKind::AmplitudeDamping,
        p,
        operators: vec![
            ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - q).sqrt()]]),
            ComplexMatrix::from_real_rows(&[&[0.0, q.sqrt()], &[0.0, 0.0]]),
        ],
    }
}

pub fn phase_damping_kraus(p: TimeParam) -> KrausChannel {
    let q = p.p();
    KrausChannel {
        kind: ChannelKind::PhaseDamping,
        p,
        operators: vec![
            ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - q).sqrt()]]),
            ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, q.sqrt()]]),
        ],
    }
}

pub fn kraus(kind: ChannelKind, p: TimeParam) -> KrausChannel {
    match kind {
        ChannelKind::AmplitudeDamping => amplitude_damping_kraus(p),
        ChannelKind::PhaseDamping => phase_damping_kraus(p),
    }
}

impl KrausChannel {
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn p(&self) -> TimeParam {
        self.p
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// Largest entry of `sum K^dagger K - I`.
    pub fn completeness_error(&self) -> f64 {
        let d = self.operators[0].cols();
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| &acc + &(&k.dagger() * k));
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }

    /// `sum_i K_i rho K_i^dagger` on a single-qudit state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_subsystems() != 1 {
            return Err(Error::InvalidSubset(
                "use apply_on for multi-party states".into(),
            ));
        }
        self.apply_on(rho, 0)
    }

    /// Applies the channel to one subsystem of a composite state.
    pub fn apply_on(&self, rho: &DensityMatrix, subsystem: usize) -> Result<DensityMatrix> {
        let dims = rho.dims();
        if subsystem >= dims.len() {
            return Err(Error::InvalidSubset(format!(
                "subsystem {subsystem} out of range for {} parties",
                dims.len()
            )));
        }
        let d = self.operators[0].cols();
        if dims.as_slice()[subsystem] != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: dims.as_slice()[subsystem],
            });
        }
        let left: usize = dims.as_slice()[..subsystem].iter().product();
        let right: usize = dims.as_slice()[subsystem + 1..].iter().product();
        let (il, ir) = (ComplexMatrix::identity(left), ComplexMatrix::identity(right));
        let n = rho.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in &self.operators {
            let full = il.kron(k).kron(&ir);
            out = &out + &(&(&full * rho.matrix()) * &full.dagger());
        }
        DensityMatrix::new(dims.clone(), out.hermitian_part())
    }
}

/// Images of `|0_s 0_E>` and `|1_s 0_E>` under the system-environment
/// unitary; pair index is `2 s + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationMap {
    kind: ChannelKind,
    p: TimeParam,
    outputs: [Vec<C64>; 2],
}

/// `U |s, 0> = sum_i K_i |s> (x) |i>`.
pub fn dilation(channel: &KrausChannel) -> Result<DilationMap> {
    let ops = channel.operators();
    if ops.len() > 2 || ops.iter().any(|k| k.rows() != 2 || k.cols() != 2) {
        return Err(Error::UnsupportedChannel(format!(
            "dilation needs at most 2 qubit Kraus operators, got {}",
            ops.len()
        )));
    }
    let image = |s: usize| {
        let mut v = vec![ZERO; 4];
        for (i, k) in ops.iter().enumerate() {
            for r in 0..2 {
                v[2 * r + i] += k[(r, s)];
            }
        }
        v
    };
    Ok(DilationMap {
        kind: channel.kind(),
        p: channel.p(),
        outputs: [image(0), image(1)],
    })
}

impl DilationMap {
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn p(&self) -> TimeParam {
        self.p
    }

    pub fn outputs(&self) -> &[Vec<C64>; 2] {
        &self.outputs
    }

    /// Largest deviation of the output Gram matrix from the identity.
    pub fn isometry_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let g: C64 = self.outputs[i]
                    .iter()
                    .zip(&self.outputs[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let want = if i == j { ONE } else { ZERO };
                err = err.max((g - want).norm());
            }
        }
        err
    }

    /// Full 4x4 unitary: columns 0 (`|00>`) and 2 (`|10>`) are the specified
    /// outputs, the others come from Gram-Schmidt over the computational basis.
    pub fn unitary(&self) -> ComplexMatrix {
        let mut cols: Vec<Vec<C64>> = self.outputs.to_vec();
        for e in 0..4 {
            if cols.len() == 4 {
                break;
            }
            let mut v = vec![ZERO; 4];
            v[e] = ONE;
            for c in &cols {
                let ov: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= ov * ci;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                cols.push(v.into_iter().map(|z| z / norm).collect());
            }
        }
        // inputs |00>, |10> map to cols[0], cols[1]; the rest fill |01>, |11>
        let order = [0usize, 2, 1, 3];
        let mut u = ComplexMatrix::zeros(4, 4);
        for (slot, col) in order.iter().zip(&cols) {
            for r in 0..4 {
                u[(r, *slot)] = col[r];
            }
        }
        u
    }
}

/// `(1 - c) I/4 + c |psi-><psi-|`.
pub fn werner_state(c: WernerParams) -> DensityMatrix {
    let c = c.c();
    let m = &singlet().density().matrix().scale_real(c)
        + &ComplexMatrix::identity(4).scale_real((1.0 - c) / 4.0);
    DensityMatrix::new(CompositeDims::qubits(2), m).expect("Werner state is valid")
}

/// Evolves a two-qubit state `rho_ab` with both environments in vacuum
/// through `U_{aE_a} (x) U_{bE_b}`, acting on each eigenvector.
pub fn evolve_two_qubit(rho_ab: &DensityMatrix, kind: ChannelKind, p: TimeParam) -> Result<DensityMatrix> {
    if rho_ab.dims().as_slice() != [2, 2] {
        return Err(Error::InvalidDims(
            "evolution needs a two-qubit system state".into(),
        ));
    }
    let u = dilation(&kraus(kind, p))?.unitary();
    let uu = u.kron(&u);
    let eig = eig_hermitian(rho_ab.matrix())?;
    let mut out = ComplexMatrix::zeros(16, 16);
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda.abs() < 1e-15 {
            continue;
        }
        let v = eig.vector(k);
        // |a b> (x) |0 0> reordered to (a, E_a, b, E_b)
        let mut embedded = vec![ZERO; 16];
        for a in 0..2 {
            for b in 0..2 {
                embedded[8 * a + 2 * b] = v[2 * a + b];
            }
        }
        let w = uu.matvec(&embedded);
        out = &out + &ComplexMatrix::outer(&w, &w).scale_real(lambda);
    }
    DensityMatrix::new(CompositeDims::qubits(4), out.hermitian_part())
}

pub fn evolve_global(c: WernerParams, p: TimeParam, kind: ChannelKind) -> DensityMatrix {
    evolve_two_qubit(&werner_state(c), kind, p).expect("Werner input is a valid two-qubit state")
}

/// `(E (x) E)(rho_w)` computed in operator-sum form.
pub fn evolve_system(c: WernerParams, p: TimeParam, kind: ChannelKind) -> DensityMatrix {
    let ch = kraus(kind, p);
    let once = ch.apply_on(&werner_state(c), 0).expect("qubit subsystem");
    ch.apply_on(&once, 1).expect("qubit subsystem")
}

/// Sparse accumulator for literal matrix-element transcriptions.
struct Elements(ComplexMatrix);

impl Elements {
    fn new() -> Self {
        Elements(ComplexMatrix::zeros(16, 16))
    }

    fn diag(&mut self, w: f64, idx: &[usize]) {
        for &i in idx {
            self.0[(i, i)] += C64::new(w, 0.0);
        }
    }

    /// `w (|i><j| + |j><i|)`.
    fn pair(&mut self, w: f64, i: usize, j: usize) {
        self.0[(i, j)] += C64::new(w, 0.0);
        self.0[(j, i)] += C64::new(w, 0.0);
    }
}

/// `iota_ad(p)` written out element by element.
pub fn iota_ad(p: TimeParam) -> ComplexMatrix {
    let p = p.p();
    let q = 1.0 - p;
    let mut e = Elements::new();
    e.diag(1.0, &[0]);
    e.diag(q, &[2, 8]);
    e.diag(p * p, &[5]);
    e.diag(q * q, &[10]);
    e.diag(p * q, &[6, 9]);
    e.diag(p, &[4, 1]);
    let s1 = (p * q).sqrt();
    e.pair(s1, 4, 8);
    e.pair(s1, 1, 2);
    let s3 = (p * q * q * q).sqrt();
    e.pair(s3, 6, 10);
    e.pair(s3, 9, 10);
    e.pair(p * q, 5, 10);
    e.pair(p * q, 6, 9);
    let t3 = (p * p * p * q).sqrt();
    e.pair(t3, 5, 6);
    e.pair(t3, 5, 9);
    e.0.scale_real(0.25)
}

/// `iota_pd(p)` written out element by element.
pub fn iota_pd(p: TimeParam) -> ComplexMatrix {
    let p = p.p();
    let q = 1.0 - p;
    let mut e = Elements::new();
    e.diag(1.0, &[0]);
    e.diag(q, &[2, 8]);
    e.diag(p, &[3, 12]);
    e.diag(q * q, &[10]);
    e.diag(p * q, &[11, 14]);
    e.diag(p * p, &[15]);
    let s1 = (p * q).sqrt();
    e.pair(s1, 2, 3);
    e.pair(s1, 8, 12);
    let s3 = (p * q * q * q).sqrt();
    e.pair(s3, 14, 10);
    e.pair(s3, 11, 10);
    e.pair(p * q, 11, 14);
    e.pair(p * q, 10, 15);
    let t3 = (p * p * p * q).sqrt();
    e.pair(t3, 15, 11);
    e.pair(t3, 15, 14);
    e.0.scale_real(0.25)
}

/// `|Upsilon(p)>`, the image of the singlet.
pub fn upsilon(p: TimeParam, kind: ChannelKind) -> Vec<C64> {
    let p = p.p();
    let a = ((1.0 - p) / 2.0).sqrt();
    let b = (p / 2.0).sqrt();
    let (i, j) = match kind {
        ChannelKind::AmplitudeDamping => (1, 4),
        ChannelKind::PhaseDamping => (3, 12),
    };
    let mut v = vec![ZERO; 16];
    v[2] = C64::new(a, 0.0);
    v[8] = C64::new(-a, 0.0);
    v[i] += C64::new(b, 0.0);
    v[j] += C64::new(-b, 0.0);
    v
}

/// `(1 - c) iota(p) + c |Upsilon(p)><Upsilon(p)|` from the explicit
/// matrix elements.
pub fn appendix_golden_state(c: WernerParams, p: TimeParam, kind: ChannelKind) -> DensityMatrix {
    let iota = match kind {
        ChannelKind::AmplitudeDamping => iota_ad(p),
        ChannelKind::PhaseDamping => iota_pd(p),
    };
    let ups = upsilon(p, kind);
    let m = &iota.scale_real(1.0 - c.c()) + &ComplexMatrix::outer(&ups, &ups).scale_real(c.c());
    DensityMatrix::new(CompositeDims::qubits(4), m).expect("appendix state is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::von_neumann_entropy;
    use crate::random;
    use crate::states::{ghz4_target, w4};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tp(p: f64) -> TimeParam {
        TimeParam::new(p).unwrap()
    }

    fn wp(c: f64) -> WernerParams {
        WernerParams::new(c).unwrap()
    }

    fn qubit(m: &[&[f64]]) -> DensityMatrix {
        DensityMatrix::new(CompositeDims::qubits(1), ComplexMatrix::from_real_rows(m)).unwrap()
    }

    fn grid(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| i as f64 / (n - 1) as f64)
    }

    #[test]
    fn parameter_ranges() {
        assert!(TimeParam::new(-0.1).is_err());
        assert!(TimeParam::new(1.0 + 1e-12).is_err());
        assert!(WernerParams::new(f64::NAN).is_err());
        assert_eq!("AD".parse::<ChannelKind>().unwrap(), ChannelKind::AmplitudeDamping);
        assert!("gad".parse::<ChannelKind>().is_err());
    }

    #[test]
    fn amplitude_damping_examples() {
        let k = amplitude_damping_kraus(tp(0.0));
        assert_eq!(k.operators()[0], ComplexMatrix::identity(2));
        assert_eq!(k.operators()[1], ComplexMatrix::zeros(2, 2));

        let excited = qubit(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let out = amplitude_damping_kraus(tp(1.0)).apply(&excited).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[1.0, 0.0])) < 1e-15);
        let out = amplitude_damping_kraus(tp(0.5)).apply(&excited).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn phase_damping_examples() {
        let plus = qubit(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let out = phase_damping_kraus(tp(1.0)).apply(&plus).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[0.5, 0.5])) < 1e-15);
        let out = phase_damping_kraus(tp(0.75)).apply(&plus).unwrap();
        assert!((out.matrix()[(0, 1)].re - 0.25).abs() < 1e-15);
        let pop = qubit(&[&[0.3, 0.0], &[0.0, 0.7]]);
        for p in grid(11) {
            let out = phase_damping_kraus(tp(p)).apply(&pop).unwrap();
            assert!(out.matrix().max_abs_diff(pop.matrix()) < 1e-15);
        }
    }

    #[test]
    fn kraus_completeness_on_grid() {
        for p in grid(101) {
            for kind in [ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping] {
                assert!(kraus(kind, tp(p)).completeness_error() < 1e-12);
            }
        }
    }

    #[test]
    fn dilation_examples() {
        let pd = dilation(&phase_damping_kraus(tp(1.0))).unwrap();
        let mut want = vec![ZERO; 4];
        want[3] = ONE;
        assert_eq!(pd.outputs()[1], want);
        let ad = dilation(&amplitude_damping_kraus(tp(0.5))).unwrap();
        assert!(ad.isometry_error() < 1e-12);
        let h = 0.5f64.sqrt();
        assert!((ad.outputs()[1][2].re - h).abs() < 1e-15 && (ad.outputs()[1][1].re - h).abs() < 1e-15);
        for p in grid(11) {
            for kind in [ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping] {
                let u = dilation(&kraus(kind, tp(p))).unwrap().unitary();
                assert!(crate::linalg::unitarity_error(&u) < 1e-12);
            }
        }
    }

    #[test]
    fn dilation_reproduces_operator_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vac = qubit(&[&[1.0, 0.0], &[0.0, 0.0]]);
        for kind in [ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping] {
            for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
                let ch = kraus(kind, tp(p));
                let u = dilation(&ch).unwrap().unitary();
                for _ in 0..5 {
                    let rho = random::density_matrix(&mut rng, CompositeDims::qubits(1));
                    let joint = rho.tensor(&vac).conjugate(&u);
                    let reduced = joint.partial_trace(&[0]).unwrap();
                    let direct = ch.apply(&rho).unwrap();
                    assert!(reduced.matrix().max_abs_diff(direct.matrix()) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn werner_spectrum() {
        for c in grid(11) {
            let ev = werner_state(wp(c)).eigenvalues();
            let lo = (1.0 - c) / 4.0;
            for e in &ev[..3] {
                assert!((e - lo).abs() < 1e-12);
            }
            assert!((ev[3] - (1.0 + 3.0 * c) / 4.0).abs() < 1e-12);
        }
        let mixed = werner_state(wp(0.0));
        assert!(mixed.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);
        assert!(werner_state(wp(1.0)).matrix().max_abs_diff(singlet().density().matrix()) < 1e-15);
    }

    #[test]
    fn golden_state_examples() {
        let m = iota_ad(tp(0.0));
        let want = ComplexMatrix::from_fn(16, 16, |r, c| {
            if r == c && [0, 2, 8, 10].contains(&r) {
                C64::new(0.25, 0.0)
            } else {
                ZERO
            }
        });
        assert_eq!(m, want);
        let m = iota_pd(tp(1.0));
        let want = ComplexMatrix::from_fn(16, 16, |r, c| {
            if r == c && [0, 3, 12, 15].contains(&r) {
                C64::new(0.25, 0.0)
            } else {
                ZERO
            }
        });
        assert_eq!(m, want);
        for p in grid(21) {
            let v = upsilon(tp(p), ChannelKind::PhaseDamping);
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn evolution_matches_golden_state() {
        for c in grid(11) {
            for p in grid(11) {
                for kind in [ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping] {
                    let a = evolve_global(wp(c), tp(p), kind);
                    let b = appendix_golden_state(wp(c), tp(p), kind);
                    let diff = (a.matrix() - b.matrix()).frobenius_norm();
                    assert!(diff < 1e-10, "{kind} c={c} p={p}: {diff:e}");
                }
            }
        }
    }

    #[test]
    fn evolution_limits() {
        let vac = DensityMatrix::from_pure(&crate::linalg::PureState::basis(CompositeDims::qubits(2), 0).unwrap());
        for kind in [ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping] {
            let g = evolve_global(wp(0.7), tp(0.0), kind);
            let want = werner_state(wp(0.7)).tensor(&vac).permute(&[0, 2, 1, 3]).unwrap();
            assert!(g.matrix().max_abs_diff(want.matrix()) < 1e-12);
        }
        let ad = evolve_global(wp(1.0), tp(0.5), ChannelKind::AmplitudeDamping);
        assert!(ad.matrix().max_abs_diff(w4().density().matrix()) < 1e-12);
        let pd = evolve_global(wp(1.0), tp(1.0), ChannelKind::PhaseDamping);
        assert!(pd.matrix().max_abs_diff(ghz4_target().density().matrix()) < 1e-12);
    }

    #[test]
    fn environment_trace_is_operator_sum() {
        for c in grid(6) {
            for p in grid(6) {
                for kind in [ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping] {
                    let g = evolve_global(wp(c), tp(p), kind).partial_trace(&[0, 2]).unwrap();
                    let s = evolve_system(wp(c), tp(p), kind);
                    assert!(g.matrix().max_abs_diff(s.matrix()) < 1e-12);
                    if kind == ChannelKind::PhaseDamping {
                        let w = werner_state(wp(c));
                        for i in 0..4 {
                            assert!((s.matrix()[(i, i)] - w.matrix()[(i, i)]).norm() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pure_input_stays_pure() {
        for p in grid(11) {
            for kind in [ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping] {
                let s = von_neumann_entropy(&evolve_global(wp(1.0), tp(p), kind)).expect_bits();
                assert!(s.abs() < 1e-9);
            }
        }
    }
}
