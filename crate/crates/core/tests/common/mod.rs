//! Reference computations shared by the integration tests, written without
//! the library's linear algebra.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M4 = [[C; 4]; 4];

fn h2(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 1e-15).map(|&x| -x * x.log2()).sum()
}

/// `(1 - c) I/4 + c |psi-><psi-|`.
pub fn werner(c: f64) -> M4 {
    let mut m = [[C::new(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C::new((1.0 - c) / 4.0, 0.0);
    }
    m[1][1] += c / 2.0;
    m[2][2] += c / 2.0;
    m[1][2] -= c / 2.0;
    m[2][1] -= c / 2.0;
    m
}

/// Werner spectrum `{(1+3c)/4, (1-c)/4 x3}`.
pub fn werner_entropy(c: f64) -> f64 {
    let lo = (1.0 - c) / 4.0;
    h2(&[(1.0 + 3.0 * c) / 4.0, lo, lo, lo])
}

/// Columns `|n>`, `|-n>` for Bloch angles `(theta, phi)`.
fn basis(theta: f64, phi: f64) -> [[C; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = C::from_polar(1.0, phi);
    [[C::new(c, 0.0), e * s], [-e.conj() * s, C::new(c, 0.0)]]
}

/// `H(p) - S(rho)` for the product basis given by four angles.
pub fn dephasing_gap(rho: &M4, s_rho: f64, x: [f64; 4]) -> f64 {
    let a = basis(x[0], x[1]);
    let b = basis(x[2], x[3]);
    let mut probs = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            let v = [a[i][0] * b[j][0], a[i][0] * b[j][1], a[i][1] * b[j][0], a[i][1] * b[j][1]];
            let mut e = C::new(0.0, 0.0);
            for r in 0..4 {
                for s in 0..4 {
                    e += v[r].conj() * rho[r][s] * v[s];
                }
            }
            probs[2 * i + j] = e.re;
        }
    }
    h2(&probs) - s_rho
}

/// Dense grid over two Bloch angles per qubit, then repeated local zooms
/// around the incumbent.
pub fn grid_oracle(rho: &M4, s_rho: f64) -> f64 {
    use std::f64::consts::PI;
    let n = 16;
    let mut best = (f64::INFINITY, [0.0; 4]);
    let th = |i: usize| PI * i as f64 / (n - 1) as f64;
    let ph = |i: usize| 2.0 * PI * i as f64 / n as f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let x = [th(i), ph(j), th(k), ph(l)];
                    let v = dephasing_gap(rho, s_rho, x);
                    if v < best.0 {
                        best = (v, x);
                    }
                }
            }
        }
    }
    let mut step = [PI / (n - 1) as f64, 2.0 * PI / n as f64, PI / (n - 1) as f64, 2.0 * PI / n as f64];
    for _ in 0..8 {
        let centre = best.1;
        let offs = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        for a in offs {
            for b in offs {
                for c in offs {
                    for d in offs {
                        let x = [
                            centre[0] + a * step[0] / 3.0,
                            centre[1] + b * step[1] / 3.0,
                            centre[2] + c * step[2] / 3.0,
                            centre[3] + d * step[3] / 3.0,
                        ];
                        let v = dephasing_gap(rho, s_rho, x);
                        if v < best.0 {
                            best = (v, x);
                        }
                    }
                }
            }
        }
        for s in step.iter_mut() {
            *s /= 3.0;
        }
    }
    best.0
}
