//! Nelder-Mead simplex minimizer with dimension-adaptive coefficients.

#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_evals: usize,
    /// Stop when `f_worst - f_best` falls below this.
    pub ftol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Simplex rebuilds around the incumbent after convergence.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_evals: 2000,
            ftol: 1e-8,
            initial_step: 0.5,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        if n == 0 {
            let v = eval(x0, &mut evals);
            return Minimum {
                x: Vec::new(),
                f: v,
                evals,
                converged: true,
            };
        }

        // Gao & Han adaptive coefficients
        let nf = n as f64;
        let alpha = 1.0;
        let gamma = 1.0 + 2.0 / nf;
        let rho = 0.75 - 1.0 / (2.0 * nf);
        let sigma = 1.0 - 1.0 / nf;

        let mut best_x = x0.to_vec();
        let mut best_f = eval(x0, &mut evals);
        let mut converged = false;
        let mut step = self.initial_step;

        for round in 0..=self.restarts {
            if evals >= self.max_evals {
                break;
            }
            let round_start_f = best_f;
            let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
            simplex.push((best_x.clone(), best_f));
            for i in 0..n {
                let mut x = best_x.clone();
                x[i] += step;
                let v = eval(&x, &mut evals);
                simplex.push((x, v));
            }

            converged = false;
            while evals < self.max_evals {
                simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
                let f_best = simplex[0].1;
                let f_worst = simplex[n].1;
                if (f_worst - f_best).abs() <= self.ftol {
                    converged = true;
                    break;
                }

                let mut centroid = vec![0.0; n];
                for (x, _) in &simplex[..n] {
                    for (c, xi) in centroid.iter_mut().zip(x) {
                        *c += xi / nf;
                    }
                }
                let worst = simplex[n].0.clone();
                let along = |t: f64| -> Vec<f64> {
                    centroid
                        .iter()
                        .zip(&worst)
                        .map(|(c, w)| c + t * (c - w))
                        .collect()
                };

                let xr = along(alpha);
                let fr = eval(&xr, &mut evals);
                if fr < f_best {
                    let xe = along(alpha * gamma);
                    let fe = eval(&xe, &mut evals);
                    simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                } else if fr < simplex[n - 1].1 {
                    simplex[n] = (xr, fr);
                } else {
                    let outside = fr < f_worst;
                    let (xc, fc) = if outside {
                        let x = along(alpha * rho);
                        let v = eval(&x, &mut evals);
                        (x, v)
                    } else {
                        let x = along(-rho);
                        let v = eval(&x, &mut evals);
                        (x, v)
                    };
                    if (outside && fc <= fr) || (!outside && fc < f_worst) {
                        simplex[n] = (xc, fc);
                    } else {
                        let x0 = simplex[0].0.clone();
                        for (x, v) in simplex.iter_mut().skip(1) {
                            for (xi, bi) in x.iter_mut().zip(&x0) {
                                *xi = bi + sigma * (*xi - bi);
                            }
                            *v = eval(x, &mut evals);
                        }
                    }
                }
            }

            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[0].1 <= best_f {
                best_f = simplex[0].1;
                best_x = simplex[0].0.clone();
            }
            if converged && round_start_f - best_f <= self.ftol && round > 0 {
                break;
            }
            step *= 0.25;
        }

        Minimum {
            x: best_x,
            f: best_f,
            evals,
            converged,
        }
    }
}
