//! Detection of slope discontinuities along a uniform `p` grid.

use serde::Serialize;

use super::{Measure, SweepTable};
use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuddenChangeOptions {
    /// Required ratio of a slope jump to the local jump level.
    pub kappa: f64,
    /// Half-width, in grid points, of the neighbourhood used for the level.
    pub window: usize,
    /// Lower bound on the local level, in slope units.
    pub floor: f64,
}

impl Default for SuddenChangeOptions {
    fn default() -> Self {
        SuddenChangeOptions {
            kappa: 10.0,
            window: 5,
            floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuddenChangeReport {
    pub measure: String,
    pub c: f64,
    pub p_star: f64,
    pub left_slope: f64,
    pub right_slope: f64,
    /// The local jump level the detection was measured against.
    pub noise: f64,
}

impl SuddenChangeReport {
    pub fn jump(&self) -> f64 {
        (self.right_slope - self.left_slope).abs()
    }
}

/// Grid nodes where the one-sided slopes disagree by more than `kappa`
/// times the median jump of the surrounding nodes (the two adjacent nodes
/// excluded, so a kink falling between nodes is not its own background).
/// Returns `(index, left_slope, right_slope, noise)`.
pub fn find_kinks(
    points: &[(f64, f64)],
    opts: &SuddenChangeOptions,
) -> Result<Vec<(usize, f64, f64, f64)>> {
    let n = points.len();
    if n < MIN_POINTS {
        return Err(Error::GridTooCoarse {
            points: n,
            min: MIN_POINTS,
        });
    }
    let h = (points[n - 1].0 - points[0].0) / (n - 1) as f64;
    if !(h > 0.0)
        || points
            .windows(2)
            .any(|w| ((w[1].0 - w[0].0) - h).abs() > 1e-9 * h.max(1.0))
    {
        return Err(Error::NonUniformGrid);
    }
    let slopes: Vec<f64> = points.windows(2).map(|w| (w[1].1 - w[0].1) / h).collect();
    // jumps[i] sits at node i, for 1 <= i <= n - 2
    let mut jumps = vec![f64::NAN; n];
    for i in 1..n - 1 {
        jumps[i] = (slopes[i] - slopes[i - 1]).abs();
    }

    let mut out = Vec::new();
    for i in 2..n - 2 {
        let j = jumps[i];
        if !j.is_finite() {
            continue;
        }
        if !(j >= jumps[i - 1] || jumps[i - 1].is_nan()) || !(j > jumps[i + 1] || jumps[i + 1].is_nan())
        {
            continue;
        }
        let lo = i.saturating_sub(opts.window).max(1);
        let hi = (i + opts.window).min(n - 2);
        let mut level: Vec<f64> = (lo..=hi)
            .filter(|&k| k.abs_diff(i) > 1)
            .map(|k| jumps[k])
            .filter(|v| v.is_finite())
            .collect();
        let noise = median(&mut level).unwrap_or(0.0).max(opts.floor);
        if j > opts.kappa * noise {
            out.push((i, slopes[i - 1], slopes[i], noise));
        }
    }
    Ok(out)
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

pub fn detect_sudden_change(table: &SweepTable, measure: Measure) -> Result<Vec<SuddenChangeReport>> {
    detect_sudden_change_with(table, measure, &SuddenChangeOptions::default())
}

/// Runs [`find_kinks`] on the series of `measure` for every `c` in the table.
pub fn detect_sudden_change_with(
    table: &SweepTable,
    measure: Measure,
    opts: &SuddenChangeOptions,
) -> Result<Vec<SuddenChangeReport>> {
    let mut out = Vec::new();
    for c in table.c_values() {
        let mut series = table.series(measure, c)?;
        series.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (i, left, right, noise) in find_kinks(&series, opts)? {
            out.push(SuddenChangeReport {
                measure: measure.name().to_string(),
                c,
                p_star: series[i].0,
                left_slope: left,
                right_slope: right,
                noise,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::uniform_grid;

    fn series(n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        uniform_grid(n).into_iter().map(|p| (p, f(p))).collect()
    }

    #[test]
    fn smooth_series_have_no_kinks() {
        let opts = SuddenChangeOptions::default();
        assert!(find_kinks(&series(101, |_| 0.0), &opts).unwrap().is_empty());
        assert!(find_kinks(&series(101, |p| 0.3 + 1.7 * p), &opts).unwrap().is_empty());
        assert!(find_kinks(&series(101, |p| (3.0 * p).sin() + p * p), &opts).unwrap().is_empty());
        assert!(find_kinks(&series(41, |p| (-4.0 * p).exp()), &opts).unwrap().is_empty());
    }

    #[test]
    fn finds_a_corner_on_and_between_nodes() {
        let opts = SuddenChangeOptions::default();
        let k = find_kinks(&series(101, |p| (p - 0.5).abs()), &opts).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].0, 50);
        assert!((k[0].1 + 1.0).abs() < 1e-9 && (k[0].2 - 1.0).abs() < 1e-9);

        let k = find_kinks(&series(101, |p| (p * p).min(0.3 - 0.2 * p)), &opts).unwrap();
        assert_eq!(k.len(), 1);
        let p_star = k[0].0 as f64 / 100.0;
        assert!((p_star - 0.4568).abs() < 0.011);
    }

    #[test]
    fn edge_kinks_are_not_interior() {
        let opts = SuddenChangeOptions::default();
        let k = find_kinks(&series(101, |p| (p - 0.005).abs()), &opts).unwrap();
        assert!(k.is_empty());
    }

    #[test]
    fn rejects_bad_grids() {
        let opts = SuddenChangeOptions::default();
        assert!(matches!(
            find_kinks(&series(10, |p| p), &opts),
            Err(Error::GridTooCoarse { points: 10, min: 11 })
        ));
        let mut s = series(20, |p| p);
        s.swap(3, 4);
        assert!(matches!(find_kinks(&s, &opts), Err(Error::NonUniformGrid)));
        let mut s = series(20, |p| p);
        s[7].0 += 0.01;
        assert!(matches!(find_kinks(&s, &opts), Err(Error::NonUniformGrid)));
    }
}
