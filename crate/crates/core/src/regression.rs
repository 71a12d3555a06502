//! Least-squares polynomial fits (degree 1 or 2) and the BOPS vs
//! compute-cost predictive-power comparison.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::Layer;

/// Relative difference under which two leave-one-out errors count as equal.
const VERDICT_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub degree: usize,
    /// Highest degree first.
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    /// `y - p(x)` per input point, in input order.
    pub residuals: Vec<f64>,
    /// Largest `|residual| / |y|` over points with `y != 0`.
    pub max_rel_error: f64,
}

impl FitResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn slope(&self) -> f64 {
        self.coefficients[self.coefficients.len() - 2]
    }

    pub fn intercept(&self) -> f64 {
        self.coefficients[self.coefficients.len() - 1]
    }
}

/// `1 - SS_res / SS_tot`, clamped to `[0, 1]`.
pub fn r_squared(ys: &[f64], residuals: &[f64]) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

/// Ordinary least squares of `y` on a polynomial in `x`.
///
/// `x` is centered and scaled before forming the normal equations, so
/// inputs in the thousands (areas, BOPS) stay well conditioned.
pub fn fit(points: &[(f64, f64)], degree: usize) -> Result<FitResult> {
    if !(1..=2).contains(&degree) {
        return Err(Error::invalid("fit", format!("degree must be 1 or 2, got {degree}")));
    }
    if points.len() < degree + 2 {
        return Err(Error::Degenerate(format!(
            "degree {degree} fit needs at least {} points, got {}",
            degree + 2,
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Degenerate("non-finite sample".into()));
    }
    let distinct_x: BTreeSet<u64> = points.iter().map(|(x, _)| x.to_bits()).collect();
    if distinct_x.len() < degree + 1 {
        return Err(Error::Degenerate(format!("degree {degree} fit needs {} distinct x values", degree + 1)));
    }

    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let scale = (points.iter().map(|p| (p.0 - mean).powi(2)).sum::<f64>() / n).sqrt();
    let t = |x: f64| (x - mean) / scale;

    let dim = degree + 1;
    // normal equations in t, ascending powers
    let mut a = vec![vec![0.0; dim + 1]; dim];
    for &(x, y) in points {
        let tx = t(x);
        let pows: Vec<f64> = (0..dim).map(|j| tx.powi(j as i32)).collect();
        for r in 0..dim {
            for c in 0..dim {
                a[r][c] += pows[r] * pows[c];
            }
            a[r][dim] += pows[r] * y;
        }
    }
    let c = solve(a).ok_or_else(|| Error::Degenerate("singular normal equations".into()))?;

    // expand Σ c_j ((x - mean)/scale)^j back into powers of x
    let coefficients = match degree {
        1 => vec![c[1] / scale, c[0] - c[1] * mean / scale],
        _ => {
            let s2 = scale * scale;
            vec![
                c[2] / s2,
                c[1] / scale - 2.0 * c[2] * mean / s2,
                c[0] - c[1] * mean / scale + c[2] * mean * mean / s2,
            ]
        }
    };

    let eval_t = |x: f64| c.iter().rev().fold(0.0, |acc, cj| acc * t(x) + cj);
    let residuals: Vec<f64> = points.iter().map(|&(x, y)| y - eval_t(x)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let max_rel_error = points
        .iter()
        .zip(&residuals)
        .filter(|((_, y), _)| *y != 0.0)
        .map(|((_, y), r)| (r / y).abs())
        .fold(0.0, f64::max);

    Ok(FitResult { degree, coefficients, r_squared: r_squared(&ys, &residuals), residuals, max_rel_error })
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - tail) / a[row][row];
    }
    Some(x)
}

/// One synthesized design: layer geometry and its measured area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub b_w: u32,
    pub b_a: u32,
    /// µm².
    pub area: f64,
}

impl MetricSample {
    fn layer(&self) -> Layer {
        Layer::new("", self.k, self.n, self.m, (1, 1), self.b_w, self.b_a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Bops,
    ComputeCost,
    Indistinguishable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Bops => "bops",
            Verdict::ComputeCost => "compute-cost",
            Verdict::Indistinguishable => "indistinguishable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparison {
    pub bops_fit: FitResult,
    pub cc_fit: FitResult,
    /// Largest relative error predicting a held-out sample from the others.
    pub bops_max_loo_error: f64,
    pub cc_max_loo_error: f64,
    pub verdict: Verdict,
}

/// Largest leave-one-out relative prediction error of a linear fit.
pub fn max_loo_error(points: &[(f64, f64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..points.len() {
        let rest: Vec<(f64, f64)> =
            points.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| *p).collect();
        let f = fit(&rest, 1)?;
        let (x, y) = points[i];
        if y != 0.0 {
            worst = worst.max(((f.predict(x) - y) / y).abs());
        }
    }
    Ok(worst)
}

/// Fits area against BOPS and against compute cost and reports which
/// metric predicts held-out designs better.
///
/// With a single `(n, m)` both metrics give one prediction line, so the
/// verdict is `Indistinguishable` whatever the errors.
pub fn compare_metrics(samples: &[MetricSample]) -> Result<MetricComparison> {
    if samples.len() < 4 {
        return Err(Error::Degenerate(format!("need at least 4 samples, got {}", samples.len())));
    }
    for s in samples {
        s.layer().validate()?;
    }
    let bops: Vec<(f64, f64)> = samples.iter().map(|s| (s.layer().bops() as f64, s.area)).collect();
    let cc: Vec<(f64, f64)> = samples.iter().map(|s| (s.layer().compute_cost() as f64, s.area)).collect();

    let bops_fit = fit(&bops, 1)?;
    let cc_fit = fit(&cc, 1)?;
    let bops_err = max_loo_error(&bops)?;
    let cc_err = max_loo_error(&cc)?;

    let groups: BTreeSet<(u32, u32)> = samples.iter().map(|s| (s.n, s.m)).collect();
    let verdict = if groups.len() < 2 || (bops_err - cc_err).abs() <= VERDICT_TIE_TOL * bops_err.max(cc_err) {
        Verdict::Indistinguishable
    } else if bops_err < cc_err {
        Verdict::Bops
    } else {
        Verdict::ComputeCost
    };

    Ok(MetricComparison { bops_fit, cc_fit, bops_max_loo_error: bops_err, cc_max_loo_error: cc_err, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hwmodel::CalibrationProfile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig_figs_eq(a: f64, b: f64, figs: i32) -> bool {
        (a - b).abs() <= b.abs() * 10f64.powi(-figs)
    }

    #[test]
    fn recovers_exact_quadratic() {
        let pts: Vec<(f64, f64)> =
            [2.0, 4.0, 6.0, 8.0, 16.0, 32.0].iter().map(|&x| (x, 12.39 * x * x + 86.07 * x - 14.02)).collect();
        let f = fit(&pts, 2).unwrap();
        assert!(sig_figs_eq(f.coefficients[0], 12.39, 6), "{:?}", f.coefficients);
        assert!(sig_figs_eq(f.coefficients[1], 86.07, 6), "{:?}", f.coefficients);
        assert!(sig_figs_eq(f.coefficients[2], -14.02, 6), "{:?}", f.coefficients);
        assert!((f.r_squared - 1.0).abs() < 1e-9);
        assert!(f.max_rel_error < 1e-9);
    }

    #[test]
    fn noisy_line_stays_in_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let x = 100.0 + 125.0 * i as f64;
                (x, (1.694 * x + 153.46) * (1.0 + rng.gen_range(-0.01..0.01)))
            })
            .collect();
        let f = fit(&pts, 1).unwrap();
        assert!((f.slope() / 1.694 - 1.0).abs() < 0.03, "{}", f.slope());
        assert!(f.r_squared > 0.99);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(fit(&[(1.0, 1.0), (2.0, 2.0)], 2), Err(Error::Degenerate(_))));
        assert!(matches!(fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], 1), Err(Error::Degenerate(_))));
        assert!(matches!(fit(&[(1.0, 1.0), (1.0, 2.0), (2.0, 3.0), (2.0, 3.5)], 2), Err(Error::Degenerate(_))));
        assert!(fit(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)], 3).is_err());
    }

    #[test]
    fn residuals_and_r2_are_consistent() {
        let pts = [(1.0, 2.0), (2.0, 2.9), (3.0, 4.2), (4.0, 4.8), (5.0, 6.1)];
        let f = fit(&pts, 1).unwrap();
        for (&(x, y), r) in pts.iter().zip(&f.residuals) {
            assert!((y - f.predict(x) - r).abs() < 1e-12);
        }
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        assert_eq!(f.r_squared, r_squared(&ys, &f.residuals));
    }

    fn grid() -> Vec<MetricSample> {
        let p = CalibrationProfile::tsmc28();
        let mut out = Vec::new();
        for nm in [4, 8, 16] {
            for b in [4, 6, 8] {
                out.push(MetricSample { n: nm, m: nm, k: 3, b_w: b, b_a: b, area: p.accelerator_area(nm, nm, 3, b, b) });
            }
        }
        out
    }

    #[test]
    fn bops_wins_on_bops_generated_grid() {
        let cmp = compare_metrics(&grid()).unwrap();
        assert!(cmp.bops_max_loo_error < 1e-9, "{}", cmp.bops_max_loo_error);
        assert!(cmp.cc_max_loo_error > cmp.bops_max_loo_error);
        assert_eq!(cmp.verdict, Verdict::Bops);
    }

    #[test]
    fn single_group_is_indistinguishable() {
        let samples: Vec<MetricSample> = grid().into_iter().filter(|s| s.n == 8).chain(
            // one more bitwidth so there are four samples
            std::iter::once(MetricSample { n: 8, m: 8, k: 3, b_w: 5, b_a: 5, area: CalibrationProfile::tsmc28().accelerator_area(8, 8, 3, 5, 5) }),
        ).collect();
        assert_eq!(compare_metrics(&samples).unwrap().verdict, Verdict::Indistinguishable);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(compare_metrics(&grid()[..3]), Err(Error::Degenerate(_))));
    }
}
