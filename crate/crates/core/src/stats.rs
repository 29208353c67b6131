//! Small regression helpers used by the scaling experiments.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares fit of `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit { slope, intercept, r_squared }
}

/// Slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).slope
}

/// Least squares fit of `log y = a·log n + b·log log n + c`; returns `(a, b)`.
///
/// Separates polynomial growth in `n` from logarithmic factors.
pub fn power_log_fit(n: &[f64], y: &[f64]) -> (f64, f64) {
    let rows: Vec<[f64; 3]> = n.iter().map(|v| [v.ln(), v.ln().ln(), 1.0]).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for (r, &t) in rows.iter().zip(&ly) {
        for i in 0..3 {
            atb[i] += r[i] * t;
            for j in 0..3 {
                ata[(i, j)] += r[i] * r[j];
            }
        }
    }
    let sol = ata.lu().solve(&atb).unwrap_or_else(nalgebra::Vector3::zeros);
    (sol[0], sol[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let f = linear_fit(&x, &y);
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.intercept + 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_log_separation() {
        let n: Vec<f64> = (3..=12).map(|j| 2f64.powi(j)).collect();
        let y: Vec<f64> = n.iter().map(|v| 5.0 * v.powf(0.3) * v.ln().powf(1.5)).collect();
        let (a, b) = power_log_fit(&n, &y);
        assert!((a - 0.3).abs() < 1e-8);
        assert!((b - 1.5).abs() < 1e-8);
    }
}
