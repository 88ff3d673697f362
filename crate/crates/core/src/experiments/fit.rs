//! Rate-model fits of `log err` against `n`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Errors at or below this are treated as resolved to the floor.
pub const ERROR_FLOOR: f64 = 1e-13;
/// Exponents tried by the stretched-exponential fit.
pub const STRETCH_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    PowerLaw,
    StretchedExponential,
}

/// `err ≈ C n^{-exponent}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub exponent_stderr: f64,
    /// `log C`.
    pub intercept: f64,
    /// Residual sum of squares of the `log err` fit.
    pub goodness: f64,
    pub points: usize,
}

/// `err ≈ C q^{n^r}` with `r` from [`STRETCH_GRID`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StretchedFit {
    pub q: f64,
    pub r: f64,
    /// `log C`.
    pub intercept: f64,
    pub goodness: f64,
    /// Goodness of the power-law fit on the same rows.
    pub power_law_goodness: f64,
    /// Model with the strictly smaller residual (power law on ties).
    pub preferred: FitModel,
    pub points: usize,
}

struct Line {
    slope: f64,
    intercept: f64,
    rss: f64,
    slope_stderr: f64,
}

fn least_squares_line(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = if x.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Line {
        slope,
        intercept,
        rss,
        slope_stderr,
    }
}

fn usable(points: &[(usize, f64)], min: usize) -> Result<Vec<(f64, f64)>> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > ERROR_FLOOR && e.is_finite())
        .map(|(n, e)| (*n as f64, e.ln()))
        .collect();
    if kept.len() < min {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs {min} errors above {ERROR_FLOOR:e}, got {} of {} \
             (over-resolved sweep)",
            kept.len(),
            points.len()
        )));
    }
    Ok(kept)
}

/// Least-squares fit of `log err` against `log n` over `(n, err)` pairs;
/// needs at least three errors above the floor.
pub fn fit_power_law(points: &[(usize, f64)]) -> Result<PowerLawFit> {
    let kept = usable(points, 3)?;
    let x: Vec<f64> = kept.iter().map(|(n, _)| n.ln()).collect();
    let y: Vec<f64> = kept.iter().map(|(_, e)| *e).collect();
    let line = least_squares_line(&x, &y);
    Ok(PowerLawFit {
        exponent: -line.slope,
        exponent_stderr: line.slope_stderr,
        intercept: line.intercept,
        goodness: line.rss,
        points: kept.len(),
    })
}

/// For each `r` on the grid, a linear fit of `log err` against `n^r`; the
/// best `r` wins. Needs at least four errors above the floor.
pub fn fit_stretched_exp(points: &[(usize, f64)]) -> Result<StretchedFit> {
    let kept = usable(points, 4)?;
    let y: Vec<f64> = kept.iter().map(|(_, e)| *e).collect();
    let mut best: Option<(f64, Line)> = None;
    for r in STRETCH_GRID {
        let x: Vec<f64> = kept.iter().map(|(n, _)| n.powf(r)).collect();
        let line = least_squares_line(&x, &y);
        if best.as_ref().map_or(true, |(_, b)| line.rss < b.rss) {
            best = Some((r, line));
        }
    }
    let (r, line) = best.expect("grid is non-empty");
    let power = fit_power_law(points)?;
    let preferred = if line.rss < power.goodness {
        FitModel::StretchedExponential
    } else {
        FitModel::PowerLaw
    };
    Ok(StretchedFit {
        q: line.slope.exp(),
        r,
        intercept: line.intercept,
        goodness: line.rss,
        power_law_goodness: power.goodness,
        preferred,
        points: kept.len(),
    })
}
