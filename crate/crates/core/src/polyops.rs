//! Polynomials in the shifted basis `(z - ζ)^k`.
//!
//! The feasibility constraint `P(ζ) = 1` is `coeffs[0] = 1`, and every
//! antiderivative built here vanishes at `ζ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

pub const DEFAULT_DEGREE_CAP: usize = 4096;
/// Coefficients below this fraction of the largest are trimmed before root
/// finding.
pub const TRIM_RELATIVE: f64 = 1e-14;
const ABERTH_MAX_SWEEPS: usize = 500;

/// `Σ coeffs[k] (z - zeta)^k`. The last stored coefficient is the formal
/// leading coefficient, even if it is tiny.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Poly {
    pub zeta: C64,
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(zeta: C64, coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Poly { zeta, coeffs }
    }

    pub fn constant(zeta: C64, c: C64) -> Self {
        Poly::new(zeta, vec![c])
    }

    /// Formal degree (number of stored coefficients minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading_coeff(&self) -> C64 {
        *self.coeffs.last().expect("non-empty")
    }

    /// Horner evaluation in `z - ζ`.
    pub fn eval(&self, z: C64) -> C64 {
        let w = z - self.zeta;
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * w + c)
    }

    pub fn eval_many(&self, zs: &[C64]) -> Vec<C64> {
        zs.iter().map(|z| self.eval(*z)).collect()
    }

    /// Product by coefficient convolution.
    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(self.zeta, out)
    }

    /// `self^p` with the default degree cap.
    pub fn power(&self, p: u32) -> Result<Poly> {
        self.power_capped(p, DEFAULT_DEGREE_CAP)
    }

    /// `self^p` by repeated squaring; the result has degree `n·p`.
    pub fn power_capped(&self, p: u32, cap: usize) -> Result<Poly> {
        if p == 0 {
            return Err(Error::InvalidParameter("power exponent must be >= 1".into()));
        }
        let degree = self.degree() * p as usize;
        if degree > cap {
            return Err(Error::DegreeCap { degree, cap });
        }
        let mut result: Option<Poly> = None;
        let mut base = self.clone();
        let mut e = p;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        Ok(result.expect("p >= 1"))
    }

    /// `∫_ζ^z P(t) dt`.
    pub fn antiderivative_from(&self) -> Poly {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(C64::new(0.0, 0.0));
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k + 1) as f64),
        );
        Poly::new(self.zeta, out)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::constant(self.zeta, C64::new(0.0, 0.0));
        }
        Poly::new(
            self.zeta,
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c * (k + 1) as f64)
                .collect(),
        )
    }

    /// Coefficients with trailing entries below `rel·max|c_k|` removed.
    pub fn trimmed(&self, rel: f64) -> Poly {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut end = self.coeffs.len();
        while end > 1 && self.coeffs[end - 1].norm() <= rel * scale {
            end -= 1;
        }
        Poly::new(self.zeta, self.coeffs[..end].to_vec())
    }

    /// Zeros by Aberth–Ehrlich iteration after trimming.
    pub fn roots(&self, tol: f64) -> Result<ZeroSet> {
        roots(self, tol)
    }
}

/// Zeros of a polynomial with per-root diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroSet {
    pub roots: Vec<C64>,
    /// `|P(root)|` relative to `Σ |c_k| |root - ζ|^k`.
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    pub sweeps: usize,
}

impl ZeroSet {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Positive root of `|c_n| r^n = Σ_{k<n} |c_k| r^k`: every zero lies in
/// `|w| ≤ r`.
fn cauchy_bound(coeffs: &[C64]) -> f64 {
    let n = coeffs.len() - 1;
    let a: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
    let lead = a[n];
    let h = |r: f64| -> f64 {
        let lower: f64 = (0..n).map(|k| a[k] * r.powi(k as i32)).sum();
        lead * r.powi(n as i32) - lower
    };
    let mut hi = 1.0;
    while h(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Aberth–Ehrlich simultaneous iteration in the shifted variable `w = z - ζ`.
///
/// Stops once the largest update is below `tol` (relative to `max(1, |w|)`)
/// or after 500 sweeps; roots whose last update exceeded `tol` are flagged
/// as not converged.
pub fn roots(poly: &Poly, tol: f64) -> Result<ZeroSet> {
    let p = poly.trimmed(TRIM_RELATIVE);
    let n = p.degree();
    if n == 0 {
        return Err(Error::Roots("polynomial has degree 0 after trimming".into()));
    }
    if p.coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::Roots("non-finite coefficient".into()));
    }
    let coeffs = &p.coeffs;
    let dcoeffs = p.derivative().coeffs;
    let horner = |c: &[C64], w: C64| c.iter().rev().fold(C64::new(0.0, 0.0), |acc, x| acc * w + x);

    let radius = cauchy_bound(coeffs);
    // Offset angle avoids symmetric starting configurations.
    let mut w: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut last_update = vec![f64::INFINITY; n];
    let mut sweeps = 0;
    while sweeps < ABERTH_MAX_SWEEPS {
        sweeps += 1;
        let mut max_update: f64 = 0.0;
        for i in 0..n {
            let pv = horner(coeffs, w[i]);
            if pv == C64::new(0.0, 0.0) {
                last_update[i] = 0.0;
                continue;
            }
            let ratio = pv / horner(&dcoeffs, w[i]);
            let repulsion: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (w[i] - w[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                w[i] -= step;
                last_update[i] = step.norm() / w[i].norm().max(1.0);
            }
            max_update = max_update.max(last_update[i]);
        }
        if max_update < tol {
            break;
        }
    }
    let residuals = w
        .iter()
        .map(|&wi| {
            let scale: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm() * wi.norm().powi(k as i32))
                .sum();
            horner(coeffs, wi).norm() / scale.max(f64::MIN_POSITIVE)
        })
        .collect();
    Ok(ZeroSet {
        roots: w.iter().map(|wi| wi + p.zeta).collect(),
        residuals,
        converged: last_update.iter().map(|u| *u < tol).collect(),
        sweeps,
    })
}

/// `m_k = (1/N) Σ_j ((z_j - center)/scale)^k` for `k = 1..=k_max`.
pub fn moments(points: &[C64], k_max: usize, center: C64, scale: f64) -> Result<Vec<C64>> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("moments of an empty point set".into()));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("moment scale {scale}")));
    }
    let mut acc = vec![C64::new(0.0, 0.0); k_max];
    for z in points {
        let u = (z - center) / scale;
        let mut pw = C64::new(1.0, 0.0);
        for m in acc.iter_mut() {
            pw *= u;
            *m += pw;
        }
    }
    let n = points.len() as f64;
    Ok(acc.into_iter().map(|m| m / n).collect())
}

/// Monic polynomial `Π (z - r_j)` in the basis `(z - zeta)^k`.
pub fn from_roots(zeta: C64, roots: &[C64]) -> Poly {
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    for r in roots {
        let shift = r - zeta;
        let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * shift;
        }
        coeffs = next;
    }
    Poly::new(zeta, coeffs)
}
