//! Composite Gauss–Legendre boundary quadrature, graded toward corners.
//!
//! Every arc is split into `panels_per_arc` panels in its own parameter `t`.
//! Panel breakpoints come from a uniform mesh pushed through an algebraic
//! grading map that clusters them at arc endpoints which are corners. Each
//! panel carries the same Gauss–Legendre rule, so nodes are stored
//! panel-major and node `i` belongs to panel `i / points_per_panel`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::geom::DomainSpec;
use crate::C64;

pub const DEFAULT_GRADING: f64 = 3.0;
const MAX_POINTS_PER_PANEL: usize = 64;

/// Panel layout of a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    pub panels_per_arc: usize,
    pub points_per_panel: usize,
    pub grading: f64,
}

impl Resolution {
    /// Resolution used for all reported quantities: 16 points per panel and
    /// at least 64 panels around the whole boundary (16 per arc minimum).
    pub fn reference(domain: &DomainSpec) -> Self {
        Resolution {
            panels_per_arc: 16usize.max(64 / domain.arc_count()),
            points_per_panel: 16,
            grading: DEFAULT_GRADING,
        }
    }

    /// Finer, independent rule used to check reference-resolution results.
    pub fn oracle(domain: &DomainSpec) -> Self {
        Resolution {
            panels_per_arc: 64usize.max(256 / domain.arc_count()),
            points_per_panel: 24,
            grading: DEFAULT_GRADING,
        }
    }

    pub fn with_panels(self, panels_per_arc: usize) -> Self {
        Resolution {
            panels_per_arc,
            ..self
        }
    }

    pub fn node_count(&self, domain: &DomainSpec) -> usize {
        self.panels_per_arc * self.points_per_panel * domain.arc_count()
    }
}

/// Which boundary measure to integrate against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// `dz = γ'(t) dt`.
    ComplexDz,
    /// `|dz| = |γ'(t)| dt`.
    Arclength,
}

/// Boundary nodes with weights for `∫ f dz` and `∫ f |dz|`.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    nodes: Vec<(usize, f64)>,
    points: Vec<C64>,
    complex_weights: Vec<C64>,
    arclength_weights: Vec<f64>,
    grading: f64,
    panels_per_arc: usize,
    points_per_panel: usize,
    /// `cumulative[i][j]`: `∫_{-1}^{x_i} ℓ_j(x) dx` for the Lagrange basis on
    /// the reference panel.
    cumulative: Vec<Vec<f64>>,
    panel_weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(arc_index, t)` of every node.
    pub fn nodes(&self) -> &[(usize, f64)] {
        &self.nodes
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn complex_weights(&self) -> &[C64] {
        &self.complex_weights
    }

    pub fn arclength_weights(&self) -> &[f64] {
        &self.arclength_weights
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn panels_per_arc(&self) -> usize {
        self.panels_per_arc
    }

    pub fn points_per_panel(&self) -> usize {
        self.points_per_panel
    }

    /// Total boundary length `l`.
    pub fn length(&self) -> f64 {
        self.arclength_weights.iter().sum()
    }

    /// Unit tangent at every node.
    pub fn tangents(&self) -> impl Iterator<Item = C64> + '_ {
        self.complex_weights
            .iter()
            .zip(&self.arclength_weights)
            .map(|(w, a)| w / a)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// `Σ f_i w_i` for the chosen measure.
    pub fn integrate(&self, f_values: &[C64], measure: Measure) -> Result<C64> {
        self.check_len(f_values.len())?;
        Ok(match measure {
            Measure::ComplexDz => f_values
                .iter()
                .zip(&self.complex_weights)
                .map(|(f, w)| f * w)
                .sum(),
            Measure::Arclength => f_values
                .iter()
                .zip(&self.arclength_weights)
                .map(|(f, w)| f * w)
                .sum(),
        })
    }

    /// `(Σ |f_i|^p w_i^{|dz|})^{1/p}`; for `p < 1` this is the quasi-norm.
    pub fn p_norm(&self, f_values: &[C64], p: f64) -> Result<f64> {
        Ok(self.p_norm_pow(f_values, p)?.powf(1.0 / p))
    }

    /// `Σ |f_i|^p w_i^{|dz|}`.
    pub fn p_norm_pow(&self, f_values: &[C64], p: f64) -> Result<f64> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("norm exponent p = {p}")));
        }
        self.check_len(f_values.len())?;
        Ok(f_values
            .iter()
            .zip(&self.arclength_weights)
            .map(|(f, w)| pow_abs(f.norm(), p) * w)
            .sum())
    }

    /// `∫ f dz` along the boundary from the start of arc 0 up to every node.
    ///
    /// Exact within a panel for polynomial `f∘γ · γ'` up to degree
    /// `points_per_panel - 1` in `t`.
    pub fn cumulative_integral(&self, f_values: &[C64]) -> Result<Vec<C64>> {
        self.check_len(f_values.len())?;
        let m = self.points_per_panel;
        let mut out = Vec::with_capacity(self.len());
        let mut offset = C64::new(0.0, 0.0);
        for (panel_f, panel_w) in f_values
            .chunks_exact(m)
            .zip(self.complex_weights.chunks_exact(m))
        {
            // Integrand samples in the reference variable: f·dz/dx = f·w^C/w^GL.
            let g: Vec<C64> = panel_f
                .iter()
                .zip(panel_w)
                .zip(&self.panel_weights)
                .map(|((f, w), gw)| f * w / gw)
                .collect();
            for row in &self.cumulative {
                out.push(offset + row.iter().zip(&g).map(|(s, gj)| gj * s).sum::<C64>());
            }
            offset += panel_f.iter().zip(panel_w).map(|(f, w)| f * w).sum::<C64>();
        }
        Ok(out)
    }
}

const SEGMENT_PANELS: usize = 8;
const SEGMENT_POINTS: usize = 24;

/// `∫_a^b f(z) dz` along the straight segment by composite Gauss–Legendre;
/// `f` is called once with all quadrature points.
pub fn segment_integral<F>(a: C64, b: C64, f: F) -> Result<C64>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let (x, w) = gauss_legendre(SEGMENT_POINTS);
    let h = (b - a) / SEGMENT_PANELS as f64;
    let pts: Vec<C64> = (0..SEGMENT_PANELS)
        .flat_map(|k| {
            let lo = a + h * k as f64;
            x.iter().map(move |xi| lo + h * (0.5 * (xi + 1.0)))
        })
        .collect();
    let vals = f(&pts)?;
    if vals.len() != pts.len() {
        return Err(Error::LengthMismatch {
            expected: pts.len(),
            got: vals.len(),
        });
    }
    let sum: C64 = vals
        .iter()
        .enumerate()
        .map(|(i, v)| v * w[i % SEGMENT_POINTS])
        .sum();
    Ok(sum * h * 0.5)
}

/// `∫_ζ^z f(t) dt` at every node of `grid` for `f` analytic in the domain:
/// a segment integral from `ζ` to the node nearest it, then cumulative
/// integration along the boundary.
pub fn primitive_on_grid<F>(grid: &QuadratureGrid, zeta: C64, f: F) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    let pts = grid.points();
    let anchor = pts
        .iter()
        .enumerate()
        .map(|(i, z)| (i, (z - zeta).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
    let at_anchor = segment_integral(zeta, pts[anchor], &f)?;
    let cum = grid.cumulative_integral(&f(pts)?)?;
    Ok(cum.iter().map(|c| at_anchor + c - cum[anchor]).collect())
}

/// `x^p` with `0^p = 0` and `x^2` computed exactly.
#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x
    } else if x == 0.0 {
        0.0
    } else {
        x.powf(p)
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`, symmetrized.
pub(crate) fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(m).expect("m >= 1"));
    let (mut x, mut w): (Vec<f64>, Vec<f64>) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
    for i in 0..m / 2 + m % 2 {
        let j = m - 1 - i;
        let xs = 0.5 * (x[j] - x[i]);
        let ws = 0.5 * (w[i] + w[j]);
        x[i] = -xs;
        x[j] = xs;
        w[i] = ws;
        w[j] = ws;
    }
    (x, w)
}

/// `S[i][j] = ∫_{-1}^{x_i} ℓ_j(x) dx` via the Legendre expansion of the
/// Lagrange basis, using `∫_{-1}^x P_k = (P_{k+1} - P_{k-1})/(2k+1)`.
fn cumulative_matrix(x: &[f64], w: &[f64]) -> Vec<Vec<f64>> {
    let m = x.len();
    // legendre[k][i] = P_k(x_i) for k = 0..=m
    let legendre = |xs: &[f64], kmax: usize| -> Vec<Vec<f64>> {
        let mut p = vec![vec![1.0; xs.len()], xs.to_vec()];
        for k in 1..kmax {
            let next = xs
                .iter()
                .enumerate()
                .map(|(i, &xi)| {
                    ((2 * k + 1) as f64 * xi * p[k][i] - k as f64 * p[k - 1][i]) / (k + 1) as f64
                })
                .collect();
            p.push(next);
        }
        p
    };
    let p = legendre(x, m);
    let integral = |k: usize, i: usize| -> f64 {
        if k == 0 {
            x[i] + 1.0
        } else {
            (p[k + 1][i] - p[k - 1][i]) / (2 * k + 1) as f64
        }
    };
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..m)
                        .map(|k| (2 * k + 1) as f64 / 2.0 * w[j] * p[k][j] * integral(k, i))
                        .sum::<f64>()
                })
                .collect()
        })
        .collect()
}

/// Grading map on `[0, 1]` clustering points at the corner endpoints.
pub fn grade(s: f64, q: f64, start_corner: bool, end_corner: bool) -> f64 {
    match (start_corner, end_corner) {
        (false, false) => s,
        (true, false) => s.powf(q),
        (false, true) => 1.0 - (1.0 - s).powf(q),
        (true, true) => {
            if s <= 0.5 {
                0.5 * (2.0 * s).powf(q)
            } else {
                1.0 - 0.5 * (2.0 * (1.0 - s)).powf(q)
            }
        }
    }
}

/// Builds the composite rule; grading applies only on arcs that end at a
/// corner.
pub fn build_grid(
    domain: &DomainSpec,
    panels_per_arc: usize,
    points_per_panel: usize,
    grading: f64,
) -> Result<QuadratureGrid> {
    if panels_per_arc == 0 {
        return Err(Error::InvalidParameter("panels_per_arc must be >= 1".into()));
    }
    if !(2..=MAX_POINTS_PER_PANEL).contains(&points_per_panel) {
        return Err(Error::InvalidParameter(format!(
            "points_per_panel = {points_per_panel} outside [2, {MAX_POINTS_PER_PANEL}]"
        )));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::InvalidParameter(format!("grading = {grading} < 1")));
    }
    let (x, w) = gauss_legendre(points_per_panel);
    let total = domain.arc_count() * panels_per_arc * points_per_panel;
    let mut grid = QuadratureGrid {
        nodes: Vec::with_capacity(total),
        points: Vec::with_capacity(total),
        complex_weights: Vec::with_capacity(total),
        arclength_weights: Vec::with_capacity(total),
        grading,
        panels_per_arc,
        points_per_panel,
        cumulative: cumulative_matrix(&x, &w),
        panel_weights: w.clone(),
    };
    for (a, arc) in domain.arcs().iter().enumerate() {
        let sc = domain.endpoint_is_corner(a, false);
        let ec = domain.endpoint_is_corner(a, true);
        let breaks: Vec<f64> = (0..=panels_per_arc)
            .map(|k| grade(k as f64 / panels_per_arc as f64, grading, sc, ec))
            .collect();
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let half = 0.5 * (hi - lo);
            for (xi, wi) in x.iter().zip(&w) {
                let t = lo + half * (xi + 1.0);
                let (z, dz) = arc.eval(t);
                let cw = dz * (wi * half);
                grid.nodes.push((a, t));
                grid.points.push(z);
                grid.complex_weights.push(cw);
                grid.arclength_weights.push(cw.norm());
            }
        }
    }
    if grid.arclength_weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidDomain(
            "boundary derivative vanishes at a quadrature node".into(),
        ));
    }
    Ok(grid)
}

/// [`build_grid`] at a [`Resolution`].
pub fn build_grid_at(domain: &DomainSpec, res: Resolution) -> Result<QuadratureGrid> {
    build_grid(domain, res.panels_per_arc, res.points_per_panel, res.grading)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::builtin;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gauss_legendre_is_symmetric_and_exact() {
        for m in [2, 5, 16, 24] {
            let (x, w) = gauss_legendre(m);
            for i in 0..m {
                assert_eq!(x[i], -x[m - 1 - i]);
            }
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-14);
            // ∫ x^{2m-2} = 2/(2m-1)
            let k = 2 * m - 2;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((q - 2.0 / (k + 1) as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn cumulative_matrix_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s = cumulative_matrix(&x, &w);
        for i in 0..12 {
            // ∫_{-1}^{x} 3t^2 dt = x^3 + 1
            let v: f64 = (0..12).map(|j| s[i][j] * 3.0 * x[j] * x[j]).sum();
            assert!((v - (x[i].powi(3) + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn circle_length_and_closed_contour() {
        let d = builtin::unit_disk();
        let g = build_grid(&d, 8, 16, 3.0).unwrap();
        assert!((g.length() - 2.0 * PI).abs() < 1e-12);
        let closed: C64 = g.complex_weights().iter().sum();
        assert!(closed.norm() < 1e-10);
        for (cw, aw) in g.complex_weights().iter().zip(g.arclength_weights()) {
            assert!((cw.norm() - aw).abs() <= 1e-12 * aw);
        }
    }

    #[test]
    fn square_grading_shrinks_panels_near_corners() {
        let d = builtin::unit_square();
        let panels = 16;
        let g = build_grid(&d, panels, 4, 3.0).unwrap();
        // first panel of arc 0 spans [0, grade(1/16)] = [0, ½(2/16)^3]
        let t_last_in_first_panel = g.nodes()[3].1;
        let expected = grade(1.0 / panels as f64, 3.0, true, true);
        assert!((expected - 0.5 * (2.0 / 16.0f64).powi(3)).abs() < 1e-16);
        assert!(t_last_in_first_panel < expected);
        for k in 1..=4 {
            let s = k as f64 / panels as f64;
            assert!((grade(s, 3.0, true, true) - 0.5 * (2.0 * s).powi(3)).abs() < 1e-15);
        }
        let closed: C64 = g.complex_weights().iter().sum();
        assert!(closed.norm() < 1e-10);
    }

    #[test]
    fn integrate_examples() {
        let disk = builtin::unit_disk();
        let g = build_grid(&disk, 8, 16, 1.0).unwrap();
        assert_eq!(g.len(), 128);
        let f: Vec<C64> = g.points().iter().map(|z| 1.0 / z).collect();
        let v = g.integrate(&f, Measure::ComplexDz).unwrap();
        assert!((v - c(0.0, 2.0 * PI)).norm() < 1e-8);

        for d in builtin::all() {
            let g = build_grid_at(&d, Resolution::reference(&d)).unwrap();
            let f: Vec<C64> = g.points().iter().map(|z| z.powu(3)).collect();
            assert!(g.integrate(&f, Measure::ComplexDz).unwrap().norm() < 1e-8);
        }

        let sq = builtin::unit_square();
        let g = build_grid(&sq, 4, 8, 3.0).unwrap();
        let ones = vec![c(1.0, 0.0); g.len()];
        let per = g.integrate(&ones, Measure::Arclength).unwrap();
        assert!((per.re - 4.0).abs() < 1e-10);
        assert!(g.integrate(&ones[1..], Measure::Arclength).is_err());
    }

    #[test]
    fn p_norm_examples() {
        let g = build_grid(&builtin::unit_disk(), 8, 16, 1.0).unwrap();
        let ones = vec![c(1.0, 0.0); g.len()];
        assert!((g.p_norm(&ones, 2.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-12);
        let twos = vec![c(2.0, 0.0); g.len()];
        assert!((g.p_norm(&twos, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!(g.p_norm(&ones, 0.0).is_err());
        assert!(g.p_norm(&ones, -1.0).is_err());
    }

    #[test]
    fn cauchy_moments_on_every_family() {
        for d in builtin::all() {
            let g = build_grid_at(&d, Resolution::reference(&d)).unwrap();
            let zeta = d.zeta();
            for k in -1i32..=3 {
                let f: Vec<C64> = g.points().iter().map(|z| (z - zeta).powi(k)).collect();
                let v = g.integrate(&f, Measure::ComplexDz).unwrap();
                let expect = if k == -1 { c(0.0, 2.0 * PI) } else { c(0.0, 0.0) };
                assert!((v - expect).norm() < 1e-7, "{} k={k}: {v}", d.name());
            }
        }
    }

    #[test]
    fn panel_doubling_self_convergence() {
        for d in builtin::all() {
            let res = Resolution::reference(&d);
            let g1 = build_grid_at(&d, res).unwrap();
            let g2 = build_grid_at(&d, res.with_panels(2 * res.panels_per_arc)).unwrap();
            let f = |z: &C64| (z * 0.7).exp() + z * z;
            let v1: Vec<C64> = g1.points().iter().map(f).collect();
            let v2: Vec<C64> = g2.points().iter().map(f).collect();
            let (n1, n2) = (g1.p_norm(&v1, 2.0).unwrap(), g2.p_norm(&v2, 2.0).unwrap());
            assert!((n1 - n2).abs() < 1e-10, "{}: {n1} vs {n2}", d.name());
        }
    }

    #[test]
    fn cumulative_integral_recovers_antiderivative() {
        for d in builtin::all() {
            let g = build_grid_at(&d, Resolution::reference(&d)).unwrap();
            let f: Vec<C64> = g.points().iter().map(|z| z * z * 3.0).collect();
            let cum = g.cumulative_integral(&f).unwrap();
            let z0 = d.arcs()[0].start();
            for (z, v) in g.points().iter().zip(&cum) {
                assert!((v - (z.powu(3) - z0.powu(3))).norm() < 1e-11, "{}", d.name());
            }
        }
    }
}
