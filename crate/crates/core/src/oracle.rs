//! Ground truth for error measurement.
//!
//! * [`ReferenceMap`]: domains `ψ(|w| < R)` for a polynomial `ψ` with
//!   `ψ(0) = ζ`, `ψ'(0) = 1`, so `φ = ψ^{-1}` is known up to Newton's method
//!   and `R` is the conformal radius. The disk is the case `ψ(w) = ζ + w`.
//! * [`SelfReference`]: for domains without a closed-form map, the
//!   high-degree `p = 2` Szegő solution stands in for `(φ')^{1/2}`.
//! * [`EquilibriumOracle`]: Leja points approximating the equilibrium
//!   measure of the closed domain, with a capacity estimate and moments.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{horner_with_derivative, ArcSpec, DomainSpec};
use crate::ortho::SzegoState;
use crate::polyops::{moments, Poly};
use crate::quad::{build_grid_at, primitive_on_grid, QuadratureGrid, Resolution};
use crate::C64;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_STEPS: usize = 60;
/// Residual above which an inversion is reported as failed.
const NEWTON_ACCEPT: f64 = 1e-11;
const CRITICAL_POINT_MARGIN: f64 = 1e-9;
const RADIAL_STEPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Disk,
    Polyimage,
}

/// Exact conformal map data for a polynomial-image domain.
#[derive(Clone, Debug)]
pub struct ReferenceMap {
    kind: ReferenceKind,
    /// `ψ(w) = Σ psi[k] w^k` with `psi[0] = ζ`, `psi[1] = 1`.
    psi: Vec<C64>,
    dpsi: Vec<C64>,
    radius: f64,
    domain: DomainSpec,
}

impl ReferenceMap {
    /// The disk `|z - ζ| < R`, with `φ(z) = z - ζ`.
    pub fn disk(zeta: C64, radius: f64) -> Result<Self> {
        let domain = crate::geom::disk("disk", zeta, radius, zeta)?;
        Ok(ReferenceMap {
            kind: ReferenceKind::Disk,
            psi: vec![zeta, C64::new(1.0, 0.0)],
            dpsi: vec![C64::new(1.0, 0.0)],
            radius,
            domain,
        })
    }

    /// `ψ(|w| < radius)` for `ψ(w) = Σ coeffs[k] w^k`. The coefficients are
    /// renormalized so that `ψ'(0) = 1`; `ζ = ψ(0)`.
    pub fn polyimage(name: &str, coeffs: &[C64], radius: f64) -> Result<Self> {
        if coeffs.len() < 2 || coeffs[1].norm() == 0.0 {
            return Err(Error::Reference("ψ'(0) must be nonzero".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Reference(format!("radius {radius}")));
        }
        // ψ̂(v) = ψ(v / a_1) on |v| < |a_1| R.
        let a1 = coeffs[1];
        let psi: Vec<C64> = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c / a1.powi(k as i32))
            .collect();
        let radius = radius * a1.norm();
        let dpsi: Vec<C64> = psi[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| c * (k + 1) as f64)
            .collect();
        if dpsi.len() > 1 {
            let zs = Poly::new(C64::new(0.0, 0.0), dpsi.clone()).roots(1e-14)?;
            if !zs.all_converged() {
                return Err(Error::Reference("roots of ψ' did not converge".into()));
            }
            if let Some(r) = zs
                .roots
                .iter()
                .find(|r| r.norm() <= radius * (1.0 + CRITICAL_POINT_MARGIN))
            {
                return Err(Error::Reference(format!(
                    "ψ' vanishes at {r}, inside the closed disk of radius {radius}"
                )));
            }
        }
        let domain = crate::geom::polyimage(name, &psi, radius, psi[0])
            .map_err(|e| Error::Reference(format!("boundary is not admissible: {e}")))?;
        Ok(ReferenceMap {
            kind: ReferenceKind::Polyimage,
            psi,
            dpsi,
            radius,
            domain,
        })
    }

    /// The reference map of a disk (with `ζ` at the center) or polynomial
    /// image domain (with `ζ = ψ(0)`), or `None` for other domains.
    pub fn for_domain(domain: &DomainSpec) -> Option<Result<Self>> {
        let [arc] = domain.arcs() else {
            return None;
        };
        let full = |sweep: f64| (sweep - 2.0 * PI).abs() < 1e-14;
        match arc {
            ArcSpec::CircularArc {
                center,
                radius,
                sweep,
                ..
            } if full(*sweep) => {
                if (center - domain.zeta()).norm() > 1e-14 {
                    return Some(Err(Error::Reference(
                        "disk reference needs zeta at the center".into(),
                    )));
                }
                Some(ReferenceMap::disk(*center, *radius))
            }
            ArcSpec::PolyImageArc {
                coeffs,
                radius,
                sweep,
                ..
            } if full(*sweep) => {
                if (coeffs[0] - domain.zeta()).norm() > 1e-14 {
                    return Some(Err(Error::Reference(
                        "polyimage reference needs zeta = ψ(0)".into(),
                    )));
                }
                Some(ReferenceMap::polyimage(domain.name(), coeffs, *radius))
            }
            _ => None,
        }
    }

    pub fn kind(&self) -> ReferenceKind {
        self.kind
    }

    /// Conformal radius `R`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn zeta(&self) -> C64 {
        self.psi[0]
    }

    pub fn psi_coeffs(&self) -> &[C64] {
        &self.psi
    }

    /// The domain `ψ(|w| < R)`, sharing `ζ`.
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn psi(&self, w: C64) -> C64 {
        horner_with_derivative(&self.psi, w).0
    }

    pub fn psi_prime(&self, w: C64) -> C64 {
        self.dpsi
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * w + c)
    }

    /// `φ(z)`, solving `ψ(w) = z`.
    pub fn phi(&self, z: C64) -> Result<C64> {
        if self.kind == ReferenceKind::Disk {
            return Ok(z - self.zeta());
        }
        if let Some(w) = self.newton(z, z - self.zeta()) {
            if w.norm() <= self.radius * (1.0 + 1e-6) {
                return Ok(w);
            }
        }
        // Continuation along the segment from ζ, where φ(ζ) = 0.
        for steps in [16usize, 64, 256] {
            let mut w = C64::new(0.0, 0.0);
            let mut ok = true;
            for k in 1..=steps {
                let zk = self.zeta() + (z - self.zeta()) * (k as f64 / steps as f64);
                match self.newton(zk, w) {
                    Some(next) => w = next,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(w);
            }
        }
        let w = z - self.zeta();
        Err(Error::Newton {
            re: z.re,
            im: z.im,
            residual: (self.psi(w) - z).norm(),
        })
    }

    fn newton(&self, z: C64, w0: C64) -> Option<C64> {
        let mut w = w0;
        for _ in 0..NEWTON_MAX_STEPS {
            let (f, df) = horner_with_derivative(&self.psi, w);
            let res = f - z;
            if res.norm() <= NEWTON_TOL {
                return Some(w);
            }
            let step = res / df;
            if !(step.re.is_finite() && step.im.is_finite()) {
                return None;
            }
            w -= step;
        }
        let res = (self.psi(w) - z).norm();
        (res <= NEWTON_ACCEPT).then_some(w)
    }

    /// `φ'(z) = 1 / ψ'(φ(z))`.
    pub fn phi_prime(&self, z: C64) -> Result<C64> {
        let w = self.phi(z)?;
        let d = self.psi_prime(w);
        if d.norm() == 0.0 {
            return Err(Error::Reference(format!("ψ' vanishes at φ({z})")));
        }
        Ok(1.0 / d)
    }

    /// `(φ')^{1/p}` at consecutive boundary nodes on one continuous branch
    /// with `(φ')^{1/p}(ζ) = 1`.
    pub fn phi_prime_power(&self, nodes: &[C64], p: f64) -> Result<Vec<C64>> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponent p = {p}")));
        }
        if nodes.is_empty() {
            return Ok(Vec::new());
        }
        let ws = nodes.iter().map(|z| self.phi(*z)).collect::<Result<Vec<_>>>()?;
        // log φ' = -log ψ'(w), continued radially from w = 0, then along the nodes.
        let mut log = C64::new(0.0, 0.0);
        let mut prev = C64::new(1.0, 0.0);
        for k in 1..=RADIAL_STEPS {
            let d = 1.0 / self.psi_prime(ws[0] * (k as f64 / RADIAL_STEPS as f64));
            log += (d / prev).ln();
            prev = d;
        }
        let mut logs = Vec::with_capacity(ws.len());
        for (i, w) in ws.iter().enumerate() {
            let d = 1.0 / self.psi_prime(*w);
            if d.norm() == 0.0 || !d.re.is_finite() {
                return Err(Error::Reference("φ' is zero or infinite at a node".into()));
            }
            if i > 0 {
                log += (d / prev).ln();
            }
            prev = d;
            logs.push(log);
        }
        Ok(logs.iter().map(|l| (l / p).exp()).collect())
    }
}

/// The high-degree `p = 2` Szegő solution as a stand-in for the unknown map.
#[derive(Clone, Debug)]
pub struct SelfReference {
    state: SzegoState,
    grid: QuadratureGrid,
    n_ref: usize,
    r_hat: f64,
}

/// Builds the degree-`n_ref` self-reference on the oracle-resolution grid.
pub fn corner_reference(domain: &DomainSpec, n_ref: usize) -> Result<SelfReference> {
    let grid = build_grid_at(domain, Resolution::oracle(domain))?;
    let state = SzegoState::build(&grid, domain.zeta(), n_ref)?;
    let r_hat = state.conformal_radius_estimate(n_ref)?;
    Ok(SelfReference {
        state,
        grid,
        n_ref,
        r_hat,
    })
}

impl SelfReference {
    /// `R̂ = R_{N_ref}`.
    pub fn r_hat(&self) -> f64 {
        self.r_hat
    }

    pub fn n_ref(&self) -> usize {
        self.n_ref
    }

    pub fn state(&self) -> &SzegoState {
        &self.state
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// `R_n` from the same basis, for `n ≤ N_ref`.
    pub fn radius_at(&self, n: usize) -> Result<f64> {
        self.state.conformal_radius_estimate(n)
    }

    /// `φ' ≈ Q_{N_ref,2}²` at the oracle grid nodes.
    pub fn phi_prime_values(&self) -> Result<Vec<C64>> {
        Ok(self
            .state
            .szego_q_values(self.n_ref)?
            .iter()
            .map(|q| q * q)
            .collect())
    }

    /// `Q_{N_ref,2}` at arbitrary points.
    pub fn q_at(&self, zs: &[C64]) -> Result<Vec<C64>> {
        self.state.szego_q_at(self.n_ref, zs)
    }

    /// `(φ')^{1/p} ≈ Q^{2/p}` at consecutive boundary nodes, continued from
    /// `Q(ζ) = 1` radially and then along the nodes.
    pub fn phi_prime_power(&self, nodes: &[C64], p: f64) -> Result<Vec<C64>> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponent p = {p}")));
        }
        let q = self.q_at(nodes)?;
        if p == 2.0 {
            return Ok(q);
        }
        if p == 1.0 {
            return Ok(q.iter().map(|v| v * v).collect());
        }
        let Some(first) = nodes.first() else {
            return Ok(Vec::new());
        };
        let zeta = self.state.basis().zeta();
        let ray: Vec<C64> = (1..=RADIAL_STEPS)
            .map(|k| zeta + (first - zeta) * (k as f64 / RADIAL_STEPS as f64))
            .collect();
        let q_ray = self.q_at(&ray)?;
        let mut log = C64::new(0.0, 0.0);
        let mut prev = C64::new(1.0, 0.0);
        for v in &q_ray {
            log += (v / prev).ln();
            prev = *v;
        }
        let mut out = Vec::with_capacity(q.len());
        for (i, v) in q.iter().enumerate() {
            if v.norm() == 0.0 {
                return Err(Error::Reference("reference vanishes at a node".into()));
            }
            if i > 0 {
                log += (v / prev).ln();
            }
            prev = *v;
            out.push((log * (2.0 / p)).exp());
        }
        Ok(out)
    }

    /// `φ ≈ ∫_ζ^z Q²` at the nodes of `grid`.
    pub fn phi_on_grid(&self, grid: &QuadratureGrid) -> Result<Vec<C64>> {
        let zeta = self.state.basis().zeta();
        primitive_on_grid(grid, zeta, |zs| {
            Ok(self.q_at(zs)?.iter().map(|q| q * q).collect())
        })
    }
}

/// Leja points of a boundary sample and the derived equilibrium statistics.
#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumOracle {
    pub leja_points: Vec<C64>,
    /// `exp(2/(m(m-1)) Σ_{i<j} log|z_i - z_j|)`.
    pub transfinite_diameter: f64,
    /// `transfinite_diameter · m^{-1/(m-1)}`, the finite-`m` corrected
    /// capacity estimate (exact on the circle for equispaced points).
    pub capacity_estimate: f64,
    pub center: C64,
    pub scale: f64,
    /// `m_k` of the uniform measure on the Leja points, `k = 1..=k_max`.
    pub moment_table: Vec<C64>,
}

/// [`leja_points_equilibrium`] on the nodes of a grid, with the arclength
/// centroid as the moment center and the largest node distance from it as
/// the scale.
pub fn leja_equilibrium(grid: &QuadratureGrid, m: usize, k_max: usize) -> Result<EquilibriumOracle> {
    let len = grid.length();
    let center: C64 = grid
        .points()
        .iter()
        .zip(grid.arclength_weights())
        .map(|(z, w)| z * *w)
        .sum::<C64>()
        / len;
    let scale = grid
        .points()
        .iter()
        .map(|z| (z - center).norm())
        .fold(0.0, f64::max);
    leja_points_equilibrium(grid.points(), m, k_max, center, scale)
}

/// Greedy Leja selection from candidate points. Candidates are processed
/// in sorted order so the result does not depend on their labeling.
pub fn leja_points_equilibrium(
    candidates: &[C64],
    m: usize,
    k_max: usize,
    center: C64,
    scale: f64,
) -> Result<EquilibriumOracle> {
    if m < 8 {
        return Err(Error::InvalidParameter(format!("need m >= 8 Leja points, got {m}")));
    }
    if m > candidates.len() {
        return Err(Error::InvalidParameter(format!(
            "m = {m} exceeds the {} candidate points",
            candidates.len()
        )));
    }
    let mut pts = candidates.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let centroid = pts.iter().sum::<C64>() / pts.len() as f64;
    let first = argmax(pts.iter().map(|z| (z - centroid).norm()))
        .expect("non-empty");
    let mut chosen = vec![pts[first]];
    let mut logsum: Vec<f64> = pts.iter().map(|z| (z - pts[first]).norm().ln()).collect();
    while chosen.len() < m {
        let next = argmax(logsum.iter().copied()).expect("non-empty");
        if logsum[next] == f64::NEG_INFINITY {
            return Err(Error::Reference(
                "duplicate Leja point: candidate set too coarse".into(),
            ));
        }
        let z = pts[next];
        chosen.push(z);
        for (s, p) in logsum.iter_mut().zip(&pts) {
            *s += (p - z).norm().ln();
        }
    }
    let mut pair_sum = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            pair_sum += (chosen[i] - chosen[j]).norm().ln();
        }
    }
    let mf = m as f64;
    let transfinite_diameter = (2.0 * pair_sum / (mf * (mf - 1.0))).exp();
    let capacity_estimate = transfinite_diameter * mf.powf(-1.0 / (mf - 1.0));
    let moment_table = moments(&chosen, k_max, center, scale)?;
    Ok(EquilibriumOracle {
        leja_points: chosen,
        transfinite_diameter,
        capacity_estimate,
        center,
        scale,
        moment_table,
    })
}

/// Index of the first maximum; NaN never wins.
fn argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ if v.is_nan() => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::builtin;
    use crate::quad::{build_grid, gauss_legendre};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn reference_grid(d: &DomainSpec) -> QuadratureGrid {
        build_grid_at(d, Resolution::reference(d)).unwrap()
    }

    fn quadratic() -> ReferenceMap {
        ReferenceMap::polyimage("q", &[c(0.0, 0.0), c(1.0, 0.0), c(0.2, 0.0)], 1.0).unwrap()
    }

    #[test]
    fn disk_reference() {
        let m = ReferenceMap::disk(c(0.3, 0.1), 2.0).unwrap();
        assert_eq!(m.radius(), 2.0);
        let z = c(1.0, -0.5);
        assert_eq!(m.phi(z).unwrap(), z - c(0.3, 0.1));
        assert_eq!(m.phi_prime(z).unwrap(), c(1.0, 0.0));
        let g = reference_grid(m.domain());
        for v in m.phi_prime_power(g.points(), 3.0).unwrap() {
            assert!((v - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn newton_round_trip() {
        let m = quadratic();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut zs: Vec<C64> = m.domain().sample(250);
        while zs.len() < 500 {
            let w = C64::from_polar(rng.random_range(0.0..0.999), rng.random_range(0.0..6.3));
            zs.push(m.psi(w));
        }
        for z in zs {
            let w = m.phi(z).unwrap();
            assert!((m.psi(w) - z).norm() <= 1e-11);
            assert!(w.norm() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn normalization_at_zeta() {
        let refs = [
            ReferenceMap::disk(c(0.0, 0.0), 1.0).unwrap(),
            quadratic(),
            ReferenceMap::for_domain(&builtin::ellipse()).unwrap().unwrap(),
            ReferenceMap::for_domain(&builtin::cubic()).unwrap().unwrap(),
        ];
        for m in refs {
            let z = m.zeta();
            assert!(m.phi(z).unwrap().norm() < 1e-15);
            let h = 1e-5;
            let d = (m.phi(z + h).unwrap() - m.phi(z - h).unwrap()) / (2.0 * h);
            assert!((d - 1.0).norm() < 1e-7);
        }
    }

    #[test]
    fn rejects_critical_points_in_disk() {
        // ψ'(w) = 1 + w vanishes at w = -1.
        let r = ReferenceMap::polyimage("bad", &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)], 1.0);
        assert!(matches!(r, Err(Error::Reference(_))));
        assert!(ReferenceMap::for_domain(&builtin::unit_square()).is_none());
    }

    #[test]
    fn renormalizes_derivative_at_zero() {
        let m = ReferenceMap::polyimage("scaled", &[c(0.0, 0.0), c(2.0, 0.0), c(0.4, 0.0)], 0.5)
            .unwrap();
        assert!((m.radius() - 1.0).abs() < 1e-15);
        assert!((m.psi_coeffs()[1] - 1.0).norm() < 1e-15);
        assert!((m.psi_coeffs()[2] - 0.1).norm() < 1e-15);
    }

    #[test]
    fn julia_norm_identity_on_references() {
        for m in [quadratic(), ReferenceMap::for_domain(&builtin::cubic()).unwrap().unwrap()] {
            let g = reference_grid(m.domain());
            for p in [1.0, 2.0, 3.0] {
                let v = m.phi_prime_power(g.points(), p).unwrap();
                let norm = g.p_norm(&v, p).unwrap();
                let expect = (2.0 * PI * m.radius()).powf(1.0 / p);
                assert!((norm - expect).abs() <= 1e-6 * expect);
            }
        }
    }

    #[test]
    fn branch_is_continuous_and_matches_factored_log() {
        let m = ReferenceMap::for_domain(&builtin::cubic()).unwrap().unwrap();
        let g = reference_grid(m.domain());
        let v = m.phi_prime_power(g.points(), 3.0).unwrap();
        for pair in v.windows(2) {
            assert!((pair[1] / pair[0]).arg().abs() < PI / 2.0);
        }
        // Independent branch: ψ' = Π (1 - w/b_j) with |b_j| > 1, and the
        // principal log of each factor is continuous on the closed disk.
        let roots = Poly::new(c(0.0, 0.0), m.dpsi.clone()).roots(1e-15).unwrap().roots;
        for (z, val) in g.points().iter().zip(&v) {
            let w = m.phi(*z).unwrap();
            let log_dpsi: C64 = roots.iter().map(|b| (1.0 - w / b).ln()).sum();
            let expect = (-log_dpsi / 3.0).exp();
            assert!((val - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn leja_circle_capacity_and_moments() {
        let d = builtin::unit_disk();
        let g = reference_grid(&d);
        let o = leja_equilibrium(&g, 64, 3).unwrap();
        assert!((o.capacity_estimate - 1.0).abs() < 0.02);
        assert!(o.moment_table[0].norm() < 0.05 && o.moment_table[1].norm() < 0.05);
        // the uncorrected diameter at m = 64 is 64^{1/63}
        assert!((o.transfinite_diameter - 64f64.powf(1.0 / 63.0)).abs() < 0.01);
    }

    #[test]
    fn leja_segment_capacity() {
        let (x, _) = gauss_legendre(64);
        let mut pts = Vec::new();
        for k in 0..32 {
            let (a, b) = (-2.0 + 4.0 * k as f64 / 32.0, -2.0 + 4.0 * (k + 1) as f64 / 32.0);
            pts.extend(x.iter().map(|xi| c(a + (b - a) * (xi + 1.0) / 2.0, 0.0)));
        }
        let o = leja_points_equilibrium(&pts, 64, 2, c(0.0, 0.0), 2.0).unwrap();
        assert!((o.capacity_estimate - 1.0).abs() < 0.05, "{}", o.capacity_estimate);
    }

    #[test]
    fn leja_scale_covariance_and_relabeling() {
        let sq = builtin::unit_square();
        let g = reference_grid(&sq);
        let o1 = leja_equilibrium(&g, 64, 4).unwrap();
        let big = sq.scaled(2.0).unwrap();
        let o2 = leja_equilibrium(&reference_grid(&big), 64, 4).unwrap();
        assert!((o2.capacity_estimate / o1.capacity_estimate - 2.0).abs() < 0.02);

        let mut shuffled = g.points().to_vec();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(4));
        let o3 = leja_points_equilibrium(&shuffled, 64, 4, o1.center, o1.scale).unwrap();
        assert_eq!(o3.moment_table, o1.moment_table);
        assert_eq!(o3.capacity_estimate, o1.capacity_estimate);
    }

    #[test]
    fn leja_rejects_bad_sizes() {
        let g = build_grid(&builtin::unit_disk(), 2, 4, 1.0).unwrap();
        assert!(leja_equilibrium(&g, 5, 2).is_err());
        assert!(leja_equilibrium(&g, 8, 2).is_ok());
        assert!(leja_equilibrium(&g, 9, 2).is_err());
    }

    #[test]
    fn self_reference_examples() {
        let d = builtin::unit_disk();
        let r = corner_reference(&d, 32).unwrap();
        assert!((r.r_hat() - 1.0).abs() < 1e-9);
        assert!(r.phi_prime_values().unwrap().iter().all(|v| (v - 1.0).norm() < 1e-9));

        let e = builtin::ellipse();
        let r = corner_reference(&e, 128).unwrap();
        let m = ReferenceMap::for_domain(&e).unwrap().unwrap();
        assert!((r.r_hat() - m.radius()).abs() < 1e-6);

        // φ from the self-reference agrees with Newton inversion.
        let g = reference_grid(&e);
        let phi = r.phi_on_grid(&g).unwrap();
        for (z, f) in g.points().iter().zip(&phi) {
            assert!((m.phi(*z).unwrap() - f).norm() < 1e-9);
        }
        let v3 = r.phi_prime_power(g.points(), 3.0).unwrap();
        let exact = m.phi_prime_power(g.points(), 3.0).unwrap();
        for (a, b) in v3.iter().zip(&exact) {
            assert!((a - b).norm() < 1e-8);
        }
    }
}
