//! Contour-orthonormal polynomials by Arnoldi iteration.
//!
//! Each new basis vector is `(z - ζ)·q_k` on the grid nodes, orthogonalized
//! twice against all previous vectors in `⟨f, g⟩ = Σ w_i f_i conj(g_i)` with
//! arclength weights. The Hessenberg coefficients of that recurrence evaluate
//! the basis stably at arbitrary points, and the shifted-basis monomial
//! coefficients are carried through the same recurrence.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polyops::Poly;
use crate::quad::QuadratureGrid;
use crate::C64;

pub const GRAM_THRESHOLD: f64 = 1e-8;
/// A new vector with norm below this multiple of `max|z - ζ|` signals rank
/// deficiency of the grid.
const BREAKDOWN_RELATIVE: f64 = 1e-13;

/// Weighted inner product `Σ w_i f_i conj(g_i)`.
pub fn inner(weights: &[f64], f: &[C64], g: &[C64]) -> C64 {
    f.iter()
        .zip(g)
        .zip(weights)
        .map(|((a, b), w)| a * b.conj() * *w)
        .sum()
}

/// Orthonormal Krylov basis `q_0..q_n` of multiplication by `z - ζ`.
#[derive(Clone, Debug)]
pub struct Arnoldi {
    zeta: C64,
    /// `values[k][i] = q_k(z_i)`.
    values: Vec<Vec<C64>>,
    /// `coeffs[k]`: shifted-basis coefficients of `q_k`.
    coeffs: Vec<Vec<C64>>,
    /// `hess[k][j] = H[j][k]` for `j = 0..=k+1`.
    hess: Vec<Vec<C64>>,
    gram_residual: f64,
}

impl Arnoldi {
    /// Runs `steps` Arnoldi steps from the normalized start polynomial.
    pub fn build(
        grid: &QuadratureGrid,
        zeta: C64,
        start: &Poly,
        steps: usize,
    ) -> Result<Self> {
        let w = grid.arclength_weights();
        let pts = grid.points();
        let shift: Vec<C64> = pts.iter().map(|z| z - zeta).collect();
        let scale = shift.iter().map(|s| s.norm()).fold(0.0, f64::max);

        let v0: Vec<C64> = pts.iter().map(|z| start.eval(*z)).collect();
        let nu = inner(w, &v0, &v0).re.sqrt();
        if !(nu > 0.0) {
            return Err(Error::Breakdown { degree: 0, norm: nu });
        }
        let mut values = vec![v0.iter().map(|v| v / nu).collect::<Vec<_>>()];
        let mut coeffs = vec![start.coeffs.iter().map(|c| c / nu).collect::<Vec<_>>()];
        let mut hess = Vec::with_capacity(steps);

        for k in 0..steps {
            let mut v: Vec<C64> = values[k].iter().zip(&shift).map(|(q, s)| q * s).collect();
            let mut c = Vec::with_capacity(coeffs[k].len() + 1);
            c.push(C64::new(0.0, 0.0));
            c.extend_from_slice(&coeffs[k]);
            let mut h = vec![C64::new(0.0, 0.0); k + 2];
            for _pass in 0..2 {
                for j in 0..=k {
                    let hj = inner(w, &v, &values[j]);
                    for (vi, qi) in v.iter_mut().zip(&values[j]) {
                        *vi -= hj * qi;
                    }
                    for (ci, cj) in c.iter_mut().zip(&coeffs[j]) {
                        *ci -= hj * cj;
                    }
                    h[j] += hj;
                }
            }
            let beta = inner(w, &v, &v).re.sqrt();
            if !(beta > BREAKDOWN_RELATIVE * scale) {
                return Err(Error::Breakdown {
                    degree: k + 1,
                    norm: beta,
                });
            }
            h[k + 1] = C64::new(beta, 0.0);
            values.push(v.iter().map(|x| x / beta).collect());
            coeffs.push(c.iter().map(|x| x / beta).collect());
            hess.push(h);
        }

        let mut basis = Arnoldi {
            zeta,
            values,
            coeffs,
            hess,
            gram_residual: 0.0,
        };
        basis.gram_residual = basis.measure_gram_residual(w);
        Ok(basis)
    }

    fn measure_gram_residual(&self, w: &[f64]) -> f64 {
        let n = self.values.len();
        (0..n)
            .into_par_iter()
            .map(|j| {
                (j..n)
                    .map(|k| {
                        let g = inner(w, &self.values[j], &self.values[k]);
                        let delta = if j == k { 1.0 } else { 0.0 };
                        (g - delta).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Number of basis vectors.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    pub fn values(&self, k: usize) -> &[C64] {
        &self.values[k]
    }

    pub fn coeffs(&self, k: usize) -> &[C64] {
        &self.coeffs[k]
    }

    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    /// `q_0(z)..q_{count-1}(z)` by the Hessenberg recurrence.
    pub fn eval_at(&self, z: C64, count: usize) -> Vec<C64> {
        let count = count.min(self.len());
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        let start = Poly::new(self.zeta, self.coeffs[0].clone());
        out.push(start.eval(z));
        let s = z - self.zeta;
        for k in 0..count - 1 {
            let h = &self.hess[k];
            let mut v = s * out[k];
            for (j, q) in out.iter().enumerate() {
                v -= h[j] * q;
            }
            out.push(v / h[k + 1]);
        }
        out
    }

    /// `Σ_k a_k q_k(z)` at each point, for `a.len() <= len()`.
    pub fn combine_at(&self, a: &[C64], zs: &[C64]) -> Vec<C64> {
        zs.par_iter()
            .map(|z| {
                self.eval_at(*z, a.len())
                    .iter()
                    .zip(a)
                    .map(|(q, ak)| q * ak)
                    .sum()
            })
            .collect()
    }

    /// `Σ_k a_k q_k` as a polynomial of degree `len() - 1 + start degree`.
    pub fn combine_coeffs(&self, a: &[C64]) -> Vec<C64> {
        let len = a
            .iter()
            .enumerate()
            .map(|(k, _)| self.coeffs[k].len())
            .max()
            .unwrap_or(1);
        let mut out = vec![C64::new(0.0, 0.0); len];
        for (k, ak) in a.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(&self.coeffs[k]) {
                *o += ak * c;
            }
        }
        out
    }
}

/// Contour orthonormal polynomials `p_0..p_n` with `p_0 = l^{-1/2}`.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    arnoldi: Arnoldi,
    n: usize,
}

/// Builds `p_0..p_n`; requires `n + 1 ≤ nodes / 4` and fails if the Gram
/// residual exceeds `1e-8`.
pub fn build_orthobasis(grid: &QuadratureGrid, zeta: C64, n: usize) -> Result<OrthoBasis> {
    if 4 * (n + 1) > grid.len() {
        return Err(Error::InvalidParameter(format!(
            "degree {n} needs at least {} quadrature nodes, grid has {}",
            4 * (n + 1),
            grid.len()
        )));
    }
    let start = Poly::constant(zeta, C64::new(1.0, 0.0));
    let arnoldi = Arnoldi::build(grid, zeta, &start, n)?;
    if arnoldi.gram_residual > GRAM_THRESHOLD {
        return Err(Error::GramResidual {
            n,
            residual: arnoldi.gram_residual,
            threshold: GRAM_THRESHOLD,
        });
    }
    Ok(OrthoBasis { arnoldi, n })
}

impl OrthoBasis {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn zeta(&self) -> C64 {
        self.arnoldi.zeta
    }

    pub fn gram_residual(&self) -> f64 {
        self.arnoldi.gram_residual
    }

    /// `p_k(z_i)` at the grid nodes.
    pub fn values(&self, k: usize) -> &[C64] {
        self.arnoldi.values(k)
    }

    /// `p_k` in the shifted monomial basis.
    pub fn poly(&self, k: usize) -> Poly {
        Poly::new(self.zeta(), self.arnoldi.coeffs(k).to_vec())
    }

    /// `p_0(z)..p_n(z)` at an arbitrary point.
    pub fn eval_at(&self, z: C64) -> Vec<C64> {
        self.arnoldi.eval_at(z, self.n + 1)
    }

    pub fn arnoldi(&self) -> &Arnoldi {
        &self.arnoldi
    }
}

/// Szegő kernel data at `ζ`: `p_k(ζ)` and the cumulative kernel masses
/// `Σ_{k≤m} |p_k(ζ)|²`.
#[derive(Clone, Debug)]
pub struct SzegoState {
    basis: OrthoBasis,
    pk_at_zeta: Vec<C64>,
    kernel_mass: Vec<f64>,
}

impl SzegoState {
    pub fn new(basis: OrthoBasis) -> Result<Self> {
        // p_k(ζ) is the constant shifted-basis coefficient.
        let pk_at_zeta: Vec<C64> = (0..=basis.n).map(|k| basis.arnoldi.coeffs(k)[0]).collect();
        let mut mass = 0.0;
        let kernel_mass: Vec<f64> = pk_at_zeta
            .iter()
            .map(|p| {
                mass += p.norm_sqr();
                mass
            })
            .collect();
        if !(kernel_mass[0] > 0.0) {
            return Err(Error::LinearSolve("Szegő kernel mass is zero".into()));
        }
        Ok(SzegoState {
            basis,
            pk_at_zeta,
            kernel_mass,
        })
    }

    pub fn build(grid: &QuadratureGrid, zeta: C64, n: usize) -> Result<Self> {
        SzegoState::new(build_orthobasis(grid, zeta, n)?)
    }

    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.n
    }

    pub fn pk_at_zeta(&self) -> &[C64] {
        &self.pk_at_zeta
    }

    /// `Σ_{k≤n} |p_k(ζ)|²`.
    pub fn kernel_mass(&self, n: usize) -> Result<f64> {
        self.check_degree(n)?;
        Ok(self.kernel_mass[n])
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.basis.n {
            return Err(Error::InvalidParameter(format!(
                "degree {n} exceeds basis degree {}",
                self.basis.n
            )));
        }
        Ok(())
    }

    /// Expansion coefficients `conj(p_k(ζ)) / mass` of `Q_{n,2}`.
    fn q_expansion(&self, n: usize) -> Result<Vec<C64>> {
        let mass = self.kernel_mass(n)?;
        Ok(self.pk_at_zeta[..=n].iter().map(|p| p.conj() / mass).collect())
    }

    /// `Q_{n,2} = K_n(·, ζ) / K_n(ζ, ζ)`.
    pub fn szego_q(&self, n: usize) -> Result<Poly> {
        let a = self.q_expansion(n)?;
        let mut coeffs = self.basis.arnoldi.combine_coeffs(&a);
        coeffs.truncate(n + 1);
        coeffs.resize(n + 1, C64::new(0.0, 0.0));
        Ok(Poly::new(self.basis.zeta(), coeffs))
    }

    /// `Q_{n,2}` at the grid nodes.
    pub fn szego_q_values(&self, n: usize) -> Result<Vec<C64>> {
        let a = self.q_expansion(n)?;
        let len = self.basis.values(0).len();
        let mut out = vec![C64::new(0.0, 0.0); len];
        for (k, ak) in a.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(self.basis.values(k)) {
                *o += ak * v;
            }
        }
        Ok(out)
    }

    /// `Q_{n,2}` at arbitrary points via the Hessenberg recurrence.
    pub fn szego_q_at(&self, n: usize, zs: &[C64]) -> Result<Vec<C64>> {
        let a = self.q_expansion(n)?;
        Ok(self.basis.arnoldi.combine_at(&a, zs))
    }

    /// `K_n(z, ζ) = Σ_{k≤n} conj(p_k(ζ)) p_k(z)`.
    pub fn szego_kernel_partial(&self, z: C64, n: usize) -> Result<C64> {
        self.check_degree(n)?;
        Ok(self
            .basis
            .arnoldi
            .eval_at(z, n + 1)
            .iter()
            .zip(&self.pk_at_zeta)
            .map(|(p, pz)| pz.conj() * p)
            .sum())
    }

    /// `R_n = ‖Q_{n,2}‖₂² / 2π = 1 / (2π Σ_{k≤n} |p_k(ζ)|²)`.
    pub fn conformal_radius_estimate(&self, n: usize) -> Result<f64> {
        Ok(1.0 / (2.0 * std::f64::consts::PI * self.kernel_mass(n)?))
    }
}

/// `J(z) = ∫_ζ^z q(t)^p dt`.
pub fn j_map(q: &Poly, p: u32) -> Result<Poly> {
    Ok(q.power(p)?.antiderivative_from())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{builtin, disk};
    use crate::quad::{build_grid, build_grid_at, Resolution};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn reference_state(d: &crate::geom::DomainSpec, n: usize) -> (QuadratureGrid, SzegoState) {
        let g = build_grid_at(d, Resolution::reference(d)).unwrap();
        let s = SzegoState::build(&g, d.zeta(), n).unwrap();
        (g, s)
    }

    #[test]
    fn circle_basis_is_scaled_monomials() {
        let d = builtin::unit_disk();
        let (_, s) = reference_state(&d, 12);
        let b = s.basis();
        let p0 = b.values(0)[0];
        assert!((p0 - c(1.0 / (2.0 * PI).sqrt(), 0.0)).norm() < 1e-14);
        for k in 0..=12 {
            let coeffs = b.poly(k).coeffs;
            assert!((coeffs[k].norm() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
            for (j, cj) in coeffs.iter().enumerate() {
                if j != k {
                    assert!(cj.norm() < 1e-12, "p_{k} has coefficient {j}: {cj}");
                }
            }
            let at_zero = s.pk_at_zeta()[k].norm();
            let expect = if k == 0 { 1.0 / (2.0 * PI).sqrt() } else { 0.0 };
            assert!((at_zero - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_identity_on_finer_grid() {
        for d in builtin::all() {
            let (_, s) = reference_state(&d, 30);
            let fine = build_grid_at(&d, Resolution::oracle(&d)).unwrap();
            let vals: Vec<Vec<C64>> = (0..=30)
                .map(|k| {
                    fine.points()
                        .iter()
                        .map(|z| s.basis().eval_at(*z)[k])
                        .collect()
                })
                .collect();
            let mut worst: f64 = 0.0;
            for j in 0..=30 {
                for k in 0..=30 {
                    let g = inner(fine.arclength_weights(), &vals[j], &vals[k]);
                    let delta = if j == k { 1.0 } else { 0.0 };
                    worst = worst.max((g - delta).norm());
                }
            }
            assert!(worst < 1e-7, "{}: {worst:e}", d.name());
        }
    }

    #[test]
    fn gram_residual_contract_up_to_degree_100() {
        for d in builtin::all() {
            let g = build_grid_at(&d, Resolution::reference(&d)).unwrap();
            let b = build_orthobasis(&g, d.zeta(), 100).unwrap();
            assert!(b.gram_residual() <= GRAM_THRESHOLD, "{}", d.name());
            assert!(b.values(100).iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        }
    }

    #[test]
    fn oversampling_and_breakdown_are_reported() {
        let d = builtin::unit_disk();
        let g = build_grid(&d, 2, 8, 1.0).unwrap();
        assert!(matches!(
            build_orthobasis(&g, d.zeta(), 4),
            Err(Error::InvalidParameter(_))
        ));
        // 16 nodes on the circle cannot carry z^16 independently of 1.
        let start = Poly::constant(d.zeta(), c(1.0, 0.0));
        assert!(matches!(
            Arnoldi::build(&g, d.zeta(), &start, 16),
            Err(Error::Breakdown { .. })
        ));
    }

    #[test]
    fn szego_q_examples() {
        let d = builtin::unit_disk();
        let (_, s) = reference_state(&d, 10);
        for n in 0..=10 {
            let q = s.szego_q(n).unwrap();
            assert!((q.coeffs[0] - 1.0).norm() < 1e-10);
            assert!(q.coeffs[1..].iter().all(|x| x.norm() < 1e-10));
        }
        for d in builtin::all() {
            let (_, s) = reference_state(&d, 20);
            let q = s.szego_q(20).unwrap();
            assert!((q.eval(d.zeta()) - 1.0).norm() < 1e-10, "{}", d.name());
        }
    }

    #[test]
    fn ellipse_norm_sandwich() {
        let d = builtin::ellipse();
        let (g, s) = reference_state(&d, 16);
        let vals = s.szego_q_values(16).unwrap();
        let norm2 = g.p_norm_pow(&vals, 2.0).unwrap();
        // conformal radius of ψ(w) = w + 0.25w² on the unit disk is 1
        assert!(norm2 >= 2.0 * PI * (1.0 - 1e-9));
        assert!(norm2 <= g.length());
    }

    #[test]
    fn kernel_examples() {
        let d = builtin::unit_square();
        let (g, s) = reference_state(&d, 12);
        let kvals: Vec<C64> = g
            .points()
            .iter()
            .map(|z| s.szego_kernel_partial(*z, 12).unwrap())
            .collect();
        for j in 0..=12 {
            let r = inner(g.arclength_weights(), s.basis().values(j), &kvals);
            assert!((r - s.pk_at_zeta()[j]).norm() < 1e-8);
        }
        let kz = s.szego_kernel_partial(d.zeta(), 12).unwrap();
        assert!((kz.re - s.kernel_mass(12).unwrap()).abs() < 1e-12 && kz.im.abs() < 1e-12);

        let disk_d = builtin::unit_disk();
        let (_, ds) = reference_state(&disk_d, 6);
        for n in 0..=6 {
            let k = ds.szego_kernel_partial(c(0.3, -0.2), n).unwrap();
            assert!((k - 1.0 / (2.0 * PI)).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_reproduces_low_degree_polynomials() {
        let d = builtin::l_shape();
        let (g, s) = reference_state(&d, 10);
        let f = Poly::new(d.zeta(), vec![c(0.5, 1.0), c(-2.0, 0.3), c(0.0, 0.7), c(1.0, 1.0)]);
        let fv = f.eval_many(g.points());
        let kv: Vec<C64> = g
            .points()
            .iter()
            .map(|z| s.szego_kernel_partial(*z, 10).unwrap())
            .collect();
        let r = inner(g.arclength_weights(), &fv, &kv);
        let fnorm = g.p_norm(&fv, 2.0).unwrap();
        assert!((r - f.eval(d.zeta())).norm() <= 1e-7 * fnorm);
    }

    #[test]
    fn radius_estimate_examples_and_monotonicity() {
        let (_, s) = reference_state(&builtin::unit_disk(), 8);
        for n in 0..=8 {
            assert!((s.conformal_radius_estimate(n).unwrap() - 1.0).abs() < 1e-9);
        }
        let big = disk("d2", c(0.5, 0.5), 2.0, c(0.5, 0.5)).unwrap();
        let (_, s2) = reference_state(&big, 8);
        assert!((s2.conformal_radius_estimate(8).unwrap() - 2.0).abs() < 1e-9);

        for d in builtin::all() {
            let (g, s) = reference_state(&d, 40);
            let mut prev_r = f64::INFINITY;
            let mut prev_mass = 0.0;
            for n in 0..=40 {
                let r = s.conformal_radius_estimate(n).unwrap();
                let mass = s.kernel_mass(n).unwrap();
                assert!(r <= prev_r + 1e-10 && mass >= prev_mass);
                let qn = s.szego_q_values(n).unwrap();
                let norm2 = g.p_norm_pow(&qn, 2.0).unwrap();
                assert!((norm2 / (2.0 * PI) - r).abs() <= 1e-10 * r);
                prev_r = r;
                prev_mass = mass;
            }
        }
    }

    #[test]
    fn hessenberg_evaluation_matches_coefficients() {
        let d = builtin::ellipse();
        let (_, s) = reference_state(&d, 20);
        let q = s.szego_q(20).unwrap();
        let zs = [c(0.1, 0.2), c(-0.4, 0.3), c(0.9, -0.1)];
        let rec = s.szego_q_at(20, &zs).unwrap();
        for (z, r) in zs.iter().zip(&rec) {
            assert!((q.eval(*z) - r).norm() < 1e-10);
        }
    }

    #[test]
    fn j_map_examples() {
        let zeta = c(0.1, 0.0);
        let one = Poly::constant(zeta, c(1.0, 0.0));
        for p in 1..=4 {
            let j = j_map(&one, p).unwrap();
            assert_eq!(j.coeffs, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        }
        let q = Poly::new(zeta, vec![c(1.0, 0.0), c(0.2, -0.1), c(0.05, 0.0)]);
        let j = j_map(&q, 3).unwrap();
        assert_eq!(j.degree(), 7);
        for (a, b) in j.derivative().coeffs.iter().zip(&q.power(3).unwrap().coeffs) {
            assert!((a - b).norm() <= 1e-15 * b.norm());
        }
    }
}
