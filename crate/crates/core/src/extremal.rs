//! Constrained `L^p` extremal problems on the quadrature grid.
//!
//! Both problems minimize `‖t - P‖_p` over polynomials `P` of degree `n` with
//! `P(ζ) = 1`: `t = 0` gives the minimal-norm polynomial `Q_{n,p}`, and
//! `t = (φ')^{1/p}` gives the best approximation `Q̃_{n,p}`. Feasible
//! polynomials are written `P = 1 + Σ c_k e_k` where `e_1..e_n` is an
//! orthonormal basis of the polynomials vanishing at `ζ`, so the constraint
//! holds by construction.
//!
//! For `p = 2` the problem is one orthogonal projection. Otherwise it is
//! solved by iteratively reweighted least squares with an exact line search
//! along each reweighted step, so the objective never increases.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ortho::{inner, Arnoldi};
use crate::polyops::Poly;
use crate::quad::{pow_abs, QuadratureGrid};
use crate::C64;

const MAX_ITERATIONS: usize = 200;
const STALL_RELATIVE: f64 = 1e-10;
const EPS_RELATIVE: f64 = 1e-10;
const EPS_REDUCTIONS: usize = 2;
const FEASIBILITY_TOL: f64 = 1e-10;
const LINE_SEARCH_ITERATIONS: usize = 60;

/// Orthonormal basis `e_1..e_n` of `span{(z - ζ)^k : k ≥ 1}` on a grid.
#[derive(Clone, Debug)]
pub struct ConstrainedBasis {
    arnoldi: Option<Arnoldi>,
    n: usize,
}

impl ConstrainedBasis {
    pub fn build(grid: &QuadratureGrid, zeta: C64, n: usize) -> Result<Self> {
        if n == 0 {
            return Ok(ConstrainedBasis { arnoldi: None, n });
        }
        if 4 * (n + 1) > grid.len() {
            return Err(Error::InvalidParameter(format!(
                "degree {n} needs at least {} quadrature nodes, grid has {}",
                4 * (n + 1),
                grid.len()
            )));
        }
        let start = Poly::new(zeta, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let arnoldi = Arnoldi::build(grid, zeta, &start, n - 1)?;
        if arnoldi.gram_residual() > crate::ortho::GRAM_THRESHOLD {
            return Err(Error::GramResidual {
                n,
                residual: arnoldi.gram_residual(),
                threshold: crate::ortho::GRAM_THRESHOLD,
            });
        }
        Ok(ConstrainedBasis {
            arnoldi: Some(arnoldi),
            n,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `e_k` at the grid nodes, `k = 1..=n`.
    pub fn values(&self, k: usize) -> &[C64] {
        self.arnoldi.as_ref().expect("n >= 1").values(k - 1)
    }

    /// `e_k` in the shifted monomial basis.
    pub fn coeffs(&self, k: usize) -> &[C64] {
        self.arnoldi.as_ref().expect("n >= 1").coeffs(k - 1)
    }

    pub fn gram_residual(&self) -> f64 {
        self.arnoldi.as_ref().map_or(0.0, |a| a.gram_residual())
    }

    /// `1 + Σ_k c_k e_k(z)` at arbitrary points by the Hessenberg
    /// recurrence; stable where the monomial form is not.
    pub fn feasible_at(&self, c: &[C64], zs: &[C64]) -> Vec<C64> {
        match &self.arnoldi {
            None => vec![C64::new(1.0, 0.0); zs.len()],
            Some(a) => a.combine_at(c, zs).into_iter().map(|v| v + 1.0).collect(),
        }
    }

    /// `Σ_k c_k e_k` at the nodes, for `c.len() <= n`.
    fn apply(&self, c: &[C64], len: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); len];
        for (k, ck) in c.iter().enumerate() {
            for (o, e) in out.iter_mut().zip(self.values(k + 1)) {
                *o += ck * e;
            }
        }
        out
    }
}

/// One extremal problem instance.
#[derive(Clone, Debug)]
pub struct ExtremalProblem<'g> {
    pub grid: &'g QuadratureGrid,
    pub zeta: C64,
    pub n: usize,
    pub p: f64,
    /// `None` for the minimal-norm problem, `(φ')^{1/p}` node values for the
    /// best-approximation problem.
    pub target: Option<Vec<C64>>,
    pub basis: ConstrainedBasis,
}

impl<'g> ExtremalProblem<'g> {
    pub fn new(
        grid: &'g QuadratureGrid,
        zeta: C64,
        n: usize,
        p: f64,
        target: Option<Vec<C64>>,
    ) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "the solver needs p >= 1, got {p}"
            )));
        }
        if let Some(t) = &target {
            if t.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    got: t.len(),
                });
            }
        }
        let basis = ConstrainedBasis::build(grid, zeta, n)?;
        Ok(ExtremalProblem {
            grid,
            zeta,
            n,
            p,
            target,
            basis,
        })
    }

    /// `t - 1` at the nodes: the residual of the constant polynomial.
    fn offset(&self) -> Vec<C64> {
        match &self.target {
            None => vec![C64::new(-1.0, 0.0); self.grid.len()],
            Some(t) => t.iter().map(|v| v - 1.0).collect(),
        }
    }

    /// `Σ w_i |r_i|^p`.
    fn objective(&self, r: &[C64]) -> f64 {
        r.iter()
            .zip(self.grid.arclength_weights())
            .map(|(ri, w)| pow_abs(ri.norm(), self.p) * w)
            .sum()
    }

    /// Discrete objective `‖t - q‖_p` for an arbitrary polynomial, evaluated
    /// by Horner at the nodes.
    pub fn objective_of(&self, q: &Poly) -> f64 {
        let r: Vec<C64> = self.residual_of(q);
        self.objective(&r).powf(1.0 / self.p)
    }

    fn residual_of(&self, q: &Poly) -> Vec<C64> {
        let qv = q.eval_many(self.grid.points());
        match &self.target {
            None => qv.iter().map(|v| -v).collect(),
            Some(t) => t.iter().zip(&qv).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn solve(&self) -> Result<ExtremalSolution> {
        let b = self.offset();
        let n = self.n;
        let len = self.grid.len();
        let w = self.grid.arclength_weights();

        // p = 2 projection; also the IRLS starting point.
        let mut c: Vec<C64> = (1..=n)
            .map(|k| inner(w, &b, self.basis.values(k)))
            .collect();
        let mut r: Vec<C64> = {
            let ec = self.basis.apply(&c, len);
            b.iter().zip(&ec).map(|(bi, e)| bi - e).collect()
        };
        let mut f = self.objective(&r);
        let mut history = vec![f];
        let mut iterations = 0;
        let mut stationarity = 0.0;

        if self.p != 2.0 && n > 0 && f > 0.0 {
            let mut eps_scale = EPS_RELATIVE;
            let mut reductions = 0;
            while iterations < MAX_ITERATIONS {
                iterations += 1;
                let mean_r = r.iter().map(|x| x.norm()).sum::<f64>() / len as f64;
                let eps = eps_scale * mean_r;
                let u: Vec<f64> = r
                    .iter()
                    .zip(w)
                    .map(|(ri, wi)| wi * ri.norm().max(eps).powf(self.p - 2.0))
                    .collect();
                let c_ls = self.weighted_least_squares(&u, &b)?;
                let dc: Vec<C64> = c_ls.iter().zip(&c).map(|(a, b)| a - b).collect();
                let edc = self.basis.apply(&dc, len);
                let (theta, f_new) = self.line_search(&r, &edc, f);
                let rel = if f > 0.0 { (f - f_new) / f } else { 0.0 };
                if f_new < f {
                    for (ci, di) in c.iter_mut().zip(&dc) {
                        *ci += theta * di;
                    }
                    for (ri, ei) in r.iter_mut().zip(&edc) {
                        *ri -= theta * ei;
                    }
                    f = f_new;
                    history.push(f);
                }
                stationarity = rel.max(0.0);
                if f == 0.0 {
                    break;
                }
                if rel < STALL_RELATIVE {
                    if reductions < EPS_REDUCTIONS {
                        reductions += 1;
                        eps_scale /= 10.0;
                        continue;
                    }
                    break;
                }
            }
            if history.windows(2).any(|h| h[1] > h[0]) {
                return Err(Error::Irls(format!(
                    "objective increased (n = {n}, p = {})",
                    self.p
                )));
            }
        }

        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[0] = C64::new(1.0, 0.0);
        for (k, ck) in c.iter().enumerate() {
            for (o, e) in coeffs.iter_mut().zip(self.basis.coeffs(k + 1)) {
                *o += ck * e;
            }
        }
        let q = Poly::new(self.zeta, coeffs);
        let feasibility = (q.eval(self.zeta) - 1.0).norm();
        if feasibility > FEASIBILITY_TOL {
            return Err(Error::Irls(format!(
                "constraint violated: |P(ζ) - 1| = {feasibility:e}"
            )));
        }
        let values: Vec<C64> = match &self.target {
            None => r.iter().map(|x| -x).collect(),
            Some(t) => t.iter().zip(&r).map(|(a, b)| a - b).collect(),
        };
        let achieved_norm = f.powf(1.0 / self.p);
        if !achieved_norm.is_finite() {
            return Err(Error::Irls("objective is not finite".into()));
        }
        Ok(ExtremalSolution {
            leading_coeff: q.leading_coeff(),
            basis_coeffs: c,
            q,
            values,
            achieved_norm,
            iterations,
            stationarity,
            objective_history: history,
        })
    }

    /// `argmin_c Σ u_i |b_i - (E c)_i|²` via Cholesky of the normal
    /// equations, falling back to an SVD least-squares solve.
    fn weighted_least_squares(&self, u: &[f64], b: &[C64]) -> Result<Vec<C64>> {
        let n = self.n;
        let len = self.grid.len();
        let e = DMatrix::from_fn(len, n, |i, k| self.basis.values(k + 1)[i]);
        let mut a = DMatrix::<C64>::zeros(n, n);
        let mut rhs = DVector::<C64>::zeros(n);
        for j in 0..n {
            let ej = e.column(j);
            for k in j..n {
                let ek = e.column(k);
                let s: C64 = (0..len).map(|i| ej[i].conj() * ek[i] * u[i]).sum();
                a[(j, k)] = s;
                a[(k, j)] = s.conj();
            }
            rhs[j] = (0..len).map(|i| ej[i].conj() * b[i] * u[i]).sum();
        }
        if let Some(chol) = a.clone().cholesky() {
            let x = chol.solve(&rhs);
            if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Ok(x.iter().copied().collect());
            }
        }
        let mut scaled = e;
        let mut sb = DVector::<C64>::zeros(len);
        for i in 0..len {
            let s = u[i].sqrt();
            for k in 0..n {
                scaled[(i, k)] *= s;
            }
            sb[i] = b[i] * s;
        }
        let x = scaled
            .svd(true, true)
            .solve(&sb, 1e-14)
            .map_err(|e| Error::LinearSolve(e.to_string()))?;
        Ok(x.iter().copied().collect())
    }

    /// Minimizes the convex `θ ↦ F(r - θ d)` over `θ ∈ [0, θ_max]` by golden
    /// section after bracketing; returns `(θ, F)` with `F ≤ f0`.
    fn line_search(&self, r: &[C64], d: &[C64], f0: f64) -> (f64, f64) {
        let eval = |theta: f64| -> f64 {
            r.iter()
                .zip(d)
                .zip(self.grid.arclength_weights())
                .map(|((ri, di), w)| pow_abs((ri - di * theta).norm(), self.p) * w)
                .sum()
        };
        // Bracket: expand while the objective keeps decreasing.
        let mut hi = 1.0;
        let mut f_hi = eval(hi);
        let mut best = if f_hi < f0 { (hi, f_hi) } else { (0.0, f0) };
        while f_hi < f0 && hi < 64.0 {
            let next = 2.0 * hi;
            let f_next = eval(next);
            if f_next >= f_hi {
                hi = next;
                break;
            }
            hi = next;
            f_hi = f_next;
            best = (hi, f_hi);
        }
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, hi);
        let mut x1 = b - golden * (b - a);
        let mut x2 = a + golden * (b - a);
        let mut f1 = eval(x1);
        let mut f2 = eval(x2);
        for _ in 0..LINE_SEARCH_ITERATIONS {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - golden * (b - a);
                f1 = eval(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + golden * (b - a);
                f2 = eval(x2);
            }
            if b - a <= 1e-12 * b.max(1.0) {
                break;
            }
        }
        for (x, fx) in [(x1, f1), (x2, f2)] {
            if fx < best.1 {
                best = (x, fx);
            }
        }
        best
    }
}

/// Solution of an extremal problem.
#[derive(Clone, Debug, Serialize)]
pub struct ExtremalSolution {
    /// The minimizer, with `q(ζ) = 1`.
    pub q: Poly,
    /// `q` at the grid nodes.
    pub values: Vec<C64>,
    /// Discrete objective `‖t - q‖_p`.
    pub achieved_norm: f64,
    pub iterations: usize,
    /// Relative objective decrease in the last iteration.
    pub stationarity: f64,
    /// Shifted-basis (equivalently monomial) leading coefficient of `q`.
    pub leading_coeff: C64,
    /// `Σ w_i |r_i|^p` after the start and every accepted step.
    pub objective_history: Vec<f64>,
    /// Coefficients `c_k` of `q = 1 + Σ c_k e_k` on the constrained basis.
    pub basis_coeffs: Vec<C64>,
}

/// Minimal `‖P‖_p` over degree-`n` polynomials with `P(ζ) = 1`.
pub fn solve_qnp(grid: &QuadratureGrid, zeta: C64, n: usize, p: f64) -> Result<ExtremalSolution> {
    ExtremalProblem::new(grid, zeta, n, p, None)?.solve()
}

/// Minimal `‖target - P‖_p` over degree-`n` polynomials with `P(ζ) = 1`.
pub fn solve_tilde_qnp(
    grid: &QuadratureGrid,
    zeta: C64,
    n: usize,
    p: f64,
    target: &[C64],
) -> Result<ExtremalSolution> {
    ExtremalProblem::new(grid, zeta, n, p, Some(target.to_vec()))?.solve()
}

/// Relative perturbation sizes used by [`optimality_check`].
pub const CHECK_STEPS: [f64; 2] = [1e-4, 1e-6];

/// Smallest relative change `(F(q ± d) - F(q)) / F(q)` of the objective
/// over `trials` random feasible directions `d` (with `d(ζ) = 0`) scaled to
/// `‖d‖_p = s` for each `s` in [`CHECK_STEPS`]. Negative values mean a
/// better feasible point was found; `F(q)` is recomputed from `solution.q`.
pub fn optimality_check(
    problem: &ExtremalProblem<'_>,
    solution: &ExtremalSolution,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("optimality check needs trials >= 1".into()));
    }
    let n = problem.n;
    if n == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r0 = problem.residual_of(&solution.q);
    let f0 = problem.objective(&r0).powf(1.0 / problem.p);
    let denom = f0.max(f64::MIN_POSITIVE);
    let len = problem.grid.len();
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let a: Vec<C64> = (0..n)
            .map(|_| {
                C64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let d = problem.basis.apply(&a, len);
        let dn = problem.objective(&d).powf(1.0 / problem.p);
        for s in CHECK_STEPS {
            for sign in [1.0, -1.0] {
                let k = sign * s / dn;
                let r: Vec<C64> = r0.iter().zip(&d).map(|(ri, di)| ri - di * k).collect();
                let f = problem.objective(&r).powf(1.0 / problem.p);
                worst = worst.min((f - f0) / denom);
            }
        }
    }
    if f0 == 0.0 {
        // Nothing can beat an exact fit.
        return Ok(worst.max(0.0));
    }
    Ok(worst)
}
