//! Degree sweeps: errors against a reference map, the sup-norm bound,
//! leading-coefficient and zero diagnostics, and rate-model fits.

pub mod fit;
pub mod map;
pub mod report;
pub mod zeros;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{optimality_check, ExtremalProblem};
use crate::geom::DomainSpec;
use crate::oracle::{corner_reference, leja_equilibrium, EquilibriumOracle, ReferenceMap, SelfReference};
use crate::ortho::SzegoState;
use crate::polyops::Poly;
use crate::quad::{build_grid, build_grid_at, primitive_on_grid, segment_integral, QuadratureGrid, Resolution};
use crate::C64;

pub use fit::{fit_power_law, fit_stretched_exp, FitModel, PowerLawFit, StretchedFit, ERROR_FLOOR};
pub use map::{run_map, MapReport, MapSample};
pub use report::{leading_coeff_report, rows_to_csv, rows_to_svg, zero_report, LeadReport, ZeroReport, CSV_HEADER};
pub use zeros::{run_zero_sweep, ZeroRow, ZeroSweep};

/// Dense boundary sample for `err_sup` uses this many times the solve
/// grid's panels.
pub const SUP_DENSITY: usize = 4;
/// Absolute slack for sup-bound comparisons; both sides sit at rounding
/// level when the approximation is exact.
pub const SUP_ROUNDOFF: f64 = 1e-12;
/// Tolerance for the nonincreasing-`err_p` invariant.
pub const MONOTONE_TOL: f64 = 1e-9;
pub const DEFAULT_LEJA_POINTS: usize = 128;
pub const DEFAULT_K_MAX: usize = 4;
pub const DEFAULT_ZEROS_MAX_DEGREE: usize = 64;
pub const DEFAULT_CHECK_TRIALS: usize = 8;

/// Source of `φ` and `R` for error measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReferenceChoice {
    /// Closed-form map of a disk or polynomial-image domain.
    Oracle,
    /// Degree-`n_ref` Szegő solution on the oracle-resolution grid.
    #[serde(rename = "self")]
    SelfRef { n_ref: usize },
}

#[derive(Clone, Debug)]
pub struct RateConfig {
    pub domain: DomainSpec,
    pub p: f64,
    pub n_list: Vec<usize>,
    /// `None` selects [`Resolution::reference`].
    pub resolution: Option<Resolution>,
    pub reference: ReferenceChoice,
    pub seed: u64,
    pub leja_points: usize,
    pub k_max: usize,
    /// Compute zero-moment gaps for degrees in `8..=zeros_max_degree`.
    pub zeros: bool,
    pub zeros_max_degree: usize,
    /// Random directions per solver-backed row in the optimality check.
    pub check_trials: usize,
}

impl RateConfig {
    pub fn new(domain: DomainSpec, p: f64, n_list: Vec<usize>, reference: ReferenceChoice) -> Self {
        RateConfig {
            domain,
            p,
            n_list,
            resolution: None,
            reference,
            seed: 0,
            leja_points: DEFAULT_LEJA_POINTS,
            k_max: DEFAULT_K_MAX,
            zeros: false,
            zeros_max_degree: DEFAULT_ZEROS_MAX_DEGREE,
            check_trials: DEFAULT_CHECK_TRIALS,
        }
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution.unwrap_or_else(|| Resolution::reference(&self.domain))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("p must be >= 1, got {}", self.p)));
        }
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list is empty".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_list must be strictly increasing".into()));
        }
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be >= 1".into()));
        }
        let max_n = *self.n_list.last().expect("non-empty");
        if let ReferenceChoice::SelfRef { n_ref } = self.reference {
            if n_ref <= max_n {
                return Err(Error::Config(format!(
                    "self reference degree {n_ref} must exceed the largest sweep degree {max_n}"
                )));
            }
        }
        let nodes = self.resolution().node_count(&self.domain);
        if 4 * (max_n + 1) > nodes {
            return Err(Error::Config(format!(
                "degree {max_n} needs at least {} quadrature nodes, resolution gives {nodes}",
                4 * (max_n + 1)
            )));
        }
        Ok(())
    }
}

/// Reference map used to measure errors.
#[derive(Clone, Debug)]
pub enum Reference {
    Map(ReferenceMap),
    SelfRef(SelfReference),
}

impl Reference {
    pub fn build(domain: &DomainSpec, choice: ReferenceChoice) -> Result<Self> {
        match choice {
            ReferenceChoice::Oracle => match ReferenceMap::for_domain(domain) {
                Some(m) => Ok(Reference::Map(m?)),
                None => Err(Error::Config(format!(
                    "domain {} has no closed-form reference; use the self reference",
                    domain.name()
                ))),
            },
            ReferenceChoice::SelfRef { n_ref } => Ok(Reference::SelfRef(corner_reference(domain, n_ref)?)),
        }
    }

    /// `R`, or `R̂` for the self reference.
    pub fn radius(&self) -> f64 {
        match self {
            Reference::Map(m) => m.radius(),
            Reference::SelfRef(s) => s.r_hat(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Reference::Map(_) => "oracle",
            Reference::SelfRef(_) => "self",
        }
    }

    /// `(φ')^{1/p}` at consecutive boundary nodes.
    pub fn phi_prime_power(&self, nodes: &[C64], p: f64) -> Result<Vec<C64>> {
        match self {
            Reference::Map(m) => m.phi_prime_power(nodes, p),
            Reference::SelfRef(s) => s.phi_prime_power(nodes, p),
        }
    }

    /// `φ` at the nodes of `grid`.
    pub fn phi_on_grid(&self, grid: &QuadratureGrid) -> Result<Vec<C64>> {
        match self {
            Reference::Map(m) => grid.points().par_iter().map(|z| m.phi(*z)).collect(),
            Reference::SelfRef(s) => s.phi_on_grid(grid),
        }
    }
}

/// One degree of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    /// `‖(φ')^{1/p} - Q̃_{n,p}‖_p`.
    pub err_p: f64,
    /// `max |φ - J̃_{n,p}|` on the dense boundary sample, integer `p` only.
    pub err_sup: Option<f64>,
    /// `½ (3 (2πR)^{1/p} + l^{1/p})^{p-1} err_p`.
    pub bound12: Option<f64>,
    /// `|ã_{n,p}|^{1/n} · cap`.
    pub lead_coeff_scaled: Option<f64>,
    pub zero_moment_gap: Option<f64>,
    /// Discrete `‖(φ')^{1/p} - Q̃‖_p` on the solve grid.
    pub achieved_norm: f64,
    pub lead_coeff_abs: f64,
    pub iterations: usize,
    /// Worst relative objective change from [`optimality_check`].
    pub optimality: Option<f64>,
}

/// Rate predicted for the sweep's domain and `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedRate {
    pub description: String,
    /// Power-law exponent, when the prediction is algebraic.
    pub exponent: Option<f64>,
}

/// Predicted decay from the smallest exterior angle `λπ`.
pub fn predicted_rate(min_lambda: Option<f64>, p: f64) -> PredictedRate {
    match min_lambda {
        None => PredictedRate {
            description: "geometric (analytic boundary)".into(),
            exponent: None,
        },
        Some(l) if l >= 2.0 => PredictedRate {
            description: "stretched-exponential C q^(n^r), q, r in (0, 1)".into(),
            exponent: None,
        },
        Some(l) if p == 1.0 => {
            let e = l / (2.0 - l);
            PredictedRate {
                description: format!("n^-{e:.6} log n"),
                exponent: Some(e),
            }
        }
        Some(l) => {
            let e = l / (p * (2.0 - l));
            PredictedRate {
                description: format!("n^-{e:.6}"),
                exponent: Some(e),
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub domain: String,
    pub p: f64,
    pub reference: String,
    pub n_ref: Option<usize>,
    /// `R` or `R̂`.
    pub radius: f64,
    /// Boundary length `l` from the solve grid.
    pub length: f64,
    pub nodes: usize,
    pub sup_nodes: usize,
    pub min_exterior_angle: Option<f64>,
    pub predicted: PredictedRate,
    pub capacity: f64,
    pub transfinite_diameter: f64,
    pub rows: Vec<RateRow>,
    /// Degrees where `err_sup > bound12`.
    pub bound_violations: Vec<usize>,
    /// Degrees where `err_p` rose by more than [`MONOTONE_TOL`].
    pub monotone_violations: Vec<usize>,
    pub power_fit: Option<PowerLawFit>,
    pub stretched_fit: Option<StretchedFit>,
    pub lead: Option<LeadReport>,
    pub annotations: Vec<String>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn to_svg(&self) -> String {
        rows_to_svg(
            &self.rows,
            &format!("{} p = {} ({} reference)", self.domain, self.p, self.reference),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

enum Solved<'g> {
    Szego(&'g SzegoState),
    Irls(Box<ExtremalProblem<'g>>, Vec<C64>),
}

/// `Q̃_{n,p}` for one degree, evaluable off the grid.
pub struct Approximation<'g> {
    solved: Solved<'g>,
    pub n: usize,
    pub p: f64,
    pub q: Poly,
    /// Discrete `‖target - Q̃‖_p` on the solve grid.
    pub achieved_norm: f64,
    pub iterations: usize,
    /// [`optimality_check`] result for solver-backed degrees.
    pub optimality: Option<f64>,
}

impl Approximation<'_> {
    /// `Q̃` at arbitrary points by the orthogonal-basis recurrence.
    pub fn at(&self, zs: &[C64]) -> Result<Vec<C64>> {
        match &self.solved {
            Solved::Szego(s) => s.szego_q_at(self.n, zs),
            Solved::Irls(problem, c) => Ok(problem.basis.feasible_at(c, zs)),
        }
    }
}

/// Solves for `Q̃_{n,p}` against `target` node values. With `p = 2` and a
/// Szegő state (built to degree at least `n`) the closed form is used;
/// otherwise the extremal solver, followed by `check = (trials, seed)`
/// optimality probing when given.
pub fn approximate<'g>(
    grid: &'g QuadratureGrid,
    zeta: C64,
    szego: Option<&'g SzegoState>,
    target: &[C64],
    n: usize,
    p: f64,
    check: Option<(usize, u64)>,
) -> Result<Approximation<'g>> {
    if let (Some(s), true) = (szego, p == 2.0) {
        let values = s.szego_q_values(n)?;
        let resid: Vec<C64> = target.iter().zip(&values).map(|(a, b)| a - b).collect();
        return Ok(Approximation {
            solved: Solved::Szego(s),
            n,
            p,
            q: s.szego_q(n)?,
            achieved_norm: grid.p_norm(&resid, p)?,
            iterations: 0,
            optimality: None,
        });
    }
    let problem = ExtremalProblem::new(grid, zeta, n, p, Some(target.to_vec()))?;
    let sol = problem.solve()?;
    let optimality = match check {
        Some((trials, seed)) => Some(optimality_check(&problem, &sol, trials, seed)?),
        None => None,
    };
    Ok(Approximation {
        n,
        p,
        q: sol.q,
        achieved_norm: sol.achieved_norm,
        iterations: sol.iterations,
        optimality,
        solved: Solved::Irls(Box::new(problem), sol.basis_coeffs),
    })
}

/// `∫_ζ^z Q^p` at the nodes of `grid`, with `Q` evaluated by `q_at`.
pub fn j_on_grid<F>(grid: &QuadratureGrid, zeta: C64, p: u32, q_at: F) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    primitive_on_grid(grid, zeta, |zs| Ok(q_at(zs)?.iter().map(|v| v.powu(p)).collect()))
}

/// `∫_ζ^z Q^p` at arbitrary points along straight segments.
pub fn j_at<F>(zeta: C64, p: u32, zs: &[C64], q_at: F) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    zs.iter()
        .map(|z| segment_integral(zeta, *z, |pts| Ok(q_at(pts)?.iter().map(|v| v.powu(p)).collect())))
        .collect()
}

fn integer_p(p: f64) -> Option<u32> {
    (p.fract() == 0.0 && (1.0..=64.0).contains(&p)).then_some(p as u32)
}

/// Sup-norm bound `½ (3 (2πR)^{1/p} + l^{1/p})^{p-1} err_p`.
pub fn sup_bound(radius: f64, length: f64, p: f64, err_p: f64) -> f64 {
    let tp = std::f64::consts::TAU * radius;
    0.5 * (3.0 * tp.powf(1.0 / p) + length.powf(1.0 / p)).powf(p - 1.0) * err_p
}

/// Builds the reference named by the config and runs the sweep.
pub fn run_rate_sweep(config: &RateConfig) -> Result<SweepReport> {
    config.validate()?;
    let reference = Reference::build(&config.domain, config.reference)?;
    run_rate_sweep_with(config, &reference)
}

/// Runs the sweep against a prebuilt reference.
pub fn run_rate_sweep_with(config: &RateConfig, reference: &Reference) -> Result<SweepReport> {
    config.validate()?;
    let domain = &config.domain;
    let name = domain.name().to_string();
    let p = config.p;
    let zeta = domain.zeta();
    let max_n = *config.n_list.last().expect("validated");
    let res = config.resolution();
    let tag = |stage: &'static str, n: usize| {
        let name = name.clone();
        move |e: Error| e.in_sweep(stage, &name, n, p)
    };

    let grid = build_grid_at(domain, res).map_err(tag("quadrature", 0))?;
    let sup_grid = build_grid(
        domain,
        res.panels_per_arc * SUP_DENSITY,
        res.points_per_panel,
        res.grading,
    )
    .map_err(tag("quadrature", 0))?;
    let target = reference
        .phi_prime_power(grid.points(), p)
        .map_err(tag("reference", 0))?;
    let int_p = integer_p(p);
    let phi_sup = match int_p {
        Some(_) => Some(reference.phi_on_grid(&sup_grid).map_err(tag("reference", 0))?),
        None => None,
    };
    let equilibrium: EquilibriumOracle =
        leja_equilibrium(&grid, config.leja_points, config.k_max).map_err(tag("oracle", 0))?;
    let szego = if p == 2.0 {
        Some(SzegoState::build(&grid, zeta, max_n).map_err(tag("ortho", max_n))?)
    } else {
        None
    };
    let radius = reference.radius();
    let length = grid.length();
    let self_p2 = p == 2.0 && matches!(reference, Reference::SelfRef(_));

    let row = |n: usize| -> Result<RateRow> {
        let approx = approximate(
            &grid,
            zeta,
            szego.as_ref(),
            &target,
            n,
            p,
            Some((config.check_trials, config.seed ^ n as u64)),
        )
        .map_err(tag("extremal", n))?;
        let achieved = approx.achieved_norm;
        let err_p = if self_p2 {
            let s = szego.as_ref().expect("p = 2");
            let norm2 = 1.0 / s.kernel_mass(n).map_err(tag("ortho", n))?;
            (norm2 - std::f64::consts::TAU * radius).max(0.0).sqrt()
        } else {
            achieved
        };
        let (err_sup, bound12) = match (int_p, &phi_sup) {
            (Some(ip), Some(phi)) => {
                let j = j_on_grid(&sup_grid, zeta, ip, |zs| approx.at(zs)).map_err(tag("map", n))?;
                let sup = phi
                    .iter()
                    .zip(&j)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                (Some(sup), Some(sup_bound(radius, length, p, err_p)))
            }
            _ => (None, None),
        };
        let zero_moment_gap = if config.zeros
            && (report::MIN_ZERO_DEGREE..=config.zeros_max_degree).contains(&n)
        {
            Some(zero_report(&approx.q, &equilibrium, config.k_max).map_err(tag("zeros", n))?.gap)
        } else {
            None
        };
        let lead_abs = approx.q.leading_coeff().norm();
        Ok(RateRow {
            n,
            err_p,
            err_sup,
            bound12,
            lead_coeff_scaled: None,
            zero_moment_gap,
            achieved_norm: achieved,
            lead_coeff_abs: lead_abs,
            iterations: approx.iterations,
            optimality: approx.optimality,
        })
    };
    let mut rows: Vec<RateRow> = config.n_list.par_iter().map(|&n| row(n)).collect::<Result<_>>()?;

    let lead = leading_coeff_report(
        &rows.iter().map(|r| (r.n, r.lead_coeff_abs)).collect::<Vec<_>>(),
        equilibrium.capacity_estimate,
    )?;
    for (r, v) in rows.iter_mut().zip(&lead.scaled) {
        r.lead_coeff_scaled = Some(*v);
    }

    let bound_violations = rows
        .iter()
        .filter(|r| matches!((r.err_sup, r.bound12), (Some(s), Some(b)) if s > b + SUP_ROUNDOFF))
        .map(|r| r.n)
        .collect();
    let monotone_violations = rows
        .windows(2)
        .filter(|w| w[1].err_p > w[0].err_p + MONOTONE_TOL)
        .map(|w| w[1].n)
        .collect();

    let mut annotations = Vec::new();
    let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.err_p)).collect();
    let power_fit = match fit_power_law(&points) {
        Ok(f) => Some(f),
        Err(e) => {
            annotations.push(format!("power-law fit skipped: {e}"));
            None
        }
    };
    let stretched_fit = match fit_stretched_exp(&points) {
        Ok(f) => Some(f),
        Err(e) => {
            annotations.push(format!("stretched-exponential fit skipped: {e}"));
            None
        }
    };
    let n_ref = match reference {
        Reference::SelfRef(s) => {
            if s.n_ref() < 4 * max_n {
                annotations.push(format!(
                    "self reference degree {} is below 4 x max n = {}",
                    s.n_ref(),
                    4 * max_n
                ));
            }
            Some(s.n_ref())
        }
        Reference::Map(_) => None,
    };
    if self_p2 {
        annotations.push("err_p from the Pythagorean identity ‖Q_n‖² - 2πR̂".into());
    }
    if !lead.zero_leading.is_empty() {
        annotations.push(format!("zero leading coefficient at n = {:?}", lead.zero_leading));
    }
    if int_p.is_none() {
        annotations.push("err_sup and bound12 need integer p".into());
    }
    let min_lambda = domain.min_exterior_angle();
    Ok(SweepReport {
        domain: name,
        p,
        reference: reference.name().into(),
        n_ref,
        radius,
        length,
        nodes: grid.len(),
        sup_nodes: sup_grid.len(),
        min_exterior_angle: min_lambda,
        predicted: predicted_rate(min_lambda, p),
        capacity: equilibrium.capacity_estimate,
        transfinite_diameter: equilibrium.transfinite_diameter,
        rows,
        bound_violations,
        monotone_violations,
        power_fit,
        stretched_fit,
        lead: Some(lead),
        annotations,
    })
}
