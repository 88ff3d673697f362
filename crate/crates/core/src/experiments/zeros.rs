//! Zero distributions of `Q̃_{n,p}` (and, conjecturally, `Q_{n,p}`) against
//! the Leja equilibrium proxy.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremal::solve_qnp;
use crate::oracle::leja_equilibrium;
use crate::ortho::SzegoState;
use crate::quad::build_grid_at;

use super::report::MIN_ZERO_DEGREE;
use super::{approximate, zero_report, RateConfig, Reference, ZeroReport};

#[derive(Clone, Debug, Serialize)]
pub struct ZeroRow {
    pub n: usize,
    pub tilde: ZeroReport,
    /// Same statistic for the minimal-norm `Q_{n,p}`; only for `p != 2`,
    /// where the two polynomials differ. Labelled conjectural in reports.
    pub conjectural: Option<ZeroReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroSweep {
    pub domain: String,
    pub p: f64,
    pub k_max: usize,
    pub capacity: f64,
    pub transfinite_diameter: f64,
    pub center: [f64; 2],
    pub scale: f64,
    pub moment_table: Vec<[f64; 2]>,
    pub rows: Vec<ZeroRow>,
    /// `(n, gap)` with the smallest `Q̃` gap over the rows.
    pub best: Option<(usize, f64)>,
    /// Smallest conjectural-series gap.
    pub best_conjectural: Option<(usize, f64)>,
}

fn best<'a>(it: impl Iterator<Item = (usize, &'a ZeroReport)>) -> Option<(usize, f64)> {
    it.map(|(n, r)| (n, r.gap)).min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Zero-moment gaps for every `n` in the config with
/// `8 <= n <= zeros_max_degree`.
pub fn run_zero_sweep(config: &RateConfig, reference: &Reference) -> Result<ZeroSweep> {
    config.validate()?;
    let degrees: Vec<usize> = config
        .n_list
        .iter()
        .copied()
        .filter(|n| (MIN_ZERO_DEGREE..=config.zeros_max_degree).contains(n))
        .collect();
    let Some(&max_n) = degrees.last() else {
        return Err(Error::Config(format!(
            "no degree in n_list lies in {MIN_ZERO_DEGREE}..={}",
            config.zeros_max_degree
        )));
    };
    let domain = &config.domain;
    let name = domain.name().to_string();
    let p = config.p;
    let tag = |stage: &'static str, n: usize| {
        let name = name.clone();
        move |e: Error| e.in_sweep(stage, &name, n, p)
    };
    let zeta = domain.zeta();
    let grid = build_grid_at(domain, config.resolution()).map_err(tag("quadrature", 0))?;
    let target = reference
        .phi_prime_power(grid.points(), p)
        .map_err(tag("reference", 0))?;
    let oracle = leja_equilibrium(&grid, config.leja_points, config.k_max).map_err(tag("oracle", 0))?;
    let szego = if p == 2.0 {
        Some(SzegoState::build(&grid, zeta, max_n).map_err(tag("ortho", max_n))?)
    } else {
        None
    };
    let rows: Vec<ZeroRow> = degrees
        .par_iter()
        .map(|&n| -> Result<ZeroRow> {
            let approx = approximate(&grid, zeta, szego.as_ref(), &target, n, p, None)
                .map_err(tag("extremal", n))?;
            let tilde = zero_report(&approx.q, &oracle, config.k_max).map_err(tag("zeros", n))?;
            let conjectural = if p != 2.0 {
                let q = solve_qnp(&grid, zeta, n, p).map_err(tag("extremal", n))?.q;
                Some(zero_report(&q, &oracle, config.k_max).map_err(tag("zeros", n))?)
            } else {
                None
            };
            Ok(ZeroRow {
                n,
                tilde,
                conjectural,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ZeroSweep {
        domain: name,
        p,
        k_max: config.k_max,
        capacity: oracle.capacity_estimate,
        transfinite_diameter: oracle.transfinite_diameter,
        center: [oracle.center.re, oracle.center.im],
        scale: oracle.scale,
        moment_table: oracle.moment_table.iter().map(|m| [m.re, m.im]).collect(),
        best: best(rows.iter().map(|r| (r.n, &r.tilde))),
        best_conjectural: best(rows.iter().filter_map(|r| r.conjectural.as_ref().map(|c| (r.n, c)))),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ReferenceChoice;
    use crate::geom::builtin;

    #[test]
    fn disk_has_no_zero_distribution() {
        let d = builtin::unit_disk();
        let cfg = RateConfig::new(d.clone(), 2.0, vec![8, 16], ReferenceChoice::Oracle);
        let r = Reference::build(&d, cfg.reference).unwrap();
        let err = run_zero_sweep(&cfg, &r).unwrap_err();
        assert_eq!(err.stage(), "zeros");
    }

    #[test]
    fn degrees_outside_the_window_are_rejected() {
        let d = builtin::ellipse();
        let cfg = RateConfig::new(d.clone(), 2.0, vec![2, 4], ReferenceChoice::Oracle);
        let r = Reference::build(&d, cfg.reference).unwrap();
        assert!(matches!(run_zero_sweep(&cfg, &r), Err(Error::Config(_))));
    }
}
