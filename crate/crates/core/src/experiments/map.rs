//! Single-degree map approximant `J̃_{n,p}` sampled on and inside the
//! boundary.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::winding_number;
use crate::ortho::SzegoState;
use crate::quad::build_grid_at;
use crate::C64;

use super::{approximate, integer_p, j_at, j_on_grid, RateConfig, Reference};

/// Interior sample radii as fractions of the way from `ζ` to the boundary.
pub const INTERIOR_RINGS: [f64; 3] = [0.25, 0.5, 0.75];
/// Rays from `ζ` used for interior samples.
pub const INTERIOR_RAYS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapSample {
    pub z: [f64; 2],
    pub j: [f64; 2],
    pub phi: [f64; 2],
}

impl MapSample {
    fn new(z: C64, j: C64, phi: C64) -> Self {
        MapSample {
            z: [z.re, z.im],
            j: [j.re, j.im],
            phi: [phi.re, phi.im],
        }
    }

    pub fn error(&self) -> f64 {
        C64::new(self.j[0] - self.phi[0], self.j[1] - self.phi[1]).norm()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MapReport {
    pub domain: String,
    pub n: usize,
    pub p: f64,
    pub reference: String,
    pub radius: f64,
    /// `Q̃_{n,p}` in powers of `z - ζ`, as `[re, im]` pairs.
    pub q_coeffs: Vec<[f64; 2]>,
    pub achieved_norm: f64,
    pub iterations: usize,
    /// `max |J̃ - φ|` over the boundary samples.
    pub boundary_error: f64,
    /// `max |J̃ - φ|` over the interior samples.
    pub interior_error: f64,
    pub boundary: Vec<MapSample>,
    pub interior: Vec<MapSample>,
}

impl MapReport {
    /// CSV of one sample set: `x,y,j_re,j_im,phi_re,phi_im`.
    pub fn samples_csv(samples: &[MapSample]) -> String {
        let mut out = String::from("x,y,j_re,j_im,phi_re,phi_im\n");
        for s in samples {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                s.z[0], s.z[1], s.j[0], s.j[1], s.phi[0], s.phi[1]
            ));
        }
        out
    }
}

/// `Q̃_{n,p}` and `J̃_{n,p} = ∫_ζ^z Q̃^p` for one integer `p`, compared with
/// `φ` at the solve-grid nodes and at interior points on rays from `ζ`.
pub fn run_map(config: &RateConfig, reference: &Reference, n: usize) -> Result<MapReport> {
    let Some(ip) = integer_p(config.p) else {
        return Err(Error::Config(format!(
            "map needs an integer p, got {}",
            config.p
        )));
    };
    if !(config.p >= 1.0) {
        return Err(Error::Config(format!("p must be >= 1, got {}", config.p)));
    }
    let domain = &config.domain;
    let name = domain.name().to_string();
    let p = config.p;
    let tag = |stage: &'static str| {
        let name = name.clone();
        move |e: Error| e.in_sweep(stage, &name, n, p)
    };
    let zeta = domain.zeta();
    let grid = build_grid_at(domain, config.resolution()).map_err(tag("quadrature"))?;
    let target = reference
        .phi_prime_power(grid.points(), p)
        .map_err(tag("reference"))?;
    let szego = if p == 2.0 {
        Some(SzegoState::build(&grid, zeta, n).map_err(tag("ortho"))?)
    } else {
        None
    };
    let approx = approximate(&grid, zeta, szego.as_ref(), &target, n, p, None)
        .map_err(tag("extremal"))?;

    let j_b = j_on_grid(&grid, zeta, ip, |zs| approx.at(zs)).map_err(tag("map"))?;
    let phi_b = reference.phi_on_grid(&grid).map_err(tag("reference"))?;
    let boundary: Vec<MapSample> = grid
        .points()
        .iter()
        .zip(&j_b)
        .zip(&phi_b)
        .map(|((z, j), f)| MapSample::new(*z, *j, *f))
        .collect();

    let outline = domain.sample(256);
    let stride = (grid.len() / INTERIOR_RAYS).max(1);
    let inner: Vec<C64> = grid
        .points()
        .iter()
        .step_by(stride)
        .flat_map(|b| INTERIOR_RINGS.iter().map(move |s| zeta + (b - zeta) * *s))
        .filter(|z| winding_number(&outline, *z) > 0.5)
        .collect();
    let j_i = j_at(zeta, ip, &inner, |zs| approx.at(zs)).map_err(tag("map"))?;
    let phi_i: Vec<C64> = match reference {
        Reference::Map(m) => inner.par_iter().map(|z| m.phi(*z)).collect::<Result<_>>(),
        Reference::SelfRef(s) => j_at(zeta, 2, &inner, |zs| s.q_at(zs)),
    }
    .map_err(tag("reference"))?;
    let interior: Vec<MapSample> = inner
        .iter()
        .zip(&j_i)
        .zip(&phi_i)
        .map(|((z, j), f)| MapSample::new(*z, *j, *f))
        .collect();

    let max_err = |s: &[MapSample]| s.iter().map(MapSample::error).fold(0.0, f64::max);
    Ok(MapReport {
        domain: name.clone(),
        n,
        p,
        reference: reference.name().into(),
        radius: reference.radius(),
        q_coeffs: approx.q.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        achieved_norm: approx.achieved_norm,
        iterations: approx.iterations,
        boundary_error: max_err(&boundary),
        interior_error: max_err(&interior),
        boundary,
        interior,
    })
}
