//! Jordan domains with piecewise-analytic boundaries.
//!
//! A [`DomainSpec`] is an ordered, positively oriented chain of arcs, each
//! parametrized on `t ∈ [0, 1]`, together with the corners where arcs meet at
//! a nontrivial angle and an interior normalization point `zeta`. The global
//! boundary parameter is the pair `(arc_index, t)`.
//!
//! Domains are built from a small JSON description (see
//! [`DomainDescription`]) or from the constructors in this module. Exterior
//! angles are supplied analytically by each family, never estimated.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::C64;

const CLOSURE_TOL: f64 = 1e-12;
const VALIDATION_SAMPLES_PER_ARC: usize = 256;

/// One analytic boundary arc, parametrized on `t ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum ArcSpec {
    /// `start + t (end - start)`.
    Line { start: C64, end: C64 },
    /// `center + radius · exp(i (start_angle + t·sweep))`.
    CircularArc {
        center: C64,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    /// `ψ(radius · exp(i (start_angle + t·sweep)))` for the polynomial
    /// `ψ(w) = Σ coeffs[k] w^k`.
    PolyImageArc {
        coeffs: Vec<C64>,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    /// `x + i·amplitude·(x(1-x))^exponent` with `x = x_start + t (x_end - x_start)`.
    ///
    /// Near `x = 0` and `x = 1` the arc has contact of order `exponent` with
    /// the real axis, so two such arcs of opposite sign meet in an outward
    /// pointing cusp.
    PowerCuspArc {
        x_start: f64,
        x_end: f64,
        amplitude: f64,
        exponent: f64,
    },
}

impl ArcSpec {
    /// `(γ(t), γ'(t))`.
    pub fn eval(&self, t: f64) -> (C64, C64) {
        match self {
            ArcSpec::Line { start, end } => (start + (end - start) * t, end - start),
            ArcSpec::CircularArc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let e = C64::from_polar(*radius, start_angle + sweep * t);
                (center + e, C64::i() * sweep * e)
            }
            ArcSpec::PolyImageArc {
                coeffs,
                radius,
                start_angle,
                sweep,
            } => {
                let w = C64::from_polar(*radius, start_angle + sweep * t);
                let (psi, dpsi) = horner_with_derivative(coeffs, w);
                (psi, dpsi * C64::i() * sweep * w)
            }
            ArcSpec::PowerCuspArc {
                x_start,
                x_end,
                amplitude,
                exponent,
            } => {
                let dx = x_end - x_start;
                let x = x_start + dx * t;
                let base = (x * (1.0 - x)).max(0.0);
                let y = amplitude * base.powf(*exponent);
                let dy_dx = amplitude * exponent * base.powf(exponent - 1.0) * (1.0 - 2.0 * x);
                (C64::new(x, y), C64::new(1.0, dy_dx) * dx)
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.eval(0.0).0
    }

    pub fn end(&self) -> C64 {
        self.eval(1.0).0
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ArcSpec::Line { .. } => "line-segment",
            ArcSpec::CircularArc { .. } => "circular-arc",
            ArcSpec::PolyImageArc { .. } => "polynomial-image-arc",
            ArcSpec::PowerCuspArc { .. } => "power-cusp-arc",
        }
    }

    fn check_parameters(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        let ok = match self {
            ArcSpec::Line { start, end } => {
                is_finite(*start) && is_finite(*end) && (end - start).norm() > 0.0
            }
            ArcSpec::CircularArc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                is_finite(*center)
                    && finite(*start_angle)
                    && *radius > 0.0
                    && finite(*radius)
                    && *sweep != 0.0
                    && finite(*sweep)
            }
            ArcSpec::PolyImageArc {
                coeffs,
                radius,
                start_angle,
                sweep,
            } => {
                coeffs.len() >= 2
                    && coeffs.iter().all(|c| is_finite(*c))
                    && *radius > 0.0
                    && finite(*radius)
                    && finite(*start_angle)
                    && *sweep != 0.0
                    && finite(*sweep)
            }
            ArcSpec::PowerCuspArc {
                x_start,
                x_end,
                amplitude,
                exponent,
            } => {
                if !(*exponent > 1.0) {
                    return Err(Error::InvalidDomain(format!(
                        "power-cusp-arc exponent must exceed 1, got {exponent}"
                    )));
                }
                finite(*x_start)
                    && finite(*x_end)
                    && finite(*amplitude)
                    && finite(*exponent)
                    && x_start != x_end
                    && (0.0..=1.0).contains(x_start)
                    && (0.0..=1.0).contains(x_end)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!(
                "degenerate or non-finite {} parameters",
                self.kind_name()
            )))
        }
    }
}

/// A junction between consecutive arcs with exterior angle `lambda·π`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CornerInfo {
    pub vertex: C64,
    pub lambda: f64,
}

/// A validated Jordan domain.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    name: String,
    arcs: Vec<ArcSpec>,
    corners: Vec<CornerInfo>,
    zeta: C64,
}

impl DomainSpec {
    /// Validates closure, orientation, simplicity, the interior point and the
    /// corner list.
    pub fn new(
        name: impl Into<String>,
        arcs: Vec<ArcSpec>,
        corners: Vec<CornerInfo>,
        zeta: C64,
    ) -> Result<Self> {
        let domain = DomainSpec {
            name: name.into(),
            arcs,
            corners,
            zeta,
        };
        domain.validate()?;
        Ok(domain)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arcs(&self) -> &[ArcSpec] {
        &self.arcs
    }

    pub fn corners(&self) -> &[CornerInfo] {
        &self.corners
    }

    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// `(γ_i(t), γ_i'(t))` on arc `arc_index`.
    pub fn boundary_point(&self, arc_index: usize, t: f64) -> Result<(C64, C64)> {
        let arc = self.arcs.get(arc_index).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "arc index {arc_index} out of range (domain has {} arcs)",
                self.arcs.len()
            ))
        })?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("t = {t} outside [0, 1]")));
        }
        Ok(arc.eval(t))
    }

    /// Smallest exterior angle fraction `λ = min_j λ_j`, or `None` for an
    /// analytic boundary (no corners).
    pub fn min_exterior_angle(&self) -> Option<f64> {
        self.corners.iter().map(|c| c.lambda).reduce(f64::min)
    }

    /// Whether the start (`at_end = false`) or end of an arc is a corner.
    pub fn endpoint_is_corner(&self, arc_index: usize, at_end: bool) -> bool {
        let arc = &self.arcs[arc_index];
        let p = if at_end { arc.end() } else { arc.start() };
        self.corners
            .iter()
            .any(|c| (c.vertex - p).norm() <= CLOSURE_TOL * (1.0 + p.norm()))
    }

    /// Uniform-in-parameter polyline with `per_arc` segments per arc, without
    /// repeating the closing point.
    pub fn sample(&self, per_arc: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(per_arc * self.arcs.len());
        for arc in &self.arcs {
            for k in 0..per_arc {
                out.push(arc.eval(k as f64 / per_arc as f64).0);
            }
        }
        out
    }

    /// Signed area enclosed by a dense boundary sample.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.sample(VALIDATION_SAMPLES_PER_ARC))
    }

    /// Winding number of a dense boundary sample about `z`.
    pub fn winding_number(&self, z: C64) -> f64 {
        winding_number(&self.sample(VALIDATION_SAMPLES_PER_ARC), z)
    }

    /// A copy of the domain scaled by `s` about the origin (zeta included).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factor {s}")));
        }
        let arcs = self
            .arcs
            .iter()
            .map(|arc| match arc {
                ArcSpec::Line { start, end } => Ok(ArcSpec::Line {
                    start: start * s,
                    end: end * s,
                }),
                ArcSpec::CircularArc {
                    center,
                    radius,
                    start_angle,
                    sweep,
                } => Ok(ArcSpec::CircularArc {
                    center: center * s,
                    radius: radius * s,
                    start_angle: *start_angle,
                    sweep: *sweep,
                }),
                ArcSpec::PolyImageArc {
                    coeffs,
                    radius,
                    start_angle,
                    sweep,
                } => {
                    // s·ψ(w) with the same preimage circle.
                    Ok(ArcSpec::PolyImageArc {
                        coeffs: coeffs.iter().map(|c| c * s).collect(),
                        radius: *radius,
                        start_angle: *start_angle,
                        sweep: *sweep,
                    })
                }
                ArcSpec::PowerCuspArc { .. } => Err(Error::InvalidParameter(
                    "power-cusp arcs live on the unit interval and cannot be rescaled".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        let corners = self
            .corners
            .iter()
            .map(|c| CornerInfo {
                vertex: c.vertex * s,
                lambda: c.lambda,
            })
            .collect();
        DomainSpec::new(format!("{}-x{s}", self.name), arcs, corners, self.zeta * s)
    }

    fn validate(&self) -> Result<()> {
        if self.arcs.is_empty() {
            return Err(Error::InvalidDomain("no arcs".into()));
        }
        if !is_finite(self.zeta) {
            return Err(Error::InvalidDomain("zeta is not finite".into()));
        }
        for arc in &self.arcs {
            arc.check_parameters()?;
        }
        let m = self.arcs.len();
        for i in 0..m {
            let end = self.arcs[i].end();
            let next = self.arcs[(i + 1) % m].start();
            if (end - next).norm() > CLOSURE_TOL * (1.0 + end.norm()) {
                return Err(Error::InvalidDomain(format!(
                    "arc chain not closed: arc {i} ends at {end}, arc {} starts at {next}",
                    (i + 1) % m
                )));
            }
        }
        for (i, arc) in self.arcs.iter().enumerate() {
            let pts: Vec<C64> = (0..=32).map(|k| arc.eval(k as f64 / 32.0).0).collect();
            let len: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
            if !(len > 1e-14) {
                return Err(Error::InvalidDomain(format!("arc {i} has zero length")));
            }
        }
        for corner in &self.corners {
            if !(corner.lambda > 0.0 && corner.lambda <= 2.0) {
                return Err(Error::InvalidDomain(format!(
                    "exterior angle fraction {} outside (0, 2]",
                    corner.lambda
                )));
            }
            let at_junction = self.arcs.iter().any(|a| {
                (a.end() - corner.vertex).norm() <= CLOSURE_TOL * (1.0 + corner.vertex.norm())
            });
            if !at_junction {
                return Err(Error::InvalidDomain(format!(
                    "corner {} is not a junction of consecutive arcs",
                    corner.vertex
                )));
            }
        }
        let pts = self.sample(VALIDATION_SAMPLES_PER_ARC);
        if pts.iter().any(|z| !is_finite(*z)) {
            return Err(Error::InvalidDomain("non-finite boundary point".into()));
        }
        if signed_area(&pts) <= 0.0 {
            return Err(Error::InvalidDomain(
                "boundary is not positively oriented".into(),
            ));
        }
        if let Some((a, b)) = first_self_intersection(&pts) {
            return Err(Error::InvalidDomain(format!(
                "boundary is not a Jordan curve: segments {a} and {b} intersect"
            )));
        }
        let wn = winding_number(&pts, self.zeta);
        if (wn - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidDomain(format!(
                "zeta = {} is not interior (winding number {wn:.3})",
                self.zeta
            )));
        }
        Ok(())
    }
}

/// Supported domain families in the JSON description.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Disk,
    Polygon,
    Polyimage,
    Cusp,
}

/// JSON document describing a domain:
///
/// ```json
/// {"kind": "polygon",
///  "params": {"vertices": [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]},
///  "zeta": [0.0, 0.0],
///  "name": "square"}
/// ```
///
/// Parameter objects per kind:
///
/// * `disk`: `{"center": [re, im], "radius": r}`
/// * `polygon`: `{"vertices": [[x, y], ...]}` (either orientation)
/// * `polyimage`: `{"coeffs": [[re, im], ...], "radius": R}`, the boundary
///   is `ψ(R e^{iθ})` with `ψ(w) = Σ coeffs[k] w^k`
/// * `cusp`: `{"exponent": a, "amplitude": A}`, the lens between
///   `y = ±A (x(1-x))^a` on `[0, 1]`, with outward cusps at both ends
///
/// Unknown fields are rejected at every level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDescription {
    pub kind: DomainKind,
    pub params: Value,
    pub zeta: [f64; 2],
    pub name: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiskParams {
    center: [f64; 2],
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonParams {
    vertices: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyimageParams {
    coeffs: Vec<[f64; 2]>,
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CuspParams {
    exponent: f64,
    amplitude: f64,
}

fn params<T: serde::de::DeserializeOwned>(kind: DomainKind, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone())
        .map_err(|e| Error::InvalidDomain(format!("{kind:?} params: {e}")))
}

fn pt(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

/// Builds and validates a domain from its JSON description.
pub fn build_domain(desc: &DomainDescription) -> Result<DomainSpec> {
    let zeta = pt(desc.zeta);
    let name = desc.name.clone();
    match desc.kind {
        DomainKind::Disk => {
            let p: DiskParams = params(desc.kind, &desc.params)?;
            disk(name, pt(p.center), p.radius, zeta)
        }
        DomainKind::Polygon => {
            let p: PolygonParams = params(desc.kind, &desc.params)?;
            polygon(name, &p.vertices.into_iter().map(pt).collect::<Vec<_>>(), zeta)
        }
        DomainKind::Polyimage => {
            let p: PolyimageParams = params(desc.kind, &desc.params)?;
            polyimage(name, &p.coeffs.into_iter().map(pt).collect::<Vec<_>>(), p.radius, zeta)
        }
        DomainKind::Cusp => {
            let p: CuspParams = params(desc.kind, &desc.params)?;
            cusp(name, p.exponent, p.amplitude, zeta)
        }
    }
}

/// A disk as a single circular arc with no corners.
pub fn disk(name: impl Into<String>, center: C64, radius: f64, zeta: C64) -> Result<DomainSpec> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidDomain(format!("disk radius {radius}")));
    }
    DomainSpec::new(
        name,
        vec![ArcSpec::CircularArc {
            center,
            radius,
            start_angle: 0.0,
            sweep: 2.0 * PI,
        }],
        Vec::new(),
        zeta,
    )
}

/// A polygon; clockwise input is reversed. Collinear vertices are not corners.
pub fn polygon(name: impl Into<String>, vertices: &[C64], zeta: C64) -> Result<DomainSpec> {
    if vertices.len() < 3 {
        return Err(Error::InvalidDomain(format!(
            "polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    let mut v = vertices.to_vec();
    if signed_area(&v) < 0.0 {
        v.reverse();
    }
    let m = v.len();
    let mut arcs = Vec::with_capacity(m);
    let mut corners = Vec::new();
    for j in 0..m {
        let (prev, cur, next) = (v[(j + m - 1) % m], v[j], v[(j + 1) % m]);
        arcs.push(ArcSpec::Line {
            start: cur,
            end: next,
        });
        let turn = ((next - cur) / (cur - prev)).arg();
        if !turn.is_finite() {
            return Err(Error::InvalidDomain(format!("repeated vertex {cur}")));
        }
        if turn.abs() < 1e-12 {
            continue;
        }
        if PI - turn.abs() < 1e-12 {
            return Err(Error::InvalidDomain(format!("zero interior angle at {cur}")));
        }
        // interior angle π - turn, exterior angle π + turn.
        corners.push(CornerInfo {
            vertex: cur,
            lambda: 1.0 + turn / PI,
        });
    }
    DomainSpec::new(name, arcs, corners, zeta)
}

/// The image of the disk `|w| < radius` under `ψ(w) = Σ coeffs[k] w^k`,
/// one analytic arc, no corners.
pub fn polyimage(
    name: impl Into<String>,
    coeffs: &[C64],
    radius: f64,
    zeta: C64,
) -> Result<DomainSpec> {
    if coeffs.len() < 2 || coeffs[1] == C64::new(0.0, 0.0) {
        return Err(Error::InvalidDomain(
            "polyimage needs ψ'(0) ≠ 0 (at least two coefficients)".into(),
        ));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidDomain(format!("polyimage radius {radius}")));
    }
    DomainSpec::new(
        name,
        vec![ArcSpec::PolyImageArc {
            coeffs: coeffs.to_vec(),
            radius,
            start_angle: 0.0,
            sweep: 2.0 * PI,
        }],
        Vec::new(),
        zeta,
    )
}

/// The lens `|y| < amplitude·(x(1-x))^exponent`, `0 < x < 1`, with outward
/// pointing cusps (`λ = 2`) at `x = 0` and `x = 1`.
pub fn cusp(
    name: impl Into<String>,
    exponent: f64,
    amplitude: f64,
    zeta: C64,
) -> Result<DomainSpec> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidDomain(format!("cusp amplitude {amplitude}")));
    }
    let lower = ArcSpec::PowerCuspArc {
        x_start: 0.0,
        x_end: 1.0,
        amplitude: -amplitude,
        exponent,
    };
    let upper = ArcSpec::PowerCuspArc {
        x_start: 1.0,
        x_end: 0.0,
        amplitude,
        exponent,
    };
    let corners = vec![
        CornerInfo {
            vertex: C64::new(1.0, 0.0),
            lambda: 2.0,
        },
        CornerInfo {
            vertex: C64::new(0.0, 0.0),
            lambda: 2.0,
        },
    ];
    DomainSpec::new(name, vec![lower, upper], corners, zeta)
}

/// Built-in example domains, shared by the shipped configs, the tests and
/// the benchmarks.
pub mod builtin {
    use super::*;

    pub fn unit_disk() -> DomainSpec {
        disk("disk", C64::new(0.0, 0.0), 1.0, C64::new(0.0, 0.0)).expect("valid built-in")
    }

    /// `ψ(w) = w + 0.25 w²` on the unit disk.
    pub fn ellipse() -> DomainSpec {
        polyimage(
            "ellipse",
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.25, 0.0)],
            1.0,
            C64::new(0.0, 0.0),
        )
        .expect("valid built-in")
    }

    /// `ψ(w) = w + 0.15 w² + 0.05 w³` on the unit disk.
    pub fn cubic() -> DomainSpec {
        polyimage(
            "cubic",
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.15, 0.0),
                C64::new(0.05, 0.0),
            ],
            1.0,
            C64::new(0.0, 0.0),
        )
        .expect("valid built-in")
    }

    /// Side-1 square centered at the origin.
    pub fn unit_square() -> DomainSpec {
        polygon(
            "square",
            &[
                C64::new(-0.5, -0.5),
                C64::new(0.5, -0.5),
                C64::new(0.5, 0.5),
                C64::new(-0.5, 0.5),
            ],
            C64::new(0.0, 0.0),
        )
        .expect("valid built-in")
    }

    /// L-shaped hexagon with one reflex corner (`λ = 1/2`) at the origin.
    pub fn l_shape() -> DomainSpec {
        polygon(
            "lshape",
            &[
                C64::new(-1.0, -1.0),
                C64::new(1.0, -1.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(-1.0, 1.0),
            ],
            C64::new(-0.5, -0.5),
        )
        .expect("valid built-in")
    }

    /// Two-cusp lens, `y = ±4 (x(1-x))²`.
    pub fn cusp_lens() -> DomainSpec {
        cusp("cusp", 2.0, 4.0, C64::new(0.5, 0.0)).expect("valid built-in")
    }

    pub fn all() -> Vec<DomainSpec> {
        vec![unit_disk(), ellipse(), cubic(), unit_square(), l_shape(), cusp_lens()]
    }
}

pub(crate) fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `(ψ(w), ψ'(w))` for `ψ(w) = Σ coeffs[k] w^k`.
pub(crate) fn horner_with_derivative(coeffs: &[C64], w: C64) -> (C64, C64) {
    let mut value = C64::new(0.0, 0.0);
    let mut deriv = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        deriv = deriv * w + value;
        value = value * w + c;
    }
    (value, deriv)
}

/// Shoelace area of a closed polyline (closing edge implied).
pub fn signed_area(pts: &[C64]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            a.re * b.im - a.im * b.re
        })
        .sum::<f64>()
}

/// Winding number of a closed polyline about `z`.
pub fn winding_number(pts: &[C64], z: C64) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|k| ((pts[(k + 1) % n] - z) / (pts[k] - z)).arg())
        .sum::<f64>()
        / (2.0 * PI)
}

fn orient(a: C64, b: C64, c: C64) -> f64 {
    let (u, v) = (b - a, c - a);
    u.re * v.im - u.im * v.re
}

fn segments_intersect(a: C64, b: C64, c: C64, d: C64) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: C64, q: C64, r: C64| {
        r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
    };
    (d1 == 0.0 && on(c, d, a))
        || (d2 == 0.0 && on(c, d, b))
        || (d3 == 0.0 && on(a, b, c))
        || (d4 == 0.0 && on(a, b, d))
}

/// First pair of non-adjacent polyline edges that intersect, if any.
fn first_self_intersection(pts: &[C64]) -> Option<(usize, usize)> {
    let n = pts.len();
    let edge = |k: usize| (pts[k], pts[(k + 1) % n]);
    // bounding boxes let us skip most pairs cheaply
    let boxes: Vec<[f64; 4]> = (0..n)
        .map(|k| {
            let (a, b) = edge(k);
            [a.re.min(b.re), a.re.max(b.re), a.im.min(b.im), a.im.max(b.im)]
        })
        .collect();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (bi, bj) = (&boxes[i], &boxes[j]);
            if bi[1] < bj[0] || bj[1] < bi[0] || bi[3] < bj[2] || bj[3] < bi[2] {
                continue;
            }
            let (a, b) = edge(i);
            let (c, d) = edge(j);
            if segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}
