use num_complex::Complex64;
use std::f64::consts::PI;

use super::mobius::{ExtPoint, MobiusMap};
use crate::error::{Error, Result};

/// Distance below which a containment query is considered to sit on the boundary.
pub const BOUNDARY_AMBIGUITY: f64 = 1e-9;
pub const DEFAULT_SAMPLES_PER_EDGE: usize = 64;

/// A geodesic of the exterior-of-disc model joining two polygon vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geodesic {
    /// Arc of a circle orthogonal to the unit circle, `center + radius·e^{iθ}`
    /// for θ from `start_angle` to `start_angle + sweep`.
    Arc {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    /// Straight piece of a line through the origin.
    Segment { from: Complex64, to: Complex64 },
    /// Radial ray between a finite vertex and ∞. `outward` runs vertex → ∞.
    Ray { vertex: Complex64, outward: bool },
}

impl Geodesic {
    pub fn through(from: ExtPoint, to: ExtPoint) -> Result<Geodesic> {
        match (from, to) {
            (ExtPoint::Infinity, ExtPoint::Infinity) => Err(Error::Input(
                "degenerate edge from infinity to infinity".into(),
            )),
            (ExtPoint::Finite(v), ExtPoint::Infinity) => Ok(Geodesic::Ray {
                vertex: v,
                outward: true,
            }),
            (ExtPoint::Infinity, ExtPoint::Finite(v)) => Ok(Geodesic::Ray {
                vertex: v,
                outward: false,
            }),
            (ExtPoint::Finite(u), ExtPoint::Finite(v)) => Self::finite(u, v),
        }
    }

    fn finite(u: Complex64, v: Complex64) -> Result<Geodesic> {
        if (u - v).norm() == 0.0 {
            return Err(Error::Input(format!(
                "degenerate edge with coincident endpoints {u}"
            )));
        }
        let cross = u.re * v.im - u.im * v.re;
        if cross.abs() <= 1e-14 * u.norm() * v.norm() {
            return Ok(Geodesic::Segment { from: u, to: v });
        }
        // Circle orthogonal to |z| = 1 through u and v: 2 Re(c ū) = |u|² + 1.
        let (r1, r2) = (u.norm_sqr() + 1.0, v.norm_sqr() + 1.0);
        let det = 2.0 * (u.re * v.im - u.im * v.re);
        let x = (r1 * v.im - r2 * u.im) / det;
        let y = (u.re * r2 - v.re * r1) / det;
        let center = Complex64::new(x, y);
        let radius = (center.norm_sqr() - 1.0).sqrt();
        let start_angle = (u - center).arg();
        let mut sweep = (v - center).arg() - start_angle;
        while sweep > PI {
            sweep -= 2.0 * PI;
        }
        while sweep <= -PI {
            sweep += 2.0 * PI;
        }
        let mid = center + Complex64::from_polar(radius, start_angle + sweep / 2.0);
        if mid.norm() < 1.0 {
            sweep -= 2.0 * PI * sweep.signum();
        }
        Ok(Geodesic::Arc {
            center,
            radius,
            start_angle,
            sweep,
        })
    }

    pub fn start(&self) -> ExtPoint {
        self.point(0.0)
    }

    pub fn end(&self) -> ExtPoint {
        self.point(1.0)
    }

    /// Point at parameter `s ∈ [0, 1]`. Rays are parameterized linearly in `w = 1/z`.
    pub fn point(&self, s: f64) -> ExtPoint {
        match *self {
            Geodesic::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => ExtPoint::Finite(center + Complex64::from_polar(radius, start_angle + sweep * s)),
            Geodesic::Segment { from, to } => ExtPoint::Finite(from + (to - from) * s),
            Geodesic::Ray { vertex, outward } => {
                let frac = if outward { 1.0 - s } else { s };
                if frac == 0.0 {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(vertex / frac)
                }
            }
        }
    }

    /// Euclidean distance from a finite point to the edge.
    pub fn distance_z(&self, q: Complex64) -> f64 {
        match *self {
            Geodesic::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let rel = (q - center).arg() - start_angle;
                let inside = [rel, rel + 2.0 * PI, rel - 2.0 * PI]
                    .iter()
                    .any(|r| (0.0..=1.0).contains(&(r / sweep)));
                if inside {
                    ((q - center).norm() - radius).abs()
                } else {
                    let a = center + Complex64::from_polar(radius, start_angle);
                    let b = center + Complex64::from_polar(radius, start_angle + sweep);
                    (q - a).norm().min((q - b).norm())
                }
            }
            Geodesic::Segment { from, to } => segment_distance(q, from, to),
            Geodesic::Ray { vertex, .. } => {
                let u = vertex / vertex.norm();
                let t = (q * u.conj()).re;
                if t <= vertex.norm() {
                    (q - vertex).norm()
                } else {
                    (q - u * t).norm()
                }
            }
        }
    }

    /// Distance measured in the edge's natural chart: `w = 1/z` for rays,
    /// `z` otherwise.
    pub fn chart_distance(&self, q: ExtPoint) -> f64 {
        match *self {
            Geodesic::Ray { vertex, .. } => match q.inverted() {
                ExtPoint::Finite(wq) => {
                    segment_distance(wq, Complex64::new(0.0, 0.0), vertex.inv())
                }
                ExtPoint::Infinity => f64::INFINITY,
            },
            _ => match q {
                ExtPoint::Finite(z) => self.distance_z(z),
                ExtPoint::Infinity => f64::INFINITY,
            },
        }
    }
}

pub(crate) fn segment_distance(q: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (q - a).norm();
    }
    let t = (((q - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (q - (a + ab * t)).norm()
}

/// How one edge is glued to its partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgePairing {
    /// Index of the partner edge.
    pub partner: usize,
    /// Index into the generator list of the map carrying this edge onto its partner.
    pub generator: usize,
    /// Use the inverse of the generator.
    pub inverse: bool,
}

/// Fundamental 4g-gon in the exterior-of-disc model.
///
/// Edge `k` runs from `vertices[k]` to `vertices[(k + 1) % 4g]`. The pairing
/// generator of edge `k` maps its start onto the end of the partner edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalPolygon {
    genus: usize,
    vertices: Vec<ExtPoint>,
    pairing: Vec<EdgePairing>,
    edges: Vec<Geodesic>,
    samples_per_edge: usize,
}

impl FundamentalPolygon {
    pub fn new(genus: usize, vertices: Vec<ExtPoint>, pairing: Vec<EdgePairing>) -> Result<Self> {
        if genus < 2 {
            return Err(Error::Input(format!(
                "genus must be at least 2, got {genus}"
            )));
        }
        let n = 4 * genus;
        if vertices.len() != n {
            return Err(Error::Input(format!(
                "expected {n} vertices, got {}",
                vertices.len()
            )));
        }
        if pairing.len() != n {
            return Err(Error::Input(format!(
                "expected {n} pairing entries, got {}",
                pairing.len()
            )));
        }
        for (k, p) in pairing.iter().enumerate() {
            if p.partner >= n || p.partner == k || pairing[p.partner].partner != k {
                return Err(Error::Input(format!(
                    "pairing entry {k} is not an involution"
                )));
            }
            if p.generator >= 2 * genus {
                return Err(Error::Input(format!(
                    "pairing entry {k} references generator {} of {}",
                    p.generator,
                    2 * genus
                )));
            }
        }
        let edges = (0..n)
            .map(|k| Geodesic::through(vertices[k], vertices[(k + 1) % n]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            genus,
            vertices,
            pairing,
            edges,
            samples_per_edge: DEFAULT_SAMPLES_PER_EDGE,
        })
    }

    pub fn with_samples_per_edge(mut self, samples: usize) -> Self {
        self.samples_per_edge = samples.max(4);
        self
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[ExtPoint] {
        &self.vertices
    }

    pub fn pairing(&self) -> &[EdgePairing] {
        &self.pairing
    }

    pub fn edges(&self) -> &[Geodesic] {
        &self.edges
    }

    pub fn samples_per_edge(&self) -> usize {
        self.samples_per_edge
    }

    pub fn finite_vertices(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.vertices.iter().filter_map(|v| v.finite())
    }

    /// The map carrying edge `k` onto its partner.
    pub fn pairing_map(&self, generators: &[MobiusMap], k: usize) -> MobiusMap {
        let p = self.pairing[k];
        if p.inverse {
            generators[p.generator].inverse()
        } else {
            generators[p.generator]
        }
    }

    /// Finite vertices inside the closed unit disc and sampled edge points that
    /// dip into it, as human-readable messages.
    pub fn exterior_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, v) in self.vertices.iter().enumerate() {
            if let ExtPoint::Finite(z) = v {
                if z.norm() <= 1.0 {
                    out.push(format!("vertex {k} = {z} lies in the closed unit disc"));
                }
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            for i in 0..=self.samples_per_edge {
                let s = i as f64 / self.samples_per_edge as f64;
                if let ExtPoint::Finite(z) = e.point(s) {
                    if z.norm() <= 1.0 {
                        out.push(format!("edge {k} enters the closed unit disc near {z}"));
                        break;
                    }
                }
            }
        }
        out
    }

    /// Largest pointwise distance from the image of a sampled edge point to the
    /// partner edge, together with the endpoint correspondence error.
    pub fn pairing_defect(&self, generators: &[MobiusMap]) -> f64 {
        let n = self.vertex_count();
        let mut worst = 0.0_f64;
        for k in 0..n {
            let map = self.pairing_map(generators, k);
            let partner = self.pairing[k].partner;
            let target = &self.edges[partner];
            for i in 0..=self.samples_per_edge {
                let s = i as f64 / self.samples_per_edge as f64;
                let image = map.apply(self.edges[k].point(s));
                worst = worst.max(target.chart_distance(image));
            }
            let start_image = map.apply(self.vertices[k]);
            let end_image = map.apply(self.vertices[(k + 1) % n]);
            worst = worst
                .max(start_image.chordal_distance(&self.vertices[(partner + 1) % n]))
                .max(end_image.chordal_distance(&self.vertices[partner]));
        }
        worst
    }

    /// Boundary sampled in the `w = 1/z` chart, where the polygon is bounded.
    fn inverted_polyline(&self) -> Vec<Complex64> {
        let mut pts = Vec::with_capacity(self.edges.len() * self.samples_per_edge);
        for e in &self.edges {
            for i in 0..self.samples_per_edge {
                let s = i as f64 / self.samples_per_edge as f64;
                match e.point(s).inverted() {
                    ExtPoint::Finite(w) => pts.push(w),
                    ExtPoint::Infinity => {}
                }
            }
        }
        pts
    }

    /// Smallest Euclidean distance from a finite point to the boundary.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        self.edges
            .iter()
            .map(|e| e.distance_z(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Winding-number containment test for a point of the exterior domain.
    pub fn contains(&self, z: Complex64) -> Result<bool> {
        if !(z.norm() > 1.0) || !z.is_finite() {
            return Err(Error::Input(format!(
                "containment query {z} must be finite with |z| > 1"
            )));
        }
        let distance = self.boundary_distance(z);
        if distance < BOUNDARY_AMBIGUITY {
            return Err(Error::AmbiguousPosition { distance });
        }
        let wq = z.inv();
        let pts = self.inverted_polyline();
        let mut total = 0.0;
        for i in 0..pts.len() {
            let a = pts[i] - wq;
            let b = pts[(i + 1) % pts.len()] - wq;
            total += (b / a).arg();
        }
        let winding = (total / (2.0 * PI)).round() as i64;
        Ok(winding.abs() == 1)
    }

    /// Whether the sampled boundary is a simple closed curve (checked in the
    /// `w` chart; adjacent edges may only share their common vertex).
    pub fn is_simple(&self) -> bool {
        let m = self.samples_per_edge;
        let pts = self.inverted_polyline();
        let count = pts.len();
        let seg = |i: usize| (pts[i], pts[(i + 1) % count]);
        for i in 0..count {
            for j in (i + 2)..count {
                if i == 0 && j == count - 1 {
                    continue;
                }
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if segments_cross(a, b, c, d) {
                    // Segments touching only at a shared vertex are fine.
                    let shared_vertex = (i + 1) % m == 0 && j == i + 1;
                    if !shared_vertex {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Image of the polygon under a Möbius map (pairing unchanged).
    pub fn mapped(&self, map: &MobiusMap) -> Result<Self> {
        let vertices = self.vertices.iter().map(|v| map.apply(*v)).collect();
        Ok(Self::new(self.genus, vertices, self.pairing.clone())?
            .with_samples_per_edge(self.samples_per_edge))
    }
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    let u = b - a;
    let v = c - a;
    u.re * v.im - u.im * v.re
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Conjugate the generators and move the polygon so that its first vertex is ∞.
///
/// Fails when the first vertex lies in the closed unit disc, since no exterior
/// automorphism can then reach ∞.
pub fn normalize_to_infinity(
    generators: &[MobiusMap],
    polygon: &FundamentalPolygon,
) -> Result<(Vec<MobiusMap>, FundamentalPolygon)> {
    let map = match polygon.vertices()[0] {
        ExtPoint::Infinity => MobiusMap::identity(),
        ExtPoint::Finite(p) => MobiusMap::exterior_to_infinity(p)?,
    };
    normalize_with(generators, polygon, &map)
}

/// As [`normalize_to_infinity`] with a caller-supplied automorphism.
pub fn normalize_with(
    generators: &[MobiusMap],
    polygon: &FundamentalPolygon,
    map: &MobiusMap,
) -> Result<(Vec<MobiusMap>, FundamentalPolygon)> {
    if !map.is_exterior_automorphism(1e-9) {
        return Err(Error::Input(
            "normalizing map is not an exterior automorphism".into(),
        ));
    }
    if map
        .apply(polygon.vertices()[0])
        .chordal_distance(&ExtPoint::Infinity)
        > 1e-9
    {
        return Err(Error::Input(
            "normalizing map does not send the first vertex to infinity".into(),
        ));
    }
    let conjugated = generators.iter().map(|g| g.conjugate_by(map)).collect();
    let mut vertices: Vec<ExtPoint> = polygon.vertices().iter().map(|v| map.apply(*v)).collect();
    vertices[0] = ExtPoint::Infinity;
    let moved = FundamentalPolygon::new(polygon.genus(), vertices, polygon.pairing().to_vec())?
        .with_samples_per_edge(polygon.samples_per_edge());
    Ok((conjugated, moved))
}
