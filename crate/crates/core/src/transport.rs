//! Parallel transport `dY = A(z) Y dz` along piecewise paths, pinwheel loops
//! around poles, and monodromy matrices.
//!
//! Monodromy of a concatenated loop is `M_second · M_first`. Loops around
//! poles are counterclockwise. Points with `|z|` beyond the chart-switch
//! radius are integrated in `w = 1/z`.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::connform::LogConnectionForm;
use crate::error::{Error, Result};
use crate::hypgeo::polygon::segment_distance;
use crate::hypgeo::{ExtPoint, FundamentalPolygon, Geodesic};
use crate::linalg::{c, dist, from_row_major, identity, push_row_major, CMatrix};
use crate::ode::{integrate, IntegrationStats, StepperOptions};

/// Largest endpoint mismatch tolerated between consecutive segments.
pub const SEGMENT_GAP_TOL: f64 = 1e-12;
const FALLBACK_DISTANCE_SAMPLES: usize = 4096;

/// One piece of a path, parameterized by `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line {
        from: Complex64,
        to: Complex64,
    },
    /// `center + radius·e^{iθ}`, θ from `start_angle` to `start_angle + sweep`.
    /// Positive sweep is counterclockwise.
    Arc {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    /// Straight segment in the chart `w = 1/z`; `w = 0` is the point ∞.
    WLine {
        from: Complex64,
        to: Complex64,
    },
}

impl Segment {
    pub fn circle(
        center: Complex64,
        radius: f64,
        start_angle: f64,
        counterclockwise: bool,
    ) -> Self {
        Segment::Arc {
            center,
            radius,
            start_angle,
            sweep: if counterclockwise {
                2.0 * PI
            } else {
                -2.0 * PI
            },
        }
    }

    /// Radial ray from ∞ down to the finite point `z`.
    pub fn from_infinity(z: Complex64) -> Self {
        Segment::WLine {
            from: c(0.0, 0.0),
            to: z.inv(),
        }
    }

    pub fn from_geodesic(g: &Geodesic) -> Self {
        match *g {
            Geodesic::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            },
            Geodesic::Segment { from, to } => Segment::Line { from, to },
            Geodesic::Ray { vertex, outward } => {
                let (zero, wv) = (c(0.0, 0.0), vertex.inv());
                if outward {
                    Segment::WLine { from: wv, to: zero }
                } else {
                    Segment::WLine { from: zero, to: wv }
                }
            }
        }
    }

    pub fn point(&self, s: f64) -> ExtPoint {
        match *self {
            Segment::Line { from, to } => ExtPoint::Finite(from + (to - from) * s),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => ExtPoint::Finite(center + Complex64::from_polar(radius, start_angle + sweep * s)),
            Segment::WLine { from, to } => ExtPoint::Finite(from + (to - from) * s).inverted(),
        }
    }

    pub fn start(&self) -> ExtPoint {
        self.point(0.0)
    }

    pub fn end(&self) -> ExtPoint {
        self.point(1.0)
    }

    pub fn reversed(&self) -> Self {
        self.restricted(1.0, 0.0)
    }

    /// The piece between parameters `s0` and `s1` (reversed when `s1 < s0`).
    pub fn restricted(&self, s0: f64, s1: f64) -> Self {
        match *self {
            Segment::Line { from, to } => Segment::Line {
                from: from + (to - from) * s0,
                to: from + (to - from) * s1,
            },
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => Segment::Arc {
                center,
                radius,
                start_angle: start_angle + sweep * s0,
                sweep: sweep * (s1 - s0),
            },
            Segment::WLine { from, to } => Segment::WLine {
                from: from + (to - from) * s0,
                to: from + (to - from) * s1,
            },
        }
    }

    /// Parameter of the point of the segment nearest to `z`.
    pub fn locate(&self, z: ExtPoint) -> f64 {
        match *self {
            Segment::Line { from, to } => match z {
                ExtPoint::Finite(z) => project(z, from, to),
                ExtPoint::Infinity => 0.0,
            },
            Segment::Arc {
                start_angle,
                sweep,
                center,
                ..
            } => match z {
                ExtPoint::Finite(z) => {
                    let rel = (z - center).arg() - start_angle;
                    [
                        rel,
                        rel + 2.0 * PI,
                        rel - 2.0 * PI,
                        rel + 4.0 * PI,
                        rel - 4.0 * PI,
                    ]
                    .iter()
                    .map(|r| r / sweep)
                    .min_by(|x, y| distance_to_unit(*x).total_cmp(&distance_to_unit(*y)))
                    .unwrap()
                    .clamp(0.0, 1.0)
                }
                ExtPoint::Infinity => 0.0,
            },
            Segment::WLine { from, to } => match z.inverted() {
                ExtPoint::Finite(w) => project(w, from, to),
                ExtPoint::Infinity => 0.0,
            },
        }
    }

    /// Euclidean distance from a finite point `q` to the segment.
    pub fn distance_to(&self, q: Complex64) -> f64 {
        match *self {
            Segment::Line { from, to } => segment_distance(q, from, to),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                if sweep.abs() >= 2.0 * PI {
                    ((q - center).norm() - radius).abs()
                } else {
                    Geodesic::Arc {
                        center,
                        radius,
                        start_angle,
                        sweep,
                    }
                    .distance_z(q)
                }
            }
            Segment::WLine { from, to } => wline_distance(q, from, to),
        }
    }

    /// Chart-aware `(M, dM)`-free integrand: `A(z(s))·z'(s)` or its `w` analogue.
    fn integrand(&self, form: &LogConnectionForm, r_switch: f64, s: f64) -> Result<CMatrix> {
        match *self {
            Segment::Line { .. } | Segment::Arc { .. } => {
                let (z, dz) = match *self {
                    Segment::Line { from, to } => (from + (to - from) * s, to - from),
                    Segment::Arc {
                        center,
                        radius,
                        start_angle,
                        sweep,
                    } => {
                        let e = Complex64::from_polar(radius, start_angle + sweep * s);
                        (center + e, e * c(0.0, sweep))
                    }
                    Segment::WLine { .. } => unreachable!(),
                };
                if z.norm() > r_switch {
                    let w = z.inv();
                    Ok(form.evaluate_at_infinity_chart(w)? * (-dz * w * w))
                } else {
                    Ok(form.evaluate(z)? * dz)
                }
            }
            Segment::WLine { from, to } => {
                let w = from + (to - from) * s;
                let dw = to - from;
                if w.norm() * r_switch >= 1.0 {
                    Ok(form.evaluate(w.inv())? * (-dw / (w * w)))
                } else {
                    Ok(form.evaluate_at_infinity_chart(w)? * dw)
                }
            }
        }
    }
}

fn distance_to_unit(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else if x > 1.0 {
        x - 1.0
    } else {
        0.0
    }
}

fn project(q: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        0.0
    } else {
        (((q - a) * ab.conj()).re / len2).clamp(0.0, 1.0)
    }
}

/// Distance in `z` from `q` to the image of the `w`-segment `[from, to]`.
fn wline_distance(q: Complex64, from: Complex64, to: Complex64) -> f64 {
    let cross = from.re * to.im - from.im * to.re;
    let radial = cross.abs() <= 1e-14 * from.norm().max(to.norm()).powi(2);
    let same_side = (from * to.conj()).re >= 0.0;
    if radial && same_side {
        // Image is a radial segment between radii 1/|w|.
        let dir_w = if from.norm() >= to.norm() { from } else { to };
        if dir_w.norm() == 0.0 {
            return f64::INFINITY;
        }
        let u = dir_w.conj() / dir_w.norm();
        let r_of = |w: Complex64| {
            if w.norm() == 0.0 {
                f64::INFINITY
            } else {
                1.0 / w.norm()
            }
        };
        let (r0, r1) = {
            let (x, y) = (r_of(from), r_of(to));
            (x.min(y), x.max(y))
        };
        let t = (q * u.conj()).re.clamp(r0, r1);
        return (q - u * t).norm();
    }
    let mut best = f64::INFINITY;
    for i in 0..=FALLBACK_DISTANCE_SAMPLES {
        let w = from + (to - from) * (i as f64 / FALLBACK_DISTANCE_SAMPLES as f64);
        if w.norm() > 0.0 {
            best = best.min((w.inv() - q).norm());
        }
    }
    best
}

fn gap(a: ExtPoint, b: ExtPoint) -> f64 {
    match (a, b) {
        (ExtPoint::Infinity, ExtPoint::Infinity) => 0.0,
        (ExtPoint::Finite(x), ExtPoint::Finite(y)) => (x - y).norm() / x.norm().max(1.0),
        _ => f64::INFINITY,
    }
}

/// A connected chain of segments with the chart switch radius and the
/// clearance every point must keep from the singular points.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    segments: Vec<Segment>,
    r_switch: f64,
    clearance: f64,
}

impl PathSpec {
    pub fn new(segments: Vec<Segment>, r_switch: f64, clearance: f64) -> Result<Self> {
        if !(r_switch > 1.0) {
            return Err(Error::Input(format!(
                "chart switch radius {r_switch} must exceed 1"
            )));
        }
        if !(clearance >= 0.0) {
            return Err(Error::Input(format!(
                "clearance {clearance} must be nonnegative"
            )));
        }
        for (k, pair) in segments.windows(2).enumerate() {
            let g = gap(pair[0].end(), pair[1].start());
            if !(g < SEGMENT_GAP_TOL) {
                return Err(Error::Path(format!(
                    "segments {k} and {} do not connect (gap {g:e})",
                    k + 1
                )));
            }
        }
        Ok(Self {
            segments,
            r_switch,
            clearance,
        })
    }

    pub fn empty(r_switch: f64, clearance: f64) -> Self {
        Self {
            segments: Vec::new(),
            r_switch,
            clearance,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn r_switch(&self) -> f64 {
        self.r_switch
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn start(&self) -> Option<ExtPoint> {
        self.segments.first().map(|s| s.start())
    }

    pub fn end(&self) -> Option<ExtPoint> {
        self.segments.last().map(|s| s.end())
    }

    pub fn is_closed(&self) -> bool {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => gap(a, b) < SEGMENT_GAP_TOL,
            _ => true,
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(|s| s.reversed()).collect(),
            ..self.clone()
        }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &PathSpec) -> Result<Self> {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        Self::new(segments, self.r_switch, self.clearance.min(other.clearance))
    }

    /// Smallest distance from the path to any singular point of the form.
    pub fn min_distance(&self, form: &LogConnectionForm) -> f64 {
        let sing = form.singular_points();
        self.segments
            .iter()
            .flat_map(|s| sing.iter().map(move |q| s.distance_to(*q)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_clearance(&self, form: &LogConnectionForm) -> Result<()> {
        for (k, seg) in self.segments.iter().enumerate() {
            for q in form.singular_points() {
                let d = seg.distance_to(q);
                if d < self.clearance {
                    return Err(Error::Path(format!(
                        "segment {k} passes within {d:e} of singular point {q} (clearance {:e})",
                        self.clearance
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub y_end: CMatrix,
    pub steps: usize,
    pub rejected: usize,
    pub max_error_estimate: f64,
    /// `|det Y_end − det Y₀·exp(∫ tr A dz)|`.
    pub det_defect: f64,
    /// `∫ tr A dz` along the path.
    pub trace_integral: Complex64,
}

/// Transport `Y₀` along `path`, solving `dY/dz = A(z) Y`.
pub fn transport(
    form: &LogConnectionForm,
    path: &PathSpec,
    y0: &CMatrix,
    opts: &StepperOptions,
) -> Result<TransportResult> {
    let p = form.rank();
    if y0.nrows() != p || y0.ncols() != p {
        return Err(Error::Input(format!("initial matrix must be {p}x{p}")));
    }
    path.check_clearance(form)?;
    let mut state = Vec::with_capacity(p * p + 1);
    push_row_major(y0, &mut state);
    state.push(c(0.0, 0.0));
    let mut stats = IntegrationStats::default();
    for seg in &path.segments {
        let rhs = |s: f64, y: &[Complex64], dy: &mut [Complex64]| -> Result<()> {
            let m = seg.integrand(form, path.r_switch, s)?;
            let ymat = from_row_major(p, y);
            let prod = &m * ymat;
            for i in 0..p {
                for j in 0..p {
                    dy[i * p + j] = prod[(i, j)];
                }
            }
            dy[p * p] = m.trace();
            Ok(())
        };
        let (next, seg_stats) = integrate(rhs, 0.0, 1.0, &state, opts)?;
        stats.merge(&seg_stats);
        state = next;
    }
    let y_end = from_row_major(p, &state);
    let trace_integral = state[p * p];
    let det_defect = (y_end.determinant() - y0.determinant() * trace_integral.exp()).norm();
    if !y_end.iter().all(|z| z.is_finite()) {
        return Err(Error::Numerical {
            at: 1.0,
            message: "transport produced non-finite entries".into(),
        });
    }
    Ok(TransportResult {
        y_end,
        steps: stats.accepted,
        rejected: stats.rejected,
        max_error_estimate: stats.max_error_estimate,
        det_defect,
        trace_integral,
    })
}

/// Pinwheel loop around `poles[index]`: approach to `aᵢ + δ·u`, a full
/// counterclockwise circle of radius δ, and the approach reversed.
///
/// From a finite basepoint `u` points from the pole to the basepoint; from ∞
/// the approach is the radial ray and `u = aᵢ/|aᵢ|`.
pub fn loop_around(
    poles: &[Complex64],
    index: usize,
    basepoint: ExtPoint,
    delta: f64,
    r_switch: f64,
) -> Result<PathSpec> {
    let a = *poles
        .get(index)
        .ok_or_else(|| Error::Input(format!("pole index {index} out of range")))?;
    if !(delta > 0.0) {
        return Err(Error::Path(format!("clearance {delta} must be positive")));
    }
    for (j, b) in poles.iter().enumerate() {
        if j != index && (a - b).norm() <= 2.0 * delta {
            return Err(Error::Path(format!(
                "clearance {delta} is not below half the distance between poles {index} and {j}"
            )));
        }
    }
    let (dir, approach) = match basepoint {
        ExtPoint::Finite(b) => {
            let d = b - a;
            if d.norm() <= delta {
                return Err(Error::Path(format!(
                    "basepoint {b} lies within {delta} of pole {index}"
                )));
            }
            let u = d / d.norm();
            (
                u,
                Segment::Line {
                    from: b,
                    to: a + u * delta,
                },
            )
        }
        ExtPoint::Infinity => {
            let u = a / a.norm();
            (u, Segment::from_infinity(a + u * delta))
        }
    };
    let circle = Segment::circle(a, delta, dir.arg(), true);
    let circle_start = a + Complex64::from_polar(delta, dir.arg());
    let approach = match approach {
        Segment::Line { from, .. } => Segment::Line {
            from,
            to: circle_start,
        },
        Segment::WLine { from, .. } => Segment::WLine {
            from,
            to: circle_start.inv(),
        },
        other => other,
    };
    for (j, b) in poles.iter().enumerate() {
        if j != index && approach.distance_to(*b) < delta {
            return Err(Error::Path(format!(
                "approach to pole {index} passes within {delta} of pole {j}"
            )));
        }
    }
    if approach.distance_to(c(0.0, 0.0)) < delta {
        return Err(Error::Path(format!(
            "approach to pole {index} passes near the origin"
        )));
    }
    // The circle itself sits exactly at distance δ from its own pole.
    PathSpec::new(
        vec![approach, circle, approach.reversed()],
        r_switch,
        delta * (1.0 - 1e-9),
    )
}

/// Monodromy of a closed loop, in the standard basis at its basepoint.
pub fn monodromy(
    form: &LogConnectionForm,
    path: &PathSpec,
    opts: &StepperOptions,
) -> Result<CMatrix> {
    monodromy_with_stats(form, path, opts).map(|r| r.y_end)
}

pub fn monodromy_with_stats(
    form: &LogConnectionForm,
    path: &PathSpec,
    opts: &StepperOptions,
) -> Result<TransportResult> {
    if !path.is_closed() {
        return Err(Error::Input("monodromy requires a closed loop".into()));
    }
    transport(form, path, &identity(form.rank()), opts)
}

/// Numerical settings shared by every transport of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportContext {
    pub r_switch: f64,
    pub clearance: f64,
    pub stepper: StepperOptions,
}

impl TransportContext {
    pub fn path(&self, segments: Vec<Segment>) -> Result<PathSpec> {
        PathSpec::new(segments, self.r_switch, self.clearance)
    }
}

/// `min(pole separation, pole-to-boundary distance)/4`.
pub fn default_clearance(form: &LogConnectionForm, polygon: &FundamentalPolygon) -> f64 {
    let boundary = form
        .poles()
        .iter()
        .map(|a| polygon.boundary_distance(*a))
        .fold(f64::INFINITY, f64::min);
    form.min_pole_separation().min(boundary) / 4.0
}

/// `4·max(|aᵢ|, |finite vertices|, 1)`.
pub fn default_r_switch(form: &LogConnectionForm, polygon: &FundamentalPolygon) -> f64 {
    let m = form
        .poles()
        .iter()
        .copied()
        .chain(polygon.finite_vertices())
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    4.0 * m
}

/// Pinwheel monodromies of all poles based at ∞, computed concurrently.
pub fn pole_monodromies(
    form: &LogConnectionForm,
    delta: f64,
    r_switch: f64,
    opts: &StepperOptions,
) -> Result<Vec<TransportResult>> {
    (0..form.poles().len())
        .into_par_iter()
        .map(|i| {
            let path = loop_around(form.poles(), i, ExtPoint::Infinity, delta, r_switch)?;
            monodromy_with_stats(form, &path, opts)
        })
        .collect()
}

/// Outcome of comparing a loop around all poles with the ordered product of
/// pinwheel monodromies.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProduct {
    /// Defect for the angular ordering.
    pub defect: f64,
    /// Defect for the reversed ordering, for diagnostics.
    pub reversed_defect: f64,
    /// Pole indices in the order they enter the product, rightmost first.
    pub order: Vec<usize>,
    pub big_loop: CMatrix,
    pub product: CMatrix,
}

/// Loop based at ∞ enclosing every pole but not the origin: a radial ray at
/// angle `theta` down to `|z| = rho`, the circle `|z| = rho` clockwise (which
/// encircles the poles positively on the sphere), and the ray back.
pub fn enclosing_loop(theta: f64, rho: f64, r_switch: f64, clearance: f64) -> Result<PathSpec> {
    let foot = Complex64::from_polar(rho, theta);
    let ray = Segment::from_infinity(foot);
    let circle = Segment::circle(c(0.0, 0.0), rho, theta, false);
    PathSpec::new(vec![ray, circle, ray.reversed()], r_switch, clearance)
}

/// Middle of the widest angular gap between the pole arguments.
fn widest_gap_angle(poles: &[Complex64]) -> f64 {
    let mut args: Vec<f64> = poles.iter().map(|a| a.arg()).collect();
    args.sort_by(|a, b| a.total_cmp(b));
    if args.is_empty() {
        return 0.0;
    }
    let mut best = (
        args[0] + 2.0 * PI - args[args.len() - 1],
        args[args.len() - 1],
    );
    for w in args.windows(2) {
        if w[1] - w[0] > best.0 {
            best = (w[1] - w[0], w[0]);
        }
    }
    best.1 + best.0 / 2.0
}

/// Compares the monodromy of [`enclosing_loop`] with the ordered product of
/// pinwheel monodromies, all based at the regular point ∞.
pub fn boundary_product_check(
    form: &LogConnectionForm,
    basepoint: ExtPoint,
    delta: f64,
    r_switch: f64,
    opts: &StepperOptions,
) -> Result<BoundaryProduct> {
    if !basepoint.is_infinite() {
        return Err(Error::Input(
            "boundary product check is based at the regular vertex ∞".into(),
        ));
    }
    let poles = form.poles();
    if poles.is_empty() {
        return Err(Error::Input("no poles to enclose".into()));
    }
    let min_abs = poles.iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min);
    let rho = 0.5 * (1.0 + min_abs);
    if min_abs - rho < delta {
        return Err(Error::Path(format!(
            "no room for an enclosing circle between the unit disc and the poles at clearance {delta}"
        )));
    }
    let theta = widest_gap_angle(poles);
    let big = enclosing_loop(theta, rho, r_switch, delta)?;
    let (big_loop, pinwheels) = rayon::join(
        || monodromy(form, &big, opts),
        || pole_monodromies(form, delta, r_switch, opts),
    );
    let big_loop = big_loop?;
    let pinwheels: Vec<CMatrix> = pinwheels?.into_iter().map(|r| r.y_end).collect();

    // Angle of each pole seen from ∞ in the w chart, measured from the
    // enclosing loop's spoke.
    let mut order: Vec<usize> = (0..poles.len()).collect();
    let rel = |i: usize| (theta - poles[i].arg()).rem_euclid(2.0 * PI);
    order.sort_by(|&i, &j| rel(i).total_cmp(&rel(j)));
    let product_of = |ord: &[usize]| {
        ord.iter()
            .fold(identity(form.rank()), |acc, &i| &pinwheels[i] * acc)
    };
    let product = product_of(&order);
    let mut rev = order.clone();
    rev.reverse();
    let reversed = product_of(&rev);
    Ok(BoundaryProduct {
        defect: dist(&big_loop, &product),
        reversed_defect: dist(&big_loop, &reversed),
        order,
        big_loop,
        product,
    })
}
