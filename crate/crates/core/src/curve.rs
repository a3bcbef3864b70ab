// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Planar parametric curves: line segments, Bézier curves and clamped B-splines.
//!
//! Curves keep their native representation. Segments and Bézier curves live
//! on `[0, 1]`; a B-spline lives on `[knots[0], knots[last]]`. Restriction
//! always produces a curve on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::basis::{self, Side};
use crate::error::{Error, Result};
use crate::gauss::gauss_legendre;
use crate::geom::{BBox, Point2, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Segment,
    Bezier,
    Bspline,
}

/// A planar parametric curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct ParamCurve {
    kind: CurveKind,
    degree: usize,
    knots: Vec<f64>,
    points: Vec<Point2>,
}

/// Which end of a restriction a tangent is taken at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Lo,
    Hi,
}

/// The piece `c|[t_lo, t_hi]` of curve `curve_id`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRestriction {
    pub curve_id: usize,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// A single polynomial piece of a curve in Bézier form, with the parameter
/// interval it covers on the parent curve.
#[derive(Clone, Debug, PartialEq)]
pub struct BezierPiece {
    pub points: Vec<Point2>,
    pub t0: f64,
    pub t1: f64,
}

impl ParamCurve {
    pub fn segment(p0: Point2, p1: Point2) -> ParamCurve {
        ParamCurve { kind: CurveKind::Segment, degree: 1, knots: Vec::new(), points: vec![p0, p1] }
    }

    pub fn bezier(points: Vec<Point2>) -> Result<ParamCurve> {
        if points.is_empty() {
            return Err(Error::schema("points", "a Bézier curve needs at least one control point"));
        }
        check_points(&points)?;
        Ok(ParamCurve { kind: CurveKind::Bezier, degree: points.len() - 1, knots: Vec::new(), points })
    }

    pub fn bspline(degree: usize, knots: Vec<f64>, points: Vec<Point2>) -> Result<ParamCurve> {
        if degree == 0 {
            return Err(Error::schema("degree", "B-spline degree must be at least 1"));
        }
        check_points(&points)?;
        basis::validate_knots(degree, &knots, points.len(), "knots")?;
        Ok(ParamCurve { kind: CurveKind::Bspline, degree, knots, points })
    }

    /// A clamped B-spline of degree 1 through the given vertices, on `[0, 1]`
    /// with uniformly spaced knots.
    pub fn polyline(points: Vec<Point2>) -> Result<ParamCurve> {
        let n = points.len();
        if n < 2 {
            return Err(Error::schema("points", "a polyline needs at least two points"));
        }
        if n == 2 {
            return Ok(ParamCurve::segment(points[0], points[1]));
        }
        let interior: Vec<f64> = (1..n - 1).map(|i| i as f64 / (n - 1) as f64).collect();
        ParamCurve::bspline(1, basis::clamped_knots(1, &interior), points)
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            CurveKind::Bspline => (self.knots[0], self.knots[self.knots.len() - 1]),
            _ => (0.0, 1.0),
        }
    }

    pub fn start(&self) -> Point2 {
        self.points[0]
    }

    pub fn end(&self) -> Point2 {
        self.points[self.points.len() - 1]
    }

    /// Whether the curve returns to its starting point (within `tol`).
    pub fn is_closed(&self, tol: f64) -> bool {
        self.points.len() > 2 && self.start().distance(self.end()) <= tol
    }

    /// True when some interior knot lowers continuity below C².
    pub fn reduced_continuity(&self) -> bool {
        self.kind == CurveKind::Bspline
            && basis::interior_breakpoints(self.degree, &self.knots).iter().any(|&(_, m)| self.degree < m + 2)
    }

    fn check_param(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (hi - lo);
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::ParameterOutOfDomain { t, lo, hi });
        }
        Ok(())
    }

    /// Point at parameter `t`.
    pub fn evaluate(&self, t: f64) -> Result<Point2> {
        self.check_param(t)?;
        Ok(self.eval(t))
    }

    /// Evaluation without the domain check; parameters are clamped.
    pub fn eval(&self, t: f64) -> Point2 {
        let (lo, hi) = self.domain();
        let t = t.clamp(lo, hi);
        match self.kind {
            CurveKind::Segment => self.points[0].lerp(self.points[1], t),
            CurveKind::Bezier => de_casteljau(&self.points, t),
            CurveKind::Bspline => basis::eval(self.degree, &self.knots, &self.points, t, Side::Right),
        }
    }

    /// Derivative of order 1 or 2 at `t`.
    pub fn derivative(&self, t: f64, order: usize) -> Result<Vec2> {
        if order == 0 || order > 2 {
            return Err(Error::UnsupportedDerivativeOrder(order));
        }
        self.check_param(t)?;
        let (_, hi) = self.domain();
        let side = if t >= hi { Side::Left } else { Side::Right };
        Ok(self.derivs(t, side)[order])
    }

    /// Position, first and second derivative, using the one-sided limit
    /// `side` at knots.
    pub fn derivs(&self, t: f64, side: Side) -> [Vec2; 3] {
        let (lo, hi) = self.domain();
        let t = t.clamp(lo, hi);
        match self.kind {
            CurveKind::Segment => [self.points[0].lerp(self.points[1], t), self.points[1] - self.points[0], Vec2::ZERO],
            CurveKind::Bezier => bezier_derivs(&self.points, t),
            CurveKind::Bspline => {
                let d = basis::eval_ders(self.degree, &self.knots, &self.points, t, 2, side);
                [d[0], d[1], d[2]]
            }
        }
    }

    /// Unit tangent at an end of `restriction`, oriented into the restricted piece.
    pub fn tangent_into_interior(&self, restriction: &CurveRestriction, endpoint: Endpoint) -> Result<Vec2> {
        let (t, side, sign) = match endpoint {
            Endpoint::Lo => (restriction.t_lo, Side::Right, 1.0),
            Endpoint::Hi => (restriction.t_hi, Side::Left, -1.0),
        };
        self.check_param(t)?;
        let d = self.derivs(t, side)[1];
        (d * sign).normalize().ok_or(Error::DegenerateTangent { curve: restriction.curve_id, t })
    }

    /// Signed curvature `(x'y'' - y'x'') / |c'|³` at `t`.
    pub fn signed_curvature(&self, t: f64) -> Result<f64> {
        self.check_param(t)?;
        let (_, hi) = self.domain();
        let side = if t >= hi { Side::Left } else { Side::Right };
        let [_, d1, d2] = self.derivs(t, side);
        curvature_from(d1, d2).ok_or(Error::UndefinedCurvature { t })
    }

    /// Bounding box of the control polygon; contains the curve.
    pub fn bbox(&self) -> BBox {
        BBox::from_points(&self.points)
    }

    /// The same point set traversed backwards, on the same domain.
    pub fn reverse(&self) -> ParamCurve {
        let mut points = self.points.clone();
        points.reverse();
        let knots = if self.kind == CurveKind::Bspline {
            let (lo, hi) = self.domain();
            self.knots.iter().rev().map(|&k| lo + hi - k).collect()
        } else {
            Vec::new()
        };
        ParamCurve { kind: self.kind, degree: self.degree, knots, points }
    }

    /// The piece over `[t_lo, t_hi]`, reparameterized to `[0, 1]`.
    pub fn restrict(&self, t_lo: f64, t_hi: f64) -> Result<ParamCurve> {
        if !(t_lo < t_hi) {
            return Err(Error::InvertedInterval { lo: t_lo, hi: t_hi });
        }
        self.check_param(t_lo)?;
        self.check_param(t_hi)?;
        let (lo, hi) = self.domain();
        let t_lo = t_lo.clamp(lo, hi);
        let t_hi = t_hi.clamp(lo, hi);
        Ok(match self.kind {
            CurveKind::Segment => ParamCurve::segment(self.eval(t_lo), self.eval(t_hi)),
            CurveKind::Bezier => {
                let points = bezier_subsegment(&self.points, t_lo, t_hi);
                ParamCurve { kind: CurveKind::Bezier, degree: self.degree, knots: Vec::new(), points }
            }
            CurveKind::Bspline => {
                // a bound a rounding error away from a knot would leave a
                // vanishing span behind
                let snap = |t: f64| {
                    let near = self.knots.iter().copied().min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()));
                    near.filter(|k| (k - t).abs() <= 1e-12 * (hi - lo)).unwrap_or(t)
                };
                let (t_lo, t_hi) = (snap(t_lo), snap(t_hi));
                if t_lo >= t_hi {
                    return Err(Error::InvertedInterval { lo: t_lo, hi: t_hi });
                }
                let (k, c) = basis::extract_interval(self.degree, &self.knots, &self.points, t_lo, t_hi);
                let scale = 1.0 / (t_hi - t_lo);
                let mut knots: Vec<f64> = k.iter().map(|&x| ((x - t_lo) * scale).clamp(0.0, 1.0)).collect();
                for x in knots.iter_mut().take(self.degree + 1) {
                    *x = 0.0;
                }
                let n = knots.len();
                for x in knots.iter_mut().skip(n - self.degree - 1) {
                    *x = 1.0;
                }
                ParamCurve { kind: CurveKind::Bspline, degree: self.degree, knots, points: c }
            }
        })
    }

    /// Clamped B-spline form `(degree, knots, points)` of any curve.
    pub fn as_bspline(&self) -> (usize, Vec<f64>, Vec<Point2>) {
        match self.kind {
            CurveKind::Bspline => (self.degree, self.knots.clone(), self.points.clone()),
            _ => (self.degree, basis::clamped_knots(self.degree, &[]), self.points.clone()),
        }
    }

    /// Concatenates `self` on `[0, s]` and `other` on `[s, 1]` where `s` is
    /// `split`; the end of `self` must meet the start of `other`.
    pub fn join(&self, other: &ParamCurve, split: f64) -> ParamCurve {
        let (d1, k1, mut p1) = self.as_bspline();
        let (d2, k2, p2) = other.as_bspline();
        let d = d1.max(d2);
        let (k1, p1b) = elevate_to(d1, k1, p1.clone(), d);
        p1 = p1b;
        let (k2, p2) = elevate_to(d2, k2, p2, d);
        let (a1, b1) = (k1[0], k1[k1.len() - 1]);
        let (a2, b2) = (k2[0], k2[k2.len() - 1]);
        let mut knots: Vec<f64> = k1[..k1.len() - 1].iter().map(|&x| split * (x - a1) / (b1 - a1)).collect();
        for x in knots.iter_mut().rev().take(d) {
            *x = split;
        }
        knots.extend(k2[d + 1..].iter().map(|&x| split + (1.0 - split) * (x - a2) / (b2 - a2)));
        let n = knots.len();
        for x in knots.iter_mut().skip(n - d - 1) {
            *x = 1.0;
        }
        let joint = p1[p1.len() - 1].midpoint(p2[0]);
        let last = p1.len() - 1;
        p1[last] = joint;
        p1.extend_from_slice(&p2[1..]);
        ParamCurve { kind: CurveKind::Bspline, degree: d, knots, points: p1 }
    }

    /// Polynomial pieces in Bézier form, in parameter order.
    pub fn bezier_pieces(&self) -> Vec<BezierPiece> {
        match self.kind {
            CurveKind::Segment | CurveKind::Bezier => {
                vec![BezierPiece { points: self.points.clone(), t0: 0.0, t1: 1.0 }]
            }
            CurveKind::Bspline => {
                let bps = basis::breakpoints(&self.knots);
                bps.windows(2)
                    .map(|w| {
                        let (_, c) = basis::extract_interval(self.degree, &self.knots, &self.points, w[0], w[1]);
                        BezierPiece { points: c, t0: w[0], t1: w[1] }
                    })
                    .collect()
            }
        }
    }

    /// Distinct breakpoints of the parameter domain (both ends included).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            CurveKind::Bspline => basis::breakpoints(&self.knots),
            _ => vec![0.0, 1.0],
        }
    }

    /// Arc length between two parameters.
    pub fn arc_length(&self, t0: f64, t1: f64) -> f64 {
        let g = gauss_legendre(16);
        let bps = self.breakpoints();
        let (a, b) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let mut cuts = vec![a];
        cuts.extend(bps.iter().copied().filter(|&k| k > a && k < b));
        cuts.push(b);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let span_side = |t: f64| if t >= mid { Side::Left } else { Side::Right };
            total += g.integrate(w[0], w[1], |t| self.derivs(t, span_side(t))[1].hypot());
        }
        total
    }

    /// Parameter at which the arc length from the domain start reaches
    /// `fraction` of the total.
    pub fn param_at_arc_fraction(&self, fraction: f64) -> f64 {
        let (lo, hi) = self.domain();
        let total = self.arc_length(lo, hi);
        if total <= 0.0 {
            return lo + fraction * (hi - lo);
        }
        let target = fraction * total;
        let (mut a, mut b) = (lo, hi);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if self.arc_length(lo, m) < target {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-15 * (hi - lo).max(1.0) {
                break;
            }
        }
        0.5 * (a + b)
    }

    /// Translates every control point.
    pub fn translated(&self, by: Vec2) -> ParamCurve {
        let mut c = self.clone();
        for p in &mut c.points {
            *p += by;
        }
        c
    }
}

fn check_points(points: &[Point2]) -> Result<()> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::schema("points", "control points must be finite"));
    }
    Ok(())
}

/// Curvature from first and second derivatives.
pub fn curvature_from(d1: Vec2, d2: Vec2) -> Option<f64> {
    let speed = d1.hypot();
    if speed <= f64::MIN_POSITIVE.sqrt() {
        return None;
    }
    Some(d1.cross(d2) / (speed * speed * speed))
}

pub fn de_casteljau(points: &[Point2], t: f64) -> Point2 {
    let mut tmp = points.to_vec();
    let n = tmp.len();
    for k in 1..n {
        for i in 0..n - k {
            tmp[i] = tmp[i].lerp(tmp[i + 1], t);
        }
    }
    tmp[0]
}

/// Splits Bézier control points at `t` into left and right halves.
pub fn bezier_split(points: &[Point2], t: f64) -> (Vec<Point2>, Vec<Point2>) {
    let n = points.len();
    let mut tmp = points.to_vec();
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    left.push(tmp[0]);
    right.push(tmp[n - 1]);
    for k in 1..n {
        for i in 0..n - k {
            tmp[i] = tmp[i].lerp(tmp[i + 1], t);
        }
        left.push(tmp[0]);
        right.push(tmp[n - 1 - k]);
    }
    right.reverse();
    (left, right)
}

/// Control points of the Bézier piece over `[a, b] ⊆ [0, 1]`.
pub fn bezier_subsegment(points: &[Point2], a: f64, b: f64) -> Vec<Point2> {
    if a <= 0.0 && b >= 1.0 {
        return points.to_vec();
    }
    let (left, _) = if b < 1.0 { bezier_split(points, b) } else { (points.to_vec(), Vec::new()) };
    if a <= 0.0 {
        return left;
    }
    let (_, right) = bezier_split(&left, a / b);
    right
}

/// Position, first and second derivative of a Bézier curve.
pub fn bezier_derivs(points: &[Point2], t: f64) -> [Vec2; 3] {
    let n = points.len() - 1;
    let p = de_casteljau(points, t);
    if n == 0 {
        return [p, Vec2::ZERO, Vec2::ZERO];
    }
    let d1: Vec<Vec2> = points.windows(2).map(|w| (w[1] - w[0]) * n as f64).collect();
    let v1 = de_casteljau(&d1, t);
    if n == 1 {
        return [p, v1, Vec2::ZERO];
    }
    let d2: Vec<Vec2> = d1.windows(2).map(|w| (w[1] - w[0]) * (n - 1) as f64).collect();
    [p, v1, de_casteljau(&d2, t)]
}

/// Degree elevation of a clamped B-spline by repeated knot duplication.
///
/// Elevation by one raises every distinct knot's multiplicity by one, so the
/// continuity class is preserved. Implemented through Bézier decomposition.
fn elevate_to(degree: usize, knots: Vec<f64>, points: Vec<Point2>, target: usize) -> (Vec<f64>, Vec<Point2>) {
    if degree >= target {
        return (knots, points);
    }
    let bps = basis::breakpoints(&knots);
    let mult: Vec<usize> = bps.iter().map(|&b| basis::multiplicity(&knots, b)).collect();
    let mut pieces: Vec<Vec<Point2>> = Vec::new();
    for w in bps.windows(2) {
        let (_, c) = basis::extract_interval(degree, &knots, &points, w[0], w[1]);
        let mut c = c;
        let mut d = degree;
        while d < target {
            c = elevate_bezier(&c);
            d += 1;
        }
        pieces.push(c);
    }
    // Assemble a C0 B-spline from the elevated pieces, then remove the extra
    // knots that the original continuity allows.
    let mut new_knots = vec![bps[0]; target + 1];
    let mut new_points = pieces[0].clone();
    for (i, piece) in pieces.iter().enumerate().skip(1) {
        new_knots.extend(std::iter::repeat_n(bps[i], target));
        new_points.extend_from_slice(&piece[1..]);
    }
    new_knots.extend(std::iter::repeat_n(bps[bps.len() - 1], target + 1));
    let _ = mult;
    (new_knots, new_points)
}

fn elevate_bezier(points: &[Point2]) -> Vec<Point2> {
    let n = points.len() - 1;
    let mut out = Vec::with_capacity(n + 2);
    out.push(points[0]);
    for i in 1..=n {
        let a = i as f64 / (n + 1) as f64;
        out.push(points[i - 1] * a + points[i] * (1.0 - a));
    }
    out.push(points[n]);
    out
}

/// Serialized form of [`ParamCurve`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveJson {
    pub kind: CurveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<f64>>,
    pub points: Vec<[f64; 2]>,
}

impl TryFrom<CurveJson> for ParamCurve {
    type Error = Error;

    fn try_from(j: CurveJson) -> Result<ParamCurve> {
        let points: Vec<Point2> = j.points.iter().map(|&p| p.into()).collect();
        match j.kind {
            CurveKind::Segment => {
                if j.knots.is_some() {
                    return Err(Error::schema("knots", "only B-spline curves carry knots"));
                }
                if points.len() != 2 {
                    return Err(Error::schema("points", "a segment has exactly two points"));
                }
                if j.degree.is_some_and(|d| d != 1) {
                    return Err(Error::schema("degree", "a segment has degree 1"));
                }
                check_points(&points)?;
                Ok(ParamCurve::segment(points[0], points[1]))
            }
            CurveKind::Bezier => {
                if j.knots.is_some() {
                    return Err(Error::schema("knots", "only B-spline curves carry knots"));
                }
                if let Some(d) = j.degree {
                    if d + 1 != points.len() {
                        return Err(Error::schema("points", format!("a degree-{d} Bézier curve has {} points", d + 1)));
                    }
                }
                ParamCurve::bezier(points)
            }
            CurveKind::Bspline => {
                let knots = j.knots.ok_or_else(|| Error::schema("knots", "required for B-spline curves"))?;
                let degree = j.degree.ok_or_else(|| Error::schema("degree", "required for B-spline curves"))?;
                ParamCurve::bspline(degree, knots, points)
            }
        }
    }
}

impl From<ParamCurve> for CurveJson {
    fn from(c: ParamCurve) -> CurveJson {
        CurveJson {
            kind: c.kind,
            degree: Some(c.degree),
            knots: (c.kind == CurveKind::Bspline).then_some(c.knots),
            points: c.points.iter().map(|&p| p.into()).collect(),
        }
    }
}
