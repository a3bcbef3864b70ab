// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Curve–curve and self intersection by bounding-box subdivision of Bézier
//! pieces followed by Newton refinement on the curves themselves.

use crate::basis::Side;
use crate::curve::{bezier_split, BezierPiece, ParamCurve};
use crate::error::{Error, Result};
use crate::geom::{BBox, Point2, Vec2};

/// One intersection point between two curves (or two parts of one curve).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intersection {
    pub t_a: f64,
    pub t_b: f64,
    pub point: Point2,
    /// Set when the tangents are (nearly) parallel at the point.
    pub tangential: bool,
}

/// Sine of the tangent angle below which an intersection counts as tangential.
const TANGENTIAL_SIN: f64 = 1e-5;
const MAX_LEAVES: usize = 2_000_000;
const MAX_DEPTH: usize = 52;

/// All intersections of `a` and `b` within distance `tol`.
pub fn intersect_curve_pair(a: &ParamCurve, b: &ParamCurve, tol: f64) -> Result<Vec<Intersection>> {
    intersect_with_ids(a, 0, b, 1, tol)
}

/// As [`intersect_curve_pair`], reporting overlaps with the given curve ids.
pub fn intersect_with_ids(a: &ParamCurve, ia: usize, b: &ParamCurve, ib: usize, tol: f64) -> Result<Vec<Intersection>> {
    let mut search = Search::new(a, ia, b, ib, tol);
    for pa in &a.bezier_pieces() {
        for pb in &b.bezier_pieces() {
            search.recurse(pa, pb, 0)?;
        }
    }
    Ok(search.finish())
}

/// Points where a curve crosses itself. `t_a < t_b` in every result.
pub fn self_intersections(c: &ParamCurve, id: usize, tol: f64) -> Result<Vec<Intersection>> {
    let mut pieces = Vec::new();
    for p in c.bezier_pieces() {
        split_turning(p, 0, &mut pieces);
    }
    let (lo, hi) = c.domain();
    let eps = 1e-7 * (hi - lo);
    let closed = c.is_closed(tol);
    let mut search = Search::new(c, id, c, id, tol);
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            search.recurse(&pieces[i], &pieces[j], 0)?;
        }
    }
    let mut hits = search.finish();
    for h in &mut hits {
        if h.t_a > h.t_b {
            std::mem::swap(&mut h.t_a, &mut h.t_b);
        }
    }
    hits.retain(|h| {
        let trivial = (h.t_a - h.t_b).abs() <= eps;
        let seam = closed && (h.t_a - lo).abs() <= eps && (hi - h.t_b).abs() <= eps;
        !trivial && !seam
    });
    Ok(hits)
}

/// Splits a piece until its hodograph turns by less than a right angle, so
/// no piece can meet itself.
fn split_turning(piece: BezierPiece, depth: usize, out: &mut Vec<BezierPiece>) {
    let d: Vec<Vec2> = piece.points.windows(2).map(|w| w[1] - w[0]).filter(|v| v.hypot() > 0.0).collect();
    let sum = d.iter().fold(Vec2::ZERO, |acc, v| acc + v.normalize().unwrap_or(Vec2::ZERO));
    let ok = match sum.normalize() {
        Some(axis) => d.iter().all(|v| v.dot(axis) > std::f64::consts::FRAC_1_SQRT_2 * v.hypot()),
        None => d.is_empty(),
    };
    if ok || depth >= 24 {
        out.push(piece);
        return;
    }
    let (l, r) = bezier_split(&piece.points, 0.5);
    let tm = 0.5 * (piece.t0 + piece.t1);
    split_turning(BezierPiece { points: l, t0: piece.t0, t1: tm }, depth + 1, out);
    split_turning(BezierPiece { points: r, t0: tm, t1: piece.t1 }, depth + 1, out);
}

struct Search<'a> {
    a: &'a ParamCurve,
    b: &'a ParamCurve,
    ia: usize,
    ib: usize,
    tol: f64,
    scale: f64,
    leaves: usize,
    found: Vec<(Intersection, f64)>,
}

impl<'a> Search<'a> {
    fn new(a: &'a ParamCurve, ia: usize, b: &'a ParamCurve, ib: usize, tol: f64) -> Self {
        let scale = a.bbox().union(b.bbox()).diagonal().max(f64::MIN_POSITIVE);
        Search { a, b, ia, ib, tol, scale, leaves: 0, found: Vec::new() }
    }

    fn recurse(&mut self, pa: &BezierPiece, pb: &BezierPiece, depth: usize) -> Result<()> {
        let half = 0.5 * self.tol;
        let ba = BBox::from_points(&pa.points).inflate(half);
        let bb = BBox::from_points(&pb.points).inflate(half);
        if !ba.overlaps(&bb) {
            return Ok(());
        }
        let fa = flatness(&pa.points);
        let fb = flatness(&pb.points);
        let leaf_flat = 0.25 * self.tol;
        if (fa <= leaf_flat && fb <= leaf_flat) || depth >= MAX_DEPTH {
            return self.leaf(pa, pb, fa, fb);
        }
        if fa >= fb {
            let (l, r) = split_piece(pa);
            self.recurse(&l, pb, depth + 1)?;
            self.recurse(&r, pb, depth + 1)
        } else {
            let (l, r) = split_piece(pb);
            self.recurse(pa, &l, depth + 1)?;
            self.recurse(pa, &r, depth + 1)
        }
    }

    fn leaf(&mut self, pa: &BezierPiece, pb: &BezierPiece, fa: f64, fb: f64) -> Result<()> {
        self.leaves += 1;
        let (a0, a1) = (pa.points[0], pa.points[pa.points.len() - 1]);
        let (b0, b1) = (pb.points[0], pb.points[pb.points.len() - 1]);
        if self.leaves > MAX_LEAVES {
            return Err(Error::Overlap { a: self.ia, b: self.ib, at: a0.midpoint(a1) });
        }
        let (s, u, dist) = closest_segments(a0, a1, b0, b1);
        if dist > self.tol + fa + fb {
            return Ok(());
        }
        let ta = pa.t0 + s * (pa.t1 - pa.t0);
        let tb = pb.t0 + u * (pb.t1 - pb.t0);
        if let Some(hit) = self.refine(ta, tb) {
            if hit.0.tangential {
                self.check_overlap(pa, pb, ta, tb)?;
            }
            self.found.push(hit);
        }
        Ok(())
    }

    /// Probes well beyond a tangential leaf pair to tell a tangency from a
    /// shared stretch of curve.
    fn check_overlap(&self, pa: &BezierPiece, pb: &BezierPiece, ta: f64, tb: f64) -> Result<()> {
        let da = pa.points[pa.points.len() - 1] - pa.points[0];
        let db = pb.points[pb.points.len() - 1] - pb.points[0];
        let (Some(ua), Some(_)) = (da.normalize(), db.normalize()) else {
            return Ok(());
        };
        let a0 = pa.points[0];
        let len = da.hypot();
        let q0 = (pb.points[0] - a0).dot(ua);
        let q1 = (pb.points[pb.points.len() - 1] - a0).dot(ua);
        let (lo_s, hi_s) = (q0.min(q1).max(0.0), q0.max(q1).min(len));
        if hi_s - lo_s <= 4.0 * self.tol {
            return Ok(());
        }
        let w = pa.t1 - pa.t0;
        for k in 1..=5 {
            let frac = (lo_s + (hi_s - lo_s) * k as f64 / 6.0) / len;
            let (_, d) = closest_point(self.b, self.a.eval(pa.t0 + frac * w), tb);
            if d > self.tol {
                return Ok(());
            }
        }
        let (lo, hi) = self.a.domain();
        let ends = [self.a.start(), self.a.end(), self.b.start(), self.b.end()];
        for (dir, end) in [(-1.0, a0 + ua * lo_s), (1.0, a0 + ua * hi_s)] {
            let t = (ta + dir * 32.0 * w).clamp(lo, hi);
            let within = closest_point(self.b, self.a.eval(t), tb).1 <= self.tol;
            let at_end = ends.iter().any(|e| e.distance(end) <= 4.0 * self.tol);
            if !within && !at_end {
                return Ok(());
            }
        }
        Err(Error::Overlap { a: self.ia, b: self.ib, at: self.a.eval(ta) })
    }

    fn refine(&self, ta: f64, tb: f64) -> Option<(Intersection, f64)> {
        let (la, ha) = self.a.domain();
        let (lb, hb) = self.b.domain();
        let (mut s, mut u) = (ta, tb);
        let target = 1e-14 * self.scale;
        for _ in 0..40 {
            let [pa, da, _] = derivs(self.a, s);
            let [pb, db, _] = derivs(self.b, u);
            let r = pa - pb;
            if r.hypot() <= target {
                break;
            }
            let det = db.cross(da);
            if det.abs() <= 1e-14 * da.hypot() * db.hypot() {
                break;
            }
            // da * ds - db * du = -r
            let ds = (-r).cross(-db) / det;
            let du = da.cross(-r) / det;
            let ns = (s + ds).clamp(la, ha);
            let nu = (u + du).clamp(lb, hb);
            let moved = (ns - s).abs() + (nu - u).abs();
            s = ns;
            u = nu;
            if moved <= 1e-16 * ((ha - la) + (hb - lb)) {
                break;
            }
        }
        let [_, da, _] = derivs(self.a, s);
        let [_, db, _] = derivs(self.b, u);
        let sin = match (da.normalize(), db.normalize()) {
            (Some(x), Some(y)) => x.cross(y).abs(),
            _ => 0.0,
        };
        let tangential = sin < TANGENTIAL_SIN;
        let mut dist = self.a.eval(s).distance(self.b.eval(u));
        if tangential || dist > 1e-12 * self.scale {
            for _ in 0..200 {
                let (nu, _) = closest_point(self.b, self.a.eval(s), u);
                let (ns, d) = closest_point(self.a, self.b.eval(nu), s);
                let step = (ns - s).abs() + (nu - u).abs();
                s = ns;
                u = nu;
                dist = d;
                if step <= 1e-15 * ((ha - la) + (hb - lb)) {
                    break;
                }
            }
        }
        if dist > self.tol {
            return None;
        }
        let point = self.a.eval(s).midpoint(self.b.eval(u));
        Some((Intersection { t_a: s, t_b: u, point, tangential }, dist))
    }

    fn finish(mut self) -> Vec<Intersection> {
        self.found.sort_by(|x, y| x.0.t_a.total_cmp(&y.0.t_a).then(x.0.t_b.total_cmp(&y.0.t_b)));
        let (la, ha) = self.a.domain();
        let (lb, hb) = self.b.domain();
        let mut kept: Vec<(Intersection, f64)> = Vec::new();
        for (hit, res) in self.found {
            let rel = if hit.tangential { 1e-4 } else { 1e-6 };
            let dup = kept.iter_mut().find(|(k, _)| {
                let near = k.point.distance(hit.point) <= self.tol;
                let close_a = (k.t_a - hit.t_a).abs() <= rel * (ha - la);
                let close_b = (k.t_b - hit.t_b).abs() <= rel * (hb - lb);
                let loose =
                    (k.tangential || hit.tangential) && k.point.distance(hit.point) <= 1e-6 * self.scale.max(1.0);
                (near && close_a && close_b) || loose
            });
            match dup {
                Some((k, kres)) => {
                    let tangential = k.tangential || hit.tangential;
                    if res < *kres {
                        *k = hit;
                        *kres = res;
                    }
                    k.tangential = tangential;
                }
                None => kept.push((hit, res)),
            }
        }
        kept.into_iter().map(|(h, _)| h).collect()
    }
}

fn derivs(c: &ParamCurve, t: f64) -> [Vec2; 3] {
    let (_, hi) = c.domain();
    c.derivs(t, if t >= hi { Side::Left } else { Side::Right })
}

/// Parameter of the point of `c` nearest to `p`, searched from `seed`, and
/// the distance there.
pub fn closest_point(c: &ParamCurve, p: Point2, seed: f64) -> (f64, f64) {
    let (lo, hi) = c.domain();
    let mut t = seed.clamp(lo, hi);
    for _ in 0..50 {
        let [q, d1, d2] = derivs(c, t);
        let r = q - p;
        let g = r.dot(d1);
        let dg = d1.hypot2() + r.dot(d2);
        if dg <= 0.0 || !dg.is_finite() {
            break;
        }
        let nt = (t - g / dg).clamp(lo, hi);
        let step = (nt - t).abs();
        t = nt;
        if step <= 1e-16 * (hi - lo) {
            break;
        }
    }
    (t, c.eval(t).distance(p))
}

fn split_piece(p: &BezierPiece) -> (BezierPiece, BezierPiece) {
    let (l, r) = bezier_split(&p.points, 0.5);
    let tm = 0.5 * (p.t0 + p.t1);
    (BezierPiece { points: l, t0: p.t0, t1: tm }, BezierPiece { points: r, t0: tm, t1: p.t1 })
}

/// Largest distance of a control point from the chord.
fn flatness(points: &[Point2]) -> f64 {
    let a = points[0];
    let b = points[points.len() - 1];
    let chord = b - a;
    match chord.normalize() {
        Some(dir) => points.iter().map(|&p| (p - a).cross(dir).abs()).fold(0.0, f64::max),
        None => points.iter().map(|&p| p.distance(a)).fold(0.0, f64::max),
    }
}

/// Closest points of segments `p0p1` and `q0q1` as parameters in `[0, 1]`,
/// with their distance.
pub fn closest_segments(p0: Point2, p1: Point2, q0: Point2, q1: Point2) -> (f64, f64, f64) {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.hypot2();
    let e = d2.hypot2();
    let f = d2.dot(r);
    let (s, t);
    if a <= f64::MIN_POSITIVE && e <= f64::MIN_POSITIVE {
        (s, t) = (0.0, 0.0);
    } else if a <= f64::MIN_POSITIVE {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= f64::MIN_POSITIVE {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 1e-15 * a * e { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t) = (s0, t0);
        }
    }
    let dist = (p0 + d1 * s).distance(q0 + d2 * t);
    (s, t, dist)
}
