// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Four-sided curved tiles and the partition of regions into tiles.
//!
//! A tile is the Coons patch of its four boundary curves. Boundaries may be
//! piecewise polynomial; the patch is then polynomial on every cell of the
//! grid formed by their breakpoints, and quadrature is composite over that
//! grid.

use crate::basis::Side;
use crate::curve::ParamCurve;
use crate::drawing::Drawing;
use crate::error::{Error, Result};
use crate::gauss::gauss_legendre;
use crate::geom::{shoelace_area, BBox, Point2, Vec2};
use crate::regions::Trail;

/// Validation samples per cell and direction.
const CHECK_SAMPLES: usize = 6;

#[derive(Clone, Debug)]
pub struct Tile {
    /// `S(u)` from corner `(0,0)` to `(1,0)`.
    pub south: ParamCurve,
    /// `E(v)` from `(1,0)` to `(1,1)`.
    pub east: ParamCurve,
    /// `N(u)` from `(0,1)` to `(1,1)`.
    pub north: ParamCurve,
    /// `W(v)` from `(0,0)` to `(0,1)`.
    pub west: ParamCurve,
    corners: [Point2; 4],
    pub u_breaks: Vec<f64>,
    pub v_breaks: Vec<f64>,
}

fn merge_breaks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|x, y| (*x - *y).abs() <= 1e-13);
    all
}

fn side_at(t: f64) -> Side {
    if t >= 1.0 {
        Side::Left
    } else {
        Side::Right
    }
}

impl Tile {
    /// Coons patch with the given boundaries, all parameterized on `[0, 1]`.
    pub fn coons(south: ParamCurve, east: ParamCurve, north: ParamCurve, west: ParamCurve) -> Tile {
        let corners = [south.start(), south.end(), north.start(), north.end()];
        let u_breaks = merge_breaks(&south.breakpoints(), &north.breakpoints());
        let v_breaks = merge_breaks(&west.breakpoints(), &east.breakpoints());
        Tile { south, east, north, west, corners, u_breaks, v_breaks }
    }

    /// Corners `[(0,0), (1,0), (0,1), (1,1)]`.
    pub fn corners(&self) -> [Point2; 4] {
        self.corners
    }

    pub fn eval(&self, u: f64, v: f64) -> Point2 {
        self.eval_with_jacobian(u, v).0
    }

    /// Patch point and its partial derivatives in `u` and `v`.
    pub fn eval_with_jacobian(&self, u: f64, v: f64) -> (Point2, Vec2, Vec2) {
        let [s, ds, _] = self.south.derivs(u, side_at(u));
        let [n, dn, _] = self.north.derivs(u, side_at(u));
        let [w, dw, _] = self.west.derivs(v, side_at(v));
        let [e, de, _] = self.east.derivs(v, side_at(v));
        let [c00, c10, c01, c11] = self.corners;
        let bil = c00 * ((1.0 - u) * (1.0 - v)) + c10 * (u * (1.0 - v)) + c01 * ((1.0 - u) * v) + c11 * (u * v);
        let p = s * (1.0 - v) + n * v + w * (1.0 - u) + e * u - bil;
        let bu = (c10 - c00) * (1.0 - v) + (c11 - c01) * v;
        let bv = (c01 - c00) * (1.0 - u) + (c11 - c10) * u;
        let pu = ds * (1.0 - v) + dn * v - w + e - bu;
        let pv = n - s + dw * (1.0 - u) + de * u - bv;
        (p, pu, pv)
    }

    pub fn jacobian_det(&self, u: f64, v: f64) -> f64 {
        let (_, pu, pv) = self.eval_with_jacobian(u, v);
        pu.cross(pv)
    }

    /// Parameter cells on which the patch is a single polynomial.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.u_breaks.windows(2).flat_map(move |a| self.v_breaks.windows(2).map(move |b| (a[0], a[1], b[0], b[1])))
    }

    /// Smallest Jacobian determinant on a grid of interior samples.
    pub fn min_det(&self) -> (f64, Point2) {
        let mut worst = (f64::INFINITY, Point2::ZERO);
        for (u0, u1, v0, v1) in self.cells() {
            for i in 0..CHECK_SAMPLES {
                for j in 0..CHECK_SAMPLES {
                    let u = u0 + (u1 - u0) * (i as f64 + 0.5) / CHECK_SAMPLES as f64;
                    let v = v0 + (v1 - v0) * (j as f64 + 0.5) / CHECK_SAMPLES as f64;
                    let d = self.jacobian_det(u, v);
                    if d < worst.0 {
                        worst = (d, self.eval(u, v));
                    }
                }
            }
        }
        worst
    }

    /// Integral of `f` over the tile image with `n` Gauss points per
    /// direction in every cell. `f` receives the physical point; the
    /// Jacobian factor is applied here.
    pub fn integrate(&self, n: usize, tile: usize, f: &mut dyn FnMut(Point2) -> f64) -> Result<f64> {
        self.integrate_param(n, tile, &mut |_, _, p| f(p))
    }

    /// As [`Tile::integrate`], also passing the tile parameters to `f`.
    /// Physical quadrature nodes with weights that include the Jacobian.
    pub fn nodes(&self, n: usize, tile: usize) -> Result<Vec<(Point2, f64)>> {
        let g = gauss_legendre(n);
        let mut out = Vec::new();
        for (u0, u1, v0, v1) in self.cells() {
            let (hu, hv) = (u1 - u0, v1 - v0);
            for (xu, wu) in g.nodes.iter().zip(&g.weights) {
                let u = u0 + hu * xu;
                for (xv, wv) in g.nodes.iter().zip(&g.weights) {
                    let v = v0 + hv * xv;
                    let (p, pu, pv) = self.eval_with_jacobian(u, v);
                    let det = pu.cross(pv);
                    if det <= 0.0 {
                        return Err(Error::NonPositiveJacobian { tile, det, at: p });
                    }
                    out.push((p, wu * wv * det * hu * hv));
                }
            }
        }
        Ok(out)
    }

    pub fn integrate_param(&self, n: usize, tile: usize, f: &mut dyn FnMut(f64, f64, Point2) -> f64) -> Result<f64> {
        let g = gauss_legendre(n);
        let mut acc = 0.0;
        for (u0, u1, v0, v1) in self.cells() {
            let (hu, hv) = (u1 - u0, v1 - v0);
            let mut cell = 0.0;
            for (xu, wu) in g.nodes.iter().zip(&g.weights) {
                let u = u0 + hu * xu;
                for (xv, wv) in g.nodes.iter().zip(&g.weights) {
                    let v = v0 + hv * xv;
                    let (p, pu, pv) = self.eval_with_jacobian(u, v);
                    let det = pu.cross(pv);
                    if det <= 0.0 {
                        return Err(Error::NonPositiveJacobian { tile, det, at: p });
                    }
                    cell += wu * wv * det * f(u, v, p);
                }
            }
            acc += cell * hu * hv;
        }
        Ok(acc)
    }
}

/// Tiles for the boundary of an interior region given as a closed trail.
pub fn tile_region(d: &Drawing, trail: &Trail, region: usize) -> Result<Vec<Tile>> {
    let sides: Vec<ParamCurve> = trail.iter().map(|&(_, h)| d.geometry(h)).collect();
    tile_boundary(sides, region)
}

/// Tiles for a counterclockwise closed chain of curves on `[0, 1]`, each
/// ending where the next begins.
pub fn tile_boundary(sides: Vec<ParamCurve>, region: usize) -> Result<Vec<Tile>> {
    if sides.is_empty() {
        return Err(Error::Tiling { region, reason: "empty boundary".into() });
    }
    let mut sides = sides;
    while sides.len() < 3 {
        let mut split = Vec::with_capacity(2 * sides.len());
        for c in &sides {
            split.extend(split_mid(c)?);
        }
        sides = split;
    }
    let first = if sides.len() == 4 {
        let [s, e, n, w] = [&sides[0], &sides[1], &sides[2], &sides[3]];
        vec![Tile::coons(s.clone(), e.clone(), n.reverse(), w.reverse())]
    } else {
        centroid_tiles(&sides)?
    };
    if tiles_valid(&first) {
        return Ok(first);
    }
    let mut last = None;
    for pieces in [4, 16] {
        match triangulated_tiles(&sides, pieces) {
            Some(tiles) if tiles_valid(&tiles) => return Ok(tiles),
            Some(tiles) => last = tiles.iter().map(Tile::min_det).min_by(|a, b| a.0.total_cmp(&b.0)),
            None => {}
        }
    }
    let reason = match last.or_else(|| first.iter().map(Tile::min_det).min_by(|a, b| a.0.total_cmp(&b.0))) {
        Some((det, at)) => format!("non-positive Jacobian {det:.3e} near ({:.6}, {:.6})", at.x, at.y),
        None => "triangulation failed".into(),
    };
    Err(Error::Tiling { region, reason })
}

fn tiles_valid(tiles: &[Tile]) -> bool {
    tiles.iter().all(|t| t.min_det().0 > 0.0)
}

fn split_mid(c: &ParamCurve) -> Result<[ParamCurve; 2]> {
    Ok([c.restrict(0.0, 0.5)?, c.restrict(0.5, 1.0)?])
}

/// Joins the arc-length midpoint of every side to the vertex centroid,
/// giving one tile per vertex.
fn centroid_tiles(sides: &[ParamCurve]) -> Result<Vec<Tile>> {
    let n = sides.len();
    let centre = sides.iter().fold(Vec2::ZERO, |acc, c| acc + c.start()) / n as f64;
    let mut halves = Vec::with_capacity(n);
    for c in sides {
        let m = c.param_at_arc_fraction(0.5).clamp(1e-6, 1.0 - 1e-6);
        halves.push((c.restrict(0.0, m)?, c.restrict(m, 1.0)?));
    }
    let mut tiles = Vec::with_capacity(n);
    for k in 0..n {
        let (first_half, _) = &halves[k];
        let (_, prev_second) = &halves[(k + n - 1) % n];
        let mk = first_half.end();
        let mp = prev_second.start();
        tiles.push(Tile::coons(
            first_half.clone(),
            ParamCurve::segment(mk, centre),
            ParamCurve::segment(mp, centre),
            prev_second.reverse(),
        ));
    }
    Ok(tiles)
}

/// Splits every side into `pieces` arcs, ear-clips the polygon of arc
/// endpoints and applies the centroid rule to each curved triangle.
fn triangulated_tiles(sides: &[ParamCurve], pieces: usize) -> Option<Vec<Tile>> {
    let mut arcs: Vec<ParamCurve> = Vec::new();
    for c in sides {
        for i in 0..pieces {
            let a = i as f64 / pieces as f64;
            let b = (i + 1) as f64 / pieces as f64;
            arcs.push(c.restrict(a, b).ok()?);
        }
    }
    let pts: Vec<Point2> = arcs.iter().map(ParamCurve::start).collect();
    let scale = BBox::from_points(&pts).diagonal();
    let mut tiles = Vec::new();
    for (tri, arc) in ear_clip(&pts, scale)? {
        let sides: Vec<ParamCurve> = (0..3)
            .map(|s| match arc[s] {
                Some(a) => arcs[a].clone(),
                None => ParamCurve::segment(pts[tri[s]], pts[tri[(s + 1) % 3]]),
            })
            .collect();
        let area = shoelace_area(&[pts[tri[0]], pts[tri[1]], pts[tri[2]]]);
        if area.abs() <= 1e-14 * scale * scale && arc.iter().all(Option::is_none) {
            continue;
        }
        tiles.extend(centroid_tiles(&sides).ok()?);
    }
    Some(tiles)
}

/// A triangle of polygon vertex indices, and for each side `01`, `12`, `20`
/// the original arc it follows, if any.
type EarTriangle = ([usize; 3], [Option<usize>; 3]);

/// Ear clipping of a (weakly) simple counterclockwise polygon, preferring
/// the ear with the largest minimum angle.
fn ear_clip(pts: &[Point2], scale: f64) -> Option<Vec<EarTriangle>> {
    let n = pts.len();
    let eps = 1e-12 * scale * scale;
    let same = |p: Point2, q: Point2| p.distance(q) <= 1e-12 * scale;
    let mut idx: Vec<usize> = (0..n).collect();
    // arc[k] is the original arc followed from idx[k] to idx[k + 1]
    let mut arc: Vec<Option<usize>> = (0..n).map(Some).collect();
    let mut out = Vec::new();
    while idx.len() > 3 {
        let m = idx.len();
        let mut best: Option<(f64, usize)> = None;
        let mut spike = None;
        for k in 0..m {
            let (a, b, c) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (pa, pb, pc) = (pts[a], pts[b], pts[c]);
            if same(pa, pc) {
                spike = Some(k);
                break;
            }
            let cr = (pb - pa).cross(pc - pb);
            if cr <= eps {
                continue;
            }
            let blocked = idx.iter().any(|&q| {
                let p = pts[q];
                if same(p, pa) || same(p, pb) || same(p, pc) {
                    return false;
                }
                (pb - pa).cross(p - pa) >= -eps && (pc - pb).cross(p - pb) >= -eps && (pa - pc).cross(p - pc) >= -eps
            });
            if blocked {
                continue;
            }
            let q = min_angle(pa, pb, pc);
            if best.is_none_or(|(bq, _)| q > bq) {
                best = Some((q, k));
            }
        }
        if let Some(k) = spike {
            // A slit: the arcs into and out of idx[k] cancel, and the
            // coincident ends on either side merge.
            let kp = (k + 1) % m;
            let km = (k + m - 1) % m;
            let keep = arc[kp];
            let (lo, hi) = if kp > k { (k, kp) } else { (kp, k) };
            for r in [hi, lo] {
                idx.remove(r);
                arc.remove(r);
            }
            let km = km - [lo, hi].iter().filter(|&&r| r < km).count();
            arc[km] = keep;
            continue;
        }
        let (_, k) = best?;
        let km = (k + m - 1) % m;
        let kp = (k + 1) % m;
        out.push(([idx[km], idx[k], idx[kp]], [arc[km], arc[k], None]));
        idx.remove(k);
        arc.remove(k);
        let km = if km > k { km - 1 } else { km };
        arc[km] = None;
    }
    if idx.len() == 3 {
        out.push(([idx[0], idx[1], idx[2]], [arc[0], arc[1], arc[2]]));
    }
    Some(out)
}

fn min_angle(a: Point2, b: Point2, c: Point2) -> f64 {
    let ang = |p: Point2, q: Point2, r: Point2| {
        let (u, v) = (q - p, r - p);
        u.cross(v).abs().atan2(u.dot(v))
    };
    ang(a, b, c).min(ang(b, c, a)).min(ang(c, a, b))
}
