// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Region extraction: removal of dangling vertices, face traversal by
//! largest counterclockwise turn, and interior/outer classification.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::basis::Side;
use crate::curve::ParamCurve;
use crate::drawing::{Drawing, HalfEdge};
use crate::error::{Error, Result};
use crate::gauss::gauss_legendre;
use crate::geom::{winding_number, Point2};

/// Angles closer than this are treated as equal and resolved by curvature.
const ANGLE_TIE: f64 = 1e-10;
/// Curvatures closer than this (relative) cannot break a tie.
const CURVATURE_TIE: f64 = 1e-9;
/// Allowed distance of the total turning from ±2π.
const TURNING_TOL: f64 = 1e-6;

/// A closed trail of `(vertex, half-edge)` pairs; each half-edge starts at
/// its vertex and ends at the next pair's vertex.
pub type Trail = Vec<(usize, HalfEdge)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Interior,
    Outer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub trail: Trail,
    pub signed_area: f64,
    /// Total turning of the boundary, close to `±2π`.
    pub turning: f64,
    pub orientation: Orientation,
    /// Connected component of the drawing the trail belongs to.
    pub component: usize,
    /// Components nested directly inside this region; their enclosed area
    /// is not part of the region.
    pub holes: Vec<usize>,
}

/// Classified regions together with the purged drawing they refer to.
#[derive(Clone, Debug)]
pub struct RegionSet {
    pub drawing: Drawing,
    pub regions: Vec<Region>,
    /// One outer region per connected component.
    pub outer: Vec<Region>,
}

/// Raw traversal output.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub drawing: Drawing,
    pub trails: Vec<Trail>,
}

/// Removes, until none is left, every vertex with exactly one incident
/// edge that is not a loop, together with that edge. Vertices left without
/// edges are removed as well.
pub fn purge_dangling_nodes(drawing: &Drawing) -> Drawing {
    let mut d = drawing.clone();
    loop {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); d.vertices.len()];
        for e in d.active_edges() {
            incident[e.v_from].push(e.id);
            if e.v_to != e.v_from {
                incident[e.v_to].push(e.id);
            }
        }
        let mut changed = false;
        for v in 0..d.vertices.len() {
            if !d.vertices[v].active {
                continue;
            }
            match incident[v].as_slice() {
                [] => d.vertices[v].active = false,
                &[e] if !d.edges[e].is_loop() && d.edges[e].active => {
                    d.vertices[v].active = false;
                    d.edges[e].active = false;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let active: Vec<bool> = d.vertices.iter().map(|v| v.active).collect();
    for list in &mut d.curve_vertices {
        list.retain(|&v| active[v]);
    }
    d.rebuild_tables();
    d
}

/// Counterclockwise angle in `[0, 2π)` from the arrival edge's tangent at
/// its end (pointing back into the arrival edge) to the candidate's tangent
/// at its start. The twin of the arrival half-edge scores exactly zero.
pub fn angle_between(d: &Drawing, arrival: HalfEdge, candidate: HalfEdge) -> Result<f64> {
    if candidate == arrival.twin() {
        return Ok(0.0);
    }
    let a = d.outgoing_tangent(arrival.twin())?;
    let c = d.outgoing_tangent(candidate)?;
    let mut ang = a.cross(c).atan2(a.dot(c));
    if ang < 0.0 {
        ang += TAU;
    }
    if ang >= TAU {
        ang -= TAU;
    }
    Ok(ang)
}

/// Picks the continuation of a walk that arrived at `at` along `arrival`:
/// the candidate with the largest counterclockwise angle, ties broken by
/// the larger signed curvature in the direction of travel.
pub fn next_halfedge(d: &Drawing, at: usize, arrival: HalfEdge, candidates: &[HalfEdge]) -> Result<HalfEdge> {
    if candidates.is_empty() {
        return Err(Error::EmptyPathList { vertex: at });
    }
    if candidates.len() == 1 {
        return Ok(candidates[0]);
    }
    let twin = arrival.twin();
    let mut keys: Vec<(f64, HalfEdge)> = Vec::with_capacity(candidates.len());
    for &h in candidates {
        let mut ang = angle_between(d, arrival, h)?;
        if h != twin && !(ANGLE_TIE..=TAU - ANGLE_TIE).contains(&ang) {
            // Leaves along the arrival edge: it lies just left of that edge
            // or else wraps all the way round.
            let kc = d.outgoing_curvature(h)?;
            let kt = d.outgoing_curvature(twin)?;
            if curvature_tied(kc, kt) {
                return Err(Error::UnresolvedTie { vertex: at, first: h.0, second: twin.0 });
            }
            ang = if kc > kt { 0.0 } else { TAU };
        }
        keys.push((ang, h));
    }
    let mut best = 0;
    for i in 1..keys.len() {
        let (ai, hi) = keys[i];
        let (ab, hb) = keys[best];
        if (ai - ab).abs() > ANGLE_TIE {
            if ai > ab {
                best = i;
            }
            continue;
        }
        let ki = d.outgoing_curvature(hi)?;
        let kb = d.outgoing_curvature(hb)?;
        if curvature_tied(ki, kb) {
            return Err(Error::UnresolvedTie { vertex: at, first: hb.0.min(hi.0), second: hb.0.max(hi.0) });
        }
        if ki > kb {
            best = i;
        }
    }
    Ok(keys[best].1)
}

fn curvature_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= CURVATURE_TIE * (1.0 + a.abs().max(b.abs()))
}

/// Walks every face of the purged drawing. Each half-edge ends up in
/// exactly one trail.
pub fn extract_regions(drawing: &Drawing) -> Result<Extraction> {
    let d = purge_dangling_nodes(drawing);
    let mut pi = d.pi.clone();
    let total: usize = pi.iter().map(Vec::len).sum();
    let mut trails = Vec::new();
    for v in 0..d.vertices.len() {
        while !pi[v].is_empty() {
            let h0 = pi[v].remove(0);
            let mut trail = vec![(v, h0)];
            let mut h = h0;
            loop {
                let w = d.target(h);
                let mut cands = pi[w].clone();
                if w == v {
                    cands.push(h0);
                }
                let next = next_halfedge(&d, w, h, &cands)?;
                if next == h0 {
                    break;
                }
                pi[w].retain(|&x| x != next);
                trail.push((w, next));
                h = next;
                if trail.len() > total {
                    return Err(Error::EmptyPathList { vertex: w });
                }
            }
            trails.push(trail);
        }
    }
    Ok(Extraction { drawing: d, trails })
}

/// Signed area enclosed by a trail, by Gauss quadrature of `½∮(x dy − y dx)`.
pub fn trail_area(d: &Drawing, trail: &[(usize, HalfEdge)]) -> f64 {
    trail
        .iter()
        .map(|&(_, h)| edge_area_term(&d.edges[h.edge()].geometry) * if h.is_reversed() { -1.0 } else { 1.0 })
        .sum()
}

/// `½∫(x y' − y x') dt` over a curve on its domain.
pub fn edge_area_term(c: &ParamCurve) -> f64 {
    let g = gauss_legendre(c.degree() + 1);
    let bps = c.breakpoints();
    let mut acc = 0.0;
    for w in bps.windows(2) {
        acc += g.integrate(w[0], w[1], |t| {
            let [p, d1, _] = c.derivs(t, Side::Right);
            p.cross(d1)
        });
    }
    0.5 * acc
}

/// Total turning of a trail: exterior angles at the vertices plus the
/// integrated curvature along the edges.
pub fn trail_turning(d: &Drawing, trail: &[(usize, HalfEdge)]) -> Result<f64> {
    let mut total = 0.0;
    let n = trail.len();
    for k in 0..n {
        let h = trail[k].1;
        let next = trail[(k + 1) % n].1;
        let arrive = -d.outgoing_tangent(h.twin())?;
        let leave = d.outgoing_tangent(next)?;
        total += arrive.cross(leave).atan2(arrive.dot(leave));
        total += edge_turning(&d.geometry(h));
    }
    Ok(total)
}

fn edge_turning(c: &ParamCurve) -> f64 {
    let bps = c.breakpoints();
    let mut total = 0.0;
    let mut prev = None;
    for w in bps.windows(2) {
        let steps = 64;
        for i in 0..=steps {
            let t = w[0] + (w[1] - w[0]) * i as f64 / steps as f64;
            let side = if i == steps { Side::Left } else { Side::Right };
            let d1 = c.derivs(t, side)[1];
            if d1.hypot() == 0.0 {
                continue;
            }
            let a = d1.atan2();
            if let Some(p) = prev {
                total += wrap_pi(a - p);
            }
            prev = Some(a);
        }
    }
    total
}

fn wrap_pi(a: f64) -> f64 {
    let mut a = a % TAU;
    if a > PI {
        a -= TAU;
    } else if a < -PI {
        a += TAU;
    }
    a
}

/// Polygon through points sampled along the trail.
pub fn trail_polygon(d: &Drawing, trail: &[(usize, HalfEdge)], per_span: usize) -> Vec<Point2> {
    let mut out = Vec::new();
    for &(_, h) in trail {
        let g = d.geometry(h);
        let bps = g.breakpoints();
        for w in bps.windows(2) {
            for i in 0..per_span {
                out.push(g.eval(w[0] + (w[1] - w[0]) * i as f64 / per_span as f64));
            }
        }
    }
    out
}

/// Computes areas and turning, marks outer regions, and attaches nested
/// components as holes of the smallest interior region around them.
pub fn classify_regions(ex: Extraction) -> Result<RegionSet> {
    let d = ex.drawing;
    let comps = d.components();
    let mut interior = Vec::new();
    let mut outer = Vec::new();
    for trail in ex.trails {
        let area = trail_area(&d, &trail);
        let turning = trail_turning(&d, &trail)?;
        let expect = if area > 0.0 { TAU } else { -TAU };
        if (turning - expect).abs() > TURNING_TOL {
            return Err(Error::ClassifierDisagreement { area, turning });
        }
        let component = comps[trail[0].0].unwrap_or(0);
        let orientation = if area > 0.0 { Orientation::Interior } else { Orientation::Outer };
        let region = Region { trail, signed_area: area, turning, orientation, component, holes: Vec::new() };
        match orientation {
            Orientation::Interior => interior.push(region),
            Orientation::Outer => outer.push(region),
        }
    }
    outer.sort_by_key(|r| r.component);
    let polys: Vec<Vec<Point2>> = interior.iter().map(|r| trail_polygon(&d, &r.trail, 64)).collect();
    for o in &outer {
        let probe = d.vertices[o.trail[0].0].position;
        let host = interior
            .iter()
            .enumerate()
            .filter(|(i, r)| r.component != o.component && winding_number(&polys[*i], probe) != 0)
            .min_by(|a, b| a.1.signed_area.total_cmp(&b.1.signed_area))
            .map(|(i, _)| i);
        if let Some(i) = host {
            interior[i].holes.push(o.component);
        }
    }
    Ok(RegionSet { drawing: d, regions: interior, outer })
}

/// Purge, traversal and classification in one call.
pub fn regions_of(drawing: &Drawing) -> Result<RegionSet> {
    classify_regions(extract_regions(drawing)?)
}

impl RegionSet {
    /// Net area of an interior region, holes removed.
    pub fn net_area(&self, index: usize) -> f64 {
        let r = &self.regions[index];
        let holes: f64 = r
            .holes
            .iter()
            .flat_map(|&c| self.regions.iter().filter(move |x| x.component == c))
            .map(|x| x.signed_area)
            .sum();
        r.signed_area - holes
    }

    pub fn to_json(&self) -> RegionSetJson {
        let conv = |r: &Region| RegionJson {
            trail: r.trail.iter().map(|&(v, h)| TrailStep { vertex: v + 1, edge: h.signed() }).collect(),
            signed_area: r.signed_area,
            orientation: r.orientation,
            component: r.component + 1,
            holes: r.holes.iter().map(|c| c + 1).collect(),
        };
        RegionSetJson { regions: self.regions.iter().map(conv).collect(), outer: self.outer.iter().map(conv).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSetJson {
    pub regions: Vec<RegionJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outer: Vec<RegionJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionJson {
    pub trail: Vec<TrailStep>,
    pub signed_area: f64,
    pub orientation: Orientation,
    /// One-based connected component of the drawing.
    pub component: usize,
    /// Components nested directly inside this region.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holes: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailStep {
    pub vertex: usize,
    pub edge: i64,
}
