// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! The curvilinear drawing: vertices at curve intersections, edges between
//! consecutive vertices along each curve, and the per-vertex lists of
//! outgoing half-edges.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveRestriction, ParamCurve};
use crate::error::{Error, Result};
use crate::geom::{Point2, Vec2};
use crate::intersect::{intersect_with_ids, self_intersections};

/// Default vertex clustering tolerance in physical units.
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub position: Point2,
    /// `(curve_id, t)` for every curve passing through the vertex.
    pub hits: Vec<(usize, f64)>,
    /// Artificial vertex on an intersection-free closed curve.
    pub seam: bool,
    /// Some curves meet here with parallel tangents.
    pub tangential: bool,
    pub active: bool,
}

/// A geometric edge: the piece of curve `curve_id` between two consecutive
/// vertices. When `wraps` is set the edge runs over the seam of a closed
/// curve, from `t_lo` to the end of the domain and on from its start to
/// `t_hi`, so `t_lo >= t_hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub curve_id: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub v_from: usize,
    pub v_to: usize,
    pub wraps: bool,
    /// The edge as a curve on `[0, 1]`, oriented from `v_from` to `v_to`.
    pub geometry: ParamCurve,
    pub active: bool,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.v_from == self.v_to
    }

    pub fn restriction(&self) -> CurveRestriction {
        CurveRestriction { curve_id: self.curve_id, t_lo: self.t_lo, t_hi: self.t_hi }
    }
}

/// An oriented edge. The value is `2 * edge + r` where `r = 1` for the
/// reversed orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfEdge(pub usize);

impl HalfEdge {
    pub fn new(edge: usize, reversed: bool) -> HalfEdge {
        HalfEdge(2 * edge + reversed as usize)
    }

    pub fn edge(self) -> usize {
        self.0 / 2
    }

    pub fn is_reversed(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn twin(self) -> HalfEdge {
        HalfEdge(self.0 ^ 1)
    }

    /// One-based signed edge id: `+k` forward, `-k` reversed.
    pub fn signed(self) -> i64 {
        let k = self.edge() as i64 + 1;
        if self.is_reversed() {
            -k
        } else {
            k
        }
    }

    pub fn from_signed(s: i64) -> Option<HalfEdge> {
        if s == 0 {
            return None;
        }
        Some(HalfEdge::new(s.unsigned_abs() as usize - 1, s < 0))
    }
}

#[derive(Clone, Debug)]
pub struct Drawing {
    pub curves: Vec<ParamCurve>,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Curves through each vertex.
    pub vertex_curves: Vec<BTreeSet<usize>>,
    /// Vertices along each curve in parameter order. A closed curve lists
    /// the vertex it returns to at both ends.
    pub curve_vertices: Vec<Vec<usize>>,
    /// Outgoing half-edges of each vertex, ordered by `(curve, t, orientation)`.
    pub pi: Vec<Vec<HalfEdge>>,
    pub tol: f64,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

struct Hit {
    curve: usize,
    t: f64,
    point: Point2,
    tangential: bool,
}

/// Assembles the drawing of `curves` with vertex clustering tolerance `tol`.
pub fn build_drawing(curves: Vec<ParamCurve>, tol: f64) -> Result<Drawing> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::schema("tol", "must be positive"));
    }
    let n = curves.len();
    let closed: Vec<bool> = curves.iter().map(|c| c.is_closed(tol)).collect();

    let mut tasks: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if curves[i].bbox().inflate(tol).overlaps(&curves[j].bbox()) {
                tasks.push((i, j));
            }
        }
    }
    let results: Vec<Result<Vec<crate::intersect::Intersection>>> = tasks
        .par_iter()
        .map(|&(i, j)| {
            if i == j {
                self_intersections(&curves[i], i, tol)
            } else {
                intersect_with_ids(&curves[i], i, &curves[j], j, tol)
            }
        })
        .collect();

    let mut hits: Vec<Hit> = Vec::new();
    let mut links: Vec<(usize, usize)> = Vec::new();
    for (&(i, j), res) in tasks.iter().zip(results) {
        for x in res? {
            let k = hits.len();
            hits.push(Hit { curve: i, t: x.t_a, point: x.point, tangential: x.tangential });
            hits.push(Hit { curve: j, t: x.t_b, point: x.point, tangential: x.tangential });
            links.push((k, k + 1));
        }
    }
    for h in &mut hits {
        let (lo, hi) = curves[h.curve].domain();
        if closed[h.curve] && hi - h.t <= 1e-12 * (hi - lo) {
            h.t = lo;
        }
    }

    let mut uf = UnionFind((0..hits.len()).collect());
    for &(a, b) in &links {
        uf.union(a, b);
    }
    let mut order: Vec<usize> = (0..hits.len()).collect();
    order.sort_by(|&a, &b| hits[a].point.x.total_cmp(&hits[b].point.x));
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            if hits[b].point.x - hits[a].point.x > tol {
                break;
            }
            if hits[a].point.distance(hits[b].point) <= tol {
                uf.union(a, b);
            }
        }
    }

    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for k in 0..hits.len() {
        let r = uf.find(k);
        clusters.entry(r).or_default().push(k);
    }
    let mut groups: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut group_info: Vec<(Point2, bool)> = Vec::new();
    for members in clusters.values() {
        let mut pts: Vec<(usize, f64)> = members.iter().map(|&k| (hits[k].curve, hits[k].t)).collect();
        pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup_by(|b, a| {
            let (lo, hi) = curves[a.0].domain();
            a.0 == b.0 && (a.1 - b.1).abs() <= 1e-9 * (hi - lo)
        });
        let sum = members.iter().fold(Vec2::ZERO, |acc, &k| acc + hits[k].point);
        let pos = sum / members.len() as f64;
        let tangential = members.iter().any(|&k| hits[k].tangential);
        groups.push(pts);
        group_info.push((pos, tangential));
    }
    let mut idx: Vec<usize> = (0..groups.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ca, ta) = groups[a][0];
        let (cb, tb) = groups[b][0];
        ca.cmp(&cb).then(ta.total_cmp(&tb))
    });
    let mut vertices: Vec<Vertex> = idx
        .iter()
        .enumerate()
        .map(|(id, &g)| Vertex {
            id,
            position: group_info[g].0,
            hits: groups[g].clone(),
            seam: false,
            tangential: group_info[g].1,
            active: true,
        })
        .collect();

    let mut per_curve: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n];
    for v in &vertices {
        for &(c, t) in &v.hits {
            per_curve[c].push((t, v.id));
        }
    }
    for (c, list) in per_curve.iter_mut().enumerate() {
        if list.is_empty() && closed[c] {
            let (lo, _) = curves[c].domain();
            let id = vertices.len();
            vertices.push(Vertex {
                id,
                position: curves[c].start(),
                hits: vec![(c, lo)],
                seam: true,
                tangential: false,
                active: true,
            });
            list.push((lo, id));
        }
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }

    let mut edges: Vec<Edge> = Vec::new();
    let mut curve_vertices: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in 0..n {
        let curve = &curves[c];
        let (lo, hi) = curve.domain();
        let min_dt = 1e-12 * (hi - lo);
        let list = &per_curve[c];
        curve_vertices[c] = list.iter().map(|&(_, v)| v).collect();
        for w in list.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if t1 - t0 <= min_dt {
                continue;
            }
            let geometry = curve.restrict(t0, t1)?;
            push_edge(&mut edges, c, t0, t1, v0, v1, false, geometry);
        }
        if closed[c] && !list.is_empty() {
            let (t_first, v_first) = list[0];
            let (t_last, v_last) = list[list.len() - 1];
            curve_vertices[c].push(v_first);
            if t_first - lo <= min_dt {
                if hi - t_last > min_dt {
                    let geometry = curve.restrict(t_last, hi)?;
                    push_edge(&mut edges, c, t_last, hi, v_last, v_first, false, geometry);
                }
            } else {
                let tail = curve.restrict(t_last, hi)?;
                let head = curve.restrict(lo, t_first)?;
                let split = (hi - t_last) / ((hi - t_last) + (t_first - lo));
                let geometry = tail.join(&head, split);
                push_edge(&mut edges, c, t_last, t_first, v_last, v_first, true, geometry);
            }
        }
    }

    let mut drawing =
        Drawing { curves, vertices, edges, vertex_curves: Vec::new(), curve_vertices, pi: Vec::new(), tol };
    drawing.rebuild_tables();
    Ok(drawing)
}

#[allow(clippy::too_many_arguments)]
fn push_edge(
    edges: &mut Vec<Edge>,
    curve_id: usize,
    t_lo: f64,
    t_hi: f64,
    v_from: usize,
    v_to: usize,
    wraps: bool,
    geometry: ParamCurve,
) {
    let id = edges.len();
    edges.push(Edge { id, curve_id, t_lo, t_hi, v_from, v_to, wraps, geometry, active: true });
}

impl Drawing {
    /// Recomputes vertex–curve incidence and the path lists from the active
    /// edges.
    pub fn rebuild_tables(&mut self) {
        let nv = self.vertices.len();
        self.vertex_curves = vec![BTreeSet::new(); nv];
        for (c, list) in self.curve_vertices.iter().enumerate() {
            for &v in list {
                self.vertex_curves[v].insert(c);
            }
        }
        let mut pi: Vec<Vec<(usize, f64, bool, HalfEdge)>> = vec![Vec::new(); nv];
        for e in self.edges.iter().filter(|e| e.active) {
            pi[e.v_from].push((e.curve_id, e.t_lo, false, HalfEdge::new(e.id, false)));
            pi[e.v_to].push((e.curve_id, e.t_hi, true, HalfEdge::new(e.id, true)));
        }
        self.pi = pi
            .into_iter()
            .map(|mut l| {
                l.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
                l.into_iter().map(|x| x.3).collect()
            })
            .collect();
    }

    pub fn origin(&self, h: HalfEdge) -> usize {
        let e = &self.edges[h.edge()];
        if h.is_reversed() {
            e.v_to
        } else {
            e.v_from
        }
    }

    pub fn target(&self, h: HalfEdge) -> usize {
        self.origin(h.twin())
    }

    /// The half-edge's curve on `[0, 1]` in traversal direction.
    pub fn geometry(&self, h: HalfEdge) -> ParamCurve {
        let g = &self.edges[h.edge()].geometry;
        if h.is_reversed() {
            g.reverse()
        } else {
            g.clone()
        }
    }

    /// Unit tangent at the origin of `h`, pointing into the edge.
    pub fn outgoing_tangent(&self, h: HalfEdge) -> Result<Vec2> {
        let e = &self.edges[h.edge()];
        let (t, side, sign) =
            if h.is_reversed() { (1.0, crate::basis::Side::Left, -1.0) } else { (0.0, crate::basis::Side::Right, 1.0) };
        let d = e.geometry.derivs(t, side)[1];
        let at = if h.is_reversed() { e.t_hi } else { e.t_lo };
        (d * sign).normalize().ok_or(Error::DegenerateTangent { curve: e.curve_id, t: at })
    }

    /// Signed curvature at the origin of `h`, in the direction of travel.
    pub fn outgoing_curvature(&self, h: HalfEdge) -> Result<f64> {
        let e = &self.edges[h.edge()];
        let (t, side) =
            if h.is_reversed() { (1.0, crate::basis::Side::Left) } else { (0.0, crate::basis::Side::Right) };
        let [_, d1, d2] = e.geometry.derivs(t, side);
        let k = crate::curve::curvature_from(d1, d2).ok_or(Error::UndefinedCurvature { t })?;
        Ok(if h.is_reversed() { -k } else { k })
    }

    pub fn active_vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| v.active)
    }

    pub fn active_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.active)
    }

    /// Component label of every vertex under the active edges; inactive
    /// vertices get `None`.
    pub fn components(&self) -> Vec<Option<usize>> {
        let mut uf = UnionFind((0..self.vertices.len()).collect());
        for e in self.active_edges() {
            uf.union(e.v_from, e.v_to);
        }
        let mut labels = vec![None; self.vertices.len()];
        let mut next = 0;
        let mut seen: std::collections::BTreeMap<usize, usize> = Default::default();
        for v in self.active_vertices() {
            let r = uf.find(v.id);
            let l = *seen.entry(r).or_insert_with(|| {
                next += 1;
                next - 1
            });
            labels[v.id] = Some(l);
        }
        labels
    }

    pub fn to_json(&self) -> DrawingJson {
        DrawingJson {
            vertices: self
                .active_vertices()
                .map(|v| VertexJson {
                    id: v.id + 1,
                    x: v.position.x,
                    y: v.position.y,
                    seam: v.seam,
                    tangential: v.tangential,
                })
                .collect(),
            edges: self
                .active_edges()
                .map(|e| EdgeJson {
                    id: e.id + 1,
                    curve_id: e.curve_id + 1,
                    t_lo: e.t_lo,
                    t_hi: e.t_hi,
                    v_from: e.v_from + 1,
                    v_to: e.v_to + 1,
                    wraps: e.wraps,
                })
                .collect(),
            pi: self
                .active_vertices()
                .map(|v| PiJson { vertex: v.id + 1, half_edges: self.pi[v.id].iter().map(|h| h.signed()).collect() })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawingJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    pub pi: Vec<PiJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub seam: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub tangential: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    pub curve_id: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub v_from: usize,
    pub v_to: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub wraps: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiJson {
    pub vertex: usize,
    pub half_edges: Vec<i64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    pub(crate) fn square() -> Vec<ParamCurve> {
        vec![
            ParamCurve::segment(v(0.0, 0.0), v(1.0, 0.0)),
            ParamCurve::segment(v(1.0, 0.0), v(1.0, 1.0)),
            ParamCurve::segment(v(1.0, 1.0), v(0.0, 1.0)),
            ParamCurve::segment(v(0.0, 1.0), v(0.0, 0.0)),
        ]
    }

    fn circle(c: Vec2, r: f64) -> ParamCurve {
        // Four cubic arcs approximating a circle.
        let k = 0.5522847498 * r;
        let pts = vec![
            c + v(r, 0.0),
            c + v(r, k),
            c + v(k, r),
            c + v(0.0, r),
            c + v(-k, r),
            c + v(-r, k),
            c + v(-r, 0.0),
            c + v(-r, -k),
            c + v(-k, -r),
            c + v(0.0, -r),
            c + v(k, -r),
            c + v(r, -k),
            c + v(r, 0.0),
        ];
        let knots = vec![0.0, 0.0, 0.0, 0.0, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5, 0.75, 0.75, 0.75, 1.0, 1.0, 1.0, 1.0];
        ParamCurve::bspline(3, knots, pts).unwrap()
    }

    #[test]
    fn unit_square() {
        let d = build_drawing(square(), DEFAULT_TOL).unwrap();
        assert_eq!(d.vertices.len(), 4);
        assert_eq!(d.edges.len(), 4);
        assert!(d.pi.iter().all(|p| p.len() == 2));
        for (vid, p) in d.pi.iter().enumerate() {
            for &h in p {
                assert_eq!(d.origin(h), vid);
            }
        }
    }

    #[test]
    fn square_with_diagonal() {
        let mut curves = square();
        curves.push(ParamCurve::segment(v(0.0, 0.0), v(1.0, 1.0)));
        let d = build_drawing(curves, DEFAULT_TOL).unwrap();
        assert_eq!(d.vertices.len(), 4);
        assert_eq!(d.edges.len(), 5);
        let mut degrees: Vec<usize> = d.pi.iter().map(|p| p.len()).collect();
        degrees.sort();
        assert_eq!(degrees, vec![2, 2, 3, 3]);
        let total: usize = degrees.iter().sum();
        assert_eq!(total, 2 * d.edges.len());
    }

    #[test]
    fn lone_loop_gets_a_seam() {
        let d = build_drawing(vec![circle(v(0.0, 0.0), 1.0)], DEFAULT_TOL).unwrap();
        assert_eq!(d.vertices.len(), 1);
        assert!(d.vertices[0].seam);
        assert_eq!(d.edges.len(), 1);
        assert!(d.edges[0].is_loop());
        let signed: Vec<i64> = d.pi[0].iter().map(|h| h.signed()).collect();
        assert_eq!(signed, vec![1, -1]);
    }

    #[test]
    fn closed_curve_wraps_over_its_seam() {
        let c = circle(v(0.0, 0.0), 1.0);
        let cut = ParamCurve::segment(v(-2.0, 0.5), v(2.0, 0.5));
        let d = build_drawing(vec![c.clone(), cut], DEFAULT_TOL).unwrap();
        assert_eq!(d.vertices.len(), 2);
        // two arcs of the circle and the chord; segment tails are not edges
        assert_eq!(d.edges.len(), 3);
        let wrap = d.edges.iter().find(|e| e.wraps).unwrap();
        assert!(wrap.t_lo > wrap.t_hi);
        assert!(wrap.geometry.eval(0.0).distance(d.vertices[wrap.v_from].position) < 1e-9);
        assert!(wrap.geometry.eval(1.0).distance(d.vertices[wrap.v_to].position) < 1e-9);
        let split = (1.0 - wrap.t_lo) / ((1.0 - wrap.t_lo) + wrap.t_hi);
        assert!(wrap.geometry.eval(split).distance(c.start()) < 1e-12);
        for i in 0..=10 {
            let s = i as f64 / 10.0;
            let t = if s <= split {
                wrap.t_lo + s / split * (1.0 - wrap.t_lo)
            } else {
                (s - split) / (1.0 - split) * wrap.t_hi
            };
            assert!(wrap.geometry.eval(s).distance(c.eval(t)) < 1e-12);
        }
        assert_eq!(d.curve_vertices[0].first(), d.curve_vertices[0].last());
    }

    #[test]
    fn tables_are_dual() {
        let mut curves = square();
        curves.push(ParamCurve::segment(v(0.0, 0.0), v(1.0, 1.0)));
        curves.push(ParamCurve::segment(v(0.0, 1.0), v(1.0, 0.0)));
        let d = build_drawing(curves, DEFAULT_TOL).unwrap();
        for (c, list) in d.curve_vertices.iter().enumerate() {
            for &vid in list {
                assert!(d.vertex_curves[vid].contains(&c));
            }
        }
        for (vid, set) in d.vertex_curves.iter().enumerate() {
            for &c in set {
                assert!(d.curve_vertices[c].contains(&vid));
            }
        }
        assert_eq!(d.vertices.len(), 5);
    }

    #[test]
    fn half_edge_ids() {
        let h = HalfEdge::new(6, true);
        assert_eq!(h.signed(), -7);
        assert_eq!(HalfEdge::from_signed(-7), Some(h));
        assert_eq!(h.twin().signed(), 7);
        assert_eq!(HalfEdge::from_signed(0), None);
    }

    #[test]
    fn empty_input() {
        let d = build_drawing(Vec::new(), DEFAULT_TOL).unwrap();
        assert!(d.vertices.is_empty() && d.edges.is_empty());
    }
}
