// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact reference arrangement of line segments in rational arithmetic.
//!
//! Input coordinates are converted from `f64` without rounding. All
//! intersection points, orderings and areas are then exact, so the result
//! is a ground truth for floating-point extraction on inputs in general
//! position. As in the drawing model, only points where two segments meet
//! become vertices; the free ends beyond the first and last meeting point
//! are dropped. Collinear overlapping segments are merged.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Q = BigRational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct QPoint {
    pub x: Q,
    pub y: Q,
}

impl QPoint {
    pub fn from_f64(p: [f64; 2]) -> QPoint {
        QPoint { x: q(p[0]), y: q(p[1]) }
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [self.x.to_f64().unwrap_or(f64::NAN), self.y.to_f64().unwrap_or(f64::NAN)]
    }
}

/// Exact value of a finite double.
pub fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite coordinate")
}

fn cross(o: &QPoint, a: &QPoint, b: &QPoint) -> Q {
    (&a.x - &o.x) * (&b.y - &o.y) - (&a.y - &o.y) * (&b.x - &o.x)
}

/// Parameters along `a` where segment `b` meets it (one point, the two ends
/// of a collinear overlap, or none).
fn hits(a0: &QPoint, a1: &QPoint, b0: &QPoint, b1: &QPoint) -> Vec<Q> {
    let d = (&a1.x - &a0.x) * (&b1.y - &b0.y) - (&a1.y - &a0.y) * (&b1.x - &b0.x);
    let one = Q::from_integer(BigInt::from(1));
    let zero = Q::zero();
    debug_assert!(a0 != a1 && b0 != b1);
    if d.is_zero() {
        if !cross(a0, a1, b0).is_zero() {
            return Vec::new();
        }
        // collinear: intersect b's span, in a's parameter, with [0, 1]
        let len2 = (&a1.x - &a0.x) * (&a1.x - &a0.x) + (&a1.y - &a0.y) * (&a1.y - &a0.y);
        let t = |p: &QPoint| ((&p.x - &a0.x) * (&a1.x - &a0.x) + (&p.y - &a0.y) * (&a1.y - &a0.y)) / &len2;
        let (s0, s1) = (t(b0), t(b1));
        let (lo, hi) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
        let (lo, hi) = (lo.max(zero), hi.min(one));
        return match lo.cmp(&hi) {
            std::cmp::Ordering::Less => vec![lo, hi],
            std::cmp::Ordering::Equal => vec![lo],
            std::cmp::Ordering::Greater => Vec::new(),
        };
    }
    let t = ((&b0.x - &a0.x) * (&b1.y - &b0.y) - (&b0.y - &a0.y) * (&b1.x - &b0.x)) / &d;
    let s = ((&b0.x - &a0.x) * (&a1.y - &a0.y) - (&b0.y - &a0.y) * (&a1.x - &a0.x)) / &d;
    if t >= zero && t <= one && s >= zero && s <= one {
        vec![t]
    } else {
        Vec::new()
    }
}

/// A face boundary: vertex cycle and exact signed area (positive for
/// bounded faces, negative for the outer boundary of a component).
#[derive(Clone, Debug)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub area: Q,
    pub component: usize,
}

#[derive(Clone, Debug)]
pub struct Arrangement {
    pub vertices: Vec<QPoint>,
    /// Undirected edges after purging dangling chains.
    pub edges: Vec<(usize, usize)>,
    pub faces: Vec<Face>,
    pub components: usize,
}

impl Arrangement {
    /// Bounded face areas, ascending.
    pub fn interior_areas(&self) -> Vec<f64> {
        let mut a: Vec<f64> =
            self.faces.iter().filter(|f| f.area.is_positive()).map(|f| f.area.to_f64().unwrap_or(f64::NAN)).collect();
        a.sort_by(f64::total_cmp);
        a
    }

    pub fn interior_count(&self) -> usize {
        self.faces.iter().filter(|f| f.area.is_positive()).count()
    }

    /// Vertices with at least one edge.
    pub fn active_vertex_count(&self) -> usize {
        let mut seen = vec![false; self.vertices.len()];
        for &(a, b) in &self.edges {
            seen[a] = true;
            seen[b] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }
}

/// Exact arrangement of `segments`, with dangling chains removed.
pub fn segment_arrangement(segments: &[([f64; 2], [f64; 2])]) -> Arrangement {
    let segs: Vec<(QPoint, QPoint)> =
        segments.iter().filter(|(a, b)| a != b).map(|(a, b)| (QPoint::from_f64(*a), QPoint::from_f64(*b))).collect();

    let mut index: BTreeMap<QPoint, usize> = BTreeMap::new();
    let mut vertices: Vec<QPoint> = Vec::new();
    let mut id = |p: QPoint, vertices: &mut Vec<QPoint>| -> usize {
        *index.entry(p.clone()).or_insert_with(|| {
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, (a0, a1)) in segs.iter().enumerate() {
        let mut ts = Vec::new();
        for (j, (b0, b1)) in segs.iter().enumerate() {
            if i != j {
                ts.extend(hits(a0, a1, b0, b1));
            }
        }
        ts.sort();
        ts.dedup();
        let pts: Vec<usize> = ts
            .iter()
            .map(|t| {
                let p = QPoint { x: &a0.x + (&a1.x - &a0.x) * t, y: &a0.y + (&a1.y - &a0.y) * t };
                id(p, &mut vertices)
            })
            .collect();
        for w in pts.windows(2) {
            edge_set.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    let mut edges: Vec<(usize, usize)> = edge_set.into_iter().collect();

    // purge dangling chains
    loop {
        let mut deg = vec![0usize; vertices.len()];
        for &(a, b) in &edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        let before = edges.len();
        edges.retain(|&(a, b)| deg[a] > 1 && deg[b] > 1);
        if edges.len() == before {
            break;
        }
    }

    // outgoing half-edges sorted counter-clockwise by direction
    let n = vertices.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &edges {
        out[a].push(b);
        out[b].push(a);
    }
    for (v, nb) in out.iter_mut().enumerate() {
        let o = vertices[v].clone();
        nb.sort_by(|&p, &r| {
            let (dp, dr) = (dir(&o, &vertices[p]), dir(&o, &vertices[r]));
            let (hp, hr) = (half(&dp), half(&dr));
            hp.cmp(&hr).then_with(|| {
                let c = &dp.0 * &dr.1 - &dp.1 * &dr.0;
                Q::zero().cmp(&c)
            })
        });
    }

    // components by union-find
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    let mut comp_id: BTreeMap<usize, usize> = BTreeMap::new();
    let mut comp = vec![usize::MAX; n];
    for v in 0..n {
        if !out[v].is_empty() {
            let r = find(&mut parent, v);
            let k = comp_id.len();
            comp[v] = *comp_id.entry(r).or_insert(k);
        }
    }

    // face traversal: the face left of u→v continues with the clockwise
    // neighbor of u around v
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut faces = Vec::new();
    for &(a, b) in &edges {
        for start in [(a, b), (b, a)] {
            if used.contains(&start) {
                continue;
            }
            let mut cycle = Vec::new();
            let mut h = start;
            loop {
                used.insert(h);
                cycle.push(h.0);
                let (u, v) = h;
                let around = &out[v];
                let i = around.iter().position(|&w| w == u).expect("twin present");
                let next = around[(i + around.len() - 1) % around.len()];
                h = (v, next);
                if h == start {
                    break;
                }
            }
            let mut area = Q::zero();
            for k in 0..cycle.len() {
                let (p, r) = (&vertices[cycle[k]], &vertices[cycle[(k + 1) % cycle.len()]]);
                area += &p.x * &r.y - &r.x * &p.y;
            }
            area /= Q::from_integer(BigInt::from(2));
            faces.push(Face { component: comp[cycle[0]], vertices: cycle, area });
        }
    }
    Arrangement { vertices, edges, faces, components: comp_id.len() }
}

fn dir(o: &QPoint, p: &QPoint) -> (Q, Q) {
    (&p.x - &o.x, &p.y - &o.y)
}

/// 0 for directions in `[0, π)`, 1 for `[π, 2π)`.
fn half(d: &(Q, Q)) -> u8 {
    if d.1.is_positive() || (d.1.is_zero() && d.0.is_positive()) {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_diagonal() {
        let s = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let mut segs: Vec<_> = (0..4).map(|i| (s[i], s[(i + 1) % 4])).collect();
        segs.push((s[0], s[2]));
        let a = segment_arrangement(&segs);
        assert_eq!(a.interior_areas(), vec![0.5, 0.5]);
        assert_eq!(a.faces.len(), 3);
        assert_eq!(a.components, 1);
    }

    #[test]
    fn crossing_and_dangling() {
        // two crossing diagonals inside a square plus a whisker
        let s = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        let mut segs: Vec<_> = (0..4).map(|i| (s[i], s[(i + 1) % 4])).collect();
        segs.push((s[0], s[2]));
        segs.push((s[1], s[3]));
        segs.push(([2.0, 1.0], [3.0, 1.0]));
        let a = segment_arrangement(&segs);
        assert_eq!(a.interior_areas(), vec![1.0; 4]);
        // the whisker is gone; its foot still splits the right side
        assert_eq!(a.active_vertex_count(), 6);
        assert_eq!(a.edges.len(), 9);
    }

    #[test]
    fn overlap_is_merged() {
        let segs =
            [([0.0, 0.0], [2.0, 0.0]), ([1.0, 0.0], [3.0, 0.0]), ([3.0, 0.0], [0.0, 1.0]), ([0.0, 1.0], [0.0, 0.0])];
        let a = segment_arrangement(&segs);
        assert_eq!(a.interior_areas(), vec![1.5]);
    }

    #[test]
    fn nested_components() {
        let sq = |o: f64, w: f64| {
            let p = [[o, o], [o + w, o], [o + w, o + w], [o, o + w]];
            (0..4).map(move |i| (p[i], p[(i + 1) % 4])).collect::<Vec<_>>()
        };
        let mut segs = sq(0.0, 4.0);
        segs.extend(sq(1.0, 1.0));
        let a = segment_arrangement(&segs);
        assert_eq!(a.components, 2);
        assert_eq!(a.interior_areas(), vec![1.0, 16.0]);
        // Euler per component: V − E + F = 2 with F counting the outer face
        for c in 0..2 {
            let faces = a.faces.iter().filter(|f| f.component == c).count();
            assert_eq!(faces, 2);
        }
    }
}
