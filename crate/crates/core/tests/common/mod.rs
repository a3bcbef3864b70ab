// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use curveplan::drawing::{build_drawing, Drawing, DEFAULT_TOL};
use curveplan::regions::{regions_of, RegionSet};
use curveplan::{ParamCurve, Point2};
use curveplan_oracle::segment_arrangement;
use rand::rngs::StdRng;
use rand::Rng;

pub type Seg = ([f64; 2], [f64; 2]);

pub fn segment_curves(segs: &[Seg]) -> Vec<ParamCurve> {
    segs.iter().map(|&(a, b)| ParamCurve::segment(a.into(), b.into())).collect()
}

/// Random segments whose exact arrangement has no two vertices closer than
/// `1e-4`, so floating-point vertex clustering cannot change the topology.
pub fn random_segments(rng: &mut StdRng, count: usize) -> Vec<Seg> {
    loop {
        let segs: Vec<Seg> = (0..count).map(|_| (rng.gen::<[f64; 2]>(), rng.gen::<[f64; 2]>())).collect();
        if well_separated(&segs) {
            return segs;
        }
    }
}

/// A closed random polygon of three to five corners (possibly
/// self-intersecting) plus free random segments, `count` segments in all.
pub fn random_arrangement(rng: &mut StdRng, count: usize) -> Vec<Seg> {
    loop {
        let k = rng.gen_range(3..=count.clamp(3, 5));
        let corners: Vec<[f64; 2]> = (0..k).map(|_| rng.gen()).collect();
        let mut segs: Vec<Seg> = (0..k).map(|i| (corners[i], corners[(i + 1) % k])).collect();
        segs.extend((k..count).map(|_| (rng.gen::<[f64; 2]>(), rng.gen::<[f64; 2]>())));
        if well_separated(&segs) {
            return segs;
        }
    }
}

pub fn well_separated(segs: &[Seg]) -> bool {
    if segs.iter().any(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]) < 1e-3) {
        return false;
    }
    // nearly collinear overlaps are rejected by the drawing builder
    for (i, s) in segs.iter().enumerate() {
        for t in &segs[..i] {
            let (ds, dt) = (sub(s.1, s.0), sub(t.1, t.0));
            let sin = (ds[0] * dt[1] - ds[1] * dt[0]) / (ds[0].hypot(ds[1]) * dt[0].hypot(dt[1]));
            let close = [t.0, t.1].iter().any(|&q| point_segment_distance(q, *s) < 1e-4)
                || [s.0, s.1].iter().any(|&q| point_segment_distance(q, *t) < 1e-4);
            if sin.abs() < 1e-3 && close {
                return false;
            }
        }
    }
    let a = segment_arrangement(segs);
    let pts: Vec<[f64; 2]> = a.vertices.iter().map(|v| v.to_f64()).collect();
    for i in 0..pts.len() {
        for j in 0..i {
            if (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]) < 1e-4 {
                return false;
            }
        }
    }
    true
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn point_segment_distance(q: [f64; 2], (a, b): Seg) -> f64 {
    let (d, w) = (sub(b, a), sub(q, a));
    let t = ((w[0] * d[0] + w[1] * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
    (w[0] - t * d[0]).hypot(w[1] - t * d[1])
}

pub fn regions_for(segs: &[Seg]) -> (Drawing, RegionSet) {
    let d = build_drawing(segment_curves(segs), DEFAULT_TOL).unwrap();
    let rs = regions_of(&d).unwrap();
    (d, rs)
}

/// Euler, half-edge conservation, handshake and one outer region per
/// component.
pub fn check_topology(rs: &RegionSet) -> Result<(), String> {
    let d = &rs.drawing;
    let comps = d.components();
    let ncomp = comps.iter().flatten().max().map_or(0, |c| c + 1);
    let edges = d.active_edges().count();
    let pi_total: usize = d.pi.iter().map(Vec::len).sum();
    if pi_total != 2 * edges {
        return Err(format!("handshake: Σ|Π| = {pi_total}, 2|E| = {}", 2 * edges));
    }
    let trail_total: usize = rs.regions.iter().chain(&rs.outer).map(|r| r.trail.len()).sum();
    if trail_total != 2 * edges {
        return Err(format!("half-edge conservation: Σ|trail| = {trail_total}, 2|E| = {}", 2 * edges));
    }
    if rs.outer.len() != ncomp {
        return Err(format!("{} outer regions for {ncomp} components", rs.outer.len()));
    }
    for c in 0..ncomp {
        let v = d.active_vertices().filter(|x| comps[x.id] == Some(c)).count() as i64;
        let e = d.active_edges().filter(|x| comps[x.v_from] == Some(c)).count() as i64;
        let f = rs.regions.iter().filter(|r| r.component == c).count() as i64;
        if v - e + f + 1 != 2 {
            return Err(format!("Euler on component {c}: V={v} E={e} F={f}"));
        }
        let neg = rs.outer.iter().filter(|r| r.component == c && r.signed_area < 0.0).count();
        if neg != 1 || rs.regions.iter().any(|r| r.component == c && r.signed_area <= 0.0) {
            return Err(format!("component {c} does not have exactly one negative region"));
        }
    }
    Ok(())
}

/// Sorted interior areas compared with the exact oracle.
pub fn compare_with_oracle(segs: &[Seg], rs: &RegionSet, tol: f64) -> Result<(), String> {
    let exact = segment_arrangement(segs).interior_areas();
    let mut ours: Vec<f64> = rs.regions.iter().map(|r| r.signed_area).collect();
    ours.sort_by(f64::total_cmp);
    if exact.len() != ours.len() {
        return Err(format!("{} regions, oracle has {}", ours.len(), exact.len()));
    }
    for (a, b) in ours.iter().zip(&exact) {
        if (a - b).abs() > tol {
            return Err(format!("area {a} vs oracle {b}"));
        }
    }
    Ok(())
}

pub fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}
