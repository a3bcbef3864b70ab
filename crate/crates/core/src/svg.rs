// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! SVG rendering of extracted regions.
//!
//! Every interior region becomes one filled path. Bézier pieces up to degree
//! three map to `L`, `Q` and `C` commands; higher degrees are split and
//! approximated by cubics. The approximation is for display only.

use std::fmt::Write as _;

use crate::curve::{bezier_split, de_casteljau, ParamCurve};
use crate::drawing::Drawing;
use crate::geom::{BBox, Point2};
use crate::regions::{RegionSet, Trail};

/// Largest parametric distance between a curve and its cubic display
/// approximation, in user units.
pub const CUBIC_TOL: f64 = 1e-4;

const MAX_SPLIT_DEPTH: usize = 24;

/// One drawing command of a path, in absolute coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Seg {
    Line(Point2),
    Quad(Point2, Point2),
    Cubic(Point2, Point2, Point2),
}

impl Seg {
    pub fn end(&self) -> Point2 {
        match *self {
            Seg::Line(p) | Seg::Quad(_, p) | Seg::Cubic(_, _, p) => p,
        }
    }
}

/// Closed subpath: start point and segments. The last segment ends at the
/// start up to the drawing tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct SubPath {
    pub start: Point2,
    pub segs: Vec<Seg>,
}

impl SubPath {
    /// Distance the closing `Z` has to bridge.
    pub fn closure_gap(&self) -> f64 {
        self.segs.last().map_or(0.0, |s| s.end().distance(self.start))
    }
}

/// Segments tracing `c` from its start, with pieces above degree three
/// replaced by cubics within `tol`.
pub fn curve_segs(c: &ParamCurve, tol: f64) -> Vec<Seg> {
    let mut out = Vec::new();
    for piece in c.bezier_pieces() {
        let p = &piece.points;
        match p.len() {
            2 => out.push(Seg::Line(p[1])),
            3 => out.push(Seg::Quad(p[1], p[2])),
            4 => out.push(Seg::Cubic(p[1], p[2], p[3])),
            _ => reduce(p, tol, 0, &mut out),
        }
    }
    out
}

/// Cubic with the end points and end tangents of `p`.
fn hermite_cubic(p: &[Point2]) -> [Point2; 4] {
    let n = (p.len() - 1) as f64;
    let last = p.len() - 1;
    let a = p[0] + (p[1] - p[0]) * (n / 3.0);
    let b = p[last] - (p[last] - p[last - 1]) * (n / 3.0);
    [p[0], a, b, p[last]]
}

fn reduce(p: &[Point2], tol: f64, depth: usize, out: &mut Vec<Seg>) {
    let c = hermite_cubic(p);
    let err = (1..32)
        .map(|i| {
            let t = i as f64 / 32.0;
            de_casteljau(p, t).distance(de_casteljau(&c, t))
        })
        .fold(0.0, f64::max);
    if err <= tol || depth >= MAX_SPLIT_DEPTH {
        out.push(Seg::Cubic(c[1], c[2], c[3]));
        return;
    }
    let (l, r) = bezier_split(p, 0.5);
    reduce(&l, tol, depth + 1, out);
    reduce(&r, tol, depth + 1, out);
}

/// Subpath along a trail of `d`.
pub fn trail_subpath(d: &Drawing, trail: &Trail, tol: f64) -> SubPath {
    let start = d.geometry(trail[0].1).start();
    let segs = trail.iter().flat_map(|&(_, h)| curve_segs(&d.geometry(h), tol)).collect();
    SubPath { start, segs }
}

/// Subpaths of every interior region: the region's own trail followed by
/// the outlines of its holes.
pub fn region_subpaths(rs: &RegionSet, tol: f64) -> Vec<Vec<SubPath>> {
    rs.regions
        .iter()
        .map(|r| {
            let mut paths = vec![trail_subpath(&rs.drawing, &r.trail, tol)];
            for &c in &r.holes {
                if let Some(o) = rs.outer.iter().find(|o| o.component == c) {
                    paths.push(trail_subpath(&rs.drawing, &o.trail, tol));
                }
            }
            paths
        })
        .collect()
}

fn num(x: f64) -> String {
    // shortest round-trip form, with negative zero folded
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x}")
}

fn pt(s: &mut String, p: Point2) {
    let _ = write!(s, "{} {}", num(p.x), num(p.y));
}

/// Path data (`d` attribute) for a list of closed subpaths.
pub fn path_data(paths: &[SubPath]) -> String {
    let mut s = String::new();
    for (k, sp) in paths.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        s.push_str("M ");
        pt(&mut s, sp.start);
        for seg in &sp.segs {
            match *seg {
                Seg::Line(p) => {
                    s.push_str(" L ");
                    pt(&mut s, p);
                }
                Seg::Quad(a, p) => {
                    s.push_str(" Q ");
                    pt(&mut s, a);
                    s.push(' ');
                    pt(&mut s, p);
                }
                Seg::Cubic(a, b, p) => {
                    s.push_str(" C ");
                    pt(&mut s, a);
                    s.push(' ');
                    pt(&mut s, b);
                    s.push(' ');
                    pt(&mut s, p);
                }
            }
        }
        s.push_str(" Z");
    }
    s
}

/// Fill color of region `i`: hues spaced by the golden angle.
pub fn fill_color(i: usize) -> String {
    let hue = (i as f64 * 137.507_764_050_037_85) % 360.0;
    format!("hsl({hue:.1}, 65%, 70%)")
}

/// Full SVG document with one filled path per interior region. The y axis
/// points up.
pub fn regions_svg(rs: &RegionSet) -> String {
    let paths = region_subpaths(rs, CUBIC_TOL);
    let bbox = rs.drawing.active_edges().fold(BBox::EMPTY, |b, e| b.union(e.geometry.bbox()));
    let bbox = if bbox.is_empty() { BBox { min: Point2::ZERO, max: Point2::new(1.0, 1.0) } } else { bbox };
    let margin = 0.05 * bbox.diagonal().max(1e-9);
    let (x0, y0) = (bbox.min.x - margin, bbox.min.y - margin);
    let (w, h) = (bbox.width() + 2.0 * margin, bbox.height() + 2.0 * margin);
    let stroke = 0.004 * bbox.diagonal().max(1e-9);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        num(x0),
        num(-(y0 + h)),
        num(w),
        num(h)
    );
    let _ = writeln!(s, r#"<g transform="scale(1,-1)" stroke="black" stroke-width="{}">"#, num(stroke));
    for (i, sp) in paths.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<path id="region-{}" fill="{}" fill-rule="evenodd" d="{}"/>"#,
            i + 1,
            fill_color(i),
            path_data(sp)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Start and closing points of every subpath in SVG path data written by
/// [`path_data`], for checking that `Z` closes each one.
pub fn subpath_ends(d: &str) -> Vec<(Point2, Point2)> {
    let mut out = Vec::new();
    let mut nums: Vec<f64> = Vec::new();
    let mut start = None;
    for tok in d.split_whitespace() {
        match tok {
            "M" | "L" | "Q" | "C" => {
                if tok == "M" {
                    start = None;
                }
                nums.clear();
            }
            "Z" => {
                if let (Some(s), [.., x, y]) = (start, nums.as_slice()) {
                    out.push((s, Point2::new(*x, *y)));
                }
                nums.clear();
            }
            t => {
                if let Ok(v) = t.parse::<f64>() {
                    nums.push(v);
                    if start.is_none() && nums.len() == 2 {
                        start = Some(Point2::new(nums[0], nums[1]));
                    }
                }
            }
        }
    }
    out
}
