// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Interface meshes between two spline maps and exact integration of
//! spline products across them.
//!
//! All integrals are taken in the parameter square of the first map `T₁`.
//! The drawing consists of the square's sides, the knot lines of `T₁` and
//! the pull-backs of the knot curves and boundary of the second map `T₂`.
//! Each extracted region then lies in one knot element of `T₁` and, where
//! it is covered by `T₂`, maps under `T₂⁻¹ ∘ T₁` into one element of `T₂`,
//! so a product of splines is a single smooth function on every region.

use rayon::prelude::*;

use crate::curve::ParamCurve;
use crate::drawing::{build_drawing, Drawing, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::geom::{winding_number, Point2};
use crate::pullback::{pull_back_arcs, PullBackOptions, PulledBackCurve};
use crate::regions::{regions_of, trail_polygon, RegionSet};
use crate::spline2d::{Index2, SplineFunc2D, SplineMap2D};
use crate::tile::Tile;

/// Slack for deciding that a parameter point lies in a knot element.
const ELEMENT_TOL: f64 = 1e-12;
/// Gauss points per direction used to classify regions.
const CLASSIFY_POINTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceOptions {
    pub tol: f64,
    pub pull_back: PullBackOptions,
}

impl Default for InterfaceOptions {
    fn default() -> Self {
        InterfaceOptions { tol: DEFAULT_TOL, pull_back: PullBackOptions::default() }
    }
}

/// Interface drawing together with the pull-backs that went into it.
#[derive(Clone, Debug)]
pub struct InterfaceDrawing {
    pub drawing: Drawing,
    pub pullbacks: Vec<PulledBackCurve>,
}

fn square_and_knot_lines(t1: &SplineMap2D) -> Vec<ParamCurve> {
    let p = Point2::new;
    let mut curves = vec![
        ParamCurve::segment(p(0.0, 0.0), p(1.0, 0.0)),
        ParamCurve::segment(p(1.0, 0.0), p(1.0, 1.0)),
        ParamCurve::segment(p(1.0, 1.0), p(0.0, 1.0)),
        ParamCurve::segment(p(0.0, 1.0), p(0.0, 0.0)),
    ];
    for &c in t1.space().interior_breaks(0) {
        curves.push(ParamCurve::segment(p(c, 0.0), p(c, 1.0)));
    }
    for &c in t1.space().interior_breaks(1) {
        curves.push(ParamCurve::segment(p(0.0, c), p(1.0, c)));
    }
    curves
}

/// Builds the interface drawing in the parameter square of `t1`.
///
/// Pieces of pulled-back curves that run along a knot line of `t1` or a
/// side of the square are already part of the drawing and are skipped.
pub fn build_interface_drawing(t1: &SplineMap2D, t2: &SplineMap2D, opts: InterfaceOptions) -> Result<InterfaceDrawing> {
    let mut curves = square_and_knot_lines(t1);
    let mut sources = t2.knot_iso_curves();
    sources.extend(t2.boundary_curves());
    let pulled: Vec<Vec<PulledBackCurve>> =
        sources.par_iter().map(|g| pull_back_arcs(t1, g, opts.pull_back)).collect::<Result<_>>()?;
    let pullbacks: Vec<PulledBackCurve> = pulled.into_iter().flatten().collect();
    for pb in &pullbacks {
        let mut run: Option<(f64, f64)> = None;
        let flush = |run: &mut Option<(f64, f64)>, curves: &mut Vec<ParamCurve>| -> Result<()> {
            if let Some((a, b)) = run.take() {
                curves.push(pb.curve.restrict(a, b)?);
            }
            Ok(())
        };
        for piece in &pb.pieces {
            if piece.on_line {
                flush(&mut run, &mut curves)?;
            } else {
                run = Some(run.map_or((piece.t0, piece.t1), |(a, _)| (a, piece.t1)));
            }
        }
        flush(&mut run, &mut curves)?;
    }
    let drawing = build_drawing(curves, opts.tol)?;
    Ok(InterfaceDrawing { drawing, pullbacks })
}

/// Element incidence of one interior region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionInfo {
    pub element1: Index2,
    /// Element of `t2` containing the region's image under `T₂⁻¹ ∘ T₁`;
    /// `None` when the region is not covered or the mesh ignores `t2`'s
    /// elements.
    pub element2: Option<Index2>,
    pub covered: bool,
}

/// Quadrature node in the parameter square of `t1`, with its preimage
/// under `t2` when that is defined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub p: Point2,
    pub w: f64,
    pub q: Option<Point2>,
}

#[derive(Clone, Debug)]
pub struct InterfaceMesh {
    pub t1: SplineMap2D,
    pub t2: SplineMap2D,
    pub regions: RegionSet,
    pub tiles: Vec<Vec<Tile>>,
    pub info: Vec<RegionInfo>,
    pub pullbacks: Vec<PulledBackCurve>,
    /// Whether regions follow the elements of `t2` as well.
    pub aware: bool,
    hole_polygons: Vec<Vec<Vec<Point2>>>,
}

impl InterfaceMesh {
    /// Region-aware mesh from the full interface drawing.
    pub fn build(t1: &SplineMap2D, t2: &SplineMap2D, opts: InterfaceOptions) -> Result<InterfaceMesh> {
        let id = build_interface_drawing(t1, t2, opts)?;
        InterfaceMesh::from_drawing(t1, t2, &id.drawing, id.pullbacks, true)
    }

    /// Mesh of the knot elements of `t1` only, ignoring `t2`'s knots and
    /// boundary. Used as the naive baseline.
    pub fn single_mesh(t1: &SplineMap2D, t2: &SplineMap2D, tol: f64) -> Result<InterfaceMesh> {
        let d = build_drawing(square_and_knot_lines(t1), tol)?;
        InterfaceMesh::from_drawing(t1, t2, &d, Vec::new(), false)
    }

    fn from_drawing(
        t1: &SplineMap2D,
        t2: &SplineMap2D,
        d: &Drawing,
        pullbacks: Vec<PulledBackCurve>,
        aware: bool,
    ) -> Result<InterfaceMesh> {
        let regions = regions_of(d)?;
        let tiles = crate::integrate::tile_regions(&regions)?;
        let hole_polygons = regions
            .regions
            .iter()
            .map(|r| {
                r.holes
                    .iter()
                    .filter_map(|&c| regions.outer.iter().find(|o| o.component == c))
                    .map(|o| trail_polygon(&regions.drawing, &o.trail, 32))
                    .collect()
            })
            .collect();
        let mut mesh = InterfaceMesh {
            t1: t1.clone(),
            t2: t2.clone(),
            regions,
            tiles,
            info: Vec::new(),
            pullbacks,
            aware,
            hole_polygons,
        };
        mesh.info = (0..mesh.regions.regions.len()).into_par_iter().map(|i| mesh.classify(i)).collect::<Result<_>>()?;
        Ok(mesh)
    }

    fn own_nodes(&self, region: usize, n: usize) -> Result<Vec<(Point2, f64)>> {
        let mut out = Vec::new();
        for (k, t) in self.tiles[region].iter().enumerate() {
            out.extend(t.nodes(n, k)?);
        }
        Ok(out)
    }

    fn in_hole(&self, region: usize, p: Point2) -> bool {
        self.hole_polygons[region].iter().any(|poly| winding_number(poly, p) != 0)
    }

    fn classify(&self, region: usize) -> Result<RegionInfo> {
        let pts: Vec<Point2> = self
            .own_nodes(region, CLASSIFY_POINTS)?
            .into_iter()
            .map(|(p, _)| p)
            .filter(|&p| !self.in_hole(region, p))
            .collect();
        let s1 = self.t1.space();
        let element1 = s1.element_at(pts[0]);
        if !pts.iter().all(|&p| in_rect(s1.element_rect(element1), p)) {
            return Err(Error::RegionNotInElement { region });
        }
        let mut warm = None;
        let pre: Vec<Option<Point2>> = pts.iter().map(|&p| self.preimage(p, &mut warm)).collect();
        let hits = pre.iter().filter(|q| q.is_some()).count();
        let covered = hits == pts.len();
        if !self.aware {
            return Ok(RegionInfo { element1, element2: None, covered });
        }
        if hits != 0 && !covered {
            return Err(Error::PullBackAccuracy { region });
        }
        let element2 = if covered {
            let s2 = self.t2.space();
            let q0 = pre[0].unwrap();
            let e = s2.element_at(q0);
            if !pre.iter().flatten().all(|&q| in_rect(s2.element_rect(e), q)) {
                return Err(Error::RegionNotInElement { region });
            }
            Some(e)
        } else {
            None
        };
        Ok(RegionInfo { element1, element2, covered })
    }

    /// `T₂⁻¹(T₁(p))`, warm-started from the previous node.
    fn preimage(&self, p: Point2, warm: &mut Option<(f64, f64)>) -> Option<Point2> {
        let x = self.t1.eval(p.x, p.y);
        let r = match *warm {
            Some(g) => self.t2.invert(x, g).or_else(|_| self.t2.invert_global(x)),
            None => self.t2.invert_global(x),
        }
        .ok()?;
        *warm = Some(r);
        Some(Point2::new(r.0, r.1))
    }

    /// Quadrature nodes of region `region` with `n` Gauss points per tile
    /// direction. Nested components are subtracted through nodes with
    /// negated weights.
    pub fn region_nodes(&self, region: usize, n: usize) -> Result<Vec<Node>> {
        let info = self.info[region];
        let mut raw: Vec<(Point2, f64)> = self.own_nodes(region, n)?;
        for &c in &self.regions.regions[region].holes {
            for (j, r) in self.regions.regions.iter().enumerate() {
                if r.component == c {
                    raw.extend(self.own_nodes(j, n)?.into_iter().map(|(p, w)| (p, -w)));
                }
            }
        }
        let mut warm = None;
        let mut out = Vec::with_capacity(raw.len());
        for (p, w) in raw {
            let q = if info.covered || !self.aware {
                let q = self.preimage(p, &mut warm);
                if q.is_none() && self.aware {
                    return Err(Error::PullBackAccuracy { region });
                }
                q
            } else {
                None
            };
            out.push(Node { p, w, q });
        }
        Ok(out)
    }

    pub fn nodes(&self, n: usize) -> Result<Vec<Vec<Node>>> {
        (0..self.info.len()).into_par_iter().map(|i| self.region_nodes(i, n)).collect()
    }

    /// `Σ_regions Σ_nodes w · f(info, p, q)` in region order.
    pub fn integrate_nodes(
        nodes: &[Vec<Node>],
        info: &[RegionInfo],
        f: impl Fn(&RegionInfo, &Node) -> f64 + Sync,
    ) -> f64 {
        let parts: Vec<f64> =
            nodes.par_iter().zip(info).map(|(ns, inf)| ns.iter().map(|nd| nd.w * f(inf, nd)).sum::<f64>()).collect();
        parts.iter().sum()
    }

    /// Evaluates `s` on `t2`'s side at a node, by the polynomial piece of
    /// the region's element when one is known; zero where uncovered.
    pub fn eval_second(info: &RegionInfo, s: &SplineFunc2D, node: &Node) -> f64 {
        match (node.q, info.element2) {
            (Some(q), Some(e)) => s.eval_in(e, q),
            (Some(q), None) => s.eval(q),
            (None, _) => 0.0,
        }
    }
}

fn in_rect((u0, u1, v0, v1): (f64, f64, f64, f64), p: Point2) -> bool {
    p.x >= u0 - ELEMENT_TOL && p.x <= u1 + ELEMENT_TOL && p.y >= v0 - ELEMENT_TOL && p.y <= v1 + ELEMENT_TOL
}

/// `∫ s₁ · s₂(T₂⁻¹ ∘ T₁)` over the parameter square of `t1`, with the second
/// factor extended by zero outside the image of `t2`.
pub fn integrate_spline_product(s1: &SplineFunc2D, s2: &SplineFunc2D, mesh: &InterfaceMesh, n: usize) -> Result<f64> {
    let nodes = mesh.nodes(n)?;
    Ok(InterfaceMesh::integrate_nodes(&nodes, &mesh.info, |inf, nd| {
        s1.eval_in(inf.element1, nd.p) * InterfaceMesh::eval_second(inf, s2, nd)
    }))
}
