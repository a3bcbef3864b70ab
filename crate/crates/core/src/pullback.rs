// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Pull-back of physical curves into the parameter square of a spline map.
//!
//! A curve is first clipped to the image of the map, then split where it
//! crosses the map's knot lines (the inverse is only piecewise smooth
//! there) and at its own breakpoints. Each piece is sampled at
//! Chebyshev–Lobatto parameters, inverted pointwise with warm starts and
//! fitted by least squares with fixed end points. The pieces are joined
//! into one B-spline that shares the parameter of the source curve.

use nalgebra::DMatrix;

use crate::basis::{self, basis_funs, find_span, Side};
use crate::curve::ParamCurve;
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::spline2d::SplineMap2D;

pub const DEFAULT_FIT_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLE_COUNT: usize = 64;

/// Parameter tolerance for locating where a curve leaves the image.
const CLIP_TOL: f64 = 1e-10;
/// Coarse samples per span used for clipping and knot-line crossings.
const COARSE: usize = 32;
/// Distance in the parameter square below which end points are snapped
/// onto knot lines and the square boundary.
const SNAP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PullBackOptions {
    pub sample_count: usize,
    pub fit_tol: f64,
}

impl Default for PullBackOptions {
    fn default() -> Self {
        PullBackOptions { sample_count: DEFAULT_SAMPLE_COUNT, fit_tol: DEFAULT_FIT_TOL }
    }
}

/// Smooth piece of a pulled-back arc, in source parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitPiece {
    pub t0: f64,
    pub t1: f64,
    /// The piece runs along a knot line or a side of the parameter square.
    pub on_line: bool,
}

#[derive(Clone, Debug)]
pub struct PulledBackCurve {
    /// Fitted curve in the parameter square; its parameter is the source
    /// curve's parameter on `source_range`.
    pub curve: ParamCurve,
    /// Largest `‖T(fit(τ)) − γ(τ)‖` over samples and sample midpoints.
    pub residual: f64,
    pub source_range: (f64, f64),
    pub pieces: Vec<FitPiece>,
}

/// Pulls back `gamma`, which must meet the image of `map` in one arc.
/// When it meets it in several, the longest arc is returned.
pub fn pull_back(map: &SplineMap2D, gamma: &ParamCurve, sample_count: usize, fit_tol: f64) -> Result<PulledBackCurve> {
    let arcs = pull_back_arcs(map, gamma, PullBackOptions { sample_count, fit_tol })?;
    if arcs.len() > 1 {
        log::warn!("curve meets the map image in {} arcs; keeping the longest", arcs.len());
    }
    arcs.into_iter()
        .max_by(|a, b| (a.source_range.1 - a.source_range.0).total_cmp(&(b.source_range.1 - b.source_range.0)))
        .ok_or_else(|| Error::OutsideImage { p: gamma.start(), residual: f64::INFINITY })
}

/// Pulls back every arc of `gamma` inside the image of `map`.
pub fn pull_back_arcs(map: &SplineMap2D, gamma: &ParamCurve, opts: PullBackOptions) -> Result<Vec<PulledBackCurve>> {
    inside_arcs(map, gamma).into_iter().map(|(a, b, uv)| fit_arc(map, gamma, a, b, uv, opts)).collect()
}

fn invert_from(map: &SplineMap2D, p: Point2, warm: Option<(f64, f64)>) -> Option<(f64, f64)> {
    match warm {
        Some(g) => map.invert(p, g).or_else(|_| map.invert_global(p)).ok(),
        None => map.invert_global(p).ok(),
    }
}

fn coarse_params(gamma: &ParamCurve, a: f64, b: f64) -> Vec<f64> {
    let mut cuts = vec![a];
    cuts.extend(gamma.breakpoints().into_iter().filter(|&k| k > a && k < b));
    cuts.push(b);
    let mut ts = Vec::new();
    for w in cuts.windows(2) {
        for k in 0..COARSE {
            ts.push(w[0] + (w[1] - w[0]) * k as f64 / COARSE as f64);
        }
    }
    ts.push(b);
    ts
}

/// Maximal parameter intervals of `gamma` inside the image, with the
/// inverted start point of each.
fn inside_arcs(map: &SplineMap2D, gamma: &ParamCurve) -> Vec<(f64, f64, (f64, f64))> {
    let (lo, hi) = gamma.domain();
    let len = hi - lo;
    let ts = coarse_params(gamma, lo, hi);
    let mut state = Vec::with_capacity(ts.len());
    let mut warm = None;
    for &t in &ts {
        warm = invert_from(map, gamma.eval(t), warm);
        state.push(warm);
    }
    let bisect = |mut t_in: f64, mut uv: (f64, f64), mut t_out: f64| {
        while (t_out - t_in).abs() > CLIP_TOL * len {
            let mid = 0.5 * (t_in + t_out);
            match map.invert(gamma.eval(mid), uv) {
                Ok(r) => {
                    t_in = mid;
                    uv = r;
                }
                Err(_) => t_out = mid,
            }
        }
        (t_in, uv)
    };
    let mut arcs = Vec::new();
    let mut k = 0;
    while k < ts.len() {
        let Some(uv0) = state[k] else {
            k += 1;
            continue;
        };
        let start = if k == 0 { (ts[0], uv0) } else { bisect(ts[k], uv0, ts[k - 1]) };
        let mut e = k;
        while e + 1 < ts.len() && state[e + 1].is_some() {
            e += 1;
        }
        let end = if e + 1 == ts.len() { ts[e] } else { bisect(ts[e], state[e].unwrap(), ts[e + 1]).0 };
        if end - start.0 > 1e-9 * len {
            arcs.push((start.0, end, start.1));
        }
        k = e + 1;
    }
    arcs
}

/// Piece boundary: parameter, inverted point, and an exact coordinate
/// `(dir, value)` when the boundary is a knot-line crossing.
type Boundary = (f64, (f64, f64), Option<(usize, f64)>);

fn fit_arc(
    map: &SplineMap2D,
    gamma: &ParamCurve,
    a: f64,
    b: f64,
    uv_a: (f64, f64),
    opts: PullBackOptions,
) -> Result<PulledBackCurve> {
    let len = b - a;
    let ts = coarse_params(gamma, a, b);
    let mut inv = Vec::with_capacity(ts.len());
    let mut warm = Some(uv_a);
    for &t in &ts {
        let uv = invert_from(map, gamma.eval(t), warm)
            .ok_or(Error::OutsideImage { p: gamma.eval(t), residual: f64::NAN })?;
        inv.push(uv);
        warm = Some(uv);
    }
    let mut bounds: Vec<Boundary> = vec![(a, uv_a, None)];
    let bps = gamma.breakpoints();
    for k in 1..ts.len() - 1 {
        if bps.contains(&ts[k]) {
            bounds.push((ts[k], inv[k], None));
        }
    }
    for dir in 0..2 {
        let coord = |q: (f64, f64)| if dir == 0 { q.0 } else { q.1 };
        for &c in map.space().interior_breaks(dir) {
            // sign changes of coord − c, skipping samples on the line itself
            let mut last: Option<usize> = None;
            for k in 0..ts.len() {
                let s = coord(inv[k]) - c;
                if s.abs() <= SNAP {
                    continue;
                }
                if let Some(j) = last {
                    let below = coord(inv[j]) < c;
                    if (s < 0.0) != below {
                        let (t, uv) = crossing(map, gamma, dir, c, ts[j], ts[k], inv[j], below);
                        bounds.push((t, uv, Some((dir, c))));
                    }
                }
                last = Some(k);
            }
        }
    }
    bounds.sort_by(|x, y| x.0.total_cmp(&y.0));
    bounds.push((b, *inv.last().unwrap(), None));
    bounds.dedup_by(|next, prev| {
        if next.0 - prev.0 <= 1e-12 * len.max(1.0) {
            if prev.2.is_none() {
                prev.2 = next.2;
            }
            true
        } else {
            false
        }
    });
    let breaks = [map.space().breaks(0), map.space().breaks(1)];
    let snapped: Vec<(f64, f64)> = bounds
        .iter()
        .map(|&(_, uv, exact)| {
            let mut c = [uv.0, uv.1];
            for dir in 0..2 {
                if let Some((d, v)) = exact {
                    if d == dir {
                        c[dir] = v;
                        continue;
                    }
                }
                if let Some(&v) = breaks[dir].iter().find(|&&v| (c[dir] - v).abs() <= SNAP) {
                    c[dir] = v;
                }
            }
            (c[0], c[1])
        })
        .collect();

    let base_degree = gamma.degree().max(3);
    let mut worst = (0.0, a);
    for level in 0..2 {
        let degree = base_degree + 2 * level;
        let n_int = (opts.sample_count / 8).max(1) * 4usize.pow(level as u32);
        let m = (opts.sample_count * 4usize.pow(level as u32)).max(3 * (degree + 1 + n_int));
        let mut fits = Vec::with_capacity(bounds.len() - 1);
        worst = (0.0, a);
        for k in 0..bounds.len() - 1 {
            let fit =
                fit_piece(map, gamma, (bounds[k].0, bounds[k + 1].0), (snapped[k], snapped[k + 1]), degree, n_int, m)?;
            if fit.residual > worst.0 {
                worst = (fit.residual, fit.worst_t);
            }
            fits.push(fit);
        }
        if worst.0 <= opts.fit_tol {
            let pieces = fits.iter().map(|f| FitPiece { t0: f.t0, t1: f.t1, on_line: f.on_line }).collect();
            let curve = join_fits(degree, &fits)?;
            return Ok(PulledBackCurve { curve, residual: worst.0, source_range: (a, b), pieces });
        }
        log::debug!("pull-back residual {:.3e} at level {level}; escalating", worst.0);
    }
    Err(Error::PullBack { residual: worst.0, tol: opts.fit_tol, worst: gamma.eval(worst.1) })
}

/// Locates by bisection the parameter in `[t0, t1]` where the inverted
/// coordinate `dir` crosses `c`.
#[allow(clippy::too_many_arguments)]
fn crossing(
    map: &SplineMap2D,
    gamma: &ParamCurve,
    dir: usize,
    c: f64,
    mut t0: f64,
    mut t1: f64,
    mut uv: (f64, f64),
    below_at_t0: bool,
) -> (f64, (f64, f64)) {
    let mut best = uv;
    for _ in 0..200 {
        if t1 - t0 <= 1e-15 * t1.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (t0 + t1);
        let Some(r) = invert_from(map, gamma.eval(mid), Some(uv)) else { break };
        let coord = if dir == 0 { r.0 } else { r.1 };
        if (coord < c) == below_at_t0 {
            t0 = mid;
            uv = r;
        } else {
            t1 = mid;
        }
        best = r;
    }
    (0.5 * (t0 + t1), best)
}

struct Fit {
    t0: f64,
    t1: f64,
    knots: Vec<f64>,
    ctrl: Vec<Point2>,
    residual: f64,
    worst_t: f64,
    on_line: bool,
}

fn fit_piece(
    map: &SplineMap2D,
    gamma: &ParamCurve,
    (t0, t1): (f64, f64),
    (uv0, uv1): ((f64, f64), (f64, f64)),
    degree: usize,
    n_int: usize,
    m: usize,
) -> Result<Fit> {
    let taus: Vec<f64> = (0..m)
        .map(|k| t0 + (t1 - t0) * 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / (m - 1) as f64).cos()))
        .collect();
    let mut q = Vec::with_capacity(m);
    q.push(Point2::new(uv0.0, uv0.1));
    let mut warm = uv0;
    for &t in &taus[1..m - 1] {
        let p = gamma.eval(t);
        let r = invert_from(map, p, Some(warm)).ok_or(Error::OutsideImage { p, residual: f64::NAN })?;
        q.push(Point2::new(r.0, r.1));
        warm = r;
    }
    q.push(Point2::new(uv1.0, uv1.1));

    let on_line = (0..2).any(|dir| {
        let coord = |p: &Point2| if dir == 0 { p.x } else { p.y };
        map.space().breaks(dir).iter().any(|&c| q.iter().all(|p| (coord(p) - c).abs() <= SNAP))
    });

    // interior knots at uniform arc length of the inverted samples
    let mut s = vec![0.0; m];
    for k in 1..m {
        s[k] = s[k - 1] + q[k].distance(q[k - 1]);
    }
    let total = s[m - 1];
    let mut interior = Vec::with_capacity(n_int);
    for i in 1..=n_int {
        let frac = i as f64 / (n_int + 1) as f64;
        let tau = if total > 0.0 {
            let target = frac * total;
            let k = s.partition_point(|&x| x < target).clamp(1, m - 1);
            let w = if s[k] > s[k - 1] { (target - s[k - 1]) / (s[k] - s[k - 1]) } else { 0.0 };
            taus[k - 1] + w * (taus[k] - taus[k - 1])
        } else {
            t0 + frac * (t1 - t0)
        };
        interior.push(tau);
    }
    let min_gap = 1e-6 * (t1 - t0);
    let monotone = interior.iter().fold((t0, true), |(prev, ok), &x| (x, ok && x - prev > min_gap)).1
        && t1 - interior.last().copied().unwrap_or(t0) > min_gap;
    if !monotone {
        interior = (1..=n_int).map(|i| t0 + (t1 - t0) * i as f64 / (n_int + 1) as f64).collect();
    }
    let mut knots = vec![t0; degree + 1];
    knots.extend_from_slice(&interior);
    knots.extend(std::iter::repeat_n(t1, degree + 1));
    let n = knots.len() - degree - 1;

    let free = n - 2;
    let mut a = DMatrix::<f64>::zeros(m, free);
    let mut rhs = DMatrix::<f64>::zeros(m, 2);
    for (k, &t) in taus.iter().enumerate() {
        let span = find_span(degree, &knots, t, Side::Right);
        let b = basis_funs(span, t, degree, &knots);
        let mut r = q[k];
        for (o, w) in b.iter().enumerate() {
            let j = span - degree + o;
            if j == 0 {
                r = r - q[0] * *w;
            } else if j == n - 1 {
                r = r - q[m - 1] * *w;
            } else {
                a[(k, j - 1)] = *w;
            }
        }
        rhs[(k, 0)] = r.x;
        rhs[(k, 1)] = r.y;
    }
    let sol = a.svd(true, true).solve(&rhs, 1e-14).map_err(|msg| {
        log::error!("least-squares solve failed: {msg}");
        Error::PullBack { residual: f64::INFINITY, tol: 0.0, worst: gamma.eval(t0) }
    })?;
    let mut ctrl = Vec::with_capacity(n);
    ctrl.push(q[0]);
    for j in 0..free {
        ctrl.push(Point2::new(sol[(j, 0)], sol[(j, 1)]));
    }
    ctrl.push(q[m - 1]);

    let mut residual = 0.0;
    let mut worst_t = t0;
    let mut check = |t: f64| {
        let f = basis::eval(degree, &knots, &ctrl, t, Side::Right);
        let e = map.eval(f.x, f.y).distance(gamma.eval(t));
        if e > residual {
            residual = e;
            worst_t = t;
        }
    };
    for k in 0..m {
        check(taus[k]);
        if k + 1 < m {
            check(0.5 * (taus[k] + taus[k + 1]));
        }
    }
    Ok(Fit { t0, t1, knots, ctrl, residual, worst_t, on_line })
}

/// Joins consecutive fits of equal degree into one B-spline, C⁰ at joints.
fn join_fits(degree: usize, fits: &[Fit]) -> Result<ParamCurve> {
    let mut knots = vec![fits[0].t0; degree + 1];
    let mut ctrl = vec![fits[0].ctrl[0]];
    for (k, f) in fits.iter().enumerate() {
        knots.extend_from_slice(&f.knots[degree + 1..f.knots.len() - degree - 1]);
        let reps = if k + 1 == fits.len() { degree + 1 } else { degree };
        knots.extend(std::iter::repeat_n(f.t1, reps));
        ctrl.extend_from_slice(&f.ctrl[1..]);
    }
    ParamCurve::bspline(degree, knots, ctrl)
}
