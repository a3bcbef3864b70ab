// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks. Each check prints one PASS or FAIL line and the
//! target fails when any check fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::{check_topology, compare_with_oracle, p, random_arrangement, regions_for};
use curveplan::drawing::{build_drawing, DEFAULT_TOL};
use curveplan::gauss::gauss_legendre;
use curveplan::integrate::{integrate_all, tile_regions};
use curveplan::interface::{integrate_spline_product, InterfaceMesh, InterfaceOptions};
use curveplan::io::{read_curves, read_func, read_map};
use curveplan::quasi::{level_set_coeffs, llm_project, Source};
use curveplan::regions::{regions_of, RegionSet};
use curveplan::spline2d::{SplineFunc2D, SplineMap2D, SplineSpace2D};
use curveplan::{ParamCurve, Point2, Vec2};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;

/// Standard output and the sorted output files of one command.
type Outputs = (Vec<u8>, Vec<(String, Vec<u8>)>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn fixture_regions(name: &str) -> Result<RegionSet, String> {
    let curves = read_curves(&read_fixture(name)).map_err(|e| e.to_string())?;
    let d = build_drawing(curves, DEFAULT_TOL).map_err(|e| e.to_string())?;
    regions_of(&d).map_err(|e| e.to_string())
}

/// `∮ x dy` along a curve, from the curve itself rather than the drawing.
fn green_area(c: &ParamCurve) -> f64 {
    let g = gauss_legendre(32);
    c.breakpoints().windows(2).map(|w| g.integrate(w[0], w[1], |t| c.eval(t).x * c.derivative(t, 1).unwrap().y)).sum()
}

fn loops_and_branch() -> Check {
    let start = Instant::now();
    let curves = read_curves(&read_fixture("loops_and_branch.json")).map_err(|e| e.to_string())?;
    let raw = build_drawing(curves.clone(), DEFAULT_TOL).map_err(|e| e.to_string())?;
    let rs = regions_of(&raw).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();

    ensure(rs.regions.len() == 3, || format!("{} interior regions, expected 3", rs.regions.len()))?;
    ensure(rs.outer.len() == 2, || format!("{} outer regions, expected 2", rs.outer.len()))?;
    // the branch ends at the crossing (-0.9, -0.9), which is purged with it
    let knee = p(-0.9, -0.9);
    ensure(raw.active_vertices().any(|v| v.position.distance(knee) < 1e-9), || "branch vertex missing".into())?;
    ensure(!rs.drawing.active_vertices().any(|v| v.position.distance(knee) < 1e-9), || "branch vertex kept".into())?;
    ensure(rs.drawing.active_edges().all(|e| e.curve_id < 3 || e.curve_id == 5), || "branch edge kept".into())?;
    ensure(rs.drawing.active_vertices().count() == 3, || "expected 3 vertices after purge".into())?;

    let mut loops: Vec<f64> = Vec::new();
    let mut bigon = None;
    for r in &rs.regions {
        match r.trail.len() {
            1 => {
                let e = &rs.drawing.edges[r.trail[0].1.edge()];
                ensure(e.is_loop(), || "one-pair trail over a non-loop edge".into())?;
                loops.push(r.signed_area);
            }
            2 => bigon = Some(r.signed_area),
            n => return Err(format!("unexpected trail of {n} pairs")),
        }
    }
    ensure(loops.len() == 2, || format!("{} one-pair loop regions, expected 2", loops.len()))?;
    let bigon = bigon.ok_or("no bigon")?;
    ensure((bigon - 2.0 / 3.0).abs() < 1e-12, || format!("bigon area {bigon}"))?;
    // the loop curves are the third and sixth; one runs clockwise
    let mut want = [green_area(&curves[2]).abs(), green_area(&curves[5]).abs()];
    want.sort_by(f64::total_cmp);
    loops.sort_by(f64::total_cmp);
    for (a, b) in loops.iter().zip(&want) {
        ensure((a - b).abs() < 1e-9, || format!("loop area {a} vs {b}"))?;
    }
    ensure(elapsed < 1.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!("3 regions, 2 components, {elapsed:.3}s"))
}

fn random_cases(seed: u64, count: usize) -> Vec<Vec<common::Seg>> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(3..=8);
            random_arrangement(&mut rng, n)
        })
        .collect()
}

fn random_vs_oracle() -> Check {
    let start = Instant::now();
    let mut regions = 0;
    for (k, segs) in random_cases(1, 200).iter().enumerate() {
        let (_, rs) = regions_for(segs);
        compare_with_oracle(segs, &rs, 1e-9).map_err(|e| format!("case {k}: {e}"))?;
        regions += rs.regions.len();
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 30.0, || format!("took {elapsed:.1}s"))?;
    Ok(format!("200 cases, {regions} regions, {elapsed:.2}s"))
}

fn interface_fixture() -> Result<InterfaceMesh, String> {
    let t1 = read_map(&read_fixture("map1.json")).map_err(|e| e.to_string())?;
    let t2 = read_map(&read_fixture("map2.json")).map_err(|e| e.to_string())?;
    InterfaceMesh::build(&t1, &t2, InterfaceOptions::default()).map_err(|e| e.to_string())
}

fn euler_and_handshake() -> Check {
    let mut count = 0;
    for name in ["square_diagonal.json", "curved_region.json", "loops_and_branch.json", "unit_square.json"] {
        check_topology(&fixture_regions(name)?).map_err(|e| format!("{name}: {e}"))?;
        count += 1;
    }
    check_topology(&interface_fixture()?.regions).map_err(|e| format!("interface mesh: {e}"))?;
    count += 1;
    for (k, segs) in random_cases(2, 200).iter().enumerate() {
        check_topology(&regions_for(segs).1).map_err(|e| format!("random case {k}: {e}"))?;
        count += 1;
    }
    Ok(format!("{count} drawings"))
}

/// `∫∫ sin(πx/2) cos(πy) eˣ` over a region as `∮ F dy` with
/// `F = cos(πy) eˣ (sin(ax) − a cos(ax)) / (1 + a²)`, `a = π/2`.
fn smooth_reference(rs: &RegionSet, region: usize) -> f64 {
    let a = PI / 2.0;
    let big_f = |q: Point2| (PI * q.y).cos() * q.x.exp() * ((a * q.x).sin() - a * (a * q.x).cos()) / (1.0 + a * a);
    let g = gauss_legendre(64);
    let mut acc = 0.0;
    for &(_, h) in &rs.regions[region].trail {
        let c = rs.drawing.geometry(h);
        for w in c.breakpoints().windows(2) {
            acc += g.integrate(w[0], w[1], |t| big_f(c.eval(t)) * c.derivative(t, 1).unwrap().y);
        }
    }
    acc
}

fn smooth_convergence() -> Check {
    let start = Instant::now();
    let rs = fixture_regions("curved_region.json")?;
    ensure(rs.regions.len() == 1, || "expected one region".into())?;
    let reference = smooth_reference(&rs, 0);
    let tiles = tile_regions(&rs).map_err(|e| e.to_string())?;
    let f = |q: Point2| (PI / 2.0 * q.x).sin() * (PI * q.y).cos() * q.x.exp();
    let errors: Vec<f64> = (0..=5)
        .map(|j| integrate_all(&rs, &tiles, &f, 1 << j).map(|v| (v - reference).abs()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let table = errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ");
    for j in 1..=3 {
        ensure(errors[j + 1] <= errors[j] / 10.0, || format!("E({}) / E({j}) above 1/10: {table}", j + 1))?;
    }
    ensure(errors[5] < 1e-11, || format!("E(5) = {:.2e}", errors[5]))?;
    ensure(elapsed < 5.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!("E = {table}"))
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_curveplan")).args(args).output().expect("curveplan runs")
}

fn stopping_rule() -> Check {
    // on the unit square the tile is the identity, so two points per
    // direction integrate x²y exactly while one point does not: the loop must
    // stop at level 2
    let sq = fixture("unit_square.json");
    let out = run_cli(&["integrate", sq.to_str().unwrap(), "-f", "x^2*y + 2*x", "--reference", "none"]);
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    ensure(rows.len() == 3, || format!("{} levels, expected 3", rows.len()))?;
    let delta = |r: &[&str]| r[3].parse::<f64>().unwrap();
    ensure(delta(&rows[1]) >= 1e-12, || "level 1 already converged".into())?;
    ensure(delta(&rows[2]) < 1e-12, || "level 2 not converged".into())?;
    let value: f64 = rows[2][2].parse().unwrap();
    ensure((value - (1.0 / 6.0 + 1.0)).abs() < 1e-14, || format!("value {value}"))?;
    Ok("halted at level 2".into())
}

fn product_fields() -> (SplineMap2D, SplineMap2D, SplineFunc2D, SplineFunc2D) {
    let s1 =
        SplineSpace2D::new([2, 2], [vec![0., 0., 0., 0.5, 1., 1., 1.], vec![0., 0., 0., 0.5, 1., 1., 1.]]).unwrap();
    let s2 = SplineSpace2D::new([1, 1], [vec![0., 0., 0.3, 0.7, 1., 1.], vec![0., 0., 0.4, 1., 1.]]).unwrap();
    let c1 = (0..s1.len()).map(|k| ((k * 7 % 5) as f64 - 2.0) * 0.5).collect();
    let c2 = vec![3.0, -3.0, 6.0, 0.0, 1.5, 9.0, -6.0, 3.0, -3.0, 6.0, 0.0, 4.5];
    let f1 = SplineFunc2D::new(s1, c1).unwrap();
    let f2 = SplineFunc2D::new(s2, c2).unwrap();
    let t1 = SplineMap2D::identity(&[0.5], &[0.5]);
    let t2 = SplineMap2D::identity(&[0.3, 0.7], &[0.4]);
    (t1, t2, f1, f2)
}

fn spline_product() -> Check {
    let start = Instant::now();
    let (t1, t2, f1, f2) = product_fields();
    let n = 4;
    let aware_mesh = InterfaceMesh::build(&t1, &t2, InterfaceOptions::default()).map_err(|e| e.to_string())?;
    let single_mesh = InterfaceMesh::single_mesh(&t1, &t2, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let aware = integrate_spline_product(&f1, &f2, &aware_mesh, n).map_err(|e| e.to_string())?;
    let single = integrate_spline_product(&f1, &f2, &single_mesh, n).map_err(|e| e.to_string())?;

    // common refinement of both knot grids, Gauss on every cell
    let grid = |dir: usize| {
        let mut g: Vec<f64> = f1.space().breaks(dir).iter().chain(f2.space().breaks(dir)).copied().collect();
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    };
    let g = gauss_legendre(n);
    let mut oracle = 0.0;
    for u in grid(0).windows(2) {
        for v in grid(1).windows(2) {
            let mid = p(0.5 * (u[0] + u[1]), 0.5 * (v[0] + v[1]));
            let (e1, e2) = (f1.space().element_at(mid), f2.space().element_at(mid));
            oracle += g.integrate(u[0], u[1], |x| {
                g.integrate(v[0], v[1], |y| f1.eval_in(e1, p(x, y)) * f2.eval_in(e2, p(x, y)))
            });
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let (ea, es) = ((aware - oracle).abs(), (single - oracle).abs());
    ensure(ea <= 1e-12, || format!("region-aware error {ea:.2e}"))?;
    ensure(es > 1e-4, || format!("single-mesh error only {es:.2e}"))?;
    ensure(elapsed < 5.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!("aware {ea:.1e}, single-mesh {es:.1e}"))
}

/// Affine map `q ↦ o + q.x a + q.y b` read off a spline map's corners.
#[derive(Clone, Copy)]
struct Affine {
    o: Point2,
    a: Vec2,
    b: Vec2,
}

impl Affine {
    fn of(t: &SplineMap2D) -> Affine {
        let o = t.eval(0.0, 0.0);
        Affine { o, a: t.eval(1.0, 0.0) - o, b: t.eval(0.0, 1.0) - o }
    }

    fn apply(&self, q: Point2) -> Point2 {
        self.o + self.a * q.x + self.b * q.y
    }

    fn inverse(&self, x: Point2) -> Point2 {
        let d = x - self.o;
        let det = self.a.x * self.b.y - self.a.y * self.b.x;
        p((d.x * self.b.y - d.y * self.b.x) / det, (self.a.x * d.y - self.a.y * d.x) / det)
    }
}

/// Rotated square of side `side` centered at `c`, as a bilinear map.
fn rotated_square(c: Point2, side: f64, degrees: f64, space: SplineSpace2D) -> SplineMap2D {
    let (s, co) = degrees.to_radians().sin_cos();
    SplineMap2D::from_greville(space, |q| {
        let (x, y) = (side * (q.x - 0.5), side * (q.y - 0.5));
        p(c.x + co * x - s * y, c.y + s * x + co * y)
    })
    .unwrap()
}

fn doubled_square() -> SplineMap2D {
    SplineMap2D::from_greville(SplineSpace2D::uniform([2, 2], [2, 2]), |q| p(2.0 * q.x, 2.0 * q.y)).unwrap()
}

fn llm_properties() -> Check {
    let mut worst = (0.0f64, 0.0f64);
    // an affine T₂ covering T₁ composes a bilinear field into a quadratic,
    // which the target space contains
    let t1 = doubled_square();
    let t2 = rotated_square(p(1.0, 1.0), 3.0, 20.0, SplineSpace2D::uniform([1, 1], [1, 1]));
    let f = SplineFunc2D::from_greville(SplineSpace2D::uniform([1, 1], [1, 1]), |u, v| 1.0 + 2.0 * u - v + 3.0 * u * v);
    let mesh = InterfaceMesh::build(&t1, &t2, InterfaceOptions::default()).map_err(|e| e.to_string())?;
    let pr = llm_project(Source::Second(&f), t1.space(), &mesh, None).map_err(|e| e.to_string())?;
    let (a1, a2) = (Affine::of(&t1), Affine::of(&t2));
    for i in 0..=20 {
        for j in 0..=20 {
            let u = p(i as f64 / 20.0, j as f64 / 20.0);
            let want = f.eval(a2.inverse(a1.apply(u)));
            worst.0 = worst.0.max((pr.func.eval(u) - want).abs());
        }
    }
    ensure(pr.reports.iter().all(|r| r.condition.is_finite() && r.residual < 1e-10), || "bad local solve".into())?;
    let again = llm_project(Source::First(&pr.func), t1.space(), &mesh, None).map_err(|e| e.to_string())?;
    for (a, b) in again.func.coefs().iter().zip(pr.func.coefs()) {
        worst.1 = worst.1.max((a - b).abs());
    }

    // spline with interior knots on matching maps
    let s = SplineSpace2D::new([2, 2], [vec![0., 0., 0., 0.5, 1., 1., 1.], vec![0., 0., 0., 0.3, 0.6, 1., 1., 1.]])
        .unwrap();
    let coefs = (0..s.len()).map(|k| ((k * 5 % 7) as f64 - 3.0) * 0.25).collect();
    let g = SplineFunc2D::new(s.clone(), coefs).unwrap();
    let t = SplineMap2D::identity(&[0.5], &[0.3, 0.6]);
    let mesh = InterfaceMesh::build(&t, &t, InterfaceOptions::default()).map_err(|e| e.to_string())?;
    let pr = llm_project(Source::Second(&g), &s, &mesh, None).map_err(|e| e.to_string())?;
    for (a, b) in pr.func.coefs().iter().zip(g.coefs()) {
        worst.0 = worst.0.max((a - b).abs());
    }
    let again = llm_project(Source::First(&pr.func), &s, &mesh, None).map_err(|e| e.to_string())?;
    for (a, b) in again.func.coefs().iter().zip(pr.func.coefs()) {
        worst.1 = worst.1.max((a - b).abs());
    }

    ensure(worst.0 <= 1e-10, || format!("reproduction error {:.2e}", worst.0))?;
    ensure(worst.1 <= 1e-12, || format!("idempotence error {:.2e}", worst.1))?;
    Ok(format!("reproduction {:.1e}, idempotence {:.1e}", worst.0, worst.1))
}

/// Part of a convex polygon with `dot(n, x) <= c`.
fn clip(poly: &[Point2], n: Vec2, c: f64) -> Vec<Point2> {
    let side = |q: Point2| n.x * q.x + n.y * q.y - c;
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            out.push(a + (b - a) * (sa / (sa - sb)));
        }
    }
    out
}

fn clip_rect(poly: &[Point2], (u0, u1, v0, v1): (f64, f64, f64, f64)) -> Vec<Point2> {
    let mut out = poly.to_vec();
    for (n, c) in
        [(Vec2::new(-1.0, 0.0), -u0), (Vec2::new(1.0, 0.0), u1), (Vec2::new(0.0, -1.0), -v0), (Vec2::new(0.0, 1.0), v1)]
    {
        if out.len() < 3 {
            break;
        }
        out = clip(&out, n, c);
    }
    out
}

/// Integral over a convex polygon by fanning into triangles, each mapped
/// from the unit square with the collapsed-coordinate substitution.
fn polygon_integral(poly: &[Point2], f: impl Fn(Point2) -> f64) -> f64 {
    let g = gauss_legendre(5);
    let mut acc = 0.0;
    for k in 1..poly.len().saturating_sub(1) {
        let (a, b, c) = (poly[0], poly[k], poly[k + 1]);
        let det = ((b - a).x * (c - a).y - (b - a).y * (c - a).x).abs();
        acc += g.integrate(0.0, 1.0, |s| g.integrate(0.0, 1.0, |t| s * det * f(a + (b - a) * s + (c - b) * (s * t))));
    }
    acc
}

/// `∫_Θ δ∘T₂⁻¹∘T₁` for affine maps, on the exact pieces where the
/// integrand is one polynomial.
fn theta_integral(t1: &SplineMap2D, t2: &SplineMap2D, delta: &SplineFunc2D, theta: &[(usize, usize)]) -> f64 {
    let (a1, a2) = (Affine::of(t1), Affine::of(t2));
    let to_first = |q: Point2| a1.inverse(a2.apply(q));
    let to_second = |u: Point2| a2.inverse(a1.apply(u));
    let s2 = delta.space();
    let mut acc = 0.0;
    for eu in 0..s2.element_count(0) {
        for ev in 0..s2.element_count(1) {
            let (q0, q1, r0, r1) = s2.element_rect((eu, ev));
            let mut quad: Vec<Point2> =
                [p(q0, r0), p(q1, r0), p(q1, r1), p(q0, r1)].into_iter().map(to_first).collect();
            let signed: f64 = (0..4).map(|i| quad[i].x * quad[(i + 1) % 4].y - quad[(i + 1) % 4].x * quad[i].y).sum();
            if signed < 0.0 {
                quad.reverse();
            }
            for &e1 in theta {
                let piece = clip_rect(&quad, t1.space().element_rect(e1));
                if piece.len() >= 3 {
                    acc += polygon_integral(&piece, |u| delta.eval_in((eu, ev), to_second(u)));
                }
            }
        }
    }
    acc
}

fn level_set_properties() -> Check {
    let t1 = doubled_square();
    let trimmed_map = read_map(&read_fixture("map2.json")).map_err(|e| e.to_string())?;
    let trimmed_field = read_func(&read_fixture("source.json")).map_err(|e| e.to_string())?;
    let covering_space =
        SplineSpace2D::new([2, 1], [vec![0., 0., 0., 0.4, 1., 1., 1.], vec![0., 0., 0.5, 1., 1.]]).unwrap();
    let covering_field = SplineFunc2D::new(
        covering_space.clone(),
        (0..covering_space.len()).map(|k| (k as f64 * 0.7).sin() * 2.0).collect(),
    )
    .unwrap();
    let covering_map = rotated_square(p(1.0, 1.0), 3.0, 20.0, covering_space);
    let nested_space =
        SplineSpace2D::new([1, 2], [vec![0., 0., 0.5, 1., 1.], vec![0., 0., 0., 0.3, 0.6, 1., 1., 1.]]).unwrap();
    let nested_field = SplineFunc2D::new(
        nested_space.clone(),
        (0..nested_space.len()).map(|k| (k as f64 * 1.3).cos() - 0.3).collect(),
    )
    .unwrap();
    let nested_map = SplineMap2D::from_greville(nested_space, |q| p(0.3 + 1.2 * q.x, 0.5 + 1.2 * q.y)).unwrap();

    let cases = [
        ("trimmed", trimmed_map, trimmed_field, true),
        ("covering", covering_map, covering_field, false),
        ("nested", nested_map, nested_field, true),
    ];
    let mut worst = (0.0f64, 0.0f64);
    for (name, t2, delta, partial) in &cases {
        let mesh = InterfaceMesh::build(&t1, t2, InterfaceOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let ls = level_set_coeffs(delta, t1.space(), &mesh, None).map_err(|e| format!("{name}: {e}"))?;
        // zero extension adds 0 to the range where the cover is partial
        let extra = if *partial { [0.0] } else { [delta.coefs()[0]] };
        let lo = delta.coefs().iter().chain(&extra).copied().fold(f64::INFINITY, f64::min);
        let hi = delta.coefs().iter().chain(&extra).copied().fold(f64::NEG_INFINITY, f64::max);
        for c in ls.coefficients() {
            worst.0 = worst.0.max(lo - c).max(c - hi);
        }
        let want = theta_integral(&t1, t2, delta, &ls.theta_elements());
        let got = ls.integral_over_theta();
        ensure((got - want).abs() <= 1e-10, || format!("{name}: average {got} vs {want}"))?;
        worst.1 = worst.1.max((got - want).abs());
    }
    ensure(worst.0 <= 1e-10, || format!("bounds exceeded by {:.2e}", worst.0))?;
    Ok(format!("3 fixtures, bound slack {:.1e}, average error {:.1e}", worst.0.max(0.0), worst.1))
}

fn fixture_commands(dir: &Path) -> Vec<Vec<String>> {
    let f = |n: &str| fixture(n).to_str().unwrap().to_string();
    let o = |n: &str| dir.join(n).to_str().unwrap().to_string();
    let maps = |v: &mut Vec<String>| v.extend(["--map1".into(), f("map1.json"), "--map2".into(), f("map2.json")]);
    let mut cmds: Vec<Vec<String>> = vec![
        vec![
            "extract".into(),
            f("square_diagonal.json"),
            "--svg".into(),
            o("square.svg"),
            "--out".into(),
            o("square.json"),
        ],
        vec!["extract".into(), f("loops_and_branch.json"), "--keep-outer".into(), "--svg".into(), o("loops.svg")],
        vec![
            "integrate".into(),
            f("curved_region.json"),
            "-f".into(),
            "sin(pi/2*x)*cos(pi*y)*exp(x)".into(),
            "--out".into(),
            o("table.csv"),
        ],
    ];
    let mut mesh = vec!["mesh-intersect".to_string()];
    maps(&mut mesh);
    mesh.extend(["--svg".into(), o("mesh.svg"), "--regions".into(), o("mesh.json")]);
    cmds.push(mesh);
    for mode in ["llm", "levelset"] {
        let mut q = vec!["quasi-interp".to_string()];
        maps(&mut q);
        q.extend([
            "--source".into(),
            f("source.json"),
            "--target".into(),
            f("target.json"),
            "--mode".into(),
            mode.into(),
        ]);
        q.extend(["--out".into(), o(&format!("{mode}.json"))]);
        cmds.push(q);
    }
    cmds
}

fn determinism() -> Check {
    let runs: Vec<Vec<Outputs>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            fixture_commands(dir.path())
                .iter()
                .map(|args| {
                    let out = Command::new(env!("CARGO_BIN_EXE_curveplan")).args(args).output().unwrap();
                    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
                    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
                        .unwrap()
                        .map(|e| e.unwrap())
                        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
                        .collect();
                    files.sort();
                    (out.stdout, files)
                })
                .collect()
        })
        .collect();
    let commands = runs[0].len();
    for (k, (a, b)) in runs[0].iter().zip(&runs[1]).enumerate() {
        ensure(a == b, || format!("command {k} differs between runs"))?;
    }
    let files = runs[0].last().map_or(0, |r| r.1.len());
    Ok(format!("{commands} commands, {files} output files identical"))
}

#[allow(clippy::type_complexity)]
fn main() {
    let checks: [(&str, fn() -> Check); 9] = [
        ("loops, bigon and dangling branch", loops_and_branch),
        ("random arrangements vs exact oracle", random_vs_oracle),
        ("Euler and handshake invariants", euler_and_handshake),
        ("smooth integration convergence", smooth_convergence),
        ("adaptive stopping rule", stopping_rule),
        ("spline product exactness", spline_product),
        ("LLM reproduction and idempotence", llm_properties),
        ("level-set bounds and average", level_set_properties),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in checks.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(detail) => println!("PASS {}. {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
