// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Tensor-product B-spline spaces on the unit square, scalar spline
//! functions and planar spline maps.
//!
//! Coefficient grids are stored row-major: row `j` holds the coefficients
//! `(0, j), (1, j), …` along the `u` direction, so a flat index is
//! `j * count_u + i`.

use serde::{Deserialize, Serialize};

use crate::basis::{basis_funs, ders_basis_funs, find_span, validate_knots, Side};
use crate::curve::ParamCurve;
use crate::error::{Error, Result};
use crate::geom::{BBox, Point2, Vec2};

/// Samples per element and direction for the bijectivity check.
const DET_SAMPLES: usize = 6;
const MAX_NEWTON: usize = 50;

/// Degrees and clamped knot vectors on `[0, 1]²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceJson", into = "SpaceJson")]
pub struct SplineSpace2D {
    degrees: [usize; 2],
    knots: [Vec<f64>; 2],
    breaks: [Vec<f64>; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceJson {
    pub degrees: [usize; 2],
    pub knots: [Vec<f64>; 2],
}

impl TryFrom<SpaceJson> for SplineSpace2D {
    type Error = Error;
    fn try_from(j: SpaceJson) -> Result<Self> {
        SplineSpace2D::new(j.degrees, j.knots)
    }
}

impl From<SplineSpace2D> for SpaceJson {
    fn from(s: SplineSpace2D) -> Self {
        SpaceJson { degrees: s.degrees, knots: s.knots }
    }
}

/// Index pair `(i, j)` of a knot element or basis function.
pub type Index2 = (usize, usize);

impl SplineSpace2D {
    pub fn new(degrees: [usize; 2], knots: [Vec<f64>; 2]) -> Result<SplineSpace2D> {
        for dir in 0..2 {
            let field = format!("knots[{dir}]");
            let d = degrees[dir];
            let k = &knots[dir];
            if k.len() < 2 * (d + 1) {
                return Err(Error::schema(field, format!("need at least {} knots for degree {d}", 2 * (d + 1))));
            }
            validate_knots(d, k, k.len() - d - 1, &field)?;
            if k[0] != 0.0 || k[k.len() - 1] != 1.0 {
                return Err(Error::schema(field, "knot vector must be clamped to [0, 1]"));
            }
        }
        let breaks = [crate::basis::breakpoints(&knots[0]), crate::basis::breakpoints(&knots[1])];
        Ok(SplineSpace2D { degrees, knots, breaks })
    }

    /// Space with uniform interior knots of multiplicity one.
    pub fn uniform(degrees: [usize; 2], elements: [usize; 2]) -> SplineSpace2D {
        let knots = [0, 1].map(|dir| {
            let interior: Vec<f64> = (1..elements[dir]).map(|k| k as f64 / elements[dir] as f64).collect();
            crate::basis::clamped_knots(degrees[dir], &interior)
        });
        SplineSpace2D::new(degrees, knots).expect("uniform knots are valid")
    }

    pub fn degrees(&self) -> [usize; 2] {
        self.degrees
    }

    pub fn knots(&self, dir: usize) -> &[f64] {
        &self.knots[dir]
    }

    /// Distinct knot values in one direction, both ends included.
    pub fn breaks(&self, dir: usize) -> &[f64] {
        &self.breaks[dir]
    }

    /// Distinct interior knot values in one direction.
    pub fn interior_breaks(&self, dir: usize) -> &[f64] {
        let b = &self.breaks[dir];
        &b[1..b.len() - 1]
    }

    pub fn count(&self, dir: usize) -> usize {
        self.knots[dir].len() - self.degrees[dir] - 1
    }

    pub fn len(&self) -> usize {
        self.count(0) * self.count(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flat(&self, (i, j): Index2) -> usize {
        j * self.count(0) + i
    }

    pub fn unflat(&self, k: usize) -> Index2 {
        (k % self.count(0), k / self.count(0))
    }

    pub fn element_count(&self, dir: usize) -> usize {
        self.breaks[dir].len() - 1
    }

    /// Element index along `dir` containing `t`; the last element owns `1`.
    pub fn element_of(&self, dir: usize, t: f64) -> usize {
        let b = &self.breaks[dir];
        let k = b.partition_point(|&x| x <= t);
        k.clamp(1, b.len() - 1) - 1
    }

    pub fn element_at(&self, p: Point2) -> Index2 {
        (self.element_of(0, p.x), self.element_of(1, p.y))
    }

    /// Parameter rectangle `(u0, u1, v0, v1)` of an element.
    pub fn element_rect(&self, (eu, ev): Index2) -> (f64, f64, f64, f64) {
        (self.breaks[0][eu], self.breaks[0][eu + 1], self.breaks[1][ev], self.breaks[1][ev + 1])
    }

    /// Knot span index of an element along `dir`.
    fn span_of(&self, dir: usize, element: usize) -> usize {
        find_span(self.degrees[dir], &self.knots[dir], self.breaks[dir][element], Side::Right)
    }

    /// Support of basis function `(i, j)` as element index ranges.
    pub fn support_elements(&self, (i, j): Index2) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let r = |dir: usize, k: usize| {
            let d = self.degrees[dir];
            let kn = &self.knots[dir];
            let lo = self.element_of(dir, kn[k]);
            let hi = self.breaks[dir].partition_point(|&x| x < kn[k + d + 1]);
            lo..hi
        };
        (r(0, i), r(1, j))
    }

    /// Support rectangle `(u0, u1, v0, v1)` of basis function `(i, j)`.
    pub fn support(&self, (i, j): Index2) -> (f64, f64, f64, f64) {
        let [du, dv] = self.degrees;
        let [ku, kv] = &self.knots;
        (ku[i], ku[i + du + 1], kv[j], kv[j + dv + 1])
    }

    /// Nonzero basis values on `element`, evaluated by the element's
    /// polynomial pieces. Returns the first basis index per direction and
    /// the values along `u` and `v`.
    pub fn basis_in(&self, element: Index2, p: Point2) -> (Index2, Vec<f64>, Vec<f64>) {
        let su = self.span_of(0, element.0);
        let sv = self.span_of(1, element.1);
        let [du, dv] = self.degrees;
        let nu = basis_funs(su, p.x, du, &self.knots[0]);
        let nv = basis_funs(sv, p.y, dv, &self.knots[1]);
        ((su - du, sv - dv), nu, nv)
    }

    /// Value of basis function `idx` at `p`, using the element containing `p`.
    pub fn basis_value(&self, idx: Index2, p: Point2) -> f64 {
        let e = self.element_at(p);
        self.basis_value_in(idx, e, p)
    }

    pub fn basis_value_in(&self, (i, j): Index2, element: Index2, p: Point2) -> f64 {
        let ((i0, j0), nu, nv) = self.basis_in(element, p);
        if i < i0 || i > i0 + self.degrees[0] || j < j0 || j > j0 + self.degrees[1] {
            return 0.0;
        }
        nu[i - i0] * nv[j - j0]
    }

    /// Greville abscissae along `dir`.
    pub fn greville(&self, dir: usize) -> Vec<f64> {
        let d = self.degrees[dir];
        let k = &self.knots[dir];
        (0..self.count(dir))
            .map(|i| if d == 0 { 0.5 * (k[i] + k[i + 1]) } else { k[i + 1..=i + d].iter().sum::<f64>() / d as f64 })
            .collect()
    }

    fn eval_with<C: crate::basis::Coefficient>(&self, coefs: &[C], element: Index2, p: Point2) -> C {
        let ((i0, j0), nu, nv) = self.basis_in(element, p);
        let mut acc = C::zero();
        for (b, wv) in nv.iter().enumerate() {
            let mut row = C::zero();
            for (a, wu) in nu.iter().enumerate() {
                row = row + coefs[self.flat((i0 + a, j0 + b))] * *wu;
            }
            acc = acc + row * *wv;
        }
        acc
    }

    fn derivs_with(&self, coefs: &[Point2], element: Index2, p: Point2) -> (Point2, Vec2, Vec2) {
        let su = self.span_of(0, element.0);
        let sv = self.span_of(1, element.1);
        let [du, dv] = self.degrees;
        let nu = ders_basis_funs(su, p.x, du, 1, &self.knots[0]);
        let nv = ders_basis_funs(sv, p.y, dv, 1, &self.knots[1]);
        let (i0, j0) = (su - du, sv - dv);
        let (mut s, mut su_, mut sv_) = (Vec2::ZERO, Vec2::ZERO, Vec2::ZERO);
        for b in 0..=dv {
            for a in 0..=du {
                let c = coefs[self.flat((i0 + a, j0 + b))];
                s += c * (nu[0][a] * nv[0][b]);
                su_ += c * (nu[1][a] * nv[0][b]);
                sv_ += c * (nu[0][a] * nv[1][b]);
            }
        }
        (s, su_, sv_)
    }

    fn check_grid<T>(&self, rows: &[Vec<T>], field: &str) -> Result<()> {
        if rows.len() != self.count(1) || rows.iter().any(|r| r.len() != self.count(0)) {
            return Err(Error::schema(
                field,
                format!("grid must have {} rows of {} entries", self.count(1), self.count(0)),
            ));
        }
        Ok(())
    }
}

fn clamp01(t: f64) -> f64 {
    t.clamp(0.0, 1.0)
}

/// Scalar tensor-product spline `s ∈ S_{d,t}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FuncJson", into = "FuncJson")]
pub struct SplineFunc2D {
    space: SplineSpace2D,
    coefs: Vec<f64>,
}

/// Serialized form of [`SplineFunc2D`]: coefficient rows run along `u`,
/// one row per `v` index.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FuncJson {
    pub degrees: [usize; 2],
    pub knots: [Vec<f64>; 2],
    pub coefs: Vec<Vec<f64>>,
}

impl TryFrom<FuncJson> for SplineFunc2D {
    type Error = Error;
    fn try_from(j: FuncJson) -> Result<Self> {
        let space = SplineSpace2D::new(j.degrees, j.knots)?;
        space.check_grid(&j.coefs, "coefs")?;
        if j.coefs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::schema("coefs", "coefficients must be finite"));
        }
        Ok(SplineFunc2D { space, coefs: j.coefs.concat() })
    }
}

impl From<SplineFunc2D> for FuncJson {
    fn from(s: SplineFunc2D) -> Self {
        FuncJson {
            degrees: s.space.degrees,
            coefs: s.coefs.chunks(s.space.count(0)).map(<[f64]>::to_vec).collect(),
            knots: s.space.knots,
        }
    }
}

impl SplineFunc2D {
    pub fn new(space: SplineSpace2D, coefs: Vec<f64>) -> Result<SplineFunc2D> {
        if coefs.len() != space.len() {
            return Err(Error::schema("coefs", format!("expected {} coefficients, got {}", space.len(), coefs.len())));
        }
        Ok(SplineFunc2D { space, coefs })
    }

    pub fn constant(space: SplineSpace2D, c: f64) -> SplineFunc2D {
        let n = space.len();
        SplineFunc2D { space, coefs: vec![c; n] }
    }

    /// Coefficients `f(greville)`; exact for functions linear in each variable.
    pub fn from_greville(space: SplineSpace2D, f: impl Fn(f64, f64) -> f64) -> SplineFunc2D {
        let gu = space.greville(0);
        let gv = space.greville(1);
        let coefs = gv.iter().flat_map(|&v| gu.iter().map(move |&u| (u, v))).map(|(u, v)| f(u, v)).collect::<Vec<_>>();
        SplineFunc2D { space, coefs }
    }

    pub fn space(&self) -> &SplineSpace2D {
        &self.space
    }

    pub fn coefs(&self) -> &[f64] {
        &self.coefs
    }

    pub fn coef(&self, idx: Index2) -> f64 {
        self.coefs[self.space.flat(idx)]
    }

    pub fn eval(&self, p: Point2) -> f64 {
        let q = Point2::new(clamp01(p.x), clamp01(p.y));
        self.space.eval_with(&self.coefs, self.space.element_at(q), q)
    }

    /// Evaluates the polynomial piece of `element`, also outside it.
    pub fn eval_in(&self, element: Index2, p: Point2) -> f64 {
        self.space.eval_with(&self.coefs, element, p)
    }
}

/// Planar tensor-product spline map `T: [0, 1]² → ℝ²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapJson", into = "MapJson")]
pub struct SplineMap2D {
    space: SplineSpace2D,
    points: Vec<Point2>,
    diag: f64,
}

/// Serialized form of [`SplineMap2D`], with the same row layout as
/// [`FuncJson`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapJson {
    pub degrees: [usize; 2],
    pub knots: [Vec<f64>; 2],
    pub points: Vec<Vec<Point2>>,
}

impl TryFrom<MapJson> for SplineMap2D {
    type Error = Error;
    fn try_from(j: MapJson) -> Result<Self> {
        let space = SplineSpace2D::new(j.degrees, j.knots)?;
        space.check_grid(&j.points, "points")?;
        SplineMap2D::new(space, j.points.concat())
    }
}

impl From<SplineMap2D> for MapJson {
    fn from(m: SplineMap2D) -> Self {
        MapJson {
            degrees: m.space.degrees,
            points: m.points.chunks(m.space.count(0)).map(<[Point2]>::to_vec).collect(),
            knots: m.space.knots,
        }
    }
}

impl SplineMap2D {
    /// Builds a map and checks `det ∇T > 0` on a sample grid of every element.
    pub fn new(space: SplineSpace2D, points: Vec<Point2>) -> Result<SplineMap2D> {
        if points.len() != space.len() {
            return Err(Error::schema(
                "points",
                format!("expected {} control points, got {}", space.len(), points.len()),
            ));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::schema("points", "control points must be finite"));
        }
        let diag = BBox::from_points(&points).diagonal();
        let map = SplineMap2D { space, points, diag };
        map.check_bijective()?;
        Ok(map)
    }

    /// Control points at the Greville abscissae mapped through `f`; exact
    /// when `f` is affine.
    pub fn from_greville(space: SplineSpace2D, f: impl Fn(Point2) -> Point2) -> Result<SplineMap2D> {
        let gu = space.greville(0);
        let gv = space.greville(1);
        let points = gv.iter().flat_map(|&v| gu.iter().map(move |&u| Point2::new(u, v))).map(f).collect();
        SplineMap2D::new(space, points)
    }

    /// The identity on `[0, 1]²` with the given interior knots (degree 1).
    pub fn identity(interior_u: &[f64], interior_v: &[f64]) -> SplineMap2D {
        let knots = [crate::basis::clamped_knots(1, interior_u), crate::basis::clamped_knots(1, interior_v)];
        let space = SplineSpace2D::new([1, 1], knots).expect("valid identity knots");
        SplineMap2D::from_greville(space, |p| p).expect("identity is bijective")
    }

    fn check_bijective(&self) -> Result<()> {
        for ev in 0..self.space.element_count(1) {
            for eu in 0..self.space.element_count(0) {
                let (u0, u1, v0, v1) = self.space.element_rect((eu, ev));
                for a in 0..=DET_SAMPLES {
                    let u = u0 + (u1 - u0) * a as f64 / DET_SAMPLES as f64;
                    for b in 0..=DET_SAMPLES {
                        let v = v0 + (v1 - v0) * b as f64 / DET_SAMPLES as f64;
                        let (_, tu, tv) = self.space.derivs_with(&self.points, (eu, ev), Point2::new(u, v));
                        let det = tu.cross(tv);
                        if !(det > 0.0) {
                            return Err(Error::NonBijectiveMap { det, u, v });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &SplineSpace2D {
        &self.space
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Diagonal of the control net bounding box.
    pub fn diagonal(&self) -> f64 {
        self.diag
    }

    pub fn eval(&self, u: f64, v: f64) -> Point2 {
        let q = Point2::new(clamp01(u), clamp01(v));
        self.space.eval_with(&self.points, self.space.element_at(q), q)
    }

    /// Value and partial derivatives `(T, ∂T/∂u, ∂T/∂v)`.
    pub fn eval_with_jacobian(&self, u: f64, v: f64) -> (Point2, Vec2, Vec2) {
        let q = Point2::new(clamp01(u), clamp01(v));
        self.space.derivs_with(&self.points, self.space.element_at(q), q)
    }

    pub fn jacobian_det(&self, u: f64, v: f64) -> f64 {
        let (_, tu, tv) = self.eval_with_jacobian(u, v);
        tu.cross(tv)
    }

    /// Newton inversion from `guess` with a clamped backtracking line search.
    pub fn invert(&self, p: Point2, guess: (f64, f64)) -> Result<(f64, f64)> {
        let tol = 1e-11 * self.diag.max(f64::MIN_POSITIVE);
        let (mut u, mut v) = (clamp01(guess.0), clamp01(guess.1));
        let (mut q, mut tu, mut tv) = self.eval_with_jacobian(u, v);
        let mut res = (p - q).hypot();
        // one extra step after reaching the tolerance brings the parameters
        // to full precision
        let mut polished = false;
        for _ in 0..MAX_NEWTON {
            if res <= tol {
                if polished || res == 0.0 {
                    return Ok((u, v));
                }
                polished = true;
            }
            let det = tu.cross(tv);
            if !det.is_finite() || det.abs() <= 1e-14 * tu.hypot() * tv.hypot() {
                return Err(Error::SingularJacobian { u, v });
            }
            let r = p - q;
            let du = r.cross(tv) / det;
            let dv = tu.cross(r) / det;
            let mut alpha = 1.0;
            let mut accepted = None;
            while alpha > 1e-6 {
                let (nu, nv) = (clamp01(u + alpha * du), clamp01(v + alpha * dv));
                let nq = self.eval(nu, nv);
                let nres = (p - nq).hypot();
                if nres < res {
                    accepted = Some((nu, nv, nres));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((nu, nv, nres)) = accepted else { break };
            u = nu;
            v = nv;
            res = nres;
            (q, tu, tv) = self.eval_with_jacobian(u, v);
        }
        if res <= tol {
            return Ok((u, v));
        }
        Err(Error::OutsideImage { p, residual: res })
    }

    /// Inversion without a warm start: Newton from the nearest points of a
    /// seed grid.
    pub fn invert_global(&self, p: Point2) -> Result<(f64, f64)> {
        let m = 8.max(2 * self.space.element_count(0)).max(2 * self.space.element_count(1));
        let mut seeds: Vec<(f64, f64, f64)> = Vec::with_capacity((m + 1) * (m + 1));
        for a in 0..=m {
            for b in 0..=m {
                let (u, v) = (a as f64 / m as f64, b as f64 / m as f64);
                seeds.push((self.eval(u, v).distance(p), u, v));
            }
        }
        seeds.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut last = Error::OutsideImage { p, residual: seeds[0].0 };
        for &(_, u, v) in seeds.iter().take(4) {
            match self.invert(p, (u, v)) {
                Ok(r) => return Ok(r),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    /// Curve `s ↦ T(·)` along the iso-line where parameter `dir` is fixed at
    /// `value`, extracted exactly from the tensor product.
    pub fn iso_curve(&self, dir: usize, value: f64) -> ParamCurve {
        let sp = &self.space;
        let other = 1 - dir;
        let d = sp.degrees[dir];
        let span = find_span(d, &sp.knots[dir], value, Side::Right);
        let n = basis_funs(span, value, d, &sp.knots[dir]);
        let count = sp.count(other);
        let ctrl: Vec<Point2> = (0..count)
            .map(|k| {
                n.iter().enumerate().fold(Vec2::ZERO, |acc, (a, w)| {
                    let idx = if dir == 0 { (span - d + a, k) } else { (k, span - d + a) };
                    acc + self.points[sp.flat(idx)] * *w
                })
            })
            .collect();
        ParamCurve::bspline(sp.degrees[other], sp.knots[other].clone(), ctrl).expect("iso-curve of a valid map")
    }

    /// One curve per distinct interior knot in each direction: first the
    /// curves `v ↦ T(ū, v)`, then `u ↦ T(u, v̄)`.
    pub fn knot_iso_curves(&self) -> Vec<ParamCurve> {
        let mut out = Vec::new();
        for dir in 0..2 {
            for &k in self.space.interior_breaks(dir) {
                out.push(self.iso_curve(dir, k));
            }
        }
        out
    }

    /// Boundary of the image, counterclockwise: `v = 0`, `u = 1`, `v = 1`, `u = 0`.
    pub fn boundary_curves(&self) -> [ParamCurve; 4] {
        [
            self.iso_curve(1, 0.0),
            self.iso_curve(0, 1.0),
            self.iso_curve(1, 1.0).reverse(),
            self.iso_curve(0, 0.0).reverse(),
        ]
    }
}
