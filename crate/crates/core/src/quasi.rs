// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Local spline projections onto the space of the first map: the
//! Lee–Lyche–Mørken quasi-interpolant with local L² projectors, and
//! normalized basis averages of a zero-extended field (spline-based level
//! sets).
//!
//! Both operate on the regions of an [`InterfaceMesh`], so integrals of a
//! field that lives on the second map's mesh are split where that field
//! loses smoothness.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss::gauss_legendre;
use crate::geom::Point2;
use crate::interface::{InterfaceMesh, Node, RegionInfo};
use crate::spline2d::{Index2, SplineFunc2D, SplineSpace2D};

/// Field to be projected.
#[derive(Clone, Copy, Debug)]
pub enum Source<'a> {
    /// Spline on the second map's parameter square, composed with
    /// `T₂⁻¹ ∘ T₁` and extended by zero outside the second map's image.
    Second(&'a SplineFunc2D),
    /// Spline on the first map's parameter square.
    First(&'a SplineFunc2D),
}

impl Source<'_> {
    fn value(&self, info: &RegionInfo, node: &Node) -> f64 {
        match self {
            Source::Second(s) => InterfaceMesh::eval_second(info, s, node),
            Source::First(s) => s.eval(node.p),
        }
    }

    fn degrees(&self) -> [usize; 2] {
        match self {
            Source::Second(s) | Source::First(s) => s.space().degrees(),
        }
    }
}

/// Report for one local problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalReport {
    pub index: Index2,
    /// Number of basis functions in the local problem.
    pub size: usize,
    /// Spectral condition number of the local Gram matrix.
    pub condition: f64,
    /// `‖Gλ − P‖ / max(‖P‖, 1)` after the solve.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub func: SplineFunc2D,
    pub reports: Vec<LocalReport>,
}

/// Region data shared by the projections: target element, nodes and field
/// values at the nodes.
struct Prepared {
    element: Vec<Index2>,
    nodes: Vec<Vec<Node>>,
    values: Vec<Vec<f64>>,
}

fn prepare(target: &SplineSpace2D, mesh: &InterfaceMesh, source: Source, n: usize) -> Result<Prepared> {
    let t1 = mesh.t1.space();
    for dir in 0..2 {
        if target.breaks(dir).iter().any(|b| !t1.breaks(dir).contains(b)) {
            return Err(Error::schema(format!("knots[{dir}]"), "target knot values must be knots of the first map"));
        }
    }
    let element: Vec<Index2> = mesh
        .info
        .iter()
        .map(|inf| {
            let (u0, u1, v0, v1) = t1.element_rect(inf.element1);
            target.element_at(Point2::new(0.5 * (u0 + u1), 0.5 * (v0 + v1)))
        })
        .collect();
    let nodes = mesh.nodes(n)?;
    let values =
        nodes.par_iter().zip(&mesh.info).map(|(ns, inf)| ns.iter().map(|nd| source.value(inf, nd)).collect()).collect();
    Ok(Prepared { element, nodes, values })
}

fn default_points(target: &SplineSpace2D, source: Source) -> usize {
    let dt = target.degrees().into_iter().max().unwrap_or(0);
    let ds = source.degrees().into_iter().max().unwrap_or(0);
    dt + ds + 2
}

/// Basis functions of `space` that do not vanish on an element range.
fn active_in(space: &SplineSpace2D, ru: &std::ops::Range<usize>, rv: &std::ops::Range<usize>) -> Vec<Index2> {
    let [du, dv] = space.degrees();
    let lo_u = space.basis_in((ru.start, rv.start), Point2::ZERO).0 .0;
    let hi_u = space.basis_in((ru.end - 1, rv.start), Point2::ZERO).0 .0 + du;
    let lo_v = space.basis_in((ru.start, rv.start), Point2::ZERO).0 .1;
    let hi_v = space.basis_in((ru.start, rv.end - 1), Point2::ZERO).0 .1 + dv;
    (lo_v..=hi_v).flat_map(|j| (lo_u..=hi_u).map(move |i| (i, j))).collect()
}

/// Lee–Lyche–Mørken quasi-interpolant of `source` in `target`, with
/// `K_ℓ = supp B_ℓ` and the L² projector on `K_ℓ`. The coefficient of
/// `B_ℓ` is the entry of the local solution that belongs to `ℓ`.
///
/// `points` is the Gauss count per tile direction for the right-hand
/// sides; `None` picks one that is exact for products of the two degrees
/// on affine tiles.
pub fn llm_project(
    source: Source,
    target: &SplineSpace2D,
    mesh: &InterfaceMesh,
    points: Option<usize>,
) -> Result<Projection> {
    let n = points.unwrap_or_else(|| default_points(target, source));
    let prep = prepare(target, mesh, source, n)?;
    let results: Vec<(f64, LocalReport)> = (0..target.len())
        .into_par_iter()
        .map(|k| local_problem(target, &prep, target.unflat(k)))
        .collect::<Result<_>>()?;
    let coefs = results.iter().map(|r| r.0).collect();
    let reports = results.into_iter().map(|r| r.1).collect();
    Ok(Projection { func: SplineFunc2D::new(target.clone(), coefs)?, reports })
}

fn local_problem(space: &SplineSpace2D, prep: &Prepared, ell: Index2) -> Result<(f64, LocalReport)> {
    let (ru, rv) = space.support_elements(ell);
    let lambda = active_in(space, &ru, &rv);
    let pos = |idx: Index2| lambda.iter().position(|&x| x == idx);
    let size = lambda.len();
    let mut g = DMatrix::<f64>::zeros(size, size);
    let [du, dv] = space.degrees();
    let gu = gauss_legendre(du + 1);
    let gv = gauss_legendre(dv + 1);
    for ev in rv.clone() {
        for eu in ru.clone() {
            let (u0, u1, v0, v1) = space.element_rect((eu, ev));
            for (xu, wu) in gu.nodes.iter().zip(&gu.weights) {
                for (xv, wv) in gv.nodes.iter().zip(&gv.weights) {
                    let p = Point2::new(u0 + (u1 - u0) * xu, v0 + (v1 - v0) * xv);
                    let w = wu * wv * (u1 - u0) * (v1 - v0);
                    let ((i0, j0), nu, nv) = space.basis_in((eu, ev), p);
                    let local: Vec<(usize, f64)> = (0..=dv)
                        .flat_map(|b| (0..=du).map(move |a| (a, b)))
                        .map(|(a, b)| (pos((i0 + a, j0 + b)).expect("basis active on its element"), nu[a] * nv[b]))
                        .collect();
                    for &(r, br) in &local {
                        for &(c, bc) in &local {
                            g[(r, c)] += w * br * bc;
                        }
                    }
                }
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(size);
    for (region, &e) in prep.element.iter().enumerate() {
        if !ru.contains(&e.0) || !rv.contains(&e.1) {
            continue;
        }
        for (nd, f) in prep.nodes[region].iter().zip(&prep.values[region]) {
            if *f == 0.0 {
                continue;
            }
            let ((i0, j0), nu, nv) = space.basis_in(e, nd.p);
            for b in 0..=dv {
                for a in 0..=du {
                    if let Some(r) = pos((i0 + a, j0 + b)) {
                        rhs[r] += nd.w * f * nu[a] * nv[b];
                    }
                }
            }
        }
    }
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let chol = g.clone().cholesky().ok_or(Error::SingularGram { index: ell })?;
    let sol = chol.solve(&rhs);
    let residual = (&g * &sol - &rhs).norm() / rhs.norm().max(1.0);
    let c = sol[pos(ell).expect("ℓ is in its own local set")];
    Ok((c, LocalReport { index: ell, size, condition, residual }))
}

/// Normalized basis averages of a zero-extended field.
#[derive(Clone, Debug, Serialize)]
pub struct LevelSetField {
    /// `Σ Bᵢ pᵢ`, with `pᵢ = 0` for basis functions outside `Λ`.
    #[serde(skip)]
    pub func: SplineFunc2D,
    /// Basis functions whose support meets the covered part of the
    /// interface.
    pub lambda: Vec<Index2>,
    pub numerators: Vec<f64>,
    pub denominators: Vec<f64>,
}

/// Level-set coefficients `pᵢ = ∫_{Kᵢ ∩ Γ̂} Bᵢ δ / ∫_{Kᵢ} Bᵢ` for every basis
/// function of `target` whose support `Kᵢ` meets a region covered by the
/// second map. `δ` lives on the second map and is zero elsewhere.
pub fn level_set_coeffs(
    delta: &SplineFunc2D,
    target: &SplineSpace2D,
    mesh: &InterfaceMesh,
    points: Option<usize>,
) -> Result<LevelSetField> {
    let source = Source::Second(delta);
    let n = points.unwrap_or_else(|| default_points(target, source));
    let prep = prepare(target, mesh, source, n)?;
    let covered: Vec<Index2> = (0..mesh.info.len())
        .filter(|&r| mesh.info[r].covered && mesh.regions.net_area(r) > 0.0)
        .map(|r| prep.element[r])
        .collect();
    let mut lambda = Vec::new();
    let mut numerators = Vec::new();
    let mut denominators = Vec::new();
    let mut coefs = vec![0.0; target.len()];
    let [du, dv] = target.degrees();
    for k in 0..target.len() {
        let idx = target.unflat(k);
        let (ru, rv) = target.support_elements(idx);
        if !covered.iter().any(|e| ru.contains(&e.0) && rv.contains(&e.1)) {
            continue;
        }
        let mut num = 0.0;
        for (region, &e) in prep.element.iter().enumerate() {
            if !mesh.info[region].covered || !ru.contains(&e.0) || !rv.contains(&e.1) {
                continue;
            }
            for (nd, f) in prep.nodes[region].iter().zip(&prep.values[region]) {
                num += nd.w * f * target.basis_value_in(idx, e, nd.p);
            }
        }
        let (u0, u1, v0, v1) = target.support(idx);
        let den = (u1 - u0) / (du + 1) as f64 * (v1 - v0) / (dv + 1) as f64;
        if den <= 0.0 {
            return Err(Error::ZeroDenominator { index: idx });
        }
        coefs[k] = num / den;
        lambda.push(idx);
        numerators.push(num);
        denominators.push(den);
    }
    Ok(LevelSetField { func: SplineFunc2D::new(target.clone(), coefs)?, lambda, numerators, denominators })
}

impl LevelSetField {
    /// Coefficients of the basis functions in `Λ`, in the order of `lambda`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.lambda.iter().map(|&i| self.func.coef(i)).collect()
    }

    /// Knot elements of `Θ = ∪_{i∈Λ} supp Bᵢ`.
    pub fn theta_elements(&self) -> Vec<Index2> {
        let space = self.func.space();
        let mut out: Vec<Index2> = Vec::new();
        for &i in &self.lambda {
            let (ru, rv) = space.support_elements(i);
            for ev in rv {
                for eu in ru.clone() {
                    out.push((eu, ev));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `∫_Θ Σ Bᵢ pᵢ` by element-exact Gauss quadrature.
    pub fn integral_over_theta(&self) -> f64 {
        let space = self.func.space();
        let [du, dv] = space.degrees();
        let g = gauss_legendre(du.max(dv) + 1);
        self.theta_elements()
            .into_iter()
            .map(|e| {
                let (u0, u1, v0, v1) = space.element_rect(e);
                g.integrate(u0, u1, |u| g.integrate(v0, v1, |v| self.func.eval_in(e, Point2::new(u, v))))
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::interface::InterfaceOptions;
    use crate::spline2d::SplineMap2D;

    fn mesh(t1: &SplineMap2D, t2: &SplineMap2D) -> InterfaceMesh {
        InterfaceMesh::build(t1, t2, InterfaceOptions::default()).unwrap()
    }

    #[test]
    fn constants_are_reproduced() {
        let space = SplineSpace2D::uniform([2, 2], [3, 3]);
        let t1 = SplineMap2D::from_greville(space.clone(), |p| p).unwrap();
        let t2 = SplineMap2D::identity(&[0.4], &[0.6]);
        let m = mesh(&t1, &t2);
        let one = SplineFunc2D::constant(t2.space().clone(), 1.0);
        let pr = llm_project(Source::Second(&one), &space, &m, None).unwrap();
        assert!(pr.func.coefs().iter().all(|c| (c - 1.0).abs() < 1e-12));
        assert!(pr.reports.iter().all(|r| r.condition.is_finite() && r.residual < 1e-12));
    }

    fn assert_reproduces(space: &SplineSpace2D, t2: &SplineMap2D, f: &SplineFunc2D) {
        let t1 = SplineMap2D::from_greville(space.clone(), |p| p).unwrap();
        let m = mesh(&t1, t2);
        let pr = llm_project(Source::Second(f), space, &m, None).unwrap();
        for k in 0..=20 {
            let p = Point2::new(k as f64 / 20.0, (k as f64 * 0.31).fract());
            assert!((pr.func.eval(p) - f.eval(p)).abs() < 1e-10);
        }
        let again = llm_project(Source::First(&pr.func), space, &m, None).unwrap();
        for (a, b) in again.func.coefs().iter().zip(pr.func.coefs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spline_in_target_is_reproduced() {
        // piecewise bilinear on the second mesh, contained in the target
        let t2 = SplineMap2D::identity(&[0.5], &[0.25]);
        let f = SplineFunc2D::from_greville(t2.space().clone(), |u, v| (u - 0.3).abs() + u * v + v);
        assert_reproduces(&SplineSpace2D::uniform([1, 1], [4, 4]), &t2, &f);
        // C¹ quadratics with a knot at 1/2 inside the quadratic space on quarters
        let s2 = SplineSpace2D::uniform([2, 2], [2, 2]);
        let t2 = SplineMap2D::from_greville(s2.clone(), |p| p).unwrap();
        let coefs = (0..s2.len()).map(|k| ((k * 7 % 5) as f64) - 1.5).collect();
        let f = SplineFunc2D::new(s2, coefs).unwrap();
        assert_reproduces(&SplineSpace2D::uniform([2, 2], [4, 4]), &t2, &f);
    }

    #[test]
    fn level_set_of_constant_over_full_cover() {
        let t1 = SplineMap2D::identity(&[0.5], &[0.5]);
        let t2 = SplineMap2D::identity(&[0.3], &[]);
        let c = SplineFunc2D::constant(t2.space().clone(), 2.5);
        let ls = level_set_coeffs(&c, t1.space(), &mesh(&t1, &t2), None).unwrap();
        assert_eq!(ls.lambda.len(), 9);
        assert!(ls.coefficients().iter().all(|p| (p - 2.5).abs() < 1e-12));
    }

    #[test]
    fn level_set_on_trimmed_interface() {
        let t1 = SplineMap2D::identity(&[0.25, 0.5, 0.75], &[0.5]);
        let t2 = SplineMap2D::from_greville(SplineSpace2D::uniform([1, 1], [1, 1]), |q| q * 0.6 + Vec2::new(0.55, 0.2))
            .unwrap();
        let one = SplineFunc2D::constant(t2.space().clone(), 1.0);
        let m = mesh(&t1, &t2);
        let ls = level_set_coeffs(&one, t1.space(), &m, None).unwrap();
        assert!(ls.coefficients().iter().all(|&p| (-1e-10..=1.0 + 1e-10).contains(&p)));
        assert!(ls.coefficients().iter().any(|&p| p < 0.99));
        // average preservation: ∫_Θ Σ Bᵢpᵢ equals the covered area
        let covered: f64 = (0..m.info.len()).filter(|&r| m.info[r].covered).map(|r| m.regions.net_area(r)).sum();
        assert!((covered - 0.45 * 0.6).abs() < 1e-12);
        assert!((ls.integral_over_theta() - covered).abs() < 1e-10);
    }

    /// Global L² projection onto `space`, assembled from the same region
    /// nodes and solved as one system.
    fn global_projection(source: Source, space: &SplineSpace2D, m: &InterfaceMesh) -> Vec<f64> {
        let n = default_points(space, source);
        let prep = prepare(space, m, source, n).unwrap();
        let len = space.len();
        let mut g = DMatrix::<f64>::zeros(len, len);
        let mut rhs = DVector::<f64>::zeros(len);
        let [du, dv] = space.degrees();
        let gq = gauss_legendre(du.max(dv) + 1);
        let (eu_n, ev_n) = (space.breaks(0).len() - 1, space.breaks(1).len() - 1);
        for ev in 0..ev_n {
            for eu in 0..eu_n {
                let (u0, u1, v0, v1) = space.element_rect((eu, ev));
                for (xu, wu) in gq.nodes.iter().zip(&gq.weights) {
                    for (xv, wv) in gq.nodes.iter().zip(&gq.weights) {
                        let p = Point2::new(u0 + (u1 - u0) * xu, v0 + (v1 - v0) * xv);
                        let w = wu * wv * (u1 - u0) * (v1 - v0);
                        for r in 0..len {
                            let br = space.basis_value(space.unflat(r), p);
                            for c in 0..len {
                                g[(r, c)] += w * br * space.basis_value(space.unflat(c), p);
                            }
                        }
                    }
                }
            }
        }
        for (region, &e) in prep.element.iter().enumerate() {
            for (nd, f) in prep.nodes[region].iter().zip(&prep.values[region]) {
                for r in 0..len {
                    rhs[r] += nd.w * f * space.basis_value_in(space.unflat(r), e, nd.p);
                }
            }
        }
        g.cholesky().unwrap().solve(&rhs).iter().copied().collect()
    }

    #[test]
    fn matches_global_projection_on_shifted_mesh() {
        // second mesh is scaled and shifted so its knots land at 0.25 and 0.75
        let t1 = SplineMap2D::identity(&[0.25, 0.5, 0.75], &[0.25, 0.5, 0.75]);
        let t2 =
            SplineMap2D::from_greville(SplineSpace2D::uniform([1, 1], [3, 3]), |q| q * 1.5 - Vec2::new(0.25, 0.25))
                .unwrap();
        let f = SplineFunc2D::from_greville(t2.space().clone(), |u, v| ((u - 0.5) * (v - 0.4)).abs() + u);
        let m = mesh(&t1, &t2);
        let target = t1.space().clone();
        let pr = llm_project(Source::Second(&f), &target, &m, None).unwrap();
        let global = global_projection(Source::Second(&f), &target, &m);
        for (a, b) in pr.func.coefs().iter().zip(&global) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn far_coefficients_ignore_interface() {
        // δ∘T₂⁻¹ is the same linear field for both maps; only the trimmed
        // corner near the origin differs
        let g = |p: Point2| 1.0 + 2.0 * p.x - p.y;
        let target = SplineSpace2D::uniform([2, 2], [5, 5]);
        let t1 = SplineMap2D::from_greville(target.clone(), |p| p).unwrap();
        let run = |shift: Vec2| {
            let t2 = SplineMap2D::from_greville(SplineSpace2D::uniform([2, 2], [1, 1]), |q| q * 1.5 + shift).unwrap();
            let f = SplineFunc2D::from_greville(t2.space().clone(), |u, v| g(Point2::new(u, v) * 1.5 + shift));
            llm_project(Source::Second(&f), &target, &mesh(&t1, &t2), None).unwrap().func
        };
        let a = run(Vec2::new(0.2, 0.2));
        let b = run(Vec2::new(0.13, 0.24));
        let plain = SplineFunc2D::from_greville(target.clone(), |u, v| g(Point2::new(u, v)));
        for k in 0..target.len() {
            let idx = target.unflat(k);
            let (u0, _, v0, _) = target.support(idx);
            if u0 >= 0.4 && v0 >= 0.4 {
                assert!((a.coef(idx) - b.coef(idx)).abs() < 1e-12);
                assert!((a.coef(idx) - plain.coef(idx)).abs() < 1e-10);
            }
        }
        assert!((a.coef((1, 1)) - b.coef((1, 1))).abs() > 1e-6);
    }
}
