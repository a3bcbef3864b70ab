// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Quadrature over extracted regions and the level-doubling convergence loop.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geom::Point2;
use crate::regions::RegionSet;
use crate::tile::{tile_region, Tile};

/// Default threshold on `|I(j) − I(j−1)|` for stopping the loop.
pub const DEFAULT_STOP_THRESHOLD: f64 = 1e-12;

/// Tiles of every interior region, in region order.
pub fn tile_regions(rs: &RegionSet) -> Result<Vec<Vec<Tile>>> {
    rs.regions.par_iter().enumerate().map(|(i, r)| tile_region(&rs.drawing, &r.trail, i)).collect()
}

/// Integral over the tiles of one trail, with no hole correction.
pub fn integrate_tiles(tiles: &[Tile], f: &(dyn Fn(Point2) -> f64 + Sync), n: usize) -> Result<f64> {
    let mut acc = 0.0;
    for (i, t) in tiles.iter().enumerate() {
        acc += t.integrate(n, i, &mut |p| f(p))?;
    }
    Ok(acc)
}

/// Integral of `f` over interior region `index`, holes excluded.
pub fn integrate_region(
    rs: &RegionSet,
    tiles: &[Vec<Tile>],
    index: usize,
    f: &(dyn Fn(Point2) -> f64 + Sync),
    n: usize,
) -> Result<f64> {
    let mut value = integrate_tiles(&tiles[index], f, n)?;
    for &c in &rs.regions[index].holes {
        for (j, r) in rs.regions.iter().enumerate() {
            if r.component == c {
                value -= integrate_tiles(&tiles[j], f, n)?;
            }
        }
    }
    Ok(value)
}

/// Integral of `f` over the union of all interior regions. Regions are
/// evaluated in parallel and summed in region order.
pub fn integrate_all(rs: &RegionSet, tiles: &[Vec<Tile>], f: &(dyn Fn(Point2) -> f64 + Sync), n: usize) -> Result<f64> {
    let parts: Vec<f64> =
        (0..rs.regions.len()).into_par_iter().map(|i| integrate_region(rs, tiles, i, f, n)).collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub level: usize,
    pub points_per_dir: usize,
    pub value: f64,
    pub abs_delta: Option<f64>,
    pub error_vs_reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    /// First level whose change from the previous one fell below the
    /// threshold, if any.
    pub stop_level: Option<usize>,
    pub reference: Option<f64>,
}

/// Where the reference value for error columns comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    None,
    Exact(f64),
    /// Quadrature at level `max_level + 2`.
    Overkill,
}

/// Evaluates levels `j = 0, 1, …` with `2^j` points per direction until
/// `|I(j) − I(j−1)| < threshold` or `max_level` is reached.
pub fn integrate_adaptive(
    rs: &RegionSet,
    tiles: &[Vec<Tile>],
    f: &(dyn Fn(Point2) -> f64 + Sync),
    max_level: usize,
    threshold: f64,
    reference: Reference,
) -> Result<ConvergenceReport> {
    adaptive_with(|n| integrate_all(rs, tiles, f, n), max_level, threshold, reference)
}

/// The convergence loop for any level evaluator `eval(points_per_dir)`.
pub fn adaptive_with(
    mut eval: impl FnMut(usize) -> Result<f64>,
    max_level: usize,
    threshold: f64,
    reference: Reference,
) -> Result<ConvergenceReport> {
    let mut levels: Vec<ConvergenceLevel> = Vec::new();
    let mut stop_level = None;
    for j in 0..=max_level {
        let n = 1usize << j;
        let value = eval(n)?;
        let abs_delta = levels.last().map(|l| (value - l.value).abs());
        levels.push(ConvergenceLevel { level: j, points_per_dir: n, value, abs_delta, error_vs_reference: None });
        if abs_delta.is_some_and(|d| d < threshold) {
            stop_level = Some(j);
            break;
        }
    }
    let reference = match reference {
        Reference::None => None,
        Reference::Exact(v) => Some(v),
        Reference::Overkill => Some(eval(1usize << (max_level + 2))?),
    };
    if let Some(r) = reference {
        for l in &mut levels {
            l.error_vs_reference = Some((r - l.value).abs());
        }
    }
    Ok(ConvergenceReport { levels, stop_level, reference })
}

impl ConvergenceReport {
    /// CSV with columns `level,points_per_dir,value,abs_delta,error_vs_reference`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,points_per_dir,value,abs_delta,error_vs_reference\n");
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6e}")).unwrap_or_default();
        for l in &self.levels {
            let _ = writeln!(
                s,
                "{},{},{:.17e},{},{}",
                l.level,
                l.points_per_dir,
                l.value,
                opt(l.abs_delta),
                opt(l.error_vs_reference)
            );
        }
        s
    }

    pub fn final_value(&self) -> f64 {
        self.levels.last().map_or(0.0, |l| l.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::ParamCurve;
    use crate::drawing::{build_drawing, DEFAULT_TOL};
    use crate::geom::Vec2;
    use crate::regions::regions_of;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn square() -> RegionSet {
        let curves = vec![
            ParamCurve::segment(v(0.0, 0.0), v(1.0, 0.0)),
            ParamCurve::segment(v(1.0, 0.0), v(1.0, 1.0)),
            ParamCurve::segment(v(1.0, 1.0), v(0.0, 1.0)),
            ParamCurve::segment(v(0.0, 1.0), v(0.0, 0.0)),
        ];
        regions_of(&build_drawing(curves, DEFAULT_TOL).unwrap()).unwrap()
    }

    #[test]
    fn square_moments() {
        let rs = square();
        let tiles = tile_regions(&rs).unwrap();
        for n in 1..6 {
            assert!((integrate_region(&rs, &tiles, 0, &|_| 1.0, n).unwrap() - 1.0).abs() < 1e-14);
            assert!((integrate_region(&rs, &tiles, 0, &|p| p.x, n).unwrap() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn arch_bigon_area() {
        let curves = vec![
            ParamCurve::bezier(vec![v(0.0, 0.0), v(0.5, 1.0), v(1.0, 0.0)]).unwrap(),
            ParamCurve::segment(v(0.0, 0.0), v(1.0, 0.0)),
        ];
        let rs = regions_of(&build_drawing(curves, DEFAULT_TOL).unwrap()).unwrap();
        let tiles = tile_regions(&rs).unwrap();
        for n in 3..8 {
            assert!((integrate_region(&rs, &tiles, 0, &|_| 1.0, n).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_stops_at_level_one() {
        let rs = square();
        let tiles = tile_regions(&rs).unwrap();
        let rep = integrate_adaptive(&rs, &tiles, &|_| 1.0, 8, DEFAULT_STOP_THRESHOLD, Reference::Exact(1.0)).unwrap();
        assert_eq!(rep.stop_level, Some(1));
        assert_eq!(rep.levels.len(), 2);
        assert!(rep.to_csv().starts_with("level,points_per_dir,value,abs_delta,error_vs_reference\n0,1,"));
    }

    #[test]
    fn quintic_is_exact_from_level_two() {
        let rs = square();
        let tiles = tile_regions(&rs).unwrap();
        let f = |p: Point2| p.x.powi(5) + p.x * p.x * p.y.powi(3);
        let exact = 1.0 / 6.0 + 1.0 / 12.0;
        let rep = integrate_adaptive(&rs, &tiles, &f, 8, DEFAULT_STOP_THRESHOLD, Reference::Exact(exact)).unwrap();
        for l in &rep.levels[2..] {
            assert!(l.error_vs_reference.unwrap() <= 1e-13);
        }
        assert!(rep.levels[1].error_vs_reference.unwrap() > 1e-6);
        assert_eq!(rep.stop_level, Some(3));
    }

    #[test]
    fn overkill_reference() {
        let rs = square();
        let tiles = tile_regions(&rs).unwrap();
        let f = |p: Point2| (std::f64::consts::FRAC_PI_2 * p.x).sin() * (std::f64::consts::PI * p.y).cos() * p.x.exp();
        let rep = integrate_adaptive(&rs, &tiles, &f, 5, DEFAULT_STOP_THRESHOLD, Reference::Overkill).unwrap();
        let errs: Vec<f64> = rep.levels.iter().map(|l| l.error_vs_reference.unwrap()).collect();
        // cos(πy) is odd about y = 1/2 and the Gauss nodes are symmetric
        assert!(errs.iter().all(|&e| e < 1e-13), "{errs:?}");
    }
}
