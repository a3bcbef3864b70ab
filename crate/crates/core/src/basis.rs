// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Univariate B-spline basis machinery shared by curves and tensor-product splines.
//!
//! Knot vectors are always clamped: the first and last knots are repeated
//! `degree + 1` times. Spans are indexed the usual way: span `i` is the knot
//! interval `[knots[i], knots[i + 1])` and the basis functions that do not
//! vanish on it are `i - degree ..= i`.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Values that can serve as B-spline coefficients.
pub trait Coefficient: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Coefficient for crate::geom::Vec2 {
    fn zero() -> Self {
        crate::geom::Vec2::ZERO
    }
}

/// Which one-sided limit to use when a parameter falls exactly on a knot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Use the span to the right of the knot (the default).
    Right,
    /// Use the span to the left of the knot.
    Left,
}

/// Checks the knot vector of a clamped B-spline with `count` coefficients.
///
/// `field` names the offending input in error messages.
pub fn validate_knots(degree: usize, knots: &[f64], count: usize, field: &str) -> Result<()> {
    if count < degree + 1 {
        return Err(Error::schema(
            field,
            format!("need at least {} coefficients for degree {degree}, got {count}", degree + 1),
        ));
    }
    if knots.len() != count + degree + 1 {
        return Err(Error::schema(
            field,
            format!(
                "knot count must equal coefficient count + degree + 1 = {}, got {}",
                count + degree + 1,
                knots.len()
            ),
        ));
    }
    if knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::schema(field, "knots must be finite"));
    }
    if knots.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::schema(field, "knots must be non-decreasing"));
    }
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if last <= first {
        return Err(Error::schema(field, "knot vector has an empty domain"));
    }
    if knots[..=degree].iter().any(|&k| k != first) || knots[knots.len() - degree - 1..].iter().any(|&k| k != last) {
        return Err(Error::schema(
            field,
            format!("knot vector must be clamped (end knots repeated {} times)", degree + 1),
        ));
    }
    for (value, mult) in interior_breakpoints(degree, knots) {
        if mult > degree {
            return Err(Error::schema(
                field,
                format!("interior knot {value} has multiplicity {mult} > degree {degree}"),
            ));
        }
    }
    Ok(())
}

/// Distinct interior knot values with their multiplicities.
pub fn interior_breakpoints(degree: usize, knots: &[f64]) -> Vec<(f64, usize)> {
    let inner = &knots[degree + 1..knots.len() - degree - 1];
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &k in inner {
        match out.last_mut() {
            Some((v, m)) if *v == k => *m += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// Distinct knot values including both ends.
pub fn breakpoints(knots: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &k in knots {
        if out.last() != Some(&k) {
            out.push(k);
        }
    }
    out
}

/// Span index for parameter `t`.
///
/// Parameters are clamped into the domain; at the right end the last
/// non-empty span is returned, so that evaluation at the domain end is the
/// left limit.
pub fn find_span(degree: usize, knots: &[f64], t: f64, side: Side) -> usize {
    let n = knots.len() - degree - 1; // number of coefficients
    let lo = degree;
    let hi = n - 1;
    if t >= knots[hi + 1] {
        return last_nonempty_span(degree, knots);
    }
    if t <= knots[lo] {
        return first_nonempty_span(degree, knots);
    }
    // binary search for knots[s] <= t < knots[s + 1]
    let mut a = lo;
    let mut b = hi + 1;
    while b - a > 1 {
        let mid = (a + b) / 2;
        if t < knots[mid] {
            b = mid;
        } else {
            a = mid;
        }
    }
    let mut span = a;
    if side == Side::Left && t == knots[span] {
        while span > lo && knots[span - 1] == knots[span] {
            span -= 1;
        }
        if span > lo {
            span -= 1;
        }
    }
    span
}

fn first_nonempty_span(degree: usize, knots: &[f64]) -> usize {
    let mut s = degree;
    while knots[s + 1] == knots[s] {
        s += 1;
    }
    s
}

fn last_nonempty_span(degree: usize, knots: &[f64]) -> usize {
    let n = knots.len() - degree - 1;
    let mut s = n - 1;
    while knots[s + 1] == knots[s] {
        s -= 1;
    }
    s
}

/// Non-vanishing basis functions `N_{span-degree..=span}` at `t`.
///
/// `t` need not lie inside the span: the polynomial piece of the span is
/// extended, which is what region-aware quadrature relies on.
pub fn basis_funs(span: usize, t: f64, degree: usize, knots: &[f64]) -> Vec<f64> {
    let mut n = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    n[0] = 1.0;
    for j in 1..=degree {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// Basis functions and their derivatives up to order `nd` at `t`.
///
/// `result[k][j]` is the `k`-th derivative of `N_{span-degree+j}`.
pub fn ders_basis_funs(span: usize, t: f64, degree: usize, nd: usize, knots: &[f64]) -> Vec<Vec<f64>> {
    let p = degree;
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; nd + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nd {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p as isize - k as isize;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[(pk + 1) as usize][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk as usize];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[(pk + 1) as usize][idx];
                d += a[s2][j] * ndu[idx][pk as usize];
            }
            if r as isize <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[(pk + 1) as usize][r];
                d += a[s2][k] * ndu[r][pk as usize];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=nd {
        for j in 0..=p {
            ders[k][j] *= factor;
        }
        factor *= (p as f64) - k as f64;
    }
    ders
}

/// Inserts knot `t` once into a clamped B-spline (Boehm's algorithm).
pub fn insert_knot<C: Coefficient>(degree: usize, knots: &[f64], ctrl: &[C], t: f64) -> (Vec<f64>, Vec<C>) {
    let p = degree;
    let span = find_span(p, knots, t, Side::Right);
    let mut new_knots = Vec::with_capacity(knots.len() + 1);
    new_knots.extend_from_slice(&knots[..=span]);
    new_knots.push(t);
    new_knots.extend_from_slice(&knots[span + 1..]);

    let mut new_ctrl = Vec::with_capacity(ctrl.len() + 1);
    new_ctrl.extend_from_slice(&ctrl[..=span - p]);
    for i in span + 1 - p..=span {
        let denom = knots[i + p] - knots[i];
        let alpha = if denom > 0.0 { (t - knots[i]) / denom } else { 0.0 };
        new_ctrl.push(ctrl[i - 1] * (1.0 - alpha) + ctrl[i] * alpha);
    }
    new_ctrl.extend_from_slice(&ctrl[span..]);
    (new_knots, new_ctrl)
}

/// Number of times `t` already appears in `knots`.
pub fn multiplicity(knots: &[f64], t: f64) -> usize {
    knots.iter().filter(|&&k| k == t).count()
}

/// Inserts `t` until it has multiplicity `target`.
pub fn insert_knot_to<C: Coefficient>(
    degree: usize,
    knots: &[f64],
    ctrl: &[C],
    t: f64,
    target: usize,
) -> (Vec<f64>, Vec<C>) {
    let mut k = knots.to_vec();
    let mut c = ctrl.to_vec();
    while multiplicity(&k, t) < target {
        let (nk, nc) = insert_knot(degree, &k, &c, t);
        k = nk;
        c = nc;
    }
    (k, c)
}

/// Extracts the piece of a clamped B-spline over `[a, b]` as a clamped
/// B-spline whose domain is still `[a, b]`.
pub fn extract_interval<C: Coefficient>(
    degree: usize,
    knots: &[f64],
    ctrl: &[C],
    a: f64,
    b: f64,
) -> (Vec<f64>, Vec<C>) {
    let (k1, c1) = insert_knot_to(degree, knots, ctrl, a, degree + 1);
    let (k2, c2) = insert_knot_to(degree, &k1, &c1, b, degree + 1);
    // first occurrence of a, last occurrence of b
    let start = k2.iter().position(|&k| k == a).expect("inserted knot present");
    let end = k2.iter().rposition(|&k| k == b).expect("inserted knot present");
    let new_knots = k2[start..=end].to_vec();
    let ncoef = new_knots.len() - degree - 1;
    let new_ctrl = c2[start..start + ncoef].to_vec();
    (new_knots, new_ctrl)
}

/// Evaluates a clamped B-spline with generic coefficients.
pub fn eval<C: Coefficient>(degree: usize, knots: &[f64], ctrl: &[C], t: f64, side: Side) -> C {
    let span = find_span(degree, knots, t, side);
    let n = basis_funs(span, t, degree, knots);
    let mut acc = C::zero();
    for (j, nj) in n.iter().enumerate() {
        acc = acc + ctrl[span - degree + j] * *nj;
    }
    acc
}

/// Evaluates derivatives `0..=nd` of a clamped B-spline.
pub fn eval_ders<C: Coefficient>(degree: usize, knots: &[f64], ctrl: &[C], t: f64, nd: usize, side: Side) -> Vec<C> {
    let span = find_span(degree, knots, t, side);
    let d = ders_basis_funs(span, t, degree, nd.min(degree), knots);
    let mut out = vec![C::zero(); nd + 1];
    for (k, row) in d.iter().enumerate() {
        let mut acc = C::zero();
        for (j, v) in row.iter().enumerate() {
            acc = acc + ctrl[span - degree + j] * *v;
        }
        out[k] = acc;
    }
    out
}

/// Clamped knot vector on `[0, 1]` with the given interior knots.
pub fn clamped_knots(degree: usize, interior: &[f64]) -> Vec<f64> {
    let mut k = vec![0.0; degree + 1];
    k.extend_from_slice(interior);
    k.extend(std::iter::repeat_n(1.0, degree + 1));
    k
}
