// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Region extraction for drawings of intersecting planar curves, and
//! region-aware quadrature built on top of it.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod curve;
pub mod drawing;
pub mod error;
pub mod expr;
pub mod gauss;
pub mod geom;
pub mod integrate;
pub mod interface;
pub mod intersect;
pub mod io;
pub mod pullback;
pub mod quasi;
pub mod regions;
pub mod spline2d;
pub mod svg;
pub mod tile;

pub use curve::{CurveKind, CurveRestriction, Endpoint, ParamCurve};
pub use error::{Error, ErrorKind, Result};
pub use geom::{BBox, Point2, Vec2};
