// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::geom::Point2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification of failures, used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input data.
    Schema,
    /// Degenerate or unsupported geometry.
    Geometry,
    /// An iterative procedure did not reach its tolerance.
    Convergence,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("parameter {t} outside curve domain [{lo}, {hi}]")]
    ParameterOutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("derivative order {0} is not supported (maximum 2)")]
    UnsupportedDerivativeOrder(usize),

    #[error("vanishing tangent at parameter {t} of curve {curve}")]
    DegenerateTangent { curve: usize, t: f64 },

    #[error("curvature undefined where the first derivative vanishes (t = {t})")]
    UndefinedCurvature { t: f64 },

    #[error("inverted restriction interval [{lo}, {hi}]")]
    InvertedInterval { lo: f64, hi: f64 },

    #[error("curves {a} and {b} overlap along an interval near {at:?}")]
    Overlap { a: usize, b: usize, at: Point2 },

    #[error("empty unvisited path list at vertex {vertex}")]
    EmptyPathList { vertex: usize },

    #[error("unresolved tangent tie at vertex {vertex} between half-edges {first} and {second}")]
    UnresolvedTie { vertex: usize, first: usize, second: usize },

    #[error("region classifiers disagree: signed area {area}, turning {turning}")]
    ClassifierDisagreement { area: f64, turning: f64 },

    #[error("non-positive Jacobian {det} in tile {tile} at {at:?}")]
    NonPositiveJacobian { tile: usize, det: f64, at: Point2 },

    #[error("region {region} cannot be tiled: {reason}")]
    Tiling { region: usize, reason: String },

    #[error("spline map is not bijective: Jacobian {det} at ({u}, {v})")]
    NonBijectiveMap { det: f64, u: f64, v: f64 },

    #[error("point {p:?} is outside the image of the map (residual {residual})")]
    OutsideImage { p: Point2, residual: f64 },

    #[error("singular Jacobian while inverting at ({u}, {v})")]
    SingularJacobian { u: f64, v: f64 },

    #[error("pull-back fit residual {residual} exceeds tolerance {tol} near {worst:?}")]
    PullBack { residual: f64, tol: f64, worst: Point2 },

    #[error("region {region} spans more than one knot element")]
    RegionNotInElement { region: usize },

    #[error("inversion failed inside region {region} claimed covered by the second map")]
    PullBackAccuracy { region: usize },

    #[error("singular local Gram matrix for basis function {index:?}")]
    SingularGram { index: (usize, usize) },

    #[error("basis function {index:?} has zero weight on the interface support")]
    ZeroDenominator { index: (usize, usize) },

    #[error("expression error: {0}")]
    Expression(String),
}

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { field: field.into(), message: message.into() }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Schema { .. } | Error::Expression(_) => ErrorKind::Schema,
            Error::OutsideImage { .. } | Error::PullBack { .. } | Error::PullBackAccuracy { .. } => {
                ErrorKind::Convergence
            }
            _ => ErrorKind::Geometry,
        }
    }
}
