// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! Reading input documents with errors that name the offending field.
//!
//! Documents are parsed in two steps: the raw JSON shape first, then the
//! validating conversion into curves and splines. Errors from either step
//! carry a path such as `curves[2].knots`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveJson, ParamCurve};
use crate::drawing::DrawingJson;
use crate::error::{Error, Result};
use crate::regions::RegionJson;
use crate::spline2d::{FuncJson, MapJson, SpaceJson, SplineFunc2D, SplineMap2D, SplineSpace2D};

/// Input of `extract` and `integrate`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesDoc {
    pub curves: Vec<CurveJson>,
}

/// Output of `extract`: the purged drawing and its regions. Outer regions
/// are listed only when requested.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsDoc {
    pub drawing: DrawingJson,
    pub regions: Vec<RegionJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outer: Vec<RegionJson>,
}

/// Parses `text` as `T`, reporting the JSON path of the first error.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "document".to_string() } else { path };
        Error::schema(field, e.into_inner().to_string())
    })
}

fn within(e: Error, path: &str) -> Error {
    match e {
        Error::Schema { field, message } => Error::Schema { field: format!("{path}.{field}"), message },
        e => e,
    }
}

pub fn read_curves(text: &str) -> Result<Vec<ParamCurve>> {
    let doc: CurvesDoc = parse_json(text)?;
    doc.curves
        .into_iter()
        .enumerate()
        .map(|(i, c)| ParamCurve::try_from(c).map_err(|e| within(e, &format!("curves[{i}]"))))
        .collect()
}

pub fn read_map(text: &str) -> Result<SplineMap2D> {
    SplineMap2D::try_from(parse_json::<MapJson>(text)?)
}

pub fn read_func(text: &str) -> Result<SplineFunc2D> {
    SplineFunc2D::try_from(parse_json::<FuncJson>(text)?)
}

pub fn read_space(text: &str) -> Result<SplineSpace2D> {
    SplineSpace2D::try_from(parse_json::<SpaceJson>(text)?)
}

/// Pretty JSON with a trailing newline. Floats use the shortest form that
/// reads back to the same value, so output is stable across runs.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(e: Error) -> String {
        match e {
            Error::Schema { field, .. } => field,
            e => panic!("not a schema error: {e}"),
        }
    }

    #[test]
    fn curves_document() {
        let ok = r#"{"curves":[{"kind":"segment","points":[[0,0],[1,0]]},
            {"kind":"bspline","degree":2,"knots":[0,0,0,0.5,1,1,1],"points":[[0,0],[1,1],[2,0],[3,1]]}]}"#;
        assert_eq!(read_curves(ok).unwrap().len(), 2);
    }

    #[test]
    fn errors_name_the_field() {
        let decreasing = r#"{"curves":[{"kind":"segment","points":[[0,0],[1,0]]},
            {"kind":"bspline","degree":1,"knots":[0,0,0.7,0.3,1,1],"points":[[0,0],[1,1],[2,0],[3,1]]}]}"#;
        assert_eq!(field_of(read_curves(decreasing).unwrap_err()), "curves[1].knots");
        let wrong_type = r#"{"curves":[{"kind":"segment","points":[[0,0],[1,"a"]]}]}"#;
        assert!(field_of(read_curves(wrong_type).unwrap_err()).starts_with("curves[0].points[1]"));
        let unknown_kind = r#"{"curves":[{"kind":"circle","points":[]}]}"#;
        assert_eq!(field_of(read_curves(unknown_kind).unwrap_err()), "curves[0].kind");
        assert_eq!(field_of(read_curves("[").unwrap_err()), "document");
        let space = r#"{"degrees":[1,1],"knots":[[0,0,1,1],[0,0,0.5,0.2,1,1]]}"#;
        assert_eq!(field_of(read_space(space).unwrap_err()), "knots[1]");
    }

    #[test]
    fn output_is_stable() {
        let curves =
            read_curves(r#"{"curves":[{"kind":"segment","points":[[0.1,0.2],[0.30000000000000004,1e-300]]}]}"#)
                .unwrap();
        let doc = CurvesDoc { curves: curves.into_iter().map(Into::into).collect() };
        let a = to_json_string(&doc);
        let back: CurvesDoc = parse_json(&a).unwrap();
        assert_eq!(to_json_string(&back), a);
    }
}
