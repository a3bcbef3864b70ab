// Copyright 2026 the Curveplan Authors
// SPDX-License-Identifier: Apache-2.0

//! `curveplan`: region extraction, region-aware integration, interface
//! meshes of two spline maps and quasi-interpolation from the command line.
//!
//! Failures print one line of JSON to standard error,
//! `{"error":{"kind":…,"field":…,"message":…}}`, and exit with 2 for schema
//! violations, 3 for degenerate geometry, 4 for convergence failures and 1
//! for I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use serde::{Deserialize, Serialize};

use curveplan::drawing::{build_drawing, DrawingJson, DEFAULT_TOL};
use curveplan::expr::Expr;
use curveplan::integrate::{
    adaptive_with, integrate_all, integrate_region, tile_regions, Reference, DEFAULT_STOP_THRESHOLD,
};
use curveplan::interface::{InterfaceMesh, InterfaceOptions};
use curveplan::io::{read_curves, read_func, read_map, read_space, to_json_string, RegionsDoc};
use curveplan::pullback::{PullBackOptions, DEFAULT_FIT_TOL, DEFAULT_SAMPLE_COUNT};
use curveplan::quasi::{level_set_coeffs, llm_project, LocalReport, Source};
use curveplan::regions::{regions_of, RegionJson, RegionSet};
use curveplan::spline2d::{FuncJson, Index2};
use curveplan::svg::regions_svg;
use curveplan::{Error, ErrorKind};

const MAX_LEVEL_LIMIT: usize = 12;

#[derive(Parser)]
#[command(name = "curveplan", version, about = "Regions of curve drawings and region-aware quadrature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the regions of a drawing of curves.
    Extract(ExtractArgs),
    /// Integrate a closed-form function over extracted regions with
    /// level-doubling Gauss quadrature.
    Integrate(IntegrateArgs),
    /// Build the interface mesh of two spline maps.
    MeshIntersect(MeshArgs),
    /// Project a field given on the second map onto a spline space of the
    /// first.
    QuasiInterp(QuasiArgs),
}

#[derive(Args)]
struct DrawingArgs {
    /// Curves document: {"curves": [...]}.
    input: PathBuf,
    /// Vertex clustering tolerance in physical units.
    #[arg(long, default_value_t = DEFAULT_TOL, allow_hyphen_values = true)]
    tol: f64,
    /// Write an SVG rendering of the regions.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    drawing: DrawingArgs,
    /// Also list the outer region of every connected component.
    #[arg(long)]
    keep_outer: bool,
    /// Regions document (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    drawing: DrawingArgs,
    /// Integrand in x and y, e.g. "sin(pi/2*x)*cos(pi*y)*exp(x)".
    #[arg(long, short = 'f')]
    integrand: String,
    /// One-based interior region to integrate over (all regions if absent).
    #[arg(long)]
    region: Option<usize>,
    /// Highest level; level j uses 2^j Gauss points per tile direction.
    #[arg(long, default_value_t = 8)]
    max_level: usize,
    /// Stop at the first level whose value changes by less than this.
    #[arg(long, default_value_t = DEFAULT_STOP_THRESHOLD, allow_hyphen_values = true)]
    stop_threshold: f64,
    /// Reference for the error column: "overkill" (level max-level + 2),
    /// "none", or a number.
    #[arg(long, default_value = "overkill")]
    reference: String,
    /// Convergence table as CSV (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InterfaceArgs {
    /// First spline map; its parameter square carries the mesh.
    #[arg(long)]
    map1: PathBuf,
    /// Second spline map.
    #[arg(long)]
    map2: PathBuf,
    /// Vertex clustering tolerance in parameter units.
    #[arg(long, default_value_t = DEFAULT_TOL, allow_hyphen_values = true)]
    tol: f64,
    /// Fit tolerance for pulled-back curves.
    #[arg(long, default_value_t = DEFAULT_FIT_TOL, allow_hyphen_values = true)]
    fit_tol: f64,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    maps: InterfaceArgs,
    /// Write an SVG rendering of the regions.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Regions document (standard output if absent).
    #[arg(long)]
    regions: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Lee–Lyche–Mørken quasi-interpolant with local L² projectors.
    Llm,
    /// Normalized basis averages of the zero-extended field.
    Levelset,
}

#[derive(Args)]
struct QuasiArgs {
    #[command(flatten)]
    maps: InterfaceArgs,
    /// Scalar spline on the second map's parameter square.
    #[arg(long)]
    source: PathBuf,
    /// Target spline space on the first map's parameter square.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Gauss points per tile direction (chosen from the degrees if absent).
    #[arg(long)]
    points: Option<usize>,
    /// Coefficients and per-basis report (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct MeshRegion {
    #[serde(flatten)]
    region: RegionJson,
    net_area: f64,
    element1: Index2,
    element2: Option<Index2>,
    covered: bool,
}

#[derive(Serialize, Deserialize)]
struct MeshDoc {
    drawing: DrawingJson,
    regions: Vec<MeshRegion>,
}

#[derive(Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum QuasiDoc {
    Llm { func: FuncJson, reports: Vec<LocalReport> },
    Levelset { func: FuncJson, lambda: Vec<Index2>, numerators: Vec<f64>, denominators: Vec<f64> },
}

struct Failure {
    kind: &'static str,
    code: u8,
    field: Option<String>,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let (kind, code) = match e.kind() {
            ErrorKind::Schema => ("schema", 2),
            ErrorKind::Geometry => ("geometry", 3),
            ErrorKind::Convergence => ("convergence", 4),
        };
        let field = match &e {
            Error::Schema { field, .. } => Some(field.clone()),
            _ => None,
        };
        let message = match e {
            Error::Schema { message, .. } => message,
            e => e.to_string(),
        };
        Failure { kind, code, field, message }
    }
}

impl Failure {
    fn schema(field: &str, message: impl Into<String>) -> Failure {
        Error::schema(field, message).into()
    }

    fn io(path: &Path, e: std::io::Error) -> Failure {
        Failure { kind: "io", code: 1, field: None, message: format!("{}: {e}", path.display()) }
    }

    fn print(&self) {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            field: Option<&'a str>,
            message: &'a str,
        }
        #[derive(Serialize)]
        struct Report<'a> {
            error: Body<'a>,
        }
        let r = Report { error: Body { kind: self.kind, field: self.field.as_deref(), message: &self.message } };
        eprintln!("{}", serde_json::to_string(&r).expect("error report serializes"));
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_tol(field: &str, v: f64) -> Outcome {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::schema(field, "must be a positive finite number"))
    }
}

fn load_regions(args: &DrawingArgs) -> std::result::Result<RegionSet, Failure> {
    check_tol("--tol", args.tol)?;
    let curves = read_curves(&read(&args.input)?)?;
    info!("{} curves read from {}", curves.len(), args.input.display());
    let drawing = build_drawing(curves, args.tol)?;
    debug!("{} vertices, {} edges before purge", drawing.vertices.len(), drawing.edges.len());
    let rs = regions_of(&drawing)?;
    info!("{} interior regions in {} components", rs.regions.len(), rs.outer.len());
    if let Some(svg) = &args.svg {
        write_or_print(Some(svg), &regions_svg(&rs))?;
    }
    Ok(rs)
}

fn extract(args: &ExtractArgs) -> Outcome {
    let rs = load_regions(&args.drawing)?;
    let json = rs.to_json();
    let doc = RegionsDoc {
        drawing: rs.drawing.to_json(),
        regions: json.regions,
        outer: if args.keep_outer { json.outer } else { Vec::new() },
    };
    write_or_print(args.out.as_deref(), &to_json_string(&doc))
}

fn integrate(args: &IntegrateArgs) -> Outcome {
    check_tol("--stop-threshold", args.stop_threshold)?;
    if args.max_level > MAX_LEVEL_LIMIT {
        return Err(Failure::schema("--max-level", format!("at most {MAX_LEVEL_LIMIT}")));
    }
    let reference = match args.reference.as_str() {
        "overkill" => Reference::Overkill,
        "none" => Reference::None,
        s => match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Reference::Exact(v),
            _ => return Err(Failure::schema("--reference", "expected \"overkill\", \"none\" or a number")),
        },
    };
    let f: Expr = args.integrand.parse().map_err(|e: Error| Failure::schema("--integrand", e.to_string()))?;
    let rs = load_regions(&args.drawing)?;
    if let Some(r) = args.region {
        if r == 0 || r > rs.regions.len() {
            return Err(Failure::schema("--region", format!("must be between 1 and {}", rs.regions.len())));
        }
    }
    let tiles = tile_regions(&rs)?;
    info!("{} tiles", tiles.iter().map(Vec::len).sum::<usize>());
    let g = |p| f.eval(p);
    let report = adaptive_with(
        |n| {
            debug!("evaluating with {n} points per direction");
            match args.region {
                Some(r) => integrate_region(&rs, &tiles, r - 1, &g, n),
                None => integrate_all(&rs, &tiles, &g, n),
            }
        },
        args.max_level,
        args.stop_threshold,
        reference,
    )?;
    write_or_print(args.out.as_deref(), &report.to_csv())?;
    match report.stop_level {
        Some(j) => {
            info!("stopped at level {j}");
            Ok(())
        }
        None => Err(Failure {
            kind: "convergence",
            code: 4,
            field: None,
            message: format!(
                "no level up to {} changed the value by less than {:e}",
                args.max_level, args.stop_threshold
            ),
        }),
    }
}

fn interface_mesh(args: &InterfaceArgs) -> std::result::Result<InterfaceMesh, Failure> {
    check_tol("--tol", args.tol)?;
    check_tol("--fit-tol", args.fit_tol)?;
    let t1 = read_map(&read(&args.map1)?).map_err(|e| prefixed(e, "map1"))?;
    let t2 = read_map(&read(&args.map2)?).map_err(|e| prefixed(e, "map2"))?;
    let opts = InterfaceOptions {
        tol: args.tol,
        pull_back: PullBackOptions { sample_count: DEFAULT_SAMPLE_COUNT, fit_tol: args.fit_tol },
    };
    let mesh = InterfaceMesh::build(&t1, &t2, opts)?;
    info!(
        "{} regions, {} pulled-back arcs, {} covered",
        mesh.regions.regions.len(),
        mesh.pullbacks.len(),
        mesh.info.iter().filter(|i| i.covered).count()
    );
    Ok(mesh)
}

fn prefixed(e: Error, doc: &str) -> Failure {
    match e {
        Error::Schema { field, message } => Failure::schema(&format!("{doc}.{field}"), message),
        e => e.into(),
    }
}

fn mesh_intersect(args: &MeshArgs) -> Outcome {
    let mesh = interface_mesh(&args.maps)?;
    if let Some(svg) = &args.svg {
        write_or_print(Some(svg), &regions_svg(&mesh.regions))?;
    }
    let json = mesh.regions.to_json();
    let regions = json
        .regions
        .into_iter()
        .zip(&mesh.info)
        .enumerate()
        .map(|(i, (region, info))| MeshRegion {
            region,
            net_area: mesh.regions.net_area(i),
            element1: info.element1,
            element2: info.element2,
            covered: info.covered,
        })
        .collect();
    let doc = MeshDoc { drawing: mesh.regions.drawing.to_json(), regions };
    write_or_print(args.regions.as_deref(), &to_json_string(&doc))
}

fn quasi_interp(args: &QuasiArgs) -> Outcome {
    let source = read_func(&read(&args.source)?).map_err(|e| prefixed(e, "source"))?;
    let target = read_space(&read(&args.target)?).map_err(|e| prefixed(e, "target"))?;
    if args.points == Some(0) {
        return Err(Failure::schema("--points", "must be positive"));
    }
    let mesh = interface_mesh(&args.maps)?;
    if source.space() != mesh.t2.space() {
        return Err(Failure::schema("source", "must use the knot vectors and degrees of the second map"));
    }
    let doc = match args.mode {
        Mode::Llm => {
            let pr = llm_project(Source::Second(&source), &target, &mesh, args.points)?;
            let worst = pr.reports.iter().map(|r| r.condition).fold(0.0, f64::max);
            info!("{} local problems, largest Gram condition number {worst:.3e}", pr.reports.len());
            QuasiDoc::Llm { func: pr.func.into(), reports: pr.reports }
        }
        Mode::Levelset => {
            let ls = level_set_coeffs(&source, &target, &mesh, args.points)?;
            info!("{} basis functions meet the covered interface", ls.lambda.len());
            QuasiDoc::Levelset {
                func: ls.func.into(),
                lambda: ls.lambda,
                numerators: ls.numerators,
                denominators: ls.denominators,
            }
        }
    };
    write_or_print(args.out.as_deref(), &to_json_string(&doc))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CURVEPLAN_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            Failure::schema("arguments", first).print();
            return ExitCode::from(2);
        }
    };
    let outcome = match &cli.command {
        Command::Extract(a) => extract(a),
        Command::Integrate(a) => integrate(a),
        Command::MeshIntersect(a) => mesh_intersect(a),
        Command::QuasiInterp(a) => quasi_interp(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.print();
            ExitCode::from(f.code)
        }
    }
}
