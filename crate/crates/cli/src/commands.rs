//! Implementations of the six subcommands.
//!
//! Every command creates its output directory, writes its result files,
//! then a `manifest.json` recording the configuration, seed, crate
//! version, wall-clock timing and any warnings. Result files depend only
//! on the inputs and the seed; timing lives in the manifest alone, so a
//! rerun leaves every result file byte-identical.

use crate::numfmt::{fmt_sig, round_json};
use crate::svg::{Figure, Frame};
use crate::{
    DepthEvalArgs, HeteroArgs, PowerArgs, RegionsArgs, SimulateArgs, SpreadArgs,
};
use depthreg::dataset::{self, Covariates, Dataset, DistanceMatrix};
use depthreg::depth::{self, DepthKind};
use depthreg::heterotest;
use depthreg::pca;
use depthreg::regions::{self, CentralRegion, MedianEstimate, Polyline};
use depthreg::simlab::{self, PowerCell, PowerStudyConfig, SimulationModel};
use depthreg::spread::{self, SpreadMethod};
use depthreg::weights::{self, WeightScheme, WeightVector, WeightedLocalSample};
use depthreg::{Error, Result};
use serde::Serialize;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Manifest<C: Serialize> {
    command: &'static str,
    version: &'static str,
    seed: u64,
    config: C,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight_scheme: Option<WeightScheme>,
    /// Resolved neighborhood size when the k-NN scheme is in use.
    #[serde(skip_serializing_if = "Option::is_none")]
    k_resolved: Option<usize>,
    outputs: Vec<String>,
    warnings: Vec<String>,
    timing_seconds: f64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(io_err(&path))
}

/// Serializes with every fractional number rounded to six significant
/// digits, matching the CSV and SVG formatting.
fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut v = serde_json::to_value(value).expect("results serialize to JSON");
    round_json(&mut v);
    let mut text = serde_json::to_string_pretty(&v).expect("JSON tree prints");
    text.push('\n');
    write_text(dir, name, &text)
}

fn knn_k(scheme: &WeightScheme, n: usize) -> Option<usize> {
    match scheme {
        WeightScheme::Knn { k } => Some(k.resolve(n)),
        WeightScheme::Kernel { .. } => None,
    }
}

fn load(input: &crate::InputArgs) -> Result<Dataset> {
    dataset::load_dataset(&input.responses, &input.covariates, input.grid.as_deref())
}

fn weight_vectors(ds: &Dataset, scheme: &WeightScheme) -> Result<Vec<WeightVector>> {
    let dm = DistanceMatrix::from_covariates(&ds.covariates)?;
    heterotest::weight_vectors(&dm, scheme)
}

// --- depth-eval ---------------------------------------------------------

pub fn depth_eval(a: &DepthEvalArgs) -> Result<()> {
    let start = Instant::now();
    let ds = load(&a.input)?;
    let scheme = a.common.scheme()?;
    let cfg = a.common.depth_config()?;
    let wvs = weight_vectors(&ds, &scheme)?;
    let mut csv = String::from("index,depth,approximate\n");
    for (i, wv) in wvs.iter().enumerate() {
        let s = weights::local_sample(&ds.responses, wv)?;
        let dv = depth::evaluate(a.common.depth, &ds.responses[i], &s, &cfg)?;
        let _ = writeln!(csv, "{i},{},{}", fmt_sig(dv.value), dv.approximate);
    }
    ensure_dir(&a.out)?;
    write_text(&a.out, "depths.csv", &csv)?;
    write_json(
        &a.out,
        "manifest.json",
        &Manifest {
            command: "depth-eval",
            version: VERSION,
            seed: a.common.seed,
            config: a,
            weight_scheme: Some(scheme),
            k_resolved: knn_k(&scheme, ds.n()),
            outputs: vec!["depths.csv".into()],
            warnings: vec![],
            timing_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

// --- regions --------------------------------------------------------------

#[derive(Serialize)]
struct ContourPiece {
    vertices: usize,
    closed: bool,
}

#[derive(Serialize)]
struct RegionRecord {
    /// Covariate row the region conditions on.
    query: usize,
    r: f64,
    alpha: f64,
    /// Dataset row indices of the atoms inside the region.
    member_indices: Vec<usize>,
    member_mass: f64,
    depth: DepthKind,
    median: MedianEstimate,
    trim: f64,
    trimmed_mean: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contour: Option<Vec<ContourPiece>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    svg: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contour_csv: Option<String>,
}

fn parse_queries(text: &str, n: usize) -> Result<Vec<usize>> {
    if text.eq_ignore_ascii_case("all") {
        return Ok((0..n).collect());
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let i: usize = part.parse().map_err(|_| {
            Error::InvalidArgument(format!("query index {part:?} is not a nonnegative integer"))
        })?;
        if i >= n {
            return Err(Error::InvalidArgument(format!(
                "query index {i} out of range for {n} rows"
            )));
        }
        out.push(i);
    }
    Ok(out)
}

fn region_figure(
    query: usize,
    region: &CentralRegion,
    s: &WeightedLocalSample,
    polylines: &[Polyline],
    median: &MedianEstimate,
    tmean: &[f64],
    names: &[String],
) -> String {
    let median_pt = [median.point[0], median.point[1]];
    let tmean_pt = [tmean[0], tmean[1]];
    let extent = s
        .points
        .iter()
        .map(|p| [p[0], p[1]])
        .chain(polylines.iter().flat_map(|pl| pl.points.iter().copied()))
        .chain([median_pt, tmean_pt]);
    let members: HashSet<usize> = region.member_indices.iter().copied().collect();
    let mut fig = Figure::new(
        Frame::around(extent),
        &format!(
            "central region r={} at covariate row {query}",
            fmt_sig(region.r)
        ),
        &names[0],
        &names[1],
    );
    for (i, p) in s.points.iter().enumerate() {
        if members.contains(&i) {
            fig.dot([p[0], p[1]], 3.0, "#4878a8", 0.9);
        } else {
            fig.dot([p[0], p[1]], 2.5, "#999999", 0.6);
        }
    }
    for pl in polylines {
        fig.path(&pl.points, pl.closed, "#d2691e");
    }
    fig.ring(median_pt, 6.0, "#c03028");
    fig.cross(tmean_pt, 6.0, "#222222");
    fig.finish()
}

pub fn regions_cmd(a: &RegionsArgs) -> Result<()> {
    let start = Instant::now();
    let ds = load(&a.input)?;
    let queries = parse_queries(&a.queries, ds.n())?;
    let scheme = a.common.scheme()?;
    let cfg = a.common.depth_config()?;
    let wvs = weight_vectors(&ds, &scheme)?;
    ensure_dir(&a.out)?;

    let mut records = Vec::with_capacity(queries.len());
    let mut outputs = vec!["regions.json".to_string()];
    let mut warnings = Vec::new();
    let mut warned_dim = false;
    for &q in &queries {
        let s = weights::local_sample(&ds.responses, &wvs[q])?;
        let depths = depth::depth_at_points(a.common.depth, &s, &cfg)?;
        let region = regions::central_region_given_depths(&s, &depths, a.common.depth, a.r)?;
        let median = regions::conditional_median(&s, a.common.depth, &cfg)?;
        let tmean = regions::trimmed_mean(&s, a.common.depth, &cfg, a.trim)?;
        let member_rows: Vec<usize> = region.member_indices.iter().map(|&j| s.source[j]).collect();

        let mut contour = None;
        let mut svg_name = None;
        let mut contour_name = None;
        if s.dim() == 2 {
            let polylines = regions::contour_2d(&s, a.common.depth, &cfg, region.alpha, a.resolution)?;
            let cname = format!("region_{q}_contour.csv");
            let mut ccsv = String::from("polyline,x,y\n");
            for (pi, pl) in polylines.iter().enumerate() {
                for v in &pl.points {
                    let _ = writeln!(ccsv, "{pi},{},{}", fmt_sig(v[0]), fmt_sig(v[1]));
                }
            }
            write_text(&a.out, &cname, &ccsv)?;
            let sname = format!("region_{q}.svg");
            let fig = region_figure(q, &region, &s, &polylines, &median, &tmean, &ds.response_names);
            write_text(&a.out, &sname, &fig)?;
            contour = Some(
                polylines
                    .iter()
                    .map(|pl| ContourPiece {
                        vertices: pl.points.len(),
                        closed: pl.closed,
                    })
                    .collect(),
            );
            outputs.push(sname.clone());
            outputs.push(cname.clone());
            svg_name = Some(sname);
            contour_name = Some(cname);
        } else if !warned_dim {
            warnings.push(format!(
                "response dimension is {}; contours and figures need 2, so only the JSON records were written",
                s.dim()
            ));
            warned_dim = true;
        }

        records.push(RegionRecord {
            query: q,
            r: region.r,
            alpha: region.alpha,
            member_indices: member_rows,
            member_mass: region.member_mass,
            depth: a.common.depth,
            median,
            trim: a.trim,
            trimmed_mean: tmean,
            contour,
            svg: svg_name,
            contour_csv: contour_name,
        });
    }
    write_json(&a.out, "regions.json", &records)?;
    write_json(
        &a.out,
        "manifest.json",
        &Manifest {
            command: "regions",
            version: VERSION,
            seed: a.common.seed,
            config: a,
            weight_scheme: Some(scheme),
            k_resolved: knn_k(&scheme, ds.n()),
            outputs,
            warnings,
            timing_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

// --- spread -----------------------------------------------------------

fn spread_figure(axis: &str, xs: &[f64], deltas: &[f64], r: f64) -> String {
    let pts: Vec<[f64; 2]> = xs.iter().zip(deltas).map(|(&x, &d)| [x, d]).collect();
    let mut fig = Figure::new(
        Frame::around(pts.iter().copied()),
        &format!("spread profile against {axis}"),
        axis,
        &format!("delta(r={})", fmt_sig(r)),
    );
    for p in pts {
        fig.dot(p, 3.0, "#4878a8", 0.8);
    }
    fig.finish()
}

pub fn spread_cmd(a: &SpreadArgs) -> Result<()> {
    let start = Instant::now();
    let ds = load(&a.input)?;
    let scheme = a.common.scheme()?;
    let cfg = a.common.depth_config()?;
    let wvs = weight_vectors(&ds, &scheme)?;
    let pcs = pca::principal_scores(&ds.covariates)?;

    let mut csv = String::from(if a.volume.is_some() {
        "index,delta,p1,p2,volume\n"
    } else {
        "index,delta,p1,p2\n"
    });
    let mut deltas = Vec::with_capacity(ds.n());
    let mut degenerate_volumes = 0usize;
    for (i, wv) in wvs.iter().enumerate() {
        let s = weights::local_sample(&ds.responses, wv)?;
        let depths = depth::depth_at_points(a.common.depth, &s, &cfg)?;
        let delta =
            spread::diameter_over_candidates(&s, &depths, &ds.responses, a.common.depth, &cfg, a.r)?;
        deltas.push(delta.value);
        let [p1, p2] = pcs.scores[i];
        let _ = write!(
            csv,
            "{i},{},{},{}",
            fmt_sig(delta.value),
            fmt_sig(p1),
            fmt_sig(p2)
        );
        match a.volume {
            None => {}
            Some(SpreadMethod::HullVolume) => {
                let v = spread::hull_volume_given_depths(&s, &depths, a.r)?;
                degenerate_volumes += v.degenerate as usize;
                let _ = write!(csv, ",{}", fmt_sig(v.value));
            }
            Some(SpreadMethod::GridVolume) => {
                let v = spread::spread_volume_grid(&s, a.common.depth, &cfg, a.r, a.volume_resolution)?;
                degenerate_volumes += v.degenerate as usize;
                let _ = write!(csv, ",{}", fmt_sig(v.value));
            }
            // the --volume parser only admits the two volume methods
            Some(SpreadMethod::Diameter) => unreachable!(),
        }
        csv.push('\n');
    }

    ensure_dir(&a.out)?;
    write_text(&a.out, "spread.csv", &csv)?;
    let p1: Vec<f64> = pcs.scores.iter().map(|s| s[0]).collect();
    let p2: Vec<f64> = pcs.scores.iter().map(|s| s[1]).collect();
    write_text(&a.out, "spread_p1.svg", &spread_figure("P1", &p1, &deltas, a.r))?;
    write_text(&a.out, "spread_p2.svg", &spread_figure("P2", &p2, &deltas, a.r))?;

    let mut warnings = Vec::new();
    for (j, label) in ["first", "second"].iter().enumerate() {
        if pcs.degenerate[j] {
            warnings.push(format!(
                "{label} principal component has no dispersion; its scores are zero"
            ));
        }
    }
    if degenerate_volumes > 0 {
        warnings.push(format!(
            "volume degenerate (flat member cloud) at {degenerate_volumes} of {} rows",
            ds.n()
        ));
    }
    write_json(
        &a.out,
        "manifest.json",
        &Manifest {
            command: "spread",
            version: VERSION,
            seed: a.common.seed,
            config: a,
            weight_scheme: Some(scheme),
            k_resolved: knn_k(&scheme, ds.n()),
            outputs: vec![
                "spread.csv".into(),
                "spread_p1.svg".into(),
                "spread_p2.svg".into(),
            ],
            warnings,
            timing_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

// --- hetero-test -----------------------------------------------------

pub fn hetero_test(a: &HeteroArgs) -> Result<()> {
    let start = Instant::now();
    let ds = load(&a.input)?;
    let scheme = a.common.scheme()?;
    let cfg = a.common.depth_config()?;
    let result = heterotest::permutation_test(
        &ds,
        a.common.depth,
        &cfg,
        a.r,
        &scheme,
        a.permutations,
        a.common.seed,
        a.p_rule,
    )?;
    ensure_dir(&a.out)?;
    write_json(&a.out, "hetero_test.json", &result)?;
    let mut warnings = Vec::new();
    if result.degenerate {
        warnings.push(
            "observed statistic is exactly zero: the spread profile is flat and the \
             permutation distribution is degenerate"
                .into(),
        );
    }
    write_json(
        &a.out,
        "manifest.json",
        &Manifest {
            command: "hetero-test",
            version: VERSION,
            seed: a.common.seed,
            config: a,
            weight_scheme: Some(scheme),
            k_resolved: knn_k(&scheme, ds.n()),
            outputs: vec!["hetero_test.json".into()],
            warnings,
            timing_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

// --- simulate -----------------------------------------------------------

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let start = Instant::now();
    let model = SimulationModel::new(a.model, a.a)?;
    let ds = simlab::sample_model(model, a.n, a.seed)?;
    ensure_dir(&a.out)?;
    let mut outputs = vec!["responses.csv".to_string(), "covariates.csv".to_string()];
    write_text(
        &a.out,
        "responses.csv",
        &dataset::matrix_to_csv(&ds.response_names, &ds.responses, fmt_sig),
    )?;
    match &ds.covariates {
        Covariates::Vectors(rows) => {
            write_text(
                &a.out,
                "covariates.csv",
                &dataset::matrix_to_csv(&ds.covariate_names, rows, fmt_sig),
            )?;
        }
        Covariates::Curves { grid, values } => {
            write_text(
                &a.out,
                "covariates.csv",
                &dataset::matrix_to_csv(&ds.covariate_names, values, fmt_sig),
            )?;
            let row: Vec<String> = grid.iter().map(|v| fmt_sig(*v)).collect();
            write_text(&a.out, "grid.csv", &(row.join(",") + "\n"))?;
            outputs.push("grid.csv".into());
        }
    }
    write_json(
        &a.out,
        "manifest.json",
        &Manifest {
            command: "simulate",
            version: VERSION,
            seed: a.seed,
            config: a,
            weight_scheme: None,
            k_resolved: None,
            outputs,
            warnings: vec![],
            timing_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

// --- power-study ----------------------------------------------------------

pub fn power_study(a: &PowerArgs) -> Result<()> {
    let start = Instant::now();
    let mut cells = Vec::with_capacity(a.n.len() * a.a.len());
    for &n in &a.n {
        for &scale in &a.a {
            cells.push(PowerCell {
                model: SimulationModel::new(a.model, scale)?,
                n,
                level: a.level,
            });
        }
    }
    let cfg = PowerStudyConfig {
        cells,
        replications: a.replications,
        permutations: a.permutations,
        seed: a.common.seed,
        depth: a.common.depth,
        depth_cfg: a.common.depth_config()?,
        r: a.r,
        scheme: a.common.scheme()?,
        rule: a.p_rule,
    };
    let table = simlab::power_study(&cfg)?;
    let mut csv = String::from("model,a,n,level,rate,replications,permutations,seed\n");
    for row in &table.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            row.model_id,
            fmt_sig(row.a),
            row.n,
            fmt_sig(row.level),
            fmt_sig(row.rate),
            row.replications,
            row.permutations,
            row.seed
        );
    }
    ensure_dir(&a.out)?;
    write_text(&a.out, "power_table.csv", &csv)?;
    write_json(
        &a.out,
        "manifest.json",
        &Manifest {
            command: "power-study",
            version: VERSION,
            seed: a.common.seed,
            config: a,
            weight_scheme: Some(cfg.scheme),
            k_resolved: None,
            outputs: vec!["power_table.csv".into()],
            warnings: vec![],
            timing_seconds: start.elapsed().as_secs_f64(),
        },
    )
}
