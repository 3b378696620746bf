//! Subcommand implementations. Every report embeds the resolved
//! configuration, and identical seeds reproduce byte-identical bodies.

use clap::Args;
use polyflow::directions::{
    self, exceptional_lines_csv, saddle_connections, DirectionSpec, KroneckerVerdict,
};
use polyflow::geometry::{Axis, CellId, Manifold, ManifoldDescription};
use polyflow::num::{parse_rat, Rat, Scalar};
use polyflow::report::{svg_heatmap_2d, svg_trace_2d};
use polyflow::splitting::{
    self, Ball, Colour, ColourOutcome, NoReturnOutcome,
};
use polyflow::stats::{self, StatsError, TargetSet};
use polyflow::tracer::{self, ManifoldPoint};
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError { code: 1, message: msg.into() }
}

fn domain_err(msg: impl Into<String>) -> CliError {
    CliError { code: 2, message: msg.into() }
}

fn experiment_err(msg: impl Into<String>) -> CliError {
    CliError { code: 3, message: msg.into() }
}

type CmdResult = Result<(), CliError>;

fn load_manifold(path: &str) -> Result<Manifold, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
    let desc = ManifoldDescription::from_json(&text)
        .map_err(|e| domain_err(format!("{path}: {e}")))?;
    desc.build().map_err(|e| domain_err(format!("{path}: {e}")))
}

fn parse_dir(spec: &str, dim: usize) -> Result<DirectionSpec, CliError> {
    let d = DirectionSpec::parse(spec).map_err(|e| config_err(e.to_string()))?;
    if d.dim() != dim {
        return Err(config_err(format!(
            "direction has {} components but the manifold is {dim}-dimensional",
            d.dim()
        )));
    }
    Ok(d)
}

/// `--start` syntax: `x,y,z@i,j,k` (local coordinates at a cell); defaults
/// to the centre of the first cell.
fn parse_start(
    arg: &Option<String>,
    m: &Manifold,
) -> Result<ManifoldPoint<f64>, CliError> {
    match arg {
        None => {
            let mut local = [0.5, 0.5, 0.5];
            if m.dim == 2 {
                local[2] = 0.0;
            }
            Ok(ManifoldPoint::new(m.cells()[0], local))
        }
        Some(text) => {
            let (coords, cell) = text
                .split_once('@')
                .ok_or_else(|| config_err("--start must be LOCAL@CELL, e.g. 0.5,0.5,0.5@0,0,0"))?;
            let local = parse_coords_f64(coords, m.dim)?;
            let cell = parse_cell(cell, m.dim)?;
            if !m.contains_cell(cell) {
                return Err(domain_err(format!("start cell {cell} is not in the manifold")));
            }
            Ok(ManifoldPoint::new(cell, local))
        }
    }
}

fn parse_coords_f64(text: &str, dim: usize) -> Result<[f64; 3], CliError> {
    let parts: Vec<Rat> = text
        .split(',')
        .map(|p| parse_rat(p).map_err(config_err))
        .collect::<Result<_, _>>()?;
    if parts.len() != dim {
        return Err(config_err(format!("expected {dim} coordinates, got {}", parts.len())));
    }
    let mut out = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p.as_f64();
    }
    Ok(out)
}

fn parse_cell(text: &str, dim: usize) -> Result<CellId, CliError> {
    let parts: Vec<i64> = text
        .split(',')
        .map(|p| p.trim().parse().map_err(|e| config_err(format!("bad cell index: {e}"))))
        .collect::<Result<_, _>>()?;
    match (dim, parts.len()) {
        (2, 2) => Ok(CellId(parts[0], parts[1], 0)),
        (3, 3) => Ok(CellId(parts[0], parts[1], parts[2])),
        _ => Err(config_err(format!("cell needs {dim} indices"))),
    }
}

fn write_out(path: &str, body: &str) -> CmdResult {
    if let Some(parent) = Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| config_err(format!("cannot create {parent:?}: {e}")))?;
        }
    }
    fs::write(path, body).map_err(|e| config_err(format!("cannot write {path}: {e}")))
}

fn write_json<T: Serialize>(path: &str, value: &T) -> CmdResult {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| config_err(format!("serialization: {e}")))?;
    write_out(path, &(body + "\n"))
}

pub fn validate(path: &str) -> CmdResult {
    let m = load_manifold(path)?;
    let census = m.census();
    println!(
        "{}: valid; s={}, dim={}, pairings={}, faces: interior={} gated={} paired={}, \
         splitting edges={}",
        m.name,
        m.cell_count(),
        m.dim,
        census.pairings,
        census.interior,
        census.gated,
        census.paired,
        m.splitting_edges().len()
    );
    Ok(())
}

#[derive(Args, Serialize)]
pub struct TraceArgs {
    #[arg(long)]
    manifold: String,
    /// Direction, e.g. `sqrt:2,sqrt:3,1` (3D) or `1,1/2+1/2*sqrt:5` (2D).
    #[arg(long)]
    dir: String,
    /// Start point `LOCAL@CELL`; defaults to the centre of the first cell.
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    tmax: f64,
    /// `float` (default) or `rational` (requires rational direction/start).
    #[arg(long, default_value = "float")]
    mode: String,
    #[arg(long)]
    out: String,
    /// `csv` (default) or `svg` (surfaces only).
    #[arg(long, default_value = "csv")]
    format: String,
}

pub fn trace_cmd(args: &TraceArgs) -> CmdResult {
    let m = load_manifold(&args.manifold)?;
    let spec = parse_dir(&args.dir, m.dim)?;
    let start = parse_start(&args.start, &m)?;

    let body = match args.mode.as_str() {
        "float" => {
            let tr = tracer::trace(&m, &start, &spec.to_f64(), &args.tmax)
                .map_err(|e| domain_err(e.to_string()))?;
            match args.format.as_str() {
                "csv" => tr.to_csv(),
                "svg" if m.dim == 2 => svg_trace_2d(&m, &tr),
                "svg" => return Err(config_err("svg export requires a 2-dimensional surface")),
                other => return Err(config_err(format!("unknown format {other:?}"))),
            }
        }
        "rational" => {
            let dir = spec
                .to_exact()
                .ok_or_else(|| config_err("rational mode needs rational direction components"))?;
            let start_text = args.start.clone().unwrap_or_else(|| {
                if m.dim == 2 { "1/2,1/2@0,0".into() } else { "1/2,1/2,1/2@0,0,0".into() }
            });
            let (coords, cell) = start_text
                .split_once('@')
                .ok_or_else(|| config_err("--start must be LOCAL@CELL"))?;
            let cell = parse_cell(cell, m.dim)?;
            let parts: Vec<Rat> = coords
                .split(',')
                .map(|p| parse_rat(p).map_err(config_err))
                .collect::<Result<_, _>>()?;
            let mut local = [Rat::from_integer(0.into()), Rat::from_integer(0.into()), Rat::from_integer(0.into())];
            for (i, p) in parts.into_iter().enumerate() {
                local[i] = p;
            }
            let t_max = parse_rat(&format!("{}", args.tmax)).map_err(config_err)?;
            let tr = tracer::trace(&m, &ManifoldPoint::new(cell, local), &dir, &t_max)
                .map_err(|e| domain_err(e.to_string()))?;
            match args.format.as_str() {
                "csv" => tr.to_csv(),
                "svg" if m.dim == 2 => svg_trace_2d(&m, &tr),
                other => return Err(config_err(format!("format {other:?} unsupported here"))),
            }
        }
        other => return Err(config_err(format!("unknown mode {other:?}"))),
    };
    write_out(&args.out, &body)
}

#[derive(Args, Serialize)]
pub struct DensityArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    dir: String,
    /// Grid resolution for coverage.
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 4000.0)]
    horizon: f64,
    /// Number of seeded starts.
    #[arg(long, default_value_t = 10)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: String,
    /// `json` (default) or `svg` (heatmap of the first start, surfaces only).
    #[arg(long, default_value = "json")]
    format: String,
}

pub fn density(args: &DensityArgs) -> CmdResult {
    let m = load_manifold(&args.manifold)?;
    let spec = parse_dir(&args.dir, m.dim)?;
    let dir = spec.to_f64();

    let mut sampler = stats::StartSampler::new(&m, args.seed);
    let mut runs = Vec::new();
    let mut incomplete = 0usize;
    let mut first_report = None;
    let mut collected = 0usize;
    let mut tried = 0usize;
    while collected < args.starts {
        tried += 1;
        if tried > 20 * args.starts + 100 {
            return Err(experiment_err("could not find enough regular starts"));
        }
        let q = sampler.next_start();
        let rep = match stats::coverage_time(&m, &q, &dir, args.eps, args.horizon) {
            Ok(rep) => rep,
            Err(StatsError::StartPathological { .. }) => continue,
            Err(e) => return Err(domain_err(e.to_string())),
        };
        collected += 1;
        if !rep.complete() {
            incomplete += 1;
        }
        runs.push(json!({
            "start_cell": q.cell.coords(),
            "start_local": q.local,
            "visited": rep.visited,
            "total_subcells": rep.total_subcells,
            "t_cover": rep.t_cover,
        }));
        if first_report.is_none() {
            first_report = Some((q, rep));
        }
    }

    let report = json!({
        "config": {
            "command": "density",
            "manifold": args.manifold,
            "dir": spec.display(),
            "eps": args.eps,
            "horizon": args.horizon,
            "starts": args.starts,
            "seed": args.seed,
        },
        "complete_starts": args.starts - incomplete,
        "incomplete_starts": incomplete,
        "runs": runs,
    });
    match args.format.as_str() {
        "json" => write_json(&args.out, &report)?,
        "svg" if m.dim == 2 => {
            let (_, rep) = first_report.as_ref().expect("at least one start ran");
            write_out(&args.out, &svg_heatmap_2d(&m, rep))?;
        }
        "svg" => return Err(config_err("svg heatmap requires a 2-dimensional surface")),
        other => return Err(config_err(format!("unknown format {other:?}"))),
    }
    if incomplete > 0 {
        return Err(experiment_err(format!(
            "{incomplete} of {} starts did not cover all subcells by the horizon \
             (report written)",
            args.starts
        )));
    }
    Ok(())
}

#[derive(Args, Serialize)]
pub struct FrequencyArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    dir: String,
    /// Target ball radius.
    #[arg(long, default_value_t = 0.25)]
    radius: f64,
    /// Target centre `LOCAL@CELL`; defaults to the centre of the first cell.
    #[arg(long)]
    center: Option<String>,
    /// Initial number of starts for the stabilized bound estimate.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 2000.0)]
    horizon: f64,
    /// Number of measured segments.
    #[arg(long, default_value_t = 50)]
    segments: usize,
    /// Segment arc length; defaults to twice the estimated bound.
    #[arg(long)]
    seglen: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: String,
    /// Optional CSV of per-start hitting times.
    #[arg(long)]
    hits_out: Option<String>,
}

pub fn frequency(args: &FrequencyArgs) -> CmdResult {
    let m = load_manifold(&args.manifold)?;
    let spec = parse_dir(&args.dir, m.dim)?;
    let dir = spec.to_f64();
    let center = parse_start(&args.center, &m)?;
    let g1 = TargetSet::new(center, args.radius);
    let g2 = g1.half();

    let config = json!({
        "command": "frequency",
        "manifold": args.manifold,
        "dir": spec.display(),
        "radius": args.radius,
        "samples": args.samples,
        "horizon": args.horizon,
        "segments": args.segments,
        "seglen": args.seglen,
        "seed": args.seed,
    });

    let stabilized = stats::estimate_t_star_stabilized(
        &m, &dir, &g2, args.samples, args.horizon, args.seed, 6,
    );
    let (est, history) = match stabilized {
        Ok(v) => v,
        Err(e @ (StatsError::HorizonTooSmall { .. } | StatsError::StartsExhausted { .. })) => {
            write_json(&args.out, &json!({ "config": config, "error": e.to_string() }))?;
            return Err(experiment_err(format!("{e} (partial report written)")));
        }
        Err(e) => return Err(domain_err(e.to_string())),
    };

    if let Some(hits_path) = &args.hits_out {
        write_out(hits_path, &stats::hitting_samples_csv(&est))?;
    }
    let len = args.seglen.unwrap_or(2.0 * est.t_star);
    let freq = match stats::visiting_frequency(&m, &dir, &g1, est.t_star, args.segments, len, args.seed)
    {
        Ok(f) => f,
        Err(e @ StatsError::SegmentTooShort { .. }) => return Err(config_err(e.to_string())),
        Err(e) => {
            write_json(&args.out, &json!({ "config": config, "error": e.to_string() }))?;
            return Err(experiment_err(format!("{e} (partial report written)")));
        }
    };

    let ok = freq.bound_satisfied;
    write_json(
        &args.out,
        &json!({
            "config": config,
            "t_star": est,
            "t_star_history": history,
            "frequency": freq,
        }),
    )?;
    if !ok {
        return Err(experiment_err(
            "a sampled segment fell below the frequency bound (report written)",
        ));
    }
    Ok(())
}

#[derive(Args, Serialize)]
pub struct SaddlesArgs {
    #[arg(long)]
    manifold: String,
    /// Maximum connection length.
    #[arg(long, default_value_t = 2.5)]
    maxlen: f64,
    #[arg(long)]
    out: String,
}

pub fn saddles(args: &SaddlesArgs) -> CmdResult {
    let m = load_manifold(&args.manifold)?;
    let conns = saddle_connections(&m, args.maxlen).map_err(|e| domain_err(e.to_string()))?;
    write_out(&args.out, &directions::connections_csv(&conns))
}

#[derive(Args, Serialize)]
pub struct SplitArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    dir: String,
    #[arg(long, default_value_t = 40.0)]
    tmax: f64,
    /// Ball radius (the flowed balls use half of it).
    #[arg(long, default_value_t = 0.25)]
    radius: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// White cells as `i,j,k;i,j,k;...`; defaults to the first cell.
    #[arg(long)]
    white: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: String,
    /// Optional CSV of per-ball fragment membership.
    #[arg(long)]
    fragments_out: Option<String>,
}

pub fn split(args: &SplitArgs) -> CmdResult {
    let m = load_manifold(&args.manifold)?;
    let spec = parse_dir(&args.dir, m.dim)?;
    let dir = spec.to_f64();
    let whites: BTreeSet<CellId> = match &args.white {
        None => [m.cells()[0]].into_iter().collect(),
        Some(text) => text
            .split(';')
            .map(|c| parse_cell(c, m.dim))
            .collect::<Result<_, _>>()?,
    };
    for w in &whites {
        if !m.contains_cell(*w) {
            return Err(domain_err(format!("white cell {w} is not in the manifold")));
        }
    }

    let outcome = splitting::colour_experiment(
        &m, &dir, args.tmax, args.radius, args.samples, &whites, args.seed,
    )
    .map_err(|e| domain_err(e.to_string()))?;

    let (case, witness, cube_colours, lost) = match &outcome {
        ColourOutcome::Case1(w) => ("case1", Some(w), None, None),
        ColourOutcome::Case2 { cube_colours } => ("case2", None, Some(cube_colours), None),
        ColourOutcome::Inconclusive { lost_fraction } => {
            ("inconclusive", None, None, Some(*lost_fraction))
        }
    };
    write_json(
        &args.out,
        &json!({
            "config": {
                "command": "split",
                "manifold": args.manifold,
                "dir": spec.display(),
                "tmax": args.tmax,
                "radius": args.radius,
                "samples": args.samples,
                "white": whites.iter().map(|c| c.coords()).collect::<Vec<_>>(),
                "seed": args.seed,
            },
            "case": case,
            "witness": witness,
            "per_cube_colours": cube_colours.map(|cc| {
                cc.iter()
                    .map(|(c, col)| (format!("{c}"), *col))
                    .collect::<Vec<_>>()
            }),
            "samples_lost": lost,
        }),
    )?;

    if let Some(frag_path) = &args.fragments_out {
        let mut csv = String::from("ball_cell,colour,fragment,sample,end_cell,itinerary_len\n");
        for &cell in m.cells() {
            let mut centre = [0.5, 0.5, 0.5];
            if m.dim == 2 {
                centre[2] = 0.0;
            }
            let colour = if whites.contains(&cell) { Colour::White } else { Colour::Silver };
            let ball = Ball::new(ManifoldPoint::new(cell, centre), args.radius / 2.0, colour);
            let ev = splitting::evolve_ball(&m, &ball, &dir, args.tmax, args.samples, args.seed)
                .map_err(|e| domain_err(e.to_string()))?;
            for (fi, frag) in ev.fragments.iter().enumerate() {
                for (si, end) in &frag.samples {
                    csv.push_str(&format!(
                        "{},{:?},{},{},{},{}\n",
                        cell, frag.colour, fi, si, end.cell, frag.itinerary.len()
                    ));
                }
            }
        }
        write_out(frag_path, &csv)?;
    }

    if matches!(outcome, ColourOutcome::Inconclusive { .. }) {
        return Err(experiment_err("split experiment inconclusive (report written)"));
    }
    Ok(())
}

#[derive(Args, Serialize)]
pub struct MultiplicityArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    dir: String,
    #[arg(long, default_value_t = 200.0)]
    tmax: f64,
    /// Torus grid subdivisions per axis.
    #[arg(long, default_value_t = 8)]
    grid: usize,
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// Ball radius around the centre of the first cell.
    #[arg(long, default_value_t = 0.25)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: String,
}

pub fn multiplicity(args: &MultiplicityArgs) -> CmdResult {
    let m = load_manifold(&args.manifold)?;
    let spec = parse_dir(&args.dir, m.dim)?;
    let mut centre = [0.5, 0.5, 0.5];
    if m.dim == 2 {
        centre[2] = 0.0;
    }
    let ball = Ball::new(
        ManifoldPoint::new(m.cells()[0], centre),
        args.radius,
        Colour::Uncoloured,
    );
    let rep = splitting::estimate_multiplicity(
        &m, &ball, &spec.to_f64(), args.tmax, args.grid, args.samples, args.seed,
    )
    .map_err(|e| domain_err(e.to_string()))?;
    write_json(
        &args.out,
        &json!({
            "config": {
                "command": "multiplicity",
                "manifold": args.manifold,
                "dir": spec.display(),
                "tmax": args.tmax,
                "grid": args.grid,
                "samples": args.samples,
                "radius": args.radius,
                "seed": args.seed,
            },
            "report": rep,
        }),
    )
}

#[derive(Args, Serialize)]
pub struct NoreturnArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    dir: String,
    #[arg(long, default_value_t = 1000.0)]
    tmax: f64,
    /// Sample points per edge.
    #[arg(long, default_value_t = 32)]
    samples: usize,
    #[arg(long)]
    out: String,
}

pub fn noreturn(args: &NoreturnArgs) -> CmdResult {
    let m = load_manifold(&args.manifold)?;
    let spec = parse_dir(&args.dir, m.dim)?;
    let dir = spec.to_f64();
    let mut rows = Vec::new();
    for edge in m.splitting_edges() {
        if edge.run_axis() != Some(Axis::Y) {
            continue;
        }
        let out = splitting::check_no_return(&m, &dir, edge, &args.tmax, args.samples)
            .map_err(|e| domain_err(e.to_string()))?;
        rows.push(json!({
            "edge": format!("{edge:?}"),
            "outcome": match &out {
                NoReturnOutcome::NoReturn { samples, other_losses } => json!({
                    "no_return": true, "samples": samples, "other_losses": other_losses,
                }),
                NoReturnOutcome::ReturnAt { time, sample, .. } => json!({
                    "no_return": false, "time": time, "sample": sample,
                }),
            },
        }));
    }
    write_json(
        &args.out,
        &json!({
            "config": {
                "command": "noreturn",
                "manifold": args.manifold,
                "dir": spec.display(),
                "tmax": args.tmax,
                "samples": args.samples,
            },
            "edges": rows,
        }),
    )
}

#[derive(Args, Serialize)]
pub struct KroneckerArgs {
    /// 3-component direction spec.
    #[arg(long)]
    dir: String,
    /// Coefficient bound for the bounded search.
    #[arg(long, default_value_t = 1_000_000)]
    bound: i64,
}

pub fn kronecker(args: &KroneckerArgs) -> CmdResult {
    let spec = DirectionSpec::parse(&args.dir).map_err(|e| config_err(e.to_string()))?;
    if spec.dim() != 3 {
        return Err(config_err("kronecker test needs a 3-component direction"));
    }
    // Exact components get the symbolic test; the bounded search covers the
    // same ground for rational inputs and reports its certificate semantics.
    let verdict = spec.kronecker().expect("dimension checked");
    let (a1, a2) = spec.alphas().expect("dimension checked");
    let bounded = match (a1.as_rat(), a2.as_rat()) {
        (Some(x), Some(y)) => Some(directions::kronecker_test_exact(x, y, args.bound)),
        _ => Some(directions::kronecker_test(a1.to_f64(), a2.to_f64(), args.bound)),
    };
    let describe = |v: &KroneckerVerdict| match v {
        KroneckerVerdict::RationalRelation { a, b, c } => {
            json!({ "relation": [a, b, c] })
        }
        KroneckerVerdict::NoRelationUpTo { bound } => json!({ "no_relation_up_to": bound }),
        KroneckerVerdict::IndependentExact => json!({ "independent_exact": true }),
    };
    println!(
        "{}",
        json!({
            "dir": spec.display(),
            "symbolic": describe(&verdict),
            "bounded": bounded.as_ref().map(describe),
            "bound": args.bound,
        })
    );
    Ok(())
}

#[derive(Args, Serialize)]
pub struct LinesArgs {
    /// Face-edge line coefficients `c1,c2,c3` (rationals).
    #[arg(long)]
    coeffs: String,
    /// Bound on the generating integer triples.
    #[arg(long, default_value_t = 2)]
    bound: i64,
    #[arg(long)]
    out: String,
}

pub fn lines(args: &LinesArgs) -> CmdResult {
    let parts: Vec<Rat> = args
        .coeffs
        .split(',')
        .map(|p| parse_rat(p).map_err(config_err))
        .collect::<Result<_, _>>()?;
    let [c1, c2, c3]: [Rat; 3] = parts
        .try_into()
        .map_err(|_| config_err("--coeffs needs exactly c1,c2,c3"))?;
    let coeffs = [c1, c2, c3];
    let lines = directions::exceptional_lines_from_coeffs(&coeffs, args.bound)
        .map_err(|e| domain_err(e.to_string()))?;
    write_out(&args.out, &exceptional_lines_csv(&coeffs, &lines))
}
