use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use mvss::carrier::{
    check_acyclic, synthesize_chain_map, verify_carried, verify_chain_map, verify_equivalence, vr_carrier,
    Carrier, EquivalencePack,
};
use mvss::complex::{build_vietoris_rips, distance_grid};
use mvss::cover::{find_refinement, nerve};
use mvss::diagram::{join_diagram, realization};
use mvss::io;
use mvss::persistence::compute_ph;
use mvss::serre::{cover_sequence, cover_stability, inverse_refinement, local_checks};
use mvss::{FieldSpec, FilteredComplex64, MvssError, Result};

#[derive(Parser, Debug)]
#[command(name = "mvss", version, about = "Persistent Mayer-Vietoris spectral sequences")]
struct Cli {
    /// Worker threads; defaults to MVSS_THREADS, then to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Persistent homology barcodes of a complex or of the Rips complex of a point cloud.
    Ph(PhArgs),
    /// Filtered nerve of a cover.
    Nerve(CoverArgs),
    /// Blowup complex of a cover and its barcodes.
    Blowup(CoverArgs),
    /// Pages of the Mayer-Vietoris spectral sequence of a cover.
    Ss(SsArgs),
    /// Realization of the join diagram of a vertex partition.
    Join(JoinArgs),
    /// Check carriers and synthesize the chain maps they carry.
    CarrierVerify(CarrierArgs),
    /// Refinement certificate between two covers.
    CompareRefine(CompareArgs),
    /// Local checks from a finer cover W to a coarser cover U.
    LocalChecks(LocalArgs),
    /// Page-2 stability bound between two covers.
    CoverStability(PairArgs),
    /// Write a worked example to a directory.
    Fixtures(FixtureArgs),
}

#[derive(Args, Debug)]
struct PhArgs {
    #[arg(long, conflicts_with = "points", required_unless_present = "points")]
    complex: Option<PathBuf>,
    /// CSV point cloud; builds its Rips complex.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    maxdim: usize,
    /// Prime field for point clouds.
    #[arg(long, default_value_t = 2)]
    field: u32,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    cover: PathBuf,
}

#[derive(Args, Debug)]
struct SsArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    cover: PathBuf,
    #[arg(long, default_value_t = 2)]
    page: usize,
}

#[derive(Args, Debug)]
struct JoinArgs {
    #[arg(long)]
    complex: PathBuf,
    /// JSON file `{"blocks": [[vertex, ...], ...]}`.
    #[arg(long)]
    partition: PathBuf,
    #[arg(long, default_value_t = 2)]
    maxdim: usize,
}

#[derive(Args, Debug)]
struct CarrierArgs {
    /// Generate the Rips carriers between two point clouds.
    #[arg(long, requires = "points_y", conflicts_with_all = ["source", "carrier"])]
    points_x: Option<PathBuf>,
    #[arg(long)]
    points_y: Option<PathBuf>,
    #[arg(long, requires_all = ["target", "carrier"])]
    source: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    carrier: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    maxdim: usize,
    #[arg(long, default_value_t = 2)]
    field: u32,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    complex: PathBuf,
    /// The coarser cover.
    #[arg(long)]
    cover_u: PathBuf,
    /// The finer cover.
    #[arg(long)]
    cover_v: PathBuf,
    /// Kernel triviality to certify; measured when omitted.
    #[arg(long, requires = "nu")]
    eps: Option<f64>,
    #[arg(long, requires = "eps")]
    nu: Option<f64>,
}

#[derive(Args, Debug)]
struct LocalArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    cover_w: PathBuf,
    #[arg(long)]
    cover_u: PathBuf,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    cover_u: PathBuf,
    #[arg(long)]
    cover_v: PathBuf,
}

#[derive(Args, Debug)]
struct FixtureArgs {
    /// fig4, fig6, fig6_eps(E), fig2_join, seven_simplex_join or vr_circle.
    #[arg(long)]
    name: String,
    #[arg(long)]
    out: PathBuf,
    /// Number of points for vr_circle.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Radial jitter for vr_circle.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| MvssError::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| MvssError::input(format!("{}: {e}", path.display())))
}

fn load_complex(path: &Path) -> Result<FilteredComplex64> {
    io::parse_complex(&read(path)?).map_err(|e| locate(path, e))
}

fn locate(path: &Path, e: MvssError) -> MvssError {
    let at = path.display();
    match e {
        MvssError::Input(m) => MvssError::Input(format!("{at}: {m}")),
        MvssError::Invariant(m) => MvssError::Invariant(format!("{at}: {m}")),
        MvssError::Hypothesis(m) => MvssError::Hypothesis(format!("{at}: {m}")),
    }
}

fn load_cover(path: &Path, k: &FilteredComplex64, warnings: &mut Vec<String>) -> Result<mvss::cover::Cover> {
    let parsed = io::parse_cover(&read(path)?, k).map_err(|e| locate(path, e))?;
    for name in parsed.closed {
        warnings.push(format!("{}: set {name:?} was closed under faces", path.display()));
    }
    Ok(parsed.cover)
}

fn with_warnings(mut v: Value, warnings: Vec<String>) -> Value {
    if !warnings.is_empty() {
        v["warnings"] = json!(warnings);
    }
    v
}

fn ph(a: &PhArgs) -> Result<Value> {
    let k = match (&a.complex, &a.points) {
        (Some(p), _) => load_complex(p)?,
        (None, Some(p)) => {
            let pts: Vec<Vec<f64>> = io::parse_points(&read(p)?).map_err(|e| locate(p, e))?;
            let grid = distance_grid(&[&pts])?;
            build_vietoris_rips(&pts, a.maxdim + 1, FieldSpec::new(a.field)?, grid)?
        }
        (None, None) => return Err(MvssError::input("ph needs --complex or --points")),
    };
    let bars = compute_ph(&k, a.maxdim);
    Ok(json!({
        "schema": io::BARCODES_SCHEMA,
        "barcodes": bars.iter().map(io::barcode_value).collect::<Vec<_>>(),
    }))
}

fn nerve_cmd(a: &CoverArgs) -> Result<Value> {
    let k = load_complex(&a.complex)?;
    let mut warnings = Vec::new();
    let cover = load_cover(&a.cover, &k, &mut warnings)?;
    Ok(with_warnings(io::nerve_value(&nerve(&k, &cover), &cover), warnings))
}

fn blowup_cmd(a: &CoverArgs) -> Result<Value> {
    let k = load_complex(&a.complex)?;
    let mut warnings = Vec::new();
    let cover = load_cover(&a.cover, &k, &mut warnings)?;
    let seq = cover_sequence(&k, &cover)?;
    let top = seq.blowup.complex.max_dim().unwrap_or(0);
    let bars = compute_ph(&seq.blowup.complex, top);
    Ok(with_warnings(
        json!({
            "schema": io::COMPLEX_SCHEMA,
            "complex": io::complex_value(&seq.blowup.complex),
            "barcodes": bars.iter().map(io::barcode_value).collect::<Vec<_>>(),
        }),
        warnings,
    ))
}

fn ss_cmd(a: &SsArgs) -> Result<Value> {
    let k = load_complex(&a.complex)?;
    let mut warnings = Vec::new();
    let cover = load_cover(&a.cover, &k, &mut warnings)?;
    let seq = cover_sequence(&k, &cover)?;
    let r = a.page.max(1).min(seq.ss.last_page());
    let mut v = io::page_value(&seq.ss, r);
    if r != a.page {
        warnings.push(format!("page {} is outside 1..={}; showing page {r}", a.page, seq.ss.last_page()));
    }
    v["stable_page"] = json!(seq.ss.stable_page());
    Ok(with_warnings(v, warnings))
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionDoc {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<String>,
    blocks: Vec<Vec<usize>>,
}

fn join_cmd(a: &JoinArgs) -> Result<Value> {
    let k = load_complex(&a.complex)?;
    let doc: PartitionDoc = serde_json::from_str(&read(&a.partition)?)
        .map_err(|e| MvssError::input(format!("{}: {e}", a.partition.display())))?;
    let d = join_diagram(&k, &doc.blocks)?;
    let b = realization(&d)?;
    let original = compute_ph(&k, a.maxdim);
    let realized = compute_ph(&b.complex, a.maxdim);
    let same = original.iter().zip(&realized).all(|(x, y)| x.same_bars(y));
    Ok(json!({
        "schema": io::BARCODES_SCHEMA,
        "cells": b.complex.len(),
        "complex": original.iter().map(io::barcode_value).collect::<Vec<_>>(),
        "realization": realized.iter().map(io::barcode_value).collect::<Vec<_>>(),
        "same_barcodes": same,
    }))
}

/// Largest shift the carrier actually realizes on its grid.
fn grid_eps(c: &Carrier) -> f64 {
    let g = c.source().grid().values();
    c.targets().iter().enumerate().map(|(t, &s)| g[s.min(g.len() - 1)] - g[t]).fold(0.0, f64::max)
}

fn carrier_cmd(a: &CarrierArgs) -> Result<Value> {
    let field = FieldSpec::new(a.field)?;
    if let (Some(px), Some(py)) = (&a.points_x, &a.points_y) {
        let x: Vec<Vec<f64>> = io::parse_points(&read(px)?).map_err(|e| locate(px, e))?;
        let y: Vec<Vec<f64>> = io::parse_points(&read(py)?).map_err(|e| locate(py, e))?;
        let pack: EquivalencePack = vr_carrier(&x, &y, a.maxdim + 1, field)?;
        let cert = verify_equivalence(&pack, a.maxdim)?;
        return Ok(json!({
            "schema": io::REPORT_SCHEMA,
            "eps": cert.eps,
            "grid_eps": grid_eps(&pack.f).max(grid_eps(&pack.g)),
            "bottleneck": cert.bottleneck,
            "holds": true,
        }));
    }
    let (Some(s), Some(t), Some(c)) = (&a.source, &a.target, &a.carrier) else {
        return Err(MvssError::input("carrier-verify needs --points-x/--points-y or --source/--target/--carrier"));
    };
    let (xs, ys) = (load_complex(s)?, load_complex(t)?);
    let carrier = io::parse_carrier(&read(c)?, &xs, &ys).map_err(|e| locate(c, e))?;
    let acyclic = check_acyclic(&carrier)?;
    let images = synthesize_chain_map(&carrier)?;
    verify_chain_map(&carrier, &images).map_err(MvssError::invariant)?;
    verify_carried(&carrier, &images).map_err(MvssError::invariant)?;
    let images: Vec<Value> = images.images.iter().map(|im| json!(im)).collect();
    Ok(json!({
        "schema": io::REPORT_SCHEMA,
        "eps": carrier.eps(),
        "grid_eps": grid_eps(&carrier),
        "acyclic_through": acyclic.degrees,
        "images": images,
        "holds": true,
    }))
}

fn compare_cmd(a: &CompareArgs) -> Result<Value> {
    let k = load_complex(&a.complex)?;
    let mut warnings = Vec::new();
    let u = load_cover(&a.cover_u, &k, &mut warnings)?;
    let v = load_cover(&a.cover_v, &k, &mut warnings)?;
    let rho = find_refinement(&v, &u)?;
    let cert = inverse_refinement(&k, &u, &v, a.eps.zip(a.nu))?;
    let rho: serde_json::Map<String, Value> =
        (0..v.len()).map(|i| (v.name(i).to_string(), json!(u.name(rho.image(&[i])[0])))).collect();
    let mut out = io::inverse_value(&cert);
    out["schema"] = json!(io::REPORT_SCHEMA);
    out["refinement"] = Value::Object(rho);
    Ok(with_warnings(out, warnings))
}

fn local_cmd(a: &LocalArgs) -> Result<Value> {
    let k = load_complex(&a.complex)?;
    let mut warnings = Vec::new();
    let w = load_cover(&a.cover_w, &k, &mut warnings)?;
    let u = load_cover(&a.cover_u, &k, &mut warnings)?;
    let report = local_checks(&k, &w, &u)?;
    Ok(with_warnings(io::local_report_value(&report), warnings))
}

fn stability_cmd(a: &PairArgs) -> Result<Value> {
    let k = load_complex(&a.complex)?;
    let mut warnings = Vec::new();
    let u = load_cover(&a.cover_u, &k, &mut warnings)?;
    let v = load_cover(&a.cover_v, &k, &mut warnings)?;
    let report = cover_stability(&k, &u, &v)?;
    Ok(with_warnings(io::stability_value(&report), warnings))
}

fn fixtures_cmd(a: &FixtureArgs) -> Result<Value> {
    fs::create_dir_all(&a.out).map_err(|e| MvssError::input(format!("{}: {e}", a.out.display())))?;
    let mut written = Vec::new();
    let mut put = |file: String, text: String| -> Result<()> {
        write(&a.out.join(&file), &text)?;
        written.push(file);
        Ok(())
    };
    if a.name == "vr_circle" {
        if a.n < 3 || !(0.0..1.0).contains(&a.jitter) {
            return Err(MvssError::input("vr_circle needs n >= 3 and jitter in [0, 1)"));
        }
        let pts = mvss::fixtures::vr_circle(a.n, a.jitter, a.seed);
        put("vr_circle.csv".into(), io::emit_points(&pts))?;
    } else {
        let fx = mvss::fixtures::by_name(&a.name)?;
        let stem = if a.name.starts_with("fig6") { "fig6".to_string() } else { a.name.clone() };
        put(format!("{stem}.json"), io::emit_complex(&fx.complex))?;
        for (name, cover) in &fx.covers {
            put(format!("{name}.json"), io::emit_cover(cover))?;
        }
        if let Some(blocks) = &fx.partition {
            put("partition.json".into(), io::to_canonical(&json!({ "schema": "mvss.partition/1", "blocks": blocks })))?;
        }
    }
    Ok(json!({ "fixture": a.name, "written": written }))
}

fn threads(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("MVSS_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| MvssError::input(format!("MVSS_THREADS={s:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<Value> {
    if let Some(n) = threads(cli.threads)? {
        if n == 0 {
            return Err(MvssError::input("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| MvssError::invariant(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Ph(a) => ph(a),
        Command::Nerve(a) => nerve_cmd(a),
        Command::Blowup(a) => blowup_cmd(a),
        Command::Ss(a) => ss_cmd(a),
        Command::Join(a) => join_cmd(a),
        Command::CarrierVerify(a) => carrier_cmd(a),
        Command::CompareRefine(a) => compare_cmd(a),
        Command::LocalChecks(a) => local_cmd(a),
        Command::CoverStability(a) => stability_cmd(a),
        Command::Fixtures(a) => fixtures_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = MvssError::input(e.to_string().trim().to_string());
            emit(&io::to_canonical(&io::error_value(&err)));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(v) => {
            let text = io::to_canonical(&v);
            match &cli.output {
                Some(p) => match write(p, &text) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(&e),
                },
                None => {
                    emit(&text);
                    ExitCode::SUCCESS
                }
            }
        }
        Err(e) => fail(&e),
    }
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn fail(e: &MvssError) -> ExitCode {
    emit(&io::to_canonical(&io::error_value(e)));
    ExitCode::from(e.exit_code() as u8)
}
