//! Batch front end: synthetic scenario generation, merging, bound
//! verification and cloud statistics, each as one reproducible run.
//!
//! Every command writes a `<output>.manifest.json` capturing the resolved
//! parameters, input/output digests and seed -- and nothing volatile -- so
//! rerunning a command with the same inputs produces bit-identical
//! artifacts, manifest included.
//!
//! Exit codes: 0 success, 1 a verified bound is violated, 2 usage or input
//! error. `HALFCLOUD_THREADS` caps internal parallelism.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Point3;
use serde::Serialize;
use sha2::{Digest, Sha256};

use halfcloud::bounds::{verify_density_bound, verify_distance_bound, BoundReport, OriginTag};
use halfcloud::cloud::{bounding_box, GridSpec, MergeParams, Source};
use halfcloud::io::{read_cloud, write_cloud, FileFormat};
use halfcloud::kdtree::max_nn_distance;
use halfcloud::merge::merge;
use halfcloud::synth::parse_scenario;

#[derive(Parser)]
#[command(
    name = "halfcloud",
    version,
    about = "Merge structured and unstructured oriented point clouds and check the merged cloud's distance and density bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CloudFormat {
    PlyBinary,
    PlyAscii,
    Xyzn,
}

impl From<CloudFormat> for FileFormat {
    fn from(f: CloudFormat) -> Self {
        match f {
            CloudFormat::PlyBinary => FileFormat::PlyBinaryLittleEndian,
            CloudFormat::PlyAscii => FileFormat::PlyAscii,
            CloudFormat::Xyzn => FileFormat::XyzText,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a structured/unstructured cloud pair from a scenario config.
    Synth {
        /// Scenario config file (flat key = value lines).
        config: PathBuf,
        /// Output path for the structured (grid-derived) cloud.
        out_struct: PathBuf,
        /// Output path for the unstructured (scan-derived) cloud.
        out_un: PathBuf,
        #[arg(long, value_enum, default_value = "ply-binary")]
        format: CloudFormat,
    },
    /// Merge a structured and an unstructured cloud into a half-structured one.
    Merge {
        /// Structured input cloud.
        struct_path: PathBuf,
        /// Unstructured input cloud.
        un_path: PathBuf,
        /// Output path for the half-structured cloud.
        out: PathBuf,
        /// Neighbors per anchor.
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// Max anchor-to-candidate distance [default: 2h from grid metadata].
        #[arg(long)]
        d_un: Option<f64>,
        /// Minimum normal alignment (cosine).
        #[arg(long, default_value_t = 0.8)]
        cos_theta_min: f64,
        /// Anchors with fewer accepted candidates are retained as fill.
        #[arg(long, default_value_t = 1)]
        fill_min_support: usize,
        /// Unstructured outlier radius [default: the resolved d-un].
        #[arg(long)]
        outlier_radius_un: Option<f64>,
        /// Structured outlier distance bound [default: h*sqrt(3) from grid metadata].
        #[arg(long)]
        d_struct_bound: Option<f64>,
        /// Merge report path [default: <out>.report.json].
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write per-point origin tags here (for `verify --tags`).
        #[arg(long)]
        tags: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "ply-binary")]
        format: CloudFormat,
    },
    /// Check the distance and/or density bounds of a cloud.
    Verify {
        /// Cloud to verify.
        cloud: PathBuf,
        /// Per-point origin tags ("struct"/"un", one per line); enables the
        /// nearest-neighbor distance bound and requires --d-struct/--d-un.
        #[arg(long)]
        tags: Option<PathBuf>,
        /// Maximal nearest-neighbor distance of the structured input.
        #[arg(long)]
        d_struct: Option<f64>,
        /// Selection radius the merge used.
        #[arg(long)]
        d_un: Option<f64>,
        /// Grid as "ox,oy,oz,h,nx,ny,nz"; enables the density bounds and
        /// requires --k.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Neighbors per anchor the merge used.
        #[arg(long)]
        k: Option<usize>,
        /// Sliding-cube width; repeatable [default: h, 2h, 5h].
        #[arg(long = "probe-width")]
        probe_widths: Vec<f64>,
    },
    /// Print point count, bounding box and nearest-neighbor statistics.
    Stats {
        /// Cloud to inspect.
        cloud: PathBuf,
    },
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

/// What the run did, without anything volatile: rerunning with the same
/// inputs reproduces this file byte for byte.
#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    parameters: serde_json::Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl Manifest {
    fn write(&self, first_output: &Path) -> Result<PathBuf> {
        let path = manifest_path(first_output);
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, json + "\n")
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(path)
    }
}

fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn digest(path: &Path) -> Result<FileDigest> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {} for digest", path.display()))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn main() -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("halfcloud: {e}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("halfcloud: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("HALFCLOUD_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| anyhow!("HALFCLOUD_THREADS must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("installing thread pool")?;
    Ok(())
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Synth {
            config,
            out_struct,
            out_un,
            format,
        } => cmd_synth(&config, &out_struct, &out_un, format),
        Command::Merge {
            struct_path,
            un_path,
            out,
            k,
            d_un,
            cos_theta_min,
            fill_min_support,
            outlier_radius_un,
            d_struct_bound,
            report,
            tags,
            format,
        } => cmd_merge(MergeArgs {
            struct_path,
            un_path,
            out,
            k,
            d_un,
            cos_theta_min,
            fill_min_support,
            outlier_radius_un,
            d_struct_bound,
            report,
            tags,
            format,
        }),
        Command::Verify {
            cloud,
            tags,
            d_struct,
            d_un,
            grid,
            k,
            probe_widths,
        } => cmd_verify(&cloud, tags.as_deref(), d_struct, d_un, grid, k, &probe_widths),
        Command::Stats { cloud } => cmd_stats(&cloud),
    }
}

fn cmd_synth(
    config_path: &Path,
    out_struct: &Path,
    out_un: &Path,
    format: CloudFormat,
) -> Result<ExitCode> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let scenario =
        parse_scenario(&text).with_context(|| format!("config {}", config_path.display()))?;
    let clouds = scenario.run()?;

    write_cloud(&clouds.structured, out_struct, format.into())?;
    write_cloud(&clouds.unstructured, out_un, format.into())?;

    let grid = clouds.grid;
    let parameters = serde_json::json!({
        "shape": scenario.shape,
        "grid": grid_string(&grid),
        "views": scenario.views.iter().map(|v| [v.x, v.y, v.z]).collect::<Vec<_>>(),
        "samples": scenario.samples,
        "seed": scenario.seed,
        "outliers_count": scenario.outliers_count,
        "outliers_spread": scenario.outliers_spread,
        "n_struct": clouds.structured.len(),
        "n_un": clouds.unstructured.len(),
        "outlier_truth": clouds.outlier_truth,
        "format": format!("{format:?}"),
    });
    Manifest {
        tool: "halfcloud",
        version: env!("CARGO_PKG_VERSION"),
        command: "synth",
        parameters,
        inputs: vec![digest(config_path)?],
        outputs: vec![digest(out_struct)?, digest(out_un)?],
    }
    .write(out_struct)?;
    Ok(ExitCode::SUCCESS)
}

struct MergeArgs {
    struct_path: PathBuf,
    un_path: PathBuf,
    out: PathBuf,
    k: usize,
    d_un: Option<f64>,
    cos_theta_min: f64,
    fill_min_support: usize,
    outlier_radius_un: Option<f64>,
    d_struct_bound: Option<f64>,
    report: Option<PathBuf>,
    tags: Option<PathBuf>,
    format: CloudFormat,
}

fn cmd_merge(args: MergeArgs) -> Result<ExitCode> {
    let p_struct = read_cloud(&args.struct_path, Source::Structured)
        .with_context(|| format!("reading {}", args.struct_path.display()))?;
    let p_un = read_cloud(&args.un_path, Source::Unstructured)
        .with_context(|| format!("reading {}", args.un_path.display()))?;

    let spacing = p_struct.grid.map(|g| g.spacing);
    let resolve = |flag: Option<f64>, default: Option<f64>, name: &str| -> Result<f64> {
        flag.or(default).ok_or_else(|| {
            anyhow!("--{name} is required when the structured input carries no grid metadata")
        })
    };
    let d_un = resolve(args.d_un, spacing.map(|h| 2.0 * h), "d-un")?;
    let d_struct_bound = resolve(
        args.d_struct_bound,
        spacing.map(|h| h * 3.0f64.sqrt()),
        "d-struct-bound",
    )?;
    let params = MergeParams {
        k: args.k,
        d_un,
        cos_theta_min: args.cos_theta_min,
        fill_min_support: args.fill_min_support,
        outlier_radius_un: args.outlier_radius_un.unwrap_or(d_un),
        outlier_radius_struct: d_struct_bound,
    };

    let (half, report) = merge(&p_struct, &p_un, &params)?;
    write_cloud(&half, &args.out, args.format.into())?;

    let report_path = args.report.unwrap_or_else(|| {
        let mut name = args.out.file_name().unwrap_or_default().to_os_string();
        name.push(".report.json");
        args.out.with_file_name(name)
    });
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&report_path, report_json + "\n")
        .with_context(|| format!("writing report {}", report_path.display()))?;

    let mut outputs = vec![digest(&args.out)?, digest(&report_path)?];
    if let Some(tags_path) = &args.tags {
        let mut tags = String::new();
        for _ in 0..report.n_selected_un {
            tags.push_str("un\n");
        }
        for _ in 0..report.n_fill_struct {
            tags.push_str("struct\n");
        }
        std::fs::write(tags_path, tags)
            .with_context(|| format!("writing tags {}", tags_path.display()))?;
        outputs.push(digest(tags_path)?);
    }

    let parameters = serde_json::json!({
        "k": params.k,
        "d_un": params.d_un,
        "cos_theta_min": params.cos_theta_min,
        "fill_min_support": params.fill_min_support,
        "outlier_radius_un": params.outlier_radius_un,
        "d_struct_bound": params.outlier_radius_struct,
        "format": format!("{:?}", args.format),
    });
    Manifest {
        tool: "halfcloud",
        version: env!("CARGO_PKG_VERSION"),
        command: "merge",
        parameters,
        inputs: vec![digest(&args.struct_path)?, digest(&args.un_path)?],
        outputs,
    }
    .write(&args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    cloud_path: &Path,
    tags_path: Option<&Path>,
    d_struct: Option<f64>,
    d_un: Option<f64>,
    grid_arg: Option<String>,
    k: Option<usize>,
    probe_widths: &[f64],
) -> Result<ExitCode> {
    let cloud = read_cloud(cloud_path, Source::HalfStructured)
        .with_context(|| format!("reading {}", cloud_path.display()))?;

    let mut reports: Vec<BoundReport> = Vec::new();

    if let Some(tags_path) = tags_path {
        let d_struct =
            d_struct.ok_or_else(|| anyhow!("--d-struct is required together with --tags"))?;
        let d_un = d_un.ok_or_else(|| anyhow!("--d-un is required together with --tags"))?;
        let tags = read_tags(tags_path)?;
        reports.push(verify_distance_bound(&cloud, &tags, d_struct, d_un)?);
    }

    if let Some(grid_arg) = &grid_arg {
        let grid = parse_grid_string(grid_arg)?;
        let k = k.ok_or_else(|| anyhow!("--k is required together with --grid"))?;
        let widths: Vec<f64> = if probe_widths.is_empty() {
            [1.0, 2.0, 5.0].iter().map(|m| m * grid.spacing).collect()
        } else {
            probe_widths.to_vec()
        };
        for w in widths {
            if !(w > 0.0) {
                bail!("--probe-width must be > 0, got {w}");
            }
            reports.push(verify_density_bound(&cloud, &grid, k, w));
        }
    }

    if reports.is_empty() {
        bail!("nothing to verify: pass --tags (distance bound) and/or --grid (density bounds)");
    }

    let holds = reports.iter().all(|r| r.holds);
    let out = serde_json::json!({ "holds": holds, "reports": reports });
    println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
    Ok(if holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_stats(cloud_path: &Path) -> Result<ExitCode> {
    let cloud = read_cloud(cloud_path, Source::Unstructured)
        .with_context(|| format!("reading {}", cloud_path.display()))?;
    let bbox = bounding_box(&cloud).ok();
    let nn = if cloud.len() >= 2 {
        Some(max_nn_distance(&cloud)?)
    } else {
        None
    };
    let stats = serde_json::json!({
        "count": cloud.len(),
        "bbox_min": bbox.map(|(lo, _)| [lo.x, lo.y, lo.z]),
        "bbox_max": bbox.map(|(_, hi)| [hi.x, hi.y, hi.z]),
        "extent": bbox.map(|(lo, hi)| { let e = hi - lo; [e.x, e.y, e.z] }),
        "max_nn_distance": nn,
    });
    println!("{}", serde_json::to_string_pretty(&stats).expect("stats serialize"));
    Ok(ExitCode::SUCCESS)
}

fn read_tags(path: &Path) -> Result<Vec<OriginTag>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading tags {}", path.display()))?;
    let mut tags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        tags.push(match line {
            "struct" => OriginTag::Struct,
            "un" => OriginTag::Un,
            other => bail!(
                "{}: line {}: expected 'struct' or 'un', got '{other}'",
                path.display(),
                i + 1
            ),
        });
    }
    Ok(tags)
}

fn grid_string(grid: &GridSpec) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        grid.origin.x, grid.origin.y, grid.origin.z, grid.spacing, grid.dims[0], grid.dims[1], grid.dims[2]
    )
}

fn parse_grid_string(s: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 7 {
        bail!("--grid expects \"ox,oy,oz,h,nx,ny,nz\", got '{s}'");
    }
    let num = |i: usize| -> Result<f64> {
        parts[i]
            .parse()
            .map_err(|_| anyhow!("--grid: bad number '{}'", parts[i]))
    };
    let dim = |i: usize| -> Result<u32> {
        parts[i]
            .parse()
            .map_err(|_| anyhow!("--grid: bad cell count '{}'", parts[i]))
    };
    Ok(GridSpec::new(
        Point3::new(num(0)?, num(1)?, num(2)?),
        num(3)?,
        [dim(4)?, dim(5)?, dim(6)?],
    )?)
}
