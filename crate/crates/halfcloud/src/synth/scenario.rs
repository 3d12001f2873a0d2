//! Flat key-value scenario configs: one file describes a full synthetic run
//! (shape, grid, views, sample count, seed, optional outlier injection).
//!
//! Syntax: `key = value` per line, `#` comments, blank lines ignored.
//! Recognized keys:
//!
//! ```text
//! shape            = sphere | box | slotted_box | undercut_slot | multi_chamber_crack
//! grid.h           = 0.1            # grid spacing (required)
//! grid.origin      = -1.3,-1.3,-1.3 # default: shape domain minimum
//! grid.dims        = 26,26,26       # default: cover the shape domain
//! views            = 0,0,-1; 1,0,0  # default: 0,0,-1
//! samples          = 20000          # unstructured target count (required)
//! seed             = 7              # required
//! outliers.count   = 0              # default 0
//! outliers.spread  = 1.0            # default 1.0
//! ```
//!
//! `shape`, `grid.h`, `samples` and `seed` are required; every parse error is
//! anchored to its line.

use nalgebra::{Point3, Vector3};

use super::{builtin_shape, inject_outliers, sample_structured, sample_unstructured};
use super::{ImplicitSurface, ScanConfig};
use crate::cloud::{GridSpec, PointCloud};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub shape: String,
    pub grid_h: f64,
    pub grid_origin: Option<Point3<f64>>,
    pub grid_dims: Option<[u32; 3]>,
    pub views: Vec<Vector3<f64>>,
    pub samples: usize,
    pub seed: u64,
    pub outliers_count: usize,
    pub outliers_spread: f64,
}

/// Everything a scenario run produces, including the surface itself so
/// callers can query the visibility oracle against the same ground truth.
#[derive(Debug)]
pub struct ScenarioClouds {
    pub surface: ImplicitSurface,
    pub grid: GridSpec,
    pub structured: PointCloud,
    pub unstructured: PointCloud,
    /// Indices of injected outliers within `unstructured`.
    pub outlier_truth: Vec<usize>,
}

/// Parses a scenario config. Unknown keys, duplicate keys, malformed values
/// and unknown shapes are all reported with their line number.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut shape: Option<String> = None;
    let mut grid_h = None;
    let mut grid_origin = None;
    let mut grid_dims = None;
    let mut views: Option<Vec<Vector3<f64>>> = None;
    let mut samples = None;
    let mut seed = None;
    let mut outliers_count = None;
    let mut outliers_spread = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let loc = || format!("line {line_no}");
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(loc(), "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();

        fn set<T>(slot: &mut Option<T>, value: T, key: &str, loc: String) -> Result<()> {
            if slot.is_some() {
                return Err(Error::parse(loc, format!("duplicate key '{key}'")));
            }
            *slot = Some(value);
            Ok(())
        }

        match key {
            "shape" => {
                if builtin_shape(value).is_none() {
                    return Err(Error::parse(loc(), format!("unknown shape '{value}'")));
                }
                set(&mut shape, value.to_string(), key, loc())?;
            }
            "grid.h" => set(&mut grid_h, parse_number(value, key, line_no)?, key, loc())?,
            "grid.origin" => {
                let [x, y, z] = parse_triple(value, key, line_no)?;
                set(&mut grid_origin, Point3::new(x, y, z), key, loc())?;
            }
            "grid.dims" => {
                let [x, y, z] = parse_triple(value, key, line_no)?;
                let as_dim = |v: f64| -> Result<u32> {
                    if v.fract() == 0.0 && v >= 1.0 && v <= f64::from(u32::MAX) {
                        Ok(v as u32)
                    } else {
                        Err(Error::parse(
                            format!("line {line_no}"),
                            format!("grid.dims entries must be positive integers, got {v}"),
                        ))
                    }
                };
                set(&mut grid_dims, [as_dim(x)?, as_dim(y)?, as_dim(z)?], key, loc())?;
            }
            "views" => {
                let mut parsed = Vec::new();
                for part in value.split(';') {
                    let [x, y, z] = parse_triple(part.trim(), key, line_no)?;
                    let v = Vector3::new(x, y, z);
                    if v.norm() < 1e-12 {
                        return Err(Error::parse(loc(), "view direction must be non-zero"));
                    }
                    parsed.push(v.normalize());
                }
                set(&mut views, parsed, key, loc())?;
            }
            "samples" => set(&mut samples, parse_integer(value, key, line_no)?, key, loc())?,
            "seed" => set(&mut seed, parse_integer(value, key, line_no)?, key, loc())?,
            "outliers.count" => set(
                &mut outliers_count,
                parse_integer(value, key, line_no)? as usize,
                key,
                loc(),
            )?,
            "outliers.spread" => set(
                &mut outliers_spread,
                parse_number(value, key, line_no)?,
                key,
                loc(),
            )?,
            other => return Err(Error::parse(loc(), format!("unknown key '{other}'"))),
        }
    }

    let require = |name: &str| Error::parse("end of file", format!("missing required key '{name}'"));
    Ok(Scenario {
        shape: shape.ok_or_else(|| require("shape"))?,
        grid_h: grid_h.ok_or_else(|| require("grid.h"))?,
        grid_origin,
        grid_dims,
        views: views.unwrap_or_else(|| vec![Vector3::new(0.0, 0.0, -1.0)]),
        samples: samples.ok_or_else(|| require("samples"))? as usize,
        seed: seed.ok_or_else(|| require("seed"))?,
        outliers_count: outliers_count.unwrap_or(0),
        outliers_spread: outliers_spread.unwrap_or(1.0),
    })
}

fn parse_number(value: &str, key: &str, line_no: usize) -> Result<f64> {
    value.parse().map_err(|_| {
        Error::parse(
            format!("line {line_no}"),
            format!("bad number '{value}' for key '{key}'"),
        )
    })
}

fn parse_integer(value: &str, key: &str, line_no: usize) -> Result<u64> {
    value.parse().map_err(|_| {
        Error::parse(
            format!("line {line_no}"),
            format!("bad integer '{value}' for key '{key}'"),
        )
    })
}

fn parse_triple(value: &str, key: &str, line_no: usize) -> Result<[f64; 3]> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::parse(
            format!("line {line_no}"),
            format!("key '{key}' expects three comma-separated values"),
        ));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse_number(part, key, line_no)?;
    }
    Ok(out)
}

impl Scenario {
    /// The grid this scenario samples on: explicit origin/dims when given,
    /// otherwise the shape's domain covered by cells of side `grid.h`.
    pub fn grid(&self, surface: &ImplicitSurface) -> Result<GridSpec> {
        let origin = self.grid_origin.unwrap_or(surface.domain_min);
        let dims = match self.grid_dims {
            Some(d) => d,
            None => {
                let mut d = [1u32; 3];
                for axis in 0..3 {
                    let span = surface.domain_max[axis] - origin[axis];
                    d[axis] = ((span / self.grid_h).ceil() as u32).max(1);
                }
                d
            }
        };
        GridSpec::new(origin, self.grid_h, dims)
    }

    /// Runs the full scenario: structured sampling, unstructured scan, then
    /// outlier injection (seeded with `seed + 1` so the scan stream is
    /// untouched).
    pub fn run(&self) -> Result<ScenarioClouds> {
        let surface = builtin_shape(&self.shape).ok_or_else(|| Error::InvalidParameter {
            name: "shape",
            reason: format!("unknown shape '{}'", self.shape),
        })?;
        let grid = self.grid(&surface)?;
        let structured = sample_structured(&surface, &grid);
        let config = ScanConfig {
            surface: &surface,
            view_directions: self.views.clone(),
            samples: self.samples,
            seed: self.seed,
        };
        let unstructured = sample_unstructured(&config)?;
        let (unstructured, outlier_truth) = if self.outliers_count > 0 {
            inject_outliers(
                &unstructured,
                self.outliers_count,
                self.outliers_spread,
                self.seed.wrapping_add(1),
            )?
        } else {
            (unstructured, Vec::new())
        };
        Ok(ScenarioClouds {
            surface,
            grid,
            structured,
            unstructured,
            outlier_truth,
        })
    }
}
