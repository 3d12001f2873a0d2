//! Reading and writing oriented point clouds.
//!
//! Two formats are supported:
//!
//! - **PLY**, ascii or binary little-endian, with exactly the six properties
//!   `x y z nx ny nz` (float32 or float64) on an `element vertex N`. Other
//!   property names are rejected rather than guessed. Binary files written by
//!   [`write_cloud`] use float64 and round-trip bit-exactly.
//! - **XYZN** text: one point per line, `x y z nx ny nz` whitespace-separated,
//!   `#` comment lines allowed. Hand-editable, useful for test fixtures.
//!
//! Text output prints 17 significant digits, which is enough for an exact
//! f64 round trip. Readers accept LF or CRLF; writers emit LF.
//!
//! When a structured cloud carries its [`GridSpec`], the writer records it in
//! a PLY `comment halfcloud grid ...` line and the reader restores it, so the
//! grid-derived bounds stay checkable after a file round trip.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::cloud::{validate_cloud, GridSpec, OrientedPoint, PointCloud, Source, NORMAL_UNIT_TOL};
use crate::error::{Error, Result};

/// On-disk encodings understood by [`read_cloud`] / [`write_cloud`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    PlyAscii,
    PlyBinaryLittleEndian,
    XyzText,
}

/// Normals whose length deviates from 1 by more than this are rejected;
/// deviations between [`NORMAL_UNIT_TOL`] and this are silently renormalized
/// (typical for normals that went through a lossy pipeline). Deviations
/// within [`NORMAL_UNIT_TOL`] are kept bit-for-bit so round trips stay exact.
pub const NORMAL_RENORM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
enum PropType {
    F32,
    F64,
}

impl PropType {
    fn size(self) -> usize {
        match self {
            PropType::F32 => 4,
            PropType::F64 => 8,
        }
    }
}

const PROPERTY_NAMES: [&str; 6] = ["x", "y", "z", "nx", "ny", "nz"];
const GRID_COMMENT_PREFIX: &str = "halfcloud grid ";

/// Reads a cloud from `path`, auto-detecting PLY (by its magic line) versus
/// XYZN, and tags it with `expected_source`.
pub fn read_cloud(path: &Path, expected_source: Source) -> Result<PointCloud> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (mut points, grid) = if bytes.starts_with(b"ply\n") || bytes.starts_with(b"ply\r\n") {
        parse_ply(&bytes)?
    } else {
        (parse_xyzn(&bytes)?, None)
    };
    fix_normals(&mut points)?;
    Ok(PointCloud {
        points,
        source: expected_source,
        // Grid metadata only makes sense on a structured cloud.
        grid: grid.filter(|_| expected_source == Source::Structured),
    })
}

/// Writes `cloud` to `path` in the given format.
///
/// The cloud must pass [`validate_cloud`]; reading the file back yields an
/// equal cloud (bit-exact for binary, within 1e-9 for the text formats).
pub fn write_cloud(cloud: &PointCloud, path: &Path, format: FileFormat) -> Result<()> {
    let report = validate_cloud(cloud);
    if !report.ok() {
        return Err(Error::InvalidCloud(report.violations.len()));
    }

    let mut out = Vec::new();
    match format {
        FileFormat::PlyAscii => {
            write_ply_header(&mut out, cloud, "ascii");
            for p in &cloud.points {
                writeln!(
                    out,
                    "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                    p.position.x, p.position.y, p.position.z, p.normal.x, p.normal.y, p.normal.z
                )
                .expect("write to Vec cannot fail");
            }
        }
        FileFormat::PlyBinaryLittleEndian => {
            write_ply_header(&mut out, cloud, "binary_little_endian");
            for p in &cloud.points {
                for v in [
                    p.position.x,
                    p.position.y,
                    p.position.z,
                    p.normal.x,
                    p.normal.y,
                    p.normal.z,
                ] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        FileFormat::XyzText => {
            for p in &cloud.points {
                writeln!(
                    out,
                    "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                    p.position.x, p.position.y, p.position.z, p.normal.x, p.normal.y, p.normal.z
                )
                .expect("write to Vec cannot fail");
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_ply_header(out: &mut Vec<u8>, cloud: &PointCloud, format: &str) {
    writeln!(out, "ply").unwrap();
    writeln!(out, "format {format} 1.0").unwrap();
    if let Some(g) = &cloud.grid {
        // f64 Display round-trips exactly, so the grid survives the file.
        writeln!(
            out,
            "comment {GRID_COMMENT_PREFIX}{} {} {} {} {} {} {}",
            g.origin.x, g.origin.y, g.origin.z, g.spacing, g.dims[0], g.dims[1], g.dims[2]
        )
        .unwrap();
    }
    writeln!(out, "element vertex {}", cloud.len()).unwrap();
    for name in PROPERTY_NAMES {
        writeln!(out, "property double {name}").unwrap();
    }
    writeln!(out, "end_header").unwrap();
}

/// Applies the normal policy: keep exact unit normals untouched, renormalize
/// small deviations, reject anything farther than [`NORMAL_RENORM_TOL`].
fn fix_normals(points: &mut [OrientedPoint]) -> Result<()> {
    for (index, p) in points.iter_mut().enumerate() {
        let norm = p.normal.norm();
        let dev = (norm - 1.0).abs();
        if dev <= NORMAL_UNIT_TOL {
            continue;
        }
        if !norm.is_finite() || dev > NORMAL_RENORM_TOL {
            return Err(Error::NonUnitNormal { index, norm });
        }
        p.normal /= norm;
    }
    Ok(())
}

struct PlyHeader {
    binary: bool,
    vertex_count: usize,
    prop_types: Vec<PropType>,
    grid: Option<GridSpec>,
    /// Byte offset of the first payload byte.
    payload_start: usize,
    /// 1-based line number right after `end_header`.
    payload_line: usize,
}

fn parse_ply(bytes: &[u8]) -> Result<(Vec<OrientedPoint>, Option<GridSpec>)> {
    let header = parse_ply_header(bytes)?;
    let points = if header.binary {
        parse_ply_binary_payload(bytes, &header)?
    } else {
        parse_ply_ascii_payload(bytes, &header)?
    };
    Ok((points, header.grid))
}

fn parse_ply_header(bytes: &[u8]) -> Result<PlyHeader> {
    let mut binary = None;
    let mut vertex_count = None;
    let mut prop_names: Vec<String> = Vec::new();
    let mut prop_types: Vec<PropType> = Vec::new();
    let mut grid = None;
    let mut saw_vertex_element = false;

    let mut offset = 0usize;
    let mut line_no = 0usize;
    while offset < bytes.len() {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| offset + i)
            .unwrap_or(bytes.len());
        let next_offset = (end + 1).min(bytes.len() + 1);
        line_no += 1;
        let raw = &bytes[offset..end];
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw)
            .map_err(|_| Error::parse(format!("line {line_no}"), "header is not UTF-8"))?;
        let loc = || format!("line {line_no}");
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap_or("");

        match (line_no, keyword) {
            (1, "ply") => {}
            (1, _) => return Err(Error::parse(loc(), "missing 'ply' magic")),
            (_, "format") => {
                let kind = tokens.next().unwrap_or("");
                let version = tokens.next().unwrap_or("");
                if version != "1.0" {
                    return Err(Error::parse(loc(), format!("unsupported version '{version}'")));
                }
                binary = Some(match kind {
                    "ascii" => false,
                    "binary_little_endian" => true,
                    other => {
                        return Err(Error::parse(
                            loc(),
                            format!("unsupported format '{other}' (ascii and binary_little_endian only)"),
                        ))
                    }
                });
            }
            (_, "comment") => {
                let body = line.trim_start_matches("comment").trim_start();
                if let Some(rest) = body.strip_prefix(GRID_COMMENT_PREFIX) {
                    grid = Some(parse_grid_comment(rest, line_no)?);
                }
            }
            (_, "element") => {
                let name = tokens.next().unwrap_or("");
                if name != "vertex" || saw_vertex_element {
                    return Err(Error::parse(loc(), format!("unsupported element '{name}'")));
                }
                saw_vertex_element = true;
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(loc(), "bad vertex count"))?;
                vertex_count = Some(count);
            }
            (_, "property") => {
                if !saw_vertex_element {
                    return Err(Error::parse(loc(), "property before element vertex"));
                }
                let type_name = tokens.next().unwrap_or("");
                let prop_type = match type_name {
                    "float" | "float32" => PropType::F32,
                    "double" | "float64" => PropType::F64,
                    other => {
                        return Err(Error::parse(
                            loc(),
                            format!("unsupported property type '{other}'"),
                        ))
                    }
                };
                let name = tokens.next().unwrap_or("");
                prop_names.push(name.to_string());
                prop_types.push(prop_type);
            }
            (_, "end_header") => {
                let binary = binary
                    .ok_or_else(|| Error::parse(loc(), "missing 'format' line"))?;
                let vertex_count = vertex_count
                    .ok_or_else(|| Error::parse(loc(), "missing 'element vertex' line"))?;
                if prop_names.len() < 6 {
                    // x y z alone (or fewer) is an unoriented cloud.
                    if prop_names.iter().all(|n| ["x", "y", "z"].contains(&n.as_str())) {
                        return Err(Error::NormalsRequired);
                    }
                }
                if prop_names != PROPERTY_NAMES {
                    return Err(Error::parse(
                        loc(),
                        format!("expected properties x y z nx ny nz, got {prop_names:?}"),
                    ));
                }
                return Ok(PlyHeader {
                    binary,
                    vertex_count,
                    prop_types,
                    grid,
                    payload_start: next_offset.min(bytes.len()),
                    payload_line: line_no + 1,
                });
            }
            (_, "") => {}
            (_, other) => {
                return Err(Error::parse(loc(), format!("unknown header keyword '{other}'")))
            }
        }
        offset = next_offset;
        if offset > bytes.len() {
            break;
        }
    }
    Err(Error::parse("end of file", "header not terminated by end_header"))
}

fn parse_grid_comment(rest: &str, line_no: usize) -> Result<GridSpec> {
    let fields: Vec<&str> = rest.split_whitespace().collect();
    let err = || Error::parse(format!("line {line_no}"), "malformed grid comment");
    if fields.len() != 7 {
        return Err(err());
    }
    let f = |i: usize| fields[i].parse::<f64>().map_err(|_| err());
    let d = |i: usize| fields[i].parse::<u32>().map_err(|_| err());
    GridSpec::new(
        Point3::new(f(0)?, f(1)?, f(2)?),
        f(3)?,
        [d(4)?, d(5)?, d(6)?],
    )
    .map_err(|_| err())
}

fn parse_ply_ascii_payload(bytes: &[u8], header: &PlyHeader) -> Result<Vec<OrientedPoint>> {
    let text = std::str::from_utf8(&bytes[header.payload_start..]).map_err(|_| {
        Error::parse(
            format!("line {}", header.payload_line),
            "ascii payload is not UTF-8",
        )
    })?;
    let mut points = Vec::with_capacity(header.vertex_count);
    let mut lines = text.lines();
    let mut line_no = header.payload_line - 1;
    while points.len() < header.vertex_count {
        let line = loop {
            line_no += 1;
            match lines.next() {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => break l,
                None => {
                    return Err(Error::parse(
                        "end of file",
                        format!(
                            "header promised {} vertices, found {}",
                            header.vertex_count,
                            points.len()
                        ),
                    ))
                }
            }
        };
        points.push(parse_record(line, line_no)?);
    }
    for l in lines {
        line_no += 1;
        if !l.trim().is_empty() {
            return Err(Error::parse(
                format!("line {line_no}"),
                format!("trailing data after {} promised vertices", header.vertex_count),
            ));
        }
    }
    Ok(points)
}

fn parse_ply_binary_payload(bytes: &[u8], header: &PlyHeader) -> Result<Vec<OrientedPoint>> {
    let record_size: usize = header.prop_types.iter().map(|t| t.size()).sum();
    let payload = &bytes[header.payload_start..];
    let expected = record_size * header.vertex_count;
    if payload.len() != expected {
        return Err(Error::parse(
            format!("byte {}", header.payload_start + payload.len().min(expected)),
            format!(
                "payload holds {} bytes but header promises {} vertices ({} bytes)",
                payload.len(),
                header.vertex_count,
                expected
            ),
        ));
    }
    let mut points = Vec::with_capacity(header.vertex_count);
    let mut cursor = 0usize;
    for _ in 0..header.vertex_count {
        let mut values = [0.0f64; 6];
        for (slot, prop_type) in values.iter_mut().zip(&header.prop_types) {
            *slot = match prop_type {
                PropType::F32 => {
                    let v = f32::from_le_bytes(payload[cursor..cursor + 4].try_into().unwrap());
                    cursor += 4;
                    f64::from(v)
                }
                PropType::F64 => {
                    let v = f64::from_le_bytes(payload[cursor..cursor + 8].try_into().unwrap());
                    cursor += 8;
                    v
                }
            };
        }
        points.push(OrientedPoint::new(
            Point3::new(values[0], values[1], values[2]),
            Vector3::new(values[3], values[4], values[5]),
        ));
    }
    Ok(points)
}

fn parse_xyzn(bytes: &[u8]) -> Result<Vec<OrientedPoint>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::parse("line 1", "file is not UTF-8 (and lacks a PLY magic line)"))?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        points.push(parse_record(trimmed, line_no)?);
    }
    Ok(points)
}

fn parse_record(line: &str, line_no: usize) -> Result<OrientedPoint> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() == 3 {
        return Err(Error::NormalsRequired);
    }
    if fields.len() != 6 {
        return Err(Error::parse(
            format!("line {line_no}"),
            format!("expected 6 fields, got {}", fields.len()),
        ));
    }
    let mut values = [0.0f64; 6];
    for (slot, field) in values.iter_mut().zip(&fields) {
        *slot = field.parse().map_err(|_| {
            Error::parse(format!("line {line_no}"), format!("bad number '{field}'"))
        })?;
    }
    Ok(OrientedPoint::new(
        Point3::new(values[0], values[1], values[2]),
        Vector3::new(values[3], values[4], values[5]),
    ))
}
