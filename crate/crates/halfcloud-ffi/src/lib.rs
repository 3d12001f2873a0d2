//! C ABI over the halfcloud library, for binding from other languages.
//!
//! Conventions:
//!
//! - Clouds live behind the opaque handle [`HcCloud`]; create with
//!   `hc_cloud_new` / `hc_cloud_read`, destroy with `hc_cloud_free`.
//! - Every fallible function returns an [`HcStatus`]; on failure a
//!   human-readable message is retrievable with `hc_last_error_message`
//!   (thread-local, valid until the next failing call on the same thread).
//! - Out-parameters are written only on `HC_STATUS_OK`.
//! - All functions are panic-safe: a Rust panic is caught and surfaced as
//!   `HC_STATUS_PANIC` instead of unwinding across the FFI boundary.
//!
//! The matching header is generated into `include/halfcloud.h` by the build
//! script (cbindgen).

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use libc::{c_char, size_t};
use nalgebra::{Point3, Vector3};

use halfcloud::bounds::{verify_density_bound, verify_distance_bound, OriginTag};
use halfcloud::cloud::{validate_cloud, GridSpec, MergeParams, OrientedPoint, PointCloud, Source};
use halfcloud::io::{read_cloud, write_cloud, FileFormat};
use halfcloud::kdtree::max_nn_distance;
use halfcloud::merge::merge;
use halfcloud::Error;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// File system failure (path in the error message).
    Io = 3,
    /// Malformed input file.
    Parse = 4,
    /// Parameter or precondition violation.
    InvalidArgument = 5,
    /// A cloud failed the oriented-point invariants.
    InvalidCloud = 6,
    /// Index past the end of the cloud.
    IndexOutOfRange = 7,
    /// Internal panic, caught at the boundary.
    Panic = 8,
}

/// Where a cloud's points came from.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcSource {
    Structured = 0,
    Unstructured = 1,
    HalfStructured = 2,
}

impl From<HcSource> for Source {
    fn from(s: HcSource) -> Self {
        match s {
            HcSource::Structured => Source::Structured,
            HcSource::Unstructured => Source::Unstructured,
            HcSource::HalfStructured => Source::HalfStructured,
        }
    }
}

/// On-disk encoding for `hc_cloud_write`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcFormat {
    PlyBinary = 0,
    PlyAscii = 1,
    Xyzn = 2,
}

impl From<HcFormat> for FileFormat {
    fn from(f: HcFormat) -> Self {
        match f {
            HcFormat::PlyBinary => FileFormat::PlyBinaryLittleEndian,
            HcFormat::PlyAscii => FileFormat::PlyAscii,
            HcFormat::Xyzn => FileFormat::XyzText,
        }
    }
}

/// Merge thresholds; see the library documentation for the semantics.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HcMergeParams {
    pub k: size_t,
    pub d_un: f64,
    pub cos_theta_min: f64,
    pub fill_min_support: size_t,
    pub outlier_radius_un: f64,
    pub outlier_radius_struct: f64,
}

/// Merge statistics. `measured_d_half` is NaN when the output has fewer
/// than two points.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HcMergeStats {
    pub n_struct_in: size_t,
    pub n_un_in: size_t,
    pub n_selected_un: size_t,
    pub n_fill_struct: size_t,
    pub n_outliers_un: size_t,
    pub n_outliers_struct: size_t,
    pub measured_d_half: f64,
}

/// A regular grid: `dims` cells of side `spacing` starting at `origin`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HcGrid {
    pub origin: [f64; 3],
    pub spacing: f64,
    pub dims: [u32; 3],
}

/// Condensed outcome of a bound verification.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HcBoundSummary {
    pub holds: bool,
    pub worst_measured: f64,
    pub worst_allowed: f64,
}

/// Opaque point-cloud handle.
pub struct HcCloud {
    inner: PointCloud,
}

impl HcCloud {
    /// Borrows the wrapped cloud of a handle produced by this library.
    pub fn cloud(&self) -> &PointCloud {
        &self.inner
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl AsRef<str>) {
    let sanitized = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes stripped");
    });
}

fn status_of(err: &Error) -> HcStatus {
    match err {
        Error::Io { .. } => HcStatus::Io,
        Error::Parse { .. } | Error::NormalsRequired | Error::NonUnitNormal { .. } => {
            HcStatus::Parse
        }
        Error::InvalidCloud(_) => HcStatus::InvalidCloud,
        _ => HcStatus::InvalidArgument,
    }
}

fn fail(err: &Error) -> HcStatus {
    set_error(err.to_string());
    status_of(err)
}

fn guard(body: impl FnOnce() -> HcStatus) -> HcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            HcStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(ptr: *const c_char) -> Result<&'a Path, HcStatus> {
    if ptr.is_null() {
        set_error("path is null");
        return Err(HcStatus::NullPointer);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(HcStatus::InvalidUtf8)
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last error on this thread. Valid until the next failing
/// call on the same thread; never null.
#[no_mangle]
pub extern "C" fn hc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds a cloud from `count` interleaved records `x y z nx ny nz`.
///
/// # Safety
/// `points` must reference `6 * count` readable doubles (or be null only
/// when `count == 0`); `out` must be a valid destination pointer. The
/// returned handle must be released with [`hc_cloud_free`].
#[no_mangle]
pub unsafe extern "C" fn hc_cloud_new(
    points: *const f64,
    count: size_t,
    source: HcSource,
    out: *mut *mut HcCloud,
) -> HcStatus {
    guard(|| {
        if out.is_null() || (points.is_null() && count > 0) {
            set_error("null pointer argument");
            return HcStatus::NullPointer;
        }
        let mut cloud_points = Vec::with_capacity(count);
        for i in 0..count {
            let rec = std::slice::from_raw_parts(points.add(6 * i), 6);
            cloud_points.push(OrientedPoint::new(
                Point3::new(rec[0], rec[1], rec[2]),
                Vector3::new(rec[3], rec[4], rec[5]),
            ));
        }
        let cloud = PointCloud::new(cloud_points, source.into());
        let report = validate_cloud(&cloud);
        if !report.ok() {
            return fail(&Error::InvalidCloud(report.violations.len()));
        }
        *out = Box::into_raw(Box::new(HcCloud { inner: cloud }));
        HcStatus::Ok
    })
}

/// Reads a cloud from a PLY or XYZN file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid
/// destination pointer. The returned handle must be released with
/// [`hc_cloud_free`].
#[no_mangle]
pub unsafe extern "C" fn hc_cloud_read(
    path: *const c_char,
    source: HcSource,
    out: *mut *mut HcCloud,
) -> HcStatus {
    guard(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return HcStatus::NullPointer;
        }
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match read_cloud(path, source.into()) {
            Ok(cloud) => {
                *out = Box::into_raw(Box::new(HcCloud { inner: cloud }));
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes a cloud to disk in the given format.
///
/// # Safety
/// `cloud` must be a live handle from this library; `path` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hc_cloud_write(
    cloud: *const HcCloud,
    path: *const c_char,
    format: HcFormat,
) -> HcStatus {
    guard(|| {
        let Some(cloud) = cloud.as_ref() else {
            set_error("cloud handle is null");
            return HcStatus::NullPointer;
        };
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match write_cloud(&cloud.inner, path, format.into()) {
            Ok(()) => HcStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Releases a handle returned by this library. Null is a no-op.
///
/// # Safety
/// `cloud` must be a handle from this library that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn hc_cloud_free(cloud: *mut HcCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Number of points; 0 for a null handle.
///
/// # Safety
/// `cloud` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn hc_cloud_len(cloud: *const HcCloud) -> size_t {
    cloud.as_ref().map_or(0, |c| c.inner.len())
}

/// Copies one point's position and normal into the given arrays.
///
/// # Safety
/// `cloud` must be a live handle; `position` and `normal` must each point
/// at three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hc_cloud_point(
    cloud: *const HcCloud,
    index: size_t,
    position: *mut f64,
    normal: *mut f64,
) -> HcStatus {
    guard(|| {
        let Some(cloud) = cloud.as_ref() else {
            set_error("cloud handle is null");
            return HcStatus::NullPointer;
        };
        if position.is_null() || normal.is_null() {
            set_error("output array is null");
            return HcStatus::NullPointer;
        }
        let Some(p) = cloud.inner.points.get(index) else {
            set_error(format!(
                "index {index} out of range for cloud of {} points",
                cloud.inner.len()
            ));
            return HcStatus::IndexOutOfRange;
        };
        for a in 0..3 {
            *position.add(a) = p.position[a];
            *normal.add(a) = p.normal[a];
        }
        HcStatus::Ok
    })
}

/// Grid metadata carried by a structured cloud, if any.
///
/// # Safety
/// `cloud` must be a live handle; `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_cloud_grid(cloud: *const HcCloud, out: *mut HcGrid) -> HcStatus {
    guard(|| {
        let Some(cloud) = cloud.as_ref() else {
            set_error("cloud handle is null");
            return HcStatus::NullPointer;
        };
        if out.is_null() {
            set_error("out pointer is null");
            return HcStatus::NullPointer;
        }
        match &cloud.inner.grid {
            Some(g) => {
                *out = HcGrid {
                    origin: [g.origin.x, g.origin.y, g.origin.z],
                    spacing: g.spacing,
                    dims: g.dims,
                };
                HcStatus::Ok
            }
            None => {
                set_error("cloud carries no grid metadata");
                HcStatus::InvalidArgument
            }
        }
    })
}

/// Maximum over all points of the distance to their nearest other point.
///
/// # Safety
/// `cloud` must be a live handle; `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_max_nn_distance(cloud: *const HcCloud, out: *mut f64) -> HcStatus {
    guard(|| {
        let Some(cloud) = cloud.as_ref() else {
            set_error("cloud handle is null");
            return HcStatus::NullPointer;
        };
        if out.is_null() {
            set_error("out pointer is null");
            return HcStatus::NullPointer;
        }
        match max_nn_distance(&cloud.inner) {
            Ok(d) => {
                *out = d;
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Merges a structured and an unstructured cloud into a half-structured one.
/// `out_stats` may be null when only the cloud is wanted.
///
/// # Safety
/// `p_struct`, `p_un` must be live handles; `params` must point at a valid
/// parameter struct; `out_half` must be a valid destination pointer;
/// `out_stats` must be null or a valid destination pointer. The returned
/// handle must be released with [`hc_cloud_free`].
#[no_mangle]
pub unsafe extern "C" fn hc_merge(
    p_struct: *const HcCloud,
    p_un: *const HcCloud,
    params: *const HcMergeParams,
    out_half: *mut *mut HcCloud,
    out_stats: *mut HcMergeStats,
) -> HcStatus {
    guard(|| {
        let (Some(p_struct), Some(p_un), Some(params)) =
            (p_struct.as_ref(), p_un.as_ref(), params.as_ref())
        else {
            set_error("null pointer argument");
            return HcStatus::NullPointer;
        };
        if out_half.is_null() {
            set_error("out pointer is null");
            return HcStatus::NullPointer;
        }
        let merge_params = MergeParams {
            k: params.k,
            d_un: params.d_un,
            cos_theta_min: params.cos_theta_min,
            fill_min_support: params.fill_min_support,
            outlier_radius_un: params.outlier_radius_un,
            outlier_radius_struct: params.outlier_radius_struct,
        };
        match merge(&p_struct.inner, &p_un.inner, &merge_params) {
            Ok((half, report)) => {
                if let Some(stats) = out_stats.as_mut() {
                    *stats = HcMergeStats {
                        n_struct_in: report.n_struct_in,
                        n_un_in: report.n_un_in,
                        n_selected_un: report.n_selected_un,
                        n_fill_struct: report.n_fill_struct,
                        n_outliers_un: report.outliers_un.len(),
                        n_outliers_struct: report.outliers_struct.len(),
                        measured_d_half: report.measured_d_half.unwrap_or(f64::NAN),
                    };
                }
                *out_half = Box::into_raw(Box::new(HcCloud { inner: half }));
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Checks the three-case nearest-neighbor distance bound.
/// `tags[i]` is 0 for a structured-origin point, 1 for unstructured.
///
/// # Safety
/// `cloud` must be a live handle; `tags` must reference `tag_count` readable
/// bytes; `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_verify_distance_bound(
    cloud: *const HcCloud,
    tags: *const u8,
    tag_count: size_t,
    d_struct: f64,
    d_un: f64,
    out: *mut HcBoundSummary,
) -> HcStatus {
    guard(|| {
        let Some(cloud) = cloud.as_ref() else {
            set_error("cloud handle is null");
            return HcStatus::NullPointer;
        };
        if out.is_null() || (tags.is_null() && tag_count > 0) {
            set_error("null pointer argument");
            return HcStatus::NullPointer;
        }
        let mut origin_tags = Vec::with_capacity(tag_count);
        for i in 0..tag_count {
            origin_tags.push(match *tags.add(i) {
                0 => OriginTag::Struct,
                1 => OriginTag::Un,
                other => {
                    set_error(format!("tag {i} must be 0 (struct) or 1 (un), got {other}"));
                    return HcStatus::InvalidArgument;
                }
            });
        }
        match verify_distance_bound(&cloud.inner, &origin_tags, d_struct, d_un) {
            Ok(report) => {
                let (measured, allowed) = report
                    .worst_case
                    .as_ref()
                    .map_or((f64::NAN, f64::NAN), |w| (w.measured, w.allowed));
                *out = HcBoundSummary {
                    holds: report.holds,
                    worst_measured: measured,
                    worst_allowed: allowed,
                };
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Checks the per-cell and sliding-cube density bounds.
///
/// # Safety
/// `cloud` must be a live handle; `grid` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hc_verify_density_bound(
    cloud: *const HcCloud,
    grid: *const HcGrid,
    k: size_t,
    probe_width: f64,
    out: *mut HcBoundSummary,
) -> HcStatus {
    guard(|| {
        let (Some(cloud), Some(grid)) = (cloud.as_ref(), grid.as_ref()) else {
            set_error("null pointer argument");
            return HcStatus::NullPointer;
        };
        if out.is_null() {
            set_error("out pointer is null");
            return HcStatus::NullPointer;
        }
        if k == 0 || !(probe_width > 0.0) {
            set_error("k must be >= 1 and probe_width > 0");
            return HcStatus::InvalidArgument;
        }
        let spec = match GridSpec::new(
            Point3::new(grid.origin[0], grid.origin[1], grid.origin[2]),
            grid.spacing,
            grid.dims,
        ) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        let report = verify_density_bound(&cloud.inner, &spec, k, probe_width);
        let (measured, allowed) = report
            .worst_case
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |w| (w.measured, w.allowed));
        *out = HcBoundSummary {
            holds: report.holds,
            worst_measured: measured,
            worst_allowed: allowed,
        };
        HcStatus::Ok
    })
}
