//! Exercises the C ABI from the Rust side: handle lifecycle, status codes,
//! and agreement with direct library calls.

use std::ffi::{CStr, CString};
use std::ptr;

use halfcloud_ffi::*;

fn record(p: [f64; 3], n: [f64; 3]) -> [f64; 6] {
    [p[0], p[1], p[2], n[0], n[1], n[2]]
}

fn flat(records: &[[f64; 6]]) -> Vec<f64> {
    records.iter().flatten().copied().collect()
}

unsafe fn make_cloud(records: &[[f64; 6]], source: HcSource) -> *mut HcCloud {
    let data = flat(records);
    let mut handle: *mut HcCloud = ptr::null_mut();
    let status = hc_cloud_new(data.as_ptr(), records.len(), source, &mut handle);
    assert_eq!(status, HcStatus::Ok);
    handle
}

fn grid_line(n: usize, spacing: f64) -> Vec<[f64; 6]> {
    (0..n)
        .map(|i| record([i as f64 * spacing, 0.0, 0.0], [0.0, 0.0, 1.0]))
        .collect()
}

#[test]
fn create_inspect_free() {
    unsafe {
        let cloud = make_cloud(
            &[record([1.0, 2.0, 3.0], [0.0, 1.0, 0.0])],
            HcSource::Unstructured,
        );
        assert_eq!(hc_cloud_len(cloud), 1);
        let mut pos = [0.0; 3];
        let mut nrm = [0.0; 3];
        assert_eq!(
            hc_cloud_point(cloud, 0, pos.as_mut_ptr(), nrm.as_mut_ptr()),
            HcStatus::Ok
        );
        assert_eq!(pos, [1.0, 2.0, 3.0]);
        assert_eq!(nrm, [0.0, 1.0, 0.0]);
        assert_eq!(
            hc_cloud_point(cloud, 1, pos.as_mut_ptr(), nrm.as_mut_ptr()),
            HcStatus::IndexOutOfRange
        );
        hc_cloud_free(cloud);
    }
}

#[test]
fn invalid_cloud_is_rejected_with_message() {
    unsafe {
        let data = flat(&[record([0.0; 3], [0.0; 3])]);
        let mut handle: *mut HcCloud = ptr::null_mut();
        let status = hc_cloud_new(data.as_ptr(), 1, HcSource::Unstructured, &mut handle);
        assert_eq!(status, HcStatus::InvalidCloud);
        let msg = CStr::from_ptr(hc_last_error_message()).to_string_lossy();
        assert!(msg.contains("violate"), "{msg}");
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut handle: *mut HcCloud = ptr::null_mut();
        assert_eq!(
            hc_cloud_new(ptr::null(), 3, HcSource::Unstructured, &mut handle),
            HcStatus::NullPointer
        );
        assert_eq!(hc_cloud_len(ptr::null()), 0);
        let mut out = 0.0;
        assert_eq!(hc_max_nn_distance(ptr::null(), &mut out), HcStatus::NullPointer);
    }
}

#[test]
fn read_missing_file_reports_io_with_path() {
    unsafe {
        let path = CString::new("/definitely/not/here.ply").unwrap();
        let mut handle: *mut HcCloud = ptr::null_mut();
        let status = hc_cloud_read(path.as_ptr(), HcSource::Unstructured, &mut handle);
        assert_eq!(status, HcStatus::Io);
        let msg = CStr::from_ptr(hc_last_error_message()).to_string_lossy();
        assert!(msg.contains("not/here.ply"), "{msg}");
    }
}

#[test]
fn write_read_roundtrip() {
    unsafe {
        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("c.ply").to_str().unwrap()).unwrap();
        let records: Vec<[f64; 6]> = (0..100)
            .map(|i| {
                let t = i as f64 * 0.37;
                record(
                    [t.cos(), t.sin(), 0.1 * i as f64],
                    [t.cos(), t.sin(), 0.0],
                )
            })
            .collect();
        let cloud = make_cloud(&records, HcSource::Unstructured);
        assert_eq!(
            hc_cloud_write(cloud, path.as_ptr(), HcFormat::PlyBinary),
            HcStatus::Ok
        );

        let mut back: *mut HcCloud = ptr::null_mut();
        assert_eq!(
            hc_cloud_read(path.as_ptr(), HcSource::Unstructured, &mut back),
            HcStatus::Ok
        );
        assert_eq!(hc_cloud_len(back), records.len());
        let mut pos = [0.0; 3];
        let mut nrm = [0.0; 3];
        for (i, r) in records.iter().enumerate() {
            assert_eq!(
                hc_cloud_point(back, i, pos.as_mut_ptr(), nrm.as_mut_ptr()),
                HcStatus::Ok
            );
            assert_eq!(pos, r[..3]);
            assert_eq!(nrm, r[3..]);
        }
        hc_cloud_free(cloud);
        hc_cloud_free(back);
    }
}

#[test]
fn merge_via_ffi_matches_expectations() {
    unsafe {
        let p_struct = make_cloud(&grid_line(5, 1.0), HcSource::Structured);
        // Support around anchors 0..3, nothing near anchor 4.
        let un_records: Vec<[f64; 6]> = (0..8)
            .map(|i| record([i as f64 * 0.4, 0.05, 0.0], [0.0, 0.0, 1.0]))
            .collect();
        let p_un = make_cloud(&un_records, HcSource::Unstructured);

        let params = HcMergeParams {
            k: 4,
            d_un: 0.5,
            cos_theta_min: 0.8,
            fill_min_support: 1,
            outlier_radius_un: 10.0,
            outlier_radius_struct: 10.0,
        };
        let mut half: *mut HcCloud = ptr::null_mut();
        let mut stats = HcMergeStats {
            n_struct_in: 0,
            n_un_in: 0,
            n_selected_un: 0,
            n_fill_struct: 0,
            n_outliers_un: 0,
            n_outliers_struct: 0,
            measured_d_half: 0.0,
        };
        assert_eq!(
            hc_merge(p_struct, p_un, &params, &mut half, &mut stats),
            HcStatus::Ok
        );
        assert_eq!(stats.n_struct_in, 5);
        assert_eq!(stats.n_un_in, 8);
        assert!(stats.n_selected_un > 0);
        assert!(stats.n_fill_struct > 0);
        assert_eq!(
            hc_cloud_len(half),
            stats.n_selected_un + stats.n_fill_struct
        );
        assert!(stats.measured_d_half > 0.0);

        // Distance bound with the tags implied by the canonical order.
        let mut tags = vec![1u8; stats.n_selected_un];
        tags.extend(std::iter::repeat(0u8).take(stats.n_fill_struct));
        let mut summary = HcBoundSummary {
            holds: false,
            worst_measured: 0.0,
            worst_allowed: 0.0,
        };
        assert_eq!(
            hc_verify_distance_bound(half, tags.as_ptr(), tags.len(), 1.0, 0.5, &mut summary),
            HcStatus::Ok
        );
        assert!(summary.holds);
        assert!(summary.worst_measured <= summary.worst_allowed);

        hc_cloud_free(p_struct);
        hc_cloud_free(p_un);
        hc_cloud_free(half);
    }
}

#[test]
fn merge_requires_structured_cloud() {
    unsafe {
        let empty = make_cloud(&[], HcSource::Structured);
        let p_un = make_cloud(&grid_line(3, 1.0), HcSource::Unstructured);
        let params = HcMergeParams {
            k: 2,
            d_un: 0.5,
            cos_theta_min: 0.8,
            fill_min_support: 1,
            outlier_radius_un: 1.0,
            outlier_radius_struct: 1.0,
        };
        let mut half: *mut HcCloud = ptr::null_mut();
        let status = hc_merge(empty, p_un, &params, &mut half, ptr::null_mut());
        assert_eq!(status, HcStatus::InvalidArgument);
        let msg = CStr::from_ptr(hc_last_error_message()).to_string_lossy();
        assert!(msg.contains("structured"), "{msg}");
        hc_cloud_free(empty);
        hc_cloud_free(p_un);
    }
}

#[test]
fn density_bound_via_ffi() {
    unsafe {
        let cloud = make_cloud(&grid_line(4, 0.3), HcSource::HalfStructured);
        let grid = HcGrid {
            origin: [-0.1, -0.1, -0.1],
            spacing: 0.5,
            dims: [4, 4, 4],
        };
        let mut summary = HcBoundSummary {
            holds: false,
            worst_measured: 0.0,
            worst_allowed: 0.0,
        };
        assert_eq!(
            hc_verify_density_bound(cloud, &grid, 2, 1.0, &mut summary),
            HcStatus::Ok
        );
        assert!(summary.holds);
        assert_eq!(
            hc_verify_density_bound(cloud, &grid, 0, 1.0, &mut summary),
            HcStatus::InvalidArgument
        );
        hc_cloud_free(cloud);
    }
}

#[test]
fn distance_bound_violation_reported() {
    unsafe {
        let cloud = make_cloud(
            &[
                record([0.0; 3], [0.0, 0.0, 1.0]),
                record([2.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            ],
            HcSource::HalfStructured,
        );
        let tags = [1u8, 1u8];
        let mut summary = HcBoundSummary {
            holds: true,
            worst_measured: 0.0,
            worst_allowed: 0.0,
        };
        assert_eq!(
            hc_verify_distance_bound(cloud, tags.as_ptr(), 2, 1.0, 0.2, &mut summary),
            HcStatus::Ok
        );
        assert!(!summary.holds);
        assert_eq!(summary.worst_measured, 2.0);
        assert!((summary.worst_allowed - 1.4).abs() < 1e-12);

        // Tag length mismatch is an argument error.
        assert_eq!(
            hc_verify_distance_bound(cloud, tags.as_ptr(), 1, 1.0, 0.2, &mut summary),
            HcStatus::InvalidArgument
        );
        hc_cloud_free(cloud);
    }
}

#[test]
fn version_and_header_exist() {
    let version = unsafe { CStr::from_ptr(hc_version()) }.to_string_lossy();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));

    // The build script generates the C header next to the crate.
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/halfcloud.h");
    let text = std::fs::read_to_string(header).expect("generated header present");
    for symbol in [
        "hc_cloud_read",
        "hc_merge",
        "hc_verify_distance_bound",
        "hc_verify_density_bound",
        "HcMergeParams",
        "typedef struct HcCloud HcCloud;",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}
