//! C ABI over `symmetry-core`.
//!
//! Objects cross the boundary as opaque handles created by `sym_*_new` /
//! `sym_*_load` / producing calls and released with the matching `sym_*_free`.
//! Every fallible call returns a [`SymStatus`]; on failure the message is
//! available from [`sym_last_error`] on the same thread. Outputs are written
//! only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use symmetry_core::detector::{detect_planes, detect_planes_from_cloud, DetectedPlaneSet, DetectorConfig};
use symmetry_core::geom::{SymmetryPlane, UnitVector3, Vec3};
use symmetry_core::io::{load_cloud, load_mesh};
use symmetry_core::metrics::{evaluate, Matching};
use symmetry_core::pointcloud::{PointCloud, TriMesh};
use symmetry_core::registration::IcpConfig;
use symmetry_core::symmetrize::{align_plane, densify};
use symmetry_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad vector, plane, quaternion, configuration or argument.
    InvalidArgument = 2,
    /// Empty, degenerate or inconsistent mesh or cloud.
    InvalidGeometry = 3,
    /// Alignment turned too far from the requested direction.
    DirectionRejected = 4,
    EmptyGroundTruth = 5,
    ParseError = 6,
    UnsupportedFormat = 7,
    IoError = 8,
    DocumentError = 9,
    /// A Rust panic was caught at the boundary.
    Panic = 99,
}

/// Nearest-neighbor or one-to-one matching for [`sym_evaluate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymMatching {
    Nearest = 0,
    OneToOne = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymDetectorConfig {
    pub n_points: usize,
    pub n_candidates: usize,
    pub chamfer_gate: f64,
    pub candidate_gate: f64,
    pub merge_threshold_deg: f64,
    pub ubiquity_fraction: f64,
}

/// Plane `normal · x + offset = 0` with the detector's residual and score
/// (residual 0 and score 1 where not applicable).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymPlane {
    pub normal: [f64; 3],
    pub offset: f64,
    pub residual: f64,
    pub score: f64,
}

pub struct SymMesh(TriMesh);
pub struct SymCloud(PointCloud);
pub struct SymPlaneSet(DetectedPlaneSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SymStatus {
    match e {
        Error::InvalidVector(_)
        | Error::InvalidPlane(_)
        | Error::InvalidQuaternion(_)
        | Error::InvalidConfig(_)
        | Error::AntipodalAmbiguity => SymStatus::InvalidArgument,
        Error::EmptyMesh
        | Error::DegenerateBoundingSphere
        | Error::NoArea
        | Error::FaceIndexOutOfRange { .. }
        | Error::EmptyCloud
        | Error::DegenerateCloud(_) => SymStatus::InvalidGeometry,
        Error::InitialDirectionRejected { .. } => SymStatus::DirectionRejected,
        Error::EmptyGroundTruth => SymStatus::EmptyGroundTruth,
        Error::Parse { .. } => SymStatus::ParseError,
        Error::UnsupportedFormat(_) => SymStatus::UnsupportedFormat,
        Error::Io { .. } => SymStatus::IoError,
        Error::Json(_) | Error::Document(_) => SymStatus::DocumentError,
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), SymStatusError>) -> SymStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SymStatus::Ok,
        Ok(Err(SymStatusError(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            SymStatus::Panic
        }
    }
}

struct SymStatusError(SymStatus, String);

impl From<Error> for SymStatusError {
    fn from(e: Error) -> Self {
        SymStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> SymStatusError {
    SymStatusError(SymStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> SymStatusError {
    SymStatusError(SymStatus::InvalidArgument, msg.into())
}

/// # Safety
/// `p` must be null or valid for reads of `len` elements.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], SymStatusError> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

/// # Safety
/// `p` must be null or point to a live value of `T`.
unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, SymStatusError> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), SymStatusError> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

fn points_from_xyz(xyz: &[f64]) -> Vec<Vec3> {
    xyz.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()
}

fn plane_of(p: &SymPlane) -> Result<SymmetryPlane, SymStatusError> {
    let n = UnitVector3::new(p.normal[0], p.normal[1], p.normal[2])?;
    Ok(SymmetryPlane::new(n, p.offset)?)
}

fn sym_plane(plane: &SymmetryPlane, residual: f64, score: f64) -> SymPlane {
    SymPlane {
        normal: plane.normal().to_array(),
        offset: plane.offset(),
        residual,
        score,
    }
}

/// Message of the last failed call on this thread, or null if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sym_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Fills `out` with the library defaults.
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sym_detector_config_default(out: *mut SymDetectorConfig) -> SymStatus {
    guard(|| {
        let d = DetectorConfig::default();
        let cfg = SymDetectorConfig {
            n_points: d.n_points,
            n_candidates: d.n_candidates,
            chamfer_gate: d.chamfer_gate,
            candidate_gate: d.candidate_gate,
            merge_threshold_deg: d.merge_threshold_deg,
            ubiquity_fraction: d.ubiquity_fraction,
        };
        unsafe { write_out(out, cfg, "out") }
    })
}

fn detector_config(c: &SymDetectorConfig) -> DetectorConfig {
    DetectorConfig {
        n_points: c.n_points,
        n_candidates: c.n_candidates,
        chamfer_gate: c.chamfer_gate,
        candidate_gate: c.candidate_gate,
        merge_threshold_deg: c.merge_threshold_deg,
        ubiquity_fraction: c.ubiquity_fraction,
        icp: IcpConfig::default(),
    }
}

/// Builds a mesh from `n_vertices` xyz triples and `n_faces` index triples.
///
/// # Safety
/// `vertices` must hold `3 * n_vertices` doubles, `faces` `3 * n_faces`
/// indices, and `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sym_mesh_new(
    vertices: *const f64,
    n_vertices: usize,
    faces: *const u32,
    n_faces: usize,
    out: *mut *mut SymMesh,
) -> SymStatus {
    guard(|| {
        let v = unsafe { slice(vertices, 3 * n_vertices, "vertices") }?;
        let f = unsafe { slice(faces, 3 * n_faces, "faces") }?;
        let faces = f
            .chunks_exact(3)
            .map(|c| [c[0] as usize, c[1] as usize, c[2] as usize])
            .collect();
        let mesh = TriMesh::new(points_from_xyz(v), faces)?;
        unsafe { write_out(out, Box::into_raw(Box::new(SymMesh(mesh))), "out") }
    })
}

/// Loads an OBJ or PLY mesh.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sym_mesh_load(path: *const c_char, out: *mut *mut SymMesh) -> SymStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let mesh = load_mesh(path)?;
        unsafe { write_out(out, Box::into_raw(Box::new(SymMesh(mesh))), "out") }
    })
}

/// # Safety
/// `mesh` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sym_mesh_free(mesh: *mut SymMesh) {
    if !mesh.is_null() {
        drop(unsafe { Box::from_raw(mesh) });
    }
}

/// Builds a cloud from `n_points` xyz triples.
///
/// # Safety
/// `xyz` must hold `3 * n_points` doubles and `out` be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sym_cloud_new(xyz: *const f64, n_points: usize, out: *mut *mut SymCloud) -> SymStatus {
    guard(|| {
        let v = unsafe { slice(xyz, 3 * n_points, "xyz") }?;
        let cloud = PointCloud::new(points_from_xyz(v))?;
        unsafe { write_out(out, Box::into_raw(Box::new(SymCloud(cloud))), "out") }
    })
}

/// Loads the vertex positions of an OBJ or PLY file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sym_cloud_load(path: *const c_char, out: *mut *mut SymCloud) -> SymStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let cloud = load_cloud(path)?;
        unsafe { write_out(out, Box::into_raw(Box::new(SymCloud(cloud))), "out") }
    })
}

/// Number of points, 0 for a null handle.
///
/// # Safety
/// `cloud` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sym_cloud_len(cloud: *const SymCloud) -> usize {
    unsafe { cloud.as_ref() }.map_or(0, |c| c.0.len())
}

/// Copies the points into `xyz`, which must have room for `3 * capacity`
/// doubles; fails if `capacity` is smaller than the cloud.
///
/// # Safety
/// `cloud` must be a live handle and `xyz` valid for `3 * capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn sym_cloud_copy_points(cloud: *const SymCloud, xyz: *mut f64, capacity: usize) -> SymStatus {
    guard(|| {
        let cloud = unsafe { reference(cloud, "cloud") }?;
        if capacity < cloud.0.len() {
            return Err(invalid(format!("capacity {capacity} < {} points", cloud.0.len())));
        }
        if xyz.is_null() && !cloud.0.is_empty() {
            return Err(null("xyz"));
        }
        for (i, p) in cloud.0.points().iter().enumerate() {
            for k in 0..3 {
                unsafe { xyz.add(3 * i + k).write(p[k]) };
            }
        }
        Ok(())
    })
}

/// # Safety
/// `cloud` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sym_cloud_free(cloud: *mut SymCloud) {
    if !cloud.is_null() {
        drop(unsafe { Box::from_raw(cloud) });
    }
}

/// Detects the reflection planes of a mesh. Planes are in the mesh's frame.
///
/// # Safety
/// `mesh` must be a live handle, `config` null (defaults) or valid, and
/// `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sym_detect(
    mesh: *const SymMesh,
    config: *const SymDetectorConfig,
    seed: u64,
    out: *mut *mut SymPlaneSet,
) -> SymStatus {
    guard(|| {
        let mesh = unsafe { reference(mesh, "mesh") }?;
        let cfg = unsafe { config.as_ref() }.map_or_else(DetectorConfig::default, detector_config);
        let set = detect_planes(&mesh.0, &cfg, seed)?;
        unsafe { write_out(out, Box::into_raw(Box::new(SymPlaneSet(set))), "out") }
    })
}

/// Detects reflection planes directly from a point cloud.
///
/// # Safety
/// As for [`sym_detect`].
#[no_mangle]
pub unsafe extern "C" fn sym_detect_cloud(
    cloud: *const SymCloud,
    config: *const SymDetectorConfig,
    out: *mut *mut SymPlaneSet,
) -> SymStatus {
    guard(|| {
        let cloud = unsafe { reference(cloud, "cloud") }?;
        let cfg = unsafe { config.as_ref() }.map_or_else(DetectorConfig::default, detector_config);
        let set = detect_planes_from_cloud(&cloud.0, &cfg)?;
        unsafe { write_out(out, Box::into_raw(Box::new(SymPlaneSet(set))), "out") }
    })
}

/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sym_plane_set_len(set: *const SymPlaneSet) -> usize {
    unsafe { set.as_ref() }.map_or(0, |s| s.0.len())
}

/// True when the shape is symmetric about (nearly) every plane tried.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sym_plane_set_ubiquitous(set: *const SymPlaneSet) -> bool {
    unsafe { set.as_ref() }.is_some_and(|s| s.0.ubiquitous)
}

/// Plane `index`, in ascending residual order.
///
/// # Safety
/// `set` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sym_plane_set_get(set: *const SymPlaneSet, index: usize, out: *mut SymPlane) -> SymStatus {
    guard(|| {
        let set = unsafe { reference(set, "set") }?;
        let d = set
            .0
            .planes
            .get(index)
            .ok_or_else(|| invalid(format!("index {index} out of range ({} planes)", set.0.len())))?;
        unsafe { write_out(out, sym_plane(&d.plane, d.residual, d.score), "out") }
    })
}

/// # Safety
/// `set` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sym_plane_set_free(set: *mut SymPlaneSet) {
    if !set.is_null() {
        drop(unsafe { Box::from_raw(set) });
    }
}

/// Scores predicted normals against ground-truth normals (xyz triples).
/// `precision`, `recall` and `f` receive one value per threshold, in the
/// order given; `gd_deg` the average geodesic distance.
///
/// # Safety
/// Array pointers must be valid for the stated lengths (`3 * n` for
/// normals) and outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sym_evaluate(
    pred: *const f64,
    n_pred: usize,
    gt: *const f64,
    n_gt: usize,
    thresholds_deg: *const f64,
    n_thresholds: usize,
    matching: SymMatching,
    precision: *mut f64,
    recall: *mut f64,
    f: *mut f64,
    gd_deg: *mut f64,
) -> SymStatus {
    guard(|| {
        let to_normals = |xyz: &[f64]| {
            xyz.chunks_exact(3)
                .map(|c| UnitVector3::new(c[0], c[1], c[2]))
                .collect::<Result<Vec<_>, _>>()
        };
        let pred = to_normals(unsafe { slice(pred, 3 * n_pred, "pred") }?)?;
        let gt = to_normals(unsafe { slice(gt, 3 * n_gt, "gt") }?)?;
        let thresholds = unsafe { slice(thresholds_deg, n_thresholds, "thresholds_deg") }?;
        if n_thresholds > 0 && (precision.is_null() || recall.is_null() || f.is_null()) {
            return Err(null("score output"));
        }
        let matching = match matching {
            SymMatching::Nearest => Matching::Nearest,
            SymMatching::OneToOne => Matching::OneToOne,
        };
        let report = evaluate(&pred, &gt, thresholds, matching)?;
        for (i, t) in thresholds.iter().enumerate() {
            let s = report
                .at(*t)
                .ok_or_else(|| invalid(format!("threshold {t} not scored")))?;
            unsafe {
                precision.add(i).write(s.precision);
                recall.add(i).write(s.recall);
                f.add(i).write(s.f);
            }
        }
        unsafe { write_out(gd_deg, report.gd_deg, "gd_deg") }
    })
}

/// Resolves the offset of a plane with normal `direction` against the cloud.
///
/// # Safety
/// `cloud` must be a live handle, `direction` point to 3 doubles and `out`
/// be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sym_align_plane(cloud: *const SymCloud, direction: *const f64, out: *mut SymPlane) -> SymStatus {
    guard(|| {
        let cloud = unsafe { reference(cloud, "cloud") }?;
        let d = unsafe { slice(direction, 3, "direction") }?;
        let dir = UnitVector3::new(d[0], d[1], d[2])?;
        let a = align_plane(&cloud.0, dir, &IcpConfig::default())?;
        unsafe { write_out(out, sym_plane(&a.plane, a.residual, 1.0), "out") }
    })
}

/// Appends reflections of `floor(fraction * n)` distinct random points.
///
/// # Safety
/// `cloud` and `plane` must be valid and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sym_densify(
    cloud: *const SymCloud,
    plane: *const SymPlane,
    fraction: f64,
    seed: u64,
    out: *mut *mut SymCloud,
) -> SymStatus {
    guard(|| {
        let cloud = unsafe { reference(cloud, "cloud") }?;
        let plane = plane_of(unsafe { reference(plane, "plane") }?)?;
        let dense = densify(&cloud.0, &plane, fraction, seed)?;
        unsafe { write_out(out, Box::into_raw(Box::new(SymCloud(dense))), "out") }
    })
}
