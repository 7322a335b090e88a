//! Candidate-scan symmetry detection for meshes and point clouds.
//!
//! The shape is normalized into the unit sphere, every candidate normal from
//! a hemisphere layout is tried as a plane through the origin, plausible
//! candidates are refined by reflect-and-register, and surviving planes are
//! merged greedily by residual.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{geodesic_deg, sample_hemisphere, SymmetryPlane, Vec3};
use crate::pointcloud::{
    normalize_cloud, normalize_to_unit_sphere, reflective_chamfer, reflective_surface_residual, sample_surface,
    KdTree, PointCloud, Similarity, SurfaceIndex, TriMesh,
};
use crate::registration::{refine_plane_with, subsample, IcpConfig, RefinementStatus};

/// Points used to screen and refine candidates; the final residual of a
/// kept plane is always measured on every sample.
const SCREEN_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Surface samples drawn from a mesh.
    pub n_points: usize,
    /// Candidate normals scanned over the hemisphere.
    pub n_candidates: usize,
    /// Largest reflective residual (unit-sphere units) a returned plane may have.
    pub chamfer_gate: f64,
    /// Largest residual of an unrefined candidate that is still worth
    /// refining. Never tighter than `chamfer_gate`.
    pub candidate_gate: f64,
    pub merge_threshold_deg: f64,
    /// Share of candidates that must pass `chamfer_gate` unrefined for the
    /// shape to be flagged as symmetric about every plane.
    pub ubiquity_fraction: f64,
    pub icp: IcpConfig,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            n_points: 50_000,
            n_candidates: 31,
            chamfer_gate: 0.02,
            candidate_gate: 0.1,
            merge_threshold_deg: 10.0,
            ubiquity_fraction: 0.8,
            icp: IcpConfig::default(),
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 100 {
            return Err(Error::InvalidConfig("n_points must be >= 100".into()));
        }
        if self.n_candidates < 1 {
            return Err(Error::InvalidConfig("n_candidates must be >= 1".into()));
        }
        if !(self.chamfer_gate > 0.0 && self.chamfer_gate.is_finite()) {
            return Err(Error::InvalidConfig("chamfer_gate must be > 0".into()));
        }
        if self.candidate_gate.is_nan() || self.candidate_gate <= 0.0 {
            return Err(Error::InvalidConfig("candidate_gate must be > 0".into()));
        }
        if !(self.merge_threshold_deg > 0.0 && self.merge_threshold_deg < 90.0) {
            return Err(Error::InvalidConfig(
                "merge_threshold_deg must be in (0, 90)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.ubiquity_fraction) {
            return Err(Error::InvalidConfig("ubiquity_fraction must be in [0, 1]".into()));
        }
        self.icp.validate()
    }

    fn effective_candidate_gate(&self) -> f64 {
        self.candidate_gate.max(self.chamfer_gate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedPlane {
    /// Plane in the caller's coordinate frame.
    pub plane: SymmetryPlane,
    /// Reflective residual in unit-sphere-normalized units.
    pub residual: f64,
    /// `exp(-residual / chamfer_gate)`, in (0, 1].
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectedPlaneSet {
    /// Sorted by ascending residual.
    pub planes: Vec<DetectedPlane>,
    /// More than `ubiquity_fraction` of candidates passed unrefined; the shape
    /// is (close to) symmetric about every plane through its center.
    pub ubiquitous: bool,
    /// Candidates passing `chamfer_gate` before refinement.
    pub candidates_passed: usize,
    /// Similarity that took the input into the unit sphere.
    pub normalization: Option<Similarity>,
}

impl DetectedPlaneSet {
    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }
}

/// Detects the reflection planes of a mesh.
///
/// Residuals are measured from the reflected surface samples to the exact
/// mesh surface, so a true plane scores zero regardless of sample density.
pub fn detect_planes(mesh: &TriMesh, cfg: &DetectorConfig, seed: u64) -> Result<DetectedPlaneSet> {
    cfg.validate()?;
    let (normalized, sim) = normalize_to_unit_sphere(mesh)?;
    let samples = sample_surface(&normalized, cfg.n_points, seed)?;
    samples.ensure_non_degenerate()?;
    let surface = SurfaceIndex::new(&normalized);
    let index = samples.index();
    let points = samples.points();
    let screen = subsample(points, SCREEN_POINTS);
    scan(
        points,
        &index,
        cfg,
        sim,
        |plane| reflective_surface_residual(&screen, &surface, plane),
        |plane| reflective_surface_residual(points, &surface, plane),
    )
}

/// Detects reflection planes directly from a point cloud, scoring planes by
/// reflective Chamfer distance between the cloud and its mirror image.
pub fn detect_planes_from_cloud(cloud: &PointCloud, cfg: &DetectorConfig) -> Result<DetectedPlaneSet> {
    cfg.validate()?;
    cloud.ensure_non_degenerate()?;
    let (normalized, sim) = normalize_cloud(cloud)?;
    let index = normalized.index();
    let points = normalized.points();
    let screen = subsample(points, SCREEN_POINTS);
    scan(
        points,
        &index,
        cfg,
        sim,
        |plane| reflective_chamfer(&screen, &index, plane),
        |plane| reflective_chamfer(points, &index, plane),
    )
}

fn scan<F, G>(
    points: &[Vec3],
    index: &KdTree,
    cfg: &DetectorConfig,
    sim: Similarity,
    residual: F,
    full_residual: G,
) -> Result<DetectedPlaneSet>
where
    F: Fn(&SymmetryPlane) -> f64 + Sync,
    G: Fn(&SymmetryPlane) -> f64 + Sync,
{
    let candidates = sample_hemisphere(cfg.n_candidates);
    // every mirror plane of a shape passes through its area centroid
    let center = points.iter().sum::<Vec3>() / points.len() as f64;
    let gate = cfg.chamfer_gate;
    let refine_gate = cfg.effective_candidate_gate();

    let planes: Vec<SymmetryPlane> = candidates
        .iter()
        .map(|n| SymmetryPlane::through_point(*n, &center))
        .collect();
    let raw: Vec<f64> = planes.par_iter().map(&residual).collect();
    let candidates_passed = raw.iter().filter(|&&r| r <= gate).count();
    let ubiquitous = candidates_passed as f64 > cfg.ubiquity_fraction * cfg.n_candidates as f64;

    let mut order: Vec<usize> = (0..planes.len()).filter(|&i| raw[i] <= refine_gate).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)));

    let icp = IcpConfig {
        sample_limit: cfg.icp.sample_limit.min(SCREEN_POINTS),
        ..cfg.icp
    };
    // Candidates are refined best-first. One that already lies within the
    // merge threshold of an accepted plane would only be merged into it.
    let mut survivors: Vec<(SymmetryPlane, f64)> = Vec::new();
    for i in order {
        let covered = survivors
            .iter()
            .any(|(p, _)| geodesic_deg(&p.normal(), &candidates[i], true) < cfg.merge_threshold_deg);
        if covered {
            continue;
        }
        let refined = refine_plane_with(points, index, &planes[i], &icp, &residual)?;
        debug_assert!(refined.status == RefinementStatus::Diverged || refined.residual <= raw[i]);
        if refined.residual > gate {
            continue;
        }
        let r = full_residual(&refined.plane);
        if r <= gate {
            survivors.push((refined.plane, r));
        }
    }
    survivors.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut merged: Vec<(SymmetryPlane, f64)> = Vec::new();
    for (plane, r) in survivors {
        let absorbed = merged
            .iter()
            .any(|(m, _)| geodesic_deg(&m.normal(), &plane.normal(), true) < cfg.merge_threshold_deg);
        if !absorbed {
            merged.push((plane, r));
        }
    }
    merged.truncate(cfg.n_candidates);

    let planes = merged
        .into_iter()
        .map(|(plane, r)| {
            assert!(r <= gate, "returned plane exceeds the residual gate");
            DetectedPlane {
                plane: sim.plane_to_original(&plane),
                residual: r,
                score: (-r / gate).exp(),
            }
        })
        .collect();

    Ok(DetectedPlaneSet {
        planes,
        ubiquitous,
        candidates_passed,
        normalization: Some(sim),
    })
}
