//! Using a known plane direction on a shape: resolve its offset by
//! reflect-and-register, and densify a cloud with its own mirror image.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::geom::{geodesic_deg, SymmetryPlane, UnitVector3};
use crate::pointcloud::{reflective_chamfer, PointCloud};
use crate::registration::{refine_plane_with, IcpConfig};
use crate::rng::{stream, Stream};

/// Largest angle the aligned plane may turn away from the requested direction.
pub const ALIGN_LIMIT_DEG: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentResult {
    pub plane: SymmetryPlane,
    /// Reflective Chamfer distance of the cloud about `plane`.
    pub residual: f64,
    /// Refinement rounds run.
    pub iterations: usize,
}

/// Places a plane with normal `direction` through the cloud's centroid and
/// refines it against the cloud.
pub fn align_plane(cloud: &PointCloud, direction: UnitVector3, cfg: &IcpConfig) -> Result<AlignmentResult> {
    cfg.validate()?;
    cloud.ensure_non_degenerate()?;
    let centroid = cloud.centroid().ok_or(Error::EmptyCloud)?;
    let initial = SymmetryPlane::through_point(direction, &centroid);
    let index = cloud.index();
    let points = cloud.points();
    let refined = refine_plane_with(points, &index, &initial, cfg, |plane| {
        reflective_chamfer(points, &index, plane)
    })?;
    let angle = geodesic_deg(&refined.plane.normal(), &direction, true);
    if angle > ALIGN_LIMIT_DEG {
        return Err(Error::InitialDirectionRejected {
            angle_deg: angle,
            limit_deg: ALIGN_LIMIT_DEG,
        });
    }
    Ok(AlignmentResult {
        plane: refined.plane,
        residual: refined.residual,
        iterations: refined.rounds,
    })
}

/// Appends `floor(fraction * n)` reflections of distinct, randomly chosen
/// points of `cloud` to it. The original points keep their order.
pub fn densify(cloud: &PointCloud, plane: &SymmetryPlane, fraction: f64, seed: u64) -> Result<PointCloud> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidConfig("densify fraction must be in [0, 1]".into()));
    }
    let n = cloud.len();
    let total = ((1.0 + fraction) * n as f64).floor() as usize;
    let extra = total - n;
    let mut rng = stream(seed, Stream::Densify);
    let mut chosen = index::sample(&mut rng, n, extra).into_vec();
    chosen.sort_unstable();
    let points = cloud.points();
    let mut out = points.to_vec();
    out.extend(chosen.iter().map(|&i| plane.reflect_point(&points[i])));
    PointCloud::new(out)
}
