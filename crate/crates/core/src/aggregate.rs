//! Multi-view aggregation: per-view predictions are rotated into the
//! reference view's frame and clustered on the projective sphere.

use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geom::{geodesic_deg, rotation_about, RigidTransform, SymmetryPlane, UnitVector3};
use crate::prediction::{Prediction, PredictionSet};

/// Camera pose of one generated view relative to the reference view.
///
/// Views orbit the object at a shared elevation. In the reference frame the
/// orbit axis is the z axis tilted by `elevation_deg` about x, and the view
/// frame maps to the reference frame by a rotation of `azimuth_deg` about
/// that axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewPose {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl ViewPose {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        ViewPose {
            azimuth_deg,
            elevation_deg,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0)
    }

    /// Rotation taking view-frame vectors into the reference frame.
    pub fn rotation(&self) -> Matrix3<f64> {
        let tilt = rotation_about(&UnitVector3::X, self.elevation_deg);
        let yaw = rotation_about(&UnitVector3::Z, self.azimuth_deg);
        tilt.transpose() * yaw * tilt
    }

    /// `n` views evenly spaced in azimuth at a fixed elevation.
    pub fn orbit(n: usize, elevation_deg: f64) -> Vec<ViewPose> {
        (0..n)
            .map(|i| ViewPose::new(360.0 * i as f64 / n as f64, elevation_deg))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregationConfig {
    pub cluster_threshold_deg: f64,
    pub min_cluster_size: usize,
    pub confidence_floor: f64,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        AggregationConfig {
            cluster_threshold_deg: 30.0,
            min_cluster_size: 2,
            confidence_floor: 0.0,
        }
    }
}

impl AggregationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cluster_threshold_deg > 0.0 && self.cluster_threshold_deg < 90.0) {
            return Err(Error::InvalidConfig(
                "cluster_threshold_deg must be in (0, 90)".into(),
            ));
        }
        if !self.confidence_floor.is_finite() {
            return Err(Error::InvalidConfig("confidence_floor must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusteredPrediction {
    pub plane: SymmetryPlane,
    pub support: usize,
    pub mean_confidence: f64,
}

pub fn to_reference_frame(preds: &[Prediction], pose: &ViewPose) -> PredictionSet {
    let t = RigidTransform::from_rotation(pose.rotation());
    preds
        .iter()
        .map(|p| Prediction {
            plane: p.plane.transformed(&t),
            confidence: p.confidence,
        })
        .collect()
}

/// Average-linkage agglomerative clustering under sign-invariant geodesic
/// distance, cut at `cluster_threshold_deg`.
///
/// Cluster centers are the dominant eigenvector of the confidence-weighted
/// scatter `Σ w n nᵀ`, which is indifferent to the sign of each member.
/// Members left farther than the threshold from their center are split off
/// and clustered separately.
pub fn cluster_normals(all_preds: &[PredictionSet], cfg: &AggregationConfig) -> Result<Vec<ClusteredPrediction>> {
    cfg.validate()?;
    let mut items: Vec<Prediction> = all_preds
        .iter()
        .flatten()
        .filter(|p| p.confidence >= cfg.confidence_floor)
        .copied()
        .collect();
    // fixed order makes linkage ties independent of input order
    items.sort_by(|a, b| {
        let (na, nb) = (a.plane.normal().to_array(), b.plane.normal().to_array());
        na.partial_cmp(&nb)
            .unwrap()
            .then(a.plane.offset().total_cmp(&b.plane.offset()))
            .then(a.confidence.total_cmp(&b.confidence))
    });

    let groups = agglomerate(&items, cfg.cluster_threshold_deg);
    let mut clusters = Vec::new();
    for g in groups {
        let members: Vec<Prediction> = g.into_iter().map(|i| items[i]).collect();
        split_until_tight(members, cfg.cluster_threshold_deg, &mut clusters);
    }
    let mut out: Vec<ClusteredPrediction> = clusters
        .into_iter()
        .filter(|c| c.support >= cfg.min_cluster_size)
        .collect();
    out.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then(b.mean_confidence.total_cmp(&a.mean_confidence))
            .then(
                a.plane
                    .normal()
                    .to_array()
                    .partial_cmp(&b.plane.normal().to_array())
                    .unwrap(),
            )
    });
    Ok(out)
}

pub fn aggregate_views(
    per_view: &[(PredictionSet, ViewPose)],
    cfg: &AggregationConfig,
) -> Result<Vec<ClusteredPrediction>> {
    let rotated: Vec<PredictionSet> = per_view
        .iter()
        .map(|(preds, pose)| to_reference_frame(preds, pose))
        .collect();
    cluster_normals(&rotated, cfg)
}

fn agglomerate(items: &[Prediction], threshold: f64) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = geodesic_deg(&items[i].plane.normal(), &items[j].plane.normal(), true);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if members[i].is_none() {
                continue;
            }
            for j in i + 1..n {
                if members[j].is_none() {
                    continue;
                }
                if best.is_none_or(|(_, _, d)| dist[i][j] < d) {
                    best = Some((i, j, dist[i][j]));
                }
            }
        }
        let Some((i, j, d)) = best else { break };
        if d >= threshold {
            break;
        }
        let mj = members[j].take().unwrap();
        let (si, sj) = (members[i].as_ref().unwrap().len() as f64, mj.len() as f64);
        for k in 0..n {
            if k != i && members[k].is_some() {
                let merged = (si * dist[i][k] + sj * dist[j][k]) / (si + sj);
                dist[i][k] = merged;
                dist[k][i] = merged;
            }
        }
        members[i].as_mut().unwrap().extend(mj);
    }
    members.into_iter().flatten().collect()
}

fn summarize(members: &[Prediction]) -> ClusteredPrediction {
    let total_w: f64 = members.iter().map(|p| p.confidence.max(0.0)).sum();
    let weight = |p: &Prediction| {
        if total_w > 0.0 {
            p.confidence.max(0.0)
        } else {
            1.0
        }
    };
    let mut scatter = Matrix3::zeros();
    for p in members {
        let n = p.plane.normal();
        scatter += weight(p) * n.as_vector() * n.as_vector().transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let k = eig.eigenvalues.imax();
    let center = UnitVector3::from_vector(eig.eigenvectors.column(k).into_owned())
        .expect("scatter of unit vectors has a non-zero dominant eigenvector")
        .canonical();
    // member offsets, signed consistently with the center normal
    let wsum: f64 = members.iter().map(weight).sum();
    let offset = members
        .iter()
        .map(|p| {
            let s = p.plane.normal().dot(&center).signum();
            weight(p) * s * p.plane.offset()
        })
        .sum::<f64>()
        / wsum;
    ClusteredPrediction {
        plane: SymmetryPlane::new(center, offset).expect("finite offset"),
        support: members.len(),
        mean_confidence: members.iter().map(|p| p.confidence).sum::<f64>() / members.len() as f64,
    }
}

fn split_until_tight(members: Vec<Prediction>, threshold: f64, out: &mut Vec<ClusteredPrediction>) {
    let cluster = summarize(&members);
    let center = cluster.plane.normal();
    let (inside, outside): (Vec<Prediction>, Vec<Prediction>) = members
        .iter()
        .partition(|p| geodesic_deg(&p.plane.normal(), &center, true) <= threshold);
    if outside.is_empty() {
        out.push(cluster);
    } else if inside.is_empty() {
        for p in members {
            out.push(summarize(&[p]));
        }
    } else {
        split_until_tight(inside, threshold, out);
        split_until_tight(outside, threshold, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pred(n: UnitVector3, c: f64) -> Prediction {
        Prediction {
            plane: SymmetryPlane::through_origin(n),
            confidence: c,
        }
    }

    fn jitter(base: &UnitVector3, max_deg: f64, rng: &mut ChaCha8Rng) -> UnitVector3 {
        let axis = UnitVector3::from_vector(
            base.as_vector()
                .cross(&nalgebra::Vector3::new(rng.random(), rng.random(), rng.random())),
        )
        .unwrap();
        base.rotated(&rotation_about(&axis, rng.random_range(0.0..max_deg)))
    }

    #[test]
    fn identity_pose_is_noop() {
        let preds = vec![pred(UnitVector3::new(0.3, 0.2, 0.9).unwrap(), 0.7)];
        assert_eq!(to_reference_frame(&preds, &ViewPose::identity()), preds);
    }

    #[test]
    fn yaw_maps_x_to_y() {
        let out = to_reference_frame(&[pred(UnitVector3::X, 1.0)], &ViewPose::new(90.0, 0.0));
        let n = out[0].plane.normal();
        assert!((n.y().abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pose_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let pose = ViewPose::new(rng.random_range(0.0..360.0), rng.random_range(-60.0..60.0));
            let r = pose.rotation();
            assert!(RigidTransform::from_rotation(r).is_proper(1e-12));
            let p = Prediction {
                plane: SymmetryPlane::new(jitter(&UnitVector3::Z, 80.0, &mut rng), 0.2).unwrap(),
                confidence: 0.5,
            };
            let there = to_reference_frame(&[p], &pose)[0];
            let back = there.plane.transformed(&RigidTransform::from_rotation(r.transpose()));
            assert!((back.normal().as_vector() - p.plane.normal().as_vector()).norm() < 1e-9);
            assert!((back.offset() - p.plane.offset()).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_normals_form_one_cluster() {
        let n = UnitVector3::new(0.2, 0.5, 0.8).unwrap();
        let sets: Vec<PredictionSet> = (0..8).map(|_| vec![pred(n, 0.9)]).collect();
        let out = cluster_normals(&sets, &AggregationConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].support, 8);
        assert!(geodesic_deg(&out[0].plane.normal(), &n, true) < 1e-9);
    }

    #[test]
    fn two_tight_groups() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut sets = Vec::new();
        let mut groups = [Vec::new(), Vec::new()];
        for (g, seed) in [UnitVector3::X, UnitVector3::Z].iter().enumerate() {
            for _ in 0..4 {
                let n = jitter(seed, 5.0, &mut rng);
                groups[g].push(n);
                sets.push(vec![pred(n, 1.0)]);
            }
        }
        let out = cluster_normals(&sets, &AggregationConfig::default()).unwrap();
        assert_eq!(out.len(), 2);
        for (seed, members) in [UnitVector3::X, UnitVector3::Z].iter().zip(&groups) {
            let c = out
                .iter()
                .map(|c| c.plane.normal())
                .min_by(|a, b| geodesic_deg(a, seed, true).total_cmp(&geodesic_deg(b, seed, true)))
                .unwrap();
            assert!(geodesic_deg(&c, seed, true) < 3.0);
            // brute-force spherical mean: the direction minimizing Σ sin²θ
            // over a fine grid around the seed must agree with the center
            let cost = |u: &UnitVector3| members.iter().map(|m| 1.0 - m.dot(u).powi(2)).sum::<f64>();
            let mut best = (f64::INFINITY, *seed);
            for i in -80..=80 {
                for j in -80..=80 {
                    let v = seed.as_vector() + perp_basis(seed).0 * (i as f64 * 0.001) + perp_basis(seed).1 * (j as f64 * 0.001);
                    let u = UnitVector3::from_vector(v).unwrap();
                    if cost(&u) < best.0 {
                        best = (cost(&u), u);
                    }
                }
            }
            assert!(geodesic_deg(&c, &best.1, true) < 0.1);
        }
    }

    fn perp_basis(n: &UnitVector3) -> (nalgebra::Vector3<f64>, nalgebra::Vector3<f64>) {
        let a = if n.x().abs() < 0.9 { nalgebra::Vector3::x() } else { nalgebra::Vector3::y() };
        let u = n.as_vector().cross(&a).normalize();
        let v = n.as_vector().cross(&u);
        (u, v)
    }

    #[test]
    fn antipodal_normals_share_a_cluster() {
        let n = UnitVector3::new(0.6, -0.3, 0.2).unwrap();
        // SymmetryPlane canonicalizes on construction; build the flipped one
        // with the raw negated normal to exercise that path
        let sets = vec![vec![pred(n, 1.0)], vec![pred(n.flipped(), 1.0)]];
        let out = cluster_normals(&sets, &AggregationConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert!(geodesic_deg(&out[0].plane.normal(), &n, true) < 1e-9);
        assert!(out[0].plane.normal().x() > 0.0);
    }

    #[test]
    fn confidence_floor_and_min_support() {
        let sets = vec![
            vec![pred(UnitVector3::X, 0.1)],
            vec![pred(UnitVector3::X, 0.9)],
            vec![pred(UnitVector3::Y, 0.9)],
        ];
        let cfg = AggregationConfig {
            confidence_floor: 0.5,
            min_cluster_size: 1,
            ..Default::default()
        };
        let out = cluster_normals(&sets, &cfg).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|c| c.support == 1));
        let strict = cluster_normals(&sets, &AggregationConfig::default()).unwrap();
        assert_eq!(strict.len(), 1);
        assert_eq!(strict[0].support, 2);
    }

    #[test]
    fn single_view_passthrough() {
        let preds = vec![pred(UnitVector3::X, 0.8), pred(UnitVector3::Z, 0.6)];
        let cfg = AggregationConfig {
            min_cluster_size: 1,
            ..Default::default()
        };
        let out = aggregate_views(&[(preds.clone(), ViewPose::identity())], &cfg).unwrap();
        assert_eq!(out.len(), 2);
        for p in &preds {
            assert!(out.iter().any(|c| c.plane == p.plane && c.mean_confidence == p.confidence));
        }
        let empty = aggregate_views(&vec![(vec![], ViewPose::identity()); 3], &cfg).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn members_within_threshold_after_split() {
        // a chain of normals 20 deg apart links under average linkage but
        // would spread far from a single center
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let sets: Vec<PredictionSet> = (0..12)
                .map(|_| vec![pred(jitter(&UnitVector3::Z, 45.0, &mut rng), rng.random())])
                .collect();
            let cfg = AggregationConfig {
                min_cluster_size: 1,
                ..Default::default()
            };
            let out = cluster_normals(&sets, &cfg).unwrap();
            assert_eq!(out.iter().map(|c| c.support).sum::<usize>(), 12);
            for s in &sets {
                let n = s[0].plane.normal();
                let nearest = out
                    .iter()
                    .map(|c| geodesic_deg(&c.plane.normal(), &n, true))
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest <= 30.0);
            }
        }
    }

    #[test]
    fn order_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut sets: Vec<PredictionSet> = (0..10)
            .map(|_| vec![pred(jitter(&UnitVector3::Y, 60.0, &mut rng), rng.random())])
            .collect();
        let cfg = AggregationConfig::default();
        let a = cluster_normals(&sets, &cfg).unwrap();
        sets.reverse();
        sets.swap(2, 7);
        assert_eq!(a, cluster_normals(&sets, &cfg).unwrap());
    }

    #[test]
    fn invalid_threshold() {
        let cfg = AggregationConfig {
            cluster_threshold_deg: 95.0,
            ..Default::default()
        };
        assert!(cluster_normals(&[], &cfg).is_err());
    }
}
