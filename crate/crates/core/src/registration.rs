//! Rigid ICP and mirror-plane refinement from reflective correspondences.

use nalgebra::{Matrix3, Rotation3, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{geodesic_deg, RigidTransform, SymmetryPlane, UnitVector3, Vec3};
use crate::pointcloud::{reflective_chamfer, KdTree, PointCloud};

/// Refinement stops after this many reflect → register → fit rounds.
pub const MAX_REFINE_ROUNDS: usize = 3;
/// ... or once the normal moves less than this between rounds.
pub const REFINE_STOP_DEG: f64 = 0.05;
/// Pairs farther apart than this multiple of the median are left out of the
/// plane fit.
pub const PAIR_REJECT_FACTOR: f64 = 3.0;
/// Pairs closer than this carry no direction information.
const COARSE_MIN_POINTS: usize = 256;
pub const MIN_PAIR_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpConfig {
    pub max_iterations: usize,
    /// Stop once the mean correspondence distance improves by less than this.
    pub convergence_eps: f64,
    /// Fraction of the worst correspondences ignored in each alignment step.
    pub trim_fraction: f64,
    /// Sources larger than this are registered through an evenly strided
    /// subset of this size.
    pub sample_limit: usize,
}

impl Default for IcpConfig {
    fn default() -> Self {
        IcpConfig {
            max_iterations: 50,
            convergence_eps: 1e-6,
            trim_fraction: 0.0,
            sample_limit: 8192,
        }
    }
}

impl IcpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.convergence_eps.is_nan() || self.convergence_eps <= 0.0 {
            return Err(Error::InvalidConfig("convergence_eps must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.trim_fraction) {
            return Err(Error::InvalidConfig("trim_fraction must be in [0, 1)".into()));
        }
        if self.sample_limit < 3 {
            return Err(Error::InvalidConfig("sample_limit must be >= 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpResult {
    pub transform: RigidTransform,
    pub final_mean_distance: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// Mean squared correspondence distance after each accepted step, starting
    /// with the identity. Non-increasing.
    pub objective_history: Vec<f64>,
}

/// Registers `source` onto `target`: alternate nearest-neighbor
/// correspondences with a closed-form Kabsch alignment.
pub fn icp_register(source: &PointCloud, target: &PointCloud, cfg: &IcpConfig) -> Result<IcpResult> {
    cfg.validate()?;
    source.ensure_non_degenerate()?;
    target.ensure_non_degenerate()?;
    let index = target.index();
    icp_with_index(&subsample(source.points(), cfg.sample_limit), target.points(), &index, cfg)
}

pub(crate) fn subsample(points: &[Vec3], limit: usize) -> Vec<Vec3> {
    if points.len() <= limit {
        return points.to_vec();
    }
    (0..limit)
        .map(|k| points[k * points.len() / limit])
        .collect()
}

struct Correspondences {
    /// (source index, target point, squared distance) of the kept pairs
    kept: Vec<(usize, Vec3, f64)>,
    mean_distance: f64,
    mean_squared: f64,
}

fn correspond(
    source: &[Vec3],
    target: &[Vec3],
    index: &KdTree,
    t: &RigidTransform,
    trim: f64,
) -> Correspondences {
    let mut pairs: Vec<(usize, Vec3, f64)> = source
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let (j, d2) = index.nearest(&t.apply(s)).expect("non-empty target");
            (i, target[j], d2)
        })
        .collect();
    if trim > 0.0 {
        let keep = ((1.0 - trim) * pairs.len() as f64).ceil() as usize;
        let keep = keep.clamp(3.min(pairs.len()), pairs.len());
        pairs.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
        pairs.truncate(keep);
        pairs.sort_by_key(|p| p.0);
    }
    let n = pairs.len() as f64;
    let mean_distance = pairs.iter().map(|p| p.2.sqrt()).sum::<f64>() / n;
    let mean_squared = pairs.iter().map(|p| p.2).sum::<f64>() / n;
    Correspondences {
        kept: pairs,
        mean_distance,
        mean_squared,
    }
}

/// Least-squares rigid motion taking `from[i]` onto `to[i]`, with the
/// reflection case of the SVD corrected to a proper rotation.
pub fn kabsch(from: &[Vec3], to: &[Vec3]) -> Result<RigidTransform> {
    if from.len() != to.len() || from.len() < 3 {
        return Err(Error::DegenerateCloud(
            "kabsch needs at least 3 paired points".into(),
        ));
    }
    let n = from.len() as f64;
    let cf: Vec3 = from.iter().sum::<Vec3>() / n;
    let ct: Vec3 = to.iter().sum::<Vec3>() / n;
    let mut h = Matrix3::zeros();
    for (a, b) in from.iter().zip(to) {
        h += (a - cf) * (b - ct).transpose();
    }
    let svd = h.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegenerateCloud("SVD did not converge".into())),
    };
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let correction = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d));
    let rotation = v * correction * u.transpose();
    Ok(RigidTransform {
        rotation,
        translation: ct - rotation * cf,
    })
}

pub(crate) fn icp_with_index(
    source: &[Vec3],
    target: &[Vec3],
    index: &KdTree,
    cfg: &IcpConfig,
) -> Result<IcpResult> {
    let mut transform = RigidTransform::identity();
    let mut current = correspond(source, target, index, &transform, cfg.trim_fraction);
    let mut history = vec![current.mean_squared];
    let mut converged = false;
    let mut iterations = 0;
    let mut accel = Accelerator::default();
    accel.record(&transform, current.mean_squared);

    while iterations < cfg.max_iterations {
        iterations += 1;
        let from: Vec<Vec3> = current.kept.iter().map(|p| source[p.0]).collect();
        let to: Vec<Vec3> = current.kept.iter().map(|p| p.1).collect();
        let candidate = kabsch(&from, &to)?;
        let next = correspond(source, target, index, &candidate, cfg.trim_fraction);
        // Kabsch followed by re-matching cannot raise the squared objective
        // except through round-off; refuse such a step rather than drift.
        if next.mean_squared > current.mean_squared {
            converged = true;
            break;
        }
        let improvement = current.mean_distance - next.mean_distance;
        transform = candidate;
        history.push(next.mean_squared);
        current = next;
        if improvement.abs() < cfg.convergence_eps {
            converged = true;
            break;
        }
        accel.record(&transform, current.mean_squared);
        if let Some((q, dir, mut step)) = accel.extrapolate() {
            for _ in 0..=ACCEL_BACKTRACKS {
                let jump = from_params(&std::array::from_fn::<f64, 6, _>(|i| q[i] + step * dir[i]));
                let trial = correspond(source, target, index, &jump, cfg.trim_fraction);
                if trial.mean_squared < current.mean_squared {
                    transform = jump;
                    history.push(trial.mean_squared);
                    current = trial;
                    accel.restart(&transform, current.mean_squared);
                    break;
                }
                step /= 2.0;
            }
        }
    }

    Ok(IcpResult {
        transform,
        final_mean_distance: current.mean_distance,
        iterations_used: iterations,
        converged,
        objective_history: history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinementStatus {
    Refined,
    /// Refinement raised the residual; the initial plane was kept.
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneRefinement {
    pub plane: SymmetryPlane,
    pub residual: f64,
    pub initial_residual: f64,
    pub rounds: usize,
    pub status: RefinementStatus,
}

/// Refines a mirror plane of `cloud` starting from `initial`.
///
/// Each round reflects the cloud, registers the reflection back onto the
/// original with ICP, and re-fits the plane to the resulting mirror pairs.
/// The returned residual is the reflective Chamfer distance of the cloud.
pub fn refine_plane(cloud: &PointCloud, initial: &SymmetryPlane, cfg: &IcpConfig) -> Result<PlaneRefinement> {
    cfg.validate()?;
    cloud.ensure_non_degenerate()?;
    let index = cloud.index();
    let points = cloud.points();
    refine_plane_with(points, &index, initial, cfg, |plane| {
        reflective_chamfer(points, &index, plane)
    })
}

/// [`refine_plane`] with a caller-supplied residual, for callers that can
/// score a plane against something better than the samples themselves.
pub(crate) fn refine_plane_with<F>(
    points: &[Vec3],
    index: &KdTree,
    initial: &SymmetryPlane,
    cfg: &IcpConfig,
    residual: F,
) -> Result<PlaneRefinement>
where
    F: Fn(&SymmetryPlane) -> f64,
{
    let initial_residual = residual(initial);
    let icp_source = subsample(points, cfg.sample_limit);
    let coarse_source = subsample(points, (cfg.sample_limit / 4).max(COARSE_MIN_POINTS));
    let mut plane = *initial;
    let mut rounds = 0;
    while rounds < MAX_REFINE_ROUNDS {
        rounds += 1;
        // the first round only needs to find the basin; later rounds use the full sample
        let source = if rounds == 1 { &coarse_source } else { &icp_source };
        let reflected: Vec<Vec3> = source.iter().map(|p| plane.reflect_point(p)).collect();
        let icp = icp_with_index(&reflected, points, index, cfg)?;
        let Some(next) = fit_mirror_plane(source, points, index, &plane, &icp.transform) else {
            break;
        };
        let moved = geodesic_deg(&plane.normal(), &next.normal(), true);
        plane = next;
        if moved < REFINE_STOP_DEG {
            break;
        }
    }
    let refined_residual = residual(&plane);
    if refined_residual > initial_residual {
        return Ok(PlaneRefinement {
            plane: *initial,
            residual: initial_residual,
            initial_residual,
            rounds,
            status: RefinementStatus::Diverged,
        });
    }
    Ok(PlaneRefinement {
        plane,
        residual: refined_residual,
        initial_residual,
        rounds,
        status: RefinementStatus::Refined,
    })
}

/// Largest angle between successive steps for them to count as one direction.
const ACCEL_ALIGN_DEG: f64 = 30.0;
/// Longest extrapolation, in multiples of the last step.
const ACCEL_MAX_STEPS: f64 = 100.0;
/// Halvings tried when an extrapolated jump does not lower the objective.
const ACCEL_BACKTRACKS: usize = 4;

/// Extrapolates ICP along a consistent direction of motion in
/// (rotation vector, translation) space. Point-to-point ICP crawls along
/// shallow valleys; three aligned iterates let a line or parabola through
/// their objectives predict where the valley bottoms out.
#[derive(Default)]
struct Accelerator {
    /// Last three accepted iterates, oldest first.
    states: Vec<([f64; 6], f64)>,
}

impl Accelerator {
    fn record(&mut self, t: &RigidTransform, objective: f64) {
        if self.states.len() == 3 {
            self.states.remove(0);
        }
        self.states.push((to_params(t), objective));
    }

    /// An extrapolated jump breaks the run of aligned steps.
    fn restart(&mut self, t: &RigidTransform, objective: f64) {
        self.states.clear();
        self.record(t, objective);
    }

    /// Start point, unit direction and proposed step length.
    fn extrapolate(&self) -> Option<([f64; 6], [f64; 6], f64)> {
        let [(q0, e0), (q1, e1), (q2, e2)] = self.states[..] else {
            return None;
        };
        let d1 = sub(&q1, &q0);
        let d2 = sub(&q2, &q1);
        let (n1, n2) = (norm(&d1), norm(&d2));
        if n1 == 0.0 || n2 == 0.0 {
            return None;
        }
        let cos = dot(&d1, &d2) / (n1 * n2);
        if cos < ACCEL_ALIGN_DEG.to_radians().cos() {
            return None;
        }
        // objectives at arc-length positions -n1 - n2, -n2 and 0
        let (v0, v1) = (-(n1 + n2), -n2);
        let v_max = ACCEL_MAX_STEPS * n2;
        let slope = (e2 - e0) / (0.0 - v0);
        let v_linear = if slope < 0.0 { -e2 / slope } else { 0.0 };
        // parabola through the three points
        let a = ((e2 - e1) / (0.0 - v1) - (e1 - e0) / (v1 - v0)) / (0.0 - v0);
        let b = (e2 - e1) / (0.0 - v1) - a * (0.0 + v1);
        let v_parabola = if a > 0.0 { -b / (2.0 * a) } else { 0.0 };
        let step = if 0.0 < v_parabola && v_parabola < v_linear && v_linear < v_max {
            v_parabola
        } else if 0.0 < v_linear && v_linear < v_max && v_parabola < v_linear {
            v_linear
        } else if v_linear > 0.0 || v_parabola > 0.0 {
            v_max.min(v_linear.max(v_parabola))
        } else {
            return None;
        };
        Some((q2, std::array::from_fn(|i| d2[i] / n2), step))
    }
}

fn to_params(t: &RigidTransform) -> [f64; 6] {
    let r = Rotation3::from_matrix_unchecked(t.rotation).scaled_axis();
    [r.x, r.y, r.z, t.translation.x, t.translation.y, t.translation.z]
}

fn from_params(q: &[f64; 6]) -> RigidTransform {
    RigidTransform {
        rotation: Rotation3::from_scaled_axis(Vec3::new(q[0], q[1], q[2])).into_inner(),
        translation: Vec3::new(q[3], q[4], q[5]),
    }
}

fn sub(a: &[f64; 6], b: &[f64; 6]) -> [f64; 6] {
    std::array::from_fn(|i| a[i] - b[i])
}

fn dot(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64; 6]) -> f64 {
    dot(a, a).sqrt()
}

/// Least-squares mirror plane from the pairs `(x, y)` where `y` is the
/// nearest original point to `T(M x)`.
///
/// The normal is the dominant direction of the differences `x - y`; the
/// offset puts the plane through the mean of the pair midpoints.
fn fit_mirror_plane(
    source: &[Vec3],
    points: &[Vec3],
    index: &KdTree,
    plane: &SymmetryPlane,
    t: &RigidTransform,
) -> Option<SymmetryPlane> {
    let pairs: Vec<(Vec3, Vec3, f64)> = source
        .par_iter()
        .map(|x| {
            let (j, d2) = index.nearest(&t.apply(&plane.reflect_point(x))).unwrap();
            (*x, points[j], d2)
        })
        .collect();
    let mut d2s: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let mid = d2s.len() / 2;
    let median = *d2s.select_nth_unstable_by(mid, f64::total_cmp).1;
    let cutoff = PAIR_REJECT_FACTOR * PAIR_REJECT_FACTOR * median;

    let mut scatter = Matrix3::zeros();
    let mut mid_sum = Vec3::zeros();
    let mut kept = 0usize;
    let mut directional = 0usize;
    for (x, y, d2) in &pairs {
        if *d2 > cutoff {
            continue;
        }
        kept += 1;
        mid_sum += (x + y) / 2.0;
        let diff = x - y;
        if diff.norm() > MIN_PAIR_SEPARATION {
            scatter += diff * diff.transpose();
            directional += 1;
        }
    }
    if kept == 0 || directional == 0 {
        return None;
    }
    let eig = SymmetricEigen::new(scatter);
    let k = eig.eigenvalues.imax();
    let normal = UnitVector3::from_vector(eig.eigenvectors.column(k).into_owned()).ok()?;
    Some(SymmetryPlane::through_point(normal, &(mid_sum / kept as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rotation_about;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blob(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-0.6..0.6),
                    rng.random_range(-0.3..0.3),
                    rng.random_range(-0.45..0.45),
                )
            })
            .collect()
    }

    pub(crate) fn mirrored(n: usize, plane: &SymmetryPlane, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // asymmetric blob on one side, plus its mirror image
        let half: Vec<Vec3> = (0..n / 2)
            .map(|_| {
                let p = Vec3::new(
                    rng.random_range(0.05..0.9),
                    rng.random_range(-0.5..0.7),
                    rng.random_range(-0.3..0.4) + 0.2 * rng.random::<f64>().powi(3),
                );
                let n = plane.normal();
                // push onto the positive side of the plane
                p + n.as_vector() * (0.05 - plane.signed_distance(&p)).max(0.0)
            })
            .collect();
        half.iter()
            .copied()
            .chain(half.iter().map(|p| plane.reflect_point(p)))
            .collect()
    }

    #[test]
    fn identity_registration() {
        let cloud = blob(500, 1);
        let res = icp_register(&cloud, &cloud, &IcpConfig::default()).unwrap();
        assert_eq!(res.iterations_used, 1);
        assert!(res.converged);
        assert!(res.final_mean_distance < 1e-12);
        assert!((res.transform.rotation - Matrix3::identity()).amax() < 1e-9);
    }

    #[test]
    fn recovers_small_motion() {
        let target = blob(3000, 2);
        let truth = RigidTransform {
            rotation: rotation_about(&UnitVector3::Z, 5.0),
            translation: Vec3::new(0.01, 0.0, 0.0),
        };
        // target = truth(source)  =>  source = truth⁻¹(target)
        let source = target.transformed(&truth.inverse());
        let res = icp_register(&source, &target, &IcpConfig::default()).unwrap();
        let err = res.transform.compose(&truth.inverse());
        assert!(err.rotation_angle_deg() < 0.1, "{}", err.rotation_angle_deg());
        assert!((res.transform.translation - truth.translation).norm() < 1e-3);
        assert!(res.objective_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn trimming_resists_outliers() {
        let target = blob(2000, 3);
        let truth = RigidTransform {
            rotation: rotation_about(&UnitVector3::new(0.2, 0.3, 1.0).unwrap(), 6.0),
            translation: Vec3::new(0.02, -0.01, 0.0),
        };
        let mut src = target.transformed(&truth.inverse()).into_points();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // 20% outliers clustered off to one side
        for p in src.iter_mut().take(400) {
            *p = Vec3::new(
                rng.random_range(1.2..1.6),
                rng.random_range(0.4..0.8),
                rng.random_range(-0.2..0.2),
            );
        }
        let source = PointCloud::new(src).unwrap();
        let plain = icp_register(&source, &target, &IcpConfig::default()).unwrap();
        let trimmed = icp_register(
            &source,
            &target,
            &IcpConfig {
                trim_fraction: 0.2,
                ..Default::default()
            },
        )
        .unwrap();
        let err = |r: &IcpResult| r.transform.compose(&truth.inverse()).rotation_angle_deg();
        assert!(err(&trimmed) < 1.0, "trimmed {}", err(&trimmed));
        assert!(err(&plain) > 1.0, "plain {}", err(&plain));
        for r in [&plain, &trimmed] {
            assert!(r.objective_history.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn degenerate_inputs() {
        let line: PointCloud = (0..20).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let good = blob(50, 5);
        assert!(matches!(
            icp_register(&line, &good, &IcpConfig::default()),
            Err(Error::DegenerateCloud(_))
        ));
        let bad = IcpConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(matches!(icp_register(&good, &good, &bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn kabsch_recovers_rotation_not_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let from: Vec<Vec3> = (0..30)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
            .collect();
        let r = rotation_about(&UnitVector3::new(1.0, -1.0, 0.5).unwrap(), 123.0);
        let to: Vec<Vec3> = from.iter().map(|p| r * p + Vec3::new(1.0, 2.0, 3.0)).collect();
        let t = kabsch(&from, &to).unwrap();
        assert!((t.rotation - r).amax() < 1e-9);
        assert!(t.is_proper(1e-9));
        // mirrored target: best proper rotation, never det = -1
        let mirrored: Vec<Vec3> = from.iter().map(|p| Vec3::new(-p.x, p.y, p.z)).collect();
        assert!(kabsch(&from, &mirrored).unwrap().is_proper(1e-9));
    }

    #[test]
    fn exact_plane_is_fixed_point() {
        let truth = SymmetryPlane::through_origin(UnitVector3::X);
        let cloud = mirrored(2000, &truth, 7);
        let r = refine_plane(&cloud, &truth, &IcpConfig::default()).unwrap();
        assert!(geodesic_deg(&r.plane.normal(), &truth.normal(), true) < 1e-6f64.to_degrees());
        assert!(r.plane.offset().abs() < 1e-6);
        assert!(r.residual < 1e-6);
    }

    #[test]
    fn tilted_start_converges() {
        let truth = SymmetryPlane::through_origin(UnitVector3::X);
        let cloud = mirrored(4000, &truth, 8);
        let axis = UnitVector3::new(0.0, 0.6, 0.8).unwrap();
        let start = SymmetryPlane::through_origin(UnitVector3::X.rotated(&rotation_about(&axis, 10.0)));
        let r = refine_plane(&cloud, &start, &IcpConfig::default()).unwrap();
        assert_eq!(r.status, RefinementStatus::Refined);
        assert!(geodesic_deg(&r.plane.normal(), &truth.normal(), true) < 0.5);
        assert!(r.residual <= r.initial_residual);
    }

    #[test]
    fn noisy_mirror_within_two_degrees() {
        let truth = SymmetryPlane::new(UnitVector3::new(0.3, 0.8, -0.2).unwrap(), 0.05).unwrap();
        let clean = mirrored(5000, &truth, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let noise = Normal::new(0.0, 0.005).unwrap();
        let noisy: PointCloud = clean
            .points()
            .iter()
            .map(|p| p + Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng)))
            .collect();
        let axis = UnitVector3::new(1.0, 0.0, 0.0).unwrap();
        let start = SymmetryPlane::new(truth.normal().rotated(&rotation_about(&axis, 10.0)), 0.05).unwrap();
        let r = refine_plane(&noisy, &start, &IcpConfig::default()).unwrap();
        assert!(geodesic_deg(&r.plane.normal(), &truth.normal(), true) < 2.0);
    }

    #[test]
    fn diverged_refinement_keeps_initial() {
        // any refinement result is compared against the initial residual; a
        // residual that prefers the initial plane forces the Diverged path
        let truth = SymmetryPlane::through_origin(UnitVector3::X);
        let cloud = mirrored(1000, &truth, 11);
        let start = SymmetryPlane::through_origin(UnitVector3::new(1.0, 0.2, 0.0).unwrap());
        let index = cloud.index();
        let r = refine_plane_with(cloud.points(), &index, &start, &IcpConfig::default(), |p| {
            geodesic_deg(&p.normal(), &start.normal(), true)
        })
        .unwrap();
        assert_eq!(r.status, RefinementStatus::Diverged);
        assert_eq!(r.plane, start);
    }

    #[test]
    fn refinement_is_rotation_equivariant() {
        let truth = SymmetryPlane::through_origin(UnitVector3::new(1.0, 0.2, 0.1).unwrap());
        let cloud = mirrored(2000, &truth, 12);
        let start = SymmetryPlane::through_origin(UnitVector3::new(1.0, 0.3, -0.05).unwrap());
        let base = refine_plane(&cloud, &start, &IcpConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..3 {
            let axis = UnitVector3::new(rng.random(), rng.random(), rng.random()).unwrap();
            let t = RigidTransform::from_rotation(rotation_about(&axis, rng.random_range(10.0..170.0)));
            let moved = refine_plane(&cloud.transformed(&t), &start.transformed(&t), &IcpConfig::default()).unwrap();
            let expected = base.plane.transformed(&t);
            assert!((moved.plane.normal().as_vector() - expected.normal().as_vector()).norm() < 1e-5);
            assert!((moved.plane.offset() - expected.offset()).abs() < 1e-5);
        }
    }
}
