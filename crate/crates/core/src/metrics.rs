//! Plane-set evaluation: F-score at geodesic thresholds and average
//! geodesic distance, plus the random-guess baseline.

use rand_distr::{Distribution, UnitSphere};

use crate::error::{Error, Result};
use crate::geom::{geodesic_deg, UnitVector3};
use crate::rng::{self, Stream};

pub const DEFAULT_THRESHOLDS_DEG: [f64; 4] = [5.0, 15.0, 30.0, 50.0];

/// Distance charged to a prediction or ground truth that has nothing to be
/// matched against: the largest possible sign-invariant angle.
pub const UNMATCHED_DEG: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Matching {
    /// Each element is matched to its nearest counterpart; several
    /// predictions may share one ground truth.
    #[default]
    Nearest,
    /// Maximum one-to-one matching among pairs under the threshold. Only the
    /// F-scores change; the geodesic averages stay nearest-neighbor.
    OneToOne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdScore {
    pub threshold_deg: f64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scores: Vec<ThresholdScore>,
    /// Mean distance from each prediction to its closest ground truth.
    pub theta_p: f64,
    /// Mean distance from each ground truth to its closest prediction.
    pub theta_r: f64,
    /// `(theta_p + theta_r) / 2`.
    pub gd_deg: f64,
    pub n_pred: usize,
    pub n_gt: usize,
}

impl MetricsReport {
    pub fn at(&self, threshold_deg: f64) -> Option<&ThresholdScore> {
        self.scores.iter().find(|s| s.threshold_deg == threshold_deg)
    }
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Scores predicted normals against ground truth. Distances are
/// sign-invariant; a pair matches when strictly closer than the threshold.
pub fn evaluate(
    pred: &[UnitVector3],
    gt: &[UnitVector3],
    thresholds_deg: &[f64],
    matching: Matching,
) -> Result<MetricsReport> {
    if gt.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let mut thresholds = thresholds_deg.to_vec();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    // dist[i][j]: prediction i to ground truth j
    let dist: Vec<Vec<f64>> = pred
        .iter()
        .map(|u| gt.iter().map(|v| geodesic_deg(u, v, true)).collect())
        .collect();
    let pred_nearest: Vec<f64> = dist
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let gt_nearest: Vec<f64> = (0..gt.len())
        .map(|j| dist.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min))
        .collect();

    let scores = thresholds
        .iter()
        .map(|&phi| {
            let (precision, recall) = if pred.is_empty() {
                (0.0, 0.0)
            } else {
                match matching {
                    Matching::Nearest => (
                        fraction_below(&pred_nearest, phi),
                        fraction_below(&gt_nearest, phi),
                    ),
                    Matching::OneToOne => {
                        let m = max_matching(&dist, gt.len(), phi) as f64;
                        (m / pred.len() as f64, m / gt.len() as f64)
                    }
                }
            };
            ThresholdScore {
                threshold_deg: phi,
                precision,
                recall,
                f: harmonic_mean(precision, recall),
            }
        })
        .collect();

    let (theta_p, theta_r) = if pred.is_empty() {
        (UNMATCHED_DEG, UNMATCHED_DEG)
    } else {
        (mean(&pred_nearest), mean(&gt_nearest))
    };
    Ok(MetricsReport {
        scores,
        theta_p,
        theta_r,
        gd_deg: (theta_p + theta_r) / 2.0,
        n_pred: pred.len(),
        n_gt: gt.len(),
    })
}

fn fraction_below(d: &[f64], phi: f64) -> f64 {
    d.iter().filter(|&&x| x < phi).count() as f64 / d.len() as f64
}

fn mean(d: &[f64]) -> f64 {
    d.iter().sum::<f64>() / d.len() as f64
}

/// Maximum bipartite matching over edges with distance below `phi`
/// (augmenting paths; plane sets are small).
fn max_matching(dist: &[Vec<f64>], n_gt: usize, phi: f64) -> usize {
    fn augment(
        i: usize,
        dist: &[Vec<f64>],
        phi: f64,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..owner.len() {
            if dist[i][j] < phi && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, dist, phi, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; n_gt];
    let mut count = 0;
    for i in 0..dist.len() {
        let mut seen = vec![false; n_gt];
        if augment(i, dist, phi, &mut seen, &mut owner) {
            count += 1;
        }
    }
    count
}

/// `n` independent normals, uniform over directions, folded onto the upper
/// hemisphere.
pub fn random_guess(n: usize, seed: u64) -> Vec<UnitVector3> {
    let mut rng = rng::stream(seed, Stream::RandomGuess);
    (0..n)
        .map(|_| {
            let [x, y, z]: [f64; 3] = UnitSphere.sample(&mut rng);
            UnitVector3::new(x, y, z)
                .expect("unit-sphere sample")
                .to_upper_hemisphere()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rotation_about;

    fn deg_from_x(angle: f64) -> UnitVector3 {
        UnitVector3::X.rotated(&rotation_about(&UnitVector3::Z, angle))
    }

    #[test]
    fn perfect_match() {
        let r = evaluate(&[UnitVector3::X], &[UnitVector3::X], &DEFAULT_THRESHOLDS_DEG, Matching::Nearest).unwrap();
        assert_eq!(r.at(5.0).unwrap().f, 1.0);
        assert_eq!(r.gd_deg, 0.0);
    }

    #[test]
    fn orthogonal_miss() {
        let r = evaluate(&[UnitVector3::X], &[UnitVector3::Y], &DEFAULT_THRESHOLDS_DEG, Matching::Nearest).unwrap();
        assert_eq!(r.at(50.0).unwrap().f, 0.0);
        assert!((r.gd_deg - 90.0).abs() < 1e-12);
    }

    #[test]
    fn partial_recall_example() {
        let a = UnitVector3::X;
        let b = deg_from_x(40.0);
        let r = evaluate(&[a], &[a, b], &[30.0], Matching::Nearest).unwrap();
        let s = r.at(30.0).unwrap();
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 0.5);
        assert!((s.f - 2.0 / 3.0).abs() < 1e-15);
        // theta_p = 0, theta_r = (0 + 40) / 2 = 20, so gd = (0 + 20) / 2
        assert_eq!(r.theta_p, 0.0);
        assert!((r.theta_r - 20.0).abs() < 1e-9);
        assert!((r.gd_deg - 10.0).abs() < 1e-9, "{}", r.gd_deg);
    }

    #[test]
    fn empty_cases() {
        assert!(matches!(
            evaluate(&[UnitVector3::X], &[], &[5.0], Matching::Nearest),
            Err(Error::EmptyGroundTruth)
        ));
        let r = evaluate(&[], &[UnitVector3::X], &DEFAULT_THRESHOLDS_DEG, Matching::Nearest).unwrap();
        assert!(r.scores.iter().all(|s| s.f == 0.0 && s.precision == 0.0 && s.recall == 0.0));
        assert_eq!(r.gd_deg, 90.0);
    }

    #[test]
    fn one_to_one_penalizes_duplicates() {
        let a = UnitVector3::X;
        let a2 = deg_from_x(1.0);
        let near = evaluate(&[a, a2], &[a], &[5.0], Matching::Nearest).unwrap();
        let strict = evaluate(&[a, a2], &[a], &[5.0], Matching::OneToOne).unwrap();
        assert_eq!(near.at(5.0).unwrap().precision, 1.0);
        assert_eq!(strict.at(5.0).unwrap().precision, 0.5);
        assert_eq!(strict.gd_deg, near.gd_deg);
    }

    #[test]
    fn random_guess_is_seeded_hemisphere() {
        let a = random_guess(1, 99);
        assert_eq!(a, random_guess(1, 99));
        assert_ne!(a, random_guess(1, 100));
        assert!(random_guess(1000, 1).iter().all(|v| v.z() >= 0.0));
    }
}
