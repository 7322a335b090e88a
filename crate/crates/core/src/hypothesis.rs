//! Hypothesis-bank geometry for feed-forward detectors: training-target
//! generation from ground-truth normals and decoding of per-hypothesis
//! (probability, residual) outputs back into planes.

use crate::error::{Error, Result};
use crate::geom::{apply_residual, geodesic_deg, sample_hemisphere, SymmetryPlane, UnitQuaternion, UnitVector3};
use crate::prediction::{Prediction, PredictionSet};

pub const DEFAULT_HYPOTHESES: usize = 31;
pub const DEFAULT_PROB_THRESHOLD: f64 = 0.5;

/// Hypothesis normals whose dot product with a target is below this are
/// treated as exactly perpendicular.
const PERPENDICULAR_EPS: f64 = 1e-12;

/// Fixed normals spanning the upper hemisphere.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisBank {
    normals: Vec<UnitVector3>,
}

impl HypothesisBank {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("hypothesis count must be >= 1".into()));
        }
        Ok(HypothesisBank {
            normals: sample_hemisphere(n),
        })
    }

    pub fn normals(&self) -> &[UnitVector3] {
        &self.normals
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// Closest hypothesis under sign-invariant geodesic distance; ties go to
    /// the lower index.
    pub fn nearest(&self, n: &UnitVector3) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, h) in self.normals.iter().enumerate() {
            let d = geodesic_deg(h, n, true);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

impl Default for HypothesisBank {
    fn default() -> Self {
        Self::new(DEFAULT_HYPOTHESES).expect("default bank size is positive")
    }
}

/// Two ground-truth normals fell to the same hypothesis; the farther one
/// produced no target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionWarning {
    pub hypothesis: usize,
    pub kept: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTargets {
    /// `Some(residual)` for positive hypotheses.
    pub targets: Vec<Option<UnitQuaternion>>,
    /// Hypothesis index each ground-truth normal was matched to, `None` for
    /// the losers of a collision.
    pub assignment: Vec<Option<usize>>,
    pub collisions: Vec<CollisionWarning>,
}

impl TrainingTargets {
    pub fn labels(&self) -> Vec<bool> {
        self.targets.iter().map(Option::is_some).collect()
    }

    pub fn positives(&self) -> usize {
        self.targets.iter().filter(|t| t.is_some()).count()
    }
}

/// Matches each ground-truth normal to its nearest hypothesis and records the
/// shortest-arc rotation from hypothesis to ground truth.
pub fn assign_ground_truth(bank: &HypothesisBank, gt: &[UnitVector3]) -> Result<TrainingTargets> {
    let mut owner: Vec<Option<(usize, f64)>> = vec![None; bank.len()];
    let mut assignment = vec![None; gt.len()];
    let mut collisions = Vec::new();
    for (gi, g) in gt.iter().enumerate() {
        let (h, d) = bank.nearest(g);
        match owner[h] {
            None => {
                owner[h] = Some((gi, d));
                assignment[gi] = Some(h);
            }
            Some((prev, pd)) => {
                let (kept, dropped) = if d < pd { (gi, prev) } else { (prev, gi) };
                if kept == gi {
                    owner[h] = Some((gi, d));
                    assignment[prev] = None;
                    assignment[gi] = Some(h);
                }
                collisions.push(CollisionWarning {
                    hypothesis: h,
                    kept,
                    dropped,
                });
            }
        }
    }
    let targets = owner
        .iter()
        .enumerate()
        .map(|(h, o)| {
            o.map(|(gi, _)| residual_between(&bank.normals()[h], &gt[gi]))
                .transpose()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainingTargets {
        targets,
        assignment,
        collisions,
    })
}

/// Shortest-arc rotation taking `hypothesis` to whichever of `±gt` lies
/// within 90 degrees of it.
pub fn residual_between(hypothesis: &UnitVector3, gt: &UnitVector3) -> Result<UnitQuaternion> {
    let dot = hypothesis.dot(gt);
    if dot.abs() < PERPENDICULAR_EPS {
        return Err(Error::AntipodalAmbiguity);
    }
    let target = if dot < 0.0 { gt.flipped() } else { *gt };
    UnitQuaternion::shortest_arc(hypothesis, &target).ok_or(Error::AntipodalAmbiguity)
}

/// Decodes per-hypothesis classifier outputs: every hypothesis at or above
/// `prob_threshold` yields a plane through the origin along its corrected
/// normal, with the probability as confidence.
pub fn reconstruct_predictions(
    bank: &HypothesisBank,
    probabilities: &[f64],
    residuals: &[UnitQuaternion],
    prob_threshold: f64,
) -> Result<PredictionSet> {
    if probabilities.len() != bank.len() || residuals.len() != bank.len() {
        return Err(Error::InvalidConfig(format!(
            "expected {} probabilities and residuals, got {} and {}",
            bank.len(),
            probabilities.len(),
            residuals.len()
        )));
    }
    if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidConfig(format!("probability {p} outside [0, 1]")));
    }
    Ok(bank
        .normals()
        .iter()
        .zip(probabilities.iter().zip(residuals))
        .filter(|(_, (p, _))| **p >= prob_threshold)
        .map(|(h, (p, q))| Prediction {
            plane: SymmetryPlane::through_origin(apply_residual(h, q)),
            confidence: *p,
        })
        .collect())
}

/// Dense decoder inputs equivalent to a set of training targets: probability
/// 1 and the stored residual on positives, 0 and identity elsewhere.
pub fn targets_as_outputs(targets: &TrainingTargets) -> (Vec<f64>, Vec<UnitQuaternion>) {
    targets
        .targets
        .iter()
        .map(|t| match t {
            Some(q) => (1.0, *q),
            None => (0.0, UnitQuaternion::IDENTITY),
        })
        .unzip()
}
