//! JSON plane documents and CSV reports.
//!
//! Floats are rounded to 9 significant digits before writing, and fields are
//! written in declaration order, so `save -> load -> save` reproduces the
//! file byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregate::{ClusteredPrediction, ViewPose};
use crate::detector::DetectedPlaneSet;
use crate::error::{Error, Result};
use crate::geom::{SymmetryPlane, UnitQuaternion, UnitVector3, Vec3};
use crate::hypothesis::{reconstruct_predictions, HypothesisBank, TrainingTargets, DEFAULT_PROB_THRESHOLD};
use crate::metrics::MetricsReport;
use crate::prediction::{Prediction, PredictionSet};

use super::mesh::write_file;

pub const SCHEMA_VERSION: &str = "1.0";

/// Normals further than this from unit length are re-normalized with a warning.
pub const NORMAL_WARN_TOL: f64 = 1e-6;
/// Normals further than this from unit length are rejected.
pub const NORMAL_REJECT_TOL: f64 = 1e-3;

/// Frame tag for planes expressed in the caller's input coordinates.
pub const FRAME_INPUT: &str = "input";
/// Frame tag for planes expressed in the aggregation reference view.
pub const FRAME_REFERENCE: &str = "reference";

/// Rounds to 9 significant digits.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneRecord {
    pub normal: [f64; 3],
    pub offset: f64,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl PlaneRecord {
    pub fn from_prediction(p: &Prediction) -> Self {
        PlaneRecord {
            normal: p.plane.normal().to_array(),
            offset: p.plane.offset(),
            confidence: p.confidence,
            residual: None,
        }
    }

    fn rounded(&self) -> Self {
        PlaneRecord {
            normal: self.normal.map(round9),
            offset: round9(self.offset),
            confidence: round9(self.confidence),
            residual: self.residual.map(round9),
        }
    }

    /// Validates the record, re-normalizing a slightly off-unit normal and
    /// reporting that in `warnings`.
    pub fn to_prediction(&self, warnings: &mut Vec<String>) -> Result<Prediction> {
        let v = Vec3::from(self.normal);
        let len = v.norm();
        if !len.is_finite() || (len - 1.0).abs() > NORMAL_REJECT_TOL {
            return Err(Error::Document(format!(
                "normal {:?} has length {len}, more than {NORMAL_REJECT_TOL} from 1",
                self.normal
            )));
        }
        if (len - 1.0).abs() > NORMAL_WARN_TOL {
            warnings.push(format!("normal {:?} had length {len}; re-normalized", self.normal));
        }
        if !self.confidence.is_finite() || !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Document(format!("confidence {} outside [0, 1]", self.confidence)));
        }
        if let Some(r) = self.residual {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Document(format!("residual {r} is not a finite non-negative number")));
            }
        }
        let plane = SymmetryPlane::new(UnitVector3::from_vector(v)?, self.offset)?;
        Ok(Prediction {
            plane,
            confidence: self.confidence,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    pub ubiquitous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSetDocument {
    pub schema_version: String,
    pub frame: String,
    pub planes: Vec<PlaneRecord>,
    #[serde(default)]
    pub flags: Flags,
}

fn check_version(v: &str) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Document(format!(
            "schema_version {v:?} is not supported (expected {SCHEMA_VERSION:?})"
        )));
    }
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl PlaneSetDocument {
    pub fn new(frame: impl Into<String>, planes: Vec<PlaneRecord>, flags: Flags) -> Self {
        PlaneSetDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            frame: frame.into(),
            planes,
            flags,
        }
    }

    /// Detector output in the input frame; confidence is the detector score.
    pub fn from_detection(set: &DetectedPlaneSet) -> Self {
        let planes = set
            .planes
            .iter()
            .map(|d| PlaneRecord {
                normal: d.plane.normal().to_array(),
                offset: d.plane.offset(),
                confidence: d.score,
                residual: Some(d.residual),
            })
            .collect();
        Self::new(FRAME_INPUT, planes, Flags { ubiquitous: set.ubiquitous })
    }

    pub fn from_predictions(frame: impl Into<String>, preds: &[Prediction]) -> Self {
        Self::new(frame, preds.iter().map(PlaneRecord::from_prediction).collect(), Flags::default())
    }

    /// Aggregated clusters; confidence is the cluster's mean confidence.
    pub fn from_clusters(clusters: &[ClusteredPrediction]) -> Self {
        let planes = clusters
            .iter()
            .map(|c| PlaneRecord {
                normal: c.plane.normal().to_array(),
                offset: c.plane.offset(),
                confidence: c.mean_confidence.clamp(0.0, 1.0),
                residual: None,
            })
            .collect();
        Self::new(FRAME_REFERENCE, planes, Flags::default())
    }

    pub fn to_json(&self) -> Result<String> {
        let rounded = PlaneSetDocument {
            planes: self.planes.iter().map(PlaneRecord::rounded).collect(),
            ..self.clone()
        };
        to_pretty_json(&rounded)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PlaneSetDocument = serde_json::from_str(text)?;
        check_version(&doc.schema_version)?;
        Ok(doc)
    }

    /// Validated planes, with any re-normalization warnings.
    pub fn predictions(&self) -> Result<(PredictionSet, Vec<String>)> {
        let mut warnings = Vec::new();
        let preds = self
            .planes
            .iter()
            .map(|p| p.to_prediction(&mut warnings))
            .collect::<Result<_>>()?;
        Ok((preds, warnings))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read_text(path.as_ref())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

/// Predictions from one generated view, with the pose needed to bring them
/// into the reference frame. Either explicit planes or dense per-hypothesis
/// classifier outputs (or both) may be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewPredictionDocument {
    pub schema_version: String,
    pub pose: PoseRecord,
    #[serde(default)]
    pub predictions: Vec<PlaneRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_hypotheses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_quaternions: Option<Vec<[f64; 4]>>,
}

impl ViewPredictionDocument {
    pub fn new(pose: ViewPose, preds: &[Prediction]) -> Self {
        ViewPredictionDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            pose: PoseRecord {
                azimuth_deg: pose.azimuth_deg,
                elevation_deg: pose.elevation_deg,
            },
            predictions: preds.iter().map(PlaneRecord::from_prediction).collect(),
            n_hypotheses: None,
            probabilities: None,
            residual_quaternions: None,
        }
    }

    pub fn with_hypothesis_outputs(mut self, probabilities: Vec<f64>, residuals: &[UnitQuaternion]) -> Self {
        self.n_hypotheses = Some(probabilities.len());
        self.probabilities = Some(probabilities);
        self.residual_quaternions = Some(residuals.iter().map(UnitQuaternion::to_array).collect());
        self
    }

    pub fn pose(&self) -> ViewPose {
        ViewPose::new(self.pose.azimuth_deg, self.pose.elevation_deg)
    }

    fn validate(&self) -> Result<()> {
        check_version(&self.schema_version)?;
        match (&self.probabilities, &self.residual_quaternions) {
            (None, None) => {}
            (Some(p), Some(q)) => {
                let n = self
                    .n_hypotheses
                    .ok_or_else(|| Error::Document("hypothesis arrays need n_hypotheses".into()))?;
                if p.len() != n || q.len() != n {
                    return Err(Error::Document(format!(
                        "n_hypotheses is {n} but probabilities has {} and residual_quaternions {} entries",
                        p.len(),
                        q.len()
                    )));
                }
            }
            _ => {
                return Err(Error::Document(
                    "probabilities and residual_quaternions must be given together".into(),
                ))
            }
        }
        if !self.pose.azimuth_deg.is_finite() || !self.pose.elevation_deg.is_finite() {
            return Err(Error::Document("pose angles must be finite".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let rounded = ViewPredictionDocument {
            pose: PoseRecord {
                azimuth_deg: round9(self.pose.azimuth_deg),
                elevation_deg: round9(self.pose.elevation_deg),
            },
            predictions: self.predictions.iter().map(PlaneRecord::rounded).collect(),
            probabilities: self.probabilities.as_ref().map(|p| p.iter().copied().map(round9).collect()),
            residual_quaternions: self
                .residual_quaternions
                .as_ref()
                .map(|q| q.iter().map(|a| a.map(round9)).collect()),
            ..self.clone()
        };
        to_pretty_json(&rounded)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ViewPredictionDocument = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    /// View-frame predictions: the explicit planes followed by those decoded
    /// from the hypothesis outputs at the default probability threshold.
    pub fn view_predictions(&self) -> Result<(PredictionSet, Vec<String>)> {
        let mut warnings = Vec::new();
        let mut preds: PredictionSet = self
            .predictions
            .iter()
            .map(|p| p.to_prediction(&mut warnings))
            .collect::<Result<_>>()?;
        if let (Some(n), Some(p), Some(q)) = (self.n_hypotheses, &self.probabilities, &self.residual_quaternions) {
            let bank = HypothesisBank::new(n)?;
            let quats = q
                .iter()
                .map(|a| UnitQuaternion::new(a[0], a[1], a[2], a[3]))
                .collect::<Result<Vec<_>>>()?;
            preds.extend(reconstruct_predictions(&bank, p, &quats, DEFAULT_PROB_THRESHOLD)?);
        }
        Ok((preds, warnings))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read_text(path.as_ref())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionRecord {
    pub hypothesis: usize,
    pub kept: usize,
    pub dropped: usize,
}

/// Per-hypothesis training targets for a set of ground-truth planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsDocument {
    pub schema_version: String,
    pub n_hypotheses: usize,
    pub labels: Vec<bool>,
    /// Identity on negatives.
    pub residual_quaternions: Vec<[f64; 4]>,
    /// Hypothesis index of each ground-truth plane, null if it lost a collision.
    pub assignment: Vec<Option<usize>>,
    pub collisions: Vec<CollisionRecord>,
}

impl TargetsDocument {
    pub fn new(targets: &TrainingTargets) -> Self {
        TargetsDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            n_hypotheses: targets.targets.len(),
            labels: targets.labels(),
            residual_quaternions: targets
                .targets
                .iter()
                .map(|t| t.unwrap_or(UnitQuaternion::IDENTITY).to_array())
                .collect(),
            assignment: targets.assignment.clone(),
            collisions: targets
                .collisions
                .iter()
                .map(|c| CollisionRecord {
                    hypothesis: c.hypothesis,
                    kept: c.kept,
                    dropped: c.dropped,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let rounded = TargetsDocument {
            residual_quaternions: self.residual_quaternions.iter().map(|a| a.map(round9)).collect(),
            ..self.clone()
        };
        to_pretty_json(&rounded)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TargetsDocument = serde_json::from_str(text)?;
        check_version(&doc.schema_version)?;
        if doc.labels.len() != doc.n_hypotheses || doc.residual_quaternions.len() != doc.n_hypotheses {
            return Err(Error::Document("target arrays do not match n_hypotheses".into()));
        }
        Ok(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Document(format!("csv: {e}"))
}

fn csv_text(records: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.write_record(&r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Document(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields is UTF-8"))
}

fn fmt9(x: f64) -> String {
    round9(x).to_string()
}

/// One evaluation row per entry: `id, n_pred, n_gt, P@t, R@t, F@t ... , gd_deg`.
pub fn metrics_csv(rows: &[(String, MetricsReport)]) -> Result<String> {
    let thresholds: Vec<f64> = rows
        .first()
        .map(|(_, r)| r.scores.iter().map(|s| s.threshold_deg).collect())
        .unwrap_or_default();
    let mut header = vec!["id".to_string(), "n_pred".into(), "n_gt".into()];
    for t in &thresholds {
        for m in ["P", "R", "F"] {
            header.push(format!("{m}@{t}"));
        }
    }
    header.push("gd_deg".into());
    let body = rows.iter().map(|(id, r)| {
        let mut rec = vec![id.clone(), r.n_pred.to_string(), r.n_gt.to_string()];
        for s in &r.scores {
            rec.extend([fmt9(s.precision), fmt9(s.recall), fmt9(s.f)]);
        }
        rec.push(fmt9(r.gd_deg));
        rec
    });
    csv_text(std::iter::once(header).chain(body))
}

pub fn write_metrics_csv(path: impl AsRef<Path>, rows: &[(String, MetricsReport)]) -> Result<()> {
    write_file(path.as_ref(), metrics_csv(rows)?.as_bytes())
}

/// Outcome of ground-truth generation for one object.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub object_id: String,
    pub n_planes: usize,
    pub min_residual: Option<f64>,
    pub error: Option<String>,
}

/// `object_id, n_planes, min_residual, error`; the last two are empty when
/// not applicable.
pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let header = ["object_id", "n_planes", "min_residual", "error"].map(String::from).to_vec();
    let body = rows.iter().map(|r| {
        vec![
            r.object_id.clone(),
            r.n_planes.to_string(),
            r.min_residual.map(fmt9).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ]
    });
    csv_text(std::iter::once(header).chain(body))
}

pub fn write_summary_csv(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    write_file(path.as_ref(), summary_csv(rows)?.as_bytes())
}
