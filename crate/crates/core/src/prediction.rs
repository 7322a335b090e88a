use crate::geom::SymmetryPlane;

/// One detected plane with the detector's confidence in it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub plane: SymmetryPlane,
    pub confidence: f64,
}

/// Predictions from a single view or a single detector run.
pub type PredictionSet = Vec<Prediction>;
