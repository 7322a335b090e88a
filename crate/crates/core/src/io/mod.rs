//! File formats: OBJ/PLY geometry, JSON plane documents, CSV reports.

mod document;
mod mesh;

pub use document::{
    metrics_csv, round9, summary_csv, write_metrics_csv, write_summary_csv, CollisionRecord, Flags, PlaneRecord, PlaneSetDocument,
    PoseRecord, SummaryRow, TargetsDocument, ViewPredictionDocument, FRAME_INPUT, FRAME_REFERENCE,
    NORMAL_REJECT_TOL, NORMAL_WARN_TOL, SCHEMA_VERSION,
};
pub use mesh::{load_cloud, load_geometry, load_mesh, save_cloud_ply, save_mesh_obj, Geometry};
