//! Command-line front end for the `symmetry` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::aggregate::{aggregate_views, AggregationConfig};
use crate::detector::{detect_planes, DetectorConfig};
use crate::error::{Error, Result};
use crate::geom::UnitVector3;
use crate::hypothesis::{assign_ground_truth, HypothesisBank, DEFAULT_HYPOTHESES};
use crate::io::{
    load_cloud, load_geometry, load_mesh, metrics_csv, save_cloud_ply, write_summary_csv, Flags, Geometry,
    PlaneRecord, PlaneSetDocument, SummaryRow, TargetsDocument, ViewPredictionDocument, FRAME_INPUT,
};
use crate::metrics::{evaluate, Matching, DEFAULT_THRESHOLDS_DEG};
use crate::pointcloud::sample_surface;
use crate::registration::IcpConfig;
use crate::symmetrize::{align_plane, densify};

#[derive(Debug, Parser)]
#[command(name = "symmetry", version, about = "Reflection-symmetry detection and evaluation")]
pub struct Cli {
    /// Report failures as a JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct DetectorArgs {
    /// Surface samples per mesh.
    #[arg(long, default_value_t = 50_000)]
    pub points: usize,
    /// Candidate normals scanned over the hemisphere.
    #[arg(long, default_value_t = 31)]
    pub candidates: usize,
    /// Residual gate for returned planes (unit-sphere units).
    #[arg(long, default_value_t = 0.02)]
    pub gate: f64,
    /// Planes closer than this angle are merged into one.
    #[arg(long, default_value_t = 10.0)]
    pub merge_deg: f64,
    /// Seed for surface sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl DetectorArgs {
    fn config(&self) -> DetectorConfig {
        DetectorConfig {
            n_points: self.points,
            n_candidates: self.candidates,
            chamfer_gate: self.gate,
            merge_threshold_deg: self.merge_deg,
            ..Default::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect the reflection planes of a mesh.
    Detect {
        /// OBJ or PLY mesh.
        mesh: PathBuf,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Plane document path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cluster per-view predictions into planes of the reference view.
    Aggregate {
        /// Per-view prediction documents.
        #[arg(required = true)]
        views: Vec<PathBuf>,
        /// Clustering cut-off angle.
        #[arg(long, default_value_t = 30.0)]
        threshold_deg: f64,
        /// Clusters with fewer members are dropped.
        #[arg(long, default_value_t = 2)]
        min_support: usize,
        /// Plane document path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score predicted planes against ground truth.
    Evaluate {
        /// Predicted plane document.
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth plane document.
        #[arg(long)]
        gt: PathBuf,
        /// Match thresholds in degrees, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS_DEG)]
        thresholds: Vec<f64>,
        /// Count matches one-to-one instead of nearest-neighbor.
        #[arg(long)]
        one_to_one: bool,
        /// Metrics CSV path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Resolve the offset of a plane direction against a cloud or mesh.
    Align {
        /// Point cloud (PLY) or mesh (OBJ/PLY with faces).
        input: PathBuf,
        /// Plane normal as `x,y,z`.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        direction: Vec<f64>,
        /// Surface samples when the input is a mesh.
        #[arg(long, default_value_t = 50_000)]
        points: usize,
        /// Seed for surface sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plane document path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Append mirrored copies of randomly chosen points.
    Densify {
        /// PLY point cloud.
        cloud: PathBuf,
        /// Plane document; its first plane is used.
        #[arg(long)]
        plane: PathBuf,
        /// Share of points whose reflection is appended, in [0, 1].
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        /// Seed for choosing the mirrored points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output PLY path.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Detect planes for every OBJ/PLY file in a directory.
    GtGen {
        /// Directory scanned (not recursively) for meshes.
        dir: PathBuf,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Receives one plane document per object and summary.csv.
        #[arg(short, long, default_value = "gt")]
        output: PathBuf,
    },
    /// Convert ground-truth planes into per-hypothesis training targets.
    HypoTargets {
        /// Ground-truth plane document.
        #[arg(long)]
        gt: PathBuf,
        /// Number of hemisphere hypotheses.
        #[arg(long, default_value_t = DEFAULT_HYPOTHESES)]
        n: usize,
        /// Targets document path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json_errors = cli.json_errors;
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command)),
            Err(e) => Err(Error::InvalidConfig(format!("thread pool: {e}"))),
        },
        None => execute(cli.command),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e, json_errors);
            1
        }
    }
}

fn report_error(e: &Error, json: bool) {
    if json {
        let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
        eprintln!("{body}");
    } else {
        eprintln!("error: {e}");
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn load_planes(path: &Path) -> Result<Vec<crate::prediction::Prediction>> {
    let (preds, warnings) = PlaneSetDocument::load(path)?.predictions()?;
    warn_all(&warnings);
    Ok(preds)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Detect {
            mesh,
            detector,
            output,
        } => {
            let mesh = load_mesh(&mesh)?;
            let set = detect_planes(&mesh, &detector.config(), detector.seed)?;
            emit(output.as_deref(), &PlaneSetDocument::from_detection(&set).to_json()?)
        }
        Command::Aggregate {
            views,
            threshold_deg,
            min_support,
            output,
        } => {
            let per_view = views
                .iter()
                .map(|p| {
                    let doc = ViewPredictionDocument::load(p)?;
                    let (preds, warnings) = doc.view_predictions()?;
                    warn_all(&warnings);
                    Ok((preds, doc.pose()))
                })
                .collect::<Result<Vec<_>>>()?;
            let cfg = AggregationConfig {
                cluster_threshold_deg: threshold_deg,
                min_cluster_size: min_support,
                ..Default::default()
            };
            let clusters = aggregate_views(&per_view, &cfg)?;
            emit(output.as_deref(), &PlaneSetDocument::from_clusters(&clusters).to_json()?)
        }
        Command::Evaluate {
            pred,
            gt,
            thresholds,
            one_to_one,
            output,
        } => {
            let normals = |path: &Path| -> Result<Vec<UnitVector3>> {
                Ok(load_planes(path)?.iter().map(|p| p.plane.normal()).collect())
            };
            let matching = if one_to_one { Matching::OneToOne } else { Matching::Nearest };
            let report = evaluate(&normals(&pred)?, &normals(&gt)?, &thresholds, matching)?;
            let id = pred
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            emit(output.as_deref(), &metrics_csv(&[(id, report)])?)
        }
        Command::Align {
            input,
            direction,
            points,
            seed,
            output,
        } => {
            let [x, y, z] = direction[..] else {
                return Err(Error::InvalidConfig(format!(
                    "--direction needs 3 components, got {}",
                    direction.len()
                )));
            };
            let direction = UnitVector3::new(x, y, z)?;
            let cloud = match load_geometry(&input)? {
                Geometry::Cloud(c) => c,
                Geometry::Mesh(m) => sample_surface(&m, points, seed)?,
            };
            let aligned = align_plane(&cloud, direction, &IcpConfig::default())?;
            let doc = PlaneSetDocument::new(
                FRAME_INPUT,
                vec![PlaneRecord {
                    normal: aligned.plane.normal().to_array(),
                    offset: aligned.plane.offset(),
                    confidence: 1.0,
                    residual: Some(aligned.residual),
                }],
                Flags::default(),
            );
            emit(output.as_deref(), &doc.to_json()?)
        }
        Command::Densify {
            cloud,
            plane,
            fraction,
            seed,
            output,
        } => {
            let cloud = load_cloud(&cloud)?;
            let plane = load_planes(&plane)?
                .first()
                .map(|p| p.plane)
                .ok_or_else(|| Error::Document("plane document has no planes".into()))?;
            save_cloud_ply(&output, &densify(&cloud, &plane, fraction, seed)?)
        }
        Command::GtGen {
            dir,
            detector,
            output,
        } => gt_gen(&dir, &detector, &output),
        Command::HypoTargets { gt, n, output } => {
            let normals: Vec<UnitVector3> = load_planes(&gt)?.iter().map(|p| p.plane.normal()).collect();
            let targets = assign_ground_truth(&HypothesisBank::new(n)?, &normals)?;
            for c in &targets.collisions {
                eprintln!(
                    "warning: ground-truth planes {} and {} share hypothesis {}; kept {}",
                    c.kept.min(c.dropped),
                    c.kept.max(c.dropped),
                    c.hypothesis,
                    c.kept
                );
            }
            emit(output.as_deref(), &TargetsDocument::new(&targets).to_json()?)
        }
    }
}

fn gt_gen(dir: &Path, detector: &DetectorArgs, output: &Path) -> Result<()> {
    let cfg = detector.config();
    cfg.validate()?;
    let mut inputs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("obj") || e.eq_ignore_ascii_case("ply"))
        })
        .collect();
    inputs.sort();
    std::fs::create_dir_all(output).map_err(|e| Error::io(output, e))?;

    let rows: Vec<SummaryRow> = inputs
        .par_iter()
        .map(|path| {
            let object_id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let outcome = load_mesh(path)
                .and_then(|mesh| detect_planes(&mesh, &cfg, detector.seed))
                .and_then(|set| {
                    PlaneSetDocument::from_detection(&set).save(output.join(format!("{object_id}.json")))?;
                    Ok(set)
                });
            match outcome {
                Ok(set) => SummaryRow {
                    object_id,
                    n_planes: set.len(),
                    min_residual: set.planes.iter().map(|p| p.residual).reduce(f64::min),
                    error: None,
                },
                Err(e) => {
                    eprintln!("error: {object_id}: {e}");
                    SummaryRow {
                        object_id,
                        n_planes: 0,
                        min_residual: None,
                        error: Some(format!("{}: {e}", e.kind())),
                    }
                }
            }
        })
        .collect();
    write_summary_csv(output.join("summary.csv"), &rows)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(Error::Document(format!("{failed} of {} objects failed", rows.len())));
    }
    Ok(())
}
