//! Runs the detector on the built-in analytic shapes and prints what it finds.
//!
//! `cargo run --release --example detect_shapes [n_candidates]`

use std::time::Instant;

use symmetry_core::detector::{detect_planes, DetectorConfig};
use symmetry_core::shapes;

fn main() {
    let n_candidates = std::env::args()
        .nth(1)
        .map_or(31, |s| s.parse().expect("candidate count"));
    let cfg = DetectorConfig {
        n_candidates,
        ..Default::default()
    };
    let cases = [
        ("cube", shapes::unit_cube()),
        ("box", shapes::axis_box(0.5, 0.35, 0.22)),
        ("L-frustum", shapes::l_frustum()),
        ("scalene tetrahedron", shapes::scalene_tetrahedron()),
        ("sphere", shapes::uv_sphere(32, 64)),
    ];
    for (name, mesh) in cases {
        let start = Instant::now();
        let found = detect_planes(&mesh, &cfg, 0).expect("detection");
        println!(
            "{name}: {} planes{} in {:.2}s",
            found.len(),
            if found.ubiquitous { " (symmetric about every plane)" } else { "" },
            start.elapsed().as_secs_f64()
        );
        for p in found.planes.iter().take(12) {
            let [x, y, z] = p.plane.normal().to_array();
            println!(
                "  n = ({x:+.4}, {y:+.4}, {z:+.4})  d = {:+.4}  residual = {:.2e}",
                p.plane.offset(),
                p.residual
            );
        }
    }
}
