//! Small analytic meshes with known symmetry, used as fixtures and demos.

use crate::geom::Vec3;
use crate::pointcloud::TriMesh;

/// Axis-aligned box centered at the origin. Mirror planes: the three
/// coordinate planes (more when extents coincide).
pub fn axis_box(half_x: f64, half_y: f64, half_z: f64) -> TriMesh {
    let vertices = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -half_x } else { half_x },
                if i & 2 == 0 { -half_y } else { half_y },
                if i & 4 == 0 { -half_z } else { half_z },
            )
        })
        .collect();
    let quads = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let faces = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    TriMesh::new(vertices, faces).expect("valid box")
}

/// Cube with edge length 1 centered at the origin: 3 axis planes and 6
/// diagonal planes.
pub fn unit_cube() -> TriMesh {
    axis_box(0.5, 0.5, 0.5)
}

/// L-shaped cross-section `[0,2]x[0,1] ∪ [0,1]x[0,2]` extruded to height
/// 1.5 while shrinking toward `(0.7, 0.7)`. The taper removes the mid-height
/// mirror a straight prism would have, leaving only the plane `x = y`.
pub fn l_frustum() -> TriMesh {
    let outline = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
    let (height, top_scale, pivot) = (1.5, 0.6, (0.7, 0.7));
    let n = outline.len();
    let mut vertices: Vec<Vec3> = outline.iter().map(|&(x, y)| Vec3::new(x, y, 0.0)).collect();
    vertices.extend(outline.iter().map(|&(x, y)| {
        Vec3::new(
            pivot.0 + (x - pivot.0) * top_scale,
            pivot.1 + (y - pivot.1) * top_scale,
            height,
        )
    }));
    let mut faces = Vec::new();
    // caps: the outline is star-shaped around its reflex corner (index 3)
    for k in 0..n {
        let (a, b) = ((3 + k) % n, (4 + k) % n);
        if a == 3 || b == 3 {
            continue;
        }
        faces.push([3, b, a]);
        faces.push([n + 3, n + a, n + b]);
    }
    for i in 0..n {
        let j = (i + 1) % n;
        faces.push([i, j, n + j]);
        faces.push([i, n + j, n + i]);
    }
    TriMesh::new(vertices, faces).expect("valid frustum")
}

/// Tetrahedron with six distinct edge lengths and no mirror plane.
pub fn scalene_tetrahedron() -> TriMesh {
    let vertices = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.15, 0.7, 0.0),
        Vec3::new(0.6, 0.2, 0.45),
    ];
    TriMesh::new(vertices, vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]]).expect("valid tetrahedron")
}

/// Latitude-longitude sphere of radius 1.
pub fn uv_sphere(rings: usize, segments: usize) -> TriMesh {
    let mut vertices = vec![Vec3::new(0.0, 0.0, 1.0)];
    for r in 1..rings {
        let theta = std::f64::consts::PI * r as f64 / rings as f64;
        for s in 0..segments {
            let phi = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
            vertices.push(Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()));
        }
    }
    vertices.push(Vec3::new(0.0, 0.0, -1.0));
    let south = vertices.len() - 1;
    let ring = |r: usize, s: usize| 1 + (r - 1) * segments + s % segments;
    let mut faces = Vec::new();
    for s in 0..segments {
        faces.push([0, ring(1, s), ring(1, s + 1)]);
        faces.push([south, ring(rings - 1, s + 1), ring(rings - 1, s)]);
    }
    for r in 1..rings - 1 {
        for s in 0..segments {
            faces.push([ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)]);
            faces.push([ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)]);
        }
    }
    TriMesh::new(vertices, faces).expect("valid sphere")
}
