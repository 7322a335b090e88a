//! Point clouds, triangle meshes, and the distance machinery built on them.

mod kdtree;
mod surface;

pub use kdtree::KdTree;
pub use surface::{closest_point_on_triangle, SurfaceIndex};

use nalgebra::Matrix3;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{RigidTransform, SymmetryPlane, Vec3};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidVector(format!(
                "non-finite point ({}, {}, {})",
                p.x, p.y, p.z
            )));
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.points.is_empty() {
            return None;
        }
        let sum: Vec3 = self.points.iter().sum();
        Some(sum / self.points.len() as f64)
    }

    pub fn transformed(&self, t: &RigidTransform) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| t.apply(p)).collect(),
        }
    }

    pub fn mapped(&self, s: &Similarity) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| s.apply(p)).collect(),
        }
    }

    pub fn index(&self) -> KdTree {
        KdTree::new(&self.points)
    }

    /// Fails unless the cloud has at least three points that are not all
    /// collinear (or coincident).
    pub fn ensure_non_degenerate(&self) -> Result<()> {
        if self.points.len() < 3 {
            return Err(Error::DegenerateCloud(format!(
                "{} points, need at least 3",
                self.points.len()
            )));
        }
        let c = self.centroid().unwrap();
        let mut cov = Matrix3::zeros();
        for p in &self.points {
            let d = p - c;
            cov += d * d.transpose();
        }
        let mut eig: Vec<f64> = cov.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        if eig[0] <= 1e-24 || eig[1] <= 1e-12 * eig[0] {
            return Err(Error::DegenerateCloud(
                "points are collinear or coincident".into(),
            ));
        }
        Ok(())
    }
}

impl FromIterator<Vec3> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Vec3>>(iter: I) -> Self {
        PointCloud {
            points: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::FaceIndexOutOfRange {
                    face: fi,
                    index,
                    n_vertices: vertices.len(),
                });
            }
        }
        if let Some(p) = vertices.iter().find(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidVector(format!(
                "non-finite vertex ({}, {}, {})",
                p.x, p.y, p.z
            )));
        }
        Ok(TriMesh { vertices, faces })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        self.faces[face].map(|i| self.vertices[i])
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a)).norm() / 2.0
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn transformed(&self, t: &RigidTransform) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|p| t.apply(p)).collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn mapped(&self, s: &Similarity) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|p| s.apply(p)).collect(),
            faces: self.faces.clone(),
        }
    }
}

/// Uniform scale about a center: `x -> scale * (x - center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub center: Vec3,
    pub scale: f64,
}

impl Similarity {
    pub fn identity() -> Self {
        Similarity {
            center: Vec3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p - self.center) * self.scale
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        p / self.scale + self.center
    }

    /// Maps a plane from the normalized frame back to the original frame.
    pub fn plane_to_original(&self, plane: &SymmetryPlane) -> SymmetryPlane {
        let n = plane.normal();
        // n·(s(x - c)) + d = 0  <=>  n·x + (d/s - n·c) = 0
        let offset = plane.offset() / self.scale - n.as_vector().dot(&self.center);
        SymmetryPlane::new(n, offset).expect("finite similarity keeps offsets finite")
    }

    pub fn plane_to_normalized(&self, plane: &SymmetryPlane) -> SymmetryPlane {
        let n = plane.normal();
        let offset = (plane.offset() + n.as_vector().dot(&self.center)) * self.scale;
        SymmetryPlane::new(n, offset).expect("finite similarity keeps offsets finite")
    }
}

/// Center and radius of an enclosing sphere: Ritter's two-pass estimate,
/// then the radius is tightened to the farthest point from that center.
pub fn bounding_sphere(points: &[Vec3]) -> Option<(Vec3, f64)> {
    let first = points.first()?;
    let farthest = |from: &Vec3| {
        points
            .iter()
            .max_by(|a, b| (*a - from).norm_squared().total_cmp(&(*b - from).norm_squared()))
            .copied()
            .unwrap()
    };
    let y = farthest(first);
    let z = farthest(&y);
    let mut center = (y + z) / 2.0;
    let mut radius = (z - y).norm() / 2.0;
    for p in points {
        let d = (p - center).norm();
        if d > radius {
            let grown = (radius + d) / 2.0;
            center += (p - center) * ((grown - radius) / d);
            radius = grown;
        }
    }
    let radius = points
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max);
    Some((center, radius))
}

/// Centers the mesh on its bounding-sphere center and scales that sphere to
/// radius 1. Returns the applied similarity.
pub fn normalize_to_unit_sphere(mesh: &TriMesh) -> Result<(TriMesh, Similarity)> {
    let (center, radius) = bounding_sphere(mesh.vertices()).ok_or(Error::EmptyMesh)?;
    if radius <= 1e-12 * (1.0 + center.norm()) {
        return Err(Error::DegenerateBoundingSphere);
    }
    let sim = Similarity {
        center,
        scale: 1.0 / radius,
    };
    Ok((mesh.mapped(&sim), sim))
}

/// Centers a cloud on its centroid and scales the farthest point to unit
/// distance.
pub fn normalize_cloud(cloud: &PointCloud) -> Result<(PointCloud, Similarity)> {
    let center = cloud.centroid().ok_or(Error::EmptyCloud)?;
    let radius = cloud
        .points()
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max);
    if radius <= 1e-12 * (1.0 + center.norm()) {
        return Err(Error::DegenerateCloud("all points coincide".into()));
    }
    let sim = Similarity {
        center,
        scale: 1.0 / radius,
    };
    Ok((cloud.mapped(&sim), sim))
}

/// Draws `n` points uniformly over the mesh surface: faces are picked with
/// probability proportional to area, then a point is placed uniformly inside
/// the face.
pub fn sample_surface(mesh: &TriMesh, n: usize, seed: u64) -> Result<PointCloud> {
    let mut cumulative = Vec::with_capacity(mesh.faces().len());
    let mut total = 0.0;
    for f in 0..mesh.faces().len() {
        total += mesh.face_area(f);
        cumulative.push(total);
    }
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::NoArea);
    }
    let mut rng = rng::stream(seed, Stream::SurfaceSampling);
    let points = (0..n)
        .map(|_| {
            let r = rng.random::<f64>() * total;
            // first face whose cumulative area exceeds r; zero-area faces are
            // never selected since their cumulative value equals the previous one
            let face = cumulative
                .partition_point(|&c| c <= r)
                .min(cumulative.len() - 1);
            let [a, b, c] = mesh.triangle(face);
            let s = rng.random::<f64>().sqrt();
            let t = rng.random::<f64>();
            a * (1.0 - s) + b * (s * (1.0 - t)) + c * (s * t)
        })
        .collect();
    Ok(PointCloud { points })
}

/// Symmetric Chamfer distance: the average of the two directed mean
/// nearest-neighbor (unsquared) distances.
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let ia = a.index();
    let ib = b.index();
    Ok(0.5 * (directed_mean(a.points(), &ib) + directed_mean(b.points(), &ia)))
}

/// Mean distance from each query point to its nearest neighbor in `index`.
pub fn directed_mean(queries: &[Vec3], index: &KdTree) -> f64 {
    let sum: f64 = queries.iter().map(|q| index.nearest_distance(q)).sum();
    sum / queries.len() as f64
}

pub fn reflect_cloud(cloud: &PointCloud, plane: &SymmetryPlane) -> Result<PointCloud> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(cloud
        .points()
        .iter()
        .map(|p| plane.reflect_point(p))
        .collect())
}

/// `chamfer(cloud, reflect_cloud(cloud, plane))` computed with one index.
///
/// Reflection is an isometry, so the distance from `p` to the reflected
/// cloud equals the distance from `M p` to the original; both directed terms
/// of the Chamfer sum are therefore the same mean.
pub fn reflective_chamfer(cloud: &[Vec3], index: &KdTree, plane: &SymmetryPlane) -> f64 {
    let sum: f64 = cloud
        .iter()
        .map(|p| index.nearest_distance(&plane.reflect_point(p)))
        .sum();
    sum / cloud.len() as f64
}

/// Chamfer between the surface samples and the reflected surface, measured
/// against the exact surface rather than against other samples. Free of the
/// sampling-density floor that point-to-point Chamfer carries.
pub fn reflective_surface_residual(
    samples: &[Vec3],
    surface: &SurfaceIndex,
    plane: &SymmetryPlane,
) -> f64 {
    let sum: f64 = samples
        .iter()
        .map(|p| surface.distance(&plane.reflect_point(p)))
        .sum();
    sum / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{rotation_about, UnitVector3};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn unit_cube() -> TriMesh {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push(Vec3::new(
                if i & 1 == 0 { -0.5 } else { 0.5 },
                if i & 2 == 0 { -0.5 } else { 0.5 },
                if i & 4 == 0 { -0.5 } else { 0.5 },
            ));
        }
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
        TriMesh::new(v, faces).unwrap()
    }

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()) - Vec3::repeat(0.5))
            .collect()
    }

    #[test]
    fn cube_normalization() {
        let (m, sim) = normalize_to_unit_sphere(&unit_cube()).unwrap();
        assert!((sim.scale - 1.0 / (3f64.sqrt() / 2.0)).abs() < 1e-12);
        assert!(sim.center.norm() < 1e-12);
        for v in m.vertices() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization_errors() {
        let empty = TriMesh::new(vec![], vec![]).unwrap();
        assert!(matches!(normalize_to_unit_sphere(&empty), Err(Error::EmptyMesh)));
        let single = TriMesh::new(vec![Vec3::new(1.0, 2.0, 3.0)], vec![]).unwrap();
        assert!(matches!(
            normalize_to_unit_sphere(&single),
            Err(Error::DegenerateBoundingSphere)
        ));
    }

    #[test]
    fn normalized_radius_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let verts: Vec<Vec3> = (0..50)
                .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()) * 7.0 + Vec3::new(3.0, -1.0, 2.0))
                .collect();
            let mesh = TriMesh::new(verts, vec![[0, 1, 2]]).unwrap();
            let (m, sim) = normalize_to_unit_sphere(&mesh).unwrap();
            let (_, r) = bounding_sphere(m.vertices()).unwrap();
            assert!((r - 1.0).abs() < 1e-6);
            for (a, b) in mesh.vertices().iter().zip(m.vertices()) {
                assert!((sim.invert(b) - a).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn sample_count_and_reproducibility() {
        let cube = unit_cube();
        let a = sample_surface(&cube, 50_000, 7).unwrap();
        let b = sample_surface(&cube, 50_000, 7).unwrap();
        assert_eq!(a.len(), 50_000);
        assert!(a
            .points()
            .iter()
            .zip(b.points())
            .all(|(p, q)| p.map(f64::to_bits) == q.map(f64::to_bits)));
        let c = sample_surface(&cube, 10, 8).unwrap();
        assert_ne!(&a.points()[..10], c.points());
    }

    #[test]
    fn samples_lie_in_triangle_plane() {
        let tri = TriMesh::new(
            vec![
                Vec3::new(0.2, 0.1, 0.3),
                Vec3::new(1.0, -0.4, 0.7),
                Vec3::new(-0.3, 0.9, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let [a, b, c] = tri.triangle(0);
        let n = (b - a).cross(&(c - a)).normalize();
        let cloud = sample_surface(&tri, 1000, 1).unwrap();
        for p in cloud.points() {
            assert!((p - a).dot(&n).abs() < 1e-9);
            // inside: closest point on the triangle is the point itself
            assert!((closest_point_on_triangle(p, &[a, b, c]) - p).norm() < 1e-9);
        }
    }

    #[test]
    fn area_weighting_follows_binomial() {
        // unit square, split unevenly: triangle areas 0.5 each but with a
        // third degenerate face that must never be chosen
        let verts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.25, 0.0, 0.0),
        ];
        // faces: (0,4,3) area 0.125, (4,1,2)+(4,2,3) area 0.875, (0,4,1) zero area
        let faces = vec![[0, 4, 3], [4, 1, 2], [4, 2, 3], [0, 4, 1]];
        let mesh = TriMesh::new(verts, faces).unwrap();
        let total = mesh.surface_area();
        assert!((total - 1.0).abs() < 1e-12);
        let ratio = mesh.face_area(0) / total;
        let n = 100_000;
        let cloud = sample_surface(&mesh, n, 3).unwrap();
        // points in the left sliver x < 0.25*(1-y) belong to face 0
        let left = cloud
            .points()
            .iter()
            .filter(|p| p.x < 0.25 * (1.0 - p.y))
            .count() as f64;
        let mean = n as f64 * ratio;
        let sigma = (n as f64 * ratio * (1.0 - ratio)).sqrt();
        assert!((left - mean).abs() < 3.0 * sigma, "{left} vs {mean} ± {sigma}");
    }

    #[test]
    fn no_area_error() {
        let flat = TriMesh::new(
            vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(sample_surface(&flat, 10, 0), Err(Error::NoArea)));
    }

    fn brute_chamfer(a: &[Vec3], b: &[Vec3]) -> f64 {
        let dir = |x: &[Vec3], y: &[Vec3]| {
            x.iter()
                .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .sum::<f64>()
                / x.len() as f64
        };
        0.5 * (dir(a, b) + dir(b, a))
    }

    #[test]
    fn chamfer_examples() {
        let a = random_cloud(300, 1);
        assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
        let p = PointCloud::new(vec![Vec3::zeros()]).unwrap();
        let q = PointCloud::new(vec![Vec3::new(1.0, 0.0, 0.0)]).unwrap();
        assert_eq!(chamfer(&p, &q).unwrap(), 1.0);
        assert!(matches!(chamfer(&p, &PointCloud::default()), Err(Error::EmptyCloud)));

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let x = random_cloud(3, rng.random());
            let y = random_cloud(3, rng.random());
            let c = chamfer(&x, &y).unwrap();
            assert!((c - brute_chamfer(x.points(), y.points())).abs() < 1e-12);
            assert_eq!(c, chamfer(&y, &x).unwrap());
        }
    }

    #[test]
    fn chamfer_rigid_invariance() {
        let a = random_cloud(400, 2);
        let b = random_cloud(500, 3);
        let t = RigidTransform {
            rotation: rotation_about(&UnitVector3::new(0.3, 0.4, 0.5).unwrap(), 71.0),
            translation: Vec3::new(0.4, -2.0, 1.0),
        };
        let before = chamfer(&a, &b).unwrap();
        let after = chamfer(&a.transformed(&t), &b.transformed(&t)).unwrap();
        assert!((before - after).abs() < 1e-7);
    }

    #[test]
    fn reflect_cloud_examples() {
        let plane_x = SymmetryPlane::through_origin(UnitVector3::X);
        let half = random_cloud(200, 4);
        let sym: PointCloud = half
            .points()
            .iter()
            .flat_map(|p| [*p, plane_x.reflect_point(p)])
            .collect();
        let refl = reflect_cloud(&sym, &plane_x).unwrap();
        assert_eq!(chamfer(&sym, &refl).unwrap(), 0.0);

        let one = PointCloud::new(vec![Vec3::new(1.0, 1.0, 1.0)]).unwrap();
        let out = reflect_cloud(&one, &SymmetryPlane::through_origin(UnitVector3::Z)).unwrap();
        assert_eq!(out.points(), &[Vec3::new(1.0, 1.0, -1.0)]);

        let plane = SymmetryPlane::new(UnitVector3::new(0.2, -0.7, 0.4).unwrap(), 0.13).unwrap();
        let cloud = random_cloud(500, 5);
        let twice = reflect_cloud(&reflect_cloud(&cloud, &plane).unwrap(), &plane).unwrap();
        for (p, q) in cloud.points().iter().zip(twice.points()) {
            assert!((p - q).norm() < 1e-9);
        }
        assert!(matches!(
            reflect_cloud(&PointCloud::default(), &plane),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn reflective_chamfer_matches_general_chamfer() {
        let cloud = random_cloud(800, 6);
        let plane = SymmetryPlane::new(UnitVector3::new(0.5, 0.1, -0.3).unwrap(), 0.05).unwrap();
        let general = chamfer(&cloud, &reflect_cloud(&cloud, &plane).unwrap()).unwrap();
        let fast = reflective_chamfer(cloud.points(), &cloud.index(), &plane);
        assert!((general - fast).abs() < 1e-12);
    }

    #[test]
    fn surface_residual_vanishes_for_true_plane() {
        let cube = unit_cube();
        let samples = sample_surface(&cube, 2000, 9).unwrap();
        let surface = SurfaceIndex::new(&cube);
        let exact = SymmetryPlane::through_origin(UnitVector3::Y);
        assert!(reflective_surface_residual(samples.points(), &surface, &exact) < 1e-12);
        let tilted = SymmetryPlane::through_origin(UnitVector3::new(0.1, 1.0, 0.0).unwrap());
        assert!(reflective_surface_residual(samples.points(), &surface, &tilted) > 1e-3);
    }

    #[test]
    fn degeneracy_checks() {
        let line: PointCloud = (0..10).map(|i| Vec3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert!(matches!(line.ensure_non_degenerate(), Err(Error::DegenerateCloud(_))));
        let two: PointCloud = (0..2).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(two.ensure_non_degenerate().is_err());
        assert!(random_cloud(10, 1).ensure_non_degenerate().is_ok());
    }
}
