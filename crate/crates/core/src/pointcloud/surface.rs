use crate::geom::Vec3;

use super::TriMesh;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            lo: Vec3::repeat(f64::INFINITY),
            hi: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn distance_squared(&self, p: &Vec3) -> f64 {
        let d = (self.lo - p).sup(&(p - self.hi)).sup(&Vec3::zeros());
        d.norm_squared()
    }
}

#[derive(Debug, Clone)]
struct BvhNode {
    bounds: Aabb,
    // leaf: triangles [start, end); interior: children at `start` and `end`
    start: usize,
    end: usize,
    leaf: bool,
}

/// Exact point-to-surface distance queries against a triangle mesh.
#[derive(Debug, Clone)]
pub struct SurfaceIndex {
    triangles: Vec<[Vec3; 3]>,
    nodes: Vec<BvhNode>,
}

impl SurfaceIndex {
    pub fn new(mesh: &TriMesh) -> Self {
        let tris: Vec<[Vec3; 3]> = mesh
            .faces()
            .iter()
            .map(|f| f.map(|i| mesh.vertices()[i]))
            .collect();
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build(&tris, &centroids, &mut order, 0, &mut nodes);
        }
        let triangles = order.iter().map(|&i| tris[i]).collect();
        SurfaceIndex { triangles, nodes }
    }

    /// Distance from `p` to the closest point on any triangle.
    pub fn distance(&self, p: &Vec3) -> f64 {
        if self.nodes.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds.distance_squared(p) >= best {
                continue;
            }
            if node.leaf {
                for t in &self.triangles[node.start..node.end] {
                    let c = closest_point_on_triangle(p, t);
                    best = best.min((c - p).norm_squared());
                }
            } else {
                let (a, b) = (node.start, node.end);
                let da = self.nodes[a].bounds.distance_squared(p);
                let db = self.nodes[b].bounds.distance_squared(p);
                if da < db {
                    stack.push(b);
                    stack.push(a);
                } else {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        best.sqrt()
    }
}

fn build(
    tris: &[[Vec3; 3]],
    centroids: &[Vec3],
    order: &mut [usize],
    offset: usize,
    nodes: &mut Vec<BvhNode>,
) -> usize {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &i in order.iter() {
        for v in &tris[i] {
            bounds.grow(v);
        }
        cbounds.grow(&centroids[i]);
    }
    let me = nodes.len();
    let extent = cbounds.hi - cbounds.lo;
    let axis = extent.imax();
    if order.len() <= LEAF_SIZE || extent[axis] <= 0.0 {
        nodes.push(BvhNode {
            bounds,
            start: offset,
            end: offset + order.len(),
            leaf: true,
        });
        return me;
    }
    nodes.push(BvhNode {
        bounds,
        start: 0,
        end: 0,
        leaf: false,
    });
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a][axis]
            .total_cmp(&centroids[b][axis])
            .then(a.cmp(&b))
    });
    let (l, r) = order.split_at_mut(mid);
    let left = build(tris, centroids, l, offset, nodes);
    let right = build(tris, centroids, r, offset + mid, nodes);
    nodes[me].start = left;
    nodes[me].end = right;
    me
}

/// Closest point on triangle `t` to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Vec3, t: &[Vec3; 3]) -> Vec3 {
    let [a, b, c] = t;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = va + vb + vc;
    if denom.abs() < 1e-300 {
        // zero-area triangle: fall back to the closest of its edges
        let edges = [(a, b), (b, c), (c, a)];
        return edges
            .iter()
            .map(|(s, e)| closest_point_on_segment(p, s, e))
            .min_by(|x, y| (x - p).norm_squared().total_cmp(&(y - p).norm_squared()))
            .unwrap();
    }
    let v = vb / denom;
    let w = vc / denom;
    a + ab * v + ac * w
}

fn closest_point_on_segment(p: &Vec3, s: &Vec3, e: &Vec3) -> Vec3 {
    let d = e - s;
    let len2 = d.norm_squared();
    if len2 < 1e-300 {
        return *s;
    }
    let t = ((p - s).dot(&d) / len2).clamp(0.0, 1.0);
    s + d * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense barycentric grid search over the triangle.
    fn brute_triangle_distance(p: &Vec3, t: &[Vec3; 3]) -> f64 {
        let k = 400;
        let mut best = f64::INFINITY;
        for i in 0..=k {
            for j in 0..=(k - i) {
                let u = i as f64 / k as f64;
                let v = j as f64 / k as f64;
                let q = t[0] + (t[1] - t[0]) * u + (t[2] - t[0]) * v;
                best = best.min((q - p).norm());
            }
        }
        best
    }

    #[test]
    fn closest_point_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut r = || Vec3::new(rng.random(), rng.random(), rng.random()) * 2.0 - Vec3::repeat(1.0);
        for _ in 0..30 {
            let t = [r(), r(), r()];
            let p = r();
            let exact = (closest_point_on_triangle(&p, &t) - p).norm();
            let approx = brute_triangle_distance(&p, &t);
            assert!(exact <= approx + 1e-12);
            assert!(approx - exact < 1e-2, "{exact} vs {approx}");
        }
    }

    #[test]
    fn bvh_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let verts: Vec<Vec3> = (0..60)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
            .collect();
        let faces: Vec<[usize; 3]> = (0..80)
            .map(|_| {
                [
                    rng.random_range(0..60),
                    rng.random_range(0..60),
                    rng.random_range(0..60),
                ]
            })
            .collect();
        let mesh = TriMesh::new(verts, faces).unwrap();
        let index = SurfaceIndex::new(&mesh);
        for _ in 0..200 {
            let p = Vec3::new(rng.random(), rng.random(), rng.random()) * 1.5;
            let scan = mesh
                .faces()
                .iter()
                .map(|f| {
                    let t = f.map(|i| mesh.vertices()[i]);
                    (closest_point_on_triangle(&p, &t) - p).norm()
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(index.distance(&p), scan);
        }
    }
}
