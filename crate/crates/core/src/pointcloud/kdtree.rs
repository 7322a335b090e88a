use crate::geom::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        left: usize,
        right: usize,
    },
}

/// Tight bounds of the points below a node.
#[derive(Debug, Clone, Copy)]
struct Bounds {
    lo: Vec3,
    hi: Vec3,
}

impl Bounds {
    fn distance_squared(&self, p: &Vec3) -> f64 {
        (self.lo - p).sup(&(p - self.hi)).sup(&Vec3::zeros()).norm_squared()
    }
}

/// Exact nearest-neighbor search over a fixed set of points.
///
/// A median-split kd-tree; the tree keeps its own copy of the points in leaf
/// order so queries touch contiguous memory.
#[derive(Debug, Clone)]
pub struct KdTree {
    nodes: Vec<Node>,
    bounds: Vec<Bounds>,
    points: Vec<Vec3>,
    ids: Vec<usize>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        let mut bounds = Vec::with_capacity(nodes.capacity());
        if !points.is_empty() {
            build(points, &mut ids, 0, &mut nodes, &mut bounds);
        }
        let ordered = ids.iter().map(|&i| points[i]).collect();
        KdTree {
            nodes,
            bounds,
            points: ordered,
            ids,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index (into the construction slice) and squared distance of the
    /// closest point. `None` on an empty tree.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(64);
        stack.push((0, self.bounds[0].distance_squared(q)));
        while let Some((node, bound)) = stack.pop() {
            if bound >= best.1 {
                continue;
            }
            match self.nodes[node] {
                Node::Leaf { start, end } => {
                    for k in start..end {
                        let d = (self.points[k] - q).norm_squared();
                        if d < best.1 || (d == best.1 && self.ids[k] < best.0) {
                            best = (self.ids[k], d);
                        }
                    }
                }
                Node::Split { left, right } => {
                    let dl = self.bounds[left].distance_squared(q);
                    let dr = self.bounds[right].distance_squared(q);
                    // far pushed first so the near side is explored first
                    if dl <= dr {
                        stack.push((right, dr));
                        stack.push((left, dl));
                    } else {
                        stack.push((left, dl));
                        stack.push((right, dr));
                    }
                }
            }
        }
        Some(best)
    }

    pub fn nearest_distance(&self, q: &Vec3) -> f64 {
        self.nearest(q).map_or(f64::INFINITY, |(_, d)| d.sqrt())
    }
}

fn build(
    points: &[Vec3],
    ids: &mut [usize],
    offset: usize,
    nodes: &mut Vec<Node>,
    bounds: &mut Vec<Bounds>,
) -> usize {
    let me = nodes.len();
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for &i in ids.iter() {
        lo = lo.inf(&points[i]);
        hi = hi.sup(&points[i]);
    }
    bounds.push(Bounds { lo, hi });
    if ids.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + ids.len(),
        });
        return me;
    }
    let axis = (hi - lo).imax();
    if hi[axis] - lo[axis] <= 0.0 {
        // all coincident
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + ids.len(),
        });
        return me;
    }
    let mid = ids.len() / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
    });
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (l, r) = ids.split_at_mut(mid);
    let left = build(points, l, offset, nodes, bounds);
    let right = build(points, r, offset + mid, nodes, bounds);
    nodes[me] = Node::Split { left, right };
    me
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_scan(points: &[Vec3], q: &Vec3) -> f64 {
        points
            .iter()
            .map(|p| (p - q).norm_squared())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn agrees_with_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pts: Vec<Vec3> = (0..1000)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
            .collect();
        let tree = KdTree::new(&pts);
        for _ in 0..100 {
            let q = Vec3::new(
                rng.random_range(-0.5..1.5),
                rng.random_range(-0.5..1.5),
                rng.random_range(-0.5..1.5),
            );
            let (i, d) = tree.nearest(&q).unwrap();
            assert_eq!(d, linear_scan(&pts, &q));
            assert_eq!((pts[i] - q).norm_squared(), d);
        }
    }

    #[test]
    fn duplicates_and_tiny_sets() {
        let pts = vec![Vec3::new(1.0, 1.0, 1.0); 40];
        let tree = KdTree::new(&pts);
        assert_eq!(tree.nearest(&Vec3::zeros()).unwrap(), (0, 3.0));
        assert!(KdTree::new(&[]).nearest(&Vec3::zeros()).is_none());
        let one = KdTree::new(&[Vec3::new(0.0, 2.0, 0.0)]);
        assert_eq!(one.nearest_distance(&Vec3::zeros()), 2.0);
    }
}
