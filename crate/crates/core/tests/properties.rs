use proptest::prelude::*;

use symmetry_core::aggregate::{cluster_normals, AggregationConfig};
use symmetry_core::geom::{geodesic_deg, rotation_about, RigidTransform, SymmetryPlane, UnitVector3, Vec3};
use symmetry_core::hypothesis::{assign_ground_truth, reconstruct_predictions, residual_between, HypothesisBank};
use symmetry_core::metrics::{evaluate, Matching, DEFAULT_THRESHOLDS_DEG};
use symmetry_core::pointcloud::{chamfer, KdTree, PointCloud};
use symmetry_core::prediction::Prediction;

fn unit() -> impl Strategy<Value = UnitVector3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("away from zero", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| UnitVector3::new(x, y, z).unwrap())
}

fn point() -> impl Strategy<Value = Vec3> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn rotation() -> impl Strategy<Value = nalgebra::Matrix3<f64>> {
    (unit(), 0.0..360.0f64).prop_map(|(axis, angle)| rotation_about(&axis, angle))
}

fn predictions(max: usize) -> impl Strategy<Value = Vec<Prediction>> {
    prop::collection::vec((unit(), 0.05..1.0f64), 0..max).prop_map(|v| {
        v.into_iter()
            .map(|(n, c)| Prediction {
                plane: SymmetryPlane::through_origin(n),
                confidence: c,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn geodesic_is_a_metric_on_planes(a in unit(), b in unit(), c in unit()) {
        let d = |u: &UnitVector3, v: &UnitVector3| geodesic_deg(u, v, true);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
        prop_assert!(d(&a, &b) <= 90.0);
        prop_assert!(geodesic_deg(&a, &b, false) <= 180.0);
        prop_assert_eq!(d(&a, &a), 0.0);
    }

    #[test]
    fn canonical_form_is_idempotent_and_sign_blind(n in unit()) {
        let c = n.canonical();
        prop_assert_eq!(c.canonical(), c);
        prop_assert_eq!(n.flipped().canonical(), c);
        let u = n.to_upper_hemisphere();
        prop_assert!(u.z() >= 0.0);
        prop_assert_eq!(n.flipped().to_upper_hemisphere(), u);
    }

    #[test]
    fn reflection_matrix_structure(n in unit(), d in -2.0..2.0f64) {
        let m = SymmetryPlane::new(n, d).unwrap().reflection_matrix();
        let l = m.linear();
        prop_assert!((l.transpose() * l - nalgebra::Matrix3::identity()).amax() < 1e-12);
        prop_assert!((l.determinant() + 1.0).abs() < 1e-12);
        prop_assert!((m.0 * m.0 - nalgebra::Matrix4::identity()).amax() < 1e-12);
    }

    #[test]
    fn kd_tree_matches_linear_scan(points in prop::collection::vec(point(), 1..300), queries in prop::collection::vec(point(), 1..20)) {
        let tree = KdTree::new(&points);
        for q in &queries {
            let (_, d2) = tree.nearest(q).unwrap();
            let best = points.iter().map(|p| (p - q).norm_squared()).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(d2, best);
        }
    }

    #[test]
    fn chamfer_is_symmetric_and_rigid_invariant(
        a in prop::collection::vec(point(), 1..150),
        b in prop::collection::vec(point(), 1..150),
        r in rotation(),
        t in point(),
    ) {
        let (ca, cb) = (PointCloud::new(a).unwrap(), PointCloud::new(b).unwrap());
        let ab = chamfer(&ca, &cb).unwrap();
        prop_assert!((ab - chamfer(&cb, &ca).unwrap()).abs() < 1e-12);
        prop_assert_eq!(chamfer(&ca, &ca).unwrap(), 0.0);
        let m = RigidTransform { rotation: r, translation: t };
        let moved = chamfer(&ca.transformed(&m), &cb.transformed(&m)).unwrap();
        prop_assert!((ab - moved).abs() < 1e-7);
    }

    #[test]
    fn residual_angle_is_the_geodesic(h in unit(), g in unit()) {
        prop_assume!(h.dot(&g).abs() > 1e-3);
        let q = residual_between(&h, &g).unwrap();
        prop_assert!((q.angle_deg() - geodesic_deg(&h, &g, true)).abs() < 1e-6);
    }

    #[test]
    fn decoder_keeps_hypotheses_at_threshold(probs in prop::collection::vec(0.0..=1.0f64, 31), threshold in 0.0..=1.0f64) {
        let bank = HypothesisBank::new(31).unwrap();
        let identity = vec![symmetry_core::geom::UnitQuaternion::IDENTITY; 31];
        let preds = reconstruct_predictions(&bank, &probs, &identity, threshold).unwrap();
        prop_assert_eq!(preds.len(), probs.iter().filter(|&&p| p >= threshold).count());
    }

    #[test]
    fn assignment_round_trip_without_collisions(gt in prop::collection::vec(unit(), 1..4)) {
        let bank = HypothesisBank::new(31).unwrap();
        let targets = assign_ground_truth(&bank, &gt).unwrap();
        prop_assume!(targets.collisions.is_empty());
        let (probs, residuals) = symmetry_core::hypothesis::targets_as_outputs(&targets);
        let preds = reconstruct_predictions(&bank, &probs, &residuals, 0.5).unwrap();
        prop_assert_eq!(preds.len(), gt.len());
        for g in &gt {
            let d = preds.iter().map(|p| geodesic_deg(&p.plane.normal(), g, true)).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-6);
        }
    }

    #[test]
    fn clustering_ignores_order_and_signs(preds in predictions(12), flips in prop::collection::vec(any::<bool>(), 12)) {
        let cfg = AggregationConfig { min_cluster_size: 1, ..Default::default() };
        let base = cluster_normals(std::slice::from_ref(&preds), &cfg).unwrap();
        let mut shuffled: Vec<Prediction> = preds
            .iter()
            .zip(&flips)
            .map(|(p, &f)| Prediction {
                plane: if f { SymmetryPlane::new(p.plane.normal().flipped(), 0.0).unwrap() } else { p.plane },
                confidence: p.confidence,
            })
            .collect();
        shuffled.reverse();
        let (a, b) = (shuffled.len() / 2, shuffled.len());
        let again = cluster_normals(&[shuffled[..a].to_vec(), shuffled[a..b].to_vec()], &cfg).unwrap();
        prop_assert_eq!(base, again);
    }

    #[test]
    fn clustering_is_rotation_equivariant(preds in predictions(10), r in rotation()) {
        let cfg = AggregationConfig { min_cluster_size: 1, ..Default::default() };
        let base = cluster_normals(std::slice::from_ref(&preds), &cfg).unwrap();
        let rotated: Vec<Prediction> = preds
            .iter()
            .map(|p| Prediction { plane: SymmetryPlane::through_origin(p.plane.normal().rotated(&r)), confidence: p.confidence })
            .collect();
        let moved = cluster_normals(&[rotated], &cfg).unwrap();
        // linkage ties may resolve differently after rotation; compare as sets
        prop_assert_eq!(base.len(), moved.len());
        for c in &base {
            let target = c.plane.normal().rotated(&r);
            prop_assert!(moved.iter().any(|m| m.support == c.support && geodesic_deg(&m.plane.normal(), &target, true) < 1e-6));
        }
    }

    #[test]
    fn members_stay_within_threshold(preds in predictions(16)) {
        let cfg = AggregationConfig { min_cluster_size: 1, ..Default::default() };
        let clusters = cluster_normals(std::slice::from_ref(&preds), &cfg).unwrap();
        prop_assert_eq!(clusters.iter().map(|c| c.support).sum::<usize>(), preds.len());
        for p in &preds {
            let d = clusters.iter().map(|c| geodesic_deg(&c.plane.normal(), &p.plane.normal(), true)).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= cfg.cluster_threshold_deg + 1e-9);
        }
    }

    #[test]
    fn metrics_swap_and_bounds(pred in prop::collection::vec(unit(), 1..6), gt in prop::collection::vec(unit(), 1..6)) {
        let fwd = evaluate(&pred, &gt, &DEFAULT_THRESHOLDS_DEG, Matching::Nearest).unwrap();
        let back = evaluate(&gt, &pred, &DEFAULT_THRESHOLDS_DEG, Matching::Nearest).unwrap();
        prop_assert!((fwd.gd_deg - back.gd_deg).abs() < 1e-9);
        for (f, b) in fwd.scores.iter().zip(&back.scores) {
            prop_assert_eq!(f.precision, b.recall);
            prop_assert_eq!(f.recall, b.precision);
            prop_assert!(f.f <= 1.0 && f.f >= 0.0);
        }
        prop_assert!(fwd.scores.windows(2).all(|w| w[1].f >= w[0].f));
        let mut more = pred.clone();
        more.push(pred[0]);
        let dup = evaluate(&more, &gt, &DEFAULT_THRESHOLDS_DEG, Matching::Nearest).unwrap();
        for (d, f) in dup.scores.iter().zip(&fwd.scores) {
            prop_assert!(d.recall >= f.recall);
        }
    }
}
