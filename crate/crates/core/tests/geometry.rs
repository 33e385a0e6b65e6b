use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saddle_core::geometry::{dist_to_cone, st_coords, st_from_yz, yz_coords, NodeClass, TriangleGrid};

#[test]
fn block_norms() {
    assert_eq!(st_coords(&[3.0, 4.0, 0.0, 1.0], 2).unwrap(), (5.0, 1.0));
    assert_eq!(st_coords(&[-2.0, 0.5], 1).unwrap(), (2.0, 0.5));
    assert!(st_coords(&[1.0, 2.0, 3.0], 2).is_err());
}

// brute force: closest point of {|x1| = |x2|} along random directions
#[test]
fn distance_to_cone_by_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = [1.0f64, 0.0, 0.0, 0.0];
    let mut best = f64::INFINITY;
    for _ in 0..200_000 {
        let mut a = [0.0f64; 2];
        let mut b = [0.0f64; 2];
        for v in a.iter_mut().chain(b.iter_mut()) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let na = (a[0] * a[0] + a[1] * a[1]).sqrt();
        let nb = (b[0] * b[0] + b[1] * b[1]).sqrt();
        let r: f64 = rng.gen_range(0.3..0.7);
        let y = [r * a[0] / na, r * a[1] / na, r * b[0] / nb, r * b[1] / nb];
        let d: f64 = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        best = best.min(d);
    }
    let (s, t) = st_coords(&x, 2).unwrap();
    let d = dist_to_cone(s, t);
    assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(best >= d - 1e-12 && best - d < 5e-3, "{best} vs {d}");
}

proptest! {
    #[test]
    fn yz_round_trip(s in 0.0f64..50.0, t in 0.0f64..50.0) {
        let (y, z) = yz_coords(s, t);
        let (s2, t2) = st_from_yz(y, z).unwrap();
        prop_assert!((s - s2).abs() < 1e-13 && (t - t2).abs() < 1e-13);
        prop_assert!((z.abs() - dist_to_cone(s, t)).abs() < 1e-13);
    }
}

#[test]
fn outside_wedge_is_rejected() {
    assert!(st_from_yz(1.0, 2.0).is_err());
}

#[test]
fn weights_and_masses() {
    let g = TriangleGrid::<f64>::build(2, 16.0, 0.5).unwrap();
    let k = g.index(2, 1).unwrap();
    assert!((g.weights()[k] - 0.5 * 0.25).abs() < 1e-15);
    // an interior node touches six triangles: mass equals its weight
    assert!((g.mass()[k] - g.weights()[k]).abs() < 1e-15);
    let g1 = TriangleGrid::build(1, 8.0, 0.25).unwrap();
    assert!(g1.weights().iter().all(|w| *w == 0.0625));
    // m = 1 volume is the triangulated area, inside the sector of radius R
    let v: f64 = g1.volume();
    let area = |r: f64| std::f64::consts::PI * r * r / 8.0;
    assert!(v < area(8.0) && v > area(8.0 - 0.25 * 2f64.sqrt()), "{v}");
}

#[test]
fn refinement_keeps_nodes() {
    let coarse = TriangleGrid::build(2, 16.0, 0.5).unwrap();
    let fine = TriangleGrid::build(2, 16.0, 0.25).unwrap();
    for n in coarse.nodes() {
        let k = fine.index(2 * n.i, 2 * n.j).expect("coarse node missing from fine grid");
        assert_eq!(fine.nodes()[k].s, n.s);
        assert_eq!(fine.nodes()[k].t, n.t);
    }
}

#[test]
fn node_classes() {
    let g = TriangleGrid::build(2, 8.0, 0.25).unwrap();
    for n in g.nodes() {
        assert!(n.j <= n.i);
        assert!(n.s * n.s + n.t * n.t <= 64.0 + 1e-9);
        match n.class {
            NodeClass::Cone => assert_eq!(n.i, n.j),
            NodeClass::Axis => assert_eq!(n.j, 0),
            _ => {}
        }
    }
    assert!(g.count(NodeClass::Arc) > 0);
    assert!(TriangleGrid::<f64>::build(0, 8.0, 0.25).is_err());
    assert!(TriangleGrid::<f64>::build(2, 8.0, 1.0).is_err());
}
