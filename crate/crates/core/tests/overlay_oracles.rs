use fgsw_core::analysis::highway_stats::{fresh_contact_trials, improvement_trials};
use fgsw_core::analysis::{ball_highway_stats, estimate_alpha, shell_highway_stats, AlphaGrid};
use fgsw_core::generators::{gen_lattice, gen_sierpinski, DEFAULT_NODE_BUDGET};
use fgsw_core::graph::{Graph, NodeId};
use fgsw_core::overlay::{
    auto_k, build_overlay, nearest_highway_from, sample_highway_membership, OverlayParams,
};
use fgsw_core::routing::{RouteScratch, Router, Variant};
use fgsw_core::with_threads;

fn torus(side: usize) -> Graph {
    gen_lattice(2, side, true, DEFAULT_NODE_BUDGET).unwrap()
}

fn wrap_distance(side: usize, a: NodeId, b: NodeId) -> u32 {
    let axis = |x: usize, y: usize| {
        let d = x.abs_diff(y);
        d.min(side - d) as u32
    };
    let (a, b) = (a as usize, b as usize);
    axis(a / side, b / side) + axis(a % side, b % side)
}

#[test]
fn highway_count_within_four_sigma() {
    let g = gen_lattice(1, 4096, true, DEFAULT_NODE_BUDGET).unwrap();
    let m = sample_highway_membership(&g, &OverlayParams::new(8.0, 1.0, 1.0, 31).unwrap()).unwrap();
    let count = m.highway_nodes().len() as f64;
    let sigma = (4096.0f64 * 0.125 * 0.875).sqrt();
    assert!((count - 512.0).abs() <= 4.0 * sigma, "count {count}");
}

#[test]
fn zero_exponent_counts_highway_nodes() {
    let g = torus(12);
    let o = build_overlay(&g, &OverlayParams::new(3.0, 1.0, 0.0, 4).unwrap()).unwrap();
    let h = o.highway_nodes().len() as f64;
    for &u in o.highway_nodes() {
        assert_eq!(o.zvalue(u).unwrap(), h - 1.0);
    }
}

#[test]
fn nearest_highway_on_path() {
    let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
    let field = nearest_highway_from(&g, &[2]);
    assert_eq!(field.dist[0], 2);
    assert_eq!(field.next_hop[0], 1);
    assert_eq!(field.dist[2], 0);
}

#[test]
fn overlay_bytes_ignore_thread_count() {
    let g = torus(40);
    let p = OverlayParams::new(4.0, 2.0, 2.0, 17).unwrap();
    let bytes = |threads| {
        with_threads(threads, || {
            let mut buf = Vec::new();
            build_overlay(&g, &p).unwrap().write_text(&mut buf).unwrap();
            buf
        })
    };
    assert_eq!(bytes(1), bytes(4));
}

/// Side-16 lattice: summed exact hit probabilities per trial versus the
/// observed hit count, within three standard deviations.
#[test]
fn improvement_probability_matches_enumeration() {
    let side = 16;
    let g = torus(side);
    let o = build_overlay(&g, &OverlayParams::new(2.0, 2.0, 2.0, 3).unwrap()).unwrap();
    let trials = improvement_trials(&g, &o, 2.0, &[2.0], 10_000, 9).unwrap();
    let m = o.draws_per_node() as i32;
    let (mut expected, mut var, mut hits) = (0.0, 0.0, 0.0);
    for tr in &trials {
        let radius = tr.dist / 2;
        let z = o.zvalue(tr.u).unwrap();
        let mass: f64 = o
            .highway_nodes()
            .iter()
            .filter(|&&h| h != tr.u && wrap_distance(side, h, tr.t) <= radius)
            .map(|&h| (wrap_distance(side, tr.u, h) as f64).powi(-2))
            .sum::<f64>()
            / z;
        let p = 1.0 - (1.0 - mass).powi(m);
        expected += p;
        var += p * (1.0 - p);
        hits += tr.hits[0] as u32 as f64;
    }
    assert!(trials.len() > 5000);
    assert!(
        (hits - expected).abs() <= 3.0 * var.sqrt(),
        "hits {hits} expected {expected}"
    );
}

#[test]
fn fresh_contact_mass_matches_enumeration() {
    let side = 16;
    let g = torus(side);
    let o = build_overlay(&g, &OverlayParams::new(2.0, 2.0, 2.0, 5).unwrap()).unwrap();
    let trials = fresh_contact_trials(&g, &o, 10_000, 6).unwrap();
    for ell in [0u32, 1, 2, 4, 8] {
        let (mut expected, mut var, mut outside) = (0.0, 0.0, 0.0);
        for tr in &trials {
            assert_eq!(tr.dist, wrap_distance(side, tr.u, tr.contact));
            let z = o.zvalue(tr.u).unwrap();
            let p: f64 = o
                .highway_nodes()
                .iter()
                .filter(|&&h| h != tr.u && wrap_distance(side, tr.u, h) > ell)
                .map(|&h| (wrap_distance(side, tr.u, h) as f64).powi(-2))
                .sum::<f64>()
                / z;
            expected += p;
            var += p * (1.0 - p);
            outside += (tr.dist > ell) as u32 as f64;
        }
        if ell == 0 {
            assert_eq!(outside, trials.len() as f64);
        }
        assert!(
            (outside - expected).abs() <= 3.0 * var.sqrt().max(1e-9),
            "ell {ell}"
        );
    }
}

#[test]
fn ball_counts_concentrate() {
    let g = torus(256);
    let k = auto_k(g.node_count());
    let o = build_overlay(&g, &OverlayParams::new(k, 2.0, 2.0, 12).unwrap()).unwrap();
    let r = ball_highway_stats(&g, &o, 2.0, 2.0, 500, 13).unwrap();
    let min = r.summary("min").unwrap();
    assert!(min >= 1.0);
    assert!(r.summary("max_over_min").unwrap() <= 8.0);
    let (mean, expected, sigma) = (
        r.summary("mean").unwrap(),
        r.summary("expected_mean").unwrap(),
        r.summary("sigma_mean").unwrap(),
    );
    assert!(
        (mean - expected).abs() <= 3.0 * sigma,
        "{mean} vs {expected} +- {sigma}"
    );
}

#[test]
fn shell_exponent_on_plane() {
    let g = torus(256);
    let n = g.node_count();
    let k = auto_k(n);
    let o = build_overlay(&g, &OverlayParams::new(k, 2.0, 2.0, 14).unwrap()).unwrap();
    let w = (k * (n as f64).ln()).sqrt().ceil() as u32;
    let e = shell_highway_stats(&g, &o, w, 8, 400, 15)
        .unwrap()
        .summary("exponent")
        .unwrap();
    assert!((0.7..=1.3).contains(&e), "exponent {e}");
}

#[test]
fn estimator_on_ring_and_gasket() {
    let ring = gen_lattice(1, 1024, true, DEFAULT_NODE_BUDGET).unwrap();
    let a = estimate_alpha(&ring, 100, AlphaGrid::default(), 1)
        .unwrap()
        .alpha_median;
    assert!((0.9..=1.1).contains(&a));
    let gasket = gen_sierpinski(8, DEFAULT_NODE_BUDGET).unwrap();
    let a = estimate_alpha(&gasket, 300, AlphaGrid::default(), 1)
        .unwrap()
        .alpha_median;
    assert!((a - 1.585).abs() <= 0.2, "gasket alpha {a}");
}

#[test]
fn duplicated_pairs_route_identically() {
    let g = torus(32);
    let o = build_overlay(&g, &OverlayParams::new(4.0, 2.0, 2.0, 2).unwrap()).unwrap();
    let router = Router::new(&g, &o);
    let mut scratch = RouteScratch::new(&g);
    for v in Variant::ALL {
        let a = router.route(5, 600, v, &mut scratch).unwrap();
        let b = router.route(5, 600, v, &mut scratch).unwrap();
        assert_eq!(a, b);
        assert_eq!(router.route(7, 7, v, &mut scratch).unwrap().hops(), 0);
    }
}
