use proptest::prelude::*;

use rclocality::critical::isotonic;
use rclocality::exact::{
    p_from_beta, EnumerationCaps, Enumerator, PottsBoundary, PottsParams, RcBoundary, RcParams,
};
use rclocality::greens::{autocorrelation, green_quadratic_form, torus_green_sides};
use rclocality::sampler::pairwise_sum;
use rclocality::{Graph, Lattice};

/// Random simple graph on `2..=6` vertices with a boundary subset.
fn small_graph() -> impl Strategy<Value = Graph> {
    (2usize..=6).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let m = pairs.len();
        (Just(n), Just(pairs), proptest::collection::vec(any::<bool>(), m), proptest::collection::vec(any::<bool>(), n))
            .prop_map(|(n, pairs, keep, bnd)| {
                let edges: Vec<_> = pairs.into_iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| e).take(12).collect();
                let boundary: Vec<usize> = (0..n).filter(|&v| bnd[v]).collect();
                Graph::new(n, edges).unwrap().with_boundary(&boundary).unwrap()
            })
    })
}

fn torus_sides() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(prop_oneof![Just(2usize), Just(4), Just(6)], 1..=3)
}

fn enumerator() -> Enumerator {
    Enumerator::new(EnumerationCaps::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_distance_symmetric(g in small_graph()) {
        let n = g.vertex_count();
        let d: Vec<Vec<usize>> = (0..n).map(|v| g.distances_from(v).unwrap()).collect();
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(d[x][y], d[y][x]);
            }
        }
    }

    #[test]
    fn torus_distance_translation_invariant(sides in torus_sides(), seed in any::<u64>()) {
        let lat = Lattice::torus(&sides).unwrap();
        let n = lat.vertex_count();
        let x = (seed % n as u64) as usize;
        let shift: Vec<i64> = lat.coords((seed / 7 % n as u64) as usize).iter().map(|&c| c as i64).collect();
        let dx = lat.graph().distances_from(x).unwrap();
        let dtx = lat.graph().distances_from(lat.translate(x, &shift)).unwrap();
        for y in 0..n {
            prop_assert_eq!(dx[y], dtx[lat.translate(y, &shift)]);
            // Graph distance is the l1 norm of the shortest wrapped displacement.
            let l1: usize = lat.displacement(x, y).iter().zip(&sides).map(|(&c, &l)| c.min(l - c)).sum();
            prop_assert_eq!(dx[y], l1);
        }
    }

    #[test]
    fn rc_distribution_normalized(g in small_graph(), p in 0.01f64..0.99, q in 0.2f64..4.0, wired in any::<bool>()) {
        let bc = if wired { RcBoundary::Wired } else { RcBoundary::Free };
        let dist = enumerator().rc_distribution(&g, &RcParams::new(p, q, bc).unwrap()).unwrap();
        prop_assert!((dist.total() - 1.0).abs() < 1e-12);
        prop_assert!(dist.probs.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn connection_monotone_in_p(g in small_graph(), p in 0.02f64..0.9, dp in 0.01f64..0.09, q in 1.0f64..4.0) {
        let en = enumerator();
        let lo = en.rc_connection_matrix(&g, &RcParams::free(p, q).unwrap()).unwrap();
        let hi = en.rc_connection_matrix(&g, &RcParams::free(p + dp, q).unwrap()).unwrap();
        for (a, b) in lo.iter().zip(&hi) {
            prop_assert!(*b >= *a - 1e-12, "{} < {}", b, a);
        }
    }

    #[test]
    fn wired_dominates_free(g in small_graph(), p in 0.02f64..0.98, q in 1.0f64..4.0) {
        let en = enumerator();
        let free = en.rc_connection_matrix(&g, &RcParams::new(p, q, RcBoundary::Free).unwrap()).unwrap();
        let wired = en.rc_connection_matrix(&g, &RcParams::new(p, q, RcBoundary::Wired).unwrap()).unwrap();
        for (f, w) in free.iter().zip(&wired) {
            prop_assert!(*w >= *f - 1e-12);
        }
    }

    #[test]
    fn fkg_edge_covariance_nonnegative(g in small_graph(), p in 0.02f64..0.98, q in 1.0f64..4.0) {
        let dist = enumerator().rc_distribution(&g, &RcParams::free(p, q).unwrap()).unwrap();
        for e in 0..g.edge_count() {
            for f in 0..g.edge_count() {
                prop_assert!(dist.edge_covariance(e, f) >= -1e-12);
            }
        }
    }

    #[test]
    fn potts_two_point_equals_connection(g in small_graph(), beta in 0.05f64..1.5, q in 2u32..=3) {
        let en = enumerator();
        let spins = en.potts_two_point_matrix(&g, &PottsParams::new(beta, q, PottsBoundary::Free).unwrap()).unwrap();
        let conn = en.rc_connection_matrix(&g, &RcParams::free(p_from_beta(q as f64, beta), q as f64).unwrap()).unwrap();
        for (s, c) in spins.iter().zip(&conn) {
            prop_assert!((s - c).abs() < 1e-10);
        }
    }

    #[test]
    fn torus_green_rows_sum_to_zero(sides in torus_sides()) {
        let t = torus_green_sides(&sides).unwrap();
        prop_assert!(t.total().abs() < 1e-10);
        prop_assert!(t.harmonicity_residual() < 1e-9);
        for i in 0..t.len() {
            let neg: Vec<i64> = t.coords(i).iter().map(|&c| -(c as i64)).collect();
            prop_assert!((t.at_index(i) - t.value(&neg)).abs() < 1e-12);
        }
    }

    #[test]
    fn green_form_nonnegative_on_zero_sum(sides in torus_sides(), raw in proptest::collection::vec(-1.0f64..1.0, 216)) {
        let t = torus_green_sides(&sides).unwrap();
        let n = t.len();
        let mean = raw[..n].iter().sum::<f64>() / n as f64;
        let v: Vec<f64> = raw[..n].iter().map(|x| x - mean).collect();
        let form = green_quadratic_form(&t, &v).unwrap();
        prop_assert!(form >= -1e-10);
        // Same value through the autocorrelation.
        let a = autocorrelation(&sides, &v);
        let alt = pairwise_sum(&a.iter().zip(t.values()).map(|(x, g)| x * g).collect::<Vec<_>>());
        prop_assert!((form - alt).abs() < 1e-9 * (1.0 + form.abs()));
    }

    #[test]
    fn isotonic_is_monotone_and_mean_preserving(
        vals in proptest::collection::vec(0.0f64..1.0, 1..20),
        wts in proptest::collection::vec(0.1f64..5.0, 20),
    ) {
        let w = &wts[..vals.len()];
        let fit = isotonic(&vals, w);
        prop_assert!(fit.windows(2).all(|p| p[1] >= p[0] - 1e-15));
        let before: f64 = vals.iter().zip(w).map(|(v, w)| v * w).sum();
        let after: f64 = fit.iter().zip(w).map(|(v, w)| v * w).sum();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn lattice_spec_roundtrip(axes in proptest::collection::vec((2usize..7, any::<bool>()), 1..=3)) {
        let text: Vec<String> = axes.iter().map(|(l, open)| format!("{l}{}", if *open { "o" } else { "" })).collect();
        let text = text.join("x");
        let lat: Lattice = text.parse().unwrap();
        prop_assert_eq!(lat.to_string(), text);
    }
}
