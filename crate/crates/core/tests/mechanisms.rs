//! The W/U/B mechanisms against a from-scratch oracle that rebuilds `G_x` and
//! `G_{x,y}` as graphs and ranks agents by pairwise score comparison.

use peerclass::io::parse_graph_json;
use peerclass::rational::q;
use peerclass::verify::random_graph;
use peerclass::{
    coincidence, expected_coincidence, wub_deterministic, wub_partition, wub_probabilistic, wub_worthy_only,
    with_out_weights, AgentId, AgentSet, MeasureKind, MechanismConfig, Rational, Weight, WeightedDigraph,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Zone {
    W,
    U,
    B,
}

fn oracle_scores(g: &WeightedDigraph) -> Vec<Rational> {
    (0..g.n())
        .map(|x| {
            let ws: Vec<&Rational> = g.edges().iter().filter(|e| e.dst.0 == x).map(|e| e.w.value()).collect();
            if ws.is_empty() {
                Rational::zero()
            } else {
                ws.iter().copied().sum::<Rational>() / Rational::from_usize(ws.len())
            }
        })
        .collect()
}

fn oracle_rank(g: &WeightedDigraph, x: usize) -> usize {
    let s = oracle_scores(g);
    s.iter().filter(|t| **t > s[x]).count()
}

fn overwritten(g: &WeightedDigraph, xs: &[usize]) -> WeightedDigraph {
    let ids: Vec<AgentId> = xs.iter().map(|&x| AgentId(x)).collect();
    with_out_weights(g, &ids, &Weight::minus_one()).unwrap()
}

fn zone(rank: usize, alpha: &Rational, delta: usize, n: usize) -> Zone {
    let r = Rational::from_usize(rank);
    let alpha_n = alpha * Rational::from_usize(n);
    if r < &alpha_n - Rational::from_usize(delta) {
        Zone::W
    } else if r >= alpha_n {
        Zone::U
    } else {
        Zone::B
    }
}

fn oracle_zone(g: &WeightedDigraph, x: usize, alpha: &Rational, delta: usize) -> Zone {
    zone(oracle_rank(&overwritten(g, &[x]), x), alpha, delta, g.n())
}

fn oracle_deterministic(g: &WeightedDigraph, alpha: &Rational, delta: usize) -> Vec<bool> {
    let n = g.n();
    (0..n)
        .map(|x| match oracle_zone(g, x, alpha, delta) {
            Zone::W => true,
            Zone::U => false,
            Zone::B => {
                let gx = overwritten(g, &[x]);
                let mut border: Vec<(usize, usize)> = (0..n)
                    .filter(|&y| zone(oracle_rank(&overwritten(g, &[x, y]), y), alpha, delta, n) == Zone::B)
                    .map(|y| (oracle_rank(&gx, y), y))
                    .collect();
                border.sort();
                border[..border.len().div_ceil(2)].iter().any(|&(_, y)| y == x)
            }
        })
        .collect()
}

/// Agent i reviews i+1 (mod 10); reviews into 0..=4 are +1, into 5..=9 are -1.
fn signed_cycle() -> WeightedDigraph {
    WeightedDigraph::new(10, (0..10).map(|i| {
        let t = (i + 1) % 10;
        (i, t, if t < 5 { q(1, 1) } else { q(-1, 1) })
    }))
    .unwrap()
}

#[test]
fn signed_cycle_against_the_oracle() {
    let g = signed_cycle();
    let alpha = q(1, 2);
    let zones: Vec<Zone> = (0..10).map(|x| oracle_zone(&g, x, &alpha, 1)).collect();
    use Zone::*;
    assert_eq!(zones, vec![W, W, W, W, W, U, U, U, U, B]);
    let det = oracle_deterministic(&g, &alpha, 1);
    assert_eq!(det, (0..10).map(|x| x < 5).collect::<Vec<_>>());

    let cfg = MechanismConfig::new(alpha.clone(), 1).unwrap();
    let ideal = peerclass::worthy_set(&g, &alpha).unwrap();
    assert_eq!(ideal.ids(), vec![0, 1, 2, 3, 4]);
    let p = wub_probabilistic(&g, &cfg).unwrap();
    assert_eq!(expected_coincidence(&p, &ideal, MeasureKind::MainC).unwrap(), q(9, 10));
    let m = wub_deterministic(&g, &cfg).unwrap();
    assert_eq!(coincidence(&m, &ideal, MeasureKind::MainC).unwrap(), q(1, 1));
}

#[test]
fn small_graph_where_wub_det_misses_its_floor() {
    // Six agents tie at score 0 just outside the worthy set. Each one's single
    // review lowers an agent ranked above the tie, which lifts every other tied
    // y into W in G_{x,y} and leaves x alone in B(G_x), so it is accepted.
    let edges = [
        (0, 11, 0), (1, 4, 1), (2, 3, 0), (3, 2, 1), (4, 8, 0), (5, 3, 1),
        (6, 11, 1), (7, 10, 1), (8, 4, 1), (9, 8, 1), (10, 6, 0), (11, 5, 0),
    ];
    let g = WeightedDigraph::new(12, edges.iter().map(|&(a, b, w)| (a, b, q(w, 1)))).unwrap();
    let alpha = q(1, 2);
    let cfg = MechanismConfig::new(alpha.clone(), 1).unwrap();
    assert!(cfg.in_deterministic_regime(12));
    let m = wub_deterministic(&g, &cfg).unwrap();
    assert_eq!(m.mask(), oracle_deterministic(&g, &alpha, 1).as_slice());
    let ideal = peerclass::worthy_set(&g, &alpha).unwrap();
    assert_eq!(ideal.ids(), vec![2, 3, 4, 8, 10, 11]);
    assert_eq!(m.ids(), vec![0, 1, 2, 3, 4, 5, 7, 8, 9, 10, 11]);
    let c = coincidence(&m, &ideal, MeasureKind::MainC).unwrap();
    assert_eq!(c, q(1, 6));
    assert!(c < q(1, 2) - q(3, 12));
}

#[test]
fn random_graph_where_wub_det_misses_its_floor() {
    let text = include_str!("data/wub_det_below_floor.json");
    let g = parse_graph_json(text).unwrap();
    let alpha = q(1, 2);
    let cfg = MechanismConfig::new(alpha.clone(), 1).unwrap();
    assert!(cfg.in_deterministic_regime(40));
    let m = wub_deterministic(&g, &cfg).unwrap();
    assert_eq!(m.mask(), oracle_deterministic(&g, &alpha, 1).as_slice());
    let ideal = peerclass::worthy_set(&g, &alpha).unwrap();
    assert_eq!(coincidence(&m, &ideal, MeasureKind::MainC).unwrap(), q(3, 10));
}

#[test]
fn empty_graph_selects_everyone() {
    let g = WeightedDigraph::empty(10);
    let cfg = MechanismConfig::new(q(1, 2), 1).unwrap();
    assert_eq!(wub_deterministic(&g, &cfg).unwrap(), AgentSet::full(10));
    assert_eq!(wub_worthy_only(&g, &cfg).unwrap(), AgentSet::full(10));
}

fn arb_case() -> impl Strategy<Value = (WeightedDigraph, Rational, usize)> {
    (4usize..14, 1usize..4, any::<u64>(), prop::sample::select(vec![(1i64, 3i64), (1, 2), (2, 3), (3, 4)]))
        .prop_filter_map("beta must be positive", |(n, delta, seed, (p, d))| {
            let alpha = q(p, d);
            if Rational::from_usize(delta) >= &alpha * Rational::from_usize(n) {
                return None;
            }
            let palette = [q(-1, 1), q(0, 1), q(1, 2), q(1, 1)];
            let g = random_graph(n, delta, &palette, &mut ChaCha8Rng::seed_from_u64(seed));
            Some((g, alpha, delta))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_and_mechanisms_match_the_oracle((g, alpha, delta) in arb_case()) {
        let cfg = MechanismConfig::new(alpha.clone(), delta).unwrap();
        let part = wub_partition(&g, &cfg).unwrap();
        for x in 0..g.n() {
            let expected = oracle_zone(&g, x, &alpha, delta);
            let actual = match part.region(AgentId(x)) {
                peerclass::Region::Worthy => Zone::W,
                peerclass::Region::Unworthy => Zone::U,
                peerclass::Region::Borderline => Zone::B,
            };
            prop_assert_eq!(actual, expected, "agent {}", x);
        }
        let det = wub_deterministic(&g, &cfg).unwrap();
        let expected = oracle_deterministic(&g, &alpha, delta);
        prop_assert_eq!(det.mask(), expected.as_slice());
        let p = wub_probabilistic(&g, &cfg).unwrap();
        for x in 0..g.n() {
            let want = match oracle_zone(&g, x, &alpha, delta) {
                Zone::W => q(1, 1),
                Zone::U => q(0, 1),
                Zone::B => q(1, 2),
            };
            prop_assert_eq!(p.get(AgentId(x)), &want);
        }
    }

    #[test]
    fn own_reviews_never_move_own_label((g, alpha, delta) in arb_case(), pick in any::<prop::sample::Index>(), w in -4i64..=4) {
        let cfg = MechanismConfig::new(alpha, delta).unwrap();
        let x = AgentId(pick.index(g.n()));
        let reviews = vec![Weight::new(q(w, 4)).unwrap(); g.out_degree(x)];
        let h = g.with_agent_reviews(x, &reviews).unwrap();
        prop_assert_eq!(
            wub_deterministic(&g, &cfg).unwrap().contains(x),
            wub_deterministic(&h, &cfg).unwrap().contains(x)
        );
        let (pg, ph) = (wub_probabilistic(&g, &cfg).unwrap(), wub_probabilistic(&h, &cfg).unwrap());
        prop_assert_eq!(pg.get(x), ph.get(x));
    }
}
