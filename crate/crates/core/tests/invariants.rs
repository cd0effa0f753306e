//! Whole-run and component invariants over randomly drawn small configurations.

use dstsim_core::baselines::ApsIndex;
use dstsim_core::load::{redistribute, LoadReport};
use dstsim_core::net::{apply_churn, generate_topology};
use dstsim_core::qtable::t_max;
use dstsim_core::routing::WalkerMessage;
use dstsim_core::{run_experiment, Algo, ApsParams, PeerId, SimConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_config() -> impl Strategy<Value = SimConfig> {
    (
        30u32..160,
        2.0f64..4.5,
        0u32..6,
        3u32..12,
        1u32..4,
        (2u32..8, 1u32..8),
        any::<u64>(),
        prop::sample::select(Algo::ALL.to_vec()),
        0.5f64..=1.0,
    )
        .prop_map(
            |(nodes, avg_degree, free_riders, objects, qpn, (ttl, walkers), seed, algo, up)| {
                let mut c = SimConfig::desk();
                c.nodes = nodes;
                c.avg_degree = avg_degree;
                c.free_riders = free_riders;
                c.objects = objects;
                c.keyword_pool = 60;
                c.queries_per_node = qpn;
                c.ttl = ttl;
                c.walkers = walkers;
                c.seed = seed;
                c.algo = algo;
                c.up_fraction = up;
                c.churn_interval_queries = 40;
                c.metric_interval = 25;
                c
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn runs_respect_their_invariants(cfg in small_config()) {
        let r = run_experiment(&cfg).unwrap();
        prop_assert!(r.max_hops <= t_max(cfg.ttl));
        prop_assert_eq!(r.outcomes.launched, r.outcomes.terminated());
        prop_assert!(r.network.check_invariants().is_ok());
        let alive = r.network.peers.iter().filter(|p| p.alive).count();
        prop_assert_eq!(r.network.len(), cfg.nodes as usize);
        prop_assert!(alive <= cfg.nodes as usize);

        let total = r.series.total();
        prop_assert_eq!(total.queries_issued + r.skipped_queries + r.satisfied_locally, cfg.scheduled_queries());
        for rec in &r.series.records {
            prop_assert!(rec.hits <= rec.queries_issued);
            prop_assert!(rec.duplicates_forwarded + rec.duplicates_dropped <= rec.duplicates_generated);
            prop_assert!((0.0..=1.0).contains(&rec.coverage_fraction));
            prop_assert!(rec.hits_by_ordinary + rec.hits_by_power == rec.hits);
            if cfg.algo == Algo::Dst {
                prop_assert_eq!(rec.free_rider_msgs_received, 0);
                prop_assert_eq!(rec.hits_via_query_table + rec.hits_via_parallel_routing, rec.hits);
            }
        }
        for (i, rec) in r.series.records.iter().enumerate() {
            let last = i + 1 == r.series.len();
            prop_assert!(last || rec.queries_issued == cfg.metric_interval);
        }
    }

    #[test]
    fn identical_configs_give_identical_bytes(cfg in small_config()) {
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        prop_assert_eq!(a.series.to_csv_string(), b.series.to_csv_string());
        prop_assert_eq!(a.topology_hash, b.topology_hash);
    }

    #[test]
    fn algorithms_share_the_starting_network(cfg in small_config()) {
        let hashes: Vec<String> = Algo::ALL
            .iter()
            .map(|&algo| {
                let mut c = cfg.clone();
                c.algo = algo;
                c.queries_per_node = 1;
                run_experiment(&c).unwrap().topology_hash
            })
            .collect();
        prop_assert!(hashes.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn topology_is_simple_and_connected(n in 2u32..300, avg in 1.0f64..6.0, seed in any::<u64>()) {
        prop_assume!(avg <= (n - 1) as f64);
        let tree = 2.0 * (n - 1) as f64 / n as f64;
        if tree > avg * 1.05 {
            prop_assert!(generate_topology(n, avg, 0, seed).unwrap_err().is_config());
            return Ok(());
        }
        let net = generate_topology(n, avg, 0, seed).unwrap();
        prop_assert!(net.check_invariants().is_ok());
        prop_assert!(net.is_connected());
        let target = ((avg * n as f64 / 2.0).round() as usize).max(n as usize - 1);
        prop_assert_eq!(net.edge_count(), target);
    }

    #[test]
    fn churn_swaps_equal_counts(n in 4u32..200, up in 0.3f64..=1.0, seed in any::<u64>()) {
        let mut net = generate_topology(n, 2.0_f64.min((n - 1) as f64), 0, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        dstsim_core::net::set_initial_liveness(&mut net, up, &mut rng);
        let before = net.alive_count();
        let down_before = n as usize - before;
        let out = apply_churn(&mut net, &mut rng);
        prop_assert_eq!(out.went_up.len(), down_before.div_ceil(2));
        prop_assert_eq!(out.went_down.len(), out.went_up.len().min(before));
        prop_assert_eq!(net.len(), n as usize);
        prop_assert_eq!(net.alive_count(), before + out.went_up.len() - out.went_down.len());
    }

    #[test]
    fn aps_index_stays_positive(ops in prop::collection::vec((0u32..4, 0u32..4, 0u32..3, any::<bool>()), 1..300)) {
        let mut idx = ApsIndex::new(ApsParams::default());
        for &(a, b, kw, hit) in &ops {
            idx.update(PeerId(a), PeerId(b), kw, hit);
            prop_assert!(idx.get(PeerId(a), PeerId(b), kw) >= 1.0);
        }
        let mut msg = WalkerMessage::new(0, 0, PeerId(0), 1, 3);
        msg.advance(PeerId(1), dstsim_core::RouteKind::Random);
        idx.on_walker_end(&msg, true);
        prop_assert!(idx.get(PeerId(0), PeerId(1), 1) >= 1.0);
    }

    #[test]
    fn redistribution_conserves_messages(
        loads in prop::collection::vec((0u32..120, 1u32..200), 0..12),
        pending in 0usize..80,
        threshold in 0.1f64..=1.0,
    ) {
        let reports: Vec<LoadReport> = loads
            .iter()
            .enumerate()
            .map(|(i, &(len, cap))| LoadReport::new(PeerId(i as u32), len.min(cap), cap))
            .collect();
        let msgs: Vec<usize> = (0..pending).collect();
        let moved = redistribute(&reports, &msgs, threshold);
        prop_assert!(moved.len() <= pending);
        let placed: Vec<usize> = moved.iter().map(|&(m, _)| m).collect();
        prop_assert_eq!(placed, (0..moved.len()).collect::<Vec<_>>());
        for r in &reports {
            let extra = moved.iter().filter(|&&(_, p)| p == r.peer).count() as f64;
            if extra > 0.0 {
                prop_assert!(r.queue_len as f64 + extra <= threshold * r.queue_capacity as f64 + 1e-9);
            }
        }
    }
}

#[test]
fn one_query_per_node() {
    let mut cfg = SimConfig::desk();
    cfg.nodes = 100;
    cfg.free_riders = 5;
    cfg.queries_per_node = 1;
    cfg.up_fraction = 1.0;
    cfg.algo = Algo::Rw;
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.series.total().queries_issued + r.satisfied_locally, 100);
}

#[test]
fn desk_dst_never_messages_free_riders() {
    let mut cfg = SimConfig::desk();
    cfg.nodes = 400;
    cfg.free_riders = 50;
    cfg.queries_per_node = 5;
    let r = run_experiment(&cfg).unwrap();
    assert!(r.series.records.iter().all(|rec| rec.free_rider_msgs_received == 0));
}
