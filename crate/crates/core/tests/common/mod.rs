//! The nine-peer worked example shared by the fixture and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dstsim_core::sim::Simulation;
use dstsim_core::{
    DataObject, IssueOutcome, Keyword, Network, ObjectId, PeerClass, PeerId, PeerScores, QValue, SimConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const NAMES: &str = "ABCDEFGHI";
pub const BABY: Keyword = 0;
pub const HELLO: Keyword = 1;
pub const PRINTER: Keyword = 2;
pub const BOOK: Keyword = 3;
pub const MISC: Keyword = 9;

pub fn id(name: char) -> PeerId {
    PeerId(NAMES.find(name).unwrap() as u32)
}

pub fn name(p: PeerId) -> char {
    NAMES.as_bytes()[p.index()] as char
}

pub fn scores(entries: &[(char, f64)]) -> impl Iterator<Item = (PeerId, QValue)> + '_ {
    entries.iter().map(|&(n, q)| (id(n), QValue::new(q)))
}

pub fn fixture() -> Network {
    let mut net = Network::with_peers(9, 0);
    for e in ["AC", "AD", "BD", "BE", "BF", "CE", "EH", "FH", "GF", "GH"] {
        let mut c = e.chars();
        net.add_edge(id(c.next().unwrap()), id(c.next().unwrap()));
    }
    net.objects = vec![
        DataObject {
            id: ObjectId(0),
            keywords: vec![BABY],
            popularity: 0,
        },
        DataObject {
            id: ObjectId(1),
            keywords: vec![HELLO],
            popularity: 0,
        },
        DataObject {
            id: ObjectId(2),
            keywords: vec![MISC],
            popularity: 0,
        },
    ];
    for p in net.peers.iter_mut() {
        p.storage_capacity = 4;
        p.host(ObjectId(2));
    }
    let i = net.peer_mut(id('I'));
    i.host(ObjectId(0));
    i.host(ObjectId(1));
    for n in ['D', 'E', 'I'] {
        let p = net.peer_mut(id(n));
        p.class = PeerClass::Power;
        p.queue_capacity = 100;
    }

    let t = &mut net.peer_mut(id('A')).tables;
    t.nq = scores(&[('C', 547.0), ('D', 561.0)]).collect();
    t.pq = scores(&[('E', 767.0)]).collect();
    t.qq.insert_keyword(BABY, &scores(&[('C', 569.0), ('D', 201.0)]).collect(), 0);

    let t = &mut net.peer_mut(id('C')).tables;
    t.nq = scores(&[('A', 547.0), ('E', 652.0)]).collect();
    t.pq = scores(&[('D', 523.0)]).collect();
    t.qq.insert_keyword(PRINTER, &scores(&[('A', 373.0), ('E', 221.0)]).collect(), 0);
    t.qq.insert_keyword(BOOK, &scores(&[('A', 143.0), ('E', 453.0)]).collect(), 0);

    let e = net.peer_mut(id('E'));
    e.tables.nq = scores(&[('B', 654.0), ('H', 766.0)]).collect();
    e.tables.pq = scores(&[('D', 744.0), ('I', 1421.0)]).collect();
    e.queries_received = 10;
    e.hits_produced = 4;
    net
}

pub fn config() -> SimConfig {
    let mut cfg = SimConfig::desk();
    cfg.nodes = 9;
    cfg.free_riders = 0;
    cfg.ttl = 3;
    cfg.walkers = 1;
    cfg.reward.qr_w1 = 0.2;
    cfg.reward.qr_w2 = 0.8;
    cfg.reward.pp_w1 = 0.3;
    cfg.load.balancing = false;
    cfg
}

pub type Snapshot = Vec<(PeerScores, PeerScores, BTreeMap<Keyword, PeerScores>)>;

pub fn snapshot(net: &Network) -> Snapshot {
    net.peers
        .iter()
        .map(|p| {
            let qq = p.tables.qq.rows().map(|(k, r)| (k, r.values().clone())).collect();
            ((*p.tables.nq).clone(), (*p.tables.pq).clone(), qq)
        })
        .collect()
}

pub fn changed(before: &Snapshot, after: &Snapshot) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (i, (b, a)) in before.iter().zip(after).enumerate() {
        let n = name(PeerId(i as u32));
        if b.0 != a.0 {
            out.insert(format!("{n}.NQ"));
        }
        if b.1 != a.1 {
            out.insert(format!("{n}.PQ"));
        }
        if b.2 != a.2 {
            out.insert(format!("{n}.QQ"));
        }
    }
    out
}

pub fn path(sim: &Simulation, query: u64) -> String {
    let mut s = String::new();
    for r in sim.trace().iter().filter(|r| r.query_id == query) {
        if s.is_empty() {
            s.push(name(r.peer));
        }
        if let Some(next) = r.next {
            s.push(name(next));
        }
    }
    s
}

pub fn run_query(sim: &mut Simulation, keyword: Keyword) -> (Snapshot, Snapshot) {
    let before = snapshot(sim.network());
    assert_eq!(sim.issue_query(id('A'), keyword).unwrap(), IssueOutcome::Launched);
    sim.run_to_idle().unwrap();
    (before, snapshot(sim.network()))
}

pub fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// A traced simulation over the fixture network.
pub fn fixture_sim() -> Simulation {
    let mut sim = Simulation::with_network(config(), fixture(), ChaCha8Rng::seed_from_u64(0));
    sim.enable_trace();
    sim
}
