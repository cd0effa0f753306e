//! k-random-walk and adaptive probabilistic search over raw adjacency.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::config::{ApsMode, ApsParams};
use crate::net::{Network, PeerId};
use crate::qtable::Keyword;
use crate::routing::{RouteKind, RoutingAction, TerminateReason, WalkerMessage};

/// Alive neighbours of `peer`, minus `sender` when that still leaves a choice.
pub fn walk_candidates(net: &Network, peer: PeerId, sender: Option<PeerId>) -> Vec<PeerId> {
    let mut c: Vec<PeerId> = net
        .neighbours(peer)
        .iter()
        .copied()
        .filter(|&q| net.is_alive(q))
        .collect();
    if let Some(s) = sender {
        if c.len() >= 2 {
            c.retain(|&q| q != s);
        }
    }
    c
}

/// One uniform random-walk hop.
pub fn random_walk_step(net: &Network, msg: &WalkerMessage, rng: &mut impl Rng) -> RoutingAction {
    if msg.ttl_remaining == 0 {
        return RoutingAction::Terminate(TerminateReason::TtlExhausted);
    }
    let c = walk_candidates(net, msg.current(), msg.sender());
    if c.is_empty() {
        return RoutingAction::Terminate(TerminateReason::DeadEnd);
    }
    RoutingAction::Forward {
        next: c[rng.gen_range(0..c.len())],
        via: RouteKind::Random,
    }
}

/// Per-peer, per-keyword forwarding weights of adaptive probabilistic search.
#[derive(Clone, Debug)]
pub struct ApsIndex {
    params: ApsParams,
    values: HashMap<(PeerId, PeerId, Keyword), f64>,
}

impl ApsIndex {
    pub fn new(params: ApsParams) -> Self {
        Self {
            params,
            values: HashMap::new(),
        }
    }

    pub fn params(&self) -> &ApsParams {
        &self.params
    }

    pub fn get(&self, peer: PeerId, neighbour: PeerId, keyword: Keyword) -> f64 {
        self.values
            .get(&(peer, neighbour, keyword))
            .copied()
            .unwrap_or(self.params.init)
    }

    pub fn set(&mut self, peer: PeerId, neighbour: PeerId, keyword: Keyword, value: f64) {
        self.values
            .insert((peer, neighbour, keyword), value.max(self.params.floor));
    }

    /// `hit` adds the reward; a miss subtracts the penalty down to the floor.
    pub fn update(&mut self, peer: PeerId, neighbour: PeerId, keyword: Keyword, hit: bool) {
        let v = self.get(peer, neighbour, keyword);
        let next = if hit {
            v + self.params.reward
        } else {
            (v - self.params.penalty).max(self.params.floor)
        };
        self.values.insert((peer, neighbour, keyword), next);
    }

    /// Bookkeeping when `peer` forwards to `neighbour`.
    pub fn on_forward(&mut self, peer: PeerId, neighbour: PeerId, keyword: Keyword) {
        match self.params.mode {
            ApsMode::Pessimistic => self.update(peer, neighbour, keyword, false),
            ApsMode::Optimistic => self.update(peer, neighbour, keyword, true),
        }
    }

    /// Reverse-path feedback once a walker finishes.
    pub fn on_walker_end(&mut self, msg: &WalkerMessage, hit: bool) {
        let apply = match self.params.mode {
            ApsMode::Pessimistic => hit,
            ApsMode::Optimistic => !hit,
        };
        if !apply {
            return;
        }
        for w in msg.path.windows(2) {
            self.update(w[0], w[1], msg.keyword, hit);
        }
    }

    /// Entries that differ from the initial value.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Up to `k` distinct candidates, each draw proportional to its index value.
pub fn aps_select(
    index: &ApsIndex,
    peer: PeerId,
    candidates: &[PeerId],
    keyword: Keyword,
    k: usize,
    rng: &mut impl Rng,
) -> Vec<PeerId> {
    let mut pool: Vec<PeerId> = candidates.to_vec();
    let mut weights: Vec<f64> = pool.iter().map(|&q| index.get(peer, q, keyword)).collect();
    let mut out = Vec::with_capacity(k.min(pool.len()));
    while out.len() < k && !pool.is_empty() {
        let i = if pool.len() == 1 {
            0
        } else {
            WeightedIndex::new(&weights)
                .expect("index values stay positive")
                .sample(rng)
        };
        out.push(pool.swap_remove(i));
        weights.swap_remove(i);
    }
    out
}

/// One APS hop: a single index-weighted draw over the walk candidates.
pub fn aps_step(net: &Network, index: &ApsIndex, msg: &WalkerMessage, rng: &mut impl Rng) -> RoutingAction {
    if msg.ttl_remaining == 0 {
        return RoutingAction::Terminate(TerminateReason::TtlExhausted);
    }
    let peer = msg.current();
    let c = walk_candidates(net, peer, msg.sender());
    match aps_select(index, peer, &c, msg.keyword, 1, rng).first() {
        Some(&next) => RoutingAction::Forward {
            next,
            via: RouteKind::Random,
        },
        None => RoutingAction::Terminate(TerminateReason::DeadEnd),
    }
}

/// First hops for `k` walkers: distinct index-weighted picks, topped up with
/// independent draws when the source has fewer than `k` live neighbours.
pub fn aps_launch(
    net: &Network,
    index: &ApsIndex,
    source: PeerId,
    keyword: Keyword,
    k: usize,
    rng: &mut impl Rng,
) -> Vec<PeerId> {
    let c = walk_candidates(net, source, None);
    let mut out = aps_select(index, source, &c, keyword, k, rng);
    while !c.is_empty() && out.len() < k {
        out.push(aps_select(index, source, &c, keyword, 1, rng)[0]);
    }
    out
}

/// First hops for `k` random walkers, each drawn independently.
pub fn rw_launch(net: &Network, source: PeerId, k: usize, rng: &mut impl Rng) -> Vec<PeerId> {
    let c = walk_candidates(net, source, None);
    if c.is_empty() {
        return Vec::new();
    }
    (0..k).map(|_| c[rng.gen_range(0..c.len())]).collect()
}
