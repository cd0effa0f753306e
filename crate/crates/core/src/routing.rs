//! DST walker routing: launch, per-hop decisions, duplicate forwarding, TTL
//! enhancement and reverse-path reinforcement.

use crate::config::{RewardParams, Thresholds};
use crate::error::Result;
use crate::net::{peer_qp, Network, ObjectId, Peer, PeerClass, PeerId};
use crate::qtable::{
    merge_ranked, reward_neighbour, reward_power, reward_query, t_max, update_neighbour_q, update_power_q,
    update_query_q, Keyword, Outcome, QValue, TableKind,
};

/// How a hop was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RouteKind {
    /// A row of the query table.
    QueryTable,
    /// The neighbour table, directly or via the merged ranking.
    Neighbour,
    /// The power-peer table, directly or via the merged ranking.
    PowerPeer,
    /// Duplicate rerouted through the neighbour table.
    DupNeighbour,
    /// Duplicate rerouted through the power-peer table.
    DupPower,
    /// Baseline hop over raw adjacency.
    Random,
}

impl RouteKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RouteKind::QueryTable => "qq",
            RouteKind::Neighbour => "nq",
            RouteKind::PowerPeer => "pq",
            RouteKind::DupNeighbour => "dup_nq",
            RouteKind::DupPower => "dup_pq",
            RouteKind::Random => "adj",
        }
    }

    fn from_table(kind: TableKind) -> Self {
        match kind {
            TableKind::Neighbour => RouteKind::Neighbour,
            TableKind::PowerPeer => RouteKind::PowerPeer,
            TableKind::Query => RouteKind::QueryTable,
        }
    }

    pub fn is_power_hop(self) -> bool {
        matches!(self, RouteKind::PowerPeer | RouteKind::DupPower)
    }
}

/// One walker of a query.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerMessage {
    /// Unique per walker.
    pub message_id: u64,
    /// Shared by all walkers of a query; duplicates are detected on it.
    pub query_id: u64,
    pub source: PeerId,
    pub keyword: Keyword,
    pub ttl0: u32,
    pub ttl_remaining: u32,
    /// Peers visited so far, source first.
    pub path: Vec<PeerId>,
    /// `routes[i]` is how `path[i]` chose `path[i + 1]`.
    pub routes: Vec<RouteKind>,
    pub enhanced: bool,
}

impl WalkerMessage {
    pub fn new(message_id: u64, query_id: u64, source: PeerId, keyword: Keyword, ttl0: u32) -> Self {
        Self {
            message_id,
            query_id,
            source,
            keyword,
            ttl0,
            ttl_remaining: ttl0,
            path: vec![source],
            routes: Vec::new(),
            enhanced: false,
        }
    }

    pub fn hops_visited(&self) -> u32 {
        self.path.len() as u32 - 1
    }

    pub fn current(&self) -> PeerId {
        *self.path.last().expect("path starts at the source")
    }

    pub fn on_path(&self, p: PeerId) -> bool {
        self.path.contains(&p)
    }

    /// The peer that sent this walker to its current position.
    pub fn sender(&self) -> Option<PeerId> {
        let n = self.path.len();
        (n >= 2).then(|| self.path[n - 2])
    }

    /// Moves one hop, consuming one unit of budget.
    pub fn advance(&mut self, next: PeerId, via: RouteKind) {
        debug_assert!(self.ttl_remaining > 0);
        self.ttl_remaining -= 1;
        self.path.push(next);
        self.routes.push(via);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminateReason {
    TtlExhausted,
    DeadEnd,
    DuplicateDropped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoutingAction {
    LocalHit { nr: u32, object: ObjectId },
    Forward { next: PeerId, via: RouteKind },
    Terminate(TerminateReason),
}

/// Reply travelling back along a walker's path.
#[derive(Clone, Debug, PartialEq)]
pub struct HitReport {
    pub query_id: u64,
    pub message_id: u64,
    pub keyword: Keyword,
    pub responder: PeerId,
    pub responder_class: PeerClass,
    pub q_p: Option<QValue>,
    pub nr: u32,
    pub hp: u32,
    /// Forward path from source to responder.
    pub path: Vec<PeerId>,
    pub routes: Vec<RouteKind>,
}

impl HitReport {
    pub fn from_walker(net: &Network, msg: &WalkerMessage, nr: u32, t: &Thresholds) -> Result<Self> {
        let responder = msg.current();
        let class = net.peer(responder).class;
        let q_p = match class {
            PeerClass::Power => Some(peer_qp(net, responder, t)?),
            PeerClass::Ordinary => None,
        };
        Ok(Self {
            query_id: msg.query_id,
            message_id: msg.message_id,
            keyword: msg.keyword,
            responder,
            responder_class: class,
            q_p,
            nr,
            hp: msg.hops_visited(),
            path: msg.path.clone(),
            routes: msg.routes.clone(),
        })
    }
}

/// Next hop for a fresh walker at `peer`, excluding its own path and dead peers.
///
/// Power peers route over their power-peer table. Otherwise a query-table row for
/// the keyword decides, and failing that the merged neighbour/power ranking.
pub fn select_next_hop(net: &Network, peer: &Peer, msg: &WalkerMessage) -> Option<(PeerId, RouteKind)> {
    let open = |q: PeerId| net.is_alive(q) && !msg.on_path(q);
    if peer.is_power() {
        if let Some((q, _)) = peer.tables.pq.best(open) {
            return Some((q, RouteKind::PowerPeer));
        }
    }
    if let Some(row) = peer.tables.qq.row(msg.keyword) {
        if let Some((q, _)) = row.values().best(open) {
            return Some((q, RouteKind::QueryTable));
        }
    }
    merge_ranked(&peer.tables.nq, &peer.tables.pq, open)
        .first()
        .map(|&(q, _, kind)| (q, RouteKind::from_table(kind)))
}

/// Decision for a walker arriving at `peer` for the first time.
pub fn handle_query(net: &Network, peer: &Peer, msg: &WalkerMessage) -> RoutingAction {
    let (nr, first) = net.local_matches(peer.id, msg.keyword);
    if let Some(object) = first {
        return RoutingAction::LocalHit { nr, object };
    }
    if msg.ttl_remaining == 0 {
        return RoutingAction::Terminate(TerminateReason::TtlExhausted);
    }
    match select_next_hop(net, peer, msg) {
        Some((next, via)) => RoutingAction::Forward { next, via },
        None => RoutingAction::Terminate(TerminateReason::DeadEnd),
    }
}

/// Reroutes a walker arriving at a peer that already carried its query. The
/// candidate table follows the sender's class; peers in `seen` are excluded.
pub fn forward_duplicate(
    net: &Network,
    peer: &Peer,
    msg: &WalkerMessage,
    sender_class: PeerClass,
    mut seen: impl FnMut(PeerId) -> bool,
) -> RoutingAction {
    if msg.ttl_remaining == 0 {
        return RoutingAction::Terminate(TerminateReason::DuplicateDropped);
    }
    let open = |q: PeerId| net.is_alive(q) && !seen(q);
    let pick = match sender_class {
        PeerClass::Ordinary => peer.tables.nq.best(open).map(|(q, _)| (q, RouteKind::DupNeighbour)),
        PeerClass::Power => peer.tables.pq.best(open).map(|(q, _)| (q, RouteKind::DupPower)),
    };
    match pick {
        Some((next, via)) => RoutingAction::Forward { next, via },
        None => RoutingAction::Terminate(TerminateReason::DuplicateDropped),
    }
}

/// Grants an exhausted walker at a power peer its one extension up to `t_max`.
pub fn maybe_enhance_ttl(peer: &Peer, msg: &mut WalkerMessage) -> bool {
    if msg.ttl_remaining != 0 || msg.enhanced || !peer.is_power() {
        return false;
    }
    msg.ttl_remaining = t_max(msg.ttl0) - msg.ttl0;
    msg.enhanced = true;
    true
}

/// First hops chosen by a query source.
#[derive(Clone, Debug, PartialEq)]
pub struct Launch {
    pub targets: Vec<(PeerId, RouteKind)>,
    /// The keyword had no row and one was created from the neighbour table.
    pub inserted_row: bool,
}

/// Picks up to `k` first hops. A known keyword routes by its row; an unseen one
/// gets a fresh row and routes by the merged neighbour/power ranking.
pub fn launch_query(net: &mut Network, source: PeerId, keyword: Keyword, k: usize, tick: u64) -> Launch {
    let peer = net.peer(source);
    if peer.tables.qq.contains(keyword) {
        let ranked = peer.tables.qq.ranked(keyword, |q| net.is_alive(q));
        if !ranked.is_empty() {
            let targets = ranked.into_iter().take(k).map(|q| (q, RouteKind::QueryTable)).collect();
            net.peer_mut(source).tables.qq.touch(keyword, tick);
            return Launch {
                targets,
                inserted_row: false,
            };
        }
    }
    let targets: Vec<(PeerId, RouteKind)> = merge_ranked(&peer.tables.nq, &peer.tables.pq, |q| net.is_alive(q))
        .into_iter()
        .take(k)
        .map(|(q, _, kind)| (q, RouteKind::from_table(kind)))
        .collect();
    let tables = &mut net.peer_mut(source).tables;
    let inserted_row = tables.qq.insert_keyword(keyword, &tables.nq, tick);
    Launch { targets, inserted_row }
}

/// Which tables one reverse update touched, for tracing and tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TableTouch {
    pub owner: PeerId,
    pub table: TouchedTable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TouchedTable {
    Neighbour,
    PowerPeer,
    Query,
}

fn ensure_row_entry(net: &mut Network, owner: PeerId, keyword: Keyword, next: PeerId, tick: u64) {
    let tables = &mut net.peer_mut(owner).tables;
    if !tables.qq.contains(keyword) {
        tables.qq.insert_keyword_from_column_averages(keyword, &tables.nq, tick);
    }
    let seed = tables
        .nq
        .get(next)
        .or_else(|| tables.pq.get(next))
        .unwrap_or(QValue::ZERO);
    if let Some(row) = tables.qq.row_mut(keyword) {
        if !row.values().contains(next) {
            row.values_mut().insert(next, seed);
        }
    }
}

/// Reinforces every dispatcher on the reply path of a hit.
///
/// Each node rewards the entry it used, with `hp` counted from that node to the
/// responder. Neighbour-routed nodes also learn a query-table row for the keyword.
/// A power responder reached over a neighbour link is added to the power-peer
/// table of path nodes that do not list it yet.
pub fn apply_hit_reverse_updates(
    net: &mut Network,
    report: &HitReport,
    params: &RewardParams,
    ttl0: u32,
    tick: u64,
) -> Result<Vec<TableTouch>> {
    let mut touched = Vec::new();
    let hp = report.hp as usize;
    let kw = report.keyword;
    for i in (0..hp).rev() {
        let owner = report.path[i];
        let next = report.path[i + 1];
        let dist = (hp - i) as u32;
        match report.routes[i] {
            RouteKind::QueryTable | RouteKind::Neighbour => {
                if report.routes[i] == RouteKind::Neighbour {
                    let n = net.peer(next);
                    let r_n = reward_neighbour(n.hits_produced, n.queries_received, params.k);
                    let changed = net
                        .peer_mut(owner)
                        .tables
                        .nq
                        .update(next, |q| update_neighbour_q(q, r_n, params.nb_w1, params.nb_w2, true));
                    if changed {
                        touched.push(TableTouch {
                            owner,
                            table: TouchedTable::Neighbour,
                        });
                    }
                }
                let r = reward_query(ttl0, dist, report.nr, params.qr_w1, params.qr_w2)?;
                ensure_row_entry(net, owner, kw, next, tick);
                let qq = &mut net.peer_mut(owner).tables.qq;
                qq.touch(kw, tick);
                if let Some(row) = qq.row_mut(kw) {
                    row.values_mut()
                        .update(next, |q| update_query_q(q, r, params.alpha, Outcome::Hit));
                    touched.push(TableTouch {
                        owner,
                        table: TouchedTable::Query,
                    });
                }
            }
            RouteKind::PowerPeer | RouteKind::DupPower => {
                let r = reward_power(ttl0, dist, params.pp_w1, params.k);
                if net
                    .peer_mut(owner)
                    .tables
                    .pq
                    .update(next, |q| update_power_q(q, r, params.alpha, Outcome::Hit))
                {
                    touched.push(TableTouch {
                        owner,
                        table: TouchedTable::PowerPeer,
                    });
                }
            }
            RouteKind::DupNeighbour => {
                let n = net.peer(next);
                let r_n = reward_neighbour(n.hits_produced, n.queries_received, params.k);
                if net
                    .peer_mut(owner)
                    .tables
                    .nq
                    .update(next, |q| update_neighbour_q(q, r_n, params.nb_w1, params.nb_w2, true))
                {
                    touched.push(TableTouch {
                        owner,
                        table: TouchedTable::Neighbour,
                    });
                }
            }
            RouteKind::Random => {}
        }
    }

    let reached_by_link = report.routes.last().is_some_and(|r| !r.is_power_hop());
    if let (Some(qp), true) = (report.q_p, reached_by_link) {
        for &owner in &report.path[..hp] {
            let tables = &mut net.peer_mut(owner).tables;
            if owner != report.responder
                && !tables.nq.contains(report.responder)
                && !tables.pq.contains(report.responder)
            {
                tables.pq.insert(report.responder, qp);
                touched.push(TableTouch {
                    owner,
                    table: TouchedTable::PowerPeer,
                });
            }
        }
    }
    touched.sort_unstable();
    touched.dedup();
    Ok(touched)
}

/// Negative reinforcement for a walker that ended without a hit: every dispatcher
/// on its path decays the entry it used.
pub fn apply_miss_updates(net: &mut Network, msg: &WalkerMessage, params: &RewardParams) {
    for (i, &via) in msg.routes.iter().enumerate() {
        let owner = msg.path[i];
        let next = msg.path[i + 1];
        match via {
            RouteKind::QueryTable => {
                if let Some(row) = net.peer_mut(owner).tables.qq.row_mut(msg.keyword) {
                    row.values_mut()
                        .update(next, |q| update_query_q(q, 0.0, params.alpha, Outcome::Miss));
                }
            }
            RouteKind::Neighbour | RouteKind::DupNeighbour => {
                let n = net.peer(next);
                let r_n = reward_neighbour(n.hits_produced, n.queries_received, params.k);
                let tables = &mut net.peer_mut(owner).tables;
                tables
                    .nq
                    .update(next, |q| update_neighbour_q(q, r_n, params.nb_w1, params.nb_w2, false));
                if let Some(row) = tables.qq.row_mut(msg.keyword) {
                    row.values_mut()
                        .update(next, |q| update_query_q(q, 0.0, params.alpha, Outcome::Miss));
                }
            }
            RouteKind::PowerPeer | RouteKind::DupPower => {
                net.peer_mut(owner)
                    .tables
                    .pq
                    .update(next, |q| update_power_q(q, 0.0, params.alpha, Outcome::Miss));
            }
            RouteKind::Random => {}
        }
    }
}

/// What happened when a successful query's source tried to keep a copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheOutcome {
    Cached,
    AlreadyHeld,
    NoHeadroom,
    /// Free riders never keep copies.
    Declined,
}

/// Copies a found object to the query source when it has room. Popularity counts
/// every successful download regardless.
pub fn cache_object_at_source(net: &mut Network, source: PeerId, object: ObjectId) -> CacheOutcome {
    net.objects[object.0 as usize].popularity += 1;
    let p = net.peer_mut(source);
    if p.free_rider {
        return CacheOutcome::Declined;
    }
    if p.holds(object) {
        return CacheOutcome::AlreadyHeld;
    }
    if !p.has_headroom() {
        return CacheOutcome::NoHeadroom;
    }
    p.host(object);
    CacheOutcome::Cached
}
