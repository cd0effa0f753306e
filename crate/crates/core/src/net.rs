//! Overlay graph, peer state, object placement, power peers and churn.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::config::Thresholds;
use crate::error::{Error, Result};
use crate::qtable::{init_neighbour_q, round_half_away, Keyword, PeerTables, QValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PeerId(pub u32);

impl PeerId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PeerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PeerClass {
    Ordinary,
    Power,
}

impl PeerClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PeerClass::Ordinary => "ordinary",
            PeerClass::Power => "power",
        }
    }
}

/// A shareable object described by a sorted, deduplicated keyword set.
#[derive(Clone, Debug, PartialEq)]
pub struct DataObject {
    pub id: ObjectId,
    pub keywords: Vec<Keyword>,
    pub popularity: u64,
}

impl DataObject {
    pub fn matches(&self, keyword: Keyword) -> bool {
        self.keywords.binary_search(&keyword).is_ok()
    }
}

#[derive(Clone, Debug)]
pub struct Peer {
    pub id: PeerId,
    pub class: PeerClass,
    pub alive: bool,
    /// Set for peers configured to share nothing. They never host or cache objects.
    pub free_rider: bool,
    /// Hosted objects, sorted ascending.
    pub shared: Vec<ObjectId>,
    /// Storage in object slots.
    pub storage_capacity: u32,
    pub queries_received: u64,
    pub hits_produced: u64,
    /// Messages a power peer can hold at a time; zero for ordinary peers.
    pub queue_capacity: u32,
    pub queue_len: u32,
    pub tables: PeerTables,
}

impl Peer {
    pub fn new(id: PeerId) -> Self {
        Self {
            id,
            class: PeerClass::Ordinary,
            alive: true,
            free_rider: false,
            shared: Vec::new(),
            storage_capacity: 1,
            queries_received: 0,
            hits_produced: 0,
            queue_capacity: 0,
            queue_len: 0,
            tables: PeerTables::default(),
        }
    }

    pub fn is_power(&self) -> bool {
        self.class == PeerClass::Power
    }

    /// A free rider is exactly a peer hosting nothing.
    pub fn is_free_rider(&self) -> bool {
        self.shared.is_empty()
    }

    pub fn holds(&self, object: ObjectId) -> bool {
        self.shared.binary_search(&object).is_ok()
    }

    pub fn has_headroom(&self) -> bool {
        (self.shared.len() as u32) < self.storage_capacity
    }

    /// Adds an object if absent. Returns whether it was added.
    pub fn host(&mut self, object: ObjectId) -> bool {
        match self.shared.binary_search(&object) {
            Ok(_) => false,
            Err(pos) => {
                self.shared.insert(pos, object);
                true
            }
        }
    }

    pub fn hit_rate(&self) -> f64 {
        if self.queries_received == 0 {
            0.0
        } else {
            self.hits_produced as f64 / self.queries_received as f64
        }
    }
}

/// The overlay: peers, an undirected adjacency and the object catalogue.
#[derive(Clone, Debug)]
pub struct Network {
    pub peers: Vec<Peer>,
    adjacency: Vec<Vec<PeerId>>,
    pub objects: Vec<DataObject>,
    pub rng_seed: u64,
}

impl Network {
    /// `n` isolated peers.
    pub fn with_peers(n: usize, rng_seed: u64) -> Self {
        Self {
            peers: (0..n as u32).map(|i| Peer::new(PeerId(i))).collect(),
            adjacency: vec![Vec::new(); n],
            objects: Vec::new(),
            rng_seed,
        }
    }

    pub fn len(&self) -> usize {
        self.peers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peers.is_empty()
    }

    #[inline]
    pub fn peer(&self, id: PeerId) -> &Peer {
        &self.peers[id.index()]
    }

    #[inline]
    pub fn peer_mut(&mut self, id: PeerId) -> &mut Peer {
        &mut self.peers[id.index()]
    }

    #[inline]
    pub fn is_alive(&self, id: PeerId) -> bool {
        self.peers[id.index()].alive
    }

    #[inline]
    pub fn neighbours(&self, id: PeerId) -> &[PeerId] {
        &self.adjacency[id.index()]
    }

    #[inline]
    pub fn degree(&self, id: PeerId) -> u32 {
        self.adjacency[id.index()].len() as u32
    }

    pub fn has_edge(&self, a: PeerId, b: PeerId) -> bool {
        self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    /// Adds an undirected edge. Self-loops and duplicates are ignored.
    pub fn add_edge(&mut self, a: PeerId, b: PeerId) -> bool {
        if a == b || self.has_edge(a, b) {
            return false;
        }
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adjacency[x.index()];
            let pos = list.binary_search(&y).unwrap_err();
            list.insert(pos, y);
        }
        true
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn mean_degree(&self) -> f64 {
        if self.peers.is_empty() {
            return 0.0;
        }
        2.0 * self.edge_count() as f64 / self.peers.len() as f64
    }

    pub fn is_connected(&self) -> bool {
        if self.peers.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.peers.len()];
        let mut stack = vec![PeerId(0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(p) = stack.pop() {
            for &q in self.neighbours(p) {
                if !seen[q.index()] {
                    seen[q.index()] = true;
                    count += 1;
                    stack.push(q);
                }
            }
        }
        count == self.peers.len()
    }

    pub fn object(&self, id: ObjectId) -> &DataObject {
        &self.objects[id.0 as usize]
    }

    /// Number of objects at `peer` matching `keyword`, and the lowest such id.
    pub fn local_matches(&self, peer: PeerId, keyword: Keyword) -> (u32, Option<ObjectId>) {
        let mut count = 0;
        let mut first = None;
        for &o in &self.peers[peer.index()].shared {
            if self.objects[o.0 as usize].matches(keyword) {
                count += 1;
                first.get_or_insert(o);
            }
        }
        (count, first)
    }

    /// Every keyword carried by at least one object, ascending.
    pub fn workload_keywords(&self) -> Vec<Keyword> {
        let mut kws: Vec<Keyword> = self.objects.iter().flat_map(|o| o.keywords.iter().copied()).collect();
        kws.sort_unstable();
        kws.dedup();
        kws
    }

    pub fn alive_count(&self) -> usize {
        self.peers.iter().filter(|p| p.alive).count()
    }

    pub fn power_peers(&self) -> Vec<PeerId> {
        self.peers.iter().filter(|p| p.is_power()).map(|p| p.id).collect()
    }

    /// Digest of adjacency and placement; equal digests mean equal starting networks.
    pub fn topology_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.peers.len() as u64).to_le_bytes());
        for (i, list) in self.adjacency.iter().enumerate() {
            h.update((i as u32).to_le_bytes());
            for q in list {
                h.update(q.0.to_le_bytes());
            }
            h.update(u32::MAX.to_le_bytes());
        }
        for p in &self.peers {
            h.update([p.free_rider as u8, p.is_power() as u8]);
            h.update(p.storage_capacity.to_le_bytes());
            for o in &p.shared {
                h.update(o.0.to_le_bytes());
            }
            h.update(u32::MAX.to_le_bytes());
        }
        for o in &self.objects {
            for k in &o.keywords {
                h.update(k.to_le_bytes());
            }
            h.update(u32::MAX.to_le_bytes());
        }
        hex::encode(&h.finalize()[..16])
    }

    /// Q-table dump for all peers, `table_kind,owner_id,key,peer_id,qvalue_int`.
    pub fn dump_tables(&self) -> String {
        let mut out = String::new();
        for p in &self.peers {
            p.tables.dump_into(p.id, &mut out);
        }
        out
    }

    /// Structural and routing-table invariants; returns the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (i, list) in self.adjacency.iter().enumerate() {
            let a = PeerId(i as u32);
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("peer {a}: unsorted or duplicate adjacency"));
                }
            }
            for &b in list {
                if a == b {
                    return Err(format!("peer {a}: self-loop"));
                }
                if !self.has_edge(b, a) {
                    return Err(format!("edge {a}-{b} is not symmetric"));
                }
            }
        }
        for p in &self.peers {
            if p.hits_produced > p.queries_received {
                return Err(format!("peer {}: more hits than queries", p.id));
            }
            if p.free_rider && !p.shared.is_empty() {
                return Err(format!("peer {}: free rider hosts objects", p.id));
            }
            for q in p.tables.nq.peers() {
                if !self.has_edge(p.id, q) {
                    return Err(format!("peer {}: NQ lists non-neighbour {q}", p.id));
                }
                if self.peer(q).is_free_rider() && !self.peer(q).is_power() {
                    return Err(format!("peer {}: NQ lists free rider {q}", p.id));
                }
                if p.tables.pq.contains(q) {
                    return Err(format!("peer {}: {q} in both NQ and PQ", p.id));
                }
            }
            for q in p.tables.pq.peers() {
                if !self.peer(q).is_power() {
                    return Err(format!("peer {}: PQ lists ordinary peer {q}", p.id));
                }
            }
        }
        Ok(())
    }
}

/// Connected random graph: a random spanning tree, then uniform extra edges until
/// the mean degree reaches `avg_degree`. `free_riders` peers are marked as
/// non-sharing; [`distribute_objects`] leaves them empty.
pub fn generate_topology(n: u32, avg_degree: f64, free_riders: u32, seed: u64) -> Result<Network> {
    if n < 2 {
        return Err(Error::config("nodes", "need at least 2 nodes"));
    }
    if avg_degree.is_nan() || avg_degree < 1.0 || avg_degree > (n - 1) as f64 {
        return Err(Error::config(
            "avg_degree",
            format!("{avg_degree} is infeasible for {n} nodes"),
        ));
    }
    if free_riders >= n {
        return Err(Error::config("free_riders", "must be fewer than nodes"));
    }
    let n_us = n as usize;
    let max_edges = n_us * (n_us - 1) / 2;
    let target = (round_half_away(avg_degree * n as f64 / 2.0) as usize).clamp(n_us - 1, max_edges);
    let backbone_mean = 2.0 * (n - 1) as f64 / n as f64;
    if backbone_mean > avg_degree * 1.05 {
        return Err(Error::config(
            "avg_degree",
            format!("{avg_degree} is below the {backbone_mean:.3} a connected graph needs"),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::with_peers(n_us, seed);

    let mut order: Vec<u32> = (0..n).collect();
    order.shuffle(&mut rng);
    for i in 1..n_us {
        let j = rng.gen_range(0..i);
        net.add_edge(PeerId(order[i]), PeerId(order[j]));
    }

    let missing = target - net.edge_count();
    if missing * 2 > max_edges - net.edge_count() {
        // Dense request: enumerate the complement instead of rejection sampling.
        let mut free: Vec<(u32, u32)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| !net.has_edge(PeerId(a), PeerId(b)))
            .collect();
        free.shuffle(&mut rng);
        for &(a, b) in free.iter().take(missing) {
            net.add_edge(PeerId(a), PeerId(b));
        }
    } else {
        while net.edge_count() < target {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            net.add_edge(PeerId(a), PeerId(b));
        }
    }

    for i in index::sample(&mut rng, n_us, free_riders as usize) {
        net.peers[i].free_rider = true;
    }
    Ok(net)
}

/// Draws each peer's storage capacity uniformly from `min..=max` object slots.
pub fn assign_storage(net: &mut Network, min: u32, max: u32, rng: &mut impl Rng) {
    for p in &mut net.peers {
        p.storage_capacity = rng.gen_range(min..=max);
    }
}

/// Shape of the initial object catalogue and its replicas.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacementParams {
    pub max_keywords_per_object: u32,
    /// Upper bound on objects a sharing peer starts with.
    pub initial_objects_max: u32,
    /// Zipf exponent over object rank when choosing replicas.
    pub replica_skew: f64,
}

impl Default for PlacementParams {
    fn default() -> Self {
        Self {
            max_keywords_per_object: 5,
            initial_objects_max: 2,
            replica_skew: 1.0,
        }
    }
}

/// Creates `n_objects` keyword-tagged objects and places replicas on sharing peers.
///
/// Every object lands somewhere at least once, and every sharing peer ends up with
/// between one and `min(initial_objects_max, capacity)` objects. Replica choice is
/// Zipf-weighted by object id, so low ids are common and high ids are rare.
pub fn distribute_objects(
    net: &mut Network,
    n_objects: u32,
    keyword_pool: u32,
    params: &PlacementParams,
    seed: u64,
) -> Result<()> {
    if n_objects < 1 {
        return Err(Error::config("objects", "need at least one object"));
    }
    if keyword_pool < n_objects {
        return Err(Error::config("keyword_pool", "must be at least the object count"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_kw = params.max_keywords_per_object.clamp(1, keyword_pool) as usize;

    net.objects = (0..n_objects)
        .map(|i| {
            let count = rng.gen_range(1..=max_kw);
            let mut keywords: Vec<Keyword> = index::sample(&mut rng, keyword_pool as usize, count)
                .into_iter()
                .map(|k| k as Keyword)
                .collect();
            keywords.sort_unstable();
            DataObject {
                id: ObjectId(i),
                keywords,
                popularity: 0,
            }
        })
        .collect();

    let sharers: Vec<usize> = net
        .peers
        .iter()
        .filter(|p| !p.free_rider && p.storage_capacity > 0)
        .map(|p| p.id.index())
        .collect();
    let sharer_count = net.peers.iter().filter(|p| !p.free_rider).count();
    if sharers.len() < sharer_count {
        return Err(Error::config("storage_min", "a sharing peer has no storage"));
    }
    let total: u64 = sharers.iter().map(|&i| net.peers[i].storage_capacity as u64).sum();
    if sharers.is_empty() || total < n_objects as u64 {
        return Err(Error::config(
            "objects",
            "not enough storage capacity to place every object",
        ));
    }

    for p in &mut net.peers {
        p.shared.clear();
    }

    // Every object gets one home.
    for o in 0..n_objects {
        let open: Vec<usize> = sharers
            .iter()
            .copied()
            .filter(|&i| net.peers[i].has_headroom())
            .collect();
        let &slot = open
            .choose(&mut rng)
            .ok_or_else(|| Error::config("objects", "not enough storage capacity to place every object"))?;
        net.peers[slot].host(ObjectId(o));
    }

    let weights: Vec<f64> = (0..n_objects)
        .map(|i| 1.0 / ((i + 1) as f64).powf(params.replica_skew))
        .collect();
    for &i in &sharers {
        let cap = net.peers[i].storage_capacity;
        let want = rng.gen_range(1..=params.initial_objects_max.min(cap).max(1)) as usize;
        let have = net.peers[i].shared.len();
        if have >= want {
            continue;
        }
        let candidates: Vec<u32> = (0..n_objects).filter(|&o| !net.peers[i].holds(ObjectId(o))).collect();
        let picks: Vec<u32> = candidates
            .choose_multiple_weighted(&mut rng, want - have, |&o| weights[o as usize])
            .map_err(|e| Error::Internal(format!("replica sampling failed: {e}")))?
            .copied()
            .collect();
        for o in picks {
            net.peers[i].host(ObjectId(o));
        }
    }
    Ok(())
}

/// Marks `round((1 - up_fraction) * n)` random peers as down.
pub fn set_initial_liveness(net: &mut Network, up_fraction: f64, rng: &mut impl Rng) {
    let n = net.len();
    let down = (round_half_away((1.0 - up_fraction) * n as f64) as usize).min(n);
    for p in &mut net.peers {
        p.alive = true;
    }
    for i in index::sample(rng, n, down) {
        net.peers[i].alive = false;
    }
}

/// The object threshold actually applied by `selector`: never above what the
/// selector itself hosts, and never below one.
pub fn effective_f_th(selector: &Peer, f_th: u32) -> u32 {
    f_th.min(selector.shared.len() as u32).max(1)
}

/// Whether `selector` may list `candidate` as a neighbour.
pub fn eligible_neighbour(selector: &Peer, candidate: &Peer, f_th: u32) -> bool {
    if candidate.is_power() {
        return true;
    }
    candidate.shared.len() as u32 >= effective_f_th(selector, f_th)
}

/// `round((w1*s_s/s_th + w2*d_d/d_th + w3*f_i/f_th) * k)`.
pub fn compute_qp(s_s: u32, d_d: u32, f_i: u32, t: &Thresholds) -> Result<QValue> {
    for (name, v) in [
        ("thresholds.s_th", t.s_th),
        ("thresholds.d_th", t.d_th),
        ("thresholds.f_th", t.f_th),
    ] {
        if v == 0 {
            return Err(Error::config(name, "threshold must be positive"));
        }
    }
    let sum =
        t.w1 * (s_s as f64 / t.s_th as f64) + t.w2 * (d_d as f64 / t.d_th as f64) + t.w3 * (f_i as f64 / t.f_th as f64);
    Ok(QValue::new(round_half_away(sum * t.k)))
}

/// `Q_p` of an existing peer from its storage, degree and hosted objects.
pub fn peer_qp(net: &Network, id: PeerId, t: &Thresholds) -> Result<QValue> {
    let p = net.peer(id);
    compute_qp(p.storage_capacity, net.degree(id), p.shared.len() as u32, t)
}

/// Rebuilds every neighbour table from the current adjacency and eligibility.
/// Peers that become neighbour entries are dropped from the power-peer table.
pub fn init_neighbour_tables(net: &mut Network, t: &Thresholds) -> Result<()> {
    for i in 0..net.len() {
        let id = PeerId(i as u32);
        let mut entries = Vec::new();
        for &c in net.neighbours(id) {
            let (sel, cand) = (net.peer(id), net.peer(c));
            if !eligible_neighbour(sel, cand, t.f_th) {
                continue;
            }
            let f_eff = effective_f_th(sel, t.f_th);
            let f_i = cand.shared.len() as u32;
            let q = if f_i >= f_eff {
                init_neighbour_q(f_i, f_eff, t.k)?
            } else {
                // Power peers join without passing the object test.
                peer_qp(net, c, t)?
            };
            entries.push((c, q));
        }
        let peer = net.peer_mut(id);
        peer.tables.nq = entries.into_iter().collect();
        let listed: Vec<PeerId> = peer.tables.nq.peers().collect();
        for c in listed {
            peer.tables.pq.remove(c);
        }
    }
    Ok(())
}

/// Whether a peer meets all three power-peer thresholds.
pub fn meets_power_thresholds(net: &Network, id: PeerId, t: &Thresholds) -> bool {
    let p = net.peer(id);
    net.degree(id) >= t.d_th && p.shared.len() as u32 >= t.f_th && p.storage_capacity >= t.s_th
}

/// Promotes `id` if it is alive, ordinary and meets the thresholds, then
/// advertises it within `n_hops`. Returns whether a promotion happened.
pub fn promote_power_peer(
    net: &mut Network,
    id: PeerId,
    t: &Thresholds,
    n_hops: u32,
    queue_capacity: u32,
) -> Result<bool> {
    let p = net.peer(id);
    if !p.alive || p.is_power() || !meets_power_thresholds(net, id, t) {
        return Ok(false);
    }
    let p = net.peer_mut(id);
    p.class = PeerClass::Power;
    p.queue_capacity = queue_capacity;
    broadcast_power_peer(net, id, n_hops, t)?;
    Ok(true)
}

/// Floods `(p, Q_p)` to every alive peer within `n_hops`. Receivers that do not
/// already list `p` as a neighbour add it to their power-peer table.
pub fn broadcast_power_peer(net: &mut Network, p: PeerId, n_hops: u32, t: &Thresholds) -> Result<Vec<PeerId>> {
    if !net.peer(p).is_power() {
        return Err(Error::Internal(format!("peer {p} broadcast without power status")));
    }
    if n_hops == 0 {
        return Ok(Vec::new());
    }
    let qp = peer_qp(net, p, t)?;
    let mut depth = vec![u32::MAX; net.len()];
    depth[p.index()] = 0;
    let mut queue = VecDeque::from([p]);
    let mut notified = Vec::new();
    while let Some(x) = queue.pop_front() {
        let d = depth[x.index()];
        if d == n_hops {
            continue;
        }
        for &y in net.neighbours(x) {
            if depth[y.index()] != u32::MAX || !net.is_alive(y) {
                continue;
            }
            depth[y.index()] = d + 1;
            notified.push(y);
            queue.push_back(y);
        }
    }
    notified.sort_unstable();
    for &r in &notified {
        let tables = &mut net.peer_mut(r).tables;
        if !tables.nq.contains(p) && !tables.pq.contains(p) {
            tables.pq.insert(p, qp);
        }
    }
    Ok(notified)
}

/// Assigns power status to the top `fraction` of sharing peers ranked by
/// (degree, hosted objects), ties to the lower id. Capacities come from `queue_cap`.
pub fn assign_initial_power_peers(net: &mut Network, fraction: f64, mut queue_cap: impl FnMut() -> u32) -> Vec<PeerId> {
    let count = round_half_away(fraction * net.len() as f64) as usize;
    let mut ranked: Vec<PeerId> = net
        .peers
        .iter()
        .filter(|p| !p.free_rider && !p.shared.is_empty())
        .map(|p| p.id)
        .collect();
    ranked.sort_by(|&a, &b| {
        let ka = (net.degree(a), net.peer(a).shared.len());
        let kb = (net.degree(b), net.peer(b).shared.len());
        kb.cmp(&ka).then(a.cmp(&b))
    });
    ranked.truncate(count);
    ranked.sort_unstable();
    for &id in &ranked {
        let p = net.peer_mut(id);
        p.class = PeerClass::Power;
        p.queue_capacity = queue_cap();
    }
    ranked
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChurnOutcome {
    pub went_up: Vec<PeerId>,
    pub went_down: Vec<PeerId>,
}

/// Half of the down peers (rounded up) come back; as many up peers leave.
/// Peers keep their tables across a down period.
pub fn apply_churn(net: &mut Network, rng: &mut impl Rng) -> ChurnOutcome {
    let down: Vec<PeerId> = net.peers.iter().filter(|p| !p.alive).map(|p| p.id).collect();
    let up: Vec<PeerId> = net.peers.iter().filter(|p| p.alive).map(|p| p.id).collect();
    let k = down.len().div_ceil(2);
    let mut went_up: Vec<PeerId> = index::sample(rng, down.len(), k).into_iter().map(|i| down[i]).collect();
    let mut went_down: Vec<PeerId> = index::sample(rng, up.len(), k.min(up.len()))
        .into_iter()
        .map(|i| up[i])
        .collect();
    went_up.sort_unstable();
    went_down.sort_unstable();
    for &p in &went_up {
        net.peer_mut(p).alive = true;
    }
    for &p in &went_down {
        net.peer_mut(p).alive = false;
    }
    ChurnOutcome { went_up, went_down }
}

/// Peers reachable from `start` within `hops` over alive links, excluding `start`.
pub fn within_hops(net: &Network, start: PeerId, hops: u32) -> HashSet<PeerId> {
    let mut seen = HashSet::from([start]);
    let mut frontier = vec![start];
    for _ in 0..hops {
        let mut next = Vec::new();
        for x in frontier {
            for &y in net.neighbours(x) {
                if net.is_alive(y) && seen.insert(y) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    seen.remove(&start);
    seen
}
