//! Deterministic tick-driven event loop tying topology, workload, routing,
//! churn, load accounting and metrics together.

use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{aps_launch, aps_step, random_walk_step, rw_launch, ApsIndex};
use crate::config::{Algo, SimConfig};
use crate::error::{Error, Result};
use crate::load::{LoadSnapshot, LoadTracker};
use crate::metrics::{MetricsRecord, MetricsSeries};
use crate::net::{
    apply_churn, assign_initial_power_peers, assign_storage, broadcast_power_peer, distribute_objects,
    generate_topology, init_neighbour_tables, promote_power_peer, set_initial_liveness, Network, ObjectId, PeerClass,
    PeerId, PlacementParams,
};
use crate::qtable::{t_max, Keyword, PeerTables};
use crate::routing::{
    apply_hit_reverse_updates, apply_miss_updates, cache_object_at_source, forward_duplicate, handle_query,
    launch_query, maybe_enhance_ttl, CacheOutcome, HitReport, RouteKind, RoutingAction, TerminateReason, WalkerMessage,
};

/// Independent generator seeds derived from the run seed, in a fixed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Streams {
    pub topology: u64,
    pub storage: u64,
    pub objects: u64,
    pub liveness: u64,
    pub capacities: u64,
    pub workload: u64,
    pub churn: u64,
    pub routing: u64,
}

impl Streams {
    pub fn from_seed(seed: u64) -> Self {
        let mut m = ChaCha8Rng::seed_from_u64(seed);
        Self {
            topology: m.next_u64(),
            storage: m.next_u64(),
            objects: m.next_u64(),
            liveness: m.next_u64(),
            capacities: m.next_u64(),
            workload: m.next_u64(),
            churn: m.next_u64(),
            routing: m.next_u64(),
        }
    }
}

/// Builds the starting network shared by every algorithm for a given config.
/// Returns the capacity generator so later promotions continue its stream.
pub fn build_network(cfg: &SimConfig) -> Result<(Network, ChaCha8Rng)> {
    cfg.validate()?;
    let s = Streams::from_seed(cfg.seed);
    let mut net = generate_topology(cfg.nodes, cfg.avg_degree, cfg.free_riders, s.topology)?;
    assign_storage(
        &mut net,
        cfg.storage_min,
        cfg.storage_max,
        &mut ChaCha8Rng::seed_from_u64(s.storage),
    );
    let placement = PlacementParams {
        max_keywords_per_object: cfg.max_keywords_per_object,
        initial_objects_max: cfg.initial_objects_max,
        replica_skew: cfg.replica_skew,
    };
    distribute_objects(&mut net, cfg.objects, cfg.keyword_pool, &placement, s.objects)?;
    let mut caps = ChaCha8Rng::seed_from_u64(s.capacities);
    let (lo, hi) = (cfg.load.queue_capacity_min, cfg.load.queue_capacity_max);
    let powers = assign_initial_power_peers(&mut net, cfg.power_init_fraction, || caps.gen_range(lo..=hi));
    for p in &mut net.peers {
        p.tables = PeerTables::with_query_capacity(cfg.query_table_capacity as usize);
    }
    init_neighbour_tables(&mut net, &cfg.thresholds)?;
    for p in powers {
        broadcast_power_peer(&mut net, p, cfg.broadcast_hops, &cfg.thresholds)?;
    }
    set_initial_liveness(&mut net, cfg.up_fraction, &mut ChaCha8Rng::seed_from_u64(s.liveness));
    Ok((net, caps))
}

/// One scheduled query: `node` issues its `index`-th query at `tick`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ScheduledQuery {
    pub tick: u64,
    pub node: PeerId,
    pub index: u32,
    pub keyword: Keyword,
}

/// Every node starts at a random slot within one query interval and then issues
/// a query every interval. Keywords are drawn uniformly from the keywords carried
/// by objects, leaving out those the node's own starting objects already match.
pub fn build_workload(cfg: &SimConfig, net: &Network) -> Vec<ScheduledQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(Streams::from_seed(cfg.seed).workload);
    let all = net.workload_keywords();
    let period = cfg.query_interval_ticks.max(1) as u64;
    let mut out = Vec::with_capacity(cfg.scheduled_queries() as usize);
    for i in 0..cfg.nodes {
        let node = PeerId(i);
        let wanted: Vec<Keyword> = all
            .iter()
            .copied()
            .filter(|&k| net.local_matches(node, k).0 == 0)
            .collect();
        let pool = if wanted.is_empty() { &all } else { &wanted };
        let start = rng.gen_range(0..period);
        for j in 0..cfg.queries_per_node {
            out.push(ScheduledQuery {
                tick: start + j as u64 * period,
                node,
                index: j,
                keyword: pool[rng.gen_range(0..pool.len())],
            });
        }
    }
    out.sort_unstable();
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WalkerOutcomes {
    pub launched: u64,
    pub hits: u64,
    pub ttl_deaths: u64,
    pub dead_ends: u64,
    pub duplicate_drops: u64,
}

impl WalkerOutcomes {
    pub fn terminated(&self) -> u64 {
        self.hits + self.ttl_deaths + self.dead_ends + self.duplicate_drops
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub tick: u64,
    pub query_id: u64,
    pub message_id: u64,
    pub peer: PeerId,
    pub action: &'static str,
    pub next: Option<PeerId>,
    pub ttl_remaining: u32,
}

pub const TRACE_HEADER: &str = "tick,query_id,message_id,peer,action,next,ttl_remaining";

pub fn trace_csv(records: &[TraceRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let next = r.next.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.tick, r.query_id, r.message_id, r.peer, r.action, next, r.ttl_remaining
        );
    }
    out
}

/// `tick,peer_id,queue_len,capacity` rows.
pub fn loads_csv(rows: &[LoadSnapshot]) -> String {
    let mut out = String::from("tick,peer_id,queue_len,capacity\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.tick, r.peer, r.queue_len, r.capacity);
    }
    out
}

/// Everything a finished run produced.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub config: SimConfig,
    pub topology_hash: String,
    pub series: MetricsSeries,
    pub outcomes: WalkerOutcomes,
    pub max_hops: u32,
    pub promotions: u64,
    pub churn_events: u64,
    pub skipped_queries: u64,
    pub satisfied_locally: u64,
    /// `(peer, peak queue length, capacity)` per power peer.
    pub load_peaks: Vec<(PeerId, u32, u32)>,
    pub max_utilization: Vec<f64>,
    pub load_snapshots: Vec<LoadSnapshot>,
    pub redistributed: u64,
    pub trace: Vec<TraceRecord>,
    /// Peers any walker reached during the run.
    pub ever_reached: Vec<bool>,
    pub network: Network,
}

impl RunReport {
    /// Resolved config followed by the starting-network digest.
    pub fn manifest(&self) -> String {
        let mut m = self.config.to_text();
        let _ = writeln!(m, "topology_sha256 = {}", self.topology_hash);
        m
    }
}

/// What happened to a scheduled query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IssueOutcome {
    Launched,
    /// Down peers skip their scheduled queries.
    SourceDown,
    /// The source already hosts a matching object; nothing is sent.
    SatisfiedLocally,
}

#[derive(Clone, Debug)]
struct QueryState {
    source: PeerId,
    keyword: Keyword,
    interval: usize,
    live_walkers: u32,
    answered: bool,
    inserted_row: bool,
    neighbour_hit: bool,
    /// Peers that have carried this query.
    seen: Vec<PeerId>,
}

#[derive(Clone, Debug)]
struct InFlight {
    msg: WalkerMessage,
    query: usize,
}

/// A running experiment. Most callers want [`run_experiment`]; tests drive it
/// query by query through [`Simulation::issue_query`] and [`Simulation::run_to_idle`].
pub struct Simulation {
    cfg: SimConfig,
    net: Network,
    topology_hash: String,
    caps: ChaCha8Rng,
    route_rng: ChaCha8Rng,
    churn_rng: ChaCha8Rng,
    aps: ApsIndex,
    load: LoadTracker,
    tick: u64,
    issued: u64,
    next_message: u64,
    queries: Vec<QueryState>,
    inflight: Vec<InFlight>,
    intervals: Vec<MetricsRecord>,
    reached: Vec<Vec<bool>>,
    eligible: Vec<Option<Vec<bool>>>,
    outcomes: WalkerOutcomes,
    max_hops: u32,
    promotions: u64,
    churn_events: u64,
    skipped: u64,
    satisfied_locally: u64,
    trace: Option<Vec<TraceRecord>>,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        let (net, caps) = build_network(&cfg)?;
        Ok(Self::with_network(cfg, net, caps))
    }

    /// Runs on a prepared network, e.g. a hand-built fixture.
    pub fn with_network(cfg: SimConfig, net: Network, caps: ChaCha8Rng) -> Self {
        let s = Streams::from_seed(cfg.seed);
        let n = net.len();
        Self {
            topology_hash: net.topology_hash(),
            caps,
            route_rng: ChaCha8Rng::seed_from_u64(s.routing),
            churn_rng: ChaCha8Rng::seed_from_u64(s.churn),
            aps: ApsIndex::new(cfg.aps.clone()),
            load: LoadTracker::new(n, cfg.load.balancing, cfg.load.threshold),
            tick: 0,
            issued: 0,
            next_message: 0,
            queries: Vec::new(),
            inflight: Vec::new(),
            intervals: Vec::new(),
            reached: Vec::new(),
            eligible: Vec::new(),
            outcomes: WalkerOutcomes::default(),
            max_hops: 0,
            promotions: 0,
            churn_events: 0,
            skipped: 0,
            satisfied_locally: 0,
            trace: None,
            net,
            cfg,
        }
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.net
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn trace(&self) -> &[TraceRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    fn log(
        &mut self,
        query_id: u64,
        message_id: u64,
        peer: PeerId,
        action: &'static str,
        next: Option<PeerId>,
        ttl: u32,
    ) {
        if let Some(t) = &mut self.trace {
            t.push(TraceRecord {
                tick: self.tick,
                query_id,
                message_id,
                peer,
                action,
                next,
                ttl_remaining: ttl,
            });
        }
    }

    fn interval_for_next_query(&mut self) -> usize {
        let idx = (self.issued / self.cfg.metric_interval.max(1)) as usize;
        while self.intervals.len() <= idx {
            if let Some(prev) = self.eligible.last_mut() {
                if prev.is_none() {
                    let mask = self.net.peers.iter().map(|p| p.alive && !p.free_rider).collect();
                    *prev = Some(mask);
                    if self.cfg.algo == Algo::Dst {
                        self.load.close_interval(&self.net, self.tick);
                    }
                }
            }
            self.intervals.push(MetricsRecord::default());
            self.reached.push(vec![false; self.net.len()]);
            self.eligible.push(None);
        }
        idx
    }

    fn maybe_churn(&mut self) {
        let every = self.cfg.churn_interval_queries;
        if every > 0 && self.issued > 0 && self.issued.is_multiple_of(every) && self.churn_events < self.issued / every
        {
            apply_churn(&mut self.net, &mut self.churn_rng);
            self.churn_events += 1;
        }
    }

    /// Issues one query now, unless the source is down or already holds a match.
    pub fn issue_query(&mut self, source: PeerId, keyword: Keyword) -> Result<IssueOutcome> {
        self.maybe_churn();
        if !self.net.is_alive(source) {
            self.skipped += 1;
            return Ok(IssueOutcome::SourceDown);
        }
        if self.net.local_matches(source, keyword).0 > 0 {
            self.satisfied_locally += 1;
            return Ok(IssueOutcome::SatisfiedLocally);
        }
        let interval = self.interval_for_next_query();
        let qid = self.issued;
        self.issued += 1;
        self.intervals[interval].queries_issued += 1;

        let k = self.cfg.walkers as usize;
        let (targets, inserted_row) = match self.cfg.algo {
            Algo::Dst => {
                let l = launch_query(&mut self.net, source, keyword, k, self.tick);
                (l.targets, l.inserted_row)
            }
            Algo::Rw => (
                rw_launch(&self.net, source, k, &mut self.route_rng)
                    .into_iter()
                    .map(|p| (p, RouteKind::Random))
                    .collect(),
                false,
            ),
            Algo::Aps => {
                let t = aps_launch(&self.net, &self.aps, source, keyword, k, &mut self.route_rng);
                for &p in &t {
                    self.aps.on_forward(source, p, keyword);
                }
                (t.into_iter().map(|p| (p, RouteKind::Random)).collect(), false)
            }
        };

        let qidx = self.queries.len();
        self.queries.push(QueryState {
            source,
            keyword,
            interval,
            live_walkers: targets.len() as u32,
            answered: false,
            inserted_row,
            neighbour_hit: false,
            seen: vec![source],
        });
        for (next, via) in targets {
            let mut msg = WalkerMessage::new(self.next_message, qid, source, keyword, self.cfg.ttl);
            self.next_message += 1;
            self.outcomes.launched += 1;
            self.log(qid, msg.message_id, source, "launch", Some(next), msg.ttl_remaining - 1);
            msg.advance(next, via);
            self.inflight.push(InFlight { msg, query: qidx });
        }
        if self.queries[qidx].live_walkers == 0 {
            self.finish_query(qidx);
        }
        Ok(IssueOutcome::Launched)
    }

    fn finish_query(&mut self, qidx: usize) {
        let q = &mut self.queries[qidx];
        if q.inserted_row && !q.neighbour_hit {
            let (source, kw) = (q.source, q.keyword);
            self.net.peer_mut(source).tables.qq.delete_keyword(kw);
        }
        q.seen = Vec::new();
    }

    /// Advances every in-flight walker by one hop and closes the tick.
    pub fn step(&mut self) -> Result<()> {
        self.tick += 1;
        let current = std::mem::take(&mut self.inflight);
        for w in current {
            self.arrive(w)?;
        }
        self.load.end_tick(&mut self.net);
        Ok(())
    }

    pub fn is_idle(&self) -> bool {
        self.inflight.is_empty()
    }

    pub fn run_to_idle(&mut self) -> Result<()> {
        while !self.is_idle() {
            self.step()?;
        }
        Ok(())
    }

    fn end_walker(&mut self, w: InFlight, reason: TerminateReason) {
        match reason {
            TerminateReason::TtlExhausted => self.outcomes.ttl_deaths += 1,
            TerminateReason::DeadEnd => self.outcomes.dead_ends += 1,
            TerminateReason::DuplicateDropped => self.outcomes.duplicate_drops += 1,
        }
        let action = match reason {
            TerminateReason::TtlExhausted => "ttl_death",
            TerminateReason::DeadEnd => "dead_end",
            TerminateReason::DuplicateDropped => "dup_drop",
        };
        self.log(
            w.msg.query_id,
            w.msg.message_id,
            w.msg.current(),
            action,
            None,
            w.msg.ttl_remaining,
        );
        match self.cfg.algo {
            Algo::Dst => apply_miss_updates(&mut self.net, &w.msg, &self.cfg.reward),
            Algo::Aps => self.aps.on_walker_end(&w.msg, false),
            Algo::Rw => {}
        }
        self.release(w.query);
    }

    fn release(&mut self, qidx: usize) {
        let q = &mut self.queries[qidx];
        q.live_walkers -= 1;
        if q.live_walkers == 0 {
            self.finish_query(qidx);
        }
    }

    fn forward(&mut self, mut w: InFlight, next: PeerId, via: RouteKind, action: &'static str) {
        let peer = w.msg.current();
        if self.cfg.algo == Algo::Aps {
            self.aps.on_forward(peer, next, w.msg.keyword);
        }
        self.log(
            w.msg.query_id,
            w.msg.message_id,
            peer,
            action,
            Some(next),
            w.msg.ttl_remaining - 1,
        );
        w.msg.advance(next, via);
        self.inflight.push(w);
    }

    fn arrive(&mut self, mut w: InFlight) -> Result<()> {
        let p = w.msg.current();
        let interval = self.queries[w.query].interval;
        self.max_hops = self.max_hops.max(w.msg.hops_visited());
        if !self.net.is_alive(p) {
            self.end_walker(w, TerminateReason::DeadEnd);
            return Ok(());
        }
        self.reached[interval][p.index()] = true;
        if self.net.peer(p).free_rider {
            self.intervals[interval].free_rider_msgs_received += 1;
        }
        if self.cfg.algo == Algo::Dst && self.net.peer(p).is_power() {
            self.load.deliver(&mut self.net, p)?;
        }

        let duplicate = self.queries[w.query].seen.contains(&p);
        if duplicate {
            self.intervals[interval].duplicates_generated += 1;
            let action = match self.cfg.algo {
                Algo::Dst => {
                    let sender = w.msg.sender().expect("a walker away from its source has a sender");
                    let class = self.net.peer(sender).class;
                    let seen = &self.queries[w.query].seen;
                    forward_duplicate(&self.net, self.net.peer(p), &w.msg, class, |q| seen.contains(&q))
                }
                Algo::Rw => random_walk_step(&self.net, &w.msg, &mut self.route_rng),
                Algo::Aps => {
                    let sender = w.msg.sender().expect("a walker away from its source has a sender");
                    self.aps.update(sender, p, w.msg.keyword, false);
                    aps_step(&self.net, &self.aps, &w.msg, &mut self.route_rng)
                }
            };
            match action {
                RoutingAction::Forward { next, via } => {
                    self.intervals[interval].duplicates_forwarded += 1;
                    self.forward(w, next, via, "dup_forward")
                }
                RoutingAction::Terminate(_) => {
                    self.intervals[interval].duplicates_dropped += 1;
                    self.end_walker(w, TerminateReason::DuplicateDropped)
                }
                RoutingAction::LocalHit { .. } => unreachable!("duplicates never match locally"),
            }
            return Ok(());
        }

        self.queries[w.query].seen.push(p);
        self.net.peer_mut(p).queries_received += 1;
        let action = match self.cfg.algo {
            Algo::Dst => {
                let mut a = handle_query(&self.net, self.net.peer(p), &w.msg);
                if a == RoutingAction::Terminate(TerminateReason::TtlExhausted)
                    && maybe_enhance_ttl(self.net.peer(p), &mut w.msg)
                {
                    self.intervals[interval].ttl_enhancements_used += 1;
                    self.log(
                        w.msg.query_id,
                        w.msg.message_id,
                        p,
                        "enhance",
                        None,
                        w.msg.ttl_remaining,
                    );
                    a = handle_query(&self.net, self.net.peer(p), &w.msg);
                }
                a
            }
            Algo::Rw | Algo::Aps => {
                let (nr, first) = self.net.local_matches(p, w.msg.keyword);
                match first {
                    Some(object) => RoutingAction::LocalHit { nr, object },
                    None if self.cfg.algo == Algo::Rw => random_walk_step(&self.net, &w.msg, &mut self.route_rng),
                    None => aps_step(&self.net, &self.aps, &w.msg, &mut self.route_rng),
                }
            }
        };
        match action {
            RoutingAction::LocalHit { nr, object } => self.on_hit(w, nr, object)?,
            RoutingAction::Forward { next, via } => self.forward(w, next, via, "forward"),
            RoutingAction::Terminate(reason) => self.end_walker(w, reason),
        }
        Ok(())
    }

    fn on_hit(&mut self, w: InFlight, nr: u32, object: ObjectId) -> Result<()> {
        let p = w.msg.current();
        self.net.peer_mut(p).hits_produced += 1;
        self.outcomes.hits += 1;
        self.log(w.msg.query_id, w.msg.message_id, p, "hit", None, w.msg.ttl_remaining);
        let qi = w.query;
        let interval = self.queries[qi].interval;
        self.intervals[interval].hit_reports += 1;
        let first_route = w.msg.routes[0];

        match self.cfg.algo {
            Algo::Dst => {
                let report = HitReport::from_walker(&self.net, &w.msg, nr, &self.cfg.thresholds)?;
                apply_hit_reverse_updates(&mut self.net, &report, &self.cfg.reward, self.cfg.ttl, self.tick)?;
                if first_route == RouteKind::Neighbour {
                    self.queries[qi].neighbour_hit = true;
                }
            }
            Algo::Aps => self.aps.on_walker_end(&w.msg, true),
            Algo::Rw => {}
        }

        if !self.queries[qi].answered {
            self.queries[qi].answered = true;
            let hops = w.msg.hops_visited();
            let class = self.net.peer(p).class;
            let rec = &mut self.intervals[interval];
            rec.hits += 1;
            rec.sum_hops_on_hits += hops as u64;
            match class {
                PeerClass::Power => rec.hits_by_power += 1,
                PeerClass::Ordinary => rec.hits_by_ordinary += 1,
            }
            if hops > self.cfg.ttl {
                rec.hits_via_enhancement += 1;
            }
            if first_route == RouteKind::QueryTable {
                rec.hits_via_query_table += 1;
            } else if self.cfg.algo == Algo::Dst {
                rec.hits_via_parallel_routing += 1;
            }
            if self.cfg.algo == Algo::Dst && self.cfg.cache_at_source {
                let source = self.queries[qi].source;
                if cache_object_at_source(&mut self.net, source, object) == CacheOutcome::Cached {
                    let cap = self
                        .caps
                        .gen_range(self.cfg.load.queue_capacity_min..=self.cfg.load.queue_capacity_max);
                    if promote_power_peer(
                        &mut self.net,
                        source,
                        &self.cfg.thresholds,
                        self.cfg.broadcast_hops,
                        cap,
                    )? {
                        self.promotions += 1;
                    }
                }
            }
        }
        self.release(qi);
        Ok(())
    }

    /// Closes the open interval and assembles the report.
    pub fn finish(mut self) -> RunReport {
        if let Some(last) = self.eligible.last_mut() {
            if last.is_none() {
                *last = Some(self.net.peers.iter().map(|p| p.alive && !p.free_rider).collect());
                if self.cfg.algo == Algo::Dst {
                    self.load.close_interval(&self.net, self.tick);
                }
            }
        }
        let mut ever = vec![false; self.net.len()];
        for (i, rec) in self.intervals.iter_mut().enumerate() {
            for (e, &r) in ever.iter_mut().zip(&self.reached[i]) {
                *e |= r;
            }
            let mask = self.eligible[i].as_ref().expect("every interval is closed");
            let denom = mask.iter().filter(|&&b| b).count();
            let num = mask.iter().zip(&ever).filter(|(&e, &r)| e && r).count();
            rec.coverage_fraction = if denom == 0 { 1.0 } else { num as f64 / denom as f64 };
            rec.finish();
        }
        RunReport {
            ever_reached: ever,
            load_peaks: self.load.peaks(&self.net),
            max_utilization: std::mem::take(&mut self.load.max_utilization),
            load_snapshots: std::mem::take(&mut self.load.snapshots),
            redistributed: self.load.redistributed,
            config: self.cfg,
            topology_hash: self.topology_hash,
            series: MetricsSeries {
                records: self.intervals,
            },
            outcomes: self.outcomes,
            max_hops: self.max_hops,
            promotions: self.promotions,
            churn_events: self.churn_events,
            skipped_queries: self.skipped,
            satisfied_locally: self.satisfied_locally,
            trace: self.trace.unwrap_or_default(),
            network: self.net,
        }
    }

    /// Plays a full workload: each tick issues its scheduled queries, then moves
    /// every walker one hop.
    pub fn run_workload(&mut self, workload: &[ScheduledQuery]) -> Result<()> {
        let mut i = 0;
        while i < workload.len() || !self.is_idle() {
            while i < workload.len() && workload[i].tick <= self.tick {
                let q = workload[i];
                self.issue_query(q.node, q.keyword)?;
                i += 1;
            }
            self.step()?;
        }
        Ok(())
    }
}

/// Builds the network and workload for `cfg`, runs it to completion and reports.
pub fn run_experiment(cfg: &SimConfig) -> Result<RunReport> {
    run_experiment_with(cfg, false)
}

pub fn run_experiment_with(cfg: &SimConfig, trace: bool) -> Result<RunReport> {
    let mut sim = Simulation::new(cfg.clone())?;
    if trace {
        sim.enable_trace();
    }
    let workload = build_workload(cfg, sim.network());
    sim.run_workload(&workload)?;
    let report = sim.finish();
    if report.max_hops > t_max(cfg.ttl) {
        return Err(Error::Internal(format!(
            "a walker travelled {} hops, above the {} allowed",
            report.max_hops,
            t_max(cfg.ttl)
        )));
    }
    Ok(report)
}
