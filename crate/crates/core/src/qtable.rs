//! Q-tables and the reward/update rules that drive walker routing.
//!
//! Every peer owns three tables:
//!
//! * a [`NeighbourQTable`] scoring each eligible neighbour by its overall hit rate,
//! * a [`PowerPeerQTable`] scoring known power peers by hop efficiency,
//! * a [`QueryQTable`] caching per-keyword scores for every neighbour, evicted LRU.
//!
//! Values are non-negative reals, rounded only when serialised.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::net::PeerId;

pub type Keyword = u32;

/// Normalising constant shared by every formula.
pub const K_NORM: f64 = 100.0;

/// Rounds half away from zero, the single rounding rule used everywhere.
#[inline]
pub fn round_half_away(x: f64) -> f64 {
    x.round()
}

/// A non-negative routing score.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct QValue(f64);

impl QValue {
    pub const ZERO: QValue = QValue(0.0);

    /// Builds a value, clamping negatives (and NaN) to zero.
    pub fn new(v: f64) -> Self {
        if v > 0.0 {
            QValue(v)
        } else {
            QValue(0.0)
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Integer form used in dumps and fixtures.
    pub fn as_int(self) -> i64 {
        round_half_away(self.0) as i64
    }
}

impl From<f64> for QValue {
    fn from(v: f64) -> Self {
        QValue::new(v)
    }
}

/// Result of a walker for the purpose of a table update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Hit,
    Miss,
    NotAsked,
}

/// Initial neighbour score `round(f_i / f_th * k)`.
pub fn init_neighbour_q(f_i: u32, f_th: u32, k: f64) -> Result<QValue> {
    if f_th == 0 {
        return Err(Error::config("thresholds.f_th", "must be at least 1"));
    }
    if f_i < f_th {
        return Err(Error::Eligibility(format!(
            "neighbour hosts {f_i} objects, below threshold {f_th}"
        )));
    }
    Ok(QValue::new(round_half_away(f_i as f64 * k / f_th as f64)))
}

/// Query reward `(ttl0 / (w1 * hp) + nr / w2) * 100`.
pub fn reward_query(ttl0: u32, hp: u32, nr: u32, w1: f64, w2: f64) -> Result<f64> {
    if hp == 0 {
        return Err(Error::Internal("query reward requested for a zero-hop hit".into()));
    }
    Ok((ttl0 as f64 / (w1 * hp as f64) + nr as f64 / w2) * K_NORM)
}

/// Learning-rate update shared by the query and power-peer tables.
pub fn update_query_q(q: QValue, r: f64, alpha: f64, outcome: Outcome) -> QValue {
    match outcome {
        Outcome::Hit => QValue::new(q.0 + alpha * (r - q.0)),
        Outcome::Miss => QValue::new(q.0 * (1.0 - alpha)),
        Outcome::NotAsked => q,
    }
}

/// Neighbour reward `k * hits / queries`; a peer that has seen no queries earns 0.
pub fn reward_neighbour(hits_produced: u64, queries_received: u64, k: f64) -> f64 {
    if queries_received == 0 {
        return 0.0;
    }
    k * hits_produced as f64 / queries_received as f64
}

/// Hit adds `r_n / w1`, miss subtracts `r_n / w2`, clamped at zero.
pub fn update_neighbour_q(q: QValue, r_n: f64, nb_w1: f64, nb_w2: f64, hit: bool) -> QValue {
    if hit {
        QValue::new(q.0 + r_n / nb_w1)
    } else {
        QValue::new(q.0 - r_n / nb_w2)
    }
}

/// Largest hop budget a walker may reach once a power peer extends it.
pub fn t_max(ttl0: u32) -> u32 {
    ttl0 + round_half_away(ttl0 as f64 / 2.0) as u32
}

/// Power-peer reward `t_max(ttl0) / (hp * w1) * k`.
pub fn reward_power(ttl0: u32, hp: u32, pp_w1: f64, k: f64) -> f64 {
    debug_assert!(hp >= 1, "power reward needs at least one hop");
    let hp = hp.max(1) as f64;
    t_max(ttl0) as f64 / (hp * pp_w1) * k
}

pub fn update_power_q(q: QValue, r: f64, alpha: f64, outcome: Outcome) -> QValue {
    update_query_q(q, r, alpha, outcome)
}

/// Scores keyed by peer, iterated in ascending id order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PeerScores {
    entries: BTreeMap<PeerId, QValue>,
}

impl PeerScores {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, peer: PeerId) -> Option<QValue> {
        self.entries.get(&peer).copied()
    }

    pub fn contains(&self, peer: PeerId) -> bool {
        self.entries.contains_key(&peer)
    }

    pub fn insert(&mut self, peer: PeerId, q: QValue) -> Option<QValue> {
        self.entries.insert(peer, q)
    }

    pub fn remove(&mut self, peer: PeerId) -> Option<QValue> {
        self.entries.remove(&peer)
    }

    /// Applies `f` to an existing entry. Returns false when the peer is absent.
    pub fn update(&mut self, peer: PeerId, f: impl FnOnce(QValue) -> QValue) -> bool {
        match self.entries.get_mut(&peer) {
            Some(q) => {
                *q = f(*q);
                true
            }
            None => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (PeerId, QValue)> + '_ {
        self.entries.iter().map(|(p, q)| (*p, *q))
    }

    pub fn peers(&self) -> impl Iterator<Item = PeerId> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Highest-scoring peer accepted by `filter`; ties go to the lower id.
    pub fn best(&self, mut filter: impl FnMut(PeerId) -> bool) -> Option<(PeerId, QValue)> {
        let mut best: Option<(PeerId, QValue)> = None;
        for (p, q) in self.iter() {
            if !filter(p) {
                continue;
            }
            match best {
                Some((_, bq)) if q.0 <= bq.0 => {}
                _ => best = Some((p, q)),
            }
        }
        best
    }
}

/// Overall performance of each eligible neighbour.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeighbourQTable(PeerScores);

/// Known power peers scored by how quickly they produce hits.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PowerPeerQTable(PeerScores);

macro_rules! deref_scores {
    ($t:ty) => {
        impl Deref for $t {
            type Target = PeerScores;
            fn deref(&self) -> &PeerScores {
                &self.0
            }
        }
        impl DerefMut for $t {
            fn deref_mut(&mut self) -> &mut PeerScores {
                &mut self.0
            }
        }
        impl FromIterator<(PeerId, QValue)> for $t {
            fn from_iter<I: IntoIterator<Item = (PeerId, QValue)>>(iter: I) -> Self {
                Self(PeerScores {
                    entries: iter.into_iter().collect(),
                })
            }
        }
    };
}

deref_scores!(NeighbourQTable);
deref_scores!(PowerPeerQTable);

impl NeighbourQTable {
    pub fn new() -> Self {
        Self::default()
    }
}

impl PowerPeerQTable {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Which table a routing candidate was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableKind {
    Neighbour,
    PowerPeer,
    Query,
}

impl TableKind {
    pub fn tag(self) -> &'static str {
        match self {
            TableKind::Neighbour => "nq",
            TableKind::PowerPeer => "pq",
            TableKind::Query => "qq",
        }
    }
}

/// Union of NQ and PQ entries accepted by `keep`, sorted by score descending with
/// ties broken by ascending id.
pub fn merge_ranked(
    nq: &NeighbourQTable,
    pq: &PowerPeerQTable,
    mut keep: impl FnMut(PeerId) -> bool,
) -> Vec<(PeerId, QValue, TableKind)> {
    let mut merged: Vec<(PeerId, QValue, TableKind)> = nq
        .iter()
        .map(|(p, q)| (p, q, TableKind::Neighbour))
        .chain(pq.iter().map(|(p, q)| (p, q, TableKind::PowerPeer)))
        .filter(|(p, _, _)| keep(*p))
        .collect();
    merged.sort_by(|a, b| b.1 .0.total_cmp(&a.1 .0).then(a.0.cmp(&b.0)));
    // A peer listed in both tables keeps its better-ranked entry.
    let mut seen = Vec::with_capacity(merged.len());
    merged.retain(|(p, _, _)| {
        if seen.contains(p) {
            false
        } else {
            seen.push(*p);
            true
        }
    });
    merged
}

/// The `k` best alive peers from the merged NQ/PQ ranking.
pub fn merge_top_k(
    nq: &NeighbourQTable,
    pq: &PowerPeerQTable,
    k: usize,
    alive: impl FnMut(PeerId) -> bool,
) -> Vec<PeerId> {
    merge_ranked(nq, pq, alive)
        .into_iter()
        .take(k)
        .map(|(p, _, _)| p)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryRow {
    values: PeerScores,
    last_used: u64,
    seq: u64,
}

impl QueryRow {
    pub fn values(&self) -> &PeerScores {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut PeerScores {
        &mut self.values
    }

    pub fn last_used(&self) -> u64 {
        self.last_used
    }
}

/// Per-keyword neighbour scores with least-recently-used eviction.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryQTable {
    rows: BTreeMap<Keyword, QueryRow>,
    capacity: usize,
    seq: u64,
}

impl Default for QueryQTable {
    fn default() -> Self {
        Self::with_capacity(512)
    }
}

impl QueryQTable {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            rows: BTreeMap::new(),
            capacity: capacity.max(1),
            seq: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, keyword: Keyword) -> bool {
        self.rows.contains_key(&keyword)
    }

    pub fn row(&self, keyword: Keyword) -> Option<&QueryRow> {
        self.rows.get(&keyword)
    }

    pub fn row_mut(&mut self, keyword: Keyword) -> Option<&mut QueryRow> {
        self.rows.get_mut(&keyword)
    }

    pub fn rows(&self) -> impl Iterator<Item = (Keyword, &QueryRow)> {
        self.rows.iter().map(|(k, r)| (*k, r))
    }

    /// Marks a row as used at `tick`.
    pub fn touch(&mut self, keyword: Keyword, tick: u64) {
        self.seq += 1;
        let seq = self.seq;
        if let Some(row) = self.rows.get_mut(&keyword) {
            row.last_used = tick;
            row.seq = seq;
        }
    }

    /// Adds a row seeded from the neighbour table. An existing row only has its
    /// recency refreshed. Returns whether a row was created.
    pub fn insert_keyword(&mut self, keyword: Keyword, nq: &NeighbourQTable, tick: u64) -> bool {
        let values = PeerScores {
            entries: nq.iter().collect(),
        };
        self.insert_row(keyword, values, tick)
    }

    /// Adds a row whose value for each neighbour is the mean of that neighbour's
    /// column over all current rows; with no rows it falls back to the NQ snapshot.
    pub fn insert_keyword_from_column_averages(&mut self, keyword: Keyword, nq: &NeighbourQTable, tick: u64) -> bool {
        if self.rows.contains_key(&keyword) {
            self.touch(keyword, tick);
            return false;
        }
        if self.rows.is_empty() {
            return self.insert_keyword(keyword, nq, tick);
        }
        let mut sums: BTreeMap<PeerId, (f64, u32)> = BTreeMap::new();
        for row in self.rows.values() {
            for (p, q) in row.values.iter() {
                let e = sums.entry(p).or_insert((0.0, 0));
                e.0 += q.0;
                e.1 += 1;
            }
        }
        let values = PeerScores {
            entries: sums
                .into_iter()
                .map(|(p, (sum, n))| (p, QValue::new(sum / n as f64)))
                .collect(),
        };
        self.insert_row(keyword, values, tick)
    }

    fn insert_row(&mut self, keyword: Keyword, values: PeerScores, tick: u64) -> bool {
        if self.rows.contains_key(&keyword) {
            self.touch(keyword, tick);
            return false;
        }
        if self.rows.len() >= self.capacity {
            self.evict_lru();
        }
        self.seq += 1;
        self.rows.insert(
            keyword,
            QueryRow {
                values,
                last_used: tick,
                seq: self.seq,
            },
        );
        true
    }

    fn evict_lru(&mut self) -> Option<Keyword> {
        let victim = self
            .rows
            .iter()
            .min_by_key(|(_, r)| (r.last_used, r.seq))
            .map(|(k, _)| *k)?;
        self.rows.remove(&victim);
        Some(victim)
    }

    pub fn delete_keyword(&mut self, keyword: Keyword) -> bool {
        self.rows.remove(&keyword).is_some()
    }

    /// Neighbours of a row ranked best-first, restricted by `keep`.
    pub fn ranked(&self, keyword: Keyword, mut keep: impl FnMut(PeerId) -> bool) -> Vec<PeerId> {
        let Some(row) = self.rows.get(&keyword) else {
            return Vec::new();
        };
        let mut v: Vec<(PeerId, QValue)> = row.values.iter().filter(|(p, _)| keep(*p)).collect();
        v.sort_by(|a, b| b.1 .0.total_cmp(&a.1 .0).then(a.0.cmp(&b.0)));
        v.into_iter().map(|(p, _)| p).collect()
    }
}

/// The three tables a peer routes with.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PeerTables {
    pub nq: NeighbourQTable,
    pub pq: PowerPeerQTable,
    pub qq: QueryQTable,
}

impl PeerTables {
    pub fn with_query_capacity(capacity: usize) -> Self {
        Self {
            nq: NeighbourQTable::new(),
            pq: PowerPeerQTable::new(),
            qq: QueryQTable::with_capacity(capacity),
        }
    }

    /// Appends this peer's entries in `table_kind,owner_id,key,peer_id,qvalue_int` form.
    pub fn dump_into(&self, owner: PeerId, out: &mut String) {
        for (p, q) in self.nq.iter() {
            let _ = writeln!(out, "nq,{owner},-,{p},{}", q.as_int());
        }
        for (p, q) in self.pq.iter() {
            let _ = writeln!(out, "pq,{owner},-,{p},{}", q.as_int());
        }
        for (kw, row) in self.qq.rows() {
            for (p, q) in row.values.iter() {
                let _ = writeln!(out, "qq,{owner},{kw},{p},{}", q.as_int());
            }
        }
    }
}
