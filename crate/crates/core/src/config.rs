//! Simulation configuration.
//!
//! Configs are flat `key = value` text. `[section]` headers prefix the keys that
//! follow them, so `[reward]\nalpha = 0.2` and `reward.alpha = 0.2` are equivalent.
//! The resolved config is written back in the same form as the run manifest.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algo {
    Dst,
    Aps,
    Rw,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Dst, Algo::Aps, Algo::Rw];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Dst => "dst",
            Algo::Aps => "aps",
            Algo::Rw => "rw",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dst" => Ok(Algo::Dst),
            "aps" => Ok(Algo::Aps),
            "rw" | "random" | "random_walk" => Ok(Algo::Rw),
            other => Err(format!("unknown algorithm `{other}` (expected dst, aps or rw)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApsMode {
    Pessimistic,
    Optimistic,
}

impl FromStr for ApsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pessimistic" => Ok(ApsMode::Pessimistic),
            "optimistic" => Ok(ApsMode::Optimistic),
            other => Err(format!("unknown APS mode `{other}`")),
        }
    }
}

impl fmt::Display for ApsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ApsMode::Pessimistic => "pessimistic",
            ApsMode::Optimistic => "optimistic",
        })
    }
}

/// Power-peer and neighbour-selection thresholds plus the `Q_p` weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Thresholds {
    /// Minimum hosted objects for a neighbour or power peer.
    pub f_th: u32,
    /// Minimum storage (object slots) for a power peer.
    pub s_th: u32,
    /// Minimum degree for a power peer.
    pub d_th: u32,
    pub k: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            f_th: 1,
            s_th: 8,
            d_th: 7,
            k: 100.0,
            w1: 0.4,
            w2: 0.3,
            w3: 0.3,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if self.f_th < 1 {
            return Err(Error::config("thresholds.f_th", "must be at least 1"));
        }
        if self.s_th < 1 {
            return Err(Error::config("thresholds.s_th", "must be at least 1"));
        }
        if self.d_th < 1 {
            return Err(Error::config("thresholds.d_th", "must be at least 1"));
        }
        if self.k != 100.0 {
            return Err(Error::config("thresholds.k", "normalising constant is fixed at 100"));
        }
        for (name, w) in [
            ("thresholds.w1", self.w1),
            ("thresholds.w2", self.w2),
            ("thresholds.w3", self.w3),
        ] {
            if !(w > 0.0 && w < 1.0) {
                return Err(Error::config(name, "weight must lie in (0, 1)"));
            }
        }
        if (self.w1 + self.w2 + self.w3 - 1.0).abs() > 1e-9 {
            return Err(Error::config("thresholds.w1", "w1 + w2 + w3 must equal 1"));
        }
        Ok(())
    }
}

/// Learning rate and reward weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardParams {
    pub alpha: f64,
    pub qr_w1: f64,
    pub qr_w2: f64,
    pub nb_w1: f64,
    pub nb_w2: f64,
    pub pp_w1: f64,
    pub k: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            qr_w1: 0.4,
            qr_w2: 0.6,
            nb_w1: 0.8,
            nb_w2: 0.4,
            pp_w1: 0.5,
            k: 100.0,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config("reward.alpha", "must lie in (0, 1]"));
        }
        if !(self.qr_w1 > 0.0 && self.qr_w1 < self.qr_w2 && self.qr_w2 < 1.0) {
            return Err(Error::config("reward.qr_w1", "need 0 < qr_w1 < qr_w2 < 1"));
        }
        if (self.qr_w1 + self.qr_w2 - 1.0).abs() > 1e-9 {
            return Err(Error::config("reward.qr_w2", "qr_w1 + qr_w2 must equal 1"));
        }
        for (name, w) in [("reward.nb_w1", self.nb_w1), ("reward.nb_w2", self.nb_w2)] {
            if !(0.1..=1.0).contains(&w) {
                return Err(Error::config(name, "must lie in [0.1, 1]"));
            }
        }
        if self.nb_w1 <= self.nb_w2 {
            return Err(Error::config("reward.nb_w1", "must exceed nb_w2"));
        }
        if !(self.pp_w1 > 0.0 && self.pp_w1 < 1.0) {
            return Err(Error::config("reward.pp_w1", "must lie in (0, 1)"));
        }
        if self.k != 100.0 {
            return Err(Error::config("reward.k", "normalising constant is fixed at 100"));
        }
        Ok(())
    }
}

/// Adaptive probabilistic search constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ApsParams {
    pub init: f64,
    pub reward: f64,
    pub penalty: f64,
    pub floor: f64,
    pub mode: ApsMode,
}

impl Default for ApsParams {
    fn default() -> Self {
        Self {
            init: 30.0,
            reward: 10.0,
            penalty: 5.0,
            floor: 1.0,
            mode: ApsMode::Pessimistic,
        }
    }
}

/// Power-peer queue monitoring.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadParams {
    pub balancing: bool,
    pub threshold: f64,
    pub queue_capacity_min: u32,
    pub queue_capacity_max: u32,
}

impl Default for LoadParams {
    fn default() -> Self {
        Self {
            balancing: true,
            threshold: 0.6,
            queue_capacity_min: 50,
            queue_capacity_max: 200,
        }
    }
}

/// Everything a run needs. Defaults follow the full-scale experimental setup;
/// [`SimConfig::desk`] is the smaller profile used by the acceptance suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub algo: Algo,
    pub seed: u64,
    pub nodes: u32,
    pub avg_degree: f64,
    pub free_riders: u32,
    pub up_fraction: f64,
    pub ttl: u32,
    pub walkers: u32,
    pub queries_per_node: u32,
    pub query_interval_ticks: u32,
    pub objects: u32,
    pub keyword_pool: u32,
    pub max_keywords_per_object: u32,
    pub initial_objects_max: u32,
    pub replica_skew: f64,
    pub storage_min: u32,
    pub storage_max: u32,
    pub cache_at_source: bool,
    pub churn_interval_queries: u64,
    pub power_init_fraction: f64,
    pub broadcast_hops: u32,
    pub query_table_capacity: u32,
    pub metric_interval: u64,
    pub thresholds: Thresholds,
    pub reward: RewardParams,
    pub aps: ApsParams,
    pub load: LoadParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Dst,
            seed: 1,
            nodes: 10_000,
            avg_degree: 3.5,
            free_riders: 50,
            up_fraction: 0.8,
            ttl: 6,
            walkers: 6,
            queries_per_node: 100,
            query_interval_ticks: 20,
            objects: 100,
            keyword_pool: 30_000,
            max_keywords_per_object: 5,
            initial_objects_max: 2,
            replica_skew: 1.0,
            storage_min: 2,
            storage_max: 8,
            cache_at_source: true,
            churn_interval_queries: 50_000,
            power_init_fraction: 0.1,
            broadcast_hops: 4,
            query_table_capacity: 512,
            metric_interval: 5_000,
            thresholds: Thresholds::default(),
            reward: RewardParams::default(),
            aps: ApsParams::default(),
            load: LoadParams::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::config(key, format!("cannot parse `{}`", value.trim())))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Error::config(key, format!("cannot parse `{other}` as a boolean"))),
    }
}

impl SimConfig {
    /// The laptop-sized profile: 2,000 nodes, 20 objects, 50 queries per node.
    /// Churn keeps the same share of the workload as the full profile.
    pub fn desk() -> Self {
        Self {
            nodes: 2_000,
            free_riders: 10,
            objects: 20,
            keyword_pool: 2_000,
            queries_per_node: 50,
            churn_interval_queries: 5_000,
            ..Self::default()
        }
    }

    /// Every settable key, in manifest order.
    pub const KEYS: &'static [&'static str] = &[
        "algo",
        "seed",
        "nodes",
        "avg_degree",
        "free_riders",
        "up_fraction",
        "ttl",
        "walkers",
        "queries_per_node",
        "query_interval_ticks",
        "objects",
        "keyword_pool",
        "max_keywords_per_object",
        "initial_objects_max",
        "replica_skew",
        "storage_min",
        "storage_max",
        "cache_at_source",
        "churn_interval_queries",
        "power_init_fraction",
        "broadcast_hops",
        "query_table_capacity",
        "metric_interval",
        "thresholds.f_th",
        "thresholds.s_th",
        "thresholds.d_th",
        "thresholds.k",
        "thresholds.w1",
        "thresholds.w2",
        "thresholds.w3",
        "reward.alpha",
        "reward.qr_w1",
        "reward.qr_w2",
        "reward.nb_w1",
        "reward.nb_w2",
        "reward.pp_w1",
        "reward.k",
        "aps.init",
        "aps.reward",
        "aps.penalty",
        "aps.floor",
        "aps.mode",
        "load.balancing",
        "load.threshold",
        "load.queue_capacity_min",
        "load.queue_capacity_max",
    ];

    /// Sets one dotted key. `k` is accepted as an alias for `walkers`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "algo" => self.algo = value.parse().map_err(|e: String| Error::config(key, e))?,
            "seed" => self.seed = parse(key, value)?,
            "nodes" => self.nodes = parse(key, value)?,
            "avg_degree" => self.avg_degree = parse(key, value)?,
            "free_riders" => self.free_riders = parse(key, value)?,
            "up_fraction" => self.up_fraction = parse(key, value)?,
            "ttl" => self.ttl = parse(key, value)?,
            "walkers" | "k" => self.walkers = parse(key, value)?,
            "queries_per_node" => self.queries_per_node = parse(key, value)?,
            "query_interval_ticks" => self.query_interval_ticks = parse(key, value)?,
            "objects" => self.objects = parse(key, value)?,
            "keyword_pool" => self.keyword_pool = parse(key, value)?,
            "max_keywords_per_object" => self.max_keywords_per_object = parse(key, value)?,
            "initial_objects_max" => self.initial_objects_max = parse(key, value)?,
            "replica_skew" => self.replica_skew = parse(key, value)?,
            "storage_min" => self.storage_min = parse(key, value)?,
            "storage_max" => self.storage_max = parse(key, value)?,
            "cache_at_source" => self.cache_at_source = parse_bool(key, value)?,
            "churn_interval_queries" => self.churn_interval_queries = parse(key, value)?,
            "power_init_fraction" => self.power_init_fraction = parse(key, value)?,
            "broadcast_hops" => self.broadcast_hops = parse(key, value)?,
            "query_table_capacity" => self.query_table_capacity = parse(key, value)?,
            "metric_interval" => self.metric_interval = parse(key, value)?,
            "thresholds.f_th" | "f_th" => self.thresholds.f_th = parse(key, value)?,
            "thresholds.s_th" | "s_th" => self.thresholds.s_th = parse(key, value)?,
            "thresholds.d_th" | "d_th" => self.thresholds.d_th = parse(key, value)?,
            "thresholds.k" => self.thresholds.k = parse(key, value)?,
            "thresholds.w1" => self.thresholds.w1 = parse(key, value)?,
            "thresholds.w2" => self.thresholds.w2 = parse(key, value)?,
            "thresholds.w3" => self.thresholds.w3 = parse(key, value)?,
            "reward.alpha" | "alpha" => self.reward.alpha = parse(key, value)?,
            "reward.qr_w1" => self.reward.qr_w1 = parse(key, value)?,
            "reward.qr_w2" => self.reward.qr_w2 = parse(key, value)?,
            "reward.nb_w1" => self.reward.nb_w1 = parse(key, value)?,
            "reward.nb_w2" => self.reward.nb_w2 = parse(key, value)?,
            "reward.pp_w1" => self.reward.pp_w1 = parse(key, value)?,
            "reward.k" => self.reward.k = parse(key, value)?,
            "aps.init" => self.aps.init = parse(key, value)?,
            "aps.reward" => self.aps.reward = parse(key, value)?,
            "aps.penalty" => self.aps.penalty = parse(key, value)?,
            "aps.floor" => self.aps.floor = parse(key, value)?,
            "aps.mode" => self.aps.mode = value.parse().map_err(|e: String| Error::config(key, e))?,
            "load.balancing" | "lb" => self.load.balancing = parse_bool(key, value)?,
            "load.threshold" | "lb_threshold" => self.load.threshold = parse(key, value)?,
            "load.queue_capacity_min" => self.load.queue_capacity_min = parse(key, value)?,
            "load.queue_capacity_max" => self.load.queue_capacity_max = parse(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "algo" => self.algo.to_string(),
            "seed" => self.seed.to_string(),
            "nodes" => self.nodes.to_string(),
            "avg_degree" => self.avg_degree.to_string(),
            "free_riders" => self.free_riders.to_string(),
            "up_fraction" => self.up_fraction.to_string(),
            "ttl" => self.ttl.to_string(),
            "walkers" => self.walkers.to_string(),
            "queries_per_node" => self.queries_per_node.to_string(),
            "query_interval_ticks" => self.query_interval_ticks.to_string(),
            "objects" => self.objects.to_string(),
            "keyword_pool" => self.keyword_pool.to_string(),
            "max_keywords_per_object" => self.max_keywords_per_object.to_string(),
            "initial_objects_max" => self.initial_objects_max.to_string(),
            "replica_skew" => self.replica_skew.to_string(),
            "storage_min" => self.storage_min.to_string(),
            "storage_max" => self.storage_max.to_string(),
            "cache_at_source" => self.cache_at_source.to_string(),
            "churn_interval_queries" => self.churn_interval_queries.to_string(),
            "power_init_fraction" => self.power_init_fraction.to_string(),
            "broadcast_hops" => self.broadcast_hops.to_string(),
            "query_table_capacity" => self.query_table_capacity.to_string(),
            "metric_interval" => self.metric_interval.to_string(),
            "thresholds.f_th" => self.thresholds.f_th.to_string(),
            "thresholds.s_th" => self.thresholds.s_th.to_string(),
            "thresholds.d_th" => self.thresholds.d_th.to_string(),
            "thresholds.k" => self.thresholds.k.to_string(),
            "thresholds.w1" => self.thresholds.w1.to_string(),
            "thresholds.w2" => self.thresholds.w2.to_string(),
            "thresholds.w3" => self.thresholds.w3.to_string(),
            "reward.alpha" => self.reward.alpha.to_string(),
            "reward.qr_w1" => self.reward.qr_w1.to_string(),
            "reward.qr_w2" => self.reward.qr_w2.to_string(),
            "reward.nb_w1" => self.reward.nb_w1.to_string(),
            "reward.nb_w2" => self.reward.nb_w2.to_string(),
            "reward.pp_w1" => self.reward.pp_w1.to_string(),
            "reward.k" => self.reward.k.to_string(),
            "aps.init" => self.aps.init.to_string(),
            "aps.reward" => self.aps.reward.to_string(),
            "aps.penalty" => self.aps.penalty.to_string(),
            "aps.floor" => self.aps.floor.to_string(),
            "aps.mode" => self.aps.mode.to_string(),
            "load.balancing" => self.load.balancing.to_string(),
            "load.threshold" => self.load.threshold.to_string(),
            "load.queue_capacity_min" => self.load.queue_capacity_min.to_string(),
            "load.queue_capacity_max" => self.load.queue_capacity_max.to_string(),
            _ => return None,
        })
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "expected `key = value`"))?;
            let key = key.trim();
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            self.set(&full, value)?;
        }
        Ok(())
    }

    /// Parses a config file body layered on the defaults, then validates it.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolved config in the same `key = value` format it is read from.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let value = self.get(key).expect("every listed key is readable");
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::config("nodes", "need at least 2 nodes"));
        }
        if self.avg_degree.is_nan() || self.avg_degree < 1.0 || self.avg_degree > (self.nodes - 1) as f64 {
            return Err(Error::config("avg_degree", "must lie in [1, nodes - 1]"));
        }
        if self.free_riders >= self.nodes {
            return Err(Error::config("free_riders", "must be fewer than nodes"));
        }
        if !(self.up_fraction > 0.0 && self.up_fraction <= 1.0) {
            return Err(Error::config("up_fraction", "must lie in (0, 1]"));
        }
        if self.ttl < 1 {
            return Err(Error::config("ttl", "must be at least 1"));
        }
        if self.walkers < 1 {
            return Err(Error::config("walkers", "must be at least 1"));
        }
        if self.query_interval_ticks < 1 {
            return Err(Error::config("query_interval_ticks", "must be at least 1"));
        }
        if self.objects < 1 {
            return Err(Error::config("objects", "must be at least 1"));
        }
        if self.keyword_pool < self.objects {
            return Err(Error::config("keyword_pool", "must be at least the object count"));
        }
        if self.max_keywords_per_object < 1 {
            return Err(Error::config("max_keywords_per_object", "must be at least 1"));
        }
        if self.initial_objects_max < 1 {
            return Err(Error::config("initial_objects_max", "must be at least 1"));
        }
        if self.replica_skew.is_nan() || self.replica_skew < 0.0 {
            return Err(Error::config("replica_skew", "must be non-negative"));
        }
        if self.storage_min < 1 || self.storage_min > self.storage_max {
            return Err(Error::config("storage_min", "need 1 <= storage_min <= storage_max"));
        }
        if self.churn_interval_queries < 1 {
            return Err(Error::config("churn_interval_queries", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.power_init_fraction) {
            return Err(Error::config("power_init_fraction", "must lie in [0, 1]"));
        }
        if self.query_table_capacity < 1 {
            return Err(Error::config("query_table_capacity", "must be at least 1"));
        }
        if self.metric_interval < 1 {
            return Err(Error::config("metric_interval", "must be at least 1"));
        }
        self.thresholds.validate()?;
        self.reward.validate()?;
        if !(self.aps.floor > 0.0 && self.aps.init >= self.aps.floor) {
            return Err(Error::config("aps.floor", "need 0 < floor <= init"));
        }
        if !(self.aps.reward >= 0.0 && self.aps.penalty >= 0.0) {
            return Err(Error::config("aps.reward", "reward and penalty must be non-negative"));
        }
        if !(self.load.threshold > 0.0 && self.load.threshold <= 1.0) {
            return Err(Error::config("load.threshold", "must lie in (0, 1]"));
        }
        if self.load.queue_capacity_min < 1 || self.load.queue_capacity_min > self.load.queue_capacity_max {
            return Err(Error::config(
                "load.queue_capacity_min",
                "need 1 <= queue_capacity_min <= queue_capacity_max",
            ));
        }
        Ok(())
    }

    /// Total queries the workload schedules (before down peers skip theirs).
    pub fn scheduled_queries(&self) -> u64 {
        self.nodes as u64 * self.queries_per_node as u64
    }
}
