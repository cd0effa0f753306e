//! Power-peer queue accounting and threshold-triggered query redistribution.

use crate::error::{Error, Result};
use crate::net::{Network, PeerId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadReport {
    pub peer: PeerId,
    pub queue_len: u32,
    pub queue_capacity: u32,
    pub utilization: f64,
}

impl LoadReport {
    pub fn new(peer: PeerId, queue_len: u32, queue_capacity: u32) -> Self {
        Self {
            peer,
            queue_len,
            queue_capacity,
            utilization: if queue_capacity == 0 {
                0.0
            } else {
                queue_len as f64 / queue_capacity as f64
            },
        }
    }
}

const EPS: f64 = 1e-9;

/// True once `queue_len` reaches `threshold` of capacity.
pub fn check_load(queue_len: u32, queue_capacity: u32, threshold: f64) -> Result<bool> {
    if queue_capacity == 0 {
        return Err(Error::config(
            "load.queue_capacity_min",
            "power peer with zero queue capacity",
        ));
    }
    Ok(queue_len as f64 >= threshold * queue_capacity as f64 - EPS)
}

fn fits(len: u32, cap: u32, threshold: f64) -> bool {
    cap > 0 && len as f64 <= threshold * cap as f64 + EPS
}

/// Reports for every alive power peer in `p`'s power-peer table.
pub fn collect_load(net: &Network, p: PeerId) -> Vec<LoadReport> {
    net.peer(p)
        .tables
        .pq
        .peers()
        .filter(|&q| q != p)
        .map(|q| net.peer(q))
        .filter(|q| q.alive && q.is_power())
        .map(|q| LoadReport::new(q.id, q.queue_len, q.queue_capacity))
        .collect()
}

/// Greedy least-utilized-first placement of `pending` messages. A target only
/// takes a message if it stays within `threshold` afterwards; messages with no
/// valid target are left out of the result and stay with the sender.
pub fn redistribute<M: Copy>(reports: &[LoadReport], pending: &[M], threshold: f64) -> Vec<(M, PeerId)> {
    let mut state: Vec<LoadReport> = reports.to_vec();
    let mut out = Vec::new();
    for &m in pending {
        let best = state
            .iter_mut()
            .filter(|r| fits(r.queue_len + 1, r.queue_capacity, threshold))
            .min_by(|a, b| a.utilization.total_cmp(&b.utilization).then(a.peer.cmp(&b.peer)));
        let Some(target) = best else { break };
        *target = LoadReport::new(target.peer, target.queue_len + 1, target.queue_capacity);
        out.push((m, target.peer));
    }
    out
}

/// One row of the per-interval load snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadSnapshot {
    pub tick: u64,
    pub peer: PeerId,
    pub queue_len: u32,
    pub capacity: u32,
}

/// Per-tick queue occupancy of power peers. Each delivered message costs one slot
/// for the tick it arrives in.
#[derive(Clone, Debug, Default)]
pub struct LoadTracker {
    pub balancing: bool,
    pub threshold: f64,
    touched: Vec<PeerId>,
    peak: Vec<u32>,
    interval_peak: Vec<u32>,
    /// Highest utilization over all power peers, one entry per tick with traffic.
    pub max_utilization: Vec<f64>,
    pub redistributed: u64,
    pub snapshots: Vec<LoadSnapshot>,
}

impl LoadTracker {
    pub fn new(n: usize, balancing: bool, threshold: f64) -> Self {
        Self {
            balancing,
            threshold,
            peak: vec![0; n],
            interval_peak: vec![0; n],
            ..Self::default()
        }
    }

    /// Charges one slot for a message delivered to power peer `p`, delegating it
    /// when `p` is at its watermark and balancing is on. Returns the peer charged.
    pub fn deliver(&mut self, net: &mut Network, p: PeerId) -> Result<PeerId> {
        let peer = net.peer(p);
        let mut charged = p;
        if self.balancing && check_load(peer.queue_len, peer.queue_capacity, self.threshold)? {
            let reports = collect_load(net, p);
            if let Some(&(_, target)) = redistribute(&reports, &[()], self.threshold).first() {
                charged = target;
                self.redistributed += 1;
            }
        }
        let c = net.peer_mut(charged);
        if c.queue_len == 0 {
            self.touched.push(charged);
        }
        c.queue_len += 1;
        Ok(charged)
    }

    /// Records peaks and clears every queue touched during the tick.
    pub fn end_tick(&mut self, net: &mut Network) {
        let mut max_u: f64 = 0.0;
        for &p in &self.touched {
            let peer = net.peer_mut(p);
            let len = peer.queue_len;
            self.peak[p.index()] = self.peak[p.index()].max(len);
            self.interval_peak[p.index()] = self.interval_peak[p.index()].max(len);
            if peer.queue_capacity > 0 {
                max_u = max_u.max(len as f64 / peer.queue_capacity as f64);
            }
            peer.queue_len = 0;
        }
        if !self.touched.is_empty() {
            self.max_utilization.push(max_u);
        }
        self.touched.clear();
    }

    /// Appends one snapshot row per power peer and restarts the interval peaks.
    pub fn close_interval(&mut self, net: &Network, tick: u64) {
        for p in net.peers.iter().filter(|p| p.is_power()) {
            self.snapshots.push(LoadSnapshot {
                tick,
                peer: p.id,
                queue_len: self.interval_peak[p.id.index()],
                capacity: p.queue_capacity,
            });
        }
        self.interval_peak.iter_mut().for_each(|v| *v = 0);
    }

    /// `(peer, peak queue length, capacity)` for every power peer.
    pub fn peaks(&self, net: &Network) -> Vec<(PeerId, u32, u32)> {
        net.peers
            .iter()
            .filter(|p| p.is_power())
            .map(|p| (p.id, self.peak[p.id.index()], p.queue_capacity))
            .collect()
    }
}

/// Peak utilizations sorted from highest to lowest.
pub fn sorted_peak_curve(peaks: &[(PeerId, u32, u32)]) -> Vec<f64> {
    let mut v: Vec<f64> = peaks
        .iter()
        .filter(|(_, _, cap)| *cap > 0)
        .map(|&(_, len, cap)| len as f64 / cap as f64)
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}
