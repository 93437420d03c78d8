use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::{Arc, OnceLock};

use super::{Micros, RouterId, UnderlayGraph};

const NO_PRED: u32 = u32::MAX;

/// Single-source shortest-path result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsspTable {
    pub source: RouterId,
    /// `Micros(u64::MAX)` marks unreachable routers.
    pub dist: Vec<Micros>,
    /// Index of the link into each router on the shortest-path tree.
    pred_link: Vec<u32>,
}

impl SsspTable {
    /// `(previous router, link index)` on the shortest-path tree.
    pub fn pred(&self, g: &UnderlayGraph, v: RouterId) -> Option<(RouterId, usize)> {
        let link = self.pred_link[v.index()];
        if link == NO_PRED {
            return None;
        }
        let l = &g.links()[link as usize];
        let prev = if l.a == v { l.b } else { l.a };
        Some((prev, link as usize))
    }

    /// Link indices from the source to `target`, in path order.
    pub fn path_links(&self, g: &UnderlayGraph, target: RouterId) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = target;
        while let Some((prev, link)) = self.pred(g, cur) {
            out.push(link);
            cur = prev;
        }
        out.reverse();
        out
    }

    /// Routers from the source to `target`, inclusive.
    pub fn path_routers(&self, g: &UnderlayGraph, target: RouterId) -> Vec<RouterId> {
        let mut out = vec![target];
        let mut cur = target;
        while let Some((prev, _)) = self.pred(g, cur) {
            out.push(prev);
            cur = prev;
        }
        out.reverse();
        out
    }
}

/// Dijkstra from `source`. Among equal-distance heap entries the smaller
/// router id is settled first; predecessors only change on strict
/// improvement.
pub fn dijkstra(g: &UnderlayGraph, source: RouterId) -> SsspTable {
    let n = g.router_count();
    let mut dist = vec![Micros(u64::MAX); n];
    let mut pred_link = vec![NO_PRED; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source.index()] = Micros::ZERO;
    heap.push(Reverse((Micros::ZERO, source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if std::mem::replace(&mut done[u.index()], true) {
            continue;
        }
        for &(v, link) in g.neighbors(u) {
            let nd = d + g.links()[link].delay;
            if nd < dist[v.index()] {
                dist[v.index()] = nd;
                pred_link[v.index()] = link as u32;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    SsspTable {
        source,
        dist,
        pred_link,
    }
}

pub(super) struct PathCache {
    tables: Vec<OnceLock<Arc<SsspTable>>>,
}

impl PathCache {
    pub(super) fn new(n: usize) -> Self {
        PathCache {
            tables: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub(super) fn get_or_fill(&self, source: RouterId, fill: impl FnOnce() -> SsspTable) -> Arc<SsspTable> {
        Arc::clone(self.tables[source.index()].get_or_init(|| Arc::new(fill())))
    }

    pub(super) fn filled(&self) -> usize {
        self.tables.iter().filter(|t| t.get().is_some()).count()
    }
}
