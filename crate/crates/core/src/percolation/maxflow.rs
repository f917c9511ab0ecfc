//! Blocking-flow (Dinic) max flow on unit-capacity graphs, with integral
//! path extraction for edge-disjoint crossing counts.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i32,
    flow: i32,
    rev: usize,
    /// Undirected source-edge id this arc belongs to, if any.
    tag: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Dinic {
    graph: Vec<Vec<Arc>>,
}

impl Dinic {
    pub fn new(n: usize) -> Self {
        Dinic { graph: vec![Vec::new(); n] }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: i32, tag: Option<usize>) {
        let rev_from = self.graph[to].len();
        let rev_to = self.graph[from].len();
        self.graph[from].push(Arc { to, cap, flow: 0, rev: rev_from, tag });
        self.graph[to].push(Arc { to: from, cap: 0, flow: 0, rev: rev_to, tag: None });
    }

    /// Undirected unit edge: one forward and one backward unit arc, both
    /// tagged with the edge id.
    pub fn add_undirected_unit(&mut self, u: usize, v: usize, tag: usize) {
        self.add_arc(u, v, 1, Some(tag));
        self.add_arc(v, u, 1, Some(tag));
    }

    fn bfs(&self, s: usize, t: usize, level: &mut [i32]) -> bool {
        level.fill(-1);
        level[s] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for arc in &self.graph[u] {
                if arc.cap - arc.flow > 0 && level[arc.to] == -1 {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        level[t] != -1
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: i32, level: &[i32], it: &mut [usize]) -> i32 {
        if u == t {
            return pushed;
        }
        while it[u] < self.graph[u].len() {
            let i = it[u];
            let (residual, to, rev) = {
                let arc = &self.graph[u][i];
                (arc.cap - arc.flow, arc.to, arc.rev)
            };
            if residual > 0 && level[to] == level[u] + 1 {
                let got = self.dfs(to, t, pushed.min(residual), level, it);
                if got > 0 {
                    self.graph[u][i].flow += got;
                    self.graph[to][rev].flow -= got;
                    return got;
                }
            }
            it[u] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i32 {
        let n = self.graph.len();
        let mut total = 0;
        let mut level = vec![-1i32; n];
        while self.bfs(s, t, &mut level) {
            let mut it = vec![0usize; n];
            loop {
                let pushed = self.dfs(s, t, i32::MAX / 2, &level, &mut it);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    /// Decomposes the integral flow into s-t paths and returns the tag
    /// sequences. Opposite unit arcs of the same undirected edge cancel.
    /// Arc choice is by insertion order, which makes extraction
    /// deterministic.
    pub fn decompose_paths(&mut self, s: usize, t: usize) -> Vec<Vec<usize>> {
        // Net positive usage per arc (cancelling paired flow).
        let n = self.graph.len();
        let mut usage: Vec<Vec<i32>> = (0..n)
            .map(|u| self.graph[u].iter().map(|a| a.flow.max(0)).collect())
            .collect();
        for u in 0..n {
            for i in 0..self.graph[u].len() {
                let arc = &self.graph[u][i];
                if arc.cap == 0 {
                    continue; // residual arc
                }
                let (to, rev) = (arc.to, arc.rev);
                // The paired forward arc, if this models an undirected edge.
                if let Some(pair) = self.graph[to].get(rev + 1) {
                    if pair.to == u && pair.tag == arc.tag && arc.tag.is_some() {
                        let cancel = usage[u][i].min(usage[to][rev + 1]);
                        usage[u][i] -= cancel;
                        usage[to][rev + 1] -= cancel;
                    }
                }
            }
        }
        let mut paths = Vec::new();
        loop {
            // Walk from s following positive-usage arcs.
            let mut here = s;
            let mut tags = Vec::new();
            let mut moved = false;
            while here != t {
                let next = (0..self.graph[here].len())
                    .find(|&i| self.graph[here][i].cap > 0 && usage[here][i] > 0);
                let Some(i) = next else { break };
                usage[here][i] -= 1;
                if let Some(tag) = self.graph[here][i].tag {
                    tags.push(tag);
                }
                here = self.graph[here][i].to;
                moved = true;
            }
            if here == t && moved {
                paths.push(tags);
            } else {
                break;
            }
        }
        paths
    }
}
