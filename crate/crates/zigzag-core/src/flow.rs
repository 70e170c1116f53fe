//! Dinic max-flow on integer capacities, and maximum-weight closure on top
//! of it (used for densest-subgraph and local-density questions).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

pub const CAP_INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: i64,
}

#[derive(Clone, Debug)]
pub struct FlowNet {
    arcs: Vec<Arc>,
    head: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNet {
    pub fn new(n: usize) -> Self {
        FlowNet {
            arcs: Vec::new(),
            head: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64) {
        self.head[u].push(self.arcs.len());
        self.arcs.push(Arc { to: v, cap });
        self.head[v].push(self.arcs.len());
        self.arcs.push(Arc { to: u, cap: 0 });
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut q = VecDeque::new();
        self.level[s] = 0;
        q.push_back(s);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                let Arc { to, cap } = self.arcs[a];
                if cap > 0 && self.level[to] < 0 {
                    self.level[to] = self.level[u] + 1;
                    q.push_back(to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, f: i64) -> i64 {
        if u == t {
            return f;
        }
        while self.iter[u] < self.head[u].len() {
            let a = self.head[u][self.iter[u]];
            let Arc { to, cap } = self.arcs[a];
            if cap > 0 && self.level[to] == self.level[u] + 1 {
                let got = self.dfs(to, t, f.min(cap));
                if got > 0 {
                    self.arcs[a].cap -= got;
                    self.arcs[a ^ 1].cap += got;
                    return got;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, CAP_INF);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Vertices reachable from `s` in the residual network.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &a in &self.head[u] {
                let Arc { to, cap } = self.arcs[a];
                if cap > 0 && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen
    }
}

/// Maximises `Σ_{e ⊆ S} w_e − Σ_{v ∈ S} c_v` over vertex sets `S`, where each
/// item `(u, v, w)` is an edge (a loop when `u == v`) and `forced` vertices
/// must belong to `S`. Returns the optimum value and a maximal optimal set.
pub fn max_closure(
    n: usize,
    items: &[(usize, usize, i64)],
    cost: &[i64],
    forced: &[usize],
) -> (i64, Vec<bool>) {
    let s = n + items.len();
    let t = s + 1;
    let mut net = FlowNet::new(t + 1);
    let mut total = 0;
    for (k, &(u, v, w)) in items.iter().enumerate() {
        let node = n + k;
        net.add_edge(s, node, w);
        total += w;
        net.add_edge(node, u, CAP_INF);
        if v != u {
            net.add_edge(node, v, CAP_INF);
        }
    }
    for (v, &c) in cost.iter().enumerate() {
        net.add_edge(v, t, c);
    }
    for &v in forced {
        net.add_edge(s, v, CAP_INF);
    }
    let cut = net.max_flow(s, t);
    let side = net.source_side(s);
    (total - cut, side[..n].to_vec())
}

/// Densest subgraph: returns `(|E(S)|, |S|, S)` maximising `|E(S)| / |S|`,
/// with loops and multiplicities counted.
pub fn densest_subgraph(n: usize, edges: &[(usize, usize, u32)]) -> (u64, u64, Vec<bool>) {
    let mut num: u64 = edges.iter().map(|e| e.2 as u64).sum();
    let mut den = n as u64;
    let mut best = vec![true; n];
    if n == 0 {
        return (0, 0, best);
    }
    loop {
        let items: Vec<_> = edges
            .iter()
            .map(|&(u, v, m)| (u, v, den as i64 * m as i64))
            .collect();
        let cost = vec![num as i64; n];
        let (val, set) = max_closure(n, &items, &cost, &[]);
        if val <= 0 {
            return (num, den, best);
        }
        let size = set.iter().filter(|&&b| b).count() as u64;
        num = edges
            .iter()
            .filter(|e| set[e.0] && set[e.1])
            .map(|e| e.2 as u64)
            .sum();
        den = size;
        best = set;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_flow() {
        let mut f = FlowNet::new(4);
        f.add_edge(0, 1, 3);
        f.add_edge(0, 2, 2);
        f.add_edge(1, 2, 1);
        f.add_edge(1, 3, 2);
        f.add_edge(2, 3, 3);
        assert_eq!(f.max_flow(0, 3), 5);
    }

    #[test]
    fn closure_picks_dense_part() {
        // Triangle plus a pendant vertex; weight 2 per edge, cost 3 per vertex.
        let items = [(0, 1, 2), (1, 2, 2), (0, 2, 2), (2, 3, 2)];
        let (val, set) = max_closure(4, &items, &[3, 3, 3, 3], &[]);
        assert_eq!(val, 0);
        let (val, set2) = max_closure(4, &items, &[1, 1, 1, 1], &[]);
        assert_eq!(val, 4);
        assert!(set2.iter().all(|&b| b));
        let _ = set;
    }

    #[test]
    fn densest_is_k4() {
        // K4 plus a long tail.
        let mut e = vec![
            (0, 1, 1),
            (0, 2, 1),
            (0, 3, 1),
            (1, 2, 1),
            (1, 3, 1),
            (2, 3, 1),
        ];
        for v in 3..10 {
            e.push((v, v + 1, 1));
        }
        let (num, den, set) = densest_subgraph(11, &e);
        assert_eq!((num, den), (6, 4));
        assert_eq!(set.iter().filter(|&&b| b).count(), 4);
    }
}
