//! Regular multigraphs with self-loops, rotation maps, BFS metrics, girth,
//! short cycle enumeration and the metric graph `Σ(G)`.
//!
//! A self-loop adds 1 to the degree of its vertex. In a rotation map a
//! fixed point `Rot(v, i) = (v, i)` is one such loop; a pair of ports of the
//! same vertex that map to each other gives two.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub const INF: u32 = u32::MAX;

/// Denominator of the offset grid for points inside edges.
pub const OFFSET_DEN: u32 = 1 << 20;

/// Largest cycle-length threshold accepted by [`Multigraph::short_cycles`].
pub const MAX_CYCLE_THRESHOLD: usize = 25;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationMap {
    d: usize,
    table: Vec<(u32, u32)>,
}

impl RotationMap {
    pub fn new(n: usize, d: usize, table: Vec<(u32, u32)>) -> Result<Self> {
        if table.len() != n * d {
            return Err(Error::Rotation(format!(
                "table has {} entries, expected {}",
                table.len(),
                n * d
            )));
        }
        let r = RotationMap { d, table };
        for v in 0..n {
            for i in 0..d {
                let (w, j) = r.table[v * d + i];
                if w as usize >= n || j as usize >= d {
                    return Err(Error::Rotation(format!("({v},{i}) maps out of range")));
                }
                if r.get(w as usize, j as usize) != (v as u32, i as u32) {
                    return Err(Error::Rotation(format!("not an involution at ({v},{i})")));
                }
            }
        }
        Ok(r)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, v: usize, i: usize) -> (u32, u32) {
        self.table[v * self.d + i]
    }

    pub fn table(&self) -> &[(u32, u32)] {
        &self.table
    }
}

/// Undirected multigraph in compressed adjacency form.
///
/// Row `u` lists `(v, E(u,v))` sorted by `v`; the diagonal entry counts
/// self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    offsets: Vec<usize>,
    nbrs: Vec<u32>,
    mults: Vec<u32>,
    rot: Option<RotationMap>,
}

/// A point of `Σ(G)`: a vertex or a point inside an edge instance.
///
/// `offset` is the distance from the first endpoint of the edge instance
/// (as listed by [`Multigraph::edge_instances`]) in units of `1 / OFFSET_DEN`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimplicialPoint {
    Vertex(u32),
    Edge { edge: u32, offset: u32 },
}

impl SimplicialPoint {
    /// Point on edge instance `edge` at distance `t` from endpoint `from`.
    pub fn on_edge(g: &Multigraph, edge: usize, from: u32, t: f64) -> Result<Self> {
        let (a, b) = *g
            .edge_instances()
            .get(edge)
            .ok_or_else(|| Error::Precondition(format!("no edge instance {edge}")))?;
        let k = crate::math::round(t * OFFSET_DEN as f64) as i64;
        if k <= 0 || k >= OFFSET_DEN as i64 {
            return Err(Error::Precondition(format!(
                "offset {t} not strictly inside (0,1)"
            )));
        }
        let k = k as u32;
        if from == a {
            Ok(SimplicialPoint::Edge {
                edge: edge as u32,
                offset: k,
            })
        } else if from == b {
            Ok(SimplicialPoint::Edge {
                edge: edge as u32,
                offset: OFFSET_DEN - k,
            })
        } else {
            Err(Error::Precondition(format!(
                "vertex {from} is not an endpoint of edge {edge}"
            )))
        }
    }
}

/// Edge instances `(u, v)` with `u <= v`, one entry per unit of multiplicity.
fn instances(g: &Multigraph) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(g.edge_count());
    for u in 0..g.n {
        for (v, m) in g.row(u) {
            if v as usize >= u {
                for _ in 0..m {
                    out.push((u as u32, v));
                }
            }
        }
    }
    out
}

impl Multigraph {
    /// Builds a graph from `(u, v, multiplicity)` triples. Repeated pairs add up.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut pairs: Vec<(u32, u32, u32)> = Vec::with_capacity(2 * edges.len());
        for &(u, v, m) in edges {
            if u >= n || v >= n {
                return Err(Error::Precondition(format!(
                    "edge ({u},{v}) out of range for n={n}"
                )));
            }
            if m == 0 {
                continue;
            }
            pairs.push((u as u32, v as u32, m));
            if u != v {
                pairs.push((v as u32, u as u32, m));
            }
        }
        Ok(Self::from_directed_pairs(n, pairs))
    }

    /// Builds from an already symmetric list of directed `(u, v, m)` entries.
    fn from_directed_pairs(n: usize, mut pairs: Vec<(u32, u32, u32)>) -> Self {
        pairs.sort_unstable_by_key(|&(u, v, _)| (u, v));
        let mut offsets = vec![0usize; n + 1];
        let mut nbrs = Vec::with_capacity(pairs.len());
        let mut mults: Vec<u32> = Vec::with_capacity(pairs.len());
        let mut last: Option<(u32, u32)> = None;
        for (u, v, m) in pairs {
            if last == Some((u, v)) {
                *mults.last_mut().unwrap() += m;
            } else {
                nbrs.push(v);
                mults.push(m);
                offsets[u as usize + 1] += 1;
                last = Some((u, v));
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Multigraph {
            n,
            offsets,
            nbrs,
            mults,
            rot: None,
        }
    }

    /// Builds the graph whose edges are the orbits of a rotation map.
    pub fn from_rotation(rot: RotationMap) -> Self {
        let d = rot.degree();
        let n = rot.table.len() / d.max(1);
        let mut pairs = Vec::with_capacity(n * d);
        for v in 0..n {
            for i in 0..d {
                let (w, _) = rot.get(v, i);
                pairs.push((v as u32, w, 1));
            }
        }
        let mut g = Self::from_directed_pairs(n, pairs);
        g.rot = Some(rot);
        g
    }

    /// Dense constructor, mainly for tests.
    pub fn from_matrix(mult: &[Vec<u32>]) -> Result<Self> {
        let n = mult.len();
        for u in 0..n {
            if mult[u].len() != n {
                return Err(Error::Precondition("matrix is not square".into()));
            }
            for v in 0..u {
                if mult[u][v] != mult[v][u] {
                    return Err(Error::Asymmetric { u: v, v: u });
                }
            }
        }
        let mut pairs = Vec::new();
        for (u, row) in mult.iter().enumerate() {
            for (v, &m) in row.iter().enumerate() {
                if m > 0 {
                    pairs.push((u as u32, v as u32, m));
                }
            }
        }
        Ok(Self::from_directed_pairs(n, pairs))
    }

    pub fn cycle(k: usize) -> Self {
        let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k, 1)).collect();
        Self::from_edges(k, &edges).expect("cycle")
    }

    /// `C°_k`: the k-cycle with one self-loop at every vertex.
    pub fn looped_cycle(k: usize) -> Self {
        let mut edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k, 1)).collect();
        edges.extend((0..k).map(|i| (i, i, 1)));
        Self::from_edges(k, &edges).expect("looped cycle")
    }

    pub fn complete(k: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..k {
            for v in u + 1..k {
                edges.push((u, v, 1));
            }
        }
        Self::from_edges(k, &edges).expect("complete")
    }

    pub fn path(k: usize) -> Self {
        let edges: Vec<_> = (1..k).map(|i| (i - 1, i, 1)).collect();
        Self::from_edges(k, &edges).expect("path")
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5, 1));
            edges.push((5 + i, 5 + (i + 2) % 5, 1));
            edges.push((i, i + 5, 1));
        }
        Self::from_edges(10, &edges).expect("petersen")
    }

    /// Disjoint union.
    pub fn disjoint_union(&self, other: &Multigraph) -> Multigraph {
        let mut edges: Vec<(usize, usize, u32)> = self.edge_list();
        let n = self.n;
        edges.extend(
            other
                .edge_list()
                .into_iter()
                .map(|(u, v, m)| (u + n, v + n, m)),
        );
        Multigraph::from_edges(n + other.n, &edges).expect("union")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbours of `u` with multiplicities, sorted by neighbour.
    #[inline]
    pub fn row(&self, u: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.nbrs[r.clone()]
            .iter()
            .copied()
            .zip(self.mults[r].iter().copied())
    }

    pub fn mult(&self, u: usize, v: usize) -> u32 {
        let r = self.offsets[u]..self.offsets[u + 1];
        match self.nbrs[r.clone()].binary_search(&(v as u32)) {
            Ok(i) => self.mults[r.start + i],
            Err(_) => 0,
        }
    }

    pub fn loops(&self, u: usize) -> u32 {
        self.mult(u, u)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.mults[self.offsets[u]..self.offsets[u + 1]]
            .iter()
            .map(|&m| m as usize)
            .sum()
    }

    /// Common degree, if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        let d = self.degree(0);
        (1..self.n).all(|u| self.degree(u) == d).then_some(d)
    }

    /// Number of edges, a loop counting once per unit of multiplicity.
    pub fn edge_count(&self) -> usize {
        let mut s = 0usize;
        for u in 0..self.n {
            for (v, m) in self.row(u) {
                if v as usize >= u {
                    s += m as usize;
                }
            }
        }
        s
    }

    /// `(u, v, multiplicity)` with `u <= v`.
    pub fn edge_list(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for (v, m) in self.row(u) {
                if v as usize >= u {
                    out.push((u, v as usize, m));
                }
            }
        }
        out
    }

    /// One entry per unit of multiplicity, ordered by `(u, v)`.
    pub fn edge_instances(&self) -> Vec<(u32, u32)> {
        instances(self)
    }

    pub fn is_simple(&self) -> bool {
        (0..self.n).all(|u| self.row(u).all(|(v, m)| v as usize != u && m == 1))
    }

    pub fn rotation(&self) -> Option<&RotationMap> {
        self.rot.as_ref()
    }

    pub fn without_rotation(mut self) -> Self {
        self.rot = None;
        self
    }

    /// Attaches a rotation map after checking it against the multiplicities.
    pub fn with_rotation(mut self, rot: RotationMap) -> Result<Self> {
        self.rot = Some(rot);
        self.check_rotation()?;
        Ok(self)
    }

    /// Keeps an existing rotation map, otherwise derives one: the k-th copy
    /// of edge `uv` at `u` is paired with the k-th copy at `v`, and loops are
    /// fixed points.
    pub fn with_canonical_rotation(mut self) -> Result<Self> {
        if self.rot.is_some() {
            return Ok(self);
        }
        let d = self.regular_degree().ok_or(Error::NotRegular)?;
        let base = |g: &Multigraph, u: usize, v: u32| -> usize {
            let mut s = 0usize;
            for (w, m) in g.row(u) {
                if w == v {
                    return s;
                }
                s += m as usize;
            }
            unreachable!("neighbour present")
        };
        let mut table = vec![(0u32, 0u32); self.n * d];
        for u in 0..self.n {
            let mut port = 0usize;
            for (v, m) in self.row(u) {
                if v as usize == u {
                    for k in 0..m as usize {
                        table[u * d + port + k] = (u as u32, (port + k) as u32);
                    }
                } else {
                    let bv = base(&self, v as usize, u as u32);
                    for k in 0..m as usize {
                        table[u * d + port + k] = (v, (bv + k) as u32);
                    }
                }
                port += m as usize;
            }
        }
        self.rot = Some(RotationMap { d, table });
        Ok(self)
    }

    fn check_rotation(&self) -> Result<()> {
        let Some(rot) = &self.rot else { return Ok(()) };
        let d = rot.degree();
        if rot.table.len() != self.n * d {
            return Err(Error::Rotation("table size does not match n*d".into()));
        }
        let mut counts: Vec<(u32, u32)> = Vec::with_capacity(d);
        for u in 0..self.n {
            counts.clear();
            for i in 0..d {
                let (w, j) = rot.get(u, i);
                if w as usize >= self.n
                    || j as usize >= d
                    || rot.get(w as usize, j as usize) != (u as u32, i as u32)
                {
                    return Err(Error::Rotation(format!("not an involution at ({u},{i})")));
                }
                counts.push((w, 1));
            }
            counts.sort_unstable();
            let mut merged: Vec<(u32, u32)> = Vec::new();
            for &(w, c) in counts.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == w => last.1 += c,
                    _ => merged.push((w, c)),
                }
            }
            if !merged.iter().copied().eq(self.row(u)) {
                return Err(Error::Rotation(format!(
                    "ports of vertex {u} disagree with multiplicities"
                )));
            }
        }
        Ok(())
    }

    /// Checks symmetry, optional regularity and rotation consistency.
    pub fn validate(&self, regular: Option<usize>) -> Result<()> {
        for u in 0..self.n {
            for (v, m) in self.row(u) {
                if self.mult(v as usize, u) != m {
                    return Err(Error::Asymmetric { u, v: v as usize });
                }
            }
        }
        if let Some(d) = regular {
            for u in 0..self.n {
                let found = self.degree(u);
                if found != d {
                    return Err(Error::DegreeMismatch {
                        vertex: u,
                        expected: d,
                        found,
                    });
                }
            }
        }
        self.check_rotation()
    }

    /// Test hook: overwrite one directed multiplicity entry, breaking symmetry.
    pub fn set_directed_mult(&mut self, u: usize, v: usize, m: u32) -> bool {
        let r = self.offsets[u]..self.offsets[u + 1];
        match self.nbrs[r.clone()].binary_search(&(v as u32)) {
            Ok(i) => {
                self.mults[r.start + i] = m;
                true
            }
            Err(_) => false,
        }
    }

    /// Hop distances from `s`; unreachable vertices get [`INF`].
    pub fn bfs(&self, s: usize) -> Vec<u32> {
        self.bfs_multi(&[s])
    }

    pub fn bfs_multi(&self, sources: &[usize]) -> Vec<u32> {
        let mut dist = vec![INF; self.n];
        let mut q = VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                q.push_back(s as u32);
            }
        }
        while let Some(u) = q.pop_front() {
            let du = dist[u as usize];
            for (v, _) in self.row(u as usize) {
                if dist[v as usize] == INF {
                    dist[v as usize] = du + 1;
                    q.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs(0).iter().all(|&d| d != INF)
    }

    /// Connected component label of every vertex.
    pub fn components(&self) -> (usize, Vec<u32>) {
        let mut label = vec![INF; self.n];
        let mut c = 0u32;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != INF {
                continue;
            }
            label[s] = c;
            stack.push(s as u32);
            while let Some(u) = stack.pop() {
                for (v, _) in self.row(u as usize) {
                    if label[v as usize] == INF {
                        label[v as usize] = c;
                        stack.push(v);
                    }
                }
            }
            c += 1;
        }
        (c as usize, label)
    }

    /// All-pairs hop distances.
    pub fn bfs_metrics(&self) -> BfsMetrics {
        let n = self.n;
        let mut dist = Vec::with_capacity(n * n);
        let mut diameter = 0;
        let mut connected = true;
        for s in 0..n {
            let row = self.bfs(s);
            for &d in &row {
                if d == INF {
                    connected = false;
                } else if d > diameter {
                    diameter = d;
                }
            }
            dist.extend_from_slice(&row);
        }
        BfsMetrics {
            n,
            dist,
            diameter,
            connected,
        }
    }

    /// Diameter by repeated BFS without storing the matrix; `None` if disconnected.
    pub fn diameter(&self) -> Option<u32> {
        let mut best = 0;
        for s in 0..self.n {
            for d in self.bfs(s) {
                if d == INF {
                    return None;
                }
                best = best.max(d);
            }
        }
        Some(best)
    }

    /// Length of a shortest cycle; loops give 1, parallel edges 2, and an
    /// acyclic graph gets `2 * diam` (largest component diameter).
    pub fn girth(&self) -> usize {
        let n = self.n;
        if (0..n).any(|u| self.loops(u) > 0) {
            return 1;
        }
        if (0..n).any(|u| self.row(u).any(|(_, m)| m > 1)) {
            return 2;
        }
        let mut best = usize::MAX;
        let mut dist = vec![INF; n];
        let mut parent = vec![INF; n];
        let mut q = VecDeque::new();
        for s in 0..n {
            let mut touched = Vec::new();
            dist[s] = 0;
            touched.push(s);
            q.push_back(s as u32);
            'bfs: while let Some(u) = q.pop_front() {
                let du = dist[u as usize];
                if 2 * du as usize + 1 >= best {
                    break;
                }
                for (v, _) in self.row(u as usize) {
                    if dist[v as usize] == INF {
                        dist[v as usize] = du + 1;
                        parent[v as usize] = u;
                        touched.push(v as usize);
                        q.push_back(v);
                    } else if parent[u as usize] != v {
                        let len = (du + dist[v as usize] + 1) as usize;
                        if len < best {
                            best = len;
                        }
                        if len == 3 {
                            break 'bfs;
                        }
                    }
                }
            }
            q.clear();
            for t in touched {
                dist[t] = INF;
                parent[t] = INF;
            }
            if best == 3 {
                break;
            }
        }
        if best == usize::MAX {
            let (_, label) = self.components();
            let mut diam = 0;
            for s in 0..n {
                for (v, d) in self.bfs(s).into_iter().enumerate() {
                    if label[v] == label[s] && d != INF {
                        diam = diam.max(d as usize);
                    }
                }
            }
            2 * diam
        } else {
            best
        }
    }

    /// Every cycle with fewer than `t` vertices, each listed once, starting at
    /// its smallest vertex with the smaller neighbour second.
    pub fn short_cycles(&self, t: usize) -> Result<Vec<Cycle>> {
        if t == 0 {
            return Err(Error::Precondition(
                "cycle threshold must be at least 1".into(),
            ));
        }
        if t > MAX_CYCLE_THRESHOLD {
            return Err(Error::Budget(format!(
                "cycle threshold {t} above {MAX_CYCLE_THRESHOLD}"
            )));
        }
        let mut out = Vec::new();
        if t > 1 {
            for u in 0..self.n {
                if self.loops(u) > 0 {
                    out.push(vec![u as u32]);
                }
            }
        }
        if t > 2 {
            for u in 0..self.n {
                for (v, m) in self.row(u) {
                    if v as usize > u && m >= 2 {
                        out.push(vec![u as u32, v]);
                    }
                }
            }
        }
        if t > 3 {
            let mut on_path = vec![false; self.n];
            let mut path = Vec::new();
            for s in 0..self.n {
                path.push(s as u32);
                on_path[s] = true;
                self.cycle_dfs(s as u32, t - 1, &mut path, &mut on_path, &mut out);
                on_path[s] = false;
                path.pop();
            }
        }
        Ok(out
            .into_iter()
            .map(|vertices| {
                let induced = self.induced_edge_count(&vertices) == vertices.len();
                Cycle { vertices, induced }
            })
            .collect())
    }

    fn cycle_dfs(
        &self,
        s: u32,
        max_len: usize,
        path: &mut Vec<u32>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<u32>>,
    ) {
        let u = *path.last().unwrap();
        for (v, _) in self.row(u as usize) {
            if v == s && path.len() >= 3 && path[1] < u {
                out.push(path.clone());
            } else if v > s && !on_path[v as usize] && path.len() < max_len {
                on_path[v as usize] = true;
                path.push(v);
                self.cycle_dfs(s, max_len, path, on_path, out);
                path.pop();
                on_path[v as usize] = false;
            }
        }
    }

    /// `|E_G(S)|` counting multiplicity and loops.
    pub fn induced_edge_count(&self, set: &[u32]) -> usize {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        let mut c = 0usize;
        for &u in &sorted {
            for (v, m) in self.row(u as usize) {
                if v >= u && sorted.binary_search(&v).is_ok() {
                    c += m as usize;
                }
            }
        }
        c
    }

    /// Induced subgraph on `set` (vertices renumbered in the given order).
    pub fn induced_subgraph(&self, set: &[u32]) -> Multigraph {
        let mut index = alloc::collections::BTreeMap::new();
        for (i, &v) in set.iter().enumerate() {
            index.insert(v, i);
        }
        let mut edges = Vec::new();
        for (i, &u) in set.iter().enumerate() {
            for (v, m) in self.row(u as usize) {
                if let Some(&j) = index.get(&v) {
                    if j >= i {
                        edges.push((i, j, m));
                    }
                }
            }
        }
        Multigraph::from_edges(set.len(), &edges).expect("induced")
    }

    /// `(1/2) Σ_(u,v) E(u,v) K(u,v)`: every edge once, loops contribute 0.
    pub fn edge_sum<K: Fn(usize, usize) -> f64>(&self, k: K) -> Result<f64> {
        let mut s = 0.0;
        for u in 0..self.n {
            if k(u, u) != 0.0 {
                return Err(Error::Precondition(format!(
                    "kernel has nonzero diagonal at {u}"
                )));
            }
            for (v, m) in self.row(u) {
                if v as usize > u {
                    s += m as f64 * k(u, v as usize);
                }
            }
        }
        Ok(s)
    }

    /// Distance in `Σ(G)` between two points, running BFS from the needed endpoints.
    pub fn simplicial_distance(&self, p: SimplicialPoint, q: SimplicialPoint) -> Result<f64> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let inst = self.edge_instances();
        let ep = exits(&inst, p);
        let mut best = direct(&inst, p, q).unwrap_or(f64::INFINITY);
        for &(a, x) in ep.iter().flatten() {
            let dist = self.bfs(a as usize);
            for &(b, y) in exits(&inst, q).iter().flatten() {
                best = best.min(x + dist[b as usize] as f64 + y);
            }
        }
        Ok(best)
    }
}

/// Exits of a point: `(vertex, distance to it)` for each endpoint of its segment.
pub(crate) fn exits(inst: &[(u32, u32)], p: SimplicialPoint) -> [Option<(u32, f64)>; 2] {
    match p {
        SimplicialPoint::Vertex(v) => [Some((v, 0.0)), None],
        SimplicialPoint::Edge { edge, offset } => {
            let (a, b) = inst[edge as usize];
            let t = offset as f64 / OFFSET_DEN as f64;
            [Some((a, t)), Some((b, 1.0 - t))]
        }
    }
}

/// Distance between two points on the same edge instance, travelled inside it.
pub(crate) fn direct(inst: &[(u32, u32)], p: SimplicialPoint, q: SimplicialPoint) -> Option<f64> {
    match (p, q) {
        (SimplicialPoint::Vertex(a), SimplicialPoint::Vertex(b)) if a == b => Some(0.0),
        (
            SimplicialPoint::Edge { edge: e, offset: x },
            SimplicialPoint::Edge { edge: f, offset: y },
        ) if e == f => {
            let d = (x as i64 - y as i64).unsigned_abs() as f64 / OFFSET_DEN as f64;
            let (a, b) = inst[e as usize];
            Some(if a == b { d.min(1.0 - d) } else { d })
        }
        _ => None,
    }
}

/// Metric of `Σ(G)` backed by a full hop-distance matrix.
#[derive(Clone, Debug)]
pub struct SimplicialMetric {
    inst: Vec<(u32, u32)>,
    metrics: BfsMetrics,
}

impl SimplicialMetric {
    pub fn new(g: &Multigraph) -> Result<Self> {
        let metrics = g.bfs_metrics();
        if !metrics.connected {
            return Err(Error::Disconnected);
        }
        Ok(SimplicialMetric {
            inst: g.edge_instances(),
            metrics,
        })
    }

    pub fn hop(&self, u: u32, v: u32) -> u32 {
        self.metrics.get(u as usize, v as usize)
    }

    pub fn metrics(&self) -> &BfsMetrics {
        &self.metrics
    }

    pub fn instances(&self) -> &[(u32, u32)] {
        &self.inst
    }

    pub fn distance(&self, p: SimplicialPoint, q: SimplicialPoint) -> f64 {
        let mut best = direct(&self.inst, p, q).unwrap_or(f64::INFINITY);
        for &(a, x) in exits(&self.inst, p).iter().flatten() {
            for &(b, y) in exits(&self.inst, q).iter().flatten() {
                best = best.min(x + self.hop(a, b) as f64 + y);
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
pub struct Cycle {
    pub vertices: Vec<u32>,
    /// `|E_G(C)| = |C|`.
    pub induced: bool,
}

#[derive(Clone, Debug)]
pub struct BfsMetrics {
    pub n: usize,
    /// Row-major `n x n`; [`INF`] marks unreachable pairs.
    pub dist: Vec<u32>,
    pub diameter: u32,
    pub connected: bool,
}

impl BfsMetrics {
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.dist[u * self.n + v]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_diameter(g: &Multigraph) -> u32 {
        // Floyd-Warshall as an independent oracle.
        let n = g.n();
        let mut d = vec![vec![u32::MAX / 4; n]; n];
        for u in 0..n {
            d[u][u] = 0;
            for (v, _) in g.row(u) {
                if v as usize != u {
                    d[u][v as usize] = 1;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d.iter().flatten().copied().max().unwrap()
    }

    #[test]
    fn cycle_validates() {
        let c9 = Multigraph::cycle(9);
        assert!(c9.validate(Some(2)).is_ok());
        assert_eq!(c9.regular_degree(), Some(2));
    }

    #[test]
    fn asymmetric_detected() {
        let mut c9 = Multigraph::cycle(9);
        assert!(c9.set_directed_mult(0, 1, 2));
        assert!(matches!(c9.validate(None), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn degree_mismatch_detected() {
        let p = Multigraph::path(4);
        assert!(matches!(
            p.validate(Some(2)),
            Err(Error::DegreeMismatch { vertex: 0, .. })
        ));
    }

    #[test]
    fn bfs_examples() {
        assert_eq!(Multigraph::cycle(9).bfs_metrics().diameter, 4);
        let two = Multigraph::complete(3).disjoint_union(&Multigraph::complete(3));
        assert!(!two.bfs_metrics().connected);
        let p = Multigraph::petersen();
        assert_eq!(p.bfs_metrics().diameter, 2);
        assert_eq!(brute_diameter(&p), 2);
    }

    #[test]
    fn girth_examples() {
        assert_eq!(Multigraph::looped_cycle(5).girth(), 1);
        assert_eq!(Multigraph::cycle(9).girth(), 9);
        assert_eq!(Multigraph::path(4).girth(), 6);
        assert_eq!(Multigraph::petersen().girth(), 5);
        let g = Multigraph::from_edges(3, &[(0, 1, 2), (1, 2, 1)]).unwrap();
        assert_eq!(g.girth(), 2);
    }

    #[test]
    fn short_cycle_examples() {
        let g = Multigraph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (2, 3, 1)]).unwrap();
        let c = g.short_cycles(4).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].vertices.len(), 3);
        assert!(c[0].induced);
        assert!(Multigraph::cycle(9).short_cycles(9).unwrap().is_empty());
        assert_eq!(Multigraph::cycle(9).short_cycles(10).unwrap().len(), 1);
        // K4: 4 triangles and 3 four-cycles; the four-cycles are not induced.
        let k4 = Multigraph::complete(4).short_cycles(5).unwrap();
        assert_eq!(k4.iter().filter(|c| c.vertices.len() == 3).count(), 4);
        assert_eq!(k4.iter().filter(|c| c.vertices.len() == 4).count(), 3);
        assert!(k4
            .iter()
            .filter(|c| c.vertices.len() == 4)
            .all(|c| !c.induced));
        // Petersen graph has 12 five-cycles and no shorter ones.
        assert_eq!(Multigraph::petersen().short_cycles(6).unwrap().len(), 12);
    }

    #[test]
    fn rotation_roundtrip() {
        let g = Multigraph::looped_cycle(6)
            .with_canonical_rotation()
            .unwrap();
        let rot = g.rotation().unwrap();
        for v in 0..6 {
            for i in 0..3 {
                let (w, j) = rot.get(v, i);
                assert_eq!(rot.get(w as usize, j as usize), (v as u32, i as u32));
            }
        }
        let back = Multigraph::from_rotation(rot.clone());
        assert_eq!(back.edge_list(), g.edge_list());
        assert!(g.validate(Some(3)).is_ok());
    }

    #[test]
    fn simplicial_examples() {
        let c4 = Multigraph::cycle(4);
        let inst = c4.edge_instances();
        // edges sharing vertex 1: (0,1) and (1,2)
        let e01 = inst.iter().position(|&e| e == (0, 1)).unwrap();
        let e12 = inst.iter().position(|&e| e == (1, 2)).unwrap();
        let p = SimplicialPoint::on_edge(&c4, e01, 0, 0.5).unwrap();
        let q = SimplicialPoint::on_edge(&c4, e12, 1, 0.5).unwrap();
        assert_eq!(c4.simplicial_distance(p, q).unwrap(), 1.0);
        // midpoint of (0,1) to the antipodal vertex 2 is 1.5, to 3 is also 1.5; the
        // antipode of the midpoint on C_4 sits at the midpoint of (2,3) at 2.0.
        assert_eq!(
            c4.simplicial_distance(p, SimplicialPoint::Vertex(2))
                .unwrap(),
            1.5
        );
        let e23 = inst.iter().position(|&e| e == (2, 3)).unwrap();
        let r = SimplicialPoint::on_edge(&c4, e23, 2, 0.5).unwrap();
        assert_eq!(c4.simplicial_distance(p, r).unwrap(), 2.0);
        let p6 = Multigraph::path(6);
        let inst = p6.edge_instances();
        let first = SimplicialPoint::on_edge(&p6, 0, 0, 0.5).unwrap();
        let last = SimplicialPoint::Vertex(5);
        assert_eq!(inst[0], (0, 1));
        assert_eq!(p6.simplicial_distance(first, last).unwrap(), 4.5);
        assert_eq!(
            c4.simplicial_distance(SimplicialPoint::Vertex(0), SimplicialPoint::Vertex(2))
                .unwrap(),
            2.0
        );
    }

    #[test]
    fn offsets_from_either_end_agree() {
        let c4 = Multigraph::cycle(4);
        let a = SimplicialPoint::on_edge(&c4, 0, 0, 0.25).unwrap();
        let b = SimplicialPoint::on_edge(&c4, 0, 1, 0.75).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_sum_examples() {
        let one = |u: usize, v: usize| if u == v { 0.0 } else { 1.0 };
        assert_eq!(Multigraph::cycle(4).edge_sum(one).unwrap(), 4.0);
        assert_eq!(Multigraph::looped_cycle(4).edge_sum(one).unwrap(), 4.0);
        let g = Multigraph::from_edges(2, &[(0, 1, 2)]).unwrap();
        assert_eq!(
            g.edge_sum(|u, v| if u == v { 0.0 } else { 5.0 }).unwrap(),
            10.0
        );
        assert!(g.edge_sum(|_, _| 1.0).is_err());
    }
}
