//! Random regular graphs (pairing model and uniform simple graphs), sparsity
//! and short-cycle batteries, cycle surgery, the two-region decomposition of
//! `Σ(H)`, and permutation Poincaré trials for pairs of random graphs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::embeddings::{
    closest_labels, shortest_cycles, sparse_graph_l1, sparsity_delta, SparseL1Config,
};
use crate::flow::densest_subgraph;
use crate::math::{ceil, cos, ln, log_base, pow, sqrt, PI};
use crate::multigraph::{
    BfsMetrics, Multigraph, RotationMap, SimplicialMetric, SimplicialPoint, INF,
    MAX_CYCLE_THRESHOLD, OFFSET_DEN,
};
use crate::rng::{child_seed, seeded, Rng};
use crate::spectral::extreme_eigenvalues;
use crate::{Error, Result};

/// Default rejection budget of [`uniform_simple_sample`].
pub const SIMPLE_TRIES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Undetermined,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn pairing(n: usize, d: usize, rng: &mut Rng) -> Result<Multigraph> {
    if (n * d) % 2 == 1 {
        return Err(Error::Precondition(format!("n·d = {} is odd", n * d)));
    }
    let mut points: Vec<u32> = (0..(n * d) as u32).collect();
    points.shuffle(rng);
    let mut table = vec![(0u32, 0u32); n * d];
    for pair in points.chunks(2) {
        let (a, b) = (pair[0] as usize, pair[1] as usize);
        table[a] = ((b / d) as u32, (b % d) as u32);
        table[b] = ((a / d) as u32, (a % d) as u32);
    }
    Ok(Multigraph::from_rotation(RotationMap::new(n, d, table)?))
}

/// Uniform perfect matching of the `nd` half-edges, projected to a
/// `d`-regular multigraph with its rotation map.
pub fn pairing_sample(n: usize, d: usize, seed: u64) -> Result<Multigraph> {
    pairing(n, d, &mut seeded(seed))
}

/// Pairing samples rejected until simple; returns the graph and the number
/// of attempts.
pub fn uniform_simple_sample(
    n: usize,
    d: usize,
    seed: u64,
    max_tries: usize,
) -> Result<(Multigraph, usize)> {
    if d >= n {
        return Err(Error::Precondition(format!(
            "degree {d} needs more than {n} vertices"
        )));
    }
    let mut rng = seeded(seed);
    for k in 1..=max_tries {
        let g = pairing(n, d, &mut rng)?;
        if g.is_simple() {
            return Ok((g, k));
        }
    }
    Err(Error::Budget(format!(
        "no simple graph in {max_tries} pairing samples"
    )))
}

/// Membership in the class of graphs with `|E(S)| < (1+δ)|S|` for all
/// `|S| ≤ n^{1−ε}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Sparsity {
    /// The global maximum density is below `1+δ`.
    Member {
        density: f64,
    },
    Violator {
        set: Vec<u32>,
        edges: usize,
    },
    /// Dense somewhere, but no small violator was found.
    Undetermined {
        density: f64,
    },
}

impl Sparsity {
    pub fn refuted(&self) -> bool {
        matches!(self, Sparsity::Violator { .. })
    }
}

/// Cycles shorter than this mark the centres of the local violator search.
pub const SEARCH_CYCLE: usize = 9;
pub const SEARCH_RADIUS: u32 = 4;

pub fn sparsity_check(g: &Multigraph, eps: f64, delta: f64) -> Result<Sparsity> {
    if !g.is_simple() {
        return Err(Error::Precondition(
            "sparsity check needs a simple graph".into(),
        ));
    }
    let n = g.n();
    let limit = pow(n as f64, 1.0 - eps);
    let (num, den, set) = densest_subgraph(n, &g.edge_list());
    let density = if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    };
    if density < 1.0 + delta {
        return Ok(Sparsity::Member { density });
    }
    if den as f64 <= limit {
        let s: Vec<u32> = (0..n as u32).filter(|&v| set[v as usize]).collect();
        return Ok(Sparsity::Violator {
            set: s,
            edges: num as usize,
        });
    }
    let mut centre = vec![false; n];
    for c in g.short_cycles(SEARCH_CYCLE)? {
        for v in c.vertices {
            centre[v as usize] = true;
        }
    }
    for v in (0..n).filter(|&v| centre[v]) {
        let dist = g.bfs(v);
        for r in 1..=SEARCH_RADIUS {
            let ball: Vec<u32> = (0..n as u32).filter(|&u| dist[u as usize] <= r).collect();
            if ball.len() as f64 > limit {
                break;
            }
            let sub = g.induced_subgraph(&ball);
            let (e, s, inside) = densest_subgraph(ball.len(), &sub.edge_list());
            if s > 0 && e as f64 >= (1.0 + delta) * s as f64 {
                let set = (0..ball.len())
                    .filter(|&i| inside[i])
                    .map(|i| ball[i])
                    .collect();
                return Ok(Sparsity::Violator {
                    set,
                    edges: e as usize,
                });
            }
        }
    }
    Ok(Sparsity::Undetermined { density })
}

/// Cycles with fewer than `t` vertices: exhaustive up to the enumeration
/// limit, otherwise the shortest cycle through each edge.
pub fn short_cycle_list(g: &Multigraph, t: usize) -> Result<Vec<Vec<u32>>> {
    if t <= MAX_CYCLE_THRESHOLD {
        Ok(g.short_cycles(t)?.into_iter().map(|c| c.vertices).collect())
    } else {
        Ok(shortest_cycles(g, t))
    }
}

#[derive(Clone, Debug)]
pub struct SurgeryResult {
    pub t: usize,
    pub cycles: Vec<Vec<u32>>,
    /// The deleted edge `e_C` of each cycle, in cycle order.
    pub removed: Vec<(u32, u32)>,
    pub graph: Multigraph,
    pub girth: usize,
}

/// Deletes the lexicographically smallest edge of every cycle shorter than `t`.
pub fn cycle_surgery(g: &Multigraph, t: usize) -> Result<SurgeryResult> {
    if !g.is_simple() {
        return Err(Error::Precondition("surgery needs a simple graph".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let cycles = short_cycle_list(g, t)?;
    let mut owner = vec![INF; g.n()];
    for (i, c) in cycles.iter().enumerate() {
        for &v in c {
            if owner[v as usize] != INF {
                return Err(Error::Precondition(format!(
                    "overlapping short cycles at vertex {v}"
                )));
            }
            owner[v as usize] = i as u32;
        }
    }
    let removed: Vec<(u32, u32)> = cycles
        .iter()
        .map(|c| {
            (0..c.len())
                .map(|i| {
                    let (a, b) = (c[i], c[(i + 1) % c.len()]);
                    (a.min(b), a.max(b))
                })
                .min()
                .unwrap()
        })
        .collect();
    let mut sorted = removed.clone();
    sorted.sort_unstable();
    let edges: Vec<(usize, usize, u32)> = g
        .edge_list()
        .into_iter()
        .filter(|&(a, b, _)| sorted.binary_search(&(a as u32, b as u32)).is_err())
        .collect();
    let graph = Multigraph::from_edges(g.n(), &edges)?;
    let girth = graph.girth();
    if girth < t && graph.edge_count() >= graph.n() {
        return Err(Error::Precondition(format!(
            "surgered graph has girth {girth} < {t}"
        )));
    }
    Ok(SurgeryResult {
        t,
        cycles,
        removed,
        graph,
        girth,
    })
}

#[derive(Clone, Debug)]
pub struct DiameterCheck {
    pub r: u32,
    pub min_cycle_distance: Option<u32>,
    /// Short cycles pairwise at distance at least `r`.
    pub hypothesis: bool,
    pub diam_g: u32,
    pub diam_l: Option<u32>,
    /// `((t+r−1)/(r+1))·diam(G) + r(t−2)/(r+1)`.
    pub bound: f64,
    pub holds: bool,
}

pub fn surgery_diameter_check(g: &Multigraph, s: &SurgeryResult, r: u32) -> Result<DiameterCheck> {
    let diam_g = g.diameter().ok_or(Error::Disconnected)?;
    let src: Vec<(u32, u32)> = s
        .cycles
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&v| (v, i as u32)))
        .collect();
    let min_cycle_distance = closest_labels(g, &src, |_, _| false);
    let hypothesis = min_cycle_distance.is_none_or(|d| d >= r);
    let diam_l = s.graph.diameter();
    let (t, rf) = (s.t as f64, r as f64);
    let bound = (t + rf - 1.0) / (rf + 1.0) * diam_g as f64 + rf * (t - 2.0) / (rf + 1.0);
    let holds = diam_l.is_some_and(|d| d as f64 <= bound + 1e-9);
    Ok(DiameterCheck {
        r,
        min_cycle_distance,
        hypothesis,
        diam_g,
        diam_l,
        bound,
        holds,
    })
}

/// `min_{0 < |S| ≤ n/2} |E(S, S^c)| / |S|` by enumeration (`n ≤ 24`).
pub fn edge_expansion_exact(g: &Multigraph) -> Result<f64> {
    let n = g.n();
    if n > 24 {
        return Err(Error::Budget(format!(
            "exact expansion limited to 24 vertices, got {n}"
        )));
    }
    let edges = g.edge_list();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if 2 * size > n {
            continue;
        }
        let cut: u32 = edges
            .iter()
            .filter(|&&(a, b, _)| (mask >> a & 1) != (mask >> b & 1))
            .map(|e| e.2)
            .sum();
        best = best.min(cut as f64 / size as f64);
    }
    Ok(best)
}

/// Best `|E(S, S^c)| / |S|` over BFS-order prefixes from `starts` random
/// roots; an upper bound on the edge expansion.
pub fn sweep_expansion(g: &Multigraph, starts: usize, seed: u64) -> f64 {
    let n = g.n();
    let mut rng = seeded(seed);
    let mut best = f64::INFINITY;
    let mut inside = vec![false; n];
    for _ in 0..starts.max(1) {
        let root = rng.gen_range(0..n);
        let dist = g.bfs(root);
        let mut order: Vec<usize> = (0..n).filter(|&v| dist[v] != INF).collect();
        order.sort_by_key(|&v| dist[v]);
        inside.iter_mut().for_each(|x| *x = false);
        let mut cut: i64 = 0;
        for (k, &v) in order.iter().enumerate() {
            if 2 * (k + 1) > n {
                break;
            }
            for (w, m) in g.row(v) {
                if w as usize != v {
                    cut += if inside[w as usize] {
                        -(m as i64)
                    } else {
                        m as i64
                    };
                }
            }
            inside[v] = true;
            best = best.min(cut as f64 / (k + 1) as f64);
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct Hull {
    pub set: Vec<u32>,
    pub graph: Multigraph,
    /// `|T|(d(d−1)^{3r−1} + diam(G))`.
    pub size_bound: f64,
    pub diam_h: Option<u32>,
    pub diam_bound: u32,
    /// Largest `d_H(a,b)/d_G(a,b)` over pairs of `S`.
    pub ratio_max: f64,
    /// `2(diam(G)/r + 1)`.
    pub ratio_bound: f64,
}

impl Hull {
    pub fn holds(&self) -> bool {
        self.set.len() as f64 <= self.size_bound
            && self.diam_h.is_some_and(|d| d <= self.diam_bound)
            && self.ratio_max <= self.ratio_bound + 1e-12
    }

    /// Index of a host vertex inside [`Hull::graph`].
    pub fn index(&self, v: u32) -> Option<usize> {
        self.set.binary_search(&v).ok()
    }
}

/// `U = ⋃_{x∈T} B(x, 3r) ∪ ⋃_{x∈T} P_{x,hub}` and its induced subgraph.
pub fn geodesic_hull(g: &Multigraph, s: &[u32], t: &[u32], r: u32, hub: u32) -> Result<Hull> {
    let n = g.n();
    let diam = g.diameter().ok_or(Error::Disconnected)?;
    let tsrc: Vec<usize> = t.iter().map(|&v| v as usize).collect();
    let near = g.bfs_multi(&tsrc);
    if let Some(&a) = s.iter().find(|&&a| near[a as usize] > r) {
        return Err(Error::Precondition(format!(
            "vertex {a} is farther than {r} from T"
        )));
    }
    let mut inside: Vec<bool> = near.iter().map(|&d| d != INF && d <= 3 * r).collect();
    let from_hub = g.bfs(hub as usize);
    for &x in t {
        let mut v = x as usize;
        inside[v] = true;
        while v != hub as usize {
            let (w, _) = g
                .row(v)
                .find(|&(w, _)| from_hub[w as usize] + 1 == from_hub[v])
                .unwrap();
            v = w as usize;
            inside[v] = true;
        }
    }
    let set: Vec<u32> = (0..n as u32).filter(|&v| inside[v as usize]).collect();
    let graph = g.induced_subgraph(&set);
    let maxdeg = (0..n).map(|v| g.degree(v)).max().unwrap_or(0) as f64;
    let size_bound =
        t.len() as f64 * (maxdeg * pow(maxdeg - 1.0, 3.0 * r as f64 - 1.0) + diam as f64);
    let mut ratio_max: f64 = 1.0;
    for &a in s {
        let dg = g.bfs(a as usize);
        let ia = set.binary_search(&a).unwrap();
        let dh = graph.bfs(ia);
        for &b in s {
            if a != b {
                let ib = set.binary_search(&b).unwrap();
                let h = if dh[ib] == INF {
                    f64::INFINITY
                } else {
                    dh[ib] as f64
                };
                ratio_max = ratio_max.max(h / dg[b as usize] as f64);
            }
        }
    }
    let ratio_bound = if r == 0 {
        f64::INFINITY
    } else {
        2.0 * (diam as f64 / r as f64 + 1.0)
    };
    Ok(Hull {
        diam_h: graph.diameter(),
        set,
        graph,
        size_bound,
        diam_bound: 6 * r + 2 * diam,
        ratio_max,
        ratio_bound,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct BatteryConfig {
    pub k: f64,
    pub eps: f64,
    pub seed: u64,
    /// BFS roots tried by the cut search.
    pub cut_starts: usize,
    /// Sampled subsets pushed through the hull and sparse embedding.
    pub hull_samples: usize,
    pub hull_trees: usize,
    /// Overrides for the size-derived `δ` and `t`.
    pub delta: Option<f64>,
    pub t: Option<usize>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            k: 20.0,
            eps: 1.0 / 3.0,
            seed: 0,
            cut_starts: 32,
            hull_samples: 0,
            hull_trees: 8,
            delta: None,
            t: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PropertyBattery {
    pub n: usize,
    pub d: Option<usize>,
    pub connected: bool,
    pub diameter: Option<u32>,
    pub lambda2: Option<f64>,
    pub delta: f64,
    pub t: usize,
    pub delta_clamped: bool,
    pub t_clamped: bool,
    pub short_cycles: usize,
    /// `|I| ≤ √n`.
    pub few_cycles: bool,
    /// Surgery precondition (disjoint short cycles) held.
    pub surgery: bool,
    pub removed: usize,
    pub girth_l: Option<usize>,
    pub diam_l: Option<u32>,
    /// `diam(L) ≤ K log_d n`.
    pub item_b: Verdict,
    /// `|E_L(S, S^c)| ≥ |S|/K` for `|S| ≤ n/2`.
    pub expansion: Verdict,
    /// Best cut ratio found (an upper bound on the expansion of `L`).
    pub expansion_found: f64,
    /// `diam(L) ≤ K·girth(L)`.
    pub diam_girth: Verdict,
    pub sparsity: Sparsity,
    /// Measured distortions of the sampled subsets; never a certificate.
    pub subset_c1: Vec<f64>,
}

impl PropertyBattery {
    /// No determinable check failed.
    pub fn passes(&self) -> bool {
        self.connected
            && self.few_cycles
            && self.surgery
            && self.item_b != Verdict::Fail
            && self.expansion != Verdict::Fail
            && self.diam_girth != Verdict::Fail
            && !self.sparsity.refuted()
    }
}

/// Runs the determinable parts of the L-class definition on `h`, with
/// `δ = min(21/log_d n, 1/4)` and `t = max(⌊log_d n/63⌋, 3)`.
pub fn l_class_battery(h: &Multigraph, cfg: &BatteryConfig) -> Result<PropertyBattery> {
    let n = h.n();
    let d = h.regular_degree();
    let base = d.unwrap_or(3).max(2) as f64;
    let logn = log_base(n as f64, base);
    let delta_raw = 21.0 / logn;
    let t_raw = (logn / 63.0) as usize;
    let delta = cfg.delta.unwrap_or(delta_raw.min(0.25));
    let t = cfg.t.unwrap_or(t_raw.max(3));
    let connected = h.is_connected();
    let diameter = h.diameter();
    let lambda2 = if d.is_some() && connected {
        extreme_eigenvalues(h).ok().map(|x| x.0)
    } else {
        None
    };
    let sparsity = sparsity_check(h, cfg.eps, delta)?;
    let cycles = short_cycle_list(h, t)?;
    let few_cycles = (cycles.len() as f64) <= sqrt(n as f64);
    let surgery = if connected {
        cycle_surgery(h, t).ok()
    } else {
        None
    };
    let mut b = PropertyBattery {
        n,
        d,
        connected,
        diameter,
        lambda2,
        delta,
        t,
        delta_clamped: delta < delta_raw,
        t_clamped: t > t_raw,
        short_cycles: cycles.len(),
        few_cycles,
        surgery: surgery.is_some(),
        removed: surgery.as_ref().map_or(0, |s| s.removed.len()),
        girth_l: None,
        diam_l: None,
        item_b: Verdict::Undetermined,
        expansion: Verdict::Undetermined,
        expansion_found: f64::INFINITY,
        diam_girth: Verdict::Undetermined,
        sparsity,
        subset_c1: Vec::new(),
    };
    let Some(s) = surgery else { return Ok(b) };
    let l = &s.graph;
    b.girth_l = Some(s.girth);
    b.diam_l = l.diameter();
    b.item_b = match b.diam_l {
        Some(dl) => Verdict::from_bool(dl as f64 <= cfg.k * logn),
        None => Verdict::Fail,
    };
    b.diam_girth = match b.diam_l {
        Some(dl) => Verdict::from_bool(dl as f64 <= cfg.k * s.girth as f64),
        None => Verdict::Fail,
    };
    if n <= 24 {
        let e = edge_expansion_exact(l)?;
        b.expansion_found = e;
        b.expansion = Verdict::from_bool(e >= 1.0 / cfg.k);
    } else {
        let found = sweep_expansion(l, cfg.cut_starts, child_seed(cfg.seed, 1));
        b.expansion_found = found;
        if found < 1.0 / cfg.k {
            b.expansion = Verdict::Fail;
        } else if let (Some(l2), Some(dd)) = (lambda2, d) {
            // Cheeger lower bound for H, carried to L when short cycles are far apart.
            let m = ceil(2.0 / (dd as f64 * (1.0 - l2))).max(3.0);
            let src: Vec<(u32, u32)> = s
                .cycles
                .iter()
                .enumerate()
                .flat_map(|(i, c)| c.iter().map(move |&v| (v, i as u32)))
                .collect();
            let far =
                closest_labels(h, &src, |_, _| false).is_none_or(|dist| dist as f64 > 8.0 * m);
            if far && 1.0 / (4.0 * m) >= 1.0 / cfg.k && l2 < 1.0 {
                b.expansion = Verdict::Pass;
            }
        }
    }
    let mut rng = seeded(child_seed(cfg.seed, 2));
    let cap = sqrt(n as f64) as usize;
    for _ in 0..cfg.hull_samples {
        let centre = rng.gen_range(0..n);
        let dist = l.bfs(centre);
        let mut order: Vec<u32> = (0..n as u32).filter(|&v| dist[v as usize] != INF).collect();
        order.sort_by_key(|&v| dist[v as usize]);
        order.truncate(cap.max(2));
        order.sort_unstable();
        let hull = geodesic_hull(l, &order, &order, 0, centre as u32)?;
        let delta_h = sparsity_delta(&hull.graph).max(1e-3);
        if delta_h < 1.0 / 3.0 {
            let c = SparseL1Config {
                delta: delta_h,
                trees: cfg.hull_trees,
                seed: rng.gen(),
                random_pairs: 200,
            };
            if let Ok((_, rep)) = sparse_graph_l1(&hull.graph, &c) {
                b.subset_c1.push(rep.distortion * hull.ratio_max);
            }
        }
    }
    Ok(b)
}

#[derive(Clone, Debug)]
pub struct StructureReport {
    pub t: usize,
    pub sigma: f64,
    pub a1_empty: bool,
    pub points: usize,
    /// `A1 ∪ A2 = Σ(H)` on the sample.
    pub cover: bool,
    /// Least distance between sampled points of `A1∖A2` and `A2∖A1`.
    pub gap: Option<f64>,
    pub gap_holds: Verdict,
    /// Distortion of `x ↦ (1/√2, x)` into `Cone(Σ(H), σ d)`.
    pub cone_distortion: f64,
    /// Largest `d_Σ(L)/d_Σ(H)` over sampled pairs in `A2`.
    pub a2_ratio: Option<f64>,
    pub a2_holds: Verdict,
    /// Hull distortion on `A1 ∩ V` and the sparse embedding distortion of the hull.
    pub hull_ratio: Option<f64>,
    pub a1_c1: Option<f64>,
}

/// `A1 = N_t(Φ)`, `A2 = Σ(H) ∖ N_{t/2}(Φ)` with `Φ` the deleted edges of
/// `surgery`; assertions are checked on `samples` random points plus all vertices.
pub fn structure_decomposition(
    h: &Multigraph,
    surgery: &SurgeryResult,
    samples: usize,
    trees: usize,
    seed: u64,
) -> Result<StructureReport> {
    let n = h.n();
    let t = surgery.t as f64;
    let metric = SimplicialMetric::new(h)?;
    let inst = h.edge_instances();
    let sigma = 2.0 * PI / surgery.girth as f64;
    let deleted: Vec<bool> = inst.iter().map(|e| surgery.removed.contains(e)).collect();
    let ends: Vec<usize> = surgery
        .removed
        .iter()
        .flat_map(|&(a, b)| [a as usize, b as usize])
        .collect();
    let to_phi = if ends.is_empty() {
        vec![INF; n]
    } else {
        h.bfs_multi(&ends)
    };
    let phi_distance = |p: SimplicialPoint| -> f64 {
        match p {
            SimplicialPoint::Vertex(v) => {
                let d = to_phi[v as usize];
                if d == INF {
                    f64::INFINITY
                } else {
                    d as f64
                }
            }
            SimplicialPoint::Edge { edge, offset } => {
                if deleted[edge as usize] {
                    return 0.0;
                }
                let (a, b) = inst[edge as usize];
                let x = offset as f64 / OFFSET_DEN as f64;
                let da = if to_phi[a as usize] == INF {
                    f64::INFINITY
                } else {
                    to_phi[a as usize] as f64
                };
                let db = if to_phi[b as usize] == INF {
                    f64::INFINITY
                } else {
                    to_phi[b as usize] as f64
                };
                (x + da).min(1.0 - x + db)
            }
        }
    };
    let mut rng = seeded(seed);
    let mut points: Vec<SimplicialPoint> = (0..n as u32).map(SimplicialPoint::Vertex).collect();
    for _ in 0..samples {
        let e = rng.gen_range(0..inst.len());
        points.push(SimplicialPoint::Edge {
            edge: e as u32,
            offset: rng.gen_range(1..OFFSET_DEN),
        });
    }
    let dphi: Vec<f64> = points.iter().map(|&p| phi_distance(p)).collect();
    let cover = dphi.iter().all(|&x| x <= t || x > t / 2.0);
    let only_a1: Vec<usize> = (0..points.len()).filter(|&i| dphi[i] <= t / 2.0).collect();
    let only_a2: Vec<usize> = (0..points.len()).filter(|&i| dphi[i] > t).collect();
    let in_a2: Vec<usize> = (0..points.len()).filter(|&i| dphi[i] > t / 2.0).collect();
    let mut gap: Option<f64> = None;
    for &i in &only_a1 {
        for &j in &only_a2 {
            let d = metric.distance(points[i], points[j]);
            gap = Some(gap.map_or(d, |g: f64| g.min(d)));
        }
    }
    let gap_holds = match gap {
        None => Verdict::Pass,
        Some(g) => Verdict::from_bool(g >= t / 2.0 - 1e-9),
    };
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let pairs = 4 * points.len();
    for _ in 0..pairs {
        let (i, j) = (
            rng.gen_range(0..points.len()),
            rng.gen_range(0..points.len()),
        );
        let d = metric.distance(points[i], points[j]);
        if d > 0.0 {
            let c = sqrt(1.0 - cos((sigma * d).min(PI)));
            lo = lo.min(c / d);
            hi = hi.max(c / d);
        }
    }
    let lmetric = SimplicialMetric::new(&surgery.graph).ok();
    let (mut a2_ratio, mut a2_holds) = (None, Verdict::Undetermined);
    if let Some(lm) = &lmetric {
        let linst: BTreeMap<(u32, u32), u32> = surgery
            .graph
            .edge_instances()
            .into_iter()
            .enumerate()
            .map(|(k, e)| (e, k as u32))
            .collect();
        let to_l = |p: SimplicialPoint| match p {
            SimplicialPoint::Vertex(v) => SimplicialPoint::Vertex(v),
            SimplicialPoint::Edge { edge, offset } => SimplicialPoint::Edge {
                edge: linst[&inst[edge as usize]],
                offset,
            },
        };
        let mut worst: f64 = 1.0;
        for _ in 0..pairs.min(in_a2.len() * in_a2.len()) {
            let (i, j) = (
                in_a2[rng.gen_range(0..in_a2.len())],
                in_a2[rng.gen_range(0..in_a2.len())],
            );
            let dg = metric.distance(points[i], points[j]);
            if dg > 0.0 {
                worst = worst.max(lm.distance(to_l(points[i]), to_l(points[j])) / dg);
            }
        }
        a2_ratio = Some(worst);
        a2_holds = Verdict::from_bool(worst <= 3.0 + 1e-9);
    }
    let (mut hull_ratio, mut a1_c1) = (None, None);
    if !ends.is_empty() {
        let s: Vec<u32> = (0..n as u32)
            .filter(|&v| to_phi[v as usize] as f64 <= t)
            .collect();
        let tset: Vec<u32> = {
            let mut v: Vec<u32> = ends.iter().map(|&x| x as u32).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        if let Ok(hull) = geodesic_hull(h, &s, &tset, surgery.t as u32, tset[0]) {
            hull_ratio = Some(hull.ratio_max);
            let dh = sparsity_delta(&hull.graph);
            if dh > 0.0 && dh < 1.0 / 3.0 && trees > 0 {
                let c = SparseL1Config {
                    delta: dh,
                    trees,
                    seed: child_seed(seed, 3),
                    random_pairs: 200,
                };
                if let Ok((_, rep)) = sparse_graph_l1(&hull.graph, &c) {
                    a1_c1 = Some(rep.distortion);
                }
            }
        }
    }
    Ok(StructureReport {
        t: surgery.t,
        sigma,
        a1_empty: surgery.removed.is_empty(),
        points: points.len(),
        cover,
        gap,
        gap_holds,
        cone_distortion: hi / lo,
        a2_ratio,
        a2_holds,
        hull_ratio,
        a1_c1,
    })
}

#[derive(Clone, Debug)]
pub struct KleinbergTrial {
    pub n: usize,
    /// `(1/n²) Σ_i Σ_j d_H(π(i), π(j))²`.
    pub lhs: f64,
    /// `(1/n) Σ_{ij ∈ E_G} d_H(π(i), π(j))²`.
    pub rhs: f64,
    pub pass: bool,
    /// Pairs at `d_H ≤ ln(n)/16`, against the bound `(3/2)n^{17/16}`.
    pub near_pairs: usize,
    pub near_bound: f64,
    pub edges_near: usize,
    /// `|E_G ∩ N_H| ≤ 4n/3`.
    pub counting_pass: bool,
}

fn edge_energy(g: &Multigraph, dh: &BfsMetrics, perm: &[u32]) -> f64 {
    let mut s = 0.0;
    for (a, b, m) in g.edge_list() {
        let d = dh.get(perm[a] as usize, perm[b] as usize) as f64;
        s += m as f64 * d * d;
    }
    s / g.n() as f64
}

fn trial_with(g: &Multigraph, dh: &BfsMetrics, perm: &[u32], c: f64) -> KleinbergTrial {
    let n = g.n();
    let mut total = 0.0;
    let radius = ln(n as f64) / 16.0;
    let mut near_pairs = 0;
    for i in 0..n {
        for j in 0..n {
            let d = dh.get(i, j) as f64;
            total += d * d;
            if i < j && d <= radius {
                near_pairs += 1;
            }
        }
    }
    let lhs = total / (n * n) as f64;
    let rhs = edge_energy(g, dh, perm);
    let edges_near = g
        .edge_list()
        .iter()
        .filter(|&&(a, b, _)| a != b && dh.get(perm[a] as usize, perm[b] as usize) as f64 <= radius)
        .map(|e| e.2 as usize)
        .sum();
    KleinbergTrial {
        n,
        lhs,
        rhs,
        pass: lhs <= c * rhs,
        near_pairs,
        near_bound: 1.5 * pow(n as f64, 17.0 / 16.0),
        edges_near,
        counting_pass: edges_near as f64 <= 4.0 * n as f64 / 3.0,
    }
}

/// Evaluates the permutation Poincaré inequality `LHS ≤ c·RHS` for `G`, `H`, `π`.
pub fn kleinberg_trial(
    g: &Multigraph,
    h: &Multigraph,
    perm: &[u32],
    c: f64,
) -> Result<KleinbergTrial> {
    if g.n() != h.n() || perm.len() != g.n() {
        return Err(Error::Precondition(
            "G, H and π must share the vertex count".into(),
        ));
    }
    let dh = h.bfs_metrics();
    if !dh.connected {
        return Err(Error::Disconnected);
    }
    Ok(trial_with(g, &dh, perm, c))
}

/// Random-swap descent on the edge side of the inequality.
pub fn adversarial_permutation(
    g: &Multigraph,
    dh: &BfsMetrics,
    sweeps: usize,
    seed: u64,
) -> Vec<u32> {
    let n = g.n();
    let mut rng = seeded(seed);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(&mut rng);
    let local = |perm: &[u32], v: usize| -> f64 {
        g.row(v)
            .map(|(w, m)| {
                m as f64
                    * pow(
                        dh.get(perm[v] as usize, perm[w as usize] as usize) as f64,
                        2.0,
                    )
            })
            .sum()
    };
    for _ in 0..sweeps * n {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b {
            continue;
        }
        let before = local(&perm, a) + local(&perm, b);
        perm.swap(a, b);
        let after = local(&perm, a) + local(&perm, b);
        if after > before {
            perm.swap(a, b);
        }
    }
    perm
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermMode {
    Random,
    Adversarial,
}

/// Independent uniform simple `d`-regular `G`, `H` per trial.
pub fn kleinberg_experiment(
    n: usize,
    d: usize,
    trials: usize,
    mode: PermMode,
    c: f64,
    seed: u64,
) -> Result<Vec<KleinbergTrial>> {
    let mut out = Vec::with_capacity(trials);
    for k in 0..trials as u64 {
        let s = child_seed(seed, k);
        let (g, _) = uniform_simple_sample(n, d, child_seed(s, 0), SIMPLE_TRIES)?;
        let (h, _) = uniform_simple_sample(n, d, child_seed(s, 1), SIMPLE_TRIES)?;
        let dh = h.bfs_metrics();
        if !dh.connected {
            continue;
        }
        let perm = match mode {
            PermMode::Random => {
                let mut p: Vec<u32> = (0..n as u32).collect();
                p.shuffle(&mut seeded(child_seed(s, 2)));
                p
            }
            PermMode::Adversarial => adversarial_permutation(&g, &dh, 20, child_seed(s, 2)),
        };
        out.push(trial_with(&g, &dh, &perm, c));
    }
    Ok(out)
}

/// `G = H`, `π = id`.
pub fn dependent_control(n: usize, d: usize, c: f64, seed: u64) -> Result<KleinbergTrial> {
    let (g, _) = uniform_simple_sample(n, d, seed, SIMPLE_TRIES)?;
    let perm: Vec<u32> = (0..n as u32).collect();
    kleinberg_trial(&g, &g, &perm, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_is_regular() {
        for seed in 0..20 {
            let g = pairing_sample(11, 4, seed).unwrap();
            g.validate(Some(4)).unwrap();
            assert!((0..11).all(|v| g.degree(v) == 4));
        }
        assert!(pairing_sample(5, 3, 0).is_err());
    }

    #[test]
    fn triple_edge_frequency() {
        let mut hits = 0;
        let mut rng = seeded(1);
        let trials = 20_000;
        for _ in 0..trials {
            let g = pairing(2, 3, &mut rng).unwrap();
            if g.mult(0, 1) == 3 {
                hits += 1;
            }
        }
        let p = hits as f64 / trials as f64;
        assert!((p - 0.4).abs() < 0.02, "{p}");
    }

    #[test]
    fn simple_samples() {
        let (g, tries) = uniform_simple_sample(50, 3, 4, SIMPLE_TRIES).unwrap();
        assert!(g.is_simple() && tries >= 1);
        assert!(uniform_simple_sample(3, 3, 0, 10).is_err());
    }

    #[test]
    fn sparsity_examples() {
        let tree = Multigraph::path(30);
        assert!(
            matches!(sparsity_check(&tree, 0.3, 0.1).unwrap(), Sparsity::Member { density } if density < 1.0)
        );
        let mut e: Vec<(usize, usize, u32)> = vec![
            (0, 1, 1),
            (0, 2, 1),
            (0, 3, 1),
            (1, 2, 1),
            (1, 3, 1),
            (2, 3, 1),
        ];
        for v in 3..199 {
            e.push((v, v + 1, 1));
        }
        let g = Multigraph::from_edges(200, &e).unwrap();
        match sparsity_check(&g, 0.3, 0.2).unwrap() {
            Sparsity::Violator { set, edges } => {
                assert_eq!(set, vec![0, 1, 2, 3]);
                assert_eq!(edges, 6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn surgery_examples() {
        let mut e = vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)];
        for v in 2..12 {
            e.push((v, v + 1, 1));
        }
        let g = Multigraph::from_edges(13, &e).unwrap();
        let s = cycle_surgery(&g, 4).unwrap();
        assert_eq!(s.removed, vec![(0, 1)]);
        assert!(s.girth >= 4);
        let tree = Multigraph::path(8);
        let s = cycle_surgery(&tree, 5).unwrap();
        assert!(s.removed.is_empty());
        assert_eq!(s.graph, tree.without_rotation());
        let two =
            Multigraph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)])
                .unwrap();
        assert!(cycle_surgery(&two, 4).is_err());
    }

    #[test]
    fn surgery_on_random_graphs() {
        let mut done = 0;
        for seed in 0..20 {
            let (g, _) = uniform_simple_sample(300, 3, seed, SIMPLE_TRIES).unwrap();
            if !g.is_connected() {
                continue;
            }
            let t = 6;
            let Ok(s) = cycle_surgery(&g, t) else {
                continue;
            };
            assert!(s.girth >= t);
            assert_eq!(s.removed.len(), s.cycles.len());
            let r = 2;
            let chk = surgery_diameter_check(&g, &s, r).unwrap();
            if chk.hypothesis {
                assert!(chk.holds, "{chk:?}");
            }
            done += 1;
        }
        assert!(done > 10);
    }

    #[test]
    fn expansion_after_surgery() {
        // A single short cycle in a small cubic graph.
        let (g, _) = uniform_simple_sample(16, 3, 8, SIMPLE_TRIES).unwrap();
        let t = g.girth() + 1;
        if let Ok(s) = cycle_surgery(&g, t) {
            if s.cycles.len() == 1 {
                let eg = edge_expansion_exact(&g).unwrap();
                let m = (1.0 / eg).ceil().max(3.0);
                let el = edge_expansion_exact(&s.graph).unwrap();
                assert!(el >= 1.0 / (4.0 * m));
            }
        }
        let p = Multigraph::path(20);
        assert!(edge_expansion_exact(&p).unwrap() <= 0.1 + 1e-12);
        assert!(sweep_expansion(&p, 10, 1) <= 0.2);
    }

    #[test]
    fn battery_smoke() {
        let (g, _) = uniform_simple_sample(200, 3, 3, SIMPLE_TRIES).unwrap();
        let b = l_class_battery(
            &g,
            &BatteryConfig {
                hull_samples: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(b.t_clamped && b.delta_clamped);
        assert_eq!(b.short_cycles, 0);
        assert!(b.expansion != Verdict::Fail);
        let p = Multigraph::path(60);
        let b = l_class_battery(&p, &BatteryConfig::default()).unwrap();
        assert_eq!(b.expansion, Verdict::Fail);
    }

    #[test]
    fn hull_examples() {
        let g = Multigraph::cycle(20);
        let s: Vec<u32> = vec![0, 3, 9, 14];
        let h = geodesic_hull(&g, &s, &s, 10, 0).unwrap();
        assert_eq!(h.ratio_max, 1.0);
        assert!(h.holds());
        let one = geodesic_hull(&g, &[5], &[5], 1, 0).unwrap();
        assert_eq!(one.set, (0..=8).collect::<Vec<u32>>());
        let (r, _) = uniform_simple_sample(120, 3, 5, SIMPLE_TRIES).unwrap();
        if r.is_connected() {
            let t: Vec<u32> = vec![0, 40, 80];
            let dist = r.bfs_multi(&[0, 40, 80]);
            let s: Vec<u32> = (0..120).filter(|&v| dist[v as usize] <= 2).collect();
            let h = geodesic_hull(&r, &s, &t, 2, 7).unwrap();
            assert!(h.holds(), "{h:?}");
        }
        assert!(geodesic_hull(&g, &[10], &[0], 2, 0).is_err());
    }

    #[test]
    fn structure_gadget() {
        // One triangle spliced into a random cubic graph.
        let (mut g, _) = uniform_simple_sample(200, 3, 12, SIMPLE_TRIES).unwrap();
        let mut seed = 13;
        while !g.is_connected() || g.girth() < 4 {
            g = uniform_simple_sample(200, 3, seed, SIMPLE_TRIES).unwrap().0;
            seed += 1;
        }
        // Replace vertex 0 by a triangle.
        let nb: Vec<u32> = g.row(0).map(|x| x.0).collect();
        let mut e: Vec<(usize, usize, u32)> = g
            .edge_list()
            .into_iter()
            .filter(|&(a, b, _)| a != 0 && b != 0)
            .collect();
        e.extend([(0, 200, 1), (200, 201, 1), (0, 201, 1)]);
        e.push((0, nb[0] as usize, 1));
        e.push((200, nb[1] as usize, 1));
        e.push((201, nb[2] as usize, 1));
        let h = Multigraph::from_edges(202, &e).unwrap();
        let s = cycle_surgery(&h, 4).unwrap();
        assert_eq!(s.removed.len(), 1);
        let rep = structure_decomposition(&h, &s, 200, 0, 4).unwrap();
        assert!(rep.cover);
        assert_eq!(rep.gap_holds, Verdict::Pass);
        assert_eq!(rep.a2_holds, Verdict::Pass);
        assert!(rep.hull_ratio.is_some());
        let clean = cycle_surgery(&g, 4).unwrap();
        let rep = structure_decomposition(&g, &clean, 50, 0, 4).unwrap();
        assert!(rep.a1_empty && rep.gap_holds == Verdict::Pass);
    }

    #[test]
    fn kleinberg_examples() {
        let (g, _) = uniform_simple_sample(128, 3, 2, SIMPLE_TRIES).unwrap();
        let id: Vec<u32> = (0..128).collect();
        if g.is_connected() {
            let t = kleinberg_trial(&g, &g, &id, 1.0).unwrap();
            assert!((t.rhs - 1.5).abs() < 1e-12);
            assert!(!t.pass);
            assert!(t.near_pairs as f64 <= t.near_bound);
        }
        let trials = kleinberg_experiment(64, 3, 5, PermMode::Random, 2.0, 9).unwrap();
        assert!(!trials.is_empty());
        let adv = kleinberg_experiment(64, 3, 3, PermMode::Adversarial, 2.0, 9).unwrap();
        let mean =
            |v: &[KleinbergTrial]| v.iter().map(|t| t.lhs / t.rhs).sum::<f64>() / v.len() as f64;
        assert!(mean(&adv) > mean(&trials));
    }
}
