//! Deterministic sparse pair sets whose edge average of squared distances
//! brackets the full pairwise average, built by collapsing a cubic expander
//! onto `n` contiguous buckets.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::math::{linear_fit, sqrt, t975};
use crate::multigraph::{BfsMetrics, Multigraph, INF};
use crate::randgraph::{uniform_simple_sample, SIMPLE_TRIES};
use crate::rng::{child_seed, seeded};
use crate::spectral::FiniteMetric;
use crate::{Error, Result};

/// Cubic graphs of increasing size with consecutive size ratio at most `ratio`.
#[derive(Clone, Debug)]
pub struct TemplateFamily {
    pub name: String,
    pub graphs: Vec<Multigraph>,
    pub ratio: f64,
}

impl TemplateFamily {
    pub fn new(name: &str, mut graphs: Vec<Multigraph>) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::Precondition("empty template family".into()));
        }
        for g in &graphs {
            g.validate(Some(3))?;
        }
        graphs.sort_by_key(|g| g.n());
        let ratio = graphs
            .windows(2)
            .map(|w| w[1].n() as f64 / w[0].n() as f64)
            .fold(1.0, f64::max);
        Ok(TemplateFamily {
            name: name.into(),
            graphs,
            ratio,
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.graphs.iter().map(|g| g.n()).collect()
    }
}

/// Connected simple cubic graphs on `2^lo, ..., 2^hi` vertices.
pub fn random_cubic_family(lo: u32, hi: u32, seed: u64) -> Result<TemplateFamily> {
    if lo < 2 || hi < lo {
        return Err(Error::Precondition(format!(
            "bad exponent range {lo}..={hi}"
        )));
    }
    let mut graphs = Vec::new();
    for k in lo..=hi {
        let mut s = child_seed(seed, k as u64);
        loop {
            let (g, _) = uniform_simple_sample(1 << k, 3, s, SIMPLE_TRIES)?;
            if g.is_connected() {
                graphs.push(g);
                break;
            }
            s = child_seed(s, 0);
        }
    }
    TemplateFamily::new(&format!("random-cubic-{seed}"), graphs)
}

#[derive(Clone, Debug)]
pub struct UniversalApproximator {
    pub n: usize,
    /// Collapsed multigraph on the `n` buckets; loops are pairs inside one bucket.
    pub graph: Multigraph,
    pub template: String,
    pub template_index: usize,
    pub template_size: usize,
    pub ratio: f64,
    /// Bucket `i` holds template vertices `starts[i]..starts[i+1]`.
    pub starts: Vec<usize>,
}

impl UniversalApproximator {
    /// `|E_n|`, counted with multiplicity.
    pub fn edge_count(&self) -> usize {
        self.graph.edge_list().iter().map(|e| e.2 as usize).sum()
    }

    pub fn edge_bound(&self) -> f64 {
        1.5 * self.ratio * self.n as f64
    }

    pub fn bucket_of(&self, v: usize) -> usize {
        self.starts.partition_point(|&s| s <= v) - 1
    }

    pub fn bucket_size(&self, i: usize) -> usize {
        self.starts[i + 1] - self.starts[i]
    }

    /// `4·max_i n|A_i|/N`; equals 4 when `n` divides `N`.
    pub fn trivial_bound(&self) -> f64 {
        let big = (0..self.n).map(|i| self.bucket_size(i)).max().unwrap_or(0);
        4.0 * (self.n * big) as f64 / self.template_size as f64
    }

    pub fn check(&self) -> Result<()> {
        let big = self.template_size;
        let lo = big / self.n;
        if self.starts.len() != self.n + 1 || self.starts[0] != 0 || self.starts[self.n] != big {
            return Err(Error::Precondition(
                "buckets do not cover the template".into(),
            ));
        }
        if let Some(i) = (0..self.n).find(|&i| !(lo..=lo + 1).contains(&self.bucket_size(i))) {
            return Err(Error::Precondition(format!(
                "bucket {i} has size {}",
                self.bucket_size(i)
            )));
        }
        if self.edge_count() as f64 > self.edge_bound() {
            return Err(Error::Precondition(format!(
                "|E_n| = {} exceeds {}",
                self.edge_count(),
                self.edge_bound()
            )));
        }
        Ok(())
    }
}

/// Collapses the smallest template with at least `n` vertices onto `n`
/// contiguous buckets.
pub fn build_universal(family: &TemplateFamily, n: usize) -> Result<UniversalApproximator> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let k = family
        .graphs
        .iter()
        .position(|g| g.n() >= n && g.n() as f64 <= family.ratio * n as f64)
        .ok_or_else(|| {
            Error::Precondition(format!("no template with {n} ≤ |V| ≤ {}·{n}", family.ratio))
        })?;
    let g = &family.graphs[k];
    let big = g.n();
    let (lo, extra) = (big / n, big % n);
    let mut starts = Vec::with_capacity(n + 1);
    let mut bucket = vec![0u32; big];
    let mut at = 0;
    for i in 0..n {
        starts.push(at);
        let size = lo + usize::from(i < extra);
        bucket[at..at + size].iter_mut().for_each(|b| *b = i as u32);
        at += size;
    }
    starts.push(big);
    let edges: Vec<(usize, usize, u32)> = g
        .edge_list()
        .into_iter()
        .map(|(a, b, m)| (bucket[a] as usize, bucket[b] as usize, m))
        .collect();
    let u = UniversalApproximator {
        n,
        graph: Multigraph::from_edges(n, &edges)?,
        template: family.name.clone(),
        template_index: k,
        template_size: big,
        ratio: family.ratio,
        starts,
    };
    u.check()?;
    Ok(u)
}

/// Symmetric distances with zero diagonal.
pub trait Distances {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn distance(&self, i: usize, j: usize) -> f64;
}

impl Distances for FiniteMetric {
    fn len(&self) -> usize {
        FiniteMetric::len(self)
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

/// Hop distances between a tuple of vertices of a graph.
pub struct TupleMetric<'a> {
    pub metrics: &'a BfsMetrics,
    pub tuple: &'a [u32],
}

impl Distances for TupleMetric<'_> {
    fn len(&self) -> usize {
        self.tuple.len()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        let d = self
            .metrics
            .get(self.tuple[i] as usize, self.tuple[j] as usize);
        if d == INF {
            f64::INFINITY
        } else {
            d as f64
        }
    }
}

/// Counts every query.
pub struct DistanceOracle<'a> {
    source: &'a dyn Distances,
    calls: Cell<u64>,
}

impl<'a> DistanceOracle<'a> {
    pub fn new(source: &'a dyn Distances) -> Self {
        DistanceOracle {
            source,
            calls: Cell::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }

    pub fn query(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.len();
        if i >= n || j >= n {
            return Err(Error::Precondition(format!(
                "query ({i},{j}) outside {n} points"
            )));
        }
        self.calls.set(self.calls.get() + 1);
        let d = self.source.distance(i, j);
        if !d.is_finite() {
            return Err(Error::Precondition(format!(
                "distance ({i},{j}) is not finite"
            )));
        }
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub queries: u64,
}

/// `(1/|E_n|) Σ_{E_n} d(x_i, x_j)²`, one query per unit of multiplicity.
pub fn estimate_avg_sq(u: &UniversalApproximator, oracle: &DistanceOracle) -> Result<Estimate> {
    if oracle.len() < u.n {
        return Err(Error::Precondition(format!(
            "oracle has {} points, need {}",
            oracle.len(),
            u.n
        )));
    }
    let before = oracle.calls();
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, j, m) in u.graph.edge_list() {
        for _ in 0..m {
            let d = oracle.query(i, j)?;
            sum += d * d;
        }
        count += m as usize;
    }
    Ok(Estimate {
        value: if count == 0 { 0.0 } else { sum / count as f64 },
        queries: oracle.calls() - before,
    })
}

/// `(1/n²) Σ_i Σ_j d(x_i, x_j)²` over all ordered pairs.
pub fn exact_avg_sq(oracle: &DistanceOracle, n: usize) -> Result<f64> {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = oracle.query(i, j)?;
            sum += d * d;
        }
    }
    Ok(sum / (n * n) as f64)
}

/// Mean of `d²` over `pairs` uniform ordered pairs, with its standard error.
pub fn sampling_baseline(
    oracle: &DistanceOracle,
    n: usize,
    pairs: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if pairs == 0 || n == 0 {
        return Err(Error::Precondition("need at least one pair".into()));
    }
    let mut rng = seeded(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..pairs {
        let d = oracle.query(rng.gen_range(0..n), rng.gen_range(0..n))?;
        s += d * d;
        s2 += d * d * d * d;
    }
    let p = pairs as f64;
    let mean = s / p;
    let var = if pairs > 1 {
        (s2 - p * mean * mean).max(0.0) / (p - 1.0)
    } else {
        0.0
    };
    Ok((mean, sqrt(var / p)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TupleMode {
    Uniform,
    /// Points drawn from a few BFS balls.
    Clustered,
}

impl TupleMode {
    pub fn name(self) -> &'static str {
        match self {
            TupleMode::Uniform => "uniform",
            TupleMode::Clustered => "clustered",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub trial: usize,
    pub m: usize,
    pub n: usize,
    pub exact: f64,
    pub estimate: f64,
    /// `exact / estimate`.
    pub ratio: f64,
    pub queries: u64,
    pub tuple_mode: TupleMode,
}

#[derive(Clone, Copy, Debug)]
pub struct RatioConfig {
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: TupleMode,
}

fn draw_tuple(
    metrics: &BfsMetrics,
    n: usize,
    mode: TupleMode,
    rng: &mut crate::rng::Rng,
) -> Vec<u32> {
    let m = metrics.n;
    match mode {
        TupleMode::Uniform => {
            let mut all: Vec<u32> = (0..m as u32).collect();
            all.shuffle(rng);
            all.truncate(n);
            all
        }
        TupleMode::Clustered => {
            let centres: Vec<usize> = (0..4).map(|_| rng.gen_range(0..m)).collect();
            let balls: Vec<Vec<u32>> = centres
                .iter()
                .map(|&c| {
                    (0..m as u32)
                        .filter(|&v| metrics.get(c, v as usize) <= 2)
                        .collect()
                })
                .collect();
            (0..n)
                .map(|_| {
                    let b = &balls[rng.gen_range(0..balls.len())];
                    b[rng.gen_range(0..b.len())]
                })
                .collect()
        }
    }
}

/// Samples `H` uniformly from simple `d`-regular graphs on `m` vertices per
/// trial and compares the estimate on `U_n` with the exact average.
pub fn ratio_experiment(cfg: &RatioConfig, family: &TemplateFamily) -> Result<Vec<RatioRow>> {
    if cfg.m < cfg.n || cfg.d < 3 {
        return Err(Error::Precondition(format!(
            "need m ≥ n and d ≥ 3, got m={} n={} d={}",
            cfg.m, cfg.n, cfg.d
        )));
    }
    let u = build_universal(family, cfg.n)?;
    let mut rows = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let s = child_seed(cfg.seed, trial as u64);
        let mut k = 0;
        let metrics = loop {
            let (h, _) = uniform_simple_sample(cfg.m, cfg.d, child_seed(s, k), SIMPLE_TRIES)?;
            let b = h.bfs_metrics();
            if b.connected {
                break b;
            }
            k += 1;
        };
        let mut rng = seeded(child_seed(s, 1 << 32));
        let tuple = draw_tuple(&metrics, cfg.n, cfg.mode, &mut rng);
        let tm = TupleMetric {
            metrics: &metrics,
            tuple: &tuple,
        };
        let oracle = DistanceOracle::new(&tm);
        let est = estimate_avg_sq(&u, &oracle)?;
        let exact = exact_avg_sq(&oracle, cfg.n)?;
        rows.push(RatioRow {
            trial,
            m: cfg.m,
            n: cfg.n,
            exact,
            estimate: est.value,
            ratio: if est.value > 0.0 {
                exact / est.value
            } else {
                f64::INFINITY
            },
            queries: est.queries,
            tuple_mode: cfg.mode,
        });
    }
    Ok(rows)
}

/// Ratio spread `max/min`, and the rescaling `√(max·min)` that centres it.
pub fn spread(rows: &[RatioRow]) -> (f64, f64) {
    let hi = rows
        .iter()
        .map(|r| r.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    (hi / lo, sqrt(hi * lo))
}

#[derive(Clone, Copy, Debug)]
pub struct SlopeTest {
    pub slope: f64,
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
}

impl SlopeTest {
    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }
}

/// Regresses the spread of consecutive batches of `batch` trials against `m`.
pub fn spread_slope(runs: &[Vec<RatioRow>], batch: usize) -> Result<SlopeTest> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for rows in runs {
        for b in rows.chunks(batch.max(2)) {
            if b.len() >= 2 {
                x.push(b[0].m as f64);
                y.push(spread(b).0);
            }
        }
    }
    if x.len() < 3 {
        return Err(Error::Precondition(
            "too few batches for a regression".into(),
        ));
    }
    let (slope, _, se) = linear_fit(&x, &y);
    let w = t975(x.len() - 2) * se;
    Ok(SlopeTest {
        slope,
        se,
        lo: slope - w,
        hi: slope + w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family() -> TemplateFamily {
        random_cubic_family(3, 9, 7).unwrap()
    }

    #[test]
    fn singleton_and_halved_buckets() {
        let f = family();
        let g = &f.graphs[2];
        let u = build_universal(&f, g.n()).unwrap();
        assert_eq!(u.graph, g.clone().without_rotation());
        let single = TemplateFamily::new("one", vec![g.clone()]).unwrap();
        let h = build_universal(
            &TemplateFamily {
                ratio: 2.0,
                ..single
            },
            g.n() / 2,
        )
        .unwrap();
        assert!((0..h.n).all(|i| h.bucket_size(i) == 2));
        assert_eq!(h.edge_count(), g.edge_count());
        assert_eq!(h.trivial_bound(), 4.0);
    }

    #[test]
    fn bucket_sizes_and_edge_bound() {
        let f = family();
        for n in [5, 17, 100, 255, 256, 257, 300, 511] {
            let u = build_universal(&f, n).unwrap();
            u.check().unwrap();
            assert!(u.edge_count() as f64 <= 1.5 * f.ratio * n as f64);
            assert_eq!(u.bucket_of(u.starts[n - 1]), n - 1);
        }
        assert!(build_universal(&f, 2000).is_err());
        assert!(build_universal(&f, 2).is_err());
    }

    #[test]
    fn identical_points_and_two_points() {
        let f = family();
        let u = build_universal(&f, 20).unwrap();
        let zero = FiniteMetric::from_fn(20, |_, _| 0.0);
        let o = DistanceOracle::new(&zero);
        let e = estimate_avg_sq(&u, &o).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.queries as usize, u.edge_count());
        assert_eq!(exact_avg_sq(&o, 20).unwrap(), 0.0);
        assert_eq!(sampling_baseline(&o, 20, 100, 1).unwrap().0, 0.0);
        let two = FiniteMetric::line(&[0.0, 1.0]);
        let o = DistanceOracle::new(&two);
        assert_eq!(exact_avg_sq(&o, 2).unwrap(), 0.5);
        assert_eq!(o.calls(), 4);
    }

    #[test]
    fn projection_identity() {
        let f = family();
        let u = build_universal(&f, 37).unwrap();
        let g = &f.graphs[u.template_index];
        let pts: Vec<f64> = (0..37).map(|i| ((i * 7919) % 37) as f64 * 0.3).collect();
        let x = FiniteMetric::line(&pts);
        let lifted: f64 = g
            .edge_list()
            .iter()
            .map(|&(a, b, m)| m as f64 * crate::math::sq(pts[u.bucket_of(a)] - pts[u.bucket_of(b)]))
            .sum();
        let est = estimate_avg_sq(&u, &DistanceOracle::new(&x)).unwrap();
        assert!((est.value * u.edge_count() as f64 - lifted).abs() < 1e-9 * lifted);
    }

    #[test]
    fn complete_graph_degenerate() {
        let f = family();
        for n in [8, 20, 64] {
            let u = build_universal(&f, n).unwrap();
            let x = FiniteMetric::from_fn(n, |_, _| 1.0);
            let o = DistanceOracle::new(&x);
            let r = exact_avg_sq(&o, n).unwrap() / estimate_avg_sq(&u, &o).unwrap().value;
            assert!((0.25..=4.0).contains(&r), "{r}");
        }
    }

    #[test]
    fn baseline_concentrates() {
        let pts: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        let x = FiniteMetric::line(&pts);
        let o = DistanceOracle::new(&x);
        let exact = exact_avg_sq(&o, 30).unwrap();
        let (m, se) = sampling_baseline(&o, 30, 900, 3).unwrap();
        assert!((m - exact).abs() <= 3.0 * se, "{m} {exact} {se}");
    }

    #[test]
    fn experiment_rows() {
        let f = family();
        for mode in [TupleMode::Uniform, TupleMode::Clustered] {
            let cfg = RatioConfig {
                m: 200,
                d: 3,
                n: 32,
                trials: 6,
                seed: 4,
                mode,
            };
            let rows = ratio_experiment(&cfg, &f).unwrap();
            assert_eq!(rows.len(), 6);
            let u = build_universal(&f, 32).unwrap();
            for r in &rows {
                assert!(r.estimate / r.exact <= u.trivial_bound() + 1e-12);
                assert_eq!(r.queries as usize, u.edge_count());
            }
        }
        let bad = RatioConfig {
            m: 10,
            d: 3,
            n: 32,
            trials: 1,
            seed: 0,
            mode: TupleMode::Uniform,
        };
        assert!(ratio_experiment(&bad, &f).is_err());
    }
}
