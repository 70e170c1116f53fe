//! Explicit embeddings: Walsh truncation of `L1`, `Cone(L1) → L1`, snowflaked
//! cones into `L2`, tree metrics into `L1`, and the sparse-graph pipeline
//! (quotient by short cycles, spanning-tree measures, averaged truncated
//! tree metrics).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::conegeom::{cone_distance, ConePoint};
use crate::flow::densest_subgraph;
use crate::linalg::{sym_eigen, Dense};
use crate::math::{abs, ceil, exp, floor, ln, pow, sq, sqrt, E, PI};
use crate::multigraph::{
    Multigraph, SimplicialMetric, SimplicialPoint, INF, MAX_CYCLE_THRESHOLD, OFFSET_DEN,
};
use crate::rng::{child_seed, seeded};
use crate::spectral::FiniteMetric;
use crate::{Error, Result};

/// Largest cube dimension for explicit Walsh coordinates (`2^k` per point).
pub const WALSH_LIMIT: usize = 16;

/// Largest grid code accepted by [`truncate_l1`].
pub const GRID_LIMIT: f64 = 4_503_599_627_370_496.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

/// A finite list of vectors in `L1` or `L2`.
#[derive(Clone, Debug)]
pub struct Vectors {
    pub norm: Norm,
    pub rows: Vec<Vec<f64>>,
}

impl Vectors {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn norm_of(&self, i: usize) -> f64 {
        norm_diff(self.norm, &self.rows[i], None)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        norm_diff(self.norm, &self.rows[i], Some(&self.rows[j]))
    }
}

fn norm_diff(kind: Norm, a: &[f64], b: Option<&[f64]>) -> f64 {
    let it = a
        .iter()
        .enumerate()
        .map(|(k, &x)| x - b.map_or(0.0, |b| b[k]));
    match kind {
        Norm::L1 => it.map(abs).sum(),
        Norm::L2 => sqrt(it.map(sq).sum()),
    }
}

/// `M(1 − e^{−h/M})`.
#[inline]
pub fn walsh_distance(h: f64, m: f64) -> f64 {
    m * (1.0 - exp(-h / m))
}

/// `Φ^k_M` on points of `{0,1}^k` given as bit masks.
pub fn walsh_truncation(points: &[u32], k: usize, m: f64) -> Result<Vectors> {
    if k > WALSH_LIMIT {
        return Err(Error::Budget(format!(
            "cube dimension {k} above {WALSH_LIMIT}"
        )));
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Precondition(format!(
            "threshold {m} must be positive"
        )));
    }
    let size = 1usize << k;
    if let Some(&z) = points.iter().find(|&&z| z as usize >= size) {
        return Err(Error::Precondition(format!(
            "point {z:#b} outside the {k}-cube"
        )));
    }
    let lambda = (1.0 + exp(-1.0 / m)) / 2.0;
    let coef: Vec<f64> = (0..=k)
        .map(|j| m * pow(lambda, (k - j) as f64) * pow(1.0 - lambda, j as f64))
        .collect();
    let rows = points
        .iter()
        .map(|&z| {
            (0..size as u32)
                .map(|a| {
                    let c = coef[a.count_ones() as usize];
                    if (a & z).count_ones() % 2 == 1 {
                        -c
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();
    Ok(Vectors {
        norm: Norm::L1,
        rows,
    })
}

/// Grid discretisation followed by Walsh truncation, kept implicit: distances
/// come from the grid codes and explicit coordinates are only produced for
/// small cubes.
#[derive(Clone, Debug)]
pub struct TruncatedL1 {
    pub m: f64,
    pub eps: f64,
    /// Grid resolution.
    pub q: f64,
    /// Codes are divided by this before truncation.
    pub scale: f64,
    pub cube_dim: u64,
    codes: Vec<Vec<u64>>,
}

pub fn truncate_l1(points: &[Vec<f64>], m: f64, eps: f64) -> Result<TruncatedL1> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("ε = {eps} outside (0,1)")));
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Precondition(format!(
            "threshold {m} must be positive"
        )));
    }
    let dim = points.first().map_or(0, |p| p.len());
    for p in points {
        if p.len() != dim || p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Precondition(
                "points must be finite and of equal dimension".into(),
            ));
        }
    }
    let mut dmin = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            let d: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| abs(a - b))
                .sum();
            if d > 0.0 {
                dmin = dmin.min(d);
            }
        }
    }
    let (q, scale) = if dmin.is_finite() {
        let q = (2.0 + eps) * dim as f64 / (eps * dmin);
        (q, q + dim as f64 / dmin)
    } else {
        (1.0, 1.0)
    };
    let lo: Vec<f64> = (0..dim)
        .map(|i| points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let mut codes = Vec::with_capacity(points.len());
    let mut top = vec![0u64; dim];
    for p in points {
        let mut row = Vec::with_capacity(dim);
        for i in 0..dim {
            let c = floor(q * (p[i] - lo[i]));
            if c > GRID_LIMIT {
                return Err(Error::Budget(
                    "grid codes exceed 2^52; coarsen ε or rescale".into(),
                ));
            }
            row.push(c as u64);
            top[i] = top[i].max(c as u64);
        }
        codes.push(row);
    }
    let cube_dim = top.iter().try_fold(0u64, |a, &b| a.checked_add(b));
    let cube_dim = cube_dim.ok_or_else(|| Error::Budget("cube dimension overflows".into()))?;
    Ok(TruncatedL1 {
        m,
        eps,
        q,
        scale,
        cube_dim,
        codes,
    })
}

impl TruncatedL1 {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Hamming distance between the cube images.
    pub fn hamming(&self, i: usize, j: usize) -> u64 {
        self.codes[i]
            .iter()
            .zip(&self.codes[j])
            .map(|(&a, &b)| a.abs_diff(b))
            .sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        walsh_distance(self.hamming(i, j) as f64 / self.scale, self.m)
    }

    /// `‖s·T(x_i) − t·T(x_j)‖₁`.
    pub fn scaled_distance(&self, s: f64, i: usize, t: f64, j: usize) -> f64 {
        let d = self.distance(i, j);
        abs(s - t) * (self.m - d / 2.0) + (s + t) * d / 2.0
    }

    /// Explicit coordinates when the cube has at most [`WALSH_LIMIT`] dimensions.
    pub fn coordinates(&self) -> Option<Vectors> {
        if self.cube_dim > WALSH_LIMIT as u64 {
            return None;
        }
        let dim = self.codes.first().map_or(0, |c| c.len());
        let top: Vec<u64> = (0..dim)
            .map(|i| self.codes.iter().map(|c| c[i]).max().unwrap_or(0))
            .collect();
        let masks: Vec<u32> = self
            .codes
            .iter()
            .map(|c| {
                let mut z = 0u32;
                let mut off = 0;
                for i in 0..dim {
                    for b in 0..c[i] {
                        z |= 1 << (off + b);
                    }
                    off += top[i];
                }
                z
            })
            .collect();
        let mut v = walsh_truncation(&masks, self.cube_dim as usize, self.scale * self.m).ok()?;
        for row in &mut v.rows {
            for x in row.iter_mut() {
                *x /= self.scale;
            }
        }
        Some(v)
    }
}

/// `π√5/2`.
pub fn cone_l1_upper() -> f64 {
    PI * sqrt(5.0) / 2.0
}

/// `π(e−1)/√(4π²e²+(e−1)²) / (1+ε)`.
pub fn cone_l1_lower(eps: f64) -> f64 {
    PI * (E - 1.0) / sqrt(4.0 * PI * PI * E * E + sq(E - 1.0)) / (1.0 + eps)
}

/// `F(s, x) = s·T_π(x)` on finitely many cone points over `L1`.
#[derive(Clone, Debug)]
pub struct ConeL1Embedding {
    pub trunc: TruncatedL1,
    pub radii: Vec<f64>,
    pub bases: Vec<Vec<f64>>,
}

pub fn cone_l1_embed(points: &[(f64, Vec<f64>)], eps: f64) -> Result<ConeL1Embedding> {
    if let Some(p) = points.iter().find(|p| !(p.0 >= 0.0) || !p.0.is_finite()) {
        return Err(Error::Precondition(format!(
            "radius {} is not finite and nonnegative",
            p.0
        )));
    }
    let bases: Vec<Vec<f64>> = points.iter().map(|p| p.1.clone()).collect();
    let trunc = truncate_l1(&bases, PI, eps)?;
    Ok(ConeL1Embedding {
        trunc,
        radii: points.iter().map(|p| p.0).collect(),
        bases,
    })
}

#[derive(Clone, Debug)]
pub struct ConeL1Report {
    pub pairs: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub distortion: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ConeL1Report {
    pub fn within_bounds(&self) -> bool {
        self.ratio_min >= self.lower * (1.0 - 1e-12) && self.ratio_max <= self.upper * (1.0 + 1e-12)
    }
}

impl ConeL1Embedding {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.trunc
            .scaled_distance(self.radii[i], i, self.radii[j], j)
    }

    pub fn cone_distance(&self, i: usize, j: usize) -> f64 {
        let (s, t) = (self.radii[i], self.radii[j]);
        if s == 0.0 || t == 0.0 {
            return s + t;
        }
        let dx: f64 = self.bases[i]
            .iter()
            .zip(&self.bases[j])
            .map(|(a, b)| abs(a - b))
            .sum();
        crate::conegeom::cone_formula(s, t, dx)
    }

    pub fn coordinates(&self) -> Option<Vectors> {
        let mut v = self.trunc.coordinates()?;
        for (row, &s) in v.rows.iter_mut().zip(&self.radii) {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        Some(v)
    }

    /// Ratios `‖F(p) − F(q)‖₁ / d_cone(p, q)` over the given index pairs.
    pub fn report(&self, pairs: &[(usize, usize)]) -> ConeL1Report {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let mut count = 0;
        for &(i, j) in pairs {
            let d = self.cone_distance(i, j);
            if d > 0.0 {
                let r = self.distance(i, j) / d;
                lo = lo.min(r);
                hi = hi.max(r);
                count += 1;
            }
        }
        ConeL1Report {
            pairs: count,
            ratio_min: lo,
            ratio_max: hi,
            distortion: hi / lo,
            lower: cone_l1_lower(self.trunc.eps),
            upper: cone_l1_upper(),
        }
    }
}

/// Rows of a PSD root of `k`; fails when an eigenvalue is below `−1e−9`
/// relative to the largest.
pub fn gram_root(k: &Dense) -> Result<Vec<Vec<f64>>> {
    let eig = sym_eigen(k);
    let top = eig.values.first().copied().unwrap_or(0.0).max(1.0);
    if let Some(&low) = eig.values.last() {
        if low < -1e-9 * top {
            return Err(Error::Precondition(format!(
                "Gram matrix indefinite: eigenvalue {low}"
            )));
        }
    }
    let keep: Vec<usize> = (0..k.n).filter(|&j| eig.values[j] > 1e-15 * top).collect();
    Ok((0..k.n)
        .map(|i| {
            keep.iter()
                .map(|&j| eig.vectors.get(i, j) * sqrt(eig.values[j]))
                .collect()
        })
        .collect())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("α = {alpha} outside (0,1]")))
    }
}

/// Vectors with `‖h(s) − h(t)‖₂ = |s − t|^α` and `h(0) = 0`.
pub fn helix(points: &[f64], alpha: f64) -> Result<Vectors> {
    check_alpha(alpha)?;
    let n = points.len();
    let p = |x: f64| pow(abs(x), 2.0 * alpha);
    let mut k = Dense::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let (s, t) = (points[i], points[j]);
            k.set(i, j, (p(s) + p(t) - p(s - t)) / 2.0);
        }
    }
    Ok(Vectors {
        norm: Norm::L2,
        rows: gram_root(&k)?,
    })
}

/// Gaussian-kernel truncation: `‖τ(x)‖₂ = π^α/√2` and
/// `‖τ(x) − τ(y)‖₂² = π^{2α}(1 − e^{−‖x−y‖²/π^{2α}})`.
pub fn tau_gaussian(points: &[Vec<f64>], alpha: f64) -> Result<Vectors> {
    check_alpha(alpha)?;
    let n = points.len();
    let c = pow(PI, 2.0 * alpha);
    let mut k = Dense::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let d2: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| sq(a - b))
                .sum();
            k.set(i, j, c / 2.0 * exp(-d2 / c));
        }
    }
    Ok(Vectors {
        norm: Norm::L2,
        rows: gram_root(&k)?,
    })
}

pub fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// `π^α (2^{2α/(1−α)} + 1)^{1−α} / 2^{α+1/2}`, continued to `α = 1`.
pub fn snowflake_upper(alpha: f64) -> f64 {
    let e = if alpha >= 1.0 {
        2.0 * alpha
    } else {
        let a = 2.0 * alpha / (1.0 - alpha);
        2.0 * alpha + (1.0 - alpha) * ln(1.0 + pow(2.0, -a)) / ln(2.0)
    };
    pow(PI, alpha) * pow(2.0, e) / pow(2.0, alpha + 0.5)
}

/// `√min{1, π^{2α}eD²/((e−1)3^α)} / (D (2e/(e−1))^{α/2})`.
pub fn snowflake_lower(alpha: f64, d: f64) -> f64 {
    let c = pow(PI, 2.0 * alpha) * E * d * d / ((E - 1.0) * pow(3.0, alpha));
    sqrt(c.min(1.0)) / (d * pow(2.0 * E / (E - 1.0), alpha / 2.0))
}

#[derive(Clone, Debug)]
pub struct SnowflakeEmbedding {
    pub vectors: Vectors,
    pub pairs: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub distortion: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `φ(s, x) = h_α(s) ⊗ τ_α(f(x))` on finitely many cone points; `f[x]` is an
/// `L2` image of base point `x` with `d^α/D ≤ ‖f(x) − f(y)‖₂ ≤ d^α`.
pub fn snowflake_cone_embed(
    x: &FiniteMetric,
    f: &[Vec<f64>],
    d: f64,
    alpha: f64,
    points: &[ConePoint],
) -> Result<SnowflakeEmbedding> {
    check_alpha(alpha)?;
    if f.len() != x.len() {
        return Err(Error::Precondition(
            "one image per base point required".into(),
        ));
    }
    if !(d >= 1.0) {
        return Err(Error::Precondition(format!(
            "distortion certificate {d} below 1"
        )));
    }
    for i in 0..x.len() {
        for j in 0..i {
            let a = pow(x.get(i, j), alpha);
            let b = sqrt(f[i].iter().zip(&f[j]).map(|(u, v)| sq(u - v)).sum());
            if b > a * (1.0 + 1e-9) + 1e-12 || b < a / d * (1.0 - 1e-9) - 1e-12 {
                return Err(Error::Precondition(format!(
                    "certificate fails on base pair ({i}, {j})"
                )));
            }
        }
    }
    let mut radii: Vec<f64> = points.iter().map(|p| p.s).collect();
    radii.push(0.0);
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    radii.dedup();
    let h = helix(&radii, alpha)?;
    let tau = tau_gaussian(f, alpha)?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let r = radii
                .binary_search_by(|a| a.partial_cmp(&p.s).unwrap())
                .unwrap();
            kron(&h.rows[r], &tau.rows[p.base.min(f.len() - 1)])
        })
        .collect();
    let vectors = Vectors {
        norm: Norm::L2,
        rows,
    };
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut count = 0;
    for i in 0..points.len() {
        for j in 0..i {
            let dc = cone_distance(x, points[i], points[j])?;
            if dc > 0.0 {
                let r = vectors.distance(i, j) / pow(dc, alpha);
                lo = lo.min(r);
                hi = hi.max(r);
                count += 1;
            }
        }
    }
    Ok(SnowflakeEmbedding {
        vectors,
        pairs: count,
        ratio_min: lo,
        ratio_max: hi,
        distortion: hi / lo,
        lower: snowflake_lower(alpha, d),
        upper: snowflake_upper(alpha),
    })
}

/// Root-side edge coordinates of a tree: isometric for the hop metric.
pub fn tree_l1_embed(tree: &Multigraph) -> Result<Vectors> {
    let n = tree.n();
    if !tree.is_simple() || tree.edge_count() + 1 != n || !tree.is_connected() {
        return Err(Error::Precondition("input is not a tree".into()));
    }
    let (parent, order) = bfs_tree(tree, 0);
    let mut index = vec![usize::MAX; n];
    for (k, &v) in order[1..].iter().enumerate() {
        index[v as usize] = k;
    }
    let mut rows = vec![vec![0.0; n - 1]; n];
    for &v in &order[1..] {
        let p = parent[v as usize] as usize;
        let mut row = rows[p].clone();
        row[index[v as usize]] = 1.0;
        rows[v as usize] = row;
    }
    Ok(Vectors {
        norm: Norm::L1,
        rows,
    })
}

fn bfs_tree(g: &Multigraph, root: usize) -> (Vec<u32>, Vec<u32>) {
    let mut parent = vec![INF; g.n()];
    let mut order = vec![root as u32];
    parent[root] = root as u32;
    let mut head = 0;
    while head < order.len() {
        let u = order[head] as usize;
        head += 1;
        for (v, _) in g.row(u) {
            if parent[v as usize] == INF {
                parent[v as usize] = u as u32;
                order.push(v);
            }
        }
    }
    (parent, order)
}

struct Dsu(Vec<u32>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n as u32).collect())
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            let p = self.0[self.0[x as usize] as usize];
            self.0[x as usize] = p;
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.0[a as usize] = b;
        true
    }
}

/// One spanning tree, stored by the host edges it leaves out.
#[derive(Clone, Debug)]
pub struct WeightedTree {
    pub cotree: Vec<u32>,
    pub weight: f64,
}

/// A finite probability measure on spanning trees of a host graph whose edge
/// instances are `edges`.
#[derive(Clone, Debug)]
pub struct SpanningTreeDistribution {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    pub trees: Vec<WeightedTree>,
}

impl SpanningTreeDistribution {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.trees.iter().map(|t| t.weight).sum()
    }

    pub fn in_tree(&self, k: usize) -> Vec<bool> {
        let mut v = vec![true; self.edges.len()];
        for &e in &self.trees[k].cotree {
            v[e as usize] = false;
        }
        v
    }

    /// `μ{T : e ∈ T}` for every edge, as weighted indicator sums.
    pub fn marginals(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.edges.len()];
        for k in 0..self.trees.len() {
            let w = self.trees[k].weight;
            for (e, inside) in self.in_tree(k).into_iter().enumerate() {
                if inside {
                    m[e] += w;
                }
            }
        }
        m
    }

    /// Positive weights summing to 1 and every tree spanning and acyclic.
    pub fn validate(&self) -> Result<()> {
        if abs(self.weight_sum() - 1.0) > 1e-12 {
            return Err(Error::Precondition(format!(
                "weights sum to {}",
                self.weight_sum()
            )));
        }
        for k in 0..self.trees.len() {
            if !(self.trees[k].weight > 0.0) {
                return Err(Error::Precondition(format!(
                    "tree {k} has weight {}",
                    self.trees[k].weight
                )));
            }
            let mut dsu = Dsu::new(self.n);
            let mut used = 0;
            for (e, inside) in self.in_tree(k).into_iter().enumerate() {
                if inside {
                    let (a, b) = self.edges[e];
                    if !dsu.union(a, b) {
                        return Err(Error::Precondition(format!("tree {k} contains a cycle")));
                    }
                    used += 1;
                }
            }
            if used + 1 != self.n.max(1) {
                return Err(Error::Precondition(format!("tree {k} is not spanning")));
            }
        }
        Ok(())
    }

    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> usize {
        let mut u: f64 = rng.gen::<f64>() * self.weight_sum();
        for (k, t) in self.trees.iter().enumerate() {
            if u < t.weight {
                return k;
            }
            u -= t.weight;
        }
        self.trees.len() - 1
    }
}

/// Host edges along a chain, and whether the chain is broken in each column.
struct Chain {
    edges: Vec<u32>,
    excluded: Vec<bool>,
}

/// Lays the columns out on `[0, 1)` and, inside every column that breaks a
/// chain of length `ℓ`, drops its `i`-th edge while the excluded mass seen so
/// far lies in `[iπ/ℓ, (i+1)π/ℓ)`. Each chain edge is then dropped with
/// probability exactly `π/ℓ`.
fn expand(
    n: usize,
    edges: Vec<(u32, u32)>,
    weights: &[f64],
    chains: &[Chain],
) -> SpanningTreeDistribution {
    let pi: Vec<f64> = chains
        .iter()
        .map(|c| {
            c.excluded
                .iter()
                .zip(weights)
                .filter(|x| *x.0)
                .map(|x| x.1)
                .sum()
        })
        .collect();
    let mut seen = vec![0.0; chains.len()];
    let mut trees = Vec::new();
    let mut x = 0.0;
    for (col, &w) in weights.iter().enumerate() {
        let mut cuts = vec![0.0, w];
        for (c, chain) in chains.iter().enumerate() {
            if chain.excluded[col] {
                let l = chain.edges.len() as f64;
                let step = pi[c] / l;
                let first = floor(seen[c] / step) as usize + 1;
                for i in first..chain.edges.len() {
                    let y = i as f64 * step - seen[c];
                    if y >= w {
                        break;
                    }
                    if y > 0.0 {
                        cuts.push(y);
                    }
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        for win in cuts.windows(2) {
            let (a, b) = (win[0], win[1]);
            if b - a <= 0.0 {
                continue;
            }
            let mid = (a + b) / 2.0;
            let mut cotree = Vec::new();
            for (c, chain) in chains.iter().enumerate() {
                if chain.excluded[col] {
                    let l = chain.edges.len();
                    let i = floor((seen[c] + mid) * l as f64 / pi[c]) as usize;
                    cotree.push(chain.edges[i.min(l - 1)]);
                }
            }
            cotree.sort_unstable();
            trees.push(WeightedTree {
                cotree,
                weight: b - a,
            });
        }
        for (c, chain) in chains.iter().enumerate() {
            if chain.excluded[col] {
                seen[c] += w;
            }
        }
        x += w;
    }
    let _ = x;
    SpanningTreeDistribution { n, edges, trees }
}

/// Paths of the 2-core between branch vertices. Edges outside the core are
/// bridges of pendant trees.
struct Kernel {
    nk: usize,
    ends: Vec<(usize, usize)>,
    paths: Vec<Vec<u32>>,
}

fn kernel(n: usize, edges: &[(u32, u32)]) -> Kernel {
    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a as usize].push((b, e as u32));
        adj[b as usize].push((a, e as u32));
    }
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut gone = vec![false; edges.len()];
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    while let Some(v) = stack.pop() {
        if deg[v] != 1 {
            continue;
        }
        if let Some(&(u, e)) = adj[v].iter().find(|x| !gone[x.1 as usize]) {
            gone[e as usize] = true;
            deg[v] = 0;
            deg[u as usize] -= 1;
            if deg[u as usize] == 1 {
                stack.push(u as usize);
            }
        }
    }
    let mut kid = vec![usize::MAX; n];
    let mut nk = 0;
    for v in 0..n {
        if deg[v] >= 3 {
            kid[v] = nk;
            nk += 1;
        }
    }
    if nk == 0 {
        if let Some(v) = (0..n).find(|&v| deg[v] == 2) {
            kid[v] = 0;
            nk = 1;
        }
    }
    let mut used = gone.clone();
    let mut ends = Vec::new();
    let mut paths = Vec::new();
    for v in 0..n {
        if kid[v] == usize::MAX {
            continue;
        }
        for &(first, e0) in &adj[v] {
            if used[e0 as usize] {
                continue;
            }
            used[e0 as usize] = true;
            let mut path = vec![e0];
            let (mut cur, mut last) = (first as usize, e0);
            while kid[cur] == usize::MAX {
                let &(next, e) = adj[cur]
                    .iter()
                    .find(|x| !gone[x.1 as usize] && x.1 != last)
                    .unwrap();
                used[e as usize] = true;
                path.push(e);
                last = e;
                cur = next as usize;
            }
            ends.push((kid[v], kid[cur]));
            paths.push(path);
        }
    }
    Kernel { nk, ends, paths }
}

/// Maximum-weight spanning tree of the kernel (loops never used).
fn kruskal(nk: usize, ends: &[(usize, usize)], w: &[f64]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..ends.len()).collect();
    order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
    let mut dsu = Dsu::new(nk);
    let mut pick = vec![false; ends.len()];
    for e in order {
        if dsu.union(ends[e].0 as u32, ends[e].1 as u32) {
            pick[e] = true;
        }
    }
    pick
}

const LP_TOL: f64 = 1e-9;
const LP_ITERATIONS: usize = 200_000;

/// `max θ` subject to `Σ_T λ_T 1[P ∈ T] ≥ θ r_P`, `Σ λ ≤ 1`, `θ ≤ 2`, over
/// kernel spanning trees generated by max-weight pricing. Returns `θ` and
/// the trees with positive weight.
type Columns = Vec<(Vec<bool>, f64)>;

fn cover_lp(nk: usize, ends: &[(usize, usize)], r: &[f64]) -> Result<(f64, Columns)> {
    let rows: Vec<usize> = (0..ends.len())
        .filter(|&p| r[p] > 0.0 && ends[p].0 != ends[p].1)
        .collect();
    let m1 = rows.len();
    let m = m1 + 2;
    // Columns: 0 = θ, 1..=m slacks, then trees.
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut theta = vec![0.0; m];
    for (i, &p) in rows.iter().enumerate() {
        theta[i] = r[p];
    }
    theta[m1 + 1] = 1.0;
    cols.push(theta);
    for i in 0..m {
        let mut c = vec![0.0; m];
        c[i] = 1.0;
        cols.push(c);
    }
    let mut trees: Vec<Vec<bool>> = Vec::new();
    let mut known: BTreeSet<Vec<bool>> = BTreeSet::new();
    let tree_col = |t: &[bool]| {
        let mut c = vec![0.0; m];
        for (i, &p) in rows.iter().enumerate() {
            if t[p] {
                c[i] = -1.0;
            }
        }
        c[m1] = 1.0;
        c
    };
    let mut binv = vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut basis: Vec<usize> = (1..=m).collect();
    let mut xb = vec![0.0; m];
    xb[m1] = 1.0;
    xb[m1 + 1] = 2.0;
    for _ in 0..LP_ITERATIONS {
        let y: Vec<f64> = (0..m)
            .map(|j| {
                (0..m)
                    .filter(|&i| basis[i] == 0)
                    .map(|i| binv[i * m + j])
                    .sum()
            })
            .collect();
        let reduced = |c: usize, col: &[f64]| {
            (if c == 0 { 1.0 } else { 0.0 }) - col.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()
        };
        let mut enter =
            (0..cols.len()).find(|&c| !basis.contains(&c) && reduced(c, &cols[c]) > LP_TOL);
        if enter.is_none() {
            let mut w = vec![0.0; ends.len()];
            for (i, &p) in rows.iter().enumerate() {
                w[p] = y[i];
            }
            let t = kruskal(nk, ends, &w);
            let col = tree_col(&t);
            if reduced(usize::MAX, &col) > LP_TOL && known.insert(t.clone()) {
                trees.push(t);
                cols.push(col);
                enter = Some(cols.len() - 1);
            }
        }
        let Some(c) = enter else {
            let mut out = Vec::new();
            let mut th = 0.0;
            for (i, &b) in basis.iter().enumerate() {
                if b == 0 {
                    th = xb[i];
                } else if b > m && xb[i] > 0.0 {
                    out.push((trees[b - m - 1].clone(), xb[i]));
                }
            }
            return Ok((th, out));
        };
        let u: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|j| binv[i * m + j] * cols[c][j]).sum())
            .collect();
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if u[i] > LP_TOL {
                let ratio = xb[i] / u[i];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let rl = xb[l] / u[l];
                        if ratio < rl - 1e-12 || (ratio <= rl + 1e-12 && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let l = leave.ok_or_else(|| Error::Precondition("covering program unbounded".into()))?;
        let piv = u[l];
        for j in 0..m {
            binv[l * m + j] /= piv;
        }
        xb[l] /= piv;
        for i in 0..m {
            if i != l && u[i] != 0.0 {
                let f = u[i];
                for j in 0..m {
                    binv[i * m + j] -= f * binv[l * m + j];
                }
                xb[i] -= f * xb[l];
            }
        }
        basis[l] = c;
    }
    Err(Error::Budget(format!(
        "covering program exceeded {LP_ITERATIONS} pivots"
    )))
}

fn tree_measure_target(g: &Multigraph, p: f64) -> Result<SpanningTreeDistribution> {
    let n = g.n();
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if (0..n).any(|v| g.loops(v) > 0) {
        return Err(Error::Infeasible("a loop lies in no spanning tree".into()));
    }
    let edges = g.edge_instances();
    let k = kernel(n, &edges);
    let r: Vec<f64> = k
        .paths
        .iter()
        .map(|path| 1.0 - path.len() as f64 * (1.0 - p))
        .collect();
    for (e, &(a, b)) in k.ends.iter().enumerate() {
        if a == b && r[e] > 1e-12 {
            return Err(Error::Infeasible(format!(
                "cycle of length {} cannot reach marginal {p}",
                k.paths[e].len()
            )));
        }
    }
    let columns: Vec<(Vec<bool>, f64)> = if k.paths.is_empty() {
        vec![(Vec::new(), 1.0)]
    } else {
        let (theta, mut cols) = cover_lp(k.nk, &k.ends, &r)?;
        if theta < 1.0 - LP_TOL {
            return Err(Error::Infeasible(format!(
                "no tree measure reaches marginal {p} (best scale {theta})"
            )));
        }
        if cols.is_empty() {
            cols.push((kruskal(k.nk, &k.ends, &vec![0.0; k.ends.len()]), 1.0));
        }
        let total: f64 = cols.iter().map(|c| c.1).sum();
        if total < 1.0 {
            cols[0].1 += 1.0 - total;
        } else {
            for c in &mut cols {
                c.1 /= total;
            }
        }
        cols
    };
    let weights: Vec<f64> = columns.iter().map(|c| c.1).collect();
    let chains: Vec<Chain> = k
        .paths
        .iter()
        .enumerate()
        .map(|(e, path)| Chain {
            edges: path.clone(),
            excluded: columns.iter().map(|c| !c.0[e]).collect(),
        })
        .collect();
    let dist = expand(n, edges, &weights, &chains);
    let low = dist.marginals().into_iter().fold(1.0, f64::min);
    if low < p - LP_TOL {
        return Err(Error::Infeasible(format!(
            "decomposition reached marginal {low} < {p}"
        )));
    }
    Ok(dist)
}

/// A measure on spanning trees with every edge marginal at least `1/(1+δ)`.
pub fn tree_polytope_measure(g: &Multigraph, delta: f64) -> Result<SpanningTreeDistribution> {
    if !(delta >= 0.0) {
        return Err(Error::Precondition(format!(
            "δ = {delta} must be nonnegative"
        )));
    }
    tree_measure_target(g, 1.0 / (1.0 + delta))
}

/// `G / 𝔠_t(G)`: every cycle with fewer than `t` vertices contracted to a vertex.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub graph: Multigraph,
    /// Quotient vertex of every host vertex.
    pub vertex_map: Vec<u32>,
    /// Short cycles in cyclic order.
    pub cycles: Vec<Vec<u32>>,
    /// Host edge instances of each short cycle, `i`-th joining vertices `i` and `i+1`.
    pub cycle_edges: Vec<Vec<u32>>,
    /// Host edge instance behind every quotient edge instance.
    pub edge_origin: Vec<u32>,
    /// Smallest quotient distance between two contracted cycles.
    pub min_cycle_distance: Option<u32>,
}

/// Shortest cycle through each edge, used when `t` is too large for
/// exhaustive enumeration.
pub(crate) fn shortest_cycles(g: &Multigraph, t: usize) -> Vec<Vec<u32>> {
    let n = g.n();
    let mut covered = BTreeSet::new();
    let mut found = BTreeSet::new();
    let mut dist = vec![INF; n];
    let mut parent = vec![INF; n];
    for (u, v) in g.edge_instances() {
        if covered.contains(&(u, v)) {
            continue;
        }
        let mut touched = vec![u];
        dist[u as usize] = 0;
        let mut queue = alloc::collections::VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            if x == v || dist[x as usize] as usize + 2 >= t {
                continue;
            }
            for (y, _) in g.row(x as usize) {
                if (x == u && y == v) || dist[y as usize] != INF {
                    continue;
                }
                dist[y as usize] = dist[x as usize] + 1;
                parent[y as usize] = x;
                touched.push(y);
                queue.push_back(y);
            }
        }
        if dist[v as usize] != INF && (dist[v as usize] as usize) + 1 < t {
            let mut cyc = vec![v];
            let mut x = v;
            while x != u {
                x = parent[x as usize];
                cyc.push(x);
            }
            let cyc = normalise_cycle(cyc);
            for i in 0..cyc.len() {
                let (a, b) = (cyc[i], cyc[(i + 1) % cyc.len()]);
                covered.insert((a.min(b), a.max(b)));
            }
            found.insert(cyc);
        }
        for x in touched {
            dist[x as usize] = INF;
        }
    }
    found.into_iter().collect()
}

fn normalise_cycle(mut c: Vec<u32>) -> Vec<u32> {
    let k = c.len();
    let i = (0..k).min_by_key(|&i| c[i]).unwrap();
    c.rotate_left(i);
    if k > 2 && c[k - 1] < c[1] {
        c[1..].reverse();
    }
    c
}

/// Multi-source BFS from labelled sources; the least `d(u) + d(v) + 1` over
/// edges joining different labels. `skip` removes edges from the search.
pub(crate) fn closest_labels(
    g: &Multigraph,
    sources: &[(u32, u32)],
    skip: impl Fn(u32, u32) -> bool,
) -> Option<u32> {
    let n = g.n();
    let mut dist = vec![INF; n];
    let mut label = vec![INF; n];
    let mut queue = alloc::collections::VecDeque::new();
    for &(v, l) in sources {
        dist[v as usize] = 0;
        label[v as usize] = l;
        queue.push_back(v);
    }
    while let Some(x) = queue.pop_front() {
        for (y, _) in g.row(x as usize) {
            if !skip(x, y) && dist[y as usize] == INF {
                dist[y as usize] = dist[x as usize] + 1;
                label[y as usize] = label[x as usize];
                queue.push_back(y);
            }
        }
    }
    let mut best: Option<u32> = None;
    for x in 0..n {
        for (y, _) in g.row(x) {
            let (x32, y) = (x as u32, y);
            if x32 < y
                && !skip(x32, y)
                && label[x] != INF
                && label[y as usize] != INF
                && label[x] != label[y as usize]
            {
                let d = dist[x] + dist[y as usize] + 1;
                best = Some(best.map_or(d, |b: u32| b.min(d)));
            }
        }
    }
    best
}

pub fn quotient_graph(g: &Multigraph, t: f64) -> Result<Quotient> {
    if !g.is_simple() {
        return Err(Error::Precondition("quotient needs a simple graph".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if !(t >= 1.0) {
        return Err(Error::Precondition(format!("cycle threshold {t} below 1")));
    }
    let n = g.n();
    let tc = if t > 1e9 {
        usize::MAX / 2
    } else {
        ceil(t) as usize
    };
    let cycles: Vec<Vec<u32>> = if tc <= MAX_CYCLE_THRESHOLD {
        let cs = g.short_cycles(tc)?;
        if let Some(c) = cs.iter().find(|c| !c.induced) {
            return Err(Error::Precondition(format!(
                "short cycle {:?} is not induced",
                c.vertices
            )));
        }
        cs.into_iter().map(|c| c.vertices).collect()
    } else {
        let cs = shortest_cycles(g, tc.min(n + 1));
        for c in &cs {
            if g.induced_edge_count(c) != c.len() {
                return Err(Error::Precondition(format!(
                    "short cycle {c:?} is not induced"
                )));
            }
        }
        cs
    };
    let mut owner = vec![INF; n];
    for (i, c) in cycles.iter().enumerate() {
        for &v in c {
            if owner[v as usize] != INF {
                return Err(Error::Precondition(format!(
                    "short cycles overlap at vertex {v}"
                )));
            }
            owner[v as usize] = i as u32;
        }
    }
    for (i, c) in cycles.iter().enumerate() {
        let i = i as u32;
        let src: Vec<(u32, u32)> = c.iter().map(|&v| (v, v)).collect();
        let ear = closest_labels(g, &src, |a, b| {
            owner[a as usize] == i && owner[b as usize] == i
        });
        if let Some(l) = ear {
            if l as f64 <= t + 1.0 {
                return Err(Error::Precondition(format!(
                    "short cycle {c:?} has a chord path of length {l}"
                )));
            }
        }
    }
    let off: Vec<u32> = (0..n as u32)
        .filter(|&v| owner[v as usize] == INF)
        .collect();
    let mut vertex_map = vec![0u32; n];
    for (k, &v) in off.iter().enumerate() {
        vertex_map[v as usize] = k as u32;
    }
    for v in 0..n {
        if owner[v] != INF {
            vertex_map[v] = off.len() as u32 + owner[v];
        }
    }
    let nq = off.len() + cycles.len();
    let inst = g.edge_instances();
    let mut origin = BTreeMap::new();
    let mut edge_id = BTreeMap::new();
    for (e, &(a, b)) in inst.iter().enumerate() {
        edge_id.insert((a, b), e as u32);
        let (oa, ob) = (owner[a as usize], owner[b as usize]);
        if oa != INF && oa == ob {
            continue;
        }
        if oa != INF && ob != INF {
            return Err(Error::Precondition(format!(
                "short cycles {oa} and {ob} are adjacent"
            )));
        }
        let (qa, qb) = (vertex_map[a as usize], vertex_map[b as usize]);
        if origin.insert((qa.min(qb), qa.max(qb)), e as u32).is_some() {
            return Err(Error::Precondition(format!(
                "vertex joined twice to one short cycle near edge ({a}, {b})"
            )));
        }
    }
    let qedges: Vec<(usize, usize, u32)> = origin
        .keys()
        .map(|&(a, b)| (a as usize, b as usize, 1))
        .collect();
    let graph = Multigraph::from_edges(nq, &qedges)?;
    let edge_origin: Vec<u32> = graph.edge_instances().iter().map(|k| origin[k]).collect();
    let gamma: usize = cycles.iter().map(|c| c.len()).sum();
    if graph.n() != n - gamma + cycles.len() || graph.edge_count() != inst.len() - gamma {
        return Err(Error::Precondition("quotient size identities fail".into()));
    }
    let cycle_edges = cycles
        .iter()
        .map(|c| {
            (0..c.len())
                .map(|i| {
                    let (a, b) = (c[i], c[(i + 1) % c.len()]);
                    edge_id[&(a.min(b), a.max(b))]
                })
                .collect()
        })
        .collect();
    let src: Vec<(u32, u32)> = (0..cycles.len() as u32)
        .map(|i| (off.len() as u32 + i, i))
        .collect();
    let min_cycle_distance = closest_labels(&graph, &src, |_, _| false);
    if let Some(d) = min_cycle_distance {
        if d as f64 <= t + 1.0 {
            return Err(Error::Precondition(format!(
                "two short cycles at quotient distance {d} ≤ t + 1"
            )));
        }
    }
    Ok(Quotient {
        graph,
        vertex_map,
        cycles,
        cycle_edges,
        edge_origin,
        min_cycle_distance,
    })
}

/// Spanning trees of `G` that keep all but one edge of every short cycle.
#[derive(Clone, Debug)]
pub struct GoodTreeMeasure {
    pub t: f64,
    pub delta: f64,
    pub quotient: Quotient,
    pub measure: SpanningTreeDistribution,
}

impl GoodTreeMeasure {
    /// `(worst slack off Γ, worst slack on Γ)` of the marginal bounds
    /// `(1−3δ)/(1+δ)` and `(|C|−1)/|C|`; both nonnegative when they hold.
    pub fn marginal_slack(&self) -> (f64, f64) {
        let marg = self.measure.marginals();
        let mut on = vec![0usize; marg.len()];
        for c in &self.quotient.cycle_edges {
            for &e in c {
                on[e as usize] = c.len();
            }
        }
        let base = (1.0 - 3.0 * self.delta) / (1.0 + self.delta);
        let mut off_slack = f64::INFINITY;
        let mut on_slack = f64::INFINITY;
        for (e, &m) in marg.iter().enumerate() {
            if on[e] == 0 {
                off_slack = off_slack.min(m - base);
            } else {
                on_slack = on_slack.min(m - (on[e] - 1) as f64 / on[e] as f64);
            }
        }
        (off_slack, on_slack)
    }
}

pub fn good_tree_measure(g: &Multigraph, t: f64, delta: f64) -> Result<GoodTreeMeasure> {
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return Err(Error::Precondition(format!("δ = {delta} outside (0, 1/3)")));
    }
    let quotient = quotient_graph(g, t)?;
    let sigma = tree_measure_target(&quotient.graph, (1.0 - 3.0 * delta) / (1.0 + delta))?;
    let weights: Vec<f64> = sigma.trees.iter().map(|t| t.weight).collect();
    let mut chains: Vec<Chain> = quotient
        .edge_origin
        .iter()
        .enumerate()
        .map(|(qe, &he)| Chain {
            edges: vec![he],
            excluded: sigma
                .trees
                .iter()
                .map(|t| t.cotree.binary_search(&(qe as u32)).is_ok())
                .collect(),
        })
        .collect();
    for c in &quotient.cycle_edges {
        chains.push(Chain {
            edges: c.clone(),
            excluded: vec![true; weights.len()],
        });
    }
    let measure = expand(g.n(), g.edge_instances(), &weights, &chains);
    Ok(GoodTreeMeasure {
        t,
        delta,
        quotient,
        measure,
    })
}

/// Vertices through which a point leaves its edge, with the length to each.
type Exits = [Option<(u32, f64)>; 2];

/// A sampled tree of `Σ(G)`: a spanning tree of `G` with every other edge
/// split into two dangling intervals at a uniform point.
#[derive(Clone, Debug)]
struct SigmaTree {
    depth: Vec<u32>,
    up: Vec<Vec<u32>>,
    tin: Vec<u32>,
    tout: Vec<u32>,
    in_tree: Vec<bool>,
}

impl SigmaTree {
    fn new(n: usize, inst: &[(u32, u32)], in_tree: Vec<bool>) -> Self {
        let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for (e, &(a, b)) in inst.iter().enumerate() {
            if in_tree[e] {
                adj[a as usize].push((b, e as u32));
                adj[b as usize].push((a, e as u32));
            }
        }
        let mut depth = vec![0u32; n];
        let mut parent = vec![0u32; n];
        let mut tin = vec![0u32; n];
        let mut tout = vec![0u32; n];
        let mut clock = 0;
        let mut stack = vec![(0u32, 0usize)];
        let mut seen = vec![false; n];
        seen[0] = true;
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            if *k == 0 {
                tin[v as usize] = clock;
                clock += 1;
            }
            if let Some(&(w, _)) = adj[v as usize].get(*k) {
                *k += 1;
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    parent[w as usize] = v;
                    depth[w as usize] = depth[v as usize] + 1;
                    stack.push((w, 0));
                }
            } else {
                tout[v as usize] = clock;
                stack.pop();
            }
        }
        let mut up = vec![parent];
        while (1usize << up.len()) < n {
            let prev = up.last().unwrap();
            let next = (0..n).map(|v| prev[prev[v] as usize]).collect();
            up.push(next);
        }
        SigmaTree {
            depth,
            up,
            tin,
            tout,
            in_tree,
        }
    }

    fn is_ancestor(&self, a: u32, b: u32) -> bool {
        self.tin[a as usize] <= self.tin[b as usize]
            && self.tout[b as usize] <= self.tout[a as usize]
    }

    fn hop(&self, a: u32, b: u32) -> u32 {
        let mut x = a;
        if !self.is_ancestor(x, b) {
            for lvl in self.up.iter().rev() {
                let y = lvl[x as usize];
                if !self.is_ancestor(y, b) {
                    x = y;
                }
            }
            x = self.up[0][x as usize];
        }
        self.depth[a as usize] + self.depth[b as usize] - 2 * self.depth[x as usize]
    }

    /// Outcomes of the uniform cut point for `p`: probability and the
    /// vertices through which `p` leaves its edge.
    fn outcomes(&self, inst: &[(u32, u32)], p: SimplicialPoint) -> [(f64, Exits); 2] {
        match p {
            SimplicialPoint::Vertex(v) => [(1.0, [Some((v, 0.0)), None]), (0.0, [None, None])],
            SimplicialPoint::Edge { edge, offset } => {
                let (a, b) = inst[edge as usize];
                let t = offset as f64 / OFFSET_DEN as f64;
                if self.in_tree[edge as usize] {
                    [
                        (1.0, [Some((a, t)), Some((b, 1.0 - t))]),
                        (0.0, [None, None]),
                    ]
                } else {
                    [
                        (1.0 - t, [Some((a, t)), None]),
                        (t, [Some((b, 1.0 - t)), None]),
                    ]
                }
            }
        }
    }

    fn through(&self, x: &Exits, y: &Exits) -> f64 {
        let mut best = f64::INFINITY;
        for &(a, s) in x.iter().flatten() {
            for &(b, t) in y.iter().flatten() {
                best = best.min(s + self.hop(a, b) as f64 + t);
            }
        }
        best
    }

    /// `E f(d_T(p, q))` over independent uniform cut points of the non-tree edges.
    fn expect(
        &self,
        inst: &[(u32, u32)],
        p: SimplicialPoint,
        q: SimplicialPoint,
        f: impl Fn(f64) -> f64,
    ) -> f64 {
        if p == q {
            return f(0.0);
        }
        if let (
            SimplicialPoint::Edge { edge: e, offset: x },
            SimplicialPoint::Edge { edge: g, offset: y },
        ) = (p, q)
        {
            if e == g {
                let (a, b) = inst[e as usize];
                let (lo, hi) = (
                    x.min(y) as f64 / OFFSET_DEN as f64,
                    x.max(y) as f64 / OFFSET_DEN as f64,
                );
                let around = lo + self.hop(a, b) as f64 + 1.0 - hi;
                if self.in_tree[e as usize] {
                    return f((hi - lo).min(around));
                }
                // Apart only when the cut falls between them.
                return (1.0 - (hi - lo)) * f(hi - lo) + (hi - lo) * f(around);
            }
        }
        let mut sum = 0.0;
        for (pp, x) in self.outcomes(inst, p) {
            for (pq, y) in self.outcomes(inst, q) {
                if pp > 0.0 && pq > 0.0 {
                    sum += pp * pq * f(self.through(&x, &y));
                }
            }
        }
        sum
    }
}

/// The averaged truncated tree embedding of `Σ(G)`.
#[derive(Clone, Debug)]
pub struct SparseL1Embedding {
    pub diam: f64,
    pub delta: f64,
    inst: Vec<(u32, u32)>,
    trees: Vec<SigmaTree>,
}

impl SparseL1Embedding {
    pub fn trees(&self) -> usize {
        self.trees.len()
    }

    /// Mean of `d_T(p, q)` over the cut points of tree `k`.
    pub fn tree_distance(&self, k: usize, p: SimplicialPoint, q: SimplicialPoint) -> f64 {
        self.trees[k].expect(&self.inst, p, q, |d| d)
    }

    /// `(1/N) Σ_T M(1 − e^{−d_T/M})` with `M = diam(G)`.
    pub fn distance(&self, p: SimplicialPoint, q: SimplicialPoint) -> f64 {
        let s: f64 = self
            .trees
            .iter()
            .map(|t| t.expect(&self.inst, p, q, |d| walsh_distance(d, self.diam)))
            .sum();
        s / self.trees.len() as f64
    }

    /// `(1/N) Σ_T min{d_T, diam}`.
    pub fn mean_truncated(&self, p: SimplicialPoint, q: SimplicialPoint) -> f64 {
        let s: f64 = self
            .trees
            .iter()
            .map(|t| t.expect(&self.inst, p, q, |d| d.min(self.diam)))
            .sum();
        s / self.trees.len() as f64
    }

    /// Tree-edge coordinates of the vertices before truncation, one block per
    /// sampled tree scaled by `1/N`; block `k` column `v − 1` is the edge from
    /// the `v`-th non-root vertex to its parent.
    pub fn vertex_coordinates(&self) -> Vec<Vec<f64>> {
        let n = self.trees.first().map_or(0, |t| t.depth.len());
        let w = 1.0 / self.trees.len() as f64;
        let mut rows = vec![Vec::with_capacity(self.trees.len() * n.saturating_sub(1)); n];
        for t in &self.trees {
            for (v, row) in rows.iter_mut().enumerate() {
                for c in 1..n as u32 {
                    row.push(if t.is_ancestor(c, v as u32) { w } else { 0.0 });
                }
            }
        }
        rows
    }
}

#[derive(Clone, Debug)]
pub struct SparseL1Report {
    pub n: usize,
    pub edges: usize,
    pub delta: f64,
    pub diam: f64,
    pub trees: usize,
    pub measure_size: usize,
    pub short_cycles: usize,
    pub pairs: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub distortion: f64,
    /// `distortion / (1 + δ·diam)`.
    pub constant: f64,
    /// `max mean min{d_T, diam} / d_Σ`, divided by `1 + δ·diam`.
    pub expectation_constant: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SparseL1Config {
    pub delta: f64,
    pub trees: usize,
    pub seed: u64,
    /// Random point pairs certified on top of the per-edge pairs.
    pub random_pairs: usize,
}

/// Samples `trees` good trees, cuts every non-tree edge at a uniform point
/// (integrated exactly), embeds and
/// certifies on all vertices plus one random point per edge.
pub fn sparse_graph_l1(
    g: &Multigraph,
    cfg: &SparseL1Config,
) -> Result<(SparseL1Embedding, SparseL1Report)> {
    if cfg.trees == 0 {
        return Err(Error::Precondition("at least one tree is needed".into()));
    }
    let metric = SimplicialMetric::new(g)?;
    let delta = cfg.delta;
    let good = good_tree_measure(g, 1.0 / (3.0 * delta), delta)?;
    let diam = metric.metrics().diameter.max(1) as f64;
    let inst = g.edge_instances();
    let n = g.n();
    let mut rng = seeded(cfg.seed);
    let mut trees = Vec::with_capacity(cfg.trees);
    for _ in 0..cfg.trees {
        let k = good.measure.sample(&mut rng);
        trees.push(SigmaTree::new(n, &inst, good.measure.in_tree(k)));
    }
    let emb = SparseL1Embedding {
        diam,
        delta,
        inst: inst.clone(),
        trees,
    };
    let mut prng = seeded(child_seed(cfg.seed, 1));
    let mut points: Vec<SimplicialPoint> = (0..n as u32).map(SimplicialPoint::Vertex).collect();
    let mut pairs = Vec::new();
    for (e, &(a, b)) in inst.iter().enumerate() {
        let p = SimplicialPoint::Edge {
            edge: e as u32,
            offset: prng.gen_range(1..OFFSET_DEN),
        };
        points.push(p);
        pairs.push((p, SimplicialPoint::Vertex(a)));
        pairs.push((p, SimplicialPoint::Vertex(b)));
        pairs.push((SimplicialPoint::Vertex(a), SimplicialPoint::Vertex(b)));
    }
    for _ in 0..cfg.random_pairs {
        let i = prng.gen_range(0..points.len());
        let j = prng.gen_range(0..points.len());
        if i != j {
            pairs.push((points[i], points[j]));
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut expect: f64 = 0.0;
    for &(p, q) in &pairs {
        let d = metric.distance(p, q);
        if d > 0.0 {
            let r = emb.distance(p, q) / d;
            lo = lo.min(r);
            hi = hi.max(r);
            expect = expect.max(emb.mean_truncated(p, q) / d);
        }
    }
    let scale = 1.0 + delta * diam;
    let report = SparseL1Report {
        n,
        edges: inst.len(),
        delta,
        diam,
        trees: cfg.trees,
        measure_size: good.measure.len(),
        short_cycles: good.quotient.cycles.len(),
        pairs: pairs.len(),
        ratio_min: lo,
        ratio_max: hi,
        distortion: hi / lo,
        constant: hi / lo / scale,
        expectation_constant: expect / scale,
    };
    Ok((emb, report))
}

/// `max_S |E(S)|/|S| − 1` by exact densest-subgraph search.
pub fn sparsity_delta(g: &Multigraph) -> f64 {
    let (num, den, _) = densest_subgraph(g.n(), &g.edge_list());
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64 - 1.0
    }
}

/// Random recursive tree on `n` vertices plus `chords` extra edges, each
/// joining vertices at tree distance at least `span`.
pub fn random_sparse_instance(n: usize, chords: usize, span: u32, seed: u64) -> Result<Multigraph> {
    if n < 2 {
        return Err(Error::Precondition("need at least two vertices".into()));
    }
    let mut rng = seeded(seed);
    let mut edges: Vec<(usize, usize, u32)> = (1..n).map(|v| (rng.gen_range(0..v), v, 1)).collect();
    let tree = Multigraph::from_edges(n, &edges)?;
    let mut have: BTreeSet<(usize, usize)> = edges.iter().map(|e| (e.0, e.1)).collect();
    let mut added = 0;
    let mut tries = 0;
    while added < chords {
        tries += 1;
        if tries > 1000 * (chords + 1) {
            return Err(Error::Budget(format!(
                "placed only {added} of {chords} chords"
            )));
        }
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let key = (a.min(b), a.max(b));
        if a == b || have.contains(&key) || tree.bfs(a)[b] < span {
            continue;
        }
        have.insert(key);
        edges.push((key.0, key.1, 1));
        added += 1;
    }
    Multigraph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng_points(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = seeded(seed);
        (0..count)
            .map(|_| (0..dim).map(|_| r.gen_range(-3.0..3.0)).collect())
            .collect()
    }

    #[test]
    fn walsh_closed_form() {
        let k = 6;
        let pts: Vec<u32> = (0..1u32 << k).collect();
        let m = 2.5;
        let v = walsh_truncation(&pts, k, m).unwrap();
        for i in 0..pts.len() {
            assert!(abs(v.norm_of(i) - m) < 1e-10);
            for j in 0..i {
                let h = (pts[i] ^ pts[j]).count_ones() as f64;
                assert!(abs(v.distance(i, j) - walsh_distance(h, m)) < 1e-10);
            }
        }
        let one = walsh_truncation(&[0, 1], 1, PI).unwrap();
        assert!(abs(one.distance(0, 1) - PI * (1.0 - exp(-1.0 / PI))) < 1e-12);
        assert!(abs(one.distance(0, 1) - 0.856) < 1e-3);
        assert!(walsh_truncation(&[0], 17, 1.0).is_err());
    }

    #[test]
    fn truncation_bracket() {
        let pts = rng_points(20, 3, 5);
        let eps = 0.01;
        let t = truncate_l1(&pts, PI, eps).unwrap();
        let lo = (1.0 - 1.0 / E) / (1.0 + eps);
        for i in 0..pts.len() {
            for j in 0..i {
                let d: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| abs(a - b)).sum();
                let r = t.distance(i, j) / d.min(PI);
                assert!(r >= lo - 1e-12 && r <= 1.0 + 1e-12, "{r}");
            }
        }
        let far = truncate_l1(&[vec![0.0], vec![5.0]], 1.0, 0.1).unwrap();
        let d = far.distance(0, 1);
        assert!(((1.0 - 1.0 / E) / 1.1..=1.0).contains(&d));
        assert_eq!(
            truncate_l1(&[vec![1.0], vec![1.0]], 1.0, 0.1)
                .unwrap()
                .distance(0, 1),
            0.0
        );
    }

    #[test]
    fn explicit_truncation_matches() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 2.0]];
        let mut t = truncate_l1(&pts, 1.5, 0.5).unwrap();
        assert!(t.cube_dim > WALSH_LIMIT as u64 || t.coordinates().is_some());
        // A coarse grid by hand keeps the cube small.
        t.codes = vec![vec![0, 0], vec![1, 0], vec![1, 2]];
        t.cube_dim = 3;
        t.scale = 1.0;
        let v = t.coordinates().unwrap();
        for i in 0..3 {
            assert!(abs(v.norm_of(i) - 1.5) < 1e-12);
            for j in 0..i {
                assert!(abs(v.distance(i, j) - t.distance(i, j)) < 1e-12);
            }
        }
    }

    #[test]
    fn cone_embedding_bounds() {
        let mut r = seeded(9);
        let pts: Vec<(f64, Vec<f64>)> = (0..40)
            .map(|i| {
                (
                    if i == 0 { 0.0 } else { r.gen_range(0.0..4.0) },
                    vec![r.gen_range(0.0..5.0), r.gen_range(0.0..5.0)],
                )
            })
            .collect();
        let eps = 0.05;
        let emb = cone_l1_embed(&pts, eps).unwrap();
        let pairs: Vec<(usize, usize)> =
            (0..40).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let rep = emb.report(&pairs);
        assert!(rep.within_bounds(), "{rep:?}");
        assert!(rep.distortion <= 11.17 * (1.0 + 2.0 * eps));
        // Cusp to anything and equal bases give ratio π.
        assert!(abs(emb.distance(0, 5) / emb.cone_distance(0, 5) - PI) < 1e-12);
        let same = cone_l1_embed(&[(1.0, vec![2.0]), (3.5, vec![2.0])], eps).unwrap();
        assert!(abs(same.distance(0, 1) - 2.5 * PI) < 1e-12);
    }

    #[test]
    fn helix_distances() {
        let h = helix(&[0.0, 1.0, 4.0], 0.5).unwrap();
        assert!(abs(h.distance(0, 1) - 1.0) < 1e-9);
        assert!(abs(h.distance(0, 2) - 2.0) < 1e-9);
        assert!(abs(h.distance(1, 2) - sqrt(3.0)) < 1e-9);
        let pts = [0.0, 0.3, 1.7, 2.0, 5.5];
        for alpha in [0.25, 0.7, 1.0] {
            let h = helix(&pts, alpha).unwrap();
            for i in 0..pts.len() {
                assert!(abs(h.norm_of(i) - pow(pts[i], alpha)) < 1e-7);
                for j in 0..i {
                    assert!(abs(h.distance(i, j) - pow(abs(pts[i] - pts[j]), alpha)) < 1e-7);
                }
            }
        }
    }

    #[test]
    fn tensor_identity() {
        let v = rng_points(4, 3, 2);
        let (a, b, x, y) = (&v[0], &v[1], &v[2], &v[3]);
        let n2 = |u: &[f64]| u.iter().map(|z| z * z).sum::<f64>();
        let d2 = |u: &[f64], w: &[f64]| u.iter().zip(w).map(|(p, q)| sq(p - q)).sum::<f64>();
        let lhs = d2(&kron(a, x), &kron(b, y));
        let rhs = n2(a) * n2(x) + n2(b) * n2(y)
            - 0.5 * (n2(a) + n2(b) - d2(a, b)) * (n2(x) + n2(y) - d2(x, y));
        assert!(abs(lhs - rhs) < 1e-10);
    }

    #[test]
    fn snowflake_constants() {
        // Half-snowflake of a line is isometric in L2 via the helix.
        let base = [0.0, 0.5, 1.3, 2.9, 4.0];
        let x = FiniteMetric::line(&base);
        let f = helix(&base, 0.5).unwrap().rows;
        let pts: Vec<ConePoint> = [0.0, 0.4, 1.0, 2.5]
            .iter()
            .flat_map(|&s| (0..base.len()).map(move |b| ConePoint::new(s, b)))
            .collect();
        let emb = snowflake_cone_embed(&x, &f, 1.0, 0.5, &pts).unwrap();
        assert!(
            emb.ratio_max <= emb.upper * (1.0 + 1e-9),
            "{} {}",
            emb.ratio_max,
            emb.upper
        );
        assert!(
            emb.ratio_min >= emb.lower * (1.0 - 1e-9),
            "{} {}",
            emb.ratio_min,
            emb.lower
        );
        assert!(abs(snowflake_upper(1.0) - PI * 4.0 / pow(2.0, 1.5)) < 1e-12);
        assert!(abs(snowflake_upper(0.999_999) - snowflake_upper(1.0)) < 1e-4);
        let norm = tau_gaussian(&f, 0.5).unwrap();
        for i in 0..norm.len() {
            assert!(abs(norm.norm_of(i) - sqrt(PI / 2.0)) < 1e-9);
        }
    }

    #[test]
    fn tree_embedding_is_isometric() {
        let g = random_sparse_instance(30, 0, 1, 4).unwrap();
        let v = tree_l1_embed(&g).unwrap();
        let m = g.bfs_metrics();
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(v.distance(i, j), m.get(i, j) as f64);
            }
        }
    }

    fn theta(a: usize, b: usize, c: usize) -> Multigraph {
        // Two poles joined by paths with a, b, c edges.
        let mut edges = Vec::new();
        let mut n = 2;
        for len in [a, b, c] {
            let mut prev = 0;
            for _ in 0..len - 1 {
                edges.push((prev, n, 1));
                prev = n;
                n += 1;
            }
            edges.push((prev, 1, 1));
        }
        Multigraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn tree_measure_examples() {
        let path = Multigraph::path(6);
        let d = tree_polytope_measure(&path, 0.1).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d.marginals().iter().all(|&m| m == 1.0));

        let k = 7;
        let c = tree_polytope_measure(&Multigraph::cycle(k), 1.0 / (k - 1) as f64).unwrap();
        d.validate().unwrap();
        c.validate().unwrap();
        assert_eq!(c.len(), k);
        for m in c.marginals() {
            assert!(abs(m - (k - 1) as f64 / k as f64) < 1e-12);
        }
        assert!(tree_polytope_measure(&Multigraph::cycle(k), 0.1).is_err());

        let g = theta(4, 5, 6);
        let delta = sparsity_one(&g);
        let t = tree_polytope_measure(&g, delta).unwrap();
        t.validate().unwrap();
        for m in t.marginals() {
            assert!(m >= 1.0 / (1.0 + delta) - 1e-9);
        }
        assert!(tree_polytope_measure(&g, delta * 0.9).is_err());
    }

    /// Least δ with `|E(S)| ≤ (1+δ)(|S|−1)` for every `S`, by brute force.
    fn sparsity_one(g: &Multigraph) -> f64 {
        let n = g.n();
        let mut best: f64 = 0.0;
        for mask in 1u32..(1 << n) {
            let s: Vec<u32> = (0..n as u32).filter(|&v| mask >> v & 1 == 1).collect();
            if s.len() >= 2 {
                best = best.max(g.induced_edge_count(&s) as f64 / (s.len() - 1) as f64 - 1.0);
            }
        }
        best
    }

    #[test]
    fn quotient_examples() {
        let g = Multigraph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1)]).unwrap();
        let q = quotient_graph(&g, 4.0).unwrap();
        assert_eq!((q.graph.n(), q.graph.edge_count()), (2, 1));

        let tree = random_sparse_instance(20, 0, 1, 1).unwrap();
        let q = quotient_graph(&tree, 10.0).unwrap();
        assert_eq!(q.graph, tree.clone().without_rotation());

        let mut e = vec![
            (0, 1, 1),
            (1, 2, 1),
            (0, 2, 1),
            (10, 11, 1),
            (11, 12, 1),
            (10, 12, 1),
        ];
        for v in 2..10 {
            e.push((v, v + 1, 1));
        }
        let g = Multigraph::from_edges(13, &e).unwrap();
        let q = quotient_graph(&g, 4.0).unwrap();
        assert_eq!((q.graph.n(), q.graph.edge_count()), (9, 8));
        assert!(q.min_cycle_distance.unwrap() as f64 > 5.0);
        assert_eq!(q.graph.diameter(), Some(8));
    }

    #[test]
    fn overlapping_cycles_rejected() {
        // Two triangles sharing an edge: |E| = 5 ≥ |C1 ∪ C2| + 1.
        let g = Multigraph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)])
            .unwrap();
        assert_eq!(g.induced_edge_count(&[0, 1, 2, 3]), 5);
        assert!(quotient_graph(&g, 4.0).is_err());
        // Two 5-cycles sharing a vertex.
        let g = Multigraph::from_edges(
            9,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 3, 1),
                (3, 4, 1),
                (4, 0, 1),
                (0, 5, 1),
                (5, 6, 1),
                (6, 7, 1),
                (7, 8, 1),
                (8, 0, 1),
            ],
        )
        .unwrap();
        assert!(g.induced_edge_count(&(0..9).collect::<Vec<_>>()) > 9);
        assert!(quotient_graph(&g, 6.0).is_err());
    }

    #[test]
    fn large_threshold_matches_enumeration() {
        let mut e: Vec<(usize, usize, u32)> = (0..199).map(|v| (v, v + 1, 1)).collect();
        e.extend([(0, 12, 1), (50, 70, 1), (120, 141, 1), (160, 199, 1)]);
        let g = Multigraph::from_edges(200, &e).unwrap();
        let exact: BTreeSet<Vec<u32>> = g
            .short_cycles(25)
            .unwrap()
            .into_iter()
            .map(|c| c.vertices)
            .collect();
        let fast: BTreeSet<Vec<u32>> = shortest_cycles(&g, 25).into_iter().collect();
        assert_eq!(exact.len(), 3);
        assert_eq!(exact, fast);
    }

    #[test]
    fn good_trees() {
        // Triangle with a tail and a long cycle elsewhere.
        let mut e = vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)];
        for v in 2..40 {
            e.push((v, v + 1, 1));
        }
        e.push((40, 20, 1));
        let g = Multigraph::from_edges(41, &e).unwrap();
        let delta = sparsity_delta(&g).max(1e-3);
        let m = good_tree_measure(&g, 1.0 / (3.0 * delta), delta).unwrap();
        m.measure.validate().unwrap();
        let (off, on) = m.marginal_slack();
        assert!(off >= -1e-9 && on >= -1e-9, "{off} {on}");
        let marg = m.measure.marginals();
        let bridge = g
            .edge_instances()
            .iter()
            .position(|&x| x == (2, 3))
            .unwrap();
        assert_eq!(marg[bridge], 1.0);
        for k in 0..m.measure.len() {
            let inside = m.measure.in_tree(k);
            for c in &m.quotient.cycle_edges {
                assert_eq!(
                    c.iter().filter(|&&x| inside[x as usize]).count(),
                    c.len() - 1
                );
            }
        }
    }

    #[test]
    fn sparse_tree_input() {
        let g = random_sparse_instance(60, 0, 1, 3).unwrap();
        let cfg = SparseL1Config {
            delta: 0.1,
            trees: 3,
            seed: 1,
            random_pairs: 500,
        };
        let (_, rep) = sparse_graph_l1(&g, &cfg).unwrap();
        assert!(rep.distortion <= E / (E - 1.0) + 1e-6, "{rep:?}");
    }

    #[test]
    fn sparse_instance_pipeline() {
        let g = random_sparse_instance(150, 4, 12, 11).unwrap();
        let delta = sparsity_delta(&g);
        assert!(delta > 0.0 && delta < 1.0 / 3.0, "{delta}");
        let cfg = SparseL1Config {
            delta,
            trees: 16,
            seed: 2,
            random_pairs: 2000,
        };
        let (emb, rep) = sparse_graph_l1(&g, &cfg).unwrap();
        assert!(rep.distortion.is_finite() && rep.distortion >= 1.0);
        let coords = emb.vertex_coordinates();
        for (a, b) in [(0, 17), (5, 149), (33, 34)] {
            let l1: f64 = coords[a]
                .iter()
                .zip(&coords[b])
                .map(|(x, y)| abs(x - y))
                .sum();
            let mean: f64 = (0..emb.trees())
                .map(|k| {
                    emb.tree_distance(
                        k,
                        SimplicialPoint::Vertex(a as u32),
                        SimplicialPoint::Vertex(b as u32),
                    )
                })
                .sum::<f64>()
                / emb.trees() as f64;
            assert!(abs(l1 - mean) < 1e-9);
        }
    }

    #[test]
    fn good_tree_cycle_paths() {
        let g = random_sparse_instance(120, 3, 6, 21).unwrap();
        let delta = sparsity_delta(&g);
        let cfg = SparseL1Config {
            delta,
            trees: 8,
            seed: 3,
            random_pairs: 0,
        };
        let (emb, _) = sparse_graph_l1(&g, &cfg).unwrap();
        let q = quotient_graph(&g, 1.0 / (3.0 * delta)).unwrap();
        let inst = g.edge_instances();
        for c in &q.cycle_edges {
            for &e in c {
                let (a, b) = inst[e as usize];
                for k in 0..emb.trees() {
                    let d = emb.tree_distance(
                        k,
                        SimplicialPoint::Vertex(a),
                        SimplicialPoint::Vertex(b),
                    );
                    assert!(d <= c.len() as f64);
                }
            }
        }
    }
}
