//! Eigenvalues of normalised adjacency matrices and Poincaré constants
//! `γ(G, d_X²)`, `γ_+(G, d_X²)` over finite metric spaces.
//!
//! For a `d`-regular graph on `n` vertices the edge average is taken with
//! normaliser `nd/2` (a loop counts as half an edge there but contributes
//! nothing to the sum), which makes `γ(G, d_ℝ²) = 1/(1 − λ₂)` hold exactly
//! for looped graphs too.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::linalg::{lanczos, sym_eigen, Dense, SymEigen};
use crate::math::{abs, sq, sqrt};
use crate::multigraph::Multigraph;
use crate::rng::seeded;
use crate::{Error, Result};

/// Largest vertex count handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 1024;

/// Finite metric space given by its distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    d: Vec<f64>,
}

impl FiniteMetric {
    /// Checks symmetry, zero diagonal, nonnegativity and the triangle
    /// inequality (up to `1e-9` relative slack).
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut d = Vec::with_capacity(n * n);
        for r in &rows {
            if r.len() != n {
                return Err(Error::Precondition("distance matrix is not square".into()));
            }
            d.extend_from_slice(r);
        }
        let m = FiniteMetric { n, d };
        m.check()?;
        Ok(m)
    }

    pub fn from_fn<F: Fn(usize, usize) -> f64>(n: usize, f: F) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[i * n + j] = f(i, j);
                }
            }
        }
        FiniteMetric { n, d }
    }

    /// Points on the real line.
    pub fn line(points: &[f64]) -> Self {
        Self::from_fn(points.len(), |i, j| abs(points[i] - points[j]))
    }

    /// Points of `ℓ_1^k`.
    pub fn l1(points: &[Vec<f64>]) -> Self {
        Self::from_fn(points.len(), |i, j| {
            points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| abs(a - b))
                .sum()
        })
    }

    pub fn check(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::Precondition(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let x = self.get(i, j);
                if !(x >= 0.0) || x != self.get(j, i) {
                    return Err(Error::Precondition(format!("bad entry at ({i},{j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = self.get(i, k);
                    let rhs = self.get(i, j) + self.get(j, k);
                    if lhs > rhs + 1e-9 * (1.0 + rhs) {
                        return Err(Error::Precondition(format!(
                            "triangle inequality fails at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.d.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Coordinates on the line if the metric is isometric to a subset of ℝ.
    pub fn line_positions(&self) -> Option<Vec<f64>> {
        let n = self.n;
        if n == 0 {
            return Some(Vec::new());
        }
        let far = (0..n).max_by(|&a, &b| self.get(0, a).partial_cmp(&self.get(0, b)).unwrap())?;
        let p: Vec<f64> = (0..n).map(|i| self.get(far, i)).collect();
        for i in 0..n {
            for j in 0..n {
                if abs(abs(p[i] - p[j]) - self.get(i, j)) > 1e-9 * (1.0 + self.get(i, j)) {
                    return None;
                }
            }
        }
        Some(p)
    }

    fn squared(&self) -> Vec<f64> {
        self.d.iter().map(|x| x * x).collect()
    }
}

/// Normalised adjacency `A/d` as a dense matrix.
pub fn normalized_adjacency(g: &Multigraph) -> Result<Dense> {
    let d = g.regular_degree().ok_or(Error::NotRegular)? as f64;
    let n = g.n();
    let mut m = Dense::zeros(n);
    for u in 0..n {
        for (v, k) in g.row(u) {
            m.set(u, v as usize, k as f64 / d);
        }
    }
    Ok(m)
}

/// Full decomposition of the normalised adjacency (dense; `n <= DENSE_LIMIT`).
pub fn eigen(g: &Multigraph) -> Result<SymEigen> {
    if g.n() > DENSE_LIMIT {
        return Err(Error::Budget(format!(
            "dense eigensolver limited to {DENSE_LIMIT} vertices"
        )));
    }
    Ok(sym_eigen(&normalized_adjacency(g)?))
}

/// Eigenvalues `λ₁ ≥ … ≥ λ_n` of the normalised adjacency, with residuals
/// `‖Av − λv‖` checked against `1e-9`.
pub fn spectrum(g: &Multigraph) -> Result<Vec<f64>> {
    let a = normalized_adjacency(g)?;
    if g.n() > DENSE_LIMIT {
        return Err(Error::Budget(format!(
            "dense eigensolver limited to {DENSE_LIMIT} vertices"
        )));
    }
    let eig = sym_eigen(&a);
    let res = max_residual(&a, &eig);
    if res > 1e-9 {
        return Err(Error::Precondition(format!(
            "eigensolver residual {res:e} above 1e-9"
        )));
    }
    Ok(eig.values)
}

pub fn max_residual(a: &Dense, eig: &SymEigen) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..a.n {
        let x = eig.vector(k);
        let ax = a.mul_vec(&x);
        let r: f64 = ax
            .iter()
            .zip(&x)
            .map(|(p, q)| sq(p - eig.values[k] * q))
            .sum();
        worst = worst.max(sqrt(r));
    }
    worst
}

/// `(λ₂, λ_n)` for any size: dense below [`DENSE_LIMIT`], otherwise
/// Lanczos on the complement of the constant vector. A disconnected graph
/// reports `λ₂ = 1` exactly.
pub fn extreme_eigenvalues(g: &Multigraph) -> Result<(f64, f64)> {
    let d = g.regular_degree().ok_or(Error::NotRegular)? as f64;
    let n = g.n();
    if n <= DENSE_LIMIT {
        let v = spectrum(g)?;
        let l2 = if n > 1 { v[1] } else { f64::NEG_INFINITY };
        let l2 = if g.is_connected() { l2 } else { 1.0 };
        return Ok((l2, v[n - 1]));
    }
    let unit = vec![1.0 / sqrt(n as f64); n];
    let op = |x: &[f64], y: &mut [f64]| {
        for u in 0..n {
            let mut s = 0.0;
            for (v, k) in g.row(u) {
                s += k as f64 * x[v as usize];
            }
            y[u] = s / d;
        }
    };
    // Keep the Krylov basis under roughly 400 MB.
    let steps = (50_000_000 / n).clamp(30, 300);
    let ritz = lanczos(n, op, &[unit], steps, 0x5eed);
    let top = ritz.first().copied().unwrap_or(1.0);
    let bottom = ritz.last().copied().unwrap_or(-1.0);
    let l2 = if g.is_connected() { top.min(1.0) } else { 1.0 };
    Ok((l2, bottom.max(-1.0)))
}

/// `γ(G, d_ℝ²) = 1/(1 − λ₂)`.
pub fn gamma_line(g: &Multigraph) -> Result<f64> {
    let (l2, _) = extreme_eigenvalues(g)?;
    if l2 >= 1.0 - 1e-12 {
        return Err(Error::Disconnected);
    }
    Ok(1.0 / (1.0 - l2))
}

/// `γ_+(G, d_ℝ²) = 1/(1 − max{λ₂, −λ_n})`.
pub fn gamma_plus_line(g: &Multigraph) -> Result<f64> {
    let (l2, ln) = extreme_eigenvalues(g)?;
    if l2 >= 1.0 - 1e-12 {
        return Err(Error::Disconnected);
    }
    if -ln >= 1.0 - 1e-12 {
        return Err(Error::Precondition("bipartite component: −λ_n = 1".into()));
    }
    Ok(1.0 / (1.0 - l2.max(-ln)))
}

fn quotient(num: f64, den: f64) -> f64 {
    if den <= 0.0 {
        if num <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Full average `(1/n²) Σ_{u,v} d(f(u), f(v))²` and edge average
/// `(2/(nd)) Σ_{edges} d(f(u), f(v))²` of a map into `X`.
pub fn averages(g: &Multigraph, x: &FiniteMetric, f: &[usize]) -> Result<(f64, f64)> {
    let d = g.regular_degree().ok_or(Error::NotRegular)?;
    let n = g.n();
    if f.len() != n || f.iter().any(|&p| p >= x.len()) {
        return Err(Error::Precondition(
            "map is not total on the vertices".into(),
        ));
    }
    let mut counts = vec![0f64; x.len()];
    for &p in f {
        counts[p] += 1.0;
    }
    let mut num = 0.0;
    for a in 0..x.len() {
        for b in 0..x.len() {
            num += counts[a] * counts[b] * x.get(a, b) * x.get(a, b);
        }
    }
    let den = g.edge_sum(|u, v| if u == v { 0.0 } else { sq(x.get(f[u], f[v])) })?;
    Ok((num / (n * n) as f64, den / (n * d) as f64 * 2.0))
}

/// Ratio of the full average to the edge average for a single map.
pub fn poincare_ratio(g: &Multigraph, x: &FiniteMetric, f: &[usize]) -> Result<f64> {
    let (full, edge) = averages(g, x, f)?;
    Ok(quotient(full, edge))
}

/// The two-map ratio `[(1/n²) Σ d(f(u), h(v))²] / [(1/(nd)) Σ_{(u,v)} E(u,v) d(f(u), h(v))²]`,
/// the edge sum running over ordered pairs.
pub fn ratio_plus(g: &Multigraph, x: &FiniteMetric, f: &[usize], h: &[usize]) -> Result<f64> {
    let d = g.regular_degree().ok_or(Error::NotRegular)?;
    let n = g.n();
    if f.len() != n || h.len() != n {
        return Err(Error::Precondition(
            "maps are not total on the vertices".into(),
        ));
    }
    let mut cf = vec![0f64; x.len()];
    let mut ch = vec![0f64; x.len()];
    for u in 0..n {
        cf[f[u]] += 1.0;
        ch[h[u]] += 1.0;
    }
    let mut num = 0.0;
    for a in 0..x.len() {
        for b in 0..x.len() {
            num += cf[a] * ch[b] * sq(x.get(a, b));
        }
    }
    let mut den = 0.0;
    for u in 0..n {
        for (v, k) in g.row(u) {
            den += k as f64 * sq(x.get(f[u], h[v as usize]));
        }
    }
    Ok(quotient(num / (n * n) as f64, den / (n * d) as f64))
}

/// Ratio for a real-valued map, in `O(n + |E|)`.
pub fn real_ratio(g: &Multigraph, f: &[f64]) -> Result<f64> {
    let d = g.regular_degree().ok_or(Error::NotRegular)?;
    let n = g.n() as f64;
    let s: f64 = f.iter().sum();
    let s2: f64 = f.iter().map(|x| x * x).sum();
    let full = (2.0 * n * s2 - 2.0 * s * s) / (n * n);
    let mut e = 0.0;
    for u in 0..g.n() {
        for (v, k) in g.row(u) {
            if v as usize > u {
                e += k as f64 * sq(f[u] - f[v as usize]);
            }
        }
    }
    Ok(quotient(full, 2.0 * e / (n * d as f64)))
}

/// Two-map ratio for real-valued maps.
pub fn real_ratio_plus(g: &Multigraph, f: &[f64], h: &[f64]) -> Result<f64> {
    let d = g.regular_degree().ok_or(Error::NotRegular)?;
    let n = g.n() as f64;
    let (sf, sh): (f64, f64) = (f.iter().sum(), h.iter().sum());
    let (qf, qh): (f64, f64) = (f.iter().map(|x| x * x).sum(), h.iter().map(|x| x * x).sum());
    let full = (n * qf + n * qh - 2.0 * sf * sh) / (n * n);
    let mut e = 0.0;
    for u in 0..g.n() {
        for (v, k) in g.row(u) {
            e += k as f64 * sq(f[u] - h[v as usize]);
        }
    }
    Ok(quotient(full, e / (n * d as f64)))
}

/// Two-map ratio for a symmetric stochastic matrix `M`:
/// `[(1/n²) Σ d(f_i, h_j)²] / [(1/n) Σ M_ij d(f_i, h_j)²]`.
pub fn ratio_plus_matrix(m: &Dense, x: &FiniteMetric, f: &[usize], h: &[usize]) -> f64 {
    let n = m.n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dd = sq(x.get(f[i], h[j]));
            num += dd;
            den += m.get(i, j) * dd;
        }
    }
    quotient(num / (n * n) as f64, den / n as f64)
}

/// Checks that `M` is symmetric with nonnegative entries and unit row sums.
pub fn check_stochastic(m: &Dense) -> Result<()> {
    for i in 0..m.n {
        let mut row = 0.0;
        for j in 0..m.n {
            let v = m.get(i, j);
            if v < 0.0 || abs(v - m.get(j, i)) > 1e-12 {
                return Err(Error::Precondition(format!(
                    "matrix entry ({i},{j}) is negative or asymmetric"
                )));
            }
            row += v;
        }
        if abs(row - 1.0) > 1e-9 {
            return Err(Error::Precondition(format!("row {i} sums to {row}")));
        }
    }
    Ok(())
}

/// Local search lower bound on `γ_+(M, d_X²)`; returns the value and the
/// witnessing pair of maps.
pub fn gamma_plus_matrix(
    m: &Dense,
    x: &FiniteMetric,
    restarts: usize,
    seed: u64,
) -> (f64, Vec<usize>, Vec<usize>) {
    let n = m.n;
    let k = x.len();
    if k < 2 || n == 0 {
        return (0.0, vec![0; n], vec![0; n]);
    }
    let d2 = x.squared();
    let dd = |a: usize, b: usize| d2[a * k + b];
    let mut rng = seeded(seed);
    let mut best = (f64::NEG_INFINITY, vec![0; n], vec![0; n]);
    for _ in 0..restarts.max(1) {
        let mut f: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut h: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            for j in 0..n {
                num += dd(f[i], h[j]);
                den += m.get(i, j) * dd(f[i], h[j]);
            }
        }
        let value = |num: f64, den: f64| quotient(num / (n * n) as f64, den / n as f64);
        for _ in 0..10_000 {
            let cur = value(num, den);
            let mut mv: Option<(f64, bool, usize, usize, f64, f64)> = None;
            for first in [true, false] {
                let (map, other) = if first { (&f, &h) } else { (&h, &f) };
                for u in 0..n {
                    let a = map[u];
                    for b in 0..k {
                        if a == b {
                            continue;
                        }
                        let mut dn = 0.0;
                        let mut de = 0.0;
                        for v in 0..n {
                            let w = other[v];
                            let diff = dd(b, w) - dd(a, w);
                            dn += diff;
                            de += if first { m.get(u, v) } else { m.get(v, u) } * diff;
                        }
                        let r = value(num + dn, den + de);
                        let bar = mv.as_ref().map_or(cur * (1.0 + 1e-12) + 1e-15, |t| t.0);
                        if r.is_finite() && r > bar {
                            mv = Some((r, first, u, b, dn, de));
                        }
                    }
                }
            }
            let Some((_, first, u, b, dn, de)) = mv else {
                break;
            };
            if first {
                f[u] = b;
            } else {
                h[u] = b;
            }
            num += dn;
            den += de;
        }
        let r = ratio_plus_matrix(m, x, &f, &h);
        if r > best.0 {
            best = (r, f, h);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Local,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareReport {
    pub gamma_estimate: f64,
    pub f: Vec<usize>,
    /// Second map, for the two-map constant.
    pub h: Option<Vec<usize>>,
    pub mode: SearchMode,
    /// True when the value is the exact maximum over all maps.
    pub exact: bool,
    /// The target has a single point, so every ratio is 0/0.
    pub degenerate: bool,
    pub budget_exhausted: bool,
    pub iterations: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub restarts: usize,
    /// Cap on improving moves per restart.
    pub max_moves: usize,
    /// Cap on the number of maps enumerated in exhaustive mode.
    pub max_maps: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            restarts: 100,
            max_moves: 10_000,
            max_maps: 10_000_000,
        }
    }
}

/// Lower bound (exact in exhaustive mode) on `γ` or `γ_+` for maps into `X`.
pub fn gamma_search(
    g: &Multigraph,
    x: &FiniteMetric,
    mode: SearchMode,
    plus: bool,
    budget: SearchBudget,
    seed: u64,
) -> Result<PoincareReport> {
    g.regular_degree().ok_or(Error::NotRegular)?;
    let n = g.n();
    let k = x.len();
    if k == 0 {
        return Err(Error::Precondition("empty target metric".into()));
    }
    let base = PoincareReport {
        gamma_estimate: 0.0,
        f: vec![0; n],
        h: plus.then(|| vec![0; n]),
        mode,
        exact: mode == SearchMode::Exhaustive,
        degenerate: k == 1,
        budget_exhausted: false,
        iterations: 0,
        seed,
    };
    if k == 1 {
        return Ok(PoincareReport {
            exact: true,
            ..base
        });
    }
    match mode {
        SearchMode::Exhaustive => exhaustive(g, x, plus, budget, base),
        SearchMode::Local => Ok(local(g, x, plus, budget, base)),
    }
}

fn exhaustive(
    g: &Multigraph,
    x: &FiniteMetric,
    plus: bool,
    budget: SearchBudget,
    mut rep: PoincareReport,
) -> Result<PoincareReport> {
    let n = g.n();
    let k = x.len() as u64;
    let slots = if plus { 2 * n } else { n };
    let mut total: u64 = 1;
    for _ in 0..slots {
        total = total
            .checked_mul(k)
            .filter(|&t| t <= budget.max_maps)
            .ok_or_else(|| {
                Error::Budget(format!(
                    "{} maps exceed the exhaustive cap {}",
                    "k^slots", budget.max_maps
                ))
            })?;
    }
    let mut digits = vec![0usize; slots];
    let mut best = f64::NEG_INFINITY;
    for _ in 0..total {
        let (f, h) = digits.split_at(n);
        let r = if plus {
            ratio_plus(g, x, f, h)?
        } else {
            poincare_ratio(g, x, f)?
        };
        if r > best {
            best = r;
            rep.f = f.to_vec();
            if plus {
                rep.h = Some(h.to_vec());
            }
        }
        for dgt in digits.iter_mut() {
            *dgt += 1;
            if *dgt < k as usize {
                break;
            }
            *dgt = 0;
        }
    }
    rep.gamma_estimate = best;
    rep.iterations = total;
    Ok(rep)
}

/// Incremental state for single-vertex moves of the one- or two-map ratio.
struct MoveState<'a> {
    g: &'a Multigraph,
    d2: Vec<f64>,
    k: usize,
    f: Vec<usize>,
    h: Vec<usize>,
    cf: Vec<f64>,
    ch: Vec<f64>,
    num: f64,
    den: f64,
    plus: bool,
}

impl<'a> MoveState<'a> {
    fn new(g: &'a Multigraph, x: &FiniteMetric, f: Vec<usize>, h: Vec<usize>, plus: bool) -> Self {
        let k = x.len();
        let mut s = MoveState {
            g,
            d2: x.squared(),
            k,
            f,
            h,
            cf: vec![0.0; k],
            ch: vec![0.0; k],
            num: 0.0,
            den: 0.0,
            plus,
        };
        s.recompute();
        s
    }

    fn dd(&self, a: usize, b: usize) -> f64 {
        self.d2[a * self.k + b]
    }

    fn second(&self) -> &[usize] {
        if self.plus {
            &self.h
        } else {
            &self.f
        }
    }

    fn recompute(&mut self) {
        self.cf.iter_mut().for_each(|c| *c = 0.0);
        self.ch.iter_mut().for_each(|c| *c = 0.0);
        for &p in &self.f {
            self.cf[p] += 1.0;
        }
        for &p in self.second().to_vec().iter() {
            self.ch[p] += 1.0;
        }
        let mut num = 0.0;
        for a in 0..self.k {
            for b in 0..self.k {
                num += self.cf[a] * self.ch[b] * self.dd(a, b);
            }
        }
        let mut den = 0.0;
        let sec = self.second().to_vec();
        for u in 0..self.g.n() {
            for (v, m) in self.g.row(u) {
                den += m as f64 * self.dd(self.f[u], sec[v as usize]);
            }
        }
        self.num = num;
        self.den = den;
    }

    /// Change in (num, den) if vertex `u` of map `which` moves to `b`.
    /// Both sums run over ordered pairs.
    fn delta(&self, which: usize, u: usize, b: usize) -> (f64, f64) {
        let g = self.g;
        if !self.plus {
            let a = self.f[u];
            let mut sa = 0.0;
            let mut sb = 0.0;
            for x in 0..self.k {
                let c = self.cf[x] - if x == a { 1.0 } else { 0.0 };
                sa += c * self.dd(a, x);
                sb += c * self.dd(b, x);
            }
            let mut e = 0.0;
            for (v, m) in g.row(u) {
                if v as usize != u {
                    let w = self.f[v as usize];
                    e += m as f64 * (self.dd(b, w) - self.dd(a, w));
                }
            }
            return (2.0 * (sb - sa), 2.0 * e);
        }
        let (map, other_counts, other) = if which == 0 {
            (&self.f, &self.ch, &self.h)
        } else {
            (&self.h, &self.cf, &self.f)
        };
        let a = map[u];
        let mut dn = 0.0;
        for x in 0..self.k {
            dn += other_counts[x] * (self.dd(b, x) - self.dd(a, x));
        }
        let mut e = 0.0;
        for (v, m) in g.row(u) {
            let w = if v as usize == u {
                if which == 0 {
                    self.h[u]
                } else {
                    self.f[u]
                }
            } else {
                other[v as usize]
            };
            if v as usize == u {
                // Loop term pairs f(u) with h(u); both change only through this map.
                e += m as f64 * (self.dd(b, w) - self.dd(a, w));
            } else {
                e += m as f64 * (self.dd(b, w) - self.dd(a, w));
            }
        }
        (dn, e)
    }

    fn apply(&mut self, which: usize, u: usize, b: usize, dn: f64, de: f64) {
        if which == 0 {
            let a = self.f[u];
            self.cf[a] -= 1.0;
            self.cf[b] += 1.0;
            self.f[u] = b;
        } else {
            let a = self.h[u];
            self.ch[a] -= 1.0;
            self.ch[b] += 1.0;
            self.h[u] = b;
        }
        if !self.plus {
            self.ch.clone_from(&self.cf);
        }
        self.num += dn;
        self.den += de;
    }

    fn ratio(&self) -> f64 {
        let n = self.g.n() as f64;
        let d = self.g.degree(0) as f64;
        quotient(self.num / (n * n), self.den / (n * d))
    }
}

fn local(
    g: &Multigraph,
    x: &FiniteMetric,
    plus: bool,
    budget: SearchBudget,
    mut rep: PoincareReport,
) -> PoincareReport {
    let n = g.n();
    let k = x.len();
    let mut rng = seeded(rep.seed);
    let mut best = f64::NEG_INFINITY;
    let maps = if plus { 2 } else { 1 };
    // Start from the best two-point cut as a floor.
    let (mut fa, mut fb) = (0, 1);
    for a in 0..k {
        for b in 0..k {
            if x.get(a, b) > x.get(fa, fb) {
                fa = a;
                fb = b;
            }
        }
    }
    for restart in 0..budget.restarts.max(1) {
        let f: Vec<usize> = if restart == 0 {
            (0..n).map(|u| if u < n / 2 { fa } else { fb }).collect()
        } else {
            (0..n).map(|_| rng.gen_range(0..k)).collect()
        };
        let h = if plus { f.clone() } else { Vec::new() };
        let mut st = MoveState::new(g, x, f, h, plus);
        let mut moves = 0;
        loop {
            let cur = st.ratio();
            let mut best_move: Option<(f64, usize, usize, usize, f64, f64)> = None;
            for which in 0..maps {
                for u in 0..n {
                    for b in 0..k {
                        let a = if which == 0 { st.f[u] } else { st.h[u] };
                        if a == b {
                            continue;
                        }
                        let (dn, de) = st.delta(which, u, b);
                        let nn = g.n() as f64;
                        let d = g.degree(0) as f64;
                        let r = quotient((st.num + dn) / (nn * nn), (st.den + de) / (nn * d));
                        let better = match best_move {
                            None => r > cur * (1.0 + 1e-12) + 1e-15,
                            Some((br, ..)) => r > br,
                        };
                        if better && r.is_finite() {
                            best_move = Some((r, which, u, b, dn, de));
                        }
                    }
                }
            }
            match best_move {
                Some((_, which, u, b, dn, de)) if moves < budget.max_moves => {
                    st.apply(which, u, b, dn, de);
                    moves += 1;
                    rep.iterations += 1;
                    if moves % 64 == 0 {
                        st.recompute();
                    }
                }
                Some(_) => {
                    rep.budget_exhausted = true;
                    break;
                }
                None => break,
            }
        }
        st.recompute();
        let r = st.ratio();
        if r > best {
            best = r;
            rep.f = st.f.clone();
            if plus {
                rep.h = Some(st.h.clone());
            }
        }
    }
    rep.gamma_estimate = best;
    rep.exact = false;
    rep
}

/// Exact `γ(G, d²)` for the two-point metric, over all `2^n` cuts.
pub fn gamma_cut_exact(g: &Multigraph) -> Result<f64> {
    let d = g.regular_degree().ok_or(Error::NotRegular)? as f64;
    let n = g.n();
    if n > 24 {
        return Err(Error::Budget(format!(
            "{n} vertices; cut enumeration is limited to 24"
        )));
    }
    let mut side = vec![false; n];
    let mut size = 0i64;
    let mut cross = 0f64;
    let mut best: f64 = 0.0;
    // Gray code walk over all subsets.
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        let before = side[v];
        for (w, m) in g.row(v) {
            if w as usize != v {
                if side[w as usize] == before {
                    cross += m as f64;
                } else {
                    cross -= m as f64;
                }
            }
        }
        side[v] = !before;
        size += if before { -1 } else { 1 };
        let full = 2.0 * (size as f64) * ((n as i64 - size) as f64) / (n * n) as f64;
        let edge = 2.0 * cross / (n as f64 * d);
        best = best.max(quotient(full, edge));
    }
    Ok(best)
}

#[derive(Clone, Debug)]
pub struct CheegerReport {
    pub gamma_x: f64,
    pub gamma_x_exact: bool,
    pub gamma_cut: Option<f64>,
    pub lambda2: f64,
    /// `1/√(1 − λ₂)`.
    pub inv_sqrt_gap: f64,
    /// `γ_X √(1 − λ₂)`: the constant in the Cheeger-type lower bound.
    pub constant: f64,
    /// No inconsistency between the computed quantities was found.
    pub consistent: bool,
}

/// Cross-checks a computed `γ(G, d_X²)` against the cut oracle (every
/// two-point subset of `X` gives a lower bound) and, for line metrics,
/// against `1/(1 − λ₂)` as an upper bound.
pub fn cheeger_check(g: &Multigraph, x: &FiniteMetric, seed: u64) -> Result<CheegerReport> {
    if x.len() < 2 {
        return Err(Error::Precondition(
            "target metric needs at least two points".into(),
        ));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let rep = match gamma_search(
        g,
        x,
        SearchMode::Exhaustive,
        false,
        SearchBudget::default(),
        seed,
    ) {
        Ok(r) => r,
        Err(Error::Budget(_)) => gamma_search(
            g,
            x,
            SearchMode::Local,
            false,
            SearchBudget::default(),
            seed,
        )?,
        Err(e) => return Err(e),
    };
    let (l2, _) = extreme_eigenvalues(g)?;
    let cut = if g.n() <= 24 {
        Some(gamma_cut_exact(g)?)
    } else {
        None
    };
    let mut consistent = true;
    if let Some(c) = cut {
        if rep.exact && rep.gamma_estimate < c - 1e-9 {
            consistent = false;
        }
    }
    if x.line_positions().is_some() && rep.gamma_estimate > 1.0 / (1.0 - l2) + 1e-6 {
        consistent = false;
    }
    let gap = 1.0 - l2;
    Ok(CheegerReport {
        gamma_x: rep.gamma_estimate,
        gamma_x_exact: rep.exact,
        gamma_cut: cut,
        lambda2: l2,
        inv_sqrt_gap: 1.0 / sqrt(gap),
        constant: rep.gamma_estimate * sqrt(gap),
        consistent,
    })
}

#[derive(Clone, Debug)]
pub struct ExtrapolationReport {
    pub lambda2: f64,
    /// Best ratio found per point configuration.
    pub ratios: Vec<f64>,
    /// `max ratio · (1 − λ₂)²`.
    pub quotient: f64,
}

/// Searches maps into random configurations of `points` points in
/// `ℓ_1^dim` and reports the best ratio against `1/(1 − λ₂)²`.
pub fn l1_extrapolation_check(
    g: &Multigraph,
    configs: usize,
    points: usize,
    dim: usize,
    seed: u64,
) -> Result<ExtrapolationReport> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let (l2, _) = extreme_eigenvalues(g)?;
    let mut rng = seeded(seed);
    let mut ratios = Vec::with_capacity(configs);
    let budget = SearchBudget {
        restarts: 10,
        ..SearchBudget::default()
    };
    for c in 0..configs {
        let pts: Vec<Vec<f64>> = (0..points)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let x = FiniteMetric::l1(&pts);
        let r = gamma_search(
            g,
            &x,
            SearchMode::Local,
            false,
            budget,
            crate::rng::child_seed(seed, c as u64),
        )?;
        ratios.push(r.gamma_estimate);
    }
    let best = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ExtrapolationReport {
        lambda2: l2,
        ratios,
        quotient: best * sq(1.0 - l2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn spectrum_examples() {
        let c4 = spectrum(&Multigraph::cycle(4)).unwrap();
        for (a, b) in c4.iter().zip([1.0, 0.0, 0.0, -1.0]) {
            assert!(close(*a, b, 1e-12));
        }
        let k4 = spectrum(&Multigraph::complete(4)).unwrap();
        for (a, b) in k4.iter().zip([1.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0]) {
            assert!(close(*a, b, 1e-12));
        }
        let loops =
            Multigraph::from_edges(5, &(0..5).map(|i| (i, i, 1)).collect::<Vec<_>>()).unwrap();
        assert!(spectrum(&loops)
            .unwrap()
            .iter()
            .all(|&l| close(l, 1.0, 1e-12)));
    }

    #[test]
    fn cycle_closed_form() {
        for k in 3..20 {
            let v = spectrum(&Multigraph::cycle(k)).unwrap();
            let mut want: Vec<f64> = (0..k)
                .map(|j| (2.0 * core::f64::consts::PI * j as f64 / k as f64).cos())
                .collect();
            want.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (a, b) in v.iter().zip(&want) {
                assert!(close(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn gamma_closed_forms() {
        let c9 = gamma_plus_line(&Multigraph::cycle(9)).unwrap();
        let want = 1.0 / (1.0 - (core::f64::consts::PI / 9.0).cos());
        assert!(close(c9, want, 1e-9));
        assert!(c9 <= 648.0);
        assert!(close(
            gamma_line(&Multigraph::complete(4)).unwrap(),
            0.75,
            1e-12
        ));
        let two = Multigraph::cycle(3).disjoint_union(&Multigraph::cycle(3));
        assert_eq!(gamma_line(&two), Err(Error::Disconnected));
        assert!(gamma_plus_line(&Multigraph::cycle(4)).is_err());
    }

    #[test]
    fn cut_examples() {
        assert!(close(
            gamma_cut_exact(&Multigraph::complete(4)).unwrap(),
            0.75,
            1e-12
        ));
        assert!(close(
            gamma_cut_exact(&Multigraph::cycle(4)).unwrap(),
            1.0,
            1e-12
        ));
        let two = Multigraph::cycle(3).disjoint_union(&Multigraph::cycle(3));
        assert_eq!(gamma_cut_exact(&two).unwrap(), f64::INFINITY);
    }

    #[test]
    fn k4_two_two_cut() {
        let x = FiniteMetric::line(&[0.0, 1.0]);
        let r = poincare_ratio(&Multigraph::complete(4), &x, &[0, 0, 1, 1]).unwrap();
        assert!(close(r, 0.75, 1e-12));
        assert_eq!(
            poincare_ratio(&Multigraph::complete(4), &x, &[1, 1, 1, 1]).unwrap(),
            0.0
        );
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        let g = Multigraph::cycle(6);
        let x = FiniteMetric::line(&[0.0, 1.0, 2.0]);
        let rep = gamma_search(
            &g,
            &x,
            SearchMode::Exhaustive,
            false,
            SearchBudget::default(),
            1,
        )
        .unwrap();
        // Independent brute force: base-3 counter over 729 maps with a direct
        // double sum.
        let mut best: f64 = 0.0;
        for code in 0..729usize {
            let f: Vec<usize> = (0..6).map(|i| (code / 3usize.pow(i as u32)) % 3).collect();
            let mut full = 0.0;
            for u in 0..6 {
                for v in 0..6 {
                    full += (f[u] as f64 - f[v] as f64).powi(2);
                }
            }
            let mut edge = 0.0;
            for u in 0..6 {
                edge += (f[u] as f64 - f[(u + 1) % 6] as f64).powi(2);
            }
            if edge > 0.0 {
                best = best.max((full / 36.0) / (edge / 6.0));
            }
        }
        assert!(close(rep.gamma_estimate, best, 1e-12));
        assert!(rep.exact);
        let pt = FiniteMetric::line(&[0.0]);
        let d = gamma_search(
            &g,
            &pt,
            SearchMode::Local,
            false,
            SearchBudget::default(),
            1,
        )
        .unwrap();
        assert!(d.degenerate && d.gamma_estimate == 0.0);
    }

    #[test]
    fn two_point_search_matches_cut() {
        let x = FiniteMetric::line(&[0.0, 3.0]);
        for g in [
            Multigraph::complete(4),
            Multigraph::cycle(6),
            Multigraph::petersen(),
        ] {
            let rep = gamma_search(
                &g,
                &x,
                SearchMode::Exhaustive,
                false,
                SearchBudget::default(),
                3,
            )
            .unwrap();
            assert!(close(
                rep.gamma_estimate,
                gamma_cut_exact(&g).unwrap(),
                1e-12
            ));
        }
    }

    #[test]
    fn local_search_witness_recomputes() {
        let g = Multigraph::petersen();
        let x = FiniteMetric::line(&[0.0, 1.0, 2.5, 4.0]);
        for plus in [false, true] {
            let rep = gamma_search(
                &g,
                &x,
                SearchMode::Local,
                plus,
                SearchBudget {
                    restarts: 5,
                    ..Default::default()
                },
                9,
            )
            .unwrap();
            let again = if plus {
                ratio_plus(&g, &x, &rep.f, rep.h.as_ref().unwrap()).unwrap()
            } else {
                poincare_ratio(&g, &x, &rep.f).unwrap()
            };
            assert!(close(rep.gamma_estimate, again, 1e-9));
            assert!(
                rep.gamma_estimate
                    <= if plus {
                        gamma_plus_line(&g).unwrap()
                    } else {
                        gamma_line(&g).unwrap()
                    } + 1e-9
            );
        }
    }

    #[test]
    fn plus_dominates_single_map() {
        let g = Multigraph::cycle(5);
        let x = FiniteMetric::line(&[0.0, 1.0]);
        let a = gamma_search(
            &g,
            &x,
            SearchMode::Exhaustive,
            false,
            SearchBudget::default(),
            0,
        )
        .unwrap();
        let b = gamma_search(
            &g,
            &x,
            SearchMode::Exhaustive,
            true,
            SearchBudget::default(),
            0,
        )
        .unwrap();
        assert!(a.gamma_estimate <= b.gamma_estimate + 1e-12);
    }

    #[test]
    fn cheeger_examples() {
        let x2 = FiniteMetric::line(&[0.0, 1.0]);
        let rep = cheeger_check(&Multigraph::complete(4), &x2, 0).unwrap();
        assert!(close(rep.gamma_x, 0.75, 1e-12));
        assert!(close(rep.inv_sqrt_gap, 3f64.sqrt() / 2.0, 1e-12));
        assert!(rep.consistent);
        assert!(cheeger_check(&Multigraph::complete(4), &FiniteMetric::line(&[0.0]), 0).is_err());
    }

    #[test]
    fn extrapolation_on_cycles_shrinks() {
        let a = l1_extrapolation_check(&Multigraph::cycle(8), 2, 4, 2, 1).unwrap();
        let b = l1_extrapolation_check(&Multigraph::cycle(16), 2, 4, 2, 1).unwrap();
        assert!(a.quotient.is_finite() && b.quotient < a.quotient);
    }
}
