//! Zigzag and replacement products, edge completion, Cesàro averages, the
//! three-regular pipeline `G*` and the zigzag iteration.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::multigraph::{Multigraph, RotationMap};
use crate::rng::{child_seed, seeded};
use crate::spectral::extreme_eigenvalues;
use crate::{Error, Result};

fn rotation_of(g: &Multigraph, what: &str) -> Result<RotationMap> {
    g.rotation()
        .cloned()
        .ok_or_else(|| Error::Rotation(format!("{what} carries no rotation map")))
}

/// Zigzag product `g1 ⓩ g2` on vertices `(v, k) ↦ v·d1 + k`, ports
/// `(i, j) ↦ i·d2 + j`.
pub fn zigzag(g1: &Multigraph, g2: &Multigraph) -> Result<Multigraph> {
    let d1 = g1.regular_degree().ok_or(Error::NotRegular)?;
    let d2 = g2.regular_degree().ok_or(Error::NotRegular)?;
    if g2.n() != d1 {
        return Err(Error::Precondition(format!(
            "second factor has {} vertices, expected {d1}",
            g2.n()
        )));
    }
    let r1 = rotation_of(g1, "first factor")?;
    let r2 = rotation_of(g2, "second factor")?;
    let n = g1.n() * d1;
    let dd = d2 * d2;
    let mut table = vec![(0u32, 0u32); n * dd];
    for v in 0..g1.n() {
        for k in 0..d1 {
            for i in 0..d2 {
                let (k1, i1) = r2.get(k, i);
                let (w, l) = r1.get(v, k1 as usize);
                for j in 0..d2 {
                    let (l1, j1) = r2.get(l as usize, j);
                    table[(v * d1 + k) * dd + i * d2 + j] =
                        (w * d1 as u32 + l1, j1 * d2 as u32 + i1);
                }
            }
        }
    }
    Ok(Multigraph::from_rotation(RotationMap::new(n, dd, table)?))
}

/// Replacement product `g1 ⓡ g2`: ports `0..d2` follow `g2` inside the
/// cloud, port `d2` follows `g1` between clouds.
pub fn replacement(g1: &Multigraph, g2: &Multigraph) -> Result<Multigraph> {
    let d1 = g1.regular_degree().ok_or(Error::NotRegular)?;
    let d2 = g2.regular_degree().ok_or(Error::NotRegular)?;
    if g2.n() != d1 {
        return Err(Error::Precondition(format!(
            "second factor has {} vertices, expected {d1}",
            g2.n()
        )));
    }
    let r1 = rotation_of(g1, "first factor")?;
    let r2 = g2
        .clone()
        .with_canonical_rotation()?
        .rotation()
        .cloned()
        .expect("canonical");
    let n = g1.n() * d1;
    let deg = d2 + 1;
    let mut table = vec![(0u32, 0u32); n * deg];
    for v in 0..g1.n() {
        for k in 0..d1 {
            let x = v * d1 + k;
            for i in 0..d2 {
                let (k1, i1) = r2.get(k, i);
                table[x * deg + i] = ((v * d1) as u32 + k1, i1);
            }
            let (w, l) = r1.get(v, k);
            table[x * deg + d2] = (w * d1 as u32 + l, d2 as u32);
        }
    }
    Ok(Multigraph::from_rotation(RotationMap::new(n, deg, table)?))
}

/// `D`-regular completion: `⌊D/d⌋` copies of every edge plus `D mod d`
/// extra loops per vertex. Carries the canonical rotation map.
pub fn edge_completion(g: &Multigraph, target: usize) -> Result<Multigraph> {
    let d = g.regular_degree().ok_or(Error::NotRegular)?;
    if target < d {
        return Err(Error::Precondition(format!(
            "target degree {target} below {d}"
        )));
    }
    if target == d {
        return g.clone().with_canonical_rotation();
    }
    let q = (target / d) as u32;
    let r = (target % d) as u32;
    let mut edges: Vec<(usize, usize, u32)> = g
        .edge_list()
        .into_iter()
        .map(|(u, v, m)| (u, v, m * q))
        .collect();
    if r > 0 {
        edges.extend((0..g.n()).map(|u| (u, u, r)));
    }
    Multigraph::from_edges(g.n(), &edges)?.with_canonical_rotation()
}

/// `m`-th Cesàro average: `E(u,v) = Σ_{t<m} d^{m−1−t} W_t(u,v)` where
/// `W_t` counts walks of length `t`. Carries the canonical rotation map.
pub fn cesaro(g: &Multigraph, m: usize) -> Result<Multigraph> {
    let d = g.regular_degree().ok_or(Error::NotRegular)? as u64;
    if m == 0 {
        return Err(Error::Precondition("Cesàro order must be positive".into()));
    }
    let n = g.n();
    let overflow = || Error::Overflow(format!("walk counts for m={m}, d={d}"));
    let degree = (m as u64)
        .checked_mul(d.checked_pow(m as u32 - 1).ok_or_else(overflow)?)
        .ok_or_else(overflow)?;
    if degree > u32::MAX as u64 {
        return Err(overflow());
    }
    let mut powers = vec![1u64; m];
    for t in (0..m.saturating_sub(1)).rev() {
        powers[t] = powers[t + 1] * d;
    }
    let mut edges = Vec::new();
    let mut walk = vec![0u64; n];
    let mut next = vec![0u64; n];
    let mut acc = vec![0u64; n];
    for u in 0..n {
        walk.iter_mut().for_each(|x| *x = 0);
        acc.iter_mut().for_each(|x| *x = 0);
        walk[u] = 1;
        for (t, &p) in powers.iter().enumerate() {
            for v in 0..n {
                if walk[v] > 0 {
                    acc[v] = walk[v]
                        .checked_mul(p)
                        .and_then(|x| x.checked_add(acc[v]))
                        .ok_or_else(overflow)?;
                }
            }
            if t + 1 < m {
                next.iter_mut().for_each(|x| *x = 0);
                for v in 0..n {
                    if walk[v] == 0 {
                        continue;
                    }
                    for (w, k) in g.row(v) {
                        let add = walk[v].checked_mul(k as u64).ok_or_else(overflow)?;
                        next[w as usize] =
                            next[w as usize].checked_add(add).ok_or_else(overflow)?;
                    }
                }
                core::mem::swap(&mut walk, &mut next);
            }
        }
        for v in u..n {
            if acc[v] > 0 {
                edges.push((u, v, acc[v] as u32));
            }
        }
    }
    let out = Multigraph::from_edges(n, &edges)?;
    out.validate(Some(degree as usize))?;
    out.with_canonical_rotation()
}

/// First stage of the `G*` pipeline: a `4d`-regular graph built from a
/// `d`-regular input.
pub trait ConversionHook {
    fn name(&self) -> &str;
    fn apply(&self, g: &Multigraph, d: usize) -> Result<Multigraph>;
}

/// Edge completion to degree `4d` on the same vertex set.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompletionHook;

impl ConversionHook for CompletionHook {
    fn name(&self) -> &str {
        "edge-completion"
    }

    fn apply(&self, g: &Multigraph, d: usize) -> Result<Multigraph> {
        edge_completion(g, 4 * d)
    }
}

#[derive(Clone, Debug)]
pub struct StarResult {
    pub graph: Multigraph,
    pub hook: String,
    /// Vertex count after the conversion stage.
    pub converted_vertices: usize,
    pub vertices: usize,
    /// `18 d |V|`, the size reached when the conversion halves the vertex set.
    pub halved_size: usize,
}

/// `G* = (G′ ⓩ C°_{4d}) ⓡ C_9` where `G′` is produced by `hook`.
pub fn star_transform(g: &Multigraph, d: usize, hook: &dyn ConversionHook) -> Result<StarResult> {
    if d < 3 {
        return Err(Error::Precondition(format!("degree {d} below 3")));
    }
    let n = g.n();
    if n < 6 || n % 2 == 1 {
        return Err(Error::Precondition(format!(
            "vertex count {n} must be even and at least 6"
        )));
    }
    g.validate(Some(d))?;
    let conv = hook.apply(g, d)?.with_canonical_rotation()?;
    conv.validate(Some(4 * d))?;
    let small = Multigraph::looped_cycle(4 * d).with_canonical_rotation()?;
    let z = zigzag(&conv, &small)?;
    let out = replacement(&z.with_canonical_rotation()?, &Multigraph::cycle(9))?;
    let vertices = out.n();
    if vertices != 36 * d * conv.n() {
        return Err(Error::Precondition(format!(
            "pipeline produced {vertices} vertices"
        )));
    }
    out.validate(Some(3))?;
    Ok(StarResult {
        graph: out,
        hook: hook.name().into(),
        converted_vertices: conv.n(),
        vertices,
        halved_size: 18 * d * n,
    })
}

#[derive(Clone, Debug)]
pub struct IterationRecipe {
    pub base: Multigraph,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct IterationOutput {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub w: Vec<Multigraph>,
    pub g: Vec<Multigraph>,
}

/// Largest `m` with `d^{3m} ≤ n`.
pub fn iteration_m(n: usize, d: usize) -> usize {
    let mut m = 0usize;
    let mut p: u128 = 1;
    let d3 = (d as u128).pow(3);
    while p * d3 <= n as u128 {
        p *= d3;
        m += 1;
    }
    m
}

impl IterationRecipe {
    pub fn new(base: Multigraph, depth: usize) -> Result<Self> {
        let d = base.regular_degree().ok_or(Error::NotRegular)?;
        let n = base.n();
        if d < 3 || n < 3 {
            return Err(Error::Precondition("need n, d ≥ 3".into()));
        }
        if (n as u128) < (d as u128).pow(3) {
            return Err(Error::Precondition(format!(
                "n = {n} is below d³ = {}",
                d * d * d
            )));
        }
        if base.rotation().is_none() {
            return Err(Error::Rotation("base graph carries no rotation map".into()));
        }
        Ok(IterationRecipe { base, depth })
    }

    pub fn m(&self) -> usize {
        iteration_m(self.base.n(), self.base.regular_degree().unwrap_or(0))
    }
}

/// `W_1 = C_{d²}(H)`, `W_{j+1} = C_n(A_m(W_j)) ⓩ H`, `G_j = (W_j ⓩ C°_{d²}) ⓡ C_9`.
pub fn zigzag_iteration(recipe: &IterationRecipe) -> Result<IterationOutput> {
    let h = &recipe.base;
    let d = h.regular_degree().ok_or(Error::NotRegular)?;
    let n = h.n();
    let m = recipe.m();
    let cap = (m as u128) * (d as u128).pow(2 * (m as u32 - 1));
    if cap > n as u128 {
        return Err(Error::Precondition(format!(
            "m·d^(2(m−1)) = {cap} exceeds n = {n}"
        )));
    }
    let mut out = IterationOutput {
        n,
        d,
        m,
        w: Vec::new(),
        g: Vec::new(),
    };
    if recipe.depth == 0 {
        return Ok(out);
    }
    let small = Multigraph::looped_cycle(d * d).with_canonical_rotation()?;
    let c9 = Multigraph::cycle(9);
    let mut w = edge_completion(h, d * d)?;
    for j in 1..=recipe.depth {
        let size = (n as u128).pow(j as u32);
        if w.n() as u128 != size {
            return Err(Error::Precondition(format!(
                "|W_{j}| = {} but n^j = {size}",
                w.n()
            )));
        }
        w.validate(Some(d * d))?;
        let gj = replacement(&zigzag(&w, &small)?, &c9)?;
        if gj.n() as u128 != 9 * (d * d) as u128 * size {
            return Err(Error::Precondition(format!("|G_{j}| = {}", gj.n())));
        }
        gj.validate(Some(3))?;
        let next = if j < recipe.depth {
            Some(zigzag(&edge_completion(&cesaro(&w, m)?, n)?, h)?)
        } else {
            None
        };
        out.w.push(w);
        out.g.push(gj);
        match next {
            Some(x) => w = x,
            None => break,
        }
    }
    Ok(out)
}

/// Random `d`-regular graph from a uniform matching of the `n·d` ports;
/// when `n·d` is odd one port stays fixed and becomes a single loop.
pub fn random_rotation_graph(n: usize, d: usize, seed: u64) -> Result<Multigraph> {
    if n == 0 || d == 0 {
        return Err(Error::Precondition("empty graph".into()));
    }
    let mut rng = seeded(seed);
    let total = n * d;
    let mut ports: Vec<u32> = (0..total as u32).collect();
    ports.shuffle(&mut rng);
    let mut table = vec![(0u32, 0u32); total];
    let split = |p: u32| (p / d as u32, p % d as u32);
    if total % 2 == 1 {
        let p = ports.pop().expect("nonempty");
        table[p as usize] = split(p);
    }
    for pair in ports.chunks(2) {
        table[pair[0] as usize] = split(pair[1]);
        table[pair[1] as usize] = split(pair[0]);
    }
    Ok(Multigraph::from_rotation(RotationMap::new(n, d, table)?))
}

/// Connected sample with the smallest `λ₂` over `trials` seeds.
pub fn best_base_graph(n: usize, d: usize, trials: usize, seed: u64) -> Result<(Multigraph, f64)> {
    let mut best: Option<(Multigraph, f64)> = None;
    for t in 0..trials {
        let g = random_rotation_graph(n, d, child_seed(seed, t as u64))?;
        if !g.is_connected() {
            continue;
        }
        let (l2, _) = extreme_eigenvalues(&g)?;
        if best.as_ref().is_none_or(|b| l2 < b.1) {
            best = Some((g, l2));
        }
    }
    best.ok_or_else(|| Error::Infeasible(format!("no connected sample in {trials} trials")))
}

/// Boxed hook, for callers choosing the conversion at run time.
pub fn default_hook() -> Box<dyn ConversionHook> {
    Box::new(CompletionHook)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{gamma_plus_line, normalized_adjacency, spectrum};

    fn gp(g: &Multigraph) -> Option<f64> {
        gamma_plus_line(g).ok()
    }

    #[test]
    fn zigzag_sizes() {
        let g1 = random_rotation_graph(10, 4, 1).unwrap();
        let g2 = Multigraph::looped_cycle(4)
            .with_canonical_rotation()
            .unwrap();
        let z = zigzag(&g1, &g2).unwrap();
        assert_eq!(z.n(), 40);
        z.validate(Some(9)).unwrap();
        assert!(zigzag(&g1.clone().without_rotation(), &g2).is_err());
        assert!(zigzag(
            &g1,
            &Multigraph::looped_cycle(5)
                .with_canonical_rotation()
                .unwrap()
        )
        .is_err());
    }

    #[test]
    fn zigzag_of_loops_is_loops() {
        let loops = |n: usize, d: u32| {
            Multigraph::from_edges(n, &(0..n).map(|i| (i, i, d)).collect::<Vec<_>>())
                .unwrap()
                .with_canonical_rotation()
                .unwrap()
        };
        let z = zigzag(&loops(5, 3), &loops(3, 2)).unwrap();
        assert!((0..z.n()).all(|u| z.loops(u) == 4));
    }

    #[test]
    fn zigzag_submultiplicative() {
        let g2 = Multigraph::looped_cycle(4)
            .with_canonical_rotation()
            .unwrap();
        let b = gp(&g2).unwrap();
        let mut checked = 0;
        for s in 0..20 {
            let g1 = random_rotation_graph(8, 4, s).unwrap();
            let (Some(a), Ok(z)) = (gp(&g1), zigzag(&g1, &g2)) else {
                continue;
            };
            let c = gp(&z).unwrap();
            assert!(c <= a * b * b + 1e-9, "{c} > {a}·{b}²");
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn replacement_sizes() {
        let g1 = random_rotation_graph(12, 9, 3).unwrap();
        let r = replacement(&g1, &Multigraph::cycle(9)).unwrap();
        assert_eq!(r.n(), 108);
        r.validate(Some(3)).unwrap();
        let two_loops = Multigraph::from_edges(1, &[(0, 0, 2)])
            .unwrap()
            .with_canonical_rotation()
            .unwrap();
        assert!(replacement(&two_loops, &Multigraph::cycle(3)).is_err());
    }

    #[test]
    fn completion_examples() {
        let c = edge_completion(&Multigraph::cycle(9), 3).unwrap();
        assert_eq!(c.without_rotation(), Multigraph::looped_cycle(9));
        let p = Multigraph::petersen();
        assert_eq!(edge_completion(&p, 3).unwrap().without_rotation(), p);
        assert!(edge_completion(&p, 2).is_err());
        let g = random_rotation_graph(16, 3, 5).unwrap();
        if let Some(a) = gp(&g) {
            let b = gp(&edge_completion(&g, 7).unwrap()).unwrap();
            assert!(b <= 2.0 * a + 1e-9);
        }
    }

    #[test]
    fn cesaro_examples() {
        let one = cesaro(&Multigraph::petersen(), 1).unwrap();
        assert!((0..10).all(|u| one.loops(u) == 1 && one.degree(u) == 1));
        let two = cesaro(&Multigraph::petersen(), 2).unwrap();
        let mut want: Vec<(usize, usize, u32)> = Multigraph::petersen().edge_list();
        want.extend((0..10).map(|u| (u, u, 3)));
        assert_eq!(
            two.without_rotation(),
            Multigraph::from_edges(10, &want).unwrap()
        );
        cesaro(&Multigraph::petersen(), 3)
            .unwrap()
            .validate(Some(27))
            .unwrap();
    }

    #[test]
    fn cesaro_is_mean_of_powers() {
        let g = random_rotation_graph(12, 3, 11).unwrap();
        let m = 4;
        let c = cesaro(&g, m).unwrap();
        let a = normalized_adjacency(&g).unwrap();
        let ac = normalized_adjacency(&c).unwrap();
        let mut pw = crate::linalg::Dense::identity(12);
        let mut mean = crate::linalg::Dense::zeros(12);
        for _ in 0..m {
            for i in 0..12 {
                for j in 0..12 {
                    mean.set(i, j, mean.get(i, j) + pw.get(i, j) / m as f64);
                }
            }
            pw = pw.mul(&a);
        }
        for i in 0..12 {
            for j in 0..12 {
                assert!((mean.get(i, j) - ac.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cesaro_overflow() {
        assert!(matches!(
            cesaro(&Multigraph::complete(40), 8),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn small_factor_bounds() {
        assert!(gp(&Multigraph::cycle(9)).unwrap() <= 648.0);
        for d in 3..=8 {
            assert!(gp(&Multigraph::looped_cycle(4 * d)).unwrap() <= 192.0 * (d * d) as f64);
        }
    }

    struct Halving;
    impl ConversionHook for Halving {
        fn name(&self) -> &str {
            "halving"
        }
        fn apply(&self, g: &Multigraph, d: usize) -> Result<Multigraph> {
            random_rotation_graph(g.n() / 2, 4 * d, 0)
        }
    }

    #[test]
    fn star_sizes() {
        let g = random_rotation_graph(20, 4, 2).unwrap();
        let s = star_transform(&g, 4, &CompletionHook).unwrap();
        assert_eq!(s.vertices, 36 * 4 * 20);
        let h = star_transform(&g, 4, &Halving).unwrap();
        assert_eq!(h.vertices, h.halved_size);
        assert!(h.graph.regular_degree() == Some(3));
        assert!(
            star_transform(&random_rotation_graph(7, 4, 2).unwrap(), 4, &CompletionHook).is_err()
        );
    }

    #[test]
    fn iteration_sizes() {
        assert_eq!(iteration_m(27, 3), 1);
        assert_eq!(iteration_m(26, 3), 0);
        assert_eq!(iteration_m(729, 3), 2);
        let (h, _) = best_base_graph(27, 3, 5, 1).unwrap();
        let r = IterationRecipe::new(h.clone(), 2).unwrap();
        let out = zigzag_iteration(&r).unwrap();
        assert_eq!(out.g[0].n(), 2187);
        assert_eq!(out.g[1].n(), 2187 * 27);
        assert_eq!(out.w[1].n(), 729);
        let empty = zigzag_iteration(&IterationRecipe::new(h, 0).unwrap()).unwrap();
        assert!(empty.g.is_empty());
        assert!(IterationRecipe::new(random_rotation_graph(20, 3, 0).unwrap(), 1).is_err());
    }

    #[test]
    fn odd_port_count_gives_one_loop() {
        let g = random_rotation_graph(27, 3, 4).unwrap();
        let loops: u32 = (0..27).map(|u| g.loops(u)).sum();
        assert_eq!(loops % 2, 1);
        g.validate(Some(3)).unwrap();
        assert!(spectrum(&g).unwrap()[0] > 1.0 - 1e-12);
    }
}
