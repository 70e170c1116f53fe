//! Euclidean cones over finite metric spaces, graph-family unions `U_F`,
//! cusp retractions and the cone comparison inequalities as predicates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::linalg::Dense;
use crate::math::{abs, cos, sin, sq, sqrt, PI};
use crate::multigraph::{Multigraph, SimplicialMetric, SimplicialPoint};
use crate::rng::{child_seed, seeded};
use crate::spectral::{check_stochastic, gamma_plus_matrix, FiniteMetric};
use crate::{Error, Result};

/// A point `(s, x)` of `Cone(X)`; every point with `s = 0` is the cusp.
#[derive(Clone, Copy, Debug)]
pub struct ConePoint {
    pub s: f64,
    pub base: usize,
}

impl ConePoint {
    pub const CUSP: ConePoint = ConePoint { s: 0.0, base: 0 };

    pub fn new(s: f64, base: usize) -> Self {
        ConePoint { s, base }
    }

    pub fn is_cusp(&self) -> bool {
        self.s == 0.0
    }
}

impl PartialEq for ConePoint {
    fn eq(&self, o: &Self) -> bool {
        (self.is_cusp() && o.is_cusp()) || (self.s == o.s && self.base == o.base)
    }
}

/// Cone distance for base distance `dx`:
/// `√((s − t)² + 2st(1 − cos min{π, dx}))`.
#[inline]
pub fn cone_formula(s: f64, t: f64, dx: f64) -> f64 {
    let th = dx.min(PI);
    sqrt(sq(s - t) + 2.0 * s * t * (1.0 - cos(th)))
}

pub fn cone_distance(x: &FiniteMetric, p: ConePoint, q: ConePoint) -> Result<f64> {
    for c in [p, q] {
        if !(c.s >= 0.0) || !c.s.is_finite() {
            return Err(Error::Precondition(format!(
                "radius {} is not a finite nonnegative number",
                c.s
            )));
        }
        if !c.is_cusp() && c.base >= x.len() {
            return Err(Error::Precondition(format!(
                "base point {} out of range",
                c.base
            )));
        }
    }
    if p.is_cusp() || q.is_cusp() {
        return Ok(p.s + q.s);
    }
    Ok(cone_formula(p.s, q.s, x.get(p.base, q.base)))
}

/// Points of the finite cone: the cusp first, then `(r, x)` for every
/// radius (outer) and base point (inner). Zero radii are dropped.
pub fn cone_points(x: &FiniteMetric, radii: &[f64]) -> Vec<ConePoint> {
    let mut pts = vec![ConePoint::CUSP];
    for &r in radii.iter().filter(|&&r| r > 0.0) {
        pts.extend((0..x.len()).map(|i| ConePoint::new(r, i)));
    }
    pts
}

/// Largest support on which [`cone_metric`] runs the cubic metric check.
pub const CHECK_LIMIT: usize = 400;

/// Distance matrix of the finite cone over `x` with the given radii.
pub fn cone_metric(x: &FiniteMetric, radii: &[f64]) -> Result<FiniteMetric> {
    if radii.is_empty() {
        return Err(Error::Precondition("no radii".into()));
    }
    if radii.iter().any(|&r| !(r >= 0.0) || !r.is_finite()) {
        return Err(Error::Precondition(
            "radii must be finite and nonnegative".into(),
        ));
    }
    let pts = cone_points(x, radii);
    let m = FiniteMetric::from_fn(pts.len(), |i, j| {
        cone_distance(x, pts[i], pts[j]).expect("valid points")
    });
    if pts.len() <= CHECK_LIMIT {
        m.check()?;
    }
    Ok(m)
}

/// `{r0 · 2^k : 0 ≤ k < count}`.
pub fn geometric_radii(r0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| r0 * (1u64 << k) as f64).collect()
}

/// `α_A`: identity on points over `A`, cusp elsewhere.
pub fn cusp_retraction(in_a: &[bool], p: ConePoint) -> ConePoint {
    if !p.is_cusp() && in_a[p.base] {
        p
    } else {
        ConePoint::CUSP
    }
}

/// Pairs of cone points drawn from four strata in turn: uniform radii,
/// one point near the cusp, base points at distance `≥ π`, equal radii.
pub fn sample_pairs(x: &FiniteMetric, count: usize, seed: u64) -> Vec<(ConePoint, ConePoint)> {
    let n = x.len();
    let mut rng = seeded(seed);
    let mut far = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if x.get(i, j) >= PI {
                far.push((i, j));
            }
        }
    }
    let mut out = Vec::with_capacity(count);
    let radius = |rng: &mut crate::rng::Rng| crate::math::exp(rng.gen_range(-4.0..4.0));
    for k in 0..count {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (s, t) = (radius(&mut rng), radius(&mut rng));
        let pair = match k % 4 {
            0 => (ConePoint::new(s, i), ConePoint::new(t, j)),
            1 => (ConePoint::new(s * 1e-6, i), ConePoint::new(t, j)),
            2 if !far.is_empty() => {
                let (a, b) = far[rng.gen_range(0..far.len())];
                (ConePoint::new(s, a), ConePoint::new(t, b))
            }
            _ => (ConePoint::new(s, i), ConePoint::new(s, j)),
        };
        out.push(pair);
    }
    out
}

/// `d / max{|s − t|, max{s,t} √(2(1 − cos θ))}`, which lies in `[1/3, √2]`.
pub fn comparison_ratio(s: f64, t: f64, dx: f64) -> f64 {
    let th = dx.min(PI);
    let m = abs(s - t).max(s.max(t) * sqrt(2.0 * (1.0 - cos(th))));
    cone_formula(s, t, dx) / m
}

/// Slack of `d ≥ max{s,t} sin(min{π/2, dx})`; nonnegative when it holds.
pub fn sinus_slack(s: f64, t: f64, dx: f64) -> f64 {
    cone_formula(s, t, dx) - s.max(t) * sin(dx.min(PI / 2.0))
}

/// Lipschitz bound `√(diam² ‖f‖²_Lip + 2‖f‖²_∞)` for `(s,x) ↦ (f(x)s, x)`.
pub fn rescaling_bound(diam: f64, lip: f64, sup: f64) -> f64 {
    sqrt(sq(diam * lip) + 2.0 * sq(sup))
}

/// `2θ²/π² ≤ 1 − cos θ ≤ θ²/2`.
pub fn cosine_sandwich(theta: f64) -> bool {
    let c = 1.0 - cos(theta);
    2.0 * theta * theta / (PI * PI) <= c + 1e-15 && c <= theta * theta / 2.0 + 1e-15
}

/// Largest ratio `d(F p, F q) / d(p, q)` over the pairs, for the rescaling
/// `F(s, x) = (f(x) s, x)`.
pub fn rescaling_lipschitz(x: &FiniteMetric, f: &[f64], pairs: &[(ConePoint, ConePoint)]) -> f64 {
    let mut worst: f64 = 0.0;
    for &(p, q) in pairs {
        let d = cone_distance(x, p, q).expect("valid pair");
        if d == 0.0 {
            continue;
        }
        let fp = ConePoint::new(f[p.base] * p.s, p.base);
        let fq = ConePoint::new(f[q.base] * q.s, q.base);
        worst = worst.max(cone_distance(x, fp, fq).expect("valid pair") / d);
    }
    worst
}

/// Ratio range of the lifted map `(s, x) ↦ (s, f(x))` from `Cone(X)` to `Cone(Y)`.
pub fn lift_ratios(
    x: &FiniteMetric,
    y: &FiniteMetric,
    f: &[usize],
    pairs: &[(ConePoint, ConePoint)],
) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &(p, q) in pairs {
        if p.is_cusp() || q.is_cusp() {
            continue;
        }
        let d = cone_distance(x, p, q).expect("valid pair");
        if d == 0.0 {
            continue;
        }
        let e = cone_formula(p.s, q.s, y.get(f[p.base], f[q.base]));
        lo = lo.min(e / d);
        hi = hi.max(e / d);
    }
    (lo, hi)
}

#[derive(Clone, Debug, Default)]
pub struct LemmaReport {
    pub pairs: usize,
    pub comparison_min: f64,
    pub comparison_max: f64,
    pub sinus_violations: usize,
    pub triangle_checked: usize,
    pub triangle_violations: usize,
}

/// Evaluates the comparison and sine bounds on `pairs` and the triangle
/// inequality on `triples` random triples built from them.
pub fn lemma_report(
    x: &FiniteMetric,
    pairs: &[(ConePoint, ConePoint)],
    triples: usize,
    seed: u64,
) -> LemmaReport {
    let mut rep = LemmaReport {
        pairs: pairs.len(),
        comparison_min: f64::INFINITY,
        ..Default::default()
    };
    for &(p, q) in pairs {
        if p == q || p.is_cusp() || q.is_cusp() {
            continue;
        }
        let dx = x.get(p.base, q.base);
        let r = comparison_ratio(p.s, q.s, dx);
        rep.comparison_min = rep.comparison_min.min(r);
        rep.comparison_max = rep.comparison_max.max(r);
        if sinus_slack(p.s, q.s, dx) < -1e-12 * (p.s + q.s) {
            rep.sinus_violations += 1;
        }
    }
    let mut rng = seeded(seed);
    for _ in 0..triples {
        let pick = |rng: &mut crate::rng::Rng| {
            let (a, b) = pairs[rng.gen_range(0..pairs.len())];
            if rng.gen::<bool>() {
                a
            } else {
                b
            }
        };
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let ab = cone_distance(x, a, b).expect("valid");
        let bc = cone_distance(x, b, c).expect("valid");
        let ac = cone_distance(x, a, c).expect("valid");
        rep.triangle_checked += 1;
        if ac > ab + bc + 1e-12 * (ab + bc).max(1.0) {
            rep.triangle_violations += 1;
        }
    }
    rep
}

struct Component {
    metric: SimplicialMetric,
    girth: usize,
    diameter: u32,
}

/// `U_F`: disjoint union of rescaled `Σ(G)`, with every cross distance `2π(R + 1)`.
pub struct GraphFamilyMetric {
    comps: Vec<Component>,
    r: f64,
}

/// A point of `U_F`: component index and point of its `Σ(G)`.
pub type FamilyPoint = (usize, SimplicialPoint);

/// Builds `U_F`. With `r = None` the bound is the largest `diam/girth`.
pub fn family_union(graphs: &[Multigraph], r: Option<f64>) -> Result<GraphFamilyMetric> {
    let mut comps = Vec::with_capacity(graphs.len());
    let mut worst: f64 = 0.0;
    for g in graphs {
        let metric = SimplicialMetric::new(g)?;
        let girth = g.girth();
        let diameter = metric.metrics().diameter;
        if girth == 0 {
            return Err(Error::Precondition("component without edges".into()));
        }
        worst = worst.max(diameter as f64 / girth as f64);
        comps.push(Component {
            metric,
            girth,
            diameter,
        });
    }
    let r = match r {
        Some(r) if r + 1e-12 < worst => {
            return Err(Error::Precondition(format!(
                "a component has diam/girth = {worst} above R = {r}"
            )));
        }
        Some(r) => r,
        None => worst,
    };
    Ok(GraphFamilyMetric { comps, r })
}

impl GraphFamilyMetric {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn cross_distance(&self) -> f64 {
        2.0 * PI * (self.r + 1.0)
    }

    pub fn girth(&self, c: usize) -> usize {
        self.comps[c].girth
    }

    pub fn diameter(&self, c: usize) -> u32 {
        self.comps[c].diameter
    }

    pub fn distance(&self, p: FamilyPoint, q: FamilyPoint) -> f64 {
        if p.0 != q.0 {
            return self.cross_distance();
        }
        let c = &self.comps[p.0];
        2.0 * PI * c.metric.distance(p.1, q.1) / c.girth as f64
    }

    pub fn finite(&self, points: &[FamilyPoint]) -> FiniteMetric {
        FiniteMetric::from_fn(points.len(), |i, j| self.distance(points[i], points[j]))
    }

    /// Distortion of `x ↦ (1/√2, x)` from `Σ(G_c)` into `Cone(U_F)` over
    /// the given points of component `c`.
    pub fn slice_distortion(&self, c: usize, points: &[SimplicialPoint]) -> f64 {
        let comp = &self.comps[c];
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let s = 1.0 / crate::math::sqrt(2.0);
        for (i, &p) in points.iter().enumerate() {
            for &q in &points[i + 1..] {
                let d = comp.metric.distance(p, q);
                if d == 0.0 {
                    continue;
                }
                let e = cone_formula(s, s, self.distance((c, p), (c, q)));
                lo = lo.min(e / d);
                hi = hi.max(e / d);
            }
        }
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }
}

/// `min{π, d}`, which leaves the cone unchanged.
pub fn truncate_pi(x: &FiniteMetric) -> FiniteMetric {
    FiniteMetric::from_fn(x.len(), |i, j| x.get(i, j).min(PI))
}

fn sub_metric(x: &FiniteMetric, idx: &[usize]) -> FiniteMetric {
    FiniteMetric::from_fn(idx.len(), |i, j| x.get(idx[i], idx[j]))
}

fn cone_gamma(
    m: &Dense,
    x: &FiniteMetric,
    idx: &[usize],
    radii: &[f64],
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    if idx.is_empty() {
        return Ok(0.0);
    }
    let c = cone_metric(&sub_metric(x, idx), radii)?;
    Ok(gamma_plus_matrix(m, &c, restarts, seed).0)
}

/// Constant `(κλ)² = 3π² · 72π²` of the two-piece bound, before `/β⁴`.
pub const UNION_CONSTANT: f64 = 216.0 * PI * PI * PI * PI;

#[derive(Clone, Debug)]
pub struct UnionReport {
    pub beta: f64,
    pub separation: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    /// Measured lower bound on `γ_+(M, Cone(X))`.
    pub gamma_x: f64,
    /// `UNION_CONSTANT · (γ_A + γ_B) / β⁴`.
    pub bound: f64,
    /// Largest measured Lipschitz ratio of the two scaled maps.
    pub lipschitz: f64,
    /// Smallest `(d_A(𝔞p,𝔞q)² + d_B(𝔟p,𝔟q)²) / d_X(p,q)²`.
    pub sum_of_squares_min: f64,
    /// `β⁴ / (72π²)`.
    pub sum_of_squares_target: f64,
    pub pairs: usize,
}

impl UnionReport {
    pub fn holds(&self) -> bool {
        self.lipschitz <= sqrt(3.0) * PI + 1e-6
            && self.sum_of_squares_min >= self.sum_of_squares_target * (1.0 - 1e-9)
            && self.gamma_x <= self.bound
    }
}

/// Two-piece cone union bound for `X = A ∪ B` with `d(A∖B, B∖A) ≥ β`.
/// Cones are materialised on `radii`; `γ_+` values come from local search.
#[allow(clippy::too_many_arguments)]
pub fn union_poincare_bound(
    m: &Dense,
    x: &FiniteMetric,
    in_a: &[bool],
    in_b: &[bool],
    beta: f64,
    radii: &[f64],
    pairs: usize,
    seed: u64,
) -> Result<UnionReport> {
    check_stochastic(m)?;
    let n = x.len();
    if in_a.len() != n || in_b.len() != n || (0..n).any(|i| !in_a[i] && !in_b[i]) {
        return Err(Error::Precondition("A ∪ B must cover X".into()));
    }
    if !(beta > 0.0 && beta <= PI) {
        return Err(Error::Precondition(format!("β = {beta} outside (0, π]")));
    }
    let only_a: Vec<usize> = (0..n).filter(|&i| in_a[i] && !in_b[i]).collect();
    let only_b: Vec<usize> = (0..n).filter(|&i| in_b[i] && !in_a[i]).collect();
    let mut sep = f64::INFINITY;
    for &i in &only_a {
        for &j in &only_b {
            sep = sep.min(x.get(i, j));
        }
    }
    if sep < beta {
        return Err(Error::Precondition(format!(
            "d(A∖B, B∖A) = {sep} below β = {beta}"
        )));
    }
    let xt = truncate_pi(x);
    let dist_to = |set: &[usize], i: usize| set.iter().map(|&j| xt.get(i, j)).fold(PI, f64::min);
    let fa: Vec<f64> = (0..n).map(|i| dist_to(&only_b, i)).collect();
    let fb: Vec<f64> = (0..n).map(|i| dist_to(&only_a, i)).collect();
    let sample = sample_pairs(&xt, pairs, seed);
    let scaled = |f: &[f64], p: ConePoint| ConePoint::new(f[p.base] * p.s, p.base);
    let mut lip: f64 = 0.0;
    let mut sos = f64::INFINITY;
    for &(p, q) in &sample {
        let d = cone_distance(&xt, p, q)?;
        if d == 0.0 {
            continue;
        }
        let da = cone_distance(&xt, scaled(&fa, p), scaled(&fa, q))?;
        let db = cone_distance(&xt, scaled(&fb, p), scaled(&fb, q))?;
        lip = lip.max(da / d).max(db / d);
        sos = sos.min((da * da + db * db) / (d * d));
    }
    let a_idx: Vec<usize> = (0..n).filter(|&i| in_a[i]).collect();
    let b_idx: Vec<usize> = (0..n).filter(|&i| in_b[i]).collect();
    let all: Vec<usize> = (0..n).collect();
    let restarts = 20;
    let gamma_a = cone_gamma(m, &xt, &a_idx, radii, restarts, child_seed(seed, 1))?;
    let gamma_b = cone_gamma(m, &xt, &b_idx, radii, restarts, child_seed(seed, 2))?;
    let gamma_x = cone_gamma(m, &xt, &all, radii, restarts, child_seed(seed, 3))?;
    let b4 = beta * beta * beta * beta;
    Ok(UnionReport {
        beta,
        separation: sep,
        gamma_a,
        gamma_b,
        gamma_x,
        bound: UNION_CONSTANT * (gamma_a + gamma_b) / b4,
        lipschitz: lip,
        sum_of_squares_min: sos,
        sum_of_squares_target: b4 / (72.0 * PI * PI),
        pairs: sample.len(),
    })
}

#[derive(Clone, Debug)]
pub struct MultiUnionReport {
    pub gamma_pieces: Vec<f64>,
    pub gamma_x: f64,
    /// `2 · max_i γ_+(M, Cone(A_i))`.
    pub bound: f64,
    /// Largest `|d(p,q) − Σ_i d(α_i p, α_i q)|` over the sampled pairs.
    pub l1_defect: f64,
    /// Largest number of nonzero terms in that sum.
    pub max_terms: usize,
}

/// Union of pieces at mutual distance `≥ π`; `piece[i]` labels point `i`.
pub fn multi_union_bound(
    m: &Dense,
    x: &FiniteMetric,
    piece: &[usize],
    radii: &[f64],
    pairs: usize,
    seed: u64,
) -> Result<MultiUnionReport> {
    check_stochastic(m)?;
    let n = x.len();
    if piece.len() != n {
        return Err(Error::Precondition("labels do not cover X".into()));
    }
    for i in 0..n {
        for j in 0..n {
            if piece[i] != piece[j] && x.get(i, j) < PI {
                return Err(Error::Precondition(format!(
                    "points {i} and {j} of different pieces are closer than π"
                )));
            }
        }
    }
    let k = piece.iter().copied().max().map_or(0, |p| p + 1);
    let mut l1_defect: f64 = 0.0;
    let mut max_terms = 0;
    for (p, q) in sample_pairs(x, pairs, seed) {
        let d = cone_distance(x, p, q)?;
        let mut sum = 0.0;
        let mut terms = 0;
        for i in 0..k {
            let mask: Vec<bool> = piece.iter().map(|&c| c == i).collect();
            let t = cone_distance(x, cusp_retraction(&mask, p), cusp_retraction(&mask, q))?;
            if t > 0.0 {
                terms += 1;
            }
            sum += t;
        }
        l1_defect = l1_defect.max(abs(d - sum) / d.max(1e-300));
        max_terms = max_terms.max(terms);
    }
    let mut gamma_pieces = Vec::with_capacity(k);
    for i in 0..k {
        let idx: Vec<usize> = (0..n).filter(|&j| piece[j] == i).collect();
        gamma_pieces.push(cone_gamma(
            m,
            x,
            &idx,
            radii,
            20,
            child_seed(seed, i as u64 + 10),
        )?);
    }
    let all: Vec<usize> = (0..n).collect();
    let gamma_x = cone_gamma(m, x, &all, radii, 20, child_seed(seed, 1))?;
    let bound = 2.0 * gamma_pieces.iter().copied().fold(0.0, f64::max);
    Ok(MultiUnionReport {
        gamma_pieces,
        gamma_x,
        bound,
        l1_defect,
        max_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::normalized_adjacency;

    fn random_metric(n: usize, seed: u64) -> FiniteMetric {
        // Shortest paths over random weights give a metric.
        let mut rng = seeded(seed);
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let w = rng.gen_range(0.2..4.0);
                d[i][j] = w;
                d[j][i] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        FiniteMetric::new(d).unwrap()
    }

    #[test]
    fn distance_examples() {
        let x = FiniteMetric::line(&[0.0, PI / 2.0, 5.0]);
        let d = |s, i, t, j| cone_distance(&x, ConePoint::new(s, i), ConePoint::new(t, j)).unwrap();
        assert!((d(2.0, 1, 5.0, 1) - 3.0).abs() < 1e-15);
        assert!((d(3.0, 0, 4.0, 2) - 7.0).abs() < 1e-12);
        assert!((d(3.0, 0, 4.0, 1) - 5.0).abs() < 1e-12);
        assert!((d(1.0, 0, 1.0, 1) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            cone_distance(&x, ConePoint::CUSP, ConePoint::new(2.5, 1)).unwrap(),
            2.5
        );
        assert_eq!(ConePoint::new(0.0, 1), ConePoint::new(0.0, 2));
        assert!(cone_distance(&x, ConePoint::new(-1.0, 0), ConePoint::CUSP).is_err());
    }

    #[test]
    fn cone_metric_examples() {
        let one = FiniteMetric::line(&[0.0]);
        let c = cone_metric(&one, &[1.0, 2.5]).unwrap();
        assert_eq!(c.get(1, 2), 1.5);
        assert_eq!(c.get(0, 2), 2.5);
        let two = FiniteMetric::line(&[0.0, PI]);
        let c = cone_metric(&two, &[1.0]).unwrap();
        assert!((c.get(1, 2) - 2.0).abs() < 1e-12);
        assert_eq!(c.get(0, 1), 1.0);
        let x = random_metric(8, 3);
        let c = cone_metric(&x, &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(c.len(), 25);
    }

    #[test]
    fn two_point_cone_legs() {
        let x = FiniteMetric::line(&[0.0, PI / 2.0]);
        let c = cone_metric(&x, &[1.0]).unwrap();
        assert!((c.get(1, 2) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(c.get(0, 1), 1.0);
    }

    #[test]
    fn lemma_brackets() {
        let x = random_metric(10, 5);
        let pairs = sample_pairs(&x, 20_000, 1);
        let rep = lemma_report(&x, &pairs, 20_000, 2);
        assert!(
            rep.comparison_min >= 1.0 / 3.0 - 1e-12,
            "{}",
            rep.comparison_min
        );
        assert!(rep.comparison_max <= 2f64.sqrt() + 1e-12);
        assert_eq!(rep.sinus_violations, 0);
        assert_eq!(rep.triangle_violations, 0);
    }

    #[test]
    fn cosine_grid() {
        assert!((0..=10_000).all(|k| cosine_sandwich(PI * k as f64 / 10_000.0)));
    }

    #[test]
    fn rescaling_within_bound() {
        let x = truncate_pi(&random_metric(9, 8));
        let pts: Vec<f64> = (0..9).map(|i| 0.5 + (i as f64 * 0.7).sin().abs()).collect();
        let mut lip: f64 = 0.0;
        for i in 0..9 {
            for j in 0..9 {
                if i != j {
                    lip = lip.max((pts[i] - pts[j]).abs() / x.get(i, j));
                }
            }
        }
        let sup = pts.iter().copied().fold(0.0, f64::max);
        let measured = rescaling_lipschitz(&x, &pts, &sample_pairs(&x, 20_000, 4));
        assert!(measured <= rescaling_bound(x.diameter(), lip, sup) + 1e-9);
    }

    #[test]
    fn lift_of_bilipschitz_map() {
        let x = random_metric(7, 11);
        let y = FiniteMetric::from_fn(7, |i, j| 1.5 * x.get(i, j));
        let id: Vec<usize> = (0..7).collect();
        let (lo, hi) = lift_ratios(&x, &y, &id, &sample_pairs(&x, 5000, 3));
        assert!(lo >= 1.0 - 1e-12 && hi <= 1.5 + 1e-12);
    }

    #[test]
    fn family_examples() {
        let c9 = Multigraph::cycle(9);
        let fam = family_union(&[c9.clone(), c9.clone()], None).unwrap();
        assert!((fam.r() - 4.0 / 9.0).abs() < 1e-12);
        let pts = [
            (0, SimplicialPoint::Vertex(0)),
            (0, SimplicialPoint::Vertex(4)),
            (1, SimplicialPoint::Vertex(0)),
        ];
        let m = fam.finite(&pts);
        assert_eq!(m.get(0, 2), fam.cross_distance());
        assert!((m.get(0, 1) - 2.0 * PI * 4.0 / 9.0).abs() < 1e-12);
        m.check().unwrap();
        assert!(family_union(&[c9], Some(0.1)).is_err());
        let pet = family_union(&[Multigraph::petersen()], None).unwrap();
        let vs: Vec<SimplicialPoint> = (0..10).map(SimplicialPoint::Vertex).collect();
        assert!(pet.slice_distortion(0, &vs) <= PI * (pet.r() + 1.0) / 2.0);
    }

    #[test]
    fn retraction_examples() {
        let x = FiniteMetric::line(&[0.0, 1.0, 5.0, 6.0]);
        let a = [true, true, false, false];
        let p = ConePoint::new(2.0, 1);
        assert_eq!(cusp_retraction(&a, p), p);
        assert!(cusp_retraction(&a, ConePoint::new(2.0, 3)).is_cusp());
        let q = ConePoint::new(1.5, 0);
        assert_eq!(
            cone_distance(&x, cusp_retraction(&a, ConePoint::new(3.0, 2)), q).unwrap(),
            1.5
        );
    }

    #[test]
    fn separated_union() {
        let g = Multigraph::petersen();
        let m = normalized_adjacency(&g).unwrap();
        let x = FiniteMetric::line(&[0.0, 0.7, 1.2, 4.5, 5.0]);
        let rep = multi_union_bound(&m, &x, &[0, 0, 0, 1, 1], &[0.5, 1.0, 2.0], 2000, 1).unwrap();
        assert!(rep.l1_defect < 1e-12);
        assert!(rep.max_terms <= 2);
        assert!(rep.gamma_x <= rep.bound * (1.0 + 1e-9));
        let ab = union_poincare_bound(
            &m,
            &x,
            &[true, true, true, false, false],
            &[false, false, false, true, true],
            PI,
            &[0.5, 1.0, 2.0],
            20_000,
            2,
        )
        .unwrap();
        assert!(ab.holds(), "{ab:?}");
    }

    #[test]
    fn union_overlap_and_rejections() {
        let m = normalized_adjacency(&Multigraph::complete(5)).unwrap();
        let x = FiniteMetric::line(&[0.0, 0.5, 1.0, 1.5, 2.5]);
        let a = [true, true, true, false, false];
        let b = [false, false, true, true, true];
        let rep = union_poincare_bound(&m, &x, &a, &b, 1.0, &[1.0, 2.0], 20_000, 3).unwrap();
        assert!(rep.holds(), "{rep:?}");
        assert!(union_poincare_bound(&m, &x, &a, &b, 1.5, &[1.0], 10, 3).is_err());
        assert!(union_poincare_bound(&m, &x, &a, &[false; 5], 1.0, &[1.0], 10, 3).is_err());
        let whole =
            union_poincare_bound(&m, &x, &[true; 5], &[true; 5], PI, &[1.0], 2000, 3).unwrap();
        assert!(whole.separation.is_infinite() && whole.holds());
    }
}
