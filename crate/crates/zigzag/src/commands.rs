//! One function per subcommand. Each returns the JSON it prints.

use std::path::Path;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use zigzag_core::approximator::{
    build_universal, random_cubic_family, ratio_experiment, spread, RatioConfig, RatioRow,
    TemplateFamily, TupleMode,
};
use zigzag_core::combinators::{zigzag_iteration, IterationRecipe};
use zigzag_core::conegeom::{cone_points, lemma_report};
use zigzag_core::embeddings::{sparse_graph_l1, SparseL1Config};
use zigzag_core::randgraph::{
    kleinberg_experiment, l_class_battery, pairing_sample, uniform_simple_sample, BatteryConfig,
    KleinbergTrial, PermMode, Sparsity, SIMPLE_TRIES,
};
use zigzag_core::spectral::{gamma_plus_line, gamma_search, SearchBudget, SearchMode};
use zigzag_core::Multigraph;

use crate::io::{
    read_cone, read_graph, read_graph_dir, read_metric, write_csv, write_graph, write_json,
    write_matrix_csv,
};

fn gamma_plus_entry(g: &Multigraph) -> Value {
    match gamma_plus_line(g) {
        Ok(x) => json!(x),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn build_expander(base: &Path, depth: usize, out: &Path) -> Result<Value> {
    let h = read_graph(base)?.with_canonical_rotation()?;
    let recipe = IterationRecipe::new(h, depth)?;
    let it = zigzag_iteration(&recipe)?;
    let mut levels = Vec::new();
    for (j, (w, g)) in it.w.iter().zip(&it.g).enumerate() {
        let j = j + 1;
        write_graph(&out.join(format!("W_{j}.json")), w)?;
        write_graph(&out.join(format!("G_{j}.json")), g)?;
        levels.push(json!({
            "j": j,
            "W": { "vertices": w.n(), "degree": w.regular_degree(), "gamma_plus": gamma_plus_entry(w) },
            "G": { "vertices": g.n(), "degree": g.regular_degree(), "gamma_plus": gamma_plus_entry(g) },
        }));
    }
    let prov = json!({
        "base": { "path": base.display().to_string(), "vertices": it.n, "degree": it.d, "gamma_plus": gamma_plus_entry(&recipe.base) },
        "m": it.m,
        "depth": depth,
        "levels": levels,
    });
    write_json(&out.join("provenance.json"), &prov)?;
    Ok(prov)
}

pub fn gamma(
    graph: &Path,
    metric: &Path,
    mode: SearchMode,
    plus: bool,
    restarts: usize,
    seed: u64,
) -> Result<Value> {
    let g = read_graph(graph)?;
    let x = read_metric(metric)?;
    let budget = SearchBudget {
        restarts,
        ..SearchBudget::default()
    };
    let r = gamma_search(&g, &x, mode, plus, budget, seed)?;
    Ok(json!({
        "gamma_estimate": r.gamma_estimate,
        "f": r.f,
        "h": r.h,
        "mode": match r.mode { SearchMode::Exhaustive => "exhaustive", SearchMode::Local => "local" },
        "plus": plus,
        "exact": r.exact,
        "degenerate": r.degenerate,
        "budget_exhausted": r.budget_exhausted,
        "iterations": r.iterations,
        "seed": r.seed,
    }))
}

pub fn l1_embed_sparse(
    graph: &Path,
    delta: f64,
    trees: usize,
    seed: u64,
    csv: &Path,
    report: &Path,
) -> Result<Value> {
    let g = read_graph(graph)?;
    let cfg = SparseL1Config {
        delta,
        trees,
        seed,
        random_pairs: 1000,
    };
    let (emb, rep) = sparse_graph_l1(&g, &cfg)?;
    write_matrix_csv(csv, &emb.vertex_coordinates())?;
    let v = json!({
        "n": rep.n,
        "edges": rep.edges,
        "delta": rep.delta,
        "diam": rep.diam,
        "trees": rep.trees,
        "measure_size": rep.measure_size,
        "short_cycles": rep.short_cycles,
        "pairs": rep.pairs,
        "ratio_min": rep.ratio_min,
        "ratio_max": rep.ratio_max,
        "distortion": rep.distortion,
        "constant": rep.constant,
        "expectation_constant": rep.expectation_constant,
        "coordinates": csv.display().to_string(),
    });
    write_json(report, &v)?;
    Ok(v)
}

pub fn gen_random(model: &str, n: usize, d: usize, seed: u64) -> Result<(Multigraph, usize)> {
    match model {
        "pairing" => Ok((pairing_sample(n, d, seed)?, 1)),
        "simple" => Ok(uniform_simple_sample(n, d, seed, SIMPLE_TRIES)?),
        other => bail!("unknown model {other}"),
    }
}

pub fn battery(
    graph: &Path,
    eps: f64,
    delta: Option<f64>,
    t: Option<usize>,
    hull_samples: usize,
    seed: u64,
) -> Result<Value> {
    let g = read_graph(graph)?;
    let cfg = BatteryConfig {
        eps,
        delta,
        t,
        hull_samples,
        seed,
        ..BatteryConfig::default()
    };
    let b = l_class_battery(&g, &cfg)?;
    let sparsity = match &b.sparsity {
        Sparsity::Member { density } => json!({ "verdict": "member", "density": density }),
        Sparsity::Violator { set, edges } => {
            json!({ "verdict": "violator", "set": set, "edges": edges })
        }
        Sparsity::Undetermined { density } => {
            json!({ "verdict": "undetermined", "density": density })
        }
    };
    Ok(json!({
        "n": b.n,
        "d": b.d,
        "connected": b.connected,
        "diameter": b.diameter,
        "lambda2": b.lambda2,
        "delta": b.delta,
        "t": b.t,
        "delta_clamped": b.delta_clamped,
        "t_clamped": b.t_clamped,
        "short_cycles": b.short_cycles,
        "few_cycles": b.few_cycles,
        "surgery": b.surgery,
        "removed": b.removed,
        "girth_l": b.girth_l,
        "diam_l": b.diam_l,
        "diameter_bound": format!("{:?}", b.item_b),
        "expansion": format!("{:?}", b.expansion),
        "expansion_found": if b.expansion_found.is_finite() { json!(b.expansion_found) } else { Value::Null },
        "diam_girth": format!("{:?}", b.diam_girth),
        "sparsity": sparsity,
        "subset_c1_sampled": b.subset_c1,
        "passes": b.passes(),
    }))
}

#[derive(Serialize)]
pub struct KleinbergRow {
    pub trial: usize,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    pub near_pairs: usize,
    pub near_bound: f64,
    pub edges_near: usize,
    pub counting_pass: bool,
}

impl KleinbergRow {
    fn new(trial: usize, t: &KleinbergTrial) -> Self {
        KleinbergRow {
            trial,
            n: t.n,
            lhs: t.lhs,
            rhs: t.rhs,
            ratio: t.lhs / t.rhs,
            pass: t.pass,
            near_pairs: t.near_pairs,
            near_bound: t.near_bound,
            edges_near: t.edges_near,
            counting_pass: t.counting_pass,
        }
    }
}

pub fn kleinberg(
    n: usize,
    d: usize,
    trials: usize,
    perm: PermMode,
    c: f64,
    seed: u64,
    out: &Path,
) -> Result<Value> {
    let rows: Vec<KleinbergRow> = kleinberg_experiment(n, d, trials, perm, c, seed)?
        .iter()
        .enumerate()
        .map(|(k, t)| KleinbergRow::new(k, t))
        .collect();
    write_csv(out, &rows)?;
    let pass = rows.iter().filter(|r| r.pass).count();
    Ok(
        json!({ "trials": rows.len(), "pass": pass, "fraction": pass as f64 / rows.len().max(1) as f64, "csv": out.display().to_string() }),
    )
}

pub fn load_family(dir: Option<&Path>, n: usize, seed: u64) -> Result<TemplateFamily> {
    match dir {
        Some(d) => Ok(TemplateFamily::new(
            &d.display().to_string(),
            read_graph_dir(d)?,
        )?),
        None => {
            let hi = (2 * n).next_power_of_two().trailing_zeros().max(3);
            Ok(random_cubic_family(2, hi, seed)?)
        }
    }
}

pub fn approx_templates(out: &Path, lo: u32, hi: u32, seed: u64) -> Result<Value> {
    let f = random_cubic_family(lo, hi, seed)?;
    for g in &f.graphs {
        write_graph(&out.join(format!("cubic_{:08}.json", g.n())), g)?;
    }
    Ok(json!({ "sizes": f.sizes(), "ratio": f.ratio }))
}

pub fn approx_build(template_dir: &Path, n: usize, out: Option<&Path>) -> Result<Value> {
    let family = load_family(Some(template_dir), n, 0)?;
    let u = build_universal(&family, n)?;
    if let Some(p) = out {
        write_graph(p, &u.graph)?;
    }
    Ok(json!({
        "n": u.n,
        "template": u.template,
        "template_size": u.template_size,
        "ratio_m": u.ratio,
        "edges": u.edge_count(),
        "edge_bound": u.edge_bound(),
        "buckets": u.starts,
    }))
}

#[derive(Serialize)]
pub struct ApproxRow {
    pub trial: usize,
    pub m: usize,
    pub n: usize,
    pub exact: f64,
    pub estimate: f64,
    pub ratio: f64,
    pub queries: u64,
    pub tuple_mode: &'static str,
}

impl From<&RatioRow> for ApproxRow {
    fn from(r: &RatioRow) -> Self {
        ApproxRow {
            trial: r.trial,
            m: r.m,
            n: r.n,
            exact: r.exact,
            estimate: r.estimate,
            ratio: r.ratio,
            queries: r.queries,
            tuple_mode: r.tuple_mode.name(),
        }
    }
}

pub struct ApproxRun<'a> {
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub modes: &'a [TupleMode],
    pub template_dir: Option<&'a Path>,
}

pub fn approx_run(run: &ApproxRun, out: &Path) -> Result<Value> {
    let family = load_family(run.template_dir, run.n, run.seed)?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &mode in run.modes {
        let cfg = RatioConfig {
            m: run.m,
            d: run.d,
            n: run.n,
            trials: run.trials,
            seed: run.seed,
            mode,
        };
        let r = ratio_experiment(&cfg, &family)?;
        let (d_emp, scale) = spread(&r);
        summary.push(json!({ "tuple_mode": mode.name(), "d_emp": d_emp, "scale": scale }));
        rows.extend(r.iter().map(ApproxRow::from));
    }
    write_csv(out, &rows)?;
    Ok(json!({ "rows": rows.len(), "summary": summary, "csv": out.display().to_string() }))
}

pub fn cone(config: &Path, pairs: usize, seed: u64) -> Result<Value> {
    let (x, radii) = read_cone(config)?;
    let pts = cone_points(&x, &radii);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: Vec<_> = (0..pairs)
        .map(|_| {
            (
                pts[rng.gen_range(0..pts.len())],
                pts[rng.gen_range(0..pts.len())],
            )
        })
        .collect();
    let r = lemma_report(&x, &p, pairs, seed);
    Ok(json!({
        "radii": radii,
        "pairs": r.pairs,
        "comparison_min": r.comparison_min,
        "comparison_max": r.comparison_max,
        "sinus_violations": r.sinus_violations,
        "triangle_checked": r.triangle_checked,
        "triangle_violations": r.triangle_violations,
    }))
}
