//! JSON graph, metric and cone files; CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use zigzag_core::spectral::FiniteMetric;
use zigzag_core::{Multigraph, RotationMap};

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<[u32; 4]>>,
}

impl GraphFile {
    pub fn from_graph(g: &Multigraph) -> Self {
        let edges = g
            .edge_list()
            .into_iter()
            .map(|(u, v, m)| [u, v, m as usize])
            .collect();
        let rotation = g.rotation().map(|r| {
            let d = r.degree();
            r.table()
                .iter()
                .enumerate()
                .map(|(k, &(w, j))| [(k / d) as u32, (k % d) as u32, w, j])
                .collect()
        });
        GraphFile {
            n: g.n(),
            edges,
            rotation,
        }
    }

    pub fn to_graph(&self) -> Result<Multigraph> {
        let edges: Vec<(usize, usize, u32)> = self
            .edges
            .iter()
            .map(|e| (e[0], e[1], e[2] as u32))
            .collect();
        let g = Multigraph::from_edges(self.n, &edges)?;
        let Some(rot) = &self.rotation else {
            return Ok(g);
        };
        let d = g
            .regular_degree()
            .context("rotation map given for an irregular graph")?;
        if rot.len() != self.n * d {
            bail!(
                "rotation has {} entries, expected {}",
                rot.len(),
                self.n * d
            );
        }
        let mut table = vec![(u32::MAX, u32::MAX); self.n * d];
        for &[v, i, w, j] in rot {
            let (v, i) = (v as usize, i as usize);
            if v >= self.n || i >= d {
                bail!("rotation entry ({v},{i}) out of range");
            }
            table[v * d + i] = (w, j);
        }
        Ok(g.with_rotation(RotationMap::new(self.n, d, table)?)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricFile {
    pub n: usize,
    pub d: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConeFile {
    pub radii: Vec<f64>,
    pub base_metric: PathBuf,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

pub fn read_graph(path: &Path) -> Result<Multigraph> {
    read_json::<GraphFile>(path)?
        .to_graph()
        .with_context(|| format!("graph in {}", path.display()))
}

pub fn write_graph(path: &Path, g: &Multigraph) -> Result<()> {
    write_json(path, &GraphFile::from_graph(g))
}

pub fn read_metric(path: &Path) -> Result<FiniteMetric> {
    let m: MetricFile = read_json(path)?;
    if m.d.len() != m.n {
        bail!("metric declares n = {} but has {} rows", m.n, m.d.len());
    }
    Ok(FiniteMetric::new(m.d)?)
}

pub fn write_metric(path: &Path, x: &FiniteMetric) -> Result<()> {
    write_json(
        path,
        &MetricFile {
            n: x.len(),
            d: x.rows(),
        },
    )
}

/// Base metric paths are relative to the cone file.
pub fn read_cone(path: &Path) -> Result<(FiniteMetric, Vec<f64>)> {
    let c: ConeFile = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new(".")).join(&c.base_metric);
    Ok((read_metric(&base)?, c.radii))
}

/// Every `*.json` graph in `dir`, sorted by file name.
pub fn read_graph_dir(dir: &Path) -> Result<Vec<Multigraph>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_graph(p)).collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for r in rows {
        w.write_record(r.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use zigzag_core::combinators::random_rotation_graph;

    #[test]
    fn graph_round_trip() {
        let dir = std::env::temp_dir().join(format!("zigzag-io-{}", std::process::id()));
        let g = random_rotation_graph(9, 3, 4).unwrap();
        let p = dir.join("g.json");
        write_graph(&p, &g).unwrap();
        let back = read_graph(&p).unwrap();
        assert_eq!(back, g);
        let x = FiniteMetric::line(&[0.0, 1.0, 3.0]);
        write_metric(&dir.join("m.json"), &x).unwrap();
        fs::write(
            dir.join("c.json"),
            r#"{"radii": [1.0, 2.0], "base_metric": "m.json"}"#,
        )
        .unwrap();
        let (y, r) = read_cone(&dir.join("c.json")).unwrap();
        assert_eq!(y.get(0, 2), 3.0);
        assert_eq!(r, vec![1.0, 2.0]);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn loops_and_bad_rotation() {
        let f: GraphFile =
            serde_json::from_str(r#"{"n": 2, "edges": [[0,0,2],[0,1,1],[1,1,2]]}"#).unwrap();
        let g = f.to_graph().unwrap();
        assert_eq!(g.loops(0), 2);
        let bad: GraphFile = serde_json::from_str(
            r#"{"n": 2, "edges": [[0,1,1]], "rotation": [[0,0,1,0],[1,0,1,0]]}"#,
        )
        .unwrap();
        assert!(bad.to_graph().is_err());
    }
}
