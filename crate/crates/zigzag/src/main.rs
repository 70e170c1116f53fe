use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;
use zigzag::commands::{self, ApproxRun};
use zigzag::io::write_graph;
use zigzag_core::approximator::TupleMode;
use zigzag_core::randgraph::PermMode;
use zigzag_core::spectral::SearchMode;

#[derive(Parser)]
#[command(
    name = "zigzag",
    version,
    about = "Expanders, nonlinear spectral gaps and L1 embeddings"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Local,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Pairing,
    Simple,
}

#[derive(Clone, Copy, ValueEnum)]
enum Perm {
    Random,
    Adversarial,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tuples {
    Uniform,
    Clustered,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Iterated zigzag construction from a base graph with a rotation map.
    BuildExpander {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for the Poincaré constant of a graph with respect to a finite metric.
    Gamma {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, value_enum, default_value = "local")]
        mode: Mode,
        #[arg(long)]
        plus: bool,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random-tree embedding of a sparse graph into L1.
    L1EmbedSparse {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 32)]
        trees: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "embedding.csv")]
        csv: PathBuf,
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
    },
    /// Sample a random regular graph.
    GenRandom {
        #[arg(long, value_enum, default_value = "simple")]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sparsity, short cycles, surgery and expansion checks.
    Battery {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        eps: f64,
        /// Defaults to min(21/log_d n, 1/4).
        #[arg(long)]
        delta: Option<f64>,
        /// Short-cycle threshold; defaults to max(log_d n / 63, 3).
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 0)]
        hull_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Permutation Poincaré trials on independent random graphs.
    Kleinberg {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_enum, default_value = "random")]
        perm: Perm,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "kleinberg.csv")]
        out: PathBuf,
    },
    /// Cone lemma checks on a cone configuration file.
    Cone {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Universal average-distance approximators.
    Approx {
        #[command(subcommand)]
        cmd: ApproxCmd,
    },
}

#[derive(Subcommand)]
enum ApproxCmd {
    /// Collapse the smallest suitable template onto n buckets.
    Build {
        #[arg(long)]
        template_dir: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write random cubic templates on 2^lo .. 2^hi vertices.
    Templates {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        lo: u32,
        #[arg(long, default_value_t = 12)]
        hi: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate against exact averages on random regular graph metrics.
    Run {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        tuples: Tuples,
        #[arg(long)]
        template_dir: Option<PathBuf>,
    },
}

fn print(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::BuildExpander { base, depth, out } => {
            print(&commands::build_expander(&base, depth, &out)?)
        }
        Cmd::Gamma {
            graph,
            metric,
            mode,
            plus,
            restarts,
            seed,
        } => {
            let mode = match mode {
                Mode::Exhaustive => SearchMode::Exhaustive,
                Mode::Local => SearchMode::Local,
            };
            print(&commands::gamma(
                &graph, &metric, mode, plus, restarts, seed,
            )?)
        }
        Cmd::L1EmbedSparse {
            graph,
            delta,
            trees,
            seed,
            csv,
            report,
        } => print(&commands::l1_embed_sparse(
            &graph, delta, trees, seed, &csv, &report,
        )?),
        Cmd::GenRandom {
            model,
            n,
            d,
            seed,
            out,
        } => {
            let name = match model {
                Model::Pairing => "pairing",
                Model::Simple => "simple",
            };
            let (g, tries) = commands::gen_random(name, n, d, seed)?;
            match out {
                Some(p) => {
                    write_graph(&p, &g)?;
                    eprintln!("wrote {} after {tries} attempt(s)", p.display());
                    Ok(())
                }
                None => {
                    println!(
                        "{}",
                        serde_json::to_string(&zigzag::io::GraphFile::from_graph(&g))?
                    );
                    Ok(())
                }
            }
        }
        Cmd::Battery {
            graph,
            eps,
            delta,
            t,
            hull_samples,
            seed,
        } => print(&commands::battery(
            &graph,
            eps,
            delta,
            t,
            hull_samples,
            seed,
        )?),
        Cmd::Kleinberg {
            n,
            d,
            trials,
            perm,
            c,
            seed,
            out,
        } => {
            let perm = match perm {
                Perm::Random => PermMode::Random,
                Perm::Adversarial => PermMode::Adversarial,
            };
            print(&commands::kleinberg(n, d, trials, perm, c, seed, &out)?)
        }
        Cmd::Cone {
            config,
            pairs,
            seed,
        } => print(&commands::cone(&config, pairs, seed)?),
        Cmd::Approx { cmd } => match cmd {
            ApproxCmd::Build {
                template_dir,
                n,
                out,
            } => print(&commands::approx_build(&template_dir, n, out.as_deref())?),
            ApproxCmd::Templates { out, lo, hi, seed } => {
                print(&commands::approx_templates(&out, lo, hi, seed)?)
            }
            ApproxCmd::Run {
                m,
                d,
                n,
                trials,
                seed,
                out,
                tuples,
                template_dir,
            } => {
                let modes: &[TupleMode] = match tuples {
                    Tuples::Uniform => &[TupleMode::Uniform],
                    Tuples::Clustered => &[TupleMode::Clustered],
                    Tuples::Both => &[TupleMode::Uniform, TupleMode::Clustered],
                };
                let run = ApproxRun {
                    m,
                    d,
                    n,
                    trials,
                    seed,
                    modes,
                    template_dir: template_dir.as_deref(),
                };
                print(&commands::approx_run(&run, &out)?)
            }
        },
    }
}
