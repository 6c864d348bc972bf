use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cops_core::graph::save_edge_list;
use cops_core::harness::{build_trial_network, run_experiment, write_rows, NetworkKind, TrialNetwork};
use cops_core::solver::{run_cops, run_greedy, run_margi, run_random, OracleBudget, SolverConfig, SolverResult};
use cops_core::{
    draw_samples, evaluate_solution, generate_sbm, load_edge_list, make_default_q, rng, uniform_expected_k,
    ExperimentConfig, SampleMode, SampleSet,
};

/// Influence maximization from samples: COPS and its baselines.
#[derive(Parser)]
#[command(name = "cops", version)]
struct Cli {
    /// Master seed; every random choice derives from it.
    #[arg(long, global = true, env = "COPS_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, env = "COPS_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a network and save it as a weighted edge list.
    Gen {
        #[command(flatten)]
        net: GeneratedNetwork,
        /// Edge list output.
        #[arg(long)]
        out: PathBuf,
        /// For SBM networks, also write `node community` lines here.
        #[arg(long)]
        communities_out: Option<PathBuf>,
    },
    /// Draw (seed set, influence) samples from a network.
    Sample {
        #[command(flatten)]
        net: NetworkSource,
        /// Expected seed-set size; marginals are k/n.
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 20_000)]
        m: usize,
        /// Sample CSV output (a `.meta.jsonl` sidecar is written next to it).
        #[arg(long)]
        out: PathBuf,
    },
    /// Pick k seeds from a sample set (or, for greedy, from the network).
    Solve {
        #[arg(long, value_enum)]
        algo: Algo,
        /// Sample CSV written by `sample`.
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Network; required by greedy, and restricts candidates for edge lists.
        #[command(flatten)]
        net: NetworkSource,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 30)]
        min_count: usize,
        /// Monte Carlo realizations per greedy evaluation.
        #[arg(long, default_value_t = 200)]
        greedy_realizations: usize,
        /// Solution JSON output (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the expected influence of a seed set.
    Eval {
        #[command(flatten)]
        net: NetworkSource,
        /// Solution JSON written by `solve`.
        #[arg(long, conflicts_with = "seeds")]
        solution: Option<PathBuf>,
        /// Comma-separated seed nodes.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        realizations: usize,
        /// CSV output (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full experiment grid from a TOML config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Result CSV output (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Cops,
    Margi,
    Random,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Sbm1,
    Sbm2,
    Er,
    Pa,
}

impl From<Family> for NetworkKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Sbm1 => NetworkKind::Sbm1,
            Family::Sbm2 => NetworkKind::Sbm2,
            Family::Er => NetworkKind::Er,
            Family::Pa => NetworkKind::Pa,
        }
    }
}

#[derive(Args)]
struct GeneratedNetwork {
    /// Random network family.
    #[arg(long, value_enum)]
    network: Option<Family>,
    /// Node count.
    #[arg(long)]
    n: Option<usize>,
    /// TOML config supplying family parameters (its `sizes[0]` is the default n).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct NetworkSource {
    /// Edge list (`u v [q]`); sampling on it uses a fixed graph.
    #[arg(long, conflicts_with_all = ["network", "config"])]
    graph: Option<PathBuf>,
    /// Uniform cascade probability for the edge list. Without it, the file's
    /// weights are used, or q = n/(2|E|) if the file has none.
    #[arg(long, requires = "graph")]
    q: Option<f64>,
    /// Drop nodes of degree <= this when loading the edge list.
    #[arg(long, default_value_t = 0, requires = "graph")]
    degree_min: usize,
    /// Only nodes of at least this degree may be chosen.
    #[arg(long, default_value_t = 0, requires = "graph")]
    candidate_degree_min: usize,
    #[command(flatten)]
    generated: GeneratedNetwork,
}

impl GeneratedNetwork {
    fn is_set(&self) -> bool {
        self.network.is_some() || self.config.is_some()
    }

    /// The config and node count describing this network.
    fn resolve(&self) -> Result<(ExperimentConfig, usize)> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => match self.network {
                Some(f) => ExperimentConfig::new(f.into(), Vec::new()),
                None => bail!("give --network or --config"),
            },
        };
        if let Some(f) = self.network {
            cfg.network = f.into();
        }
        if cfg.network == NetworkKind::File {
            bail!("file networks are loaded with --graph");
        }
        let n = match self.n.or_else(|| cfg.sizes.first().copied()) {
            Some(n) if n > 0 => n,
            _ => bail!("give --n (or sizes in the config)"),
        };
        Ok((cfg, n))
    }

    fn build(&self, seed: u64) -> Result<(ExperimentConfig, TrialNetwork)> {
        let (cfg, n) = self.resolve()?;
        let net = build_trial_network(&cfg, n, rng::derive_named(seed, "network"))?;
        Ok((cfg, net))
    }
}

/// A loaded or generated network plus the sample mode it implies.
struct Loaded {
    net: TrialNetwork,
    mode: SampleMode,
}

impl NetworkSource {
    fn is_set(&self) -> bool {
        self.graph.is_some() || self.generated.is_set()
    }

    fn load(&self, seed: u64) -> Result<Loaded> {
        let Some(path) = &self.graph else {
            let (cfg, net) = self.generated.build(seed)?;
            return Ok(Loaded { net, mode: cfg.mode() });
        };
        let loaded = load_edge_list(path, 0.0, self.degree_min, self.candidate_degree_min)?;
        if loaded.self_loops_dropped + loaded.duplicates_dropped > 0 {
            log::info!(
                "{}: dropped {} self-loops and {} duplicate edges",
                path.display(),
                loaded.self_loops_dropped,
                loaded.duplicates_dropped
            );
        }
        let mut graph = loaded.graph;
        if let Some(q) = self.q {
            graph = graph.with_uniform_q(q)?;
        } else if graph.edges().iter().all(|e| e.q == 0.0) && graph.edge_count() > 0 {
            let q = make_default_q(&graph)?;
            log::info!("{}: no edge weights, using q = {q}", path.display());
            graph = graph.with_uniform_q(q)?;
        }
        let candidates = (self.candidate_degree_min > 0).then_some(loaded.candidates);
        Ok(Loaded {
            net: TrialNetwork::Graph { graph, layout: None, candidates },
            mode: SampleMode::FixedGraph,
        })
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn gen(seed: u64, net: &GeneratedNetwork, out: &Path, communities_out: Option<&Path>) -> Result<()> {
    let (_, trial) = net.build(seed)?;
    let (graph, layout) = match trial {
        TrialNetwork::Layout(layout) => {
            let (g, l) = generate_sbm(&layout, rng::derive_named(seed, "graph"))?;
            (g, Some(l))
        }
        TrialNetwork::Graph { graph, layout, .. } => (graph, layout),
    };
    save_edge_list(&graph, true, out)?;
    log::info!("wrote {} nodes, {} edges to {}", graph.n(), graph.edge_count(), out.display());
    match (communities_out, layout) {
        (Some(path), Some(layout)) => {
            let mut w = output(Some(path))?;
            for (node, c) in layout.assignment().iter().enumerate() {
                writeln!(w, "{node} {c}")?;
            }
            w.flush()?;
        }
        (Some(_), None) => bail!("--communities-out needs an SBM network"),
        _ => {}
    }
    Ok(())
}

fn sample(seed: u64, net: &NetworkSource, k: usize, m: usize, out: &Path) -> Result<()> {
    let loaded = net.load(seed)?;
    let network = loaded.net.as_network();
    let dist = uniform_expected_k(network.n(), k)?;
    let set = draw_samples(network, &dist, m, loaded.mode, rng::derive_named(seed, "samples"))?;
    set.save(out)?;
    log::info!("wrote {} samples ({} mode) to {}", set.len(), set.mode(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    seed: u64,
    algo: Algo,
    samples: Option<&Path>,
    net: &NetworkSource,
    k: usize,
    alpha: f64,
    min_count: usize,
    greedy_realizations: usize,
    out: Option<&Path>,
) -> Result<()> {
    let loaded = net.is_set().then(|| net.load(seed)).transpose()?;
    let candidates = loaded.as_ref().and_then(|l| l.net.candidates()).map(<[usize]>::to_vec);
    let mut cfg = SolverConfig::new(k, alpha).with_min_count(min_count);
    cfg.candidates = candidates.clone();
    let set = || -> Result<SampleSet> {
        let path = samples.context("this algorithm needs --samples")?;
        Ok(SampleSet::load(path)?)
    };
    let result = match algo {
        Algo::Cops => run_cops(&set()?, &cfg)?,
        Algo::Margi => run_margi(&set()?, &cfg)?,
        Algo::Random => {
            let n = match (&loaded, samples) {
                (Some(l), _) => l.net.as_network().n(),
                (None, Some(_)) => set()?.n(),
                (None, None) => bail!("random needs --samples or a network to know n"),
            };
            run_random(n, candidates.as_deref(), k, rng::derive_named(seed, "random"))?
        }
        Algo::Greedy => {
            let l = loaded.as_ref().context("greedy needs a network (--graph, --network or --config)")?;
            let budget = OracleBudget { realizations_per_eval: greedy_realizations, ..OracleBudget::default() };
            let seed = rng::derive_named(seed, "greedy");
            run_greedy(l.net.as_network(), l.mode, k, budget, seed, candidates.as_deref())?
        }
    };
    if !result.backfilled.is_empty() {
        log::warn!("fewer than k nodes survived pruning; backfilled {:?}", result.backfilled);
    }
    let mut w = output(out)?;
    result.write_json(&mut w)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn eval(
    seed: u64,
    net: &NetworkSource,
    solution: Option<&Path>,
    seeds: &[usize],
    realizations: usize,
    out: Option<&Path>,
) -> Result<()> {
    let chosen = match solution {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SolverResult::from_json(&text)?.chosen
        }
        None => seeds.to_vec(),
    };
    let loaded = net.load(seed)?;
    let est = evaluate_solution(
        loaded.net.as_network(),
        loaded.mode,
        &chosen,
        realizations,
        rng::derive_named(seed, "eval"),
    )?;
    let mut w = output(out)?;
    writeln!(w, "influence_mean,influence_stderr,realizations,seeds")?;
    let ids: Vec<String> = chosen.iter().map(usize::to_string).collect();
    writeln!(w, "{},{},{},{}", est.mean, est.std_error, est.realizations, ids.join(";"))?;
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    seed: Option<u64>,
    config: &Path,
    k: Option<usize>,
    alpha: Option<f64>,
    m: Option<usize>,
    trials: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(k) = k {
        cfg.k = k;
    }
    if let Some(a) = alpha {
        cfg.alpha = a;
    }
    if let Some(m) = m {
        cfg.m = m;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    let rows = run_experiment(&cfg)?;
    log::info!("{}: {} rows", cfg.digest(), rows.len());
    let mut w = output(out)?;
    write_rows(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Whether `--seed` or `COPS_SEED` was given explicitly.
fn explicit_seed(matches: &clap::ArgMatches) -> bool {
    let from = |m: &clap::ArgMatches| {
        matches!(
            m.value_source("seed"),
            Some(clap::parser::ValueSource::CommandLine | clap::parser::ValueSource::EnvVariable)
        )
    };
    from(matches) || matches.subcommand().is_some_and(|(_, sub)| from(sub))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let matches = <Cli as clap::CommandFactory>::command().get_matches();
    let cli = <Cli as clap::FromArgMatches>::from_arg_matches(&matches)?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    let seed = cli.seed;
    match &cli.command {
        Command::Gen { net, out, communities_out } => gen(seed, net, out, communities_out.as_deref()),
        Command::Sample { net, k, m, out } => sample(seed, net, *k, *m, out),
        Command::Solve { algo, samples, net, k, alpha, min_count, greedy_realizations, out } => solve(
            seed,
            *algo,
            samples.as_deref(),
            net,
            *k,
            *alpha,
            *min_count,
            *greedy_realizations,
            out.as_deref(),
        ),
        Command::Eval { net, solution, seeds, realizations, out } => {
            if solution.is_none() && seeds.is_empty() {
                bail!("give --solution or --seeds");
            }
            eval(seed, net, solution.as_deref(), seeds, *realizations, out.as_deref())
        }
        Command::Experiment { config, k, alpha, m, trials, out } => {
            // The config's own seed applies unless one was given explicitly.
            let seed = explicit_seed(&matches).then_some(seed);
            experiment(seed, config, *k, *alpha, *m, *trials, out.as_deref())
        }
    }
}
