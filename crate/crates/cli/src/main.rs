use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use keg_core::engine::{max_cardinality_matching, GraphView};
use keg_core::enumeration::{k_best_weighted, MaximumMatchingSampler, MAX_VERTEX_CAP};
use keg_core::equilibrium::{compute_swe, swe_relaxation, verify_ne, PolicyFamily, SearchLimits};
use keg_core::experiment::{
    age_histogram_svg, build_instance, emit_results, generate_campaign, pct_ne_svg, run_campaign,
    CampaignSpec, ExperimentSettings, OutputFormat,
};
use keg_core::generator::Distribution;
use keg_core::ia::IaPolicy;
use keg_core::rational::format_weight;
use keg_core::{CompatibilityGraph, Instance, Matching, Mode, Weight};

#[derive(Parser)]
#[command(name = "keg", version, about = "Kidney exchange games: instances, equilibria and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Card,
    Weighted,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Card => Mode::Cardinality,
            ModeArg::Weighted => Mode::Weighted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotArg {
    HistAge,
    PctNe,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one random instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        year: u16,
        /// Comma-separated province labels; all provinces when omitted.
        #[arg(long, value_delimiter = ',')]
        players: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distribution tables (required).
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum, default_value = "card")]
        mode: ModeArg,
        #[arg(long)]
        ins: Option<u32>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Draw maximum matchings uniformly at random.
    Sample {
        instance: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the K heaviest matchings.
    Kbest {
        instance: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Check whether a matching is a Nash equilibrium.
    Verify {
        instance: PathBuf,
        /// Vertex pairs such as `0-1,2-3`.
        #[arg(long)]
        matching: String,
        /// `friendly`, `card`, `lex`, `weighted`, `opt:N` or `pess:N`.
        #[arg(long, default_value = "friendly")]
        ia: String,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
    },
    /// Build a maximum matching that is an equilibrium (cardinality games).
    Swe {
        instance: PathBuf,
        /// `card` or `lex`.
        #[arg(long, default_value = "card")]
        ia: String,
    },
    /// Run a batch of instances and write the result table.
    Experiment {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Directory of instance files; otherwise instances are generated
        /// from --dist.
        #[arg(long)]
        instances: Option<PathBuf>,
        #[arg(long)]
        dist: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "30,40,50")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2009,2013")]
        years: Vec<u16>,
        /// Number of instances per (year, size).
        #[arg(long, default_value_t = 10)]
        ins: u32,
        #[arg(long, value_delimiter = ',')]
        players: Option<Vec<String>>,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds.
        #[arg(long, default_value_t = 7200)]
        time_limit_gen: u64,
        /// Seconds.
        #[arg(long, default_value_t = 600)]
        time_limit_ne: u64,
        /// Fix the IA instead of assuming the friendliest one.
        #[arg(long)]
        ia: Option<String>,
        /// Write `-` in the time columns.
        #[arg(long)]
        no_timing: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        plot: Vec<PlotArg>,
    },
}

fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (a, b) = t.split_once('-').with_context(|| format!("bad pair {t:?}, expected u-v"))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .collect()
}

fn write_or_print(body: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn pairs_json(graph: &CompatibilityGraph, m: &Matching) -> serde_json::Value {
    json!(m.pairs(graph))
}

fn weight_json(w: &Weight) -> serde_json::Value {
    json!(format_weight(w))
}

fn load(path: &Path) -> Result<Instance> {
    Instance::read(path).with_context(|| format!("reading instance {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { n, year, players, seed, dist, mode, ins, out } => {
            let d = Distribution::read(&dist).with_context(|| format!("reading {}", dist.display()))?;
            let cfg = d.config(n, year, players, seed)?;
            let inst = build_instance(&d, &cfg, mode.into(), ins)?;
            write_or_print(&inst.to_json_string(), out.as_deref())?;
        }
        Command::Sample { instance, count, seed } => {
            let inst = load(&instance)?;
            let g = &inst.graph;
            let view = GraphView::of_graph(g);
            let sampler = MaximumMatchingSampler::with_cap(&view, MAX_VERTEX_CAP)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draws: Vec<_> = (0..count).map(|_| pairs_json(g, &sampler.sample(g, &view, &mut rng))).collect();
            let doc = json!({
                "size": sampler.opt(),
                "count": sampler.total().to_string(),
                "matchings": draws,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::Kbest { instance, k } => {
            let inst = load(&instance)?;
            let g = &inst.graph;
            let view = GraphView::of_graph(g);
            let w: Vec<Weight> = view.ids().iter().map(|&e| inst.weights.welfare_value(g, e)).collect();
            let ranked: Vec<_> = k_best_weighted(g, &view, &w, k)?
                .iter()
                .map(|(m, v)| json!({"value": weight_json(v), "matching": pairs_json(g, m)}))
                .collect();
            println!("{}", serde_json::to_string_pretty(&ranked)?);
        }
        Command::Verify { instance, matching, ia, max_iterations } => {
            let inst = load(&instance)?;
            let m = Matching::from_pairs(&inst.graph, &parse_pairs(&matching)?)?;
            let policy: Option<IaPolicy> = if ia == "friendly" { None } else { Some(ia.parse()?) };
            let family = match &policy {
                None => PolicyFamily::ExistsFriendly,
                Some(p) => PolicyFamily::Fixed(p),
            };
            let report = verify_ne(&inst.graph, &inst.weights, &m, family, SearchLimits { max_iterations })?;
            println!("{}", serde_json::to_string_pretty(&report.to_json(&inst.graph))?);
        }
        Command::Swe { instance, ia } => {
            let inst = load(&instance)?;
            if inst.weights.mode() != Mode::Cardinality {
                bail!("swe needs a cardinality instance");
            }
            let policy: IaPolicy = ia.parse()?;
            if !matches!(policy, IaPolicy::CardinalityCanonical | IaPolicy::LexicographicPriority) {
                bail!("swe supports --ia card or lex");
            }
            let g = &inst.graph;
            let seed = max_cardinality_matching(g, &GraphView::of_graph(g), &Matching::empty())?;
            let tilde = compute_swe(g, &seed)?;
            let m = swe_relaxation(g, &tilde, &policy)?;
            let report = verify_ne(g, &inst.weights, &m, PolicyFamily::Fixed(&policy), SearchLimits::default())?;
            let doc = json!({"matching": pairs_json(g, &m), "report": report.to_json(g)});
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::Experiment {
            mode,
            instances,
            dist,
            sizes,
            years,
            ins,
            players,
            budget,
            seed,
            time_limit_gen,
            time_limit_ne,
            ia,
            no_timing,
            format,
            out,
            plot,
        } => {
            let mode: Mode = mode.into();
            let d = dist
                .as_ref()
                .map(|p| Distribution::read(p).with_context(|| format!("reading {}", p.display())))
                .transpose()?;
            let insts = match (&instances, &d) {
                (Some(dir), _) => read_dir(dir)?,
                (None, Some(d)) => generate_campaign(
                    d,
                    &CampaignSpec { sizes, years, instances: (1..=ins).collect(), players, mode, seed },
                )?,
                (None, None) => bail!("pass --instances DIR or --dist FILE"),
            };
            if let Some(bad) = insts.iter().find(|i| i.weights.mode() != mode) {
                bail!("instance {:?} is not a {} instance", bad.meta, mode.as_str());
            }
            let settings = ExperimentSettings {
                budget,
                seed,
                time_limit_gen: Duration::from_secs(time_limit_gen),
                time_limit_ne: Duration::from_secs(time_limit_ne),
                ia: ia.map(|s| s.parse()).transpose()?,
                limits: SearchLimits::default(),
                timing: !no_timing,
            };
            let rows = run_campaign(&insts, &settings)?;
            let fmt = match format {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
            emit_results(&rows, mode, fmt, &out)?;
            for p in plot {
                let (name, svg) = match p {
                    PlotArg::HistAge => {
                        let Some(d) = &d else { bail!("--plot hist-age needs --dist") };
                        ("hist-age", age_histogram_svg(&d.donor_age_sample))
                    }
                    PlotArg::PctNe => ("pct-ne", pct_ne_svg(&rows)),
                };
                let path = out.with_extension(format!("{name}.svg"));
                std::fs::write(&path, svg)?;
                eprintln!("wrote {}", path.display());
            }
            eprintln!("{} rows written to {}", rows.len(), out.display());
        }
    }
    Ok(())
}

fn read_dir(dir: &Path) -> Result<Vec<Instance>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load(p)).collect()
}
