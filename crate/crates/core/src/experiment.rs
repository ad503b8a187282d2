//! Batch experiments: candidate matchings, equilibrium checks and the
//! per-instance metric rows.

use std::path::Path;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::engine::GraphView;
use crate::enumeration::{KBest, MaximumMatchingSampler, MAX_VERTEX_CAP};
use crate::equilibrium::{verify_ne, EquilibriumReport, PolicyFamily, SearchLimits};
use crate::error::{KegError, Result};
use crate::game::welfare;
use crate::generator::{generate_instance, generate_weights, Distribution};
use crate::graph::CompatibilityGraph;
use crate::ia::IaPolicy;
use crate::io::{Instance, InstanceMeta};
use crate::matching::Matching;
use crate::rational::{format_weight, int, ratio, Weight};
use crate::weights::{Mode, WeightSystem};

pub const CARDINALITY_HEADER: [&str; 15] = [
    "year", "|V|", "ins", "|E|", "|M|_max", "#|M|_max", "%#-NE", "IMP_max", "Players_max", "IMP_min",
    "Players_min", "IA_high", "IA_low", "time_gen", "time_NE",
];

pub const WEIGHTED_HEADER: [&str; 17] = [
    "year", "|V|", "ins", "|E|", "W(M)_max", "K", "%W-NE", "ε", "iter", "IMP_max", "Players_max",
    "IMP_min", "Players_min", "IA_high", "IA_low", "time_gen", "time_NE",
];

const TL: &str = "tl";

#[derive(Debug, Clone)]
pub struct ExperimentSettings {
    /// Sampled matchings (cardinality) or K (weighted).
    pub budget: usize,
    pub seed: u64,
    pub time_limit_gen: Duration,
    pub time_limit_ne: Duration,
    /// `None` verifies against the friendliest IA; otherwise the policy is
    /// fixed.
    pub ia: Option<IaPolicy>,
    pub limits: SearchLimits,
    /// Off writes `-` in the time columns so output is reproducible.
    pub timing: bool,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            budget: 1000,
            seed: 0,
            time_limit_gen: Duration::from_secs(7200),
            time_limit_ne: Duration::from_secs(600),
            ia: None,
            limits: SearchLimits::default(),
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Epsilon {
    Exact(Weight),
    /// No equilibrium among the candidates; the last candidate's ratio.
    UpperBound(Weight),
}

impl Epsilon {
    pub fn value(&self) -> &Weight {
        match self {
            Epsilon::Exact(w) | Epsilon::UpperBound(w) => w,
        }
    }
}

/// Extremes over the equilibria found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeSummary {
    pub imp_max: Weight,
    pub players_max: Vec<String>,
    pub imp_min: Weight,
    pub players_min: Vec<String>,
    pub ia_high: Weight,
    pub ia_low: Weight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub mode: Mode,
    pub year: Option<u16>,
    pub n_vertices: usize,
    pub ins: Option<u32>,
    pub n_edges: usize,
    /// `|M|_max` or `W(M)_max`.
    pub optimum: Weight,
    /// Number of maximum matchings (cardinality only).
    pub optimum_count: Option<BigUint>,
    /// Raw draws (cardinality) or matchings enumerated (weighted).
    pub draws: usize,
    /// Distinct candidates.
    pub candidates: usize,
    pub verified: usize,
    pub ne_count: usize,
    /// Draws, counted with multiplicity, whose matching is an equilibrium.
    pub ne_draws: usize,
    pub unresolved: usize,
    pub pct_ne: Option<Weight>,
    pub pct_ne_draws: Option<Weight>,
    pub epsilon: Option<Epsilon>,
    /// 0-based position of the first equilibrium.
    pub iter: Option<usize>,
    pub summary: Option<NeSummary>,
    pub time_gen: Option<f64>,
    pub time_ne: Option<f64>,
    pub gen_timed_out: bool,
    pub ne_timed_out: bool,
}

impl ExperimentRow {
    fn new(mode: Mode, inst: &Instance) -> Self {
        ExperimentRow {
            mode,
            year: inst.meta.year,
            n_vertices: inst.graph.n_vertices(),
            ins: inst.meta.ins,
            n_edges: inst.graph.n_edges(),
            optimum: Weight::zero(),
            optimum_count: None,
            draws: 0,
            candidates: 0,
            verified: 0,
            ne_count: 0,
            ne_draws: 0,
            unresolved: 0,
            pct_ne: None,
            pct_ne_draws: None,
            epsilon: None,
            iter: None,
            summary: None,
            time_gen: None,
            time_ne: None,
            gen_timed_out: false,
            ne_timed_out: false,
        }
    }

    pub fn timed_out(&self) -> bool {
        self.gen_timed_out || self.ne_timed_out
    }

    fn sort_key(&self) -> (Option<u16>, usize, Option<u32>) {
        (self.year, self.n_vertices, self.ins)
    }

    /// CSV cells in header order.
    pub fn cells(&self) -> Vec<String> {
        let opt = |x: Option<String>| x.unwrap_or_default();
        let mut out = vec![
            opt(self.year.map(|y| y.to_string())),
            self.n_vertices.to_string(),
            opt(self.ins.map(|i| i.to_string())),
            self.n_edges.to_string(),
        ];
        let tl = self.timed_out();
        let metric = |s: String| if tl { TL.to_string() } else { s };
        let summary = |f: &dyn Fn(&NeSummary) -> String| metric(self.summary.as_ref().map(f).unwrap_or_default());
        let pct = metric(opt(self.pct_ne.as_ref().map(fixed2)));
        match self.mode {
            Mode::Cardinality => {
                out.push(format_weight(&self.optimum));
                out.push(opt(self.optimum_count.as_ref().map(|c| c.to_string())));
                out.push(pct);
                out.push(summary(&|s| format_weight(&s.imp_max)));
                out.push(summary(&|s| s.players_max.join(" ")));
                out.push(summary(&|s| format_weight(&s.imp_min)));
                out.push(summary(&|s| s.players_min.join(" ")));
                out.push(summary(&|s| format_weight(&s.ia_high)));
                out.push(summary(&|s| format_weight(&s.ia_low)));
            }
            Mode::Weighted => {
                out.push(fixed2(&self.optimum));
                out.push(if self.gen_timed_out { TL.to_string() } else { self.draws.to_string() });
                out.push(pct);
                out.push(metric(opt(self.epsilon.as_ref().map(|e| match e {
                    Epsilon::Exact(w) => fixed2(w),
                    Epsilon::UpperBound(w) => format!("< {}", fixed2(w)),
                }))));
                out.push(metric(opt(self.iter.map(|i| i.to_string()))));
                out.push(summary(&|s| fixed2(&s.imp_max)));
                out.push(summary(&|s| s.players_max.join(" ")));
                out.push(summary(&|s| fixed2(&s.imp_min)));
                out.push(summary(&|s| s.players_min.join(" ")));
                out.push(summary(&|s| fixed2(&s.ia_high)));
                out.push(summary(&|s| fixed2(&s.ia_low)));
            }
        }
        let time = |t: Option<f64>, hit: bool| match (hit, t) {
            (true, _) => TL.to_string(),
            (false, Some(t)) => format!("{t:.2}"),
            (false, None) => "-".to_string(),
        };
        out.push(time(self.time_gen, self.gen_timed_out));
        out.push(time(self.time_ne, self.ne_timed_out));
        out
    }

    pub fn to_json(&self) -> Value {
        let w = |x: &Option<Weight>| x.as_ref().map(format_weight);
        json!({
            "mode": self.mode.as_str(),
            "year": self.year,
            "n_vertices": self.n_vertices,
            "ins": self.ins,
            "n_edges": self.n_edges,
            "optimum": format_weight(&self.optimum),
            "optimum_count": self.optimum_count.as_ref().map(|c| c.to_string()),
            "draws": self.draws,
            "candidates": self.candidates,
            "verified": self.verified,
            "ne_count": self.ne_count,
            "ne_draws": self.ne_draws,
            "unresolved": self.unresolved,
            "pct_ne": w(&self.pct_ne),
            "pct_ne_draws": w(&self.pct_ne_draws),
            "epsilon": self.epsilon.as_ref().map(|e| format_weight(e.value())),
            "epsilon_is_bound": self.epsilon.as_ref().map(|e| matches!(e, Epsilon::UpperBound(_))),
            "iter": self.iter,
            "imp_max": self.summary.as_ref().map(|s| format_weight(&s.imp_max)),
            "players_max": self.summary.as_ref().map(|s| s.players_max.clone()),
            "imp_min": self.summary.as_ref().map(|s| format_weight(&s.imp_min)),
            "players_min": self.summary.as_ref().map(|s| s.players_min.clone()),
            "ia_high": self.summary.as_ref().map(|s| format_weight(&s.ia_high)),
            "ia_low": self.summary.as_ref().map(|s| format_weight(&s.ia_low)),
            "time_gen": self.time_gen,
            "time_ne": self.time_ne,
            "gen_timed_out": self.gen_timed_out,
            "ne_timed_out": self.ne_timed_out,
        })
    }
}

/// Rounds half away from zero to two decimals.
pub fn fixed2(w: &Weight) -> String {
    let scaled = w * int(100);
    let (q, r) = scaled.numer().abs().div_rem(scaled.denom());
    let q = if r * BigInt::from(2) >= *scaled.denom() { q + 1 } else { q };
    let (ip, fp) = q.div_rem(&BigInt::from(100));
    let sign = if w.is_negative() && !q.is_zero() { "-" } else { "" };
    format!("{sign}{ip}.{:02}", fp.to_u32().expect("two digits"))
}

struct Tally<'a> {
    graph: &'a CompatibilityGraph,
    mode: Mode,
    best: Option<NeSummary>,
    /// Divides improvements (weighted: welfare of the first equilibrium).
    scale: Option<Weight>,
}

impl<'a> Tally<'a> {
    fn new(graph: &'a CompatibilityGraph, mode: Mode) -> Self {
        Tally { graph, mode, best: None, scale: None }
    }

    fn add(&mut self, report: &EquilibriumReport, m: &Matching, weights: &WeightSystem) {
        let g = self.graph;
        if self.scale.is_none() {
            self.scale = Some(welfare(g, weights, m));
        }
        let norm = |x: &Weight| match (self.mode, &self.scale) {
            (Mode::Weighted, Some(s)) if !s.is_zero() => x / s,
            (Mode::Weighted, _) => Weight::zero(),
            (Mode::Cardinality, _) => x.clone(),
        };
        let ia = match self.mode {
            Mode::Cardinality => int(report.international_edges as i64),
            Mode::Weighted if m.is_empty() => Weight::zero(),
            Mode::Weighted => ratio(report.international_edges as i64, m.len() as i64),
        };
        let imps: Vec<Weight> = report.per_player.iter().map(|r| norm(&r.improvement)).collect();
        let Some((hi, lo)) = imps.iter().max().zip(imps.iter().min()) else { return };
        let at = |v: &Weight| -> Vec<String> {
            g.players().filter(|p| &imps[p.0] == v).map(|p| g.label(p).to_string()).collect()
        };
        let s = self.best.get_or_insert_with(|| NeSummary {
            imp_max: hi.clone(),
            players_max: Vec::new(),
            imp_min: lo.clone(),
            players_min: Vec::new(),
            ia_high: ia.clone(),
            ia_low: ia.clone(),
        });
        merge(&mut s.imp_max, &mut s.players_max, hi, at(hi), true);
        merge(&mut s.imp_min, &mut s.players_min, lo, at(lo), false);
        if ia > s.ia_high {
            s.ia_high = ia.clone();
        }
        if ia < s.ia_low {
            s.ia_low = ia;
        }
        let order = |l: &String| g.player_by_label(l).map(|p| p.0).unwrap_or(usize::MAX);
        s.players_max.sort_by_key(order);
        s.players_min.sort_by_key(order);
    }
}

fn merge(best: &mut Weight, who: &mut Vec<String>, v: &Weight, at: Vec<String>, larger: bool) {
    let better = if larger { v > best } else { v < best };
    if better {
        *best = v.clone();
        who.clear();
    }
    if v == best {
        for l in at {
            if !who.contains(&l) {
                who.push(l);
            }
        }
    }
}

fn family(settings: &ExperimentSettings) -> PolicyFamily<'_> {
    match &settings.ia {
        None => PolicyFamily::ExistsFriendly,
        Some(p) => PolicyFamily::Fixed(p),
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for one instance of a campaign.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix(seed), |acc, &p| splitmix(acc ^ p))
}

fn instance_seed(settings: &ExperimentSettings, meta: &InstanceMeta, n: usize) -> u64 {
    derive_seed(
        settings.seed,
        &[meta.seed.unwrap_or(0), meta.year.unwrap_or(0) as u64, n as u64, meta.ins.unwrap_or(0) as u64],
    )
}

fn pct(k: usize, n: usize) -> Option<Weight> {
    (n > 0).then(|| ratio(100 * k as i64, n as i64))
}

/// Samples maximum matchings uniformly, verifies the distinct ones and
/// fills a cardinality row.
pub fn run_cardinality_experiment(inst: &Instance, settings: &ExperimentSettings) -> Result<ExperimentRow> {
    if inst.weights.mode() != Mode::Cardinality {
        return Err(KegError::PolicyMismatch("cardinality experiment needs a cardinality instance".into()));
    }
    let g = &inst.graph;
    let mut row = ExperimentRow::new(Mode::Cardinality, inst);
    let view = GraphView::of_graph(g);
    let start = Instant::now();
    let sampler = MaximumMatchingSampler::with_cap(&view, MAX_VERTEX_CAP)?;
    row.optimum = int(sampler.opt() as i64);
    row.optimum_count = Some(sampler.total().clone());

    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(settings, &inst.meta, g.n_vertices()));
    let mut unique: Vec<Matching> = Vec::new();
    let mut multiplicity: Vec<usize> = Vec::new();
    for _ in 0..settings.budget {
        if start.elapsed() > settings.time_limit_gen {
            row.gen_timed_out = true;
            break;
        }
        let m = sampler.sample(g, &view, &mut rng);
        row.draws += 1;
        match unique.iter().position(|u| *u == m) {
            Some(i) => multiplicity[i] += 1,
            None => {
                unique.push(m);
                multiplicity.push(1);
            }
        }
    }
    row.time_gen = settings.timing.then(|| start.elapsed().as_secs_f64());
    row.candidates = unique.len();

    let mut tally = Tally::new(g, Mode::Cardinality);
    let ne_start = Instant::now();
    for (m, &mult) in unique.iter().zip(&multiplicity) {
        if ne_start.elapsed() > settings.time_limit_ne {
            row.ne_timed_out = true;
            break;
        }
        let report = verify_ne(g, &inst.weights, m, family(settings), settings.limits)?;
        row.verified += 1;
        row.unresolved += report.unresolved as usize;
        if report.is_ne {
            row.ne_count += 1;
            row.ne_draws += mult;
            tally.add(&report, m, &inst.weights);
        }
    }
    if settings.timing && row.verified > 0 {
        row.time_ne = Some(ne_start.elapsed().as_secs_f64() / row.verified as f64);
    }
    row.pct_ne = pct(row.ne_count, row.verified);
    row.pct_ne_draws = (!row.ne_timed_out).then(|| pct(row.ne_draws, row.draws)).flatten();
    row.summary = tally.best;
    Ok(row)
}

/// Walks the heaviest matchings in order, verifying each, and fills a
/// weighted row.
pub fn run_weighted_experiment(inst: &Instance, settings: &ExperimentSettings) -> Result<ExperimentRow> {
    if inst.weights.mode() != Mode::Weighted {
        return Err(KegError::PolicyMismatch("weighted experiment needs a weighted instance".into()));
    }
    let g = &inst.graph;
    let mut row = ExperimentRow::new(Mode::Weighted, inst);
    let view = GraphView::of_graph(g);
    let w: Vec<Weight> = view.ids().iter().map(|&e| inst.weights.welfare_value(g, e)).collect();

    let start = Instant::now();
    let mut candidates: Vec<(Matching, Weight)> = Vec::new();
    for item in KBest::new(g, &view, &w)?.take(settings.budget) {
        candidates.push(item);
        if start.elapsed() > settings.time_limit_gen {
            row.gen_timed_out = true;
            break;
        }
    }
    row.time_gen = settings.timing.then(|| start.elapsed().as_secs_f64());
    row.draws = candidates.len();
    row.candidates = candidates.len();
    row.optimum = candidates.first().map(|(_, v)| v.clone()).unwrap_or_default();
    let ratio_to_best = |v: &Weight| if row.optimum.is_zero() { int(1) } else { v / &row.optimum };

    let mut tally = Tally::new(g, Mode::Weighted);
    let ne_start = Instant::now();
    for (i, (m, v)) in candidates.iter().enumerate() {
        if ne_start.elapsed() > settings.time_limit_ne {
            row.ne_timed_out = true;
            break;
        }
        let report = verify_ne(g, &inst.weights, m, family(settings), settings.limits)?;
        row.verified += 1;
        row.unresolved += report.unresolved as usize;
        if report.is_ne {
            row.ne_count += 1;
            if row.iter.is_none() {
                row.iter = Some(i);
                row.epsilon = Some(Epsilon::Exact(ratio_to_best(v)));
            }
            tally.add(&report, m, &inst.weights);
        }
    }
    if row.epsilon.is_none() {
        if let Some((_, v)) = candidates.get(row.verified.saturating_sub(1)) {
            row.epsilon = Some(Epsilon::UpperBound(ratio_to_best(v)));
        }
    }
    if settings.timing && row.verified > 0 {
        row.time_ne = Some(ne_start.elapsed().as_secs_f64() / row.verified as f64);
    }
    row.ne_draws = row.ne_count;
    row.pct_ne = pct(row.ne_count, row.verified);
    row.pct_ne_draws = row.pct_ne.clone();
    row.summary = tally.best;
    Ok(row)
}

pub fn run_experiment(inst: &Instance, settings: &ExperimentSettings) -> Result<ExperimentRow> {
    match inst.weights.mode() {
        Mode::Cardinality => run_cardinality_experiment(inst, settings),
        Mode::Weighted => run_weighted_experiment(inst, settings),
    }
}

/// Runs every instance in parallel; rows come back sorted by
/// `(year, |V|, ins)`.
pub fn run_campaign(instances: &[Instance], settings: &ExperimentSettings) -> Result<Vec<ExperimentRow>> {
    let mut rows = instances
        .par_iter()
        .map(|inst| run_experiment(inst, settings))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.sort_key());
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub sizes: Vec<usize>,
    pub years: Vec<u16>,
    /// Instance numbers, e.g. `1..=10`.
    pub instances: Vec<u32>,
    pub players: Option<Vec<String>>,
    pub mode: Mode,
    pub seed: u64,
}

/// Generates every `(year, size, ins)` instance of a campaign.
pub fn generate_campaign(dist: &Distribution, spec: &CampaignSpec) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for &year in &spec.years {
        for &n in &spec.sizes {
            for &ins in &spec.instances {
                let seed = derive_seed(spec.seed, &[year as u64, n as u64, ins as u64]);
                let cfg = dist.config(n, year, spec.players.clone(), seed)?;
                out.push(build_instance(dist, &cfg, spec.mode, Some(ins))?);
            }
        }
    }
    Ok(out)
}

/// One generated instance with its weights and metadata.
pub fn build_instance(
    dist: &Distribution,
    cfg: &crate::generator::GeneratorConfig,
    mode: Mode,
    ins: Option<u32>,
) -> Result<Instance> {
    let graph = generate_instance(cfg)?.graph;
    let weights = match mode {
        Mode::Cardinality => WeightSystem::cardinality(&graph),
        Mode::Weighted => generate_weights(&graph, &dist.donor_age_sample, cfg.seed)?,
    };
    let mut inst = Instance::new(graph, weights)?;
    inst.meta = InstanceMeta { year: Some(cfg.year), ins, seed: Some(cfg.seed) };
    Ok(inst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn header(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Cardinality => &CARDINALITY_HEADER,
        Mode::Weighted => &WEIGHTED_HEADER,
    }
}

pub fn results_csv(rows: &[ExperimentRow], mode: Mode) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(mode))?;
    for r in rows {
        if r.mode != mode {
            return Err(KegError::PolicyMismatch("rows of different modes in one table".into()));
        }
        w.write_record(r.cells())?;
    }
    let bytes = w.into_inner().map_err(|e| KegError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn results_json(rows: &[ExperimentRow]) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Array(rows.iter().map(ExperimentRow::to_json).collect()))
        .expect("rows serialize");
    s.push('\n');
    s
}

pub fn emit_results(rows: &[ExperimentRow], mode: Mode, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let body = match format {
        OutputFormat::Csv => results_csv(rows, mode)?,
        OutputFormat::Json => results_json(rows),
    };
    std::fs::write(path, body)?;
    Ok(())
}

/// Minimal SVG bar chart.
pub fn svg_bar_chart(title: &str, bars: &[(String, f64)], y_label: &str) -> String {
    let (w, h, left, bottom, top) = (640.0, 360.0, 56.0, 64.0, 36.0);
    let plot_h = h - bottom - top;
    let max = bars.iter().map(|b| b.1).fold(0.0f64, f64::max).max(1e-9);
    let slot = (w - left - 16.0) / bars.len().max(1) as f64;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{}</text>\n\
         <line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        w / 2.0,
        escape(title),
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(y_label),
        top + plot_h,
        w - 16.0,
        top + plot_h,
    );
    for (i, (label, v)) in bars.iter().enumerate() {
        let bh = v / max * plot_h;
        let x = left + i as f64 * slot + slot * 0.1;
        s.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{bh:.1}\" fill=\"#4477aa\"><title>{}: {v:.2}</title></rect>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" transform=\"rotate(-45 {:.1} {:.1})\">{}</text>\n",
            top + plot_h - bh,
            slot * 0.8,
            escape(label),
            x + slot * 0.4,
            top + plot_h + 12.0,
            x + slot * 0.4,
            top + plot_h + 12.0,
            escape(label),
        ));
    }
    s.push_str(&format!("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{max:.2}</text>\n", left - 4.0, top + 4.0));
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Histogram of ages in ten-year bins.
pub fn age_histogram_svg(ages: &[u32]) -> String {
    let max = ages.iter().copied().max().unwrap_or(0);
    let bars: Vec<(String, f64)> = (0..=max / 10)
        .map(|b| {
            let n = ages.iter().filter(|&&a| a / 10 == b).count();
            (format!("{}-{}", b * 10, b * 10 + 9), n as f64)
        })
        .collect();
    svg_bar_chart("Donor ages", &bars, "count")
}

/// Share of equilibria per row.
pub fn pct_ne_svg(rows: &[ExperimentRow]) -> String {
    let bars: Vec<(String, f64)> = rows
        .iter()
        .map(|r| {
            let label = format!(
                "{}/{}/{}",
                r.year.map(|y| y.to_string()).unwrap_or_default(),
                r.n_vertices,
                r.ins.map(|i| i.to_string()).unwrap_or_default()
            );
            (label, r.pct_ne.as_ref().and_then(|p| p.to_f64()).unwrap_or(0.0))
        })
        .collect();
    svg_bar_chart("Equilibria among candidates", &bars, "% NE")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> ExperimentSettings {
        ExperimentSettings { timing: false, ..Default::default() }
    }

    #[test]
    fn rounding() {
        assert_eq!(fixed2(&ratio(2, 3)), "0.67");
        assert_eq!(fixed2(&ratio(1, 200)), "0.01");
        assert_eq!(fixed2(&int(100)), "100.00");
        assert_eq!(fixed2(&ratio(-1, 3)), "-0.33");
    }

    #[test]
    fn empty_graph_row() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 1, 1, 0], &[]).unwrap();
        let row = run_cardinality_experiment(&Instance::cardinality(g), &quiet()).unwrap();
        assert_eq!(row.optimum, int(0));
        assert_eq!(row.optimum_count, Some(BigUint::from(1u32)));
        assert_eq!(row.pct_ne, Some(int(100)));
        let s = row.summary.unwrap();
        assert_eq!((s.imp_max, s.imp_min), (int(0), int(0)));
    }

    #[test]
    fn single_international_edge() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 1], &[(0, 1)]).unwrap();
        let row = run_cardinality_experiment(&Instance::cardinality(g), &quiet()).unwrap();
        assert_eq!(row.pct_ne, Some(int(100)));
        let s = row.summary.as_ref().unwrap();
        assert_eq!((s.ia_high.clone(), s.ia_low.clone()), (int(1), int(1)));
        let csv = results_csv(&[row], Mode::Cardinality).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap(), CARDINALITY_HEADER.join(","));
    }

    #[test]
    fn weighted_path_row() {
        let g = CompatibilityGraph::new(["P1", "P2"], vec![0, 1, 0, 1], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let w = WeightSystem::weighted(&g, vec![(int(1), int(5)), (int(1), int(10)), (int(1), int(5))]).unwrap();
        let inst = Instance::new(g, w).unwrap();
        let row = run_weighted_experiment(&inst, &quiet()).unwrap();
        assert_eq!(row.optimum, int(12));
        assert_eq!(row.iter, Some(0));
        assert_eq!(row.epsilon, Some(Epsilon::Exact(int(1))));
        let one = ExperimentSettings { budget: 1, ..quiet() };
        assert_eq!(run_weighted_experiment(&inst, &one).unwrap().pct_ne, Some(int(100)));
    }

    #[test]
    fn timed_out_cells() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 1], &[(0, 1)]).unwrap();
        let mut row = run_cardinality_experiment(&Instance::cardinality(g), &quiet()).unwrap();
        row.gen_timed_out = true;
        let cells = row.cells();
        assert_eq!(cells[6], "tl");
        assert_eq!(cells[13], "tl");
        assert_eq!(cells[4], "1");
        assert_eq!(results_csv(&[], Mode::Weighted).unwrap().lines().count(), 1);
    }

    #[test]
    fn mode_checks() {
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 1], &[(0, 1)]).unwrap();
        assert!(run_weighted_experiment(&Instance::cardinality(g), &quiet()).is_err());
    }

    #[test]
    fn svg_is_well_formed() {
        let s = age_histogram_svg(&[20, 25, 61]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<rect").count(), 7);
    }
}
