//! Random instances built from province, blood group and cPRA tables.
//!
//! Generation runs in three steps, each on its own ChaCha stream so that
//! changing one table never shifts the draws of a later step:
//!
//! 1. every pair draws a province;
//! 2. every pair draws a (patient, donor) blood group combination from its
//!    province table and a cPRA band, then a whole-percent cPRA uniformly
//!    inside the band;
//! 3. every unordered pair of vertices, in ascending order, consumes one
//!    draw; an edge appears when the two pairs are mutually ABO compatible
//!    and the draw falls under `(1 - cpra_a) * (1 - cpra_b)`.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{KegError, Result};
use crate::graph::{BloodType, CompatibilityGraph, PairAttributes, PlayerId};
use crate::rational::{parse_weight, ratio, Weight};
use crate::weights::WeightSystem;

const STREAM_PROVINCES: u64 = 1;
const STREAM_PAIRS: u64 = 2;
const STREAM_EDGES: u64 = 3;
const STREAM_AGES: u64 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpraBand {
    pub low: u8,
    pub high: u8,
    pub probability: Weight,
}

/// Probability of each (patient, donor) blood group combination.
pub type BloodTable = BTreeMap<(BloodType, BloodType), Weight>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloodTypeDistribution {
    pub national: BloodTable,
    /// Provinces without an entry use the national table.
    pub provinces: BTreeMap<String, BloodTable>,
}

impl BloodTypeDistribution {
    pub fn table(&self, province: &str) -> &BloodTable {
        self.provinces.get(province).unwrap_or(&self.national)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub n_vertices: usize,
    pub year: u16,
    /// Province label to probability, in player order.
    pub province_distribution: Vec<(String, Weight)>,
    pub blood_type_distribution: BloodTypeDistribution,
    pub cpra_bands: Vec<CpraBand>,
    pub player_subset: Option<Vec<String>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedPair {
    pub owner: PlayerId,
    pub patient_blood: BloodType,
    pub donor_blood: BloodType,
    /// Whole percent.
    pub cpra_percent: u8,
}

impl GeneratedPair {
    pub fn cpra(&self) -> Weight {
        ratio(self.cpra_percent as i64, 100)
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub graph: CompatibilityGraph,
    pub pairs: Vec<GeneratedPair>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BandRec {
    low: u8,
    high: u8,
    probability: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct BloodRec {
    /// Keys are `"patient/donor"`, e.g. `"O/A"`.
    national: BTreeMap<String, String>,
    #[serde(default)]
    provinces: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DistributionRec {
    /// Ordered list of `[label, probability]`.
    province_distribution: Vec<(String, String)>,
    blood_type_distribution: BloodRec,
    /// Bands per year.
    cpra_bands: BTreeMap<String, Vec<BandRec>>,
    #[serde(default)]
    donor_age_sample: Vec<u32>,
}

/// Tables read from a distribution file; the run parameters are supplied
/// separately.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    pub province_distribution: Vec<(String, Weight)>,
    pub blood_type_distribution: BloodTypeDistribution,
    pub cpra_bands: BTreeMap<u16, Vec<CpraBand>>,
    pub donor_age_sample: Vec<u32>,
}

impl Distribution {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let rec: DistributionRec = serde_json::from_str(s)?;
        let province_distribution = rec
            .province_distribution
            .iter()
            .map(|(l, p)| Ok((l.clone(), parse_weight(p)?)))
            .collect::<Result<Vec<_>>>()?;
        let blood_type_distribution = BloodTypeDistribution {
            national: blood_table(&rec.blood_type_distribution.national)?,
            provinces: rec
                .blood_type_distribution
                .provinces
                .iter()
                .map(|(l, t)| Ok((l.clone(), blood_table(t)?)))
                .collect::<Result<_>>()?,
        };
        let mut cpra_bands = BTreeMap::new();
        for (year, bands) in &rec.cpra_bands {
            let y: u16 = year.parse().map_err(|_| KegError::Config(format!("bad year {year:?}")))?;
            let bands = bands
                .iter()
                .map(|b| Ok(CpraBand { low: b.low, high: b.high, probability: parse_weight(&b.probability)? }))
                .collect::<Result<Vec<_>>>()?;
            cpra_bands.insert(y, bands);
        }
        Ok(Distribution {
            province_distribution,
            blood_type_distribution,
            cpra_bands,
            donor_age_sample: rec.donor_age_sample,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn config(
        &self,
        n_vertices: usize,
        year: u16,
        player_subset: Option<Vec<String>>,
        seed: u64,
    ) -> Result<GeneratorConfig> {
        let bands = self
            .cpra_bands
            .get(&year)
            .ok_or_else(|| KegError::Config(format!("no cPRA bands for year {year}")))?;
        let cfg = GeneratorConfig {
            n_vertices,
            year,
            province_distribution: self.province_distribution.clone(),
            blood_type_distribution: self.blood_type_distribution.clone(),
            cpra_bands: bands.clone(),
            player_subset,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn blood_table(raw: &BTreeMap<String, String>) -> Result<BloodTable> {
    raw.iter()
        .map(|(k, p)| {
            let bad = || KegError::Config(format!("bad blood group key {k:?}"));
            let (a, b) = k.split_once('/').ok_or_else(bad)?;
            let pair = (BloodType::parse(a).ok_or_else(bad)?, BloodType::parse(b).ok_or_else(bad)?);
            Ok((pair, parse_weight(p)?))
        })
        .collect()
}

fn check_sums_to_one<'a>(what: &str, ps: impl Iterator<Item = &'a Weight>) -> Result<()> {
    let mut total = Weight::zero();
    for p in ps {
        if *p < Weight::zero() {
            return Err(KegError::Config(format!("{what}: negative probability")));
        }
        total += p;
    }
    if total.is_one() {
        Ok(())
    } else {
        Err(KegError::Config(format!("{what}: probabilities sum to {total}, not 1")))
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2009..=2013).contains(&self.year) {
            return Err(KegError::Config(format!("year {} outside 2009..2013", self.year)));
        }
        check_sums_to_one("province distribution", self.province_distribution.iter().map(|(_, p)| p))?;
        let mut labels: Vec<&str> = self.province_distribution.iter().map(|(l, _)| l.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(KegError::Config("duplicate province label".into()));
        }
        let bt = &self.blood_type_distribution;
        check_sums_to_one("national blood table", bt.national.values())?;
        for (label, t) in &bt.provinces {
            if labels.binary_search(&label.as_str()).is_err() {
                return Err(KegError::UnknownPlayer(label.clone()));
            }
            check_sums_to_one(&format!("blood table of {label}"), t.values())?;
        }
        check_sums_to_one("cPRA bands", self.cpra_bands.iter().map(|b| &b.probability))?;
        let mut bands: Vec<&CpraBand> = self.cpra_bands.iter().collect();
        bands.sort_by_key(|b| b.low);
        let mut next = 0u16;
        for b in bands {
            if b.low > b.high || b.low as u16 != next {
                return Err(KegError::Config("cPRA bands must cover 0..=100 without overlap".into()));
            }
            next = b.high as u16 + 1;
        }
        if next != 101 {
            return Err(KegError::Config("cPRA bands must cover 0..=100 without overlap".into()));
        }
        if let Some(subset) = &self.player_subset {
            if subset.is_empty() {
                return Err(KegError::Config("empty player subset".into()));
            }
            for l in subset {
                if labels.binary_search(&l.as_str()).is_err() {
                    return Err(KegError::UnknownPlayer(l.clone()));
                }
            }
        }
        Ok(())
    }

    /// Players of the generated graph with their (renormalized) weights.
    fn players(&self) -> Vec<(String, Weight)> {
        match &self.player_subset {
            None => self.province_distribution.clone(),
            Some(subset) => self
                .province_distribution
                .iter()
                .filter(|(l, _)| subset.contains(l))
                .cloned()
                .collect(),
        }
    }
}

/// Categorical distribution over exact rational masses.
struct Categorical {
    cumulative: Vec<u128>,
}

impl Categorical {
    fn new(masses: &[Weight]) -> Result<Self> {
        let lcm = masses.iter().fold(BigInt::one(), |acc, m| acc.lcm(m.denom()));
        let mut cumulative = Vec::with_capacity(masses.len());
        let mut acc = 0u128;
        for m in masses {
            let k = (m.numer() * (&lcm / m.denom()))
                .to_u128()
                .ok_or_else(|| KegError::Config("probability table too fine-grained".into()))?;
            acc = acc
                .checked_add(k)
                .ok_or_else(|| KegError::Config("probability table too fine-grained".into()))?;
            cumulative.push(acc);
        }
        if acc == 0 {
            return Err(KegError::Config("probability table has no mass".into()));
        }
        Ok(Categorical { cumulative })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let x = rng.gen_range(0..total);
        self.cumulative.partition_point(|&c| c <= x)
    }
}

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s);
    rng
}

/// Both patients can receive from the other pair's donor.
pub fn mutually_compatible(a: &GeneratedPair, b: &GeneratedPair) -> bool {
    a.donor_blood.can_donate_to(b.patient_blood) && b.donor_blood.can_donate_to(a.patient_blood)
}

pub fn generate_instance(config: &GeneratorConfig) -> Result<GeneratedInstance> {
    config.validate()?;
    let players = config.players();
    let masses: Vec<Weight> = players.iter().map(|(_, p)| p.clone()).collect();
    let provinces = Categorical::new(&masses)?;
    let mut rng = stream(config.seed, STREAM_PROVINCES);
    let owners: Vec<usize> = (0..config.n_vertices).map(|_| provinces.sample(&mut rng)).collect();

    let bands = Categorical::new(&config.cpra_bands.iter().map(|b| b.probability.clone()).collect::<Vec<_>>())?;
    let mut tables = Vec::with_capacity(players.len());
    for (label, _) in &players {
        let t = config.blood_type_distribution.table(label);
        let keys: Vec<(BloodType, BloodType)> = t.keys().copied().collect();
        let dist = Categorical::new(&t.values().cloned().collect::<Vec<_>>())?;
        tables.push((keys, dist));
    }
    let mut rng = stream(config.seed, STREAM_PAIRS);
    let pairs: Vec<GeneratedPair> = owners
        .iter()
        .map(|&o| {
            let (keys, dist) = &tables[o];
            let (patient_blood, donor_blood) = keys[dist.sample(&mut rng)];
            let band = &config.cpra_bands[bands.sample(&mut rng)];
            let cpra_percent = rng.gen_range(band.low..=band.high);
            GeneratedPair { owner: PlayerId(o), patient_blood, donor_blood, cpra_percent }
        })
        .collect();

    let edges = draw_edges(&pairs, config.seed);
    let graph = CompatibilityGraph::new(players.iter().map(|(l, _)| l.clone()), owners, &edges)?
        .with_attributes(
            pairs
                .iter()
                .map(|p| PairAttributes {
                    patient_blood: Some(p.patient_blood),
                    donor_blood: Some(p.donor_blood),
                    cpra_percent: Some(p.cpra_percent),
                })
                .collect(),
        )?;
    Ok(GeneratedInstance { graph, pairs })
}

/// Compatibility edges among already generated pairs, one uniform draw per
/// vertex pair in ascending order.
pub fn draw_edges(pairs: &[GeneratedPair], seed: u64) -> Vec<(usize, usize)> {
    let mut rng = stream(seed, STREAM_EDGES);
    let mut edges = Vec::new();
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            let x: u32 = rng.gen_range(0..10_000);
            let (pa, pb) = (&pairs[a], &pairs[b]);
            let threshold = (100 - pa.cpra_percent as u32) * (100 - pb.cpra_percent as u32);
            if mutually_compatible(pa, pb) && x < threshold {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Normalized donor weight `(max - x) / max` of every vertex, with ages
/// drawn uniformly with replacement from `ages`.
pub fn donor_weights(n_vertices: usize, ages: &[u32], seed: u64) -> Result<Vec<Weight>> {
    let max = ages.iter().copied().max().filter(|&m| m > 0).ok_or(KegError::EmptyAgeSample)?;
    let mut rng = stream(seed, STREAM_AGES);
    Ok((0..n_vertices)
        .map(|_| {
            let x = ages[rng.gen_range(0..ages.len())];
            ratio(max as i64 - x as i64, max as i64)
        })
        .collect())
}

/// Weighted valuations: the patient of `v` values an exchange with `u` by
/// the donor weight of `u`. Internal edges carry both transplants.
pub fn generate_weights(graph: &CompatibilityGraph, ages: &[u32], seed: u64) -> Result<WeightSystem> {
    let d = donor_weights(graph.n_vertices(), ages, seed)?;
    let values = graph
        .edges()
        .map(|(_, e)| {
            let (u, v) = (e.u.0, e.v.0);
            if e.is_international() {
                (d[v].clone(), d[u].clone())
            } else {
                (&d[u] + &d[v], Weight::zero())
            }
        })
        .collect();
    WeightSystem::weighted(graph, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(entries: &[(&str, &str)]) -> BTreeMap<String, String> {
        entries.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn dist() -> Distribution {
        let rec = DistributionRec {
            province_distribution: vec![
                ("ON".into(), "0.5".into()),
                ("QC".into(), "0.3".into()),
                ("PE".into(), "0.2".into()),
            ],
            blood_type_distribution: BloodRec {
                national: table(&[("O/A", "0.5"), ("A/O", "0.25"), ("B/B", "0.25")]),
                provinces: BTreeMap::new(),
            },
            cpra_bands: [(
                "2009".to_string(),
                vec![
                    BandRec { low: 0, high: 0, probability: "0.5".into() },
                    BandRec { low: 1, high: 96, probability: "0.3".into() },
                    BandRec { low: 97, high: 100, probability: "0.2".into() },
                ],
            )]
            .into_iter()
            .collect(),
            donor_age_sample: vec![20, 60],
        };
        Distribution::from_json_str(&serde_json::to_string(&rec).unwrap()).unwrap()
    }

    #[test]
    fn deterministic_and_valid() {
        let cfg = dist().config(25, 2009, None, 11).unwrap();
        let a = generate_instance(&cfg).unwrap();
        let b = generate_instance(&cfg).unwrap();
        assert_eq!(a.graph, b.graph);
        assert!(a.graph.validate().is_empty());
        for p in &a.pairs {
            assert!(p.cpra() >= Weight::zero() && p.cpra() <= Weight::one());
        }
        for (_, e) in a.graph.edges() {
            assert!(mutually_compatible(&a.pairs[e.u.0], &a.pairs[e.v.0]));
        }
    }

    #[test]
    fn subset_and_config_errors() {
        let d = dist();
        let cfg = d.config(20, 2009, Some(vec!["PE".into(), "ON".into()]), 3).unwrap();
        let g = generate_instance(&cfg).unwrap().graph;
        assert_eq!(g.labels(), ["ON", "PE"]);
        assert!(matches!(d.config(5, 2009, Some(vec!["XX".into()]), 0), Err(KegError::UnknownPlayer(_))));
        assert!(d.config(5, 2013, None, 0).is_err());
        let mut bad = cfg.clone();
        bad.cpra_bands[1].low = 2;
        assert!(bad.validate().is_err());
        bad = cfg;
        bad.province_distribution[0].1 = ratio(1, 3);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn full_cpra_gives_no_edges() {
        let pairs: Vec<GeneratedPair> = (0..12)
            .map(|i| GeneratedPair {
                owner: PlayerId(i % 2),
                patient_blood: BloodType::AB,
                donor_blood: BloodType::O,
                cpra_percent: 100,
            })
            .collect();
        assert!(draw_edges(&pairs, 5).is_empty());
        let easy: Vec<GeneratedPair> = pairs.iter().map(|p| GeneratedPair { cpra_percent: 0, ..p.clone() }).collect();
        assert_eq!(draw_edges(&easy, 5).len(), 66);
    }

    #[test]
    fn lowering_cpra_keeps_edges() {
        let cfg = dist().config(30, 2009, None, 42).unwrap();
        let inst = generate_instance(&cfg).unwrap();
        let lowered: Vec<GeneratedPair> = inst
            .pairs
            .iter()
            .map(|p| GeneratedPair { cpra_percent: p.cpra_percent / 2, ..p.clone() })
            .collect();
        let before = draw_edges(&inst.pairs, 42);
        let after = draw_edges(&lowered, 42);
        assert!(before.iter().all(|e| after.contains(e)));
    }

    #[test]
    fn donor_weight_formula() {
        let w = donor_weights(50, &[20, 60], 1).unwrap();
        assert!(w.iter().all(|x| *x == ratio(2, 3) || x.is_zero()));
        assert!(matches!(donor_weights(3, &[0], 1), Err(KegError::EmptyAgeSample)));
        assert!(matches!(donor_weights(3, &[], 1), Err(KegError::EmptyAgeSample)));
        let g = CompatibilityGraph::new(["A", "B"], vec![0, 0, 1], &[(0, 1), (1, 2)]).unwrap();
        let ws = generate_weights(&g, &[0], 1);
        assert!(ws.is_err());
        let ws = generate_weights(&g, &[30, 30], 1).unwrap();
        assert!(ws.ia_weight(crate::graph::EdgeId(1)).is_zero());
    }
}
