use std::path::PathBuf;

use keg_core::experiment::{
    build_instance, emit_results, generate_campaign, run_campaign, CampaignSpec, ExperimentSettings, OutputFormat,
};
use keg_core::generator::{generate_instance, Distribution};
use keg_core::{Instance, KegError, Mode};

fn distribution() -> Distribution {
    Distribution::read(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../config/distribution.json")).unwrap()
}

#[test]
fn generated_instance_survives_a_file_round_trip() {
    let dist = distribution();
    let cfg = dist.config(25, 2013, Some(vec!["ON".into(), "QC".into()]), 3).unwrap();
    let inst = build_instance(&dist, &cfg, Mode::Weighted, Some(4)).unwrap();
    assert!(inst.graph.validate().is_empty());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    inst.write(&path).unwrap();
    let back = Instance::read(&path).unwrap();
    assert_eq!(back, inst);
    assert_eq!(back.meta.ins, Some(4));

    let again = generate_instance(&cfg).unwrap();
    assert_eq!(again.graph, inst.graph);
}

#[test]
fn unknown_province_is_rejected() {
    let dist = distribution();
    assert!(matches!(dist.config(10, 2009, Some(vec!["XX".into()]), 0), Err(KegError::UnknownPlayer(_))));
    assert!(dist.config(10, 1999, None, 0).is_err());
}

#[test]
fn campaign_rows_are_sorted_and_consistent() {
    let dist = distribution();
    let spec = CampaignSpec {
        sizes: vec![12, 8],
        years: vec![2013, 2009],
        instances: vec![2, 1],
        players: Some(vec!["ON".into(), "AB".into(), "SK".into()]),
        mode: Mode::Cardinality,
        seed: 9,
    };
    let insts = generate_campaign(&dist, &spec).unwrap();
    assert_eq!(insts.len(), 8);
    let settings = ExperimentSettings { budget: 40, timing: false, ..Default::default() };
    let rows = run_campaign(&insts, &settings).unwrap();
    let keys: Vec<_> = rows.iter().map(|r| (r.year, r.n_vertices, r.ins)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &rows {
        assert!(r.ne_count <= r.verified && r.verified <= r.candidates && r.candidates <= r.draws);
    }

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    emit_results(&rows, Mode::Cardinality, OutputFormat::Csv, &csv).unwrap();
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 9);
    let json = dir.path().join("out.json");
    emit_results(&rows, Mode::Cardinality, OutputFormat::Json, &json).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc.as_array().map(Vec::len), Some(8));
}
