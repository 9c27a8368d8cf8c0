use std::fs;

use texelatt_core::corpus::*;
use texelatt_core::search::TieBreak;
use texelatt_core::synth::TaskConstraints;
use texelatt_core::Error;

fn small() -> TaskConstraints {
    TaskConstraints { image_size: 256, ..Default::default() }
}

fn files(dir: &std::path::Path, ext: &str) -> usize {
    fs::read_dir(dir).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == ext)).count()
}

#[test]
fn generate_writes_pairs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(dir.path());
    let m = store.generate(10, 7, &small()).unwrap();
    assert_eq!(m.entries.len(), 10);
    assert_eq!(m.ids().collect::<Vec<_>>(), (0..10).map(texture_id).collect::<Vec<_>>());
    assert_eq!(files(dir.path(), "png"), 10);
    assert_eq!(files(dir.path(), "json"), 11);
    let truth = store.load_truth("tex00003").unwrap();
    let image = store.load_image("tex00003").unwrap();
    assert_eq!(truth.dims(), image.dims());
}

#[test]
fn generate_rerun_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(dir.path());
    store.generate(4, 1, &small()).unwrap();
    let manifest = fs::read(store.path(MANIFEST)).unwrap();
    let image = fs::read(store.image_path("tex00002")).unwrap();
    let modified = fs::metadata(store.image_path("tex00002")).unwrap().modified().unwrap();
    store.generate(4, 1, &small()).unwrap();
    assert_eq!(fs::read(store.path(MANIFEST)).unwrap(), manifest);
    assert_eq!(fs::read(store.image_path("tex00002")).unwrap(), image);
    assert_eq!(fs::metadata(store.image_path("tex00002")).unwrap().modified().unwrap(), modified);
    assert_eq!(files(dir.path(), "png"), 4);
}

#[test]
fn generate_resumes_after_removal() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(dir.path());
    store.generate(3, 2, &small()).unwrap();
    let before = fs::read(store.image_path("tex00001")).unwrap();
    fs::remove_file(store.image_path("tex00001")).unwrap();
    store.generate(3, 2, &small()).unwrap();
    assert_eq!(fs::read(store.image_path("tex00001")).unwrap(), before);
}

#[test]
fn generate_refuses_a_different_seed() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(dir.path());
    store.generate(2, 2, &small()).unwrap();
    assert!(matches!(store.generate(2, 3, &small()), Err(Error::Malformed(_))));
}

#[test]
fn generate_zero_gives_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(dir.path());
    assert!(store.generate(0, 1, &small()).unwrap().entries.is_empty());
    assert!(store.manifest().unwrap().entries.is_empty());
    let err = store.describe(&Default::default()).unwrap_err();
    assert_eq!(err.to_string(), "manifest empty");
}

#[test]
fn describe_is_complete_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(dir.path());
    store.generate(10, 11, &small()).unwrap();
    let out = store.describe(&Default::default()).unwrap();
    assert_eq!(out.detected.len(), 10);
    assert_eq!(out.gt.len(), 10);
    assert!(out.detected.iter().all(|r| r.descriptor.values().len() == 36));
    assert_eq!(store.descriptors().unwrap(), out.detected);
    assert_eq!(store.gt_normalization().unwrap(), out.gt_normalization);

    let names = [DESCRIPTORS, GT_DESCRIPTORS, NORMALIZATION, GT_NORMALIZATION];
    let first: Vec<Vec<u8>> = names.iter().map(|n| fs::read(store.path(n)).unwrap()).collect();
    store.describe(&Default::default()).unwrap();
    let second: Vec<Vec<u8>> = names.iter().map(|n| fs::read(store.path(n)).unwrap()).collect();
    assert_eq!(first, second);

    let line = fs::read_to_string(store.path(DESCRIPTORS)).unwrap();
    let row: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    assert_eq!(row["id"], "tex00000");
    assert_eq!(row["component_labels"].as_array().unwrap().len(), 36);
}

#[test]
fn describe_reports_missing_images() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(dir.path());
    store.generate(3, 4, &small()).unwrap();
    fs::remove_file(store.image_path("tex00002")).unwrap();
    assert!(matches!(store.describe(&Default::default()), Err(Error::Io { .. })));
}

#[test]
fn ground_truth_against_itself_ranks_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(dir.path());
    store.generate(12, 5, &small()).unwrap();
    let out = store.describe(&Default::default()).unwrap();
    let table = ranking_table(&out.gt, &out.gt, 0.05).unwrap();
    assert_eq!(table.rows.len(), 36);
    for r in &table.rows {
        assert!(r.accuracy.ordered.is_none_or(|a| a == 1.0), "{}", r.attribute);
        assert_eq!(r.accuracy.combined, 1.0);
    }
    let text = store.rank_eval(0.05).unwrap().to_text();
    assert!(text.lines().any(|l| l.starts_with("area")));
    assert!(table.get("homogeneity").is_some());
}

#[test]
fn simulation_runs_on_a_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(dir.path());
    store.generate(16, 9, &small()).unwrap();
    store.describe(&Default::default()).unwrap();
    let config = PipelineConfig::default();
    let (a, ta) = store.simulate_search(5, 3, DescriptorSource::GroundTruth, &config).unwrap();
    let (b, tb) = store.simulate_search(5, 3, DescriptorSource::GroundTruth, &config).unwrap();
    assert_eq!(serde_json::to_string(&(&a, &ta)).unwrap(), serde_json::to_string(&(&b, &tb)).unwrap());
    assert_eq!(a.monotone_sessions, 5);
    store.simulate_search(5, 3, DescriptorSource::Detected, &config).unwrap();
}

#[test]
fn targets_are_distinct_when_possible() {
    let ids: Vec<String> = (0..10).map(texture_id).collect();
    let mut t = pick_targets(&ids, 10, 1);
    assert_eq!(t, pick_targets(&ids, 10, 1));
    t.sort();
    assert_eq!(t, ids);
    assert_eq!(pick_targets(&ids, 25, 1).len(), 25);
}

#[test]
fn seeds_depend_on_index_and_corpus_seed() {
    assert_ne!(texture_seed(1, 0), texture_seed(1, 1));
    assert_ne!(texture_seed(1, 0), texture_seed(2, 0));
    assert_eq!(texture_seed(9, 4), texture_seed(9, 4));
    assert_eq!(texture_id(42), "tex00042");
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(&path, r#"{"gamma_fraction": 0.1, "session": {"tie_break": "slack"}}"#).unwrap();
    let c = PipelineConfig::load(&path).unwrap();
    assert_eq!(c.gamma_fraction, 0.1);
    assert_eq!(c.epsilon_fraction(), 0.1);
    assert_eq!(c.session.tie_break, TieBreak::Slack);
    assert_eq!(c.session.page_size, 8);
    fs::write(&path, r#"{"gamma_fraction": "wide"}"#).unwrap();
    assert!(PipelineConfig::load(&path).is_err());
}

#[test]
fn binary_task_classes_differ_only_in_the_studied_factor() {
    for task in BinaryTask::ALL {
        let (neg, pos) = task.constraints(512);
        assert_ne!(neg, pos);
        assert_eq!(neg.shapes, pos.shapes);
        neg.validate().unwrap();
        pos.validate().unwrap();
    }
}

#[test]
fn small_task_run_is_reproducible() {
    let a = classify_task(BinaryTask::CirclePositioning, 20, 3, 256, &Default::default()).unwrap();
    let b = classify_task(BinaryTask::CirclePositioning, 20, 3, 256, &Default::default()).unwrap();
    assert_eq!(a, b);
    assert!((0.0..=1.0).contains(&a.accuracy));
}
