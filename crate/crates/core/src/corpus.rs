//! On-disk texture corpora and the batch pipeline over them.
//!
//! A corpus directory holds `manifest.json`, one `<id>.png` / `<id>.json`
//! (ground truth) pair per texture, and after description the JSON-lines
//! tables `descriptors.jsonl` and `gt_descriptors.jsonl` with their
//! normalization models.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::{describe_ground_truth, describe_image, Descriptor, NormalizationModel, COMPONENT_LABELS};
use crate::detect::DetectorConfig;
use crate::error::{Error, Result};
use crate::rank_eval::{
    ground_truth_order, ranking_accuracy, train_linear, AttributeColumn, RankingAccuracy, DEFAULT_GAMMA_FRACTION, FOLDS,
};
use crate::raster::{load_png, save_png, RasterImage};
use crate::search::{simulate_search, SearchCorpus, SessionConfig, SessionTranscript, SimulationSummary};
use crate::synth::{generate_texture, sample_spec, Coloring, GroundTruth, LineWidth, Regularity, TaskConstraints};
use crate::texel::ShapeClass;

pub const MANIFEST: &str = "manifest.json";
pub const DESCRIPTORS: &str = "descriptors.jsonl";
pub const GT_DESCRIPTORS: &str = "gt_descriptors.jsonl";
pub const NORMALIZATION: &str = "normalization.json";
pub const GT_NORMALIZATION: &str = "gt_normalization.json";

/// Thresholds overridable from a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub detector: DetectorConfig,
    /// Ranking indistinguishability band as a fraction of an attribute's range.
    pub gamma_fraction: f64,
    /// Search "equally" band fraction; defaults to `gamma_fraction`.
    pub epsilon_fraction: Option<f64>,
    pub session: SessionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            detector: DetectorConfig::default(),
            gamma_fraction: DEFAULT_GAMMA_FRACTION,
            epsilon_fraction: None,
            session: SessionConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn epsilon_fraction(&self) -> f64 {
        self.epsilon_fraction.unwrap_or(self.gamma_fraction)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub seed: u64,
    pub constraints: TaskConstraints,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRow {
    pub id: String,
    #[serde(flatten)]
    pub descriptor: Descriptor,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes through a temporary file so interrupted runs leave no partial outputs.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

pub fn texture_id(index: usize) -> String {
    format!("tex{index:05}")
}

/// Per-texture seed derived from the corpus seed and the texture index.
pub fn texture_seed(corpus_seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(corpus_seed);
    rng.set_stream(index as u64);
    rng.random()
}

/// Handle on a corpus directory.
#[derive(Clone, Debug)]
pub struct CorpusStore {
    root: PathBuf,
}

impl CorpusStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn image_path(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.png"))
    }

    pub fn annotation_path(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.json"))
    }

    pub fn manifest(&self) -> Result<Manifest> {
        read_json(&self.path(MANIFEST))
    }

    pub fn load_image(&self, id: &str) -> Result<RasterImage> {
        load_png(self.image_path(id))
    }

    pub fn load_truth(&self, id: &str) -> Result<GroundTruth> {
        read_json(&self.annotation_path(id))
    }

    pub fn descriptors(&self) -> Result<Vec<DescriptorRow>> {
        read_jsonl(&self.path(DESCRIPTORS))
    }

    pub fn gt_descriptors(&self) -> Result<Vec<DescriptorRow>> {
        read_jsonl(&self.path(GT_DESCRIPTORS))
    }

    pub fn normalization(&self) -> Result<NormalizationModel> {
        read_json(&self.path(NORMALIZATION))
    }

    pub fn gt_normalization(&self) -> Result<NormalizationModel> {
        read_json(&self.path(GT_NORMALIZATION))
    }

    /// Generates textures `0..count` that are not on disk yet and writes the
    /// manifest. Existing entries must match the requested seed and constraints.
    pub fn generate(&self, count: usize, seed: u64, constraints: &TaskConstraints) -> Result<Manifest> {
        constraints.validate()?;
        fs::create_dir_all(&self.root).map_err(|e| Error::io(&self.root, e))?;
        let previous: BTreeMap<String, ManifestEntry> = match self.manifest() {
            Ok(m) => m.entries.into_iter().map(|e| (e.id.clone(), e)).collect(),
            Err(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e),
        };
        let entries: Vec<ManifestEntry> = (0..count)
            .map(|i| ManifestEntry { id: texture_id(i), seed: texture_seed(seed, i), constraints: constraints.clone() })
            .collect();
        for e in &entries {
            if previous.get(&e.id).is_some_and(|p| p != e) {
                return Err(Error::Malformed(format!(
                    "texture `{}` exists with a different seed or constraints; use a fresh corpus directory",
                    e.id
                )));
            }
        }
        entries.par_iter().try_for_each(|e| self.generate_one(e))?;
        let mut merged = previous;
        for e in entries {
            merged.insert(e.id.clone(), e);
        }
        let manifest = Manifest { entries: merged.into_values().collect() };
        write_json(&self.path(MANIFEST), &manifest)?;
        Ok(manifest)
    }

    fn generate_one(&self, entry: &ManifestEntry) -> Result<()> {
        let (png, json) = (self.image_path(&entry.id), self.annotation_path(&entry.id));
        if png.exists() && json.exists() {
            return Ok(());
        }
        let spec = sample_spec(&mut ChaCha8Rng::seed_from_u64(entry.seed), &entry.constraints)?;
        let (image, truth) = generate_texture(&spec)?;
        let tmp = png.with_extension("png.tmp");
        save_png(&image, &tmp)?;
        fs::rename(&tmp, &png).map_err(|e| Error::io(&png, e))?;
        write_json(&json, &truth)
    }

    /// Detected and ground-truth descriptors for every manifest entry plus
    /// their normalization models.
    pub fn describe(&self, config: &DetectorConfig) -> Result<DescribeOutput> {
        let manifest = self.manifest()?;
        if manifest.entries.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let rows = manifest
            .entries
            .par_iter()
            .map(|e| {
                let image = self.load_image(&e.id)?;
                let truth = self.load_truth(&e.id)?;
                let detected = describe_image(&image, config)?;
                let gt = describe_ground_truth(&image, &truth)?;
                Ok((DescriptorRow { id: e.id.clone(), descriptor: detected }, DescriptorRow { id: e.id.clone(), descriptor: gt }))
            })
            .collect::<Result<Vec<_>>>()?;
        let (detected, gt): (Vec<DescriptorRow>, Vec<DescriptorRow>) = rows.into_iter().unzip();
        let fit = |rows: &[DescriptorRow]| {
            NormalizationModel::fit(&rows.iter().map(|r| r.descriptor.clone()).collect::<Vec<_>>())
        };
        let normalization = fit(&detected)?;
        let gt_normalization = fit(&gt)?;
        write_jsonl(&self.path(DESCRIPTORS), &detected)?;
        write_jsonl(&self.path(GT_DESCRIPTORS), &gt)?;
        write_json(&self.path(NORMALIZATION), &normalization)?;
        write_json(&self.path(GT_NORMALIZATION), &gt_normalization)?;
        Ok(DescribeOutput { detected, gt, normalization, gt_normalization })
    }

    /// Normalized descriptors as a search corpus.
    pub fn search_corpus(&self, source: DescriptorSource, epsilon_fraction: f64) -> Result<SearchCorpus> {
        let (rows, model) = match source {
            DescriptorSource::Detected => (self.descriptors()?, self.normalization()?),
            DescriptorSource::GroundTruth => (self.gt_descriptors()?, self.gt_normalization()?),
        };
        SearchCorpus::with_epsilon_fraction(
            rows.into_iter().map(|r| (r.id, model.apply(&r.descriptor))).collect(),
            epsilon_fraction,
        )
    }

    /// Ranking accuracy of detected against ground-truth values per component.
    pub fn rank_eval(&self, gamma_fraction: f64) -> Result<RankingTable> {
        ranking_table(&self.descriptors()?, &self.gt_descriptors()?, gamma_fraction)
    }

    /// Oracle sessions for `sessions` targets drawn with `seed`. Sessions rank
    /// `source` descriptors; the oracle answers from ground-truth descriptors.
    pub fn simulate_search(&self, sessions: usize, seed: u64, source: DescriptorSource, config: &PipelineConfig) -> Result<(SimulationSummary, Vec<SessionTranscript>)> {
        let eps = config.epsilon_fraction();
        let truth = self.search_corpus(DescriptorSource::GroundTruth, eps)?;
        let corpus = match source {
            DescriptorSource::GroundTruth => truth.clone(),
            DescriptorSource::Detected => self.search_corpus(source, eps)?,
        };
        let targets = pick_targets(corpus.ids(), sessions, seed);
        simulate_search(Arc::new(corpus), &truth, &targets, config.session)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorSource {
    #[default]
    Detected,
    GroundTruth,
}

/// `n` distinct targets when the corpus is large enough, sampled with replacement otherwise.
pub fn pick_targets(ids: &[String], n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n <= ids.len() {
        ids.choose_multiple(&mut rng, n).cloned().collect()
    } else {
        (0..n).filter_map(|_| ids.choose(&mut rng).cloned()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescribeOutput {
    pub detected: Vec<DescriptorRow>,
    pub gt: Vec<DescriptorRow>,
    pub normalization: NormalizationModel,
    pub gt_normalization: NormalizationModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub attribute: String,
    pub gamma: f64,
    #[serde(flatten)]
    pub accuracy: RankingAccuracy<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub images: usize,
    pub rows: Vec<RankingRow>,
}

impl RankingTable {
    pub fn get(&self, attribute: &str) -> Option<&RankingRow> {
        self.rows.iter().find(|r| r.attribute == attribute)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{:<28} {:>9} {:>9} {:>9} {:>9}\n", "attribute", "ordered", "combined", "pairs", "gamma");
        for r in &self.rows {
            let ordered = r.accuracy.ordered.map_or("-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                s,
                "{:<28} {:>9} {:>9.4} {:>9} {:>9.4}",
                r.attribute, ordered, r.accuracy.combined, r.accuracy.ordered_pairs, r.gamma
            );
        }
        s
    }
}

/// Per-component ranking accuracy of `predicted` against `truth`, joined by id.
pub fn ranking_table(predicted: &[DescriptorRow], truth: &[DescriptorRow], gamma_fraction: f64) -> Result<RankingTable> {
    let pred: BTreeMap<&str, &Descriptor> = predicted.iter().map(|r| (r.id.as_str(), &r.descriptor)).collect();
    let mut rows = Vec::new();
    for (a, label) in COMPONENT_LABELS.iter().enumerate() {
        let gt: BTreeMap<String, f64> = truth.iter().map(|r| (r.id.clone(), r.descriptor.values()[a])).collect();
        let column = AttributeColumn::with_gamma_fraction(*label, gt, gamma_fraction)?;
        let pairs = ground_truth_order(&column)?;
        let values = truth
            .iter()
            .map(|r| {
                let d = pred.get(r.id.as_str()).ok_or_else(|| Error::UnknownImage(r.id.clone()))?;
                Ok((r.id.clone(), d.values()[a]))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        rows.push(RankingRow {
            attribute: label.to_string(),
            gamma: column.gamma,
            accuracy: ranking_accuracy(&values, &pairs)?,
        });
    }
    Ok(RankingTable { images: truth.len(), rows })
}

/// The binary texture discrimination tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryTask {
    /// Uniform (negative) versus non-uniform (positive) widths of regularly spaced lines.
    LineUniformity,
    /// Regular (negative) versus jittered (positive) circles.
    CirclePositioning,
    /// Single-color (negative) versus bi-color (positive) circles.
    CircleColoring,
}

impl BinaryTask {
    pub const ALL: [BinaryTask; 3] = [BinaryTask::LineUniformity, BinaryTask::CirclePositioning, BinaryTask::CircleColoring];

    pub fn as_str(self) -> &'static str {
        match self {
            BinaryTask::LineUniformity => "line_uniformity",
            BinaryTask::CirclePositioning => "circle_positioning",
            BinaryTask::CircleColoring => "circle_coloring",
        }
    }

    /// Constraints of the negative and positive class.
    pub fn constraints(self, image_size: u32) -> (TaskConstraints, TaskConstraints) {
        let base = |shape| TaskConstraints { shapes: Some(vec![shape]), image_size, ..Default::default() };
        match self {
            BinaryTask::LineUniformity => {
                // Band positions stay regular so that only the widths differ.
                let mk = |w| TaskConstraints {
                    line_width: Some(w),
                    regularity: Some(Regularity::Regular),
                    ..base(ShapeClass::Line)
                };
                (mk(LineWidth::Uniform), mk(LineWidth::Nonuniform))
            }
            BinaryTask::CirclePositioning => {
                let mk = |r| TaskConstraints { regularity: Some(r), ..base(ShapeClass::Circle) };
                (mk(Regularity::Regular), mk(Regularity::Jittered))
            }
            BinaryTask::CircleColoring => {
                let mk = |c| TaskConstraints { coloring: Some(c), ..base(ShapeClass::Circle) };
                (mk(Coloring::Mono), mk(Coloring::Bi))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: BinaryTask,
    pub images: usize,
    pub accuracy: f64,
}

/// Generates `count` textures (half per class) in memory, describes them and
/// cross-validates the linear classifier on the normalized descriptors.
pub fn classify_task(task: BinaryTask, count: usize, seed: u64, image_size: u32, config: &DetectorConfig) -> Result<TaskResult> {
    let (neg, pos) = task.constraints(image_size);
    let labels: Vec<bool> = (0..count).map(|i| i % 2 == 1).collect();
    let descriptors = labels
        .par_iter()
        .enumerate()
        .map(|(i, &positive)| {
            let c = if positive { &pos } else { &neg };
            let spec = sample_spec(&mut ChaCha8Rng::seed_from_u64(texture_seed(seed, i)), c)?;
            let (image, _) = generate_texture(&spec)?;
            describe_image(&image, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let model = NormalizationModel::fit(&descriptors)?;
    let x: Vec<Vec<f64>> = descriptors.iter().map(|d| model.apply(d).values().to_vec()).collect();
    let accuracy = train_linear(&x, &labels, FOLDS, seed)?;
    Ok(TaskResult { task, images: count, accuracy })
}
