use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::raster::BitMask;
use crate::synth::GroundTruth;
use crate::texel::TexelRecord;

/// `0.50, 0.55, …, 0.95`.
pub const IOU_THRESHOLDS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];

/// Detection quality on one image. Counts are taken at IoU 0.5.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    /// Mean AP over the requested IoU thresholds.
    pub ap: f64,
    pub ap50: f64,
    pub ap75: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

const CELL: u32 = 64;

/// Sparse IoU table: for each prediction, `(gt index, IoU)` of overlapping truths.
fn overlaps(pred: &[TexelRecord], gt: &[&BitMask]) -> Vec<Vec<(usize, f64)>> {
    let mut grid: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (g, m) in gt.iter().enumerate() {
        if let Ok(b) = m.bbox() {
            for cy in b.y_min / CELL..=b.y_max / CELL {
                for cx in b.x_min / CELL..=b.x_max / CELL {
                    grid.entry((cx, cy)).or_default().push(g);
                }
            }
        }
    }
    pred.iter()
        .map(|p| {
            let b = p.bbox;
            let mut cands: Vec<usize> = Vec::new();
            for cy in b.y_min / CELL..=b.y_max / CELL {
                for cx in b.x_min / CELL..=b.x_max / CELL {
                    if let Some(v) = grid.get(&(cx, cy)) {
                        cands.extend(v);
                    }
                }
            }
            cands.sort_unstable();
            cands.dedup();
            cands
                .into_iter()
                .filter_map(|g| {
                    let iou = p.mask.iou(gt[g]);
                    (iou > 0.0).then_some((g, iou))
                })
                .collect()
        })
        .collect()
}

fn order_by_confidence(pred: &[TexelRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| pred[b].confidence.total_cmp(&pred[a].confidence));
    order
}

fn greedy(pred: &[TexelRecord], table: &[Vec<(usize, f64)>], n_gt: usize, threshold: f64) -> Vec<Option<(usize, f64)>> {
    let mut taken = vec![false; n_gt];
    let mut out = vec![None; pred.len()];
    for p in order_by_confidence(pred) {
        let best = table[p]
            .iter()
            .filter(|(g, iou)| !taken[*g] && *iou >= threshold)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        if let Some(&(g, iou)) = best {
            taken[g] = true;
            out[p] = Some((g, iou));
        }
    }
    out
}

/// One-to-one greedy matching in descending confidence; returns `(pred, gt, IoU)`.
pub fn match_detections(pred: &[TexelRecord], gt: &[&BitMask], threshold: f64) -> Vec<(usize, usize, f64)> {
    let table = overlaps(pred, gt);
    greedy(pred, &table, gt.len(), threshold)
        .into_iter()
        .enumerate()
        .filter_map(|(p, m)| m.map(|(g, iou)| (p, g, iou)))
        .collect()
}

/// Area under the precision-recall curve, with one operating point per
/// distinct confidence level and precision interpolated from the right.
fn average_precision(pred: &[TexelRecord], matched: &[Option<(usize, f64)>], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return if pred.is_empty() { 1.0 } else { 0.0 };
    }
    let order = order_by_confidence(pred);
    let mut points: Vec<(f64, f64)> = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    for (k, &p) in order.iter().enumerate() {
        if matched[p].is_some() {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_level = order.get(k + 1).is_none_or(|&q| pred[q].confidence != pred[p].confidence);
        if last_of_level {
            points.push((tp as f64 / n_gt as f64, tp as f64 / (tp + fp) as f64));
        }
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..points.len() {
        let precision = points[i..].iter().map(|p| p.1).fold(0.0, f64::max);
        ap += (points[i].0 - prev_recall) * precision;
        prev_recall = points[i].0;
    }
    ap
}

/// Per-image detection score of `pred` against truth masks.
pub fn evaluate_masks(pred: &[TexelRecord], gt: &[&BitMask], thresholds: &[f64]) -> DetectionScore {
    let table = overlaps(pred, gt);
    let ap_at = |t: f64| average_precision(pred, &greedy(pred, &table, gt.len(), t), gt.len());
    let ap = if thresholds.is_empty() {
        0.0
    } else {
        thresholds.iter().map(|&t| ap_at(t)).sum::<f64>() / thresholds.len() as f64
    };
    let at50 = greedy(pred, &table, gt.len(), 0.5);
    let tp = at50.iter().filter(|m| m.is_some()).count();
    DetectionScore { ap, ap50: ap_at(0.5), ap75: ap_at(0.75), tp, fp: pred.len() - tp, fn_: gt.len() - tp }
}

pub fn evaluate_detection(pred: &[TexelRecord], gt: &GroundTruth, thresholds: &[f64]) -> DetectionScore {
    let masks: Vec<&BitMask> = gt.texels.iter().map(|t| &t.mask).collect();
    evaluate_masks(pred, &masks, thresholds)
}
