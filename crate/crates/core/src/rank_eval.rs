//! Thresholded ground-truth orders over images, ranking accuracy, and a
//! cross-validated linear classifier for binary texture tasks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descriptor::component_index;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default indistinguishability band as a fraction of the attribute's range.
pub const DEFAULT_GAMMA_FRACTION: f64 = 0.05;
pub const L2_PENALTY: f64 = 1e-3;
pub const EPOCHS: usize = 500;
pub const FOLDS: usize = 5;

/// `fraction × (max − min)` of the values, 0 when empty.
pub fn gamma_for<T: Scalar>(values: impl IntoIterator<Item = T>, fraction: T) -> T {
    let (lo, hi) = values
        .into_iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi >= lo {
        fraction * (hi - lo)
    } else {
        T::zero()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeColumn<T> {
    pub attribute: String,
    pub values: BTreeMap<String, T>,
    pub gamma: T,
}

impl<T: Scalar> AttributeColumn<T> {
    pub fn new(attribute: impl Into<String>, values: BTreeMap<String, T>, gamma: T) -> Result<Self> {
        let attribute = attribute.into();
        if component_index(&attribute).is_none() {
            return Err(Error::UnknownAttribute(attribute));
        }
        if !(gamma >= T::zero()) {
            return Err(Error::InvalidSpec(format!("gamma {gamma} is negative")));
        }
        Ok(Self { attribute, values, gamma })
    }

    /// Column whose gamma is `fraction` of the value range.
    pub fn with_gamma_fraction(attribute: impl Into<String>, values: BTreeMap<String, T>, fraction: T) -> Result<Self> {
        let gamma = gamma_for(values.values().copied(), fraction);
        Self::new(attribute, values, gamma)
    }
}

/// `ordered` holds `(i, j)` with `i ≻ j`; `unordered` holds indistinguishable pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderedPairs<T> {
    pub ordered: Vec<(String, String)>,
    pub unordered: Vec<(String, String)>,
    pub gamma: T,
}

pub fn ground_truth_order<T: Scalar>(column: &AttributeColumn<T>) -> Result<OrderedPairs<T>> {
    let n = column.values.len();
    if n < 2 {
        return Err(Error::CorpusTooSmall { need: 2, got: n });
    }
    let entries: Vec<(&String, T)> = column.values.iter().map(|(k, &v)| (k, v)).collect();
    let mut ordered = Vec::new();
    let mut unordered = Vec::new();
    for (i, &(a, va)) in entries.iter().enumerate() {
        for &(b, vb) in &entries[i + 1..] {
            if (va - vb).abs() > column.gamma {
                let (hi, lo) = if va > vb { (a, b) } else { (b, a) };
                ordered.push((hi.clone(), lo.clone()));
            } else {
                unordered.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(OrderedPairs { ordered, unordered, gamma: column.gamma })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingAccuracy<T> {
    /// Over ordered pairs only; `None` when there are none.
    pub ordered: Option<T>,
    /// Over ordered and unordered pairs.
    pub combined: T,
    pub ordered_pairs: usize,
    pub unordered_pairs: usize,
}

/// An ordered pair is correct when the prediction strictly agrees; an
/// unordered pair when the predictions differ by at most gamma.
pub fn ranking_accuracy<T: Scalar>(predicted: &BTreeMap<String, T>, truth: &OrderedPairs<T>) -> Result<RankingAccuracy<T>> {
    let get = |id: &String| predicted.get(id).copied().ok_or_else(|| Error::UnknownImage(id.clone()));
    let mut ordered_ok = 0usize;
    for (a, b) in &truth.ordered {
        if get(a)? > get(b)? {
            ordered_ok += 1;
        }
    }
    let mut unordered_ok = 0usize;
    for (a, b) in &truth.unordered {
        if (get(a)? - get(b)?).abs() <= truth.gamma {
            unordered_ok += 1;
        }
    }
    let (no, nu) = (truth.ordered.len(), truth.unordered.len());
    let frac = |ok: usize, n: usize| T::of_usize(ok) / T::of_usize(n);
    Ok(RankingAccuracy {
        ordered: (no > 0).then(|| frac(ordered_ok, no)),
        combined: if no + nu > 0 { frac(ordered_ok + unordered_ok, no + nu) } else { T::one() },
        ordered_pairs: no,
        unordered_pairs: nu,
    })
}

/// L2-regularized logistic regression trained by full-batch gradient descent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
}

fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Largest eigenvalue of the second-moment matrix of `[x, 1]`, by power iteration.
fn second_moment_bound<T: Scalar>(x: &[&[T]]) -> T {
    let d = x[0].len() + 1;
    let mut v = vec![T::one(); d];
    let mut lambda = T::one();
    for _ in 0..50 {
        let mut next = vec![T::zero(); d];
        for row in x {
            let proj = dot(row, &v[..d - 1]) + v[d - 1];
            for (n, &r) in next.iter_mut().zip(row.iter()) {
                *n = *n + proj * r;
            }
            next[d - 1] = next[d - 1] + proj;
        }
        let norm = next.iter().map(|&a| a * a).sum::<T>().sqrt() / T::of_usize(x.len());
        if norm <= T::zero() {
            break;
        }
        lambda = norm;
        let scale = T::one() / (norm * T::of_usize(x.len()));
        v = next.into_iter().map(|a| a * scale).collect();
    }
    lambda
}

impl<T: Scalar> LogisticModel<T> {
    pub fn fit(x: &[&[T]], y: &[bool], l2: T, epochs: usize) -> Self {
        let d = x.first().map_or(0, |r| r.len());
        let mut w = vec![T::zero(); d];
        let mut b = T::zero();
        if x.is_empty() {
            return Self { weights: w, bias: b };
        }
        // Step 1/L for the L-smooth objective: L ≤ λmax/4 + l2 (10% margin).
        let step = T::one() / (second_moment_bound(x) * T::of(0.25 * 1.1) + l2);
        let n = T::of_usize(x.len());
        for _ in 0..epochs {
            let mut gw = vec![T::zero(); d];
            let mut gb = T::zero();
            for (row, &label) in x.iter().zip(y) {
                let target = if label { T::one() } else { T::zero() };
                let err = sigmoid(dot(row, &w) + b) - target;
                for (g, &r) in gw.iter_mut().zip(row.iter()) {
                    *g = *g + err * r;
                }
                gb = gb + err;
            }
            for (wi, g) in w.iter_mut().zip(gw) {
                *wi = *wi - step * (g / n + l2 * *wi);
            }
            b = b - step * gb / n;
        }
        Self { weights: w, bias: b }
    }

    pub fn predict(&self, row: &[T]) -> bool {
        dot(row, &self.weights) + self.bias >= T::zero()
    }
}

/// Fold of each example: each class is shuffled and dealt round-robin.
pub fn stratified_folds(y: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next % folds;
            next += 1;
        }
    }
    fold
}

/// Mean held-out accuracy of [`LogisticModel`] over stratified folds.
pub fn train_linear<T: Scalar>(x: &[Vec<T>], y: &[bool], folds: usize, seed: u64) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::InvalidSpec(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if let Some(r) = x.iter().find(|r| r.len() != x[0].len()) {
        return Err(Error::DimensionMismatch { expected: (x[0].len() as u32, 1), got: (r.len() as u32, 1) });
    }
    let positives = y.iter().filter(|&&l| l).count();
    if positives < 2 || y.len() - positives < 2 {
        return Err(Error::DegenerateLabels);
    }
    let folds = folds.clamp(2, y.len());
    let assignment = stratified_folds(y, folds, seed);
    let mut accuracies = Vec::new();
    for f in 0..folds {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| assignment[i] != f);
        if test.is_empty() {
            continue;
        }
        let tx: Vec<&[T]> = train.iter().map(|&i| x[i].as_slice()).collect();
        let ty: Vec<bool> = train.iter().map(|&i| y[i]).collect();
        let model = LogisticModel::fit(&tx, &ty, T::of(L2_PENALTY), EPOCHS);
        let correct = test.iter().filter(|&&i| model.predict(&x[i]) == y[i]).count();
        accuracies.push(T::of_usize(correct) / T::of_usize(test.len()));
    }
    Ok(accuracies.iter().copied().sum::<T>() / T::of_usize(accuracies.len()))
}
