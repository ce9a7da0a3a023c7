//! REAL/FAKE classification over SSIM feature vectors.
//!
//! Two small models trained from scratch: an L2-regularized logistic
//! regression fitted by full-batch gradient descent on standardized features,
//! and a greedy CART decision tree on Gini impurity. Training is
//! single-threaded and fully deterministic; prediction is pure. Models
//! serialize to a versioned JSON document carrying a checksum of the feature
//! order so a model is never applied to differently laid-out inputs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ssim::{FeatureVector, FEATURE_NAMES};

pub const MODEL_FORMAT_VERSION: u32 = 1;

pub const FEATURE_COUNT: usize = 7;

/// Probability floor applied before taking logs in cross-entropy.
const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Label {
    #[serde(rename = "REAL")]
    Real,
    #[serde(rename = "FAKE")]
    Fake,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Split {
    #[default]
    #[serde(rename = "TRAIN")]
    Train,
    #[serde(rename = "TEST")]
    Test,
}

/// One labelled clip with its extracted features.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipRecord {
    pub clip_id: String,
    pub label: Label,
    pub features: FeatureVector,
    pub split: Split,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogisticHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Reserved for interface stability; full-batch descent from a zero
    /// initialization is already deterministic.
    pub seed: u64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        LogisticHyper {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TreeHyper {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeHyper {
    fn default() -> Self {
        TreeHyper {
            max_depth: 5,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogisticModel {
    pub hyper: LogisticHyper,
    pub weights: [f64; FEATURE_COUNT],
    pub bias: f64,
    /// Standardization statistics fitted on the training records.
    pub norm_means: [f64; FEATURE_COUNT],
    /// Zero-variance features keep std 1 so standardization stays defined.
    pub norm_stds: [f64; FEATURE_COUNT],
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: Label,
        /// Training fraction of `label` in this leaf, always >= 0.5.
        probability: f64,
    },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TreeModel {
    pub hyper: TreeHyper,
    /// Arena storage; index 0 is the root, split children point into the vec.
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "model_type", rename_all = "snake_case")]
pub enum Model {
    Logistic(LogisticModel),
    Tree(TreeModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Confusion {
    #[serde(rename = "tp")]
    pub true_positive: usize,
    #[serde(rename = "fn")]
    pub false_negative: usize,
    #[serde(rename = "fp")]
    pub false_positive: usize,
    #[serde(rename = "tn")]
    pub true_negative: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_negative + self.false_positive + self.true_negative
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.true_positive + self.true_negative, self.total())
    }

    pub fn precision(&self) -> f64 {
        ratio(self.true_positive, self.true_positive + self.false_positive)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.true_positive, self.true_positive + self.false_negative)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Evaluation summary; the positive class is FAKE throughout.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub cross_entropy_loss: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
}

/// Duplicate minority-class TRAIN records (sampled with replacement, seeded)
/// until both classes are equally represented. Original records keep their
/// order; duplicates are appended. TEST records are never touched.
pub fn oversample_minority(records: Vec<ClipRecord>, seed: u64) -> Result<Vec<ClipRecord>> {
    let train_count = |label: Label| {
        records
            .iter()
            .filter(|r| r.split == Split::Train && r.label == label)
            .count()
    };
    let (fake, real) = (train_count(Label::Fake), train_count(Label::Real));
    if fake == 0 || real == 0 {
        return Err(Error::SingleClass);
    }
    if fake == real {
        return Ok(records);
    }
    let minority = if fake < real {
        Label::Fake
    } else {
        Label::Real
    };
    let pool: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.split == Split::Train && r.label == minority)
        .map(|(i, _)| i)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = records.clone();
    for _ in 0..fake.abs_diff(real) {
        let pick = pool[rng.gen_range(0..pool.len())];
        out.push(records[pick].clone());
    }
    Ok(out)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Numerically stable binary cross-entropy of logit `z` against `y` in {0,1}:
/// `max(z, 0) - z*y + ln(1 + exp(-|z|))`.
fn stable_ce(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Mean cross-entropy plus `l2 * |w|^2 / 2` on already-standardized inputs.
/// The bias is not regularized.
pub fn logistic_loss(
    weights: &[f64; FEATURE_COUNT],
    bias: f64,
    xs: &[[f64; FEATURE_COUNT]],
    ys: &[f64],
    l2: f64,
) -> f64 {
    let n = xs.len() as f64;
    let data: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = dot(weights, x) + bias;
            stable_ce(z, y)
        })
        .sum();
    let penalty = weights.iter().map(|w| w * w).sum::<f64>();
    data / n + l2 * penalty / 2.0
}

/// Analytic gradient of [`logistic_loss`] with respect to the weights and
/// bias, as `(d/dw, d/db)`.
pub fn logistic_gradient(
    weights: &[f64; FEATURE_COUNT],
    bias: f64,
    xs: &[[f64; FEATURE_COUNT]],
    ys: &[f64],
    l2: f64,
) -> ([f64; FEATURE_COUNT], f64) {
    let n = xs.len() as f64;
    let mut grad_w = [0.0; FEATURE_COUNT];
    let mut grad_b = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let err = sigmoid(dot(weights, x) + bias) - y;
        for (g, &v) in grad_w.iter_mut().zip(x) {
            *g += err * v;
        }
        grad_b += err;
    }
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_w, grad_b / n)
}

fn dot(a: &[f64; FEATURE_COUNT], b: &[f64; FEATURE_COUNT]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn label_target(label: Label) -> f64 {
    match label {
        Label::Fake => 1.0,
        Label::Real => 0.0,
    }
}

fn feature_matrix(records: &[ClipRecord]) -> (Vec<[f64; FEATURE_COUNT]>, Vec<f64>) {
    let xs = records.iter().map(|r| r.features.to_array()).collect();
    let ys = records.iter().map(|r| label_target(r.label)).collect();
    (xs, ys)
}

// Gradient descent returning the per-epoch loss history (loss measured
// before each update, plus once after the final one).
fn descend(
    xs: &[[f64; FEATURE_COUNT]],
    ys: &[f64],
    hyper: &LogisticHyper,
) -> Result<([f64; FEATURE_COUNT], f64, Vec<f64>)> {
    let mut weights = [0.0; FEATURE_COUNT];
    let mut bias = 0.0;
    let mut history = Vec::with_capacity(hyper.epochs + 1);
    for epoch in 0..=hyper.epochs {
        let loss = logistic_loss(&weights, bias, xs, ys, hyper.l2);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        history.push(loss);
        if epoch == hyper.epochs {
            break;
        }
        let (grad_w, grad_b) = logistic_gradient(&weights, bias, xs, ys, hyper.l2);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= hyper.learning_rate * g;
        }
        bias -= hyper.learning_rate * grad_b;
    }
    Ok((weights, bias, history))
}

/// Fit a logistic model on `records` (the caller selects the split).
pub fn train_logistic(records: &[ClipRecord], hyper: &LogisticHyper) -> Result<LogisticModel> {
    if records.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "logistic training needs at least 2 records, got {}",
            records.len()
        )));
    }
    if !(hyper.learning_rate.is_finite() && hyper.learning_rate >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "learning_rate must be >= 0, got {}",
            hyper.learning_rate
        )));
    }
    if !(hyper.l2.is_finite() && hyper.l2 >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "l2 must be >= 0, got {}",
            hyper.l2
        )));
    }
    let both = records.iter().any(|r| r.label == Label::Fake)
        && records.iter().any(|r| r.label == Label::Real);
    if !both {
        return Err(Error::SingleClass);
    }

    let (mut xs, ys) = feature_matrix(records);
    let n = xs.len() as f64;
    let mut norm_means = [0.0; FEATURE_COUNT];
    let mut norm_stds = [1.0; FEATURE_COUNT];
    for j in 0..FEATURE_COUNT {
        let mean = xs.iter().map(|x| x[j]).sum::<f64>() / n;
        let var = xs.iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / n;
        norm_means[j] = mean;
        let std = var.sqrt();
        if std > 0.0 {
            norm_stds[j] = std;
        }
    }
    for x in &mut xs {
        for j in 0..FEATURE_COUNT {
            x[j] = (x[j] - norm_means[j]) / norm_stds[j];
        }
    }

    let (weights, bias, _) = descend(&xs, &ys, hyper)?;
    Ok(LogisticModel {
        hyper: *hyper,
        weights,
        bias,
        norm_means,
        norm_stds,
    })
}

impl LogisticModel {
    fn probability_fake(&self, x: &[f64; FEATURE_COUNT]) -> f64 {
        let mut z = self.bias;
        for (j, weight) in self.weights.iter().enumerate() {
            z += weight * (x[j] - self.norm_means[j]) / self.norm_stds[j];
        }
        sigmoid(z)
    }
}

fn gini(p: f64) -> f64 {
    2.0 * p * (1.0 - p)
}

fn push_leaf(nodes: &mut Vec<Node>, fake: usize, total: usize) -> usize {
    let p_fake = fake as f64 / total as f64;
    // ties at exactly one half go to FAKE
    let (label, probability) = if p_fake >= 0.5 {
        (Label::Fake, p_fake)
    } else {
        (Label::Real, 1.0 - p_fake)
    };
    nodes.push(Node::Leaf { label, probability });
    nodes.len() - 1
}

fn build_node(
    xs: &[[f64; FEATURE_COUNT]],
    fake: &[bool],
    indices: &[usize],
    depth: usize,
    hyper: &TreeHyper,
    nodes: &mut Vec<Node>,
) -> usize {
    let n = indices.len();
    let n_fake = indices.iter().filter(|&&i| fake[i]).count();
    let pure = n_fake == 0 || n_fake == n;
    if depth >= hyper.max_depth || pure || n < 2 * hyper.min_leaf {
        return push_leaf(nodes, n_fake, n);
    }

    // best = (feature, threshold, weighted child impurity); candidates are
    // visited in (feature, threshold) ascending order and replaced only on a
    // strict improvement, so ties keep the lowest feature then threshold.
    // Zero-gain splits are admissible: patterns like XOR only separate after
    // a second level.
    let mut best: Option<(usize, f64, f64)> = None;
    #[allow(clippy::needless_range_loop)] // the feature id is the datum, not a view into xs
    for feature in 0..FEATURE_COUNT {
        let mut order: Vec<usize> = indices.to_vec();
        order.sort_by(|&a, &b| xs[a][feature].total_cmp(&xs[b][feature]));
        let mut fakes_left = 0usize;
        for k in 1..n {
            fakes_left += fake[order[k - 1]] as usize;
            let (lo, hi) = (xs[order[k - 1]][feature], xs[order[k]][feature]);
            if lo == hi {
                continue;
            }
            if k < hyper.min_leaf || n - k < hyper.min_leaf {
                continue;
            }
            // the midpoint can round onto `hi` for adjacent floats; fall back
            // to `lo` so `x <= threshold` still realizes this partition
            let mid = (lo + hi) / 2.0;
            let threshold = if mid > lo && mid < hi { mid } else { lo };
            let p_left = fakes_left as f64 / k as f64;
            let p_right = (n_fake - fakes_left) as f64 / (n - k) as f64;
            let impurity = (k as f64 * gini(p_left) + (n - k) as f64 * gini(p_right)) / n as f64;
            if best.is_none_or(|(_, _, b)| impurity < b) {
                best = Some((feature, threshold, impurity));
            }
        }
    }

    let Some((feature, threshold, _)) = best else {
        return push_leaf(nodes, n_fake, n);
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
        indices.iter().partition(|&&i| xs[i][feature] <= threshold);

    let me = nodes.len();
    nodes.push(Node::Leaf {
        label: Label::Fake,
        probability: 1.0,
    });
    let left = build_node(xs, fake, &left_idx, depth + 1, hyper, nodes);
    let right = build_node(xs, fake, &right_idx, depth + 1, hyper, nodes);
    nodes[me] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    me
}

/// Fit a CART tree on `records` (the caller selects the split). Degenerate
/// inputs produce a single-leaf tree rather than an error.
pub fn train_tree(records: &[ClipRecord], hyper: &TreeHyper) -> Result<TreeModel> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    if hyper.min_leaf < 1 {
        return Err(Error::InvalidParams("min_leaf must be >= 1".into()));
    }
    let xs: Vec<[f64; FEATURE_COUNT]> = records.iter().map(|r| r.features.to_array()).collect();
    let fake: Vec<bool> = records.iter().map(|r| r.label == Label::Fake).collect();
    let indices: Vec<usize> = (0..records.len()).collect();
    let mut nodes = Vec::new();
    build_node(&xs, &fake, &indices, 0, hyper, &mut nodes);
    Ok(TreeModel {
        hyper: *hyper,
        nodes,
    })
}

impl TreeModel {
    fn probability_fake(&self, x: &[f64; FEATURE_COUNT]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { label, probability } => {
                    return match label {
                        Label::Fake => *probability,
                        Label::Real => 1.0 - *probability,
                    }
                }
            }
        }
    }
}

impl Model {
    /// Predicted label and probability of FAKE; ties at 0.5 go to FAKE.
    pub fn predict(&self, features: &FeatureVector) -> (Label, f64) {
        let x = features.to_array();
        let p = match self {
            Model::Logistic(m) => m.probability_fake(&x),
            Model::Tree(m) => m.probability_fake(&x),
        };
        let label = if p >= 0.5 { Label::Fake } else { Label::Real };
        (label, p)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Logistic(_) => "logistic",
            Model::Tree(_) => "tree",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            feature_checksum: feature_checksum(),
            model: self.clone(),
        };
        serde_json::to_string_pretty(&file)
            .map_err(|e| Error::ModelFormat(format!("serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::ModelFormat(format!("not a model document: {e}")))?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "version {} unsupported (expected {MODEL_FORMAT_VERSION})",
                file.version
            )));
        }
        let expected = feature_checksum();
        if file.feature_checksum != expected {
            return Err(Error::ModelFormat(format!(
                "feature order checksum {} does not match {expected}",
                file.feature_checksum
            )));
        }
        Ok(file.model)
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ModelFile {
    version: u32,
    feature_checksum: String,
    #[serde(flatten)]
    model: Model,
}

/// Checksum of the feature names in order, pinning the layout a model was
/// trained against.
pub fn feature_checksum() -> String {
    let digest = Sha256::digest(FEATURE_NAMES.join(",").as_bytes());
    format!("{digest:x}")
}

/// Score `model` on `records`; the caller filters to the TEST split.
pub fn evaluate(model: &Model, records: &[ClipRecord]) -> Result<Metrics> {
    if records.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let mut confusion = Confusion {
        true_positive: 0,
        false_negative: 0,
        false_positive: 0,
        true_negative: 0,
    };
    let mut ce = 0.0;
    for r in records {
        let (predicted, p_fake) = model.predict(&r.features);
        match (r.label, predicted) {
            (Label::Fake, Label::Fake) => confusion.true_positive += 1,
            (Label::Fake, Label::Real) => confusion.false_negative += 1,
            (Label::Real, Label::Fake) => confusion.false_positive += 1,
            (Label::Real, Label::Real) => confusion.true_negative += 1,
        }
        let p_true = match r.label {
            Label::Fake => p_fake,
            Label::Real => 1.0 - p_fake,
        };
        ce -= p_true.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR).ln();
    }
    Ok(Metrics {
        accuracy: confusion.accuracy(),
        cross_entropy_loss: ce / records.len() as f64,
        precision: confusion.precision(),
        recall: confusion.recall(),
        f1: confusion.f1(),
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(a: [f64; 7]) -> FeatureVector {
        FeatureVector::from_array(a)
    }

    fn rec(id: &str, label: Label, split: Split, f0: f64) -> ClipRecord {
        ClipRecord {
            clip_id: id.into(),
            label,
            features: fv([f0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            split,
        }
    }

    // REAL clustered at feature 0 = -1, FAKE at +1, with deterministic jitter
    fn separable_records() -> Vec<ClipRecord> {
        (0..20)
            .map(|i| {
                let label = if i < 10 { Label::Real } else { Label::Fake };
                let center = if i < 10 { -1.0 } else { 1.0 };
                rec(
                    &format!("clip{i}"),
                    label,
                    Split::Train,
                    center + 0.05 * (i % 5) as f64,
                )
            })
            .collect()
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<[f64; 7]> = (0..10)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
            .collect();
        let ys: Vec<f64> = (0..10).map(|_| f64::from(rng.gen_range(0..2))).collect();
        let weights: [f64; 7] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let bias = rng.gen_range(-1.0..1.0);
        let l2 = 0.01;

        // independent loss oracle: plain sigmoid cross-entropy
        let naive_loss = |w: &[f64; 7], b: f64| -> f64 {
            let mut total = 0.0;
            for (x, &y) in xs.iter().zip(&ys) {
                let z: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b;
                let p = 1.0 / (1.0 + (-z).exp());
                total -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
            }
            total / xs.len() as f64 + l2 * w.iter().map(|v| v * v).sum::<f64>() / 2.0
        };

        let (grad_w, grad_b) = logistic_gradient(&weights, bias, &xs, &ys, l2);
        let h = 1e-5;
        for j in 0..7 {
            let mut plus = weights;
            let mut minus = weights;
            plus[j] += h;
            minus[j] -= h;
            let numeric = (naive_loss(&plus, bias) - naive_loss(&minus, bias)) / (2.0 * h);
            let rel = (grad_w[j] - numeric).abs() / numeric.abs().max(1e-8);
            assert!(
                rel < 1e-4,
                "weight {j}: analytic {} vs numeric {numeric}",
                grad_w[j]
            );
        }
        let numeric = (naive_loss(&weights, bias + h) - naive_loss(&weights, bias - h)) / (2.0 * h);
        let rel = (grad_b - numeric).abs() / numeric.abs().max(1e-8);
        assert!(rel < 1e-4, "bias: analytic {grad_b} vs numeric {numeric}");
    }

    #[test]
    fn zero_epochs_predicts_one_half() {
        let hyper = LogisticHyper {
            epochs: 0,
            ..Default::default()
        };
        let model = Model::Logistic(train_logistic(&separable_records(), &hyper).unwrap());
        let (label, p) = model.predict(&fv([3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(p, 0.5);
        assert_eq!(label, Label::Fake);
    }

    #[test]
    fn separable_fixture_reaches_full_training_accuracy() {
        let records = separable_records();
        let hyper = LogisticHyper {
            learning_rate: 0.1,
            epochs: 500,
            l2: 0.0,
            seed: 0,
        };
        let model = train_logistic(&records, &hyper).unwrap();
        // constant columns get std 1, not 0
        assert_eq!(model.norm_stds[3], 1.0);
        let metrics = evaluate(&Model::Logistic(model.clone()), &records).unwrap();
        assert_eq!(metrics.accuracy, 1.0);
        assert_eq!(metrics.f1, 1.0);

        // feature 0 separates FAKE upward, so its weight is positive and the
        // fake probability grows with it
        assert!(model.weights[0] > 0.0);
        let m = Model::Logistic(model);
        let lo = m.predict(&fv([0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])).1;
        let hi = m.predict(&fv([1.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])).1;
        assert!(hi > lo);
    }

    #[test]
    fn training_loss_is_monotone_for_small_learning_rate() {
        let records = separable_records();
        let (xs, ys) = feature_matrix(&records);
        let hyper = LogisticHyper {
            learning_rate: 1e-3,
            epochs: 200,
            l2: 1e-4,
            seed: 0,
        };
        let (_, _, history) = descend(&xs, &ys, &hyper).unwrap();
        assert_eq!(history.len(), 201);
        for pair in history.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-12,
                "loss rose: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn diverging_training_reports_non_finite_loss() {
        let hyper = LogisticHyper {
            learning_rate: 1e6,
            epochs: 500,
            l2: 1.0,
            seed: 0,
        };
        let err = train_logistic(&separable_records(), &hyper).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { .. }), "{err}");
    }

    #[test]
    fn single_class_training_is_rejected() {
        let records: Vec<ClipRecord> = (0..4)
            .map(|i| rec(&format!("f{i}"), Label::Fake, Split::Train, i as f64))
            .collect();
        assert!(matches!(
            train_logistic(&records, &Default::default()).unwrap_err(),
            Error::SingleClass
        ));
    }

    fn xor_records() -> Vec<ClipRecord> {
        [
            (0.0, 0.0, Label::Real),
            (1.0, 1.0, Label::Real),
            (0.0, 1.0, Label::Fake),
            (1.0, 0.0, Label::Fake),
        ]
        .iter()
        .enumerate()
        .map(|(i, &(a, b, label))| ClipRecord {
            clip_id: format!("xor{i}"),
            label,
            features: fv([a, b, 0.0, 0.0, 0.0, 0.0, 0.0]),
            split: Split::Train,
        })
        .collect()
    }

    #[test]
    fn xor_needs_and_gets_two_levels() {
        // no single split has gain here, so reaching accuracy 1.0 proves
        // zero-gain splits still recurse
        let records = xor_records();
        let hyper = TreeHyper {
            max_depth: 2,
            min_leaf: 1,
        };
        let model = Model::Tree(train_tree(&records, &hyper).unwrap());
        let metrics = evaluate(&model, &records).unwrap();
        assert_eq!(metrics.accuracy, 1.0);
    }

    #[test]
    fn degenerate_trees_are_single_leaves() {
        let same: Vec<ClipRecord> = (0..3)
            .map(|i| rec(&format!("r{i}"), Label::Real, Split::Train, i as f64))
            .collect();
        let model = train_tree(&same, &Default::default()).unwrap();
        assert_eq!(
            model.nodes,
            vec![Node::Leaf {
                label: Label::Real,
                probability: 1.0
            }]
        );

        // max_depth 0 forces a majority leaf
        let mixed: Vec<ClipRecord> = (0..4)
            .map(|i| {
                let label = if i == 0 { Label::Real } else { Label::Fake };
                rec(&format!("m{i}"), label, Split::Train, i as f64)
            })
            .collect();
        let stump = train_tree(
            &mixed,
            &TreeHyper {
                max_depth: 0,
                min_leaf: 1,
            },
        )
        .unwrap();
        assert_eq!(
            stump.nodes,
            vec![Node::Leaf {
                label: Label::Fake,
                probability: 0.75
            }]
        );
        let p = Model::Tree(stump).predict(&fv([9.0; 7])).1;
        assert_eq!(p, 0.75);
    }

    #[test]
    fn min_leaf_excludes_narrow_splits() {
        // labels F,R,R,R at feature 0 = 0,1,2,3: the pure split 0|123 would
        // isolate one record, so with min_leaf 2 the root must cut at 1.5
        let labels = [Label::Fake, Label::Real, Label::Real, Label::Real];
        let records: Vec<ClipRecord> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| rec(&format!("c{i}"), l, Split::Train, i as f64))
            .collect();
        let model = train_tree(
            &records,
            &TreeHyper {
                max_depth: 3,
                min_leaf: 2,
            },
        )
        .unwrap();
        let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = model.nodes[0]
        else {
            panic!("expected a root split, got {:?}", model.nodes[0]);
        };
        assert_eq!(feature, 0);
        assert_eq!(threshold, 1.5);
        // both children hold 2 records and cannot split further
        assert!(matches!(model.nodes[left], Node::Leaf { .. }));
        assert!(matches!(model.nodes[right], Node::Leaf { .. }));
    }

    #[test]
    fn split_ties_resolve_to_lowest_feature_then_threshold() {
        // features 0 and 1 are identical, both separating perfectly
        let records: Vec<ClipRecord> = [0.0, 0.0, 1.0, 1.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let label = if v == 0.0 { Label::Real } else { Label::Fake };
                ClipRecord {
                    clip_id: format!("t{i}"),
                    label,
                    features: fv([v, v, 0.0, 0.0, 0.0, 0.0, 0.0]),
                    split: Split::Train,
                }
            })
            .collect();
        let model = train_tree(&records, &Default::default()).unwrap();
        assert!(matches!(
            model.nodes[0],
            Node::Split { feature: 0, threshold: t, .. } if t == 0.5
        ));

        // F,R,F at 0,1,2: cutting at 0.5 or 1.5 leaves equal impurity, so the
        // lower threshold must win
        let labels = [Label::Fake, Label::Real, Label::Fake];
        let records: Vec<ClipRecord> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| rec(&format!("u{i}"), l, Split::Train, i as f64))
            .collect();
        let model = train_tree(
            &records,
            &TreeHyper {
                max_depth: 1,
                min_leaf: 1,
            },
        )
        .unwrap();
        assert!(matches!(
            model.nodes[0],
            Node::Split { feature: 0, threshold: t, .. } if t == 0.5
        ));
    }

    #[test]
    fn hand_counted_confusion_metrics_are_exact() {
        // fixed stump: predict FAKE iff feature 0 > 0.5
        let model = Model::Tree(TreeModel {
            hyper: TreeHyper {
                max_depth: 1,
                min_leaf: 1,
            },
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                },
                Node::Leaf {
                    label: Label::Real,
                    probability: 1.0,
                },
                Node::Leaf {
                    label: Label::Fake,
                    probability: 1.0,
                },
            ],
        });
        // 3 TP, 1 FN, 2 FP, 4 TN
        let mut records = Vec::new();
        for i in 0..3 {
            records.push(rec(&format!("tp{i}"), Label::Fake, Split::Test, 1.0));
        }
        records.push(rec("fn0", Label::Fake, Split::Test, 0.0));
        for i in 0..2 {
            records.push(rec(&format!("fp{i}"), Label::Real, Split::Test, 1.0));
        }
        for i in 0..4 {
            records.push(rec(&format!("tn{i}"), Label::Real, Split::Test, 0.0));
        }

        let metrics = evaluate(&model, &records).unwrap();
        assert_eq!(
            metrics.confusion,
            Confusion {
                true_positive: 3,
                false_negative: 1,
                false_positive: 2,
                true_negative: 4
            }
        );
        assert_eq!(metrics.precision, 0.6);
        assert_eq!(metrics.recall, 0.75);
        assert_eq!(metrics.accuracy, 0.7);
        assert!((metrics.f1 - 2.0 / 3.0).abs() < 1e-15);

        // hard 0/1 leaf probabilities hit the cross-entropy floor: 3 wrong
        // predictions at -ln(1e-12), 7 right at -ln(1 - 1e-12)
        let expected_ce = (3.0 * -(1e-12f64).ln() + 7.0 * -(1.0 - 1e-12f64).ln()) / 10.0;
        assert!((metrics.cross_entropy_loss - expected_ce).abs() < 1e-12);
    }

    #[test]
    fn evaluate_rejects_empty_input() {
        let model = Model::Tree(train_tree(&xor_records(), &Default::default()).unwrap());
        assert!(matches!(
            evaluate(&model, &[]).unwrap_err(),
            Error::EmptyTestSet
        ));
    }

    #[test]
    fn oversampling_balances_train_and_preserves_test() {
        let mut records: Vec<ClipRecord> = (0..4)
            .map(|i| rec(&format!("f{i}"), Label::Fake, Split::Train, i as f64))
            .collect();
        records.push(rec("r0", Label::Real, Split::Train, 9.0));
        records.push(rec("tf", Label::Fake, Split::Test, 1.0));
        records.push(rec("tr", Label::Real, Split::Test, 2.0));

        let balanced = oversample_minority(records.clone(), 11).unwrap();
        // originals keep their order, duplicates are appended
        assert_eq!(&balanced[..7], &records[..]);
        assert_eq!(balanced.len(), 10);
        for dup in &balanced[7..] {
            assert_eq!(dup.label, Label::Real);
            assert_eq!(dup.split, Split::Train);
            assert_eq!(dup.clip_id, "r0");
        }
        let count =
            |rs: &[ClipRecord], l, s| rs.iter().filter(|r| r.label == l && r.split == s).count();
        assert_eq!(count(&balanced, Label::Fake, Split::Train), 4);
        assert_eq!(count(&balanced, Label::Real, Split::Train), 4);
        assert_eq!(count(&balanced, Label::Fake, Split::Test), 1);
        assert_eq!(count(&balanced, Label::Real, Split::Test), 1);

        // deterministic under a fixed seed
        let again = oversample_minority(records.clone(), 11).unwrap();
        assert_eq!(balanced, again);

        // already balanced stays untouched
        let even = balanced.clone();
        assert_eq!(oversample_minority(even.clone(), 5).unwrap(), even);

        // one class cannot be balanced
        let fakes: Vec<ClipRecord> = (0..3)
            .map(|i| rec(&format!("f{i}"), Label::Fake, Split::Train, i as f64))
            .collect();
        assert!(matches!(
            oversample_minority(fakes, 0).unwrap_err(),
            Error::SingleClass
        ));
    }

    #[test]
    fn model_json_round_trips_with_identical_predictions() {
        let records = separable_records();
        let logistic = Model::Logistic(train_logistic(&records, &Default::default()).unwrap());
        let tree = Model::Tree(train_tree(&records, &Default::default()).unwrap());
        for model in [logistic, tree] {
            let text = model.to_json().unwrap();
            let back = Model::from_json(&text).unwrap();
            assert_eq!(back, model);
            for r in &records {
                let before = model.predict(&r.features).1;
                let after = back.predict(&r.features).1;
                assert_eq!(before.to_bits(), after.to_bits());
            }
        }
    }

    #[test]
    fn model_loading_rejects_foreign_documents() {
        let model = Model::Tree(train_tree(&xor_records(), &Default::default()).unwrap());
        let text = model.to_json().unwrap();

        let wrong_version = text.replacen("\"version\": 1", "\"version\": 99", 1);
        assert!(matches!(
            Model::from_json(&wrong_version).unwrap_err(),
            Error::ModelFormat(_)
        ));

        let checksum = feature_checksum();
        let wrong_checksum = text.replacen(&checksum, &"0".repeat(checksum.len()), 1);
        assert!(matches!(
            Model::from_json(&wrong_checksum).unwrap_err(),
            Error::ModelFormat(_)
        ));

        assert!(matches!(
            Model::from_json("{}").unwrap_err(),
            Error::ModelFormat(_)
        ));
    }
}
