//! Evaluation metrics and paired model comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionEval {
    pub nrmse: f64,
    pub nmae: f64,
    pub pcc: f64,
    /// `|atan(slope)|` in degrees for residuals `yhat - y` regressed on `y`.
    pub bias_angle_deg: f64,
}

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::Dimension(format!("{} targets but {} predictions", y.len(), yhat.len())));
    }
    if y.len() < 2 {
        return Err(Error::Dimension("need at least 2 samples".into()));
    }
    if y.iter().chain(yhat).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite target or prediction".into()));
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Pearson correlation; 0 when either side has no variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Least-squares `(intercept, slope)` of `v` on `u`, `None` if `u` is constant.
fn linear_fit(u: &[f64], v: &[f64]) -> Option<(f64, f64)> {
    let (mu, mv) = (mean(u), mean(v));
    let (mut suv, mut suu) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        suv += (a - mu) * (b - mv);
        suu += (a - mu) * (a - mu);
    }
    if suu == 0.0 {
        return None;
    }
    let slope = suv / suu;
    Some((mv - slope * mu, slope))
}

pub fn regression_eval(y: &[f64], yhat: &[f64]) -> Result<RegressionEval> {
    check_pair(y, yhat)?;
    let my = mean(y);
    let (mut sse, mut sst, mut sae, mut sad) = (0.0, 0.0, 0.0, 0.0);
    for (&a, &b) in y.iter().zip(yhat) {
        sse += (a - b) * (a - b);
        sst += (a - my) * (a - my);
        sae += (a - b).abs();
        sad += (a - my).abs();
    }
    if sst == 0.0 {
        return Err(Error::UndefinedMetric("targets are constant; NRMSE denominator is zero".into()));
    }
    let resid: Vec<f64> = yhat.iter().zip(y).map(|(p, t)| p - t).collect();
    let (_, slope) = linear_fit(y, &resid).expect("y is not constant");
    Ok(RegressionEval {
        nrmse: (sse / sst).sqrt(),
        nmae: sae / sad,
        pcc: pearson(y, yhat),
        bias_angle_deg: slope.atan().abs().to_degrees(),
    })
}

/// Regression metric used for resampling comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Nrmse,
    Nmae,
    Pcc,
    Bias,
}

impl Metric {
    pub fn value(self, e: &RegressionEval) -> f64 {
        match self {
            Metric::Nrmse => e.nrmse,
            Metric::Nmae => e.nmae,
            Metric::Pcc => e.pcc,
            Metric::Bias => e.bias_angle_deg,
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::Pcc)
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Nrmse => "nrmse",
            Metric::Nmae => "nmae",
            Metric::Pcc => "pcc",
            Metric::Bias => "bias_angle_deg",
        }
    }

    /// The metric on the `idx` resample, `None` if it is undefined there.
    pub fn on_resample(self, y: &[f64], yhat: &[f64], idx: &[usize]) -> Option<f64> {
        let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let ps: Vec<f64> = idx.iter().map(|&i| yhat[i]).collect();
        regression_eval(&ys, &ps).ok().map(|e| self.value(&e))
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "nrmse" => Metric::Nrmse,
            "nmae" => Metric::Nmae,
            "pcc" => Metric::Pcc,
            "bias" | "bias_angle_deg" => Metric::Bias,
            other => return Err(Error::Config(format!("unknown metric '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationEval {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    /// `None` when only one class is present.
    pub auroc: Option<f64>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Confusion counts with `score >= threshold` predicted positive. Ratios with
/// an empty denominator are reported as 0.
pub fn classification_eval(labels: &[bool], scores: &[f64], threshold: f64) -> Result<ClassificationEval> {
    if labels.len() != scores.len() {
        return Err(Error::Dimension(format!("{} labels but {} scores", labels.len(), scores.len())));
    }
    if labels.is_empty() {
        return Err(Error::Dimension("no samples".into()));
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for (&l, &s) in labels.iter().zip(scores) {
        match (l, s >= threshold) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(ClassificationEval {
        tp,
        tn,
        fp,
        fn_,
        accuracy: ratio(tp + tn, labels.len()),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        f1: ratio(2 * tp, 2 * tp + fp + fn_),
        fpr: ratio(fp, fp + tn),
        auroc: auroc(labels, scores).ok(),
    })
}

/// Mann-Whitney AUROC with mid-ranks for tied scores.
pub fn auroc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::Dimension(format!("{} labels but {} scores", labels.len(), scores.len())));
    }
    let npos = labels.iter().filter(|&&l| l).count();
    let nneg = labels.len() - npos;
    if npos == 0 || nneg == 0 {
        return Err(Error::UndefinedMetric("AUROC needs both classes".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += order[i..=j].iter().filter(|&&k| labels[k]).count() as f64 * mid;
        i = j + 1;
    }
    let u = rank_sum - (npos * (npos + 1)) as f64 / 2.0;
    Ok(u / (npos as f64 * nneg as f64))
}

/// Removes the linear trend of validation residuals `yhat - y` on `yhat` from
/// test predictions.
pub fn bias_correct(y_valid: &[f64], yhat_valid: &[f64], yhat_test: &[f64]) -> Result<Vec<f64>> {
    check_pair(y_valid, yhat_valid)?;
    let resid: Vec<f64> = yhat_valid.iter().zip(y_valid).map(|(p, t)| p - t).collect();
    let (a, b) = linear_fit(yhat_valid, &resid)
        .ok_or_else(|| Error::Numeric("validation predictions are constant; cannot fit bias".into()))?;
    Ok(yhat_test.iter().map(|&p| p - (a + b * p)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McNemar {
    /// Pairs only A got right.
    pub b: usize,
    /// Pairs only B got right.
    pub c: usize,
    pub p_value: f64,
    pub no_discordance: bool,
}

fn discordant(correct_a: &[bool], correct_b: &[bool]) -> Result<(usize, usize)> {
    if correct_a.len() != correct_b.len() {
        return Err(Error::Dimension("correctness vectors differ in length".into()));
    }
    let b = correct_a.iter().zip(correct_b).filter(|&(&x, &y)| x && !y).count();
    let c = correct_a.iter().zip(correct_b).filter(|&(&x, &y)| !x && y).count();
    Ok((b, c))
}

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Exact two-sided McNemar test: `2 * P(X <= min(b, c))` for
/// `X ~ Binomial(b + c, 1/2)`, capped at 1.
pub fn mcnemar(correct_a: &[bool], correct_b: &[bool]) -> Result<McNemar> {
    let (b, c) = discordant(correct_a, correct_b)?;
    let n = b + c;
    if n == 0 {
        return Ok(McNemar { b, c, p_value: 1.0, no_discordance: true });
    }
    let ln2 = std::f64::consts::LN_2;
    let mut ln_pmf = -(n as f64) * ln2;
    let mut ln_tail = f64::NEG_INFINITY;
    for i in 0..=b.min(c) {
        ln_tail = ln_add(ln_tail, ln_pmf);
        ln_pmf += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    Ok(McNemar { b, c, p_value: (2.0 * ln_tail.exp()).min(1.0), no_discordance: false })
}

/// Chi-square McNemar with continuity correction, for comparison.
pub fn mcnemar_chi2(correct_a: &[bool], correct_b: &[bool]) -> Result<McNemar> {
    let (b, c) = discordant(correct_a, correct_b)?;
    if b + c == 0 {
        return Ok(McNemar { b, c, p_value: 1.0, no_discordance: true });
    }
    let diff = (b.abs_diff(c) as f64 - 1.0).max(0.0);
    let stat = diff * diff / (b + c) as f64;
    // Survival function of chi-square with one degree of freedom.
    Ok(McNemar { b, c, p_value: erfc((stat / 2.0).sqrt()).min(1.0), no_discordance: false })
}

/// RNG for bootstrap iteration `iter`; independent of scheduling.
pub fn iteration_rng(seed: u64, iter: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iter as u64);
    rng
}

fn resample<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Evaluates `f` on `iterations` bootstrap resamples of `0..n`. Iteration `i`
/// draws from [`iteration_rng`]`(seed, i)`; output is in iteration order.
pub fn bootstrap_map<T: Send>(
    n: usize,
    iterations: usize,
    seed: u64,
    f: impl Fn(&[usize], &mut ChaCha8Rng) -> T + Sync,
) -> Vec<T> {
    (0..iterations)
        .into_par_iter()
        .map(|it| {
            let mut rng = iteration_rng(seed, it);
            let idx = resample(n, &mut rng);
            f(&idx, &mut rng)
        })
        .collect()
}

/// Fraction of bootstrap resamples on which A strictly beats B. Ties and
/// resamples where either metric is undefined count as non-wins.
pub fn robustness(y: &[f64], yhat_a: &[f64], yhat_b: &[f64], metric: Metric, iterations: usize, seed: u64) -> Result<f64> {
    check_pair(y, yhat_a)?;
    check_pair(y, yhat_b)?;
    if iterations == 0 {
        return Err(Error::Config("iterations must be >= 1".into()));
    }
    let wins = bootstrap_map(y.len(), iterations, seed, |idx, _| {
        match (metric.on_resample(y, yhat_a, idx), metric.on_resample(y, yhat_b, idx)) {
            (Some(a), Some(b)) => {
                if metric.higher_is_better() {
                    a > b
                } else {
                    a < b
                }
            }
            _ => false,
        }
    });
    Ok(wins.iter().filter(|&&w| w).count() as f64 / iterations as f64)
}

/// Exact 1-D k-means with k = 2: the best split of the sorted values.
/// Returns the two centroids, lower first.
pub fn two_means_1d(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Dimension("no values to cluster".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 1 || v[0] == v[n - 1] {
        return Ok((v[0], v[0]));
    }
    let mut prefix = vec![0.0; n + 1];
    let mut prefix_sq = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + v[i];
        prefix_sq[i + 1] = prefix_sq[i] + v[i] * v[i];
    }
    let sse = |a: usize, b: usize| {
        let s = prefix[b] - prefix[a];
        (prefix_sq[b] - prefix_sq[a]) - s * s / (b - a) as f64
    };
    let mut best = (f64::INFINITY, 1);
    for k in 1..n {
        if v[k] == v[k - 1] {
            continue;
        }
        let cost = sse(0, k) + sse(k, n);
        if cost < best.0 {
            best = (cost, k);
        }
    }
    let k = best.1;
    Ok((prefix[k] / k as f64, (prefix[n] - prefix[k]) / (n - k) as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapResult {
    pub gap: f64,
    pub centroids: (f64, f64),
    pub model_values: Vec<f64>,
    pub null_values: Vec<f64>,
}

/// Separation between the bootstrap metric distribution of the model and of
/// a null model predicting draws from the training targets. Both
/// distributions are pooled and split by 1-D 2-means.
pub fn gap_statistic(
    y: &[f64],
    yhat: &[f64],
    train_y: &[f64],
    metric: Metric,
    iterations: usize,
    seed: u64,
) -> Result<GapResult> {
    check_pair(y, yhat)?;
    if iterations < 2 {
        return Err(Error::Config("gap statistic needs at least 2 iterations".into()));
    }
    if train_y.is_empty() {
        return Err(Error::Dimension("empty training targets".into()));
    }
    let pairs = bootstrap_map(y.len(), iterations, seed, |idx, rng| {
        let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let ps: Vec<f64> = idx.iter().map(|&i| yhat[i]).collect();
        let null: Vec<f64> = (0..idx.len()).map(|_| train_y[rng.random_range(0..train_y.len())]).collect();
        let model = regression_eval(&ys, &ps).ok().map(|e| metric.value(&e));
        let null = regression_eval(&ys, &null).ok().map(|e| metric.value(&e));
        (model, null)
    });
    let model_values: Vec<f64> = pairs.iter().filter_map(|p| p.0).collect();
    let null_values: Vec<f64> = pairs.iter().filter_map(|p| p.1).collect();
    if model_values.is_empty() || null_values.is_empty() {
        return Err(Error::UndefinedMetric("every bootstrap resample was degenerate".into()));
    }
    let pooled: Vec<f64> = model_values.iter().chain(&null_values).copied().collect();
    let centroids = two_means_1d(&pooled)?;
    Ok(GapResult { gap: (centroids.1 - centroids.0).abs(), centroids, model_values, null_values })
}

/// Linear-interpolation quantile of sorted data (type 7).
fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("confidence level must lie in (0, 1), got {level}")));
    }
    Ok(())
}

/// Percentile interval of a bootstrap distribution.
pub fn percentile_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if values.is_empty() {
        return Err(Error::UndefinedMetric("no bootstrap values".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&v, alpha), quantile_sorted(&v, 1.0 - alpha)))
}

/// Percentile bootstrap interval of `metric` over test resamples.
/// Degenerate resamples are dropped.
pub fn bootstrap_ci(y: &[f64], yhat: &[f64], metric: Metric, level: f64, iterations: usize, seed: u64) -> Result<(f64, f64)> {
    check_pair(y, yhat)?;
    check_level(level)?;
    let values: Vec<f64> = bootstrap_map(y.len(), iterations, seed, |idx, _| metric.on_resample(y, yhat, idx))
        .into_iter()
        .flatten()
        .collect();
    percentile_interval(&values, level)
}

/// Normal-approximation interval `p +- z sqrt(p (1 - p) / n)`, clamped to [0, 1].
pub fn binomial_ci(k: usize, n: usize, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if n == 0 || k > n {
        return Err(Error::Config(format!("invalid proportion {k}/{n}")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - level) / 2.0);
    let p = k as f64 / n as f64;
    let half = z * (p * (1.0 - p) / n as f64).sqrt();
    Ok(((p - half).max(0.0), (p + half).min(1.0)))
}
