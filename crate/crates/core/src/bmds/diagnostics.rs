use crate::distances::euclid;
use crate::error::{Error, Result};

use super::McmcTrace;

/// Convergence numbers for one scalar chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub name: String,
    pub ess: f64,
    pub psr: f64,
    /// The chain never moved.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub chains: Vec<ChainSummary>,
    pub accept_rate: f64,
}

/// Split-R-hat above this marks a chain as unconverged.
pub const PSR_THRESHOLD: f64 = 1.1;

impl DiagnosticsReport {
    /// Human-readable warnings; empty when nothing is flagged.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.chains {
            if c.degenerate {
                out.push(format!("{}: chain is constant", c.name));
            } else if c.psr > PSR_THRESHOLD {
                out.push(format!("{}: split R-hat {:.3} exceeds {PSR_THRESHOLD}", c.name, c.psr));
            }
        }
        out
    }

    pub fn converged(&self) -> bool {
        self.warnings().is_empty()
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn autocovariance(x: &[f64], lag: usize) -> f64 {
    let m = mean(x);
    let n = x.len();
    (0..n - lag).map(|t| (x[t] - m) * (x[t + lag] - m)).sum::<f64>() / n as f64
}

/// Effective sample size using Geyer's initial positive sequence.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return n as f64;
    }
    let g0 = autocovariance(x, 0);
    if g0 <= 0.0 {
        return n as f64;
    }
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocovariance(x, lag) + autocovariance(x, lag + 1)) / g0;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    (n as f64 / tau.max(1.0 / n as f64)).min(n as f64 * (n as f64).log10().max(1.0))
}

/// Gelman-Rubin potential scale reduction computed on the two halves of one chain.
pub fn split_potential_scale_reduction(x: &[f64]) -> f64 {
    let half = x.len() / 2;
    if half < 2 {
        return f64::NAN;
    }
    let (a, b) = (&x[..half], &x[x.len() - half..]);
    let n = half as f64;
    let var = |c: &[f64]| {
        let m = mean(c);
        c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    };
    let w = 0.5 * (var(a) + var(b));
    let (ma, mb) = (mean(a), mean(b));
    let grand = 0.5 * (ma + mb);
    let between = n * ((ma - grand).powi(2) + (mb - grand).powi(2));
    if w == 0.0 {
        return if between == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * w + between / n;
    (var_plus / w).sqrt()
}

fn summarize(name: String, x: &[f64]) -> ChainSummary {
    let degenerate = x.iter().all(|&v| v == x[0]);
    ChainSummary {
        name,
        ess: effective_sample_size(x),
        psr: split_potential_scale_reduction(x),
        degenerate,
    }
}

/// ESS and split R-hat for `sigma^2` and the first few pairwise distances,
/// over the retained samples.
pub fn diagnostics(trace: &McmcTrace) -> Result<DiagnosticsReport> {
    let sigma2 = trace.retained_sigma2();
    if sigma2.len() < 4 {
        return Err(Error::Diagnostics(format!(
            "{} retained samples; need at least 4",
            sigma2.len()
        )));
    }
    let mut chains = vec![summarize("sigma2".into(), &sigma2)];
    let first = &trace.location_samples[0];
    let p = first.len();
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|j| (j + 1..p).map(move |k| (j, k)))
        .take(5)
        .collect();
    for (j, k) in pairs {
        let series: Vec<f64> = trace
            .location_samples
            .iter()
            .map(|s| euclid(s.coords()[j], s.coords()[k]))
            .collect();
        let name = format!("delta[{},{}]", first.labels()[j], first.labels()[k]);
        chains.push(summarize(name, &series));
    }
    Ok(DiagnosticsReport { chains, accept_rate: trace.accept_rate })
}
