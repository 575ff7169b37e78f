//! Bayesian metric MDS on the unit square.
//!
//! Observed distances are modelled as `d_jk ~ N(delta_jk, sigma^2)` truncated
//! to `d_jk > 0`, where `delta_jk` are the Euclidean distances between the
//! latent feature locations. Locations carry a uniform prior on `[0, 1]^2`
//! (complete spatial randomness with intensity `p` per unit area) and
//! `sigma^2 ~ IG(a, b)`. A Metropolis-within-Gibbs sampler alternates
//! per-feature random-walk location moves against the full truncated
//! likelihood with a conjugate `sigma^2` draw that drops the truncation term.

mod diagnostics;
mod normal;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::distances::DistanceMatrix;
use crate::embed::Embedding2D;
use crate::error::{Error, Result};

pub use diagnostics::{
    diagnostics, effective_sample_size, split_potential_scale_reduction, ChainSummary,
    DiagnosticsReport,
};
pub use normal::{log_norm_cdf, norm_cdf};

/// Sampler settings. `proposal_sd = None` means `0.5 / sqrt(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BmdsConfig {
    /// Inverse-gamma shape, must exceed 2.
    pub a: f64,
    /// Inverse-gamma scale.
    pub b: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub proposal_sd: Option<f64>,
    /// Tune the proposal step toward 30-40% acceptance during burn-in.
    pub adapt: bool,
    /// Hold `sigma^2` at this value instead of sampling it.
    pub fixed_sigma2: Option<f64>,
    pub seed: u64,
}

impl Default for BmdsConfig {
    fn default() -> Self {
        BmdsConfig {
            a: 3.0,
            b: 1.0,
            iterations: 5000,
            burn_in: 2000,
            thin: 10,
            proposal_sd: None,
            adapt: true,
            fixed_sigma2: None,
            seed: 0,
        }
    }
}

impl BmdsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 2.0) {
            return Err(Error::Config(format!("IG shape a must exceed 2, got {}", self.a)));
        }
        if !(self.b > 0.0) {
            return Err(Error::Config(format!("IG scale b must be positive, got {}", self.b)));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::Config(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be >= 1".into()));
        }
        if let Some(sd) = self.proposal_sd {
            if !(sd > 0.0) {
                return Err(Error::Config(format!("proposal_sd must be positive, got {sd}")));
            }
        }
        if let Some(s2) = self.fixed_sigma2 {
            if !(s2 > 0.0) {
                return Err(Error::Config(format!("fixed sigma^2 must be positive, got {s2}")));
            }
        }
        Ok(())
    }
}

/// Chain output. `sigma2_chain` and `log_posterior_chain` hold one entry per
/// iteration; `location_samples` holds the thinned post-burn-in states.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcTrace {
    pub sigma2_chain: Vec<f64>,
    pub log_posterior_chain: Vec<f64>,
    pub location_samples: Vec<Embedding2D>,
    /// Post-burn-in acceptance rate of location proposals.
    pub accept_rate: f64,
    pub burn_in: usize,
    pub thin: usize,
    /// Proposal step after burn-in tuning.
    pub proposal_sd: f64,
}

impl McmcTrace {
    /// Iteration indices of the retained location samples.
    pub fn retained_iterations(&self) -> impl Iterator<Item = usize> + '_ {
        (self.burn_in..self.sigma2_chain.len()).step_by(self.thin)
    }

    /// `sigma^2` at the retained iterations, aligned with `location_samples`.
    pub fn retained_sigma2(&self) -> Vec<f64> {
        self.retained_iterations().map(|i| self.sigma2_chain[i]).collect()
    }

    /// CSV with header `iter,sigma2,log_posterior`, one row per iteration.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Format(e.to_string());
        wtr.write_record(["iter", "sigma2", "log_posterior"]).map_err(err)?;
        for (i, (s, lp)) in self.sigma2_chain.iter().zip(&self.log_posterior_chain).enumerate() {
            wtr.write_record([i.to_string(), s.to_string(), lp.to_string()])
                .map_err(err)?;
        }
        wtr.flush().map_err(|e| Error::io("<trace csv>", e))
    }

    /// One embedding CSV per retained sample: `<dir>/locations_<iter>.csv`.
    pub fn write_location_samples(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (iter, sample) in self.retained_iterations().zip(&self.location_samples) {
            let path = dir.join(format!("locations_{iter:06}.csv"));
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            sample.write_csv(std::io::BufWriter::new(file))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BmdsResult {
    /// Highest-log-posterior state visited.
    pub mode_locations: Embedding2D,
    /// Pairwise distances of `mode_locations`.
    pub delta_hat: DistanceMatrix,
    /// Posterior mean of `sigma^2` over post-burn-in iterations.
    pub sigma2_estimate: f64,
    pub trace: McmcTrace,
}

fn check_alignment(d: &DistanceMatrix, s: &Embedding2D) -> Result<()> {
    if d.labels() != s.labels() {
        return Err(Error::Alignment(
            "distance matrix and locations list different features".into(),
        ));
    }
    Ok(())
}

/// Log of the truncated-normal data model, up to an additive constant:
/// `-(q/2) ln sigma^2 - SSR / (2 sigma^2) - sum ln Phi(delta_jk / sigma)`.
pub fn log_likelihood(d: &DistanceMatrix, s: &Embedding2D, sigma2: f64) -> Result<f64> {
    check_alignment(d, s)?;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Numeric(format!("sigma^2 must be positive and finite, got {sigma2}")));
    }
    let sigma = sigma2.sqrt();
    let c = s.coords();
    let p = c.len();
    let mut ssr = 0.0;
    let mut trunc = 0.0;
    for j in 0..p {
        for k in j + 1..p {
            let delta = crate::distances::euclid(c[j], c[k]);
            let r = d.get(j, k) - delta;
            ssr += r * r;
            trunc += log_norm_cdf(delta / sigma);
        }
    }
    let q = (p * p.saturating_sub(1) / 2) as f64;
    let value = -0.5 * q * sigma2.ln() - ssr / (2.0 * sigma2) - trunc;
    if !value.is_finite() {
        return Err(Error::Numeric("log-likelihood is not finite".into()));
    }
    Ok(value)
}

/// Log of the inverse-gamma prior density of `sigma^2`, up to a constant.
pub fn log_sigma2_prior(sigma2: f64, a: f64, b: f64) -> f64 {
    -(a + 1.0) * sigma2.ln() - b / sigma2
}

fn sum_squared_residuals(d: &DistanceMatrix, coords: &[[f64; 2]]) -> f64 {
    let p = coords.len();
    let mut ssr = 0.0;
    for j in 0..p {
        for k in j + 1..p {
            let r = d.get(j, k) - crate::distances::euclid(coords[j], coords[k]);
            ssr += r * r;
        }
    }
    ssr
}

fn draw_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    // 1/X with X ~ Gamma(shape, rate = scale).
    let g = Gamma::new(shape, 1.0 / scale).expect("positive parameters");
    loop {
        let x: f64 = g.sample(rng);
        if x > 0.0 {
            return 1.0 / x;
        }
    }
}

/// One draw of `sigma^2` from `IG(q/2 + a, SSR/2 + b)`, the conditional with
/// the truncation term dropped.
pub fn gibbs_sigma2<R: Rng + ?Sized>(
    d: &DistanceMatrix,
    s: &Embedding2D,
    a: f64,
    b: f64,
    rng: &mut R,
) -> Result<f64> {
    check_alignment(d, s)?;
    if !(a > 2.0) || !(b > 0.0) {
        return Err(Error::Config(format!("need a > 2 and b > 0, got a={a}, b={b}")));
    }
    let p = s.len();
    let q = (p * p.saturating_sub(1) / 2) as f64;
    let ssr = sum_squared_residuals(d, s.coords());
    Ok(draw_inverse_gamma(0.5 * q + a, 0.5 * ssr + b, rng))
}

/// Folds a coordinate back into `[0, 1]` by reflection at both walls.
fn reflect(x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y > 1.0 {
        2.0 - y
    } else {
        y
    }
}

const ADAPT_WINDOW: usize = 50;

/// Fills `out` with `ln Phi(delta / sigma)` and returns the upper-triangle sum.
fn fill_log_phi(delta: &[f64], p: usize, sigma: f64, out: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for j in 0..p {
        for k in j + 1..p {
            let v = log_norm_cdf(delta[j * p + k] / sigma);
            out[j * p + k] = v;
            out[k * p + j] = v;
            total += v;
        }
    }
    total
}

/// Runs the sampler from `init` and returns the posterior-mode configuration.
pub fn run_mcmc(d: &DistanceMatrix, init: &Embedding2D, cfg: &BmdsConfig) -> Result<BmdsResult> {
    cfg.validate()?;
    check_alignment(d, init)?;
    let p = init.len();
    if p < 2 {
        return Err(Error::Dimension(format!("BMDS needs at least 2 features, got {p}")));
    }
    let q = (p * (p - 1) / 2) as f64;
    let labels = init.labels().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut coords: Vec<[f64; 2]> = init.coords().to_vec();
    // Current pairwise distances, row-major p x p.
    let mut delta = vec![0.0; p * p];
    for j in 0..p {
        for k in j + 1..p {
            let v = crate::distances::euclid(coords[j], coords[k]);
            delta[j * p + k] = v;
            delta[k * p + j] = v;
        }
    }
    let obs: Vec<f64> = d.values().iter().copied().collect();
    let ssr0 = sum_squared_residuals(d, &coords);
    let mut sigma2 = match cfg.fixed_sigma2 {
        Some(v) => v,
        None => draw_inverse_gamma(0.5 * q + cfg.a, 0.5 * ssr0 + cfg.b, &mut rng),
    };
    let mut sd = cfg.proposal_sd.unwrap_or(0.5 / (p as f64).sqrt());

    let mut sigma2_chain = Vec::with_capacity(cfg.iterations);
    let mut lp_chain = Vec::with_capacity(cfg.iterations);
    let mut samples = Vec::new();
    let mut best_lp = f64::NEG_INFINITY;
    let mut best_coords = coords.clone();
    let (mut accepted, mut proposed) = (0u64, 0u64);
    let (mut window_acc, mut window_prop) = (0u64, 0u64);
    let mut new_delta = vec![0.0; p];
    // ln Phi(delta_jk / sigma) for the current state and sigma.
    let mut lphi = vec![0.0; p * p];
    let mut new_lphi = vec![0.0; p];
    fill_log_phi(&delta, p, sigma2.sqrt(), &mut lphi);

    for iter in 0..cfg.iterations {
        let sigma = sigma2.sqrt();
        let inv2s2 = 0.5 / sigma2;
        for j in 0..p {
            let zx: f64 = rng.sample(StandardNormal);
            let zy: f64 = rng.sample(StandardNormal);
            let cand = [reflect(coords[j][0] + sd * zx), reflect(coords[j][1] + sd * zy)];
            let mut log_ratio = 0.0;
            for k in 0..p {
                if k == j {
                    continue;
                }
                let old = delta[j * p + k];
                let new = crate::distances::euclid(cand, coords[k]);
                new_delta[k] = new;
                let obs_jk = obs[j * p + k];
                let (r_old, r_new) = (obs_jk - old, obs_jk - new);
                let dssr = r_new * r_new - r_old * r_old;
                let l_new = log_norm_cdf(new / sigma);
                new_lphi[k] = l_new;
                log_ratio += -dssr * inv2s2 - l_new + lphi[j * p + k];
            }
            let u: f64 = rng.random();
            let accept = log_ratio >= 0.0 || u.ln() < log_ratio;
            if accept {
                coords[j] = cand;
                for k in 0..p {
                    if k != j {
                        delta[j * p + k] = new_delta[k];
                        delta[k * p + j] = new_delta[k];
                        lphi[j * p + k] = new_lphi[k];
                        lphi[k * p + j] = new_lphi[k];
                    }
                }
            }
            if iter >= cfg.burn_in {
                proposed += 1;
                accepted += accept as u64;
            } else {
                window_prop += 1;
                window_acc += accept as u64;
            }
        }
        if cfg.adapt && iter < cfg.burn_in && (iter + 1) % ADAPT_WINDOW == 0 {
            let rate = window_acc as f64 / window_prop.max(1) as f64;
            if rate < 0.30 {
                sd *= 0.85;
            } else if rate > 0.40 {
                sd = (sd * 1.15).min(1.0);
            }
            window_acc = 0;
            window_prop = 0;
        }

        let ssr = {
            let mut s = 0.0;
            for j in 0..p {
                for k in j + 1..p {
                    let r = obs[j * p + k] - delta[j * p + k];
                    s += r * r;
                }
            }
            s
        };
        if cfg.fixed_sigma2.is_none() {
            sigma2 = draw_inverse_gamma(0.5 * q + cfg.a, 0.5 * ssr + cfg.b, &mut rng);
        }

        let trunc = if cfg.fixed_sigma2.is_none() {
            fill_log_phi(&delta, p, sigma2.sqrt(), &mut lphi)
        } else {
            (0..p).map(|j| lphi[j * p + j + 1..(j + 1) * p].iter().sum::<f64>()).sum()
        };
        let lp = -0.5 * q * sigma2.ln() - ssr / (2.0 * sigma2) - trunc
            + log_sigma2_prior(sigma2, cfg.a, cfg.b);
        sigma2_chain.push(sigma2);
        lp_chain.push(lp);
        if lp > best_lp {
            best_lp = lp;
            best_coords.copy_from_slice(&coords);
        }
        if iter >= cfg.burn_in && (iter - cfg.burn_in).is_multiple_of(cfg.thin) {
            samples.push(Embedding2D::new(coords.clone(), labels.clone())?);
        }
    }

    let post = &sigma2_chain[cfg.burn_in..];
    let sigma2_estimate = post.iter().sum::<f64>() / post.len() as f64;
    let mode_locations = Embedding2D::new(best_coords, labels.clone())?;
    let delta_hat = DistanceMatrix::from_points(mode_locations.coords(), labels)?;
    Ok(BmdsResult {
        mode_locations,
        delta_hat,
        sigma2_estimate,
        trace: McmcTrace {
            sigma2_chain,
            log_posterior_chain: lp_chain,
            location_samples: samples,
            accept_rate: accepted as f64 / proposed.max(1) as f64,
            burn_in: cfg.burn_in,
            thin: cfg.thin,
            proposal_sd: sd,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::normalize_max;
    use crate::embed::mds_embed;

    fn labels(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("f{j}")).collect()
    }

    fn random_points(p: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
        (0..p).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
    }

    fn phi_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= x * x / (2 * n + 1) as f64;
            sum += term;
        }
        0.5 + (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt() * sum
    }

    #[test]
    fn likelihood_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pts = random_points(5, &mut rng);
        let obs = random_points(5, &mut rng);
        let d = DistanceMatrix::from_points(&obs, labels(5)).unwrap();
        let s = Embedding2D::new(pts.clone(), labels(5)).unwrap();
        let sigma2 = 0.3;
        let mut expected = -0.5 * 10.0 * f64::ln(sigma2);
        for j in 0..5 {
            for k in 0..j {
                let delta = ((pts[j][0] - pts[k][0]).powi(2) + (pts[j][1] - pts[k][1]).powi(2)).sqrt();
                expected -= (d.get(j, k) - delta).powi(2) / (2.0 * sigma2);
                expected -= phi_series(delta / sigma2.sqrt()).ln();
            }
        }
        let got = log_likelihood(&d, &s, sigma2).unwrap();
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn residual_free_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = random_points(4, &mut rng);
        let d = DistanceMatrix::from_points(&pts, labels(4)).unwrap();
        let s = Embedding2D::new(pts, labels(4)).unwrap();
        let sigma2: f64 = 1e-4;
        let expected = -3.0 * sigma2.ln()
            - d.upper_triangle().iter().map(|&v| log_norm_cdf(v / sigma2.sqrt())).sum::<f64>();
        assert!((log_likelihood(&d, &s, sigma2).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn doubling_residuals_costs_three_ssr_halves() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = random_points(5, &mut rng);
        let s = Embedding2D::new(pts.clone(), labels(5)).unwrap();
        let truth = DistanceMatrix::from_points(&pts, labels(5)).unwrap();
        let noise: Vec<f64> = (0..25).map(|_| rng.random_range(0.0..0.05)).collect();
        let make = |scale: f64| {
            let v = ndarray::Array2::from_shape_fn((5, 5), |(j, k)| {
                if j == k {
                    0.0
                } else {
                    truth.get(j, k) + scale * noise[j.min(k) * 5 + j.max(k)]
                }
            });
            DistanceMatrix::new(v, labels(5)).unwrap()
        };
        let sigma2 = 0.02;
        let (d1, d2) = (make(1.0), make(2.0));
        let ssr: f64 = d1
            .upper_triangle()
            .iter()
            .zip(truth.upper_triangle())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        let drop = log_likelihood(&d1, &s, sigma2).unwrap() - log_likelihood(&d2, &s, sigma2).unwrap();
        assert!((drop - 3.0 * ssr / (2.0 * sigma2)).abs() < 1e-9);
    }

    #[test]
    fn invalid_sigma2_is_numeric_error() {
        let d = DistanceMatrix::from_points(&[[0.0, 0.0], [1.0, 0.0]], labels(2)).unwrap();
        let s = Embedding2D::new(vec![[0.0, 0.0], [1.0, 0.0]], labels(2)).unwrap();
        assert!(matches!(log_likelihood(&d, &s, 0.0), Err(Error::Numeric(_))));
        assert!(matches!(log_likelihood(&d, &s, f64::NAN), Err(Error::Numeric(_))));
    }

    #[test]
    fn sigma2_draws_match_inverse_gamma_mean() {
        // p = 5 gives q = 10; zero residuals leave IG(5 + 3, 1) with mean 1/7.
        let pts = [[0.1, 0.1], [0.9, 0.2], [0.5, 0.5], [0.3, 0.8], [0.7, 0.9]];
        let d = DistanceMatrix::from_points(&pts, labels(5)).unwrap();
        let s = Embedding2D::new(pts.to_vec(), labels(5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| gibbs_sigma2(&d, &s, 3.0, 1.0, &mut rng).unwrap()).collect();
        assert!(draws.iter().all(|&v| v > 0.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        // IG(8, 1) sd = mean / sqrt(6); standard error over 1e5 draws.
        let se = (1.0 / 7.0) / 6f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 1.0 / 7.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn reflection_stays_in_unit_interval() {
        for &x in &[-0.2, 1.3, 2.7, -3.1, 0.5] {
            let r = reflect(x);
            assert!((0.0..=1.0).contains(&r));
        }
        assert!((reflect(-0.2) - 0.2).abs() < 1e-15);
        assert!((reflect(1.3) - 0.7).abs() < 1e-12);
    }

    fn planar_problem(seed: u64, p: usize) -> (DistanceMatrix, Embedding2D) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_points(p, &mut rng);
        let d = normalize_max(&DistanceMatrix::from_points(&pts, labels(p)).unwrap());
        let init = mds_embed(&d).unwrap().rescaled(0.05, 0.95).unwrap();
        (d, init)
    }

    #[test]
    fn same_seed_same_result() {
        let (d, init) = planar_problem(1, 8);
        let cfg = BmdsConfig { iterations: 300, burn_in: 100, thin: 5, seed: 3, ..Default::default() };
        let a = run_mcmc(&d, &init, &cfg).unwrap();
        let b = run_mcmc(&d, &init, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.location_samples.len(), 40);
        assert_eq!(a.trace.sigma2_chain.len(), 300);
    }

    #[test]
    fn tiny_steps_are_almost_always_accepted() {
        let (d, init) = planar_problem(2, 8);
        let cfg = BmdsConfig {
            iterations: 200,
            burn_in: 50,
            thin: 1,
            proposal_sd: Some(1e-9),
            adapt: false,
            seed: 1,
            ..Default::default()
        };
        let r = run_mcmc(&d, &init, &cfg).unwrap();
        assert!(r.trace.accept_rate > 0.99, "{}", r.trace.accept_rate);
        for (a, b) in r.mode_locations.coords().iter().zip(init.coords()) {
            assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn mode_dominates_chain_and_delta_hat_is_consistent() {
        let (d, init) = planar_problem(5, 10);
        let cfg = BmdsConfig { iterations: 600, burn_in: 200, thin: 4, seed: 8, ..Default::default() };
        let r = run_mcmc(&d, &init, &cfg).unwrap();
        let best = r.trace.log_posterior_chain.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let c = r.mode_locations.coords();
        for j in 0..10 {
            for k in 0..10 {
                assert!((r.delta_hat.get(j, k) - crate::distances::euclid(c[j], c[k])).abs() < 1e-12);
            }
        }
        // Recompute the log posterior of the reported mode at its sigma^2.
        let at = r.trace.log_posterior_chain.iter().position(|&v| v == best).unwrap();
        let s2 = r.trace.sigma2_chain[at];
        let lp = log_likelihood(&d, &r.mode_locations, s2).unwrap() + log_sigma2_prior(s2, 3.0, 1.0);
        assert!((lp - best).abs() < 1e-6 * best.abs().max(1.0));
    }

    #[test]
    fn config_errors() {
        let (d, init) = planar_problem(0, 4);
        let bad = BmdsConfig { iterations: 10, burn_in: 10, ..Default::default() };
        assert!(matches!(run_mcmc(&d, &init, &bad), Err(Error::Config(_))));
        let bad = BmdsConfig { a: 2.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trace_csv_layout() {
        let (d, init) = planar_problem(3, 5);
        let cfg = BmdsConfig { iterations: 4, burn_in: 1, thin: 1, ..Default::default() };
        let r = run_mcmc(&d, &init, &cfg).unwrap();
        let mut buf = Vec::new();
        r.trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("iter,sigma2,log_posterior"));
        assert_eq!(text.lines().count(), 5);
        let dir = tempfile::tempdir().unwrap();
        r.trace.write_location_samples(dir.path()).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3);
    }

    proptest::proptest! {
        #[test]
        fn likelihood_invariant_under_square_symmetries(seed in 0u64..500, which in 0usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = random_points(6, &mut rng);
            let obs = random_points(6, &mut rng);
            let d = DistanceMatrix::from_points(&obs, labels(6)).unwrap();
            let map = |c: [f64; 2]| -> [f64; 2] {
                let [x, y] = c;
                match which {
                    0 => [1.0 - y, x],
                    1 => [1.0 - x, 1.0 - y],
                    2 => [y, 1.0 - x],
                    3 => [1.0 - x, y],
                    4 => [x, 1.0 - y],
                    5 => [y, x],
                    _ => [1.0 - y, 1.0 - x],
                }
            };
            let s = Embedding2D::new(pts.clone(), labels(6)).unwrap();
            let t = Embedding2D::new(pts.iter().map(|&c| map(c)).collect(), labels(6)).unwrap();
            let a = log_likelihood(&d, &s, 0.05).unwrap();
            let b = log_likelihood(&d, &t, 0.05).unwrap();
            proptest::prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
