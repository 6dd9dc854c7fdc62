//! Monte Carlo sweeps over SNR, slope fitting and the claim check.

mod sum;

pub use sum::neumaier_sum;

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::SnrPoint;
use crate::rng::TrialKey;
use crate::schemes::{Fidelity, Registry, Scheme, SchemeError, SchemeOutcome, TrialContext};
use crate::state::Alpha;

pub const DEFAULT_SNR_DB: [f64; 3] = [40.0, 60.0, 80.0];
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_TOLERANCE: f64 = 0.05;
pub const MIN_TRIALS: usize = 100;
/// Largest fraction of failed trials a point may exclude.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;
/// Points used by the slope fit (the highest SNRs).
pub const FIT_POINTS: usize = 3;

pub fn default_alpha_grid() -> Vec<Alpha> {
    [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)]
        .into_iter()
        .map(|(p, q)| Alpha::ratio(p, q))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("{failed} of {trials} trials failed at {snr_db} dB (first: {first})")]
    TooManyFailures {
        snr_db: f64,
        failed: usize,
        trials: usize,
        first: SchemeError,
    },
    #[error("slope fit is degenerate: {0}")]
    DegenerateFit(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub alpha: Alpha,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub fidelity: Fidelity,
    /// Zero receiver noise (bit-level mode only).
    pub noiseless: bool,
    /// Worker count; `None` uses rayon's default. Never affects results.
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn new(alpha: Alpha) -> Self {
        Self {
            alpha,
            snr_db: DEFAULT_SNR_DB.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: 1,
            fidelity: Fidelity::Analytic,
            noiseless: false,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.snr_db.len() < 2 {
            return Err(HarnessError::Config("need at least two SNR points".into()));
        }
        if let Some(bad) = self.snr_db.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(HarnessError::Config(format!(
                "SNR {bad} dB is not a finite nonnegative value"
            )));
        }
        if self.trials < MIN_TRIALS {
            return Err(HarnessError::Config(format!(
                "trials = {} is below {MIN_TRIALS}",
                self.trials
            )));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("thread count must be positive".into()));
        }
        Ok(())
    }
}

/// Side-information statistics over the trials that were not flagged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SideStats {
    pub trials: usize,
    pub near_singular: usize,
    pub mean_error_power: f64,
    pub analytic_error_power: f64,
    /// Trials where both users recovered their counterpart's bits.
    pub recovered: usize,
    pub bit_errors: usize,
    pub saturated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub snr_db: f64,
    pub rho: f64,
    pub rate_user1: f64,
    pub rate_user2: f64,
    pub rate_sum: f64,
    pub se_user1: f64,
    pub se_user2: f64,
    pub se_sum: f64,
    /// Trials that contributed.
    pub trials: usize,
    /// Trials excluded because the scheme reported an error.
    pub failed: usize,
    pub peak_power: Option<f64>,
    pub side: Option<SideStats>,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = neumaier_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = neumaier_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn side_stats(outcomes: &[SchemeOutcome]) -> Option<SideStats> {
    let reports: Vec<_> = outcomes
        .iter()
        .filter_map(|o| o.side_info.as_ref())
        .collect();
    if reports.is_empty() {
        return None;
    }
    let used: Vec<_> = reports.iter().filter(|r| !r.near_singular).collect();
    let n = used.len().max(1) as f64;
    Some(SideStats {
        trials: used.len(),
        near_singular: reports.len() - used.len(),
        mean_error_power: neumaier_sum(used.iter().map(|r| r.error_power)) / n,
        analytic_error_power: neumaier_sum(used.iter().map(|r| r.analytic_error_power)) / n,
        recovered: used
            .iter()
            .filter(|r| r.recovered.iter().all(|&x| x))
            .count(),
        bit_errors: used.iter().map(|r| r.bit_errors).sum(),
        saturated: used.iter().map(|r| r.saturated).sum(),
    })
}

fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, HarnessError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every trial of one SNR point; outcomes come back in trial order.
pub fn run_point(
    scheme: &dyn Scheme,
    cfg: &SweepConfig,
    snr_index: usize,
) -> Result<Vec<Result<SchemeOutcome, SchemeError>>, HarnessError> {
    let snr = SnrPoint::from_db(cfg.snr_db[snr_index]);
    with_pool(cfg.threads, || {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let mut ctx = TrialContext::new(
                    cfg.alpha,
                    snr,
                    TrialKey::new(cfg.seed, snr_index as u64, trial),
                );
                ctx.fidelity = cfg.fidelity;
                ctx.noiseless = cfg.noiseless;
                scheme.run_trial(&ctx)
            })
            .collect()
    })
}

/// Mean per-user rates and standard errors at every SNR point.
pub fn measure_rates(
    scheme: &dyn Scheme,
    cfg: &SweepConfig,
) -> Result<Vec<PointEstimate>, HarnessError> {
    cfg.validate()?;
    scheme.supports_alpha(cfg.alpha)?;
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    for (i, &db) in cfg.snr_db.iter().enumerate() {
        let results = run_point(scheme, cfg, i)?;
        let mut outcomes = Vec::with_capacity(results.len());
        let mut first_error = None;
        let mut failed = 0;
        for r in results {
            match r {
                Ok(o) => outcomes.push(o),
                Err(e) => {
                    failed += 1;
                    first_error.get_or_insert(e);
                }
            }
        }
        if let Some(first) = first_error {
            if failed as f64 > MAX_FAILURE_FRACTION * cfg.trials as f64 || outcomes.len() < 2 {
                return Err(HarnessError::TooManyFailures {
                    snr_db: db,
                    failed,
                    trials: cfg.trials,
                    first,
                });
            }
            log::warn!(
                "{}: excluded {failed} failed trials at {db} dB: {first}",
                scheme.name()
            );
        }
        let r1: Vec<f64> = outcomes.iter().map(|o| o.rate_user1).collect();
        let r2: Vec<f64> = outcomes.iter().map(|o| o.rate_user2).collect();
        let rs: Vec<f64> = outcomes.iter().map(|o| o.sum_rate()).collect();
        let (rate_user1, se_user1) = mean_and_se(&r1);
        let (rate_user2, se_user2) = mean_and_se(&r2);
        let (rate_sum, se_sum) = mean_and_se(&rs);
        points.push(PointEstimate {
            snr_db: db,
            rho: SnrPoint::from_db(db).rho(),
            rate_user1,
            rate_user2,
            rate_sum,
            se_user1,
            se_user2,
            se_sum,
            trials: outcomes.len(),
            failed,
            peak_power: outcomes
                .iter()
                .filter_map(|o| o.peak_power)
                .reduce(f64::max),
            side: side_stats(&outcomes),
        });
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdofEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// `(snr_db, rate)` of the points that entered the fit.
    pub per_point_rates: Vec<(f64, f64)>,
}

/// Least-squares line of `rates` against `log2(rho)` over the highest
/// [`FIT_POINTS`] SNR points.
pub fn fit_slope(rates: &[f64], snr_db: &[f64]) -> Result<GdofEstimate, HarnessError> {
    if rates.len() != snr_db.len() {
        return Err(HarnessError::DegenerateFit(format!(
            "{} rates for {} SNR points",
            rates.len(),
            snr_db.len()
        )));
    }
    if rates.len() < 2 {
        return Err(HarnessError::DegenerateFit(
            "need at least two points".into(),
        ));
    }
    let mut pts: Vec<(f64, f64)> = snr_db.iter().copied().zip(rates.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pts = pts.split_off(pts.len().saturating_sub(FIT_POINTS));
    let xs: Vec<f64> = pts
        .iter()
        .map(|(db, _)| SnrPoint::from_db(*db).log2_rho())
        .collect();
    let n = xs.len() as f64;
    let mx = neumaier_sum(xs.iter().copied()) / n;
    let my = neumaier_sum(pts.iter().map(|p| p.1)) / n;
    let sxx = neumaier_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    if !(sxx > 0.0) {
        return Err(HarnessError::DegenerateFit(
            "all SNR points coincide".into(),
        ));
    }
    let sxy = neumaier_sum(xs.iter().zip(&pts).map(|(x, p)| (x - mx) * (p.1 - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = neumaier_sum(xs.iter().zip(&pts).map(|(x, p)| {
        let r = p.1 - (intercept + slope * x);
        r * r
    }));
    Ok(GdofEstimate {
        slope,
        intercept,
        residual_rms: (sse / n).sqrt(),
        per_point_rates: pts,
    })
}

/// Sweep and fit in one go.
pub fn estimate_gdof(
    scheme: &dyn Scheme,
    cfg: &SweepConfig,
) -> Result<(Vec<PointEstimate>, GdofEstimate), HarnessError> {
    let points = measure_rates(scheme, cfg)?;
    let rates: Vec<f64> = points.iter().map(|p| p.rate_sum).collect();
    let fit = fit_slope(&rates, &cfg.snr_db)?;
    Ok((points, fit))
}

/// Schemes checked by [`verify_against_claims`].
pub const VERIFIED_SCHEMES: [&str; 16] = [
    "zf",
    "su",
    "tsm1",
    "tsm2",
    "tsm3",
    "tsm4",
    "tsm4r",
    "tsm4-mix",
    "tsm5",
    "tsm5-s1a-s1a",
    "tsm5-sa1-sa1",
    "tsm5-s1a-sa1",
    "tsm5-sa1-s1a",
    "mat",
    "mat-nd",
    "pnnp-nd",
];

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub scheme: String,
    pub alpha: Alpha,
    pub claimed: f64,
    pub bound: Option<f64>,
    pub slope: Option<f64>,
    pub residual_rms: Option<f64>,
    /// Standard error of the sum rate at the highest SNR point.
    pub se_sum: Option<f64>,
    pub pass: bool,
    pub note: String,
}

/// Fits every `(scheme, alpha)` pair and compares the slope with the claimed
/// GDoF and with the outer bound of the scheme's own distribution.
pub fn verify_against_claims(
    registry: &Registry,
    schemes: &[&str],
    alphas: &[Alpha],
    tolerance: f64,
    template: &SweepConfig,
) -> Vec<VerifyRow> {
    let mut seen = Vec::new();
    let mut rows = Vec::new();
    for &name in schemes {
        if seen.contains(&name) {
            continue;
        }
        seen.push(name);
        let Some(scheme) = registry.get(name) else {
            rows.push(VerifyRow {
                scheme: name.to_string(),
                alpha: Alpha::ratio(0, 1),
                claimed: f64::NAN,
                bound: None,
                slope: None,
                residual_rms: None,
                se_sum: None,
                pass: false,
                note: "unknown scheme".into(),
            });
            continue;
        };
        for &alpha in alphas {
            let claimed = scheme.claimed_gdof(alpha);
            let bound = scheme.outer_bound(alpha);
            let cfg = SweepConfig {
                alpha,
                ..template.clone()
            };
            let row = match estimate_gdof(scheme, &cfg) {
                Ok((points, fit)) => {
                    let close = (fit.slope - claimed).abs() <= tolerance;
                    let below = bound.is_none_or(|b| fit.slope <= b + tolerance);
                    let note = match (close, below) {
                        (true, true) => String::new(),
                        (false, true) => "slope off the claim".into(),
                        (true, false) => "slope above the bound".into(),
                        (false, false) => "slope off the claim and above the bound".into(),
                    };
                    VerifyRow {
                        scheme: name.to_string(),
                        alpha,
                        claimed,
                        bound,
                        slope: Some(fit.slope),
                        residual_rms: Some(fit.residual_rms),
                        se_sum: points.last().map(|p| p.se_sum),
                        pass: close && below,
                        note,
                    }
                }
                Err(e) => VerifyRow {
                    scheme: name.to_string(),
                    alpha,
                    claimed,
                    bound,
                    slope: None,
                    residual_rms: None,
                    se_sum: None,
                    pass: false,
                    note: e.to_string(),
                },
            };
            rows.push(row);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_has_zero_residual() {
        let db = [20.0, 40.0, 60.0, 80.0];
        let rates: Vec<f64> = db
            .iter()
            .map(|d| 1.25 * SnrPoint::from_db(*d).log2_rho() + 0.7)
            .collect();
        let fit = fit_slope(&rates, &db).unwrap();
        assert!((fit.slope - 1.25).abs() < 1e-12);
        assert!((fit.intercept - 0.7).abs() < 1e-9);
        assert!(fit.residual_rms < 1e-9);
        assert_eq!(fit.per_point_rates.len(), 3);
        assert_eq!(fit.per_point_rates[0].0, 40.0);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        assert!(matches!(
            fit_slope(&[1.0, 2.0], &[30.0, 30.0]),
            Err(HarnessError::DegenerateFit(_))
        ));
        assert!(matches!(
            fit_slope(&[1.0], &[30.0]),
            Err(HarnessError::DegenerateFit(_))
        ));
    }

    #[test]
    fn config_rejects_small_sweeps() {
        let mut cfg = SweepConfig::new(Alpha::ratio(1, 2));
        cfg.trials = 10;
        assert!(cfg.validate().is_err());
        cfg.trials = 100;
        cfg.snr_db = vec![40.0];
        assert!(cfg.validate().is_err());
    }
}
