//! Transmission schemes behind a common trait, and a registry selecting
//! them by name.

pub mod block;
pub mod layered;
pub mod quantize;

mod baseline;
mod delayed;
mod pnnp;
mod sideinfo;
mod two_use;

use std::fmt;

use thiserror::Error;

use crate::bounds::{achievable_gdof, outer_bounds, PolicyId};
use crate::channel::{ChannelError, SnrPoint};
use crate::rng::TrialKey;
use crate::state::{Alpha, ScheduleError, StateDistribution};

pub use baseline::{SingleUser, ZeroForcing};
pub use block::{Block, BlockBuilder, Role, User};
pub use delayed::{Mat, MatNonDiverse, Tsm3, Tsm4, Tsm4Variant};
pub use layered::{evaluate_layered_rate, LayeredError, Observation};
pub use pnnp::{PnNpNonDiverse, Subcase, Tsm5, Tsm5Pair};
pub use quantize::{
    dequantize, quantize, xor_bits, QuantizeError, QuantizedSideInfo, QuantizerGrid,
};
pub use two_use::{Tsm1, Tsm2};

/// How side information is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fidelity {
    /// Quantization enters as additive noise of the grid's error power.
    #[default]
    Analytic,
    /// Symbols are drawn, side information is really quantized, XORed and
    /// mapped onto common symbols.
    BitLevel,
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fidelity::Analytic => "analytic",
            Fidelity::BitLevel => "bitlevel",
        })
    }
}

impl std::str::FromStr for Fidelity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Fidelity::Analytic),
            "bitlevel" | "bit-level" => Ok(Fidelity::BitLevel),
            other => Err(format!(
                "unknown mode {other:?} (expected analytic or bitlevel)"
            )),
        }
    }
}

/// Everything one trial depends on.
#[derive(Debug, Clone, Copy)]
pub struct TrialContext {
    pub alpha: Alpha,
    pub snr: SnrPoint,
    pub key: TrialKey,
    pub fidelity: Fidelity,
    /// Zero receiver noise in bit-level mode.
    pub noiseless: bool,
}

impl TrialContext {
    pub fn new(alpha: Alpha, snr: SnrPoint, key: TrialKey) -> Self {
        Self {
            alpha,
            snr,
            key,
            fidelity: Fidelity::Analytic,
            noiseless: false,
        }
    }

    pub fn bit_level(mut self, noiseless: bool) -> Self {
        self.fidelity = Fidelity::BitLevel;
        self.noiseless = noiseless;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Layered(#[from] LayeredError),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("alpha = {alpha} does not give integer phase lengths")]
    NonIntegerPhases { alpha: String },
    #[error("{unmatched} channel uses could not be paired")]
    UnpairableSchedule { unmatched: usize },
    #[error("channel draw too close to singular for side-information quantization")]
    NearSingular,
    #[error("scheme {scheme} does not accept a custom distribution: {reason}")]
    Distribution { scheme: String, reason: String },
}

/// Per-layer diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerReport {
    pub label: String,
    pub role: Role,
    /// Designed prelog summed over the layer's symbols.
    pub prelog: f64,
    /// Granted bits per block (minimum over the decoders of the layer).
    pub bits: f64,
    /// Information each user collected on the layer, if it decodes it.
    pub information: [Option<f64>; 2],
}

/// Bit-level side-information diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SideInfoReport {
    /// Quantized complex values in the block.
    pub values: usize,
    pub bits: usize,
    /// Mean squared reconstruction error per quantized value.
    pub error_power: f64,
    /// Error power predicted by the grid.
    pub analytic_error_power: f64,
    pub saturated: usize,
    /// Draw flagged as numerically near-singular; excluded from statistics.
    pub near_singular: bool,
    /// Each user recovered its counterpart's bits exactly.
    pub recovered: [bool; 2],
    /// Bit errors across both users' recoveries.
    pub bit_errors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub rate_user1: f64,
    pub rate_user2: f64,
    pub block_length: usize,
    pub layers: Vec<LayerReport>,
    pub side_info: Option<SideInfoReport>,
    /// Largest `|x|^2` over the block in bit-level mode.
    pub peak_power: Option<f64>,
}

impl SchemeOutcome {
    pub fn sum_rate(&self) -> f64 {
        self.rate_user1 + self.rate_user2
    }

    /// Merges consecutive blocks into one outcome over their total length.
    pub fn concatenate(parts: Vec<SchemeOutcome>) -> SchemeOutcome {
        let n: usize = parts.iter().map(|p| p.block_length).sum();
        let weight = |f: fn(&SchemeOutcome) -> f64| {
            parts
                .iter()
                .map(|p| f(p) * p.block_length as f64)
                .sum::<f64>()
                / n.max(1) as f64
        };
        let rate_user1 = weight(|p| p.rate_user1);
        let rate_user2 = weight(|p| p.rate_user2);
        let peak_power = parts.iter().filter_map(|p| p.peak_power).reduce(f64::max);
        let mut side: Option<SideInfoReport> = None;
        for s in parts.iter().filter_map(|p| p.side_info.as_ref()) {
            side = Some(match side {
                None => s.clone(),
                Some(acc) => merge_side_info(acc, s),
            });
        }
        SchemeOutcome {
            rate_user1,
            rate_user2,
            block_length: n,
            layers: parts.into_iter().flat_map(|p| p.layers).collect(),
            side_info: side,
            peak_power,
        }
    }
}

fn merge_side_info(a: SideInfoReport, b: &SideInfoReport) -> SideInfoReport {
    let values = a.values + b.values;
    let w = |x: f64, y: f64| (x * a.values as f64 + y * b.values as f64) / values.max(1) as f64;
    SideInfoReport {
        values,
        bits: a.bits + b.bits,
        error_power: w(a.error_power, b.error_power),
        analytic_error_power: w(a.analytic_error_power, b.analytic_error_power),
        saturated: a.saturated + b.saturated,
        near_singular: a.near_singular || b.near_singular,
        recovered: [
            a.recovered[0] && b.recovered[0],
            a.recovered[1] && b.recovered[1],
        ],
        bit_errors: a.bit_errors + b.bit_errors,
    }
}

/// A transmission scheme: the states it is designed for and one Monte Carlo
/// trial of it.
pub trait Scheme: Send + Sync {
    fn name(&self) -> &str;

    fn description(&self) -> &str;

    /// Closed-form policy whose sum GDoF the scheme targets.
    fn policy(&self) -> PolicyId;

    /// The joint-state fractions the scheme's schedule realizes.
    fn distribution(&self, alpha: Alpha) -> StateDistribution;

    fn block_length(&self, alpha: Alpha) -> Result<usize, SchemeError>;

    fn supports_alpha(&self, alpha: Alpha) -> Result<(), SchemeError> {
        self.block_length(alpha).map(|_| ())
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError>;

    /// Rebuilds the scheme for a user-supplied distribution.
    fn with_distribution(&self, dist: &StateDistribution) -> Result<Box<dyn Scheme>, SchemeError> {
        let _ = dist;
        Err(SchemeError::Distribution {
            scheme: self.name().to_string(),
            reason: "the schedule is fixed".into(),
        })
    }

    fn claimed_gdof(&self, alpha: Alpha) -> f64 {
        achievable_gdof::<f64>(self.policy(), alpha).value
    }

    /// Smallest applicable outer bound for the scheme's own distribution.
    fn outer_bound(&self, alpha: Alpha) -> Option<f64> {
        outer_bounds::<f64>(&self.distribution(alpha))
            .ok()
            .map(|r| r.d_min)
    }
}

/// Schemes keyed by name, in registration order.
#[derive(Default)]
pub struct Registry {
    schemes: Vec<Box<dyn Scheme>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every scheme this crate implements.
    pub fn standard() -> Self {
        let mut r = Self::new();
        r.register(Box::new(ZeroForcing));
        r.register(Box::new(SingleUser));
        r.register(Box::new(Tsm1));
        r.register(Box::new(Tsm2));
        r.register(Box::new(Tsm3::default()));
        r.register(Box::new(Tsm4::new(Tsm4Variant::Alternating)));
        r.register(Box::new(Tsm4::new(Tsm4Variant::Reversed)));
        r.register(Box::new(Tsm4::new(Tsm4Variant::Mixed)));
        r.register(Box::new(Tsm5::default()));
        for subcase in Subcase::ALL {
            r.register(Box::new(Tsm5Pair::new(subcase)));
        }
        r.register(Box::new(Mat));
        r.register(Box::new(MatNonDiverse));
        r.register(Box::new(PnNpNonDiverse));
        r
    }

    /// Adds a scheme, replacing any earlier one with the same name.
    pub fn register(&mut self, scheme: Box<dyn Scheme>) {
        self.schemes.retain(|s| s.name() != scheme.name());
        self.schemes.push(scheme);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Scheme> {
        self.schemes
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
    }

    pub fn names(&self) -> Vec<&str> {
        self.schemes.iter().map(|s| s.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Scheme> {
        self.schemes.iter().map(|s| s.as_ref())
    }
}

/// Evaluates a list of blocks as one concatenated outcome; in bit-level mode
/// also draws unit-modulus symbols to record the peak transmit power.
pub(crate) fn run_blocks(
    blocks: &[Block],
    ctx: &TrialContext,
) -> Result<SchemeOutcome, SchemeError> {
    let mut parts = Vec::with_capacity(blocks.len());
    let mut offset = 0u64;
    for b in blocks {
        let mut out = b.evaluate()?;
        if ctx.fidelity == Fidelity::BitLevel {
            let values = sideinfo::draw_symbols(&ctx.key, offset, b.symbols.len());
            out.peak_power = Some(
                (0..b.len())
                    .map(|t| crate::channel::norm_sqr(&b.transmit(t, &values)))
                    .fold(0.0, f64::max),
            );
        }
        offset += b.len() as u64;
        parts.push(out);
    }
    Ok(SchemeOutcome::concatenate(parts))
}

/// Distribution from `(csit, topology, numerator, denominator)` literals.
pub(crate) fn dist_of(alpha: Alpha, parts: &[(&str, &str, i64, i64)]) -> StateDistribution {
    StateDistribution::new(
        alpha,
        parts.iter().map(|&(c, t, n, d)| {
            (
                crate::state::joint(c, t),
                crate::state::Fraction::ratio(n, d),
            )
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique_and_resolvable() {
        let r = Registry::standard();
        let names = r.names();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        for n in names {
            assert_eq!(r.get(n).unwrap().name(), n);
        }
        assert!(r.get("nope").is_none());
    }

    #[test]
    fn concatenation_weights_by_length() {
        let part = |r1: f64, n: usize| SchemeOutcome {
            rate_user1: r1,
            rate_user2: 0.0,
            block_length: n,
            layers: vec![],
            side_info: None,
            peak_power: None,
        };
        let merged = SchemeOutcome::concatenate(vec![part(3.0, 1), part(1.0, 3)]);
        assert_eq!(merged.block_length, 4);
        assert!((merged.rate_user1 - 1.5).abs() < 1e-12);
    }
}
