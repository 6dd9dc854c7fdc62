//! Gaussian mutual-information surrogate for layered successive decoding.
//!
//! A decoder sees a set of scalar observations, each a linear combination of
//! unit-power symbols plus independent noise. Decoding layer `L` after the
//! layers in `D` earns
//!
//! ```text
//! log2 det(N + A_U A_U^H) - log2 det(N + A_I A_I^H)
//! ```
//!
//! bits, where `U` are the still-unknown symbols, `I = U \ L` the ones left as
//! interference, and only observations visible after `D` take part.

use thiserror::Error;

use crate::channel::C64;
use crate::linalg::{gram_plus_noise, log2det_hpd};

/// One scalar observation row over the block's symbol list.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub coeffs: Vec<C64>,
    pub noise: f64,
    /// Row usable only once this layer has been decoded (side information
    /// unlocked by a common message).
    pub gate: Option<usize>,
}

impl Observation {
    pub fn new(coeffs: Vec<C64>, noise: f64) -> Self {
        Self {
            coeffs,
            noise,
            gate: None,
        }
    }

    pub fn gated(mut self, layer: usize) -> Self {
        self.gate = Some(layer);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayeredError {
    #[error("observation system is singular while decoding layer {layer}")]
    SingularSystem { layer: usize },
    #[error("observation {row} has nonpositive noise power {noise}")]
    NonPositiveNoise { row: usize, noise: f64 },
    #[error("target layer {0} is missing from the decode order")]
    TargetNotDecoded(usize),
}

/// Mutual information (bits) earned by decoding `layer` after `decoded`.
pub fn stage_information(
    observations: &[Observation],
    layers: &[Vec<usize>],
    decoded: &[usize],
    layer: usize,
) -> Result<f64, LayeredError> {
    let width = observations.first().map_or(0, |o| o.coeffs.len());
    let mut known = vec![false; width];
    for &d in decoded {
        for &s in &layers[d] {
            known[s] = true;
        }
    }
    let unknown: Vec<usize> = (0..width).filter(|&s| !known[s]).collect();
    let interference: Vec<usize> = unknown
        .iter()
        .copied()
        .filter(|s| !layers[layer].contains(s))
        .collect();

    let mut rows: Vec<&[C64]> = Vec::new();
    let mut noise: Vec<f64> = Vec::new();
    for (i, obs) in observations.iter().enumerate() {
        if let Some(g) = obs.gate {
            if !decoded.contains(&g) {
                continue;
            }
        }
        if !(obs.noise > 0.0) {
            return Err(LayeredError::NonPositiveNoise {
                row: i,
                noise: obs.noise,
            });
        }
        // rows that only involve known symbols carry no information
        if unknown.iter().all(|&s| obs.coeffs[s] == C64::new(0.0, 0.0)) {
            continue;
        }
        rows.push(&obs.coeffs);
        noise.push(obs.noise);
    }
    if rows.is_empty() {
        return Ok(0.0);
    }
    let n = rows.len();
    let full = log2det_hpd(&gram_plus_noise(&rows, &noise, &unknown), n);
    let partial = log2det_hpd(&gram_plus_noise(&rows, &noise, &interference), n);
    match (full, partial) {
        (Some(f), Some(p)) => Ok((f - p).max(0.0)),
        _ => Err(LayeredError::SingularSystem { layer }),
    }
}

/// Stage-by-stage information for one decoder following `order`.
pub fn decode_stages(
    observations: &[Observation],
    layers: &[Vec<usize>],
    order: &[usize],
) -> Result<Vec<(usize, f64)>, LayeredError> {
    let mut out = Vec::with_capacity(order.len());
    for (k, &layer) in order.iter().enumerate() {
        out.push((
            layer,
            stage_information(observations, layers, &order[..k], layer)?,
        ));
    }
    Ok(out)
}

/// Rate (bits per channel use) collected on `targets` by a single decoder.
pub fn evaluate_layered_rate(
    observations: &[Observation],
    layers: &[Vec<usize>],
    order: &[usize],
    targets: &[usize],
    block_length: usize,
) -> Result<f64, LayeredError> {
    if let Some(&missing) = targets.iter().find(|t| !order.contains(t)) {
        return Err(LayeredError::TargetNotDecoded(missing));
    }
    let stages = decode_stages(observations, layers, order)?;
    let bits: f64 = stages
        .iter()
        .filter(|(l, _)| targets.contains(l))
        .map(|(_, mi)| mi)
        .sum();
    Ok(bits / block_length as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn scalar_channel_is_log_one_plus_snr() {
        let obs = [Observation::new(vec![re(10.0)], 1.0)];
        let rate = evaluate_layered_rate(&obs, &[vec![0]], &[0], &[0], 1).unwrap();
        assert!((rate - 101f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn successive_decoding_splits_the_sum_rate() {
        // y = 3 s0 + 2 s1 + n: first stage treats s1 as noise
        let obs = [Observation::new(vec![re(3.0), re(2.0)], 1.0)];
        let layers = [vec![0], vec![1]];
        let stages = decode_stages(&obs, &layers, &[0, 1]).unwrap();
        assert!((stages[0].1 - (14f64 / 5.0).log2()).abs() < 1e-12);
        assert!((stages[1].1 - 5f64.log2()).abs() < 1e-12);
        assert!((stages[0].1 + stages[1].1 - 14f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn zero_power_layer_earns_nothing() {
        let obs = [Observation::new(vec![re(5.0), re(0.0)], 1.0)];
        let rate = evaluate_layered_rate(&obs, &[vec![0], vec![1]], &[1, 0], &[1], 1).unwrap();
        assert_eq!(rate, 0.0);
    }

    #[test]
    fn gated_rows_wait_for_their_layer() {
        let obs = [
            Observation::new(vec![re(0.0), re(4.0)], 1.0),
            Observation::new(vec![re(2.0), re(0.0)], 1.0).gated(1),
        ];
        let layers = [vec![0], vec![1]];
        assert_eq!(stage_information(&obs, &layers, &[], 0).unwrap(), 0.0);
        assert!((stage_information(&obs, &layers, &[1], 0).unwrap() - 5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn missing_target_and_bad_noise_are_errors() {
        let obs = [Observation::new(vec![re(1.0)], 1.0)];
        assert_eq!(
            evaluate_layered_rate(&obs, &[vec![0]], &[], &[0], 1),
            Err(LayeredError::TargetNotDecoded(0))
        );
        let obs = [Observation::new(vec![re(1.0)], 0.0)];
        assert!(matches!(
            stage_information(&obs, &[vec![0]], &[], 0),
            Err(LayeredError::NonPositiveNoise { .. })
        ));
    }
}
