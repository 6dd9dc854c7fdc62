//! Quantize-and-forward of overheard interference through common symbols.
//!
//! The transmitter rebuilds noise-free received signals from delayed CSIT,
//! quantizes them and ships the bits on common symbols. In analytic mode a
//! quantized value becomes a side observation whose noise is the grid's
//! error power; in bit-level mode symbols are drawn, the bits are really
//! produced (and XORed) and the measured error is used instead.

use crate::channel::{norm_sqr, C64, ZERO};
use crate::rng::{Domain, TrialKey};

use super::block::{Block, User};
use super::layered::Observation;
use super::quantize::{
    demap_symbols, dequantize, map_to_symbols, quantize, xor_bits, QuantizerGrid,
};
use super::{Fidelity, SchemeError, SchemeOutcome, SideInfoReport, TrialContext};

/// Channel gains below this on an antenna-1-only use flag the draw.
pub const NEAR_SINGULAR_GAIN: f64 = 1e-6;

/// Unit-modulus symbols for bit-level runs; `offset` separates blocks.
pub fn draw_symbols(key: &TrialKey, offset: u64, n: usize) -> Vec<C64> {
    let mut stream = key.stream(Domain::Symbols, offset << 10);
    (0..n).map(|_| stream.unit_phase()).collect()
}

#[derive(Debug, Clone)]
pub enum SideInfo {
    /// User 2's signals at `for_user1` and user 1's signals at `for_user2`
    /// are quantized to `bits` bits each and XORed. Each user strips the
    /// part it observed itself.
    Xor {
        for_user1: Vec<usize>,
        for_user2: Vec<usize>,
        bits: usize,
    },
    /// User 2's signal at `z_use` plus user 1's signal at `y_use`, quantized
    /// as one value and delivered to both.
    Sum {
        z_use: usize,
        y_use: usize,
        bits: usize,
    },
}

#[derive(Debug, Clone)]
pub struct SidePlan {
    pub info: SideInfo,
    /// Symbols carrying the bits.
    pub common: Vec<usize>,
    pub common_layer: usize,
    /// Uses that transmit from antenna 1 only.
    pub antenna_one_uses: Vec<usize>,
    /// Separates the symbol draws of consecutive blocks.
    pub symbol_offset: u64,
}

fn nominal_powers(rows: &[Vec<C64>]) -> Vec<f64> {
    rows.iter()
        .map(|r| r.iter().map(|c| c.norm_sqr()).sum())
        .collect()
}

fn apply(row: &[C64], values: &[C64]) -> C64 {
    row.iter().zip(values).map(|(c, s)| c * s).sum()
}

fn sum_rows(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn mean_error(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        / a.len().max(1) as f64
}

fn count_differences(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

/// A quantized vector: coefficient rows and, per row, the side-row noise.
struct Vector {
    rows: Vec<Vec<C64>>,
    noise: Vec<f64>,
}

fn add_side_rows(block: &mut Block, user: User, v: &Vector, gate: usize) {
    for (row, &noise) in v.rows.iter().zip(&v.noise) {
        block.side_row(user, Observation::new(row.clone(), noise).gated(gate));
    }
}

/// Received noise sample of `user` at use `t`, zero when noiseless.
fn receiver_noise(block: &Block, user: User, t: usize, noiseless: bool) -> C64 {
    if noiseless {
        return ZERO;
    }
    let ch = &block.uses[t].channel;
    match user {
        User::One => ch.u,
        User::Two => ch.v,
    }
}

/// Side-row noise from a measured error, kept away from zero so a lucky
/// draw does not read as a perfect observation.
fn measured_noise(measured: f64, analytic: &[f64]) -> Vec<f64> {
    analytic
        .iter()
        .map(|&a| measured.max(1e-2 * a).max(f64::MIN_POSITIVE))
        .collect()
}

pub fn run_with_side_info(
    mut block: Block,
    plan: &SidePlan,
    ctx: &TrialContext,
) -> Result<SchemeOutcome, SchemeError> {
    let near_singular = plan.antenna_one_uses.iter().any(|&t| {
        let ch = &block.uses[t].channel;
        ch.h[0].norm_sqr() < NEAR_SINGULAR_GAIN || ch.g[0].norm_sqr() < NEAR_SINGULAR_GAIN
    });
    let gate = plan.common_layer;
    let mut report = SideInfoReport {
        near_singular,
        recovered: [true, true],
        ..Default::default()
    };

    let mut values = vec![ZERO; block.symbols.len()];
    if ctx.fidelity == Fidelity::BitLevel {
        values = draw_symbols(&ctx.key, plan.symbol_offset, block.symbols.len());
        for &c in &plan.common {
            values[c] = ZERO;
        }
    }
    let bit_level = ctx.fidelity == Fidelity::BitLevel;

    match &plan.info {
        SideInfo::Xor {
            for_user1,
            for_user2,
            bits,
        } => {
            let z_rows: Vec<Vec<C64>> = for_user1
                .iter()
                .map(|&t| block.received_row(User::Two, t))
                .collect();
            let y_rows: Vec<Vec<C64>> = for_user2
                .iter()
                .map(|&t| block.received_row(User::One, t))
                .collect();
            let z_grid = QuantizerGrid::new(&nominal_powers(&z_rows), *bits)?;
            let y_grid = QuantizerGrid::new(&nominal_powers(&y_rows), *bits)?;
            let z_analytic = z_grid.error_powers();
            let y_analytic = y_grid.error_powers();
            report.values = z_rows.len() + y_rows.len();
            report.bits = 2 * bits;
            report.analytic_error_power = (z_analytic.iter().sum::<f64>()
                + y_analytic.iter().sum::<f64>())
                / report.values as f64;

            let (z_noise, y_noise) = if bit_level {
                let lz: Vec<C64> = z_rows.iter().map(|r| apply(r, &values)).collect();
                let ly: Vec<C64> = y_rows.iter().map(|r| apply(r, &values)).collect();
                let qz = quantize(&lz, &nominal_powers(&z_rows), *bits)?;
                let qy = quantize(&ly, &nominal_powers(&y_rows), *bits)?;
                let w = xor_bits(&qz.bits, &qy.bits)?;
                let points = map_to_symbols(&w, plan.common.len());
                for (&c, p) in plan.common.iter().zip(&points) {
                    values[c] = *p;
                }
                // common layer decoded: both users hold w
                let w_rx = demap_symbols(&points, w.len());

                // user 1 re-quantizes its own view of Ly, user 2 its view of Lz
                let y_seen: Vec<C64> = for_user2
                    .iter()
                    .zip(&ly)
                    .map(|(&t, l)| l + receiver_noise(&block, User::One, t, ctx.noiseless))
                    .collect();
                let z_seen: Vec<C64> = for_user1
                    .iter()
                    .zip(&lz)
                    .map(|(&t, l)| l + receiver_noise(&block, User::Two, t, ctx.noiseless))
                    .collect();
                let own_y = quantize(&y_seen, &nominal_powers(&y_rows), *bits)?;
                let own_z = quantize(&z_seen, &nominal_powers(&z_rows), *bits)?;
                let z_at_user1 = xor_bits(&w_rx, &own_y.bits)?;
                let y_at_user2 = xor_bits(&w_rx, &own_z.bits)?;
                let e1 = count_differences(&z_at_user1, &qz.bits);
                let e2 = count_differences(&y_at_user2, &qy.bits);
                report.recovered = [e1 == 0, e2 == 0];
                report.bit_errors = e1 + e2;
                report.saturated = qz.saturated + qy.saturated;

                let ez = mean_error(&lz, &dequantize(&qz.bits, &z_grid)?);
                let ey = mean_error(&ly, &dequantize(&qy.bits, &y_grid)?);
                report.error_power =
                    (ez * lz.len() as f64 + ey * ly.len() as f64) / report.values as f64;
                (
                    measured_noise(ez, &z_analytic),
                    measured_noise(ey, &y_analytic),
                )
            } else {
                report.error_power = report.analytic_error_power;
                (z_analytic, y_analytic)
            };
            add_side_rows(
                &mut block,
                User::One,
                &Vector {
                    rows: z_rows,
                    noise: z_noise,
                },
                gate,
            );
            add_side_rows(
                &mut block,
                User::Two,
                &Vector {
                    rows: y_rows,
                    noise: y_noise,
                },
                gate,
            );
        }
        SideInfo::Sum { z_use, y_use, bits } => {
            let row = sum_rows(
                &block.received_row(User::Two, *z_use),
                &block.received_row(User::One, *y_use),
            );
            let rows = vec![row];
            let power = nominal_powers(&rows);
            let grid = QuantizerGrid::new(&power, *bits)?;
            let analytic = grid.error_powers();
            report.values = 1;
            report.bits = *bits;
            report.analytic_error_power = analytic[0];

            let noise = if bit_level {
                let iota = [apply(&rows[0], &values)];
                let q = quantize(&iota, &power, *bits)?;
                let points = map_to_symbols(&q.bits, plan.common.len());
                for (&c, p) in plan.common.iter().zip(&points) {
                    values[c] = *p;
                }
                let w_rx = demap_symbols(&points, q.bits.len());
                let errors = count_differences(&w_rx, &q.bits);
                report.recovered = [errors == 0, errors == 0];
                report.bit_errors = 2 * errors;
                report.saturated = q.saturated;
                let e = mean_error(&iota, &dequantize(&w_rx, &grid)?);
                report.error_power = e;
                measured_noise(e, &analytic)
            } else {
                report.error_power = analytic[0];
                analytic
            };
            let v = Vector { rows, noise };
            add_side_rows(&mut block, User::One, &v, gate);
            add_side_rows(&mut block, User::Two, &v, gate);
        }
    }

    let mut out = block.evaluate()?;
    if bit_level {
        out.peak_power = Some(
            (0..block.len())
                .map(|t| norm_sqr(&block.transmit(t, &values)))
                .fold(0.0, f64::max),
        );
    }
    out.side_info = Some(report);
    Ok(out)
}
