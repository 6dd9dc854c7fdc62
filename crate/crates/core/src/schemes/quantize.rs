//! Side-information quantizer, bitwise XOR and the common-symbol mapping.
//!
//! Bits are shared evenly across the complex values (earlier values take the
//! remainder). Within a value the real and imaginary parts are quantized
//! uniformly over `+-4 sigma` with level counts `L_re >= L_im` chosen so that
//! `L_re * L_im <= 2^bits`; the pair index `k_re * L_im + k_im` is written
//! most-significant bit first. Level counts are not restricted to powers of
//! two, which keeps the error power a smooth function of the budget.

use thiserror::Error;

use crate::channel::C64;

/// Half-width of the quantizer range in per-dimension standard deviations.
pub const RANGE_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantizeError {
    #[error("{bits} bits cannot cover {values} complex values (need at least 2 per value)")]
    BudgetTooSmall { bits: usize, values: usize },
    #[error("bit vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("nominal power list has {0} entries for {1} values")]
    PowerCount(usize, usize),
    #[error("{bits} bits per value exceed the supported 62")]
    TooManyBits { bits: usize },
}

/// Uniform grid on one real dimension: levels `(k - L/2) * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimGrid {
    pub levels: u64,
    pub step: f64,
}

impl DimGrid {
    fn new(levels: u64, half_range: f64) -> Self {
        Self {
            levels,
            step: 2.0 * half_range / levels as f64,
        }
    }

    fn center(&self) -> i64 {
        (self.levels / 2) as i64
    }

    /// Index of the nearest level and whether `x` fell outside the grid.
    fn index(&self, x: f64) -> (u64, bool) {
        if self.step == 0.0 {
            return (self.center() as u64, x != 0.0);
        }
        let raw = (x / self.step).round() as i64 + self.center();
        let clamped = raw.clamp(0, self.levels as i64 - 1);
        let saturated =
            raw != clamped || (x / self.step - (raw - self.center()) as f64).abs() > 0.5 + 1e-12;
        (clamped as u64, saturated)
    }

    fn level(&self, k: u64) -> f64 {
        (k.min(self.levels - 1) as i64 - self.center()) as f64 * self.step
    }

    /// Mean squared error of a uniform error over one cell.
    pub fn cell_error_power(&self) -> f64 {
        self.step * self.step / 12.0
    }
}

/// Grid for one complex value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueGrid {
    pub bits: usize,
    pub re: DimGrid,
    pub im: DimGrid,
}

impl ValueGrid {
    /// Analytic error power `(step_re^2 + step_im^2) / 12`.
    pub fn error_power(&self) -> f64 {
        self.re.cell_error_power() + self.im.cell_error_power()
    }
}

/// Grid description for a whole vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerGrid {
    pub values: Vec<ValueGrid>,
}

impl QuantizerGrid {
    /// Splits `total_bits` over values with the given nominal powers.
    pub fn new(nominal_powers: &[f64], total_bits: usize) -> Result<Self, QuantizeError> {
        let n = nominal_powers.len();
        if n == 0 || total_bits < 2 * n {
            return Err(QuantizeError::BudgetTooSmall {
                bits: total_bits,
                values: n,
            });
        }
        let base = total_bits / n;
        let extra = total_bits % n;
        let mut values = Vec::with_capacity(n);
        for (i, &p) in nominal_powers.iter().enumerate() {
            let bits = base + usize::from(i < extra);
            if bits > 62 {
                return Err(QuantizeError::TooManyBits { bits });
            }
            let (l_re, l_im) = level_split(bits);
            let half_range = RANGE_SIGMAS * (p.max(0.0) / 2.0).sqrt();
            values.push(ValueGrid {
                bits,
                re: DimGrid::new(l_re, half_range),
                im: DimGrid::new(l_im, half_range),
            });
        }
        Ok(Self { values })
    }

    pub fn total_bits(&self) -> usize {
        self.values.iter().map(|v| v.bits).sum()
    }

    /// Analytic error power of every value.
    pub fn error_powers(&self) -> Vec<f64> {
        self.values.iter().map(ValueGrid::error_power).collect()
    }
}

/// `(L_re, L_im)` with `L_im = floor(sqrt(2^bits))`, `L_re = floor(2^bits / L_im)`.
fn level_split(bits: usize) -> (u64, u64) {
    let total = 1u64 << bits;
    let mut l_im = (total as f64).sqrt() as u64;
    while l_im * l_im > total {
        l_im -= 1;
    }
    while (l_im + 1) * (l_im + 1) <= total {
        l_im += 1;
    }
    (total / l_im, l_im)
}

/// Quantized side information: the bits, the grid and the reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedSideInfo {
    pub bits: Vec<bool>,
    pub grid: QuantizerGrid,
    pub reconstruction: Vec<C64>,
    /// Number of real components that fell outside the grid.
    pub saturated: usize,
}

pub fn quantize(
    values: &[C64],
    nominal_powers: &[f64],
    total_bits: usize,
) -> Result<QuantizedSideInfo, QuantizeError> {
    if nominal_powers.len() != values.len() {
        return Err(QuantizeError::PowerCount(
            nominal_powers.len(),
            values.len(),
        ));
    }
    let grid = QuantizerGrid::new(nominal_powers, total_bits)?;
    let mut bits = Vec::with_capacity(total_bits);
    let mut reconstruction = Vec::with_capacity(values.len());
    let mut saturated = 0;
    for (x, g) in values.iter().zip(&grid.values) {
        let (k_re, s_re) = g.re.index(x.re);
        let (k_im, s_im) = g.im.index(x.im);
        saturated += usize::from(s_re) + usize::from(s_im);
        push_bits(&mut bits, k_re * g.im.levels + k_im, g.bits);
        reconstruction.push(C64::new(g.re.level(k_re), g.im.level(k_im)));
    }
    Ok(QuantizedSideInfo {
        bits,
        grid,
        reconstruction,
        saturated,
    })
}

/// Reconstruction from bits and a grid. Indices beyond the grid (possible
/// only for corrupted bits) are clamped to the outermost level.
pub fn dequantize(bits: &[bool], grid: &QuantizerGrid) -> Result<Vec<C64>, QuantizeError> {
    if bits.len() != grid.total_bits() {
        return Err(QuantizeError::LengthMismatch(bits.len(), grid.total_bits()));
    }
    let mut out = Vec::with_capacity(grid.values.len());
    let mut pos = 0;
    for g in &grid.values {
        let index = read_bits(&bits[pos..pos + g.bits]);
        pos += g.bits;
        let k_re = index / g.im.levels;
        let k_im = index % g.im.levels;
        out.push(C64::new(g.re.level(k_re), g.im.level(k_im)));
    }
    Ok(out)
}

pub fn xor_bits(a: &[bool], b: &[bool]) -> Result<Vec<bool>, QuantizeError> {
    if a.len() != b.len() {
        return Err(QuantizeError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
}

fn push_bits(out: &mut Vec<bool>, value: u64, width: usize) {
    for i in (0..width).rev() {
        out.push((value >> i) & 1 == 1);
    }
}

fn read_bits(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
}

/// Splits `bits` into `symbols` chunks (earlier chunks take the remainder)
/// and maps each chunk onto a peak-normalized rectangular QAM point.
pub fn map_to_symbols(bits: &[bool], symbols: usize) -> Vec<C64> {
    chunk_sizes(bits.len(), symbols)
        .scan(0, |pos, len| {
            let chunk = &bits[*pos..*pos + len];
            *pos += len;
            Some(chunk_to_point(chunk))
        })
        .collect()
}

/// Inverse of [`map_to_symbols`] for noiseless points.
pub fn demap_symbols(points: &[C64], total_bits: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(total_bits);
    for (p, len) in points.iter().zip(chunk_sizes(total_bits, points.len())) {
        let (l_re, l_im) = qam_shape(len);
        let index = axis_index(p.re, l_re) * l_im + axis_index(p.im, l_im);
        push_bits(&mut out, index, len);
    }
    out
}

fn chunk_sizes(total: usize, parts: usize) -> impl Iterator<Item = usize> {
    let base = if parts == 0 { 0 } else { total / parts };
    let extra = if parts == 0 { 0 } else { total % parts };
    (0..parts).map(move |i| base + usize::from(i < extra))
}

/// Rectangular `2^ceil(len/2) x 2^floor(len/2)` constellation.
fn qam_shape(len: usize) -> (u64, u64) {
    (1u64 << len.div_ceil(2), 1u64 << (len / 2))
}

fn chunk_to_point(chunk: &[bool]) -> C64 {
    let (l_re, l_im) = qam_shape(chunk.len());
    let index = read_bits(chunk);
    C64::new(
        axis_point(index / l_im, l_re),
        axis_point(index % l_im, l_im),
    ) / std::f64::consts::SQRT_2
}

fn axis_point(k: u64, levels: u64) -> f64 {
    if levels <= 1 {
        return 0.0;
    }
    -1.0 + 2.0 * k as f64 / (levels - 1) as f64
}

fn axis_index(x: f64, levels: u64) -> u64 {
    if levels <= 1 {
        return 0;
    }
    let k = ((x * std::f64::consts::SQRT_2 + 1.0) * (levels - 1) as f64 / 2.0).round();
    k.clamp(0.0, (levels - 1) as f64) as u64
}
