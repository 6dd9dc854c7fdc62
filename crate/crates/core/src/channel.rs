//! Fading model, receive equations and small vector helpers.

use num_complex::Complex64;
use thiserror::Error;

use crate::rng::{Domain, TrialKey, TrialStream};
use crate::state::TopologyState;

pub type C64 = Complex64;
pub type Vec2 = [C64; 2];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Slack allowed on the unit transmit-power constraint.
pub const POWER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("cannot take the orthogonal complement of a zero vector")]
    ZeroVector,
}

/// Linear SNR scale `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    rho: f64,
}

impl SnrPoint {
    /// Panics unless `rho >= 1`.
    pub fn new(rho: f64) -> Self {
        assert!(
            rho >= 1.0 && rho.is_finite(),
            "rho must be a finite value >= 1, got {rho}"
        );
        Self { rho }
    }

    pub fn from_db(db: f64) -> Self {
        Self::new(10f64.powf(db / 10.0))
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn log2_rho(&self) -> f64 {
        self.rho.log2()
    }

    /// `rho^exponent`.
    pub fn pow(&self, exponent: f64) -> f64 {
        self.rho.powf(exponent)
    }

    /// `rho^(exponent / 2)`, the amplitude gain of a link with that exponent.
    pub fn amplitude(&self, exponent: f64) -> f64 {
        self.rho.powf(exponent / 2.0)
    }
}

/// One channel use: user 1 sees `h`, user 2 sees `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec2,
    pub g: Vec2,
    pub u: C64,
    pub v: C64,
}

impl ChannelRealization {
    /// Same draw with the receivers' roles interchanged.
    pub fn swapped(&self) -> Self {
        Self {
            h: self.g,
            g: self.h,
            u: self.v,
            v: self.u,
        }
    }

    pub fn noiseless(&self) -> Self {
        Self {
            u: ZERO,
            v: ZERO,
            ..*self
        }
    }
}

/// Draws `h`, `g`, `u`, `v` (in that order) as i.i.d. CN(0, 1).
pub fn sample_realization(stream: &mut TrialStream) -> ChannelRealization {
    let h = [stream.complex_normal(), stream.complex_normal()];
    let g = [stream.complex_normal(), stream.complex_normal()];
    let u = stream.complex_normal();
    let v = stream.complex_normal();
    ChannelRealization { h, g, u, v }
}

/// The realization of channel use `use_index` in trial `key`.
pub fn realization_at(key: &TrialKey, use_index: u64) -> ChannelRealization {
    sample_realization(&mut key.stream(Domain::Channel, use_index))
}

/// `(y, z) = (rho^(A1/2) h^T x + u, rho^(A2/2) g^T x + v)`.
pub fn receive(
    x: &Vec2,
    ch: &ChannelRealization,
    topo: TopologyState,
    alpha: f64,
    snr: SnrPoint,
) -> (C64, C64) {
    let (a1, a2) = topo.exponents(alpha);
    let y = dot(&ch.h, x) * snr.amplitude(a1) + ch.u;
    let z = dot(&ch.g, x) * snr.amplitude(a2) + ch.v;
    (y, z)
}

/// Bilinear `a^T b` (no conjugation), as in `h^T x`.
pub fn dot(a: &Vec2, b: &Vec2) -> C64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Hermitian `a^H b`.
pub fn inner(a: &Vec2, b: &Vec2) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn norm_sqr(a: &Vec2) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr()
}

pub fn scale(a: &Vec2, s: C64) -> Vec2 {
    [a[0] * s, a[1] * s]
}

pub fn add(a: &Vec2, b: &Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn conj(a: &Vec2) -> Vec2 {
    [a[0].conj(), a[1].conj()]
}

/// Unit vector `(-conj(e2), conj(e1)) / |e|`, Hermitian-orthogonal to `e`.
pub fn orthogonal_complement(e: &Vec2) -> Result<Vec2, ChannelError> {
    let n = norm_sqr(e).sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(ChannelError::ZeroVector);
    }
    Ok([-e[1].conj() / n, e[0].conj() / n])
}

/// Unit beam `w` with `c^T w = 0`: steers a signal away from the receiver
/// whose channel is `c`.
pub fn null_steer(c: &Vec2) -> Result<Vec2, ChannelError> {
    orthogonal_complement(&conj(c))
}

/// Unit matched beam `conj(c) / |c|`, maximizing `|c^T w|`.
pub fn matched_beam(c: &Vec2) -> Result<Vec2, ChannelError> {
    let n = norm_sqr(c).sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(ChannelError::ZeroVector);
    }
    Ok([c[0].conj() / n, c[1].conj() / n])
}
