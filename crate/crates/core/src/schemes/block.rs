//! Linear description of one scheme block and its evaluation.
//!
//! Every transmission is `x_t = kappa_t * sum_q w_{t,q} s_q` over unit-power
//! symbols `s_q`. The per-use factor `kappa_t` keeps `|x_t|^2 <= 1` for any
//! symbols with `|s_q| <= 1` (and `E|x_t|^2 <= 1` for unit-power ones).

use crate::channel::{dot, norm_sqr, ChannelRealization, SnrPoint, Vec2, C64, ZERO};
use crate::linalg::sigma_max_2xk;
use crate::state::TopologyState;

use super::layered::{decode_stages, Observation};
use super::{LayerReport, SchemeError, SchemeOutcome};

/// Who a symbol or layer is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    User1,
    User2,
    Common,
}

impl Role {
    pub fn swapped(self) -> Role {
        match self {
            Role::User1 => Role::User2,
            Role::User2 => Role::User1,
            Role::Common => Role::Common,
        }
    }
}

/// A receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum User {
    One,
    Two,
}

impl User {
    pub fn index(self) -> usize {
        match self {
            User::One => 0,
            User::Two => 1,
        }
    }

    pub fn role(self) -> Role {
        match self {
            User::One => Role::User1,
            User::Two => Role::User2,
        }
    }
}

/// Design metadata of one symbol: average power `rho^power_exponent` and
/// `prelog * log rho` carried bits. The evaluation never reads `prelog`; it
/// is what the measured information is checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec {
    pub label: String,
    pub role: Role,
    pub power_exponent: f64,
    pub prelog: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerDef {
    pub label: String,
    pub role: Role,
    pub symbols: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelUse {
    pub topology: TopologyState,
    pub channel: ChannelRealization,
    /// One beam per symbol (zero when the symbol is not sent).
    pub weights: Vec<Vec2>,
    pub kappa: f64,
}

/// Symbols, channel uses, side observations and decoding plans.
#[derive(Debug, Clone)]
pub struct Block {
    pub alpha: f64,
    pub snr: SnrPoint,
    pub symbols: Vec<SymbolSpec>,
    pub uses: Vec<ChannelUse>,
    pub layers: Vec<LayerDef>,
    pub side_rows: [Vec<Observation>; 2],
    pub plans: [Vec<usize>; 2],
}

pub struct BlockBuilder {
    alpha: f64,
    snr: SnrPoint,
    symbols: Vec<SymbolSpec>,
    uses: Vec<(TopologyState, ChannelRealization, Vec<(usize, Vec2)>)>,
}

impl BlockBuilder {
    pub fn new(alpha: f64, snr: SnrPoint) -> Self {
        Self {
            alpha,
            snr,
            symbols: Vec::new(),
            uses: Vec::new(),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn snr(&self) -> SnrPoint {
        self.snr
    }

    pub fn symbol(
        &mut self,
        label: impl Into<String>,
        role: Role,
        power_exponent: f64,
        prelog: f64,
    ) -> usize {
        self.symbols.push(SymbolSpec {
            label: label.into(),
            role,
            power_exponent,
            prelog,
        });
        self.symbols.len() - 1
    }

    pub fn channel_use(&mut self, topology: TopologyState, channel: ChannelRealization) -> usize {
        self.uses.push((topology, channel, Vec::new()));
        self.uses.len() - 1
    }

    pub fn channel(&self, t: usize) -> &ChannelRealization {
        &self.uses[t].1
    }

    /// Sends symbol `q` along `beam` at its designed power.
    pub fn send(&mut self, t: usize, q: usize, beam: Vec2) {
        let amp = self.snr.amplitude(self.symbols[q].power_exponent);
        self.uses[t].2.push((q, [beam[0] * amp, beam[1] * amp]));
    }

    /// Sends the linear combination `sum_j c_j s_j` along `beam`.
    pub fn send_combination(&mut self, t: usize, combo: &[(usize, C64)], beam: Vec2) {
        for &(q, c) in combo {
            self.uses[t].2.push((q, [beam[0] * c, beam[1] * c]));
        }
    }

    pub fn finish(self) -> Block {
        let k = self.symbols.len();
        let uses = self
            .uses
            .into_iter()
            .map(|(topology, channel, sends)| {
                let mut weights = vec![[ZERO, ZERO]; k];
                for (q, w) in sends {
                    weights[q][0] += w[0];
                    weights[q][1] += w[1];
                }
                let kappa = normalization(&weights);
                ChannelUse {
                    topology,
                    channel,
                    weights,
                    kappa,
                }
            })
            .collect();
        Block {
            alpha: self.alpha,
            snr: self.snr,
            symbols: self.symbols,
            uses,
            layers: Vec::new(),
            side_rows: [Vec::new(), Vec::new()],
            plans: [Vec::new(), Vec::new()],
        }
    }
}

/// `1 / max(1, min(sum |w_q|, sqrt(L) sigma_max(W)))` over the active beams.
fn normalization(weights: &[Vec2]) -> f64 {
    let active: Vec<Vec2> = weights
        .iter()
        .copied()
        .filter(|w| norm_sqr(w) > 0.0)
        .collect();
    if active.is_empty() {
        return 1.0;
    }
    let l1: f64 = active.iter().map(|w| norm_sqr(w).sqrt()).sum();
    let spectral = (active.len() as f64).sqrt() * sigma_max_2xk(&active);
    1.0 / l1.min(spectral).max(1.0)
}

impl Block {
    pub fn len(&self) -> usize {
        self.uses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uses.is_empty()
    }

    pub fn layer(&mut self, label: impl Into<String>, role: Role, symbols: &[usize]) -> usize {
        self.layers.push(LayerDef {
            label: label.into(),
            role,
            symbols: symbols.to_vec(),
        });
        self.layers.len() - 1
    }

    pub fn plan(&mut self, user: User, order: &[usize]) {
        self.plans[user.index()] = order.to_vec();
    }

    pub fn side_row(&mut self, user: User, row: Observation) {
        self.side_rows[user.index()].push(row);
    }

    /// The same block seen with the receivers' labels interchanged: channels,
    /// topologies, roles, plans and side rows all swap.
    pub fn swap_users(mut self) -> Block {
        for u in &mut self.uses {
            u.channel = u.channel.swapped();
            u.topology = u.topology.swapped();
        }
        for s in &mut self.symbols {
            s.role = s.role.swapped();
        }
        for l in &mut self.layers {
            l.role = l.role.swapped();
        }
        self.plans.swap(0, 1);
        self.side_rows.swap(0, 1);
        self
    }

    /// Effective beam of symbol `q` at use `t`, including `kappa`.
    pub fn beam(&self, t: usize, q: usize) -> Vec2 {
        let u = &self.uses[t];
        [u.weights[q][0] * u.kappa, u.weights[q][1] * u.kappa]
    }

    /// Noise-free coefficients of `user`'s received signal at use `t`.
    pub fn received_row(&self, user: User, t: usize) -> Vec<C64> {
        let u = &self.uses[t];
        let (a1, a2) = u.topology.exponents(self.alpha);
        let (c, gain) = match user {
            User::One => (&u.channel.h, self.snr.amplitude(a1)),
            User::Two => (&u.channel.g, self.snr.amplitude(a2)),
        };
        (0..self.symbols.len())
            .map(|q| dot(c, &self.beam(t, q)) * gain)
            .collect()
    }

    /// Transmit vector at use `t` for concrete symbol values.
    pub fn transmit(&self, t: usize, values: &[C64]) -> Vec2 {
        let mut x = [ZERO, ZERO];
        for (q, s) in values.iter().enumerate() {
            let b = self.beam(t, q);
            x[0] += b[0] * s;
            x[1] += b[1] * s;
        }
        x
    }

    /// Own received rows (unit noise) followed by the user's side rows.
    pub fn observations(&self, user: User) -> Vec<Observation> {
        let mut rows: Vec<Observation> = (0..self.len())
            .map(|t| Observation::new(self.received_row(user, t), 1.0))
            .collect();
        rows.extend(self.side_rows[user.index()].iter().cloned());
        rows
    }

    /// Runs both decoding plans. A layer's rate is the smallest information
    /// any decoder that must decode it collects; a user's rate sums its own
    /// layers over the block length.
    pub fn evaluate(&self) -> Result<SchemeOutcome, SchemeError> {
        let layer_symbols: Vec<Vec<usize>> =
            self.layers.iter().map(|l| l.symbols.clone()).collect();
        let mut info: Vec<[Option<f64>; 2]> = vec![[None, None]; self.layers.len()];
        for user in [User::One, User::Two] {
            let obs = self.observations(user);
            for (layer, mi) in decode_stages(&obs, &layer_symbols, &self.plans[user.index()])? {
                info[layer][user.index()] = Some(mi);
            }
        }
        let n = self.len() as f64;
        let mut rates = [0.0; 2];
        let mut reports = Vec::with_capacity(self.layers.len());
        for (def, mi) in self.layers.iter().zip(&info) {
            let bits = mi.iter().flatten().copied().fold(f64::INFINITY, f64::min);
            let bits = if bits.is_finite() { bits } else { 0.0 };
            match def.role {
                Role::User1 => rates[0] += bits,
                Role::User2 => rates[1] += bits,
                Role::Common => {}
            }
            reports.push(LayerReport {
                label: def.label.clone(),
                role: def.role,
                prelog: def.symbols.iter().map(|&q| self.symbols[q].prelog).sum(),
                bits,
                information: *mi,
            });
        }
        Ok(SchemeOutcome {
            rate_user1: rates[0] / n,
            rate_user2: rates[1] / n,
            block_length: self.len(),
            layers: reports,
            side_info: None,
            peak_power: None,
        })
    }
}
