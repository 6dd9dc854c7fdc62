//! Delayed-CSIT schemes: the classical three-slot retransmission, the
//! three-phase fixed-topology scheme and the alternating-topology scheme
//! with a single forwarded side-information value.

use crate::bounds::PolicyId;
use crate::channel::{realization_at, SnrPoint, Vec2, ONE, ZERO};
use crate::rng::TrialKey;
use crate::state::{Alpha, StateDistribution, TopologyState};

use super::sideinfo::{run_with_side_info, SideInfo, SidePlan};
use super::{
    dist_of, run_blocks, Block, BlockBuilder, Role, Scheme, SchemeError, SchemeOutcome,
    TrialContext, User,
};

const E1: Vec2 = [ONE, ZERO];
const E2: Vec2 = [ZERO, ONE];

const SW: TopologyState = TopologyState::STRONG_WEAK;
const WS: TopologyState = TopologyState::WEAK_STRONG;

/// Longest block the three-phase scheme will build.
pub const MAX_PHASE_BLOCK: usize = 64;

/// Sends `[s1; s2]` from both antennas.
fn send_pair(b: &mut BlockBuilder, t: usize, s1: usize, s2: usize) {
    b.send(t, s1, E1);
    b.send(t, s2, E2);
}

/// Bits for forwarding `prelog * log2(rho)`: the ceiling, never less than
/// two bits per quantized value.
pub fn side_info_budget(prelog: f64, snr: SnrPoint, values: usize) -> usize {
    ((prelog * snr.log2_rho() - 1e-9).ceil().max(0.0) as usize).max(2 * values)
}

/// Three slots with delayed CSIT on a fixed topology: each user's symbols,
/// then the sum of the two overheard signals from antenna 1.
pub fn mat_block(
    alpha: f64,
    snr: SnrPoint,
    key: &TrialKey,
    first_use: u64,
    topology: TopologyState,
) -> Block {
    let (e1, e2) = topology.exponents(alpha);
    let mut b = BlockBuilder::new(alpha, snr);
    let a1 = b.symbol("a1", Role::User1, 0.0, e1);
    let a2 = b.symbol("a2", Role::User1, 0.0, e1);
    let b1 = b.symbol("b1", Role::User2, 0.0, e2);
    let b2 = b.symbol("b2", Role::User2, 0.0, e2);
    let ch1 = realization_at(key, first_use);
    let ch2 = realization_at(key, first_use + 1);
    let t1 = b.channel_use(topology, ch1);
    let t2 = b.channel_use(topology, ch2);
    let t3 = b.channel_use(topology, realization_at(key, first_use + 2));
    send_pair(&mut b, t1, a1, a2);
    send_pair(&mut b, t2, b1, b2);
    b.send_combination(
        t3,
        &[
            (a1, ch1.g[0]),
            (a2, ch1.g[1]),
            (b1, ch2.h[0]),
            (b2, ch2.h[1]),
        ],
        E1,
    );
    let mut block = b.finish();
    let la = block.layer("a", Role::User1, &[a1, a2]);
    let lb = block.layer("b", Role::User2, &[b1, b2]);
    block.plan(User::One, &[la]);
    block.plan(User::Two, &[lb]);
    block
}

/// Three-slot retransmission on `(DD, SW)`.
pub struct Mat;

impl Scheme for Mat {
    fn name(&self) -> &str {
        "mat"
    }

    fn description(&self) -> &str {
        "three-slot delayed-CSIT retransmission on (DD,SW)"
    }

    fn policy(&self) -> PolicyId {
        PolicyId::MatFixed
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        dist_of(alpha, &[("DD", "SW", 1, 1)])
    }

    fn block_length(&self, _alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(3)
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        run_blocks(
            &[mat_block(ctx.alpha.value(), ctx.snr, &ctx.key, 0, SW)],
            ctx,
        )
    }
}

/// The retransmission scheme once on `SS` and once on `WW`.
pub struct MatNonDiverse;

impl Scheme for MatNonDiverse {
    fn name(&self) -> &str {
        "mat-nd"
    }

    fn description(&self) -> &str {
        "three-slot retransmission on (DD,SS) and on (DD,WW)"
    }

    fn policy(&self) -> PolicyId {
        PolicyId::DdNonDiverse
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        dist_of(alpha, &[("DD", "SS", 1, 2), ("DD", "WW", 1, 2)])
    }

    fn block_length(&self, _alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(6)
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        let a = ctx.alpha.value();
        let blocks = [
            mat_block(a, ctx.snr, &ctx.key, 0, TopologyState::STRONG_STRONG),
            mat_block(a, ctx.snr, &ctx.key, 3, TopologyState::WEAK_WEAK),
        ];
        run_blocks(&blocks, ctx)
    }
}

/// Phase lengths `(T1, T2, T3)` for `alpha = p / q`: `(q m, p m, q m)`.
pub fn phase_lengths(alpha: Alpha, scale: usize) -> Result<(usize, usize, usize), SchemeError> {
    let (p, q) = (alpha.numer(), alpha.denom());
    if p < 0 || p > q || scale == 0 {
        return Err(SchemeError::NonIntegerPhases {
            alpha: format!("{p}/{q}"),
        });
    }
    let t1 = q as usize * scale;
    let t2 = p as usize * scale;
    if 2 * t1 + t2 > MAX_PHASE_BLOCK {
        return Err(SchemeError::NonIntegerPhases {
            alpha: format!(
                "{p}/{q} (block of {} uses exceeds {MAX_PHASE_BLOCK})",
                2 * t1 + t2
            ),
        });
    }
    Ok((t1, t2, t1))
}

/// Three phases on `(DD, SW)`: user 1's symbols for `T1` uses, user 2's for
/// `T2`, then `T3` uses of common symbols (the XOR of both quantized
/// overheard vectors) with a weak private layer for user 1 underneath.
#[derive(Debug, Clone, Copy)]
pub struct Tsm3 {
    pub scale: usize,
}

impl Default for Tsm3 {
    fn default() -> Self {
        Self { scale: 1 }
    }
}

impl Tsm3 {
    /// Block without side rows plus the side-information plan (absent when
    /// `T2 = 0`).
    pub fn build(&self, ctx: &TrialContext) -> Result<(Block, Option<SidePlan>), SchemeError> {
        let (t1, t2, t3) = phase_lengths(ctx.alpha, self.scale)?;
        let alpha = ctx.alpha.value();
        let forward = t2 > 0;
        let mut b = BlockBuilder::new(alpha, ctx.snr);
        let mut a12 = Vec::new();
        let mut bs = Vec::new();
        let mut a3 = Vec::new();
        let mut cs = Vec::new();
        let mut use_index = 0u64;
        let mut next_use = |b: &mut BlockBuilder| {
            let t = b.channel_use(SW, realization_at(&ctx.key, use_index));
            use_index += 1;
            t
        };
        let mut phase1 = Vec::new();
        for k in 0..t1 {
            let t = next_use(&mut b);
            let s1 = b.symbol(format!("a{k}.1"), Role::User1, 0.0, 1.0);
            let s2 = b.symbol(format!("a{k}.2"), Role::User1, 0.0, alpha);
            send_pair(&mut b, t, s1, s2);
            a12.extend([s1, s2]);
            phase1.push(t);
        }
        let mut phase2 = Vec::new();
        for k in 0..t2 {
            let t = next_use(&mut b);
            let s1 = b.symbol(format!("b{k}.1"), Role::User2, 0.0, 1.0);
            let s2 = b.symbol(format!("b{k}.2"), Role::User2, 0.0, alpha);
            send_pair(&mut b, t, s1, s2);
            bs.extend([s1, s2]);
            phase2.push(t);
        }
        let mut phase3 = Vec::new();
        for k in 0..t3 {
            let t = next_use(&mut b);
            if forward {
                let c = b.symbol(format!("c{k}"), Role::Common, 0.0, alpha);
                b.send(t, c, E1);
                cs.push(c);
            }
            let weak = if forward { -alpha } else { 0.0 };
            let s = b.symbol(
                format!("a{k}.3"),
                Role::User1,
                weak,
                1.0 - if forward { alpha } else { 0.0 },
            );
            b.send(t, s, E1);
            a3.push(s);
            phase3.push(t);
        }
        let mut block = b.finish();
        let la3 = block.layer("a3", Role::User1, &a3);
        let la12 = block.layer("a12", Role::User1, &a12);
        let lb = block.layer("b", Role::User2, &bs);
        if !forward {
            block.plan(User::One, &[la3, la12]);
            block.plan(User::Two, &[lb]);
            return Ok((block, None));
        }
        let lc = block.layer("c", Role::Common, &cs);
        block.plan(User::One, &[lc, la3, la12]);
        block.plan(User::Two, &[lc, lb]);
        let bits = side_info_budget(alpha * t1 as f64, ctx.snr, t1.max(t2));
        let plan = SidePlan {
            info: SideInfo::Xor {
                for_user1: phase1,
                for_user2: phase2,
                bits,
            },
            common: cs,
            common_layer: lc,
            antenna_one_uses: phase3,
            symbol_offset: 0,
        };
        Ok((block, Some(plan)))
    }
}

impl Scheme for Tsm3 {
    fn name(&self) -> &str {
        "tsm3"
    }

    fn description(&self) -> &str {
        "three phases on (DD,SW) with XOR-forwarded quantized side information (rational alpha)"
    }

    fn policy(&self) -> PolicyId {
        PolicyId::Tsm3DdFixedLB
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        dist_of(alpha, &[("DD", "SW", 1, 1)])
    }

    fn block_length(&self, alpha: Alpha) -> Result<usize, SchemeError> {
        let (t1, t2, t3) = phase_lengths(alpha, self.scale)?;
        Ok(t1 + t2 + t3)
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        match self.build(ctx)? {
            (block, Some(plan)) => run_with_side_info(block, &plan, ctx),
            (block, None) => run_blocks(&[block], ctx),
        }
    }
}

/// Which three-use pattern the alternating delayed-CSIT scheme runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tsm4Variant {
    /// `SW, WS, SW`: the third use carries a weak layer for user 1.
    Alternating,
    /// `SW, WS, WS`: the third use carries a weak layer for user 2.
    Reversed,
    /// Both patterns back to back, covering the even split.
    Mixed,
}

/// Delayed CSIT on alternating topologies: one quantized value, the sum of
/// both weak overheard signals, is forwarded on a common symbol.
#[derive(Debug, Clone, Copy)]
pub struct Tsm4 {
    variant: Tsm4Variant,
}

impl Tsm4 {
    pub fn new(variant: Tsm4Variant) -> Self {
        Self { variant }
    }

    pub fn variant(&self) -> Tsm4Variant {
        self.variant
    }

    /// One three-use block; `reversed` selects the `WS` third use.
    pub fn build(ctx: &TrialContext, first_use: u64, reversed: bool) -> (Block, SidePlan) {
        let alpha = ctx.alpha.value();
        let ch = |i: u64| realization_at(&ctx.key, first_use + i);
        let mut b = BlockBuilder::new(alpha, ctx.snr);
        let a1 = b.symbol("a1", Role::User1, 0.0, 1.0);
        let a2 = b.symbol("a2", Role::User1, 0.0, alpha);
        let b1 = b.symbol("b1", Role::User2, 0.0, 1.0);
        let b2 = b.symbol("b2", Role::User2, 0.0, alpha);
        let c = b.symbol("c", Role::Common, 0.0, alpha);
        let owner = if reversed { Role::User2 } else { Role::User1 };
        let weak = b.symbol(
            if reversed { "b3" } else { "a3" },
            owner,
            -alpha,
            1.0 - alpha,
        );
        let t1 = b.channel_use(SW, ch(0));
        let t2 = b.channel_use(WS, ch(1));
        let t3 = b.channel_use(if reversed { WS } else { SW }, ch(2));
        send_pair(&mut b, t1, a1, a2);
        send_pair(&mut b, t2, b1, b2);
        b.send(t3, c, E1);
        b.send(t3, weak, E1);
        let mut block = b.finish();
        let lc = block.layer("c", Role::Common, &[c]);
        let lw = block.layer(if reversed { "b3" } else { "a3" }, owner, &[weak]);
        let la = block.layer("a12", Role::User1, &[a1, a2]);
        let lb = block.layer("b12", Role::User2, &[b1, b2]);
        if reversed {
            block.plan(User::One, &[lc, la]);
            block.plan(User::Two, &[lc, lw, lb]);
        } else {
            block.plan(User::One, &[lc, lw, la]);
            block.plan(User::Two, &[lc, lb]);
        }
        let plan = SidePlan {
            info: SideInfo::Sum {
                z_use: t1,
                y_use: t2,
                bits: side_info_budget(alpha, ctx.snr, 1),
            },
            common: vec![c],
            common_layer: lc,
            antenna_one_uses: vec![t3],
            symbol_offset: first_use,
        };
        (block, plan)
    }

    fn patterns(&self) -> &'static [bool] {
        match self.variant {
            Tsm4Variant::Alternating => &[false],
            Tsm4Variant::Reversed => &[true],
            Tsm4Variant::Mixed => &[false, true],
        }
    }
}

impl Scheme for Tsm4 {
    fn name(&self) -> &str {
        match self.variant {
            Tsm4Variant::Alternating => "tsm4",
            Tsm4Variant::Reversed => "tsm4r",
            Tsm4Variant::Mixed => "tsm4-mix",
        }
    }

    fn description(&self) -> &str {
        match self.variant {
            Tsm4Variant::Alternating => {
                "(DD,SW),(DD,WS),(DD,SW) with one forwarded side-information value"
            }
            Tsm4Variant::Reversed => {
                "(DD,SW),(DD,WS),(DD,WS): weak private layer for user 2 in the last use"
            }
            Tsm4Variant::Mixed => "both three-use patterns back to back (even SW/WS split)",
        }
    }

    fn policy(&self) -> PolicyId {
        PolicyId::Tsm4DdAlt
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        match self.variant {
            Tsm4Variant::Alternating => dist_of(alpha, &[("DD", "SW", 2, 3), ("DD", "WS", 1, 3)]),
            Tsm4Variant::Reversed => dist_of(alpha, &[("DD", "SW", 1, 3), ("DD", "WS", 2, 3)]),
            Tsm4Variant::Mixed => dist_of(alpha, &[("DD", "SW", 1, 2), ("DD", "WS", 1, 2)]),
        }
    }

    fn block_length(&self, _alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(3 * self.patterns().len())
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        let parts = self
            .patterns()
            .iter()
            .enumerate()
            .map(|(i, &reversed)| {
                let (block, plan) = Self::build(ctx, 3 * i as u64, reversed);
                run_with_side_info(block, &plan, ctx)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SchemeOutcome::concatenate(parts))
    }
}
