//! Two-use schemes that retransmit user 2's overheard interference so user 1
//! gets a second look at its own symbols while user 2 can cancel it.

use crate::bounds::PolicyId;
use crate::channel::{null_steer, realization_at, Vec2, C64, ONE, ZERO};
use crate::state::{Alpha, StateDistribution, TopologyState};

use super::{
    dist_of, run_blocks, Block, BlockBuilder, Role, Scheme, SchemeError, SchemeOutcome,
    TrialContext, User,
};

const E1: Vec2 = [ONE, ZERO];
const E2: Vec2 = [ZERO, ONE];

fn finish_plans(mut block: Block, a: [usize; 2], b: usize) -> Block {
    let la = block.layer("a", Role::User1, &a);
    let lb = block.layer("b", Role::User2, &[b]);
    block.plan(User::One, &[la]);
    block.plan(User::Two, &[lb]);
    block
}

/// `(ND, SW)` then `(PN, SW)`: `[a1; a2]`, then `[g1^T a; 0] + h2_perp b1`.
pub struct Tsm1;

impl Tsm1 {
    pub fn block(ctx: &TrialContext) -> Result<Block, SchemeError> {
        let alpha = ctx.alpha.value();
        let mut b = BlockBuilder::new(alpha, ctx.snr);
        let a1 = b.symbol("a1", Role::User1, 0.0, 1.0);
        let a2 = b.symbol("a2", Role::User1, 0.0, 1.0);
        let b1 = b.symbol("b1", Role::User2, 0.0, alpha);
        let ch1 = realization_at(&ctx.key, 0);
        let ch2 = realization_at(&ctx.key, 1);
        let t1 = b.channel_use(TopologyState::STRONG_WEAK, ch1);
        let t2 = b.channel_use(TopologyState::STRONG_WEAK, ch2);
        b.send(t1, a1, E1);
        b.send(t1, a2, E2);
        b.send_combination(t2, &[(a1, ch1.g[0]), (a2, ch1.g[1])], E1);
        b.send(t2, b1, null_steer(&ch2.h)?);
        Ok(finish_plans(b.finish(), [a1, a2], b1))
    }
}

impl Scheme for Tsm1 {
    fn name(&self) -> &str {
        "tsm1"
    }

    fn description(&self) -> &str {
        "(ND,SW) then (PN,SW): resend user 2's overheard interference, null user 1 for b"
    }

    fn policy(&self) -> PolicyId {
        PolicyId::Tsm1NdPn
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        dist_of(alpha, &[("ND", "SW", 1, 2), ("PN", "SW", 1, 2)])
    }

    fn block_length(&self, _alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(2)
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        run_blocks(&[Self::block(ctx)?], ctx)
    }
}

/// `(PD, SW)` then `(NN, SW)`: `[a1; a2] + h1_perp b1`, then `[g1^T a; 0]`.
pub struct Tsm2;

impl Tsm2 {
    pub fn block(ctx: &TrialContext) -> Result<Block, SchemeError> {
        let alpha = ctx.alpha.value();
        let mut b = BlockBuilder::new(alpha, ctx.snr);
        let a1 = b.symbol("a1", Role::User1, 0.0, 1.0);
        let a2 = b.symbol("a2", Role::User1, 0.0, 1.0);
        let b1 = b.symbol("b1", Role::User2, 0.0, alpha);
        let ch1 = realization_at(&ctx.key, 0);
        let ch2 = realization_at(&ctx.key, 1);
        let t1 = b.channel_use(TopologyState::STRONG_WEAK, ch1);
        let t2 = b.channel_use(TopologyState::STRONG_WEAK, ch2);
        b.send(t1, a1, E1);
        b.send(t1, a2, E2);
        b.send(t1, b1, null_steer(&ch1.h)?);
        let g: [C64; 2] = ch1.g;
        b.send_combination(t2, &[(a1, g[0]), (a2, g[1])], E1);
        Ok(finish_plans(b.finish(), [a1, a2], b1))
    }
}

impl Scheme for Tsm2 {
    fn name(&self) -> &str {
        "tsm2"
    }

    fn description(&self) -> &str {
        "(PD,SW) then (NN,SW): null user 1 for b, then resend user 2's overheard interference"
    }

    fn policy(&self) -> PolicyId {
        PolicyId::Tsm2PdNn
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        dist_of(alpha, &[("PD", "SW", 1, 2), ("NN", "SW", 1, 2)])
    }

    fn block_length(&self, _alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(2)
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        run_blocks(&[Self::block(ctx)?], ctx)
    }
}
