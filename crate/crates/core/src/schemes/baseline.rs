//! Reference points: zero forcing under perfect CSIT and single-user
//! transmission without CSIT.

use crate::bounds::PolicyId;
use crate::channel::{null_steer, realization_at, ONE, ZERO};
use crate::state::{Alpha, StateDistribution, TopologyState};

use super::{
    dist_of, run_blocks, Block, BlockBuilder, Role, Scheme, SchemeError, SchemeOutcome,
    TrialContext, User,
};

/// `x = g_perp a + h_perp b`: each user sees only its own stream.
pub struct ZeroForcing;

impl ZeroForcing {
    pub fn block(ctx: &TrialContext) -> Result<Block, SchemeError> {
        let alpha = ctx.alpha.value();
        let mut b = BlockBuilder::new(alpha, ctx.snr);
        let a = b.symbol("a", Role::User1, 0.0, 1.0);
        let s = b.symbol("b", Role::User2, 0.0, alpha);
        let ch = realization_at(&ctx.key, 0);
        let t = b.channel_use(TopologyState::STRONG_WEAK, ch);
        b.send(t, a, null_steer(&ch.g)?);
        b.send(t, s, null_steer(&ch.h)?);
        let mut block = b.finish();
        let la = block.layer("a", Role::User1, &[a]);
        let lb = block.layer("b", Role::User2, &[s]);
        block.plan(User::One, &[la]);
        block.plan(User::Two, &[lb]);
        Ok(block)
    }
}

impl Scheme for ZeroForcing {
    fn name(&self) -> &str {
        "zf"
    }

    fn description(&self) -> &str {
        "zero forcing with perfect CSIT for both users (PP, SW)"
    }

    fn policy(&self) -> PolicyId {
        PolicyId::ZfPerfect
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        dist_of(alpha, &[("PP", "SW", 1, 1)])
    }

    fn block_length(&self, _alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(1)
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        run_blocks(&[Self::block(ctx)?], ctx)
    }
}

/// Serves user 1 alone from antenna 1.
pub struct SingleUser;

impl SingleUser {
    pub fn block(ctx: &TrialContext) -> Result<Block, SchemeError> {
        let mut b = BlockBuilder::new(ctx.alpha.value(), ctx.snr);
        let a = b.symbol("a", Role::User1, 0.0, 1.0);
        let t = b.channel_use(TopologyState::STRONG_WEAK, realization_at(&ctx.key, 0));
        b.send(t, a, [ONE, ZERO]);
        let mut block = b.finish();
        let la = block.layer("a", Role::User1, &[a]);
        block.plan(User::One, &[la]);
        Ok(block)
    }
}

impl Scheme for SingleUser {
    fn name(&self) -> &str {
        "su"
    }

    fn description(&self) -> &str {
        "single-user transmission to the strong user, no CSIT (NN, SW)"
    }

    fn policy(&self) -> PolicyId {
        PolicyId::SingleUser
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        dist_of(alpha, &[("NN", "SW", 1, 1)])
    }

    fn block_length(&self, _alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(1)
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        run_blocks(&[Self::block(ctx)?], ctx)
    }
}
