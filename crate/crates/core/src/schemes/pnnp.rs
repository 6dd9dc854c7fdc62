//! Alternating `PN` / `NP` CSIT: one use with current CSIT of user 1 paired
//! with one use with current CSIT of user 2, under every combination of
//! topologies, and their concatenation over a finite horizon.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::bounds::PolicyId;
use crate::channel::{matched_beam, null_steer, realization_at, ChannelRealization, SnrPoint};
use crate::state::{
    joint, periodic_schedule, validate_distribution, Alpha, Csit, CsitState, StateDistribution,
    TopologyState,
};

use super::{
    dist_of, run_blocks, Block, BlockBuilder, Role, Scheme, SchemeError, SchemeOutcome,
    TrialContext, User,
};

const SW: TopologyState = TopologyState::STRONG_WEAK;
const WS: TopologyState = TopologyState::WEAK_STRONG;

/// Topologies of the `PN` use and the `NP` use of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subcase {
    /// `(PN, SW)` and `(NP, SW)`.
    S1aS1a,
    /// `(PN, WS)` and `(NP, WS)`.
    Sa1Sa1,
    /// `(PN, SW)` and `(NP, WS)`.
    S1aSa1,
    /// `(PN, WS)` and `(NP, SW)`.
    Sa1S1a,
}

impl Subcase {
    pub const ALL: [Subcase; 4] = [
        Subcase::S1aS1a,
        Subcase::Sa1Sa1,
        Subcase::S1aSa1,
        Subcase::Sa1S1a,
    ];

    /// `(topology of the PN use, topology of the NP use)`.
    pub fn topologies(self) -> (TopologyState, TopologyState) {
        match self {
            Subcase::S1aS1a => (SW, SW),
            Subcase::Sa1Sa1 => (WS, WS),
            Subcase::S1aSa1 => (SW, WS),
            Subcase::Sa1S1a => (WS, SW),
        }
    }

    pub fn from_topologies(p: TopologyState, q: TopologyState) -> Option<Subcase> {
        Subcase::ALL.into_iter().find(|s| s.topologies() == (p, q))
    }

    pub fn name(self) -> &'static str {
        match self {
            Subcase::S1aS1a => "s1a-s1a",
            Subcase::Sa1Sa1 => "sa1-sa1",
            Subcase::S1aSa1 => "s1a-sa1",
            Subcase::Sa1S1a => "sa1-s1a",
        }
    }
}

impl fmt::Display for Subcase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subcase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcase {s:?}"))
    }
}

/// `p`: matched `a1` plus `b1` nulled at user 1. `q`: matched `a1` plus
/// `a2` nulled at user 2. User 2 cancels `a1` with what it saw in `q`.
/// Topologies are free, which also covers the non-diverse `SS` and `WW`
/// pairs.
fn matched_pair(
    alpha: f64,
    snr: SnrPoint,
    (ch_p, topo_p): (ChannelRealization, TopologyState),
    (ch_q, topo_q): (ChannelRealization, TopologyState),
) -> Result<Block, SchemeError> {
    let (p1, p2) = topo_p.exponents(alpha);
    let (q1, _) = topo_q.exponents(alpha);
    let mut b = BlockBuilder::new(alpha, snr);
    let a1 = b.symbol("a1", Role::User1, 0.0, p1);
    let a2 = b.symbol("a2", Role::User1, 0.0, q1);
    let b1 = b.symbol("b1", Role::User2, 0.0, p2);
    let tp = b.channel_use(topo_p, ch_p);
    let tq = b.channel_use(topo_q, ch_q);
    b.send(tp, a1, matched_beam(&ch_p.h)?);
    b.send(tp, b1, null_steer(&ch_p.h)?);
    b.send(tq, a1, matched_beam(&ch_q.g)?);
    b.send(tq, a2, null_steer(&ch_q.g)?);
    let mut block = b.finish();
    let la = block.layer("a", Role::User1, &[a1, a2]);
    let lb = block.layer("b", Role::User2, &[b1]);
    block.plan(User::One, &[la]);
    block.plan(User::Two, &[lb]);
    Ok(block)
}

/// `(PN, SW)` and `(NP, WS)`: user 1 is strong where it has CSIT. The `PN`
/// use superposes a weak `a2` under `a1`; the `NP` use superposes a weak
/// `b2` under `a1` and nulls `a3` at user 2. Both users decode `a1` first.
fn cross_strong_first(
    alpha: f64,
    snr: SnrPoint,
    ch_p: ChannelRealization,
    ch_q: ChannelRealization,
) -> Result<Block, SchemeError> {
    let mut b = BlockBuilder::new(alpha, snr);
    let a1 = b.symbol("a1", Role::User1, 0.0, alpha);
    let a2 = b.symbol("a2", Role::User1, -alpha, 1.0 - alpha);
    let a3 = b.symbol("a3", Role::User1, 0.0, alpha);
    let b1 = b.symbol("b1", Role::User2, 0.0, alpha);
    let b2 = b.symbol("b2", Role::User2, -alpha, 1.0 - alpha);
    let tp = b.channel_use(SW, ch_p);
    let tq = b.channel_use(WS, ch_q);
    let mh = matched_beam(&ch_p.h)?;
    let mg = matched_beam(&ch_q.g)?;
    b.send(tp, a1, mh);
    b.send(tp, a2, mh);
    b.send(tp, b1, null_steer(&ch_p.h)?);
    b.send(tq, a1, mg);
    b.send(tq, a3, null_steer(&ch_q.g)?);
    b.send(tq, b2, mg);
    let mut block = b.finish();
    let l1 = block.layer("a1", Role::User1, &[a1]);
    let l23 = block.layer("a23", Role::User1, &[a2, a3]);
    let lb = block.layer("b", Role::User2, &[b1, b2]);
    block.plan(User::One, &[l1, l23]);
    block.plan(User::Two, &[l1, lb]);
    Ok(block)
}

/// `(PN, WS)` and `(NP, SW)`: each user is strong where the other has CSIT.
/// Same beams as [`matched_pair`]; `a1` is now worth only `alpha` and both
/// users strip it first, which frees a full-rate `a2` and `b1`.
fn cross_weak_first(
    alpha: f64,
    snr: SnrPoint,
    ch_p: ChannelRealization,
    ch_q: ChannelRealization,
) -> Result<Block, SchemeError> {
    let mut b = BlockBuilder::new(alpha, snr);
    let a1 = b.symbol("a1", Role::User1, 0.0, alpha);
    let a2 = b.symbol("a2", Role::User1, 0.0, 1.0);
    let b1 = b.symbol("b1", Role::User2, 0.0, 1.0);
    let tp = b.channel_use(WS, ch_p);
    let tq = b.channel_use(SW, ch_q);
    b.send(tp, a1, matched_beam(&ch_p.h)?);
    b.send(tp, b1, null_steer(&ch_p.h)?);
    b.send(tq, a1, matched_beam(&ch_q.g)?);
    b.send(tq, a2, null_steer(&ch_q.g)?);
    let mut block = b.finish();
    let l1 = block.layer("a1", Role::User1, &[a1]);
    let l2 = block.layer("a2", Role::User1, &[a2]);
    let lb = block.layer("b", Role::User2, &[b1]);
    block.plan(User::One, &[l1, l2]);
    block.plan(User::Two, &[l1, lb]);
    Ok(block)
}

/// Block for one `PN` use (channel `ch_p`, topology `topo_p`) paired with one
/// `NP` use.
pub fn pair_block(
    alpha: f64,
    snr: SnrPoint,
    p: (ChannelRealization, TopologyState),
    q: (ChannelRealization, TopologyState),
) -> Result<Block, SchemeError> {
    match Subcase::from_topologies(p.1, q.1) {
        Some(Subcase::S1aS1a) | None => matched_pair(alpha, snr, p, q),
        // with the users interchanged the NP use becomes the PN use
        Some(Subcase::Sa1Sa1) => Ok(matched_pair(
            alpha,
            snr,
            (q.0.swapped(), q.1.swapped()),
            (p.0.swapped(), p.1.swapped()),
        )?
        .swap_users()),
        Some(Subcase::S1aSa1) => cross_strong_first(alpha, snr, p.0, q.0),
        Some(Subcase::Sa1S1a) => cross_weak_first(alpha, snr, p.0, q.0),
    }
}

/// A single `PN`/`NP` pair in a fixed subcase.
pub struct Tsm5Pair {
    subcase: Subcase,
    name: String,
    description: String,
}

impl Tsm5Pair {
    pub fn new(subcase: Subcase) -> Self {
        let (p, q) = subcase.topologies();
        Self {
            subcase,
            name: format!("tsm5-{subcase}"),
            description: format!("one (PN,{p}) use paired with one (NP,{q}) use"),
        }
    }

    pub fn subcase(&self) -> Subcase {
        self.subcase
    }

    pub fn block(&self, ctx: &TrialContext) -> Result<Block, SchemeError> {
        let (p, q) = self.subcase.topologies();
        pair_block(
            ctx.alpha.value(),
            ctx.snr,
            (realization_at(&ctx.key, 0), p),
            (realization_at(&ctx.key, 1), q),
        )
    }
}

impl Scheme for Tsm5Pair {
    fn name(&self) -> &str {
        &self.name
    }

    fn description(&self) -> &str {
        &self.description
    }

    fn policy(&self) -> PolicyId {
        PolicyId::Tsm5PnNp
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        let (p, q) = self.subcase.topologies();
        StateDistribution::empty(alpha)
            .with(
                joint("PN", &p.to_string()),
                crate::state::Fraction::ratio(1, 2),
            )
            .with(
                joint("NP", &q.to_string()),
                crate::state::Fraction::ratio(1, 2),
            )
    }

    fn block_length(&self, _alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(2)
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        run_blocks(&[self.block(ctx)?], ctx)
    }
}

pub const DEFAULT_HORIZON: usize = 8;

/// Concatenation over a periodic schedule of `dist`: `PN` and `NP` uses are
/// paired first-in first-out and each pair runs the design of its subcase.
/// The rate is taken over the paired uses.
pub struct Tsm5 {
    dist: Option<StateDistribution>,
    horizon: usize,
}

impl Default for Tsm5 {
    fn default() -> Self {
        Self {
            dist: None,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl Tsm5 {
    /// Checks that `dist` only uses `PN`/`NP` (half each) on `SW`/`WS`.
    pub fn new(dist: StateDistribution, horizon: usize) -> Result<Self, SchemeError> {
        let reject = |reason: String| SchemeError::Distribution {
            scheme: "tsm5".into(),
            reason,
        };
        validate_distribution(&dist).map_err(|e| reject(e.to_string()))?;
        let pn = CsitState::new(Csit::P, Csit::N);
        let np = CsitState::new(Csit::N, Csit::P);
        let mut pn_total = crate::state::Fraction::zero();
        for (state, f) in dist.support() {
            if state.csit != pn && state.csit != np {
                return Err(reject(format!("state {state} is not PN or NP")));
            }
            if state.topology != SW && state.topology != WS {
                return Err(reject(format!(
                    "state {state} has a non-alternating topology"
                )));
            }
            if state.csit == pn {
                pn_total = pn_total.add(f);
            }
        }
        if pn_total != crate::state::Fraction::ratio(1, 2) {
            return Err(reject(format!("PN carries {pn_total}, expected 1/2")));
        }
        Ok(Self {
            dist: Some(dist),
            horizon,
        })
    }

    fn default_distribution(alpha: Alpha) -> StateDistribution {
        dist_of(
            alpha,
            &[
                ("PN", "SW", 1, 4),
                ("NP", "SW", 1, 4),
                ("PN", "WS", 1, 4),
                ("NP", "WS", 1, 4),
            ],
        )
    }

    /// `(PN index, NP index)` pairs over the schedule, and the unmatched count.
    pub fn pairing(&self, alpha: Alpha) -> Result<(Vec<(usize, usize)>, usize), SchemeError> {
        let schedule = periodic_schedule(&self.distribution(alpha), self.horizon)?;
        let pn = CsitState::new(Csit::P, Csit::N);
        let mut waiting_p: VecDeque<usize> = VecDeque::new();
        let mut waiting_q: VecDeque<usize> = VecDeque::new();
        let mut pairs = Vec::new();
        for (i, s) in schedule.states().iter().enumerate() {
            if s.csit == pn {
                match waiting_q.pop_front() {
                    Some(q) => pairs.push((i, q)),
                    None => waiting_p.push_back(i),
                }
            } else {
                match waiting_p.pop_front() {
                    Some(p) => pairs.push((p, i)),
                    None => waiting_q.push_back(i),
                }
            }
        }
        let unmatched = waiting_p.len() + waiting_q.len();
        if unmatched > 2 || pairs.is_empty() {
            return Err(SchemeError::UnpairableSchedule { unmatched });
        }
        Ok((pairs, unmatched))
    }
}

impl Scheme for Tsm5 {
    fn name(&self) -> &str {
        "tsm5"
    }

    fn description(&self) -> &str {
        "PN/NP alternation over SW/WS topologies, pairs dispatched by subcase"
    }

    fn policy(&self) -> PolicyId {
        PolicyId::Tsm5PnNp
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        match &self.dist {
            Some(d) => d.clone().with_alpha(alpha),
            None => Self::default_distribution(alpha),
        }
    }

    fn block_length(&self, alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(2 * self.pairing(alpha)?.0.len())
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        let schedule = periodic_schedule(&self.distribution(ctx.alpha), self.horizon)?;
        let states = schedule.states();
        let (pairs, _) = self.pairing(ctx.alpha)?;
        let blocks = pairs
            .iter()
            .map(|&(p, q)| {
                pair_block(
                    ctx.alpha.value(),
                    ctx.snr,
                    (realization_at(&ctx.key, p as u64), states[p].topology),
                    (realization_at(&ctx.key, q as u64), states[q].topology),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        run_blocks(&blocks, ctx)
    }

    fn with_distribution(&self, dist: &StateDistribution) -> Result<Box<dyn Scheme>, SchemeError> {
        Ok(Box::new(Tsm5::new(dist.clone(), self.horizon)?))
    }
}

/// The `PN`/`NP` pair run once with both users strong and once with both
/// weak: what the same CSIT achieves without topological diversity.
pub struct PnNpNonDiverse;

impl PnNpNonDiverse {
    pub fn blocks(ctx: &TrialContext) -> Result<Vec<Block>, SchemeError> {
        let alpha = ctx.alpha.value();
        let ch = |i| realization_at(&ctx.key, i);
        Ok(vec![
            pair_block(
                alpha,
                ctx.snr,
                (ch(0), TopologyState::STRONG_STRONG),
                (ch(1), TopologyState::STRONG_STRONG),
            )?,
            pair_block(
                alpha,
                ctx.snr,
                (ch(2), TopologyState::WEAK_WEAK),
                (ch(3), TopologyState::WEAK_WEAK),
            )?,
        ])
    }
}

impl Scheme for PnNpNonDiverse {
    fn name(&self) -> &str {
        "pnnp-nd"
    }

    fn description(&self) -> &str {
        "PN/NP pairs on SS and on WW (no topological diversity)"
    }

    fn policy(&self) -> PolicyId {
        PolicyId::PnNpNonDiverse
    }

    fn distribution(&self, alpha: Alpha) -> StateDistribution {
        dist_of(
            alpha,
            &[
                ("PN", "SS", 1, 4),
                ("NP", "SS", 1, 4),
                ("PN", "WW", 1, 4),
                ("NP", "WW", 1, 4),
            ],
        )
    }

    fn block_length(&self, _alpha: Alpha) -> Result<usize, SchemeError> {
        Ok(4)
    }

    fn run_trial(&self, ctx: &TrialContext) -> Result<SchemeOutcome, SchemeError> {
        run_blocks(&Self::blocks(ctx)?, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_pairs_every_use() {
        let (pairs, unmatched) = Tsm5::default().pairing(Alpha::ratio(1, 2)).unwrap();
        assert_eq!(pairs.len(), 4);
        assert_eq!(unmatched, 0);
    }

    #[test]
    fn subcases_round_trip_through_names_and_topologies() {
        for s in Subcase::ALL {
            assert_eq!(s.name().parse::<Subcase>().unwrap(), s);
            let (p, q) = s.topologies();
            assert_eq!(Subcase::from_topologies(p, q), Some(s));
        }
    }

    #[test]
    fn distributions_outside_the_family_are_rejected() {
        let a = Alpha::ratio(1, 2);
        assert!(Tsm5::new(dist_of(a, &[("PN", "SW", 1, 2), ("NP", "SS", 1, 2)]), 8).is_err());
        assert!(Tsm5::new(dist_of(a, &[("PN", "SW", 3, 4), ("NP", "SW", 1, 4)]), 8).is_err());
        assert!(Tsm5::new(
            dist_of(
                a,
                &[("PN", "SW", 1, 2), ("NP", "WS", 1, 4), ("NP", "SW", 1, 4)]
            ),
            8
        )
        .is_ok());
    }
}
