//! CSIT / topology state statistics.
//!
//! A [`StateDistribution`] assigns a fraction of the communication time to
//! every joint (CSIT pair, topology pair) state, together with the weak-link
//! exponent `alpha`. Fractions are kept as exact rationals so that bound
//! comparisons never hinge on rounding; a cached `f64` rides along for the
//! floating-point paths.

mod config;
mod ratio;
mod schedule;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub use config::{parse_distribution_json, ConfigError, ParsedDistribution};
pub use ratio::{parse_alpha, parse_fraction, Alpha, AlphaParse, Fraction, ALPHA_MAX_DENOMINATOR};
pub use schedule::{periodic_schedule, Schedule, ScheduleError};

/// Absolute tolerance applied to the unit-sum check.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// CSIT quality for one user's channel at one channel use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Csit {
    /// Perfect and instantaneous.
    P,
    /// Delayed: known to the transmitter after the channel use.
    D,
    /// Not available.
    N,
}

impl Csit {
    pub const ALL: [Csit; 3] = [Csit::P, Csit::D, Csit::N];

    fn letter(self) -> char {
        match self {
            Csit::P => 'P',
            Csit::D => 'D',
            Csit::N => 'N',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'P' => Some(Csit::P),
            'D' => Some(Csit::D),
            'N' => Some(Csit::N),
            _ => None,
        }
    }
}

/// `(I1, I2)`: CSIT quality of user 1's and user 2's channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CsitState {
    pub i1: Csit,
    pub i2: Csit,
}

impl CsitState {
    pub const fn new(i1: Csit, i2: Csit) -> Self {
        Self { i1, i2 }
    }

    /// All nine pairs in lexicographic order.
    pub fn all() -> impl Iterator<Item = CsitState> {
        Csit::ALL
            .into_iter()
            .flat_map(|i1| Csit::ALL.into_iter().map(move |i2| CsitState { i1, i2 }))
    }

    pub fn swapped(self) -> Self {
        Self::new(self.i2, self.i1)
    }
}

impl fmt::Display for CsitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.i1.letter(), self.i2.letter())
    }
}

impl FromStr for CsitState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (
            chars.next().and_then(Csit::from_letter),
            chars.next().and_then(Csit::from_letter),
            chars.next(),
        ) {
            (Some(i1), Some(i2), None) => Ok(Self { i1, i2 }),
            _ => Err(format!("expected two letters from {{P, D, N}}, got {s:?}")),
        }
    }
}

/// Statistical strength of one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Link {
    /// Link power exponent 1.
    Strong,
    /// Link power exponent `alpha`.
    Weak,
}

impl Link {
    pub const ALL: [Link; 2] = [Link::Strong, Link::Weak];

    /// Power exponent of this link for the given `alpha`.
    pub fn exponent(self, alpha: f64) -> f64 {
        match self {
            Link::Strong => 1.0,
            Link::Weak => alpha,
        }
    }

    fn letter(self) -> char {
        match self {
            Link::Strong => 'S',
            Link::Weak => 'W',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'S' => Some(Link::Strong),
            'W' => Some(Link::Weak),
            _ => None,
        }
    }
}

/// `(A1, A2)`: link strength towards user 1 and user 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TopologyState {
    pub a1: Link,
    pub a2: Link,
}

impl TopologyState {
    /// `(1, alpha)`: link 1 strong, link 2 weak.
    pub const STRONG_WEAK: TopologyState = TopologyState::new(Link::Strong, Link::Weak);
    /// `(alpha, 1)`.
    pub const WEAK_STRONG: TopologyState = TopologyState::new(Link::Weak, Link::Strong);
    /// `(1, 1)`.
    pub const STRONG_STRONG: TopologyState = TopologyState::new(Link::Strong, Link::Strong);
    /// `(alpha, alpha)`.
    pub const WEAK_WEAK: TopologyState = TopologyState::new(Link::Weak, Link::Weak);

    pub const fn new(a1: Link, a2: Link) -> Self {
        Self { a1, a2 }
    }

    pub fn all() -> impl Iterator<Item = TopologyState> {
        Link::ALL.into_iter().flat_map(|a1| {
            Link::ALL
                .into_iter()
                .map(move |a2| TopologyState { a1, a2 })
        })
    }

    pub fn swapped(self) -> Self {
        Self::new(self.a2, self.a1)
    }

    /// Link power exponents `(A1, A2)`.
    pub fn exponents(self, alpha: f64) -> (f64, f64) {
        (self.a1.exponent(alpha), self.a2.exponent(alpha))
    }
}

impl fmt::Display for TopologyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a1.letter(), self.a2.letter())
    }
}

impl FromStr for TopologyState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (
            chars.next().and_then(Link::from_letter),
            chars.next().and_then(Link::from_letter),
            chars.next(),
        ) {
            (Some(a1), Some(a2), None) => Ok(Self { a1, a2 }),
            _ => Err(format!("expected two letters from {{S, W}}, got {s:?}")),
        }
    }
}

/// One joint feedback-and-topology state `(I1, I2, A1, A2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointState {
    pub csit: CsitState,
    pub topology: TopologyState,
}

impl JointState {
    pub const fn new(csit: CsitState, topology: TopologyState) -> Self {
        Self { csit, topology }
    }

    /// All 36 joint states in lexicographic order.
    pub fn all() -> impl Iterator<Item = JointState> {
        CsitState::all()
            .flat_map(|csit| TopologyState::all().map(move |topology| Self { csit, topology }))
    }

    /// The same state seen with the users' roles interchanged.
    pub fn swapped(self) -> Self {
        Self::new(self.csit.swapped(), self.topology.swapped())
    }
}

impl fmt::Display for JointState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.csit, self.topology)
    }
}

/// Shorthand used throughout the schemes and tests: `joint("DD", "SW")`.
///
/// Panics on malformed letters; meant for literals.
pub fn joint(csit: &str, topology: &str) -> JointState {
    JointState::new(
        csit.parse().expect("csit literal"),
        topology.parse().expect("topology literal"),
    )
}

/// Joint fractions over (CSIT pair, topology pair) plus the weak exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution {
    alpha: Alpha,
    entries: BTreeMap<JointState, Fraction>,
}

impl StateDistribution {
    /// Builds a distribution without validating it.
    pub fn new(alpha: Alpha, entries: impl IntoIterator<Item = (JointState, Fraction)>) -> Self {
        let mut map = BTreeMap::new();
        for (state, fraction) in entries {
            map.entry(state)
                .and_modify(|f: &mut Fraction| *f = f.add(&fraction))
                .or_insert(fraction);
        }
        Self {
            alpha,
            entries: map,
        }
    }

    pub fn empty(alpha: Alpha) -> Self {
        Self {
            alpha,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `fraction` to `state` (accumulating if already present).
    pub fn with(mut self, state: JointState, fraction: Fraction) -> Self {
        self.entries
            .entry(state)
            .and_modify(|f| *f = f.add(&fraction))
            .or_insert(fraction);
        self
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn with_alpha(mut self, alpha: Alpha) -> Self {
        self.alpha = alpha;
        self
    }

    /// Fraction of `state`; zero when absent.
    pub fn fraction(&self, state: JointState) -> Fraction {
        self.entries
            .get(&state)
            .cloned()
            .unwrap_or_else(Fraction::zero)
    }

    /// Stored entries in lexicographic state order (zeros included if given).
    pub fn entries(&self) -> impl Iterator<Item = (JointState, &Fraction)> {
        self.entries.iter().map(|(s, f)| (*s, f))
    }

    /// States carrying a strictly positive fraction.
    pub fn support(&self) -> impl Iterator<Item = (JointState, &Fraction)> {
        self.entries().filter(|(_, f)| f.exact().is_positive())
    }

    /// The single topology carrying all the mass, if there is one.
    pub fn fixed_topology(&self) -> Option<TopologyState> {
        let mut topo = None;
        for (state, _) in self.support() {
            match topo {
                None => topo = Some(state.topology),
                Some(t) if t != state.topology => return None,
                _ => {}
            }
        }
        topo
    }

    /// Interchanges the users' roles in every state.
    pub fn swapped(&self) -> Self {
        Self::new(
            self.alpha,
            self.entries.iter().map(|(s, f)| (s.swapped(), f.clone())),
        )
    }

    /// Equality of the supported states and their exact fractions.
    pub fn same_support_as(&self, other: &StateDistribution) -> bool {
        let a: Vec<_> = self.support().collect();
        let b: Vec<_> = other.support().collect();
        a.len() == b.len()
            && a.iter()
                .zip(&b)
                .all(|((sa, fa), (sb, fb))| sa == sb && fa.exact() == fb.exact())
    }
}

/// Which constraint a [`Violation`] refers to.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Nonnegative(JointState),
    UnitSum,
    AlphaRange,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Nonnegative(s) => write!(f, "fraction of {s} must be nonnegative"),
            Constraint::UnitSum => write!(f, "fractions must sum to 1"),
            Constraint::AlphaRange => write!(f, "alpha must lie in [0, 1]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (got {})", self.constraint, self.value)
    }
}

/// Every constraint a distribution failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "invalid distribution: {}", parts.join("; "))
    }
}

/// Checks nonnegativity, unit sum (within [`SUM_TOLERANCE`]) and `alpha` range.
pub fn validate_distribution(dist: &StateDistribution) -> Result<(), ViolationReport> {
    let mut violations = Vec::new();
    let alpha = dist.alpha.value();
    if !(0.0..=1.0).contains(&alpha) {
        violations.push(Violation {
            constraint: Constraint::AlphaRange,
            value: alpha,
        });
    }
    for (state, fraction) in dist.entries() {
        if fraction.exact().is_negative() {
            violations.push(Violation {
                constraint: Constraint::Nonnegative(state),
                value: fraction.value(),
            });
        }
    }
    let sum: f64 = dist.entries().map(|(_, f)| f.value()).sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        violations.push(Violation {
            constraint: Constraint::UnitSum,
            value: sum,
        });
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ViolationReport { violations })
    }
}

/// `lambda_{P<->N}`, `lambda_{D<->N}`, `lambda_{P<->D}` for one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregates {
    pub p_n: Fraction,
    pub d_n: Fraction,
    pub p_d: Fraction,
}

/// CSIT marginals, topology marginals and per-topology aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub csit: BTreeMap<CsitState, Fraction>,
    pub topology: BTreeMap<TopologyState, Fraction>,
    pub aggregates: BTreeMap<TopologyState, Aggregates>,
}

impl Marginals {
    pub fn csit(&self, state: &str) -> Fraction {
        let key: CsitState = state.parse().expect("csit literal");
        self.csit[&key].clone()
    }

    pub fn topology(&self, state: TopologyState) -> Fraction {
        self.topology[&state].clone()
    }
}

/// Computes every marginal family exactly. Every map is total (zeros kept).
pub fn marginals(dist: &StateDistribution) -> Marginals {
    let mut csit: BTreeMap<CsitState, Fraction> =
        CsitState::all().map(|c| (c, Fraction::zero())).collect();
    let mut topology: BTreeMap<TopologyState, Fraction> = TopologyState::all()
        .map(|t| (t, Fraction::zero()))
        .collect();
    for (state, fraction) in dist.entries() {
        let c = csit.get_mut(&state.csit).expect("total map");
        *c = c.add(fraction);
        let t = topology.get_mut(&state.topology).expect("total map");
        *t = t.add(fraction);
    }
    let aggregates = TopologyState::all()
        .map(|topo| {
            let at = |c: &str| dist.fraction(JointState::new(c.parse().expect("literal"), topo));
            (
                topo,
                Aggregates {
                    p_n: at("PN").add(&at("NP")),
                    d_n: at("DN").add(&at("ND")),
                    p_d: at("PD").add(&at("DP")),
                },
            )
        })
        .collect();
    Marginals {
        csit,
        topology,
        aggregates,
    }
}

/// Exact sum of a family of fractions.
pub fn exact_sum<'a>(fractions: impl IntoIterator<Item = &'a Fraction>) -> BigRational {
    fractions
        .into_iter()
        .fold(BigRational::zero(), |acc, f| acc + f.exact())
}
