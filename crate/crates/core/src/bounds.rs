//! Sum-GDoF outer bounds and the known achievable values.
//!
//! Every formula is generic over [`Scalar`], so the same code runs in exact
//! rational arithmetic (`BigRational`) and in `f64`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_rational::BigRational;
use thiserror::Error;

use crate::state::{
    marginals, validate_distribution, Alpha, CsitState, Fraction, StateDistribution, TopologyState,
    ViolationReport, SUM_TOLERANCE,
};

/// Arithmetic needed by the bound formulas.
pub trait Scalar:
    Clone + PartialOrd + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    fn ratio(num: i64, den: i64) -> Self;
    fn of_fraction(f: &Fraction) -> Self;
    fn of_alpha(a: Alpha) -> Self;
    fn to_f64(&self) -> f64;
    fn recip(self) -> Self;

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn of_fraction(f: &Fraction) -> Self {
        f.value()
    }
    fn of_alpha(a: Alpha) -> Self {
        a.value()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn recip(self) -> Self {
        1.0 / self
    }
}

impl Scalar for BigRational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }
    fn of_fraction(f: &Fraction) -> Self {
        f.exact().clone()
    }
    fn of_alpha(a: Alpha) -> Self {
        a.exact()
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn recip(self) -> Self {
        BigRational::recip(&self)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

impl From<ViolationReport> for BoundError {
    fn from(r: ViolationReport) -> Self {
        BoundError::InvalidDistribution(r.to_string())
    }
}

/// Evaluated bounds; `None` marks a bound that does not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub d1: Option<T>,
    pub d2: Option<T>,
    pub d3: Option<T>,
    pub d4: Option<T>,
    pub d_min: T,
}

impl<T: Scalar> BoundReport<T> {
    fn from_parts(d1: Option<T>, d2: Option<T>, d3: Option<T>, d4: Option<T>) -> Self {
        let d_min = [&d1, &d2, &d3, &d4]
            .into_iter()
            .flatten()
            .cloned()
            .reduce(Scalar::min)
            .expect("at least one bound");
        Self {
            d1,
            d2,
            d3,
            d4,
            d_min,
        }
    }

    pub fn to_f64(&self) -> BoundReport<f64> {
        let f = |x: &Option<T>| x.as_ref().map(Scalar::to_f64);
        BoundReport {
            d1: f(&self.d1),
            d2: f(&self.d2),
            d3: f(&self.d3),
            d4: f(&self.d4),
            d_min: self.d_min.to_f64(),
        }
    }
}

fn check_alpha(alpha: Alpha) -> Result<(), BoundError> {
    if (0.0..=1.0).contains(&alpha.value()) {
        Ok(())
    } else {
        Err(BoundError::InvalidDistribution(format!(
            "alpha {alpha} outside [0, 1]"
        )))
    }
}

/// Bounds for a fixed strictly uneven topology, from the CSIT marginals.
///
/// The formulas are symmetric in the users, so the same values hold for
/// `(1, alpha)` and `(alpha, 1)`.
pub fn outer_bound_fixed<T: Scalar>(
    csit: &BTreeMap<CsitState, Fraction>,
    alpha: Alpha,
) -> Result<BoundReport<T>, BoundError> {
    check_alpha(alpha)?;
    let mut sum = 0.0;
    for f in csit.values() {
        if f.value() < 0.0 {
            return Err(BoundError::InvalidDistribution(format!(
                "negative CSIT fraction {f}"
            )));
        }
        sum += f.value();
    }
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(BoundError::InvalidDistribution(format!(
            "CSIT fractions sum to {sum}"
        )));
    }
    let l = |s: &str| {
        let key: CsitState = s.parse().expect("literal");
        csit.get(&key)
            .map_or_else(|| T::ratio(0, 1), T::of_fraction)
    };
    let a = T::of_alpha(alpha);
    let one = T::ratio(1, 1);
    let c = |n: i64, d: i64| T::ratio(n, d);

    let d1 = (one.clone() + a.clone()) * l("PP")
        + (c(1, 1) + c(2, 3) * a.clone()) * (l("PD") + l("DP") + l("PN") + l("NP"))
        + (c(1, 1) + c(1, 3) * a.clone()) * (l("DD") + l("DN") + l("ND") + l("NN"));
    let d2 = (one.clone() + a.clone()) * (l("PP") + l("PD") + l("DP") + l("DD"))
        + (one + c(1, 2) * a) * (l("PN") + l("NP") + l("DN") + l("ND"))
        + l("NN");
    Ok(BoundReport::from_parts(Some(d1), Some(d2), None, None))
}

/// General bounds over any topology mix.
pub fn outer_bound_general<T: Scalar>(
    dist: &StateDistribution,
) -> Result<BoundReport<T>, BoundError> {
    validate_distribution(dist)?;
    let m = marginals(dist);
    let a = T::of_alpha(dist.alpha());
    let c = |n: i64, d: i64| T::ratio(n, d);
    let zero = || c(0, 1);

    let mut d3 = zero();
    let mut d4 = zero();
    for topo in TopologyState::all() {
        let agg = &m.aggregates[&topo];
        let at = |s: &str| {
            T::of_fraction(&dist.fraction(crate::state::JointState::new(
                s.parse().expect("literal"),
                topo,
            )))
        };
        let pp = at("PP");
        let dd = at("DD");
        let nn = at("NN");
        let p_d = T::of_fraction(&agg.p_d);
        let p_n = T::of_fraction(&agg.p_n);
        let d_n = T::of_fraction(&agg.d_n);
        // per-topology coefficient sets, in the order
        // (PP, P<->D, P<->N, DD, D<->N, NN)
        let (k3, k4): ([T; 6], [T; 6]) =
            if topo == TopologyState::STRONG_STRONG || topo == TopologyState::WEAK_WEAK {
                let s = if topo == TopologyState::STRONG_STRONG {
                    c(1, 1)
                } else {
                    a.clone()
                };
                (
                    [c(2, 1), c(5, 3), c(5, 3), c(4, 3), c(4, 3), c(4, 3)].map(|k| k * s.clone()),
                    [c(2, 1), c(2, 1), c(3, 2), c(2, 1), c(3, 2), c(1, 1)].map(|k| k * s.clone()),
                )
            } else {
                let full = c(1, 1) + a.clone();
                let two_thirds = c(1, 1) + c(2, 3) * a.clone();
                let third = c(1, 1) + c(1, 3) * a.clone();
                let half = c(1, 1) + c(1, 2) * a.clone();
                (
                    [
                        full.clone(),
                        two_thirds.clone(),
                        two_thirds,
                        third.clone(),
                        third.clone(),
                        third,
                    ],
                    [
                        full.clone(),
                        full.clone(),
                        half.clone(),
                        full,
                        half,
                        c(1, 1),
                    ],
                )
            };
        let lambdas = [pp, p_d, p_n, dd, d_n, nn];
        for ((l, k3), k4) in lambdas.iter().zip(k3).zip(k4) {
            d3 = d3 + k3 * l.clone();
            d4 = d4 + k4 * l.clone();
        }
    }
    Ok(BoundReport::from_parts(None, None, Some(d3), Some(d4)))
}

/// Every applicable bound: the general pair always, plus the fixed-topology
/// pair when all mass sits on one strictly uneven topology.
pub fn outer_bounds<T: Scalar>(dist: &StateDistribution) -> Result<BoundReport<T>, BoundError> {
    let general = outer_bound_general::<T>(dist)?;
    match dist.fixed_topology() {
        Some(t) if t == TopologyState::STRONG_WEAK || t == TopologyState::WEAK_STRONG => {
            let fixed = outer_bound_fixed::<T>(&marginals(dist).csit, dist.alpha())?;
            Ok(BoundReport::from_parts(
                fixed.d1, fixed.d2, general.d3, general.d4,
            ))
        }
        _ => Ok(general),
    }
}

/// Named transmission policies with a known sum-GDoF value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicyId {
    ZfPerfect,
    Tsm1NdPn,
    Tsm2PdNn,
    Tsm3DdFixedLB,
    Tsm4DdAlt,
    Tsm5PnNp,
    MatFixed,
    DdNonDiverse,
    PnNpNonDiverse,
    SingleUser,
}

impl PolicyId {
    pub const ALL: [PolicyId; 10] = [
        PolicyId::ZfPerfect,
        PolicyId::Tsm1NdPn,
        PolicyId::Tsm2PdNn,
        PolicyId::Tsm3DdFixedLB,
        PolicyId::Tsm4DdAlt,
        PolicyId::Tsm5PnNp,
        PolicyId::MatFixed,
        PolicyId::DdNonDiverse,
        PolicyId::PnNpNonDiverse,
        PolicyId::SingleUser,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::ZfPerfect => "zf-perfect",
            PolicyId::Tsm1NdPn => "tsm1-nd-pn",
            PolicyId::Tsm2PdNn => "tsm2-pd-nn",
            PolicyId::Tsm3DdFixedLB => "tsm3-dd-fixed",
            PolicyId::Tsm4DdAlt => "tsm4-dd-alt",
            PolicyId::Tsm5PnNp => "tsm5-pn-np",
            PolicyId::MatFixed => "mat-fixed",
            PolicyId::DdNonDiverse => "dd-non-diverse",
            PolicyId::PnNpNonDiverse => "pn-np-non-diverse",
            PolicyId::SingleUser => "single-user",
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown policy {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimality {
    /// Meets an outer bound.
    Optimal,
    /// Achievable, optimality open.
    LowerBound,
    /// Known to fall short of another scheme in the same setting.
    Suboptimal,
}

impl fmt::Display for Optimality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimality::Optimal => "optimal",
            Optimality::LowerBound => "lower-bound",
            Optimality::Suboptimal => "suboptimal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Achievable<T> {
    pub value: T,
    pub optimality: Optimality,
}

/// Closed-form sum GDoF of `policy`.
pub fn achievable_gdof<T: Scalar>(policy: PolicyId, alpha: Alpha) -> Achievable<T> {
    let a = T::of_alpha(alpha);
    let c = |n: i64, d: i64| T::ratio(n, d);
    use Optimality::*;
    let (value, optimality) = match policy {
        PolicyId::ZfPerfect => (c(1, 1) + a, Optimal),
        PolicyId::Tsm1NdPn | PolicyId::Tsm2PdNn | PolicyId::Tsm5PnNp => {
            (c(1, 1) + c(1, 2) * a, Optimal)
        }
        PolicyId::Tsm3DdFixedLB => (
            c(1, 1) + a.clone() * a.clone() * (c(2, 1) + a).recip(),
            LowerBound,
        ),
        PolicyId::Tsm4DdAlt => (c(1, 1) + c(1, 3) * a, Optimal),
        PolicyId::MatFixed => (c(2, 3) * (c(1, 1) + a), Suboptimal),
        PolicyId::DdNonDiverse => (c(2, 3) * (c(1, 1) + a), Optimal),
        PolicyId::PnNpNonDiverse => (c(3, 4) * (c(1, 1) + a), Optimal),
        PolicyId::SingleUser => (c(1, 1), Suboptimal),
    };
    Achievable { value, optimality }
}

/// The policy whose closed form applies to `dist`, if it is one of the
/// recognized settings.
pub fn recognize_policy(dist: &StateDistribution) -> Option<PolicyId> {
    let m = marginals(dist);
    let csit_is = |wanted: &[(&str, Fraction)]| {
        let total: usize = m.csit.values().filter(|f| f.value() > 0.0).count();
        total == wanted.len() && wanted.iter().all(|(s, f)| &m.csit(s) == f)
    };
    let half = Fraction::ratio(1, 2);
    let one = Fraction::one();
    let sw = m.topology(TopologyState::STRONG_WEAK);
    let ws = m.topology(TopologyState::WEAK_STRONG);
    let ss = m.topology(TopologyState::STRONG_STRONG);
    let ww = m.topology(TopologyState::WEAK_WEAK);
    let uneven = sw.add(&ws) == one;
    let fixed_sw = sw == one;
    let fixed_ws = ws == one;
    let non_diverse = ss == half && ww == half;

    if uneven && csit_is(&[("PP", one.clone())]) {
        return Some(PolicyId::ZfPerfect);
    }
    if (fixed_sw && csit_is(&[("ND", half.clone()), ("PN", half.clone())]))
        || (fixed_ws && csit_is(&[("DN", half.clone()), ("NP", half.clone())]))
    {
        return Some(PolicyId::Tsm1NdPn);
    }
    if (fixed_sw && csit_is(&[("PD", half.clone()), ("NN", half.clone())]))
        || (fixed_ws && csit_is(&[("DP", half.clone()), ("NN", half.clone())]))
    {
        return Some(PolicyId::Tsm2PdNn);
    }
    if (fixed_sw || fixed_ws) && csit_is(&[("DD", one.clone())]) {
        return Some(PolicyId::Tsm3DdFixedLB);
    }
    if sw == half && ws == half && csit_is(&[("DD", one.clone())]) {
        return Some(PolicyId::Tsm4DdAlt);
    }
    if uneven && csit_is(&[("PN", half.clone()), ("NP", half.clone())]) {
        return Some(PolicyId::Tsm5PnNp);
    }
    if non_diverse && csit_is(&[("DD", one.clone())]) {
        return Some(PolicyId::DdNonDiverse);
    }
    if non_diverse && csit_is(&[("PN", half.clone()), ("NP", half)]) {
        return Some(PolicyId::PnNpNonDiverse);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::joint;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn csit(entries: &[(&str, Fraction)]) -> BTreeMap<CsitState, Fraction> {
        entries
            .iter()
            .map(|(s, f)| (s.parse().unwrap(), f.clone()))
            .collect()
    }

    #[test]
    fn perfect_csit_fixed_topology() {
        let rep =
            outer_bound_fixed::<BigRational>(&csit(&[("PP", Fraction::one())]), Alpha::ratio(1, 2))
                .unwrap();
        assert_eq!(rep.d1, Some(r(3, 2)));
        assert_eq!(rep.d2, Some(r(3, 2)));
        assert_eq!(rep.d_min, r(3, 2));
    }

    #[test]
    fn pn_np_fixed_topology() {
        let half = Fraction::ratio(1, 2);
        let rep = outer_bound_fixed::<BigRational>(
            &csit(&[("PN", half.clone()), ("NP", half)]),
            Alpha::ratio(1, 2),
        )
        .unwrap();
        assert_eq!(rep.d1, Some(r(4, 3)));
        assert_eq!(rep.d2, Some(r(5, 4)));
        assert_eq!(rep.d_min, r(5, 4));
    }

    #[test]
    fn delayed_csit_at_unit_alpha() {
        let rep =
            outer_bound_fixed::<BigRational>(&csit(&[("DD", Fraction::one())]), Alpha::ratio(1, 1))
                .unwrap();
        assert_eq!(rep.d1, Some(r(4, 3)));
        assert_eq!(rep.d2, Some(r(2, 1)));
        assert_eq!(rep.d_min, r(4, 3));
    }

    #[test]
    fn fixed_bound_rejects_bad_marginals() {
        let half = Fraction::ratio(1, 2);
        assert!(outer_bound_fixed::<f64>(&csit(&[("PN", half)]), Alpha::ratio(1, 2)).is_err());
        assert!(
            outer_bound_fixed::<f64>(&csit(&[("PN", Fraction::one())]), Alpha::ratio(3, 2))
                .is_err()
        );
    }

    #[test]
    fn alternating_delayed() {
        let half = Fraction::ratio(1, 2);
        let dist = StateDistribution::empty(Alpha::ratio(3, 5))
            .with(joint("DD", "SW"), half.clone())
            .with(joint("DD", "WS"), half);
        let rep = outer_bound_general::<BigRational>(&dist).unwrap();
        assert_eq!(rep.d3, Some(r(6, 5)));
        assert_eq!(rep.d4, Some(r(8, 5)));
        assert_eq!(rep.d_min, r(6, 5));
    }

    #[test]
    fn pn_np_over_uneven_topologies() {
        let q = Fraction::ratio(1, 4);
        let dist = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("PN", "SW"), q.clone())
            .with(joint("NP", "SW"), q.clone())
            .with(joint("PN", "WS"), q.clone())
            .with(joint("NP", "WS"), q);
        let rep = outer_bound_general::<BigRational>(&dist).unwrap();
        assert_eq!(rep.d4, Some(r(5, 4)));
        assert_eq!(rep.d_min, r(5, 4));
    }

    #[test]
    fn non_diverse_delayed() {
        let half = Fraction::ratio(1, 2);
        let dist = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("DD", "SS"), half.clone())
            .with(joint("DD", "WW"), half);
        let rep = outer_bound_general::<BigRational>(&dist).unwrap();
        assert_eq!(rep.d3, Some(r(1, 1)));
        assert_eq!(rep.d_min, r(1, 1));
    }

    #[test]
    fn achievable_values() {
        let half = Alpha::ratio(1, 2);
        assert_eq!(
            achievable_gdof::<BigRational>(PolicyId::MatFixed, half).value,
            r(1, 1)
        );
        let lb = achievable_gdof::<BigRational>(PolicyId::Tsm3DdFixedLB, half);
        assert_eq!(lb.value, r(11, 10));
        assert_eq!(lb.optimality, Optimality::LowerBound);
        assert_eq!(
            achievable_gdof::<BigRational>(PolicyId::Tsm4DdAlt, Alpha::ratio(1, 1)).value,
            r(4, 3)
        );
        let f = achievable_gdof::<f64>(PolicyId::Tsm3DdFixedLB, Alpha::ratio(3, 5)).value;
        assert!((f - (1.0 + 0.36 / 2.6)).abs() < 1e-12);
    }

    #[test]
    fn policy_recognition() {
        let half = Fraction::ratio(1, 2);
        let alt = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("DD", "SW"), half.clone())
            .with(joint("DD", "WS"), half.clone());
        assert_eq!(recognize_policy(&alt), Some(PolicyId::Tsm4DdAlt));
        let fixed =
            StateDistribution::empty(Alpha::ratio(1, 2)).with(joint("DD", "WS"), Fraction::one());
        assert_eq!(recognize_policy(&fixed), Some(PolicyId::Tsm3DdFixedLB));
        let tsm1 = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("ND", "SW"), half.clone())
            .with(joint("PN", "SW"), half.clone());
        assert_eq!(recognize_policy(&tsm1), Some(PolicyId::Tsm1NdPn));
        let odd = StateDistribution::empty(Alpha::ratio(1, 2))
            .with(joint("DN", "SW"), half.clone())
            .with(joint("PP", "SS"), half);
        assert_eq!(recognize_policy(&odd), None);
    }

    #[test]
    fn policy_names_round_trip() {
        for p in PolicyId::ALL {
            assert_eq!(p.name().parse::<PolicyId>(), Ok(p));
        }
    }
}
