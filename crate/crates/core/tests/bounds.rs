use num_rational::BigRational;
use proptest::prelude::*;
use topo_bc::bounds::{outer_bound_general, outer_bounds, BoundReport};
use topo_bc::state::{joint, Alpha, Fraction, JointState, StateDistribution, TopologyState};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn dist(alpha: Alpha, parts: &[(&str, &str, i64, i64)]) -> StateDistribution {
    let mut d = StateDistribution::empty(alpha);
    for &(c, t, n, den) in parts {
        d = d.with(joint(c, t), Fraction::ratio(n, den));
    }
    d
}

fn d_min(d: &StateDistribution) -> BigRational {
    outer_bounds::<BigRational>(d).unwrap().d_min
}

#[test]
fn propositions_match_exactly_on_the_alpha_grid() {
    for k in 0..=10 {
        let alpha = Alpha::ratio(k, 10);
        let a = alpha.exact();
        let one = r(1, 1);
        let cases: [(&str, StateDistribution, BigRational); 7] = [
            (
                "perfect CSIT",
                dist(alpha, &[("PP", "SW", 1, 1)]),
                one.clone() + a.clone(),
            ),
            (
                "ND/PN",
                dist(alpha, &[("ND", "SW", 1, 2), ("PN", "SW", 1, 2)]),
                one.clone() + a.clone() * r(1, 2),
            ),
            (
                "PD/NN",
                dist(alpha, &[("PD", "SW", 1, 2), ("NN", "SW", 1, 2)]),
                one.clone() + a.clone() * r(1, 2),
            ),
            (
                "PN/NP diverse",
                dist(
                    alpha,
                    &[
                        ("PN", "SW", 1, 4),
                        ("NP", "SW", 1, 4),
                        ("PN", "WS", 1, 4),
                        ("NP", "WS", 1, 4),
                    ],
                ),
                one.clone() + a.clone() * r(1, 2),
            ),
            (
                "DD alternating",
                dist(alpha, &[("DD", "SW", 1, 2), ("DD", "WS", 1, 2)]),
                one.clone() + a.clone() * r(1, 3),
            ),
            (
                "DD non-diverse",
                dist(alpha, &[("DD", "SS", 1, 2), ("DD", "WW", 1, 2)]),
                (one.clone() + a.clone()) * r(2, 3),
            ),
            (
                "PN/NP non-diverse",
                dist(
                    alpha,
                    &[
                        ("PN", "SS", 1, 4),
                        ("NP", "SS", 1, 4),
                        ("PN", "WW", 1, 4),
                        ("NP", "WW", 1, 4),
                    ],
                ),
                (one.clone() + a.clone()) * r(3, 4),
            ),
        ];
        for (label, d, expected) in cases {
            assert_eq!(d_min(&d), expected, "{label} at alpha={alpha}");
        }
    }
}

#[test]
fn fixed_delayed_csit_bound_sits_above_the_lower_bound() {
    let alpha = Alpha::ratio(3, 5);
    let d = dist(alpha, &[("DD", "SW", 1, 1)]);
    assert_eq!(d_min(&d), r(6, 5));
}

const TOPOLOGIES: [&str; 4] = ["SW", "WS", "SS", "WW"];
const CSIT: [&str; 9] = ["PP", "PD", "PN", "DP", "DD", "DN", "NP", "ND", "NN"];

/// Random distribution with integer weights over a random subset of states.
fn random_dist(weights: &[u32], alpha_num: i64, topologies: &[&str]) -> Option<StateDistribution> {
    let states: Vec<JointState> = topologies
        .iter()
        .flat_map(|t| CSIT.iter().map(move |c| joint(c, t)))
        .collect();
    let total: u32 = weights.iter().take(states.len()).sum();
    if total == 0 {
        return None;
    }
    let mut d = StateDistribution::empty(Alpha::ratio(alpha_num, 20));
    for (s, &w) in states.iter().zip(weights) {
        if w > 0 {
            d = d.with(*s, Fraction::ratio(w as i64, total as i64));
        }
    }
    Some(d)
}

fn close(a: &Option<f64>, b: &Option<f64>) -> bool {
    matches!((a, b), (Some(x), Some(y)) if (x - y).abs() <= 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn general_bounds_are_nonnegative(
        weights in proptest::collection::vec(prop_oneof![3 => Just(0u32), 2 => 1u32..50], 36),
        alpha_num in 0i64..=20,
    ) {
        let Some(d) = random_dist(&weights, alpha_num, &TOPOLOGIES) else { return Ok(()) };
        let exact = outer_bound_general::<BigRational>(&d).unwrap();
        let zero = r(0, 1);
        prop_assert!(exact.d3.unwrap() >= zero);
        prop_assert!(exact.d4.unwrap() >= zero);
        let float = outer_bound_general::<f64>(&d).unwrap();
        prop_assert!(float.d3.unwrap() >= 0.0 && float.d4.unwrap() >= 0.0);
    }

    #[test]
    fn general_bounds_reduce_to_fixed_topology(
        weights in proptest::collection::vec(prop_oneof![1 => Just(0u32), 2 => 1u32..50], 9),
        alpha_num in 0i64..=20,
        uneven in 0usize..2,
    ) {
        let topo = TOPOLOGIES[uneven];
        let Some(d) = random_dist(&weights, alpha_num, &[topo]) else { return Ok(()) };
        let expected = if uneven == 0 { TopologyState::STRONG_WEAK } else { TopologyState::WEAK_STRONG };
        prop_assert_eq!(d.fixed_topology(), Some(expected));
        let both: BoundReport<f64> = outer_bounds::<f64>(&d).unwrap();
        prop_assert!(close(&both.d3, &both.d1), "{:?}", both);
        prop_assert!(close(&both.d4, &both.d2), "{:?}", both);
        let exact = outer_bounds::<BigRational>(&d).unwrap();
        prop_assert_eq!(exact.d3, exact.d1);
        prop_assert_eq!(exact.d4, exact.d2);
    }
}
