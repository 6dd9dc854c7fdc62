use topo_bc::channel::SnrPoint;
use topo_bc::harness::{measure_rates, SweepConfig};
use topo_bc::rng::TrialKey;
use topo_bc::schemes::{Fidelity, Registry, TrialContext};
use topo_bc::state::Alpha;

const SIDE_INFO_SCHEMES: [&str; 4] = ["tsm3", "tsm4", "tsm4r", "tsm4-mix"];

fn alphas() -> Vec<Alpha> {
    vec![
        Alpha::ratio(1, 4),
        Alpha::ratio(1, 2),
        Alpha::ratio(3, 4),
        Alpha::ratio(1, 1),
    ]
}

#[test]
fn xor_round_trip_is_exact_without_noise() {
    let registry = Registry::standard();
    for name in SIDE_INFO_SCHEMES {
        let scheme = registry.get(name).unwrap();
        for alpha in alphas() {
            for db in [30.0, 60.0] {
                for trial in 0..50 {
                    let ctx =
                        TrialContext::new(alpha, SnrPoint::from_db(db), TrialKey::new(7, 0, trial))
                            .bit_level(true);
                    let out = scheme.run_trial(&ctx).unwrap();
                    let side = out.side_info.expect("side information");
                    assert_eq!(
                        side.recovered,
                        [true, true],
                        "{name} alpha={alpha} {db} dB trial {trial}"
                    );
                    assert_eq!(side.bit_errors, 0);
                }
            }
        }
    }
}

fn error_power(name: &str, alpha: Alpha, db: f64) -> f64 {
    let registry = Registry::standard();
    let mut cfg = SweepConfig::new(alpha);
    cfg.snr_db = vec![db, db + 1.0];
    cfg.trials = 400;
    cfg.fidelity = Fidelity::BitLevel;
    let points = measure_rates(registry.get(name).unwrap(), &cfg).unwrap();
    points[0].side.as_ref().unwrap().mean_error_power
}

#[test]
fn reconstruction_error_does_not_grow_with_snr() {
    for name in ["tsm3", "tsm4"] {
        for alpha in alphas() {
            let errs: Vec<f64> = [30.0, 40.0, 50.0, 60.0, 70.0, 80.0]
                .iter()
                .map(|&db| error_power(name, alpha, db))
                .collect();
            let max = errs.iter().cloned().fold(f64::MIN, f64::max);
            let min = errs.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max / min < 2.0, "{name} alpha={alpha}: {errs:?}");
        }
    }
}
