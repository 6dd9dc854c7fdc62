//! JSON distribution files.
//!
//! ```json
//! {"alpha": "1/2", "states": [{"csit": "PN", "topology": "SW", "fraction": 0.5}]}
//! ```

use std::collections::BTreeSet;

use serde::Deserialize;
use thiserror::Error;

use super::ratio::{parse_alpha, parse_fraction, Fraction};
use super::{
    validate_distribution, CsitState, JointState, StateDistribution, TopologyState, ViolationReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("{0}")]
    Invalid(#[from] ViolationReport),
}

/// A validated distribution plus whether `alpha` was kept exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDistribution {
    pub dist: StateDistribution,
    pub alpha_exact: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    csit: String,
    topology: String,
    fraction: Number,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    alpha: Number,
    states: Vec<RawState>,
}

pub fn parse_distribution_json(text: &str) -> Result<ParsedDistribution, ConfigError> {
    let raw: RawDistribution = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let field_err = |field: String, message: String| ConfigError::Field { field, message };
    let alpha = match &raw.alpha {
        Number::Float(x) => parse_alpha(&format!("{x}")),
        Number::Text(s) => parse_alpha(s),
    }
    .map_err(|m| field_err("alpha".into(), m))?;

    let mut seen = BTreeSet::new();
    let mut dist = StateDistribution::empty(alpha.alpha);
    for (i, state) in raw.states.iter().enumerate() {
        let csit: CsitState = state
            .csit
            .parse()
            .map_err(|m| field_err(format!("states[{i}].csit"), m))?;
        let topology: TopologyState = state
            .topology
            .parse()
            .map_err(|m| field_err(format!("states[{i}].topology"), m))?;
        let fraction = match &state.fraction {
            Number::Float(x) => Ok(Fraction::from_f64(*x)),
            Number::Text(s) => parse_fraction(s),
        }
        .map_err(|m| field_err(format!("states[{i}].fraction"), m))?;
        let joint = JointState::new(csit, topology);
        if !seen.insert(joint) {
            return Err(field_err(
                format!("states[{i}]"),
                format!("duplicate state {joint}"),
            ));
        }
        dist = dist.with(joint, fraction);
    }
    validate_distribution(&dist)?;
    Ok(ParsedDistribution {
        dist,
        alpha_exact: alpha.exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{joint, Alpha, Constraint};

    #[test]
    fn reads_the_documented_format() {
        let text = r#"{"alpha": "1/2", "states": [
            {"csit": "PN", "topology": "SW", "fraction": 0.5},
            {"csit": "NP", "topology": "SW", "fraction": "1/2"}]}"#;
        let parsed = parse_distribution_json(text).unwrap();
        assert!(parsed.alpha_exact);
        assert_eq!(parsed.dist.alpha(), Alpha::ratio(1, 2));
        assert_eq!(
            parsed.dist.fraction(joint("NP", "SW")),
            Fraction::ratio(1, 2)
        );
    }

    #[test]
    fn decimal_alpha() {
        let text = r#"{"alpha": 0.6, "states": [{"csit": "DD", "topology": "SW", "fraction": 1}]}"#;
        let parsed = parse_distribution_json(text).unwrap();
        assert_eq!(parsed.dist.alpha(), Alpha::ratio(3, 5));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_distribution_json("{\"alpha\": 0.5,\n \"states\": [}").unwrap_err();
        assert!(
            matches!(err, ConfigError::Syntax { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn bad_letters_name_the_field() {
        let text = r#"{"alpha": 0.5, "states": [{"csit": "PQ", "topology": "SW", "fraction": 1}]}"#;
        match parse_distribution_json(text).unwrap_err() {
            ConfigError::Field { field, .. } => assert_eq!(field, "states[0].csit"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_are_rejected() {
        let text = r#"{"alpha": 0.5, "states": [
            {"csit": "PN", "topology": "SW", "fraction": 0.5},
            {"csit": "PN", "topology": "SW", "fraction": 0.5}]}"#;
        assert!(matches!(
            parse_distribution_json(text),
            Err(ConfigError::Field { .. })
        ));
    }

    #[test]
    fn sum_violation_is_reported() {
        let text = r#"{"alpha": 0.5, "states": [
            {"csit": "PN", "topology": "SW", "fraction": 0.5},
            {"csit": "NP", "topology": "SW", "fraction": 0.6}]}"#;
        match parse_distribution_json(text).unwrap_err() {
            ConfigError::Invalid(report) => {
                assert_eq!(report.violations[0].constraint, Constraint::UnitSum)
            }
            other => panic!("{other:?}"),
        }
    }
}
