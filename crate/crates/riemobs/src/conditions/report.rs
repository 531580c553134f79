//! Check outcomes in a serializable form.

use serde::{Deserialize, Serialize};

/// Outcome of a sampled check. `Inconclusive` marks runs where too many
/// samples failed to produce evidence either way (for example geodesic
/// solves that did not converge).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Worst sample found by a checker: the point and the direction (tangent
/// vector) realizing the reported margin.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
}

/// Result of one condition check over a sampled region.
///
/// `margin` is the worst-case figure of merit (estimated decay rate for the
/// detectability check, largest block norm for nullity checks, most
/// negative derivative for the direct monotonicity probe). A vacuously
/// satisfied condition reports `margin: None`, serialized as JSON `null`
/// and meaning "+infinity".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub verdict: Verdict,
    pub margin: Option<f64>,
    pub witness: Option<Witness>,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Samples that produced no evidence (solver non-convergence); omitted
    /// from the JSON when zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inconclusive: Option<usize>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// One-line human-readable rendering used by the CLI table.
    pub fn summary_line(&self) -> String {
        let verdict = match self.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "inconclusive",
        };
        let margin = match self.margin {
            Some(m) => format!("{m:.6e}"),
            None => "+inf".to_string(),
        };
        let witness = match &self.witness {
            Some(w) => format!(
                " witness=[{}]",
                w.point
                    .iter()
                    .map(|v| format!("{v:.6}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            None => String::new(),
        };
        format!(
            "{:<14} {:<12} margin={} samples={}{}",
            self.condition, verdict, margin, self.samples, witness
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips_through_json() {
        let r = ConditionReport {
            condition: "a2".into(),
            verdict: Verdict::Pass,
            margin: Some(0.25),
            witness: Some(Witness {
                point: vec![1.0, 2.0],
                direction: vec![0.0, 1.0],
            }),
            samples: 512,
            seed: 3,
            tolerance: 1e-6,
            inconclusive: None,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"verdict\":\"pass\""));
        assert!(!s.contains("inconclusive"));
        let back: ConditionReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.verdict, Verdict::Pass);
        assert_eq!(back.margin, Some(0.25));
    }

    #[test]
    fn vacuous_margin_serializes_null() {
        let r = ConditionReport {
            condition: "a2".into(),
            verdict: Verdict::Pass,
            margin: None,
            witness: None,
            samples: 0,
            seed: 0,
            tolerance: 0.0,
            inconclusive: None,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"margin\":null"));
    }
}
