//! Ordered pattern rules mapping count vectors to integer risk scores.
//!
//! Rules are tried in order and the first match wins; vectors matching no
//! rule get the declared default.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::JointPmf;

/// Condition on one type's count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountPredicate {
    Exact(u32),
    AtLeast(u32),
    AtMost(u32),
    Any,
}

impl CountPredicate {
    pub fn matches(self, x: u32) -> bool {
        match self {
            CountPredicate::Exact(k) => x == k,
            CountPredicate::AtLeast(k) => x >= k,
            CountPredicate::AtMost(k) => x <= k,
            CountPredicate::Any => true,
        }
    }

    fn bound(self) -> Option<u32> {
        match self {
            CountPredicate::Exact(k) | CountPredicate::AtLeast(k) | CountPredicate::AtMost(k) => {
                Some(k)
            }
            CountPredicate::Any => None,
        }
    }
}

impl FromStr for CountPredicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "*" {
            return Ok(CountPredicate::Any);
        }
        let (ctor, rest): (fn(u32) -> CountPredicate, &str) = if let Some(r) = s.strip_prefix("==")
        {
            (CountPredicate::Exact, r)
        } else if let Some(r) = s.strip_prefix(">=") {
            (CountPredicate::AtLeast, r)
        } else if let Some(r) = s.strip_prefix("<=") {
            (CountPredicate::AtMost, r)
        } else {
            return Err(Error::InvalidRule(format!("unrecognised predicate {s:?}")));
        };
        rest.trim()
            .parse()
            .map(ctor)
            .map_err(|_| Error::InvalidRule(format!("bad count in predicate {s:?}")))
    }
}

impl fmt::Display for CountPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountPredicate::Exact(k) => write!(f, "=={k}"),
            CountPredicate::AtLeast(k) => write!(f, ">={k}"),
            CountPredicate::AtMost(k) => write!(f, "<={k}"),
            CountPredicate::Any => f.write_str("*"),
        }
    }
}

impl Serialize for CountPredicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CountPredicate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRule {
    pub pattern: Vec<CountPredicate>,
    pub score: u32,
}

impl ScoreRule {
    pub fn matches(&self, x: &[u32]) -> bool {
        self.pattern.len() == x.len() && self.pattern.iter().zip(x).all(|(p, &xi)| p.matches(xi))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRuleSet {
    pub default: u32,
    #[serde(default)]
    pub rules: Vec<ScoreRule>,
    /// Optional `N_i` per type; predicates are checked against it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_sizes: Option<Vec<usize>>,
}

impl ScoreRuleSet {
    /// Number of types the patterns address, if any rule is present.
    pub fn arity(&self) -> Option<usize> {
        self.rules.first().map(|r| r.pattern.len())
    }

    /// Checks pattern arity and, when sizes are known, that every bound is `≤ N_i`.
    pub fn validate(&self, type_sizes: Option<&[usize]>) -> Result<()> {
        if let Some(arity) = self.arity() {
            if arity == 0 {
                return Err(Error::InvalidRule("empty pattern".into()));
            }
            if let Some(bad) = self.rules.iter().position(|r| r.pattern.len() != arity) {
                return Err(Error::InvalidRule(format!(
                    "rule {bad} has {} predicates, expected {arity}",
                    self.rules[bad].pattern.len()
                )));
            }
        }
        let sizes = type_sizes.or(self.type_sizes.as_deref());
        if let Some(sizes) = sizes {
            if let Some(arity) = self.arity() {
                if arity != sizes.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "rules address {arity} types, counts have {}",
                        sizes.len()
                    )));
                }
            }
            for (i, rule) in self.rules.iter().enumerate() {
                for (t, pred) in rule.pattern.iter().enumerate() {
                    if let Some(k) = pred.bound() {
                        if k as usize > sizes[t] {
                            return Err(Error::InvalidRule(format!(
                                "rule {i}: predicate {pred} exceeds N_{} = {}",
                                t + 1,
                                sizes[t]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Score of the first matching rule, else the default.
    pub fn score(&self, x: &[u32]) -> u32 {
        self.rules
            .iter()
            .find(|r| r.matches(x))
            .map_or(self.default, |r| r.score)
    }
}

/// Parses a rule file: `{"default":0,"rules":[{"pattern":["==0",">=1","*"],"score":4},…]}`.
pub fn parse_rules(text: &str) -> Result<ScoreRuleSet> {
    let rules: ScoreRuleSet =
        serde_json::from_str(text).map_err(|e| Error::InvalidRule(e.to_string()))?;
    rules.validate(None)?;
    Ok(rules)
}

pub fn score_vector(rules: &ScoreRuleSet, x: &[u32]) -> u32 {
    rules.score(x)
}

/// Distribution of the score when the count vector follows `pmf`.
pub fn score_distribution(rules: &ScoreRuleSet, pmf: &JointPmf) -> Result<BTreeMap<u32, f64>> {
    rules.validate(Some(&pmf.type_sizes()))?;
    let mut out = BTreeMap::new();
    for (x, p) in pmf.iter() {
        let x: Vec<u32> = x.iter().map(|&c| c as u32).collect();
        *out.entry(rules.score(&x)).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Expected score under `pmf`.
pub fn expected_score(rules: &ScoreRuleSet, pmf: &JointPmf) -> Result<f64> {
    Ok(score_distribution(rules, pmf)?
        .iter()
        .map(|(&s, &p)| f64::from(s) * p)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNCHROPHASOR: &str = include_str!("../data/synchrophasor_rules.json");

    #[test]
    fn predicates_parse() {
        assert_eq!(
            "==3".parse::<CountPredicate>().unwrap(),
            CountPredicate::Exact(3)
        );
        assert_eq!(
            ">= 1".parse::<CountPredicate>().unwrap(),
            CountPredicate::AtLeast(1)
        );
        assert_eq!(
            "<=0".parse::<CountPredicate>().unwrap(),
            CountPredicate::AtMost(0)
        );
        assert_eq!("*".parse::<CountPredicate>().unwrap(), CountPredicate::Any);
        assert!("=3".parse::<CountPredicate>().is_err());
        assert!(">=x".parse::<CountPredicate>().is_err());
    }

    #[test]
    fn synchrophasor_table() {
        let rules = parse_rules(SYNCHROPHASOR).unwrap();
        let levels: std::collections::BTreeSet<u32> = rules.rules.iter().map(|r| r.score).collect();
        assert_eq!(
            levels.into_iter().collect::<Vec<_>>(),
            vec![0, 1, 2, 3, 4, 5]
        );
        assert_eq!(rules.score(&[0, 0, 0]), 0);
        assert_eq!(rules.score(&[4, 1, 0]), 5);
        assert_eq!(rules.score(&[2, 0, 0]), 2);
        assert_eq!(rules.score(&[4, 0, 0]), 4);
    }

    #[test]
    fn constant_scorer() {
        let rules = parse_rules(r#"{"default":0,"rules":[]}"#).unwrap();
        assert_eq!(rules.score(&[3, 1]), 0);
        assert!(parse_rules(r#"{"rules":[]}"#).is_err());
    }

    #[test]
    fn bound_exceeding_type_size_is_rejected() {
        let text =
            r#"{"default":0,"type_sizes":[5,2],"rules":[{"pattern":[">=7","*"],"score":1}]}"#;
        assert!(matches!(parse_rules(text), Err(Error::InvalidRule(_))));
        let rules =
            parse_rules(r#"{"default":0,"rules":[{"pattern":[">=7","*"],"score":1}]}"#).unwrap();
        assert!(rules.validate(Some(&[5, 2])).is_err());
        let ragged = r#"{"default":0,"rules":[{"pattern":["*"],"score":1},{"pattern":["*","*"],"score":2}]}"#;
        assert!(parse_rules(ragged).is_err());
    }

    #[test]
    fn first_match_wins() {
        let a = parse_rules(
            r#"{"default":0,"rules":[{"pattern":[">=1"],"score":1},{"pattern":[">=2"],"score":2}]}"#,
        )
        .unwrap();
        let mut b = a.clone();
        b.rules.reverse();
        assert_eq!(a.score(&[3]), 1);
        assert_eq!(b.score(&[3]), 2);
    }

    #[test]
    fn distributions() {
        let rules = parse_rules(SYNCHROPHASOR).unwrap();
        let origin = JointPmf::point_mass(&[5, 2, 2], &[0, 0, 0]);
        let dist = score_distribution(&rules, &origin).unwrap();
        assert_eq!(dist.get(&0), Some(&1.0));

        let uniform =
            JointPmf::from_cells(&[5, 2, 2], [(&[1, 0, 0][..], 0.5), (&[0, 0, 1][..], 0.5)])
                .unwrap();
        let dist = score_distribution(&rules, &uniform).unwrap();
        assert_eq!((dist[&1], dist[&5]), (0.5, 0.5));

        let two_type = JointPmf::zeros(&[2, 3]);
        assert!(score_distribution(&rules, &two_type).is_err());
    }
}
