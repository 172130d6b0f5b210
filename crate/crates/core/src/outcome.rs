//! Result types shared by the closed-form solvers and the oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{payoffs, Action, ArrivalProfile, FlockKind};
use crate::numfmt;
use crate::params::GameParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Game {
    Continuous,
    Discrete,
    StrictFlocking,
}

/// The theorem branch that produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    Ct1,
    Ct21a,
    Ct21b,
    Ct22a,
    Ct22b,
    Ct23a,
    Ct23b,
    Dt1,
    Dt2,
    Dt31a,
    Dt31b,
    Dt31c,
    Dt32a,
    Dt32b,
    Dt32c,
    SfgCoop,
    SfgDeter,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 17] = [
        CaseLabel::Ct1,
        CaseLabel::Ct21a,
        CaseLabel::Ct21b,
        CaseLabel::Ct22a,
        CaseLabel::Ct22b,
        CaseLabel::Ct23a,
        CaseLabel::Ct23b,
        CaseLabel::Dt1,
        CaseLabel::Dt2,
        CaseLabel::Dt31a,
        CaseLabel::Dt31b,
        CaseLabel::Dt31c,
        CaseLabel::Dt32a,
        CaseLabel::Dt32b,
        CaseLabel::Dt32c,
        CaseLabel::SfgCoop,
        CaseLabel::SfgDeter,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            CaseLabel::Ct1 => "CT-1",
            CaseLabel::Ct21a => "CT-2.1.a",
            CaseLabel::Ct21b => "CT-2.1.b",
            CaseLabel::Ct22a => "CT-2.2.a",
            CaseLabel::Ct22b => "CT-2.2.b",
            CaseLabel::Ct23a => "CT-2.3.a",
            CaseLabel::Ct23b => "CT-2.3.b",
            CaseLabel::Dt1 => "DT-1",
            CaseLabel::Dt2 => "DT-2",
            CaseLabel::Dt31a => "DT-3.1.a",
            CaseLabel::Dt31b => "DT-3.1.b",
            CaseLabel::Dt31c => "DT-3.1.c",
            CaseLabel::Dt32a => "DT-3.2.a",
            CaseLabel::Dt32b => "DT-3.2.b",
            CaseLabel::Dt32c => "DT-3.2.c",
            CaseLabel::SfgCoop => "SFG-coop",
            CaseLabel::SfgDeter => "SFG-deter",
        }
    }

    pub fn game(&self) -> Game {
        match self {
            CaseLabel::Ct1
            | CaseLabel::Ct21a
            | CaseLabel::Ct21b
            | CaseLabel::Ct22a
            | CaseLabel::Ct22b
            | CaseLabel::Ct23a
            | CaseLabel::Ct23b => Game::Continuous,
            CaseLabel::SfgCoop | CaseLabel::SfgDeter => Game::StrictFlocking,
            _ => Game::Discrete,
        }
    }

    pub fn of_game(game: Game) -> impl Iterator<Item = CaseLabel> {
        CaseLabel::ALL.into_iter().filter(move |c| c.game() == game)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseLabel::ALL
            .into_iter()
            .find(|c| c.code() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown case label {s:?}")))
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for CaseLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Equilibrium shape, numbered per game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum SpeType {
    CT1,
    CT2,
    CT3,
    DT1,
    DT2,
    DT3,
    DT4,
    DT5,
    #[serde(rename = "SFG_COOP")]
    SfgCoop,
    #[serde(rename = "SFG_DETER")]
    SfgDeter,
}

/// One equilibrium outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeOutcome {
    pub t1: Action,
    pub t2: Action,
    /// `None` for oracle outcomes, which are never labelled with a theorem type.
    #[serde(rename = "type")]
    pub type_tag: Option<SpeType>,
    pub flock: FlockKind,
    #[serde(serialize_with = "numfmt::serialize")]
    pub u1: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub u2: f64,
    /// Offsets `t = t_o - k` for discrete-time outcomes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<i64>,
}

impl SpeOutcome {
    /// Builds an outcome with utilities and flock kind recomputed from the
    /// utility model.
    pub fn evaluate(profile: ArrivalProfile, type_tag: Option<SpeType>, params: &GameParams) -> Self {
        let (u1, u2) = payoffs(&profile, params);
        SpeOutcome {
            t1: Action::Exact(profile.t1),
            t2: profile.t2,
            type_tag,
            flock: FlockKind::of(&profile, params.w),
            u1,
            u2,
            k1: None,
            k2: None,
        }
    }

    pub fn with_offsets(mut self, k1: i64, k2: i64) -> Self {
        self.k1 = Some(k1);
        self.k2 = Some(k2);
        self
    }

    pub fn profile(&self) -> ArrivalProfile {
        ArrivalProfile::new(self.t1.time(), self.t2)
    }

    pub fn leader_time(&self) -> f64 {
        self.t1.time()
    }

    pub fn follower_time(&self) -> f64 {
        self.t2.time()
    }

    pub(crate) fn sort_key(a: &SpeOutcome, b: &SpeOutcome) -> std::cmp::Ordering {
        a.t1
            .cmp_arrival(&b.t1)
            .then_with(|| a.t2.cmp_arrival(&b.t2))
    }

    /// Checks the outcome's stored flock kind and utilities against the
    /// utility model, within `tol` on the utilities.
    pub fn check_consistency(&self, params: &GameParams, tol: f64) -> std::result::Result<(), String> {
        let profile = self.profile();
        let flock = FlockKind::of(&profile, params.w);
        if flock != self.flock {
            return Err(format!("flock {:?} but profile gives {:?}", self.flock, flock));
        }
        let (u1, u2) = payoffs(&profile, params);
        if (u1 - self.u1).abs() > tol || (u2 - self.u2).abs() > tol {
            return Err(format!(
                "utilities ({}, {}) but profile gives ({u1}, {u2})",
                self.u1, self.u2
            ));
        }
        Ok(())
    }
}

/// Follower responses tied at an equilibrium leader time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiedResponses {
    pub t1: Action,
    pub responses: Vec<Action>,
    #[serde(serialize_with = "numfmt::serialize")]
    pub u2: f64,
}

/// Branch evidence attached to every closed-form result.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(serialize_with = "numfmt::serialize_map")]
    pub tipping_points: BTreeMap<String, f64>,
    #[serde(serialize_with = "numfmt::serialize_map")]
    pub condition_values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub follower_ties: Vec<TiedResponses>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub(crate) fn condition(&mut self, key: &str, value: f64) {
        self.condition_values.insert(key.to_string(), value);
    }

    pub(crate) fn tipping(&mut self, key: &str, value: f64) {
        self.tipping_points.insert(key.to_string(), value);
    }

    pub(crate) fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

/// Equilibrium set for one parameter instance. An empty outcome list means
/// no pure-strategy equilibrium exists in the reported branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeResult {
    pub case: CaseLabel,
    #[serde(serialize_with = "numfmt::serialize")]
    pub t_o: f64,
    pub outcomes: Vec<SpeOutcome>,
    pub diagnostics: Diagnostics,
}

impl SpeResult {
    pub(crate) fn new(case: CaseLabel, t_o: f64, mut outcomes: Vec<SpeOutcome>, diagnostics: Diagnostics) -> Self {
        outcomes.sort_by(SpeOutcome::sort_key);
        SpeResult {
            case,
            t_o,
            outcomes,
            diagnostics,
        }
    }

    pub fn exists(&self) -> bool {
        !self.outcomes.is_empty()
    }

    pub fn is_unique(&self) -> bool {
        self.outcomes.len() == 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))
    }

    /// Module invariants that survive a serialization round trip: sorted
    /// outcomes, consistent flock kinds and utilities, and no arrival after
    /// `t_o`.
    pub fn validate_invariants(&self, params: &GameParams) -> std::result::Result<(), String> {
        // flock and risk are judged under the window the result was solved with
        let effective = match self.case.game() {
            Game::StrictFlocking => params.with_window(0.0),
            _ => *params,
        };
        for pair in self.outcomes.windows(2) {
            if SpeOutcome::sort_key(&pair[0], &pair[1]) == std::cmp::Ordering::Greater {
                return Err("outcomes not sorted by (t1, t2)".into());
            }
        }
        for o in &self.outcomes {
            o.check_consistency(&effective, 1e-9)?;
            if o.leader_time() > params.t_o + 1e-9 || o.follower_time() > params.t_o + 1e-9 {
                return Err(format!("arrival after t_o in {o:?}"));
            }
            if let Some(tag) = o.type_tag {
                let expected = match self.case.game() {
                    Game::Continuous => matches!(tag, SpeType::CT1 | SpeType::CT2 | SpeType::CT3),
                    Game::Discrete => matches!(
                        tag,
                        SpeType::DT1 | SpeType::DT2 | SpeType::DT3 | SpeType::DT4 | SpeType::DT5
                    ),
                    Game::StrictFlocking => matches!(tag, SpeType::SfgCoop | SpeType::SfgDeter),
                };
                if !expected {
                    return Err(format!("type {tag:?} does not belong to case {}", self.case));
                }
            }
        }
        if !self.exists() && !matches!(self.case, CaseLabel::Ct21b | CaseLabel::Ct22b | CaseLabel::Ct23b) {
            return Err(format!("empty outcome list in branch {}", self.case));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_codes_round_trip() {
        for case in CaseLabel::ALL {
            assert_eq!(case.code().parse::<CaseLabel>().unwrap(), case);
            let json = serde_json::to_string(&case).unwrap();
            assert_eq!(serde_json::from_str::<CaseLabel>(&json).unwrap(), case);
        }
        assert!("CT-9".parse::<CaseLabel>().is_err());
        assert_eq!(CaseLabel::of_game(Game::Discrete).count(), 8);
        assert_eq!(CaseLabel::of_game(Game::Continuous).count(), 7);
    }

    #[test]
    fn outcome_json_shape() {
        let p = GameParams::new(4.5, 4.0, 5.0, 3.0, 2.0, 10.0).unwrap();
        let o = SpeOutcome::evaluate(ArrivalProfile::exact(8.0, 9.0), Some(SpeType::DT3), &p)
            .with_offsets(2, 1);
        let v: serde_json::Value = serde_json::to_value(&o).unwrap();
        assert_eq!(v["t1"], 8.0);
        assert_eq!(v["type"], "DT3");
        assert_eq!(v["flock"], "Flock");
        assert_eq!(v["k1"], 2);
        assert_eq!(v["u2"], 1.75);
    }
}
