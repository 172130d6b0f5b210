use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_window() -> f64 {
    1.0
}

/// One instance of the two-agent game.
///
/// Agent 1 is the stronger agent and moves first; territory 1 is the better
/// one. Serialized as a flat JSON object; `w` defaults to 1 and the fixed
/// travel-cost offsets default to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    pub beta1: f64,
    pub beta2: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    pub r: f64,
    pub t_o: f64,
    #[serde(default = "default_window")]
    pub w: f64,
    #[serde(default)]
    pub c_o1: f64,
    #[serde(default)]
    pub c_o2: f64,
}

impl GameParams {
    /// Builds and validates a parameter set with a unit window and zero
    /// fixed costs.
    pub fn new(beta1: f64, beta2: f64, e1: f64, e2: f64, r: f64, t_o: f64) -> Result<Self> {
        let params = GameParams {
            beta1,
            beta2,
            e1,
            e2,
            r,
            t_o,
            w: 1.0,
            c_o1: 0.0,
            c_o2: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let params: GameParams =
            serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("flat numeric struct always serializes")
    }

    /// Territory gap `E1 - E2`.
    pub fn delta_e(&self) -> f64 {
        self.e1 - self.e2
    }

    /// Same instance with `E1` moved so that the territory gap equals `delta`.
    pub fn with_delta_e(&self, delta: f64) -> Self {
        GameParams {
            e1: self.e2 + delta,
            ..*self
        }
    }

    pub fn with_window(&self, w: f64) -> Self {
        GameParams { w, ..*self }
    }

    /// `r = 0` removes any incentive to flock; accepted but reported.
    pub fn is_degenerate(&self) -> bool {
        self.r == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("E1", self.e1),
            ("E2", self.e2),
            ("r", self.r),
            ("t_o", self.t_o),
            ("w", self.w),
            ("c_o1", self.c_o1),
            ("c_o2", self.c_o2),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} must be finite")));
        }
        if self.beta2 <= 0.0 {
            return Err(Error::InvalidParams("beta2 must be positive".into()));
        }
        if self.beta1 <= self.beta2 {
            return Err(Error::InvalidParams(
                "beta1 > beta2 required (agent 1 is the stronger agent)".into(),
            ));
        }
        if self.e2 <= 0.0 {
            return Err(Error::InvalidParams("E2 must be positive".into()));
        }
        if self.e1 <= self.e2 {
            return Err(Error::InvalidParams(
                "E1 > E2 required (territory 1 is the better one)".into(),
            ));
        }
        if self.r < 0.0 {
            return Err(Error::InvalidParams("r must be non-negative".into()));
        }
        if self.w < 0.0 {
            return Err(Error::InvalidParams("w must be non-negative".into()));
        }
        Ok(())
    }

    /// The closed-form results are stated for a unit window only.
    pub fn require_unit_window(&self) -> Result<()> {
        if (self.w - 1.0).abs() > 1e-12 {
            return Err(Error::UnsupportedWindow(self.w));
        }
        Ok(())
    }
}
