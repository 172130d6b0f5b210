use std::cmp::Ordering;

/// Absolute tolerance used to declare two utilities tied.
pub const EPS_TIE: f64 = 1e-9;

/// Relative tolerance used to decide branch-condition equalities.
pub const EPS_COND: f64 = 1e-9;

/// Comparison tolerances shared by the solvers and the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute utility tie tolerance.
    pub tie: f64,
    /// Relative tolerance for branch-boundary equalities.
    pub cond: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tie: EPS_TIE,
            cond: EPS_COND,
        }
    }
}

impl Tolerances {
    /// Three-way comparison that reports `Equal` when `a` and `b` agree to
    /// within `cond` relative to `max(1, |a|, |b|)`.
    pub fn cmp_cond(&self, a: f64, b: f64) -> Ordering {
        let scale = 1f64.max(a.abs()).max(b.abs());
        if (a - b).abs() <= self.cond * scale {
            Ordering::Equal
        } else if a < b {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn tied(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tie
    }

    /// Ceiling that snaps values within `cond` of an integer onto it first.
    pub fn snapped_ceil(&self, x: f64) -> f64 {
        let nearest = x.round();
        if self.cmp_cond(x, nearest) == Ordering::Equal {
            nearest
        } else {
            x.ceil()
        }
    }
}
