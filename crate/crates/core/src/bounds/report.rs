//! Verdict records produced by the numeric soundness checks.

use std::fmt;

/// Expected relation between the measured left side and the reference
/// right side of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// lhs >= rhs expected.
    Geq,
    /// lhs <= rhs expected.
    Leq,
    /// lhs == rhs expected within noise.
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Geq => ">=",
            Relation::Leq => "<=",
            Relation::Eq => "==",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Consistent with the relation: on the right side, or within noise of it.
    Holds,
    /// Beyond four standard errors on the wrong side.
    Violated,
    /// The verdict cannot be trusted (non-finite data, unreliable estimate).
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of a single inequality or equality check.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub name: String,
    pub relation: Relation,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    /// Signed distance from the boundary in standard errors; positive means
    /// the relation holds with room to spare. Infinite when stderr is zero.
    pub margin_sigmas: f64,
    pub verdict: Verdict,
    pub note: String,
}

/// Violations must clear this many standard errors before they are reported
/// as real rather than as noise.
pub const SIGMA_GATE: f64 = 4.0;

impl BoundReport {
    /// Check lhs >= rhs where lhs carries Monte Carlo noise.
    pub fn geq(name: impl Into<String>, lhs: f64, lhs_stderr: f64, rhs: f64) -> Self {
        Self::one_sided(name.into(), Relation::Geq, lhs, lhs_stderr, rhs)
    }

    /// Check lhs <= rhs where lhs carries Monte Carlo noise.
    pub fn leq(name: impl Into<String>, lhs: f64, lhs_stderr: f64, rhs: f64) -> Self {
        Self::one_sided(name.into(), Relation::Leq, lhs, lhs_stderr, rhs)
    }

    fn one_sided(name: String, relation: Relation, lhs: f64, lhs_stderr: f64, rhs: f64) -> Self {
        let raw = match relation {
            Relation::Geq => lhs - rhs,
            _ => rhs - lhs,
        };
        let sigmas = if lhs_stderr > 0.0 {
            raw / lhs_stderr
        } else if raw == 0.0 {
            0.0
        } else {
            raw.signum() * f64::INFINITY
        };
        let verdict = if !raw.is_finite() {
            Verdict::Inconclusive
        } else if sigmas >= -SIGMA_GATE {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        BoundReport {
            name,
            relation,
            lhs,
            lhs_stderr,
            rhs,
            margin_sigmas: sigmas,
            verdict,
            note: String::new(),
        }
    }

    /// Check lhs == rhs within four standard errors.
    pub fn eq(name: impl Into<String>, lhs: f64, lhs_stderr: f64, rhs: f64) -> Self {
        let raw = lhs - rhs;
        let sigmas = if lhs_stderr > 0.0 {
            raw / lhs_stderr
        } else if raw == 0.0 {
            0.0
        } else {
            raw.signum() * f64::INFINITY
        };
        let verdict = if !raw.is_finite() {
            Verdict::Inconclusive
        } else if sigmas.abs() <= SIGMA_GATE {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        BoundReport {
            name: name.into(),
            relation: Relation::Eq,
            lhs,
            lhs_stderr,
            rhs,
            margin_sigmas: sigmas,
            verdict,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Downgrade to inconclusive when the underlying estimate is suspect
    /// (for example too many trapped trajectories).
    pub fn mark_unreliable(mut self, reason: impl Into<String>) -> Self {
        if self.verdict != Verdict::Violated {
            self.verdict = Verdict::Inconclusive;
        }
        let reason = reason.into();
        if self.note.is_empty() {
            self.note = reason;
        } else {
            self.note = format!("{}; {}", self.note, reason);
        }
        self
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {:.6e} {} {:.6e} ({}, {:+.2} sigma)",
            self.name,
            self.lhs,
            self.relation.symbol(),
            self.rhs,
            self.verdict.as_str(),
            self.margin_sigmas
        )
    }
}
