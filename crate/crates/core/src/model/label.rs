use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fast,
    Slow,
}

impl Label {
    /// Numeric target: 1 for fast (the positive class), 0 for slow.
    pub fn as_target(self) -> f64 {
        match self {
            Label::Fast => 1.0,
            Label::Slow => 0.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Fast => "fast",
            Label::Slow => "slow",
        })
    }
}

/// Response-time thresholds in days. Delays strictly between the two are
/// left unlabeled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelConfig {
    pub fast_below_days: f64,
    pub slow_above_days: f64,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig { fast_below_days: 2.0, slow_above_days: 14.0 }
    }
}

impl LabelConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.fast_below_days.is_finite() && self.slow_above_days.is_finite()) {
            return Err("label thresholds must be finite".into());
        }
        if self.fast_below_days >= self.slow_above_days {
            return Err(format!(
                "fast threshold ({}) must be below slow threshold ({})",
                self.fast_below_days, self.slow_above_days
            ));
        }
        Ok(())
    }
}

pub fn label(delay_days: f64, cfg: &LabelConfig) -> Option<Label> {
    if delay_days < cfg.fast_below_days {
        Some(Label::Fast)
    } else if delay_days > cfg.slow_above_days {
        Some(Label::Slow)
    } else {
        None
    }
}

/// Label for a right-censored delay: the dependent had not adopted by the
/// horizon, so the true delay is at least `delay_days`. Only a slow label
/// can be assigned with certainty.
pub fn label_censored(delay_days: f64, cfg: &LabelConfig) -> Option<Label> {
    (delay_days > cfg.slow_above_days).then_some(Label::Slow)
}
