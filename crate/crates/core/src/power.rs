//! Node energy budget under wake-on-motion duty cycling.
//!
//! A node sleeps (wake-on-motion armed) except for a fixed active period
//! after each trigger, during which it samples and streams continuously.

use serde::{Deserialize, Serialize};

use crate::error::PowerError;

const SECONDS_PER_DAY: f64 = 86_400.0;
const HOURS_PER_DAY: f64 = 24.0;
pub const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    /// Sleep draw with wake-on-motion enabled, W.
    pub p_sleep: f64,
    /// Active draw (continuous sampling and radio), W.
    pub p_active: f64,
    pub battery_wh: f64,
    pub triggers_per_day: f64,
    pub active_s_per_trigger: f64,
    /// Time from a wake-on-motion trigger until samples are available, s.
    pub wake_latency_s: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        Self {
            p_sleep: 82.4e-6,
            p_active: 27.2e-3,
            battery_wh: 15.0,
            triggers_per_day: 0.0,
            active_s_per_trigger: 0.0,
            wake_latency_s: 0.020,
        }
    }
}

impl PowerProfile {
    pub fn with_activity(self, triggers_per_day: f64, active_s_per_trigger: f64) -> Self {
        Self {
            triggers_per_day,
            active_s_per_trigger,
            ..self
        }
    }

    fn validate(&self) -> Result<(), PowerError> {
        let positive = [
            ("p_sleep", self.p_sleep),
            ("p_active", self.p_active),
            ("battery_wh", self.battery_wh),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(PowerError::InvalidProfile(format!("{name} must be positive")));
            }
        }
        let non_negative = [
            ("triggers_per_day", self.triggers_per_day),
            ("active_s_per_trigger", self.active_s_per_trigger),
            ("wake_latency_s", self.wake_latency_s),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(PowerError::InvalidProfile(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Active seconds per day.
    pub fn active_s_per_day(&self) -> f64 {
        self.triggers_per_day * self.active_s_per_trigger
    }
}

/// Energy drawn per day in Wh.
pub fn daily_energy(p: &PowerProfile) -> Result<f64, PowerError> {
    p.validate()?;
    let active_s = p.active_s_per_day();
    // Rounding slack: rate * (86400 / rate) may land one ulp above a day.
    if active_s > SECONDS_PER_DAY * (1.0 + 1e-12) {
        return Err(PowerError::DutyOverflow { active_s });
    }
    let active_h = (active_s / 3600.0).min(HOURS_PER_DAY);
    Ok(p.p_sleep * (HOURS_PER_DAY - active_h) + p.p_active * active_h)
}

/// Battery life in years (365.25-day years).
pub fn autonomy_years(p: &PowerProfile) -> Result<f64, PowerError> {
    Ok(p.battery_wh / daily_energy(p)? / DAYS_PER_YEAR)
}

/// Active time per trigger that makes the battery last `target_years` at
/// `triggers_per_day`, by bisection (autonomy falls monotonically with
/// active time). `profile.active_s_per_trigger` is ignored.
pub fn solve_active_time(target_years: f64, triggers_per_day: f64, profile: &PowerProfile) -> Result<f64, PowerError> {
    let at = |s: f64| autonomy_years(&profile.with_activity(triggers_per_day, s));
    let ceiling = at(0.0)?;
    let unachievable = |floor: f64| PowerError::Unachievable {
        target: target_years,
        min: floor,
        max: ceiling,
    };
    if !(target_years.is_finite() && target_years > 0.0) {
        return Err(unachievable(ceiling));
    }
    if triggers_per_day <= 0.0 {
        return if (target_years - ceiling).abs() <= 1e-12 * ceiling {
            Ok(0.0)
        } else {
            Err(unachievable(ceiling))
        };
    }
    let mut hi = SECONDS_PER_DAY / triggers_per_day;
    let floor = at(hi)?;
    if target_years > ceiling * (1.0 + 1e-12) || target_years < floor {
        return Err(unachievable(floor));
    }
    let mut lo = 0.0;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > target_years {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ground-truth timing of one injected event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakTiming {
    pub onset: f64,
    pub onset_to_peak: f64,
}

/// Fraction of events whose peak arrives before a sensor woken at onset
/// would be sampling again.
pub fn missed_peak_fraction(wake_latency_s: f64, events: &[PeakTiming]) -> f64 {
    if events.is_empty() {
        return 0.0;
    }
    let missed = events
        .iter()
        .filter(|e| e.onset_to_peak < wake_latency_s)
        .count();
    missed as f64 / events.len() as f64
}
