//! Period-wise velocity and smoothed travel direction.
//!
//! Poses are pushed at the outer-loop rate. Each push produces one raw
//! heading sample, the direction of the displacement over the previous
//! period; the travel direction is the trapezoidal mean of those samples
//! over the previous period, computed on the unwrapped signal.

use std::collections::VecDeque;

use crate::control::{unwrap_near, wrap_to_pi};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Below this period-wise speed the previous heading sample is held.
pub const MIN_HEADING_SPEED: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Sample<T> {
    t: f64,
    value: T,
}

#[derive(Debug, Clone)]
pub struct TravelEstimator {
    period: f64,
    start_time: Option<f64>,
    poses: VecDeque<Sample<Vec2>>,
    headings: VecDeque<Sample<f64>>,
    fallback: f64,
    warm_start: bool,
}

impl TravelEstimator {
    pub fn new(period: f64, fallback_heading: f64, warm_start: bool) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::config(format!(
                "estimator period must be > 0, got {period}"
            )));
        }
        Ok(Self {
            period,
            start_time: None,
            poses: VecDeque::new(),
            headings: VecDeque::new(),
            fallback: fallback_heading,
            warm_start,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn warm_start_enabled(&self) -> bool {
        self.warm_start
    }

    /// Updates the heading assumed for the period-wise velocity before data exists.
    pub fn set_fallback(&mut self, heading: f64) {
        self.fallback = heading;
    }

    /// Appends a pose sample. Timestamps must be strictly increasing.
    pub fn push_pose(&mut self, t: f64, pos: Vec2) -> Result<()> {
        if let Some(last) = self.poses.back() {
            if t.is_nan() || t <= last.t {
                return Err(Error::config(format!(
                    "pose timestamps must increase: {t} after {}",
                    last.t
                )));
            }
        }
        self.start_time.get_or_insert(t);
        self.poses.push_back(Sample { t, value: pos });

        let previous = self.headings.back().map(|s| s.value);
        let raw = match self.periodwise_velocity_strict(t) {
            Ok(v) if v.norm() >= MIN_HEADING_SPEED => Some(v.angle()),
            Ok(_) => previous,
            Err(_) if self.warm_start => Some(self.fallback),
            Err(_) => None,
        };
        if let Some(angle) = raw {
            let value = match previous {
                Some(p) => unwrap_near(angle, p),
                None => angle,
            };
            self.headings.push_back(Sample { t, value });
        }
        self.prune(t);
        Ok(())
    }

    fn prune(&mut self, now: f64) {
        let keep_from = now - 2.0 * self.period;
        while self.poses.len() > 2 && self.poses[1].t <= keep_from {
            self.poses.pop_front();
        }
        let keep_from = now - self.period;
        while self.headings.len() > 2 && self.headings[1].t <= keep_from {
            self.headings.pop_front();
        }
    }

    fn pose_at(&self, t: f64) -> Option<Vec2> {
        let first = self.poses.front()?;
        let last = self.poses.back()?;
        if t < first.t || t > last.t {
            return None;
        }
        // index of the first sample with time >= t
        let i = self.poses.partition_point(|s| s.t < t);
        let hi = self.poses[i];
        if hi.t == t || i == 0 {
            return Some(hi.value);
        }
        let lo = self.poses[i - 1];
        Some(lo.value.lerp(hi.value, (t - lo.t) / (hi.t - lo.t)))
    }

    fn periodwise_velocity_strict(&self, t: f64) -> Result<Vec2> {
        let earliest = self.poses.front().map_or(f64::INFINITY, |s| s.t);
        let then = t - self.period;
        match (self.pose_at(t), self.pose_at(then)) {
            (Some(now), Some(before)) => Ok((now - before) * (1.0 / self.period)),
            _ => Err(Error::InsufficientHistory {
                needed: then,
                earliest,
            }),
        }
    }

    /// Displacement over the previous period divided by the period.
    ///
    /// With warm start enabled, missing history yields a unit-speed vector
    /// along the fallback heading.
    pub fn periodwise_velocity(&self, t: f64) -> Result<Vec2> {
        match self.periodwise_velocity_strict(t) {
            Err(_) if self.warm_start => Ok(Vec2::from_angle(self.fallback)),
            other => other,
        }
    }

    /// Unwrapped heading signal: the fallback before the first sample,
    /// linear between samples, held after the last one.
    fn heading_signal(&self, t: f64) -> f64 {
        let first = self.headings[0];
        if t <= first.t {
            return if t == first.t {
                first.value
            } else {
                self.padding()
            };
        }
        let i = self.headings.partition_point(|s| s.t < t);
        if i == self.headings.len() {
            return self.headings[i - 1].value;
        }
        let hi = self.headings[i];
        let lo = self.headings[i - 1];
        lo.value + (hi.value - lo.value) * ((t - lo.t) / (hi.t - lo.t))
    }

    fn padding(&self) -> f64 {
        unwrap_near(self.fallback, self.headings[0].value)
    }

    /// Mean heading over `[t - T, t]`, wrapped to (−π, π].
    pub fn travel_direction(&self, t: f64) -> Result<f64> {
        let from = t - self.period;
        let (Some(first), Some(last)) = (self.headings.front(), self.headings.back()) else {
            if self.warm_start {
                return Ok(wrap_to_pi(self.fallback));
            }
            return Err(Error::InsufficientHistory {
                needed: from,
                earliest: f64::INFINITY,
            });
        };
        if !self.warm_start && (first.t > from || last.t < t) {
            return Err(Error::InsufficientHistory {
                needed: from,
                earliest: first.t,
            });
        }
        Ok(wrap_to_pi(self.integrate_headings(from, t) / self.period))
    }

    /// Trapezoidal integral of the heading signal over `[from, to]`.
    fn integrate_headings(&self, from: f64, to: f64) -> f64 {
        let mut total = 0.0;
        let first = self.headings[0].t;
        let mut prev_t = from;
        if from < first {
            let pad_end = first.min(to);
            total += self.padding() * (pad_end - from);
            prev_t = pad_end;
        }
        let mut prev_v = self.heading_signal(prev_t);
        let start = self.headings.partition_point(|s| s.t <= prev_t);
        for s in self.headings.iter().skip(start) {
            if s.t > to {
                break;
            }
            total += 0.5 * (prev_v + s.value) * (s.t - prev_t);
            prev_t = s.t;
            prev_v = s.value;
        }
        if prev_t < to {
            total += 0.5 * (prev_v + self.heading_signal(to)) * (to - prev_t);
        }
        total
    }

    /// Travel direction during start-up, before a full window of real
    /// samples exists. Equal to [`Self::travel_direction`] with warm start.
    pub fn warm_start_direction(&self, t: f64) -> f64 {
        let start = self.start_time.unwrap_or(t);
        if t < start + self.period || self.headings.is_empty() {
            return wrap_to_pi(self.fallback);
        }
        wrap_to_pi(self.integrate_headings(t - self.period, t) / self.period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const RATE: f64 = 120.0;

    fn feed<F: Fn(f64) -> Vec2>(est: &mut TravelEstimator, until: f64, path: F) {
        let n = (until * RATE).round() as usize;
        for k in 0..=n {
            let t = k as f64 / RATE;
            est.push_pose(t, path(t)).unwrap();
        }
    }

    #[test]
    fn straight_line_velocity() {
        let mut est = TravelEstimator::new(1.0, 0.0, false).unwrap();
        feed(&mut est, 3.0, |t| Vec2::new(0.3 * t, 0.0));
        let v = est.periodwise_velocity(3.0).unwrap();
        assert!((v.x - 0.3).abs() < 1e-12 && v.y.abs() < 1e-12);
        let v = est.periodwise_velocity(2.5).unwrap();
        assert!((v.x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn stationary_pose_has_zero_velocity() {
        let mut est = TravelEstimator::new(1.0, 0.0, false).unwrap();
        feed(&mut est, 2.0, |_| Vec2::new(1.0, -2.0));
        assert_eq!(est.periodwise_velocity(2.0).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn circle_chord_over_period() {
        let (r, rate, period) = (0.4, 0.9, 1.0);
        let mut est = TravelEstimator::new(period, 0.0, false).unwrap();
        let path = |t: f64| Vec2::from_angle(rate * t) * r;
        feed(&mut est, 4.0, path);
        let expected = 2.0 * r / period * (rate * period / 2.0).sin().abs();
        let got = est.periodwise_velocity(4.0).unwrap().norm();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        // interpolated x(t - T) is exact only at sample times; check between samples too
        let got = est.periodwise_velocity(4.0 - 0.5 / RATE).unwrap().norm();
        assert!((got - expected).abs() < 1e-4, "{got} vs {expected}");
    }

    #[test]
    fn insufficient_history_without_warm_start() {
        let mut est = TravelEstimator::new(1.0, 0.0, false).unwrap();
        feed(&mut est, 0.5, |t| Vec2::new(t, 0.0));
        assert!(matches!(
            est.periodwise_velocity(0.5),
            Err(Error::InsufficientHistory { .. })
        ));
        assert!(matches!(
            est.travel_direction(0.5),
            Err(Error::InsufficientHistory { .. })
        ));
        // velocity becomes available after T, direction only after 2T
        for k in 61..=180 {
            let t = k as f64 / RATE;
            est.push_pose(t, Vec2::new(t, 0.0)).unwrap();
        }
        assert!(est.periodwise_velocity(1.5).is_ok());
        assert!(est.travel_direction(1.5).is_err());
    }

    #[test]
    fn rejects_non_increasing_timestamps() {
        let mut est = TravelEstimator::new(1.0, 0.0, true).unwrap();
        est.push_pose(1.0, Vec2::ZERO).unwrap();
        assert!(est.push_pose(1.0, Vec2::ZERO).is_err());
        assert!(TravelEstimator::new(0.0, 0.0, true).is_err());
    }

    #[test]
    fn straight_line_direction() {
        let alpha = 2.3;
        let mut est = TravelEstimator::new(1.0, 0.0, false).unwrap();
        feed(&mut est, 3.0, |t| Vec2::from_angle(alpha) * (0.1 * t));
        assert!((est.travel_direction(3.0).unwrap() - alpha).abs() < 1e-12);
    }

    #[test]
    fn averaging_across_the_branch_cut() {
        // headings alternate between π − ε and −(π − ε)
        let eps = 0.05;
        let mut est = TravelEstimator::new(1.0, 0.0, false).unwrap();
        let mut p = Vec2::ZERO;
        let n = (3.0 * RATE) as usize;
        let mut path = Vec::new();
        for k in 0..=n {
            path.push(p);
            let a = if (k / 6) % 2 == 0 { PI - eps } else { PI + eps };
            p += Vec2::from_angle(a) * 0.001;
        }
        for (k, q) in path.iter().enumerate() {
            est.push_pose(k as f64 / RATE, *q).unwrap();
        }
        let psi = est.travel_direction(n as f64 / RATE).unwrap();
        assert!((psi.abs() - PI).abs() < 0.02, "got {psi}");
    }

    /// Heading of the analytic period-wise velocity, averaged with a fine
    /// midpoint rule.
    fn wiggle_oracle(alpha: f64, t: f64) -> f64 {
        let path = |s: f64| wiggle(alpha, s);
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        let mut prev: Option<f64> = None;
        for i in 0..n {
            let s = t - 1.0 + (i as f64 + 0.5) * h;
            let a = (path(s) - path(s - 1.0)).angle();
            let a = match prev {
                Some(p) => unwrap_near(a, p),
                None => a,
            };
            prev = Some(a);
            acc += a * h;
        }
        acc
    }

    fn wiggle(alpha: f64, t: f64) -> Vec2 {
        // forward at 0.1 m/s with a lateral 2 cm, 1.3 Hz wiggle
        Vec2::new(0.1 * t, 0.02 * (2.0 * PI * 1.3 * t).sin()).rotated(alpha)
    }

    #[test]
    fn oscillatory_trajectory_averages_to_mean_heading() {
        let alpha = 0.6;
        let mut est = TravelEstimator::new(1.0, 0.0, false).unwrap();
        feed(&mut est, 5.0, |t| wiggle(alpha, t));
        let psi = est.travel_direction(5.0).unwrap();
        let oracle = wiggle_oracle(alpha, 5.0);
        assert!((psi - oracle).abs() < 1e-3, "{psi} vs {oracle}");
        assert!((psi - alpha).abs() < 0.05);
    }

    #[test]
    fn warm_start_examples() {
        let fb = 0.4;
        let mut est = TravelEstimator::new(1.0, fb, true).unwrap();
        est.push_pose(0.0, Vec2::ZERO).unwrap();
        assert_eq!(est.warm_start_direction(0.0), fb);
        assert!((est.travel_direction(0.0).unwrap() - fb).abs() < 1e-12);

        // real samples at the fallback heading
        let mut est = TravelEstimator::new(1.0, fb, true).unwrap();
        feed(&mut est, 1.0, |t| Vec2::from_angle(fb) * (0.1 * t));
        assert!((est.warm_start_direction(1.0) - fb).abs() < 1e-12);
    }

    #[test]
    fn warm_start_pads_missing_prefix() {
        // moves along alpha from t = 0; heading samples exist from t = T
        let (fb, alpha) = (0.0, 1.0);
        let mut est = TravelEstimator::new(1.0, fb, true).unwrap();
        feed(&mut est, 1.5, |t| Vec2::from_angle(alpha) * (0.1 * t));
        // padded signal: fallback on [0.5, 1), alpha on [1, 1.5]; the trapezoid
        // across the first sample interval smears one step
        let oracle = 0.5 * fb + 0.5 * alpha;
        let got = est.warm_start_direction(1.5);
        assert!(
            (got - oracle).abs() <= (alpha - fb) / RATE,
            "{got} vs {oracle}"
        );
        assert_eq!(got, est.travel_direction(1.5).unwrap());
    }

    #[test]
    fn warm_start_never_errors() {
        let mut est = TravelEstimator::new(1.0, -2.0, true).unwrap();
        for k in 0..400 {
            let t = k as f64 / RATE;
            est.push_pose(t, Vec2::new(0.05 * t * t, 0.0)).unwrap();
            assert!(est.travel_direction(t).is_ok());
            assert!(est.periodwise_velocity(t).is_ok());
        }
    }

    #[test]
    fn near_zero_displacement_holds_previous_heading() {
        let mut est = TravelEstimator::new(1.0, 0.0, false).unwrap();
        feed(&mut est, 2.0, |t| Vec2::new(0.0, 0.1 * t));
        let before = est.headings.back().unwrap().value;
        let stop = est.poses.back().unwrap().value;
        for k in 1..=240 {
            est.push_pose(2.0 + k as f64 / RATE, stop).unwrap();
        }
        assert_eq!(est.headings.back().unwrap().value, before);
    }
}
