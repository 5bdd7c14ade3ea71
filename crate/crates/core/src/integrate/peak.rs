//! First-peak detection on dense trajectories.

use crate::integrate::radau::Trajectory;
use crate::scalar::Real;

/// Location and height of a maximum of an observable along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak<T> {
    pub time: T,
    pub value: T,
    /// `false` when no interior local maximum exists and the larger endpoint
    /// value was returned instead.
    pub interior: bool,
}

/// Subdivisions scanned inside every accepted step.
const SCAN_PER_STEP: usize = 8;

/// Finds the first interior local maximum of `observable` along `traj`.
///
/// The time derivative of the observable on the dense output is scanned for
/// its first sign change from positive to non-positive; the bracket is then
/// bisected down to `1e-9`.
pub fn find_first_peak<T, O>(traj: &Trajectory<T>, observable: O) -> Peak<T>
where
    T: Real,
    O: Fn(&[T]) -> T,
{
    find_first_peak_with_tol(traj, observable, T::lit(1e-9))
}

pub fn find_first_peak_with_tol<T, O>(traj: &Trajectory<T>, observable: O, time_tol: T) -> Peak<T>
where
    T: Real,
    O: Fn(&[T]) -> T,
{
    let (t0, t1) = (traj.t_start(), traj.t_end());
    let value = |t: T| observable(&traj.interpolate(t));
    let span = t1 - t0;
    // central-difference increment on the dense polynomial
    let delta = T::epsilon().cbrt() * span.max(T::one()) * T::lit(0.1);
    let slope = |t: T| {
        let a = (t - delta).max(t0);
        let b = (t + delta).min(t1);
        (value(b) - value(a)) / (b - a)
    };

    let mut grid: Vec<T> = Vec::with_capacity(traj.dense.len() * SCAN_PER_STEP + 1);
    for step in &traj.dense {
        for k in 0..SCAN_PER_STEP {
            grid.push(step.t0 + step.h * T::from_count(k) / T::from_count(SCAN_PER_STEP));
        }
    }
    grid.push(t1);

    let mut prev_t = grid[0];
    let mut prev_slope = slope(prev_t);
    for &t in &grid[1..] {
        let s = slope(t);
        if prev_slope > T::zero() && s <= T::zero() {
            let (mut lo, mut hi) = (prev_t, t);
            while hi - lo > time_tol {
                let mid = (lo + hi) * T::lit(0.5);
                if slope(mid) > T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let time = (lo + hi) * T::lit(0.5);
            return Peak {
                time,
                value: value(time),
                interior: true,
            };
        }
        prev_t = t;
        prev_slope = s;
    }

    let (v0, v1) = (value(t0), value(t1));
    if v1 >= v0 {
        Peak {
            time: t1,
            value: v1,
            interior: false,
        }
    } else {
        Peak {
            time: t0,
            value: v0,
            interior: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, IntegratorConfig};

    #[test]
    fn sine_squared_peaks_at_half_pi() {
        let traj = integrate(|t: f64, _, dy| dy[0] = t.cos(), &[0.0], 0.0, 3.0, &IntegratorConfig::default()).unwrap();
        let peak = find_first_peak(&traj, |y| y[0] * y[0]);
        assert!(peak.interior);
        assert!((peak.time - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "{}", peak.time);
        assert!((peak.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn monotone_observable_returns_endpoint() {
        let traj = integrate(|_, _, dy: &mut [f64]| dy[0] = 1.0, &[0.0], 0.0, 2.0, &IntegratorConfig::default()).unwrap();
        let peak = find_first_peak(&traj, |y| y[0]);
        assert!(!peak.interior);
        assert_eq!(peak.time, 2.0);
        let peak = find_first_peak(&traj, |y| -y[0]);
        assert!(!peak.interior);
        assert_eq!(peak.time, 0.0);
    }

    #[test]
    fn skips_initial_descent() {
        // cos(t) on [0, 8]: falls first, first interior max at 2 pi
        let traj = integrate(|t: f64, _, dy| dy[0] = -t.sin(), &[1.0], 0.0, 8.0, &IntegratorConfig::default()).unwrap();
        let peak = find_first_peak(&traj, |y| y[0]);
        assert!(peak.interior);
        assert!((peak.time - 2.0 * std::f64::consts::PI).abs() < 1e-6);
    }
}
