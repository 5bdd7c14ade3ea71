//! Clamped uniform cubic B-spline controls.

use crate::error::{Error, Result};
use crate::scalar::Real;

const DEGREE: usize = 3;

/// Cubic B-spline on `[0, horizon]` with a clamped uniform knot vector.
///
/// The curve stays inside the convex hull of its control points, so
/// `|u(t)| <= max |p_i| <= bound` for all `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct BSplineControl<T> {
    points: Vec<T>,
    horizon: T,
    bound: T,
    knots: Vec<T>,
}

impl<T: Real> BSplineControl<T> {
    pub fn new(points: Vec<T>, horizon: T, bound: T) -> Result<Self> {
        if points.len() <= DEGREE {
            return Err(Error::Config(format!(
                "a cubic B-spline needs at least {} control points, got {}",
                DEGREE + 1,
                points.len()
            )));
        }
        if !(horizon > T::zero()) {
            return Err(Error::Config(format!("spline horizon must be positive, got {horizon}")));
        }
        if let Some(p) = points.iter().find(|p| !(p.abs() <= bound)) {
            return Err(Error::Config(format!("control point {p} exceeds bound {bound}")));
        }
        let knots = clamped_uniform_knots(points.len(), horizon);
        Ok(Self {
            points,
            horizon,
            bound,
            knots,
        })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// `u(t)` by de Boor's algorithm; `t` must lie in `[0, horizon]`.
    pub fn value(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t <= self.horizon) {
            return Err(Error::Domain(format!(
                "t = {t} outside spline interval [0, {}]",
                self.horizon
            )));
        }
        Ok(self.de_boor(t))
    }

    /// `u(t)` with `t` clamped into `[0, horizon]`.
    pub fn value_clamped(&self, t: T) -> T {
        self.de_boor(t.max(T::zero()).min(self.horizon))
    }

    fn de_boor(&self, t: T) -> T {
        let n = self.points.len();
        // knot span k with knots[k] <= t < knots[k+1], last span closed on the right
        let k = (DEGREE..n)
            .rev()
            .find(|&k| self.knots[k] <= t)
            .unwrap_or(DEGREE);
        let mut d = [T::zero(); DEGREE + 1];
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = self.points[j + k - DEGREE];
        }
        for r in 1..=DEGREE {
            for j in (r..=DEGREE).rev() {
                let i = j + k - DEGREE;
                let left = self.knots[i];
                let right = self.knots[i + 1 + DEGREE - r];
                let alpha = (t - left) / (right - left);
                d[j] = (T::one() - alpha) * d[j - 1] + alpha * d[j];
            }
        }
        d[DEGREE]
    }
}

/// Knot vector for `count` control points: four-fold ends, uniform interior.
pub fn clamped_uniform_knots<T: Real>(count: usize, horizon: T) -> Vec<T> {
    let interior = count - DEGREE - 1;
    let segments = T::from_count(interior + 1);
    let mut knots = vec![T::zero(); DEGREE + 1];
    knots.extend((1..=interior).map(|i| horizon * T::from_count(i) / segments));
    knots.extend(std::iter::repeat_n(horizon, DEGREE + 1));
    knots
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Cox-de Boor basis recursion, independent of the triangular scheme.
    fn basis(knots: &[f64], i: usize, p: usize, t: f64) -> f64 {
        if p == 0 {
            let last = knots[knots.len() - 1];
            let inside = knots[i] <= t && t < knots[i + 1];
            let right_end = t == last && knots[i] < knots[i + 1] && knots[i + 1] == last;
            return if inside || right_end { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 > 0.0 {
            v += (t - knots[i]) / d1 * basis(knots, i, p - 1, t);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 > 0.0 {
            v += (knots[i + p + 1] - t) / d2 * basis(knots, i + 1, p - 1, t);
        }
        v
    }

    fn oracle(points: &[f64], horizon: f64, t: f64) -> f64 {
        let knots = clamped_uniform_knots(points.len(), horizon);
        points.iter().enumerate().map(|(i, p)| p * basis(&knots, i, 3, t)).sum()
    }

    #[test]
    fn knot_vector() {
        let s = BSplineControl::new(vec![0.0; 5], 2.0, 1.0).unwrap();
        assert_eq!(s.knots(), &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn constant_points_give_constant_curve() {
        let s = BSplineControl::new(vec![3.5; 6], 4.0, 20.0).unwrap();
        for k in 0..=40 {
            assert!((s.value(0.1 * k as f64).unwrap() - 3.5).abs() < 1e-14);
        }
    }

    #[test]
    fn clamped_endpoints() {
        let s = BSplineControl::<f64>::new(vec![1.0, -2.0, 4.0, 0.5, -3.0], 7.7, 5.0).unwrap();
        assert_eq!(s.value(0.0).unwrap(), 1.0);
        assert!((s.value(7.7).unwrap() as f64 + 3.0).abs() < 1e-14);
    }

    #[test]
    fn matches_cox_de_boor() {
        let pts = [0.0, 1.0, 0.0, -1.0, 0.0];
        let s = BSplineControl::new(pts.to_vec(), 1.0, 1.0).unwrap();
        for &t in &[0.5, 0.3, 0.77, 0.999] {
            assert!((s.value(t).unwrap() - oracle(&pts, 1.0, t)).abs() < 1e-14, "t = {t}");
        }
        assert!(s.value(0.5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn domain_and_construction_errors() {
        let s = BSplineControl::new(vec![0.0; 5], 1.0, 1.0).unwrap();
        assert!(s.value(-0.1).is_err());
        assert!(s.value(1.1).is_err());
        assert!(BSplineControl::new(vec![0.0; 3], 1.0, 1.0).is_err());
        assert!(BSplineControl::new(vec![0.0, 0.0, 0.0, 2.0], 1.0, 1.0).is_err());
        assert!(BSplineControl::new(vec![0.0; 4], 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn convex_hull_bound(points in prop::collection::vec(-20.0f64..20.0, 4..10), horizon in 0.1f64..10.0) {
            let s = BSplineControl::new(points.clone(), horizon, 20.0).unwrap();
            let max = points.iter().fold(0.0f64, |m, p| m.max(p.abs()));
            for k in 0..=200 {
                let t = (horizon * k as f64 / 200.0).min(horizon);
                let u = s.value(t).unwrap();
                prop_assert!(u.abs() <= max + 1e-12);
                prop_assert!((u - oracle(&points, horizon, t)).abs() < 1e-10);
            }
        }
    }
}
