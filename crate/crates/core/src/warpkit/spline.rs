//! Polyharmonic spline interpolation of 2-D displacements.
//!
//! With centers `c_i` the model is
//! `disp(p) = Σ_i w_i φ(|p - c_i|) + a_0 + a_1 t + a_2 f`,
//! fitted by solving `[K + λI, P; Pᵀ, 0] [w; a] = [d; 0]`.

use super::linalg::{self, Dense};
use super::{ControlPointSet, Point};
use crate::error::{Error, Result};

pub const THIN_PLATE_ORDER: u32 = 2;

/// Polyharmonic kernel of order `k`: `r^k` for odd k, `r^k ln r` for even k.
#[inline]
pub fn kernel(order: u32, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let rk = r.powi(order as i32);
    if order.is_multiple_of(2) {
        rk * r.ln()
    } else {
        rk
    }
}

/// A fitted spline mapping source positions onto destination positions.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineModel {
    order: u32,
    regularization: f64,
    centers: Vec<Point>,
    /// One (time, freq) weight pair per center.
    rbf_weights: Vec<[f64; 2]>,
    /// Displacement affine part, `[a_0, a_t, a_f]` for each output coordinate.
    affine: [[f64; 3]; 2],
}

impl SplineModel {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn rbf_weights(&self) -> &[[f64; 2]] {
        &self.rbf_weights
    }

    /// Affine part of the position map, `[c, c_t, c_f]` per output coordinate
    /// (the identity map is `[[0, 1, 0], [0, 0, 1]]`).
    pub fn affine_terms(&self) -> [[f64; 3]; 2] {
        let [t, f] = self.affine;
        [[t[0], t[1] + 1.0, t[2]], [f[0], f[1], f[2] + 1.0]]
    }

    /// Interpolated displacement at `p`.
    pub fn displacement(&self, p: Point) -> Point {
        let mut dt = self.affine[0][0] + self.affine[0][1] * p.time + self.affine[0][2] * p.freq;
        let mut df = self.affine[1][0] + self.affine[1][1] * p.time + self.affine[1][2] * p.freq;
        for (c, w) in self.centers.iter().zip(&self.rbf_weights) {
            let phi = kernel(self.order, p.distance(*c));
            dt += w[0] * phi;
            df += w[1] * phi;
        }
        Point::new(dt, df)
    }

    /// Maps `p` through the spline: `p + displacement(p)`.
    pub fn apply(&self, p: Point) -> Point {
        let d = self.displacement(p);
        Point::new(p.time + d.time, p.freq + d.freq)
    }
}

/// Fits a spline with `model(source_i) = dest_i` (exactly when
/// `regularization` is 0).
pub fn fit_spline(cps: &ControlPointSet, order: u32, regularization: f64) -> Result<SplineModel> {
    if order == 0 {
        return Err(Error::ControlPoints("polyharmonic order must be at least 1".into()));
    }
    if !(regularization >= 0.0 && regularization.is_finite()) {
        return Err(Error::ControlPoints(format!("regularization {regularization} must be finite and >= 0")));
    }
    let src = cps.source();
    let dst = cps.dest();
    let n = src.len();
    for (i, p) in src.iter().enumerate() {
        if !(p.time.is_finite() && p.freq.is_finite() && dst[i].time.is_finite() && dst[i].freq.is_finite()) {
            return Err(Error::ControlPoints(format!("control point {i} is not finite")));
        }
        if src[..i].contains(p) {
            return Err(Error::ControlPoints(format!(
                "duplicate source point ({}, {})",
                p.time, p.freq
            )));
        }
    }

    let size = n + 3;
    let mut a = Dense::zeros(size);
    for i in 0..n {
        for j in 0..n {
            *a.at(i, j) = kernel(order, src[i].distance(src[j]));
        }
        *a.at(i, i) += regularization;
        let basis = [1.0, src[i].time, src[i].freq];
        for (c, &v) in basis.iter().enumerate() {
            *a.at(i, n + c) = v;
            *a.at(n + c, i) = v;
        }
    }
    let mut rhs = vec![0.0; size * 2];
    for i in 0..n {
        rhs[2 * i] = dst[i].time - src[i].time;
        rhs[2 * i + 1] = dst[i].freq - src[i].freq;
    }
    let x = linalg::solve(a, rhs, 2)?;
    let rbf_weights = (0..n).map(|i| [x[2 * i], x[2 * i + 1]]).collect();
    let affine = [
        [x[2 * n], x[2 * (n + 1)], x[2 * (n + 2)]],
        [x[2 * n + 1], x[2 * (n + 1) + 1], x[2 * (n + 2) + 1]],
    ];
    Ok(SplineModel {
        order,
        regularization,
        centers: src.to_vec(),
        rbf_weights,
        affine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(t, f)| Point::new(t, f)).collect()
    }

    fn seven_point_set(shift: f64) -> ControlPointSet {
        let src = pts(&[(0.0, 0.0), (11.0, 0.0), (0.0, 7.0), (11.0, 7.0), (0.0, 4.0), (11.0, 4.0), (5.0, 4.0)]);
        let mut dst = src.clone();
        dst[6].time += shift;
        ControlPointSet::new(src, dst).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel(2, 0.0), 0.0);
        assert_eq!(kernel(2, 1.0), 0.0);
        assert!((kernel(2, std::f64::consts::E) - std::f64::consts::E.powi(2)).abs() < 1e-12);
        assert_eq!(kernel(1, 3.0), 3.0);
        assert_eq!(kernel(3, 2.0), 8.0);
    }

    #[test]
    fn identity_has_zero_weights() {
        let model = fit_spline(&seven_point_set(0.0), 2, 0.0).unwrap();
        assert!(model.rbf_weights().iter().all(|w| w[0] == 0.0 && w[1] == 0.0));
        assert_eq!(model.affine_terms(), [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let p = Point::new(3.3, 2.2);
        assert_eq!(model.apply(p), p);
    }

    #[test]
    fn interpolates_control_points() {
        let cps = seven_point_set(5.0);
        let model = fit_spline(&cps, 2, 0.0).unwrap();
        for (s, d) in cps.source().iter().zip(cps.dest()) {
            let got = model.apply(*s);
            assert!((got.time - d.time).abs() < 1e-6 && (got.freq - d.freq).abs() < 1e-6);
        }
    }

    #[test]
    fn regularization_relaxes_interpolation() {
        let cps = seven_point_set(5.0);
        let model = fit_spline(&cps, 2, 10.0).unwrap();
        let got = model.apply(cps.source()[6]);
        assert!((got.time - cps.dest()[6].time).abs() > 1e-3);
    }

    #[test]
    fn odd_orders_also_interpolate() {
        let cps = seven_point_set(-3.0);
        for order in [1, 3] {
            let model = fit_spline(&cps, order, 0.0).unwrap();
            let got = model.apply(cps.source()[6]);
            assert!((got.time - cps.dest()[6].time).abs() < 1e-6, "order {order}");
        }
    }

    #[test]
    fn collinear_affine_targets() {
        let src = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let dst = pts(&[(1.0, 0.5), (3.0, 0.5), (5.0, 0.5)]);
        let cps = ControlPointSet::new(src.clone(), dst.clone()).unwrap();
        let model = fit_spline(&cps, 2, 0.0).unwrap();
        assert!(model.rbf_weights().iter().flatten().all(|w| w.abs() < 1e-9));
        for (s, d) in src.iter().zip(&dst) {
            let got = model.apply(*s);
            assert!((got.time - d.time).abs() < 1e-9 && (got.freq - d.freq).abs() < 1e-9);
        }
    }

    #[test]
    fn duplicate_sources_rejected() {
        let src = pts(&[(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)]);
        let cps = ControlPointSet::new(src.clone(), src).unwrap();
        assert!(matches!(fit_spline(&cps, 2, 0.0), Err(Error::ControlPoints(_))));
    }

    #[test]
    fn too_few_points_rejected() {
        let src = pts(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(ControlPointSet::new(src.clone(), src), Err(Error::ControlPoints(_))));
    }
}
