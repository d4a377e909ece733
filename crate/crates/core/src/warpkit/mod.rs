//! Time warping: a single interior control point on the centre line is
//! shifted in time while six boundary anchors stay fixed, and the image is
//! resampled through a thin-plate spline fitted to those point pairs.

mod linalg;
mod spline;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use spline::{fit_spline, kernel, SplineModel, THIN_PLATE_ORDER};

use crate::error::{Error, Result};
use crate::featio::Spectrogram;
use crate::policy::RngStream;

/// A position on the spectrogram plane; `time` is the column, `freq` the row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub time: f64,
    pub freq: f64,
}

impl Point {
    pub const fn new(time: f64, freq: f64) -> Self {
        Self { time, freq }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.time - other.time).hypot(self.freq - other.freq)
    }
}

/// Paired source/destination positions; content at `source[i]` ends up at
/// `dest[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlPointSet {
    source: Vec<Point>,
    dest: Vec<Point>,
}

impl ControlPointSet {
    pub fn new(source: Vec<Point>, dest: Vec<Point>) -> Result<Self> {
        if source.len() != dest.len() {
            return Err(Error::ControlPoints(format!(
                "{} source points but {} destination points",
                source.len(),
                dest.len()
            )));
        }
        if source.len() < 3 {
            return Err(Error::ControlPoints(format!("need at least 3 points, got {}", source.len())));
        }
        Ok(Self { source, dest })
    }

    pub fn source(&self) -> &[Point] {
        &self.source
    }

    pub fn dest(&self) -> &[Point] {
        &self.dest
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.dest
    }

    /// Swaps the roles of source and destination.
    pub fn inverted(&self) -> Self {
        Self {
            source: self.dest.clone(),
            dest: self.source.clone(),
        }
    }
}

/// The warp actually drawn: parameter `W`, signed shift `w`, and the warped
/// column `t₀` (absent when the draw was skipped).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarpSpec {
    #[serde(rename = "W")]
    pub max_shift: usize,
    #[serde(rename = "w")]
    pub shift: i64,
    #[serde(rename = "t0")]
    pub origin: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarpDraw {
    pub control_points: ControlPointSet,
    pub spec: WarpSpec,
    /// Set when τ leaves no admissible warp point, making the warp a no-op.
    pub degenerate: bool,
}

/// Row of the horizontal centre line, shared by the warp point and the
/// vertical-edge anchors so that every control point sits on a pixel.
pub fn center_row(nu: usize) -> usize {
    nu / 2
}

/// The six fixed boundary anchors: four corners and the two vertical-edge
/// midpoints. Coincident anchors (ν < 3) are listed once.
pub fn anchor_points(nu: usize, tau: usize) -> Vec<Point> {
    let last_t = tau.saturating_sub(1) as f64;
    let last_f = nu.saturating_sub(1) as f64;
    let mid = center_row(nu) as f64;
    let mut out: Vec<Point> = Vec::with_capacity(6);
    for p in [
        Point::new(0.0, 0.0),
        Point::new(last_t, 0.0),
        Point::new(0.0, last_f),
        Point::new(last_t, last_f),
        Point::new(0.0, mid),
        Point::new(last_t, mid),
    ] {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn identity_set(nu: usize, tau: usize) -> ControlPointSet {
    let mut points = anchor_points(nu, tau);
    let center = Point::new((tau / 2) as f64, center_row(nu) as f64);
    if !points.contains(&center) {
        points.push(center);
    }
    // Too few distinct points only happens on a 1x1 or 1x2 image.
    while points.len() < 3 {
        points.push(Point::new(points.len() as f64 + tau as f64, 0.0));
    }
    ControlPointSet {
        source: points.clone(),
        dest: points,
    }
}

/// Draws a time warp for a ν×τ spectrogram with warp parameter `max_shift`.
///
/// `t₀` is uniform over the integers strictly inside `(W, τ - W)` and the
/// signed shift `w` uniform over `[-W, W]`. With `W = 0` the result is the
/// identity; with no integer in `(W, τ - W)`, or when the destination lands
/// on an edge anchor, it is the identity and flagged degenerate.
pub fn sample_warp(nu: usize, tau: usize, max_shift: usize, rng: &mut RngStream) -> WarpDraw {
    let w_max = max_shift;
    let admissible = tau >= 2 * w_max + 2;
    if w_max == 0 || !admissible || nu == 0 {
        return WarpDraw {
            control_points: identity_set(nu.max(1), tau.max(1)),
            spec: WarpSpec {
                max_shift,
                shift: 0,
                origin: None,
            },
            degenerate: w_max > 0 && !admissible,
        };
    }
    let origin = rng.uniform_usize(w_max + 1, tau - w_max - 1);
    let shift = rng.uniform_inclusive(-(w_max as i64), w_max as i64);
    let row = center_row(nu) as f64;
    let spec = WarpSpec {
        max_shift,
        shift,
        origin: Some(origin),
    };
    let mut source = anchor_points(nu, tau);
    let target = Point::new(origin as f64 + shift as f64, row);
    if source.contains(&target) {
        // Only reachable as t₀ + w = τ - 1: two sources would share one
        // destination, which no backward map can represent.
        return WarpDraw {
            control_points: identity_set(nu, tau),
            spec,
            degenerate: true,
        };
    }
    let mut dest = source.clone();
    source.push(Point::new(origin as f64, row));
    dest.push(target);
    WarpDraw {
        control_points: ControlPointSet { source, dest },
        spec,
        degenerate: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpOptions {
    pub order: u32,
    pub regularization: f64,
}

impl Default for WarpOptions {
    fn default() -> Self {
        Self {
            order: THIN_PLATE_ORDER,
            regularization: 0.0,
        }
    }
}

fn check_bounds(nu: usize, tau: usize, cps: &ControlPointSet) -> Result<()> {
    let (max_t, max_f) = (tau as f64 - 1.0, nu as f64 - 1.0);
    for p in cps.source.iter().chain(&cps.dest) {
        if !(0.0..=max_t).contains(&p.time) || !(0.0..=max_f).contains(&p.freq) {
            return Err(Error::ControlPoints(format!(
                "point ({}, {}) lies outside the {nu}x{tau} image",
                p.time, p.freq
            )));
        }
    }
    Ok(())
}

/// Backward flow for every output pixel, channel-major: the output pixel at
/// `(t, f)` reads the input at `(t, f) + flow`.
pub fn dense_flow(nu: usize, tau: usize, cps: &ControlPointSet, opts: WarpOptions) -> Result<Vec<Point>> {
    let backward = fit_spline(&cps.inverted(), opts.order, opts.regularization)?;
    let mut flow = vec![Point::new(0.0, 0.0); nu * tau];
    flow.par_chunks_mut(tau).enumerate().for_each(|(f, row)| {
        for (t, slot) in row.iter_mut().enumerate() {
            *slot = backward.displacement(Point::new(t as f64, f as f64));
        }
    });
    Ok(flow)
}

/// Bilinear sample at a fractional position, clamped to the image edges.
#[inline]
fn sample_bilinear(spec: &Spectrogram, time: f64, freq: f64) -> f64 {
    let (nu, tau) = (spec.nu(), spec.tau());
    let t = time.clamp(0.0, (tau - 1) as f64);
    let f = freq.clamp(0.0, (nu - 1) as f64);
    let t0 = t.floor() as usize;
    let f0 = f.floor() as usize;
    let t1 = (t0 + 1).min(tau - 1);
    let f1 = (f0 + 1).min(nu - 1);
    let a = t - t0 as f64;
    let b = f - f0 as f64;
    let v = |ff: usize, tt: usize| f64::from(spec.get(ff, tt));
    let lower = (1.0 - a) * v(f0, t0) + a * v(f0, t1);
    let upper = (1.0 - a) * v(f1, t0) + a * v(f1, t1);
    (1.0 - b) * lower + b * upper
}

pub fn warp_spectrogram(spec: &Spectrogram, cps: &ControlPointSet) -> Result<Spectrogram> {
    warp_spectrogram_with(spec, cps, WarpOptions::default())
}

/// Warps `spec` so that content at each source control point moves to its
/// destination, sampling the input bilinearly along the backward flow.
pub fn warp_spectrogram_with(spec: &Spectrogram, cps: &ControlPointSet, opts: WarpOptions) -> Result<Spectrogram> {
    let (nu, tau) = (spec.nu(), spec.tau());
    if cps.is_identity() {
        return Ok(spec.clone());
    }
    check_bounds(nu, tau, cps)?;
    let flow = dense_flow(nu, tau, cps, opts)?;
    let mut out = vec![0f32; nu * tau];
    out.par_chunks_mut(tau).enumerate().for_each(|(f, row)| {
        for (t, slot) in row.iter_mut().enumerate() {
            let d = flow[f * tau + t];
            *slot = sample_bilinear(spec, t as f64 + d.time, f as f64 + d.freq) as f32;
        }
    });
    Ok(spec.with_values(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::split_stream;

    fn ramp(nu: usize, tau: usize) -> Spectrogram {
        let values = (0..nu).flat_map(|f| (0..tau).map(move |t| (t as f32) * 0.5 + f as f32)).collect();
        Spectrogram::new(nu, tau, values).unwrap()
    }

    #[test]
    fn zero_parameter_is_identity() {
        let mut rng = split_stream(1, 0);
        let draw = sample_warp(80, 500, 0, &mut rng);
        assert!(draw.control_points.is_identity());
        assert!(!draw.degenerate);
        assert_eq!(rng.position(), 0);
    }

    #[test]
    fn short_input_is_flagged_noop() {
        let mut rng = split_stream(1, 0);
        let draw = sample_warp(80, 100, 80, &mut rng);
        assert!(draw.degenerate);
        assert!(draw.control_points.is_identity());
        // τ = 2W + 1 leaves the open interval (W, W + 1) without integers.
        assert!(sample_warp(80, 161, 80, &mut rng).degenerate);
        assert!(!sample_warp(80, 162, 80, &mut rng).degenerate);
    }

    #[test]
    fn destination_on_edge_anchor_is_flagged_noop() {
        // τ = 2W + 3 admits t₀ ∈ {W + 1, W + 2}; t₀ = W + 2 with w = W lands
        // on the right-edge anchor.
        let mut hit = false;
        for i in 0..500 {
            let draw = sample_warp(10, 7, 2, &mut split_stream(i, 0));
            if draw.spec.origin == Some(4) && draw.spec.shift == 2 {
                assert!(draw.degenerate && draw.control_points.is_identity());
                hit = true;
            } else {
                assert!(!draw.degenerate);
            }
        }
        assert!(hit);
    }

    #[test]
    fn draw_ranges() {
        let mut rng = split_stream(3, 4);
        for _ in 0..2000 {
            let draw = sample_warp(80, 1000, 80, &mut rng);
            let t0 = draw.spec.origin.unwrap();
            assert!((81..=919).contains(&t0));
            assert!(draw.spec.shift.abs() <= 80);
            let cps = &draw.control_points;
            assert_eq!(cps.len(), 7);
            for (s, d) in cps.source()[..6].iter().zip(&cps.dest()[..6]) {
                assert_eq!(s, d);
            }
            assert_eq!(cps.source()[6], Point::new(t0 as f64, 40.0));
            assert_eq!(cps.dest()[6], Point::new(t0 as f64 + draw.spec.shift as f64, 40.0));
        }
    }

    #[test]
    fn identity_warp_is_bit_equal() {
        let spec = ramp(8, 12);
        let cps = identity_set(8, 12);
        assert_eq!(warp_spectrogram(&spec, &cps).unwrap(), spec);
        // The general path is exact too.
        let mut out = vec![0f32; 96];
        let flow = dense_flow(8, 12, &cps, WarpOptions::default()).unwrap();
        for f in 0..8 {
            for t in 0..12 {
                let d = flow[f * 12 + t];
                out[f * 12 + t] = sample_bilinear(&spec, t as f64 + d.time, f as f64 + d.freq) as f32;
            }
        }
        assert_eq!(out.as_slice(), spec.values());
    }

    #[test]
    fn constant_stays_constant() {
        let spec = Spectrogram::new(8, 30, vec![1.25; 240]).unwrap();
        let mut rng = split_stream(5, 5);
        let draw = sample_warp(8, 30, 5, &mut rng);
        let out = warp_spectrogram(&spec, &draw.control_points).unwrap();
        assert!(out.values().iter().all(|&v| v == 1.25));
    }

    #[test]
    fn content_moves_with_the_warp_point() {
        let spec = ramp(8, 12);
        let mut source = anchor_points(8, 12);
        let mut dest = source.clone();
        source.push(Point::new(5.0, 4.0));
        dest.push(Point::new(7.0, 4.0));
        let cps = ControlPointSet::new(source, dest).unwrap();
        let out = warp_spectrogram(&spec, &cps).unwrap();
        assert!((out.get(4, 7) - spec.get(4, 5)).abs() < 1e-5);
        for anchor in anchor_points(8, 12) {
            let (f, t) = (anchor.freq as usize, anchor.time as usize);
            assert!((out.get(f, t) - spec.get(f, t)).abs() < 1e-6);
        }
    }

    #[test]
    fn out_of_bounds_points_rejected() {
        let spec = ramp(4, 6);
        let src = vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0), Point::new(2.0, 1.0)];
        let dst = vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0), Point::new(9.0, 1.0)];
        let cps = ControlPointSet::new(src, dst).unwrap();
        assert!(matches!(warp_spectrogram(&spec, &cps), Err(Error::ControlPoints(_))));
    }

    #[test]
    fn tiny_images_still_warp() {
        let mut rng = split_stream(0, 1);
        for nu in 1..4 {
            let spec = ramp(nu, 10);
            let draw = sample_warp(nu, 10, 2, &mut rng);
            let out = warp_spectrogram(&spec, &draw.control_points).unwrap();
            assert!(out.values().iter().all(|v| v.is_finite()));
        }
    }
}
