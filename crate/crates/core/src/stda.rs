//! Signal-space augmentations applied directly to IMU channel data:
//! magnitude scaling and warping, time scaling and warping, rotation and
//! jitter.
//!
//! Every transform comes in two flavours: a seeded one that draws its own
//! parameters, and a `_with`/`_by` one that takes the parameters explicitly.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView1, Axis as NdAxis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::SensorTrace;
use crate::noise::rng_from_seed;
use crate::quat::{Mat3, Quaternion};
use crate::spline::NaturalCubicSpline;

/// A `T × C` window of IMU channels (accel xyz then gyro xyz, per sensor).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalWindow {
    pub data: Array2<f64>,
    pub sample_rate_hz: f64,
    pub label: u32,
}

impl SignalWindow {
    pub fn new(data: Array2<f64>, sample_rate_hz: f64, label: u32) -> Result<Self> {
        if !data.ncols().is_multiple_of(3) {
            return Err(Error::param(
                "channels",
                format!("{} channels is not a multiple of 3", data.ncols()),
            ));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::param("sample_rate_hz", "must be positive and finite"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("data", "non-finite sample"));
        }
        Ok(SignalWindow {
            data,
            sample_rate_hz,
            label,
        })
    }

    /// Stacks `range` of each trace side by side: six channels per sensor.
    pub fn from_traces(
        traces: &[SensorTrace],
        range: std::ops::Range<usize>,
        label: u32,
    ) -> Result<Self> {
        let rate = traces.first().map_or(1.0, |t| t.sample_rate_hz);
        let len = range.len();
        let mut data = Array2::zeros((len, 6 * traces.len()));
        for (k, trace) in traces.iter().enumerate() {
            if range.end > trace.len() {
                return Err(Error::IndexOutOfRange {
                    index: range.end,
                    len: trace.len(),
                });
            }
            for (row, t) in range.clone().enumerate() {
                for axis in 0..3 {
                    data[[row, 6 * k + axis]] = trace.accel[t][axis];
                    data[[row, 6 * k + 3 + axis]] = trace.gyro[t][axis];
                }
            }
        }
        SignalWindow::new(data, rate, label)
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn channels(&self) -> usize {
        self.data.ncols()
    }

    fn with_data(&self, data: Array2<f64>) -> SignalWindow {
        SignalWindow {
            data,
            sample_rate_hz: self.sample_rate_hz,
            label: self.label,
        }
    }

    /// Truncates or pads (holding the last sample) to exactly `len` rows.
    pub fn fit_length(&self, len: usize) -> SignalWindow {
        let n = self.len();
        if n == len || n == 0 {
            return self.clone();
        }
        let mut data = Array2::zeros((len, self.channels()));
        for t in 0..len {
            data.row_mut(t).assign(&self.data.row(t.min(n - 1)));
        }
        self.with_data(data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpMode {
    /// Per-sample scale factors.
    Magnitude,
    /// Monotone source indices, `w(0) = 0` and `w(T−1) = T−1`.
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpCurve {
    mode: WarpMode,
    values: Vec<f64>,
}

impl WarpCurve {
    pub fn magnitude(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("curve", "non-finite scale factor"));
        }
        Ok(WarpCurve {
            mode: WarpMode::Magnitude,
            values,
        })
    }

    pub fn time(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::param("curve", "time warp needs at least 2 samples"));
        }
        if values[0] != 0.0 || values[n - 1] != (n - 1) as f64 {
            return Err(Error::param("curve", "time warp must map 0 → 0 and T−1 → T−1"));
        }
        if values.windows(2).any(|w| matches!(w[1].partial_cmp(&w[0]), None | Some(Ordering::Less))) {
            return Err(Error::param("curve", "time warp must be nondecreasing"));
        }
        Ok(WarpCurve {
            mode: WarpMode::Time,
            values,
        })
    }

    /// The identity time warp `w(t) = t`.
    pub fn identity_time(len: usize) -> Self {
        WarpCurve {
            mode: WarpMode::Time,
            values: (0..len).map(|t| t as f64).collect(),
        }
    }

    pub fn constant(len: usize, value: f64) -> Result<Self> {
        WarpCurve::magnitude(vec![value; len])
    }

    pub fn mode(&self) -> WarpMode {
        self.mode
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param("sigma", format!("{sigma} must be finite and >= 0")));
    }
    Ok(())
}

fn check_knots(knots: usize) -> Result<()> {
    if knots < 2 {
        return Err(Error::param("knots", format!("{knots} < 2")));
    }
    Ok(())
}

/// Draws `α ~ N(1, σ²)` from a fresh stream seeded with `seed`.
pub fn draw_scale_factor(sigma: f64, seed: u64) -> Result<f64> {
    check_sigma(sigma)?;
    let normal = Normal::new(1.0, sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
    Ok(normal.sample(&mut rng_from_seed(seed)))
}

/// Knot values `N(1, σ²)` at `knots` uniform positions over `[0, len−1]`,
/// joined by a natural cubic spline.
pub fn make_magnitude_curve(len: usize, sigma: f64, knots: usize, seed: u64) -> Result<WarpCurve> {
    check_sigma(sigma)?;
    check_knots(knots)?;
    let spline = magnitude_spline(len, sigma, knots, seed)?;
    WarpCurve::magnitude(spline.sample_grid(len))
}

/// The spline behind [`make_magnitude_curve`], for callers that need the knots.
pub fn magnitude_spline(len: usize, sigma: f64, knots: usize, seed: u64) -> Result<NaturalCubicSpline> {
    check_sigma(sigma)?;
    check_knots(knots)?;
    if len < 2 {
        return Err(Error::TooShort { needed: 2, got: len });
    }
    let normal = Normal::new(1.0, sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let values: Vec<f64> = (0..knots).map(|_| normal.sample(&mut rng)).collect();
    NaturalCubicSpline::uniform((len - 1) as f64, values)
}

/// Smooth random time warp whose local speed stays within
/// `[1/max_speed_ratio, max_speed_ratio]`.
///
/// Knot speeds are drawn from `U[1/r, r]`, spline-smoothed, clamped, then
/// integrated and renormalized so the warp spans exactly `[0, len−1]`.
pub fn make_time_warp(len: usize, knots: usize, max_speed_ratio: f64, seed: u64) -> Result<WarpCurve> {
    check_knots(knots)?;
    if !(max_speed_ratio.is_finite() && max_speed_ratio > 1.0) {
        return Err(Error::param(
            "max_speed_ratio",
            format!("{max_speed_ratio} must be > 1"),
        ));
    }
    let r = max_speed_ratio;
    let mut rng = rng_from_seed(seed);
    let speeds: Vec<f64> = (0..knots).map(|_| rng.random_range(1.0 / r..=r)).collect();
    time_warp_from_speeds(len, r, speeds)
}

/// Builds the warp from explicit knot speeds.
pub fn time_warp_from_speeds(len: usize, max_speed_ratio: f64, speeds: Vec<f64>) -> Result<WarpCurve> {
    if len < 2 {
        return Err(Error::TooShort { needed: 2, got: len });
    }
    let r = max_speed_ratio;
    let spline = NaturalCubicSpline::uniform((len - 1) as f64, speeds)?;
    let speed: Vec<f64> = spline
        .sample_grid(len)
        .into_iter()
        .map(|s| s.clamp(1.0 / r, r))
        .collect();
    // trapezoidal integration of the speed profile
    let mut w = vec![0.0; len];
    for t in 1..len {
        w[t] = w[t - 1] + 0.5 * (speed[t - 1] + speed[t]);
    }
    let total = w[len - 1];
    let target = (len - 1) as f64;
    for v in w.iter_mut() {
        *v *= target / total;
    }
    w[len - 1] = target;
    WarpCurve::time(w)
}

/// `X' = αX` with a single `α ~ N(1, σ²)`.
pub fn magnitude_scale(x: &SignalWindow, sigma: f64, seed: u64) -> Result<SignalWindow> {
    let alpha = draw_scale_factor(sigma, seed)?;
    Ok(magnitude_scale_by(x, alpha))
}

pub fn magnitude_scale_by(x: &SignalWindow, alpha: f64) -> SignalWindow {
    x.with_data(&x.data * alpha)
}

/// `X' = α ⊙ X` with a smooth random curve `α ∈ ℝᵀ`.
pub fn magnitude_warp(x: &SignalWindow, sigma: f64, knots: usize, seed: u64) -> Result<SignalWindow> {
    let curve = make_magnitude_curve(x.len(), sigma, knots, seed)?;
    magnitude_warp_with(x, &curve)
}

pub fn magnitude_warp_with(x: &SignalWindow, curve: &WarpCurve) -> Result<SignalWindow> {
    if curve.len() != x.len() {
        return Err(Error::LengthMismatch {
            field: "magnitude curve".into(),
            expected: x.len(),
            found: curve.len(),
        });
    }
    let mut data = x.data.clone();
    for (mut row, &a) in data.axis_iter_mut(NdAxis(0)).zip(curve.values()) {
        row *= a;
    }
    Ok(x.with_data(data))
}

/// Linear interpolation of the window at fractional source index `s`.
fn interp_row(data: &Array2<f64>, s: f64, out: &mut [f64]) {
    let n = data.nrows();
    let s = s.clamp(0.0, (n - 1) as f64);
    let i0 = s.floor() as usize;
    let frac = s - i0 as f64;
    let r0: ArrayView1<f64> = data.row(i0);
    if frac == 0.0 || i0 + 1 >= n {
        out.iter_mut().zip(r0).for_each(|(o, &v)| *o = v);
        return;
    }
    let r1 = data.row(i0 + 1);
    for ((o, &a), &b) in out.iter_mut().zip(r0).zip(r1) {
        *o = a + frac * (b - a);
    }
}

fn resample(x: &SignalWindow, sources: impl ExactSizeIterator<Item = f64>) -> SignalWindow {
    let c = x.channels();
    let mut data = Array2::zeros((sources.len(), c));
    if x.is_empty() {
        return x.with_data(data);
    }
    let mut row = vec![0.0; c];
    for (t, s) in sources.enumerate() {
        interp_row(&x.data, s, &mut row);
        data.row_mut(t).iter_mut().zip(&row).for_each(|(d, &v)| *d = v);
    }
    x.with_data(data)
}

/// Stretches or compresses the window: `T' = round(T/β)` samples, sample `t`
/// read from source index `t·β` by linear interpolation.
pub fn time_scale(x: &SignalWindow, beta: f64) -> Result<SignalWindow> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::param("beta", format!("{beta} must be > 0")));
    }
    if beta == 1.0 {
        return Ok(x.clone());
    }
    let out_len = (x.len() as f64 / beta).round() as usize;
    Ok(resample(x, (0..out_len).map(|t| t as f64 * beta)))
}

/// `X' = interp(X, w(t))` with a random smooth warp.
pub fn time_warp(x: &SignalWindow, knots: usize, max_speed_ratio: f64, seed: u64) -> Result<SignalWindow> {
    let curve = make_time_warp(x.len(), knots, max_speed_ratio, seed)?;
    time_warp_with(x, &curve)
}

pub fn time_warp_with(x: &SignalWindow, curve: &WarpCurve) -> Result<SignalWindow> {
    if curve.mode() != WarpMode::Time {
        return Err(Error::param("curve", "expected a time warp"));
    }
    if curve.len() != x.len() {
        return Err(Error::LengthMismatch {
            field: "time warp".into(),
            expected: x.len(),
            found: curve.len(),
        });
    }
    Ok(resample(x, curve.values().iter().copied()))
}

/// Euler angles (radians) for [`rotate_with`], composed intrinsic z·y·x.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotationAngles {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl RotationAngles {
    pub fn matrix(&self) -> Mat3 {
        Quaternion::from_euler_zyx(self.x, self.y, self.z).to_matrix()
    }

    /// Each angle independently from `U[−range, range]`.
    pub fn sample(range_rad: f64, seed: u64) -> Result<Self> {
        if !(range_rad.is_finite() && range_rad >= 0.0) {
            return Err(Error::param("rotation range", "must be finite and >= 0"));
        }
        if range_rad == 0.0 {
            return Ok(RotationAngles::default());
        }
        let mut rng = rng_from_seed(seed);
        Ok(RotationAngles {
            x: rng.random_range(-range_rad..=range_rad),
            y: rng.random_range(-range_rad..=range_rad),
            z: rng.random_range(-range_rad..=range_rad),
        })
    }
}

/// Applies one random rotation, angles `U[−π, π]` per axis, to every
/// triaxial group at every time step.
pub fn rotate(x: &SignalWindow, seed: u64) -> Result<SignalWindow> {
    let angles = RotationAngles::sample(std::f64::consts::PI, seed)?;
    rotate_with(x, &angles.matrix())
}

pub fn rotate_with(x: &SignalWindow, r: &Mat3) -> Result<SignalWindow> {
    if !x.channels().is_multiple_of(3) {
        return Err(Error::param(
            "channels",
            format!("{} channels is not a multiple of 3", x.channels()),
        ));
    }
    let mut data = x.data.clone();
    for mut row in data.axis_iter_mut(NdAxis(0)) {
        let row = row.as_slice_mut().expect("standard layout");
        for group in row.chunks_exact_mut(3) {
            let v = [group[0], group[1], group[2]];
            for (i, g) in group.iter_mut().enumerate() {
                *g = r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2];
            }
        }
    }
    Ok(x.with_data(data))
}

/// `X' = X + η`, `η ~ N(0, σ²)` i.i.d. per element.
pub fn jitter(x: &SignalWindow, sigma: f64, seed: u64) -> Result<SignalWindow> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let data = x.data.mapv(|v| v + normal.sample(&mut rng));
    Ok(x.with_data(data))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::Rng;

    use super::*;
    use crate::quat::determinant;

    fn window(data: Array2<f64>) -> SignalWindow {
        SignalWindow::new(data, 50.0, 3).unwrap()
    }

    fn random_window(len: usize, channels: usize, seed: u64) -> SignalWindow {
        let mut rng = rng_from_seed(seed);
        let data = Array2::from_shape_fn((len, channels), |_| rng.random_range(-5.0..5.0));
        window(data)
    }

    #[test]
    fn window_requires_triaxial_groups() {
        assert!(SignalWindow::new(Array2::zeros((4, 4)), 50.0, 0).is_err());
        assert!(SignalWindow::new(Array2::from_elem((4, 3), f64::NAN), 50.0, 0).is_err());
    }

    #[test]
    fn magnitude_curve_zero_sigma_is_flat() {
        let c = make_magnitude_curve(50, 0.0, 4, 1).unwrap();
        assert!(c.values().iter().all(|&v| v == 1.0));
        assert!(make_magnitude_curve(50, 0.1, 1, 1).is_err());
    }

    #[test]
    fn magnitude_curve_passes_through_knots() {
        for seed in 0..20 {
            let spline = magnitude_spline(100, 0.4, 4, seed).unwrap();
            let curve = make_magnitude_curve(100, 0.4, 4, seed).unwrap();
            for (x, y) in spline.knots() {
                assert_abs_diff_eq!(spline.eval(x), y, epsilon = 1e-9);
                if x.fract() == 0.0 {
                    assert_abs_diff_eq!(curve.values()[x as usize], y, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn magnitude_curve_mean_is_one() {
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|s| {
                let c = make_magnitude_curve(30, 0.2, 4, s).unwrap();
                c.values().iter().sum::<f64>() / 30.0
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn time_warp_near_unit_ratio_is_identity() {
        let w = make_time_warp(100, 4, 1.0 + 1e-9, 3).unwrap();
        for (t, v) in w.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, t as f64, epsilon = 1e-6);
        }
    }

    #[test]
    fn time_warp_rejects_bad_ratio() {
        assert!(make_time_warp(100, 2, 1.0, 0).is_err());
        assert!(make_time_warp(100, 2, 0.5, 0).is_err());
        assert!(make_time_warp(100, 1, 1.5, 0).is_err());
    }

    #[test]
    fn time_warp_grid_configurations() {
        for knots in [2, 4] {
            for r in [1.5, 2.0] {
                let w = make_time_warp(100, knots, r, 17).unwrap();
                assert_eq!(w.values()[0], 0.0);
                assert_eq!(w.values()[99], 99.0);
                for d in w.values().windows(2) {
                    let speed = d[1] - d[0];
                    assert!(speed > 0.0);
                }
            }
        }
    }

    #[test]
    fn magnitude_scale_formula() {
        let x = window(array![[2.0, 4.0, 0.0], [6.0, 8.0, 0.0]]);
        let y = magnitude_scale_by(&x, 0.5);
        assert_eq!(y.data, array![[1.0, 2.0, 0.0], [3.0, 4.0, 0.0]]);
        assert_eq!(y.label, 3);
        assert_eq!(magnitude_scale(&x, 0.0, 9).unwrap(), x);
        for sigma in [0.1, 0.2, 0.4, 0.6] {
            assert!(magnitude_scale(&x, sigma, 1).is_ok());
        }
        assert!(magnitude_scale(&x, -0.1, 1).is_err());
    }

    #[test]
    fn magnitude_warp_cases() {
        let x = random_window(20, 6, 1);
        assert_eq!(magnitude_warp(&x, 0.0, 4, 2).unwrap(), x);
        let doubled = magnitude_warp_with(&x, &WarpCurve::constant(20, 2.0).unwrap()).unwrap();
        assert_eq!(doubled.data, &x.data * 2.0);
        for sigma in [0.2, 0.4] {
            for k in [2, 4] {
                assert_eq!(magnitude_warp(&x, sigma, k, 5).unwrap().len(), 20);
            }
        }
        assert!(magnitude_warp_with(&x, &WarpCurve::constant(19, 1.0).unwrap()).is_err());
    }

    #[test]
    fn time_scale_cases() {
        let x = window(Array2::from_shape_fn((5, 3), |(t, _)| t as f64));
        assert_eq!(time_scale(&x, 1.0).unwrap(), x);
        let y = time_scale(&x, 2.0).unwrap();
        assert_eq!(y.data.column(0).to_vec(), vec![0.0, 2.0, 4.0]);
        assert_eq!(y.sample_rate_hz, x.sample_rate_hz);
        let z = time_scale(&x, 0.5).unwrap();
        assert_eq!(z.len(), 10);
        assert_eq!(z.data[[1, 0]], 0.5);
        assert_eq!(z.data[[9, 0]], 4.0);
        assert!(time_scale(&x, 0.0).is_err());
        assert!(time_scale(&x, -1.0).is_err());
        for (lo, hi) in [(0.7, 0.9), (1.1, 1.3), (0.75, 1.5), (0.5, 2.0)] {
            let mut rng = rng_from_seed(4);
            let beta: f64 = rng.random_range(lo..=hi);
            let y = time_scale(&x, beta).unwrap();
            assert_eq!(y.len(), (5.0 / beta).round() as usize);
        }
    }

    #[test]
    fn time_warp_identity_and_endpoints() {
        let x = random_window(40, 6, 2);
        assert_eq!(time_warp_with(&x, &WarpCurve::identity_time(40)).unwrap(), x);
        let y = time_warp(&x, 4, 2.0, 8).unwrap();
        assert_eq!(y.data.row(0), x.data.row(0));
        assert_eq!(y.data.row(39), x.data.row(39));
    }

    /// Piecewise-linear inverse of a monotone warp, evaluated at `t`.
    fn invert(w: &[f64], t: f64) -> f64 {
        let i = w.partition_point(|&v| v <= t).clamp(1, w.len() - 1);
        let (a, b) = (w[i - 1], w[i]);
        if b == a {
            return (i - 1) as f64;
        }
        (i - 1) as f64 + (t - a) / (b - a)
    }

    #[test]
    fn warp_then_unwarp_recovers_ramp() {
        let len = 100;
        let ramp = window(Array2::from_shape_fn((len, 3), |(t, _)| t as f64));
        for seed in 0..50 {
            let curve = make_time_warp(len, 2, 1.5, seed).unwrap();
            let warped = time_warp_with(&ramp, &curve).unwrap();
            let inverse: Vec<f64> = (0..len).map(|t| invert(curve.values(), t as f64)).collect();
            let back = resample(&warped, inverse.into_iter());
            let err = (0..len)
                .map(|t| (back.data[[t, 0]] - t as f64).abs())
                .fold(0.0, f64::max);
            assert!(err <= 0.1, "seed {seed}: {err}");
        }
    }

    #[test]
    fn rotate_cases() {
        let x = window(array![[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]]);
        let id = rotate_with(&x, &RotationAngles::default().matrix()).unwrap();
        assert_eq!(id, x);
        let r = RotationAngles { x: 0.0, y: 0.0, z: FRAC_PI_2 }.matrix();
        let y = rotate_with(&x, &r).unwrap();
        assert_abs_diff_eq!(y.data[[0, 0]], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y.data[[0, 1]], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y.data[[0, 3]], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn jitter_cases() {
        let x = random_window(10, 3, 3);
        assert_eq!(jitter(&x, 0.0, 1).unwrap(), x);
        let big = window(Array2::zeros((100_000 / 3 + 1, 3)));
        for sigma in [0.05, 0.1, 0.15, 0.2] {
            let y = jitter(&big, sigma, 77).unwrap();
            let n = y.data.len() as f64;
            let mean = y.data.sum() / n;
            let std = (y.data.mapv(|v| (v - mean).powi(2)).sum() / n).sqrt();
            assert!((std - sigma).abs() / sigma < 0.02, "{std} vs {sigma}");
        }
        assert!(jitter(&x, -1.0, 0).is_err());
    }

    #[test]
    fn fit_length_truncates_and_holds() {
        let x = window(Array2::from_shape_fn((4, 3), |(t, _)| t as f64));
        assert_eq!(x.fit_length(2).data.column(0).to_vec(), vec![0.0, 1.0]);
        assert_eq!(x.fit_length(6).data.column(0).to_vec(), vec![0.0, 1.0, 2.0, 3.0, 3.0, 3.0]);
    }

    proptest! {
        #[test]
        fn rotate_preserves_norms(seed in any::<u64>(), len in 1usize..20, groups in 1usize..5) {
            let x = random_window(len, 3 * groups, seed);
            let angles = RotationAngles::sample(std::f64::consts::PI, seed ^ 1).unwrap();
            let r = angles.matrix();
            prop_assert!((determinant(&r) - 1.0).abs() < 1e-9);
            let y = rotate_with(&x, &r).unwrap();
            for t in 0..len {
                for g in 0..groups {
                    let n0: f64 = (0..3).map(|i| x.data[[t, 3 * g + i]].powi(2)).sum::<f64>().sqrt();
                    let n1: f64 = (0..3).map(|i| y.data[[t, 3 * g + i]].powi(2)).sum::<f64>().sqrt();
                    prop_assert!((n0 - n1).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn time_warp_is_monotone(seed in any::<u64>(), knots in 2usize..6, r in 1.01f64..3.0, len in 2usize..200) {
            let w = make_time_warp(len, knots, r, seed).unwrap();
            prop_assert_eq!(w.values()[0], 0.0);
            prop_assert_eq!(w.values()[len - 1], (len - 1) as f64);
            for d in w.values().windows(2) {
                prop_assert!(d[1] > d[0]);
            }
        }
    }
}
