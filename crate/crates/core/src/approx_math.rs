//! Approximation kernels of the hardware datapath and their exact references.
//!
//! Everything on the approximate path runs in binary32. CORDIC works in
//! degrees: the lookup table holds `atan(2^-i)` and the accumulated angle is
//! folded into the unsigned orientation range `[0, 180)`.

/// Default number of CORDIC micro-rotations (LUT entries `i = 0..=14`).
pub const DEFAULT_CORDIC_ITERATIONS: usize = 15;
/// Default Newton-Raphson iteration count for the reciprocal square root.
pub const DEFAULT_NEWTON_ITERATIONS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum MathError {
    #[error("rsqrt domain error: argument {0} must be positive and finite")]
    Domain(f32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CordicConfig {
    angle_lut: Vec<f32>,
    gain: f32,
}

impl CordicConfig {
    pub fn new(iterations: usize) -> Self {
        let angle_lut = (0..iterations)
            .map(|i| (0.5f64.powi(i as i32)).atan().to_degrees() as f32)
            .collect();
        let gain = (0..iterations)
            .map(|i| (1.0 + 0.25f64.powi(i as i32)).sqrt())
            .product::<f64>() as f32;
        Self { angle_lut, gain }
    }

    pub fn iterations(&self) -> usize {
        self.angle_lut.len()
    }

    /// `atan(2^-i)` in degrees for each micro-rotation.
    pub fn angle_lut(&self) -> &[f32] {
        &self.angle_lut
    }

    /// Magnitude inflation `K = prod sqrt(1 + 2^-2i)` divided out of the result.
    pub fn gain(&self) -> f32 {
        self.gain
    }
}

impl Default for CordicConfig {
    fn default() -> Self {
        Self::new(DEFAULT_CORDIC_ITERATIONS)
    }
}

/// Gradient magnitude and unsigned orientation in degrees, `[0, 180)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarResult {
    pub magnitude: f32,
    pub angle_deg: f32,
}

/// Folds any angle in `(-180, 360)` into `[0, 180)`.
#[inline]
fn fold_unsigned(mut deg: f32) -> f32 {
    if deg < 0.0 {
        deg += 180.0;
    }
    if deg >= 180.0 {
        deg -= 180.0;
    }
    // normalizes -0.0
    deg + 0.0
}

/// Joint magnitude/orientation by CORDIC vectoring in binary32.
///
/// Vectors in the left half-plane (and the negative y-axis) are reflected
/// through the origin first, which leaves the unsigned orientation unchanged
/// and keeps the rotation inside the convergence range. Each micro-rotation
/// drives `y` toward zero: clockwise when `y >= 0`, counter-clockwise
/// otherwise. The zero vector is defined to have magnitude 0 and angle 0.
pub fn cordic_vectoring(x: f32, y: f32, cfg: &CordicConfig) -> PolarResult {
    if x == 0.0 && y == 0.0 {
        return PolarResult::default();
    }
    let (mut x, mut y) = if x < 0.0 || (x == 0.0 && y < 0.0) {
        (-x, -y)
    } else {
        (x, y)
    };
    // -0.0 components would otherwise break point symmetry
    x += 0.0;
    y += 0.0;

    let mut z = 0.0f32;
    let mut scale = 1.0f32;
    for &atan_i in &cfg.angle_lut {
        let (dx, dy) = (y * scale, x * scale);
        if y >= 0.0 {
            x += dx;
            y -= dy;
            z += atan_i;
        } else {
            x -= dx;
            y += dy;
            z -= atan_i;
        }
        scale *= 0.5;
    }

    PolarResult {
        magnitude: x / cfg.gain,
        angle_deg: fold_unsigned(z),
    }
}

/// Exact magnitude `sqrt(x^2 + y^2)` and `atan2(y, x)` folded into `[0, 180)`.
pub fn reference_polar(x: f32, y: f32) -> PolarResult {
    let (xd, yd) = (f64::from(x), f64::from(y));
    let magnitude = xd.hypot(yd) as f32;
    let mut deg = yd.atan2(xd).to_degrees();
    if deg < 0.0 {
        deg += 180.0;
    }
    if deg >= 180.0 {
        deg -= 180.0;
    }
    PolarResult {
        magnitude,
        angle_deg: fold_unsigned(deg as f32),
    }
}

/// Distance between two unsigned orientations on the 180 degree circle.
pub fn orientation_distance(a: f32, b: f32) -> f32 {
    let d = (a - b).abs() % 180.0;
    d.min(180.0 - d)
}

// Seed mantissas indexed by exponent parity. They center the seed ratio
// y0*sqrt(a) on [0.824, 1.166) so three iterations stay below 1.2e-5.
const SEED_EVEN: f32 = 0.8244;
const SEED_ODD: f32 = 0.5829;

/// Seed for `1/sqrt(a)`: exponent halved and negated, mantissa taken from a
/// two-entry table selected by exponent parity.
fn rsqrt_seed(a: f32) -> f32 {
    let (bits, bias_adjust) = if a.is_normal() {
        (a.to_bits(), 0)
    } else {
        // subnormal: renormalize by 2^24
        ((a * 16_777_216.0).to_bits(), 24)
    };
    let exp = ((bits >> 23) & 0xff) as i32 - 127 - bias_adjust;
    let half = exp.div_euclid(2);
    let mantissa = if exp.rem_euclid(2) == 0 { SEED_EVEN } else { SEED_ODD };
    mantissa * f32::from_bits(((127 - half) as u32) << 23)
}

/// Newton-Raphson reciprocal square root, `y <- y * (1.5 - 0.5 * a * y^2)`.
pub fn rsqrt_newton(a: f32, iterations: u32) -> Result<f32, MathError> {
    if a.is_nan() || a <= 0.0 || a.is_infinite() {
        return Err(MathError::Domain(a));
    }
    let half_a = 0.5 * a;
    let mut y = rsqrt_seed(a);
    for _ in 0..iterations {
        y *= 1.5 - half_a * y * y;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-6)
    }

    #[test]
    fn lut_shape_and_gain() {
        let cfg = CordicConfig::default();
        assert_eq!(cfg.iterations(), 15);
        assert_eq!(cfg.angle_lut()[0], 45.0);
        assert!(cfg.angle_lut().windows(2).all(|w| w[0] > w[1]));
        assert!((1.64676..=1.64677).contains(&cfg.gain()), "{}", cfg.gain());
    }

    #[test]
    fn cordic_examples() {
        let cfg = CordicConfig::default();

        let r = cordic_vectoring(1.0, 0.0, &cfg);
        assert!(rel(r.magnitude as f64, 1.0) <= 1e-3);
        assert!(orientation_distance(r.angle_deg, 0.0) <= 0.01);

        let r = cordic_vectoring(1.0, 1.0, &cfg);
        assert!(rel(r.magnitude as f64, 2f64.sqrt()) <= 1e-3);
        assert!((r.angle_deg - 45.0).abs() <= 0.01);

        let r = cordic_vectoring(3.0, 4.0, &cfg);
        assert!(rel(r.magnitude as f64, 5.0) <= 1e-3);
        assert!((r.angle_deg - 53.1301).abs() <= 0.01);

        let r = cordic_vectoring(0.0, 0.0, &cfg);
        assert_eq!(
            r,
            PolarResult {
                magnitude: 0.0,
                angle_deg: 0.0
            }
        );
    }

    #[test]
    fn cordic_axis_residual_stays_in_first_bin() {
        let cfg = CordicConfig::default();
        for k in 1..=510 {
            let r = cordic_vectoring(k as f32, 0.0, &cfg);
            assert!(r.angle_deg >= 0.0 && r.angle_deg < 0.01, "k={k} {r:?}");
            let l = cordic_vectoring(-(k as f32), 0.0, &cfg);
            assert_eq!(r, l);
        }
    }

    #[test]
    fn cordic_point_symmetry_on_axes() {
        let cfg = CordicConfig::default();
        for &(x, y) in &[(0.0, 3.0), (5.0, 0.0), (-0.0, 2.0), (0.0, -0.0), (7.0, -9.0)] {
            assert_eq!(cordic_vectoring(x, y, &cfg), cordic_vectoring(-x, -y, &cfg));
        }
    }

    #[test]
    fn reference_examples() {
        let r = reference_polar(3.0, 4.0);
        assert_eq!(r.magnitude, 5.0);
        assert!((r.angle_deg - 53.130_104).abs() < 1e-4);
        assert_eq!(
            reference_polar(-1.0, 0.0),
            PolarResult {
                magnitude: 1.0,
                angle_deg: 0.0
            }
        );
        assert_eq!(
            reference_polar(0.0, 2.0),
            PolarResult {
                magnitude: 2.0,
                angle_deg: 90.0
            }
        );
        assert_eq!(reference_polar(0.0, 0.0), PolarResult::default());
        assert_eq!(reference_polar(1.0, -0.0).angle_deg.to_bits(), 0);
    }

    #[test]
    fn rsqrt_examples() {
        for (a, want) in [(1.0f32, 1.0f64), (4.0, 0.5), (0.25, 2.0)] {
            let y = rsqrt_newton(a, DEFAULT_NEWTON_ITERATIONS).unwrap();
            assert!(rel(y as f64, want) <= 1e-4, "a={a} y={y}");
        }
        assert_eq!(rsqrt_newton(0.0, 3), Err(MathError::Domain(0.0)));
        assert!(rsqrt_newton(-1.0, 3).is_err());
        assert!(rsqrt_newton(f32::NAN, 3).is_err());
        assert!(rsqrt_newton(f32::INFINITY, 3).is_err());
    }

    #[test]
    fn rsqrt_handles_subnormals_and_extremes() {
        for a in [f32::MIN_POSITIVE / 8.0, f32::MIN_POSITIVE, 1e-30, 1e30, f32::MAX / 2.0] {
            let y = rsqrt_newton(a, 3).unwrap() as f64;
            let want = 1.0 / (a as f64).sqrt();
            assert!(rel(y, want) <= 1e-4, "a={a:e} y={y:e} want={want:e}");
        }
    }

    #[test]
    fn rsqrt_error_non_increasing_in_iterations() {
        let n = 2000;
        for k in 0..n {
            let a = 10f64.powf(-6.0 + 12.0 * (k as f64 + 0.5) / n as f64) as f32;
            let exact = 1.0 / (a as f64).sqrt();
            let mut prev = f64::INFINITY;
            for it in 0..=6 {
                let err = rel(rsqrt_newton(a, it).unwrap() as f64, exact);
                // once converged, the iterate can hop between neighbouring
                // binary32 values
                let floor = f64::from(f32::EPSILON);
                assert!(err <= prev.max(floor), "a={a:e} it={it} err={err:e} prev={prev:e}");
                prev = err;
            }
        }
    }
}
