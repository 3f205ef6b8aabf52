//! Platform-independent sampling on top of ChaCha8.
//!
//! Only IEEE basic operations and `sqrt` (both correctly rounded everywhere)
//! are used, so a seed produces the same bytes on every platform. The
//! platform `ln`/`sin`/`cos` are avoided because their last bit is not
//! specified.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct PortableRng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl PortableRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n` (Lemire's widening multiply, with rejection).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.inner.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal by Marsaglia's polar method.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * ln(s) / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }
}

/// Natural logarithm for positive finite `x` from basic operations only.
pub fn ln(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    const LN_2: f64 = std::f64::consts::LN_2;
    const SQRT_2: f64 = std::f64::consts::SQRT_2;
    let mut x = x;
    let mut exp = 0i64;
    if x < f64::MIN_POSITIVE {
        x *= (1u64 << 54) as f64;
        exp -= 54;
    }
    let bits = x.to_bits();
    exp += ((bits >> 52) & 0x7ff) as i64 - 1023;
    let mut m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    if m > SQRT_2 {
        m /= 2.0;
        exp += 1;
    }
    // ln(m) = 2 atanh(t), t = (m - 1) / (m + 1), |t| < 0.172
    let t = (m - 1.0) / (m + 1.0);
    let t2 = t * t;
    let mut term = t;
    let mut sum = 0.0;
    let mut k = 1.0;
    while k < 60.0 {
        sum += term / k;
        term *= t2;
        k += 2.0;
    }
    2.0 * sum + exp as f64 * LN_2
}

/// `(sin θ, cos θ)` by Taylor series; accurate to a few ulps for `|θ| <= π/2`.
pub fn sin_cos(theta: f64) -> (f64, f64) {
    let t2 = theta * theta;
    let (mut s, mut c) = (0.0, 0.0);
    let (mut st, mut ct) = (theta, 1.0);
    for n in 0..30 {
        s += st;
        c += ct;
        let a = (2 * n + 2) as f64;
        let b = (2 * n + 3) as f64;
        st *= -t2 / (a * b);
        ct *= -t2 / ((a - 1.0) * a);
    }
    (s, c)
}
