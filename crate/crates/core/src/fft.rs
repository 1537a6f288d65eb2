//! Complex FFT of arbitrary length: iterative radix-2 for powers of two,
//! Bluestein's chirp-z reduction otherwise.
//!
//! Forward transforms use the unnormalised kernel `e^{−2πi kn/N}`; inverse
//! transforms include the `1/N` factor. Plans are immutable after
//! construction and can be shared across threads.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math::{cos, sin};

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    /// `e^{−2πi k/n}` for `k < n/2`.
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(cos(a), sin(a))
            })
            .collect();
        Self { n, twiddles, bitrev }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[derive(Debug, Clone)]
enum Plan {
    Identity,
    Radix2(Radix2),
    Bluestein {
        inner: Radix2,
        /// `e^{−πi k²/n}` for `k < n`.
        chirp: Vec<Complex64>,
        /// FFT of the zero-padded conjugate chirp.
        kernel: Vec<Complex64>,
    },
}

/// A reusable 1-D transform of fixed length.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    plan: Plan,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT length must be positive");
        let plan = if n == 1 {
            Plan::Identity
        } else if n.is_power_of_two() {
            Plan::Radix2(Radix2::new(n))
        } else {
            let m = (2 * n - 1).next_power_of_two();
            let inner = Radix2::new(m);
            let chirp: Vec<Complex64> = (0..n)
                .map(|k| {
                    // k² mod 2n keeps the angle small for large k.
                    let k2 = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
                    let a = -PI * k2 / n as f64;
                    Complex64::new(cos(a), sin(a))
                })
                .collect();
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            kernel[0] = chirp[0].conj();
            for k in 1..n {
                kernel[k] = chirp[k].conj();
                kernel[m - k] = chirp[k].conj();
            }
            inner.forward(&mut kernel);
            Plan::Bluestein { inner, chirp, kernel }
        };
        Self { n, plan }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "buffer length does not match plan");
        match &self.plan {
            Plan::Identity => {}
            Plan::Radix2(r) => r.forward(buf),
            Plan::Bluestein { inner, chirp, kernel } => {
                let m = inner.n;
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for k in 0..self.n {
                    work[k] = buf[k] * chirp[k];
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel) {
                    *w *= k;
                }
                // Inverse via conjugation; the 1/m factor is folded below.
                for w in work.iter_mut() {
                    *w = w.conj();
                }
                inner.forward(&mut work);
                let scale = 1.0 / m as f64;
                for k in 0..self.n {
                    buf[k] = work[k].conj() * scale * chirp[k];
                }
            }
        }
    }

    /// In-place inverse transform, normalised by `1/N`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

/// Index of frequency `k` (possibly negative) in natural FFT order.
#[inline]
pub fn natural_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Signed frequency of position `i` in centred (fftshift) order.
#[inline]
pub fn centered_freq(i: usize, n: usize) -> i64 {
    i as i64 - (n / 2) as i64
}

/// Position of signed frequency `k` in centred order, if representable.
#[inline]
pub fn centered_index(k: i64, n: usize) -> Option<usize> {
    let i = k + (n / 2) as i64;
    (0..n as i64).contains(&i).then_some(i as usize)
}

/// Signed frequencies of a centred axis of length `n`.
pub fn centered_freqs(n: usize) -> Vec<i64> {
    (0..n).map(|i| centered_freq(i, n)).collect()
}

/// Transforms every line of a row-major N-d array along `axis`.
pub(crate) fn transform_axis(data: &mut [Complex64], dims: &[usize], axis: usize, fft: &Fft) {
    let n = dims[axis];
    debug_assert_eq!(fft.len(), n);
    let stride: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[base + k * stride];
            }
            fft.forward(&mut line);
            for (k, v) in line.iter().enumerate() {
                data[base + k * stride] = *v;
            }
        }
    }
}
