//! Complex FFT used by the spectral estimators.
//!
//! Power-of-two lengths run through an iterative radix-2 butterfly; every
//! other length goes through Bluestein's chirp-z reformulation on a padded
//! power-of-two grid, so any signal length is handled exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] use num_traits::Float;

/// Minimal complex value; only what the transforms need.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Complex::new(r * theta.cos(), r * theta.sin())
    }

    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    pub fn mul(self, other: Complex) -> Self {
        Complex::new(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )
    }

    pub fn add(self, other: Complex) -> Self {
        Complex::new(self.re + other.re, self.im + other.im)
    }

    pub fn sub(self, other: Complex) -> Self {
        Complex::new(self.re - other.re, self.im - other.im)
    }

    pub fn scale(self, k: f64) -> Self {
        Complex::new(self.re * k, self.im * k)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

fn bit_reverse_permute(buf: &mut [Complex]) {
    let n = buf.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
}

fn fft_radix2(buf: &mut [Complex], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    bit_reverse_permute(buf);
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let wlen = Complex::from_polar(1.0, ang);
        let mut start = 0;
        while start < n {
            let mut w = Complex::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2].mul(w);
                buf[start + k] = u.add(v);
                buf[start + k + len / 2] = u.sub(v);
                w = w.mul(wlen);
            }
            start += len;
        }
        len <<= 1;
    }
    if inverse {
        let inv = 1.0 / n as f64;
        for v in buf.iter_mut() {
            *v = v.scale(inv);
        }
    }
}

/// Bluestein chirp for index `n` against length `len`: exp(sign*i*pi*n^2/len),
/// with n^2 reduced mod 2*len to keep the angle well conditioned.
fn chirp(n: usize, len: usize, sign: f64) -> Complex {
    let q = ((n as u64 * n as u64) % (2 * len as u64)) as f64;
    Complex::from_polar(1.0, sign * PI * q / len as f64)
}

fn fft_bluestein(buf: &mut [Complex], inverse: bool) {
    let n = buf.len();
    let m = (2 * n - 1).next_power_of_two();
    let sign = if inverse { 1.0 } else { -1.0 };

    let mut a = vec![Complex::ZERO; m];
    let mut b = vec![Complex::ZERO; m];
    for i in 0..n {
        let c = chirp(i, n, sign);
        a[i] = buf[i].mul(c);
        let cc = c.conj();
        b[i] = cc;
        if i != 0 {
            b[m - i] = cc;
        }
    }
    fft_radix2(&mut a, false);
    fft_radix2(&mut b, false);
    for i in 0..m {
        a[i] = a[i].mul(b[i]);
    }
    fft_radix2(&mut a, true);
    for i in 0..n {
        buf[i] = a[i].mul(chirp(i, n, sign));
    }
    if inverse {
        let inv = 1.0 / n as f64;
        for v in buf.iter_mut() {
            *v = v.scale(inv);
        }
    }
}

/// In-place FFT of arbitrary length. Forward transform is unnormalized;
/// the inverse divides by the length.
pub fn fft_in_place(buf: &mut [Complex], inverse: bool) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        fft_radix2(buf, inverse);
    } else {
        fft_bluestein(buf, inverse);
    }
}

/// Forward FFT of a real sequence; returns the full complex spectrum.
pub fn fft_real(x: &[f64]) -> Vec<Complex> {
    let mut buf: Vec<Complex> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    buf
}
