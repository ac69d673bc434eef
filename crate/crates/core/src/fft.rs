//! Thin wrappers around rustfft with a thread-local plan cache.
//!
//! Both directions are unnormalized (forward kernel `e^{-j2πkn/N}`, inverse
//! `e^{+j2πkn/N}`); callers apply their own scaling convention.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Plan (or fetch a cached) forward FFT of the given length.
pub fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

/// Plan (or fetch a cached) inverse FFT of the given length.
pub fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// In-place unnormalized forward transform.
pub fn fft_in_place(data: &mut [Complex64]) {
    forward_plan(data.len()).process(data);
}

/// In-place unnormalized inverse transform.
pub fn ifft_in_place(data: &mut [Complex64]) {
    inverse_plan(data.len()).process(data);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_restores_input() {
        let mut data: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let orig = data.clone();
        fft_in_place(&mut data);
        ifft_in_place(&mut data);
        for (a, b) in data.iter().zip(orig.iter()) {
            assert!((a / 64.0 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_sign_convention_is_negative_exponent() {
        // A tone e^{+j2πn/N} must land in bin 1 under the forward transform.
        let n = 32;
        let mut data: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .collect();
        fft_in_place(&mut data);
        assert!((data[1].re - n as f64).abs() < 1e-9);
        assert!(data[2].norm() < 1e-9);
    }
}
