//! Tapering windows for range and Doppler processing.

use crate::fft::fft_in_place;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Window applied along one processing axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WindowKind {
    Rectangular,
    /// Dolph-Chebyshev window with equiripple sidelobes at `-sidelobe_db`.
    Chebyshev {
        sidelobe_db: f64,
    },
}

impl WindowKind {
    pub fn label(&self) -> String {
        match self {
            WindowKind::Rectangular => "rect".to_string(),
            WindowKind::Chebyshev { sidelobe_db } => format!("cheb{:.0}", sidelobe_db),
        }
    }

    /// Build the window coefficients, peak-normalized to 1.
    pub fn build(&self, n: usize) -> Vec<f64> {
        match self {
            WindowKind::Rectangular => vec![1.0; n],
            WindowKind::Chebyshev { sidelobe_db } => chebwin(n, *sidelobe_db),
        }
    }

    /// Half-width of the window's DFT mainlobe (peak to first null) in
    /// resolution cells (units of 1/n of the unambiguous axis).
    ///
    /// For the Chebyshev window this is essentially independent of `n`; a
    /// 100 dB design reaches its first null near 3.9 cells.
    pub fn mainlobe_halfwidth_cells(&self, n: usize) -> f64 {
        match self {
            WindowKind::Rectangular => 1.0,
            WindowKind::Chebyshev { sidelobe_db } => {
                let order = (n - 1) as f64;
                let r = 10f64.powf(sidelobe_db / 20.0);
                let beta = ((r.max(1.0)).acosh() / order).cosh();
                // first null of T_order(beta*cos(pi f)): beta*cos(pi f) = cos(pi/(2 order))
                let x = (PI / (2.0 * order)).cos() / beta;
                let f = x.clamp(-1.0, 1.0).acos() / PI;
                f * n as f64
            }
        }
    }
}

/// Dolph-Chebyshev window of length `n` with sidelobe attenuation `at_db` (> 0),
/// peak-normalized. Frequency-domain construction, matching the standard
/// formulation used by common DSP toolboxes.
pub fn chebwin(n: usize, at_db: f64) -> Vec<f64> {
    assert!(n >= 2, "window length must be at least 2");
    let order = (n - 1) as f64;
    let beta = ((10f64.powf(at_db.abs() / 20.0)).acosh() / order).cosh();

    // Chebyshev polynomial T_order evaluated at beta*cos(pi k / n).
    let mut p: Vec<Complex64> = (0..n)
        .map(|k| {
            let x = beta * (PI * k as f64 / n as f64).cos();
            let v = if x > 1.0 {
                (order * x.acosh()).cosh()
            } else if x < -1.0 {
                let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                sign * (order * (-x).acosh()).cosh()
            } else {
                (order * x.acos()).cos()
            };
            Complex64::new(v, 0.0)
        })
        .collect();

    let w: Vec<f64> = if n % 2 == 1 {
        fft_in_place(&mut p);
        let half = n.div_ceil(2);
        let mut w: Vec<f64> = (1..half).rev().map(|i| p[i].re).collect();
        w.extend((0..half).map(|i| p[i].re));
        w
    } else {
        // half-bin phase shift keeps the even-length window real and symmetric
        for (k, v) in p.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, PI * k as f64 / n as f64);
        }
        fft_in_place(&mut p);
        let half = n / 2 + 1;
        let mut w: Vec<f64> = (1..half).rev().map(|i| p[i].re).collect();
        w.extend((1..half).map(|i| p[i].re));
        w
    };

    let peak = w.iter().cloned().fold(f64::MIN, f64::max);
    w.into_iter().map(|v| v / peak).collect()
}
