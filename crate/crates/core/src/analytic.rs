//! Closed-form cross-validation oracles for the jittered receive symbol:
//! the exact nonuniform-kernel DFT output and its first-order Taylor model,
//! evaluated per OFDM symbol including the cyclic prefix samples.
//!
//! Both use the receiver transform convention of [`crate::ofdm`]
//! (`e^{-j2πlν'/(ηN)} / sqrt(ηN)`), so at zero jitter they reduce exactly to
//! the demodulator output before FDZP discard.

use crate::error::{Result, SimError};
use crate::fft;
use crate::ofdm::OfdmConfig;
use crate::resample::sinc;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Oracle scale cap: the double sums are O((ηN)·η(N+N_CP)).
pub const ORACLE_MAX_NFFT: usize = 512;

/// First-order ICI model constants.
#[derive(Debug, Clone, Copy)]
pub struct FirstOrderModel {
    /// ω = π/(T_s/η), the Taylor expansion frequency of the sampling kernel.
    pub omega: f64,
}

impl FirstOrderModel {
    pub fn new(cfg: &OfdmConfig) -> Self {
        FirstOrderModel {
            omega: PI * cfg.fs_hz(),
        }
    }
}

/// First-order kernel weight between transmit sample ν and receive sample ν'.
///
/// Unity on the diagonal; off-diagonal, `cos(π(ν'-ν))/(π(ν'-ν)) · ω·Δδ`
/// computed as `(-1)^(ν'-ν)/(π(ν'-ν))` to avoid evaluating the cosine.
pub fn phi(
    nu: i64,
    nu_prime: i64,
    delta_dac_s: f64,
    delta_adc_s: f64,
    cfg: &OfdmConfig,
) -> f64 {
    if nu_prime == nu {
        return 1.0;
    }
    let dm = nu_prime - nu;
    let sign = if dm.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let model = FirstOrderModel::new(cfg);
    sign / (PI * dm as f64) * model.omega * (delta_adc_s - delta_dac_s)
}

fn check_inputs(
    x_cp: &[Complex64],
    dac: &[f64],
    adc: &[f64],
    cfg: &OfdmConfig,
) -> Result<(usize, usize)> {
    let nfft = cfg.eta * cfg.n;
    let cp = cfg.eta * cfg.n_cp;
    let l = nfft + cp;
    if nfft > ORACLE_MAX_NFFT {
        return Err(SimError::Domain(format!(
            "oracle capped at eta*N <= {ORACLE_MAX_NFFT}, got {nfft}"
        )));
    }
    if x_cp.len() != l {
        return Err(SimError::Framing(format!(
            "x_cp length {} != eta*(N+N_CP) = {l}",
            x_cp.len()
        )));
    }
    if dac.len() != l || adc.len() != l {
        return Err(SimError::Framing(
            "jitter traces must align with x_cp (one entry per CP-included sample)".into(),
        ));
    }
    Ok((nfft, cp))
}

/// Exact jittered receive symbol: the full nonuniform sinc double sum over
/// all CP-included transmit samples, then the receiver DFT. Returns the ηN
/// bins in FFT order.
///
/// Trace entries are aligned positionally with `x_cp`; the ADC trace is read
/// at the post-CP positions, mirroring a chain that samples the whole stream
/// and discards the CP afterwards.
pub fn exact_yl(
    x_cp: &[Complex64],
    dac: &[f64],
    adc: &[f64],
    cfg: &OfdmConfig,
) -> Result<Vec<Complex64>> {
    let (nfft, cp) = check_inputs(x_cp, dac, adc, cfg)?;
    let t = 1.0 / cfg.fs_hz();
    let mut y = vec![Complex64::new(0.0, 0.0); nfft];
    for (i, yv) in y.iter_mut().enumerate() {
        let pos = cp + i;
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, &x) in x_cp.iter().enumerate() {
            let arg = (pos as f64 - p as f64) + (adc[pos] - dac[p]) / t;
            acc += x * sinc(arg);
        }
        *yv = acc;
    }
    fft::fft_in_place(&mut y);
    let scale = 1.0 / (nfft as f64).sqrt();
    Ok(y.into_iter().map(|v| v * scale).collect())
}

/// First-order Taylor model of [`exact_yl`]: `Y = X + ICI` where the ICI
/// term is linear in both the transmit samples and the DAC/ADC jitter
/// difference.
pub fn first_order_yl(
    x_cp: &[Complex64],
    dac: &[f64],
    adc: &[f64],
    cfg: &OfdmConfig,
) -> Result<Vec<Complex64>> {
    let (nfft, cp) = check_inputs(x_cp, dac, adc, cfg)?;
    let omega = FirstOrderModel::new(cfg).omega;
    let mut body = vec![Complex64::new(0.0, 0.0); nfft];
    for (i, b) in body.iter_mut().enumerate() {
        let pos = cp + i;
        let mut acc = x_cp[pos];
        for (p, &x) in x_cp.iter().enumerate() {
            if p == pos {
                continue;
            }
            let dm = pos as i64 - p as i64;
            let sign = if dm.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let w = sign / (PI * dm as f64) * omega * (adc[pos] - dac[p]);
            acc += x * w;
        }
        *b = acc;
    }
    fft::fft_in_place(&mut body);
    let scale = 1.0 / (nfft as f64).sqrt();
    Ok(body.into_iter().map(|v| v * scale).collect())
}
