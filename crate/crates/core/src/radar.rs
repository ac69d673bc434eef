//! Target scenario synthesis, range-Doppler processing and radar image
//! quality metrics.
//!
//! Processing follows the classical quotient method: divide the received
//! grid by the known transmit grid, window, inverse-transform over
//! subcarriers (range), forward-transform over symbols (Doppler), square.
//! Both image axes are circular DFT axes.

use crate::error::{Result, SimError};
use crate::fft;
use crate::ofdm::{GridRole, OfdmConfig, SymbolGrid};
use crate::window::WindowKind;
use crate::SPEED_OF_LIGHT_M_S;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Point scatterer described by bistatic range and normalized Doppler.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Target {
    pub bistatic_range_m: f64,
    /// Doppler shift in units of the subcarrier spacing, `f_D/Δf`.
    pub doppler_norm: f64,
    #[serde(default = "Target::unit_amplitude")]
    pub amplitude_re: f64,
    #[serde(default)]
    pub amplitude_im: f64,
}

impl Target {
    fn unit_amplitude() -> f64 {
        1.0
    }

    pub fn new(bistatic_range_m: f64, doppler_norm: f64) -> Self {
        Target {
            bistatic_range_m,
            doppler_norm,
            amplitude_re: 1.0,
            amplitude_im: 0.0,
        }
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.amplitude_re, self.amplitude_im)
    }

    pub fn delay_s(&self) -> f64 {
        self.bistatic_range_m / SPEED_OF_LIGHT_M_S
    }
}

/// Power grid over bistatic range × normalized Doppler, with the axis
/// metadata needed to map targets to bins.
#[derive(Debug, Clone)]
pub struct RadarImage {
    /// Row-major power, `power[p * doppler_bins + q]`.
    pub power: Vec<f64>,
    /// Range rows, `zp·N`.
    pub range_bins: usize,
    /// Doppler columns (fftshifted), `zp·M`.
    pub doppler_bins: usize,
    pub zp: usize,
    /// Bistatic range per row, `c·T_s/zp`.
    pub range_step_m: f64,
    /// Normalized Doppler per column, `N / (zp·M·(N+N_CP))`.
    pub doppler_step_norm: f64,
    pub window_range: WindowKind,
    pub window_doppler: WindowKind,
}

impl RadarImage {
    #[inline]
    pub fn at(&self, p: usize, q: usize) -> f64 {
        self.power[p * self.doppler_bins + q]
    }

    /// Location of the global power maximum as (range row, Doppler column).
    pub fn peak(&self) -> (usize, usize) {
        let mut best = (0usize, 0usize);
        let mut bp = f64::MIN;
        for p in 0..self.range_bins {
            for q in 0..self.doppler_bins {
                let v = self.at(p, q);
                if v > bp {
                    bp = v;
                    best = (p, q);
                }
            }
        }
        best
    }

    /// Fractional row where a given bistatic range lands.
    pub fn range_row_of(&self, range_m: f64) -> f64 {
        (range_m / self.range_step_m).rem_euclid(self.range_bins as f64)
    }

    /// Fractional column where a normalized Doppler lands (center = zero).
    pub fn doppler_col_of(&self, doppler_norm: f64) -> f64 {
        (self.doppler_bins as f64 / 2.0 + doppler_norm / self.doppler_step_norm)
            .rem_euclid(self.doppler_bins as f64)
    }

    pub fn range_axis_m(&self, p: usize) -> f64 {
        p as f64 * self.range_step_m
    }

    pub fn doppler_axis_norm(&self, q: usize) -> f64 {
        (q as f64 - self.doppler_bins as f64 / 2.0) * self.doppler_step_norm
    }
}

/// Apply point targets to a TX grid in the frequency domain:
/// `R_{k,m} = Σ_t a_t · X_{k,m} · e^{-j2πkΔfτ_t} · e^{+j2πf_D m T_sym}`.
pub fn apply_targets(
    tx: &SymbolGrid,
    targets: &[Target],
    cfg: &OfdmConfig,
) -> Result<SymbolGrid> {
    if tx.n != cfg.n || tx.m != cfg.m {
        return Err(SimError::Framing("grid does not match config".into()));
    }
    let cp_duration = cfg.n_cp as f64 * cfg.ts_s();
    for t in targets {
        if t.delay_s() > cp_duration {
            return Err(SimError::Config(format!(
                "target delay {:.3e} s exceeds CP duration {:.3e} s; model invalid",
                t.delay_s(),
                cp_duration
            )));
        }
        if t.doppler_norm.abs() >= 0.5 {
            return Err(SimError::Config(format!(
                "normalized Doppler {} outside (-0.5, 0.5)",
                t.doppler_norm
            )));
        }
    }
    let df = cfg.delta_f_hz();
    let t_sym = cfg.symbol_duration_s();
    let mut data = vec![Complex64::new(0.0, 0.0); tx.data.len()];
    for t in targets {
        let tau = t.delay_s();
        let f_d = t.doppler_norm * df;
        for m in 0..cfg.m {
            let dop = Complex64::from_polar(1.0, 2.0 * PI * f_d * m as f64 * t_sym);
            for k in 0..cfg.n {
                let kc = k as i64 - (cfg.n / 2) as i64;
                let rng = Complex64::from_polar(1.0, -2.0 * PI * kc as f64 * df * tau);
                data[m * cfg.n + k] += t.amplitude() * tx.at(k, m) * rng * dop;
            }
        }
    }
    SymbolGrid::new(data, tx.n, tx.m, GridRole::Rx)
}

/// Range-Doppler processing of a received grid against the known TX grid.
///
/// Quotient, window along both axes, zero-padded inverse transform over
/// subcarriers and forward transform over symbols, power detection.
pub fn range_doppler(
    rx: &SymbolGrid,
    tx: &SymbolGrid,
    window_range: WindowKind,
    window_doppler: WindowKind,
    zp: usize,
    cfg: &OfdmConfig,
) -> Result<RadarImage> {
    if rx.n != tx.n || rx.m != tx.m {
        return Err(SimError::Framing("grid shapes differ".into()));
    }
    if rx.n != cfg.n || rx.m != cfg.m {
        return Err(SimError::Framing("grids do not match config".into()));
    }
    if zp == 0 {
        return Err(SimError::Config("zero-pad factor must be >= 1".into()));
    }
    let n = cfg.n;
    let m = cfg.m;
    let wr = window_range.build(n);
    let wd = window_doppler.build(m);

    // quotient + windows; range transform per symbol (columns of length zp*N)
    let p_bins = zp * n;
    let q_bins = zp * m;
    let range_plan = fft::inverse_plan(p_bins);
    let mut range_profiles = vec![Complex64::new(0.0, 0.0); p_bins * m];
    let mut col = vec![Complex64::new(0.0, 0.0); p_bins];
    for sym in 0..m {
        col.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for k in 0..n {
            let kc = k as i64 - (n / 2) as i64;
            let bin = (kc.rem_euclid(p_bins as i64)) as usize;
            let d = rx.at(k, sym) / tx.at(k, sym);
            col[bin] = d * wr[k] * wd[sym];
        }
        range_plan.process(&mut col);
        for p in 0..p_bins {
            range_profiles[p * m + sym] = col[p];
        }
    }

    // Doppler transform per range row, zero-padded to zp*M, fftshifted
    let dop_plan = fft::forward_plan(q_bins);
    let mut power = vec![0.0f64; p_bins * q_bins];
    let mut row = vec![Complex64::new(0.0, 0.0); q_bins];
    for p in 0..p_bins {
        row.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        row[..m].copy_from_slice(&range_profiles[p * m..(p + 1) * m]);
        dop_plan.process(&mut row);
        let out = &mut power[p * q_bins..(p + 1) * q_bins];
        for q in 0..q_bins {
            // fftshift along the Doppler axis
            let src = (q + q_bins / 2) % q_bins;
            out[q] = row[src].norm_sqr();
        }
    }

    Ok(RadarImage {
        power,
        range_bins: p_bins,
        doppler_bins: q_bins,
        zp,
        range_step_m: SPEED_OF_LIGHT_M_S * cfg.ts_s() / zp as f64,
        doppler_step_norm: cfg.n as f64 / (zp as f64 * m as f64 * (cfg.n + cfg.n_cp) as f64),
        window_range,
        window_doppler,
    })
}

/// Peak power loss ratio of an impaired image against its jitter-free
/// reference (same scenario and processing), in dB.
pub fn pplr(image: &RadarImage, reference: &RadarImage) -> Result<f64> {
    if image.range_bins != reference.range_bins
        || image.doppler_bins != reference.doppler_bins
    {
        return Err(SimError::Framing("images have different processing".into()));
    }
    let (pi, qi) = image.peak();
    let (pr, qr) = reference.peak();
    let a = image.at(pi, qi);
    let b = reference.at(pr, qr);
    if a <= 0.0 || b <= 0.0 {
        return Err(SimError::Detection("missing peak".into()));
    }
    Ok(10.0 * (a / b).log10())
}

/// Axis of a 1-D cut through an image peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutAxis {
    Range,
    Doppler,
}

fn cut_through(image: &RadarImage, peak: (usize, usize), axis: CutAxis) -> (Vec<f64>, usize) {
    match axis {
        CutAxis::Range => (
            (0..image.range_bins).map(|p| image.at(p, peak.1)).collect(),
            peak.0,
        ),
        CutAxis::Doppler => (
            (0..image.doppler_bins).map(|q| image.at(peak.0, q)).collect(),
            peak.1,
        ),
    }
}

/// Mainlobe bounds on a circular cut: expand from the peak until the first
/// local minimum on each side.
fn mainlobe_bounds(cut: &[f64], peak: usize) -> (usize, usize) {
    let n = cut.len();
    let prev = |i: usize| (i + n - 1) % n;
    let next = |i: usize| (i + 1) % n;
    let mut lo = peak;
    while prev(lo) != peak && cut[prev(lo)] < cut[lo] {
        lo = prev(lo);
    }
    let mut hi = peak;
    while next(hi) != peak && cut[next(hi)] < cut[hi] {
        hi = next(hi);
    }
    (lo, hi)
}

fn split_cut(cut: &[f64], peak: usize) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = mainlobe_bounds(cut, peak);
    let in_main = |i: usize| {
        if lo <= hi {
            i >= lo && i <= hi
        } else {
            i >= lo || i <= hi
        }
    };
    let mut main = Vec::new();
    let mut side = Vec::new();
    for (i, &v) in cut.iter().enumerate() {
        if in_main(i) {
            main.push(v);
        } else {
            side.push(v);
        }
    }
    (main, side)
}

/// Peak sidelobe level relative to the mainlobe peak along one cut, in dB.
/// Reports `-inf` when the cut has no sidelobes.
pub fn pslr_cut(image: &RadarImage, peak: (usize, usize), axis: CutAxis) -> Result<f64> {
    let (cut, pk) = cut_through(image, peak, axis);
    let peak_pow = cut[pk];
    if peak_pow <= 0.0 {
        return Err(SimError::Detection("cut has no peak power".into()));
    }
    let (_, side) = split_cut(&cut, pk);
    let worst = side.iter().cloned().fold(f64::MIN, f64::max);
    if side.is_empty() || worst <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (worst / peak_pow).log10())
}

/// Integrated sidelobe-to-mainlobe power ratio along one cut, in dB.
pub fn islr_cut(image: &RadarImage, peak: (usize, usize), axis: CutAxis) -> Result<f64> {
    let (cut, pk) = cut_through(image, peak, axis);
    if cut[pk] <= 0.0 {
        return Err(SimError::Detection("cut has no peak power".into()));
    }
    let (main, side) = split_cut(&cut, pk);
    let sp: f64 = side.iter().sum();
    let mp: f64 = main.iter().sum();
    if sp <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (sp / mp).log10())
}

/// Exclusion half-width for [`image_sir`], in resolution cells, derived
/// from the window's mainlobe extent.
pub fn default_exclusion_cells(window: &WindowKind, n: usize) -> usize {
    (window.mainlobe_halfwidth_cells(n).ceil() as usize).max(2)
}

/// Mean and minimum image SIR: ratio of the strongest target peak to the
/// mean/maximum power outside rectangular exclusion zones of
/// `±exclusion_cells` resolution cells around every target.
///
/// Each target must produce a local peak within half a resolution cell of
/// its expected coordinates.
pub fn image_sir(
    image: &RadarImage,
    targets: &[Target],
    exclusion_cells: usize,
) -> Result<(f64, f64)> {
    if targets.is_empty() {
        return Err(SimError::Config("image SIR needs at least one target".into()));
    }
    let p_bins = image.range_bins;
    let q_bins = image.doppler_bins;
    let half_p = exclusion_cells * image.zp;
    let half_q = exclusion_cells * image.zp;
    let mut excluded = vec![false; p_bins * q_bins];
    let mut peak_pow = 0.0f64;
    for t in targets {
        let pc = image.range_row_of(t.bistatic_range_m);
        let qc = image.doppler_col_of(t.doppler_norm);
        // peak search within half a cell of the expected position
        let sp = image.zp.div_ceil(2);
        let mut local = 0.0f64;
        let mut local_at = (0usize, 0usize);
        for dp in -(sp as i64)..=sp as i64 {
            for dq in -(sp as i64)..=sp as i64 {
                let p = ((pc.round() as i64 + dp).rem_euclid(p_bins as i64)) as usize;
                let q = ((qc.round() as i64 + dq).rem_euclid(q_bins as i64)) as usize;
                if image.at(p, q) > local {
                    local = image.at(p, q);
                    local_at = (p, q);
                }
            }
        }
        // the located peak must dominate its immediate surroundings
        let (lp, lq) = local_at;
        if local <= 0.0 {
            return Err(SimError::Detection(format!(
                "no target peak near range {} m, Doppler {}Δf",
                t.bistatic_range_m, t.doppler_norm
            )));
        }
        peak_pow = peak_pow.max(local);
        let pc_i = pc.round() as i64;
        let qc_i = qc.round() as i64;
        let _ = (lp, lq);
        for dp in -(half_p as i64)..=half_p as i64 {
            for dq in -(half_q as i64)..=half_q as i64 {
                let p = ((pc_i + dp).rem_euclid(p_bins as i64)) as usize;
                let q = ((qc_i + dq).rem_euclid(q_bins as i64)) as usize;
                excluded[p * q_bins + q] = true;
            }
        }
    }
    let mut sum = 0.0f64;
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for (i, &v) in image.power.iter().enumerate() {
        if !excluded[i] {
            sum += v;
            worst = worst.max(v);
            count += 1;
        }
    }
    if count == 0 {
        return Err(SimError::Config(
            "exclusion zones cover the whole image".into(),
        ));
    }
    let mean_out = sum / count as f64;
    Ok((
        10.0 * (peak_pow / mean_out).log10(),
        10.0 * (peak_pow / worst).log10(),
    ))
}
