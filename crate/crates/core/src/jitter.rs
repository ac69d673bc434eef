//! Colored sampling-jitter synthesis from an oscillator phase-noise PSD mask.
//!
//! The mask is a piecewise description of a double-sided PN PSD, linear in
//! dB over log10(frequency) between breakpoints and held constant beyond
//! them. A Gaussian phase-noise series is synthesized by shaping a
//! Hermitian-symmetric complex Gaussian spectrum with the mask and inverse
//! transforming; timing jitter follows as `δ(t) = θ(t) / (2π F_s)`.

use crate::error::{Result, SimError};
use crate::fft::ifft_in_place;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Piecewise log-log phase-noise PSD mask (double-sided, dBc/Hz over Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMask {
    points: Vec<(f64, f64)>,
}

/// Breakpoints modeling the PN PSD of an integer-N RF synthesizer PLL
/// driving converter sampling clocks near 500 MHz. Also shipped as
/// `configs/lmx2594_psd.txt`.
pub const LMX2594_MASK_POINTS: [(f64, f64); 8] = [
    (1e2, -112.0),
    (1e3, -140.0),
    (1e4, -143.0),
    (1e5, -142.0),
    (1e6, -149.0),
    (1e7, -157.0),
    (1e8, -169.0),
    (5e8, -177.0),
];

impl PsdMask {
    /// Validated constructor: at least two points, strictly increasing
    /// positive offsets.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(SimError::Config(
                "PSD mask needs at least 2 breakpoints".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(SimError::Config(format!(
                    "PSD mask offsets must be strictly increasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if points[0].0 <= 0.0 {
            return Err(SimError::Config("PSD mask offsets must be > 0".into()));
        }
        Ok(PsdMask { points })
    }

    /// The shipped default mask.
    pub fn lmx2594() -> Self {
        PsdMask::new(LMX2594_MASK_POINTS.to_vec()).expect("default mask is valid")
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn first_offset_hz(&self) -> f64 {
        self.points[0].0
    }

    /// Mask level in dBc/Hz at offset `f`, with constant extrapolation
    /// outside the breakpoint span.
    pub fn level_db(&self, f: f64) -> f64 {
        let pts = &self.points;
        if f <= pts[0].0 {
            return pts[0].1;
        }
        if f >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let lf = f.log10();
        let i = pts.partition_point(|p| p.0.log10() <= lf).min(pts.len() - 1);
        let (f1, l1) = pts[i - 1];
        let (f2, l2) = pts[i];
        if l1 == l2 {
            return l1;
        }
        let t = (lf - f1.log10()) / (f2.log10() - f1.log10());
        l1 + t * (l2 - l1)
    }

    /// Mask level as a linear double-sided PSD value (rad²/Hz).
    pub fn level_linear(&self, f: f64) -> f64 {
        let db = self.level_db(f);
        if db == f64::NEG_INFINITY {
            0.0
        } else {
            10f64.powf(db / 10.0)
        }
    }
}

/// Phase-noise time series at rate `fs_hz` (rad).
#[derive(Debug, Clone)]
pub struct PnTrace {
    pub samples: Vec<f64>,
    pub fs_hz: f64,
    pub seed: u64,
}

/// Per-sample timing deviations aligned to the nominal instants `ν/fs_hz`.
#[derive(Debug, Clone)]
pub struct JitterTrace {
    pub samples: Vec<f64>,
    pub fs_hz: f64,
    /// Realized RMS of `samples` in seconds.
    pub rms_s: f64,
    pub seed: u64,
}

impl JitterTrace {
    /// Build a trace from raw samples, computing the realized RMS.
    pub fn from_samples(samples: Vec<f64>, fs_hz: f64, seed: u64) -> Self {
        let rms = rms_of(&samples);
        JitterTrace {
            samples,
            fs_hz,
            rms_s: rms,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn rms_of(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

/// Deterministic standard-normal pair (Box-Muller) from a seeded RNG.
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

/// Synthesize a real Gaussian phase-noise series whose PSD follows `mask`.
///
/// Frequency-domain shaping: each positive-frequency bin gets an independent
/// complex Gaussian weight with `E|X_k|² = S(f_k)·fs·L`, mirrored for
/// Hermitian symmetry; the DC bin is zeroed so the series is zero-mean. The
/// sample variance then equals the integral of the double-sided PSD over the
/// synthesis band.
pub fn synth_pn(mask: &PsdMask, fs_hz: f64, length: usize, seed: u64) -> Result<PnTrace> {
    if length < 2 {
        return Err(SimError::Config("PN synthesis needs length >= 2".into()));
    }
    if !(fs_hz > 0.0) {
        return Err(SimError::Config("PN synthesis needs fs_hz > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = length;
    let df = fs_hz / l as f64;
    let mut spec = vec![Complex64::new(0.0, 0.0); l];
    let half = l / 2;
    for k in 1..half {
        let s = mask.level_linear(k as f64 * df);
        // split E|X|^2 across re/im
        let sigma = (s * fs_hz * l as f64 / 2.0).sqrt();
        let (a, b) = normal_pair(&mut rng);
        spec[k] = Complex64::new(a * sigma, b * sigma);
        spec[l - k] = spec[k].conj();
    }
    if l % 2 == 0 && half >= 1 {
        let s = mask.level_linear(half as f64 * df);
        let (a, _) = normal_pair(&mut rng);
        spec[half] = Complex64::new(a * (s * fs_hz * l as f64).sqrt(), 0.0);
    }
    ifft_in_place(&mut spec);
    let scale = 1.0 / l as f64;
    let samples: Vec<f64> = spec.iter().map(|c| c.re * scale).collect();
    Ok(PnTrace {
        samples,
        fs_hz,
        seed,
    })
}

/// Convert phase noise to sampling jitter: `δ_ν = θ_ν / (2π·fs_eta_hz)`.
pub fn pn_to_jitter(pn: &PnTrace, fs_eta_hz: f64) -> Result<JitterTrace> {
    if !(fs_eta_hz > 0.0) {
        return Err(SimError::Config("fs_eta_hz must be > 0".into()));
    }
    let k = 1.0 / (2.0 * std::f64::consts::PI * fs_eta_hz);
    let samples: Vec<f64> = pn.samples.iter().map(|p| p * k).collect();
    Ok(JitterTrace::from_samples(samples, pn.fs_hz, pn.seed))
}

/// Rescale a trace to an exact target RMS, preserving its spectral shape.
pub fn scale_to_rms(j: &JitterTrace, target_rms_s: f64) -> Result<JitterTrace> {
    if target_rms_s == 0.0 {
        return Ok(JitterTrace {
            samples: vec![0.0; j.samples.len()],
            fs_hz: j.fs_hz,
            rms_s: 0.0,
            seed: j.seed,
        });
    }
    if j.rms_s <= 0.0 {
        return Err(SimError::Domain(
            "cannot rescale a zero-RMS trace to a nonzero target".into(),
        ));
    }
    let g = target_rms_s / j.rms_s;
    let samples: Vec<f64> = j.samples.iter().map(|s| s * g).collect();
    Ok(JitterTrace {
        samples,
        fs_hz: j.fs_hz,
        rms_s: target_rms_s,
        seed: j.seed,
    })
}

/// Integrated double-sided PN level over ±[f_lo, f_hi], in dBc.
///
/// Trapezoidal integration in linear frequency over a log-spaced grid of at
/// least 1024 nodes; offsets outside the mask span use the held end levels.
/// A zero-width (or inverted) interval reports `-inf`.
pub fn integrated_pn_level(mask: &PsdMask, f_lo: f64, f_hi: f64) -> Result<f64> {
    if !(f_lo > 0.0 && f_hi > 0.0) {
        return Err(SimError::Config(
            "integration limits must be positive".into(),
        ));
    }
    if f_lo >= f_hi {
        return Ok(f64::NEG_INFINITY);
    }
    let nodes = 4096usize;
    let la = f_lo.log10();
    let lb = f_hi.log10();
    let mut acc = 0.0;
    let mut prev_f = f_lo;
    let mut prev_s = mask.level_linear(f_lo);
    for i in 1..nodes {
        let f = 10f64.powf(la + (lb - la) * i as f64 / (nodes - 1) as f64);
        let s = mask.level_linear(f);
        acc += 0.5 * (s + prev_s) * (f - prev_f);
        prev_f = f;
        prev_s = s;
    }
    let two_sided = 2.0 * acc;
    if two_sided <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * two_sided.log10())
}
