//! Band-limited signal evaluation at perturbed instants.
//!
//! Two engines: an exact sinc-interpolation oracle (full O(L·Q) sum) and a
//! fast 4-tap cubic Lagrange interpolator in Farrow form driven by a
//! per-sample fractional delay.

use crate::error::{Result, SimError};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Sample domain of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Complex baseband samples.
    BbComplex,
    /// Real samples on a digital IF (imaginary parts are zero).
    IfReal,
}

/// OFDM framing of a stream: `m` symbols of `eta*(n + n_cp)` samples each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub eta: usize,
    pub n: usize,
    pub n_cp: usize,
    pub m: usize,
}

impl FrameLayout {
    pub fn symbol_len(&self) -> usize {
        self.eta * (self.n + self.n_cp)
    }

    pub fn frame_len(&self) -> usize {
        self.symbol_len() * self.m
    }
}

/// Contiguous time samples at `rate_hz`, optionally framed.
#[derive(Debug, Clone)]
pub struct SampleStream {
    pub data: Vec<Complex64>,
    pub rate_hz: f64,
    pub domain: Domain,
    pub layout: Option<FrameLayout>,
}

impl SampleStream {
    pub fn new(
        data: Vec<Complex64>,
        rate_hz: f64,
        domain: Domain,
        layout: Option<FrameLayout>,
    ) -> Result<Self> {
        if !(rate_hz > 0.0) {
            return Err(SimError::Config("stream rate must be > 0".into()));
        }
        if let Some(l) = layout {
            if data.len() != l.frame_len() {
                return Err(SimError::Framing(format!(
                    "stream length {} does not match layout {}x{} = {}",
                    data.len(),
                    l.m,
                    l.symbol_len(),
                    l.frame_len()
                )));
            }
        }
        Ok(SampleStream {
            data,
            rate_hz,
            domain,
            layout,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Sample period in seconds.
    pub fn period_s(&self) -> f64 {
        1.0 / self.rate_hz
    }
}

/// Normalized sinc with the exact unity value at zero argument.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Evaluate the band-limited interpolant of `s` at arbitrary instants
/// (seconds). Full sum over every stream sample per query; the exactness
/// reference for the Farrow engine, O(L·Q).
pub fn sinc_eval(s: &SampleStream, t_query: &[f64]) -> Vec<Complex64> {
    let t_s = s.period_s();
    let mut out = Vec::with_capacity(t_query.len());
    for &t in t_query {
        let tau = t / t_s;
        let mut acc = Complex64::new(0.0, 0.0);
        for (nu, &x) in s.data.iter().enumerate() {
            acc += x * sinc(tau - nu as f64);
        }
        out.push(acc);
    }
    out
}

/// Cubic Lagrange interpolation of `s` at `ν·T + delay[ν]`, evaluated in
/// Farrow form. The first/last taps clamp to the stream ends.
///
/// `per_sample_delay` is in seconds and must satisfy `|delay| < T`; larger
/// values indicate jitter beyond what this 4-tap design is meant to model.
pub fn farrow_eval(s: &SampleStream, per_sample_delay: &[f64]) -> Result<SampleStream> {
    if per_sample_delay.len() != s.len() {
        return Err(SimError::Framing(format!(
            "delay array length {} != stream length {}",
            per_sample_delay.len(),
            s.len()
        )));
    }
    let t_s = s.period_s();
    if let Some(bad) = per_sample_delay.iter().find(|d| d.abs() >= t_s) {
        return Err(SimError::Domain(format!(
            "per-sample delay {bad:e} s exceeds one sample period {t_s:e} s"
        )));
    }
    let n = s.len() as i64;
    let data = &s.data;
    let tap = |i: i64| data[i.clamp(0, n - 1) as usize];
    let mut out = Vec::with_capacity(s.len());
    for (nu, &d) in per_sample_delay.iter().enumerate() {
        let t = nu as f64 + d / t_s;
        let base = t.floor();
        let mu = t - base;
        let b = base as i64;
        let xm1 = tap(b - 1);
        let x0 = tap(b);
        let x1 = tap(b + 1);
        let x2 = tap(b + 2);
        // cubic Lagrange in Farrow (power-of-mu) form
        let c0 = x0;
        let c1 = -xm1 / 3.0 - x0 / 2.0 + x1 - x2 / 6.0;
        let c2 = (xm1 + x1) / 2.0 - x0;
        let c3 = (x2 - xm1) / 6.0 + (x0 - x1) / 2.0;
        out.push(((c3 * mu + c2) * mu + c1) * mu + c0);
    }
    SampleStream::new(out, s.rate_hz, s.domain, s.layout)
}
