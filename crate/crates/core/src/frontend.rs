//! Jittered DAC/ADC conversion chains for baseband and digital-IF sampling.
//!
//! The DAC places sample ν at the perturbed instant `νT + δ_DAC(νT)`; the
//! uniform-grid sequence the receiver side sees is therefore the band-limited
//! interpolant of the transmit stream evaluated at `νT - δ_DAC(νT)` (first
//! order). The ADC then reads the reconstructed signal at `ν'T + δ_ADC(ν'T)`.
//! The default engine realizes both steps as cascaded Farrow resampling
//! passes; the oracle engine evaluates the combined nonuniform sinc kernel
//! directly and is restricted to small frames.

use crate::error::{Result, SimError};
use crate::jitter::JitterTrace;
use crate::resample::{farrow_eval, sinc, Domain, SampleStream};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Sampling strategy of the converter pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// Complex baseband conversion.
    Bb,
    /// Real conversion on a digital IF with DUC before the DAC and DDC
    /// after the ADC.
    Bp,
}

impl SamplingMode {
    pub fn label(&self) -> &'static str {
        match self {
            SamplingMode::Bb => "bb",
            SamplingMode::Bp => "bp",
        }
    }
}

/// Resampling engine used to apply the timing perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    /// Cascaded cubic Farrow passes (fast, default).
    Farrow,
    /// Direct evaluation of the combined nonuniform sinc double sum;
    /// O(L²), capped to small frames.
    SincOracle,
}

impl Engine {
    pub fn label(&self) -> &'static str {
        match self {
            Engine::Farrow => "farrow",
            Engine::SincOracle => "sinc-oracle",
        }
    }
}

/// Frame-length cap for the O(L²) sinc oracle.
pub const SINC_ORACLE_MAX_LEN: usize = 8192;

/// Converter-pair configuration: mode, digital IF, engine and the two
/// jitter traces (always from distinct seeds).
#[derive(Debug, Clone)]
pub struct FrontendConfig {
    pub mode: SamplingMode,
    /// Digital IF in Hz; 0 for baseband.
    pub f_if_hz: f64,
    pub engine: Engine,
    pub dac_jitter: JitterTrace,
    pub adc_jitter: JitterTrace,
}

impl FrontendConfig {
    fn validate_traces(&self, stream: &SampleStream) -> Result<()> {
        let t = stream.period_s();
        for (name, tr) in [("DAC", &self.dac_jitter), ("ADC", &self.adc_jitter)] {
            if tr.len() < stream.len() {
                return Err(SimError::Framing(format!(
                    "{name} jitter trace length {} < stream length {}",
                    tr.len(),
                    stream.len()
                )));
            }
            if let Some(bad) = tr.samples[..stream.len()].iter().find(|d| d.abs() >= t) {
                return Err(SimError::Domain(format!(
                    "{name} jitter {bad:e} s reaches one sample period {t:e} s; \
                     clip or lower the RMS"
                )));
            }
        }
        Ok(())
    }
}

/// Direct Eq-style double sum: `y[ν'] = Σ_ν x[ν]·sinc((ν'-ν) + (δ_A[ν'] - δ_D[ν])/T)`.
fn sinc_chain(stream: &SampleStream, dac: &[f64], adc: &[f64]) -> Result<Vec<Complex64>> {
    let l = stream.len();
    if l > SINC_ORACLE_MAX_LEN {
        return Err(SimError::Domain(format!(
            "sinc oracle limited to {SINC_ORACLE_MAX_LEN} samples, frame has {l}"
        )));
    }
    let t = stream.period_s();
    let mut out = Vec::with_capacity(l);
    for i in 0..l {
        let mut acc = Complex64::new(0.0, 0.0);
        for (nu, &x) in stream.data.iter().enumerate() {
            let arg = (i as f64 - nu as f64) + (adc[i] - dac[nu]) / t;
            acc += x * sinc(arg);
        }
        out.push(acc);
    }
    Ok(out)
}

fn jitter_engine(stream: &SampleStream, cfg: &FrontendConfig) -> Result<SampleStream> {
    cfg.validate_traces(stream)?;
    let l = stream.len();
    let dac = &cfg.dac_jitter.samples[..l];
    let adc = &cfg.adc_jitter.samples[..l];
    match cfg.engine {
        Engine::Farrow => {
            let neg_dac: Vec<f64> = dac.iter().map(|d| -d).collect();
            let after_dac = farrow_eval(stream, &neg_dac)?;
            farrow_eval(&after_dac, adc)
        }
        Engine::SincOracle => {
            let data = sinc_chain(stream, dac, adc)?;
            SampleStream::new(data, stream.rate_hz, stream.domain, stream.layout)
        }
    }
}

/// Baseband chain: the complex stream passes through the jittered
/// DAC-channel-ADC cascade unchanged otherwise (noiseless single path).
pub fn bb_chain(tx: &SampleStream, cfg: &FrontendConfig) -> Result<SampleStream> {
    if cfg.mode != SamplingMode::Bb {
        return Err(SimError::Config("bb_chain called with BP config".into()));
    }
    jitter_engine(tx, cfg)
}

/// Phase of the IF rotator at sample ν, computed from the fractional cycle
/// count so long streams do not lose precision.
#[inline]
fn if_phase(cycles_per_sample: f64, nu: usize) -> f64 {
    let cycles = cycles_per_sample * nu as f64;
    2.0 * std::f64::consts::PI * cycles.fract()
}

/// Bandpass chain: DUC to the digital IF, jittered real-signal conversion,
/// DDC back to complex baseband.
///
/// The DDC output is returned at the full rate `η·B` without an explicit
/// low-pass: the conversion image sits at `-2·f_IF` (mod fs) and the
/// configuration check below guarantees it falls entirely outside the ±B/2
/// band that [`crate::ofdm::demodulate`] selects, so the subcarrier
/// selection rejects it exactly. A time-domain filter here would instead
/// truncate the spectral splatter of the symbol transitions and floor the
/// achievable accuracy.
pub fn bp_chain(tx: &SampleStream, cfg: &FrontendConfig) -> Result<SampleStream> {
    if cfg.mode != SamplingMode::Bp {
        return Err(SimError::Config("bp_chain called with BB config".into()));
    }
    if tx.domain != Domain::BbComplex {
        return Err(SimError::Config("bp_chain expects a complex BB input".into()));
    }
    let fs = tx.rate_hz;
    let b_hz = tx
        .layout
        .map(|l| fs / l.eta as f64)
        .ok_or_else(|| SimError::Framing("bp_chain needs a framed stream".into()))?;
    let f_if = cfg.f_if_hz;
    if !(f_if > 0.0) {
        return Err(SimError::Config("BP mode needs f_if_hz > 0".into()));
    }
    if f_if + b_hz / 2.0 >= fs / 2.0 {
        return Err(SimError::Config(format!(
            "IF band edge {} Hz does not fit below Nyquist {} Hz",
            f_if + b_hz / 2.0,
            fs / 2.0
        )));
    }
    // image band check: after DDC the conjugate image is centered at
    // -2 f_IF (mod fs); it must stay clear of the +-B/2 selection band
    let img_center = (-2.0 * f_if).rem_euclid(fs);
    let img_center = if img_center > fs / 2.0 {
        img_center - fs
    } else {
        img_center
    };
    if img_center.abs() - b_hz / 2.0 <= b_hz / 2.0 {
        return Err(SimError::Config(format!(
            "conversion image at {img_center} Hz overlaps the ±{} Hz data band",
            b_hz / 2.0
        )));
    }

    let cps = f_if / fs;
    let root2 = std::f64::consts::SQRT_2;
    let if_data: Vec<Complex64> = tx
        .data
        .iter()
        .enumerate()
        .map(|(nu, x)| {
            let up = x * Complex64::from_polar(1.0, if_phase(cps, nu));
            Complex64::new(root2 * up.re, 0.0)
        })
        .collect();
    let if_stream = SampleStream::new(if_data, fs, Domain::IfReal, tx.layout)?;
    let sampled = jitter_engine(&if_stream, cfg)?;
    let bb: Vec<Complex64> = sampled
        .data
        .iter()
        .enumerate()
        .map(|(nu, y)| root2 * y * Complex64::from_polar(1.0, -if_phase(cps, nu)))
        .collect();
    SampleStream::new(bb, fs, Domain::BbComplex, tx.layout)
}

/// Run the chain matching `cfg.mode`.
pub fn run_chain(tx: &SampleStream, cfg: &FrontendConfig) -> Result<SampleStream> {
    match cfg.mode {
        SamplingMode::Bb => bb_chain(tx, cfg),
        SamplingMode::Bp => bp_chain(tx, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jitter::JitterTrace;
    use crate::ofdm::{demodulate, modulate, random_grid, Modulation, OfdmConfig};

    fn zero_trace(len: usize, fs: f64) -> JitterTrace {
        JitterTrace::from_samples(vec![0.0; len], fs, 0)
    }

    fn colored_trace(len: usize, fs: f64, rms: f64, seed: u64) -> JitterTrace {
        let mask = crate::jitter::PsdMask::lmx2594();
        let pn = crate::jitter::synth_pn(&mask, fs, len.next_power_of_two(), seed).unwrap();
        let j = crate::jitter::pn_to_jitter(&pn, fs).unwrap();
        let mut j = crate::jitter::scale_to_rms(&j, rms).unwrap();
        j.samples.truncate(len);
        JitterTrace::from_samples(j.samples, fs, seed)
    }

    fn toy_cfg(n: usize, eta: usize, m: usize) -> OfdmConfig {
        OfdmConfig::new_unchecked_size(n, eta, n / 4, m, 500e6, Modulation::Qpsk).unwrap()
    }

    fn frame_evm_db(
        cfg: &OfdmConfig,
        fe: &FrontendConfig,
    ) -> (f64, crate::ofdm::SymbolGrid, crate::ofdm::SymbolGrid) {
        let tx = random_grid(cfg, 13).unwrap();
        let s = modulate(&tx, cfg).unwrap();
        let rx = run_chain(&s, fe).unwrap();
        let g = demodulate(&rx, cfg).unwrap();
        let err: f64 = tx
            .data
            .iter()
            .zip(g.data.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let pw: f64 = tx.data.iter().map(|a| a.norm_sqr()).sum();
        (10.0 * (err / pw).log10(), tx, g)
    }

    #[test]
    fn zero_jitter_bb_chain_is_transparent() {
        let cfg = toy_cfg(64, 2, 2);
        let len = cfg.layout().frame_len();
        let fe = FrontendConfig {
            mode: SamplingMode::Bb,
            f_if_hz: 0.0,
            engine: Engine::Farrow,
            dac_jitter: zero_trace(len, cfg.fs_hz()),
            adc_jitter: zero_trace(len, cfg.fs_hz()),
        };
        let (evm, _, _) = frame_evm_db(&cfg, &fe);
        assert!(evm < -120.0, "zero-jitter EVM {evm}");
    }

    #[test]
    fn equal_traces_cancel_the_common_mode_error() {
        // only the DAC/ADC difference matters to leading order: identical
        // traces cancel the dominant (common-mode) error term, leaving a
        // residual far below what independent traces of the same RMS cause,
        // and that residual keeps shrinking as the jitter shrinks
        let cfg = toy_cfg(64, 2, 1);
        let len = cfg.layout().frame_len();
        let fs = cfg.fs_hz();
        let mk = |d: JitterTrace, a: JitterTrace| FrontendConfig {
            mode: SamplingMode::Bb,
            f_if_hz: 0.0,
            // the oracle kernel keeps the cancellation clear of the cubic
            // interpolation floor
            engine: Engine::SincOracle,
            dac_jitter: d,
            adc_jitter: a,
        };
        let rms = 1e-2 / fs;
        // a trace that varies slowly over the frame carries the common-mode
        // case the cancellation applies to
        let slow_sine = |amp: f64, cycles: f64, phase: f64| {
            JitterTrace::from_samples(
                (0..len)
                    .map(|i| {
                        amp * 2f64.sqrt()
                            * (2.0 * std::f64::consts::PI * cycles * i as f64 / len as f64
                                + phase)
                                .sin()
                    })
                    .collect(),
                fs,
                0,
            )
        };
        let equal = slow_sine(rms, 1.0, 0.4);
        let other = slow_sine(rms, 2.0, 1.9);
        let (evm_equal, _, _) = frame_evm_db(&cfg, &mk(equal.clone(), equal.clone()));
        let (evm_indep, _, _) = frame_evm_db(&cfg, &mk(equal.clone(), other));
        assert!(
            evm_indep - evm_equal > 15.0,
            "common-mode cancellation too weak: equal {evm_equal} dB vs independent {evm_indep} dB"
        );
        // residual decreases with the jitter amplitude (first order or better)
        let half = JitterTrace::from_samples(
            equal.samples.iter().map(|d| d * 0.5).collect(),
            fs,
            3,
        );
        let (evm_half, _, _) = frame_evm_db(&cfg, &mk(half.clone(), half));
        let drop = evm_equal - evm_half;
        assert!(
            drop > 5.0,
            "equal-trace residual did not shrink: {evm_equal} -> {evm_half}"
        );
    }

    #[test]
    fn farrow_engine_matches_sinc_oracle_on_toy_frame() {
        let cfg = toy_cfg(64, 2, 1);
        let len = cfg.layout().frame_len();
        let fs = cfg.fs_hz();
        let rms = 1e-3 / fs;
        let dac = colored_trace(len, fs, rms, 31);
        let adc = colored_trace(len, fs, rms, 32);
        let tx = random_grid(&cfg, 13).unwrap();
        let s = modulate(&tx, &cfg).unwrap();
        let mk = |engine| FrontendConfig {
            mode: SamplingMode::Bb,
            f_if_hz: 0.0,
            engine,
            dac_jitter: dac.clone(),
            adc_jitter: adc.clone(),
        };
        let fast = bb_chain(&s, &mk(Engine::Farrow)).unwrap();
        let oracle = bb_chain(&s, &mk(Engine::SincOracle)).unwrap();
        let mut err = 0.0;
        let mut pw = 0.0;
        for i in 4..len - 4 {
            err += (fast.data[i] - oracle.data[i]).norm_sqr();
            pw += oracle.data[i].norm_sqr();
        }
        let db = 10.0 * (err / pw).log10();
        assert!(db < -50.0, "engines differ by {db:.1} dB");
    }

    #[test]
    fn only_the_trace_difference_matters_to_leading_order() {
        // chain(a, b) agrees with chain(0, b - a) far below the impairment
        // level, and DAC-only jitter degrades the frame like ADC-only
        // jitter of the same RMS
        let cfg = toy_cfg(64, 2, 1);
        let len = cfg.layout().frame_len();
        let fs = cfg.fs_hz();
        let mk = |d: JitterTrace, a: JitterTrace| FrontendConfig {
            mode: SamplingMode::Bb,
            f_if_hz: 0.0,
            engine: Engine::Farrow,
            dac_jitter: d,
            adc_jitter: a,
        };
        let rms = 5e-3 / fs;
        let dac = colored_trace(len, fs, rms, 41);
        let adc = colored_trace(len, fs, rms, 42);
        let diff = JitterTrace::from_samples(
            adc.samples
                .iter()
                .zip(dac.samples.iter())
                .map(|(a, d)| a - d)
                .collect(),
            fs,
            0,
        );
        let zero = zero_trace(len, fs);
        let tx = random_grid(&cfg, 13).unwrap();
        let s = modulate(&tx, &cfg).unwrap();
        let full = bb_chain(&s, &mk(dac.clone(), adc.clone())).unwrap();
        let diff_only = bb_chain(&s, &mk(zero.clone(), diff)).unwrap();
        let mut err = 0.0;
        let mut impair = 0.0;
        for i in 4..len - 4 {
            err += (full.data[i] - diff_only.data[i]).norm_sqr();
            impair += (full.data[i] - s.data[i]).norm_sqr();
        }
        let depth_db = 10.0 * (err / impair).log10();
        assert!(
            depth_db < -12.0,
            "difference dominance only {depth_db:.1} dB below the impairment"
        );

        // the same trace injected at either converter degrades the frame
        // almost identically
        let (evm_dac, _, _) = frame_evm_db(&cfg, &mk(dac.clone(), zero.clone()));
        let (evm_adc, _, _) = frame_evm_db(&cfg, &mk(zero, dac));
        assert!(
            (evm_dac - evm_adc).abs() < 1.0,
            "DAC-only {evm_dac:.2} dB vs ADC-only {evm_adc:.2} dB"
        );
    }

    #[test]
    fn jitter_bound_is_enforced() {
        let cfg = toy_cfg(64, 2, 1);
        let len = cfg.layout().frame_len();
        let fs = cfg.fs_hz();
        let mut bad = vec![0.0; len];
        bad[10] = 1.5 / fs;
        let fe = FrontendConfig {
            mode: SamplingMode::Bb,
            f_if_hz: 0.0,
            engine: Engine::Farrow,
            dac_jitter: JitterTrace::from_samples(bad, fs, 0),
            adc_jitter: zero_trace(len, fs),
        };
        let tx = random_grid(&cfg, 13).unwrap();
        let s = modulate(&tx, &cfg).unwrap();
        assert!(matches!(bb_chain(&s, &fe), Err(SimError::Domain(_))));
    }

    #[test]
    fn zero_jitter_bp_chain_is_transparent() {
        let cfg = toy_cfg(64, 8, 2);
        let len = cfg.layout().frame_len();
        let fe = FrontendConfig {
            mode: SamplingMode::Bp,
            f_if_hz: 1e9,
            engine: Engine::Farrow,
            dac_jitter: zero_trace(len, cfg.fs_hz()),
            adc_jitter: zero_trace(len, cfg.fs_hz()),
        };
        let (evm, _, _) = frame_evm_db(&cfg, &fe);
        assert!(evm < -100.0, "zero-jitter BP EVM {evm}");
    }

    #[test]
    fn bp_nyquist_violation_is_a_config_error() {
        let cfg = toy_cfg(64, 2, 1); // fs = 1 GHz, Nyquist 500 MHz < IF band
        let len = cfg.layout().frame_len();
        let fe = FrontendConfig {
            mode: SamplingMode::Bp,
            f_if_hz: 1e9,
            engine: Engine::Farrow,
            dac_jitter: zero_trace(len, cfg.fs_hz()),
            adc_jitter: zero_trace(len, cfg.fs_hz()),
        };
        let tx = random_grid(&cfg, 13).unwrap();
        let s = modulate(&tx, &cfg).unwrap();
        assert!(matches!(bp_chain(&s, &fe), Err(SimError::Config(_))));
    }

    #[test]
    fn constant_adc_jitter_rotates_bp_frame_by_if_phase() {
        // a constant ADC timing offset t0 shows up as a common rotation of
        // magnitude 2*pi*f_IF*t0 on the demodulated grid (PN-like effect)
        let cfg = toy_cfg(64, 8, 1);
        let len = cfg.layout().frame_len();
        let fs = cfg.fs_hz();
        let t0 = 2e-12;
        let fe = FrontendConfig {
            mode: SamplingMode::Bp,
            f_if_hz: 1e9,
            engine: Engine::SincOracle,
            dac_jitter: zero_trace(len, fs),
            adc_jitter: JitterTrace::from_samples(vec![t0; len], fs, 0),
        };
        let tx = random_grid(&cfg, 13).unwrap();
        let s = modulate(&tx, &cfg).unwrap();
        let rx = bp_chain(&s, &fe).unwrap();
        let g = demodulate(&rx, &cfg).unwrap();
        let est = crate::ofdm::estimate_cpe(&g, &tx).unwrap();
        let expect = 2.0 * std::f64::consts::PI * 1e9 * t0;
        assert!(
            (est.phases[0].abs() - expect).abs() / expect < 0.05,
            "rotation {} vs 2*pi*f_if*t0 = {expect}",
            est.phases[0]
        );
    }

    #[test]
    fn bp_cpe_exceeds_bb_cpe_at_equal_rms() {
        let cfg = toy_cfg(64, 8, 4);
        let len = cfg.layout().frame_len();
        let fs = cfg.fs_hz();
        // large enough for a clear PN-like effect, small enough to stay
        // within the one-sample resampler bound at eta = 8
        let rms = 2e-11;
        let mut bp_wins = 0;
        let trials = 20;
        for seed in 0..trials {
            let dac = colored_trace(len, fs, rms, 1000 + seed);
            let adc = colored_trace(len, fs, rms, 2000 + seed);
            let tx = random_grid(&cfg, 13).unwrap();
            let s = modulate(&tx, &cfg).unwrap();
            let mean_abs_cpe = |mode, f_if| {
                let fe = FrontendConfig {
                    mode,
                    f_if_hz: f_if,
                    engine: Engine::Farrow,
                    dac_jitter: dac.clone(),
                    adc_jitter: adc.clone(),
                };
                let rx = run_chain(&s, &fe).unwrap();
                let g = demodulate(&rx, &cfg).unwrap();
                let est = crate::ofdm::estimate_cpe(&g, &tx).unwrap();
                est.phases.iter().map(|p| p.abs()).sum::<f64>() / est.phases.len() as f64
            };
            if mean_abs_cpe(SamplingMode::Bp, 1e9) > mean_abs_cpe(SamplingMode::Bb, 0.0) {
                bp_wins += 1;
            }
        }
        assert!(
            bp_wins * 100 >= trials * 95,
            "BP CPE larger in only {bp_wins}/{trials} seeds"
        );
    }

    #[test]
    fn jitter_free_chains_preserve_frame_energy() {
        for (mode, f_if, eta) in [(SamplingMode::Bb, 0.0, 2), (SamplingMode::Bp, 1e9, 8)] {
            let cfg = toy_cfg(64, eta, 2);
            let len = cfg.layout().frame_len();
            let fe = FrontendConfig {
                mode,
                f_if_hz: f_if,
                engine: Engine::Farrow,
                dac_jitter: zero_trace(len, cfg.fs_hz()),
                adc_jitter: zero_trace(len, cfg.fs_hz()),
            };
            let tx = random_grid(&cfg, 13).unwrap();
            let s = modulate(&tx, &cfg).unwrap();
            let rx = run_chain(&s, &fe).unwrap();
            let e_in: f64 = s.data.iter().map(|c| c.norm_sqr()).sum();
            // the BP stream carries the conversion image on top of the
            // signal; compare energies on the demodulated grids instead
            let g_in = demodulate(&s, &cfg).unwrap();
            let g_out = demodulate(&rx, &cfg).unwrap();
            let p_in: f64 = g_in.data.iter().map(|c| c.norm_sqr()).sum();
            let p_out: f64 = g_out.data.iter().map(|c| c.norm_sqr()).sum();
            let ratio_db = 10.0 * (p_out / p_in).log10();
            assert!(
                ratio_db.abs() < 0.1,
                "{}: energy ratio {ratio_db} dB (stream energy {e_in:.3})",
                mode.label()
            );
        }
    }
}
