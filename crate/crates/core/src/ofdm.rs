//! OFDM transmitter and receiver: Gray-mapped square QAM, frequency-domain
//! zero padding (FDZP) for oversampling, unitary IDFT/DFT, cyclic prefix
//! handling and common-phase-error estimation/correction.
//!
//! Conventions fixed here:
//! - Transmitter inverse transform uses `e^{+j2πlν/(ηN)}`, receiver forward
//!   transform `e^{-j2πlν/(ηN)}`, both scaled by `1/sqrt(ηN)` so Parseval
//!   holds symmetrically.
//! - The N data subcarriers sit at centered indices `k ∈ [-N/2, N/2)` and
//!   are embedded at FFT bins `k mod ηN`, leaving `(η-1)N/2` empty bins on
//!   each spectral edge; the receiver selects exactly the same bins.
//! - Gray labeling per axis: bit group `b` maps to amplitude level
//!   `(L-1) - 2·gray_decode(b)` over levels `{±1, ±3, …, ±(L-1)}`, so for
//!   QPSK bits `00 → (1+j)/√2`, and for 16-QAM the per-axis order over
//!   `00,01,11,10` is `+3,+1,-1,-3`.

use crate::error::{Result, SimError};
use crate::fft;
use crate::resample::{Domain, FrameLayout, SampleStream};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Square QAM alphabets used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
    Qam256,
}

impl Modulation {
    pub fn order(&self) -> usize {
        match self {
            Modulation::Qpsk => 4,
            Modulation::Qam16 => 16,
            Modulation::Qam64 => 64,
            Modulation::Qam256 => 256,
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order().trailing_zeros() as usize
    }

    fn bits_per_axis(&self) -> usize {
        self.bits_per_symbol() / 2
    }

    /// Levels per I/Q axis.
    fn levels(&self) -> usize {
        1 << self.bits_per_axis()
    }

    /// Scale factor giving unit average constellation power.
    fn norm(&self) -> f64 {
        let l = self.levels() as f64;
        (2.0 * (l * l - 1.0) / 3.0).sqrt()
    }

    pub fn label(&self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
            Modulation::Qam64 => "64qam",
            Modulation::Qam256 => "256qam",
        }
    }

    /// The full normalized alphabet.
    pub fn alphabet(&self) -> Vec<Complex64> {
        let l = self.levels() as i64;
        let s = self.norm();
        let mut pts = Vec::with_capacity(self.order());
        for i in 0..l {
            for q in 0..l {
                let re = (2 * i - (l - 1)) as f64 / s;
                let im = (2 * q - (l - 1)) as f64 / s;
                pts.push(Complex64::new(re, im));
            }
        }
        pts
    }
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = 0usize;
    while g != 0 {
        b ^= g;
        g >>= 1;
    }
    b
}

/// One axis level from a Gray-labeled bit group.
fn axis_level(bits: &[u8], levels: usize) -> f64 {
    let mut g = 0usize;
    for &b in bits {
        g = (g << 1) | (b as usize & 1);
    }
    ((levels - 1) as i64 - 2 * gray_decode(g) as i64) as f64
}

/// OFDM signal parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    /// Subcarrier count, power of two in [256, 16384].
    pub n: usize,
    /// FDZP oversampling factor in {1, 2, 4, 8}.
    pub eta: usize,
    /// Cyclic prefix length before oversampling, in {0, N/4, N}.
    pub n_cp: usize,
    /// OFDM symbols per frame.
    pub m: usize,
    /// Occupied baseband bandwidth in Hz.
    pub b_hz: f64,
    pub modulation: Modulation,
}

impl OfdmConfig {
    pub fn new(
        n: usize,
        eta: usize,
        n_cp: usize,
        m: usize,
        b_hz: f64,
        modulation: Modulation,
    ) -> Result<Self> {
        if !n.is_power_of_two() || !(256..=16384).contains(&n) {
            return Err(SimError::Config(format!(
                "subcarrier count {n} must be a power of two in [256, 16384]"
            )));
        }
        Self::new_unchecked_size(n, eta, n_cp, m, b_hz, modulation)
    }

    /// Constructor without the Table-range restriction on N, for toy frames
    /// used by oracle-scale validation.
    pub fn new_unchecked_size(
        n: usize,
        eta: usize,
        n_cp: usize,
        m: usize,
        b_hz: f64,
        modulation: Modulation,
    ) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(SimError::Config(format!("N = {n} must be a power of two")));
        }
        if ![1, 2, 4, 8].contains(&eta) {
            return Err(SimError::Config(format!("eta = {eta} not in {{1,2,4,8}}")));
        }
        if n_cp != 0 && n_cp != n / 4 && n_cp != n {
            return Err(SimError::Config(format!(
                "N_CP = {n_cp} must be one of 0, N/4, N (N = {n})"
            )));
        }
        if m == 0 {
            return Err(SimError::Config("frame needs at least one symbol".into()));
        }
        if !(b_hz > 0.0) {
            return Err(SimError::Config("bandwidth must be > 0".into()));
        }
        Ok(OfdmConfig {
            n,
            eta,
            n_cp,
            m,
            b_hz,
            modulation,
        })
    }

    pub fn delta_f_hz(&self) -> f64 {
        self.b_hz / self.n as f64
    }

    /// Converter rate `η·B`.
    pub fn fs_hz(&self) -> f64 {
        self.eta as f64 * self.b_hz
    }

    /// Critical sampling period `1/B`.
    pub fn ts_s(&self) -> f64 {
        1.0 / self.b_hz
    }

    /// OFDM symbol duration including CP.
    pub fn symbol_duration_s(&self) -> f64 {
        (self.n + self.n_cp) as f64 * self.ts_s()
    }

    pub fn layout(&self) -> FrameLayout {
        FrameLayout {
            eta: self.eta,
            n: self.n,
            n_cp: self.n_cp,
            m: self.m,
        }
    }

    /// FFT bin of centered subcarrier index `k ∈ [-N/2, N/2)`.
    pub fn bin_of_subcarrier(&self, k: i64) -> usize {
        let nfft = (self.eta * self.n) as i64;
        (k.rem_euclid(nfft)) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridRole {
    Tx,
    Rx,
}

/// N×M complex constellation grid; `data[m*n + k]` holds subcarrier
/// `k - N/2` of symbol `m`.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    pub data: Vec<Complex64>,
    pub n: usize,
    pub m: usize,
    pub role: GridRole,
}

impl SymbolGrid {
    pub fn new(data: Vec<Complex64>, n: usize, m: usize, role: GridRole) -> Result<Self> {
        if data.len() != n * m {
            return Err(SimError::Framing(format!(
                "grid data length {} != {n}x{m}",
                data.len()
            )));
        }
        Ok(SymbolGrid { data, n, m, role })
    }

    #[inline]
    pub fn at(&self, k: usize, m: usize) -> Complex64 {
        self.data[m * self.n + k]
    }

    pub fn symbol(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }
}

/// Map a bit stream onto a TX grid. `bits` holds one bit per entry (0/1),
/// consumed symbol-major, I bits before Q bits per cell.
pub fn map_symbols(bits: &[u8], cfg: &OfdmConfig) -> Result<SymbolGrid> {
    let bps = cfg.modulation.bits_per_symbol();
    let need = cfg.n * cfg.m * bps;
    if bits.len() != need {
        return Err(SimError::Config(format!(
            "bit count {} != N*M*log2(order) = {need}",
            bits.len()
        )));
    }
    let levels = cfg.modulation.levels();
    let half = cfg.modulation.bits_per_axis();
    let s = cfg.modulation.norm();
    let mut data = Vec::with_capacity(cfg.n * cfg.m);
    for cell in 0..cfg.n * cfg.m {
        let b = &bits[cell * bps..(cell + 1) * bps];
        let re = axis_level(&b[..half], levels) / s;
        let im = axis_level(&b[half..], levels) / s;
        data.push(Complex64::new(re, im));
    }
    SymbolGrid::new(data, cfg.n, cfg.m, GridRole::Tx)
}

/// OFDM modulation: FDZP-embed each symbol, inverse transform, prepend the
/// cyclic prefix, concatenate symbols into one stream at rate `η·B`.
pub fn modulate(grid: &SymbolGrid, cfg: &OfdmConfig) -> Result<SampleStream> {
    if grid.role != GridRole::Tx {
        return Err(SimError::Config("modulate expects a TX grid".into()));
    }
    if grid.n != cfg.n || grid.m != cfg.m {
        return Err(SimError::Framing(format!(
            "grid {}x{} does not match config {}x{}",
            grid.n, grid.m, cfg.n, cfg.m
        )));
    }
    let nfft = cfg.eta * cfg.n;
    let cp = cfg.eta * cfg.n_cp;
    let scale = 1.0 / (nfft as f64).sqrt();
    let plan = fft::inverse_plan(nfft);
    let mut out = Vec::with_capacity(cfg.m * (nfft + cp));
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for m in 0..cfg.m {
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for k in 0..cfg.n {
            let kc = k as i64 - (cfg.n / 2) as i64;
            buf[cfg.bin_of_subcarrier(kc)] = grid.at(k, m);
        }
        plan.process(&mut buf);
        buf.iter_mut().for_each(|c| *c *= scale);
        out.extend_from_slice(&buf[nfft - cp..]);
        out.extend_from_slice(&buf);
    }
    SampleStream::new(out, cfg.fs_hz(), Domain::BbComplex, Some(cfg.layout()))
}

/// OFDM demodulation: drop each symbol's cyclic prefix, forward transform,
/// select the N embedded bins (the exact inverse of [`modulate`]).
pub fn demodulate(stream: &SampleStream, cfg: &OfdmConfig) -> Result<SymbolGrid> {
    let nfft = cfg.eta * cfg.n;
    let cp = cfg.eta * cfg.n_cp;
    let sym = nfft + cp;
    if stream.len() != cfg.m * sym {
        return Err(SimError::Framing(format!(
            "stream length {} != M*eta*(N+N_CP) = {}",
            stream.len(),
            cfg.m * sym
        )));
    }
    let scale = 1.0 / (nfft as f64).sqrt();
    let plan = fft::forward_plan(nfft);
    let mut data = Vec::with_capacity(cfg.n * cfg.m);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for m in 0..cfg.m {
        buf.copy_from_slice(&stream.data[m * sym + cp..(m + 1) * sym]);
        plan.process(&mut buf);
        for k in 0..cfg.n {
            let kc = k as i64 - (cfg.n / 2) as i64;
            data.push(buf[cfg.bin_of_subcarrier(kc)] * scale);
        }
    }
    SymbolGrid::new(data, cfg.n, cfg.m, GridRole::Rx)
}

/// Per-symbol common phase estimate and degenerate-symbol flags.
#[derive(Debug, Clone)]
pub struct CpeEstimate {
    /// `φ̂_m = arg(Σ_k R_{k,m}·conj(X_{k,m}))`.
    pub phases: Vec<f64>,
    /// True where the correlation was zero and the phase defaulted to 0.
    pub degenerate: Vec<bool>,
}

/// Estimate the common phase error of each received symbol against the
/// known TX grid.
pub fn estimate_cpe(rx: &SymbolGrid, tx: &SymbolGrid) -> Result<CpeEstimate> {
    if rx.n != tx.n || rx.m != tx.m {
        return Err(SimError::Framing("grid shapes differ".into()));
    }
    let mut phases = Vec::with_capacity(rx.m);
    let mut degenerate = Vec::with_capacity(rx.m);
    for m in 0..rx.m {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..rx.n {
            acc += rx.at(k, m) * tx.at(k, m).conj();
        }
        if acc.norm_sqr() == 0.0 {
            phases.push(0.0);
            degenerate.push(true);
        } else {
            phases.push(acc.arg());
            degenerate.push(false);
        }
    }
    Ok(CpeEstimate { phases, degenerate })
}

/// Remove per-symbol common phase: `R'_{k,m} = R_{k,m}·e^{-jφ̂_m}`.
pub fn correct_cpe(rx: &SymbolGrid, phases: &[f64]) -> Result<SymbolGrid> {
    if phases.len() != rx.m {
        return Err(SimError::Framing(format!(
            "{} phases for {} symbols",
            phases.len(),
            rx.m
        )));
    }
    let mut data = rx.data.clone();
    for m in 0..rx.m {
        let rot = Complex64::from_polar(1.0, -phases[m]);
        for k in 0..rx.n {
            data[m * rx.n + k] *= rot;
        }
    }
    SymbolGrid::new(data, rx.n, rx.m, rx.role)
}

/// Deterministic random TX grid for sweeps: bits drawn from a seeded RNG.
pub fn random_grid(cfg: &OfdmConfig, seed: u64) -> Result<SymbolGrid> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<u8> = (0..cfg.n * cfg.m * cfg.modulation.bits_per_symbol())
        .map(|_| rng.gen_range(0..2u8))
        .collect();
    map_symbols(&bits, cfg)
}
