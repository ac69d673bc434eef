//! Data-aided constellation quality metrics: per-subcarrier and mean EVM,
//! and frame SIR after gain matching.
//!
//! The mean EVM is the arithmetic mean of the per-subcarrier dB values
//! (not a total-power ratio). For spectrally flat error the two coincide;
//! for edge-concentrated error they diverge, which is why both EVM and SIR
//! are reported.

use crate::error::{Result, SimError};
use crate::ofdm::SymbolGrid;
use num_complex::Complex64;
use serde::Serialize;

/// Sentinel for error-free cells, well below any measurable EVM.
pub const EVM_FLOOR_DB: f64 = -300.0;

/// Sentinel for interference-free SIR.
pub const SIR_CEIL_DB: f64 = 300.0;

/// Per-frame communication quality report.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub mean_evm_db: f64,
    pub evm_per_subcarrier_db: Vec<f64>,
    pub sir_db: f64,
    pub engine: String,
    pub seeds: Vec<u64>,
}

/// Per-subcarrier EVM over symbols and its mean-of-dB aggregate.
///
/// `EVM_k = 10·log10(Σ_m |R-X|² / Σ_m |X|²)`; a subcarrier with zero TX
/// power reports NaN and is excluded from the mean; zero error reports
/// [`EVM_FLOOR_DB`].
pub fn evm(rx: &SymbolGrid, tx: &SymbolGrid) -> Result<(f64, Vec<f64>)> {
    if rx.n != tx.n || rx.m != tx.m {
        return Err(SimError::Framing("grid shapes differ".into()));
    }
    let mut per_k = Vec::with_capacity(rx.n);
    for k in 0..rx.n {
        let mut err = 0.0;
        let mut pw = 0.0;
        for m in 0..rx.m {
            err += (rx.at(k, m) - tx.at(k, m)).norm_sqr();
            pw += tx.at(k, m).norm_sqr();
        }
        per_k.push(if pw == 0.0 {
            f64::NAN
        } else if err == 0.0 {
            EVM_FLOOR_DB
        } else {
            (10.0 * (err / pw).log10()).max(EVM_FLOOR_DB)
        });
    }
    let finite: Vec<f64> = per_k.iter().cloned().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(SimError::Config("all subcarriers have zero TX power".into()));
    }
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    Ok((mean, per_k))
}

/// Frame SIR after complex gain matching:
/// `α = ⟨R,X⟩/⟨X,X⟩`, `SIR = 10·log10(|α|²·Σ|X|² / Σ|R-αX|²)`.
///
/// Invariant to any common complex gain on R; an exact gain multiple of X
/// reports [`SIR_CEIL_DB`].
pub fn sir(rx: &SymbolGrid, tx: &SymbolGrid) -> Result<f64> {
    if rx.n != tx.n || rx.m != tx.m {
        return Err(SimError::Framing("grid shapes differ".into()));
    }
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (r, x) in rx.data.iter().zip(tx.data.iter()) {
        num += r * x.conj();
        den += x.norm_sqr();
    }
    if den == 0.0 {
        return Err(SimError::Config("TX grid has zero power".into()));
    }
    let alpha = num / den;
    let mut resid = 0.0;
    for (r, x) in rx.data.iter().zip(tx.data.iter()) {
        resid += (r - alpha * x).norm_sqr();
    }
    let sig = alpha.norm_sqr() * den;
    if resid == 0.0 {
        return Ok(SIR_CEIL_DB);
    }
    Ok((10.0 * (sig / resid).log10()).min(SIR_CEIL_DB))
}
