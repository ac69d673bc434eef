//! Sweep orchestration: axis expansion, deterministic per-tuple seeding,
//! parallel execution and CSV/JSON result emission.

use crate::commetrics::{evm, sir};
use crate::error::{Result, SimError};
use crate::frontend::{run_chain, Engine, FrontendConfig, SamplingMode};
use crate::jitter::{pn_to_jitter, scale_to_rms, synth_pn, JitterTrace, PsdMask};
use crate::ofdm::{
    correct_cpe, demodulate, estimate_cpe, modulate, random_grid, Modulation, OfdmConfig,
    SymbolGrid,
};
use crate::radar::{
    apply_targets, default_exclusion_cells, image_sir, islr_cut, pplr, pslr_cut, range_doppler,
    CutAxis, RadarImage, Target,
};
use crate::window::WindowKind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

/// Fraction of a sample period the harness clips jitter traces to so that
/// the one-sample resampler bound always holds. Only the extreme tails of
/// the widest RMS settings are affected (about 1% of samples at
/// RMS = 1e-10 s and η = 8).
pub const JITTER_CLIP_FRACTION: f64 = 0.98;

/// CP length choice relative to N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CpChoice {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "N/4")]
    QuarterN,
    #[serde(rename = "N")]
    FullN,
}

impl CpChoice {
    pub fn n_cp(&self, n: usize) -> usize {
        match self {
            CpChoice::Zero => 0,
            CpChoice::QuarterN => n / 4,
            CpChoice::FullN => n,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CpChoice::Zero => "0",
            CpChoice::QuarterN => "N4",
            CpChoice::FullN => "N",
        }
    }
}

/// Sweep axes; the cartesian product of all entries is executed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepAxes {
    pub mode: Vec<SamplingMode>,
    pub engine: Vec<Engine>,
    pub rms_sj_s: Vec<f64>,
    pub eta: Vec<usize>,
    pub n: Vec<usize>,
    pub n_cp: Vec<CpChoice>,
    pub modulation: Vec<Modulation>,
}

/// Deterministic seeding: `count` seeds starting from index 0, mixed with
/// `base` and the axis values into independent DAC/ADC/data streams.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeedSpec {
    pub count: u64,
    pub base: u64,
}

/// Radar scenario and processing parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadarSpec {
    pub targets: Vec<Target>,
    pub window: WindowKind,
    /// Zero-pad factor for the cut metrics image.
    pub zp_cuts: usize,
    /// Zero-pad factor for the image-SIR image.
    pub zp_sir: usize,
    #[serde(default)]
    pub write_images: bool,
}

/// A full sweep specification.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axes: SweepAxes,
    pub seeds: SeedSpec,
    /// OFDM symbols per frame.
    pub m: usize,
    pub b_hz: f64,
    /// Digital IF used by BP tuples.
    pub f_if_hz: f64,
    pub mask: PsdMask,
    /// Externally supplied DAC/ADC traces; rescaled per tuple when present.
    pub injected: Option<(JitterTrace, JitterTrace)>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let a = &self.axes;
        if a.mode.is_empty()
            || a.engine.is_empty()
            || a.rms_sj_s.is_empty()
            || a.eta.is_empty()
            || a.n.is_empty()
            || a.n_cp.is_empty()
            || a.modulation.is_empty()
        {
            return Err(SimError::Config("every sweep axis needs a value".into()));
        }
        for &rms in &a.rms_sj_s {
            if !(0.0..=1e-10).contains(&rms) {
                return Err(SimError::Config(format!(
                    "RMS jitter {rms:e} s outside [0, 1e-10] s sweep domain"
                )));
            }
        }
        for &eta in &a.eta {
            if ![1, 2, 4, 8].contains(&eta) {
                return Err(SimError::Config(format!("eta {eta} not in {{1,2,4,8}}")));
            }
        }
        for &n in &a.n {
            if !n.is_power_of_two() || !(256..=16384).contains(&n) {
                return Err(SimError::Config(format!(
                    "N {n} not a power of two in [256, 16384]"
                )));
            }
        }
        if self.seeds.count == 0 {
            return Err(SimError::Config("seed count must be >= 1".into()));
        }
        if self.m == 0 || !(self.b_hz > 0.0) {
            return Err(SimError::Config("need m >= 1 and b_hz > 0".into()));
        }
        Ok(())
    }
}

/// One expanded sweep point.
#[derive(Debug, Clone, Copy)]
pub struct Tuple {
    pub mode: SamplingMode,
    pub engine: Engine,
    pub rms_sj_s: f64,
    pub eta: usize,
    pub n: usize,
    pub n_cp: CpChoice,
    pub modulation: Modulation,
    pub seed_index: u64,
}

impl Tuple {
    /// Canonical key; drives seed derivation and output naming.
    pub fn key(&self) -> String {
        format!(
            "{}_{}_rms{:e}_eta{}_n{}_cp{}_{}",
            self.mode.label(),
            self.engine.label(),
            self.rms_sj_s,
            self.eta,
            self.n,
            self.n_cp.label(),
            self.modulation.label()
        )
    }
}

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed derivation from the base seed, a tuple key and a role tag.
/// Guarantees independent DAC/ADC streams and cross-run reproducibility.
pub fn derive_seed(base: u64, key: &str, role: &str) -> u64 {
    let mut h = fnv1a(0xCBF2_9CE4_8422_2325, &base.to_le_bytes());
    h = fnv1a(h, key.as_bytes());
    h = fnv1a(h, &[0xFF]);
    h = fnv1a(h, role.as_bytes());
    splitmix64(h)
}

/// One result row per (tuple, seed): config echo, metrics and runtime.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub mode: String,
    pub engine: String,
    pub rms_sj_s: f64,
    pub eta: usize,
    pub n: usize,
    pub n_cp: usize,
    pub modulation: String,
    pub m: usize,
    pub seed: u64,
    pub mean_evm_db: Option<f64>,
    pub sir_db: Option<f64>,
    pub mean_evm_cpe_db: Option<f64>,
    pub sir_cpe_db: Option<f64>,
    pub pplr_db: Option<f64>,
    pub pslr_range_db: Option<f64>,
    pub pslr_doppler_db: Option<f64>,
    pub islr_range_db: Option<f64>,
    pub islr_doppler_db: Option<f64>,
    pub image_sir_mean_db: Option<f64>,
    pub image_sir_min_db: Option<f64>,
    pub runtime_s: f64,
}

/// Stable CSV schema; the trailing runtime column is excluded from
/// reproducibility comparisons.
pub const CSV_HEADER: &str = "mode,engine,rms_sj_s,eta,n,n_cp,modulation,m,seed,\
mean_evm_db,sir_db,mean_evm_cpe_db,sir_cpe_db,pplr_db,pslr_range_db,pslr_doppler_db,\
islr_range_db,islr_doppler_db,image_sir_mean_db,image_sir_min_db,runtime_s";

fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_nan() => "nan".to_string(),
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{:e},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.mode,
            self.engine,
            self.rms_sj_s,
            self.eta,
            self.n,
            self.n_cp,
            self.modulation,
            self.m,
            self.seed,
            opt(self.mean_evm_db),
            opt(self.sir_db),
            opt(self.mean_evm_cpe_db),
            opt(self.sir_cpe_db),
            opt(self.pplr_db),
            opt(self.pslr_range_db),
            opt(self.pslr_doppler_db),
            opt(self.islr_range_db),
            opt(self.islr_doppler_db),
            opt(self.image_sir_mean_db),
            opt(self.image_sir_min_db),
            self.runtime_s
        );
        s
    }

    fn group_key(&self) -> String {
        format!(
            "{},{},{:e},{},{},{},{},{}",
            self.mode,
            self.engine,
            self.rms_sj_s,
            self.eta,
            self.n,
            self.n_cp,
            self.modulation,
            self.m
        )
    }
}

fn expand(spec: &SweepSpec) -> Vec<Tuple> {
    let a = &spec.axes;
    let mut out = Vec::new();
    for &mode in &a.mode {
        for &engine in &a.engine {
            for &rms in &a.rms_sj_s {
                for &eta in &a.eta {
                    for &n in &a.n {
                        for &n_cp in &a.n_cp {
                            for &modulation in &a.modulation {
                                for seed_index in 0..spec.seeds.count {
                                    out.push(Tuple {
                                        mode,
                                        engine,
                                        rms_sj_s: rms,
                                        eta,
                                        n,
                                        n_cp,
                                        modulation,
                                        seed_index,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn ofdm_config(spec: &SweepSpec, t: &Tuple) -> Result<OfdmConfig> {
    OfdmConfig::new(
        t.n,
        t.eta,
        t.n_cp.n_cp(t.n),
        spec.m,
        spec.b_hz,
        t.modulation,
    )
}

/// Clip a trace to the resampler bound and rebuild its realized RMS.
fn clip_to_bound(mut trace: JitterTrace, period_s: f64) -> JitterTrace {
    let bound = JITTER_CLIP_FRACTION * period_s;
    if trace.samples.iter().any(|d| d.abs() >= bound) {
        for d in trace.samples.iter_mut() {
            *d = d.clamp(-bound, bound);
        }
        trace = JitterTrace::from_samples(trace.samples, trace.fs_hz, trace.seed);
    }
    trace
}

/// Synthesize (or rescale injected) DAC/ADC traces for one tuple.
pub fn tuple_jitter(
    spec: &SweepSpec,
    t: &Tuple,
    len: usize,
    fs_hz: f64,
) -> Result<(JitterTrace, JitterTrace)> {
    let key = format!("{}#{}", t.key(), t.seed_index);
    let make = |role: &str, injected: Option<&JitterTrace>| -> Result<JitterTrace> {
        let raw = match injected {
            Some(tr) => {
                if tr.len() < len {
                    return Err(SimError::Framing(format!(
                        "injected {role} trace shorter than frame: {} < {len}",
                        tr.len()
                    )));
                }
                let mut c = tr.clone();
                c.samples.truncate(len);
                JitterTrace::from_samples(c.samples, fs_hz, tr.seed)
            }
            None => {
                let seed = derive_seed(spec.seeds.base, &key, role);
                let pn = synth_pn(&spec.mask, fs_hz, len, seed)?;
                pn_to_jitter(&pn, fs_hz)?
            }
        };
        let scaled = scale_to_rms(&raw, t.rms_sj_s)?;
        Ok(clip_to_bound(scaled, 1.0 / fs_hz))
    };
    let dac = make("dac", spec.injected.as_ref().map(|p| &p.0))?;
    let adc = make("adc", spec.injected.as_ref().map(|p| &p.1))?;
    Ok((dac, adc))
}

fn frontend_config(
    spec: &SweepSpec,
    t: &Tuple,
    dac: JitterTrace,
    adc: JitterTrace,
) -> FrontendConfig {
    FrontendConfig {
        mode: t.mode,
        f_if_hz: match t.mode {
            SamplingMode::Bb => 0.0,
            SamplingMode::Bp => spec.f_if_hz,
        },
        engine: t.engine,
        dac_jitter: dac,
        adc_jitter: adc,
    }
}

/// Transmit grid, received grid and the TX stream for one tuple.
fn run_tuple_chain(
    spec: &SweepSpec,
    t: &Tuple,
    cfg: &OfdmConfig,
    grid_tx: &SymbolGrid,
) -> Result<SymbolGrid> {
    let stream = modulate(grid_tx, cfg)?;
    let (dac, adc) = tuple_jitter(spec, t, stream.len(), cfg.fs_hz())?;
    let fe = frontend_config(spec, t, dac, adc);
    let rx = run_chain(&stream, &fe)?;
    demodulate(&rx, cfg)
}

/// Communication sweep: jittered chain, demodulation and EVM/SIR per tuple
/// (with and without CPE correction).
pub fn run_comm(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let tuples = expand(spec);
    tuples
        .par_iter()
        .map(|t| {
            let started = Instant::now();
            let cfg = ofdm_config(spec, t)?;
            let key = format!("{}#{}", t.key(), t.seed_index);
            let tx = random_grid(&cfg, derive_seed(spec.seeds.base, &key, "data"))?;
            let rx = run_tuple_chain(spec, t, &cfg, &tx)?;
            let (mean_evm, _per_k) = evm(&rx, &tx)?;
            let sir_db = sir(&rx, &tx)?;
            let est = estimate_cpe(&rx, &tx)?;
            let rx_cpe = correct_cpe(&rx, &est.phases)?;
            let (mean_evm_cpe, _) = evm(&rx_cpe, &tx)?;
            let sir_cpe = sir(&rx_cpe, &tx)?;
            Ok(ResultRow {
                mode: t.mode.label().into(),
                engine: t.engine.label().into(),
                rms_sj_s: t.rms_sj_s,
                eta: t.eta,
                n: t.n,
                n_cp: t.n_cp.n_cp(t.n),
                modulation: t.modulation.label().into(),
                m: spec.m,
                seed: t.seed_index,
                mean_evm_db: Some(mean_evm),
                sir_db: Some(sir_db),
                mean_evm_cpe_db: Some(mean_evm_cpe),
                sir_cpe_db: Some(sir_cpe),
                pplr_db: None,
                pslr_range_db: None,
                pslr_doppler_db: None,
                islr_range_db: None,
                islr_doppler_db: None,
                image_sir_mean_db: None,
                image_sir_min_db: None,
                runtime_s: started.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Radar images produced for one tuple.
pub struct RadarOutcome {
    pub row: ResultRow,
    pub image_key: String,
    pub image: Option<RadarImage>,
}

/// Radar sweep: comm chain with targets applied, range-Doppler processing
/// and PPLR/PSLR/ISLR plus mean/min image SIR per tuple.
pub fn run_radar(spec: &SweepSpec, radar: &RadarSpec) -> Result<Vec<RadarOutcome>> {
    spec.validate()?;
    if radar.targets.is_empty() {
        return Err(SimError::Config("radar sweep needs targets".into()));
    }
    if radar.zp_cuts == 0 || radar.zp_sir == 0 {
        return Err(SimError::Config("zero-pad factors must be >= 1".into()));
    }
    let tuples = expand(spec);
    tuples
        .par_iter()
        .map(|t| {
            let started = Instant::now();
            let cfg = ofdm_config(spec, t)?;
            let key = format!("{}#{}", t.key(), t.seed_index);
            let tx = random_grid(&cfg, derive_seed(spec.seeds.base, &key, "data"))?;
            let echoed = apply_targets(&tx, &radar.targets, &cfg)?;
            let rx = run_tuple_chain(spec, t, &cfg, &echoed)?;

            // jitter-free reference through the same chain for PPLR
            let zero = Tuple {
                rms_sj_s: 0.0,
                ..*t
            };
            let rx_ref = run_tuple_chain(spec, &zero, &cfg, &echoed)?;

            let (mean_evm, _) = evm(&rx, &echoed)?;
            let sir_db = sir(&rx, &echoed)?;

            let w = radar.window;
            // the zero-padded cut images are the largest allocations; keep
            // their lifetime to this block
            let (pplr_db, pslr_r, pslr_d, islr_r, islr_d) = {
                let img_cuts = range_doppler(&rx, &tx, w, w, radar.zp_cuts, &cfg)?;
                let img_ref = range_doppler(&rx_ref, &tx, w, w, radar.zp_cuts, &cfg)?;
                let peak = img_cuts.peak();
                (
                    pplr(&img_cuts, &img_ref)?,
                    pslr_cut(&img_cuts, peak, CutAxis::Range)?,
                    pslr_cut(&img_cuts, peak, CutAxis::Doppler)?,
                    islr_cut(&img_cuts, peak, CutAxis::Range)?,
                    islr_cut(&img_cuts, peak, CutAxis::Doppler)?,
                )
            };

            let img_sir = range_doppler(&rx, &tx, w, w, radar.zp_sir, &cfg)?;
            let cells = default_exclusion_cells(&w, cfg.n);
            let (sir_mean, sir_min) = image_sir(&img_sir, &radar.targets, cells)?;

            let row = ResultRow {
                mode: t.mode.label().into(),
                engine: t.engine.label().into(),
                rms_sj_s: t.rms_sj_s,
                eta: t.eta,
                n: t.n,
                n_cp: t.n_cp.n_cp(t.n),
                modulation: t.modulation.label().into(),
                m: spec.m,
                seed: t.seed_index,
                mean_evm_db: Some(mean_evm),
                sir_db: Some(sir_db),
                mean_evm_cpe_db: None,
                sir_cpe_db: None,
                pplr_db: Some(pplr_db),
                pslr_range_db: Some(pslr_r),
                pslr_doppler_db: Some(pslr_d),
                islr_range_db: Some(islr_r),
                islr_doppler_db: Some(islr_d),
                image_sir_mean_db: Some(sir_mean),
                image_sir_min_db: Some(sir_min),
                runtime_s: started.elapsed().as_secs_f64(),
            };
            Ok(RadarOutcome {
                row,
                image_key: format!("{}_s{}", t.key(), t.seed_index),
                image: if radar.write_images {
                    Some(img_sir)
                } else {
                    None
                },
            })
        })
        .collect()
}

/// Write `rows.csv`, the per-config seed-mean `rows_agg.csv` and a JSON
/// summary into `out_dir` under the given label.
pub fn report(rows: &[ResultRow], out_dir: &Path, label: &str) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| SimError::io(out_dir.display().to_string(), e))?;
    let csv_path = out_dir.join(format!("{label}.csv"));
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&r.to_csv());
        text.push('\n');
    }
    std::fs::write(&csv_path, &text)
        .map_err(|e| SimError::io(csv_path.display().to_string(), e))?;

    // aggregate: arithmetic mean of each dB column over seeds, keyed by the
    // full config echo, in first-occurrence order
    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, Vec<&ResultRow>> =
        std::collections::HashMap::new();
    for r in rows {
        let k = r.group_key();
        if !groups.contains_key(&k) {
            order.push(k.clone());
        }
        groups.entry(k).or_default().push(r);
    }
    let mean_of = |get: &dyn Fn(&ResultRow) -> Option<f64>, rs: &[&ResultRow]| -> Option<f64> {
        let vals: Vec<f64> = rs.iter().filter_map(|r| get(r)).filter(|v| v.is_finite()).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    let agg_path = out_dir.join(format!("{label}_agg.csv"));
    let mut agg = String::from(
        "mode,engine,rms_sj_s,eta,n,n_cp,modulation,m,seeds,\
mean_evm_db,sir_db,mean_evm_cpe_db,sir_cpe_db,pplr_db,pslr_range_db,pslr_doppler_db,\
islr_range_db,islr_doppler_db,image_sir_mean_db,image_sir_min_db",
    );
    agg.push('\n');
    for k in &order {
        let rs = &groups[k];
        let _ = write!(
            agg,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            k,
            rs.len(),
            opt(mean_of(&|r| r.mean_evm_db, rs)),
            opt(mean_of(&|r| r.sir_db, rs)),
            opt(mean_of(&|r| r.mean_evm_cpe_db, rs)),
            opt(mean_of(&|r| r.sir_cpe_db, rs)),
            opt(mean_of(&|r| r.pplr_db, rs)),
            opt(mean_of(&|r| r.pslr_range_db, rs)),
            opt(mean_of(&|r| r.pslr_doppler_db, rs)),
            opt(mean_of(&|r| r.islr_range_db, rs)),
            opt(mean_of(&|r| r.islr_doppler_db, rs)),
            opt(mean_of(&|r| r.image_sir_mean_db, rs)),
            opt(mean_of(&|r| r.image_sir_min_db, rs)),
        );
    }
    std::fs::write(&agg_path, &agg)
        .map_err(|e| SimError::io(agg_path.display().to_string(), e))?;

    let summary = serde_json::json!({
        "schema_version": 1,
        "rows": rows.len(),
        "configs": order.len(),
        "columns": CSV_HEADER.split(',').collect::<Vec<_>>(),
    });
    let sum_path = out_dir.join(format!("{label}_summary.json"));
    std::fs::write(&sum_path, serde_json::to_string_pretty(&summary).unwrap())
        .map_err(|e| SimError::io(sum_path.display().to_string(), e))?;
    Ok(())
}
