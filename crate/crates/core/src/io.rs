//! File formats: PSD mask text files, binary trace/grid exports, radar
//! image dumps and CSV helpers.

use crate::error::{Result, SimError};
use crate::jitter::{JitterTrace, PsdMask};
use crate::ofdm::{GridRole, SymbolGrid};
use crate::radar::RadarImage;
use num_complex::Complex64;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

const TRACE_MAGIC: &[u8; 4] = b"SJT1";

/// Parse a mask file: one `offset_hz level_dbc_hz` pair per line,
/// `#` comments and blank lines ignored.
pub fn parse_mask(text: &str) -> Result<PsdMask> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let f: f64 = it
            .next()
            .ok_or_else(|| SimError::Parse(format!("line {}: missing offset", lineno + 1)))?
            .parse()
            .map_err(|e| SimError::Parse(format!("line {}: {e}", lineno + 1)))?;
        let l: f64 = it
            .next()
            .ok_or_else(|| SimError::Parse(format!("line {}: missing level", lineno + 1)))?
            .parse()
            .map_err(|e| SimError::Parse(format!("line {}: {e}", lineno + 1)))?;
        if it.next().is_some() {
            return Err(SimError::Parse(format!(
                "line {}: expected exactly two columns",
                lineno + 1
            )));
        }
        points.push((f, l));
    }
    PsdMask::new(points)
}

pub fn read_mask(path: &Path) -> Result<PsdMask> {
    let text =
        fs::read_to_string(path).map_err(|e| SimError::io(path.display().to_string(), e))?;
    parse_mask(&text)
}

/// Write a trace as little-endian f64 with a small header
/// (magic, rate, length, seed).
pub fn write_trace(path: &Path, trace: &JitterTrace) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| SimError::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(f);
    let io = |e| SimError::io(path.display().to_string(), e);
    w.write_all(TRACE_MAGIC).map_err(io)?;
    w.write_all(&trace.fs_hz.to_le_bytes()).map_err(io)?;
    w.write_all(&(trace.samples.len() as u64).to_le_bytes())
        .map_err(io)?;
    w.write_all(&trace.seed.to_le_bytes()).map_err(io)?;
    for s in &trace.samples {
        w.write_all(&s.to_le_bytes()).map_err(io)?;
    }
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<JitterTrace> {
    let mut f = fs::File::open(path).map_err(|e| SimError::io(path.display().to_string(), e))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)
        .map_err(|e| SimError::io(path.display().to_string(), e))?;
    if buf.len() < 28 || &buf[..4] != TRACE_MAGIC {
        return Err(SimError::Parse(format!(
            "{}: not a trace file",
            path.display()
        )));
    }
    let fs_hz = f64::from_le_bytes(buf[4..12].try_into().unwrap());
    let len = u64::from_le_bytes(buf[12..20].try_into().unwrap()) as usize;
    let seed = u64::from_le_bytes(buf[20..28].try_into().unwrap());
    if buf.len() != 28 + 8 * len {
        return Err(SimError::Parse(format!(
            "{}: truncated trace file",
            path.display()
        )));
    }
    let samples: Vec<f64> = buf[28..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(JitterTrace::from_samples(samples, fs_hz, seed))
}

/// Grid export as CSV rows `k,m,re,im` with centered subcarrier index.
pub fn write_grid_csv(path: &Path, grid: &SymbolGrid) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| SimError::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(f);
    let io = |e| SimError::io(path.display().to_string(), e);
    writeln!(w, "k,m,re,im").map_err(io)?;
    for m in 0..grid.m {
        for k in 0..grid.n {
            let kc = k as i64 - (grid.n / 2) as i64;
            let v = grid.at(k, m);
            writeln!(w, "{kc},{m},{},{}", v.re, v.im).map_err(io)?;
        }
    }
    Ok(())
}

/// Grid export as raw little-endian f64 pairs with an 24-byte header.
pub fn write_grid_bin(path: &Path, grid: &SymbolGrid) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| SimError::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(f);
    let io = |e| SimError::io(path.display().to_string(), e);
    w.write_all(b"GRD1____").map_err(io)?;
    w.write_all(&(grid.n as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(grid.m as u64).to_le_bytes()).map_err(io)?;
    for v in &grid.data {
        w.write_all(&v.re.to_le_bytes()).map_err(io)?;
        w.write_all(&v.im.to_le_bytes()).map_err(io)?;
    }
    Ok(())
}

pub fn read_grid_bin(path: &Path, role: GridRole) -> Result<SymbolGrid> {
    let mut buf = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| SimError::io(path.display().to_string(), e))?;
    if buf.len() < 24 || &buf[..8] != b"GRD1____" {
        return Err(SimError::Parse(format!(
            "{}: not a grid file",
            path.display()
        )));
    }
    let n = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
    let m = u64::from_le_bytes(buf[16..24].try_into().unwrap()) as usize;
    if buf.len() != 24 + 16 * n * m {
        return Err(SimError::Parse(format!(
            "{}: truncated grid file",
            path.display()
        )));
    }
    let data: Vec<Complex64> = buf[24..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    SymbolGrid::new(data, n, m, role)
}

/// Persist a radar image: `<stem>.bin` holds the row-major f64 power grid,
/// `<stem>.txt` a human-readable header with axes and processing metadata.
pub fn write_radar_image(stem: &Path, image: &RadarImage) -> Result<()> {
    let bin_path = stem.with_extension("bin");
    let f =
        fs::File::create(&bin_path).map_err(|e| SimError::io(bin_path.display().to_string(), e))?;
    let mut w = BufWriter::new(f);
    let io = |e| SimError::io(bin_path.display().to_string(), e);
    for v in &image.power {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    drop(w);
    let txt_path = stem.with_extension("txt");
    let header = format!(
        "range_bins {}\ndoppler_bins {}\nzp {}\nrange_step_m {}\ndoppler_step_norm {}\nwindow_range {}\nwindow_doppler {}\nlayout row-major f64le power, doppler-fastest\n",
        image.range_bins,
        image.doppler_bins,
        image.zp,
        image.range_step_m,
        image.doppler_step_norm,
        image.window_range.label(),
        image.window_doppler.label(),
    );
    fs::write(&txt_path, header).map_err(|e| SimError::io(txt_path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm::{random_grid, Modulation, OfdmConfig};

    #[test]
    fn mask_file_roundtrip_and_errors() {
        let m = parse_mask("# comment\n1e2 -112\n1e3 -140 # inline\n\n1e6 -150\n").unwrap();
        assert_eq!(m.points().len(), 3);
        assert!(parse_mask("1e2\n").is_err());
        assert!(parse_mask("1e2 -112 extra\n").is_err());
        assert!(parse_mask("abc -112\n").is_err());
    }

    #[test]
    fn trace_file_roundtrip_is_bit_exact() {
        let dir = std::env::temp_dir().join("isac_sim_io_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.trace");
        let tr = JitterTrace::from_samples(vec![1e-12, -3e-13, 0.0, 5e-15], 5e8, 77);
        write_trace(&path, &tr).unwrap();
        let back = read_trace(&path).unwrap();
        assert_eq!(back.samples, tr.samples);
        assert_eq!(back.fs_hz, tr.fs_hz);
        assert_eq!(back.seed, tr.seed);
    }

    #[test]
    fn grid_bin_roundtrip() {
        let cfg = OfdmConfig::new_unchecked_size(16, 1, 0, 2, 5e8, Modulation::Qam16).unwrap();
        let g = random_grid(&cfg, 3).unwrap();
        let dir = std::env::temp_dir().join("isac_sim_io_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("g.grid");
        write_grid_bin(&path, &g).unwrap();
        let back = read_grid_bin(&path, GridRole::Tx).unwrap();
        assert_eq!(back.n, 16);
        assert_eq!(back.m, 2);
        for (a, b) in back.data.iter().zip(g.data.iter()) {
            assert_eq!(a, b);
        }
    }
}
