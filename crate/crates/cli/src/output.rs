//! Run-directory artifacts: manifests, CSV tables and PPM heatmaps.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::ArrayView2;
use serde::Serialize;

use crate::config::PipelineConfig;

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    artifact_version: &'static str,
    command: &'a str,
    master_seed: u64,
    config: &'a PipelineConfig,
}

/// Write `manifest_<command>.json`; together with the binary version it
/// reproduces the run bit-for-bit.
pub fn write_manifest(dir: &Path, command: &str, config: &PipelineConfig) -> std::io::Result<()> {
    let manifest = Manifest {
        artifact_version: env!("CARGO_PKG_VERSION"),
        command,
        master_seed: config.master_seed,
        config,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("config serializes");
    fs::write(dir.join(format!("manifest_{command}.json")), text)
}

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "{header}")?;
    for row in rows {
        writeln!(file, "{row}")?;
    }
    Ok(())
}

/// Map t ∈ [0, 1] through a piecewise-linear heat ramp
/// black → red → yellow → white.
fn heat_color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let seg = |x: f64| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
    if t < 1.0 / 3.0 {
        [seg(3.0 * t), 0, 0]
    } else if t < 2.0 / 3.0 {
        [255, seg(3.0 * t - 1.0), 0]
    } else {
        [255, 255, seg(3.0 * t - 2.0)]
    }
}

/// Binary P6 PPM with a min-max color ramp over the slice values; a
/// constant slice renders as a uniform color.
pub fn write_ppm(path: &Path, slice: ArrayView2<'_, f64>) -> std::io::Result<()> {
    let (rows, cols) = slice.dim();
    let min = slice.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;

    let mut bytes = Vec::with_capacity(rows * cols * 3 + 32);
    bytes.extend_from_slice(format!("P6\n{cols} {rows}\n255\n").as_bytes());
    for i in 0..rows {
        for j in 0..cols {
            let t = if span == 0.0 {
                0.0
            } else {
                (slice[[i, j]] - min) / span
            };
            bytes.extend_from_slice(&heat_color(t));
        }
    }
    fs::write(path, bytes)
}

/// One slice as a CSV grid (rows × cols).
pub fn write_slice_csv(path: &Path, slice: ArrayView2<'_, f64>) -> std::io::Result<()> {
    let mut out = String::new();
    for row in slice.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn ppm_header_and_payload_size() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ppm");
        let slice = Array2::from_shape_fn((2, 2), |(i, j)| (i + j) as f64);
        write_ppm(&path, slice.view()).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P6\n2 2\n255\n"));
        assert_eq!(bytes.len(), b"P6\n2 2\n255\n".len() + 12);
    }

    #[test]
    fn constant_slice_is_uniform_color() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ppm");
        let slice = Array2::from_elem((3, 4), -70.0);
        write_ppm(&path, slice.view()).unwrap();
        let bytes = fs::read(&path).unwrap();
        let payload = &bytes[b"P6\n4 3\n255\n".len()..];
        assert!(payload.chunks(3).all(|px| px == &payload[0..3]));
    }
}
