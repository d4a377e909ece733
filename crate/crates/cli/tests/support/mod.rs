//! Fixtures shared by the CLI test targets.

#![allow(dead_code)]

use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use specaug::featio::{write_feature_file, NpyMatrix};
use specaug::{split_stream, Spectrogram};

pub const BIN: &str = env!("CARGO_BIN_EXE_specaug");

/// Seeded zero-mean noise spectrogram.
pub fn noise_spectrogram(nu: usize, tau: usize, seed: u64) -> Spectrogram {
    let mut rng = split_stream(seed, 0xF1D0);
    let values = (0..nu * tau).map(|_| (rng.next_f64() * 8.0 - 4.0) as f32).collect();
    Spectrogram::new(nu, tau, values).unwrap().normalize().unwrap()
}

/// Normalized noise written to disk in the `(τ, ν)` layout the CLI reads.
pub fn write_noise_npy(path: &Path, nu: usize, tau: usize, seed: u64) -> Spectrogram {
    let spec = noise_spectrogram(nu, tau, seed);
    write_feature_file(path, &NpyMatrix::from(&spec)).unwrap();
    spec
}

pub fn write_tone_wav(path: &Path, freq_hz: f64, seconds: f64, rate: u32) {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    let n = (seconds * f64::from(rate)) as usize;
    for i in 0..n {
        let v = 12_000.0 * (2.0 * std::f64::consts::PI * freq_hz * i as f64 / f64::from(rate)).sin();
        w.write_sample(v.round() as i16).unwrap();
    }
    w.finalize().unwrap();
}

/// Writes `ids` as a manifest of `<dir>/<id>.npy` inputs.
pub fn write_manifest(dir: &Path, ids: &[String], extension: &str) -> PathBuf {
    let mut text = String::from("# id\tinput\n");
    for id in ids {
        text.push_str(&format!("{id}\t{id}.{extension}\n"));
    }
    let path = dir.join("manifest.tsv");
    std::fs::write(&path, text).unwrap();
    path
}

pub fn specaug(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("SPECAUG_LOG", "error")
        .output()
        .expect("running specaug")
}

pub fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Decoded RGB8 PNG: `(width, height, pixels)`.
pub fn read_png(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = std::fs::read(path).unwrap();
    let mut reader = png::Decoder::new(Cursor::new(bytes)).read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    assert_eq!(info.color_type, png::ColorType::Rgb);
    buf.truncate(info.buffer_size());
    (info.width as usize, info.height as usize, buf)
}
