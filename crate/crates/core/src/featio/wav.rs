use std::io::Read;
use std::path::Path;

use hound::{SampleFormat, WavReader};

use crate::error::{Error, Result};

/// Mono audio with amplitudes in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f32>,
    sample_rate_hz: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Shape("audio buffer is empty".into()));
        }
        if sample_rate_hz == 0 {
            return Err(Error::Shape("sample rate must be positive".into()));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Reads a 16-bit PCM RIFF/WAVE file and returns its first channel.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| map_hound(e).at(path))?;
    decode(reader).map_err(|e| e.at(path))
}

/// Same as [`load_wav`] over any byte source.
pub fn read_wav<R: Read>(source: R) -> Result<AudioBuffer> {
    decode(WavReader::new(source).map_err(map_hound)?)
}

fn decode<R: Read>(reader: WavReader<R>) -> Result<AudioBuffer> {
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{:?} {}-bit samples, only 16-bit PCM is supported",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let channels = usize::from(spec.channels.max(1));
    let samples = reader
        .into_samples::<i16>()
        .step_by(channels)
        .map(|s| s.map(|v| f32::from(v) / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(map_hound)?;
    AudioBuffer::new(samples, spec.sample_rate)
}

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::Unsupported => Error::UnsupportedFormat("unsupported WAV encoding".into()),
        hound::Error::FormatError(msg) => Error::Format(msg.into()),
        other => Error::Format(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;

    use super::*;

    fn wav_bytes(spec: hound::WavSpec, write: impl FnOnce(&mut hound::WavWriter<&mut Cursor<Vec<u8>>>)) -> Vec<u8> {
        let mut cursor = Cursor::new(Vec::new());
        {
            let mut writer = hound::WavWriter::new(&mut cursor, spec).unwrap();
            write(&mut writer);
            writer.finalize().unwrap();
        }
        cursor.into_inner()
    }

    fn pcm16(channels: u16) -> hound::WavSpec {
        hound::WavSpec {
            channels,
            sample_rate: 16_000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        }
    }

    #[test]
    fn silence_second() {
        let bytes = wav_bytes(pcm16(1), |w| {
            for _ in 0..16_000 {
                w.write_sample(0i16).unwrap();
            }
        });
        let audio = read_wav(Cursor::new(bytes)).unwrap();
        assert_eq!(audio.len(), 16_000);
        assert_eq!(audio.sample_rate_hz(), 16_000);
        assert!(audio.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn full_scale_sample() {
        let bytes = wav_bytes(pcm16(1), |w| w.write_sample(32767i16).unwrap());
        let audio = read_wav(Cursor::new(bytes)).unwrap();
        assert_eq!(audio.samples(), &[32767.0 / 32768.0]);
    }

    #[test]
    fn first_channel_of_stereo() {
        let bytes = wav_bytes(pcm16(2), |w| {
            for i in 0..4i16 {
                w.write_sample(i * 100).unwrap();
                w.write_sample(-1000).unwrap();
            }
        });
        let audio = read_wav(Cursor::new(bytes)).unwrap();
        let expect: Vec<f32> = (0..4).map(|i| (i * 100) as f32 / 32768.0).collect();
        assert_eq!(audio.samples(), expect.as_slice());
    }

    #[test]
    fn sine_matches_direct_generation() {
        let amp = 0.5f64;
        let direct: Vec<i16> = (0..16_000)
            .map(|n| (amp * (2.0 * std::f64::consts::PI * 440.0 * n as f64 / 16_000.0).sin() * 32767.0).round() as i16)
            .collect();
        let bytes = wav_bytes(pcm16(1), |w| direct.iter().for_each(|&s| w.write_sample(s).unwrap()));
        let audio = read_wav(Cursor::new(bytes)).unwrap();
        assert_eq!(audio.len(), 16_000);
        for (got, &want) in audio.samples().iter().zip(&direct) {
            assert_eq!(*got, f32::from(want) / 32768.0);
        }
        let peak = audio.samples().iter().fold(0f32, |m, s| m.max(s.abs()));
        assert!((f64::from(peak) - amp).abs() < 1e-3, "peak {peak}");
    }

    #[test]
    fn float_samples_are_unsupported() {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        };
        let bytes = wav_bytes(spec, |w| w.write_sample(0.25f32).unwrap());
        assert!(matches!(read_wav(Cursor::new(bytes)), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn eight_bit_is_unsupported() {
        let spec = hound::WavSpec {
            bits_per_sample: 8,
            ..pcm16(1)
        };
        let bytes = wav_bytes(spec, |w| w.write_sample(3i8).unwrap());
        assert!(matches!(read_wav(Cursor::new(bytes)), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn garbage_header_is_format_error() {
        let bytes = b"RIFX\x00\x00\x00\x00WAVEjunkjunkjunk".to_vec();
        assert!(matches!(read_wav(Cursor::new(bytes)), Err(Error::Format(_))));
    }
}
