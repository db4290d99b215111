//! WAV input and output.
//!
//! Reading is done by a small RIFF parser so that 64-bit float files and
//! `WAVE_FORMAT_EXTENSIBLE` headers are accepted alongside plain PCM.
//! Writing goes through `hound`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// A mono clip at its native sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_path: Option<String>,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
            source_path: None,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Whole seconds contained in the clip; a trailing partial second is not counted.
    pub fn whole_seconds(&self) -> usize {
        self.samples.len() / self.sample_rate as usize
    }

    /// Copy of the clip with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
            source_path: self.source_path.clone(),
        }
    }

    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            sample_rate: self.sample_rate,
            source_path: self.source_path.clone(),
        }
    }
}

/// Sample encoding used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFormat {
    Pcm16,
    Float32,
}

impl FromStr for SampleFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pcm16" => Ok(SampleFormat::Pcm16),
            "float32" => Ok(SampleFormat::Float32),
            other => Err(Error::InvalidParameter(format!(
                "unknown sample format `{other}` (expected pcm16 or float32)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

/// Reads a WAV file, downmixing to mono and normalizing integer PCM by `2^(bits-1)`.
pub fn read_audio(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut clip = decode_wav(&bytes, path)?;
    clip.source_path = Some(path.display().to_string());
    Ok(clip)
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedWav {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn unsupported(path: &Path, reason: impl Into<String>) -> Error {
    Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

pub(crate) fn decode_wav(bytes: &[u8], path: &Path) -> Result<AudioClip> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(malformed(path, "missing RIFF/WAVE header"));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let declared = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        // Streaming writers sometimes leave the size as 0 or u32::MAX.
        let body_end = body_start.saturating_add(declared).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(malformed(path, "fmt chunk too short"));
                }
                let mut tag = u16_at(body, 0);
                if tag == FORMAT_EXTENSIBLE {
                    if body.len() < 26 {
                        return Err(malformed(path, "extensible fmt chunk too short"));
                    }
                    // First two bytes of the sub-format GUID carry the real tag.
                    tag = u16_at(body, 24);
                }
                fmt = Some(FmtChunk {
                    tag,
                    channels: u16_at(body, 2),
                    sample_rate: u32_at(body, 4),
                    bits: u16_at(body, 14),
                });
            }
            b"data" => {
                data = Some(body);
                if fmt.is_some() {
                    break;
                }
            }
            _ => {}
        }
        pos = body_start.saturating_add(declared + (declared & 1));
    }

    let fmt = fmt.ok_or_else(|| malformed(path, "no fmt chunk"))?;
    let data = data.ok_or_else(|| malformed(path, "no data chunk"))?;
    if fmt.channels == 0 {
        return Err(malformed(path, "zero channels"));
    }
    if fmt.sample_rate == 0 {
        return Err(malformed(path, "zero sample rate"));
    }

    let decode: fn(&[u8]) -> f64 = match (fmt.tag, fmt.bits) {
        (FORMAT_PCM, 8) => |b| (b[0] as f64 - 128.0) / 128.0,
        (FORMAT_PCM, 16) => |b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
        (FORMAT_PCM, 24) => {
            |b| (i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8) as f64 / 8_388_608.0
        }
        (FORMAT_PCM, 32) => {
            |b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64 / 2_147_483_648.0
        }
        (FORMAT_FLOAT, 32) => |b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
        (FORMAT_FLOAT, 64) => {
            |b| f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]])
        }
        (tag, bits) => {
            return Err(unsupported(
                path,
                format!("format tag {tag} with {bits} bits per sample"),
            ))
        }
    };

    let width = fmt.bits as usize / 8;
    let channels = fmt.channels as usize;
    let frame_bytes = width * channels;
    let frames = data.len() / frame_bytes;
    if frames == 0 {
        return Err(Error::EmptyAudio {
            path: path.to_path_buf(),
        });
    }

    let samples = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            if channels == 1 {
                decode(frame)
            } else {
                let sum: f64 = frame.chunks_exact(width).map(decode).sum();
                sum / channels as f64
            }
        })
        .collect();

    Ok(AudioClip {
        samples,
        sample_rate: fmt.sample_rate,
        source_path: None,
    })
}

/// Writes a mono WAV. `Pcm16` clamps to [-1, 1] and rounds to the nearest level.
pub fn write_audio(clip: &AudioClip, path: impl AsRef<Path>, format: SampleFormat) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: match format {
            SampleFormat::Pcm16 => 16,
            SampleFormat::Float32 => 32,
        },
        sample_format: match format {
            SampleFormat::Pcm16 => hound::SampleFormat::Int,
            SampleFormat::Float32 => hound::SampleFormat::Float,
        },
    };
    let wav_err = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::WavWrite {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    };

    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    match format {
        SampleFormat::Pcm16 => {
            for &s in &clip.samples {
                writer.write_sample(quantize_pcm16(s)).map_err(wav_err)?;
            }
        }
        SampleFormat::Float32 => {
            for &s in &clip.samples {
                writer.write_sample(s as f32).map_err(wav_err)?;
            }
        }
    }
    writer.finalize().map_err(wav_err)
}

fn quantize_pcm16(sample: f64) -> i16 {
    let clamped = if sample.is_nan() { 0.0 } else { sample.clamp(-1.0, 1.0) };
    (clamped * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}
