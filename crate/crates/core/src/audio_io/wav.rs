use std::fs;
use std::io::Write;
use std::path::Path;

use super::{AudioClip, AudioError, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy)]
enum Encoding {
    Pcm16,
    Float32,
}

#[derive(Debug)]
struct Format {
    encoding: Encoding,
    channels: usize,
    sample_rate: u32,
}

fn read_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(AudioError::MalformedWav(format!("fmt chunk too short ({} bytes)", body.len())));
    }
    let mut tag = read_u16(body, 0);
    let channels = read_u16(body, 2) as usize;
    let sample_rate = read_u32(body, 4);
    let bits = read_u16(body, 14);
    if tag == FORMAT_EXTENSIBLE {
        if body.len() < 26 {
            return Err(AudioError::MalformedWav("truncated WAVE_FORMAT_EXTENSIBLE header".into()));
        }
        // Sub-format GUID starts at offset 24; its first two bytes carry the format tag.
        tag = read_u16(body, 24);
    }
    if channels == 0 {
        return Err(AudioError::MalformedWav("zero channels".into()));
    }
    if sample_rate == 0 {
        return Err(AudioError::MalformedWav("zero sample rate".into()));
    }
    let encoding = match (tag, bits) {
        (FORMAT_PCM, 16) => Encoding::Pcm16,
        (FORMAT_IEEE_FLOAT, 32) => Encoding::Float32,
        (tag, bits) => {
            return Err(AudioError::UnsupportedEncoding(format!(
                "format tag {tag:#06x} with {bits} bits per sample"
            )))
        }
    };
    Ok(Format {
        encoding,
        channels,
        sample_rate,
    })
}

/// Decodes an in-memory RIFF/WAVE file into a mono clip.
pub fn decode_wav(bytes: &[u8], source_path: &str) -> Result<AudioClip> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::MalformedWav("missing RIFF/WAVE magic".into()));
    }
    let mut format = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let start = pos + 8;
        let end = start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| {
                AudioError::MalformedWav(format!(
                    "chunk {:?} declares {size} bytes but only {} remain",
                    String::from_utf8_lossy(id),
                    bytes.len() - start
                ))
            })?;
        match id {
            b"fmt " => format = Some(parse_fmt(&bytes[start..end])?),
            b"data" => {
                data = Some(&bytes[start..end]);
                break;
            }
            _ => {}
        }
        // Chunks are word aligned.
        pos = end + (size & 1);
    }
    let format = format.ok_or_else(|| AudioError::MalformedWav("no fmt chunk before data".into()))?;
    let data = data.ok_or_else(|| AudioError::MalformedWav("no data chunk".into()))?;
    if data.is_empty() {
        return Err(AudioError::EmptyAudio);
    }

    let width = match format.encoding {
        Encoding::Pcm16 => 2,
        Encoding::Float32 => 4,
    };
    let block = width * format.channels;
    let n_frames = data.len() / block;
    if n_frames == 0 {
        return Err(AudioError::EmptyAudio);
    }
    let channels = format.channels as f64;
    let samples = data
        .chunks_exact(block)
        .map(|frame| {
            let sum: f64 = frame
                .chunks_exact(width)
                .map(|s| match format.encoding {
                    Encoding::Pcm16 => i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0,
                    Encoding::Float32 => f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64,
                })
                .sum();
            sum / channels
        })
        .collect();
    AudioClip::new(samples, format.sample_rate, source_path)
}

/// Reads and decodes a WAV file. Stereo and multi-channel audio is averaged to mono.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| AudioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_wav(&bytes, &path.to_string_lossy())
}

/// Writes a mono 16-bit PCM WAV. Samples are clamped to [-1, 1] and scaled by 32768.
pub fn write_wav_pcm16(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    let data_len = (samples.len() * 2) as u32;
    let mut buf = Vec::with_capacity(44 + samples.len() * 2);
    buf.extend_from_slice(b"RIFF");
    buf.extend_from_slice(&(36 + data_len).to_le_bytes());
    buf.extend_from_slice(b"WAVEfmt ");
    buf.extend_from_slice(&16u32.to_le_bytes());
    buf.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    buf.extend_from_slice(&1u16.to_le_bytes());
    buf.extend_from_slice(&sample_rate.to_le_bytes());
    buf.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    buf.extend_from_slice(&2u16.to_le_bytes());
    buf.extend_from_slice(&16u16.to_le_bytes());
    buf.extend_from_slice(b"data");
    buf.extend_from_slice(&data_len.to_le_bytes());
    for &s in samples {
        let q = (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        buf.extend_from_slice(&q.to_le_bytes());
    }
    let io_err = |source| AudioError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(&buf).map_err(io_err)
}
