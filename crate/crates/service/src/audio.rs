//! Time-range slices of stored audio files.
//!
//! WAV files are cut on frame boundaries and returned with a rewritten
//! header so the slice plays on its own. Other containers cannot be cut
//! without decoding, so they get the proportional byte range instead.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("{0}")]
    OutOfBounds(String),
    #[error("{0}")]
    Unreadable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioSlice {
    pub content_type: &'static str,
    pub bytes: Vec<u8>,
    /// Times actually covered, after snapping to frames or bytes.
    pub start_s: f64,
    pub end_s: f64,
}

/// Location of PCM data inside a RIFF/WAVE file.
#[derive(Debug, Clone, PartialEq)]
pub struct WavLayout {
    pub fmt_chunk: Vec<u8>,
    pub sample_rate: u32,
    pub block_align: u16,
    pub data_offset: usize,
    pub data_len: usize,
}

impl WavLayout {
    pub fn parse(bytes: &[u8]) -> Option<Self> {
        if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
            return None;
        }
        let u32_at = |i: usize| bytes.get(i..i + 4).map(|b| u32::from_le_bytes(b.try_into().unwrap()));
        let mut fmt = None;
        let mut pos = 12;
        while pos + 8 <= bytes.len() {
            let id = &bytes[pos..pos + 4];
            let len = u32_at(pos + 4)? as usize;
            let body = pos + 8;
            match id {
                b"fmt " => fmt = Some(bytes.get(body..body + len)?.to_vec()),
                b"data" => {
                    let fmt_chunk = fmt?;
                    if fmt_chunk.len() < 16 {
                        return None;
                    }
                    let sample_rate = u32::from_le_bytes(fmt_chunk[4..8].try_into().unwrap());
                    let block_align = u16::from_le_bytes(fmt_chunk[12..14].try_into().unwrap());
                    if sample_rate == 0 || block_align == 0 {
                        return None;
                    }
                    // tolerate writers that leave the data length unfinalized
                    let data_len = len.min(bytes.len() - body);
                    let data_len = data_len - data_len % block_align as usize;
                    return Some(Self { fmt_chunk, sample_rate, block_align, data_offset: body, data_len });
                }
                _ => {}
            }
            pos = body + len + (len & 1);
        }
        None
    }

    pub fn frames(&self) -> usize {
        self.data_len / self.block_align as usize
    }

    pub fn duration_s(&self) -> f64 {
        self.frames() as f64 / self.sample_rate as f64
    }
}

pub fn content_type(path: &Path) -> &'static str {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "wav" => "audio/wav",
        "mp3" => "audio/mpeg",
        "ogg" | "oga" | "opus" => "audio/ogg",
        "flac" => "audio/flac",
        "m4a" | "mp4" | "aac" => "audio/mp4",
        "webm" => "audio/webm",
        _ => "application/octet-stream",
    }
}

fn check_range(start_s: f64, end_s: f64, duration: f64) -> Result<(), AudioError> {
    // timings are rounded in transcripts; allow a millisecond of slack
    if !(start_s >= 0.0 && start_s < end_s && end_s <= duration + 1e-3) {
        return Err(AudioError::OutOfBounds(format!(
            "[{start_s}, {end_s}] not within [0, {duration}]"
        )));
    }
    Ok(())
}

/// Slices `bytes`. `fallback_duration_s` gives the length of non-WAV audio.
pub fn slice(
    bytes: &[u8],
    content_type: &'static str,
    start_s: f64,
    end_s: f64,
    fallback_duration_s: Option<f64>,
) -> Result<AudioSlice, AudioError> {
    if let Some(wav) = WavLayout::parse(bytes) {
        let duration = wav.duration_s();
        check_range(start_s, end_s, duration)?;
        if start_s == 0.0 && end_s >= duration {
            return Ok(AudioSlice { content_type: "audio/wav", bytes: bytes.to_vec(), start_s, end_s: duration });
        }
        let rate = wav.sample_rate as f64;
        let first = ((start_s * rate).floor() as usize).min(wav.frames());
        let last = ((end_s * rate).ceil() as usize).min(wav.frames());
        let align = wav.block_align as usize;
        let data = &bytes[wav.data_offset + first * align..wav.data_offset + last * align];
        let mut out = Vec::with_capacity(20 + wav.fmt_chunk.len() + 8 + data.len());
        let fmt_len = wav.fmt_chunk.len() + (wav.fmt_chunk.len() & 1);
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&((4 + 8 + fmt_len + 8 + data.len()) as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&(wav.fmt_chunk.len() as u32).to_le_bytes());
        out.extend_from_slice(&wav.fmt_chunk);
        if wav.fmt_chunk.len() % 2 == 1 {
            out.push(0);
        }
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        return Ok(AudioSlice {
            content_type: "audio/wav",
            bytes: out,
            start_s: first as f64 / rate,
            end_s: last as f64 / rate,
        });
    }

    let duration = fallback_duration_s
        .filter(|d| *d > 0.0)
        .ok_or_else(|| AudioError::Unreadable("audio length unknown".to_string()))?;
    check_range(start_s, end_s, duration)?;
    let n = bytes.len();
    let from = ((start_s / duration) * n as f64).floor() as usize;
    let to = (((end_s / duration) * n as f64).ceil() as usize).min(n);
    Ok(AudioSlice { content_type, bytes: bytes[from.min(to)..to].to_vec(), start_s, end_s })
}
