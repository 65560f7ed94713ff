use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AugmentError;

/// Mono PCM audio with samples nominally in `[-1, 1]`.
///
/// Intermediate results may exceed that range (a loud noise burst at low
/// SNR); samples are clamped when written to 16-bit WAV.
#[derive(Debug, Clone, PartialEq)]
pub struct PcmBuffer {
    samples: Vec<f32>,
    sample_rate_hz: u32,
}

impl PcmBuffer {
    pub fn new(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self, AugmentError> {
        if sample_rate_hz == 0 {
            return Err(AugmentError::InvalidAudio("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(AugmentError::InvalidAudio(format!("sample {i} is not finite")));
        }
        Ok(PcmBuffer { samples, sample_rate_hz })
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

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    /// Repeats or truncates the buffer to exactly `len` samples.
    pub fn looped_to(&self, len: usize) -> Result<PcmBuffer, AugmentError> {
        if self.samples.is_empty() && len > 0 {
            return Err(AugmentError::InvalidAudio("cannot loop an empty buffer".into()));
        }
        Ok(PcmBuffer {
            samples: self.samples.iter().copied().cycle().take(len).collect(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }
}

pub fn rms(samples: &[f32]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let energy: f64 = samples.iter().map(|&s| f64::from(s) * f64::from(s)).sum();
    (energy / samples.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgePosition {
    Begin,
    End,
}

/// Attaches `duration_s` of noise before or after the speech.
///
/// The noise (looped if too short) is scaled so that
/// `20 * log10(rms(speech) / rms(noise)) == snr_db`. Silent speech has no
/// reference level, so the noise is scaled to `silent_speech_rms` instead.
/// Speech samples are copied through untouched.
pub fn mix_noise_at_edge(
    speech: &PcmBuffer,
    noise: &PcmBuffer,
    position: EdgePosition,
    duration_s: f64,
    snr_db: f64,
    silent_speech_rms: f64,
) -> Result<PcmBuffer, AugmentError> {
    if speech.sample_rate_hz != noise.sample_rate_hz {
        return Err(AugmentError::SampleRateMismatch {
            speech: speech.sample_rate_hz,
            noise: noise.sample_rate_hz,
        });
    }
    if !duration_s.is_finite() || duration_s < 0.0 {
        return Err(AugmentError::InvalidAudio(format!("invalid noise duration {duration_s}")));
    }
    let noise_len = (duration_s * f64::from(speech.sample_rate_hz)).round() as usize;
    if noise_len == 0 {
        return Ok(speech.clone());
    }

    let segment = noise.looped_to(noise_len)?;
    let noise_rms = segment.rms();
    let speech_rms = speech.rms();
    let target_rms = if speech_rms > 0.0 {
        speech_rms / 10f64.powf(snr_db / 20.0)
    } else {
        silent_speech_rms
    };
    let gain = if noise_rms > 0.0 { target_rms / noise_rms } else { 0.0 };
    let scaled = segment.samples.iter().map(|&s| (f64::from(s) * gain) as f32);

    let mut samples = Vec::with_capacity(speech.len() + noise_len);
    match position {
        EdgePosition::Begin => {
            samples.extend(scaled);
            samples.extend_from_slice(&speech.samples);
        }
        EdgePosition::End => {
            samples.extend_from_slice(&speech.samples);
            samples.extend(scaled);
        }
    }
    Ok(PcmBuffer {
        samples,
        sample_rate_hz: speech.sample_rate_hz,
    })
}

/// Speed change by linear-interpolation resampling (pitch shifts with it).
///
/// `factor > 1` speeds up. The output has `round(len / factor)` samples and
/// sample `i` is read at source position `i * factor`.
pub fn time_stretch(speech: &PcmBuffer, factor: f64) -> Result<PcmBuffer, AugmentError> {
    if !(0.5..=2.0).contains(&factor) {
        return Err(AugmentError::InvalidFactor(factor));
    }
    if factor == 1.0 {
        return Ok(speech.clone());
    }
    let src = &speech.samples;
    let out_len = (src.len() as f64 / factor).round() as usize;
    let last = src.len().saturating_sub(1);
    let samples = (0..out_len)
        .map(|i| {
            let pos = i as f64 * factor;
            let i0 = (pos.floor() as usize).min(last);
            let i1 = (i0 + 1).min(last);
            let frac = pos - i0 as f64;
            let (a, b) = (f64::from(src[i0]), f64::from(src[i1]));
            (a + frac * (b - a)) as f32
        })
        .collect();
    Ok(PcmBuffer {
        samples,
        sample_rate_hz: speech.sample_rate_hz,
    })
}

/// Reads a mono 16-bit PCM WAV file.
pub fn read_wav(path: &Path) -> Result<PcmBuffer, AugmentError> {
    let wav_err = |e: hound::Error| AugmentError::Wav {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(AugmentError::UnsupportedWav {
            path: path.display().to_string(),
            message: format!("{} channels, only mono is supported", spec.channels),
        });
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(AugmentError::UnsupportedWav {
            path: path.display().to_string(),
            message: format!(
                "{}-bit {:?}, only 16-bit PCM is supported",
                spec.bits_per_sample, spec.sample_format
            ),
        });
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| f32::from(v) / 32768.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(wav_err)?;
    PcmBuffer::new(samples, spec.sample_rate)
}

/// Writes a mono 16-bit PCM WAV file, clamping samples to `[-1, 1]`.
pub fn write_wav(path: &Path, audio: &PcmBuffer) -> Result<(), AugmentError> {
    let wav_err = |e: hound::Error| AugmentError::Wav {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in &audio.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        writer.write_sample(v).map_err(wav_err)?;
    }
    writer.finalize().map_err(wav_err)
}
