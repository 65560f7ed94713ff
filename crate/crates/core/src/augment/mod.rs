//! Seeded augmentation planning and a small PCM executor.
//!
//! Each utterance gets an [`AugmentationPlan`] drawn from a generator keyed by
//! `(seed, utterance_id)`:
//!
//! * with probability 0.01 the sample becomes pure noise with an empty target,
//!   and nothing else applies;
//! * otherwise, with probability 0.5, a noise burst is attached at the start
//!   or end of the audio, keeping the transcription;
//! * independently, with probability 0.25, either a 0.85x to 1.15x speed
//!   change or SpecAugment masking (planned here, executed by the trainer).

mod audio;

pub use audio::{mix_noise_at_edge, read_wav, rms, time_stretch, write_wav, EdgePosition, PcmBuffer};

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error("noise pool is empty but the plan for {utterance_id} needs a noise sample")]
    EmptyNoisePool { utterance_id: String },
    #[error("noise {0:?} not found")]
    NoiseNotFound(String),
    #[error("sample rate mismatch: speech {speech} Hz, noise {noise} Hz")]
    SampleRateMismatch { speech: u32, noise: u32 },
    #[error("stretch factor {0} outside [0.5, 2.0]")]
    InvalidFactor(f64),
    #[error("invalid audio: {0}")]
    InvalidAudio(String),
    #[error("invalid augmentation config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {message}")]
    Wav { path: String, message: String },
    #[error("{path}: unsupported WAV: {message}")]
    UnsupportedWav { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecAugmentMasks {
    pub freq_masks: u32,
    /// Maximum width of each frequency mask, in bins.
    pub freq_width: u32,
    pub time_masks: u32,
    /// Maximum width of each time mask, in frames.
    pub time_width: u32,
}

impl Default for SpecAugmentMasks {
    fn default() -> Self {
        SpecAugmentMasks {
            freq_masks: 2,
            freq_width: 27,
            time_masks: 2,
            time_width: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    /// Noise identifiers resolved by a [`NoiseLoader`].
    pub noise_pool: Vec<String>,
    pub p_pure_noise: f64,
    pub p_edge_noise: f64,
    pub p_tempo: f64,
    pub edge_duration_s: [f64; 2],
    pub snr_db: [f64; 2],
    pub stretch_range: [f64; 2],
    pub spec_augment: SpecAugmentMasks,
    /// Noise level used when the speech itself is silent.
    pub silent_speech_rms: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            noise_pool: Vec::new(),
            p_pure_noise: 0.01,
            p_edge_noise: 0.5,
            p_tempo: 0.25,
            edge_duration_s: [0.5, 2.0],
            snr_db: [5.0, 20.0],
            stretch_range: [0.85, 1.15],
            spec_augment: SpecAugmentMasks::default(),
            silent_speech_rms: 0.01,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        for (name, p) in [
            ("p_pure_noise", self.p_pure_noise),
            ("p_edge_noise", self.p_edge_noise),
            ("p_tempo", self.p_tempo),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AugmentError::InvalidConfig(format!("{name} = {p} is not a probability")));
            }
        }
        for (name, [lo, hi]) in [
            ("edge_duration_s", self.edge_duration_s),
            ("snr_db", self.snr_db),
            ("stretch_range", self.stretch_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(AugmentError::InvalidConfig(format!(
                    "{name} = [{lo}, {hi}] is not a valid range"
                )));
            }
        }
        if self.edge_duration_s[0] < 0.0 {
            return Err(AugmentError::InvalidConfig("edge_duration_s must be non-negative".into()));
        }
        let [lo, hi] = self.stretch_range;
        if lo < 0.5 || hi > 2.0 {
            return Err(AugmentError::InvalidConfig(format!(
                "stretch_range [{lo}, {hi}] exceeds [0.5, 2.0]"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeNoise {
    pub position: EdgePosition,
    pub noise_id: String,
    pub duration_s: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TempoKind {
    Stretch,
    SpecAugment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tempo {
    pub kind: TempoKind,
    /// Present for `stretch`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    /// Present for `spec_augment`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<SpecAugmentMasks>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub utterance_id: String,
    pub seed: u64,
    pub edge_noise: Option<EdgeNoise>,
    /// When set, the audio is replaced by noise and the target becomes empty.
    pub pure_noise: bool,
    /// Noise sample used for a pure-noise plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure_noise_id: Option<String>,
    pub tempo: Option<Tempo>,
}

impl AugmentationPlan {
    pub fn is_identity(&self) -> bool {
        !self.pure_noise && self.edge_noise.is_none() && self.tempo.is_none()
    }

    pub fn stretch_factor(&self) -> Option<f64> {
        self.tempo.as_ref().and_then(|t| t.factor)
    }
}

fn plan_rng(seed: u64, utterance_id: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(utterance_id.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn pick_noise(rng: &mut ChaCha8Rng, pool: &[String], utterance_id: &str) -> Result<String, AugmentError> {
    if pool.is_empty() {
        return Err(AugmentError::EmptyNoisePool {
            utterance_id: utterance_id.to_string(),
        });
    }
    Ok(pool[rng.random_range(0..pool.len())].clone())
}

/// Draws the augmentation decisions for one utterance. The result depends
/// only on `(seed, utterance_id, config)`.
pub fn plan_augmentation(seed: u64, utterance_id: &str, config: &AugmentConfig) -> Result<AugmentationPlan, AugmentError> {
    config.validate()?;
    let mut rng = plan_rng(seed, utterance_id);
    let mut plan = AugmentationPlan {
        utterance_id: utterance_id.to_string(),
        seed,
        edge_noise: None,
        pure_noise: false,
        pure_noise_id: None,
        tempo: None,
    };

    if rng.random::<f64>() < config.p_pure_noise {
        plan.pure_noise = true;
        plan.pure_noise_id = Some(pick_noise(&mut rng, &config.noise_pool, utterance_id)?);
        return Ok(plan);
    }

    if rng.random::<f64>() < config.p_edge_noise {
        let position = if rng.random_bool(0.5) {
            EdgePosition::Begin
        } else {
            EdgePosition::End
        };
        let noise_id = pick_noise(&mut rng, &config.noise_pool, utterance_id)?;
        plan.edge_noise = Some(EdgeNoise {
            position,
            noise_id,
            duration_s: uniform(&mut rng, config.edge_duration_s),
            snr_db: uniform(&mut rng, config.snr_db),
        });
    }

    if rng.random::<f64>() < config.p_tempo {
        plan.tempo = Some(if rng.random_bool(0.5) {
            Tempo {
                kind: TempoKind::Stretch,
                factor: Some(uniform(&mut rng, config.stretch_range)),
                masks: None,
            }
        } else {
            Tempo {
                kind: TempoKind::SpecAugment,
                factor: None,
                masks: Some(config.spec_augment),
            }
        });
    }
    Ok(plan)
}

/// Resolves noise identifiers to audio. Must tolerate concurrent calls.
pub trait NoiseLoader: Send + Sync {
    fn load(&self, noise_id: &str) -> Result<PcmBuffer, AugmentError>;
}

/// Noise files in a directory; `id` maps to `<dir>/<id>.wav`.
#[derive(Debug, Clone)]
pub struct DirNoiseLoader {
    dir: PathBuf,
}

impl DirNoiseLoader {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DirNoiseLoader { dir: dir.into() }
    }

    /// Sorted identifiers of the `.wav` files in the directory.
    pub fn list_ids(&self) -> std::io::Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    fn path_for(&self, noise_id: &str) -> PathBuf {
        self.dir.join(format!("{noise_id}.wav"))
    }
}

impl NoiseLoader for DirNoiseLoader {
    fn load(&self, noise_id: &str) -> Result<PcmBuffer, AugmentError> {
        let path = self.path_for(noise_id);
        if !path.is_file() || Path::new(noise_id).components().count() != 1 {
            return Err(AugmentError::NoiseNotFound(noise_id.to_string()));
        }
        read_wav(&path)
    }
}

/// In-memory noise pool.
#[derive(Debug, Clone, Default)]
pub struct MemoryNoiseLoader {
    pub buffers: HashMap<String, PcmBuffer>,
}

impl NoiseLoader for MemoryNoiseLoader {
    fn load(&self, noise_id: &str) -> Result<PcmBuffer, AugmentError> {
        self.buffers
            .get(noise_id)
            .cloned()
            .ok_or_else(|| AugmentError::NoiseNotFound(noise_id.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetTransform {
    Keep,
    MakeEmpty,
}

/// Executes a plan on one utterance.
///
/// Pure noise replaces the audio with the noise sample looped or trimmed to
/// the speech length. Otherwise edge noise is attached first and the stretch
/// applied to the result; SpecAugment entries are left for the trainer.
pub fn apply_plan(
    speech: &PcmBuffer,
    plan: &AugmentationPlan,
    loader: &dyn NoiseLoader,
    config: &AugmentConfig,
) -> Result<(PcmBuffer, TargetTransform), AugmentError> {
    if plan.pure_noise {
        let id = plan
            .pure_noise_id
            .as_deref()
            .ok_or_else(|| AugmentError::NoiseNotFound(String::new()))?;
        let noise = loader.load(id)?;
        if noise.sample_rate_hz() != speech.sample_rate_hz() {
            return Err(AugmentError::SampleRateMismatch {
                speech: speech.sample_rate_hz(),
                noise: noise.sample_rate_hz(),
            });
        }
        return Ok((noise.looped_to(speech.len())?, TargetTransform::MakeEmpty));
    }

    let mut audio = match &plan.edge_noise {
        Some(edge) => {
            let noise = loader.load(&edge.noise_id)?;
            mix_noise_at_edge(
                speech,
                &noise,
                edge.position,
                edge.duration_s,
                edge.snr_db,
                config.silent_speech_rms,
            )?
        }
        None => speech.clone(),
    };
    if let Some(factor) = plan.stretch_factor() {
        audio = time_stretch(&audio, factor)?;
    }
    Ok((audio, TargetTransform::Keep))
}
