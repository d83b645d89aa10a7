use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Linkage {
    Single,
    Complete,
    Average,
}

/// Tunables for segmentation, summarization and clustering. The JSON form
/// is also the CLI config file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Entities wider than this many words are dropped.
    pub m_max_span_words: usize,
    /// Entities with fewer mentions than this are dropped.
    pub p_min_mentions: usize,
    /// Entities whose mentions are all stop tokens are dropped.
    pub stop_tokens: Vec<String>,
    pub naive_segment_len: usize,
    /// Merged summaries with this many words or fewer are discarded.
    pub stem_cutoff_words: usize,
    pub summarizer_max_input_words: usize,
    pub compression_ratio: f64,
    pub cluster_linkage: Linkage,
    pub cluster_distance_threshold: f64,
    pub summarizer_passes: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            m_max_span_words: 100,
            p_min_mentions: 3,
            stop_tokens: vec!["I".into(), "me".into()],
            naive_segment_len: 60,
            stem_cutoff_words: 5,
            summarizer_max_input_words: 60,
            compression_ratio: 0.5,
            cluster_linkage: Linkage::Average,
            cluster_distance_threshold: 0.4,
            summarizer_passes: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts = [
            ("m_max_span_words", self.m_max_span_words),
            ("p_min_mentions", self.p_min_mentions),
            ("naive_segment_len", self.naive_segment_len),
            ("stem_cutoff_words", self.stem_cutoff_words),
            ("summarizer_max_input_words", self.summarizer_max_input_words),
            ("summarizer_passes", self.summarizer_passes),
        ];
        for (field, value) in counts {
            if value == 0 {
                return Err(ConfigError::new(field, "must be positive"));
            }
        }
        let r = self.compression_ratio;
        if !(r > 0.0 && r <= 1.0) {
            return Err(ConfigError::new("compression_ratio", format!("{r} not in (0, 1]")));
        }
        let d = self.cluster_distance_threshold;
        if !(d > 0.0 && d < 2.0) {
            return Err(ConfigError::new(
                "cluster_distance_threshold",
                format!("{d} not in (0, 2)"),
            ));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig =
            serde_json::from_str(json).map_err(|e| ConfigError::new("<json>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
