//! JSONL streaming, global configuration and dataset assembly.

mod config;
mod dataset;
mod jsonl;

pub use config::{
    AdvantageSection, ConfigLoadError, EndpointSection, GlobalConfig, RepetitionSection, RewardOverrides, RewardSection,
    CorpusSection, sim_preset, SIM_PRESET_NAMES,
};
pub use dataset::{build_rl_promptset, DatasetRecord, PromptsetFilter, PromptsetMode, PromptsetSummary};
pub use jsonl::{read_jsonl, stream_jsonl, write_jsonl, write_record, JsonlError, JsonlLines, JsonlRead, MalformedLine};
