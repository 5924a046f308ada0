//! A next-block generator backed by an OpenAI-compatible chat completions
//! endpoint.
//!
//! Each step sends the active frame wrapped in the instruction template as a
//! single user message, with the frame's prior reasoning as an assistant
//! prefill. The reply is cut at the first closing marker, which is kept so
//! the runtime can classify the block.

mod client;
mod config;
mod generator;
mod limiter;
pub mod mock;
mod stop;

pub use client::{BackendError, Client, Completion};
pub use config::{BackendConfig, ConfigError, RetryPolicy};
pub use generator::LlmGenerator;
pub use limiter::RateLimiter;
pub use rcm_core::template::{build_prompt, INSTRUCTIONS};
pub use stop::truncate_at_stop;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/backend.md")]
mod book {}
