//! Layered configuration: flags, then `RCM_*` environment variables, then
//! the TOML file, then defaults.
//!
//! ```toml
//! [limits]
//! max_space = 65536
//! max_depth = 10000
//! max_steps = 1000000
//!
//! [backend]
//! base_url = "http://localhost:8000/v1"
//! model = "my-model"
//! api_key_env = "OPENAI_API_KEY"
//! timeout_secs = 120
//! max_tokens = 2048
//! retries = 3
//! requests_per_second = 2.0
//!
//! [bench]
//! workers = 4
//! per_band = 100
//! seed = 7
//! min_vars = 5
//! max_vars = 12
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use rcm_backend::BackendConfig;
use rcm_core::runtime::Limits;
use serde::Deserialize;

use crate::CliError;

pub const CONFIG_ENV: &str = "RCM_CONFIG";

#[derive(Deserialize, Default, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsLayer {
    pub max_space: Option<usize>,
    pub max_depth: Option<usize>,
    pub max_steps: Option<u64>,
}

#[derive(Deserialize, Default, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BackendLayer {
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub api_key_env: Option<String>,
    pub timeout_secs: Option<u64>,
    pub max_tokens: Option<u32>,
    pub retries: Option<u32>,
    pub requests_per_second: Option<f64>,
}

#[derive(Deserialize, Default, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BenchLayer {
    pub workers: Option<usize>,
    pub per_band: Option<usize>,
    pub seed: Option<u64>,
    pub min_vars: Option<usize>,
    pub max_vars: Option<usize>,
}

/// One source of settings; unset fields fall through to the next layer.
#[derive(Deserialize, Default, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Layer {
    pub limits: LimitsLayer,
    pub backend: BackendLayer,
    pub bench: BenchLayer,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr; $($f:ident),*) => {
        $( if $hi.$f.is_none() { $hi.$f = $lo.$f.clone(); } )*
    };
}

impl Layer {
    /// Fills fields unset in `self` from `lower`.
    pub fn over(mut self, lower: &Layer) -> Layer {
        overlay!(self.limits, lower.limits; max_space, max_depth, max_steps);
        overlay!(self.backend, lower.backend;
            base_url, model, api_key_env, timeout_secs, max_tokens, retries, requests_per_second);
        overlay!(self.bench, lower.bench; workers, per_band, seed, min_vars, max_vars);
        self
    }

    pub fn from_toml(src: &str) -> Result<Layer, CliError> {
        toml::from_str(src).map_err(|e| CliError::usage(format!("config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Layer, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("reading config {}: {e}", path.display())))?;
        Layer::from_toml(&src)
    }

    /// Reads `RCM_*` variables through `env`.
    pub fn from_env(env: &dyn Fn(&str) -> Option<String>) -> Result<Layer, CliError> {
        fn get<T: FromStr>(env: &dyn Fn(&str) -> Option<String>, key: &str) -> Result<Option<T>, CliError> {
            match env(key) {
                None => Ok(None),
                Some(v) => v
                    .trim()
                    .parse()
                    .map(Some)
                    .map_err(|_| CliError::usage(format!("{key}: cannot parse {v:?}"))),
            }
        }
        Ok(Layer {
            limits: LimitsLayer {
                max_space: get(env, "RCM_MAX_SPACE")?,
                max_depth: get(env, "RCM_MAX_DEPTH")?,
                max_steps: get(env, "RCM_MAX_STEPS")?,
            },
            backend: BackendLayer {
                base_url: env("RCM_BASE_URL"),
                model: env("RCM_MODEL"),
                api_key_env: env("RCM_API_KEY_ENV"),
                timeout_secs: get(env, "RCM_TIMEOUT_SECS")?,
                max_tokens: get(env, "RCM_MAX_TOKENS")?,
                retries: get(env, "RCM_RETRIES")?,
                requests_per_second: get(env, "RCM_REQUESTS_PER_SECOND")?,
            },
            bench: BenchLayer {
                workers: get(env, "RCM_WORKERS")?,
                per_band: get(env, "RCM_PER_BAND")?,
                seed: get(env, "RCM_SEED")?,
                min_vars: get(env, "RCM_MIN_VARS")?,
                max_vars: get(env, "RCM_MAX_VARS")?,
            },
        })
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub limits: Limits,
    pub backend: BackendLayer,
    pub workers: usize,
    pub per_band: usize,
    pub seed: u64,
    pub vars: std::ops::RangeInclusive<usize>,
}

impl Settings {
    /// Merges `flags` over the environment over the config file. The file
    /// comes from `config` or else `RCM_CONFIG`.
    pub fn resolve(
        flags: Layer,
        config: Option<PathBuf>,
        env: &dyn Fn(&str) -> Option<String>,
    ) -> Result<Settings, CliError> {
        let file = match config.or_else(|| env(CONFIG_ENV).map(PathBuf::from)) {
            Some(p) => Layer::from_file(&p)?,
            None => Layer::default(),
        };
        let merged = flags.over(&Layer::from_env(env)?).over(&file);
        let d = Limits::default();
        let l = &merged.limits;
        let limits = Limits::new(
            l.max_space.unwrap_or(d.max_local_space()),
            l.max_depth.unwrap_or(d.max_depth()),
            l.max_steps.unwrap_or(d.max_steps()),
        )
        .map_err(|e| CliError::usage(e.to_string()))?;
        let b = &merged.bench;
        let (lo, hi) = (b.min_vars.unwrap_or(5), b.max_vars.unwrap_or(12));
        if lo < 3 || lo > hi {
            return Err(CliError::usage(format!("variable range {lo}..={hi} must be non-empty and start at 3 or more")));
        }
        let workers = b.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(CliError::usage("workers must be positive"));
        }
        Ok(Settings {
            limits,
            backend: merged.backend,
            workers,
            per_band: b.per_band.unwrap_or(100),
            seed: b.seed.unwrap_or(7),
            vars: lo..=hi,
        })
    }

    pub fn backend_config(&self) -> Result<BackendConfig, CliError> {
        let b = &self.backend;
        let (Some(url), Some(model)) = (&b.base_url, &b.model) else {
            return Err(CliError::usage("the backend needs a base URL and a model (--base-url/--model, RCM_BASE_URL/RCM_MODEL or [backend] in the config)"));
        };
        let mut cfg = BackendConfig::new(url.clone(), model.clone());
        if let Some(k) = &b.api_key_env {
            cfg.api_key_env = Some(k.clone());
        }
        if let Some(t) = b.timeout_secs {
            cfg.timeout = Duration::from_secs(t);
        }
        if let Some(m) = b.max_tokens {
            cfg.max_tokens = m;
        }
        if let Some(r) = b.retries {
            cfg.retry.max_retries = r;
        }
        cfg.requests_per_second = b.requests_per_second;
        cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(cfg)
    }
}
