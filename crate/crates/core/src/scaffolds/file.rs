//! TOML description of a text scaffold system.
//!
//! ```toml
//! [[generator]]
//! name = "f_p"
//! kind = "table"            # table | identity | keep_suffix | majority | overwrite | leftmost
//! default = "p0"            # table only, optional
//! [generator.entries]
//! "lemma[SEP]s1" = "p1"
//!
//! [[scaffold]]
//! name = "prover"
//! program = "prover"        # identity | self_call | recursive_model | summarize | diffusion | prover | verifier
//! generator = "f_p"
//! verifier = "verifier"
//! seeds = ["s1", "s2"]
//! ```
//!
//! Queries, answers and sequences are text with the usual marker spellings
//! (`[SEP]`, `<call>` ...). Generators and scaffolds are referred to by name.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::generators::{IdentityGenerator, KeepSuffix, LeftmostTransition, MajorityDenoiser, OverwriteTransition, Table};
use super::programs::{DiffusionLoop, Identity, Prover, RecursiveModel, SelfCall, SummarizationLoop, Verifier};
use super::{NamedGenerator, Scaffold, ScaffoldSystem, SystemError};
use crate::runtime::AnswerFormat;
use crate::token::text::{self, TextToken};

#[derive(Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, rename = "generator")]
    pub generators: Vec<GeneratorSpec>,
    #[serde(default, rename = "scaffold")]
    pub scaffolds: Vec<ScaffoldSpec>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub kind: String,
    #[serde(default)]
    pub entries: BTreeMap<String, String>,
    pub default: Option<String>,
    pub n: Option<usize>,
    pub mask: Option<String>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct ScaffoldSpec {
    pub name: String,
    pub program: String,
    pub generator: Option<String>,
    pub target: Option<String>,
    #[serde(default)]
    pub preserve: bool,
    pub loop_detection: Option<bool>,
    pub summarizer: Option<String>,
    pub max_len: Option<usize>,
    pub stop: Option<String>,
    pub denoiser: Option<String>,
    pub transition: Option<String>,
    pub mask: Option<String>,
    pub verifier: Option<String>,
    pub prover: Option<String>,
    #[serde(default)]
    pub seeds: Vec<String>,
}

#[derive(Debug, Error)]
pub enum SystemFileError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SystemFileError> {
    Err(SystemFileError::Invalid(msg.into()))
}

fn mask_token(owner: &str, mask: Option<&str>) -> Result<TextToken, SystemFileError> {
    let Some(m) = mask else {
        return invalid(format!("{owner}: missing `mask`"));
    };
    match text::tokenize(m).as_slice() {
        [t] => Ok(t.clone()),
        _ => invalid(format!("{owner}: `mask` must be a single token")),
    }
}

fn build_generator(spec: &GeneratorSpec) -> Result<NamedGenerator<'static, char>, SystemFileError> {
    let name = &spec.name;
    let generator: Box<dyn crate::runtime::Generator<char>> = match spec.kind.as_str() {
        "table" => {
            let mut t = Table::new();
            for (q, a) in &spec.entries {
                t.insert(q, a);
            }
            if let Some(d) = &spec.default {
                t = t.with_default(d);
            }
            Box::new(t)
        }
        "identity" => Box::new(IdentityGenerator),
        "keep_suffix" => match spec.n {
            Some(n) => Box::new(KeepSuffix(n)),
            None => return invalid(format!("generator {name}: keep_suffix needs `n`")),
        },
        "majority" => Box::new(MajorityDenoiser {
            mask: mask_token(name, spec.mask.as_deref())?,
        }),
        "overwrite" => Box::new(OverwriteTransition {
            mask: mask_token(name, spec.mask.as_deref())?,
        }),
        "leftmost" => Box::new(LeftmostTransition {
            mask: mask_token(name, spec.mask.as_deref())?,
        }),
        other => return invalid(format!("generator {name}: unknown kind {other:?}")),
    };
    Ok(NamedGenerator {
        name: name.clone(),
        generator,
    })
}

struct Resolver<'f> {
    generators: &'f [GeneratorSpec],
    scaffolds: &'f [ScaffoldSpec],
}

impl Resolver<'_> {
    fn generator(&self, owner: &str, field: &str, v: &Option<String>) -> Result<usize, SystemFileError> {
        let Some(name) = v else {
            return invalid(format!("scaffold {owner}: missing `{field}`"));
        };
        match self.generators.iter().position(|g| &g.name == name) {
            Some(i) => Ok(i),
            None => invalid(format!("scaffold {owner}: no generator named {name:?}")),
        }
    }

    fn scaffold(&self, owner: &str, field: &str, v: &Option<String>) -> Result<usize, SystemFileError> {
        let Some(name) = v else {
            return invalid(format!("scaffold {owner}: missing `{field}`"));
        };
        match self.scaffolds.iter().position(|s| &s.name == name) {
            Some(i) => Ok(i),
            None => invalid(format!("scaffold {owner}: no scaffold named {name:?}")),
        }
    }
}

/// Wraps a builtin program under the name given in the file.
struct Renamed<P> {
    name: String,
    inner: P,
}

impl<P: Scaffold<char>> Scaffold<char> for Renamed<P> {
    fn name(&self) -> &str {
        &self.name
    }
    fn generators(&self) -> Vec<usize> {
        self.inner.generators()
    }
    fn recursions(&self) -> Vec<usize> {
        self.inner.recursions()
    }
    fn start<'s>(&'s self, input: &[TextToken]) -> Box<dyn super::Invocation<char> + 's>
    where
        char: 's,
    {
        self.inner.start(input)
    }
}

fn renamed<P: Scaffold<char> + 'static>(name: &str, inner: P) -> Box<dyn Scaffold<char>> {
    Box::new(Renamed {
        name: name.to_string(),
        inner,
    })
}

fn build_scaffold(r: &Resolver<'_>, index: usize, spec: &ScaffoldSpec) -> Result<Box<dyn Scaffold<char>>, SystemFileError> {
    let name = spec.name.as_str();
    Ok(match spec.program.as_str() {
        "identity" => renamed(name, Identity),
        "self_call" => renamed(
            name,
            SelfCall {
                name: name.to_string(),
                target: r.scaffold(name, "target", &spec.target)?,
            },
        ),
        "recursive_model" => {
            let me = match &spec.target {
                Some(_) => r.scaffold(name, "target", &spec.target)?,
                None => index,
            };
            let mut p = RecursiveModel::new(r.generator(name, "generator", &spec.generator)?, me);
            if spec.preserve {
                p = p.with_preservation(AnswerFormat::text());
            }
            if spec.loop_detection == Some(false) {
                p = p.without_loop_detection();
            }
            renamed(name, p)
        }
        "summarize" => {
            let Some(max_len) = spec.max_len else {
                return invalid(format!("scaffold {name}: missing `max_len`"));
            };
            renamed(
                name,
                SummarizationLoop {
                    generator: r.generator(name, "generator", &spec.generator)?,
                    summarizer: r.generator(name, "summarizer", &spec.summarizer)?,
                    max_len,
                    stop: text::tokenize(spec.stop.as_deref().unwrap_or("")),
                },
            )
        }
        "diffusion" => renamed(
            name,
            DiffusionLoop {
                denoiser: r.generator(name, "denoiser", &spec.denoiser)?,
                transition: r.generator(name, "transition", &spec.transition)?,
                mask: mask_token(name, spec.mask.as_deref())?,
            },
        ),
        "prover" => renamed(
            name,
            Prover {
                generator: r.generator(name, "generator", &spec.generator)?,
                verifier: r.scaffold(name, "verifier", &spec.verifier)?,
                seeds: spec.seeds.iter().map(|s| text::tokenize(s)).collect(),
            },
        ),
        "verifier" => renamed(
            name,
            Verifier {
                generator: r.generator(name, "generator", &spec.generator)?,
                prover: r.scaffold(name, "prover", &spec.prover)?,
            },
        ),
        other => return invalid(format!("scaffold {name}: unknown program {other:?}")),
    })
}

impl SystemFile {
    pub fn build(&self) -> Result<ScaffoldSystem<'static, char>, SystemFileError> {
        let mut names = std::collections::HashSet::new();
        for g in &self.generators {
            if !names.insert(("g", g.name.as_str())) {
                return invalid(format!("duplicate generator name {:?}", g.name));
            }
        }
        for s in &self.scaffolds {
            if !names.insert(("s", s.name.as_str())) {
                return invalid(format!("duplicate scaffold name {:?}", s.name));
            }
        }
        let generators = self.generators.iter().map(build_generator).collect::<Result<_, _>>()?;
        let r = Resolver {
            generators: &self.generators,
            scaffolds: &self.scaffolds,
        };
        let scaffolds = self
            .scaffolds
            .iter()
            .enumerate()
            .map(|(i, s)| build_scaffold(&r, i, s))
            .collect::<Result<_, _>>()?;
        Ok(ScaffoldSystem::new(generators, scaffolds)?)
    }
}

pub fn parse_system(src: &str) -> Result<ScaffoldSystem<'static, char>, SystemFileError> {
    let file: SystemFile = toml::from_str(src)?;
    file.build()
}

pub fn load_system(path: &Path) -> Result<ScaffoldSystem<'static, char>, SystemFileError> {
    let src = std::fs::read_to_string(path).map_err(|source| SystemFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_system(&src)
}
