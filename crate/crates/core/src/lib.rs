pub mod runtime;
pub mod token;

pub use token::{Symbol, Token};
pub mod machine;
pub mod updates;
pub mod alternation;
pub mod summarizer;
pub mod rtm;
pub mod sat;
pub mod template;
pub mod scaffolds;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/runtime.md")]
    mod runtime {}
    #[doc = include_str!("../../../book/src/machines.md")]
    mod machines {}
    #[doc = include_str!("../../../book/src/alternation.md")]
    mod alternation {}
    #[doc = include_str!("../../../book/src/summarizer.md")]
    mod summarizer {}
    #[doc = include_str!("../../../book/src/sat.md")]
    mod sat {}
    #[doc = include_str!("../../../book/src/scaffolds.md")]
    mod scaffolds {}
}
