//! Endpoint contract against the local mock server: golden prompts, retry,
//! stop-sequence truncation and malformed replies.

use std::time::Duration;

use rcm_backend::mock::{MockResponse, MockServer};
use rcm_backend::{build_prompt, BackendConfig, BackendError, Client, LlmGenerator, RetryPolicy};
use rcm_core::runtime::{run, Bottom, RunConfig};
use rcm_core::sat::five_scientists;
use rcm_core::token::text;

const TEMPLATE: &str = include_str!("../golden/template.txt");
const EXAMPLE1: &str = include_str!("../golden/example1_user.txt");
const EXAMPLE2: &str = include_str!("../golden/example2_user.txt");
const EXAMPLE3: &str = include_str!("../golden/example3_user.txt");

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn client_for(server: &MockServer, max_retries: u32) -> Client {
    let mut cfg = BackendConfig::new(server.url(), "mock-model");
    cfg.api_key_env = None;
    cfg.timeout = Duration::from_secs(5);
    cfg.retry = RetryPolicy {
        max_retries,
        initial_backoff: Duration::from_millis(5),
        max_backoff: Duration::from_millis(20),
    };
    Client::new(cfg).unwrap()
}

fn scripted(replies: Vec<MockResponse>) -> Result<MockServer, String> {
    MockServer::scripted(replies).map_err(|e| e.to_string())
}

pub fn contract() -> Result<String, String> {
    let filled = TEMPLATE.replace("{root_problem}", "ROOT").replace("{current_task}", "TASK");
    ensure!(build_prompt("ROOT", "TASK") == filled, "template differs from its golden file");
    let inst = five_scientists();
    ensure!(build_prompt(&inst.root_problem, &inst.question) == EXAMPLE1, "first example prompt differs");
    ensure!(build_prompt(&inst.root_problem, "Alice=True, Carol=True") == EXAMPLE2, "second example prompt differs");
    ensure!(build_prompt(&inst.root_problem, &inst.question) == EXAMPLE3, "third example prompt differs");

    let server = scripted(vec![
        MockResponse::error(500),
        MockResponse::error(500),
        MockResponse::completion("<return>fine</return>", "stop"),
    ])?;
    let c = client_for(&server, 3).complete("q").map_err(|e| e.to_string())?;
    ensure!(c.text == "<return>fine</return>" && c.attempts == 3, "retry gave {:?} after {}", c.text, c.attempts);
    let server = scripted(vec![MockResponse::error(503)])?;
    let err = client_for(&server, 2).complete("q").unwrap_err();
    ensure!(matches!(err, BackendError::RetriesExhausted { attempts: 3, .. }), "persistent failure gave {err:?}");

    let server = scripted(vec![MockResponse::completion("a<call>b</call> trailing <return>", "stop")])?;
    let c = client_for(&server, 0).complete("q").map_err(|e| e.to_string())?;
    ensure!(c.text == "a<call>b</call>", "reply not cut at the first closer: {:?}", c.text);
    let server = scripted(vec![MockResponse::completion("think<call>sub", "stop")])?;
    let c = client_for(&server, 0).complete("q").map_err(|e| e.to_string())?;
    ensure!(c.text == "think<call>sub</call>", "stripped closer not restored: {:?}", c.text);

    let server = scripted(vec![MockResponse::raw(200, "{not json")])?;
    let err = client_for(&server, 5).complete("q").unwrap_err();
    ensure!(matches!(err, BackendError::Malformed(_)) && server.requests().len() == 1, "bad JSON gave {err:?}");
    let server = scripted(vec![MockResponse::completion("rambling on and on", "length")])?;
    let mut g = LlmGenerator::new(client_for(&server, 0));
    let r = run(&text::tokenize("q"), &mut g, &RunConfig::default());
    ensure!(r.bottom() == Some(Bottom::MalformedOutput), "length-limited reply gave {:?}", r.outcome);
    Ok("golden prompts match; retry, truncation and malformed replies behave".into())
}
