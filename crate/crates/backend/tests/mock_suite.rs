use std::time::{Duration, Instant};

use proptest::prelude::*;
use rcm_backend::mock::{MockResponse, MockServer};
use rcm_backend::{build_prompt, BackendConfig, BackendError, Client, LlmGenerator, RetryPolicy};
use rcm_core::runtime::{run, run_with_root, Bottom, RunConfig};
use rcm_core::sat::{five_scientists, gen_traces, parse_answer, sat_config};
use rcm_core::token::text;

const TEMPLATE: &str = include_str!("golden/template.txt");
const EXAMPLE1: &str = include_str!("golden/example1_user.txt");
const EXAMPLE2: &str = include_str!("golden/example2_user.txt");
const EXAMPLE3: &str = include_str!("golden/example3_user.txt");

fn fast_retry(max_retries: u32) -> RetryPolicy {
    RetryPolicy {
        max_retries,
        initial_backoff: Duration::from_millis(5),
        max_backoff: Duration::from_millis(20),
    }
}

fn client_for(server: &MockServer, max_retries: u32) -> Client {
    let mut cfg = BackendConfig::new(server.url(), "mock-model");
    cfg.api_key_env = None;
    cfg.retry = fast_retry(max_retries);
    cfg.timeout = Duration::from_secs(5);
    Client::new(cfg).unwrap()
}

#[test]
fn template_matches_golden_file() {
    let filled = TEMPLATE
        .replace("{root_problem}", "ROOT")
        .replace("{current_task}", "TASK");
    assert_eq!(build_prompt("ROOT", "TASK"), filled);
    assert!(build_prompt("R", "").ends_with("[Current Task]\n"));
}

#[test]
fn sat_prompts_match_golden_files() {
    let inst = five_scientists();
    assert_eq!(build_prompt(&inst.root_problem, &inst.question), EXAMPLE1);
    assert_eq!(build_prompt(&inst.root_problem, "Alice=True, Carol=True"), EXAMPLE2);
    assert_eq!(build_prompt(&inst.root_problem, &inst.question), EXAMPLE3);
}

proptest! {
    #[test]
    fn prompt_fields_can_be_recovered(root in "[a-z \n.]{0,40}", task in "[a-z \n=,]{0,40}") {
        let p = build_prompt(&root, &task);
        let body = p.strip_prefix(&TEMPLATE[..TEMPLATE.find("{root_problem}").unwrap()]).unwrap();
        let (r, t) = body.split_once("\n\n[Current Task]\n").unwrap();
        prop_assert_eq!(r, root.as_str());
        prop_assert_eq!(t, task.as_str());
    }
}

#[test]
fn return_block_reaches_the_runtime() {
    let server = MockServer::scripted(vec![MockResponse::completion("<return>ok</return>", "stop")]).unwrap();
    let mut g = LlmGenerator::new(client_for(&server, 0));
    let r = run(&text::tokenize("question"), &mut g, &RunConfig::default());
    assert_eq!(r.answer().map(text::render).as_deref(), Some("ok"));
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn request_body_follows_the_chat_schema() {
    let server = MockServer::scripted(vec![MockResponse::completion("x</call>", "stop")]).unwrap();
    let client = client_for(&server, 0);
    client.complete("hello").unwrap();
    client.complete_with_prefix("hello", "so far").unwrap();
    let reqs = server.requests();
    assert_eq!(reqs[0].method, "POST");
    assert_eq!(reqs[0].path, "/v1/chat/completions");
    let b = reqs[0].json().unwrap();
    assert_eq!(b["model"], "mock-model");
    assert_eq!(b["temperature"], 0.0);
    assert_eq!(b["stop"], serde_json::json!(["</call>", "</return>"]));
    assert_eq!(b["messages"].as_array().unwrap().len(), 1);
    assert_eq!(reqs[0].user_message().as_deref(), Some("hello"));
    let b = reqs[1].json().unwrap();
    assert_eq!(b["messages"][1]["role"], "assistant");
    assert_eq!(reqs[1].assistant_prefix(), "so far");
    assert!(reqs[0].header("authorization").is_none());
}

#[test]
fn api_key_is_sent_as_bearer_token() {
    std::env::set_var("RCM_MOCK_SUITE_KEY", "sk-test");
    let server = MockServer::scripted(vec![MockResponse::completion("<return>a</return>", "stop")]).unwrap();
    let mut cfg = BackendConfig::new(server.url(), "m");
    cfg.api_key_env = Some("RCM_MOCK_SUITE_KEY".into());
    Client::new(cfg).unwrap().complete("q").unwrap();
    assert_eq!(server.requests()[0].header("authorization"), Some("Bearer sk-test"));

    let mut cfg = BackendConfig::new(server.url(), "m");
    cfg.api_key_env = Some("RCM_MOCK_SUITE_UNSET".into());
    assert!(matches!(Client::new(cfg).unwrap().require_key(), Err(BackendError::MissingKey(_))));
}

#[test]
fn two_server_errors_then_success() {
    let server = MockServer::scripted(vec![
        MockResponse::error(500),
        MockResponse::error(500),
        MockResponse::completion("<return>fine</return>", "stop"),
    ])
    .unwrap();
    let c = client_for(&server, 3).complete("q").unwrap();
    assert_eq!(c.text, "<return>fine</return>");
    assert_eq!(c.attempts, 3);
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn rate_limited_reply_is_retried() {
    let server = MockServer::scripted(vec![
        MockResponse::error(429).with_header("retry-after", "0"),
        MockResponse::completion("<return>a</return>", "stop"),
    ])
    .unwrap();
    assert_eq!(client_for(&server, 2).complete("q").unwrap().attempts, 2);
}

#[test]
fn persistent_failure_exhausts_retries() {
    let server = MockServer::scripted(vec![MockResponse::error(503)]).unwrap();
    let err = client_for(&server, 2).complete("q").unwrap_err();
    assert!(matches!(err, BackendError::RetriesExhausted { attempts: 3, .. }), "{err:?}");
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn auth_failure_is_not_retried() {
    let server = MockServer::scripted(vec![MockResponse::error(401)]).unwrap();
    let err = client_for(&server, 5).complete("q").unwrap_err();
    assert!(matches!(err, BackendError::Auth { status: 401 }));
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn malformed_response_is_not_retried() {
    let server = MockServer::scripted(vec![MockResponse::raw(200, "{not json")]).unwrap();
    let err = client_for(&server, 5).complete("q").unwrap_err();
    assert!(matches!(err, BackendError::Malformed(_)));
    let server = MockServer::scripted(vec![MockResponse::raw(200, r#"{"choices": []}"#)]).unwrap();
    assert!(matches!(client_for(&server, 5).complete("q"), Err(BackendError::Malformed(_))));
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn slow_endpoint_times_out() {
    let server =
        MockServer::scripted(vec![MockResponse::completion("<return>a</return>", "stop").delayed(Duration::from_millis(400))])
            .unwrap();
    let mut cfg = BackendConfig::new(server.url(), "m");
    cfg.api_key_env = None;
    cfg.timeout = Duration::from_millis(100);
    cfg.retry = fast_retry(1);
    let err = Client::new(cfg).unwrap().complete("q").unwrap_err();
    assert!(matches!(err, BackendError::Timeout { attempts: 2 }), "{err:?}");
}

#[test]
fn well_formed_reply_is_sent_once_and_cut_at_the_first_closer() {
    let server =
        MockServer::scripted(vec![MockResponse::completion("a<call>b</call> trailing <return>", "stop")]).unwrap();
    let c = client_for(&server, 3).complete("q").unwrap();
    assert_eq!(c.text, "a<call>b</call>");
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn stripped_closer_is_restored() {
    let server = MockServer::scripted(vec![MockResponse::completion("think<call>sub", "stop")]).unwrap();
    assert_eq!(client_for(&server, 0).complete("q").unwrap().text, "think<call>sub</call>");
}

#[test]
fn length_limited_reply_without_block_is_malformed_downstream() {
    let server = MockServer::scripted(vec![MockResponse::completion("rambling on and on", "length")]).unwrap();
    let mut g = LlmGenerator::new(client_for(&server, 0));
    let r = run(&text::tokenize("q"), &mut g, &RunConfig::default());
    assert_eq!(r.bottom(), Some(Bottom::MalformedOutput));
}

#[test]
fn backend_failure_is_generator_failure() {
    let server = MockServer::scripted(vec![MockResponse::error(403)]).unwrap();
    let mut g = LlmGenerator::new(client_for(&server, 0));
    let r = run(&text::tokenize("q"), &mut g, &RunConfig::default());
    assert_eq!(r.bottom(), Some(Bottom::GeneratorFailed));
    assert!(matches!(g.last_error(), Some(BackendError::Auth { status: 403 })));
}

#[test]
fn recursive_solve_through_the_endpoint_sends_only_active_frames() {
    let inst = five_scientists();
    let (samples, _) = gen_traces(&inst);
    for strip in [false, true] {
        let server = MockServer::replaying(&samples, strip).unwrap();
        let mut g = LlmGenerator::new(client_for(&server, 0));
        let r = run_with_root(
            &text::tokenize(&inst.root_problem),
            &text::tokenize(&inst.question),
            &mut g,
            &sat_config(),
        );
        assert_eq!(parse_answer(r.answer()), Some(false), "strip={strip}");
        let reqs = server.requests();
        assert_eq!(reqs.len(), samples.len());
        for (req, s) in reqs.iter().zip(&samples) {
            assert_eq!(req.user_message().as_deref(), Some(s.user.as_str()));
            assert_eq!(req.assistant_prefix(), s.assistant_prefix);
        }
        assert_eq!(reqs[0].user_message().as_deref(), Some(EXAMPLE1));
        assert!(reqs[0].assistant_prefix().is_empty());
        // the backtracking step continues the root frame's own reasoning
        let back = reqs.iter().find(|r| r.assistant_prefix().contains("Try Alice = True")).unwrap();
        assert_eq!(back.user_message().as_deref(), Some(EXAMPLE3));
    }
}

#[test]
fn shared_rate_limit_paces_requests() {
    let server = MockServer::scripted(vec![MockResponse::completion("<return>a</return>", "stop")]).unwrap();
    let mut cfg = BackendConfig::new(server.url(), "m");
    cfg.api_key_env = None;
    cfg.requests_per_second = Some(20.0);
    let client = Client::new(cfg).unwrap();
    let t = Instant::now();
    std::thread::scope(|s| {
        for _ in 0..4 {
            let c = client.clone();
            s.spawn(move || {
                for _ in 0..7 {
                    c.complete("q").unwrap();
                }
            });
        }
    });
    // 28 requests: a burst of 20, then 8 more at 50 ms each
    assert!(t.elapsed() >= Duration::from_millis(350), "{:?}", t.elapsed());
    assert_eq!(server.requests().len(), 28);
}

#[path = "support/contract.rs"]
mod contract;

#[test]
fn endpoint_contract_holds() {
    contract::contract().unwrap();
}
