//! A minimal HTTP/1.1 server speaking just enough of the chat completions
//! protocol for tests. Connections are handled one at a time and closed
//! after each response.

use std::collections::{HashMap, VecDeque};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use rcm_core::sat::TraceSample;
use rcm_core::token::{CALL_CLOSE_TEXT, RET_CLOSE_TEXT};
use serde_json::{json, Value};

#[derive(Clone, Debug)]
pub struct RecordedRequest {
    pub method: String,
    pub path: String,
    /// Header names lower-cased.
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl RecordedRequest {
    pub fn json(&self) -> Option<Value> {
        serde_json::from_str(&self.body).ok()
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        let name = name.to_ascii_lowercase();
        self.headers.iter().find(|(k, _)| *k == name).map(|(_, v)| v.as_str())
    }

    fn message(&self, role: &str) -> Option<String> {
        self.json()?["messages"]
            .as_array()?
            .iter()
            .find(|m| m["role"] == role)
            .and_then(|m| m["content"].as_str().map(str::to_string))
    }

    pub fn user_message(&self) -> Option<String> {
        self.message("user")
    }

    /// The assistant prefill, empty when absent.
    pub fn assistant_prefix(&self) -> String {
        self.message("assistant").unwrap_or_default()
    }
}

#[derive(Clone, Debug)]
pub struct MockResponse {
    pub status: u16,
    pub body: String,
    pub headers: Vec<(String, String)>,
    pub delay: Duration,
}

impl MockResponse {
    pub fn raw(status: u16, body: impl Into<String>) -> Self {
        MockResponse {
            status,
            body: body.into(),
            headers: Vec::new(),
            delay: Duration::ZERO,
        }
    }

    /// A well-formed completion with one choice.
    pub fn completion(content: &str, finish_reason: &str) -> Self {
        let body = json!({
            "id": "mock",
            "object": "chat.completion",
            "choices": [{
                "index": 0,
                "message": {"role": "assistant", "content": content},
                "finish_reason": finish_reason,
            }],
        });
        MockResponse::raw(200, body.to_string())
    }

    pub fn error(status: u16) -> Self {
        MockResponse::raw(status, json!({"error": {"message": format!("mock status {status}")}}).to_string())
    }

    pub fn with_header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }

    pub fn delayed(mut self, d: Duration) -> Self {
        self.delay = d;
        self
    }
}

type Handler = Box<dyn FnMut(&RecordedRequest) -> MockResponse + Send>;

pub struct MockServer {
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<RecordedRequest>>>,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(handler: impl FnMut(&RecordedRequest) -> MockResponse + Send + 'static) -> io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let mut handler: Handler = Box::new(handler);
        let (log, flag) = (requests.clone(), stop.clone());
        let thread = std::thread::spawn(move || {
            for conn in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = conn else { continue };
                if let Err(e) = serve(stream, &mut handler, &log) {
                    log::debug!("mock connection error: {e}");
                }
            }
        });
        Ok(MockServer {
            addr,
            requests,
            stop,
            thread: Some(thread),
        })
    }

    /// Serves `responses` in order, repeating the last one.
    pub fn scripted(responses: Vec<MockResponse>) -> io::Result<Self> {
        assert!(!responses.is_empty(), "need at least one response");
        let mut queue: VecDeque<MockResponse> = responses.into();
        MockServer::start(move |_| {
            if queue.len() > 1 {
                queue.pop_front().expect("non-empty")
            } else {
                queue[0].clone()
            }
        })
    }

    /// Answers each request with the recorded block for its prompt and
    /// prefill. With `strip_closers` the closing marker is removed and the
    /// finish reason is `stop`, as real endpoints do.
    pub fn replaying(samples: &[TraceSample], strip_closers: bool) -> io::Result<Self> {
        let table: HashMap<(String, String), String> = samples
            .iter()
            .map(|s| ((s.user.clone(), s.assistant_prefix.clone()), s.assistant_content.clone()))
            .collect();
        MockServer::start(move |req| {
            let key = (req.user_message().unwrap_or_default(), req.assistant_prefix());
            match table.get(&key) {
                Some(content) if strip_closers => {
                    let c = content
                        .strip_suffix(CALL_CLOSE_TEXT)
                        .or_else(|| content.strip_suffix(RET_CLOSE_TEXT))
                        .unwrap_or(content);
                    MockResponse::completion(c, "stop")
                }
                Some(content) => MockResponse::completion(content, "stop"),
                None => MockResponse::raw(404, "unknown prompt"),
            }
        })
    }

    /// Base URL to configure a client with.
    pub fn url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.requests.lock().expect("request log poisoned").clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // wake the accept loop
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn serve(stream: TcpStream, handler: &mut Handler, log: &Mutex<Vec<RecordedRequest>>) -> io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(10)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    if reader.read_line(&mut line)? == 0 {
        return Ok(());
    }
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();
    let mut headers = Vec::new();
    loop {
        line.clear();
        reader.read_line(&mut line)?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            headers.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
    }
    let len = headers
        .iter()
        .find(|(k, _)| k == "content-length")
        .and_then(|(_, v)| v.parse::<usize>().ok())
        .unwrap_or(0);
    let mut body = vec![0u8; len];
    reader.read_exact(&mut body)?;
    let req = RecordedRequest {
        method,
        path,
        headers,
        body: String::from_utf8_lossy(&body).into_owned(),
    };
    log.lock().expect("request log poisoned").push(req.clone());
    let resp = handler(&req);
    if !resp.delay.is_zero() {
        std::thread::sleep(resp.delay);
    }
    let mut out = stream;
    let mut head = format!(
        "HTTP/1.1 {} {}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n",
        resp.status,
        reason(resp.status),
        resp.body.len()
    );
    for (k, v) in &resp.headers {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str("\r\n");
    // the client may have given up already
    let _ = out.write_all(head.as_bytes()).and_then(|_| out.write_all(resp.body.as_bytes()));
    let _ = out.flush();
    Ok(())
}

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        401 => "Unauthorized",
        403 => "Forbidden",
        404 => "Not Found",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        502 => "Bad Gateway",
        503 => "Service Unavailable",
        _ => "Status",
    }
}
