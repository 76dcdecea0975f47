//! In-process mock of the paginated search/fetch endpoint, with a fault
//! script for exercising retries, timeouts, and restarts.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use super::url::{decode_query, percent_decode};

/// One scripted behaviour, consumed per incoming request in order; once
/// the script is exhausted every request succeeds.
#[derive(Debug, Clone, Copy)]
pub enum Fault {
    /// Serve the request normally (a pass-through script slot).
    Ok,
    /// Respond with this HTTP status and an empty body.
    Status(u16),
    /// Hold the response long enough to trip the client timeout.
    Hang(Duration),
}

struct ServerState {
    corpus: Vec<(String, String)>,
    faults: Mutex<VecDeque<Fault>>,
    request_log: Mutex<Vec<(Duration, String)>>,
    started: Instant,
    stop: AtomicBool,
}

/// Mock harvest endpoint bound to an ephemeral localhost port.
pub struct MockServer {
    state: Arc<ServerState>,
    addr: String,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl MockServer {
    /// Starts the server with (id, payload) pairs as its corpus.
    pub fn start(corpus: Vec<(String, String)>) -> std::io::Result<MockServer> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = format!("http://{}", listener.local_addr()?);
        let state = Arc::new(ServerState {
            corpus,
            faults: Mutex::new(VecDeque::new()),
            request_log: Mutex::new(Vec::new()),
            started: Instant::now(),
            stop: AtomicBool::new(false),
        });
        let thread_state = Arc::clone(&state);
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if thread_state.stop.load(Ordering::SeqCst) {
                    break;
                }
                match stream {
                    Ok(stream) => handle_connection(stream, &thread_state),
                    Err(_) => break,
                }
            }
        });
        Ok(MockServer {
            state,
            addr,
            handle: Some(handle),
        })
    }

    pub fn url(&self) -> &str {
        &self.addr
    }

    pub fn corpus_size(&self) -> usize {
        self.state.corpus.len()
    }

    /// Queues faults ahead of the next requests.
    pub fn script_faults(&self, faults: impl IntoIterator<Item = Fault>) {
        self.state.faults.lock().unwrap().extend(faults);
    }

    /// (elapsed, path-with-query) per request, in arrival order.
    pub fn request_log(&self) -> Vec<(Duration, String)> {
        self.state.request_log.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.state.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr.trim_start_matches("http://"));
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(stream: TcpStream, state: &ServerState) {
    let _ = stream.set_read_timeout(Some(Duration::from_secs(5)));
    let mut reader = BufReader::new(match stream.try_clone() {
        Ok(s) => s,
        Err(_) => return,
    });
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() || request_line.is_empty() {
        return;
    }
    // Drain headers.
    loop {
        let mut line = String::new();
        match reader.read_line(&mut line) {
            Ok(0) => break,
            Ok(_) if line == "\r\n" || line == "\n" => break,
            Ok(_) => {}
            Err(_) => return,
        }
    }
    let target = request_line.split_whitespace().nth(1).unwrap_or("/");
    if state.stop.load(Ordering::SeqCst) {
        return;
    }
    state
        .request_log
        .lock()
        .unwrap()
        .push((state.started.elapsed(), target.to_string()));

    if let Some(fault) = state.faults.lock().unwrap().pop_front() {
        match fault {
            Fault::Ok => {}
            Fault::Status(code) => {
                respond(stream, code, "text/plain", &[], b"scripted fault");
                return;
            }
            Fault::Hang(pause) => std::thread::sleep(pause),
        }
    }

    let (path, query) = match target.split_once('?') {
        Some((p, q)) => (p, q),
        None => (target, ""),
    };
    let params = decode_query(query);
    match path {
        "/search" => {
            let retstart: usize = params
                .get("retstart")
                .and_then(|v| v.parse().ok())
                .unwrap_or(0);
            let retmax: usize = params
                .get("retmax")
                .and_then(|v| v.parse().ok())
                .unwrap_or(10);
            let ids: Vec<&str> = state
                .corpus
                .iter()
                .skip(retstart)
                .take(retmax)
                .map(|(id, _)| id.as_str())
                .collect();
            let body = serde_json::json!({ "total": state.corpus.len(), "ids": ids });
            respond(stream, 200, "application/json", &[], body.to_string().as_bytes());
        }
        "/fetch" => {
            let wanted: Vec<String> = params
                .get("id")
                .map(|ids| ids.split(',').map(percent_decode).collect())
                .unwrap_or_default();
            let mut payload = String::new();
            let mut missing = Vec::new();
            for id in &wanted {
                match state.corpus.iter().find(|(cid, _)| cid == id) {
                    Some((_, body)) => payload.push_str(body),
                    None => missing.push(id.clone()),
                }
            }
            let extra = if missing.is_empty() {
                Vec::new()
            } else {
                vec![("x-missing-ids".to_string(), missing.join(","))]
            };
            respond(stream, 200, "text/plain", &extra, payload.as_bytes());
        }
        _ => respond(stream, 404, "text/plain", &[], b"unknown endpoint"),
    }
}

fn respond(
    mut stream: TcpStream,
    status: u16,
    content_type: &str,
    extra_headers: &[(String, String)],
    body: &[u8],
) {
    let reason = match status {
        200 => "OK",
        404 => "Not Found",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    };
    let mut head = format!(
        "HTTP/1.1 {status} {reason}\r\ncontent-type: {content_type}\r\ncontent-length: {}\r\nconnection: close\r\n",
        body.len()
    );
    for (name, value) in extra_headers {
        head.push_str(&format!("{name}: {value}\r\n"));
    }
    head.push_str("\r\n");
    let _ = stream.write_all(head.as_bytes());
    let _ = stream.write_all(body);
    let _ = stream.flush();
    // Give the client a chance to read before the socket drops.
    let mut scratch = [0u8; 64];
    let _ = stream.set_read_timeout(Some(Duration::from_millis(50)));
    let _ = stream.read(&mut scratch);
}
