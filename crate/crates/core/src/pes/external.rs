//! Line protocol bridge to external calculator backends.
//!
//! One request, one response, newline-delimited JSON over the child
//! process's stdin/stdout. A request is
//! `{"id": 7, "elements": ["H","H"], "coords": [[x,y,z], ...]}` with Å
//! coordinates; the response is either
//! `{"id": 7, "energy": E, "gradient": [[gx,gy,gz], ...]}` in kcal/mol and
//! kcal/mol/Å, or `{"id": 7, "error": "message"}`. The response id must
//! echo the request id. One request is in flight per process; the engine
//! keeps a pool of processes sized to the worker count.

use super::{CalcError, Calculator, Gradient};
use crate::geom::Geometry;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::sync::Mutex;
use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("failed to spawn backend {command:?}: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    elements: Vec<&'static str>,
    coords: &'a [[f64; 3]],
}

#[derive(Deserialize)]
struct Response {
    id: u64,
    #[serde(default)]
    energy: Option<f64>,
    #[serde(default)]
    gradient: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    error: Option<String>,
}

struct Backend {
    child: Child,
    stdin: ChildStdin,
    lines: mpsc::Receiver<std::io::Result<String>>,
}

impl Backend {
    fn spawn(command: &str, args: &[String]) -> Result<Backend, ExternalError> {
        let mut child = Command::new(command)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ExternalError::Spawn {
                command: command.to_string(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        // reader thread so each call can time out without blocking forever
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Backend {
            child,
            stdin,
            lines: rx,
        })
    }

    fn call(&mut self, id: u64, geom: &Geometry, timeout: Duration) -> Result<(f64, Gradient), CalcError> {
        let req = Request {
            id,
            elements: geom.elements.iter().map(|e| e.symbol()).collect(),
            coords: &geom.coords,
        };
        let mut line = serde_json::to_string(&req).expect("request serializes");
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| CalcError::BackendCrashed(format!("write failed: {e}")))?;

        let raw = match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(CalcError::BackendCrashed(format!("read failed: {e}"))),
            Err(mpsc::RecvTimeoutError::Timeout) => {
                return Err(CalcError::TimeoutExceeded(timeout.as_secs_f64()))
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                return Err(CalcError::BackendCrashed("stdout closed".into()))
            }
        };

        let resp: Response = serde_json::from_str(&raw)
            .map_err(|_| CalcError::ProtocolViolation(format!("unparseable response: {raw:?}")))?;
        if resp.id != id {
            return Err(CalcError::ProtocolViolation(format!(
                "response id {} does not echo request id {id}",
                resp.id
            )));
        }
        if let Some(msg) = resp.error {
            return Err(CalcError::Other(format!("backend error: {msg}")));
        }
        match (resp.energy, resp.gradient) {
            (Some(e), Some(g)) if g.len() == geom.natoms() => Ok((e, g)),
            (Some(_), Some(g)) => Err(CalcError::ProtocolViolation(format!(
                "gradient rows {} != atom count {}",
                g.len(),
                geom.natoms()
            ))),
            _ => Err(CalcError::ProtocolViolation(format!(
                "response missing energy or gradient: {raw:?}"
            ))),
        }
    }
}

impl Drop for Backend {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Calculator backed by a pool of external processes speaking the line
/// protocol. Each process serves one request at a time; concurrent callers
/// pick the first free lane.
pub struct ExternalCalculator {
    lanes: Vec<Mutex<Backend>>,
    next_id: AtomicU64,
    timeout: Duration,
}

impl ExternalCalculator {
    /// Spawn `pool` backend processes running `command args...`.
    pub fn spawn(
        command: &str,
        args: &[String],
        pool: usize,
        timeout: Duration,
    ) -> Result<ExternalCalculator, ExternalError> {
        let lanes = (0..pool.max(1))
            .map(|_| Backend::spawn(command, args).map(Mutex::new))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExternalCalculator {
            lanes,
            next_id: AtomicU64::new(1),
            timeout,
        })
    }

    fn call(&self, geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        // prefer a free lane, fall back to blocking on the first
        for lane in &self.lanes {
            if let Ok(mut backend) = lane.try_lock() {
                return backend.call(id, geom, self.timeout);
            }
        }
        let mut backend = self.lanes[0].lock().expect("backend lane poisoned");
        backend.call(id, geom, self.timeout)
    }
}

impl Calculator for ExternalCalculator {
    fn energy(&self, geom: &Geometry) -> Result<f64, CalcError> {
        Ok(self.call(geom)?.0)
    }

    fn gradient(&self, geom: &Geometry) -> Result<Gradient, CalcError> {
        Ok(self.call(geom)?.1)
    }

    fn energy_gradient(&self, geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
        self.call(geom)
    }
}

/// What a served backend computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendMode {
    /// Default surrogate potential.
    Morse,
    /// Energy 0 and zero gradient for any geometry (protocol testing).
    Zero,
    /// Emit a malformed line once, then behave like `Zero` (protocol testing).
    MalformedOnce,
}

/// Serve the line protocol on stdin/stdout until EOF. This is the body of
/// the `backend` CLI subcommand and doubles as the reference backend
/// implementation.
pub fn serve_backend(mode: BackendMode) -> std::io::Result<()> {
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    let surrogate = super::MorseSurrogate::default();
    let mut malformed_pending = mode == BackendMode::MalformedOnce;

    #[derive(Deserialize)]
    struct WireRequest {
        id: u64,
        elements: Vec<String>,
        coords: Vec<[f64; 3]>,
    }

    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if malformed_pending {
            malformed_pending = false;
            writeln!(stdout, "this is not a protocol line")?;
            stdout.flush()?;
            continue;
        }
        let reply = match serde_json::from_str::<WireRequest>(&line) {
            Ok(req) => {
                let parsed: Result<Vec<crate::elements::Element>, _> =
                    req.elements.iter().map(|s| s.parse()).collect();
                match parsed {
                    Ok(elements) if elements.len() == req.coords.len() => {
                        let geom = Geometry::new(elements, req.coords);
                        let result = match mode {
                            BackendMode::Morse => surrogate.evaluate(&geom),
                            BackendMode::Zero | BackendMode::MalformedOnce => {
                                Ok((0.0, vec![[0.0; 3]; geom.natoms()]))
                            }
                        };
                        match result {
                            Ok((energy, gradient)) => serde_json::json!({
                                "id": req.id,
                                "energy": energy,
                                "gradient": gradient,
                            }),
                            Err(e) => serde_json::json!({ "id": req.id, "error": format!("{e}") }),
                        }
                    }
                    Ok(_) => serde_json::json!({
                        "id": req.id,
                        "error": "element list and coords length differ",
                    }),
                    Err(e) => serde_json::json!({ "id": req.id, "error": format!("{e}") }),
                }
            }
            Err(e) => serde_json::json!({ "id": 0, "error": format!("bad request: {e}") }),
        };
        writeln!(stdout, "{reply}")?;
        stdout.flush()?;
    }
    Ok(())
}
