//! Client for external generator/classifier processes.
//!
//! The backend is a child process speaking one JSON message per line over
//! its standard input and output:
//!
//! ```text
//! -> {"kind":"recommend","k":10,"record":{..},"prompt":".."}
//! <- {"ok":true,"candidates":[{"name":["get","name"],"score":0.91}]}
//! -> {"kind":"classify","record":{..},"presented_name":[..],"prompt":".."}
//! <- {"ok":true,"label":"inconsistent","score":0.87}
//! <- {"ok":false,"error":".."}
//! ```
//!
//! One request is in flight per process at a time.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::prompt::{serialize_with, PromptTemplate};
use super::{sort_candidates, Candidate};
use crate::corpus::MethodRecord;
use crate::negsample::Label;
use crate::tokenize::SubtokenSeq;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("failed to start backend `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("backend did not answer within {0:?}")]
    Timeout(Duration),
    #[error("backend protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("backend reported failure: {0}")]
    Reported(String),
    #[error("backend is no longer usable: {0}")]
    Closed(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Request<'a> {
    Recommend { k: usize, record: &'a MethodRecord, prompt: &'a str },
    Classify { record: &'a MethodRecord, presented_name: &'a SubtokenSeq, prompt: &'a str },
}

struct Channel {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    /// Set after a timeout or broken pipe; a late reply would desynchronize
    /// the stream, so the process is not reused.
    broken: Option<String>,
}

pub struct BackendProcess {
    command: String,
    channel: Mutex<Channel>,
    timeout: Duration,
    template: PromptTemplate,
}

impl std::fmt::Debug for BackendProcess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BackendProcess").field("command", &self.command).field("timeout", &self.timeout).finish()
    }
}

impl BackendProcess {
    /// Starts `command`, split on whitespace into program and arguments.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, BackendError> {
        let mut parts = command.split_whitespace();
        let program = parts.next().ok_or_else(|| BackendError::Spawn {
            command: command.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty command"),
        })?;
        let args: Vec<&str> = parts.collect();
        Self::spawn_program(program, &args, timeout)
    }

    pub fn spawn_program(program: &str, args: &[&str], timeout: Duration) -> Result<Self, BackendError> {
        let command = std::iter::once(program).chain(args.iter().copied()).collect::<Vec<_>>().join(" ");
        let spawn_err = |source| BackendError::Spawn { command: command.clone(), source };
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(spawn_err)?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            command,
            channel: Mutex::new(Channel { child, stdin, lines: rx, broken: None }),
            timeout,
            template: PromptTemplate::default(),
        })
    }

    pub fn with_template(mut self, template: PromptTemplate) -> Self {
        self.template = template;
        self
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    fn exchange(&self, request: &Request<'_>, timeout: Duration) -> Result<Value, BackendError> {
        let mut line = serde_json::to_string(request).map_err(|e| BackendError::InvalidRequest(e.to_string()))?;
        line.push('\n');

        let mut ch = self.channel.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(reason) = &ch.broken {
            return Err(BackendError::Closed(reason.clone()));
        }
        if let Err(e) = ch.stdin.write_all(line.as_bytes()).and_then(|_| ch.stdin.flush()) {
            ch.broken = Some(format!("write failed: {e}"));
            return Err(BackendError::Closed(format!("write failed: {e}")));
        }
        let reply = match ch.lines.recv_timeout(timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => {
                ch.broken = Some(format!("read failed: {e}"));
                return Err(BackendError::Closed(format!("read failed: {e}")));
            }
            Err(RecvTimeoutError::Timeout) => {
                ch.broken = Some("timed out".into());
                let _ = ch.child.kill();
                return Err(BackendError::Timeout(timeout));
            }
            Err(RecvTimeoutError::Disconnected) => {
                ch.broken = Some("backend closed its output".into());
                return Err(BackendError::Closed("backend closed its output".into()));
            }
        };
        drop(ch);

        let value: Value =
            serde_json::from_str(&reply).map_err(|e| BackendError::ProtocolViolation(format!("reply is not JSON ({e}): {reply}")))?;
        match value.get("ok").and_then(Value::as_bool) {
            Some(true) => Ok(value),
            Some(false) => {
                let msg = value.get("error").and_then(Value::as_str).unwrap_or("unspecified error");
                Err(BackendError::Reported(msg.to_string()))
            }
            None => Err(BackendError::ProtocolViolation("reply lacks boolean `ok`".into())),
        }
    }

    /// Sends a `recommend` request and returns the candidates re-sorted by
    /// descending score.
    pub fn recommend(&self, record: &MethodRecord, k: usize) -> Result<Vec<Candidate>, BackendError> {
        recommend_backend(self, record, k, self.timeout)
    }

    /// Sends a `classify` request. Returns the label and the probability of
    /// `inconsistent`.
    pub fn classify(&self, record: &MethodRecord, presented_name: &SubtokenSeq) -> Result<(Label, f64), BackendError> {
        let prompt = serialize_with(record, &self.template).map_err(|e| BackendError::InvalidRequest(e.to_string()))?;
        let reply = self.exchange(&Request::Classify { record, presented_name, prompt: &prompt.text }, self.timeout)?;
        let label = match reply.get("label").and_then(Value::as_str) {
            Some("consistent") => Label::Consistent,
            Some("inconsistent") => Label::Inconsistent,
            Some(other) => return Err(BackendError::ProtocolViolation(format!("unknown label `{other}`"))),
            None => return Err(BackendError::ProtocolViolation("reply lacks `label`".into())),
        };
        let score = reply
            .get("score")
            .and_then(Value::as_f64)
            .ok_or_else(|| BackendError::ProtocolViolation("reply lacks numeric `score`".into()))?;
        if !(0.0..=1.0).contains(&score) {
            return Err(BackendError::ProtocolViolation(format!("score {score} outside [0, 1]")));
        }
        if (score >= 0.5) != (label == Label::Inconsistent) {
            return Err(BackendError::ProtocolViolation(format!("label {label} disagrees with score {score}")));
        }
        Ok((label, score))
    }
}

impl Drop for BackendProcess {
    fn drop(&mut self) {
        let ch = self.channel.get_mut().unwrap_or_else(|p| p.into_inner());
        let _ = ch.child.kill();
        let _ = ch.child.wait();
    }
}

/// Requests `k` candidates for `record` from `backend`.
pub fn recommend_backend(
    backend: &BackendProcess,
    record: &MethodRecord,
    k: usize,
    timeout: Duration,
) -> Result<Vec<Candidate>, BackendError> {
    if k == 0 {
        return Err(BackendError::InvalidRequest("k must be at least 1".into()));
    }
    let prompt = serialize_with(record, &backend.template).map_err(|e| BackendError::InvalidRequest(e.to_string()))?;
    let reply = backend.exchange(&Request::Recommend { k, record, prompt: &prompt.text }, timeout)?;
    let list = reply
        .get("candidates")
        .and_then(Value::as_array)
        .ok_or_else(|| BackendError::ProtocolViolation("reply lacks `candidates` array".into()))?;
    let mut candidates = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let name: SubtokenSeq = item
            .get("name")
            .cloned()
            .ok_or_else(|| BackendError::ProtocolViolation(format!("candidate {i} lacks `name`")))
            .and_then(|v| serde_json::from_value(v).map_err(|e| BackendError::ProtocolViolation(format!("candidate {i}: {e}"))))?;
        if name.is_empty() {
            return Err(BackendError::ProtocolViolation(format!("candidate {i} has an empty name")));
        }
        let score = item
            .get("score")
            .and_then(Value::as_f64)
            .ok_or_else(|| BackendError::ProtocolViolation(format!("candidate {i} lacks numeric `score`")))?;
        candidates.push(Candidate { name, score });
    }
    sort_candidates(&mut candidates);
    Ok(candidates)
}
