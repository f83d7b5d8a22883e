//! Guest protocol and the process-per-request runner.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tempfile::TempDir;
use thiserror::Error;
use wait_timeout::ChildExt;

/// Reference worker script, written out on demand.
pub const GUEST_RUNNER: &str = include_str!("../guest/guest_runner.py");

const TAIL: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuestRequest {
    pub source: String,
    pub entry: String,
    pub problem: String,
    pub instance: serde_json::Value,
    pub time_limit_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuestStatus {
    Ok,
    Error,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuestResponse {
    pub status: GuestStatus,
    #[serde(default)]
    pub solution: serde_json::Value,
    #[serde(default)]
    pub stderr_tail: String,
    #[serde(default)]
    pub wall_time_s: f64,
}

impl GuestResponse {
    pub fn error(detail: &str, wall_time_s: f64) -> Self {
        Self { status: GuestStatus::Error, solution: serde_json::Value::Null, stderr_tail: tail(detail), wall_time_s }
    }
}

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("cannot start guest interpreter `{program}`: {source}")]
    Spawn { program: String, source: std::io::Error },
    #[error("guest runner io: {0}")]
    Io(#[from] std::io::Error),
}

/// Executes one request. Candidate failures come back as responses; only
/// infrastructure problems are errors.
pub trait GuestRunner: Sync {
    fn execute(&self, request: &GuestRequest) -> Result<GuestResponse, RunnerError>;
}

fn tail(s: &str) -> String {
    let start = s.len().saturating_sub(TAIL);
    let start = (start..=s.len()).find(|i| s.is_char_boundary(*i)).unwrap_or(s.len());
    s[start..].to_string()
}

#[derive(Debug, Clone)]
pub struct SubprocessRunner {
    pub interpreter: PathBuf,
    pub script: PathBuf,
    /// Extra time past the request's limit before the process is killed.
    pub grace: Duration,
    /// Keeps the unpacked bundled worker alive.
    _scratch: Option<Arc<TempDir>>,
}

impl SubprocessRunner {
    pub fn new(interpreter: impl Into<PathBuf>, script: impl Into<PathBuf>) -> Self {
        Self { interpreter: interpreter.into(), script: script.into(), grace: Duration::from_secs(1), _scratch: None }
    }

    /// Uses `ADEPT_PYTHON` (default `python3`) and `ADEPT_GUEST_RUNNER`,
    /// unpacking the bundled worker into a private directory when the latter
    /// is unset.
    pub fn from_env() -> Result<Self, RunnerError> {
        let interpreter = std::env::var_os("ADEPT_PYTHON").map(PathBuf::from).unwrap_or_else(|| "python3".into());
        if let Some(p) = std::env::var_os("ADEPT_GUEST_RUNNER") {
            return Ok(Self::new(interpreter, p));
        }
        let dir = tempfile::Builder::new().prefix("adept-guest").tempdir()?;
        let script = Self::install(dir.path())?;
        Ok(Self { _scratch: Some(Arc::new(dir)), ..Self::new(interpreter, script) })
    }

    pub fn install(dir: &Path) -> Result<PathBuf, RunnerError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("guest_runner.py");
        if std::fs::read_to_string(&path).ok().as_deref() != Some(GUEST_RUNNER) {
            std::fs::write(&path, GUEST_RUNNER)?;
        }
        Ok(path)
    }

    /// Checks that the interpreter starts.
    pub fn probe(&self) -> Result<(), RunnerError> {
        let status = Command::new(&self.interpreter)
            .arg("-c")
            .arg("pass")
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map_err(|source| RunnerError::Spawn { program: self.interpreter.display().to_string(), source })?;
        if status.success() {
            Ok(())
        } else {
            Err(RunnerError::Spawn {
                program: self.interpreter.display().to_string(),
                source: std::io::Error::other(format!("exited with {status}")),
            })
        }
    }
}

impl GuestRunner for SubprocessRunner {
    fn execute(&self, request: &GuestRequest) -> Result<GuestResponse, RunnerError> {
        let started = Instant::now();
        let mut child = Command::new(&self.interpreter)
            .arg(&self.script)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| RunnerError::Spawn { program: self.interpreter.display().to_string(), source })?;
        let body = serde_json::to_vec(request).expect("requests serialize");
        let mut stdin = child.stdin.take().expect("piped");
        let writer = thread::spawn(move || {
            // a guest that dies early closes the pipe; that shows up in its response
            let _ = stdin.write_all(&body);
        });
        let mut stdout = child.stdout.take().expect("piped");
        let mut stderr = child.stderr.take().expect("piped");
        let out_reader = thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stdout.read_to_end(&mut buf);
            buf
        });
        let err_reader = thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr.read_to_end(&mut buf);
            buf
        });
        let limit = Duration::from_secs_f64(request.time_limit_s.max(0.0)) + self.grace;
        let exited = child.wait_timeout(limit)?;
        if exited.is_none() {
            let _ = child.kill();
            let _ = child.wait();
        }
        let _ = writer.join();
        let out = out_reader.join().unwrap_or_default();
        let err = err_reader.join().unwrap_or_default();
        let wall = started.elapsed().as_secs_f64();
        if exited.is_none() {
            return Ok(GuestResponse {
                status: GuestStatus::Timeout,
                solution: serde_json::Value::Null,
                stderr_tail: tail(&String::from_utf8_lossy(&err)),
                wall_time_s: wall,
            });
        }
        match serde_json::from_slice::<GuestResponse>(&out) {
            Ok(r) => Ok(r),
            Err(e) => {
                let detail = format!("no protocol response ({e}); stderr: {}", String::from_utf8_lossy(&err));
                Ok(GuestResponse::error(&detail, wall))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_respects_char_boundaries() {
        let s = "é".repeat(2000);
        let t = tail(&s);
        assert!(t.len() <= TAIL && t.chars().all(|c| c == 'é'));
        assert_eq!(tail("short"), "short");
    }

    #[test]
    fn protocol_field_names() {
        let r: GuestResponse = serde_json::from_str(r#"{"status":"timeout","solution":null,"stderr_tail":"","wall_time_s":1.5}"#).unwrap();
        assert_eq!(r.status, GuestStatus::Timeout);
        let req = GuestRequest {
            source: "s".into(),
            entry: "e".into(),
            problem: "mis".into(),
            instance: serde_json::json!({}),
            time_limit_s: 1.0,
        };
        let v = serde_json::to_value(&req).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["entry", "instance", "problem", "source", "time_limit_s"]);
    }
}
