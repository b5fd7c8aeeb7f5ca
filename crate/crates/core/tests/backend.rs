//! Line protocol behaviour against the bundled stub backends.

mod common;

use std::time::{Duration, Instant};

use namewise::corpus::MethodRecord;
use namewise::mnr::{recommend_backend, BackendError, BackendProcess, NameGenerator};
use namewise::negsample::Label;
use namewise::tokenize::SubtokenSeq;

const ECHO: &str = env!("CARGO_BIN_EXE_echo-backend");
const FAULT: &str = env!("CARGO_BIN_EXE_fault-backend");
const PATIENT: Duration = Duration::from_secs(10);

fn record() -> MethodRecord {
    common::e2e_records(&common::fixture("e2e")).swap_remove(0)
}

fn fault(mode: &str, timeout: Duration) -> BackendProcess {
    BackendProcess::spawn_program(FAULT, &["--mode", mode], timeout).unwrap()
}

#[test]
fn echo_returns_the_original_name() {
    let echo = BackendProcess::spawn_program(ECHO, &[], PATIENT).unwrap();
    let r = record();
    let got = echo.generate(&r, 5).unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].name, r.name);
    assert_eq!(got[0].score, 1.0);
    // The process stays usable across requests.
    assert_eq!(echo.recommend(&r, 1).unwrap()[0].name, r.name);
}

#[test]
fn echo_classifies_by_equality() {
    let echo = BackendProcess::spawn_program(ECHO, &[], PATIENT).unwrap();
    let r = record();
    assert_eq!(echo.classify(&r, &r.name).unwrap(), (Label::Consistent, 0.0));
    let other = SubtokenSeq::from_strs(&["something", "else"]);
    assert_eq!(echo.classify(&r, &other).unwrap(), (Label::Inconsistent, 1.0));
}

#[test]
fn spawn_command_line_is_split_on_whitespace() {
    let echo = BackendProcess::spawn(&format!("{ECHO} --log /dev/null"), PATIENT).unwrap();
    assert_eq!(echo.recommend(&record(), 1).unwrap().len(), 1);
}

#[test]
fn silent_backend_times_out_and_is_then_closed() {
    let backend = fault("timeout", Duration::from_millis(200));
    let start = Instant::now();
    let err = backend.recommend(&record(), 3).unwrap_err();
    assert!(matches!(err, BackendError::Timeout(d) if d == Duration::from_millis(200)), "{err:?}");
    assert!(start.elapsed() < Duration::from_secs(5));
    assert!(matches!(backend.recommend(&record(), 3), Err(BackendError::Closed(_))));
}

#[test]
fn per_call_timeout_overrides_the_default() {
    let backend = fault("timeout", Duration::from_secs(3600));
    let err = recommend_backend(&backend, &record(), 3, Duration::from_millis(100)).unwrap_err();
    assert!(matches!(err, BackendError::Timeout(_)), "{err:?}");
}

#[test]
fn malformed_replies_are_protocol_violations() {
    for mode in ["malformed", "missing-candidates", "invalid-token"] {
        let err = fault(mode, PATIENT).recommend(&record(), 3).unwrap_err();
        assert!(matches!(err, BackendError::ProtocolViolation(_)), "{mode}: {err:?}");
    }
}

#[test]
fn reported_errors_carry_the_message() {
    match fault("error", PATIENT).recommend(&record(), 3) {
        Err(BackendError::Reported(msg)) => assert_eq!(msg, "injected failure"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unsorted_candidates_are_resorted() {
    let got = fault("unsorted", PATIENT).recommend(&record(), 3).unwrap();
    let names: Vec<String> = got.iter().map(|c| c.name.tokens().join(" ")).collect();
    assert_eq!(names, ["get value", "load value", "set value"]);
}

#[test]
fn label_contradicting_score_is_rejected() {
    let r = record();
    let err = fault("label-mismatch", PATIENT).classify(&r, &r.name).unwrap_err();
    assert!(matches!(err, BackendError::ProtocolViolation(_)), "{err:?}");
}

#[test]
fn exiting_backend_reports_closed() {
    let err = fault("exit", PATIENT).recommend(&record(), 3).unwrap_err();
    assert!(matches!(err, BackendError::Closed(_)), "{err:?}");
}

#[test]
fn zero_k_is_rejected_before_sending() {
    let echo = BackendProcess::spawn_program(ECHO, &[], PATIENT).unwrap();
    assert!(matches!(echo.recommend(&record(), 0), Err(BackendError::InvalidRequest(_))));
}

#[test]
fn missing_program_is_a_spawn_error() {
    let err = BackendProcess::spawn_program("/nonexistent/backend", &[], PATIENT).unwrap_err();
    assert!(matches!(err, BackendError::Spawn { .. }), "{err:?}");
}
