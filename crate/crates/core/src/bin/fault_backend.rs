//! Test backend that misbehaves on purpose.
//!
//! `--mode` selects the fault:
//!   timeout             reads requests, never answers
//!   missing-candidates  `{"ok":true}` with no candidate list
//!   malformed           a line that is not JSON
//!   error               `{"ok":false,...}`
//!   unsorted            valid candidates in ascending score order
//!   invalid-token       a candidate name containing an uppercase token
//!   label-mismatch      classify label contradicting its score
//!   exit                exits on the first request without answering

use std::io::{self, BufRead, Write};
use std::time::Duration;

fn main() -> io::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.iter().position(|a| a == "--mode").and_then(|i| args.get(i + 1)).cloned().unwrap_or_else(|| "malformed".to_string());
    let stdin = io::stdin();
    let mut stdout = io::stdout().lock();
    for line in stdin.lock().lines() {
        let _request = line?;
        let reply = match mode.as_str() {
            "timeout" => {
                std::thread::sleep(Duration::from_secs(3600));
                continue;
            }
            "missing-candidates" => r#"{"ok":true}"#,
            "malformed" => "this is not json",
            "error" => r#"{"ok":false,"error":"injected failure"}"#,
            "unsorted" => {
                r#"{"ok":true,"candidates":[{"name":["set","value"],"score":0.1},{"name":["get","value"],"score":0.9},{"name":["load","value"],"score":0.5}]}"#
            }
            "invalid-token" => r#"{"ok":true,"candidates":[{"name":["Get","value"],"score":0.9}]}"#,
            "label-mismatch" => r#"{"ok":true,"label":"consistent","score":0.9}"#,
            "exit" => std::process::exit(3),
            other => {
                eprintln!("unknown mode `{other}`");
                std::process::exit(1);
            }
        };
        writeln!(stdout, "{reply}")?;
        stdout.flush()?;
    }
    Ok(())
}
