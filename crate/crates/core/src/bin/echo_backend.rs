//! Test backend: recommends each record's own name with score 1.0 and
//! classifies a presented name as consistent exactly when it equals the
//! record's name.
//!
//! `--log <file>` appends every request line to `file`.

use std::fs::OpenOptions;
use std::io::{self, BufRead, Write};

use serde_json::{json, Value};

fn reply(request: &Value) -> Value {
    let name = &request["record"]["name"];
    match request["kind"].as_str() {
        Some("recommend") if name.is_array() => json!({"ok": true, "candidates": [{"name": name, "score": 1.0}]}),
        Some("classify") if name.is_array() => {
            let same = request["presented_name"] == *name;
            json!({"ok": true, "label": if same { "consistent" } else { "inconsistent" }, "score": if same { 0.0 } else { 1.0 }})
        }
        Some(kind) if name.is_array() => json!({"ok": false, "error": format!("unknown request kind `{kind}`")}),
        _ => json!({"ok": false, "error": "request lacks `kind` or `record.name`"}),
    }
}

fn main() -> io::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let mut log = match args.iter().position(|a| a == "--log") {
        Some(i) => {
            let path = args.get(i + 1).ok_or_else(|| io::Error::other("--log needs a path"))?;
            Some(OpenOptions::new().create(true).append(true).open(path)?)
        }
        None => None,
    };
    let stdin = io::stdin();
    let mut stdout = io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if let Some(f) = log.as_mut() {
            writeln!(f, "{line}")?;
            f.flush()?;
        }
        let out = match serde_json::from_str::<Value>(&line) {
            Ok(request) => reply(&request),
            Err(e) => json!({"ok": false, "error": format!("invalid request: {e}")}),
        };
        writeln!(stdout, "{out}")?;
        stdout.flush()?;
    }
    Ok(())
}
