use std::path::Path;
use std::process::Command;

use relplay_testkit::golden::{check, cli_transcript, CLI_CASES};

#[test]
fn cli_output_matches_golden_files() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut failures = Vec::new();
    for (name, args) in CLI_CASES {
        let out = Command::new(env!("CARGO_BIN_EXE_relplay")).args(*args).output().unwrap();
        let text = cli_transcript(
            args,
            out.status.code(),
            &String::from_utf8(out.stdout).unwrap(),
            &String::from_utf8(out.stderr).unwrap(),
        );
        if let Err(e) = check(&dir, &format!("{name}.txt"), &text) {
            failures.push(e);
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
