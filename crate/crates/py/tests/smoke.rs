use std::path::Path;
use std::process::Command;

/// Runs python/smoke_test.py against the library cargo just built.
#[test]
fn python_smoke_script() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let script = root.join("python/smoke_test.py");
    let Ok(out) = Command::new("python3").arg(&script).output() else {
        eprintln!("python3 not available; skipping");
        return;
    };
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("ok"));
}
