use std::process::Command;

fn main() {
    let fallback = format!("v{}", std::env::var("CARGO_PKG_VERSION").unwrap_or_default());
    let version = Command::new("git")
        .args(["describe", "--tags", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .map(|s| format!("v{}-{s}", std::env::var("CARGO_PKG_VERSION").unwrap_or_default()))
        .unwrap_or(fallback);
    println!("cargo:rustc-env=WQED_VERSION={version}");
    println!("cargo:rerun-if-changed=build.rs");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
}
