//! Helpers shared by the CLI integration and acceptance suites.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, Output};

/// Runs the built `roadnet` binary with a clean style environment.
pub fn roadnet(args: &[&str]) -> Output {
    roadnet_with_env(args, &[])
}

pub fn roadnet_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_roadnet"));
    cmd.args(args).env_remove("ROADNET_STYLE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("failed to spawn roadnet")
}

/// Parses `key=value` lines from a command's stdout.
pub fn kv(output: &Output) -> HashMap<String, String> {
    String::from_utf8_lossy(&output.stdout)
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process was signalled")
}

#[allow(dead_code)]
pub fn stdout_lines(output: &Output) -> Vec<String> {
    String::from_utf8_lossy(&output.stdout)
        .lines()
        .map(|s| s.to_string())
        .collect()
}
