//! Library side of the `qgrad` command-line tool: configuration, result
//! records, the subcommands and output handling.

pub mod commands;
pub mod config;
pub mod record;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub use commands::{
    cmd_bench, cmd_plan, cmd_run, cmd_verify, BenchOutput, CommandOptions, BENCH_HEADER,
};
pub use config::{ExperimentConfig, FunctionSpec, SweepEntry};
pub use record::{Command, ResultRecord};

/// Environment variable naming the default directory for result files.
pub const OUT_DIR_ENV: &str = "QGRAD_OUT_DIR";

/// Where a command's structured output goes: an explicit path wins, then a
/// file named after the command in the default directory.
pub fn output_path(
    command: Command,
    seed: u64,
    out: Option<&Path>,
    out_dir: Option<&Path>,
) -> Option<PathBuf> {
    if let Some(path) = out {
        return Some(path.to_path_buf());
    }
    out_dir.map(|dir| dir.join(format!("{}-seed{seed}.json", command.name())))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_out_wins() {
        let p = output_path(
            Command::Run,
            3,
            Some(Path::new("a.json")),
            Some(Path::new("dir")),
        );
        assert_eq!(p.unwrap(), PathBuf::from("a.json"));
        let p = output_path(Command::Verify, 3, None, Some(Path::new("dir")));
        assert_eq!(p.unwrap(), PathBuf::from("dir/verify-seed3.json"));
        assert!(output_path(Command::Plan, 0, None, None).is_none());
    }
}
