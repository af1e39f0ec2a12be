use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Stdio};

use thiserror::Error;

use crate::dataset::BugInstance;
use crate::language::Language;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("empty command for {0}")]
    EmptyCommand(Language),
}

/// Judges whether a patched file works.
pub trait ExecutionOracle: Send + Sync {
    fn supports(&self, language: Language) -> bool;
    fn run(&self, truth: &BugInstance, patched: &str) -> Result<bool, OracleError>;
}

/// Passes exactly when the patched file equals the original.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceOracle;

impl ExecutionOracle for ReferenceOracle {
    fn supports(&self, _: Language) -> bool {
        true
    }

    fn run(&self, truth: &BugInstance, patched: &str) -> Result<bool, OracleError> {
        Ok(patched == truth.original_code)
    }
}

/// Runs an external command per language on the patched file; exit status 0 passes.
///
/// The file keeps its original name inside a fresh temporary directory. Each argument
/// `{file}` is replaced by its path, which is appended when no argument mentions it.
/// `FORGE_LANGUAGE` carries the language name.
#[derive(Debug, Clone, Default)]
pub struct CommandOracle {
    commands: BTreeMap<Language, Vec<String>>,
}

impl CommandOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, language: Language, argv: Vec<String>) {
        self.commands.insert(language, argv);
    }

    pub fn languages(&self) -> impl Iterator<Item = Language> + '_ {
        self.commands.keys().copied()
    }
}

impl ExecutionOracle for CommandOracle {
    fn supports(&self, language: Language) -> bool {
        self.commands.contains_key(&language)
    }

    fn run(&self, truth: &BugInstance, patched: &str) -> Result<bool, OracleError> {
        let argv = self.commands.get(&truth.language).ok_or(OracleError::EmptyCommand(truth.language))?;
        let (program, args) = argv.split_first().ok_or(OracleError::EmptyCommand(truth.language))?;
        let dir = tempfile::tempdir()?;
        let name = Path::new(&truth.relative_path)
            .file_name()
            .map(|n| n.to_os_string())
            .unwrap_or_else(|| format!("main.{}", truth.language.extension()).into());
        let file = dir.path().join(name);
        std::fs::write(&file, patched)?;
        let file_arg = file.to_string_lossy().into_owned();
        let mut args: Vec<String> = args.iter().map(|a| a.replace("{file}", &file_arg)).collect();
        if !argv.iter().any(|a| a.contains("{file}")) {
            args.push(file_arg);
        }
        let status = Command::new(program)
            .args(&args)
            .current_dir(dir.path())
            .env("FORGE_LANGUAGE", truth.language.name())
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()?;
        Ok(status.success())
    }
}

/// Replaces 1-based lines of `code`; line endings are kept.
pub fn patch_lines<'a>(code: &str, repairs: impl IntoIterator<Item = (usize, &'a str)>) -> String {
    let mut lines: Vec<String> = code.split('\n').map(str::to_string).collect();
    for (line, text) in repairs {
        if let Some(slot) = line.checked_sub(1).and_then(|i| lines.get_mut(i)) {
            let cr = slot.ends_with('\r');
            *slot = text.to_string();
            if cr && !slot.ends_with('\r') {
                slot.push('\r');
            }
        }
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::tests::types_instance;

    #[test]
    fn patching_lines() {
        assert_eq!(patch_lines("a\nb\nc\n", [(2, "B")]), "a\nB\nc\n");
        assert_eq!(patch_lines("a\r\nb\r\n", [(1, "A")]), "A\r\nb\r\n");
        assert_eq!(patch_lines("a\n", [(9, "x"), (0, "y")]), "a\n");
    }

    #[cfg(unix)]
    #[test]
    fn command_oracle_uses_exit_status() {
        let inst = types_instance();
        let mut oracle = CommandOracle::new();
        assert!(!oracle.supports(Language::Python));
        oracle.register(Language::Python, vec!["grep".into(), "-q".into(), "NewType(\"Channel\"".into()]);
        assert!(oracle.supports(Language::Python));
        assert!(oracle.run(&inst, &inst.original_code).unwrap());
        assert!(!oracle.run(&inst, &inst.buggy_code).unwrap());
        let mut broken = CommandOracle::new();
        broken.register(Language::Python, vec!["/nonexistent/forge-oracle".into()]);
        assert!(broken.run(&inst, "").is_err());
    }
}
