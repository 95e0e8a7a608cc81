use std::io::Write;
use std::process::{Command, Stdio};

use rayon::prelude::*;

use super::{Translator, DEFAULT_BATCH_SIZE};
use crate::error::{Error, Result};
use crate::io::tsv_field;
use crate::lang::LangCode;

/// Runs an external program once per batch as
/// `<command> --src <lang> --tgt <lang>`, one sentence per line on stdin and
/// one translation per line expected on stdout. Batches may run concurrently;
/// results are reassembled in input order.
#[derive(Clone, Debug)]
pub struct ExecTranslator {
    command: Vec<String>,
    batch_size: usize,
}

impl ExecTranslator {
    pub fn new(command: Vec<String>, batch_size: usize) -> Result<Self> {
        if command.is_empty() {
            return Err(Error::Config("exec backend needs a command".into()));
        }
        Ok(ExecTranslator {
            command,
            batch_size: if batch_size == 0 {
                DEFAULT_BATCH_SIZE
            } else {
                batch_size
            },
        })
    }

    fn run_batch(&self, src: LangCode, tgt: LangCode, lines: &[String]) -> Result<Vec<String>> {
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .args(["--src", src.as_str(), "--tgt", tgt.as_str()])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Backend(format!("cannot start {}: {e}", self.command[0])))?;

        let mut input = String::new();
        for line in lines {
            input.push_str(&tsv_field(line));
            input.push('\n');
        }
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let output = child
            .wait_with_output()
            .map_err(|e| Error::Backend(format!("{}: {e}", self.command[0])))?;
        // a broken pipe here means the child exited early; its status says why
        let _ = writer.join();

        let out: Vec<String> = String::from_utf8_lossy(&output.stdout)
            .lines()
            .map(str::to_string)
            .collect();
        if !output.status.success() {
            return Err(Error::Backend(format!(
                "{} exited with {} after {} of {} lines: {}",
                self.command[0],
                output.status,
                out.len(),
                lines.len(),
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        if out.len() != lines.len() {
            return Err(Error::LineCountMismatch {
                expected: lines.len(),
                got: out.len(),
            });
        }
        Ok(out)
    }
}

impl Translator for ExecTranslator {
    fn translate(&self, src: LangCode, tgt: LangCode, lines: &[String]) -> Result<Vec<String>> {
        let batches: Vec<Vec<String>> = lines
            .par_chunks(self.batch_size)
            .map(|chunk| self.run_batch(src, tgt, chunk))
            .collect::<Result<_>>()?;
        Ok(batches.into_iter().flatten().collect())
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn sh(script: &str) -> ExecTranslator {
        ExecTranslator::new(
            vec!["sh".into(), "-c".into(), script.into(), "sh".into()],
            2,
        )
        .unwrap()
    }

    fn lines(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn passes_languages_and_preserves_order() {
        let t = sh(r#"while IFS= read -r l; do echo "$2>$4:$l"; done"#);
        let out = t
            .translate(LangCode::Hi, LangCode::En, &lines(&["a", "b", "c"]))
            .unwrap();
        assert_eq!(out, ["hi>en:a", "hi>en:b", "hi>en:c"]);
    }

    #[test]
    fn short_output_is_an_error() {
        let t = ExecTranslator::new(
            vec!["sh".into(), "-c".into(), "head -n 2".into(), "sh".into()],
            64,
        )
        .unwrap();
        let err = t
            .translate(LangCode::Hi, LangCode::En, &lines(&["a", "b", "c"]))
            .unwrap_err();
        assert!(matches!(
            err,
            Error::LineCountMismatch {
                expected: 3,
                got: 2
            }
        ));
    }

    #[test]
    fn nonzero_exit_is_an_error() {
        let t = sh("cat >/dev/null; echo boom >&2; exit 3");
        let err = t
            .translate(LangCode::Hi, LangCode::En, &lines(&["a"]))
            .unwrap_err();
        assert!(err.to_string().contains("boom"), "{err}");
    }
}
