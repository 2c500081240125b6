pub mod bounds;
pub mod gen;
pub mod plan;
pub mod report;
pub mod sim;
pub mod sweep;

use std::path::Path;

use relocsim::report::FigureFile;

use crate::error::{write_file, Result};

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print_stdout(text);
            Ok(())
        }
    }
}

pub fn write_figures(dir: &Path, files: &[FigureFile]) -> Result<()> {
    for f in files {
        write_file(&dir.join(&f.name), &f.contents)?;
    }
    Ok(())
}

pub fn pretty_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Prints to stdout, stopping quietly if the reader has gone away.
pub fn print_stdout(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}
