//! All-or-nothing output: files are staged in memory, written to temporary
//! files next to their targets and renamed into place only once every one of
//! them has been written.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use shiftplan::io::{self, IoError};
use tempfile::NamedTempFile;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

fn encode(name: &str, e: IoError) -> CliError {
    CliError::Io { path: PathBuf::from(name), source: std::io::Error::other(e.to_string()) }
}

impl Outputs {
    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T], header: &[&str]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        io::write_rows_with_header(&mut buf, rows, Some(header)).map_err(|e| encode(name, e))?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut buf = serde_json::to_vec_pretty(value)
            .map_err(|e| CliError::Io { path: PathBuf::from(name), source: e.into() })?;
        buf.push(b'\n');
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body.into_bytes()));
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io_err = |path: &Path, source| CliError::Io { path: path.to_path_buf(), source };
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, body) in self.files {
            let target = dir.join(&name);
            let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_err(&target, e))?;
            tmp.write_all(&body).and_then(|_| tmp.flush()).map_err(|e| io_err(&target, e))?;
            staged.push((tmp, target));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            tmp.persist(&target).map_err(|e| io_err(&target, e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}
