use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Artifact directory. Files are written in full on each call, so reruns
/// overwrite rather than append.
pub struct Output {
    dir: PathBuf,
    gnuplot: bool,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

impl Output {
    pub fn new(dir: &Path, gnuplot: bool) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self { dir: dir.to_path_buf(), gnuplot })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, contents).map_err(io_err(&path))?;
        Ok(path)
    }

    /// Writes `<stem>.gp` next to `csv_name` when gnuplot output is on.
    pub fn script(&mut self, csv_name: &str, script: impl FnOnce(&str) -> String) -> Result<(), CliError> {
        if !self.gnuplot {
            return Ok(());
        }
        let path = Path::new(csv_name);
        let file = path.file_name().and_then(|f| f.to_str()).unwrap_or(csv_name);
        let gp = path.with_extension("gp");
        self.write(gp.to_str().expect("utf-8 artifact name"), &script(file))
            .map(|_| ())
    }
}

/// Table with a leading integer column and one float column per curve.
pub struct WideTable {
    pub index_name: String,
    pub index: Vec<i64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl WideTable {
    pub fn new(index_name: &str, index: Vec<i64>) -> Self {
        Self { index_name: index_name.to_string(), index, columns: Vec::new() }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.index.len(), "column length");
        self.columns.push((name.to_string(), values));
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.index_name.clone();
        for (name, _) in &self.columns {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for (row, idx) in self.index.iter().enumerate() {
            s.push_str(&idx.to_string());
            for (_, v) in &self.columns {
                s.push_str(&format!(",{:.16e}", v[row]));
            }
            s.push('\n');
        }
        s
    }

    /// One line per column, titled by the header.
    pub fn gnuplot_script(&self, csv_name: &str, title: &str, log_y: bool) -> String {
        let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
        s.push_str(&format!("set xlabel '{}'\n", self.index_name));
        if log_y {
            s.push_str("set logscale y\n");
        }
        s.push_str(&format!("set title '{title}'\n"));
        s.push_str(&format!(
            "plot for [i=2:{}] '{csv_name}' using 1:i with linespoints\n",
            self.columns.len() + 1
        ));
        s
    }
}
