use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::numfmt::fmt_f64;
use crate::Result;

/// One CSV cell: a number in round-trip form, an integer, text, or nothing.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Files written by a run. Until [`OutputSet::commit`] succeeds, dropping the
/// set deletes everything it created.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        let stale = dir.join("report.json");
        if stale.exists() {
            fs::remove_file(&stale)?;
        }
        Ok(Self { dir: dir.to_path_buf(), created_dir, files: Vec::new(), committed: false })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File names relative to the output directory, in creation order.
    pub fn manifest(&self) -> Vec<String> {
        self.files
            .iter()
            .map(|p| p.file_name().expect("output files have names").to_string_lossy().into_owned())
            .collect()
    }

    fn track(&mut self, name: &str) -> PathBuf {
        let path = self.dir.join(name);
        if !self.files.contains(&path) {
            self.files.push(path.clone());
        }
        path
    }

    pub fn csv<R: IntoIterator<Item = Vec<Cell>>>(&mut self, name: &str, header: &[&str], rows: R) -> Result<()> {
        let path = self.track(name);
        let mut out = BufWriter::new(fs::File::create(path)?);
        writeln!(out, "{}", header.join(","))?;
        for row in rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let path = self.track(name);
        fs::write(path, format!("{}\n", serde_json::to_string_pretty(value)?))?;
        Ok(())
    }

    /// Registers a file produced by another writer.
    pub fn path_for(&mut self, name: &str) -> PathBuf {
        self.track(name)
    }

    /// Writes `report.json` through a temporary file and a rename, so the
    /// report appears only once every other output is complete.
    pub fn commit(mut self, report: &serde_json::Value) -> Result<PathBuf> {
        for f in &self.files {
            if !f.is_file() {
                return Err(crate::Error::InvalidState(format!("manifest entry {} is missing", f.display())));
            }
        }
        let tmp = self.dir.join(".report.json.tmp");
        fs::write(&tmp, format!("{}\n", serde_json::to_string_pretty(report)?))?;
        let target = self.dir.join("report.json");
        fs::rename(&tmp, &target)?;
        self.committed = true;
        Ok(target)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        let _ = fs::remove_file(self.dir.join(".report.json.tmp"));
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}
