//! Tab-separated manifests: `id<TAB>input[<TAB>output]`, one entry per line.
//!
//! Blank lines and lines starting with `#` are skipped. Relative paths are
//! resolved against the manifest's own directory. Each entry's `index` is
//! its position among the entries (comments and blanks excluded); the
//! augment command seeds utterance `index` from that number, so reordering
//! a manifest changes the draws while renaming ids does not.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub index: usize,
    pub id: String,
    pub input: PathBuf,
    pub output: Option<PathBuf>,
}

impl Entry {
    /// The explicit output path, or `<out_dir>/<id>.<extension>`.
    pub fn output_path(&self, out_dir: Option<&Path>, extension: &str) -> Result<PathBuf> {
        match (&self.output, out_dir) {
            (Some(path), _) => Ok(path.clone()),
            (None, Some(dir)) => Ok(dir.join(format!("{}.{extension}", self.id))),
            (None, None) => bail!("entry `{}` has no output path and no --out-dir was given", self.id),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub entries: Vec<Entry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base).with_context(|| format!("in manifest {}", path.display()))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let lineno = lineno + 1;
            if !(2..=3).contains(&fields.len()) {
                bail!("line {lineno}: expected 2 or 3 tab-separated fields, found {}", fields.len());
            }
            let id = fields[0].trim();
            if id.is_empty() {
                bail!("line {lineno}: empty utterance id");
            }
            if !seen.insert(id.to_owned()) {
                bail!("line {lineno}: duplicate utterance id `{id}`");
            }
            let resolve = |field: &str, what: &str| -> Result<PathBuf> {
                let field = field.trim();
                if field.is_empty() {
                    bail!("line {lineno}: empty {what} path");
                }
                Ok(base.join(field))
            };
            let input = resolve(fields[1], "input")?;
            let output = fields.get(2).map(|f| resolve(f, "output")).transpose()?;
            entries.push(Entry {
                index: entries.len(),
                id: id.to_owned(),
                input,
                output,
            });
        }
        Ok(Self { entries })
    }
}
