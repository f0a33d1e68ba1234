use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Tables written by one run, in write order.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    header: Vec<(String, String)>,
    files: Vec<String>,
}

impl Outputs {
    /// `header` lines open every table.
    pub fn new(dir: &Path, header: Vec<(String, String)>) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Outputs { dir: dir.to_path_buf(), header, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Writes `name` as CSV preceded by `#` comment lines.
    pub fn table(&mut self, name: &str, extra: &[(&str, String)], columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut s = String::new();
        for (k, v) in &self.header {
            writeln!(s, "# {k}: {v}").expect("string");
        }
        for (k, v) in extra {
            writeln!(s, "# {k}: {v}").expect("string");
        }
        writeln!(s, "{}", columns.join(",")).expect("string");
        for r in rows {
            debug_assert_eq!(r.len(), columns.len());
            writeln!(s, "{}", r.join(",")).expect("string");
        }
        self.write_raw(name, &s)
    }

    pub fn write_raw(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    /// `manifest.toml`: the config followed by a `[manifest]` record.
    pub fn manifest(&self, canonical_config: &str, status: &str) -> Result<()> {
        let hash = hex::encode(Sha256::digest(canonical_config.as_bytes()));
        let mut table: toml::Table = toml::from_str(canonical_config)
            .map_err(|e| Error::InvalidData(format!("canonical config does not reparse: {e}")))?;
        let mut m = toml::Table::new();
        m.insert("tool".into(), "rclocality".into());
        m.insert("tool_version".into(), env!("CARGO_PKG_VERSION").into());
        m.insert("config_sha256".into(), hash.into());
        m.insert("status".into(), status.into());
        m.insert(
            "outputs".into(),
            toml::Value::Array(self.files.iter().map(|f| toml::Value::from(f.as_str())).collect()),
        );
        table.insert("manifest".into(), toml::Value::Table(m));
        let text = toml::to_string(&table).map_err(|e| Error::InvalidData(format!("manifest: {e}")))?;
        let path = self.dir.join("manifest.toml");
        std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Shortest round-trip form of a float.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
