//! Output files. Every CSV starts with a comment line carrying the config
//! hash and seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

pub struct Output {
    dir: PathBuf,
    stamp: String,
}

impl Output {
    /// Creates `dir` and records the effective config in it.
    pub fn new(dir: &Path, cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
        Ok(Output {
            dir: dir.to_path_buf(),
            stamp: format!("# config_sha256={} seed={}\n", cfg.hash(), cfg.seed),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
        let mut f = BufWriter::new(File::create(self.path(name))?);
        f.write_all(self.stamp.as_bytes())?;
        Ok(csv::Writer::from_writer(f))
    }

    /// Writes all rows at once.
    pub fn write_rows<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = self.csv(name)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        log::info!("wrote {}", self.path(name).display());
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut f = BufWriter::new(File::create(self.path(name))?);
        serde_json::to_writer_pretty(&mut f, value)?;
        f.write_all(b"\n")?;
        f.flush()?;
        log::info!("wrote {}", self.path(name).display());
        Ok(())
    }
}

