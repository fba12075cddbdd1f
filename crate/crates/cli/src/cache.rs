//! JSON result cache under `$PTW_CACHE`, one file per `(op, p, k)` holding values keyed
//! by cell. Files are published by rename, so readers never see partial writes.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn from_env() -> Self {
        Cache { dir: std::env::var_os("PTW_CACHE").map(PathBuf::from) }
    }

    fn path(&self, op: &str, p: u64, k: u32) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{op}-p{p}-k{k}.json")))
    }

    pub fn load(&self, op: &str, p: u64, k: u32) -> Option<BTreeMap<String, serde_json::Value>> {
        let text = fs::read_to_string(self.path(op, p, k)?).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn store(&self, op: &str, p: u64, k: u32, cells: &BTreeMap<String, serde_json::Value>) -> std::io::Result<()> {
        let Some(path) = self.path(op, p, k) else { return Ok(()) };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_string_pretty(cells)?)?;
        fs::rename(tmp, path)
    }
}
