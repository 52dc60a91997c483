use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// Writes `contents` to `dir/name` through a temporary file and a rename, so a
/// reader never sees a partially written file.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, dir.join(name))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// A `key=value` report with a leading title comment.
pub struct Report {
    text: String,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Self { text: format!("# {title}\n") }
    }

    pub fn kv(&mut self, key: &str, value: impl AsRef<str>) -> &mut Self {
        self.text.push_str(key);
        self.text.push('=');
        self.text.push_str(value.as_ref());
        self.text.push('\n');
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.kv(key, gapcav::format::fmt6(value))
    }

    pub fn section(&mut self, title: &str) -> &mut Self {
        self.text.push_str(&format!("\n# {title}\n"));
        self
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
