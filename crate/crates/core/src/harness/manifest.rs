use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;

/// A run manifest: ordered `key=value` lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        let mut m = Manifest::default();
        m.set("tool", env!("CARGO_PKG_NAME"));
        m.set("version", env!("CARGO_PKG_VERSION"));
        m
    }

    /// Sets `key`, replacing an earlier value. Newlines in values are escaped.
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string().replace('\n', "\\n");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn parse(text: &str) -> Manifest {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Manifest { entries }
    }
}

pub fn write_manifest<W: Write>(manifest: &Manifest, mut out: W) -> Result<()> {
    out.write_all(manifest.render().as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse() {
        let mut m = Manifest::new();
        m.set("model", "analytic").set("budgets", "100,1000").set("model", "poker");
        let text = m.render();
        assert!(text.starts_with("tool=nestmc\n"));
        assert!(text.contains("model=poker\nbudgets=100,1000\n"));
        assert_eq!(Manifest::parse(&text), m);
        assert_eq!(m.get("budgets"), Some("100,1000"));
    }
}
