//! Which files count as source code.

use std::collections::BTreeSet;

/// Extensions treated as source code unless overridden.
pub const DEFAULT_SOURCE_EXTENSIONS: &[&str] = &[
    "c", "h", "cc", "cpp", "hpp", "java", "py", "js", "ts", "go", "rs", "rb", "php", "cs", "kt",
    "swift", "scala", "m", "sh",
];

/// Extension allowlist deciding which files enter similarity scans and
/// repository comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFilter {
    extensions: BTreeSet<String>,
}

impl Default for SourceFilter {
    fn default() -> Self {
        SourceFilter::new(DEFAULT_SOURCE_EXTENSIONS.iter().copied())
    }
}

impl SourceFilter {
    pub fn new<S: AsRef<str>>(extensions: impl IntoIterator<Item = S>) -> Self {
        SourceFilter {
            extensions: extensions
                .into_iter()
                .map(|e| e.as_ref().trim_start_matches('.').to_ascii_lowercase())
                .filter(|e| !e.is_empty())
                .collect(),
        }
    }

    pub fn extension_of(path: &str) -> Option<String> {
        let name = path.rsplit('/').next().unwrap_or(path);
        name.rsplit_once('.')
            .filter(|(stem, _)| !stem.is_empty())
            .map(|(_, ext)| ext.to_ascii_lowercase())
    }

    pub fn is_source(&self, path: &str) -> bool {
        Self::extension_of(path).is_some_and(|e| self.extensions.contains(&e))
    }

    pub fn extensions(&self) -> impl Iterator<Item = &str> {
        self.extensions.iter().map(String::as_str)
    }
}
