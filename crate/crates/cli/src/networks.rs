use std::fs;
use std::path::Path;

use crate::CliError;

/// Network documents shipped with the binary.
pub const BUNDLED: &[(&str, &str)] = &[
    ("star1.json", include_str!("../networks/star1.json")),
    ("star2.json", include_str!("../networks/star2.json")),
    ("star3.json", include_str!("../networks/star3.json")),
    ("ghz3-star.json", include_str!("../networks/ghz3-star.json")),
    ("hybrid-111.json", include_str!("../networks/hybrid-111.json")),
    ("ns-star2.json", include_str!("../networks/ns-star2.json")),
    ("bad-nb1.json", include_str!("../networks/bad-nb1.json")),
];

/// Reads `name` from `dir` when it exists there, otherwise the bundled copy.
pub fn load(name: &str, dir: Option<&Path>) -> Result<String, CliError> {
    if let Some(dir) = dir {
        let path = dir.join(name);
        if path.exists() {
            return fs::read_to_string(&path).map_err(|source| CliError::Io { path, source });
        }
    }
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| doc.to_string())
        .ok_or_else(|| CliError::Usage(format!("no bundled network named {name}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellnet_core::NetworkSpec;

    #[test]
    fn bundled_networks_parse() {
        for (name, doc) in BUNDLED {
            let spec = NetworkSpec::parse(doc).unwrap();
            let diags = spec.validate();
            if *name == "bad-nb1.json" {
                assert!(diags.iter().any(|d| d.code == "n_b"), "{diags:?}");
            } else {
                assert!(diags.is_empty(), "{name}: {diags:?}");
            }
        }
    }

    #[test]
    fn directory_overrides_bundled_copy() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("star1.json"), "{}").unwrap();
        assert_eq!(load("star1.json", Some(dir.path())).unwrap(), "{}");
        assert!(load("star2.json", Some(dir.path())).unwrap().contains("bell"));
        assert!(load("missing.json", None).is_err());
    }
}
