//! Project templates for `leanarch new`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::model::quote_string;
use crate::project::MANIFEST_NAME;

pub const FUNCTIONAL_PROFILE: &str = include_str!("../profiles/functional.prof");
pub const PHYSICAL_PROFILE: &str = include_str!("../profiles/physical.prof");

/// Relative path and content of every file in a new project.
pub fn scaffold_files(name: &str) -> Vec<(String, String)> {
    let manifest = format!(
        r#"project {} {{
  l0 system
  levels [aircraft, system, item]
  profiles ["profiles/functional.prof", "profiles/physical.prof"]
  models ["models/functional.arch", "models/physical.arch"]
  requirements ["requirements/system.req"]
  links ["requirements/links.req"]
}}
"#,
        quote_string(name)
    );
    vec![
        (MANIFEST_NAME.to_string(), manifest),
        ("profiles/functional.prof".into(), FUNCTIONAL_PROFILE.into()),
        ("profiles/physical.prof".into(), PHYSICAL_PROFILE.into()),
        (
            "models/functional.arch".into(),
            "model Func kind functional level system uses Functional {\n}\n".into(),
        ),
        (
            "models/physical.arch".into(),
            "model Phys kind physical level system uses Physical {\n}\n".into(),
        ),
        (
            "requirements/system.req".into(),
            "// requirement SYS-REQ-001 level system type functional {\n//   text = \"...\"\n// }\n".into(),
        ),
        (
            "requirements/links.req".into(),
            "// link SYS-REQ-001 satisfied_by \"Func.Some Function\"\n".into(),
        ),
    ]
}

/// Write a new project into `dir`. Existing files are never overwritten.
pub fn write_scaffold(dir: &Path, name: &str) -> io::Result<Vec<PathBuf>> {
    let files = scaffold_files(name);
    if let Some((rel, _)) = files.iter().find(|(rel, _)| dir.join(rel).exists()) {
        return Err(io::Error::new(io::ErrorKind::AlreadyExists, format!("{} already exists", dir.join(rel).display())));
    }
    let mut written = Vec::new();
    for (rel, content) in files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, content)?;
        written.push(path);
    }
    Ok(written)
}
