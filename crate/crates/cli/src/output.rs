use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::commands::Produced;
use crate::{CliError, Command, Outcome};

pub const MANIFEST: &str = "manifest.json";

pub fn json_bytes(value: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("json values always serialize");
    bytes.push(b'\n');
    bytes
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write every produced file, then the manifest, from this thread only.
pub fn write_all(
    dir: &Path,
    command: Command,
    config: &[u8],
    produced: Produced,
) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut names = Vec::with_capacity(produced.files.len() + 1);
    for (name, bytes) in &produced.files {
        write(dir, name, bytes)?;
        names.push(name.clone());
    }
    let manifest = json!({
        "command": command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": hex(&Sha256::digest(config)),
        "exit_code": produced.exit_code,
        "files": names,
        "warnings": produced.warnings,
    });
    write(dir, MANIFEST, &json_bytes(&manifest))?;
    names.push(MANIFEST.to_string());
    Ok(Outcome {
        exit_code: produced.exit_code,
        files: names,
        warnings: produced.warnings,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_digest_of_empty_input() {
        assert_eq!(
            hex(&Sha256::digest(b"")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
