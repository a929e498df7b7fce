//! Atomic file writes and the canonical JSON layout of workspace files.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

/// Env var: milliseconds to pause at the fault stage of every atomic write.
pub const FAULT_DELAY_ENV: &str = "SCS_FAULT_DELAY_MS";
/// Env var: where the pause happens, `mid_write` (default) or `before_rename`.
pub const FAULT_STAGE_ENV: &str = "SCS_FAULT_STAGE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    MidWrite,
    BeforeRename,
}

fn fault_pause(stage: Stage) {
    let Some(ms) = std::env::var(FAULT_DELAY_ENV).ok().and_then(|v| v.parse::<u64>().ok()) else {
        return;
    };
    let wanted = match std::env::var(FAULT_STAGE_ENV).as_deref() {
        Ok("before_rename") => Stage::BeforeRename,
        _ => Stage::MidWrite,
    };
    if wanted == stage {
        std::thread::sleep(Duration::from_millis(ms));
    }
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    // `Value` objects are BTreeMaps, so the round trip sorts keys
    let value = serde_json::to_value(value)?;
    let mut bytes = serde_json::to_vec_pretty(&value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `bytes` to a hidden temp file next to `path`, syncs it, then
/// renames it over `path`. Readers see either the old or the new content.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));

    let result = (|| {
        let mut f = File::create(&tmp)?;
        let half = bytes.len() / 2;
        f.write_all(&bytes[..half])?;
        f.flush()?;
        fault_pause(Stage::MidWrite);
        f.write_all(&bytes[half..])?;
        f.sync_all()?;
        drop(f);
        fault_pause(Stage::BeforeRename);
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result?;
    // persist the rename itself
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let bytes = to_json_bytes(value).map_err(io::Error::other)?;
    atomic_write(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_sorted_and_newline() {
        let v = serde_json::json!({"b": 1, "a": {"d": 2, "c": 3}});
        let s = String::from_utf8(to_json_bytes(&v).unwrap()).unwrap();
        assert_eq!(s, "{\n  \"a\": {\n    \"c\": 3,\n    \"d\": 2\n  },\n  \"b\": 1\n}\n");
    }

    #[test]
    fn replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        atomic_write(&p, b"old").unwrap();
        atomic_write(&p, b"new").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"new");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
