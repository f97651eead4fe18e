use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use season_info::report::round_sig;

use crate::CliError;

/// A file's bytes staged in a temporary file next to its destination.
pub struct Staged {
    file: NamedTempFile,
    dest: PathBuf,
}

pub fn stage(dest: &Path, bytes: &[u8]) -> Result<Staged, CliError> {
    let dir = match dest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |source| CliError::Io { path: dest.to_path_buf(), source };
    let mut file = NamedTempFile::new_in(dir).map_err(io)?;
    file.write_all(bytes).map_err(io)?;
    file.as_file().sync_all().map_err(io)?;
    Ok(Staged { file, dest: dest.to_path_buf() })
}

/// Move every staged file into place. Nothing is renamed unless all files were staged.
pub fn commit(staged: Vec<Staged>) -> Result<(), CliError> {
    for s in staged {
        s.file
            .persist(&s.dest)
            .map_err(|e| CliError::Io { path: s.dest.clone(), source: e.error })?;
    }
    Ok(())
}

/// Serialize to a JSON value with every floating-point number rounded to six
/// significant digits.
pub fn rounded_json<T: Serialize>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("report types serialize to JSON");
    round_numbers(&mut v);
    v
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            *v = Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    out.push(b'\n');
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
