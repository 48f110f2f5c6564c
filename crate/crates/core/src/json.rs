//! File formats and canonical JSON output.
//!
//! Canonical output sorts object keys and prints every float with 17
//! significant digits, so equal values always produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::problem::{FullProblem, ProblemL, SigmaFunction};
use crate::reconstruct::Reconstruction;
use crate::regular::RegularResult;

/// Contents of `problem.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub sigma: SigmaFunction,
    pub r1: Polynomial,
    pub r2: Polynomial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<Polynomial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<Polynomial>,
}

impl ProblemFile {
    pub fn problem(&self) -> Result<ProblemL> {
        ProblemL::new(self.sigma.clone(), self.r1.clone(), self.r2.clone())
    }

    /// The problem with the left boundary condition, when `p1` and `p2` are given.
    pub fn full(&self) -> Result<Option<FullProblem>> {
        match (&self.p1, &self.p2) {
            (Some(p1), Some(p2)) => Ok(Some(FullProblem::new(p1.clone(), p2.clone(), self.problem()?)?)),
            (None, None) => Ok(None),
            _ => Err(Error::InvalidInput("p1 and p2 must be given together".into())),
        }
    }
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let f = n.as_f64().unwrap();
                let _ = write!(out, "{f:.16e}");
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, x);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push(':');
                write_value(out, &m[*k]);
            }
            out.push('}');
        }
    }
}

/// Canonical JSON text of any serializable value, newline-terminated.
pub fn to_canonical_string<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let value = serde_json::to_value(v)?;
    let mut s = String::new();
    write_value(&mut s, &value);
    s.push('\n');
    Ok(s)
}

/// Writes to a temporary sibling file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_canonical<T: Serialize + ?Sized>(path: &Path, v: &T) -> Result<()> {
    write_atomic(path, &to_canonical_string(v)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// The `reconstruction.json` document.
pub fn reconstruction_value(rec: &Reconstruction, regular: Option<&RegularResult>) -> Result<Value> {
    let mut v = serde_json::json!({
        "sigma": {
            "x": rec.sigma.xs(),
            "values": rec.sigma.values,
        },
        "r1": rec.r1,
        "r2": rec.r2,
        "contour": rec.contour,
        "diagnostics": rec.diagnostics,
    });
    if let Some(reg) = regular {
        v["regular"] = serde_json::json!({
            "q": { "x": reg.q.xs(), "values": reg.q.values },
            "summary": reg.summary,
        });
    }
    Ok(v)
}
