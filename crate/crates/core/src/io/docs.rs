//! JSON documents, TSV tables and the run manifest.
//!
//! Every JSON document is an object with `schema`, `tool_version` and
//! `config_hash` next to its payload fields. Spectra are two-sided and
//! normalized to shot noise (vacuum = 1); a one-sided density is twice that.
//! Frequencies in documents are angular (rad/s) unless a key ends in `_hz`.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::config::hex;
use crate::error::{Error, Result};

pub const SPECTRUM_SCHEMA: &str = "omthermo.spectrum/1";
pub const SET_SCHEMA: &str = "omthermo.cross-spectra-set/1";
pub const REPORT_SCHEMA: &str = "omthermo.report/1";
pub const MANIFEST_SCHEMA: &str = "omthermo.manifest/1";
pub const TABLE_SCHEMA: &str = "omthermo.table/1";

pub fn to_document<T: Serialize>(schema: &str, config_hash: &str, body: &T) -> Result<Value> {
    let v = serde_json::to_value(body).map_err(|e| Error::format(schema, e.to_string()))?;
    let Value::Object(fields) = v else {
        return Err(Error::format(schema, "payload is not an object"));
    };
    let mut m = Map::new();
    m.insert("schema".into(), schema.into());
    m.insert("tool_version".into(), crate::TOOL_VERSION.into());
    m.insert("config_hash".into(), config_hash.into());
    for (k, v) in fields {
        if m.contains_key(&k) {
            return Err(Error::format(schema, format!("payload key `{k}` is reserved")));
        }
        m.insert(k, v);
    }
    Ok(Value::Object(m))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, schema: &str, config_hash: &str, body: &T) -> Result<()> {
    let doc = to_document(schema, config_hash, body)?;
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::format(schema, e.to_string()))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// A parsed document whose envelope has been checked.
#[derive(Debug, Clone)]
pub struct Document {
    pub schema: String,
    pub config_hash: String,
    pub tool_version: String,
    pub body: Value,
}

impl Document {
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::format(context, e.to_string()))?;
        let Value::Object(m) = v else {
            return Err(Error::format(context, "top level is not an object"));
        };
        let get = |k: &str| -> Result<String> {
            match m.get(k) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(_) => Err(Error::format(context, format!("key `{k}` is not a string"))),
                None => Err(Error::format(context, format!("missing key `{k}`"))),
            }
        };
        Ok(Document {
            schema: get("schema")?,
            config_hash: get("config_hash")?,
            tool_version: get("tool_version")?,
            body: Value::Object(m),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Deserializes the payload; errors name the offending key.
    pub fn payload<T: DeserializeOwned>(&self, expect: &str) -> Result<T> {
        if self.schema != expect {
            return Err(Error::format(
                "schema",
                format!("expected `{expect}`, found `{}`", self.schema),
            ));
        }
        let de = self.body.clone();
        serde_path_error(de).map_err(|(path, msg)| Error::format(self.schema.clone(), format!("key `{path}`: {msg}")))
    }
}

/// Deserialization with the JSON path of the first failure.
fn serde_path_error<T: DeserializeOwned>(v: Value) -> std::result::Result<T, (String, String)> {
    match T::deserialize(&v) {
        Ok(t) => Ok(t),
        Err(e) => {
            let msg = e.to_string();
            // serde reports missing/unknown fields by name; point at it
            let key = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "<root>".into());
            Err((key, msg))
        }
    }
}

/// A column of a TSV table: name and element type.
pub type Column<'a> = (&'a str, &'a str);

/// Tab-separated table with `#` metadata lines and a `name:type` header.
pub fn tsv_string(config_hash: &str, columns: &[Column], rows: &[Vec<f64>]) -> String {
    let mut s = format!(
        "# schema: {TABLE_SCHEMA}\n# tool_version: {}\n# config_hash: {config_hash}\n",
        crate::TOOL_VERSION
    );
    let head: Vec<String> = columns.iter().map(|(n, t)| format!("{n}:{t}")).collect();
    s.push_str(&head.join("\t"));
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&cells.join("\t"));
        s.push('\n');
    }
    s
}

pub fn write_tsv(path: &Path, config_hash: &str, columns: &[Column], rows: &[Vec<f64>]) -> Result<()> {
    write_bytes(path, tsv_string(config_hash, columns, rows).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub kind: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: String,
    pub files: Vec<ManifestEntry>,
}

pub fn file_sha256(path: &Path) -> Result<(u64, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok((bytes.len() as u64, hex(&Sha256::digest(&bytes))))
}

impl Manifest {
    pub fn new(config_canonical: String) -> Self {
        Manifest {
            config: config_canonical,
            files: vec![],
        }
    }

    /// Records `path` (relative to `root`) with its current hash.
    pub fn add(&mut self, root: &Path, path: &Path, kind: &str) -> Result<()> {
        let (bytes, sha256) = file_sha256(path)?;
        let rel: PathBuf = path.strip_prefix(root).unwrap_or(path).to_path_buf();
        self.files.push(ManifestEntry {
            path: rel.to_string_lossy().replace('\\', "/"),
            kind: kind.into(),
            bytes,
            sha256,
        });
        Ok(())
    }

    /// Errors on the first listed file whose content changed.
    pub fn verify(&self, root: &Path) -> Result<()> {
        for f in &self.files {
            let (_, h) = file_sha256(&root.join(&f.path))?;
            if h != f.sha256 {
                return Err(Error::format("manifest", format!("{} changed since it was written", f.path)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ComplexSpectrum, Norm};
    use num_complex::Complex64;

    #[test]
    fn envelope_and_payload() {
        let s = ComplexSpectrum::new(vec![1.0, 2.0], vec![Complex64::new(1.0, -0.5); 2], Norm::ShotNoise).unwrap();
        let doc = to_document(SPECTRUM_SCHEMA, "h", &s).unwrap();
        let text = serde_json::to_string(&doc).unwrap();
        let d = Document::parse(&text, "t").unwrap();
        assert_eq!(d.config_hash, "h");
        let back: ComplexSpectrum = d.payload(SPECTRUM_SCHEMA).unwrap();
        assert_eq!(back, s);
        assert!(d.payload::<ComplexSpectrum>(SET_SCHEMA).is_err());
    }

    #[test]
    fn errors_name_the_key() {
        let e = Document::parse(r#"{"config_hash":"h","tool_version":"v"}"#, "t").unwrap_err();
        assert!(e.to_string().contains("`schema`"), "{e}");
        let d = Document::parse(
            &format!(r#"{{"schema":"{SPECTRUM_SCHEMA}","config_hash":"h","tool_version":"v","freqs":[1.0]}}"#),
            "t",
        )
        .unwrap();
        let e = d.payload::<ComplexSpectrum>(SPECTRUM_SCHEMA).unwrap_err();
        assert!(e.to_string().contains("key `values`"), "{e}");
    }

    #[test]
    fn tsv_header_is_typed() {
        let t = tsv_string("h", &[("freq_hz", "f64"), ("re", "f64")], &[vec![1.0, 0.5]]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[3], "freq_hz:f64\tre:f64");
        assert_eq!(lines[4], "1.0\t0.5");
        assert!(lines[2].ends_with("h"));
    }
}
