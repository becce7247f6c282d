//! Binary record files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic    8 bytes  "OMTREC\0\x01"
//! hlen     u32      length of the JSON header
//! header   hlen     {schema, tool_version, config_hash, n_samples, meta}
//! channels carrier, sideband_i, sideband_q in turn; each is split into
//!          chunks of CHUNK f32 samples, every chunk followed by the first
//!          8 bytes of its SHA-256
//! ```

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::synth::{PhotocurrentRecord, RecordMeta};

pub const MAGIC: &[u8; 8] = b"OMTREC\0\x01";
pub const CHUNK: usize = 65536;
pub const RECORD_SCHEMA: &str = "omthermo.record/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub schema: String,
    pub tool_version: String,
    pub config_hash: String,
    pub n_samples: usize,
    pub meta: RecordMeta,
}

fn chunk_sum(bytes: &[u8]) -> [u8; 8] {
    let d = Sha256::digest(bytes);
    let mut out = [0u8; 8];
    out.copy_from_slice(&d[..8]);
    out
}

pub fn encode_record(rec: &PhotocurrentRecord, config_hash: &str) -> Result<Vec<u8>> {
    rec.check()?;
    let header = RecordHeader {
        schema: RECORD_SCHEMA.into(),
        tool_version: crate::TOOL_VERSION.into(),
        config_hash: config_hash.into(),
        n_samples: rec.len(),
        meta: rec.meta.clone(),
    };
    let h = serde_json::to_vec(&header).map_err(|e| Error::format("record header", e.to_string()))?;
    let mut out = Vec::with_capacity(12 + h.len() + rec.len() * 12 + (rec.len() / CHUNK + 1) * 24);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(h.len() as u32).to_le_bytes());
    out.extend_from_slice(&h);
    for ch in [&rec.carrier, &rec.sideband_i, &rec.sideband_q] {
        for chunk in ch.chunks(CHUNK) {
            let start = out.len();
            for v in chunk {
                out.extend_from_slice(&v.to_le_bytes());
            }
            let sum = chunk_sum(&out[start..]);
            out.extend_from_slice(&sum);
        }
    }
    Ok(out)
}

fn take<'a>(buf: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if buf.len() < n {
        return Err(Error::format("record", format!("truncated in {what}")));
    }
    let (a, b) = buf.split_at(n);
    *buf = b;
    Ok(a)
}

pub fn decode_record(bytes: &[u8]) -> Result<(RecordHeader, PhotocurrentRecord)> {
    let mut buf = bytes;
    if take(&mut buf, 8, "magic")? != MAGIC {
        return Err(Error::format("record", "bad magic (not a record file or unsupported version)"));
    }
    let hlen = u32::from_le_bytes(take(&mut buf, 4, "header length")?.try_into().unwrap()) as usize;
    let header: RecordHeader = serde_json::from_slice(take(&mut buf, hlen, "header")?)
        .map_err(|e| Error::format("record header", e.to_string()))?;
    if header.schema != RECORD_SCHEMA {
        return Err(Error::format("record header", format!("schema `{}` not supported", header.schema)));
    }
    let n = header.n_samples;
    let mut channels: Vec<Vec<f32>> = Vec::with_capacity(3);
    for name in ["carrier", "sideband_i", "sideband_q"] {
        let mut ch = Vec::with_capacity(n);
        let mut left = n;
        let mut index = 0;
        while left > 0 {
            let m = left.min(CHUNK);
            let data = take(&mut buf, 4 * m, name)?;
            let sum = take(&mut buf, 8, name)?;
            if chunk_sum(data) != sum {
                return Err(Error::format("record", format!("checksum mismatch in {name} chunk {index}")));
            }
            ch.extend(data.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())));
            left -= m;
            index += 1;
        }
        channels.push(ch);
    }
    if !buf.is_empty() {
        return Err(Error::format("record", format!("{} trailing bytes", buf.len())));
    }
    let sideband_q = channels.pop().unwrap();
    let sideband_i = channels.pop().unwrap();
    let carrier = channels.pop().unwrap();
    let rec = PhotocurrentRecord {
        carrier,
        sideband_i,
        sideband_q,
        meta: header.meta.clone(),
    };
    rec.check()?;
    Ok((header, rec))
}

pub fn write_record(path: &Path, rec: &PhotocurrentRecord, config_hash: &str) -> Result<()> {
    let bytes = encode_record(rec, config_hash)?;
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn read_record(path: &Path) -> Result<(RecordHeader, PhotocurrentRecord)> {
    let mut bytes = vec![];
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_record(&bytes).map_err(|e| match e {
        Error::Format { context, reason } => Error::format(format!("{} ({})", context, path.display()), reason),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DeviceParams, ProbeParams};
    use crate::synth::{shot_noise_record, RecordOptions, SynthConfig};

    fn small() -> PhotocurrentRecord {
        let p = DeviceParams::default();
        let mut s = SynthConfig::new(&p, 0.0, 5);
        s.duration = (CHUNK as f64 * 1.5) / s.sample_rate;
        shot_noise_record(&p, &ProbeParams::default(), &RecordOptions::new(s)).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let rec = small();
        let bytes = encode_record(&rec, "abc").unwrap();
        let (h, back) = decode_record(&bytes).unwrap();
        assert_eq!(h.config_hash, "abc");
        assert_eq!(h.tool_version, crate::TOOL_VERSION);
        assert_eq!(back, rec);
        assert_eq!(PhotocurrentRecord::regenerate(&h.meta).unwrap(), rec);
    }

    #[test]
    fn corruption_is_located() {
        let rec = small();
        let mut bytes = encode_record(&rec, "abc").unwrap();
        let n = bytes.len();
        bytes[n - 100] ^= 1;
        let err = decode_record(&bytes).unwrap_err().to_string();
        assert!(err.contains("sideband_q chunk 1"), "{err}");
        assert!(decode_record(&bytes[..n - 3]).is_err());
        assert!(decode_record(b"NOTAREC!").is_err());
    }
}
