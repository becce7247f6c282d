//! Configuration, file formats and plots.

mod config;
mod docs;
mod record_file;
mod svg;
mod units;

pub use config::{hex, RunConfig, ThermoMethod};
pub use docs::{
    file_sha256, to_document, tsv_string, write_json, write_tsv, Column, Document, Manifest, ManifestEntry, MANIFEST_SCHEMA,
    REPORT_SCHEMA, SET_SCHEMA, SPECTRUM_SCHEMA, TABLE_SCHEMA,
};
pub use record_file::{decode_record, encode_record, read_record, write_record, RecordHeader, CHUNK, RECORD_SCHEMA};
pub use units::{format_quantity, parse_quantity, Kind};
pub use svg::{Plot, Style, Trace};
