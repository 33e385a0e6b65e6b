//! JSON and CSV writers. JSON reports carry `"schema": 1` and nothing that
//! depends on the run (no timestamps, no wall times), so identical configs
//! give byte-identical files.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, R> {
    schema: u32,
    kind: &'a str,
    #[serde(flatten)]
    body: &'a R,
}

pub fn write_json<R: Serialize>(path: &Path, kind: &str, body: &R) -> io::Result<()> {
    let env = Envelope { schema: SCHEMA, kind, body };
    let mut text = serde_json::to_string_pretty(&env).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

pub fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r).map_err(io::Error::other)?;
    }
    w.flush()
}
