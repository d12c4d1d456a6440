//! Time-tag files.
//!
//! Binary mode stores little-endian records of `(channel: u8, time_ps: i64)`,
//! nine bytes per tag. CSV mode is the equivalent `channel,time_ps` table
//! with a header line. Readers report the byte offset of the first corrupt
//! record.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::clock::TimeTag;

pub const BINARY_RECORD_BYTES: usize = 9;
pub const CSV_HEADER: &str = "channel,time_ps";

#[derive(Debug, thiserror::Error)]
pub enum TagIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt tag file at byte offset {offset}: {message}")]
    Corrupt { offset: u64, message: String },
}

pub fn write_binary<W: Write>(mut w: W, tags: &[TimeTag]) -> Result<(), TagIoError> {
    let mut buf = [0u8; BINARY_RECORD_BYTES];
    for tag in tags {
        buf[0] = tag.channel;
        buf[1..].copy_from_slice(&tag.time_ps.to_le_bytes());
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<TimeTag>, TagIoError> {
    let mut tags = Vec::new();
    let mut buf = [0u8; BINARY_RECORD_BYTES];
    let mut offset = 0u64;
    loop {
        let mut filled = 0usize;
        while filled < BINARY_RECORD_BYTES {
            let n = r.read(&mut buf[filled..])?;
            if n == 0 {
                break;
            }
            filled += n;
        }
        if filled == 0 {
            return Ok(tags);
        }
        if filled < BINARY_RECORD_BYTES {
            return Err(TagIoError::Corrupt {
                offset,
                message: format!("truncated record ({filled} of {BINARY_RECORD_BYTES} bytes)"),
            });
        }
        let time_ps = i64::from_le_bytes(buf[1..].try_into().expect("8 bytes"));
        if time_ps < 0 {
            return Err(TagIoError::Corrupt {
                offset,
                message: format!("negative timestamp {time_ps}"),
            });
        }
        tags.push(TimeTag::new(buf[0], time_ps));
        offset += BINARY_RECORD_BYTES as u64;
    }
}

pub fn write_csv<W: Write>(mut w: W, tags: &[TimeTag]) -> Result<(), TagIoError> {
    writeln!(w, "{CSV_HEADER}")?;
    for tag in tags {
        writeln!(w, "{},{}", tag.channel, tag.time_ps)?;
    }
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<TimeTag>, TagIoError> {
    let reader = BufReader::new(r);
    let mut tags = Vec::new();
    let mut offset = 0u64;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_bytes = line.len() as u64 + 1;
        let trimmed = line.trim();
        if i == 0 {
            if trimmed != CSV_HEADER {
                return Err(TagIoError::Corrupt {
                    offset,
                    message: format!("expected header '{CSV_HEADER}', found '{trimmed}'"),
                });
            }
            offset += line_bytes;
            continue;
        }
        if trimmed.is_empty() {
            offset += line_bytes;
            continue;
        }
        let mut parts = trimmed.split(',');
        let parse = |s: Option<&str>, what: &str, offset: u64| -> Result<i64, TagIoError> {
            s.ok_or_else(|| TagIoError::Corrupt {
                offset,
                message: format!("missing {what}"),
            })?
            .trim()
            .parse::<i64>()
            .map_err(|e| TagIoError::Corrupt {
                offset,
                message: format!("bad {what}: {e}"),
            })
        };
        let channel = parse(parts.next(), "channel", offset)?;
        let time_ps = parse(parts.next(), "time_ps", offset)?;
        if !(0..=255).contains(&channel) {
            return Err(TagIoError::Corrupt {
                offset,
                message: format!("channel {channel} out of range"),
            });
        }
        tags.push(TimeTag::new(channel as u8, time_ps));
        offset += line_bytes;
    }
    Ok(tags)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagFormat {
    Binary,
    Csv,
}

impl TagFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            TagFormat::Binary => "tags",
            TagFormat::Csv => "csv",
        }
    }
}

pub fn write_file(path: &Path, tags: &[TimeTag], format: TagFormat) -> Result<(), TagIoError> {
    let file = std::fs::File::create(path)?;
    let w = BufWriter::new(file);
    match format {
        TagFormat::Binary => write_binary(w, tags),
        TagFormat::Csv => write_csv(w, tags),
    }
}

/// Read a tag file, inferring the format from the extension (`.csv` is CSV,
/// anything else binary).
pub fn read_file(path: &Path) -> Result<Vec<TimeTag>, TagIoError> {
    let file = std::fs::File::open(path)?;
    let r = BufReader::new(file);
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_csv(r),
        _ => read_binary(r),
    }
}

/// Split a merged tag stream into per-channel streams.
pub fn split_channels(tags: &[TimeTag], channel_count: usize) -> Vec<Vec<TimeTag>> {
    let mut streams = vec![Vec::new(); channel_count];
    for tag in tags {
        if (tag.channel as usize) < channel_count {
            streams[tag.channel as usize].push(*tag);
        }
    }
    streams
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_corruption_reports_offset() {
        let tags = vec![TimeTag::new(0, 100), TimeTag::new(1, 200)];
        let mut bytes = Vec::new();
        write_binary(&mut bytes, &tags).unwrap();
        bytes.truncate(BINARY_RECORD_BYTES + 4); // cut the second record short
        let err = read_binary(&bytes[..]).unwrap_err();
        match err {
            TagIoError::Corrupt { offset, .. } => {
                assert_eq!(offset, BINARY_RECORD_BYTES as u64)
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let tags = vec![TimeTag::new(3, 42), TimeTag::new(0, 9_000_000_000_000)];
        let mut bytes = Vec::new();
        write_csv(&mut bytes, &tags).unwrap();
        assert_eq!(read_csv(&bytes[..]).unwrap(), tags);

        let bad = b"channel,time_ps\n1,abc\n";
        let err = read_csv(&bad[..]).unwrap_err();
        match err {
            TagIoError::Corrupt { offset, .. } => assert_eq!(offset, 16),
            other => panic!("unexpected error {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn binary_round_trip(raw in proptest::collection::vec((0u8..16, 0i64..i64::MAX / 2), 0..200)) {
            let tags: Vec<TimeTag> = raw.into_iter().map(|(c, t)| TimeTag::new(c, t)).collect();
            let mut bytes = Vec::new();
            write_binary(&mut bytes, &tags).unwrap();
            prop_assert_eq!(bytes.len(), tags.len() * BINARY_RECORD_BYTES);
            prop_assert_eq!(read_binary(&bytes[..]).unwrap(), tags);
        }
    }
}
