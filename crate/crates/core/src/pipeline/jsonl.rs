use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::marker::PhantomData;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A skipped input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedLine {
    pub line: usize,
    pub message: String,
}

/// Lazily parses one JSON value per line. Blank lines are ignored.
///
/// Malformed lines come out as [`JsonlError::Malformed`] with their 1-based
/// line number, so callers decide whether to skip or stop.
pub struct JsonlLines<R, T> {
    reader: R,
    line: usize,
    buf: String,
    _marker: PhantomData<fn() -> T>,
}

impl<R: BufRead, T: DeserializeOwned> JsonlLines<R, T> {
    pub fn new(reader: R) -> Self {
        Self {
            reader,
            line: 0,
            buf: String::new(),
            _marker: PhantomData,
        }
    }
}

impl<R: BufRead, T: DeserializeOwned> Iterator for JsonlLines<R, T> {
    type Item = Result<T, JsonlError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line += 1;
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            return Some(serde_json::from_str(text).map_err(|e| JsonlError::Malformed {
                line: self.line,
                message: e.to_string(),
            }));
        }
    }
}

/// Opens `path` for streaming; `-` reads standard input.
pub fn stream_jsonl<T: DeserializeOwned>(path: &Path) -> io::Result<JsonlLines<Box<dyn BufRead>, T>> {
    let reader: Box<dyn BufRead> = if path.as_os_str() == "-" {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(File::open(path)?))
    };
    Ok(JsonlLines::new(reader))
}

/// Records plus the lines that could not be parsed.
#[derive(Debug)]
pub struct JsonlRead<T> {
    pub records: Vec<T>,
    pub malformed: Vec<MalformedLine>,
}

/// Reads every record, skipping malformed lines with a warning.
pub fn read_jsonl<R: BufRead, T: DeserializeOwned>(reader: R) -> Result<JsonlRead<T>, io::Error> {
    let mut out = JsonlRead {
        records: Vec::new(),
        malformed: Vec::new(),
    };
    for item in JsonlLines::new(reader) {
        match item {
            Ok(r) => out.records.push(r),
            Err(JsonlError::Malformed { line, message }) => {
                tracing::warn!(line, %message, "skipping malformed JSONL line");
                out.malformed.push(MalformedLine { line, message });
            }
            Err(JsonlError::Io(e)) => return Err(e),
        }
    }
    Ok(out)
}

/// Writes one record as a single newline-terminated line.
///
/// Struct fields keep their declaration order and map keys are sorted, so
/// output is byte-stable.
pub fn write_record<W: Write + ?Sized, T: Serialize + ?Sized>(writer: &mut W, record: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *writer, record)?;
    writer.write_all(b"\n")
}

pub fn write_jsonl<W, T, I>(writer: &mut W, records: I) -> io::Result<()>
where
    W: Write,
    T: Serialize,
    I: IntoIterator<Item = T>,
{
    for record in records {
        write_record(writer, &record)?;
    }
    Ok(())
}
