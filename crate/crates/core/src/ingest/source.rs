//! Line sources and the batching reader that feeds the shard workers.

use std::fs::File;
use std::io::{BufRead, BufReader, Cursor, Read};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use flate2::read::MultiGzDecoder;

use crate::error::{Error, Result};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];
const BATCH_BYTES: usize = 1 << 20;

/// One shard of JSON Lines input: a file on disk (plain or gzip) or a buffer.
#[derive(Debug, Clone)]
pub enum LineSource {
    Path(PathBuf),
    Memory { name: String, data: Arc<[u8]> },
}

impl LineSource {
    pub fn memory(name: impl Into<String>, data: impl Into<Arc<[u8]>>) -> Self {
        LineSource::Memory {
            name: name.into(),
            data: data.into(),
        }
    }

    pub fn display_path(&self) -> PathBuf {
        match self {
            LineSource::Path(p) => p.clone(),
            LineSource::Memory { name, .. } => PathBuf::from(name),
        }
    }

    /// Opens the source, transparently decompressing gzip by magic bytes.
    pub fn open(&self) -> Result<Box<dyn BufRead + Send>> {
        match self {
            LineSource::Path(path) => open_path(path),
            LineSource::Memory { data, .. } => {
                let cursor = Cursor::new(Arc::clone(data));
                if data.starts_with(&GZIP_MAGIC) {
                    Ok(Box::new(BufReader::new(MultiGzDecoder::new(cursor))))
                } else {
                    Ok(Box::new(cursor))
                }
            }
        }
    }
}

fn open_path(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let open_err = |source| Error::Open {
        path: path.to_path_buf(),
        source,
    };
    let mut file = File::open(path).map_err(open_err)?;
    let mut magic = [0u8; 2];
    let n = read_prefix(&mut file, &mut magic).map_err(open_err)?;
    let file = File::open(path).map_err(open_err)?;
    if n == 2 && magic == GZIP_MAGIC {
        Ok(Box::new(BufReader::with_capacity(
            1 << 20,
            MultiGzDecoder::new(BufReader::new(file)),
        )))
    } else {
        Ok(Box::new(BufReader::with_capacity(1 << 20, file)))
    }
}

fn read_prefix(file: &mut File, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match file.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}

/// A run of whole lines from one source.
#[derive(Debug)]
pub struct Batch {
    pub source: usize,
    /// 1-based number of the first line in `data`.
    pub first_line: u64,
    pub data: Vec<u8>,
}

impl Batch {
    /// Yields `(line_number, bytes)` with the line terminator removed.
    pub fn lines(&self) -> impl Iterator<Item = (u64, &[u8])> {
        let data = self.data.strip_suffix(b"\n").unwrap_or(&self.data);
        let first = self.first_line;
        let empty = self.data.is_empty();
        data.split(|&b| b == b'\n')
            .enumerate()
            .filter(move |_| !empty)
            .map(move |(i, line)| (first + i as u64, line.strip_suffix(b"\r").unwrap_or(line)))
    }
}

enum Pending {
    Source(LineSource),
    Reader(PathBuf, Box<dyn BufRead + Send>),
}

/// Reads sources one after another and cuts them into [`Batch`]es.
pub struct BatchReader {
    pending: std::vec::IntoIter<Pending>,
    current: Option<(usize, PathBuf, Box<dyn BufRead + Send>)>,
    next_index: usize,
    line: u64,
    failed: bool,
}

impl BatchReader {
    pub fn new(sources: &[LineSource]) -> Self {
        Self::from_pending(sources.iter().cloned().map(Pending::Source).collect())
    }

    /// Batches an already-open stream.
    pub fn from_reader(name: impl Into<PathBuf>, reader: Box<dyn BufRead + Send>) -> Self {
        Self::from_pending(vec![Pending::Reader(name.into(), reader)])
    }

    fn from_pending(pending: Vec<Pending>) -> Self {
        Self {
            pending: pending.into_iter(),
            current: None,
            next_index: 0,
            line: 0,
            failed: false,
        }
    }
}

impl Iterator for BatchReader {
    type Item = Result<Batch>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            if self.current.is_none() {
                let idx = self.next_index;
                let pending = self.pending.next()?;
                self.next_index += 1;
                self.line = 0;
                match pending {
                    Pending::Reader(name, reader) => self.current = Some((idx, name, reader)),
                    Pending::Source(source) => match source.open() {
                        Ok(reader) => self.current = Some((idx, source.display_path(), reader)),
                        Err(e) => {
                            self.failed = true;
                            return Some(Err(e));
                        }
                    },
                }
            }
            let (idx, path, reader) = self.current.as_mut().expect("opened above");
            let idx = *idx;
            let mut data = Vec::with_capacity(BATCH_BYTES + 4096);
            let first_line = self.line + 1;
            while data.len() < BATCH_BYTES {
                match reader.read_until(b'\n', &mut data) {
                    Ok(0) => break,
                    Ok(_) => self.line += 1,
                    Err(source) => {
                        self.failed = true;
                        return Some(Err(Error::Io {
                            path: path.clone(),
                            line: self.line + 1,
                            source,
                        }));
                    }
                }
            }
            if data.is_empty() {
                self.current = None;
                continue;
            }
            if data.len() < BATCH_BYTES {
                // short read means end of this source
                self.current = None;
            }
            return Some(Ok(Batch {
                source: idx,
                first_line,
                data,
            }));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn collect_lines(sources: &[LineSource]) -> Vec<(usize, u64, String)> {
        let mut out = vec![];
        for batch in BatchReader::new(sources) {
            let batch = batch.unwrap();
            for (n, line) in batch.lines() {
                out.push((batch.source, n, String::from_utf8(line.to_vec()).unwrap()));
            }
        }
        out
    }

    #[test]
    fn numbers_lines_per_source() {
        let sources = vec![
            LineSource::memory("a", b"x\ny\r\n".to_vec()),
            LineSource::memory("b", b"".to_vec()),
            LineSource::memory("c", b"z".to_vec()),
        ];
        assert_eq!(
            collect_lines(&sources),
            vec![
                (0, 1, "x".to_string()),
                (0, 2, "y".to_string()),
                (2, 1, "z".to_string())
            ]
        );
    }

    #[test]
    fn reads_gzip_by_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shard.jsonl.gz");
        let mut enc =
            flate2::write::GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::fast());
        enc.write_all(b"one\ntwo\n").unwrap();
        enc.finish().unwrap();
        let got = collect_lines(&[LineSource::Path(path)]);
        assert_eq!(got.len(), 2);
        assert_eq!(got[1].2, "two");
    }

    #[test]
    fn missing_file_is_open_error() {
        let mut reader = BatchReader::new(&[]);
        assert!(reader.next().is_none());
        let sources = [LineSource::Path("/nonexistent/shard.jsonl".into())];
        let mut reader = BatchReader::new(&sources);
        assert!(matches!(reader.next(), Some(Err(Error::Open { .. }))));
        assert!(reader.next().is_none());
    }
}
