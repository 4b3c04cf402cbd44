//! Readers and writers for word2vec (binary and text) and GloVe text files.
//!
//! All formats store `f32` values; they are promoted to `f64` on load and
//! rounded back to `f32` on write.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use byteorder::{ByteOrder, LittleEndian, WriteBytesExt};

use crate::embedding::Embedding;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Word2VecBinary,
    Word2VecText,
    GloveText,
    /// Detect from the file contents. Only valid for loading.
    Auto,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word2vec-binary" | "bin" => Ok(Format::Word2VecBinary),
            "word2vec-text" | "txt" => Ok(Format::Word2VecText),
            "glove-text" | "glove" => Ok(Format::GloveText),
            "auto" => Ok(Format::Auto),
            other => Err(Error::InvalidArgument(format!("unknown embedding format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Word2VecBinary => "word2vec-binary",
            Format::Word2VecText => "word2vec-text",
            Format::GloveText => "glove-text",
            Format::Auto => "auto",
        })
    }
}

pub fn load_embedding(path: impl AsRef<Path>, format: Format) -> Result<Embedding> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_embedding(&bytes, format).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses an embedding held in memory.
pub fn read_embedding(bytes: &[u8], format: Format) -> Result<Embedding> {
    match resolve_format(bytes, format) {
        Format::Word2VecBinary => read_word2vec_binary(bytes),
        Format::Word2VecText => read_text(bytes, true),
        Format::GloveText => read_text(bytes, false),
        Format::Auto => unreachable!(),
    }
}

/// Resolves `Auto` by inspecting the header and the first record.
pub fn resolve_format(bytes: &[u8], format: Format) -> Format {
    if format != Format::Auto {
        return format;
    }
    let Some(header_end) = bytes.iter().position(|&b| b == b'\n') else {
        return Format::GloveText;
    };
    let Some((_, dim)) = std::str::from_utf8(&bytes[..header_end])
        .ok()
        .and_then(parse_header)
    else {
        return Format::GloveText;
    };
    let rest = &bytes[header_end + 1..];
    let first_line = rest.split(|&b| b == b'\n').next().unwrap_or(&[]);
    let looks_textual = std::str::from_utf8(first_line)
        .map(|line| {
            let mut fields = line.split_whitespace();
            fields.next().is_some()
                && fields.clone().count() == dim
                && fields.all(|f| f.parse::<f32>().is_ok())
        })
        .unwrap_or(false);
    if looks_textual || rest.iter().all(u8::is_ascii_whitespace) {
        Format::Word2VecText
    } else {
        Format::Word2VecBinary
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let n = it.next()?.parse().ok()?;
    let r = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((n, r))
}

fn read_word2vec_binary(bytes: &[u8]) -> Result<Embedding> {
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| Error::Format("header is not ASCII".into()))?;
    let (n, dim) =
        parse_header(header).ok_or_else(|| Error::Format(format!("bad header {header:?}")))?;
    if dim == 0 {
        return Err(Error::Format("declared dimension is 0".into()));
    }

    let mut pos = header_end + 1;
    let mut vocab = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n {
        // tolerate the newline word2vec writes after each vector
        while pos < bytes.len() && (bytes[pos] == b'\n' || bytes[pos] == b'\r') {
            pos += 1;
        }
        let rel = bytes[pos..]
            .iter()
            .position(|&b| b == b' ')
            .ok_or_else(|| Error::Format(format!("record {i}: truncated token (declared {n} words)")))?;
        let token = std::str::from_utf8(&bytes[pos..pos + rel])
            .map_err(|_| Error::Format(format!("record {i}: token is not UTF-8")))?;
        vocab.push(token.to_string());
        pos += rel + 1;
        let need = dim * 4;
        if bytes.len() < pos + need {
            return Err(Error::Format(format!(
                "record {i} ({token:?}): expected {dim} float32 values, payload too short"
            )));
        }
        data.extend(
            bytes[pos..pos + need]
                .chunks_exact(4)
                .map(|c| f64::from(LittleEndian::read_f32(c))),
        );
        pos += need;
    }
    if !bytes[pos..].iter().all(u8::is_ascii_whitespace) {
        return Err(Error::Format(format!(
            "payload continues after the {n} declared records"
        )));
    }
    Embedding::new(vocab, data, dim)
}

fn read_text(bytes: &[u8], with_header: bool) -> Result<Embedding> {
    let text =
        std::str::from_utf8(bytes).map_err(|_| Error::Format("text embedding is not UTF-8".into()))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

    let declared = if with_header {
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Format("missing header line".into()))?;
        let (n, dim) =
            parse_header(header).ok_or_else(|| Error::Format(format!("bad header {header:?}")))?;
        if dim == 0 {
            return Err(Error::Format("declared dimension is 0".into()));
        }
        Some((n, dim))
    } else {
        None
    };

    let mut dim = declared.map(|(_, d)| d);
    let mut vocab = Vec::new();
    let mut data = Vec::new();
    for (lineno, line) in lines {
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap_or_default();
        let start = data.len();
        for f in fields {
            let v: f32 = f.parse().map_err(|_| {
                Error::Format(format!("line {}: cannot parse {f:?} as a number", lineno + 1))
            })?;
            data.push(f64::from(v));
        }
        let got = data.len() - start;
        match dim {
            None if got == 0 => {
                return Err(Error::Format(format!("line {}: no vector values", lineno + 1)))
            }
            None => dim = Some(got),
            Some(d) if d != got => {
                return Err(Error::Format(format!(
                    "line {}: expected {d} values, found {got}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        vocab.push(token.to_string());
    }
    if let Some((n, _)) = declared {
        if n != vocab.len() {
            return Err(Error::Format(format!(
                "header declares {n} words but {} records follow",
                vocab.len()
            )));
        }
    }
    let dim = dim.ok_or_else(|| Error::Format("file contains no vectors".into()))?;
    Embedding::new(vocab, data, dim)
}

pub fn write_embedding(emb: &Embedding, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_embedding(emb, format)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Serializes an embedding to bytes in the given format.
pub fn encode_embedding(emb: &Embedding, format: Format) -> Result<Vec<u8>> {
    if emb.is_empty() {
        return Err(Error::Empty("refusing to write an embedding with no words".into()));
    }
    let mut w = BufWriter::new(Vec::with_capacity(emb.len() * (emb.dim() * 4 + 16)));
    let io = |e: std::io::Error| Error::io("<buffer>", e);
    match format {
        Format::Word2VecBinary => {
            writeln!(w, "{} {}", emb.len(), emb.dim()).map_err(io)?;
            for (token, row) in emb.vocab().iter().zip(emb.rows()) {
                w.write_all(token.as_bytes()).map_err(io)?;
                w.write_all(b" ").map_err(io)?;
                for &v in row {
                    w.write_f32::<LittleEndian>(v as f32).map_err(io)?;
                }
                w.write_all(b"\n").map_err(io)?;
            }
        }
        Format::Word2VecText | Format::GloveText => {
            if format == Format::Word2VecText {
                writeln!(w, "{} {}", emb.len(), emb.dim()).map_err(io)?;
            }
            for (token, row) in emb.vocab().iter().zip(emb.rows()) {
                w.write_all(token.as_bytes()).map_err(io)?;
                for &v in row {
                    write!(w, " {}", v as f32).map_err(io)?;
                }
                w.write_all(b"\n").map_err(io)?;
            }
        }
        Format::Auto => {
            return Err(Error::InvalidArgument(
                "an explicit format is required for writing".into(),
            ))
        }
    }
    w.into_inner().map_err(|e| io(e.into_error()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "2 3\na 1 0 0\nb 0 1 0\n";

    #[test]
    fn loads_word2vec_text_fixture() {
        let e = read_embedding(TEXT.as_bytes(), Format::Word2VecText).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.dim(), 3);
        assert_eq!(e.vector("b").unwrap(), &[0.0, 1.0, 0.0]);
        assert!(!e.is_normalized());
    }

    #[test]
    fn text_round_trip_is_byte_identical() {
        let canonical = "3 2\nthe 0.5 -0.25\nof 0.1 3\nand -1.5 0.000123\n";
        let e = read_embedding(canonical.as_bytes(), Format::Word2VecText).unwrap();
        let out = encode_embedding(&e, Format::Word2VecText).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), canonical);
    }

    #[test]
    fn glove_has_no_header() {
        let e = read_embedding(b"x 1 2\ny 3 4\n", Format::GloveText).unwrap();
        assert_eq!(e.len(), 2);
        let out = encode_embedding(&e, Format::GloveText).unwrap();
        assert_eq!(out, b"x 1 2\ny 3 4\n");
    }

    #[test]
    fn auto_detection() {
        assert_eq!(resolve_format(TEXT.as_bytes(), Format::Auto), Format::Word2VecText);
        assert_eq!(resolve_format(b"x 1 2\n", Format::Auto), Format::GloveText);
        let e = read_embedding(TEXT.as_bytes(), Format::Auto).unwrap();
        let bin = encode_embedding(&e, Format::Word2VecBinary).unwrap();
        assert_eq!(resolve_format(&bin, Format::Auto), Format::Word2VecBinary);
        assert_eq!(read_embedding(&bin, Format::Auto).unwrap(), e);
    }

    #[test]
    fn binary_without_trailing_newlines() {
        let mut bytes = b"2 2\n".to_vec();
        for (tok, vals) in [("p", [1.5f32, -2.0]), ("q", [0.25, 8.0])] {
            bytes.extend_from_slice(tok.as_bytes());
            bytes.push(b' ');
            for v in vals {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        let e = read_embedding(&bytes, Format::Word2VecBinary).unwrap();
        assert_eq!(e.vector("q").unwrap(), &[0.25, 8.0]);
    }

    #[test]
    fn header_payload_disagreement() {
        assert!(matches!(
            read_embedding(b"3 3\na 1 0 0\nb 0 1 0\n", Format::Word2VecText),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_embedding(b"2 3\na 1 0\nb 0 1 0\n", Format::Word2VecText),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_embedding(b"two 3\na 1 0 0\n", Format::Word2VecText),
            Err(Error::Format(_))
        ));
        let bin = b"2 2\na \x00\x00\x80\x3f";
        assert!(matches!(
            read_embedding(bin, Format::Word2VecBinary),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn duplicates_and_non_finite_rejected() {
        assert!(matches!(
            read_embedding(b"2 1\na 1\na 2\n", Format::Word2VecText),
            Err(Error::DuplicateToken(_))
        ));
        assert!(matches!(
            read_embedding(b"1 2\na inf 1\n", Format::Word2VecText),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn refuses_to_write_empty() {
        let e = Embedding::new(vec![], vec![], 3).unwrap();
        assert!(matches!(
            encode_embedding(&e, Format::Word2VecText),
            Err(Error::Empty(_))
        ));
    }
}
