use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::EmbeddingTable;
use crate::{Error, Result};

/// Sibling file holding a subword table's unit vectors.
pub fn ngram_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".ngrams");
    PathBuf::from(s)
}

fn write_rows(path: &Path, dim: usize, rows: &HashMap<String, Vec<f32>>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{} {}", rows.len(), dim)?;
    let mut keys: Vec<&String> = rows.keys().collect();
    keys.sort();
    for k in keys {
        w.write_all(k.as_bytes())?;
        for v in &rows[k] {
            write!(w, " {v}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows(path: &Path, expected_dim: Option<usize>) -> Result<(usize, HashMap<String, Vec<f32>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or(Error::Embedding { line: 1, msg: "missing header".into() })??;
    let mut parts = header.split_whitespace();
    let parse_usize = |s: Option<&str>| s.and_then(|x| x.parse::<usize>().ok());
    let (count, dim) = match (parse_usize(parts.next()), parse_usize(parts.next()), parts.next()) {
        (Some(c), Some(d), None) => (c, d),
        _ => {
            return Err(Error::Embedding { line: 1, msg: format!("malformed header '{header}'") })
        }
    };
    if let Some(e) = expected_dim {
        if e != dim {
            return Err(Error::Embedding {
                line: 1,
                msg: format!("dimension {dim} does not match word table dimension {e}"),
            });
        }
    }
    let mut rows = HashMap::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let token = fields.next().unwrap_or_default().to_string();
        let values: Vec<f32> = fields
            .map(|f| f.parse::<f32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Embedding { line: line_no, msg: format!("bad value: {e}") })?;
        if values.len() != dim {
            return Err(Error::Embedding {
                line: line_no,
                msg: format!("expected {dim} values, found {}", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Embedding { line: line_no, msg: "non-finite value".into() });
        }
        if rows.insert(token.clone(), values).is_some() {
            return Err(Error::Embedding { line: line_no, msg: format!("duplicate token {token}") });
        }
    }
    if rows.len() != count {
        return Err(Error::Embedding {
            line: 1,
            msg: format!("header declares {count} rows, found {}", rows.len()),
        });
    }
    Ok((dim, rows))
}

/// Writes `<count> <dim>` then one `<token> v1 .. vdim` row per word, sorted
/// by token. Subword tables also write their unit vectors to [`ngram_path`].
pub fn save_table(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_rows(path, table.dim(), table.words())?;
    if let Some(ngrams) = table.ngrams() {
        write_rows(&ngram_path(path), table.dim(), ngrams)?;
    }
    Ok(())
}

pub fn load_table(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let (dim, words) = read_rows(path, None)?;
    let mut table = EmbeddingTable::new(dim);
    for (w, v) in words {
        table.insert(w, v);
    }
    let sibling = ngram_path(path);
    if sibling.exists() {
        let (_, ngrams) = read_rows(&sibling, Some(dim))?;
        table.set_ngrams(ngrams);
    }
    Ok(table)
}
