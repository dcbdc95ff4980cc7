//! Field files: `f̂(t_j, ξ)` tables in CSV or a little-endian binary layout.
//!
//! CSV starts with a version line `# torsolv field v1`, then a header
//! `j,xi1,…,xiN,re,im` and one row per sample. Absent rows read as zero.
//! Numbers are written with 17 significant digits, which round-trips `f64`
//! exactly.
//!
//! Binary: magic `TSVF`, `u32` version, `u32` dimension, `u64` `n_t`,
//! `u64` frequency count, then per frequency its `i64` components followed
//! by `n_t` pairs of `f64` (re, im).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use torsolv_core::spectral::{CircleGrid, FourierField, FrequencyBox};
use torsolv_core::symbol::Tabulated;
use torsolv_core::Complex64;

const MAGIC: &[u8; 4] = b"TSVF";
const VERSION: u32 = 1;
const CSV_TAG: &str = "# torsolv field v";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Binary,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Binary => "bin",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FieldError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

/// One sample `(ξ, j, value)`.
pub type Record = (Vec<i64>, usize, Complex64);

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FieldError + '_ {
    move |source| FieldError::Io { path: path.to_path_buf(), source }
}

fn bad(path: &Path, message: impl Into<String>) -> FieldError {
    FieldError::Format { path: path.to_path_buf(), message: message.into() }
}

pub fn write_field(path: &Path, field: &FourierField, format: Format) -> Result<(), FieldError> {
    match format {
        Format::Csv => write_csv(path, field),
        Format::Binary => write_binary(path, field).map_err(io_err(path)),
    }
}

fn write_csv(path: &Path, field: &FourierField) -> Result<(), FieldError> {
    let rows = field
        .freq_box()
        .freqs()
        .iter()
        .enumerate()
        .map(|(idx, xi)| (xi.as_slice(), field.slice(idx)));
    write_csv_rows(path, field.freq_box().dim(), rows)
}

fn write_csv_rows<'a>(
    path: &Path,
    dim: usize,
    rows: impl Iterator<Item = (&'a [i64], &'a [Complex64])>,
) -> Result<(), FieldError> {
    let csv_err = |source| FieldError::Csv { path: path.to_path_buf(), source };
    let mut file = BufWriter::new(File::create(path).map_err(io_err(path))?);
    writeln!(file, "{CSV_TAG}{VERSION}").map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&header(dim)).map_err(csv_err)?;
    for (xi, s) in rows {
        for (j, z) in s.iter().enumerate() {
            let mut rec = vec![j.to_string()];
            rec.extend(xi.iter().map(|c| c.to_string()));
            rec.push(format!("{:.16e}", z.re));
            rec.push(format!("{:.16e}", z.im));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err(path))
}

fn header(dim: usize) -> Vec<String> {
    let mut h = vec!["j".to_string()];
    h.extend((1..=dim).map(|i| format!("xi{i}")));
    h.extend(["re", "im"].map(String::from));
    h
}

fn write_binary(path: &Path, field: &FourierField) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(field.freq_box().dim() as u32).to_le_bytes())?;
    w.write_all(&(field.grid().len() as u64).to_le_bytes())?;
    w.write_all(&(field.freq_box().len() as u64).to_le_bytes())?;
    for (idx, xi) in field.freq_box().freqs().iter().enumerate() {
        for c in xi {
            w.write_all(&c.to_le_bytes())?;
        }
        for z in field.slice(idx) {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()
}

/// Raw samples of a field file; the format is detected from the magic bytes.
pub fn read_records(path: &Path) -> Result<(usize, Vec<Record>), FieldError> {
    let mut head = [0u8; 4];
    let is_binary = {
        let mut f = File::open(path).map_err(io_err(path))?;
        let got = f.read(&mut head).map_err(io_err(path))?;
        got == 4 && &head == MAGIC
    };
    if is_binary {
        read_binary(path)
    } else {
        read_csv(path)
    }
}

fn read_csv(path: &Path) -> Result<(usize, Vec<Record>), FieldError> {
    let csv_err = |source| FieldError::Csv { path: path.to_path_buf(), source };
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let first = text.lines().next().unwrap_or("");
    let Some(version) = first.strip_prefix(CSV_TAG) else {
        return Err(bad(path, format!("line 1 must be `{CSV_TAG}{VERSION}`")));
    };
    if version.trim() != VERSION.to_string() {
        return Err(bad(path, format!("unsupported field version `{}`", version.trim())));
    }
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let cols: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let dim = cols.iter().filter(|c| c.starts_with("xi")).count();
    let expected = header(dim);
    if dim == 0 || cols != expected {
        return Err(bad(path, format!("header must be `{}`, found `{}`", expected.join(","), cols.join(","))));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let j = field(0)
            .parse::<usize>()
            .map_err(|_| bad(path, format!("line {line}: `{}` is not a node index", field(0))))?;
        let xi = (1..=dim)
            .map(|i| field(i).parse::<i64>().map_err(|_| bad(path, format!("line {line}: `{}` is not an integer frequency", field(i)))))
            .collect::<Result<Vec<_>, _>>()?;
        let num = |i: usize| {
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(path, format!("line {line}: `{}` is not a finite number", field(i))))
        };
        out.push((xi, j, Complex64::new(num(dim + 1)?, num(dim + 2)?)));
    }
    Ok((dim, out))
}

fn read_binary(path: &Path) -> Result<(usize, Vec<Record>), FieldError> {
    let mut r = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut take = |k: usize| -> Result<Vec<u8>, FieldError> {
        let mut buf = vec![0u8; k];
        r.read_exact(&mut buf).map_err(|_| bad(path, "truncated binary field"))?;
        Ok(buf)
    };
    take(4)?;
    let u32_at = |b: Vec<u8>| u32::from_le_bytes(b.try_into().unwrap());
    let u64_at = |b: Vec<u8>| u64::from_le_bytes(b.try_into().unwrap());
    let version = u32_at(take(4)?);
    if version != VERSION {
        return Err(bad(path, format!("unsupported binary version {version}")));
    }
    let dim = u32_at(take(4)?) as usize;
    let nt = u64_at(take(8)?) as usize;
    let count = u64_at(take(8)?) as usize;
    if dim == 0 || nt == 0 {
        return Err(bad(path, "empty binary header"));
    }
    let mut out = Vec::with_capacity(count.saturating_mul(nt).min(1 << 24));
    for _ in 0..count {
        let xi: Vec<i64> = (0..dim)
            .map(|_| take(8).map(|b| i64::from_le_bytes(b.try_into().unwrap())))
            .collect::<Result<_, _>>()?;
        for j in 0..nt {
            let b = take(16)?;
            let re = f64::from_le_bytes(b[..8].try_into().unwrap());
            let im = f64::from_le_bytes(b[8..].try_into().unwrap());
            if !re.is_finite() || !im.is_finite() {
                return Err(bad(path, format!("non-finite sample at xi {xi:?}, j = {j}")));
            }
            out.push((xi.clone(), j, Complex64::new(re, im)));
        }
    }
    Ok((dim, out))
}

/// Reads a field onto the given grid and box. Frequencies outside the box
/// and node indices beyond `n_t` are errors; absent samples are zero.
pub fn read_field(path: &Path, grid: &CircleGrid, freq_box: &FrequencyBox) -> Result<FourierField, FieldError> {
    let (dim, records) = read_records(path)?;
    if dim != freq_box.dim() {
        return Err(bad(path, format!("field has dimension {dim}, the run uses {}", freq_box.dim())));
    }
    let n = grid.len();
    let mut field = FourierField::zeros(grid, freq_box);
    let mut seen = vec![false; n * freq_box.len()];
    for (xi, j, z) in records {
        let idx = freq_box
            .index_of(&xi)
            .ok_or_else(|| bad(path, format!("frequency {xi:?} lies outside the box |xi| <= {}", freq_box.cutoff())))?;
        if j >= n {
            return Err(bad(path, format!("node index {j} at xi {xi:?} exceeds n_t = {n}")));
        }
        if std::mem::replace(&mut seen[idx * n + j], true) {
            return Err(bad(path, format!("duplicate sample at xi {xi:?}, j = {j}")));
        }
        field.slice_mut(idx)[j] = z;
    }
    Ok(field)
}

/// Reads a tabulated symbol `c(t_j, ξ)`. Every listed frequency must carry
/// all `n_t` samples.
pub fn read_tabulated(path: &Path, nt: usize, dim: usize) -> Result<Tabulated, FieldError> {
    let (file_dim, records) = read_records(path)?;
    if file_dim != dim {
        return Err(bad(path, format!("table has dimension {file_dim}, the symbol declares {dim}")));
    }
    let mut entries: BTreeMap<Vec<i64>, Vec<Option<Complex64>>> = BTreeMap::new();
    for (xi, j, z) in records {
        if j >= nt {
            return Err(bad(path, format!("node index {j} at xi {xi:?} exceeds n_t = {nt}")));
        }
        let slot = &mut entries.entry(xi.clone()).or_insert_with(|| vec![None; nt])[j];
        if slot.replace(z).is_some() {
            return Err(bad(path, format!("duplicate sample at xi {xi:?}, j = {j}")));
        }
    }
    let entries = entries
        .into_iter()
        .map(|(xi, s)| {
            let full: Option<Vec<Complex64>> = s.into_iter().collect();
            full.map(|v| (xi.clone(), v))
                .ok_or_else(|| bad(path, format!("frequency {xi:?} does not list all {nt} samples")))
        })
        .collect::<Result<_, _>>()?;
    Ok(Tabulated { nt, entries })
}

/// Writes a tabulated symbol in the CSV field layout.
pub fn write_tabulated(path: &Path, table: &Tabulated) -> Result<(), FieldError> {
    let dim = table.entries.keys().next().map_or(1, Vec::len);
    write_csv_rows(path, dim, table.entries.iter().map(|(xi, s)| (xi.as_slice(), s.as_slice())))
}
