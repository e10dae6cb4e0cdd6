//! Sequence file formats and batch manifests.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Sequence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `frame,point,x,y[,z]`, one row per (frame, point).
    LongCsv,
    /// `frame,p0_x,p0_y[,p0_z],p1_x,...`, one row per frame.
    WideCsv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "long" | "longcsv" | "csv" => Ok(Format::LongCsv),
            "wide" | "widecsv" => Ok(Format::WideCsv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown sequence format '{other}'"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::LongCsv => "long",
            Format::WideCsv => "wide",
            Format::Json => "json",
        })
    }
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::LongCsv | Format::WideCsv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SequenceJson {
    id: String,
    dim: usize,
    nose_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    frames: Vec<Vec<Vec<f64>>>,
}

/// Loads a sequence; its id defaults to the file stem (JSON carries its own).
pub fn load_sequence(path: impl AsRef<Path>, format: Format) -> Result<Sequence> {
    let path = path.as_ref();
    match format {
        Format::LongCsv => load_long(path),
        Format::WideCsv => load_wide(path),
        Format::Json => load_json(path),
    }
}

pub fn save_sequence(seq: &Sequence, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let written = match format {
        Format::LongCsv => write_long(seq, &mut w),
        Format::WideCsv => write_wide(seq, &mut w),
        Format::Json => {
            let doc = SequenceJson {
                id: seq.id.clone(),
                dim: seq.dim(),
                nose_index: seq.nose_index,
                subject: seq.subject.clone(),
                label: seq.label.clone(),
                frames: (0..seq.num_frames())
                    .map(|t| {
                        (0..seq.num_points())
                            .map(|i| seq.point(t, i).to_vec())
                            .collect()
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut w, &doc)
                .map_err(std::io::Error::from)
                .and_then(|_| w.write_all(b"\n"))
        }
    };
    written
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn axis_name(c: usize) -> &'static str {
    ["x", "y", "z"][c]
}

fn write_long(seq: &Sequence, w: &mut impl Write) -> std::io::Result<()> {
    let d = seq.dim();
    let mut header = String::from("frame,point");
    for c in 0..d {
        header.push(',');
        header.push_str(axis_name(c));
    }
    writeln!(w, "{header}")?;
    for t in 0..seq.num_frames() {
        for i in 0..seq.num_points() {
            write!(w, "{t},{i}")?;
            for v in seq.point(t, i) {
                write!(w, ",{v:?}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

fn write_wide(seq: &Sequence, w: &mut impl Write) -> std::io::Result<()> {
    let d = seq.dim();
    let mut header = String::from("frame");
    for i in 0..seq.num_points() {
        for c in 0..d {
            header.push_str(&format!(",p{i}_{}", axis_name(c)));
        }
    }
    writeln!(w, "{header}")?;
    for t in 0..seq.num_frames() {
        write!(w, "{t}")?;
        for v in seq.frame(t) {
            write!(w, ",{v:?}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

fn header_fields(path: &Path, reader: &mut csv::Reader<File>) -> Result<Vec<String>> {
    Ok(reader
        .headers()
        .map_err(|e| Error::parse(path, e.to_string()))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect())
}

fn parse_coord(path: &Path, line: u64, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(path, format!("line {line}: bad number '{field}'")))?;
    if !v.is_finite() {
        return Err(Error::Value(format!(
            "{}: line {line}: non-finite coordinate '{field}'",
            path.display()
        )));
    }
    Ok(v)
}

fn parse_index(path: &Path, line: u64, field: &str, what: &str) -> Result<usize> {
    field
        .parse()
        .map_err(|_| Error::parse(path, format!("line {line}: bad {what} '{field}'")))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Maps sorted external frame numbers onto 0..T, requiring no gaps.
fn contiguous_frames(frames: impl Iterator<Item = usize>) -> Result<(usize, usize)> {
    let mut first = None;
    let mut count = 0usize;
    let mut prev: Option<usize> = None;
    for f in frames {
        if let Some(p) = prev {
            if f != p + 1 {
                return Err(Error::Shape(format!("missing frame(s) between {p} and {f}")));
            }
        } else {
            first = Some(f);
        }
        prev = Some(f);
        count += 1;
    }
    Ok((first.unwrap_or(0), count))
}

fn load_long(path: &Path) -> Result<Sequence> {
    let mut reader = csv_reader(path)?;
    let header = header_fields(path, &mut reader)?;
    let dim = match header.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["frame", "point", "x", "y"] => 2,
        ["frame", "point", "x", "y", "z"] => 3,
        _ => {
            return Err(Error::parse(
                path,
                format!("expected header frame,point,x,y[,z], got {}", header.join(",")),
            ))
        }
    };
    let mut cells: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 + dim {
            return Err(Error::parse(
                path,
                format!("line {line}: expected {} fields, got {}", 2 + dim, record.len()),
            ));
        }
        let frame = parse_index(path, line, &record[0], "frame")?;
        let point = parse_index(path, line, &record[1], "point")?;
        let coords = (0..dim)
            .map(|c| parse_coord(path, line, &record[2 + c]))
            .collect::<Result<Vec<_>>>()?;
        if cells.insert((frame, point), coords).is_some() {
            return Err(Error::Shape(format!(
                "duplicate cell for frame {frame}, point {point}"
            )));
        }
    }
    let mut frames: Vec<usize> = cells.keys().map(|&(f, _)| f).collect();
    frames.dedup();
    let (first_frame, num_frames) = contiguous_frames(frames.iter().copied())?;
    let num_points = cells.keys().map(|&(_, p)| p + 1).max().unwrap_or(0);
    if cells.len() != num_frames * num_points {
        return Err(Error::Shape(format!(
            "expected {} (frame, point) cells for T={num_frames}, N={num_points}, found {}",
            num_frames * num_points,
            cells.len()
        )));
    }
    let mut points = Vec::with_capacity(num_frames * num_points * dim);
    for t in 0..num_frames {
        for i in 0..num_points {
            let cell = cells.get(&(first_frame + t, i)).ok_or_else(|| {
                Error::Shape(format!("missing point {i} in frame {}", first_frame + t))
            })?;
            points.extend_from_slice(cell);
        }
    }
    Sequence::new(file_stem(path), dim, num_points, num_frames, points)
}

fn load_wide(path: &Path) -> Result<Sequence> {
    let mut reader = csv_reader(path)?;
    let header = header_fields(path, &mut reader)?;
    if header.first().map(String::as_str) != Some("frame") || header.len() < 3 {
        return Err(Error::parse(path, "expected header frame,p0_x,p0_y,..."));
    }
    let dim = if header.get(3).map(String::as_str) == Some("p0_z") {
        3
    } else {
        2
    };
    let coord_cols = header.len() - 1;
    if coord_cols % dim != 0 {
        return Err(Error::Shape(format!(
            "{coord_cols} coordinate columns is not a multiple of d={dim}"
        )));
    }
    let num_points = coord_cols / dim;
    for (k, name) in header[1..].iter().enumerate() {
        let expected = format!("p{}_{}", k / dim, axis_name(k % dim));
        if *name != expected {
            return Err(Error::parse(
                path,
                format!("header column {}: expected '{expected}', got '{name}'", k + 1),
            ));
        }
    }
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::Shape(format!(
                "line {line}: expected {} fields, got {}",
                header.len(),
                record.len()
            )));
        }
        let frame = parse_index(path, line, &record[0], "frame")?;
        let coords = (1..record.len())
            .map(|k| parse_coord(path, line, &record[k]))
            .collect::<Result<Vec<_>>>()?;
        if rows.insert(frame, coords).is_some() {
            return Err(Error::Shape(format!("duplicate frame {frame}")));
        }
    }
    let (_, num_frames) = contiguous_frames(rows.keys().copied())?;
    let points = rows.into_values().flatten().collect();
    Sequence::new(file_stem(path), dim, num_points, num_frames, points)
}

fn load_json(path: &Path) -> Result<Sequence> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let doc: SequenceJson = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::parse(path, e.to_string()))?;
    let num_frames = doc.frames.len();
    let num_points = doc.frames.first().map_or(0, Vec::len);
    let mut points = Vec::with_capacity(num_frames * num_points * doc.dim);
    for (t, frame) in doc.frames.iter().enumerate() {
        if frame.len() != num_points {
            return Err(Error::Shape(format!(
                "frame {t} has {} points, expected {num_points}",
                frame.len()
            )));
        }
        for (i, p) in frame.iter().enumerate() {
            if p.len() != doc.dim {
                return Err(Error::Shape(format!(
                    "point {i} in frame {t} has {} coordinates, expected {}",
                    p.len(),
                    doc.dim
                )));
            }
            points.extend_from_slice(p);
        }
    }
    let mut seq = Sequence::new(doc.id, doc.dim, num_points, num_frames, points)?;
    if let Some(n) = doc.nose_index {
        seq = seq.with_nose_index(n)?;
    }
    seq.subject = doc.subject;
    seq.label = doc.label;
    Ok(seq)
}

/// One row of a batch manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub sequence_id: String,
    /// Resolved against the manifest's directory.
    pub path: PathBuf,
    pub format: Format,
    pub label: Option<String>,
    pub subject: Option<String>,
    pub nose_index: Option<usize>,
}

impl ManifestEntry {
    /// Loads the referenced sequence and applies the manifest metadata.
    pub fn load(&self) -> Result<Sequence> {
        let mut seq = load_sequence(&self.path, self.format)?;
        seq.id = self.sequence_id.clone();
        if let Some(n) = self.nose_index {
            seq = seq.with_nose_index(n)?;
        }
        if self.label.is_some() {
            seq.label = self.label.clone();
        }
        if self.subject.is_some() {
            seq.subject = self.subject.clone();
        }
        Ok(seq)
    }
}

/// Reads `sequence_id,path,format,label,subject,nose_index`.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv_reader(path)?;
    let header = header_fields(path, &mut reader)?;
    let expected = ["sequence_id", "path", "format", "label", "subject", "nose_index"];
    if header != expected {
        return Err(Error::parse(
            path,
            format!("expected header {}, got {}", expected.join(","), header.join(",")),
        ));
    }
    let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != expected.len() {
            return Err(Error::parse(
                path,
                format!("line {line}: expected {} fields", expected.len()),
            ));
        }
        let nose_index = match &record[5] {
            "" => None,
            s => Some(parse_index(path, line, s, "nose_index")?),
        };
        let rel = PathBuf::from(&record[1]);
        entries.push(ManifestEntry {
            sequence_id: record[0].to_string(),
            path: if rel.is_absolute() { rel } else { base.join(rel) },
            format: record[2].parse()?,
            label: opt(&record[3]),
            subject: opt(&record[4]),
            nose_index,
        });
    }
    Ok(entries)
}

/// Writes a manifest whose paths are stored as given.
pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let io = |e: csv::Error| Error::io(path, e.into());
    w.write_record(["sequence_id", "path", "format", "label", "subject", "nose_index"])
        .map_err(io)?;
    for e in entries {
        w.write_record([
            e.sequence_id.clone(),
            e.path.to_string_lossy().into_owned(),
            e.format.to_string(),
            e.label.clone().unwrap_or_default(),
            e.subject.clone().unwrap_or_default(),
            e.nose_index.map(|n| n.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
