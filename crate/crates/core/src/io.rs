//! Datasets in LibSVM format, trace CSV/JSON output and the cache of
//! optimal values.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::solvers::{IterRecord, Trace};

/// Environment variable overriding the results root.
pub const RESULTS_DIR_ENV: &str = "LCD_RESULTS_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelMode {
    /// Two classes mapped to `−1` (smaller label) and `+1` (larger label).
    Classification,
    Regression,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub rows: Matrix,
    pub labels: Vector,
    pub source: String,
    /// Whether min-max column scaling was applied.
    pub scaled: bool,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn d(&self) -> usize {
        self.rows.ncols()
    }

    /// Hex SHA-256 over shape, features and labels.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n() as u64).to_le_bytes());
        h.update((self.d() as u64).to_le_bytes());
        for i in 0..self.n() {
            for j in 0..self.d() {
                h.update(self.rows[(i, j)].to_le_bytes());
            }
        }
        for v in self.labels.iter() {
            h.update(v.to_le_bytes());
        }
        hex(&h.finalize())
    }

    /// Rescales every non-constant column to `[0, 1]`.
    pub fn min_max_scale(&mut self) {
        for mut col in self.rows.column_iter_mut() {
            let lo = col.min();
            let hi = col.max();
            if hi > lo {
                col.apply(|v| *v = (*v - lo) / (hi - lo));
            }
        }
        self.scaled = true;
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses `label idx:val idx:val …` lines with 1-based strictly increasing
/// indices. Text after `#` is ignored, as are blank lines.
pub fn parse_libsvm<R: Read>(reader: R, mode: LabelMode, source: impl Into<String>) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut d = 0usize;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let label_tok = toks.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("label '{label_tok}' is not a number")))?;
        if !label.is_finite() {
            return Err(parse_err(lineno, format!("label '{label_tok}' is not finite")));
        }
        let mut row = Vec::new();
        let mut last = 0usize;
        for tok in toks {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected idx:val, found '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("index '{idx}' is not a positive integer")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_err(lineno, format!("index {idx} does not increase (previous {last})")));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("value '{val}' is not a number")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("value '{val}' is not finite")));
            }
            last = idx;
            row.push((idx, val));
        }
        d = d.max(last);
        labels.push((lineno, label));
        entries.push(row);
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rows = Matrix::zeros(labels.len(), d);
    for (i, row) in entries.iter().enumerate() {
        for &(j, v) in row {
            rows[(i, j - 1)] = v;
        }
    }
    let raw: Vec<f64> = labels.iter().map(|(_, l)| *l).collect();
    let labels = match mode {
        LabelMode::Regression => Vector::from_vec(raw),
        LabelMode::Classification => map_classes(&raw, &labels)?,
    };
    Ok(Dataset {
        rows,
        labels,
        source: source.into(),
        scaled: false,
    })
}

fn map_classes(raw: &[f64], located: &[(usize, f64)]) -> Result<Vector> {
    // +0.0 folds −0 into 0
    let distinct: BTreeSet<u64> = raw.iter().map(|v| (v + 0.0).to_bits()).collect();
    let mut classes: Vec<f64> = distinct.into_iter().map(f64::from_bits).collect();
    classes.sort_by(f64::total_cmp);
    if classes.len() > 2 {
        let line = located.iter().find(|(_, l)| *l == classes[2]).map_or(0, |(n, _)| *n);
        return Err(parse_err(line, format!("more than two classes: {classes:?}")));
    }
    let already_signed = classes.iter().all(|c| *c == 1.0 || *c == -1.0);
    let map = |v: f64| -> f64 {
        if already_signed {
            v
        } else if classes.len() == 1 {
            // lone class: 0 reads as negative, anything else as positive
            if v <= 0.0 { -1.0 } else { 1.0 }
        } else if v == classes[0] {
            -1.0
        } else {
            1.0
        }
    };
    Ok(Vector::from_iterator(raw.len(), raw.iter().map(|&v| map(v))))
}

pub fn load_libsvm(path: &Path, mode: LabelMode) -> Result<Dataset> {
    let f = File::open(path)?;
    parse_libsvm(f, mode, path.display().to_string())
}

/// Writes non-zero entries with shortest round-trip float formatting.
pub fn write_libsvm<W: Write>(data: &Dataset, sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    for i in 0..data.n() {
        write!(w, "{}", data.labels[i])?;
        for j in 0..data.d() {
            let v = data.rows[(i, j)];
            if v != 0.0 {
                write!(w, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub const TRACE_HEADER: &str = "k,f_gap,grad_norm,step_norm,newton_iters,elapsed_s";

/// One row per iteration, floats with 17 significant digits.
pub fn write_trace_csv<W: Write>(trace: &Trace, sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            r.k, r.f_gap, r.grad_norm, r.step_norm, r.newton_iters, r.elapsed_s
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<IterRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if lineno == 1 {
            if line.trim() != TRACE_HEADER {
                return Err(parse_err(1, format!("unexpected header '{line}'")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(parse_err(lineno, format!("expected 6 fields, found {}", f.len())));
        }
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| parse_err(lineno, format!("bad number '{s}'"))) };
        let int = |s: &str| -> Result<usize> { s.parse().map_err(|_| parse_err(lineno, format!("bad integer '{s}'"))) };
        out.push(IterRecord {
            k: int(f[0])?,
            f_gap: num(f[1])?,
            grad_norm: num(f[2])?,
            step_norm: num(f[3])?,
            newton_iters: int(f[4])?,
            elapsed_s: num(f[5])?,
        });
    }
    Ok(out)
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub method: String,
    pub task: String,
    pub dataset: Option<String>,
    pub dataset_hash: Option<String>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub lambda: Option<f64>,
    pub lambda_frac_of_l: Option<f64>,
    pub p: Option<f64>,
    pub delta: Option<f64>,
    pub curvature: Option<String>,
    /// Smoothness constant of the data term and how it was defined.
    pub l_smooth: Option<f64>,
    pub l_definition: Option<String>,
    pub l_c: Option<f64>,
    pub f_star: Option<f64>,
    pub f_star_provenance: Option<String>,
    pub feature_scaling: bool,
    pub x0: String,
    pub max_iters: usize,
    pub f_tol: Option<f64>,
    pub g_tol: Option<f64>,
    pub seed: u64,
    pub started_unix: u64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub metadata: RunMetadata,
    pub trace: Trace,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    metadata: &'a RunMetadata,
    status: &'a crate::solvers::Status,
    iterations: usize,
    initial_gap: f64,
    final_gap: f64,
    lcd3_min_sqrt_arg: Option<f64>,
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the CSV path.
pub fn write_run(record: &RunRecord, dir: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    write_trace_csv(&record.trace, File::create(&csv)?)?;
    let t = &record.trace;
    let side = Sidecar {
        metadata: &record.metadata,
        status: &t.status,
        iterations: t.iterations(),
        initial_gap: t.initial_gap,
        final_gap: t.final_gap(),
        lcd3_min_sqrt_arg: t.lcd3_arguments.iter().copied().reduce(f64::min),
    };
    let json = dir.join(format!("{stem}.json"));
    serde_json::to_writer_pretty(BufWriter::new(File::create(json)?), &side)?;
    Ok(csv)
}

/// Root directory for outputs: `$LCD_RESULTS_DIR` or `./results`.
pub fn results_root() -> PathBuf {
    std::env::var_os(RESULTS_DIR_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from)
}

/// Hex SHA-256 of the joined key parts.
pub fn cache_key(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex(&h.finalize())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FStarEntry {
    pub key: String,
    pub value: f64,
    pub x_star: Option<Vec<f64>>,
    pub provenance: String,
    pub converged: bool,
    pub grad_norm: f64,
}

/// `results/fstar/<key>.json`, serialized by an advisory lock.
#[derive(Clone, Debug)]
pub struct FStarCache {
    dir: PathBuf,
}

impl FStarCache {
    pub fn new(root: &Path) -> Self {
        FStarCache {
            dir: root.join("fstar"),
        }
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn read(&self, key: &str) -> Option<FStarEntry> {
        let text = fs::read_to_string(self.path_for(key)).ok()?;
        let entry: FStarEntry = serde_json::from_str(&text).ok()?;
        (entry.key == key && entry.value.is_finite()).then_some(entry)
    }

    /// Cached entry for `key`, or the result of `compute` persisted under it.
    /// Unreadable entries are recomputed and overwritten. The flag reports
    /// a cache hit.
    pub fn get_or_compute<F>(&self, key: &str, compute: F) -> Result<(FStarEntry, bool)>
    where
        F: FnOnce() -> Result<FStarEntry>,
    {
        fs::create_dir_all(&self.dir)?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(self.dir.join(".lock"))?;
        lock.lock()?;
        if let Some(e) = self.read(key) {
            return Ok((e, true));
        }
        let mut entry = compute()?;
        entry.key = key.to_string();
        let tmp = self.dir.join(format!("{key}.json.tmp"));
        serde_json::to_writer_pretty(BufWriter::new(File::create(&tmp)?), &entry)?;
        fs::rename(&tmp, self.path_for(key))?;
        Ok((entry, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{Method, Status};
    use std::cell::Cell;

    fn parse(text: &str) -> Result<Dataset> {
        parse_libsvm(text.as_bytes(), LabelMode::Classification, "inline")
    }

    #[test]
    fn parse_examples() {
        let d = parse("+1 1:0.5 3:2.0").unwrap();
        assert_eq!(d.rows, Matrix::from_row_slice(1, 3, &[0.5, 0.0, 2.0]));
        assert_eq!(d.labels, Vector::from_vec(vec![1.0]));
        assert!(matches!(parse(""), Err(Error::EmptyDataset)));
        let d = parse("1 2:1\n-1 1:3").unwrap();
        assert_eq!((d.n(), d.d()), (2, 2));
        assert_eq!(d.rows, Matrix::from_row_slice(2, 2, &[0.0, 1.0, 3.0, 0.0]));
        assert_eq!(d.labels, Vector::from_vec(vec![1.0, -1.0]));
    }

    #[test]
    fn label_mappings() {
        let d = parse("0 1:1\n1 1:2\n0 1:3").unwrap();
        assert_eq!(d.labels.as_slice(), &[-1.0, 1.0, -1.0]);
        let d = parse("2 1:1\n1 1:2").unwrap();
        assert_eq!(d.labels.as_slice(), &[1.0, -1.0]);
        let r = parse_libsvm("2.5 1:1\n-0.5 1:2".as_bytes(), LabelMode::Regression, "r").unwrap();
        assert_eq!(r.labels.as_slice(), &[2.5, -0.5]);
        match parse("1 1:1\n2 1:1\n3 1:1") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let d = parse("# header\n\n+1 1:1 # trailing\n-1 2:2\n").unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.rows, Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]));
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let cases = [
            ("1 1:1\n1 0:1", 2),
            ("1 2:1 2:3", 1),
            ("1 3:1 2:3", 1),
            ("1 1:1\n\nx 1:1", 3),
            ("1 1:abc", 1),
            ("1 1", 1),
            ("1 -1:2", 1),
            ("1 1:nan", 1),
        ];
        for (text, want) in cases {
            match parse(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn libsvm_round_trip() {
        let text = "1 1:0.1 4:-3.25e-7\n-1 2:1e300 3:0.30000000000000004\n1 4:7";
        let d = parse(text).unwrap();
        let mut buf = Vec::new();
        write_libsvm(&d, &mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.rows, d.rows);
        assert_eq!(back.labels, d.labels);
        assert_eq!(back.content_hash(), d.content_hash());
    }

    fn trace(n: usize) -> Trace {
        Trace {
            method: Method::Lcd2,
            f_star: Some(0.1),
            initial_gap: 1.0,
            initial_grad_norm: 2.0,
            records: (1..=n)
                .map(|k| IterRecord {
                    k,
                    f_gap: 1.0 / (3.0 * k as f64) + 1e-300,
                    grad_norm: std::f64::consts::PI * k as f64,
                    step_norm: 0.1f64.powi(k as i32),
                    newton_iters: k % 5,
                    elapsed_s: 1e-7 * k as f64,
                })
                .collect(),
            status: Status::MaxIters,
            iterates: None,
            lcd3_arguments: vec![],
        }
    }

    #[test]
    fn csv_examples() {
        let mut buf = Vec::new();
        write_trace_csv(&trace(0), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 1);
        buf.clear();
        write_trace_csv(&trace(3), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 4);
        let t = trace(50);
        buf.clear();
        write_trace_csv(&t, &mut buf).unwrap();
        let back = read_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), t.records.len());
        for (a, b) in back.iter().zip(&t.records) {
            assert_eq!(a.f_gap.to_bits(), b.f_gap.to_bits());
            assert_eq!(a.grad_norm.to_bits(), b.grad_norm.to_bits());
            assert_eq!(a.step_norm.to_bits(), b.step_norm.to_bits());
            assert_eq!(a.elapsed_s.to_bits(), b.elapsed_s.to_bits());
            assert_eq!((a.k, a.newton_iters), (b.k, b.newton_iters));
        }
    }

    #[test]
    fn write_run_emits_csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let rec = RunRecord {
            metadata: RunMetadata {
                method: "lcd2".into(),
                ..Default::default()
            },
            trace: trace(3),
        };
        let csv = write_run(&rec, dir.path(), "lcd2").unwrap();
        assert!(csv.exists());
        let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("lcd2.json")).unwrap()).unwrap();
        assert_eq!(side["iterations"], 3);
        assert_eq!(side["metadata"]["method"], "lcd2");
    }

    #[test]
    fn cache_computes_once() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FStarCache::new(dir.path());
        let key = cache_key(&["least-squares", "abc"]);
        let calls = Cell::new(0);
        let compute = || {
            calls.set(calls.get() + 1);
            Ok(FStarEntry {
                key: String::new(),
                value: 0.0,
                x_star: None,
                provenance: "test".into(),
                converged: true,
                grad_norm: 0.0,
            })
        };
        let (a, hit_a) = cache.get_or_compute(&key, compute).unwrap();
        let (b, hit_b) = cache.get_or_compute(&key, compute).unwrap();
        assert_eq!((hit_a, hit_b), (false, true));
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(calls.get(), 1);

        fs::write(cache.path_for(&key), "{ not json").unwrap();
        let (_, hit) = cache.get_or_compute(&key, compute).unwrap();
        assert!(!hit);
        assert_eq!(calls.get(), 2);
    }
}
