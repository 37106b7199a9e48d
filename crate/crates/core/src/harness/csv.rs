//! Sweep records as CSV: fixed header, 17 significant digits, empty fields
//! for absent metrics.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::sweep::TrialRecord;

pub const CSV_HEADER: &str = "pmax,trial,re,nmse,f_overlap_mean,f_re_mean,seed_used";

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv_to<W: Write>(records: &[TrialRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.pmax),
            r.trial,
            fmt_opt(r.re),
            fmt_opt(r.nmse),
            fmt_opt(r.f_overlap_mean),
            fmt_opt(r.f_re_mean),
            r.seed_used
        )?;
    }
    w.flush()
}

pub fn write_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(records, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .unwrap_or_default();
    if header != CSV_HEADER {
        return Err(Error::invalid(format!(
            "{}: unexpected header '{header}'",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let bad = |what: &str| {
            Error::invalid(format!("{}:{}: bad {what}", path.display(), lineno + 2))
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad("field count"));
        }
        let opt = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(what))
            }
        };
        out.push(TrialRecord {
            pmax: f[0].parse().map_err(|_| bad("pmax"))?,
            trial: f[1].parse().map_err(|_| bad("trial"))?,
            re: opt(f[2], "re")?,
            nmse: opt(f[3], "nmse")?,
            f_overlap_mean: opt(f[4], "f_overlap_mean")?,
            f_re_mean: opt(f[5], "f_re_mean")?,
            seed_used: f[6].parse().map_err(|_| bad("seed_used"))?,
        });
    }
    Ok(out)
}
