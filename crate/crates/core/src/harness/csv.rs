use std::path::Path;

use super::sweep::SweepRow;
use crate::error::{Error, Result};

/// Fixed column order of the results file.
pub const COLUMNS: [&str; 18] = [
    "scheme",
    "d",
    "k",
    "rho_spec",
    "alpha",
    "m",
    "b0",
    "trials",
    "failures",
    "bias",
    "bias_se",
    "variance",
    "variance_se",
    "mse",
    "theory_exact",
    "theory_asymptotic",
    "theory_bound",
    "bits_expected_mean",
];

/// One parsed line of the results file; numeric fields are None for `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub scheme: String,
    pub d: usize,
    pub k: f64,
    pub rho_spec: String,
    pub alpha: Option<f64>,
    pub m: Option<usize>,
    pub b0: Option<f64>,
    pub trials: u64,
    pub failures: u64,
    pub bias: Option<f64>,
    pub bias_se: Option<f64>,
    pub variance: Option<f64>,
    pub variance_se: Option<f64>,
    pub mse: Option<f64>,
    pub theory_exact: Option<f64>,
    pub theory_asymptotic: Option<f64>,
    pub theory_bound: Option<f64>,
    pub bits_expected_mean: Option<f64>,
}

/// Ten significant digits.
pub fn format_real(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.9e}"),
        _ => "NA".to_string(),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl CsvRecord {
    pub fn from_row(r: &SweepRow) -> Self {
        // round through the printed form so records compare equal after a
        // write/read cycle
        let q = |v: f64| format_real(Some(v)).parse().ok();
        let qo = |v: Option<f64>| v.and_then(q);
        CsvRecord {
            scheme: r.scheme.to_string(),
            d: r.d,
            k: r.point.k,
            rho_spec: r.point.rho_spec(),
            alpha: r.point.alpha,
            m: r.point.m,
            b0: r.point.b0,
            trials: r.trials,
            failures: r.failures,
            bias: q(r.bias),
            bias_se: q(r.bias_se),
            variance: q(r.variance),
            variance_se: q(r.variance_se),
            mse: q(r.mse),
            theory_exact: qo(r.theory.exact),
            theory_asymptotic: qo(r.theory.asymptotic),
            theory_bound: qo(r.theory.bound),
            bits_expected_mean: q(r.bits_expected_mean),
        }
    }

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.scheme.clone(),
            self.d.to_string(),
            self.k.to_string(),
            self.rho_spec.clone(),
            opt(self.alpha),
            opt(self.m),
            opt(self.b0),
            self.trials.to_string(),
            self.failures.to_string(),
            format_real(self.bias),
            format_real(self.bias_se),
            format_real(self.variance),
            format_real(self.variance_se),
            format_real(self.mse),
            format_real(self.theory_exact),
            format_real(self.theory_asymptotic),
            format_real(self.theory_bound),
            format_real(self.bits_expected_mean),
        ]
    }

    fn from_fields(line: usize, f: &csv::StringRecord) -> Result<Self> {
        if f.len() != COLUMNS.len() {
            return Err(Error::Parse {
                line,
                reason: format!("expected {} columns, found {}", COLUMNS.len(), f.len()),
            });
        }
        let bad = |col: usize| Error::Parse {
            line,
            reason: format!("column {}: cannot parse '{}'", COLUMNS[col], &f[col]),
        };
        let num = |col: usize| -> Result<Option<f64>> {
            match &f[col] {
                "NA" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(col)),
            }
        };
        let int = |col: usize| -> Result<u64> { f[col].parse().map_err(|_| bad(col)) };
        Ok(CsvRecord {
            scheme: f[0].to_string(),
            d: int(1)? as usize,
            k: num(2)?.ok_or_else(|| bad(2))?,
            rho_spec: f[3].to_string(),
            alpha: num(4)?,
            m: num(5)?.map(|v| v as usize),
            b0: num(6)?,
            trials: int(7)?,
            failures: int(8)?,
            bias: num(9)?,
            bias_se: num(10)?,
            variance: num(11)?,
            variance_se: num(12)?,
            mse: num(13)?,
            theory_exact: num(14)?,
            theory_asymptotic: num(15)?,
            theory_bound: num(16)?,
            bits_expected_mean: num(17)?,
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        reason: e.to_string(),
    }
}

pub fn csv_string(rows: &[SweepRow]) -> String {
    let records: Vec<CsvRecord> = rows.iter().map(CsvRecord::from_row).collect();
    records_csv_string(&records)
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(rows)).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            reason: "header does not match the fixed column order".into(),
        });
    }
    r.records()
        .enumerate()
        .map(|(i, rec)| CsvRecord::from_fields(i + 2, &rec.map_err(csv_err)?))
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_csv(&text)
}

/// Re-emit parsed records.
pub fn records_csv_string(records: &[CsvRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for r in records {
        w.write_record(r.fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}
