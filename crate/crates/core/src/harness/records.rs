//! Per-trial records, the NMSE metric and the CSV boundary.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub const CSV_HEADER: &str = "method,snr_db,grid_n,trial,nmse_db,wall_time_s,iterations,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Omp1d,
    Somp2Stage,
    Omp2d,
    Ls1d,
    Ls2dSimple,
    /// Construction of the 1-D sensing matrix, timed on its own.
    Omp1dBuild,
    /// Factoring the 1-D LS normal matrix.
    Ls1dBuild,
    /// Forming the two pseudo-inverse factors of the simplified 2-D LS.
    Ls2dSimpleBuild,
}

impl Method {
    /// The estimators a sweep can run.
    pub const ESTIMATORS: [Method; 5] = [
        Method::Omp1d,
        Method::Somp2Stage,
        Method::Omp2d,
        Method::Ls1d,
        Method::Ls2dSimple,
    ];

    /// Setup rows of the runtime sweep, timed apart from the estimators.
    pub const BUILD_ROWS: [Method; 3] = [Method::Omp1dBuild, Method::Ls1dBuild, Method::Ls2dSimpleBuild];

    pub fn name(self) -> &'static str {
        match self {
            Method::Omp1d => "omp1d",
            Method::Somp2Stage => "somp2stage",
            Method::Omp2d => "omp2d",
            Method::Ls1d => "ls1d",
            Method::Ls2dSimple => "ls2d_simple",
            Method::Omp1dBuild => "omp1d_build",
            Method::Ls1dBuild => "ls1d_build",
            Method::Ls2dSimpleBuild => "ls2d_simple_build",
        }
    }

    /// Greedy pursuit (as opposed to a dense LS baseline).
    pub fn is_pursuit(self) -> bool {
        matches!(self, Method::Omp1d | Method::Somp2Stage | Method::Omp2d)
    }

    pub fn needs_sensing_matrix(self) -> bool {
        matches!(self, Method::Omp1d | Method::Ls1d)
    }

    pub fn is_build_row(self) -> bool {
        Method::BUILD_ROWS.contains(&self)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ESTIMATORS
            .iter()
            .chain(&Method::BUILD_ROWS)
            .find(|m| m.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Outcome of one NMSE evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nmse {
    Db(f64),
    /// `Ĥ == H` bit for bit; written as `-inf`.
    Exact,
    /// The estimator raised an error; written as `nan`.
    Failed,
}

impl Nmse {
    /// dB value with `Exact` as −∞; `None` for failures.
    pub fn as_db(self) -> Option<f64> {
        match self {
            Nmse::Db(v) => Some(v),
            Nmse::Exact => Some(f64::NEG_INFINITY),
            Nmse::Failed => None,
        }
    }

    fn from_db(v: f64) -> Self {
        if v.is_nan() {
            Nmse::Failed
        } else if v == f64::NEG_INFINITY {
            Nmse::Exact
        } else {
            Nmse::Db(v)
        }
    }
}

/// `10·log10(‖Ĥ − H‖²/‖H‖²)`.
pub fn nmse(h_true: &CMatrix, h_est: &CMatrix) -> Result<Nmse> {
    let ref_energy = h_true.frobenius_norm_sqr();
    if ref_energy == 0.0 {
        return Err(Error::UndefinedReference);
    }
    let err = h_est.sub(h_true)?.frobenius_norm_sqr();
    Ok(if err == 0.0 {
        Nmse::Exact
    } else {
        Nmse::Db(10.0 * (err / ref_energy).log10())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: Method,
    /// `+∞` for noiseless runs.
    pub snr_db: f64,
    pub grid_n: usize,
    pub trial_index: usize,
    pub nmse: Nmse,
    pub wall_time_s: f64,
    pub iterations: usize,
    pub seed_used: u64,
}

impl TrialRecord {
    /// CSV row order: method, then SNR, then grid size, then trial.
    pub fn row_order(&self, other: &Self) -> Ordering {
        self.method
            .cmp(&other.method)
            .then(self.snr_db.total_cmp(&other.snr_db))
            .then(self.grid_n.cmp(&other.grid_n))
            .then(self.trial_index.cmp(&other.trial_index))
    }
}

pub fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(TrialRecord::row_order);
}

/// Nine significant digits, `%g` style.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let s = format!("{:.*}", (8 - exp).max(0) as usize, x);
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Writes `records` (sorted into row order) with the fixed header.
pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let io_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    };
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(CSV_HEADER.split(',')).map_err(io_err)?;
    for r in &sorted {
        let nmse_db = r.nmse.as_db().unwrap_or(f64::NAN);
        w.write_record([
            r.method.name().to_string(),
            format_float(r.snr_db),
            r.grid_n.to_string(),
            r.trial_index.to_string(),
            format_float(nmse_db),
            format_float(r.wall_time_s),
            r.iterations.to_string(),
            r.seed_used.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let bad = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") != CSV_HEADER {
        return Err(bad(format!("unexpected header `{}`", header.join(","))));
    }
    let mut out = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let line = n + 2;
        let float = |i: usize| {
            parse_float(field(i)).ok_or_else(|| bad(format!("line {line}: bad number `{}`", field(i))))
        };
        let int = |i: usize| {
            field(i)
                .parse::<u64>()
                .map_err(|_| bad(format!("line {line}: bad integer `{}`", field(i))))
        };
        out.push(TrialRecord {
            method: field(0).parse().map_err(|e: Error| bad(e.to_string()))?,
            snr_db: float(1)?,
            grid_n: int(2)? as usize,
            trial_index: int(3)? as usize,
            nmse: Nmse::from_db(float(4)?),
            wall_time_s: float(5)?,
            iterations: int(6)? as usize,
            seed_used: int(7)?,
        });
    }
    Ok(out)
}
