use std::collections::BTreeMap;
use std::fmt;

use super::records::{Method, Nmse, TrialRecord};

/// Aggregate of every record sharing a method, SNR and grid size.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub snr_db: f64,
    pub grid_n: usize,
    pub count: usize,
    /// Trials with `Ĥ == H` exactly; left out of the dB mean.
    pub exact_count: usize,
    pub failed_count: usize,
    pub mean_nmse_db: Option<f64>,
    pub median_nmse_db: Option<f64>,
    pub mean_time_s: f64,
    pub median_time_s: f64,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Groups records by `(method, snr, grid_n)`; rows come out in that order.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Method, u64, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        // order-preserving key for f64
        let bits = r.snr_db.to_bits();
        let key = if r.snr_db.is_sign_negative() {
            !bits
        } else {
            bits | (1 << 63)
        };
        groups.entry((r.method, key, r.grid_n)).or_default().push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let finite: Vec<f64> = rs
                .iter()
                .filter_map(|r| match r.nmse {
                    Nmse::Db(v) => Some(v),
                    _ => None,
                })
                .collect();
            let raw: Vec<f64> = rs.iter().filter_map(|r| r.nmse.as_db()).collect();
            let times: Vec<f64> = rs.iter().map(|r| r.wall_time_s).collect();
            SummaryRow {
                method: rs[0].method,
                snr_db: rs[0].snr_db,
                grid_n: rs[0].grid_n,
                count: rs.len(),
                exact_count: rs.iter().filter(|r| r.nmse == Nmse::Exact).count(),
                failed_count: rs.iter().filter(|r| r.nmse == Nmse::Failed).count(),
                mean_nmse_db: mean(&finite),
                median_nmse_db: median(raw),
                mean_time_s: mean(&times).unwrap_or(0.0),
                median_time_s: median(times).unwrap_or(0.0),
            }
        })
        .collect()
}

/// Looks up one summary row.
pub fn find(rows: &[SummaryRow], method: Method, snr_db: f64, grid_n: usize) -> Option<&SummaryRow> {
    rows.iter()
        .find(|r| r.method == method && r.snr_db == snr_db && r.grid_n == grid_n)
}

impl fmt::Display for SummaryRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.method.is_build_row() {
            return write!(
                f,
                "{:<18} N={:>3}  n={:<4} time mean={:.3e}s median={:.3e}s",
                self.method.name(),
                self.grid_n,
                self.count,
                self.mean_time_s,
                self.median_time_s
            );
        }
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
        write!(
            f,
            "{:<18} snr={:>6} N={:>3}  n={:<4} mean={:>8} dB  median={:>8} dB  exact={} failed={}  time mean={:.3e}s median={:.3e}s",
            self.method.name(),
            self.snr_db,
            self.grid_n,
            self.count,
            opt(self.mean_nmse_db),
            opt(self.median_nmse_db),
            self.exact_count,
            self.failed_count,
            self.mean_time_s,
            self.median_time_s
        )
    }
}
