//! Result rows and deterministic CSV emission (RFC 4180 quoting, floats
//! at nine significant digits).

use serde::Serialize;

/// One aggregated measurement.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    /// Sweep variable value (target Doppler, sample count, ratio, ...).
    pub sweep: f64,
    pub metric: String,
    pub value: f64,
    pub trials: usize,
    pub config_hash: String,
}

/// Nine significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.8e}")
}

/// Quote a field when it holds a comma, quote, or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("sweep,metric,value,trials,config\r\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\r\n",
            format_float(r.sweep),
            csv_field(&r.metric),
            format_float(r.value),
            r.trials,
            csv_field(&r.config_hash),
        ));
    }
    out
}

/// The variance-table layout: one row per (sample count, CNR) cell.
pub fn variance_csv(rows: &[(usize, f64, f64, f64)]) -> String {
    let mut out = String::from("l,cnr_db,empirical,theoretical\r\n");
    for &(l, cnr, emp, theo) in rows {
        out.push_str(&format!(
            "{},{},{},{}\r\n",
            l,
            format_float(cnr),
            format_float(emp),
            format_float(theo),
        ));
    }
    out
}
