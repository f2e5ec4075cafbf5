//! CSV and JSON emission of result rows.

use std::io::Write;

use crate::config::Format;
use crate::run::{Row, COLUMNS};

/// 17 significant digits.
fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.receiver.clone(),
            r.slots.to_string(),
            float(r.mean_photons),
            float(r.n_thermal),
            float(r.eta),
            r.slices.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
            r.method.clone(),
            float(r.p_error),
            float(r.ci_low),
            float(r.ci_high),
            r.params_json.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Array of objects keyed by the CSV column names. Non-finite numbers
/// become `null`.
pub fn write_json<W: Write>(rows: &[Row], mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)
}

pub fn write_rows<W: Write>(rows: &[Row], format: Format, out: W) -> anyhow::Result<()> {
    match format {
        Format::Csv => write_csv(rows, out)?,
        Format::Json => write_json(rows, out)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> Row {
        Row {
            receiver: "dd".into(),
            slots: 4,
            mean_photons: 0.1,
            n_thermal: 0.0,
            eta: 1.0,
            slices: 1,
            trials: 0,
            seed: 3,
            method: "closed_form".into(),
            p_error: 1.0 / 3.0,
            ci_low: f64::NAN,
            ci_high: 0.5,
            params_json: "{\"a\":1}".into(),
        }
    }

    #[test]
    fn csv_has_fixed_columns_and_full_precision() {
        let mut buf = Vec::new();
        write_csv(&[row()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        let line = lines.next().unwrap();
        assert!(line.contains("3.3333333333333331e-1"), "{line}");
        assert!(line.contains("NaN"));
        assert!(line.ends_with("\"{\"\"a\"\":1}\""), "{line}");
        let value: f64 = "3.3333333333333331e-1".parse().unwrap();
        assert_eq!(value, 1.0 / 3.0);
    }

    #[test]
    fn json_mirrors_columns() {
        let mut buf = Vec::new();
        write_json(&[row()], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let obj = v[0].as_object().unwrap();
        for c in COLUMNS {
            assert!(obj.contains_key(c), "{c}");
        }
        assert!(obj["ci_low"].is_null());
    }
}
