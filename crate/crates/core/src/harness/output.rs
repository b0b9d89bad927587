//! Per-round CSV, run summaries and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{Error, Result};

use super::experiment::{ExperimentResult, ExperimentSpec};

pub const CSV_HEADER: [&str; 6] = [
    "t",
    "loss",
    "cum_loss",
    "cum_regret",
    "delta_t",
    "bound_prefix",
];

/// `%.17g`: 17 significant digits, trailing zeros stripped, exponent form
/// outside `[1e-4, 1e17)`.
pub fn fmt_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, v))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    }
}

fn strip_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Config(format!("writing {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn rounds_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let mut cum_loss = 0.0;
    for (i, loss) in result.regret.losses.iter().enumerate() {
        cum_loss += loss;
        let bound = result.bound_prefix[i].map(fmt_g17).unwrap_or_default();
        w.write_record([
            (i + 1).to_string(),
            fmt_g17(*loss),
            fmt_g17(cum_loss),
            fmt_g17(result.regret.cumulative_regret[i]),
            fmt_g17(result.regret.deltas[i]),
            bound,
        ])
        .map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))
}

pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.txt")
}

/// `key: value` lines followed by the same data as one JSON object.
pub fn summary_text(spec: &ExperimentSpec, result: &ExperimentResult) -> Result<String> {
    let cert = result.certificate.as_ref();
    let status = match cert {
        Some(c) if c.satisfied => "pass",
        Some(_) => "fail",
        None => "not-applicable",
    };
    let point: Vec<String> = result
        .comparator
        .point
        .iter()
        .map(|v| fmt_g17(*v))
        .collect();
    let pairs: Vec<(&str, String)> = vec![
        ("algo", spec.algo.clone()),
        ("problem", result_problem(spec)),
        ("dim", spec.dim.to_string()),
        ("horizon", spec.horizon.to_string()),
        ("seed", spec.seed.to_string()),
        ("set", spec.set.id().to_string()),
        ("final_regret", fmt_g17(result.regret.final_regret())),
        ("bound", cert.map(|c| fmt_g17(c.bound)).unwrap_or_default()),
        (
            "bound_formula",
            cert.map(|c| c.formula.id().to_string()).unwrap_or_default(),
        ),
        ("certificate", status.to_string()),
        (
            "tuned_eta",
            result.tuned_eta.map(fmt_g17).unwrap_or_default(),
        ),
        ("comparator", point.join(" ")),
        ("comparator_flat", result.comparator.flat.to_string()),
    ];
    let mut text = String::new();
    for (k, v) in &pairs {
        text.push_str(&format!("{k}: {v}\n"));
    }
    let blob = json!({
        "spec": spec,
        "preset": result.preset,
        "final_regret": result.regret.final_regret(),
        "certificate": cert,
        "certificate_status": status,
        "tuned_eta": result.tuned_eta,
        "comparator": result.comparator.point.as_slice(),
        "comparator_flat": result.comparator.flat,
    });
    text.push_str("json: ");
    text.push_str(&serde_json::to_string(&blob).map_err(|e| Error::Config(format!("json: {e}")))?);
    text.push('\n');
    Ok(text)
}

fn result_problem(spec: &ExperimentSpec) -> String {
    spec.problem_kind()
        .map(|k| k.id().to_string())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
    }

    #[test]
    fn g17_round_trips() {
        for v in [
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            -4.9e-300,
            12345.678,
        ] {
            assert_eq!(fmt_g17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(summary_path(&p), dir.path().join("x.summary.txt"));
    }
}
