use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::BenchError;

/// `%g`-style formatting with 6 significant digits.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let s = format!("{x:.*}", (5 - exp) as usize);
        trim_zeros(&s).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Integral values in full, everything else as [`fmt_g`].
pub fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        fmt_g(x)
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g).unwrap_or_default()
}

pub fn parse_opt<T: std::str::FromStr>(s: &str) -> Option<T> {
    if s.is_empty() {
        None
    } else {
        s.parse().ok()
    }
}

/// First `model name` line of `/proc/cpuinfo`, if readable.
pub fn cpu_model() -> String {
    std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| "unknown".into())
}

pub fn build_flags() -> String {
    format!(
        "{} {}-{} debug_assertions={}",
        env!("CARGO_PKG_VERSION"),
        std::env::consts::ARCH,
        std::env::consts::OS,
        cfg!(debug_assertions)
    )
}

/// Environment lines written as `#` comments ahead of every CSV.
pub fn environment_header() -> Vec<String> {
    vec![
        format!("cpu: {}", cpu_model()),
        format!("build: {}", build_flags()),
    ]
}

/// Writes `# ...` comment lines, then a header row and the given rows.
pub fn write_csv(
    path: impl AsRef<Path>,
    comments: &[String],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), BenchError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv_to(&mut out, comments, header, rows)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(
    out: &mut W,
    comments: &[String],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), BenchError> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV with `#` comments into header-keyed rows.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<csv::StringRecord>, BenchError> {
    let text = std::fs::read_to_string(path)?;
    read_csv_str(&text)
}

pub fn read_csv_str(text: &str) -> Result<Vec<csv::StringRecord>, BenchError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_printf() {
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(0.1), "0.1");
        assert_eq!(fmt_g(1.2345678), "1.23457");
        assert_eq!(fmt_g(123456.7), "123457");
        assert_eq!(fmt_g(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(0.00001234567), "1.23457e-05");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(999999.6), "1e+06");
        assert_eq!(fmt_g(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_round_trip_skips_comments() {
        let mut buf = Vec::new();
        write_csv_to(
            &mut buf,
            &["cpu: x".into()],
            &["a", "b"],
            [vec!["1".into(), "".into()]],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# cpu: x\na,b\n"));
        let rows = read_csv_str(&text).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(parse_opt::<f64>(&rows[0][1]), None);
        assert_eq!(parse_opt::<f64>(&rows[0][0]), Some(1.0));
    }
}
