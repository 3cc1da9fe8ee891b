//! Text instance files.
//!
//! Dense format:
//!
//! ```text
//! # name: CS100          optional comment lines, `#` in column 0
//! # scale: 10000
//! n m
//! r_1 .. r_n
//! c_1 .. c_m
//! C_11 .. C_1m           n lines of m integer costs
//! ..
//! ```
//!
//! Point format, costs computed on load as `round(scale * ||a_i - b_j||)`:
//!
//! ```text
//! # name: mnist0
//! POINTS d n m scale
//! w x_1 .. x_d           n supply points
//! w x_1 .. x_d           m demand points
//! ```
//!
//! Fields are separated by single spaces when written and by any whitespace
//! when read. Files end with a newline.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::datasets::{build_instance, DatasetError, PointCloudDistribution, QuantizationPolicy};
use crate::model::{ModelError, OTInstance};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        msg: msg.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_data(&mut self) -> Option<(usize, &'a str)> {
        for (ln, line) in self.inner.by_ref() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Some((ln + 1, t));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), FormatError> {
        self.next_data()
            .ok_or_else(|| parse_err(0, format!("unexpected end of file reading {what}")))
    }
}

fn parse_nums<T: std::str::FromStr>(
    line: usize,
    text: &str,
    count: usize,
    what: &str,
) -> Result<Vec<T>, FormatError> {
    let vals = text
        .split_whitespace()
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| parse_err(line, format!("bad {what} value {t:?}")))
        })
        .collect::<Result<Vec<T>, _>>()?;
    if vals.len() != count {
        return Err(parse_err(
            line,
            format!("expected {count} {what} values, got {}", vals.len()),
        ));
    }
    Ok(vals)
}

fn header_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .take_while(|l| l.trim().is_empty() || l.trim_start().starts_with('#'))
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .filter_map(|l| l.trim().strip_prefix(key))
        .filter_map(|rest| rest.trim_start().strip_prefix(':'))
        .map(str::trim)
        .next()
}

/// Parses either format. `default_name` is used when no `# name:` header
/// is present.
pub fn parse_instance(text: &str, default_name: &str) -> Result<OTInstance, FormatError> {
    let name = header_value(text, "name")
        .unwrap_or(default_name)
        .to_string();
    let header_scale = header_value(text, "scale").and_then(|s| s.parse::<u64>().ok());
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (ln, first) = lines.expect("header")?;
    if let Some(rest) = first.strip_prefix("POINTS") {
        let head: Vec<u64> = parse_nums(ln, rest, 4, "POINTS header")?;
        let (d, n, m, scale) = (
            head[0] as usize,
            head[1] as usize,
            head[2] as usize,
            head[3],
        );
        if d == 0 || scale == 0 {
            return Err(parse_err(ln, "dimension and scale must be positive"));
        }
        let mut read_cloud = |count: usize| -> Result<PointCloudDistribution, FormatError> {
            let mut coords = Vec::with_capacity(count * d);
            let mut weights = Vec::with_capacity(count);
            for _ in 0..count {
                let (ln, line) = lines.expect("point")?;
                let mut fields = line.splitn(2, char::is_whitespace);
                let w = fields.next().unwrap_or_default();
                weights.push(
                    w.parse::<i64>()
                        .map_err(|_| parse_err(ln, format!("bad weight {w:?}")))?,
                );
                coords.extend(parse_nums::<f64>(
                    ln,
                    fields.next().unwrap_or(""),
                    d,
                    "coordinate",
                )?);
            }
            Ok(PointCloudDistribution::new(d, coords, weights)?)
        };
        let a = read_cloud(n)?;
        let b = read_cloud(m)?;
        return Ok(build_instance(
            name,
            &a,
            &b,
            QuantizationPolicy::new(scale, 1),
        )?);
    }
    let dims: Vec<usize> = parse_nums(ln, first, 2, "dimension")?;
    let (n, m) = (dims[0], dims[1]);
    let (ln, line) = lines.expect("supplies")?;
    let supplies = parse_nums(ln, line, n, "supply")?;
    let (ln, line) = lines.expect("demands")?;
    let demands = parse_nums(ln, line, m, "demand")?;
    let mut cost = Vec::with_capacity(n * m);
    for _ in 0..n {
        let (ln, line) = lines.expect("cost row")?;
        cost.extend(parse_nums::<i64>(ln, line, m, "cost")?);
    }
    if let Some((ln, _)) = lines.next_data() {
        return Err(parse_err(ln, "trailing data after cost matrix"));
    }
    let inst = OTInstance::new(name, n, m, cost, supplies, demands)?;
    Ok(match header_scale {
        Some(s) => inst.with_scale(s),
        None => inst,
    })
}

fn join<T: ToString>(vals: &[T]) -> String {
    vals.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

/// Dense text serialization.
pub fn format_instance(inst: &OTInstance) -> String {
    let mut out = String::with_capacity(inst.costs().len() * 8 + 64);
    let _ = writeln!(out, "# name: {}", inst.name());
    if let Some(scale) = inst.scale() {
        let _ = writeln!(out, "# scale: {scale}");
    }
    let _ = writeln!(out, "{} {}", inst.n(), inst.m());
    let _ = writeln!(out, "{}", join(inst.supplies()));
    let _ = writeln!(out, "{}", join(inst.demands()));
    for i in 0..inst.n() {
        let _ = writeln!(out, "{}", join(inst.cost_row(i)));
    }
    out
}

/// Point-format serialization of a pair of clouds.
pub fn format_points(
    name: &str,
    a: &PointCloudDistribution,
    b: &PointCloudDistribution,
    scale: u64,
) -> String {
    let mut out = format!(
        "# name: {name}\n# scale: {scale}\nPOINTS {} {} {} {scale}\n",
        a.dim(),
        a.len(),
        b.len()
    );
    for cloud in [a, b] {
        for k in 0..cloud.len() {
            let _ = write!(out, "{}", cloud.weights()[k]);
            for v in cloud.point(k) {
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<OTInstance, FormatError> {
    let path = path.as_ref();
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance")
        .to_string();
    parse_instance(&std::fs::read_to_string(path)?, &stem)
}

pub fn write_instance(path: impl AsRef<Path>, inst: &OTInstance) -> Result<(), FormatError> {
    std::fs::write(path, format_instance(inst))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::gen_circle_square;

    #[test]
    fn dense_format_is_exact() {
        let inst = OTInstance::from_rows("t", &[vec![1, 3], vec![2, 1]], vec![2, 1], vec![1, 2])
            .unwrap()
            .with_scale(7);
        let text = format_instance(&inst);
        assert_eq!(text, "# name: t\n# scale: 7\n2 2\n2 1\n1 2\n1 3\n2 1\n");
        assert_eq!(parse_instance(&text, "x").unwrap(), inst);
    }

    #[test]
    fn generated_instance_round_trips() {
        let inst = gen_circle_square(16).unwrap();
        assert_eq!(parse_instance(&format_instance(&inst), "x").unwrap(), inst);
    }

    #[test]
    fn default_name_without_header() {
        let inst = parse_instance("1 1\n4\n4\n9\n", "fallback").unwrap();
        assert_eq!(inst.name(), "fallback");
        assert_eq!(inst.scale(), None);
    }

    #[test]
    fn points_format_computes_costs() {
        let text = "# name: pts\nPOINTS 2 1 2 10\n2 0 0\n1 1.5 0\n1 0 3\n";
        let inst = parse_instance(text, "x").unwrap();
        assert_eq!(inst.name(), "pts");
        assert_eq!(inst.costs(), &[15, 30]);
        assert_eq!(inst.supplies(), &[2]);
        assert_eq!(inst.scale(), Some(10));
        let a = PointCloudDistribution::from_points(&[vec![0.0, 0.0]], vec![2]).unwrap();
        let b = PointCloudDistribution::from_points(&[vec![1.5, 0.0], vec![0.0, 3.0]], vec![1, 1])
            .unwrap();
        assert_eq!(
            parse_instance(&format_points("pts", &a, &b, 10), "x").unwrap(),
            inst
        );
    }

    #[test]
    fn malformed_files() {
        assert!(parse_instance("", "x").is_err());
        assert!(parse_instance("2 2\n1 1\n1 1\n0 0\n", "x").is_err());
        assert!(parse_instance("1 1\n1\n1\n0\n5\n", "x").is_err());
        assert!(parse_instance("1 1\n1\n1\nq\n", "x").is_err());
        assert!(parse_instance("POINTS 2 1 1 10\n1 0 0\n", "x").is_err());
    }
}
