use std::path::Path;

use super::{DatasetError, PointCloudDistribution};

/// Parses an embedding file: one token per line as `count v_1 .. v_d`.
///
/// Blank lines and lines starting with `#` are skipped. The dimension is taken
/// from the first data line and every other line must agree.
pub fn parse_embeddings(text: &str) -> Result<PointCloudDistribution, DatasetError> {
    let mut dim = None;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let count_tok = fields.next().unwrap_or_default();
        let count: i64 = count_tok.parse().map_err(|_| DatasetError::Parse {
            line: ln + 1,
            msg: format!("bad token count {count_tok:?}"),
        })?;
        let start = coords.len();
        for tok in fields {
            coords.push(tok.parse::<f64>().map_err(|_| DatasetError::Parse {
                line: ln + 1,
                msg: format!("bad coordinate {tok:?}"),
            })?);
        }
        let d = coords.len() - start;
        match dim {
            None if d == 0 => {
                return Err(DatasetError::Parse {
                    line: ln + 1,
                    msg: "no coordinates".into(),
                })
            }
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(DatasetError::DimensionMismatch(expected, d))
            }
            Some(_) => {}
        }
        weights.push(count);
    }
    PointCloudDistribution::new(dim.unwrap_or(0), coords, weights)
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<PointCloudDistribution, DatasetError> {
    parse_embeddings(&std::fs::read_to_string(path)?)
}

/// Embedding-file text for a cloud; inverse of [`parse_embeddings`].
pub fn format_embeddings(cloud: &PointCloudDistribution) -> String {
    let mut out = String::new();
    for k in 0..cloud.len() {
        out.push_str(&cloud.weights()[k].to_string());
        for v in cloud.point(k) {
            out.push(' ');
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    out
}
