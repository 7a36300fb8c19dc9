//! CSV and JSON interchange.
//!
//! CSV files are comma-separated, UTF-8, with a mandatory header row; numbers
//! are written with Rust's shortest round-trip formatting.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;

use crate::error::{Result, RksError};
use crate::kernel::GramMatrix;
use crate::solvers::Dataset;

pub(crate) fn schema_error<E: std::fmt::Display>(
    prefix: &str,
    e: serde_path_to_error::Error<E>,
) -> RksError {
    let mut pointer = prefix.to_string();
    for segment in e.path().iter() {
        use serde_path_to_error::Segment;
        match segment {
            Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                pointer.push('/');
                pointer.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => {
                pointer.push('/');
                pointer.push_str(variant);
            }
            Segment::Unknown => pointer.push_str("/?"),
        }
    }
    if pointer.is_empty() {
        pointer.push('/');
    }
    RksError::Schema {
        pointer,
        message: e.inner().to_string(),
    }
}

/// Deserializes JSON, mapping failures to `RksError::Schema` with a JSON
/// pointer to the offending value.
pub fn from_json_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(s);
    serde_path_to_error::deserialize(de).map_err(|e| schema_error("", e))
}

fn parse_number(field: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| {
        RksError::invalid(format!(
            "row {row}, column {col}: `{field}` is not a number"
        ))
    })?;
    if !v.is_finite() {
        return Err(RksError::NonFinite(format!("row {row}, column {col}")));
    }
    Ok(v)
}

fn read_table<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(RksError::invalid("CSV header is required"));
    }
    if header.iter().all(|h| h.parse::<f64>().is_ok()) {
        return Err(RksError::invalid(
            "CSV header is required, first row is numeric",
        ));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, f)| parse_number(f, i + 1, j + 1))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Reads points, one per row, all columns being coordinates.
pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    Ok(read_table(reader)?.1)
}

/// Reads pairs `(x, y)`: the first half of the columns is `x`, the second `y`.
pub fn read_pairs_csv<R: Read>(reader: R) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let (header, rows) = read_table(reader)?;
    if header.len() % 2 != 0 {
        return Err(RksError::invalid(format!(
            "pair file needs an even number of columns, got {}",
            header.len()
        )));
    }
    let d = header.len() / 2;
    Ok(rows
        .into_iter()
        .map(|r| (r[..d].to_vec(), r[d..].to_vec()))
        .collect())
}

/// Reads a dataset with columns `x[,x2,...],y`.
pub fn read_dataset_csv<R: Read>(reader: R) -> Result<Dataset> {
    let (header, rows) = read_table(reader)?;
    if header.len() < 2 {
        return Err(RksError::invalid(
            "dataset needs at least one input column and a y column",
        ));
    }
    let (xs, ys) = rows
        .into_iter()
        .map(|mut r| {
            let y = r.pop().unwrap_or(f64::NAN);
            (r, y)
        })
        .unzip();
    Dataset::new(xs, ys)
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) || n == 0 || (n == 1 && lo != hi) {
        return Err(RksError::invalid(format!("invalid grid {lo}:{hi}:{n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect())
}

/// All ordered pairs of grid values, `x` outer.
pub fn grid_pairs(values: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    values
        .iter()
        .flat_map(|&x| values.iter().map(move |&y| (vec![x], vec![y])))
        .collect()
}

pub fn format_point(p: &[f64]) -> String {
    p.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn write_row<W: Write>(out: &mut W, cells: impl IntoIterator<Item = String>) -> Result<()> {
    let line = cells.into_iter().collect::<Vec<_>>().join(",");
    writeln!(out, "{line}")?;
    Ok(())
}

/// Row-major Gram matrix; the header and first column carry the points,
/// coordinates of multi-dimensional points joined by `;`.
pub fn write_gram_csv<W: Write>(gram: &GramMatrix, mut out: W) -> Result<()> {
    write_row(
        &mut out,
        std::iter::once("x".to_string()).chain(gram.points.iter().map(|p| format_point(p))),
    )?;
    for (i, p) in gram.points.iter().enumerate() {
        write_row(
            &mut out,
            std::iter::once(format_point(p)).chain(gram.entries.row(i).iter().map(f64::to_string)),
        )?;
    }
    Ok(())
}

fn coordinate_names(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=dim).map(|i| format!("{prefix}{i}")).collect()
    }
}

/// Kernel values as `x,y,K` (or `x1..xd,y1..yd,K`).
pub fn write_kernel_values_csv<W: Write>(
    rows: &[(Vec<f64>, Vec<f64>, f64)],
    dim: usize,
    mut out: W,
) -> Result<()> {
    let mut header = coordinate_names("x", dim);
    header.extend(coordinate_names("y", dim));
    header.push("K".into());
    write_row(&mut out, header)?;
    for (x, y, k) in rows {
        write_row(
            &mut out,
            x.iter()
                .chain(y)
                .chain(std::iter::once(k))
                .map(f64::to_string),
        )?;
    }
    Ok(())
}

/// Predictions as `x[..],prediction`.
pub fn write_predictions_csv<W: Write>(
    rows: &[(Vec<f64>, f64)],
    dim: usize,
    mut out: W,
) -> Result<()> {
    let mut header = coordinate_names("x", dim);
    header.push("prediction".into());
    write_row(&mut out, header)?;
    for (x, v) in rows {
        write_row(
            &mut out,
            x.iter().chain(std::iter::once(v)).map(f64::to_string),
        )?;
    }
    Ok(())
}

/// Serde helper writing scalar points as bare numbers and others as arrays.
pub mod points {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Point {
        Scalar(f64),
        Vector(Vec<f64>),
    }

    pub fn serialize<S: Serializer>(points: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let wrapped: Vec<Point> = points
            .iter()
            .map(|p| {
                if p.len() == 1 {
                    Point::Scalar(p[0])
                } else {
                    Point::Vector(p.clone())
                }
            })
            .collect();
        wrapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let wrapped = Vec::<Point>::deserialize(d)?;
        Ok(wrapped
            .into_iter()
            .map(|p| match p {
                Point::Scalar(v) => vec![v],
                Point::Vector(v) => v,
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{closed_form_kernel, gram, ClosedForm};

    #[test]
    fn dataset_needs_header() {
        assert!(read_dataset_csv("0.1,0.2\n0.3,0.4\n".as_bytes()).is_err());
        let d = read_dataset_csv("x,y\n0.1,0.2\n0.3,0.4\n".as_bytes()).unwrap();
        assert_eq!(d.xs, vec![vec![0.1], vec![0.3]]);
        assert_eq!(d.ys, vec![0.2, 0.4]);
    }

    #[test]
    fn bad_numbers_are_reported() {
        assert!(read_points_csv("x\nabc\n".as_bytes()).is_err());
        assert!(read_points_csv("x\nNaN\n".as_bytes()).is_err());
    }

    #[test]
    fn pairs_split_columns() {
        let p = read_pairs_csv("x1,x2,y1,y2\n1,2,3,4\n".as_bytes()).unwrap();
        assert_eq!(p, vec![(vec![1.0, 2.0], vec![3.0, 4.0])]);
        assert!(read_pairs_csv("x,y,z\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn gram_csv_layout() {
        let k = closed_form_kernel(ClosedForm::Min).unwrap();
        let g = gram(&k, &[vec![0.2], vec![0.5]]).unwrap();
        let mut buf = Vec::new();
        write_gram_csv(&g, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x,0.2,0.5\n0.2,0.2,0.2\n0.5,0.2,0.5\n"
        );
    }

    #[test]
    fn empty_value_list_is_header_only() {
        let mut buf = Vec::new();
        write_kernel_values_csv(&[], 1, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y,K\n");
    }
}
