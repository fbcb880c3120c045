//! Dataset CSV files.
//!
//! Two layouts are accepted:
//!
//! ```text
//! protocol,lambda1,lambda2,p1_kpa,p2_kpa
//! protocol,e11,e22,s11_kpa,s22_kpa
//! ```
//!
//! The second (Green-Lagrange strain, second Piola stress) is pulled back to
//! stretches and first Piola stresses on load.

use std::io::{Read, Write};
use std::path::Path;

use cann::kinematics::{pullback_point, push_forward};
use cann::{BiaxialPoint, Dataset};

use crate::error::{CliError, CliResult};
use crate::format::num;

pub const STRETCH_HEADER: [&str; 5] = ["protocol", "lambda1", "lambda2", "p1_kpa", "p2_kpa"];
pub const STRAIN_HEADER: [&str; 5] = ["protocol", "e11", "e22", "s11_kpa", "s22_kpa"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Stretch,
    Strain,
}

/// Labelled rows exactly as stored in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub layout: Layout,
    pub rows: Vec<(String, [f64; 4])>,
    /// 1-based line of each row.
    pub lines: Vec<u64>,
}

fn detect(header: &csv::StringRecord) -> Option<Layout> {
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols == STRETCH_HEADER {
        Some(Layout::Stretch)
    } else if cols == STRAIN_HEADER {
        Some(Layout::Strain)
    } else {
        None
    }
}

/// Reads a table; `source` names the input in diagnostics.
pub fn read_table<R: Read>(reader: R, source: &str) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{source}: line 1: {e}")))?
        .clone();
    let layout = detect(&header).ok_or_else(|| {
        CliError::Input(format!(
            "{source}: line 1: expected header `{}` or `{}`, found `{}`",
            STRETCH_HEADER.join(","),
            STRAIN_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        ))
    })?;

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Input(format!("{source}: line {line}: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |msg: String| CliError::Input(format!("{source}: line {line}: {msg}"));
        if record.len() != 5 {
            return Err(bad(format!("expected 5 fields, found {}", record.len())));
        }
        let label = record[0].trim();
        if label.is_empty() {
            return Err(bad("empty protocol label".into()));
        }
        let mut values = [0.0; 4];
        for (k, v) in values.iter_mut().enumerate() {
            let field = record[k + 1].trim();
            *v = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("column {} is not a finite number: {field:?}", header[k + 1].trim())))?;
        }
        if layout == Layout::Stretch && !(values[0] > 0.0 && values[1] > 0.0) {
            return Err(bad(format!("stretches must be positive, got ({}, {})", values[0], values[1])));
        }
        rows.push((label.to_string(), values));
        lines.push(line);
    }
    Ok(Table { layout, rows, lines })
}

/// Stretch/Piola points of a table, converting strain rows.
pub fn to_points(table: &Table, source: &str) -> CliResult<Vec<(String, BiaxialPoint)>> {
    table
        .rows
        .iter()
        .zip(&table.lines)
        .map(|((label, v), line)| {
            let point = match table.layout {
                Layout::Stretch => BiaxialPoint::new(v[0], v[1], v[2], v[3]),
                Layout::Strain => pullback_point(v[0], v[1], v[2], v[3]),
            };
            point
                .map(|p| (label.clone(), p))
                .map_err(|e| CliError::Input(format!("{source}: line {line}: {e}")))
        })
        .collect()
}

pub fn load(path: &Path) -> CliResult<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::read(path, e))?;
    let source = path.display().to_string();
    let table = read_table(file, &source)?;
    let data = Dataset::from_labelled(to_points(&table, &source)?);
    if data.is_empty() {
        return Err(CliError::Input(format!("{source}: dataset has no rows")));
    }
    Ok(data)
}

fn write_rows<W: Write>(out: W, header: [&str; 5], rows: impl Iterator<Item = (String, [f64; 4])>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (label, v) in rows {
        w.write_record([label, num(v[0]), num(v[1]), num(v[2]), num(v[3])])?;
    }
    w.flush()?;
    Ok(())
}

/// Renders a dataset in the stretch layout.
pub fn to_csv(data: &Dataset) -> Vec<u8> {
    let mut buf = Vec::new();
    write_rows(
        &mut buf,
        STRETCH_HEADER,
        data.rows()
            .map(|(l, p)| (l.to_string(), [p.lambda1(), p.lambda2(), p.p1, p.p2])),
    )
    .expect("writing to memory");
    buf
}

/// Renders labelled points in the strain layout.
pub fn to_strain_csv(rows: &[(String, BiaxialPoint)]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_rows(
        &mut buf,
        STRAIN_HEADER,
        rows.iter().map(|(l, p)| {
            let q = push_forward(p);
            (l.clone(), [q.e11, q.e22, q.s11, q.s22])
        }),
    )
    .expect("writing to memory");
    buf
}

/// Renders labelled points in the stretch layout, keeping row order.
pub fn to_stretch_csv(rows: &[(String, BiaxialPoint)]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_rows(
        &mut buf,
        STRETCH_HEADER,
        rows.iter()
            .map(|(l, p)| (l.clone(), [p.lambda1(), p.lambda2(), p.p1, p.p2])),
    )
    .expect("writing to memory");
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_stretch_layout() {
        let text = "protocol,lambda1,lambda2,p1_kpa,p2_kpa\n1:1,1.0,1.0,0,0\n1:1,1.1,1.05,2.5,1.5\n0.5:1,1.1,1.0,3,1.5\n";
        let t = read_table(text.as_bytes(), "x").unwrap();
        assert_eq!(t.layout, Layout::Stretch);
        assert_eq!(t.lines, vec![2, 3, 4]);
        let data = Dataset::from_labelled(to_points(&t, "x").unwrap());
        assert_eq!(data.curves.len(), 2);
        assert_eq!(data.curves[0].points.len(), 2);
    }

    #[test]
    fn malformed_rows_cite_their_line() {
        let text = "protocol,lambda1,lambda2,p1_kpa,p2_kpa\n1:1,1.0,1.0,0,0\n1:1,1.1,abc,2.5,1.5\n";
        let err = read_table(text.as_bytes(), "x").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let text = "protocol,lambda1,lambda2,p1_kpa,p2_kpa\n1:1,1.0,1.0,0\n";
        assert!(read_table(text.as_bytes(), "x").unwrap_err().to_string().contains("line 2"));
        let text = "protocol,lambda1,lambda2,p1_kpa,p2_kpa\n1:1,-1.0,1.0,0,0\n";
        assert!(read_table(text.as_bytes(), "x").unwrap_err().to_string().contains("line 2"));
        let text = "protocol,lambda1,lambda2,p1_kpa,p2_kpa\n ,1.0,1.0,0,0\n";
        assert!(read_table(text.as_bytes(), "x").unwrap_err().to_string().contains("line 2"));
        let text = "a,b\n";
        assert!(read_table(text.as_bytes(), "x").unwrap_err().to_string().contains("line 1"));
    }

    #[test]
    fn strain_rows_are_pulled_back() {
        let text = "protocol,e11,e22,s11_kpa,s22_kpa\nx,0.105,0,10,0\nx,0,0,0,0\n";
        let t = read_table(text.as_bytes(), "x").unwrap();
        let pts = to_points(&t, "x").unwrap();
        assert!((pts[0].1.lambda1() - 1.1).abs() < 1e-15);
        assert!((pts[0].1.p1 - 11.0).abs() < 1e-12);
        assert_eq!(pts[1].1, BiaxialPoint::new(1.0, 1.0, 0.0, 0.0).unwrap());
        let text = "protocol,e11,e22,s11_kpa,s22_kpa\nx,0,0,0,0\nx,-0.5,0,0,0\n";
        let t = read_table(text.as_bytes(), "x").unwrap();
        let err = to_points(&t, "x").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn written_datasets_read_back_exactly() {
        let rows = vec![
            ("a".to_string(), BiaxialPoint::new(1.1, 0.97, 3.25, -0.1).unwrap()),
            ("b".to_string(), BiaxialPoint::new(1.0 / 3.0, 1.0, 1e-300, 7.0).unwrap()),
        ];
        let t = read_table(&to_stretch_csv(&rows)[..], "x").unwrap();
        assert_eq!(to_points(&t, "x").unwrap(), rows);
    }
}
