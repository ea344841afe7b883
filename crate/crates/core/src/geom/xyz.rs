//! Plain XYZ text format: count line, comment line, `El x y z` rows in Å.

use super::Geometry;
use crate::elements::Element;

#[derive(Debug, thiserror::Error)]
pub enum XyzError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("expected {expected} atom rows, found {found}")]
    CountMismatch { expected: usize, found: usize },
}

/// Parse the first frame of an XYZ document.
pub fn parse_xyz(text: &str) -> Result<Geometry, XyzError> {
    let mut lines = text.lines().enumerate();
    let (_, count_line) = lines.next().ok_or(XyzError::Malformed {
        line: 1,
        msg: "empty input".into(),
    })?;
    let natoms: usize = count_line.trim().parse().map_err(|_| XyzError::Malformed {
        line: 1,
        msg: format!("bad atom count {count_line:?}"),
    })?;
    // comment line may be absent only in a truncated file
    lines.next();

    let mut elements = Vec::with_capacity(natoms);
    let mut coords = Vec::with_capacity(natoms);
    for (idx, raw) in lines {
        if coords.len() == natoms {
            break;
        }
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let sym = parts.next().unwrap();
        let el: Element = sym.parse().map_err(|e| XyzError::Malformed {
            line: line_no,
            msg: format!("{e}"),
        })?;
        let mut xyz = [0.0_f64; 3];
        for slot in xyz.iter_mut() {
            let tok = parts.next().ok_or(XyzError::Malformed {
                line: line_no,
                msg: "missing coordinate".into(),
            })?;
            *slot = tok.parse().map_err(|_| XyzError::Malformed {
                line: line_no,
                msg: format!("bad coordinate {tok:?}"),
            })?;
        }
        elements.push(el);
        coords.push(xyz);
    }
    if coords.len() != natoms {
        return Err(XyzError::CountMismatch {
            expected: natoms,
            found: coords.len(),
        });
    }
    Ok(Geometry::new(elements, coords))
}

/// Serialize one geometry as an XYZ frame.
pub fn write_xyz(geom: &Geometry, comment: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n{}\n", geom.natoms(), comment));
    for (el, c) in geom.elements.iter().zip(&geom.coords) {
        out.push_str(&format!(
            "{:<2} {:>18.10} {:>18.10} {:>18.10}\n",
            el.symbol(),
            c[0],
            c[1],
            c[2]
        ));
    }
    out
}

/// Serialize a trajectory as concatenated XYZ frames.
pub fn write_xyz_frames<'a>(frames: impl IntoIterator<Item = (&'a Geometry, String)>) -> String {
    let mut out = String::new();
    for (geom, comment) in frames {
        out.push_str(&write_xyz(geom, &comment));
    }
    out
}
