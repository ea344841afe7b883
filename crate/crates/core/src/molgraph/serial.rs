//! Plain-text molecular graph format.
//!
//! ```text
//! # optional comments
//! atoms C H H H H
//! bond 0 1 1
//! bond 0 2 1
//! stereo tet 0 +
//! stereo db 1 2 -
//! ```
//!
//! One `atoms` line, one `bond` line per upper-triangle entry (`i j order`),
//! optional `stereo` lines (`tet <center> +|-` or `db <i> <j> +|-`).
//! Writing is deterministic, so parse/write round-trips are stable.

use super::stereo::{Parity, StereoAssignment, StereoSite};
use super::{GraphError, MolGraph};
use crate::elements::Element;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl MolGraph {
    /// Serialize to the plain-text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("atoms");
        for e in self.elements() {
            let _ = write!(out, " {}", e.symbol());
        }
        out.push('\n');
        for (i, j, o) in self.bonds() {
            let _ = writeln!(out, "bond {i} {j} {o}");
        }
        for a in self.stereo() {
            let p = match a.parity {
                Parity::Plus => '+',
                Parity::Minus => '-',
            };
            match a.site {
                StereoSite::Tetrahedral { center } => {
                    let _ = writeln!(out, "stereo tet {center} {p}");
                }
                StereoSite::DoubleBond { atoms: (i, j) } => {
                    let _ = writeln!(out, "stereo db {i} {j} {p}");
                }
            }
        }
        out
    }

    /// Parse the plain-text format.
    pub fn parse_text(text: &str) -> Result<MolGraph, ParseError> {
        let mut elements: Option<Vec<Element>> = None;
        let mut bonds: Vec<(usize, usize, u8)> = Vec::new();
        let mut stereo: Vec<StereoAssignment> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tok = content.split_whitespace();
            let head = tok.next().unwrap();
            let syntax = |msg: String| ParseError::Syntax { line, msg };
            match head {
                "atoms" => {
                    let parsed: Result<Vec<Element>, _> =
                        tok.map(|s| s.parse::<Element>()).collect();
                    elements = Some(parsed.map_err(|e| syntax(format!("{e}")))?);
                }
                "bond" => {
                    let vals: Vec<&str> = tok.collect();
                    if vals.len() != 3 {
                        return Err(syntax("bond needs: i j order".into()));
                    }
                    let i = vals[0]
                        .parse()
                        .map_err(|_| syntax(format!("bad atom index {:?}", vals[0])))?;
                    let j = vals[1]
                        .parse()
                        .map_err(|_| syntax(format!("bad atom index {:?}", vals[1])))?;
                    let o = vals[2]
                        .parse()
                        .map_err(|_| syntax(format!("bad bond order {:?}", vals[2])))?;
                    bonds.push((i, j, o));
                }
                "stereo" => {
                    let vals: Vec<&str> = tok.collect();
                    let parse_parity = |s: &str| match s {
                        "+" => Ok(Parity::Plus),
                        "-" => Ok(Parity::Minus),
                        other => Err(syntax(format!("bad parity {other:?}, want + or -"))),
                    };
                    match vals.as_slice() {
                        ["tet", c, p] => {
                            let center = c
                                .parse()
                                .map_err(|_| syntax(format!("bad atom index {c:?}")))?;
                            stereo.push(StereoAssignment {
                                site: StereoSite::Tetrahedral { center },
                                parity: parse_parity(p)?,
                            });
                        }
                        ["db", i, j, p] => {
                            let i: usize = i
                                .parse()
                                .map_err(|_| syntax(format!("bad atom index {i:?}")))?;
                            let j: usize = j
                                .parse()
                                .map_err(|_| syntax(format!("bad atom index {j:?}")))?;
                            stereo.push(StereoAssignment {
                                site: StereoSite::double_bond(i, j),
                                parity: parse_parity(p)?,
                            });
                        }
                        _ => {
                            return Err(syntax(
                                "stereo needs: tet <center> +|- or db <i> <j> +|-".into(),
                            ))
                        }
                    }
                }
                other => return Err(syntax(format!("unknown directive {other:?}"))),
            }
        }

        let elements = elements.ok_or(ParseError::Syntax {
            line: 0,
            msg: "missing atoms line".into(),
        })?;
        let g = MolGraph::build(elements, &bonds)?;
        Ok(g.with_stereo(stereo)?)
    }
}
