//! Line-oriented text format for systems.
//!
//! ```text
//! ifs carpet104
//! radicand 42
//! k 24
//! map (-6+1r)/12 0 0
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exactnum::QuadNumber;
use crate::geometry::{IFSystem, Similarity};

pub fn write_ifs(sys: &IFSystem) -> String {
    let mut out = String::new();
    writeln!(out, "ifs {}", sys.name).unwrap();
    writeln!(out, "radicand {}", sys.radicand).unwrap();
    writeln!(out, "k {}", sys.k).unwrap();
    for m in &sys.maps {
        writeln!(out, "map {} {} {}", m.ratio, m.tx, m.ty).unwrap();
    }
    out
}

pub fn parse_ifs(text: &str) -> Result<IFSystem> {
    let mut name = None;
    let mut radicand = None;
    let mut k = None;
    let mut maps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::FileFormat { line: line_no, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "ifs" if fields.len() == 2 => name = Some(fields[1].to_string()),
            "radicand" if fields.len() == 2 => {
                let d: u64 = fields[1]
                    .parse()
                    .map_err(|_| err(format!("invalid radicand `{}`", fields[1])))?;
                radicand = Some(d);
            }
            "k" if fields.len() == 2 => {
                k = Some(
                    fields[1]
                        .parse::<u32>()
                        .map_err(|_| err(format!("invalid k `{}`", fields[1])))?,
                );
            }
            "map" if fields.len() == 4 => {
                let d = radicand.ok_or_else(|| err("`map` before `radicand`".into()))?;
                let parse = |s: &str| QuadNumber::parse(s, d).map_err(|e| err(e.to_string()));
                maps.push(Similarity::new(parse(fields[1])?, parse(fields[2])?, parse(fields[3])?));
            }
            other => return Err(err(format!("unexpected line starting with `{other}`"))),
        }
    }
    let name = name.ok_or(Error::FileFormat { line: 0, message: "missing `ifs` header".into() })?;
    let radicand = radicand.unwrap_or(0);
    IFSystem::new(name, radicand, k.unwrap_or(0), maps)
}
