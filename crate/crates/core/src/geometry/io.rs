use std::io::{BufRead, Write};

use super::{AtomArray, Source};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Reads one atom per line as three whitespace-separated numbers
/// (`k_L x`, `k_L y`, `k_L z`). Text after `#` is ignored.
pub fn read_positions<T: Real, R: BufRead>(reader: R) -> Result<AtomArray<T>> {
    let mut positions = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let mut c = [T::zero(); 3];
        for (slot, f) in c.iter_mut().zip(&fields) {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("not a number: {f:?}"),
            })?;
            *slot = T::lit(v);
        }
        positions.push(Vec3::from_array(c));
    }
    AtomArray::new(positions, Source::File)
}

pub fn write_positions<T: Real, W: Write>(atoms: &AtomArray<T>, mut out: W) -> Result<()> {
    writeln!(out, "# k_L x, k_L y, k_L z ({})", atoms.source().as_str())?;
    for p in atoms.positions() {
        writeln!(
            out,
            "{:.16e} {:.16e} {:.16e}",
            p.x.as_f64(),
            p.y.as_f64(),
            p.z.as_f64()
        )?;
    }
    Ok(())
}
