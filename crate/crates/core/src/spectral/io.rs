//! Physical-space field export: node-major CSV and a compact little-endian
//! binary format. Spectral data is never serialized.

use crate::error::{Error, Result};
use crate::phase::{Dim, TracelessSym};
use crate::spectral::field::{Field, VelocityPressure};
use crate::spectral::grid::TorusGrid;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"DDFB";
const VERSION: u32 = 1;

/// Node-major CSV: grid multi-index columns, ε coords, σ̃ coords, then
/// (optionally) u components and π. Comment lines may carry provenance.
pub fn export_field_csv(
    field: &Field,
    vp: Option<&VelocityPressure>,
    path: &Path,
    comments: &[String],
) -> Result<()> {
    let grid = &field.grid;
    let d = grid.dim().d();
    let m = grid.dim().y_dim();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut header: Vec<String> = (0..d).map(|k| format!("i{k}")).collect();
    header.extend((0..m).map(|k| format!("eps_{k}")));
    header.extend((0..m).map(|k| format!("sig_{k}")));
    if vp.is_some() {
        header.extend((0..d).map(|k| format!("u_{k}")));
        header.push("pi".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for flat in 0..grid.num_nodes() {
        let idx = grid.node_index(flat);
        let mut row: Vec<String> = (0..d).map(|k| idx[k].to_string()).collect();
        row.extend(field.eps[flat].coords().iter().map(|v| format!("{v:.16e}")));
        row.extend(field.sig[flat].coords().iter().map(|v| format!("{v:.16e}")));
        if let Some(vp) = vp {
            row.extend(vp.u[flat].iter().take(d).map(|v| format!("{v:.16e}")));
            row.push(format!("{:.16e}", vp.pi[flat]));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Binary layout: magic, version, d, n, field count, then per field a tag
/// byte (0 = ε, 1 = σ̃, 2 = u, 3 = π) and node-major little-endian f64
/// payloads.
pub fn export_field_binary(
    field: &Field,
    vp: Option<&VelocityPressure>,
    path: &Path,
) -> Result<()> {
    let grid = &field.grid;
    let d = grid.dim().d();
    let m = grid.dim().y_dim();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(d as u32).to_le_bytes())?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    let nfields: u32 = if vp.is_some() { 4 } else { 2 };
    out.write_all(&nfields.to_le_bytes())?;

    let write_sym = |out: &mut dyn Write, values: &[TracelessSym]| -> Result<()> {
        for v in values {
            for c in v.coords() {
                out.write_all(&c.to_le_bytes())?;
            }
        }
        Ok(())
    };
    out.write_all(&[0u8])?;
    write_sym(&mut out, &field.eps)?;
    out.write_all(&[1u8])?;
    write_sym(&mut out, &field.sig)?;
    if let Some(vp) = vp {
        out.write_all(&[2u8])?;
        for v in &vp.u {
            for c in v.iter().take(d) {
                out.write_all(&c.to_le_bytes())?;
            }
        }
        out.write_all(&[3u8])?;
        for v in &vp.pi {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    let _ = m;
    out.flush()?;
    Ok(())
}

/// Reads the binary format back (means are not stored; the caller owns
/// that bookkeeping).
pub fn read_field_binary(path: &Path) -> Result<(Field, Option<VelocityPressure>)> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("bad magic in field file".into()));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |file: &mut dyn Read| -> Result<u32> {
        file.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut file)?;
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported field file version {version}")));
    }
    let d = read_u32(&mut file)? as usize;
    let n = read_u32(&mut file)? as usize;
    let nfields = read_u32(&mut file)?;
    let dim = Dim::new(d)?;
    let grid = TorusGrid::new(dim, n)?;
    let nodes = grid.num_nodes();
    let m = dim.y_dim();

    let mut f64buf = [0u8; 8];
    let mut read_f64 = |file: &mut dyn Read| -> Result<f64> {
        file.read_exact(&mut f64buf)?;
        Ok(f64::from_le_bytes(f64buf))
    };
    let mut eps = Vec::new();
    let mut sig = Vec::new();
    let mut u = None;
    let mut pi = None;
    for _ in 0..nfields {
        let mut tag = [0u8; 1];
        file.read_exact(&mut tag)?;
        match tag[0] {
            0 | 1 => {
                let mut vals = Vec::with_capacity(nodes);
                for _ in 0..nodes {
                    let coords: Vec<f64> =
                        (0..m).map(|_| read_f64(&mut file)).collect::<Result<_>>()?;
                    vals.push(TracelessSym::from_coords(dim, &coords)?);
                }
                if tag[0] == 0 {
                    eps = vals;
                } else {
                    sig = vals;
                }
            }
            2 => {
                let mut vals = Vec::with_capacity(nodes);
                for _ in 0..nodes {
                    let mut v = [0.0; 3];
                    for slot in v.iter_mut().take(d) {
                        *slot = read_f64(&mut file)?;
                    }
                    vals.push(v);
                }
                u = Some(vals);
            }
            3 => {
                let vals: Vec<f64> =
                    (0..nodes).map(|_| read_f64(&mut file)).collect::<Result<_>>()?;
                pi = Some(vals);
            }
            t => return Err(Error::Parse(format!("unknown field tag {t}"))),
        }
    }
    if eps.len() != nodes || sig.len() != nodes {
        return Err(Error::Parse("field file missing ε or σ̃ payload".into()));
    }
    let means = (
        {
            let mut acc = TracelessSym::zero(dim);
            for v in &eps {
                acc = acc.add(v);
            }
            acc.scale(grid.node_weight())
        },
        {
            let mut acc = TracelessSym::zero(dim);
            for v in &sig {
                acc = acc.add(v);
            }
            acc.scale(grid.node_weight())
        },
    );
    let field = Field { grid, eps, sig, means };
    let vp = match (u, pi) {
        (Some(u), Some(pi)) => Some(VelocityPressure { grid, u, pi }),
        _ => None,
    };
    Ok((field, vp))
}
