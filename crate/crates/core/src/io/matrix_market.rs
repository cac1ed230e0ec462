use std::io::{BufRead, Write};

use crate::linalg::CsrMatrix;
use crate::{Error, Result};

pub fn write_matrix_market<W: Write>(mut w: W, a: &CsrMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows, a.ncols, a.nnz())?;
    for (r, c, v) in a.triplets() {
        writeln!(w, "{} {} {v:?}", r + 1, c + 1)?;
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<CsrMatrix> {
    let bad = |m: &str| Error::Input(format!("matrix market: {m}"));
    let mut lines = r.lines();
    let banner = lines.next().ok_or_else(|| bad("empty input"))??;
    if !banner.starts_with("%%MatrixMarket matrix coordinate real") {
        return Err(bad("unsupported banner"));
    }
    let mut dims = None;
    let mut t = Vec::new();
    for line in lines {
        let line = line?;
        if line.starts_with('%') || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if dims.is_none() {
            let p = |s: &str| s.parse::<usize>().map_err(|_| bad("size line"));
            dims = Some((p(f[0])?, p(f[1])?));
            continue;
        }
        let r: usize = f[0].parse().map_err(|_| bad("row index"))?;
        let c: usize = f[1].parse().map_err(|_| bad("column index"))?;
        let v: f64 = f[2].parse().map_err(|_| bad("value"))?;
        t.push((r - 1, c - 1, v));
    }
    let (nr, nc) = dims.ok_or_else(|| bad("missing size line"))?;
    Ok(CsrMatrix::from_triplets(nr, nc, t))
}
