//! Grid files: the binary `FDG1` layout and a CSV alternative.
//!
//! `FDG1`: magic `b"FDG1"`, `u64` M, `u64` N, `f64` sigma, then `M * N` `f64`
//! samples row-major, all little-endian.
//!
//! CSV: a `M,N,sigma` header line, a line with those three values, then `M`
//! lines of `N` comma-separated values. Readers also accept files where the
//! values line itself is the header.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectra::ObservationGrid;

pub const MAGIC: &[u8; 4] = b"FDG1";

pub fn write_fdg1<W: Write>(grid: &ObservationGrid, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(grid.m() as u64).to_le_bytes())?;
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    w.write_all(&grid.sigma().to_le_bytes())?;
    for v in grid.samples() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| Error::Format("FDG1 header is truncated".into()))?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_fdg1<R: Read>(mut r: R) -> Result<ObservationGrid> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for FDG1 magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected FDG1")));
    }
    let m = read_u64(&mut r)? as usize;
    let n = read_u64(&mut r)? as usize;
    let sigma = f64::from_bits(read_u64(&mut r)?);
    let count = m
        .checked_mul(n)
        .filter(|&c| c <= (1 << 34))
        .ok_or_else(|| Error::Format(format!("implausible FDG1 shape {m}x{n}")))?;
    let mut bytes = Vec::with_capacity(count * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!(
            "FDG1 body has {} bytes, expected {} for {m}x{n}",
            bytes.len(),
            count * 8
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    ObservationGrid::new(m, n, sigma, samples)
}

pub fn write_csv<W: Write>(grid: &ObservationGrid, mut w: W) -> Result<()> {
    writeln!(w, "M,N,sigma")?;
    writeln!(w, "{},{},{}", grid.m(), grid.n(), grid.sigma())?;
    for l in 0..grid.m() {
        let row: Vec<String> = grid.row(l).iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<ObservationGrid> {
    let mut lines = BufReader::new(r)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(s))) => Ok((i + 1, s)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(Error::Format(format!("CSV grid ended before {what}"))),
        }
    };
    let (mut lineno, mut header) = next("the header")?;
    if header.trim().eq_ignore_ascii_case("m,n,sigma") {
        (lineno, header) = next("the shape line")?;
    }
    let parts: Vec<&str> = header.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Format(format!("line {lineno}: expected 'M,N,sigma'")));
    }
    let shape_err = || Error::Format(format!("line {lineno}: bad shape line '{header}'"));
    let m: usize = parts[0].parse().map_err(|_| shape_err())?;
    let n: usize = parts[1].parse().map_err(|_| shape_err())?;
    let sigma: f64 = parts[2].parse().map_err(|_| shape_err())?;
    let mut samples = Vec::with_capacity(m.saturating_mul(n).min(1 << 26));
    for l in 0..m {
        let (lineno, line) = next(&format!("row {l}"))?;
        let before = samples.len();
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {lineno}: bad value '{}'", tok.trim())))?;
            samples.push(v);
        }
        if samples.len() - before != n {
            return Err(Error::Format(format!(
                "line {lineno}: expected {n} values, got {}",
                samples.len() - before
            )));
        }
    }
    if let Ok((lineno, _)) = next("") {
        return Err(Error::Format(format!("line {lineno}: more than {m} rows")));
    }
    ObservationGrid::new(m, n, sigma, samples)
}

/// Reads a grid file, detecting `FDG1` by its magic and falling back to CSV.
pub fn read_grid(path: &Path) -> Result<ObservationGrid> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(MAGIC) {
        read_fdg1(bytes.as_slice())
    } else {
        read_csv(bytes.as_slice())
    }
}

/// Writes CSV if the path ends in `.csv`, `FDG1` otherwise.
pub fn write_grid(path: &Path, grid: &ObservationGrid) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let w = BufWriter::new(f);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        write_csv(grid, w)
    } else {
        write_fdg1(grid, w)
    }
}
