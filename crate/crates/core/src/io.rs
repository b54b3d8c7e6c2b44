//! On-disk formats: event CSV, raw binary tag dumps, histogram CSV, and
//! normalized-correlation CSV. All writers emit byte-identical output for
//! identical inputs.

use crate::analysis::G2Curve;
use crate::error::{Error, Result};
use crate::tcspc::CoincidenceHistogram;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Write detected events as `channel,timestamp_ps` rows, one per event,
/// sorted within each channel.
pub fn write_events_csv<P: AsRef<Path>>(
    path: P,
    channels: &[(&str, &[u64])],
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "channel,timestamp_ps")?;
    for (name, tags) in channels {
        for t in *tags {
            writeln!(w, "{name},{t}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read an event CSV back into per-channel tag vectors, preserving the
/// channel order of first appearance.
pub fn read_events_csv<P: AsRef<Path>>(path: P) -> Result<Vec<(String, Vec<u64>)>> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut out: Vec<(String, Vec<u64>)> = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "channel,timestamp_ps" {
                return Err(Error::Parse(format!("unexpected header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (name, ts) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected 2 fields", lineno + 1)))?;
        let t: u64 = ts
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad timestamp `{ts}`", lineno + 1)))?;
        match out.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => v.push(t),
            None => out.push((name.to_string(), vec![t])),
        }
    }
    Ok(out)
}

/// Binary tag dump: little-endian u64 count, then that many little-endian
/// u64 picosecond timestamps.
pub fn write_tags_binary<P: AsRef<Path>>(path: P, tags: &[u64]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(&(tags.len() as u64).to_le_bytes())?;
    for t in tags {
        w.write_all(&t.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a binary tag dump written by [`write_tags_binary`].
pub fn read_tags_binary<P: AsRef<Path>>(path: P) -> Result<Vec<u64>> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Parse("truncated tag file: missing length".into()))?;
    let n = u64::from_le_bytes(buf) as usize;
    let mut out = Vec::with_capacity(n.min(1 << 24));
    for i in 0..n {
        r.read_exact(&mut buf)
            .map_err(|_| Error::Parse(format!("truncated tag file at record {i}")))?;
        out.push(u64::from_le_bytes(buf));
    }
    Ok(out)
}

/// Write a coincidence histogram as `tau_ns,counts` rows (bin centers).
pub fn write_histogram_csv<P: AsRef<Path>>(path: P, hist: &CoincidenceHistogram) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "tau_ns,counts")?;
    for (i, c) in hist.counts.iter().enumerate() {
        writeln!(w, "{:.4},{c}", hist.bin_center_s(i) * 1e9)?;
    }
    w.flush()?;
    Ok(())
}

/// Write a normalized correlation curve as `tau_ns,g2,g2_err` rows.
pub fn write_g2_csv<P: AsRef<Path>>(path: P, curve: &G2Curve) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "tau_ns,g2,g2_err")?;
    for ((t, g), e) in curve.tau.iter().zip(&curve.g2).zip(&curve.g2_err) {
        writeln!(w, "{:.4},{:.6},{:.6}", t * 1e9, g, e)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a `tau_ns,g2,g2_err` CSV back into a curve. The bin width is
/// recovered from the tau grid spacing.
pub fn read_g2_csv<P: AsRef<Path>>(path: P) -> Result<G2Curve> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let (mut tau, mut g2, mut g2_err) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "tau_ns,g2,g2_err" {
                return Err(Error::Parse(format!("unexpected header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected 3 fields",
                lineno + 1
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number `{s}`", lineno + 1)))
        };
        tau.push(parse(fields[0])? * 1e-9);
        g2.push(parse(fields[1])?);
        g2_err.push(parse(fields[2])?);
    }
    if tau.len() < 2 {
        return Err(Error::Parse("need at least two rows".into()));
    }
    let bin_width = tau[1] - tau[0];
    Ok(G2Curve {
        tau,
        g2,
        g2_err,
        bin_width,
    })
}
