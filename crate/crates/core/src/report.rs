//! Table and float formatting shared by every emitted file.

use std::io::Write;

use crate::error::{Error, Result};

/// Fixed 17-significant-digit scientific form, so reruns are byte-identical.
/// Negative zero prints as zero.
pub fn fmt_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

pub fn write_csv<W, R, C>(out: W, header: &[&str], rows: R) -> Result<()>
where
    W: Write,
    R: IntoIterator<Item = C>,
    C: IntoIterator,
    C::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Solver(format!("csv write failed: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Solver(format!("csv write failed: {e}")))
}

/// Whitespace-separated columns with `#` comment header (gnuplot style).
pub fn write_dat<W, R, C>(mut out: W, title: &str, header: &[&str], rows: R) -> Result<()>
where
    W: Write,
    R: IntoIterator<Item = C>,
    C: IntoIterator,
    C::Item: AsRef<str>,
{
    let io = |e: std::io::Error| Error::Solver(format!("dat write failed: {e}"));
    writeln!(out, "# {title}").map_err(io)?;
    writeln!(out, "# {}", header.join(" ")).map_err(io)?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(|c| c.as_ref().to_string()).collect();
        writeln!(out, "{}", cells.join(" ")).map_err(io)?;
    }
    Ok(())
}
