//! CSV output with a fixed float format (17 significant digits, enough to
//! round-trip any f64 bit pattern), so identical runs produce identical
//! bytes.

use crate::error::Result;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub enum CsvField {
    F(f64),
    I(i64),
    S(String),
}

pub struct CsvWriter<W: Write> {
    out: W,
}

impl CsvWriter<BufWriter<File>> {
    pub fn create(path: &Path, header: &str) -> Result<Self> {
        let out = BufWriter::new(File::create(path)?);
        Self::from_writer(out, header)
    }
}

impl<W: Write> CsvWriter<W> {
    pub fn from_writer(mut out: W, header: &str) -> Result<Self> {
        writeln!(out, "{header}")?;
        Ok(CsvWriter { out })
    }

    pub fn row(&mut self, fields: &[CsvField]) -> Result<()> {
        let mut first = true;
        for f in fields {
            if !first {
                write!(self.out, ",")?;
            }
            first = false;
            match f {
                CsvField::F(x) => write!(self.out, "{}", fmt_f64(*x))?,
                CsvField::I(i) => write!(self.out, "{i}")?,
                CsvField::S(s) => write!(self.out, "{s}")?,
            }
        }
        writeln!(self.out)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_roundtrips() {
        for &x in &[
            1.0,
            -std::f64::consts::PI,
            1.4142135623730951,
            1e-300,
            2.5066282746310002,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn writes_expected_layout() {
        let buf = Vec::new();
        let mut w = CsvWriter::from_writer(buf, "a,b,c").unwrap();
        w.row(&[CsvField::I(1), CsvField::F(0.5), CsvField::S("x".into())])
            .unwrap();
        let buf = w.finish().unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "a,b,c\n1,5.0000000000000000e-1,x\n");
    }
}
