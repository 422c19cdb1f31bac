use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// A record with a fixed column layout.
pub trait CsvRow {
    const HEADER: &'static [&'static str];

    fn fields(&self) -> Vec<String>;
}

/// Writes the header and one line per row, `\n`-terminated.
pub fn write_csv<T: CsvRow, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(T::HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv<T: CsvRow>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    write_csv(rows, File::create(path)?)
}

/// Shortest rendering with 12 significant digits: plain decimal for
/// exponents in `[-5, 12)`, scientific otherwise.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Row(f64);

    impl CsvRow for Row {
        const HEADER: &'static [&'static str] = &["a", "b"];

        fn fields(&self) -> Vec<String> {
            vec!["x".into(), format_float(self.0)]
        }
    }

    fn render(rows: &[Row]) -> String {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_only_and_rows() {
        assert_eq!(render(&[]), "a,b\n");
        assert_eq!(render(&[Row(1.5)]), "a,b\nx,1.5\n");
        assert_eq!(render(&[Row(1.5), Row(2.0)]).lines().count(), 3);
    }

    #[test]
    fn same_rows_same_bytes() {
        let rows = [Row(std::f64::consts::PI), Row(1e-9)];
        assert_eq!(render(&rows), render(&rows));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(-0.25), "-0.25");
        assert_eq!(format_float(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(123456.7890123456), "123456.789012");
        assert_eq!(format_float(9.99999999999995), "10");
        assert_eq!(format_float(1e-9), "1e-9");
        assert_eq!(format_float(1.2345e15), "1.2345e15");
        assert_eq!(format_float(0.0001234), "0.0001234");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        emit_csv(&[Row(0.5)], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\nx,0.5\n");
        assert!(emit_csv(&[Row(0.5)], dir.path().join("missing/out.csv")).is_err());
    }
}
