//! Row/summary writers for `run`: CSV (plot-friendly) and JSON lines
//! (machine-friendly). Both start with a metadata record carrying the
//! order, start time, and exact-gain checksum so downstream analysis can
//! detect configuration drift. In CSV, everything that is not a data row
//! rides in `#` comments, which the `run` input parser ignores — output
//! round-trips back in.

use std::io::{self, Write};

use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

pub struct RowWriter<W: Write> {
    out: W,
    format: Format,
    order: usize,
    with_errors: bool,
    with_coeffs: bool,
}

impl<W: Write> RowWriter<W> {
    pub fn new(out: W, format: Format, order: usize, with_errors: bool, with_coeffs: bool) -> Self {
        RowWriter {
            out,
            format,
            order,
            with_errors,
            with_coeffs,
        }
    }

    pub fn metadata(&mut self, t0: f64, gains_checksum: u64) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                writeln!(
                    self.out,
                    "# hound run order={} t0={} gains_checksum={:#018x}",
                    self.order, t0, gains_checksum
                )?;
                let mut header = String::from("t");
                for m in 0..self.order {
                    header.push_str(&format!(",z{m}"));
                }
                header.push_str(",epsilon");
                if self.with_errors {
                    for m in 0..self.order {
                        header.push_str(&format!(",e{m}"));
                    }
                }
                if self.with_coeffs {
                    for j in 0..self.order {
                        header.push_str(&format!(",k{j}"));
                    }
                }
                writeln!(self.out, "{header}")
            }
            Format::JsonLines => {
                let record = json!({
                    "type": "meta",
                    "order": self.order,
                    "t0": t0,
                    "gains_checksum": format!("{gains_checksum:#018x}"),
                });
                writeln!(self.out, "{record}")
            }
        }
    }

    pub fn row(
        &mut self,
        t: f64,
        estimates: &[f64],
        residual: f64,
        errors: Option<&[f64]>,
        coeffs: Option<&[f64]>,
    ) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                let mut line = format!("{t}");
                for v in estimates {
                    line.push_str(&format!(",{v}"));
                }
                line.push_str(&format!(",{residual}"));
                if let Some(errors) = errors {
                    for e in errors {
                        line.push_str(&format!(",{e}"));
                    }
                }
                if let Some(coeffs) = coeffs {
                    for k in coeffs {
                        line.push_str(&format!(",{k}"));
                    }
                }
                writeln!(self.out, "{line}")
            }
            Format::JsonLines => {
                let mut record = json!({
                    "type": "row",
                    "t": t,
                    "z": estimates,
                    "epsilon": residual,
                });
                if let Some(errors) = errors {
                    record["errors"] = json!(errors);
                }
                if let Some(coeffs) = coeffs {
                    record["coeffs"] = json!(coeffs);
                }
                writeln!(self.out, "{record}")
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn summary(
        &mut self,
        accepted: u64,
        skipped: u64,
        coeffs: Option<&[f64]>,
        extrapolation: Option<&[(f64, Vec<f64>)]>,
    ) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                writeln!(self.out, "# summary accepted={accepted} skipped={skipped}")?;
                if let Some(coeffs) = coeffs {
                    let joined: Vec<String> = coeffs.iter().map(|k| k.to_string()).collect();
                    writeln!(self.out, "# coeffs {}", joined.join(","))?;
                }
                if let Some(table) = extrapolation {
                    let mut header = String::from("# extrapolation tau");
                    for m in 0..self.order {
                        header.push_str(&format!(",fhat{m}"));
                    }
                    writeln!(self.out, "{header}")?;
                    for (tau, values) in table {
                        let mut line = format!("# extrap {tau}");
                        for v in values {
                            line.push_str(&format!(",{v}"));
                        }
                        writeln!(self.out, "{line}")?;
                    }
                }
                Ok(())
            }
            Format::JsonLines => {
                let mut record = json!({
                    "type": "summary",
                    "accepted": accepted,
                    "skipped": skipped,
                });
                if let Some(coeffs) = coeffs {
                    record["coeffs"] = json!(coeffs);
                }
                if let Some(table) = extrapolation {
                    let rows: Vec<serde_json::Value> = table
                        .iter()
                        .map(|(tau, values)| json!({"tau": tau, "fhat": values}))
                        .collect();
                    record["extrapolation"] = json!(rows);
                }
                writeln!(self.out, "{record}")
            }
        }
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_round_trip_shapes() {
        let mut buffer = Vec::new();
        {
            let mut writer = RowWriter::new(&mut buffer, Format::Csv, 2, true, false);
            writer.metadata(0.0, 0xabcd).unwrap();
            writer
                .row(1.0, &[0.5, 0.25], 0.125, Some(&[0.01, 0.02]), None)
                .unwrap();
            writer
                .summary(1, 0, Some(&[1.0, 2.0]), Some(&[(2.0, vec![1.0, 0.5])]))
                .unwrap();
        }
        let text = String::from_utf8(buffer).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# hound run order=2"));
        assert_eq!(lines[1], "t,z0,z1,epsilon,e0,e1");
        assert_eq!(lines[2], "1,0.5,0.25,0.125,0.01,0.02");
        assert!(lines[3].starts_with("# summary accepted=1"));
        assert!(lines[4].starts_with("# coeffs 1,2"));
        assert!(lines[5].starts_with("# extrapolation tau,fhat0,fhat1"));
        assert!(lines[6].starts_with("# extrap 2,1,0.5"));
    }

    #[test]
    fn json_lines_records_are_tagged() {
        let mut buffer = Vec::new();
        {
            let mut writer = RowWriter::new(&mut buffer, Format::JsonLines, 1, false, false);
            writer.metadata(0.0, 1).unwrap();
            writer.row(1.0, &[0.5], 0.1, None, None).unwrap();
            writer.summary(1, 0, None, None).unwrap();
        }
        let text = String::from_utf8(buffer).unwrap();
        let types: Vec<String> = text
            .lines()
            .map(|line| {
                serde_json::from_str::<serde_json::Value>(line).unwrap()["type"]
                    .as_str()
                    .unwrap()
                    .to_string()
            })
            .collect();
        assert_eq!(types, vec!["meta", "row", "summary"]);
    }
}
