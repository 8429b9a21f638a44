//! Sample input: comma-separated rows with optional header, `#` comments,
//! and columns addressed by index or name.

use std::io::BufRead;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl ColumnRef {
    fn parse(token: &str) -> ColumnRef {
        match token.trim().parse::<usize>() {
            Ok(idx) => ColumnRef::Index(idx),
            Err(_) => ColumnRef::Name(token.trim().to_string()),
        }
    }
}

/// Column selection for (t, f) rows, e.g. `0,1` or `time,value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Columns {
    pub t: ColumnRef,
    pub f: ColumnRef,
}

impl Columns {
    pub fn parse(spec: &str) -> Result<Columns, String> {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 2 {
            return Err(format!("--columns needs two entries, got `{spec}`"));
        }
        Ok(Columns {
            t: ColumnRef::parse(parts[0]),
            f: ColumnRef::parse(parts[1]),
        })
    }

    fn needs_header(&self) -> bool {
        matches!(self.t, ColumnRef::Name(_)) || matches!(self.f, ColumnRef::Name(_))
    }
}

/// One input row after parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    Sample {
        line: usize,
        t: f64,
        f: f64,
    },
    /// Malformed or rejected row; the stream continues.
    Skipped {
        line: usize,
        reason: String,
    },
}

/// Streaming reader. Detects an optional header on the first data line:
/// if the selected fields do not parse as numbers there, the line is
/// treated as a header and names are resolved against it.
pub struct SampleReader<B> {
    input: B,
    columns: Columns,
    resolved: Option<(usize, usize)>,
    line_no: usize,
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn resolve(column: &ColumnRef, header: &[&str]) -> Result<usize, String> {
    match column {
        ColumnRef::Index(idx) => Ok(*idx),
        ColumnRef::Name(name) => header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| format!("column `{name}` not found in header")),
    }
}

impl<B: BufRead> SampleReader<B> {
    pub fn new(input: B, columns: Columns) -> Self {
        SampleReader {
            input,
            columns,
            resolved: None,
            line_no: 0,
        }
    }

    /// Next row, or `Ok(None)` at end of input. `Err` is reserved for
    /// unrecoverable problems (I/O failures, unresolvable header names).
    pub fn next_row(&mut self) -> Result<Option<Row>, String> {
        loop {
            let mut line = String::new();
            let read = self
                .input
                .read_line(&mut line)
                .map_err(|e| format!("read failed: {e}"))?;
            if read == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields = split_fields(trimmed);

            if self.resolved.is_none() {
                // First data-ish line: header, or data with index columns.
                let as_data = self.try_parse(&fields);
                match as_data {
                    Some((t, f)) if !self.columns.needs_header() => {
                        self.resolved = Some(self.index_pair()?);
                        return Ok(Some(Row::Sample {
                            line: self.line_no,
                            t,
                            f,
                        }));
                    }
                    _ => {
                        let t_idx = resolve(&self.columns.t, &fields)?;
                        let f_idx = resolve(&self.columns.f, &fields)?;
                        self.resolved = Some((t_idx, f_idx));
                        continue; // header consumed
                    }
                }
            }

            let (t_idx, f_idx) = self.resolved.expect("resolved above");
            match parse_pair(&fields, t_idx, f_idx) {
                Ok((t, f)) => {
                    return Ok(Some(Row::Sample {
                        line: self.line_no,
                        t,
                        f,
                    }))
                }
                Err(reason) => {
                    return Ok(Some(Row::Skipped {
                        line: self.line_no,
                        reason,
                    }))
                }
            }
        }
    }

    fn index_pair(&self) -> Result<(usize, usize), String> {
        match (&self.columns.t, &self.columns.f) {
            (ColumnRef::Index(t), ColumnRef::Index(f)) => Ok((*t, *f)),
            _ => Err("named columns require a header row".to_string()),
        }
    }

    fn try_parse(&self, fields: &[&str]) -> Option<(f64, f64)> {
        match (&self.columns.t, &self.columns.f) {
            (ColumnRef::Index(t), ColumnRef::Index(f)) => parse_pair(fields, *t, *f).ok(),
            _ => None,
        }
    }
}

fn parse_pair(fields: &[&str], t_idx: usize, f_idx: usize) -> Result<(f64, f64), String> {
    let get = |idx: usize| -> Result<f64, String> {
        let raw = fields
            .get(idx)
            .ok_or_else(|| format!("missing column {idx}"))?;
        raw.parse::<f64>()
            .map_err(|_| format!("not a number: `{raw}`"))
    };
    Ok((get(t_idx)?, get(f_idx)?))
}
