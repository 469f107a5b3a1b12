//! Minimal RFC 4180 reader and writer.
//!
//! Quoted fields may contain commas, quotes (doubled) and line breaks,
//! which are kept byte for byte. A leading UTF-8 byte order mark is
//! dropped and blank lines are skipped.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

/// One record and the 1-based line it starts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub line: usize,
    pub fields: Vec<String>,
}

/// A header row plus data records, all of the header's width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Record>,
}

pub fn parse_records(text: &str) -> Result<Vec<Record>, CsvError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut records = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;

    while chars.peek().is_some() {
        let start = line;
        let mut fields = Vec::new();
        let mut field = String::new();
        let mut quoted = false;
        loop {
            match chars.next() {
                None => {
                    fields.push(std::mem::take(&mut field));
                    break;
                }
                Some('"') if field.is_empty() && !quoted => {
                    quoted = true;
                    loop {
                        match chars.next() {
                            None => {
                                return Err(CsvError { line: start, message: "unterminated quoted field".into() });
                            }
                            Some('"') if chars.peek() == Some(&'"') => {
                                chars.next();
                                field.push('"');
                            }
                            Some('"') => break,
                            Some(c) => {
                                if c == '\n' {
                                    line += 1;
                                }
                                field.push(c);
                            }
                        }
                    }
                    match chars.peek() {
                        None | Some(',') | Some('\n') | Some('\r') => {}
                        Some(_) => {
                            return Err(CsvError { line, message: "unexpected character after closing quote".into() });
                        }
                    }
                }
                Some('"') => {
                    return Err(CsvError { line, message: "quote inside an unquoted field".into() });
                }
                Some(',') => {
                    fields.push(std::mem::take(&mut field));
                    quoted = false;
                }
                Some('\r') if chars.peek() == Some(&'\n') => {}
                Some('\n') => {
                    line += 1;
                    fields.push(std::mem::take(&mut field));
                    break;
                }
                Some(c) => field.push(c),
            }
        }
        let blank = fields.len() == 1 && fields[0].is_empty() && !quoted;
        if !blank {
            records.push(Record { line: start, fields });
        }
    }
    Ok(records)
}

/// Parses a table whose first record is the header. Every data record must
/// have as many fields as the header.
pub fn parse_table(text: &str) -> Result<Table, CsvError> {
    let mut records = parse_records(text)?.into_iter();
    let header = records.next().ok_or(CsvError { line: 1, message: "file has no header row".into() })?;
    let rows: Vec<Record> = records.collect();
    if let Some(bad) = rows.iter().find(|r| r.fields.len() != header.fields.len()) {
        return Err(CsvError {
            line: bad.line,
            message: format!("expected {} fields, found {}", header.fields.len(), bad.fields.len()),
        });
    }
    Ok(Table { header: header.fields, rows })
}

fn needs_quotes(field: &str) -> bool {
    field.contains([',', '"', '\n', '\r'])
}

pub fn write_record(out: &mut String, fields: &[String]) {
    if let [only] = fields {
        if only.is_empty() {
            out.push_str("\"\"\n");
            return;
        }
    }
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if needs_quotes(f) {
            out.push('"');
            out.push_str(&f.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(f);
        }
    }
    out.push('\n');
}

pub fn write_table(table: &Table) -> String {
    let mut out = String::new();
    write_record(&mut out, &table.header);
    for r in &table.rows {
        write_record(&mut out, &r.fields);
    }
    out
}
