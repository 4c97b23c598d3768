//! CSV tables that remember how each field was quoted.
//!
//! The grammar is RFC 4180 with two relaxations on input: records may be
//! delimited by a bare LF as well as CRLF, and field text may be any UTF-8
//! that is not one of the four special characters. Output always uses CRLF.
//!
//! Unlike a general-purpose CSV reader, [`parse`] keeps the observed quoting
//! of every field in [`Field::quoted`]. That bit is the hidden channel used
//! by [`crate::hiding`], so the parser is strict: anything it cannot
//! attribute unambiguously to one grammar rule is rejected.

use std::fmt;

use thiserror::Error;

const COMMA: u8 = b',';
const DQUOTE: u8 = b'"';
const CR: u8 = b'\r';
const LF: u8 = b'\n';
const BOM: &str = "\u{feff}";

/// Returns true if `content` contains a comma, double quote, CR or LF.
#[inline]
pub fn needs_quotes(content: &str) -> bool {
    content.bytes().any(|b| matches!(b, COMMA | DQUOTE | CR | LF))
}

/// One cell: its logical value plus whether it was enclosed in quotes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Field {
    /// Unescaped value, without enclosing quotes and with `""` collapsed.
    pub content: String,
    /// Whether the field is (or will be) written between double quotes.
    pub quoted: bool,
}

impl Field {
    pub fn new(content: impl Into<String>, quoted: bool) -> Self {
        Field {
            content: content.into(),
            quoted,
        }
    }

    /// A field written with only the quoting its content requires.
    pub fn minimal(content: impl Into<String>) -> Self {
        let content = content.into();
        let quoted = needs_quotes(&content);
        Field { content, quoted }
    }

    /// True when this field could legally be written either way.
    pub fn is_carrier(&self) -> bool {
        !needs_quotes(&self.content)
    }

    fn is_valid(&self) -> bool {
        self.quoted || !needs_quotes(&self.content)
    }
}

/// A ragged sequence of records.
///
/// Fields are enumerated row-major by [`Table::fields`]; that order is the
/// bit order of the hidden channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Table {
    pub records: Vec<Vec<Field>>,
    /// The source ended with a record delimiter.
    pub trailing_newline: bool,
}

impl Table {
    /// Builds a table, forcing `trailing_newline` when the last record is a
    /// single empty unquoted field.
    ///
    /// Without a trailing delimiter such a record serializes to nothing and
    /// would vanish on re-parse, so that combination is never constructed.
    pub fn new(records: Vec<Vec<Field>>, trailing_newline: bool) -> Self {
        let mut table = Table {
            records,
            trailing_newline,
        };
        table.trailing_newline |= table.last_record_is_blank();
        table
    }

    /// Total number of fields across all records.
    pub fn field_count(&self) -> usize {
        self.records.iter().map(Vec::len).sum()
    }

    /// Row-major iterator over every field.
    pub fn fields(&self) -> impl Iterator<Item = &Field> + '_ {
        self.records.iter().flatten()
    }

    /// Rebuild the table with each field replaced by `f(field)`, keeping
    /// the record structure.
    pub(crate) fn map_fields(&self, mut f: impl FnMut(&Field) -> Field) -> Table {
        let records = self
            .records
            .iter()
            .map(|record| record.iter().map(&mut f).collect())
            .collect();
        Table::new(records, self.trailing_newline)
    }

    fn last_record_is_blank(&self) -> bool {
        matches!(self.records.last().map(Vec::as_slice),
            Some([only]) if only.content.is_empty() && !only.quoted)
    }
}

/// Reasons a byte stream is not a CSV file under the strict grammar.
///
/// Lines and columns are 1-based; columns count bytes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("input is empty")]
    Empty,
    #[error("input is not valid UTF-8 (first bad byte at offset {valid_up_to})")]
    InvalidUtf8 { valid_up_to: usize },
    #[error("quoted field starting at line {line}, column {column} is never closed")]
    UnbalancedQuote { line: usize, column: usize },
    #[error("double quote inside an unquoted field at line {line}, column {column}")]
    QuoteInUnquotedField { line: usize, column: usize },
    #[error("unexpected character after closing quote at line {line}, column {column}")]
    TrailingAfterQuote { line: usize, column: usize },
    #[error("carriage return not followed by line feed at line {line}, column {column}")]
    BareCarriageReturn { line: usize, column: usize },
}

/// A field that cannot be written because it is unquoted yet contains a
/// special character, or a structurally empty table.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("table has no records")]
    NoRecords,
    #[error("record {record} has no fields")]
    EmptyRecord { record: usize },
    #[error("field {field} of record {record} is unquoted but contains a special character")]
    UnquotedSpecial { record: usize, field: usize },
}

/// Parses a CSV byte stream, keeping per-field quoting.
///
/// A leading UTF-8 byte order mark is discarded.
pub fn parse(bytes: &[u8]) -> Result<Table, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::InvalidUtf8 {
        valid_up_to: e.valid_up_to(),
    })?;
    let text = text.strip_prefix(BOM).unwrap_or(text);
    if text.is_empty() {
        return Err(ParseError::Empty);
    }
    Parser { text, pos: 0 }.run()
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn run(mut self) -> Result<Table, ParseError> {
        let mut records = Vec::new();
        let mut record = Vec::new();
        loop {
            record.push(self.field()?);
            match self.peek() {
                Some(COMMA) => {
                    self.pos += 1;
                }
                Some(CR) => {
                    if self.byte_at(self.pos + 1) != Some(LF) {
                        return Err(
                            self.error_at(self.pos, |line, column| ParseError::BareCarriageReturn { line, column })
                        );
                    }
                    self.pos += 2;
                    records.push(std::mem::take(&mut record));
                    if self.at_end() {
                        return Ok(Table::new(records, true));
                    }
                }
                Some(LF) => {
                    self.pos += 1;
                    records.push(std::mem::take(&mut record));
                    if self.at_end() {
                        return Ok(Table::new(records, true));
                    }
                }
                None => {
                    records.push(record);
                    return Ok(Table::new(records, false));
                }
                Some(_) => unreachable!("field() stops only at a delimiter or end of input"),
            }
        }
    }

    fn field(&mut self) -> Result<Field, ParseError> {
        if self.peek() == Some(DQUOTE) {
            self.escaped()
        } else {
            self.non_escaped()
        }
    }

    fn escaped(&mut self) -> Result<Field, ParseError> {
        let open = self.pos;
        self.pos += 1;
        let mut content = String::new();
        loop {
            let rest = &self.text[self.pos..];
            let Some(offset) = rest.find('"') else {
                return Err(self.error_at(open, |line, column| ParseError::UnbalancedQuote { line, column }));
            };
            content.push_str(&rest[..offset]);
            self.pos += offset + 1;
            if self.peek() == Some(DQUOTE) {
                content.push('"');
                self.pos += 1;
                continue;
            }
            break;
        }
        match self.peek() {
            None | Some(COMMA) | Some(CR) | Some(LF) => Ok(Field::new(content, true)),
            Some(_) => Err(self.error_at(self.pos, |line, column| ParseError::TrailingAfterQuote { line, column })),
        }
    }

    fn non_escaped(&mut self) -> Result<Field, ParseError> {
        let start = self.pos;
        let rest = &self.text.as_bytes()[start..];
        let len = rest
            .iter()
            .position(|&b| matches!(b, COMMA | DQUOTE | CR | LF))
            .unwrap_or(rest.len());
        self.pos += len;
        if self.peek() == Some(DQUOTE) {
            return Err(
                self.error_at(self.pos, |line, column| ParseError::QuoteInUnquotedField {
                    line,
                    column,
                }),
            );
        }
        Ok(Field::new(&self.text[start..self.pos], false))
    }

    fn peek(&self) -> Option<u8> {
        self.byte_at(self.pos)
    }

    fn byte_at(&self, i: usize) -> Option<u8> {
        self.text.as_bytes().get(i).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn error_at(&self, offset: usize, make: impl FnOnce(usize, usize) -> ParseError) -> ParseError {
        let before = &self.text.as_bytes()[..offset];
        let line = 1 + before.iter().filter(|&&b| b == LF).count();
        let line_start = before.iter().rposition(|&b| b == LF).map_or(0, |i| i + 1);
        make(line, offset - line_start + 1)
    }
}

/// Returns the table with every optional quote removed, so that a field is
/// quoted exactly when its content requires it.
pub fn strip(table: &Table) -> Table {
    table.map_fields(|f| Field::minimal(f.content.clone()))
}

/// Writes the table back to bytes using each field's quoting flag.
///
/// Records are joined with CRLF and internal quotes of quoted fields are
/// doubled.
pub fn serialize(table: &Table) -> Result<Vec<u8>, InvariantViolation> {
    if table.records.is_empty() {
        return Err(InvariantViolation::NoRecords);
    }
    for (r, record) in table.records.iter().enumerate() {
        if record.is_empty() {
            return Err(InvariantViolation::EmptyRecord { record: r });
        }
        if let Some(f) = record.iter().position(|field| !field.is_valid()) {
            return Err(InvariantViolation::UnquotedSpecial { record: r, field: f });
        }
    }
    let trailing = table.trailing_newline || table.last_record_is_blank();
    Ok(write_table(table, trailing))
}

/// The byte sequence that gets hashed: minimal quoting, CRLF delimiters,
/// exactly one trailing CRLF and no BOM.
///
/// Two tables with the same field contents always produce the same bytes,
/// whatever their source quoting or line endings.
pub fn canonical_bytes(table: &Table) -> Vec<u8> {
    write_table(&strip(table), true)
}

fn write_table(table: &Table, trailing_newline: bool) -> Vec<u8> {
    let mut out = Vec::with_capacity(estimate_len(table));
    for (r, record) in table.records.iter().enumerate() {
        if r > 0 {
            out.extend_from_slice(b"\r\n");
        }
        for (i, field) in record.iter().enumerate() {
            if i > 0 {
                out.push(COMMA);
            }
            write_field(&mut out, field);
        }
    }
    if trailing_newline {
        out.extend_from_slice(b"\r\n");
    }
    out
}

fn write_field(out: &mut Vec<u8>, field: &Field) {
    if !field.quoted {
        out.extend_from_slice(field.content.as_bytes());
        return;
    }
    out.push(DQUOTE);
    for b in field.content.bytes() {
        if b == DQUOTE {
            out.push(DQUOTE);
        }
        out.push(b);
    }
    out.push(DQUOTE);
}

fn estimate_len(table: &Table) -> usize {
    table
        .records
        .iter()
        .map(|r| r.iter().map(|f| f.content.len() + 3).sum::<usize>() + 2)
        .sum()
}

impl fmt::Display for Table {
    /// Shows the table as it would be serialized, without validation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bytes = write_table(self, self.trailing_newline);
        f.write_str(&String::from_utf8_lossy(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Field {
        Field::new(s, true)
    }

    fn u(s: &str) -> Field {
        Field::new(s, false)
    }

    #[test]
    fn parses_mixed_quoting_example() {
        let t = parse(b"\"H1\",H2,\"N1\"\r\n\"Hello,world\",\"green\",3.0").unwrap();
        assert_eq!(
            t.records,
            vec![
                vec![q("H1"), u("H2"), q("N1")],
                vec![q("Hello,world"), q("green"), u("3.0")],
            ]
        );
        assert!(!t.trailing_newline);
    }

    #[test]
    fn parses_single_byte() {
        let t = parse(b"a").unwrap();
        assert_eq!(t.records, vec![vec![u("a")]]);
    }

    #[test]
    fn collapses_doubled_quotes_and_keeps_empty_last_field() {
        let t = parse(b"\"a\"\"b\",\n").unwrap();
        assert_eq!(t.records, vec![vec![q("a\"b"), u("")]]);
        assert!(t.trailing_newline);
    }

    #[test]
    fn quoted_fields_may_hold_line_breaks() {
        let t = parse(b"\"x\r\ny\",\"p\nq\"\r\n").unwrap();
        assert_eq!(t.records, vec![vec![q("x\r\ny"), q("p\nq")]]);
    }

    #[test]
    fn lone_delimiter_is_one_empty_field() {
        let t = parse(b"\r\n").unwrap();
        assert_eq!(t.records, vec![vec![u("")]]);
        assert!(t.trailing_newline);
    }

    #[test]
    fn blank_lines_are_records() {
        let t = parse(b"a\n\nb").unwrap();
        assert_eq!(t.records, vec![vec![u("a")], vec![u("")], vec![u("b")]]);
    }

    #[test]
    fn bom_is_dropped() {
        let t = parse("\u{feff}x,y".as_bytes()).unwrap();
        assert_eq!(t.records, vec![vec![u("x"), u("y")]]);
        assert_eq!(parse("\u{feff}".as_bytes()), Err(ParseError::Empty));
    }

    #[test]
    fn non_ascii_text_is_accepted() {
        let t = parse("都道府県,\"人口\"\n".as_bytes()).unwrap();
        assert_eq!(t.records, vec![vec![u("都道府県"), q("人口")]]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert_eq!(parse(b""), Err(ParseError::Empty));
        assert_eq!(
            parse(b"a,\"bc"),
            Err(ParseError::UnbalancedQuote { line: 1, column: 3 })
        );
        assert_eq!(
            parse(b"ok\nab\"c"),
            Err(ParseError::QuoteInUnquotedField { line: 2, column: 3 })
        );
        assert_eq!(
            parse(b"\"ab\"c"),
            Err(ParseError::TrailingAfterQuote { line: 1, column: 5 })
        );
        assert_eq!(
            parse(b"a\rb"),
            Err(ParseError::BareCarriageReturn { line: 1, column: 2 })
        );
        assert_eq!(parse(b"a,\xff"), Err(ParseError::InvalidUtf8 { valid_up_to: 2 }));
    }

    #[test]
    fn strip_keeps_only_mandatory_quotes() {
        let t = Table::new(vec![vec![q("green"), u("3.0"), q("Hello,world")]], false);
        let s = strip(&t);
        assert_eq!(s.records, vec![vec![u("green"), u("3.0"), q("Hello,world")]]);
        assert_eq!(strip(&s), s);
    }

    #[test]
    fn serializes_fields_by_flag() {
        let t = Table::new(vec![vec![q("H1"), u("H2"), q("N1")]], true);
        assert_eq!(serialize(&t).unwrap(), b"\"H1\",H2,\"N1\"\r\n");

        let t = Table::new(vec![vec![u("")]], true);
        assert_eq!(serialize(&t).unwrap(), b"\r\n");

        let t = Table::new(vec![vec![q("a\"b")]], true);
        assert_eq!(serialize(&t).unwrap(), b"\"a\"\"b\"\r\n");
    }

    #[test]
    fn serialize_rejects_broken_tables() {
        let t = Table::new(vec![vec![u("ok"), u("a,b")]], false);
        assert_eq!(
            serialize(&t),
            Err(InvariantViolation::UnquotedSpecial { record: 0, field: 1 })
        );
        assert_eq!(
            serialize(&Table::new(vec![], false)),
            Err(InvariantViolation::NoRecords)
        );
        assert_eq!(
            serialize(&Table::new(vec![vec![u("a")], vec![]], false)),
            Err(InvariantViolation::EmptyRecord { record: 1 })
        );
    }

    #[test]
    fn blank_final_record_forces_trailing_delimiter() {
        let t = Table::new(vec![vec![u("a")], vec![u("")]], false);
        assert!(t.trailing_newline);
        assert_eq!(parse(&serialize(&t).unwrap()).unwrap(), t);

        // Hand-built tables skip `Table::new`; serialize still keeps the record.
        let raw = Table {
            records: vec![vec![u("")]],
            trailing_newline: false,
        };
        assert_eq!(serialize(&raw).unwrap(), b"\r\n");
    }

    #[test]
    fn canonical_form_of_embedded_example() {
        let signed = b"\"H1\",H2,\"N1\"\r\n\"Hello,world\",\"green\",3.0\r\nNice to meet you,\"apple\",\"8.0\"";
        let t = parse(signed).unwrap();
        assert_eq!(
            canonical_bytes(&t),
            b"H1,H2,N1\r\n\"Hello,world\",green,3.0\r\nNice to meet you,apple,8.0\r\n"
        );
    }

    #[test]
    fn canonical_form_ignores_line_endings() {
        let lf = parse(b"\"a\",b\n\"c\nd\",e\n").unwrap();
        let crlf = parse(b"a,\"b\"\r\n\"c\nd\",e").unwrap();
        assert_eq!(canonical_bytes(&lf), canonical_bytes(&crlf));
        assert_eq!(canonical_bytes(&lf), b"a,b\r\n\"c\nd\",e\r\n");
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let bytes = b"a,\"b,c\",\"\"\"\"\r\n,x\r\n";
        let t = parse(bytes).unwrap();
        assert_eq!(canonical_bytes(&t), bytes);
    }
}
