use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest table the search engine accepts. Sizes up to 34 are fast in
/// every operation; 209 is best-effort for counting and isomorphism.
pub const MAX_TABLE_SIZE: usize = 250;

/// Dense multiplication table of a finite magma: `m` elements named by
/// index, `table[i][j]` the index of the product of `i` and `j`.
/// Associativity is never assumed. Labels are display names carried
/// along for output; they play no role in the search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct CayleyTable {
    size: usize,
    entries: Vec<u16>,
    labels: Vec<String>,
}

impl CayleyTable {
    /// Builds a table from rows, labelling elements by their index.
    pub fn new(rows: Vec<Vec<u16>>) -> Result<Self> {
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::with_labels(rows, labels)
    }

    /// Builds a table from rows and one label per element.
    pub fn with_labels(rows: Vec<Vec<u16>>, labels: Vec<String>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::EmptyTable);
        }
        if size > MAX_TABLE_SIZE {
            return Err(Error::CapExceeded { size, cap: MAX_TABLE_SIZE });
        }
        if labels.len() != size {
            return Err(Error::LabelCount { size, found: labels.len() });
        }
        let mut entries = Vec::with_capacity(size * size);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != size {
                return Err(Error::RaggedRow { row, len: r.len(), expected: size });
            }
            for (col, &value) in r.iter().enumerate() {
                if usize::from(value) >= size {
                    return Err(Error::EntryOutOfRange { row, col, value: value.into(), size });
                }
                entries.push(value);
            }
        }
        Ok(CayleyTable { size, entries, labels })
    }

    /// Builds an `m`-element table by evaluating the product function on
    /// every pair, labelling elements by their index.
    pub fn from_fn(m: usize, mut product: impl FnMut(usize, usize) -> usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyTable);
        }
        if m > MAX_TABLE_SIZE {
            return Err(Error::CapExceeded { size: m, cap: MAX_TABLE_SIZE });
        }
        let rows = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let p = product(i, j);
                        u16::try_from(p).unwrap_or(u16::MAX)
                    })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Product of elements `i` and `j`, as an index.
    pub fn get(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.size && j < self.size);
        usize::from(self.entries[i * self.size + j])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub(crate) fn flat(&self) -> &[u16] {
        &self.entries
    }

    fn rows(&self) -> Vec<Vec<u16>> {
        self.entries.chunks(self.size).map(<[u16]>::to_vec).collect()
    }

    /// One line per row, entries comma-separated, trailing newline.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.size * self.size * 3);
        for row in self.entries.chunks(self.size) {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Parses the `to_csv` format. Labels are not part of the CSV form,
    /// so elements come back labelled by index.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|field| {
                    field.trim().parse::<u16>().map_err(|e| Error::Csv {
                        line: idx + 1,
                        message: format!("bad entry {field:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<u16>>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    size: usize,
    table: Vec<Vec<u16>>,
    #[serde(default)]
    labels: Vec<String>,
}

impl TryFrom<TableRepr> for CayleyTable {
    type Error = Error;

    fn try_from(repr: TableRepr) -> Result<Self> {
        if repr.size != repr.table.len() {
            return Err(Error::RaggedRow {
                row: repr.table.len(),
                len: repr.table.len(),
                expected: repr.size,
            });
        }
        if repr.labels.is_empty() {
            CayleyTable::new(repr.table)
        } else {
            CayleyTable::with_labels(repr.table, repr.labels)
        }
    }
}

impl From<CayleyTable> for TableRepr {
    fn from(t: CayleyTable) -> Self {
        TableRepr { size: t.size, table: t.rows(), labels: t.labels }
    }
}
