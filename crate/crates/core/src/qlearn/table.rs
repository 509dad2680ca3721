use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::str::FromStr;

use super::Objective;

const FORMAT: &str = "fraud-ast-qtable/1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QTableError {
    #[error("tables differ in shape: {left} vs {right} actions")]
    ShapeMismatch { left: usize, right: usize },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unsupported format {0:?}")]
    Version(String),
}

/// Tabular action values. Rows are created on first write; unseen states
/// read as the initialization constant.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable<K: Ord> {
    n_actions: usize,
    init: f64,
    rows: BTreeMap<K, Vec<f64>>,
}

impl<K: Ord + Clone> QTable<K> {
    pub fn new(n_actions: usize, init: f64) -> Self {
        QTable {
            n_actions,
            init,
            rows: BTreeMap::new(),
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn init(&self) -> f64 {
        self.init
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&K, &[f64])> {
        self.rows.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn row(&self, key: &K) -> Option<&[f64]> {
        self.rows.get(key).map(Vec::as_slice)
    }

    pub fn row_mut(&mut self, key: &K) -> &mut [f64] {
        let (n, init) = (self.n_actions, self.init);
        if !self.rows.contains_key(key) {
            self.rows.insert(key.clone(), vec![init; n]);
        }
        self.rows.get_mut(key).expect("row inserted above")
    }

    pub fn get(&self, key: &K, action: usize) -> f64 {
        self.rows.get(key).map_or(self.init, |r| r[action])
    }

    /// Best action and its value; ties go to the lowest index.
    pub fn best(&self, key: &K, objective: Objective) -> (usize, f64) {
        match self.rows.get(key) {
            None => (0, self.init),
            Some(row) => best_in_row(row, objective),
        }
    }

    /// Root of the summed squared entry differences, over the union of rows.
    pub fn frobenius_delta(&self, other: &QTable<K>) -> Result<f64, QTableError> {
        if self.n_actions != other.n_actions {
            return Err(QTableError::ShapeMismatch {
                left: self.n_actions,
                right: other.n_actions,
            });
        }
        let keys: BTreeSet<&K> = self.rows.keys().chain(other.rows.keys()).collect();
        let mut sum = 0.0;
        for k in keys {
            for a in 0..self.n_actions {
                let d = self.get(k, a) - other.get(k, a);
                sum += d * d;
            }
        }
        Ok(sum.sqrt())
    }
}

pub(crate) fn best_in_row(row: &[f64], objective: Objective) -> (usize, f64) {
    let mut best = (0, row[0]);
    for (i, &v) in row.iter().enumerate().skip(1) {
        let better = match objective {
            Objective::Max => v > best.1,
            Objective::Min => v < best.1,
        };
        if better {
            best = (i, v);
        }
    }
    best
}

impl<K: Ord + Clone + Display> QTable<K> {
    /// Versioned text: a header, then one `row <label>: <values>` line per state.
    pub fn to_text(&self) -> String {
        let mut out = format!("format = {FORMAT}\nactions = {}\ninit = {:?}\n", self.n_actions, self.init);
        for (k, row) in &self.rows {
            let values: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&format!("row {k}: {}\n", values.join(" ")));
        }
        out
    }
}

impl<K: Ord + Clone + FromStr> QTable<K> {
    pub fn from_text(text: &str) -> Result<Self, QTableError> {
        let syntax = |line: usize, reason: &str| QTableError::Syntax {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = |name: &str| -> Result<(usize, String), QTableError> {
            let (i, l) = lines.next().ok_or_else(|| syntax(0, &format!("missing `{name}` header")))?;
            let (k, v) = l.split_once('=').ok_or_else(|| syntax(i + 1, "expected key = value"))?;
            if k.trim() != name {
                return Err(syntax(i + 1, &format!("expected `{name}`")));
            }
            Ok((i + 1, v.trim().to_string()))
        };
        let (_, format) = header("format")?;
        if format != FORMAT {
            return Err(QTableError::Version(format));
        }
        let (ln, n) = header("actions")?;
        let n_actions: usize = n.parse().map_err(|_| syntax(ln, "bad action count"))?;
        let (ln, init) = header("init")?;
        let init: f64 = init.parse().map_err(|_| syntax(ln, "bad init value"))?;
        let mut table = QTable::new(n_actions, init);
        for (i, l) in lines {
            let ln = i + 1;
            let rest = l.strip_prefix("row ").ok_or_else(|| syntax(ln, "expected `row`"))?;
            let (label, values) = rest.rsplit_once(':').ok_or_else(|| syntax(ln, "missing `:`"))?;
            let key: K = label.trim().parse().map_err(|_| syntax(ln, "bad state label"))?;
            let row: Vec<f64> = values
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| syntax(ln, "bad value"))?;
            if row.len() != n_actions {
                return Err(syntax(ln, &format!("expected {n_actions} values, found {}", row.len())));
            }
            if table.rows.insert(key, row).is_some() {
                return Err(syntax(ln, "duplicate state"));
            }
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_tables_have_zero_delta() {
        let mut q = QTable::<u32>::new(3, 0.0);
        q.row_mut(&1)[2] = 5.0;
        assert_eq!(q.frobenius_delta(&q.clone()).unwrap(), 0.0);
    }

    #[test]
    fn single_entry_delta() {
        let a = QTable::<u32>::new(3, 0.0);
        let mut b = a.clone();
        b.row_mut(&7)[1] = 2.0;
        assert_eq!(a.frobenius_delta(&b).unwrap(), 2.0);
        assert_eq!(b.frobenius_delta(&a).unwrap(), 2.0);
    }

    #[test]
    fn shape_mismatch() {
        let a = QTable::<u32>::new(3, 0.0);
        let b = QTable::<u32>::new(4, 0.0);
        assert_eq!(
            a.frobenius_delta(&b),
            Err(QTableError::ShapeMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(best_in_row(&[1.0, 3.0, 3.0], Objective::Max), (1, 3.0));
        assert_eq!(best_in_row(&[2.0, 2.0], Objective::Min), (0, 2.0));
        assert_eq!(QTable::<u32>::new(4, 0.0).best(&9, Objective::Max), (0, 0.0));
    }

    #[test]
    fn text_round_trip() {
        let mut q = QTable::<u32>::new(2, -1.5);
        q.row_mut(&3).copy_from_slice(&[0.1, 1e-300]);
        q.row_mut(&11).copy_from_slice(&[-7.25, f64::MAX]);
        let back = QTable::<u32>::from_text(&q.to_text()).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn rejects_wrong_version_and_row_width() {
        assert_eq!(
            QTable::<u32>::from_text("format = other\n"),
            Err(QTableError::Version("other".into()))
        );
        let bad = "format = fraud-ast-qtable/1\nactions = 2\ninit = 0.0\nrow 1: 0.5\n";
        assert!(matches!(QTable::<u32>::from_text(bad), Err(QTableError::Syntax { line: 4, .. })));
    }
}
