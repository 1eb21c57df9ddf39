use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// One string element with its initialization flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cell {
    pub ch: char,
    pub init: bool,
}

/// A string value; the bounds are part of the value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StrValue {
    pub first: i64,
    pub last: i64,
    pub cells: Vec<Cell>,
}

impl StrValue {
    pub fn new(first: i64, text: &str) -> StrValue {
        let cells: Vec<Cell> = text.chars().map(|ch| Cell { ch, init: true }).collect();
        StrValue {
            first,
            last: first + cells.len() as i64 - 1,
            cells,
        }
    }

    /// A string of the given bounds whose elements are not initialized.
    pub fn uninit(first: i64, last: i64) -> StrValue {
        let len = (last - first + 1).max(0) as usize;
        StrValue {
            first,
            last,
            cells: vec![Cell { ch: '\0', init: false }; len],
        }
    }

    pub fn length(&self) -> i64 {
        (self.last - self.first + 1).max(0)
    }

    pub fn contains(&self, i: i64) -> bool {
        self.first <= i && i <= self.last
    }

    pub fn get(&self, i: i64) -> Option<Cell> {
        self.contains(i)
            .then(|| self.cells[(i - self.first) as usize])
    }

    pub fn set(&mut self, i: i64, ch: char) {
        let k = (i - self.first) as usize;
        self.cells[k] = Cell { ch, init: true };
    }

    pub fn is_initialized(&self) -> bool {
        self.cells.iter().all(|c| c.init)
    }

    pub fn text(&self) -> String {
        self.cells
            .iter()
            .map(|c| if c.init { c.ch } else { '?' })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Char(char),
    Str(StrValue),
}

impl Value {
    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(v) => *v,
            Value::Char(c) => *c as i64,
            Value::Bool(b) => *b as i64,
            Value::Str(_) => panic!("string used as integer"),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => panic!("{other:?} used as Boolean"),
        }
    }

    pub fn as_str(&self) -> &StrValue {
        match self {
            Value::Str(s) => s,
            other => panic!("{other:?} used as String"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Char(c) => write!(f, "'{c}'"),
            Value::Str(s) => write!(f, "({} .. {} => \"{}\")", s.first, s.last, s.text()),
        }
    }
}

/// Variable values keyed by source name.
pub type Bindings = BTreeMap<String, Value>;
