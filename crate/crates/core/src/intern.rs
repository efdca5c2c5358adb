//! Dense string interning.
//!
//! Every symbol gets the next free index on first sight, so ids always cover
//! `0..len()` without gaps and stay stable for the lifetime of the table.

use indexmap::IndexSet;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interner {
    symbols: IndexSet<String>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `label`, inserting it if unseen.
    pub fn intern(&mut self, label: &str) -> u32 {
        if let Some(idx) = self.symbols.get_index_of(label) {
            return idx as u32;
        }
        let (idx, _) = self.symbols.insert_full(label.to_owned());
        u32::try_from(idx).expect("intern table exceeds u32 range")
    }

    pub fn get(&self, label: &str) -> Option<u32> {
        self.symbols.get_index_of(label).map(|i| i as u32)
    }

    pub fn label(&self, id: u32) -> Option<&str> {
        self.symbols.get_index(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.symbols.iter().enumerate().map(|(i, s)| (i as u32, s.as_str()))
    }

    pub fn labels(&self) -> Vec<String> {
        self.symbols.iter().cloned().collect()
    }
}

impl<S: AsRef<str>> FromIterator<S> for Interner {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut table = Interner::new();
        for s in iter {
            table.intern(s.as_ref());
        }
        table
    }
}
