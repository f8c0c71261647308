//! Path values: the sequence `⟨⊥, p1, p2, ...⟩` of port indices leading
//! from the root to a node.
//!
//! The derived `Ord` is exactly the order the protocol relies on: symbols
//! compare numerically with `⊥` (encoded as 0) below every port, and a
//! proper prefix precedes all of its extensions.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// Encoding of `⊥`.
pub const BOTTOM: u32 = 0;
/// Encoding of the overflow marker `⊤`, greater than every port.
pub const OVERFLOW: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PathValue(Vec<u32>);

impl PathValue {
    /// `⟨⊥⟩`, the root's path.
    pub fn root() -> PathValue {
        PathValue(vec![BOTTOM])
    }

    /// `⟨⊥, ports...⟩`.
    pub fn from_ports(ports: &[u32]) -> PathValue {
        let mut symbols = Vec::with_capacity(ports.len() + 1);
        symbols.push(BOTTOM);
        symbols.extend_from_slice(ports);
        PathValue(symbols)
    }

    /// Raw symbols, including possibly corrupted ones.
    pub fn from_symbols(symbols: Vec<u32>) -> PathValue {
        PathValue(symbols)
    }

    /// `⟨⊤⟩`: the value written when every candidate path overflows the
    /// length bound. It sorts after every path that starts with `⊥`.
    pub fn overflow() -> PathValue {
        PathValue(vec![OVERFLOW])
    }

    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_overflow(&self) -> bool {
        self.0.first() == Some(&OVERFLOW)
    }

    /// `⊥` at position 0 only, and every other symbol a real port.
    pub fn is_well_formed(&self) -> bool {
        matches!(self.0.split_first(), Some((&BOTTOM, rest))
            if rest.iter().all(|&s| s != BOTTOM && s != OVERFLOW))
    }

    /// Unbounded `self ⊕ port`.
    pub fn append(&self, port: u32) -> PathValue {
        let mut symbols = Vec::with_capacity(self.0.len() + 1);
        symbols.extend_from_slice(&self.0);
        symbols.push(port);
        PathValue(symbols)
    }

    /// `|self ⊕ port|_bound`: append, then keep the first `bound` symbols.
    pub fn concat_truncate(&self, port: u32, bound: usize) -> PathValue {
        let mut p = self.append(port);
        p.0.truncate(bound);
        p
    }

    /// Candidate path offered by a neighbor holding `self` over a link the
    /// neighbor numbers `port`. An extension that would exceed `bound`
    /// symbols becomes [`PathValue::overflow`].
    pub fn successor(&self, port: u32, bound: usize) -> PathValue {
        if self.0.len() + 1 > bound {
            PathValue::overflow()
        } else {
            self.append(port)
        }
    }

    /// If `prefix` is a proper prefix of `self`, the remaining suffix.
    pub fn proper_suffix_after(&self, prefix: &PathValue) -> Option<&[u32]> {
        if prefix.0.len() < self.0.len() && self.0.starts_with(&prefix.0) {
            Some(&self.0[prefix.0.len()..])
        } else {
            None
        }
    }

    /// True if `self` equals `other` or is a prefix of it.
    pub fn is_prefix_of(&self, other: &PathValue) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Parses the [`Display`](fmt::Display) form: `⊥` (or `_`) and ports
    /// joined by `.`, or `⊤` alone.
    pub fn parse(text: &str) -> Option<PathValue> {
        let text = text.trim();
        if text == "⊤" {
            return Some(PathValue::overflow());
        }
        if text.is_empty() {
            return None;
        }
        text.split('.')
            .map(|tok| match tok.trim() {
                "⊥" | "_" => Some(BOTTOM),
                "⊤" => Some(OVERFLOW),
                t => t.parse::<u32>().ok().filter(|&p| p != BOTTOM),
            })
            .collect::<Option<Vec<u32>>>()
            .map(PathValue)
    }
}

/// Total order on path values (`⊥` minimal, prefixes first).
pub fn lex_compare(a: &PathValue, b: &PathValue) -> Ordering {
    a.cmp(b)
}

impl fmt::Display for PathValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            match s {
                BOTTOM => f.write_str("⊥")?,
                OVERFLOW => f.write_str("⊤")?,
                p => write!(f, "{p}")?,
            }
        }
        Ok(())
    }
}
