use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeLabel(pub u64);

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub type Weight = u64;

/// Identity of a vertex of a compressed instance relative to the instance it
/// was compressed from. Used to compare instances built along different paths.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKey {
    Original(VertexId),
    /// Contracted 2CSP vertex for all components with this neighbourhood.
    Group(Vec<VertexId>),
    /// Collapsed domination component, named by its smallest vertex.
    Component(VertexId),
    /// The accumulator for components with empty neighbourhood.
    Rest,
}

/// Domination cost; `Inf` absorbs under addition and loses every `min`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cost {
    Finite(u64),
    Inf,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Cost::Finite(c) => Some(c),
            Cost::Inf => None,
        }
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a.saturating_add(b)),
            _ => Cost::Inf,
        }
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.cmp(b),
            (Cost::Finite(_), Cost::Inf) => Ordering::Less,
            (Cost::Inf, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Inf, Cost::Inf) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(c) => write!(f, "{c}"),
            Cost::Inf => write!(f, "inf"),
        }
    }
}

/// Mixed-radix code for tuples; the first position is the most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedRadix {
    radices: Vec<u32>,
    strides: Vec<u64>,
    size: u64,
}

impl MixedRadix {
    pub fn new(radices: Vec<u32>) -> Result<Self> {
        let mut strides = vec![0u64; radices.len()];
        let mut acc: u64 = 1;
        for i in (0..radices.len()).rev() {
            strides[i] = acc;
            acc = acc
                .checked_mul(radices[i] as u64)
                .filter(|&a| a < (1u64 << 62))
                .ok_or_else(|| Error::TooLarge(format!("tuple space over radices {radices:?}")))?;
        }
        Ok(MixedRadix { radices, strides, size: acc })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn len(&self) -> usize {
        self.radices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radices.is_empty()
    }

    pub fn radices(&self) -> &[u32] {
        &self.radices
    }

    pub fn strides(&self) -> &[u64] {
        &self.strides
    }

    pub fn encode(&self, digits: &[u32]) -> u64 {
        digits.iter().zip(&self.strides).map(|(&d, &s)| d as u64 * s).sum()
    }

    pub fn digit(&self, code: u64, i: usize) -> u32 {
        ((code / self.strides[i]) % self.radices[i] as u64) as u32
    }

    pub fn decode(&self, code: u64) -> Vec<u32> {
        (0..self.len()).map(|i| self.digit(code, i)).collect()
    }
}
