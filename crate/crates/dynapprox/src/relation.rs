//! Binary relations between two finite domains `0..rows` and `0..cols`.

use fixedbitset::FixedBitSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `{(0,0),(0,1),(1,0)}` on `{0,1}²`.
    NotBoth,
    /// Explicit row-major bit matrix.
    Table { rows: u32, cols: u32, bits: FixedBitSet },
    /// One side is a member vertex, the other a tuple vertex whose nonzero
    /// value `t+1` encodes a tuple; allowed iff either side is 0 or the
    /// member's digit of `t` equals the member value.
    Projection { tuple_on_left: bool, stride: u64, radix: u32 },
}

impl Relation {
    pub fn table(rows: u32, cols: u32, allowed: impl Fn(u32, u32) -> bool) -> Relation {
        let mut bits = FixedBitSet::with_capacity(rows as usize * cols as usize);
        for a in 0..rows {
            for b in 0..cols {
                if allowed(a, b) {
                    bits.insert(a as usize * cols as usize + b as usize);
                }
            }
        }
        Relation::Table { rows, cols, bits }
    }

    /// Member on the left, tuple on the right.
    pub fn projection(stride: u64, radix: u32) -> Relation {
        Relation::Projection { tuple_on_left: false, stride, radix }
    }

    #[inline]
    pub fn allows(&self, a: u32, b: u32) -> bool {
        match self {
            Relation::NotBoth => a == 0 || b == 0,
            Relation::Table { cols, bits, .. } => bits.contains(a as usize * *cols as usize + b as usize),
            Relation::Projection { tuple_on_left, stride, radix } => {
                let (member, tuple) = if *tuple_on_left { (b, a) } else { (a, b) };
                member == 0 || tuple == 0 || ((tuple as u64 - 1) / stride) % *radix as u64 == member as u64
            }
        }
    }

    pub fn transpose(&self) -> Relation {
        match self {
            Relation::NotBoth => Relation::NotBoth,
            Relation::Table { rows, cols, .. } => Relation::table(*cols, *rows, |b, a| self.allows(a, b)),
            Relation::Projection { tuple_on_left, stride, radix } => {
                Relation::Projection { tuple_on_left: !tuple_on_left, stride: *stride, radix: *radix }
            }
        }
    }

    /// Whether the relation contains `{0}×D_v ∪ D_u×{0}`.
    pub fn is_nullary(&self, rows: u32, cols: u32) -> bool {
        (0..cols).all(|b| self.allows(0, b)) && (0..rows).all(|a| self.allows(a, 0))
    }

    pub fn same_extension(&self, other: &Relation, rows: u32, cols: u32) -> bool {
        (0..rows).all(|a| (0..cols).all(|b| self.allows(a, b) == other.allows(a, b)))
    }
}
