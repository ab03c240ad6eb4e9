//! Ambient groups, element encodings, characters, and site sets.
//!
//! Two group families are supported: cyclic groups `Z/NZ` and vector groups
//! `F_3^n`. Elements are canonically encoded as indices below the group
//! order; for vector groups the index is the little-endian base-3 value of
//! the coordinate vector (coordinate 1 least significant). The dual group is
//! identified with the group itself, so characters are evaluated as
//! `character(xi, x)`.
//!
//! Integer intervals `[N] = {1, ..., N}` are a separate domain (no
//! wraparound); they share the set-file format but none of the group
//! arithmetic.

use crate::error::Error;
use crate::rational::ratio;
use crate::Result;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Largest supported vector dimension (3^40 still fits in u64).
pub const MAX_VECTOR_DIMENSION: u32 = 40;

/// Order cap for operations that materialize group-sized tables
/// (transforms, counting loops, profiles). Element arithmetic itself has no
/// cap beyond [`MAX_VECTOR_DIMENSION`].
pub const MAX_TABLE_ORDER: u64 = 1 << 24;

/// One of the two ambient group families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AmbientGroup {
    /// `Z/NZ` with `N >= 1`.
    Cyclic { modulus: u64 },
    /// `F_3^n` with `n >= 1`; the characteristic is fixed to 3.
    Vector { dimension: u32 },
}

/// A group element in canonical index encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement(pub u64);

impl AmbientGroup {
    pub fn cyclic(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("cyclic modulus must be >= 1".into()));
        }
        Ok(AmbientGroup::Cyclic { modulus })
    }

    pub fn vector(dimension: u32) -> Result<Self> {
        if dimension == 0 || dimension > MAX_VECTOR_DIMENSION {
            return Err(Error::InvalidArgument(format!(
                "vector dimension must be in 1..={MAX_VECTOR_DIMENSION}"
            )));
        }
        Ok(AmbientGroup::Vector { dimension })
    }

    /// `N` for cyclic groups, `3^n` for vector groups.
    pub fn order(&self) -> u64 {
        match *self {
            AmbientGroup::Cyclic { modulus } => modulus,
            AmbientGroup::Vector { dimension } => 3u64.pow(dimension),
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, AmbientGroup::Vector { .. })
    }

    /// Odd-order groups are the ones where dilation by 2 is invertible.
    pub fn has_odd_order(&self) -> bool {
        self.order() % 2 == 1
    }

    /// Guards any operation about to allocate order-sized tables.
    pub fn check_table_scale(&self) -> Result<()> {
        if self.order() > MAX_TABLE_ORDER {
            return Err(Error::InvalidArgument(format!(
                "group order {} exceeds the desk-scale table cap {MAX_TABLE_ORDER}",
                self.order()
            )));
        }
        Ok(())
    }

    pub fn check_index(&self, index: u64) -> Result<()> {
        if index < self.order() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                order: self.order(),
            })
        }
    }

    /// Componentwise sum mod 3 (vector) or sum mod N (cyclic).
    pub fn add(&self, a: u64, b: u64) -> u64 {
        match *self {
            AmbientGroup::Cyclic { modulus } => {
                ((a as u128 + b as u128) % modulus as u128) as u64
            }
            AmbientGroup::Vector { dimension } => {
                let mut r = 0u64;
                let mut p = 1u64;
                let (mut x, mut y) = (a, b);
                for _ in 0..dimension {
                    r += ((x % 3 + y % 3) % 3) * p;
                    x /= 3;
                    y /= 3;
                    p *= 3;
                }
                r
            }
        }
    }

    /// Additive inverse.
    pub fn neg(&self, a: u64) -> u64 {
        match *self {
            AmbientGroup::Cyclic { modulus } => (modulus - a % modulus) % modulus,
            AmbientGroup::Vector { dimension } => {
                let mut r = 0u64;
                let mut p = 1u64;
                let mut x = a;
                for _ in 0..dimension {
                    r += ((3 - x % 3) % 3) * p;
                    x /= 3;
                    p *= 3;
                }
                r
            }
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    /// `a` scaled by a nonnegative integer.
    pub fn scale(&self, k: u64, a: u64) -> u64 {
        match *self {
            AmbientGroup::Cyclic { modulus } => {
                ((k as u128 * a as u128) % modulus as u128) as u64
            }
            AmbientGroup::Vector { dimension } => {
                let mut r = 0u64;
                let mut p = 1u64;
                let mut x = a;
                for _ in 0..dimension {
                    r += ((k % 3) * (x % 3)) % 3 * p;
                    x /= 3;
                    p *= 3;
                }
                r
            }
        }
    }

    /// Little-endian digit expansion; meaningful for vector groups.
    pub fn decode(&self, index: u64) -> Vec<u8> {
        match *self {
            AmbientGroup::Cyclic { .. } => vec![],
            AmbientGroup::Vector { dimension } => {
                let mut digits = Vec::with_capacity(dimension as usize);
                let mut x = index;
                for _ in 0..dimension {
                    digits.push((x % 3) as u8);
                    x /= 3;
                }
                digits
            }
        }
    }

    /// Inverse of [`decode`](Self::decode).
    pub fn encode(&self, digits: &[u8]) -> Result<u64> {
        match *self {
            AmbientGroup::Cyclic { .. } => Err(Error::InvalidArgument(
                "digit encoding applies to vector groups only".into(),
            )),
            AmbientGroup::Vector { dimension } => {
                if digits.len() != dimension as usize {
                    return Err(Error::LengthMismatch {
                        expected: dimension as usize,
                        got: digits.len(),
                    });
                }
                let mut r = 0u64;
                let mut p = 1u64;
                for &d in digits {
                    if d > 2 {
                        return Err(Error::InvalidArgument(format!("digit {d} out of range")));
                    }
                    r += d as u64 * p;
                    p *= 3;
                }
                Ok(r)
            }
        }
    }

    /// Dot product mod 3 of two vector-group elements.
    pub fn dot3(&self, a: u64, b: u64) -> u8 {
        debug_assert!(self.is_vector());
        let mut s = 0u64;
        let (mut x, mut y) = (a, b);
        while x != 0 && y != 0 {
            s += (x % 3) * (y % 3);
            x /= 3;
            y /= 3;
        }
        (s % 3) as u8
    }

    /// Character value `xi(x)`: `e(xi*x/N)` for cyclic groups and
    /// `e_3(xi . x)` for vector groups. Unit modulus by construction.
    pub fn character(&self, xi: u64, x: u64) -> Complex64 {
        match *self {
            AmbientGroup::Cyclic { modulus } => {
                let r = (xi as u128 * x as u128 % modulus as u128) as u64;
                Complex64::from_polar(1.0, TAU * r as f64 / modulus as f64)
            }
            AmbientGroup::Vector { .. } => {
                let r = self.dot3(xi, x);
                Complex64::from_polar(1.0, TAU * r as f64 / 3.0)
            }
        }
    }
}

/// Checked wrappers over the element arithmetic, in the index encoding.
pub fn element_add(g: &AmbientGroup, a: GroupElement, b: GroupElement) -> Result<GroupElement> {
    g.check_index(a.0)?;
    g.check_index(b.0)?;
    Ok(GroupElement(g.add(a.0, b.0)))
}

/// Character evaluation with index validation.
pub fn character_eval(g: &AmbientGroup, xi: GroupElement, x: GroupElement) -> Result<Complex64> {
    g.check_index(xi.0)?;
    g.check_index(x.0)?;
    Ok(g.character(xi.0, x.0))
}

/// A finite subset of an ambient group, with exact cached density.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    group: AmbientGroup,
    elements: Vec<u64>,
    density: BigRational,
    density_f64: f64,
}

impl SiteSet {
    /// Builds a site set; the element list is sorted, and duplicates or
    /// out-of-range indices are rejected.
    pub fn new(group: AmbientGroup, mut elements: Vec<u64>) -> Result<Self> {
        elements.sort_unstable();
        for w in elements.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateElement(w[0]));
            }
        }
        if let Some(&last) = elements.last() {
            group.check_index(last)?;
        }
        let density = ratio(elements.len() as u64, group.order());
        let density_f64 = elements.len() as f64 / group.order() as f64;
        Ok(SiteSet {
            group,
            elements,
            density,
            density_f64,
        })
    }

    pub fn group(&self) -> &AmbientGroup {
        &self.group
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Exact density `|A|/|G|`.
    pub fn density(&self) -> &BigRational {
        &self.density
    }

    /// Double-precision shadow of the density.
    pub fn density_f64(&self) -> f64 {
        self.density_f64
    }

    pub fn contains(&self, index: u64) -> bool {
        self.elements.binary_search(&index).is_ok()
    }

    /// Dense membership table, for counting loops.
    pub fn indicator(&self) -> Vec<bool> {
        let mut table = vec![false; self.group.order() as usize];
        for &e in &self.elements {
            table[e as usize] = true;
        }
        table
    }
}

/// A subset of the integer interval `[N] = {1, ..., N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSet {
    length: u64,
    elements: Vec<u64>,
}

impl IntervalSet {
    pub fn new(length: u64, mut elements: Vec<u64>) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument("interval length must be >= 1".into()));
        }
        elements.sort_unstable();
        for w in elements.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateElement(w[0]));
            }
        }
        if let Some(&first) = elements.first() {
            if first == 0 {
                return Err(Error::IndexOutOfRange {
                    index: 0,
                    order: length,
                });
            }
        }
        if let Some(&last) = elements.last() {
            if last > length {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    order: length,
                });
            }
        }
        Ok(IntervalSet { length, elements })
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Exact density `|A|/N`.
    pub fn density(&self) -> BigRational {
        ratio(self.elements.len() as u64, self.length)
    }

    pub fn contains(&self, v: u64) -> bool {
        self.elements.binary_search(&v).is_ok()
    }

    /// Membership table indexed by value (entry 0 unused).
    pub fn indicator(&self) -> Vec<bool> {
        let mut table = vec![false; self.length as usize + 1];
        for &e in &self.elements {
            table[e as usize] = true;
        }
        table
    }
}

/// Any set the toolkit operates on: a group subset or an interval subset.
#[derive(Debug, Clone, PartialEq)]
pub enum SetData {
    Group(SiteSet),
    Interval(IntervalSet),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum DomainWire {
    Cyclic { modulus: u64 },
    Vector { dimension: u32 },
    Interval { length: u64 },
}

#[derive(Serialize, Deserialize)]
struct SetWire {
    group: DomainWire,
    elements: Vec<u64>,
}

impl Serialize for SetData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match self {
            SetData::Group(set) => SetWire {
                group: match *set.group() {
                    AmbientGroup::Cyclic { modulus } => DomainWire::Cyclic { modulus },
                    AmbientGroup::Vector { dimension } => DomainWire::Vector { dimension },
                },
                elements: set.elements().to_vec(),
            },
            SetData::Interval(set) => SetWire {
                group: DomainWire::Interval { length: set.length() },
                elements: set.elements().to_vec(),
            },
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetData {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = SetWire::deserialize(d)?;
        let built = match wire.group {
            DomainWire::Cyclic { modulus } => AmbientGroup::cyclic(modulus)
                .and_then(|g| SiteSet::new(g, wire.elements))
                .map(SetData::Group),
            DomainWire::Vector { dimension } => AmbientGroup::vector(dimension)
                .and_then(|g| SiteSet::new(g, wire.elements))
                .map(SetData::Group),
            DomainWire::Interval { length } => {
                IntervalSet::new(length, wire.elements).map(SetData::Interval)
            }
        };
        built.map_err(serde::de::Error::custom)
    }
}

impl SetData {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("set serialization cannot fail")
    }

    /// Parses set JSON, distinguishing malformed input, duplicate elements,
    /// and out-of-range elements as separate error values.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: SetWire = serde_json::from_str(text)?;
        match wire.group {
            DomainWire::Cyclic { modulus } => Ok(SetData::Group(SiteSet::new(
                AmbientGroup::cyclic(modulus)?,
                wire.elements,
            )?)),
            DomainWire::Vector { dimension } => Ok(SetData::Group(SiteSet::new(
                AmbientGroup::vector(dimension)?,
                wire.elements,
            )?)),
            DomainWire::Interval { length } => {
                Ok(SetData::Interval(IntervalSet::new(length, wire.elements)?))
            }
        }
    }

    pub fn as_site(&self) -> Result<&SiteSet> {
        match self {
            SetData::Group(s) => Ok(s),
            SetData::Interval(_) => Err(Error::DomainMismatch(
                "expected a group subset, got an interval subset".into(),
            )),
        }
    }

    pub fn as_interval(&self) -> Result<&IntervalSet> {
        match self {
            SetData::Interval(s) => Ok(s),
            SetData::Group(_) => Err(Error::DomainMismatch(
                "expected an interval subset, got a group subset".into(),
            )),
        }
    }
}

/// Parses the site-set JSON format (cyclic and vector groups).
pub fn parse_siteset(text: &str) -> Result<SiteSet> {
    match SetData::from_json(text)? {
        SetData::Group(s) => Ok(s),
        SetData::Interval(_) => Err(Error::Parse(
            "interval sets are not site sets; use SetData::from_json".into(),
        )),
    }
}

/// Emits the site-set JSON format.
pub fn emit_siteset(set: &SiteSet) -> String {
    SetData::Group(set.clone()).to_json()
}
