//! 3-AP detection and counting, AP-freeness certification, and lower-bound
//! constructions.
//!
//! Group subsets are counted with wraparound; interval subsets of
//! `[N] = {1, ..., N}` are counted over the integers, a separate code path
//! because wraparound changes the count. Every count is computed by two
//! independent routes (the explicit pair loop and a counting convolution)
//! which must agree exactly.

use crate::error::Error;
use crate::group::{AmbientGroup, IntervalSet, SetData, SiteSet};
use crate::Result;

/// Exact ordered-pair counts of 3-APs `x, x+y, x+2y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct APCount {
    /// Ordered pairs `(x, y)` with all three points in the set.
    pub total: u64,
    /// Contributions with `y = 0`, always `|A|`.
    pub trivial: u64,
    /// `total - trivial`; even, by the `y <-> -y` symmetry.
    pub nontrivial: u64,
}

/// A witness progression: the pair `(x, y)` with `y != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ApWitness {
    pub start: u64,
    pub gap: u64,
}

fn count_group(set: &SiteSet) -> Result<APCount> {
    let group = *set.group();
    group.check_table_scale()?;
    if !group.has_odd_order() {
        return Err(Error::EvenModulus(group.order()));
    }
    let n = group.order();
    let member = set.indicator();

    // Route 1: loop over x in A and all gaps y.
    let mut total_loop = 0u64;
    for &x in set.elements() {
        for y in 0..n {
            let b = group.add(x, y);
            let c = group.add(b, y);
            if member[b as usize] && member[c as usize] {
                total_loop += 1;
            }
        }
    }

    // Route 2: r(s) = #{(a,b) in A^2 : a+b = s}; pairs (x, x+2y) determine y,
    // so the total equals sum over midpoints m in A of r(2m).
    let mut rep = vec![0u64; n as usize];
    for &a in set.elements() {
        for &b in set.elements() {
            rep[group.add(a, b) as usize] += 1;
        }
    }
    let total_conv: u64 = set.elements().iter().map(|&m| rep[group.scale(2, m) as usize]).sum();

    if total_loop != total_conv {
        return Err(Error::TheoremViolation(format!(
            "3-AP count routes disagree: loop {total_loop}, convolution {total_conv}"
        )));
    }
    let trivial = set.len() as u64;
    Ok(APCount {
        total: total_loop,
        trivial,
        nontrivial: total_loop - trivial,
    })
}

fn count_interval(set: &IntervalSet) -> Result<APCount> {
    let n = set.length();
    if n > INTERVAL_COUNT_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "interval length {n} exceeds the exact-counting cap {INTERVAL_COUNT_LIMIT}"
        )));
    }
    let member = set.indicator();

    // Route 1: endpoints of equal parity with midpoint in the set; counts
    // ordered pairs (x, y) over all integer gaps y (positive, zero, negative).
    let mut same_dir = 0u64;
    for &a in set.elements() {
        for &c in set.elements() {
            if (a + c) % 2 == 0 && member[((a + c) / 2) as usize] {
                same_dir += 1;
            }
        }
    }

    // Route 2: counting convolution over [2, 2N].
    let mut rep = vec![0u64; 2 * n as usize + 1];
    for &a in set.elements() {
        for &b in set.elements() {
            rep[(a + b) as usize] += 1;
        }
    }
    let total_conv: u64 = set.elements().iter().map(|&m| rep[2 * m as usize]).sum();

    if same_dir != total_conv {
        return Err(Error::TheoremViolation(format!(
            "3-AP count routes disagree: loop {same_dir}, convolution {total_conv}"
        )));
    }
    let trivial = set.len() as u64;
    Ok(APCount {
        total: same_dir,
        trivial,
        nontrivial: same_dir - trivial,
    })
}

/// Exact 3-AP counts for a group or interval subset.
pub fn count_3aps(set: &SetData) -> Result<APCount> {
    match set {
        SetData::Group(s) => count_group(s),
        SetData::Interval(s) => count_interval(s),
    }
}

fn witness_group(set: &SiteSet) -> Option<ApWitness> {
    let group = *set.group();
    let n = group.order();
    let member = set.indicator();
    for &x in set.elements() {
        for y in 1..n {
            let b = group.add(x, y);
            let c = group.add(b, y);
            if member[b as usize] && member[c as usize] {
                return Some(ApWitness { start: x, gap: y });
            }
        }
    }
    None
}

fn witness_interval(set: &IntervalSet) -> Option<ApWitness> {
    let n = set.length();
    let member = set.indicator();
    for &x in set.elements() {
        let mut y = 1u64;
        while x + 2 * y <= n {
            if member[(x + y) as usize] && member[(x + 2 * y) as usize] {
                return Some(ApWitness { start: x, gap: y });
            }
            y += 1;
        }
    }
    None
}

/// True iff the set contains no nontrivial 3-AP; otherwise the
/// lexicographically least witness `(x, y)` with positive gap.
pub fn is_ap_free(set: &SetData) -> Result<(bool, Option<ApWitness>)> {
    let witness = match set {
        SetData::Group(s) => {
            s.group().check_table_scale()?;
            if let AmbientGroup::Cyclic { modulus } = s.group() {
                if modulus % 2 == 0 {
                    return Err(Error::EvenModulus(*modulus));
                }
            }
            witness_group(s)
        }
        SetData::Interval(s) => {
            if s.length() > INTERVAL_COUNT_LIMIT {
                return Err(Error::InvalidArgument(format!(
                    "interval length {} exceeds the exact-counting cap {INTERVAL_COUNT_LIMIT}",
                    s.length()
                )));
            }
            witness_interval(s)
        }
    };
    Ok((witness.is_none(), witness))
}

/// Convenience wrapper for cap-set checks on group subsets.
pub fn is_cap_set(set: &SiteSet) -> Result<bool> {
    Ok(is_ap_free(&SetData::Group(set.clone()))?.0)
}

/// Size cap up to which construction outputs are re-certified by the checker.
pub const CERTIFY_LIMIT: u64 = 100_000;

/// Interval length cap for the exact counting paths (they allocate
/// tables of size O(N)).
pub const INTERVAL_COUNT_LIMIT: u64 = 4_000_000;

/// The integers in `[N]` whose ternary expansion contains no twos.
pub fn construct_digit(n: u64) -> Result<IntervalSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let mut elements = Vec::new();
    // digit-{0,1} values in increasing order via binary counter
    let mut places = 1u32;
    while 3u64.pow(places) <= n {
        places += 1;
    }
    for mask in 1u64..(1 << (places + 1)) {
        let mut v = 0u64;
        let mut p = 1u64;
        let mut m = mask;
        while m != 0 {
            if m & 1 == 1 {
                v += p;
            }
            p *= 3;
            m >>= 1;
        }
        if v >= 1 && v <= n {
            elements.push(v);
        }
    }
    elements.sort_unstable();
    let set = IntervalSet::new(n, elements)?;
    certify(&set)?;
    Ok(set)
}

fn certify(set: &IntervalSet) -> Result<()> {
    if set.length() <= CERTIFY_LIMIT {
        let (free, witness) = is_ap_free(&SetData::Interval(set.clone()))?;
        if !free {
            return Err(Error::TheoremViolation(format!(
                "construction produced a 3-AP: {witness:?}"
            )));
        }
    }
    Ok(())
}

/// Parameters the sphere construction settled on, reported alongside the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BehrendParams {
    pub dimension: u32,
    pub base: u64,
    pub radius_sq: u64,
    pub shell_size: u64,
}

/// Behrend's sphere construction mapped into `[N]` by base-`2b` digits.
///
/// `d = round(sqrt(log2 N))`, `b = floor(N^(1/d) / 2)`; the most-populated
/// radius shell of `{0,...,b-1}^d` wins, ties broken toward the smallest
/// radius. Values are shifted by one so the zero vector never maps to 0.
pub fn construct_behrend(n: u64) -> Result<(IntervalSet, BehrendParams)> {
    if n < 64 {
        return Err(Error::InvalidArgument(
            "Behrend construction needs N >= 64 for a dimension of at least 2".into(),
        ));
    }
    let d = (n as f64).log2().sqrt().round() as u32;
    let d = d.max(2);
    let b = ((n as f64).powf(1.0 / d as f64) / 2.0).floor() as u64;
    if b < 1 {
        return Err(Error::InvalidArgument(format!(
            "N = {n} too small for dimension {d}"
        )));
    }

    // shell censuses over {0..b-1}^d
    let max_r2 = (d as u64) * (b - 1) * (b - 1);
    let mut census = vec![0u64; max_r2 as usize + 1];
    let mut point = vec![0u64; d as usize];
    loop {
        let r2: u64 = point.iter().map(|&v| v * v).sum();
        census[r2 as usize] += 1;
        // odometer
        let mut k = 0usize;
        loop {
            if k == d as usize {
                break;
            }
            point[k] += 1;
            if point[k] < b {
                break;
            }
            point[k] = 0;
            k += 1;
        }
        if k == d as usize {
            break;
        }
    }
    let (radius_sq, shell_size) = census
        .iter()
        .enumerate()
        .max_by_key(|&(r2, &c)| (c, std::cmp::Reverse(r2)))
        .map(|(r2, &c)| (r2 as u64, c))
        .expect("census is nonempty");

    // collect the shell and map by base-2b digits, shifted by one
    let base = 2 * b;
    let mut elements = Vec::with_capacity(shell_size as usize);
    let mut point = vec![0u64; d as usize];
    loop {
        let r2: u64 = point.iter().map(|&v| v * v).sum();
        if r2 == radius_sq {
            let mut value = 0u64;
            let mut p = 1u64;
            for &coord in &point {
                value += coord * p;
                p *= base;
            }
            elements.push(value + 1);
        }
        let mut k = 0usize;
        loop {
            if k == d as usize {
                break;
            }
            point[k] += 1;
            if point[k] < b {
                break;
            }
            point[k] = 0;
            k += 1;
        }
        if k == d as usize {
            break;
        }
    }
    elements.sort_unstable();
    debug_assert!(elements.last().copied().unwrap_or(0) <= n);
    let set = IntervalSet::new(n, elements)?;
    certify(&set)?;
    Ok((
        set,
        BehrendParams {
            dimension: d,
            base: b,
            radius_sq,
            shell_size,
        },
    ))
}

/// Cartesian product of two cap-sets, a cap-set in the sum of the ambient
/// spaces. Stands in for amplification constructions: `x+y+z = 0` in a
/// product forces equality blockwise.
pub fn product_lift(a: &SiteSet, b: &SiteSet) -> Result<SiteSet> {
    let (m, n) = match (a.group(), b.group()) {
        (AmbientGroup::Vector { dimension: m }, AmbientGroup::Vector { dimension: n }) => (*m, *n),
        _ => {
            return Err(Error::DomainMismatch(
                "product lift takes two vector-group subsets".into(),
            ))
        }
    };
    for (name, set) in [("first", a), ("second", b)] {
        if !is_cap_set(set)? {
            return Err(Error::Refused(format!("{name} input is not a cap-set")));
        }
    }
    let group = AmbientGroup::vector(m + n)?;
    let shift = 3u64.pow(m);
    let mut elements = Vec::with_capacity(a.len() * b.len());
    for &eb in b.elements() {
        for &ea in a.elements() {
            elements.push(ea + shift * eb);
        }
    }
    let lifted = SiteSet::new(group, elements)?;
    if !is_cap_set(&lifted)? {
        return Err(Error::TheoremViolation(
            "product of cap-sets failed the cap-set recheck".into(),
        ));
    }
    Ok(lifted)
}
