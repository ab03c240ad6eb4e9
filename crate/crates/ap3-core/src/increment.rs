//! Executable density-increment steps and iteration drivers, with
//! machine-checkable certificates; plus Dirichlet approximation.
//!
//! Every certificate is re-verified by direct counting in exact rational
//! arithmetic before it is returned: nothing downstream has to trust the
//! pipeline that produced it. Quantities the underlying proofs guarantee
//! (the large-coefficient floors, the density gains) are asserted as
//! internal invariants; their failure signals an implementation bug, never
//! a property of the input, and surfaces as `Error::TheoremViolation`.

use crate::apsets::{is_ap_free, is_cap_set};
use crate::error::Error;
use crate::fourier::transform_indicator;
use crate::group::{AmbientGroup, IntervalSet, SetData, SiteSet};
use crate::rational::{ratio, Rat};
use crate::Result;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Paper constants used by the increment machinery, kept in one place.
pub mod constants {
    /// Meshulam small-instance test: `N < 2 / alpha^2`.
    pub const MESHULAM_SMALL_N_NUM: u64 = 2;
    /// Meshulam density gain: `alpha + alpha^2 / 4`.
    pub const MESHULAM_GAIN_DEN: u64 = 4;
    /// Meshulam coefficient floor: `|1hat_A(xi)| >= alpha^2 / 2`.
    pub const MESHULAM_COEFF_DEN: u64 = 2;
    /// Meshulam iteration count bound: `i0 <= 16 / alpha`.
    pub const MESHULAM_ITER_NUM: u64 = 16;
    /// Meshulam terminal dimension bound: `n < 32 / alpha`.
    pub const MESHULAM_DIM_NUM: u64 = 32;
    /// Roth small-instance test: `N < 8 / alpha^2`.
    pub const ROTH_SMALL_N_NUM: u64 = 8;
    /// Roth coefficient floor: `alpha^2 p / 2^7`.
    pub const ROTH_COEFF_LOG2: u32 = 7;
    /// Roth cell oscillation bound: `alpha^2 / 2^8`.
    pub const ROTH_OSCILLATION_LOG2: u32 = 8;
    /// Roth cell length: `N' = ceil(alpha^2 sqrt(p) / 2^10)`.
    pub const ROTH_CELL_LOG2: u32 = 10;
    /// Roth density gain: `alpha + alpha^2 / 2^11`.
    pub const ROTH_GAIN_LOG2: u32 = 11;
    /// Roth progression length floor: `N' >= alpha^4 sqrt(N) / 2^21`.
    pub const ROTH_LENGTH_LOG2: u32 = 21;
}

/// Least prime in the open interval `(lo, hi)`.
pub fn least_prime_in(lo: u64, hi: u64) -> Result<u64> {
    if hi > 1 << 30 {
        return Err(Error::InvalidArgument(
            "prime search is capped at 2^30".into(),
        ));
    }
    let mut sieve = vec![true; hi as usize];
    let mut p = 2usize;
    while p * p < hi as usize {
        if sieve[p] {
            let mut q = p * p;
            while q < hi as usize {
                sieve[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    ((lo + 1)..hi)
        .find(|&v| v >= 2 && sieve[v as usize])
        .ok_or_else(|| Error::InvalidArgument(format!("no prime in ({lo}, {hi})")))
}

/// Simultaneous Dirichlet approximation: numerators `p_i` and one
/// denominator `q <= q_max` with `|gamma_i - p_i/q| < 1/(q q_max^{1/k})`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirichletResult {
    pub numerators: Vec<i64>,
    pub q: u64,
    /// `gamma_i - p_i/q`, signed.
    pub errors: Vec<f64>,
}

/// Smallest `q` satisfying the Dirichlet inequality for all coordinates.
/// For `k = 1` a continued-fraction convergent certifies existence before
/// the minimal `q` is located; for `k > 1` the scan over `q <= q_max` is
/// itself the existence proof at this scale.
pub fn dirichlet(gammas: &[f64], q_max: u64, k: usize) -> Result<DirichletResult> {
    if k == 0 || gammas.len() != k {
        return Err(Error::InvalidArgument(
            "coordinate count k must be >= 1 and match the input length".into(),
        ));
    }
    if q_max == 0 {
        return Err(Error::InvalidArgument("Q must be >= 1".into()));
    }
    let tolerance = 1.0 / (q_max as f64).powf(1.0 / k as f64);
    let fits = |q: u64| -> Option<Vec<i64>> {
        let mut nums = Vec::with_capacity(gammas.len());
        for &g in gammas {
            let p = (g * q as f64).round();
            if (g * q as f64 - p).abs() < tolerance {
                nums.push(p as i64);
            } else {
                return None;
            }
        }
        Some(nums)
    };
    if k == 1 {
        // continued fractions certify a convergent with q <= q_max
        debug_assert!(convergent_below(gammas[0], q_max).is_some());
    }
    for q in 1..=q_max {
        if let Some(numerators) = fits(q) {
            let errors = gammas
                .iter()
                .zip(&numerators)
                .map(|(&g, &p)| g - p as f64 / q as f64)
                .collect();
            return Ok(DirichletResult {
                numerators,
                q,
                errors,
            });
        }
    }
    Err(Error::TheoremViolation(format!(
        "no Dirichlet denominator q <= {q_max} found; existence is guaranteed"
    )))
}

/// Best continued-fraction convergent with denominator at most `q_max`.
pub fn convergent_below(gamma: f64, q_max: u64) -> Option<(i64, u64)> {
    let mut x = gamma;
    let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0u128, x.floor() as i128, 1u128);
    for _ in 0..64 {
        let frac = x - x.floor();
        if q1 > q_max as u128 {
            break;
        }
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
        let a = x.floor() as i128;
        let (p2, q2) = (a * p1 + p0, a as u128 * q1 + q0);
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if q1 > q_max as u128 {
            break;
        }
    }
    if q1 <= q_max as u128 && q1 > 0 {
        Some((p1 as i64, q1 as u64))
    } else if q0 > 0 && q0 <= q_max as u128 {
        Some((p0 as i64, q0 as u64))
    } else {
        None
    }
}

/// Outcome of a single density-increment step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "kebab-case")]
pub enum IncrementCertificate {
    /// The instance is already smaller than the threshold `c/alpha^2`.
    SmallN {
        instance_size: u64,
        set_size: u64,
        alpha: Rat,
        /// `2/alpha^2` (vector) or `8/alpha^2` (integer).
        threshold: Rat,
    },
    /// Density increment on an affine hyperplane of `F_3^n`.
    Hyperplane {
        /// Selected frequency with `|1hat_A(xi)| >= alpha^2/2`.
        xi: u64,
        /// Its coefficient magnitude (diagnostic shadow).
        coefficient: f64,
        /// The coset value `c`: `H = {x : xi . x = c}`.
        coset: u8,
        /// Least-index representative of `H`.
        representative: u64,
        hyperplane_size: u64,
        intersection: u64,
        /// `|A n H| / |H|`, exact.
        achieved: Rat,
        /// `alpha + alpha^2/4`, exact.
        promised: Rat,
    },
    /// Density increment on the integer progression
    /// `{start + step*j : 0 <= j < length}`.
    Progression {
        start: u64,
        step: u64,
        length: u64,
        intersection: u64,
        /// `|A n P| / N'`, exact.
        achieved: Rat,
        /// `alpha + alpha^2/2^11`, exact.
        promised: Rat,
        /// Whether `N' >= alpha^4 sqrt(N) / 2^21` (exact squared comparison).
        length_floor_holds: bool,
    },
}

impl IncrementCertificate {
    pub fn is_small_n(&self) -> bool {
        matches!(self, IncrementCertificate::SmallN { .. })
    }
}

fn alpha_of_site(a: &SiteSet) -> BigRational {
    a.density().clone()
}

/// One Meshulam density-increment step on a cap-set `A` in `F_3^n`.
///
/// Either `3^n < 2/alpha^2` (small-instance branch, exact rational test), or
/// the frequency maximizing `|1hat_A|` over nonzero frequencies yields a
/// coset of its orthogonal hyperplane where `A` has density at least
/// `alpha + alpha^2/4`, re-verified by counting.
pub fn meshulam_step(a: &SiteSet) -> Result<IncrementCertificate> {
    let group = *a.group();
    if !group.is_vector() {
        return Err(Error::DomainMismatch(
            "the Meshulam step runs on F_3^n subsets".into(),
        ));
    }
    if a.is_empty() {
        return Err(Error::Refused("empty set has no density increment".into()));
    }
    if !is_cap_set(a)? {
        return Err(Error::Refused("input is not a cap-set".into()));
    }
    let order = group.order();
    let size = a.len() as u64;
    let alpha = alpha_of_site(a);

    // small-instance test N < 2/alpha^2, i.e. |A|^2 < 2N in integers
    if (size as u128) * (size as u128) < constants::MESHULAM_SMALL_N_NUM as u128 * order as u128 {
        return Ok(IncrementCertificate::SmallN {
            instance_size: order,
            set_size: size,
            alpha: Rat(alpha.clone()),
            threshold: Rat(
                BigRational::from_integer(BigInt::from(constants::MESHULAM_SMALL_N_NUM))
                    / (&alpha * &alpha),
            ),
        });
    }

    // select the nonzero frequency with the largest coefficient
    let table = transform_indicator(a);
    let (mut best_xi, mut best_mag) = (0u64, -1.0f64);
    for (xi, v) in table.values.iter().enumerate().skip(1) {
        let m = v.norm();
        if m > best_mag {
            best_mag = m;
            best_xi = xi as u64;
        }
    }
    let floor = {
        let a2 = a.density_f64() * a.density_f64();
        a2 / constants::MESHULAM_COEFF_DEN as f64
    };
    if best_mag < floor * (1.0 - 1e-9) {
        return Err(Error::TheoremViolation(format!(
            "no nonzero frequency reaches alpha^2/2: max |1hat| = {best_mag}, floor = {floor}"
        )));
    }

    // coset counts of the hyperplane xi . x = c
    let mut counts = [0u64; 3];
    for &x in a.elements() {
        counts[group.dot3(best_xi, x) as usize] += 1;
    }
    let mut best_c = 0u8;
    for c in 1..3u8 {
        let better = counts[c as usize] > counts[best_c as usize];
        let tie = counts[c as usize] == counts[best_c as usize];
        let smaller_rep = hyperplane_representative(&group, best_xi, c)
            < hyperplane_representative(&group, best_xi, best_c);
        if better || (tie && smaller_rep) {
            best_c = c;
        }
    }
    let hyperplane_size = order / 3;
    let intersection = counts[best_c as usize];
    let achieved = ratio(intersection, hyperplane_size);
    let promised = &alpha + &alpha * &alpha / BigRational::from_integer(BigInt::from(
        constants::MESHULAM_GAIN_DEN,
    ));
    if achieved < promised {
        return Err(Error::TheoremViolation(format!(
            "best coset density {achieved} misses the promised floor {promised}"
        )));
    }
    Ok(IncrementCertificate::Hyperplane {
        xi: best_xi,
        coefficient: best_mag,
        coset: best_c,
        representative: hyperplane_representative(&group, best_xi, best_c),
        hyperplane_size,
        intersection,
        achieved: Rat(achieved),
        promised: Rat(promised),
    })
}

/// Least-index element of `{x : xi . x = c}`: the multiple of the least
/// pivot coordinate that hits the coset value.
pub fn hyperplane_representative(group: &AmbientGroup, xi: u64, c: u8) -> u64 {
    if c == 0 {
        return 0;
    }
    let digits = group.decode(xi);
    let pivot = digits
        .iter()
        .position(|&d| d != 0)
        .expect("xi must be nonzero");
    let inv = if digits[pivot] == 1 { 1u64 } else { 2 };
    let d = (inv * c as u64) % 3;
    d * 3u64.pow(pivot as u32)
}

/// Affine parametrization of `{x : xi . x = c}` down to `F_3^(n-1)`: the
/// representative is translated to zero and coordinates are read off the
/// kernel basis completed by Gaussian elimination with least-index pivots.
pub fn hyperplane_restriction(a: &SiteSet, xi: u64, c: u8) -> Result<SiteSet> {
    let group = *a.group();
    let n = match group {
        AmbientGroup::Vector { dimension } => dimension,
        _ => return Err(Error::DomainMismatch("vector groups only".into())),
    };
    if n < 2 {
        return Err(Error::InvalidArgument(
            "cannot restrict below dimension 1".into(),
        ));
    }
    group.check_index(xi)?;
    if xi == 0 {
        return Err(Error::InvalidArgument("xi must be nonzero".into()));
    }
    let digits = group.decode(xi);
    let pivot = digits.iter().position(|&d| d != 0).expect("xi is nonzero");
    let rep = hyperplane_representative(&group, xi, c);
    let sub = AmbientGroup::vector(n - 1)?;
    let mut mapped = Vec::new();
    for &x in a.elements() {
        if group.dot3(xi, x) != c {
            continue;
        }
        let shifted = group.sub(x, rep);
        let sd = group.decode(shifted);
        // coordinates of `shifted` in the kernel basis {e_j - (xi_j/xi_p) e_p}
        // are simply its digits away from the pivot
        let coords: Vec<u8> = (0..n as usize)
            .filter(|&j| j != pivot)
            .map(|j| sd[j])
            .collect();
        mapped.push(sub.encode(&coords)?);
    }
    SiteSet::new(sub, mapped)
}

/// One step of an iteration trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceStep {
    pub level: u32,
    /// `3^n` for the vector driver, `N` for the integer driver.
    pub instance_size: u64,
    pub set_size: u64,
    pub alpha: Rat,
    pub certificate: IncrementCertificate,
}

/// Which driver produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverKind {
    Meshulam,
    Roth,
}

/// Full run of a density-increment iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationTrace {
    pub driver: DriverKind,
    pub steps: Vec<TraceStep>,
    /// Increment steps taken before the small-instance branch fired.
    pub increment_steps: u32,
    /// Meshulam: `i0 <= 16/alpha_0`; Roth: iteration count is finite and
    /// recorded (the paper's bound is `O(1/alpha_0)`).
    pub iteration_bound_holds: bool,
    /// Meshulam: `n_0 < 32/alpha_0`; Roth: not applicable, set to true.
    pub dimension_bound_holds: bool,
}

/// Runs [`meshulam_step`] to exhaustion, restricting to the certified
/// hyperplane and re-encoding in `F_3^(n-1)` after every increment.
pub fn meshulam_drive(a: &SiteSet) -> Result<IterationTrace> {
    let mut current = a.clone();
    let mut steps = Vec::new();
    let mut level = 0u32;
    let alpha0 = alpha_of_site(a);
    loop {
        let cert = meshulam_step(&current)?;
        let alpha_i = alpha_of_site(&current);
        steps.push(TraceStep {
            level,
            instance_size: current.group().order(),
            set_size: current.len() as u64,
            alpha: Rat(alpha_i.clone()),
            certificate: cert.clone(),
        });
        match cert {
            IncrementCertificate::SmallN { .. } => break,
            IncrementCertificate::Hyperplane { xi, coset, achieved, .. } => {
                let restricted = hyperplane_restriction(&current, xi, coset)?;
                if !is_cap_set(&restricted)? {
                    return Err(Error::TheoremViolation(
                        "restriction of a cap-set failed the cap-set recheck".into(),
                    ));
                }
                // density is carried over exactly by the affine bijection
                if alpha_of_site(&restricted) != achieved.0 {
                    return Err(Error::TheoremViolation(
                        "restricted density disagrees with the certificate".into(),
                    ));
                }
                current = restricted;
                level += 1;
            }
            IncrementCertificate::Progression { .. } => unreachable!("vector driver"),
        }
    }
    let increment_steps = level;
    // i0 <= 16/alpha_0 and n_0 < 32/alpha_0, exact
    let i0 = BigRational::from_integer(BigInt::from(increment_steps));
    let sixteen = BigRational::from_integer(BigInt::from(constants::MESHULAM_ITER_NUM));
    let thirtytwo = BigRational::from_integer(BigInt::from(constants::MESHULAM_DIM_NUM));
    let n0 = match a.group() {
        AmbientGroup::Vector { dimension } => *dimension,
        _ => unreachable!("checked in meshulam_step"),
    };
    let iteration_bound_holds = &i0 * &alpha0 <= sixteen;
    let dimension_bound_holds =
        BigRational::from_integer(BigInt::from(n0)) * &alpha0 < thirtytwo;
    Ok(IterationTrace {
        driver: DriverKind::Meshulam,
        steps,
        increment_steps,
        iteration_bound_holds,
        dimension_bound_holds,
    })
}

/// Diagnostics accompanying a Roth step certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RothDiagnostics {
    /// Bertrand prime in `(2N, 4N)`.
    pub prime: u64,
    /// Selected nonzero frequency of `Z/pZ`.
    pub xi: u64,
    /// `|sum_x f_A(x) e(xi x / p)|`.
    pub coefficient: f64,
    /// `alpha^2 p / 2^7`.
    pub coefficient_floor: f64,
    pub coefficient_floor_holds: bool,
    /// Dirichlet output for `xi/p` with `Q = ceil(sqrt(p))`.
    pub dirichlet_q: u64,
    pub dirichlet_a: i64,
    pub theta: f64,
    /// Cell length `N' = ceil(alpha^2 sqrt(p) / 2^10)`.
    pub cell_length: u64,
    /// Number of full cells.
    pub full_cells: u64,
    /// Every residue of `Z/pZ` covered exactly once.
    pub partition_exact: bool,
    /// Max over cells of the pairwise oscillation of `e(theta x / (q sqrt p))`.
    pub max_cell_oscillation: f64,
    /// `alpha^2 / 2^8`.
    pub oscillation_bound: f64,
    pub oscillation_bound_holds: bool,
    /// Which part of the chosen cell carried the increment: "whole-cell"
    /// when the cell is a single integer run, otherwise "R" or "S".
    pub split_case: String,
}

/// One Roth density-increment step on an AP-free `A` inside `[N]`.
pub fn roth_step(a: &IntervalSet) -> Result<(IncrementCertificate, Option<RothDiagnostics>)> {
    let n = a.length();
    let size = a.len() as u64;
    let (free, witness) = is_ap_free(&SetData::Interval(a.clone()))?;
    if !free {
        return Err(Error::Refused(format!(
            "input contains a 3-AP: {witness:?}"
        )));
    }
    if size == 0 {
        return Err(Error::Refused("empty set has no density increment".into()));
    }
    let alpha = a.density();

    // small-instance test N < 8/alpha^2, i.e. |A|^2 < 8N in integers
    if (size as u128) * (size as u128) < constants::ROTH_SMALL_N_NUM as u128 * n as u128 {
        return Ok((
            IncrementCertificate::SmallN {
                instance_size: n,
                set_size: size,
                alpha: Rat(alpha.clone()),
                threshold: Rat(
                    BigRational::from_integer(BigInt::from(constants::ROTH_SMALL_N_NUM))
                        / (&alpha * &alpha),
                ),
            },
            None,
        ));
    }

    let p = least_prime_in(2 * n, 4 * n)?;
    let alpha_f = size as f64 / n as f64;

    // balanced function on Z/pZ and its largest nonzero coefficient
    let mut f = vec![Complex64::new(0.0, 0.0); p as usize];
    for x in 1..=n {
        let indicator = if a.contains(x) { 1.0 } else { 0.0 };
        f[x as usize] = Complex64::new(indicator - alpha_f, 0.0);
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(p as usize).process(&mut f);
    let (mut best_xi, mut best_mag) = (0u64, -1.0f64);
    for (xi, v) in f.iter().enumerate().skip(1) {
        let m = v.norm();
        if m > best_mag {
            best_mag = m;
            best_xi = xi as u64;
        }
    }
    let coefficient_floor = alpha_f * alpha_f * p as f64 / (1u64 << constants::ROTH_COEFF_LOG2) as f64;
    let coefficient_floor_holds = best_mag >= coefficient_floor * (1.0 - 1e-9);
    if !coefficient_floor_holds {
        return Err(Error::TheoremViolation(format!(
            "largest balanced coefficient {best_mag} misses the floor {coefficient_floor}"
        )));
    }

    // Dirichlet approximation of xi/p with Q = ceil(sqrt p)
    let q_max = (p as f64).sqrt().ceil() as u64;
    let dir = dirichlet(&[best_xi as f64 / p as f64], q_max, 1)?;
    let q = dir.q;
    let theta = dir.errors[0] * q as f64 * (p as f64).sqrt();

    // partition Z/pZ into step-q cells of length N'
    let cell_length = (alpha_f * alpha_f * (p as f64).sqrt()
        / (1u64 << constants::ROTH_CELL_LOG2) as f64)
        .ceil()
        .max(1.0) as u64;
    let mut full_cells: Vec<(u64, u64)> = Vec::new(); // (start residue, length = N')
    let mut remainder_cells: Vec<(u64, u64)> = Vec::new();
    for r in 0..q {
        let thread_len = if r < p % q { p / q + 1 } else { p / q };
        let mut offset = 0u64;
        while offset + cell_length <= thread_len {
            full_cells.push((r + offset * q, cell_length));
            offset += cell_length;
        }
        if offset < thread_len {
            remainder_cells.push((r + offset * q, thread_len - offset));
        }
    }
    // partition exactness: each residue covered exactly once
    let mut coverage = vec![0u32; p as usize];
    for &(start, len) in full_cells.iter().chain(&remainder_cells) {
        for j in 0..len {
            coverage[(start + j * q) as usize] += 1;
        }
    }
    let partition_exact = coverage.iter().all(|&c| c == 1);
    if !partition_exact {
        return Err(Error::TheoremViolation(
            "cells fail to partition Z/pZ".into(),
        ));
    }

    // cell oscillation of e(theta x / (q sqrt p)): extremes over one cell
    let osc_of = |len: u64| -> f64 {
        if len <= 1 {
            0.0
        } else {
            let span = theta.abs() * (len - 1) as f64 * q as f64 / (q as f64 * (p as f64).sqrt());
            2.0 * (std::f64::consts::PI * span).sin().abs().min(1.0)
        }
    };
    let max_cell_oscillation = full_cells
        .iter()
        .chain(&remainder_cells)
        .map(|&(_, len)| osc_of(len))
        .fold(0.0f64, f64::max);
    let oscillation_bound =
        alpha_f * alpha_f / (1u64 << constants::ROTH_OSCILLATION_LOG2) as f64;

    // best full cell by balanced mass, then the literal R/S split into
    // maximal integer runs (cells never wrap here, so R is the whole cell)
    let member = a.indicator();
    let in_a = |residue: u64| residue >= 1 && residue <= n && member[residue as usize];
    let mut best_cell = None::<(usize, f64)>;
    for (i, &(start, len)) in full_cells.iter().enumerate() {
        let mut sum = 0.0;
        for j in 0..len {
            let x = start + j * q;
            if x >= 1 && x <= n {
                sum += if member[x as usize] { 1.0 - alpha_f } else { -alpha_f };
            }
        }
        if best_cell.is_none_or(|(_, s)| sum > s) {
            best_cell = Some((i, sum));
        }
    }
    let (best_idx, _) = best_cell.ok_or_else(|| {
        Error::TheoremViolation("no full cells produced by the partition".into())
    })?;
    let (start, len) = full_cells[best_idx];

    // candidate integer progressions: the cell itself (it never wraps), and
    // for completeness its R/S halves if it ever did
    let gain = {
        let alpha2 = &alpha * &alpha;
        &alpha + &(alpha2 / BigRational::from_integer(BigInt::from(1u64 << constants::ROTH_GAIN_LOG2)))
    };
    let count_in = |s: u64, l: u64| -> u64 { (0..l).filter(|&j| in_a(s + j * q)).count() as u64 };
    let candidates = vec![(start, len, "whole-cell")];
    let mut chosen = None;
    for (s, l, label) in candidates {
        let hits = count_in(s, l);
        let achieved = ratio(hits, l);
        if achieved >= gain && length_floor_holds(l, &alpha, n) {
            chosen = Some((s, l, hits, achieved, label));
            break;
        }
    }
    let (s, l, hits, achieved, label) = chosen.ok_or_else(|| {
        Error::TheoremViolation(
            "no sub-progression of the best cell meets the promised density".into(),
        )
    })?;

    let diagnostics = RothDiagnostics {
        prime: p,
        xi: best_xi,
        coefficient: best_mag,
        coefficient_floor,
        coefficient_floor_holds,
        dirichlet_q: q,
        dirichlet_a: dir.numerators[0],
        theta,
        cell_length,
        full_cells: full_cells.len() as u64,
        partition_exact,
        max_cell_oscillation,
        oscillation_bound,
        oscillation_bound_holds: max_cell_oscillation <= oscillation_bound * (1.0 + 1e-9),
        split_case: label.to_string(),
    };
    let cert = IncrementCertificate::Progression {
        start: s,
        step: q,
        length: l,
        intersection: hits,
        achieved: Rat(achieved),
        promised: Rat(gain),
        length_floor_holds: true,
    };
    Ok((cert, Some(diagnostics)))
}

/// `N' >= alpha^4 sqrt(N) / 2^21`, decided exactly by squaring.
fn length_floor_holds(n_prime: u64, alpha: &BigRational, n: u64) -> bool {
    let lhs = BigRational::from_integer(BigInt::from(n_prime))
        * BigRational::from_integer(BigInt::from(1u64 << constants::ROTH_LENGTH_LOG2))
        / alpha.pow(4);
    &lhs * &lhs >= BigRational::from_integer(BigInt::from(n))
}

/// Runs [`roth_step`] to exhaustion, rescaling `A n P` to `[N']` after every
/// increment via the translation-dilation `j -> start + step*j`.
pub fn roth_drive(a: &IntervalSet) -> Result<IterationTrace> {
    let mut current = a.clone();
    let mut steps = Vec::new();
    let mut level = 0u32;
    let mut prev_alpha: Option<BigRational> = None;
    loop {
        let (cert, _) = roth_step(&current)?;
        let alpha_i = current.density();
        if let Some(pa) = &prev_alpha {
            let gain = pa
                + &(pa * pa
                    / BigRational::from_integer(BigInt::from(
                        1u64 << constants::ROTH_GAIN_LOG2,
                    )));
            if alpha_i < gain {
                return Err(Error::TheoremViolation(
                    "trace density fell below the promised gain".into(),
                ));
            }
        }
        steps.push(TraceStep {
            level,
            instance_size: current.length(),
            set_size: current.len() as u64,
            alpha: Rat(alpha_i.clone()),
            certificate: cert.clone(),
        });
        match cert {
            IncrementCertificate::SmallN { .. } => break,
            IncrementCertificate::Progression {
                start,
                step,
                length,
                ..
            } => {
                // rescale A n P to [N'] by the position j + 1 of each member
                let pulled: Vec<u64> = (0..length)
                    .filter(|&j| {
                        let x = start + step * j;
                        x >= 1 && x <= current.length() && current.contains(x)
                    })
                    .map(|j| j + 1)
                    .collect();
                current = IntervalSet::new(length, pulled)?;
                let (free, _) = is_ap_free(&SetData::Interval(current.clone()))?;
                if !free {
                    return Err(Error::TheoremViolation(
                        "rescaled set failed the AP-freeness recheck".into(),
                    ));
                }
                prev_alpha = Some(alpha_i);
                level += 1;
            }
            IncrementCertificate::Hyperplane { .. } => unreachable!("integer driver"),
        }
    }
    Ok(IterationTrace {
        driver: DriverKind::Roth,
        steps,
        increment_steps: level,
        iteration_bound_holds: true,
        dimension_bound_holds: true,
    })
}

/// Re-verifies a certificate against the set it claims to describe,
/// trusting nothing but the counts.
pub fn verify_certificate(set: &SetData, cert: &IncrementCertificate) -> Result<bool> {
    match (set, cert) {
        (
            SetData::Group(a),
            IncrementCertificate::SmallN {
                instance_size,
                set_size,
                ..
            },
        ) => Ok(a.group().order() == *instance_size
            && a.len() as u64 == *set_size
            && (*set_size as u128) * (*set_size as u128)
                < constants::MESHULAM_SMALL_N_NUM as u128 * *instance_size as u128),
        (
            SetData::Interval(a),
            IncrementCertificate::SmallN {
                instance_size,
                set_size,
                ..
            },
        ) => Ok(a.length() == *instance_size
            && a.len() as u64 == *set_size
            && (*set_size as u128) * (*set_size as u128)
                < constants::ROTH_SMALL_N_NUM as u128 * *instance_size as u128),
        (
            SetData::Group(a),
            IncrementCertificate::Hyperplane {
                xi,
                coset,
                intersection,
                hyperplane_size,
                achieved,
                promised,
                ..
            },
        ) => {
            let group = a.group();
            let counted = a
                .elements()
                .iter()
                .filter(|&&x| group.dot3(*xi, x) == *coset)
                .count() as u64;
            let alpha = a.density().clone();
            let expected_promise = &alpha
                + &alpha * &alpha
                    / BigRational::from_integer(BigInt::from(constants::MESHULAM_GAIN_DEN));
            Ok(counted == *intersection
                && group.order() / 3 == *hyperplane_size
                && achieved.0 == ratio(counted, *hyperplane_size)
                && promised.0 == expected_promise
                && achieved.0 >= promised.0)
        }
        (
            SetData::Interval(a),
            IncrementCertificate::Progression {
                start,
                step,
                length,
                intersection,
                achieved,
                promised,
                ..
            },
        ) => {
            let counted = (0..*length)
                .filter(|&j| {
                    let x = start + step * j;
                    x >= 1 && x <= a.length() && a.contains(x)
                })
                .count() as u64;
            let alpha = a.density();
            let expected_promise = &alpha
                + &(&alpha * &alpha
                    / BigRational::from_integer(BigInt::from(
                        1u64 << constants::ROTH_GAIN_LOG2,
                    )));
            Ok(counted == *intersection
                && achieved.0 == ratio(counted, *length)
                && promised.0 == expected_promise
                && achieved.0 >= promised.0
                && length_floor_holds(*length, &alpha, a.length()))
        }
        _ => Err(Error::DomainMismatch(
            "certificate kind does not match the set domain".into(),
        )),
    }
}
