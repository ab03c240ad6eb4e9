//! Large spectra, additive and higher energies, dissociated dimension, and
//! the additive-non-smoothing detector.
//!
//! Energies are exact integers computed by counting convolutions; the
//! Fourier expression `E_x |1v_D(x)|^{2m}` is kept as a floating cross-check
//! only, since the exact values feed inequalities with exact thresholds.
//! Spectrum membership is decided in double precision on `|1hat|^2` against
//! `(delta alpha)^2` with a guard band; borderline frequencies are listed in
//! a boundary annex rather than silently classified.

use crate::error::Error;
use crate::fourier::{inverse_transform, transform_indicator, SpectrumTable};
use crate::group::{AmbientGroup, SiteSet};
use crate::rational::Rat;
use crate::Result;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Guard band on `|1hat|^2 - (delta alpha)^2` for membership decisions.
pub const MEMBERSHIP_GUARD: f64 = 1e-12;

/// Exact-mode cap for the dissociated-dimension search.
pub const EXACT_DIMENSION_CAP: usize = 24;

/// The `delta`-large spectrum of a set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LargeSpectrum {
    pub group: AmbientGroup,
    pub delta: Rat,
    pub alpha: Rat,
    /// Frequencies with `|1hat_A(xi)| >= delta * alpha`, sorted.
    pub frequencies: Vec<u64>,
    /// Frequencies whose squared magnitude sits within the guard band of the
    /// threshold; decided by the double value but flagged here.
    pub boundary: Vec<u64>,
    /// Parseval bound `1/(alpha delta^2)` on the size.
    pub parseval_bound: Rat,
}

/// `Spec_delta(A)`: all frequencies where the indicator transform is at
/// least `delta * alpha` in magnitude. `xi = 0` is always a member since
/// `1hat_A(0) = alpha`.
pub fn large_spectrum(a: &SiteSet, delta: &BigRational) -> Result<LargeSpectrum> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("set must be nonempty".into()));
    }
    if !(delta > &BigRational::zero() && delta <= &BigRational::one()) {
        return Err(Error::InvalidArgument("delta must lie in (0, 1]".into()));
    }
    let table = transform_indicator(a);
    let alpha = a.density().clone();
    let thr = delta.to_f64().unwrap_or(f64::NAN) * a.density_f64();
    let thr2 = thr * thr;
    let mut frequencies = Vec::new();
    let mut boundary = Vec::new();
    for (xi, v) in table.values.iter().enumerate() {
        let m2 = v.norm_sqr();
        if xi == 0 || m2 >= thr2 {
            frequencies.push(xi as u64);
        }
        if xi != 0 && (m2 - thr2).abs() <= MEMBERSHIP_GUARD {
            boundary.push(xi as u64);
        }
    }
    let parseval_bound = Rat((delta * delta * &alpha).recip());
    Ok(LargeSpectrum {
        group: *a.group(),
        delta: Rat(delta.clone()),
        alpha: Rat(alpha),
        frequencies,
        boundary,
        parseval_bound,
    })
}

impl LargeSpectrum {
    /// The spectrum as a site set in the (self-identified) dual group.
    pub fn as_site_set(&self) -> SiteSet {
        SiteSet::new(self.group, self.frequencies.clone()).expect("frequencies are valid indices")
    }
}

/// Exact higher-energy count with its Fourier shadow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    pub group: AmbientGroup,
    pub set_size: u64,
    pub m: u32,
    /// `E_{2m}`: number of `2m`-tuples with equal half sums, exact.
    pub energy: u128,
    /// `E_{2m} / |D|^{2m-1}`, exact.
    pub normalized: Rat,
    /// `E_x |1v_D(x)|^{2m}` in double precision.
    pub spectral_shadow: f64,
    /// Relative gap between the exact value and the shadow.
    pub shadow_rel_gap: f64,
}

fn counting_convolution(group: &AmbientGroup, f: &[u128], set: &SiteSet) -> Result<Vec<u128>> {
    let n = group.order() as usize;
    let mut out = vec![0u128; n];
    for (x, &v) in f.iter().enumerate() {
        if v == 0 {
            continue;
        }
        for &d in set.elements() {
            let idx = group.add(x as u64, d) as usize;
            out[idx] = out[idx]
                .checked_add(v)
                .ok_or_else(|| Error::InvalidArgument("energy exceeds u128".into()))?;
        }
    }
    Ok(out)
}

/// `E_{2m}(D)` by the `m`-fold counting convolution, with the spectral
/// cross-check `E_x |1v_D(x)|^{2m}` (must agree to 1e-6 relative).
pub fn energy(delta_set: &SiteSet, m: u32) -> Result<EnergyReport> {
    delta_set.group().check_table_scale()?;
    if !(2..=32).contains(&m) {
        return Err(Error::InvalidArgument(
            "energy order m must lie in 2..=32".into(),
        ));
    }
    if delta_set.is_empty() {
        return Err(Error::InvalidArgument("set must be nonempty".into()));
    }
    let group = *delta_set.group();
    let n = group.order() as usize;

    // r_m(x) = #{m-tuples of set elements summing to x}
    let mut r = vec![0u128; n];
    for &d in delta_set.elements() {
        r[d as usize] += 1;
    }
    for _ in 1..m {
        r = counting_convolution(&group, &r, delta_set)?;
    }
    let mut energy_val: u128 = 0;
    for &v in &r {
        energy_val = energy_val
            .checked_add(
                v.checked_mul(v)
                    .ok_or_else(|| Error::InvalidArgument("energy exceeds u128".into()))?,
            )
            .ok_or_else(|| Error::InvalidArgument("energy exceeds u128".into()))?;
    }

    // trivial bounds |D|^m <= E_{2m} <= |D|^{2m-1}
    let size = delta_set.len() as u128;
    let lower = size.pow(m);
    let upper = size.pow(2 * m - 1);
    if energy_val < lower || energy_val > upper {
        return Err(Error::TheoremViolation(format!(
            "energy {energy_val} violates trivial bounds [{lower}, {upper}]"
        )));
    }

    // Fourier shadow
    let mut dual = vec![Complex64::new(0.0, 0.0); n];
    for &d in delta_set.elements() {
        dual[d as usize] = Complex64::new(1.0, 0.0);
    }
    let inv = inverse_transform(&SpectrumTable { group, values: dual })?;
    let shadow: f64 = inv.iter().map(|v| v.norm_sqr().powi(m as i32)).sum::<f64>() / n as f64;
    let exact_f64 = energy_val as f64;
    let gap = (shadow - exact_f64).abs() / exact_f64.max(shadow).max(1.0);
    if gap > 1e-6 {
        return Err(Error::TheoremViolation(format!(
            "energy routes disagree: counting {energy_val}, spectral {shadow}"
        )));
    }

    let normalized = Rat(BigRational::new(
        BigInt::from(energy_val),
        BigInt::from(size.pow(2 * m - 1)),
    ));
    Ok(EnergyReport {
        group,
        set_size: delta_set.len() as u64,
        m,
        energy: energy_val,
        normalized,
        spectral_shadow: shadow,
        shadow_rel_gap: gap,
    })
}

/// Whether the subset-sum map stays injective after adding `e`: no existing
/// sum shifted by `e` may collide with an existing sum.
fn can_extend(group: &AmbientGroup, sums: &[u64], sum_flags: &[bool], e: u64) -> bool {
    for &s in sums {
        if sum_flags[group.add(s, e) as usize] {
            return false;
        }
    }
    true
}

/// Dissociated-dimension result with witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dimension: u64,
    pub witness: Vec<u64>,
    /// True for the exact search; false for the greedy lower bound.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionMode {
    Exact,
    Greedy,
}

struct DimensionSearch<'a> {
    group: &'a AmbientGroup,
    elements: &'a [u64],
    sums: Vec<u64>,
    sum_flags: Vec<bool>,
    best: Vec<u64>,
}

impl DimensionSearch<'_> {
    /// A set is dissociated iff its `2^k` subset sums are pairwise distinct:
    /// a coincidence of subset sums is exactly a nonzero `{-1,0,1}`-relation.
    fn dfs(&mut self, from: usize, chosen: &mut Vec<u64>) {
        if chosen.len() + (self.elements.len() - from) <= self.best.len() {
            return;
        }
        if from == self.elements.len() {
            return;
        }
        let e = self.elements[from];
        if can_extend(self.group, &self.sums, &self.sum_flags, e) {
            let added: Vec<u64> = self.sums.iter().map(|&s| self.group.add(s, e)).collect();
            for &s in &added {
                self.sum_flags[s as usize] = true;
            }
            self.sums.extend_from_slice(&added);
            chosen.push(e);
            if chosen.len() > self.best.len() {
                self.best = chosen.clone();
            }
            self.dfs(from + 1, chosen);
            chosen.pop();
            for _ in 0..added.len() {
                let s = self.sums.pop().expect("added sums are on the stack");
                self.sum_flags[s as usize] = false;
            }
        }
        self.dfs(from + 1, chosen);
    }
}

/// Size of the largest dissociated subset (exact mode, `|D| <= 24`) or a
/// greedy maximal dissociated subset (a certified lower bound).
pub fn dissociated_dimension(set: &SiteSet, mode: DimensionMode) -> Result<DimensionReport> {
    let group = set.group();
    group.check_table_scale()?;
    let n = group.order() as usize;
    match mode {
        DimensionMode::Exact => {
            if set.len() > EXACT_DIMENSION_CAP {
                return Err(Error::InvalidArgument(format!(
                    "exact dissociated dimension capped at {EXACT_DIMENSION_CAP} elements, got {}",
                    set.len()
                )));
            }
            let mut search = DimensionSearch {
                group,
                elements: set.elements(),
                sums: vec![0],
                sum_flags: {
                    let mut f = vec![false; n];
                    f[0] = true;
                    f
                },
                best: Vec::new(),
            };
            let mut chosen = Vec::new();
            search.dfs(0, &mut chosen);
            Ok(DimensionReport {
                dimension: search.best.len() as u64,
                witness: search.best,
                exact: true,
            })
        }
        DimensionMode::Greedy => {
            let mut sums = vec![0u64];
            let mut sum_flags = vec![false; n];
            sum_flags[0] = true;
            let mut witness = Vec::new();
            for &e in set.elements() {
                if can_extend(group, &sums, &sum_flags, e) {
                    let added: Vec<u64> = sums.iter().map(|&s| group.add(s, e)).collect();
                    for &s in &added {
                        sum_flags[s as usize] = true;
                    }
                    sums.extend_from_slice(&added);
                    witness.push(e);
                }
            }
            Ok(DimensionReport {
                dimension: witness.len() as u64,
                witness,
                exact: false,
            })
        }
    }
}

/// Rank of the elements over `F_3`, for vector groups. Independent oracle
/// for the dimension search: `{-1,0,1}`-relations are exactly `F_3`-linear
/// dependences.
pub fn f3_rank(set: &SiteSet) -> Result<usize> {
    let group = set.group();
    let dim = match group {
        AmbientGroup::Vector { dimension } => *dimension as usize,
        _ => {
            return Err(Error::DomainMismatch(
                "F_3 rank applies to vector groups".into(),
            ))
        }
    };
    let mut rows: Vec<Vec<u8>> = set.elements().iter().map(|&e| group.decode(e)).collect();
    let mut rank = 0usize;
    for col in 0..dim {
        if let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) {
            rows.swap(rank, p);
            let inv = if rows[rank][col] == 1 { 1 } else { 2 };
            for v in rows[rank].iter_mut() {
                *v = (*v * inv) % 3;
            }
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[col] != 0 {
                    let f = row[col];
                    for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                        *v = (*v + (3 - f) * pv) % 3;
                    }
                }
            }
            rank += 1;
        }
    }
    Ok(rank)
}

/// Dimension diagnostics against the Chang and Bloom shapes. The hidden
/// constants are unspecified, so the ratios are reported without a verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChangReport {
    pub delta: Rat,
    pub alpha: Rat,
    pub spectrum_size: u64,
    pub dimension: u64,
    pub dimension_exact: bool,
    /// `dim * delta^2 / log(1/alpha)` (Chang shape).
    pub chang_ratio: f64,
    /// `dim * delta / log(1/alpha)` (Bloom shape).
    pub bloom_ratio: f64,
}

pub fn chang_diagnostic(a: &SiteSet, delta: &BigRational) -> Result<ChangReport> {
    let spec = large_spectrum(a, delta)?;
    let site = spec.as_site_set();
    let mode = if site.len() <= EXACT_DIMENSION_CAP {
        DimensionMode::Exact
    } else {
        DimensionMode::Greedy
    };
    let dim = dissociated_dimension(&site, mode)?;
    let log_inv_alpha = (1.0 / a.density_f64()).ln().max(f64::MIN_POSITIVE);
    let delta_f = delta.to_f64().unwrap_or(f64::NAN);
    Ok(ChangReport {
        delta: Rat(delta.clone()),
        alpha: Rat(a.density().clone()),
        spectrum_size: spec.frequencies.len() as u64,
        dimension: dim.dimension,
        dimension_exact: dim.exact,
        chang_ratio: dim.dimension as f64 * delta_f * delta_f / log_inv_alpha,
        bloom_ratio: dim.dimension as f64 * delta_f / log_inv_alpha,
    })
}

/// The four quantities of the additive-non-smoothing regime, with the
/// caller's multiplicative slack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonsmoothingReport {
    pub delta: Rat,
    pub alpha: Rat,
    pub kappa: f64,
    pub spectrum_size: u64,
    /// `delta / alpha`.
    pub q_delta: f64,
    /// `|Spec| * delta^3`.
    pub q_size: f64,
    /// `(E_4 / |Spec|^3) / delta^2`.
    pub q_e4: f64,
    /// `(E_8 / |Spec|^7) / delta^6`.
    pub q_e8: f64,
    /// True iff every quantity lies in `[1/kappa, kappa]`.
    pub non_smoothing: bool,
    /// Exact check of `sigma >= tau^3`, i.e. `E_8 |Spec|^2 >= E_4^3`.
    pub sigma_tau_holds: bool,
    pub e4: u128,
    pub e8: u128,
}

pub fn nonsmoothing_probe(
    a: &SiteSet,
    delta: &BigRational,
    kappa: f64,
) -> Result<NonsmoothingReport> {
    if !kappa.is_finite() || kappa < 1.0 {
        return Err(Error::InvalidArgument("slack kappa must be >= 1".into()));
    }
    let spec = large_spectrum(a, delta)?;
    let site = spec.as_site_set();
    let e4 = energy(&site, 2)?;
    let e8 = energy(&site, 4)?;
    let size = site.len() as f64;
    let delta_f = delta.to_f64().unwrap_or(f64::NAN);
    let alpha_f = a.density_f64();

    let q_delta = delta_f / alpha_f;
    let q_size = size * delta_f.powi(3);
    let q_e4 = (e4.energy as f64 / size.powi(3)) / delta_f.powi(2);
    let q_e8 = (e8.energy as f64 / size.powi(7)) / delta_f.powi(6);
    let within = |q: f64| q >= 1.0 / kappa && q <= kappa;

    // sigma >= tau^3 as exact integers: E8 |S|^2 >= E4^3
    let lhs = BigInt::from(e8.energy) * BigInt::from(site.len() as u64).pow(2);
    let rhs = BigInt::from(e4.energy).pow(3);
    let sigma_tau_holds = lhs >= rhs;

    Ok(NonsmoothingReport {
        delta: Rat(delta.clone()),
        alpha: Rat(a.density().clone()),
        kappa,
        spectrum_size: site.len() as u64,
        q_delta,
        q_size,
        q_e4,
        q_e8,
        non_smoothing: within(q_delta) && within(q_size) && within(q_e4) && within(q_e8),
        sigma_tau_holds,
        e4: e4.energy,
        e8: e8.energy,
    })
}

/// One dyadic level set of the balanced transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DyadicBand {
    /// Band floor `delta`: frequencies with `delta alpha <= |fhat| < 2 delta alpha`.
    pub delta: f64,
    pub count: u64,
    pub mass: f64,
}

/// The l3 mass of the balanced transform with its dyadic decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ell3Report {
    /// `sum_xi |fhat_A(xi)|^3`.
    pub total: f64,
    pub bands: Vec<DyadicBand>,
    /// Aggregated mass of the frequencies below the last band floor.
    pub tail_mass: f64,
    pub tail_count: u64,
}

/// `sum |fhat_A|^3` for the balanced function `f_A = 1_A - alpha`, split into
/// dyadic bands `Spec_delta \ Spec_{2delta}`; bands below the `alpha^2`
/// magnitude floor are aggregated since they contribute only `O(alpha^3)`.
pub fn ell3_mass(a: &SiteSet) -> Result<Ell3Report> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("set must be nonempty".into()));
    }
    let table = transform_indicator(a);
    let alpha = a.density_f64();
    let mags: Vec<f64> = table
        .values
        .iter()
        .enumerate()
        .map(|(xi, v)| if xi == 0 { 0.0 } else { v.norm() })
        .collect();
    let total: f64 = mags.iter().map(|&m| m.powi(3)).sum();

    let mut bands = Vec::new();
    let mut assigned = vec![false; mags.len()];
    assigned[0] = true;
    let mut delta = 1.0f64;
    while delta > alpha && delta > 1e-15 {
        let floor = delta * alpha;
        let ceil = 2.0 * delta * alpha;
        let mut count = 0u64;
        let mut mass = 0.0;
        for (xi, &m) in mags.iter().enumerate() {
            if !assigned[xi] && m >= floor && (delta == 1.0 || m < ceil) {
                assigned[xi] = true;
                count += 1;
                mass += m.powi(3);
            }
        }
        bands.push(DyadicBand { delta, count, mass });
        delta /= 2.0;
    }
    let mut tail_mass = 0.0;
    let mut tail_count = 0u64;
    for (xi, &m) in mags.iter().enumerate() {
        if !assigned[xi] {
            tail_count += 1;
            tail_mass += m.powi(3);
        }
    }
    Ok(Ell3Report {
        total,
        bands,
        tail_mass,
        tail_count,
    })
}

/// `||mu_A * 1_A||_{L^{2m}}` with the `2m`-th moment kept exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpNormReport {
    pub m: u32,
    /// `E_x (mu_A * 1_A)(x)^{2m}`, exact.
    pub moment: Rat,
    /// `moment^(1/2m)` in double precision.
    pub norm: f64,
}

/// Exact-rational `L^{2m}` norm of `mu_A * 1_A`; the convolution value at
/// `x` is the representation count `#{(a,b) in A^2 : a+b = x} / |A|`.
pub fn lp_convolution_norm(a: &SiteSet, m: u32) -> Result<LpNormReport> {
    a.group().check_table_scale()?;
    if !(1..=64).contains(&m) {
        return Err(Error::InvalidArgument("m must lie in 1..=64".into()));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("set must be nonempty".into()));
    }
    let group = a.group();
    let n = group.order();
    let mut rep = vec![0u64; n as usize];
    for &x in a.elements() {
        for &y in a.elements() {
            rep[group.add(x, y) as usize] += 1;
        }
    }
    let mut sum = BigInt::zero();
    for &r in &rep {
        sum += BigInt::from(r).pow(2 * m);
    }
    let denom = BigInt::from(a.len() as u64).pow(2 * m) * BigInt::from(n);
    let moment = BigRational::new(sum, denom);
    let norm = moment
        .to_f64()
        .map(|v| v.powf(1.0 / (2.0 * m as f64)))
        .unwrap_or(f64::NAN);
    Ok(LpNormReport {
        m,
        moment: Rat(moment),
        norm,
    })
}
