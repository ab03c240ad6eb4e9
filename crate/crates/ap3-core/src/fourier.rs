//! Transforms, convolutions, and the trilinear 3-AP form.
//!
//! Normalizations are pinned once and asserted by tests: the forward
//! transform averages, `h^(xi) = E_x h(x) conj(xi(x))`, and the inverse
//! transform sums, `F^v(x) = sum_xi F(xi) xi(x)`. Mixing the two conventions
//! is the classic bug source, so Parseval (`E_x g conj(h) = sum ghat
//! conj(hhat)`) is exercised on both group families.
//!
//! Cyclic fast paths run through `rustfft` (which handles prime orders
//! internally); vector groups use an in-place radix-3 pass per coordinate.
//! The quadratic naive evaluation of the defining sums is kept public as the
//! correctness oracle for both.

use crate::error::Error;
use crate::group::{AmbientGroup, SiteSet};
use crate::Result;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Complex-valued function on the (self-identified) dual group.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub group: AmbientGroup,
    pub values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumWire {
    group: AmbientGroup,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SpectrumTable {
    pub fn to_json(&self) -> String {
        let wire = SpectrumWire {
            group: self.group,
            re: self.values.iter().map(|v| v.re).collect(),
            im: self.values.iter().map(|v| v.im).collect(),
        };
        serde_json::to_string(&wire).expect("spectrum serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: SpectrumWire = serde_json::from_str(text)?;
        if wire.re.len() != wire.im.len() || wire.re.len() != wire.group.order() as usize {
            return Err(Error::LengthMismatch {
                expected: wire.group.order() as usize,
                got: wire.re.len(),
            });
        }
        Ok(SpectrumTable {
            group: wire.group,
            values: wire
                .re
                .iter()
                .zip(&wire.im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        })
    }
}

fn check_len(group: &AmbientGroup, f: &[Complex64]) -> Result<()> {
    group.check_table_scale()?;
    if f.len() as u64 != group.order() {
        return Err(Error::LengthMismatch {
            expected: group.order() as usize,
            got: f.len(),
        });
    }
    Ok(())
}

/// One radix-3 pass per coordinate; `omega` is the cube root used in the
/// butterfly (`e(-1/3)` for the forward direction, `e(1/3)` for the inverse).
fn vector_passes(dimension: u32, data: &mut [Complex64], omega: Complex64) {
    let omega2 = omega * omega;
    let n = data.len();
    let mut stride = 1usize;
    for _ in 0..dimension {
        let block = stride * 3;
        let mut base = 0usize;
        while base < n {
            for off in 0..stride {
                let i0 = base + off;
                let (u0, u1, u2) = (data[i0], data[i0 + stride], data[i0 + 2 * stride]);
                data[i0] = u0 + u1 + u2;
                data[i0 + stride] = u0 + omega * u1 + omega2 * u2;
                data[i0 + 2 * stride] = u0 + omega2 * u1 + omega * u2;
            }
            base += block;
        }
        stride = block;
    }
}

const OMEGA_FWD: Complex64 = Complex64::new(-0.5, -0.866_025_403_784_438_6);
const OMEGA_INV: Complex64 = Complex64::new(-0.5, 0.866_025_403_784_438_6);

/// Forward transform: `h^(xi) = E_x h(x) conj(xi(x))`.
pub fn forward_transform(group: &AmbientGroup, f: &[Complex64]) -> Result<SpectrumTable> {
    check_len(group, f)?;
    let mut data = f.to_vec();
    match group {
        AmbientGroup::Cyclic { .. } => {
            let mut planner = FftPlanner::new();
            planner.plan_fft_forward(data.len()).process(&mut data);
        }
        AmbientGroup::Vector { dimension } => vector_passes(*dimension, &mut data, OMEGA_FWD),
    }
    let scale = 1.0 / group.order() as f64;
    for v in &mut data {
        *v *= scale;
    }
    Ok(SpectrumTable {
        group: *group,
        values: data,
    })
}

/// Inverse transform: `F^v(x) = sum_xi F(xi) xi(x)`.
pub fn inverse_transform(table: &SpectrumTable) -> Result<Vec<Complex64>> {
    check_len(&table.group, &table.values)?;
    let mut data = table.values.clone();
    match table.group {
        AmbientGroup::Cyclic { .. } => {
            let mut planner = FftPlanner::new();
            planner.plan_fft_inverse(data.len()).process(&mut data);
        }
        AmbientGroup::Vector { dimension } => vector_passes(dimension, &mut data, OMEGA_INV),
    }
    Ok(data)
}

/// The defining sum of the forward transform, term by term. Test oracle for
/// the fast paths; quadratic in the group order.
pub fn naive_forward(group: &AmbientGroup, f: &[Complex64]) -> Result<SpectrumTable> {
    check_len(group, f)?;
    let n = group.order();
    let scale = 1.0 / n as f64;
    let values = (0..n)
        .map(|xi| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, &v) in f.iter().enumerate() {
                acc += v * group.character(xi, x as u64).conj();
            }
            acc * scale
        })
        .collect();
    Ok(SpectrumTable {
        group: *group,
        values,
    })
}

/// The defining sum of the inverse transform. Test oracle.
pub fn naive_inverse(table: &SpectrumTable) -> Result<Vec<Complex64>> {
    check_len(&table.group, &table.values)?;
    let group = table.group;
    let n = group.order();
    Ok((0..n)
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (xi, &v) in table.values.iter().enumerate() {
                acc += v * group.character(xi as u64, x);
            }
            acc
        })
        .collect())
}

/// Normalized convolution `(g*h)(x) = E_y g(x-y) h(y)`.
pub fn convolve(group: &AmbientGroup, g: &[Complex64], h: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(group, g)?;
    check_len(group, h)?;
    let gh = forward_transform(group, g)?;
    let hh = forward_transform(group, h)?;
    let product = SpectrumTable {
        group: *group,
        values: gh
            .values
            .iter()
            .zip(&hh.values)
            .map(|(&a, &b)| a * b)
            .collect(),
    };
    inverse_transform(&product)
}

/// Cross-correlation `(g o h)(x) = (g * h_-)(x)` with `h_-(x) = conj(h(-x))`.
pub fn correlate(group: &AmbientGroup, g: &[Complex64], h: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(group, h)?;
    let n = group.order();
    let mut h_minus = vec![Complex64::new(0.0, 0.0); n as usize];
    for x in 0..n {
        h_minus[x as usize] = h[group.neg(x) as usize].conj();
    }
    convolve(group, g, &h_minus)
}

/// Direct evaluation of `E_{x,y} f(x) g(x+y) h(x+2y)`. Test oracle and the
/// counting side of the dual-route check in [`triple_ap_form`].
pub fn direct_triple_ap_form(
    group: &AmbientGroup,
    f: &[Complex64],
    g: &[Complex64],
    h: &[Complex64],
) -> Result<Complex64> {
    check_len(group, f)?;
    check_len(group, g)?;
    check_len(group, h)?;
    let n = group.order();
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..n {
        let fx = f[x as usize];
        if fx == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for y in 0..n {
            let xy = group.add(x, y);
            let xyy = group.add(xy, y);
            inner += g[xy as usize] * h[xyy as usize];
        }
        acc += fx * inner;
    }
    Ok(acc / (n as f64 * n as f64))
}

/// Spectral evaluation `sum_xi fhat(xi) ghat(-2 xi) hhat(xi)`.
pub fn spectral_triple_ap_form(
    group: &AmbientGroup,
    f: &[Complex64],
    g: &[Complex64],
    h: &[Complex64],
) -> Result<Complex64> {
    let fh = forward_transform(group, f)?;
    let gh = forward_transform(group, g)?;
    let hh = forward_transform(group, h)?;
    let n = group.order();
    let mut acc = Complex64::new(0.0, 0.0);
    for xi in 0..n {
        let minus_two_xi = group.neg(group.scale(2, xi));
        acc += fh.values[xi as usize] * gh.values[minus_two_xi as usize] * hh.values[xi as usize];
    }
    Ok(acc)
}

/// Relative closeness with an absolute floor for near-zero pairs.
pub fn rel_close(a: Complex64, b: Complex64, tol: f64, floor: f64) -> bool {
    let diff = (a - b).norm();
    let scale = a.norm().max(b.norm());
    diff <= floor || diff <= tol * scale
}

/// `E_{x,y} f(x) g(x+y) h(x+2y)`, evaluated both directly and spectrally.
///
/// The two routes must agree to 1e-8 relative; the spectral value is
/// returned. Cyclic groups of even order are rejected, since the identity
/// needs the dilation by 2 to be invertible.
pub fn triple_ap_form(
    group: &AmbientGroup,
    f: &[Complex64],
    g: &[Complex64],
    h: &[Complex64],
) -> Result<Complex64> {
    if !group.has_odd_order() {
        return Err(Error::EvenModulus(group.order()));
    }
    let direct = direct_triple_ap_form(group, f, g, h)?;
    let spectral = spectral_triple_ap_form(group, f, g, h)?;
    if !rel_close(direct, spectral, 1e-8, 1e-12) {
        return Err(Error::TheoremViolation(format!(
            "triple AP form routes disagree: direct {direct}, spectral {spectral}"
        )));
    }
    Ok(spectral)
}

/// Indicator of a site set as a complex function table.
pub fn indicator_function(set: &SiteSet) -> Vec<Complex64> {
    let mut f = vec![Complex64::new(0.0, 0.0); set.group().order() as usize];
    for &e in set.elements() {
        f[e as usize] = Complex64::new(1.0, 0.0);
    }
    f
}

/// Forward transform of a site-set indicator.
pub fn transform_indicator(set: &SiteSet) -> SpectrumTable {
    forward_transform(set.group(), &indicator_function(set)).expect("lengths match by construction")
}
