//! Wigner functions of states, Wigner representations of operators, and the
//! trace, inversion and expectation formulas built on them.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};
use crate::fock::{symmetric_product, BasisWindow, FockOperator, FockState};
use crate::kernel::{eighth_root, KernelModel, Variant, WignerKernel};
use crate::periodics::PeriodicSignal;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Inclusive range of n for sums and grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NRange {
    pub lo: i64,
    pub hi: i64,
}

impl NRange {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty n-range [{lo}, {hi}]")));
        }
        Ok(NRange { lo, hi })
    }

    /// [2·n_min − buffer, 2·n_max + buffer].
    pub fn enlarged(window: BasisWindow, buffer: i64) -> Self {
        NRange { lo: 2 * window.n_min - buffer, hi: 2 * window.n_max + buffer }
    }

    pub fn of_window(window: BasisWindow) -> Self {
        NRange { lo: window.n_min, hi: window.n_max }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.lo && n <= self.hi
    }
}

/// How the infinite n-sums are closed off outside the range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMode {
    Truncate,
    /// Sum the remainder in closed form through digamma functions; needs a
    /// kernel built from a piecewise spectrum, and truncates otherwise.
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SumOptions {
    pub buffer: i64,
    pub tail: TailMode,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions { buffer: 16, tail: TailMode::Analytic }
    }
}

impl SumOptions {
    pub fn truncated(buffer: i64) -> Self {
        SumOptions { buffer, tail: TailMode::Truncate }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaGrid {
    nodes: Vec<f64>,
    uniform: bool,
}

impl ThetaGrid {
    /// 2πj/count, j = 0..count.
    pub fn uniform(count: usize) -> Self {
        ThetaGrid { nodes: (0..count).map(|j| TAU * j as f64 / count as f64).collect(), uniform: true }
    }

    /// `count` equispaced nodes on [0.1, 2π − 0.1].
    pub fn interior(count: usize) -> Self {
        let (a, b) = (0.1, TAU - 0.1);
        let nodes =
            if count == 1 { vec![0.5 * (a + b)] } else { (0..count).map(|j| a + (b - a) * j as f64 / (count - 1) as f64).collect() };
        ThetaGrid { nodes, uniform: false }
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Self {
        ThetaGrid { nodes, uniform: false }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }
}

/// Real values W(n, θ) on an (n, θ-node) grid.
#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub variant: Variant,
    pub nrange: NRange,
    pub theta: ThetaGrid,
    pub values: Array2<f64>,
    /// Largest |Im W| seen before taking the real part.
    pub max_imag: f64,
    pub harmonics: Vec<PeriodicSignal>,
}

impl WignerGrid {
    pub fn value(&self, n: i64, node: usize) -> f64 {
        self.values[[(n - self.nrange.lo) as usize, node]]
    }

    pub fn harmonics_at(&self, n: i64) -> &PeriodicSignal {
        &self.harmonics[(n - self.nrange.lo) as usize]
    }
}

/// Complex values A(n, θ) on an (n, θ-node) grid.
#[derive(Clone, Debug)]
pub struct OperatorRep {
    pub variant: Variant,
    pub nrange: NRange,
    pub theta: ThetaGrid,
    pub values: Array2<C64>,
    pub harmonics: Vec<PeriodicSignal>,
}

impl OperatorRep {
    pub fn value(&self, n: i64, node: usize) -> C64 {
        self.values[[(n - self.nrange.lo) as usize, node]]
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Harmonics of Σ_{k,ℓ} ⟨k|Ŵ(n,θ)|ℓ⟩ X[ℓ][k] in θ; coefficient d collects k − ℓ = d.
/// `xt` is Xᵀ, so both inner reads run along rows.
fn harmonics_unchecked(kern: &WignerKernel, w: BasisWindow, xt: &Array2<C64>, n: i64, scale: f64) -> PeriodicSignal {
    let d = w.dim() as i64;
    let mut coeffs = vec![ZERO; (2 * d - 1) as usize];
    let base = kern.base();
    let b0 = kern.window().n_min;
    let first = if kern.physical() { (-w.n_min).max(0) as usize } else { 0 };
    let len = w.dim();
    let bdim = kern.window().dim();
    let bslice = base.as_slice().expect("base is contiguous");
    let xslice = xt.as_slice().expect("transpose is contiguous");
    let bl0 = (w.n_min + first as i64 - n - b0) as usize;
    for i in first..len {
        let r = (w.n_min + i as i64 - n - b0) as usize;
        let brow = &bslice[r * bdim + bl0..r * bdim + bl0 + (len - first)];
        let xrow = &xslice[i * len + first..(i + 1) * len];
        // coefficient index i + len − 1 − j, descending in j
        let out = &mut coeffs[i..i + len - first];
        for ((o, b), x) in out.iter_mut().rev().zip(brow).zip(xrow) {
            *o += b * x;
        }
    }
    let c = (d - 1) as usize;
    PeriodicSignal::new(c, coeffs.into_iter().map(|z| z * scale).collect()).unwrap()
}

/// θ-harmonics of Tr[Ŵ(n,θ)X] for one n.
pub fn harmonics_at(kern: &WignerKernel, x: &FockOperator, n: i64) -> Result<PeriodicSignal> {
    kern.covers(x.window, n, n)?;
    Ok(harmonics_unchecked(kern, x.window, &x.mat.t().as_standard_layout().into_owned(), n, 1.0))
}

fn harmonic_table(kern: &WignerKernel, x: &FockOperator, nrange: NRange, scale: f64) -> Result<Vec<PeriodicSignal>> {
    kern.covers(x.window, nrange.lo, nrange.hi)?;
    let xt = x.mat.t().as_standard_layout().into_owned();
    Ok(nrange.iter().collect::<Vec<_>>().into_par_iter().map(|n| harmonics_unchecked(kern, x.window, &xt, n, scale)).collect())
}

fn eval_table(table: &[PeriodicSignal], theta: &ThetaGrid) -> Array2<C64> {
    let rows: Vec<Vec<C64>> = table.par_iter().map(|s| s.eval_many(theta.nodes())).collect();
    let mut out = Array2::zeros((table.len(), theta.len()));
    for (i, r) in rows.into_iter().enumerate() {
        for (j, v) in r.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    out
}

fn require_density(kern: &WignerKernel, rho: &FockOperator) -> Result<()> {
    rho.validate_density(1e-10)?;
    if kern.physical() && !rho.is_physical() {
        return Err(Error::NotDensity(vec![format!("variant {} needs a physical state (no weight on n < 0)", kern.variant())]));
    }
    Ok(())
}

/// W(n,θ) = Σ_{k,ℓ} ⟨k|Ŵ(n,θ)|ℓ⟩ ρ[ℓ][k].
pub fn wigner_of_state(kern: &WignerKernel, rho: &FockOperator, nrange: NRange, theta: &ThetaGrid) -> Result<WignerGrid> {
    require_density(kern, rho)?;
    let harmonics = harmonic_table(kern, rho, nrange, 1.0)?;
    let vals = eval_table(&harmonics, theta);
    let max_imag = vals.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(WignerGrid { variant: kern.variant(), nrange, theta: theta.clone(), values: vals.mapv(|z| z.re), max_imag, harmonics })
}

/// A(n,θ) = 2π Σ_{k,ℓ} ⟨k|Ŵ(n,θ)|ℓ⟩ A[ℓ][k].
pub fn op_representation(kern: &WignerKernel, op: &FockOperator, nrange: NRange, theta: &ThetaGrid) -> Result<OperatorRep> {
    let harmonics = harmonic_table(kern, op, nrange, TAU)?;
    let values = eval_table(&harmonics, theta);
    Ok(OperatorRep { variant: kern.variant(), nrange, theta: theta.clone(), values, harmonics })
}

/// Representation of (N̂θ̂ + θ̂N̂)/2 built on `window`.
pub fn symmetric_product_rep(kern: &WignerKernel, window: BasisWindow, nrange: NRange, theta: &ThetaGrid) -> Result<OperatorRep> {
    op_representation(kern, &symmetric_product(window), nrange, theta)
}

/// Σ_n Σ_m x_m(n) y_{−m}(n) over the range, scaled by (2π)².
fn paired_sum(kern: &WignerKernel, x: &FockOperator, y: &FockOperator, nrange: NRange) -> Result<C64> {
    let tx = harmonic_table(kern, x, nrange, 1.0)?;
    let ty = harmonic_table(kern, y, nrange, 1.0)?;
    let mut acc = ZERO;
    for (a, b) in tx.iter().zip(&ty) {
        acc += a.pairing(b) / TAU;
    }
    Ok(acc * (TAU * TAU))
}

fn same_window(a: &FockOperator, b: &FockOperator) -> Result<()> {
    if a.window != b.window {
        let (x, y) = (a.window, b.window);
        return Err(Error::WindowMismatch { a_min: x.n_min, a_max: x.n_max, b_min: y.n_min, b_max: y.n_max });
    }
    Ok(())
}

/// (2π)² Σ_n Σ_m x_m(n) y_{−m}(n) over all n, with the tail as requested.
pub fn pairing(kern: &WignerKernel, x: &FockOperator, y: &FockOperator, opts: SumOptions) -> Result<C64> {
    same_window(x, y)?;
    let nrange = NRange::enlarged(x.window, opts.buffer);
    if kern.covers(x.window, nrange.lo, nrange.hi).is_err() {
        let have = kern.window();
        let lo_state = if kern.physical() { x.window.n_min.max(0) } else { x.window.n_min };
        return Err(Error::NRange {
            need_lo: nrange.lo,
            need_hi: nrange.hi,
            have_lo: x.window.n_max - have.n_max,
            have_hi: lo_state - have.n_min,
        });
    }
    let mut s = paired_sum(kern, x, y, nrange)?;
    if opts.tail == TailMode::Analytic {
        if let Some(t) = tail::pairing_tail(kern, x, y, nrange) {
            s += t;
        }
    }
    Ok(s)
}

/// (1/2π) Σ_n ∫du(θ) A(n,θ) B(n,θ); equals Tr[ÂB̂].
pub fn trace_pairing(kern: &WignerKernel, a: &FockOperator, b: &FockOperator, opts: SumOptions) -> Result<C64> {
    pairing(kern, a, b, opts)
}

/// Σ_n ∫du(θ) W(n,θ) A(n,θ); equals Tr[ρÂ].
pub fn expectation(kern: &WignerKernel, rho: &FockOperator, a: &FockOperator, opts: SumOptions) -> Result<C64> {
    require_density(kern, rho)?;
    pairing(kern, rho, a, opts)
}

/// 2π Σ_n ∫du(θ) W W′; equals |⟨ψ|ψ′⟩|².
pub fn wigner_overlap(kern: &WignerKernel, psi: &FockState, phi: &FockState, opts: SumOptions) -> Result<f64> {
    let (a, b) = (psi.density(), phi.density());
    require_density(kern, &a)?;
    require_density(kern, &b)?;
    Ok(pairing(kern, &a, &b, opts)?.re)
}

/// Â = Σ_n ∫du(θ) Ŵ(n,θ) A(n,θ), from values on a uniform θ grid.
pub fn invert_representation(kern: &WignerKernel, rep: &OperatorRep, window: BasisWindow) -> Result<FockOperator> {
    let m = window.dim() - 1;
    let required = 2 * window.dim();
    if !rep.theta.is_uniform() || rep.theta.len() < required {
        return Err(Error::Aliasing { nodes: rep.theta.len(), harmonic: m, required });
    }
    kern.covers(window, rep.nrange.lo, rep.nrange.hi)?;
    let nodes = rep.theta.nodes();
    let count = nodes.len() as f64;
    let mi = m as i64;
    let coeffs: Vec<Vec<C64>> = (0..rep.nrange.len())
        .into_par_iter()
        .map(|row| {
            (-mi..=mi)
                .map(|h| {
                    let mut acc = ZERO;
                    for (j, &t) in nodes.iter().enumerate() {
                        acc += rep.values[[row, j]] * C64::from_polar(1.0, -(h as f64) * t);
                    }
                    acc / count
                })
                .collect()
        })
        .collect();
    let mut out = FockOperator::zeros(window);
    for (row, n) in rep.nrange.iter().enumerate() {
        for (i, k) in window.iter().enumerate() {
            for (j, l) in window.iter().enumerate() {
                if kern.physical() && (k < 0 || l < 0) {
                    continue;
                }
                let b = kern.base_at(k - n, l - n);
                if b.re == 0.0 && b.im == 0.0 {
                    continue;
                }
                out.mat[[i, j]] += b * coeffs[row][(l - k + mi) as usize] * TAU;
            }
        }
    }
    Ok(out)
}

/// max_n |∫du(θ) W(n,θ) − ⟨n|ρ|n⟩| over the range.
pub fn theta_marginal_residual(kern: &WignerKernel, rho: &FockOperator, nrange: NRange) -> Result<f64> {
    let table = harmonic_table(kern, rho, nrange, 1.0)?;
    Ok(nrange.iter().zip(&table).map(|(n, s)| (s.integral() - rho.get(n, n)).norm()).fold(0.0, f64::max))
}

/// max_θ |Σ_n W(n,θ) − ⟨θ|ρ|θ⟩| with the n-sum truncated to the range.
pub fn number_marginal_residual(kern: &WignerKernel, rho: &FockOperator, nrange: NRange, theta: &ThetaGrid) -> Result<f64> {
    let table = harmonic_table(kern, rho, nrange, 1.0)?;
    let mut total = PeriodicSignal::zeros(table[0].cutoff());
    for s in &table {
        total = total.add(s);
    }
    let w = rho.window;
    let d = w.dim() as i64;
    let mut target = PeriodicSignal::zeros((d - 1) as usize);
    for h in -(d - 1)..=(d - 1) {
        let mut acc = ZERO;
        for l in w.iter() {
            acc += rho.get(l, l + h);
        }
        target.set(h, acc / TAU);
    }
    let diff = total.sub(&target);
    Ok(diff.eval_many(theta.nodes()).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Closed-form remainders of the n-sums for piecewise spectra.
pub mod tail {
    use super::*;

    /// ψ′(x) for x > 0.
    pub fn trigamma(mut x: f64) -> f64 {
        let mut acc = 0.0;
        while x < 12.0 {
            acc += 1.0 / (x * x);
            x += 1.0;
        }
        let r = 1.0 / x;
        let r2 = r * r;
        acc + r + 0.5 * r2 + r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * 5.0 / 66.0))))
    }

    /// Σ_{j≥0} 1/((j+u)(j+v)) for u, v > 0.
    pub fn pair_sum(u: f64, v: f64, psi_u: f64, psi_v: f64) -> f64 {
        if (u - v).abs() < 1e-12 {
            trigamma(u)
        } else {
            (psi_u - psi_v) / (u - v)
        }
    }

    /// i^j.
    fn ipow(j: i64) -> C64 {
        eighth_root(2 * j)
    }

    /// Far from the range, Σ_{k−ℓ=m} ⟨k−n|Ŵ(0,0)|ℓ−n⟩ X[ℓ][k] = Σ_g τ_g i^{n q_g}/(n − c2_g/2).
    /// Returns (c2, q mod 4, τ) with zero groups dropped.
    pub fn groups(kern: &WignerKernel, x: &FockOperator, m: i64) -> Option<Vec<(i64, i64, C64)>> {
        let spec = kern.spectrum()?;
        let pieces = spec.pieces(m)?;
        let mut map: BTreeMap<(i64, i64), C64> = BTreeMap::new();
        let norm = 1.0 / (TAU * TAU);
        for l in x.window.iter() {
            let k = l + m;
            if !x.window.contains(k) || (kern.physical() && (k < 0 || l < 0)) {
                continue;
            }
            let xv = x.get(l, k);
            if xv == ZERO {
                continue;
            }
            for p in &pieces {
                let c2 = m + p.shift2 + 2 * l;
                for (q, sign) in [(p.hi_q, 1.0), (p.lo_q, -1.0)] {
                    let tau = C64::new(0.0, -sign * norm) * p.coeff * eighth_root(-c2 * q) * xv;
                    *map.entry((c2, q.rem_euclid(4))).or_insert(ZERO) += tau;
                }
            }
        }
        Some(map.into_iter().filter(|(_, t)| t.norm() > 0.0).map(|((c2, q), t)| (c2, q, t)).collect())
    }

    fn side(gx: &[(i64, i64, C64)], gy: &[(i64, i64, C64)], start: i64, upper: bool) -> C64 {
        let mut acc = ZERO;
        for r in 0..4 {
            let s = start + (r - start).rem_euclid(4);
            let prep = |g: &[(i64, i64, C64)]| -> Vec<(f64, f64, C64)> {
                g.iter()
                    .map(|&(c2, q, t)| {
                        let alpha = c2 as f64 / 2.0;
                        let u = if upper { (s as f64 - alpha) / 4.0 } else { (s as f64 + alpha) / 4.0 };
                        let ph = if upper { ipow(r * q) } else { ipow(-r * q) };
                        (u, digamma(u), t * ph)
                    })
                    .collect()
            };
            let px = prep(gx);
            let py = prep(gy);
            for &(u, pu, tu) in &px {
                for &(v, pv, tv) in &py {
                    acc += tu * tv * (pair_sum(u, v, pu, pv) / 16.0);
                }
            }
        }
        acc
    }

    /// Remainder of (2π)² Σ_n Σ_m x_m(n) y_{−m}(n) for n outside `nrange`.
    pub fn pairing_tail(kern: &WignerKernel, x: &FockOperator, y: &FockOperator, nrange: NRange) -> Option<C64> {
        let spec = kern.spectrum()?;
        spec.pieces(0)?;
        let d = x.window.dim() as i64;
        let parts: Vec<C64> = (-(d - 1)..=(d - 1))
            .into_par_iter()
            .map(|m| {
                let gx = groups(kern, x, m).unwrap_or_default();
                let gy = groups(kern, y, -m).unwrap_or_default();
                if gx.is_empty() || gy.is_empty() {
                    return ZERO;
                }
                side(&gx, &gy, nrange.hi + 1, true) + side(&gx, &gy, 1 - nrange.lo, false)
            })
            .collect();
        let total: C64 = parts.into_iter().sum();
        Some(total * (TAU * TAU))
    }
}
