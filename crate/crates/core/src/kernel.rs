//! Number-phase Wigner kernels: g-spectra, the Fourier route to the base
//! matrix ⟨K|Ŵ(0,0)|L⟩, closed forms of Ŝ₁ and Ŝ₂, and the two-term W₃.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fock::BasisWindow;
use crate::periodics::f2;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Nodes per period for the quadrature route.
pub const FOURIER_NODES: usize = 4096;
pub const DEFAULT_CUTOFF: usize = FOURIER_NODES / 2 - 1;

/// e^{iπj/4}, exact for every integer j.
pub fn eighth_root(j: i64) -> C64 {
    let s = FRAC_1_SQRT_2;
    match j.rem_euclid(8) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(s, s),
        2 => C64::new(0.0, 1.0),
        3 => C64::new(-s, s),
        4 => C64::new(-1.0, 0.0),
        5 => C64::new(-s, -s),
        6 => C64::new(0.0, -1.0),
        _ => C64::new(s, -s),
    }
}

/// g_k(ω) = coeff · e^{−i·shift2·ω/2} for ω in (lo_q·π/2, hi_q·π/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GPiece {
    pub lo_q: i64,
    pub hi_q: i64,
    pub coeff: C64,
    pub shift2: i64,
}

/// ∫_{lo}^{hi} e^{−i(a2/2)ω} dω with the endpoints at quarter turns.
pub fn piece_integral(a2: i64, lo_q: i64, hi_q: i64) -> C64 {
    if a2 == 0 {
        return C64::new((hi_q - lo_q) as f64 * PI / 2.0, 0.0);
    }
    (eighth_root(-a2 * hi_q) - eighth_root(-a2 * lo_q)) * C64::new(0.0, 2.0 / a2 as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpectrumCase {
    A,
    B,
    C,
    Custom,
}

type GFn = Arc<dyn Fn(i64, f64) -> C64 + Send + Sync>;

/// The family g_k(ω) defining a kernel.
#[derive(Clone)]
pub struct GSpectrum {
    case: SpectrumCase,
    cutoff: usize,
    custom: Option<GFn>,
}

impl fmt::Debug for GSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GSpectrum").field("case", &self.case).field("cutoff", &self.cutoff).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FourierRoute {
    Analytic,
    Quadrature,
}

/// e^{−iω/2}.
pub fn f1(omega: f64) -> C64 {
    C64::from_polar(1.0, -0.5 * omega)
}

impl GSpectrum {
    pub fn new(case: SpectrumCase) -> Result<Self> {
        if case == SpectrumCase::Custom {
            return Err(Error::InvalidSpectrum("custom spectra need a function; use GSpectrum::custom".into()));
        }
        Ok(GSpectrum { case, cutoff: DEFAULT_CUTOFF, custom: None })
    }

    /// A user spectrum. Rejected unless g₀ ≡ 1 and g_k(0) = 1 (checked on a
    /// grid for |k| ≤ 16).
    pub fn custom<F>(g: F) -> Result<Self>
    where
        F: Fn(i64, f64) -> C64 + Send + Sync + 'static,
    {
        for j in 0..64 {
            let w = -PI + TAU * (j as f64 + 0.5) / 64.0;
            if (g(0, w) - C64::new(1.0, 0.0)).norm() > 1e-10 {
                return Err(Error::InvalidSpectrum(format!("g_0({w}) != 1")));
            }
        }
        for k in -16..=16 {
            if (g(k, 0.0) - C64::new(1.0, 0.0)).norm() > 1e-10 {
                return Err(Error::InvalidSpectrum(format!("g_{k}(0) != 1")));
            }
        }
        Ok(GSpectrum { case: SpectrumCase::Custom, cutoff: DEFAULT_CUTOFF, custom: Some(Arc::new(g)) })
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn case(&self) -> SpectrumCase {
        self.case
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn g_eval(&self, k: i64, omega: f64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self.case {
            SpectrumCase::A => {
                if k.rem_euclid(2) == 0 {
                    one
                } else {
                    f1(omega)
                }
            }
            SpectrumCase::B => {
                if k.rem_euclid(2) == 0 {
                    one
                } else {
                    C64::new(f2(omega), 0.0)
                }
            }
            SpectrumCase::C => match k.rem_euclid(4) {
                0 => one,
                2 => C64::new(f2(2.0 * omega), 0.0),
                _ => C64::new(f2(omega), 0.0),
            },
            SpectrumCase::Custom => (self.custom.as_ref().unwrap())(k, omega),
        }
    }

    /// C_k(ω) = e^{−ikω/2} g_k(ω) / 2π.
    pub fn c_coefficient(&self, k: i64, omega: f64) -> C64 {
        C64::from_polar(1.0 / TAU, -0.5 * k as f64 * omega) * self.g_eval(k, omega)
    }

    /// Piecewise exponential form of g_k over [−π, π), when known.
    pub fn pieces(&self, k: i64) -> Option<Vec<GPiece>> {
        let full = |shift2| vec![GPiece { lo_q: -2, hi_q: 2, coeff: C64::new(1.0, 0.0), shift2 }];
        match self.case {
            SpectrumCase::A => Some(full(k.rem_euclid(2))),
            SpectrumCase::B => Some(full(0)),
            SpectrumCase::C => {
                if k.rem_euclid(4) == 2 {
                    let p = |lo_q, hi_q, c: f64| GPiece { lo_q, hi_q, coeff: C64::new(c, 0.0), shift2: 0 };
                    Some(vec![p(-2, -1, -1.0), p(-1, 1, 1.0), p(1, 2, -1.0)])
                } else {
                    Some(full(0))
                }
            }
            SpectrumCase::Custom => None,
        }
    }

    /// ℓ-th Fourier coefficient of C_k from the piecewise form.
    pub fn analytic_coefficient(&self, k: i64, l: i64) -> Option<C64> {
        let pieces = self.pieces(k)?;
        let mut acc = ZERO;
        for p in &pieces {
            acc += p.coeff * piece_integral(k + p.shift2 + 2 * l, p.lo_q, p.hi_q);
        }
        Some(acc / (TAU * TAU))
    }

    /// Coefficients ℓ = lo..=hi of C_k by a 4096-node FFT over [−π, π).
    pub fn quadrature_coefficients(&self, k: i64, lo: i64, hi: i64) -> Result<Vec<C64>> {
        let need = lo.unsigned_abs().max(hi.unsigned_abs()) as usize;
        if need > DEFAULT_CUTOFF {
            return Err(Error::CutoffTooSmall { required: need, available: DEFAULT_CUTOFF });
        }
        let n = FOURIER_NODES;
        let mut buf: Vec<C64> = (0..n).map(|j| self.c_coefficient(k, -PI + TAU * j as f64 / n as f64)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        Ok((lo..=hi)
            .map(|l| {
                let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                buf[l.rem_euclid(n as i64) as usize] * (sign / n as f64)
            })
            .collect())
    }

    pub fn fourier_coefficient(&self, k: i64, l: i64, route: FourierRoute) -> Result<C64> {
        match route {
            FourierRoute::Analytic => {
                self.analytic_coefficient(k, l).ok_or_else(|| Error::InvalidSpectrum("no analytic form for a custom spectrum".into()))
            }
            FourierRoute::Quadrature => Ok(self.quadrature_coefficients(k, l, l)?[0]),
        }
    }

    pub fn preferred_route(&self) -> FourierRoute {
        if self.case == SpectrumCase::Custom {
            FourierRoute::Quadrature
        } else {
            FourierRoute::Analytic
        }
    }
}

/// B[K][L] over `window`, with B[k+ℓ][ℓ] the ℓ-th coefficient of C_k.
pub fn base_matrix(spec: &GSpectrum, window: BasisWindow, route: FourierRoute) -> Result<Array2<C64>> {
    let need = window.n_min.unsigned_abs().max(window.n_max.unsigned_abs()) as usize;
    if need > spec.cutoff {
        return Err(Error::CutoffTooSmall { required: need, available: spec.cutoff });
    }
    let d = window.dim();
    let span = d as i64 - 1;
    let (lo, hi) = (window.n_min, window.n_max);
    let rows: Vec<(i64, Vec<C64>)> = (-span..=span)
        .into_par_iter()
        .map(|k| {
            let l_lo = lo.max(lo - k);
            let l_hi = hi.min(hi - k);
            let vals = match route {
                FourierRoute::Analytic => {
                    (l_lo..=l_hi).map(|l| spec.fourier_coefficient(k, l, FourierRoute::Analytic)).collect::<Result<Vec<_>>>()?
                }
                FourierRoute::Quadrature => spec.quadrature_coefficients(k, l_lo, l_hi)?,
            };
            Ok((k, vals))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut b = Array2::zeros((d, d));
    for (k, vals) in rows {
        let l_lo = lo.max(lo - k);
        for (j, v) in vals.into_iter().enumerate() {
            let l = l_lo + j as i64;
            b[[(k + l - lo) as usize, (l - lo) as usize]] = v;
        }
    }
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    W1,
    W2,
    W3,
    S1,
    S2,
    Custom,
}

impl Variant {
    pub const BUILTIN: [Variant; 5] = [Variant::W1, Variant::W2, Variant::W3, Variant::S1, Variant::S2];

    pub fn case(&self) -> SpectrumCase {
        match self {
            Variant::W1 | Variant::S1 => SpectrumCase::A,
            Variant::W2 | Variant::S2 => SpectrumCase::B,
            Variant::W3 => SpectrumCase::C,
            Variant::Custom => SpectrumCase::Custom,
        }
    }

    pub fn is_physical(&self) -> bool {
        matches!(self, Variant::S1 | Variant::S2)
    }

    /// The extended-space kernel an S-variant restricts.
    pub fn parent(&self) -> Variant {
        match self {
            Variant::S1 => Variant::W1,
            Variant::S2 => Variant::W2,
            v => *v,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::W1 => "w1",
            Variant::W2 => "w2",
            Variant::W3 => "w3",
            Variant::S1 => "s1",
            Variant::S2 => "s2",
            Variant::Custom => "custom",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "w1" => Ok(Variant::W1),
            "w2" => Ok(Variant::W2),
            "w3" => Ok(Variant::W3),
            "s1" => Ok(Variant::S1),
            "s2" => Ok(Variant::S2),
            "custom" => Ok(Variant::Custom),
            _ => Err(Error::Parse(format!("unknown variant '{s}' (w1|w2|w3|s1|s2|custom)"))),
        }
    }
}

/// Anything that yields ⟨k|Ŵ(n,θ)|ℓ⟩.
pub trait KernelModel: Sync {
    fn element(&self, k: i64, l: i64, n: i64, theta: f64) -> Result<C64>;
    fn variant(&self) -> Variant;
    fn is_physical(&self) -> bool {
        self.variant().is_physical()
    }
}

/// A kernel stored as its base matrix at (0,0); (n,θ) enter through the
/// covariance laws on access.
#[derive(Clone, Debug)]
pub struct WignerKernel {
    variant: Variant,
    window: BasisWindow,
    base: Array2<C64>,
    physical: bool,
    spectrum: Option<GSpectrum>,
}

impl WignerKernel {
    pub fn build(variant: Variant, window: BasisWindow) -> Result<Self> {
        if variant == Variant::Custom {
            return Err(Error::InvalidArgument("custom kernels are built with from_spectrum".into()));
        }
        let spec = GSpectrum::new(variant.case())?;
        let mut k = Self::from_spectrum(&spec, window, variant.is_physical())?;
        k.variant = variant;
        Ok(k)
    }

    pub fn from_spectrum(spec: &GSpectrum, window: BasisWindow, physical: bool) -> Result<Self> {
        Self::from_spectrum_route(spec, window, physical, spec.preferred_route())
    }

    pub fn from_spectrum_route(spec: &GSpectrum, window: BasisWindow, physical: bool, route: FourierRoute) -> Result<Self> {
        let base = base_matrix(spec, window, route)?;
        let variant = match (spec.case(), physical) {
            (SpectrumCase::A, false) => Variant::W1,
            (SpectrumCase::A, true) => Variant::S1,
            (SpectrumCase::B, false) => Variant::W2,
            (SpectrumCase::B, true) => Variant::S2,
            (SpectrumCase::C, false) => Variant::W3,
            _ => Variant::Custom,
        };
        Ok(WignerKernel { variant, window, base, physical, spectrum: Some(spec.clone()) })
    }

    pub fn from_base(variant: Variant, window: BasisWindow, base: Array2<C64>, physical: bool) -> Result<Self> {
        let d = window.dim();
        if base.dim() != (d, d) {
            return Err(Error::InvalidArgument(format!("base shape {:?} does not match window {window}", base.dim())));
        }
        let base = base.as_standard_layout().into_owned();
        Ok(WignerKernel { variant, window, base, physical, spectrum: None })
    }

    /// Smallest base window serving states on `states` for n in [n_lo, n_hi].
    pub fn base_window_for(states: BasisWindow, n_lo: i64, n_hi: i64) -> BasisWindow {
        BasisWindow { n_min: (states.n_min - n_hi).min(0), n_max: (states.n_max - n_lo).max(0) }
    }

    pub fn for_states(variant: Variant, states: BasisWindow, n_lo: i64, n_hi: i64) -> Result<Self> {
        Self::build(variant, Self::base_window_for(states, n_lo, n_hi))
    }

    /// P Ŵ P.
    pub fn physical_restriction(&self) -> Self {
        let mut k = self.clone();
        k.physical = true;
        k.variant = match self.variant {
            Variant::W1 => Variant::S1,
            Variant::W2 => Variant::S2,
            v => v,
        };
        k
    }

    pub fn window(&self) -> BasisWindow {
        self.window
    }

    pub fn base(&self) -> &Array2<C64> {
        &self.base
    }

    pub fn spectrum(&self) -> Option<&GSpectrum> {
        self.spectrum.as_ref()
    }

    pub fn physical(&self) -> bool {
        self.physical
    }

    pub fn base_get(&self, kk: i64, ll: i64) -> Result<C64> {
        let w = self.window;
        if !w.contains(kk) || !w.contains(ll) {
            return Err(Error::WindowExceeded { need_lo: kk.min(ll), need_hi: kk.max(ll), have_lo: w.n_min, have_hi: w.n_max });
        }
        Ok(self.base[[(kk - w.n_min) as usize, (ll - w.n_min) as usize]])
    }

    /// Fast unchecked access; caller guarantees both indices are in the window.
    #[inline]
    pub fn base_at(&self, kk: i64, ll: i64) -> C64 {
        let n0 = self.window.n_min;
        self.base[[(kk - n0) as usize, (ll - n0) as usize]]
    }

    /// Check that states on `states` can be paired for every n in [n_lo, n_hi].
    pub fn covers(&self, states: BasisWindow, n_lo: i64, n_hi: i64) -> Result<()> {
        let lo = if self.physical { states.n_min.max(0) } else { states.n_min };
        let need_lo = lo - n_hi;
        let need_hi = states.n_max - n_lo;
        if need_lo < self.window.n_min || need_hi > self.window.n_max {
            return Err(Error::WindowExceeded { need_lo, need_hi, have_lo: self.window.n_min, have_hi: self.window.n_max });
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &WignerKernel) -> Result<f64> {
        if self.window != other.window {
            let (a, b) = (self.window, other.window);
            return Err(Error::WindowMismatch { a_min: a.n_min, a_max: a.n_max, b_min: b.n_min, b_max: b.n_max });
        }
        Ok(self.base.iter().zip(other.base.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Distinct values of K + L carrying an entry above `tol`.
    pub fn support_antidiagonals(&self, tol: f64) -> Vec<i64> {
        let n0 = self.window.n_min;
        let mut set = BTreeSet::new();
        for ((i, j), z) in self.base.indexed_iter() {
            let (kk, ll) = (n0 + i as i64, n0 + j as i64);
            if z.norm() > tol {
                set.insert(kk + ll);
            }
        }
        set.into_iter().collect()
    }
}

impl KernelModel for WignerKernel {
    fn element(&self, k: i64, l: i64, n: i64, theta: f64) -> Result<C64> {
        if self.physical && (k < 0 || l < 0) {
            return Ok(ZERO);
        }
        let b = self.base_get(k - n, l - n)?;
        Ok(C64::from_polar(1.0, (k - l) as f64 * theta) * b)
    }

    fn variant(&self) -> Variant {
        self.variant
    }

    fn is_physical(&self) -> bool {
        self.physical
    }
}

fn physical_args(k: i64, l: i64, n: i64) -> Result<()> {
    for x in [k, l, n] {
        if x < 0 {
            return Err(Error::Domain(x));
        }
    }
    Ok(())
}

/// ⟨k|Ŝ₁(n,θ)|ℓ⟩ = e^{i(k−ℓ)θ}(δ_{k+ℓ,2n} + δ_{k+ℓ,2n−1})/2π.
pub fn closed_form_s1(k: i64, l: i64, n: i64, theta: f64) -> Result<C64> {
    physical_args(k, l, n)?;
    let s = k + l;
    if s == 2 * n || s == 2 * n - 1 {
        Ok(C64::from_polar(1.0 / TAU, (k - l) as f64 * theta))
    } else {
        Ok(ZERO)
    }
}

/// sin(sπ/2) for integer s.
fn sin_half_pi(s: i64) -> f64 {
    match s.rem_euclid(4) {
        1 => 1.0,
        3 => -1.0,
        _ => 0.0,
    }
}

/// ⟨k|Ŝ₂(n,θ)|ℓ⟩ with s = 2n−k−ℓ: e^{i(k−ℓ)θ}/2π at s = 0, else
/// e^{i(k−ℓ)θ} sin(sπ/2)/(π²s).
pub fn closed_form_s2(k: i64, l: i64, n: i64, theta: f64) -> Result<C64> {
    physical_args(k, l, n)?;
    let s = 2 * n - k - l;
    let phase = C64::from_polar(1.0, (k - l) as f64 * theta);
    if s == 0 {
        Ok(phase / TAU)
    } else {
        Ok(phase * (sin_half_pi(s) / (PI * PI * s as f64)))
    }
}

/// The closed-form route for Ŝ₁ and Ŝ₂.
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormKernel {
    variant: Variant,
}

impl ClosedFormKernel {
    pub fn new(variant: Variant) -> Result<Self> {
        match variant {
            Variant::S1 | Variant::S2 => Ok(ClosedFormKernel { variant }),
            v => Err(Error::InvalidArgument(format!("no closed form for variant {v}"))),
        }
    }
}

impl KernelModel for ClosedFormKernel {
    fn element(&self, k: i64, l: i64, n: i64, theta: f64) -> Result<C64> {
        match self.variant {
            Variant::S1 => closed_form_s1(k, l, n, theta),
            _ => closed_form_s2(k, l, n, theta),
        }
    }

    fn variant(&self) -> Variant {
        self.variant
    }
}

/// ½[½ + ½f₂(4ξ) + f₂(2ξ)].
pub fn h3(xi: f64) -> f64 {
    0.5 * (0.5 + 0.5 * f2(4.0 * xi) + f2(2.0 * xi))
}

/// ¼[1 − f₂(4ξ)].
pub fn h3_tilde(xi: f64) -> f64 {
    0.25 * (1.0 - f2(4.0 * xi))
}

/// ∫_{−π}^{π} e^{isξ} h(ξ) dξ for h constant on each (jπ/4, (j+1)π/4).
pub fn eighth_segment_moment<H: Fn(f64) -> f64>(h: H, s: i64) -> C64 {
    let mut acc = ZERO;
    for j in -4..4 {
        let v = h((j as f64 + 0.5) * PI / 4.0);
        if v == 0.0 {
            continue;
        }
        let seg = if s == 0 { C64::new(PI / 4.0, 0.0) } else { (eighth_root(s * (j + 1)) - eighth_root(s * j)) / C64::new(0.0, s as f64) };
        acc += seg * v;
    }
    acc
}

/// Case-C element from the two-term h₃/h̃₃ form.
pub fn two_term_w3(k: i64, l: i64, n: i64, theta: f64) -> C64 {
    let s = 2 * n - k - l;
    let d = (k - l) as f64;
    let a = C64::from_polar(1.0, d * theta) * eighth_segment_moment(h3, s);
    let b = C64::from_polar(1.0, d * (theta - PI / 2.0)) * eighth_segment_moment(h3_tilde, s);
    (a + b) / (2.0 * PI * PI)
}

/// Case-C kernel, validated against the two-term form on a sample grid.
pub fn w3_kernel(window: BasisWindow) -> Result<WignerKernel> {
    let kern = WignerKernel::build(Variant::W3, window)?;
    let r = w3_two_term_residual(&kern);
    if r > 1e-8 {
        return Err(Error::InvalidSpectrum(format!("two-term W3 disagrees with the g-route by {r:e}")));
    }
    Ok(kern)
}

/// Max deviation between `kern` and the two-term form over a fixed grid.
pub fn w3_two_term_residual(kern: &WignerKernel) -> f64 {
    let w = kern.window();
    let half = (w.n_max.min(-w.n_min) / 2).max(0);
    let pick = |j: i64, m: i64| -half + (j * 7919 + m * 104729).rem_euclid(2 * half + 1);
    let mut r: f64 = 0.0;
    for j in 0..100 {
        let (k, l, n) = (pick(j, 1), pick(j, 2), pick(j, 3));
        let theta = TAU * ((j * 37) % 100) as f64 / 100.0;
        if let Ok(e) = kern.element(k, l, n, theta) {
            r = r.max((e - two_term_w3(k, l, n, theta)).norm());
        }
    }
    r
}

/// Sample tuples written next to an exported base for later replay.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSample {
    pub k: i64,
    pub l: i64,
    pub n: i64,
    pub theta: f64,
    pub value: C64,
}

/// A kernel read back from its text export.
#[derive(Clone, Debug)]
pub struct ImportedKernel {
    pub kernel: WignerKernel,
    pub samples: Vec<KernelSample>,
}

impl KernelModel for ImportedKernel {
    fn element(&self, k: i64, l: i64, n: i64, theta: f64) -> Result<C64> {
        self.kernel.element(k, l, n, theta)
    }

    fn variant(&self) -> Variant {
        self.kernel.variant
    }

    fn is_physical(&self) -> bool {
        self.kernel.physical
    }
}

fn sample_tuples(window: BasisWindow, count: usize) -> Vec<(i64, i64, i64, f64)> {
    let w = window;
    let half = (w.n_max.min(-w.n_min) / 2).max(0);
    let lo = if half == 0 { 0 } else { -half };
    let span = 2 * half + 1;
    (0..count as i64)
        .map(|j| {
            let k = lo + (j * 31 + 3).rem_euclid(span);
            let l = lo + (j * 17 + 5).rem_euclid(span);
            let n = lo + (j * 13 + 1).rem_euclid(span);
            (k, l, n, TAU * ((j * 29) % 64) as f64 / 64.0)
        })
        .collect()
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Text export: header, base rows (K, L, re, im), then replay samples.
pub fn export_kernel(kern: &WignerKernel, samples: usize) -> String {
    let w = kern.window;
    let mut out = String::new();
    out.push_str("# npwigner kernel\n");
    out.push_str(&format!("variant {}\n", kern.variant));
    out.push_str(&format!("physical {}\n", kern.physical));
    out.push_str(&format!("window {} {}\n", w.n_min, w.n_max));
    out.push_str("[base] k l re im\n");
    for ((i, j), z) in kern.base.indexed_iter() {
        out.push_str(&format!("{} {} {} {}\n", w.n_min + i as i64, w.n_min + j as i64, fmt17(z.re), fmt17(z.im)));
    }
    out.push_str("[samples] k l n theta re im\n");
    for (k, l, n, t) in sample_tuples(w, samples) {
        if let Ok(z) = kern.element(k, l, n, t) {
            out.push_str(&format!("{k} {l} {n} {} {} {}\n", fmt17(t), fmt17(z.re), fmt17(z.im)));
        }
    }
    out
}

pub fn import_kernel(text: &str) -> Result<ImportedKernel> {
    let bad = |line: usize, why: &str| Error::Parse(format!("kernel file line {}: {why}", line + 1));
    let mut variant = None;
    let mut physical = None;
    let mut window = None;
    let mut base: Option<Array2<C64>> = None;
    let mut samples = Vec::new();
    let mut section = "";
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with("[base]") {
            let w: BasisWindow = window.ok_or_else(|| bad(ln, "window must precede [base]"))?;
            base = Some(Array2::from_elem((w.dim(), w.dim()), C64::new(f64::NAN, f64::NAN)));
            section = "base";
            continue;
        }
        if line.starts_with("[samples]") {
            section = "samples";
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match section {
            "" => match f.as_slice() {
                ["variant", v] => variant = Some(v.parse::<Variant>()?),
                ["physical", p] => physical = Some(p.parse::<bool>().map_err(|_| bad(ln, "physical flag"))?),
                ["window", a, b] => {
                    let a = a.parse().map_err(|_| bad(ln, "window"))?;
                    let b = b.parse().map_err(|_| bad(ln, "window"))?;
                    window = Some(BasisWindow::new(a, b)?);
                }
                _ => return Err(bad(ln, "unknown header line")),
            },
            "base" => {
                let [k, l, re, im] = f.as_slice() else { return Err(bad(ln, "expected 4 fields")) };
                let w = window.unwrap();
                let k: i64 = k.parse().map_err(|_| bad(ln, "k"))?;
                let l: i64 = l.parse().map_err(|_| bad(ln, "l"))?;
                let z = C64::new(re.parse().map_err(|_| bad(ln, "re"))?, im.parse().map_err(|_| bad(ln, "im"))?);
                let (i, j) = (w.index(k)?, w.index(l)?);
                base.as_mut().unwrap()[[i, j]] = z;
            }
            _ => {
                let [k, l, n, t, re, im] = f.as_slice() else { return Err(bad(ln, "expected 6 fields")) };
                samples.push(KernelSample {
                    k: k.parse().map_err(|_| bad(ln, "k"))?,
                    l: l.parse().map_err(|_| bad(ln, "l"))?,
                    n: n.parse().map_err(|_| bad(ln, "n"))?,
                    theta: t.parse().map_err(|_| bad(ln, "theta"))?,
                    value: C64::new(re.parse().map_err(|_| bad(ln, "re"))?, im.parse().map_err(|_| bad(ln, "im"))?),
                });
            }
        }
    }
    let window = window.ok_or_else(|| Error::Parse("kernel file has no window".into()))?;
    let base = base.ok_or_else(|| Error::Parse("kernel file has no [base] section".into()))?;
    if base.iter().any(|z| z.re.is_nan()) {
        return Err(Error::Parse("kernel file base section is incomplete".into()));
    }
    let kernel = WignerKernel::from_base(variant.unwrap_or(Variant::Custom), window, base, physical.unwrap_or(false))?;
    Ok(ImportedKernel { kernel, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_values() {
        let a = GSpectrum::new(SpectrumCase::A).unwrap();
        assert!((a.g_eval(3, PI) - C64::new(0.0, -1.0)).norm() < 1e-15);
        let b = GSpectrum::new(SpectrumCase::B).unwrap();
        assert_eq!(b.g_eval(1, 0.0), C64::new(1.0, 0.0));
        assert_eq!(b.g_eval(1, TAU), C64::new(-1.0, 0.0));
        let c = GSpectrum::new(SpectrumCase::C).unwrap();
        assert_eq!(c.g_eval(2, PI / 2.0), ZERO);
        assert!(GSpectrum::new(SpectrumCase::Custom).is_err());
    }

    #[test]
    fn case_a_base_is_two_diagonals() {
        let w = BasisWindow::extended(6);
        let k = WignerKernel::build(Variant::W1, w).unwrap();
        for kk in w.iter() {
            for ll in w.iter() {
                let v = k.base_get(kk, ll).unwrap();
                let want = if kk + ll == 0 || kk + ll == -1 { 1.0 / TAU } else { 0.0 };
                assert_eq!(v, C64::new(want, 0.0), "({kk},{ll})");
            }
        }
    }

    #[test]
    fn closed_forms() {
        assert!((closed_form_s1(0, 0, 0, 1.3).unwrap() - C64::new(1.0 / TAU, 0.0)).norm() < 1e-15);
        assert_eq!(closed_form_s1(0, 1, 0, 0.0).unwrap(), ZERO);
        assert!(closed_form_s1(-1, 0, 0, 0.0).is_err());
        assert_eq!(closed_form_s2(1, 1, 2, 0.0).unwrap(), ZERO);
        assert!((closed_form_s2(0, 1, 1, 0.0).unwrap().re - 1.0 / (PI * PI)).abs() < 1e-16);
        assert!(matches!(closed_form_s2(0, 0, -1, 0.0), Err(Error::Domain(-1))));
    }

    #[test]
    fn two_term_pieces() {
        assert_eq!(h3(0.0), 1.0);
        assert_eq!(h3_tilde(0.0), 0.0);
        assert!((two_term_w3(3, 3, 3, 0.4) - C64::new(1.0 / TAU, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn routes_agree() {
        let w = BasisWindow::extended(16);
        let kern = w3_kernel(w).unwrap();
        assert!(w3_two_term_residual(&kern) < 1e-12);
        let s2 = WignerKernel::build(Variant::S2, BasisWindow::extended(24)).unwrap();
        let mut r: f64 = 0.0;
        for k in 0..8 {
            for l in 0..8 {
                for n in 0..8 {
                    let a = s2.element(k, l, n, 0.7).unwrap();
                    r = r.max((a - closed_form_s2(k, l, n, 0.7).unwrap()).norm());
                }
            }
        }
        assert!(r < 1e-15, "{r}");
        for case in [SpectrumCase::A, SpectrumCase::B, SpectrumCase::C] {
            let spec = GSpectrum::new(case).unwrap();
            let a = base_matrix(&spec, w, FourierRoute::Analytic).unwrap();
            let q = base_matrix(&spec, w, FourierRoute::Quadrature).unwrap();
            let d = a.iter().zip(q.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(d < 1e-6, "{case:?}: {d}");
        }
    }

    #[test]
    fn window_exceeded_is_an_error() {
        let k = WignerKernel::build(Variant::W2, BasisWindow::extended(4)).unwrap();
        assert!(matches!(k.element(4, 0, -1, 0.0), Err(Error::WindowExceeded { .. })));
        let s = k.physical_restriction();
        assert_eq!(s.element(-1, 0, 0, 0.0).unwrap(), ZERO);
    }

    #[test]
    fn cutoff_error_names_requirement() {
        let spec = GSpectrum::new(SpectrumCase::B).unwrap().with_cutoff(4);
        match WignerKernel::from_spectrum(&spec, BasisWindow::extended(6), false) {
            Err(Error::CutoffTooSmall { required, available }) => assert_eq!((required, available), (6, 4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn export_roundtrip() {
        let k = WignerKernel::build(Variant::W3, BasisWindow::extended(3)).unwrap();
        let text = export_kernel(&k, 8);
        let back = import_kernel(&text).unwrap();
        assert_eq!(back.kernel.base(), k.base());
        assert_eq!(back.kernel.variant(), Variant::W3);
        assert_eq!(back.samples.len(), 8);
        assert!(import_kernel("window 0 1\n[base] k l re im\n0 0 1 0\n").is_err());
    }
}
