//! 2π-periodic function calculus: the Lighthill unit function, band-limited
//! signals and delta combs, square and sawtooth waves, and the ∫du(θ) rule.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const INNER_PANELS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitKind {
    Lighthill,
}

fn gl_pairs(order: usize) -> Vec<(f64, f64)> {
    let order = NonZeroUsize::new(order.max(1)).unwrap();
    GaussLegendre::new(order).as_node_weight_pairs().to_vec()
}

fn composite<F: Fn(f64) -> f64>(rule: &[(f64, f64)], a: f64, b: f64, panels: usize, f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for &(x, w) in rule {
            s += w * f(mid + 0.5 * h * x);
        }
        acc += 0.5 * h * s;
    }
    acc
}

/// exp[−4π²/(t(2π−t))] on (0, 2π), zero elsewhere.
pub fn lighthill_bump(t: f64) -> f64 {
    if t <= 0.0 || t >= TAU {
        0.0
    } else {
        (-4.0 * PI * PI / (t * (TAU - t))).exp()
    }
}

/// Normalization ∫₀^{2π} exp[−4π²/(t(2π−t))] dt.
pub fn k_constant(quadrature_order: usize) -> f64 {
    let rule = gl_pairs(quadrature_order);
    composite(&rule, 0.0, TAU, INNER_PANELS, lighthill_bump)
}

/// The unit function U(θ) with a precomputed ∫du(θ) rule.
///
/// The du rule uses Gauss-Legendre panels of `quadrature_order` nodes over
/// [−2π, 2π]; the panel count scales with `max_harmonic` so that
/// e^{iMθ} integrates to ≤ 1e−10 for all |M| ≤ `max_harmonic`.
#[derive(Clone, Debug)]
pub struct UnitFunction {
    kind: UnitKind,
    k: f64,
    quadrature_order: usize,
    max_harmonic: usize,
    rule: Vec<(f64, f64)>,
    du_nodes: Vec<f64>,
    du_weights: Vec<f64>,
    period_nodes: Vec<f64>,
    period_weights: Vec<f64>,
}

impl UnitFunction {
    pub fn new(kind: UnitKind, quadrature_order: usize, max_harmonic: usize) -> Result<Self> {
        if quadrature_order < 16 {
            return Err(Error::InvalidArgument(format!("quadrature_order must be >= 16, got {quadrature_order}")));
        }
        let rule = gl_pairs(quadrature_order);
        let k = composite(&rule, 0.0, TAU, INNER_PANELS, lighthill_bump);
        let mut u = UnitFunction {
            kind,
            k,
            quadrature_order,
            max_harmonic,
            rule,
            du_nodes: Vec::new(),
            du_weights: Vec::new(),
            period_nodes: Vec::new(),
            period_weights: Vec::new(),
        };
        let panels = Self::panels_for(quadrature_order, max_harmonic);
        let (nodes, weights) = panel_nodes(&u.rule, -TAU, TAU, panels);
        u.du_weights = nodes.iter().zip(&weights).map(|(&t, &w)| w * u.eval(t)).collect();
        u.du_nodes = nodes;
        let (pn, pw) = panel_nodes(&u.rule, 0.0, TAU, panels.div_ceil(2));
        u.period_nodes = pn;
        u.period_weights = pw;
        Ok(u)
    }

    /// Order 32, harmonics up to 64.
    pub fn lighthill() -> Self {
        Self::new(UnitKind::Lighthill, 32, 64).unwrap()
    }

    pub fn with_max_harmonic(max_harmonic: usize) -> Self {
        Self::new(UnitKind::Lighthill, 32, max_harmonic).unwrap()
    }

    fn panels_for(order: usize, max_harmonic: usize) -> usize {
        (16 * (max_harmonic + 8)).div_ceil(order).max(16)
    }

    pub fn kind(&self) -> UnitKind {
        self.kind
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    pub fn max_harmonic(&self) -> usize {
        self.max_harmonic
    }

    pub fn du_len(&self) -> usize {
        self.du_nodes.len()
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let a = theta.abs();
        if a >= TAU {
            return 0.0;
        }
        match self.kind {
            UnitKind::Lighthill => {
                let v = composite(&self.rule, a, TAU, INNER_PANELS, lighthill_bump) / self.k;
                v.clamp(0.0, 1.0)
            }
        }
    }

    /// ∫_{−2π}^{2π} U(θ) f(θ) dθ. With `periodic_hint` the integrand is taken
    /// to be 2π-periodic and integrated over [0, 2π) directly.
    pub fn quadrature_du<F: Fn(f64) -> C64>(&self, f: F, periodic_hint: bool) -> C64 {
        let (nodes, weights) = if periodic_hint { (&self.period_nodes, &self.period_weights) } else { (&self.du_nodes, &self.du_weights) };
        nodes.iter().zip(weights).map(|(&t, &w)| f(t) * w).sum()
    }

    /// Plain ∫_a^b f with this function's panel rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, panels: usize, f: F) -> f64 {
        composite(&self.rule, a, b, panels, f)
    }
}

fn panel_nodes(rule: &[(f64, f64)], a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * rule.len());
    let mut weights = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in rule {
            nodes.push(mid + 0.5 * h * x);
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

pub fn unit_eval(u: &UnitFunction, theta: f64) -> f64 {
    u.eval(theta)
}

pub fn quadrature_du<F: Fn(f64) -> C64>(u: &UnitFunction, f: F, periodic_hint: bool) -> C64 {
    u.quadrature_du(f, periodic_hint)
}

/// Fourier coefficients c_m, |m| ≤ M, of a 2π-periodic function.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSignal {
    cutoff: usize,
    coeffs: Vec<C64>,
}

impl PeriodicSignal {
    pub fn zeros(cutoff: usize) -> Self {
        PeriodicSignal { cutoff, coeffs: vec![C64::new(0.0, 0.0); 2 * cutoff + 1] }
    }

    /// `coeffs[j]` is the coefficient of harmonic j − M.
    pub fn new(cutoff: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != 2 * cutoff + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for cutoff {cutoff}, got {}",
                2 * cutoff + 1,
                coeffs.len()
            )));
        }
        Ok(PeriodicSignal { cutoff, coeffs })
    }

    pub fn harmonic(cutoff: usize, m: i64) -> Self {
        let mut s = Self::zeros(cutoff.max(m.unsigned_abs() as usize));
        s.set(m, C64::new(1.0, 0.0));
        s
    }

    /// D_M(x − shift) as a signal.
    pub fn dirichlet(cutoff: usize, shift: f64) -> Self {
        let mut s = Self::zeros(cutoff);
        let m = cutoff as i64;
        for j in -m..=m {
            s.set(j, C64::from_polar(1.0 / TAU, -(j as f64) * shift));
        }
        s
    }

    /// Sample `f` on 2M+1 uniform nodes and take the discrete transform.
    pub fn from_fn<F: Fn(f64) -> C64>(cutoff: usize, f: F) -> Self {
        let n = 2 * cutoff + 1;
        let samples: Vec<C64> = (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect();
        let mut s = Self::zeros(cutoff);
        let m = cutoff as i64;
        for h in -m..=m {
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in samples.iter().enumerate() {
                acc += v * C64::from_polar(1.0, -(h as f64) * TAU * j as f64 / n as f64);
            }
            s.set(h, acc / n as f64);
        }
        s
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, m: i64) -> C64 {
        if m.unsigned_abs() as usize > self.cutoff {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(m + self.cutoff as i64) as usize]
        }
    }

    pub fn set(&mut self, m: i64, v: C64) {
        assert!(m.unsigned_abs() as usize <= self.cutoff, "harmonic {m} beyond cutoff {}", self.cutoff);
        self.coeffs[(m + self.cutoff as i64) as usize] = v;
    }

    pub fn eval(&self, theta: f64) -> C64 {
        let m = self.cutoff as i64;
        let mut acc = C64::new(0.0, 0.0);
        for j in -m..=m {
            let c = self.coeff(j);
            if c.re != 0.0 || c.im != 0.0 {
                acc += c * C64::from_polar(1.0, j as f64 * theta);
            }
        }
        acc
    }

    /// Evaluate on many nodes with one phase recurrence per node.
    pub fn eval_many(&self, thetas: &[f64]) -> Vec<C64> {
        let m = self.cutoff as i64;
        thetas
            .iter()
            .map(|&t| {
                let step = C64::from_polar(1.0, t);
                let mut z = C64::from_polar(1.0, -(m as f64) * t);
                let mut acc = C64::new(0.0, 0.0);
                for (j, c) in self.coeffs.iter().enumerate() {
                    if j % 64 == 0 {
                        z = C64::from_polar(1.0, (j as i64 - m) as f64 * t);
                    }
                    acc += c * z;
                    z *= step;
                }
                acc
            })
            .collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let m = self.cutoff as i64;
        (0..=m).all(|j| (self.coeff(-j) - self.coeff(j).conj()).norm() <= tol)
    }

    pub fn conj(&self) -> Self {
        let mut s = Self::zeros(self.cutoff);
        let m = self.cutoff as i64;
        for j in -m..=m {
            s.set(j, self.coeff(-j).conj());
        }
        s
    }

    pub fn scale(&self, a: C64) -> Self {
        PeriodicSignal { cutoff: self.cutoff, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let cutoff = self.cutoff.max(other.cutoff);
        let mut s = Self::zeros(cutoff);
        let m = cutoff as i64;
        for j in -m..=m {
            s.set(j, self.coeff(j) + other.coeff(j));
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Pointwise product; the cutoffs add.
    pub fn mul(&self, other: &Self) -> Self {
        let cutoff = self.cutoff + other.cutoff;
        let mut s = Self::zeros(cutoff);
        let (ma, mb) = (self.cutoff as i64, other.cutoff as i64);
        for a in -ma..=ma {
            let ca = self.coeff(a);
            if ca == C64::new(0.0, 0.0) {
                continue;
            }
            for b in -mb..=mb {
                let j = a + b;
                let v = s.coeff(j) + ca * other.coeff(b);
                s.set(j, v);
            }
        }
        s
    }

    pub fn derivative(&self) -> Self {
        let mut s = Self::zeros(self.cutoff);
        let m = self.cutoff as i64;
        for j in -m..=m {
            s.set(j, self.coeff(j) * C64::new(0.0, j as f64));
        }
        s
    }

    /// f(θ + Δ).
    pub fn shifted(&self, delta: f64) -> Self {
        let mut s = Self::zeros(self.cutoff);
        let m = self.cutoff as i64;
        for j in -m..=m {
            s.set(j, self.coeff(j) * C64::from_polar(1.0, j as f64 * delta));
        }
        s
    }

    /// ∫₀^{2π} f dθ.
    pub fn integral(&self) -> C64 {
        self.coeff(0) * TAU
    }

    /// ∫₀^{2π} f g dθ.
    pub fn pairing(&self, other: &Self) -> C64 {
        let m = self.cutoff.min(other.cutoff) as i64;
        let mut acc = C64::new(0.0, 0.0);
        for j in -m..=m {
            acc += self.coeff(j) * other.coeff(-j);
        }
        acc * TAU
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let m = self.cutoff.max(other.cutoff) as i64;
        (-m..=m).map(|j| (self.coeff(j) - other.coeff(j)).norm()).fold(0.0, f64::max)
    }
}

/// D_M(x) = (1/2π) Σ_{|m|≤M} e^{imx}.
pub fn dirichlet_delta(cutoff: usize, x: f64) -> C64 {
    let s: f64 = (1..=cutoff).map(|m| (m as f64 * x).cos()).sum();
    C64::new((1.0 + 2.0 * s) / TAU, 0.0)
}

/// d/dx D_M(x).
pub fn dirichlet_delta_derivative(cutoff: usize, x: f64) -> C64 {
    let s: f64 = (1..=cutoff).map(|m| m as f64 * (m as f64 * x).sin()).sum();
    C64::new(-2.0 * s / TAU, 0.0)
}

/// [θ], the representative of θ in [0, 2π).
pub fn sawtooth(theta: f64) -> f64 {
    let r = theta - TAU * (theta / TAU).floor();
    if !(0.0..TAU).contains(&r) {
        0.0
    } else {
        r
    }
}

/// Σ_{m<M} sin((2m+1)θ)/(2m+1); tends to (π/4)·f₂(2θ − π).
pub fn r_theta(theta: f64, terms: usize) -> f64 {
    let mut acc = 0.0;
    for m in (0..terms).rev() {
        let j = (2 * m + 1) as f64;
        acc += (j * theta).sin() / j;
    }
    acc
}

/// Square wave of period 4π: +1 on (−π, π), −1 on (π, 3π), 0 at the jumps.
#[derive(Clone, Copy, Debug, Default)]
pub struct SquareWave4pi;

impl SquareWave4pi {
    pub fn eval(&self, omega: f64) -> f64 {
        f2(omega)
    }
}

pub fn f2(omega: f64) -> f64 {
    let four_pi = 2.0 * TAU;
    let w = omega - four_pi * ((omega + PI) / four_pi).floor();
    let eps = 1e-12 * (1.0 + omega.abs());
    if (w + PI).abs() <= eps || (w - PI).abs() <= eps || (w - 3.0 * PI).abs() <= eps {
        0.0
    } else if w < PI {
        1.0
    } else {
        -1.0
    }
}

/// (1 + f₂(2ξ))/2.
pub fn h2(xi: f64) -> f64 {
    0.5 * (1.0 + f2(2.0 * xi))
}
