//! Truncated extended Fock space: windows, states, operators and the state
//! specification mini-language.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, RngExt};

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Inclusive window n_min..=n_max of the number ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisWindow {
    pub n_min: i64,
    pub n_max: i64,
}

impl BasisWindow {
    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        if n_min > 0 || n_max < 0 {
            return Err(Error::InvalidArgument(format!("window [{n_min}, {n_max}] must contain 0")));
        }
        Ok(BasisWindow { n_min, n_max })
    }

    /// [−n, n].
    pub fn extended(n: i64) -> Self {
        BasisWindow { n_min: -n.abs(), n_max: n.abs() }
    }

    /// [0, n].
    pub fn physical(n: i64) -> Self {
        BasisWindow { n_min: 0, n_max: n.abs() }
    }

    pub fn dim(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_physical(&self) -> bool {
        self.n_min >= 0
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_min && n <= self.n_max
    }

    pub fn index(&self, n: i64) -> Result<usize> {
        if self.contains(n) {
            Ok((n - self.n_min) as usize)
        } else {
            Err(Error::Index { index: n, n_min: self.n_min, n_max: self.n_max })
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }
}

impl fmt::Display for BasisWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.n_min, self.n_max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    pub window: BasisWindow,
    pub amps: Array1<C64>,
    normalized: bool,
}

impl FockState {
    /// Wrap amplitudes; flagged normalized only if the norm is 1 to 1e−12.
    pub fn new(window: BasisWindow, amps: Array1<C64>) -> Result<Self> {
        if amps.len() != window.dim() {
            return Err(Error::InvalidArgument(format!("{} amplitudes for window {window} of dim {}", amps.len(), window.dim())));
        }
        let normalized = (norm_sqr(&amps) - 1.0).abs() <= 1e-12;
        Ok(FockState { window, amps, normalized })
    }

    pub fn improper(window: BasisWindow, amps: Array1<C64>) -> Self {
        FockState { window, amps, normalized: false }
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_physical(&self) -> bool {
        self.window.iter().zip(self.amps.iter()).all(|(n, a)| n >= 0 || *a == ZERO)
    }

    pub fn amp(&self, n: i64) -> C64 {
        self.window.index(n).map(|i| self.amps[i]).unwrap_or(ZERO)
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        Ok(FockState { window: self.window, amps: self.amps.mapv(|a| a / n), normalized: true })
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &FockState) -> Result<C64> {
        same_window(self.window, other.window)?;
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Re-express on another window, dropping amplitudes outside it.
    pub fn embed(&self, window: BasisWindow) -> FockState {
        let amps = Array1::from_iter(window.iter().map(|n| self.amp(n)));
        FockState::new(window, amps).unwrap()
    }

    pub fn density(&self) -> FockOperator {
        FockOperator::outer(self, self)
    }
}

fn norm_sqr(a: &Array1<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

fn same_window(a: BasisWindow, b: BasisWindow) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::WindowMismatch { a_min: a.n_min, a_max: a.n_max, b_min: b.n_min, b_max: b.n_max })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    pub window: BasisWindow,
    pub mat: Array2<C64>,
}

impl FockOperator {
    pub fn new(window: BasisWindow, mat: Array2<C64>) -> Result<Self> {
        let d = window.dim();
        if mat.dim() != (d, d) {
            return Err(Error::InvalidArgument(format!("matrix shape {:?} does not match window {window}", mat.dim())));
        }
        Ok(FockOperator { window, mat })
    }

    pub fn zeros(window: BasisWindow) -> Self {
        let d = window.dim();
        FockOperator { window, mat: Array2::zeros((d, d)) }
    }

    pub fn identity(window: BasisWindow) -> Self {
        let d = window.dim();
        FockOperator { window, mat: Array2::eye(d) }
    }

    pub fn from_fn<F: Fn(i64, i64) -> C64>(window: BasisWindow, f: F) -> Self {
        let d = window.dim();
        let n0 = window.n_min;
        FockOperator { window, mat: Array2::from_shape_fn((d, d), |(i, j)| f(n0 + i as i64, n0 + j as i64)) }
    }

    /// |a⟩⟨b|.
    pub fn outer(a: &FockState, b: &FockState) -> Self {
        let d = a.window.dim();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| a.amps[i] * b.amps[j].conj());
        FockOperator { window: a.window, mat }
    }

    pub fn mixture(parts: &[(f64, FockState)]) -> Result<Self> {
        let window = parts.first().map(|p| p.1.window).ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let mut rho = FockOperator::zeros(window);
        for (w, s) in parts {
            same_window(window, s.window)?;
            rho.mat += &(FockOperator::outer(s, s).mat * C64::new(*w, 0.0));
        }
        Ok(rho)
    }

    /// ⟨k|A|ℓ⟩.
    pub fn get(&self, k: i64, l: i64) -> C64 {
        match (self.window.index(k), self.window.index(l)) {
            (Ok(i), Ok(j)) => self.mat[[i, j]],
            _ => ZERO,
        }
    }

    pub fn apply(&self, s: &FockState) -> Result<FockState> {
        same_window(self.window, s.window)?;
        Ok(FockState::improper(self.window, self.mat.dot(&s.amps)))
    }

    pub fn matmul(&self, other: &FockOperator) -> Result<FockOperator> {
        same_window(self.window, other.window)?;
        Ok(FockOperator { window: self.window, mat: self.mat.dot(&other.mat) })
    }

    pub fn add(&self, other: &FockOperator) -> Result<FockOperator> {
        same_window(self.window, other.window)?;
        Ok(FockOperator { window: self.window, mat: &self.mat + &other.mat })
    }

    pub fn scale(&self, a: C64) -> FockOperator {
        FockOperator { window: self.window, mat: self.mat.mapv(|z| z * a) }
    }

    pub fn adjoint(&self) -> FockOperator {
        FockOperator { window: self.window, mat: self.mat.t().mapv(|z| z.conj()) }
    }

    pub fn commutator(&self, other: &FockOperator) -> Result<FockOperator> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(FockOperator { window: self.window, mat: ab.mat - ba.mat })
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn hermitian_residual(&self) -> f64 {
        let d = self.window.dim();
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                r = r.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn max_abs_diff(&self, other: &FockOperator) -> f64 {
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_physical(&self) -> bool {
        let n0 = self.window.n_min;
        self.mat.indexed_iter().all(|((i, j), z)| (n0 + i as i64 >= 0 && n0 + j as i64 >= 0) || *z == ZERO)
    }

    /// Re-express on another window, dropping entries outside it.
    pub fn embed(&self, window: BasisWindow) -> FockOperator {
        FockOperator::from_fn(window, |k, l| self.get(k, l))
    }

    /// Check Hermiticity, unit trace and positivity to `tol`.
    pub fn validate_density(&self, tol: f64) -> Result<()> {
        let mut bad = Vec::new();
        let h = self.hermitian_residual();
        if h > tol {
            bad.push(format!("not Hermitian (residual {h:e})"));
        }
        let t = self.trace();
        if (t - ONE).norm() > tol {
            bad.push(format!("trace {} + {}i is not 1", t.re, t.im));
        }
        if h <= tol && !positive_semidefinite(&self.mat, tol) {
            bad.push("not positive semidefinite".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::NotDensity(bad))
        }
    }
}

/// Cholesky of A + tol·I; succeeds iff A has no eigenvalue below −tol (up to rounding).
fn positive_semidefinite(a: &Array2<C64>, tol: f64) -> bool {
    let d = a.nrows();
    let mut l: Array2<C64> = Array2::zeros((d, d));
    for j in 0..d {
        let mut s = a[[j, j]].re + tol;
        for k in 0..j {
            s -= l[[j, k]].norm_sqr();
        }
        if s <= 0.0 {
            return false;
        }
        let ljj = s.sqrt();
        l[[j, j]] = C64::new(ljj, 0.0);
        for i in j + 1..d {
            let mut z = 0.5 * (a[[i, j]] + a[[j, i]].conj());
            for k in 0..j {
                z -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = z / ljj;
        }
    }
    true
}

pub fn number_state(window: BasisWindow, k: i64) -> Result<FockState> {
    let i = window.index(k)?;
    let mut amps = Array1::zeros(window.dim());
    amps[i] = ONE;
    FockState::new(window, amps)
}

/// Truncated |θ₀⟩ with amplitudes e^{inθ₀}/√(2π); not normalized.
pub fn phase_state(window: BasisWindow, theta0: f64) -> FockState {
    let s = 1.0 / TAU.sqrt();
    FockState::improper(window, Array1::from_iter(window.iter().map(|n| C64::from_polar(s, n as f64 * theta0))))
}

/// Truncated |θ₀⟩ scaled to unit norm.
pub fn phase_packet(window: BasisWindow, theta0: f64) -> FockState {
    let s = 1.0 / (window.dim() as f64).sqrt();
    let amps = Array1::from_iter(window.iter().map(|n| C64::from_polar(s, n as f64 * theta0)));
    FockState::new(window, amps).unwrap()
}

/// e^{inθ₀} e^{−n²w²/2}, normalized.
pub fn gaussian_packet(window: BasisWindow, theta0: f64, width: f64) -> Result<FockState> {
    let amps = Array1::from_iter(window.iter().map(|n| {
        let x = n as f64 * width;
        C64::from_polar((-0.5 * x * x).exp(), n as f64 * theta0)
    }));
    FockState::improper(window, amps).normalize()
}

/// ⟨θ|θ'⟩ over the window.
pub fn phase_overlap(window: BasisWindow, theta: f64, theta_p: f64) -> C64 {
    window.iter().map(|n| C64::from_polar(1.0 / TAU, n as f64 * (theta_p - theta))).sum()
}

/// Matrix of ∫du(θ)[θ]|θ⟩⟨θ|: π on the diagonal, i/(m−n) off it.
pub fn theta_operator(window: BasisWindow) -> FockOperator {
    FockOperator::from_fn(window, |n, m| if n == m { C64::new(PI, 0.0) } else { C64::new(0.0, 1.0 / (m - n) as f64) })
}

pub fn number_operator(window: BasisWindow) -> FockOperator {
    FockOperator::from_fn(window, |n, m| if n == m { C64::new(n as f64, 0.0) } else { ZERO })
}

/// Projector onto n ≥ 0.
pub fn projector_physical(window: BasisWindow) -> Result<FockOperator> {
    if window.n_max < 0 {
        return Err(Error::InvalidArgument(format!("window {window} has no physical states")));
    }
    Ok(FockOperator::from_fn(window, |n, m| if n == m && n >= 0 { ONE } else { ZERO }))
}

/// (N̂θ̂ + θ̂N̂)/2.
pub fn symmetric_product(window: BasisWindow) -> FockOperator {
    let t = theta_operator(window);
    FockOperator::from_fn(window, |n, m| t.get(n, m) * (0.5 * (n + m) as f64))
}

/// Uniform amplitudes in the unit square, normalized, zero for n < 0 when `physical`.
pub fn random_state<R: Rng + ?Sized>(window: BasisWindow, physical: bool, rng: &mut R) -> FockState {
    let amps = Array1::from_iter(window.iter().map(|n| {
        if physical && n < 0 {
            ZERO
        } else {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }
    }));
    FockState::improper(window, amps).normalize().unwrap()
}

pub fn random_hermitian<R: Rng + ?Sized>(window: BasisWindow, rng: &mut R) -> FockOperator {
    let d = window.dim();
    let mut mat = Array2::zeros((d, d));
    for i in 0..d {
        mat[[i, i]] = C64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..d {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            mat[[i, j]] = z;
            mat[[j, i]] = z.conj();
        }
    }
    FockOperator { window, mat }
}

/// Parsed `number:k`, `phase:θ₀`, `packet:θ₀,width`, `super:k1,k2`, `mixed:k1,k2`.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Number(i64),
    Phase(f64),
    Packet { theta0: f64, width: f64 },
    Super(i64, i64),
    Mixed(i64, i64),
}

pub const STATE_GRAMMAR: &str = "number:K | phase:THETA0 | packet:THETA0,WIDTH | super:K1,K2 | mixed:K1,K2";

fn grammar_error(s: &str, why: &str) -> Error {
    Error::Parse(format!("bad state spec '{s}' ({why}); expected {STATE_GRAMMAR}"))
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| grammar_error(s, "missing ':'"))?;
        let args: Vec<&str> = rest.split(',').map(str::trim).collect();
        let int = |a: &str| a.parse::<i64>().map_err(|_| grammar_error(s, "expected an integer"));
        let real = |a: &str| a.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| grammar_error(s, "expected a real number"));
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(grammar_error(s, &format!("expected {n} argument(s)")))
            }
        };
        match kind.trim() {
            "number" => {
                want(1)?;
                Ok(StateSpec::Number(int(args[0])?))
            }
            "phase" => {
                want(1)?;
                Ok(StateSpec::Phase(real(args[0])?))
            }
            "packet" => {
                want(2)?;
                let width = real(args[1])?;
                if width <= 0.0 {
                    return Err(grammar_error(s, "width must be positive"));
                }
                Ok(StateSpec::Packet { theta0: real(args[0])?, width })
            }
            "super" => {
                want(2)?;
                Ok(StateSpec::Super(int(args[0])?, int(args[1])?))
            }
            "mixed" => {
                want(2)?;
                Ok(StateSpec::Mixed(int(args[0])?, int(args[1])?))
            }
            _ => Err(grammar_error(s, "unknown kind")),
        }
    }
}

impl StateSpec {
    /// Density matrix on `window`. Phase-like states are cut to the window and normalized.
    pub fn density(&self, window: BasisWindow) -> Result<FockOperator> {
        Ok(match *self {
            StateSpec::Number(k) => number_state(window, k)?.density(),
            StateSpec::Phase(t) => phase_packet(window, t).density(),
            StateSpec::Packet { theta0, width } => gaussian_packet(window, theta0, width)?.density(),
            StateSpec::Super(a, b) => {
                let sa = number_state(window, a)?;
                let sb = number_state(window, b)?;
                let amps = &sa.amps + &sb.amps;
                FockState::improper(window, amps).normalize()?.density()
            }
            StateSpec::Mixed(a, b) => FockOperator::mixture(&[(0.5, number_state(window, a)?), (0.5, number_state(window, b)?)])?,
        })
    }
}
