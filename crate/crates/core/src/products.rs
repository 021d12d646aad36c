//! Conserved scalar products between solutions sampled on a periodic grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kinematics::{FourVector, METRIC};
use crate::medium::MediumSpec;
use crate::modes::PlaneWaveMode;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Field values and their derivatives `∂_μ` at one point.
///
/// `da[μ]` holds `∂_μ A^ν` for all `ν`, likewise `dpol[j][μ]` and `db[μ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub a: FourVector,
    pub pol: Vec<FourVector>,
    pub b: Complex64,
    pub lambda: Complex64,
    pub da: [FourVector; 4],
    pub dpol: Vec<[FourVector; 4]>,
    pub db: [Complex64; 4],
}

impl FieldSample {
    pub fn zero(n_osc: usize) -> Self {
        FieldSample {
            a: FourVector::ZERO,
            pol: vec![FourVector::ZERO; n_osc],
            b: Complex64::new(0.0, 0.0),
            lambda: Complex64::new(0.0, 0.0),
            da: [FourVector::ZERO; 4],
            dpol: vec![[FourVector::ZERO; 4]; n_osc],
            db: [Complex64::new(0.0, 0.0); 4],
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: Complex64, other: &FieldSample) -> FieldSample {
        FieldSample {
            a: self.a + other.a * s,
            pol: self
                .pol
                .iter()
                .zip(&other.pol)
                .map(|(x, y)| *x + *y * s)
                .collect(),
            b: self.b + other.b * s,
            lambda: self.lambda + other.lambda * s,
            da: std::array::from_fn(|mu| self.da[mu] + other.da[mu] * s),
            dpol: self
                .dpol
                .iter()
                .zip(&other.dpol)
                .map(|(x, y)| std::array::from_fn(|mu| x[mu] + y[mu] * s))
                .collect(),
            db: std::array::from_fn(|mu| self.db[mu] + other.db[mu] * s),
        }
    }

    // F^{μν} = ∂^μ A^ν − ∂^ν A^μ
    fn field_strength(&self, mu: usize, nu: usize) -> Complex64 {
        self.da[mu].0[nu] * METRIC[mu] - self.da[nu].0[mu] * METRIC[nu]
    }
}

/// Periodic box `[0, L₁) × [0, L₂) × [0, L₃)` with `n_i` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: [usize; 3],
    pub lengths: [f64; 3],
}

impl Grid {
    pub fn new(n: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        if n.contains(&0) || lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidMedium("grid needs positive sizes".into()));
        }
        Ok(Grid { n, lengths })
    }

    pub fn cell_volume(&self) -> f64 {
        (0..3).map(|i| self.lengths[i] / self.n[i] as f64).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        let h: [f64; 3] = std::array::from_fn(|i| self.lengths[i] / self.n[i] as f64);
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n[0] {
            for j in 0..self.n[1] {
                for k in 0..self.n[2] {
                    out.push([i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]);
                }
            }
        }
        out
    }

    /// Wave vector `2π m_i / L_i` commensurate with the box.
    pub fn wavevector(&self, m: [i64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| 2.0 * PI * m[i] as f64 / self.lengths[i])
    }
}

/// A solution sampled on a grid at fixed time `x⁰ = ct`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfiguration {
    pub grid: Grid,
    pub x0: f64,
    pub points: Vec<[f64; 3]>,
    pub samples: Vec<FieldSample>,
}

impl FieldConfiguration {
    pub fn from_mode(mode: &PlaneWaveMode, grid: Grid, x0: f64) -> Self {
        let points = grid.points();
        let samples = points
            .iter()
            .map(|x| mode.sample([x0, x[0], x[1], x[2]]))
            .collect();
        FieldConfiguration {
            grid,
            x0,
            points,
            samples,
        }
    }

    /// `Σ_i c_i u_i` for plane-wave modes.
    pub fn superpose(terms: &[(Complex64, &PlaneWaveMode)], grid: Grid, x0: f64) -> Result<Self> {
        let n_osc = terms
            .first()
            .map(|t| t.1.pol.len())
            .ok_or(Error::GridMismatch)?;
        let points = grid.points();
        let samples = points
            .iter()
            .map(|x| {
                terms.iter().fold(FieldSample::zero(n_osc), |acc, (s, m)| {
                    acc.axpy(*s, &m.sample([x0, x[0], x[1], x[2]]))
                })
            })
            .collect();
        Ok(FieldConfiguration {
            grid,
            x0,
            points,
            samples,
        })
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: Complex64, other: &FieldConfiguration) -> Result<Self> {
        check_grids(self, other)?;
        Ok(FieldConfiguration {
            grid: self.grid,
            x0: self.x0,
            points: self.points.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a.axpy(s, b))
                .collect(),
        })
    }
}

fn check_grids(u: &FieldConfiguration, w: &FieldConfiguration) -> Result<()> {
    if u.grid != w.grid || u.samples.len() != w.samples.len() || u.x0 != w.x0 {
        return Err(Error::GridMismatch);
    }
    if u.samples.first().map(|s| s.pol.len()) != w.samples.first().map(|s| s.pol.len()) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Canonical momenta `∂L/∂(∂_μ X)` with the upper index `μ` fixed.
#[derive(Debug, Clone)]
struct Momenta {
    /// `Π_A^{μν}` for all `ν`.
    a: FourVector,
    /// `Π_{P_j}^{μσ}` for all `σ`.
    pol: Vec<FourVector>,
}

fn momenta(m: &MediumSpec, s: &FieldSample, x: f64, mu: usize, with_b: bool) -> Momenta {
    let c = m.c;
    let v = m.v;
    let mut a = FourVector(std::array::from_fn(|nu| {
        -s.field_strength(mu, nu) / (4.0 * PI)
    }));
    for (o, pj) in m.oscillators.iter().zip(&s.pol) {
        for nu in 0..4 {
            a.0[nu] -= (o.g / c) * (v.0[mu] * pj.0[nu] - v.0[nu] * pj.0[mu]);
        }
    }
    if with_b {
        a.0[mu] += s.b * METRIC[mu];
    }
    let pol = s
        .dpol
        .iter()
        .enumerate()
        .map(|(j, dp)| {
            let o = &m.oscillators[j];
            let chi = m.chi_of(j, x);
            let vdp: FourVector = (0..4).fold(FourVector::ZERO, |acc, r| acc + dp[r] * v.0[r]);
            vdp * (-v.0[mu] / (chi * o.omega0 * o.omega0))
        })
        .collect();
    Momenta { a, pol }
}

// u_ν* Π^{μν}
fn pair(u: &FieldSample, p: &Momenta) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for nu in 0..4 {
        sum += u.a.0[nu].conj() * METRIC[nu] * p.a.0[nu];
        for (uj, pj) in u.pol.iter().zip(&p.pol) {
            sum += uj.0[nu].conj() * METRIC[nu] * pj.0[nu];
        }
    }
    sum
}

/// Noether current `J^μ(u, w) = (i/2)[u*·Π^μ(w) − Π^μ(u)*·w]` at one point.
pub fn current_density(
    m: &MediumSpec,
    u: &FieldSample,
    w: &FieldSample,
    x: f64,
    mu: usize,
    with_b: bool,
) -> Complex64 {
    let pw = momenta(m, w, x, mu, with_b);
    let pu = momenta(m, u, x, mu, with_b);
    0.5 * I * (pair(u, &pw) - pair(w, &pu).conj())
}

fn integrate_j0(
    m: &MediumSpec,
    u: &FieldConfiguration,
    w: &FieldConfiguration,
    with_b: bool,
) -> Result<Complex64> {
    check_grids(u, w)?;
    let vol = u.grid.cell_volume();
    let sum: Complex64 = u
        .samples
        .iter()
        .zip(&w.samples)
        .zip(&u.points)
        .map(|((a, b), x)| current_density(m, a, b, x[0], 0, with_b))
        .sum();
    Ok(sum * vol)
}

/// Scalar product of the unconstrained model.
pub fn scalar_product(
    m: &MediumSpec,
    u: &FieldConfiguration,
    w: &FieldConfiguration,
) -> Result<Complex64> {
    integrate_j0(m, u, w, false)
}

/// Scalar product of the gauge-fixed model, including the `B A⁰` term.
pub fn scalar_product_constrained(
    m: &MediumSpec,
    u: &FieldConfiguration,
    w: &FieldConfiguration,
) -> Result<Complex64> {
    integrate_j0(m, u, w, true)
}

/// Number of canonical coordinates per point.
pub fn phase_space_coordinates(n_osc: usize, with_lambda: bool) -> usize {
    4 + 4 * n_osc + 1 + usize::from(with_lambda)
}

/// Phase-space vector `(X, Π̄)` at one point, `Π̄ = ∂L/∂(∂_t X)` with the
/// index of `X` lowered. `X = (A^μ, P_j^μ, B[, λ])`.
pub fn phase_space_vector(
    m: &MediumSpec,
    s: &FieldSample,
    x: f64,
    with_lambda: bool,
) -> Vec<Complex64> {
    let mom = momenta(m, s, x, 0, true);
    let c = m.c;
    let mut q = Vec::new();
    let mut p = Vec::new();
    for nu in 0..4 {
        q.push(s.a.0[nu]);
        p.push(mom.a.0[nu] * METRIC[nu] / c);
    }
    for (pj, mj) in s.pol.iter().zip(&mom.pol) {
        for nu in 0..4 {
            q.push(pj.0[nu]);
            p.push(mj.0[nu] * METRIC[nu] / c);
        }
    }
    q.push(s.b);
    p.push(Complex64::new(0.0, 0.0));
    if with_lambda {
        q.push(s.lambda);
        p.push(Complex64::new(0.0, 0.0));
    }
    q.extend(p);
    q
}

/// Kernel `Ω = i [[0, 1], [−1, 0]]` on `2M`-dimensional phase-space vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    pub m: usize,
}

impl SymplecticForm {
    pub fn new(m: usize) -> Self {
        SymplecticForm { m }
    }

    pub fn dimension(&self) -> usize {
        2 * self.m
    }

    pub fn matrix(&self) -> nalgebra::DMatrix<Complex64> {
        let n = self.m;
        let mut o = nalgebra::DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            o[(i, n + i)] = I;
            o[(n + i, i)] = -I;
        }
        o
    }

    pub fn apply(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(z)?;
        let n = self.m;
        Ok((0..2 * n)
            .map(|i| if i < n { I * z[n + i] } else { -I * z[i - n] })
            .collect())
    }

    /// `z_u† Ω z_w`.
    pub fn product(&self, zu: &[Complex64], zw: &[Complex64]) -> Result<Complex64> {
        self.check(zu)?;
        let ow = self.apply(zw)?;
        Ok(zu.iter().zip(&ow).map(|(a, b)| a.conj() * b).sum())
    }

    fn check(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != 2 * self.m {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.m,
                got: z.len(),
            });
        }
        Ok(())
    }
}

/// `Σ_x z_u† Ω z_w ΔV` over the grid.
pub fn symplectic_raw(
    m: &MediumSpec,
    u: &FieldConfiguration,
    w: &FieldConfiguration,
    with_lambda: bool,
) -> Result<Complex64> {
    check_grids(u, w)?;
    let n_osc = u.samples.first().map(|s| s.pol.len()).unwrap_or(0);
    let form = SymplecticForm::new(phase_space_coordinates(n_osc, with_lambda));
    let vol = u.grid.cell_volume();
    let mut sum = Complex64::new(0.0, 0.0);
    for ((a, b), x) in u.samples.iter().zip(&w.samples).zip(&u.points) {
        let zu = phase_space_vector(m, a, x[0], with_lambda);
        let zw = phase_space_vector(m, b, x[0], with_lambda);
        sum += form.product(&zu, &zw)?;
    }
    Ok(sum * vol)
}

/// Constrained product obtained from the symplectic form, `(c/2)·raw`,
/// on the reduced phase space without `(λ, π_λ)`.
pub fn scalar_product_symplectic(
    m: &MediumSpec,
    u: &FieldConfiguration,
    w: &FieldConfiguration,
) -> Result<Complex64> {
    Ok(symplectic_raw(m, u, w, false)? * (m.c / 2.0))
}

/// Coefficient `N(ω)` in `(u_k, u_k') = N(ω) |𝒜|² δ(k − k')` for a
/// transverse mode in the rest frame.
pub fn norm_coefficient(m: &MediumSpec, omega: f64) -> f64 {
    let mut s = 1.0 / (4.0 * PI);
    for o in &m.oscillators {
        let w2 = o.omega0 * o.omega0;
        s += o.g * o.g * o.chi0 * w2 * w2 / (w2 - omega * omega).powi(2);
    }
    omega / m.c * s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormClass {
    Particle,
    Antiparticle,
    ZeroNorm,
}

/// Relative band inside which a norm counts as zero.
pub const ZERO_NORM_TOL: f64 = 1e-10;

/// Sign of `n` relative to `scale`; `|n| ≤ tol·scale` is zero-norm.
pub fn classify_value(n: Complex64, scale: f64, tol: f64) -> NormClass {
    if n.re.abs() <= tol * scale {
        NormClass::ZeroNorm
    } else if n.re > 0.0 {
        NormClass::Particle
    } else {
        NormClass::Antiparticle
    }
}

/// Sign of the constrained norm `(u, u)`, measured against the size of the
/// individual contributions `|u*·Π⁰(u)|` so cancellations register as zero.
pub fn classify_norm(m: &MediumSpec, u: &FieldConfiguration) -> Result<NormClass> {
    let n = scalar_product_constrained(m, u, u)?;
    let scale: f64 = u
        .samples
        .iter()
        .zip(&u.points)
        .map(|(s, x)| {
            let mom = momenta(m, s, x[0], 0, true);
            term_magnitudes(s, &mom)
        })
        .sum::<f64>()
        * u.grid.cell_volume();
    Ok(classify_value(n, scale, ZERO_NORM_TOL))
}

fn term_magnitudes(u: &FieldSample, p: &Momenta) -> f64 {
    let mut sum = 0.0;
    for nu in 0..4 {
        sum += (u.a.0[nu] * p.a.0[nu]).norm();
        for (uj, pj) in u.pol.iter().zip(&p.pol) {
            sum += (uj.0[nu] * pj.0[nu]).norm();
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::OscillatorSpec;
    use crate::modes::{make_plane_wave, Branch, Polarization};

    #[test]
    fn plane_wave_norm_is_box_normalized_coefficient() {
        let m =
            MediumSpec::homogeneous_rest(OscillatorSpec::new(0.6, 1.4, 0.9).unwrap(), 1.0).unwrap();
        let grid = Grid::new([8, 4, 4], [4.0, 3.0, 2.0]).unwrap();
        let k = grid.wavevector([1, 0, 0]);
        for br in [Branch::Lower, Branch::Upper] {
            let w = make_plane_wave(&m, k, Polarization::Transverse1, br).unwrap();
            let f = FieldConfiguration::from_mode(&w, grid, 0.3);
            let n = scalar_product(&m, &f, &f).unwrap();
            let expect = norm_coefficient(&m, w.omega(1.0)) * grid.volume();
            assert!((n.re - expect).abs() < 1e-12 * expect);
            let s = scalar_product_symplectic(&m, &f, &f).unwrap();
            assert!((s - n).norm() < 1e-12 * expect);
            let full = symplectic_raw(&m, &f, &f, true).unwrap() * 0.5;
            assert!((full - n).norm() < 1e-12 * expect);
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let m =
            MediumSpec::homogeneous_rest(OscillatorSpec::new(0.6, 1.4, 0.9).unwrap(), 1.0).unwrap();
        let g1 = Grid::new([4, 1, 1], [1.0, 1.0, 1.0]).unwrap();
        let g2 = Grid::new([5, 1, 1], [1.0, 1.0, 1.0]).unwrap();
        let w = make_plane_wave(
            &m,
            [1.0, 0.0, 0.0],
            Polarization::Transverse1,
            Branch::Lower,
        )
        .unwrap();
        let a = FieldConfiguration::from_mode(&w, g1, 0.0);
        let b = FieldConfiguration::from_mode(&w, g2, 0.0);
        assert!(matches!(
            scalar_product(&m, &a, &b),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn classification_thresholds() {
        let z = |x: f64| Complex64::new(x, 0.0);
        assert_eq!(classify_value(z(1e-14), 1.0, 1e-10), NormClass::ZeroNorm);
        assert_eq!(classify_value(z(-0.5), 1.0, 1e-10), NormClass::Antiparticle);
        assert_eq!(classify_value(z(0.5), 1.0, 1e-10), NormClass::Particle);
    }
}
