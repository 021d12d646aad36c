//! Mode-space Hamiltonian, the indefinite-metric commutator algebra and the
//! Fano diagonalization of the physical polariton block.
//!
//! All blocks refer to one wavevector in the medium rest frame, Feynman gauge.
//! The partner mode `b(−p)` that the interaction pairs with `a(p)` is folded
//! onto `b(p)`, which is exact for the isotropic medium.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{eigenvalues, eigenvector, CMatrix};
use crate::medium::{renormalized_frequency, MediumSpec, OscillatorSpec};
use crate::modes::{Branch, PlaneWaveMode, Polarization};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Single-wavevector ladder operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    A1,
    A2,
    A3,
    Beta,
    B1,
    B2,
    B3,
}

pub const ALL_MODES: [Mode; 7] = [
    Mode::A1,
    Mode::A2,
    Mode::A3,
    Mode::Beta,
    Mode::B1,
    Mode::B2,
    Mode::B3,
];

/// `[ξ_m, ξ_n†]`.
pub fn metric(m: Mode, n: Mode) -> f64 {
    use Mode::*;
    match (m, n) {
        (A1, A1) | (A2, A2) | (B1, B1) | (B2, B2) | (B3, B3) => 1.0,
        (A3, Beta) | (Beta, A3) => -1.0,
        _ => 0.0,
    }
}

/// Linear combination of annihilation operators `Σ c_m ξ_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderCombination(pub Vec<(Mode, Complex64)>);

/// Commutation metric of the ladder operators, including the combinations
/// `d₀ = (a₃ + β)/√2` and `d₃ = (a₃ − β)/√2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModeLadder;

impl ModeLadder {
    pub fn label(&self, name: &str) -> Option<LadderCombination> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let one = |m| LadderCombination(vec![(m, cr(1.0))]);
        Some(match name {
            "a1" => one(Mode::A1),
            "a2" => one(Mode::A2),
            "a3" => one(Mode::A3),
            "beta" => one(Mode::Beta),
            "b1" => one(Mode::B1),
            "b2" => one(Mode::B2),
            "b3" => one(Mode::B3),
            "d0" => LadderCombination(vec![(Mode::A3, cr(s)), (Mode::Beta, cr(s))]),
            "d3" => LadderCombination(vec![(Mode::A3, cr(s)), (Mode::Beta, cr(-s))]),
            _ => return None,
        })
    }

    /// `[x, y†]`.
    pub fn commutator(&self, x: &LadderCombination, y: &LadderCombination) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for &(m, a) in &x.0 {
            for &(n, b) in &y.0 {
                s += a * b.conj() * metric(m, n);
            }
        }
        s
    }

    /// Metric matrix over the listed labels.
    pub fn metric_matrix(&self, labels: &[&str]) -> Result<DMatrix<Complex64>> {
        let ops: Vec<LadderCombination> = labels
            .iter()
            .map(|l| {
                self.label(l)
                    .ok_or_else(|| Error::InvalidMedium(format!("unknown ladder label {l}")))
            })
            .collect::<Result<_>>()?;
        let n = ops.len();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            self.commutator(&ops[i], &ops[j])
        }))
    }
}

/// Quadratic Hamiltonian for one wavevector, `H = ½ ψ† M ψ` per block.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonianBlock {
    pub k: f64,
    /// `p₀ = c|k|`.
    pub p0: f64,
    /// Renormalized oscillator frequency `Ω₀`.
    pub omega_big: f64,
    /// Fano coupling `(g/c)√(πχω₀²/(p₀Ω)) c p₀`.
    pub kappa: f64,
    /// Over `(a, a†, b, b†)` for one transverse polarization.
    pub physical: Matrix4<Complex64>,
    /// Over `(β, β†, a₃, a₃†, b₃, b₃†)`.
    pub unphysical: DMatrix<Complex64>,
}

fn single_oscillator(m: &MediumSpec) -> Result<&OscillatorSpec> {
    if m.oscillators.len() != 1 {
        return Err(Error::UnsupportedVariation(
            "mode-space blocks are built for one oscillator",
        ));
    }
    if !m.is_rest_frame() {
        return Err(Error::InvalidMedium(
            "mode-space blocks need the medium rest frame".into(),
        ));
    }
    Ok(m.primary())
}

pub fn build_mode_hamiltonian(m: &MediumSpec, k: f64) -> Result<QuadraticHamiltonianBlock> {
    let o = single_oscillator(m)?;
    if !(k > 0.0) {
        return Err(Error::DegenerateWavevector);
    }
    let c = m.c;
    let p0 = c * k;
    let omega_big = renormalized_frequency(o, o.chi0);
    let kappa = (o.g / c) * (PI * o.chi0 * o.omega0 * o.omega0 / (p0 * omega_big)).sqrt() * c * p0;
    let ik = I * kappa;
    let z = Complex64::new(0.0, 0.0);
    #[rustfmt::skip]
    let physical = Matrix4::new(
        cr(p0), z, -ik, -ik,
        z, cr(p0), ik, ik,
        ik, -ik, cr(omega_big), z,
        ik, -ik, z, cr(omega_big),
    );
    let h = cr(kappa / 2.0);
    let q = cr(-p0 / 4.0);
    let w = cr(omega_big);
    #[rustfmt::skip]
    let unphysical = DMatrix::from_row_slice(6, 6, &[
        q, z, z, z, h, h,
        z, q, z, z, h, h,
        z, z, z, z, z, z,
        z, z, z, z, z, z,
        h, h, z, z, w, z,
        h, h, z, z, z, w,
    ]);
    Ok(QuadraticHamiltonianBlock {
        k,
        p0,
        omega_big,
        kappa,
        physical,
        unphysical,
    })
}

/// Bogoliubov map `(a, a†, b, b†) → (α_U, α_U†, α_L, α_L†)`.
#[derive(Debug, Clone)]
pub struct FanoTransform {
    pub t: Matrix4<Complex64>,
    pub omega_upper: f64,
    pub omega_lower: f64,
    /// `max ‖(GM)ᵀ y − ω y‖` over both branches.
    pub eigen_residual: f64,
    /// `max |T G T† − G|`.
    pub symplectic_residual: f64,
}

pub fn commutation_metric() -> Matrix4<Complex64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(
        cr(1.0),
        cr(-1.0),
        cr(1.0),
        cr(-1.0),
    ))
}

// ψ̄ = X ψ swaps each operator with its adjoint
fn swap_matrix() -> Matrix4<Complex64> {
    let z = cr(0.0);
    let o = cr(1.0);
    #[rustfmt::skip]
    let x = Matrix4::new(
        z, o, z, z,
        o, z, z, z,
        z, z, z, o,
        z, z, o, z,
    );
    x
}

pub fn fano_diagonalize(block: &QuadraticHamiltonianBlock) -> Result<FanoTransform> {
    let g = commutation_metric();
    let dynm = (g * block.physical).transpose();
    let dm = CMatrix::from_fn(4, 4, |i, j| dynm[(i, j)]);
    let vals = eigenvalues(&dm);
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if let Some(bad) = vals.iter().find(|z| z.im.abs() > 1e-10 * scale) {
        return Err(Error::DynamicalInstability(bad.im));
    }
    let mut pos: Vec<f64> = vals.iter().map(|z| z.re).filter(|&x| x > 0.0).collect();
    pos.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if pos.len() != 2 {
        return Err(Error::DynamicalInstability(0.0));
    }
    let x = swap_matrix();
    let mut t = Matrix4::zeros();
    let mut eigen_residual: f64 = 0.0;
    for (b, &w) in pos.iter().enumerate() {
        let mut y = eigenvector(&dm, cr(w));
        let nrm = (0..4)
            .map(|i| y[i] * g[(i, i)] * y[i].conj())
            .sum::<Complex64>()
            .re;
        if nrm <= 0.0 {
            return Err(Error::DynamicalInstability(nrm));
        }
        y /= cr(nrm.sqrt());
        // fix the overall phase so the largest component is real positive
        let (imax, _) = (0..4).fold((0, 0.0), |acc, i| {
            if y[i].norm() > acc.1 {
                (i, y[i].norm())
            } else {
                acc
            }
        });
        let ph = y[imax] / y[imax].norm();
        y /= ph;
        eigen_residual = eigen_residual.max((&dm * &y - &y * cr(w)).norm());
        let yc: nalgebra::Vector4<Complex64> = nalgebra::Vector4::from_fn(|i, _| y[i]);
        let row = yc.transpose();
        let row_dag = yc.map(|z| z.conj()).transpose() * x;
        t.set_row(2 * b, &row);
        t.set_row(2 * b + 1, &row_dag);
    }
    let symplectic_residual = (t * g * t.adjoint() - g)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(FanoTransform {
        t,
        omega_upper: pos[0],
        omega_lower: pos[1],
        eigen_residual,
        symplectic_residual,
    })
}

/// Inverse Bogoliubov map, `G T† G`.
pub fn inverse_transform(f: &FanoTransform) -> Matrix4<Complex64> {
    let g = commutation_metric();
    g * f.t.adjoint() * g
}

/// One ladder operator or its adjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Op {
    pub mode: Mode,
    pub dagger: bool,
}

impl Op {
    pub fn ann(mode: Mode) -> Self {
        Op {
            mode,
            dagger: false,
        }
    }
    pub fn cre(mode: Mode) -> Self {
        Op { mode, dagger: true }
    }
}

/// `⟨0| w₁ w₂ … |0⟩` by moving annihilators to the right.
pub fn vacuum_expectation(word: &[Op]) -> Complex64 {
    let Some(i) = word.iter().rposition(|o| !o.dagger) else {
        return if word.is_empty() { cr(1.0) } else { cr(0.0) };
    };
    if i + 1 == word.len() {
        return cr(0.0);
    }
    // word[i+1] is a creator
    let mut swapped = word.to_vec();
    swapped.swap(i, i + 1);
    let mut out = vacuum_expectation(&swapped);
    let g = metric(word[i].mode, word[i + 1].mode);
    if g != 0.0 {
        let mut contracted = word[..i].to_vec();
        contracted.extend_from_slice(&word[i + 2..]);
        out += g * vacuum_expectation(&contracted);
    }
    out
}

/// Quadratic operator `Σ c · x y`.
pub type QuadraticOperator = Vec<(Complex64, Op, Op)>;

fn block_ops(modes: &[Mode]) -> Vec<Op> {
    modes
        .iter()
        .flat_map(|&m| [Op::ann(m), Op::cre(m)])
        .collect()
}

// :½ Σ M_ij ψ_i† ψ_j:
fn expand(mat: &DMatrix<Complex64>, modes: &[Mode]) -> QuadraticOperator {
    let ops = block_ops(modes);
    let dag = |o: Op| Op {
        mode: o.mode,
        dagger: !o.dagger,
    };
    let mut out = Vec::new();
    for i in 0..ops.len() {
        for j in 0..ops.len() {
            let c = mat[(i, j)];
            if c != cr(0.0) {
                // normal ordered, zero-point constant dropped
                let (x, y) = (dag(ops[i]), ops[j]);
                let (x, y) = if !x.dagger && y.dagger {
                    (y, x)
                } else {
                    (x, y)
                };
                out.push((c * 0.5, x, y));
            }
        }
    }
    out
}

/// The unphysical part `H′` as a list of operator products.
pub fn unphysical_operator(block: &QuadraticHamiltonianBlock) -> QuadraticOperator {
    expand(&block.unphysical, &[Mode::Beta, Mode::A3, Mode::B3])
}

/// Physical part `H_ph` for both transverse polarizations.
pub fn physical_operator(block: &QuadraticHamiltonianBlock) -> QuadraticOperator {
    let m = DMatrix::from_fn(4, 4, |i, j| block.physical[(i, j)]);
    let mut out = expand(&m, &[Mode::A1, Mode::B1]);
    out.extend(expand(&m, &[Mode::A2, Mode::B2]));
    out
}

/// `[x, H]` for a single ladder operator, as a linear combination of operators.
pub fn commutator_with(x: Op, h: &QuadraticOperator) -> Vec<(Complex64, Op)> {
    let br = |a: Op, b: Op| -> f64 {
        match (a.dagger, b.dagger) {
            (false, true) => metric(a.mode, b.mode),
            (true, false) => -metric(b.mode, a.mode),
            _ => 0.0,
        }
    };
    let mut out: Vec<(Complex64, Op)> = Vec::new();
    let mut add = |c: Complex64, o: Op| {
        if let Some(e) = out.iter_mut().find(|e| e.1 == o) {
            e.0 += c;
        } else {
            out.push((c, o));
        }
    };
    for &(c, y, z) in h {
        let cy = br(x, y);
        if cy != 0.0 {
            add(c * cy, z);
        }
        let cz = br(x, z);
        if cz != 0.0 {
            add(c * cz, y);
        }
    }
    out
}

/// `⟨Φ| H |Ψ⟩` with both states given as creator words on the vacuum.
pub fn matrix_element(phi: &[Mode], h: &QuadraticOperator, psi: &[Mode]) -> Complex64 {
    let mut sum = cr(0.0);
    for &(c, y, z) in h {
        let mut word: Vec<Op> = phi.iter().rev().map(|&m| Op::ann(m)).collect();
        word.push(y);
        word.push(z);
        word.extend(psi.iter().map(|&m| Op::cre(m)));
        sum += c * vacuum_expectation(&word);
    }
    sum
}

/// Creator words with at most two quanta built from the given modes.
pub fn small_basis(modes: &[Mode]) -> Vec<Vec<Mode>> {
    let mut out = vec![vec![]];
    for (i, &a) in modes.iter().enumerate() {
        out.push(vec![a]);
        for &b in &modes[i..] {
            out.push(vec![a, b]);
        }
    }
    out
}

pub const PHYSICAL_MODES: [Mode; 5] = [Mode::Beta, Mode::A1, Mode::A2, Mode::B1, Mode::B2];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnphysicalReport {
    pub beta_beta: f64,
    pub a3_beta: f64,
    pub d0_d0: f64,
    pub d3_d3: f64,
    /// `⟨0|d₀ d₀†|0⟩`.
    pub d0_norm: f64,
    pub states: usize,
    pub max_matrix_element: f64,
    /// Largest coefficient of `[β, H]`.
    pub beta_commutator: f64,
}

pub fn unphysical_sector_report(m: &MediumSpec, k: f64) -> Result<UnphysicalReport> {
    let block = build_mode_hamiltonian(m, k)?;
    let lad = ModeLadder;
    let l = |s: &str| lad.label(s).expect("known label");
    let beta_beta = lad.commutator(&l("beta"), &l("beta")).re;
    let a3_beta = lad.commutator(&l("a3"), &l("beta")).re;
    let d0_d0 = lad.commutator(&l("d0"), &l("d0")).re;
    let d3_d3 = lad.commutator(&l("d3"), &l("d3")).re;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let d0 = [(Mode::A3, s), (Mode::Beta, s)];
    let mut d0_norm = 0.0;
    for &(x, cx) in &d0 {
        for &(y, cy) in &d0 {
            d0_norm += cx * cy * vacuum_expectation(&[Op::ann(x), Op::cre(y)]).re;
        }
    }

    let hp = unphysical_operator(&block);
    let basis = small_basis(&PHYSICAL_MODES);
    let mut max_el: f64 = 0.0;
    for phi in &basis {
        for psi in &basis {
            let e = matrix_element(phi, &hp, psi).norm();
            if e > 1e-12 {
                return Err(Error::SectorLeak {
                    element: format!("⟨{phi:?}|H′|{psi:?}⟩"),
                    value: e,
                });
            }
            max_el = max_el.max(e);
        }
    }
    let mut full = physical_operator(&block);
    full.extend(hp);
    let comm = commutator_with(Op::ann(Mode::Beta), &full);
    let beta_commutator = comm.iter().map(|e| e.0.norm()).fold(0.0, f64::max);
    if beta_commutator > 1e-12 {
        return Err(Error::SectorLeak {
            element: "[β, H]".into(),
            value: beta_commutator,
        });
    }
    Ok(UnphysicalReport {
        beta_beta,
        a3_beta,
        d0_d0,
        d3_d3,
        d0_norm,
        states: basis.len(),
        max_matrix_element: max_el,
        beta_commutator,
    })
}

/// Mode-expansion coefficients at one wavevector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCoefficients {
    pub k: f64,
    pub p0: f64,
    /// `√(2π/p₀)`.
    pub a: f64,
    /// `√(χω₀²/(2Ω₀))`.
    pub p: f64,
    /// `(1/4π) √(2π/p₀) p₀`.
    pub b: f64,
}

pub fn build_field_operators(m: &MediumSpec, ks: &[f64]) -> Result<Vec<FieldCoefficients>> {
    let o = single_oscillator(m)?;
    let omega_big = renormalized_frequency(o, o.chi0);
    ks.iter()
        .map(|&k| {
            if !(k > 0.0) {
                return Err(Error::DegenerateWavevector);
            }
            let p0 = m.c * k;
            let a = (2.0 * PI / p0).sqrt();
            Ok(FieldCoefficients {
                k,
                p0,
                a,
                p: (o.chi0 * o.omega0 * o.omega0 / (2.0 * omega_big)).sqrt(),
                b: a * p0 / (4.0 * PI),
            })
        })
        .collect()
}

/// Mode function of a single ladder operator in a periodic box of volume
/// `volume`, for the decoupled theory (`g = 0`).
pub fn ladder_mode(m: &MediumSpec, label: Mode, k: [f64; 3], volume: f64) -> Result<PlaneWaveMode> {
    let o = single_oscillator(m)?;
    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    let coef = build_field_operators(m, &[kn])?[0];
    let box_norm = 1.0 / volume.sqrt();
    let free = MediumSpec::homogeneous_rest(OscillatorSpec::new(o.chi0, o.omega0, 0.0)?, m.c)?;
    let em = |pol: Polarization| -> Result<PlaneWaveMode> {
        let w = crate::modes::make_plane_wave(&free, k, pol, Branch::EmOnly)?;
        Ok(w.scaled(cr(coef.a * box_norm)))
    };
    let pol_mode = |pol: Polarization| -> Result<PlaneWaveMode> {
        let w = crate::modes::make_plane_wave(&free, k, pol, Branch::PolOnly(0))?;
        // free oscillator at g = 0 has Ω₀ = ω₀
        let amp = (o.chi0 * o.omega0 / 2.0).sqrt();
        Ok(w.scaled(cr(amp * box_norm)))
    };
    match label {
        Mode::A1 => em(Polarization::Transverse1),
        Mode::A2 => em(Polarization::Transverse2),
        Mode::A3 => em(Polarization::Longitudinal),
        // β is carried by the e₀ mode through B = −∂·A/ξ
        Mode::Beta => em(Polarization::Scalar),
        Mode::B1 => pol_mode(Polarization::Transverse1),
        Mode::B2 => pol_mode(Polarization::Transverse2),
        Mode::B3 => Err(Error::UnsupportedVariation(
            "longitudinal polarization quanta have no free mode function here",
        )),
    }
}
