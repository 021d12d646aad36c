//! Dispersion relation and plane-wave solutions of the homogeneous model.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kinematics::{
    boost_vector, build_gitman_tyutin_basis, minkowski_dot, transverse_pair, Boost, FourVector,
    METRIC,
};
use crate::medium::MediumSpec;
use crate::products::FieldSample;
use crate::{Error, Result, FEYNMAN_XI};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dispersion branch label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Lower,
    /// Intermediate coupled branch, counted from 1 above the lower one.
    Middle(usize),
    Upper,
    /// Light line of a fully decoupled field, `ω = c|k|`.
    EmOnly,
    /// Flat branch `ω = ω₀` of a decoupled oscillator.
    PolOnly(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchRoot {
    pub branch: Branch,
    pub omega: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionBranch {
    pub branch: Branch,
    /// `(|k|, ω)` pairs.
    pub samples: Vec<(f64, f64)>,
    pub max_residual: f64,
}

/// Transverse-sector field matrix at rest-frame frequency `ω` and `|k|² = k2`.
///
/// Unknowns are `(A, P₁, …, P_N)` along one transverse polarization.
pub fn field_matrix(m: &MediumSpec, omega: Complex64, k2: Complex64) -> DMatrix<Complex64> {
    let n = m.oscillators.len();
    let c = m.c;
    let mut mat = DMatrix::zeros(n + 1, n + 1);
    mat[(0, 0)] = -(k2 - omega * omega / (c * c)) / (4.0 * PI);
    for (j, o) in m.oscillators.iter().enumerate() {
        mat[(0, j + 1)] = I * o.g * omega / c;
        mat[(j + 1, 0)] = -I * o.g * omega / c;
        mat[(j + 1, j + 1)] =
            (omega * omega - o.omega0 * o.omega0) / (o.chi0 * o.omega0 * o.omega0);
    }
    mat
}

/// Secular function `det M / Π_j d_j` in the medium rest frame, where `d_j` is
/// the bare oscillator entry. Zero on shell.
pub fn secular_residual(m: &MediumSpec, omega: Complex64, k2: Complex64) -> Complex64 {
    let mat = field_matrix(m, omega, k2);
    let mut d = Complex64::new(1.0, 0.0);
    for j in 1..mat.nrows() {
        d *= mat[(j, j)];
    }
    mat.determinant() / d
}

/// Secular function for a wave four-vector `p` in an arbitrary frame:
/// `ω_r = v·p`, `|k_r|² = ω_r²/c² − p·p`.
pub fn covariant_secular(m: &MediumSpec, p: &FourVector) -> Complex64 {
    let omega_r = minkowski_dot(&m.v, p);
    let k2 = omega_r * omega_r / (m.c * m.c) - minkowski_dot(p, p);
    secular_residual(m, omega_r, k2)
}

// same function in closed form, real s = ω²
fn secular_real(m: &MediumSpec, s: f64, k2: f64, coupled: &[usize]) -> f64 {
    let c2 = m.c * m.c;
    let mut f = -(k2 - s / c2) / (4.0 * PI);
    for &j in coupled {
        let o = &m.oscillators[j];
        let w2 = o.omega0 * o.omega0;
        f -= o.g * o.g * s * o.chi0 * w2 / (c2 * (s - w2));
    }
    f
}

fn relative_residual(m: &MediumSpec, omega: f64, k: f64) -> f64 {
    let f = secular_residual(m, Complex64::from(omega), Complex64::from(k * k));
    let scale = (k * k + omega * omega / (m.c * m.c)) / (4.0 * PI);
    if scale == 0.0 {
        f.norm()
    } else {
        f.norm() / scale
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) < 0 < f(hi)
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All positive-frequency roots at wavenumber `|k| = k` in the medium rest
/// frame, ascending in `ω`.
pub fn dispersion_solve(m: &MediumSpec, k: f64) -> Result<Vec<BranchRoot>> {
    if !m.is_rest_frame() || !m.is_homogeneous() {
        return Err(Error::InvalidMedium(
            "dispersion_solve needs a homogeneous medium at rest".into(),
        ));
    }
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidMedium(format!(
            "wavenumber must be finite and non-negative (got {k})"
        )));
    }
    let k2 = k * k;
    let mut coupled: Vec<usize> = (0..m.oscillators.len())
        .filter(|&j| m.oscillators[j].g != 0.0)
        .collect();
    coupled.sort_by(|&a, &b| {
        m.oscillators[a]
            .omega0
            .partial_cmp(&m.oscillators[b].omega0)
            .unwrap()
    });
    let poles: Vec<f64> = coupled
        .iter()
        .map(|&j| m.oscillators[j].omega0.powi(2))
        .collect();
    let f = |s: f64| secular_real(m, s, k2, &coupled);

    let mut roots: Vec<f64> = Vec::new();
    if coupled.is_empty() {
        roots.push(m.c * k);
    } else {
        let mut lower = 0.0;
        for i in 0..=poles.len() {
            let lo = if i == 0 {
                0.0
            } else {
                poles[i - 1] * (1.0 + 1e-15)
            };
            let s = if i == 0 && k == 0.0 {
                0.0
            } else if i < poles.len() {
                let hi = poles[i] * (1.0 - 1e-15);
                bisect(f, lo.max(lower), hi)
            } else {
                let mut hi = (2.0 * lo).max(2.0 * m.c * m.c * k2).max(1.0);
                let mut doublings = 0;
                while f(hi) < 0.0 {
                    hi *= 2.0;
                    doublings += 1;
                    if doublings > 2000 || !hi.is_finite() {
                        return Err(Error::NoConvergence(format!("no upper bracket at k = {k}")));
                    }
                }
                bisect(f, lo, hi)
            };
            lower = s;
            roots.push(s.sqrt());
        }
    }

    let ncoupled = roots.len();
    let mut out: Vec<BranchRoot> = roots
        .into_iter()
        .enumerate()
        .map(|(i, omega)| {
            let branch = if coupled.is_empty() {
                Branch::EmOnly
            } else if i == 0 {
                Branch::Lower
            } else if i + 1 == ncoupled {
                Branch::Upper
            } else {
                Branch::Middle(i)
            };
            BranchRoot {
                branch,
                omega,
                residual: relative_residual(m, omega, k),
            }
        })
        .collect();
    for (j, o) in m.oscillators.iter().enumerate() {
        if o.g == 0.0 {
            out.push(BranchRoot {
                branch: Branch::PolOnly(j),
                omega: o.omega0,
                residual: 0.0,
            });
        }
    }
    out.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
    Ok(out)
}

/// Sample every branch over a set of wavenumbers.
pub fn dispersion_scan(m: &MediumSpec, ks: &[f64]) -> Result<Vec<DispersionBranch>> {
    let mut out: Vec<DispersionBranch> = Vec::new();
    for &k in ks {
        for r in dispersion_solve(m, k)? {
            match out.iter_mut().find(|b| b.branch == r.branch) {
                Some(b) => {
                    b.samples.push((k, r.omega));
                    b.max_residual = b.max_residual.max(r.residual);
                }
                None => out.push(DispersionBranch {
                    branch: r.branch,
                    samples: vec![(k, r.omega)],
                    max_residual: r.residual,
                }),
            }
        }
    }
    Ok(out)
}

/// `|P|/|A|` on a transverse plane wave of frequency `ω` for oscillator `j`.
pub fn polarization_ratio(m: &MediumSpec, j: usize, omega: f64) -> f64 {
    let o = &m.oscillators[j];
    let w2 = o.omega0 * o.omega0;
    (o.g * o.chi0 * w2 * omega / (m.c * (w2 - omega * omega))).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarization {
    Transverse1,
    Transverse2,
    /// `e₀` of the null tetrad; only on the light line of a decoupled field.
    Scalar,
    /// Pure gauge `e₃ ∝ p`; on the light line.
    Longitudinal,
}

/// Plane wave `X e^{−i p·x}` with every field amplitude listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveMode {
    /// Wave four-vector `(ω/c, k)`; a negative time component marks a
    /// negative-frequency solution.
    pub p: FourVector,
    pub polarization: Polarization,
    pub branch: Branch,
    pub a: FourVector,
    /// One amplitude per oscillator.
    pub pol: Vec<FourVector>,
    pub b: Complex64,
    pub lambda: Complex64,
}

impl PlaneWaveMode {
    /// Lab-frame angular frequency `c p⁰`.
    pub fn omega(&self, c: f64) -> f64 {
        c * self.p.0[0].re
    }

    pub fn wavevector(&self) -> [f64; 3] {
        [self.p.0[1].re, self.p.0[2].re, self.p.0[3].re]
    }

    /// Complex-conjugate solution `X* e^{+i p·x}`.
    pub fn conjugate(&self) -> Self {
        PlaneWaveMode {
            p: -self.p,
            polarization: self.polarization,
            branch: self.branch,
            a: self.a.conj(),
            pol: self.pol.iter().map(|v| v.conj()).collect(),
            b: self.b.conj(),
            lambda: self.lambda.conj(),
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        PlaneWaveMode {
            p: self.p,
            polarization: self.polarization,
            branch: self.branch,
            a: self.a * s,
            pol: self.pol.iter().map(|v| *v * s).collect(),
            b: self.b * s,
            lambda: self.lambda * s,
        }
    }

    /// Field values and first derivatives at `x = (ct, x, y, z)`.
    pub fn sample(&self, x: [f64; 4]) -> FieldSample {
        let pr = self.p.re();
        let phase_arg = pr[0] * x[0] - pr[1] * x[1] - pr[2] * x[2] - pr[3] * x[3];
        let phase = Complex64::from_polar(1.0, -phase_arg);
        let pl = self.p.lower();
        let d: [Complex64; 4] = std::array::from_fn(|mu| -I * pl.0[mu]);
        let a = self.a * phase;
        let pol: Vec<FourVector> = self.pol.iter().map(|v| *v * phase).collect();
        FieldSample {
            da: std::array::from_fn(|mu| a * d[mu]),
            dpol: pol
                .iter()
                .map(|v| std::array::from_fn(|mu| *v * d[mu]))
                .collect(),
            db: std::array::from_fn(|mu| self.b * phase * d[mu]),
            a,
            pol,
            b: self.b * phase,
            lambda: self.lambda * phase,
        }
    }
}

/// Construct a plane-wave solution in the medium rest frame.
///
/// Transverse modes are normalized to `|A| = 1`. Scalar and longitudinal
/// modes use the null-tetrad vectors directly and exist only on the light
/// line; the scalar one additionally needs every coupling to vanish.
pub fn make_plane_wave(
    m: &MediumSpec,
    k: [f64; 3],
    polarization: Polarization,
    branch: Branch,
) -> Result<PlaneWaveMode> {
    if !m.is_rest_frame() {
        return Err(Error::InvalidMedium(
            "plane waves are built in the medium rest frame".into(),
        ));
    }
    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if kn == 0.0 {
        return Err(Error::DegenerateWavevector);
    }
    let c = m.c;
    let n = m.oscillators.len();
    let mode = match polarization {
        Polarization::Transverse1 | Polarization::Transverse2 => {
            let roots = dispersion_solve(m, kn)?;
            let root = roots.iter().find(|r| r.branch == branch).ok_or_else(|| {
                Error::InvalidMedium(format!("branch {branch:?} does not exist for this medium"))
            })?;
            let omega = root.omega;
            for o in &m.oscillators {
                let w2 = o.omega0 * o.omega0;
                if o.g != 0.0 && (w2 - omega * omega).abs() < 1e-12 * w2 {
                    return Err(Error::ResonanceSingularity {
                        omega,
                        omega0: o.omega0,
                    });
                }
            }
            let (e1, e2) = transverse_pair(k)?;
            let e = if polarization == Polarization::Transverse1 {
                e1
            } else {
                e2
            };
            let p = FourVector::real([omega / c, k[0], k[1], k[2]]);
            let (a, pol) = match branch {
                Branch::PolOnly(j) => {
                    let mut pol = vec![FourVector::ZERO; n];
                    pol[j] = FourVector::real([0.0, e[0], e[1], e[2]]);
                    (FourVector::ZERO, pol)
                }
                _ => {
                    let a = FourVector::real([0.0, e[0], e[1], e[2]]);
                    let pol = m
                        .oscillators
                        .iter()
                        .map(|o| {
                            let w2 = o.omega0 * o.omega0;
                            let r = -I * o.g * o.chi0 * w2 * (omega / c) / (w2 - omega * omega);
                            a * r
                        })
                        .collect();
                    (a, pol)
                }
            };
            PlaneWaveMode {
                p,
                polarization,
                branch,
                a,
                pol,
                b: Complex64::new(0.0, 0.0),
                lambda: Complex64::new(0.0, 0.0),
            }
        }
        Polarization::Scalar | Polarization::Longitudinal => {
            let p = FourVector::real([kn, k[0], k[1], k[2]]);
            let basis = build_gitman_tyutin_basis(&p)?;
            let a = if polarization == Polarization::Scalar {
                basis.vectors[0]
            } else {
                basis.vectors[3]
            };
            let b = I / FEYNMAN_XI * minkowski_dot(&p, &a);
            PlaneWaveMode {
                p,
                polarization,
                branch: Branch::EmOnly,
                a,
                pol: vec![FourVector::ZERO; n],
                b,
                lambda: Complex64::new(0.0, 0.0),
            }
        }
    };
    let res = plane_wave_residual(m, &mode);
    if res > 1e-9 {
        return Err(Error::OffShell(res));
    }
    Ok(mode)
}

/// Largest relative residual of the field equations, the gauge condition
/// and `v·P = 0` for a plane wave in a homogeneous medium moving with `m.v`.
pub fn plane_wave_residual(m: &MediumSpec, mode: &PlaneWaveMode) -> f64 {
    equation_residual(m, mode, true)
}

/// As [`plane_wave_residual`]; `transversality = false` skips the `v·P = 0`
/// check, for solutions of the system with the multiplier set to zero.
pub fn equation_residual(m: &MediumSpec, mode: &PlaneWaveMode, transversality: bool) -> f64 {
    let c = m.c;
    let v = m.v;
    let vl = v.lower();
    let p = mode.p;
    let pp = minkowski_dot(&p, &p);
    let pa = minkowski_dot(&p, &mode.a);
    let vp = minkowski_dot(&v, &p);
    // F^{μν} = −i(p^μ A^ν − p^ν A^μ)
    let f = |mu: usize, nu: usize| -I * (p.0[mu] * mode.a.0[nu] - p.0[nu] * mode.a.0[mu]);
    let vf: [Complex64; 4] = std::array::from_fn(|nu| (0..4).map(|r| vl.0[r] * f(r, nu)).sum());

    let mut worst: f64 = 0.0;
    let pn = p.max_abs();
    let an = mode.a.max_abs();
    let vn = v.max_abs();
    // floors keep exact cancellations of rounding-level terms from counting
    let mut check = |terms: &[Complex64], floor: f64| {
        let total: Complex64 = terms.iter().sum();
        let scale = terms.iter().map(|z| z.norm()).fold(floor, f64::max);
        if scale > 0.0 {
            worst = worst.max(total.norm() / scale);
        }
    };

    for nu in 0..4 {
        let mut terms = vec![
            (mode.a.0[nu] * pp - p.0[nu] * pa) / (4.0 * PI),
            -I * p.0[nu] * mode.b,
        ];
        for (o, pj) in m.oscillators.iter().zip(&mode.pol) {
            terms.push(-(o.g / c) * (-I * vp) * pj.0[nu]);
            terms.push(v.0[nu] * (o.g / c) * (-I * minkowski_dot(&p, pj)));
        }
        let source: f64 = m
            .oscillators
            .iter()
            .zip(&mode.pol)
            .map(|(o, pj)| (o.g / c) * (vp.norm() + vn * pn) * pj.max_abs())
            .sum();
        check(&terms, pn * pn * an / (4.0 * PI) + source);
    }
    for (o, pj) in m.oscillators.iter().zip(&mode.pol) {
        let w2 = o.omega0 * o.omega0;
        let floor = pj.max_abs() / o.chi0 + (o.g / c) * vn * pn * an;
        for nu in 0..4 {
            check(
                &[
                    vp * vp / (o.chi0 * w2) * pj.0[nu],
                    -pj.0[nu] / o.chi0,
                    (o.g / c) * vf[nu],
                    -mode.lambda * v.0[nu],
                ],
                floor,
            );
        }
        if transversality {
            let vpj: Vec<Complex64> = (0..4).map(|mu| v.0[mu] * pj.0[mu] * METRIC[mu]).collect();
            check(&vpj, vn * pj.max_abs());
        }
    }
    // ∂·A + ξB = 0
    check(&[-I * pa, FEYNMAN_XI * mode.b], pn * an);
    worst
}

/// Apply a Lorentz boost to every vector amplitude and the wave vector.
pub fn boost_mode(mode: &PlaneWaveMode, b: &Boost) -> PlaneWaveMode {
    PlaneWaveMode {
        p: boost_vector(b, &mode.p),
        polarization: mode.polarization,
        branch: mode.branch,
        a: boost_vector(b, &mode.a),
        pol: mode.pol.iter().map(|v| boost_vector(b, v)).collect(),
        b: mode.b,
        lambda: mode.lambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::Axis;
    use crate::medium::OscillatorSpec;

    fn medium(chi: f64, w0: f64, g: f64) -> MediumSpec {
        MediumSpec::homogeneous_rest(OscillatorSpec::new(chi, w0, g).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn decoupled_branches_are_exact() {
        let m = medium(0.5, 1.3, 0.0);
        let r = dispersion_solve(&m, 2.0).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].branch, Branch::PolOnly(0));
        assert_eq!(r[0].omega, 1.3);
        assert_eq!(r[1].branch, Branch::EmOnly);
        assert_eq!(r[1].omega, 2.0);
    }

    #[test]
    fn determinant_matches_closed_form() {
        let m = medium(0.7, 1.1, 0.8);
        for &(w, k) in &[(0.3, 0.5), (1.7, 2.0), (0.9, 0.1)] {
            let det = secular_residual(&m, Complex64::from(w), Complex64::from(k * k));
            let closed = secular_real(&m, w * w, k * k, &[0]);
            assert!((det.re - closed).abs() < 1e-12 * closed.abs().max(1.0));
            assert!(det.im.abs() < 1e-12);
        }
    }

    #[test]
    fn lower_and_upper_roots_bracket_resonance() {
        let m = medium(1.0, 1.0, 1.0);
        let big_omega = crate::medium::renormalized_frequency(m.primary(), 1.0);
        for &k in &[0.1, 1.0, 5.0] {
            let r = dispersion_solve(&m, k).unwrap();
            assert_eq!(r.len(), 2);
            assert!(r[0].omega < 1.0 && r[1].omega > big_omega - 1e-12);
            assert!(r.iter().all(|x| x.residual < 1e-12));
        }
    }

    #[test]
    fn plane_waves_solve_field_equations() {
        let m = medium(0.4, 2.0, 0.6);
        for br in [Branch::Lower, Branch::Upper] {
            for pol in [Polarization::Transverse1, Polarization::Transverse2] {
                let w = make_plane_wave(&m, [0.3, -1.2, 0.7], pol, br).unwrap();
                assert!(plane_wave_residual(&m, &w) < 1e-12);
                assert!(plane_wave_residual(&m, &w.conjugate()) < 1e-12);
            }
        }
        let m0 = medium(0.4, 2.0, 0.0);
        for pol in [Polarization::Scalar, Polarization::Longitudinal] {
            let w = make_plane_wave(&m0, [0.0, 0.0, 1.5], pol, Branch::EmOnly).unwrap();
            assert!(plane_wave_residual(&m0, &w) < 1e-12);
        }
        assert!(matches!(
            make_plane_wave(&m, [0.0, 0.0, 1.5], Polarization::Scalar, Branch::EmOnly),
            Err(Error::OffShell(_))
        ));
    }

    #[test]
    fn boosted_mode_stays_on_shell() {
        let m = medium(0.4, 2.0, 0.6);
        let w = make_plane_wave(
            &m,
            [0.5, 0.2, 0.0],
            Polarization::Transverse1,
            Branch::Lower,
        )
        .unwrap();
        let b = Boost::new(0.6, Axis::X, 1.0).unwrap();
        let v2 = boost_vector(&b, &m.v);
        let m2 = m.with_velocity(v2).unwrap();
        let w2 = boost_mode(&w, &b);
        assert!(plane_wave_residual(&m2, &w2) < 1e-12);
        assert!(covariant_secular(&m2, &w2.p).norm() < 1e-12);
    }

    #[test]
    fn polarization_ratio_matches_amplitude() {
        let m = medium(0.4, 2.0, 0.6);
        let w = make_plane_wave(
            &m,
            [1.0, 0.0, 0.0],
            Polarization::Transverse1,
            Branch::Lower,
        )
        .unwrap();
        let ratio = w.pol[0].max_abs() / w.a.max_abs();
        assert!((ratio - polarization_ratio(&m, 0, w.omega(1.0))).abs() < 1e-12 * ratio);
    }
}
