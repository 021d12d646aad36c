//! Stationary scattering in the frame where the perturbation is at rest.
//!
//! Fields are separated as `e^{−iωt + i k_y y + i k_z z}` times functions of
//! `x`. The state vector is `W = (a^μ, α^μ, p^μ, π^μ)` with `α = a'`,
//! `π = p'`; `b` follows from the gauge condition and the multiplier is zero.
//! Feynman gauge makes the `a` equation a plain wave equation with sources.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kinematics::{FourVector, METRIC};
use crate::linalg::{eigen_clusters, max_abs, CMatrix, CVector};
use crate::medium::{integrability_check, MediumSpec};
use crate::modes::{equation_residual, Branch, PlaneWaveMode, Polarization};
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::products::{classify_value, current_density, FieldSample, NormClass};
use crate::{Error, Result, FEYNMAN_XI};

const I: Complex64 = Complex64::new(0.0, 1.0);
pub const STATE_DIM: usize = 16;

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_medium(m: &MediumSpec) -> Result<()> {
    if m.oscillators.len() != 1 {
        return Err(Error::UnsupportedVariation("more than one oscillator"));
    }
    if m.omega0_profile.is_some() {
        return Err(Error::UnsupportedVariation("the resonance frequency"));
    }
    if m.g_profile.is_some() {
        return Err(Error::UnsupportedVariation("the coupling"));
    }
    if m.v.0[2].re != 0.0 || m.v.0[3].re != 0.0 {
        return Err(Error::UnsupportedVariation("transverse medium velocity"));
    }
    if m.v.0[1].re == 0.0 {
        return Err(Error::InvalidMedium(
            "the stationary system needs the medium to move along x (v¹ ≠ 0)".into(),
        ));
    }
    Ok(())
}

/// Separated parameters of one stationary problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatedSystem {
    pub omega: f64,
    pub ky: f64,
    pub kz: f64,
}

impl SeparatedSystem {
    /// `∂_μ f` for a separated field with profile value `f` and `x`-derivative `df`.
    fn derivative(&self, c: f64, f: Complex64, df: Complex64, mu: usize) -> Complex64 {
        match mu {
            0 => -I * self.omega / c * f,
            1 => df,
            2 => I * self.ky * f,
            _ => I * self.kz * f,
        }
    }

    /// Field values and derivatives at `x` (with `t = y = z = 0`) for state `w`.
    pub fn sample(&self, c: f64, w: &CVector) -> FieldSample {
        let a = FourVector(std::array::from_fn(|mu| w[mu]));
        let al = FourVector(std::array::from_fn(|mu| w[4 + mu]));
        let p = FourVector(std::array::from_fn(|mu| w[8 + mu]));
        let pi = FourVector(std::array::from_fn(|mu| w[12 + mu]));
        let da: [FourVector; 4] = std::array::from_fn(|mu| {
            FourVector(std::array::from_fn(|nu| {
                self.derivative(c, a.0[nu], al.0[nu], mu)
            }))
        });
        let dp: [FourVector; 4] = std::array::from_fn(|mu| {
            FourVector(std::array::from_fn(|nu| {
                self.derivative(c, p.0[nu], pi.0[nu], mu)
            }))
        });
        let div: Complex64 = (0..4).map(|mu| da[mu].0[mu]).sum();
        let mut s = FieldSample::zero(1);
        s.a = a;
        s.pol[0] = p;
        s.b = -div / FEYNMAN_XI;
        s.da = da;
        s.dpol[0] = dp;
        s
    }
}

/// Reduce the field equations to the stationary form for `(ω′, k_y, k_z)`.
pub fn separate_variables(m: &MediumSpec, omega: f64, ky: f64, kz: f64) -> Result<SeparatedSystem> {
    check_medium(m)?;
    Ok(SeparatedSystem { omega, ky, kz })
}

/// `K₁₆` for susceptibility `chi` and its derivative `chi_prime`.
pub fn assemble_k(
    m: &MediumSpec,
    omega: f64,
    ky: f64,
    kz: f64,
    chi: f64,
    chi_prime: f64,
) -> CMatrix {
    let c = m.c;
    let o = m.primary();
    let (g, w0) = (o.g, o.omega0);
    let v: [f64; 4] = m.v.re();
    let vl: [f64; 4] = std::array::from_fn(|mu| v[mu] * METRIC[mu]);
    let v1 = v[1];
    let s = -I * v[0] * omega / c;
    let kk = omega * omega / (c * c) - ky * ky - kz * kz;
    // ∂_μ acting on the a or p block: (coefficient on value, coefficient on x-derivative)
    let d = |mu: usize| -> (Complex64, Complex64) {
        match mu {
            0 => (-I * omega / c, cr(0.0)),
            1 => (cr(0.0), cr(1.0)),
            2 => (I * ky, cr(0.0)),
            _ => (I * kz, cr(0.0)),
        }
    };
    let mut k = CMatrix::zeros(STATE_DIM, STATE_DIM);
    for mu in 0..4 {
        k[(mu, 4 + mu)] = cr(1.0);
        k[(8 + mu, 12 + mu)] = cr(1.0);
    }
    // a'' = −kk a + 4π(g/c)[(v·∂) p − v ∂·p]
    let ga = 4.0 * PI * g / c;
    for mu in 0..4 {
        k[(4 + mu, mu)] += -kk;
        k[(4 + mu, 8 + mu)] += ga * s;
        k[(4 + mu, 12 + mu)] += cr(ga * v1);
        for nu in 0..4 {
            let (dv, dd) = d(nu);
            k[(4 + mu, 8 + nu)] -= ga * v[mu] * dv;
            k[(4 + mu, 12 + nu)] -= ga * v[mu] * dd;
        }
    }
    // v1² p'' = −2 s v1 π − s² p + (v1 χ'/χ)(s p + v1 π) + (gχω₀²/c) v_ρF^{ρσ} − ω₀² p
    let inv = 1.0 / (v1 * v1);
    let lg = v1 * chi_prime / chi;
    let gp = g * chi * w0 * w0 / c;
    for sg in 0..4 {
        let r = 12 + sg;
        k[(r, 12 + sg)] += (-2.0 * s * v1 + lg * v1) * inv;
        k[(r, 8 + sg)] += (-s * s + lg * s - w0 * w0) * inv;
        k[(r, sg)] += gp * s * inv;
        k[(r, 4 + sg)] += cr(gp * v1 * inv);
        // − η^{σσ} ∂_σ (v_ρ a^ρ)
        let (dv, dd) = d(sg);
        for rho in 0..4 {
            k[(r, rho)] -= gp * METRIC[sg] * vl[rho] * dv * inv;
            k[(r, 4 + rho)] -= gp * METRIC[sg] * vl[rho] * dd * inv;
        }
    }
    k
}

/// Constant part `𝒞` of the stationary system, checked by substituting each
/// eigenvector back into the plane-wave field equations.
pub fn assemble_c(m: &MediumSpec, omega: f64, ky: f64, kz: f64) -> Result<CMatrix> {
    check_medium(m)?;
    let c = assemble_k(m, omega, ky, kz, m.primary().chi0, 0.0);
    let res = c_matrix_residual(m, omega, ky, kz, &c);
    if res > 1e-9 {
        return Err(Error::AssemblyInconsistent(res));
    }
    Ok(c)
}

/// Plane-wave mode of the homogeneous medium for eigenvalue `kappa = i k_x`
/// and eigenvector `w` of `𝒞`.
pub fn channel_plane_wave(
    m: &MediumSpec,
    omega: f64,
    ky: f64,
    kz: f64,
    kappa: Complex64,
    w: &CVector,
) -> PlaneWaveMode {
    let kx = -I * kappa;
    let p = FourVector([cr(omega / m.c), kx, cr(ky), cr(kz)]);
    let a = FourVector(std::array::from_fn(|mu| w[mu]));
    let pol = FourVector(std::array::from_fn(|mu| w[8 + mu]));
    let pa = crate::kinematics::minkowski_dot(&p, &a);
    PlaneWaveMode {
        p,
        polarization: Polarization::Transverse1,
        branch: Branch::EmOnly,
        a,
        pol: vec![pol],
        b: I * pa / FEYNMAN_XI,
        lambda: cr(0.0),
    }
}

fn c_matrix_residual(m: &MediumSpec, omega: f64, ky: f64, kz: f64, c: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for (kappa, vecs) in eigen_clusters(c, 1e-9) {
        for w in vecs {
            let mode = channel_plane_wave(m, omega, ky, kz, kappa, &w);
            let r = equation_residual(m, &mode, false);
            // α = κ a and π = κ p
            let scale = w.norm().max(1e-300);
            let mut d: f64 = 0.0;
            for mu in 0..4 {
                d = d.max((w[4 + mu] - kappa * w[mu]).norm() / scale);
                d = d.max((w[12 + mu] - kappa * w[8 + mu]).norm() / scale);
            }
            worst = worst.max(r).max(d);
        }
    }
    worst
}

/// Non-constant part `ℛ(x) = K₁₆(x) − 𝒞`.
pub fn assemble_r(m: &MediumSpec, omega: f64, ky: f64, kz: f64, x: f64) -> Result<CMatrix> {
    check_medium(m)?;
    let chi0 = m.primary().chi0;
    let chi = m.chi_of(0, x);
    let kx = assemble_k(m, omega, ky, kz, chi, m.perturbation.derivative(x));
    Ok(kx - assemble_k(m, omega, ky, kz, chi0, 0.0))
}

/// Hermitian matrix of the x-flux `J¹(u, w) = u† Q w` at `x`.
pub fn flux_matrix(m: &MediumSpec, sys: &SeparatedSystem, x: f64) -> CMatrix {
    let basis: Vec<FieldSample> = (0..STATE_DIM)
        .map(|i| {
            let mut e = CVector::zeros(STATE_DIM);
            e[i] = cr(1.0);
            sys.sample(m.c, &e)
        })
        .collect();
    CMatrix::from_fn(STATE_DIM, STATE_DIM, |i, j| {
        current_density(m, &basis[i], &basis[j], x, 1, true)
    })
}

pub fn flux(m: &MediumSpec, sys: &SeparatedSystem, w: &CVector, x: f64) -> Complex64 {
    let s = sys.sample(m.c, w);
    current_density(m, &s, &s, x, 1, true)
}

/// Charge density `J⁰(w, w)` of a separated solution at `x`.
pub fn density(m: &MediumSpec, sys: &SeparatedSystem, w: &CVector, x: f64) -> Complex64 {
    let s = sys.sample(m.c, w);
    current_density(m, &s, &s, x, 0, true)
}

#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub omega: f64,
    pub ky: f64,
    pub kz: f64,
    pub x_l: f64,
    pub x_r: f64,
    /// `W(x_R) = T W(x_L)`.
    pub t: CMatrix,
    /// Stretch `(enter, leave)` where the perturbation is not flat; equal
    /// points for a homogeneous medium.
    pub core: (f64, f64),
    /// Transfer matrix across `core`.
    pub t_core: CMatrix,
    pub c: CMatrix,
    /// Eigenvalues of `𝒞`, ordered by `|Im k_x|` (propagating first).
    pub eigenvalues: Vec<Complex64>,
    pub stats: OdeStats,
}

/// Endpoints `center ∓ max(40·width, 10/min|Re k_x|)`, the minimum taken over
/// the transverse-electric channels.
pub fn default_endpoints(m: &MediumSpec, omega: f64, ky: f64, kz: f64) -> Result<(f64, f64)> {
    let c = assemble_c(m, omega, ky, kz)?;
    let emb = te_embedding(ky, kz);
    let min_re = crate::linalg::eigenvalues(&(emb.adjoint() * &c * &emb))
        .iter()
        .map(|z| z.im.abs())
        .filter(|&k| k > 1e-12)
        .fold(f64::INFINITY, f64::min);
    let p = &m.perturbation;
    let mut half = 40.0 * p.width;
    if min_re.is_finite() {
        half = half.max(10.0 / min_re);
    }
    Ok((p.center - half, p.center + half))
}

/// Part of the path `x0 → x1` where the perturbation is not flat, as
/// `(enter, leave)` in the direction of travel.
pub fn core_interval(m: &MediumSpec, x0: f64, x1: f64) -> Option<(f64, f64)> {
    if m.is_homogeneous() {
        return None;
    }
    let p = &m.perturbation;
    let h = p.support_half_width();
    let (lo, hi) = (x0.min(x1), x0.max(x1));
    let (a, b) = ((p.center - h).max(lo), (p.center + h).min(hi));
    if a >= b {
        return None;
    }
    Some(if x1 >= x0 { (a, b) } else { (b, a) })
}

fn flat_propagator(m: &MediumSpec, omega: f64, ky: f64, kz: f64, len: f64) -> CMatrix {
    let c = assemble_k(m, omega, ky, kz, m.primary().chi0, 0.0);
    (&c * cr(len)).exp()
}

/// Propagate the columns of `y0` from `x0` to `x1`. Outside the support of
/// the perturbation the system is constant and is propagated with `exp(𝒞Δx)`;
/// the remaining interval is integrated adaptively.
#[allow(clippy::too_many_arguments)]
pub fn propagate(
    m: &MediumSpec,
    omega: f64,
    ky: f64,
    kz: f64,
    x0: f64,
    x1: f64,
    y0: CMatrix,
    opts: &OdeOptions,
) -> Result<(CMatrix, OdeStats)> {
    let flat = |y: CMatrix, len: f64| -> CMatrix {
        if len == 0.0 {
            y
        } else {
            flat_propagator(m, omega, ky, kz, len) * y
        }
    };
    let Some((enter, leave)) = core_interval(m, x0, x1) else {
        return Ok((
            flat(y0, x1 - x0),
            OdeStats {
                accepted: 0,
                rejected: 0,
            },
        ));
    };
    let y = flat(y0, enter - x0);
    let kfun = |x: f64| -> Result<CMatrix> {
        let chi = m.chi_of(0, x);
        if chi <= 0.0 {
            return Err(Error::NonPositiveChi { chi, x });
        }
        Ok(assemble_k(
            m,
            omega,
            ky,
            kz,
            chi,
            m.perturbation.derivative(x),
        ))
    };
    let (y, stats) = integrate(kfun, enter, leave, y, opts)?;
    Ok((flat(y, x1 - leave), stats))
}

pub fn integrate_transfer(
    m: &MediumSpec,
    omega: f64,
    ky: f64,
    kz: f64,
    x_l: f64,
    x_r: f64,
    opts: &OdeOptions,
) -> Result<TransferMatrix> {
    let c = assemble_c(m, omega, ky, kz)?;
    if !m.is_homogeneous() {
        integrability_check(m, omega, (ky, kz), x_l)?;
    }
    let core = core_interval(m, x_l, x_r).unwrap_or((x_l, x_l));
    let id = CMatrix::identity(STATE_DIM, STATE_DIM);
    let (t_core, stats) = propagate(m, omega, ky, kz, core.0, core.1, id, opts)?;
    let t = flat_propagator(m, omega, ky, kz, x_r - core.1)
        * &t_core
        * flat_propagator(m, omega, ky, kz, core.0 - x_l);
    if t.iter().any(|z| !z.is_finite()) {
        return Err(Error::EvanescentOverflow(f64::INFINITY));
    }
    let mut eigenvalues = crate::linalg::eigenvalues(&c);
    eigenvalues.sort_by(|a, b| {
        a.re.abs()
            .partial_cmp(&b.re.abs())
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(TransferMatrix {
        omega,
        ky,
        kz,
        x_l,
        x_r,
        t,
        core,
        t_core,
        c,
        eigenvalues,
        stats,
    })
}

/// Unit polarization perpendicular to x and to `(k_y, k_z)`.
pub fn te_direction(ky: f64, kz: f64) -> FourVector {
    let n = (ky * ky + kz * kz).sqrt();
    if n == 0.0 {
        FourVector::real([0.0, 0.0, 0.0, 1.0])
    } else {
        FourVector::real([0.0, 0.0, -kz / n, ky / n])
    }
}

/// 16×4 embedding of the transverse-electric block `(a, α, p, π)·e`.
pub fn te_embedding(ky: f64, kz: f64) -> CMatrix {
    let e = te_direction(ky, kz);
    let mut p = CMatrix::zeros(STATE_DIM, 4);
    for blk in 0..4 {
        for mu in 0..4 {
            p[(4 * blk + mu, blk)] = e.0[mu];
        }
    }
    p
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Channel {
    pub kx: Complex64,
    pub propagating: bool,
    /// Sign of the scalar-product norm.
    pub norm: NormClass,
    /// Sign of the x-flux; zero for evanescent channels.
    pub flux_sign: i8,
    /// `+1` moving towards `+x`, `−1` towards `−x`.
    pub direction: i8,
}

#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub channels: Vec<Channel>,
    /// Columns are the channel eigenvectors in the 4-dimensional block,
    /// normalized to unit flux for propagating channels.
    pub vectors: CMatrix,
    pub embedding: CMatrix,
}

/// Asymptotic transverse-electric channels of the homogeneous medium.
pub fn channels(m: &MediumSpec, omega: f64, ky: f64, kz: f64) -> Result<ChannelSet> {
    let c = assemble_c(m, omega, ky, kz)?;
    let emb = te_embedding(ky, kz);
    let block = emb.adjoint() * &c * &emb;
    let clusters = eigen_clusters(&block, 1e-12);
    let mut eig: Vec<(Complex64, CVector)> = Vec::new();
    for (kappa, vecs) in clusters {
        if vecs.len() != 1 {
            return Err(Error::ChannelDegeneracy(eig.len(), eig.len() + 1));
        }
        eig.push((kappa, vecs[0].clone()));
    }
    if eig.len() != 4 {
        return Err(Error::ChannelDegeneracy(0, 1));
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            if (eig[i].0 - eig[j].0).norm() < 1e-10 {
                return Err(Error::ChannelDegeneracy(i, j));
            }
        }
    }
    // sort by Re k_x
    eig.sort_by(|a, b| a.0.im.partial_cmp(&b.0.im).unwrap());
    let sys = SeparatedSystem { omega, ky, kz };
    let x_far = m.perturbation.center + m.perturbation.flat_beyond();
    let hom = m.with_perturbation(crate::medium::PerturbationProfile::none())?;
    let mut vectors = CMatrix::zeros(4, 4);
    let mut out = Vec::new();
    for (i, (kappa, v)) in eig.into_iter().enumerate() {
        let kx = -I * kappa;
        let scale = kx.norm().max(omega.abs() / m.c).max(1e-300);
        let propagating = kx.im.abs() <= 1e-10 * scale;
        let mut w16 = &emb * &v;
        let f = flux(&hom, &sys, &w16, x_far).re;
        let mut v = v;
        let (flux_sign, direction) = if propagating {
            let n = f.abs().sqrt();
            v /= cr(n);
            w16 /= cr(n);
            (f.signum() as i8, 0)
        } else {
            (0, if kx.im > 0.0 { 1 } else { -1 })
        };
        let rho = density(&hom, &sys, &w16, x_far);
        let norm = classify_value(rho, w16.norm() * w16.norm(), 1e-10);
        let direction = if propagating {
            let sgn = match norm {
                NormClass::Particle => 1,
                NormClass::Antiparticle => -1,
                NormClass::ZeroNorm => 0,
            };
            flux_sign * sgn
        } else {
            direction
        };
        vectors.set_column(i, &v);
        out.push(Channel {
            kx,
            propagating,
            norm,
            flux_sign,
            direction,
        });
    }
    Ok(ChannelSet {
        channels: out,
        vectors,
        embedding: emb,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoefficientKind {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BogoliubovEntry {
    pub channel_in: usize,
    pub channel_out: usize,
    pub kind: CoefficientKind,
    pub value: Complex64,
}

#[derive(Debug, Clone)]
pub struct BogoliubovCoefficients {
    pub entries: Vec<BogoliubovEntry>,
    /// Channel transfer matrix in the interaction picture, over `propagating`.
    pub t_channel: CMatrix,
    /// Indices of the propagating channels.
    pub propagating: Vec<usize>,
    /// Flux signs of the propagating channels.
    pub signs: Vec<i8>,
    /// `max |T̃ S T̃† − S|` over propagating channels.
    pub pseudo_unitarity_residual: f64,
}

impl BogoliubovCoefficients {
    pub fn max_beta(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.kind == CoefficientKind::Beta)
            .map(|e| e.value.norm())
            .fold(0.0, f64::max)
    }
}

/// Channel transfer matrix between the asymptotic regions, reduced to the
/// propagating channels. Evanescent channels are eliminated by requiring that
/// nothing grows away from the perturbation on either side.
struct CoreMap {
    /// `E⁻¹ T_core E` over the four channels.
    m: CMatrix,
    prop: Vec<usize>,
    /// Evanescent channels growing to the right (`Im k_x < 0`).
    grow: Vec<usize>,
    /// Admixture of `grow` at the core entry per unit propagating amplitude.
    admix: CMatrix,
}

fn core_map(tm: &TransferMatrix, ch: &ChannelSet) -> Result<CoreMap> {
    let t_te = ch.embedding.adjoint() * &tm.t_core * &ch.embedding;
    let e = &ch.vectors;
    let e_inv = e
        .clone()
        .try_inverse()
        .ok_or(Error::ChannelDegeneracy(0, 1))?;
    let m = e_inv * t_te * e;
    let prop: Vec<usize> = (0..4).filter(|&i| ch.channels[i].propagating).collect();
    // Im k_x < 0 grows to the right: allowed on the left, excluded on the right
    let grow: Vec<usize> = (0..4)
        .filter(|&i| !ch.channels[i].propagating && ch.channels[i].kx.im < 0.0)
        .collect();
    let sub = |rows: &[usize], cols: &[usize]| {
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
    };
    let admix = if grow.is_empty() {
        CMatrix::zeros(0, prop.len())
    } else {
        let gg = sub(&grow, &grow)
            .try_inverse()
            .ok_or(Error::ChannelDegeneracy(grow[0], grow[0]))?;
        -(gg * sub(&grow, &prop))
    };
    Ok(CoreMap {
        m,
        prop,
        grow,
        admix,
    })
}

/// State at `tm.x_l` of the stationary solution with unit amplitude in the
/// propagating `channel` on the left and no growing evanescent part on either
/// side.
pub fn scattering_state(tm: &TransferMatrix, ch: &ChannelSet, channel: usize) -> Result<CVector> {
    let cm = core_map(tm, ch)?;
    let j = cm
        .prop
        .iter()
        .position(|&i| i == channel)
        .ok_or_else(|| Error::InvalidMedium(format!("channel {channel} is not propagating")))?;
    let a = tm.core.0;
    let mut b = CVector::zeros(4);
    // amplitudes at the core entry, carried back to x_l
    b[channel] = (I * ch.channels[channel].kx * a).exp();
    for (g, &gi) in cm.grow.iter().enumerate() {
        b[gi] = cm.admix[(g, j)] * b[channel];
    }
    for i in 0..4 {
        b[i] *= (I * ch.channels[i].kx * (tm.x_l - a)).exp();
    }
    Ok(&ch.embedding * (&ch.vectors * b))
}

pub fn extract_bogoliubov(tm: &TransferMatrix, ch: &ChannelSet) -> Result<BogoliubovCoefficients> {
    let CoreMap {
        m,
        prop,
        grow,
        admix,
    } = core_map(tm, ch)?;
    let sub = |rows: &[usize], cols: &[usize]| {
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
    };
    let mut reduced = sub(&prop, &prop);
    if !grow.is_empty() {
        reduced += sub(&prop, &grow) * admix;
    }
    let (a, b) = tm.core;
    let t = CMatrix::from_fn(prop.len(), prop.len(), |i, j| {
        let (ki, kj) = (ch.channels[prop[i]].kx, ch.channels[prop[j]].kx);
        (-I * ki * b).exp() * reduced[(i, j)] * (I * kj * a).exp()
    });
    let signs: Vec<i8> = prop.iter().map(|&i| ch.channels[i].flux_sign).collect();
    let n = prop.len();
    let mut res: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s: Complex64 = (0..n)
                .map(|k| t[(i, k)] * signs[k] as f64 * t[(j, k)].conj())
                .sum();
            let target = if i == j { signs[i] as f64 } else { 0.0 };
            res = res.max((s - target).norm());
        }
    }
    let mut entries = Vec::new();
    for (i, &ci) in prop.iter().enumerate() {
        for (j, &cj) in prop.iter().enumerate() {
            let kind = if ch.channels[ci].norm == ch.channels[cj].norm {
                CoefficientKind::Alpha
            } else {
                CoefficientKind::Beta
            };
            entries.push(BogoliubovEntry {
                channel_in: cj,
                channel_out: ci,
                kind,
                value: t[(i, j)],
            });
        }
    }
    Ok(BogoliubovCoefficients {
        entries,
        t_channel: t,
        propagating: prop,
        signs,
        pseudo_unitarity_residual: res,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluxReport {
    pub samples: Vec<(f64, f64)>,
    pub drift: f64,
}

/// Propagate `w0` from `x_l` through `n` sample points up to `x_r` and report
/// the largest relative change of `J¹`.
#[allow(clippy::too_many_arguments)]
pub fn flux_conservation_check(
    m: &MediumSpec,
    omega: f64,
    ky: f64,
    kz: f64,
    w0: &CVector,
    x_l: f64,
    x_r: f64,
    n: usize,
    opts: &OdeOptions,
) -> Result<FluxReport> {
    let sys = separate_variables(m, omega, ky, kz)?;
    let mut w = CMatrix::from_column_slice(STATE_DIM, 1, w0.as_slice());
    let mut x = x_l;
    let f0 = flux(m, &sys, w0, x_l).re;
    let mut samples = vec![(x_l, f0)];
    let scale = f0.abs().max(1e-300);
    let mut drift: f64 = 0.0;
    let n = n.max(1);
    for i in 1..=n {
        let xn = x_l + (x_r - x_l) * i as f64 / n as f64;
        w = propagate(m, omega, ky, kz, x, xn, w, opts)?.0;
        x = xn;
        let col = w.column(0).into_owned();
        let f = flux(m, &sys, &col, x).re;
        drift = drift.max((f - f0).abs() / scale);
        samples.push((x, f));
    }
    Ok(FluxReport { samples, drift })
}

/// Largest entry of `T† Q T − Q` relative to `max|Q|`, with `Q` at the endpoints.
pub fn transfer_flux_residual(m: &MediumSpec, tm: &TransferMatrix) -> f64 {
    let sys = SeparatedSystem {
        omega: tm.omega,
        ky: tm.ky,
        kz: tm.kz,
    };
    let ql = flux_matrix(m, &sys, tm.x_l);
    let qr = flux_matrix(m, &sys, tm.x_r);
    let d = tm.t.adjoint() * &qr * &tm.t - &ql;
    max_abs(&d) / max_abs(&ql).max(1e-300) / max_abs(&tm.t).powi(2).max(1.0)
}
