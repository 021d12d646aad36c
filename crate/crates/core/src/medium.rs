//! Dielectric medium: Hopfield oscillators, bulk four-velocity and a
//! localized susceptibility perturbation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{minkowski_dot, FourVector};

/// One harmonic polarization oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    /// Static susceptibility (dimensionless).
    pub chi0: f64,
    /// Resonance angular frequency.
    pub omega0: f64,
    /// Light–matter coupling (dimensionless).
    pub g: f64,
}

impl OscillatorSpec {
    pub fn new(chi0: f64, omega0: f64, g: f64) -> Result<Self> {
        if !(chi0 > 0.0) || !(omega0 > 0.0) || !(g >= 0.0) {
            return Err(Error::InvalidMedium(format!(
                "oscillator needs chi0 > 0, omega0 > 0, g >= 0 (got {chi0}, {omega0}, {g})"
            )));
        }
        Ok(OscillatorSpec { chi0, omega0, g })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    None,
    /// `exp(−((x − x₀)/w)²)`
    Gaussian,
    /// `sech²((x − x₀)/w)`
    Sech2,
    /// Plateau of half-width `w` with tanh edges of length `w/4`.
    TanhStepPair,
}

/// Localized shape `δχ · shape(x)` with `shape ∈ [0, 1]` and `shape → 0` at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationProfile {
    pub kind: ProfileKind,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
}

impl PerturbationProfile {
    pub fn none() -> Self {
        PerturbationProfile {
            kind: ProfileKind::None,
            amplitude: 0.0,
            width: 1.0,
            center: 0.0,
        }
    }

    pub fn new(kind: ProfileKind, amplitude: f64, width: f64, center: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() || !center.is_finite() {
            return Err(Error::InvalidMedium(format!(
                "profile width must be positive and parameters finite (width {width})"
            )));
        }
        Ok(PerturbationProfile {
            kind,
            amplitude,
            width,
            center,
        })
    }

    fn edge(&self) -> f64 {
        self.width / 4.0
    }

    pub fn shape(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        match self.kind {
            ProfileKind::None => 0.0,
            ProfileKind::Gaussian => (-s * s).exp(),
            ProfileKind::Sech2 => {
                let sech = 1.0 / s.cosh();
                sech * sech
            }
            ProfileKind::TanhStepPair => {
                let e = self.edge();
                let d = x - self.center;
                0.5 * (((d + self.width) / e).tanh() - ((d - self.width) / e).tanh())
            }
        }
    }

    pub fn shape_prime(&self, x: f64) -> f64 {
        let w = self.width;
        let s = (x - self.center) / w;
        match self.kind {
            ProfileKind::None => 0.0,
            ProfileKind::Gaussian => -2.0 * s / w * (-s * s).exp(),
            ProfileKind::Sech2 => {
                let sech = 1.0 / s.cosh();
                -2.0 / w * sech * sech * s.tanh()
            }
            ProfileKind::TanhStepPair => {
                let e = self.edge();
                let d = x - self.center;
                let s1 = 1.0 / ((d + w) / e).cosh();
                let s2 = 1.0 / ((d - w) / e).cosh();
                0.5 / e * (s1 * s1 - s2 * s2)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.amplitude * self.shape(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.amplitude * self.shape_prime(x)
    }

    /// Half-width around `center` outside which the shape and its slope are
    /// below `1e-16`.
    pub fn support_half_width(&self) -> f64 {
        match self.kind {
            ProfileKind::None => 0.0,
            ProfileKind::Gaussian => 6.5 * self.width,
            ProfileKind::Sech2 => 20.5 * self.width,
            ProfileKind::TanhStepPair => 6.5 * self.width,
        }
    }

    /// Point beyond which the profile is flat to double precision.
    pub fn flat_beyond(&self) -> f64 {
        40.0 * self.width
    }
}

/// Homogeneous background plus a susceptibility perturbation on oscillator 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    pub oscillators: Vec<OscillatorSpec>,
    /// Bulk four-velocity, `v·v = c²`.
    pub v: FourVector,
    pub perturbation: PerturbationProfile,
    pub c: f64,
    /// Resonance-frequency profile. Accepted here, rejected by the stationary solver.
    #[serde(default)]
    pub omega0_profile: Option<PerturbationProfile>,
    /// Coupling profile. Accepted here, rejected by the stationary solver.
    #[serde(default)]
    pub g_profile: Option<PerturbationProfile>,
}

impl MediumSpec {
    pub fn new(
        oscillators: Vec<OscillatorSpec>,
        v: FourVector,
        perturbation: PerturbationProfile,
        c: f64,
    ) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidMedium(format!(
                "c must be positive (got {c})"
            )));
        }
        if oscillators.is_empty() {
            return Err(Error::InvalidMedium(
                "at least one oscillator is required".into(),
            ));
        }
        let vv = minkowski_dot(&v, &v);
        if (vv.re - c * c).abs() > 1e-12 * c * c || vv.im != 0.0 || v.0.iter().any(|z| z.im != 0.0)
        {
            return Err(Error::InvalidMedium(format!(
                "v·v = {} but c² = {}",
                vv.re,
                c * c
            )));
        }
        if v.0[0].re <= 0.0 {
            return Err(Error::InvalidMedium("v must be future directed".into()));
        }
        let m = MediumSpec {
            oscillators,
            v,
            perturbation,
            c,
            omega0_profile: None,
            g_profile: None,
        };
        // shape lies in [0, 1], so the minimum of χ is at the extreme of δχ
        let chi_min = m.oscillators[0].chi0 + perturbation.amplitude.min(0.0);
        if perturbation.kind != ProfileKind::None && chi_min <= 0.0 {
            return Err(Error::NonPositiveChi {
                chi: chi_min,
                x: perturbation.center,
            });
        }
        Ok(m)
    }

    /// Single oscillator at rest, no perturbation.
    pub fn homogeneous_rest(osc: OscillatorSpec, c: f64) -> Result<Self> {
        Self::new(
            vec![osc],
            FourVector::real([c, 0.0, 0.0, 0.0]),
            PerturbationProfile::none(),
            c,
        )
    }

    /// Medium moving with velocity `u` along x: `v = γ(c, u, 0, 0)`.
    pub fn moving(
        oscillators: Vec<OscillatorSpec>,
        u: f64,
        perturbation: PerturbationProfile,
        c: f64,
    ) -> Result<Self> {
        if !(u.abs() < c) {
            return Err(Error::SuperluminalBoost { velocity: u, c });
        }
        let gamma = 1.0 / (1.0 - (u / c).powi(2)).sqrt();
        Self::new(
            oscillators,
            FourVector::real([gamma * c, gamma * u, 0.0, 0.0]),
            perturbation,
            c,
        )
    }

    pub fn with_perturbation(&self, perturbation: PerturbationProfile) -> Result<Self> {
        let mut m = Self::new(self.oscillators.clone(), self.v, perturbation, self.c)?;
        m.omega0_profile = self.omega0_profile;
        m.g_profile = self.g_profile;
        Ok(m)
    }

    pub fn with_velocity(&self, v: FourVector) -> Result<Self> {
        Self::new(self.oscillators.clone(), v, self.perturbation, self.c)
    }

    pub fn primary(&self) -> &OscillatorSpec {
        &self.oscillators[0]
    }

    pub fn is_rest_frame(&self) -> bool {
        self.v.0[1].re == 0.0 && self.v.0[2].re == 0.0 && self.v.0[3].re == 0.0
    }

    pub fn is_homogeneous(&self) -> bool {
        self.perturbation.kind == ProfileKind::None || self.perturbation.amplitude == 0.0
    }

    /// Susceptibility of oscillator `index` at `x`; only oscillator 0 is perturbed.
    pub fn chi_of(&self, index: usize, x: f64) -> f64 {
        if index == 0 {
            self.oscillators[0].chi0 + self.perturbation.value(x)
        } else {
            self.oscillators[index].chi0
        }
    }
}

pub fn chi_at(m: &MediumSpec, x: f64) -> Result<f64> {
    let chi = m.chi_of(0, x);
    if chi <= 0.0 {
        return Err(Error::NonPositiveChi { chi, x });
    }
    Ok(chi)
}

pub fn chi_prime_at(m: &MediumSpec, x: f64) -> f64 {
    m.perturbation.derivative(x)
}

/// `Ω = ω₀ √(1 + 4π g² χ)`.
pub fn renormalized_frequency(o: &OscillatorSpec, chi: f64) -> f64 {
    o.omega0 * (1.0 + 4.0 * PI * o.g * o.g * chi).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrability {
    pub value: f64,
    pub finite: bool,
}

/// Bound on `∫_a^∞ |ℛ(x)| dx` with `|·|` = 16 × max absolute entry.
pub fn integrability_check(
    m: &MediumSpec,
    omega: f64,
    kt: (f64, f64),
    a: f64,
) -> Result<Integrability> {
    if m.is_homogeneous() {
        return Ok(Integrability {
            value: 0.0,
            finite: true,
        });
    }
    let norm = |x: f64| -> Result<f64> {
        let r = crate::scattering::assemble_r(m, omega, kt.0, kt.1, x)?;
        Ok(16.0 * r.iter().map(|z| z.norm()).fold(0.0, f64::max))
    };
    let p = &m.perturbation;
    let x_max = (p.center + p.flat_beyond()).max(a);
    let h_target = p.width / 40.0;
    let n = (((x_max - a) / h_target).ceil() as usize).max(2);
    let n = n + n % 2;
    let h = (x_max - a) / n as f64;
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    for i in 0..=n {
        let x = a + i as f64 * h;
        let f = norm(x)?;
        peak = peak.max(f);
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * f;
    }
    let value = sum * h / 3.0;
    let tail = norm(x_max)?;
    if tail > 1e-12 * peak.max(1.0) {
        return Err(Error::DivergentTail(tail));
    }
    Ok(Integrability {
        value: value + tail * p.width,
        finite: true,
    })
}
