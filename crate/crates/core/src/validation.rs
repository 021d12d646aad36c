//! Self-checks run by the `validate` command. Each returns a named residual
//! with the tolerance it is judged against.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{constraint_chain, dirac_table, LatticePhaseSpace};
use crate::kinematics::{boost_vector, Axis, Boost};
use crate::linalg::max_abs;
use crate::medium::{renormalized_frequency, MediumSpec, PerturbationProfile, ProfileKind};
use crate::modes::{boost_mode, dispersion_solve, make_plane_wave, Branch, Polarization};
use crate::ode::{integrate, OdeOptions};
use crate::products::{
    classify_value, current_density, norm_coefficient, scalar_product, scalar_product_constrained,
    scalar_product_symplectic, FieldConfiguration, Grid, NormClass,
};
use crate::quanta::{build_mode_hamiltonian, fano_diagonalize, unphysical_sector_report};
use crate::scattering::{
    assemble_c, channels, default_endpoints, extract_bogoliubov, flux_conservation_check,
    integrate_transfer, scattering_state,
};
use crate::{Result, FEYNMAN_XI};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual < tolerance,
        }
    }
}

/// Dirac-bracket table and constraint chain on a one-dimensional lattice.
pub fn check_constraints(m: &MediumSpec, sites: usize, spacing: f64) -> Result<Vec<CheckResult>> {
    let l = LatticePhaseSpace::new(sites, 1, spacing)?;
    let t0 = Instant::now();
    let table = dirac_table(&l, m)?;
    let secs = t0.elapsed().as_secs_f64();
    let chain = constraint_chain(&l, m, FEYNMAN_XI)?;
    Ok(vec![
        CheckResult::new("dirac_brackets", table.max_residual, 1e-12),
        CheckResult::new("dirac_runtime_s", secs, 10.0),
        CheckResult::new("constraint_chain", chain.max_residual, 1e-10),
    ])
}

/// Field, constrained and symplectic products on random transverse superpositions,
/// and the plane-wave norm coefficient.
pub fn check_products(m: &MediumSpec, seed: u64, samples: usize) -> Result<Vec<CheckResult>> {
    let grid = Grid::new([6, 4, 4], [3.0, 2.0, 2.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for mx in 1..=2 {
        for my in 0..=1 {
            let k = grid.wavevector([mx, my, 0]);
            for br in [Branch::Lower, Branch::Upper] {
                for pol in [Polarization::Transverse1, Polarization::Transverse2] {
                    modes.push(make_plane_wave(m, k, pol, br)?);
                }
            }
        }
    }
    let mut pair: f64 = 0.0;
    for _ in 0..samples {
        let mut pick = || -> Vec<(Complex64, usize)> {
            (0..3)
                .map(|_| {
                    let c =
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    (c, rng.random_range(0..modes.len()))
                })
                .collect()
        };
        let (tu, tw) = (pick(), pick());
        let build = |t: &[(Complex64, usize)]| {
            let terms: Vec<_> = t.iter().map(|&(c, i)| (c, &modes[i])).collect();
            FieldConfiguration::superpose(&terms, grid, 0.0)
        };
        let (u, w) = (build(&tu)?, build(&tw)?);
        let a = scalar_product(m, &u, &w)?;
        let b = scalar_product_constrained(m, &u, &w)?;
        let c = scalar_product_symplectic(m, &u, &w)?;
        let uu = scalar_product(m, &u, &u)?.norm();
        let ww = scalar_product(m, &w, &w)?.norm();
        let scale = (uu * ww).sqrt().max(1e-300);
        pair = pair
            .max((a - b).norm() / scale)
            .max((a - c).norm() / scale)
            .max((b - c).norm() / scale);
    }
    let mut coef: f64 = 0.0;
    for md in &modes {
        let f = FieldConfiguration::from_mode(md, grid, 0.0);
        let n = scalar_product(m, &f, &f)?.re;
        let expect = norm_coefficient(m, md.omega(m.c)) * grid.volume();
        coef = coef.max((n - expect).abs() / expect.abs());
    }
    Ok(vec![
        CheckResult::new("products_pairwise", pair, 1e-10),
        CheckResult::new("norm_coefficient", coef, 1e-10),
    ])
}

/// Fano diagonalization against the dispersion solver.
pub fn check_fano(m: &MediumSpec, ks: &[f64]) -> Result<Vec<CheckResult>> {
    let (mut eig, mut disp, mut sym) = (0.0_f64, 0.0_f64, 0.0_f64);
    for &k in ks {
        let f = fano_diagonalize(&build_mode_hamiltonian(m, k)?)?;
        let roots = dispersion_solve(m, k)?;
        let mut field: Vec<f64> = roots.iter().map(|r| r.omega).collect();
        field.sort_by(|a, b| b.partial_cmp(a).unwrap());
        disp = disp
            .max((f.omega_upper - field[0]).abs() / field[0])
            .max((f.omega_lower - field[1]).abs() / field[1]);
        eig = eig.max(f.eigen_residual);
        sym = sym.max(f.symplectic_residual);
    }
    Ok(vec![
        CheckResult::new("fano_eigenrelation", eig, 1e-10),
        CheckResult::new("fano_vs_dispersion", disp, 1e-8),
        CheckResult::new("fano_symplectic", sym, 1e-10),
    ])
}

pub fn check_unphysical(m: &MediumSpec, k: f64) -> Result<Vec<CheckResult>> {
    let r = unphysical_sector_report(m, k)?;
    let metric = (r.d0_d0 + 1.0)
        .abs()
        .max((r.d3_d3 - 1.0).abs())
        .max(r.beta_beta.abs())
        .max((r.a3_beta + 1.0).abs());
    Ok(vec![
        CheckResult::new("indefinite_metric", metric, 1e-15),
        CheckResult::new("unphysical_matrix_elements", r.max_matrix_element, 1e-12),
    ])
}

/// Upper branch at small `k` against `Ω = ω₀√(1 + 4πg²χ)`.
pub fn check_renormalized(m: &MediumSpec) -> Result<Vec<CheckResult>> {
    let o = m.primary();
    let big = renormalized_frequency(o, o.chi0);
    let k = 1e-5 * big / m.c;
    let up = dispersion_solve(m, k)?
        .into_iter()
        .find(|r| r.branch == Branch::Upper)
        .map(|r| r.omega)
        .unwrap_or(f64::NAN);
    Ok(vec![CheckResult::new(
        "renormalized_frequency",
        (up - big).abs() / big,
        1e-6,
    )])
}

/// Norm signs of boosted transverse modes, and invariance of Minkowski dots.
pub fn check_covariance(m: &MediumSpec, seed: u64, count: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flips = 0usize;
    let mut dots: f64 = 0.0;
    for i in 0..count {
        let k = [
            rng.random_range(0.2..2.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let br = if i % 2 == 0 {
            Branch::Lower
        } else {
            Branch::Upper
        };
        let mode = make_plane_wave(m, k, Polarization::Transverse1, br)?;
        let conj = i % 3 == 0;
        let mode = if conj { mode.conjugate() } else { mode };
        let u = rng.random_range(-0.9..0.9) * m.c;
        let axis = [Axis::X, Axis::Y, Axis::Z][i % 3];
        let b = Boost::new(u, axis, m.c)?;
        let moved = boost_mode(&mode, &b);
        let mb = m.with_velocity(boost_vector(&b, &m.v))?;
        let sign = |m: &MediumSpec, md: &crate::modes::PlaneWaveMode| -> NormClass {
            let s = md.sample([0.0; 4]);
            let j0 = current_density(m, &s, &s, 0.0, 0, true);
            classify_value(j0, s.a.max_abs().powi(2) + 1.0, 1e-10)
        };
        if sign(m, &mode) != sign(&mb, &moved) {
            flips += 1;
        }
        let before = crate::kinematics::minkowski_dot(&mode.p, &mode.a);
        let after = crate::kinematics::minkowski_dot(&moved.p, &moved.a);
        let pp = crate::kinematics::minkowski_dot(&mode.p, &mode.p);
        let pp2 = crate::kinematics::minkowski_dot(&moved.p, &moved.p);
        let sc = mode.p.max_abs().powi(2).max(1.0);
        dots = dots
            .max((before - after).norm() / sc)
            .max((pp - pp2).norm() / sc);
    }
    Ok(vec![
        CheckResult::new("norm_sign_flips", flips as f64, 0.5),
        CheckResult::new("minkowski_invariance", dots, 1e-12),
    ])
}

/// Stationary scattering checks for a moving medium.
pub fn check_scattering(m: &MediumSpec, omega: f64, ky: f64, kz: f64) -> Result<Vec<CheckResult>> {
    let opts = OdeOptions::default();
    let hom = m.with_perturbation(PerturbationProfile::none())?;
    let len = 2.0;
    let c = assemble_c(&hom, omega, ky, kz)?;
    let id = crate::linalg::CMatrix::identity(c.nrows(), c.ncols());
    let (t, _) = integrate(|_| Ok(c.clone()), 0.0, len, id, &opts)?;
    let e = (&c * Complex64::new(len, 0.0)).exp();
    let exp_res = max_abs(&(&t - &e)) / max_abs(&e) / opts.rtol;

    let t0 = Instant::now();
    let (xl, xr) = default_endpoints(m, omega, ky, kz)?;
    let tm = integrate_transfer(m, omega, ky, kz, xl, xr, &opts)?;
    let ch = channels(m, omega, ky, kz)?;
    let bog = extract_bogoliubov(&tm, &ch)?;
    let secs = t0.elapsed().as_secs_f64();
    let drift_opts = OdeOptions {
        rtol: 1e-10,
        atol: 1e-12,
        ..opts
    };
    let mut drift: f64 = 0.0;
    for &j in &bog.propagating {
        let w0 = scattering_state(&tm, &ch, j)?;
        drift = drift
            .max(flux_conservation_check(m, omega, ky, kz, &w0, xl, xr, 40, &drift_opts)?.drift);
    }

    let mut out = vec![
        CheckResult::new("transfer_vs_exponential_in_tol", exp_res, 10.0),
        CheckResult::new("flux_drift", drift, 1e-8),
        CheckResult::new("pseudo_unitarity", bog.pseudo_unitarity_residual, 1e-8),
        CheckResult::new("scatter_runtime_s", secs, 5.0),
    ];
    if !m.is_homogeneous() {
        let p = m.perturbation;
        let half = PerturbationProfile::new(p.kind, p.amplitude / 2.0, p.width, p.center)?;
        let mh = m.with_perturbation(half)?;
        let tm2 = integrate_transfer(&mh, omega, ky, kz, xl, xr, &opts)?;
        let b2 = extract_bogoliubov(&tm2, &channels(&mh, omega, ky, kz)?)?;
        let ratio = b2.max_beta() / bog.max_beta();
        out.push(CheckResult::new(
            "beta_halving",
            (ratio - 0.5).abs() / 0.5,
            0.1,
        ));
    }
    Ok(out)
}

/// Default moving medium with a Gaussian susceptibility bump.
pub fn default_scattering_medium(m: &MediumSpec) -> Result<MediumSpec> {
    let p = PerturbationProfile::new(ProfileKind::Gaussian, 0.05, 0.25, 0.0)?;
    MediumSpec::moving(m.oscillators.clone(), -0.3 * m.c, p, m.c)
}
