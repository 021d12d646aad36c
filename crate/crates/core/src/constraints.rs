//! Constrained Hamiltonian analysis on a periodic spatial lattice.
//!
//! Canonical pairs per site are `(A_μ, Π_A^μ)`, `(P_μ, Π_P^μ)`, `(B, π_B)` and
//! `(λ, π_λ)` with `{X(x), Π(y)} = δ_xy / a^d`. Observables are linear, so
//! every bracket is a bilinear form on coefficient vectors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::kinematics::METRIC;
use crate::medium::MediumSpec;
use crate::{Error, Result};

/// Printed next to every lattice bracket.
pub const DELTA_CONVENTION: &str = "δ_xy/a^d";

/// Per-site coordinate count (`A_μ, P_μ, B, λ`).
pub const COORDS: usize = 10;
/// Per-site phase-space dimension.
pub const SITE_DIM: usize = 2 * COORDS;
/// Lagrange multipliers `u, y, z` carried by the Hamiltonian.
pub const MULTIPLIERS: usize = 3;

/// Canonical variables and the index-raised combinations used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Var {
    ALower(usize),
    AUpper(usize),
    PLower(usize),
    PUpper(usize),
    B,
    Lambda,
    /// `Π_A^μ`.
    PiA(usize),
    /// `Π_{Aμ}`.
    PiALower(usize),
    /// `Π_P^μ`.
    PiP(usize),
    PiPLower(usize),
    PiB,
    PiLambda,
    U,
    Y,
    Z,
}

/// Periodic lattice with `n` sites per axis in `dim ∈ {1, 3}` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePhaseSpace {
    pub n: usize,
    pub dim: usize,
    pub spacing: f64,
}

/// Linear functional on the extended vector `(phase space, u, y, z)`.
pub type Observable = DVector<f64>;

impl LatticePhaseSpace {
    pub fn new(n: usize, dim: usize, spacing: f64) -> Result<Self> {
        if n < 3 || !(dim == 1 || dim == 3) || !(spacing > 0.0) {
            return Err(Error::InvalidMedium(format!(
                "lattice needs n ≥ 3, dim ∈ {{1, 3}}, a > 0 (got n={n}, dim={dim}, a={spacing})"
            )));
        }
        Ok(LatticePhaseSpace { n, dim, spacing })
    }

    pub fn sites(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Phase-space dimension `20 N`.
    pub fn phase_dim(&self) -> usize {
        SITE_DIM * self.sites()
    }

    /// Phase space plus multipliers.
    pub fn ext_dim(&self) -> usize {
        (SITE_DIM + MULTIPLIERS) * self.sites()
    }

    /// `a^d`.
    pub fn cell(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn zero(&self) -> Observable {
        DVector::zeros(self.ext_dim())
    }

    fn slot(&self, site: usize, slot: usize) -> usize {
        site * SITE_DIM + slot
    }

    fn mult(&self, site: usize, k: usize) -> usize {
        self.phase_dim() + site * MULTIPLIERS + k
    }

    /// Neighbour of `site` displaced by `step` along `axis` (periodic).
    pub fn neighbour(&self, site: usize, axis: usize, step: isize) -> usize {
        let n = self.n;
        let mut c = [site % n, (site / n) % n, site / (n * n)];
        let m = n as isize;
        c[axis] = (((c[axis] as isize + step) % m + m) % m) as usize;
        c[0] + n * (c[1] + n * c[2])
    }

    /// Point evaluation of a variable at a site.
    pub fn var(&self, v: Var, site: usize) -> Observable {
        let mut f = self.zero();
        let (idx, s) = match v {
            Var::ALower(mu) => (self.slot(site, mu), 1.0),
            Var::AUpper(mu) => (self.slot(site, mu), METRIC[mu]),
            Var::PLower(mu) => (self.slot(site, 4 + mu), 1.0),
            Var::PUpper(mu) => (self.slot(site, 4 + mu), METRIC[mu]),
            Var::B => (self.slot(site, 8), 1.0),
            Var::Lambda => (self.slot(site, 9), 1.0),
            Var::PiA(mu) => (self.slot(site, 10 + mu), 1.0),
            Var::PiALower(mu) => (self.slot(site, 10 + mu), METRIC[mu]),
            Var::PiP(mu) => (self.slot(site, 14 + mu), 1.0),
            Var::PiPLower(mu) => (self.slot(site, 14 + mu), METRIC[mu]),
            Var::PiB => (self.slot(site, 18), 1.0),
            Var::PiLambda => (self.slot(site, 19), 1.0),
            Var::U => (self.mult(site, 0), 1.0),
            Var::Y => (self.mult(site, 1), 1.0),
            Var::Z => (self.mult(site, 2), 1.0),
        };
        f[idx] = s;
        f
    }

    /// Central periodic difference `∂_axis` of a per-site observable family.
    pub fn derivative(
        &self,
        f: impl Fn(usize) -> Observable,
        site: usize,
        axis: usize,
    ) -> Observable {
        if axis >= self.dim {
            return self.zero();
        }
        let fwd = f(self.neighbour(site, axis, 1));
        let bwd = f(self.neighbour(site, axis, -1));
        (fwd - bwd) / (2.0 * self.spacing)
    }

    /// Canonical Poisson tensor on the extended vector (zero on multipliers).
    pub fn poisson_tensor(&self) -> DMatrix<f64> {
        let n = self.ext_dim();
        let mut j = DMatrix::zeros(n, n);
        let inv = 1.0 / self.cell();
        for s in 0..self.sites() {
            for l in 0..COORDS {
                let q = self.slot(s, l);
                let p = self.slot(s, COORDS + l);
                j[(q, p)] = inv;
                j[(p, q)] = -inv;
            }
        }
        j
    }
}

/// `{f, g}` for linear observables.
pub fn poisson_bracket(f: &Observable, g: &Observable, l: &LatticePhaseSpace) -> f64 {
    let inv = 1.0 / l.cell();
    let mut sum = 0.0;
    for s in 0..l.sites() {
        for k in 0..COORDS {
            let q = l.slot(s, k);
            let p = l.slot(s, COORDS + k);
            sum += f[q] * g[p] - f[p] * g[q];
        }
    }
    sum * inv
}

/// `{f, ·}` as a linear functional: `{f, g} = bracket_row(f) · g`.
fn bracket_row(f: &Observable, l: &LatticePhaseSpace) -> Observable {
    let inv = 1.0 / l.cell();
    let mut r = l.zero();
    for s in 0..l.sites() {
        for k in 0..COORDS {
            let q = l.slot(s, k);
            let p = l.slot(s, COORDS + k);
            r[p] += f[q] * inv;
            r[q] -= f[p] * inv;
        }
    }
    r
}

/// The six constraint families at one site.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    /// `constraints[i][x]` is `Γ_{i+1}(x)`.
    pub constraints: Vec<Vec<Observable>>,
}

pub const CONSTRAINT_NAMES: [&str; 6] = ["π_B", "Π_A^0 − B/c", "v_μP^μ", "v_μΠ_P^μ", "λ", "π_λ"];

pub fn constraint_set(l: &LatticePhaseSpace, m: &MediumSpec) -> ConstraintSet {
    let v = m.v.re();
    let c = m.c;
    let per_site = |s: usize| -> Vec<Observable> {
        let g3 = (0..4).fold(l.zero(), |acc, mu| acc + l.var(Var::PLower(mu), s) * v[mu]);
        let g4 = (0..4).fold(l.zero(), |acc, mu| {
            acc + l.var(Var::PiP(mu), s) * (v[mu] * METRIC[mu])
        });
        vec![
            l.var(Var::PiB, s),
            l.var(Var::PiA(0), s) - l.var(Var::B, s) / c,
            g3,
            g4,
            l.var(Var::Lambda, s),
            l.var(Var::PiLambda, s),
        ]
    };
    let by_site: Vec<Vec<Observable>> = (0..l.sites()).map(per_site).collect();
    let constraints = (0..6)
        .map(|i| by_site.iter().map(|g| g[i].clone()).collect())
        .collect();
    ConstraintSet { constraints }
}

/// Quadratic Hamiltonian `H = ½ wᵀ 𝐇 w` on the extended vector.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub matrix: DMatrix<f64>,
}

impl Hamiltonian {
    // 𝐇 += coef (f gᵀ + g fᵀ), so H gains coef (f·w)(g·w)
    fn add_bilinear(&mut self, f: &Observable, g: &Observable, coef: f64) {
        let nz = |v: &Observable| -> Vec<(usize, f64)> {
            v.iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, x)| (i, *x))
                .collect()
        };
        let (fs, gs) = (nz(f), nz(g));
        for &(i, a) in &fs {
            for &(j, b) in &gs {
                self.matrix[(i, j)] += coef * a * b;
                self.matrix[(j, i)] += coef * a * b;
            }
        }
    }

    /// `{f, H}` as a linear functional.
    pub fn bracket(&self, f: &Observable, l: &LatticePhaseSpace) -> Observable {
        // {f, ½ wᵀ𝐇w} = Σ_k {f, w_k} (𝐇w)_k
        let r = bracket_row(f, l);
        self.matrix.transpose() * r
    }
}

/// Assemble the Hamiltonian density summed over the lattice, `H = Σ_x a^d 𝓗(x)`.
///
/// Only oscillator 1 enters; the susceptibility is the bulk value.
pub fn build_hamiltonian(l: &LatticePhaseSpace, m: &MediumSpec, xi: f64) -> Hamiltonian {
    let c = m.c;
    let o = m.primary();
    let (chi, w0, g) = (o.chi0, o.omega0, o.g);
    let v = m.v.re();
    let vl: [f64; 4] = std::array::from_fn(|mu| v[mu] * METRIC[mu]);
    let v0 = v[0];
    let pi = std::f64::consts::PI;
    let mut h = Hamiltonian {
        matrix: DMatrix::zeros(l.ext_dim(), l.ext_dim()),
    };
    let cell = l.cell();
    let axes = 1..4;

    for s in 0..l.sites() {
        let var = |x: Var| l.var(x, s);
        let d = |f: &dyn Fn(usize) -> Observable, i: usize| l.derivative(f, s, i - 1);
        // F_{ij} = ∂_i A_j − ∂_j A_i
        let f_low = |i: usize, j: usize| {
            d(&|t| l.var(Var::ALower(j), t), i) - d(&|t| l.var(Var::ALower(i), t), j)
        };
        // Q_i = v_0 P_i − v_i P_0
        let q = |i: usize| var(Var::PLower(i)) * vl[0] - var(Var::PLower(0)) * vl[i];

        // 2πc² (Π_A^i)²
        for i in axes.clone() {
            let p = var(Var::PiA(i));
            h.add_bilinear(&p, &p, cell * 2.0 * pi * c * c);
        }
        // F_ij F^ij / 16π
        for i in axes.clone() {
            for j in axes.clone() {
                let f = f_low(i, j);
                h.add_bilinear(&f, &f, cell / (16.0 * pi));
            }
        }
        // c A_0 ∂_i Π_{Ai}
        for i in axes.clone() {
            let dpi = d(&|t| l.var(Var::PiALower(i), t), i);
            h.add_bilinear(&var(Var::ALower(0)), &dpi, cell * c);
        }
        // 4πg (v_0 P_i − v_i P_0) Π_{Ai}
        for i in axes.clone() {
            h.add_bilinear(&q(i), &var(Var::PiALower(i)), cell * 4.0 * pi * g);
        }
        // −c (v^k/v_0) (∂_k P^μ) Π_{Pμ}
        for k in axes.clone() {
            for mu in 0..4 {
                let dp = d(&|t| l.var(Var::PLower(mu), t), k);
                h.add_bilinear(&dp, &var(Var::PiP(mu)), -cell * c * v[k] / v0);
            }
        }
        // −χω₀²c²/(2 v0²) Π_{Pμ} Π_P^μ
        for mu in 0..4 {
            let p = var(Var::PiP(mu));
            h.add_bilinear(
                &p,
                &p,
                -cell * chi * w0 * w0 * c * c / (2.0 * v0 * v0) * METRIC[mu],
            );
        }
        // −P_μ P^μ / 2χ
        for mu in 0..4 {
            let p = var(Var::PLower(mu));
            h.add_bilinear(&p, &p, -cell / (2.0 * chi) * METRIC[mu]);
        }
        // (2πg²/c²) (v_0 P_i − v_i P_0)²
        for i in axes.clone() {
            let qi = q(i);
            h.add_bilinear(&qi, &qi, cell * 2.0 * pi * g * g / (c * c));
        }
        // (g/2c)(v_i P_j − v_j P_i) F^{ij}, with F^{ij} = F_{ij}
        for i in axes.clone() {
            for j in axes.clone() {
                let vp = var(Var::PLower(j)) * vl[i] - var(Var::PLower(i)) * vl[j];
                h.add_bilinear(&vp, &f_low(i, j), cell * g / (2.0 * c));
            }
        }
        // −B ∂_i A^i
        for i in axes.clone() {
            let da = d(&|t| l.var(Var::AUpper(i), t), i);
            h.add_bilinear(&var(Var::B), &da, -cell);
        }
        // −ξ B²/2
        let b = var(Var::B);
        h.add_bilinear(&b, &b, -cell * xi / 2.0);
        // −λ v_μ P^μ
        let vp = (0..4).fold(l.zero(), |acc, mu| acc + var(Var::PLower(mu)) * v[mu]);
        h.add_bilinear(&var(Var::Lambda), &vp, -cell);
        // u π_λ + y π_B + z (Π_A^0 − B/c)
        h.add_bilinear(&var(Var::U), &var(Var::PiLambda), cell);
        h.add_bilinear(&var(Var::Y), &var(Var::PiB), cell);
        let g2 = var(Var::PiA(0)) - var(Var::B) / c;
        h.add_bilinear(&var(Var::Z), &g2, cell);
    }
    h
}

/// One bracket of the chain with its expected closed form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainStep {
    pub bracket: String,
    pub expected: String,
    pub residual: f64,
}

/// Multiplier or constraint fixed by the chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSolution {
    pub symbol: String,
    pub value: String,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainReport {
    pub delta_convention: String,
    pub steps: Vec<ChainStep>,
    pub solutions: Vec<ChainSolution>,
    pub max_residual: f64,
}

fn max_abs(f: &Observable) -> f64 {
    f.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn residual_at(l: &LatticePhaseSpace, f: impl Fn(usize) -> Observable) -> f64 {
    (0..l.sites()).map(|s| max_abs(&f(s))).fold(0.0, f64::max)
}

/// Residual of `r − span{basis}` in the least-squares sense.
fn distance_to_span(r: &Observable, basis: &[Observable]) -> f64 {
    if basis.is_empty() {
        return max_abs(r);
    }
    let b = DMatrix::from_columns(basis);
    let svd = b.clone().svd(true, true);
    let coef = svd.solve(r, 1e-12).expect("svd solve");
    max_abs(&(r - b * coef))
}

/// Reproduce the constraint chain generated by the primary constraints.
pub fn constraint_chain(l: &LatticePhaseSpace, m: &MediumSpec, xi: f64) -> Result<ChainReport> {
    let h = build_hamiltonian(l, m, xi);
    let c = m.c;
    let o = m.primary();
    let (chi, w0) = (o.chi0, o.omega0);
    let v = m.v.re();
    let v0 = v[0];
    let vv = v[0] * v[0] - v[1] * v[1] - v[2] * v[2] - v[3] * v[3];
    let cs = constraint_set(l, m);
    let g = |i: usize, s: usize| cs.constraints[i - 1][s].clone();
    let dims = 1..=l.dim;

    let div_a = |s: usize| {
        dims.clone().fold(l.zero(), |acc, i| {
            acc + l.derivative(|t| l.var(Var::AUpper(i), t), s, i - 1)
        })
    };
    let div_pi = |s: usize| {
        dims.clone().fold(l.zero(), |acc, i| {
            acc + l.derivative(|t| l.var(Var::PiALower(i), t), s, i - 1)
        })
    };
    let adv = |f: &dyn Fn(usize) -> Observable, s: usize| {
        dims.clone().fold(l.zero(), |acc, k| {
            acc + l.derivative(f, s, k - 1) * (c * v[k] / v0)
        })
    };

    let mut steps = Vec::new();
    let mut push = |bracket: &str, expected: &str, residual: f64| {
        steps.push(ChainStep {
            bracket: bracket.into(),
            expected: expected.into(),
            residual,
        });
    };

    // {π_B, H}
    let r1 = |s: usize| h.bracket(&g(1, s), l);
    let e1 = |s: usize| div_a(s) + l.var(Var::B, s) * xi + l.var(Var::Z, s) / c;
    push(
        "{π_B, H}",
        "∂_iA^i + ξB + z/c",
        residual_at(l, |s| r1(s) - e1(s)),
    );

    // {Π_A^0 − B, H}, and the same with Γ₂ = Π_A^0 − B/c
    let lit = |s: usize| h.bracket(&(l.var(Var::PiA(0), s) - l.var(Var::B, s)), l);
    let e2 = |s: usize| div_pi(s) * (-c) - l.var(Var::Y, s);
    push(
        "{Π_A^0 − B, H}",
        "−c∂_iΠ_{Ai} − y",
        residual_at(l, |s| lit(s) - e2(s)),
    );
    let r2 = |s: usize| h.bracket(&g(2, s), l);
    let e2c = |s: usize| div_pi(s) * (-c) - l.var(Var::Y, s) / c;
    push(
        "{Π_A^0 − B/c, H}",
        "−c∂_iΠ_{Ai} − y/c",
        residual_at(l, |s| r2(s) - e2c(s)),
    );

    // {π_λ, H}
    let r6 = |s: usize| h.bracket(&g(6, s), l);
    push("{π_λ, H}", "v_μP^μ", residual_at(l, |s| r6(s) - g(3, s)));

    // {v_μP^μ, H}
    let r3 = |s: usize| h.bracket(&g(3, s), l);
    let e3 = |s: usize| g(4, s) * (-chi * w0 * w0 * c * c / (v0 * v0)) - adv(&|t| g(3, t), s);
    push(
        "{v_μP^μ, H}",
        "−(χω₀²c²/(v⁰)²) v_μΠ_P^μ − c(v^k/v⁰)∂_k(v_μP^μ)",
        residual_at(l, |s| r3(s) - e3(s)),
    );

    // {v_μΠ_P^μ, H}
    let r4 = |s: usize| h.bracket(&g(4, s), l);
    let e4 = |s: usize| g(3, s) / chi - adv(&|t| g(4, t), s) + l.var(Var::Lambda, s) * vv;
    push(
        "{v_μΠ_P^μ, H}",
        "(1/χ) v_μP^μ − c(v^k/v⁰)∂_k(v_μΠ_P^μ) + v^μv_μ λ",
        residual_at(l, |s| r4(s) - e4(s)),
    );

    // {λ, H}
    let r5 = |s: usize| h.bracket(&g(5, s), l);
    push("{λ, H}", "u", residual_at(l, |s| r5(s) - l.var(Var::U, s)));

    // Solve each consistency condition for its multiplier.
    let mut solutions = Vec::new();
    let z_idx = |s: usize| l.var(Var::Z, s);
    let solve_for = |r: &Observable, sym: &Observable| -> (f64, Observable) {
        let k = r.dot(sym);
        let rest = r - sym * k;
        (k, -rest / k)
    };
    let mut z_res: f64 = 0.0;
    let mut y_res: f64 = 0.0;
    let mut y_lit_res: f64 = 0.0;
    let mut lambda_res: f64 = 0.0;
    let mut u_res: f64 = 0.0;
    let surface: Vec<Observable> = (0..l.sites()).flat_map(|s| [g(3, s), g(4, s)]).collect();
    for s in 0..l.sites() {
        let (_, zsol) = solve_for(&r1(s), &z_idx(s));
        let zexp = (div_a(s) + l.var(Var::B, s) * xi) * (-c);
        z_res = z_res.max(max_abs(&(zsol - zexp)));

        let yexp = div_pi(s) * (-c);
        let (_, ysol) = solve_for(&lit(s), &l.var(Var::Y, s));
        y_lit_res = y_lit_res.max(max_abs(&(ysol - &yexp)));
        let (_, ysol) = solve_for(&r2(s), &l.var(Var::Y, s));
        y_res = y_res.max(max_abs(&(ysol - yexp * c)));

        // λ = −(rest)/(v·v) must vanish on Γ₃ = Γ₄ = 0
        let (_, lsol) = solve_for(&r4(s), &l.var(Var::Lambda, s));
        lambda_res = lambda_res.max(distance_to_span(&lsol, &surface));

        let (_, usol) = solve_for(&r5(s), &l.var(Var::U, s));
        u_res = u_res.max(max_abs(&usol));
    }
    // {Γ₃, H} on Γ₃ = 0 forces Γ₄ = 0
    let gamma4_res = (0..l.sites())
        .map(|s| {
            let span: Vec<Observable> = (0..l.sites()).map(|t| g(3, t)).chain([g(4, s)]).collect();
            distance_to_span(&r3(s), &span)
        })
        .fold(0.0, f64::max);

    solutions.push(ChainSolution {
        symbol: "z".into(),
        value: "−c(∂_iA^i + ξB)".into(),
        residual: z_res,
    });
    solutions.push(ChainSolution {
        symbol: "y".into(),
        value: "−c∂_iΠ_{Ai}".into(),
        residual: y_lit_res,
    });
    solutions.push(ChainSolution {
        symbol: "y (from Π_A^0 − B/c)".into(),
        value: "−c²∂_iΠ_{Ai}".into(),
        residual: y_res,
    });
    solutions.push(ChainSolution {
        symbol: "Γ₄".into(),
        value: "v_μΠ_P^μ = 0".into(),
        residual: gamma4_res,
    });
    solutions.push(ChainSolution {
        symbol: "λ".into(),
        value: "0".into(),
        residual: lambda_res,
    });
    solutions.push(ChainSolution {
        symbol: "u".into(),
        value: "0".into(),
        residual: u_res,
    });

    let max_residual = steps
        .iter()
        .map(|s| s.residual)
        .chain(solutions.iter().map(|s| s.residual))
        .fold(0.0, f64::max);
    let report = ChainReport {
        delta_convention: DELTA_CONVENTION.into(),
        steps,
        solutions,
        max_residual,
    };
    if let Some(bad) = report.steps.iter().find(|s| s.residual > 1e-10) {
        return Err(Error::ChainMismatch {
            bracket: bad.bracket.clone(),
            residual: bad.residual,
        });
    }
    if let Some(bad) = report.solutions.iter().find(|s| s.residual > 1e-10) {
        return Err(Error::ChainMismatch {
            bracket: bad.symbol.clone(),
            residual: bad.residual,
        });
    }
    Ok(report)
}

/// Matrix of constraint brackets and its inverse.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    /// Row/column order: constraint family major, site minor.
    pub c: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// Constraint functionals, one row each.
    pub gammas: DMatrix<f64>,
}

pub fn build_and_invert_c(l: &LatticePhaseSpace, m: &MediumSpec) -> Result<ConstraintMatrix> {
    let v = m.v.re();
    let vv = v[0] * v[0] - v[1] * v[1] - v[2] * v[2] - v[3] * v[3];
    if vv.abs() < 1e-300 {
        return Err(Error::SingularC);
    }
    let cs = constraint_set(l, m);
    let pd = l.phase_dim();
    let rows: Vec<Observable> = cs.constraints.iter().flatten().cloned().collect();
    let n = rows.len();
    let mut gammas = DMatrix::zeros(n, pd);
    for (i, r) in rows.iter().enumerate() {
        for k in 0..pd {
            gammas[(i, k)] = r[k];
        }
    }
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = poisson_bracket(&rows[i], &rows[j], l);
        }
    }
    let inverse = c.clone().try_inverse().ok_or(Error::SingularC)?;
    Ok(ConstraintMatrix { c, inverse, gammas })
}

/// Dirac tensor `J_D = J − J Γᵀ C⁻¹ Γ J` on the phase space (multipliers dropped).
pub fn dirac_tensor(l: &LatticePhaseSpace, cm: &ConstraintMatrix) -> DMatrix<f64> {
    let pd = l.phase_dim();
    let j = l.poisson_tensor().view((0, 0), (pd, pd)).into_owned();
    let jg = &j * cm.gammas.transpose();
    let gj = &cm.gammas * &j;
    &j - jg * &cm.inverse * gj
}

pub fn dirac_bracket(
    f: &Observable,
    g: &Observable,
    l: &LatticePhaseSpace,
    jd: &DMatrix<f64>,
) -> f64 {
    let pd = l.phase_dim();
    let fv = f.rows(0, pd);
    let gv = g.rows(0, pd);
    (fv.transpose() * jd * gv)[(0, 0)]
}

/// One entry of the Dirac table, already multiplied by `a^d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub value: f64,
    pub expected: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiracTable {
    pub delta_convention: String,
    pub entries: Vec<BracketEntry>,
    pub max_residual: f64,
}

/// Equal-site Dirac brackets of the canonical pairs against their closed forms,
/// plus an off-site check (which must vanish).
pub fn dirac_table(l: &LatticePhaseSpace, m: &MediumSpec) -> Result<DiracTable> {
    let cm = build_and_invert_c(l, m)?;
    let jd = dirac_tensor(l, &cm);
    let v = m.v.re();
    let vv = v[0] * v[0] - v[1] * v[1] - v[2] * v[2] - v[3] * v[3];
    let cell = l.cell();
    let mut entries = Vec::new();
    let mut add = |left: String, right: String, f: Observable, g: Observable, expected: f64| {
        let value = dirac_bracket(&f, &g, l, &jd) * cell;
        entries.push(BracketEntry {
            left,
            right,
            value,
            expected,
            residual: (value - expected).abs(),
        });
    };
    let far = l.neighbour(0, 0, 1);
    for s in [0, far] {
        for mu in 0..4 {
            for nu in 0..4 {
                let eta = if mu == nu { METRIC[mu] } else { 0.0 };
                let same = if s == 0 { 1.0 } else { 0.0 };
                add(
                    format!("A^{mu}(0)"),
                    format!("Π_A^{nu}({s})"),
                    l.var(Var::AUpper(mu), 0),
                    l.var(Var::PiA(nu), s),
                    eta * same,
                );
                add(
                    format!("P^{mu}(0)"),
                    format!("Π_P^{nu}({s})"),
                    l.var(Var::PUpper(mu), 0),
                    l.var(Var::PiP(nu), s),
                    (eta - v[mu] * v[nu] / vv) * same,
                );
            }
        }
        add(
            "B(0)".into(),
            format!("π_B({s})"),
            l.var(Var::B, 0),
            l.var(Var::PiB, s),
            0.0,
        );
        add(
            "λ(0)".into(),
            format!("π_λ({s})"),
            l.var(Var::Lambda, 0),
            l.var(Var::PiLambda, s),
            0.0,
        );
    }
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(DiracTable {
        delta_convention: DELTA_CONVENTION.into(),
        entries,
        max_residual,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorConstraintReport {
    /// `max |{Γ_i, X}_D|` over every canonical variable, per family.
    pub per_constraint: Vec<(String, f64)>,
    /// `{P⁰, Π_P⁰}_D · a^d` at one site.
    pub p0_bracket: f64,
    pub max_residual: f64,
}

/// Check that every constraint commutes with everything under the Dirac bracket.
pub fn operator_constraint_check(
    l: &LatticePhaseSpace,
    m: &MediumSpec,
) -> Result<OperatorConstraintReport> {
    let cm = build_and_invert_c(l, m)?;
    let jd = dirac_tensor(l, &cm);
    let cs = constraint_set(l, m);
    let pd = l.phase_dim();
    let mut per_constraint = Vec::new();
    for (i, fam) in cs.constraints.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for gamma in fam {
            let row = gamma.rows(0, pd).transpose() * &jd;
            worst = worst.max(row.iter().fold(0.0_f64, |a, x| a.max(x.abs())) * l.cell());
        }
        if worst > 1e-12 {
            let k = (0..pd)
                .max_by(|&a, &b| {
                    let ra = (fam[0].rows(0, pd).transpose() * &jd)[a].abs();
                    let rb = (fam[0].rows(0, pd).transpose() * &jd)[b].abs();
                    ra.partial_cmp(&rb).unwrap()
                })
                .unwrap_or(0);
            return Err(Error::InconsistentConstraint {
                constraint: CONSTRAINT_NAMES[i].into(),
                observable: format!("phase-space slot {k}"),
                value: worst,
            });
        }
        per_constraint.push((CONSTRAINT_NAMES[i].to_string(), worst));
    }
    let p0_bracket =
        dirac_bracket(&l.var(Var::PUpper(0), 0), &l.var(Var::PiP(0), 0), l, &jd) * l.cell();
    let max_residual = per_constraint.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(OperatorConstraintReport {
        per_constraint,
        p0_bracket,
        max_residual,
    })
}
