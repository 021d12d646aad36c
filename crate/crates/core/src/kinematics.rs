//! Minkowski four-vectors, boosts, polarization bases and transversality
//! projectors.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metric signature `diag(+1, -1, -1, -1)`.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex contravariant four-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourVector(pub [Complex64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([ZERO; 4]);

    pub fn new(c: [Complex64; 4]) -> Self {
        FourVector(c)
    }

    pub fn real(c: [f64; 4]) -> Self {
        FourVector(c.map(Complex64::from))
    }

    /// Unit vector along coordinate axis `mu`.
    pub fn basis(mu: usize) -> Self {
        let mut v = Self::ZERO;
        v.0[mu] = Complex64::new(1.0, 0.0);
        v
    }

    /// Covariant components `u_μ = η_μν u^ν`.
    pub fn lower(&self) -> Self {
        FourVector(std::array::from_fn(|mu| self.0[mu] * METRIC[mu]))
    }

    pub fn conj(&self) -> Self {
        FourVector(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        FourVector(self.0.map(|z| z * s))
    }

    pub fn spatial(&self) -> [Complex64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn re(&self) -> [f64; 4] {
        self.0.map(|z| z.re)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_vector(&self) -> Vector4<Complex64> {
        Vector4::from(self.0)
    }
}

impl Index<usize> for FourVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for FourVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|z| -z))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|z| z * s))
    }
}

impl Mul<Complex64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: Complex64) -> FourVector {
        self.scale(s)
    }
}

/// `u⁰v⁰ − Σ uⁱvⁱ`, bilinear (no conjugation).
pub fn minkowski_dot(u: &FourVector, v: &FourVector) -> Complex64 {
    (0..4).map(|mu| u.0[mu] * v.0[mu] * METRIC[mu]).sum()
}

/// `ū⁰v⁰ − Σ ūⁱvⁱ`, conjugating the first argument.
pub fn hermitian_dot(u: &FourVector, v: &FourVector) -> Complex64 {
    minkowski_dot(&u.conj(), v)
}

/// Coordinate axis of a boost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }
}

/// Pure Lorentz boost `x' = γ(x − u t)`, `t' = γ(t − u x / c²)` along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boost {
    velocity: f64,
    axis: Axis,
    c: f64,
    gamma: f64,
}

impl Boost {
    pub fn new(velocity: f64, axis: Axis, c: f64) -> Result<Self> {
        if !(velocity.abs() < c) {
            return Err(Error::SuperluminalBoost { velocity, c });
        }
        let beta = velocity / c;
        Ok(Boost {
            velocity,
            axis,
            c,
            gamma: 1.0 / (1.0 - beta * beta).sqrt(),
        })
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn inverse(&self) -> Boost {
        Boost {
            velocity: -self.velocity,
            ..*self
        }
    }

    /// Boost matrix `Λ^μ_ν` acting on contravariant components.
    pub fn matrix(&self) -> Matrix4<f64> {
        let beta = self.velocity / self.c;
        let a = self.axis.index();
        let mut m = Matrix4::identity();
        m[(0, 0)] = self.gamma;
        m[(a, a)] = self.gamma;
        m[(0, a)] = -self.gamma * beta;
        m[(a, 0)] = -self.gamma * beta;
        m
    }
}

pub fn boost_vector(b: &Boost, u: &FourVector) -> FourVector {
    let beta = b.velocity / b.c;
    let a = b.axis.index();
    let mut out = *u;
    out.0[0] = (u.0[0] - u.0[a] * beta) * b.gamma;
    out.0[a] = (u.0[a] - u.0[0] * beta) * b.gamma;
    out
}

/// Which construction produced a [`PolarizationBasis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// `{e₁, e₂, v/c − p c/ω}` for the polarization field.
    RestFrameP,
    /// Null tetrad `{e₀, e₁, e₂, e₃}` for the electromagnetic field.
    GitmanTyutinA,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationBasis {
    pub kind: BasisKind,
    /// `RestFrameP`: `[e₁, e₂, e₃']`. `GitmanTyutinA`: `[e₀, e₁, e₂, e₃]`.
    pub vectors: Vec<FourVector>,
}

impl PolarizationBasis {
    /// Residual of `v v/(v·v) + Σ_λ e_λ e_λ/(e_λ·e_λ) = η` (upper indices).
    ///
    /// Only meaningful for `RestFrameP`, whose vectors together with `v` form
    /// an orthogonal tetrad.
    pub fn resolution_residual(&self, v: &FourVector) -> f64 {
        let mut m = outer(v, v) / minkowski_dot(v, v);
        for e in &self.vectors {
            m += outer(e, e) / minkowski_dot(e, e);
        }
        let eta = metric_matrix();
        (m - eta).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `η^{μν}` as a complex matrix.
pub fn metric_matrix() -> Matrix4<Complex64> {
    Matrix4::from_diagonal(&Vector4::from(METRIC.map(Complex64::from)))
}

pub fn outer(u: &FourVector, w: &FourVector) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| u.0[i] * w.0[j])
}

/// Two orthonormal spatial vectors perpendicular to `k`.
///
/// Built by Gram–Schmidt from the two coordinate axes least aligned with `k`
/// (ties go to the lower axis index).
pub fn transverse_pair(k: [f64; 3]) -> Result<([f64; 3], [f64; 3])> {
    let norm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateWavevector);
    }
    let khat = k.map(|x| x / norm);
    let order = axes_by_alignment(khat);
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(2);
    for &axis in &order {
        let mut u = [0.0; 3];
        u[axis] = 1.0;
        let proj = dot3(&u, &khat);
        for i in 0..3 {
            u[i] -= proj * khat[i];
        }
        for e in &out {
            let p = dot3(&u, e);
            for i in 0..3 {
                u[i] -= p * e[i];
            }
        }
        let n = dot3(&u, &u).sqrt();
        if n > 1e-8 {
            out.push(u.map(|x| x / n));
        }
        if out.len() == 2 {
            break;
        }
    }
    Ok((out[0], out[1]))
}

fn axes_by_alignment(khat: [f64; 3]) -> [usize; 3] {
    let mut order = [0usize, 1, 2];
    // stable sort keeps lower index first on ties
    order.sort_by(|&a, &b| khat[a].abs().partial_cmp(&khat[b].abs()).unwrap());
    order
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Polarization-field basis `{e₁, e₂, v/c − p c/ω}` with `ω = v·p`.
///
/// `e₁, e₂` satisfy `v·e = p·e = 0` and `e·e = −1`. In the medium rest frame
/// they are purely spatial, `(0, ê)`.
pub fn build_polarization_basis_p(
    v: &FourVector,
    p: &FourVector,
    c: f64,
) -> Result<PolarizationBasis> {
    let vr = v.re();
    let pr = p.re();
    let k = [pr[1], pr[2], pr[3]];
    if k.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateWavevector);
    }
    let omega = minkowski_dot(v, p);
    if omega.norm() == 0.0 {
        return Err(Error::DegenerateWavevector);
    }
    let vv = real_dot(&vr, &vr);
    let vp = real_dot(&vr, &pr);
    let pp = real_dot(&pr, &pr);
    let det = vv * pp - vp * vp;
    if det.abs() < 1e-14 * (vv.abs() * pp.abs()).max(vp * vp).max(1e-300) {
        return Err(Error::DegenerateWavevector);
    }

    let norm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    let order = axes_by_alignment(k.map(|x| x / norm));
    let mut es: Vec<[f64; 4]> = Vec::with_capacity(2);
    for &axis in &order {
        let mut u = [0.0; 4];
        u[axis + 1] = 1.0;
        // remove the span{v, p} component
        let vu = real_dot(&vr, &u);
        let pu = real_dot(&pr, &u);
        let alpha = (pp * vu - vp * pu) / det;
        let beta = (vv * pu - vp * vu) / det;
        for mu in 0..4 {
            u[mu] -= alpha * vr[mu] + beta * pr[mu];
        }
        for e in &es {
            // e·e = −1
            let proj = -real_dot(e, &u);
            for mu in 0..4 {
                u[mu] -= proj * e[mu];
            }
        }
        let n2 = -real_dot(&u, &u);
        if n2 > 1e-16 {
            let n = n2.sqrt();
            es.push(u.map(|x| x / n));
        }
        if es.len() == 2 {
            break;
        }
    }
    if es.len() < 2 {
        return Err(Error::DegenerateWavevector);
    }
    let third = *v * (1.0 / c) - *p * (Complex64::from(c) / omega);
    Ok(PolarizationBasis {
        kind: BasisKind::RestFrameP,
        vectors: vec![FourVector::real(es[0]), FourVector::real(es[1]), third],
    })
}

fn real_dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

/// Gitman–Tyutin tetrad for a null wavevector with `p⁰ = |p| > 0`:
/// `e₀ = −i/(2|p|) (|p|, −p)`, `e₃ = −i p/|p|`, `e₁, e₂ = (0, ê)`.
pub fn build_gitman_tyutin_basis(p: &FourVector) -> Result<PolarizationBasis> {
    let pr = p.re();
    let k = [pr[1], pr[2], pr[3]];
    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if kn == 0.0 {
        return Err(Error::DegenerateWavevector);
    }
    let pp = real_dot(&pr, &pr);
    if pp.abs() > 1e-10 * kn * kn || pr[0] <= 0.0 {
        return Err(Error::NonNullWavevector(pp));
    }
    let mi = Complex64::new(0.0, -1.0);
    let e0 = FourVector::real([kn, -k[0], -k[1], -k[2]]) * (mi / (2.0 * kn));
    let e3 = FourVector::real([kn, k[0], k[1], k[2]]) * (mi / kn);
    let (a, b) = transverse_pair(k)?;
    let e1 = FourVector::real([0.0, a[0], a[1], a[2]]);
    let e2 = FourVector::real([0.0, b[0], b[1], b[2]]);
    Ok(PolarizationBasis {
        kind: BasisKind::GitmanTyutinA,
        vectors: vec![e0, e1, e2, e3],
    })
}

fn projector(u: &FourVector) -> Matrix4<Complex64> {
    metric_matrix() - outer(u, u) / minkowski_dot(u, u)
}

/// `𝒫^{μν} = η^{μν} − v^μ v^ν / (v·v)`.
pub fn projector_v(v: &FourVector) -> Result<Matrix4<Complex64>> {
    if minkowski_dot(v, v).norm() == 0.0 {
        return Err(Error::NullVelocity);
    }
    Ok(projector(v))
}

/// `𝒫̄^{μν} = η^{μν} − p^μ p^ν / (p·p)`.
pub fn projector_p(p: &FourVector) -> Result<Matrix4<Complex64>> {
    if minkowski_dot(p, p).norm() == 0.0 {
        return Err(Error::NullWavevector);
    }
    Ok(projector(p))
}

/// Contract two rank-2 contravariant tensors through the metric: `A^{μρ} η_{ρσ} B^{σν}`.
pub fn contract(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    a * metric_matrix() * b
}

/// `u_μ T^{μν}` as a contravariant vector in `ν`.
pub fn lower_contract(u: &FourVector, t: &Matrix4<Complex64>) -> FourVector {
    let ul = u.lower();
    FourVector(std::array::from_fn(|nu| {
        (0..4).map(|mu| ul.0[mu] * t[(mu, nu)]).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dot_examples() {
        let t = FourVector::real([1.0, 0.0, 0.0, 0.0]);
        let n = FourVector::real([1.0, 0.0, 0.0, 1.0]);
        assert_eq!(minkowski_dot(&t, &t), c(1.0));
        assert_eq!(minkowski_dot(&n, &n), c(0.0));
        let gt = build_gitman_tyutin_basis(&n).unwrap();
        let d = minkowski_dot(&gt.vectors[0], &gt.vectors[3]);
        assert!((d - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn hermitian_dot_conjugates_first() {
        let u = FourVector::new([Complex64::i(), ZERO, ZERO, ZERO]);
        assert_eq!(hermitian_dot(&u, &u), c(1.0));
        assert_eq!(minkowski_dot(&u, &u), c(-1.0));
    }

    #[test]
    fn boost_examples() {
        let u = FourVector::real([2.0, 0.3, -0.1, 0.7]);
        let id = Boost::new(0.0, Axis::X, 1.0).unwrap();
        assert_eq!(boost_vector(&id, &u), u);

        let vel = 0.6;
        let b = Boost::new(-vel, Axis::X, 1.0).unwrap();
        let v = boost_vector(&b, &FourVector::real([1.0, 0.0, 0.0, 0.0]));
        let g = 1.0 / (1.0f64 - vel * vel).sqrt();
        assert!((v.0[0].re - g).abs() < 1e-15);
        assert!((v.0[1].re - g * vel).abs() < 1e-15);

        assert!(matches!(
            Boost::new(1.0, Axis::Y, 1.0),
            Err(Error::SuperluminalBoost { .. })
        ));
        assert!((b.matrix().determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn basis_p_rest_frame_example() {
        let (w, k) = (0.7, 1.3);
        let v = FourVector::real([1.0, 0.0, 0.0, 0.0]);
        let p = FourVector::real([w, 0.0, 0.0, k]);
        let b = build_polarization_basis_p(&v, &p, 1.0).unwrap();
        assert_eq!(b.vectors[0], FourVector::real([0.0, 1.0, 0.0, 0.0]));
        assert_eq!(b.vectors[1], FourVector::real([0.0, 0.0, 1.0, 0.0]));
        let e3 = b.vectors[2];
        assert!((e3 - FourVector::real([0.0, 0.0, 0.0, -k / w])).max_abs() < 1e-15);
        for e in &b.vectors[..2] {
            assert_eq!(minkowski_dot(&v, e), c(0.0));
            assert_eq!(minkowski_dot(&p, e), c(0.0));
        }
        assert!(b.resolution_residual(&v) < 1e-12);
    }

    #[test]
    fn basis_p_degenerate() {
        let v = FourVector::real([1.0, 0.0, 0.0, 0.0]);
        let p = FourVector::real([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            build_polarization_basis_p(&v, &p, 1.0),
            Err(Error::DegenerateWavevector)
        );
    }

    #[test]
    fn gitman_tyutin_example() {
        let p = FourVector::real([1.0, 0.0, 0.0, 1.0]);
        let b = build_gitman_tyutin_basis(&p).unwrap();
        let mi = Complex64::new(0.0, -1.0);
        assert_eq!(b.vectors[3], FourVector::real([1.0, 0.0, 0.0, 1.0]) * mi);
        assert_eq!(
            b.vectors[0],
            FourVector::real([1.0, 0.0, 0.0, -1.0]) * (mi * 0.5)
        );
        assert_eq!(minkowski_dot(&b.vectors[0], &b.vectors[0]), c(0.0));
        assert_eq!(minkowski_dot(&b.vectors[3], &b.vectors[3]), c(0.0));
        assert!(matches!(
            build_gitman_tyutin_basis(&FourVector::real([2.0, 0.0, 0.0, 1.0])),
            Err(Error::NonNullWavevector(_))
        ));
    }

    #[test]
    fn projector_examples() {
        let v = FourVector::real([1.0, 0.0, 0.0, 0.0]);
        let pv = projector_v(&v).unwrap();
        let expect = Matrix4::from_diagonal(&Vector4::new(c(0.0), c(-1.0), c(-1.0), c(-1.0)));
        assert_eq!(pv, expect);
        assert!(lower_contract(&v, &pv).max_abs() < 1e-15);
        assert!((contract(&pv, &pv) - pv).norm() < 1e-12);

        let p = FourVector::real([0.0, 0.0, 0.0, 1.0]);
        let pp = projector_p(&p).unwrap();
        let expect = Matrix4::from_diagonal(&Vector4::new(c(1.0), c(-1.0), c(-1.0), c(0.0)));
        assert_eq!(pp, expect);
        assert!(lower_contract(&p, &pp).max_abs() < 1e-15);

        // commute when v·q = 0
        let q = FourVector::real([0.0, 0.3, 0.0, 1.1]);
        let pq = projector_p(&q).unwrap();
        let comm = contract(&pv, &pq) - contract(&pq, &pv);
        assert!(comm.norm() < 1e-12);

        // otherwise [𝒫, 𝒫̄] = (v·q)/((v·v)(q·q)) (v q − q v)
        let q = FourVector::real([0.4, 0.0, 0.0, 1.1]);
        let pq = projector_p(&q).unwrap();
        let comm = contract(&pv, &pq) - contract(&pq, &pv);
        let vq = minkowski_dot(&v, &q);
        let expect = (outer(&v, &q) - outer(&q, &v))
            * (vq / (minkowski_dot(&v, &v) * minkowski_dot(&q, &q)));
        assert!((comm - expect).norm() < 1e-12);
        assert!(comm.norm() > 0.1);
        // both projectors agree on vectors orthogonal to v and q
        let e = FourVector::real([0.0, 1.0, 0.0, 0.0]);
        let lhs = pv * metric_matrix() * pq * metric_matrix() * e.to_vector();
        let rhs = pq * metric_matrix() * pv * metric_matrix() * e.to_vector();
        assert!((lhs - rhs).norm() < 1e-12);

        assert_eq!(
            projector_v(&FourVector::real([1.0, 1.0, 0.0, 0.0])),
            Err(Error::NullVelocity)
        );
        assert_eq!(
            projector_p(&FourVector::real([1.0, 0.0, 1.0, 0.0])),
            Err(Error::NullWavevector)
        );
    }
}
