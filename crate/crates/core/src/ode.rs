//! Adaptive Dormand–Prince 5(4) for linear matrix ODEs `Y' = K(x) Y`.

use num_complex::Complex64;

use crate::linalg::{max_abs, CMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub min_step: f64,
    /// Abort with `EvanescentOverflow` once `max|Y|` exceeds this.
    pub growth_limit: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            max_steps: 200_000,
            min_step: 1e-12,
            growth_limit: 1e12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// h Σ w_i K_i
fn lc(terms: &[(&CMatrix, f64)], h: f64) -> CMatrix {
    let mut out = terms[0].0 * Complex64::from(terms[0].1 * h);
    for (m, w) in &terms[1..] {
        out += *m * Complex64::from(w * h);
    }
    out
}

/// Integrate `Y' = K(x) Y` from `x0` to `x1` starting at `y0`.
pub fn integrate<F>(
    k: F,
    x0: f64,
    x1: f64,
    y0: CMatrix,
    opts: &OdeOptions,
) -> Result<(CMatrix, OdeStats)>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let mut stats = OdeStats {
        accepted: 0,
        rejected: 0,
    };
    if x1 == x0 {
        return Ok((y0, stats));
    }
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut x = x0;
    let mut y = y0;
    let mut h = (span / 100.0).min(0.1 * span.max(1e-3));
    let mut k1 = &k(x)? * &y;
    while (x1 - x) * dir > 0.0 {
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(Error::StiffnessFailure(x));
        }
        if h > (x1 - x).abs() {
            h = (x1 - x).abs();
        }
        let hs = h * dir;
        let k2 = &k(x + C2 * hs)? * &(&y + lc(&[(&k1, A21)], hs));
        let k3 = &k(x + C3 * hs)? * &(&y + lc(&[(&k1, A31), (&k2, A32)], hs));
        let k4 = &k(x + C4 * hs)? * &(&y + lc(&[(&k1, A41), (&k2, A42), (&k3, A43)], hs));
        let k5 =
            &k(x + C5 * hs)? * &(&y + lc(&[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)], hs));
        let k6 = &k(x + hs)?
            * &(&y
                + lc(
                    &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)],
                    hs,
                ));
        let y_new = &y + lc(&[(&k1, B1), (&k3, B3), (&k4, B4), (&k5, B5), (&k6, B6)], hs);
        let k7 = &k(x + hs)? * &y_new;
        let err = lc(
            &[
                (&k1, E1),
                (&k3, E3),
                (&k4, E4),
                (&k5, E5),
                (&k6, E6),
                (&k7, E7),
            ],
            hs,
        );
        let scale = opts.atol + opts.rtol * max_abs(&y).max(max_abs(&y_new));
        let en = max_abs(&err) / scale;
        if en <= 1.0 || h <= opts.min_step {
            x += hs;
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            let g = max_abs(&y);
            if !g.is_finite() || g > opts.growth_limit {
                return Err(Error::EvanescentOverflow(g));
            }
            let fac = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            stats.rejected += 1;
            h *= (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
            if h < opts.min_step {
                h = opts.min_step;
            }
        }
    }
    Ok((y, stats))
}
