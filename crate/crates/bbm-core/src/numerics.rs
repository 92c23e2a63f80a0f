//! Shared numerical kernels: adaptive Gauss–Kronrod quadrature, bracketed
//! bisection, the log-gamma function, and cubic Hermite interpolation.

use crate::{Error, Result, Scalar};

/// 15-point Kronrod abscissae on `[-1, 1]` (positive half, outermost first).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// 7-point Gauss weights for the embedded rule (nodes are `XGK[1, 3, 5, 7]`).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss–Kronrod 7/15 panel. Returns the Kronrod estimate and the
/// `|K15 - G7|` error indicator.
fn gk15<S: Scalar>(f: &impl Fn(S) -> S, a: S, b: S) -> (S, S) {
    let half = S::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);

    let f_center = f(center);
    let mut kronrod = S::lit(WGK[7]) * f_center;
    let mut gauss = S::lit(WG[3]) * f_center;

    for j in 0..7 {
        let dx = half_len * S::lit(XGK[j]);
        let fsum = f(center - dx) + f(center + dx);
        kronrod = kronrod + S::lit(WGK[j]) * fsum;
        if j % 2 == 1 {
            gauss = gauss + S::lit(WG[j / 2]) * fsum;
        }
    }
    let kronrod = kronrod * half_len;
    let gauss = gauss * half_len;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `tol`.
///
/// Interval bisection recurses where the embedded error indicator exceeds the
/// local tolerance share; depth is capped so endpoint singularities that were
/// not fully substituted away still terminate (with degraded accuracy).
pub fn integrate<S: Scalar>(f: impl Fn(S) -> S, a: S, b: S, tol: S) -> S {
    if a == b {
        return S::zero();
    }
    let mut total = S::zero();
    // Manual stack of (a, b, tol_share, depth).
    let mut stack: Vec<(S, S, S, u32)> = vec![(a, b, tol, 0)];
    while let Some((lo, hi, tol_here, depth)) = stack.pop() {
        let (value, err) = gk15(&f, lo, hi);
        if err <= tol_here || depth >= 60 {
            total = total + value;
        } else {
            let mid = S::lit(0.5) * (lo + hi);
            let half_tol = tol_here * S::lit(0.5);
            stack.push((lo, mid, half_tol, depth + 1));
            stack.push((mid, hi, half_tol, depth + 1));
        }
    }
    total
}

/// Bracketed bisection for `f(x) = 0` on `[lo, hi]`.
///
/// Requires a sign change across the bracket. Iterates until the bracket
/// width drops below `xtol` or, for brackets that start far below `xtol`
/// in absolute size, to relative machine precision.
pub fn bisect<S: Scalar>(f: impl Fn(S) -> S, lo: S, hi: S, xtol: S) -> Result<S> {
    let mut lo = lo;
    let mut hi = hi;
    let f_lo = f(lo);
    if f_lo == S::zero() {
        return Ok(lo);
    }
    let f_hi = f(hi);
    if f_hi == S::zero() {
        return Ok(hi);
    }
    if (f_lo > S::zero()) == (f_hi > S::zero()) {
        return Err(Error::Solver(format!(
            "bisection bracket [{lo}, {hi}] does not straddle a root (f: {f_lo}, {f_hi})"
        )));
    }
    let lo_positive = f_lo > S::zero();
    let ulp_scale = S::lit(64.0) * S::epsilon();
    for _ in 0..220 {
        let mid = S::lit(0.5) * (lo + hi);
        let width = hi - lo;
        if width <= xtol.min(ulp_scale * mid.abs().max(S::min_positive_value())) {
            break;
        }
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(Error::Solver(format!("bisection hit NaN at x = {mid}")));
        }
        if f_mid == S::zero() {
            return Ok(mid);
        }
        if (f_mid > S::zero()) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(S::lit(0.5) * (lo + hi))
}

/// Natural logarithm of the gamma function for `x > 0`.
///
/// Lanczos approximation (g = 7, 9 terms); relative error below `2e-13` on
/// the positive real axis, which is ample for the closed-form endpoint
/// formulas evaluated here.
pub fn ln_gamma<S: Scalar>(x: S) -> S {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > S::zero());
    if x < S::lit(0.5) {
        // Reflection: ln Γ(x) = ln(π / sin(πx)) − ln Γ(1 − x).
        let pi = S::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(S::one() - x);
    }
    let xm1 = x - S::one();
    let mut acc = S::lit(0.999_999_999_999_809_93);
    for (i, &c) in COEFFS.iter().enumerate() {
        acc = acc + S::lit(c) / (xm1 + S::lit(i as f64 + 1.0));
    }
    let t = xm1 + S::lit(7.5);
    S::lit(0.918_938_533_204_672_74) // ln sqrt(2π)
        + (xm1 + S::lit(0.5)) * t.ln()
        - t
        + acc.ln()
}

/// Tabulated function values with derivatives, interpolated by cubic Hermite
/// polynomials. Nodes must be strictly increasing.
#[derive(Debug, Clone)]
pub struct HermiteTable<S> {
    pub s: Vec<S>,
    pub x: Vec<S>,
    pub v: Vec<S>,
}

impl<S: Scalar> HermiteTable<S> {
    pub fn new(s: Vec<S>, x: Vec<S>, v: Vec<S>) -> Self {
        debug_assert_eq!(s.len(), x.len());
        debug_assert_eq!(s.len(), v.len());
        debug_assert!(s.windows(2).all(|w| w[1] > w[0]));
        Self { s, x, v }
    }

    pub fn start(&self) -> S {
        self.s[0]
    }

    pub fn end(&self) -> S {
        *self.s.last().unwrap()
    }

    /// Evaluate at `t`, clamped to the table range.
    pub fn eval(&self, t: S) -> S {
        let n = self.s.len();
        if t <= self.s[0] {
            return self.x[0];
        }
        if t >= self.s[n - 1] {
            return self.x[n - 1];
        }
        // Binary search for the panel containing t.
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.s[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.s[hi] - self.s[lo];
        let u = (t - self.s[lo]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let two = S::lit(2.0);
        let three = S::lit(3.0);
        let h00 = two * u3 - three * u2 + S::one();
        let h10 = u3 - two * u2 + u;
        let h01 = -two * u3 + three * u2;
        let h11 = u3 - u2;
        h00 * self.x[lo] + h10 * h * self.v[lo] + h01 * self.x[hi] + h11 * h * self.v[hi]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gk_exact_on_polynomials() {
        // K15 integrates polynomials of degree <= 22 exactly.
        let v: f64 = integrate(|x: f64| x.powi(10), 0.0, 1.0, 1e-14);
        assert_relative_eq!(v, 1.0 / 11.0, max_relative = 1e-14);
        let v: f64 = integrate(|x: f64| 5.0 * x.powi(4) - 2.0 * x, -1.0, 3.0, 1e-14);
        assert_relative_eq!(v, 3.0f64.powi(5) + 1.0 - (9.0 - 1.0), max_relative = 1e-13);
    }

    #[test]
    fn gk_handles_unbounded_derivative_at_endpoint() {
        // x^0.6 has an infinite derivative at 0; the kind of integrand the
        // solvers produce after substituting away inverse-sqrt singularities.
        let v: f64 = integrate(|x: f64| x.powf(0.6), 0.0, 1.0, 1e-12);
        assert_relative_eq!(v, 1.0 / 1.6, epsilon = 1e-11);
    }

    #[test]
    fn gk_oscillatory() {
        let v: f64 = integrate(|x: f64| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-12);
        let exact = (1.0 - (10.0 * std::f64::consts::PI).cos()) / 10.0;
        assert_relative_eq!(v, exact, epsilon = 1e-11);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r: f64 = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-11);
    }

    #[test]
    fn bisect_refines_tiny_brackets_to_relative_precision() {
        // Root at 3e-40; the initial bracket is far below any absolute xtol.
        let r: f64 = bisect(|x: f64| x - 3e-40, 1e-40, 1e-39, 1e-10).unwrap();
        assert_relative_eq!(r, 3e-40, max_relative = 1e-12);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn ln_gamma_reference_values() {
        // Γ(1/2) = sqrt(π), Γ(3/2) = sqrt(π)/2, Γ(5) = 24, Γ(7/6) ≈ 0.927719…
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert_relative_eq!(ln_gamma(0.5f64), sqrt_pi.ln(), max_relative = 1e-12);
        assert_relative_eq!(ln_gamma(1.5f64), (sqrt_pi / 2.0).ln(), max_relative = 1e-12);
        assert_relative_eq!(ln_gamma(5.0f64), 24.0f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(
            ln_gamma(7.0 / 6.0f64),
            0.927_719_333_630_039_2_f64.ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn hermite_reproduces_cubic() {
        // x(t) = t^3 - t with exact derivatives at coarse nodes.
        let s: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let x: Vec<f64> = s.iter().map(|&t| t * t * t - t).collect();
        let v: Vec<f64> = s.iter().map(|&t| 3.0 * t * t - 1.0).collect();
        let table = HermiteTable::new(s, x, v);
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert_relative_eq!(table.eval(t), t * t * t - t, epsilon = 1e-14);
        }
    }
}
