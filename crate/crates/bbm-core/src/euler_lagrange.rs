//! Boundary value problems for the optimal rescaled paths.
//!
//! Away from the frontier, optimal paths satisfy `f'' + m β p f^{p-1} = 0`,
//! which conserves the energy `f'^2 / 2 + m β f^p = c`. Because `f^{p-1}`
//! blows up at the origin for `p < 1`, the solver works in first-integral
//! form throughout: travel times are time-of-flight integrals
//! `∫ dx / sqrt(2 (c - m β x^p))`, and the boundary conditions are enforced
//! by bisection on the energy (or the peak height, or the switch time). The
//! inverse-square-root singularity at a turning point `M = (c / m β)^{1/p}`
//! is removed by the substitution `x = M - (M - a) u²`, after which every
//! integrand is bounded and smooth.

use crate::model::PotentialParams;
use crate::numerics::{bisect, integrate, HermiteTable};
use crate::rate::{uniform_grid, SampledPath, DEFAULT_GRID_INTERVALS};
use crate::{Error, Real, Result, Scalar};

/// Endpoint matching tolerance `|f(1) - z|` for the solved paths.
pub const BVP_TOL: f64 = 1e-8;

/// Bisection tolerance on energy constants, peak heights and switch times.
const ROOT_TOL: f64 = 1e-10;

/// Absolute tolerance for time-of-flight quadratures.
const TOF_TOL: f64 = 1e-12;

/// Panels per monotone branch in the dense-path tables.
const TABLE_PANELS: usize = 1024;

/// Frontier trajectory `r(s) = (m β s² (2-p)² / 2)^{1/(2-p)}`, the rescaled
/// path of the right-most particle; the unique path with `K(r, ·) ≡ 0`.
pub fn frontier<S: Scalar>(params: &PotentialParams<S>, s: S) -> S {
    if s == S::zero() {
        return S::zero();
    }
    frontier_coef(params) * s.powf(params.q())
}

/// Frontier endpoint `z̄ = r(1)`, the rightmost rescaled position reachable
/// without extinction.
pub fn frontier_endpoint<S: Scalar>(params: &PotentialParams<S>) -> S {
    frontier_coef(params)
}

fn frontier_coef<S: Scalar>(params: &PotentialParams<S>) -> S {
    let two = S::lit(2.0);
    let gap = two - params.p();
    (params.mbeta() * gap * gap / two).powf(S::one() / gap)
}

/// Derivative `r'(s)` of the frontier.
fn frontier_deriv<S: Scalar>(params: &PotentialParams<S>, s: S) -> S {
    let q = params.q();
    if s == S::zero() {
        // q > 1 for p > 0 (slope 0); q = 1 at p = 0 (slope = coefficient).
        if params.p() == S::zero() {
            return frontier_coef(params);
        }
        return S::zero();
    }
    frontier_coef(params) * q * s.powf(q - S::one())
}

/// An optimal trajectory with the quantities attached to it.
#[derive(Debug, Clone)]
pub struct OptimalPathResult<S: Scalar = Real> {
    /// The path resampled onto the standard uniform grid.
    pub path: SampledPath<S>,
    /// Switch time `s_z` (0 for unconstrained solutions).
    pub s_switch: S,
    /// First-integral constant `c` in `f'^2/2 + m β f^p = c` on the
    /// Euler–Lagrange segment.
    pub energy_c: S,
    /// `K(path, 1)`, evaluated by quadrature on the exact solution.
    pub k_value: S,
    /// Terminal slope `f'(1)`.
    pub endpoint_deriv: S,
    /// Piecewise-exact evaluator for the path (frontier formula plus
    /// Hermite tables of the Euler–Lagrange branches).
    pub dense: DensePath<S>,
}

/// Piecewise representation of a solved path.
#[derive(Debug, Clone)]
pub struct DensePath<S: Scalar = Real> {
    segments: Vec<Segment<S>>,
}

#[derive(Debug, Clone)]
enum Segment<S: Scalar> {
    /// `f(s) = coef · s^expo` on `[0, until]`.
    Frontier { coef: S, expo: S, until: S },
    /// Hermite table of one monotone Euler–Lagrange branch.
    Arc(HermiteTable<S>),
}

impl<S: Scalar> DensePath<S> {
    /// Evaluate the path at `s ∈ [0, 1]`.
    pub fn eval(&self, s: S) -> S {
        let s = s.max(S::zero());
        for seg in &self.segments {
            match seg {
                Segment::Frontier { coef, expo, until } => {
                    if s <= *until {
                        return *coef * s.powf(*expo);
                    }
                }
                Segment::Arc(table) => {
                    if s <= table.end() {
                        return table.eval(s);
                    }
                }
            }
        }
        // Past the final tabulated time (rounding at s = 1).
        match self.segments.last().expect("dense path has segments") {
            Segment::Frontier { coef, expo, .. } => *coef * s.powf(*expo),
            Segment::Arc(table) => table.eval(s),
        }
    }

    fn resample(&self, n: usize) -> SampledPath<S> {
        let grid = uniform_grid::<S>(n);
        let mut values: Vec<S> = grid.iter().map(|&s| self.eval(s)).collect();
        values[0] = S::zero();
        SampledPath::new(grid, values).expect("resampled path is valid")
    }
}

/// `m β (M^p - x^p)` with `x = M - d`, stable when `d ≪ M`.
fn energy_gap<S: Scalar>(params: &PotentialParams<S>, peak: S, d: S) -> S {
    let p = params.p();
    let ratio = d / peak;
    let diff = if ratio < S::lit(0.5) {
        -peak.powf(p) * (p * (-ratio).ln_1p()).exp_m1()
    } else {
        peak.powf(p) - (peak - d).powf(p)
    };
    (params.mbeta() * diff).max(S::zero())
}

/// Travel time from `a` up to `b` (`0 <= a <= b <= peak`) along an
/// Euler–Lagrange arc with energy `c = m β peak^p`.
fn time_of_flight<S: Scalar>(params: &PotentialParams<S>, peak: S, a: S, b: S) -> S {
    transformed_integral(params, peak, a, b, |_x, w| w, S::lit(TOF_TOL))
}

/// `∫ x^p ds` along the same stretch of arc (used for the value of `K`).
fn potential_time_integral<S: Scalar>(params: &PotentialParams<S>, peak: S, a: S, b: S) -> S {
    let tol = S::lit(TOF_TOL) * S::one().max(params.abs_pow(peak));
    transformed_integral(params, peak, a, b, |x, w| params.abs_pow(x) * w, tol)
}

/// Integrate `g(x, ds)` over the branch from `a` to `b` in the substituted
/// variable `x = peak - span·u²`, which removes the turning-point
/// singularity at `x = peak`.
fn transformed_integral<S: Scalar>(
    params: &PotentialParams<S>,
    peak: S,
    a: S,
    b: S,
    g: impl Fn(S, S) -> S,
    tol: S,
) -> S {
    if b <= a {
        return S::zero();
    }
    let span = peak - a;
    let u_b = if b >= peak {
        S::zero()
    } else {
        ((peak - b) / span).sqrt()
    };
    let two = S::lit(2.0);
    integrate(
        |u: S| {
            let d = span * u * u;
            let x = a + span * (S::one() - u) * (S::one() + u);
            let speed_sq = two * energy_gap(params, peak, d);
            g(x, two * span * u / speed_sq.sqrt())
        },
        u_b,
        S::one(),
        tol,
    )
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Rising,
    Falling,
}

/// Tabulate one monotone branch (`x` between `x_lo` and `x_hi <= peak`) as a
/// Hermite table over time, starting at `t_start`.
fn branch_table<S: Scalar>(
    params: &PotentialParams<S>,
    peak: S,
    x_lo: S,
    x_hi: S,
    dir: Direction,
    t_start: S,
) -> (HermiteTable<S>, S) {
    let span = peak - x_lo;
    let u_hi = if x_hi >= peak {
        S::zero()
    } else {
        ((peak - x_hi) / span).sqrt()
    };
    let n = TABLE_PANELS;
    let nf = S::lit(n as f64);
    let two = S::lit(2.0);

    // u runs from 1 (bottom) to u_hi (top) for rising branches and the other
    // way for falling ones; time always advances.
    let u_at = |k: usize| -> S {
        let frac = S::lit(k as f64) / nf;
        match dir {
            Direction::Rising => S::one() + frac * (u_hi - S::one()),
            Direction::Falling => u_hi + frac * (S::one() - u_hi),
        }
    };
    let panel_time = |u0: S, u1: S| -> S {
        let (lo, hi) = if u0 < u1 { (u0, u1) } else { (u1, u0) };
        integrate(
            |u: S| {
                let d = span * u * u;
                two * span * u / (two * energy_gap(params, peak, d)).sqrt()
            },
            lo,
            hi,
            S::lit(TOF_TOL) / nf,
        )
    };

    let mut s = Vec::with_capacity(n + 1);
    let mut x = Vec::with_capacity(n + 1);
    let mut v = Vec::with_capacity(n + 1);
    let mut t = t_start;
    for k in 0..=n {
        let u = u_at(k);
        if k > 0 {
            t = t + panel_time(u_at(k - 1), u);
        }
        let xk = x_lo + span * (S::one() - u) * (S::one() + u);
        let speed = (two * energy_gap(params, peak, span * u * u)).sqrt();
        s.push(t);
        x.push(xk);
        v.push(match dir {
            Direction::Rising => speed,
            Direction::Falling => -speed,
        });
    }
    let t_end = t;
    (HermiteTable::new(s, x, v), t_end)
}

/// Optimal path for expected growth: `f'' + m β p f^{p-1} = 0` with
/// `f(0) = 0`, `f(1) = z`, positive on `(0, 1)` for `p > 0`.
///
/// For `z` beyond the zero-terminal-slope endpoint the path is monotone and
/// the energy is found by bisection; below it the path overshoots to a peak
/// `M` (with `c = m β M^p`) and descends, and the peak is found by bisection.
/// `z = 0` with `p > 0` returns the positive representative of the two
/// symmetric optima. Negative `z` is rejected; use `h_{-z}(s) = -h_z(s)`.
pub fn solve_unconstrained<S: Scalar>(
    params: &PotentialParams<S>,
    z: S,
) -> Result<OptimalPathResult<S>> {
    if z < S::zero() || !z.is_finite() {
        return Err(Error::InvalidInput(format!(
            "endpoint z = {z} must be >= 0 (use symmetry for z < 0)"
        )));
    }
    if params.p() == S::zero() {
        return Ok(straight_line(params, z));
    }
    let mbeta = params.mbeta();
    let one = S::one();
    let two = S::lit(2.0);

    // Time of the zero-terminal-slope (peak exactly at s = 1) solution.
    let tau_peak = if z > S::zero() {
        time_of_flight(params, z, S::zero(), z)
    } else {
        S::zero()
    };

    if z > S::zero() && tau_peak >= one {
        // Monotone regime: increase the energy until the travel time is 1.
        let c_lo = mbeta * params.abs_pow(z);
        let travel = |c: S| -> S {
            let peak = (c / mbeta).powf(one / params.p());
            time_of_flight(params, peak, S::zero(), z)
        };
        let mut c_hi = c_lo * two;
        let mut guard = 0;
        while travel(c_hi) > one {
            c_hi = c_hi * two;
            guard += 1;
            if guard > 200 {
                return Err(Error::Solver(format!(
                    "could not bracket energy for unconstrained endpoint z = {z}"
                )));
            }
        }
        let c = bisect(|c| travel(c) - one, c_lo, c_hi, S::lit(ROOT_TOL))?;
        let peak = (c / mbeta).powf(one / params.p());
        let (table, _) = branch_table(params, peak, S::zero(), z, Direction::Rising, S::zero());
        let k_value = two * mbeta * potential_time_integral(params, peak, S::zero(), z) - c;
        let endpoint_deriv = (two * energy_gap(params, peak, peak - z)).sqrt();
        let dense = DensePath { segments: vec![Segment::Arc(table)] };
        return Ok(finish(dense, S::zero(), c, k_value, endpoint_deriv));
    }

    // Peaked regime: rise to M >= z, then descend to z.
    let peak = if z > S::zero() {
        let round_trip = |m: S| -> S {
            time_of_flight(params, m, S::zero(), m) + time_of_flight(params, m, z, m)
        };
        let mut m_hi = z * two;
        let mut guard = 0;
        while round_trip(m_hi) < one {
            m_hi = m_hi * two;
            guard += 1;
            if guard > 200 {
                return Err(Error::Solver(format!(
                    "could not bracket peak for unconstrained endpoint z = {z}"
                )));
            }
        }
        bisect(|m| round_trip(m) - one, z, m_hi, S::lit(ROOT_TOL))?
    } else {
        // z = 0: both halves take the same time, so the one-way time is 1/2,
        // and the peak follows from the unit-peak time by scaling.
        let unit_time = time_of_flight(params, one, S::zero(), one);
        (one / (two * unit_time)).powf(two / (two - params.p()))
    };
    let c = mbeta * params.abs_pow(peak);
    let (up, t_turn) = branch_table(params, peak, S::zero(), peak, Direction::Rising, S::zero());
    let (down, _) = branch_table(params, peak, z, peak, Direction::Falling, t_turn);
    let k_value = two
        * mbeta
        * (potential_time_integral(params, peak, S::zero(), peak)
            + potential_time_integral(params, peak, z, peak))
        - c;
    let endpoint_deriv = -(two * energy_gap(params, peak, peak - z)).sqrt();
    let dense = DensePath { segments: vec![Segment::Arc(up), Segment::Arc(down)] };
    Ok(finish(dense, S::zero(), c, k_value, endpoint_deriv))
}

/// Optimal path for almost-sure growth on `[0, z̄]`: rides the frontier
/// `r(s)` up to the switch time `s_z`, then follows the Euler–Lagrange arc
/// with `C¹` matching (`c = 2 m β r(s_z)^p`, peak `2^{1/p} r(s_z)`) to reach
/// `z` at `s = 1`.
///
/// The switch time is located by bisection on the terminal value. Endpoints
/// outside `[0, z̄]` (beyond [`BVP_TOL`]) are rejected: no extinction-free
/// path reaches them.
pub fn solve_constrained<S: Scalar>(
    params: &PotentialParams<S>,
    z: S,
) -> Result<OptimalPathResult<S>> {
    let z_bar = frontier_endpoint(params);
    if z < -S::lit(BVP_TOL) || z > z_bar + S::lit(BVP_TOL) || !z.is_finite() {
        return Err(Error::InvalidInput(format!(
            "endpoint z = {z} outside [0, z_bar = {z_bar}]"
        )));
    }
    let z = z.max(S::zero()).min(z_bar);
    if params.p() == S::zero() {
        // The Euler–Lagrange equation degenerates to f'' = 0 and the straight
        // line satisfies the no-extinction constraint on the whole of [0, z̄].
        return Ok(straight_line(params, z));
    }
    let one = S::one();
    let two = S::lit(2.0);
    let mbeta = params.mbeta();

    if (z_bar - z).abs() <= S::lit(BVP_TOL) {
        // Pure frontier ride.
        let coef = frontier_coef(params);
        let dense = DensePath {
            segments: vec![Segment::Frontier { coef, expo: params.q(), until: one }],
        };
        let c = two * mbeta * params.abs_pow(z_bar);
        return Ok(finish(dense, one, c, S::zero(), frontier_deriv(params, one)));
    }

    // Terminal value of the two-phase path as a function of the switch time;
    // continued linearly below zero so the bisection bracket stays valid.
    let terminal = |s_switch: S| -> Result<S> {
        let x0 = frontier(params, s_switch);
        let peak = two.powf(one / params.p()) * x0;
        let budget = one - s_switch;
        let t_up = time_of_flight(params, peak, x0, peak);
        if budget <= t_up {
            return bisect(
                |x| time_of_flight(params, peak, x0, x) - budget,
                x0,
                peak,
                S::lit(ROOT_TOL),
            );
        }
        let leftover = budget - t_up;
        let t_down = time_of_flight(params, peak, S::zero(), peak);
        if leftover <= t_down {
            return bisect(
                |x| leftover - time_of_flight(params, peak, x, peak),
                S::zero(),
                peak,
                S::lit(ROOT_TOL),
            );
        }
        let c = mbeta * params.abs_pow(peak);
        Ok(-(leftover - t_down) * (two * c).sqrt())
    };

    let s_z = bisect(
        |s| terminal(s).map(|x| x - z).unwrap_or(S::nan()),
        switch_floor(params),
        one,
        S::lit(ROOT_TOL),
    )?;

    // Rebuild the converged solution.
    let x0 = frontier(params, s_z);
    let peak = two.powf(one / params.p()) * x0;
    let c = two * mbeta * params.abs_pow(x0);
    let budget = one - s_z;
    let t_up = time_of_flight(params, peak, x0, peak);
    let coef = frontier_coef(params);
    let frontier_seg = Segment::Frontier { coef, expo: params.q(), until: s_z };

    let (dense, k_value, endpoint_deriv, x_end) = if budget <= t_up {
        // Still rising at s = 1.
        let x_end = terminal(s_z)?;
        let (table, _) = branch_table(params, peak, x0, x_end, Direction::Rising, s_z);
        let k = two * mbeta * potential_time_integral(params, peak, x0, x_end) - c * budget;
        let deriv = (two * energy_gap(params, peak, peak - x_end)).sqrt();
        (
            DensePath { segments: vec![frontier_seg, Segment::Arc(table)] },
            k,
            deriv,
            x_end,
        )
    } else {
        let x_end = terminal(s_z)?.max(S::zero());
        let (up, t_turn) = branch_table(params, peak, x0, peak, Direction::Rising, s_z);
        let (down, _) = branch_table(params, peak, x_end, peak, Direction::Falling, t_turn);
        let k = two
            * mbeta
            * (potential_time_integral(params, peak, x0, peak)
                + potential_time_integral(params, peak, x_end, peak))
            - c * budget;
        let deriv = -(two * energy_gap(params, peak, peak - x_end)).sqrt();
        (
            DensePath { segments: vec![frontier_seg, Segment::Arc(up), Segment::Arc(down)] },
            k,
            deriv,
            x_end,
        )
    };

    if (x_end - z).abs() > S::lit(10.0 * BVP_TOL) {
        return Err(Error::Solver(format!(
            "constrained path missed endpoint z = {z} (reached {x_end})"
        )));
    }
    Ok(finish(dense, s_z, c, k_value, endpoint_deriv))
}

/// Smallest switch time probed by the bisection: keeps `r(s)^p` (and hence
/// the matched energy) clear of f64 underflow for p near 2.
fn switch_floor<S: Scalar>(params: &PotentialParams<S>) -> S {
    let p = params.p().as_f64();
    let q = params.q().as_f64();
    let ln_coef = frontier_coef(params).as_f64().ln();
    // Require p·ln(r(s)) >= ln(1e-290).
    let ln_s = (-667.0 / p - ln_coef) / q;
    S::lit(ln_s.exp().clamp(1e-12, 1e-3))
}

/// `p = 0`: the Euler–Lagrange equation is `f'' = 0`; the optimum through
/// `(0, 0)` and `(1, z)` is the straight line, for both problems.
fn straight_line<S: Scalar>(params: &PotentialParams<S>, z: S) -> OptimalPathResult<S> {
    let one = S::one();
    let half = S::lit(0.5);
    let table = HermiteTable::new(vec![S::zero(), one], vec![S::zero(), z], vec![z, z]);
    let dense = DensePath { segments: vec![Segment::Arc(table)] };
    // |f|^0 = 1: energy f'^2/2 + m β and K = m β - z²/2 are exact.
    let c = half * z * z + params.mbeta();
    let k_value = params.mbeta() - half * z * z;
    finish(dense, S::zero(), c, k_value, z)
}

fn finish<S: Scalar>(
    dense: DensePath<S>,
    s_switch: S,
    energy_c: S,
    k_value: S,
    endpoint_deriv: S,
) -> OptimalPathResult<S> {
    let path = dense.resample(DEFAULT_GRID_INTERVALS);
    OptimalPathResult { path, s_switch, energy_c, k_value, endpoint_deriv, dense }
}
