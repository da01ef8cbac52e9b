//! Dormand–Prince 5(4) integration with PI step-size control.
//!
//! Every accepted step is recorded, so the returned [`Trajectory`] is dense
//! enough for envelope and phase fitting as long as `max_step` is chosen
//! below the fastest oscillation period of interest.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
}

impl Tolerances {
    pub fn new(abs_tol: f64, rel_tol: f64, max_step: f64, min_step: f64) -> Result<Self> {
        let tol = Self {
            abs_tol,
            rel_tol,
            max_step,
            min_step,
        };
        tol.validate()?;
        Ok(tol)
    }

    /// Painlevé-layer runs: abs = rel = 1e-10.
    pub fn painleve_default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_step: 0.1,
            min_step: 1e-13,
        }
    }

    /// Runs of the slowly varying equation: abs = rel = 1e-9.
    pub fn ode_default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_step: 0.02,
            min_step: 1e-14,
        }
    }

    /// Same step limits as `self` with abs = rel = `tol`.
    pub fn with_tol(self, tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.abs_tol, self.rel_tol, self.max_step, self.min_step]
            .iter()
            .all(|v| *v > 0.0 && !v.is_nan());
        if !all_positive {
            return Err(Error::InvalidInput(format!(
                "tolerances must be strictly positive: {self:?}"
            )));
        }
        if self.min_step >= self.max_step {
            return Err(Error::InvalidInput(format!(
                "min_step {} must be below max_step {}",
                self.min_step, self.max_step
            )));
        }
        Ok(())
    }
}

/// Which system a trajectory solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationId {
    Primary,
    Frozen,
    PerturbedPainleve,
    Painleve,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndependentVar {
    Theta,
    Z,
    Eta,
    T,
}

impl IndependentVar {
    pub fn name(self) -> &'static str {
        match self {
            IndependentVar::Theta => "theta",
            IndependentVar::Z => "z",
            IndependentVar::Eta => "eta",
            IndependentVar::T => "t",
        }
    }
}

/// Monotone sampling of a numerical solution. Immutable once built.
#[derive(Clone, Debug)]
pub struct Trajectory {
    equation: EquationId,
    variable: IndependentVar,
    dim: usize,
    points: Vec<f64>,
    states: Vec<f64>,
    tolerances: Tolerances,
}

impl Trajectory {
    /// Builds a trajectory from explicit samples (used for synthetic data).
    /// `states` is row-major with `dim` entries per point.
    pub fn from_samples(
        equation: EquationId,
        variable: IndependentVar,
        dim: usize,
        points: Vec<f64>,
        states: Vec<f64>,
        tolerances: Tolerances,
    ) -> Result<Self> {
        if dim == 0 || states.len() != points.len() * dim {
            return Err(Error::InvalidInput(format!(
                "{} states for {} points of dimension {dim}",
                states.len(),
                points.len()
            )));
        }
        if points.len() < 2 {
            return Err(Error::InvalidInput("a trajectory needs at least 2 samples".into()));
        }
        let increasing = points.windows(2).all(|w| w[1] > w[0]);
        let decreasing = points.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidInput("sample points must be strictly monotone".into()));
        }
        if let Some(i) = states.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: points[i / dim] });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample point".into()));
        }
        Ok(Self {
            equation,
            variable,
            dim,
            points,
            states,
            tolerances,
        })
    }

    pub fn tagged(mut self, equation: EquationId, variable: IndependentVar) -> Self {
        self.equation = equation;
        self.variable = variable;
        self
    }

    pub fn equation(&self) -> EquationId {
        self.equation
    }

    pub fn variable(&self) -> IndependentVar {
        self.variable
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn first_point(&self) -> f64 {
        self.points[0]
    }

    pub fn last_point(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.points.iter().copied().zip(self.states.chunks_exact(self.dim))
    }

    /// Samples whose point lies in the closed interval spanned by `a` and `b`.
    pub fn window(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.iter().filter(move |(t, _)| *t >= lo && *t <= hi)
    }

    /// Smallest and largest sample point.
    pub fn range(&self) -> (f64, f64) {
        let (a, b) = (self.first_point(), self.last_point());
        (a.min(b), a.max(b))
    }

    /// Maps every sample through `f`, producing a new trajectory with the
    /// given tags. `f` returns the new point and state; monotonicity is
    /// re-checked.
    pub fn map<F>(&self, equation: EquationId, variable: IndependentVar, dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64, &[f64]) -> (f64, Vec<f64>),
    {
        let mut points = Vec::with_capacity(self.len());
        let mut states = Vec::with_capacity(self.len() * dim);
        for (t, y) in self.iter() {
            let (p, s) = f(t, y);
            debug_assert_eq!(s.len(), dim);
            points.push(p);
            states.extend_from_slice(&s);
        }
        Self::from_samples(equation, variable, dim, points, states, self.tolerances)
    }
}

// Dormand–Prince 5(4) tableau.
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;

struct Workspace {
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    err: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            ytmp: vec![0.0; n],
            ynew: vec![0.0; n],
            err: vec![0.0; n],
        }
    }
}

fn error_norm(y: &[f64], ynew: &[f64], err: &[f64], tol: &Tolerances) -> f64 {
    let n = y.len() as f64;
    let sum: f64 = y
        .iter()
        .zip(ynew)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = tol.abs_tol + tol.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

/// Attempts one step of size `h` (signed). On return `ws.ynew` holds the
/// fifth-order solution and `ws.k[6]` the derivative there (FSAL).
fn dp_step<F>(rhs: &mut F, t: f64, y: &[f64], h: f64, ws: &mut Workspace)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let [k1, k2, k3, k4, k5, k6, k7] = &mut ws.k;
    let ytmp = &mut ws.ytmp;
    for i in 0..n {
        ytmp[i] = y[i] + h * A21 * k1[i];
    }
    rhs(t + C2 * h, ytmp, k2);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    rhs(t + C3 * h, ytmp, k3);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    rhs(t + C4 * h, ytmp, k4);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    rhs(t + C5 * h, ytmp, k5);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    rhs(t + h, ytmp, k6);
    let ynew = &mut ws.ynew;
    for i in 0..n {
        ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    rhs(t + h, ynew, k7);
    for i in 0..n {
        ws.err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
}

fn initial_step<F>(rhs: &mut F, t0: f64, y0: &[f64], f0: &[f64], dir: f64, tol: &Tolerances) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let sc = |v: f64| tol.abs_tol + tol.rel_tol * v.abs();
    let d0 = (y0.iter().map(|v| (v / sc(*v)).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d1 = (y0.iter().zip(f0).map(|(v, f)| (f / sc(*v)).powi(2)).sum::<f64>() / n as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(tol.max_step);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(v, f)| v + dir * h0 * f).collect();
    let mut f1 = vec![0.0; n];
    rhs(t0 + dir * h0, &y1, &mut f1);
    let d2 = (y0
        .iter()
        .zip(f0.iter().zip(&f1))
        .map(|(v, (a, b))| ((b - a) / sc(*v)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt()
        / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(tol.max_step).max(tol.min_step)
}

/// Integrates `y' = rhs(t, y)` from `span.0` to `span.1` (either direction).
///
/// Every accepted step is stored. Fails with [`Error::StepUnderflow`] when the
/// controller asks for a step below `tol.min_step` and with
/// [`Error::NonFiniteState`] on blow-up.
pub fn integrate_adaptive<F>(mut rhs: F, y0: &[f64], span: (f64, f64), tol: &Tolerances) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    tol.validate()?;
    let (t0, t1) = span;
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidInput(format!("invalid span ({t0}, {t1})")));
    }
    if y0.is_empty() {
        return Err(Error::InvalidInput("empty initial state".into()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: t0 });
    }
    let n = y0.len();
    let dir = (t1 - t0).signum();
    let mut ws = Workspace::new(n);
    let mut t = t0;
    let mut y = y0.to_vec();
    rhs(t, &y, &mut ws.k[0]);
    if ws.k[0].iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t });
    }
    let k0 = ws.k[0].clone();
    let mut h = initial_step(&mut rhs, t0, &y, &k0, dir, tol);

    let mut points = vec![t0];
    let mut states = y.clone();
    let mut err_old = 1e-4_f64;
    let mut rejected_last = false;

    loop {
        let remaining = (t1 - t).abs();
        if remaining <= 1e-14 * t1.abs().max(1.0) {
            break;
        }
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h < tol.min_step && !last {
            return Err(Error::StepUnderflow { t, step: h });
        }
        dp_step(&mut rhs, t, &y, dir * h, &mut ws);
        let err = error_norm(&y, &ws.ynew, &ws.err, tol);
        if !err.is_finite() {
            // blow-up inside the stages; retry smaller and let the underflow
            // guard decide
            h *= FAC_MIN;
            rejected_last = true;
            if h < tol.min_step {
                return Err(Error::NonFiniteState { t });
            }
            continue;
        }
        let fac11 = err.powf(EXPO);
        if err <= 1.0 {
            let mut fac = fac11 / err_old.powf(BETA);
            fac = (1.0 / FAC_MAX).max((1.0 / FAC_MIN).min(fac / SAFETY));
            let mut hnew = h / fac;
            err_old = err.max(1e-4);
            t = if last { t1 } else { t + dir * h };
            std::mem::swap(&mut y, &mut ws.ynew);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t });
            }
            ws.k.swap(0, 6);
            points.push(t);
            states.extend_from_slice(&y);
            if rejected_last {
                hnew = hnew.min(h);
            }
            rejected_last = false;
            h = hnew.min(tol.max_step);
            if last {
                break;
            }
        } else {
            h /= (1.0 / FAC_MIN).min(fac11 / SAFETY);
            rejected_last = true;
            if h < tol.min_step {
                return Err(Error::StepUnderflow { t, step: h });
            }
        }
    }

    Trajectory::from_samples(EquationId::Custom, IndependentVar::T, n, points, states, *tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn harmonic(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn harmonic_oscillator_returns_after_one_period() {
        let tol = Tolerances::new(1e-10, 1e-10, 0.5, 1e-12).unwrap();
        let traj = integrate_adaptive(harmonic, &[1.0, 0.0], (0.0, 2.0 * PI), &tol).unwrap();
        let y = traj.last_state();
        assert!((y[0] - 1.0).abs() < 10.0 * tol.rel_tol, "{y:?}");
        assert!(y[1].abs() < 10.0 * tol.rel_tol, "{y:?}");
        assert_eq!(traj.last_point(), 2.0 * PI);
    }

    #[test]
    fn zero_field_keeps_state_constant() {
        let tol = Tolerances::new(1e-9, 1e-9, 1.0, 1e-12).unwrap();
        let traj = integrate_adaptive(
            |_t, _y: &[f64], dy: &mut [f64]| dy.fill(0.0),
            &[3.5, -1.25],
            (2.0, -7.0),
            &tol,
        )
        .unwrap();
        for (_, y) in traj.iter() {
            assert_eq!(y, &[3.5, -1.25]);
        }
        assert_eq!(traj.last_point(), -7.0);
    }

    #[test]
    fn backward_integration_is_monotone_decreasing() {
        let tol = Tolerances::new(1e-9, 1e-9, 0.3, 1e-12).unwrap();
        let traj = integrate_adaptive(harmonic, &[0.0, 1.0], (3.0, 0.0), &tol).unwrap();
        assert!(traj.points().windows(2).all(|w| w[1] < w[0]));
        assert!(traj.len() > 10);
    }

    #[test]
    fn max_step_is_respected() {
        let tol = Tolerances::new(1e-6, 1e-6, 0.01, 1e-12).unwrap();
        let traj = integrate_adaptive(harmonic, &[1.0, 0.0], (0.0, 1.0), &tol).unwrap();
        assert!(traj.points().windows(2).all(|w| w[1] - w[0] <= 0.01 + 1e-15));
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y^2 with y(0) = 1 blows up at t = 1
        let tol = Tolerances::new(1e-8, 1e-8, 0.1, 1e-10).unwrap();
        let res = integrate_adaptive(
            |_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0],
            &[1.0],
            (0.0, 2.0),
            &tol,
        );
        assert!(matches!(
            res,
            Err(Error::StepUnderflow { .. }) | Err(Error::NonFiniteState { .. })
        ));
    }

    #[test]
    fn invalid_tolerances_rejected() {
        assert!(Tolerances::new(0.0, 1e-9, 1.0, 1e-9).is_err());
        assert!(Tolerances::new(1e-9, 1e-9, 1e-3, 1e-2).is_err());
        let tol = Tolerances::ode_default();
        assert!(integrate_adaptive(harmonic, &[1.0, 0.0], (1.0, 1.0), &tol).is_err());
        assert!(matches!(
            integrate_adaptive(harmonic, &[f64::NAN, 0.0], (0.0, 1.0), &tol),
            Err(Error::NonFiniteState { .. })
        ));
    }

    #[test]
    fn fixed_step_convergence_matches_fifth_order() {
        // Loose tolerance so every step equals max_step; halving the step
        // must shrink the endpoint error by about 2^5.
        let endpoint_error = |h: f64| {
            let tol = Tolerances::new(1.0, 1.0, h, 1e-12).unwrap();
            let traj = integrate_adaptive(harmonic, &[1.0, 0.0], (0.0, 2.0 * PI), &tol).unwrap();
            let y = traj.last_state();
            ((y[0] - 1.0).powi(2) + y[1].powi(2)).sqrt()
        };
        let e1 = endpoint_error(2.0 * PI / 40.0);
        let e2 = endpoint_error(2.0 * PI / 80.0);
        let ratio = e1 / e2;
        assert!(ratio >= 16.0, "ratio {ratio}");
    }

    #[test]
    fn round_trip_returns_to_start() {
        let tol = Tolerances::new(1e-10, 1e-10, 0.5, 1e-12).unwrap();
        let fwd = integrate_adaptive(harmonic, &[0.3, -0.7], (0.0, 5.0), &tol).unwrap();
        let back = integrate_adaptive(harmonic, fwd.last_state(), (5.0, 0.0), &tol).unwrap();
        let y = back.last_state();
        assert!((y[0] - 0.3).abs() < 100.0 * tol.rel_tol);
        assert!((y[1] + 0.7).abs() < 100.0 * tol.rel_tol);
    }
}
