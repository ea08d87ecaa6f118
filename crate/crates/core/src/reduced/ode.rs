//! Adaptive Dormand-Prince 5(4) integrator for a scalar ODE whose right-hand
//! side may be undefined (returns `None`) outside its domain.

#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepFailure {
    /// The right-hand side stayed undefined as the step shrank to `h_min`.
    Domain { t: f64 },
    Underflow { t: f64 },
    TooManySteps { t: f64 },
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
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Dopri5 {
    /// Integrates `x' = f(t, x)` from `t0` to `t1 > t0`. `h` is the initial
    /// step guess and on return holds the last accepted step size.
    pub fn integrate<F>(&self, f: &F, t0: f64, x0: f64, t1: f64, h: &mut f64) -> Result<f64, StepFailure>
    where
        F: Fn(f64, f64) -> Option<f64>,
    {
        let mut t = t0;
        let mut x = x0;
        let mut k1 = f(t, x).ok_or(StepFailure::Domain { t })?;
        let mut step = h.min(t1 - t0).max(self.h_min);
        let mut steps = 0usize;
        while t < t1 {
            if steps >= self.max_steps {
                return Err(StepFailure::TooManySteps { t });
            }
            steps += 1;
            let last = t + step >= t1;
            let hh = if last { t1 - t } else { step };
            match self.try_step(f, t, x, k1, hh) {
                Some((x_new, k7, err)) => {
                    let sc = self.atol + self.rtol * x.abs().max(x_new.abs());
                    let ratio = err / sc;
                    if ratio <= 1.0 {
                        t = if last { t1 } else { t + hh };
                        x = x_new;
                        k1 = k7;
                        if !last {
                            *h = hh;
                        }
                        let fac = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                        step = hh * fac;
                    } else {
                        step = hh * (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
                        if step < self.h_min {
                            return Err(StepFailure::Underflow { t });
                        }
                    }
                }
                None => {
                    step = hh * 0.25;
                    if step < self.h_min {
                        return Err(StepFailure::Domain { t });
                    }
                }
            }
        }
        Ok(x)
    }

    fn try_step<F>(&self, f: &F, t: f64, x: f64, k1: f64, h: f64) -> Option<(f64, f64, f64)>
    where
        F: Fn(f64, f64) -> Option<f64>,
    {
        let k2 = f(t + C2 * h, x + h * A21 * k1)?;
        let k3 = f(t + C3 * h, x + h * (A31 * k1 + A32 * k2))?;
        let k4 = f(t + C4 * h, x + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
        let k5 = f(t + C5 * h, x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
        let k6 = f(t + h, x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
        let x_new = x + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(t + h, x_new)?;
        let err = (h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).abs();
        Some((x_new, k7, err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let ode = Dopri5::default();
        let mut h = 1e-3;
        let x = ode.integrate(&|_, x| Some(-2.0 * x), 0.0, 1.0, 1.0, &mut h).unwrap();
        assert!((x - (-2.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn forced_oscillation() {
        // x' = cos(t), x(0) = 0  =>  x = sin(t)
        let ode = Dopri5::default();
        let mut h = 1e-2;
        let mut x = 0.0;
        let mut t = 0.0;
        for _ in 0..10 {
            x = ode.integrate(&|t, _| Some(t.cos()), t, x, t + 0.5, &mut h).unwrap();
            t += 0.5;
        }
        assert!((x - 5f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn domain_exit_is_reported() {
        // x' = 1 with x restricted to x < 0.5
        let ode = Dopri5::default();
        let mut h = 1e-2;
        let r = ode.integrate(&|_, x: f64| if x < 0.5 { Some(1.0) } else { None }, 0.0, 0.0, 1.0, &mut h);
        match r {
            Err(StepFailure::Domain { t }) => assert!((t - 0.5).abs() < 1e-6),
            other => panic!("expected domain failure, got {other:?}"),
        }
    }
}
