//! Classical fixed-step 4th-order integration with cubic dense output.

use super::Float;
use crate::error::NumericError;

/// Dense solution of an autonomous-in-form ODE system `y' = f(t, y)`.
///
/// Stores the node values and node derivatives produced by the fixed-step
/// march; evaluation between nodes uses the cubic Hermite interpolant, which
/// keeps the dense output at the same order as the integrator.
#[derive(Debug, Clone)]
pub struct DenseSolution<T, const N: usize> {
    t0: T,
    step: T,
    values: Vec<[T; N]>,
    derivs: Vec<[T; N]>,
}

impl<T: Float, const N: usize> DenseSolution<T, N> {
    pub fn step(&self) -> T {
        self.step
    }

    pub fn t_end(&self) -> T {
        self.t0 + self.step * T::from(self.values.len() - 1).unwrap()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (T, &[T; N])> {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.t0 + self.step * T::from(i).unwrap(), v))
    }

    /// Evaluate the interpolant at `t` (clamped to the solved interval).
    pub fn eval(&self, t: T) -> [T; N] {
        let last = self.values.len() - 1;
        let raw = (t - self.t0) / self.step;
        let mut idx = raw.floor().to_usize().unwrap_or(0);
        if idx >= last {
            idx = last - 1;
        }
        let t_left = self.t0 + self.step * T::from(idx).unwrap();
        let theta = ((t - t_left) / self.step).max(T::zero()).min(T::one());
        let h = self.step;
        let y0 = &self.values[idx];
        let y1 = &self.values[idx + 1];
        let d0 = &self.derivs[idx];
        let d1 = &self.derivs[idx + 1];
        let one = T::one();
        let two = T::from(2.0).unwrap();
        let three = T::from(3.0).unwrap();
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = two * t3 - three * t2 + one;
        let h10 = t3 - two * t2 + theta;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        let mut out = [T::zero(); N];
        for i in 0..N {
            out[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
        }
        out
    }
}

/// March `y' = f(t, y)` from `t0` over `steps` equal steps of size `step`.
///
/// `guard` runs on every accepted node and may abort the march (used for
/// floor checks); it receives the node time and value.
pub fn integrate_fixed<T: Float, const N: usize>(
    mut f: impl FnMut(T, &[T; N]) -> [T; N],
    y0: [T; N],
    t0: T,
    step: T,
    steps: usize,
    mut guard: impl FnMut(T, &[T; N]) -> Result<(), NumericError>,
) -> Result<DenseSolution<T, N>, NumericError> {
    if !(step > T::zero()) || steps == 0 {
        return Err(NumericError::StepSize(step.to_f64().unwrap_or(f64::NAN)));
    }
    let two = T::from(2.0).unwrap();
    let six = T::from(6.0).unwrap();
    let mut values = Vec::with_capacity(steps + 1);
    let mut derivs = Vec::with_capacity(steps + 1);
    let mut y = y0;
    guard(t0, &y)?;
    values.push(y);
    derivs.push(f(t0, &y));
    for n in 0..steps {
        let t = t0 + step * T::from(n).unwrap();
        let k1 = derivs[n];
        let k2 = f(t + step / two, &axpy(&y, step / two, &k1));
        let k3 = f(t + step / two, &axpy(&y, step / two, &k2));
        let k4 = f(t + step, &axpy(&y, step, &k3));
        let mut ynext = y;
        for i in 0..N {
            ynext[i] = y[i] + step * (k1[i] + two * k2[i] + two * k3[i] + k4[i]) / six;
        }
        let tnext = t0 + step * T::from(n + 1).unwrap();
        guard(tnext, &ynext)?;
        y = ynext;
        values.push(y);
        derivs.push(f(tnext, &y));
    }
    Ok(DenseSolution { t0, step, values, derivs })
}

fn axpy<T: Float, const N: usize>(y: &[T; N], a: T, k: &[T; N]) -> [T; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + a * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fourth_order() {
        // y' = -y, y(0) = 1 over [0, 1].
        let solve = |steps: usize| {
            integrate_fixed(
                |_, y: &[f64; 1]| [-y[0]],
                [1.0],
                0.0,
                1.0 / steps as f64,
                steps,
                |_, _| Ok(()),
            )
            .unwrap()
        };
        let coarse = solve(64);
        let fine = solve(128);
        let exact = (-1.0f64).exp();
        let e_coarse = (coarse.eval(1.0)[0] - exact).abs();
        let e_fine = (fine.eval(1.0)[0] - exact).abs();
        assert!(e_coarse < 1e-8);
        // Halving the step should shrink the error by about 2^4.
        let ratio = e_coarse / e_fine;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn dense_output_matches_exact_between_nodes() {
        let sol = integrate_fixed(
            |_, y: &[f64; 1]| [-y[0]],
            [1.0],
            0.0,
            1.0 / 256.0,
            256,
            |_, _| Ok(()),
        )
        .unwrap();
        for k in 0..50 {
            let t = 0.01 + 0.019 * k as f64;
            let v = sol.eval(t)[0];
            assert!((v - (-t).exp()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn guard_aborts() {
        let r = integrate_fixed(
            |_, y: &[f64; 1]| [-y[0]],
            [1.0],
            0.0,
            0.1,
            100,
            |t, y| {
                if y[0] < 0.5 {
                    Err(NumericError::SpeedFloor { floor: 0.5, t_bar: t })
                } else {
                    Ok(())
                }
            },
        );
        assert!(matches!(r, Err(NumericError::SpeedFloor { .. })));
    }

    #[test]
    fn rejects_bad_step() {
        let r = integrate_fixed(|_, y: &[f64; 1]| *y, [1.0], 0.0, 0.0, 10, |_, _| Ok(()));
        assert!(matches!(r, Err(NumericError::StepSize(_))));
    }
}
