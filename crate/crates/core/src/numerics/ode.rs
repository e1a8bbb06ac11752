use super::Tolerance;
use crate::error::{Error, Result};
use crate::scalar::Real;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the scalar ODE `dy/dx = f(x, y)` from `(x0, y0)` to `x1` with an
/// embedded Dormand–Prince 5(4) pair, returning `y(x1)`.
///
/// The local error per step is kept below `tol.threshold(y)`; `tol.max_iter()`
/// caps the number of attempted steps. `x1 < x0` integrates backwards.
pub fn solve_ode<T, F>(mut f: F, y0: T, x0: T, x1: T, tol: &Tolerance<T>) -> Result<T>
where
    T: Real,
    F: FnMut(T, T) -> T,
{
    if !y0.is_finite() || !x0.is_finite() || !x1.is_finite() {
        return Err(Error::Integration {
            op: "solve_ode",
            msg: "non-finite initial data",
            at: x0.as_f64(),
        });
    }
    if x0 == x1 {
        return Ok(y0);
    }
    let direction = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let min_step = span * T::epsilon() * T::lit(16.0);

    let (mut x, mut y) = (x0, y0);
    let mut h = span * T::lit(1e-3);
    let mut k = [T::zero(); 7];
    k[0] = f(x, y);
    let safety = T::lit(0.9);

    for _ in 0..tol.max_iter() {
        let remaining = (x1 - x).abs();
        if remaining <= min_step {
            return Ok(y);
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h } * direction;

        for s in 1..7 {
            let mut acc = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc = acc + step * T::lit(A[s][j]) * *kj;
            }
            k[s] = f(x + step * T::lit(C[s]), acc);
        }
        let mut y5 = y;
        let mut y4 = y;
        for s in 0..7 {
            y5 = y5 + step * T::lit(B5[s]) * k[s];
            y4 = y4 + step * T::lit(B4[s]) * k[s];
        }
        if !y5.is_finite() {
            h = h * T::lit(0.25);
            if h < min_step {
                return Err(Error::Integration {
                    op: "solve_ode",
                    msg: "state became non-finite",
                    at: x.as_f64(),
                });
            }
            k[0] = f(x, y);
            continue;
        }

        let err = (y5 - y4).abs();
        let allowed = tol.threshold(y.abs().max(y5.abs()));
        let ratio = if err > T::zero() { allowed / err } else { T::lit(1e6) };
        if err <= allowed {
            x = if last { x1 } else { x + step };
            y = y5;
            // FSAL: last stage is f at the new point.
            k[0] = k[6];
            if last {
                return Ok(y);
            }
            h = h * (safety * ratio.powf(T::lit(0.2))).min(T::lit(5.0));
        } else {
            h = h * (safety * ratio.powf(T::lit(0.25))).max(T::lit(0.1));
            if h < min_step {
                return Err(Error::Integration {
                    op: "solve_ode",
                    msg: "step size underflow",
                    at: x.as_f64(),
                });
            }
        }
    }
    Err(Error::Convergence {
        op: "solve_ode",
        iterations: tol.max_iter(),
    })
}

/// Classical fourth-order Runge–Kutta with `steps` equal steps.
pub fn rk4_fixed<T, F>(mut f: F, y0: T, x0: T, x1: T, steps: usize) -> T
where
    T: Real,
    F: FnMut(T, T) -> T,
{
    let h = (x1 - x0) / T::from_usize(steps.max(1)).expect("step count fits");
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    let mut y = y0;
    for i in 0..steps.max(1) {
        let x = x0 + h * T::from_usize(i).expect("index fits");
        let k1 = f(x, y);
        let k2 = f(x + half * h, y + half * h * k1);
        let k3 = f(x + half * h, y + half * h * k2);
        let k4 = f(x + h, y + h * k3);
        y = y + h * sixth * (k1 + two * k2 + two * k3 + k4);
    }
    y
}

/// Stage buffers for [`rk4_step`].
#[derive(Debug, Default, Clone)]
pub struct Rk4Workspace<T> {
    k: [Vec<T>; 4],
    tmp: Vec<T>,
}

impl<T: Real> Rk4Workspace<T> {
    pub fn new() -> Self {
        Self {
            k: [Vec::new(), Vec::new(), Vec::new(), Vec::new()],
            tmp: Vec::new(),
        }
    }

    fn resize(&mut self, n: usize) {
        for k in &mut self.k {
            k.resize(n, T::zero());
        }
        self.tmp.resize(n, T::zero());
    }
}

/// One classical RK4 step of size `h` for a vector state, in place.
///
/// `rhs(x, y, dydx)` must fill `dydx`. Each stage increment is a linear
/// combination of right-hand sides, so any linear invariant the right-hand side
/// preserves (e.g. `sum(dydx) == 0`) is preserved by the step up to rounding.
pub fn rk4_step<T, F>(mut rhs: F, x: T, y: &mut [T], h: T, ws: &mut Rk4Workspace<T>)
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
{
    let n = y.len();
    ws.resize(n);
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let sixth = T::one() / T::lit(6.0);

    rhs(x, y, &mut ws.k[0]);
    for i in 0..n {
        ws.tmp[i] = y[i] + half * h * ws.k[0][i];
    }
    rhs(x + half * h, &ws.tmp, &mut ws.k[1]);
    for i in 0..n {
        ws.tmp[i] = y[i] + half * h * ws.k[1][i];
    }
    rhs(x + half * h, &ws.tmp, &mut ws.k[2]);
    for i in 0..n {
        ws.tmp[i] = y[i] + h * ws.k[2][i];
    }
    rhs(x + h, &ws.tmp, &mut ws.k[3]);
    for i in 0..n {
        y[i] = y[i] + h * sixth * (ws.k[0][i] + two * (ws.k[1][i] + ws.k[2][i]) + ws.k[3][i]);
    }
}
