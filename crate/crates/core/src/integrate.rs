//! Fixed-step explicit integrators.
//!
//! Steps return the state *increment* rather than the new state so the caller
//! can accumulate it with compensated summation.

/// Integration scheme for [`crate::simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Classic fourth-order Runge–Kutta.
    #[default]
    Rk4,
    /// Explicit (forward) Euler; first order.
    Euler,
}

impl Integrator {
    /// Increment of `y` over one step of size `h` starting at time `t`.
    pub fn increment<const N: usize, F>(self, f: &mut F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        match self {
            Integrator::Rk4 => rk4_increment(f, t, y, h),
            Integrator::Euler => euler_increment(f, t, y, h),
        }
    }
}

pub fn euler_increment<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    k1.map(|k| h * k)
}

pub fn rk4_increment<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let half = 0.5 * h;
    let k1 = f(t, y);
    let k2 = f(t + half, &offset(y, &k1, half));
    let k3 = f(t + half, &offset(y, &k2, half));
    let k4 = f(t + h, &offset(y, &k3, h));
    let mut dy = [0.0; N];
    for i in 0..N {
        dy[i] = (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    dy
}

fn offset<const N: usize>(y: &[f64; N], k: &[f64; N], scale: f64) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += scale * k[i];
    }
    out
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
