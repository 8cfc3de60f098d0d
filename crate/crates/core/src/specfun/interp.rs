use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpScheme {
    /// Natural cubic spline (C², zero curvature at both ends).
    CubicSpline,
    /// Shape-preserving piecewise cubic Hermite (Fritsch–Butland slopes).
    MonotoneCubic,
}

/// Piecewise cubic Hermite interpolant over strictly increasing knots.
///
/// Both schemes are stored as knot slopes; only the slope rule differs.
/// Evaluation outside `[knots[0], knots[n-1]]` is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant1D {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    scheme: InterpScheme,
}

impl Interpolant1D {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, scheme: InterpScheme) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.len() < 4 {
            return Err(Error::InvalidParameter(
                "cubic interpolation needs at least 4 knots".into(),
            ));
        }
        if !knots.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("knots must be strictly increasing".into()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite interpolation value".into()));
        }
        let slopes = match scheme {
            InterpScheme::CubicSpline => natural_spline_slopes(&knots, &values),
            InterpScheme::MonotoneCubic => monotone_slopes(&knots, &values),
        };
        Ok(Self {
            knots,
            values,
            slopes,
            scheme,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scheme(&self) -> InterpScheme {
        self.scheme
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    fn locate(&self, x: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        let i = self.knots.partition_point(|&k| k <= x);
        Ok(i.saturating_sub(1).min(self.knots.len() - 2))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let i = self.locate(x)?;
        if x == self.knots[i] {
            return Ok(self.values[i]);
        }
        let h = self.knots[i + 1] - self.knots[i];
        let t = (x - self.knots[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1])
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        let i = self.locate(x)?;
        let h = self.knots[i + 1] - self.knots[i];
        let t = (x - self.knots[i]) / h;
        let t2 = t * t;
        Ok((6.0 * t2 - 6.0 * t) / h * self.values[i]
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[i]
            + (-6.0 * t2 + 6.0 * t) / h * self.values[i + 1]
            + (3.0 * t2 - 2.0 * t) * self.slopes[i + 1])
    }

    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        let i = self.locate(x)?;
        let h = self.knots[i + 1] - self.knots[i];
        let t = (x - self.knots[i]) / h;
        Ok((12.0 * t - 6.0) / (h * h) * self.values[i]
            + (6.0 * t - 4.0) / h * self.slopes[i]
            + (-12.0 * t + 6.0) / (h * h) * self.values[i + 1]
            + (6.0 * t - 2.0) / h * self.slopes[i + 1])
    }
}

fn natural_spline_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

    // Tridiagonal system for the slopes; natural ends give 2d0 + d1 = 3δ0.
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = 2.0;
    sup[0] = 1.0;
    rhs[0] = 3.0 * delta[0];
    for i in 1..n - 1 {
        sub[i] = h[i];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        sup[i] = h[i - 1];
        rhs[i] = 3.0 * (h[i] * delta[i - 1] + h[i - 1] * delta[i]);
    }
    sub[n - 1] = 1.0;
    diag[n - 1] = 2.0;
    rhs[n - 1] = 3.0 * delta[n - 2];

    for i in 1..n {
        let m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    let mut d = vec![0.0; n];
    d[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        d[i] = (rhs[i] - sup[i] * d[i + 1]) / diag[i];
    }
    d
}

fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// Three-point end formula with the usual shape-preserving limiter.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
