use super::field::{PolarField, Quantity};
use super::grid::{PolarGrid, RadialSpacing};
use crate::error::Result;

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` must be strictly increasing with at least two points.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len());
        let n = x.len();
        let secants: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            let (a, b) = (secants[k - 1], secants[k]);
            if a * b > 0.0 {
                let (ha, hb) = (x[k] - x[k - 1], x[k + 1] - x[k]);
                let (wa, wb) = (2.0 * hb + ha, hb + 2.0 * ha);
                slopes[k] = (wa + wb) / (wa / a + wb / b);
            }
        }
        // End slopes must not overshoot the adjacent secant.
        for (k, s) in [(0usize, 0usize), (n - 1, n - 2)] {
            if slopes[k] * secants[s] < 0.0 {
                slopes[k] = 0.0;
            } else if slopes[k].abs() > 3.0 * secants[s].abs() {
                slopes[k] = 3.0 * secants[s];
            }
        }
        Self { x, y, slopes }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.slopes[k] + h01 * self.y[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

/// The cylinder variable `w(t, θ) = v(e^{-t}, θ) / e^{-βt}` on a log-polar grid.
///
/// On log grids the transform is pointwise. Uniform-`r` sources are first resampled onto the
/// log grid with the same radial extent and node count, interpolating each angular column
/// monotonically in `ln r`.
pub fn to_logpolar(field: &PolarField) -> Result<PolarField> {
    let beta = field.beta()?;
    let src = field.grid();
    let meta = field.meta.as_quantity(Quantity::W);
    match src.spacing() {
        RadialSpacing::Log => {
            let nt = src.n_theta();
            let values = field
                .values()
                .chunks(nt)
                .zip(src.r_values())
                .flat_map(|(row, &r)| {
                    let scale = r.powf(-beta);
                    row.iter().map(move |v| v * scale)
                })
                .collect();
            PolarField::with_valid_rows(src.clone(), values, meta, field.valid_rows())
        }
        RadialSpacing::Uniform => {
            let dst = PolarGrid::new(RadialSpacing::Log, src.r_min(), src.r_max(), src.n_r(), src.n_theta())?;
            let rows = field.valid_rows();
            let ln_r: Vec<f64> = src.r_values()[rows.clone()].iter().map(|r| r.ln()).collect();
            let (lo, hi) = (src.r_values()[rows.start], src.r_values()[rows.end - 1]);
            let nt = src.n_theta();
            let mut values = vec![0.0; dst.len()];
            for j in 0..nt {
                let column: Vec<f64> = rows.clone().map(|i| field.at(i, j)).collect();
                let interp = MonotoneCubic::new(ln_r.clone(), column);
                for (i, &r) in dst.r_values().iter().enumerate() {
                    let rr = r.clamp(lo, hi);
                    values[dst.index(i, j)] = interp.eval(rr.ln()) * r.powf(-beta);
                }
            }
            let n = dst.n_r();
            PolarField::with_valid_rows(dst, values, meta, 0..n)
        }
    }
}
