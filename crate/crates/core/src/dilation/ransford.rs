use crate::dense::{smallest_singular_value, DenseMatrix};
use crate::{Error, Result, C64};

/// `n x n/2` window of `z - T(lambda)`, where
/// `T(lambda)(a_1, a_2, ..) = (a_1, lambda a_1, a_2, lambda a_2, ..)`.
/// The first `n/2` columns reach only rows up to `n`, so the window is exact.
pub fn ransford_window(lambda: C64, z: C64, n: usize) -> Result<DenseMatrix> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "window size must be even and positive, got {n}"
        )));
    }
    let mut m = DenseMatrix::zeros(n, n / 2);
    for j in 0..n / 2 {
        m[(j, j)] += z;
        m[(2 * j, j)] -= C64::new(1.0, 0.0);
        m[(2 * j + 1, j)] -= lambda;
    }
    Ok(m)
}

pub fn ransford_sigma_min(lambda: C64, z: C64, n: usize) -> Result<f64> {
    Ok(smallest_singular_value(&ransford_window(lambda, z, n)?, 1e-12)?.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansfordPoint {
    pub z: C64,
    pub sigma_min: f64,
    /// `| |z| - sqrt(1 + |lambda|^2) |`.
    pub distance_to_circle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansfordReport {
    pub lambda: C64,
    pub n: usize,
    pub circle_radius: f64,
    pub points: Vec<RansfordPoint>,
}

impl RansfordReport {
    /// Smallest `sigma_min` among points within `band` of the circle.
    pub fn min_near_circle(&self, band: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.distance_to_circle <= band)
            .map(|p| p.sigma_min)
            .min_by(f64::total_cmp)
    }

    /// Smallest `sigma_min` among points with `|z| <= radius`.
    pub fn min_inside(&self, radius: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.z.norm() <= radius)
            .map(|p| p.sigma_min)
            .min_by(f64::total_cmp)
    }
}

pub fn ransford_probe(lambda: C64, z_grid: &[C64], n: usize) -> Result<RansfordReport> {
    let circle_radius = (1.0 + lambda.norm_sqr()).sqrt();
    let points = z_grid
        .iter()
        .map(|&z| {
            Ok(RansfordPoint {
                z,
                sigma_min: ransford_sigma_min(lambda, z, n)?,
                distance_to_circle: (z.norm() - circle_radius).abs(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(RansfordReport {
        lambda,
        n,
        circle_radius,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubharmonicityReport {
    pub phi_at_zero: f64,
    pub circle_mean: f64,
    pub points: usize,
    /// `phi(0)` exceeds its mean over the unit circle.
    pub not_subharmonic: bool,
}

/// `phi(lambda) = -log (1 + |lambda|^2)^{1/2}` at 0 against its 16-point
/// trapezoid mean over `|lambda| = 1`.
pub fn subharmonicity_check() -> SubharmonicityReport {
    let phi = |l: C64| -0.5 * (1.0 + l.norm_sqr()).ln();
    let points = 16;
    let circle_mean = (0..points)
        .map(|j| {
            phi(C64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * j as f64 / points as f64,
            ))
        })
        .sum::<f64>()
        / points as f64;
    let phi_at_zero = phi(C64::new(0.0, 0.0));
    SubharmonicityReport {
        phi_at_zero,
        circle_mean,
        points,
        not_subharmonic: phi_at_zero > circle_mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn window_columns_at_origin_are_orthonormal() {
        assert!((ransford_sigma_min(c(0.0), c(0.0), 64).unwrap() - 1.0).abs() < 1e-10);
        let w = ransford_window(c(0.0), c(0.0), 16).unwrap();
        let g = w.gram();
        assert!(g.sub(&DenseMatrix::identity(8)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn inside_values_stay_away_from_zero() {
        let s = ransford_sigma_min(c(0.0), c(0.5), 512).unwrap();
        assert!(s >= 0.3, "{s}");
    }

    #[test]
    fn odd_window_is_rejected() {
        assert!(ransford_window(c(1.0), c(1.0), 7).is_err());
    }

    #[test]
    fn subharmonic_mean() {
        let r = subharmonicity_check();
        assert_eq!(r.phi_at_zero, 0.0);
        assert!((r.circle_mean + 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(r.not_subharmonic);
    }
}
