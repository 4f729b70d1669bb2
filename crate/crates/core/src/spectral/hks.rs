//! Heat kernel signature `hks(x, t) = sum_i exp(-lambda_i t) phi_i(x)^2`.

use nalgebra::DMatrix;

use super::{Descriptor, DescriptorKind, SpectralBasis};
use crate::error::{Error, Result};

pub const HKS_DEFAULT_DIM: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeRange {
    /// `[4 ln 10 / lambda_k, 4 ln 10 / lambda_2]`.
    Auto,
    Explicit { t_min: f64, t_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HksNormalization {
    None,
    /// Divide column `t` by `sum_i exp(-lambda_i t)`.
    #[default]
    PerTimestep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HksOptions {
    pub dim: usize,
    pub time_range: TimeRange,
    pub normalization: HksNormalization,
    /// Store `ln(hks)` instead of `hks`.
    pub log_scale: bool,
}

impl Default for HksOptions {
    fn default() -> Self {
        Self {
            dim: HKS_DEFAULT_DIM,
            time_range: TimeRange::Auto,
            normalization: HksNormalization::PerTimestep,
            log_scale: false,
        }
    }
}

impl HksOptions {
    pub fn describe(&self) -> String {
        let range = match self.time_range {
            TimeRange::Auto => "auto".to_string(),
            TimeRange::Explicit { t_min, t_max } => format!("{t_min:?}..{t_max:?}"),
        };
        format!(
            "d={};t={range};norm={};log={}",
            self.dim,
            match self.normalization {
                HksNormalization::None => "none",
                HksNormalization::PerTimestep => "per_timestep",
            },
            self.log_scale
        )
    }
}

/// Log-spaced diffusion times.
pub fn time_samples(basis: &SpectralBasis, opts: &HksOptions) -> Result<Vec<f64>> {
    if opts.dim == 0 {
        return Err(Error::InvalidArgument("hks dimension must be positive".into()));
    }
    let (t_min, t_max) = match opts.time_range {
        TimeRange::Explicit { t_min, t_max } => (t_min, t_max),
        TimeRange::Auto => {
            if basis.k() < 2 {
                return Err(Error::Spectrum("automatic hks times need k >= 2".into()));
            }
            let l2 = basis.lambda[1];
            if !(l2 > 0.0) {
                return Err(Error::Spectrum(format!(
                    "second eigenvalue {l2:e} is not positive (disconnected shape?)"
                )));
            }
            let c = 4.0 * std::f64::consts::LN_10;
            (c / basis.lambda[basis.k() - 1], c / l2)
        }
    };
    if !(t_min > 0.0 && t_max >= t_min && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid time range [{t_min}, {t_max}]")));
    }
    let d = opts.dim;
    if d == 1 {
        return Ok(vec![t_min]);
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    Ok((0..d).map(|j| (a + (b - a) * j as f64 / (d - 1) as f64).exp()).collect())
}

pub fn hks(basis: &SpectralBasis, opts: &HksOptions) -> Result<Descriptor> {
    let times = time_samples(basis, opts)?;
    let n = basis.n();
    let squared = basis.phi.map(|v| v * v);
    let mut values = DMatrix::zeros(n, times.len());
    for (j, &t) in times.iter().enumerate() {
        let weights: Vec<f64> = basis.lambda.iter().map(|&l| (-l * t).exp()).collect();
        let norm = match opts.normalization {
            HksNormalization::None => 1.0,
            HksNormalization::PerTimestep => weights.iter().sum(),
        };
        for x in 0..n {
            let mut acc = 0.0;
            for (i, w) in weights.iter().enumerate() {
                acc += w * squared[(x, i)];
            }
            values[(x, j)] = acc / norm;
        }
    }
    if opts.log_scale {
        values.apply(|v| *v = v.ln());
    }
    Ok(Descriptor::new(values, DescriptorKind::Hks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_eigenfunction() {
        let c = 0.5;
        let b = SpectralBasis { phi: DMatrix::from_element(4, 1, c), lambda: vec![0.0] };
        let opts = HksOptions {
            dim: 5,
            time_range: TimeRange::Explicit { t_min: 0.1, t_max: 10.0 },
            normalization: HksNormalization::None,
            log_scale: false,
        };
        let d = hks(&b, &opts).unwrap();
        assert!(d.values.iter().all(|&v| v == c * c));
    }

    #[test]
    fn two_pair_toy_matches_direct_sum() {
        let phi = DMatrix::from_column_slice(3, 2, &[0.5, 0.5, 0.5, 1.0, 0.0, -1.0]);
        let b = SpectralBasis { phi: phi.clone(), lambda: vec![0.0, 2.0] };
        let opts = HksOptions {
            dim: 1,
            time_range: TimeRange::Explicit { t_min: 1.0, t_max: 1.0 },
            normalization: HksNormalization::None,
            log_scale: false,
        };
        let d = hks(&b, &opts).unwrap();
        let e2 = (-2.0f64).exp();
        let expected = [0.25 + e2, 0.25, 0.25 + e2];
        for x in 0..3 {
            assert!((d.values[(x, 0)] - expected[x]).abs() < 1e-15);
        }
    }

    #[test]
    fn auto_range_needs_positive_second_eigenvalue() {
        let b = SpectralBasis { phi: DMatrix::from_element(3, 2, 1.0), lambda: vec![0.0, 0.0] };
        assert!(matches!(hks(&b, &HksOptions::default()), Err(Error::Spectrum(_))));
    }

    #[test]
    fn time_samples_are_log_spaced() {
        let b = SpectralBasis { phi: DMatrix::from_element(3, 3, 1.0), lambda: vec![0.0, 1.0, 10.0] };
        let t = time_samples(&b, &HksOptions { dim: 3, ..Default::default() }).unwrap();
        let c = 4.0 * std::f64::consts::LN_10;
        assert!((t[0] - c / 10.0).abs() < 1e-12 && (t[2] - c).abs() < 1e-12);
        assert!((t[1] / t[0] - t[2] / t[1]).abs() < 1e-12);
    }
}
