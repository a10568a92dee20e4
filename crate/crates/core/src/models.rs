//! Joint laws of the test statistics.
//!
//! Every supported family is a location family: coordinate `i` is
//! `X_i = base_i + θ_i`, where `base` is the family's law at θ = 0. The
//! equicorrelated normal uses the one-factor representation
//! `base_i = √ρ·Z + √(1−ρ)·Z_i`; conditioning on the common factor `Z`
//! makes the coordinates i.i.d., which is how every multivariate
//! probability in the crate is evaluated.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normal;
use crate::quad;
use crate::roots;
use crate::scalar::Real;

/// Absolute tolerance of the factor quadrature.
pub const QUAD_TOL: f64 = 1e-10;

/// A parameter value on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Real> ExtReal<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// The hypothesis θ ≤ 0 holds.
    pub fn is_true_null(self) -> bool {
        match self {
            ExtReal::NegInf => true,
            ExtReal::Finite(v) => v <= T::zero(),
            ExtReal::PosInf => false,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, ExtReal::Finite(v) if v == T::zero())
    }

    /// The IEEE value with the same meaning (infinite sentinels map to
    /// infinities).
    pub fn to_float(self) -> T {
        match self {
            ExtReal::NegInf => T::neg_infinity(),
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => T::infinity(),
        }
    }

    pub fn from_float(v: T) -> Self {
        if v == T::infinity() {
            ExtReal::PosInf
        } else if v == T::neg_infinity() {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl<T: Real> From<T> for ExtReal<T> {
    fn from(v: T) -> Self {
        ExtReal::from_float(v)
    }
}

impl<T: fmt::Display> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

/// One parameter value per hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector<T>(pub Vec<ExtReal<T>>);

impl<T: Real> ThetaVector<T> {
    pub fn zeros(k: usize) -> Self {
        ThetaVector(vec![ExtReal::Finite(T::zero()); k])
    }

    pub fn constant(k: usize, v: T) -> Self {
        ThetaVector(vec![ExtReal::Finite(v); k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[ExtReal<T>] {
        &self.0
    }

    pub fn true_nulls(&self) -> Vec<bool> {
        self.0.iter().map(|t| t.is_true_null()).collect()
    }
}

impl<T: Real> From<Vec<ExtReal<T>>> for ThetaVector<T> {
    fn from(v: Vec<ExtReal<T>>) -> Self {
        ThetaVector(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    IidNormal,
    EquicorrNormal { rho: T },
    IidUniformNull,
}

impl<T: Real> Family<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Family::IidNormal => "iid-normal",
            Family::EquicorrNormal { .. } => "equicorr-normal",
            Family::IidUniformNull => "iid-uniform",
        }
    }

    pub fn rho(&self) -> T {
        match self {
            Family::EquicorrNormal { rho } => *rho,
            _ => T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec<T> {
    k: usize,
    family: Family<T>,
}

/// The law of one coordinate at θ = 0, given the common factor.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Conditional<T> {
    Normal { mean: T, sd: T },
    Uniform,
}

impl<T: Real> Conditional<T> {
    #[inline]
    pub(crate) fn cdf(&self, x: T) -> T {
        match *self {
            Conditional::Normal { mean, sd } => normal::cdf((x - mean) / sd),
            Conditional::Uniform => x.max(T::zero()).min(T::one()),
        }
    }

    #[inline]
    pub(crate) fn sf(&self, x: T) -> T {
        match *self {
            Conditional::Normal { mean, sd } => normal::sf((x - mean) / sd),
            Conditional::Uniform => (T::one() - x).max(T::zero()).min(T::one()),
        }
    }

    /// `P(X ≤ x)` for the coordinate shifted by `theta`.
    #[inline]
    pub(crate) fn cdf_at(&self, theta: ExtReal<T>, x: T) -> T {
        match theta {
            ExtReal::NegInf => T::one(),
            ExtReal::PosInf => T::zero(),
            ExtReal::Finite(t) => self.cdf(x - t),
        }
    }

    /// `P(X > x)` for the coordinate shifted by `theta`.
    #[inline]
    pub(crate) fn sf_at(&self, theta: ExtReal<T>, x: T) -> T {
        match theta {
            ExtReal::NegInf => T::zero(),
            ExtReal::PosInf => T::one(),
            ExtReal::Finite(t) => self.sf(x - t),
        }
    }
}

impl<T: Real> ModelSpec<T> {
    pub fn new(k: usize, family: Family<T>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidModel("k must be at least 1".into()));
        }
        if let Family::EquicorrNormal { rho } = family {
            if !(rho >= T::zero() && rho < T::one()) {
                return Err(Error::InvalidModel(format!("rho must lie in [0, 1), got {rho}")));
            }
        }
        Ok(ModelSpec { k, family })
    }

    pub fn iid_normal(k: usize) -> Result<Self> {
        Self::new(k, Family::IidNormal)
    }

    pub fn equicorr_normal(k: usize, rho: T) -> Result<Self> {
        Self::new(k, Family::EquicorrNormal { rho })
    }

    pub fn iid_uniform_null(k: usize) -> Result<Self> {
        Self::new(k, Family::IidUniformNull)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn family(&self) -> Family<T> {
        self.family
    }

    /// Same family with a different dimension.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(k, self.family)
    }

    pub fn supports_shift(&self) -> bool {
        !matches!(self.family, Family::IidUniformNull)
    }

    /// Coordinates are conditionally i.i.d. on a nondegenerate factor.
    fn factor_loading(&self) -> Option<(T, T)> {
        match self.family {
            Family::EquicorrNormal { rho } if rho > T::zero() => {
                Some((rho.sqrt(), (T::one() - rho).sqrt()))
            }
            _ => None,
        }
    }

    pub(crate) fn check_theta(&self, theta: ExtReal<T>) -> Result<()> {
        if !self.supports_shift() && !theta.is_zero() {
            return Err(Error::ShiftUnsupported(theta.to_string()));
        }
        Ok(())
    }

    pub(crate) fn check_thetas(&self, theta: &[ExtReal<T>]) -> Result<()> {
        theta.iter().try_for_each(|&t| self.check_theta(t))
    }

    /// `E[g(law of one coordinate | factor)]` over the common factor. For
    /// i.i.d. families `g` is evaluated once.
    pub(crate) fn over_factor(&self, mut g: impl FnMut(&Conditional<T>) -> T) -> T {
        match (self.family, self.factor_loading()) {
            (Family::IidUniformNull, _) => g(&Conditional::Uniform),
            (_, None) => g(&Conditional::Normal { mean: T::zero(), sd: T::one() }),
            (_, Some((load, sd))) => quad::normal_expectation(T::tol(QUAD_TOL), |z| {
                g(&Conditional::Normal { mean: load * z, sd })
            }),
        }
    }

    fn marginal(&self) -> Conditional<T> {
        match self.family {
            Family::IidUniformNull => Conditional::Uniform,
            _ => Conditional::Normal { mean: T::zero(), sd: T::one() },
        }
    }

    /// `P(X_i ≤ x)` when the coordinate's parameter is `theta_i`.
    pub fn marginal_cdf(&self, theta_i: ExtReal<T>, x: T) -> Result<T> {
        self.check_theta(theta_i)?;
        Ok(self.marginal().cdf_at(theta_i, x))
    }

    /// `P(X_i > x)` when the coordinate's parameter is `theta_i`.
    pub fn marginal_sf(&self, theta_i: ExtReal<T>, x: T) -> Result<T> {
        self.check_theta(theta_i)?;
        Ok(self.marginal().sf_at(theta_i, x))
    }

    pub fn marginal_quantile(&self, theta_i: ExtReal<T>, p: T) -> Result<T> {
        let shift = self.finite_theta(theta_i)?;
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::OutOfRange(format!("probability {p} not in (0, 1)")));
        }
        Ok(match self.family {
            Family::IidUniformNull => p,
            _ => shift + normal::quantile(p),
        })
    }

    /// The `x` with `P(X_i > x) = q`; precise for small `q`.
    pub fn marginal_upper_quantile(&self, theta_i: ExtReal<T>, q: T) -> Result<T> {
        let shift = self.finite_theta(theta_i)?;
        if !(q > T::zero() && q < T::one()) {
            return Err(Error::OutOfRange(format!("probability {q} not in (0, 1)")));
        }
        Ok(match self.family {
            Family::IidUniformNull => T::one() - q,
            _ => shift + normal::upper_quantile(q),
        })
    }

    fn finite_theta(&self, theta_i: ExtReal<T>) -> Result<T> {
        self.check_theta(theta_i)?;
        theta_i
            .finite()
            .ok_or_else(|| Error::OutOfRange("quantile requires a finite theta".into()))
    }

    /// `P(max(X_1, …, X_j) ≤ t)` with all `j` coordinates at θ = 0.
    pub fn max_cdf_null(&self, j: usize, t: T) -> Result<T> {
        self.check_j(j)?;
        let jj = j as i32;
        Ok(self.over_factor(|c| c.cdf(t).powi(jj)))
    }

    pub(crate) fn check_j(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.k {
            return Err(Error::OutOfRange(format!("j = {j} not in 1..={}", self.k)));
        }
        Ok(())
    }

    /// `P(X_i ≤ t_i for all i)` at the given parameters (any length ≤ k).
    pub fn prob_all_below(&self, theta: &[ExtReal<T>], t: &[T]) -> Result<T> {
        self.check_orthant(theta, t)?;
        Ok(self.over_factor(|c| {
            theta.iter().zip(t).fold(T::one(), |acc, (&th, &x)| acc * c.cdf_at(th, x))
        }))
    }

    /// `P(X_i > t_i for all i)` at the given parameters (any length ≤ k).
    pub fn prob_all_above(&self, theta: &[ExtReal<T>], t: &[T]) -> Result<T> {
        self.check_orthant(theta, t)?;
        Ok(self.over_factor(|c| {
            theta.iter().zip(t).fold(T::one(), |acc, (&th, &x)| acc * c.sf_at(th, x))
        }))
    }

    fn check_orthant(&self, theta: &[ExtReal<T>], t: &[T]) -> Result<()> {
        if theta.len() != t.len() {
            return Err(Error::LengthMismatch { expected: theta.len(), got: t.len() });
        }
        if theta.len() > self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: theta.len() });
        }
        self.check_thetas(theta)
    }

    /// Inverse of `max_cdf_null` in `t`.
    pub(crate) fn max_quantile_null(&self, j: usize, p: T) -> Result<T> {
        self.check_j(j)?;
        let guess = self.marginal_quantile(ExtReal::Finite(T::zero()), p)?;
        roots::solve_increasing(
            |t| self.over_factor(|c| c.cdf(t).powi(j as i32)) - p,
            guess,
            T::one(),
            T::tol(1e-12),
        )
    }

    /// Fills `out` with one replicate. Sentinel coordinates are written as
    /// infinities and consume no randomness.
    pub fn draw(&self, theta: &[ExtReal<T>], rng: &mut ChaCha8Rng, out: &mut [T]) {
        debug_assert_eq!(theta.len(), out.len());
        match self.family {
            Family::IidUniformNull => {
                for (o, th) in out.iter_mut().zip(theta) {
                    *o = match th {
                        ExtReal::Finite(_) => T::unit_uniform(rng),
                        s => s.to_float(),
                    };
                }
            }
            Family::IidNormal => {
                for (o, th) in out.iter_mut().zip(theta) {
                    *o = match th {
                        ExtReal::Finite(t) => *t + T::std_normal(rng),
                        s => s.to_float(),
                    };
                }
            }
            Family::EquicorrNormal { rho } => {
                let common = rho.sqrt() * T::std_normal(rng);
                let own = (T::one() - rho).sqrt();
                for (o, th) in out.iter_mut().zip(theta) {
                    *o = match th {
                        ExtReal::Finite(t) => *t + common + own * T::std_normal(rng),
                        s => s.to_float(),
                    };
                }
            }
        }
    }

    /// `reps × k` draws. Replicate `r` uses ChaCha stream `r` under `seed`, so
    /// the result does not depend on how replicates are scheduled.
    pub fn sample(&self, theta: &ThetaVector<T>, reps: usize, seed: u64) -> Result<SampleMatrix<T>> {
        if reps == 0 {
            return Err(Error::OutOfRange("reps must be at least 1".into()));
        }
        if theta.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: theta.len() });
        }
        self.check_thetas(theta.components())?;
        let k = self.k;
        let base = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![T::zero(); reps * k];
        values.par_chunks_mut(k).enumerate().for_each(|(r, row)| {
            let mut rng = replicate_rng(&base, r as u64);
            self.draw(theta.components(), &mut rng, row);
        });
        Ok(SampleMatrix { reps, k, values })
    }
}

/// The generator for replicate `r`.
pub fn replicate_rng(base: &ChaCha8Rng, r: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(r);
    rng.set_word_pos(0);
    rng
}

/// Row-major `reps × k` sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix<T> {
    reps: usize,
    k: usize,
    values: Vec<T>,
}

impl<T: Real> SampleMatrix<T> {
    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.values[r * self.k..(r + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.k)
    }

    pub fn column(&self, i: usize) -> impl Iterator<Item = T> + '_ {
        self.values.iter().skip(i).step_by(self.k).copied()
    }
}
