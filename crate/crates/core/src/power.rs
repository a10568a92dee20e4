//! Maximin power criteria and least-favorable configurations.
//!
//! For a monotone rule, the smallest probability of rejecting at least `j`
//! hypotheses over `{at least j of the θ_i exceed ε}` is attained in the limit
//! `θ = (ε, …, ε, −∞, …, −∞)` with `j` copies of ε. Both general-k criteria
//! are therefore evaluated at that single point with the order-statistic
//! engine.

use crate::constants::{solve_stepdown, solve_stepup, ConstantLadder, LadderKind, PairConstants};
use crate::error::{Error, Result};
use crate::models::{ExtReal, ModelSpec, ThetaVector};
use crate::orderstat::{joint_orderstat_survival, ThresholdLadder};
use crate::procedures::PairVariant;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionKind {
    StepdownBeta,
    StepupBeta,
    PairA1,
    PairA2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult<T> {
    pub value: T,
    pub kind: CriterionKind,
    pub k: usize,
    pub j: usize,
    pub alpha: T,
    pub epsilon: Vec<T>,
    pub model: ModelSpec<T>,
}

fn check_kj(k: usize, j: usize) -> Result<()> {
    if j == 0 || j > k {
        return Err(Error::OutOfRange(format!("j = {j} not in 1..={k}")));
    }
    Ok(())
}

fn check_eps<T: Real>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("epsilon = {epsilon} must be positive")))
    }
}

/// `w_{k,j}(ε)`: `j` coordinates at ε, the rest at −∞.
pub fn lfc_theta<T: Real>(k: usize, j: usize, epsilon: T) -> Result<ThetaVector<T>> {
    check_kj(k, j)?;
    check_eps(epsilon)?;
    let mut v = vec![ExtReal::Finite(epsilon); j];
    v.resize(k, ExtReal::NegInf);
    Ok(ThetaVector(v))
}

/// `v_{k,j}`: `j − 1` coordinates at +∞, the rest at 0.
pub fn null_lfc_theta<T: Real>(k: usize, j: usize) -> Result<ThetaVector<T>> {
    check_kj(k, j)?;
    let mut v = vec![ExtReal::PosInf; j - 1];
    v.resize(k, ExtReal::Finite(T::zero()));
    Ok(ThetaVector(v))
}

/// `β_{k,j}(α, ε)` from an already solved stepdown ladder with `k` rungs:
/// the probability, with `j` coordinates at ε, that the `i`-th smallest of
/// them exceeds `f_{k−j+i}` for every `i`.
pub fn beta_stepdown_with<T: Real>(ladder: &ConstantLadder<T>, j: usize, epsilon: T) -> Result<T> {
    if ladder.kind() != LadderKind::Stepdown {
        return Err(Error::WrongLadderKind("stepdown"));
    }
    let k = ladder.k();
    check_kj(k, j)?;
    check_eps(epsilon)?;
    let model = ladder.model();
    model.check_theta(ExtReal::Finite(epsilon))?;
    let staircase = ThresholdLadder::new(ladder.values()[k - j..].to_vec())?;
    joint_orderstat_survival(model, j, &staircase, ExtReal::Finite(epsilon))
}

/// `β̃_{k,j}(α, ε)` from a solved stepup ladder with `k` rungs:
/// `P(min of j coordinates at ε > d_{k−j+1})`.
pub fn beta_stepup_with<T: Real>(ladder: &ConstantLadder<T>, j: usize, epsilon: T) -> Result<T> {
    if ladder.kind() != LadderKind::Stepup {
        return Err(Error::WrongLadderKind("stepup"));
    }
    let k = ladder.k();
    check_kj(k, j)?;
    check_eps(epsilon)?;
    let model = ladder.model();
    let eps = ExtReal::Finite(epsilon);
    model.check_theta(eps)?;
    let d = ladder.value(k - j + 1);
    Ok(model.over_factor(|c| c.sf_at(eps, d).powi(j as i32)))
}

pub fn beta_stepdown<T: Real>(
    model: &ModelSpec<T>,
    alpha: T,
    k: usize,
    j: usize,
    epsilon: T,
) -> Result<CriterionResult<T>> {
    check_kj(k, j)?;
    check_eps(epsilon)?;
    let model = model.with_k(k)?;
    model.check_theta(ExtReal::Finite(epsilon))?;
    let ladder = solve_stepdown(&model, alpha)?;
    Ok(CriterionResult {
        value: beta_stepdown_with(&ladder, j, epsilon)?,
        kind: CriterionKind::StepdownBeta,
        k,
        j,
        alpha,
        epsilon: vec![epsilon],
        model,
    })
}

pub fn beta_stepup<T: Real>(
    model: &ModelSpec<T>,
    alpha: T,
    k: usize,
    j: usize,
    epsilon: T,
) -> Result<CriterionResult<T>> {
    check_kj(k, j)?;
    check_eps(epsilon)?;
    let model = model.with_k(k)?;
    model.check_theta(ExtReal::Finite(epsilon))?;
    let ladder = solve_stepup(&model, alpha)?;
    Ok(CriterionResult {
        value: beta_stepup_with(&ladder, j, epsilon)?,
        kind: CriterionKind::StepupBeta,
        k,
        j,
        alpha,
        epsilon: vec![epsilon],
        model,
    })
}

/// The two maximin criteria of a two-hypothesis rule: the least probability
/// of rejecting anything when at least one θ_i exceeds ε_i, and the least
/// probability of rejecting both when both do.
pub fn pair_criteria<T: Real>(
    c: &PairConstants<T>,
    variant: PairVariant,
) -> Result<(CriterionResult<T>, CriterionResult<T>)> {
    let m = &c.model;
    let eps = [ExtReal::Finite(c.epsilon[0]), ExtReal::Finite(c.epsilon[1])];
    let (a1, a2) = match variant {
        PairVariant::StepdownOpt => {
            let a1 = m.marginal_sf(eps[0], c.a[0])?;
            let both = m.prob_all_above(&eps, &[c.a[0], c.b[1]])?
                + m.prob_all_above(&eps, &[c.b[0], c.a[1]])?
                - m.prob_all_above(&eps, &c.a)?;
            (a1, both)
        }
        PairVariant::StepupOpt => {
            let a1 = m.marginal_sf(eps[0], c.a_tilde[0])?;
            (a1, m.prob_all_above(&eps, &c.b)?)
        }
    };
    let make = |value, kind, j| CriterionResult {
        value,
        kind,
        k: 2,
        j,
        alpha: c.alpha,
        epsilon: c.epsilon.to_vec(),
        model: *m,
    };
    Ok((make(a1, CriterionKind::PairA1, 1), make(a2, CriterionKind::PairA2, 2)))
}
