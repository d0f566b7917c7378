//! Constructing targets, dynamics and samplers from configuration sections.

use crate::dynamics::{DynamicsSpec, StepSchedule};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, SamplerSection, TargetSection};
use crate::jump::proposals::{
    GammaDirectional, HalfSpaceGaussian, IsotropicGaussian, SymmetrizedGamma,
};
use crate::sampler::{
    ChainSampler, HmcSampler, IJumpSampler, ImalaSampler, MalaSampler, MhSampler, SdeSampler,
};
use crate::targets::{block_rotation, load_statlog_csv, rotation2, TargetDensity};
use crate::{Matrix, Point};

pub const TARGET_NAMES: &[&str] = &[
    "std-normal",
    "log-normal",
    "bimodal",
    "moon",
    "gaussian-mixture",
    "multimodal-preset",
    "logistic-regression",
];

pub const SAMPLER_NAMES: &[&str] = &["mh", "ijump", "sde", "mala", "imala", "hmc"];

fn require<T: Copy>(value: Option<T>, what: &str, ctx: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("{ctx} requires '{what}'")))
}

pub fn build_target(section: &TargetSection) -> Result<TargetDensity> {
    match section.name.as_str() {
        "std-normal" => TargetDensity::std_normal(require(section.dim, "dim", "std-normal")?),
        "log-normal" => Ok(TargetDensity::log_normal()),
        "bimodal" => TargetDensity::bimodal(require(section.tau, "tau", "bimodal")?),
        "moon" => Ok(TargetDensity::moon()),
        "gaussian-mixture" => {
            let means = section
                .means
                .as_ref()
                .ok_or_else(|| Error::Config("gaussian-mixture requires 'means'".into()))?
                .iter()
                .map(|m| Point::from_column_slice(m))
                .collect();
            let weights = section
                .weights
                .clone()
                .ok_or_else(|| Error::Config("gaussian-mixture requires 'weights'".into()))?;
            let scales = section
                .scales
                .clone()
                .ok_or_else(|| Error::Config("gaussian-mixture requires 'scales'".into()))?;
            TargetDensity::gaussian_mixture(means, weights, scales)
        }
        "multimodal-preset" => Ok(TargetDensity::multimodal_preset()),
        "logistic-regression" => {
            let path = section
                .dataset
                .as_ref()
                .ok_or_else(|| Error::Config("logistic-regression requires 'dataset'".into()))?;
            let label_column = require(section.label_column, "label_column", "logistic-regression")?;
            let data = load_statlog_csv(path, label_column, section.standardize.unwrap_or(true))?;
            TargetDensity::logistic_regression(&data, section.prior_alpha.unwrap_or(100.0))
        }
        other => Err(Error::Config(format!(
            "unknown target '{other}' (valid: {})",
            TARGET_NAMES.join(", ")
        ))),
    }
}

/// Builds the skew matrix named in the config for a `dim`-dimensional target.
pub fn build_q(section: &SamplerSection, dim: usize) -> Result<Matrix> {
    let scale = section.q_scale.unwrap_or(1.0);
    match section.q.as_deref().unwrap_or("none") {
        "none" => Ok(Matrix::zeros(dim, dim)),
        "rotation" => {
            if dim != 2 {
                return Err(Error::Config(format!(
                    "q = \"rotation\" needs a 2-dimensional target, got dim {dim}"
                )));
            }
            Ok(rotation2(scale))
        }
        "block" => Ok(block_rotation(dim) * scale),
        other => Err(Error::Config(format!(
            "unknown q '{other}' (valid: none, rotation, block)"
        ))),
    }
}

pub fn build_dynamics(section: &SamplerSection, dim: usize) -> Result<DynamicsSpec> {
    DynamicsSpec::constant(Matrix::identity(dim, dim), build_q(section, dim)?)
}

pub fn build_sampler(
    config: &ExperimentConfig,
    target: &TargetDensity,
) -> Result<Box<dyn ChainSampler>> {
    let section = &config.sampler;
    let dim = target.dim();
    let init = section.init.as_ref().map(|v| {
        Point::from_column_slice(v)
    });
    if let Some(i) = &init {
        if i.len() != dim {
            return Err(Error::Config(format!(
                "init has {} coordinates but the target has dim {dim}",
                i.len()
            )));
        }
    }
    match section.name.as_str() {
        "mh" => {
            let proposal = section.proposal.as_deref().unwrap_or("gaussian");
            let boxed: Box<dyn crate::jump::proposals::Proposal> = match proposal {
                "gaussian" => Box::new(IsotropicGaussian::new(
                    require(section.sigma, "sigma", "mh/gaussian")?,
                    dim,
                )?),
                "symmetrized-gamma" => Box::new(SymmetrizedGamma::new(
                    section.shape.unwrap_or(GammaDirectional::DEFAULT_SHAPE),
                    require(section.rate, "rate", "mh/symmetrized-gamma")?,
                    dim,
                )?),
                other => {
                    return Err(Error::Config(format!(
                        "unknown mh proposal '{other}' (valid: gaussian, symmetrized-gamma)"
                    )))
                }
            };
            Ok(Box::new(MhSampler::new(target.clone(), boxed, init)?))
        }
        "ijump" => {
            let proposal = section.proposal.as_deref().unwrap_or("gamma-directional");
            let boxed: Box<dyn crate::jump::proposals::DirectionalProposal> = match proposal {
                "half-space-gaussian" => Box::new(HalfSpaceGaussian::new(
                    require(section.sigma, "sigma", "ijump/half-space-gaussian")?,
                    dim,
                )?),
                "gamma-directional" => Box::new(GammaDirectional::new(
                    section.shape.unwrap_or(GammaDirectional::DEFAULT_SHAPE),
                    require(section.rate, "rate", "ijump/gamma-directional")?,
                    dim,
                )?),
                "plain-gaussian" => Box::new(IsotropicGaussian::new(
                    require(section.sigma, "sigma", "ijump/plain-gaussian")?,
                    dim,
                )?),
                other => {
                    return Err(Error::Config(format!(
                        "unknown ijump proposal '{other}' (valid: half-space-gaussian, \
                         gamma-directional, plain-gaussian)"
                    )))
                }
            };
            Ok(Box::new(IJumpSampler::new(target.clone(), boxed, init)?))
        }
        "sde" => {
            let schedule = StepSchedule::new(require(section.epsilon, "epsilon", "sde")?)?;
            let dynamics = build_dynamics(section, dim)?;
            Ok(Box::new(SdeSampler::new(target.clone(), dynamics, schedule, init)?))
        }
        "mala" => {
            let epsilon = require(section.epsilon, "epsilon", "mala")?;
            let dynamics = build_dynamics(section, dim)?;
            Ok(Box::new(MalaSampler::new(target.clone(), dynamics, epsilon, init)?))
        }
        "imala" => {
            let epsilon = require(section.epsilon, "epsilon", "imala")?;
            let dynamics = build_dynamics(section, dim)?;
            Ok(Box::new(ImalaSampler::new(
                target.clone(),
                dynamics,
                epsilon,
                init,
                None,
            )?))
        }
        "hmc" => {
            let epsilon = require(section.epsilon, "epsilon", "hmc")?;
            let leapfrog = section.leapfrog_steps.unwrap_or(10);
            Ok(Box::new(HmcSampler::new(
                target.clone(),
                Matrix::identity(dim, dim),
                epsilon,
                leapfrog,
                init,
            )?))
        }
        other => Err(Error::Config(format!(
            "unknown sampler '{other}' (valid: {})",
            SAMPLER_NAMES.join(", ")
        ))),
    }
}
