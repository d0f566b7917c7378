//! Shipped experiment presets; every hyperparameter is explicit in the
//! TOML so the configured values are inspectable at rest.

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;

/// `(name, toml)` pairs for every shipped preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("bimodal-tau05-ijump", include_str!("../../presets/bimodal-tau05-ijump.toml")),
    ("bimodal-tau05-mh", include_str!("../../presets/bimodal-tau05-mh.toml")),
    ("bimodal-tau1-ijump", include_str!("../../presets/bimodal-tau1-ijump.toml")),
    ("bimodal-tau1-mh", include_str!("../../presets/bimodal-tau1-mh.toml")),
    ("bimodal-tau15-ijump", include_str!("../../presets/bimodal-tau15-ijump.toml")),
    ("bimodal-tau15-mh", include_str!("../../presets/bimodal-tau15-mh.toml")),
    ("gauss-d10-ijump", include_str!("../../presets/gauss-d10-ijump.toml")),
    ("gauss-d10-mh", include_str!("../../presets/gauss-d10-mh.toml")),
    ("gauss-d20-ijump", include_str!("../../presets/gauss-d20-ijump.toml")),
    ("gauss-d20-mh", include_str!("../../presets/gauss-d20-mh.toml")),
    ("gauss-d40-ijump", include_str!("../../presets/gauss-d40-ijump.toml")),
    ("gauss-d40-mh", include_str!("../../presets/gauss-d40-mh.toml")),
    ("heart-hmc", include_str!("../../presets/heart-hmc.toml")),
    ("heart-imala", include_str!("../../presets/heart-imala.toml")),
    ("heart-mala", include_str!("../../presets/heart-mala.toml")),
    ("heart-mh", include_str!("../../presets/heart-mh.toml")),
    ("moon-hmc", include_str!("../../presets/moon-hmc.toml")),
    ("moon-ijump", include_str!("../../presets/moon-ijump.toml")),
    ("moon-imala", include_str!("../../presets/moon-imala.toml")),
    ("moon-mala", include_str!("../../presets/moon-mala.toml")),
    ("moon-mh", include_str!("../../presets/moon-mh.toml")),
    ("multimodal-ijump", include_str!("../../presets/multimodal-ijump.toml")),
    ("multimodal-mh", include_str!("../../presets/multimodal-mh.toml")),
    ("onedim-lognormal-ijump", include_str!("../../presets/onedim-lognormal-ijump.toml")),
    ("onedim-lognormal-mh", include_str!("../../presets/onedim-lognormal-mh.toml")),
    ("onedim-normal-gamma-mh", include_str!("../../presets/onedim-normal-gamma-mh.toml")),
    ("onedim-normal-hmc", include_str!("../../presets/onedim-normal-hmc.toml")),
    ("onedim-normal-ijump", include_str!("../../presets/onedim-normal-ijump.toml")),
    ("onedim-normal-mala", include_str!("../../presets/onedim-normal-mala.toml")),
    ("onedim-normal-mh", include_str!("../../presets/onedim-normal-mh.toml")),
    ("stdnormal2-hmc", include_str!("../../presets/stdnormal2-hmc.toml")),
    ("stdnormal2-ijump-gamma", include_str!("../../presets/stdnormal2-ijump-gamma.toml")),
    ("stdnormal2-ijump-halfspace", include_str!("../../presets/stdnormal2-ijump-halfspace.toml")),
    ("stdnormal2-imala", include_str!("../../presets/stdnormal2-imala.toml")),
    ("stdnormal2-mala", include_str!("../../presets/stdnormal2-mala.toml")),
    ("stdnormal2-mh", include_str!("../../presets/stdnormal2-mh.toml")),
    ("stdnormal2-sde", include_str!("../../presets/stdnormal2-sde.toml")),
    ("visual2d-ijump", include_str!("../../presets/visual2d-ijump.toml")),
];

/// Loads a preset by name (resolved, ready to run).
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    for (candidate, text) in PRESETS {
        if *candidate == name {
            return Ok(ExperimentConfig::from_toml(text)?.resolve());
        }
    }
    Err(Error::Config(format!(
        "unknown preset '{name}'; run list-presets for the available names"
    )))
}

/// Names plus one-line descriptions (the leading comment of each file).
pub fn preset_listing() -> Vec<(String, String)> {
    PRESETS
        .iter()
        .map(|(name, text)| {
            let desc = text
                .lines()
                .take_while(|l| l.starts_with('#'))
                .map(|l| l.trim_start_matches('#').trim())
                .collect::<Vec<_>>()
                .join(" ");
            (name.to_string(), desc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_round_trips() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap_or_else(|e| panic!("preset {name}: {e}"));
            let text = cfg.to_toml().unwrap();
            let back = ExperimentConfig::from_toml(&text).unwrap().resolve();
            assert_eq!(cfg, back, "round trip failed for {name}");
        }
    }

    #[test]
    fn spec_quoted_hyperparameters() {
        let b = preset("bimodal-tau1-ijump").unwrap();
        assert_eq!(b.sampler.shape, Some(1.1));
        assert_eq!(b.sampler.rate, Some(0.4));
        let n = preset("onedim-normal-ijump").unwrap();
        assert_eq!(n.sampler.rate, Some(1.2));
        let l = preset("onedim-lognormal-ijump").unwrap();
        assert_eq!(l.sampler.rate, Some(0.8));
        let m = preset("multimodal-ijump").unwrap();
        assert_eq!(m.sampler.rate, Some(1.5));
        let mo = preset("moon-ijump").unwrap();
        assert_eq!(mo.sampler.rate, Some(0.25));
        let v = preset("visual2d-ijump").unwrap();
        assert_eq!(v.sampler.rate, Some(0.15));
    }

    #[test]
    fn unknown_preset_is_a_config_error() {
        assert!(matches!(preset("nope"), Err(Error::Config(_))));
    }

    #[test]
    fn listing_has_descriptions() {
        let listing = preset_listing();
        assert_eq!(listing.len(), PRESETS.len());
        assert!(listing.iter().all(|(_, d)| !d.is_empty()));
    }
}
