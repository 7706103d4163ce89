//! Built-in experiment presets mirroring the reference desk scenarios.
//!
//! All presets share the six-sensor coprime pair (2, 3) with 18 pulses,
//! CNR 40 dB, unit noise power, and ridge slope 1, except the rank and
//! variance studies which use their own array sizes.

use crate::config::{
    ArraySpec, ExperimentConfig, ExperimentKind, ExperimentSpec, PriorSpec, ScenarioSpec,
    TargetSpec,
};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig4_rank",
        description: "clutter-rank estimates vs the BT/EBT references for ULA and coprime arrays",
    },
    Preset {
        name: "fig6_variance",
        description: "virtual-snapshot error variance vs sample count, theory against Monte Carlo",
    },
    Preset {
        name: "fig7_robustness",
        description: "SINR under Gaussian-perturbed error-range values of velocity and crab angle",
    },
    Preset {
        name: "fig8_dictsize",
        description: "SINR vs Doppler for dictionary sizes 2-5 N_v M_e with known covariance",
    },
    Preset {
        name: "fig9_channels",
        description: "SINR vs Doppler for 1/3/5/7 Doppler channels with known covariance",
    },
    Preset {
        name: "fig10_theory",
        description: "known-covariance comparison: proposed vs virtual and element optima",
    },
    Preset {
        name: "fig11_convergence",
        description: "SINR vs number of training samples at fixed target Doppler",
    },
    Preset {
        name: "fig12_doppler",
        description: "SINR vs Doppler at 100 training samples with the PC baseline",
    },
];

pub fn list_presets() -> &'static [Preset] {
    PRESETS
}

fn default_scenario() -> ScenarioSpec {
    ScenarioSpec {
        array: ArraySpec::Coprime { n1: 2, n2: 3 },
        m_pulses: 18,
        lambda: 0.125,
        t_r: 1.0 / 4000.0,
        beta: Some(1.0),
        v_p: None,
        psi_deg: 0.0,
        phi_deg: 0.0,
        n_clutter: 361,
        cnr_db: 40.0,
        sigma_n2: 1.0,
        target: TargetSpec::default(),
    }
}

fn base_experiment(kind: ExperimentKind, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        kind,
        l_samples: 5,
        trials: 500,
        seed,
        m_bins: 3,
        known_covariance: false,
        doppler_grid: None,
        l_grid: None,
        cnr_grid_db: None,
        m_bins_list: None,
        dict_factors: None,
        ratio_grid: None,
        rank_detail: false,
        out: None,
    }
}

pub fn get_preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "fig4_rank" => {
            let mut scenario = default_scenario();
            scenario.array = ArraySpec::Coprime { n1: 3, n2: 5 };
            scenario.m_pulses = 10;
            let prior = PriorSpec {
                dv_pm: 0.0,
                dpsi_m_deg: 0.0,
                n_angles: Some(85),
                ..PriorSpec::default()
            };
            let mut experiment = base_experiment(ExperimentKind::RankValidation, 20_2401);
            experiment.trials = 1;
            ExperimentConfig {
                scenario,
                prior,
                experiment,
            }
        }
        "fig6_variance" => {
            let mut scenario = default_scenario();
            scenario.m_pulses = 8;
            let mut experiment = base_experiment(ExperimentKind::VarianceCurve, 20_2406);
            experiment.l_grid = Some(vec![10, 20, 50, 100, 200]);
            experiment.cnr_grid_db = Some(vec![10.0, 20.0, 30.0, 40.0, 50.0]);
            ExperimentConfig {
                scenario,
                prior: PriorSpec::default(),
                experiment,
            }
        }
        "fig7_robustness" => {
            let mut experiment = base_experiment(ExperimentKind::RobustnessSweep, 20_2407);
            experiment.ratio_grid = Some(vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
            ExperimentConfig {
                scenario: default_scenario(),
                prior: PriorSpec::default(),
                experiment,
            }
        }
        "fig8_dictsize" => {
            let mut experiment = base_experiment(ExperimentKind::DictionarySizeSweep, 20_2408);
            experiment.known_covariance = true;
            experiment.trials = 150;
            experiment.dict_factors = Some(vec![2, 3, 4, 5]);
            ExperimentConfig {
                scenario: default_scenario(),
                prior: PriorSpec::default(),
                experiment,
            }
        }
        "fig9_channels" => {
            let mut experiment = base_experiment(ExperimentKind::ChannelsSweep, 20_2409);
            experiment.known_covariance = true;
            experiment.trials = 150;
            experiment.m_bins_list = Some(vec![1, 3, 5, 7]);
            ExperimentConfig {
                scenario: default_scenario(),
                prior: PriorSpec::default(),
                experiment,
            }
        }
        "fig10_theory" => {
            let mut experiment = base_experiment(ExperimentKind::SinrVsDoppler, 20_2410);
            experiment.known_covariance = true;
            experiment.trials = 150;
            ExperimentConfig {
                scenario: default_scenario(),
                prior: PriorSpec::default(),
                experiment,
            }
        }
        "fig11_convergence" => {
            let mut experiment = base_experiment(ExperimentKind::SinrVsSamples, 20_2411);
            experiment.l_grid = Some(vec![2, 5, 10, 20, 50, 100, 200]);
            ExperimentConfig {
                scenario: default_scenario(),
                prior: PriorSpec::default(),
                experiment,
            }
        }
        "fig12_doppler" => {
            let mut experiment = base_experiment(ExperimentKind::SinrVsDoppler, 20_2412);
            experiment.l_samples = 100;
            experiment.trials = 200;
            ExperimentConfig {
                scenario: default_scenario(),
                prior: PriorSpec::default(),
                experiment,
            }
        }
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_contains_variance_preset() {
        assert!(list_presets().iter().any(|p| p.name == "fig6_variance"));
    }

    #[test]
    fn names_unique_and_resolvable() {
        let mut names: Vec<&str> = list_presets().iter().map(|p| p.name).collect();
        let before = names.len();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), before);
        for p in list_presets() {
            let cfg = get_preset(p.name).expect("preset resolvable");
            cfg.validate().expect("preset valid");
        }
        assert!(get_preset("fig99_unknown").is_none());
    }
}
