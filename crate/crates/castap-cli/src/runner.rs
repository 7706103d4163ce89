//! Experiment orchestration: builds the per-scenario and per-sweep-point
//! contexts, runs seeded Monte Carlo trials in parallel, and aggregates
//! result rows.
//!
//! Per-trial seeds derive from the master seed, the sweep-point index,
//! and the trial index, so results are independent of the thread count.

use crate::config::{CliError, CliResult, ExperimentConfig, ExperimentKind};
use crate::report::{variance_csv, ResultRow};
use castap::dictionary::{build_dictionary, PriorKnowledge};
use castap::geometry::{ArrayGeometry, VirtualMaps};
use castap::rank::{bt_rank, ebt_rank, estimate_rank};
use castap::rd::{RdConfig, RdMaps};
use castap::signal::{
    space_time_steering, true_covariance, virtual_covariance, RadarScenario, SnapshotGenerator,
};
use castap::solver::{
    filter_weight, numerical_clutter_rank, omp_subspace_dictionary, output_sinr, pc_weight,
    solve_pd,
};
use castap::stats::{derive_seed, variance_experiment};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::sync::Arc;

/// Everything fixed for one scenario across all sweep points.
struct ScenarioPack {
    scen: RadarScenario,
    maps: Arc<VirtualMaps>,
    r_true: DMatrix<Complex64>,
    r_virtual: DMatrix<Complex64>,
    generator: SnapshotGenerator,
    hash: String,
}

impl ScenarioPack {
    fn build(cfg: &ExperimentConfig) -> CliResult<Self> {
        let scen = cfg.scenario()?;
        let maps = Arc::new(VirtualMaps::build(scen.geom.clone(), scen.m_pulses)?);
        let r_true = true_covariance(&scen);
        let r_virtual = virtual_covariance(&scen, &maps);
        let generator = SnapshotGenerator::new(&scen);
        Ok(Self {
            scen,
            maps,
            r_true,
            r_virtual,
            generator,
            hash: cfg.config_hash(),
        })
    }

    fn prior_base(&self, cfg: &ExperimentConfig) -> PriorKnowledge {
        cfg.prior(&self.scen, self.maps.n_v())
    }
}

/// Reduction-dependent context for one (target Doppler, channel count).
struct PointPack {
    rd: Arc<RdMaps>,
    r_rd: DMatrix<Complex64>,
    v_rd: DVector<Complex64>,
    z_r_known: DVector<Complex64>,
}

impl PointPack {
    fn build(pack: &ScenarioPack, target_doppler: f64, m_bins: usize) -> CliResult<Self> {
        let rd = Arc::new(RdMaps::build(
            pack.maps.clone(),
            RdConfig::new(target_doppler, m_bins, pack.scen.m_pulses)?,
        )?);
        let g = rd.g();
        let raw = g * &pack.r_virtual * g.adjoint();
        let mut r_rd = raw.clone();
        for i in 0..r_rd.nrows() {
            for j in 0..r_rd.ncols() {
                r_rd[(i, j)] = (raw[(i, j)] + raw[(j, i)].conj()) * 0.5;
            }
        }
        let v_rd = rd.rd_virtual_steering(target_doppler, pack.scen.target.spatial_freq);
        let z_r_known = rd.apply_d(&pack.r_true)?;
        Ok(Self {
            rd,
            r_rd,
            v_rd,
            z_r_known,
        })
    }
}

/// Per-trial randomized inputs.
struct TrialDraw {
    prior: PriorKnowledge,
}

fn draw_trial(
    pack: &ScenarioPack,
    base: &PriorKnowledge,
    rng: &mut ChaCha8Rng,
    bound_sigma: Option<(f64, f64)>,
) -> TrialDraw {
    let mut prior = base.clone();
    // measured values uniform inside the true error ranges
    prior.v_p_measured = pack.scen.v_p + rng.random_range(-base.dv_pm..=base.dv_pm);
    prior.psi_measured = pack.scen.psi + rng.random_range(-base.dpsi_m..=base.dpsi_m);
    if base.dv_pm == 0.0 {
        prior.v_p_measured = pack.scen.v_p;
    }
    if base.dpsi_m == 0.0 {
        prior.psi_measured = pack.scen.psi;
    }
    if let Some((sig_v_ratio, sig_psi_ratio)) = bound_sigma {
        // the bounds handed to the algorithm are themselves uncertain
        let normal = StandardNormal;
        if sig_v_ratio > 0.0 {
            let g: f64 = Distribution::<f64>::sample(&normal, rng);
            prior.dv_pm = (base.dv_pm + sig_v_ratio * base.dv_pm * g).max(0.0);
        }
        if sig_psi_ratio > 0.0 {
            let g: f64 = Distribution::<f64>::sample(&normal, rng);
            prior.dpsi_m = (base.dpsi_m + sig_psi_ratio * base.dpsi_m * g).max(0.0);
        }
    }
    TrialDraw { prior }
}

/// One end-to-end trial of the pipeline: rank estimate, dictionary,
/// pursuit, filter, SINR. Returns linear SINR.
fn proposed_trial(
    pack: &ScenarioPack,
    point: &PointPack,
    draw: &TrialDraw,
    r_hat: Option<&DMatrix<Complex64>>,
) -> CliResult<f64> {
    let k_raw = estimate_rank(&pack.scen, &draw.prior)?.value;
    let dict = build_dictionary(&pack.scen, &draw.prior, &point.rd)?;
    let k = k_raw.min(point.rd.rd_dim() - 1).min(dict.n_atoms());
    let z_r = match r_hat {
        Some(r) => point.rd.apply_d(r)?,
        None => point.z_r_known.clone(),
    };
    let sub = omp_subspace_dictionary(&z_r, &dict, k)?;
    let fw = filter_weight(&sub.basis, &point.v_rd);
    let db = output_sinr(&fw.w, &point.v_rd, pack.scen.target.amplitude, &point.r_rd);
    Ok(db_to_linear(db))
}

fn db_to_linear(db: f64) -> f64 {
    if db == f64::NEG_INFINITY {
        0.0
    } else {
        10f64.powf(db / 10.0)
    }
}

fn linear_mean_db(vals: &[f64]) -> f64 {
    if vals.is_empty() {
        return f64::NEG_INFINITY;
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    if mean <= 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * mean.log10()
    }
}

fn default_doppler_grid() -> Vec<f64> {
    (-9..=9).map(|k| k as f64 * 0.05).collect()
}

/// Mean proposed SINR (dB) over seeded trials at one sweep point.
#[allow(clippy::too_many_arguments)]
fn run_point_mean(
    pack: &ScenarioPack,
    point: &PointPack,
    base: &PriorKnowledge,
    trials: usize,
    l_samples: usize,
    known: bool,
    master_seed: u64,
    point_idx: u64,
    bound_sigma: Option<(f64, f64)>,
) -> CliResult<f64> {
    let linears: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> CliResult<f64> {
            let seed = derive_seed(master_seed, point_idx, t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draw = draw_trial(pack, base, &mut rng, bound_sigma);
            let r_hat = if known {
                None
            } else {
                Some(
                    pack.generator
                        .sample_covariance(l_samples, derive_seed(seed, 1, 0))?,
                )
            };
            proposed_trial(pack, point, &draw, r_hat.as_ref())
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(linear_mean_db(&linears))
}

/// Mean SINR of the sample-covariance principal-components baseline.
fn run_point_pc_mean(
    pack: &ScenarioPack,
    base: &PriorKnowledge,
    target_doppler: f64,
    trials: usize,
    l_samples: usize,
    master_seed: u64,
    point_idx: u64,
) -> CliResult<f64> {
    let v_el = space_time_steering(
        target_doppler,
        pack.scen.target.spatial_freq,
        &pack.scen.geom,
        pack.scen.m_pulses,
    );
    let linears: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> CliResult<f64> {
            let seed = derive_seed(master_seed, point_idx, t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draw = draw_trial(pack, base, &mut rng, None);
            let r_hat = pack
                .generator
                .sample_covariance(l_samples, derive_seed(seed, 1, 0))?;
            // the eigen filter keeps at most the estimable rank
            let k = estimate_rank(&pack.scen, &draw.prior)?
                .value
                .min(l_samples)
                .min(pack.scen.nm() - 1);
            let fw = pc_weight(&r_hat, &v_el, k);
            let db = output_sinr(&fw.w, &v_el, pack.scen.target.amplitude, &pack.r_true);
            Ok(db_to_linear(db))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(linear_mean_db(&linears))
}

/// Virtual-domain optimum SINR at one target Doppler.
fn cpa_v_opt_db(pack: &ScenarioPack, target_doppler: f64) -> f64 {
    let v_v = pack
        .maps
        .virtual_steering(target_doppler, pack.scen.target.spatial_freq);
    let (w, _) = solve_pd(&pack.r_virtual, &v_v);
    output_sinr(&w, &v_v, pack.scen.target.amplitude, &pack.r_virtual)
}

/// Element-space optimum SINR at one target Doppler.
fn element_opt_db(pack: &ScenarioPack, target_doppler: f64) -> f64 {
    let v = space_time_steering(
        target_doppler,
        pack.scen.target.spatial_freq,
        &pack.scen.geom,
        pack.scen.m_pulses,
    );
    let (w, _) = solve_pd(&pack.r_true, &v);
    output_sinr(&w, &v, pack.scen.target.amplitude, &pack.r_true)
}

/// Output of one experiment run.
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub csv: String,
}

/// Execute the configured experiment and render its CSV.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    cfg.validate()?;
    let kind = cfg.experiment.kind;
    let rows = match kind {
        ExperimentKind::RankValidation => run_rank_validation(cfg)?,
        ExperimentKind::VarianceCurve => {
            let (rows, csv) = run_variance(cfg)?;
            return Ok(RunOutput { rows, csv });
        }
        ExperimentKind::SinrVsDoppler => run_sinr_vs_doppler(cfg)?,
        ExperimentKind::SinrVsSamples => run_sinr_vs_samples(cfg)?,
        ExperimentKind::RobustnessSweep => run_robustness(cfg)?,
        ExperimentKind::DictionarySizeSweep => run_dict_size(cfg)?,
        ExperimentKind::ChannelsSweep => run_channels(cfg)?,
    };
    let csv = crate::report::rows_to_csv(&rows);
    Ok(RunOutput { rows, csv })
}

fn run_rank_validation(cfg: &ExperimentConfig) -> CliResult<Vec<ResultRow>> {
    let pack = ScenarioPack::build(cfg)?;
    let hash = pack.hash.clone();
    let base = pack.prior_base(cfg);
    let n = pack.scen.geom.len();
    let d0 = pack.scen.geom.d0();
    let mut rows = Vec::new();
    for &beta in &[0.6, 1.0] {
        for &psi_deg in &[0.0f64, 90.0] {
            for (label, geom) in [
                ("cpa", pack.scen.geom.clone()),
                ("ula", ArrayGeometry::ula(n, d0)?),
            ] {
                let mut scen = pack.scen.clone();
                scen.geom = geom.clone();
                scen = scen.with_beta(beta);
                scen.psi = psi_deg.to_radians();
                let mut prior = base.clone();
                prior.v_p_measured = scen.v_p;
                prior.psi_measured = scen.psi;
                let est = estimate_rank(&scen, &prior)?;
                rows.push(ResultRow {
                    sweep: beta,
                    metric: format!("rank_estimate[{label},psi={psi_deg}]"),
                    value: est.value as f64,
                    trials: 1,
                    config_hash: hash.clone(),
                });
                if psi_deg == 0.0 {
                    let oracle = if label == "ula" {
                        bt_rank(beta, n, scen.m_pulses)
                    } else {
                        ebt_rank(beta, geom.positions(), scen.m_pulses)
                    };
                    let oracle_name = if label == "ula" { "bt" } else { "ebt" };
                    rows.push(ResultRow {
                        sweep: beta,
                        metric: format!("{oracle_name}_oracle[{label}]"),
                        value: oracle as f64,
                        trials: 1,
                        config_hash: hash.clone(),
                    });
                }
                let r = true_covariance(&scen);
                let numr = numerical_clutter_rank(&r, scen.sigma_n2, 0.1);
                rows.push(ResultRow {
                    sweep: beta,
                    metric: format!("numerical_rank[{label},psi={psi_deg}]"),
                    value: numr as f64,
                    trials: 1,
                    config_hash: hash.clone(),
                });
                if cfg.experiment.rank_detail {
                    for d in &est.per_angle {
                        rows.push(ResultRow {
                            sweep: d.theta,
                            metric: format!(
                                "angle_bw_aperture[{label},psi={psi_deg},beta={beta}]"
                            ),
                            value: d.b_s * d.sub_spans.iter().sum::<f64>(),
                            trials: 1,
                            config_hash: hash.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn run_variance(cfg: &ExperimentConfig) -> CliResult<(Vec<ResultRow>, String)> {
    let pack = ScenarioPack::build(cfg)?;
    let l_grid = cfg
        .experiment
        .l_grid
        .clone()
        .unwrap_or_else(|| vec![10, 20, 50, 100, 200]);
    let cnr_grid = cfg
        .experiment
        .cnr_grid_db
        .clone()
        .unwrap_or_else(|| vec![10.0, 20.0, 30.0, 40.0, 50.0]);
    let trials = cfg.experiment.trials;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for (ci, &cnr) in cnr_grid.iter().enumerate() {
        let mut scen = pack.scen.clone();
        scen.cnr_db = cnr;
        let rd = RdMaps::build(
            pack.maps.clone(),
            RdConfig::new(scen.target.doppler, cfg.experiment.m_bins, scen.m_pulses)?,
        )?;
        let out = variance_experiment(
            &scen,
            &rd,
            &l_grid,
            trials,
            derive_seed(cfg.experiment.seed, ci as u64, 0),
        );
        for row in out {
            table.push((row.l, cnr, row.empirical, row.theoretical));
            rows.push(ResultRow {
                sweep: row.l as f64,
                metric: format!("empirical_variance[cnr={cnr}dB]"),
                value: row.empirical,
                trials,
                config_hash: pack.hash.clone(),
            });
            rows.push(ResultRow {
                sweep: row.l as f64,
                metric: format!("theoretical_trace[cnr={cnr}dB]"),
                value: row.theoretical,
                trials,
                config_hash: pack.hash.clone(),
            });
        }
    }
    Ok((rows, variance_csv(&table)))
}

fn run_sinr_vs_doppler(cfg: &ExperimentConfig) -> CliResult<Vec<ResultRow>> {
    let pack = ScenarioPack::build(cfg)?;
    let base = pack.prior_base(cfg);
    let grid = cfg
        .experiment
        .doppler_grid
        .clone()
        .unwrap_or_else(default_doppler_grid);
    let trials = cfg.experiment.trials;
    let known = cfg.experiment.known_covariance;
    let mut rows = Vec::new();
    for (pi, &dop) in grid.iter().enumerate() {
        let point = PointPack::build(&pack, dop, cfg.experiment.m_bins)?;
        let mean = run_point_mean(
            &pack,
            &point,
            &base,
            trials,
            cfg.experiment.l_samples,
            known,
            cfg.experiment.seed,
            pi as u64,
            None,
        )?;
        rows.push(ResultRow {
            sweep: dop,
            metric: "proposed".into(),
            value: mean,
            trials,
            config_hash: pack.hash.clone(),
        });
        rows.push(ResultRow {
            sweep: dop,
            metric: "cpa_v_opt".into(),
            value: cpa_v_opt_db(&pack, dop),
            trials: 1,
            config_hash: pack.hash.clone(),
        });
        if known {
            rows.push(ResultRow {
                sweep: dop,
                metric: "element_opt".into(),
                value: element_opt_db(&pack, dop),
                trials: 1,
                config_hash: pack.hash.clone(),
            });
        } else {
            let pc = run_point_pc_mean(
                &pack,
                &base,
                dop,
                trials,
                cfg.experiment.l_samples,
                derive_seed(cfg.experiment.seed, 0xAC, 0),
                pi as u64,
            )?;
            rows.push(ResultRow {
                sweep: dop,
                metric: "pc".into(),
                value: pc,
                trials,
                config_hash: pack.hash.clone(),
            });
        }
    }
    Ok(rows)
}

fn run_sinr_vs_samples(cfg: &ExperimentConfig) -> CliResult<Vec<ResultRow>> {
    let pack = ScenarioPack::build(cfg)?;
    let base = pack.prior_base(cfg);
    let l_grid = cfg
        .experiment
        .l_grid
        .clone()
        .unwrap_or_else(|| vec![2, 5, 10, 20, 50, 100, 200]);
    let trials = cfg.experiment.trials;
    let dop = pack.scen.target.doppler;
    let point = PointPack::build(&pack, dop, cfg.experiment.m_bins)?;
    let opt = cpa_v_opt_db(&pack, dop);
    let mut rows = Vec::new();
    for (li, &l) in l_grid.iter().enumerate() {
        let mean = run_point_mean(
            &pack,
            &point,
            &base,
            trials,
            l,
            false,
            cfg.experiment.seed,
            li as u64,
            None,
        )?;
        rows.push(ResultRow {
            sweep: l as f64,
            metric: "proposed".into(),
            value: mean,
            trials,
            config_hash: pack.hash.clone(),
        });
        let pc = run_point_pc_mean(
            &pack,
            &base,
            dop,
            trials,
            l,
            derive_seed(cfg.experiment.seed, 0xBC, 0),
            li as u64,
        )?;
        rows.push(ResultRow {
            sweep: l as f64,
            metric: "pc".into(),
            value: pc,
            trials,
            config_hash: pack.hash.clone(),
        });
        rows.push(ResultRow {
            sweep: l as f64,
            metric: "cpa_v_opt".into(),
            value: opt,
            trials: 1,
            config_hash: pack.hash.clone(),
        });
    }
    Ok(rows)
}

fn run_robustness(cfg: &ExperimentConfig) -> CliResult<Vec<ResultRow>> {
    let pack = ScenarioPack::build(cfg)?;
    let base = pack.prior_base(cfg);
    let ratios = cfg
        .experiment
        .ratio_grid
        .clone()
        .unwrap_or_else(|| vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
    let trials = cfg.experiment.trials;
    let dop = pack.scen.target.doppler;
    let point = PointPack::build(&pack, dop, cfg.experiment.m_bins)?;
    let mut rows = Vec::new();
    for (family_idx, family) in ["vp", "psi"].iter().enumerate() {
        for (ri, &ratio) in ratios.iter().enumerate() {
            let sigma = if *family == "vp" {
                Some((ratio, 0.0))
            } else {
                Some((0.0, ratio))
            };
            let mean = run_point_mean(
                &pack,
                &point,
                &base,
                trials,
                cfg.experiment.l_samples,
                cfg.experiment.known_covariance,
                derive_seed(cfg.experiment.seed, 0xF0 + family_idx as u64, 0),
                ri as u64,
                sigma,
            )?;
            rows.push(ResultRow {
                sweep: ratio,
                metric: format!("proposed[perturb={family}]"),
                value: mean,
                trials,
                config_hash: pack.hash.clone(),
            });
        }
    }
    Ok(rows)
}

fn run_dict_size(cfg: &ExperimentConfig) -> CliResult<Vec<ResultRow>> {
    let pack = ScenarioPack::build(cfg)?;
    let base = pack.prior_base(cfg);
    let factors = cfg
        .experiment
        .dict_factors
        .clone()
        .unwrap_or_else(|| vec![2, 3, 4, 5]);
    let grid = cfg
        .experiment
        .doppler_grid
        .clone()
        .unwrap_or_else(default_doppler_grid);
    let trials = cfg.experiment.trials;
    let n_v = pack.maps.n_v();
    let points: Vec<PointPack> = grid
        .iter()
        .map(|&dop| PointPack::build(&pack, dop, cfg.experiment.m_bins))
        .collect::<CliResult<_>>()?;
    let mut rows = Vec::new();
    for (fi, &factor) in factors.iter().enumerate() {
        let mut prior = base.clone();
        prior.n_angles = factor * n_v;
        for (pi, &dop) in grid.iter().enumerate() {
            let point = &points[pi];
            let mean = run_point_mean(
                &pack,
                point,
                &prior,
                trials,
                cfg.experiment.l_samples,
                cfg.experiment.known_covariance,
                derive_seed(cfg.experiment.seed, 0xD1C7 + fi as u64, 0),
                pi as u64,
                None,
            )?;
            rows.push(ResultRow {
                sweep: dop,
                metric: format!("proposed[dict={factor}nv_me]"),
                value: mean,
                trials,
                config_hash: pack.hash.clone(),
            });
        }
    }
    for (pi, &dop) in grid.iter().enumerate() {
        let _ = pi;
        rows.push(ResultRow {
            sweep: dop,
            metric: "cpa_v_opt".into(),
            value: cpa_v_opt_db(&pack, dop),
            trials: 1,
            config_hash: pack.hash.clone(),
        });
    }
    Ok(rows)
}

fn run_channels(cfg: &ExperimentConfig) -> CliResult<Vec<ResultRow>> {
    let pack = ScenarioPack::build(cfg)?;
    let base = pack.prior_base(cfg);
    let m_list = cfg
        .experiment
        .m_bins_list
        .clone()
        .unwrap_or_else(|| vec![1, 3, 5, 7]);
    let grid = cfg
        .experiment
        .doppler_grid
        .clone()
        .unwrap_or_else(default_doppler_grid);
    let trials = cfg.experiment.trials;
    let mut rows = Vec::new();
    for (mi, &m_bins) in m_list.iter().enumerate() {
        for (pi, &dop) in grid.iter().enumerate() {
            let point = PointPack::build(&pack, dop, m_bins)?;
            let mean = run_point_mean(
                &pack,
                &point,
                &base,
                trials,
                cfg.experiment.l_samples,
                cfg.experiment.known_covariance,
                derive_seed(cfg.experiment.seed, 0xC4A + mi as u64, 0),
                pi as u64,
                None,
            )?;
            rows.push(ResultRow {
                sweep: dop,
                metric: format!("proposed[m={m_bins}]"),
                value: mean,
                trials,
                config_hash: pack.hash.clone(),
            });
        }
    }
    for &dop in &grid {
        rows.push(ResultRow {
            sweep: dop,
            metric: "cpa_v_opt".into(),
            value: cpa_v_opt_db(&pack, dop),
            trials: 1,
            config_hash: pack.hash.clone(),
        });
    }
    Ok(rows)
}

/// Dictionary dump: per atom the grid metadata, raw steering norm, and
/// the complex entries of the unit-norm column.
pub fn dump_dictionary(cfg: &ExperimentConfig) -> CliResult<String> {
    let pack = ScenarioPack::build(cfg)?;
    let base = pack.prior_base(cfg);
    let point = PointPack::build(&pack, pack.scen.target.doppler, cfg.experiment.m_bins)?;
    let dict = build_dictionary(&pack.scen, &base, &point.rd)?;
    let mut out = String::from("atom,theta_index,theta_rad,doppler,spatial_freq,raw_norm");
    for r in 0..dict.dim() {
        out.push_str(&format!(",re{r},im{r}"));
    }
    out.push_str("\r\n");
    for (c, info) in dict.grid.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            c,
            info.theta_index,
            crate::report::format_float(info.theta),
            crate::report::format_float(info.doppler),
            crate::report::format_float(info.spatial_freq),
            crate::report::format_float(dict.raw_norms[c]),
        ));
        for r in 0..dict.dim() {
            out.push_str(&format!(
                ",{},{}",
                crate::report::format_float(dict.atoms[(r, c)].re),
                crate::report::format_float(dict.atoms[(r, c)].im)
            ));
        }
        out.push_str("\r\n");
    }
    Ok(out)
}

/// Write the experiment output where the config asks, creating parent
/// directories.
pub fn write_output(cfg: &ExperimentConfig, output: &RunOutput) -> CliResult<()> {
    if let Some(path) = &cfg.experiment.out {
        let path = std::path::Path::new(path);
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
            }
        }
        std::fs::write(path, output.csv.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
