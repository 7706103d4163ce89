//! Structured fuzzing of the config semantics: generate syntactically
//! valid documents with hostile numeric values and check that
//! validation either rejects them or yields types whose cheap
//! invariants hold, without panics.

#![no_main]

use arbitrary::Arbitrary;
use castap_cli::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

#[derive(Arbitrary, Debug)]
struct RawConfig {
    coprime: bool,
    n1: u8,
    n2: u8,
    n_ula: u8,
    m_pulses: u8,
    beta: f64,
    psi_deg: f64,
    phi_deg: f64,
    n_clutter: u16,
    cnr_db: f64,
    sigma_n2: f64,
    doppler: f64,
    dv_pm: f64,
    dpsi_m_deg: f64,
    m_e: u8,
    m_bins: u8,
    kind: u8,
    seed: u64,
}

const KINDS: &[&str] = &[
    "rank_validation",
    "variance_curve",
    "sinr_vs_doppler",
    "sinr_vs_samples",
    "robustness_sweep",
    "dictionary_size_sweep",
    "channels_sweep",
];

fn toml_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

fuzz_target!(|raw: RawConfig| {
    let array = if raw.coprime {
        format!("kind = \"coprime\"\nn1 = {}\nn2 = {}", raw.n1, raw.n2)
    } else {
        format!("kind = \"ula\"\nn = {}", raw.n_ula)
    };
    let text = format!(
        "[scenario]\nm_pulses = {}\nbeta = {}\npsi_deg = {}\nphi_deg = {}\n\
         n_clutter = {}\ncnr_db = {}\nsigma_n2 = {}\n\
         [scenario.array]\n{array}\n\
         [scenario.target]\ndoppler = {}\n\
         [prior]\ndv_pm = {}\ndpsi_m_deg = {}\nm_e = {}\n\
         [experiment]\nkind = \"{}\"\nm_bins = {}\nseed = {}\n",
        raw.m_pulses,
        toml_num(raw.beta),
        toml_num(raw.psi_deg),
        toml_num(raw.phi_deg),
        raw.n_clutter,
        toml_num(raw.cnr_db),
        toml_num(raw.sigma_n2),
        toml_num(raw.doppler),
        toml_num(raw.dv_pm),
        toml_num(raw.dpsi_m_deg),
        raw.m_e,
        KINDS[(raw.kind as usize) % KINDS.len()],
        raw.m_bins,
        raw.seed,
    );
    if let Ok(cfg) = ExperimentConfig::parse_str(&text) {
        let _ = cfg.config_hash();
        if let Ok(scen) = cfg.scenario() {
            assert!(scen.nm() >= 1);
            let patches = scen.clutter_patches();
            assert_eq!(patches.len(), scen.n_clutter);
            assert!(patches.powers.iter().all(|&p| p >= 0.0));
        }
    }
});
