//! Feed arbitrary bytes through the TOML config parser: parsing must
//! never panic, and accepted configs must validate, hash stably, and
//! convert into library types without panicking.

#![no_main]

use castap_cli::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::parse_str(text) {
        let h1 = cfg.config_hash();
        let h2 = cfg.config_hash();
        assert_eq!(h1, h2);
        // conversion may reject (e.g. non-coprime pairs) but must not panic
        if let Ok(scen) = cfg.scenario() {
            let _ = scen.beta();
            let _ = scen.patch_power();
        }
    }
});
