#![no_main]
use libfuzzer_sys::fuzz_target;
use sparse_pca::bench::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 64 * 1024 {
        return;
    }
    if let Ok(config) = ExperimentConfig::from_toml_str(text) {
        let _ = config.validate();
        if let Ok(written) = config.to_toml_string() {
            let again = ExperimentConfig::from_toml_str(&written).expect("own output parses");
            assert_eq!(format!("{config:?}"), format!("{again:?}"));
        }
    }
});
