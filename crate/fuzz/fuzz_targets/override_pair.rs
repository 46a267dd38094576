#![no_main]

use dfrc::config::{parse_config_str, parse_override};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok((key, value)) = parse_override(data) {
        assert!(!key.is_empty() && !value.is_empty());
        assert_eq!(key, key.trim());
        assert_eq!(value, value.trim());
        let _ = parse_config_str("preset = table1\n", &[format!("{key}={value}")]);
    }
});
