#![no_main]

use dfrc::config::{parse_config_str, print_config};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // a config that parses must print to text that parses back to itself
    if let Ok(cfg) = parse_config_str(data, &[] as &[&str]) {
        let again =
            parse_config_str(&print_config(&cfg), &[] as &[&str]).expect("printed config parses");
        assert_eq!(again, cfg);
    }
    let _ = parse_config_str("preset = table1\n", &[data]);
});
