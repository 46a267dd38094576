#![no_main]

use dfrc::config::{parse_complex, parse_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(m) = parse_matrix(data) {
        assert!(m.nrows() >= 1 && m.ncols() >= 1);
        assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }
    if let Ok(z) = parse_complex(data) {
        assert!(!z.re.is_nan() && !z.im.is_nan());
    }
});
