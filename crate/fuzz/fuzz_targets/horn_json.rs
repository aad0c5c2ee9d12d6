#![no_main]

use libfuzzer_sys::fuzz_target;

mod checks {
    #![allow(dead_code)]
    include!("../checks.rs");
}

fuzz_target!(|data: &[u8]| checks::check_horn_json(data));
