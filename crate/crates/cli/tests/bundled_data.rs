//! Keeps the data files compiled into the binary in lockstep with the
//! generators in the core crate. `regenerate` rewrites them in place; the
//! other test fails whenever the files drift from the generators.

use std::fs;
use std::path::PathBuf;

use mcies_core::scenario::synthetic::{bundled_pv_samples, bundled_wt_samples};
use mcies_core::scenario::write_sample_paths;
use mcies_core::system::{bundled_system, write_series};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn generated() -> [(&'static str, String); 4] {
    let system = bundled_system();
    let spec =
        serde_json::to_string_pretty(&system.to_spec()).expect("spec serializes") + "\n";

    let mut series = Vec::new();
    write_series(&mut series, &system.to_series()).expect("series writes");

    let mut wt = Vec::new();
    write_sample_paths(&mut wt, &bundled_wt_samples(), &["wind capacity factor samples".into()])
        .expect("wind samples write");

    let mut pv = Vec::new();
    write_sample_paths(&mut pv, &bundled_pv_samples(), &["solar capacity factor samples".into()])
        .expect("solar samples write");

    [
        ("bundled_system.json", spec),
        ("bundled_series.csv", String::from_utf8(series).unwrap()),
        ("wt_samples.csv", String::from_utf8(wt).unwrap()),
        ("pv_samples.csv", String::from_utf8(pv).unwrap()),
    ]
}

#[test]
fn bundled_files_match_generators() {
    for (name, expected) in generated() {
        let on_disk = fs::read_to_string(data_dir().join(name))
            .unwrap_or_else(|e| panic!("reading {name}: {e}"));
        assert_eq!(
            on_disk, expected,
            "{name} is stale; run the ignored `regenerate` test to refresh it"
        );
    }
}

#[test]
#[ignore = "rewrites the bundled data files in the source tree"]
fn regenerate() {
    for (name, content) in generated() {
        fs::write(data_dir().join(name), content)
            .unwrap_or_else(|e| panic!("writing {name}: {e}"));
    }
}
