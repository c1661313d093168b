use sha2::{Digest, Sha256};
use stickslip_cli::{preset, PRESET_NAMES};

// (name, kd, kp, ki, fc, x0, t_max)
#[rustfmt::skip]
const TABLE: &[(&str, f64, f64, f64, f64, [f64; 3], f64)] = &[
    ("example1",  0.0, 100.0,  1.0,    1.0,   [0.0,  0.0,  10.0], 60.0),
    ("example2a", 20.0, 100.0, 1000.0, 50.0,  [0.0, -1.1,  0.0], 120.0),
    ("example2b", 20.0, 100.0, 1000.0, 75.0,  [0.0, -1.1,  0.0], 120.0),
    ("example2c", 20.0, 100.0, 1000.0, 100.0, [0.0, -1.1,  0.0], 120.0),
    ("example3",  10.0, 1040.0, 8000.0, 100.0, [0.0, -0.15, 0.0], 10.0),
    ("example4a", 56.0, 1040.0, 6400.0, 100.0, [0.0, -0.2,  0.0], 20.0),
    ("example4b", 56.0, 1040.0, 6400.0, 100.0, [0.0, -0.25, 0.0], 20.0),
    ("example4c", 56.0, 1040.0, 6400.0, 100.0, [0.0, -0.3,  0.0], 20.0),
    ("example4d", 56.0, 1040.0, 6400.0, 100.0, [0.0, -0.35, 0.0], 20.0),
    ("example5",  20.0, 100.0, 1000.0, 50.0,  [0.0, -0.5,  0.0], 1e5),
];

fn canonical() -> String {
    PRESET_NAMES
        .iter()
        .map(|name| {
            let c = preset(name).unwrap();
            format!(
                "{name} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?}\n",
                c.gains.kd, c.gains.kp, c.gains.ki, c.fc, c.x0.x1, c.x0.x2, c.x0.x3, c.t_max
            )
        })
        .collect()
}

#[test]
fn presets_match_the_published_values() {
    assert_eq!(PRESET_NAMES.len(), TABLE.len());
    for &(name, kd, kp, ki, fc, x0, t_max) in TABLE {
        let c = preset(name).unwrap_or_else(|| panic!("missing {name}"));
        assert_eq!((c.gains.kd, c.gains.kp, c.gains.ki), (kd, kp, ki), "{name}");
        assert_eq!(c.fc, fc, "{name}");
        assert_eq!([c.x0.x1, c.x0.x2, c.x0.x3], x0, "{name}");
        assert_eq!(c.t_max, t_max, "{name}");
    }
}

#[test]
fn preset_checksum_is_frozen() {
    let digest = Sha256::digest(canonical().as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(
        hex,
        "6f980581f46424828b16d7cba9ca6dd275498cc8d19b1f11c1ce1a1d1fd628be",
        "preset table changed:\n{}",
        canonical()
    );
}
