//! Configuration files shipped with the runner.

use crate::config::{parse, ConfigErrors, Loaded};

/// `(name, document)` of every preset.
pub const PRESETS: [(&str, &str); 10] = [
    ("steady-nsd", include_str!("../presets/steady-nsd.toml")),
    ("affine-gain", include_str!("../presets/affine-gain.toml")),
    ("lms-rls-tracking", include_str!("../presets/lms-rls-tracking.toml")),
    ("convergence", include_str!("../presets/convergence.toml")),
    ("pn-robustness", include_str!("../presets/pn-robustness.toml")),
    ("transfer", include_str!("../presets/transfer.toml")),
    ("lowcost", include_str!("../presets/lowcost.toml")),
    ("sparse", include_str!("../presets/sparse.toml")),
    ("echo", include_str!("../presets/echo.toml")),
    ("theory-tables", include_str!("../presets/theory-tables.toml")),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
}

/// First comment line of a preset.
pub fn description(doc: &str) -> &str {
    doc.lines().find_map(|l| l.strip_prefix('#')).map_or("", str::trim)
}

pub fn load(name: &str) -> Option<Result<Loaded, ConfigErrors>> {
    get(name).map(parse)
}
