use std::sync::OnceLock;

use serde::Deserialize;

const SOURCE: &str = include_str!("../../tolerances.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub table1: Table1,
    pub basis_roundtrip: BasisRoundtrip,
    pub positivity: Positivity,
    pub tanh_search: TanhSearch,
    pub subduality: Subduality,
    pub reproducing: Reproducing,
    pub continuity: Continuity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1 {
    pub seed: u64,
    pub cameron_martin_grid: usize,
    pub cameron_martin: f64,
    pub polynomial_pairs: usize,
    pub polynomial: f64,
    pub gaussian_panels: usize,
    pub gaussian_radius: f64,
    pub gaussian: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisRoundtrip {
    pub pairs: usize,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Positivity {
    pub points: usize,
    pub relative: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TanhSearch {
    pub seed: u64,
    pub budget: usize,
    pub witness_below: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subduality {
    pub seed: u64,
    pub pairs: usize,
    pub functions: usize,
    pub pairing: f64,
    pub p2_collapse: f64,
    pub holder: f64,
    pub roundtrip: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reproducing {
    pub expansions: usize,
    pub points: usize,
    pub relative: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Continuity {
    pub trials: usize,
    pub slack: f64,
}

/// The checked-in tolerance manifest.
pub fn manifest() -> &'static Manifest {
    static PARSED: OnceLock<Manifest> = OnceLock::new();
    PARSED.get_or_init(|| toml::from_str(SOURCE).expect("tolerances.toml is well-formed"))
}

#[cfg(test)]
mod tests {
    #[test]
    fn manifest_parses() {
        let m = super::manifest();
        assert_eq!(m.tanh_search.budget, 10_000);
        assert_eq!(m.table1.cameron_martin, 0.0);
    }
}
