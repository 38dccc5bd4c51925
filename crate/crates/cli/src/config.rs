//! Job configuration files.

use serde::Deserialize;

use latspec::wiener::OperatorDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Bands,
    Limitops,
    Oracle,
    Waveguide,
    Threebody,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Grid resolution: one number for every axis or one per axis.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    #[serde(default)]
    pub operator: Option<OperatorDescriptor>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Extremum refinement tolerance.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default)]
    pub limits: LimitSection,
    #[serde(default)]
    pub waveguide: Option<WaveguideSection>,
    #[serde(default)]
    pub threebody: Option<ThreeBodySection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    #[serde(default, rename = "L")]
    pub radii: Option<Vec<i64>>,
    /// `"all"` or `"extremal:k"`.
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub residual_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSection {
    #[serde(default)]
    pub j_max: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub radius: Option<i64>,
    #[serde(default)]
    pub so_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub start: i64,
    pub middle: Vec<f64>,
    pub minus: f64,
    pub plus: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideSection {
    pub dim: usize,
    pub minus: [f64; 2],
    pub plus: [f64; 2],
    pub profiles: Vec<ProfileSection>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub radius: i64,
    pub table: Vec<f64>,
    #[serde(default)]
    pub decay_radius: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeBodySection {
    pub m1: f64,
    pub m2: f64,
    #[serde(default)]
    pub w1: Option<PotentialSection>,
    #[serde(default)]
    pub w2: Option<PotentialSection>,
    #[serde(default)]
    pub w12: Option<PotentialSection>,
    #[serde(default)]
    pub decay_tol: Option<f64>,
    /// Truncation radii for the six-dimensional interaction operator.
    #[serde(default)]
    pub interaction_radii: Option<Vec<i64>>,
    #[serde(default)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let c: JobConfig = serde_json::from_str(
            r#"{"command": "spectrum", "operator": {"dim": 1, "laplacian": true}, "truncation": {"L": [10, 20]}, "grid": 64}"#,
        )
        .unwrap();
        assert_eq!(c.command, Command::Spectrum);
        assert_eq!(c.truncation.radii, Some(vec![10, 20]));
        assert_eq!(c.grid, Some(GridSpec::Uniform(64)));
        assert!(serde_json::from_str::<JobConfig>(r#"{"command": "spectrum", "extra": 1}"#).is_err());
        assert!(serde_json::from_str::<JobConfig>(r#"{"command": "nope"}"#).is_err());
        assert!(serde_json::from_str::<JobConfig>(r#"{"command": "oracle", "truncation": {"l": [1]}}"#).is_err());
    }
}
