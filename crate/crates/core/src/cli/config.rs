use std::path::{Path, PathBuf};

use num_traits::One;
use serde::Deserialize;

use super::CliError;
use crate::padic::{parse_rational, Matrix3, Prime, Rational};
use crate::random_walk::MeasureSpec;

fn default_tolerance() -> u64 {
    5
}

fn default_depth() -> u64 {
    2
}

fn default_weight() -> String {
    "1".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    matrix: [[String; 3]; 3],
    #[serde(default = "default_weight")]
    weight: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    prime: u64,
    atoms: Vec<RawAtom>,
    #[serde(default)]
    symmetrize: bool,
    steps: u64,
    trajectories: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_tolerance")]
    tolerance_exponent: u64,
    #[serde(default = "default_depth")]
    germ_depth: u64,
    #[serde(default)]
    out_dir: Option<PathBuf>,
}

/// A validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub prime: Prime,
    pub atoms: Vec<(Matrix3, Rational)>,
    pub symmetrize: bool,
    pub steps: u64,
    pub trajectories: u64,
    pub seed: u64,
    /// Limit flags must be stable to p^{−k} over the last quarter of a run.
    pub tolerance_exponent: u64,
    /// Deepest residue level p^k used to bin flags.
    pub germ_depth: u64,
    pub out_dir: Option<PathBuf>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn rational(s: &str) -> Result<Rational, CliError> {
    parse_rational(s).ok_or_else(|| bad(format!("not a rational number: {s:?}")))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let prime = Prime::new(raw.prime).map_err(|e| bad(e.to_string()))?;
        if raw.atoms.is_empty() {
            return Err(bad("no atoms"));
        }
        let mut atoms = Vec::with_capacity(raw.atoms.len());
        for (i, a) in raw.atoms.iter().enumerate() {
            let mut rows: [[Rational; 3]; 3] = Default::default();
            for (r, row) in a.matrix.iter().enumerate() {
                for (c, x) in row.iter().enumerate() {
                    rows[r][c] = rational(x)?;
                }
            }
            let m = Matrix3::from_rows(rows);
            if !m.det().is_one() {
                return Err(bad(format!("atom {i} does not have determinant 1")));
            }
            let w = rational(&a.weight)?;
            if w <= Rational::from_integer(0.into()) {
                return Err(bad(format!("atom {i} has a nonpositive weight")));
            }
            atoms.push((m, w));
        }
        if raw.steps == 0 || raw.trajectories == 0 {
            return Err(bad("steps and trajectories must be at least 1"));
        }
        if raw.germ_depth == 0 {
            return Err(bad("germ_depth must be at least 1"));
        }
        Ok(ExperimentConfig {
            prime,
            atoms,
            symmetrize: raw.symmetrize,
            steps: raw.steps,
            trajectories: raw.trajectories,
            seed: raw.seed,
            tolerance_exponent: raw.tolerance_exponent,
            germ_depth: raw.germ_depth,
            out_dir: raw.out_dir,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn spec(&self) -> Result<MeasureSpec, CliError> {
        MeasureSpec::new(self.prime, self.atoms.clone(), self.symmetrize, self.seed).map_err(|e| bad(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAG: &str = r#"{
        "prime": 3,
        "atoms": [{"matrix": [["1/3","0","0"],["0","1","0"],["0","0","3"]]}],
        "steps": 3, "trajectories": 1
    }"#;

    #[test]
    fn parses_fixture() {
        let c = ExperimentConfig::from_json(DIAG).unwrap();
        assert_eq!(c.prime.get(), 3);
        assert_eq!(c.atoms.len(), 1);
        assert_eq!(c.tolerance_exponent, 5);
        assert!(c.spec().is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        let not_prime = DIAG.replace("\"prime\": 3", "\"prime\": 4");
        assert!(matches!(ExperimentConfig::from_json(&not_prime), Err(CliError::Config(_))));
        let det = DIAG.replace("\"1/3\"", "\"1\"");
        assert!(matches!(ExperimentConfig::from_json(&det), Err(CliError::Config(_))));
        let junk = DIAG.replace("\"0\",\"0\",\"3\"", "\"0\",\"0\",\"x\"");
        assert!(matches!(ExperimentConfig::from_json(&junk), Err(CliError::Config(_))));
        assert!(ExperimentConfig::from_json("{").is_err());
    }
}
