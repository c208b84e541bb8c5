//! Step-process files: `{"T", "bins", "terms": [{"bin", "X1", "X2"}]}` where
//! each coefficient is `"identity"`, `"zero"`, a Weyl spec `{"h1", "h2"}` or
//! an explicit matrix of `[re, im]` pairs. Missing coefficients are zero and
//! repeated bins add up.

use serde::{Deserialize, Serialize};

use qmall_core::white_noise::{MatrixSpec, StepProcessPair, TimeGrid};
use qmall_core::{FockOp, FockSpace, HVec, C64};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Named(String),
    Weyl { h1: Vec<f64>, h2: Vec<f64> },
    Explicit(Vec<Vec<[f64; 2]>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub bin: usize,
    #[serde(rename = "X1", default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<MatrixJson>,
    #[serde(rename = "X2", default, skip_serializing_if = "Option::is_none")]
    pub x2: Option<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessFile {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub bins: usize,
    pub terms: Vec<TermJson>,
}

impl MatrixJson {
    fn spec(&self, bins: usize) -> Result<MatrixSpec, CliError> {
        match self {
            MatrixJson::Named(name) => match name.as_str() {
                "identity" => Ok(MatrixSpec::Identity),
                "zero" => Ok(MatrixSpec::Zero),
                other => Err(CliError::Input(format!("unknown matrix name {other:?}"))),
            },
            MatrixJson::Weyl { h1, h2 } => {
                if h1.len() != bins || h2.len() != bins {
                    return Err(CliError::Input(format!("Weyl spec needs {bins} components per direction")));
                }
                Ok(MatrixSpec::Weyl { h1: HVec::real(h1), h2: HVec::real(h2) })
            }
            MatrixJson::Explicit(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::Input("explicit matrix must be square".into()));
                }
                Ok(MatrixSpec::Explicit(FockOp::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1]))))
            }
        }
    }
}

impl ProcessFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let p: ProcessFile = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        p.grid()?;
        for t in &p.terms {
            if t.bin >= p.bins {
                return Err(CliError::Input(format!("bin {} outside 0..{}", t.bin, p.bins)));
            }
        }
        Ok(p)
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.horizon, self.bins).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn realize(&self, space: &FockSpace) -> Result<StepProcessPair, CliError> {
        let grid = self.grid()?;
        if space.modes() != self.bins {
            return Err(CliError::Input(format!("{} bins need {} modes, found {}", self.bins, self.bins, space.modes())));
        }
        let mut p = StepProcessPair::zeros(space, &grid);
        for t in &self.terms {
            for (slot, spec) in [(&mut p.x1[t.bin], &t.x1), (&mut p.x2[t.bin], &t.x2)] {
                if let Some(m) = spec {
                    let matrix = m.spec(self.bins)?.realize(space).map_err(|e| match e {
                        qmall_core::Error::DimensionMismatch { expected, found } => CliError::Input(format!(
                            "explicit matrix has dimension {found}, the Fock space {expected}"
                        )),
                        other => CliError::Core(other),
                    })?;
                    *slot += matrix;
                }
            }
        }
        Ok(p)
    }
}

pub struct Sample {
    pub name: &'static str,
    pub process: ProcessFile,
    /// First violating `(bin, mode)`, or `None` for adapted samples.
    pub expected_witness: Option<(usize, usize)>,
}

const CORPUS: &[(&str, &str, Option<(usize, usize)>)] = &[
    ("constant", include_str!("../corpus/constant.json"), None),
    ("mixed_deterministic", include_str!("../corpus/mixed_deterministic.json"), None),
    ("weyl_past", include_str!("../corpus/weyl_past.json"), None),
    ("weyl_and_identity", include_str!("../corpus/weyl_and_identity.json"), None),
    ("layered", include_str!("../corpus/layered.json"), None),
    ("own_bin", include_str!("../corpus/own_bin.json"), Some((1, 1))),
];

/// The bundled corpus: five adapted processes and one that is not.
pub fn sample_corpus() -> Vec<Sample> {
    CORPUS
        .iter()
        .map(|&(name, text, expected_witness)| Sample {
            name,
            process: ProcessFile::parse(text).expect("bundled corpus parses"),
            expected_witness,
        })
        .collect()
}
