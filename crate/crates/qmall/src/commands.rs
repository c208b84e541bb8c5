use std::path::{Path, PathBuf};

use serde::Serialize;

use qmall_core::fock::interior_norm;
use qmall_core::linalg::{fro_norm, max_abs};
use qmall_core::operators::{second_quantization, GaussianSpec};
use qmall_core::wigner::{wigner_density, GridSpec};
use qmall_core::white_noise::{
    adaptedness_check, belavkin_decomposition, belavkin_integral, riemann_ito_sum, skorohod_integral,
};
use qmall_core::{DirectionPair, FockSpace, FockVec, HVec, State, C64};

use crate::checks::run_checks;
use crate::config::Config;
use crate::error::CliError;
use crate::export::{grid_csv, to_json, write_atomic};
use crate::process::ProcessFile;
use crate::report::ResidualReport;

/// Relative depth below which a Wigner value counts as negative.
pub const NEGATIVITY_THRESHOLD: f64 = 1e-9;

fn space(cfg: &Config, modes: usize) -> Result<FockSpace, CliError> {
    Ok(FockSpace::with_limit(modes, cfg.cutoff, cfg.dimension_limit)?)
}

pub fn cmd_check(cfg: &Config, out: Option<&Path>, timings: bool) -> Result<ResidualReport, CliError> {
    let report = run_checks(cfg, timings)?;
    if let Some(p) = out {
        write_atomic(p, report.to_json().as_bytes())?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Vacuum,
    Gaussian { lambdas: Vec<f64>, t: f64 },
    /// JSON array of `[re, im]` amplitudes over the occupation basis.
    Vector(PathBuf),
}

impl StateSpec {
    fn label(&self) -> String {
        match self {
            StateSpec::Vacuum => "vacuum".into(),
            StateSpec::Gaussian { lambdas, t } => format!("gaussian(lambdas={lambdas:?}, t={t})"),
            StateSpec::Vector(p) => format!("vector({})", p.display()),
        }
    }

    fn build(&self, s: &FockSpace) -> Result<State, CliError> {
        match self {
            StateSpec::Vacuum => Ok(State::vacuum(s)),
            StateSpec::Gaussian { lambdas, t } => {
                if lambdas.len() != s.modes() {
                    return Err(CliError::Usage(format!("{} lambdas for {} modes", lambdas.len(), s.modes())));
                }
                let spec = GaussianSpec::new(lambdas.clone(), *t)?;
                Ok(State::density(second_quantization(s, &spec)?.normalized())?)
            }
            StateSpec::Vector(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let amps: Vec<[f64; 2]> =
                    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                if amps.len() != s.dim() {
                    return Err(CliError::Input(format!(
                        "{}: {} amplitudes for a space of dimension {}",
                        path.display(),
                        amps.len(),
                        s.dim()
                    )));
                }
                let v = FockVec::from_iterator(s.dim(), amps.iter().map(|a| C64::new(a[0], a[1])));
                State::vector_normalized(v).map_err(|e| CliError::Input(e.to_string()))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridInfo {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub nodes: usize,
    pub dx: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WignerSidecar {
    pub state: String,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    /// `⟨h₁,h₂⟩`; zero means the pair is degenerate and the density is a product.
    pub h_pairing: f64,
    pub degenerate_pair: bool,
    pub grid: GridInfo,
    pub normalization: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub max_imag: f64,
    pub negativity_flag: bool,
}

pub fn cmd_wigner(
    cfg: &Config,
    state: &StateSpec,
    h1: &[f64],
    h2: &[f64],
    out: &Path,
) -> Result<WignerSidecar, CliError> {
    if h1.len() != cfg.modes || h2.len() != cfg.modes {
        return Err(CliError::Usage(format!("h1 and h2 need {} components", cfg.modes)));
    }
    let s = space(cfg, cfg.modes)?;
    let h = DirectionPair::new(HVec::real(h1), HVec::real(h2));
    let st = state.build(&s)?;
    let grid = GridSpec::new(cfg.grid.half_width, cfg.grid.nodes)?;
    let w = wigner_density(&s, &st, &h, &grid)?;
    let pairing = h.k1.inner(&h.k2).re;
    let (min_value, max_value) = (w.min_real(), w.max_real());
    let sidecar = WignerSidecar {
        state: state.label(),
        h1: h1.to_vec(),
        h2: h2.to_vec(),
        h_pairing: pairing,
        degenerate_pair: pairing == 0.0,
        grid: GridInfo { half_width: w.half_width(), nodes: w.nodes, dx: w.step },
        normalization: w.integral().re,
        min_value,
        max_value,
        max_imag: w.max_imag_abs(),
        negativity_flag: min_value < -NEGATIVITY_THRESHOLD * max_value.abs(),
    };
    write_atomic(out, grid_csv(&w).as_bytes())?;
    write_atomic(&out.with_extension("json"), to_json(&sidecar).as_bytes())?;
    Ok(sidecar)
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussianReport {
    pub lambdas: Vec<f64>,
    pub t: f64,
    pub cutoff: usize,
    pub z_truncated: f64,
    pub z_exact: f64,
    pub tail_gap: f64,
    /// `e^{−(N+1)tλ}/(1−e^{−tλ})`, the exact tail for a single mode.
    pub tail_bound: Option<f64>,
    pub mean_occupations: Vec<f64>,
    pub truncated_mean_occupations: Vec<f64>,
}

pub fn cmd_gaussian(cfg: &Config, lambdas: &[f64], t: f64, out: Option<&Path>) -> Result<GaussianReport, CliError> {
    let spec = GaussianSpec::new(lambdas.to_vec(), t)?;
    let s = space(cfg, lambdas.len())?;
    let sq = second_quantization(&s, &spec)?;
    let mut occ = vec![0.0; lambdas.len()];
    for i in 0..s.dim() {
        let p = sq.rho[(i, i)].re / sq.z_truncated;
        for (o, n) in occ.iter_mut().zip(s.tuple_of(i)) {
            *o += p * f64::from(*n);
        }
    }
    let tail_bound = (lambdas.len() == 1).then(|| {
        let q = (-t * lambdas[0]).exp();
        q.powi(s.cutoff() as i32 + 1) / (1.0 - q)
    });
    let report = GaussianReport {
        lambdas: lambdas.to_vec(),
        t,
        cutoff: s.cutoff(),
        z_truncated: sq.z_truncated,
        z_exact: sq.z_exact,
        tail_gap: sq.tail_gap,
        tail_bound,
        mean_occupations: spec.mean_occupations(),
        truncated_mean_occupations: occ,
    };
    if let Some(p) = out {
        write_atomic(p, to_json(&report).as_bytes())?;
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SkorohodReport {
    pub horizon: f64,
    pub bins: usize,
    pub cutoff: usize,
    pub adapted: bool,
    /// First `(bin, mode)` whose ladder operators fail to commute with the coefficient.
    pub witness: Option<(usize, usize)>,
    /// `‖δ − HP‖` below the top degree; `None` when the process is not adapted.
    pub hp_residual: Option<f64>,
    pub hp_status: &'static str,
    pub ordering_residual: f64,
    /// `‖δ − Belavkin–Lindsay sum‖` over the whole truncated space.
    pub belavkin_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub skorohod_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skorohod_matrix: Option<Vec<Vec<[f64; 2]>>>,
}

pub fn cmd_skorohod(cfg: &Config, process: &Path, out: Option<&Path>, dump: bool) -> Result<SkorohodReport, CliError> {
    let text = std::fs::read_to_string(process).map_err(|e| CliError::io(process, e))?;
    let file = ProcessFile::parse(&text)?;
    let grid = file.grid()?;
    let s = space(cfg, file.bins)?;
    let p = file.realize(&s)?;
    let witness = adaptedness_check(&s, &grid, &p)?;
    let delta = skorohod_integral(&s, &grid, &p)?;
    let sum = riemann_ito_sum(&s, &grid, &p)?;
    let d = s.cutoff().saturating_sub(1);
    let hp_residual = witness.is_none().then(|| interior_norm(&s, &(&delta - &sum.value), d));
    let belavkin = belavkin_integral(&s, &grid, &belavkin_decomposition(&p))?;
    let belavkin_residual = max_abs(&(&belavkin - &delta));
    let tolerance = 1e-9 * cfg.tolerance_scale();
    let pass = hp_residual.is_none_or(|r| r <= tolerance) && belavkin_residual <= tolerance;
    let report = SkorohodReport {
        horizon: file.horizon,
        bins: file.bins,
        cutoff: s.cutoff(),
        adapted: witness.is_none(),
        witness,
        hp_residual,
        hp_status: if witness.is_none() { "compared" } else { "not applicable" },
        ordering_residual: sum.ordering_residual,
        belavkin_residual,
        tolerance,
        pass,
        skorohod_norm: fro_norm(&delta),
        skorohod_matrix: dump.then(|| {
            (0..delta.nrows()).map(|i| (0..delta.ncols()).map(|j| [delta[(i, j)].re, delta[(i, j)].im]).collect()).collect()
        }),
    };
    if let Some(o) = out {
        write_atomic(o, to_json(&report).as_bytes())?;
    }
    Ok(report)
}
