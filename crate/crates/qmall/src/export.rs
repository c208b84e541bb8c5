use std::io::Write;
use std::path::Path;

use qmall_core::wigner::DensityGrid;

use crate::error::CliError;

/// 17 significant digits, so values round-trip exactly.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `x,y,value` rows, `x` varying slowest; only the real part is written.
pub fn grid_csv(w: &DensityGrid) -> String {
    let mut out = String::from("x,y,value\n");
    for i in 0..w.nodes {
        for j in 0..w.nodes {
            out.push_str(&fmt_num(w.axis(i)));
            out.push(',');
            out.push_str(&fmt_num(w.axis(j)));
            out.push(',');
            out.push_str(&fmt_num(w.at(i, j).re));
            out.push('\n');
        }
    }
    out
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = std::fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
