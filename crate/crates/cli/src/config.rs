//! Optional defaults file. `QLSS_CONFIG` names a JSON file whose values fill
//! in any flag the user left off; explicit flags always win.

use serde::Deserialize;

use qlss_core::{Error, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub nc: Option<usize>,
    pub t: Option<f64>,
    pub c_const: Option<f64>,
    pub l: Option<usize>,
    pub r: Option<f64>,
    pub nc_range: Option<String>,
    pub qubits: Option<String>,
    pub budget: Option<f64>,
    pub max_iter: Option<usize>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn from_env() -> Result<Self> {
        let Some(path) = std::env::var_os("QLSS_CONFIG") else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| {
            Error::Parse(format!("config {}: {e}", path.to_string_lossy()))
        })
    }
}
