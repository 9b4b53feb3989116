//! Model bundle shared by the sequence interpreter and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::readout::{DqdConfig, TiaModel, TunnelSpec};
use crate::resonance::{DriveSpec, SpinSystem};

/// Bundled models file (JSON).
pub const BUNDLED_MODELS: &str = include_str!("../data/models.json");
/// Bundled two-dot manipulation and readout program.
pub const BUNDLED_FIG3: &str = include_str!("../data/fig3.seq");

/// Drive settings; the field amplitude follows from the spin g-factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSettings {
    pub f_r: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Models {
    pub spin: SpinSystem,
    pub dqd: DqdConfig,
    #[serde(default)]
    pub tunnel: TunnelSpec,
    #[serde(default = "TiaModel::room_temperature")]
    pub tia: TiaModel,
    pub drive: DriveSettings,
}

impl Models {
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_MODELS).expect("bundled models parse")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Models =
            serde_json::from_str(text).map_err(|e| Error::config(format!("models file: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        SpinSystem::new(self.spin.g_factor, self.spin.b0)
            .map_err(|e| Error::config(e.to_string()))?;
        self.dqd.validate()?;
        self.tunnel.validate()?;
        self.tia.validate()?;
        if !(self.drive.f_r > 0.0) {
            return Err(Error::config("drive Rabi frequency must be positive"));
        }
        Ok(())
    }

    pub fn drive_spec(&self) -> Result<DriveSpec> {
        DriveSpec::from_rabi(self.spin.g_factor, self.drive.f_r, self.drive.phase)
    }
}
