use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FusionError;
use crate::sensor_io::SensorKind;
use crate::vision::VisionSource;

/// Input modality of a classifier. Fusion variants pair EMG with exactly
/// one vision source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Modality {
    Emg,
    Dvs,
    Dav,
    Frm,
    FusDvs,
    FusDav,
    FusFrm,
}

impl Modality {
    pub const ALL: [Modality; 7] = [
        Modality::Emg,
        Modality::Dvs,
        Modality::Dav,
        Modality::Frm,
        Modality::FusDvs,
        Modality::FusDav,
        Modality::FusFrm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Emg => "EMG",
            Modality::Dvs => "DVS",
            Modality::Dav => "DAV",
            Modality::Frm => "FRM",
            Modality::FusDvs => "FUS-DVS",
            Modality::FusDav => "FUS-DAV",
            Modality::FusFrm => "FUS-FRM",
        }
    }

    pub fn uses_emg(self) -> bool {
        matches!(self, Modality::Emg | Modality::FusDvs | Modality::FusDav | Modality::FusFrm)
    }

    pub fn vision_source(self) -> Option<VisionSource> {
        match self {
            Modality::Emg => None,
            Modality::Dvs | Modality::FusDvs => Some(VisionSource::Dvs),
            Modality::Dav | Modality::FusDav => Some(VisionSource::Dav),
            Modality::Frm | Modality::FusFrm => Some(VisionSource::Frm),
        }
    }

    pub fn is_fusion(self) -> bool {
        self.uses_emg() && self.vision_source().is_some()
    }

    /// Sensor the vision part needs, if any.
    pub fn sensor_kind(self) -> Option<SensorKind> {
        self.vision_source().map(|s| match s {
            VisionSource::Dvs => SensorKind::Dvs128,
            VisionSource::Dav | VisionSource::Frm => SensorKind::Davis240,
        })
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        Modality::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| FusionError::UnknownModality(s.to_string()))
    }
}

impl TryFrom<String> for Modality {
    type Error = FusionError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Modality> for String {
    fn from(m: Modality) -> String {
        m.name().to_string()
    }
}
