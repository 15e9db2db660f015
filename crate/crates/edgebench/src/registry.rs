//! Shared domain types and the processor/model registry.
//!
//! The registry is one JSON document with top-level keys `processors`,
//! `models`, and `targets`. Memory is in bytes, currents in mA, voltage in V.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read registry: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid registry JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{kind} `{id}`: {violation}")]
    Invariant {
        kind: &'static str,
        id: String,
        violation: String,
    },
    #[error("model `{0}` is already quantized")]
    AlreadyQuantized(String),
}

/// Which scalar the `quality` field carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityKind {
    Accuracy,
    Auc,
}

/// Fitted FLOPS→latency line plus the mean active current seen while fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Seconds per FLOP.
    pub latency_slope: f64,
    /// Seconds.
    pub latency_intercept: f64,
    /// Coefficient of determination of the fit, in [0, 1].
    pub r_squared: f64,
    /// Duration-weighted mean current during inference, mA.
    pub active_current: f64,
    /// Number of calibration points behind the fit.
    pub n_points: usize,
}

/// A target core's electrical and capacity constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessorProfile {
    pub id: String,
    /// Datasheet deep-sleep current, mA.
    pub idle_current: f64,
    /// Volts.
    pub supply_voltage: f64,
    /// Bytes.
    pub ram_capacity: u64,
    /// Bytes.
    pub rom_capacity: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
}

/// One candidate model and its declared footprint and quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub id: String,
    pub use_case: String,
    /// Parameter count.
    pub params: u64,
    /// Operations per inference.
    pub flops: u64,
    pub ram_bytes: u64,
    pub rom_bytes: u64,
    /// Accuracy or AUC in [0, 1]; see `quality_kind`.
    pub quality: f64,
    pub quality_kind: QualityKind,
    pub quantized: bool,
}

/// Per-use-case minimum quality, treated as a hard constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UseCaseTarget {
    pub use_case: String,
    pub quality_threshold: f64,
    pub quality_kind: QualityKind,
}

/// The loaded configuration: processors, candidate models, quality targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub processors: Vec<ProcessorProfile>,
    pub models: Vec<ModelDescriptor>,
    pub targets: Vec<UseCaseTarget>,
}

impl Registry {
    /// Parses and validates a registry document.
    pub fn from_json(doc: &str) -> Result<Self, RegistryError> {
        let registry: Registry = serde_json::from_str(doc)?;
        registry.validate()?;
        Ok(registry)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, RegistryError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }

    pub fn processor(&self, id: &str) -> Option<&ProcessorProfile> {
        self.processors.iter().find(|p| p.id == id)
    }

    pub fn model(&self, id: &str) -> Option<&ModelDescriptor> {
        self.models.iter().find(|m| m.id == id)
    }

    pub fn target(&self, use_case: &str) -> Option<&UseCaseTarget> {
        self.targets.iter().find(|t| t.use_case == use_case)
    }

    /// Checks every record's invariants and id uniqueness within each list.
    pub fn validate(&self) -> Result<(), RegistryError> {
        let mut seen = BTreeSet::new();
        for p in &self.processors {
            if !seen.insert(p.id.clone()) {
                return Err(RegistryError::DuplicateId {
                    kind: "processor",
                    id: p.id.clone(),
                });
            }
            p.validate()?;
        }
        seen.clear();
        for m in &self.models {
            if !seen.insert(m.id.clone()) {
                return Err(RegistryError::DuplicateId {
                    kind: "model",
                    id: m.id.clone(),
                });
            }
            m.validate()?;
        }
        seen.clear();
        for t in &self.targets {
            if !seen.insert(t.use_case.clone()) {
                return Err(RegistryError::DuplicateId {
                    kind: "target",
                    id: t.use_case.clone(),
                });
            }
            t.validate()?;
        }
        Ok(())
    }
}

impl ProcessorProfile {
    fn validate(&self) -> Result<(), RegistryError> {
        let fail = |violation: String| RegistryError::Invariant {
            kind: "processor",
            id: self.id.clone(),
            violation,
        };
        if !(self.idle_current > 0.0) {
            return Err(fail(format!("idle_current must be > 0, got {}", self.idle_current)));
        }
        if !(self.supply_voltage > 0.0) {
            return Err(fail(format!(
                "supply_voltage must be > 0, got {}",
                self.supply_voltage
            )));
        }
        if self.ram_capacity == 0 {
            return Err(fail("ram_capacity must be > 0".into()));
        }
        if self.rom_capacity == 0 {
            return Err(fail("rom_capacity must be > 0".into()));
        }
        if let Some(cal) = &self.calibration {
            if !(0.0..=1.0).contains(&cal.r_squared) {
                return Err(fail(format!("r_squared must be in [0, 1], got {}", cal.r_squared)));
            }
            if !(cal.active_current > 0.0) {
                return Err(fail(format!(
                    "calibration active_current must be > 0, got {}",
                    cal.active_current
                )));
            }
            if cal.n_points < 2 {
                return Err(fail(format!(
                    "calibration n_points must be >= 2, got {}",
                    cal.n_points
                )));
            }
        }
        Ok(())
    }
}

impl ModelDescriptor {
    fn validate(&self) -> Result<(), RegistryError> {
        let fail = |violation: String| RegistryError::Invariant {
            kind: "model",
            id: self.id.clone(),
            violation,
        };
        if self.flops == 0 {
            return Err(fail("flops must be > 0".into()));
        }
        if self.params == 0 {
            return Err(fail("params must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.quality) {
            return Err(fail(format!("quality must be in [0, 1], got {}", self.quality)));
        }
        Ok(())
    }
}

impl UseCaseTarget {
    fn validate(&self) -> Result<(), RegistryError> {
        if !(self.quality_threshold > 0.0 && self.quality_threshold <= 1.0) {
            return Err(RegistryError::Invariant {
                kind: "target",
                id: self.use_case.clone(),
                violation: format!(
                    "quality_threshold must be in (0, 1], got {}",
                    self.quality_threshold
                ),
            });
        }
        Ok(())
    }
}

/// Planning estimate of a model's ROM footprint after 8-bit quantization:
/// one quarter of the float32 size, rounded up. Never overwrites the
/// measured `rom_bytes`.
pub fn estimate_quantized_rom(model: &ModelDescriptor) -> Result<u64, RegistryError> {
    if model.quantized {
        return Err(RegistryError::AlreadyQuantized(model.id.clone()));
    }
    Ok(model.rom_bytes.div_ceil(4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(id: &str) -> ModelDescriptor {
        ModelDescriptor {
            id: id.into(),
            use_case: "digit_recognition".into(),
            params: 140_000,
            flops: 850_000,
            ram_bytes: 24_000,
            rom_bytes: 560_000,
            quality: 0.97,
            quality_kind: QualityKind::Accuracy,
            quantized: false,
        }
    }

    fn minimal_doc() -> String {
        r#"{
            "processors": [
                {"id": "m4", "idle_current": 0.30, "supply_voltage": 3.3,
                 "ram_capacity": 262144, "rom_capacity": 1048576}
            ],
            "models": [
                {"id": "lenet5", "use_case": "digit_recognition", "params": 140000,
                 "flops": 850000, "ram_bytes": 24000, "rom_bytes": 560000,
                 "quality": 0.97, "quality_kind": "accuracy", "quantized": false}
            ],
            "targets": [
                {"use_case": "digit_recognition", "quality_threshold": 0.95,
                 "quality_kind": "accuracy"}
            ]
        }"#
        .to_string()
    }

    #[test]
    fn loads_m4_with_paper_idle_current() {
        let reg = Registry::from_json(&minimal_doc()).unwrap();
        let m4 = reg.processor("m4").unwrap();
        assert_eq!(m4.idle_current, 0.30);
        assert_eq!(m4.supply_voltage, 3.3);
    }

    #[test]
    fn bundled_fixture_pins_the_datasheet_idle_currents() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/registry.json");
        let reg = Registry::from_path(path).unwrap();
        for (id, idle) in [("m0plus", 4.20), ("m4", 0.30), ("m7", 1.60)] {
            let p = reg.processor(id).unwrap_or_else(|| panic!("missing {id}"));
            assert_eq!(p.idle_current, idle, "{id}");
            assert_eq!(p.supply_voltage, 3.3, "{id}");
        }
        // the unquantized wake-word model overflows every device
        let float = reg.model("mobilenetv1-vww-float").unwrap();
        assert_eq!(float.rom_bytes, 12_792_000);
        for p in &reg.processors {
            assert!(float.rom_bytes > p.rom_capacity, "{}", p.id);
        }
        // its 4:1 estimate fits the largest core
        assert_eq!(estimate_quantized_rom(float).unwrap(), 3_198_000);
        assert!(3_198_000 <= reg.processor("m7").unwrap().rom_capacity);
    }

    #[test]
    fn duplicate_model_id_rejected() {
        let doc = minimal_doc().replace(
            r#""models": ["#,
            r#""models": [
                {"id": "lenet5", "use_case": "digit_recognition", "params": 1,
                 "flops": 1, "ram_bytes": 1, "rom_bytes": 1, "quality": 0.5,
                 "quality_kind": "accuracy", "quantized": true},"#,
        );
        let err = Registry::from_json(&doc).unwrap_err();
        match err {
            RegistryError::DuplicateId { kind, id } => {
                assert_eq!(kind, "model");
                assert_eq!(id, "lenet5");
            }
            other => panic!("expected duplicate id, got {other}"),
        }
    }

    #[test]
    fn out_of_range_quality_rejected() {
        let doc = minimal_doc().replace("\"quality\": 0.97", "\"quality\": 1.2");
        let err = Registry::from_json(&doc).unwrap_err();
        assert!(matches!(err, RegistryError::Invariant { kind: "model", .. }), "{err}");
    }

    #[test]
    fn missing_field_rejected() {
        let doc = minimal_doc().replace("\"idle_current\": 0.30,", "");
        assert!(matches!(
            Registry::from_json(&doc).unwrap_err(),
            RegistryError::Parse(_)
        ));
    }

    #[test]
    fn registry_round_trips_structurally() {
        let reg = Registry::from_json(&minimal_doc()).unwrap();
        let reparsed = Registry::from_json(&reg.to_json()).unwrap();
        assert_eq!(reg, reparsed);
    }

    #[test]
    fn quantized_rom_estimate() {
        let mut m = model("vww");
        m.rom_bytes = 12_792_000; // 3198k float32 params
        assert_eq!(estimate_quantized_rom(&m).unwrap(), 3_198_000);
        m.rom_bytes = 4;
        assert_eq!(estimate_quantized_rom(&m).unwrap(), 1);
        m.rom_bytes = 5;
        assert_eq!(estimate_quantized_rom(&m).unwrap(), 2);
    }

    #[test]
    fn quantized_rom_estimate_rejects_already_quantized() {
        let mut m = model("q");
        m.quantized = true;
        assert!(matches!(
            estimate_quantized_rom(&m).unwrap_err(),
            RegistryError::AlreadyQuantized(_)
        ));
    }

    proptest! {
        #[test]
        fn quantized_estimate_bounds(rom in 1u64..u64::MAX / 2) {
            let mut m = model("x");
            m.rom_bytes = rom;
            let est = estimate_quantized_rom(&m).unwrap();
            // ceil(rom/4) lies in [rom/4, rom/4 + 1]
            prop_assert!(4 * est >= rom);
            prop_assert!(est <= rom / 4 + 1);
        }
    }
}
