//! Energy versus quality Pareto fronts and the model selection flow.
//!
//! Selection runs in stages: gate each (processor, model) pair on RAM and ROM
//! capacity, price the survivors with measured metrics or the latency
//! calibration, evaluate cycle energy at the requested cycle time, drop
//! models below the quality threshold, and keep the non-dominated rest.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycle::{cycle_energy, CycleError, CycleParams};
use crate::registry::{ModelDescriptor, ProcessorProfile, Registry};
use crate::regression::predict_latency;
use crate::segment::PhaseMetrics;

/// Measured metrics per (processor_id, model_id) pair.
pub type MeasuredMap = BTreeMap<(String, String), PhaseMetrics>;

#[derive(Debug, Error)]
pub enum ParetoError {
    #[error("entries mix cycle times {a} s and {b} s")]
    MixedCycleTimes { a: f64, b: f64 },
    #[error("infeasible entry `{processor_id}/{model_id}` passed to pareto_front")]
    InfeasibleEntry { processor_id: String, model_id: String },
    #[error("invalid entry `{processor_id}/{model_id}`: {what}")]
    InvalidEntry { processor_id: String, model_id: String, what: String },
    #[error("no candidates left at cycle time {cycle_time} s; {} pairs excluded", .excluded.len())]
    EmptyCandidateSet { cycle_time: f64, excluded: Vec<Exclusion> },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// One candidate evaluated at a fixed cycle time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoEntry {
    pub processor_id: String,
    pub model_id: String,
    pub cycle_time: f64,
    /// Energy per inference cycle, mJ.
    pub cycle_energy: f64,
    /// Model quality score in [0, 1].
    pub quality: f64,
    pub on_front: bool,
    pub feasible: bool,
    pub infeasibility_reason: Option<String>,
}

/// Why a (processor, model) pair dropped out before front computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub processor_id: String,
    pub model_id: String,
    pub reason: String,
}

/// Where cycle-energy inputs come from when ranking candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySource {
    /// Measured metrics when present for the pair, prediction otherwise.
    #[default]
    Auto,
    /// Always predict from the processor calibration.
    Predicted,
    /// Only use measured metrics; pairs without them are excluded.
    Measured,
}

/// Ranked selection result at one cycle time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub cycle_time: f64,
    pub quality_threshold: f64,
    pub source: EnergySource,
    /// Non-dominated candidates, cheapest first.
    pub front: Vec<ParetoEntry>,
    /// Feasible candidates that lost to a front member.
    pub dominated: Vec<ParetoEntry>,
    pub excluded: Vec<Exclusion>,
}

impl Recommendation {
    /// The cheapest front entry, i.e. the headline pick.
    pub fn top(&self) -> Option<&ParetoEntry> {
        self.front.first()
    }
}

/// Checks whether a model fits the processor's RAM and ROM, inclusive bounds.
pub fn feasibility_gate(
    model: &ModelDescriptor,
    profile: &ProcessorProfile,
) -> (bool, Option<String>) {
    let mut reasons = Vec::new();
    if model.ram_bytes > profile.ram_capacity {
        reasons.push(format!(
            "ram: model needs {} B, processor has {} B",
            model.ram_bytes, profile.ram_capacity
        ));
    }
    if model.rom_bytes > profile.rom_capacity {
        reasons.push(format!(
            "rom: model needs {} B, processor has {} B",
            model.rom_bytes, profile.rom_capacity
        ));
    }
    if reasons.is_empty() {
        (true, None)
    } else {
        (false, Some(reasons.join("; ")))
    }
}

/// True when `a` is at least as good on both axes and better on one.
pub fn dominates(a: &ParetoEntry, b: &ParetoEntry) -> bool {
    a.cycle_energy <= b.cycle_energy
        && a.quality >= b.quality
        && (a.cycle_energy < b.cycle_energy || a.quality > b.quality)
}

/// Non-dominated entries sorted by ascending energy, `on_front` set.
///
/// Exact (energy, quality) duplicates collapse to the entry with the
/// lexicographically smallest (processor_id, model_id).
pub fn pareto_front(entries: &[ParetoEntry]) -> Result<Vec<ParetoEntry>, ParetoError> {
    for e in entries {
        if !e.feasible {
            return Err(ParetoError::InfeasibleEntry {
                processor_id: e.processor_id.clone(),
                model_id: e.model_id.clone(),
            });
        }
        let what = if !e.cycle_energy.is_finite() {
            Some(format!("cycle_energy {} is not finite", e.cycle_energy))
        } else if !(0.0..=1.0).contains(&e.quality) {
            Some(format!("quality {} outside [0, 1]", e.quality))
        } else {
            None
        };
        if let Some(what) = what {
            return Err(ParetoError::InvalidEntry {
                processor_id: e.processor_id.clone(),
                model_id: e.model_id.clone(),
                what,
            });
        }
        if e.cycle_time != entries[0].cycle_time {
            return Err(ParetoError::MixedCycleTimes {
                a: entries[0].cycle_time,
                b: e.cycle_time,
            });
        }
    }

    // Sorted by energy, best quality first within a tie, ids last so exact
    // duplicates resolve deterministically. A single scan then keeps every
    // entry that strictly improves quality.
    let mut order: Vec<&ParetoEntry> = entries.iter().collect();
    order.sort_by(|a, b| {
        a.cycle_energy
            .total_cmp(&b.cycle_energy)
            .then(b.quality.total_cmp(&a.quality))
            .then_with(|| (&a.processor_id, &a.model_id).cmp(&(&b.processor_id, &b.model_id)))
    });

    let mut front = Vec::new();
    let mut best_quality = f64::NEG_INFINITY;
    for e in order {
        if e.quality > best_quality {
            best_quality = e.quality;
            front.push(ParetoEntry { on_front: true, ..e.clone() });
        }
    }
    Ok(front)
}

fn cycle_params_for(
    profile: &ProcessorProfile,
    model: &ModelDescriptor,
    measured: Option<&PhaseMetrics>,
    source: EnergySource,
) -> Result<CycleParams, String> {
    let predicted = || -> Result<CycleParams, String> {
        let cal = profile
            .calibration
            .as_ref()
            .ok_or_else(|| format!("processor `{}` has no calibration", profile.id))?;
        let t = predict_latency(cal, model.flops).map_err(|e| e.to_string())?;
        if t.seconds == 0.0 {
            return Err("predicted latency clamped to 0 s".to_string());
        }
        Ok(CycleParams::from_profile(profile, t.seconds, cal.active_current))
    };
    match (source, measured) {
        (EnergySource::Measured, None) => Err("no measured metrics for this pair".to_string()),
        (EnergySource::Measured | EnergySource::Auto, Some(m)) => {
            Ok(CycleParams::from_measured(profile, m))
        }
        (EnergySource::Predicted, _) | (EnergySource::Auto, None) => predicted(),
    }
}

/// Full selection flow over every (processor, model) pair in the registry.
///
/// Errors only when nothing survives gating; individual pairs drop out with
/// recorded reasons instead.
pub fn recommend(
    registry: &Registry,
    measured: &MeasuredMap,
    cycle_time: f64,
    quality_threshold: f64,
    source: EnergySource,
) -> Result<Recommendation, ParetoError> {
    if !(cycle_time > 0.0 && cycle_time.is_finite()) {
        return Err(ParetoError::InvalidRequest(format!(
            "cycle_time must be > 0 and finite, got {cycle_time}"
        )));
    }
    if !(0.0..=1.0).contains(&quality_threshold) {
        return Err(ParetoError::InvalidRequest(format!(
            "quality_threshold must be in [0, 1], got {quality_threshold}"
        )));
    }

    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    for profile in &registry.processors {
        for model in &registry.models {
            let mut exclude = |reason: String| {
                excluded.push(Exclusion {
                    processor_id: profile.id.clone(),
                    model_id: model.id.clone(),
                    reason,
                });
            };
            let (feasible, reason) = feasibility_gate(model, profile);
            if !feasible {
                exclude(reason.unwrap_or_default());
                continue;
            }
            if model.quality < quality_threshold {
                exclude(format!(
                    "quality {} below threshold {}",
                    model.quality, quality_threshold
                ));
                continue;
            }
            let key = (profile.id.clone(), model.id.clone());
            let params = match cycle_params_for(profile, model, measured.get(&key), source) {
                Ok(p) => p,
                Err(reason) => {
                    exclude(reason);
                    continue;
                }
            };
            match cycle_energy(&params, cycle_time) {
                Ok(point) => entries.push(ParetoEntry {
                    processor_id: profile.id.clone(),
                    model_id: model.id.clone(),
                    cycle_time,
                    cycle_energy: point.cycle_energy,
                    quality: model.quality,
                    on_front: false,
                    feasible: true,
                    infeasibility_reason: None,
                }),
                Err(e @ (CycleError::InfeasibleDutyCycle { .. } | CycleError::InvalidParams(_))) => {
                    exclude(e.to_string())
                }
                Err(e) => exclude(e.to_string()),
            }
        }
    }

    excluded.sort_by(|a, b| {
        (&a.processor_id, &a.model_id).cmp(&(&b.processor_id, &b.model_id))
    });
    if entries.is_empty() {
        return Err(ParetoError::EmptyCandidateSet { cycle_time, excluded });
    }

    let front = pareto_front(&entries)?;
    let on_front: Vec<(String, String)> = front
        .iter()
        .map(|e| (e.processor_id.clone(), e.model_id.clone()))
        .collect();
    let mut dominated: Vec<ParetoEntry> = entries
        .into_iter()
        .filter(|e| !on_front.contains(&(e.processor_id.clone(), e.model_id.clone())))
        .collect();
    dominated.sort_by(|a, b| {
        a.cycle_energy
            .total_cmp(&b.cycle_energy)
            .then_with(|| (&a.processor_id, &a.model_id).cmp(&(&b.processor_id, &b.model_id)))
    });

    Ok(Recommendation {
        cycle_time,
        quality_threshold,
        source,
        front,
        dominated,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{Calibration, QualityKind};
    use proptest::prelude::*;

    fn entry(processor: &str, model: &str, energy: f64, quality: f64) -> ParetoEntry {
        ParetoEntry {
            processor_id: processor.to_string(),
            model_id: model.to_string(),
            cycle_time: 1.0,
            cycle_energy: energy,
            quality,
            on_front: false,
            feasible: true,
            infeasibility_reason: None,
        }
    }

    fn profile(id: &str, idle: f64, ram: u64, rom: u64) -> ProcessorProfile {
        ProcessorProfile {
            id: id.to_string(),
            idle_current: idle,
            supply_voltage: 3.3,
            ram_capacity: ram,
            rom_capacity: rom,
            calibration: None,
        }
    }

    fn model(id: &str, flops: u64, ram: u64, rom: u64, quality: f64) -> ModelDescriptor {
        ModelDescriptor {
            id: id.to_string(),
            use_case: "uc".to_string(),
            params: 1000,
            flops,
            ram_bytes: ram,
            rom_bytes: rom,
            quality,
            quality_kind: QualityKind::Accuracy,
            quantized: true,
        }
    }

    fn cal(slope: f64, intercept: f64) -> Calibration {
        Calibration {
            latency_slope: slope,
            latency_intercept: intercept,
            r_squared: 1.0,
            active_current: 10.0,
            n_points: 4,
        }
    }

    /// Two-processor registry tuned so the cheapest pick flips between short
    /// and long cycle times.
    fn flip_registry() -> Registry {
        let mut m7 = profile("m7", 1.60, 512 * 1024, 2 * 1024 * 1024);
        m7.calibration = Some(cal(1e-8, 0.01));
        let mut m4 = profile("m4", 0.30, 256 * 1024, 1024 * 1024);
        m4.calibration = Some(cal(2e-8, 0.02));
        Registry {
            processors: vec![m7, m4],
            models: vec![
                model("n1", 5_000_000, 10_000, 20_000, 0.80),
                model("n2", 10_000_000, 20_000, 40_000, 0.84),
                model("n3", 20_000_000, 40_000, 80_000, 0.90),
            ],
            targets: Vec::new(),
        }
    }

    #[test]
    fn gate_names_violated_resources() {
        let p = profile("p", 0.3, 64_000, 64_000);
        let (ok, reason) = feasibility_gate(&model("m", 1, 10_000, 120_000, 0.9), &p);
        assert!(!ok);
        assert!(reason.as_deref().unwrap().contains("rom"));
        let (ok, reason) = feasibility_gate(&model("m", 1, 64_000, 64_000, 0.9), &p);
        assert!(ok && reason.is_none());
        let (ok, reason) = feasibility_gate(&model("m", 1, 65_000, 65_000, 0.9), &p);
        assert!(!ok);
        let text = reason.unwrap();
        assert!(text.contains("ram") && text.contains("rom"));
    }

    #[test]
    fn worked_front_example() {
        let entries = vec![
            entry("p", "a", 1.0, 0.90),
            entry("p", "b", 2.0, 0.80),
            entry("p", "c", 3.0, 0.95),
        ];
        let front = pareto_front(&entries).unwrap();
        let ids: Vec<&str> = front.iter().map(|e| e.model_id.as_str()).collect();
        assert_eq!(ids, ["a", "c"]);
        assert!(front.iter().all(|e| e.on_front));
    }

    #[test]
    fn singleton_and_duplicates() {
        let one = pareto_front(&[entry("p", "a", 1.0, 0.5)]).unwrap();
        assert_eq!(one.len(), 1);
        let dup = pareto_front(&[
            entry("p2", "a", 1.0, 0.5),
            entry("p1", "z", 1.0, 0.5),
            entry("p1", "b", 1.0, 0.5),
        ])
        .unwrap();
        assert_eq!(dup.len(), 1);
        assert_eq!((dup[0].processor_id.as_str(), dup[0].model_id.as_str()), ("p1", "b"));
    }

    #[test]
    fn contract_violations_rejected() {
        let mut mixed = vec![entry("p", "a", 1.0, 0.5), entry("p", "b", 2.0, 0.6)];
        mixed[1].cycle_time = 2.0;
        assert!(matches!(
            pareto_front(&mixed).unwrap_err(),
            ParetoError::MixedCycleTimes { .. }
        ));
        let mut infeasible = vec![entry("p", "a", 1.0, 0.5)];
        infeasible[0].feasible = false;
        assert!(matches!(
            pareto_front(&infeasible).unwrap_err(),
            ParetoError::InfeasibleEntry { .. }
        ));
        let bad_quality = vec![entry("p", "a", 1.0, 1.5)];
        assert!(matches!(
            pareto_front(&bad_quality).unwrap_err(),
            ParetoError::InvalidEntry { .. }
        ));
    }

    #[test]
    fn recommendation_flips_with_cycle_time() {
        let reg = flip_registry();
        let short = recommend(&reg, &MeasuredMap::new(), 0.5, 0.0, EnergySource::Predicted)
            .unwrap();
        let long = recommend(&reg, &MeasuredMap::new(), 5.0, 0.0, EnergySource::Predicted)
            .unwrap();
        assert_eq!(short.top().unwrap().processor_id, "m7");
        assert_eq!(long.top().unwrap().processor_id, "m4");
    }

    #[test]
    fn quality_threshold_filters_candidates() {
        let reg = flip_registry();
        let rec = recommend(&reg, &MeasuredMap::new(), 1.0, 0.85, EnergySource::Predicted)
            .unwrap();
        assert!(rec.front.iter().chain(&rec.dominated).all(|e| e.quality >= 0.85));
        assert!(rec.excluded.iter().any(|x| x.reason.contains("below threshold")));
        // threshold 1.0 excludes everything
        let err = recommend(&reg, &MeasuredMap::new(), 1.0, 1.0, EnergySource::Predicted)
            .unwrap_err();
        match err {
            ParetoError::EmptyCandidateSet { excluded, .. } => assert_eq!(excluded.len(), 6),
            other => panic!("expected EmptyCandidateSet, got {other}"),
        }
    }

    #[test]
    fn uncalibrated_processor_is_excluded_with_reason() {
        let mut reg = flip_registry();
        reg.processors[1].calibration = None;
        let rec = recommend(&reg, &MeasuredMap::new(), 1.0, 0.0, EnergySource::Predicted)
            .unwrap();
        assert!(rec.front.iter().chain(&rec.dominated).all(|e| e.processor_id == "m7"));
        assert!(rec
            .excluded
            .iter()
            .any(|x| x.processor_id == "m4" && x.reason.contains("no calibration")));
    }

    #[test]
    fn measured_metrics_take_priority_in_auto() {
        let reg = flip_registry();
        let mut measured = MeasuredMap::new();
        let metrics = PhaseMetrics {
            windows: Vec::new(),
            idle_spans: Vec::new(),
            inferences_per_window: 10,
            inference_time: 0.2,
            inference_energy: 3.3 * 12.0 * 0.2,
            active_current: 12.0,
            idle_current: Some(1.5),
            total_duration: 2.0,
            supply_voltage: 3.3,
            warnings: Vec::new(),
        };
        measured.insert(("m7".to_string(), "n1".to_string()), metrics);
        let rec = recommend(&reg, &measured, 1.0, 0.0, EnergySource::Auto).unwrap();
        let e = rec
            .front
            .iter()
            .chain(&rec.dominated)
            .find(|e| e.processor_id == "m7" && e.model_id == "n1")
            .unwrap();
        let want = 3.3 * (12.0 * 0.2 + 1.5 * 0.8);
        assert!((e.cycle_energy - want).abs() < 1e-12, "{}", e.cycle_energy);
        // measured-only mode drops every pair without metrics
        let rec = recommend(&reg, &measured, 1.0, 0.0, EnergySource::Measured).unwrap();
        assert_eq!(rec.front.len() + rec.dominated.len(), 1);
        assert_eq!(rec.excluded.len(), 5);
    }

    #[test]
    fn infeasible_duty_cycle_excludes_pair() {
        let reg = flip_registry();
        // m4 on n3: t_inf = 2e-8 * 2e7 + 0.02 = 0.42 s > 0.4 s cycle
        let rec = recommend(&reg, &MeasuredMap::new(), 0.4, 0.0, EnergySource::Predicted)
            .unwrap();
        assert!(rec
            .excluded
            .iter()
            .any(|x| x.processor_id == "m4" && x.model_id == "n3"
                && x.reason.contains("shorter than inference time")));
    }

    #[test]
    fn recommend_invariant_under_registry_permutation() {
        let reg = flip_registry();
        let mut permuted = reg.clone();
        permuted.processors.reverse();
        permuted.models.reverse();
        let a = recommend(&reg, &MeasuredMap::new(), 1.0, 0.0, EnergySource::Predicted).unwrap();
        let b =
            recommend(&permuted, &MeasuredMap::new(), 1.0, 0.0, EnergySource::Predicted).unwrap();
        assert_eq!(a, b);
    }

    /// O(n^2) oracle: non-dominated set, exact-duplicate collapse, energy order.
    fn brute_force_front(entries: &[ParetoEntry]) -> Vec<ParetoEntry> {
        let mut nd: Vec<ParetoEntry> = entries
            .iter()
            .filter(|e| !entries.iter().any(|f| dominates(f, e)))
            .cloned()
            .collect();
        nd.sort_by(|a, b| {
            (&a.processor_id, &a.model_id).cmp(&(&b.processor_id, &b.model_id))
        });
        let mut kept: Vec<ParetoEntry> = Vec::new();
        for e in nd {
            if !kept
                .iter()
                .any(|k| k.cycle_energy == e.cycle_energy && k.quality == e.quality)
            {
                kept.push(e);
            }
        }
        kept.sort_by(|a, b| a.cycle_energy.total_cmp(&b.cycle_energy));
        kept.into_iter().map(|e| ParetoEntry { on_front: true, ..e }).collect()
    }

    fn arb_entries() -> impl Strategy<Value = Vec<ParetoEntry>> {
        proptest::collection::vec((0u8..24, 0u8..12, 0u8..8, 0u8..8), 1..60).prop_map(|raw| {
            raw.into_iter()
                .map(|(e, q, p, m)| {
                    entry(&format!("p{p}"), &format!("m{m}"), e as f64 * 0.25, q as f64 / 12.0)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn front_matches_brute_force(entries in arb_entries()) {
            let fast = pareto_front(&entries).unwrap();
            let slow = brute_force_front(&entries);
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn front_quality_strictly_increases(entries in arb_entries()) {
            let front = pareto_front(&entries).unwrap();
            for pair in front.windows(2) {
                prop_assert!(pair[0].cycle_energy < pair[1].cycle_energy);
                prop_assert!(pair[0].quality < pair[1].quality);
            }
        }

        #[test]
        fn adding_entries_only_removes_dominated(entries in arb_entries(), extra in arb_entries()) {
            prop_assume!(!extra.is_empty());
            let e = &extra[0];
            let before = pareto_front(&entries).unwrap();
            let mut grown = entries.clone();
            grown.push(e.clone());
            let after = pareto_front(&grown).unwrap();
            for old in &before {
                let displaced = dominates(e, old)
                    || (e.cycle_energy == old.cycle_energy && e.quality == old.quality);
                if !displaced {
                    prop_assert!(
                        after.iter().any(|n| n.processor_id == old.processor_id
                            && n.model_id == old.model_id
                            && n.cycle_energy == old.cycle_energy
                            && n.quality == old.quality),
                        "lost {:?}", old
                    );
                }
            }
        }
    }
}
