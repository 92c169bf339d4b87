//! Named end-to-end checks producing machine-readable reports:
//! `"sufficiency"`, `"witness"` and `"validity"`.

use serde::Serialize;
use serde_json::{json, Value};

use crate::aggregated::aggregated_cut_unchecked;
use crate::counterexample::{certify_witness, EXHAUSTIVE_SEQUENCE_LIMIT};
use crate::error::{Error, Result};
use crate::hull::{self, SufficiencyOptions};
use crate::instance::MixingInstance;
use crate::mixing::{all_mixing_cuts, mix_star_cuts, reduce_lower_bounds};
use crate::sequence::for_each_sequence;

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub mode: String,
    pub passed: bool,
    pub details: Value,
}

pub trait Verifier: Send + Sync {
    fn name(&self) -> &str;
    fn verify(&self, inst: &MixingInstance) -> Result<VerificationReport>;
}

fn to_value(value: &impl Serialize) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::Internal(format!("report does not serialize: {e}")))
}

/// Works on the instance with lower bounds moved into `y`.
fn zero_lower(inst: &MixingInstance) -> MixingInstance {
    if inst.has_zero_lower() {
        inst.clone()
    } else {
        reduce_lower_bounds(inst).0
    }
}

/// Membership-checks sampled points of the claimed description, or certifies
/// the counterexample when the condition fails.
pub struct SufficiencyVerifier {
    pub options: SufficiencyOptions,
}

impl Verifier for SufficiencyVerifier {
    fn name(&self) -> &str {
        "sufficiency"
    }

    fn verify(&self, inst: &MixingInstance) -> Result<VerificationReport> {
        let report = hull::check_sufficiency(&zero_lower(inst), &self.options)?;
        Ok(VerificationReport { mode: self.name().into(), passed: report.passed, details: to_value(&report)? })
    }
}

/// Builds and certifies the counterexample; fails with a precondition error
/// when the condition holds.
pub struct WitnessVerifier;

impl Verifier for WitnessVerifier {
    fn name(&self) -> &str {
        "witness"
    }

    fn verify(&self, inst: &MixingInstance) -> Result<VerificationReport> {
        let report = certify_witness(&zero_lower(inst))?;
        Ok(VerificationReport { mode: self.name().into(), passed: report.passed(), details: to_value(&report)? })
    }
}

/// Checks generated mixing and aggregated inequalities against every extreme
/// point and ray of the hull.
pub struct ValidityVerifier {
    /// Longest sequence checked when `n` exceeds the exhaustive limit.
    pub max_len: usize,
}

impl Verifier for ValidityVerifier {
    fn name(&self) -> &str {
        "validity"
    }

    fn verify(&self, inst: &MixingInstance) -> Result<VerificationReport> {
        let inst = zero_lower(inst);
        let vrep = hull::v_representation(&inst)?;
        let exhaustive = inst.n() <= EXHAUSTIVE_SEQUENCE_LIMIT;
        let mixing = if exhaustive { all_mixing_cuts(&inst) } else { mix_star_cuts(&inst) };
        let mut failures = Vec::new();
        for cut in &mixing {
            if let Some(why) = vrep.first_violation(cut) {
                failures.push(json!({ "cut": cut.to_line(), "reason": why }));
            }
        }
        let ground: Vec<usize> = (0..inst.n()).collect();
        let max_len = if exhaustive { inst.n() } else { self.max_len.min(inst.n()) };
        let mut aggregated = 0u64;
        for_each_sequence(&ground, max_len, |theta| {
            aggregated += 1;
            let cut = aggregated_cut_unchecked(&inst, theta);
            if let Some(why) = vrep.first_violation(&cut) {
                failures.push(json!({ "cut": cut.to_line(), "reason": why }));
            }
        });
        Ok(VerificationReport {
            mode: self.name().into(),
            passed: failures.is_empty(),
            details: json!({
                "extreme_points": vrep.points.len(),
                "mixing_cuts": mixing.len(),
                "mixing_family": if exhaustive { "all" } else { "star" },
                "aggregated_cuts": aggregated,
                "max_sequence_length": max_len,
                "failures": failures,
            }),
        })
    }
}

pub struct VerifierRegistry {
    entries: Vec<Box<dyn Verifier>>,
}

impl Default for VerifierRegistry {
    fn default() -> Self {
        let mut registry = VerifierRegistry::empty();
        registry
            .register(Box::new(SufficiencyVerifier { options: SufficiencyOptions::default() }))
            .expect("fresh registry");
        registry.register(Box::new(WitnessVerifier)).expect("fresh registry");
        registry.register(Box::new(ValidityVerifier { max_len: 3 })).expect("fresh registry");
        registry
    }
}

impl VerifierRegistry {
    pub fn empty() -> Self {
        VerifierRegistry { entries: Vec::new() }
    }

    pub fn register(&mut self, verifier: Box<dyn Verifier>) -> Result<()> {
        if self.entries.iter().any(|v| v.name() == verifier.name()) {
            return Err(Error::Validation(format!("verifier {:?} is already registered", verifier.name())));
        }
        self.entries.push(verifier);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&dyn Verifier> {
        self.entries
            .iter()
            .find(|v| v.name() == name)
            .map(|v| v.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|v| v.name()).collect()
    }

    pub fn run(&self, name: &str, inst: &MixingInstance) -> Result<VerificationReport> {
        self.get(name)?.verify(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::r;

    fn ex1() -> MixingInstance {
        MixingInstance::from_integers(&[&[8, 3], &[6, 4], &[13, 2], &[1, 2], &[4, 1]], 7).unwrap()
    }

    #[test]
    fn registry_modes() {
        let registry = VerifierRegistry::default();
        assert_eq!(registry.names(), vec!["sufficiency", "witness", "validity"]);
        assert!(matches!(registry.run("nope", &ex1()), Err(Error::UnknownStrategy(_))));
        assert!(registry.run("validity", &ex1()).unwrap().passed);
        assert!(registry.run("sufficiency", &ex1()).unwrap().passed);
        assert!(matches!(registry.run("witness", &ex1()), Err(Error::Precondition(_))));
        let ex2 = ex1().with_epsilon(r(9)).unwrap();
        let report = registry.run("witness", &ex2).unwrap();
        assert!(report.passed);
        assert_eq!(report.details["point"]["z"], json!(["1", "1/2", "1/2", "1", "1"]));
    }
}
