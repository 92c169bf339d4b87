//! Named cut separators behind a common trait, so callers pick families by
//! name (`"mix"`, `"amix"`) and new families can be plugged in.

use crate::aggregated::separate_aggregated;
use crate::cut::{dedup_canonical, LinearCut, Point};
use crate::error::{Error, Result};
use crate::instance::MixingInstance;
use crate::mixing::{reduce_lower_bounds, separate_mixing, unshift_cut};
use crate::rational::Rational;

pub trait Separator: Send + Sync {
    fn name(&self) -> &str;
    fn description(&self) -> &str;
    /// Violated inequalities of the family at `point` (original coordinates).
    fn separate(&self, inst: &MixingInstance, point: &Point) -> Result<Vec<LinearCut>>;
}

/// Runs `separate` on the instance with lower bounds moved into `y`, then
/// maps the cuts back.
fn on_reduced(
    inst: &MixingInstance,
    point: &Point,
    separate: impl Fn(&MixingInstance, &Point) -> Result<Vec<LinearCut>>,
) -> Result<Vec<LinearCut>> {
    point.check_dimensions(inst.k(), inst.n())?;
    if inst.has_zero_lower() {
        return separate(inst, point);
    }
    let (reduced, shift) = reduce_lower_bounds(inst);
    let y = point.y.iter().zip(&shift).map(|(y, l)| y - l).collect();
    let shifted = Point::new(y, point.z.clone());
    Ok(separate(&reduced, &shifted)?.iter().map(|c| unshift_cut(c, &shift)).collect())
}

/// One most violated mixing inequality per column.
pub struct MixSeparator;

impl Separator for MixSeparator {
    fn name(&self) -> &str {
        "mix"
    }

    fn description(&self) -> &str {
        "mixing inequalities, one per column"
    }

    fn separate(&self, inst: &MixingInstance, point: &Point) -> Result<Vec<LinearCut>> {
        on_reduced(inst, point, separate_mixing)
    }
}

/// The most violated aggregated mixing inequality.
pub struct AggregatedSeparator;

impl Separator for AggregatedSeparator {
    fn name(&self) -> &str {
        "amix"
    }

    fn description(&self) -> &str {
        "aggregated mixing inequalities"
    }

    fn separate(&self, inst: &MixingInstance, point: &Point) -> Result<Vec<LinearCut>> {
        on_reduced(inst, point, |inst, point| Ok(separate_aggregated(inst, point)?.into_iter().collect()))
    }
}

pub struct SeparatorRegistry {
    entries: Vec<Box<dyn Separator>>,
}

impl Default for SeparatorRegistry {
    fn default() -> Self {
        let mut registry = SeparatorRegistry::empty();
        registry.register(Box::new(MixSeparator)).expect("fresh registry");
        registry.register(Box::new(AggregatedSeparator)).expect("fresh registry");
        registry
    }
}

impl SeparatorRegistry {
    pub fn empty() -> Self {
        SeparatorRegistry { entries: Vec::new() }
    }

    pub fn register(&mut self, separator: Box<dyn Separator>) -> Result<()> {
        if self.entries.iter().any(|s| s.name() == separator.name()) {
            return Err(Error::Validation(format!("separator {:?} is already registered", separator.name())));
        }
        self.entries.push(separator);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&dyn Separator> {
        self.entries
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|s| s.name()).collect()
    }

    /// Canonical, deduplicated violated cuts of the named families, most
    /// violated first (violation measured after canonical scaling), ties
    /// broken by coefficients.
    pub fn separate(&self, names: &[&str], inst: &MixingInstance, point: &Point) -> Result<Vec<LinearCut>> {
        let mut cuts = Vec::new();
        for name in names {
            cuts.extend(self.get(name)?.separate(inst, point)?);
        }
        let mut ranked: Vec<(Rational, LinearCut)> =
            dedup_canonical(cuts)?.into_iter().map(|c| (c.violation(point), c)).collect();
        ranked.retain(|(v, _)| v.is_positive());
        ranked.sort_by(|(va, a), (vb, b)| vb.cmp(va).then_with(|| a.key().cmp(&b.key())));
        Ok(ranked.into_iter().map(|(_, c)| c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, r};

    fn ex1() -> MixingInstance {
        MixingInstance::from_integers(&[&[8, 3], &[6, 4], &[13, 2], &[1, 2], &[4, 1]], 7).unwrap()
    }

    #[test]
    fn builtins_and_lookup() {
        let registry = SeparatorRegistry::default();
        assert_eq!(registry.names(), vec!["mix", "amix"]);
        assert!(matches!(registry.get("lifted"), Err(Error::UnknownStrategy(_))));
        let mut registry = registry;
        assert!(registry.register(Box::new(MixSeparator)).is_err());
    }

    #[test]
    fn separates_demo_point() {
        let registry = SeparatorRegistry::default();
        let point = Point::new(vec![r(10), r(4)], vec![r(0), r(0), q(1, 2), r(1), r(1)]);
        let cuts = registry.separate(&["mix", "amix"], &ex1(), &point).unwrap();
        let lines: Vec<String> = cuts.iter().map(LinearCut::to_line).collect();
        assert!(lines.contains(&"1 1 | 4 1 5 0 0 | >= 17 | AMix*".to_string()), "{lines:?}");
        let violations: Vec<Rational> = cuts.iter().map(|c| c.violation(&point)).collect();
        assert!(violations.windows(2).all(|w| w[0] >= w[1]));
        let vertex = Point::new(vec![r(13), r(4)], vec![r(1), r(0), r(0), r(1), r(1)]);
        assert!(registry.separate(&["mix", "amix"], &ex1(), &vertex).unwrap().is_empty());
    }

    #[test]
    fn lower_bounds_are_unshifted() {
        let inst = MixingInstance::new(
            vec![vec![r(8), r(3)], vec![r(6), r(4)], vec![r(13), r(2)]],
            vec![r(2), r(1)],
            r(5),
            None,
        )
        .unwrap();
        let point = Point::new(vec![r(5), r(3)], vec![q(1, 2), q(1, 2), q(1, 2)]);
        let cuts = SeparatorRegistry::default().separate(&["mix", "amix"], &inst, &point).unwrap();
        assert!(!cuts.is_empty());
        for cut in &cuts {
            assert!(cut.violation(&point).is_positive());
            // Valid at a feasible integer point with every scenario enforced.
            let feasible = Point::new(vec![r(13), r(4)], vec![r(0), r(0), r(0)]);
            assert!(cut.is_satisfied_by(&feasible), "{cut}");
        }
    }
}
