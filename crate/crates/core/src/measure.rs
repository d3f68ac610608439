//! Nonnegative measures supported on finitely many graph nodes.

use crate::error::{Result, UstError};
use crate::graph::NodeId;

/// Node-supported measure in canonical form: node ids strictly increasing,
/// masses strictly positive.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteMeasure {
    entries: Vec<(NodeId, f64)>,
    total_mass: f64,
}

impl DiscreteMeasure {
    /// Canonicalizes `entries`: duplicates are merged by summation and zero masses dropped.
    pub fn new(entries: impl IntoIterator<Item = (NodeId, f64)>) -> Result<Self> {
        let mut raw: Vec<(NodeId, f64)> = entries.into_iter().collect();
        if let Some(&(node, mass)) = raw.iter().find(|(_, m)| !(*m >= 0.0) || !m.is_finite()) {
            return Err(UstError::NegativeMass { node, mass });
        }
        raw.sort_by_key(|&(n, _)| n);
        let mut merged: Vec<(NodeId, f64)> = Vec::with_capacity(raw.len());
        for (node, mass) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == node => last.1 += mass,
                _ => merged.push((node, mass)),
            }
        }
        merged.retain(|&(_, m)| m > 0.0);
        Ok(Self::from_canonical(merged))
    }

    fn from_canonical(entries: Vec<(NodeId, f64)>) -> Self {
        let total_mass = entries.iter().map(|&(_, m)| m).sum();
        DiscreteMeasure { entries, total_mass }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Unit mass at `node`.
    pub fn dirac(node: NodeId) -> Self {
        Self::from_canonical(vec![(node, 1.0)])
    }

    #[inline]
    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    #[inline]
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    #[inline]
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Mass at a single node.
    pub fn mass_at(&self, node: NodeId) -> f64 {
        self.entries
            .binary_search_by_key(&node, |&(n, _)| n)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// Pointwise sum.
    pub fn add(&self, other: &DiscreteMeasure) -> DiscreteMeasure {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self::from_canonical(out)
    }

    /// All masses multiplied by `c`.
    pub fn scale(&self, c: f64) -> Result<DiscreteMeasure> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(UstError::NegativeScale(c));
        }
        let entries = self
            .entries
            .iter()
            .map(|&(n, m)| (n, m * c))
            .filter(|&(_, m)| m > 0.0)
            .collect();
        Ok(Self::from_canonical(entries))
    }

    /// Fails if any support node is outside `0..node_count`.
    pub fn check_support(&self, node_count: usize) -> Result<()> {
        match self.entries.last() {
            Some(&(node, _)) if node >= node_count => Err(UstError::SupportOffGraph { node, node_count }),
            _ => Ok(()),
        }
    }

    /// Keeps the `k` heaviest support points (ties by node id).
    pub fn truncate_support(&self, k: usize) -> DiscreteMeasure {
        let mut idx: Vec<usize> = (0..self.entries.len()).collect();
        idx.sort_by(|&x, &y| {
            self.entries[y]
                .1
                .total_cmp(&self.entries[x].1)
                .then(self.entries[x].0.cmp(&self.entries[y].0))
        });
        idx.truncate(k);
        idx.sort_unstable();
        Self::from_canonical(idx.into_iter().map(|i| self.entries[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dirac_and_canonical_form() {
        let d = DiscreteMeasure::new([(1, 1.0)]).unwrap();
        assert_eq!(d, DiscreteMeasure::dirac(1));
        assert_eq!(d.total_mass(), 1.0);

        let m = DiscreteMeasure::new([(1, 0.5), (1, 0.5), (2, 0.0)]).unwrap();
        assert_eq!(m.entries(), &[(1, 1.0)]);
        assert_eq!(m.total_mass(), 1.0);

        assert!(matches!(
            DiscreteMeasure::new([(0, -0.1)]),
            Err(UstError::NegativeMass { node: 0, .. })
        ));
        assert!(DiscreteMeasure::new([(0, f64::NAN)]).is_err());
    }

    #[test]
    fn add_and_scale() {
        let s = DiscreteMeasure::dirac(1).add(&DiscreteMeasure::dirac(2));
        assert_eq!(s.entries(), &[(1, 1.0), (2, 1.0)]);
        assert_eq!(s.total_mass(), 2.0);

        let mu = DiscreteMeasure::new([(0, 0.25), (3, 2.0)]).unwrap();
        assert_eq!(mu.add(&DiscreteMeasure::zero()), mu);
        assert_eq!(mu.scale(1.0).unwrap(), mu);
        assert!(mu.scale(0.0).unwrap().is_zero());
        assert_eq!(DiscreteMeasure::dirac(1).scale(2.0).unwrap().entries(), &[(1, 2.0)]);
        assert!(matches!(mu.scale(-1.0), Err(UstError::NegativeScale(_))));

        let mid = DiscreteMeasure::dirac(1)
            .scale(0.5)
            .unwrap()
            .add(&DiscreteMeasure::dirac(2).scale(0.5).unwrap());
        assert_eq!(mid.entries(), &[(1, 0.5), (2, 0.5)]);
    }

    #[test]
    fn support_checks() {
        let mu = DiscreteMeasure::new([(0, 1.0), (4, 1.0)]).unwrap();
        assert!(mu.check_support(5).is_ok());
        assert!(matches!(
            mu.check_support(4),
            Err(UstError::SupportOffGraph { node: 4, .. })
        ));
        assert_eq!(mu.mass_at(4), 1.0);
        assert_eq!(mu.mass_at(2), 0.0);
        let t = DiscreteMeasure::new([(0, 1.0), (1, 3.0), (2, 2.0)])
            .unwrap()
            .truncate_support(2);
        assert_eq!(t.entries(), &[(1, 3.0), (2, 2.0)]);
    }

    fn arb_entries() -> impl Strategy<Value = Vec<(NodeId, f64)>> {
        prop::collection::vec((0usize..20, 0.0f64..5.0), 0..12)
    }

    proptest! {
        #[test]
        fn new_is_idempotent(entries in arb_entries()) {
            let m = DiscreteMeasure::new(entries).unwrap();
            let again = DiscreteMeasure::new(m.entries().iter().copied()).unwrap();
            prop_assert_eq!(&again, &m);
            prop_assert!(m.entries().windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(m.entries().iter().all(|&(_, x)| x > 0.0));
        }

        #[test]
        fn add_preserves_total_mass(a in arb_entries(), b in arb_entries()) {
            let a = DiscreteMeasure::new(a).unwrap();
            let b = DiscreteMeasure::new(b).unwrap();
            let s = a.add(&b);
            let expected = a.total_mass() + b.total_mass();
            let ulps = (s.support_len() + 1) as f64 * f64::EPSILON * expected.max(1.0);
            prop_assert!((s.total_mass() - expected).abs() <= ulps);
        }
    }
}
