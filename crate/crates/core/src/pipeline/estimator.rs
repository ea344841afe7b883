//! Fast 2-D estimators: the plug-in contract and the bond-increment
//! default.

use crate::elements::bond_order_increment;
use crate::molgraph::MolGraph;

/// Cheap graph-level triage: a stability verdict and a reaction-energy
/// estimate, both pure functions of the 2-D graphs. Learned models plug in
/// behind this contract; the shipped default is additive over bond-order
/// increments.
pub trait FastEstimator: Send + Sync {
    fn stable(&self, g: &MolGraph) -> bool;

    /// Estimated reaction energy in kcal/mol for a product sharing the
    /// reactant's atom indexing. Positive is uphill.
    fn delta_e(&self, reactant: &MolGraph, product: &MolGraph) -> f64;
}

/// Additive bond-increment estimator: the reaction energy is the energy of
/// bonds broken minus bonds formed, summed per order level from the
/// embedded table. Stability rejects three-membered rings that contain a
/// multiply-bonded atom.
#[derive(Debug, Clone, Copy, Default)]
pub struct BondIncrementEstimator;

impl FastEstimator for BondIncrementEstimator {
    fn stable(&self, g: &MolGraph) -> bool {
        let n = g.natoms();
        for i in 0..n {
            for j in (i + 1)..n {
                if g.order(i, j) == 0 {
                    continue;
                }
                for k in (j + 1)..n {
                    if g.order(j, k) > 0 && g.order(i, k) > 0 {
                        // triangle i-j-k
                        let strained = [i, j, k].iter().any(|&a| {
                            g.neighbors(a).iter().any(|&b| g.order(a, b) >= 2)
                        });
                        if strained {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn delta_e(&self, reactant: &MolGraph, product: &MolGraph) -> f64 {
        assert_eq!(reactant.natoms(), product.natoms());
        let n = reactant.natoms();
        let mut de = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let before = reactant.order(i, j);
                let after = product.order(i, j);
                let (ei, ej) = (reactant.element(i), reactant.element(j));
                if after < before {
                    for level in (after + 1)..=before {
                        de += bond_order_increment(ei, ej, level);
                    }
                } else {
                    for level in (before + 1)..=after {
                        de -= bond_order_increment(ei, ej, level);
                    }
                }
            }
        }
        de
    }
}

/// Pass-through estimator: everything stable, every reaction thermoneutral.
/// With it the cascade reduces to the calculator-driven stages.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityEstimator;

impl FastEstimator for IdentityEstimator {
    fn stable(&self, _g: &MolGraph) -> bool {
        true
    }

    fn delta_e(&self, _reactant: &MolGraph, _product: &MolGraph) -> f64 {
        0.0
    }
}
