//! The four supported elements and their embedded constant tables.
//!
//! The engine is restricted to neutral, closed-shell species built from
//! C, H, N and O. Per-element data is compiled in:
//!
//! | element | valence | covalent radius (Å) | mass (amu) |
//! |---------|---------|---------------------|------------|
//! | H       | 1       | 0.37                | 1.008      |
//! | C       | 4       | 0.77                | 12.011     |
//! | N       | 3       | 0.75                | 14.007     |
//! | O       | 2       | 0.73                | 15.999     |
//!
//! Radii are the classic single-bond covalent radii; they drive both bond
//! perception cutoffs and the surrogate potential's equilibrium distances.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// One of the four supported elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Element {
    H,
    C,
    N,
    O,
}

impl Element {
    pub const ALL: [Element; 4] = [Element::H, Element::C, Element::N, Element::O];

    /// Exact bond-order sum required of every atom of this element.
    pub fn standard_valence(self) -> u8 {
        match self {
            Element::H => 1,
            Element::C => 4,
            Element::N => 3,
            Element::O => 2,
        }
    }

    /// Single-bond covalent radius in Å.
    pub fn covalent_radius(self) -> f64 {
        match self {
            Element::H => 0.37,
            Element::C => 0.77,
            Element::N => 0.75,
            Element::O => 0.73,
        }
    }

    /// Atomic mass in amu.
    pub fn mass(self) -> f64 {
        match self {
            Element::H => 1.008,
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Element::H => "H",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
        }
    }

    /// Stable index used by pair tables (H=0, C=1, N=2, O=3).
    pub fn index(self) -> usize {
        match self {
            Element::H => 0,
            Element::C => 1,
            Element::N => 2,
            Element::O => 3,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Error for element symbols outside the supported set.
#[derive(Debug, Clone, thiserror::Error)]
#[error("unsupported element symbol {0:?} (supported: C, H, N, O)")]
pub struct UnknownElement(pub String);

impl FromStr for Element {
    type Err = UnknownElement;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "H" | "h" => Ok(Element::H),
            "C" | "c" => Ok(Element::C),
            "N" | "n" => Ok(Element::N),
            "O" | "o" => Ok(Element::O),
            other => Err(UnknownElement(other.to_string())),
        }
    }
}

/// Symmetric lookup table keyed by unordered element pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    values: [[f64; 4]; 4],
}

impl PairTable {
    pub fn from_fn(mut f: impl FnMut(Element, Element) -> f64) -> Self {
        let mut values = [[0.0; 4]; 4];
        for a in Element::ALL {
            for b in Element::ALL {
                if a.index() <= b.index() {
                    let v = f(a, b);
                    values[a.index()][b.index()] = v;
                    values[b.index()][a.index()] = v;
                }
            }
        }
        PairTable { values }
    }

    pub fn get(&self, a: Element, b: Element) -> f64 {
        self.values[a.index()][b.index()]
    }

    pub fn set(&mut self, a: Element, b: Element, v: f64) {
        self.values[a.index()][b.index()] = v;
        self.values[b.index()][a.index()] = v;
    }
}

/// Single-bond dissociation energies in kcal/mol, used both as surrogate
/// well depths and as the order-1 increments of the fast energy estimator.
pub fn single_bond_energy(a: Element, b: Element) -> f64 {
    use Element::*;
    match (a.min(b), a.max(b)) {
        (H, H) => 104.0,
        (H, C) => 99.0,
        (H, N) => 93.0,
        (H, O) => 111.0,
        (C, C) => 83.0,
        (C, N) => 73.0,
        (C, O) => 86.0,
        (N, N) => 39.0,
        (N, O) => 48.0,
        (O, O) => 35.0,
        _ => unreachable!("pairs are ordered by element index"),
    }
}

/// Incremental bond energy in kcal/mol for raising a bond from `order - 1`
/// to `order` (order in 1..=3). Differences of conventional single/double/
/// triple bond strengths; pairs that cannot reach a given order carry a
/// placeholder that is never consulted by valid graphs.
pub fn bond_order_increment(a: Element, b: Element, order: u8) -> f64 {
    use Element::*;
    let (lo, hi) = (a.min(b), a.max(b));
    let triples = match (lo, hi) {
        (C, C) => [83.0, 63.0, 54.0],
        (C, N) => [73.0, 74.0, 66.0],
        (C, O) => [86.0, 92.0, 80.0],
        (N, N) => [39.0, 61.0, 126.0],
        (N, O) => [48.0, 97.0, 60.0],
        (O, O) => [35.0, 84.0, 60.0],
        _ => {
            let e = single_bond_energy(lo, hi);
            [e, e, e]
        }
    };
    match order {
        1 => triples[0],
        2 => triples[1],
        3 => triples[2],
        _ => panic!("bond order {order} out of range 1..=3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valences_are_fixed() {
        assert_eq!(Element::C.standard_valence(), 4);
        assert_eq!(Element::N.standard_valence(), 3);
        assert_eq!(Element::O.standard_valence(), 2);
        assert_eq!(Element::H.standard_valence(), 1);
    }

    #[test]
    fn symbol_roundtrip() {
        for e in Element::ALL {
            assert_eq!(e.symbol().parse::<Element>().unwrap(), e);
        }
        assert!("Br".parse::<Element>().is_err());
    }

    #[test]
    fn pair_table_symmetric() {
        let t = PairTable::from_fn(|a, b| a.covalent_radius() + b.covalent_radius());
        for a in Element::ALL {
            for b in Element::ALL {
                assert_eq!(t.get(a, b), t.get(b, a));
            }
        }
        assert!((t.get(Element::C, Element::H) - 1.14).abs() < 1e-12);
    }

    #[test]
    fn double_bond_totals_match_conventional_values() {
        // order-1 + order-2 increments reproduce the double-bond strength
        let cc = bond_order_increment(Element::C, Element::C, 1)
            + bond_order_increment(Element::C, Element::C, 2);
        assert_eq!(cc, 146.0);
        let nn3: f64 = (1..=3)
            .map(|o| bond_order_increment(Element::N, Element::N, o))
            .sum();
        assert_eq!(nn3, 226.0);
    }
}
