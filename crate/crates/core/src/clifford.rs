//! The 24-element single-qubit Clifford group.
//!
//! Elements are discovered by breadth-first search over products of the
//! generator pulses, so every element carries a shortest decomposition. The
//! identity is special-cased as a single wait of one π-pulse length and takes
//! index 0; the rest are ordered by (pulse count, lexicographic pulse kinds).

use std::collections::VecDeque;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{PrimitivePulse, PulseKind};
use crate::unitary::Unitary2;

pub const GROUP_ORDER: usize = 24;

/// Tolerance for matching a product against the table.
const MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffordElement {
    pub index: usize,
    pub unitary: Unitary2,
    pub pulses: Vec<PrimitivePulse>,
}

impl CliffordElement {
    pub fn pulse_count(&self) -> usize {
        self.pulses.len()
    }

    /// Pulse labels joined with spaces, e.g. `"+X/2 -Y"`.
    pub fn describe(&self) -> String {
        self.pulses
            .iter()
            .map(|p| p.kind.label())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Handle to an element of the global group table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clifford(u8);

impl Clifford {
    pub const IDENTITY: Clifford = Clifford(0);

    pub fn from_index(index: usize) -> Option<Clifford> {
        (index < GROUP_ORDER).then_some(Clifford(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn element(self) -> &'static CliffordElement {
        &CliffordGroup::global().elements[self.index()]
    }

    pub fn unitary(self) -> Unitary2 {
        self.element().unitary
    }

    pub fn pulses(self) -> &'static [PrimitivePulse] {
        &self.element().pulses
    }

    /// The element equal to `self · other` (apply `other` first).
    pub fn compose(self, other: Clifford) -> Clifford {
        CliffordGroup::global().compose(self, other)
    }

    pub fn inverse(self) -> Clifford {
        CliffordGroup::global().inverse(self)
    }

    /// Looks up a single-pulse Clifford by label (`"X"`, `"-Y/2"`, `"I"`, ...).
    pub fn from_name(name: &str) -> Result<Clifford> {
        let kind = PulseKind::from_label(name).ok_or_else(|| Error::UnknownGate(name.into()))?;
        if kind == PulseKind::IdentityWait {
            return Ok(Clifford::IDENTITY);
        }
        CliffordGroup::global().lookup(&kind.unitary(0.0))
    }

    pub fn all() -> impl Iterator<Item = Clifford> {
        (0..GROUP_ORDER as u8).map(Clifford)
    }
}

impl fmt::Display for Clifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}[{}]", self.0, self.element().describe())
    }
}

/// Target eigenstate at the end of a benchmarking sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        match s.trim().to_ascii_lowercase().as_str() {
            "up" => Some(Direction::Up),
            "down" => Some(Direction::Down),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug)]
pub struct CliffordGroup {
    elements: Vec<CliffordElement>,
    products: [[u8; GROUP_ORDER]; GROUP_ORDER],
    inverses: [u8; GROUP_ORDER],
    pauli_x: Clifford,
}

impl CliffordGroup {
    pub fn global() -> &'static CliffordGroup {
        static GROUP: OnceLock<CliffordGroup> = OnceLock::new();
        GROUP.get_or_init(|| CliffordGroup::build().expect("Clifford table construction"))
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn compose(&self, a: Clifford, b: Clifford) -> Clifford {
        Clifford(self.products[a.index()][b.index()])
    }

    pub fn inverse(&self, a: Clifford) -> Clifford {
        Clifford(self.inverses[a.index()])
    }

    /// The element realising a π rotation about x.
    pub fn pauli_x(&self) -> Clifford {
        self.pauli_x
    }

    /// Finds the element equal to `u` up to global phase.
    pub fn lookup(&self, u: &Unitary2) -> Result<Clifford> {
        find_match(&self.elements, u).map(|i| Clifford(i as u8))
    }

    pub fn mean_pulse_count(&self) -> f64 {
        let total: usize = self.elements.iter().map(|e| e.pulse_count()).sum();
        total as f64 / self.elements.len() as f64
    }

    fn build() -> Result<CliffordGroup> {
        let elements = enumerate_elements();
        if elements.len() != GROUP_ORDER {
            return Err(Error::Config(format!(
                "generator closure produced {} elements",
                elements.len()
            )));
        }
        let mut products = [[0u8; GROUP_ORDER]; GROUP_ORDER];
        let mut inverses = [0u8; GROUP_ORDER];
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate() {
                products[i][j] = find_match(&elements, &(a.unitary * b.unitary))? as u8;
            }
            inverses[i] = find_match(&elements, &a.unitary.dagger())? as u8;
        }
        let pauli_x = Clifford(find_match(&elements, &Unitary2::PAULI_X)? as u8);
        Ok(CliffordGroup {
            elements,
            products,
            inverses,
            pauli_x,
        })
    }
}

fn find_match(elements: &[CliffordElement], u: &Unitary2) -> Result<usize> {
    let mut best = (0usize, 0.0f64);
    for (i, e) in elements.iter().enumerate() {
        let overlap = e.unitary.phase_overlap(u);
        if overlap > best.1 {
            best = (i, overlap);
        }
    }
    if 1.0 - best.1 <= MATCH_TOL {
        Ok(best.0)
    } else {
        Err(Error::CliffordNoMatch {
            best_overlap: best.1,
        })
    }
}

/// Breadth-first closure of the generator set.
///
/// Sequences are expanded in (length, lexicographic) order, so the first
/// sequence reaching a new element is its canonical decomposition. Pulses are
/// listed in time order; the unitary is the product with the latest pulse on
/// the left.
fn enumerate_elements() -> Vec<CliffordElement> {
    let mut found = vec![CliffordElement {
        index: 0,
        unitary: Unitary2::IDENTITY,
        pulses: vec![PrimitivePulse::new(PulseKind::IdentityWait)],
    }];
    let mut queue: VecDeque<(Vec<PulseKind>, Unitary2)> = VecDeque::new();
    queue.push_back((Vec::new(), Unitary2::IDENTITY));

    while let Some((seq, u)) = queue.pop_front() {
        if found.len() == GROUP_ORDER {
            break;
        }
        for kind in PulseKind::GENERATORS {
            let next = kind.unitary(0.0) * u;
            if found.iter().any(|e| e.unitary.approx_eq_up_to_phase(&next, MATCH_TOL)) {
                continue;
            }
            let mut pulses = seq.clone();
            pulses.push(kind);
            found.push(CliffordElement {
                index: found.len(),
                unitary: next,
                pulses: pulses.iter().copied().map(PrimitivePulse::new).collect(),
            });
            queue.push_back((pulses, next));
        }
    }
    found
}

/// Product of a time-ordered gate list (first gate applied first).
pub fn sequence_product(sequence: &[Clifford]) -> Clifford {
    sequence
        .iter()
        .fold(Clifford::IDENTITY, |acc, &c| c.compose(acc))
}

/// Final Clifford returning the ideal sequence to `|↑⟩` (Up) or sending it to
/// `|↓⟩` (Down, net operation equal to the X element).
pub fn recovery_gate(sequence: &[Clifford], target: Direction) -> Clifford {
    let undo = sequence_product(sequence).inverse();
    match target {
        Direction::Up => undo,
        Direction::Down => CliffordGroup::global().pauli_x().compose(undo),
    }
}
