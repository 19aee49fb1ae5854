use std::collections::HashSet;
use std::fmt;

use super::OpError;

/// Upper bound on the total register width; masks are stored in a `u64`.
pub const MAX_WIDTH: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Party(usize),
    Env,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WireKind {
    Input,
    Output,
}

impl WireKind {
    pub fn letter(self) -> char {
        match self {
            WireKind::Input => 'I',
            WireKind::Output => 'O',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Wire {
    pub name: String,
    pub owner: Owner,
    pub kind: WireKind,
    pub width: u32,
}

impl Wire {
    /// A wire with the conventional name `I3`, `O0`, `Ienv`, ...
    pub fn new(owner: Owner, kind: WireKind, width: u32) -> Self {
        let name = match owner {
            Owner::Party(k) => format!("{}{}", kind.letter(), k),
            Owner::Env => format!("{}env", kind.letter()),
        };
        Wire { name, owner, kind, width }
    }

    pub fn input(party: usize, width: u32) -> Self {
        Wire::new(Owner::Party(party), WireKind::Input, width)
    }

    pub fn output(party: usize, width: u32) -> Self {
        Wire::new(Owner::Party(party), WireKind::Output, width)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Ordered list of wires fixing the global bit order of diagonal operators.
///
/// The first declared wire occupies the most significant bits of a global
/// basis index, and within a multi-bit wire the first bit is the most
/// significant. Bit `0` of the global index is the last bit of the last wire.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WireLayout {
    wires: Vec<Wire>,
    shifts: Vec<u32>,
    width: u32,
}

impl WireLayout {
    pub fn new(wires: Vec<Wire>) -> Result<Self, OpError> {
        let mut seen = HashSet::new();
        let mut width = 0u32;
        for wire in &wires {
            if wire.width == 0 {
                return Err(OpError::Layout(format!("wire {} has zero width", wire.name)));
            }
            if !seen.insert(wire.name.as_str()) {
                return Err(OpError::Layout(format!("duplicate wire name {}", wire.name)));
            }
            width += wire.width;
        }
        if width > MAX_WIDTH {
            return Err(OpError::Layout(format!("total width {width} exceeds {MAX_WIDTH} bits")));
        }
        let mut shifts = Vec::with_capacity(wires.len());
        let mut below = width;
        for wire in &wires {
            below -= wire.width;
            shifts.push(below);
        }
        Ok(WireLayout { wires, shifts, width })
    }

    /// The zero-width layout of a scalar.
    pub fn empty() -> Self {
        WireLayout { wires: Vec::new(), shifts: Vec::new(), width: 0 }
    }

    /// `I_0..I_{n-1}` followed by `O_0..O_{n-1}` with the given widths.
    pub fn io(input_widths: &[u32], output_widths: &[u32]) -> Result<Self, OpError> {
        let wires = input_widths
            .iter()
            .enumerate()
            .map(|(k, &w)| Wire::input(k, w))
            .chain(output_widths.iter().enumerate().map(|(k, &w)| Wire::output(k, w)))
            .collect();
        WireLayout::new(wires)
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Number of basis states, `2^width`.
    pub fn dim(&self) -> usize {
        1usize << self.width
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.wires.iter().position(|w| w.name == name)
    }

    pub fn wire(&self, name: &str) -> Option<&Wire> {
        self.wires.iter().find(|w| w.name == name)
    }

    pub fn find(&self, owner: Owner, kind: WireKind) -> Option<usize> {
        self.wires.iter().position(|w| w.owner == owner && w.kind == kind)
    }

    /// Global bit offset of the least significant bit of wire `pos`.
    pub fn shift(&self, pos: usize) -> u32 {
        self.shifts[pos]
    }

    /// Mask of the global bits occupied by wire `pos`.
    pub fn wire_mask(&self, pos: usize) -> u64 {
        low_bits(self.wires[pos].width) << self.shifts[pos]
    }

    /// Global bit index of bit `bit` (0 = most significant) of wire `pos`.
    pub fn bit(&self, pos: usize, bit: u32) -> u32 {
        let wire = &self.wires[pos];
        debug_assert!(bit < wire.width);
        self.shifts[pos] + wire.width - 1 - bit
    }

    /// Value carried by wire `pos` in the global basis index `index`.
    pub fn extract(&self, pos: usize, index: u64) -> u64 {
        (index >> self.shifts[pos]) & low_bits(self.wires[pos].width)
    }

    /// Global index built from one value per wire, in declaration order.
    pub fn compose(&self, values: &[u64]) -> u64 {
        debug_assert_eq!(values.len(), self.wires.len());
        values
            .iter()
            .enumerate()
            .fold(0u64, |acc, (pos, &v)| acc | ((v & low_bits(self.wires[pos].width)) << self.shifts[pos]))
    }

    /// Mask over all wires of the given kind.
    pub fn kind_mask(&self, kind: WireKind) -> u64 {
        (0..self.wires.len()).filter(|&p| self.wires[p].kind == kind).fold(0, |acc, p| acc | self.wire_mask(p))
    }

    /// Parties that own at least one wire, sorted.
    pub fn parties(&self) -> Vec<usize> {
        let mut parties: Vec<usize> = self
            .wires
            .iter()
            .filter_map(|w| match w.owner {
                Owner::Party(k) => Some(k),
                Owner::Env => None,
            })
            .collect();
        parties.sort_unstable();
        parties.dedup();
        parties
    }

    pub(crate) fn is_disjoint(&self, other: &WireLayout) -> Result<(), OpError> {
        for wire in &other.wires {
            if self.position(&wire.name).is_some() {
                return Err(OpError::Layout(format!("wire name collision: {}", wire.name)));
            }
        }
        Ok(())
    }

    pub(crate) fn concat(&self, other: &WireLayout) -> Result<WireLayout, OpError> {
        self.is_disjoint(other)?;
        let wires = self.wires.iter().chain(other.wires.iter()).cloned().collect();
        WireLayout::new(wires)
    }
}

impl fmt::Display for WireLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .wires
            .iter()
            .map(|w| if w.width == 1 { w.name.clone() } else { format!("{}[{}]", w.name, w.width) })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

pub(crate) fn low_bits(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_wire_is_most_significant() {
        let layout = WireLayout::new(vec![Wire::input(0, 1), Wire::output(0, 2)]).unwrap();
        assert_eq!(layout.width(), 3);
        assert_eq!(layout.wire_mask(0), 0b100);
        assert_eq!(layout.wire_mask(1), 0b011);
        assert_eq!(layout.bit(1, 0), 1);
        assert_eq!(layout.bit(1, 1), 0);
        assert_eq!(layout.extract(1, 0b110), 0b10);
        assert_eq!(layout.compose(&[1, 0b01]), 0b101);
    }

    #[test]
    fn rejects_bad_wires() {
        assert!(WireLayout::new(vec![Wire::input(0, 1), Wire::input(0, 2)]).is_err());
        assert!(WireLayout::new(vec![Wire::input(0, 0)]).is_err());
        assert!(WireLayout::new(vec![Wire::input(0, 40), Wire::input(1, 40)]).is_err());
    }

    #[test]
    fn io_layout_names() {
        let layout = WireLayout::io(&[1, 2], &[2, 1]).unwrap();
        let names: Vec<&str> = layout.wires().iter().map(|w| w.name.as_str()).collect();
        assert_eq!(names, ["I0", "I1", "O0", "O1"]);
        assert_eq!(layout.kind_mask(WireKind::Input), 0b111000);
        assert_eq!(layout.parties(), vec![0, 1]);
        assert_eq!(WireLayout::empty().dim(), 1);
    }
}
