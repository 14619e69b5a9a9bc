//! Domain types shared by every module: sensitive groups, labels, samples
//! and datasets partitioned into the four `(label, group)` cells.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value of the binary sensitive attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    A,
    B,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::A, Group::B];

    pub fn index(self) -> usize {
        match self {
            Group::A => 0,
            Group::B => 1,
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::A => "a",
            Group::B => "b",
        })
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "a" | "A" => Ok(Group::A),
            "b" | "B" => Ok(Group::B),
            other => Err(format!("unknown group {other:?} (expected a or b)")),
        }
    }
}

/// Class label. `Zero` is the prioritized class whose misclassification
/// (type I error) is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Zero, Label::One];

    pub fn index(self) -> usize {
        match self {
            Label::Zero => 0,
            Label::One => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Label> {
        match bit {
            0 => Some(Label::Zero),
            1 => Some(Label::One),
            _ => None,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Zero => Label::One,
            Label::One => Label::Zero,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "0" => Ok(Label::Zero),
            "1" => Ok(Label::One),
            other => Err(format!("unknown label {other:?} (expected 0 or 1)")),
        }
    }
}

/// One of the four `(label, group)` strata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub label: Label,
    pub group: Group,
}

impl Cell {
    /// Cells in canonical order: (0,a), (0,b), (1,a), (1,b).
    pub const ALL: [Cell; 4] = [
        Cell::new(Label::Zero, Group::A),
        Cell::new(Label::Zero, Group::B),
        Cell::new(Label::One, Group::A),
        Cell::new(Label::One, Group::B),
    ];

    pub const fn new(label: Label, group: Group) -> Self {
        Cell { label, group }
    }

    pub fn index(self) -> usize {
        self.label.index() * 2 + self.group.index()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.label, self.group)
    }
}

/// Per-cell values with named fields, as written in model and spec files:
/// `a0`, `b0`, `a1`, `b1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellValues<T> {
    pub a0: T,
    pub b0: T,
    pub a1: T,
    pub b1: T,
}

impl<T: Clone> CellValues<T> {
    pub fn to_per_cell(&self) -> PerCell<T> {
        PerCell::from_fn(|c| match (c.label, c.group) {
            (Label::Zero, Group::A) => self.a0.clone(),
            (Label::Zero, Group::B) => self.b0.clone(),
            (Label::One, Group::A) => self.a1.clone(),
            (Label::One, Group::B) => self.b1.clone(),
        })
    }
}

/// A value stored for each of the four cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PerCell<T>(pub [T; 4]);

impl<T> PerCell<T> {
    pub fn from_fn(mut f: impl FnMut(Cell) -> T) -> Self {
        PerCell(Cell::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, &T)> {
        Cell::ALL.into_iter().zip(self.0.iter())
    }
}

impl<T> Index<Cell> for PerCell<T> {
    type Output = T;

    fn index(&self, cell: Cell) -> &T {
        &self.0[cell.index()]
    }
}

impl<T> IndexMut<Cell> for PerCell<T> {
    fn index_mut(&mut self, cell: Cell) -> &mut T {
        &mut self.0[cell.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub group: Group,
    pub label: Label,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, group: Group, label: Label) -> Self {
        LabeledSample { features, group, label }
    }

    pub fn cell(&self) -> Cell {
        Cell::new(self.label, self.group)
    }
}

/// A nonempty collection of samples sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<LabeledSample>,
    dim: usize,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledSample>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::InvalidConfig("dataset is empty".into()));
        };
        let dim = first.features.len();
        if let Some((pos, bad)) = samples.iter().enumerate().find(|(_, s)| s.features.len() != dim) {
            return Err(Error::InvalidConfig(format!(
                "sample {pos} has {} features, expected {dim}",
                bad.features.len()
            )));
        }
        Ok(Dataset { samples, dim })
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<LabeledSample> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_counts(&self) -> PerCell<usize> {
        let mut counts = PerCell::<usize>::default();
        for s in &self.samples {
            counts[s.cell()] += 1;
        }
        counts
    }

    /// Samples of one cell, in dataset order.
    pub fn cell(&self, cell: Cell) -> impl Iterator<Item = &LabeledSample> {
        self.samples.iter().filter(move |s| s.cell() == cell)
    }

    /// Fails with [`Error::EmptyCell`] naming the first empty cell.
    pub fn require_all_cells(&self) -> Result<PerCell<usize>> {
        let counts = self.cell_counts();
        for (cell, &n) in counts.iter() {
            if n == 0 {
                return Err(Error::EmptyCell { label: cell.label, group: cell.group });
            }
        }
        Ok(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_indices_are_canonical() {
        for (i, cell) in Cell::ALL.iter().enumerate() {
            assert_eq!(cell.index(), i);
        }
    }

    #[test]
    fn dataset_rejects_mixed_dimensions() {
        let samples = vec![
            LabeledSample::new(vec![1.0, 2.0], Group::A, Label::Zero),
            LabeledSample::new(vec![1.0], Group::B, Label::One),
        ];
        assert!(matches!(Dataset::new(samples), Err(Error::InvalidConfig(_))));
        assert!(Dataset::new(vec![]).is_err());
    }

    #[test]
    fn missing_cell_is_reported() {
        let ds = Dataset::new(vec![
            LabeledSample::new(vec![0.0], Group::A, Label::Zero),
            LabeledSample::new(vec![0.0], Group::B, Label::Zero),
            LabeledSample::new(vec![0.0], Group::A, Label::One),
        ])
        .unwrap();
        match ds.require_all_cells() {
            Err(Error::EmptyCell { label: Label::One, group: Group::B }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn group_and_label_parse() {
        assert_eq!("a".parse::<Group>().unwrap(), Group::A);
        assert_eq!(" B ".parse::<Group>().unwrap(), Group::B);
        assert!("c".parse::<Group>().is_err());
        assert_eq!("1".parse::<Label>().unwrap(), Label::One);
        assert!("2".parse::<Label>().is_err());
    }
}
