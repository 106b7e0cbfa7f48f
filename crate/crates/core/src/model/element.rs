use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Finite element topology. Numeric codes follow the openCFS element table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementType {
    Undef,
    Point,
    Line2,
    Line3,
    Tria3,
    Tria6,
    Quad4,
    Quad8,
    Quad9,
    Tet4,
    Tet10,
    Hexa8,
    Hexa20,
    Hexa27,
    Pyra5,
    Pyra13,
    Pyra14,
    Wedge6,
    Wedge15,
    Wedge18,
}

impl ElementType {
    pub const ALL: [ElementType; 20] = [
        ElementType::Undef,
        ElementType::Point,
        ElementType::Line2,
        ElementType::Line3,
        ElementType::Tria3,
        ElementType::Tria6,
        ElementType::Quad4,
        ElementType::Quad8,
        ElementType::Quad9,
        ElementType::Tet4,
        ElementType::Tet10,
        ElementType::Hexa8,
        ElementType::Hexa20,
        ElementType::Hexa27,
        ElementType::Pyra5,
        ElementType::Pyra13,
        ElementType::Pyra14,
        ElementType::Wedge6,
        ElementType::Wedge15,
        ElementType::Wedge18,
    ];

    pub fn node_count(self) -> usize {
        use ElementType::*;
        match self {
            Undef => 0,
            Point => 1,
            Line2 => 2,
            Line3 => 3,
            Tria3 => 3,
            Tria6 => 6,
            Quad4 => 4,
            Quad8 => 8,
            Quad9 => 9,
            Tet4 => 4,
            Tet10 => 10,
            Hexa8 => 8,
            Hexa20 => 20,
            Hexa27 => 27,
            Pyra5 => 5,
            Pyra13 => 13,
            Pyra14 => 14,
            Wedge6 => 6,
            Wedge15 => 15,
            Wedge18 => 18,
        }
    }

    /// Number of corner (vertex) nodes; higher-order nodes follow the corners.
    pub fn corner_count(self) -> usize {
        use ElementType::*;
        match self {
            Undef => 0,
            Point => 1,
            Line2 | Line3 => 2,
            Tria3 | Tria6 => 3,
            Quad4 | Quad8 | Quad9 => 4,
            Tet4 | Tet10 => 4,
            Hexa8 | Hexa20 | Hexa27 => 8,
            Pyra5 | Pyra13 | Pyra14 => 5,
            Wedge6 | Wedge15 | Wedge18 => 6,
        }
    }

    pub fn dimension(self) -> u32 {
        use ElementType::*;
        match self {
            Undef | Point => 0,
            Line2 | Line3 => 1,
            Tria3 | Tria6 | Quad4 | Quad8 | Quad9 => 2,
            _ => 3,
        }
    }

    pub fn code(self) -> i32 {
        Self::ALL.iter().position(|&t| t == self).unwrap() as i32
    }

    pub fn from_code(code: i32) -> Result<Self> {
        usize::try_from(code)
            .ok()
            .and_then(|i| Self::ALL.get(i).copied())
            .ok_or(Error::UnknownElementCode(code))
    }

    pub fn name(self) -> &'static str {
        use ElementType::*;
        match self {
            Undef => "UNDEF",
            Point => "POINT",
            Line2 => "LINE2",
            Line3 => "LINE3",
            Tria3 => "TRIA3",
            Tria6 => "TRIA6",
            Quad4 => "QUAD4",
            Quad8 => "QUAD8",
            Quad9 => "QUAD9",
            Tet4 => "TET4",
            Tet10 => "TET10",
            Hexa8 => "HEXA8",
            Hexa20 => "HEXA20",
            Hexa27 => "HEXA27",
            Pyra5 => "PYRA5",
            Pyra13 => "PYRA13",
            Pyra14 => "PYRA14",
            Wedge6 => "WEDGE6",
            Wedge15 => "WEDGE15",
            Wedge18 => "WEDGE18",
        }
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ElementType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown element type '{s}'")))
    }
}
