//! Class-interaction tables for `±`, `×` and `÷`, computed from witnesses.
//!
//! Each row/column class (infinitesimal, appreciable, infinite) is
//! instantiated with several concrete values; a cell is determined when every
//! instantiation lands in the same class and marked `?` otherwise. Zero
//! results count as infinitesimal here.

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use serde::Serialize;

use super::coeff::Coeff;
use super::exponent::Exponent;
use super::registry::GeneratorRegistry;
use super::value::Hyperreal;
use super::MagnitudeClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableOp {
    #[serde(rename = "add")]
    AddSub,
    #[serde(rename = "mul")]
    Mul,
    #[serde(rename = "div")]
    Div,
}

impl std::str::FromStr for TableOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "add" | "sub" | "addsub" => Ok(TableOp::AddSub),
            "mul" => Ok(TableOp::Mul),
            "div" => Ok(TableOp::Div),
            other => Err(format!("unknown table `{other}` (expected add|mul|div)")),
        }
    }
}

/// Row/column label of an interaction table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TableClass {
    #[serde(rename = "eps")]
    Infinitesimal,
    #[serde(rename = "a")]
    Appreciable,
    #[serde(rename = "inf")]
    Infinite,
}

impl TableClass {
    pub const ALL: [TableClass; 3] =
        [TableClass::Infinitesimal, TableClass::Appreciable, TableClass::Infinite];

    pub fn of(class: MagnitudeClass) -> Self {
        match class {
            MagnitudeClass::Zero | MagnitudeClass::Infinitesimal => TableClass::Infinitesimal,
            MagnitudeClass::Appreciable => TableClass::Appreciable,
            MagnitudeClass::Infinite => TableClass::Infinite,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            TableClass::Infinitesimal => "ε",
            TableClass::Appreciable => "a",
            TableClass::Infinite => "∞",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellWitness {
    pub lhs: String,
    pub rhs: String,
    pub result: String,
    pub class: MagnitudeClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    /// `None` marks an indeterminate (`?`) cell.
    pub class: Option<TableClass>,
    /// One witness for determined cells; two disagreeing ones for `?`.
    pub witnesses: Vec<CellWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionTable {
    pub op: TableOp,
    /// `cells[row][col]`, indexed in [`TableClass::ALL`] order.
    pub cells: Vec<Vec<Cell>>,
}

impl InteractionTable {
    pub fn cell(&self, row: TableClass, col: TableClass) -> &Cell {
        let idx = |c| TableClass::ALL.iter().position(|&x| x == c).unwrap();
        &self.cells[idx(row)][idx(col)]
    }
}

impl fmt::Display for InteractionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            TableOp::AddSub => "±",
            TableOp::Mul => "×",
            TableOp::Div => "÷",
        };
        write!(f, "{op} |")?;
        for c in TableClass::ALL {
            write!(f, " {} |", c.symbol())?;
        }
        writeln!(f)?;
        for (row, cells) in TableClass::ALL.iter().zip(&self.cells) {
            write!(f, "{} |", row.symbol())?;
            for cell in cells {
                write!(f, " {} |", cell.class.map_or("?", TableClass::symbol))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn witnesses<C: Coeff>(reg: &Arc<GeneratorRegistry>, class: TableClass) -> Vec<Hyperreal<C>> {
    let n = reg.len();
    let mono = |powers: &[(usize, Rational64)], c: i64| {
        let mut e = Exponent::zero(n);
        for &(i, p) in powers {
            e = &e + &Exponent::unit(n, i, p);
        }
        Hyperreal::<C>::monomial(reg, e, C::from_int(c)).expect("witness exponents are in bounds")
    };
    let r = Rational64::from_integer;
    let int = |c| Hyperreal::<C>::from_int(reg, c);
    let eps = mono(&[(0, r(1))], 1);
    let omega = mono(&[(0, r(-1))], 1);
    let mut out = match class {
        TableClass::Infinitesimal => vec![
            eps.clone(),
            -&eps,
            mono(&[(0, r(1))], 2),
            mono(&[(0, r(2))], 1),
            mono(&[(0, r(2))], -3),
            mono(&[(0, Rational64::new(1, 2))], 1),
            &eps + &mono(&[(0, r(2))], 1),
        ],
        TableClass::Appreciable => vec![
            int(1),
            int(-1),
            int(2),
            int(-2),
            Hyperreal::from_coeff(reg, C::from_int(1).div(&C::from_int(2))),
            &int(1) + &eps,
            &int(-1) + &eps,
            &int(3) - &mono(&[(0, r(1))], 2),
        ],
        TableClass::Infinite => vec![
            omega.clone(),
            -&omega,
            mono(&[(0, r(-2))], 1),
            &mono(&[(0, r(-1))], 2) + &int(1),
            &mono(&[(0, r(-2))], -1) + &omega,
        ],
    };
    if n > 1 {
        let delta = mono(&[(1, r(1))], 1);
        match class {
            TableClass::Infinitesimal => out.push(delta),
            TableClass::Appreciable => out.push(&int(5) + &delta),
            TableClass::Infinite => out.push(&omega + &delta),
        }
    }
    out
}

/// Computes the interaction table for `op` by exhaustive witness pairing.
pub fn interaction_table<C: Coeff>(
    registry: &Arc<GeneratorRegistry>,
    op: TableOp,
) -> InteractionTable {
    assert!(!registry.is_empty(), "interaction tables need at least one generator");
    let mut cells = Vec::with_capacity(3);
    for row in TableClass::ALL {
        let mut row_cells = Vec::with_capacity(3);
        for col in TableClass::ALL {
            row_cells.push(compute_cell::<C>(registry, op, row, col));
        }
        cells.push(row_cells);
    }
    InteractionTable { op, cells }
}

fn compute_cell<C: Coeff>(
    reg: &Arc<GeneratorRegistry>,
    op: TableOp,
    row: TableClass,
    col: TableClass,
) -> Cell {
    // the quotient table is read column over row: cell (a, ε) holds ε / a
    let (lhs_class, rhs_class) = match op {
        TableOp::Div => (col, row),
        _ => (row, col),
    };
    let mut seen: Vec<CellWitness> = Vec::new();
    for x in witnesses::<C>(reg, lhs_class) {
        for y in witnesses::<C>(reg, rhs_class) {
            let results = match op {
                TableOp::AddSub => vec![("+", &x + &y), ("-", &x - &y)],
                TableOp::Mul => vec![("*", &x * &y)],
                TableOp::Div => vec![("/", x.checked_div(&y).expect("witnesses are nonzero"))],
            };
            for (sym, z) in results {
                let w = CellWitness {
                    lhs: x.to_string(),
                    rhs: format!("{sym} {y}"),
                    result: z.to_string(),
                    class: z.magnitude_class(),
                };
                if !seen.iter().any(|s| TableClass::of(s.class) == TableClass::of(w.class)) {
                    seen.push(w);
                }
            }
        }
    }
    if seen.len() == 1 {
        Cell { class: Some(TableClass::of(seen[0].class)), witnesses: seen }
    } else {
        seen.truncate(2);
        Cell { class: None, witnesses: seen }
    }
}
