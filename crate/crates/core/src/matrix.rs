//! Reference state transition matrix, reproduced by running one generated
//! micro-program per cell.
//!
//! Each program declares the subject `s` and a handful of helpers, drives
//! `s` into the row state, applies the column operation and probes `s`.
//! A cell is `×` when the operation is rejected.

use std::fmt::Write as _;

use crate::context::ReferenceState;
use crate::driver::{run_source, RunOptions};

/// An assignment operator together with the operand position of `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    AliasLeft,
    CopyLeft,
    MoveLeft,
    AliasRight,
    CopyRight,
    MoveRight,
}

impl Column {
    pub const ALL: [Column; 6] = [
        Column::AliasLeft,
        Column::CopyLeft,
        Column::MoveLeft,
        Column::AliasRight,
        Column::CopyRight,
        Column::MoveRight,
    ];

    pub fn header(self) -> &'static str {
        match self {
            Column::AliasLeft => "•&-",
            Column::CopyLeft => "•:=",
            Column::MoveLeft => "•<-",
            Column::AliasRight => "&-•",
            Column::CopyRight => ":=•",
            Column::MoveRight => "<-•",
        }
    }

    pub fn operation(self) -> &'static str {
        match self {
            Column::AliasLeft => "src := 7; s &- src",
            Column::CopyLeft => "s := 7",
            Column::MoveLeft => "s <- 7",
            Column::AliasRight => "d &- s",
            Column::CopyRight => "d := s",
            Column::MoveRight => "d <- s",
        }
    }
}

/// Statements that leave `s` in `state`.
pub fn setup(state: ReferenceState) -> &'static str {
    match state {
        ReferenceState::Unallocated => "",
        ReferenceState::Unique => "s := 1",
        ReferenceState::Shared => "s := 1; h &- s",
        ReferenceState::Borrowed => "o := 1; s &- o",
        ReferenceState::Moved => "s := 1; m <- s",
    }
}

const NAMES: [&str; 6] = ["s", "h", "o", "m", "src", "d"];

pub fn cell_program(row: ReferenceState, column: Column) -> String {
    let mut src = String::new();
    for name in NAMES {
        let _ = writeln!(src, "let {name}: @mut Int {{");
    }
    let setup = setup(row);
    if !setup.is_empty() {
        let _ = writeln!(src, "probe s; {setup}; probe s");
    }
    let _ = writeln!(src, "{}", column.operation());
    src.push_str("probe s\n");
    src.push_str(&"}".repeat(NAMES.len()));
    src.push('\n');
    src
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub row: ReferenceState,
    pub column: Column,
    /// `None` renders as `×`.
    pub outcome: Option<ReferenceState>,
}

/// Runs the program for one cell. Panics if the setup does not reach the
/// row state, since every cell would then be meaningless.
pub fn run_cell(row: ReferenceState, column: Column) -> Cell {
    let out = run_source(&cell_program(row, column), RunOptions::default());
    let probes = &out
        .evaluation
        .as_ref()
        .expect("cell programs type-check")
        .probes;
    let mut probes = probes.iter().map(|p| p.state);
    if row != ReferenceState::Unallocated {
        assert_eq!(probes.next(), Some(ReferenceState::Unallocated));
    }
    let before = if row == ReferenceState::Unallocated {
        ReferenceState::Unallocated
    } else {
        probes.next().expect("setup probe")
    };
    assert_eq!(before, row, "setup for {row} reached {before}");
    let outcome = match out.diagnostic {
        Some(_) => None,
        None => probes.next(),
    };
    Cell {
        row,
        column,
        outcome,
    }
}

pub fn build_matrix() -> Vec<Cell> {
    ReferenceState::ALL
        .iter()
        .flat_map(|&row| Column::ALL.iter().map(move |&column| run_cell(row, column)))
        .collect()
}

const WIDTH: usize = 10;

pub fn render_matrix(cells: &[Cell]) -> String {
    let mut out = format!("{:<12}", "");
    for column in Column::ALL {
        let _ = write!(out, "{:<WIDTH$}", column.header());
    }
    out = out.trim_end().to_string();
    out.push('\n');
    for row in ReferenceState::ALL {
        let mut line = format!("{:<12}", row.name());
        for column in Column::ALL {
            let cell = cells
                .iter()
                .find(|c| c.row == row && c.column == column)
                .expect("complete matrix");
            let text = cell.outcome.map_or("×", ReferenceState::name);
            let _ = write!(line, "{text:<WIDTH$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn programs_parse_and_reach_their_row() {
        for row in ReferenceState::ALL {
            for column in Column::ALL {
                run_cell(row, column);
            }
        }
    }

    #[test]
    fn rendering_layout() {
        let text = render_matrix(&build_matrix());
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("            •&-"));
        assert!(lines[1].starts_with("unallocated "));
    }

    #[test]
    fn sample_cells() {
        use ReferenceState::*;
        assert_eq!(run_cell(Unique, Column::AliasLeft).outcome, Some(Borrowed));
        assert_eq!(run_cell(Shared, Column::AliasRight).outcome, Some(Shared));
        assert_eq!(run_cell(Moved, Column::CopyRight).outcome, None);
    }
}
