//! CSV and JSON files. Numbers are written with 17 significant digits so
//! every file reads back bit for bit.

use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use nonlocal_flow_core::analysis::CharacteristicPath;
use nonlocal_flow_core::solver::Trajectory;
use nonlocal_flow_core::{CoefficientField, Grid, Profile};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: cannot parse row `{row}`")]
    Parse { line: usize, row: String },
    #[error("line {line}: x = {x} is not a cell center of the grid")]
    Position { line: usize, x: f64 },
    #[error("line {line}: cell {cell} given twice")]
    Duplicate { line: usize, cell: usize },
    #[error("profile covers {found} of {expected} cells")]
    Coverage { expected: usize, found: usize },
    #[error("expected header `x,q`")]
    Header,
    #[error("invalid profile: {0}")]
    Profile(nonlocal_flow_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn save_profile(p: &Profile, mut sink: impl Write) -> io::Result<()> {
    let g = p.grid();
    writeln!(sink, "x,q")?;
    for (i, &q) in p.cells().iter().enumerate() {
        writeln!(sink, "{},{}", num(g.center(i)), num(q))?;
    }
    Ok(())
}

/// Reads `x,q` rows (any order, one per cell, `x` at cell centers).
pub fn load_profile(source: impl BufRead, grid: Grid) -> Result<Profile, LoadError> {
    let mut cells = vec![None; grid.cells()];
    let mut header = false;
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let row = line.trim();
        if row.is_empty() {
            continue;
        }
        if !header {
            if row.replace(' ', "") != "x,q" {
                return Err(LoadError::Header);
            }
            header = true;
            continue;
        }
        let lineno = idx + 1;
        let parse_err = || LoadError::Parse {
            line: lineno,
            row: row.to_string(),
        };
        let (xs, qs) = row.split_once(',').ok_or_else(parse_err)?;
        let x: f64 = xs.trim().parse().map_err(|_| parse_err())?;
        let q: f64 = qs.trim().parse().map_err(|_| parse_err())?;
        let cell = grid.locate(x).map_err(|_| LoadError::Position { line: lineno, x })?;
        if (x - grid.center(cell)).abs() > 1e-6 * grid.dx() {
            return Err(LoadError::Position { line: lineno, x });
        }
        if cells[cell].replace(q).is_some() {
            return Err(LoadError::Duplicate { line: lineno, cell });
        }
    }
    if !header {
        return Err(LoadError::Header);
    }
    let found = cells.iter().filter(|c| c.is_some()).count();
    if found != grid.cells() {
        return Err(LoadError::Coverage {
            expected: grid.cells(),
            found,
        });
    }
    Profile::new(grid, cells.into_iter().flatten().collect()).map_err(LoadError::Profile)
}

/// Per-step diagnostics: `t,dt,mass,l1,tv,inf,sup,supF,tvF`.
pub fn write_series(traj: &Trajectory, mut sink: impl Write) -> io::Result<()> {
    writeln!(sink, "t,dt,mass,l1,tv,inf,sup,supF,tvF")?;
    for r in &traj.series {
        let row = [r.t, r.dt, r.mass, r.l1, r.tv, r.inf, r.sup, r.sup_flux, r.tv_flux];
        writeln!(sink, "{}", row.map(num).join(","))?;
    }
    Ok(())
}

/// `t,x,q` samples of a traced path.
pub fn write_path(path: &CharacteristicPath, mut sink: impl Write) -> io::Result<()> {
    writeln!(sink, "t,x,q")?;
    for s in &path.samples {
        writeln!(sink, "{},{},{}", num(s.t), num(s.x), num(s.q))?;
    }
    Ok(())
}

/// `x,k,kx` at cell centers.
pub fn write_field(field: &CoefficientField, mut sink: impl Write) -> io::Result<()> {
    let g = field.grid();
    writeln!(sink, "x,k,kx")?;
    for (i, kx) in field.kx_cell().iter().enumerate() {
        writeln!(sink, "{},{},{}", num(g.center(i)), num(field.k_mid(i)), num(*kx))?;
    }
    Ok(())
}

pub fn write_pairs(header: &str, rows: &[(f64, f64)], mut sink: impl Write) -> io::Result<()> {
    writeln!(sink, "{header}")?;
    for &(a, b) in rows {
        writeln!(sink, "{},{}", num(a), num(b))?;
    }
    Ok(())
}

/// Creates `path` and hands a buffered writer to `write`.
pub fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write(&mut out)?;
    out.flush()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid {
        Grid::new(-1.0, n).unwrap()
    }

    #[test]
    fn malformed_row_names_the_line() {
        let src = "x,q\n-0.75,0.1\nabc,1.0\n";
        match load_profile(src.as_bytes(), grid(2)) {
            Err(LoadError::Parse { line, row }) => {
                assert_eq!(line, 3);
                assert_eq!(row, "abc,1.0");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_cell_is_a_coverage_error() {
        let g = grid(4);
        let mut buf = Vec::new();
        save_profile(&Profile::zeros(g), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let short: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            load_profile(short.as_bytes(), g),
            Err(LoadError::Coverage { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn rejects_bad_rows() {
        let g = grid(2);
        assert!(matches!(load_profile("q,x\n".as_bytes(), g), Err(LoadError::Header)));
        assert!(matches!(load_profile("".as_bytes(), g), Err(LoadError::Header)));
        assert!(matches!(
            load_profile("x,q\n-0.7,0\n".as_bytes(), g),
            Err(LoadError::Position { line: 2, .. })
        ));
        assert!(matches!(
            load_profile("x,q\n-0.75,0\n-0.75,1\n".as_bytes(), g),
            Err(LoadError::Duplicate { line: 3, cell: 0 })
        ));
        assert!(matches!(
            load_profile("x,q\n-0.75,-1.5\n-0.25,0\n".as_bytes(), g),
            Err(LoadError::Profile(_))
        ));
    }

    #[test]
    fn rows_in_any_order() {
        let p = load_profile("x,q\n\n-0.25, 2\n-0.75, 1\n".as_bytes(), grid(2)).unwrap();
        assert_eq!(p.cells(), &[1.0, 2.0]);
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(cells in proptest::collection::vec(-0.999_f64..1e3, 2..200)) {
            let g = grid(cells.len());
            let p = Profile::new(g, cells).unwrap();
            let mut buf = Vec::new();
            save_profile(&p, &mut buf).unwrap();
            let back = load_profile(buf.as_slice(), g).unwrap();
            prop_assert_eq!(back.cells(), p.cells());
        }
    }
}
