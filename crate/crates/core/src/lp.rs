//! Solver-agnostic linear program storage and MPS export.

use std::io::{self, Write};

/// Sparse LP/MILP in row form: `row_lower <= A x <= row_upper`,
/// `col_lower <= x <= col_upper`, minimize `cost · x + offset`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub col_names: Vec<String>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub cost: Vec<f64>,
    pub integer: Vec<bool>,
    pub row_names: Vec<String>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub offset: f64,
}

impl LinearProgram {
    pub fn add_col(&mut self, name: String, lower: f64, upper: f64, cost: f64, integer: bool) -> usize {
        self.col_names.push(name);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.cost.push(cost);
        self.integer.push(integer);
        self.col_names.len() - 1
    }

    pub fn add_row(&mut self, name: String, lower: f64, upper: f64, coefs: Vec<(usize, f64)>) -> usize {
        self.row_names.push(name);
        self.row_lower.push(lower);
        self.row_upper.push(upper);
        self.rows.push(coefs);
        self.rows.len() - 1
    }

    pub fn num_cols(&self) -> usize {
        self.col_names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn has_integers(&self) -> bool {
        self.integer.iter().any(|&b| b)
    }

    /// Copy with every integrality flag cleared.
    pub fn relaxed(&self) -> LinearProgram {
        let mut lp = self.clone();
        lp.integer.iter_mut().for_each(|b| *b = false);
        lp
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.offset + self.cost.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    /// Writes free-format MPS. Integer columns sit between MARKER lines and
    /// always carry explicit bounds.
    pub fn write_mps<W: Write>(&self, name: &str, mut w: W) -> io::Result<()> {
        writeln!(w, "NAME {name}")?;
        writeln!(w, "ROWS")?;
        writeln!(w, " N obj")?;
        for (i, n) in self.row_names.iter().enumerate() {
            let kind = match (self.row_lower[i].is_finite(), self.row_upper[i].is_finite()) {
                (true, true) if self.row_lower[i] == self.row_upper[i] => "E",
                (true, _) => "G",
                (false, true) => "L",
                (false, false) => "N",
            };
            writeln!(w, " {kind} {n}")?;
        }

        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.num_cols()];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in r {
                by_col[j].push((i, a));
            }
        }
        writeln!(w, "COLUMNS")?;
        let mut in_int = false;
        let mut marker = 0;
        for j in 0..self.num_cols() {
            if self.integer[j] != in_int {
                let tag = if self.integer[j] { "'INTORG'" } else { "'INTEND'" };
                writeln!(w, " MARKER{marker} 'MARKER' {tag}")?;
                marker += 1;
                in_int = self.integer[j];
            }
            let c = &self.col_names[j];
            if self.cost[j] != 0.0 {
                writeln!(w, " {c} obj {}", self.cost[j])?;
            }
            for &(i, a) in &by_col[j] {
                writeln!(w, " {c} {} {a}", self.row_names[i])?;
            }
            if self.cost[j] == 0.0 && by_col[j].is_empty() {
                writeln!(w, " {c} obj 0")?;
            }
        }
        if in_int {
            writeln!(w, " MARKER{marker} 'MARKER' 'INTEND'")?;
        }

        writeln!(w, "RHS")?;
        if self.offset != 0.0 {
            writeln!(w, " rhs obj {}", -self.offset)?;
        }
        for (i, n) in self.row_names.iter().enumerate() {
            let (lo, up) = (self.row_lower[i], self.row_upper[i]);
            let rhs = if lo.is_finite() { lo } else { up };
            if rhs.is_finite() && rhs != 0.0 {
                writeln!(w, " rhs {n} {rhs}")?;
            }
        }
        let ranged: Vec<usize> = (0..self.num_rows())
            .filter(|&i| {
                self.row_lower[i].is_finite()
                    && self.row_upper[i].is_finite()
                    && self.row_lower[i] != self.row_upper[i]
            })
            .collect();
        if !ranged.is_empty() {
            writeln!(w, "RANGES")?;
            for i in ranged {
                writeln!(
                    w,
                    " rng {} {}",
                    self.row_names[i],
                    self.row_upper[i] - self.row_lower[i]
                )?;
            }
        }

        writeln!(w, "BOUNDS")?;
        for j in 0..self.num_cols() {
            let (lo, up) = (self.col_lower[j], self.col_upper[j]);
            let c = &self.col_names[j];
            if self.integer[j] && lo == 0.0 && up == 1.0 {
                writeln!(w, " BV bnd {c}")?;
                continue;
            }
            match (lo.is_finite(), up.is_finite()) {
                (false, false) => writeln!(w, " FR bnd {c}")?,
                (false, true) => {
                    writeln!(w, " MI bnd {c}")?;
                    writeln!(w, " UP bnd {c} {up}")?;
                }
                (true, fin_up) => {
                    if lo == up {
                        writeln!(w, " FX bnd {c} {lo}")?;
                        continue;
                    }
                    if lo != 0.0 || self.integer[j] {
                        writeln!(w, " LO bnd {c} {lo}")?;
                    }
                    if fin_up {
                        writeln!(w, " UP bnd {c} {up}")?;
                    } else if self.integer[j] {
                        writeln!(w, " PL bnd {c}")?;
                    }
                }
            }
        }
        writeln!(w, "ENDATA")
    }
}
