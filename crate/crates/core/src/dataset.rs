//! Column-major discrete datasets.

use crate::error::{PgmError, Result};
use crate::network::{check_variable_ids, Variable};

/// Observed state index. Cardinalities above `u16::MAX` are rejected.
pub type State = u16;

/// Complete discrete data stored one column per variable, so every count or
/// CI test reads only the columns it needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    variables: Vec<Variable>,
    columns: Vec<Vec<State>>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(variables: Vec<Variable>, columns: Vec<Vec<State>>) -> Result<Self> {
        check_variable_ids(&variables)?;
        if columns.len() != variables.len() {
            return Err(PgmError::VariableMismatch(format!(
                "{} columns for {} variables",
                columns.len(),
                variables.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (v, col) in variables.iter().zip(&columns) {
            if v.card() > State::MAX as usize {
                return Err(PgmError::InvalidVariable(format!("{} has too many states", v.name)));
            }
            if col.len() != n_rows {
                return Err(PgmError::VariableMismatch(format!(
                    "column {} has {} rows, expected {n_rows}",
                    v.name,
                    col.len()
                )));
            }
            if let Some(bad) = col.iter().find(|&&s| s as usize >= v.card()) {
                return Err(PgmError::InvalidVariable(format!(
                    "state {bad} out of range for {}",
                    v.name
                )));
            }
        }
        Ok(Dataset { variables, columns, n_rows })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn card(&self, v: usize) -> usize {
        self.variables[v].card()
    }

    pub fn column(&self, v: usize) -> &[State] {
        &self.columns[v]
    }

    pub fn row(&self, r: usize) -> Vec<usize> {
        self.columns.iter().map(|c| c[r] as usize).collect()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Rows reordered so that new row `i` is old row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| perm.iter().map(|&r| c[r]).collect())
            .collect();
        Dataset { variables: self.variables.clone(), columns, n_rows: perm.len() }
    }

    /// Variables reordered so that new variable `i` is old variable `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Dataset {
        let variables = perm
            .iter()
            .enumerate()
            .map(|(i, &v)| Variable { id: i, ..self.variables[v].clone() })
            .collect();
        let columns = perm.iter().map(|&v| self.columns[v].clone()).collect();
        Dataset { variables, columns, n_rows: self.n_rows }
    }

    /// Re-express this dataset over `target` variables, matching variables
    /// and states by name. Every target variable must be present; extra
    /// columns are dropped.
    pub fn align_to(&self, target: &[Variable]) -> Result<Dataset> {
        let mut columns = Vec::with_capacity(target.len());
        for tv in target {
            let src = self.find(&tv.name).ok_or_else(|| {
                PgmError::VariableMismatch(format!("data has no column named {}", tv.name))
            })?;
            let sv = &self.variables[src];
            let map: Vec<State> = sv
                .states
                .iter()
                .map(|s| {
                    tv.state_index(s).map(|i| i as State).ok_or_else(|| {
                        PgmError::VariableMismatch(format!(
                            "state '{s}' of {} unknown to the model (states: {})",
                            tv.name,
                            tv.states.join(", ")
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            columns.push(self.columns[src].iter().map(|&s| map[s as usize]).collect());
        }
        Dataset::new(target.to_vec(), columns)
    }

    /// CSV with a header row and state names as cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.variables.iter().map(|v| v.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for r in 0..self.n_rows {
            for (k, (v, c)) in self.variables.iter().zip(&self.columns).enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&v.states[c[r] as usize]);
            }
            out.push('\n');
        }
        out
    }
}

/// Parse comma-separated text. Each column's distinct values, sorted
/// lexicographically, become its states.
pub fn load_csv(text: &str, header: bool) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (first_no, first) = lines.next().ok_or_else(|| PgmError::parse(1, "empty file"))?;
    let split = |l: &str| l.split(',').map(|c| c.trim().to_string()).collect::<Vec<_>>();
    let first_cells = split(first);
    let width = first_cells.len();
    let (names, mut raw_rows) = if header {
        (first_cells, Vec::new())
    } else {
        ((0..width).map(|i| format!("X{i}")).collect(), vec![first_cells])
    };
    for (no, line) in lines {
        let cells = split(line);
        if cells.len() != width {
            return Err(PgmError::parse(
                no,
                format!("ragged row: expected {width} fields, found {}", cells.len()),
            ));
        }
        raw_rows.push(cells);
    }
    if raw_rows.is_empty() {
        return Err(PgmError::parse(first_no, "no data rows"));
    }
    let mut variables = Vec::with_capacity(width);
    let mut columns = Vec::with_capacity(width);
    for (k, name) in names.into_iter().enumerate() {
        let mut states: Vec<String> = raw_rows.iter().map(|r| r[k].clone()).collect();
        states.sort();
        states.dedup();
        if states.len() < 2 {
            return Err(PgmError::InvalidVariable(format!(
                "column {name} is constant; cardinality must be at least 2"
            )));
        }
        let col = raw_rows
            .iter()
            .map(|r| states.binary_search(&r[k]).expect("state collected") as State)
            .collect();
        variables.push(Variable::new(k, name, states)?);
        columns.push(col);
    }
    Dataset::new(variables, columns)
}
