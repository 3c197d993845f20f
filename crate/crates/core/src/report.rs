use std::fmt;

use crate::Scalar;

/// One named predicate with the residual that decided it.
#[derive(Debug, Clone, PartialEq)]
pub struct Check<T> {
    pub name: String,
    pub residual: T,
    pub pass: bool,
}

/// Ordered list of checks; passes iff every check passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Report<T> {
    pub checks: Vec<Check<T>>,
}

impl<T> Default for Report<T> {
    fn default() -> Self {
        Self { checks: Vec::new() }
    }
}

impl<T: Scalar> Report<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `name` as passing iff `residual ≤ limit`.
    pub fn bound(&mut self, name: impl Into<String>, residual: T, limit: T) {
        self.checks.push(Check {
            name: name.into(),
            residual,
            pass: residual <= limit,
        });
    }

    /// Records a boolean verdict with an informative residual.
    pub fn flag(&mut self, name: impl Into<String>, pass: bool, residual: T) {
        self.checks.push(Check {
            name: name.into(),
            residual,
            pass,
        });
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check<T>> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check<T>> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_residual(&self) -> T {
        self.checks
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.residual))
    }
}

impl<T: Scalar> fmt::Display for Report<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.pass { "ok" } else { "FAIL" };
            writeln!(f, "{tag:>4} {} ({:.3e})", c.name, c.residual)?;
        }
        Ok(())
    }
}
